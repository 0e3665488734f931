//! Overdamped Brownian transport of nanospheres along the fiber under the
//! net two-color force, and synthetic kymograph rendering.
//!
//! Particles do not interact, so every trajectory is integrated
//! independently with its own counter-based random stream derived from the
//! master seed; serial and parallel execution produce identical ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::particle::{contact_radius_nm, polarizability, ParticleSpec};
use crate::taper::{BeamConfig, ForceProfile};
use crate::fiber::ModeSolution;
use crate::{Error, Result, BOLTZMANN_J_K};

/// Stokes drag of a sphere, with an optional near-wall enhancement factor
/// [N s/m].
pub fn drag_n_s_per_m(radius_nm: f64, viscosity_pa_s: f64, wall_factor: f64) -> f64 {
    6.0 * std::f64::consts::PI * viscosity_pa_s * radius_nm * 1e-9 * wall_factor
}

/// Diffusion coefficient D = k_BT / gamma [um^2/s].
pub fn diffusion_um2_per_s(drag: f64, temperature_k: f64) -> f64 {
    BOLTZMANN_J_K * temperature_k / drag * 1e12
}

/// One species in the simulated colloid mix.
#[derive(Debug, Clone, Copy)]
pub struct Species {
    pub particle: ParticleSpec,
    /// Poisson rate of new particles entering the window [1/s].
    pub injection_rate_per_s: f64,
}

/// Simulation parameters shared by all species.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub beams: BeamConfig,
    pub duration_s: f64,
    pub timestep_s: f64,
    pub temperature_k: f64,
    pub viscosity_pa_s: f64,
    /// Near-wall drag enhancement (1 = free Stokes drag).
    pub wall_drag_factor: f64,
    /// Optional Poisson detachment (sticking/escape) rate [1/s].
    pub detachment_rate_per_s: f64,
    /// Particles live on z in [-window_half, window_half] [um].
    pub window_half_um: f64,
    /// Trajectory sampling period; normally the camera frame period [s].
    pub sample_period_s: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            beams: BeamConfig::new(0.0, 12.0),
            duration_s: 20.0,
            timestep_s: 1e-3,
            temperature_k: 293.0,
            viscosity_pa_s: 1.002e-3,
            wall_drag_factor: 3.0,
            detachment_rate_per_s: 0.0,
            window_half_um: 300.0,
            sample_period_s: 0.05,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.beams.validate()?;
        if self.timestep_s <= 0.0 || self.duration_s < self.timestep_s {
            return Err(Error::Config(
                "need timestep > 0 and duration >= timestep".into(),
            ));
        }
        if self.temperature_k < 0.0 || self.viscosity_pa_s <= 0.0 {
            return Err(Error::Config("invalid temperature or viscosity".into()));
        }
        if self.wall_drag_factor < 1.0 {
            return Err(Error::Config("wall drag factor must be >= 1".into()));
        }
        if self.window_half_um <= 0.0 || self.sample_period_s <= 0.0 {
            return Err(Error::Config("invalid window or sample period".into()));
        }
        Ok(())
    }
}

/// One Euler-Maruyama step for a single particle.
///
/// `force_pn` is the net axial force, `drag` in N s/m, `noise` a standard
/// normal draw. Returns the new position [um].
pub fn step_particle(
    z_um: f64,
    force_pn: f64,
    drag: f64,
    diffusion_um2_s: f64,
    dt_s: f64,
    noise: f64,
) -> f64 {
    // v [um/s] = F[pN] * 1e-12 / gamma * 1e6
    let drift = force_pn * 1e-6 / drag;
    z_um + drift * dt_s + (2.0 * diffusion_um2_s * dt_s).sqrt() * noise
}

/// Advance a set of positions by one step against a force profile
/// (zero force outside the profile's valid range).
pub fn step(
    positions: &mut [f64],
    profile: &ForceProfile,
    drag: f64,
    diffusion_um2_s: f64,
    dt_s: f64,
    rng: &mut impl Rng,
) {
    for z in positions.iter_mut() {
        let f = profile.df_at(*z).unwrap_or(0.0);
        let noise: f64 = rng.sample(StandardNormal);
        *z = step_particle(*z, f, drag, diffusion_um2_s, dt_s, noise);
    }
}

/// A single simulated trajectory, sampled on the camera frame grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub species: usize,
    pub t_start_s: f64,
    /// (t [s], z [um]) samples, strictly increasing in t.
    pub samples: Vec<(f64, f64)>,
}

/// The full simulated ensemble (analysis ground truth).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ensemble {
    pub tracks: Vec<Track>,
}

/// Estimate of the stiffest force gradient on a profile [pN/um].
fn max_force_gradient(profile: &ForceProfile) -> f64 {
    let mut kmax = 0.0f64;
    for i in 1..profile.z_um.len() {
        if let (Some(a), Some(b)) = (profile.df_pn[i - 1], profile.df_pn[i]) {
            let dz = profile.z_um[i] - profile.z_um[i - 1];
            kmax = kmax.max(((b - a) / dz).abs());
        }
    }
    kmax
}

/// Run the injection-driven ensemble simulation. `profiles[i]` is the net
/// force profile for `species[i]` under `config.beams`.
pub fn run(config: &SimConfig, species: &[Species], profiles: &[ForceProfile]) -> Result<Ensemble> {
    config.validate()?;
    if species.len() != profiles.len() {
        return Err(Error::Config(
            "need exactly one force profile per species".into(),
        ));
    }
    for sp in species {
        sp.particle.validate()?;
        if sp.injection_rate_per_s < 0.0 {
            return Err(Error::Config("injection rate must be >= 0".into()));
        }
    }
    // stability: kappa dt / gamma < 0.1 near the stiffest trap
    for (sp, profile) in species.iter().zip(profiles) {
        let drag = drag_n_s_per_m(
            sp.particle.radius_nm(),
            config.viscosity_pa_s,
            config.wall_drag_factor,
        );
        let kappa = max_force_gradient(profile) * 1e-6; // pN/um -> N/m
        if kappa * config.timestep_s / drag >= 0.1 {
            return Err(Error::Config(format!(
                "timestep too large: kappa dt / gamma = {:.3}",
                kappa * config.timestep_s / drag
            )));
        }
    }

    // injection schedule from stream 0 of the master seed
    let mut schedule: Vec<(f64, usize, f64)> = Vec::new(); // (t0, species, z0)
    let mut inject_rng = ChaCha8Rng::seed_from_u64(config.seed);
    inject_rng.set_stream(0);
    for (si, sp) in species.iter().enumerate() {
        if sp.injection_rate_per_s == 0.0 {
            continue;
        }
        let mut t = 0.0;
        loop {
            let gap: f64 = -(1.0 - inject_rng.gen::<f64>()).ln() / sp.injection_rate_per_s;
            t += gap;
            if t >= config.duration_s {
                break;
            }
            let z0 = inject_rng.gen_range(-config.window_half_um..config.window_half_um);
            schedule.push((t, si, z0));
        }
    }
    schedule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut tracks = Vec::with_capacity(schedule.len());
    for (pid, &(t0, si, z0)) in schedule.iter().enumerate() {
        let sp = &species[si];
        let drag = drag_n_s_per_m(
            sp.particle.radius_nm(),
            config.viscosity_pa_s,
            config.wall_drag_factor,
        );
        let diffusion = diffusion_um2_per_s(drag, config.temperature_k);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(pid as u64 + 1);
        let mut z = z0;
        let mut t = t0;
        let sample = config.sample_period_s;
        let mut next_sample = (t0 / sample).ceil() * sample;
        if next_sample < t0 {
            next_sample += sample;
        }
        let mut samples = Vec::new();
        while t < config.duration_s && z.abs() <= config.window_half_um {
            let dt = config.timestep_s.min(config.duration_s - t);
            let f = profiles[si].df_at(z).unwrap_or(0.0);
            let noise: f64 = rng.sample(StandardNormal);
            z = step_particle(z, f, drag, diffusion, dt, noise);
            t += dt;
            if config.detachment_rate_per_s > 0.0
                && rng.gen::<f64>() < config.detachment_rate_per_s * dt
            {
                break;
            }
            if t + 1e-12 >= next_sample {
                if z.abs() <= config.window_half_um {
                    samples.push((next_sample, z));
                }
                next_sample += sample;
            }
        }
        if !samples.is_empty() {
            tracks.push(Track {
                id: pid as u64,
                species: si,
                t_start_s: t0,
                samples,
            });
        }
    }
    Ok(Ensemble { tracks })
}

/// Camera model for kymograph rendering.
#[derive(Debug, Clone, Copy)]
pub struct RenderConfig {
    pub num_frames: usize,
    pub num_pixels: usize,
    pub pixel_pitch_um: f64,
    pub frame_period_s: f64,
    /// z position imaged onto pixel 0 [um].
    pub view_min_um: f64,
    pub psf_sigma_px: f64,
    pub background_rms: f64,
    pub shot_noise_factor: f64,
    pub camera_gain: f64,
    pub seed: u64,
}

impl RenderConfig {
    /// Camera covering [-window_half, window_half] with the default
    /// calibration (0.5 um/px, 20 ms x 2.5 = 50 ms frames).
    pub fn covering(window_half_um: f64, num_frames: usize, seed: u64) -> Self {
        let pitch = 0.5;
        Self {
            num_frames,
            num_pixels: (2.0 * window_half_um / pitch).round() as usize,
            pixel_pitch_um: pitch,
            frame_period_s: 0.05,
            view_min_um: -window_half_um,
            psf_sigma_px: 1.0,
            background_rms: 1.0,
            shot_noise_factor: 0.1,
            camera_gain: 200.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_frames == 0 || self.num_pixels == 0 {
            return Err(Error::Config("empty kymograph dimensions".into()));
        }
        if self.pixel_pitch_um <= 0.0 || self.frame_period_s <= 0.0 || self.psf_sigma_px <= 0.0 {
            return Err(Error::Config(
                "pixel pitch, frame period and PSF width must be positive".into(),
            ));
        }
        if self.background_rms < 0.0 || self.shot_noise_factor < 0.0 || self.camera_gain <= 0.0 {
            return Err(Error::Config("invalid noise/gain parameters".into()));
        }
        Ok(())
    }
}

/// Space-time intensity matrix I(f, p), row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Kymograph {
    pub num_frames: usize,
    pub num_pixels: usize,
    pub pixel_pitch_um: f64,
    pub frame_period_s: f64,
    pub data: Vec<f64>,
}

impl Kymograph {
    pub fn at(&self, frame: usize, pixel: usize) -> f64 {
        self.data[frame * self.num_pixels + pixel]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.num_pixels..(frame + 1) * self.num_pixels]
    }
}

/// Scattering brightness of a species (arbitrary camera units before
/// gain): sum over beams of sigma_scat x local intensity x power, with the
/// particle at the surface-contact position.
pub fn species_brightness(
    particle: &ParticleSpec,
    mode1: &ModeSolution,
    mode2: &ModeSolution,
    beams: BeamConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for (mode, p_mw) in [(mode1, beams.p1_mw), (mode2, beams.p2_mw)] {
        let r = contact_radius_nm(mode, particle);
        let intensity = mode.intensity_per_w(r, 0.0)? * 1e-6; // 1/nm^2 per W
        let response = polarizability(particle, mode.wavelength_nm)?;
        total += response.sigma_scat_nm2 * intensity * p_mw;
    }
    Ok(total)
}

/// Render the ensemble into a noisy kymograph. `brightness[i]` is the
/// species-i spot amplitude before camera gain.
pub fn render_kymograph(
    ensemble: &Ensemble,
    brightness: &[f64],
    cfg: &RenderConfig,
) -> Result<Kymograph> {
    cfg.validate()?;
    let mut data = vec![0.0f64; cfg.num_frames * cfg.num_pixels];
    for track in &ensemble.tracks {
        let amp = cfg.camera_gain
            * *brightness
                .get(track.species)
                .ok_or_else(|| Error::Config("missing species brightness".into()))?;
        for &(t, z) in &track.samples {
            let frame = (t / cfg.frame_period_s).round() as i64;
            if frame < 0 || frame as usize >= cfg.num_frames {
                continue;
            }
            let pc = (z - cfg.view_min_um) / cfg.pixel_pitch_um;
            let reach = (4.0 * cfg.psf_sigma_px).ceil() as i64;
            let p0 = (pc.round() as i64 - reach).max(0);
            let p1 = (pc.round() as i64 + reach).min(cfg.num_pixels as i64 - 1);
            for p in p0..=p1 {
                let d = (p as f64 - pc) / cfg.psf_sigma_px;
                data[frame as usize * cfg.num_pixels + p as usize] += amp * (-0.5 * d * d).exp();
            }
        }
    }
    if cfg.background_rms > 0.0 || cfg.shot_noise_factor > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(u64::MAX);
        for v in data.iter_mut() {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            *v = (*v + cfg.background_rms * n1 + cfg.shot_noise_factor * v.abs().sqrt() * n2)
                .max(0.0);
        }
    }
    Ok(Kymograph {
        num_frames: cfg.num_frames,
        num_pixels: cfg.num_pixels,
        pixel_pitch_um: cfg.pixel_pitch_um,
        frame_period_s: cfg.frame_period_s,
        data,
    })
}
