//! TOML run configuration. Every key carries its unit as a suffix; every
//! section has complete defaults so an empty file is a valid config.

use serde::{Deserialize, Serialize};

use nanosieve::fiber::FiberSpec;
use nanosieve::material::PermittivityModel;
use nanosieve::particle::{ParticleSpec, PolarizabilityModel};
use nanosieve::taper::BeamConfig;
use nanosieve::transport::{RenderConfig, SimConfig, Species};
use nanosieve::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub fiber: FiberCfg,
    pub particle: ParticleCfg,
    pub beams: BeamsCfg,
    pub modes: ModesCfg,
    pub forces: ForcesCfg,
    pub taper: TaperCfg,
    pub sim: SimCfg,
    pub render: RenderCfg,
    pub analysis: AnalysisCfg,
    pub sweep: SweepCfg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberCfg {
    pub core_index: f64,
    pub medium_index: f64,
    pub waist_diameter_nm: f64,
    pub waist_length_um: f64,
    pub taper_slope_nm_per_um: f64,
}

impl Default for FiberCfg {
    fn default() -> Self {
        let f = FiberSpec::default();
        Self {
            core_index: f.core_index,
            medium_index: f.medium_index,
            waist_diameter_nm: f.waist_diameter_nm,
            waist_length_um: f.waist_length_um,
            taper_slope_nm_per_um: f.taper_slope_nm_per_um,
        }
    }
}

impl FiberCfg {
    pub fn to_spec(&self) -> FiberSpec {
        FiberSpec {
            core_index: self.core_index,
            medium_index: self.medium_index,
            waist_diameter_nm: self.waist_diameter_nm,
            waist_length_um: self.waist_length_um,
            taper_slope_nm_per_um: self.taper_slope_nm_per_um,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleCfg {
    pub diameter_nm: f64,
    /// "drude-lorentz" or "tabulated".
    pub permittivity_model: String,
    /// "mie-a1" or "dipole".
    pub polarizability_model: String,
    pub medium_index: f64,
}

impl Default for ParticleCfg {
    fn default() -> Self {
        Self {
            diameter_nm: 100.0,
            permittivity_model: "drude-lorentz".into(),
            polarizability_model: "mie-a1".into(),
            medium_index: 1.33,
        }
    }
}

fn parse_permittivity(s: &str) -> Result<PermittivityModel> {
    match s {
        "drude-lorentz" => Ok(PermittivityModel::DrudeLorentz),
        "tabulated" => Ok(PermittivityModel::Tabulated),
        other => Err(Error::Config(format!(
            "unknown permittivity model '{other}' (expected 'drude-lorentz' or 'tabulated')"
        ))),
    }
}

fn parse_polarizability(s: &str) -> Result<PolarizabilityModel> {
    match s {
        "mie-a1" => Ok(PolarizabilityModel::MieA1),
        "dipole" => Ok(PolarizabilityModel::Dipole),
        other => Err(Error::Config(format!(
            "unknown polarizability model '{other}' (expected 'mie-a1' or 'dipole')"
        ))),
    }
}

impl ParticleCfg {
    pub fn to_spec_with_diameter(&self, diameter_nm: f64) -> Result<ParticleSpec> {
        Ok(ParticleSpec {
            diameter_nm,
            permittivity_model: parse_permittivity(&self.permittivity_model)?,
            polarizability_model: parse_polarizability(&self.polarizability_model)?,
            medium_index: self.medium_index,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamsCfg {
    pub p1_mw: f64,
    pub p2_mw: f64,
    pub wavelength1_nm: f64,
    pub wavelength2_nm: f64,
}

impl Default for BeamsCfg {
    fn default() -> Self {
        Self {
            p1_mw: 0.0,
            p2_mw: 12.0,
            wavelength1_nm: 640.0,
            wavelength2_nm: 785.0,
        }
    }
}

impl BeamsCfg {
    pub fn to_beams(&self) -> BeamConfig {
        BeamConfig::new(self.p1_mw, self.p2_mw)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesCfg {
    pub d_min_nm: f64,
    pub d_max_nm: f64,
    pub d_step_nm: f64,
}

impl Default for ModesCfg {
    fn default() -> Self {
        Self {
            d_min_nm: 400.0,
            d_max_nm: 1500.0,
            d_step_nm: 5.0,
        }
    }
}

/// Particle-diameter scan for the per-mW force curve at the waist.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcesCfg {
    pub d_gns_min_nm: f64,
    pub d_gns_max_nm: f64,
    pub d_gns_step_nm: f64,
}

impl Default for ForcesCfg {
    fn default() -> Self {
        Self {
            d_gns_min_nm: 40.0,
            d_gns_max_nm: 200.0,
            d_gns_step_nm: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaperCfg {
    pub z_half_um: f64,
    pub dz_um: f64,
}

impl Default for TaperCfg {
    fn default() -> Self {
        Self {
            z_half_um: 1500.0,
            dz_um: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesCfg {
    pub diameter_nm: f64,
    pub injection_rate_per_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimCfg {
    pub duration_s: f64,
    pub timestep_s: f64,
    pub temperature_k: f64,
    pub viscosity_pa_s: f64,
    pub wall_drag_factor: f64,
    pub detachment_rate_per_s: f64,
    pub window_half_um: f64,
    pub sample_period_s: f64,
    pub seed: u64,
    pub species: Vec<SpeciesCfg>,
}

impl Default for SimCfg {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            duration_s: s.duration_s,
            timestep_s: s.timestep_s,
            temperature_k: s.temperature_k,
            viscosity_pa_s: s.viscosity_pa_s,
            wall_drag_factor: s.wall_drag_factor,
            detachment_rate_per_s: s.detachment_rate_per_s,
            window_half_um: s.window_half_um,
            sample_period_s: s.sample_period_s,
            seed: s.seed,
            species: vec![
                SpeciesCfg {
                    diameter_nm: 100.0,
                    injection_rate_per_s: 1.5,
                },
                SpeciesCfg {
                    diameter_nm: 150.0,
                    injection_rate_per_s: 1.5,
                },
            ],
        }
    }
}

impl SimCfg {
    pub fn to_sim_config(&self, beams: BeamConfig) -> SimConfig {
        SimConfig {
            beams,
            duration_s: self.duration_s,
            timestep_s: self.timestep_s,
            temperature_k: self.temperature_k,
            viscosity_pa_s: self.viscosity_pa_s,
            wall_drag_factor: self.wall_drag_factor,
            detachment_rate_per_s: self.detachment_rate_per_s,
            window_half_um: self.window_half_um,
            sample_period_s: self.sample_period_s,
            seed: self.seed,
        }
    }

    pub fn species(&self, particle: &ParticleCfg) -> Result<Vec<Species>> {
        if self.species.is_empty() {
            return Err(Error::Config("sim.species must not be empty".into()));
        }
        self.species
            .iter()
            .map(|s| {
                Ok(Species {
                    particle: particle.to_spec_with_diameter(s.diameter_nm)?,
                    injection_rate_per_s: s.injection_rate_per_s,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderCfg {
    pub pixel_pitch_um: f64,
    pub frame_period_s: f64,
    pub psf_sigma_px: f64,
    pub background_rms: f64,
    pub shot_noise_factor: f64,
    pub camera_gain: f64,
}

impl Default for RenderCfg {
    fn default() -> Self {
        Self {
            pixel_pitch_um: 0.5,
            frame_period_s: 0.05,
            psf_sigma_px: 1.0,
            background_rms: 1.0,
            shot_noise_factor: 0.1,
            camera_gain: 200.0,
        }
    }
}

impl RenderCfg {
    /// Camera covering the simulation window for the full run duration.
    pub fn to_render_config(&self, sim: &SimCfg) -> Result<RenderConfig> {
        if self.frame_period_s <= 0.0 || self.pixel_pitch_um <= 0.0 {
            return Err(Error::Config(
                "render pixel pitch and frame period must be positive".into(),
            ));
        }
        let num_frames = (sim.duration_s / self.frame_period_s).round() as usize;
        Ok(RenderConfig {
            num_frames: num_frames.max(1),
            num_pixels: ((2.0 * sim.window_half_um / self.pixel_pitch_um).round() as usize).max(1),
            pixel_pitch_um: self.pixel_pitch_um,
            frame_period_s: self.frame_period_s,
            view_min_um: -sim.window_half_um,
            psf_sigma_px: self.psf_sigma_px,
            background_rms: self.background_rms,
            shot_noise_factor: self.shot_noise_factor,
            camera_gain: self.camera_gain,
            seed: sim.seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisCfg {
    /// Peak prominence threshold as a multiple of the background RMS.
    pub prominence_rms_factor: f64,
    pub min_separation_px: usize,
    pub theta_res_deg: f64,
    pub rho_res: f64,
    pub top_k_lines: usize,
    pub max_gap_frames: usize,
    pub max_jump_px: f64,
    /// Trajectories shorter than this many peaks are dropped from stats.
    pub min_track_peaks: usize,
}

impl Default for AnalysisCfg {
    fn default() -> Self {
        Self {
            prominence_rms_factor: 3.0,
            min_separation_px: 3,
            theta_res_deg: 1.0,
            rho_res: 1.0,
            top_k_lines: 5,
            max_gap_frames: 2,
            max_jump_px: 80.0,
            min_track_peaks: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepCfg {
    pub p1_list_mw: Vec<f64>,
    /// Parallel worker count; 0 = one per logical CPU.
    pub workers: usize,
}

impl Default for SweepCfg {
    fn default() -> Self {
        Self {
            p1_list_mw: (0..=8).map(|i| i as f64).collect(),
            workers: 0,
        }
    }
}

impl SweepCfg {
    pub fn validate(&self) -> Result<()> {
        if self.p1_list_mw.is_empty() {
            return Err(Error::Config("sweep.p1_list_mw must not be empty".into()));
        }
        for w in self.p1_list_mw.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(
                    "sweep.p1_list_mw must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Config {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}
