//! Subcommand implementations. Each command resolves the configuration,
//! writes its outputs under the chosen directory and returns the list of
//! files written (for the manifest).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nanosieve::analysis::{
    background_rms, dominant_lines, extract_peaks, hough, link_trajectories, velocity_stats,
    PeakSet,
};
use nanosieve::fiber::{solve_he11, surface_intensity_curve, ModeSolution};
use nanosieve::io;
use nanosieve::particle::axial_force;
use nanosieve::taper::{find_traps, potential, BeamConfig, TaperForceModel, TaperGeometry};
use nanosieve::transport::{render_kymograph, run, species_brightness, Kymograph};
use nanosieve::{Error, Result};

use crate::config::Config;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn waist_modes(cfg: &Config) -> Result<(ModeSolution, ModeSolution)> {
    let f = cfg.fiber.to_spec();
    let m1 = solve_he11(
        f.core_index,
        f.medium_index,
        f.waist_diameter_nm,
        cfg.beams.wavelength1_nm,
    )?;
    let m2 = solve_he11(
        f.core_index,
        f.medium_index,
        f.waist_diameter_nm,
        cfg.beams.wavelength2_nm,
    )?;
    Ok((m1, m2))
}

pub fn cmd_modes(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let fiber = cfg.fiber.to_spec();
    let curve = surface_intensity_curve(
        &fiber,
        &[cfg.beams.wavelength1_nm, cfg.beams.wavelength2_nm],
        cfg.modes.d_min_nm,
        cfg.modes.d_max_nm,
        cfg.modes.d_step_nm,
    )?;
    let path = out.join("surface_intensity.csv");
    let mut w = create(&path)?;
    io::write_surface_curve_csv(&mut w, &curve)?;
    w.flush()?;
    Ok(vec![path])
}

pub fn cmd_forces(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let (m1, m2) = waist_modes(cfg)?;
    let fc = &cfg.forces;
    if !(fc.d_gns_min_nm > 0.0 && fc.d_gns_max_nm > fc.d_gns_min_nm && fc.d_gns_step_nm > 0.0) {
        return Err(Error::Config("invalid forces particle-diameter range".into()));
    }
    let mut rows = Vec::new();
    let mut d = fc.d_gns_min_nm;
    while d <= fc.d_gns_max_nm + 1e-9 {
        let particle = cfg.particle.to_spec_with_diameter(d)?;
        let f1 = axial_force(&particle, &m1, 1.0, 1.0)?.f_axial_pn;
        let f2 = axial_force(&particle, &m2, 1.0, 1.0)?.f_axial_pn;
        if f2 == 0.0 {
            return Err(Error::Numeric(format!(
                "zero second-color force at D = {d} nm; ratio undefined"
            )));
        }
        rows.push((d, f1, f2, f1 / f2));
        d += fc.d_gns_step_nm;
    }
    let path = out.join("force_curve.csv");
    let mut w = create(&path)?;
    io::write_force_curve_csv(&mut w, &rows)?;
    w.flush()?;
    Ok(vec![path])
}

fn taper_model(cfg: &Config, diameter_gns_nm: f64) -> Result<TaperForceModel> {
    let fiber = cfg.fiber.to_spec();
    let z_half = cfg.taper.z_half_um.max(cfg.sim.window_half_um);
    let geometry = TaperGeometry::from_fiber(&fiber, z_half, cfg.taper.dz_um)?;
    TaperForceModel::build(
        &fiber,
        geometry,
        cfg.particle.to_spec_with_diameter(diameter_gns_nm)?,
        cfg.beams.wavelength1_nm,
        cfg.beams.wavelength2_nm,
    )
}

pub fn cmd_trap(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let model = taper_model(cfg, cfg.particle.diameter_nm)?;
    let profile = model.force_profile(cfg.beams.to_beams())?;
    let pot = potential(&profile);
    let report = find_traps(&profile);

    let profile_path = out.join("profile.csv");
    let mut w = create(&profile_path)?;
    io::write_profile_csv(&mut w, &profile, &pot)?;
    w.flush()?;

    let report_path = out.join("trap_report.txt");
    let mut w = create(&report_path)?;
    io::write_trap_report(&mut w, &report)?;
    if cfg.beams.p2_mw > 0.0 {
        match model.balance_power(cfg.beams.p2_mw) {
            Ok(b) => writeln!(
                w,
                "balance_p1_mw = {b:.6} (at P2 = {} mW)",
                cfg.beams.p2_mw
            )?,
            Err(Error::NoBalance(_)) => writeln!(w, "balance_p1_mw = none")?,
            Err(e) => return Err(e),
        }
    }
    w.flush()?;
    Ok(vec![profile_path, report_path])
}

/// Simulate the configured species mix and render its kymograph.
fn simulate_once(cfg: &Config, beams: BeamConfig, seed: u64) -> Result<(Kymograph, usize)> {
    let species = cfg.sim.species(&cfg.particle)?;
    let mut profiles = Vec::with_capacity(species.len());
    let mut brightness = Vec::with_capacity(species.len());
    let (m1, m2) = waist_modes(cfg)?;
    for sc in &cfg.sim.species {
        let model = taper_model(cfg, sc.diameter_nm)?;
        profiles.push(model.force_profile(beams)?);
        brightness.push(species_brightness(
            &cfg.particle.to_spec_with_diameter(sc.diameter_nm)?,
            &m1,
            &m2,
            beams,
        )?);
    }
    let mut sim = cfg.sim.to_sim_config(beams);
    sim.seed = seed;
    let ensemble = run(&sim, &species, &profiles)?;
    let n_tracks = ensemble.tracks.len();
    let mut render = cfg.render.to_render_config(&cfg.sim)?;
    render.seed = seed;
    let kymo = render_kymograph(&ensemble, &brightness, &render)?;
    Ok((kymo, n_tracks))
}

pub fn cmd_simulate(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    let beams = cfg.beams.to_beams();
    let species = cfg.sim.species(&cfg.particle)?;
    let mut profiles = Vec::with_capacity(species.len());
    let mut brightness = Vec::with_capacity(species.len());
    let (m1, m2) = waist_modes(cfg)?;
    for sc in &cfg.sim.species {
        let model = taper_model(cfg, sc.diameter_nm)?;
        profiles.push(model.force_profile(beams)?);
        brightness.push(species_brightness(
            &cfg.particle.to_spec_with_diameter(sc.diameter_nm)?,
            &m1,
            &m2,
            beams,
        )?);
    }
    let sim = cfg.sim.to_sim_config(beams);
    let ensemble = run(&sim, &species, &profiles)?;
    let render = cfg.render.to_render_config(&cfg.sim)?;
    let kymo = render_kymograph(&ensemble, &brightness, &render)?;

    let ens_path = out.join("ensemble.txt");
    let mut w = create(&ens_path)?;
    io::write_ensemble(&mut w, &ensemble)?;
    w.flush()?;

    let csv_path = out.join("kymograph.csv");
    let mut w = create(&csv_path)?;
    io::write_kymograph_csv(&mut w, &kymo)?;
    w.flush()?;

    let pgm_path = out.join("kymograph.pgm");
    let mut w = create(&pgm_path)?;
    io::write_kymograph_pgm(&mut w, &kymo)?;
    w.flush()?;

    Ok(vec![ens_path, csv_path, pgm_path])
}

fn read_kymograph(cfg: &Config, input: &Path) -> Result<Kymograph> {
    let file = BufReader::new(File::open(input)?);
    let pitch = cfg.render.pixel_pitch_um;
    let period = cfg.render.frame_period_s;
    match input.extension().and_then(|e| e.to_str()) {
        Some("pgm") => io::read_kymograph_pgm(file, pitch, period),
        _ => io::read_kymograph_csv(file, pitch, period),
    }
}

struct Analysis {
    peaks: PeakSet,
    lines: Vec<nanosieve::analysis::Line>,
    dominant_theta_deg: Option<f64>,
    trajectories: Vec<nanosieve::analysis::Trajectory>,
    stats: Option<(f64, f64)>,
}

fn analyze_kymograph(cfg: &Config, kymo: &Kymograph) -> Result<Analysis> {
    let ac = &cfg.analysis;
    let rms = background_rms(kymo);
    let peaks = extract_peaks(kymo, ac.prominence_rms_factor * rms, ac.min_separation_px);
    let (lines, dominant) = if peaks.peaks.len() >= 2 {
        let spectrum = hough(&peaks, ac.theta_res_deg, ac.rho_res)?;
        (
            dominant_lines(&spectrum, ac.top_k_lines),
            Some(spectrum.dominant.theta_deg),
        )
    } else {
        (Vec::new(), None)
    };
    let trajectories: Vec<_> = link_trajectories(&peaks, ac.max_gap_frames, ac.max_jump_px)
        .into_iter()
        .filter(|t| t.peaks.len() >= ac.min_track_peaks)
        .collect();
    let stats = velocity_stats(&trajectories).ok();
    Ok(Analysis {
        peaks,
        lines,
        dominant_theta_deg: dominant,
        trajectories,
        stats,
    })
}

fn write_analysis(analysis: &Analysis, out: &Path) -> Result<Vec<PathBuf>> {
    let peaks_path = out.join("peaks.csv");
    let mut w = create(&peaks_path)?;
    io::write_peaks_csv(&mut w, &analysis.peaks)?;
    w.flush()?;

    let lines_path = out.join("lines.csv");
    let mut w = create(&lines_path)?;
    io::write_lines_csv(&mut w, &analysis.lines)?;
    w.flush()?;

    let traj_path = out.join("trajectories.txt");
    let mut w = create(&traj_path)?;
    io::write_trajectories(&mut w, &analysis.trajectories)?;
    match (analysis.stats, analysis.dominant_theta_deg) {
        (Some((mean, std)), theta) => {
            writeln!(
                w,
                "summary: n = {}, mean_velocity_um_s = {mean:.4}, velocity_std_um_s = {std:.4}, dominant_theta_deg = {}",
                analysis.trajectories.len(),
                theta.map_or("none".into(), |t| format!("{t:.1}")),
            )?;
        }
        _ => writeln!(w, "summary: no trajectories")?,
    }
    w.flush()?;
    Ok(vec![peaks_path, lines_path, traj_path])
}

pub fn cmd_analyze(cfg: &Config, input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let kymo = read_kymograph(cfg, input)?;
    let analysis = analyze_kymograph(cfg, &kymo)?;
    write_analysis(&analysis, out)
}

pub fn cmd_sweep(cfg: &Config, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.sweep.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.workers)
        .build()
        .map_err(|e| Error::Config(format!("sweep worker pool: {e}")))?;

    struct PointResult {
        p1_mw: f64,
        files: Vec<PathBuf>,
        theta_deg: Option<f64>,
        votes: Option<u32>,
        stats: Option<(f64, f64)>,
        n_trajectories: usize,
        n_tracks: usize,
    }

    use rayon::prelude::*;
    let results: Vec<Result<PointResult>> = pool.install(|| {
        cfg.sweep
            .p1_list_mw
            .par_iter()
            .enumerate()
            .map(|(i, &p1)| {
                let beams = BeamConfig::new(p1, cfg.beams.p2_mw);
                let seed = cfg.sim.seed.wrapping_add(1 + i as u64);
                let (kymo, n_tracks) = simulate_once(cfg, beams, seed)?;
                let analysis = analyze_kymograph(cfg, &kymo)?;
                let point_dir = out.join(format!("p1_{p1}mW"));
                let pgm_path = point_dir.join("kymograph.pgm");
                let mut w = create(&pgm_path)?;
                io::write_kymograph_pgm(&mut w, &kymo)?;
                w.flush()?;
                let mut files = vec![pgm_path];
                files.extend(write_analysis(&analysis, &point_dir)?);
                let votes = analysis.lines.first().map(|l| l.votes);
                Ok(PointResult {
                    p1_mw: p1,
                    files,
                    theta_deg: analysis.dominant_theta_deg,
                    votes,
                    stats: analysis.stats,
                    n_trajectories: analysis.trajectories.len(),
                    n_tracks,
                })
            })
            .collect()
    });
    let results: Vec<PointResult> = results.into_iter().collect::<Result<_>>()?;

    let summary_path = out.join("summary.csv");
    let mut w = create(&summary_path)?;
    writeln!(
        w,
        "p1_mw, theta_deg, votes, mean_velocity_um_s, velocity_std_um_s, n_trajectories, n_tracks"
    )?;
    for r in &results {
        let theta = r.theta_deg.map_or("nan".into(), |t| t.to_string());
        let votes = r.votes.map_or("0".into(), |v| v.to_string());
        let (mean, std) = r
            .stats
            .map_or(("nan".into(), "nan".into()), |(m, s)| {
                (m.to_string(), s.to_string())
            });
        writeln!(
            w,
            "{}, {theta}, {votes}, {mean}, {std}, {}, {}",
            r.p1_mw, r.n_trajectories, r.n_tracks
        )?;
    }
    w.flush()?;

    let mut files = vec![summary_path];
    for r in results {
        files.extend(r.files);
    }
    Ok(files)
}
