//! Closure tests: synthetic ensembles rendered into kymographs must come
//! back out of the analysis stage with the planted kinematics.

use nanosieve::analysis::{
    dominant_lines, extract_peaks, hough, link_trajectories, velocity_stats,
};
use nanosieve::particle::ParticleSpec;
use nanosieve::taper::{BeamConfig, ForceProfile};
use nanosieve::transport::{
    render_kymograph, run, Ensemble, RenderConfig, SimConfig, Species, Track,
};

fn drifting_track(id: u64, z0_um: f64, v_um_s: f64, frames: usize, period: f64) -> Track {
    Track {
        id,
        species: 0,
        t_start_s: 0.0,
        samples: (0..frames)
            .map(|f| {
                let t = f as f64 * period;
                (t, z0_um + v_um_s * t)
            })
            .collect(),
    }
}

fn quiet_camera(window_half_um: f64, num_frames: usize) -> RenderConfig {
    let mut cfg = RenderConfig::covering(window_half_um, num_frames, 0);
    cfg.background_rms = 0.0;
    cfg.shot_noise_factor = 0.0;
    cfg
}

/// Hough normal angle -> kymograph velocity [um/s].
fn theta_to_velocity(theta_deg: f64, cfg: &RenderConfig) -> f64 {
    let th = theta_deg.to_radians();
    -th.cos() / th.sin() * cfg.pixel_pitch_um / cfg.frame_period_s
}

#[test]
fn zero_noise_velocities_recovered_within_5_percent() {
    let truth = [12.0, -18.0, 25.0];
    let cfg = quiet_camera(50.0, 40);
    let ensemble = Ensemble {
        tracks: truth
            .iter()
            .enumerate()
            .map(|(i, &v)| drifting_track(i as u64, -30.0 + 25.0 * i as f64, v, 40, 0.05))
            .collect(),
    };
    let kymo = render_kymograph(&ensemble, &[1.0], &cfg).unwrap();
    let peaks = extract_peaks(&kymo, 1.0, 3);
    let trajectories = link_trajectories(&peaks, 2, 4.0);
    let long: Vec<_> = trajectories
        .into_iter()
        .filter(|t| t.peaks.len() >= 10)
        .collect();
    assert_eq!(long.len(), truth.len());
    let mut recovered: Vec<f64> = long.iter().map(|t| t.mean_velocity_um_s).collect();
    recovered.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut expected = truth;
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (r, e) in recovered.iter().zip(expected) {
        assert!(
            (r - e).abs() <= 0.05 * e.abs(),
            "recovered {r} vs planted {e}"
        );
    }
    let (_, _) = velocity_stats(&long).unwrap();
}

#[test]
fn five_parallel_drifters_give_five_hough_lines() {
    let v = 20.0; // 2 px/frame
    let cfg = quiet_camera(60.0, 50);
    let ensemble = Ensemble {
        tracks: (0..5)
            .map(|i| drifting_track(i, -55.0 + 18.0 * i as f64, v, 50, 0.05))
            .collect(),
    };
    let kymo = render_kymograph(&ensemble, &[1.0], &cfg).unwrap();
    let peaks = extract_peaks(&kymo, 1.0, 3);
    let spectrum = hough(&peaks, 1.0, 1.0).unwrap();
    let lines = dominant_lines(&spectrum, 5);
    assert_eq!(lines.len(), 5);
    for line in &lines {
        let v_line = theta_to_velocity(line.theta_deg, &cfg);
        assert!(
            (v_line - v).abs() <= 0.10 * v.abs(),
            "line velocity {v_line} vs planted {v}"
        );
    }
    // the five lines are distinct in rho
    let mut rhos: Vec<f64> = lines.iter().map(|l| l.rho).collect();
    rhos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in rhos.windows(2) {
        assert!(w[1] - w[0] > 2.0);
    }
}

#[test]
fn trapped_particle_maps_to_vertical_band() {
    let cfg = quiet_camera(40.0, 60);
    let ensemble = Ensemble {
        tracks: vec![drifting_track(0, 12.0, 0.0, 60, 0.05)],
    };
    let kymo = render_kymograph(&ensemble, &[1.0], &cfg).unwrap();
    let peaks = extract_peaks(&kymo, 1.0, 3);
    let spectrum = hough(&peaks, 1.0, 1.0).unwrap();
    assert!(
        (spectrum.dominant.theta_deg - 90.0).abs() <= 2.0,
        "theta = {}",
        spectrum.dominant.theta_deg
    );
}

fn flat_profile(force_pn: f64, half: f64) -> ForceProfile {
    let z: Vec<f64> = (0..=120).map(|i| -half + half / 60.0 * i as f64).collect();
    let n = z.len();
    ForceProfile {
        d_nm: vec![550.0; n],
        f640_pn: vec![Some(force_pn); n],
        f785_pn: vec![Some(0.0); n],
        df_pn: vec![Some(force_pn); n],
        z_um: z,
        beams: BeamConfig::new(1.0, 0.0),
        particle: ParticleSpec::gold(100.0),
    }
}

#[test]
fn simulate_render_analyze_replay_is_bit_identical() {
    let config = SimConfig {
        duration_s: 6.0,
        seed: 42,
        window_half_um: 80.0,
        ..SimConfig::default()
    };
    let species = vec![Species {
        particle: ParticleSpec::gold(100.0),
        injection_rate_per_s: 1.5,
    }];
    let profiles = vec![flat_profile(0.02, 80.0)];
    let render = RenderConfig::covering(config.window_half_um, 120, config.seed);

    let pass = || {
        let ensemble = run(&config, &species, &profiles).unwrap();
        let kymo = render_kymograph(&ensemble, &[1.0], &render).unwrap();
        let peaks = extract_peaks(&kymo, 3.0, 3);
        let trajectories = link_trajectories(&peaks, 2, 6.0);
        (ensemble, kymo, peaks, trajectories)
    };
    let a = pass();
    let b = pass();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    assert_eq!(a.3, b.3);
    assert!(!a.0.tracks.is_empty());
}
