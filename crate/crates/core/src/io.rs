//! Plain-text serialization: CSV tables for curves, profiles and analysis
//! products, binary 8-bit PGM kymograph export, and the matching readers
//! used by the analyze command.
//!
//! CSV floats are written with `{}` (shortest round-trip representation),
//! so CSV round trips are lossless; PGM is explicitly 8-bit quantized.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::analysis::{Line, PeakSet, Trajectory};
use crate::fiber::SurfaceIntensityCurve;
use crate::taper::{ForceProfile, PotentialProfile, TrapReport};
use crate::transport::{Ensemble, Kymograph};
use crate::{Error, Result};

/// Marker written for grid points past mode cutoff.
pub const CUTOFF_MARKER: &str = "cutoff";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Surface-intensity curves: `diameter_nm, I_640_per_W, I_785_per_W, ...`
/// with one intensity column per wavelength.
pub fn write_surface_curve_csv(w: &mut impl Write, curve: &SurfaceIntensityCurve) -> Result<()> {
    let mut header = String::from("diameter_nm");
    for wl in &curve.wavelengths_nm {
        write!(header, ", I_{}_per_W", format_wavelength(*wl)).unwrap();
    }
    writeln!(w, "{header}")?;
    for (i, d) in curve.diameters_nm.iter().enumerate() {
        let mut row = format!("{d}");
        for col in &curve.intensities {
            match col[i] {
                Some(v) => write!(row, ", {v}").unwrap(),
                None => write!(row, ", {CUTOFF_MARKER}").unwrap(),
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

fn format_wavelength(wl: f64) -> String {
    if (wl - wl.round()).abs() < 1e-9 {
        format!("{}", wl.round() as i64)
    } else {
        format!("{wl}")
    }
}

/// Size-dependent per-mW forces: `D_nm, F640_pN_per_mW, F785_pN_per_mW, R`.
pub fn write_force_curve_csv(w: &mut impl Write, rows: &[(f64, f64, f64, f64)]) -> Result<()> {
    writeln!(w, "D_nm, F640_pN_per_mW, F785_pN_per_mW, R")?;
    for (d, f640, f785, r) in rows {
        writeln!(w, "{d}, {f640}, {f785}, {r}")?;
    }
    Ok(())
}

/// Force/potential profile along the taper:
/// `z_um, d_nm, F640_pN, F785_pN, dF_pN, U_kBT`.
pub fn write_profile_csv(
    w: &mut impl Write,
    profile: &ForceProfile,
    potential: &PotentialProfile,
) -> Result<()> {
    writeln!(w, "z_um, d_nm, F640_pN, F785_pN, dF_pN, U_kBT")?;
    for i in 0..profile.z_um.len() {
        let mut row = format!("{}, {}", profile.z_um[i], profile.d_nm[i]);
        for value in [
            profile.f640_pn[i],
            profile.f785_pn[i],
            profile.df_pn[i],
            potential.u_kbt[i],
        ] {
            match value {
                Some(v) => write!(row, ", {v}").unwrap(),
                None => write!(row, ", {CUTOFF_MARKER}").unwrap(),
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Human-readable trap report.
pub fn write_trap_report(w: &mut impl Write, report: &TrapReport) -> Result<()> {
    writeln!(w, "zero crossings: {}", report.crossings.len())?;
    for c in &report.crossings {
        let kind = match c.kind {
            crate::taper::CrossingKind::Trap => "trap",
            crate::taper::CrossingKind::AntiTrap => "anti-trap",
        };
        writeln!(w, "  z_um = {:.1}  kind = {kind}", c.z_um)?;
    }
    match report.z_trap_um {
        Some(z) => {
            writeln!(w, "trap position z_um = {z:.1}")?;
            if let Some(k) = report.stiffness_pn_per_um {
                writeln!(w, "stiffness_pN_per_um = {k:.6e}")?;
            }
            if let Some(d) = report.depth_kbt {
                writeln!(w, "depth_kBT = {d:.3}")?;
            }
            writeln!(w, "open_trap = {}", report.open_trap)?;
        }
        None => writeln!(w, "no trap (transport-only regime)")?,
    }
    Ok(())
}

/// Detected peaks: `frame, pixel, intensity`.
pub fn write_peaks_csv(w: &mut impl Write, peaks: &PeakSet) -> Result<()> {
    writeln!(w, "frame, pixel, intensity")?;
    for p in &peaks.peaks {
        writeln!(w, "{}, {}, {}", p.frame, p.pixel, p.intensity)?;
    }
    Ok(())
}

/// Hough lines: `rho, theta_deg, votes`.
pub fn write_lines_csv(w: &mut impl Write, lines: &[Line]) -> Result<()> {
    writeln!(w, "rho, theta_deg, votes")?;
    for l in lines {
        writeln!(w, "{}, {}, {}", l.rho, l.theta_deg, l.votes)?;
    }
    Ok(())
}

/// Linked trajectories as structured text.
pub fn write_trajectories(w: &mut impl Write, trajectories: &[Trajectory]) -> Result<()> {
    for (id, t) in trajectories.iter().enumerate() {
        writeln!(
            w,
            "trajectory {id}: n = {}, velocity_um_s = {:.4}, velocity_std_um_s = {:.4}, duration_s = {:.3}",
            t.peaks.len(),
            t.mean_velocity_um_s,
            t.velocity_std_um_s,
            t.duration_s
        )?;
        let frames: Vec<String> = t.peaks.iter().map(|p| p.frame.to_string()).collect();
        let pixels: Vec<String> = t.peaks.iter().map(|p| p.pixel.to_string()).collect();
        writeln!(w, "  frames: {}", frames.join(" "))?;
        writeln!(w, "  pixels: {}", pixels.join(" "))?;
    }
    Ok(())
}

/// Ground-truth tracks as structured text: particle id, species, then
/// (t, z) samples.
pub fn write_ensemble(w: &mut impl Write, ensemble: &Ensemble) -> Result<()> {
    for track in &ensemble.tracks {
        writeln!(
            w,
            "particle {} species {} t_start_s {}",
            track.id, track.species, track.t_start_s
        )?;
        for (t, z) in &track.samples {
            writeln!(w, "  {t} {z}")?;
        }
    }
    Ok(())
}

/// Kymograph CSV: one row per frame, comma-separated pixel intensities.
pub fn write_kymograph_csv(w: &mut impl Write, kymo: &Kymograph) -> Result<()> {
    for f in 0..kymo.num_frames {
        let row: Vec<String> = kymo.row(f).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(", "))?;
    }
    Ok(())
}

/// Read a kymograph CSV written by [`write_kymograph_csv`] (or any
/// rectangular numeric CSV). Calibration is supplied by the caller.
pub fn read_kymograph_csv(
    r: impl BufRead,
    pixel_pitch_um: f64,
    frame_period_s: f64,
) -> Result<Kymograph> {
    let mut data = Vec::new();
    let mut num_pixels = 0usize;
    let mut num_frames = 0usize;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: Vec<f64> = trimmed
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(lineno + 1, format!("bad number {cell:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if num_frames == 0 {
            num_pixels = row.len();
        } else if row.len() != num_pixels {
            return Err(parse_err(
                lineno + 1,
                format!("ragged row: {} cells, expected {num_pixels}", row.len()),
            ));
        }
        data.extend(row);
        num_frames += 1;
    }
    if num_frames == 0 {
        return Err(parse_err(1, "empty kymograph file"));
    }
    Ok(Kymograph {
        num_frames,
        num_pixels,
        pixel_pitch_um,
        frame_period_s,
        data,
    })
}

/// Write an 8-bit binary PGM (P5), linearly quantized to the data maximum.
pub fn write_kymograph_pgm(w: &mut impl Write, kymo: &Kymograph) -> Result<()> {
    let max = kymo.data.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    writeln!(w, "P5")?;
    writeln!(w, "# kymograph: rows = frames, cols = pixels")?;
    writeln!(w, "{} {}", kymo.num_pixels, kymo.num_frames)?;
    writeln!(w, "255")?;
    let bytes: Vec<u8> = kymo
        .data
        .iter()
        .map(|v| ((v / max * 255.0).round().clamp(0.0, 255.0)) as u8)
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

/// Read a binary (P5) PGM kymograph.
pub fn read_kymograph_pgm(
    mut r: impl BufRead,
    pixel_pitch_um: f64,
    frame_period_s: f64,
) -> Result<Kymograph> {
    // header tokens: magic, width, height, maxval; '#' comments allowed
    let mut tokens = Vec::new();
    let mut lineno = 1usize;
    while tokens.len() < 4 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(parse_err(lineno, "truncated PGM header"));
        }
        let body = line.split('#').next().unwrap_or("");
        tokens.extend(body.split_whitespace().map(|s| s.to_string()));
        lineno += 1;
    }
    if tokens[0] != "P5" {
        return Err(parse_err(1, format!("not a binary PGM: magic {:?}", tokens[0])));
    }
    let width: usize = tokens[1]
        .parse()
        .map_err(|_| parse_err(1, "bad PGM width"))?;
    let height: usize = tokens[2]
        .parse()
        .map_err(|_| parse_err(1, "bad PGM height"))?;
    let maxval: f64 = tokens[3]
        .parse()
        .map_err(|_| parse_err(1, "bad PGM maxval"))?;
    let mut bytes = vec![0u8; width * height];
    r.read_exact(&mut bytes)
        .map_err(|_| parse_err(lineno, "truncated PGM pixel data"))?;
    Ok(Kymograph {
        num_frames: height,
        num_pixels: width,
        pixel_pitch_um,
        frame_period_s,
        data: bytes.into_iter().map(|b| b as f64 / maxval).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{surface_intensity_curve, FiberSpec};

    fn sample_kymo() -> Kymograph {
        Kymograph {
            num_frames: 4,
            num_pixels: 6,
            pixel_pitch_um: 0.5,
            frame_period_s: 0.05,
            data: (0..24).map(|i| (i as f64) * 0.37 + 0.001).collect(),
        }
    }

    #[test]
    fn kymograph_csv_round_trip_lossless() {
        let kymo = sample_kymo();
        let mut buf = Vec::new();
        write_kymograph_csv(&mut buf, &kymo).unwrap();
        let back = read_kymograph_csv(&buf[..], 0.5, 0.05).unwrap();
        assert_eq!(back, kymo);
    }

    #[test]
    fn kymograph_pgm_round_trip_quantized() {
        let kymo = sample_kymo();
        let mut buf = Vec::new();
        write_kymograph_pgm(&mut buf, &kymo).unwrap();
        let back = read_kymograph_pgm(&buf[..], 0.5, 0.05).unwrap();
        assert_eq!(back.num_frames, kymo.num_frames);
        assert_eq!(back.num_pixels, kymo.num_pixels);
        let max = kymo.data.iter().cloned().fold(0.0f64, f64::max);
        for (a, b) in back.data.iter().zip(&kymo.data) {
            assert!((a - b / max).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = "1, 2, 3\n4, oops, 6\n";
        match read_kymograph_csv(text.as_bytes(), 0.5, 0.05) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_csv_reports_line() {
        let text = "1, 2, 3\n4, 5\n";
        match read_kymograph_csv(text.as_bytes(), 0.5, 0.05) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn surface_curve_header_and_cutoff_marker() {
        let fiber = FiberSpec::default();
        // range dipping below 785 nm cutoff to force truncation markers
        let curve = surface_intensity_curve(&fiber, &[640.0, 785.0], 150.0, 600.0, 50.0).unwrap();
        assert!(curve.truncated(1));
        let mut buf = Vec::new();
        write_surface_curve_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("diameter_nm, I_640_per_W, I_785_per_W\n"));
        assert!(text.contains(CUTOFF_MARKER));
    }
}
