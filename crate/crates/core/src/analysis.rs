//! Kymograph analysis: per-frame peak extraction, Hough line spectrum with
//! dominant-angle readout, and nearest-peak trajectory linking with
//! velocity statistics.
//!
//! Axis convention: the frame index l runs horizontally, the pixel
//! position m vertically, and a line votes for rho = l cos(theta) +
//! m sin(theta). A trapped (constant-pixel) trajectory therefore peaks at
//! theta = 90 degrees.

use crate::transport::Kymograph;
use crate::{Error, Result};

/// Pixel/time calibration carried alongside peak data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub pixel_pitch_um: f64,
    pub frame_period_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frame: usize,
    pub pixel: usize,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    pub calibration: Calibration,
}

/// Robust background RMS estimate of a kymograph from the upper quantile
/// spread (q90 - median) / 1.2816. Unlike the plain MAD this stays correct
/// when the camera clamps negative noise excursions to zero, which empties
/// the lower half of the distribution.
pub fn background_rms(kymo: &Kymograph) -> f64 {
    let mut values: Vec<f64> = kymo.data.clone();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = values[values.len() / 2];
    let q90 = values[(values.len() as f64 * 0.9) as usize % values.len()];
    (q90 - median) / 1.2816
}

/// Prominence of the local maximum at `i`: height above the higher of the
/// two minima separating it from taller neighbors (or the row edges).
fn prominence(row: &[f64], i: usize) -> f64 {
    let peak = row[i];
    let mut left_min = peak;
    for j in (0..i).rev() {
        if row[j] > peak {
            break;
        }
        left_min = left_min.min(row[j]);
    }
    let mut right_min = peak;
    for &v in &row[i + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}

/// Per-frame local maxima above `min_prominence`, thinned so surviving
/// peaks are at least `min_separation` pixels apart (brightest first).
pub fn extract_peaks(kymo: &Kymograph, min_prominence: f64, min_separation: usize) -> PeakSet {
    let mut peaks = Vec::new();
    for f in 0..kymo.num_frames {
        let row = kymo.row(f);
        let mut frame_peaks: Vec<Peak> = Vec::new();
        for i in 1..row.len().saturating_sub(1) {
            if row[i] > row[i - 1] && row[i] > row[i + 1] && prominence(row, i) >= min_prominence {
                frame_peaks.push(Peak {
                    frame: f,
                    pixel: i,
                    intensity: row[i],
                });
            }
        }
        frame_peaks.sort_by(|a, b| b.intensity.partial_cmp(&a.intensity).unwrap());
        let mut kept: Vec<Peak> = Vec::new();
        for p in frame_peaks {
            if kept
                .iter()
                .all(|k| k.pixel.abs_diff(p.pixel) >= min_separation)
            {
                kept.push(p);
            }
        }
        kept.sort_by_key(|p| p.pixel);
        peaks.extend(kept);
    }
    PeakSet {
        peaks,
        calibration: Calibration {
            pixel_pitch_um: kymo.pixel_pitch_um,
            frame_period_s: kymo.frame_period_s,
        },
    }
}

/// One polar line with its vote count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub rho: f64,
    pub theta_deg: f64,
    pub votes: u32,
}

/// Discretized (rho, theta) accumulator.
#[derive(Debug, Clone)]
pub struct HoughSpectrum {
    counts: Vec<u32>,
    pub n_theta: usize,
    pub n_rho: usize,
    pub theta_res_deg: f64,
    pub rho_res: f64,
    pub rho_min: f64,
    /// Highest-vote line; vote ties break toward theta = 90 degrees.
    pub dominant: Line,
}

impl HoughSpectrum {
    pub fn votes(&self, theta_idx: usize, rho_idx: usize) -> u32 {
        self.counts[theta_idx * self.n_rho + rho_idx]
    }

    fn line_at(&self, theta_idx: usize, rho_idx: usize) -> Line {
        Line {
            rho: self.rho_min + (rho_idx as f64 + 0.5) * self.rho_res,
            theta_deg: theta_idx as f64 * self.theta_res_deg,
            votes: self.votes(theta_idx, rho_idx),
        }
    }
}

/// Accumulate Hough votes for every peak over theta in [0, 180).
pub fn hough(peaks: &PeakSet, theta_res_deg: f64, rho_res: f64) -> Result<HoughSpectrum> {
    if peaks.peaks.len() < 2 {
        return Err(Error::Numeric(
            "Hough spectrum undefined for fewer than 2 peaks".into(),
        ));
    }
    if theta_res_deg <= 0.0 || rho_res <= 0.0 {
        return Err(Error::Config("Hough resolutions must be positive".into()));
    }
    let n_theta = (180.0 / theta_res_deg).round() as usize;
    let rho_max = peaks
        .peaks
        .iter()
        .map(|p| ((p.frame * p.frame + p.pixel * p.pixel) as f64).sqrt())
        .fold(0.0f64, f64::max)
        + rho_res;
    let rho_min = -rho_max;
    let n_rho = ((2.0 * rho_max) / rho_res).ceil() as usize + 1;
    let mut counts = vec![0u32; n_theta * n_rho];
    for p in &peaks.peaks {
        let (l, m) = (p.frame as f64, p.pixel as f64);
        for it in 0..n_theta {
            let theta = (it as f64 * theta_res_deg).to_radians();
            let rho = l * theta.cos() + m * theta.sin();
            let ir = ((rho - rho_min) / rho_res).floor() as usize;
            counts[it * n_rho + ir.min(n_rho - 1)] += 1;
        }
    }
    let mut spectrum = HoughSpectrum {
        counts,
        n_theta,
        n_rho,
        theta_res_deg,
        rho_res,
        rho_min,
        dominant: Line {
            rho: 0.0,
            theta_deg: 0.0,
            votes: 0,
        },
    };
    let mut best: Option<Line> = None;
    for it in 0..n_theta {
        for ir in 0..n_rho {
            let cand = spectrum.line_at(it, ir);
            let better = match &best {
                None => cand.votes > 0,
                Some(b) => {
                    cand.votes > b.votes
                        || (cand.votes == b.votes
                            && (cand.theta_deg - 90.0).abs() < (b.theta_deg - 90.0).abs())
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    spectrum.dominant = best.unwrap();
    Ok(spectrum)
}

/// Top-k accumulator peaks after 5x5 non-maximum suppression. Returns
/// fewer than k when fewer distinct local maxima exist.
pub fn dominant_lines(spectrum: &HoughSpectrum, k: usize) -> Vec<Line> {
    let mut maxima: Vec<Line> = Vec::new();
    for it in 0..spectrum.n_theta {
        for ir in 0..spectrum.n_rho {
            let v = spectrum.votes(it, ir);
            if v == 0 {
                continue;
            }
            let mut is_max = true;
            'nbr: for dt in -2i64..=2 {
                for dr in -2i64..=2 {
                    if dt == 0 && dr == 0 {
                        continue;
                    }
                    let (jt, jr) = (it as i64 + dt, ir as i64 + dr);
                    if jt < 0 || jr < 0 || jt >= spectrum.n_theta as i64 || jr >= spectrum.n_rho as i64
                    {
                        continue;
                    }
                    let w = spectrum.votes(jt as usize, jr as usize);
                    // strict on earlier cells so plateau maxima yield one line
                    if w > v || (w == v && (dt, dr) < (0, 0)) {
                        is_max = false;
                        break 'nbr;
                    }
                }
            }
            if is_max {
                maxima.push(spectrum.line_at(it, ir));
            }
        }
    }
    maxima.sort_by(|a, b| {
        b.votes.cmp(&a.votes).then(
            (a.theta_deg - 90.0)
                .abs()
                .partial_cmp(&(b.theta_deg - 90.0).abs())
                .unwrap(),
        )
    });
    maxima.truncate(k);
    maxima
}

/// A linked peak track with its fitted velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub peaks: Vec<Peak>,
    /// Least-squares slope of z(t) [um/s].
    pub mean_velocity_um_s: f64,
    /// Sample standard deviation of the consecutive-step velocities [um/s].
    pub velocity_std_um_s: f64,
    pub duration_s: f64,
}

fn fit_velocity(peaks: &[Peak], cal: Calibration) -> f64 {
    let n = peaks.len() as f64;
    if peaks.len() < 2 {
        return 0.0;
    }
    let (mut st, mut sz, mut stt, mut stz) = (0.0, 0.0, 0.0, 0.0);
    for p in peaks {
        let t = p.frame as f64 * cal.frame_period_s;
        let z = p.pixel as f64 * cal.pixel_pitch_um;
        st += t;
        sz += z;
        stt += t * t;
        stz += t * z;
    }
    let denom = n * stt - st * st;
    if denom == 0.0 {
        0.0
    } else {
        (n * stz - st * sz) / denom
    }
}

fn step_velocity_std(peaks: &[Peak], cal: Calibration) -> f64 {
    if peaks.len() < 3 {
        return 0.0;
    }
    let vels: Vec<f64> = peaks
        .windows(2)
        .map(|w| {
            let dt = (w[1].frame - w[0].frame) as f64 * cal.frame_period_s;
            (w[1].pixel as f64 - w[0].pixel as f64) * cal.pixel_pitch_um / dt
        })
        .collect();
    let mean = vels.iter().sum::<f64>() / vels.len() as f64;
    let var = vels.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vels.len() - 1) as f64;
    var.sqrt()
}

/// Greedy nearest-neighbor linking of peaks in frame order.
///
/// A trajectory may skip up to `max_gap_frames` frames; a link is allowed
/// when the pixel jump per elapsed frame is at most `max_jump_px`. When two
/// candidate links have (near-)equal distance, the one with the smaller
/// velocity change wins, which carries crossing trajectories through the
/// intersection.
pub fn link_trajectories(
    peaks: &PeakSet,
    max_gap_frames: usize,
    max_jump_px: f64,
) -> Vec<Trajectory> {
    #[derive(Debug)]
    struct Open {
        peaks: Vec<Peak>,
        velocity_px_per_frame: Option<f64>,
    }
    let mut open: Vec<Open> = Vec::new();
    let mut closed: Vec<Vec<Peak>> = Vec::new();
    let mut by_frame: Vec<Vec<Peak>> = Vec::new();
    for p in &peaks.peaks {
        if p.frame >= by_frame.len() {
            by_frame.resize(p.frame + 1, Vec::new());
        }
        by_frame[p.frame].push(*p);
    }
    for (f, frame_peaks) in by_frame.iter().enumerate() {
        // retire stale trajectories
        let mut still_open = Vec::new();
        for tr in open.drain(..) {
            let last = tr.peaks.last().unwrap().frame;
            if f > last + max_gap_frames + 1 {
                closed.push(tr.peaks);
            } else {
                still_open.push(tr);
            }
        }
        open = still_open;

        // candidate (trajectory, peak) links scored by distance, then
        // velocity discontinuity
        #[derive(Debug)]
        struct Cand {
            traj: usize,
            peak: usize,
            dist_per_frame: f64,
            vel_change: f64,
        }
        let mut cands: Vec<Cand> = Vec::new();
        for (ti, tr) in open.iter().enumerate() {
            let last = tr.peaks.last().unwrap();
            let gap = f - last.frame;
            if gap == 0 {
                continue;
            }
            for (pi, p) in frame_peaks.iter().enumerate() {
                let jump = (p.pixel as f64 - last.pixel as f64).abs() / gap as f64;
                if jump <= max_jump_px {
                    let new_v = (p.pixel as f64 - last.pixel as f64) / gap as f64;
                    // distance to the velocity-predicted position, so an
                    // established track prefers its own continuation
                    // through crossings
                    let (dist, vel_change) = match tr.velocity_px_per_frame {
                        Some(v) => {
                            let pred = last.pixel as f64 + v * gap as f64;
                            ((p.pixel as f64 - pred).abs(), (new_v - v).abs())
                        }
                        None => (jump * gap as f64, 0.0),
                    };
                    cands.push(Cand {
                        traj: ti,
                        peak: pi,
                        dist_per_frame: dist,
                        vel_change,
                    });
                }
            }
        }
        cands.sort_by(|a, b| {
            a.dist_per_frame
                .partial_cmp(&b.dist_per_frame)
                .unwrap()
                .then(a.vel_change.partial_cmp(&b.vel_change).unwrap())
        });
        let mut traj_used = vec![false; open.len()];
        let mut peak_used = vec![false; frame_peaks.len()];
        for c in cands {
            if traj_used[c.traj] || peak_used[c.peak] {
                continue;
            }
            traj_used[c.traj] = true;
            peak_used[c.peak] = true;
            let tr = &mut open[c.traj];
            let last = *tr.peaks.last().unwrap();
            let gap = (f - last.frame) as f64;
            tr.velocity_px_per_frame =
                Some((frame_peaks[c.peak].pixel as f64 - last.pixel as f64) / gap);
            tr.peaks.push(frame_peaks[c.peak]);
        }
        for (pi, p) in frame_peaks.iter().enumerate() {
            if !peak_used[pi] {
                open.push(Open {
                    peaks: vec![*p],
                    velocity_px_per_frame: None,
                });
            }
        }
    }
    closed.extend(open.into_iter().map(|t| t.peaks));
    closed.sort_by_key(|t| (t[0].frame, t[0].pixel));
    closed
        .into_iter()
        .map(|pk| {
            let cal = peaks.calibration;
            let duration = (pk.last().unwrap().frame - pk[0].frame) as f64 * cal.frame_period_s;
            Trajectory {
                mean_velocity_um_s: fit_velocity(&pk, cal),
                velocity_std_um_s: step_velocity_std(&pk, cal),
                duration_s: duration,
                peaks: pk,
            }
        })
        .collect()
}

/// Flags for trajectories that look like a stuck particle: long duration
/// with essentially no motion or intensity variation.
pub fn flag_stuck(
    trajectories: &[Trajectory],
    max_pixel_span: usize,
    min_duration_s: f64,
) -> Vec<bool> {
    trajectories
        .iter()
        .map(|t| {
            if t.duration_s < min_duration_s || t.peaks.len() < 2 {
                return false;
            }
            let (mut lo, mut hi) = (usize::MAX, 0usize);
            let (mut ilo, mut ihi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &t.peaks {
                lo = lo.min(p.pixel);
                hi = hi.max(p.pixel);
                ilo = ilo.min(p.intensity);
                ihi = ihi.max(p.intensity);
            }
            hi - lo <= max_pixel_span && (ihi - ilo) <= 0.05 * ihi.abs().max(1e-12)
        })
        .collect()
}

/// Unweighted mean and sample standard deviation over per-trajectory mean
/// velocities.
pub fn velocity_stats(trajectories: &[Trajectory]) -> Result<(f64, f64)> {
    if trajectories.is_empty() {
        return Err(Error::Numeric("no trajectories for velocity stats".into()));
    }
    let vels: Vec<f64> = trajectories.iter().map(|t| t.mean_velocity_um_s).collect();
    let mean = vels.iter().sum::<f64>() / vels.len() as f64;
    let std = if vels.len() < 2 {
        0.0
    } else {
        (vels.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vels.len() - 1) as f64).sqrt()
    };
    Ok((mean, std))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cal() -> Calibration {
        Calibration {
            pixel_pitch_um: 0.5,
            frame_period_s: 0.05,
        }
    }

    fn kymo_from(rows: Vec<Vec<f64>>) -> Kymograph {
        let num_frames = rows.len();
        let num_pixels = rows[0].len();
        Kymograph {
            num_frames,
            num_pixels,
            pixel_pitch_um: 0.5,
            frame_period_s: 0.05,
            data: rows.into_iter().flatten().collect(),
        }
    }

    fn gaussian_row(n: usize, center: f64, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (-0.5 * (i as f64 - center) * (i as f64 - center)).exp())
            .collect()
    }

    fn peak_set(points: &[(usize, usize)]) -> PeakSet {
        PeakSet {
            peaks: points
                .iter()
                .map(|&(f, m)| Peak {
                    frame: f,
                    pixel: m,
                    intensity: 1.0,
                })
                .collect(),
            calibration: cal(),
        }
    }

    #[test]
    fn one_bump_one_peak_per_frame() {
        let rows: Vec<Vec<f64>> = (0..20).map(|_| gaussian_row(64, 31.3, 10.0)).collect();
        let peaks = extract_peaks(&kymo_from(rows), 3.0, 3);
        assert_eq!(peaks.peaks.len(), 20);
        for p in &peaks.peaks {
            assert!(p.pixel.abs_diff(31) <= 1);
        }
    }

    #[test]
    fn two_separated_bumps_two_peaks() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let mut r = gaussian_row(64, 15.0, 10.0);
                for (i, v) in gaussian_row(64, 45.0, 8.0).into_iter().enumerate() {
                    r[i] += v;
                }
                r
            })
            .collect();
        let peaks = extract_peaks(&kymo_from(rows), 3.0, 3);
        assert_eq!(peaks.peaks.len(), 20);
    }

    #[test]
    fn close_bumps_thinned_by_separation() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let mut r = gaussian_row(64, 30.0, 10.0);
                for (i, v) in gaussian_row(64, 32.0, 9.0).into_iter().enumerate() {
                    r[i] += v;
                }
                r
            })
            .collect();
        let peaks = extract_peaks(&kymo_from(rows), 3.0, 5);
        assert_eq!(peaks.peaks.len(), 5);
    }

    #[test]
    fn background_only_empty() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|f| (0..64).map(|i| 0.1 * (((f * 31 + i * 17) % 7) as f64)).collect())
            .collect();
        let peaks = extract_peaks(&kymo_from(rows), 3.0, 3);
        assert!(peaks.peaks.is_empty());
    }

    #[test]
    fn trapped_row_is_ninety_degrees() {
        let pts: Vec<(usize, usize)> = (0..40).map(|f| (f, 25)).collect();
        let spec = hough(&peak_set(&pts), 1.0, 1.0).unwrap();
        assert_eq!(spec.dominant.theta_deg, 90.0);
        assert_eq!(spec.dominant.votes, 40);
        // rho of the horizontal line is the pixel position
        assert!((spec.dominant.rho - 25.0).abs() <= 1.0);
    }

    #[test]
    fn three_collinear_votes() {
        let spec = hough(&peak_set(&[(0, 10), (5, 20), (10, 30)]), 1.0, 1.0).unwrap();
        assert_eq!(spec.dominant.votes, 3);
    }

    #[test]
    fn too_few_peaks_rejected() {
        assert!(hough(&peak_set(&[(0, 10)]), 1.0, 1.0).is_err());
    }

    #[test]
    fn shift_covariance() {
        let pts: Vec<(usize, usize)> = (0..30).map(|f| (f, 10 + f)).collect();
        let shifted: Vec<(usize, usize)> = pts.iter().map(|&(f, m)| (f, m + 17)).collect();
        let a = hough(&peak_set(&pts), 1.0, 1.0).unwrap();
        let b = hough(&peak_set(&shifted), 1.0, 1.0).unwrap();
        assert_eq!(a.dominant.theta_deg, b.dominant.theta_deg);
        assert!((b.dominant.rho - a.dominant.rho).abs() > 1.0);
    }

    #[test]
    fn parallel_rows_top_two() {
        let mut pts: Vec<(usize, usize)> = (0..30).map(|f| (f, 10)).collect();
        pts.extend((0..25).map(|f| (f, 40)));
        let spec = hough(&peak_set(&pts), 1.0, 1.0).unwrap();
        let lines = dominant_lines(&spec, 2);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].theta_deg, 90.0);
        assert_eq!(lines[1].theta_deg, 90.0);
        assert!((lines[0].rho - lines[1].rho).abs() > 20.0);
        // k = 1 equals the dominant line
        let top = dominant_lines(&spec, 1);
        assert_eq!(top[0].votes, spec.dominant.votes);
        assert_eq!(top[0].theta_deg, spec.dominant.theta_deg);
    }

    #[test]
    fn single_particle_single_trajectory() {
        let pts: Vec<(usize, usize)> = (0..50).map(|f| (f, 10 + f / 2)).collect();
        let trajs = link_trajectories(&peak_set(&pts), 2, 5.0);
        assert_eq!(trajs.len(), 1);
        assert_eq!(trajs[0].peaks.len(), 50);
        // 0.5 px/frame * 0.5 um / 0.05 s = 5 um/s
        assert_relative_eq!(trajs[0].mean_velocity_um_s, 5.0, max_relative = 0.05);
    }

    #[test]
    fn gap_tolerance() {
        let mut pts: Vec<(usize, usize)> = (0..20).map(|f| (f, 30)).collect();
        pts.retain(|&(f, _)| f != 10 && f != 11); // two missing frames
        let trajs = link_trajectories(&peak_set(&pts), 2, 5.0);
        assert_eq!(trajs.len(), 1);
        let trajs = link_trajectories(&peak_set(&pts), 0, 5.0);
        assert_eq!(trajs.len(), 2);
    }

    #[test]
    fn crossing_trajectories_recovered() {
        // +2 px/frame and -2 px/frame, crossing at frame 10
        let mut pts = Vec::new();
        for f in 0..21 {
            pts.push((f, 10 + 2 * f));
            let down = 50 - 2 * f;
            if down != 10 + 2 * f {
                pts.push((f, down));
            }
        }
        let set = peak_set(&pts);
        let trajs = link_trajectories(&set, 1, 6.0);
        assert_eq!(trajs.len(), 2, "{trajs:#?}");
        let mut vels: Vec<f64> = trajs.iter().map(|t| t.mean_velocity_um_s).collect();
        vels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // 2 px/frame -> 20 um/s
        assert_relative_eq!(vels[0], -20.0, max_relative = 0.05);
        assert_relative_eq!(vels[1], 20.0, max_relative = 0.05);
        // both tracks span the full frame range; the single shared peak at
        // the crossing frame can belong to only one of them
        for t in &trajs {
            assert!(t.peaks.len() >= 20);
            assert_eq!(t.peaks[0].frame, 0);
            assert_eq!(t.peaks.last().unwrap().frame, 20);
        }
    }

    #[test]
    fn calibration_equivariance() {
        let pts: Vec<(usize, usize)> = (0..30).map(|f| (f, 5 + f)).collect();
        let mut set = peak_set(&pts);
        let v1 = link_trajectories(&set, 1, 3.0)[0].mean_velocity_um_s;
        set.calibration.pixel_pitch_um *= 3.0;
        let v2 = link_trajectories(&set, 1, 3.0)[0].mean_velocity_um_s;
        assert_relative_eq!(v2, 3.0 * v1, max_relative = 1e-12);
    }

    #[test]
    fn velocity_stats_basics() {
        let mk = |v: f64| Trajectory {
            peaks: vec![],
            mean_velocity_um_s: v,
            velocity_std_um_s: 0.0,
            duration_s: 1.0,
        };
        assert!(velocity_stats(&[]).is_err());
        let (m, s) = velocity_stats(&[mk(4.0)]).unwrap();
        assert_eq!((m, s), (4.0, 0.0));
        let (m, _) = velocity_stats(&[mk(7.0), mk(-7.0)]).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn stuck_flagging() {
        let stuck = Trajectory {
            peaks: (0..100)
                .map(|f| Peak {
                    frame: f,
                    pixel: 42,
                    intensity: 10.0,
                })
                .collect(),
            mean_velocity_um_s: 0.0,
            velocity_std_um_s: 0.0,
            duration_s: 5.0,
        };
        let moving = Trajectory {
            peaks: (0..100)
                .map(|f| Peak {
                    frame: f,
                    pixel: 10 + f,
                    intensity: 10.0 + (f % 5) as f64,
                })
                .collect(),
            mean_velocity_um_s: 10.0,
            velocity_std_um_s: 0.1,
            duration_s: 5.0,
        };
        let flags = flag_stuck(&[stuck, moving], 1, 2.0);
        assert_eq!(flags, vec![true, false]);
    }

    #[test]
    fn background_rms_survives_zero_clipping() {
        use rand::{Rng, SeedableRng};
        let sigma = 2.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..20_000)
            .map(|_| {
                let x: f64 = rng.sample(rand_distr::StandardNormal);
                (sigma * x).max(0.0)
            })
            .collect();
        let kymo = Kymograph {
            num_frames: 100,
            num_pixels: 200,
            pixel_pitch_um: 0.5,
            frame_period_s: 0.05,
            data,
        };
        let rms = background_rms(&kymo);
        assert!((rms / sigma - 1.0).abs() < 0.15, "rms = {rms}");
    }
}
