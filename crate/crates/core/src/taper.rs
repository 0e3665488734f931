//! Force profiles along the fiber taper, force-balance powers, trap
//! location/classification, and the trapping potential.
//!
//! The per-milliwatt axial force of each color is tabulated once per taper
//! geometry (one mode solve per distinct local diameter); actual beam
//! powers then only scale the table, so balance searches and power sweeps
//! are cheap.

use std::collections::HashMap;

use crate::fiber::{solve_he11, FiberSpec, ModeSolution};
use crate::particle::{axial_force, ParticleSpec};
use crate::{Error, Result, BOLTZMANN_J_K};

/// Temperature used for k_BT reporting [K].
pub const REPORT_TEMPERATURE_K: f64 = 293.0;

/// pN*um -> k_BT at the reporting temperature.
fn pn_um_to_kbt() -> f64 {
    1e-18 / (BOLTZMANN_J_K * REPORT_TEMPERATURE_K)
}

/// Counter-propagating beam powers: P1 drives the +z 640 nm mode, P2 the
/// -z 785 nm mode.
#[derive(Debug, Clone, Copy)]
pub struct BeamConfig {
    pub p1_mw: f64,
    pub p2_mw: f64,
    /// Shared polarization-axis angle [rad]; both beams are co-polarized.
    pub polarization_angle_rad: f64,
}

impl BeamConfig {
    pub fn new(p1_mw: f64, p2_mw: f64) -> Self {
        Self {
            p1_mw,
            p2_mw,
            polarization_angle_rad: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1_mw < 0.0 || self.p2_mw < 0.0 {
            return Err(Error::Config("beam powers must be >= 0".into()));
        }
        Ok(())
    }
}

/// Discretized symmetric taper: z grid centered on the waist midpoint and
/// the local diameter at each grid point.
#[derive(Debug, Clone)]
pub struct TaperGeometry {
    pub z_um: Vec<f64>,
    pub d_nm: Vec<f64>,
}

impl TaperGeometry {
    /// Uniform grid over [-z_half, z_half] with spacing `dz_um`.
    pub fn from_fiber(fiber: &FiberSpec, z_half_um: f64, dz_um: f64) -> Result<Self> {
        fiber.validate()?;
        if !(z_half_um > 0.0 && dz_um > 0.0) {
            return Err(Error::Config("z range and spacing must be positive".into()));
        }
        let n = (2.0 * z_half_um / dz_um).round() as usize;
        let z_um: Vec<f64> = (0..=n).map(|i| -z_half_um + dz_um * i as f64).collect();
        let d_nm = z_um.iter().map(|&z| fiber.diameter_at(z)).collect();
        Ok(Self { z_um, d_nm })
    }

    /// Default grid: 1 um spacing over +-1500 um, wide enough that the
    /// outer potential barrier of every trap in the working power range is
    /// fully contained.
    pub fn default_grid(fiber: &FiberSpec) -> Result<Self> {
        Self::from_fiber(fiber, 1500.0, 1.0)
    }
}

/// Per-milliwatt axial force tables for the two colors along a taper.
pub struct TaperForceModel {
    pub geometry: TaperGeometry,
    pub particle: ParticleSpec,
    pub wavelength1_nm: f64,
    pub wavelength2_nm: f64,
    /// +z force per mW of the first color at each z; `None` past cutoff.
    f1_per_mw: Vec<Option<f64>>,
    /// +z-magnitude force per mW of the second color at each z.
    f2_per_mw: Vec<Option<f64>>,
}

impl TaperForceModel {
    pub fn build(
        fiber: &FiberSpec,
        geometry: TaperGeometry,
        particle: ParticleSpec,
        wavelength1_nm: f64,
        wavelength2_nm: f64,
    ) -> Result<Self> {
        fiber.validate()?;
        particle.validate()?;
        let mut mode_cache: HashMap<(u64, u64), Option<ModeSolution>> = HashMap::new();
        let mut per_mw = |wl: f64, d: f64| -> Result<Option<f64>> {
            let key = (wl.to_bits(), d.to_bits());
            let entry = match mode_cache.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let solved = match solve_he11(fiber.core_index, fiber.medium_index, d, wl) {
                        Ok(m) => Some(m),
                        Err(Error::ModeCutoff { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    e.insert(solved)
                }
            };
            match entry {
                Some(mode) => Ok(Some(axial_force(&particle, mode, 1.0, 1.0)?.f_axial_pn)),
                None => Ok(None),
            }
        };
        let mut f1 = Vec::with_capacity(geometry.z_um.len());
        let mut f2 = Vec::with_capacity(geometry.z_um.len());
        for &d in &geometry.d_nm {
            f1.push(per_mw(wavelength1_nm, d)?);
            f2.push(per_mw(wavelength2_nm, d)?);
        }
        Ok(Self {
            geometry,
            particle,
            wavelength1_nm,
            wavelength2_nm,
            f1_per_mw: f1,
            f2_per_mw: f2,
        })
    }

    /// Index of the grid point nearest the waist midpoint z = 0.
    fn waist_index(&self) -> usize {
        let mut best = 0;
        for (i, &z) in self.geometry.z_um.iter().enumerate() {
            if z.abs() < self.geometry.z_um[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Per-mW waist forces (f1, f2), both as +z magnitudes.
    pub fn waist_forces_per_mw(&self) -> Result<(f64, f64)> {
        let i = self.waist_index();
        match (self.f1_per_mw[i], self.f2_per_mw[i]) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::ModeCutoff {
                wavelength_nm: self.wavelength2_nm,
                diameter_nm: self.geometry.d_nm[self.waist_index()],
            }),
        }
    }

    /// P1 that cancels the two axial forces at the waist for a given P2.
    pub fn balance_power(&self, p2_mw: f64) -> Result<f64> {
        if p2_mw <= 0.0 {
            return Err(Error::Config("P2 must be > 0 for a balance search".into()));
        }
        let (f1, f2) = self.waist_forces_per_mw()?;
        if f1 == 0.0 {
            return Err(Error::NoBalance(
                "zero per-mW axial force in the first color".into(),
            ));
        }
        Ok(p2_mw * f2 / f1)
    }

    /// Net force profile for a concrete pair of beam powers. The second
    /// color propagates in -z, so dF = P1 f1 - P2 f2.
    pub fn force_profile(&self, beams: BeamConfig) -> Result<ForceProfile> {
        beams.validate()?;
        let n = self.geometry.z_um.len();
        let mut f640 = Vec::with_capacity(n);
        let mut f785 = Vec::with_capacity(n);
        let mut df = Vec::with_capacity(n);
        for i in 0..n {
            match (self.f1_per_mw[i], self.f2_per_mw[i]) {
                (Some(a), Some(b)) => {
                    let fa = beams.p1_mw * a;
                    let fb = beams.p2_mw * b;
                    f640.push(Some(fa));
                    f785.push(Some(-fb));
                    df.push(Some(fa - fb));
                }
                _ => {
                    f640.push(None);
                    f785.push(None);
                    df.push(None);
                }
            }
        }
        Ok(ForceProfile {
            z_um: self.geometry.z_um.clone(),
            d_nm: self.geometry.d_nm.clone(),
            f640_pn: f640,
            f785_pn: f785,
            df_pn: df,
            beams,
            particle: self.particle,
        })
    }
}

/// Net axial force along the taper for one beam configuration. Entries are
/// `None` where the narrower-confined mode is past cutoff.
#[derive(Debug, Clone)]
pub struct ForceProfile {
    pub z_um: Vec<f64>,
    pub d_nm: Vec<f64>,
    /// Signed +z force of the first color [pN].
    pub f640_pn: Vec<Option<f64>>,
    /// Signed force of the second color [pN] (negative: -z propagation).
    pub f785_pn: Vec<Option<f64>>,
    /// Net force dF = F640 + F785 (signed sum) [pN].
    pub df_pn: Vec<Option<f64>>,
    pub beams: BeamConfig,
    pub particle: ParticleSpec,
}

impl ForceProfile {
    /// Linear interpolation of dF at an arbitrary z inside the valid range.
    pub fn df_at(&self, z: f64) -> Option<f64> {
        let zs = &self.z_um;
        if z < zs[0] || z > zs[zs.len() - 1] {
            return None;
        }
        let j = zs.partition_point(|&v| v < z).min(zs.len() - 1).max(1);
        let (z0, z1) = (zs[j - 1], zs[j]);
        let (f0, f1) = (self.df_pn[j - 1]?, self.df_pn[j]?);
        let t = if z1 > z0 { (z - z0) / (z1 - z0) } else { 0.0 };
        Some(f0 + t * (f1 - f0))
    }

    /// Index ranges of contiguous valid segments.
    fn valid_segments(&self) -> Vec<(usize, usize)> {
        let mut segments = Vec::new();
        let mut start = None;
        for (i, v) in self.df_pn.iter().enumerate() {
            match (v.is_some(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    segments.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            segments.push((s, self.df_pn.len() - 1));
        }
        segments
    }
}

/// One zero crossing of the net force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCrossing {
    pub z_um: f64,
    pub kind: CrossingKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// Restoring: dF goes + -> - through the crossing.
    Trap,
    /// Expelling: dF goes - -> +.
    AntiTrap,
}

/// Zero crossings of a force profile with classification, plus stiffness
/// and potential depth at the principal trap.
#[derive(Debug, Clone)]
pub struct TrapReport {
    pub crossings: Vec<ZeroCrossing>,
    /// Principal trap: first trap on z > 0 if any, else first trap.
    pub z_trap_um: Option<f64>,
    /// kappa = -d(dF)/dz at the principal trap [pN/um].
    pub stiffness_pn_per_um: Option<f64>,
    /// Potential depth at the principal trap [k_BT]; 0 for an open trap.
    pub depth_kbt: Option<f64>,
    pub open_trap: bool,
}

/// Locate and classify all zero crossings of dF by bisection on the linear
/// interpolant between grid points (resolution 0.1 um).
pub fn find_traps(profile: &ForceProfile) -> TrapReport {
    let mut crossings = Vec::new();
    for (s, e) in profile.valid_segments() {
        for i in s + 1..=e {
            let f0 = profile.df_pn[i - 1].unwrap();
            let f1 = profile.df_pn[i].unwrap();
            if f0 == 0.0 {
                // grid-exact zero: classify from the neighbors
                let before = if i >= 2 { profile.df_pn[i - 2] } else { None };
                let kind = classify(before.unwrap_or(-f1), f1);
                if let Some(kind) = kind {
                    crossings.push(ZeroCrossing {
                        z_um: profile.z_um[i - 1],
                        kind,
                    });
                }
                continue;
            }
            if f0 * f1 < 0.0 {
                let (mut lo, mut hi) = (profile.z_um[i - 1], profile.z_um[i]);
                let mut flo = f0;
                while hi - lo > 0.1 {
                    let mid = 0.5 * (lo + hi);
                    let fm = profile.df_at(mid).unwrap();
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                let kind = classify(f0, f1).unwrap();
                crossings.push(ZeroCrossing {
                    z_um: 0.5 * (lo + hi),
                    kind,
                });
            }
        }
    }
    let z_trap = crossings
        .iter()
        .find(|c| c.kind == CrossingKind::Trap && c.z_um > 0.0)
        .or_else(|| crossings.iter().find(|c| c.kind == CrossingKind::Trap))
        .map(|c| c.z_um);
    let (stiffness, depth, open) = match z_trap {
        Some(z) => {
            let dz = 1.0;
            let k = match (profile.df_at(z - dz), profile.df_at(z + dz)) {
                (Some(a), Some(b)) => Some(-(b - a) / (2.0 * dz)),
                _ => None,
            };
            // The well of a taper-side trap is evaluated on its own half
            // of the taper: past the waist midpoint the flat-waist force
            // plateau runs into the mirrored anti-trap, which is not part
            // of this trap's escape structure.
            let pot = potential(profile);
            let keep: Vec<usize> = (0..pot.z_um.len())
                .filter(|&i| {
                    if z > 0.0 {
                        pot.z_um[i] >= 0.0
                    } else {
                        pot.z_um[i] <= 0.0
                    }
                })
                .collect();
            let half = PotentialProfile {
                z_um: keep.iter().map(|&i| pot.z_um[i]).collect(),
                u_kbt: keep.iter().map(|&i| pot.u_kbt[i]).collect(),
            };
            let d = trap_depth(&half, z);
            (k, Some(d.depth_kbt), d.open)
        }
        None => (None, None, false),
    };
    TrapReport {
        crossings,
        z_trap_um: z_trap,
        stiffness_pn_per_um: stiffness,
        depth_kbt: depth,
        open_trap: open,
    }
}

fn classify(before: f64, after: f64) -> Option<CrossingKind> {
    if before > 0.0 && after < 0.0 {
        Some(CrossingKind::Trap)
    } else if before < 0.0 && after > 0.0 {
        Some(CrossingKind::AntiTrap)
    } else {
        None
    }
}

/// Potential U(z) [k_BT] from dF = -dU/dz, integrated per contiguous valid
/// segment by the trapezoidal rule and shifted so the global minimum is 0.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    pub z_um: Vec<f64>,
    pub u_kbt: Vec<Option<f64>>,
}

pub fn potential(profile: &ForceProfile) -> PotentialProfile {
    let scale = pn_um_to_kbt();
    let mut u = vec![None; profile.z_um.len()];
    let mut min_u = f64::INFINITY;
    for (s, e) in profile.valid_segments() {
        let mut acc = 0.0;
        u[s] = Some(0.0);
        for i in s + 1..=e {
            let dz = profile.z_um[i] - profile.z_um[i - 1];
            let favg = 0.5 * (profile.df_pn[i].unwrap() + profile.df_pn[i - 1].unwrap());
            acc -= favg * dz * scale;
            u[i] = Some(acc);
        }
        for i in s..=e {
            min_u = min_u.min(u[i].unwrap());
        }
    }
    if min_u.is_finite() {
        for v in u.iter_mut().flatten() {
            *v -= min_u;
        }
    }
    PotentialProfile {
        z_um: profile.z_um.clone(),
        u_kbt: u,
    }
}

impl PotentialProfile {
    pub fn u_at(&self, z: f64) -> Option<f64> {
        let zs = &self.z_um;
        if z < zs[0] || z > zs[zs.len() - 1] {
            return None;
        }
        let j = zs.partition_point(|&v| v < z).min(zs.len() - 1).max(1);
        let (u0, u1) = (self.u_kbt[j - 1]?, self.u_kbt[j]?);
        let (z0, z1) = (zs[j - 1], zs[j]);
        let t = if z1 > z0 { (z - z0) / (z1 - z0) } else { 0.0 };
        Some(u0 + t * (u1 - u0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrapDepth {
    pub depth_kbt: f64,
    pub open: bool,
}

/// Depth of the well around `z_trap_um`: the smaller of the two escape
/// barriers. Each barrier is the nearest potential crest (first local
/// maximum walking away from the trap); a hard range edge or validity gap
/// counts as a crest at its own height.
pub fn trap_depth(potential: &PotentialProfile, z_trap_um: f64) -> TrapDepth {
    let u_trap = match potential.u_at(z_trap_um) {
        Some(u) => u,
        None => return TrapDepth { depth_kbt: 0.0, open: true },
    };
    let n = potential.z_um.len();
    let start = potential
        .z_um
        .partition_point(|&z| z < z_trap_um)
        .min(n - 1);
    let crest = |indices: &mut dyn Iterator<Item = usize>| -> f64 {
        // descend into the discrete minimum first, then climb to the crest
        let mut cur = u_trap;
        let mut climbing = false;
        for i in indices {
            match potential.u_kbt[i] {
                Some(u) => {
                    if u >= cur {
                        climbing = true;
                        cur = u;
                    } else if climbing {
                        break; // past the crest
                    } else {
                        cur = u;
                    }
                }
                None => break, // validity gap acts as a hard edge
            }
        }
        cur
    };
    let left = crest(&mut (0..start).rev());
    let right = crest(&mut (start..n));
    let depth = (left.min(right) - u_trap).max(0.0);
    TrapDepth {
        depth_kbt: depth,
        open: depth == 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::FiberSpec;
    use approx::assert_relative_eq;

    fn synthetic_profile(z: Vec<f64>, df: Vec<f64>) -> ForceProfile {
        let n = z.len();
        ForceProfile {
            d_nm: vec![550.0; n],
            f640_pn: df.iter().map(|&v| Some(v)).collect(),
            f785_pn: vec![Some(0.0); n],
            df_pn: df.into_iter().map(Some).collect(),
            z_um: z,
            beams: BeamConfig::new(1.0, 1.0),
            particle: ParticleSpec::gold(100.0),
        }
    }

    fn grid(a: f64, b: f64, dz: f64) -> Vec<f64> {
        let n = ((b - a) / dz).round() as usize;
        (0..=n).map(|i| a + dz * i as f64).collect()
    }

    #[test]
    fn sine_crossing_classified_as_trap() {
        let z0 = 10.0;
        let z = grid(-30.0, 30.0, 0.5);
        let df: Vec<f64> = z.iter().map(|&zz| -(zz / z0).sin()).collect();
        let p = synthetic_profile(z, df);
        let report = find_traps(&p);
        let trap = report
            .crossings
            .iter()
            .find(|c| c.kind == CrossingKind::Trap)
            .unwrap();
        assert!(trap.z_um.abs() < 0.1);
        // kappa = 1/z0 at the crossing of -sin(z/z0)
        assert_relative_eq!(
            report.stiffness_pn_per_um.unwrap(),
            1.0 / z0,
            max_relative = 0.01
        );
    }

    #[test]
    fn linear_restoring_force_gives_quadratic_well() {
        let (k, z0) = (0.3, 5.0);
        let z = grid(-20.0, 30.0, 0.25);
        let df: Vec<f64> = z.iter().map(|&zz| -k * (zz - z0)).collect();
        let p = synthetic_profile(z.clone(), df);
        let pot = potential(&p);
        let scale = pn_um_to_kbt();
        for (i, &zz) in z.iter().enumerate() {
            let expect = 0.5 * k * (zz - z0) * (zz - z0) * scale;
            assert_relative_eq!(pot.u_kbt[i].unwrap(), expect, epsilon = 1e-9 * expect.max(1.0));
        }
        // hard-range depth: nearer edge is z = 30 (25 um from z0) vs z = -20
        let d = trap_depth(&pot, z0);
        assert!(!d.open);
        assert_relative_eq!(
            d.depth_kbt,
            0.5 * k * 25.0 * 25.0 * scale,
            max_relative = 1e-9
        );
    }

    #[test]
    fn constant_force_linear_potential_and_open_trap() {
        let c = 0.7;
        let z = grid(0.0, 10.0, 1.0);
        let p = synthetic_profile(z.clone(), vec![c; z.len()]);
        let pot = potential(&p);
        let scale = pn_um_to_kbt();
        // U = -c z (up to shift); slope -c
        let s = (pot.u_kbt[5].unwrap() - pot.u_kbt[4].unwrap()) / (z[5] - z[4]);
        assert_relative_eq!(s, -c * scale, max_relative = 1e-12);
        assert_eq!(pot.u_kbt[z.len() - 1].unwrap(), 0.0);
        // flat/monotone potential: depth 0, open
        let d = trap_depth(&pot, 5.0);
        assert!(d.open);
        assert_eq!(d.depth_kbt, 0.0);
    }

    #[test]
    fn gradient_check_finite_difference() {
        // -dU/dz reproduces dF within 1% RMS on a smooth profile
        let z = grid(-50.0, 50.0, 1.0);
        let df: Vec<f64> = z.iter().map(|&zz| (zz / 17.0).cos() * 0.4).collect();
        let p = synthetic_profile(z.clone(), df.clone());
        let pot = potential(&p);
        let scale = pn_um_to_kbt();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..z.len() - 1 {
            let grad = -(pot.u_kbt[i + 1].unwrap() - pot.u_kbt[i - 1].unwrap())
                / (z[i + 1] - z[i - 1])
                / scale;
            num += (grad - df[i]) * (grad - df[i]);
            den += df[i] * df[i];
        }
        assert!((num / den).sqrt() < 0.01);
    }

    #[test]
    fn zero_powers_zero_profile() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::from_fiber(&fiber, 50.0, 5.0).unwrap();
        let model =
            TaperForceModel::build(&fiber, geom, ParticleSpec::gold(100.0), 640.0, 785.0).unwrap();
        let p = model.force_profile(BeamConfig::new(0.0, 0.0)).unwrap();
        assert!(p.df_pn.iter().all(|v| v == &Some(0.0)));
        assert!(find_traps(&p).crossings.is_empty());
    }

    #[test]
    fn swap_with_identical_wavelengths_flips_sign() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::from_fiber(&fiber, 50.0, 10.0).unwrap();
        let model =
            TaperForceModel::build(&fiber, geom, ParticleSpec::gold(100.0), 640.0, 640.0).unwrap();
        let p_ab = model.force_profile(BeamConfig::new(2.0, 5.0)).unwrap();
        let p_ba = model.force_profile(BeamConfig::new(5.0, 2.0)).unwrap();
        for (a, b) in p_ab.df_pn.iter().zip(&p_ba.df_pn) {
            assert_relative_eq!(a.unwrap(), -b.unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn balance_power_frozen_values() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::from_fiber(&fiber, 10.0, 5.0).unwrap();
        for (d, expect) in [(100.0, 1.985828), (150.0, 6.204186)] {
            let model =
                TaperForceModel::build(&fiber, geom.clone(), ParticleSpec::gold(d), 640.0, 785.0)
                    .unwrap();
            let p1 = model.balance_power(12.0).unwrap();
            assert_relative_eq!(p1, expect, max_relative = 1e-4);
            // linearity: doubling P2 doubles the balance power
            assert_relative_eq!(
                model.balance_power(24.0).unwrap(),
                2.0 * p1,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn balance_gives_flat_waist_and_inflection() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::from_fiber(&fiber, 400.0, 2.0).unwrap();
        let model =
            TaperForceModel::build(&fiber, geom, ParticleSpec::gold(100.0), 640.0, 785.0).unwrap();
        let p1 = model.balance_power(12.0).unwrap();
        let profile = model.force_profile(BeamConfig::new(p1, 12.0)).unwrap();
        // flat waist: |dF| negligible vs the per-color force there
        let scale = profile.f640_pn.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, &z) in profile.z_um.iter().enumerate() {
            if z.abs() <= fiber.waist_length_um / 2.0 {
                assert!(profile.df_pn[i].unwrap().abs() < 1e-9 * scale.max(1.0));
            }
        }
        // no interior minimum on the z > 0 taper: no trap crossing there
        let report = find_traps(&profile);
        assert!(report
            .crossings
            .iter()
            .all(|c| !(c.kind == CrossingKind::Trap && c.z_um > 0.0)));
    }

    #[test]
    fn reference_configuration_trap_structure() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::default_grid(&fiber).unwrap();
        let model =
            TaperForceModel::build(&fiber, geom, ParticleSpec::gold(100.0), 640.0, 785.0).unwrap();
        let p1_bal = model.balance_power(12.0).unwrap();
        let mut prev_z = 0.0;
        let mut prev_depth = 0.0;
        for factor in [1.18, 1.32] {
            let profile = model
                .force_profile(BeamConfig::new(factor * p1_bal, 12.0))
                .unwrap();
            let report = find_traps(&profile);
            let z_trap = report.z_trap_um.expect("trap above balance");
            assert!(z_trap > 0.0);
            assert!(report
                .crossings
                .iter()
                .any(|c| c.kind == CrossingKind::AntiTrap && c.z_um < 0.0));
            assert!(z_trap > prev_z, "z_trap not increasing: {z_trap}");
            assert!(report.stiffness_pn_per_um.unwrap() > 0.0);
            let depth = report.depth_kbt.unwrap();
            assert!(depth > prev_depth, "depth not increasing: {depth}");
            // restoring on both sides of the trap
            assert!(profile.df_at(z_trap - 5.0).unwrap() > 0.0);
            assert!(profile.df_at(z_trap + 5.0).unwrap() < 0.0);
            // trap on the rising-diameter section
            let d_here = fiber.diameter_at(z_trap);
            assert!(d_here > fiber.waist_diameter_nm);
            prev_z = z_trap;
            prev_depth = depth;
        }
    }

    #[test]
    fn mirrored_beams_map_traps_to_antitraps() {
        let fiber = FiberSpec::default();
        let geom = TaperGeometry::from_fiber(&fiber, 600.0, 2.0).unwrap();
        let model =
            TaperForceModel::build(&fiber, geom, ParticleSpec::gold(100.0), 640.0, 785.0).unwrap();
        let p1_bal = model.balance_power(12.0).unwrap();
        let profile = model
            .force_profile(BeamConfig::new(1.25 * p1_bal, 12.0))
            .unwrap();
        let report = find_traps(&profile);
        // symmetric taper: dF(z) for (P1, P2) has a trap at +z ⇔ the
        // role-swapped configuration (flip z) has an anti-trap at -z
        for c in &report.crossings {
            let mirrored = report
                .crossings
                .iter()
                .find(|m| (m.z_um + c.z_um).abs() < 4.0 && m.kind != c.kind);
            assert!(mirrored.is_some(), "no mirror partner for {:?}", c);
        }
    }
}
