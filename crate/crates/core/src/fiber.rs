//! HE11 mode solver for a cylindrical step-index fiber and evanescent field
//! evaluation.
//!
//! The exact hybrid-mode characteristic equation is solved (not the
//! weakly-guiding LP approximation): with `u = h a`, `w = q a`,
//! `X = J1'(u)/(u J1(u))`, `Y = K1'(w)/(w K1(w))`,
//!
//! ```text
//! (X + Y) (n1^2 X + n2^2 Y) = n_eff^2 (1/u^2 + 1/w^2)^2
//! ```
//!
//! The fundamental branch is the root with the largest effective index.
//! Fields are the quasi-linearly polarized HE11 component profiles; modes
//! are normalized so the axial Poynting flux integrates to unit power.

use std::collections::HashMap;

use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Step-index fiber description, including the taper parameters used by the
/// trap and transport modules.
#[derive(Debug, Clone, Copy)]
pub struct FiberSpec {
    /// Core (silica) refractive index.
    pub core_index: f64,
    /// Surrounding medium (water) refractive index.
    pub medium_index: f64,
    /// Waist diameter [nm].
    pub waist_diameter_nm: f64,
    /// Length of the constant-diameter waist [um].
    pub waist_length_um: f64,
    /// Linear diameter growth rate outside the waist [nm per um].
    pub taper_slope_nm_per_um: f64,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self {
            core_index: 1.45,
            medium_index: 1.33,
            waist_diameter_nm: 550.0,
            waist_length_um: 200.0,
            taper_slope_nm_per_um: 2.0,
        }
    }
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.core_index > self.medium_index && self.medium_index > 1.0) {
            return Err(Error::Config(format!(
                "require core_index > medium_index > 1 (got {} / {})",
                self.core_index, self.medium_index
            )));
        }
        if self.waist_diameter_nm <= 0.0 {
            return Err(Error::Config("waist_diameter_nm must be > 0".into()));
        }
        if self.waist_length_um < 0.0 || self.taper_slope_nm_per_um < 0.0 {
            return Err(Error::Config(
                "waist_length_um and taper_slope_nm_per_um must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Local diameter [nm] at axial position `z_um` measured from the waist
    /// midpoint. Symmetric: flat waist, then linear growth.
    pub fn diameter_at(&self, z_um: f64) -> f64 {
        let half = self.waist_length_um / 2.0;
        let az = z_um.abs();
        if az <= half {
            self.waist_diameter_nm
        } else {
            self.waist_diameter_nm + self.taper_slope_nm_per_um * (az - half)
        }
    }

    /// Normalized frequency V = pi d NA / lambda.
    pub fn v_number(&self, diameter_nm: f64, wavelength_nm: f64) -> f64 {
        let na = (self.core_index * self.core_index - self.medium_index * self.medium_index).sqrt();
        PI * diameter_nm * na / wavelength_nm
    }
}

// Bessel helpers. J2 uses a series below the cancellation region of the
// recurrence 2 J1(x)/x - J0(x).
fn j0(x: f64) -> f64 {
    puruspe::Jn(0, x)
}
fn j1(x: f64) -> f64 {
    puruspe::Jn(1, x)
}
fn j2(x: f64) -> f64 {
    if x < 0.05 {
        let x2 = x * x;
        x2 / 8.0 * (1.0 - x2 / 12.0 + x2 * x2 / 384.0)
    } else {
        2.0 * j1(x) / x - j0(x)
    }
}
fn k0(x: f64) -> f64 {
    puruspe::Kn(0, x)
}
fn k1(x: f64) -> f64 {
    puruspe::Kn(1, x)
}
fn k2(x: f64) -> f64 {
    k0(x) + 2.0 * k1(x) / x
}

/// Solved fundamental (HE11) mode at one (wavelength, diameter) point.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub wavelength_nm: f64,
    pub diameter_nm: f64,
    pub core_index: f64,
    pub medium_index: f64,
    /// Effective index n_eff = beta / k0.
    pub effective_index: f64,
    /// Propagation constant [rad/nm].
    pub propagation_constant: f64,
    /// Interior transverse wavenumber h [1/nm].
    pub interior_wavenumber: f64,
    /// Exterior decay constant q [1/nm].
    pub exterior_decay: f64,
    /// Hybrid-mode mixing parameter s.
    s: f64,
    s1: f64,
    s2: f64,
    /// Exterior amplitude scale J1(u)/K1(w).
    exterior_scale: f64,
    /// Axial-flux normalization: A^2 such that the guided power is 1 W.
    /// NaN marks an unnormalized mode.
    power_norm: f64,
    /// Characteristic-equation residual at the returned root.
    pub residual: f64,
}

struct FieldProfiles {
    /// cos(phi) part of E_r.
    e1: f64,
    /// sin(phi) part of E_phi (negated).
    e2: f64,
    /// cos(phi) part of E_z (in quadrature).
    ez: f64,
    /// sin(phi) part of H_r.
    h1: f64,
    /// cos(phi) part of H_phi.
    h2: f64,
}

/// Characteristic equation value at a trial effective index.
fn characteristic(
    core_index: f64,
    medium_index: f64,
    radius_nm: f64,
    k0_per_nm: f64,
    neff: f64,
) -> f64 {
    let u = radius_nm * k0_per_nm * (core_index * core_index - neff * neff).sqrt();
    let w = radius_nm * k0_per_nm * (neff * neff - medium_index * medium_index).sqrt();
    let x = (j0(u) - j1(u) / u) / (u * j1(u));
    let y = -(k0(w) + k1(w) / w) / (w * k1(w));
    let inv = 1.0 / (u * u) + 1.0 / (w * w);
    (x + y) * (core_index * core_index * x + medium_index * medium_index * y) - neff * neff * inv * inv
}

/// Solve the fundamental HE11 branch at one (diameter, wavelength) point.
///
/// The characteristic function is scanned on a uniform grid in the interior
/// parameter `u` (uniform in n_eff it would undersample the thick-fiber
/// limit, where the fundamental root crowds toward the core index), then
/// the first bracketed sign change from the high-n_eff end is refined by
/// bisection. Sign changes across poles of the characteristic function
/// (zeros of J1) are rejected by the residual check.
pub fn solve_he11(
    core_index: f64,
    medium_index: f64,
    diameter_nm: f64,
    wavelength_nm: f64,
) -> Result<ModeSolution> {
    if diameter_nm <= 0.0 || wavelength_nm <= 0.0 {
        return Err(Error::Config(
            "diameter and wavelength must be positive".into(),
        ));
    }
    let a = diameter_nm / 2.0;
    let k0n = 2.0 * PI / wavelength_nm;
    let na2 = core_index * core_index - medium_index * medium_index;
    let v = a * k0n * na2.sqrt();
    let cutoff_err = || Error::ModeCutoff {
        wavelength_nm,
        diameter_nm,
    };

    let neff_of_u = |u: f64| (core_index * core_index - (u / (a * k0n)).powi(2)).sqrt();
    let f = |neff: f64| characteristic(core_index, medium_index, a, k0n, neff);

    const SCAN_POINTS: usize = 2000;
    let u_lo = v * 1e-7;
    let u_hi = v * (1.0 - 1e-9);
    let du = (u_hi - u_lo) / SCAN_POINTS as f64;

    let mut prev_u = u_lo;
    let mut prev_f = f(neff_of_u(prev_u));
    for i in 1..=SCAN_POINTS {
        let cur_u = u_lo + du * i as f64;
        let cur_f = f(neff_of_u(cur_u));
        if prev_f.is_finite() && cur_f.is_finite() && prev_f * cur_f < 0.0 {
            // bisect in u; neff is monotone in u
            let (mut lo, mut hi) = (prev_u, cur_u);
            let mut flo = prev_f;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(neff_of_u(mid));
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            let neff = neff_of_u(0.5 * (lo + hi));
            let residual = f(neff);
            if residual.abs() < 1e-8 {
                return finish_solution(
                    core_index,
                    medium_index,
                    diameter_nm,
                    wavelength_nm,
                    neff,
                    residual,
                );
            }
            // pole of the characteristic function, keep scanning
        }
        prev_u = cur_u;
        prev_f = cur_f;
    }
    Err(cutoff_err())
}

fn finish_solution(
    core_index: f64,
    medium_index: f64,
    diameter_nm: f64,
    wavelength_nm: f64,
    neff: f64,
    residual: f64,
) -> Result<ModeSolution> {
    let a = diameter_nm / 2.0;
    let k0n = 2.0 * PI / wavelength_nm;
    let beta = neff * k0n;
    let h = (core_index * core_index * k0n * k0n - beta * beta).sqrt();
    let q = (beta * beta - medium_index * medium_index * k0n * k0n).sqrt();
    let (u, w) = (h * a, q * a);
    let x = (j0(u) - j1(u) / u) / (u * j1(u));
    let y = -(k0(w) + k1(w) / w) / (w * k1(w));
    let s = (1.0 / (u * u) + 1.0 / (w * w)) / (x + y);
    let mut mode = ModeSolution {
        wavelength_nm,
        diameter_nm,
        core_index,
        medium_index,
        effective_index: neff,
        propagation_constant: beta,
        interior_wavenumber: h,
        exterior_decay: q,
        s,
        s1: beta * beta * s / (k0n * k0n * core_index * core_index),
        s2: beta * beta * s / (k0n * k0n * medium_index * medium_index),
        exterior_scale: j1(u) / k1(w),
        power_norm: f64::NAN,
        residual,
    };
    let power = mode.raw_power();
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::Numeric(format!(
            "mode power integral not positive: {power}"
        )));
    }
    mode.power_norm = 1.0 / power;
    Ok(mode)
}

impl ModeSolution {
    fn radius_nm(&self) -> f64 {
        self.diameter_nm / 2.0
    }

    fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength_nm
    }

    fn profiles(&self, r_nm: f64) -> FieldProfiles {
        let a = self.radius_nm();
        let (beta, s) = (self.propagation_constant, self.s);
        let omega = self.k0(); // natural units: eps0 = mu0 = c = 1
        if r_nm < a {
            let h = self.interior_wavenumber;
            let (ja, jb) = (j0(h * r_nm), j2(h * r_nm));
            let te = beta / (2.0 * h);
            let th = omega * self.core_index * self.core_index / (2.0 * h);
            FieldProfiles {
                e1: te * ((1.0 - s) * ja - (1.0 + s) * jb),
                e2: te * ((1.0 - s) * ja + (1.0 + s) * jb),
                ez: j1(h * r_nm),
                h1: th * ((1.0 - self.s1) * ja + (1.0 + self.s1) * jb),
                h2: th * ((1.0 - self.s1) * ja - (1.0 + self.s1) * jb),
            }
        } else {
            let q = self.exterior_decay;
            let b = self.exterior_scale;
            let (ka, kb) = (k0(q * r_nm), k2(q * r_nm));
            let te = b * beta / (2.0 * q);
            let th = b * omega * self.medium_index * self.medium_index / (2.0 * q);
            FieldProfiles {
                e1: te * ((1.0 - s) * ka + (1.0 + s) * kb),
                e2: te * ((1.0 - s) * ka - (1.0 + s) * kb),
                ez: b * k1(q * r_nm),
                h1: th * ((1.0 - self.s2) * ka - (1.0 + self.s2) * kb),
                h2: th * ((1.0 - self.s2) * ka + (1.0 + self.s2) * kb),
            }
        }
    }

    /// Axial Poynting density integrand (phi-integrated) at radius r, for
    /// unit amplitude: pi * (e1 h2 + e2 h1) / 2 comes out of the phi
    /// integral of the quasi-linear mode; the 1/2 from time averaging is
    /// folded in here.
    fn axial_flux_phi_integrated(&self, r_nm: f64) -> f64 {
        let p = self.profiles(r_nm);
        0.5 * PI * (p.e1 * p.h2 + p.e2 * p.h1)
    }

    /// Guided power for unit amplitude, by adaptive quadrature.
    fn raw_power(&self) -> f64 {
        let a = self.radius_nm();
        let tail = a + 40.0 / self.exterior_decay;
        let f = |r: f64| self.axial_flux_phi_integrated(r) * r;
        adaptive_simpson(&f, 0.0, a, 1e-6) + adaptive_simpson(&f, a, tail, 1e-6)
    }

    /// Recompute the guided power with a plain fixed-step rule; used as an
    /// independent cross-check of the adaptive normalization.
    pub fn power_check(&self, steps: usize) -> f64 {
        let a = self.radius_nm();
        let tail = a + 40.0 / self.exterior_decay;
        let f = |r: f64| self.axial_flux_phi_integrated(r) * r;
        (trapezoid(&f, 0.0, a, steps) + trapezoid(&f, a, tail, steps)) * self.power_norm
    }

    /// Squared field magnitude of the x-polarized mode (polarization axis at
    /// phi = 0), for unit amplitude.
    fn e_squared(&self, r_nm: f64, phi_rad: f64) -> f64 {
        let p = self.profiles(r_nm);
        let (c, sn) = (phi_rad.cos(), phi_rad.sin());
        (p.e1 * p.e1 + p.ez * p.ez) * c * c + p.e2 * p.e2 * sn * sn
    }

    /// Local intensity per watt of guided power [1/um^2], at radius `r_nm`
    /// and azimuth `phi_rad` measured from the polarization axis.
    pub fn intensity_per_w(&self, r_nm: f64, phi_rad: f64) -> Result<f64> {
        if r_nm < 0.0 {
            return Err(Error::Geometry("negative radius".into()));
        }
        if !(self.power_norm.is_finite() && self.power_norm > 0.0) {
            return Err(Error::Numeric("mode is not power-normalized".into()));
        }
        let n_loc = if r_nm < self.radius_nm() {
            self.core_index
        } else {
            self.medium_index
        };
        // (n/2) |E|^2 / P, in 1/nm^2 with eps0 c = 1; report per um^2
        Ok(0.5 * n_loc * self.e_squared(r_nm, phi_rad) * self.power_norm * 1e6)
    }

    /// Intensity per watt at the fiber surface on the polarization axis.
    pub fn surface_intensity_per_w(&self) -> Result<f64> {
        self.intensity_per_w(self.radius_nm() + 1e-9, 0.0)
    }

    /// Characteristic-equation value re-evaluated at the stored root.
    pub fn dispersion_residual(&self) -> f64 {
        characteristic(
            self.core_index,
            self.medium_index,
            self.radius_nm(),
            self.k0(),
            self.effective_index,
        )
    }

    /// Strip the power normalization; only useful for exercising the
    /// unnormalized-mode error path.
    pub fn without_normalization(mut self) -> Self {
        self.power_norm = f64::NAN;
        self
    }
}

fn trapezoid(f: &dyn Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let hstep = (b - a) / steps as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..steps {
        sum += f(a + hstep * i as f64);
    }
    sum * hstep
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, fa, b, fb, fm, whole, rel_tol * scale, 40)
}

/// Cache of solved modes keyed by (wavelength, diameter).
#[derive(Default)]
pub struct ModeCache {
    core_index: f64,
    medium_index: f64,
    map: HashMap<(u64, u64), ModeSolution>,
}

impl ModeCache {
    pub fn new(core_index: f64, medium_index: f64) -> Self {
        Self {
            core_index,
            medium_index,
            map: HashMap::new(),
        }
    }

    fn key(wavelength_nm: f64, diameter_nm: f64) -> (u64, u64) {
        (wavelength_nm.to_bits(), diameter_nm.to_bits())
    }

    pub fn get(&mut self, wavelength_nm: f64, diameter_nm: f64) -> Result<&ModeSolution> {
        let key = Self::key(wavelength_nm, diameter_nm);
        if !self.map.contains_key(&key) {
            let mode = solve_he11(self.core_index, self.medium_index, diameter_nm, wavelength_nm)?;
            self.map.insert(key, mode);
        }
        Ok(&self.map[&key])
    }
}

/// Normalized surface intensity per unit guided power vs. fiber diameter,
/// per wavelength. `None` entries mark diameters where the mode solve
/// failed (cutoff truncation).
#[derive(Debug, Clone)]
pub struct SurfaceIntensityCurve {
    pub diameters_nm: Vec<f64>,
    pub wavelengths_nm: Vec<f64>,
    /// intensities[wavelength_idx][diameter_idx] in 1/um^2 per W.
    pub intensities: Vec<Vec<Option<f64>>>,
}

impl SurfaceIntensityCurve {
    /// Whether any diameter point of wavelength `i` was truncated.
    pub fn truncated(&self, wavelength_idx: usize) -> bool {
        self.intensities[wavelength_idx].iter().any(|v| v.is_none())
    }

    /// Locate a crossover diameter of two wavelength curves by bisection on
    /// the (interpolated) curve difference. Returns the first crossover in
    /// the scanned range.
    pub fn crossover(&self, i: usize, j: usize) -> Option<f64> {
        let diff: Vec<Option<f64>> = self.intensities[i]
            .iter()
            .zip(&self.intensities[j])
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            })
            .collect();
        for w in 1..diff.len() {
            if let (Some(f0), Some(f1)) = (diff[w - 1], diff[w]) {
                // an exact grid zero counts only if the sign truly flips
                // across it (identical curves difference is zero everywhere)
                if f0 == 0.0 && w >= 2 {
                    if let (Some(prev), true) = (diff[w - 2], f1 != 0.0) {
                        if prev * f1 < 0.0 {
                            return Some(self.diameters_nm[w - 1]);
                        }
                    }
                }
                if f0 * f1 < 0.0 {
                    // bisection on the linear interpolant
                    let (mut lo, mut hi) = (self.diameters_nm[w - 1], self.diameters_nm[w]);
                    let (d0, d1) = (lo, hi);
                    let interp = |d: f64| f0 + (f1 - f0) * (d - d0) / (d1 - d0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if interp(lo) * interp(mid) <= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    return Some(0.5 * (lo + hi));
                }
            }
        }
        None
    }
}

/// Compute surface-intensity curves over a diameter range for a list of
/// wavelengths. Cutoff at a given diameter marks that point `None` rather
/// than failing the whole curve.
pub fn surface_intensity_curve(
    fiber: &FiberSpec,
    wavelengths_nm: &[f64],
    d_min_nm: f64,
    d_max_nm: f64,
    d_step_nm: f64,
) -> Result<SurfaceIntensityCurve> {
    fiber.validate()?;
    if !(d_min_nm > 0.0 && d_max_nm > d_min_nm && d_step_nm > 0.0) {
        return Err(Error::Config("invalid diameter range".into()));
    }
    let mut diameters = Vec::new();
    let mut d = d_min_nm;
    while d <= d_max_nm + 1e-9 {
        diameters.push(d);
        d += d_step_nm;
    }
    let mut intensities = Vec::with_capacity(wavelengths_nm.len());
    for &wl in wavelengths_nm {
        let mut row = Vec::with_capacity(diameters.len());
        for &dia in &diameters {
            let value = solve_he11(fiber.core_index, fiber.medium_index, dia, wl)
                .ok()
                .and_then(|m| m.surface_intensity_per_w().ok());
            row.push(value);
        }
        intensities.push(row);
    }
    Ok(SurfaceIntensityCurve {
        diameters_nm: diameters,
        wavelengths_nm: wavelengths_nm.to_vec(),
        intensities,
    })
}
