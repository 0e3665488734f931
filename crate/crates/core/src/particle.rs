//! Gold-nanosphere optical response and the axial/radial forces exerted by
//! a guided mode on a particle sitting on the fiber surface.
//!
//! Two polarizability branches are provided: the radiatively corrected
//! dipole and the first electric Mie partial wave (a1). The a1 branch is
//! the default: at 100-150 nm gold diameters the bare dipole underestimates
//! the extinction cross section by more than a factor of two, which shows
//! up directly in the force ratio of the two colors.

use num_complex::Complex64;

use crate::fiber::ModeSolution;
use crate::material::{gold_permittivity, PermittivityModel};
use crate::{Error, Result, SPEED_OF_LIGHT_M_S};

const PI: f64 = std::f64::consts::PI;

/// sigma[nm^2] * I[1/nm^2] * n * P[mW] -> force [pN].
const PN_PER_MW: f64 = 1e9 / SPEED_OF_LIGHT_M_S;

/// Which polarizability model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolarizabilityModel {
    /// First electric Mie coefficient a1 (default).
    #[default]
    MieA1,
    /// Radiatively corrected quasistatic dipole.
    Dipole,
}

/// A gold nanosphere immersed in the index-matched medium of the fiber.
#[derive(Debug, Clone, Copy)]
pub struct ParticleSpec {
    /// Sphere diameter [nm].
    pub diameter_nm: f64,
    pub permittivity_model: PermittivityModel,
    pub polarizability_model: PolarizabilityModel,
    /// Refractive index of the surrounding medium.
    pub medium_index: f64,
}

impl ParticleSpec {
    pub fn gold(diameter_nm: f64) -> Self {
        Self {
            diameter_nm,
            permittivity_model: PermittivityModel::default(),
            polarizability_model: PolarizabilityModel::default(),
            medium_index: 1.33,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.diameter_nm <= 0.0 {
            return Err(Error::Config("particle diameter must be > 0".into()));
        }
        if self.medium_index <= 1.0 {
            return Err(Error::Config("medium index must exceed 1".into()));
        }
        Ok(())
    }

    pub fn radius_nm(&self) -> f64 {
        self.diameter_nm / 2.0
    }
}

/// Polarizability and cross sections at one wavelength.
#[derive(Debug, Clone, Copy)]
pub struct OpticalResponse {
    pub wavelength_nm: f64,
    /// Volume-convention polarizability [nm^3] (vacuum permittivity
    /// factored out).
    pub alpha: Complex64,
    pub sigma_abs_nm2: f64,
    pub sigma_scat_nm2: f64,
    pub sigma_ext_nm2: f64,
}

/// Quasistatic + radiative-correction dipole response for arbitrary
/// particle and medium permittivities. Exposed separately so non-gold
/// spheres (e.g. index-matched) can be evaluated directly.
pub fn dipole_response(
    eps_particle: Complex64,
    eps_medium: f64,
    diameter_nm: f64,
    wavelength_nm: f64,
) -> Result<OpticalResponse> {
    let a = diameter_nm / 2.0;
    let k = 2.0 * PI * eps_medium.sqrt() / wavelength_nm;
    let denom = eps_particle + 2.0 * eps_medium;
    if denom.norm() < 1e-9 {
        return Err(Error::ResonanceSingularity(denom.norm()));
    }
    let alpha0 = 4.0 * PI * a * a * a * (eps_particle - eps_medium) / denom;
    let alpha = alpha0 / (Complex64::new(1.0, 0.0) - Complex64::i() * k.powi(3) * alpha0 / (6.0 * PI));
    let sigma_scat = k.powi(4) * alpha.norm_sqr() / (6.0 * PI);
    // absorption from the internal (uncorrected) response, rescaled by the
    // radiative correction; keeps sigma_ext = k Im(alpha) exact
    let ratio = (alpha / alpha0).norm_sqr();
    let sigma_abs = (k * alpha0.im * ratio).max(0.0);
    Ok(OpticalResponse {
        wavelength_nm,
        alpha,
        sigma_abs_nm2: sigma_abs,
        sigma_scat_nm2: sigma_scat,
        sigma_ext_nm2: sigma_abs + sigma_scat,
    })
}

// Riccati-Bessel functions of order 1 at complex argument.
fn psi1(z: Complex64) -> Complex64 {
    z.sin() / z - z.cos()
}
fn psi1p(z: Complex64) -> Complex64 {
    z.sin() - psi1(z) / z
}
fn chi1(z: Complex64) -> Complex64 {
    z.cos() / z + z.sin()
}
fn chi1p(z: Complex64) -> Complex64 {
    z.cos() - chi1(z) / z
}
fn xi1(z: Complex64) -> Complex64 {
    psi1(z) - Complex64::i() * chi1(z)
}
fn xi1p(z: Complex64) -> Complex64 {
    psi1p(z) - Complex64::i() * chi1p(z)
}

/// First electric Mie coefficient and the equivalent dipole polarizability.
pub fn mie_a1_response(
    eps_particle: Complex64,
    eps_medium: f64,
    diameter_nm: f64,
    wavelength_nm: f64,
) -> Result<OpticalResponse> {
    let a = diameter_nm / 2.0;
    let n_m = eps_medium.sqrt();
    let k = 2.0 * PI * n_m / wavelength_nm;
    let x = Complex64::new(k * a, 0.0);
    let m = eps_particle.sqrt() / n_m;
    let mx = m * x;
    let a1 = (m * psi1(mx) * psi1p(x) - psi1(x) * psi1p(mx))
        / (m * psi1(mx) * xi1p(x) - xi1(x) * psi1p(mx));
    if !a1.re.is_finite() || !a1.im.is_finite() {
        return Err(Error::Numeric("Mie a1 coefficient not finite".into()));
    }
    let alpha = Complex64::i() * 6.0 * PI * a1 / k.powi(3);
    let sigma_ext = 6.0 * PI / (k * k) * a1.re;
    let sigma_scat = 6.0 * PI / (k * k) * a1.norm_sqr();
    Ok(OpticalResponse {
        wavelength_nm,
        alpha,
        sigma_abs_nm2: sigma_ext - sigma_scat,
        sigma_scat_nm2: sigma_scat,
        sigma_ext_nm2: sigma_ext,
    })
}

/// Optical response of a gold sphere per its configured models.
pub fn polarizability(particle: &ParticleSpec, wavelength_nm: f64) -> Result<OpticalResponse> {
    particle.validate()?;
    let eps_p = gold_permittivity(wavelength_nm, particle.permittivity_model)?;
    let eps_m = particle.medium_index * particle.medium_index;
    match particle.polarizability_model {
        PolarizabilityModel::Dipole => {
            dipole_response(eps_p, eps_m, particle.diameter_nm, wavelength_nm)
        }
        PolarizabilityModel::MieA1 => {
            mie_a1_response(eps_p, eps_m, particle.diameter_nm, wavelength_nm)
        }
    }
}

/// Axial propulsion and radial gradient force from one guided mode.
#[derive(Debug, Clone, Copy)]
pub struct ForceComponents {
    pub wavelength_nm: f64,
    /// Signed axial force [pN]; sign follows the propagation direction.
    pub f_axial_pn: f64,
    /// Radial gradient-force magnitude toward the surface [pN].
    pub f_grad_pn: f64,
    /// Propagation direction along z, +1 or -1.
    pub direction: f64,
}

/// Radial position of the particle center when it touches the fiber on the
/// polarization-axis azimuth.
pub fn contact_radius_nm(mode: &ModeSolution, particle: &ParticleSpec) -> f64 {
    mode.diameter_nm / 2.0 + particle.radius_nm()
}

/// Forces on a particle whose center sits at radius `r_nm` on the
/// polarization axis, for `power_mw` of guided power propagating with sign
/// `direction` (+1 for +z).
pub fn axial_force_at(
    particle: &ParticleSpec,
    mode: &ModeSolution,
    r_nm: f64,
    power_mw: f64,
    direction: f64,
) -> Result<ForceComponents> {
    if power_mw < 0.0 {
        return Err(Error::Config("guided power must be >= 0".into()));
    }
    if r_nm < mode.diameter_nm / 2.0 + particle.radius_nm() - 1e-9 {
        return Err(Error::Geometry(format!(
            "particle center at r = {r_nm} nm overlaps the fiber (d = {} nm)",
            mode.diameter_nm
        )));
    }
    let response = polarizability(particle, mode.wavelength_nm)?;
    let n_m = particle.medium_index;
    // intensity per W in 1/nm^2 at the particle center
    let intensity = mode.intensity_per_w(r_nm, 0.0)? * 1e-6;
    let f_axial = response.sigma_ext_nm2 * intensity * n_m * power_mw * PN_PER_MW * direction;
    // gradient force from Re(alpha)/2nc * dI/dr, central difference
    let dr = 0.1;
    let didr = (mode.intensity_per_w(r_nm + dr, 0.0)? - mode.intensity_per_w(r_nm - dr, 0.0)?)
        * 1e-6
        / (2.0 * dr);
    let f_grad = response.alpha.re * didr / (2.0 * n_m) * power_mw * PN_PER_MW;
    Ok(ForceComponents {
        wavelength_nm: mode.wavelength_nm,
        f_axial_pn: f_axial,
        f_grad_pn: f_grad.abs(),
        direction,
    })
}

/// Forces with the particle at the surface-contact position.
pub fn axial_force(
    particle: &ParticleSpec,
    mode: &ModeSolution,
    power_mw: f64,
    direction: f64,
) -> Result<ForceComponents> {
    axial_force_at(
        particle,
        mode,
        contact_radius_nm(mode, particle),
        power_mw,
        direction,
    )
}

/// Equal-power force ratio R = F(mode_a) / F(mode_b) with the particle in
/// contact on the polarization axis.
pub fn force_ratio(
    particle: &ParticleSpec,
    mode_a: &ModeSolution,
    mode_b: &ModeSolution,
) -> Result<f64> {
    let fa = axial_force(particle, mode_a, 1.0, 1.0)?.f_axial_pn;
    let fb = axial_force(particle, mode_b, 1.0, 1.0)?.f_axial_pn;
    if fb == 0.0 {
        return Err(Error::Numeric("zero denominator force in ratio".into()));
    }
    Ok(fa / fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::solve_he11;
    use approx::assert_relative_eq;

    fn modes() -> (ModeSolution, ModeSolution) {
        (
            solve_he11(1.45, 1.33, 550.0, 640.0).unwrap(),
            solve_he11(1.45, 1.33, 550.0, 785.0).unwrap(),
        )
    }

    #[test]
    fn index_matched_sphere_is_invisible() {
        let eps_m = 1.33 * 1.33;
        let r = dipole_response(Complex64::new(eps_m, 0.0), eps_m, 100.0, 640.0).unwrap();
        assert_eq!(r.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(r.sigma_ext_nm2, 0.0);
        assert_eq!(r.sigma_scat_nm2, 0.0);
        let r = mie_a1_response(Complex64::new(eps_m, 0.0), eps_m, 100.0, 640.0).unwrap();
        assert!(r.sigma_ext_nm2.abs() < 1e-9);
    }

    #[test]
    fn quasistatic_cube_law() {
        let eps = Complex64::new(-12.0, 1.2);
        let eps_m = 1.33 * 1.33;
        let a0 = |d: f64| {
            let a = d / 2.0;
            4.0 * PI * a * a * a * (eps - eps_m) / (eps + 2.0 * eps_m)
        };
        assert_relative_eq!(
            a0(150.0).norm() / a0(100.0).norm(),
            3.375,
            max_relative = 1e-12
        );
    }

    #[test]
    fn resonance_singularity_flagged() {
        let eps_m = 1.33 * 1.33;
        let eps = Complex64::new(-2.0 * eps_m, 0.0);
        assert!(matches!(
            dipole_response(eps, eps_m, 100.0, 640.0),
            Err(Error::ResonanceSingularity(_))
        ));
    }

    #[test]
    fn optical_theorem_both_branches() {
        for model in [PolarizabilityModel::Dipole, PolarizabilityModel::MieA1] {
            for d in [100.0, 150.0] {
                for wl in [640.0, 785.0] {
                    let mut p = ParticleSpec::gold(d);
                    p.polarizability_model = model;
                    let r = polarizability(&p, wl).unwrap();
                    let k = 2.0 * PI * p.medium_index / wl;
                    let from_alpha = k * r.alpha.im;
                    assert_relative_eq!(
                        r.sigma_ext_nm2,
                        r.sigma_abs_nm2 + r.sigma_scat_nm2,
                        max_relative = 1e-12
                    );
                    assert_relative_eq!(r.sigma_ext_nm2, from_alpha, max_relative = 1e-6);
                    assert!(r.sigma_abs_nm2 >= 0.0 && r.sigma_scat_nm2 >= 0.0);
                    assert!(r.alpha.im >= 0.0);
                }
            }
        }
    }

    #[test]
    fn frozen_cross_sections() {
        // a1-branch extinction, Drude-Lorentz permittivity
        let cases = [
            (100.0, 640.0, 23768.7355, 19447.8397),
            (100.0, 785.0, 4614.2547, 4104.3442),
            (150.0, 640.0, 93315.4719, 86460.7846),
            (150.0, 785.0, 53317.4292, 51100.9362),
        ];
        for (d, wl, sext, sscat) in cases {
            let r = polarizability(&ParticleSpec::gold(d), wl).unwrap();
            assert_relative_eq!(r.sigma_ext_nm2, sext, max_relative = 1e-6);
            assert_relative_eq!(r.sigma_scat_nm2, sscat, max_relative = 1e-6);
        }
    }

    #[test]
    fn a1_branch_tracks_full_mie_series() {
        // full-partial-wave sums evaluated externally with the same
        // permittivity model
        let full = [
            (100.0, 640.0, 23972.268),
            (100.0, 785.0, 4694.453),
            (150.0, 640.0, 95383.529),
            (150.0, 785.0, 54016.096),
        ];
        for (d, wl, sext_full) in full {
            let r = polarizability(&ParticleSpec::gold(d), wl).unwrap();
            let rel = (r.sigma_ext_nm2 - sext_full).abs() / sext_full;
            assert!(rel < 0.15, "D = {d}, lambda = {wl}: deviation {rel}");
        }
    }

    #[test]
    fn force_linearity_and_zero_power() {
        let (m640, _) = modes();
        let p = ParticleSpec::gold(100.0);
        let f0 = axial_force(&p, &m640, 0.0, 1.0).unwrap();
        assert_eq!(f0.f_axial_pn, 0.0);
        assert_eq!(f0.f_grad_pn, 0.0);
        let f1 = axial_force(&p, &m640, 1.5, 1.0).unwrap();
        let f2 = axial_force(&p, &m640, 3.0, 1.0).unwrap();
        assert_relative_eq!(f2.f_axial_pn, 2.0 * f1.f_axial_pn, max_relative = 1e-15);
        assert_relative_eq!(f2.f_grad_pn, 2.0 * f1.f_grad_pn, max_relative = 1e-15);
    }

    #[test]
    fn direction_sign_follows_propagation() {
        let (m640, m785) = modes();
        let p = ParticleSpec::gold(100.0);
        assert!(axial_force(&p, &m640, 1.0, 1.0).unwrap().f_axial_pn > 0.0);
        assert!(axial_force(&p, &m785, 1.0, -1.0).unwrap().f_axial_pn < 0.0);
    }

    #[test]
    fn gradient_force_pulls_inward_for_positive_alpha() {
        let (m640, _) = modes();
        let p = ParticleSpec::gold(100.0);
        let f = axial_force(&p, &m640, 1.0, 1.0).unwrap();
        assert!(f.f_grad_pn >= 0.0);
    }

    #[test]
    fn overlap_rejected() {
        let (m640, _) = modes();
        let p = ParticleSpec::gold(100.0);
        assert!(matches!(
            axial_force_at(&p, &m640, 300.0, 1.0, 1.0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn frozen_per_mw_forces_and_ratio() {
        let (m640, m785) = modes();
        for (d, f6, f7, ratio) in [
            (100.0, 0.116218, 0.019232, 6.042819),
            (150.0, 0.370134, 0.191365, 1.934178),
        ] {
            let p = ParticleSpec::gold(d);
            let a = axial_force(&p, &m640, 1.0, 1.0).unwrap().f_axial_pn;
            let b = axial_force(&p, &m785, 1.0, 1.0).unwrap().f_axial_pn;
            assert_relative_eq!(a, f6, max_relative = 1e-4);
            assert_relative_eq!(b, f7, max_relative = 1e-4);
            assert_relative_eq!(force_ratio(&p, &m640, &m785).unwrap(), ratio, max_relative = 1e-4);
        }
    }

    #[test]
    fn ratio_decreases_with_size() {
        let (m640, m785) = modes();
        let mut prev = f64::INFINITY;
        let mut d = 80.0;
        while d <= 200.0 {
            let r = force_ratio(&ParticleSpec::gold(d), &m640, &m785).unwrap();
            assert!(r > 0.0 && r < prev, "R not decreasing at D = {d}");
            prev = r;
            d += 10.0;
        }
    }

    #[test]
    fn identical_wavelengths_unit_ratio() {
        let (m640, _) = modes();
        let p = ParticleSpec::gold(100.0);
        assert_relative_eq!(force_ratio(&p, &m640, &m640).unwrap(), 1.0, max_relative = 1e-15);
    }
}
