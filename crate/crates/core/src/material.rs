//! Gold permittivity models.
//!
//! Two interchangeable sources are provided: a Drude-Lorentz fit (default)
//! and linear interpolation of tabulated literature optical constants.
//! Both are valid on the 400-1000 nm window only.

use num_complex::Complex64;

use crate::{Error, Result};

/// Which permittivity source to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermittivityModel {
    /// Drude + two Lorentz poles, least-squares fitted to the tabulated data.
    #[default]
    DrudeLorentz,
    /// Piecewise-linear interpolation of the embedded (n, k) table.
    Tabulated,
}

/// Tabulated gold optical constants (wavelength [nm], n, k), 397-984 nm,
/// from the Johnson & Christy thin-film measurements.
const GOLD_NK_TABLE: &[(f64, f64, f64)] = &[
    (397.38, 1.47, 1.952),
    (413.28, 1.46, 1.958),
    (430.50, 1.45, 1.948),
    (449.22, 1.38, 1.914),
    (471.42, 1.31, 1.849),
    (493.96, 1.04, 1.833),
    (523.79, 0.62, 2.081),
    (548.60, 0.43, 2.455),
    (579.37, 0.29, 2.863),
    (616.84, 0.21, 3.272),
    (655.99, 0.14, 3.697),
    (704.45, 0.13, 4.103),
    (759.95, 0.14, 4.542),
    (821.09, 0.16, 5.083),
    (891.97, 0.17, 5.663),
    (984.00, 0.22, 6.350),
];

/// Validity window of both models [nm].
pub const WAVELENGTH_MIN_NM: f64 = 400.0;
pub const WAVELENGTH_MAX_NM: f64 = 1000.0;

// Drude-Lorentz parameters fitted to GOLD_NK_TABLE (relative-error least
// squares, 540-900 nm weighted 3x). Angular frequencies in rad/s.
const DL_EPS_INF: f64 = 5.207_207_43;
const DL_OMEGA_P: f64 = 1.344_408_82e16;
const DL_GAMMA_D: f64 = 6.326_800_82e13;
const DL_F1: f64 = 0.667_421_667;
const DL_OMEGA_1: f64 = 4.177_325_95e15;
const DL_GAMMA_1: f64 = 8.807_583_14e14;
const DL_F2: f64 = 1.626_247_60;
const DL_OMEGA_2: f64 = 5.133_455_74e15;
const DL_GAMMA_2: f64 = 1.438_609_68e15;

const C_NM_S: f64 = 2.997_924_58e17;

fn check_window(wavelength_nm: f64) -> Result<()> {
    if !(WAVELENGTH_MIN_NM..=WAVELENGTH_MAX_NM).contains(&wavelength_nm) {
        return Err(Error::WavelengthRange(wavelength_nm));
    }
    Ok(())
}

/// Complex relative permittivity of gold at `wavelength_nm`.
pub fn gold_permittivity(wavelength_nm: f64, model: PermittivityModel) -> Result<Complex64> {
    check_window(wavelength_nm)?;
    Ok(match model {
        PermittivityModel::DrudeLorentz => drude_lorentz(wavelength_nm),
        PermittivityModel::Tabulated => tabulated(wavelength_nm),
    })
}

fn drude_lorentz(wavelength_nm: f64) -> Complex64 {
    let w = 2.0 * std::f64::consts::PI * C_NM_S / wavelength_nm;
    let i = Complex64::i();
    let mut eps = Complex64::new(DL_EPS_INF, 0.0);
    eps -= DL_OMEGA_P * DL_OMEGA_P / (Complex64::new(w * w, 0.0) + i * DL_GAMMA_D * w);
    eps += DL_F1 * DL_OMEGA_1 * DL_OMEGA_1
        / (Complex64::new(DL_OMEGA_1 * DL_OMEGA_1 - w * w, 0.0) - i * DL_GAMMA_1 * w);
    eps += DL_F2 * DL_OMEGA_2 * DL_OMEGA_2
        / (Complex64::new(DL_OMEGA_2 * DL_OMEGA_2 - w * w, 0.0) - i * DL_GAMMA_2 * w);
    eps
}

fn tabulated(wavelength_nm: f64) -> Complex64 {
    let table = GOLD_NK_TABLE;
    // clamp to the table ends inside the validity window
    if wavelength_nm <= table[0].0 {
        let (_, n, k) = table[0];
        return Complex64::new(n, k) * Complex64::new(n, k);
    }
    if wavelength_nm >= table[table.len() - 1].0 {
        let (_, n, k) = table[table.len() - 1];
        return Complex64::new(n, k) * Complex64::new(n, k);
    }
    let j = table.partition_point(|row| row.0 < wavelength_nm);
    let (l0, n0, k0) = table[j - 1];
    let (l1, n1, k1) = table[j];
    let t = (wavelength_nm - l0) / (l1 - l0);
    let n = n0 + t * (n1 - n0);
    let k = k0 + t * (k1 - k0);
    Complex64::new(n, k) * Complex64::new(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metallic_in_the_visible() {
        let eps = gold_permittivity(640.0, PermittivityModel::DrudeLorentz).unwrap();
        assert!(eps.re < 0.0);
        let eps = gold_permittivity(640.0, PermittivityModel::Tabulated).unwrap();
        assert!(eps.re < 0.0);
    }

    #[test]
    fn lossy_at_785() {
        for model in [PermittivityModel::DrudeLorentz, PermittivityModel::Tabulated] {
            assert!(gold_permittivity(785.0, model).unwrap().im > 0.0);
        }
    }

    #[test]
    fn fit_matches_table_at_640() {
        let fit = gold_permittivity(640.0, PermittivityModel::DrudeLorentz).unwrap();
        let tab = gold_permittivity(640.0, PermittivityModel::Tabulated).unwrap();
        let rel = (fit - tab).norm() / tab.norm();
        assert!(rel < 0.05, "relative deviation {rel}");
    }

    #[test]
    fn out_of_window_rejected() {
        assert!(gold_permittivity(399.0, PermittivityModel::DrudeLorentz).is_err());
        assert!(gold_permittivity(1000.5, PermittivityModel::Tabulated).is_err());
    }

    #[test]
    fn continuous_in_wavelength() {
        // no jumps larger than expected from the table slopes
        let mut prev = gold_permittivity(400.0, PermittivityModel::Tabulated).unwrap();
        let mut lam = 400.5;
        while lam <= 1000.0 {
            let cur = gold_permittivity(lam, PermittivityModel::Tabulated).unwrap();
            assert!((cur - prev).norm() < 0.2, "jump at {lam} nm");
            prev = cur;
            lam += 0.5;
        }
    }
}
