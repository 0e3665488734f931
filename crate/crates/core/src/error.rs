use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested mode is below cutoff: no root of the characteristic
    /// equation was bracketed between the medium and core indices.
    #[error("mode cutoff: no HE11 root for lambda = {wavelength_nm} nm, diameter = {diameter_nm} nm")]
    ModeCutoff {
        wavelength_nm: f64,
        diameter_nm: f64,
    },

    /// The root refinement stopped without reaching the residual tolerance.
    #[error("mode solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverConvergence { residual: f64, iterations: usize },

    /// Wavelength outside the validity window of the permittivity data.
    #[error("wavelength {0} nm outside the 400-1000 nm permittivity data window")]
    WavelengthRange(f64),

    /// Quasistatic resonance denominator too close to zero for the
    /// uncorrected dipole polarizability.
    #[error("polarizability resonance singularity: |eps_p + 2 eps_m| = {0:.3e}")]
    ResonanceSingularity(f64),

    /// A particle placed so that it overlaps the fiber.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// A numeric operation could not be completed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// No force balance exists (zero axial force in the numerator mode).
    #[error("no force balance: {0}")]
    NoBalance(String),

    /// Input data could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
