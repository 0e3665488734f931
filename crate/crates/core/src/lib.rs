//! Two-color evanescent-field trapping and transport of gold nanospheres
//! near an optical nanofiber taper.
//!
//! The crate is organized along the physical pipeline:
//!
//! - [`fiber`]: HE11 mode solver for a step-index nanofiber and evanescent
//!   field evaluation, including surface-intensity curves vs. diameter.
//! - [`material`]: gold permittivity models (Drude-Lorentz fit and a
//!   tabulated literature data set).
//! - [`particle`]: nanosphere polarizability, optical cross sections and
//!   per-mode axial/gradient forces.
//! - [`taper`]: force profiles along a taper, force-balance powers, trap /
//!   anti-trap location and trapping potentials.
//! - [`transport`]: overdamped Brownian dynamics of particles along the
//!   fiber and synthetic kymograph rendering.
//! - [`analysis`]: kymograph peak extraction, Hough line spectrum and
//!   nearest-peak trajectory linking with velocity statistics.
//! - [`io`]: CSV / PGM / plain-text readers and writers for all of the above.

pub mod analysis;
pub mod error;
pub mod fiber;
pub mod io;
pub mod material;
pub mod particle;
pub mod taper;
pub mod transport;

pub use error::{Error, Result};

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT_M_S: f64 = 2.997_924_58e8;

/// Boltzmann constant [J/K].
pub const BOLTZMANN_J_K: f64 = 1.380_649e-23;
