//! Two- and three-level quantum dynamics: closed-form propagation, driven
//! systems in the rotating frame, quasi-energy spectra, probe sweeps and a
//! brute-force Schrödinger integrator used to validate all of it.

pub mod cli;
pub mod driven;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod oracle;
pub mod presets;
pub mod report;
pub mod spectrum;
pub mod three_level;
pub mod trace;
pub mod two_state;

pub use error::{Error, Result};
pub use linalg::C64;
