//! Numerical laboratory for the closed quantum Toda chain.
//!
//! Two constructions of Baxter-equation solutions (a continuant determinant
//! and a nonlinear integral equation) feed a quantization solver, the
//! Yang-Yang potential, and the monodromy data of the associated rank-N
//! Mathieu opers on the twice-punctured sphere.

pub mod cli;
pub mod error;
pub mod gutzwiller;
pub mod monodromy_algebra;
pub mod nlie;
pub mod numerics;
pub mod oper;
pub mod quantize;
pub mod yangyang;

pub use error::{Result, TodaError};
pub use num_complex::Complex64 as C64;

/// Global problem instance: rank, Planck constant and coupling.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TodaParams {
    pub n: usize,
    pub hbar: f64,
    pub lambda: f64,
}

impl TodaParams {
    pub fn new(n: usize, hbar: f64, lambda: f64) -> Self {
        Self { n, hbar, lambda }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(TodaError::Config(format!("rank must be at least 2, got {}", self.n)));
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(TodaError::Config(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(TodaError::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}
