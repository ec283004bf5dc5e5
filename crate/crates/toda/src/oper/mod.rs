//! Solutions of the rank-N Mathieu oper on the twice-punctured sphere.
//!
//! Points are passed as x = log z so that z^σ and rotations z → z e^{2πik}
//! are tracked without branch ambiguity. Scaled coordinates: w = (Λ/ħ)^N z
//! near infinity, w′ = (ħ/Λ)^N z near zero.

mod checks;
mod chi;
mod floquet;
mod monodromy;
mod special;

pub use checks::{
    antiholomorphic_symmetry_check, floquet_asymptotics_check, fourier_duality_check, fourier_transform,
    AsymptoticsReport, FourierReport, SymmetryReport,
};
pub use chi::{chi_k, chi_max_decay, chi_max_decay_with, ChiMethod, ChiValue};
pub use floquet::{floquet_eval, FloquetBasis, Side};
pub use monodromy::{ode_monodromy, transport_solution, MonodromyReport};
pub use checks::FOURIER_SAMPLES;
pub use special::{hypergeometric_0fn, meijer_maximal, meijer_maximal_with, meijer_mellin_barnes, meijer_residue_sum};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gutzwiller::{refine_zeros, Gutzwiller, SpectralData};
use crate::nlie::{solve_nlie_from, NlieParams};
use crate::quantize::SpectrumRecord;
use crate::TodaParams;

const I: C = C::new(0.0, 1.0);

/// Oper t(-iħ z∂_z)χ = Λ^N (i^N z + i^{-N} z^{-1}) χ with t(λ) = λ^N + Σ E_k λ^{N-k}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperInstance {
    pub spectral: SpectralData,
}

impl OperInstance {
    pub fn new(spectral: SpectralData) -> Result<Self> {
        spectral.params.validate()?;
        Ok(Self { spectral })
    }

    pub fn from_charges(params: TodaParams, charges: Vec<C>) -> Result<Self> {
        Self::new(SpectralData::from_charges(params, charges)?)
    }

    pub fn params(&self) -> TodaParams {
        self.spectral.params
    }

    /// E_2..E_N.
    pub fn charges(&self) -> &[C] {
        &self.spectral.charges
    }

    /// Exponent β = -(N-1)/2 of the formal solutions.
    pub fn beta(&self) -> f64 {
        -((self.params().n - 1) as f64) / 2.0
    }

    /// log w = N log(Λ/ħ) + x.
    pub fn log_w(&self, x: C) -> C {
        let p = self.params();
        p.n as f64 * (p.lambda / p.hbar).ln() + x
    }

    /// log w′ = N log(ħ/Λ) + x.
    pub fn log_w_prime(&self, x: C) -> C {
        let p = self.params();
        p.n as f64 * (p.hbar / p.lambda).ln() + x
    }

    /// a_N(z) = Λ^N (i^N z + i^{-N}/z) at z = e^x.
    pub fn potential(&self, x: C) -> C {
        let p = self.params();
        let n = p.n as i32;
        p.lambda.powi(n) * (I.powi(n) * x.exp() + I.powi(-n) * (-x).exp())
    }

    pub fn transfer(&self, lambda: C) -> C {
        self.spectral.t(lambda)
    }

    /// Companion matrix of -iħ z∂_z Ψ = A Ψ acting on (χ^{(N-1)}, …, χ^{(1)}, χ),
    /// χ^{(k)} = (-iħ z∂_z)^k χ.
    pub fn companion(&self, x: C) -> DMatrix<C> {
        let n = self.params().n;
        let mut a = DMatrix::<C>::zeros(n, n);
        for r in 1..n {
            a[(r, r - 1)] = C::new(1.0, 0.0);
        }
        // first row: (-E_1, -E_2, …, -E_N + a_N) with E_1 = 0
        for (k, e) in (2..=n).zip(self.charges()) {
            a[(0, k - 1)] = -e;
        }
        a[(0, n - 1)] += self.potential(x);
        a
    }

    /// Refined Wronskian zeros and the determinant-built pair.
    pub fn baxter_pair(&self, seeds: &[C]) -> Result<Gutzwiller> {
        let delta = refine_zeros(&self.spectral, seeds)?;
        Gutzwiller::with_zeros(self.spectral.clone(), delta)
    }

    /// Oper and Baxter pair of a quantized record: charges E_k of t_δ and the
    /// Wronskian zeros refined from δ*.
    pub fn from_record(rec: &SpectrumRecord) -> Result<(Self, Gutzwiller)> {
        let inst = Self::from_charges(rec.toda, rec.energies.clone())?;
        let pair = inst.baxter_pair(&rec.delta_star)?;
        Ok((inst, pair))
    }

    /// Non-quantized neighbour of a record: δ*_k shifted by `eps` and the last
    /// zero by `-eps` to keep Σδ, charges rebuilt from the NLIE solution.
    pub fn perturbed_record(rec: &SpectrumRecord, k: usize, eps: f64) -> Result<(Self, Gutzwiller)> {
        let n = rec.delta_star.len();
        if k + 1 >= n {
            return Err(crate::TodaError::IndexOutOfRange { index: k, limit: n - 1 });
        }
        let mut delta = rec.delta_star.clone();
        delta[k] += eps;
        delta[n - 1] -= eps;
        let mut p = NlieParams::new(rec.toda, delta.clone());
        p.grid = rec.grid;
        let sol = solve_nlie_from(&p, None)?;
        let inst = Self::new(sol.spectral.clone())?;
        let pair = inst.baxter_pair(&delta)?;
        Ok((inst, pair))
    }
}

/// 1/(e^{Nπiσ_l} ∏_{j≠l} sin π(σ_l - σ_j)) with the collision guard.
pub(crate) fn residue_weights(sigma: &[C]) -> Result<Vec<C>> {
    let n = sigma.len();
    let mut out = Vec::with_capacity(n);
    for l in 0..n {
        let mut den = (n as f64 * PI * I * sigma[l]).exp();
        for j in 0..n {
            if j != l {
                let s = (PI * (sigma[l] - sigma[j])).sin();
                if s.norm() < 1e-8 {
                    return Err(crate::TodaError::Collision(format!(
                        "σ_{} - σ_{} is within 1e-8 of an integer",
                        l + 1,
                        j + 1
                    )));
                }
                den *= s;
            }
        }
        out.push(1.0 / den);
    }
    Ok(out)
}
