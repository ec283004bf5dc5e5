//! Exact finite-dimensional algebra of the oper monodromy problem: Stokes
//! matrices, the canonical monodromy M₀, the Vandermonde and 𝖬 change-of-basis
//! matrices, and the connection matrix E whose proportionality to the identity
//! is equivalent to the quantization conditions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TodaError};
use crate::numerics::{elementary_symmetric, Polynomial};

pub type SquareMatrixC = DMatrix<C>;

const I: C = C::new(0.0, 1.0);

/// Monodromy exponents σ_j, eigenvalues Σ_j = e^{2πiσ_j}, optional connection
/// exponents η_j and the Stokes constants s_1..s_{N-1}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyData {
    pub n: usize,
    pub sigma: Vec<C>,
    pub big_sigma: Vec<C>,
    pub eta: Option<Vec<C>>,
    /// s[i-1] = s_i.
    pub s: Vec<C>,
}

impl MonodromyData {
    pub fn new(sigma: Vec<C>, eta: Option<Vec<C>>) -> Result<Self> {
        let n = sigma.len();
        if n < 2 {
            return Err(TodaError::Domain(format!("rank must be at least 2, got {n}")));
        }
        let total: C = sigma.iter().sum();
        let scale = sigma.iter().map(|s| s.norm()).sum::<f64>().max(1.0);
        if total.norm() > 1e-10 * scale {
            return Err(TodaError::Domain(format!("Σσ_j = {total} is not zero")));
        }
        if let Some(e) = &eta {
            if e.len() != n {
                return Err(TodaError::Domain(format!("expected {n} η_j, got {}", e.len())));
            }
        }
        let big_sigma: Vec<C> = sigma.iter().map(|s| (2.0 * PI * I * s).exp()).collect();
        let s = (1..n)
            .map(|i| {
                let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
                Ok(elementary_symmetric(&big_sigma, i)? * sign)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            sigma,
            big_sigma,
            eta,
            s,
        })
    }

    /// Monodromy data at δ = -iħσ, i.e. σ_j = iδ_j/ħ, with η_j = log ζ_j / 2πi.
    pub fn from_delta(delta: &[C], hbar: f64, log_zeta: Option<&[C]>) -> Result<Self> {
        let sigma = delta.iter().map(|d| I * d / hbar).collect();
        let eta = log_zeta.map(|lz| lz.iter().map(|l| l / (2.0 * PI * I)).collect());
        Self::new(sigma, eta)
    }

    /// s_i for i in 1..N-1, extended by s_{i-N} = (-1)^{N-1} s_i.
    pub fn stokes_constant(&self, i: i64) -> C {
        let n = self.n as i64;
        if i > 0 {
            self.s[(i - 1) as usize]
        } else {
            let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
            self.s[(i + n - 1) as usize] * sign
        }
    }
}

/// Stokes matrix 𝒮_k: unit diagonal; entry (m, n) = s_{n-m} exactly when
/// m ≡ k - n (mod N) and k - 2n (mod 2N) ∈ {1, …, N-1}.
pub fn stokes_matrix(k: usize, d: &MonodromyData) -> Result<SquareMatrixC> {
    let n = d.n;
    if k >= 2 * n {
        return Err(TodaError::IndexOutOfRange { index: k, limit: 2 * n - 1 });
    }
    let (ni, ki) = (n as i64, k as i64);
    let mut m = DMatrix::<C>::identity(n, n);
    for col in 0..ni {
        let row = (ki - col).rem_euclid(ni);
        if row == col {
            continue;
        }
        let r = (ki - 2 * col).rem_euclid(2 * ni);
        if (1..ni).contains(&r) {
            m[(row as usize, col as usize)] = d.stokes_constant(col - row);
        }
    }
    Ok(m)
}

/// Cyclic shift with subdiagonal ones and corner (0, N-1) = (-1)^{N-1}.
pub fn permutation_pn(n: usize) -> SquareMatrixC {
    let mut m = DMatrix::<C>::zeros(n, n);
    for r in 1..n {
        m[(r, r - 1)] = C::new(1.0, 0.0);
    }
    m[(0, n - 1)] = C::new(if (n - 1) % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    m
}

/// Canonical monodromy M₀ = 𝒮₀𝒮₁P_N.
pub fn monodromy_m0(d: &MonodromyData) -> SquareMatrixC {
    // k = 0, 1 are always in range
    let s0 = stokes_matrix(0, d).expect("k = 0 in range");
    let s1 = stokes_matrix(1, d).expect("k = 1 in range");
    s0 * s1 * permutation_pn(d.n)
}

/// Characteristic polynomial det(λ - A) by Faddeev-LeVerrier, ascending coefficients.
pub fn char_poly(a: &SquareMatrixC) -> Polynomial {
    let n = a.nrows();
    let mut coeffs = vec![C::new(0.0, 0.0); n + 1];
    coeffs[n] = C::new(1.0, 0.0);
    let id = DMatrix::<C>::identity(n, n);
    let mut m = DMatrix::<C>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[n - k + 1];
        coeffs[n - k] = -(a * &m).trace() / k as f64;
    }
    Polynomial::new(coeffs)
}

/// Eigenvalues of a complex square matrix through its Schur form.
pub fn eigenvalues(a: &SquareMatrixC) -> Result<Vec<C>> {
    a.clone()
        .try_schur(1e-15, 10_000)
        .map(|s| s.unpack().1.diagonal().iter().copied().collect())
        .ok_or_else(|| TodaError::non_convergence("eigenvalues", "Schur iteration did not converge"))
}

fn check_distinct(d: &MonodromyData) -> Result<()> {
    for a in 0..d.n {
        for b in a + 1..d.n {
            if (d.big_sigma[a] - d.big_sigma[b]).norm() < 1e-12 {
                return Err(TodaError::Collision(format!("Σ_{} = Σ_{}", a + 1, b + 1)));
            }
        }
    }
    Ok(())
}

/// Reflected Vandermonde matrix with rows (Σ_j^{N-1}, …, Σ_j^0).
pub fn vandermonde_v(d: &MonodromyData) -> Result<SquareMatrixC> {
    check_distinct(d)?;
    let n = d.n;
    Ok(DMatrix::from_fn(n, n, |j, c| d.big_sigma[j].powu((n - 1 - c) as u32)))
}

fn matrix_power(m: &SquareMatrixC, e: i64) -> Result<SquareMatrixC> {
    let base = if e < 0 {
        m.clone()
            .try_inverse()
            .ok_or_else(|| TodaError::SingularJacobian(vec![m.determinant()]))?
    } else {
        m.clone()
    };
    let mut out = DMatrix::<C>::identity(m.nrows(), m.ncols());
    for _ in 0..e.unsigned_abs() {
        out = &out * &base;
    }
    Ok(out)
}

/// 𝖬 with [𝖬]_{n,k} = [M₀^{⌈N/2⌉-k}]_{n,0}, k = 1..N.
pub fn msf_matrix(d: &MonodromyData) -> Result<SquareMatrixC> {
    check_distinct(d)?;
    let n = d.n;
    let m0 = monodromy_m0(d);
    let half = n.div_ceil(2) as i64;
    let mut out = DMatrix::<C>::zeros(n, n);
    for k in 1..=n {
        let p = matrix_power(&m0, half - k as i64)?;
        for r in 0..n {
            out[(r, k - 1)] = p[(r, 0)];
        }
    }
    Ok(out)
}

/// Connection matrix E = 𝖬 V⁻¹ T V 𝖬⁻¹ with T = diag(e^{2πiη_j}).
pub fn connection_e(d: &MonodromyData) -> Result<SquareMatrixC> {
    let eta = d
        .eta
        .as_ref()
        .ok_or_else(|| TodaError::Domain("connection matrix needs η".into()))?;
    let v = vandermonde_v(d)?;
    let m = msf_matrix(d)?;
    let t = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d.n,
        eta.iter().map(|e| (2.0 * PI * I * e).exp()),
    ));
    let singular = |what: &str| TodaError::non_convergence("connection_e", format!("{what} is singular"));
    let v_inv = v.clone().try_inverse().ok_or_else(|| singular("V"))?;
    let m_inv = m.clone().try_inverse().ok_or_else(|| singular("𝖬"))?;
    Ok(&m * v_inv * t * v * m_inv)
}

/// Proportionality test: score = ‖E - (tr E/N)·1‖_F / |tr E/N|.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuantizationScore {
    pub quantized: bool,
    pub score: f64,
}

pub fn is_quantized_e(e: &SquareMatrixC, tol: f64) -> Result<QuantizationScore> {
    let n = e.nrows();
    let mean = e.trace() / n as f64;
    if mean.norm() < 1e-300 {
        return Err(TodaError::Domain("connection matrix has zero trace".into()));
    }
    let id = DMatrix::<C>::identity(n, n);
    let score = (e - id * mean).norm() / mean.norm();
    Ok(QuantizationScore {
        quantized: score < tol,
        score,
    })
}
