use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::OperInstance;
use crate::error::{Result, TodaError};
use crate::gutzwiller::{k_minus, k_plus, BaxterPair, Gutzwiller, DEFAULT_TRUNC};
use crate::numerics::log_rgamma;

const I: C = C::new(0.0, 1.0);
const WINDOW_TOL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Zero,
    Infinity,
}

/// Floquet solutions F_j(z) = Σ_n Q^±(δ_j - iħn) z^{σ_j+n}, Q⁺ for the zero
/// side and Q⁻ for the infinity side, σ_j = iδ_j/ħ.
///
/// Coefficients are stored as logarithms of the rescaled values c_n with
/// Q^±(δ_j - iħn) z^{σ_j+n} = c_n (e^{Nπi} W)^{σ_j+n}, W = w′ or w.
#[derive(Clone, Debug)]
pub struct FloquetBasis {
    pub inst: OperInstance,
    pub side: Side,
    pub delta: Vec<C>,
    pub sigma: Vec<C>,
    /// ζ_j = Q⁺(δ_j)/Q⁻(δ_j).
    pub zeta: Vec<C>,
    pub n_lo: i64,
    pub n_hi: i64,
    log_coeffs: Vec<Vec<C>>,
}

struct LatticeLogs {
    plus: Vec<C>,
    minus: Vec<C>,
}

// log A⁺_n = log K₊(δ - iħn) + Σ log 1/Γ(1 - n - a_k) for n ≤ 0 and
// log A⁻_n = log K₋(δ - iħn) + Σ log 1/Γ(1 + n + a_k) for n ≥ 0, a_k = i(δ - τ_k)/ħ.
fn lattice_logs(pair: &Gutzwiller, delta: C, n_lo: i64, n_hi: i64) -> Result<LatticeLogs> {
    let p = pair.params();
    let a: Vec<C> = pair.gamma_roots().iter().map(|r| I * (delta - r) / p.hbar).collect();
    let s = &pair.spectral;
    let plus = (0..=(-n_lo))
        .map(|m| {
            let n = -m;
            let k = k_plus(delta - I * p.hbar * n as f64, s, DEFAULT_TRUNC)?;
            Ok(k.ln() + a.iter().map(|ak| log_rgamma(1.0 - n as f64 - ak)).sum::<C>())
        })
        .collect::<Result<Vec<_>>>()?;
    let minus = (0..=n_hi)
        .map(|n| {
            let k = k_minus(delta - I * p.hbar * n as f64, s, DEFAULT_TRUNC)?;
            Ok(k.ln() + a.iter().map(|ak| log_rgamma(1.0 + n as f64 + ak)).sum::<C>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LatticeLogs { plus, minus })
}

impl FloquetBasis {
    /// Basis on the index window n_lo..=n_hi (n_lo ≤ 0 ≤ n_hi).
    pub fn new(pair: &Gutzwiller, side: Side, n_lo: i64, n_hi: i64) -> Result<Self> {
        if n_lo > 0 || n_hi < 0 {
            return Err(TodaError::Domain(format!("window {n_lo}..{n_hi} must contain 0")));
        }
        let inst = OperInstance::new(pair.spectral.clone())?;
        let p = inst.params();
        let nf = p.n as f64;
        let log_r = (p.lambda / p.hbar).ln();
        let delta = pair.wronskian_zeros().to_vec();
        let sigma: Vec<C> = delta.iter().map(|d| I * d / p.hbar).collect();
        let mut log_coeffs = Vec::with_capacity(delta.len());
        let mut zeta = Vec::with_capacity(delta.len());
        for &d in &delta {
            let lat = lattice_logs(pair, d, n_lo, n_hi)?;
            let (lp0, lm0) = (lat.plus[0], lat.minus[0]);
            // ζ = Q⁺(δ)/Q⁻(δ) = r^{-2Nσ} A⁺₀/A⁻₀
            zeta.push((-2.0 * nf * log_r * I * d / p.hbar + lp0 - lm0).exp());
            let row = (n_lo..=n_hi)
                .map(|n| {
                    let gap = 2.0 * nf * n.unsigned_abs() as f64 * log_r;
                    match (side, n >= 0) {
                        (Side::Infinity, true) => lat.minus[n as usize],
                        (Side::Infinity, false) => gap + lat.plus[(-n) as usize] + lm0 - lp0,
                        (Side::Zero, false) => lat.plus[(-n) as usize],
                        (Side::Zero, true) => gap + lat.minus[n as usize] + lp0 - lm0,
                    }
                })
                .collect();
            log_coeffs.push(row);
        }
        Ok(Self {
            inst,
            side,
            delta,
            sigma,
            zeta,
            n_lo,
            n_hi,
            log_coeffs,
        })
    }

    /// Smallest symmetric window (doubling from 8) whose truncation is
    /// certified on the annulus r_min ≤ |z| ≤ r_max.
    pub fn covering(pair: &Gutzwiller, side: Side, r_min: f64, r_max: f64) -> Result<Self> {
        let mut half = 8i64;
        loop {
            let b = Self::new(pair, side, -half, half)?;
            let ok = (0..b.sigma.len()).all(|j| {
                b.certify(j, C::new(r_min.ln(), 0.0)).is_ok() && b.certify(j, C::new(r_max.ln(), 0.0)).is_ok()
            });
            if ok {
                return Ok(b);
            }
            if half >= 1024 {
                return Err(TodaError::Window(format!(
                    "no window up to ±{half} certifies |z| ∈ [{r_min}, {r_max}]"
                )));
            }
            half *= 2;
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// log(e^{Nπi} W) at x = log z.
    pub fn big_x(&self, x: C) -> C {
        let n = self.inst.params().n as f64;
        let lw = match self.side {
            Side::Infinity => self.inst.log_w(x),
            Side::Zero => self.inst.log_w_prime(x),
        };
        n * PI * I + lw
    }

    /// Rescaled coefficient c_n (zero outside the window).
    pub fn coefficient(&self, j: usize, n: i64) -> C {
        if n < self.n_lo || n > self.n_hi {
            return C::new(0.0, 0.0);
        }
        safe_exp(self.log_coeffs[j][(n - self.n_lo) as usize])
    }

    /// Lattice value Q^±(δ_j - iħn) of the side's Baxter solution.
    pub fn lattice_value(&self, j: usize, n: i64) -> C {
        let p = self.inst.params();
        let nf = p.n as f64;
        let lr = match self.side {
            Side::Infinity => (p.lambda / p.hbar).ln(),
            Side::Zero => (p.hbar / p.lambda).ln(),
        };
        let e = self.sigma[j] + n as f64;
        if n < self.n_lo || n > self.n_hi {
            return C::new(0.0, 0.0);
        }
        safe_exp(self.log_coeffs[j][(n - self.n_lo) as usize] + e * (nf * PI * I + nf * lr))
    }

    /// Terms (n, c_n (e^{Nπi}W)^{σ_j+n}) of member j at x = log z.
    pub fn terms(&self, j: usize, x: C) -> Vec<(i64, C)> {
        let bx = self.big_x(x);
        (self.n_lo..=self.n_hi)
            .map(|n| {
                let lc = self.log_coeffs[j][(n - self.n_lo) as usize];
                (n, safe_exp(lc + (self.sigma[j] + n as f64) * bx))
            })
            .collect()
    }

    /// Truncation certificate: both end terms below 1e-16 of the largest term.
    pub fn certify(&self, j: usize, x: C) -> Result<()> {
        let t = self.terms(j, x);
        let max = t.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
        let first = t.first().map(|(_, v)| v.norm()).unwrap_or(0.0);
        let last = t.last().map(|(_, v)| v.norm()).unwrap_or(0.0);
        if !max.is_finite() || first > WINDOW_TOL * max || last > WINDOW_TOL * max {
            return Err(TodaError::Window(format!(
                "member {j} at x = {x}: end terms {first:.2e}, {last:.2e} vs max {max:.2e}"
            )));
        }
        Ok(())
    }

    /// Σ_n g(σ_j + n) · term_n; g = 1 gives F_j, g(s) = (-iħs)^k gives (-iħ∂_x)^k F_j.
    pub fn eval_weighted(&self, j: usize, x: C, g: impl Fn(C) -> C) -> Result<C> {
        self.certify(j, x)?;
        Ok(self
            .terms(j, x)
            .into_iter()
            .map(|(n, v)| g(self.sigma[j] + n as f64) * v)
            .sum())
    }

    /// Relative residual t(-iħ∂_x)F - a_N F at x.
    pub fn oper_residual(&self, j: usize, x: C) -> Result<f64> {
        let h = self.inst.params().hbar;
        let lhs = self.eval_weighted(j, x, |s| self.inst.transfer(-I * h * s))?;
        let rhs = self.inst.potential(x) * floquet_eval(j, x, self)?;
        Ok((lhs - rhs).norm() / (lhs.norm() + rhs.norm()))
    }

    /// Baxter recurrence residual of the lattice values at index n.
    pub fn recurrence_residual(&self, j: usize, n: i64) -> f64 {
        let p = self.inst.params();
        let nn = p.n as i32;
        let ln = p.lambda.powi(nn);
        let t = self.inst.transfer(self.delta[j] - I * p.hbar * n as f64);
        let lhs = t * self.lattice_value(j, n);
        let up = I.powi(nn) * ln * self.lattice_value(j, n - 1);
        let down = I.powi(-nn) * ln * self.lattice_value(j, n + 1);
        (lhs - up - down).norm() / (lhs.norm() + up.norm() + down.norm())
    }
}

fn safe_exp(l: C) -> C {
    if l.re == f64::NEG_INFINITY || l.re.is_nan() {
        C::new(0.0, 0.0)
    } else {
        l.exp()
    }
}

/// F_j at x = log z on the fixed branch z^{σ_j} = e^{σ_j x}.
pub fn floquet_eval(j: usize, x: C, basis: &FloquetBasis) -> Result<C> {
    basis.eval_weighted(j, x, |_| C::new(1.0, 0.0))
}
