use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::floquet::{FloquetBasis, Side};
use super::residue_weights;
use super::special::{choose_line, vertical_line, CANCELLATION_LIMIT};
use crate::error::{Result, TodaError};
use crate::gutzwiller::{k_minus, k_plus, DEFAULT_TRUNC};
use crate::numerics::log_gamma;

const I: C = C::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiMethod {
    /// Residue sum unless it cancels by more than four digits, then the line integral.
    Auto,
    Residue,
    MellinBarnes,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChiValue {
    pub value: C,
    pub method: ChiMethod,
    /// Σ|terms| / |sum| of the residue sum (1 for the line integral).
    pub cancellation: f64,
}

/// Maximally decaying solution on the basis side at x = log z.
pub fn chi_max_decay(basis: &FloquetBasis, x: C) -> Result<ChiValue> {
    chi_max_decay_with(basis, x, ChiMethod::Auto)
}

pub fn chi_max_decay_with(basis: &FloquetBasis, x: C, method: ChiMethod) -> Result<ChiValue> {
    match method {
        ChiMethod::Residue => residue_sum(basis, x),
        ChiMethod::MellinBarnes => line_integral(basis, x),
        ChiMethod::Auto => {
            let n = basis.inst.params().n as f64;
            let arg = match basis.side {
                Side::Infinity => basis.inst.log_w(x).im,
                Side::Zero => basis.inst.log_w_prime(x).im,
            };
            let line_ok = arg.abs() < n * PI / 2.0 - 0.05;
            match residue_sum(basis, x) {
                Ok(v) if v.cancellation <= CANCELLATION_LIMIT || !line_ok => Ok(v),
                Ok(_) | Err(TodaError::Window(_)) if line_ok => line_integral(basis, x),
                other => other,
            }
        }
    }
}

/// χ_k(x) = χ(x + 2πi(⌈N/2⌉ - k)), the rotations spanning the canonical basis.
pub fn chi_k(basis: &FloquetBasis, k: i64, x: C) -> Result<ChiValue> {
    let n = basis.inst.params().n as i64;
    let shift = (n + 1) / 2 - k;
    chi_max_decay(basis, x + 2.0 * PI * I * shift as f64)
}

fn prefactor(n: usize) -> C {
    -I.powi(n as i32) / PI
}

// χ = -(i^N/π) Σ_l F_l / (e^{Nπiσ_l} ∏_{j≠l} sin π(σ_l - σ_j))
fn residue_sum(basis: &FloquetBasis, x: C) -> Result<ChiValue> {
    let wts = residue_weights(&basis.sigma)?;
    let pre = prefactor(basis.len());
    let mut sum = C::new(0.0, 0.0);
    let mut abs = 0.0;
    for (j, wt) in wts.iter().enumerate() {
        basis.certify(j, x)?;
        for (_, t) in basis.terms(j, x) {
            sum += pre * wt * t;
            abs += (pre * wt * t).norm();
        }
    }
    Ok(ChiValue {
        value: sum,
        method: ChiMethod::Residue,
        cancellation: if sum.norm() > 0.0 { abs / sum.norm() } else { f64::INFINITY },
    })
}

// Line integral of q^∓(-iħs) z^s at Re s = c with the residues on the far side:
//   infinity: (πi)^{-N} ∏Γ(σ_j - s) w^s K₋(-iħs) ∏Γ(1+s-σ_k)/Γ(1+s-b_k),
//             χ = ∫ - Σ_{Re < c} Res;
//   zero:     (i/π)^N ∏Γ(s - σ_j) w′^s K₊(-iħs) ∏Γ(1-s+σ_k)/Γ(1-s+b_k),
//             χ = -∫ - Σ_{Re > c} Res;
// with b_k = iτ_k/ħ.
fn line_integral(basis: &FloquetBasis, x: C) -> Result<ChiValue> {
    let inst = &basis.inst;
    let p = inst.params();
    let n = p.n as f64;
    let spectral = &inst.spectral;
    let sigma = &basis.sigma;
    let b: Vec<C> = spectral.tau.iter().map(|t| I * t / p.hbar).collect();
    let (lw, dir) = match basis.side {
        Side::Infinity => (inst.log_w(x), 1.0),
        Side::Zero => (inst.log_w_prime(x), -1.0),
    };
    if lw.im.abs() >= n * PI / 2.0 {
        return Err(TodaError::Sector {
            arg: lw.im,
            limit: n * PI / 2.0,
        });
    }
    let mut pole_re: Vec<f64> = sigma.iter().map(|s| s.re).collect();
    pole_re.extend(b.iter().map(|x| x.re));
    let reach = (lw.re.abs() / n).exp() + 10.0;
    // Γ(dir·(σ - s)) has its poles on the side dir of the line
    let (lo, hi) = if dir > 0.0 {
        let edge = sigma.iter().map(|s| s.re).fold(f64::INFINITY, f64::min) - 0.5;
        (edge - reach, edge)
    } else {
        let edge = sigma.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max) + 0.5;
        (edge, edge + reach)
    };
    let phi = |c: f64| {
        sigma
            .iter()
            .map(|sj| log_gamma(dir * (sj - c)).map(|v| v.re).unwrap_or(f64::INFINITY))
            .sum::<f64>()
            + c * lw.re
    };
    let c = choose_line(phi, lo, hi, &pole_re);
    let log_pre = match basis.side {
        Side::Infinity => -n * (PI * I).ln(),
        Side::Zero => n * (I / PI).ln(),
    };
    let integral = vertical_line(c, |s| {
        let lam = -I * p.hbar * s;
        let k = match basis.side {
            Side::Infinity => k_minus(lam, spectral, DEFAULT_TRUNC)?,
            Side::Zero => k_plus(lam, spectral, DEFAULT_TRUNC)?,
        };
        let mut acc = log_pre + s * lw + k.ln();
        for (sj, bj) in sigma.iter().zip(&b) {
            acc += log_gamma(dir * (sj - s))? + log_gamma(1.0 + dir * (s - sj))? - log_gamma(1.0 + dir * (s - bj))?;
        }
        Ok(acc)
    })?;
    let wts = residue_weights(sigma)?;
    let pre = prefactor(basis.len());
    let mut far = C::new(0.0, 0.0);
    for (j, wt) in wts.iter().enumerate() {
        for (m, t) in basis.terms(j, x) {
            let e = sigma[j].re + m as f64;
            if dir * (c - e) > 0.0 {
                far += pre * wt * t;
            }
        }
    }
    // far = -Σ_far Res
    Ok(ChiValue {
        value: dir * integral + far,
        method: ChiMethod::MellinBarnes,
        cancellation: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gutzwiller::{Gutzwiller, SpectralData};
    use crate::oper::meijer_maximal;
    use crate::TodaParams;

    fn pair(n: usize, hbar: f64, lambda: f64, tau: &[f64]) -> Gutzwiller {
        let p = TodaParams::new(n, hbar, lambda);
        let s = SpectralData::from_tau(p, tau.iter().map(|t| C::new(*t, 0.0)).collect()).unwrap();
        Gutzwiller::new(s).unwrap()
    }

    fn leading(n: f64, w: f64) -> f64 {
        ((2.0 * PI).powf(n - 1.0) / n).sqrt() * (-n * w.powf(1.0 / n)).exp() * w.powf(-(n - 1.0) / (2.0 * n))
    }

    #[test]
    fn oper_residual_of_chi() {
        let g = pair(3, 1.0, 0.3, &[-1.0, 0.3, 0.7]);
        for side in [Side::Zero, Side::Infinity] {
            let b = FloquetBasis::new(&g, side, -40, 40).unwrap();
            let h = 1.0;
            let wts = residue_weights(&b.sigma).unwrap();
            for x in [C::new(0.3, 0.2), C::new(-0.5, 1.1)] {
                let chi = chi_max_decay_with(&b, x, ChiMethod::Residue).unwrap().value;
                let lhs: C = (0..3)
                    .map(|j| wts[j] * b.eval_weighted(j, x, |s| b.inst.transfer(-I * h * s)).unwrap())
                    .sum::<C>()
                    * prefactor(3);
                let rhs = b.inst.potential(x) * chi;
                assert!((lhs - rhs).norm() < 1e-7 * (lhs.norm() + rhs.norm()));
            }
        }
    }

    #[test]
    fn line_matches_residues() {
        let g = pair(2, 1.0, 0.3, &[-0.7, 0.7]);
        for (side, x) in [
            (Side::Infinity, C::new(4.0, 0.3)),
            (Side::Infinity, C::new(5.5, -1.0)),
            (Side::Zero, C::new(-4.0, 0.2)),
        ] {
            let b = FloquetBasis::new(&g, side, -60, 60).unwrap();
            let r = chi_max_decay_with(&b, x, ChiMethod::Residue).unwrap();
            let m = chi_max_decay_with(&b, x, ChiMethod::MellinBarnes).unwrap();
            // the residue sum loses digits in proportion to its cancellation
            let tol = 1e-10 + 1e-14 * r.cancellation;
            assert!((r.value - m.value).norm() < tol * r.value.norm(), "{side:?} {x}: {} vs {}", r.value, m.value);
        }
    }

    #[test]
    fn infinity_asymptotics_rank_two() {
        let g = pair(2, 1.0, 0.3, &[-0.7, 0.7]);
        let b = FloquetBasis::new(&g, Side::Infinity, -64, 64).unwrap();
        let log_r = 2.0 * 0.3f64.ln();
        let mut prev = f64::INFINITY;
        for w in [20.0f64, 50.0, 100.0, 200.0] {
            let x = C::new(w.ln() - log_r, 0.0);
            let chi = chi_max_decay(&b, x).unwrap();
            let ratio = chi.value * (PI * I).powi(2) / leading(2.0, w);
            let dev = (ratio - 1.0).norm();
            assert!(dev < prev && dev * w.sqrt() < 2.0, "w={w}: {dev}");
            prev = dev;
        }
    }

    #[test]
    fn zero_asymptotics_rank_two() {
        let g = pair(2, 1.0, 0.3, &[-0.7, 0.7]);
        let b = FloquetBasis::new(&g, Side::Zero, -64, 64).unwrap();
        let log_r = 2.0 * (1.0f64 / 0.3).ln();
        let mut prev = f64::INFINITY;
        for wp in [1.0 / 20.0, 1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0f64] {
            let x = C::new(wp.ln() - log_r, 0.0);
            let chi = chi_max_decay(&b, x).unwrap();
            // (-1)^{N+1}/(πi)^N √(2π/2) e^{-2/√w′} w′^{1/4}
            let lead = -leading(2.0, 1.0 / wp);
            let ratio = chi.value * (PI * I).powi(2) / lead;
            let dev = (ratio - 1.0).norm();
            assert!(dev < prev && dev / wp.sqrt() < 2.0, "w′={wp}: {dev}");
            prev = dev;
        }
    }

    #[test]
    fn decoupling_to_meijer() {
        let lambda = 1e-5;
        let g = pair(2, 1.0, lambda, &[-0.35, 0.35]);
        let b = FloquetBasis::new(&g, Side::Infinity, -30, 60).unwrap();
        for w in [0.5f64, 3.0, 12.0] {
            let x = C::new(w.ln() - 2.0 * lambda.ln(), 0.0);
            let chi = chi_max_decay(&b, x).unwrap().value;
            let gm = meijer_maximal(&b.sigma, C::new(w, 0.0)).unwrap() / (PI * I).powi(2);
            assert!((chi - gm).norm() < 1e-6 * gm.norm(), "w={w}: {chi} vs {gm}");
        }
    }

    #[test]
    fn rotations_are_shifts() {
        let g = pair(3, 1.0, 0.3, &[-1.0, 0.3, 0.7]);
        let b = FloquetBasis::new(&g, Side::Infinity, -40, 40).unwrap();
        let x = C::new(0.4, 0.1);
        let c2 = chi_k(&b, 2, x).unwrap().value;
        let c0 = chi_max_decay(&b, x).unwrap().value;
        assert!((c2 - c0).norm() < 1e-12 * c0.norm());
        let c1 = chi_k(&b, 1, x).unwrap().value;
        let direct = chi_max_decay(&b, x + 2.0 * PI * I).unwrap().value;
        assert!((c1 - direct).norm() < 1e-12 * direct.norm());
    }
}
