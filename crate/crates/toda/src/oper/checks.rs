use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::chi::chi_max_decay;
use super::floquet::{floquet_eval, FloquetBasis, Side};
use super::OperInstance;
use crate::error::{Result, TodaError};
use crate::gutzwiller::{BaxterPair, Gutzwiller};
use crate::nlie::NlieSolution;
use crate::quantize::{build_q, SpectrumRecord};

const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub member: usize,
    pub side: Side,
    /// arg w (infinity side) or arg w′ (zero side) of the ray.
    pub arg: f64,
    /// u = |w| or 1/|w′| along the ray.
    pub u: Vec<f64>,
    /// F_j divided by the leading form (sum of both exponentials for odd N).
    pub ratios: Vec<C>,
    pub deviations: Vec<f64>,
    /// Slope of log deviation against log u.
    pub trend_exponent: f64,
    /// Envelope-normalized rms residual of the single-exponential fit.
    pub one_term_residual: f64,
    /// Same for the two-exponential fit (odd N only).
    pub two_term_residual: Option<f64>,
}

// Leading exponentials e^{Nπiσ}√((2π)^{1-N}/N) e^{N v^{1/N}} v^{-(N-1)/(2N)} at
// v = e^{iφ}u for the rotations needed by the ray.
fn leading_term(n: f64, sigma: C, log_v: C) -> C {
    let pre = (n * PI * I * sigma).exp() * ((2.0 * PI).powf(1.0 - n) / n).sqrt();
    pre * (n * (log_v / n).exp() - (n - 1.0) / (2.0 * n) * log_v).exp()
}

fn least_squares_residual(cols: &[Vec<C>], target: &[C], weight: &[f64]) -> Result<(Vec<C>, f64)> {
    let m = target.len();
    let a = DMatrix::from_fn(m, cols.len(), |r, c| cols[c][r] / weight[r]);
    let b = DVector::from_fn(m, |r, _| target[r] / weight[r]);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-14)
        .map_err(|e| TodaError::non_convergence("asymptotic fit", e.to_string()))?;
    let res = (&a * &coef - &b).norm() / (m as f64).sqrt();
    Ok((coef.iter().copied().collect(), res))
}

/// Compares member j of the basis against its leading large-u form on the ray
/// arg W = `arg`, requiring |arg| < π/N.
pub fn floquet_asymptotics_check(basis: &FloquetBasis, j: usize, arg: f64, u: &[f64]) -> Result<AsymptoticsReport> {
    let p = basis.inst.params();
    let n = p.n as f64;
    if arg.abs() >= PI / n {
        return Err(TodaError::Sector { arg, limit: PI / n });
    }
    if j >= basis.len() {
        return Err(TodaError::IndexOutOfRange {
            index: j,
            limit: basis.len(),
        });
    }
    let sigma = basis.sigma[j];
    let odd = p.n % 2 == 1;
    let mut values = Vec::with_capacity(u.len());
    let mut l1 = Vec::with_capacity(u.len());
    let mut l2 = Vec::with_capacity(u.len());
    for &uk in u {
        // log u along the ray in the variable where the solution grows at large u
        let (x, log_u) = match basis.side {
            Side::Infinity => {
                let lw = C::new(uk.ln(), arg);
                (lw - n * (p.lambda / p.hbar).ln(), lw)
            }
            Side::Zero => {
                let lwp = C::new(-uk.ln(), arg);
                (lwp - n * (p.hbar / p.lambda).ln(), -lwp)
            }
        };
        values.push(floquet_eval(j, x, basis)?);
        if odd {
            // e^{∓πiσ} with (e^{±πi}w)
            let s = if basis.side == Side::Infinity { 1.0 } else { -1.0 };
            l1.push((-PI * I * sigma).exp() * leading_term(n, sigma, log_u + s * PI * I));
            l2.push((PI * I * sigma).exp() * leading_term(n, sigma, log_u - s * PI * I));
        } else {
            l1.push(leading_term(n, sigma, log_u));
            l2.push(C::new(0.0, 0.0));
        }
    }
    let lead: Vec<C> = l1.iter().zip(&l2).map(|(a, b)| a + b).collect();
    let ratios: Vec<C> = values.iter().zip(&lead).map(|(v, l)| v / l).collect();
    let deviations: Vec<f64> = ratios.iter().map(|r| (r - 1.0).norm()).collect();
    let trend_exponent = slope(
        &u.iter().map(|v| v.ln()).collect::<Vec<_>>(),
        &deviations.iter().map(|d| d.max(1e-300).ln()).collect::<Vec<_>>(),
    );
    let env: Vec<f64> = l1.iter().map(|v| v.norm()).collect();
    let corr = |l: &[C]| -> Vec<C> { l.iter().zip(u).map(|(v, uk)| v * uk.powf(-1.0 / n)).collect() };
    let (_, one) = least_squares_residual(&[l1.clone(), corr(&l1)], &values, &env)?;
    let two = if odd {
        Some(least_squares_residual(&[l1.clone(), corr(&l1), l2.clone(), corr(&l2)], &values, &env)?.1)
    } else {
        None
    };
    Ok(AsymptoticsReport {
        member: j,
        side: basis.side,
        arg,
        u: u.to_vec(),
        ratios,
        deviations,
        trend_exponent,
        one_term_residual: one,
        two_term_residual: two,
    })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

fn relative_spread(v: &[C]) -> f64 {
    let mean = v.iter().sum::<C>() / v.len() as f64;
    v.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub z: Vec<f64>,
    /// conj(χ^∞(1/z)) / χ^∞(z).
    pub ratios: Vec<C>,
    pub spread: f64,
    /// |ratio| at the fixed point z = 1.
    pub modulus_at_one: f64,
    /// χ^0(z)/χ^∞(z) at the same samples.
    pub decay_ratios: Vec<C>,
    pub decay_spread: f64,
}

/// Antiholomorphic reflection z → 1/z̄ on positive real samples, together with
/// the simultaneous-decay ratio χ^0/χ^∞.
pub fn antiholomorphic_symmetry_check(pair: &Gutzwiller, z: &[f64]) -> Result<SymmetryReport> {
    let (lo, hi) = z.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v.min(1.0 / v)), b.max(v.max(1.0 / v))));
    if !(lo > 0.0) {
        return Err(TodaError::Domain("samples must be positive".into()));
    }
    let inf = FloquetBasis::covering(pair, Side::Infinity, lo, hi)?;
    let zero = FloquetBasis::covering(pair, Side::Zero, lo, hi)?;
    let mut ratios = Vec::with_capacity(z.len());
    let mut decay = Vec::with_capacity(z.len());
    for &zk in z {
        let x = C::new(zk.ln(), 0.0);
        let here = chi_max_decay(&inf, x)?.value;
        let mirror = chi_max_decay(&inf, -x)?.value;
        ratios.push(mirror.conj() / here);
        decay.push(chi_max_decay(&zero, x)?.value / here);
    }
    let at_one = chi_max_decay(&inf, C::new(0.0, 0.0))?.value;
    Ok(SymmetryReport {
        z: z.to_vec(),
        spread: relative_spread(&ratios),
        ratios,
        modulus_at_one: (at_one.conj() / at_one).norm(),
        decay_spread: relative_spread(&decay),
        decay_ratios: decay,
    })
}

/// -∫ dλ/(2πħ) q(λ) e^{ixλ/ħ} by the trapezoid rule on the nodes λ_k = λ_0 + kh.
pub fn fourier_transform(values: &[C], lambda0: C, step: f64, x: C, hbar: f64) -> C {
    let s: C = values
        .iter()
        .enumerate()
        .map(|(k, q)| q * (I * x * (lambda0 + k as f64 * step) / hbar).exp())
        .sum();
    -s * step / (2.0 * PI * hbar)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierReport {
    pub x: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// χ^0(0) divided by the transform at x = 0.
    pub normalization: C,
    /// Oper residual of the transform of q at the samples.
    pub oper_residual: f64,
    /// Same residual for the transform of q⁺ alone.
    pub discrimination_residual: f64,
}

pub const FOURIER_SAMPLES: [f64; 8] = [-1.0, -0.7, -0.4, -0.1, 0.0, 0.3, 0.6, 1.0];
const FOURIER_STEP: f64 = 0.05;

// Nodes on Im λ = shift covering the decay envelope e^{-Nπ|λ|/(2ħ)} down to 1e-17.
fn nodes(inst: &OperInstance, centre_span: f64, shift: f64) -> (C, usize, f64) {
    let p = inst.params();
    let reach = centre_span + 2.0 * p.hbar * 17.0 * 10f64.ln() / (p.n as f64 * PI);
    let h = FOURIER_STEP * p.hbar;
    let count = (2.0 * reach / h).ceil() as usize + 1;
    (C::new(-reach, shift), count, h)
}

fn oper_residual_of(inst: &OperInstance, values: &[C], lambda0: C, h: f64, x: C) -> f64 {
    let hb = inst.params().hbar;
    let tq: Vec<C> = values
        .iter()
        .enumerate()
        .map(|(k, q)| inst.transfer(lambda0 + k as f64 * h) * q)
        .collect();
    let lhs = fourier_transform(&tq, lambda0, h, x, hb);
    let rhs = inst.potential(x) * fourier_transform(values, lambda0, h, x, hb);
    (lhs - rhs).norm() / (lhs.norm() + rhs.norm())
}

/// Fourier transform of the quantized q against χ^0 at |x| ≤ 1, with the
/// normalization fixed at x = 0.
pub fn fourier_duality_check(rec: &SpectrumRecord, sol: &NlieSolution) -> Result<FourierReport> {
    let (inst, pair) = OperInstance::from_record(rec)?;
    let hb = rec.toda.hbar;
    let span = rec.delta_star.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let (l0, count, h) = nodes(&inst, span, 0.0);
    let q: Vec<C> = (0..count)
        .map(|k| build_q(l0 + k as f64 * h, rec, sol))
        .collect::<Result<_>>()?;
    let e = 1f64.exp();
    let zero = FloquetBasis::covering(&pair, Side::Zero, 1.0 / e, e)?;
    let chi0 = chi_max_decay(&zero, C::new(0.0, 0.0))?.value;
    let normalization = chi0 / fourier_transform(&q, l0, h, C::new(0.0, 0.0), hb);
    let mut deviations = Vec::with_capacity(FOURIER_SAMPLES.len());
    let mut oper_residual = 0.0f64;
    for &x in &FOURIER_SAMPLES {
        let xc = C::new(x, 0.0);
        let chi = chi_max_decay(&zero, xc)?.value;
        let ft = normalization * fourier_transform(&q, l0, h, xc, hb);
        deviations.push((ft - chi).norm() / chi.norm());
        oper_residual = oper_residual.max(oper_residual_of(&inst, &q, l0, h, xc));
    }
    // q⁺ alone has poles at δ_j; integrate below them on Im λ = -ħ/2.
    let (m0, mcount, mh) = nodes(&inst, span, -hb / 2.0);
    let den = |l: C| -> C {
        pair.zeros
            .delta
            .iter()
            .map(|d| (-PI * l / hb).exp() * (PI * (l - d) / hb).sinh())
            .product()
    };
    let qp: Vec<C> = (0..mcount)
        .map(|k| {
            let l = m0 + k as f64 * mh;
            Ok(pair.q_plus(l)? / den(l))
        })
        .collect::<Result<_>>()?;
    let discrimination_residual = FOURIER_SAMPLES
        .iter()
        .map(|&x| oper_residual_of(&inst, &qp, m0, mh, C::new(x, 0.0)))
        .fold(f64::INFINITY, f64::min);
    Ok(FourierReport {
        x: FOURIER_SAMPLES.to_vec(),
        max_deviation: deviations.iter().cloned().fold(0.0, f64::max),
        deviations,
        normalization,
        oper_residual,
        discrimination_residual,
    })
}
