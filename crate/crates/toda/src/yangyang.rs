//! Yang-Yang potential Y(δ, Λ) = Y^pert + Y^inst, its derivative identities
//! and the oper generating function S(σ, Λ) = Y(-iħσ, Λ).

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nlie::{log_theta_at, log_zeta, solve_nlie, solve_nlie_from, u_energy, NlieParams, NlieSolution};
use crate::numerics::{dilog, varpi};
use crate::TodaParams;

const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YangYangValue {
    pub y_pert: C,
    pub y_inst: C,
    pub total: C,
    pub params: NlieParams,
}

/// N(i/ħ) log(ħ/Λ) Σ δ_j² + Σ_{j,k} ϖ(δ_k - δ_j).
pub fn y_pert(p: &NlieParams) -> Result<C> {
    let t = &p.toda;
    let n = t.n as f64;
    let mut acc = n * I / t.hbar * (t.hbar / t.lambda).ln() * p.delta.iter().map(|d| d * d).sum::<C>();
    for dk in &p.delta {
        for dj in &p.delta {
            acc += varpi(dk - dj, t.hbar)?;
        }
    }
    Ok(acc)
}

/// -∫ dμ/(2πi) [½ log(XΘ) log(1+X) + Li₂(-X)].
pub fn y_inst(sol: &NlieSolution) -> C {
    let p = &sol.params;
    let mut acc = C::new(0.0, 0.0);
    for i in 0..sol.nodes.len() {
        let mu = sol.nodes.mu[i];
        let log_xt = sol.log_x[i] + log_theta_at(mu, p);
        let x = sol.log_x[i].exp();
        acc += (0.5 * log_xt * sol.l[i] + dilog(-x)) * sol.nodes.w[i];
    }
    -acc / (2.0 * PI * I)
}

pub fn yang_yang(sol: &NlieSolution) -> Result<YangYangValue> {
    let y_pert = y_pert(&sol.params)?;
    let y_inst = y_inst(sol);
    Ok(YangYangValue {
        y_pert,
        y_inst,
        total: y_pert + y_inst,
        params: sol.params.clone(),
    })
}

/// Y at the given parameters, solving the NLIE on the grid of `p`.
pub fn evaluate(p: &NlieParams, warm: Option<&NlieSolution>) -> Result<(YangYangValue, NlieSolution)> {
    let sol = solve_nlie_from(p, warm)?;
    Ok((yang_yang(&sol)?, sol))
}

/// Finite-difference versus analytic derivatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub finite_difference: Vec<C>,
    pub analytic: Vec<C>,
    pub max_deviation: f64,
}

impl DerivativeReport {
    fn new(finite_difference: Vec<C>, analytic: Vec<C>) -> Self {
        let max_deviation = finite_difference
            .iter()
            .zip(&analytic)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        Self {
            finite_difference,
            analytic,
            max_deviation,
        }
    }
}

/// Central differences of Y in each δ_k (Σδ left free) against log ζ_k.
pub fn grad_delta_check(p: &NlieParams, eps: f64) -> Result<DerivativeReport> {
    let base = solve_nlie(p)?;
    let analytic = log_zeta(&base)?;
    let mut fd = Vec::with_capacity(p.delta.len());
    for k in 0..p.delta.len() {
        let shifted = |s: f64| -> Result<C> {
            let mut q = p.clone();
            q.delta[k] += s;
            Ok(evaluate(&q, Some(&base))?.0.total)
        };
        fd.push((shifted(eps)? - shifted(-eps)?) / (2.0 * eps));
    }
    Ok(DerivativeReport::new(fd, analytic))
}

/// Central difference of iħ Y in log Λ^{2N} against u_energy.
pub fn lambda_derivative_check(p: &NlieParams, eps: f64) -> Result<DerivativeReport> {
    let base = solve_nlie(p)?;
    let two_n = 2.0 * p.toda.n as f64;
    let at = |s: f64| -> Result<C> {
        let mut q = p.clone();
        // log Λ^{2N} shifted by s
        q.toda.lambda *= (s / two_n).exp();
        Ok(evaluate(&q, Some(&base))?.0.total)
    };
    let fd = I * p.toda.hbar * (at(eps)? - at(-eps)?) / (2.0 * eps);
    Ok(DerivativeReport::new(vec![fd], vec![u_energy(&base)]))
}

/// S(σ, Λ) = Y(-iħσ, Λ) together with η_j = log ζ_j / 2πi.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratingFunction {
    pub s: C,
    pub eta: Vec<C>,
    pub delta: Vec<C>,
}

pub fn delta_from_sigma(hbar: f64, sigma: &[C]) -> Vec<C> {
    sigma.iter().map(|s| -I * hbar * s).collect()
}

pub fn sigma_from_delta(hbar: f64, delta: &[C]) -> Vec<C> {
    delta.iter().map(|d| I * d / hbar).collect()
}

pub fn generating_function_s(sigma: &[C], toda: TodaParams) -> Result<GeneratingFunction> {
    let delta = delta_from_sigma(toda.hbar, sigma);
    let p = NlieParams::new(toda, delta.clone());
    let sol = solve_nlie(&p)?;
    let y = yang_yang(&sol)?;
    let eta = log_zeta(&sol)?.into_iter().map(|z| z / (2.0 * PI * I)).collect();
    Ok(GeneratingFunction { s: y.total, eta, delta })
}

/// Central differences of S in σ_j against 2πħ η_j, on a frozen grid.
pub fn sigma_gradient_check(sigma: &[C], toda: TodaParams, eps: f64) -> Result<DerivativeReport> {
    let delta = delta_from_sigma(toda.hbar, sigma);
    let p = NlieParams::new(toda, delta);
    let base = solve_nlie(&p)?;
    let analytic: Vec<C> = log_zeta(&base)?
        .into_iter()
        .map(|z| 2.0 * PI * toda.hbar * z / (2.0 * PI * I))
        .collect();
    let mut fd = Vec::with_capacity(sigma.len());
    for j in 0..sigma.len() {
        let at = |s: f64| -> Result<C> {
            let mut q = p.clone();
            q.delta[j] += -I * toda.hbar * s;
            Ok(evaluate(&q, Some(&base))?.0.total)
        };
        fd.push((at(eps)? - at(-eps)?) / (2.0 * eps));
    }
    Ok(DerivativeReport::new(fd, analytic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_gamma;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn params(lambda: f64, delta: &[C]) -> NlieParams {
        NlieParams::new(TodaParams::new(delta.len(), 1.0, lambda), delta.to_vec())
    }

    #[test]
    fn pert_vanishes_at_origin_and_is_symmetric() {
        assert_eq!(y_pert(&params(0.3, &[c(0.0, 0.0); 3])).unwrap(), c(0.0, 0.0));
        let a = y_pert(&params(0.3, &[c(0.9, 0.0), c(-0.2, 0.1), c(-0.7, -0.1)])).unwrap();
        let b = y_pert(&params(0.3, &[c(-0.7, -0.1), c(0.9, 0.0), c(-0.2, 0.1)])).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn pert_gradient_is_explicit_part_of_log_zeta() {
        let p = params(0.3, &[c(0.45, 0.0), c(-0.3, 0.0)]);
        let e = 1e-4;
        for k in 0..2 {
            let mut a = p.clone();
            a.delta[k] += e;
            let mut b = p.clone();
            b.delta[k] -= e;
            let fd = (y_pert(&a).unwrap() - y_pert(&b).unwrap()) / (2.0 * e);
            let j = 1 - k;
            let x = I * (p.delta[k] - p.delta[j]);
            let expect = 4.0 * I * p.delta[k] * (1.0 / 0.3f64).ln() + log_gamma(1.0 + x).unwrap()
                - log_gamma(1.0 - x).unwrap();
            assert!((fd - expect).norm() < 1e-7, "{fd} {expect}");
        }
    }

    #[test]
    fn instanton_part_vanishes_and_scales() {
        let sol = solve_nlie(&params(1e-4, &[c(0.3, 0.0), c(-0.3, 0.0)])).unwrap();
        assert!(y_inst(&sol).norm() < 1e-10);
        let v: Vec<f64> = [0.05f64, 0.1]
            .iter()
            .map(|&l| y_inst(&solve_nlie(&params(l, &[c(0.3, 0.0), c(-0.3, 0.0)])).unwrap()).norm())
            .collect();
        let slope = (v[1] / v[0]).ln() / 2f64.ln();
        assert!((slope - 4.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn instanton_part_grid_stable() {
        let p = params(0.3, &[c(0.3, 0.0), c(-0.3, 0.0)]);
        let a = y_inst(&solve_nlie(&p).unwrap());
        let mut q = p.clone();
        q.grid.h /= 2.0;
        q.grid.m *= 2.0;
        let b = y_inst(&solve_nlie(&q).unwrap());
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn gradient_identity() {
        let r = grad_delta_check(&params(0.3, &[c(0.3, 0.0), c(-0.3, 0.0)]), 1e-4).unwrap();
        assert!(r.max_deviation < 1e-6, "{}", r.max_deviation);
        let r = grad_delta_check(&params(1e-4, &[c(0.3, 0.0), c(-0.3, 0.0)]), 1e-4).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn gradient_fd_order() {
        let p = params(0.3, &[c(0.3, 0.0), c(-0.3, 0.0)]);
        let a = grad_delta_check(&p, 4e-2).unwrap().max_deviation;
        let b = grad_delta_check(&p, 2e-2).unwrap().max_deviation;
        assert!((a / b - 4.0).abs() < 0.8, "{}", a / b);
    }

    #[test]
    fn lambda_identity() {
        let r = lambda_derivative_check(&params(0.3, &[c(0.3, 0.0), c(-0.3, 0.0)]), 1e-4).unwrap();
        assert!(r.max_deviation < 1e-6, "{}", r.max_deviation);
        let r = lambda_derivative_check(&params(1e-4, &[c(0.3, 0.0), c(-0.3, 0.0)]), 1e-4).unwrap();
        assert!((r.finite_difference[0] - 0.09).norm() < 1e-8);
        let p = params(0.3, &[c(0.3, 0.0), c(-0.3, 0.0)]);
        let a = lambda_derivative_check(&p, 0.4).unwrap().max_deviation;
        let b = lambda_derivative_check(&p, 0.2).unwrap().max_deviation;
        assert!((a / b - 4.0).abs() < 0.8, "{}", a / b);
    }

    #[test]
    fn rank_three_identities() {
        let p = params(0.3, &[c(0.8, 0.0), c(-0.1, 0.05), c(-0.6, -0.05)]);
        assert!(grad_delta_check(&p, 1e-4).unwrap().max_deviation < 1e-6);
        assert!(lambda_derivative_check(&p, 1e-4).unwrap().max_deviation < 1e-6);
    }

    #[test]
    fn sigma_chain_rule() {
        let t = TodaParams::new(2, 1.0, 0.3);
        let sigma = sigma_from_delta(1.0, &[c(0.4, 0.0), c(-0.4, 0.0)]);
        let r = sigma_gradient_check(&sigma, t, 1e-4).unwrap();
        assert!(r.max_deviation < 1e-6, "{}", r.max_deviation);
    }

    #[test]
    fn eta_leading_term_at_small_coupling() {
        // η_1 ≈ (2Ni/ħ)δ_1 log(ħ/Λ)/(2πi): slope in log Λ is -2Nδ_1/(2π)
        let sigma = sigma_from_delta(1.0, &[c(0.4, 0.0), c(-0.4, 0.0)]);
        let e: Vec<C> = [1e-3f64, 1e-4]
            .iter()
            .map(|&l| generating_function_s(&sigma, TodaParams::new(2, 1.0, l)).unwrap().eta[0])
            .collect();
        let slope = (e[1] - e[0]) / (1e-4f64 / 1e-3).ln();
        assert!((slope - c(-4.0 * 0.4 / (2.0 * PI), 0.0)).norm() < 1e-9);
    }
}
