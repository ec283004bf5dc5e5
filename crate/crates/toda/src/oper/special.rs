use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::chi::ChiMethod;
use crate::error::{Result, TodaError};
use crate::numerics::{log_gamma, log_rgamma};

const SERIES_TOL: f64 = 1e-16;
/// Residue sums losing more than four digits to cancellation switch to the line integral.
pub(crate) const CANCELLATION_LIMIT: f64 = 1e4;

fn is_nonpositive_integer(z: C) -> bool {
    z.im.abs() < 1e-14 && z.re <= 0.5 && (z.re - z.re.round()).abs() < 1e-14
}

/// Terms w^n / (n! ∏_k Γ(β_k + n)) of the regularized ₀F̃_q series until
/// they fall below 1e-16 of the running sum.
pub(crate) fn hyper_terms(beta: &[C], w: C) -> Result<Vec<C>> {
    if w.norm() > 1e8 {
        return Err(TodaError::Overflow(format!("|w| = {:.3e} is beyond series range", w.norm())));
    }
    let log_w = if w.norm() == 0.0 { C::new(f64::NEG_INFINITY, 0.0) } else { w.ln() };
    let mut terms = Vec::new();
    let mut sum = C::new(0.0, 0.0);
    let mut max = 0.0f64;
    let mut small_run = 0;
    for n in 0..100_000usize {
        let nf = n as f64;
        let term = if beta.iter().any(|b| is_nonpositive_integer(b + nf)) {
            C::new(0.0, 0.0)
        } else {
            let mut l = beta.iter().map(|b| log_rgamma(b + nf)).sum::<C>() - log_gamma(C::new(nf + 1.0, 0.0))?;
            if n > 0 {
                l += nf * log_w;
            }
            if l.re > 700.0 {
                return Err(TodaError::Overflow(format!("series term {n} exceeds e^700 at w = {w}")));
            }
            l.exp()
        };
        terms.push(term);
        sum += term;
        max = max.max(term.norm());
        let past_peak = nf > w.norm().powf(1.0 / (beta.len() as f64 + 1.0)) + 2.0;
        if past_peak && term.norm() <= SERIES_TOL * sum.norm().max(1e-300) && term.norm() <= SERIES_TOL * max {
            small_run += 1;
            if small_run >= 2 {
                return Ok(terms);
            }
        } else {
            small_run = 0;
        }
        if w.norm() == 0.0 && n >= beta.len() + 1 {
            return Ok(terms);
        }
    }
    Err(TodaError::non_convergence("hypergeometric_0fn", format!("series at w = {w}")))
}

/// Regularized ₀F̃_q(; β_1..β_q; w) = Σ_n w^n / (n! ∏ Γ(β_k + n)).
pub fn hypergeometric_0fn(beta: &[C], w: C) -> Result<C> {
    Ok(hyper_terms(beta, w)?.iter().sum())
}

/// Residue-sum form of G^{N,0}_{0,N}(b | w) with the sum of term moduli.
pub fn meijer_residue_sum(b: &[C], w: C) -> Result<(C, f64)> {
    let n = b.len();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let lw = w.ln();
    let mut total = C::new(0.0, 0.0);
    let mut abs = 0.0;
    for j in 0..n {
        let mut weight = (b[j] * lw).exp();
        let mut beta = Vec::with_capacity(n - 1);
        for k in 0..n {
            if k == j {
                continue;
            }
            let s = (PI * (b[k] - b[j])).sin();
            if s.norm() < 1e-8 {
                return Err(TodaError::Collision(format!("b_{} - b_{} is an integer", k + 1, j + 1)));
            }
            weight *= PI / s;
            beta.push(1.0 + b[j] - b[k]);
        }
        let terms = hyper_terms(&beta, w * sign)?;
        total += weight * terms.iter().sum::<C>();
        abs += weight.norm() * terms.iter().map(|t| t.norm()).sum::<f64>();
    }
    Ok((total, abs))
}

/// Real line position minimizing `phi` on [lo, hi], kept 0.25 away from every
/// pole column Re(p) + ℤ.
pub(crate) fn choose_line(phi: impl Fn(f64) -> f64, lo: f64, hi: f64, pole_re: &[f64]) -> f64 {
    let clear = |c: f64| pole_re.iter().all(|p| {
        let f = (c - p).rem_euclid(1.0);
        f >= 0.25 && f <= 0.75
    });
    let steps = ((hi - lo) / 0.05).ceil().max(1.0) as usize;
    let mut best = (hi, f64::INFINITY);
    for k in 0..=steps {
        let c = hi - k as f64 * (hi - lo) / steps as f64;
        if !clear(c) {
            continue;
        }
        let v = phi(c);
        if v < best.1 {
            best = (c, v);
        }
    }
    best.0
}

const LINE_STEP: f64 = 0.04;
const LINE_MAX_Y: f64 = 400.0;

/// ∫_{c-i∞}^{c+i∞} ds/(2πi) e^{log_g(s)} by the trapezoid rule in Im s.
pub(crate) fn vertical_line(c: f64, log_g: impl Fn(C) -> Result<C>) -> Result<C> {
    let g = |y: f64| -> Result<C> { Ok(log_g(C::new(c, y))?.exp()) };
    let g0 = g(0.0)?;
    let mut fine = g0;
    let mut coarse = g0;
    let mut max = g0.norm();
    let mut ends = [0.0f64; 2];
    for (side, dir) in [1.0f64, -1.0].into_iter().enumerate() {
        let mut prev = g0.norm();
        let mut k = 1usize;
        loop {
            let y = dir * k as f64 * LINE_STEP;
            let v = g(y)?;
            fine += v;
            if k % 2 == 0 {
                coarse += v;
            }
            let m = v.norm();
            max = max.max(m);
            if m < 1e-18 * max && m <= prev {
                ends[side] = m;
                break;
            }
            if y.abs() > LINE_MAX_Y {
                return Err(TodaError::InsufficientDecay {
                    estimate: m / max,
                    tol: 1e-18,
                });
            }
            prev = m;
            k += 1;
        }
    }
    if ends.iter().any(|e| *e > 1e-16 * max) {
        return Err(TodaError::InsufficientDecay {
            estimate: ends[0].max(ends[1]) / max,
            tol: 1e-16,
        });
    }
    let fine = fine * LINE_STEP / (2.0 * PI);
    let coarse = coarse * 2.0 * LINE_STEP / (2.0 * PI);
    if (fine - coarse).norm() > 1e-6 * max * LINE_STEP {
        return Err(TodaError::non_convergence(
            "vertical_line",
            format!("step halving changed the integral by {:.2e}", (fine - coarse).norm()),
        ));
    }
    Ok(fine)
}

/// G^{N,0}_{0,N}(b | w) as the Mellin-Barnes integral of ∏Γ(b_j - s) w^s on a
/// vertical line left of all poles, placed near the saddle.
pub fn meijer_mellin_barnes(b: &[C], w: C) -> Result<C> {
    let n = b.len() as f64;
    let lw = w.ln();
    if lw.im.abs() >= n * PI / 2.0 {
        return Err(TodaError::Sector {
            arg: lw.im,
            limit: n * PI / 2.0,
        });
    }
    let re: Vec<f64> = b.iter().map(|x| x.re).collect();
    let top = re.iter().cloned().fold(f64::INFINITY, f64::min) - 0.25;
    let bottom = top - w.norm().powf(1.0 / n) - 10.0;
    let phi = |c: f64| {
        b.iter().map(|bj| log_gamma(bj - c).map(|v| v.re).unwrap_or(f64::INFINITY)).sum::<f64>() + c * lw.re
    };
    let c = choose_line(phi, bottom, top, &re);
    vertical_line(c, |s| {
        let mut acc = s * lw;
        for bj in b {
            acc += log_gamma(bj - s)?;
        }
        Ok(acc)
    })
}

/// G^{N,0}_{0,N}(b | w), the maximally decaying solution of the regular-singular oper.
pub fn meijer_maximal(b: &[C], w: C) -> Result<C> {
    meijer_maximal_with(b, w, ChiMethod::Auto)
}

pub fn meijer_maximal_with(b: &[C], w: C, method: ChiMethod) -> Result<C> {
    match method {
        ChiMethod::Residue => Ok(meijer_residue_sum(b, w)?.0),
        ChiMethod::MellinBarnes => meijer_mellin_barnes(b, w),
        ChiMethod::Auto => {
            let sector_ok = w.arg().abs() < b.len() as f64 * PI / 2.0 - 0.05;
            match meijer_residue_sum(b, w) {
                Ok((v, abs)) if abs <= CANCELLATION_LIMIT * v.norm() || !sector_ok => Ok(v),
                Err(TodaError::Overflow(_)) | Ok(_) if sector_ok => meijer_mellin_barnes(b, w),
                other => other.map(|(v, _)| v),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn bessel_from_0f1() {
        let (nu, x) = (0.3f64, 1.7f64);
        // I_ν(x) = Σ (x/2)^{2k+ν} / (k! Γ(k+ν+1)), Γ(1.3) = 0.897470696306277...
        let mut term = (x / 2.0).powf(nu) / 0.897_470_696_306_277_2;
        let mut bessel = 0.0;
        for k in 0..60 {
            bessel += term;
            let kf = k as f64;
            term *= (x / 2.0).powi(2) / ((kf + 1.0) * (kf + 1.0 + nu));
        }
        let f = hypergeometric_0fn(&[c(1.0 + nu)], c(x * x / 4.0)).unwrap() * (x / 2.0).powf(nu);
        assert!((f.re - bessel).abs() < 1e-12 * bessel && f.im.abs() < 1e-15);
    }

    #[test]
    fn series_head_at_zero() {
        let beta = [C::new(0.7, 0.2), C::new(1.9, -0.4)];
        let v = hypergeometric_0fn(&beta, C::new(0.0, 0.0)).unwrap();
        let expected = 1.0 / (crate::numerics::gamma(beta[0]).unwrap() * crate::numerics::gamma(beta[1]).unwrap());
        assert!((v - expected).norm() < 1e-14);
        // a non-positive integer parameter is handled by the regularization
        let v = hypergeometric_0fn(&[c(-1.0)], c(0.5)).unwrap();
        // Σ_{n≥2} w^n/(n!(n-2)!) = w² ₀F̃₁(;3;w)
        let alt = hypergeometric_0fn(&[c(3.0)], c(0.5)).unwrap() * 0.25;
        assert!((v - alt).norm() < 1e-15);
    }

    #[test]
    fn regular_oper_residual() {
        // t(-iħ w∂_w) χ = (iħ)^N w χ for χ = w^{b_j} ₀F̃({1+b_j-b_k} | (-1)^N w)
        let hbar = 0.9;
        let tau = [c(-0.8), c(0.1), c(0.7)];
        let b: Vec<C> = tau.iter().map(|t| C::new(0.0, 1.0) * t / hbar).collect();
        let w = C::new(2.3, 0.7);
        let t = |l: C| tau.iter().fold(c(1.0), |acc, r| acc * (l - r));
        let i = C::new(0.0, 1.0);
        for j in 0..3 {
            let beta: Vec<C> = (0..3).filter(|k| *k != j).map(|k| 1.0 + b[j] - b[k]).collect();
            let terms = hyper_terms(&beta, -w).unwrap();
            let lw = w.ln();
            let mut lhs = c(0.0);
            let mut rhs = c(0.0);
            for (n, tn) in terms.iter().enumerate() {
                // terms already carry (-w)^n
                let e = b[j] + n as f64;
                let pw = (b[j] * lw).exp();
                lhs += t(-i * hbar * e) * tn * pw;
                rhs += (i * hbar).powu(3) * w * tn * pw;
            }
            assert!((lhs - rhs).norm() < 1e-10 * (lhs.norm() + rhs.norm()));
        }
    }

    #[test]
    fn rank_one_meijer() {
        let b = [c(0.3)];
        for w in [0.5f64, 4.0, 30.0] {
            let exact = (-w as f64).exp() * w.powf(0.3);
            let g = meijer_maximal(&b, c(w)).unwrap();
            assert!((g - exact).norm() < 1e-12 * exact);
            let mb = meijer_mellin_barnes(&b, c(w)).unwrap();
            assert!((mb - exact).norm() < 1e-10 * exact);
        }
    }

    #[test]
    fn residue_and_line_agree() {
        let b = [c(0.2), c(-0.05), c(-0.15)];
        for w in [C::new(2.0, 0.0), C::new(6.0, 3.0)] {
            let (r, _) = meijer_residue_sum(&b, w).unwrap();
            let m = meijer_mellin_barnes(&b, w).unwrap();
            assert!((r - m).norm() < 1e-9 * r.norm(), "{r} vs {m}");
        }
    }

    #[test]
    fn meijer_maximal_decay() {
        let b = [c(0.2), c(-0.05), c(-0.15)];
        let n = 3.0f64;
        let mut prev = f64::INFINITY;
        for w in [50.0f64, 100.0, 200.0, 500.0] {
            let g = meijer_maximal(&b, c(w)).unwrap();
            let lead = ((2.0 * PI).powf(n - 1.0) / n).sqrt() * (-n * w.powf(1.0 / n)).exp() * w.powf(-(n - 1.0) / (2.0 * n));
            let dev = (g / lead - 1.0).norm();
            assert!(dev < prev, "w={w}: deviation {dev} did not shrink");
            assert!(dev * w.powf(1.0 / n) < 1.0, "deviation {dev} is not O(w^(-1/N))");
            prev = dev;
        }
    }

    #[test]
    fn collision_is_reported() {
        assert!(matches!(meijer_residue_sum(&[c(0.5), c(-0.5)], c(1.0)), Err(TodaError::Collision(_))));
    }
}
