use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::quadrature::gauss_legendre;
use crate::error::{Result, TodaError};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for the Stirling series.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

fn is_gamma_pole(z: C) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn stirling(w: C) -> C {
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut corr = C::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        corr += p * c;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + corr
}

/// Principal branch of log Gamma, analytic on C minus (-inf, 0].
pub fn log_gamma(z: C) -> Result<C> {
    if is_gamma_pole(z) {
        return Err(TodaError::PoleOfGamma(z));
    }
    Ok(log_gamma_unchecked(z))
}

pub(crate) fn log_gamma_unchecked(z: C) -> C {
    // Shift until the truncated Stirling series reaches full double precision.
    // The product keeps the modulus to one rounding; the argument is summed per factor.
    let mut w = z;
    let mut prod = C::new(1.0, 0.0);
    let mut log_scale = 0.0;
    let mut arg = 0.0;
    while w.norm() < 8.0 || w.re < 0.5 {
        prod *= w;
        arg += w.arg();
        if prod.norm() > 1e200 {
            log_scale += prod.norm().ln();
            prod /= prod.norm();
        }
        w += 1.0;
    }
    stirling(w) - C::new(prod.norm().ln() + log_scale, arg)
}

/// log sin(pi z), evaluated without overflow for large |Im z|.
pub fn log_sin_pi(z: C) -> C {
    let i = C::i();
    if z.im >= 0.0 {
        let e = (2.0 * PI * i * z).exp();
        -i * PI * z + ((1.0 - e) / (-2.0 * i)).ln()
    } else {
        let e = (-2.0 * PI * i * z).exp();
        i * PI * z + ((1.0 - e) / (2.0 * i)).ln()
    }
}

/// Gamma function.
pub fn gamma(z: C) -> Result<C> {
    if z.re >= 0.5 {
        return Ok(log_gamma(z)?.exp());
    }
    if is_gamma_pole(z) {
        return Err(TodaError::PoleOfGamma(z));
    }
    // Reflection keeps the shifted Stirling sum short for Re z << 0.
    Ok((PI.ln() - log_sin_pi(z) - log_gamma_unchecked(1.0 - z)).exp())
}

/// Reciprocal Gamma function, entire.
pub fn rgamma(z: C) -> C {
    if z.re >= 0.5 {
        return (-log_gamma_unchecked(z)).exp();
    }
    if is_gamma_pole(z) {
        return C::new(0.0, 0.0);
    }
    (log_gamma_unchecked(1.0 - z) + log_sin_pi(z) - PI.ln()).exp()
}

/// log(1/Gamma(z)) on any branch; used where only the exponential matters.
pub fn log_rgamma(z: C) -> C {
    if z.re >= 0.5 {
        -log_gamma_unchecked(z)
    } else {
        log_gamma_unchecked(1.0 - z) + log_sin_pi(z) - PI.ln()
    }
}

const DILOG_B: [f64; 10] = [
    -1.0 / 4.0,
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211680.0,
    -1.0 / 10886400.0,
    1.0 / 526901760.0,
    -4.064_761_645_144_225_5e-11,
    8.921_691_020_456_452_6e-13,
    -1.993_929_586_072_107_6e-14,
    4.518_980_029_619_918_2e-16,
];

/// Dilogarithm Li_2(z), principal branch with cut on (1, inf).
pub fn dilog(z: C) -> C {
    let pi2 = PI * PI;
    if z == C::new(0.0, 0.0) {
        return z;
    }
    if z == C::new(1.0, 0.0) {
        return C::new(pi2 / 6.0, 0.0);
    }
    let nz = z.norm_sqr();
    let (u, rest, sgn) = if z.re <= 0.5 {
        if nz > 1.0 {
            let lz = (-z).ln();
            (-(1.0 - 1.0 / z).ln(), -0.5 * lz * lz - pi2 / 6.0, -1.0)
        } else {
            (-(1.0 - z).ln(), C::new(0.0, 0.0), 1.0)
        }
    } else if nz <= 2.0 * z.re {
        let u = -z.ln();
        (u, u * (1.0 - z).ln() + pi2 / 6.0, -1.0)
    } else {
        let lz = (-z).ln();
        (-(1.0 - 1.0 / z).ln(), -0.5 * lz * lz - pi2 / 6.0, -1.0)
    };
    let u2 = u * u;
    let mut tail = C::new(DILOG_B[9], 0.0);
    for &b in DILOG_B[2..9].iter().rev() {
        tail = b + u2 * tail;
    }
    let series = u + u2 * (DILOG_B[0] + u * (DILOG_B[1] + u2 * tail));
    sgn * series + rest
}

/// Antiderivative of log Gamma(1 + i t / hbar) along the segment [0, lambda], normalized to vanish at 0.
pub fn varpi(lambda: C, hbar: f64) -> Result<C> {
    if lambda == C::new(0.0, 0.0) {
        return Ok(lambda);
    }
    // The argument 1 + i s lambda / hbar runs on a straight line from 1; it meets
    // (-inf, 0] only for lambda on the positive imaginary axis beyond hbar.
    let a = C::i() * lambda / hbar;
    if a.im.abs() < 1e-14 * a.norm() && a.re <= -1.0 + 1e-8 {
        return Err(TodaError::PathThroughPole(lambda));
    }
    let (x, w) = gauss_legendre(24);
    let panels = (2.0 * lambda.norm() / hbar).ceil().max(1.0) as usize;
    let mut acc = C::new(0.0, 0.0);
    for p in 0..panels {
        let a0 = p as f64 / panels as f64;
        let a1 = (p + 1) as f64 / panels as f64;
        let half = 0.5 * (a1 - a0);
        let mid = 0.5 * (a1 + a0);
        for (xi, wi) in x.iter().zip(&w) {
            let s = mid + half * xi;
            acc += log_gamma_unchecked(1.0 + a * s) * (wi * half);
        }
    }
    Ok(acc * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 4e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 4e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half - 0.5 * PI.ln()).norm() < 4e-15);
        // log 4! = log 24
        assert!((log_gamma(c(5.0, 0.0)).unwrap() - 24f64.ln()).norm() < 1e-14);
    }

    #[test]
    fn log_gamma_reference_values() {
        // 30-digit reference values.
        let table = [
            (c(0.5, 0.0), c(0.5723649429247001, 0.0)),
            (c(1.5, 0.0), c(-0.12078223763524522, 0.0)),
            (c(0.3, 0.4), c(0.49665590338172577, -0.9827434476071467)),
            (c(-2.3, 1.1), c(-2.3963733709896555, -7.632765066402852)),
            (c(3.7, 0.2), c(1.421875449120491, 0.23355776042367812)),
            (c(0.1, 12.0), c(-18.92453834471017, 17.18736560284546)),
            (c(-7.5, -0.2), c(-8.58766703242389, 24.71670231637527)),
            (c(1.0, 0.7), c(-0.352768690859611, -0.2928263511868619)),
        ];
        for (z, v) in table {
            let got = log_gamma(z).unwrap();
            assert!((got - v).norm() < 4e-15 * v.norm().max(1.0), "{z}: {got} vs {v}");
        }
    }

    #[test]
    fn log_gamma_matches_product_recursion() {
        // Gamma(z) = (z-1)(z-2)(z-3) Gamma(z-3), with Gamma(z-3) from the reflection-free
        // Euler-Gauss product limit evaluated in the strip.
        let z = c(3.7, 0.2);
        let w = z - 3.0;
        let m = 200_000usize;
        let mut lg = (m as f64).ln() * w - w.ln();
        for k in 1..=m {
            lg += (k as f64).ln() - (w + k as f64).ln();
        }
        let expect = lg + (z - 1.0).ln() + (z - 2.0).ln() + (z - 3.0).ln();
        let got = log_gamma(z).unwrap();
        // The truncated Gauss product is accurate to O(1/m).
        assert!((got - expect).norm() < 1e-4, "{got} vs {expect}");
        let fine = log_gamma(w).unwrap() + (z - 1.0).ln() + (z - 2.0).ln() + (z - 3.0).ln();
        assert!((got - fine).norm() < 1e-13);
    }

    #[test]
    fn log_gamma_poles_rejected() {
        for k in 0..4 {
            assert!(matches!(
                log_gamma(c(-(k as f64), 0.0)),
                Err(TodaError::PoleOfGamma(_))
            ));
        }
    }

    #[test]
    fn reflection_consistency() {
        for &z in &[c(0.3, 0.4), c(-2.3, 1.1), c(-7.5, -0.2), c(0.1, 12.0)] {
            let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
            let rhs = PI / (PI * z).sin();
            assert!((lhs / rhs - 1.0).norm() < 1e-12, "{z}: {lhs} {rhs}");
            assert!((rgamma(z) * gamma(z).unwrap() - 1.0).norm() < 1e-12);
        }
        assert_eq!(rgamma(c(-3.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn log_sin_large_imaginary() {
        let z = c(0.3, 300.0);
        let v = log_sin_pi(z);
        // |sin(pi z)| ~ e^{pi y}/2
        assert!((v.re - (PI * 300.0 - 2f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn dilog_values() {
        assert_eq!(dilog(c(0.0, 0.0)), c(0.0, 0.0));
        assert!((dilog(c(-1.0, 0.0)) + PI * PI / 12.0).norm() < 1e-15);
        assert!((dilog(c(1.0, 0.0)) - PI * PI / 6.0).norm() < 1e-15);
        let z = c(-0.3, 0.0);
        let mut series = C::new(0.0, 0.0);
        let mut p = C::new(1.0, 0.0);
        for n in 1..=200 {
            p *= z;
            series += p / (n * n) as f64;
        }
        assert!((dilog(z) - series).norm() < 1e-15);
        // Li2(1/2) = pi^2/12 - (ln 2)^2/2
        let half = PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2);
        assert!((dilog(c(0.5, 0.0)) - half).norm() < 1e-15);
    }

    #[test]
    fn dilog_inversion_and_reflection() {
        // Li2(z) + Li2(1/z) = -pi^2/6 - ln^2(-z)/2 off the cut.
        for &z in &[c(-4.0, 0.5), c(3.0, 7.0), c(-9.5, -1.0), c(0.2, -6.0)] {
            let lhs = dilog(z) + dilog(1.0 / z);
            let rhs = -PI * PI / 6.0 - 0.5 * (-z).ln().powi(2);
            assert!((lhs - rhs).norm() < 1e-13, "{z}");
        }
        // Derivative: d/dz Li2(z) = -ln(1-z)/z
        let z = c(-2.5, 0.7);
        let e = 1e-6;
        let d = (dilog(z + e) - dilog(z - e)) / (2.0 * e);
        assert!((d + (1.0 - z).ln() / z).norm() < 1e-8);
    }

    #[test]
    fn varpi_defining_property() {
        assert_eq!(varpi(c(0.0, 0.0), 1.0).unwrap(), c(0.0, 0.0));
        let l = 0.4;
        let e = 1e-5;
        let d = (varpi(c(l + e, 0.0), 1.0).unwrap() - varpi(c(l - e, 0.0), 1.0).unwrap()) / (2.0 * e);
        let target = log_gamma(c(1.0, l)).unwrap();
        assert!((d - target).norm() < 1e-8);
    }

    #[test]
    fn varpi_symmetric_combination() {
        // d/dl [varpi(l) + varpi(-l)] = log Gamma(1 + i l) - log Gamma(1 - i l).
        let lam = c(0.9, -0.2);
        let lhs = varpi(lam, 1.0).unwrap() + varpi(-lam, 1.0).unwrap();
        // Independent composite Simpson along the same segment.
        let n = 4000;
        let mut acc = C::new(0.0, 0.0);
        for k in 0..=n {
            let s = k as f64 / n as f64;
            let t = lam * s;
            let f = log_gamma(1.0 + C::i() * t).unwrap() - log_gamma(1.0 - C::i() * t).unwrap();
            let wgt = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += f * wgt;
        }
        let rhs = acc * lam / (3.0 * n as f64);
        assert!((lhs - rhs).norm() < 1e-12, "{lhs} {rhs}");
    }

    #[test]
    fn varpi_rejects_cut() {
        assert!(varpi(c(0.0, 1.5), 1.0).is_err());
    }
}
