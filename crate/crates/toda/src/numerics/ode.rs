use num_complex::Complex64 as C;

use crate::error::{Result, TodaError};

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const CT: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeReport {
    pub y: Vec<C>,
    pub steps: usize,
    pub rejected: usize,
}

/// Adaptive Dormand-Prince integration of y' = f(t, y) from t0 to t1.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y0: &[C], opts: OdeOptions) -> Result<OdeReport>
where
    F: Fn(f64, &[C], &mut [C]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let span = t1 - t0;
    let dir = span.signum();
    let mut h = 1e-3 * span.abs().max(1e-12);
    let mut k = vec![vec![C::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C::new(0.0, 0.0); n];
    let (mut steps, mut rejected) = (0, 0);
    f(t, &y, &mut k[0]);
    while dir * (t1 - t) > 1e-15 * span.abs() {
        if steps + rejected > opts.max_steps {
            return Err(TodaError::non_convergence("ode", "step limit exceeded"));
        }
        if (t + dir * h - t1) * dir > 0.0 {
            h = (t1 - t).abs();
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += k[j][i] * (dir * h * A[s][j]);
                }
                tmp[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            f(t + dir * h * CT[s], &tmp, &mut tail[0]);
        }
        let mut err = 0.0f64;
        let mut ynew = vec![C::new(0.0, 0.0); n];
        for i in 0..n {
            let mut y5 = y[i];
            let mut e = C::new(0.0, 0.0);
            for s in 0..7 {
                y5 += k[s][i] * (dir * h * B5[s]);
                e += k[s][i] * (dir * h * (B5[s] - B4[s]));
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(y5.norm());
            err = err.max(e.norm() / sc);
            ynew[i] = y5;
        }
        if !err.is_finite() {
            return Err(TodaError::non_convergence("ode", "non-finite state"));
        }
        if err <= 1.0 {
            t += dir * h;
            y = ynew;
            // First-same-as-last: stage 7 is f at the new point.
            let last = k[6].clone();
            k[0] = last;
            steps += 1;
        } else {
            rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * span.abs() {
            return Err(TodaError::non_convergence("ode", "step size underflow"));
        }
    }
    Ok(OdeReport { y, steps, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let lam = C::new(0.3, 2.0);
        let rep = integrate(
            |_, y, dy| dy[0] = lam * y[0],
            0.0,
            3.0,
            &[C::new(1.0, 0.0)],
            OdeOptions::default(),
        )
        .unwrap();
        assert!((rep.y[0] - (lam * 3.0).exp()).norm() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let rep = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            2.0 * std::f64::consts::PI,
            &[C::new(1.0, 0.0), C::new(0.0, 0.0)],
            OdeOptions::default(),
        )
        .unwrap();
        assert!((rep.y[0] - 1.0).norm() < 1e-10 && rep.y[1].norm() < 1e-10);
    }
}
