use std::sync::OnceLock;

use num_complex::Complex64 as C;

use crate::error::{Result, TodaError};

/// Uniform symmetric grid on [-M, M] with complex samples.
#[derive(Clone, Debug)]
pub struct ComplexGrid {
    pub points: Vec<f64>,
    pub values: Vec<C>,
    pub m: f64,
    pub h: f64,
}

impl ComplexGrid {
    /// Grid with step close to `h` that lands exactly on both ends.
    pub fn new(m: f64, h: f64) -> Self {
        let half = (m / h).round().max(1.0) as usize;
        let step = m / half as f64;
        let points: Vec<f64> = (0..=2 * half)
            .map(|k| (k as f64 - half as f64) * step)
            .collect();
        let values = vec![C::new(0.0, 0.0); points.len()];
        Self {
            points,
            values,
            m,
            h: step,
        }
    }

    pub fn sampled(m: f64, h: f64, f: impl Fn(f64) -> C) -> Self {
        let mut g = Self::new(m, h);
        g.sample(f);
        g
    }

    pub fn sample(&mut self, f: impl Fn(f64) -> C) {
        for (v, &x) in self.values.iter_mut().zip(&self.points) {
            *v = f(x);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid weights (half weight at both ends).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| if k == 0 || k + 1 == n { 0.5 * self.h } else { self.h })
            .collect()
    }
}

/// Quadrature value with its tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: C,
    pub tail_correction: C,
    pub tail_estimate: f64,
}

fn side_tail(fm: C, fhalf: C, cut: f64) -> Option<C> {
    if fm.norm() == 0.0 {
        return Some(C::new(0.0, 0.0));
    }
    let p = (fhalf.norm() / fm.norm()).ln() / 2f64.ln();
    if !(p > 1.0) {
        return None;
    }
    Some(fm * cut / (p - 1.0))
}

/// Tail-corrected trapezoid value over the real line at a cutoff index `k`
/// (points[centre +- k]).
fn corrected_at(grid: &ComplexGrid, k: usize) -> Option<(C, C)> {
    let centre = grid.len() / 2;
    let mut trap = C::new(0.0, 0.0);
    for j in centre - k..=centre + k {
        let w = if j == centre - k || j == centre + k { 0.5 } else { 1.0 };
        trap += grid.values[j] * w;
    }
    trap *= grid.h;
    let cut = k as f64 * grid.h;
    let right = side_tail(grid.values[centre + k], grid.values[centre + k / 2], cut)?;
    let left = side_tail(grid.values[centre - k], grid.values[centre - k / 2], cut)?;
    Some((trap + right + left, right + left))
}

/// Integral over the real line of the sampled function.
///
/// Trapezoid on the grid plus a power-law tail fitted from the samples at M and
/// M/2. The returned estimate is the change of the corrected value when the
/// cutoff is moved from M to 3M/4; it must stay below `tol`.
pub fn quad_real_line(grid: &ComplexGrid, tol: f64) -> Result<QuadResult> {
    let centre = grid.len() / 2;
    let scale = grid.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let edge = grid.values[0].norm().max(grid.values[grid.len() - 1].norm());
    if edge <= 1e-17 * scale || scale == 0.0 {
        let value = grid
            .values
            .iter()
            .zip(grid.weights())
            .fold(C::new(0.0, 0.0), |a, (v, w)| a + v * w);
        return Ok(QuadResult {
            value,
            tail_correction: C::new(0.0, 0.0),
            tail_estimate: edge * grid.m,
        });
    }
    let insufficient = || TodaError::InsufficientDecay {
        estimate: f64::INFINITY,
        tol,
    };
    let (full, corr) = corrected_at(grid, centre).ok_or_else(insufficient)?;
    let (short, _) = corrected_at(grid, (3 * centre) / 4).ok_or_else(insufficient)?;
    let estimate = (full - short).norm();
    if estimate > tol {
        return Err(TodaError::InsufficientDecay { estimate, tol });
    }
    Ok(QuadResult {
        value: full,
        tail_correction: corr,
        tail_estimate: estimate,
    })
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(usize, Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    if let Some((_, x, w)) = cache.lock().unwrap().iter().find(|(k, _, _)| *k == n) {
        return (x.clone(), w.clone());
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    cache.lock().unwrap().push((n, x.clone(), w.clone()));
    (x, w)
}
