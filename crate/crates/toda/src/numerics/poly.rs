use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use crate::error::{Result, TodaError};

/// Dense polynomial c_0 + c_1 x + ... + c_n x^n.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<C>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<C>) -> Self {
        Self { coeffs }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C]) -> Self {
        let mut c = vec![C::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Polynomial { coeffs }
    }
}

/// All roots via eigenvalues of the companion matrix, polished by Newton steps.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<C>> {
    let n = p.degree();
    if n == 0 {
        return Err(TodaError::Domain("polynomial of degree 0 has no roots".into()));
    }
    let lead = p.coeffs[n];
    let scale = p.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    if lead.norm() <= 1e-14 * scale || lead.norm() == 0.0 {
        return Err(TodaError::DegenerateLeading);
    }
    let mut m = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        m[(0, k)] = -p.coeffs[n - 1 - k] / lead;
    }
    for k in 1..n {
        m[(k, k - 1)] = C::new(1.0, 0.0);
    }
    let dp = p.derivative();
    let mut roots: Vec<C> = match nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 500 * n)
        .and_then(|s| s.eigenvalues())
    {
        Some(eig) => eig.iter().copied().collect(),
        None => aberth(p, &dp)?,
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = p.eval(*r);
            let d = dp.eval(*r);
            if d.norm() == 0.0 {
                break;
            }
            let cand = *r - f / d;
            if p.eval(cand).norm() < f.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

// Simultaneous Aberth-Ehrlich iteration, used when the QR sweep stalls.
fn aberth(p: &Polynomial, dp: &Polynomial) -> Result<Vec<C>> {
    let n = p.degree();
    let lead = p.coeffs[n];
    let radius = p
        .coeffs
        .iter()
        .take(n)
        .fold(0.0f64, |a, c| a.max((c / lead).norm()))
        + 1.0;
    let mut z: Vec<C> = (0..n)
        .map(|k| C::from_polar(0.5 * radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let f = p.eval(z[k]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / dp.eval(z[k]);
            let s: C = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * s);
            z[k] -= step;
            moved = moved.max(step.norm() / z[k].norm().max(1.0));
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    Ok(z)
}

/// Elementary symmetric polynomial e_i of the values.
pub fn elementary_symmetric(values: &[C], i: usize) -> Result<C> {
    if i > values.len() {
        return Err(TodaError::IndexOutOfRange {
            index: i,
            limit: values.len(),
        });
    }
    let mut e = vec![C::new(0.0, 0.0); i + 1];
    e[0] = C::new(1.0, 0.0);
    for &v in values {
        for k in (1..=i).rev() {
            let prev = e[k - 1];
            e[k] += prev * v;
        }
    }
    Ok(e[i])
}

/// Elementary symmetric polynomials e_0..e_k from power sums p_1..p_k (Newton identities).
pub fn elementary_from_power_sums(p: &[C]) -> Vec<C> {
    let mut e = vec![C::new(1.0, 0.0)];
    for k in 1..=p.len() {
        let mut acc = C::new(0.0, 0.0);
        for i in 1..=k {
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += e[k - i] * p[i - 1] * sign;
        }
        e.push(acc / k as f64);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn quadratic_roots() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let r = sorted(poly_roots(&p).unwrap());
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn triple_zero() {
        let p = Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        for r in poly_roots(&p).unwrap() {
            assert!(r.norm() < 1e-5);
            assert!(p.eval(r).norm() < 1e-10);
        }
    }

    #[test]
    fn cubic_factorization() {
        let p = Polynomial::new(vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]);
        let r = sorted(poly_roots(&p).unwrap());
        for (k, root) in r.iter().enumerate() {
            assert!((root - (k as f64 + 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_leading_rejected() {
        let p = Polynomial::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(poly_roots(&p), Err(TodaError::DegenerateLeading)));
    }

    #[test]
    fn symmetric_functions() {
        let v = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert_eq!(elementary_symmetric(&v, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(elementary_symmetric(&v, 1).unwrap(), c(6.0, 0.0));
        assert_eq!(elementary_symmetric(&v, 2).unwrap(), c(11.0, 0.0));
        assert_eq!(elementary_symmetric(&v, 3).unwrap(), c(6.0, 0.0));
        assert!(elementary_symmetric(&v, 4).is_err());
    }

    #[test]
    fn newton_identities_match() {
        let v = [c(0.3, 0.1), c(-1.2, 0.4), c(0.7, -0.9), c(2.0, 0.0)];
        let p: Vec<C> = (1..=4).map(|k| v.iter().map(|x| x.powi(k)).sum()).collect();
        let e = elementary_from_power_sums(&p);
        for i in 0..=4 {
            assert!((e[i] - elementary_symmetric(&v, i).unwrap()).norm() < 1e-12);
        }
    }
}

/// Largest pairwise distance after greedily matching each element of `a` to
/// its nearest unused element of `b`; infinite on length mismatch.
pub fn multiset_distance(a: &[C], b: &[C]) -> f64 {
    matched_distance(a, b, |x, y| (x - y).norm())
}

/// As [`multiset_distance`] with each distance divided by max(1, |b_j|).
pub fn relative_multiset_distance(a: &[C], b: &[C]) -> f64 {
    matched_distance(a, b, |x, y| (x - y).norm() / y.norm().max(1.0))
}

fn matched_distance(a: &[C], b: &[C], dist: impl Fn(C, C) -> f64) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push((dist(*x, *y), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}
