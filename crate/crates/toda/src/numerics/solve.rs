use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use crate::error::{Result, TodaError};

/// Controls for [`newton_system`].
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step, scaled by max(1, |x_j|).
    pub fd_eps: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            fd_eps: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub x: Vec<C>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Central-difference Jacobian of a holomorphic map.
pub fn fd_jacobian<F>(f: &mut F, x: &[C], eps: f64) -> Result<DMatrix<C>>
where
    F: FnMut(&[C]) -> Result<Vec<C>>,
{
    let m = x.len();
    let mut jac = DMatrix::<C>::zeros(m, m);
    let mut xp = x.to_vec();
    for j in 0..m {
        let e = eps * x[j].norm().max(1.0);
        xp[j] = x[j] + e;
        let fp = f(&xp)?;
        xp[j] = x[j] - e;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * e);
        }
    }
    Ok(jac)
}

/// Solve a square complex linear system, rejecting numerically singular matrices.
pub fn solve_linear(a: &DMatrix<C>, b: &[C]) -> Option<Vec<C>> {
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|k| u[(k, k)].norm()).collect();
    let big = diag.iter().cloned().fold(0.0, f64::max);
    let small = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if big == 0.0 || small <= 1e-14 * big {
        return None;
    }
    lu.solve(&DVector::from_column_slice(b))
        .map(|v| v.iter().copied().collect())
}

/// Newton iteration with a finite-difference Jacobian and step halving.
pub fn newton_system<F>(mut f: F, x0: &[C], opts: NewtonOptions) -> Result<NewtonReport>
where
    F: FnMut(&[C]) -> Result<Vec<C>>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    let mut r = norm(&fx);
    let mut history = vec![r];
    if r < opts.tol {
        // Already at a root: reject it if it is degenerate.
        let jac = fd_jacobian(&mut f, &x, opts.fd_eps)?;
        let zero = vec![C::new(0.0, 0.0); x.len()];
        if solve_linear(&jac, &zero).is_none() {
            return Err(TodaError::SingularJacobian(x));
        }
    }
    for it in 0..opts.max_iter {
        if r < opts.tol {
            return Ok(NewtonReport {
                x,
                residual: r,
                iterations: it,
                history,
            });
        }
        let jac = fd_jacobian(&mut f, &x, opts.fd_eps)?;
        let rhs: Vec<C> = fx.iter().map(|v| -v).collect();
        let dx = solve_linear(&jac, &rhs).ok_or_else(|| TodaError::SingularJacobian(x.clone()))?;
        let mut t = 1.0;
        loop {
            let cand: Vec<C> = x.iter().zip(&dx).map(|(a, d)| a + d * t).collect();
            let trial = f(&cand);
            match trial {
                Ok(fc) => {
                    let rc = norm(&fc);
                    if rc < r || t < 1.0 / 64.0 {
                        x = cand;
                        fx = fc;
                        r = rc;
                        break;
                    }
                }
                Err(e) if t < 1.0 / 64.0 => return Err(e),
                Err(_) => {}
            }
            t *= 0.5;
        }
        history.push(r);
    }
    if r < opts.tol {
        return Ok(NewtonReport {
            x,
            residual: r,
            iterations: opts.max_iter,
            history,
        });
    }
    Err(TodaError::MaxIterations {
        iterations: opts.max_iter,
        residual: r,
        last: x,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_converges_in_one_step() {
        let c = C::new(2.5, -1.0);
        let rep = newton_system(|x| Ok(vec![x[0] - c]), &[C::new(-7.0, 3.0)], NewtonOptions::default())
            .unwrap();
        // One Newton step lands on c up to the finite-difference Jacobian error.
        assert!(rep.history[1] < 1e-8);
        assert!((rep.x[0] - c).norm() < 1e-12);
    }

    #[test]
    fn square_root_of_two() {
        let rep = newton_system(
            |x| Ok(vec![x[0] * x[0] - 2.0]),
            &[C::new(1.0, 0.0)],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn singular_jacobian_reported() {
        let r = newton_system(|x| Ok(vec![x[0] * x[0]]), &[C::new(0.0, 0.0)], NewtonOptions::default());
        assert!(matches!(r, Err(TodaError::SingularJacobian(_))));
    }

    #[test]
    fn max_iterations_reported() {
        let r = newton_system(
            |x| Ok(vec![x[0] * x[0] + 1.0]),
            &[C::new(1.0, 0.0)],
            NewtonOptions {
                max_iter: 3,
                ..Default::default()
            },
        );
        match r {
            Err(TodaError::MaxIterations { history, .. }) => assert_eq!(history.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_dimensional_system() {
        let rep = newton_system(
            |x| Ok(vec![x[0] + x[1] - 3.0, x[0] * x[1] - 2.0]),
            &[C::new(0.5, 0.1), C::new(2.5, 0.0)],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((rep.x[0] - 1.0).norm() < 1e-10 && (rep.x[1] - 2.0).norm() < 1e-10);
    }
}
