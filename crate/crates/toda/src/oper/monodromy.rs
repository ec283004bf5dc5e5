use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::OperInstance;
use crate::error::{Result, TodaError};
use crate::monodromy_algebra::eigenvalues;
use crate::numerics::relative_multiset_distance;
#[cfg(test)]
use crate::numerics::multiset_distance;
use crate::numerics::ode::{integrate, OdeOptions};

const I: C = C::new(0.0, 1.0);
const RTOL: f64 = 1e-11;
const RTOL_CHECK: f64 = 1e-13;
const REFINEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub matrix: DMatrix<C>,
    pub eigenvalues: Vec<C>,
    pub det: C,
    pub steps: usize,
    /// Eigenvalue change between the working and the tightened tolerance,
    /// relative to max(1, |eigenvalue|).
    pub refinement_change: f64,
}

/// Transport of `v` (ordered (χ^{(N-1)}, …, χ), χ^{(k)} = (-iħ∂_x)^k χ) along
/// z = e^{iθ} from θ0 to θ1: dΨ/dθ = -(1/ħ) A(e^{iθ}) Ψ.
pub fn transport_solution(inst: &OperInstance, v: &[C], theta0: f64, theta1: f64, rtol: f64) -> Result<(Vec<C>, usize)> {
    let n = inst.params().n;
    if v.len() % n != 0 {
        return Err(TodaError::Domain(format!("state length {} is not a multiple of {n}", v.len())));
    }
    let cols = v.len() / n;
    let hbar = inst.params().hbar;
    let opts = OdeOptions {
        rtol,
        atol: rtol * 1e-3,
        max_steps: 2_000_000,
    };
    let rep = integrate(
        |theta, y, dy| {
            let a = inst.companion(I * theta);
            for c in 0..cols {
                for r in 0..n {
                    let mut acc = C::new(0.0, 0.0);
                    for k in 0..n {
                        acc += a[(r, k)] * y[c * n + k];
                    }
                    dy[c * n + r] = -acc / hbar;
                }
            }
        },
        theta0,
        theta1,
        v,
        opts,
    )?;
    Ok((rep.y, rep.steps))
}

fn loop_matrix(inst: &OperInstance, theta0: f64, rtol: f64) -> Result<(DMatrix<C>, usize)> {
    let n = inst.params().n;
    let id = DMatrix::<C>::identity(n, n);
    let (y, steps) = transport_solution(inst, id.as_slice(), theta0, theta0 + 2.0 * PI, rtol)?;
    Ok((DMatrix::from_column_slice(n, n, &y), steps))
}

/// Monodromy of the companion system around |z| = 1 based at e^{iθ0}.
pub fn ode_monodromy(inst: &OperInstance, theta0: f64) -> Result<MonodromyReport> {
    let (m, steps) = loop_matrix(inst, theta0, RTOL)?;
    let (m_fine, _) = loop_matrix(inst, theta0, RTOL_CHECK)?;
    let ev = eigenvalues(&m)?;
    let change = relative_multiset_distance(&ev, &eigenvalues(&m_fine)?);
    if change > REFINEMENT_TOL {
        return Err(TodaError::non_convergence(
            "ode_monodromy",
            format!("eigenvalues moved by {change:.2e} under step refinement"),
        ));
    }
    Ok(MonodromyReport {
        det: m.determinant(),
        matrix: m,
        eigenvalues: ev,
        steps,
        refinement_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gutzwiller::{hill_zeros, Gutzwiller, SpectralData};
    use crate::oper::{FloquetBasis, Side};
    use crate::TodaParams;

    fn spectral(n: usize, lambda: f64, tau: &[f64]) -> SpectralData {
        SpectralData::from_tau(TodaParams::new(n, 1.0, lambda), tau.iter().map(|t| C::new(*t, 0.0)).collect()).unwrap()
    }

    #[test]
    fn eigenvalues_are_floquet_multipliers() {
        let s = spectral(2, 0.3, &[-0.7, 0.7]);
        let z = hill_zeros(&s).unwrap();
        let expected: Vec<C> = z.delta.iter().map(|d| (2.0 * PI * I * I * d).exp()).collect();
        let inst = OperInstance::new(s).unwrap();
        let rep = ode_monodromy(&inst, 0.0).unwrap();
        assert!(multiset_distance(&rep.eigenvalues, &expected) < 1e-6);
        assert!((rep.det - 1.0).norm() < 1e-10);
        let rotated = ode_monodromy(&inst, 1.3).unwrap();
        assert!(multiset_distance(&rep.eigenvalues, &rotated.eigenvalues) < 1e-9);
    }

    #[test]
    fn floquet_vector_is_transported_diagonally() {
        let s = spectral(3, 0.4, &[-1.0, 0.3, 0.7]);
        let g = Gutzwiller::new(s).unwrap();
        let b = FloquetBasis::new(&g, Side::Infinity, -40, 40).unwrap();
        let theta0 = 0.2;
        let x0 = C::new(0.0, theta0);
        for j in 0..3 {
            let v: Vec<C> = (0..3)
                .rev()
                .map(|k| b.eval_weighted(j, x0, |s| (-I * s).powu(k as u32)).unwrap())
                .collect();
            let (end, _) = transport_solution(&b.inst, &v, theta0, theta0 + 2.0 * PI, 1e-12).unwrap();
            let mult = (2.0 * PI * I * b.sigma[j]).exp();
            let scale: f64 = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (e, s) in end.iter().zip(&v) {
                assert!((e - mult * s).norm() < 1e-9 * scale * mult.norm());
            }
        }
    }
}
