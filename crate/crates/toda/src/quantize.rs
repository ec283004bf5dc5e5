//! Quantization conditions on δ, the resulting spectrum, the decaying Baxter
//! eigen-solution q(λ), and a finite-difference Schrödinger oracle for N = 2.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TodaError};
use crate::gutzwiller::circle_mean;
use crate::nlie::{log_zeta, solve_nlie_from, u_energy, GridSpec, NlieParams, NlieSolution};
use crate::numerics::{log_gamma, newton_system, NewtonOptions};
use crate::TodaParams;

const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantizationProblem {
    pub toda: TodaParams,
    /// Quantum numbers; a common shift of all entries labels the same state.
    pub modes: Vec<i64>,
    /// Optional starting point; the closed-form small-coupling solution is used otherwise.
    pub seed: Option<Vec<C>>,
}

impl QuantizationProblem {
    pub fn new(toda: TodaParams, modes: Vec<i64>) -> Self {
        Self { toda, modes, seed: None }
    }

    /// Level `k` of the N = 2 chain (k = 0 is the ground state).
    pub fn level_n2(hbar: f64, lambda: f64, k: usize) -> Self {
        Self::new(TodaParams::new(2, hbar, lambda), vec![k as i64, 0])
    }
}

/// Targets ν_k with log ζ_k = 2πi ν_k; Σν = 0 and ν_k - ν_j ∈ ℤ.
pub fn mode_targets(modes: &[i64]) -> Vec<f64> {
    let n = modes.len() as f64;
    let mean = modes.iter().sum::<i64>() as f64 / n;
    modes
        .iter()
        .enumerate()
        .map(|(k, &m)| (m as f64 - mean) + (n + 1.0) / 2.0 - (k + 1) as f64)
        .collect()
}

/// Quantum numbers of the mirror state δ → -reversed(δ).
pub fn parity_modes(modes: &[i64]) -> Vec<i64> {
    modes.iter().rev().map(|m| -m).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub toda: TodaParams,
    pub modes: Vec<i64>,
    pub targets: Vec<f64>,
    pub delta_star: Vec<C>,
    /// Common value of the ζ_j.
    pub zeta: C,
    pub zeta_all: Vec<C>,
    pub log_zeta: Vec<C>,
    /// E_2..E_N of t_δ.
    pub energies: Vec<C>,
    /// u = -E_2.
    pub u: C,
    pub residual: f64,
    pub iterations: usize,
    pub zeta_spread: f64,
    pub grid: GridSpec,
}

impl SpectrumRecord {
    pub fn zeta_product(&self) -> C {
        self.zeta_all.iter().product()
    }
}

/// log ζ_k with X ≡ 0.
pub fn log_zeta_closed_form(toda: &TodaParams, delta: &[C]) -> Result<Vec<C>> {
    let (h, n) = (toda.hbar, toda.n as f64);
    delta
        .iter()
        .enumerate()
        .map(|(k, &dk)| {
            let mut acc = 2.0 * n * I / h * dk * (h / toda.lambda).ln();
            for (j, &dj) in delta.iter().enumerate() {
                if j != k {
                    let a = I * (dk - dj) / h;
                    acc += log_gamma(1.0 + a)? - log_gamma(1.0 - a)?;
                }
            }
            Ok(acc)
        })
        .collect()
}

fn residual_map(log_z: &[C], delta: &[C], targets: &[f64]) -> Vec<C> {
    let n = delta.len();
    let mut out: Vec<C> = (0..n - 1).map(|k| log_z[k] - 2.0 * PI * I * targets[k]).collect();
    out.push(delta.iter().sum());
    out
}

/// Closed-form small-coupling solution of the quantization conditions.
pub fn closed_form_solution(toda: &TodaParams, modes: &[i64]) -> Result<Vec<C>> {
    let targets = mode_targets(modes);
    let n = toda.n as f64;
    let seed: Vec<C> = targets
        .iter()
        .map(|nu| C::new(PI * toda.hbar * nu / (n * (toda.hbar / toda.lambda).ln()), 0.0))
        .collect();
    let rep = newton_system(
        |d| Ok(residual_map(&log_zeta_closed_form(toda, d)?, d, &targets)),
        &seed,
        NewtonOptions {
            tol: 1e-13,
            ..Default::default()
        },
    )?;
    Ok(rep.x)
}

fn check_modes(qp: &QuantizationProblem) -> Result<()> {
    qp.toda.validate()?;
    if qp.modes.len() != qp.toda.n {
        return Err(TodaError::Config(format!(
            "expected {} quantum numbers, got {}",
            qp.toda.n,
            qp.modes.len()
        )));
    }
    Ok(())
}

// Newton on the NLIE-based conditions at fixed coupling, on a frozen grid.
fn newton_nlie(toda: TodaParams, targets: &[f64], seed: &[C]) -> Result<(Vec<C>, NlieSolution, usize)> {
    let base = NlieParams::new(toda, seed.to_vec());
    let mut grid = base.grid;
    // leave room for the iterates to move
    grid.m = grid.m.max(40.0 * 1.5 * seed.iter().fold(0.0f64, |a, d| a.max(d.norm())));
    let warm: RefCell<Option<NlieSolution>> = RefCell::new(None);
    let last_logz: RefCell<Option<Vec<C>>> = RefCell::new(None);
    let eval = |d: &[C]| -> Result<Vec<C>> {
        let mut p = base.clone();
        p.delta = d.to_vec();
        p.grid = grid;
        let sol = solve_nlie_from(&p, warm.borrow().as_ref())?;
        let lz = log_zeta(&sol)?;
        *warm.borrow_mut() = Some(sol);
        Ok(residual_map(&lz, d, targets))
    };
    let rep = newton_system(
        |d| {
            let r = eval(d)?;
            let lz: Vec<C> = (0..d.len() - 1)
                .map(|k| r[k] + 2.0 * PI * I * targets[k])
                .collect();
            if let Some(prev) = last_logz.borrow().as_ref() {
                for (a, b) in prev.iter().zip(&lz) {
                    let jump = (a - b).norm();
                    if jump > PI {
                        return Err(TodaError::BranchJump(jump));
                    }
                }
            }
            *last_logz.borrow_mut() = Some(lz);
            Ok(r)
        },
        seed,
        NewtonOptions {
            tol: 1e-12,
            max_iter: 40,
            fd_eps: 1e-6,
        },
    )?;
    let mut p = base.clone();
    p.delta = rep.x.clone();
    p.grid = grid;
    let sol = solve_nlie_from(&p, warm.borrow().as_ref())?;
    Ok((rep.x, sol, rep.iterations))
}

/// Solve log ζ_k(δ) = 2πi ν_k (k < N) with Σδ = 0 and collect the spectrum.
pub fn quantize(qp: &QuantizationProblem) -> Result<SpectrumRecord> {
    check_modes(qp)?;
    let toda = qp.toda;
    let targets = mode_targets(&qp.modes);
    let direct = || -> Result<(Vec<C>, NlieSolution, usize)> {
        let seed = match &qp.seed {
            Some(s) => s.clone(),
            None => closed_form_solution(&toda, &qp.modes)?,
        };
        newton_nlie(toda, &targets, &seed)
    };
    let (delta, sol, iterations) = match direct() {
        Ok(r) => r,
        Err(first) => {
            // continuation in the coupling from the closed form
            let steps = (toda.lambda / 0.05).ceil() as usize;
            let mut cur: Option<(Vec<C>, NlieSolution, usize)> = None;
            for k in 1..=steps {
                let lam = (0.05 * k as f64).min(toda.lambda);
                let t = TodaParams { lambda: lam, ..toda };
                let seed = match &cur {
                    Some((d, _, _)) => d.clone(),
                    None => closed_form_solution(&t, &qp.modes)?,
                };
                cur = Some(newton_nlie(t, &targets, &seed).map_err(|e| match e {
                    TodaError::BranchJump(_) => e,
                    _ => first.clone(),
                })?);
            }
            cur.ok_or(first)?
        }
    };
    record_from(toda, &qp.modes, &targets, delta, &sol, iterations)
}

fn record_from(
    toda: TodaParams,
    modes: &[i64],
    targets: &[f64],
    delta: Vec<C>,
    sol: &NlieSolution,
    iterations: usize,
) -> Result<SpectrumRecord> {
    let lz = log_zeta(sol)?;
    let zeta_all: Vec<C> = lz.iter().map(|z| z.exp()).collect();
    let zeta = (2.0 * PI * I * targets[0]).exp();
    let zeta_spread = zeta_all
        .iter()
        .fold(0.0f64, |a, z| a.max((z - zeta).norm() / zeta.norm()));
    let residual = residual_map(&lz, &delta, targets)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(SpectrumRecord {
        toda,
        modes: modes.to_vec(),
        targets: targets.to_vec(),
        delta_star: delta,
        zeta,
        zeta_all,
        log_zeta: lz,
        energies: sol.spectral.charges.clone(),
        u: u_energy(sol),
        residual,
        iterations,
        zeta_spread,
        grid: sol.params.grid,
    })
}

/// NLIE solution at the quantized point of a record, on the record's grid.
pub fn solution_for(rec: &SpectrumRecord) -> Result<NlieSolution> {
    let mut p = NlieParams::new(rec.toda, rec.delta_star.clone());
    p.grid = rec.grid;
    solve_nlie_from(&p, None)
}

/// q(λ) = (Q⁺_δ - ζ Q⁻_δ)(λ) / ∏_j e^{-πλ/ħ} sinh(π(λ - δ_j)/ħ).
pub fn build_q(lambda: C, rec: &SpectrumRecord, sol: &NlieSolution) -> Result<C> {
    let h = rec.toda.hbar;
    let den = |l: C| -> C {
        rec.delta_star
            .iter()
            .map(|d| (-PI * l / h).exp() * (PI * (l - d) / h).sinh())
            .product()
    };
    let num = |l: C| -> Result<C> { Ok(sol.q_plus_delta(l)? - rec.zeta * sol.q_minus_delta(l)?) };
    // nearest zero of the denominator: δ_j + iħm
    let near = rec
        .delta_star
        .iter()
        .map(|d| {
            let m = ((lambda - d).im / h).round();
            (d + I * h * m, (lambda - d - I * h * m).norm())
        })
        .fold((lambda, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    if near.1 < 1e-3 {
        let centre = near.0;
        let at = num(centre)?;
        let scale = sol.q_plus_delta(centre)?.norm() + (rec.zeta * sol.q_minus_delta(centre)?).norm();
        let mismatch = at.norm() / scale;
        if mismatch > 1e-6 {
            return Err(TodaError::ResidueCancellation {
                point: centre,
                mismatch,
            });
        }
        return circle_mean(lambda, |z| Ok(num(z)? / den(z)));
    }
    Ok(num(lambda)? / den(lambda))
}

// Number of eigenvalues below x of the symmetric tridiagonal matrix (Sturm count).
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = diag[i] - x - off2[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn fd_eigenvalue(hbar: f64, lambda: f64, half: f64, step: f64, level: usize) -> f64 {
    let n = (2.0 * half / step).round() as usize - 1;
    let h = 2.0 * half / (n + 1) as f64;
    let kin = hbar * hbar / (h * h);
    let diag: Vec<f64> = (1..=n)
        .map(|i| 2.0 * kin + 2.0 * lambda * lambda * (-half + i as f64 * h).cosh())
        .collect();
    let off2 = vec![kin * kin; n - 1];
    let hi0 = diag.iter().cloned().fold(f64::MIN, f64::max) + 2.0 * kin;
    let (mut lo, mut hi) = (0.0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, &off2, mid) > level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn richardson(hbar: f64, lambda: f64, half: f64, step: f64, level: usize) -> f64 {
    let e: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|s| fd_eigenvalue(hbar, lambda, half, step * s, level))
        .collect();
    let r1 = (4.0 * e[1] - e[0]) / 3.0;
    let r2 = (4.0 * e[2] - e[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Eigenvalue -E_2 of -ħ²ψ'' + 2Λ² cosh(x) ψ by finite differences with Richardson extrapolation.
pub fn oracle_spectrum_n2(hbar: f64, lambda: f64, level: usize) -> Result<f64> {
    if !(lambda >= 1e-3) || !(hbar > 0.0) {
        return Err(TodaError::Domain(format!(
            "oracle needs Λ ≥ 1e-3 and ħ > 0, got Λ = {lambda}, ħ = {hbar}"
        )));
    }
    let l2 = 2.0 * lambda * lambda;
    // rough level energy from a coarse run sets the box size
    let mut step = (hbar / (lambda.max(hbar) * 20.0)).min(0.05);
    let rough = fd_eigenvalue(hbar, lambda, 12.0f64.max(4.0 * (1.0 / lambda).ln().max(0.0) + 8.0), step, level);
    let half = |e: f64| 10f64.max(4.0 * (e.abs() / l2).max(1.0).acosh() + 4.0);
    let box_half = half(rough);
    // Sturm counts carry an error of order eps·ħ²/h², so only a few halvings pay off.
    let mut prev = richardson(hbar, lambda, box_half, step, level);
    for _ in 0..3 {
        step *= 0.5;
        let next = richardson(hbar, lambda, box_half, step, level);
        if (next - prev).abs() < 1e-9 * next.abs().max(1.0) {
            let wide = richardson(hbar, lambda, 2.0 * box_half, step, level);
            if (wide - next).abs() < 1e-9 * next.abs().max(1.0) {
                return Ok(next);
            }
            return Err(TodaError::non_convergence("oracle_spectrum_n2", "box size not converged"));
        }
        prev = next;
    }
    Err(TodaError::non_convergence("oracle_spectrum_n2", "mesh refinement not converged"))
}
