//! Nonlinear integral equation for X_δ(μ) and the Baxter solutions,
//! proportionality constants and energy built from it.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TodaError};
use crate::gutzwiller::{
    lower_gammas, minus_prefactor, plus_prefactor, upper_gammas, BaxterPair, SpectralData,
};
use crate::numerics::{
    elementary_from_power_sums, gauss_legendre, log_gamma, poly_roots, rgamma, ComplexGrid,
    Polynomial,
};
use crate::TodaParams;

const I: C = C::new(0.0, 1.0);

/// Uniform part [-M, M] with step h, plus Gauss-Legendre nodes in s = M/|μ| for each tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m: f64,
    pub h: f64,
    pub tail_nodes: usize,
}

impl GridSpec {
    pub fn default_for(p: &TodaParams, delta: &[C]) -> Self {
        let dmax = delta.iter().fold(0.0f64, |a, d| a.max(d.norm()));
        let m = 40.0 * 1f64.max(dmax).max(p.hbar);
        // keep several steps between the real axis and the nearest zero of Θ
        let gap = delta
            .iter()
            .fold(p.hbar / 2.0, |a, d| a.min(p.hbar / 2.0 - d.im.abs()));
        let h = (p.hbar / 20.0).min(gap / 8.0);
        Self { m, h, tail_nodes: 40 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NlieParams {
    pub toda: TodaParams,
    pub delta: Vec<C>,
    pub grid: GridSpec,
    pub tol: f64,
    pub max_iter: usize,
}

impl NlieParams {
    pub fn new(toda: TodaParams, delta: Vec<C>) -> Self {
        let grid = GridSpec::default_for(&toda, &delta);
        Self {
            toda,
            delta,
            grid,
            tol: 1e-13,
            max_iter: 400,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.toda.validate()?;
        if self.delta.len() != self.toda.n {
            return Err(TodaError::Domain(format!(
                "expected {} values of delta, got {}",
                self.toda.n,
                self.delta.len()
            )));
        }
        for d in &self.delta {
            if !(d.im.abs() < self.toda.hbar / 2.0) {
                return Err(TodaError::Domain(format!("|Im δ| must stay below ħ/2, got δ = {d}")));
            }
        }
        if !(self.grid.h > 0.0 && self.grid.m > 10.0 * self.grid.h) {
            return Err(TodaError::Domain("grid needs M well above h > 0".into()));
        }
        Ok(())
    }
}

/// Quadrature nodes of the real line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Nodes {
    pub mu: Vec<f64>,
    pub w: Vec<f64>,
}

impl Nodes {
    pub fn build(g: &GridSpec) -> Self {
        let core = ComplexGrid::new(g.m, g.h);
        let mut mu = core.points.clone();
        let mut w = core.weights();
        let (x, gw) = gauss_legendre(g.tail_nodes);
        for (xi, wi) in x.iter().zip(&gw) {
            let s = 0.5 * (xi + 1.0);
            let jac = 0.5 * wi * g.m / (s * s);
            for sign in [-1.0, 1.0] {
                mu.push(sign * g.m / s);
                w.push(jac);
            }
        }
        Self { mu, w }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

fn vartheta(delta: &[C], mu: C) -> C {
    delta.iter().map(|d| mu - d).product()
}

/// Θ(μ) = Λ^{-2N} ϑ(μ - iħ/2) ϑ(μ + iħ/2) with ϑ(μ) = ∏(μ - δ_k).
pub fn theta(mu: C, p: &NlieParams) -> C {
    let t = &p.toda;
    let h2 = I * t.hbar / 2.0;
    vartheta(&p.delta, mu - h2) * vartheta(&p.delta, mu + h2) / t.lambda.powi(2 * t.n as i32)
}

/// log Θ(μ) on the real axis as a sum of principal logs.
pub fn log_theta_at(mu: f64, p: &NlieParams) -> C {
    let t = &p.toda;
    let h2 = I * t.hbar / 2.0;
    let m = C::new(mu, 0.0);
    p.delta
        .iter()
        .map(|d| (m - h2 - d).ln() + (m + h2 - d).ln())
        .sum::<C>()
        - 2.0 * t.n as f64 * t.lambda.ln()
}

fn log1p(x: C) -> C {
    if x.norm() < 1e-4 {
        // four terms leave a relative error below 1e-20
        x * (1.0 - x * (0.5 - x * (1.0 / 3.0 - x * 0.25)))
    } else {
        (1.0 + x).ln()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NlieSolution {
    pub params: NlieParams,
    pub nodes: Nodes,
    pub log_x: Vec<C>,
    /// log(1 + X) on the nodes.
    pub l: Vec<C>,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    /// Transfer polynomial t_δ recovered from the power sums.
    pub spectral: SpectralData,
}

struct Kernel {
    n: usize,
    k: Vec<f64>,
}

impl Kernel {
    fn new(nodes: &Nodes, hbar: f64) -> Self {
        let n = nodes.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut k[i * n..(i + 1) * n];
            for j in 0..n {
                let d = nodes.mu[i] - nodes.mu[j];
                row[j] = nodes.w[j] * hbar / (PI * (d * d + hbar * hbar));
            }
        }
        Self { n, k }
    }

    fn apply(&self, l: &[C], out: &mut [C]) {
        for i in 0..self.n {
            let row = &self.k[i * self.n..(i + 1) * self.n];
            let mut acc = C::new(0.0, 0.0);
            for (kij, lj) in row.iter().zip(l) {
                acc += lj * kij;
            }
            out[i] = acc;
        }
    }
}

fn update(kernel: &Kernel, neg_log_theta: &[C], l: &[C], log_x: &mut [C], out: &mut [C]) -> Result<()> {
    kernel.apply(l, log_x);
    for i in 0..l.len() {
        log_x[i] += neg_log_theta[i];
        let x = log_x[i].exp();
        let one = 1.0 + x;
        if one.re <= 0.0 && one.im.abs() < 1e-3 * one.norm() {
            return Err(TodaError::Domain(format!(
                "1 + X crosses the negative real axis (1 + X = {one})"
            )));
        }
        out[i] = log1p(x);
    }
    Ok(())
}

/// Solve the NLIE by (damped) Picard iteration starting from X = 0.
pub fn solve_nlie(p: &NlieParams) -> Result<NlieSolution> {
    solve_nlie_from(p, None)
}

/// As [`solve_nlie`], warm-started from log(1+X) of a solution on the same grid.
pub fn solve_nlie_from(p: &NlieParams, guess: Option<&NlieSolution>) -> Result<NlieSolution> {
    p.validate()?;
    let nodes = Nodes::build(&p.grid);
    let n = nodes.len();
    let kernel = Kernel::new(&nodes, p.toda.hbar);
    let neg_log_theta: Vec<C> = nodes.mu.iter().map(|&m| -log_theta_at(m, p)).collect();
    let mut l = match guess {
        Some(g) if g.params.grid == p.grid && g.l.len() == n => g.l.clone(),
        _ => vec![C::new(0.0, 0.0); n],
    };
    let mut log_x = vec![C::new(0.0, 0.0); n];
    let mut next = vec![C::new(0.0, 0.0); n];
    let mut history = Vec::new();
    let mut alpha = 1.0;
    let mut rises = 0;
    let mut iterations = 0;
    loop {
        update(&kernel, &neg_log_theta, &l, &mut log_x, &mut next)?;
        let change = l
            .iter()
            .zip(&next)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        if !change.is_finite() {
            return Err(TodaError::non_convergence("solve_nlie", "non-finite iterate"));
        }
        if let Some(&last) = history.last() {
            if change > last {
                rises += 1;
                if rises >= 3 && alpha == 1.0 {
                    alpha = 0.5;
                }
            }
        }
        history.push(change);
        for (a, b) in l.iter_mut().zip(&next) {
            *a += (b - *a) * alpha;
        }
        iterations += 1;
        if change < p.tol {
            break;
        }
        if iterations >= p.max_iter {
            return Err(TodaError::MaxIterations {
                iterations,
                residual: change,
                last: p.delta.clone(),
                history,
            });
        }
    }
    // fixed-point residual of the accepted iterate
    update(&kernel, &neg_log_theta, &l, &mut log_x, &mut next)?;
    let residual = l
        .iter()
        .zip(&next)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    check_tail(p, &nodes, &l)?;
    let mut sol = NlieSolution {
        params: p.clone(),
        nodes,
        log_x,
        l,
        iterations,
        residual,
        history,
        spectral: SpectralData {
            params: p.toda,
            tau: p.delta.clone(),
            charges: Vec::new(),
        },
    };
    sol.spectral = tau_from_delta(&sol, p.toda.n)?;
    Ok(sol)
}

// Compares the tail integral of log(1+X) at full and half Gauss order.
fn check_tail(p: &NlieParams, nodes: &Nodes, l: &[C]) -> Result<()> {
    let n_core = nodes.len() - 2 * p.grid.tail_nodes;
    let full: C = (n_core..nodes.len()).map(|i| l[i] * nodes.w[i]).sum();
    let half_spec = GridSpec {
        tail_nodes: p.grid.tail_nodes / 2,
        ..p.grid
    };
    let half_nodes = Nodes::build(&half_spec);
    let n_half_core = half_nodes.len() - 2 * half_spec.tail_nodes;
    // X in the tails is dominated by Λ^{2N}/Θ; the convolution there is O(M^{-2})
    let sol_tail = |mu: f64| {
        let conv: C = (0..n_core)
            .map(|j| {
                let d = mu - nodes.mu[j];
                l[j] * nodes.w[j] * p.toda.hbar / (PI * (d * d + p.toda.hbar * p.toda.hbar))
            })
            .sum();
        log1p((conv - log_theta_at(mu, p)).exp())
    };
    let half: C = (n_half_core..half_nodes.len())
        .map(|i| sol_tail(half_nodes.mu[i]) * half_nodes.w[i])
        .sum();
    let estimate = (full - half).norm();
    let scale = l.iter().zip(&nodes.w).map(|(x, w)| x.norm() * w).sum::<f64>().max(1e-300);
    let tol = p.tol.max(1e-12) * scale.max(1.0);
    if estimate > tol {
        return Err(TodaError::InsufficientDecay { estimate, tol });
    }
    Ok(())
}

impl NlieSolution {
    pub fn toda(&self) -> TodaParams {
        self.params.toda
    }

    pub fn delta(&self) -> &[C] {
        &self.params.delta
    }

    /// Σ w f(μ) log(1 + X(μ)) over the nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> C) -> C {
        self.nodes
            .mu
            .iter()
            .zip(&self.nodes.w)
            .zip(&self.l)
            .map(|((&m, &w), &l)| f(m) * l * w)
            .sum()
    }

    pub fn x_values(&self) -> Vec<C> {
        self.log_x.iter().map(|z| z.exp()).collect()
    }

    /// Lorentzian convolution C(m) = ∫ dμ ħ/(π((m-μ)² + ħ²)) log(1+X(μ)), for |Im m| < ħ.
    pub fn conv(&self, m: C) -> C {
        let h = self.toda().hbar;
        self.integrate(|mu| {
            let d = m - mu;
            h / (PI * (d * d + h * h))
        })
    }

    /// X continued off the real axis through the NLIE.
    pub fn x_at(&self, m: C) -> C {
        let t = self.toda();
        let h2 = I * t.hbar / 2.0;
        let d = self.delta();
        t.lambda.powi(2 * t.n as i32) * self.conv(m).exp() / (vartheta(d, m - h2) * vartheta(d, m + h2))
    }

    /// v↑(λ) as the Cauchy integral; beyond Im λ = -ħ/2 this is not the analytic continuation.
    pub fn v_up(&self, lambda: C) -> Result<C> {
        let h2 = self.toda().hbar / 2.0;
        if (lambda.im + h2).abs() <= 1e-6 {
            return Err(TodaError::ContourProximity(lambda));
        }
        let s = self.integrate(|mu| 1.0 / (lambda - mu + I * h2));
        Ok((-s / (2.0 * PI * I)).exp())
    }

    /// v↓(λ - iħ) as the Cauchy integral.
    pub fn v_down_shifted(&self, lambda: C) -> Result<C> {
        let h2 = self.toda().hbar / 2.0;
        if (lambda.im - h2).abs() <= 1e-6 {
            return Err(TodaError::ContourProximity(lambda));
        }
        let s = self.integrate(|mu| 1.0 / (lambda - mu - I * h2));
        Ok((s / (2.0 * PI * I)).exp())
    }

    fn q_direct(&self, lambda: C, up: bool) -> Result<C> {
        let t = self.toda();
        if up {
            Ok(plus_prefactor(&t, lambda) * self.v_up(lambda)? * upper_gammas(t.hbar, self.delta(), lambda))
        } else {
            Ok(minus_prefactor(&t, lambda)
                * self.v_down_shifted(lambda)?
                * lower_gammas(t.hbar, self.delta(), lambda))
        }
    }

    // One residue of the Cauchy integral picked up across the contour.
    fn q_continued(&self, lambda: C, up: bool) -> Result<C> {
        let t = self.toda();
        let (h, n) = (t.hbar, t.n as i32);
        let l2n = t.lambda.powi(2 * n);
        let d = self.delta();
        if up {
            let g1 = upper_gammas(h, d, lambda);
            let g2: C = d.iter().map(|r| rgamma(2.0 - I * (lambda - r) / h)).product();
            let extra = l2n * self.conv(lambda + I * h / 2.0).exp() * (-I / h).powi(n) / vartheta(d, lambda);
            Ok(plus_prefactor(&t, lambda) * self.v_up(lambda)? * (g1 + extra * g2))
        } else {
            let g1 = lower_gammas(h, d, lambda);
            let g2: C = d.iter().map(|r| rgamma(2.0 + I * (lambda - r) / h)).product();
            let extra = l2n * self.conv(lambda - I * h / 2.0).exp() * (I / h).powi(n) / vartheta(d, lambda);
            Ok(minus_prefactor(&t, lambda) * self.v_down_shifted(lambda)? * (g1 + extra * g2))
        }
    }

    fn q_zoned(&self, lambda: C, up: bool) -> Result<C> {
        let t = self.toda();
        let s = if up { 1.0 } else { -1.0 };
        // depth into the half-plane where the Cauchy integral has to be continued
        let y = s * lambda.im / t.hbar;
        if y >= -0.25 {
            return self.q_direct(lambda, up);
        }
        if (-1.25..=-0.75).contains(&y) {
            return self.q_continued(lambda, up);
        }
        let k = (-0.25 - y).ceil().max(1.0) as usize;
        let step = s * I * t.hbar;
        let n = t.n as i32;
        let ln = t.lambda.powi(n);
        let ph = I.powi(if up { n } else { -n });
        let mut far = self.q_direct(lambda + step * (k + 1) as f64, up)?;
        let mut near = self.q_direct(lambda + step * k as f64, up)?;
        for j in (0..k).rev() {
            let mu = lambda + step * (j + 1) as f64;
            let q = ph * (self.spectral.t(mu) * near / ln - ph * far);
            far = near;
            near = q;
        }
        Ok(near)
    }

    pub fn q_plus_delta(&self, lambda: C) -> Result<C> {
        self.q_zoned(lambda, true)
    }

    pub fn q_minus_delta(&self, lambda: C) -> Result<C> {
        self.q_zoned(lambda, false)
    }
}

pub fn v_up(lambda: C, sol: &NlieSolution) -> Result<C> {
    sol.v_up(lambda)
}

pub fn v_down_shifted(lambda: C, sol: &NlieSolution) -> Result<C> {
    sol.v_down_shifted(lambda)
}

pub fn q_plus_delta(lambda: C, sol: &NlieSolution) -> Result<C> {
    sol.q_plus_delta(lambda)
}

pub fn q_minus_delta(lambda: C, sol: &NlieSolution) -> Result<C> {
    sol.q_minus_delta(lambda)
}

/// log ζ_k from the explicit representation (principal log-Gamma branches).
pub fn log_zeta(sol: &NlieSolution) -> Result<Vec<C>> {
    let t = sol.toda();
    let (h, n) = (t.hbar, t.n as f64);
    let d = sol.delta();
    for a in 0..d.len() {
        for b in a + 1..d.len() {
            if (d[a] - d[b]).norm() < 1e-10 {
                return Err(TodaError::Collision(format!("δ_{} = δ_{}", a + 1, b + 1)));
            }
        }
    }
    let h2 = I * h / 2.0;
    d.iter()
        .enumerate()
        .map(|(k, &dk)| {
            let mut acc = 2.0 * n * I / h * dk * (h / t.lambda).ln();
            for (j, &dj) in d.iter().enumerate() {
                if j != k {
                    let a = I * (dk - dj) / h;
                    acc += log_gamma(1.0 + a)? - log_gamma(1.0 - a)?;
                }
            }
            let integral = sol.integrate(|mu| 1.0 / (dk - mu + h2) + 1.0 / (dk - mu - h2));
            Ok(acc - integral / (2.0 * PI * I))
        })
        .collect()
}

pub fn zeta_j(sol: &NlieSolution) -> Result<Vec<C>> {
    Ok(log_zeta(sol)?.into_iter().map(|z| z.exp()).collect())
}

/// Power sums Σ τ^k, k = 1..kmax.
pub fn power_sums(sol: &NlieSolution, kmax: usize) -> Vec<C> {
    let h2 = I * sol.toda().hbar / 2.0;
    (1..=kmax)
        .map(|k| {
            let direct: C = sol.delta().iter().map(|d| d.powi(k as i32)).sum();
            if k == 1 {
                return direct;
            }
            let e = (k - 1) as i32;
            let integral = sol.integrate(|mu| (mu + h2).powi(e) - (mu - h2).powi(e));
            direct + integral * k as f64 / (2.0 * PI * I)
        })
        .collect()
}

/// Transfer polynomial t_δ and its roots τ(δ).
pub fn tau_from_delta(sol: &NlieSolution, kmax: usize) -> Result<SpectralData> {
    let n = sol.toda().n;
    if kmax < n {
        return Err(TodaError::Domain(format!("kmax = {kmax} is below the rank {n}")));
    }
    let p = power_sums(sol, n);
    let e = elementary_from_power_sums(&p);
    // t(λ) = Σ_k (-1)^k e_k λ^{N-k}
    let mut coeffs = vec![C::new(0.0, 0.0); n + 1];
    for (k, ek) in e.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[n - k] = ek * sign;
    }
    let charges = (2..=n).map(|k| coeffs[n - k]).collect();
    let tau = poly_roots(&Polynomial::new(coeffs))?;
    Ok(SpectralData {
        params: sol.toda(),
        tau,
        charges,
    })
}

/// Energy u = ½ Σ δ² + (ħ/2π) ∫ log(1 + X).
pub fn u_energy(sol: &NlieSolution) -> C {
    let h = sol.toda().hbar;
    0.5 * sol.delta().iter().map(|d| d * d).sum::<C>() + sol.integrate(|_| C::new(1.0, 0.0)) * h / (2.0 * PI)
}

impl BaxterPair for NlieSolution {
    fn params(&self) -> TodaParams {
        self.toda()
    }
    fn gamma_roots(&self) -> &[C] {
        self.delta()
    }
    fn wronskian_zeros(&self) -> &[C] {
        self.delta()
    }
    fn upper_factor(&self, lambda: C) -> Result<C> {
        self.v_up(lambda)
    }
    fn lower_factor(&self, lambda: C) -> Result<C> {
        self.v_down_shifted(lambda)
    }
    fn q_plus(&self, lambda: C) -> Result<C> {
        self.q_plus_delta(lambda)
    }
    fn q_minus(&self, lambda: C) -> Result<C> {
        self.q_minus_delta(lambda)
    }
    fn transfer(&self, lambda: C) -> C {
        self.spectral.t(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gutzwiller::{baxter_residual, hill_zeros, q_minus_tau, q_plus_tau, wronskian_of};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn params(n: usize, lambda: f64, delta: &[C]) -> NlieParams {
        NlieParams::new(TodaParams::new(n, 1.0, lambda), delta.to_vec())
    }

    fn sym(d: f64) -> Vec<C> {
        vec![c(d, 0.0), c(-d, 0.0)]
    }

    #[test]
    fn theta_examples() {
        let p = params(2, 0.3, &sym(0.4));
        let expect = (0.16f64 + 0.25).powi(2) / 0.3f64.powi(4);
        assert!((theta(c(0.0, 0.0), &p) - expect).norm() < 1e-10 * expect);
        let big = c(1e4, 0.0);
        assert!((theta(big, &p) * 0.3f64.powi(4) / big.powi(4) - 1.0).norm() < 1e-6);
        let q = params(3, 0.3, &[c(0.5, 0.1), c(0.5, -0.1), c(-1.0, 0.0)]);
        let m = c(0.3, 0.2);
        assert!((theta(m.conj(), &q) - theta(m, &q).conj()).norm() < 1e-12 * theta(m, &q).norm());
    }

    #[test]
    fn tiny_coupling_gives_vanishing_x() {
        let sol = solve_nlie(&params(2, 1e-4, &sym(0.3))).unwrap();
        assert!(sol.x_values().iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn small_coupling_first_order() {
        let p = params(2, 0.05, &sym(0.3));
        let sol = solve_nlie(&p).unwrap();
        for (x, &m) in sol.x_values().iter().zip(&sol.nodes.mu).step_by(97) {
            let first = 1.0 / theta(c(m, 0.0), &p);
            assert!((x / first - 1.0).norm() < 1e-3);
        }
    }

    #[test]
    fn fixed_point_and_contraction() {
        let mut p = params(2, 0.3, &sym(0.3));
        p.grid = GridSpec {
            m: 40.0,
            h: 0.05,
            tail_nodes: 40,
        };
        let sol = solve_nlie(&p).unwrap();
        assert!(sol.residual < 1e-10);
        for k in 3..sol.history.len() - 1 {
            assert!(sol.history[k + 1] <= 0.5 * sol.history[k] || sol.history[k + 1] < 1e-14);
        }
    }

    #[test]
    fn tail_decay_slope() {
        let sol = solve_nlie(&params(2, 0.3, &sym(0.3))).unwrap();
        let (a, b) = (4.0, 40.0);
        let xa = sol.x_at(c(a, 0.0)).norm();
        let xb = sol.x_at(c(b, 0.0)).norm();
        let slope = (xb / xa).ln() / (b / a).ln();
        assert!((slope + 4.0).abs() < 0.5, "{slope}");
    }

    #[test]
    fn v_limits() {
        let sol = solve_nlie(&params(2, 0.3, &sym(0.3))).unwrap();
        let far1 = (sol.v_up(c(100.0, 0.0)).unwrap() - 1.0).norm();
        let far2 = (sol.v_up(c(200.0, 0.0)).unwrap() - 1.0).norm();
        assert!(far1 < 1e-2 && (far1 / far2 - 2.0).abs() < 0.1);
        assert!(matches!(sol.v_up(c(0.2, -0.5)), Err(TodaError::ContourProximity(_))));
        assert!(matches!(sol.v_down_shifted(c(0.2, 0.5)), Err(TodaError::ContourProximity(_))));
        let zero = solve_nlie(&params(2, 1e-6, &sym(0.3))).unwrap();
        assert!((zero.v_up(c(0.1, 0.2)).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn q_delta_solve_same_baxter_equation() {
        let sol = solve_nlie(&params(2, 0.3, &sym(0.7))).unwrap();
        let t = sol.toda();
        for &l in &[c(0.15, 0.0), c(-0.4, 0.3), c(1.1, -0.6), c(0.2, -1.4), c(0.3, 1.7)] {
            let r = baxter_residual(l, |z| sol.transfer(z), |z| sol.q_plus_delta(z), &t).unwrap();
            assert!(r < 1e-8, "{l} {r}");
            let r = baxter_residual(l, |z| sol.transfer(z), |z| sol.q_minus_delta(z), &t).unwrap();
            assert!(r < 1e-8, "{l} {r}");
        }
    }

    #[test]
    fn wronskian_vanishes_at_delta() {
        for delta in [sym(0.7), vec![c(0.9, 0.0), c(-0.2, 0.0), c(-0.7, 0.0)]] {
            let n = delta.len();
            let sol = solve_nlie(&params(n, 0.3, &delta)).unwrap();
            for d in &delta {
                let (w, scale) = wronskian_of(&sol, *d).unwrap();
                assert!(w.norm() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn equivalence_with_determinant_construction() {
        let p = TodaParams::new(2, 1.0, 0.2);
        let s = SpectralData::from_tau(p, sym(0.7)).unwrap();
        let z = hill_zeros(&s).unwrap();
        let sol = solve_nlie(&NlieParams::new(p, z.delta.clone())).unwrap();
        for &l in &[c(0.1, 0.0), c(0.5, 0.3), c(0.3, -1.0), c(-0.9, -0.5), c(1.5, -1.15), c(0.2, 0.9)] {
            let a = q_plus_tau(l, &s).unwrap();
            let b = sol.q_plus_delta(l).unwrap();
            assert!((a - b).norm() < 1e-7 * a.norm(), "Q+ {l}");
            let a = q_minus_tau(l, &s).unwrap();
            let b = sol.q_minus_delta(l).unwrap();
            assert!((a - b).norm() < 1e-7 * a.norm(), "Q- {l}");
        }
        let back = hill_zeros(&sol.spectral).unwrap();
        for a in &back.delta {
            let best = z.delta.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-7, "{a}");
        }
    }

    #[test]
    fn zeta_matches_ratio_and_gutzwiller() {
        let sol = solve_nlie(&params(2, 0.3, &sym(0.6))).unwrap();
        let zeta = zeta_j(&sol).unwrap();
        for (d, z) in sol.delta().iter().zip(&zeta) {
            let ratio = sol.q_plus_delta(*d).unwrap() / sol.q_minus_delta(*d).unwrap();
            assert!((ratio - z).norm() < 1e-8 * z.norm());
        }
    }

    #[test]
    fn zeta_without_integral_at_tiny_coupling() {
        let lam = 1e-5;
        let sol = solve_nlie(&params(2, lam, &sym(0.4))).unwrap();
        let lz = log_zeta(&sol).unwrap();
        let a = I * 0.8;
        let expect = 4.0 * I * 0.4 * (1.0 / lam).ln() + log_gamma(1.0 + a).unwrap() - log_gamma(1.0 - a).unwrap();
        assert!((lz[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn energy_two_routes_and_reality() {
        let sol = solve_nlie(&params(2, 0.3, &sym(0.7))).unwrap();
        let u = u_energy(&sol);
        assert!((u + sol.spectral.charges[0]).norm() < 1e-8);
        assert!(u.im.abs() < 1e-10);
        let sum: C = sol.spectral.tau.iter().sum();
        assert!(sum.norm() < 1e-12);
        let zero = solve_nlie(&params(2, 1e-7, &sym(0.7))).unwrap();
        assert!((u_energy(&zero) - 0.49).norm() < 1e-12);
    }

    #[test]
    fn grid_refinement_stability() {
        let p = params(2, 0.3, &sym(0.6));
        let a = solve_nlie(&p).unwrap();
        let mut q = p.clone();
        q.grid.h /= 2.0;
        q.grid.m *= 2.0;
        let b = solve_nlie(&q).unwrap();
        assert!((u_energy(&a) - u_energy(&b)).norm() < 1e-8);
        for (x, y) in zeta_j(&a).unwrap().iter().zip(&zeta_j(&b).unwrap()) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn zeta_is_analytic_in_delta() {
        let base = vec![c(0.6, 0.05), c(-0.6, -0.05)];
        let f = |d: &[C]| zeta_j(&solve_nlie(&params(2, 0.3, d)).unwrap()).unwrap()[0];
        let e = 1e-5;
        let mut dr = base.clone();
        dr[0] += e;
        let mut dl = base.clone();
        dl[0] -= e;
        let mut ur = base.clone();
        ur[0] += I * e;
        let mut ul = base.clone();
        ul[0] -= I * e;
        let dx = (f(&dr) - f(&dl)) / (2.0 * e);
        let dy = (f(&ur) - f(&ul)) / (2.0 * e);
        // Cauchy-Riemann: ∂_y f = i ∂_x f
        assert!((dy - I * dx).norm() < 1e-6 * dx.norm());
    }

    #[test]
    fn rejects_wide_imaginary_parts() {
        let p = params(2, 0.3, &[c(0.3, 0.6), c(-0.3, -0.6)]);
        assert!(solve_nlie(&p).is_err());
    }

    #[test]
    fn rank_three_power_sum_of_first_order_is_delta_sum() {
        let d = vec![c(0.9, 0.0), c(-0.2, 0.0), c(-0.7, 0.0)];
        let sol = solve_nlie(&params(3, 0.3, &d)).unwrap();
        let p = power_sums(&sol, 3);
        assert!(p[0].norm() < 1e-15);
    }
}
