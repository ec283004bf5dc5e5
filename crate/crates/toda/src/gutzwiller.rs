//! Baxter-equation solutions from the semi-infinite continuant determinants
//! K±, the quantum Wronskian, the Hill determinant and its zeros.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TodaError};
use crate::numerics::{poly_roots, rgamma, Polynomial};
use crate::TodaParams;

const I: C = C::new(0.0, 1.0);

/// Roots and conserved charges of the transfer-matrix polynomial t(λ).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralData {
    pub params: TodaParams,
    pub tau: Vec<C>,
    /// E_2..E_N, with t(λ) = λ^N + Σ_k E_k λ^{N-k} and E_1 = 0.
    pub charges: Vec<C>,
}

impl SpectralData {
    pub fn from_tau(params: TodaParams, tau: Vec<C>) -> Result<Self> {
        if tau.len() != params.n {
            return Err(TodaError::Domain(format!(
                "expected {} roots, got {}",
                params.n,
                tau.len()
            )));
        }
        let p = Polynomial::from_roots(&tau);
        let n = params.n;
        // coefficient of λ^{N-k} sits at index N-k
        let charges = (2..=n).map(|k| p.coeffs[n - k]).collect();
        Ok(Self { params, tau, charges })
    }

    pub fn from_charges(params: TodaParams, charges: Vec<C>) -> Result<Self> {
        let n = params.n;
        if charges.len() != n - 1 {
            return Err(TodaError::Domain(format!(
                "expected {} charges E_2..E_N, got {}",
                n - 1,
                charges.len()
            )));
        }
        let mut coeffs = vec![C::new(0.0, 0.0); n + 1];
        coeffs[n] = C::new(1.0, 0.0);
        for (k, e) in (2..=n).zip(&charges) {
            coeffs[n - k] = *e;
        }
        let tau = poly_roots(&Polynomial::new(coeffs))?;
        Ok(Self { params, tau, charges })
    }

    /// Sum of the roots (total momentum).
    pub fn momentum(&self) -> C {
        self.tau.iter().sum()
    }

    pub fn t(&self, lambda: C) -> C {
        self.tau.iter().fold(C::new(1.0, 0.0), |acc, r| acc * (lambda - r))
    }
}

/// Common interface of the two constructions of Baxter solutions.
pub trait BaxterPair {
    fn params(&self) -> TodaParams;
    /// Roots entering the Gamma factors (τ for the determinant form, δ for the NLIE form).
    fn gamma_roots(&self) -> &[C];
    /// Zeros δ_j of the quantum Wronskian.
    fn wronskian_zeros(&self) -> &[C];
    /// Regular factor of Q⁺: K₊(λ) or v↑(λ).
    fn upper_factor(&self, lambda: C) -> Result<C>;
    /// Regular factor of Q⁻: K₋(λ) or v↓(λ - iħ).
    fn lower_factor(&self, lambda: C) -> Result<C>;
    fn q_plus(&self, lambda: C) -> Result<C>;
    fn q_minus(&self, lambda: C) -> Result<C>;
    fn transfer(&self, lambda: C) -> C;
}

/// exp(i N λ/ħ log(ħ/Λ) - N π λ/ħ), the exponential prefactor of Q⁺.
pub fn plus_prefactor(p: &TodaParams, lambda: C) -> C {
    let n = p.n as f64;
    (I * n * lambda / p.hbar * (p.hbar / p.lambda).ln() - n * PI * lambda / p.hbar).exp()
}

/// exp(i N λ/ħ log(Λ/ħ) - N π λ/ħ), the exponential prefactor of Q⁻.
pub fn minus_prefactor(p: &TodaParams, lambda: C) -> C {
    let n = p.n as f64;
    (I * n * lambda / p.hbar * (p.lambda / p.hbar).ln() - n * PI * lambda / p.hbar).exp()
}

/// ∏ 1/Γ(1 - i(λ - r_k)/ħ).
pub fn upper_gammas(hbar: f64, roots: &[C], lambda: C) -> C {
    roots
        .iter()
        .map(|r| rgamma(1.0 - I * (lambda - r) / hbar))
        .product()
}

/// ∏ 1/Γ(1 + i(λ - r_k)/ħ).
pub fn lower_gammas(hbar: f64, roots: &[C], lambda: C) -> C {
    roots
        .iter()
        .map(|r| rgamma(1.0 + I * (lambda - r) / hbar))
        .product()
}

/// Distance from λ to the lattice {r_k + sign·i ħ m, m ≥ 1}; returns the smallest.
fn lattice_distance(hbar: f64, roots: &[C], lambda: C, sign: f64) -> f64 {
    let mut best = f64::INFINITY;
    for r in roots {
        let d = lambda - r;
        let m = (sign * d.im / hbar).round().max(1.0);
        best = best.min((d - sign * I * hbar * m).norm());
    }
    best
}

const POLE_GUARD: f64 = 1e-6;
const CIRCLE_RADIUS: f64 = 1e-2;
const CIRCLE_POINTS: usize = 24;

/// Mean over a small circle: exact for entire functions up to aliasing of the
/// 24th Taylor coefficient.
pub(crate) fn circle_mean(centre: C, f: impl Fn(C) -> Result<C>) -> Result<C> {
    let mut acc = C::new(0.0, 0.0);
    for k in 0..CIRCLE_POINTS {
        let z = centre + C::from_polar(CIRCLE_RADIUS, 2.0 * PI * (k as f64 + 0.5) / CIRCLE_POINTS as f64);
        acc += f(z)?;
    }
    Ok(acc / CIRCLE_POINTS as f64)
}

const MAX_DEPTH: usize = 1 << 17;
const K_TOL: f64 = 1e-13;

fn continuant(s: &SpectralData, lambda: C, depth: usize, sign: f64) -> C {
    let p = &s.params;
    let l2n = p.lambda.powi(2 * p.n as i32);
    let mut d1 = C::new(1.0, 0.0);
    let mut d2 = C::new(1.0, 0.0);
    let mut t_far = s.t(lambda + sign * I * p.hbar * (depth + 2) as f64);
    for k in (0..=depth).rev() {
        let t_near = s.t(lambda + sign * I * p.hbar * (k + 1) as f64);
        let d0 = d1 - d2 * l2n / (t_near * t_far);
        d2 = d1;
        d1 = d0;
        t_far = t_near;
    }
    d1
}

fn k_generic(lambda: C, s: &SpectralData, trunc: usize, sign: f64) -> Result<C> {
    let p = &s.params;
    if p.lambda == 0.0 {
        return Ok(C::new(1.0, 0.0));
    }
    let dist = lattice_distance(p.hbar, &s.tau, lambda, -sign);
    if dist < 1e-8 {
        return Err(TodaError::PoleProximity {
            what: if sign > 0.0 { "k_plus" } else { "k_minus" },
            point: lambda,
            distance: dist,
        });
    }
    let mut depth = trunc.max(1);
    let mut prev = continuant(s, lambda, depth, sign);
    while depth < MAX_DEPTH {
        depth *= 2;
        let next = continuant(s, lambda, depth, sign);
        if (next - prev).norm() <= K_TOL * next.norm().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(TodaError::non_convergence(
        "continuant",
        format!("no convergence at depth {MAX_DEPTH} for λ = {lambda}"),
    ))
}

/// K₊(λ) by backward recursion of the continuant, doubling the depth from `trunc`.
pub fn k_plus(lambda: C, s: &SpectralData, trunc: usize) -> Result<C> {
    k_generic(lambda, s, trunc, 1.0)
}

/// K₋(λ), mirror of [`k_plus`] with poles at τ_k + iħn.
pub fn k_minus(lambda: C, s: &SpectralData, trunc: usize) -> Result<C> {
    k_generic(lambda, s, trunc, -1.0)
}

pub const DEFAULT_TRUNC: usize = 64;

/// Q⁺ from the determinant construction.
pub fn q_plus_tau(lambda: C, s: &SpectralData) -> Result<C> {
    let p = &s.params;
    if lattice_distance(p.hbar, &s.tau, lambda, -1.0) < POLE_GUARD {
        return circle_mean(lambda, |z| q_plus_tau(z, s));
    }
    Ok(plus_prefactor(p, lambda)
        * k_plus(lambda, s, DEFAULT_TRUNC)?
        * upper_gammas(p.hbar, &s.tau, lambda))
}

/// Q⁻ from the determinant construction.
pub fn q_minus_tau(lambda: C, s: &SpectralData) -> Result<C> {
    let p = &s.params;
    if lattice_distance(p.hbar, &s.tau, lambda, 1.0) < POLE_GUARD {
        return circle_mean(lambda, |z| q_minus_tau(z, s));
    }
    Ok(minus_prefactor(p, lambda)
        * k_minus(lambda, s, DEFAULT_TRUNC)?
        * lower_gammas(p.hbar, &s.tau, lambda))
}

/// Residual of the Baxter equation relative to the size of its terms.
pub fn baxter_residual(lambda: C, t: impl Fn(C) -> C, q: impl Fn(C) -> Result<C>, p: &TodaParams) -> Result<f64> {
    let n = p.n as i32;
    let ln = p.lambda.powi(n);
    let lhs = t(lambda) * q(lambda)?;
    let up = I.powi(n) * q(lambda + I * p.hbar)? * ln;
    let down = I.powi(-n) * q(lambda - I * p.hbar)? * ln;
    let scale = lhs.norm() + up.norm() + down.norm();
    Ok((lhs - up - down).norm() / scale)
}

/// Q⁺(λ)Q⁻(λ+iħ) - Q⁻(λ)Q⁺(λ+iħ) for any pair of Baxter solutions.
pub fn wronskian_of(b: &dyn BaxterPair, lambda: C) -> Result<(C, f64)> {
    let h = b.params().hbar;
    let a = b.q_plus(lambda)? * b.q_minus(lambda + I * h)?;
    let c = b.q_minus(lambda)? * b.q_plus(lambda + I * h)?;
    Ok((a - c, a.norm() + c.norm()))
}

/// Quantum Wronskian of the determinant-built solutions.
pub fn quantum_wronskian(lambda: C, s: &SpectralData) -> Result<C> {
    let h = s.params.hbar;
    Ok(q_plus_tau(lambda, s)? * q_minus_tau(lambda + I * h, s)?
        - q_minus_tau(lambda, s)? * q_plus_tau(lambda + I * h, s)?)
}

/// W(λ)·(iπΛ e^{2πλ/ħ}/ħ)^N = H(λ) ∏ sinh(π(λ-τ_k)/ħ); entire in λ.
pub fn scaled_wronskian(lambda: C, s: &SpectralData) -> Result<C> {
    let p = &s.params;
    let f = I * PI * p.lambda * (2.0 * PI * lambda / p.hbar).exp() / p.hbar;
    Ok(quantum_wronskian(lambda, s)? * f.powi(p.n as i32))
}

fn sinh_product(hbar: f64, roots: &[C], lambda: C) -> C {
    roots
        .iter()
        .map(|r| (PI * (lambda - r) / hbar).sinh())
        .product()
}

/// Hill determinant through the Wronskian factorization.
pub fn hill_determinant(lambda: C, s: &SpectralData) -> Result<C> {
    let p = &s.params;
    if p.lambda == 0.0 {
        return Ok(C::new(1.0, 0.0));
    }
    let den = sinh_product(p.hbar, &s.tau, lambda);
    if den.norm() < 1e-10 {
        // H has simple poles on the τ lattice
        return Err(TodaError::PoleProximity {
            what: "hill_determinant",
            point: lambda,
            distance: den.norm(),
        });
    }
    Ok(scaled_wronskian(lambda, s)? / den)
}

/// Hill determinant as a truncated (2K+1)-row tridiagonal continuant.
pub fn hill_determinant_direct(lambda: C, s: &SpectralData, k: usize) -> C {
    let p = &s.params;
    let l2n = p.lambda.powi(2 * p.n as i32);
    let t = |m: i64| s.t(lambda + I * p.hbar * m as f64);
    let k = k as i64;
    let mut f_prev = C::new(1.0, 0.0);
    let mut f = C::new(1.0, 0.0);
    let mut t_prev = t(-k);
    for m in (-k + 1)..=k {
        let t_m = t(m);
        let next = f - f_prev * l2n / (t_prev * t_m);
        f_prev = f;
        f = next;
        t_prev = t_m;
    }
    f
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroSource {
    FromTau,
    FromDeltaInput,
}

/// Zeros of the Hill determinant paired with the seeds τ_j, and ζ_j = Q⁺(δ_j)/Q⁻(δ_j).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HillZeros {
    pub delta: Vec<C>,
    /// Absent at Λ = 0 where Q± are not defined.
    pub zeta: Option<Vec<C>>,
    pub source: ZeroSource,
}

fn newton_scalar(f: impl Fn(C) -> Result<C>, x0: C) -> Result<C> {
    let mut x = x0;
    for _ in 0..60 {
        let e = 1e-6 * x.norm().max(1.0);
        let d = (f(x + e)? - f(x - e)?) / (2.0 * e);
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(TodaError::SingularJacobian(vec![x]));
        }
        let step = f(x)? / d;
        x -= step;
        if !x.is_finite() {
            break;
        }
        if step.norm() < 1e-15 * x.norm().max(1.0) {
            return Ok(x);
        }
    }
    Err(TodaError::non_convergence("hill_zeros", format!("Newton from {x0}")))
}

/// Newton refinement of Wronskian zeros from the given seeds (one zero per seed).
pub fn refine_zeros(s: &SpectralData, seeds: &[C]) -> Result<Vec<C>> {
    let mut out: Vec<C> = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let z = newton_scalar(|l| scaled_wronskian(l, s), seed)?;
        if (z - seed).norm() > 0.25 * s.params.hbar {
            return Err(TodaError::non_convergence("hill_zeros", "zero drifted from its seed"));
        }
        if out.iter().any(|o| (o - z).norm() < 1e-6) {
            return Err(TodaError::Collision(format!("Hill zeros coincide near {z}")));
        }
        out.push(z);
    }
    Ok(out)
}

/// Zeros δ_j of the Hill determinant, Newton-seeded at τ_j with Λ-continuation as fallback.
pub fn hill_zeros(s: &SpectralData) -> Result<HillZeros> {
    let p = s.params;
    if p.lambda == 0.0 {
        return Ok(HillZeros {
            delta: s.tau.clone(),
            zeta: None,
            source: ZeroSource::FromTau,
        });
    }
    let delta = match refine_zeros(s, &s.tau) {
        Ok(d) => d,
        Err(_) => {
            let mut seeds = s.tau.clone();
            let steps = (p.lambda / 0.05).ceil() as usize;
            for k in 1..=steps {
                let lam = (k as f64 * 0.05).min(p.lambda);
                let sk = SpectralData {
                    params: TodaParams { lambda: lam, ..p },
                    ..s.clone()
                };
                seeds = refine_zeros(&sk, &seeds)?;
            }
            seeds
        }
    };
    for a in 0..delta.len() {
        for b in a + 1..delta.len() {
            if (delta[a] - delta[b]).norm() < 1e-6 {
                return Err(TodaError::Collision(format!("δ_{a} ≈ δ_{b}")));
            }
        }
    }
    let zeta = delta
        .iter()
        .map(|&d| Ok(q_plus_tau(d, s)? / q_minus_tau(d, s)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(HillZeros {
        delta,
        zeta: Some(zeta),
        source: ZeroSource::FromTau,
    })
}

/// Determinant-built Baxter pair with its Wronskian zeros.
#[derive(Clone, Debug)]
pub struct Gutzwiller {
    pub spectral: SpectralData,
    pub zeros: HillZeros,
}

impl Gutzwiller {
    pub fn new(spectral: SpectralData) -> Result<Self> {
        let zeros = hill_zeros(&spectral)?;
        Ok(Self { spectral, zeros })
    }

    /// Pair with externally supplied δ (e.g. from the NLIE), skipping the zero search.
    pub fn with_zeros(spectral: SpectralData, delta: Vec<C>) -> Result<Self> {
        let zeta = delta
            .iter()
            .map(|&d| Ok(q_plus_tau(d, &spectral)? / q_minus_tau(d, &spectral)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spectral,
            zeros: HillZeros {
                delta,
                zeta: Some(zeta),
                source: ZeroSource::FromDeltaInput,
            },
        })
    }
}

impl BaxterPair for Gutzwiller {
    fn params(&self) -> TodaParams {
        self.spectral.params
    }
    fn gamma_roots(&self) -> &[C] {
        &self.spectral.tau
    }
    fn wronskian_zeros(&self) -> &[C] {
        &self.zeros.delta
    }
    fn upper_factor(&self, lambda: C) -> Result<C> {
        k_plus(lambda, &self.spectral, DEFAULT_TRUNC)
    }
    fn lower_factor(&self, lambda: C) -> Result<C> {
        k_minus(lambda, &self.spectral, DEFAULT_TRUNC)
    }
    fn q_plus(&self, lambda: C) -> Result<C> {
        q_plus_tau(lambda, &self.spectral)
    }
    fn q_minus(&self, lambda: C) -> Result<C> {
        q_minus_tau(lambda, &self.spectral)
    }
    fn transfer(&self, lambda: C) -> C {
        self.spectral.t(lambda)
    }
}
