use std::path::{Path, PathBuf};

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TodaError};
use crate::nlie::GridSpec;
use crate::TodaParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    RhMap,
    Monodromy,
    Yangyang,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::RhMap => "rh-map",
            Command::Monodromy => "monodromy",
            Command::Yangyang => "yangyang",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Acceptance of the quantization residual and of the N = 2 oracle comparison.
    pub spectrum: f64,
    /// Eigenvalue mismatch of the ODE round trip.
    pub monodromy: f64,
    /// Proportionality score of the connection matrix.
    pub connection: f64,
    /// Finite-difference step of the derivative identities.
    pub fd_step: f64,
    /// Deviation allowed in the derivative identities.
    pub derivative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: 1e-6,
            monodromy: 1e-6,
            connection: 1e-5,
            fd_step: 1e-4,
            derivative: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverride {
    pub m: Option<f64>,
    pub h: Option<f64>,
    pub tail_nodes: Option<usize>,
}

impl GridOverride {
    pub fn is_empty(&self) -> bool {
        self.m.is_none() && self.h.is_none() && self.tail_nodes.is_none()
    }

    pub fn apply(&self, g: GridSpec) -> GridSpec {
        GridSpec {
            m: self.m.unwrap_or(g.m),
            h: self.h.unwrap_or(g.h),
            tail_nodes: self.tail_nodes.unwrap_or(g.tail_nodes),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Destination file; stdout (or $TODA_OUT_DIR/<command>.<ext>) when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Fault injection used to demonstrate that the verify suite can fail.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DebugHooks {
    /// Negate s_1 before building M_0 in the characteristic-polynomial invariant.
    pub flip_stokes_sign: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub n: usize,
    pub hbar: f64,
    pub lambda: f64,
    /// Quantum numbers, one vector of length N per requested state.
    pub modes: Vec<Vec<i64>>,
    pub delta: Option<Vec<C>>,
    pub sigma: Option<Vec<C>>,
    pub tolerances: Tolerances,
    pub grid: GridOverride,
    pub output: OutputSpec,
    pub debug: DebugHooks,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            n: 2,
            hbar: 1.0,
            lambda: 0.3,
            modes: Vec::new(),
            delta: None,
            sigma: None,
            tolerances: Tolerances::default(),
            grid: GridOverride::default(),
            output: OutputSpec::default(),
            debug: DebugHooks::default(),
        }
    }
}

/// Long-flag values; each present field replaces the file value.
#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub hbar: Option<f64>,
    pub lambda: Option<f64>,
    pub modes: Option<Vec<Vec<i64>>>,
    pub delta: Option<Vec<C>>,
    pub sigma: Option<Vec<C>>,
    pub tol_spectrum: Option<f64>,
    pub tol_monodromy: Option<f64>,
    pub tol_connection: Option<f64>,
    pub tol_derivative: Option<f64>,
    pub fd_step: Option<f64>,
    pub grid_m: Option<f64>,
    pub grid_h: Option<f64>,
    pub grid_tail_nodes: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub flip_stokes_sign: Option<bool>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| TodaError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TodaError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: ConfigOverrides) {
        if o.command.is_some() {
            self.command = o.command;
        }
        set(&mut self.n, o.n);
        set(&mut self.hbar, o.hbar);
        set(&mut self.lambda, o.lambda);
        set(&mut self.modes, o.modes);
        if o.delta.is_some() {
            self.delta = o.delta;
        }
        if o.sigma.is_some() {
            self.sigma = o.sigma;
        }
        set(&mut self.tolerances.spectrum, o.tol_spectrum);
        set(&mut self.tolerances.monodromy, o.tol_monodromy);
        set(&mut self.tolerances.connection, o.tol_connection);
        set(&mut self.tolerances.derivative, o.tol_derivative);
        set(&mut self.tolerances.fd_step, o.fd_step);
        if o.grid_m.is_some() {
            self.grid.m = o.grid_m;
        }
        if o.grid_h.is_some() {
            self.grid.h = o.grid_h;
        }
        if o.grid_tail_nodes.is_some() {
            self.grid.tail_nodes = o.grid_tail_nodes;
        }
        if o.output.is_some() {
            self.output.path = o.output;
        }
        set(&mut self.output.format, o.format);
        set(&mut self.debug.flip_stokes_sign, o.flip_stokes_sign);
    }

    pub fn params(&self) -> TodaParams {
        TodaParams::new(self.n, self.hbar, self.lambda)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TodaError::Config(m));
        if self.command.is_none() {
            return bad("no command given".into());
        }
        self.params().validate()?;
        let t = &self.tolerances;
        for (name, v) in [
            ("spectrum", t.spectrum),
            ("monodromy", t.monodromy),
            ("connection", t.connection),
            ("fd_step", t.fd_step),
            ("derivative", t.derivative),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        for m in &self.modes {
            if m.len() != self.n {
                return bad(format!("mode vector {m:?} must have {} entries", self.n));
            }
        }
        if self.delta.is_some() && self.sigma.is_some() {
            return bad("give either delta or sigma, not both".into());
        }
        if let Some(v) = self.delta.as_ref().or(self.sigma.as_ref()) {
            if v.len() != self.n {
                return bad(format!("expected {} exponents, got {}", self.n, v.len()));
            }
            let total: C = v.iter().sum();
            if total.norm() > 1e-10 * v.iter().map(|x| x.norm()).sum::<f64>().max(1.0) {
                return bad(format!("exponents must sum to zero, got {total}"));
            }
        }
        if let Some(s) = self.sigma_input() {
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    let d = s[a] - s[b];
                    if d.im.abs() < 1e-8 && (d.re - d.re.round()).abs() < 1e-8 {
                        return bad(format!("σ collision: σ_{} - σ_{} = {d} is an integer", a + 1, b + 1));
                    }
                }
            }
        }
        let g = &self.grid;
        if g.m.is_some_and(|m| !(m > 0.0)) || g.h.is_some_and(|h| !(h > 0.0)) || g.tail_nodes == Some(0) {
            return bad("grid overrides must be positive".into());
        }
        Ok(())
    }

    /// σ from either exponent field (δ = -iħσ).
    pub fn sigma_input(&self) -> Option<Vec<C>> {
        let i = C::new(0.0, 1.0);
        match (&self.sigma, &self.delta) {
            (Some(s), _) => Some(s.clone()),
            (None, Some(d)) => Some(d.iter().map(|x| i * x / self.hbar).collect()),
            _ => None,
        }
    }

    /// δ from either exponent field.
    pub fn delta_input(&self) -> Option<Vec<C>> {
        let i = C::new(0.0, 1.0);
        match (&self.delta, &self.sigma) {
            (Some(d), _) => Some(d.clone()),
            (None, Some(s)) => Some(s.iter().map(|x| -i * self.hbar * x).collect()),
            _ => None,
        }
    }

    /// Requested states, defaulting to the ground state.
    pub fn mode_list(&self) -> Vec<Vec<i64>> {
        if self.modes.is_empty() {
            vec![vec![0; self.n]]
        } else {
            self.modes.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_wins_over_file() {
        let mut cfg = RunConfig::from_json(r#"{"command": "spectrum", "lambda": 0.15, "tolerances": {"spectrum": 1e-7}}"#).unwrap();
        cfg.apply(ConfigOverrides {
            lambda: Some(0.3),
            ..Default::default()
        });
        assert_eq!(cfg.lambda, 0.3);
        assert_eq!(cfg.tolerances.spectrum, 1e-7);
        assert_eq!(cfg.command, Some(Command::Spectrum));
    }

    #[test]
    fn validation_errors_are_config_errors() {
        for text in [
            r#"{"command": "spectrum", "lambda": -1}"#,
            r#"{"command": "spectrum", "n": 1}"#,
            r#"{"command": "rh-map", "sigma": [[0.25, 0], [0.25, 0]]}"#,
            r#"{"command": "rh-map", "sigma": [[0.2, 0], [0.1, 0]]}"#,
            r#"{"command": "spectrum", "tolerances": {"spectrum": 0}}"#,
            r#"{"command": "spectrum", "bogus": 1}"#,
        ] {
            let err = RunConfig::from_json(text).and_then(|c| c.validate()).unwrap_err();
            assert!(err.is_config(), "{text}: {err}");
        }
    }

    #[test]
    fn exponent_conversion() {
        let cfg = RunConfig {
            hbar: 2.0,
            delta: Some(vec![C::new(0.4, 0.0), C::new(-0.4, 0.0)]),
            ..Default::default()
        };
        let s = cfg.sigma_input().unwrap();
        assert!((s[0] - C::new(0.0, 0.2)).norm() < 1e-15);
    }
}
