use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use toda::cli::{emit, error_report, exit_code, run, Command, ConfigOverrides, Format, Report, RunConfig, EXIT_NUMERICAL};
use toda::TodaError;

/// Quantum Toda spectrum and rank-N Mathieu oper monodromy.
///
/// Settings come from an optional JSON config file; every long flag overrides
/// the corresponding file value. Output goes to --output, else to
/// $TODA_OUT_DIR/<command>.<json|csv>, else to stdout.
#[derive(Parser)]
#[command(name = "toda", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Quantize the requested states and compare with the N=2 oracle.
    Spectrum,
    /// Map σ to the oper charges and check the ODE monodromy.
    RhMap,
    /// Stokes data, canonical monodromy and the connection criterion.
    Monodromy,
    /// Yang-Yang function and its derivative identities at δ.
    Yangyang,
    /// Run the invariant suite; exits 3 if any invariant fails.
    Verify,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Opts {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Rank N.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    hbar: Option<f64>,
    /// Coupling Λ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Quantum numbers as JSON, e.g. '[[0,0],[1,0]]'.
    #[arg(long, global = true)]
    modes: Option<String>,
    /// Exponents δ as JSON [re, im] pairs, e.g. '[[0.4,0],[-0.4,0]]'.
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Exponents σ as JSON [re, im] pairs.
    #[arg(long, global = true)]
    sigma: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_spectrum: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_monodromy: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_connection: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_derivative: Option<f64>,
    /// Finite-difference step of the derivative identities.
    #[arg(long, global = true, allow_negative_numbers = true)]
    fd_step: Option<f64>,
    /// NLIE grid half-width override.
    #[arg(long, global = true, allow_negative_numbers = true)]
    grid_m: Option<f64>,
    /// NLIE grid spacing override.
    #[arg(long, global = true, allow_negative_numbers = true)]
    grid_h: Option<f64>,
    /// NLIE tail quadrature nodes override.
    #[arg(long, global = true)]
    grid_tail_nodes: Option<usize>,
    /// Output file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Negate the first Stokes constant inside the verify suite.
    #[arg(long, global = true)]
    flip_stokes_sign: bool,
}

fn json_arg<T: serde::de::DeserializeOwned>(flag: &str, v: Option<String>) -> Result<Option<T>, TodaError> {
    v.map(|s| serde_json::from_str(&s).map_err(|e| TodaError::Config(format!("--{flag}: {e}"))))
        .transpose()
}

fn overrides(sub: Sub, o: Opts) -> Result<ConfigOverrides, TodaError> {
    let command = match sub {
        Sub::Spectrum => Command::Spectrum,
        Sub::RhMap => Command::RhMap,
        Sub::Monodromy => Command::Monodromy,
        Sub::Yangyang => Command::Yangyang,
        Sub::Verify => Command::Verify,
    };
    Ok(ConfigOverrides {
        command: Some(command),
        n: o.n,
        hbar: o.hbar,
        lambda: o.lambda,
        modes: json_arg::<Vec<Vec<i64>>>("modes", o.modes)?,
        delta: json_arg::<Vec<C>>("delta", o.delta)?,
        sigma: json_arg::<Vec<C>>("sigma", o.sigma)?,
        tol_spectrum: o.tol_spectrum,
        tol_monodromy: o.tol_monodromy,
        tol_connection: o.tol_connection,
        tol_derivative: o.tol_derivative,
        fd_step: o.fd_step,
        grid_m: o.grid_m,
        grid_h: o.grid_h,
        grid_tail_nodes: o.grid_tail_nodes,
        output: o.output,
        format: o.format.map(|f| match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }),
        flip_stokes_sign: o.flip_stokes_sign.then_some(true),
    })
}

fn configure(cli: Cli) -> Result<RunConfig, TodaError> {
    let mut cfg = match &cli.opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides(cli.command, cli.opts)?);
    Ok(cfg)
}

fn fail(cfg: Option<&RunConfig>, err: &TodaError) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&error_report(cfg, err)).unwrap_or_else(|_| err.to_string()));
    ExitCode::from(exit_code(err) as u8)
}

fn main() -> ExitCode {
    let cfg = match configure(Cli::parse()) {
        Ok(c) => c,
        Err(e) => return fail(None, &e),
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(Some(&cfg), &e),
    };
    let failures = out.failures;
    let written = Report::new(&cfg, out).and_then(|r| emit(&cfg, &r));
    match written {
        Err(e) => fail(Some(&cfg), &e),
        Ok(path) => {
            if let Some(p) = path {
                eprintln!("wrote {}", p.display());
            }
            if failures > 0 {
                eprintln!("{failures} check(s) failed");
                ExitCode::from(EXIT_NUMERICAL as u8)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
