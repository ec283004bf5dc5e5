//! Runs the invariant suite and prints one line per invariant.

use toda::cli::{run_suite, VerifyOptions, DEFAULT_SEED};

fn main() {
    let results = run_suite(&VerifyOptions {
        seed: DEFAULT_SEED,
        ..Default::default()
    });
    for r in &results {
        let tag = if r.passed { "ok  " } else { "FAIL" };
        println!("{tag} {:<40} {:<18} {:.3e} (tol {:.0e})", r.name, r.module, r.measured, r.tolerance);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} invariants, {failed} failed", results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
