//! Lowest N=2 levels against the Schrödinger oracle, and the N=3 ground state.

use toda::quantize::{oracle_spectrum_n2, quantize, QuantizationProblem};
use toda::TodaParams;

fn main() -> toda::Result<()> {
    println!("lambda level u_pipeline u_oracle rel_dev");
    for lambda in [0.3, 0.15] {
        for level in 0..3 {
            let rec = quantize(&QuantizationProblem::level_n2(1.0, lambda, level))?;
            let oracle = oracle_spectrum_n2(1.0, lambda, level)?;
            println!(
                "{lambda} {level} {:.12} {oracle:.12} {:.2e}",
                rec.u.re,
                (rec.u.re - oracle).abs() / oracle
            );
        }
    }
    let rec = quantize(&QuantizationProblem::new(TodaParams::new(3, 1.0, 0.3), vec![0, 0, 0]))?;
    println!("N=3 ground state: E = {:?}", rec.energies);
    println!("  delta* = {:?}", rec.delta_star);
    println!("  |prod zeta - 1| = {:.2e}, zeta spread = {:.2e}", (rec.zeta_product() - 1.0).norm(), rec.zeta_spread);
    Ok(())
}
