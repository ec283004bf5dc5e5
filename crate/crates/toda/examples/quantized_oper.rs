//! Reflection symmetry and Fourier duality of the oper at a quantized point,
//! and their failure after a small shift of the exponents.

use toda::oper::{antiholomorphic_symmetry_check, fourier_duality_check, OperInstance};
use toda::quantize::{quantize, solution_for, QuantizationProblem};

fn main() -> toda::Result<()> {
    let rec = quantize(&QuantizationProblem::level_n2(1.0, 0.3, 0))?;
    let z: Vec<f64> = (0..10).map(|k| 0.2 * 25f64.powf(k as f64 / 9.0)).collect();

    let (_, pair) = OperInstance::from_record(&rec)?;
    let on = antiholomorphic_symmetry_check(&pair, &z)?;
    let (_, moved) = OperInstance::perturbed_record(&rec, 0, 1e-2)?;
    let off = antiholomorphic_symmetry_check(&moved, &z)?;
    println!("reflection spread: quantized {:.2e}, shifted {:.2e}", on.spread, off.spread);
    println!("decay-ratio spread: quantized {:.2e}, shifted {:.2e}", on.decay_spread, off.decay_spread);

    let f = fourier_duality_check(&rec, &solution_for(&rec)?)?;
    println!("x,deviation");
    for (x, d) in f.x.iter().zip(&f.deviations) {
        println!("{x},{d:.3e}");
    }
    println!("oper residual of the transform {:.2e}", f.oper_residual);
    println!("same residual for Q+ alone {:.2e}", f.discrimination_residual);
    Ok(())
}
