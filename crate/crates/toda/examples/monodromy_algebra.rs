//! Stokes data, the canonical monodromy M_0 and the connection criterion at a
//! quantized point and next to it.

use toda::monodromy_algebra::{char_poly, connection_e, is_quantized_e, monodromy_m0, stokes_matrix, MonodromyData};
use toda::nlie::{log_zeta, solve_nlie, NlieParams};
use toda::numerics::Polynomial;
use toda::quantize::{quantize, QuantizationProblem};

fn main() -> toda::Result<()> {
    let rec = quantize(&QuantizationProblem::level_n2(1.0, 0.3, 0))?;
    let d = MonodromyData::from_delta(&rec.delta_star, 1.0, Some(&rec.log_zeta))?;
    println!("sigma = {:?}", d.sigma);
    println!("Stokes constants s_i = {:?}", d.s);
    println!("S_0 = {}", stokes_matrix(0, &d)?);
    let m0 = monodromy_m0(&d);
    println!("M_0 = {m0}");
    println!("char poly {:?}", char_poly(&m0).coeffs);
    println!("prod (x - Sigma_j) {:?}", Polynomial::from_roots(&d.big_sigma).coeffs);

    let e = connection_e(&d)?;
    println!("E at the quantized point = {e}");
    println!("score {:.2e}", is_quantized_e(&e, 1e-5)?.score);

    let mut moved = rec.delta_star.clone();
    moved[0] += 1e-2;
    moved[1] -= 1e-2;
    let sol = solve_nlie(&NlieParams::new(rec.toda, moved.clone()))?;
    let d = MonodromyData::from_delta(&moved, 1.0, Some(&log_zeta(&sol)?))?;
    let q = is_quantized_e(&connection_e(&d)?, 1e-5)?;
    println!("score after shifting delta by 1e-2: {:.2e} (quantized: {})", q.score, q.quantized);
    Ok(())
}
