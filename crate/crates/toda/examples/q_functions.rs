//! Baxter Q-functions from the continuant determinant and from the NLIE.

use num_complex::Complex64 as C;
use toda::gutzwiller::{hill_zeros, q_minus_tau, q_plus_tau, wronskian_of, SpectralData};
use toda::nlie::{solve_nlie, zeta_j, NlieParams};
use toda::TodaParams;

fn main() -> toda::Result<()> {
    let p = TodaParams::new(3, 1.0, 0.3);
    let tau = vec![C::new(-1.0, 0.0), C::new(0.3, 0.0), C::new(0.7, 0.0)];
    let s = SpectralData::from_tau(p, tau)?;
    let zeros = hill_zeros(&s)?;
    println!("Wronskian zeros delta = {:?}", zeros.delta);

    let sol = solve_nlie(&NlieParams::new(p, zeros.delta.clone()))?;
    println!("NLIE: {} iterations, residual {:.2e}", sol.iterations, sol.residual);
    println!("charges from NLIE {:?}", sol.spectral.charges);
    println!("charges from tau  {:?}", s.charges);

    println!("lambda |Q+ det - Q+ nlie|/|Q+| |Q- det - Q- nlie|/|Q-|");
    for l in [C::new(0.1, 0.0), C::new(0.5, 0.3), C::new(-0.9, -0.5), C::new(1.2, 0.9)] {
        let (a, b) = (q_plus_tau(l, &s)?, sol.q_plus_delta(l)?);
        let (c, d) = (q_minus_tau(l, &s)?, sol.q_minus_delta(l)?);
        println!("{l} {:.2e} {:.2e}", (a - b).norm() / a.norm(), (c - d).norm() / c.norm());
    }
    for d in sol.delta() {
        let (w, scale) = wronskian_of(&sol, *d)?;
        println!("W(delta={d:.4}) / scale = {:.2e}", w.norm() / scale);
    }
    println!("zeta_j = {:?}", zeta_j(&sol)?);
    Ok(())
}
