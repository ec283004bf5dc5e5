//! Riemann-Hilbert map sigma -> oper charges, checked by integrating the oper
//! around the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use toda::nlie::{solve_nlie, NlieParams};
use toda::numerics::relative_multiset_distance;
use toda::oper::{ode_monodromy, OperInstance};
use toda::yangyang::delta_from_sigma;
use toda::TodaParams;

fn main() -> toda::Result<()> {
    let i = C::new(0.0, 1.0);
    for (n, sigma) in [
        (2, vec![C::new(0.0, 0.4), C::new(0.0, -0.4)]),
        (3, vec![C::new(0.0, 0.8), C::new(-0.05, -0.1), C::new(0.05, -0.7)]),
    ] {
        let p = TodaParams::new(n, 1.0, 0.3);
        let delta = delta_from_sigma(p.hbar, &sigma);
        let sol = solve_nlie(&NlieParams::new(p, delta))?;
        let inst = OperInstance::from_charges(p, sol.spectral.charges.clone())?;
        let rep = ode_monodromy(&inst, 0.0)?;
        let expected: Vec<C> = sigma.iter().map(|s| (2.0 * PI * i * s).exp()).collect();
        println!("N={n} charges {:?}", sol.spectral.charges);
        println!("  monodromy eigenvalues {:?}", rep.eigenvalues);
        println!("  exp(2 pi i sigma)     {:?}", expected);
        println!(
            "  mismatch {:.2e}, |det - 1| {:.2e}, {} steps",
            relative_multiset_distance(&rep.eigenvalues, &expected),
            (rep.det - 1.0).norm(),
            rep.steps
        );
    }
    Ok(())
}
