//! Yang-Yang function and its two derivative identities.

use num_complex::Complex64 as C;
use toda::nlie::{solve_nlie, NlieParams};
use toda::yangyang::{generating_function_s, grad_delta_check, lambda_derivative_check, sigma_from_delta, yang_yang};
use toda::TodaParams;

fn main() -> toda::Result<()> {
    let p = NlieParams::new(
        TodaParams::new(3, 1.0, 0.3),
        vec![C::new(0.8, 0.0), C::new(-0.1, 0.05), C::new(-0.7, -0.05)],
    );
    let y = yang_yang(&solve_nlie(&p)?)?;
    println!("Y = {} (perturbative {}, instanton {})", y.total, y.y_pert, y.y_inst);

    let g = grad_delta_check(&p, 1e-4)?;
    for (fd, an) in g.finite_difference.iter().zip(&g.analytic) {
        println!("dY/d delta_k = {fd:.10}   log zeta_k = {an:.10}");
    }
    println!("gradient deviation {:.2e}", g.max_deviation);
    let l = lambda_derivative_check(&p, 1e-4)?;
    println!("coupling derivative {:.10} vs u {:.10} ({:.2e})", l.finite_difference[0], l.analytic[0], l.max_deviation);

    let sigma = sigma_from_delta(1.0, &p.delta);
    let s = generating_function_s(&sigma, p.toda)?;
    println!("S(sigma) = {}, eta = {:?}", s.s, s.eta);
    Ok(())
}
