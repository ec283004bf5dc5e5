//! Maximal-decay solution along the positive real axis divided by its leading
//! asymptotic form, written as CSV (u, ratio, deviation) for plotting.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use toda::gutzwiller::{Gutzwiller, SpectralData};
use toda::oper::{chi_max_decay, FloquetBasis, Side};
use toda::TodaParams;

fn main() -> toda::Result<()> {
    let (n, lambda) = (3usize, 0.3f64);
    let nf = n as f64;
    let tau = [-1.0, 0.3, 0.7].map(|t| C::new(t, 0.0)).to_vec();
    let pair = Gutzwiller::new(SpectralData::from_tau(TodaParams::new(n, 1.0, lambda), tau)?)?;
    let basis = FloquetBasis::new(&pair, Side::Infinity, -64, 64)?;
    println!("u,ratio_re,ratio_im,deviation,deviation_times_u_1_over_n");
    for k in 0..16 {
        let u = 5.0 * 10f64.powf(k as f64 / 5.0);
        let x = C::new(u.ln() - nf * lambda.ln(), 0.0);
        let chi = chi_max_decay(&basis, x)?.value;
        let lead = ((2.0 * PI).powf(nf - 1.0) / nf).sqrt() * (-nf * u.powf(1.0 / nf)).exp() * u.powf(-(nf - 1.0) / (2.0 * nf));
        let ratio = chi * (C::new(0.0, PI)).powi(n as i32) / lead;
        let dev = (ratio - 1.0).norm();
        println!("{u},{},{},{dev},{}", ratio.re, ratio.im, dev * u.powf(1.0 / nf));
    }
    Ok(())
}
