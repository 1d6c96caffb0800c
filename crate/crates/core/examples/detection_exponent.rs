//! The operator's likelihood ratio test on a scalar system: calibrated
//! false-alarm rate, miss rate and the empirical miss exponent.

use stealthbound::detection::{error_exponent_estimate, DEFAULT_EPSILON};
use stealthbound::gaussian::DerivedCovariances;
use stealthbound::linalg::Matrix;

fn main() -> stealthbound::Result<()> {
    let derived = DerivedCovariances {
        sigma_yy: Matrix::from_element(1, 1, 1.0),
        sigma_yaya: Matrix::from_element(1, 1, 2.0),
    };
    let rep = error_exponent_estimate(&derived, &[5, 10, 20, 50, 100, 200], DEFAULT_EPSILON, 100_000, 3)?;
    println!("D(P_YA || P_Y) = {:.4}", rep.kl_attacked_nominal);
    println!("D(P_Y || P_YA) = {:.4}", rep.kl_nominal_attacked);
    println!("{:>5} {:>9} {:>9} {:>10} {:>10}", "n", "alpha", "beta", "exponent", "+/-");
    for p in &rep.points {
        let e = &p.experiment;
        match (p.exponent, p.radius) {
            (Some(x), Some(r)) => println!("{:>5} {:>9.4} {:>9.2e} {x:>10.4} {r:>10.4}", p.n, e.alpha_hat, e.beta_hat),
            _ => println!("{:>5} {:>9.4} {:>9} {:>10}", p.n, e.alpha_hat, 0, "n/a"),
        }
    }
    Ok(())
}
