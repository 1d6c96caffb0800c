//! The optimal Gaussian stealth attack across SNR, with its cost split into
//! mutual information and detectability.

use stealthbound::gaussian::{
    derived_covariances, gaussian_kl_marginals, gaussian_mutual_information, optimal_attack_covariance,
    sigma_from_snr, stealth_cost, toeplitz_covariance,
};
use stealthbound::grid::{build_dc_jacobian, ieee30};

fn main() -> stealthbound::Result<()> {
    let h = build_dc_jacobian(&ieee30(), Default::default())?.h;
    println!("{:>5} {:>6} {:>10} {:>10} {:>10}", "rho", "snr", "f*", "I(X;Y_A)", "D");
    for rho in [0.1, 0.8] {
        let sxx = toeplitz_covariance(h.ncols(), rho)?;
        let attack = optimal_attack_covariance(&h, &sxx)?;
        for snr_db in [0.0, 10.0, 20.0, 30.0] {
            let sigma = sigma_from_snr(&h, &sxx, snr_db)?;
            let derived = derived_covariances(&h, &sxx, sigma, &attack)?;
            let f = stealth_cost(&attack, &derived, sigma)?;
            let i = gaussian_mutual_information(&attack, &derived, sigma)?;
            let d = gaussian_kl_marginals(&derived)?;
            println!("{rho:>5} {snr_db:>6} {f:>10.5} {i:>10.5} {d:>10.5}");
        }
    }
    Ok(())
}
