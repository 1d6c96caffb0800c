//! Monte Carlo ergodic cost of an attacker that only sees `K` training
//! samples of the state.
//!
//! ```text
//! cargo run --release --example learned_attack [seed]
//! ```

use stealthbound::experiment::fig1_config;
use stealthbound::learning::{estimate_ergodic_cost, Sampler, TrainingConfig};

fn main() -> stealthbound::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let setup = fig1_config(0.8, "out".as_ref(), 1000, seed).build_setup()?;
    println!("optimal cost f* = {:.5}", setup.optimal_cost());
    println!("{:>7} {:>10} {:>9} {:>10}", "K", "mean", "stderr", "sampler");
    for k in [50, 200, 1000, 10_000] {
        for sampler in [Sampler::Bartlett, Sampler::Empirical] {
            let cfg = TrainingConfig::new(k, seed).with_trials(400).with_sampler(sampler);
            let est = estimate_ergodic_cost(setup.h(), &setup.sigma_xx, setup.sigma(), &cfg)?;
            println!("{k:>7} {:>10.5} {:>9.5} {:>10?}", est.mean, est.stderr, sampler);
        }
    }
    Ok(())
}
