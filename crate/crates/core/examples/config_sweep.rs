//! Run a sweep described by a TOML file.
//!
//! ```text
//! cargo run --release --example config_sweep -- crates/core/examples/sweep.toml
//! ```

use stealthbound::experiment::{run_experiment, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sweep.toml").into());
    let config = ExperimentConfig::from_toml_file(&path)?;
    let rep = run_experiment(&config)?;
    println!("m = {}, n = {}, p = {}, σ² = {:.4}", rep.manifest.m, rep.manifest.n, rep.manifest.p, rep.manifest.sigma2);
    print!("{}", std::fs::read_to_string(&rep.csv_path)?);
    println!("manifest: {}", rep.manifest_path.display());
    Ok(())
}
