//! Parse a MATPOWER case file and summarize it.
//!
//! ```text
//! cargo run --example parse_case [path/to/case.m]
//! ```

use stealthbound::grid::{self, parse_matpower_case};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case = match std::env::args().nth(1) {
        Some(path) => parse_matpower_case(&std::fs::read_to_string(path)?)?,
        None => grid::ieee30(),
    };
    println!("base MVA     {}", case.base_mva);
    println!("buses        {}", case.buses.len());
    println!("branches     {} ({} in service)", case.branches.len(), case.in_service_branches().count());
    println!("slack bus    {}", case.slack().map(|b| b.id).unwrap_or_default());

    let shortest = case
        .in_service_branches()
        .min_by(|a, b| a.reactance.abs().total_cmp(&b.reactance.abs()))
        .unwrap();
    println!(
        "stiffest     {} -> {} (x = {} p.u.)",
        shortest.from_bus, shortest.to_bus, shortest.reactance
    );

    // Errors point at the offending token.
    let broken = grid::IEEE30_CASE.replacen("mpc.baseMVA = 100;", "mpc.baseMVA = 1OO;", 1);
    if let Err(e) = parse_matpower_case(&broken) {
        println!("broken copy  {e}");
    }
    Ok(())
}
