//! Closed-form upper bound on the ergodic cost as the training set grows.

use stealthbound::bound::{ergodic_upper_bound_with_spectrum, FormulaTag};
use stealthbound::experiment::fig1_config;

fn main() -> stealthbound::Result<()> {
    let setup = fig1_config(0.1, "out".as_ref(), 1, 0).build_setup()?;
    let f_star = setup.optimal_cost();
    println!("p = {}, f* = {f_star:.5}", setup.spectrum.p());
    println!("{:>10} {:>10} {:>10} {:>12} {:>12}", "K", "paper", "real_exact", "box lo", "box hi");
    for k in [30, 50, 100, 1_000, 10_000, 100_000, 100_000_001] {
        let bound = |tag| {
            ergodic_upper_bound_with_spectrum(
                setup.h(),
                &setup.sigma_xx,
                setup.sigma(),
                k,
                tag,
                setup.spectrum.clone(),
            )
        };
        let paper = bound(FormulaTag::Paper)?;
        let real = bound(FormulaTag::RealExact)?;
        let prog = paper.program.as_ref().expect("p > 0");
        println!(
            "{k:>10} {:>10.5} {:>10.5} {:>12.6} {:>12.6}",
            paper.value, real.value, prog.box_lo, prog.box_hi
        );
    }

    // Below K − 1 = p the eigenvalue box no longer applies.
    let err = ergodic_upper_bound_with_spectrum(
        setup.h(),
        &setup.sigma_xx,
        setup.sigma(),
        20,
        FormulaTag::Paper,
        setup.spectrum.clone(),
    )
    .unwrap_err();
    println!("K = 20: {err}");
    Ok(())
}
