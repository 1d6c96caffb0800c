//! Extreme eigenvalues of a normalized white Wishart matrix against their
//! non-asymptotic bounds, plus the allocation program they feed.

use rand::Rng;
use rand_distr::StandardNormal;
use stealthbound::bound::{extreme_eig_bounds, solve_bound_program};
use stealthbound::linalg::Matrix;
use stealthbound::mc::{summarize, trial_rng};

fn main() -> stealthbound::Result<()> {
    println!("{:>4} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}", "L", "K-1", "lo", "E min", "E max", "hi", "var s");
    for (l, d) in [(5, 50), (10, 100), (20, 400), (30, 30)] {
        let b = extreme_eig_bounds(l, d + 1)?;
        let (mut mins, mut maxs, mut smax) = (vec![], vec![], vec![]);
        for t in 0..2000 {
            let mut rng = trial_rng(1, t);
            let z = Matrix::from_fn(d, l, |_, _| rng.sample::<f64, _>(StandardNormal));
            let eig = (z.transpose() * &z).symmetric_eigen().eigenvalues;
            let hi = eig.max();
            mins.push(eig.min() / d as f64);
            maxs.push(hi / d as f64);
            smax.push(hi.sqrt());
        }
        let s = summarize(&smax);
        println!(
            "{l:>4} {d:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            b.lower_min,
            summarize(&mins).mean,
            summarize(&maxs).mean,
            b.upper_max,
            s.std * s.std
        );
    }

    let prog = solve_bound_program(&[10.0, 0.1], 101)?;
    println!(
        "b = (10, 0.1), K - 1 = 100: x* = ({:.5}, {:.5}) in [{:.5}, {:.5}], objective {:.6}",
        prog.x_star[0], prog.x_star[1], prog.box_lo, prog.box_hi, prog.objective
    );
    Ok(())
}
