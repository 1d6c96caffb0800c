use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431_f64;

/// Integers up to this value use exact harmonic summation.
const HARMONIC_CUTOFF: u64 = 10_000;

/// `ψ(n) = H_{n−1} − γ` for integer `n ≥ 1`.
pub fn digamma(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "digamma is defined here for n >= 1"));
    }
    if n <= HARMONIC_CUTOFF {
        // Smallest terms first.
        let h: f64 = (1..n).rev().map(|k| 1.0 / k as f64).sum();
        Ok(h - EULER_GAMMA)
    } else {
        Ok(asymptotic(n as f64))
    }
}

/// `ψ(x)` for real `x > 0`, by upward recurrence into the asymptotic regime.
pub fn digamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::param("x", format!("digamma requires a finite x > 0, got {x}")));
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    Ok(asymptotic(x) + shift)
}

/// `ψ(j/2)` for integer `j ≥ 1`.
pub fn digamma_half(j: u64) -> Result<f64> {
    if j.is_multiple_of(2) {
        digamma(j / 2)
    } else {
        digamma_real(j as f64 / 2.0)
    }
}

fn asymptotic(x: f64) -> f64 {
    let r = 1.0 / (x * x);
    let series = r * (1.0 / 12.0 - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))));
    x.ln() - 0.5 / x - series
}
