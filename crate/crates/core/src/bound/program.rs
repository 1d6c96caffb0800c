use super::EigBoundPair;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Solution of
///
/// ```text
/// min Σ ln(b_i + 1/x_i)  s.t.  Σ x_i = p,  box_lo ≤ x_i ≤ box_hi
/// ```
///
/// where the box comes from [`EigBoundPair`] with `L = p`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundProgram {
    pub b: Vec<f64>,
    pub box_lo: f64,
    pub box_hi: f64,
    pub x_star: Vec<f64>,
    pub objective: f64,
    /// Multiplier of the sum constraint at the solution.
    pub multiplier: f64,
    pub iterations: usize,
}

impl BoundProgram {
    pub fn p(&self) -> usize {
        self.b.len()
    }

    /// Largest violation of the KKT conditions: primal feasibility, and
    /// stationarity relative to the multiplier for interior and clipped
    /// coordinates.
    pub fn kkt_residual(&self) -> f64 {
        let p = self.p() as f64;
        let mut worst = (self.x_star.iter().sum::<f64>() - p).abs();
        let nu = self.multiplier;
        for (&b, &x) in self.b.iter().zip(&self.x_star) {
            worst = worst.max((self.box_lo - x).max(0.0)).max((x - self.box_hi).max(0.0));
            // −∂/∂x ln(b + 1/x)
            let slope = 1.0 / (b * x * x + x);
            let at_lo = (x - self.box_lo).abs() <= 1e-14 * self.box_hi;
            let at_hi = (x - self.box_hi).abs() <= 1e-14 * self.box_hi;
            let r = if at_lo && at_hi {
                0.0
            } else if at_lo {
                (slope - nu).max(0.0) / nu
            } else if at_hi {
                (nu - slope).max(0.0) / nu
            } else {
                (slope - nu).abs() / nu
            };
            worst = worst.max(r);
        }
        worst
    }
}

pub fn objective(b: &[f64], x: &[f64]) -> f64 {
    b.iter().zip(x).map(|(&bi, &xi)| (bi + 1.0 / xi).ln()).sum()
}

/// Unclipped stationary point of coordinate `i` for multiplier `nu`:
/// the positive root of `b x² + x = 1/ν`, written without cancellation.
fn stationary(b: f64, nu: f64) -> f64 {
    2.0 / (nu * (1.0 + (1.0 + 4.0 * b / nu).sqrt()))
}

/// Solves the box-constrained allocation by bisection on the multiplier.
pub fn solve_bound_program(b: &[f64], k: usize) -> Result<BoundProgram> {
    let p = b.len();
    if p == 0 {
        return Err(Error::param("b", "empty coefficient vector"));
    }
    if let Some(bad) = b.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::param("b", format!("coefficients must be finite and > 0, found {bad}")));
    }
    let bounds = EigBoundPair::new(p, k)?;
    let (lo, hi) = (bounds.lower_min, bounds.upper_max);
    if lo > 1.0 || hi < 1.0 {
        return Err(Error::Numerical(format!("infeasible box [{lo}, {hi}]")));
    }
    let target = p as f64;
    let alloc = |nu: f64| -> Vec<f64> { b.iter().map(|&bi| stationary(bi, nu).clamp(lo, hi)).collect() };
    let total = |nu: f64| -> f64 { alloc(nu).iter().sum() };

    // Σx(ν) is non-increasing in ν; bracket the root geometrically.
    let mut nu_lo = b.iter().map(|&bi| 1.0 / (bi * hi * hi + hi)).fold(f64::INFINITY, f64::min);
    let mut nu_hi = if lo > 0.0 {
        b.iter().map(|&bi| 1.0 / (bi * lo * lo + lo)).fold(0.0, f64::max)
    } else {
        nu_lo * 2.0
    };
    while total(nu_lo) < target {
        nu_lo *= 0.5;
    }
    while total(nu_hi) > target {
        nu_hi *= 2.0;
    }

    let mut iterations = 0;
    let mut nu = (nu_lo * nu_hi).sqrt();
    while iterations < MAX_ITER {
        iterations += 1;
        nu = (nu_lo * nu_hi).sqrt();
        let residual = total(nu) - target;
        if residual.abs() <= SUM_TOL * target {
            break;
        }
        if residual > 0.0 {
            nu_lo = nu;
        } else {
            nu_hi = nu;
        }
        if nu_hi / nu_lo - 1.0 < 4.0 * f64::EPSILON {
            break;
        }
    }

    let mut x = alloc(nu);
    // Spread the leftover roundoff over the interior coordinates.
    let residual = target - x.iter().sum::<f64>();
    let free: Vec<usize> = (0..p).filter(|&i| x[i] > lo && x[i] < hi).collect();
    if !free.is_empty() {
        let share = residual / free.len() as f64;
        for &i in &free {
            x[i] = (x[i] + share).clamp(lo, hi);
        }
    }
    let objective = objective(b, &x);
    Ok(BoundProgram {
        b: b.to_vec(),
        box_lo: lo,
        box_hi: hi,
        x_star: x,
        objective,
        multiplier: nu,
        iterations,
    })
}
