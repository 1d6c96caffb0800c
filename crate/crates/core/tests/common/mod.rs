#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use stealthbound::linalg::Matrix;

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `A Aᵀ + ridge·I` with `A` having `rank` Gaussian columns.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize, ridge: f64) -> Matrix {
    let a = gaussian_matrix(rng, n, rank);
    &a * a.transpose() + Matrix::identity(n, n) * ridge
}

/// Log-determinant from the symmetric eigendecomposition (independent of Cholesky).
pub fn logdet_eig(a: &Matrix) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().map(|l| l.ln()).sum()
}

/// Direct evaluation of the stealth cost with an explicit inverse.
pub fn cost_oracle(sigma_yy: &Matrix, sigma_aa: &Matrix, sigma: f64) -> f64 {
    let m = sigma_yy.nrows();
    let inv = sigma_yy.clone().try_inverse().unwrap();
    let noisy = sigma_aa + Matrix::identity(m, m) * (sigma * sigma);
    0.5 * ((inv * sigma_aa).trace() - logdet_eig(&noisy) + logdet_eig(sigma_yy))
}

/// Sum of `ln(b_i + 1/x_i)`.
pub fn program_objective(b: &[f64], x: &[f64]) -> f64 {
    b.iter().zip(x).map(|(b, x)| (b + 1.0 / x).ln()).sum()
}

/// Minimizes `program_objective` over `{Σx = p, lo ≤ x ≤ hi}` (p ≤ 3) by a
/// grid scan followed by repeated zooming around the incumbent.
pub fn grid_oracle(b: &[f64], lo: f64, hi: f64) -> f64 {
    let p = b.len();
    let total = p as f64;
    let feasible = |x: &[f64]| x.iter().all(|&v| v >= lo - 1e-15 && v <= hi + 1e-15);
    match p {
        1 => program_objective(b, &[1.0]),
        2 => {
            let (mut a, mut z) = (lo.max(total - hi), hi.min(total - lo));
            let mut best = (f64::INFINITY, a);
            for _ in 0..40 {
                let steps = 400;
                for s in 0..=steps {
                    let x1 = a + (z - a) * s as f64 / steps as f64;
                    let x = [x1, total - x1];
                    if feasible(&x) {
                        let v = program_objective(b, &x);
                        if v < best.0 {
                            best = (v, x1);
                        }
                    }
                }
                let w = (z - a) / 50.0;
                a = (best.1 - w).max(lo.max(total - hi));
                z = (best.1 + w).min(hi.min(total - lo));
            }
            best.0
        }
        3 => {
            let (mut c1, mut c2, mut w) = ((lo + hi) / 2.0, (lo + hi) / 2.0, (hi - lo) / 2.0);
            let mut best = f64::INFINITY;
            for _ in 0..40 {
                let steps = 120;
                let (mut b1, mut b2) = (c1, c2);
                for i in 0..=steps {
                    for j in 0..=steps {
                        let x1 = (c1 - w + 2.0 * w * i as f64 / steps as f64).clamp(lo, hi);
                        let x2 = (c2 - w + 2.0 * w * j as f64 / steps as f64).clamp(lo, hi);
                        let x = [x1, x2, total - x1 - x2];
                        if feasible(&x) {
                            let v = program_objective(b, &x);
                            if v < best {
                                best = v;
                                (b1, b2) = (x1, x2);
                            }
                        }
                    }
                }
                (c1, c2) = (b1, b2);
                w /= 6.0;
            }
            best
        }
        _ => panic!("grid oracle supports p <= 3"),
    }
}
