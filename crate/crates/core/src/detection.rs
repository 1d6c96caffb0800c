//! The operator's likelihood ratio test between `H₀: y ~ N(0, Σ_YY)` and
//! `H₁: y ~ N(0, Σ_{Y_A Y_A})`, and Monte Carlo estimates of its error
//! rates and Type II error exponent.
//!
//! The test aggregates `n` i.i.d. observations by summing per-observation
//! log-likelihood ratios and declares `H₁` when the sum exceeds `τ`. `τ` is
//! calibrated on simulated `H₀` data so the false-alarm rate is at most `ε`.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_kl, DerivedCovariances};
use crate::linalg::{self, Matrix, Vector};
use crate::mc::{self, TrialRng};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// Trials needed per unit of `1/ε` for a usable `(1−ε)` quantile.
const MIN_TRIALS_PER_INV_EPS: f64 = 50.0;

/// `ln L(y) = ½[ln(|Σ_YY| / |Σ_{Y_A Y_A}|) + yᵀ(Σ_YY⁻¹ − Σ_{Y_A Y_A}⁻¹)y]`.
pub fn lrt_statistic(y: &Vector, derived: &DerivedCovariances) -> Result<f64> {
    Ok(Lrt::new(derived)?.log_ratio(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    Nominal,
    Attacked,
}

/// Precomputed log-likelihood ratio and samplers for both hypotheses.
#[derive(Debug, Clone)]
pub struct Lrt {
    offset: f64,
    gap: Matrix,
    /// `Lᵀ (Σ_YY⁻¹ − Σ_{Y_A Y_A}⁻¹) L` for the Cholesky factor of each hypothesis.
    whitened_nominal: Matrix,
    whitened_attacked: Matrix,
    dim: usize,
}

impl Lrt {
    pub fn new(derived: &DerivedCovariances) -> Result<Self> {
        linalg::ensure_same_shape(&derived.sigma_yy, &derived.sigma_yaya, "LRT covariances")?;
        let c0 = linalg::cholesky(&derived.sigma_yy, "Σ_YY")?;
        let c1 = linalg::cholesky(&derived.sigma_yaya, "Σ_{Y_A Y_A}")?;
        let offset = 0.5 * (linalg::logdet_from_cholesky(&c0) - linalg::logdet_from_cholesky(&c1));
        let gap = linalg::symmetrize(&(c0.inverse() - c1.inverse()));
        let l0 = c0.unpack();
        let l1 = c1.unpack();
        let whitened_nominal = linalg::symmetrize(&(l0.transpose() * &gap * &l0));
        let whitened_attacked = linalg::symmetrize(&(l1.transpose() * &gap * &l1));
        Ok(Self {
            offset,
            gap,
            whitened_nominal,
            whitened_attacked,
            dim: derived.dim(),
        })
    }

    pub fn log_ratio(&self, y: &Vector) -> f64 {
        self.offset + 0.5 * (y.transpose() * &self.gap * y)[(0, 0)]
    }

    /// Sum of `n` per-observation log-ratios drawn under `hyp`.
    pub fn sample_aggregate(&self, hyp: Hypothesis, n: usize, rng: &mut TrialRng, z: &mut [f64]) -> f64 {
        let q = match hyp {
            Hypothesis::Nominal => &self.whitened_nominal,
            Hypothesis::Attacked => &self.whitened_attacked,
        };
        let mut quad = 0.0;
        for _ in 0..n {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            for i in 0..self.dim {
                let mut row = 0.0;
                for j in 0..self.dim {
                    row += q[(i, j)] * z[j];
                }
                quad += z[i] * row;
            }
        }
        n as f64 * self.offset + 0.5 * quad
    }

    fn simulate(&self, hyp: Hypothesis, n: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
        let dim = self.dim;
        mc::run_trials(trials, seed, |_, rng| {
            let mut z = vec![0.0; dim];
            Ok(self.sample_aggregate(hyp, n, rng, &mut z))
        })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param("epsilon", format!("must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

fn check_trials(trials: usize, epsilon: f64) -> Result<()> {
    let need = (MIN_TRIALS_PER_INV_EPS / epsilon).ceil() as usize;
    if trials < need {
        return Err(Error::param(
            "trials",
            format!("{trials} trials cannot resolve the {} quantile; need at least {need}", 1.0 - epsilon),
        ));
    }
    Ok(())
}

/// Empirical `(1−ε)` quantile: the smallest sample with at most `ε·T`
/// samples strictly above it.
fn upper_quantile(mut values: Vec<f64>, epsilon: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let t = values.len();
    let idx = ((1.0 - epsilon) * t as f64).ceil() as usize;
    values[idx.clamp(1, t) - 1]
}

/// Threshold `τ` on the aggregated log-LRT of `n` observations meeting a
/// false-alarm budget `ε` on simulated nominal data.
pub fn calibrate_threshold(
    derived: &DerivedCovariances,
    n: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_trials(trials, epsilon)?;
    if n == 0 {
        return Err(Error::param("n", "need at least one observation"));
    }
    let lrt = Lrt::new(derived)?;
    calibrate_with(&lrt, n, epsilon, trials, seed)
}

fn calibrate_with(lrt: &Lrt, n: usize, epsilon: f64, trials: usize, seed: u64) -> Result<f64> {
    let h0 = lrt.simulate(Hypothesis::Nominal, n, trials, seed)?;
    Ok(upper_quantile(h0, epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DetectionExperiment {
    pub n: usize,
    pub epsilon: f64,
    pub tau: f64,
    pub trials: usize,
    pub seed: u64,
    /// Fraction of fresh nominal runs declared attacked.
    pub alpha_hat: f64,
    /// Fraction of attacked runs declared nominal.
    pub beta_hat: f64,
}

impl DetectionExperiment {
    /// One-sigma binomial standard error of `alpha_hat`.
    pub fn alpha_stderr(&self) -> f64 {
        binomial_stderr(self.alpha_hat, self.trials)
    }

    pub fn beta_stderr(&self) -> f64 {
        binomial_stderr(self.beta_hat, self.trials)
    }
}

fn binomial_stderr(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

// Sub-streams of a detection run.
const CALIBRATION: u64 = 0;
const FRESH_NOMINAL: u64 = 1;
const ATTACKED: u64 = 2;

/// Calibrates `τ`, then measures both error rates on independent data.
pub fn run_detection(
    derived: &DerivedCovariances,
    n: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<DetectionExperiment> {
    check_epsilon(epsilon)?;
    check_trials(trials, epsilon)?;
    if n == 0 {
        return Err(Error::param("n", "need at least one observation"));
    }
    let lrt = Lrt::new(derived)?;
    run_with(&lrt, n, epsilon, trials, seed)
}

fn run_with(lrt: &Lrt, n: usize, epsilon: f64, trials: usize, seed: u64) -> Result<DetectionExperiment> {
    let stream = |label| mc::derive_seed(seed ^ n as u64, label);
    let tau = calibrate_with(lrt, n, epsilon, trials, stream(CALIBRATION))?;
    let h0 = lrt.simulate(Hypothesis::Nominal, n, trials, stream(FRESH_NOMINAL))?;
    let h1 = lrt.simulate(Hypothesis::Attacked, n, trials, stream(ATTACKED))?;
    let false_alarms = h0.iter().filter(|&&s| s > tau).count();
    let misses = h1.iter().filter(|&&s| s <= tau).count();
    Ok(DetectionExperiment {
        n,
        epsilon,
        tau,
        trials,
        seed,
        alpha_hat: false_alarms as f64 / trials as f64,
        beta_hat: misses as f64 / trials as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub experiment: DetectionExperiment,
    /// `−(1/n) ln β̂_n`; `None` when no miss was observed.
    pub exponent: Option<f64>,
    /// One-sigma delta-method radius of `exponent`.
    pub radius: Option<f64>,
}

impl ExponentPoint {
    pub fn is_estimable(&self) -> bool {
        self.exponent.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExponentReport {
    pub points: Vec<ExponentPoint>,
    /// `D(P_{Y_A} ‖ P_Y)`.
    pub kl_attacked_nominal: f64,
    /// `D(P_Y ‖ P_{Y_A})`.
    pub kl_nominal_attacked: f64,
}

/// Empirical Type II error exponent at each `n` in `n_grid`.
pub fn error_exponent_estimate(
    derived: &DerivedCovariances,
    n_grid: &[usize],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<ExponentReport> {
    check_epsilon(epsilon)?;
    check_trials(trials, epsilon)?;
    if n_grid.contains(&0) {
        return Err(Error::param("n_grid", "observation counts must be positive"));
    }
    let lrt = Lrt::new(derived)?;
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let experiment = run_with(&lrt, n, epsilon, trials, seed)?;
        let beta = experiment.beta_hat;
        let (exponent, radius) = if beta > 0.0 {
            let se = binomial_stderr(beta, trials);
            (Some(-beta.ln() / n as f64), Some(se / (beta * n as f64)))
        } else {
            (None, None)
        };
        points.push(ExponentPoint {
            n,
            experiment,
            exponent,
            radius,
        });
    }
    Ok(ExponentReport {
        points,
        kl_attacked_nominal: gaussian_kl(&derived.sigma_yaya, &derived.sigma_yy)?,
        kl_nominal_attacked: gaussian_kl(&derived.sigma_yy, &derived.sigma_yaya)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_pair(yy: f64, yaya: f64) -> DerivedCovariances {
        DerivedCovariances {
            sigma_yy: Matrix::from_element(1, 1, yy),
            sigma_yaya: Matrix::from_element(1, 1, yaya),
        }
    }

    #[test]
    fn identical_hypotheses_give_zero_ratio() {
        let d = scalar_pair(1.5, 1.5);
        for y in [-3.0, 0.0, 0.7] {
            assert!(lrt_statistic(&Vector::from_element(1, y), &d).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_ratio_examples() {
        let d = scalar_pair(1.0, 2.0);
        let at0 = lrt_statistic(&Vector::from_element(1, 0.0), &d).unwrap();
        assert!((at0 - 0.5 * 0.5f64.ln()).abs() < 1e-15);
        let at2 = lrt_statistic(&Vector::from_element(1, 2.0), &d).unwrap();
        assert!((at2 - (0.5 * 0.5f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn ratio_matches_density_quotient() {
        let d = DerivedCovariances {
            sigma_yy: Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            sigma_yaya: Matrix::from_row_slice(2, 2, &[3.0, 0.1, 0.1, 2.5]),
        };
        let y = Vector::from_row_slice(&[0.4, -1.1]);
        let logpdf = |s: &Matrix| {
            let inv = s.clone().try_inverse().unwrap();
            -0.5 * (y.transpose() * inv * &y)[(0, 0)] - 0.5 * s.determinant().ln()
        };
        let expect = logpdf(&d.sigma_yaya) - logpdf(&d.sigma_yy);
        assert!((lrt_statistic(&y, &d).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn calibration_meets_budget() {
        let d = scalar_pair(1.0, 2.0);
        let exp = run_detection(&d, 1, 0.1, 10_000, 3).unwrap();
        assert!((0.08..=0.12).contains(&exp.alpha_hat), "alpha {}", exp.alpha_hat);
    }

    #[test]
    fn degenerate_calibration() {
        let d = scalar_pair(1.0, 1.0);
        let tau = calibrate_threshold(&d, 5, 0.05, 1000, 1).unwrap();
        assert_eq!(tau, 0.0);
        let exp = run_detection(&d, 5, 0.05, 1000, 1).unwrap();
        assert_eq!((exp.alpha_hat, exp.beta_hat), (0.0, 1.0));
    }

    #[test]
    fn small_trial_budget_rejected() {
        let d = scalar_pair(1.0, 2.0);
        assert!(calibrate_threshold(&d, 1, 0.05, 999, 0).is_err());
        assert!(calibrate_threshold(&d, 1, 0.05, 1000, 0).is_ok());
        assert!(calibrate_threshold(&d, 1, 0.5, 1000, 0).is_err());
        assert!(calibrate_threshold(&d, 0, 0.05, 1000, 0).is_err());
    }

    #[test]
    fn identical_hypotheses_zero_exponent() {
        let d = scalar_pair(2.0, 2.0);
        let rep = error_exponent_estimate(&d, &[10, 50], 0.05, 1000, 4).unwrap();
        for p in &rep.points {
            assert_eq!(p.exponent, Some(0.0));
        }
        assert!(rep.kl_attacked_nominal.abs() < 1e-15);
    }

    #[test]
    fn upper_quantile_index() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(v.clone(), 0.1), 90.0);
        assert_eq!(upper_quantile(v, 0.05), 95.0);
    }
}
