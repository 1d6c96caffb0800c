//! The attacker learns `Σ_XX` from `K` training realizations.
//!
//! The learned attack uses `Σ_ÃÃ = H S_XX Hᵀ` where `S_XX` is the sample
//! covariance, distributed as `W_N(K−1, Σ_XX)/(K−1)`. The ergodic cost is
//! the expectation of the stealth cost over that law, estimated here by
//! Monte Carlo.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::{AttackKind, AttackModel, CostEvaluator, StateCovariance};
use crate::linalg::{self, Matrix, Vector};
use crate::mc::{self, TrialRng};

/// How a sample covariance draw is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Draw `K` Gaussian state vectors and form the sample covariance.
    Empirical,
    /// Draw the Wishart matrix directly through its Bartlett factor.
    #[default]
    Bartlett,
}

/// Which covariance estimator the attacker applies to its training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// `(1/(K−1)) Σ (x_i − x̄)(x_i − x̄)ᵀ`; Wishart with `K−1` degrees of freedom.
    #[default]
    MeanSubtracted,
    /// `(1/(K−1)) Σ x_i x_iᵀ` without centering; Wishart with `K` degrees of
    /// freedom scaled by `1/(K−1)`.
    Uncentered,
}

impl Estimator {
    fn wishart_dof(self, k: usize) -> usize {
        match self {
            Estimator::MeanSubtracted => k - 1,
            Estimator::Uncentered => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TrainingConfig {
    /// Number of training realizations `K`.
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
    pub sampler: Sampler,
    pub estimator: Estimator,
}

pub const DEFAULT_TRIALS: usize = 1000;

impl TrainingConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            trials: DEFAULT_TRIALS,
            sampler: Sampler::default(),
            estimator: Estimator::default(),
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param("k", format!("need at least 2 samples, got {}", self.k)));
        }
        if self.trials < 1 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    pub s_xx: Matrix,
    /// `K − 1`, the normalization used by the estimator.
    pub dof: usize,
}

/// Unbiased, mean-subtracted sample covariance of `samples`.
pub fn sample_covariance(samples: &[Vector]) -> Result<SampleCovariance> {
    let (k, n) = check_samples(samples)?;
    let mean = samples.iter().fold(Vector::zeros(n), |acc, x| acc + x) / k as f64;
    let mut s = Matrix::zeros(n, n);
    for x in samples {
        let d = x - &mean;
        s.ger(1.0, &d, &d, 1.0);
    }
    Ok(SampleCovariance {
        s_xx: linalg::symmetrize(&(s / (k - 1) as f64)),
        dof: k - 1,
    })
}

/// `(1/(K−1)) Σ x_i x_iᵀ`, the estimator without mean subtraction.
pub fn sample_covariance_uncentered(samples: &[Vector]) -> Result<SampleCovariance> {
    let (k, n) = check_samples(samples)?;
    let mut s = Matrix::zeros(n, n);
    for x in samples {
        s.ger(1.0, x, x, 1.0);
    }
    Ok(SampleCovariance {
        s_xx: linalg::symmetrize(&(s / (k - 1) as f64)),
        dof: k - 1,
    })
}

fn check_samples(samples: &[Vector]) -> Result<(usize, usize)> {
    if samples.len() < 2 {
        return Err(Error::param("samples", format!("need at least 2, got {}", samples.len())));
    }
    let n = samples[0].len();
    if samples.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension("samples have differing lengths".into()));
    }
    Ok((samples.len(), n))
}

/// Draws sample covariances of `K` realizations of `N(0, Σ_XX)`.
#[derive(Debug, Clone)]
pub struct WishartSampler {
    chol: Matrix,
    k: usize,
    sampler: Sampler,
    estimator: Estimator,
}

impl WishartSampler {
    pub fn new(sigma_xx: &StateCovariance, k: usize, sampler: Sampler, estimator: Estimator) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", format!("need at least 2 samples, got {k}")));
        }
        let chol = linalg::cholesky(&sigma_xx.sigma_xx, "Σ_XX")?.unpack();
        Ok(Self {
            chol,
            k,
            sampler,
            estimator,
        })
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleCovariance {
        match self.sampler {
            Sampler::Empirical => self.draw_empirical(rng),
            Sampler::Bartlett => self.draw_bartlett(rng),
        }
    }

    fn gaussian_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let z = Vector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        &self.chol * z
    }

    fn draw_empirical<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleCovariance {
        let samples: Vec<Vector> = (0..self.k).map(|_| self.gaussian_state(rng)).collect();
        match self.estimator {
            Estimator::MeanSubtracted => sample_covariance(&samples),
            Estimator::Uncentered => sample_covariance_uncentered(&samples),
        }
        .expect("k >= 2 checked at construction")
    }

    fn draw_bartlett<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleCovariance {
        let n = self.dim();
        let dof = self.estimator.wishart_dof(self.k);
        let w = if dof >= n {
            // W = L A Aᵀ Lᵀ, A lower triangular with A_ii² ~ χ²(dof − i).
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                let chi = ChiSquared::new((dof - i) as f64).expect("positive dof");
                a[(i, i)] = chi.sample(rng).sqrt();
                for j in 0..i {
                    a[(i, j)] = StandardNormal.sample(rng);
                }
            }
            let la = &self.chol * a;
            &la * la.transpose()
        } else {
            // Singular Wishart: no Bartlett factor, sum dof outer products.
            let mut w = Matrix::zeros(n, n);
            for _ in 0..dof {
                let x = self.gaussian_state(rng);
                w.ger(1.0, &x, &x, 1.0);
            }
            w
        };
        SampleCovariance {
            s_xx: linalg::symmetrize(&(w / (self.k - 1) as f64)),
            dof: self.k - 1,
        }
    }
}

/// One draw of `S_XX` using a dedicated stream of `seed`.
pub fn draw_sample_covariance(
    sigma_xx: &StateCovariance,
    k: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<SampleCovariance> {
    let ws = WishartSampler::new(sigma_xx, k, sampler, Estimator::default())?;
    Ok(ws.draw(&mut mc::trial_rng(seed, 0)))
}

/// `Σ_ÃÃ = H S_XX Hᵀ`.
pub fn learned_attack_covariance(h: &Matrix, s: &SampleCovariance) -> Result<AttackModel> {
    let sigma_aa = linalg::congruence(h, &s.s_xx)?;
    AttackModel::new(sigma_aa, AttackKind::Learned)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ErgodicEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub k: usize,
}

/// Monte Carlo estimate of the ergodic stealth cost `E_S[f(H S Hᵀ)]`.
pub fn estimate_ergodic_cost(
    h: &Matrix,
    sigma_xx: &StateCovariance,
    sigma: f64,
    cfg: &TrainingConfig,
) -> Result<ErgodicEstimate> {
    let costs = ergodic_cost_samples(h, sigma_xx, sigma, cfg)?;
    let s = mc::summarize(&costs);
    Ok(ErgodicEstimate {
        mean: s.mean,
        stderr: s.stderr,
        trials: cfg.trials,
        k: cfg.k,
    })
}

/// Per-trial costs behind [`estimate_ergodic_cost`], in trial order.
pub fn ergodic_cost_samples(
    h: &Matrix,
    sigma_xx: &StateCovariance,
    sigma: f64,
    cfg: &TrainingConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    let signal = linalg::congruence(h, &sigma_xx.sigma_xx)?;
    let m = h.nrows();
    let sigma_yy = signal + Matrix::identity(m, m) * (sigma * sigma);
    let eval = CostEvaluator::new(&sigma_yy, sigma)?;
    let sampler = WishartSampler::new(sigma_xx, cfg.k, cfg.sampler, cfg.estimator)?;
    mc::run_trials(cfg.trials, cfg.seed, |i, rng: &mut TrialRng| {
        let s = sampler.draw(rng);
        let learned = linalg::congruence(h, &s.s_xx)?;
        eval.cost(&learned)
            .map_err(|e| Error::Numerical(format!("ergodic trial {i} (K = {}): {e}", cfg.k)))
    })
}
