//! Gaussian state, measurement and attack covariances, and the
//! information measures that make up the stealth cost.
//!
//! All logarithms are natural, so every information quantity is in nats.

use nalgebra::{Cholesky, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Relative eigenvalue floor below which an attack covariance is rejected.
/// Eigenvalues in `[-PSD_TOL·λ_max, 0)` are clipped to zero.
pub const PSD_TOL: f64 = 1e-8;

/// Default relative threshold separating the nonzero spectrum from roundoff.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateCovariance {
    pub sigma_xx: Matrix,
    /// Decay parameter when built by [`toeplitz_covariance`].
    pub rho: Option<f64>,
}

impl StateCovariance {
    /// Validates a user-provided covariance (symmetric to 1e-12 relative,
    /// positive definite).
    pub fn from_matrix(sigma_xx: Matrix) -> Result<Self> {
        linalg::ensure_square(&sigma_xx, "state covariance")?;
        let scale = sigma_xx.amax().max(f64::MIN_POSITIVE);
        if linalg::asymmetry(&sigma_xx) > 1e-12 * scale {
            return Err(Error::param("sigma_xx", "matrix is not symmetric"));
        }
        let sigma_xx = linalg::symmetrize(&sigma_xx);
        linalg::cholesky(&sigma_xx, "state covariance")?;
        Ok(Self { sigma_xx, rho: None })
    }

    pub fn dim(&self) -> usize {
        self.sigma_xx.nrows()
    }
}

/// `Σ_XX = [ρ^|i−j|]`, the exponentially decaying Toeplitz covariance.
pub fn toeplitz_covariance(n: usize, rho: f64) -> Result<StateCovariance> {
    if n == 0 {
        return Err(Error::param("n", "dimension must be at least 1"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param("rho", format!("must lie in [0, 1), got {rho}")));
    }
    let sigma_xx = Matrix::from_fn(n, n, |i, j| rho.powi(i.abs_diff(j) as i32));
    Ok(StateCovariance {
        sigma_xx,
        rho: Some(rho),
    })
}

/// Noise standard deviation giving `SNR = 10 log10(tr(HΣ_XXHᵀ) / (Mσ²))`.
pub fn sigma_from_snr(h: &Matrix, sigma_xx: &StateCovariance, snr_db: f64) -> Result<f64> {
    let signal = linalg::congruence(h, &sigma_xx.sigma_xx)?.trace();
    if !(signal > 0.0) {
        return Err(Error::param("h", "tr(H Σ_XX Hᵀ) must be positive to define an SNR"));
    }
    if !snr_db.is_finite() {
        return Err(Error::param("snr_db", "must be finite"));
    }
    let m = h.nrows() as f64;
    let var = signal / (m * 10f64.powf(snr_db / 10.0));
    Ok(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Optimal,
    Learned,
    Custom,
}

/// Covariance of a zero-mean Gaussian attack vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackModel {
    pub sigma_aa: Matrix,
    pub kind: AttackKind,
}

impl AttackModel {
    /// Validates and symmetrizes an attack covariance. Small negative
    /// eigenvalues (down to `-PSD_TOL·λ_max`) are clipped to zero.
    pub fn new(sigma_aa: Matrix, kind: AttackKind) -> Result<Self> {
        linalg::ensure_square(&sigma_aa, "attack covariance")?;
        let sym = linalg::symmetrize(&sigma_aa);
        let eig = sym.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lmin >= 0.0 || sym.nrows() == 0 {
            return Ok(Self { sigma_aa: sym, kind });
        }
        if lmin < -PSD_TOL * lmax {
            return Err(Error::param(
                "sigma_aa",
                format!("not positive semidefinite (eigenvalue {lmin:e}, λ_max {lmax:e})"),
            ));
        }
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let rebuilt = &eig.eigenvectors * Matrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        Ok(Self {
            sigma_aa: linalg::symmetrize(&rebuilt),
            kind,
        })
    }

    pub fn zero(m: usize) -> Self {
        Self {
            sigma_aa: Matrix::zeros(m, m),
            kind: AttackKind::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma_aa.nrows()
    }
}

/// Measurement covariances without (`Σ_YY`) and with (`Σ_{Y_A Y_A}`) attack.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedCovariances {
    pub sigma_yy: Matrix,
    pub sigma_yaya: Matrix,
}

impl DerivedCovariances {
    pub fn dim(&self) -> usize {
        self.sigma_yy.nrows()
    }
}

pub fn derived_covariances(
    h: &Matrix,
    sigma_xx: &StateCovariance,
    sigma: f64,
    attack: &AttackModel,
) -> Result<DerivedCovariances> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    let signal = linalg::congruence(h, &sigma_xx.sigma_xx)?;
    if attack.dim() != h.nrows() {
        return Err(Error::Dimension(format!(
            "attack covariance is {0}x{0} but H has {1} rows",
            attack.dim(),
            h.nrows()
        )));
    }
    let m = h.nrows();
    let sigma_yy = signal + Matrix::identity(m, m) * (sigma * sigma);
    let sigma_yaya = &sigma_yy + &attack.sigma_aa;
    Ok(DerivedCovariances { sigma_yy, sigma_yaya })
}

/// Σ*_AA = H Σ_XX Hᵀ.
pub fn optimal_attack_covariance(h: &Matrix, sigma_xx: &StateCovariance) -> Result<AttackModel> {
    let sigma_aa = linalg::congruence(h, &sigma_xx.sigma_xx)?;
    AttackModel::new(sigma_aa, AttackKind::Optimal)
}

/// Reusable evaluator of the stealth cost for a fixed `Σ_YY` and `σ`.
///
/// Caches the Cholesky factor and inverse of `Σ_YY` so repeated
/// evaluations over many attack covariances cost one `M×M` Cholesky each.
pub struct CostEvaluator {
    sigma2: f64,
    sigma_yy_inv: Matrix,
    logdet_yy: f64,
}

impl CostEvaluator {
    pub fn new(sigma_yy: &Matrix, sigma: f64) -> Result<Self> {
        let chol: Cholesky<f64, Dyn> = linalg::cholesky(sigma_yy, "Σ_YY")?;
        let logdet_yy = linalg::logdet_from_cholesky(&chol);
        Ok(Self {
            sigma2: sigma * sigma,
            sigma_yy_inv: chol.inverse(),
            logdet_yy,
        })
    }

    /// `f(Σ_AA) = ½[tr(Σ_YY⁻¹Σ_AA) − ln|Σ_AA + σ²I| + ln|Σ_YY|]`.
    pub fn cost(&self, sigma_aa: &Matrix) -> Result<f64> {
        let m = sigma_aa.nrows();
        if m != self.sigma_yy_inv.nrows() {
            return Err(Error::Dimension(format!(
                "attack covariance is {m}x{m}, Σ_YY is {0}x{0}",
                self.sigma_yy_inv.nrows()
            )));
        }
        let tr = linalg::trace_of_product(&self.sigma_yy_inv, sigma_aa);
        let shifted = sigma_aa + Matrix::identity(m, m) * self.sigma2;
        let logdet_a = linalg::logdet_spd(&shifted, "Σ_AA + σ²I")?;
        Ok(0.5 * (tr - logdet_a + self.logdet_yy))
    }

    pub fn logdet_sigma_yy(&self) -> f64 {
        self.logdet_yy
    }

    pub fn sigma_yy_inv(&self) -> &Matrix {
        &self.sigma_yy_inv
    }
}

/// Gaussian evaluation of `D(P_{X Y_A} ‖ P_X P_Y)`.
pub fn stealth_cost(attack: &AttackModel, derived: &DerivedCovariances, sigma: f64) -> Result<f64> {
    CostEvaluator::new(&derived.sigma_yy, sigma)?.cost(&attack.sigma_aa)
}

/// `I(X; Y_A) = ½ ln(|Σ_{Y_A Y_A}| / |Σ_AA + σ²I|)`.
pub fn gaussian_mutual_information(
    attack: &AttackModel,
    derived: &DerivedCovariances,
    sigma: f64,
) -> Result<f64> {
    let m = attack.dim();
    linalg::ensure_same_shape(&attack.sigma_aa, &derived.sigma_yaya, "attack vs Σ_{Y_A Y_A}")?;
    let num = linalg::logdet_spd(&derived.sigma_yaya, "Σ_{Y_A Y_A}")?;
    let den = linalg::logdet_spd(
        &(&attack.sigma_aa + Matrix::identity(m, m) * (sigma * sigma)),
        "Σ_AA + σ²I",
    )?;
    Ok(0.5 * (num - den))
}

/// KL divergence between the zero-mean Gaussian laws of the attacked and
/// nominal measurements, `D(P_{Y_A} ‖ P_Y)`.
pub fn gaussian_kl_marginals(derived: &DerivedCovariances) -> Result<f64> {
    gaussian_kl(&derived.sigma_yaya, &derived.sigma_yy)
}

/// `D(N(0, P) ‖ N(0, Q)) = ½[tr(Q⁻¹P) − M + ln|Q| − ln|P|]`.
pub fn gaussian_kl(p: &Matrix, q: &Matrix) -> Result<f64> {
    linalg::ensure_same_shape(p, q, "KL arguments")?;
    let chol_q = linalg::cholesky(q, "KL reference covariance")?;
    let logdet_p = linalg::logdet_spd(p, "KL covariance")?;
    let tr = linalg::trace_of_product(&chol_q.inverse(), p);
    let m = p.nrows() as f64;
    Ok(0.5 * (tr - m + linalg::logdet_from_cholesky(&chol_q) - logdet_p))
}

/// Nonzero eigenvalues of `H Σ_XX Hᵀ`, decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
}

impl SpectralData {
    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `½ Σ λ_i / (λ_i + σ²)`: the stealth cost of the optimal attack.
    pub fn optimal_cost(&self, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        0.5 * self.eigenvalues.iter().map(|l| l / (l + s2)).sum::<f64>()
    }
}

pub fn nonzero_spectrum(h: &Matrix, sigma_xx: &StateCovariance, rank_tol: f64) -> Result<SpectralData> {
    let signal = linalg::congruence(h, &sigma_xx.sigma_xx)?;
    let all = linalg::eigenvalues_desc(&signal);
    let lmax = all.first().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Ok(SpectralData { eigenvalues: vec![] });
    }
    let eigenvalues = all.into_iter().filter(|&l| l > rank_tol * lmax).collect();
    Ok(SpectralData { eigenvalues })
}
