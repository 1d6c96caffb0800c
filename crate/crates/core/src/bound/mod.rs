//! Random-matrix upper bound on the ergodic stealth cost.
//!
//! The expected log-determinant `E[ln|H S Hᵀ + σ²I|]` is bounded below by
//! splitting off the log-determinant of a standard Wishart matrix
//! (digamma sums) and bounding the remainder with a small convex program
//! whose box constraints bound the expected extreme Wishart eigenvalues.
//! Substituting that lower bound into the cost gives [`ergodic_upper_bound`].

mod digamma;
mod program;

pub use digamma::{digamma, digamma_half, digamma_real};
pub use program::{objective as program_objective, solve_bound_program, BoundProgram};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::{nonzero_spectrum, CostEvaluator, SpectralData, StateCovariance, RANK_TOL};
use crate::linalg::{self, Matrix};

/// Which expression to use for `E[ln|Z_pᵀZ_p/(K−1)|]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaTag {
    /// `Σ_{i=0}^{p−1} ψ(K−1−i) − p ln(K−1)`.
    #[default]
    Paper,
    /// `Σ_{i=1}^{p} ψ((K−i)/2) + p ln 2 − p ln(K−1)`, exact for real Gaussian entries.
    RealExact,
}

impl fmt::Display for FormulaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaTag::Paper => "paper",
            FormulaTag::RealExact => "real_exact",
        })
    }
}

impl FromStr for FormulaTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(FormulaTag::Paper),
            "real_exact" | "real-exact" => Ok(FormulaTag::RealExact),
            other => Err(format!("unknown formula `{other}` (expected paper or real_exact)")),
        }
    }
}

/// Bounds on the expected extreme eigenvalues of `W_L(K−1, I)/(K−1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EigBoundPair {
    /// `(1 − √(L/(K−1)))² ≤ E[λ_min]`
    pub lower_min: f64,
    /// `E[λ_max] ≤ (1 + √(L/(K−1)))² + 1/(K−1)`
    pub upper_max: f64,
    pub l: usize,
    pub k: usize,
}

impl EigBoundPair {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        extreme_eig_bounds(l, k)
    }
}

pub fn extreme_eig_bounds(l: usize, k: usize) -> Result<EigBoundPair> {
    if l == 0 {
        return Err(Error::param("l", "dimension must be at least 1"));
    }
    if k < 2 || k - 1 < l {
        return Err(Error::param(
            "k",
            format!("eigenvalue bounds need K − 1 >= L; got K = {k}, L = {l}"),
        ));
    }
    let d = (k - 1) as f64;
    let r = (l as f64 / d).sqrt();
    Ok(EigBoundPair {
        lower_min: (1.0 - r).powi(2),
        upper_max: (1.0 + r).powi(2) + 1.0 / d,
        l,
        k,
    })
}

fn check_dof(p: usize, k: usize) -> Result<()> {
    if k < 2 || k - 1 < p {
        return Err(Error::param("k", format!("need K − 1 >= p; got K = {k}, p = {p}")));
    }
    Ok(())
}

/// `Σ_{i=0}^{p−1} ψ(K−1−i)` (paper) or `Σ_{i=1}^{p} ψ((K−i)/2)` (real_exact).
pub fn digamma_sum(p: usize, k: usize, formula: FormulaTag) -> Result<f64> {
    check_dof(p, k)?;
    let k = k as u64;
    let mut terms = Vec::with_capacity(p);
    for i in 0..p as u64 {
        terms.push(match formula {
            FormulaTag::Paper => digamma(k - 1 - i)?,
            FormulaTag::RealExact => digamma_half(k - 1 - i)?,
        });
    }
    Ok(crate::mc::compensated_sum(terms))
}

/// `E[ln|Z_pᵀ Z_p / (K−1)|]` for a `(K−1)×p` standard Gaussian `Z_p`.
pub fn expected_logdet_std_wishart(p: usize, k: usize, formula: FormulaTag) -> Result<f64> {
    let sum = digamma_sum(p, k, formula)?;
    let p_f = p as f64;
    let norm = p_f * ((k - 1) as f64).ln();
    Ok(match formula {
        FormulaTag::Paper => sum - norm,
        FormulaTag::RealExact => sum + p_f * 2f64.ln() - norm,
    })
}

/// Lower bound on `E[ln|Σ_ÃÃ + σ²I_M|]`, with the solved program.
pub fn logdet_lower_bound(
    spectrum: &SpectralData,
    sigma: f64,
    m: usize,
    k: usize,
    formula: FormulaTag,
) -> Result<(f64, Option<BoundProgram>)> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    let noise = 2.0 * m as f64 * sigma.ln();
    let p = spectrum.p();
    if p == 0 {
        return Ok((noise, None));
    }
    let wishart = expected_logdet_std_wishart(p, k, formula)?;
    let s2 = sigma * sigma;
    let b: Vec<f64> = spectrum.eigenvalues.iter().map(|l| l / s2).collect();
    let prog = solve_bound_program(&b, k)?;
    Ok((wishart + prog.objective + noise, Some(prog)))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BoundResult {
    /// Upper bound on the ergodic cost.
    pub value: f64,
    /// Raw digamma sum entering the Wishart log-determinant.
    pub digamma_sum: f64,
    /// Lower bound on `E[ln|Σ_ÃÃ + σ²I|]`.
    pub logdet_lower: f64,
    /// `tr(Σ_YY⁻¹ Σ*_AA)`.
    pub trace_term: f64,
    pub logdet_sigma_yy: f64,
    /// `f(Σ*_AA)`, the perfect-knowledge cost.
    pub optimal_cost: f64,
    #[serde(skip)]
    pub spectrum: SpectralData,
    pub program: Option<BoundProgram>,
    pub k: usize,
    pub formula: FormulaTag,
}

impl BoundResult {
    pub fn gap(&self) -> f64 {
        self.value - self.optimal_cost
    }
}

/// Upper bound on `E[f(H S_XX Hᵀ)]` for `K` training samples.
pub fn ergodic_upper_bound(
    h: &Matrix,
    sigma_xx: &StateCovariance,
    sigma: f64,
    k: usize,
    formula: FormulaTag,
) -> Result<BoundResult> {
    let spectrum = nonzero_spectrum(h, sigma_xx, RANK_TOL)?;
    ergodic_upper_bound_with_spectrum(h, sigma_xx, sigma, k, formula, spectrum)
}

/// As [`ergodic_upper_bound`], reusing a precomputed spectrum.
pub fn ergodic_upper_bound_with_spectrum(
    h: &Matrix,
    sigma_xx: &StateCovariance,
    sigma: f64,
    k: usize,
    formula: FormulaTag,
    spectrum: SpectralData,
) -> Result<BoundResult> {
    if !(sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    check_dof(spectrum.p(), k)?;
    let m = h.nrows();
    let optimal = linalg::congruence(h, &sigma_xx.sigma_xx)?;
    let sigma_yy = &optimal + Matrix::identity(m, m) * (sigma * sigma);
    let eval = CostEvaluator::new(&sigma_yy, sigma)?;
    let trace_term = linalg::trace_of_product(eval.sigma_yy_inv(), &optimal);
    let logdet_sigma_yy = eval.logdet_sigma_yy();
    let (logdet_lower, program) = logdet_lower_bound(&spectrum, sigma, m, k, formula)?;
    let digamma_sum = if spectrum.p() == 0 {
        0.0
    } else {
        digamma_sum(spectrum.p(), k, formula)?
    };
    Ok(BoundResult {
        value: 0.5 * (trace_term + logdet_sigma_yy - logdet_lower),
        digamma_sum,
        logdet_lower,
        trace_term,
        logdet_sigma_yy,
        optimal_cost: spectrum.optimal_cost(sigma),
        spectrum,
        program,
        k,
        formula,
    })
}
