//! End-to-end sweeps over the training-set size `K`.
//!
//! [`run_experiment`] writes a CSV with columns
//! `k,mc_mean,mc_stderr,bound,optimal_cost,gap` plus a JSON manifest holding
//! the resolved configuration, `σ²`, `p` and SHA-256 digests of `H` and the
//! spectrum. The manifest's `config` block is itself a valid config file,
//! so any run can be replayed from it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bound::{ergodic_upper_bound_with_spectrum, FormulaTag};
use crate::error::{Error, Result};
use crate::gaussian::{nonzero_spectrum, sigma_from_snr, toeplitz_covariance, SpectralData, StateCovariance, RANK_TOL};
use crate::grid::{self, build_dc_jacobian, MeasurementModel, MeasurementSelection};
use crate::learning::{estimate_ergodic_cost, Estimator, Sampler, TrainingConfig, DEFAULT_TRIALS};
use crate::linalg::Matrix;
use crate::mc;

pub const CSV_HEADER: &str = "k,mc_mean,mc_stderr,bound,optimal_cost,gap";

/// `K − 1` used for the large-sample consistency check.
pub const ASYMPTOTIC_DOF: usize = 100_000_000;

pub const FIG1_RHOS: [f64; 2] = [0.1, 0.8];
pub const FIG1_SNR_DB: f64 = 20.0;

/// Twelve logarithmically spaced sample sizes from 50 to 10⁵.
pub fn default_k_grid() -> Vec<usize> {
    let (lo, hi, points) = (50f64, 1e5f64, 12);
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).round() as usize)
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// MATPOWER case; the bundled IEEE 30-bus case when neither this nor
    /// `h_path` is set.
    pub case_path: Option<PathBuf>,
    /// Precomputed `H` as CSV; overrides `case_path`.
    pub h_path: Option<PathBuf>,
    /// Precomputed `Σ_XX` as CSV; overrides `rho`.
    pub sigma_xx_path: Option<PathBuf>,
    pub rho: f64,
    pub snr_db: f64,
    pub k_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub formula: FormulaTag,
    pub sampler: Sampler,
    pub estimator: Estimator,
    pub measurements: MeasurementSelection,
    pub output_dir: PathBuf,
    /// File stem for the CSV and manifest; derived from `rho` when unset.
    pub output_stem: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case_path: None,
            h_path: None,
            sigma_xx_path: None,
            rho: 0.8,
            snr_db: FIG1_SNR_DB,
            k_grid: default_k_grid(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            formula: FormulaTag::default(),
            sampler: Sampler::default(),
            estimator: Estimator::default(),
            measurements: MeasurementSelection::default(),
            output_dir: PathBuf::from("out"),
            output_stem: None,
        }
    }
}

/// `0.1 → "01"`, `0.25 → "025"`.
pub fn rho_tag(rho: f64) -> String {
    format!("{rho}").replace(['.', '-'], "")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn stem(&self) -> String {
        self.output_stem
            .clone()
            .unwrap_or_else(|| format!("ergodic_rho{}", rho_tag(self.rho)))
    }

    /// Checks the field-level invariants that do not need the model.
    pub fn validate(&self) -> Result<()> {
        if self.sigma_xx_path.is_none() && !(0.0..1.0).contains(&self.rho) {
            return Err(Error::param("rho", format!("must lie in [0, 1), got {}", self.rho)));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::param("snr_db", "must be finite"));
        }
        if self.k_grid.is_empty() {
            return Err(Error::param("k_grid", "must not be empty"));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("k_grid", "must be strictly increasing"));
        }
        if self.k_grid[0] < 2 {
            return Err(Error::param("k_grid", "every K must be at least 2"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.measurements.is_empty() {
            return Err(Error::param("measurements", "no measurement class selected"));
        }
        Ok(())
    }

    /// Loads `H`, `Σ_XX` and derives `σ` from the SNR.
    pub fn build_setup(&self) -> Result<Setup> {
        self.validate()?;
        let (h, source) = match (&self.h_path, &self.case_path) {
            (Some(p), _) => (grid::load_matrix_csv(p)?, format!("csv:{}", p.display())),
            (None, Some(p)) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let case = grid::parse_matpower_case(&text)?;
                (build_dc_jacobian(&case, self.measurements)?.h, format!("case:{}", p.display()))
            }
            (None, None) => (
                build_dc_jacobian(&grid::ieee30(), self.measurements)?.h,
                "bundled:ieee30".to_string(),
            ),
        };
        let sigma_xx = match &self.sigma_xx_path {
            Some(p) => StateCovariance::from_matrix(grid::load_matrix_csv(p)?)?,
            None => toeplitz_covariance(h.ncols(), self.rho)?,
        };
        if sigma_xx.dim() != h.ncols() {
            return Err(Error::Dimension(format!(
                "Σ_XX is {0}x{0} but H has {1} columns",
                sigma_xx.dim(),
                h.ncols()
            )));
        }
        Setup::new(h, sigma_xx, self.snr_db, source)
    }
}

/// A resolved model: `H`, `Σ_XX`, `σ` and the nonzero spectrum.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: MeasurementModel,
    pub sigma_xx: StateCovariance,
    pub spectrum: SpectralData,
    pub source: String,
}

impl Setup {
    pub fn new(h: Matrix, sigma_xx: StateCovariance, snr_db: f64, source: String) -> Result<Self> {
        let sigma = sigma_from_snr(&h, &sigma_xx, snr_db)?;
        let spectrum = nonzero_spectrum(&h, &sigma_xx, RANK_TOL)?;
        Ok(Self {
            model: MeasurementModel::from_matrix(h, sigma)?,
            sigma_xx,
            spectrum,
            source,
        })
    }

    pub fn h(&self) -> &Matrix {
        &self.model.h
    }

    pub fn sigma(&self) -> f64 {
        self.model.sigma
    }

    pub fn optimal_cost(&self) -> f64 {
        self.spectrum.optimal_cost(self.sigma())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub bound: f64,
    pub optimal_cost: f64,
    pub gap: f64,
}

impl SweepRow {
    /// The bound sits more than three standard errors below the Monte Carlo mean.
    pub fn bound_violated(&self) -> bool {
        self.bound < self.mc_mean - 3.0 * self.mc_stderr
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub model_source: String,
    pub m: usize,
    pub n: usize,
    pub sigma2: f64,
    pub p: usize,
    pub spectrum_sha256: String,
    pub h_sha256: String,
    /// Base seed of each `K` cell, in grid order.
    pub cell_seeds: Vec<u64>,
    /// `K` values where the bound fell below the Monte Carlo estimate.
    pub bound_violations: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<SweepRow>,
    pub manifest: Manifest,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

fn digest_f64s<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    let mut hasher = Sha256::new();
    for v in values {
        hasher.update(v.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

pub fn cell_seed(seed: u64, k: usize) -> u64 {
    mc::derive_seed(seed, k as u64)
}

/// Computes the sweep rows without touching the filesystem.
pub fn sweep(config: &ExperimentConfig, setup: &Setup) -> Result<Vec<SweepRow>> {
    let p = setup.spectrum.p();
    if let Some(&k) = config.k_grid.iter().find(|&&k| k - 1 < p) {
        return Err(Error::param("k_grid", format!("K = {k} violates K − 1 >= p = {p}")));
    }
    let optimal_cost = setup.optimal_cost();
    config
        .k_grid
        .par_iter()
        .map(|&k| {
            let cfg = TrainingConfig {
                k,
                seed: cell_seed(config.seed, k),
                trials: config.trials,
                sampler: config.sampler,
                estimator: config.estimator,
            };
            let est = estimate_ergodic_cost(setup.h(), &setup.sigma_xx, setup.sigma(), &cfg)?;
            let bound = ergodic_upper_bound_with_spectrum(
                setup.h(),
                &setup.sigma_xx,
                setup.sigma(),
                k,
                config.formula,
                setup.spectrum.clone(),
            )?;
            Ok(SweepRow {
                k,
                mc_mean: est.mean,
                mc_stderr: est.stderr,
                bound: bound.value,
                optimal_cost,
                gap: bound.value - optimal_cost,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k, r.mc_mean, r.mc_stderr, r.bound, r.optimal_cost, r.gap
        )
        .unwrap();
    }
    out
}

/// Parses a CSV produced by [`rows_to_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Csv(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                return Err(Error::Csv(format!("line {}: expected 6 columns", i + 2)));
            }
            let f = |j: usize| -> Result<f64> {
                cells[j]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("line {}: bad number `{}`", i + 2, cells[j])))
            };
            Ok(SweepRow {
                k: cells[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("line {}: bad K `{}`", i + 2, cells[0])))?,
                mc_mean: f(1)?,
                mc_stderr: f(2)?,
                bound: f(3)?,
                optimal_cost: f(4)?,
                gap: f(5)?,
            })
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs the sweep and writes `<stem>.csv` and `<stem>.manifest.json`
/// into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = config.build_setup()?;
    run_experiment_with(config, &setup)
}

pub fn run_experiment_with(config: &ExperimentConfig, setup: &Setup) -> Result<ExperimentReport> {
    let rows = sweep(config, setup)?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let stem = config.stem();
    let csv_path = config.output_dir.join(format!("{stem}.csv"));
    let manifest_path = config.output_dir.join(format!("{stem}.manifest.json"));
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        model_source: setup.source.clone(),
        m: setup.h().nrows(),
        n: setup.h().ncols(),
        sigma2: setup.sigma() * setup.sigma(),
        p: setup.spectrum.p(),
        spectrum_sha256: digest_f64s(&setup.spectrum.eigenvalues),
        h_sha256: digest_f64s(setup.h().transpose().iter()),
        cell_seeds: config.k_grid.iter().map(|&k| cell_seed(config.seed, k)).collect(),
        bound_violations: rows.iter().filter(|r| r.bound_violated()).map(|r| r.k).collect(),
    };
    write_file(&csv_path, &rows_to_csv(&rows))?;
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&manifest_path, &(json + "\n"))?;
    Ok(ExperimentReport {
        rows,
        manifest,
        csv_path,
        manifest_path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCheck {
    pub rho: f64,
    pub bound: f64,
    pub optimal_cost: f64,
}

impl AsymptoticCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.bound - self.optimal_cost).abs() / self.optimal_cost.abs()
    }
}

/// Bound at `K − 1 = 10⁸` next to `f(Σ*_AA)`.
pub fn asymptotic_check(setup: &Setup, rho: f64, formula: FormulaTag) -> Result<AsymptoticCheck> {
    let r = ergodic_upper_bound_with_spectrum(
        setup.h(),
        &setup.sigma_xx,
        setup.sigma(),
        ASYMPTOTIC_DOF + 1,
        formula,
        setup.spectrum.clone(),
    )?;
    Ok(AsymptoticCheck {
        rho,
        bound: r.value,
        optimal_cost: setup.optimal_cost(),
    })
}

#[derive(Debug, Clone)]
pub struct Fig1Report {
    pub runs: Vec<ExperimentReport>,
    pub asymptotic: Vec<AsymptoticCheck>,
}

/// Config of one `fig1` curve: bundled IEEE 30-bus, default measurements,
/// SNR 20 dB, default `K` grid.
pub fn fig1_config(rho: f64, output_dir: &Path, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        rho,
        snr_db: FIG1_SNR_DB,
        trials,
        seed,
        output_dir: output_dir.to_path_buf(),
        output_stem: Some(format!("fig1_rho{}", rho_tag(rho))),
        ..ExperimentConfig::default()
    }
}

/// Writes `fig1_rho01.csv` and `fig1_rho08.csv` (plus manifests).
pub fn emit_fig1_dataset(output_dir: &Path, trials: usize, seed: u64) -> Result<Fig1Report> {
    emit_fig1_with(output_dir, trials, seed, default_k_grid())
}

pub fn emit_fig1_with(output_dir: &Path, trials: usize, seed: u64, k_grid: Vec<usize>) -> Result<Fig1Report> {
    let mut runs = Vec::new();
    let mut asymptotic = Vec::new();
    for rho in FIG1_RHOS {
        let config = ExperimentConfig {
            k_grid: k_grid.clone(),
            ..fig1_config(rho, output_dir, trials, seed)
        };
        let setup = config.build_setup()?;
        asymptotic.push(asymptotic_check(&setup, rho, config.formula)?);
        runs.push(run_experiment_with(&config, &setup)?);
    }
    Ok(Fig1Report { runs, asymptotic })
}
