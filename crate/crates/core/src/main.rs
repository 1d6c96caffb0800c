use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stealthbound::bound::{ergodic_upper_bound_with_spectrum, FormulaTag};
use stealthbound::detection::{error_exponent_estimate, DEFAULT_EPSILON};
use stealthbound::experiment::{emit_fig1_dataset, run_experiment, ExperimentConfig, ExperimentReport};
use stealthbound::gaussian::{derived_covariances, optimal_attack_covariance, stealth_cost, DerivedCovariances};
use stealthbound::grid::{self, build_dc_jacobian, parse_matpower_case, write_matrix_csv, MeasurementSelection};
use stealthbound::learning::{estimate_ergodic_cost, Estimator, Sampler, TrainingConfig};
use stealthbound::linalg::Matrix;
use stealthbound::{Error, Result};

#[derive(Parser)]
#[command(name = "stealthbound", version, about = "Stealth attack cost, ergodic Monte Carlo and random-matrix bounds")]
struct Cli {
    /// Worker threads for Monte Carlo (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a MATPOWER case and print bus/branch counts.
    Parse { case: Option<PathBuf> },
    /// Build the DC Jacobian and write it as CSV.
    Model {
        #[command(flatten)]
        model: ModelArgs,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal attack: σ, rank, closed-form cost.
    Optimal {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Monte Carlo ergodic cost of the learned attack at one K.
    Ergodic {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "bartlett", value_parser = parse_sampler)]
        sampler: Sampler,
        /// Skip mean subtraction in the sample covariance.
        #[arg(long)]
        uncentered: bool,
    },
    /// Random-matrix upper bound on the ergodic cost at one K.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "paper")]
        formula: FormulaTag,
    },
    /// LRT error exponents on a synthetic system with covariances from CSV
    /// (defaults to the scalar pair Σ_YY = 1, Σ_{Y_A Y_A} = 2).
    Detect {
        #[arg(long)]
        sigma_yy: Option<PathBuf>,
        #[arg(long)]
        sigma_yaya: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "10,50,200")]
        n: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a full K sweep from a TOML config file.
    Run {
        config: PathBuf,
    },
    /// Emit fig1_rho01.csv and fig1_rho08.csv for the IEEE 30-bus case.
    Fig1 {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// TOML experiment config; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// MATPOWER case (bundled IEEE 30-bus when omitted).
    #[arg(long)]
    case: Option<PathBuf>,
    /// Precomputed H as CSV.
    #[arg(long, conflicts_with = "case")]
    h: Option<PathBuf>,
    /// Precomputed Σ_XX as CSV (overrides --rho).
    #[arg(long)]
    sigma_xx: Option<PathBuf>,
    /// Toeplitz correlation of the state [default: 0.8].
    #[arg(long)]
    rho: Option<f64>,
    /// Signal-to-noise ratio in dB [default: 20].
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    to_flows: bool,
    #[arg(long)]
    no_from_flows: bool,
    #[arg(long)]
    no_injections: bool,
}

impl ModelArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_toml_file(p)?,
            None => ExperimentConfig::default(),
        };
        if self.case.is_some() || self.h.is_some() {
            cfg.case_path = self.case.clone();
            cfg.h_path = self.h.clone();
        }
        if self.sigma_xx.is_some() {
            cfg.sigma_xx_path = self.sigma_xx.clone();
        }
        cfg.rho = self.rho.unwrap_or(cfg.rho);
        cfg.snr_db = self.snr_db.unwrap_or(cfg.snr_db);
        let sel: &mut MeasurementSelection = &mut cfg.measurements;
        sel.include_to_flows |= self.to_flows;
        sel.include_from_flows &= !self.no_from_flows;
        sel.include_injections &= !self.no_injections;
        Ok(cfg)
    }

    fn jacobian(&self) -> Result<Matrix> {
        let cfg = self.config()?;
        match (&cfg.h_path, &cfg.case_path) {
            (Some(p), _) => grid::load_matrix_csv(p),
            (None, case) => Ok(build_dc_jacobian(&read_case(case.as_ref())?, cfg.measurements)?.h),
        }
    }
}

fn parse_sampler(s: &str) -> std::result::Result<Sampler, String> {
    match s {
        "bartlett" => Ok(Sampler::Bartlett),
        "empirical" => Ok(Sampler::Empirical),
        other => Err(format!("unknown sampler `{other}` (expected bartlett or empirical)")),
    }
}

fn read_case(path: Option<&PathBuf>) -> Result<grid::GridCase> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            Ok(parse_matpower_case(&text)?)
        }
        None => Ok(grid::ieee30()),
    }
}

fn warn_violations(rep: &ExperimentReport) {
    for k in &rep.manifest.bound_violations {
        eprintln!(
            "warning: {}: bound below Monte Carlo mean - 3 stderr at K = {k}",
            rep.csv_path.display()
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Parse { case } => {
            let case = read_case(case.as_ref())?;
            let slack = case.slack().map(|b| b.id).unwrap_or_default();
            println!("base_mva = {}", case.base_mva);
            println!("buses = {}", case.buses.len());
            println!("branches = {}", case.branches.len());
            println!("in_service_branches = {}", case.in_service_branches().count());
            println!("slack_bus = {slack}");
        }
        Command::Model { model, out } => {
            let h = model.jacobian()?;
            let csv = write_matrix_csv(&h);
            match out {
                Some(p) => {
                    std::fs::write(&p, csv).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    eprintln!("wrote {}x{} H to {}", h.nrows(), h.ncols(), p.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Optimal { model } => {
            let setup = model.config()?.build_setup()?;
            let opt = optimal_attack_covariance(setup.h(), &setup.sigma_xx)?;
            let derived = derived_covariances(setup.h(), &setup.sigma_xx, setup.sigma(), &opt)?;
            println!("m = {}", setup.h().nrows());
            println!("n = {}", setup.h().ncols());
            println!("sigma2 = {}", setup.sigma() * setup.sigma());
            println!("p = {}", setup.spectrum.p());
            println!("optimal_cost = {}", stealth_cost(&opt, &derived, setup.sigma())?);
            println!("optimal_cost_closed_form = {}", setup.optimal_cost());
        }
        Command::Ergodic {
            model,
            k,
            trials,
            seed,
            sampler,
            uncentered,
        } => {
            let setup = model.config()?.build_setup()?;
            let cfg = TrainingConfig {
                k,
                seed,
                trials,
                sampler,
                estimator: if uncentered {
                    Estimator::Uncentered
                } else {
                    Estimator::MeanSubtracted
                },
            };
            let est = estimate_ergodic_cost(setup.h(), &setup.sigma_xx, setup.sigma(), &cfg)?;
            println!("k = {}", est.k);
            println!("trials = {}", est.trials);
            println!("mc_mean = {}", est.mean);
            println!("mc_stderr = {}", est.stderr);
            println!("optimal_cost = {}", setup.optimal_cost());
        }
        Command::Bound { model, k, formula } => {
            let setup = model.config()?.build_setup()?;
            let r = ergodic_upper_bound_with_spectrum(
                setup.h(),
                &setup.sigma_xx,
                setup.sigma(),
                k,
                formula,
                setup.spectrum.clone(),
            )?;
            println!("k = {k}");
            println!("formula = {formula}");
            println!("p = {}", r.spectrum.p());
            println!("bound = {}", r.value);
            println!("optimal_cost = {}", r.optimal_cost);
            println!("gap = {}", r.gap());
            println!("digamma_sum = {}", r.digamma_sum);
            println!("logdet_lower = {}", r.logdet_lower);
            if let Some(prog) = &r.program {
                println!("box = [{}, {}]", prog.box_lo, prog.box_hi);
                println!("program_objective = {}", prog.objective);
            }
        }
        Command::Detect {
            sigma_yy,
            sigma_yaya,
            n,
            epsilon,
            trials,
            seed,
        } => {
            let load = |p: Option<PathBuf>, default: f64| -> Result<Matrix> {
                match p {
                    Some(p) => grid::load_matrix_csv(p),
                    None => Ok(Matrix::from_element(1, 1, default)),
                }
            };
            let derived = DerivedCovariances {
                sigma_yy: load(sigma_yy, 1.0)?,
                sigma_yaya: load(sigma_yaya, 2.0)?,
            };
            let rep = error_exponent_estimate(&derived, &n, epsilon, trials, seed)?;
            println!("kl_attacked_nominal = {}", rep.kl_attacked_nominal);
            println!("kl_nominal_attacked = {}", rep.kl_nominal_attacked);
            println!("n,tau,alpha_hat,beta_hat,exponent,radius");
            for p in &rep.points {
                let fmt = |v: Option<f64>| v.map_or_else(|| "unestimable".to_string(), |x| x.to_string());
                println!(
                    "{},{},{},{},{},{}",
                    p.n,
                    p.experiment.tau,
                    p.experiment.alpha_hat,
                    p.experiment.beta_hat,
                    fmt(p.exponent),
                    fmt(p.radius)
                );
            }
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_toml_file(&config)?;
            let rep = run_experiment(&cfg)?;
            warn_violations(&rep);
            println!("wrote {}", rep.csv_path.display());
            println!("wrote {}", rep.manifest_path.display());
        }
        Command::Fig1 { out, trials, seed } => {
            let rep = emit_fig1_dataset(&out, trials, seed)?;
            for run in &rep.runs {
                warn_violations(run);
                println!("wrote {} ({} rows)", run.csv_path.display(), run.rows.len());
            }
            for a in &rep.asymptotic {
                println!(
                    "rho = {}: bound(K-1 = 1e8) = {} vs optimal_cost = {} (relative gap {:.3e})",
                    a.rho,
                    a.bound,
                    a.optimal_cost,
                    a.relative_gap()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
