use std::path::Path;
use std::process::{Command, Output};

use stealthbound::bound::{ergodic_upper_bound, FormulaTag};
use stealthbound::experiment::{
    emit_fig1_with, fig1_config, rows_from_csv, run_experiment, sweep, ExperimentConfig, CSV_HEADER,
};
use stealthbound::gaussian::{sigma_from_snr, toeplitz_covariance};
use stealthbound::grid::{build_dc_jacobian, ieee30};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stealthbound")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn parse_reports_bundled_case() {
    let o = cli(&["parse"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(value(&s, "buses"), 30.0);
    assert_eq!(value(&s, "branches"), 41.0);
    assert_eq!(value(&s, "slack_bus"), 1.0);
}

#[test]
fn parse_error_carries_position() {
    let mut lines: Vec<String> = stealthbound::grid::IEEE30_CASE.lines().map(str::to_owned).collect();
    let row = lines.iter().position(|l| l.contains("mpc.bus")).unwrap() + 3;
    lines[row] = lines[row].replacen('3', "x", 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.m");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let o = cli(&["parse", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains(&format!("line {}", row + 1)), "{}", stderr(&o));
}

#[test]
fn seed_is_required_for_monte_carlo_commands() {
    for args in [&["ergodic", "--k", "50"][..], &["fig1"][..]] {
        let o = cli(args);
        assert!(!o.status.success());
        assert!(stderr(&o).contains("--seed"));
    }
}

#[test]
fn every_subcommand_is_listed() {
    let help = stdout(&cli(&["--help"]));
    for sub in ["parse", "model", "optimal", "ergodic", "bound", "detect", "fig1"] {
        assert!(help.contains(sub), "missing {sub} in help");
    }
}

#[test]
fn too_few_samples_are_refused() {
    let o = cli(&["bound", "--k", "20"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("K − 1 >= p"), "{}", stderr(&o));
}

#[test]
fn csv_model_reproduces_bundled_bound() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.csv");
    assert!(cli(&["model", "--out", h.to_str().unwrap()]).status.success());
    let from_case = stdout(&cli(&["bound", "--k", "1000"]));
    let from_csv = stdout(&cli(&["bound", "--k", "1000", "--h", h.to_str().unwrap()]));
    assert!((value(&from_case, "bound") - value(&from_csv, "bound")).abs() < 1e-9);
}

#[test]
fn optimal_command_agrees_with_closed_form() {
    let s = stdout(&cli(&["optimal", "--rho", "0.1"]));
    assert_eq!(value(&s, "m"), 71.0);
    assert_eq!(value(&s, "p"), 29.0);
    assert!((value(&s, "optimal_cost") - value(&s, "optimal_cost_closed_form")).abs() < 1e-9);
}

#[test]
fn toml_config_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg_path,
        format!(
            "rho = 0.1\nsnr_db = 20.0\nk_grid = [50, 500]\ntrials = 50\nseed = 4\nformula = \"real_exact\"\n\
             output_dir = {:?}\noutput_stem = \"small\"\n\n[measurements]\ninclude_to_flows = true\n",
            out
        ),
    )
    .unwrap();
    let o = cli(&["run", cfg_path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("small.csv")).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    let rows = rows_from_csv(&csv).unwrap();
    assert_eq!(rows.iter().map(|r| r.k).collect::<Vec<_>>(), vec![50, 500]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("small.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["m"], 112);
    assert_eq!(manifest["config"]["formula"], "real_exact");
    assert_eq!(manifest["cell_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "rho = 0.1\nsnr = 20\n").unwrap();
    let o = cli(&["run", cfg_path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("snr"));
}

#[test]
fn bound_decreases_along_the_grid() {
    let h = build_dc_jacobian(&ieee30(), Default::default()).unwrap().h;
    for rho in [0.1, 0.8] {
        let sxx = toeplitz_covariance(h.ncols(), rho).unwrap();
        let sigma = sigma_from_snr(&h, &sxx, 20.0).unwrap();
        for tag in [FormulaTag::Paper, FormulaTag::RealExact] {
            let vals: Vec<f64> = [50, 100, 500, 1_000, 10_000, 100_000]
                .iter()
                .map(|&k| ergodic_upper_bound(&h, &sxx, sigma, k, tag).unwrap().value)
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{tag}: {vals:?}");
        }
    }
}

#[test]
fn sweep_ignores_thread_count() {
    let config = ExperimentConfig {
        k_grid: vec![50, 200, 5000],
        ..fig1_config(0.8, Path::new("unused"), 64, 21)
    };
    let setup = config.build_setup().unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep(&config, &setup).unwrap())
    };
    let a = run(1);
    let b = run(3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mc_mean.to_bits(), y.mc_mean.to_bits());
        assert_eq!(x.mc_stderr.to_bits(), y.mc_stderr.to_bits());
    }
}

#[test]
fn fig1_files_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let grid = vec![50, 1000];
    emit_fig1_with(a.path(), 32, 5, grid.clone()).unwrap();
    let rep = emit_fig1_with(b.path(), 32, 5, grid).unwrap();
    for name in ["fig1_rho01.csv", "fig1_rho08.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    assert!(rep.asymptotic.iter().all(|c| c.relative_gap() < 0.005));
    // A different seed moves the Monte Carlo column.
    let c = tempfile::tempdir().unwrap();
    emit_fig1_with(c.path(), 32, 6, vec![50, 1000]).unwrap();
    assert_ne!(
        std::fs::read(a.path().join("fig1_rho01.csv")).unwrap(),
        std::fs::read(c.path().join("fig1_rho01.csv")).unwrap()
    );
}

#[test]
fn run_experiment_refuses_short_training_sets() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        k_grid: vec![10],
        output_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let err = run_experiment(&config).unwrap_err().to_string();
    assert!(err.contains("k_grid"), "{err}");
}

#[test]
fn config_file_and_flags_resolve_alike() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, "rho = 0.1\nsnr_db = 10.0\n").unwrap();
    let cfg = cfg_path.to_str().unwrap();
    let via_file = value(&stdout(&cli(&["bound", "--k", "500", "--config", cfg])), "bound");
    let via_flags = value(&stdout(&cli(&["bound", "--k", "500", "--rho", "0.1", "--snr-db", "10"])), "bound");
    assert_eq!(via_file, via_flags);
    let overridden = value(&stdout(&cli(&["bound", "--k", "500", "--config", cfg, "--snr-db", "20"])), "bound");
    let plain = value(&stdout(&cli(&["bound", "--k", "500", "--rho", "0.1"])), "bound");
    assert_eq!(overridden, plain);
}
