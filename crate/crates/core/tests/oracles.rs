//! Monte Carlo and closed-form oracles for the sampling, bound and detection
//! pipelines.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use stealthbound::bound::{ergodic_upper_bound, logdet_lower_bound, solve_bound_program, FormulaTag};
use stealthbound::detection::{run_detection, Lrt};
use stealthbound::gaussian::{gaussian_kl, SpectralData, StateCovariance};
use stealthbound::learning::{estimate_ergodic_cost, Estimator, Sampler, TrainingConfig, WishartSampler};
use stealthbound::linalg::{Matrix, Vector};
use stealthbound::mc::{summarize, trial_rng};
use stealthbound::gaussian::DerivedCovariances;

use common::{grid_oracle, logdet_eig, program_objective, random_psd};

fn scalar(v: f64) -> Matrix {
    Matrix::from_element(1, 1, v)
}

/// Two-sided KS distance between an empirical sample and a CDF.
fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[test]
fn diagonal_entries_follow_scaled_chi_square() {
    let n = 4;
    let k = 20;
    let id = StateCovariance::from_matrix(Matrix::identity(n, n)).unwrap();
    let draws = 5000;
    // 1% critical value of the one-sample KS statistic.
    let crit = 1.63 / (draws as f64).sqrt();
    for (estimator, dof) in [(Estimator::MeanSubtracted, k - 1), (Estimator::Uncentered, k)] {
        let law = ChiSquared::new(dof as f64).unwrap();
        for sampler in [Sampler::Empirical, Sampler::Bartlett] {
            let ws = WishartSampler::new(&id, k, sampler, estimator).unwrap();
            for entry in [0, n - 1] {
                let xs: Vec<f64> = (0..draws)
                    .map(|t| ws.draw(&mut trial_rng(7, t)).s_xx[(entry, entry)] * (k - 1) as f64)
                    .collect();
                let d = ks_one_sample(xs, |x| law.cdf(x));
                assert!(d < crit, "{sampler:?}/{estimator:?} entry {entry}: KS {d} >= {crit}");
            }
        }
    }
}

#[test]
fn empirical_and_bartlett_samplers_agree_in_law() {
    let sxx = stealthbound::gaussian::toeplitz_covariance(3, 0.6).unwrap();
    let draws = 5000;
    let stat = |sampler, seed| -> (Vec<f64>, Vec<f64>) {
        let ws = WishartSampler::new(&sxx, 12, sampler, Estimator::MeanSubtracted).unwrap();
        (0..draws)
            .map(|t| {
                let s = ws.draw(&mut trial_rng(seed, t)).s_xx;
                (s[(0, 1)], logdet_eig(&s))
            })
            .unzip()
    };
    let (a_off, a_ld) = stat(Sampler::Empirical, 1);
    let (b_off, b_ld) = stat(Sampler::Bartlett, 2);
    // 0.1% two-sample critical value.
    let crit = 1.95 * (2.0 / draws as f64).sqrt();
    assert!(ks_two_sample(a_off, b_off) < crit);
    assert!(ks_two_sample(a_ld, b_ld) < crit);
}

#[test]
fn bartlett_correct_below_full_rank() {
    // dof < N exercises the outer-product path.
    let n = 6;
    let k = 4;
    let sxx = stealthbound::gaussian::toeplitz_covariance(n, 0.3).unwrap();
    let ws = WishartSampler::new(&sxx, k, Sampler::Bartlett, Estimator::MeanSubtracted).unwrap();
    let draws = 20_000;
    let samples: Vec<Matrix> = (0..draws).map(|t| ws.draw(&mut trial_rng(9, t)).s_xx).collect();
    let rank = samples[0].clone().svd(false, false).rank(1e-9);
    assert_eq!(rank, k - 1);
    for i in 0..n {
        for j in 0..n {
            let vals: Vec<f64> = samples.iter().map(|s| s[(i, j)]).collect();
            let s = summarize(&vals);
            assert!((s.mean - sxx.sigma_xx[(i, j)]).abs() < 4.0 * s.stderr);
        }
    }
}

#[test]
fn scalar_ergodic_cost_matches_chi_square_expectation() {
    // f(S) = ½[S/2 − ln(S+1) + ln 2], S ~ χ²₁₀₀/100.
    let h = scalar(1.0);
    let sxx = StateCovariance::from_matrix(scalar(1.0)).unwrap();
    let cfg = TrainingConfig::new(101, 11).with_trials(200_000);
    let est = estimate_ergodic_cost(&h, &sxx, 1.0, &cfg).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let law = rand_distr::ChiSquared::new(100.0).unwrap();
    let direct: Vec<f64> = (0..200_000)
        .map(|_| {
            let s: f64 = rng.sample(law) / 100.0;
            0.5 * (s / 2.0 - (s + 1.0).ln() + 2f64.ln())
        })
        .collect();
    let d = summarize(&direct);
    assert!((est.mean - 0.25125).abs() < 4.0 * est.stderr + 5e-5, "{est:?}");
    assert!((est.mean - d.mean).abs() < 4.0 * (est.stderr.hypot(d.stderr)));

    let bound = ergodic_upper_bound(&h, &sxx, 1.0, 101, FormulaTag::Paper).unwrap();
    assert!((bound.value - 0.25250).abs() < 5e-5);
    assert!(bound.value >= est.mean - 3.0 * est.stderr);
}

#[test]
fn logdet_lower_bound_below_monte_carlo() {
    let spectrum = SpectralData { eigenvalues: vec![1.0] };
    let (lb, _) = logdet_lower_bound(&spectrum, 1.0, 1, 101, FormulaTag::RealExact).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let law = rand_distr::ChiSquared::new(100.0).unwrap();
    let vals: Vec<f64> = (0..100_000).map(|_| (rng.sample::<f64, _>(law) / 100.0 + 1.0).ln()).collect();
    let s = summarize(&vals);
    assert!(lb <= s.mean + 3.0 * s.stderr, "lb {lb} vs {s:?}");
    let oracle = statrs::function::gamma::digamma(50.0) + 2f64.ln() - 100f64.ln() + 2f64.ln();
    assert!((lb - oracle).abs() < 1e-12);
}

#[test]
fn worked_clipped_program_matches_brute_force() {
    let b = [10.0, 0.1];
    let prog = solve_bound_program(&b, 101).unwrap();
    let oracle = grid_oracle(&b, prog.box_lo, prog.box_hi);
    assert!((prog.objective - oracle).abs() < 1e-9);
    // ln(10 + 1/lo) + ln(0.1 + 1/(2 − lo)) with lo = (1 − √0.02)².
    assert!((prog.objective - 2.315354437).abs() < 1e-8);
    assert!((prog.x_star[0] - 0.73716).abs() < 1e-5);
    assert!((prog.objective - program_objective(&b, &prog.x_star)).abs() < 1e-12);
}

#[test]
fn mean_log_ratio_equals_divergences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let m = 4;
    let sigma_yy = random_psd(&mut rng, m, m, 0.5);
    let sigma_yaya = &sigma_yy + random_psd(&mut rng, m, 2, 0.0);
    let derived = DerivedCovariances {
        sigma_yy: sigma_yy.clone(),
        sigma_yaya: sigma_yaya.clone(),
    };
    let lrt = Lrt::new(&derived).unwrap();
    let l0 = sigma_yy.clone().cholesky().unwrap().unpack();
    let l1 = sigma_yaya.clone().cholesky().unwrap().unpack();
    let draws = 200_000;
    let mut h0 = Vec::with_capacity(draws);
    let mut h1 = Vec::with_capacity(draws);
    for _ in 0..draws {
        let z = Vector::from_fn(m, |_, _| rng.sample(StandardNormal));
        h0.push(lrt.log_ratio(&(&l0 * &z)));
        h1.push(lrt.log_ratio(&(&l1 * &z)));
    }
    let (s0, s1) = (summarize(&h0), summarize(&h1));
    let d10 = gaussian_kl(&sigma_yaya, &sigma_yy).unwrap();
    let d01 = gaussian_kl(&sigma_yy, &sigma_yaya).unwrap();
    assert!((s1.mean - d10).abs() < 4.0 * s1.stderr, "{s1:?} vs {d10}");
    assert!((s0.mean + d01).abs() < 4.0 * s0.stderr, "{s0:?} vs {d01}");
}

#[test]
fn log_ratio_matches_density_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let m = 3;
    let s0 = random_psd(&mut rng, m, m, 0.3);
    let s1 = random_psd(&mut rng, m, m, 0.3);
    let lrt = Lrt::new(&DerivedCovariances {
        sigma_yy: s0.clone(),
        sigma_yaya: s1.clone(),
    })
    .unwrap();
    let log_density = |s: &Matrix, y: &Vector| {
        let q = (y.transpose() * s.clone().try_inverse().unwrap() * y)[(0, 0)];
        -0.5 * (logdet_eig(s) + q + m as f64 * (2.0 * std::f64::consts::PI).ln())
    };
    for _ in 0..20 {
        let y = Vector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal) * 2.0);
        let want = log_density(&s1, &y) - log_density(&s0, &y);
        assert!((lrt.log_ratio(&y) - want).abs() < 1e-9);
    }
}

#[test]
fn scalar_detection_rates_match_chi_square() {
    // Under the nominal law Σy² ~ χ²_n and the test rejects when Σy² exceeds
    // its (1−ε) quantile; under the attacked law Σy²/2 ~ χ²_n.
    let derived = DerivedCovariances {
        sigma_yy: scalar(1.0),
        sigma_yaya: scalar(2.0),
    };
    let trials = 100_000;
    for n in [10usize, 50] {
        let law = ChiSquared::new(n as f64).unwrap();
        let c = law.inverse_cdf(0.95);
        let beta = law.cdf(c / 2.0);
        let exp = run_detection(&derived, n, 0.05, trials, 16).unwrap();
        // Threshold noise widens the spread beyond the binomial error.
        assert!((exp.alpha_hat - 0.05).abs() < 0.004, "{exp:?}");
        assert!((exp.beta_hat - beta).abs() < 6.0 * exp.beta_stderr() + 0.004, "n={n}: {exp:?} vs {beta}");
    }
}
