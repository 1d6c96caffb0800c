mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stealthbound::bound::{digamma, digamma_half, digamma_real};
use stealthbound::bound::{expected_logdet_std_wishart, extreme_eig_bounds, solve_bound_program, FormulaTag};
use stealthbound::gaussian::{
    derived_covariances, gaussian_kl_marginals, gaussian_mutual_information, optimal_attack_covariance,
    stealth_cost, toeplitz_covariance, AttackKind, AttackModel, CostEvaluator, StateCovariance,
};

use common::{cost_oracle, gaussian_matrix, random_psd};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_is_information_plus_divergence(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=10, sigma in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = gaussian_matrix(&mut rng, m, n);
        let sxx = StateCovariance::from_matrix(random_psd(&mut rng, n, n, 0.1)).unwrap();
        let rank = (seed as usize) % (m + 1);
        let attack = AttackModel::new(random_psd(&mut rng, m, rank, 0.0), AttackKind::Custom).unwrap();
        let derived = derived_covariances(&h, &sxx, sigma, &attack).unwrap();
        let f = stealth_cost(&attack, &derived, sigma).unwrap();
        let i = gaussian_mutual_information(&attack, &derived, sigma).unwrap();
        let d = gaussian_kl_marginals(&derived).unwrap();
        prop_assert!((f - (i + d)).abs() < 1e-9);
        prop_assert!(i >= -1e-12 && d >= -1e-12);
        prop_assert!((f - cost_oracle(&derived.sigma_yy, &attack.sigma_aa, sigma)).abs() < 1e-8);
    }

    #[test]
    fn optimal_attack_is_never_beaten(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=10, t in 1e-4f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = gaussian_matrix(&mut rng, m, n);
        let sxx = StateCovariance::from_matrix(random_psd(&mut rng, n, n, 0.1)).unwrap();
        let sigma = 0.7;
        let opt = optimal_attack_covariance(&h, &sxx).unwrap();
        let derived = derived_covariances(&h, &sxx, sigma, &opt).unwrap();
        let eval = CostEvaluator::new(&derived.sigma_yy, sigma).unwrap();
        let f_star = eval.cost(&opt.sigma_aa).unwrap();
        let other = &opt.sigma_aa + random_psd(&mut rng, m, 1 + (seed as usize) % m, 0.0) * t;
        prop_assert!(eval.cost(&other).unwrap() >= f_star - 1e-10);
        // An arbitrary PSD attack too.
        let any_psd = random_psd(&mut rng, m, m, 0.0) * t;
        prop_assert!(eval.cost(&any_psd).unwrap() >= f_star - 1e-10);
    }

    #[test]
    fn program_solution_is_feasible_and_stationary(
        b in prop::collection::vec(1e-2f64..1e2, 1..=12),
        extra in 0usize..2000,
    ) {
        let p = b.len();
        let k = p + 1 + extra;
        let prog = solve_bound_program(&b, k).unwrap();
        prop_assert!((prog.x_star.iter().sum::<f64>() - p as f64).abs() < 1e-10);
        prop_assert!(prog.x_star.iter().all(|&x| x >= prog.box_lo - 1e-15 && x <= prog.box_hi + 1e-15));
        prop_assert!(prog.kkt_residual() < 1e-8, "kkt residual {}", prog.kkt_residual());
        // x = 1 is always feasible; the minimizer can only do better.
        let uniform = common::program_objective(&b, &vec![1.0; p]);
        prop_assert!(prog.objective <= uniform + 1e-12);
        prop_assert!((prog.objective - common::program_objective(&b, &prog.x_star)).abs() < 1e-12);
    }

    #[test]
    fn program_matches_grid_oracle(b in prop::collection::vec(1e-2f64..1e2, 1..=3), extra in 0usize..500) {
        let k = b.len() + 2 + extra;
        let prog = solve_bound_program(&b, k).unwrap();
        let oracle = common::grid_oracle(&b, prog.box_lo, prog.box_hi);
        prop_assert!(prog.objective <= oracle + 1e-6);
    }

    #[test]
    fn eigen_box_contains_one(l in 1usize..200, extra in 0usize..5000) {
        let b = extreme_eig_bounds(l, l + 1 + extra).unwrap();
        prop_assert!(b.lower_min >= 0.0 && b.lower_min <= 1.0);
        prop_assert!(b.upper_max >= 1.0 && b.upper_max.is_finite());
    }

    #[test]
    fn digamma_matches_reference(n in 1u64..2_000_000) {
        let want = statrs::function::gamma::digamma(n as f64);
        prop_assert!((digamma(n).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
        prop_assert!((digamma(n + 1).unwrap() - digamma(n).unwrap() - 1.0 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn half_digamma_matches_reference(j in 1u64..200_000) {
        let want = statrs::function::gamma::digamma(j as f64 / 2.0);
        prop_assert!((digamma_half(j).unwrap() - want).abs() < 1e-11 * want.abs().max(1.0));
    }

    #[test]
    fn real_digamma_recurrence(x in 0.05f64..500.0) {
        let lhs = digamma_real(x + 1.0).unwrap() - digamma_real(x).unwrap();
        prop_assert!((lhs - 1.0 / x).abs() < 1e-10 * (1.0 / x).max(1.0));
    }

    #[test]
    fn real_exact_logdet_below_paper(p in 1usize..30, extra in 0usize..1000) {
        // ψ((K−1−i)/2) + ln 2 < ψ(K−1−i) by the duplication formula.
        let k = p + 1 + extra;
        let paper = expected_logdet_std_wishart(p, k, FormulaTag::Paper).unwrap();
        let real = expected_logdet_std_wishart(p, k, FormulaTag::RealExact).unwrap();
        prop_assert!(real < paper);
        prop_assert!(paper <= 1e-12);
    }

    #[test]
    fn toeplitz_is_positive_definite(n in 1usize..40, rho in 0.0f64..0.99) {
        let s = toeplitz_covariance(n, rho).unwrap();
        prop_assert!(s.sigma_xx.clone().cholesky().is_some());
        prop_assert_eq!(s.sigma_xx[(0, n - 1)], rho.powi(n as i32 - 1));
    }
}
