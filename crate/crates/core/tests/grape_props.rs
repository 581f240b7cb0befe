use hforge_core::grape::*;
use hforge_core::qcore::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(seed: u64, eta: f64) -> GrapeProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut herm = || {
        let mut h = zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        hermitian_part(&h)
    };
    let (drift, a, b, gen) = (herm(), herm(), herm(), herm());
    let target = herm_expm_unchecked(&gen, 1.0);
    let p0 = diag(&[ONE, ONE, ZERO]);
    GrapeProblem::new(drift * c(0.2, 0.0), vec![a, b], target, p0, eta, 6, 1.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn analytic_gradient_matches_central_differences(seed in any::<u64>(), eta in 0.0..0.3f64) {
        let problem = random_problem(seed, eta);
        let w = random_controls(&problem, 1.0, seed ^ 0x5eed);
        let ga = objective_gradient(&w, &problem, GradientMode::Analytic).unwrap();
        let gf = objective_gradient(&w, &problem, GradientMode::FiniteDifference).unwrap();
        prop_assert!((&ga - &gf).norm() / gf.norm().max(1e-12) < 1e-5);
    }

    #[test]
    fn fidelity_term_ignores_global_phase_of_target(seed in any::<u64>(), chi in -3.0..3.0f64) {
        let problem = random_problem(seed, 0.1);
        let mut shifted = problem.clone();
        shifted.target = &problem.target * cis(chi);
        let w = random_controls(&problem, 1.0, seed);
        let a = objective_parts(&w, &problem).unwrap();
        let b = objective_parts(&w, &shifted).unwrap();
        prop_assert!((a.fidelity - b.fidelity).abs() < 1e-12);
        prop_assert!((a.objective - b.objective).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn line_search_trace_is_monotone(seed in any::<u64>()) {
        let problem = random_problem(seed, 1e-3);
        let cfg = GrapeConfig { step: 0.05, max_iterations: 40, step_growth: 1.5, ..Default::default() };
        let w0 = random_controls(&problem, 1.0, seed);
        let opt = grape_optimize(&problem, &cfg, &w0).unwrap();
        for pair in opt.trace.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
    }

    #[test]
    fn identical_inputs_give_bit_identical_traces(seed in any::<u64>()) {
        let problem = random_problem(seed, 1e-3);
        let cfg = GrapeConfig { step: 0.05, max_iterations: 20, ..Default::default() };
        let w0 = random_controls(&problem, 1.0, seed);
        let a = grape_optimize(&problem, &cfg, &w0).unwrap();
        let b = grape_optimize(&problem, &cfg, &random_controls(&problem, 1.0, seed)).unwrap();
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.controls, b.controls);
    }
}

#[test]
fn robust_run_is_deterministic_across_thread_counts() {
    let sc = NvScenario { segments: 20, ..Default::default() };
    let problem = sc.hadamard_problem().unwrap();
    let noise = sc.noise();
    let quad = sc.quadrature(3);
    let w0 = sc.lambda_hadamard_controls(&problem).unwrap();
    let cfg = GrapeConfig { step: 1e-2, max_iterations: 5, robust: Some(RobustSpec { noise, quadrature: quad }), ..Default::default() };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| grape_optimize(&problem, &cfg, &w0)).unwrap()
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.controls, b.controls);
}

#[test]
fn exact_holonomic_start_satisfies_holonomy_tolerance() {
    let sc = NvScenario::default();
    let problem = sc.hadamard_problem().unwrap();
    let w0: DMatrix<f64> = sc.lambda_hadamard_controls(&problem).unwrap();
    let cfg = GrapeConfig { target: 0.999, ..Default::default() };
    let opt = grape_optimize(&problem, &cfg, &w0).unwrap();
    assert!(opt.converged);
    assert!(opt.fidelity >= 0.999);
    assert!(opt.holonomy.max_k_norm < ToleranceConfig::default().holonomy);
}
