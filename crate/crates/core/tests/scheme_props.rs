use std::f64::consts::PI;

use hforge_core::geometry::*;
use hforge_core::gqc::*;
use hforge_core::hqc::*;
use hforge_core::qcore::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_gate_is_holonomic_traceless_and_hermitian(theta in 0.0..PI, phi in -PI..PI) {
        let g = lambda_resonant_gate(&LambdaParams::new(theta, phi), 32).unwrap();
        prop_assert!(g.report.cyclicity_residual < 1e-8);
        prop_assert!(g.report.max_k_norm < 1e-8);
        prop_assert!(g.gate.trace().norm() < 1e-10);
        prop_assert!((&g.gate - g.gate.adjoint()).norm() < 1e-10);
    }

    #[test]
    fn single_shot_gate_is_holonomic(alpha in 0.1..1.4f64, beta in -PI..PI, gamma in -1.4..1.4f64) {
        let g = single_shot_gate(&SingleShotParams::new(alpha, beta, gamma), 128).unwrap();
        prop_assert!(g.report.cyclicity_residual < 1e-8);
        prop_assert!(g.report.max_k_norm < 1e-8);
    }

    #[test]
    fn orange_slice_has_no_dynamical_phase_anywhere(gamma in -PI..PI, theta in 0.0..PI, phi in -PI..PI) {
        let os = orange_slice_gate(gamma, theta, phi, PulseShape::SinSquared, 1.0, 64).unwrap();
        let rec = propagate(&os.schedule, 64).unwrap();
        for psi0 in [&os.dark, &os.bright] {
            for (j, psi) in rec.states(psi0).iter().enumerate() {
                let e = psi.dotc(&(&rec.hamiltonians[j] * psi)).re;
                prop_assert!(e.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn orange_slice_round_trip(gamma in -PI..PI, theta in 0.1..3.0f64, phi in -PI..PI) {
        let os = orange_slice_gate(gamma, theta, phi, PulseShape::Square, 1.0, 100).unwrap();
        let rec = propagate(&os.schedule, 100).unwrap();
        let frame = MovingFrame::comoving(&rec, &identity(2)).unwrap();
        let rev = reverse_engineer_hamiltonian(&PathSpec::abelian(frame)).unwrap();
        let u = propagate_final(&rev.schedule, 1).unwrap();
        prop_assert!(phase_aligned_distance(&u, &os.unitary) < 1e-8);
    }

    #[test]
    fn echo_gate_ignores_injected_dynamical_phase(theta in 0.2..2.8f64, delta in -3.0..3.0f64) {
        let p = SpinFieldParams { mu_b0: 1.0, theta, omega: 0.01, phi0: 0.0 };
        let clean = spin_echo_gate(p, 0.0, None, 400, 4).unwrap();
        let kicked = spin_echo_gate(p, delta, None, 400, 4).unwrap();
        prop_assert!(phase_aligned_distance(&clean.gate, &kicked.gate) < 1e-8);
    }
}

#[test]
fn uchi_gates_commute_exactly_when_predicted() {
    let grid: Vec<f64> = (0..7).map(|k| -PI + k as f64 * PI / 3.0).collect();
    for &g in &grid {
        for &x in &grid {
            for &gp in &grid {
                for &xp in &grid {
                    let (a, b) = (uchi_gate(g, x), uchi_gate(gp, xp));
                    let comm = commutator(&a, &b).norm();
                    let predicted = uchi_noncommutation(g, x, gp, xp).abs();
                    assert_eq!(comm > 1e-9, predicted > 1e-9, "γ={g} χ={x} γ′={gp} χ′={xp}");
                }
            }
        }
    }
}

#[test]
fn four_level_blocks_vanish_at_commensurate_areas() {
    for (d, mode) in [([2.0, 1.0], FourLevelMode::BlockDiagonal), ([3.0, 2.0], FourLevelMode::BlockDiagonal), ([3.0, 1.0], FourLevelMode::Swap)] {
        let cpl = FourLevelCoupling::from_svd(&su2_rotation(0.4, [0.0, 1.0, 0.0]), d, &hadamard()).unwrap();
        let g = four_level_gate(&FourLevelParams::new(cpl, mode), 64).unwrap();
        assert!(g.block_residual < 1e-8, "{d:?}: {}", g.block_residual);
    }
}

#[test]
fn xy_auxiliary_returns_at_commensurate_angles() {
    // tan²(θ/2) = p/q with exactly one of p, q even gives an exact return
    for t2 in [1.0f64 / 2.0, 1.0 / 8.0, 3.0 / 4.0] {
        let theta = 2.0 * t2.sqrt().atan();
        let g = xy_aux_single_gate(&XyAuxParams::new(theta, 0.7), 64).unwrap();
        assert!(g.leakage < 1e-8, "tan² = {t2}: {}", g.leakage);
    }
}
