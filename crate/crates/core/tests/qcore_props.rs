use hforge_core::qcore::*;
use proptest::prelude::*;

fn hermitian(n: usize, entries: &[f64]) -> ComplexOperator {
    let mut m = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let k = 2 * (i * n + j);
            m[(i, j)] = c(entries[k], entries[k + 1]);
        }
    }
    hermitian_part(&m)
}

fn herm_strategy(n: usize) -> impl Strategy<Value = ComplexOperator> {
    prop::collection::vec(-2.0..2.0f64, 2 * n * n).prop_map(move |v| hermitian(n, &v))
}

fn random_schedule(n: usize) -> impl Strategy<Value = ControlSchedule> {
    (herm_strategy(n), herm_strategy(n), prop::collection::vec((0.05..1.0f64, -2.0..2.0f64, -2.0..2.0f64), 1..5)).prop_map(
        |(a, b, segs)| {
            let mut s = ControlSchedule::new(vec![a, b]).unwrap();
            for (d, x, y) in segs {
                s.push_constant(d, vec![x, y]).unwrap();
            }
            s
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagators_are_unitary(s in random_schedule(3)) {
        let rec = propagate(&s, 8).unwrap();
        prop_assert!(rec.max_unitarity_residual() < 1e-9);
    }

    #[test]
    fn propagation_composes(s1 in random_schedule(2), seg in prop::collection::vec((0.05..1.0f64, -2.0..2.0f64, -2.0..2.0f64), 1..4)) {
        let mut s2 = ControlSchedule::new(s1.basis().to_vec()).unwrap();
        for (d, x, y) in seg {
            s2.push_constant(d, vec![x, y]).unwrap();
        }
        let joined = propagate_final(&s1.concat(&s2).unwrap(), 4).unwrap();
        let split = propagate_final(&s2, 4).unwrap() * propagate_final(&s1, 4).unwrap();
        prop_assert!((joined - split).norm() < 1e-10);
    }

    #[test]
    fn exponential_group_law(h in herm_strategy(4), t in -3.0..3.0f64, s in -3.0..3.0f64) {
        let lhs = herm_expm(&h, t).unwrap() * herm_expm(&h, s).unwrap();
        prop_assert!((lhs - herm_expm(&h, t + s).unwrap()).norm() < 1e-12);
    }
}

#[test]
fn substep_refinement_is_second_order() {
    // smooth drive, compared against a 10× finer reference
    let mut s = ControlSchedule::new(vec![pauli_x(), pauli_z()]).unwrap();
    s.push_smooth(2.0, |t| vec![(1.3 * t).sin() + 0.4, (0.7 * t).cos()]).unwrap();
    let reference = propagate_final(&s, 640).unwrap();
    let dev = |n| (propagate_final(&s, n).unwrap() - &reference).norm();
    for n in [8, 16, 32] {
        assert!(dev(n) / dev(2 * n) >= 3.0);
    }
}
