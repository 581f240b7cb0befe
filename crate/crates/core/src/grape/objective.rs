use nalgebra::DMatrix;

use crate::error::Result;
use crate::grape::GrapeProblem;
use crate::qcore::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    FiniteDifference,
}

/// O = fidelity − η·penalty
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    pub objective: f64,
    /// |Tr[U_T†U(τ)P(0)]|²/L²
    pub fidelity: f64,
    /// ∫‖K(t)‖²_F dt, which equals Tr[∫U†HSHU dt S(0)]
    pub penalty: f64,
}

pub(crate) struct Evaluation {
    pub parts: ObjectiveParts,
    pub gradient: Option<DMatrix<f64>>,
}

/// Evaluates the objective for H_j = drift + scale·Σω_jk H_k. Within a segment U†HU is
/// constant, so the midpoint rule for the penalty integral is exact.
pub(crate) fn evaluate(problem: &GrapeProblem, controls: &DMatrix<f64>, drift: &ComplexOperator, scale: f64, gradient: bool) -> Evaluation {
    let n = problem.dim();
    let nseg = problem.segments;
    let dt = problem.segment_duration();
    let b = &problem.subspace;
    let l = b.ncols() as f64;

    let mut hams = Vec::with_capacity(nseg);
    let mut eig = Vec::with_capacity(nseg);
    let mut props = Vec::with_capacity(nseg);
    for j in 0..nseg {
        let mut h = drift.clone();
        for (k, hk) in problem.controls.iter().enumerate() {
            h += hk * c(scale * controls[(j, k)], 0.0);
        }
        let (vals, vecs) = herm_eigen(&h);
        props.push(herm_apply(&vals, &vecs, |lam| cis(-lam * dt)));
        eig.push((vals, vecs));
        hams.push(h);
    }
    // Q_j = U_j⋯U_1 B
    let mut q = Vec::with_capacity(nseg + 1);
    q.push(b.clone());
    for j in 0..nseg {
        let next = &props[j] * &q[j];
        q.push(next);
    }
    let k_mats: Vec<ComplexOperator> = (0..nseg).map(|j| q[j].adjoint() * &hams[j] * &q[j]).collect();
    let penalty = dt * k_mats.iter().map(|k| k.norm_squared()).sum::<f64>();
    let bt = b.adjoint() * problem.target.adjoint();
    let z = (&bt * &q[nseg]).trace();
    let fidelity = z.norm_sqr() / (l * l);
    let parts = ObjectiveParts { objective: fidelity - problem.eta * penalty, fidelity, penalty };
    if !gradient {
        return Evaluation { parts, gradient: None };
    }

    let mut grad = DMatrix::zeros(nseg, problem.controls.len());
    // backward sweep: X = U_N⋯U_{j+1}, G = Σ_{i>j} K_i Q_{i−1}† H_i U_{i−1}⋯U_{j+1}
    let mut x = identity(n);
    let mut g = ComplexOperator::zeros(b.ncols(), n);
    for j in (0..nseg).rev() {
        let (vals, v) = &eig[j];
        let vd = v.adjoint();
        let lft = &q[j] * &bt * &x;
        let lpen = &q[j] * &g;
        let w1 = &vd * lft * v;
        let w2 = &vd * lpen * v;
        let mut dexp = ComplexOperator::zeros(n, n);
        for a in 0..n {
            for bb in 0..n {
                let d = vals[a] - vals[bb];
                let m = 0.5 * (vals[a] + vals[bb]);
                let x2 = 0.5 * d * dt;
                let sinc = if x2.abs() < 1e-8 { 1.0 - x2 * x2 / 6.0 } else { x2.sin() / x2 };
                dexp[(a, bb)] = c(0.0, -dt * sinc) * cis(-m * dt);
            }
        }
        let kq = &k_mats[j];
        for (k, hk) in problem.controls.iter().enumerate() {
            let hk_eig = &vd * hk * v;
            let mut s1 = ZERO;
            let mut s2 = ZERO;
            for a in 0..n {
                for bb in 0..n {
                    let m = dexp[(a, bb)] * hk_eig[(a, bb)] * scale;
                    s1 += m * w1[(bb, a)];
                    s2 += m * w2[(bb, a)];
                }
            }
            let dfid = 2.0 * (z.conj() * s1).re / (l * l);
            let direct = 2.0 * scale * (kq * q[j].adjoint() * hk * &q[j]).trace().re;
            let dpen = dt * (direct + 4.0 * s2.re);
            grad[(j, k)] = dfid - problem.eta * dpen;
        }
        g = &k_mats[j] * q[j].adjoint() * &hams[j] + &g * &props[j];
        x = &x * &props[j];
    }
    Evaluation { parts, gradient: Some(grad) }
}

pub fn objective(controls: &DMatrix<f64>, problem: &GrapeProblem) -> Result<f64> {
    Ok(objective_parts(controls, problem)?.objective)
}

pub fn objective_parts(controls: &DMatrix<f64>, problem: &GrapeProblem) -> Result<ObjectiveParts> {
    problem.check_shape(controls)?;
    Ok(evaluate(problem, controls, &problem.drift, 1.0, false).parts)
}

/// ∂O/∂ω_k(j), either from exact propagator derivatives or central differences.
pub fn objective_gradient(controls: &DMatrix<f64>, problem: &GrapeProblem, mode: GradientMode) -> Result<DMatrix<f64>> {
    problem.check_shape(controls)?;
    Ok(match mode {
        GradientMode::Analytic => evaluate(problem, controls, &problem.drift, 1.0, true).gradient.unwrap(),
        GradientMode::FiniteDifference => {
            central_difference(controls, problem.duration, |w| evaluate(problem, w, &problem.drift, 1.0, false).parts.objective)
        }
    })
}

/// Step h = 1e−6·max(max|ω|, 1/τ).
pub(crate) fn central_difference(controls: &DMatrix<f64>, duration: f64, f: impl Fn(&DMatrix<f64>) -> f64) -> DMatrix<f64> {
    let scale = controls.iter().fold(1.0 / duration, |m, v| m.max(v.abs()));
    let h = 1e-6 * scale;
    let mut grad = DMatrix::zeros(controls.nrows(), controls.ncols());
    let mut w = controls.clone();
    for idx in 0..controls.len() {
        let orig = w[idx];
        w[idx] = orig + h;
        let fp = f(&w);
        w[idx] = orig - h;
        let fm = f(&w);
        w[idx] = orig;
        grad[idx] = (fp - fm) / (2.0 * h);
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grape::{random_controls, NvScenario};
    use std::f64::consts::PI;

    fn toy(omega: f64) -> (GrapeProblem, DMatrix<f64>) {
        let p = GrapeProblem::new(zeros(2), vec![pauli_x()], pauli_x(), identity(2), 0.0, 1, 1.0).unwrap();
        (p, DMatrix::from_element(1, 1, omega))
    }

    #[test]
    fn exact_lambda_controls_score_one() {
        let sc = NvScenario::default();
        let p = sc.hadamard_problem().unwrap();
        let w = sc.lambda_hadamard_controls(&p).unwrap();
        let parts = objective_parts(&w, &p).unwrap();
        assert!((parts.objective - 1.0).abs() < 1e-8);
        assert!(parts.penalty < 1e-20);
        assert!(objective_gradient(&w, &p, GradientMode::Analytic).unwrap().norm() < 1e-5);
    }

    #[test]
    fn zero_controls_follow_the_drift() {
        let drift = diag(&[c(0.3, 0.0), c(-0.2, 0.0), c(0.7, 0.0)]);
        let target = su2_rotation(0.4, [0.0, 0.6, 0.8]);
        let mut full = embed(&target, 3, &[0, 1]);
        full[(2, 2)] = ONE;
        let p0 = diag(&[ONE, ONE, ZERO]);
        let p = GrapeProblem::new(drift.clone(), crate::hqc::lambda_controls(), full.clone(), p0.clone(), 0.0, 7, 2.5).unwrap();
        let w = DMatrix::zeros(7, 4);
        let expected = ((full.adjoint() * herm_expm(&drift, 2.5).unwrap() * &p0).trace()).norm_sqr() / 4.0;
        assert!((objective(&w, &p).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn dynamical_controls_are_penalized() {
        // a σz-type drive on the qubit doublet has ⟨ψ_k|H|ψ_l⟩ ≠ 0
        let mut controls = crate::hqc::lambda_controls();
        controls.push(diag(&[ONE, -ONE, ZERO]));
        let p0 = diag(&[ONE, ONE, ZERO]);
        let p = GrapeProblem::new(zeros(3), controls, identity(3), p0.clone(), 1.0, 4, 1.0).unwrap();
        let w = random_controls(&p, 1.0, 11);
        let parts = objective_parts(&w, &p).unwrap();
        assert!(parts.penalty > 0.0);
        // fine Riemann sum of ‖P U†HU P‖² with the propagator rebuilt step by step
        let sched = p.schedule(&w).unwrap();
        let steps = 4000;
        let dt = 1.0 / steps as f64;
        let mut u = identity(3);
        let mut integral = 0.0;
        for s in 0..steps {
            let t = (s as f64 + 0.5) * dt;
            let h = sched.hamiltonian_at(t);
            let half = herm_expm(&h, dt / 2.0).unwrap();
            let mid = &half * &u;
            integral += dt * (&p0 * mid.adjoint() * &h * &mid * &p0).norm_squared();
            u = &half * mid;
        }
        assert!((parts.penalty - integral).abs() < 1e-9 * integral.max(1.0), "{} vs {integral}", parts.penalty);
        assert!((parts.objective - (parts.fidelity - parts.penalty)).abs() < 1e-15);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut controls = crate::hqc::lambda_controls();
        controls.push(diag(&[ONE, -ONE, ZERO]));
        let p = GrapeProblem::new(diag(&[ZERO, c(0.2, 0.0), c(-0.5, 0.0)]), controls, embed(&hadamard(), 3, &[0, 1]), diag(&[ONE, ONE, ZERO]), 0.3, 6, 2.0)
            .unwrap();
        let w = random_controls(&p, 1.5, 5);
        let ga = objective_gradient(&w, &p, GradientMode::Analytic).unwrap();
        let gf = objective_gradient(&w, &p, GradientMode::FiniteDifference).unwrap();
        assert!((&ga - &gf).norm() / gf.norm() < 1e-5);
    }

    #[test]
    fn fidelity_ignores_global_phase_of_target() {
        let sc = NvScenario::default();
        let mut p = sc.hadamard_problem().unwrap();
        let w = random_controls(&p, 0.01, 2);
        let f = objective_parts(&w, &p).unwrap().fidelity;
        p.target *= cis(1.234);
        assert!((objective_parts(&w, &p).unwrap().fidelity - f).abs() < 1e-14);
    }

    #[test]
    fn toy_gradient_points_to_half_pi() {
        // F(ω) = sin²(ω) for U = e^{−iωσx}, U_T = σx
        for omega in [0.3, 1.2, 2.0, 2.9, 4.0] {
            let (p, w) = toy(omega);
            let g = objective_gradient(&w, &p, GradientMode::Analytic).unwrap()[(0, 0)];
            let scan = (objective(&toy(omega + 1e-4).1, &p).unwrap() - objective(&toy(omega - 1e-4).1, &p).unwrap()) / 2e-4;
            assert_eq!(g.signum(), scan.signum());
            let nearest = (omega / PI - 0.5).round() * PI + PI / 2.0;
            assert_eq!(g.signum(), (nearest - omega).signum(), "ω = {omega}");
        }
        let (p, w) = toy(PI / 2.0);
        assert!(objective_gradient(&w, &p, GradientMode::Analytic).unwrap().norm() < 1e-5);
        assert!((objective(&w, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let (p, _) = toy(0.1);
        assert!(objective(&DMatrix::zeros(2, 1), &p).is_err());
    }
}
