use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{check_holonomic_conditions, HolonomyReport};
use crate::grape::objective::{evaluate, objective_gradient, GradientMode};
use crate::grape::robust::{averaged_evaluation, QuadratureSpec};
use crate::grape::GrapeProblem;
use crate::protect::NoiseModel;
use crate::qcore::*;

/// Noise model and quadrature for the averaged objective.
#[derive(Debug, Clone)]
pub struct RobustSpec {
    pub noise: NoiseModel,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone)]
pub struct GrapeConfig {
    /// ε in ω ← ω + ε∇O
    pub step: f64,
    /// O_p; must lie in (0, 1).
    pub target: f64,
    pub max_iterations: usize,
    pub gradient: GradientMode,
    /// Halve ε (per iteration, up to `max_halvings` times) until the objective increases.
    pub line_search: bool,
    pub max_halvings: usize,
    /// With line search on, the trial step after an accepted update is the accepted ε times
    /// this factor (capped at 10⁶ε). 1 keeps the step fixed.
    pub step_growth: f64,
    /// Controls are clipped to [−bound, bound] after every update.
    pub amplitude_bound: Option<f64>,
    /// Optimize the noise-averaged objective instead of O.
    pub robust: Option<RobustSpec>,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            target: 0.999,
            max_iterations: 1000,
            gradient: GradientMode::Analytic,
            line_search: true,
            max_halvings: 30,
            step_growth: 1.0,
            amplitude_bound: None,
            robust: None,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidArgument(format!("step ε must be > 0, got {}", self.step)));
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(Error::InvalidArgument(format!("O_p must lie in (0, 1), got {}", self.target)));
        }
        if !(self.step_growth >= 1.0) {
            return Err(Error::InvalidArgument("step growth must be ≥ 1".into()));
        }
        if let Some(b) = self.amplitude_bound {
            if !(b > 0.0) {
                return Err(Error::InvalidArgument("amplitude bound must be > 0".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizedControls {
    /// N × (#controls)
    pub controls: DMatrix<f64>,
    /// Final value of the optimized objective (averaged when robust).
    pub objective: f64,
    /// Noiseless fidelity term at the optimum.
    pub fidelity: f64,
    /// Noiseless penalty integral at the optimum.
    pub penalty: f64,
    /// Objective before the first update and after each accepted one.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// False when the loop stopped below O_p.
    pub converged: bool,
    pub holonomy: HolonomyReport,
}

fn clip(w: &mut DMatrix<f64>, bound: Option<f64>) {
    if let Some(b) = bound {
        w.iter_mut().for_each(|x| *x = x.clamp(-b, b));
    }
}

/// Gradient ascent ω ← ω + ε∇O until O ≥ O_p or the iteration budget runs out.
pub fn grape_optimize(problem: &GrapeProblem, config: &GrapeConfig, initial: &DMatrix<f64>) -> Result<OptimizedControls> {
    config.validate()?;
    problem.check_shape(initial)?;
    let value = |w: &DMatrix<f64>| -> Result<f64> {
        Ok(match &config.robust {
            None => evaluate(problem, w, &problem.drift, 1.0, false).parts.objective,
            Some(r) => averaged_evaluation(w, problem, &r.noise, r.quadrature, None)?.0,
        })
    };
    let grad = |w: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        Ok(match &config.robust {
            None => objective_gradient(w, problem, config.gradient)?,
            Some(r) => averaged_evaluation(w, problem, &r.noise, r.quadrature, Some(config.gradient))?.1.unwrap(),
        })
    };
    let mut w = initial.clone();
    clip(&mut w, config.amplitude_bound);
    let mut current = value(&w)?;
    let mut trace = vec![current];
    let mut iterations = 0;
    let mut trial = config.step;
    while current < config.target && iterations < config.max_iterations {
        let g = grad(&w)?;
        let mut eps = trial;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let mut cand = &w + &g * eps;
            clip(&mut cand, config.amplitude_bound);
            let v = value(&cand)?;
            if !config.line_search || v > current {
                accepted = Some((cand, v));
                break;
            }
            eps *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, v)) => {
                if config.line_search {
                    trial = (eps * config.step_growth).min(config.step * 1e6);
                }
                w = cand;
                current = v;
                trace.push(v);
            }
            // no ascent direction left within the halving budget
            None => break,
        }
    }
    let parts = evaluate(problem, &w, &problem.drift, 1.0, false).parts;
    let record = propagate(&problem.schedule(&w)?, 2)?;
    let holonomy = check_holonomic_conditions(&record, &problem.p0)?;
    Ok(OptimizedControls {
        controls: w,
        objective: current,
        fidelity: parts.fidelity,
        penalty: parts.penalty,
        converged: current >= config.target,
        trace,
        iterations,
        holonomy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grape::{random_controls, NvScenario};

    fn toy_problem() -> GrapeProblem {
        let sc = NvScenario { segments: 10, duration_ns: 10.0, ..Default::default() };
        sc.problem(&pauli_x()).unwrap()
    }

    #[test]
    fn exact_start_needs_no_iterations() {
        let sc = NvScenario::default();
        let p = sc.hadamard_problem().unwrap();
        let w = sc.lambda_hadamard_controls(&p).unwrap();
        let r = grape_optimize(&p, &GrapeConfig::default(), &w).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged);
        assert!(r.holonomy.max_k_norm < ToleranceConfig::default().holonomy);
        assert!(r.holonomy.cyclicity_residual < 1e-8);
    }

    #[test]
    fn random_start_converges_with_monotone_trace() {
        let p = toy_problem();
        let cfg = GrapeConfig { step: 1.0, target: 0.999, max_iterations: 500, step_growth: 1.5, ..Default::default() };
        let w0 = random_controls(&p, 0.3, 1);
        let r = grape_optimize(&p, &cfg, &w0).unwrap();
        assert!(r.converged, "objective {}", r.objective);
        assert!(r.trace.windows(2).all(|t| t[1] > t[0]));
        assert!(r.objective <= 1.0);
        let again = grape_optimize(&p, &cfg, &random_controls(&p, 0.3, 1)).unwrap();
        assert_eq!(r.trace, again.trace);
        assert_eq!(r.controls, again.controls);
    }

    #[test]
    fn infeasible_duration_is_flagged() {
        let p = toy_problem();
        let bound = 0.02;
        // the reachable area cannot rotate the bright state out and back
        assert!(p.max_pulse_area(bound) < std::f64::consts::PI / 2.0);
        let cfg = GrapeConfig { step: 1.0, max_iterations: 50, amplitude_bound: Some(bound), ..Default::default() };
        let r = grape_optimize(&p, &cfg, &random_controls(&p, bound, 2)).unwrap();
        assert!(!r.converged);
        assert!(r.controls.iter().all(|x| x.abs() <= bound));
    }

    #[test]
    fn config_validation() {
        let p = toy_problem();
        let w = random_controls(&p, 0.1, 0);
        for cfg in [
            GrapeConfig { target: 1.0, ..Default::default() },
            GrapeConfig { step: 0.0, ..Default::default() },
            GrapeConfig { step_growth: 0.5, ..Default::default() },
        ] {
            assert!(grape_optimize(&p, &cfg, &w).is_err());
        }
    }
}
