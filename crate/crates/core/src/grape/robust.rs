use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grape::objective::{central_difference, evaluate, GradientMode};
use crate::grape::GrapeProblem;
use crate::protect::{Distribution, NoiseModel, NoiseSample};
use crate::qcore::*;

/// Nodes per noisy dimension of the tensor-product quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes: 5 }
    }
}

/// Probabilists' Gauss–Hermite rule (weight e^{−x²/2}/√(2π)) by Golub–Welsch; weights sum to 1.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n <= 1 {
        return (vec![0.0], vec![1.0]);
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        j[(k - 1, k)] = off;
        j[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 / total).collect())
}

fn nodes_for(d: &Distribution, n: usize) -> Vec<(f64, f64)> {
    match *d {
        Distribution::Fixed(x) => vec![(x, 1.0)],
        Distribution::Gaussian { mean, sigma } if sigma > 0.0 => {
            let (x, w) = gauss_hermite(n);
            x.into_iter().zip(w).map(|(x, w)| (mean + sigma * x, w)).collect()
        }
        Distribution::Gaussian { mean, .. } => vec![(mean, 1.0)],
        // equally spaced cell midpoints with equal weights
        Distribution::Uniform { low, high } if high > low => {
            let h = (high - low) / n as f64;
            (0..n).map(|k| (low + (k as f64 + 0.5) * h, 1.0 / n as f64)).collect()
        }
        Distribution::Uniform { low, .. } => vec![(low, 1.0)],
    }
}

/// Tensor-product grid over (δ1, δ_1.., δ_L) with normalized weights, δ1 varying slowest.
pub fn quadrature_nodes(model: &NoiseModel, spec: QuadratureSpec) -> Result<Vec<(NoiseSample, f64)>> {
    if spec.nodes == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    model.amplitude_error.validate()?;
    let mut grid: Vec<(NoiseSample, f64)> =
        nodes_for(&model.amplitude_error, spec.nodes).into_iter().map(|(d, w)| (NoiseSample { delta1: d, deltas: vec![] }, w)).collect();
    for (_, dist) in &model.error_ops {
        dist.validate()?;
        let axis = nodes_for(dist, spec.nodes);
        grid = grid
            .into_iter()
            .flat_map(|(s, w)| {
                axis.iter().map(move |&(d, wd)| {
                    let mut s = s.clone();
                    s.deltas.push(d);
                    (s, w * wd)
                })
            })
            .collect();
    }
    Ok(grid)
}

fn noisy_drift(problem: &GrapeProblem, model: &NoiseModel, sample: &NoiseSample) -> Result<ComplexOperator> {
    let mut drift = problem.drift.clone();
    for ((e, _), d) in model.error_ops.iter().zip(&sample.deltas) {
        if e.shape() != drift.shape() {
            return Err(Error::Dimension(format!("error operator is {:?}, problem is {:?}", e.shape(), drift.shape())));
        }
        drift += e * c(*d, 0.0);
    }
    Ok(drift)
}

/// Noise-averaged objective Ō = Σ w·O(ω, δ) and, optionally, its gradient. Nodes are evaluated
/// in parallel and reduced in grid order.
pub fn averaged_evaluation(
    controls: &DMatrix<f64>,
    problem: &GrapeProblem,
    model: &NoiseModel,
    spec: QuadratureSpec,
    gradient: Option<GradientMode>,
) -> Result<(f64, Option<DMatrix<f64>>)> {
    problem.check_shape(controls)?;
    let nodes = quadrature_nodes(model, spec)?;
    let drifts: Vec<(ComplexOperator, f64, f64)> =
        nodes.iter().map(|(s, w)| Ok((noisy_drift(problem, model, s)?, 1.0 + s.delta1, *w))).collect::<Result<_>>()?;
    let value_at = |w: &DMatrix<f64>| -> f64 {
        let vals: Vec<f64> = drifts.par_iter().map(|(d, s, wt)| wt * evaluate(problem, w, d, *s, false).parts.objective).collect();
        vals.iter().sum()
    };
    match gradient {
        None => Ok((value_at(controls), None)),
        Some(GradientMode::FiniteDifference) => Ok((value_at(controls), Some(central_difference(controls, problem.duration, value_at)))),
        Some(GradientMode::Analytic) => {
            let evals: Vec<(f64, DMatrix<f64>)> = drifts
                .par_iter()
                .map(|(d, s, wt)| {
                    let e = evaluate(problem, controls, d, *s, true);
                    (wt * e.parts.objective, e.gradient.unwrap() * *wt)
                })
                .collect();
            let mut total = 0.0;
            let mut grad = DMatrix::zeros(controls.nrows(), controls.ncols());
            for (v, g) in evals {
                total += v;
                grad += g;
            }
            Ok((total, Some(grad)))
        }
    }
}

pub fn averaged_objective(controls: &DMatrix<f64>, problem: &GrapeProblem, model: &NoiseModel, spec: QuadratureSpec) -> Result<f64> {
    Ok(averaged_evaluation(controls, problem, model, spec, None)?.0)
}

/// Weighted mean of the fidelity term alone over the quadrature grid.
pub fn averaged_fidelity(controls: &DMatrix<f64>, problem: &GrapeProblem, model: &NoiseModel, spec: QuadratureSpec) -> Result<f64> {
    problem.check_shape(controls)?;
    let nodes = quadrature_nodes(model, spec)?;
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|(s, w)| Ok(w * evaluate(problem, controls, &noisy_drift(problem, model, s)?, 1.0 + s.delta1, false).parts.fidelity))
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityMeasure {
    /// |Tr[V†UP]|²/L²
    #[default]
    Process,
    /// (L·F + 1)/(L + 1)
    Average,
}

/// Fidelity over a (δ1, δ2) grid: rows follow δ1, columns δ2.
#[derive(Debug, Clone)]
pub struct FidelityMap {
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub fidelity: DMatrix<f64>,
}

impl FidelityMap {
    pub fn mean(&self) -> f64 {
        self.fidelity.mean()
    }

    pub fn min(&self) -> f64 {
        self.fidelity.min()
    }

    pub fn at(&self, i: usize, j: usize) -> (f64, f64, f64) {
        (self.delta1[i], self.delta2[j], self.fidelity[(i, j)])
    }
}

/// Propagates `schedule` under H_s + δ2·E2 + (1 + δ1)Σω_kH_k for every grid cell.
pub fn robustness_sweep(
    schedule: &ControlSchedule,
    target: &ComplexOperator,
    p0: &ComplexOperator,
    e2: &ComplexOperator,
    delta1: &[f64],
    delta2: &[f64],
    measure: FidelityMeasure,
    substeps: usize,
) -> Result<FidelityMap> {
    let n = schedule.dim();
    if e2.shape() != (n, n) {
        return Err(Error::Dimension(format!("error operator is {:?}, schedule is {n}×{n}", e2.shape())));
    }
    if delta1.iter().chain(delta2).any(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument("noise grid must be finite".into()));
    }
    let l = projector_rank(p0, 1e-9)? as f64;
    let cells: Vec<(usize, usize)> = (0..delta1.len()).flat_map(|i| (0..delta2.len()).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut s = schedule.scaled(1.0 + delta1[i]);
            s.set_drift(schedule.drift() + e2 * c(delta2[j], 0.0))?;
            let u = propagate_final(&s, substeps)?;
            let f = gate_fidelity(&u, target, p0)?;
            Ok(match measure {
                FidelityMeasure::Process => f,
                FidelityMeasure::Average => (l * f + 1.0) / (l + 1.0),
            })
        })
        .collect::<Result<_>>()?;
    let fidelity = DMatrix::from_row_slice(delta1.len(), delta2.len(), &vals);
    Ok(FidelityMap { delta1: delta1.to_vec(), delta2: delta2.to_vec(), fidelity })
}
