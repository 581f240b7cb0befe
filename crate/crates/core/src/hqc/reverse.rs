use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::MovingFrame;
use crate::qcore::*;

/// Hermitian X with W = e^{−iX}, through the Cayley transform (eigenvalues of W ≠ −1).
pub fn unitary_generator(w: &ComplexOperator) -> Result<ComplexOperator> {
    let n = check_square(w)?;
    let plus = identity(n) + w;
    let inv = plus
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("step unitary has eigenvalue −1; refine the grid".into()))?;
    // −i(I − W)(I + W)^{-1} has eigenvalues tan(x/2)
    let t = (identity(n) - w) * inv * (-I);
    let (vals, vecs) = herm_eigen(&hermitian_part(&t));
    Ok(herm_apply(&vals, &vecs, |v| c(2.0 * v.atan(), 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Complete frame of cyclic states; `dynamical_free` drops the diagonal connection terms.
    Abelian { dynamical_free: bool },
    /// Computational states followed by auxiliary states; the auxiliary phase function is γ = 0.
    NonAbelian,
}

/// Prescribed evolution paths from which a Hamiltonian is reconstructed.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub frame: MovingFrame,
    pub mode: PathMode,
    pub auxiliary_count: usize,
}

impl PathSpec {
    pub fn abelian(frame: MovingFrame) -> Self {
        Self { frame, mode: PathMode::Abelian { dynamical_free: false }, auxiliary_count: 0 }
    }

    pub fn dynamical_free(frame: MovingFrame) -> Self {
        Self { frame, mode: PathMode::Abelian { dynamical_free: true }, auxiliary_count: 0 }
    }

    pub fn non_abelian(frame: MovingFrame) -> Self {
        Self { frame, mode: PathMode::NonAbelian, auxiliary_count: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct ReverseEngineered {
    /// One constant segment per grid interval, on the full Hermitian basis.
    pub schedule: ControlSchedule,
    /// The step Hamiltonians themselves.
    pub hamiltonians: Vec<ComplexOperator>,
    /// max ‖H_raw − H_raw†‖_F / (2‖H_raw‖_F) of the finite-difference formula before symmetrization.
    pub hermiticity_residual: f64,
}

fn midpoint_frame(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    let m = (a + b) * c(0.5, 0.0);
    let g = m.adjoint() * &m;
    let (vals, vecs) = herm_eigen(&hermitian_part(&g));
    m * herm_apply(&vals, &vecs, |v| c(1.0 / v.max(1e-300).sqrt(), 0.0))
}

fn relative_antihermitian(h: &ComplexOperator) -> f64 {
    let n = h.norm();
    if n == 0.0 {
        0.0
    } else {
        (h - h.adjoint()).norm() / (2.0 * n)
    }
}

/// Hamiltonian that drives the prescribed path, one piecewise-constant step per grid interval.
pub fn reverse_engineer_hamiltonian(path: &PathSpec) -> Result<ReverseEngineered> {
    let f = &path.frame;
    let (n, rank) = (f.dim(), f.rank());
    let tol = ToleranceConfig::default();
    for (j, v) in f.vectors.iter().enumerate() {
        let gram = (v.adjoint() * v - identity(rank)).norm();
        if gram > tol.frame {
            return Err(Error::Frame(format!("frame {j} is not orthonormal (Gram residual {gram:.3e})")));
        }
    }
    match path.mode {
        PathMode::Abelian { .. } if rank != n => {
            return Err(Error::Frame(format!("Abelian reconstruction needs a complete frame, got {rank} of {n} states")));
        }
        PathMode::NonAbelian if path.auxiliary_count != 1 || rank != n || rank < 2 => {
            return Err(Error::Frame(format!(
                "non-Abelian reconstruction needs a complete frame with one auxiliary state (rank {rank}, dimension {n}, auxiliary {})",
                path.auxiliary_count
            )));
        }
        _ => {}
    }
    let mut schedule = ControlSchedule::full(n);
    let basis = schedule.basis().to_vec();
    let mut hamiltonians = Vec::with_capacity(f.grid.len() - 1);
    let mut herm_res = 0.0f64;
    for j in 0..f.grid.len() - 1 {
        let dt = f.grid[j + 1] - f.grid[j];
        let (a, b) = (&f.vectors[j], &f.vectors[j + 1]);
        let deriv = (b - a) * c(1.0 / dt, 0.0);
        let mid = midpoint_frame(a, b);
        let h = match path.mode {
            PathMode::Abelian { dynamical_free } => {
                herm_res = herm_res.max(relative_antihermitian(&(&deriv * mid.adjoint() * I)));
                let full = unitary_generator(&(b * a.adjoint()))? * c(1.0 / dt, 0.0);
                if dynamical_free {
                    let mut h = full.clone();
                    for k in 0..n {
                        let col = mid.column(k).into_owned();
                        let e = col.dotc(&(&full * &col)).re;
                        h -= outer(&col, &col) * c(e, 0.0);
                    }
                    h
                } else {
                    full
                }
            }
            PathMode::NonAbelian => {
                let l = rank - 1;
                let aux = mid.column(l).into_owned();
                let daux = deriv.column(l).into_owned();
                let mut raw = zeros(n);
                for k in 0..l {
                    let phik = mid.column(k).into_owned();
                    let dphik = deriv.column(k).into_owned();
                    raw += outer(&phik, &aux) * (phik.dotc(&daux) * I);
                    raw += outer(&aux, &phik) * (aux.dotc(&dphik) * I);
                }
                raw += outer(&aux, &aux) * (aux.dotc(&daux) * I);
                herm_res = herm_res.max(relative_antihermitian(&raw));
                hermitian_part(&raw)
            }
        };
        schedule.push_constant(dt, project(&basis, &h))?;
        hamiltonians.push(h);
    }
    Ok(ReverseEngineered { schedule, hamiltonians, hermiticity_residual: herm_res })
}

// ---------------------------------------------------------------------------
// counterdiabatic driving

pub type HamiltonianFn = Arc<dyn Fn(f64) -> ComplexOperator + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaMode {
    Nondegenerate,
    /// Eigenvalues are grouped into degenerate clusters; only inter-cluster transitions are cancelled.
    Degenerate,
}

/// Eigenvalue clusters as index ranges into the ascending spectrum.
fn clusters(vals: &[f64], spread: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k] - vals[k - 1] > spread {
            out.push((start, k));
            start = k;
        }
    }
    out
}

/// H_a(t) = iΣ_{k≠k'} P_k' Ḣ0 P_k / (E_k − E_k'), summed over distinct levels (or clusters).
pub fn counterdiabatic_term(h0: &HamiltonianFn, t: f64, step: f64, mode: StaMode, tol: &ToleranceConfig) -> Result<ComplexOperator> {
    let h = h0(t);
    let (vals, vecs) = herm_eigen(&h);
    let scale = h.norm().max(1e-300);
    let groups = match mode {
        StaMode::Nondegenerate => {
            if let Some(k) = (1..vals.len()).find(|&k| vals[k] - vals[k - 1] <= tol.degeneracy_gap * scale) {
                return Err(Error::Degeneracy { sample: 0, detail: format!("levels {} and {k} cross at t = {t}", k - 1) });
            }
            (0..vals.len()).map(|k| (k, k + 1)).collect()
        }
        StaMode::Degenerate => clusters(&vals, tol.degeneracy_gap * scale),
    };
    let hdot = (h0(t + step) - h0(t - step)) * c(0.5 / step, 0.0);
    let m = vecs.adjoint() * hdot * &vecs;
    let energy: Vec<f64> = groups.iter().map(|&(a, b)| vals[a..b].iter().sum::<f64>() / (b - a) as f64).collect();
    let n = vals.len();
    let mut ha = zeros(n);
    for (gi, &(a, b)) in groups.iter().enumerate() {
        for (gj, &(cc, d)) in groups.iter().enumerate() {
            if gi == gj {
                continue;
            }
            let denom = energy[gj] - energy[gi];
            for r in a..b {
                for col in cc..d {
                    ha[(r, col)] = m[(r, col)] * I / c(denom, 0.0);
                }
            }
        }
    }
    Ok(&vecs * ha * vecs.adjoint())
}

fn spectrum_pattern(vals: &[f64], spread: f64) -> Vec<usize> {
    clusters(vals, spread).iter().map(|&(a, b)| b - a).collect()
}

/// Schedule for H0 + H_a over [0, duration]; the degeneracy pattern is checked on `checks` samples.
pub fn sta_counterdiabatic(h0: HamiltonianFn, duration: f64, mode: StaMode, checks: usize) -> Result<ControlSchedule> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument("duration must be > 0".into()));
    }
    let tol = ToleranceConfig::default();
    let first = h0(0.0);
    let n = check_square(&first)?;
    let mut pattern: Option<Vec<usize>> = None;
    for k in 0..=checks.max(2) {
        let t = duration * k as f64 / checks.max(2) as f64;
        let h = h0(t);
        let (vals, _) = herm_eigen(&h);
        let scale = h.norm().max(1e-300);
        let pat = spectrum_pattern(&vals, tol.degeneracy_gap * scale);
        if mode == StaMode::Nondegenerate && pat.len() != n {
            return Err(Error::Degeneracy { sample: k, detail: format!("degenerate levels at t = {t}") });
        }
        match &pattern {
            None => pattern = Some(pat),
            Some(p) if *p != pat => {
                return Err(Error::Degeneracy { sample: k, detail: format!("degeneracy pattern changes at t = {t}: {p:?} → {pat:?}") })
            }
            _ => {}
        }
    }
    let step = 1e-5 * duration;
    let h0c = h0.clone();
    let mut schedule = ControlSchedule::full(n);
    schedule.push_hamiltonian(duration, move |t| {
        let ha = counterdiabatic_term(&h0c, t, step, mode, &tol).unwrap_or_else(|_| zeros(n));
        h0c(t) + ha
    })?;
    Ok(schedule)
}
