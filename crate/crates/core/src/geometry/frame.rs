use crate::error::{Error, Result};
use crate::qcore::*;

/// Orthonormal set {|φ_k(t_j)⟩}, stored per sample as the columns of an n×L matrix.
#[derive(Debug, Clone)]
pub struct MovingFrame {
    pub grid: Vec<f64>,
    pub vectors: Vec<ComplexOperator>,
    pub single_valued: bool,
}

impl MovingFrame {
    pub fn new(grid: Vec<f64>, vectors: Vec<ComplexOperator>, single_valued: bool) -> Result<Self> {
        Self::new_with(grid, vectors, single_valued, &ToleranceConfig::default())
    }

    pub fn new_with(grid: Vec<f64>, vectors: Vec<ComplexOperator>, single_valued: bool, tol: &ToleranceConfig) -> Result<Self> {
        if grid.len() != vectors.len() || grid.len() < 3 {
            return Err(Error::Frame(format!("{} grid points for {} frames (need ≥ 3)", grid.len(), vectors.len())));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Frame("grid is not strictly increasing".into()));
        }
        let shape = vectors[0].shape();
        for (j, v) in vectors.iter().enumerate() {
            if v.shape() != shape {
                return Err(Error::Frame(format!("frame {j} has shape {:?}, expected {shape:?}", v.shape())));
            }
            let gram = (v.adjoint() * v - identity(shape.1)).norm();
            if gram > tol.frame {
                return Err(Error::Frame(format!("frame {j} is not orthonormal (Gram residual {gram:.3e})")));
            }
        }
        if single_valued {
            let gap = (vectors.last().unwrap() - &vectors[0]).norm();
            if gap > tol.cyclicity {
                return Err(Error::Frame(format!("frame is not single-valued (endpoint gap {gap:.3e})")));
            }
        }
        Ok(Self { grid, vectors, single_valued })
    }

    /// Frame sampled from a closed-form map on a uniform grid.
    pub fn from_fn(total_time: f64, steps: usize, f: impl Fn(f64) -> ComplexOperator, single_valued: bool) -> Result<Self> {
        let grid: Vec<f64> = (0..=steps).map(|j| total_time * j as f64 / steps as f64).collect();
        let vectors = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, vectors, single_valued)
    }

    /// Co-moving frame U(t_j)Φ0 of a record.
    pub fn comoving(record: &EvolutionRecord, basis0: &ComplexOperator) -> Result<Self> {
        let vectors = record.propagators.iter().map(|u| u * basis0).collect();
        Self::new_with(record.grid.clone(), vectors, false, &ToleranceConfig { frame: 1e-8, ..Default::default() })
    }

    pub fn rank(&self) -> usize {
        self.vectors[0].ncols()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].nrows()
    }

    /// d/dt of the frame: central differences inside, second-order one-sided at the ends.
    pub fn derivatives(&self) -> Vec<ComplexOperator> {
        let n = self.grid.len();
        let g = &self.grid;
        let v = &self.vectors;
        (0..n)
            .map(|j| {
                if j == 0 {
                    let h = g[1] - g[0];
                    (&v[1] * c(4.0, 0.0) - &v[0] * c(3.0, 0.0) - &v[2]) * c(0.5 / h, 0.0)
                } else if j == n - 1 {
                    let h = g[n - 1] - g[n - 2];
                    (&v[n - 1] * c(3.0, 0.0) - &v[n - 2] * c(4.0, 0.0) + &v[n - 3]) * c(0.5 / h, 0.0)
                } else {
                    (&v[j + 1] - &v[j - 1]) * c(1.0 / (g[j + 1] - g[j - 1]), 0.0)
                }
            })
            .collect()
    }

    /// Projector onto the frame's span at sample j.
    pub fn projector(&self, j: usize) -> ComplexOperator {
        &self.vectors[j] * self.vectors[j].adjoint()
    }
}

/// φ'_k = Σ_l Ω_lk φ_l at every sample.
pub fn gauge_transform(frame: &MovingFrame, omega: &[ComplexOperator]) -> Result<MovingFrame> {
    gauge_transform_with(frame, omega, &ToleranceConfig::default())
}

pub fn gauge_transform_with(frame: &MovingFrame, omega: &[ComplexOperator], tol: &ToleranceConfig) -> Result<MovingFrame> {
    if omega.len() != frame.vectors.len() {
        return Err(Error::Dimension(format!("{} gauge matrices for {} samples", omega.len(), frame.vectors.len())));
    }
    let l = frame.rank();
    let mut vectors = Vec::with_capacity(omega.len());
    for (v, o) in frame.vectors.iter().zip(omega) {
        if o.shape() != (l, l) {
            return Err(Error::Dimension(format!("gauge matrix is {:?}, frame rank is {l}", o.shape())));
        }
        check_unitary(o, tol.unitarity)?;
        vectors.push(v * o);
    }
    let single_valued = frame.single_valued && (omega.last().unwrap() - &omega[0]).norm() < tol.cyclicity;
    Ok(MovingFrame { grid: frame.grid.clone(), vectors, single_valued })
}

/// Connection and dynamical matrices along an evolution and the resulting holonomy.
#[derive(Debug, Clone)]
pub struct HolonomyReport {
    /// A_lm(t_j) = i⟨φ_l|φ̇_m⟩
    pub a_samples: Vec<ComplexOperator>,
    /// K_lm(t_j) = ⟨φ_l|H|φ_m⟩
    pub k_samples: Vec<ComplexOperator>,
    /// 𝒯 exp{i∫(A − K)dt} in the basis of the frame at t = 0.
    pub holonomy: ComplexOperator,
    /// 𝒯 exp{i∫A dt}
    pub geometric_factor: ComplexOperator,
    /// 𝒯 exp{−i∫K dt}
    pub dynamical_factor: ComplexOperator,
    pub max_k_norm: f64,
    pub cyclicity_residual: f64,
    /// max_t ‖P0 U†HU P0‖_F: nonzero iff the evolving states are not parallel transported.
    pub parallel_transport_residual: f64,
    pub max_a_hermiticity: f64,
    pub purely_geometric: bool,
}

/// Anandan decomposition of an evolution with respect to a moving frame.
pub fn anandan_decomposition(frame: &MovingFrame, record: &EvolutionRecord) -> Result<HolonomyReport> {
    anandan_decomposition_with(frame, record, &ToleranceConfig::default())
}

pub fn anandan_decomposition_with(frame: &MovingFrame, record: &EvolutionRecord, tol: &ToleranceConfig) -> Result<HolonomyReport> {
    if frame.grid.len() != record.grid.len()
        || frame.grid.iter().zip(&record.grid).any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1.0))
    {
        return Err(Error::Frame("frame grid differs from the record grid".into()));
    }
    if frame.dim() != record.dim() {
        return Err(Error::Frame(format!("frame dimension {} vs record dimension {}", frame.dim(), record.dim())));
    }
    let p0 = frame.projector(0);
    let mut max_subspace = 0.0f64;
    for (j, u) in record.propagators.iter().enumerate() {
        let moved = u * &p0 * u.adjoint();
        max_subspace = max_subspace.max((moved - frame.projector(j)).norm());
    }
    if max_subspace > tol.cyclicity.max(1e-8) {
        return Err(Error::Frame(format!("frame leaves the propagated subspace (distance {max_subspace:.3e})")));
    }

    let derivs = frame.derivatives();
    let mut a_samples = Vec::with_capacity(frame.grid.len());
    let mut k_samples = Vec::with_capacity(frame.grid.len());
    let mut max_a_herm = 0.0f64;
    for j in 0..frame.grid.len() {
        let phi = &frame.vectors[j];
        let a = phi.adjoint() * &derivs[j] * I;
        max_a_herm = max_a_herm.max(hermiticity_residual(&a));
        a_samples.push(hermitian_part(&a));
        k_samples.push(phi.adjoint() * &record.hamiltonians[j] * phi);
    }
    let l = frame.rank();
    let mut hol = identity(l);
    let mut geo = identity(l);
    let mut dynf = identity(l);
    for j in 0..frame.grid.len() - 1 {
        let dt = frame.grid[j + 1] - frame.grid[j];
        let a_mid = (&a_samples[j] + &a_samples[j + 1]) * c(0.5, 0.0);
        let k_mid = (&k_samples[j] + &k_samples[j + 1]) * c(0.5, 0.0);
        // e^{iMΔt} = herm_expm(M, −Δt)
        hol = herm_expm_unchecked(&(&a_mid - &k_mid), -dt) * hol;
        geo = herm_expm_unchecked(&a_mid, -dt) * geo;
        dynf = herm_expm_unchecked(&k_mid, dt) * dynf;
    }
    let max_k_norm = k_samples.iter().map(|k| k.norm()).fold(0.0, f64::max);
    let cyclicity_residual = {
        let u = record.final_propagator();
        (u * &p0 * u.adjoint() - &p0).norm()
    };
    let parallel_transport_residual = comoving_k_max(record, &frame.vectors[0]);
    Ok(HolonomyReport {
        a_samples,
        k_samples,
        holonomy: hol,
        geometric_factor: geo,
        dynamical_factor: dynf,
        max_k_norm,
        cyclicity_residual,
        parallel_transport_residual,
        max_a_hermiticity: max_a_herm,
        purely_geometric: max_k_norm < tol.holonomy,
    })
}

fn comoving_k_max(record: &EvolutionRecord, basis0: &ComplexOperator) -> f64 {
    record
        .propagators
        .iter()
        .zip(&record.hamiltonians)
        .map(|(u, h)| (basis0.adjoint() * u.adjoint() * h * u * basis0).norm())
        .fold(0.0, f64::max)
}

/// How condition (ii) is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KCondition {
    /// K(t) = 0
    #[default]
    Strict,
    /// K(t) ∝ I: only the traceless part must vanish.
    Relaxed,
}

/// Frame-independent check of the two holonomic conditions for the subspace P0.
pub fn check_holonomic_conditions(record: &EvolutionRecord, p0: &ComplexOperator) -> Result<HolonomyReport> {
    check_holonomic_conditions_with(record, p0, KCondition::Strict, &ToleranceConfig::default())
}

pub fn check_holonomic_conditions_with(
    record: &EvolutionRecord,
    p0: &ComplexOperator,
    mode: KCondition,
    tol: &ToleranceConfig,
) -> Result<HolonomyReport> {
    if p0.shape() != (record.dim(), record.dim()) {
        return Err(Error::Dimension(format!("P0 is {:?}, record dimension {}", p0.shape(), record.dim())));
    }
    let l = projector_rank(p0, 1e-9)?;
    let b = projector_basis(p0, l);
    let mut k_samples = Vec::with_capacity(record.len());
    let mut max_k = 0.0f64;
    for (u, h) in record.propagators.iter().zip(&record.hamiltonians) {
        let k = b.adjoint() * u.adjoint() * h * u * &b;
        let measured = match mode {
            KCondition::Strict => k.norm(),
            KCondition::Relaxed => (&k - identity(l) * (k.trace() / c(l as f64, 0.0))).norm(),
        };
        max_k = max_k.max(measured);
        k_samples.push(k);
    }
    let u = record.final_propagator();
    let cyclicity_residual = (u * p0 * u.adjoint() - p0).norm();
    let holonomy = b.adjoint() * u * &b;
    Ok(HolonomyReport {
        // in the co-moving frame A(t) coincides with K(t)
        a_samples: k_samples.clone(),
        k_samples,
        geometric_factor: holonomy.clone(),
        dynamical_factor: identity(l),
        holonomy,
        max_k_norm: max_k,
        cyclicity_residual,
        parallel_transport_residual: max_k,
        max_a_hermiticity: 0.0,
        purely_geometric: max_k < tol.holonomy && cyclicity_residual < tol.cyclicity,
    })
}

/// Orthonormal basis of the range of a projector. Computational-basis projectors keep
/// their natural ordered basis.
pub fn projector_basis(p: &ComplexOperator, rank: usize) -> ComplexOperator {
    let n = p.nrows();
    let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || p[(i, j)].norm() < 1e-14));
    if is_diag {
        let idx: Vec<usize> = (0..n).filter(|&i| p[(i, i)].re > 0.5).collect();
        if idx.len() == rank {
            let mut b = ComplexOperator::zeros(n, rank);
            for (col, &i) in idx.iter().enumerate() {
                b[(i, col)] = ONE;
            }
            return b;
        }
    }
    let (_, vecs) = herm_eigen(p);
    vecs.columns(n - rank, rank).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_k_violates_condition_two() {
        // qutrit, H = σ_z on the lower block plus an idle third level
        let h = diag(&[ONE, c(-1.0, 0.0), ZERO]);
        let mut s = ControlSchedule::new(vec![h]).unwrap();
        s.push_constant(1.0, vec![1.0]).unwrap();
        let rec = propagate(&s, 8).unwrap();
        let p0 = diag(&[ONE, ONE, ZERO]);
        let rep = check_holonomic_conditions(&rec, &p0).unwrap();
        assert!(rep.cyclicity_residual < 1e-14);
        assert!((rep.max_k_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!(!rep.purely_geometric);
        let relaxed = check_holonomic_conditions_with(&rec, &p0, KCondition::Relaxed, &ToleranceConfig::default()).unwrap();
        assert!((relaxed.max_k_norm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn relaxed_mode_accepts_scalar_k() {
        let h = diag(&[ONE, ONE, c(-3.0, 0.0)]);
        let mut s = ControlSchedule::new(vec![h]).unwrap();
        s.push_constant(1.0, vec![1.0]).unwrap();
        let rec = propagate(&s, 4).unwrap();
        let p0 = diag(&[ONE, ONE, ZERO]);
        let strict = check_holonomic_conditions(&rec, &p0).unwrap();
        let relaxed = check_holonomic_conditions_with(&rec, &p0, KCondition::Relaxed, &ToleranceConfig::default()).unwrap();
        assert!(strict.max_k_norm > 1.0);
        assert!(relaxed.max_k_norm < 1e-14);
    }

    #[test]
    fn identity_gauge_is_identity() {
        let f = MovingFrame::from_fn(1.0, 10, |t| {
            let mut m = ComplexOperator::zeros(2, 1);
            m[(0, 0)] = c(t.cos(), 0.0);
            m[(1, 0)] = c(t.sin(), 0.0);
            m
        }, false)
        .unwrap();
        let omega = vec![identity(1); 11];
        let g = gauge_transform(&f, &omega).unwrap();
        assert!(g.vectors.iter().zip(&f.vectors).all(|(a, b)| (a - b).norm() == 0.0));
        let bad = vec![identity(1) * c(2.0, 0.0); 11];
        assert!(matches!(gauge_transform(&f, &bad), Err(Error::Unitarity { .. })));
    }

    #[test]
    fn frame_rejects_non_orthonormal() {
        let v = vec![ComplexOperator::from_element(2, 1, ONE); 3];
        assert!(MovingFrame::new(vec![0.0, 1.0, 2.0], v, false).is_err());
    }
}
