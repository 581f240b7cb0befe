use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qcore::linalg::*;

/// Coefficient vector as a function of time measured from the segment start.
pub type CoeffFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Coefficients {
    Constant(Vec<f64>),
    Smooth(CoeffFn),
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficients::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Coefficients::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub duration: f64,
    pub coefficients: Coefficients,
}

impl Segment {
    pub fn coefficients_at(&self, local_t: f64) -> Vec<f64> {
        match &self.coefficients {
            Coefficients::Constant(v) => v.clone(),
            Coefficients::Smooth(f) => f(local_t),
        }
    }
}

/// H(t) = drift + Σ_k c_k(t) basis_k, piecewise over segments.
#[derive(Debug, Clone)]
pub struct ControlSchedule {
    basis: Vec<ComplexOperator>,
    drift: ComplexOperator,
    segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new(basis: Vec<ComplexOperator>) -> Result<Self> {
        let dim = basis
            .first()
            .map(|b| b.nrows())
            .ok_or_else(|| Error::Dimension("control basis is empty".into()))?;
        Self::with_drift(zeros(dim), basis)
    }

    pub fn with_drift(drift: ComplexOperator, basis: Vec<ComplexOperator>) -> Result<Self> {
        let dim = check_square(&drift)?;
        let tol = crate::qcore::ToleranceConfig::default().hermiticity;
        check_hermitian(&drift, tol)?;
        for (k, b) in basis.iter().enumerate() {
            if b.shape() != (dim, dim) {
                return Err(Error::Dimension(format!(
                    "basis operator {k} is {:?}, expected {dim}×{dim}",
                    b.shape()
                )));
            }
            check_hermitian(b, tol)?;
        }
        Ok(Self { basis, drift, segments: Vec::new() })
    }

    /// Schedule over a Hilbert–Schmidt orthonormal Hermitian basis of the full operator space.
    pub fn full(dim: usize) -> Self {
        Self::new(hermitian_basis(dim)).expect("hermitian basis is valid")
    }

    fn check_duration(&self, duration: f64) -> Result<()> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidArgument(format!("segment duration must be > 0, got {duration}")));
        }
        Ok(())
    }

    pub fn push_constant(&mut self, duration: f64, coefficients: Vec<f64>) -> Result<&mut Self> {
        self.check_duration(duration)?;
        if coefficients.len() != self.basis.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a basis of {}",
                coefficients.len(),
                self.basis.len()
            )));
        }
        self.segments.push(Segment { duration, coefficients: Coefficients::Constant(coefficients) });
        Ok(self)
    }

    pub fn push_smooth<F>(&mut self, duration: f64, f: F) -> Result<&mut Self>
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.check_duration(duration)?;
        let got = f(0.0).len();
        if got != self.basis.len() {
            return Err(Error::Dimension(format!("{got} coefficients for a basis of {}", self.basis.len())));
        }
        self.segments.push(Segment { duration, coefficients: Coefficients::Smooth(Arc::new(f)) });
        Ok(self)
    }

    /// Appends a segment whose Hamiltonian is given directly; it is expanded on the basis.
    pub fn push_hamiltonian<F>(&mut self, duration: f64, h: F) -> Result<&mut Self>
    where
        F: Fn(f64) -> ComplexOperator + Send + Sync + 'static,
    {
        let basis = self.basis.clone();
        let drift = self.drift.clone();
        let probe = h(0.0);
        if probe.shape() != drift.shape() {
            return Err(Error::Dimension(format!("Hamiltonian is {:?}, schedule is {:?}", probe.shape(), drift.shape())));
        }
        let residual = (&probe - &drift - expand(&basis, &project(&basis, &(&probe - &drift)))).norm();
        if residual > 1e-9 * probe.norm().max(1.0) {
            return Err(Error::Dimension("Hamiltonian is outside the span of the control basis".into()));
        }
        self.push_smooth(duration, move |t| project(&basis, &(h(t) - &drift)))
    }

    pub fn basis(&self) -> &[ComplexOperator] {
        &self.basis
    }

    pub fn drift(&self) -> &ComplexOperator {
        &self.drift
    }

    pub fn set_drift(&mut self, drift: ComplexOperator) -> Result<()> {
        if drift.shape() != self.drift.shape() {
            return Err(Error::Dimension("drift shape differs from schedule".into()));
        }
        check_hermitian(&drift, crate::qcore::ToleranceConfig::default().hermiticity)?;
        self.drift = drift;
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segments_mut(&mut self) -> &mut Vec<Segment> {
        &mut self.segments
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn segment_hamiltonian(&self, index: usize, local_t: f64) -> ComplexOperator {
        let coeffs = self.segments[index].coefficients_at(local_t);
        let mut h = self.drift.clone();
        for (b, &ck) in self.basis.iter().zip(&coeffs) {
            if ck != 0.0 {
                h += b * c(ck, 0.0);
            }
        }
        h
    }

    /// H(t) at a global time; at a segment boundary the later segment is used.
    pub fn hamiltonian_at(&self, t: f64) -> ComplexOperator {
        let mut start = 0.0;
        let last = self.segments.len().saturating_sub(1);
        for (k, s) in self.segments.iter().enumerate() {
            if t < start + s.duration || k == last {
                return self.segment_hamiltonian(k, (t - start).clamp(0.0, s.duration));
            }
            start += s.duration;
        }
        self.drift.clone()
    }

    /// s₁ ⧺ s₂; both schedules must share basis and drift.
    pub fn concat(&self, other: &ControlSchedule) -> Result<ControlSchedule> {
        let same_basis = self.basis.len() == other.basis.len()
            && self.basis.iter().zip(&other.basis).all(|(a, b)| a.shape() == b.shape() && (a - b).norm() == 0.0);
        if !same_basis || self.drift.shape() != other.drift.shape() || (&self.drift - &other.drift).norm() != 0.0 {
            return Err(Error::Dimension("schedules use different bases".into()));
        }
        let mut out = self.clone();
        out.segments.extend(other.segments.iter().cloned());
        Ok(out)
    }

    /// Same schedule with every control coefficient multiplied by `factor`; the drift is untouched.
    pub fn scaled(&self, factor: f64) -> ControlSchedule {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg.coefficients = match &seg.coefficients {
                Coefficients::Constant(v) => Coefficients::Constant(v.iter().map(|x| x * factor).collect()),
                Coefficients::Smooth(f) => {
                    let f = f.clone();
                    Coefficients::Smooth(Arc::new(move |t| f(t).into_iter().map(|x| x * factor).collect()))
                }
            };
        }
        out
    }

    /// Reversed traversal: segments in reverse order, each run backwards in time.
    pub fn reversed(&self) -> ControlSchedule {
        let mut out = self.clone();
        out.segments = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let d = s.duration;
                let coefficients = match &s.coefficients {
                    Coefficients::Constant(v) => Coefficients::Constant(v.clone()),
                    Coefficients::Smooth(f) => {
                        let f = f.clone();
                        Coefficients::Smooth(Arc::new(move |t| f(d - t)))
                    }
                };
                Segment { duration: d, coefficients }
            })
            .collect();
        out
    }
}

/// Hilbert–Schmidt orthonormal Hermitian basis of n×n matrices (generalized Gell-Mann, unnormalized trace part).
pub fn hermitian_basis(n: usize) -> Vec<ComplexOperator> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(outer_basis(n, k, k));
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut x = zeros(n);
            x[(j, k)] = c(s, 0.0);
            x[(k, j)] = c(s, 0.0);
            out.push(x);
            let mut y = zeros(n);
            y[(j, k)] = c(0.0, -s);
            y[(k, j)] = c(0.0, s);
            out.push(y);
        }
    }
    out
}

/// Real coefficients Tr[B_k H] / Tr[B_k B_k] on a Hermitian basis assumed orthogonal.
pub fn project(basis: &[ComplexOperator], h: &ComplexOperator) -> Vec<f64> {
    basis
        .iter()
        .map(|b| {
            let num = (b * h).trace().re;
            let den = (b * b).trace().re;
            num / den
        })
        .collect()
}

pub fn expand(basis: &[ComplexOperator], coeffs: &[f64]) -> ComplexOperator {
    let n = basis[0].nrows();
    let mut h = zeros(n);
    for (b, &ck) in basis.iter().zip(coeffs) {
        h += b * c(ck, 0.0);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_segments() {
        let mut s = ControlSchedule::new(vec![pauli_x(), pauli_z()]).unwrap();
        assert!(s.push_constant(-1.0, vec![0.0, 0.0]).is_err());
        assert!(s.push_constant(1.0, vec![0.0]).is_err());
        assert!(ControlSchedule::new(vec![pauli_x(), identity(3)]).is_err());
        assert!(ControlSchedule::new(vec![from_real_rows(2, &[0.0, 1.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn hermitian_basis_round_trip() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        let h = from_rows(3, &[c(1.0, 0.0), c(0.2, 0.3), c(0.0, -1.0), c(0.2, -0.3), c(-0.5, 0.0), c(2.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.7, 0.0)]);
        let back = expand(&b, &project(&b, &h));
        assert!((back - h).norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_lookup_uses_later_segment_at_boundary() {
        let mut s = ControlSchedule::new(vec![pauli_z()]).unwrap();
        s.push_constant(1.0, vec![1.0]).unwrap().push_constant(2.0, vec![-3.0]).unwrap();
        assert_eq!(s.total_time(), 3.0);
        assert!((s.hamiltonian_at(0.5) - pauli_z()).norm() < 1e-15);
        assert!((s.hamiltonian_at(1.0) + pauli_z() * c(3.0, 0.0)).norm() < 1e-15);
        assert!((s.hamiltonian_at(3.0) + pauli_z() * c(3.0, 0.0)).norm() < 1e-15);
    }
}
