use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::*;

/// Piecewise-constant control problem H(t) = H_s + Σ_k ω_k(j) H_k on N equal segments.
#[derive(Debug, Clone)]
pub struct GrapeProblem {
    pub drift: ComplexOperator,
    pub controls: Vec<ComplexOperator>,
    /// Target on the full space; only U_T P(0) enters the objective.
    pub target: ComplexOperator,
    pub p0: ComplexOperator,
    pub eta: f64,
    pub segments: usize,
    pub duration: f64,
    pub(crate) subspace: ComplexOperator,
}

impl GrapeProblem {
    pub fn new(
        drift: ComplexOperator,
        controls: Vec<ComplexOperator>,
        target: ComplexOperator,
        p0: ComplexOperator,
        eta: f64,
        segments: usize,
        duration: f64,
    ) -> Result<Self> {
        let n = check_square(&drift)?;
        check_hermitian(&drift, 1e-10)?;
        if controls.is_empty() {
            return Err(Error::InvalidArgument("no control operators".into()));
        }
        for (k, h) in controls.iter().enumerate() {
            if h.shape() != (n, n) {
                return Err(Error::Dimension(format!("control {k} is {:?}, drift is {n}×{n}", h.shape())));
            }
            check_hermitian(h, 1e-10)?;
        }
        if target.shape() != (n, n) || p0.shape() != (n, n) {
            return Err(Error::Dimension(format!("target {:?} and P(0) {:?} must be {n}×{n}", target.shape(), p0.shape())));
        }
        let l = projector_rank(&p0, 1e-9)?;
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!("penalty η must be ≥ 0, got {eta}")));
        }
        if segments == 0 || !(duration > 0.0) {
            return Err(Error::InvalidArgument("need N ≥ 1 segments and τ > 0".into()));
        }
        let (vals, vecs) = herm_eigen(&p0);
        let mut subspace = ComplexOperator::zeros(n, l);
        let mut col = 0;
        for (k, v) in vals.iter().enumerate() {
            if *v > 0.5 {
                subspace.set_column(col, &vecs.column(k));
                col += 1;
            }
        }
        Ok(Self { drift, controls, target, p0, eta, segments, duration, subspace })
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    /// L = Tr P(0)
    pub fn subspace_dim(&self) -> usize {
        self.subspace.ncols()
    }

    pub fn segment_duration(&self) -> f64 {
        self.duration / self.segments as f64
    }

    pub(crate) fn check_shape(&self, controls: &DMatrix<f64>) -> Result<()> {
        if controls.shape() != (self.segments, self.controls.len()) {
            return Err(Error::Dimension(format!(
                "controls are {:?}, problem needs {}×{}",
                controls.shape(),
                self.segments,
                self.controls.len()
            )));
        }
        Ok(())
    }

    /// The controls as a piecewise-constant schedule with the problem's drift.
    pub fn schedule(&self, controls: &DMatrix<f64>) -> Result<ControlSchedule> {
        self.check_shape(controls)?;
        let mut s = ControlSchedule::with_drift(self.drift.clone(), self.controls.clone())?;
        let dt = self.segment_duration();
        for j in 0..self.segments {
            s.push_constant(dt, controls.row(j).iter().copied().collect())?;
        }
        Ok(s)
    }

    /// Samples a schedule written on the same control operators at segment midpoints.
    pub fn sample_schedule(&self, schedule: &ControlSchedule) -> Result<DMatrix<f64>> {
        if schedule.basis().len() != self.controls.len() || schedule.dim() != self.dim() {
            return Err(Error::Dimension("schedule and problem use different control sets".into()));
        }
        let scale = schedule.total_time() / self.duration;
        let dt = self.segment_duration();
        let mut out = DMatrix::zeros(self.segments, self.controls.len());
        for j in 0..self.segments {
            let t = (j as f64 + 0.5) * dt * scale;
            let mut start = 0.0;
            for seg in schedule.segments() {
                if t < start + seg.duration || std::ptr::eq(seg, schedule.segments().last().unwrap()) {
                    let coeffs = seg.coefficients_at(t - start);
                    for (k, v) in coeffs.into_iter().enumerate() {
                        out[(j, k)] = v / scale;
                    }
                    break;
                }
                start += seg.duration;
            }
        }
        Ok(out)
    }

    /// Largest ∫‖Σω_kH_k‖dt reachable with every |ω_k| ≤ bound: a speed-limit style cap on the pulse area.
    pub fn max_pulse_area(&self, bound: f64) -> f64 {
        let norms: f64 = self.controls.iter().map(|h| herm_eigen(h).0.iter().fold(0.0f64, |m, v| m.max(v.abs()))).sum();
        bound * norms * self.duration
    }
}

/// Seeded uniform initial guess in [−bound, bound].
pub fn random_controls(problem: &GrapeProblem, bound: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(problem.segments, problem.controls.len(), |_, _| rng.random_range(-bound..=bound))
}
