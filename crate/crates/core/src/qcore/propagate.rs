use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::schedule::ControlSchedule;

pub const DEFAULT_SUBSTEPS: usize = 64;

/// Sampled trajectory U(t_j), H(t_j) on a strictly increasing grid with U(t_0) = I.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    pub grid: Vec<f64>,
    pub propagators: Vec<ComplexOperator>,
    /// H(t_j) at every sample.
    pub hamiltonians: Vec<ComplexOperator>,
    /// Constant Hamiltonian actually used on each interval [t_j, t_{j+1}], when the
    /// record comes from piecewise-constant propagation.
    pub step_hamiltonians: Option<Vec<ComplexOperator>>,
    pub initial_states: Vec<Ket>,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagateOptions {
    pub substeps_per_segment: usize,
    /// Upper bound on the grid spacing; long segments get extra substeps.
    pub max_step: Option<f64>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self { substeps_per_segment: DEFAULT_SUBSTEPS, max_step: None }
    }
}

impl EvolutionRecord {
    pub fn dim(&self) -> usize {
        self.propagators[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn final_propagator(&self) -> &ComplexOperator {
        self.propagators.last().unwrap()
    }

    /// |ψ(t_j)⟩ = U(t_j)|ψ0⟩
    pub fn states(&self, psi0: &Ket) -> Vec<Ket> {
        self.propagators.iter().map(|u| u * psi0).collect()
    }

    pub fn with_initial_states(mut self, states: Vec<Ket>) -> Result<Self> {
        for (k, s) in states.iter().enumerate() {
            if s.len() != self.dim() {
                return Err(Error::Dimension(format!("initial state {k} has dimension {}", s.len())));
            }
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("initial state {k} is not normalized")));
            }
        }
        self.initial_states = states;
        Ok(self)
    }

    /// Record built from closed-form U(t) and H(t) on a uniform grid of `steps` intervals.
    pub fn from_fn(
        total_time: f64,
        steps: usize,
        u: impl Fn(f64) -> ComplexOperator,
        h: impl Fn(f64) -> ComplexOperator,
    ) -> Self {
        let grid: Vec<f64> = (0..=steps).map(|j| total_time * j as f64 / steps as f64).collect();
        let propagators = grid.iter().map(|&t| u(t)).collect();
        let hamiltonians = grid.iter().map(|&t| h(t)).collect();
        Self { grid, propagators, hamiltonians, step_hamiltonians: None, initial_states: Vec::new() }
    }

    /// Max over samples of ‖U†U − I‖_F.
    pub fn max_unitarity_residual(&self) -> f64 {
        self.propagators.iter().map(unitarity_residual).fold(0.0, f64::max)
    }

    /// Hamiltonian governing the interval [t_j, t_{j+1}] for quadrature: the stored step
    /// Hamiltonian when available, otherwise None (callers fall back to point samples).
    pub fn interval_hamiltonian(&self, j: usize) -> Option<&ComplexOperator> {
        self.step_hamiltonians.as_ref().map(|s| &s[j])
    }
}

pub fn propagate(schedule: &ControlSchedule, substeps_per_segment: usize) -> Result<EvolutionRecord> {
    propagate_with(schedule, PropagateOptions { substeps_per_segment, max_step: None })
}

/// Midpoint-sampled piecewise-constant propagation: U(t_{j+1}) = e^{−iH(t_j+Δt/2)Δt} U(t_j).
pub fn propagate_with(schedule: &ControlSchedule, opts: PropagateOptions) -> Result<EvolutionRecord> {
    if opts.substeps_per_segment == 0 {
        return Err(Error::InvalidArgument("substeps_per_segment must be ≥ 1".into()));
    }
    if schedule.segments().is_empty() {
        return Err(Error::InvalidArgument("schedule has no segments".into()));
    }
    let dim = schedule.dim();
    let mut grid = vec![0.0];
    let mut propagators = vec![identity(dim)];
    let mut hamiltonians = Vec::new();
    let mut steps = Vec::new();
    let mut t0 = 0.0;
    let mut u = identity(dim);
    for (k, seg) in schedule.segments().iter().enumerate() {
        let mut n = opts.substeps_per_segment;
        if let Some(h) = opts.max_step {
            n = n.max((seg.duration / h).ceil() as usize);
        }
        let dt = seg.duration / n as f64;
        for j in 0..n {
            let local = j as f64 * dt;
            hamiltonians.push(schedule.segment_hamiltonian(k, local));
            let h_mid = schedule.segment_hamiltonian(k, local + 0.5 * dt);
            u = herm_expm_unchecked(&h_mid, dt) * u;
            steps.push(h_mid);
            propagators.push(u.clone());
            grid.push(t0 + (j + 1) as f64 * dt);
        }
        t0 += seg.duration;
        // pin the segment end exactly to avoid drift in the accumulated grid
        *grid.last_mut().unwrap() = t0;
    }
    let last = schedule.segments().len() - 1;
    hamiltonians.push(schedule.segment_hamiltonian(last, schedule.segments()[last].duration));
    Ok(EvolutionRecord { grid, propagators, hamiltonians, step_hamiltonians: Some(steps), initial_states: Vec::new() })
}

/// Final propagator only, without storing the trajectory.
pub fn propagate_final(schedule: &ControlSchedule, substeps_per_segment: usize) -> Result<ComplexOperator> {
    if substeps_per_segment == 0 {
        return Err(Error::InvalidArgument("substeps_per_segment must be ≥ 1".into()));
    }
    let mut u = identity(schedule.dim());
    for (k, seg) in schedule.segments().iter().enumerate() {
        let dt = seg.duration / substeps_per_segment as f64;
        for j in 0..substeps_per_segment {
            let h_mid = schedule.segment_hamiltonian(k, (j as f64 + 0.5) * dt);
            u = herm_expm_unchecked(&h_mid, dt) * u;
        }
    }
    Ok(u)
}
