use crate::error::{Error, Result};
use crate::qcore::linalg::*;
use crate::qcore::propagate::propagate_final;
use crate::qcore::schedule::ControlSchedule;

/// One step of a composite sequence: a timed evolution or an ideal instantaneous pulse.
#[derive(Debug, Clone)]
pub enum SequenceStep {
    Evolve(ControlSchedule),
    Instant(ComplexOperator),
}

/// Ordered list of steps; the first step acts first.
#[derive(Debug, Clone, Default)]
pub struct Sequence {
    pub steps: Vec<SequenceStep>,
}

impl Sequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evolve(mut self, s: ControlSchedule) -> Self {
        self.steps.push(SequenceStep::Evolve(s));
        self
    }

    pub fn pulse(mut self, u: ComplexOperator) -> Self {
        self.steps.push(SequenceStep::Instant(u));
        self
    }

    pub fn total_time(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                SequenceStep::Evolve(c) => c.total_time(),
                SequenceStep::Instant(_) => 0.0,
            })
            .sum()
    }

    /// Product of all step unitaries, later steps on the left.
    pub fn unitary(&self, substeps_per_segment: usize) -> Result<ComplexOperator> {
        let mut u: Option<ComplexOperator> = None;
        for step in &self.steps {
            let v = match step {
                SequenceStep::Evolve(s) => propagate_final(s, substeps_per_segment)?,
                SequenceStep::Instant(p) => p.clone(),
            };
            u = Some(match u {
                None => v,
                Some(prev) => {
                    if prev.shape() != v.shape() {
                        return Err(Error::Dimension("sequence steps act on different dimensions".into()));
                    }
                    v * prev
                }
            });
        }
        u.ok_or_else(|| Error::InvalidArgument("empty sequence".into()))
    }
}

/// Bloch-sphere rotation [β]^α = e^{−iβσ_α/2} about a unit axis.
pub fn rotation(beta: f64, axis: [f64; 3]) -> ComplexOperator {
    su2_rotation(-beta / 2.0, axis)
}

pub fn rx(beta: f64) -> ComplexOperator {
    rotation(beta, [1.0, 0.0, 0.0])
}

pub fn ry(beta: f64) -> ComplexOperator {
    rotation(beta, [0.0, 1.0, 0.0])
}

pub fn rz(beta: f64) -> ComplexOperator {
    rotation(beta, [0.0, 0.0, 1.0])
}
