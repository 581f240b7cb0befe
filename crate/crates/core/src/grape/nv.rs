use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::grape::{GrapeProblem, QuadratureSpec};
use crate::hqc::{lambda_controls, lambda_p0, LambdaParams, EXCITED, G0, G1};
use crate::protect::{Distribution, NoiseModel};
use crate::qcore::*;

/// NV-centre Λ scenario in dimensionless units: one time unit is `time_unit_ns` nanoseconds and
/// frequencies are angular, in radians per time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvScenario {
    pub time_unit_ns: f64,
    pub duration_ns: f64,
    pub segments: usize,
    pub eta: f64,
    /// Standard deviation of the thermal detuning δ2, in kHz.
    pub thermal_sigma_khz: f64,
    /// δ1 is uniform on ±this value.
    pub amplitude_halfwidth: f64,
}

impl Default for NvScenario {
    fn default() -> Self {
        Self { time_unit_ns: 1.0, duration_ns: 400.0, segments: 100, eta: 1e-6, thermal_sigma_khz: 130.0, amplitude_halfwidth: 0.02 }
    }
}

impl NvScenario {
    pub fn duration(&self) -> f64 {
        self.duration_ns / self.time_unit_ns
    }

    /// 2π × σ[kHz] × 10³ Hz × 10⁻⁹ s/ns × time unit
    pub fn thermal_sigma(&self) -> f64 {
        2.0 * PI * self.thermal_sigma_khz * 1e3 * 1e-9 * self.time_unit_ns
    }

    /// S_z on (|+⟩, |−⟩, |0⟩) with |0⟩ as the excited level.
    pub fn thermal_operator() -> ComplexOperator {
        let mut s = zeros(3);
        s[(G0, G0)] = ONE;
        s[(G1, G1)] = -ONE;
        s[(EXCITED, EXCITED)] = ZERO;
        s
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            error_ops: vec![(Self::thermal_operator(), Distribution::Gaussian { mean: 0.0, sigma: self.thermal_sigma() })],
            amplitude_error: Distribution::Uniform { low: -self.amplitude_halfwidth, high: self.amplitude_halfwidth },
        }
    }

    /// GRAPE problem for a 2×2 target acting on the ground doublet; |e⟩ is left free.
    pub fn problem(&self, target: &ComplexOperator) -> Result<GrapeProblem> {
        let mut full = embed(target, 3, &[G0, G1]);
        full[(EXCITED, EXCITED)] = ONE;
        GrapeProblem::new(zeros(3), lambda_controls(), full, lambda_p0(), self.eta, self.segments, self.duration())
    }

    pub fn hadamard_problem(&self) -> Result<GrapeProblem> {
        self.problem(&hadamard())
    }

    /// The unoptimized resonant Λ Hadamard (square π pulse over τ) on the problem's grid.
    pub fn lambda_hadamard_controls(&self, problem: &GrapeProblem) -> Result<DMatrix<f64>> {
        let mut p = LambdaParams::new(PI / 4.0, 0.0);
        p.duration = self.duration();
        let g = crate::hqc::lambda_resonant_gate(&p, 1)?;
        problem.sample_schedule(&g.schedule)
    }

    pub fn quadrature(&self, nodes: usize) -> QuadratureSpec {
        QuadratureSpec { nodes }
    }
}
