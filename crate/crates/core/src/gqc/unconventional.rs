use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{phase_trajectory, PhaseDecomposition};
use crate::qcore::*;

/// Drive of a harmonic mode: strength (β or Ω_D), modulation frequency (ω or δ) and phase φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorDriveParams {
    pub strength: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl OscillatorDriveParams {
    fn validate(&self) -> Result<()> {
        if self.frequency == 0.0 || !self.frequency.is_finite() {
            return Err(Error::InvalidArgument("modulation frequency must be nonzero".into()));
        }
        Ok(())
    }
}

/// (γ, γ^d, γ^g) of the driven oscillator H̃ = β(a†e^{iωt} + a e^{−iωt}) started in the vacuum.
pub fn unconventional_oscillator_phases(beta: f64, omega: f64, t: f64) -> Result<(f64, f64, f64)> {
    if omega == 0.0 {
        return Err(Error::InvalidArgument("ω must be nonzero".into()));
    }
    let g = beta * beta * (omega * t - (omega * t).sin()) / (omega * omega);
    Ok((g, 2.0 * g, -g))
}

/// Coherent amplitude (β/ω)(1 − e^{iωt}) reached at time t.
pub fn oscillator_displacement(beta: f64, omega: f64, t: f64) -> C64 {
    (ONE - cis(omega * t)) * (beta / omega)
}

pub fn annihilation(n_cut: usize) -> ComplexOperator {
    let mut a = zeros(n_cut);
    for n in 1..n_cut {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    a
}

/// Truncated coherent state |z⟩ = e^{−|z|²/2} Σ zⁿ/√n! |n⟩.
pub fn coherent_state(z: C64, n_cut: usize) -> Ket {
    let mut v = Ket::zeros(n_cut);
    let mut amp = c((-0.5 * z.norm_sqr()).exp(), 0.0);
    for n in 0..n_cut {
        v[n] = amp;
        amp = amp * z / ((n + 1) as f64).sqrt();
    }
    v
}

/// Smallest cutoff with ⟨n⟩_max + 6√⟨n⟩_max below it, where ⟨n⟩_max = (2β/ω)².
pub fn oscillator_cutoff(beta: f64, omega: f64) -> usize {
    let n_max = (2.0 * beta / omega).powi(2);
    (n_max + 6.0 * n_max.sqrt()).floor() as usize + 2
}

/// Fock-space simulation of the driven oscillator.
#[derive(Debug, Clone)]
pub struct OscillatorSimulation {
    pub record: EvolutionRecord,
    /// per-sample split, with the total phase taken against the coherent path |z(t)⟩
    pub phases: Vec<PhaseDecomposition>,
    /// population of the top five Fock levels at the end
    pub leakage: f64,
}

pub fn simulate_oscillator(beta: f64, omega: f64, duration: f64, n_cut: usize, steps: usize) -> Result<OscillatorSimulation> {
    OscillatorDriveParams { strength: beta, frequency: omega, phase: 0.0 }.validate()?;
    if n_cut < 8 {
        return Err(Error::InvalidArgument("n_cut must be at least 8".into()));
    }
    let a = annihilation(n_cut);
    let x = &a + a.adjoint();
    let p = (a.adjoint() - &a) * I;
    let mut s = ControlSchedule::new(vec![x, p])?;
    s.push_smooth(duration, move |t| vec![beta * (omega * t).cos(), beta * (omega * t).sin()])?;
    let record = propagate(&s, steps)?;
    let vacuum = basis_ket(n_cut, 0);
    let path: Vec<Ket> = record.grid.iter().map(|&t| coherent_state(oscillator_displacement(beta, omega, t), n_cut)).collect();
    let phases = phase_trajectory(&record, &vacuum, Some(&path))?;
    let last = record.final_propagator() * &vacuum;
    let leakage = (n_cut.saturating_sub(5)..n_cut).map(|k| last[k].norm_sqr()).sum();
    Ok(OscillatorSimulation { record, phases, leakage })
}

/// Spin-dependent displacement gate of two trapped ions.
#[derive(Debug, Clone)]
pub struct IonGate {
    pub gamma: f64,
    /// diag(1, e^{iγ}, e^{iγ}, 1)
    pub gate: ComplexOperator,
    /// −Im∮z*dz of the sampled displacement circle
    pub loop_geometric: f64,
    /// U(−π/2)(S⊗S) when γ = −π/2
    pub cz_decomposition: Option<ComplexOperator>,
}

pub fn ion_unconventional_gate(omega_d: f64, delta: f64, phi: f64) -> Result<IonGate> {
    OscillatorDriveParams { strength: omega_d, frequency: delta, phase: phi }.validate()?;
    let gamma = -2.0 * PI * (omega_d / delta).powi(2);
    let gate = ion_phase_gate(gamma);
    // z(t) = Ω_D e^{iφ}(1 − e^{−iδt})/(iδ), one period
    let samples = 4096;
    let z = |t: f64| cis(phi) * (ONE - cis(-delta * t)) * (omega_d / delta) / I;
    let period = 2.0 * PI / delta.abs();
    let mut integral = ZERO;
    for k in 0..samples {
        let (t0, t1) = (period * k as f64 / samples as f64, period * (k + 1) as f64 / samples as f64);
        let (z0, z1) = (z(t0), z(t1));
        integral += (z0.conj() + z1.conj()) * 0.5 * (z1 - z0);
    }
    let cz_decomposition = ((gamma + PI / 2.0).abs() < 1e-12).then(|| {
        let s = diag(&[ONE, I]);
        &gate * kron(&s, &s)
    });
    Ok(IonGate { gamma, gate, loop_geometric: -integral.im, cz_decomposition })
}

/// diag(1, e^{iγ}, e^{iγ}, 1)
pub fn ion_phase_gate(gamma: f64) -> ComplexOperator {
    diag(&[ONE, cis(gamma), cis(gamma), ONE])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let (b, w) = (0.7, 1.3);
        let (g, gd, gg) = unconventional_oscillator_phases(b, w, 2.0 * PI / w).unwrap();
        let k = 2.0 * PI * b * b / (w * w);
        assert!((g - k).abs() < 1e-14 && (gd - 2.0 * k).abs() < 1e-14 && (gg + k).abs() < 1e-14);
        assert_eq!(unconventional_oscillator_phases(b, w, 0.0).unwrap(), (0.0, 0.0, -0.0));
    }

    #[test]
    fn fock_oracle_small_drive() {
        let (b, w, t) = (0.3, 2.0, 1.0);
        let sim = simulate_oscillator(b, w, t, 40, 400).unwrap();
        let last = sim.phases.last().unwrap();
        let (g, gd, gg) = unconventional_oscillator_phases(b, w, t).unwrap();
        assert!((last.total - g).abs() < 1e-4);
        assert!((last.dynamical - gd).abs() < 1e-4);
        assert!((last.geometric - gg).abs() < 1e-4);
        assert!(sim.leakage < 1e-12);
    }

    #[test]
    fn ion_cz_identity() {
        let g = ion_unconventional_gate(0.5, 1.0, 0.3).unwrap();
        assert!((g.gamma + PI / 2.0).abs() < 1e-15);
        let cz = g.cz_decomposition.unwrap();
        assert!((cz - diag(&[ONE, ONE, ONE, -ONE])).norm() < 1e-15);
        assert!((g.gamma + g.loop_geometric).abs() < 1e-6);
        assert!((ion_unconventional_gate(0.0, 1.0, 0.0).unwrap().gate - identity(4)).norm() == 0.0);
    }

    #[test]
    fn cutoff_rule() {
        let n = oscillator_cutoff(1.0, 1.0);
        let m = 4.0;
        assert!(m + 6.0 * 2.0 < n as f64);
    }
}
