use crate::error::{Error, Result};
use crate::qcore::*;

/// Total, dynamical and geometric phase of a (nearly) cyclic state evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDecomposition {
    /// Continuously unwound arg⟨ψ(0)|ψ(t)⟩ at T.
    pub total: f64,
    /// −∫⟨ψ|H|ψ⟩dt
    pub dynamical: f64,
    /// total − dynamical
    pub geometric: f64,
    /// arg⟨ψ(0)|ψ(T)⟩ in (−π, π]
    pub total_principal: f64,
    /// geometric reduced to (−π, π]
    pub geometric_principal: f64,
    /// 1 − |⟨ψ(0)|ψ(T)⟩|
    pub cyclicity_residual: f64,
}

/// Splits the phase of U(t)|ψ0⟩ into dynamical and geometric parts.
pub fn decompose_phase(record: &EvolutionRecord, psi0: &Ket) -> Result<PhaseDecomposition> {
    Ok(*phase_trajectory(record, psi0, None)?.last().unwrap())
}

/// Phase decomposition at every grid point. The total phase at t_j is the unwound
/// arg⟨φ(t_j)|ψ(t_j)⟩ against the auxiliary path φ (default: φ = ψ0), so noncyclic
/// evolutions with a known reference path can be split pointwise.
pub fn phase_trajectory(record: &EvolutionRecord, psi0: &Ket, auxiliary: Option<&[Ket]>) -> Result<Vec<PhaseDecomposition>> {
    if psi0.len() != record.dim() {
        return Err(Error::Dimension(format!("ψ0 has dimension {}, record has {}", psi0.len(), record.dim())));
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("ψ0 is not normalized (‖ψ0‖ = {norm})")));
    }
    if let Some(aux) = auxiliary {
        if aux.len() != record.len() {
            return Err(Error::Dimension(format!("{} auxiliary states for {} samples", aux.len(), record.len())));
        }
    }
    let states = record.states(psi0);
    let reference = |j: usize| -> &Ket { auxiliary.map(|a| &a[j]).unwrap_or(psi0) };
    let mut out = Vec::with_capacity(states.len());
    let mut energy_integral = 0.0;
    let mut total = 0.0;
    let mut prev = reference(0).dotc(&states[0]).arg();
    total += prev;
    for j in 0..states.len() {
        if j > 0 {
            let dt = record.grid[j] - record.grid[j - 1];
            let (a, b) = match record.interval_hamiltonian(j - 1) {
                Some(h) => (psi_h_psi(&states[j - 1], h), psi_h_psi(&states[j], h)),
                None => (
                    psi_h_psi(&states[j - 1], &record.hamiltonians[j - 1]),
                    psi_h_psi(&states[j], &record.hamiltonians[j]),
                ),
            };
            energy_integral += 0.5 * dt * (a + b);
            let arg = reference(j).dotc(&states[j]).arg();
            total += wrap_angle(arg - prev);
            prev = arg;
        }
        let overlap = reference(j).dotc(&states[j]);
        let dynamical = -energy_integral;
        let geometric = total - dynamical;
        out.push(PhaseDecomposition {
            total,
            dynamical,
            geometric,
            total_principal: overlap.arg(),
            geometric_principal: wrap_angle(geometric),
            cyclicity_residual: (1.0 - overlap.norm()).clamp(0.0, 1.0),
        });
    }
    Ok(out)
}

/// As [`decompose_phase`], but fails when the evolution is not cyclic within `tolerance`.
pub fn decompose_phase_strict(record: &EvolutionRecord, psi0: &Ket, tolerance: f64) -> Result<PhaseDecomposition> {
    let d = decompose_phase(record, psi0)?;
    if d.cyclicity_residual > tolerance {
        return Err(Error::NotCyclic { residual: d.cyclicity_residual, tolerance });
    }
    Ok(d)
}

fn psi_h_psi(psi: &Ket, h: &ComplexOperator) -> f64 {
    psi.dotc(&(h * psi)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenstate_has_no_geometric_phase() {
        let mut s = ControlSchedule::new(vec![pauli_z()]).unwrap();
        s.push_constant(3.7, vec![1.0]).unwrap();
        let rec = propagate(&s, 16).unwrap();
        let d = decompose_phase(&rec, &basis_ket(2, 0)).unwrap();
        assert!((d.dynamical + 3.7).abs() < 1e-12);
        assert!(d.geometric.abs() < 1e-12);
        assert_eq!(d.total, d.dynamical + d.geometric);
        assert!(d.cyclicity_residual < 1e-14);
    }

    #[test]
    fn strict_mode_rejects_open_path() {
        let mut s = ControlSchedule::new(vec![pauli_x()]).unwrap();
        s.push_constant(0.4, vec![1.0]).unwrap();
        let rec = propagate(&s, 8).unwrap();
        let err = decompose_phase_strict(&rec, &basis_ket(2, 0), 1e-8).unwrap_err();
        assert!(matches!(err, Error::NotCyclic { .. }));
    }
}
