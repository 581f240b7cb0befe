use crate::error::{Error, Result};
use crate::hqc::unitary_generator;
use crate::protect::codes::qubit_operator;
use crate::qcore::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdKind {
    /// [τ, X, τ, X]
    X,
    /// [τ, X, τ, Y, τ, X, τ, Y]
    XY,
}

/// System qubits coupled linearly to a small explicit environment register:
/// H = I⊗H_E + Σ S_k⊗E_k, with every S_k a combination of single-qubit Paulis.
#[derive(Debug, Clone)]
pub struct DdModel {
    pub system_qubits: usize,
    pub h_e: ComplexOperator,
    pub h_i: Vec<(ComplexOperator, ComplexOperator)>,
}

impl DdModel {
    pub fn env_dim(&self) -> usize {
        self.h_e.nrows()
    }

    pub fn sys_dim(&self) -> usize {
        1 << self.system_qubits
    }

    pub fn hamiltonian(&self) -> ComplexOperator {
        let mut h = kron(&identity(self.sys_dim()), &self.h_e);
        for (s, e) in &self.h_i {
            h += kron(s, e);
        }
        h
    }

    fn validate(&self, kind: DdKind) -> Result<()> {
        let n = self.system_qubits;
        if n == 0 {
            return Err(Error::Model("no system qubits".into()));
        }
        check_hermitian(&self.h_e, 1e-12)?;
        let paulis: Vec<ComplexOperator> = (0..n)
            .flat_map(|k| [pauli_x(), pauli_y(), pauli_z()].into_iter().map(move |p| qubit_operator(&p, k, n)))
            .collect();
        let global_x = global_pauli(&pauli_x(), n);
        for (idx, (s, e)) in self.h_i.iter().enumerate() {
            if s.shape() != (self.sys_dim(), self.sys_dim()) || e.shape() != self.h_e.shape() {
                return Err(Error::Model(format!("interaction term {idx} has mismatched dimensions")));
            }
            check_hermitian(s, 1e-12).map_err(|_| Error::Model(format!("system part of term {idx} is not Hermitian")))?;
            check_hermitian(e, 1e-12).map_err(|_| Error::Model(format!("environment part of term {idx} is not Hermitian")))?;
            let dim = self.sys_dim() as f64;
            let recon = paulis.iter().fold(zeros(self.sys_dim()), |acc, p| {
                let coef = (p.adjoint() * s).trace() / c(dim, 0.0);
                acc + p * coef
            });
            if (&recon - s).norm() > 1e-10 * s.norm().max(1.0) {
                return Err(Error::Model(format!("interaction term {idx} is not linear in single-qubit Paulis")));
            }
            if kind == DdKind::X && (s * &global_x + &global_x * s).norm() > 1e-10 * s.norm().max(1.0) {
                return Err(Error::Model(format!("interaction term {idx} has a component that commutes with X and is not removed by D_x")));
            }
        }
        Ok(())
    }
}

fn global_pauli(p: &ComplexOperator, n: usize) -> ComplexOperator {
    kron_all(&vec![p.clone(); n])
}

#[derive(Debug, Clone)]
pub struct DdResult {
    /// U_cycle^cycles on system ⊗ environment.
    pub evolution: ComplexOperator,
    pub cycle: ComplexOperator,
    /// ‖log(U_cycle e^{iH_E T_cycle})‖_F: the uncancelled coupling accumulated in one cycle.
    pub residual: f64,
    /// ½τ² Σ_{i>j} ‖[A_i, A_j]‖_F over the toggling-frame Hamiltonians.
    pub second_order_bound: f64,
    pub cycle_time: f64,
}

/// Runs `cycles` decoupling cycles with free periods τ. Pulses are instantaneous unless
/// `pulse_width` is given, in which case each pulse is a square π rotation of that length
/// applied on top of the free Hamiltonian.
pub fn dd_sequence(kind: DdKind, tau: f64, cycles: usize, model: &DdModel, pulse_width: Option<f64>) -> Result<DdResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument("τ must be > 0".into()));
    }
    model.validate(kind)?;
    let n = model.system_qubits;
    let env = model.env_dim();
    let h = model.hamiltonian();
    let lift = |op: &ComplexOperator| kron(op, &identity(env));
    let gx = global_pauli(&pauli_x(), n);
    let gy = global_pauli(&pauli_y(), n);
    let pulses: Vec<(ComplexOperator, ComplexOperator)> = match kind {
        DdKind::X => vec![(gx.clone(), pauli_x()), (gx, pauli_x())],
        DdKind::XY => vec![(gx.clone(), pauli_x()), (gy.clone(), pauli_y()), (gx, pauli_x()), (gy, pauli_y())],
    };
    let u_tau = herm_expm(&h, tau)?;
    let mut cycle = identity(h.nrows());
    let mut frame = identity(h.nrows());
    let mut toggled = Vec::new();
    let mut cycle_time = 0.0;
    for (global, single) in &pulses {
        toggled.push(frame.adjoint() * &h * &frame);
        cycle = &u_tau * cycle;
        cycle_time += tau;
        let ideal = lift(global);
        let pulse = match pulse_width {
            None => ideal.clone(),
            Some(w) => {
                if !(w > 0.0) {
                    return Err(Error::InvalidArgument("pulse width must be > 0".into()));
                }
                let gen = (0..n).fold(zeros(1 << n), |acc, k| acc + qubit_operator(single, k, n));
                let drive = lift(&gen) * c(std::f64::consts::FRAC_PI_2 / w, 0.0);
                cycle_time += w;
                herm_expm(&(&drive + &h), w)?
            }
        };
        cycle = pulse * cycle;
        frame = ideal * frame;
    }
    let he_full = kron(&identity(1 << n), &model.h_e);
    let reference = herm_expm(&he_full, -cycle_time)?;
    // the cycle closes up to a global phase of the pulse product; remove it before the logarithm
    let raw = &cycle * &reference;
    let ph = raw.trace();
    let raw = if ph.norm() > 1e-12 { raw * (ph.conj() / ph.norm()) } else { raw };
    let residual = unitary_generator(&raw)?.norm();
    let mut bound = 0.0;
    for i in 0..toggled.len() {
        for j in 0..i {
            bound += commutator(&toggled[i], &toggled[j]).norm();
        }
    }
    let second_order_bound = 0.5 * tau * tau * bound;
    let mut evolution = identity(h.nrows());
    for _ in 0..cycles {
        evolution = &cycle * evolution;
    }
    Ok(DdResult { evolution, cycle, residual, second_order_bound, cycle_time })
}
