use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> ComplexOperator {
        match self {
            Axis::X => pauli_x(),
            Axis::Y => pauli_y(),
            Axis::Z => pauli_z(),
        }
    }
}

/// `op` acting on qubit k of n (qubit 0 is the leftmost tensor factor).
pub fn qubit_operator(op: &ComplexOperator, k: usize, n: usize) -> ComplexOperator {
    let ops: Vec<ComplexOperator> = (0..n).map(|j| if j == k { op.clone() } else { identity(2) }).collect();
    kron_all(&ops)
}

/// S_α = ½Σ_k σ_α^k for each requested axis.
pub fn collective_error_ops(n: usize, axes: &[Axis]) -> Result<Vec<ComplexOperator>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    Ok(axes
        .iter()
        .map(|a| {
            let p = a.pauli();
            let mut s = zeros(1 << n);
            for k in 0..n {
                s += qubit_operator(&p, k, n);
            }
            s * c(0.5, 0.0)
        })
        .collect())
}

/// Collective spin sector: total angular momentum J (stored as 2J), multiplicity n_J
/// (the noiseless factor) and dimension d_J = 2J+1 (the gauge factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NsSector {
    pub two_j: u32,
    pub n_j: u64,
    pub d_j: u64,
}

impl NsSector {
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsDecomposition {
    pub qubits: u32,
    pub sectors: Vec<NsSector>,
}

impl NsDecomposition {
    /// Σ n_J d_J
    pub fn total_dimension(&self) -> u128 {
        self.sectors.iter().map(|s| s.n_j as u128 * s.d_j as u128).sum()
    }

    /// Sectors with d_J = 1, i.e. decoherence-free subspaces.
    pub fn dfs_dimension(&self) -> u64 {
        self.sectors.iter().filter(|s| s.d_j == 1).map(|s| s.n_j).sum()
    }
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// n_J = (2J+1) N! / ((N/2+1+J)! (N/2−J)!) for every J of N spin-½.
pub fn ns_dimensions(n: u32) -> Result<NsDecomposition> {
    if n == 0 || n > 30 {
        return Err(Error::InvalidArgument(format!("qubit count must be in 1..=30, got {n}")));
    }
    let mut sectors = Vec::new();
    let mut two_j = n % 2;
    while two_j <= n {
        let a = (n + 2 + two_j) / 2;
        let b = (n - two_j) / 2;
        let n_j = (two_j as u128 + 1) * factorial(n) / (factorial(a) * factorial(b));
        sectors.push(NsSector { two_j, n_j: n_j as u64, d_j: two_j as u64 + 1 });
        two_j += 2;
    }
    let d = NsDecomposition { qubits: n, sectors };
    assert_eq!(d.total_dimension(), 1u128 << n, "sector dimensions must fill the Hilbert space");
    Ok(d)
}

// ---------------------------------------------------------------------------
// N = 4, J = 1 noiseless subsystem

/// Isometries B_m (16×3), m = +1, 0, −1: column k is |k⟩|m⟩, the k-th copy of the J = 1 triplet.
pub fn ns4_j1_basis() -> Vec<ComplexOperator> {
    let s = collective_error_ops(4, &[Axis::X, Axis::Y, Axis::Z]).unwrap();
    let s2 = &s[0] * &s[0] + &s[1] * &s[1] + &s[2] * &s[2];
    let lower = &s[0] - &s[1] * I;
    // projector onto S² = 2 (J = 1)
    let (vals, vecs) = herm_eigen(&s2);
    let mut p = zeros(16);
    for (k, v) in vals.iter().enumerate() {
        if (v - 2.0).abs() < 1e-8 {
            let col = vecs.column(k).into_owned();
            p += outer(&col, &col);
        }
    }
    // |0001⟩, |0010⟩, |0100⟩ have S_z = 1; their J = 1 parts, orthonormalized, fix the k labels
    let mut top = ComplexOperator::zeros(16, 3);
    let mut done: Vec<Ket> = Vec::new();
    for (col, idx) in [1usize, 2, 4].into_iter().enumerate() {
        let mut v = &p * basis_ket(16, idx);
        for u in &done {
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let v = normalized(&v);
        top.set_column(col, &v);
        done.push(v);
    }
    let mid = &lower * &top * c(1.0 / 2f64.sqrt(), 0.0);
    let bottom = &lower * &mid * c(1.0 / 2f64.sqrt(), 0.0);
    vec![top, mid, bottom]
}

/// Physical operator acting as `m` on the 3-dimensional noiseless factor and trivially on the gauge.
pub fn ns4_logical_operator(m: &ComplexOperator) -> Result<ComplexOperator> {
    if m.shape() != (3, 3) {
        return Err(Error::Dimension(format!("logical operator must be 3×3, got {:?}", m.shape())));
    }
    Ok(ns4_j1_basis().iter().fold(zeros(16), |acc, b| acc + b * m * b.adjoint()))
}

/// Swap of physical qubits i and j.
pub fn qubit_swap(i: usize, j: usize, n: usize) -> ComplexOperator {
    let dim = 1 << n;
    let mut p = zeros(dim);
    for x in 0..dim {
        let (bi, bj) = ((x >> (n - 1 - i)) & 1, (x >> (n - 1 - j)) & 1);
        let mut y = x & !(1 << (n - 1 - i)) & !(1 << (n - 1 - j));
        y |= bj << (n - 1 - i);
        y |= bi << (n - 1 - j);
        p[(y, x)] = ONE;
    }
    p
}

/// 3×3 action of a qubit swap on the noiseless factor.
pub fn ns4_swap_representation(i: usize, j: usize) -> ComplexOperator {
    let b = &ns4_j1_basis()[0];
    b.adjoint() * qubit_swap(i, j, 4) * b
}

/// |ψ⟩_L = Σ_k b_k |k⟩_L with |k⟩_L = Σ_m |k⟩|m⟩/√3.
pub fn ns4_encode(b: &Ket) -> Result<Ket> {
    if b.len() != 3 {
        return Err(Error::Dimension(format!("noiseless factor has dimension 3, got {}", b.len())));
    }
    let basis = ns4_j1_basis();
    let mut out = Ket::zeros(16);
    for bm in &basis {
        out += bm * b * c(1.0 / 3f64.sqrt(), 0.0);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// decoherence-free subspaces

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfsKind {
    Dfs2,
    Dfs3,
    Dfs4,
}

#[derive(Debug, Clone)]
pub struct DfsCode {
    pub kind: DfsKind,
    pub physical_qubits: usize,
    pub logical_basis: Vec<Ket>,
    pub auxiliary_basis: Vec<Ket>,
}

fn computational(bits: &str) -> Ket {
    let n = bits.len();
    let idx = usize::from_str_radix(bits, 2).unwrap();
    basis_ket(1 << n, idx)
}

impl DfsCode {
    pub fn new(kind: DfsKind) -> Self {
        let (n, logical, aux): (usize, &[&str], &[&str]) = match kind {
            DfsKind::Dfs2 => (2, &["01", "10"], &[]),
            DfsKind::Dfs3 => (3, &["010", "001"], &["100"]),
            DfsKind::Dfs4 => (4, &["0001", "0010"], &["0100", "1000"]),
        };
        Self {
            kind,
            physical_qubits: n,
            logical_basis: logical.iter().map(|b| computational(b)).collect(),
            auxiliary_basis: aux.iter().map(|b| computational(b)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.physical_qubits
    }

    /// Isometry whose columns are the logical then auxiliary states.
    pub fn isometry(&self, with_auxiliary: bool) -> ComplexOperator {
        let cols: Vec<&Ket> = self.logical_basis.iter().chain(if with_auxiliary { self.auxiliary_basis.iter() } else { [].iter() }).collect();
        let mut m = ComplexOperator::zeros(self.dim(), cols.len());
        for (k, v) in cols.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }

    /// S_z eigenvalue shared by the code states.
    pub fn sz_value(&self) -> f64 {
        let sz = &collective_error_ops(self.physical_qubits, &[Axis::Z]).unwrap()[0];
        self.logical_basis[0].dotc(&(sz * &self.logical_basis[0])).re
    }
}

/// Maps logical amplitudes (optionally including auxiliary levels) onto the physical register.
pub fn dfs_encode(code: &DfsCode, logical: &Ket) -> Result<Ket> {
    let with_aux = match logical.len() {
        l if l == code.logical_basis.len() => false,
        l if l == code.logical_basis.len() + code.auxiliary_basis.len() => true,
        l => return Err(Error::Dimension(format!("{l} logical amplitudes for a {:?} code", code.kind))),
    };
    Ok(code.isometry(with_aux) * logical)
}

/// |1⟩⟨0| on qubit i times |0⟩⟨1| on qubit j: moves an excitation from j to i.
pub fn flip_operator(i: usize, j: usize, n: usize) -> ComplexOperator {
    let raise = outer_basis(2, 1, 0);
    let lower = outer_basis(2, 0, 1);
    qubit_operator(&raise, i, n) * qubit_operator(&lower, j, n)
}

/// XY-type schedule J2a·F01 + J1a·F02 + h.c. whose restriction to the DFS₃ span is the Λ
/// Hamiltonian with |a⟩_L as the excited level; the envelope has the given area.
pub fn dfs_logical_lambda(code: &DfsCode, couplings: (C64, C64), shape: PulseShape, area: f64, duration: f64) -> Result<ControlSchedule> {
    if code.kind != DfsKind::Dfs3 {
        return Err(Error::Dimension(format!("Λ encoding needs a DFS3 code, got {:?}", code.kind)));
    }
    let norm = (couplings.0.norm_sqr() + couplings.1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("couplings vanish".into()));
    }
    let mut controls = Vec::with_capacity(4);
    for f in [flip_operator(0, 1, 3), flip_operator(0, 2, 3)] {
        controls.push(&f + f.adjoint());
        let fi = &f * I;
        controls.push(&fi + fi.adjoint());
    }
    let (j2a, j1a) = (couplings.0 / norm, couplings.1 / norm);
    let env = shape.envelope(area, duration);
    let mut s = ControlSchedule::new(controls)?;
    s.push_smooth(duration, move |t| {
        let o = env(t);
        vec![o * j2a.re, o * j2a.im, o * j1a.re, o * j1a.im]
    })?;
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct DfsGate {
    pub schedule: ControlSchedule,
    pub logical: ComplexOperator,
    /// Population leaving the code space, averaged over logical inputs.
    pub leakage: f64,
}

/// Resonant Λ loop inside DFS₃ with (J2a, J1a) = (sin(θ/2)e^{iφ}, −cos(θ/2)): logical n·σ.
pub fn dfs3_lambda_gate(theta: f64, phi: f64, shape: PulseShape, substeps: usize) -> Result<DfsGate> {
    let code = DfsCode::new(DfsKind::Dfs3);
    let couplings = (cis(phi) * (theta / 2.0).sin(), c(-(theta / 2.0).cos(), 0.0));
    let schedule = dfs_logical_lambda(&code, couplings, shape, PI, 1.0)?;
    let u = propagate_final(&schedule, substeps)?;
    let b = code.isometry(false);
    let logical = b.adjoint() * &u * &b;
    let leakage = 1.0 - logical.norm_squared() / 2.0;
    Ok(DfsGate { schedule, logical, leakage: leakage.max(0.0) })
}

/// Entanglement fidelity |Tr(V†K_k)|²/d² summed over Kraus operators K_k = B†⟨k|U|ε⟩B of the
/// logical channel, for U acting on system ⊗ environment and the environment starting in |ε⟩.
pub fn logical_process_fidelity(u: &ComplexOperator, code: &ComplexOperator, env_state: &Ket, target: &ComplexOperator) -> Result<f64> {
    let (ns, d) = code.shape();
    let ne = env_state.len();
    if u.shape() != (ns * ne, ns * ne) || target.shape() != (d, d) {
        return Err(Error::Dimension("operator shapes do not match system ⊗ environment".into()));
    }
    let mut f = 0.0;
    for k in 0..ne {
        // ⟨k|U|ε⟩ as an operator on the system
        let mut m = zeros(ns);
        for i in 0..ns {
            for j in 0..ns {
                let mut acc = ZERO;
                for e in 0..ne {
                    acc += u[(i * ne + k, j * ne + e)] * env_state[e];
                }
                m[(i, j)] = acc;
            }
        }
        let kraus = code.adjoint() * m * code;
        f += (target.adjoint() * kraus).trace().norm_sqr();
    }
    Ok(f / (d * d) as f64)
}
