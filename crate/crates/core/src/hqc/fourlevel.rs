use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{check_holonomic_conditions, HolonomyReport};
use crate::qcore::*;

/// Largest denominator accepted when rationalizing frequency ratios.
pub const MAX_DENOMINATOR: u64 = 64;

/// Best rational approximation p/q of x ≥ 0 among the continued-fraction convergents with q ≤ qmax.
pub fn rational_approximation(x: f64, qmax: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    let mut best = (x.round() as u64, 1u64);
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > qmax {
            break;
        }
        best = (p2, q2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    best
}

/// Off-diagonal coupling S of H = Ω(t)[[0, S], [S†, 0]] on {|a⟩, |b⟩ | |c⟩, |d⟩}.
#[derive(Debug, Clone, PartialEq)]
pub struct FourLevelCoupling {
    pub s: ComplexOperator,
}

impl FourLevelCoupling {
    pub fn new(s: ComplexOperator) -> Result<Self> {
        if s.shape() != (2, 2) {
            return Err(Error::Dimension(format!("coupling block must be 2×2, got {:?}", s.shape())));
        }
        Ok(Self { s })
    }

    /// S = U_l D U_r†
    pub fn from_svd(ul: &ComplexOperator, d: [f64; 2], ur: &ComplexOperator) -> Result<Self> {
        check_unitary(ul, 1e-10)?;
        check_unitary(ur, 1e-10)?;
        Self::new(ul * diag(&[c(d[0], 0.0), c(d[1], 0.0)]) * ur.adjoint())
    }

    pub fn hamiltonian(&self) -> ComplexOperator {
        let mut h = zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                h[(i, 2 + j)] = self.s[(i, j)];
                h[(2 + j, i)] = self.s[(i, j)].conj();
            }
        }
        h
    }

    /// (U_l, [α, β], U_r) with α ≥ β. Each column of U_l has its first non-negligible entry
    /// real positive; for α = β, U_l = I.
    pub fn svd(&self) -> (ComplexOperator, [f64; 2], ComplexOperator) {
        let svd = self.s.clone().svd(true, true);
        let sv = &svd.singular_values;
        let (mut ul, mut ur) = (svd.u.unwrap(), svd.v_t.unwrap().adjoint());
        let (mut a, mut b) = (sv[0], sv[1]);
        if b > a {
            ul.swap_columns(0, 1);
            ur.swap_columns(0, 1);
            std::mem::swap(&mut a, &mut b);
        }
        if a > 0.0 && (a - b) <= 1e-12 * a {
            return (identity(2), [a, b], self.s.adjoint() * c(1.0 / a, 0.0));
        }
        for k in 0..2 {
            let lead = (0..2).map(|i| ul[(i, k)]).find(|z| z.norm() > 1e-12).unwrap_or(ONE);
            let ph = lead.conj() / lead.norm();
            for i in 0..2 {
                ul[(i, k)] *= ph;
                ur[(i, k)] *= ph;
            }
        }
        (ul, [a, b], ur)
    }

    /// Closed-form U at accumulated area a.
    pub fn evolution(&self, area: f64) -> ComplexOperator {
        let (ul, d, ur) = self.svd();
        let cs = diag(&[c((area * d[0]).cos(), 0.0), c((area * d[1]).cos(), 0.0)]);
        let sn = diag(&[c((area * d[0]).sin(), 0.0), c((area * d[1]).sin(), 0.0)]);
        let mut u = zeros(4);
        let blocks = [
            (0, 0, &ul * &cs * ul.adjoint()),
            (0, 2, &ul * &sn * ur.adjoint() * (-I)),
            (2, 0, &ur * &sn * ul.adjoint() * (-I)),
            (2, 2, &ur * &cs * ur.adjoint()),
        ];
        for (r, cc, m) in blocks {
            u.view_mut((r, cc), (2, 2)).copy_from(&m);
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourLevelMode {
    /// sin(a D) = 0: block-diagonal, a controlled pair of single-qubit gates.
    #[default]
    BlockDiagonal,
    /// cos(a D) = 0: the two subspaces are exchanged.
    Swap,
}

#[derive(Debug, Clone)]
pub struct FourLevelParams {
    pub coupling: FourLevelCoupling,
    pub mode: FourLevelMode,
    /// ∫Ω dt; when None the smallest area satisfying the mode is chosen.
    pub area: Option<f64>,
    pub shape: PulseShape,
    pub duration: f64,
}

impl FourLevelParams {
    pub fn new(coupling: FourLevelCoupling, mode: FourLevelMode) -> Self {
        Self { coupling, mode, area: None, shape: PulseShape::Square, duration: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct FourLevelGate {
    pub area: f64,
    pub full: ComplexOperator,
    pub analytic: ComplexOperator,
    /// (U0, U1) for block-diagonal gates, the two off-diagonal blocks for swaps.
    pub blocks: (ComplexOperator, ComplexOperator),
    /// Norm of the blocks that must vanish.
    pub block_residual: f64,
    /// max_k |sin(aD_k)| (block-diagonal) or |cos(aD_k)| (swap).
    pub commensurability_residual: f64,
    /// Deviation of the singular-value ratio from its rational approximation, times a.
    pub timing_error_bound: f64,
    pub report: Option<HolonomyReport>,
}

fn block(u: &ComplexOperator, r: usize, cc: usize) -> ComplexOperator {
    u.view((r, cc), (2, 2)).into_owned()
}

/// Holonomic gate of the four-level double-Λ system at a commensurate area.
pub fn four_level_gate(p: &FourLevelParams, substeps: usize) -> Result<FourLevelGate> {
    let s = &p.coupling.s;
    let det = (s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)]).norm();
    if det <= 1e-12 * s.norm_squared().max(1e-300) {
        return Err(Error::Reducible { det });
    }
    let (_, d, _) = p.coupling.svd();
    let ratio = d[0] / d[1];
    let (pn, qn) = rational_approximation(ratio, MAX_DENOMINATOR);
    let mismatch = (ratio - pn as f64 / qn as f64).abs();
    let (area, timing_error_bound) = match p.area {
        Some(a) => (a, 0.0),
        None => {
            if mismatch > 1e-9 * ratio {
                return Err(Error::Commensurability(format!(
                    "singular-value ratio {ratio} has no approximation p/q with q ≤ {MAX_DENOMINATOR} (best {pn}/{qn}, off by {mismatch:.3e})"
                )));
            }
            let a = match p.mode {
                FourLevelMode::BlockDiagonal => PI * pn as f64 / d[0],
                FourLevelMode::Swap => {
                    if pn % 2 == 0 || qn % 2 == 0 {
                        return Err(Error::Commensurability(format!("swap needs odd p and q, ratio is {pn}/{qn}")));
                    }
                    PI * pn as f64 / (2.0 * d[0])
                }
            };
            (a, a * d[1] * mismatch)
        }
    };
    let commensurability_residual = match p.mode {
        FourLevelMode::BlockDiagonal => (area * d[0]).sin().abs().max((area * d[1]).sin().abs()),
        FourLevelMode::Swap => (area * d[0]).cos().abs().max((area * d[1]).cos().abs()),
    };
    let tol = ToleranceConfig::default();
    if commensurability_residual > tol.cyclicity {
        return Err(Error::Commensurability(format!("area {area} leaves residual {commensurability_residual:.3e}")));
    }
    let env = p.shape.envelope(area, p.duration);
    let mut schedule = ControlSchedule::new(vec![p.coupling.hamiltonian()])?;
    schedule.push_smooth(p.duration, move |t| vec![env(t)])?;
    let record = propagate(&schedule, substeps)?;
    let full = record.final_propagator().clone();
    let analytic = p.coupling.evolution(area);
    let (blocks, block_residual, report) = match p.mode {
        FourLevelMode::BlockDiagonal => {
            let r = (block(&full, 0, 2).norm_squared() + block(&full, 2, 0).norm_squared()).sqrt();
            let rep = check_holonomic_conditions(&record, &diag(&[ONE, ONE, ZERO, ZERO]))?;
            ((block(&full, 0, 0), block(&full, 2, 2)), r, Some(rep))
        }
        FourLevelMode::Swap => {
            let r = (block(&full, 0, 0).norm_squared() + block(&full, 2, 2).norm_squared()).sqrt();
            ((block(&full, 0, 2), block(&full, 2, 0)), r, None)
        }
    };
    Ok(FourLevelGate { area, full, analytic, blocks, block_residual, commensurability_residual, timing_error_bound, report })
}

// ---------------------------------------------------------------------------
// XY interaction with an auxiliary qubit

/// Index of |aux, target⟩ with the auxiliary as the first factor.
fn aux_index(aux: usize, target: usize) -> usize {
    2 * aux + target
}

/// H1/J = ½sinθ(cosβσx + sinβσy)⊗I + ½cosθ(σx⊗σx + σy⊗σy), auxiliary first.
pub fn xy_aux_hamiltonian(theta: f64, beta: f64) -> ComplexOperator {
    let drive = (pauli_x() * c(beta.cos(), 0.0) + pauli_y() * c(beta.sin(), 0.0)) * c(0.5 * theta.sin(), 0.0);
    let xy = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y());
    kron(&drive, &identity(2)) + xy * c(0.5 * theta.cos(), 0.0)
}

/// cosθσz − sinθ(cosβσx + sinβσy)
pub fn xy_aux_target_gate(theta: f64, beta: f64) -> ComplexOperator {
    pauli_z() * c(theta.cos(), 0.0) - (pauli_x() * c(beta.cos(), 0.0) + pauli_y() * c(beta.sin(), 0.0)) * c(theta.sin(), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyAuxParams {
    pub theta: f64,
    pub beta: f64,
    pub shape: PulseShape,
    pub duration: f64,
    /// Accepted |tan²(θ/2) − p/q|.
    pub commensurability_tol: f64,
    /// Largest tolerated auxiliary population.
    pub leakage_tol: f64,
}

impl XyAuxParams {
    pub fn new(theta: f64, beta: f64) -> Self {
        Self { theta, beta, shape: PulseShape::Square, duration: 1.0, commensurability_tol: 1e-10, leakage_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct XyAuxGate {
    /// ∫J dt
    pub area: f64,
    /// tan²(θ/2) ≈ p/q
    pub ratio: (u64, u64),
    pub full: ComplexOperator,
    /// Target block with the auxiliary in |0⟩.
    pub gate: ComplexOperator,
    pub predicted: ComplexOperator,
    pub leakage: f64,
    /// |∫J dt · sin²(θ/2) − πp|
    pub timing_error_bound: f64,
    pub report: HolonomyReport,
}

/// Single-qubit holonomic gate on the target through an XY-coupled auxiliary qubit.
pub fn xy_aux_single_gate(p: &XyAuxParams, substeps: usize) -> Result<XyAuxGate> {
    let (sh, ch) = ((p.theta / 2.0).sin().powi(2), (p.theta / 2.0).cos().powi(2));
    if ch < 1e-12 {
        return Err(Error::Commensurability("θ = π leaves the target uncoupled".into()));
    }
    let t2 = sh / ch;
    let (pn, qn) = rational_approximation(t2, MAX_DENOMINATOR);
    let mismatch = (t2 - pn as f64 / qn as f64).abs();
    if mismatch > p.commensurability_tol {
        return Err(Error::Commensurability(format!(
            "tan²(θ/2) = {t2} is not p/q with q ≤ {MAX_DENOMINATOR} (best {pn}/{qn}, off by {mismatch:.3e})"
        )));
    }
    if (pn + qn) % 2 == 0 {
        return Err(Error::Commensurability(format!("tan²(θ/2) = {pn}/{qn}: exactly one of p, q must be even")));
    }
    let area = PI * qn as f64 / ch;
    let timing_error_bound = (area * sh - PI * pn as f64).abs();
    let env = p.shape.envelope(area, p.duration);
    let mut schedule = ControlSchedule::new(vec![xy_aux_hamiltonian(p.theta, p.beta)])?;
    schedule.push_smooth(p.duration, move |t| vec![env(t)])?;
    let record = propagate(&schedule, substeps)?;
    let full = record.final_propagator().clone();
    let v0 = [aux_index(0, 0), aux_index(0, 1)];
    let v1 = [aux_index(1, 0), aux_index(1, 1)];
    let leakage = sub_block(&full, &v1, &v0).norm_squared() / 2.0;
    if leakage > p.leakage_tol {
        return Err(Error::Leakage { leakage, tolerance: p.leakage_tol });
    }
    let report = check_holonomic_conditions(&record, &diag(&[ONE, ONE, ZERO, ZERO]))?;
    Ok(XyAuxGate {
        area,
        ratio: (pn, qn),
        gate: sub_block(&full, &v0, &v0),
        predicted: xy_aux_target_gate(p.theta, p.beta),
        full,
        leakage,
        timing_error_bound,
        report,
    })
}

/// Index of |q1 q2 aux⟩.
fn three_index(q1: usize, q2: usize, aux: usize) -> usize {
    4 * q1 + 2 * q2 + aux
}

/// H2/Ω = ½cos(θ/2)(σx¹σx³ + σy¹σy³) + ½sin(θ/2)(σx²σx³ + σy²σy³), qubit 3 auxiliary.
/// The ½ makes the flip amplitude within the one-excitation block equal to the couplings.
pub fn xy_two_qubit_hamiltonian(theta: f64) -> ComplexOperator {
    let (j13, j23) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (x, y, id) = (pauli_x(), pauli_y(), identity(2));
    let h13 = kron_all(&[x.clone(), id.clone(), x.clone()]) + kron_all(&[y.clone(), id.clone(), y.clone()]);
    let h23 = kron_all(&[id.clone(), x.clone(), x]) + kron_all(&[id, y.clone(), y]);
    h13 * c(0.5 * j13, 0.0) + h23 * c(0.5 * j23, 0.0)
}

/// Block on (|001⟩, |010⟩, |100⟩) at area π.
pub fn xy_v2_predicted(theta: f64) -> ComplexOperator {
    let (s, co) = theta.sin_cos();
    from_real_rows(3, &[-1.0, 0.0, 0.0, 0.0, co, -s, 0.0, -s, -co])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyTwoParams {
    pub theta: f64,
    /// ∫Ω dt
    pub area: f64,
    pub shape: PulseShape,
    pub duration: f64,
    pub leakage_tol: f64,
}

impl XyTwoParams {
    pub fn new(theta: f64) -> Self {
        Self { theta, area: PI, shape: PulseShape::Square, duration: 1.0, leakage_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct XyTwoGate {
    pub full: ComplexOperator,
    /// 3×3 block on (|001⟩, |010⟩, |100⟩).
    pub u_v2: ComplexOperator,
    /// Two-qubit gate with the auxiliary in |0⟩.
    pub gate: ComplexOperator,
    pub predicted: ComplexOperator,
    pub leakage: f64,
    pub makhlin: (C64, f64),
}

/// Two-qubit holonomic gate |00⟩⟨00| ⊕ U_V2 ⊕ (−|11⟩⟨11|) mediated by the auxiliary.
pub fn xy_aux_two_qubit_gate(p: &XyTwoParams, substeps: usize) -> Result<XyTwoGate> {
    let env = p.shape.envelope(p.area, p.duration);
    let mut schedule = ControlSchedule::new(vec![xy_two_qubit_hamiltonian(p.theta)])?;
    schedule.push_smooth(p.duration, move |t| vec![env(t)])?;
    let full = propagate_final(&schedule, substeps)?;
    let comp: Vec<usize> = (0..4).map(|k| three_index(k / 2, k % 2, 0)).collect();
    let aux: Vec<usize> = (0..4).map(|k| three_index(k / 2, k % 2, 1)).collect();
    let leakage = sub_block(&full, &aux, &comp).norm_squared() / 4.0;
    if leakage > p.leakage_tol {
        return Err(Error::Leakage { leakage, tolerance: p.leakage_tol });
    }
    let v2 = [three_index(0, 0, 1), three_index(0, 1, 0), three_index(1, 0, 0)];
    let u_v2 = sub_block(&full, &v2, &v2);
    let gate = sub_block(&full, &comp, &comp);
    let mut predicted = zeros(4);
    predicted[(0, 0)] = ONE;
    predicted[(3, 3)] = -ONE;
    let b = xy_v2_predicted(p.theta);
    predicted.view_mut((1, 1), (2, 2)).copy_from(&b.view((1, 1), (2, 2)));
    let makhlin = makhlin_invariants(&gate)?;
    Ok(XyTwoGate { full, u_v2, gate, predicted, leakage, makhlin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_fractions() {
        assert_eq!(rational_approximation(2.0, 64), (2, 1));
        assert_eq!(rational_approximation(2.0 / 3.0, 64), (2, 3));
        assert_eq!(rational_approximation(PI, 64), (22, 7));
        assert_eq!(rational_approximation(0.0, 64), (0, 1));
    }

    #[test]
    fn svd_round_trip_and_tie_break() {
        let ul = hadamard();
        let ur = su2_rotation(0.4, [0.0, 1.0, 0.0]);
        let cpl = FourLevelCoupling::from_svd(&ul, [2.0, 1.0], &ur).unwrap();
        let (l, d, r) = cpl.svd();
        assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        let back = &l * diag(&[c(d[0], 0.0), c(d[1], 0.0)]) * r.adjoint();
        assert!((back - &cpl.s).norm() < 1e-12);
        let equal = FourLevelCoupling::new(pauli_x() * c(1.5, 0.0)).unwrap();
        let (l, d, r) = equal.svd();
        assert_eq!(l, identity(2));
        assert!((l * diag(&[c(d[0], 0.0), c(d[1], 0.0)]) * r.adjoint() - &equal.s).norm() < 1e-12);
    }

    #[test]
    fn hadamard_controlled_block() {
        let cpl = FourLevelCoupling::from_svd(&hadamard(), [2.0, 1.0], &identity(2)).unwrap();
        let g = four_level_gate(&FourLevelParams::new(cpl, FourLevelMode::BlockDiagonal), 64).unwrap();
        assert!((g.area - PI).abs() < 1e-12);
        // U0 = H Z H = X, U1 = Z
        assert!((&g.blocks.0 - pauli_x()).norm() < 1e-8);
        assert!((&g.blocks.1 - pauli_z()).norm() < 1e-8);
        assert!(g.block_residual < 1e-8);
        assert!((&g.full - &g.analytic).norm() < 1e-8);
        let rep = g.report.unwrap();
        assert!(rep.cyclicity_residual < 1e-8 && rep.max_k_norm < 1e-8);
    }

    #[test]
    fn two_swaps_return_block_diagonal() {
        let a = FourLevelCoupling::from_svd(&identity(2), [1.0, 1.0 / 3.0], &hadamard()).unwrap();
        let b = FourLevelCoupling::from_svd(&su2_rotation(0.3, [1.0, 0.0, 0.0]), [1.0, 1.0 / 3.0], &identity(2)).unwrap();
        let ga = four_level_gate(&FourLevelParams::new(a, FourLevelMode::Swap), 64).unwrap();
        let gb = four_level_gate(&FourLevelParams::new(b, FourLevelMode::Swap), 64).unwrap();
        assert!(ga.block_residual < 1e-8);
        let u = &gb.full * &ga.full;
        let off = (block(&u, 0, 2).norm_squared() + block(&u, 2, 0).norm_squared()).sqrt();
        assert!(off < 1e-8);
    }

    #[test]
    fn reducible_and_incommensurate() {
        let singular = FourLevelCoupling::new(from_real_rows(2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(matches!(four_level_gate(&FourLevelParams::new(singular, FourLevelMode::BlockDiagonal), 8), Err(Error::Reducible { .. })));
        let irr = FourLevelCoupling::from_svd(&identity(2), [2f64.sqrt(), 1.0], &identity(2)).unwrap();
        assert!(matches!(four_level_gate(&FourLevelParams::new(irr, FourLevelMode::BlockDiagonal), 8), Err(Error::Commensurability(_))));
    }

    #[test]
    fn xy_aux_block_is_four_level() {
        // the coupling block has singular values cos²(θ/2), sin²(θ/2)
        let theta = 0.9;
        let h = xy_aux_hamiltonian(theta, 0.4);
        let s = sub_block(&h, &[0, 1], &[2, 3]);
        let (_, d, _) = FourLevelCoupling::new(s).unwrap().svd();
        assert!((d[0] - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
        assert!((d[1] - (theta / 2.0).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn xy_aux_commensurate_angle() {
        // tan²(θ/2) = 2/3
        let theta = 2.0 * (2.0f64 / 3.0).sqrt().atan();
        let g = xy_aux_single_gate(&XyAuxParams::new(theta, 0.7), 64).unwrap();
        assert_eq!(g.ratio, (2, 3));
        assert!(g.leakage < 1e-16);
        assert!(phase_aligned_distance(&g.gate, &g.predicted) < 1e-8);
        assert!(g.report.max_k_norm < 1e-8);
    }

    #[test]
    fn xy_aux_theta_zero_is_sigma_z() {
        let g = xy_aux_single_gate(&XyAuxParams::new(0.0, 0.0), 64).unwrap();
        assert!((&g.gate - pauli_z()).norm() < 1e-8);
    }

    #[test]
    fn xy_aux_hadamard_angle_is_incommensurate() {
        let p = XyAuxParams::new(PI / 4.0, PI);
        assert!(matches!(xy_aux_single_gate(&p, 8), Err(Error::Commensurability(_))));
        let relaxed = XyAuxParams { commensurability_tol: 1e-3, ..p };
        assert!(matches!(xy_aux_single_gate(&relaxed, 64), Err(Error::Leakage { .. })));
    }

    #[test]
    fn xy_two_qubit_matrix() {
        let g = xy_aux_two_qubit_gate(&XyTwoParams::new(0.7), 64).unwrap();
        assert!((&g.u_v2 - xy_v2_predicted(0.7)).norm() < 1e-8);
        assert!((&g.gate - &g.predicted).norm() < 1e-8);
        let z = xy_aux_two_qubit_gate(&XyTwoParams::new(0.0), 64).unwrap();
        assert!((&z.gate - diag(&[ONE, ONE, -ONE, -ONE])).norm() < 1e-8);
    }

    #[test]
    fn xy_two_qubit_wrong_area_leaks() {
        let mut p = XyTwoParams::new(0.7);
        p.area = 2.0;
        assert!(matches!(xy_aux_two_qubit_gate(&p, 16), Err(Error::Leakage { .. })));
    }
}
