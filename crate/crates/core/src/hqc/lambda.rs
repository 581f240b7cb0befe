use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{check_holonomic_conditions, HolonomyReport};
use crate::qcore::*;

/// Level indices of the Λ system: two ground states and the excited state.
pub const G0: usize = 0;
pub const G1: usize = 1;
pub const EXCITED: usize = 2;

/// Hermitian controls [|e⟩⟨0|+h.c., i|e⟩⟨0|+h.c., |e⟩⟨1|+h.c., i|e⟩⟨1|+h.c.] so that
/// ω0|e⟩⟨0| + ω1|e⟩⟨1| + h.c. has coefficients (Re ω0, Im ω0, Re ω1, Im ω1).
pub fn lambda_controls() -> Vec<ComplexOperator> {
    let mut out = Vec::with_capacity(4);
    for g in [G0, G1] {
        let up = outer_basis(3, EXCITED, g);
        out.push(&up + up.adjoint());
        let iu = &up * I;
        out.push(&iu + iu.adjoint());
    }
    out
}

fn coupling_coefficients(w0: C64, w1: C64, scale: f64) -> Vec<f64> {
    vec![scale * w0.re, scale * w0.im, scale * w1.re, scale * w1.im]
}

/// Ω(ω0|e⟩⟨0| + ω1|e⟩⟨1| + h.c.) − Δ|e⟩⟨e|
pub fn lambda_hamiltonian(w0: C64, w1: C64, omega: f64, detuning: f64) -> ComplexOperator {
    let mut h = expand(&lambda_controls(), &coupling_coefficients(w0, w1, omega));
    h[(EXCITED, EXCITED)] -= c(detuning, 0.0);
    h
}

/// Projector onto the computational (ground) subspace of the Λ system.
pub fn lambda_p0() -> ComplexOperator {
    diag(&[ONE, ONE, ZERO])
}

fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    pub theta: f64,
    pub phi: f64,
    /// ∫Ω(t)dt; the loop closes only for π.
    pub pulse_area: f64,
    pub shape: PulseShape,
    pub duration: f64,
}

impl LambdaParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi, pulse_area: PI, shape: PulseShape::Square, duration: 1.0 }
    }

    /// (ω0, ω1) = (sin(θ/2)e^{iφ}, −cos(θ/2))
    pub fn couplings(&self) -> (C64, C64) {
        (cis(self.phi) * (self.theta / 2.0).sin(), c(-(self.theta / 2.0).cos(), 0.0))
    }

    pub fn axis(&self) -> [f64; 3] {
        bloch(self.theta, self.phi)
    }

    /// |d⟩ = −ω1|0⟩ + ω0|1⟩
    pub fn dark(&self) -> Ket {
        let (w0, w1) = self.couplings();
        ket(&[-w1, w0, ZERO])
    }

    /// |b⟩ = ω0*|0⟩ + ω1*|1⟩
    pub fn bright(&self) -> Ket {
        let (w0, w1) = self.couplings();
        ket(&[w0.conj(), w1.conj(), ZERO])
    }
}

/// Output of a Λ-type holonomic scheme: the computational block of the final propagator
/// and the holonomic-condition report.
#[derive(Debug, Clone)]
pub struct LambdaGate {
    pub schedule: ControlSchedule,
    pub full: ComplexOperator,
    pub gate: ComplexOperator,
    pub predicted: ComplexOperator,
    pub report: HolonomyReport,
    pub leakage: f64,
}

fn computational_block(u: &ComplexOperator) -> ComplexOperator {
    sub_block(u, &[G0, G1], &[G0, G1])
}

fn leakage_of(u: &ComplexOperator) -> f64 {
    sub_block(u, &[EXCITED], &[G0, G1]).norm_squared() / 2.0
}

/// Resonant Λ gate n·σ, n = (sinθcosφ, sinθsinφ, cosθ), from a single π-area pulse pair.
pub fn lambda_resonant_gate(p: &LambdaParams, substeps: usize) -> Result<LambdaGate> {
    let tol = ToleranceConfig::default();
    if (p.pulse_area - PI).abs() > tol.cyclicity {
        return Err(Error::Cyclicity(format!("pulse area {} differs from π", p.pulse_area)));
    }
    if !(p.duration > 0.0) {
        return Err(Error::InvalidArgument("duration must be > 0".into()));
    }
    let (w0, w1) = p.couplings();
    let env = p.shape.envelope(p.pulse_area, p.duration);
    let mut schedule = ControlSchedule::new(lambda_controls())?;
    schedule.push_smooth(p.duration, move |t| coupling_coefficients(w0, w1, env(t)))?;
    let record = propagate(&schedule, substeps)?;
    let report = check_holonomic_conditions(&record, &lambda_p0())?;
    let full = record.final_propagator().clone();
    Ok(LambdaGate {
        gate: computational_block(&full),
        leakage: leakage_of(&full),
        predicted: n_dot_sigma(p.axis()),
        full,
        schedule,
        report,
    })
}

/// U(m)U(n) = n·m − iσ·(n×m) for two resonant loops, first along n then along m.
pub fn compose_lambda_gates(n: [f64; 3], m: [f64; 3]) -> ComplexOperator {
    let dot = n[0] * m[0] + n[1] * m[1] + n[2] * m[2];
    let cross = [n[1] * m[2] - n[2] * m[1], n[2] * m[0] - n[0] * m[2], n[0] * m[1] - n[1] * m[0]];
    identity(2) * c(dot, 0.0) - n_dot_sigma(cross) * I
}

/// Two equatorial loops at azimuths φ then φ′: diag(1, e^{2i(φ′−φ)}) up to a global phase.
pub fn lambda_phase_gate(phi: f64, phi_prime: f64) -> ComplexOperator {
    compose_lambda_gates(bloch(PI / 2.0, phi), bloch(PI / 2.0, phi_prime))
}

// ---------------------------------------------------------------------------
// Sørensen–Mølmer two-ion gate

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmParams {
    pub theta: f64,
    pub phi: f64,
    /// ∫(η²/δ)Ω′ dt
    pub area: f64,
    pub shape: PulseShape,
    pub duration: f64,
}

impl SmParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi, area: PI, shape: PulseShape::Square, duration: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SmGate {
    /// 9×9 propagator on the product of two three-level ions.
    pub full: ComplexOperator,
    /// Block on |00⟩, |01⟩, |10⟩, |11⟩.
    pub gate: ComplexOperator,
    pub predicted: ComplexOperator,
    /// ‖[H_e, H_a]‖_F
    pub commutator_norm: f64,
    /// ‖P(e^{−iaH_a} − I)P‖_F on the computational block.
    pub auxiliary_action: f64,
    pub leakage: f64,
    pub makhlin: (C64, f64),
    pub entangling: bool,
}

fn ion_index(a: usize, b: usize) -> usize {
    3 * a + b
}

const SM_COMPUTATIONAL: [usize; 4] = [0, 1, 3, 4];

/// (H_e, H_a) of the bichromatic two-ion scheme in units of η²Ω′/δ.
pub fn sm_hamiltonians(theta: f64, phi: f64) -> (ComplexOperator, ComplexOperator) {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let e = EXCITED;
    let mut he = zeros(9);
    he[(ion_index(e, e), ion_index(0, 0))] = cis(phi / 2.0) * s;
    he[(ion_index(e, e), ion_index(1, 1))] = -cis(-phi / 2.0) * co;
    let mut ha = zeros(9);
    ha[(ion_index(e, 0), ion_index(0, e))] = c(s, 0.0);
    ha[(ion_index(e, 1), ion_index(1, e))] = c(-co, 0.0);
    let he = &he + he.adjoint();
    let ha = &ha + ha.adjoint();
    (he, ha)
}

pub fn sm_predicted(theta: f64, phi: f64) -> ComplexOperator {
    let (s, co) = theta.sin_cos();
    let mut u = identity(4);
    u[(0, 0)] = c(co, 0.0);
    u[(0, 3)] = cis(-phi) * s;
    u[(3, 0)] = cis(phi) * s;
    u[(3, 3)] = c(-co, 0.0);
    u
}

/// Entangling two-qubit holonomic gate of two three-level ions driven by a bichromatic field.
pub fn sm_two_qubit_gate(p: &SmParams, substeps: usize) -> Result<SmGate> {
    let tol = ToleranceConfig::default();
    if (p.area - PI).abs() > tol.cyclicity {
        return Err(Error::Cyclicity(format!("effective pulse area {} differs from π", p.area)));
    }
    let (he, ha) = sm_hamiltonians(p.theta, p.phi);
    let commutator_norm = commutator(&he, &ha).norm();
    let env = p.shape.envelope(p.area, p.duration);
    let mut schedule = ControlSchedule::new(vec![&he + &ha])?;
    schedule.push_smooth(p.duration, move |t| vec![env(t)])?;
    let full = propagate_final(&schedule, substeps)?;
    let gate = sub_block(&full, &SM_COMPUTATIONAL, &SM_COMPUTATIONAL);
    let aux = herm_expm(&ha, p.area)?;
    let auxiliary_action = (sub_block(&aux, &SM_COMPUTATIONAL, &SM_COMPUTATIONAL) - identity(4)).norm();
    let outside: Vec<usize> = (0..9).filter(|k| !SM_COMPUTATIONAL.contains(k)).collect();
    let leakage = sub_block(&full, &outside, &SM_COMPUTATIONAL).norm_squared() / 4.0;
    let makhlin = makhlin_invariants(&gate)?;
    let entangling = is_entangling(&gate, 1e-8)?;
    Ok(SmGate { predicted: sm_predicted(p.theta, p.phi), full, gate, commutator_norm, auxiliary_action, leakage, makhlin, entangling })
}

// ---------------------------------------------------------------------------
// single-shot detuned gate

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleShotParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Peak Rabi frequency.
    pub omega: f64,
    pub shape: PulseShape,
    /// Reject anything but a square pulse.
    pub strict: bool,
}

impl SingleShotParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma, omega: 1.0, shape: PulseShape::Square, strict: true }
    }

    /// φ = π(1 + sinγ)
    pub fn rotation_angle(&self) -> f64 {
        PI * (1.0 + self.gamma.sin())
    }

    /// n = (sin2α cosβ, sin2α sinβ, cos2α)
    pub fn axis(&self) -> [f64; 3] {
        bloch(2.0 * self.alpha, self.beta)
    }

    /// Δ/Ω = −2 sinγ
    pub fn detuning_ratio(&self) -> f64 {
        -2.0 * self.gamma.sin()
    }

    /// (ω0, ω1) = (cosα cosγ, sinα cosγ e^{−iβ}); the bright state is cosα|0⟩ + e^{iβ}sinα|1⟩.
    pub fn couplings(&self) -> (C64, C64) {
        let g = self.gamma.cos();
        (c(self.alpha.cos() * g, 0.0), cis(-self.beta) * (self.alpha.sin() * g))
    }

    pub fn predicted(&self) -> ComplexOperator {
        su2_rotation(-self.rotation_angle() / 2.0, self.axis())
    }
}

/// One detuned pulse of area π producing e^{−i(φ/2)n·σ} up to a global phase.
pub fn single_shot_gate(p: &SingleShotParams, substeps: usize) -> Result<LambdaGate> {
    if p.strict && p.shape != PulseShape::Square {
        return Err(Error::PulseShape(format!("{} envelope rejected in strict mode", p.shape.name())));
    }
    if !(p.omega > 0.0) {
        return Err(Error::InvalidArgument("Rabi frequency must be > 0".into()));
    }
    let (w0, w1) = p.couplings();
    // the detuning follows the envelope so that Δ(t)/Ω(t) stays fixed
    let duration = PI / (p.omega * p.shape.mean());
    let env = p.shape.envelope(PI, duration);
    let ratio = p.detuning_ratio();
    let mut controls = lambda_controls();
    controls.push(outer_basis(3, EXCITED, EXCITED));
    let mut schedule = ControlSchedule::new(controls)?;
    schedule.push_smooth(duration, move |t| {
        let o = env(t);
        let mut v = coupling_coefficients(w0, w1, o);
        v.push(-ratio * o);
        v
    })?;
    let record = propagate(&schedule, substeps)?;
    let report = check_holonomic_conditions(&record, &lambda_p0())?;
    let full = record.final_propagator().clone();
    Ok(LambdaGate {
        gate: computational_block(&full),
        leakage: leakage_of(&full),
        predicted: p.predicted(),
        full,
        schedule,
        report,
    })
}

// ---------------------------------------------------------------------------
// multi-pulse chains

#[derive(Debug, Clone)]
pub struct MultiPulseSegment {
    /// Couplings (ω0, ω1) of H_j = Ω_j(t)(ω0|e⟩⟨0| + ω1|e⟩⟨1| + h.c.).
    pub couplings: (C64, C64),
    pub area: f64,
    pub shape: PulseShape,
    pub duration: f64,
    /// Change of basis V_j applied before the segment; must leave the current excited
    /// direction U|e⟩ fixed.
    pub frame: Option<ComplexOperator>,
}

impl MultiPulseSegment {
    pub fn new(w0: C64, w1: C64, area: f64) -> Self {
        Self { couplings: (w0, w1), area, shape: PulseShape::Square, duration: 1.0, frame: None }
    }
}

/// How the V_j of a multi-pulse chain act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameMode {
    /// V_j only relabels the basis in which later couplings are written: H_lab = W H W†, W = V_j⋯V_1.
    #[default]
    Bookkeeping,
    /// V_j is applied to the state as an instantaneous pulse.
    PhysicalPulse,
}

#[derive(Debug, Clone)]
pub struct MultiPulseGate {
    pub full: ComplexOperator,
    pub gate: ComplexOperator,
    /// Absent when physical frame pulses interrupt the evolution.
    pub report: Option<HolonomyReport>,
    /// max_j ‖P_V H_j P_V‖ over segments, P_V the evolving computational subspace.
    pub chain_residual: f64,
    pub leakage: f64,
}

/// Chains L pulse pairs U = U_L ⋯ U_1; each segment must act on the evolving computational
/// subspace only through its excited direction and the chain must return to it.
pub fn multi_pulse_gate(segments: &[MultiPulseSegment], substeps: usize) -> Result<MultiPulseGate> {
    multi_pulse_gate_with(segments, FrameMode::Bookkeeping, substeps)
}

pub fn multi_pulse_gate_with(segments: &[MultiPulseSegment], mode: FrameMode, substeps: usize) -> Result<MultiPulseGate> {
    if segments.is_empty() {
        return Err(Error::InvalidArgument("no segments".into()));
    }
    let tol = ToleranceConfig::default();
    let p0 = lambda_p0();
    let mut u = identity(3);
    let mut w = identity(3);
    let mut combined = ControlSchedule::full(3);
    let mut chain_residual = 0.0f64;
    let mut has_frames = false;
    for (j, seg) in segments.iter().enumerate() {
        if let Some(v) = &seg.frame {
            has_frames = true;
            if v.shape() != (3, 3) {
                return Err(Error::Frame(format!("segment {j}: frame change must be 3×3")));
            }
            check_unitary(v, tol.unitarity).map_err(|e| Error::Frame(format!("segment {j}: {e}")))?;
            let excited = &u * basis_ket(3, EXCITED);
            let moved = (v * &excited - &excited).norm();
            if moved > tol.holonomy {
                return Err(Error::Frame(format!("segment {j}: frame change moves the excited direction by {moved:.3e}")));
            }
            match mode {
                FrameMode::Bookkeeping => w = v * w,
                FrameMode::PhysicalPulse => u = v * u,
            }
        }
        let (w0, w1) = seg.couplings;
        let norm = (w0.norm_sqr() + w1.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument(format!("segment {j} has vanishing couplings")));
        }
        let h_unit = &w * lambda_hamiltonian(w0 / norm, w1 / norm, 1.0, 0.0) * w.adjoint();
        let pv = &u * &p0 * u.adjoint();
        let r = (&pv * &h_unit * &pv).norm();
        chain_residual = chain_residual.max(r);
        if r > tol.holonomy {
            return Err(Error::SegmentChain { index: j, detail: format!("segment couples the computational subspace to itself ({r:.3e})") });
        }
        let env = seg.shape.envelope(seg.area / norm, seg.duration);
        let controls: Vec<ComplexOperator> = lambda_controls().iter().map(|b| &w * b * w.adjoint()).collect();
        let mut s = ControlSchedule::new(controls)?;
        s.push_smooth(seg.duration, move |t| coupling_coefficients(w0, w1, env(t)))?;
        u = propagate_final(&s, substeps)? * u;
        let seg_schedule = s.clone();
        combined.push_hamiltonian(seg.duration, move |t| seg_schedule.segment_hamiltonian(0, t))?;
    }
    let cyc = (&u * &p0 * u.adjoint() - &p0).norm();
    if cyc > tol.cyclicity {
        return Err(Error::SegmentChain { index: segments.len(), detail: format!("chain does not return to the computational subspace ({cyc:.3e})") });
    }
    let report = if has_frames && mode == FrameMode::PhysicalPulse {
        None
    } else {
        let record = propagate(&combined, substeps)?;
        Some(check_holonomic_conditions(&record, &p0)?)
    };
    Ok(MultiPulseGate { gate: computational_block(&u), leakage: leakage_of(&u), full: u, report, chain_residual })
}

/// Two π/2 segments with relative phase η on the second: e^{−i(π−η)n·σ/2} up to a phase.
pub fn two_segment_chain(theta: f64, phi: f64, eta: f64) -> Vec<MultiPulseSegment> {
    let (w0, w1) = LambdaParams::new(theta, phi).couplings();
    let e = cis(eta);
    vec![MultiPulseSegment::new(w0, w1, PI / 2.0), MultiPulseSegment::new(w0 * e, w1 * e, PI / 2.0)]
}

pub fn two_segment_prediction(theta: f64, phi: f64, eta: f64) -> ComplexOperator {
    su2_rotation(-(PI - eta) / 2.0, bloch(theta, phi))
}
