use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::*;

/// Exact record of H(t) = e^{−iωtG} h0 e^{iωtG}: U(t) = e^{−iωtG} e^{−i(h0 − ωG)t}.
pub fn rotating_record(h0: &ComplexOperator, generator: &ComplexOperator, omega: f64, total_time: f64, steps: usize) -> Result<EvolutionRecord> {
    let tol = ToleranceConfig::default().hermiticity;
    check_hermitian(h0, tol)?;
    check_hermitian(generator, tol)?;
    if h0.shape() != generator.shape() {
        return Err(Error::Dimension("h0 and generator differ in shape".into()));
    }
    if steps == 0 || !(total_time > 0.0) {
        return Err(Error::InvalidArgument("need steps ≥ 1 and a positive duration".into()));
    }
    let (gv, gw) = herm_eigen(generator);
    let rot_frame = h0 - generator * c(omega, 0.0);
    let (rv, rw) = herm_eigen(&rot_frame);
    let frame = |t: f64| herm_apply(&gv, &gw, |l| cis(-omega * t * l));
    let u = |t: f64| frame(t) * herm_apply(&rv, &rw, |l| cis(-l * t));
    let h = |t: f64| {
        let f = frame(t);
        &f * h0 * f.adjoint()
    };
    Ok(EvolutionRecord::from_fn(total_time, steps, u, h))
}

fn spin_state(theta: f64) -> Ket {
    ket(&[c((theta / 2.0).cos(), 0.0), c((theta / 2.0).sin(), 0.0)])
}

/// Cyclic (Aharonov–Anandan) evolution of a spin in the precessing field.
#[derive(Debug, Clone)]
pub struct AharonovAnandan {
    /// nutation angle of the rotating-frame Hamiltonian H0 − ωσz/2
    pub theta_bar: f64,
    pub eta_plus: Ket,
    pub eta_minus: Ket,
    /// predicted (γ+, γ−) for one period
    pub geometric: (f64, f64),
    pub record: EvolutionRecord,
}

pub fn aharonov_anandan_spin(mu_b0: f64, theta: f64, omega: f64, steps: usize) -> Result<AharonovAnandan> {
    if !(mu_b0 > 0.0) || omega == 0.0 {
        return Err(Error::InvalidArgument("need μB0 > 0 and ω ≠ 0".into()));
    }
    let h0 = n_dot_sigma([mu_b0 * theta.sin(), 0.0, mu_b0 * theta.cos()]);
    let theta_bar = f64::atan2(2.0 * mu_b0 * theta.sin(), 2.0 * mu_b0 * theta.cos() - omega);
    let period = 2.0 * PI / omega.abs();
    let record = rotating_record(&h0, &(pauli_z() * c(0.5, 0.0)), omega, period, steps)?;
    let eta_plus = spin_state(theta_bar);
    let eta_minus = ket(&[c((theta_bar / 2.0).sin(), 0.0), c(-(theta_bar / 2.0).cos(), 0.0)]);
    let s = omega.signum();
    let cb = theta_bar.cos();
    Ok(AharonovAnandan {
        theta_bar,
        eta_plus,
        eta_minus,
        geometric: (-s * PI * (1.0 - cb), -s * PI * (1.0 + cb)),
        record,
    })
}

/// Drive frequency at which the compensated resonance evolution carries no dynamical phase.
pub fn dynamical_free_frequency(omega0: f64, omega1: f64) -> Result<f64> {
    if omega0 == 0.0 {
        return Err(Error::Division("ω0 = 0 has no dynamical-phase-free drive frequency".into()));
    }
    Ok(-(omega0 * omega0 + omega1 * omega1) / omega0)
}

/// Resonance evolution with the extra field ωσz/2, started in the eigenstate (tanθ = ω1/ω0)
/// of the rotating-frame Hamiltonian (ω0σz + ω1σx)/2 and run for one period 2π/|ω|.
#[derive(Debug, Clone)]
pub struct NmrCyclic {
    pub theta: f64,
    pub psi0: Ket,
    pub record: EvolutionRecord,
    /// predicted (dynamical, geometric); the geometric sign follows the sense of ω
    pub predicted: (f64, f64),
}

pub fn nmr_compensated_cycle(omega0: f64, omega1: f64, omega: f64, steps: usize) -> Result<NmrCyclic> {
    if omega == 0.0 {
        return Err(Error::InvalidArgument("ω must be nonzero".into()));
    }
    let theta = f64::atan2(omega1, omega0);
    let h0 = n_dot_sigma([0.5 * omega1, 0.0, 0.5 * (omega0 + omega)]);
    let period = 2.0 * PI / omega.abs();
    let record = rotating_record(&h0, &(pauli_z() * c(0.5, 0.0)), omega, period, steps)?;
    let energy = 0.5 * (omega0 * omega0 + omega1 * omega1).sqrt();
    let dynamical = -period * (energy + 0.5 * omega * theta.cos());
    let geometric = -omega.signum() * PI * (1.0 - theta.cos());
    Ok(NmrCyclic { theta, psi0: spin_state(theta), record, predicted: (dynamical, geometric) })
}

/// Two-spin resonance parameters: target Larmor frequency ω0, drive amplitude ω1, drive frequency ω,
/// drive phase φ and Ising coupling J.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmrParams {
    pub omega0: f64,
    pub omega1: f64,
    pub omega: f64,
    pub phi: f64,
    pub coupling_j: f64,
}

impl NmrParams {
    /// δ± = ω0 − ω ± J
    pub fn detunings(&self) -> (f64, f64) {
        let d = self.omega0 - self.omega;
        (d + self.coupling_j, d - self.coupling_j)
    }

    /// Lab-frame target Hamiltonian for control state k ∈ {0, 1}.
    pub fn target_hamiltonian(&self, control: usize, t: f64) -> ComplexOperator {
        let sign = if control == 0 { 1.0 } else { -1.0 };
        let a = self.omega * t + self.phi;
        n_dot_sigma([
            0.5 * self.omega1 * a.cos(),
            0.5 * self.omega1 * a.sin(),
            0.5 * (self.omega0 + sign * self.coupling_j),
        ])
    }
}

/// Preparation sequence for the conditional nonadiabatic gate.
#[derive(Debug, Clone)]
pub struct SSequence {
    pub phi_prime: f64,
    pub t_c: f64,
    /// target polar angles for control |0⟩ and |1⟩
    pub theta: (f64, f64),
    /// target-qubit unitaries conditioned on the control state
    pub u_plus: ComplexOperator,
    pub u_minus: ComplexOperator,
    /// U+ ⊗ |0⟩⟨0| + U− ⊗ |1⟩⟨1| (target first)
    pub conditional: ComplexOperator,
}

pub fn s_sequence(params: NmrParams) -> Result<SSequence> {
    if !(params.omega1 >= 0.0) {
        return Err(Error::InvalidArgument("ω1 must be non-negative".into()));
    }
    let (dp, dm) = params.detunings();
    s_sequence_from_detunings(dp, dm, params.omega1)
}

/// [π/2]^y, free evolution δ±σz/2 for t_c, refocusing [−δ̄t_c]^z with δ̄ = (δ+ + δ−)/2,
/// [π/2]^x and [−φ′]^y, chosen so that |0⟩ lands on the + eigenstate of (δ±σz + ω1σx)/2
/// for both control states.
pub fn s_sequence_from_detunings(delta_plus: f64, delta_minus: f64, omega1: f64) -> Result<SSequence> {
    if omega1 == 0.0 && (delta_plus == 0.0 || delta_minus == 0.0) {
        return Err(Error::NoSolution("eigenbasis undefined at δ = ω1 = 0".into()));
    }
    if !(omega1 >= 0.0) {
        return Err(Error::NoSolution(format!("ω1 = {omega1} must be non-negative")));
    }
    let j = 0.5 * (delta_plus - delta_minus);
    let a_plus = f64::atan2(delta_plus, omega1);
    let a_minus = f64::atan2(delta_minus, omega1);
    let phi_prime = 0.5 * (a_plus + a_minus);
    let jt = 0.5 * (a_plus - a_minus);
    let t_c = if jt.abs() < 1e-15 {
        0.0
    } else if j == 0.0 {
        return Err(Error::NoSolution("control states need distinct angles but J = 0".into()));
    } else {
        jt / j
    };
    if t_c < 0.0 {
        return Err(Error::NoSolution(format!("negative free-evolution time {t_c}")));
    }
    let mean = 0.5 * (delta_plus + delta_minus);
    let build = |d: f64| ry(-phi_prime) * rx(PI / 2.0) * rz(-mean * t_c) * rz(d * t_c) * ry(PI / 2.0);
    let u_plus = build(delta_plus);
    let u_minus = build(delta_minus);
    let p0 = outer_basis(2, 0, 0);
    let p1 = outer_basis(2, 1, 1);
    let conditional = kron(&u_plus, &p0) + kron(&u_minus, &p1);
    Ok(SSequence {
        phi_prime,
        t_c,
        theta: (PI / 2.0 - jt - phi_prime, PI / 2.0 + jt - phi_prime),
        u_plus,
        u_minus,
        conditional,
    })
}

impl SSequence {
    /// The same five steps with finite square pulses of Rabi rate `rabi` for control state k,
    /// for robustness studies. Each rotation by β takes |β|/rabi.
    pub fn finite_duration(&self, delta: f64, rabi: f64, mean_detuning: f64) -> Result<Sequence> {
        if !(rabi > 0.0) {
            return Err(Error::InvalidArgument("Rabi rate must be positive".into()));
        }
        let pulse = |beta: f64, axis: usize| -> Result<Option<ControlSchedule>> {
            if beta == 0.0 {
                return Ok(None);
            }
            let mut sch = ControlSchedule::new(vec![pauli_x(), pauli_y(), pauli_z()])?;
            let mut coeff = vec![0.0; 3];
            coeff[axis] = 0.5 * rabi * beta.signum();
            sch.push_constant(beta.abs() / rabi, coeff)?;
            Ok(Some(sch))
        };
        let mut seq = Sequence::new();
        let mut add = |s: Option<ControlSchedule>| {
            if let Some(s) = s {
                seq.steps.push(SequenceStep::Evolve(s));
            }
        };
        add(pulse(PI / 2.0, 1)?);
        if self.t_c > 0.0 {
            let mut free = ControlSchedule::new(vec![pauli_z()])?;
            free.push_constant(self.t_c, vec![0.5 * delta])?;
            add(Some(free));
        }
        add(pulse(-mean_detuning * self.t_c, 2)?);
        add(pulse(PI / 2.0, 0)?);
        add(pulse(-self.phi_prime, 1)?);
        Ok(seq)
    }
}

/// Parameters of the two-loop dynamical-phase-free construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLoopParams {
    pub omega0: f64,
    pub omega1: f64,
    pub omega0p: f64,
    pub omega1p: f64,
    pub omega: f64,
}

impl TwoLoopParams {
    /// Nutation angles (α, α′).
    pub fn angles(&self) -> (f64, f64) {
        (
            f64::atan2(self.omega1, self.omega0 - self.omega),
            f64::atan2(self.omega1p, self.omega0p + self.omega),
        )
    }

    /// (dynamical mismatch, cosα − cosα′): the reference pair of constraint expressions.
    /// The second one does not equal the geometric phase sum of the field below; see
    /// [`TwoLoopParams::geometric_constraint`].
    pub fn constraint_values(&self) -> (f64, f64) {
        let TwoLoopParams { omega0: a, omega1: b, omega0p: ap, omega1p: bp, omega: w } = *self;
        let r = ((a - w).powi(2) + b * b).sqrt();
        let rp = ((ap + w).powi(2) + bp * bp).sqrt();
        let dyn_mismatch = (a * a + b * b - a * w) / r - (ap * ap + bp * bp + ap * w) / rp;
        (dyn_mismatch, (a - w) / r - (ap + w) / rp)
    }

    /// cosα + cosα′, which equals (γ1^g + γ2^g)/π mod 2 for the loops built here.
    pub fn geometric_constraint(&self) -> f64 {
        let (a, ap) = self.angles();
        a.cos() + ap.cos()
    }
}

#[derive(Debug, Clone)]
pub struct TwoLoop {
    pub params: TwoLoopParams,
    pub psi0: Ket,
    pub loop1: EvolutionRecord,
    pub loop2: EvolutionRecord,
    /// predicted (γ1^d + γ2^d, γ1^g + γ2^g)
    pub predicted: (f64, f64),
    /// U(2τ), which is diag(e^{iΓπ}, e^{−iΓπ}) in the (ψ0, ψ0⊥) basis up to global phase
    pub gate: ComplexOperator,
}

/// Damped Newton solve for (ω0′, ω1′) with ω0, ω1, ω fixed so that the dynamical phases of the two
/// loops cancel and the geometric phases add up to Γπ (mod 2π), then the exact records of both loops.
pub fn two_loop_schedule(omega0: f64, omega1: f64, omega: f64, gamma_target: f64, steps: usize) -> Result<TwoLoop> {
    let params = solve_two_loop(omega0, omega1, omega, gamma_target)?;
    two_loop_records(params, steps)
}

pub fn solve_two_loop(omega0: f64, omega1: f64, omega: f64, gamma_target: f64) -> Result<TwoLoopParams> {
    solve_two_loop_from(omega0, omega1, omega, gamma_target, None)
}

/// As [`solve_two_loop`], optionally starting Newton from a user guess for (ω0′, ω1′) before the
/// built-in starts.
pub fn solve_two_loop_from(omega0: f64, omega1: f64, omega: f64, gamma_target: f64, guess: Option<(f64, f64)>) -> Result<TwoLoopParams> {
    if omega <= 0.0 {
        return Err(Error::Constraint("drive frequency must be positive".into()));
    }
    let residual = |x: [f64; 2]| {
        let p = TwoLoopParams { omega0, omega1, omega0p: x[0], omega1p: x[1], omega };
        let f = p.constraint_values().0;
        let g = p.geometric_constraint() - gamma_target;
        // both loops together contribute −2π + π(cosα + cosα′)
        [f, g - 2.0 * (g / 2.0).round()]
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut best: Option<(f64, [f64; 2])> = None;
    let mut starts: Vec<[f64; 2]> = guess.map(|g| vec![[g.0, g.1]]).unwrap_or_default();
    // mirrored loop and scaled variants
    for (s0, s1) in [(1.0, 1.0), (0.5, 1.0), (2.0, 1.0), (1.0, 0.5), (1.0, 2.0), (0.3, 3.0), (3.0, 0.3), (-1.0, 1.0), (-0.5, 1.0), (-2.0, 1.0), (-1.0, 2.0)] {
        starts.push([s0 * omega0.abs().max(1e-3), s1 * omega1.abs().max(1e-3)]);
    }
    for start in starts {
        let mut x = start;
        let mut r = residual(x);
        for _ in 0..200 {
            if norm(r) < 1e-12 {
                break;
            }
            let h = 1e-7 * (1.0 + x[0].abs() + x[1].abs());
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let (rp, rm) = (residual(xp), residual(xm));
                for i in 0..2 {
                    jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = [
                (jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
                (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
            ];
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-8 {
                let trial = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
                let rt = residual(trial);
                if trial[1] > 0.0 && rt.iter().all(|v| v.is_finite()) && norm(rt) < norm(r) {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.map_or(true, |b| norm(r) < b.0) {
            best = Some((norm(r), x));
        }
        if norm(r) <= 1e-12 {
            break;
        }
    }
    match best {
        Some((res, x)) if res <= 1e-10 => Ok(TwoLoopParams { omega0, omega1, omega0p: x[0], omega1p: x[1], omega }),
        Some((res, _)) => Err(Error::Constraint(format!("Newton solve stalled with residual {res:.3e}"))),
        None => Err(Error::Constraint("no Newton start".into())),
    }
}

/// Exact records of both loops. Loop 2 is the field (ω1′cosωt, ω1′sinωt, −ω0′) rotated about y
/// by α + α′; the state starts as the + eigenstate of the first rotating-frame Hamiltonian.
pub fn two_loop_records(params: TwoLoopParams, steps: usize) -> Result<TwoLoop> {
    let (a, ap) = params.angles();
    let tau = 2.0 * PI / params.omega;
    let g = pauli_z() * c(0.5, 0.0);
    let h1 = n_dot_sigma([0.5 * params.omega1, 0.0, 0.5 * params.omega0]);
    let loop1 = rotating_record(&h1, &g, params.omega, tau, steps)?;
    let h2 = n_dot_sigma([0.5 * params.omega1p, 0.0, -0.5 * params.omega0p]);
    let inner = rotating_record(&h2, &g, params.omega, tau, steps)?;
    let tilt = ry(a + ap);
    let loop2 = EvolutionRecord {
        grid: inner.grid.iter().map(|t| t + tau).collect(),
        propagators: inner.propagators.iter().map(|u| &tilt * u * tilt.adjoint()).collect(),
        hamiltonians: inner.hamiltonians.iter().map(|h| &tilt * h * tilt.adjoint()).collect(),
        step_hamiltonians: None,
        initial_states: Vec::new(),
    };
    let psi0 = spin_state(a);
    let r = ((params.omega0 - params.omega).powi(2) + params.omega1.powi(2)).sqrt();
    let rp = ((params.omega0p + params.omega).powi(2) + params.omega1p.powi(2)).sqrt();
    let d1 = -(PI / params.omega) * (params.omega0.powi(2) + params.omega1.powi(2) - params.omega0 * params.omega) / r;
    let d2 = (PI / params.omega) * (params.omega0p.powi(2) + params.omega1p.powi(2) + params.omega0p * params.omega) / rp;
    let g1 = -PI * (1.0 - a.cos());
    let g2 = -PI * (1.0 - ap.cos());
    let gate = loop2.final_propagator() * loop1.final_propagator();
    Ok(TwoLoop { params, psi0, loop1, loop2, predicted: (d1 + d2, g1 + g2), gate })
}

#[derive(Debug, Clone)]
pub struct OrangeSlice {
    pub schedule: ControlSchedule,
    pub unitary: ComplexOperator,
    /// e^{iγ n·σ}
    pub predicted: ComplexOperator,
    pub dark: Ket,
    pub bright: Ket,
}

/// Three resonant pulses of areas θ/2, π/2 and (π−θ)/2 about in-plane axes at azimuths φ−π/2,
/// γ+φ+π/2 and φ−π/2; each segment lasts `segment_time`.
pub fn orange_slice_gate(gamma: f64, theta: f64, phi: f64, shape: PulseShape, segment_time: f64, substeps: usize) -> Result<OrangeSlice> {
    if !(segment_time > 0.0) || !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidArgument("need segment_time > 0 and θ ∈ [0, π]".into()));
    }
    let mut schedule = ControlSchedule::new(vec![pauli_x(), pauli_y()])?;
    let plan = [
        (theta / 2.0, phi - PI / 2.0),
        (PI / 2.0, gamma + phi + PI / 2.0),
        ((PI - theta) / 2.0, phi - PI / 2.0),
    ];
    for (area, azimuth) in plan {
        if area <= 0.0 {
            continue;
        }
        let env = shape.envelope(area, segment_time);
        let (s, c_) = azimuth.sin_cos();
        schedule.push_smooth(segment_time, move |t| {
            let h = env(t);
            vec![h * c_, h * s]
        })?;
    }
    let unitary = propagate_final(&schedule, substeps)?;
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let predicted = su2_rotation(gamma, n);
    let dark = ket(&[c((theta / 2.0).cos(), 0.0), cis(phi) * (theta / 2.0).sin()]);
    let bright = ket(&[c((theta / 2.0).sin(), 0.0), -cis(phi) * (theta / 2.0).cos()]);
    Ok(OrangeSlice { schedule, unitary, predicted, dark, bright })
}

/// Phase gate from two resonant π pulses with phases ±φ0: diag(e^{2iφ0}, e^{−2iφ0}) up to a global sign.
pub fn resonant_phase_gate(phi0: f64) -> ComplexOperator {
    let pulse = |p: f64| rotation(PI, [p.cos(), p.sin(), 0.0]);
    pulse(-phi0) * pulse(phi0)
}

/// e^{iγ}|η+⟩⟨η+| + e^{−iγ}|η−⟩⟨η−| with η+ = (cos χ/2, sin χ/2).
pub fn uchi_gate(gamma: f64, chi: f64) -> ComplexOperator {
    let (c2, s2) = ((chi / 2.0).cos().powi(2), (chi / 2.0).sin().powi(2));
    let (e, f) = (cis(gamma), cis(-gamma));
    let off = I * (chi.sin() * gamma.sin());
    from_rows(2, &[e * c2 + f * s2, off, off, e * s2 + f * c2])
}

/// sinγ·sinγ′·sin(χ−χ′), which vanishes exactly when the two gates commute.
pub fn uchi_noncommutation(gamma: f64, chi: f64, gamma_p: f64, chi_p: f64) -> f64 {
    gamma.sin() * gamma_p.sin() * (chi - chi_p).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::decompose_phase;

    #[test]
    fn aa_phase_matches_cone_angle() {
        let aa = aharonov_anandan_spin(1.0, 0.7, 0.9, 400).unwrap();
        let d = decompose_phase(&aa.record, &aa.eta_plus).unwrap();
        assert!(d.cyclicity_residual < 1e-12);
        assert!(angle_distance(d.geometric, aa.geometric.0) < 1e-10);
        let d = decompose_phase(&aa.record, &aa.eta_minus).unwrap();
        assert!(angle_distance(d.geometric, aa.geometric.1) < 1e-10);
    }

    #[test]
    fn compensated_cycle_is_dynamical_free() {
        let (w0, w1) = (1.2, 0.7);
        let w = dynamical_free_frequency(w0, w1).unwrap();
        let cyc = nmr_compensated_cycle(w0, w1, w, 200).unwrap();
        let d = decompose_phase(&cyc.record, &cyc.psi0).unwrap();
        assert!(d.cyclicity_residual < 1e-12);
        assert!(d.dynamical.abs() < 1e-10);
        assert!(cyc.predicted.0.abs() < 1e-12);
        assert!(angle_distance(d.geometric, cyc.predicted.1) < 1e-10);
        assert!(matches!(dynamical_free_frequency(0.0, 1.0), Err(Error::Division(_))));
    }

    #[test]
    fn dynamical_free_examples_pointwise() {
        for ((w0, w1), expect) in [((1.0, 0.0), -1.0), ((1.0, 1.0), -2.0), ((2.0, 1.0), -2.5)] {
            let w = dynamical_free_frequency(w0, w1).unwrap();
            assert!((w - expect).abs() < 1e-15);
            let cyc = nmr_compensated_cycle(w0, w1, w, 500).unwrap();
            for (u, h) in cyc.record.propagators.iter().zip(&cyc.record.hamiltonians) {
                let psi = u * &cyc.psi0;
                assert!(psi.dotc(&(h * &psi)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn compensated_cycle_general_frequency() {
        let cyc = nmr_compensated_cycle(1.0, 0.5, 2.3, 300).unwrap();
        let d = decompose_phase(&cyc.record, &cyc.psi0).unwrap();
        assert!((d.dynamical - cyc.predicted.0).abs() < 1e-10);
        assert!(angle_distance(d.geometric, cyc.predicted.1) < 1e-10);
    }

    #[test]
    fn s_sequence_prepares_eigenstates() {
        let (dp, dm, w1) = (1.4, 0.6, 0.9);
        let s = s_sequence_from_detunings(dp, dm, w1).unwrap();
        for (u, d) in [(&s.u_plus, dp), (&s.u_minus, dm)] {
            let psi = u * basis_ket(2, 0);
            let h = n_dot_sigma([0.5 * w1, 0.0, 0.5 * d]);
            let e = expectation(&psi, &h).unwrap().re;
            assert!((e - 0.5 * (d * d + w1 * w1).sqrt()).abs() < 1e-12);
        }
        let z = |u: &ComplexOperator| expectation(&(u * basis_ket(2, 0)), &pauli_z()).unwrap().re;
        assert!((z(&s.u_plus) - s.theta.0.cos()).abs() < 1e-12);
        assert!((z(&s.u_minus) - s.theta.1.cos()).abs() < 1e-12);
        assert!(s.t_c > 0.0);
        assert!(unitarity_residual(&s.conditional) < 1e-13);
    }

    #[test]
    fn s_sequence_trivial_cases() {
        let s = s_sequence_from_detunings(1.0, 1.0, 1.0).unwrap();
        assert!((s.phi_prime - PI / 4.0).abs() < 1e-15 && s.t_c == 0.0);
        let p = NmrParams { omega0: 2.0, omega1: 0.7, omega: 1.6, phi: 0.0, coupling_j: 0.0 };
        let s = s_sequence(p).unwrap();
        assert!((s.theta.0 - s.theta.1).abs() < 1e-15);
        assert!(matches!(s_sequence_from_detunings(0.0, 0.5, 0.0), Err(Error::NoSolution(_))));
    }

    #[test]
    fn s_sequence_finite_pulses_match_ideal() {
        let (dp, dm, w1) = (1.4, 0.6, 0.9);
        let s = s_sequence_from_detunings(dp, dm, w1).unwrap();
        let seq = s.finite_duration(dp, 50.0, 1.0, ).unwrap();
        let u = seq.unitary(8).unwrap();
        assert!(phase_aligned_distance(&u, &s.u_plus) < 1e-12);
    }

    #[test]
    fn s_sequence_with_product_constraint_is_dynamical_free() {
        // ω1² = δ+δ− and ω = −(δ+ + δ−)
        let (dp, dm) = (1.5, 0.6);
        let w1 = (dp * dm as f64).sqrt();
        let w = -(dp + dm);
        let j = 0.5 * (dp - dm);
        let p = NmrParams { omega0: w + 0.5 * (dp + dm), omega1: w1, omega: w, phi: 0.0, coupling_j: j };
        let s = s_sequence(p).unwrap();
        for (k, (u, d, th)) in [(&s.u_plus, dp, s.theta.0), (&s.u_minus, dm, s.theta.1)].into_iter().enumerate() {
            assert!((th.cos() + (d * d + w1 * w1).sqrt() / w).abs() < 1e-12);
            let psi0 = u * basis_ket(2, 0);
            let rec = rotating_record(&p.target_hamiltonian(k, 0.0), &(pauli_z() * c(0.5, 0.0)), w, 2.0 * PI / w.abs(), 400).unwrap();
            for (v, h) in rec.propagators.iter().zip(&rec.hamiltonians) {
                let psi = v * &psi0;
                assert!(psi.dotc(&(h * &psi)).norm() < 1e-8);
            }
            let d = decompose_phase(&rec, &psi0).unwrap();
            assert!(d.cyclicity_residual < 1e-12 && d.dynamical.abs() < 1e-8);
        }
    }

    #[test]
    fn two_loop_cancels_dynamical_phase() {
        let tl = two_loop_schedule(1.0, 0.6, 0.4, 0.5, 400).unwrap();
        let f = tl.params.constraint_values().0;
        assert!(f.abs() < 1e-10);
        assert!(angle_distance(tl.predicted.1, 0.5 * PI) < 1e-9);
        let d1 = decompose_phase(&tl.loop1, &tl.psi0).unwrap();
        let d2 = decompose_phase(&tl.loop2, &tl.psi0).unwrap();
        assert!(d1.cyclicity_residual < 1e-12 && d2.cyclicity_residual < 1e-12);
        assert!((d1.dynamical + d2.dynamical).abs() < 1e-8);
        assert!((d1.dynamical + d2.dynamical - tl.predicted.0).abs() < 1e-8);
        assert!(angle_distance(d1.geometric + d2.geometric, tl.predicted.1) < 1e-8);
        let perp = ket(&[-tl.psi0[1].conj(), tl.psi0[0].conj()]);
        let b = ComplexOperator::from_columns(&[tl.psi0.clone(), perp]);
        let target = diag(&[cis(0.5 * PI), cis(-0.5 * PI)]);
        assert!(phase_aligned_distance(&(b.adjoint() * &tl.gate * &b), &target) < 1e-8);
    }

    #[test]
    fn two_loop_zero_target_is_identity() {
        let tl = two_loop_schedule(1.0, 0.6, 0.4, 0.0, 200).unwrap();
        assert!(phase_aligned_distance(&tl.gate, &identity(2)) < 1e-8);
        let guess = solve_two_loop_from(1.0, 0.6, 0.4, 0.0, Some((tl.params.omega0p, tl.params.omega1p))).unwrap();
        assert!((guess.omega0p - tl.params.omega0p).abs() < 1e-9);
    }

    #[test]
    fn orange_slice_examples() {
        let g = orange_slice_gate(PI / 2.0, PI / 2.0, 0.0, PulseShape::Square, 1.0, 64).unwrap();
        assert!(phase_aligned_distance(&g.unitary, &(pauli_x() * I)) < 1e-10);
        let g = orange_slice_gate(0.8, 0.0, 0.3, PulseShape::SinSquared, 1.0, 400).unwrap();
        assert!(phase_aligned_distance(&g.unitary, &diag(&[cis(0.8), cis(-0.8)])) < 1e-8);
    }

    #[test]
    fn orange_slice_dark_state_has_no_energy() {
        let g = orange_slice_gate(0.6, 1.1, 0.4, PulseShape::SinSquared, 2.0, 200).unwrap();
        let rec = propagate(&g.schedule, 200).unwrap();
        for psi0 in [&g.dark, &g.bright] {
            for (u, h) in rec.propagators.iter().zip(&rec.hamiltonians) {
                let psi = u * psi0;
                assert!(psi.dotc(&(h * &psi)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn resonant_pulses_give_phase_gate() {
        let u = resonant_phase_gate(0.35);
        assert!(phase_aligned_distance(&u, &diag(&[cis(0.7), cis(-0.7)])) < 1e-14);
    }

    #[test]
    fn uchi_matches_spectral_form() {
        let (g, chi): (f64, f64) = (0.7, 1.9);
        let p = ket(&[c((chi / 2.0).cos(), 0.0), c((chi / 2.0).sin(), 0.0)]);
        let m = ket(&[c((chi / 2.0).sin(), 0.0), c(-(chi / 2.0).cos(), 0.0)]);
        let oracle = outer(&p, &p) * cis(g) + outer(&m, &m) * cis(-g);
        assert!((uchi_gate(g, chi) - oracle).norm() < 1e-14);
        let a = uchi_gate(0.7, 0.3);
        let b = uchi_gate(1.1, 1.3);
        assert!(commutator(&a, &b).norm() > 1e-3 && uchi_noncommutation(0.7, 0.3, 1.1, 1.3).abs() > 1e-3);
        let b = uchi_gate(1.1, 0.3);
        assert!(commutator(&a, &b).norm() < 1e-14 && uchi_noncommutation(0.7, 0.3, 1.1, 0.3) == 0.0);
    }
}
