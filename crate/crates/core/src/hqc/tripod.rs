use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{berry_phase_loop, wilczek_zee_holonomy, ParameterLoop};
use crate::qcore::*;

/// Tripod level indices.
pub const T0: usize = 0;
pub const T1: usize = 1;
pub const TA: usize = 2;
pub const TE: usize = 3;

/// Default number of loop samples for tripod holonomies.
pub const TRIPOD_SAMPLES: usize = 2000;

/// Closed path s ∈ [0,1] ↦ (θ, φ) on the control sphere.
#[derive(Clone)]
pub struct TripodPath {
    f: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl std::fmt::Debug for TripodPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (t0, p0) = self.at(0.0);
        write!(f, "TripodPath(start = ({t0:.3}, {p0:.3}))")
    }
}

impl TripodPath {
    pub fn new(f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    pub fn at(&self, s: f64) -> (f64, f64) {
        (self.f)(s)
    }

    /// Piecewise-linear loop through the vertices, closed back to the first one; each edge
    /// takes an equal share of s.
    pub fn polygon(vertices: &[(f64, f64)]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("a polygon needs at least two vertices".into()));
        }
        let v = vertices.to_vec();
        let n = v.len();
        Ok(Self::new(move |s| {
            let x = s.clamp(0.0, 1.0) * n as f64;
            let k = (x.floor() as usize).min(n - 1);
            let u = x - k as f64;
            let (a, b) = (v[k], v[(k + 1) % n]);
            (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
        }))
    }

    /// Pole → equator along φ = 0, a quarter of the equator, back to the pole.
    pub fn octant() -> Self {
        Self::polygon(&[(0.0, 0.0), (PI / 2.0, 0.0), (PI / 2.0, PI / 2.0), (0.0, PI / 2.0)]).unwrap()
    }

    /// Latitude circle θ = const, φ: 0 → 2π.
    pub fn latitude(theta: f64) -> Self {
        Self::new(move |s| (theta, 2.0 * PI * s))
    }

    /// ∮ g(θ) dφ by midpoint quadrature with wrapped φ increments.
    pub fn phi_integral(&self, g: impl Fn(f64) -> f64, steps: usize) -> f64 {
        let mut sum = 0.0;
        let mut prev = self.at(0.0);
        for k in 1..=steps {
            let cur = self.at(k as f64 / steps as f64);
            let dphi = wrap_angle(cur.1 - prev.1);
            let mid = self.at((k as f64 - 0.5) / steps as f64);
            sum += g(mid.0) * dphi;
            prev = cur;
        }
        sum
    }
}

fn tripod_hamiltonian(o0: C64, o1: C64, oa: C64) -> ComplexOperator {
    let mut h = zeros(4);
    h[(TE, T0)] = o0;
    h[(TE, T1)] = o1;
    h[(TE, TA)] = oa;
    &h + h.adjoint()
}

/// Couplings for the z-type loop: Ω0 = 0, Ω1 = −sin(θ/2)e^{iφ}, Ωa = cos(θ/2).
pub fn tripod_z_hamiltonian(theta: f64, phi: f64) -> ComplexOperator {
    tripod_hamiltonian(ZERO, -cis(phi) * (theta / 2.0).sin(), c((theta / 2.0).cos(), 0.0))
}

/// Couplings for the y-type loop: (Ω0, Ω1, Ωa) = (sinθcosφ, sinθsinφ, cosθ).
pub fn tripod_y_hamiltonian(theta: f64, phi: f64) -> ComplexOperator {
    tripod_hamiltonian(
        c(theta.sin() * phi.cos(), 0.0),
        c(theta.sin() * phi.sin(), 0.0),
        c(theta.cos(), 0.0),
    )
}

/// Effective two-ion Λ on {|11⟩, |aa⟩, |ee⟩}.
pub fn tripod_pair_hamiltonian(theta: f64, phi: f64) -> ComplexOperator {
    let mut h = zeros(3);
    h[(2, 0)] = -cis(phi) * (theta / 2.0).sin();
    h[(2, 1)] = c((theta / 2.0).cos(), 0.0);
    &h + h.adjoint()
}

#[derive(Debug, Clone)]
pub struct TripodHolonomy {
    /// Holonomy on span{|0⟩, |1⟩}; for loops starting away from the pole, in the basis of
    /// the projected start frame.
    pub holonomy: ComplexOperator,
    pub predicted: ComplexOperator,
    /// The loop integral defining the prediction.
    pub angle: f64,
    /// ‖U(N) − U(N/2)‖_F
    pub convergence: f64,
}

fn dark_holonomy<F>(h: F, path: &TripodPath, samples: usize) -> Result<(ComplexOperator, f64)>
where
    F: Fn(f64, f64) -> ComplexOperator + Send + Sync + Clone + 'static,
{
    let reference = {
        let mut r = ComplexOperator::zeros(4, 2);
        r[(T0, 0)] = ONE;
        r[(T1, 1)] = ONE;
        r
    };
    let build = |n: usize| -> Result<ComplexOperator> {
        let p = path.clone();
        let hh = h.clone();
        let lp = ParameterLoop::new(
            move |s| {
                let (t, f) = p.at(s);
                hh(t, f)
            },
            n,
        )?;
        // eigenvalues −1, 0, 0, +1: the dark pair is band 1
        wilczek_zee_holonomy(&lp, 1, 2, Some(&reference))
    };
    let u = build(samples)?;
    let coarse = build((samples / 2).max(2))?;
    let conv = (&u - coarse).norm();
    Ok((u, conv))
}

/// U_z = diag(1, e^{iφ1}) with φ1 = −∮sin²(θ/2)dφ, i.e. minus half the enclosed solid angle.
pub fn tripod_uz(path: &TripodPath, samples: usize) -> Result<TripodHolonomy> {
    let (holonomy, convergence) = dark_holonomy(tripod_z_hamiltonian, path, samples)?;
    let angle = -path.phi_integral(|t| (t / 2.0).sin().powi(2), 100_000);
    Ok(TripodHolonomy { holonomy, predicted: diag(&[ONE, cis(angle)]), angle, convergence })
}

/// U_y = e^{iχσ_y} with χ = ∮cosθ dφ; for pole-based loops χ = −Ω (enclosed solid angle).
pub fn tripod_uy(path: &TripodPath, samples: usize) -> Result<TripodHolonomy> {
    let (holonomy, convergence) = dark_holonomy(tripod_y_hamiltonian, path, samples)?;
    let angle = path.phi_integral(f64::cos, 100_000);
    Ok(TripodHolonomy { holonomy, predicted: su2_rotation(angle, [0.0, 1.0, 0.0]), angle, convergence })
}

#[derive(Debug, Clone)]
pub struct TripodConditional {
    /// diag(1, 1, 1, e^{iφ3}) on two qubits.
    pub gate: ComplexOperator,
    /// Berry phase of the two-ion dark state.
    pub phi3: f64,
    /// −∮sin²(θ/2)dφ
    pub predicted_phi3: f64,
}

pub fn tripod_conditional(path: &TripodPath, samples: usize) -> Result<TripodConditional> {
    let p = path.clone();
    let lp = ParameterLoop::new(
        move |s| {
            let (t, f) = p.at(s);
            tripod_pair_hamiltonian(t, f)
        },
        samples,
    )?;
    let phi3 = berry_phase_loop(&lp, 1)?;
    let predicted_phi3 = -path.phi_integral(|t| (t / 2.0).sin().powi(2), 100_000);
    Ok(TripodConditional { gate: diag(&[ONE, ONE, ONE, cis(phi3)]), phi3, predicted_phi3 })
}

#[derive(Debug, Clone)]
pub struct TripodGates {
    pub u_z: TripodHolonomy,
    pub u_y: TripodHolonomy,
    pub conditional: TripodConditional,
}

/// The universal tripod set for one loop: the two single-qubit holonomies and the
/// conditional two-ion phase.
pub fn tripod_gates(path: &TripodPath, samples: usize) -> Result<TripodGates> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!("tripod loops need ≥ 1000 samples, got {samples}")));
    }
    let (t0, _) = path.at(0.0);
    if t0.abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("tripod loops start at the pole θ = 0, got θ = {t0}")));
    }
    Ok(TripodGates { u_z: tripod_uz(path, samples)?, u_y: tripod_uy(path, samples)?, conditional: tripod_conditional(path, samples)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octant_y_loop_is_a_quarter_turn() {
        let h = tripod_uy(&TripodPath::octant(), TRIPOD_SAMPLES).unwrap();
        // −iσ_y, independently: |0⟩ → |1⟩, |1⟩ → −|0⟩
        let expected = from_real_rows(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((&h.holonomy - &expected).norm() < 1e-5);
        assert!((h.angle + PI / 2.0).abs() < 1e-9);
        // equal to e^{iπσ_y/2} up to a global phase
        assert!(phase_aligned_distance(&h.holonomy, &su2_rotation(PI / 2.0, [0.0, 1.0, 0.0])) < 1e-5);
    }

    #[test]
    fn octant_z_loop_phase() {
        let h = tripod_uz(&TripodPath::octant(), TRIPOD_SAMPLES).unwrap();
        assert!((h.angle + PI / 4.0).abs() < 1e-9);
        assert!((&h.holonomy - &h.predicted).norm() < 1e-5);
        assert!(h.convergence < 1e-4);
    }

    #[test]
    fn conditional_phase_matches_dark_state_berry_phase() {
        let path = TripodPath::latitude(PI / 3.0);
        let g = tripod_conditional(&path, TRIPOD_SAMPLES).unwrap();
        // −2π sin²(π/6) = −π/2
        assert!((g.predicted_phi3 + PI / 2.0).abs() < 1e-9);
        assert!(angle_distance(g.phi3, g.predicted_phi3) < 1e-5);
    }

    #[test]
    fn bundle_requires_dense_sampling() {
        assert!(tripod_gates(&TripodPath::octant(), 100).is_err());
        let g = tripod_gates(&TripodPath::octant(), 1000).unwrap();
        assert!(unitarity_residual(&g.u_y.holonomy) < 1e-12);
    }
}
