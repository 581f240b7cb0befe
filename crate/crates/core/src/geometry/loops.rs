use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::*;

pub type Sampler = Arc<dyn Fn(f64) -> ComplexOperator + Send + Sync>;

/// Closed path s ∈ [0,1] ↦ H(R(s)), sampled at `samples` points s_j = j/samples.
#[derive(Clone)]
pub struct ParameterLoop {
    sampler: Sampler,
    pub samples: usize,
    pub closed: bool,
    pub closure_residual: f64,
}

impl std::fmt::Debug for ParameterLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParameterLoop")
            .field("samples", &self.samples)
            .field("closed", &self.closed)
            .field("closure_residual", &self.closure_residual)
            .finish()
    }
}

impl ParameterLoop {
    pub fn new<F>(sampler: F, samples: usize) -> Result<Self>
    where
        F: Fn(f64) -> ComplexOperator + Send + Sync + 'static,
    {
        if samples < 2 {
            return Err(Error::InvalidArgument("a loop needs at least 2 samples".into()));
        }
        let h0 = sampler(0.0);
        let h1 = sampler(1.0);
        let tol = ToleranceConfig::default().hermiticity;
        check_hermitian(&h0, tol)?;
        if h0.shape() != h1.shape() {
            return Err(Error::Dimension("sampler changes dimension along the loop".into()));
        }
        let closure_residual = (&h1 - &h0).norm();
        Ok(Self { sampler: Arc::new(sampler), samples, closed: closure_residual < 1e-10, closure_residual })
    }

    pub fn hamiltonian(&self, s: f64) -> ComplexOperator {
        (self.sampler)(s)
    }

    pub fn with_samples(&self, samples: usize) -> Self {
        Self { samples, ..self.clone() }
    }

    fn require_closed(&self) -> Result<()> {
        if !self.closed {
            return Err(Error::NotCyclic { residual: self.closure_residual, tolerance: 1e-10 });
        }
        Ok(())
    }

    /// Orthonormal basis (n×L) of the `degeneracy` eigenvectors starting at ascending index `band`,
    /// for every sample, after checking that the band is isolated and flat.
    pub fn band_frames(&self, band: usize, degeneracy: usize, tol: &ToleranceConfig) -> Result<Vec<ComplexOperator>> {
        let n = self.hamiltonian(0.0).nrows();
        if degeneracy == 0 || band + degeneracy > n {
            return Err(Error::InvalidArgument(format!("band {band}..{} outside dimension {n}", band + degeneracy)));
        }
        let eig: Vec<(Vec<f64>, ComplexOperator, f64)> = (0..self.samples)
            .into_par_iter()
            .map(|j| {
                let h = self.hamiltonian(j as f64 / self.samples as f64);
                let (vals, vecs) = herm_eigen(&h);
                (vals, vecs, h.norm())
            })
            .collect();
        // thresholds are relative to the largest ‖H‖ met along the loop
        let scale = eig.iter().map(|e| e.2).fold(0.0, f64::max);
        eig.into_iter()
            .enumerate()
            .map(|(j, (vals, vecs, _))| {
                check_band(&vals, band, degeneracy, scale, tol).map_err(|detail| Error::Degeneracy { sample: j, detail })?;
                Ok(vecs.columns(band, degeneracy).into_owned())
            })
            .collect()
    }
}

fn check_band(vals: &[f64], band: usize, l: usize, scale: f64, tol: &ToleranceConfig) -> std::result::Result<(), String> {
    let spread = vals[band + l - 1] - vals[band];
    if spread > tol.degeneracy_spread * scale.max(1e-300) && spread > 0.0 {
        return Err(format!("intra-band spread {spread:.3e}"));
    }
    let gap_tol = tol.degeneracy_gap * scale;
    if band > 0 && vals[band] - vals[band - 1] <= gap_tol {
        return Err(format!("gap below band {:.3e}", vals[band] - vals[band - 1]));
    }
    if band + l < vals.len() && vals[band + l] - vals[band + l - 1] <= gap_tol {
        return Err(format!("gap above band {:.3e}", vals[band + l] - vals[band + l - 1]));
    }
    Ok(())
}

/// −arg ∏_j ⟨φ_j|φ_{j+1}⟩ over a closed chain (the last link returns to the first state),
/// accumulated link by link so a smooth gauge yields the unreduced value.
pub fn wilson_loop_phase(states: &[Ket]) -> f64 {
    let n = states.len();
    let mut sum = 0.0;
    for j in 0..n {
        sum += states[j].dotc(&states[(j + 1) % n]).arg();
    }
    -sum
}

/// Berry phase of the nondegenerate eigenvalue with ascending index `band`.
pub fn berry_phase_loop(lp: &ParameterLoop, band: usize) -> Result<f64> {
    berry_phase_loop_with(lp, band, &ToleranceConfig::default())
}

pub fn berry_phase_loop_with(lp: &ParameterLoop, band: usize, tol: &ToleranceConfig) -> Result<f64> {
    lp.require_closed()?;
    let frames = lp.band_frames(band, 1, tol)?;
    let mut states: Vec<Ket> = frames.into_iter().map(|f| f.column(0).into_owned()).collect();
    smooth_gauge(&mut states);
    Ok(wilson_loop_phase(&states))
}

/// Fixes each phase so that the component largest at s=0 is real positive; falls back to
/// parallel transport where that component nearly vanishes. Only the link sum changes, by 2π multiples.
fn smooth_gauge(states: &mut [Ket]) {
    let anchor = states[0].iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).map(|(k, _)| k).unwrap_or(0);
    for j in 0..states.len() {
        let a = states[j][anchor];
        if a.norm() > 1e-3 {
            let ph = a / a.norm();
            states[j] /= ph;
        } else if j > 0 {
            let o = states[j - 1].dotc(&states[j]);
            if o.norm() > 0.0 {
                let ph = o / o.norm();
                states[j] /= ph;
            }
        }
    }
}

/// Solid angle Ω = 2π(1−cosθ) of a cone and the spin-½ Berry phases γ_± = ∓Ω/2.
pub fn solid_angle_prediction(theta: f64) -> (f64, f64, f64) {
    let omega = 2.0 * PI * (1.0 - theta.cos());
    (omega, -omega / 2.0, omega / 2.0)
}

/// Non-Abelian holonomy of an L-fold degenerate band around a closed loop, expressed in the
/// start frame. When `reference` (n×L) is given the start frame is its projection onto the band.
pub fn wilczek_zee_holonomy(
    lp: &ParameterLoop,
    band: usize,
    degeneracy: usize,
    reference: Option<&ComplexOperator>,
) -> Result<ComplexOperator> {
    wilczek_zee_holonomy_with(lp, band, degeneracy, reference, &ToleranceConfig::default())
}

pub fn wilczek_zee_holonomy_with(
    lp: &ParameterLoop,
    band: usize,
    degeneracy: usize,
    reference: Option<&ComplexOperator>,
    tol: &ToleranceConfig,
) -> Result<ComplexOperator> {
    lp.require_closed()?;
    let mut frames = lp.band_frames(band, degeneracy, tol)?;
    if let Some(r) = reference {
        if r.shape() != frames[0].shape() {
            return Err(Error::Dimension(format!("reference frame is {:?}, band frame is {:?}", r.shape(), frames[0].shape())));
        }
        let overlap = frames[0].adjoint() * r;
        frames[0] = &frames[0] * polar_unitary(&overlap);
    }
    Ok(holonomy_from_frames(&frames))
}

/// Path-ordered product of unitarized overlaps polar(Φ_{j+1}†Φ_j), closed back to Φ_0.
pub fn holonomy_from_frames(frames: &[ComplexOperator]) -> ComplexOperator {
    let l = frames[0].ncols();
    let n = frames.len();
    let mut w = identity(l);
    for j in 0..n {
        let next = &frames[(j + 1) % n];
        w = polar_unitary(&(next.adjoint() * &frames[j])) * w;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin_loop(theta: f64, samples: usize) -> ParameterLoop {
        ParameterLoop::new(
            move |s| {
                let phi = 2.0 * PI * s;
                n_dot_sigma([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()])
            },
            samples,
        )
        .unwrap()
    }

    #[test]
    fn half_sphere_gives_minus_pi() {
        let g = berry_phase_loop(&spin_loop(PI / 2.0, 2000), 1).unwrap();
        assert!(angle_distance(g, -PI) < 1e-5);
    }

    #[test]
    fn flat_loop_gives_zero() {
        let g = berry_phase_loop(&spin_loop(0.0, 100), 1).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn lower_band_sign() {
        let g = berry_phase_loop(&spin_loop(PI / 3.0, 4000), 0).unwrap();
        assert!(angle_distance(g, PI / 2.0) < 1e-5);
    }

    #[test]
    fn solid_angle_values() {
        assert_eq!(solid_angle_prediction(0.0), (0.0, -0.0, 0.0));
        let (o, gp, gm) = solid_angle_prediction(PI / 2.0);
        assert!((o - 2.0 * PI).abs() < 1e-15 && (gp + PI).abs() < 1e-15 && (gm - PI).abs() < 1e-15);
        let (o, gp, gm) = solid_angle_prediction(PI);
        assert!((o - 4.0 * PI).abs() < 1e-15 && (gp + 2.0 * PI).abs() < 1e-15 && (gm - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn crossing_is_rejected() {
        let lp = ParameterLoop::new(|s| pauli_z() * c((2.0 * PI * s).cos(), 0.0), 64).unwrap();
        assert!(matches!(berry_phase_loop(&lp, 1), Err(Error::Degeneracy { .. })));
    }

    #[test]
    fn open_loop_is_rejected() {
        let lp = ParameterLoop::new(|s| pauli_z() * c(1.0 + s, 0.0), 16).unwrap();
        assert!(!lp.closed);
        assert!(berry_phase_loop(&lp, 1).is_err());
    }

    #[test]
    fn constant_loop_has_trivial_holonomy() {
        let h = diag(&[c(-1.0, 0.0), ZERO, ZERO, ONE]);
        let lp = ParameterLoop::new(move |_| h.clone(), 32).unwrap();
        let u = wilczek_zee_holonomy(&lp, 1, 2, None).unwrap();
        assert!((u - identity(2)).norm() < 1e-12);
    }
}
