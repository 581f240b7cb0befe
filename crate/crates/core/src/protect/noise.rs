use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Uniform};

use crate::error::{Error, Result};
use crate::qcore::*;

/// Distribution of a quasi-static error parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Fixed(f64),
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, sigma: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Fixed(x) => x.is_finite(),
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Distribution::Gaussian { mean, sigma } => mean.is_finite() && sigma.is_finite() && sigma >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid distribution {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Fixed(x) => x,
            Distribution::Uniform { low, high } if high > low => Uniform::new(low, high).expect("validated bounds").sample(rng),
            Distribution::Uniform { low, .. } => low,
            Distribution::Gaussian { mean, sigma } if sigma > 0.0 => Normal::new(mean, sigma).expect("validated σ").sample(rng),
            Distribution::Gaussian { mean, .. } => mean,
        }
    }
}

/// H(t, δ) = H_s + Σ δ_l E_l + (1 + δ1) Σ ω_k(t) H_k.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub error_ops: Vec<(ComplexOperator, Distribution)>,
    pub amplitude_error: Distribution,
}

/// One quasi-static draw.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    pub delta1: f64,
    pub deltas: Vec<f64>,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { error_ops: Vec::new(), amplitude_error: Distribution::Fixed(0.0) }
    }

    /// δ1 first, then δ_l in order, from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64) -> Result<NoiseSample> {
        self.amplitude_error.validate()?;
        for (_, d) in &self.error_ops {
            d.validate()?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta1 = self.amplitude_error.draw(&mut rng);
        let deltas = self.error_ops.iter().map(|(_, d)| d.draw(&mut rng)).collect();
        Ok(NoiseSample { delta1, deltas })
    }
}

/// Applies a fixed error draw to a schedule.
pub fn apply_noise(schedule: &ControlSchedule, model: &NoiseModel, sample: &NoiseSample) -> Result<ControlSchedule> {
    if sample.deltas.len() != model.error_ops.len() {
        return Err(Error::Dimension(format!("{} draws for {} error operators", sample.deltas.len(), model.error_ops.len())));
    }
    let mut drift = schedule.drift().clone();
    for ((e, _), d) in model.error_ops.iter().zip(&sample.deltas) {
        if e.shape() != drift.shape() {
            return Err(Error::Dimension(format!("error operator is {:?}, schedule is {:?}", e.shape(), drift.shape())));
        }
        drift += e * c(*d, 0.0);
    }
    let mut out = schedule.scaled(1.0 + sample.delta1);
    out.set_drift(drift)?;
    Ok(out)
}

/// Quasi-static noise: one draw per gate execution, reproducible per seed.
pub fn noise_inject(schedule: &ControlSchedule, model: &NoiseModel, seed: u64) -> Result<ControlSchedule> {
    apply_noise(schedule, model, &model.sample(seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> ControlSchedule {
        let mut s = ControlSchedule::new(vec![pauli_x(), pauli_y()]).unwrap();
        s.push_constant(0.5, vec![1.0, 0.2]).unwrap();
        s.push_smooth(0.5, |t| vec![t, 1.0 - t]).unwrap();
        s
    }

    #[test]
    fn zero_variance_leaves_schedule_unchanged() {
        let s = schedule();
        let model = NoiseModel { error_ops: vec![(pauli_z(), Distribution::Gaussian { mean: 0.0, sigma: 0.0 })], amplitude_error: Distribution::Fixed(0.0) };
        let n = noise_inject(&s, &model, 7).unwrap();
        for t in [0.1, 0.3, 0.7, 0.9] {
            assert_eq!(n.hamiltonian_at(t), s.hamiltonian_at(t));
        }
    }

    #[test]
    fn amplitude_error_scales_controls() {
        let s = schedule();
        let model = NoiseModel { error_ops: vec![], amplitude_error: Distribution::Fixed(0.01) };
        let n = noise_inject(&s, &model, 0).unwrap();
        for t in [0.2, 0.8] {
            assert!((n.hamiltonian_at(t) - s.hamiltonian_at(t) * c(1.01, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn seeded_draws_replay() {
        let model = NoiseModel {
            error_ops: vec![(pauli_z(), Distribution::Gaussian { mean: 0.0, sigma: 0.1 })],
            amplitude_error: Distribution::Uniform { low: -0.05, high: 0.05 },
        };
        let a = model.sample(42).unwrap();
        assert_eq!(a, model.sample(42).unwrap());
        assert_ne!(a, model.sample(43).unwrap());
        let s = noise_inject(&schedule(), &model, 42).unwrap();
        let expected = pauli_z() * c(a.deltas[0], 0.0);
        assert!((s.drift() - expected).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let model = NoiseModel { error_ops: vec![(identity(3), Distribution::Fixed(0.1))], amplitude_error: Distribution::Fixed(0.0) };
        assert!(matches!(noise_inject(&schedule(), &model, 1), Err(Error::Dimension(_))));
        let bad = NoiseModel { error_ops: vec![], amplitude_error: Distribution::Gaussian { mean: 0.0, sigma: -1.0 } };
        assert!(bad.sample(1).is_err());
    }
}
