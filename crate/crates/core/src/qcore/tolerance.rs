use crate::error::{Error, Result};

/// Numerical thresholds shared by all modules. Every field can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// ‖U†U − I‖_F bound for unitary-tagged operators.
    pub unitarity: f64,
    /// Relative ‖H − H†‖_F bound for Hermitian-tagged operators.
    pub hermiticity: f64,
    /// Cyclicity residual bound (states, subspaces).
    pub cyclicity: f64,
    /// Bound on max ‖K(t)‖_F for a purely geometric evolution.
    pub holonomy: f64,
    /// Population allowed outside the target subspace.
    pub leakage: f64,
    /// Relative intra-band eigenvalue spread for a degenerate band.
    pub degeneracy_spread: f64,
    /// Relative gap separating a band from the rest of the spectrum.
    pub degeneracy_gap: f64,
    /// Gram-matrix deviation allowed in a moving frame.
    pub frame: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            unitarity: 1e-10,
            hermiticity: 1e-12,
            cyclicity: 1e-8,
            holonomy: 1e-8,
            leakage: 1e-8,
            degeneracy_spread: 1e-9,
            degeneracy_gap: 1e-6,
            frame: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub const KEYS: [&'static str; 8] = [
        "unitarity",
        "hermiticity",
        "cyclicity",
        "holonomy",
        "leakage",
        "degeneracy_spread",
        "degeneracy_gap",
        "frame",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "unitarity" => self.unitarity,
            "hermiticity" => self.hermiticity,
            "cyclicity" => self.cyclicity,
            "holonomy" => self.holonomy,
            "leakage" => self.leakage,
            "degeneracy_spread" => self.degeneracy_spread,
            "degeneracy_gap" => self.degeneracy_gap,
            "frame" => self.frame,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {key} must be positive, got {value}")));
        }
        let slot = match key {
            "unitarity" => &mut self.unitarity,
            "hermiticity" => &mut self.hermiticity,
            "cyclicity" => &mut self.cyclicity,
            "holonomy" => &mut self.holonomy,
            "leakage" => &mut self.leakage,
            "degeneracy_spread" => &mut self.degeneracy_spread,
            "degeneracy_gap" => &mut self.degeneracy_gap,
            "frame" => &mut self.frame,
            _ => return Err(Error::InvalidArgument(format!("unknown tolerance key `{key}`"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        Self::KEYS.iter().map(|&k| (k, self.get(k).unwrap())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_override() {
        let mut t = ToleranceConfig::default();
        assert_eq!(t.unitarity, 1e-10);
        assert_eq!(t.hermiticity, 1e-12);
        assert_eq!(t.cyclicity, 1e-8);
        t.set("cyclicity", 1e-6).unwrap();
        assert_eq!(t.get("cyclicity"), Some(1e-6));
        assert!(t.set("bogus", 1.0).is_err());
        assert!(t.set("leakage", -1.0).is_err());
    }
}
