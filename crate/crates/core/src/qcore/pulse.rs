use std::f64::consts::PI;

/// Envelope of a control pulse on [0, T], normalized so that its time average is `mean()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseShape {
    #[default]
    Square,
    SinSquared,
}

impl PulseShape {
    /// Shape at fractional time x ∈ [0, 1], peak 1.
    pub fn profile(self, x: f64) -> f64 {
        match self {
            PulseShape::Square => 1.0,
            PulseShape::SinSquared => (PI * x).sin().powi(2),
        }
    }

    pub fn mean(self) -> f64 {
        match self {
            PulseShape::Square => 1.0,
            PulseShape::SinSquared => 0.5,
        }
    }

    /// Ω(t) with ∫_0^T Ω dt = area.
    pub fn envelope(self, area: f64, duration: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
        let peak = area / (self.mean() * duration);
        move |t| peak * self.profile(t / duration)
    }

    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Square => "square",
            PulseShape::SinSquared => "sin2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "square" => Some(PulseShape::Square),
            "sin2" | "sin_squared" => Some(PulseShape::SinSquared),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_has_requested_area() {
        for shape in [PulseShape::Square, PulseShape::SinSquared] {
            let f = shape.envelope(PI, 2.0);
            let n = 20000;
            let area: f64 = (0..n).map(|k| f(2.0 * (k as f64 + 0.5) / n as f64) * 2.0 / n as f64).sum();
            assert!((area - PI).abs() < 1e-8);
        }
    }
}
