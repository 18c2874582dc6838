/// Piecewise-linear map from membrane potential to firing rate:
/// zero up to `threshold`, slope `slope` up to `knee`, slope
/// `slope_after_knee` beyond it, optionally capped at `ceiling`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Activation {
    pub threshold: f64,
    pub knee: f64,
    pub slope: f64,
    pub slope_after_knee: f64,
    pub ceiling: Option<f64>,
}

impl Activation {
    /// Excitatory rate `g_x`: 0 below 1, linear to 1 at potential 2, saturated
    /// beyond.
    pub const fn li98_excitatory() -> Self {
        Self {
            threshold: 1.0,
            knee: 2.0,
            slope: 1.0,
            slope_after_knee: 0.0,
            ceiling: Some(1.0),
        }
    }

    /// Inhibitory rate `g_y`: 0 below 0, slope 0.21 up to 1.2, slope 2.5
    /// beyond, unbounded.
    pub const fn li98_inhibitory() -> Self {
        Self {
            threshold: 0.0,
            knee: 1.2,
            slope: 0.21,
            slope_after_knee: 2.5,
            ceiling: None,
        }
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        let linear = (self.slope * (v - self.threshold))
            .max(0.0)
            .min(self.slope * (self.knee - self.threshold));
        let r = linear + self.slope_after_knee * (v - self.knee).max(0.0);
        r.min(self.ceiling.unwrap_or(f64::INFINITY))
    }

    /// Largest attainable rate (infinite when unbounded).
    pub fn max_rate(&self) -> f64 {
        match self.ceiling {
            Some(c) if self.slope_after_knee <= 0.0 => c.min(self.slope * (self.knee - self.threshold)),
            Some(c) => c,
            None if self.slope_after_knee <= 0.0 => self.slope * (self.knee - self.threshold),
            None => f64::INFINITY,
        }
    }

    pub(crate) fn validate(&self) -> bool {
        self.slope > 0.0
            && self.slope_after_knee >= 0.0
            && self.knee >= self.threshold
            && self.ceiling.is_none_or(|c| c > 0.0)
            && self.threshold.is_finite()
            && self.knee.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excitatory_profile() {
        let g = Activation::li98_excitatory();
        assert_eq!(g.eval(-3.0), 0.0);
        assert_eq!(g.eval(0.99), 0.0);
        assert_eq!(g.eval(1.5), 0.5);
        assert_eq!(g.eval(2.0), 1.0);
        assert_eq!(g.eval(7.0), 1.0);
        assert_eq!(g.max_rate(), 1.0);
    }

    #[test]
    fn inhibitory_profile() {
        let g = Activation::li98_inhibitory();
        assert_eq!(g.eval(-1.0), 0.0);
        assert!((g.eval(0.6) - 0.21 * 0.6).abs() < 1e-15);
        assert!((g.eval(1.2) - 0.252).abs() < 1e-15);
        assert!((g.eval(2.2) - (0.252 + 2.5)).abs() < 1e-12);
        assert_eq!(g.max_rate(), f64::INFINITY);
    }

    #[test]
    fn monotone() {
        for g in [Activation::li98_excitatory(), Activation::li98_inhibitory()] {
            let mut prev = f64::NEG_INFINITY;
            for k in -100..400 {
                let r = g.eval(k as f64 * 0.01);
                assert!(r >= prev);
                prev = r;
            }
        }
    }
}
