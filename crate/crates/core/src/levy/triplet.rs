use super::measure::{DensityShape, LevyMeasureSpec, Side};
use crate::error::{Error, Result};

/// Characteristic triplet `(γ, σ², ν)` of a one-dimensional Lévy process,
/// with truncation function `1_{|x| ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    pub gamma: f64,
    pub sigma2: f64,
    pub levy_measure: LevyMeasureSpec,
}

impl LevyTriplet {
    pub fn new(gamma: f64, sigma2: f64, levy_measure: LevyMeasureSpec) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::domain("location parameter must be finite"));
        }
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!("Gaussian variance must be >= 0, got {sigma2}")));
        }
        levy_measure.validate()?;
        Ok(LevyTriplet { gamma, sigma2, levy_measure })
    }

    /// `ξ_t = b·t`.
    pub fn deterministic(b: f64) -> Self {
        LevyTriplet { gamma: b, sigma2: 0.0, levy_measure: LevyMeasureSpec::Zero }
    }

    /// `ξ_t = σ B_t + a t`.
    pub fn brownian_with_drift(a: f64, sigma: f64) -> Result<Self> {
        LevyTriplet::new(a, sigma * sigma, LevyMeasureSpec::Zero)
    }

    /// Finite-variation process with drift `b` (in the sense `γ − ∫_{|x|≤1} x ν`).
    pub fn finite_variation(drift: f64, levy_measure: LevyMeasureSpec) -> Result<Self> {
        levy_measure.validate()?;
        let m = levy_measure.signed_mean_near_zero()?;
        if !m.is_finite() {
            return Err(Error::domain("Lévy measure has infinite variation; no drift representation"));
        }
        LevyTriplet::new(drift + m, 0.0, levy_measure)
    }

    /// Subordinator with drift `b ≥ 0` and Lévy measure on `(0, ∞)`.
    pub fn subordinator(drift: f64, levy_measure: LevyMeasureSpec) -> Result<Self> {
        if !(drift >= 0.0) {
            return Err(Error::domain(format!("subordinator drift must be >= 0, got {drift}")));
        }
        if levy_measure.has_mass_on(Side::Negative) {
            return Err(Error::domain("subordinator Lévy measure must live on (0, inf)"));
        }
        LevyTriplet::finite_variation(drift, levy_measure)
    }

    /// Drift `b = γ − ∫_{|x|≤1} x ν(dx)`, present iff `∫_{|x|≤1} |x| ν(dx) < ∞`.
    pub fn fv_drift(&self) -> Result<Option<f64>> {
        let m = self.levy_measure.signed_mean_near_zero()?;
        Ok(m.is_finite().then_some(self.gamma - m))
    }

    pub fn is_finite_variation(&self) -> Result<bool> {
        Ok(self.sigma2 == 0.0 && self.fv_drift()?.is_some())
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma2 == 0.0 && self.levy_measure.is_zero()
    }

    pub fn is_subordinator(&self) -> Result<bool> {
        if self.sigma2 > 0.0 || self.levy_measure.has_mass_on(Side::Negative) {
            return Ok(false);
        }
        Ok(matches!(self.fv_drift()?, Some(b) if b >= 0.0))
    }

    /// `E[ξ₁]` when it exists in `[−∞, ∞]`; `None` when both tails have
    /// infinite mean.
    pub fn mean(&self) -> Result<Option<f64>> {
        let pos = self.levy_measure.large_jump_mean(Side::Positive)?;
        let neg = self.levy_measure.large_jump_mean(Side::Negative)?;
        Ok(match (pos.is_finite(), neg.is_finite()) {
            (true, true) => Some(self.gamma + pos - neg),
            (false, true) => Some(f64::INFINITY),
            (true, false) => Some(f64::NEG_INFINITY),
            (false, false) => None,
        })
    }

    /// `ln E[e^{−ξ₁}] = −γ + σ²/2 + ∫(e^{−x} − 1 + x 1_{|x|≤1}) ν(dx)`, or
    /// `+∞` when the exponential moment does not exist.
    pub fn log_exp_moment(&self) -> Result<f64> {
        let m = &self.levy_measure;
        for c in m.components() {
            let infinite = match c {
                LevyMeasureSpec::Stable { side: Side::Negative, .. } => true,
                LevyMeasureSpec::Density(d) if d.side == Side::Negative => match d.shape {
                    DensityShape::ExpPoly { rate, .. } => rate <= 1.0,
                    DensityShape::ShiftedPower { .. } => true,
                    DensityShape::Box { .. } => false,
                },
                _ => false,
            };
            if infinite {
                return Ok(f64::INFINITY);
            }
        }
        let small = |x: f64| {
            if x < 1e-3 {
                x * x * (0.5 - x / 6.0 + x * x / 24.0)
            } else {
                (-x).exp_m1() + x
            }
        };
        let small_neg = |x: f64| {
            if x < 1e-3 {
                x * x * (0.5 + x / 6.0 + x * x / 24.0)
            } else {
                x.exp_m1() - x
            }
        };
        let pos = m.integrate_side(Side::Positive, &small, 0.0, 1.0)?
            + m.integrate_side(Side::Positive, &|x| (-x).exp_m1(), 1.0, f64::INFINITY)?
            + atoms_at_one(m, Side::Positive) * small(1.0);
        let neg = m.integrate_side(Side::Negative, &small_neg, 0.0, 1.0)?
            + m.integrate_side(Side::Negative, &|x| x.exp_m1(), 1.0, f64::INFINITY)?
            + atoms_at_one(m, Side::Negative) * small_neg(1.0);
        Ok(-self.gamma + 0.5 * self.sigma2 + pos + neg)
    }
}

fn atoms_at_one(m: &LevyMeasureSpec, side: Side) -> f64 {
    m.components()
        .iter()
        .map(|c| match c {
            LevyMeasureSpec::Atoms(a) => a.iter().filter(|a| a.position * side.sign() == 1.0).map(|a| a.mass).sum(),
            _ => 0.0,
        })
        .sum()
}
