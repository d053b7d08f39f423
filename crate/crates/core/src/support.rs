//! Support of `L(V)` for `V = ∫_0^∞ e^{−ξ_{s−}} dη_s`, read off the
//! triplets of `ξ` and `η`.

use std::fmt;

use crate::error::{Error, Result};
use crate::levy::{LevyTriplet, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    Point,
    ClosedBoundedInterval,
    /// `(−∞, upper]`
    LeftHalfLine,
    /// `[lower, ∞)`
    RightHalfLine,
    FullLine,
}

impl SupportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SupportKind::Point => "point",
            SupportKind::ClosedBoundedInterval => "closed_bounded_interval",
            SupportKind::LeftHalfLine => "left_half_line",
            SupportKind::RightHalfLine => "right_half_line",
            SupportKind::FullLine => "full_line",
        }
    }
}

/// Closed support set; finite endpoints are always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportResult {
    pub kind: SupportKind,
    pub lower: f64,
    pub upper: f64,
}

impl SupportResult {
    pub fn point(x: f64) -> Self {
        SupportResult { kind: SupportKind::Point, lower: x, upper: x }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        if lower == upper {
            return SupportResult::point(lower);
        }
        debug_assert!(lower < upper);
        SupportResult { kind: SupportKind::ClosedBoundedInterval, lower, upper }
    }

    pub fn right_half_line(lower: f64) -> Self {
        SupportResult { kind: SupportKind::RightHalfLine, lower, upper: f64::INFINITY }
    }

    pub fn left_half_line(upper: f64) -> Self {
        SupportResult { kind: SupportKind::LeftHalfLine, lower: f64::NEG_INFINITY, upper }
    }

    pub fn full_line() -> Self {
        SupportResult { kind: SupportKind::FullLine, lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    /// Image under `x ↦ a·x`.
    pub fn scaled(&self, a: f64) -> Self {
        if a == 0.0 {
            return SupportResult::point(0.0);
        }
        let (l, u) = if a > 0.0 { (a * self.lower, a * self.upper) } else { (a * self.upper, a * self.lower) };
        SupportResult::from_bounds(l, u)
    }

    fn from_bounds(lower: f64, upper: f64) -> Self {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => SupportResult::interval(lower, upper),
            (true, false) => SupportResult::right_half_line(lower),
            (false, true) => SupportResult::left_half_line(upper),
            (false, false) => SupportResult::full_line(),
        }
    }

    /// Whether `x` lies within `tol` of the set.
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lower - tol && x <= self.upper + tol
    }
}

impl fmt::Display for SupportResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SupportKind::Point => write!(f, "{{{}}}", self.lower),
            SupportKind::ClosedBoundedInterval => write!(f, "[{}, {}]", self.lower, self.upper),
            SupportKind::LeftHalfLine => write!(f, "(-inf, {}]", self.upper),
            SupportKind::RightHalfLine => write!(f, "[{}, inf)", self.lower),
            SupportKind::FullLine => write!(f, "(-inf, inf)"),
        }
    }
}

/// Predicates on a Lévy process that the support tables branch on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessShape {
    pub is_deterministic_drift: bool,
    pub is_subordinator: bool,
    pub finite_variation: bool,
    pub fv_drift: Option<f64>,
    pub nu_pos_mass: bool,
    pub nu_neg_mass: bool,
    pub infinite_variation: bool,
}

impl ProcessShape {
    /// Finite variation with drift `b > 0` and no positive jumps.
    fn fv_positive_drift_no_up_jumps(&self) -> Option<f64> {
        match self.fv_drift {
            Some(b) if self.finite_variation && b > 0.0 && !self.nu_pos_mass => Some(b),
            _ => None,
        }
    }

    fn subordinator_positive_drift(&self) -> Option<f64> {
        match self.fv_drift {
            Some(b) if self.is_subordinator && b > 0.0 => Some(b),
            _ => None,
        }
    }
}

pub fn shape_of(t: &LevyTriplet) -> Result<ProcessShape> {
    let finite_variation = t.is_finite_variation()?;
    let fv_drift = if finite_variation { t.fv_drift()? } else { None };
    Ok(ProcessShape {
        is_deterministic_drift: t.is_deterministic(),
        is_subordinator: t.is_subordinator()?,
        finite_variation,
        fv_drift,
        nu_pos_mass: t.levy_measure.has_mass_on(Side::Positive),
        nu_neg_mass: t.levy_measure.has_mass_on(Side::Negative),
        infinite_variation: !finite_variation,
    })
}

/// Refuse `ξ` that provably does not drift to `+∞` (finite non-positive
/// mean). Other cases are trusted.
fn check_drifts_to_infinity(xi: &LevyTriplet) -> Result<()> {
    if let Some(m) = xi.mean()? {
        if m <= 0.0 {
            return Err(Error::domain(format!("ξ does not drift to +inf: E[ξ₁] = {m}")));
        }
    }
    Ok(())
}

/// Support of `∫_0^∞ e^{−ξ_s} ds`.
pub fn support_eta_is_time(xi: &LevyTriplet) -> Result<SupportResult> {
    check_drifts_to_infinity(xi)?;
    let s = shape_of(xi)?;
    if s.is_deterministic_drift {
        return Ok(SupportResult::point(1.0 / xi.gamma));
    }
    if let Some(b) = s.subordinator_positive_drift() {
        return Ok(SupportResult::interval(0.0, 1.0 / b));
    }
    if let Some(b) = s.fv_positive_drift_no_up_jumps() {
        return Ok(SupportResult::right_half_line(1.0 / b));
    }
    Ok(SupportResult::right_half_line(0.0))
}

/// Support of `∫_0^∞ e^{−ξ_{s−}} dη_s`. Almost sure convergence of the
/// integral is the caller's responsibility.
pub fn support_of_functional(xi: &LevyTriplet, eta: &LevyTriplet) -> Result<SupportResult> {
    check_drifts_to_infinity(xi)?;
    let e = shape_of(eta)?;
    if e.infinite_variation || (e.nu_pos_mass && e.nu_neg_mass) {
        return Ok(SupportResult::full_line());
    }
    let a = e.fv_drift.expect("finite variation has a drift");
    if e.is_deterministic_drift {
        return Ok(support_eta_is_time(xi)?.scaled(a));
    }
    let x = shape_of(xi)?;
    if e.nu_pos_mass {
        if a >= 0.0 {
            return Ok(match x.fv_positive_drift_no_up_jumps() {
                Some(b) => SupportResult::right_half_line(a / b),
                None => SupportResult::right_half_line(0.0),
            });
        }
        return Ok(match x.subordinator_positive_drift() {
            Some(b) => SupportResult::right_half_line(a / b),
            None => SupportResult::full_line(),
        });
    }
    // only negative jumps
    if a > 0.0 {
        return Ok(match x.subordinator_positive_drift() {
            Some(b) => SupportResult::left_half_line(a / b),
            None => SupportResult::full_line(),
        });
    }
    Ok(match x.fv_positive_drift_no_up_jumps() {
        Some(b) => SupportResult::left_half_line(a / b),
        None => SupportResult::left_half_line(0.0),
    })
}

/// `V ≥ 0` almost surely for every `ξ` iff `η` is a subordinator.
pub fn positivity_check(eta: &LevyTriplet) -> Result<bool> {
    Ok(shape_of(eta)?.is_subordinator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;

    #[test]
    fn shape_examples() {
        let s = shape_of(&LevyTriplet::deterministic(2.0)).unwrap();
        assert!(s.is_deterministic_drift && s.is_subordinator && s.fv_drift == Some(2.0));
        let s = shape_of(&LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap()).unwrap();
        assert!(s.infinite_variation && !s.is_subordinator);
        let cp = LevyTriplet::subordinator(1.0, LevyMeasureSpec::atoms(&[(1.0, 1.0)]).unwrap()).unwrap();
        let s = shape_of(&cp).unwrap();
        assert!(s.is_subordinator && s.fv_drift == Some(1.0) && s.nu_pos_mass);
    }

    #[test]
    fn scaling_by_negative_drift_reflects() {
        let r = SupportResult::interval(0.0, 2.0).scaled(-0.5);
        assert_eq!(r, SupportResult::interval(-1.0, 0.0));
        let r = SupportResult::right_half_line(1.0).scaled(-2.0);
        assert_eq!(r, SupportResult::left_half_line(-2.0));
    }

    #[test]
    fn refuses_xi_with_negative_mean() {
        let xi = LevyTriplet::deterministic(-1.0);
        assert!(matches!(support_eta_is_time(&xi), Err(Error::Domain(_))));
    }

    #[test]
    fn positivity() {
        assert!(positivity_check(&LevyTriplet::deterministic(1.0)).unwrap());
        assert!(!positivity_check(&LevyTriplet::brownian_with_drift(0.0, 1.0).unwrap()).unwrap());
        let neg = LevyTriplet::finite_variation(0.0, LevyMeasureSpec::atoms(&[(-1.0, 1.0)]).unwrap()).unwrap();
        assert!(!positivity_check(&neg).unwrap());
    }
}
