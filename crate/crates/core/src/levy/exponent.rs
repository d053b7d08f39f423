use std::fmt;
use std::sync::Arc;

use super::measure::{LevyMeasureSpec, Side};
use super::triplet::LevyTriplet;
use crate::error::{Error, Result};
use crate::special::{ein, gamma, InverseGammaLaw};

/// One term `coef · u^exponent` of a power-sum exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

/// Where a Laplace exponent came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    Drift,
    Stable,
    CompoundPoisson,
    Subordinator,
    SelfDecomposable,
    InverseGamma,
    CompositeSum,
    Numeric,
}

type ScalarFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// `−drift·u + Σ coef·u^exponent`
    PowerSum { drift: f64, terms: Vec<PowerTerm> },
    /// `−b u + ∫(e^{−ux} − 1) ν(dx)` of a subordinator triplet.
    Subordinator { drift: f64, measure: LevyMeasureSpec },
    /// `ψ_V(u) = −b_X u − ∫ Ein(ut) ν_X(dt)`, the law of `∫e^{−t}dX_t`.
    SelfDecomposable { drift: f64, measure: LevyMeasureSpec },
    InverseGamma(InverseGammaLaw),
    Numeric(ScalarFn),
    Sum(Vec<LaplaceExponent>),
}

/// Evaluatable Laplace exponent `ψ` with `E e^{−uX} = e^{ψ(u)}`, so `ψ ≤ 0`
/// for positive laws. Derivatives are analytic where the family allows it;
/// `Numeric` exponents use central differences with steps `u·ε^{1/3}`
/// (first) and `u·ε^{1/4}` (second derivative).
#[derive(Clone)]
pub struct LaplaceExponent {
    kind: Kind,
}

impl fmt::Debug for LaplaceExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::PowerSum { drift, terms } => f.debug_struct("PowerSum").field("drift", drift).field("terms", terms).finish(),
            Kind::Subordinator { drift, measure } => {
                f.debug_struct("Subordinator").field("drift", drift).field("measure", measure).finish()
            }
            Kind::SelfDecomposable { drift, measure } => {
                f.debug_struct("SelfDecomposable").field("drift", drift).field("measure", measure).finish()
            }
            Kind::InverseGamma(l) => f.debug_tuple("InverseGamma").field(l).finish(),
            Kind::Numeric(_) => f.write_str("Numeric(..)"),
            Kind::Sum(parts) => f.debug_tuple("Sum").field(parts).finish(),
        }
    }
}

impl LaplaceExponent {
    pub fn zero() -> Self {
        LaplaceExponent::power_sum(0.0, Vec::new())
    }

    /// `ψ(u) = −b·u`.
    pub fn drift(b: f64) -> Self {
        LaplaceExponent::power_sum(b, Vec::new())
    }

    pub fn power_sum(drift: f64, terms: Vec<PowerTerm>) -> Self {
        LaplaceExponent { kind: Kind::PowerSum { drift, terms } }
    }

    /// Positive `α`-stable law with Lévy density `c x^{−1−α}` and drift `b`:
    /// `ψ(u) = −b u − (cΓ(1−α)/α) u^α`.
    pub fn stable(alpha: f64, c: f64, drift: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("stable index must lie in (0, 1), got {alpha}")));
        }
        if !(c > 0.0) {
            return Err(Error::domain(format!("stable scale must be positive, got {c}")));
        }
        Ok(LaplaceExponent::power_sum(
            drift,
            vec![PowerTerm { coef: -c * gamma(1.0 - alpha) / alpha, exponent: alpha }],
        ))
    }

    /// Laplace exponent of a subordinator triplet.
    pub fn from_triplet(t: &LevyTriplet) -> Result<Self> {
        if !t.is_subordinator()? {
            return Err(Error::domain("Laplace exponent requested for a process that is not a subordinator"));
        }
        let drift = t.fv_drift()?.expect("subordinators have finite variation");
        Ok(LaplaceExponent { kind: Kind::Subordinator { drift, measure: t.levy_measure.clone() } })
    }

    /// Exponent of `∫_0^∞ e^{−t} dX_t` for a subordinator `X` (background
    /// driving process of a selfdecomposable law).
    pub fn selfdecomposable(background: &LevyTriplet) -> Result<Self> {
        if !background.is_subordinator()? {
            return Err(Error::domain("background process must be a subordinator"));
        }
        let drift = background.fv_drift()?.expect("subordinators have finite variation");
        Ok(LaplaceExponent { kind: Kind::SelfDecomposable { drift, measure: background.levy_measure.clone() } })
    }

    pub fn inverse_gamma(law: InverseGammaLaw) -> Self {
        LaplaceExponent { kind: Kind::InverseGamma(law) }
    }

    pub fn numeric<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        LaplaceExponent { kind: Kind::Numeric(Arc::new(f)) }
    }

    pub fn sum(parts: Vec<LaplaceExponent>) -> Self {
        LaplaceExponent { kind: Kind::Sum(parts) }
    }

    pub fn family_tag(&self) -> FamilyTag {
        match &self.kind {
            Kind::PowerSum { terms, .. } if terms.is_empty() => FamilyTag::Drift,
            Kind::PowerSum { .. } => FamilyTag::Stable,
            Kind::Subordinator { measure, .. } => {
                if matches!(measure.is_finite(), Ok(true)) {
                    FamilyTag::CompoundPoisson
                } else {
                    FamilyTag::Subordinator
                }
            }
            Kind::SelfDecomposable { .. } => FamilyTag::SelfDecomposable,
            Kind::InverseGamma(_) => FamilyTag::InverseGamma,
            Kind::Numeric(_) => FamilyTag::Numeric,
            Kind::Sum(_) => FamilyTag::CompositeSum,
        }
    }

    /// Power-sum representation `(drift, terms)` when available.
    pub fn as_power_sum(&self) -> Option<(f64, &[PowerTerm])> {
        match &self.kind {
            Kind::PowerSum { drift, terms } => Some((*drift, terms)),
            _ => None,
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        // derivatives may overflow near 0 while the value is still fine
        let v = self.raw(u)?.0;
        if !v.is_finite() {
            return Err(Error::numeric(format!("Laplace exponent not finite at u = {u:e}")));
        }
        Ok(v)
    }

    pub fn deriv1(&self, u: f64) -> Result<f64> {
        Ok(self.eval_with_derivs(u)?.1)
    }

    pub fn deriv2(&self, u: f64) -> Result<f64> {
        Ok(self.eval_with_derivs(u)?.2)
    }

    /// `(ψ(u), ψ′(u), ψ″(u))`.
    pub fn eval_with_derivs(&self, u: f64) -> Result<(f64, f64, f64)> {
        let out = self.raw(u)?;
        if !(out.0.is_finite() && out.1.is_finite() && out.2.is_finite()) {
            return Err(Error::numeric(format!("Laplace exponent not finite at u = {u:e}")));
        }
        Ok(out)
    }

    fn raw(&self, u: f64) -> Result<(f64, f64, f64)> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::domain(format!("Laplace exponent evaluated at u = {u}")));
        }
        let out = match &self.kind {
            Kind::PowerSum { drift, terms } => {
                let (mut v, mut d1, mut d2) = (-drift * u, -drift, 0.0);
                for t in terms {
                    let p = u.powf(t.exponent);
                    v += t.coef * p;
                    d1 += t.coef * t.exponent * p / u;
                    d2 += t.coef * t.exponent * (t.exponent - 1.0) * p / (u * u);
                }
                (v, d1, d2)
            }
            Kind::Subordinator { drift, measure } => {
                let (v, d1, d2) = measure.subordinator_integrals(u)?;
                (v - drift * u, d1 - drift, d2)
            }
            Kind::SelfDecomposable { drift, measure } => {
                let v = -drift * u - ein_integral(measure, u)?;
                // ψ_V′ = ψ_X/u, ψ_V″ = (uψ_X′ − ψ_X)/u²
                let (x, x1, _) = measure.subordinator_integrals(u)?;
                let psi_x = x - drift * u;
                let psi_x1 = x1 - drift;
                (v, psi_x / u, (u * psi_x1 - psi_x) / (u * u))
            }
            Kind::InverseGamma(law) => law.log_laplace_with_derivs(u)?,
            Kind::Numeric(f) => {
                let v = f(u)?;
                let h1 = u * f64::EPSILON.cbrt();
                let h2 = u * f64::EPSILON.powf(0.25);
                let d1 = (f(u + h1)? - f(u - h1)?) / (2.0 * h1);
                let d2 = (f(u + h2)? - 2.0 * v + f(u - h2)?) / (h2 * h2);
                (v, d1, d2)
            }
            Kind::Sum(parts) => {
                let mut acc = (0.0, 0.0, 0.0);
                for p in parts {
                    let (v, d1, d2) = p.raw(u)?;
                    acc = (acc.0 + v, acc.1 + d1, acc.2 + d2);
                }
                acc
            }
        };
        Ok(out)
    }
}

/// `∫ Ein(ut) ν(dt)` for a measure on `(0, ∞)`.
fn ein_integral(measure: &LevyMeasureSpec, u: f64) -> Result<f64> {
    let mut total = 0.0;
    for c in measure.components() {
        total += match c {
            LevyMeasureSpec::Stable { alpha, c, .. } => {
                if *alpha >= 1.0 {
                    return Err(Error::domain("stable background needs index < 1"));
                }
                // ∫ Ein(ut) c t^{−1−α} dt = (c/α²) Γ(1−α) u^α
                c * gamma(1.0 - alpha) / (alpha * alpha) * u.powf(*alpha)
            }
            LevyMeasureSpec::Atoms(atoms) => atoms.iter().map(|a| a.mass * ein(u * a.position)).sum(),
            other => other.integrate_side(Side::Positive, &|t| ein(u * t), 0.0, f64::INFINITY)?,
        };
    }
    Ok(total)
}

/// `ψ(u)` of a subordinator given by its triplet.
pub fn eval_laplace_exponent(spec: &LevyTriplet, u: f64) -> Result<f64> {
    LaplaceExponent::from_triplet(spec)?.eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::measure::DensityShape;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn examples_from_the_operation_table() {
        assert_eq!(eval_laplace_exponent(&LevyTriplet::deterministic(2.0), 1.0).unwrap(), -2.0);
        let st = LevyTriplet::subordinator(0.0, LevyMeasureSpec::stable(0.5, 1.0, Side::Positive).unwrap()).unwrap();
        assert!(close(eval_laplace_exponent(&st, 1.0).unwrap(), -2.0 * std::f64::consts::PI.sqrt(), 1e-14));
        let cp = LevyTriplet::subordinator(0.0, LevyMeasureSpec::atoms(&[(1.0, 1.0)]).unwrap()).unwrap();
        assert!(close(eval_laplace_exponent(&cp, 50.0).unwrap(), -1.0, 1e-15));
        let bm = LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap();
        assert!(matches!(eval_laplace_exponent(&bm, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn selfdecomposable_gamma_law() {
        // background density e^{−t}: μ = Exp(1), ψ_V = −ln(1 + u)
        let nu = LevyMeasureSpec::density(1.0, DensityShape::ExpPoly { power: 0.0, rate: 1.0 }, Side::Positive).unwrap();
        let x = LevyTriplet::subordinator(0.0, nu).unwrap();
        let psi = LaplaceExponent::selfdecomposable(&x).unwrap();
        for u in [0.1, 1.0, 7.0] {
            let (v, d1, d2) = psi.eval_with_derivs(u).unwrap();
            assert!(close(v, -(1.0 + u).ln(), 1e-10), "{v}");
            assert!(close(d1, -1.0 / (1.0 + u), 1e-10));
            assert!(close(d2, 1.0 / (1.0 + u).powi(2), 1e-10));
        }
    }

    #[test]
    fn selfdecomposable_stable_background_is_stable() {
        // k(x) = c x^{−α} ⇔ ν_X density cα x^{−1−α}
        let (alpha, c) = (0.4, 1.0);
        let nu = LevyMeasureSpec::stable(alpha, c * alpha, Side::Positive).unwrap();
        let x = LevyTriplet::subordinator(0.0, nu).unwrap();
        let psi = LaplaceExponent::selfdecomposable(&x).unwrap();
        let direct = LaplaceExponent::stable(alpha, c, 0.0).unwrap();
        for u in [0.3, 2.0] {
            let a = psi.eval_with_derivs(u).unwrap();
            let b = direct.eval_with_derivs(u).unwrap();
            assert!(close(a.0, b.0, 1e-13) && close(a.1, b.1, 1e-13) && close(a.2, b.2, 1e-13));
        }
    }

    #[test]
    fn numeric_derivatives_track_analytic() {
        let f = LaplaceExponent::numeric(|u| Ok(-u.sqrt()));
        let (_, d1, d2) = f.eval_with_derivs(2.0).unwrap();
        assert!(close(d1, -0.5 / 2f64.sqrt(), 1e-9));
        assert!(close(d2, 0.25 * 2f64.powf(-1.5), 1e-6));
        assert_eq!(f.family_tag(), FamilyTag::Numeric);
    }
}
