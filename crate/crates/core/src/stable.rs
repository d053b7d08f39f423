//! Positive stable laws and their finite convolutions under
//! `ξ_t = σB_t + at`: exact range decisions and closed-form pre-images.

use crate::error::{Error, Result};
use crate::levy::{Decision, LaplaceExponent, LevyMeasureSpec, LevyTriplet, PowerTerm, Side};
use crate::range::{EtaWitness, RangeVerdict};
use crate::special::gamma;

/// One positive stable component: Lévy density `c x^{−1−α}`, drift `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableComponent {
    pub alpha: f64,
    pub c: f64,
    pub b: f64,
}

/// Law of an independent sum of positive stable variables with strictly
/// increasing indices in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableConvolutionSpec {
    components: Vec<StableComponent>,
}

impl StableConvolutionSpec {
    pub fn new(components: Vec<StableComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("stable convolution needs at least one component"));
        }
        for (i, s) in components.iter().enumerate() {
            if !(s.alpha > 0.0 && s.alpha < 1.0) {
                return Err(Error::domain(format!("stable index must lie in (0, 1), got {}", s.alpha)));
            }
            if !(s.c > 0.0 && s.c.is_finite()) {
                return Err(Error::domain(format!("stable scale must be positive, got {}", s.c)));
            }
            if !(s.b >= 0.0) {
                return Err(Error::domain(format!("stable drift must be >= 0, got {}", s.b)));
            }
            if i > 0 && !(s.alpha > components[i - 1].alpha) {
                return Err(Error::domain("stable indices must be strictly increasing"));
            }
        }
        Ok(StableConvolutionSpec { components })
    }

    pub fn single(alpha: f64, c: f64) -> Result<Self> {
        StableConvolutionSpec::new(vec![StableComponent { alpha, c, b: 0.0 }])
    }

    pub fn components(&self) -> &[StableComponent] {
        &self.components
    }

    pub fn total_drift(&self) -> f64 {
        self.components.iter().map(|s| s.b).sum()
    }

    /// `ψ_V(u) = −Σ b_i u − Σ (c_iΓ(1−α_i)/α_i) u^{α_i}`.
    pub fn laplace_exponent(&self) -> LaplaceExponent {
        let terms = self
            .components
            .iter()
            .map(|s| PowerTerm { coef: -s.c * gamma(1.0 - s.alpha) / s.alpha, exponent: s.alpha })
            .collect();
        LaplaceExponent::power_sum(self.total_drift(), terms)
    }

    /// Lévy measure of the law, `Σ c_i x^{−1−α_i}`.
    pub fn levy_measure(&self) -> LevyMeasureSpec {
        LevyMeasureSpec::Sum(
            self.components
                .iter()
                .map(|s| LevyMeasureSpec::Stable { alpha: s.alpha, c: s.c, side: Side::Positive })
                .collect(),
        )
    }
}

/// `f(u) = Σ D_i u^{γ_i}` with strictly increasing exponents, where
/// `ψ_η = −f` is the candidate pre-image exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimagePolynomialForm {
    pub terms: Vec<(f64, f64)>,
}

impl PreimagePolynomialForm {
    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|&(g, d)| d * u.powf(g)).sum()
    }

    pub fn coefficient(&self, exponent: f64) -> f64 {
        self.terms
            .iter()
            .find(|(g, _)| (g - exponent).abs() <= 1e-12)
            .map(|t| t.1)
            .unwrap_or(0.0)
    }

    /// `ψ_η = −f` as a Laplace exponent (a `u¹` term becomes drift).
    pub fn eta_exponent(&self) -> LaplaceExponent {
        let mut drift = 0.0;
        let mut terms = Vec::new();
        for &(g, d) in &self.terms {
            if (g - 1.0).abs() <= 1e-12 {
                drift += d;
            } else {
                terms.push(PowerTerm { coef: -d, exponent: g });
            }
        }
        LaplaceExponent::power_sum(drift, terms)
    }

    /// Triplet of `η` when every sub-linear term has a non-negative
    /// coefficient, so that `η` is a sum of stable subordinators and a drift.
    fn eta_triplet(&self) -> Result<Option<LevyTriplet>> {
        let mut drift = 0.0;
        let mut parts = Vec::new();
        for &(g, d) in &self.terms {
            if (g - 1.0).abs() <= 1e-12 {
                drift += d;
            } else if g < 1.0 {
                if d < 0.0 {
                    return Ok(None);
                }
                parts.push(LevyMeasureSpec::Stable { alpha: g, c: d * g / gamma(1.0 - g), side: Side::Positive });
            } else {
                return Ok(None);
            }
        }
        if drift < 0.0 {
            return Ok(None);
        }
        let nu = if parts.is_empty() { LevyMeasureSpec::Zero } else { LevyMeasureSpec::Sum(parts) };
        Ok(Some(LevyTriplet::subordinator(drift, nu)?))
    }
}

/// Coefficients `A_i`, `B_{i,j}`, `C_i` assembled into `f`, with equal
/// exponents merged and vanishing coefficients removed.
pub fn preimage_polynomial(spec: &StableConvolutionSpec, a: f64, sigma: f64) -> PreimagePolynomialForm {
    let s2 = sigma * sigma;
    let comps = spec.components();
    let mut raw: Vec<(f64, f64, f64)> = Vec::new(); // (exponent, coefficient, magnitude scale)
    for (i, si) in comps.iter().enumerate() {
        let g1 = gamma(1.0 - si.alpha);
        let t1 = (a - s2 / 2.0) * si.c * g1;
        let t2 = s2 / 2.0 * si.c * gamma(2.0 - si.alpha);
        raw.push((si.alpha, t1 + t2, t1.abs() + t2.abs()));
        for sj in &comps[..i] {
            let b = s2 * si.c * sj.c * g1 * gamma(1.0 - sj.alpha);
            raw.push((si.alpha + sj.alpha, b, b));
        }
        let c = s2 / 2.0 * si.c * si.c * g1 * g1;
        raw.push((2.0 * si.alpha, c, c));
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64, f64)> = Vec::new();
    for (g, d, m) in raw {
        match merged.last_mut() {
            Some(last) if (last.0 - g).abs() <= 1e-12 => {
                last.1 += d;
                last.2 += m;
            }
            _ => merged.push((g, d, m)),
        }
    }
    let terms = merged
        .into_iter()
        .filter(|&(_, d, m)| d.abs() > 1e-14 * m)
        .map(|(g, d, _)| (g, d))
        .collect();
    PreimagePolynomialForm { terms }
}

/// Bernstein test for `Σ D_i u^{γ_i}`: `γ_m ≤ 1`, `D_m ≥ 0`, and the Lévy
/// density `Σ_{γ_i<1} D_iγ_i/Γ(1−γ_i) x^{−1−γ_i}` non-negative on `(0, ∞)`.
/// Returns the decision and a description of the first failed condition.
pub fn power_sum_is_bernstein(form: &PreimagePolynomialForm) -> (Decision, String) {
    let Some(&(gm, dm)) = form.terms.last() else {
        return (Decision::Accept, "f vanishes identically".into());
    };
    if gm > 1.0 + 1e-12 {
        return (Decision::Reject, format!("f grows like u^{gm:.6}, faster than linearly"));
    }
    if dm < 0.0 {
        return (Decision::Reject, format!("leading coefficient {dm:.6e} of u^{gm:.6} is negative"));
    }
    // density coefficients E_i for exponents below 1
    let e: Vec<(f64, f64)> = form
        .terms
        .iter()
        .filter(|(g, _)| *g < 1.0 - 1e-12)
        .map(|&(g, d)| (g, d * g / gamma(1.0 - g)))
        .collect();
    if e.is_empty() {
        return (Decision::Accept, "pure drift".into());
    }
    // x → 0 is governed by the largest exponent, x → ∞ by the smallest.
    let (g_hi, e_hi) = e[e.len() - 1];
    let (g_lo, e_lo) = e[0];
    if e_hi < 0.0 {
        return (Decision::Reject, format!("Lévy density negative near 0 (term x^(-1-{g_hi:.6}))"));
    }
    if e_lo < 0.0 {
        return (Decision::Reject, format!("Lévy density negative near infinity (term x^(-1-{g_lo:.6}))"));
    }
    // Grid spanning every pairwise crossover scale by three decades.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &(gi, ei)) in e.iter().enumerate() {
        for &(gj, ej) in &e[..i] {
            let x = (ei.abs() / ej.abs()).powf(1.0 / (gi - gj));
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        lo = 1.0;
        hi = 1.0;
    }
    let grid = crate::levy::log_grid(lo * 1e-3, hi * 1e3, 400);
    let mut marginal = None;
    for x in grid {
        let (mut h, mut mag) = (0.0, 0.0);
        for &(g, c) in &e {
            let t = c * x.powf(-g);
            h += t;
            mag += t.abs();
        }
        let rel = h / mag;
        if rel < -1e-10 {
            return (Decision::Reject, format!("Lévy density negative at x = {x:.6e}"));
        }
        if rel < 1e-10 && marginal.is_none() {
            marginal = Some(x);
        }
    }
    match marginal {
        Some(x) => (Decision::Inconclusive, format!("Lévy density numerically zero at x = {x:.6e}")),
        None => (Decision::Accept, "Lévy density positive on the verification grid".into()),
    }
}

/// Range decision for a finite stable convolution under `ξ_t = σB_t + at`.
pub fn stable_range_check(spec: &StableConvolutionSpec, a: f64, sigma: f64) -> Result<RangeVerdict> {
    if !(a > 0.0 && sigma > 0.0) {
        return Err(Error::domain("a and sigma must be positive"));
    }
    let theta = 2.0 * a / (sigma * sigma);
    let comps = spec.components();
    let a1 = comps[0].alpha;
    let an = comps[comps.len() - 1].alpha;
    if let Some(s) = comps.iter().find(|s| s.b > 0.0) {
        return Ok(RangeVerdict::reject(format!(
            "component with index {} has drift {} > 0; elements of the range have drift 0",
            s.alpha, s.b
        )));
    }
    if an > 0.5 {
        return Ok(RangeVerdict::reject(format!("largest index {an} exceeds 1/2")));
    }
    if a1 > theta {
        return Ok(RangeVerdict::reject(format!("smallest index {a1} exceeds 2a/sigma^2 = {theta}")));
    }
    let form = preimage_polynomial(spec, a, sigma);
    if an <= theta.min(0.5) {
        let witness = EtaWitness::new(form.eta_exponent(), form.eta_triplet()?)?;
        return Ok(RangeVerdict::accept(
            witness,
            format!("all indices <= min(2a/sigma^2, 1/2) = {}", theta.min(0.5)),
        ));
    }
    let (decision, why) = power_sum_is_bernstein(&form);
    Ok(match decision {
        Decision::Accept => RangeVerdict::accept(
            EtaWitness::new(form.eta_exponent(), form.eta_triplet()?)?,
            format!("mixed-sign pre-image exponent is Bernstein: {why}"),
        ),
        Decision::Reject => RangeVerdict::reject(format!("pre-image exponent is not Bernstein: {why}")),
        Decision::Inconclusive => RangeVerdict::inconclusive(why),
    })
}

/// Pre-image `η` of the positive `α`-stable law with density `c x^{−1−α}`.
pub fn stable_preimage(alpha: f64, c: f64, a: f64, sigma: f64) -> Result<LevyTriplet> {
    let spec = StableConvolutionSpec::single(alpha, c)?;
    let verdict = stable_range_check(&spec, a, sigma)?;
    if verdict.decision != Decision::Accept {
        return Err(Error::domain(format!("no subordinator pre-image: {}", verdict.certificate)));
    }
    let s2 = sigma * sigma;
    let mut parts = Vec::new();
    let first = c * alpha * (a - s2 * alpha / 2.0);
    if first > 0.0 {
        parts.push(LevyMeasureSpec::Stable { alpha, c: first, side: Side::Positive });
    }
    let g1 = gamma(1.0 - alpha);
    let drift = if alpha < 0.5 {
        let second = s2 * c * c * alpha * g1 * g1 / gamma(1.0 - 2.0 * alpha);
        parts.push(LevyMeasureSpec::Stable { alpha: 2.0 * alpha, c: second, side: Side::Positive });
        0.0
    } else {
        s2 * c * c * g1 * g1 / 2.0
    };
    let nu = if parts.is_empty() { LevyMeasureSpec::Zero } else { LevyMeasureSpec::Sum(parts) };
    LevyTriplet::subordinator(drift, nu)
}

/// Discrete mixing measure `m(dα) = Σ mass_j δ_{α_j}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StableMixingMeasure {
    pub atoms: Vec<(f64, f64)>,
}

/// `ψ(u) = −Σ_j mass_j Γ(1−α_j)/α_j u^{α_j}`.
pub fn closure_class_psi(m: &StableMixingMeasure) -> Result<LaplaceExponent> {
    let mut terms = Vec::new();
    for &(alpha, mass) in &m.atoms {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("mixing atom at alpha = {alpha} outside (0, 1)")));
        }
        if !(mass > 0.0) {
            return Err(Error::domain("mixing masses must be positive"));
        }
        terms.push(PowerTerm { coef: -mass * gamma(1.0 - alpha) / alpha, exponent: alpha });
    }
    Ok(LaplaceExponent::power_sum(0.0, terms))
}

/// Whether `∫e^{−(σB_t+at)}dt` is the `1/2`-stable (Lévy) law, i.e. `a = σ²/4`.
pub fn dufresne_check(a: f64, sigma: f64) -> bool {
    let theta = 2.0 * a / (sigma * sigma);
    (theta - 0.5).abs() <= 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_psi_examples() {
        let p = LaplaceExponent::stable(0.5, 1.0, 0.0).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert!((p.eval(1.0).unwrap() + 2.0 * sp).abs() < 1e-14);
        assert!((p.eval(4.0).unwrap() + 4.0 * sp).abs() < 1e-13);
        assert!((p.deriv1(1.0).unwrap() + sp).abs() < 1e-14);
        assert!(LaplaceExponent::stable(1.2, 1.0, 0.0).is_err());
    }

    #[test]
    fn decision_table() {
        let one = |al: f64| StableConvolutionSpec::single(al, 1.0).unwrap();
        assert_eq!(stable_range_check(&one(0.6), 1.0, 1.0).unwrap().decision, Decision::Reject);
        assert_eq!(stable_range_check(&one(0.4), 0.05, 1.0).unwrap().decision, Decision::Reject);
        assert_eq!(stable_range_check(&one(0.4), 1.0, 1.0).unwrap().decision, Decision::Accept);
        let two = StableConvolutionSpec::new(vec![
            StableComponent { alpha: 0.2, c: 1.0, b: 0.0 },
            StableComponent { alpha: 0.5, c: 1.0, b: 0.0 },
        ])
        .unwrap();
        assert_eq!(stable_range_check(&two, 1.0, 1.0).unwrap().decision, Decision::Accept);
    }

    #[test]
    fn positive_drift_rejects() {
        let s = StableConvolutionSpec::new(vec![StableComponent { alpha: 0.3, c: 1.0, b: 0.1 }]).unwrap();
        assert_eq!(stable_range_check(&s, 1.0, 1.0).unwrap().decision, Decision::Reject);
    }

    #[test]
    fn preimage_coefficients() {
        let t = stable_preimage(0.4, 1.0, 1.0, 1.0).unwrap();
        let LevyMeasureSpec::Sum(parts) = &t.levy_measure else { panic!() };
        let coef = |i: usize| match parts[i] {
            LevyMeasureSpec::Stable { c, .. } => c,
            _ => panic!(),
        };
        assert!((coef(0) - 0.32).abs() < 1e-15);
        let expected = 0.4 * gamma(0.6).powi(2) / gamma(0.2);
        assert!((coef(1) - expected).abs() < 1e-14);
        assert!((coef(1) - 0.19322).abs() < 1e-5);
        assert_eq!(t.fv_drift().unwrap(), Some(0.0));
    }

    #[test]
    fn half_stable_preimage_is_pure_drift() {
        let t = stable_preimage(0.5, 1.0, 0.25, 1.0).unwrap();
        assert!(t.levy_measure.is_zero());
        assert!((t.fv_drift().unwrap().unwrap() - std::f64::consts::PI / 2.0).abs() < 1e-14);
        let f = preimage_polynomial(&StableConvolutionSpec::single(0.5, 1.0).unwrap(), 0.25, 1.0);
        assert_eq!(f.coefficient(0.5), 0.0);
    }

    #[test]
    fn preimage_refused_outside_range() {
        assert!(matches!(stable_preimage(0.6, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closure_class() {
        let m = StableMixingMeasure { atoms: vec![(0.5, 0.5 / std::f64::consts::PI.sqrt())] };
        let p = closure_class_psi(&m).unwrap();
        assert!((p.eval(9.0).unwrap() + 3.0).abs() < 1e-14);
        assert_eq!(closure_class_psi(&StableMixingMeasure::default()).unwrap().eval(2.0).unwrap(), 0.0);
        assert!(closure_class_psi(&StableMixingMeasure { atoms: vec![(1.0, 1.0)] }).is_err());
    }

    #[test]
    fn dufresne_examples() {
        assert!(dufresne_check(0.25, 1.0));
        assert!(!dufresne_check(1.0, 1.0));
        assert!(dufresne_check(0.5, 2f64.sqrt()));
    }

    #[test]
    fn residual_zone_uses_exact_density_test() {
        // α₁ = 0.1 ≤ θ = 0.2 < α₂ = 0.3: the u^{0.3} coefficient is negative.
        let mk = |c2: f64| {
            StableConvolutionSpec::new(vec![
                StableComponent { alpha: 0.1, c: 1.0, b: 0.0 },
                StableComponent { alpha: 0.3, c: c2, b: 0.0 },
            ])
            .unwrap()
        };
        let small = stable_range_check(&mk(1e-3), 0.1, 1.0).unwrap();
        let large = stable_range_check(&mk(10.0), 0.1, 1.0).unwrap();
        // Compare against a brute-force Bernstein test of f.
        for (spec, verdict) in [(mk(1e-3), small), (mk(10.0), large)] {
            let form = preimage_polynomial(&spec, 0.1, 1.0);
            let bf = crate::levy::is_bernstein(&|u| Ok(form.eval(u)), &crate::levy::BernsteinOptions::default())
                .unwrap();
            if bf.decision != Decision::Inconclusive && verdict.decision != Decision::Inconclusive {
                assert_eq!(bf.decision, verdict.decision, "{}", verdict.certificate);
            }
        }
    }
}
