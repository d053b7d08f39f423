//! `ξ_t = σB_t + at`: the second-order ODE for `𝕃_V`, the Riccati map
//! `ψ_X ↦ ψ_η`, Frobenius series solutions and the nesting harness.

use crate::error::{Error, Result};
use crate::levy::{Decision, LaplaceExponent, LevyMeasureSpec, LevyTriplet, Side};
use crate::range::{decide_membership, PositiveLawSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmDriftParams {
    pub a: f64,
    pub sigma: f64,
    pub sigma2: f64,
}

impl BmDriftParams {
    pub fn new(a: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("drift a must be positive, got {a}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(BmDriftParams { a, sigma, sigma2: sigma * sigma })
    }

    /// `σ² = 2` exactly and `a = θ`, the normalisation used when only `θ`
    /// is given.
    pub fn from_theta(theta: f64) -> Result<Self> {
        let mut p = BmDriftParams::new(theta, std::f64::consts::SQRT_2)?;
        p.sigma2 = 2.0;
        Ok(p)
    }

    /// `θ = 2a/σ²`, the non-zero indicial root.
    pub fn theta(&self) -> f64 {
        2.0 * self.a / self.sigma2
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `θ` within `10⁻⁶` of an integer (resonant Frobenius exponents).
    pub fn theta_near_integer(&self) -> bool {
        let t = self.theta();
        (t - t.round()).abs() < 1e-6
    }

    pub fn triplet(&self) -> LevyTriplet {
        LevyTriplet { gamma: self.a, sigma2: self.sigma2(), levy_measure: LevyMeasureSpec::Zero }
    }
}

/// `(σ²/2)u²𝕃″ + (σ²/2 − a)u𝕃′ + ψ_η𝕃` at `u`, where `lv` returns
/// `(𝕃, 𝕃′, 𝕃″)`.
pub fn ode_residual(
    lv: &dyn Fn(f64) -> Result<(f64, f64, f64)>,
    psi_eta: &LaplaceExponent,
    p: &BmDriftParams,
    u: f64,
) -> Result<f64> {
    let (l, l1, l2) = lv(u)?;
    let s2 = p.sigma2();
    Ok(s2 / 2.0 * u * u * l2 + (s2 / 2.0 - p.a) * u * l1 + psi_eta.eval(u)? * l)
}

/// `ψ_η(u) = aψ_X(u) − (σ²/2)uψ_X′(u) − (σ²/2)ψ_X(u)²`.
pub fn riccati_eta_from_x(psi_x: &LaplaceExponent, p: &BmDriftParams, u: f64) -> Result<f64> {
    let (x, x1, _) = psi_x.eval_with_derivs(u)?;
    let s2 = p.sigma2();
    Ok(p.a * x - s2 / 2.0 * u * x1 - s2 / 2.0 * x * x)
}

/// `ψ_X(u) = uψ_V′(u)`; checks `ψ_X ≥ ψ_V`, which holds for every
/// exponent of a positive law.
pub fn psi_x_from_v(psi_v: &LaplaceExponent, u: f64) -> Result<f64> {
    let (v, v1, _) = psi_v.eval_with_derivs(u)?;
    let x = u * v1;
    if x < v - 1e-9 * (1.0 + v.abs()) {
        return Err(Error::numeric(format!("u psi_V'(u) = {x} < psi_V(u) = {v} at u = {u}; psi_V is not concave")));
    }
    Ok(x)
}

/// `k(x) = ν_X((x, ∞))`.
pub fn k_from_nu_x(nu_x: &LevyMeasureSpec, x: f64) -> Result<f64> {
    if nu_x.has_mass_on(Side::Negative) {
        return Err(Error::domain("nu_X must live on (0, inf)"));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("k evaluated at x = {x}")));
    }
    nu_x.tail(Side::Positive, x)
}

/// `𝕃_V(u) = C₁u^θ Σ c_n uⁿ + C₂ Σ d_n uⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusSeries {
    pub theta: f64,
    pub sigma2: f64,
    /// `f_n`, `n ≥ 1`, of `ψ_η(u) = Σ f_n uⁿ` (`f_coeffs[0]` is `f₁`).
    pub f_coeffs: Vec<f64>,
    /// `c_0 = 1, c_1, …, c_N`.
    pub c_coeffs: Vec<f64>,
    pub d_coeffs: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub truncation_n: usize,
    /// Largest `u` at which the last retained terms stay below `10⁻⁸`.
    pub radius_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub u: f64,
    pub value: f64,
    pub error_bound: f64,
}

const TRUNCATION_TOL: f64 = 1e-8;

/// `x_n = −(n(n + r))^{−1} Σ_{k<n} x_k f̃_{n−k}` with `f̃ = 2f/σ²`.
pub fn frobenius_coefficients(f: &[f64], sigma2: f64, r: f64, n_max: usize) -> Vec<f64> {
    let ft: Vec<f64> = f.iter().map(|v| 2.0 * v / sigma2).collect();
    let mut x = vec![1.0];
    for n in 1..=n_max {
        let s: f64 = (n.saturating_sub(ft.len())..n).map(|k| x[k] * ft[n - k - 1]).sum();
        x.push(-s / (n as f64 * (n as f64 + r)));
    }
    x
}

impl FrobeniusSeries {
    fn parts(&self, u: f64) -> (f64, f64, f64, f64) {
        // (Σc_n uⁿ, Σd_n uⁿ, Σ|c_n|uⁿ, Σ|d_n|uⁿ) by Horner
        let mut acc = (0.0, 0.0, 0.0, 0.0);
        for n in (0..self.c_coeffs.len()).rev() {
            acc.0 = acc.0 * u + self.c_coeffs[n];
            acc.1 = acc.1 * u + self.d_coeffs[n];
            acc.2 = acc.2 * u + self.c_coeffs[n].abs();
            acc.3 = acc.3 * u + self.d_coeffs[n].abs();
        }
        acc
    }

    /// `|C₁|u^θ|c_N|u^N + |d_N|u^N`, in log space. Coefficients that
    /// underflowed are replaced by a geometric extrapolation from the last
    /// non-zero pair.
    fn tail_bound(&self, u: f64) -> f64 {
        let lu = u.ln();
        let c = log_tail(&self.c_coeffs, lu);
        let d = log_tail(&self.d_coeffs, lu);
        let c = if self.c1 == 0.0 { 0.0 } else { (self.c1.abs().ln() + self.theta * lu + c).exp() };
        c + d.exp()
    }

    pub fn eval(&self, u: f64) -> Result<SeriesPoint> {
        if !(u > 0.0) {
            return Err(Error::domain(format!("series evaluated at u = {u}")));
        }
        let tail = self.tail_bound(u);
        if !(tail <= TRUNCATION_TOL) {
            return Err(Error::numeric(format!(
                "series truncation error {tail:.3e} at u = {u} exceeds {TRUNCATION_TOL:e}; increase N or use smaller u"
            )));
        }
        let (y1, y2, a1, a2) = self.parts(u);
        let ut = u.powf(self.theta);
        let value = self.c1 * ut * y1 + self.c2 * y2;
        let roundoff = 4.0 * f64::EPSILON * (self.c1.abs() * ut * a1 + self.c2.abs() * a2);
        Ok(SeriesPoint { u, value, error_bound: tail + roundoff })
    }

    /// `𝕃_V` and its first two derivatives by term-wise differentiation.
    pub fn eval_with_derivs(&self, u: f64) -> Result<(f64, f64, f64)> {
        self.eval(u)?;
        let th = self.theta;
        let (mut l, mut l1, mut l2) = (0.0, 0.0, 0.0);
        for n in 0..self.c_coeffs.len() {
            let nf = n as f64;
            let e = nf + th;
            let cc = self.c1 * self.c_coeffs[n];
            l += cc * u.powf(e);
            l1 += cc * e * u.powf(e - 1.0);
            l2 += cc * e * (e - 1.0) * u.powf(e - 2.0);
            let dd = self.c2 * self.d_coeffs[n];
            if n == 0 {
                l += dd;
                continue;
            }
            l += dd * u.powi(n as i32);
            l1 += dd * nf * u.powi(n as i32 - 1);
            if n >= 2 {
                l2 += dd * nf * (nf - 1.0) * u.powi(n as i32 - 2);
            }
        }
        Ok((l, l1, l2))
    }
}

/// `ln |x_N u^N|`, or its geometric extrapolation from the last index `m`
/// with `x_m ≠ 0`.
fn log_tail(x: &[f64], lu: f64) -> f64 {
    let n = x.len() - 1;
    let Some(m) = (0..=n).rev().find(|&i| x[i] != 0.0) else {
        return f64::NEG_INFINITY;
    };
    let lm = x[m].abs().ln() + m as f64 * lu;
    if m == n {
        return lm;
    }
    if m == 0 || x[m - 1] == 0.0 {
        return f64::NEG_INFINITY;
    }
    // ratio of consecutive terms near the end
    let lr = (x[m] / x[m - 1]).abs().ln() + lu;
    if lr >= 0.0 {
        return f64::INFINITY;
    }
    lm + (n - m) as f64 * lr
}

/// Largest `u` (up to `cap`) with the truncation tail below tolerance,
/// found on a doubling ladder refined by bisection.
fn certified_radius(s: &FrobeniusSeries, cap: f64) -> f64 {
    let ok = |u: f64| s.tail_bound(u) <= TRUNCATION_TOL;
    if !ok(1e-12) {
        return 0.0;
    }
    let mut lo = 1e-12;
    while lo * 2.0 <= cap && ok(lo * 2.0) {
        lo *= 2.0;
    }
    if lo * 2.0 > cap {
        return cap;
    }
    let mut hi = lo * 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

const RADIUS_CAP: f64 = 1e6;

/// `C₁` from `𝕃_V(∞) = 0`: `C₁ = −lim Σd_n uⁿ / (u^θ Σc_n uⁿ)`, read off the
/// plateau of that ratio on a doubling ladder inside the certified radius.
fn fit_c1(s: &FrobeniusSeries) -> Result<f64> {
    let r_max = s.radius_estimate;
    let mut ratios = Vec::new();
    let mut u = 1e-2;
    while u <= r_max {
        let (y1, y2, _, _) = s.parts(u);
        let r = -y2 / (u.powf(s.theta) * y1);
        if r.is_finite() {
            ratios.push((u, r));
        }
        u *= 2.0;
    }
    if ratios.len() < 3 {
        return Err(Error::numeric(format!(
            "certified radius {r_max:.3e} too small to fit C1; increase N or supply C1"
        )));
    }
    let best = ratios
        .windows(2)
        .min_by(|x, y| (x[1].1 - x[0].1).abs().total_cmp(&(y[1].1 - y[0].1).abs()))
        .expect("at least two ratios");
    Ok(best[1].1)
}

/// Frobenius solution of the ODE for `𝕃_V` when `ψ_η(u) = Σ f_n uⁿ`.
/// `C₂ = 1`; `C₁` is taken from `c1` or fitted from `𝕃_V(∞) = 0`.
pub fn frobenius_solve(
    f: &[f64],
    p: &BmDriftParams,
    n: usize,
    u_grid: &[f64],
    c1: Option<f64>,
) -> Result<(FrobeniusSeries, Vec<SeriesPoint>)> {
    if p.theta_near_integer() {
        return Err(Error::Unsupported(format!("theta = {} is (near) an integer; resonant case", p.theta())));
    }
    if n < 1 {
        return Err(Error::domain("truncation order N must be >= 1"));
    }
    let theta = p.theta();
    let sigma2 = p.sigma2();
    let mut s = FrobeniusSeries {
        theta,
        sigma2,
        f_coeffs: f.to_vec(),
        c_coeffs: frobenius_coefficients(f, sigma2, theta, n),
        d_coeffs: frobenius_coefficients(f, sigma2, -theta, n),
        c1: 0.0,
        c2: 1.0,
        truncation_n: n,
        radius_estimate: 0.0,
    };
    s.radius_estimate = certified_radius(&s, RADIUS_CAP);
    s.c1 = match c1 {
        Some(c) => c,
        None if f.iter().all(|&v| v == 0.0) => 0.0,
        None => fit_c1(&s)?,
    };
    // C₁ enters the tail bound
    s.radius_estimate = certified_radius(&s, RADIUS_CAP);
    let points = u_grid.iter().map(|&u| s.eval(u)).collect::<Result<Vec<_>>>()?;
    Ok((s, points))
}

/// One `(a, σ)` entry of a nesting report.
#[derive(Debug, Clone, PartialEq)]
pub struct NestingEntry {
    pub a: f64,
    pub sigma: f64,
    pub theta: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestingReport {
    /// Entries sorted by `θ = 2a/σ²`.
    pub entries: Vec<NestingEntry>,
    /// Index pairs `(i, j)`, `i < j`, accepted at `i` but rejected at `j`.
    pub violations: Vec<(usize, usize)>,
}

/// Decide `μ` at every `(a, σ)` and report failures of monotone acceptance
/// in `θ = 2a/σ²`. Inconclusive entries are ignored.
pub fn nesting_witness(mu: &PositiveLawSpec, pairs: &[(f64, f64)]) -> Result<NestingReport> {
    let mut entries = Vec::with_capacity(pairs.len());
    for &(a, sigma) in pairs {
        let p = BmDriftParams::new(a, sigma)?;
        let v = decide_membership(mu, &p.triplet())?;
        entries.push(NestingEntry { a, sigma, theta: p.theta(), decision: v.decision });
    }
    entries.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    let mut violations = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if entries[i].decision == Decision::Accept
                && entries[j].decision == Decision::Reject
                && entries[j].theta > entries[i].theta
            {
                violations.push((i, j));
            }
        }
    }
    Ok(NestingReport { entries, violations })
}
