//! Numerical test for Bernstein functions: `f ≥ 0` and
//! `(−1)^{n−1} f^{(n)} ≥ 0` for `n = 1..max_order`, with finite-difference
//! derivatives and explicit error bounds so that only certified violations
//! reject.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-valued outcome shared by every decision procedure in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
    Inconclusive,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Accept => "accept",
            Decision::Reject => "reject",
            Decision::Inconclusive => "inconclusive",
        }
    }
}

/// A sign violation `(−1)^{n−1} f^{(n)}(u) < 0` (order 0 means `f(u) < 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub u: f64,
    pub order: usize,
    /// Signed value of `(−1)^{n−1} f^{(n)}(u)` (or `f(u)` for order 0).
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridInfo {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinVerdict {
    pub decision: Decision,
    pub max_order_checked: usize,
    pub violation: Option<Violation>,
    pub grid: GridInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinOptions {
    pub grid: Vec<f64>,
    pub max_order: usize,
    /// Assumed relative accuracy of each evaluation of `f`.
    pub rel_accuracy: f64,
    /// A violation is certified once it exceeds this multiple of its error bound.
    pub reject_factor: f64,
}

impl Default for BernsteinOptions {
    fn default() -> Self {
        BernsteinOptions { grid: log_grid(1e-3, 1e3, 200), max_order: 6, rel_accuracy: 1e-13, reject_factor: 8.0 }
    }
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central difference `h^{−n} Σ_k (−1)^k C(n,k) f(u + (n/2 − k)h)` and the
/// roundoff bound implied by `rel_accuracy`.
fn central_difference(
    f: &dyn Fn(f64) -> Result<f64>,
    u: f64,
    n: usize,
    h: f64,
    rel_accuracy: f64,
) -> Result<(f64, f64)> {
    let mut acc = 0.0;
    let mut mag = 0.0;
    for k in 0..=n {
        let x = u + (n as f64 / 2.0 - k as f64) * h;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::numeric(format!("non-finite evaluation at u = {x:.6e}")));
        }
        let w = binomial(n, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += w * v;
        mag += w.abs() * v.abs();
    }
    let hn = h.powi(n as i32);
    Ok((acc / hn, (rel_accuracy + 4.0 * f64::EPSILON) * mag / hn))
}

/// Signed quantity `(−1)^{n−1} f^{(n)}(u)` with an error bound.
fn signed_derivative(f: &dyn Fn(f64) -> Result<f64>, u: f64, n: usize, rel_accuracy: f64) -> Result<(f64, f64)> {
    let h = u * f64::EPSILON.powf(1.0 / (n as f64 + 2.0));
    let (d1, r1) = central_difference(f, u, n, h, rel_accuracy)?;
    let (d2, r2) = central_difference(f, u, n, 2.0 * h, rel_accuracy)?;
    // Richardson: the O(h²) truncation term cancels in (4 D(h) − D(2h)) / 3.
    let value = (4.0 * d1 - d2) / 3.0;
    let err = (d1 - d2).abs() / 3.0 + (4.0 * r1 + r2) / 3.0;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok((sign * value, err))
}

/// Test whether `f` is a Bernstein function on the grid of `opts`.
pub fn is_bernstein(f: &dyn Fn(f64) -> Result<f64>, opts: &BernsteinOptions) -> Result<BernsteinVerdict> {
    let grid = &opts.grid;
    if grid.len() < 2 || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("Bernstein grid must be positive and strictly increasing"));
    }
    if opts.max_order < 1 {
        return Err(Error::domain("max_order must be at least 1"));
    }
    let info = GridInfo { lo: grid[0], hi: grid[grid.len() - 1], points: grid.len() };
    let mut worst_marginal: Option<Violation> = None;
    for order in 0..=opts.max_order {
        for &u in grid {
            let (value, err) = if order == 0 {
                let v = f(u)?;
                if !v.is_finite() {
                    return Err(Error::numeric(format!("non-finite evaluation at u = {u:.6e}")));
                }
                (v, (opts.rel_accuracy + 4.0 * f64::EPSILON) * v.abs() + f64::MIN_POSITIVE)
            } else {
                signed_derivative(f, u, order, opts.rel_accuracy)?
            };
            if value >= -err {
                continue;
            }
            let v = Violation { u, order, value, error_bound: err };
            if value < -opts.reject_factor * err {
                return Ok(BernsteinVerdict {
                    decision: Decision::Reject,
                    max_order_checked: order,
                    violation: Some(v),
                    grid: info,
                });
            }
            if worst_marginal.map_or(true, |w| value / err < w.value / w.error_bound) {
                worst_marginal = Some(v);
            }
        }
    }
    Ok(BernsteinVerdict {
        decision: if worst_marginal.is_some() { Decision::Inconclusive } else { Decision::Accept },
        max_order_checked: opts.max_order,
        violation: worst_marginal,
        grid: info,
    })
}

/// Outcome of the drift extrapolation `−lim ψ(u)/u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftLimit {
    pub value: f64,
    pub converged: bool,
    /// Spread of the last three extrapolated values.
    pub spread: f64,
}

fn aitken_pass(s: &[f64]) -> Vec<f64> {
    s.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let den = d2 - d1;
            if den == 0.0 || den.abs() <= 1e-15 * (w[2].abs() + d1.abs() + d2.abs()) {
                w[2]
            } else {
                w[2] - d2 * d2 / den
            }
        })
        .collect()
}

/// `−lim_{u→∞} ψ(u)/u` from `s_k = −ψ(2^k)/2^k`, `k = 10..30`, accelerated
/// by three passes of Aitken's Δ² process.
pub fn subordinator_drift_limit(psi: &dyn Fn(f64) -> Result<f64>) -> Result<DriftLimit> {
    let mut s = Vec::new();
    for k in 10..=30 {
        let u = 2f64.powi(k);
        let v = psi(u)?;
        if !v.is_finite() {
            return Err(Error::numeric(format!("non-finite exponent at u = 2^{k}")));
        }
        s.push(-v / u);
    }
    // Iterated Δ² removes several geometric error components in turn, as
    // for ψ(u) = −bu − Σ c_i u^{α_i}.
    let mut aitken = s.clone();
    for _ in 0..3 {
        aitken = aitken_pass(&aitken);
    }
    let tail = &aitken[aitken.len() - 3..];
    let value = tail[2];
    let spread = tail.iter().fold(0.0f64, |m, &x| m.max((x - value).abs()));
    let scale = value.abs().max(s[0].abs()).max(1e-300);
    let converged = spread <= 1e-6 * scale.max(1.0) || spread <= 1e-9;
    // residues of the extrapolation below 1e-8 of the first ratio count as zero drift
    let value = if value.abs() <= 1e-8 * s[0].abs().max(f64::MIN_POSITIVE) || (value < 0.0 && value.abs() <= 1e-6 * scale.max(1.0)) {
        0.0
    } else {
        value
    };
    Ok(DriftLimit { value, converged, spread })
}
