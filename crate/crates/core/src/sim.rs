//! Monte Carlo for `V = ∫_0^∞ e^{−ξ_{s−}} dη_s` and the GOU fixed point.
//!
//! Paths are generated on a uniform grid with exact jump times. Path `p`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` switched to stream
//! `offset + p`; the offsets separate the direct, primed and transformed
//! sample sets of `verify_fixed_point`. Results do not depend on the number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{log_grid, DensityShape, LevyMeasureSpec, LevyTriplet, Side};
use crate::support::SupportResult;

const STREAM_DIRECT: u64 = 0;
const STREAM_PRIMED: u64 = 1 << 40;
const STREAM_TRANSFORMED: u64 = 2 << 40;

/// Past this level `e^{−ξ}` underflows and the path stops contributing.
const XI_STOP: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon_t: f64,
    pub step_dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Jumps below this size are replaced by their mean; only used for
    /// infinite-activity measures.
    pub small_jump_cutoff: f64,
}

impl SimConfig {
    pub fn new(horizon_t: f64, step_dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let c = SimConfig { horizon_t, step_dt, n_paths, seed, small_jump_cutoff: 1e-4 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_cutoff(mut self, eps: f64) -> Result<Self> {
        self.small_jump_cutoff = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_t > 0.0 && self.horizon_t.is_finite()) {
            return Err(Error::domain("horizon must be positive and finite"));
        }
        if !(self.step_dt > 0.0 && self.step_dt <= self.horizon_t) {
            return Err(Error::domain("step must lie in (0, horizon]"));
        }
        if self.n_paths == 0 {
            return Err(Error::domain("need at least one path"));
        }
        if !(self.small_jump_cutoff > 0.0 && self.small_jump_cutoff < 1.0) {
            return Err(Error::domain("small-jump cutoff must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `max(30, 20/a)` with `a = E[ξ₁]`.
    pub fn default_horizon(xi: &LevyTriplet) -> Result<f64> {
        Ok(match xi.mean()? {
            Some(a) if a > 0.0 && a.is_finite() => (20.0 / a).max(30.0),
            _ => 30.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngLineage {
    pub seed: u64,
    pub first_stream: u64,
    pub n_streams: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    /// Bound on the mean contribution of `(T, ∞)` to any path; infinite when
    /// the remainder has no finite first moment.
    pub truncation_bound: f64,
    pub rng_lineage: RngLineage,
}

impl SampleSet {
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len() as u64;
        SampleSet { values, truncation_bound: 0.0, rng_lineage: RngLineage { seed: 0, first_stream: 0, n_streams: n } }
    }
}

#[derive(Debug, Clone)]
enum JumpSampler {
    Atoms { cum: Vec<f64>, sizes: Vec<f64> },
    /// Magnitudes `ε U^{−1/α}`.
    Pareto { eps: f64, inv_alpha: f64 },
    /// Inverse of a tabulated tail `x ↦ ν((x, ∞))`, decreasing in `x`.
    Table { xs: Vec<f64>, tails: Vec<f64> },
}

impl JumpSampler {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match self {
            JumpSampler::Atoms { cum, sizes } => {
                let r = u * cum[cum.len() - 1];
                let i = cum.partition_point(|&c| c <= r).min(sizes.len() - 1);
                sizes[i]
            }
            JumpSampler::Pareto { eps, inv_alpha } => eps * (1.0 - u).powf(-inv_alpha),
            JumpSampler::Table { xs, tails } => {
                let r = (1.0 - u) * tails[0];
                // first index with tails[i] < r
                let j = tails.partition_point(|&t| t >= r).clamp(1, xs.len() - 1);
                let (t0, t1) = (tails[j - 1], tails[j]);
                let (x0, x1) = (xs[j - 1], xs[j]);
                if t1 > 0.0 && x0 > 0.0 {
                    let w = (r / t0).ln() / (t1 / t0).ln();
                    (x0.ln() + w * (x1 / x0).ln()).exp()
                } else {
                    let w = if t0 > t1 { (t0 - r) / (t0 - t1) } else { 0.0 };
                    x0 + w * (x1 - x0)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct JumpSource {
    rate: f64,
    sign: f64,
    sampler: JumpSampler,
}

/// Drift, Gaussian scale and compound-Poisson jump sources of one process.
#[derive(Debug, Clone)]
struct PathGenerator {
    drift: f64,
    sigma: f64,
    sources: Vec<JumpSource>,
    total_rate: f64,
    cum_rates: Vec<f64>,
}

impl PathGenerator {
    fn new(t: &LevyTriplet, eps: f64) -> Result<Self> {
        let m = &t.levy_measure;
        let finite = m.is_finite()?;
        let cut = if finite { 0.0 } else { eps };
        let mut sources = Vec::new();
        for c in m.components() {
            for side in [Side::Positive, Side::Negative] {
                let rate = c.tail(side, cut)?;
                if !(rate > 0.0) {
                    continue;
                }
                if !rate.is_finite() {
                    return Err(Error::domain("jump rate beyond the cutoff is infinite"));
                }
                let sampler = sampler_for(c, side, cut, rate)?;
                sources.push(JumpSource { rate, sign: side.sign(), sampler });
            }
        }
        let drift = t.gamma - m.signed_mean_between(cut, 1.0)?;
        let mut cum_rates = Vec::with_capacity(sources.len());
        let mut acc = 0.0;
        for s in &sources {
            acc += s.rate;
            cum_rates.push(acc);
        }
        Ok(PathGenerator { drift, sigma: t.sigma2.sqrt(), sources, total_rate: acc, cum_rates })
    }

    fn next_gap(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.total_rate > 0.0 {
            let e: f64 = rng.sample(Exp1);
            e / self.total_rate
        } else {
            f64::INFINITY
        }
    }

    fn jump(&self, rng: &mut ChaCha8Rng) -> f64 {
        let i = if self.sources.len() == 1 {
            0
        } else {
            let r = rng.random::<f64>() * self.total_rate;
            self.cum_rates.partition_point(|&c| c <= r).min(self.sources.len() - 1)
        };
        let s = &self.sources[i];
        s.sign * s.sampler.sample(rng)
    }
}

fn sampler_for(c: &LevyMeasureSpec, side: Side, cut: f64, rate: f64) -> Result<JumpSampler> {
    match c {
        LevyMeasureSpec::Atoms(atoms) => {
            let mut cum = Vec::new();
            let mut sizes = Vec::new();
            let mut acc = 0.0;
            for a in atoms.iter().filter(|a| a.position * side.sign() > cut) {
                acc += a.mass;
                cum.push(acc);
                sizes.push(a.position.abs());
            }
            Ok(JumpSampler::Atoms { cum, sizes })
        }
        LevyMeasureSpec::Stable { alpha, .. } => {
            if !(cut > 0.0) {
                return Err(Error::domain("stable jumps need a positive small-jump cutoff"));
            }
            Ok(JumpSampler::Pareto { eps: cut, inv_alpha: 1.0 / alpha })
        }
        LevyMeasureSpec::Density(d) => {
            let (lo, hi) = match d.shape {
                DensityShape::Box { lo, hi } => (lo.max(cut), hi),
                _ => {
                    let mut hi = 1.0f64.max(cut * 2.0);
                    while c.tail(side, hi)? > 1e-13 * rate && hi < 1e12 {
                        hi *= 2.0;
                    }
                    (cut, hi)
                }
            };
            table_sampler(c, side, lo, hi)
        }
        LevyMeasureSpec::Tabulated(t) => table_sampler(c, side, t.lower().max(cut), t.upper()),
        _ => Err(Error::Unsupported("measure variant has no jump sampler".into())),
    }
}

fn table_sampler(c: &LevyMeasureSpec, side: Side, lo: f64, hi: f64) -> Result<JumpSampler> {
    const N: usize = 600;
    let xs: Vec<f64> = if lo > 0.0 && hi / lo > 10.0 {
        log_grid(lo, hi, N)
    } else {
        let start = if lo > 0.0 { lo } else { 0.0 };
        let mut g: Vec<f64> = (0..N).map(|i| start + (hi - start) * i as f64 / (N - 1) as f64).collect();
        if lo == 0.0 && hi > 1e-8 {
            // refine near the origin, where finite densities may still pile up
            let inner = log_grid(1e-10 * hi, hi / (N - 1) as f64, 200);
            g = std::iter::once(0.0).chain(inner).chain(g.into_iter().skip(2)).collect();
        }
        g
    };
    let mut tails = Vec::with_capacity(xs.len());
    for &x in &xs {
        tails.push(c.tail(side, x)?);
    }
    let last = tails.len() - 1;
    tails[last] = 0.0;
    for i in (0..last).rev() {
        tails[i] = tails[i].max(tails[i + 1]);
    }
    Ok(JumpSampler::Table { xs, tails })
}

#[derive(Clone, Copy)]
struct PathMode {
    /// `−1`: `Σ e^{−ξ} Δη`; `+1`: `Σ e^{ξ} Δη`.
    sign: f64,
    /// Apply each Gaussian increment of `ξ` at the start of its step (right
    /// point) rather than at the end (left point).
    gauss_first: bool,
}

struct PathOut {
    xi_end: f64,
    acc: f64,
}

/// `∫_0^d e^{c r} dr`.
fn exp_integral(c: f64, d: f64) -> f64 {
    if c == 0.0 {
        d
    } else {
        (c * d).exp_m1() / c
    }
}

fn run_path(xs: &PathGenerator, es: &PathGenerator, horizon: f64, dt: f64, mode: PathMode, rng: &mut ChaCha8Rng) -> PathOut {
    let n_steps = (horizon / dt).ceil().max(1.0) as usize;
    let h = horizon / n_steps as f64;
    let sqrt_h = h.sqrt();
    let sign = mode.sign;
    let step_drift_factor = exp_integral(sign * xs.drift, h);
    let mut xi = 0.0f64;
    let mut acc = 0.0f64;
    let mut next_xi = xs.next_gap(rng);
    let mut next_eta = es.next_gap(rng);
    for k in 0..n_steps {
        let t0 = k as f64 * h;
        let t1 = if k + 1 == n_steps { horizon } else { (k + 1) as f64 * h };
        let z_xi: f64 = if xs.sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        let z_eta: f64 = if es.sigma > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        if mode.gauss_first {
            xi += xs.sigma * sqrt_h * z_xi;
        }
        let e = (sign * xi).exp();
        if es.sigma > 0.0 {
            acc += es.sigma * sqrt_h * z_eta * e;
        }
        if next_xi >= t1 && next_eta >= t1 {
            if es.drift != 0.0 {
                acc += es.drift * e * step_drift_factor;
            }
            xi += xs.drift * (t1 - t0);
        } else {
            let mut s = t0;
            loop {
                let ev = next_xi.min(next_eta);
                let stop = ev.min(t1);
                let d = stop - s;
                if es.drift != 0.0 && d > 0.0 {
                    acc += es.drift * (sign * xi).exp() * exp_integral(sign * xs.drift, d);
                }
                xi += xs.drift * d;
                s = stop;
                if ev >= t1 {
                    break;
                }
                if next_eta <= next_xi {
                    acc += (sign * xi).exp() * es.jump(rng);
                    next_eta += es.next_gap(rng);
                } else {
                    xi += xs.jump(rng);
                    next_xi += xs.next_gap(rng);
                }
            }
        }
        if !mode.gauss_first {
            xi += xs.sigma * sqrt_h * z_xi;
        }
        if sign < 0.0 && xi > XI_STOP {
            break;
        }
    }
    PathOut { xi_end: xi, acc }
}

fn check_inputs(xi: &LevyTriplet, eta: &LevyTriplet, cfg: &SimConfig) -> Result<()> {
    cfg.validate()?;
    if let Some(m) = xi.mean()? {
        if m <= 0.0 {
            return Err(Error::domain(format!("ξ does not drift to +inf: E[ξ₁] = {m}")));
        }
    }
    for t in [xi, eta] {
        for c in t.levy_measure.components() {
            if matches!(c, LevyMeasureSpec::Stable { alpha, .. } if *alpha >= 1.0) {
                return Err(Error::Unsupported(
                    "stable components of infinite variation are not simulated".into(),
                ));
            }
        }
    }
    Ok(())
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run_paths(
    xi: &LevyTriplet,
    eta: &LevyTriplet,
    horizon: f64,
    cfg: &SimConfig,
    offset: u64,
    mode: PathMode,
) -> Result<Vec<PathOut>> {
    let xs = PathGenerator::new(xi, cfg.small_jump_cutoff)?;
    let es = PathGenerator::new(eta, cfg.small_jump_cutoff)?;
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(cfg.seed, offset + p);
            run_path(&xs, &es, horizon, cfg.step_dt, mode, &mut rng)
        })
        .collect())
}

/// `E[∫_0^∞ e^{−ξ_s} dη_s]`-type bound for the remainder after `T`, per
/// unit of `e^{−ξ_T}`; infinite when no finite bound is available.
fn remainder_scale(xi: &LevyTriplet, eta: &LevyTriplet) -> Result<f64> {
    let l1 = xi.log_exp_moment()?;
    if !(l1 < 0.0) {
        return Ok(f64::INFINITY);
    }
    let m = &eta.levy_measure;
    let abs_jumps = m.moment_near_zero(Side::Positive, 1.0)?
        + m.moment_near_zero(Side::Negative, 1.0)?
        + m.large_jump_mean(Side::Positive)?
        + m.large_jump_mean(Side::Negative)?;
    let drift = match eta.fv_drift()? {
        Some(b) => b.abs(),
        None => eta.gamma.abs(),
    };
    let mut bound = (drift + abs_jumps) / -l1;
    if eta.sigma2 > 0.0 {
        // L² bound for the Brownian part; needs ln E e^{−2ξ₁}, known here only
        // without jumps.
        if !xi.levy_measure.is_zero() {
            return Ok(f64::INFINITY);
        }
        let l2 = -2.0 * xi.gamma + 2.0 * xi.sigma2;
        if !(l2 < 0.0) {
            return Ok(f64::INFINITY);
        }
        bound += (eta.sigma2 / -l2).sqrt();
    }
    Ok(bound)
}

/// Samples of the left-point discretisation of `∫_0^T e^{−ξ_{s−}} dη_s`.
pub fn simulate_functional(xi: &LevyTriplet, eta: &LevyTriplet, cfg: &SimConfig) -> Result<SampleSet> {
    check_inputs(xi, eta, cfg)?;
    simulate_with_offset(xi, eta, cfg, STREAM_DIRECT)
}

fn simulate_with_offset(xi: &LevyTriplet, eta: &LevyTriplet, cfg: &SimConfig, offset: u64) -> Result<SampleSet> {
    let out = run_paths(xi, eta, cfg.horizon_t, cfg, offset, PathMode { sign: -1.0, gauss_first: false })?;
    let scale = remainder_scale(xi, eta)?;
    let min_xi = out.iter().fold(f64::INFINITY, |m, p| m.min(p.xi_end));
    let truncation_bound = if scale == 0.0 { 0.0 } else { (-min_xi).exp() * scale };
    let values: Vec<f64> = out.iter().map(|p| p.acc).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("simulated functional is not finite"));
    }
    Ok(SampleSet {
        values,
        truncation_bound,
        rng_lineage: RngLineage { seed: cfg.seed, first_stream: offset, n_streams: cfg.n_paths as u64 },
    })
}

/// Mean and standard error of `e^{−u V̂}`.
pub fn empirical_laplace(samples: &SampleSet, u: f64) -> Result<(f64, f64)> {
    let v = &samples.values;
    if v.is_empty() {
        return Err(Error::domain("empty sample set"));
    }
    if !(u > 0.0) {
        return Err(Error::domain("Laplace argument must be positive"));
    }
    let n = v.len() as f64;
    let ys: Vec<f64> = v.iter().map(|x| (-u * x).exp()).collect();
    let mean = ys.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value. Values
/// within `1e-9` (relative) are treated as ties.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return (0.0, 1.0);
    }
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        let tol = 1e-9 * (1.0 + v.abs());
        while i < n && x[i] <= v + tol {
            i += 1;
        }
        while j < m && y[j] <= v + tol {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² λ²}`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub t_check: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub passed: bool,
    pub n_direct: usize,
    pub n_transformed: usize,
}

pub const KS_SIGNIFICANCE: f64 = 1e-3;

/// Compare direct samples of `V̂` with `e^{−ξ_t}(V̂′ + ∫_0^t e^{ξ_{s−}} dη_s)`.
pub fn verify_fixed_point(xi: &LevyTriplet, eta: &LevyTriplet, cfg: &SimConfig, t_check: f64) -> Result<FixedPointReport> {
    verify_fixed_point_scaled(xi, eta, cfg, t_check, 1.0)
}

/// As [`verify_fixed_point`] with `V̂′` multiplied by `primed_scale`; any
/// value other than 1 breaks the identity and serves as a negative control.
pub fn verify_fixed_point_scaled(
    xi: &LevyTriplet,
    eta: &LevyTriplet,
    cfg: &SimConfig,
    t_check: f64,
    primed_scale: f64,
) -> Result<FixedPointReport> {
    check_inputs(xi, eta, cfg)?;
    if !(t_check > 0.0 && t_check.is_finite()) {
        return Err(Error::domain("t_check must be positive"));
    }
    let direct = simulate_with_offset(xi, eta, cfg, STREAM_DIRECT)?;
    let primed = simulate_with_offset(xi, eta, cfg, STREAM_PRIMED)?;
    // The right-point rule on [0, t] is the time reversal of the left-point
    // rule, so the transformed samples share the law of the direct ones.
    let dt = cfg.step_dt.min(t_check);
    let short = SimConfig { step_dt: dt, ..*cfg };
    let tr = run_paths(xi, eta, t_check, &short, STREAM_TRANSFORMED, PathMode { sign: 1.0, gauss_first: true })?;
    let transformed: Vec<f64> = tr
        .iter()
        .zip(&primed.values)
        .map(|(p, v)| (-p.xi_end).exp() * (primed_scale * v + p.acc))
        .collect();
    let (d, p) = ks_two_sample(&direct.values, &transformed);
    Ok(FixedPointReport {
        t_check,
        ks_statistic: d,
        p_value: p,
        passed: p > KS_SIGNIFICANCE,
        n_direct: direct.values.len(),
        n_transformed: transformed.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub fraction_outside: f64,
    pub min_sample: f64,
    pub max_sample: f64,
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
}

pub const SUPPORT_TOLERANCE: f64 = 1e-2;

pub fn support_consistency(samples: &SampleSet, claimed: &SupportResult) -> SupportReport {
    let v = &samples.values;
    let outside = v.iter().filter(|&&x| !claimed.contains(x, SUPPORT_TOLERANCE)).count();
    SupportReport {
        fraction_outside: if v.is_empty() { 0.0 } else { outside as f64 / v.len() as f64 },
        min_sample: v.iter().copied().fold(f64::INFINITY, f64::min),
        max_sample: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lower: claimed.lower,
        upper: claimed.upper,
        tolerance: SUPPORT_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::DensityShape;

    fn cfg(t: f64, dt: f64, n: usize) -> SimConfig {
        SimConfig::new(t, dt, n, 7).unwrap()
    }

    #[test]
    fn deterministic_pair_integrates_exactly() {
        let xi = LevyTriplet::deterministic(1.0);
        let s = simulate_functional(&xi, &xi, &cfg(40.0, 0.1, 4)).unwrap();
        for v in &s.values {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        assert!(s.truncation_bound < 1e-16);
    }

    #[test]
    fn empirical_laplace_examples() {
        let (m, se) = empirical_laplace(&SampleSet::from_values(vec![1.0; 5]), 1.0).unwrap();
        assert!((m - (-1f64).exp()).abs() < 1e-15 && se == 0.0);
        let (m, se) = empirical_laplace(&SampleSet::from_values(vec![0.0, 2f64.ln()]), 1.0).unwrap();
        assert!((m - 0.75).abs() < 1e-15);
        // sample sd of {1, 1/2} is √(1/8); SE = sd/√2
        assert!((se - 0.25).abs() < 1e-15, "{se}");
        assert!(empirical_laplace(&SampleSet::from_values(vec![]), 1.0).is_err());
    }

    #[test]
    fn same_config_is_bit_identical() {
        let xi = LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap();
        let eta = LevyTriplet::subordinator(0.5, LevyMeasureSpec::stable(0.5, 1.0, Side::Positive).unwrap()).unwrap();
        let c = cfg(5.0, 0.01, 50);
        let a = simulate_functional(&xi, &eta, &c).unwrap();
        let b = simulate_functional(&xi, &eta, &c).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let d = pool.install(|| simulate_functional(&xi, &eta, &c)).unwrap();
        assert_eq!(a.values, d.values);
    }

    #[test]
    fn compound_poisson_mean() {
        // ξ_t = t, η with drift 0 and unit jumps at rate 2: E V = 2.
        let xi = LevyTriplet::deterministic(1.0);
        let eta = LevyTriplet::subordinator(0.0, LevyMeasureSpec::atoms(&[(1.0, 2.0)]).unwrap()).unwrap();
        let s = simulate_functional(&xi, &eta, &cfg(30.0, 0.05, 20000)).unwrap();
        let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
        assert!(s.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn exponential_jump_sizes_have_right_mean() {
        let m = LevyMeasureSpec::density(3.0, DensityShape::ExpPoly { power: 0.0, rate: 2.0 }, Side::Positive).unwrap();
        let g = PathGenerator::new(&LevyTriplet::subordinator(0.0, m).unwrap(), 1e-4).unwrap();
        assert!((g.total_rate - 1.5).abs() < 1e-9);
        let mut rng = path_rng(1, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| g.jump(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 5e-3, "{mean}");
    }

    #[test]
    fn pareto_large_jumps_and_compensated_drift() {
        let m = LevyMeasureSpec::stable(0.5, 1.0, Side::Positive).unwrap();
        let t = LevyTriplet::subordinator(0.0, m).unwrap();
        let g = PathGenerator::new(&t, 1e-4).unwrap();
        assert!((g.total_rate - 2.0 / 1e-2).abs() < 1e-9);
        // small jumps below ε contribute ∫_0^ε x·x^{−3/2} dx = 2√ε
        assert!((g.drift - 2.0 * 1e-2).abs() < 1e-9, "{}", g.drift);
    }

    #[test]
    fn ks_statistics() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).0, 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 500.0).collect();
        let (d, p) = ks_two_sample(&a, &b);
        assert!((d - 0.5).abs() < 1e-12 && p < 1e-10);
    }

    #[test]
    fn fixed_point_degenerate_and_negative_control() {
        let xi = LevyTriplet::deterministic(1.0);
        let r = verify_fixed_point(&xi, &xi, &cfg(40.0, 0.01, 200), 1.0).unwrap();
        assert!(r.passed && r.ks_statistic == 0.0, "{r:?}");
        let bm = LevyTriplet::brownian_with_drift(1.0, 2f64.sqrt()).unwrap();
        let c = cfg(30.0, 0.01, 4000);
        let r = verify_fixed_point(&bm, &xi, &c, 1.0).unwrap();
        assert!(r.passed, "{r:?}");
        let r = verify_fixed_point_scaled(&bm, &xi, &c, 1.0, 2.0).unwrap();
        assert!(!r.passed, "{r:?}");
    }

    #[test]
    fn support_report() {
        let s = SampleSet::from_values(vec![0.995, 1.0, 1.2]);
        let r = support_consistency(&s, &SupportResult::point(1.0));
        assert!((r.fraction_outside - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.min_sample, 0.995);
    }

    #[test]
    fn rejects_non_drifting_xi_and_bad_config() {
        let xi = LevyTriplet::deterministic(-1.0);
        assert!(simulate_functional(&xi, &xi, &cfg(1.0, 0.1, 1)).is_err());
        assert!(SimConfig::new(1.0, 2.0, 1, 0).is_err());
        assert!(SimConfig::new(1.0, 0.1, 0, 0).is_err());
    }
}
