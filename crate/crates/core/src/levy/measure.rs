use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_from_origin, integrate_semi_infinite, QuadOptions};
use crate::special::gamma;

/// Half-line a component of a Lévy measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// Shapes of parametric densities in `|x|`; the density is `scale · shape(|x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityShape {
    /// `x^power e^{−rate·x}`, `rate > 0`, `power > −3`.
    ExpPoly { power: f64, rate: f64 },
    /// `(shift + x)^power`, `shift > 0`, `power < −1`.
    ShiftedPower { shift: f64, power: f64 },
    /// Indicator of `[lo, hi]`.
    Box { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricDensity {
    pub scale: f64,
    pub shape: DensityShape,
    pub side: Side,
}

impl ParametricDensity {
    pub fn new(scale: f64, shape: DensityShape, side: Side) -> Result<Self> {
        let d = ParametricDensity { scale, shape, side };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain("density scale must be positive and finite"));
        }
        match self.shape {
            DensityShape::ExpPoly { power, rate } => {
                if !(rate > 0.0) || !(power > -3.0) || !power.is_finite() {
                    return Err(Error::domain(format!(
                        "exp-poly density needs rate > 0 and power > -3 (got power {power}, rate {rate})"
                    )));
                }
            }
            DensityShape::ShiftedPower { shift, power } => {
                if !(shift > 0.0) || !(power < -1.0) {
                    return Err(Error::domain(format!(
                        "shifted power density needs shift > 0 and power < -1 (got shift {shift}, power {power})"
                    )));
                }
            }
            DensityShape::Box { lo, hi } => {
                if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::domain(format!("box density needs 0 <= lo < hi < inf (got [{lo}, {hi}])")));
                }
            }
        }
        Ok(())
    }

    /// Density at `x > 0` (magnitude).
    pub fn value(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        self.scale
            * match self.shape {
                DensityShape::ExpPoly { power, rate } => x.powf(power) * (-rate * x).exp(),
                DensityShape::ShiftedPower { shift, power } => (shift + x).powf(power),
                DensityShape::Box { lo, hi } => {
                    if x >= lo && x <= hi {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
    }

    /// Derivative of the density in `x`, away from jump points.
    pub fn derivative(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        self.scale
            * match self.shape {
                DensityShape::ExpPoly { power, rate } => x.powf(power) * (-rate * x).exp() * (power / x - rate),
                DensityShape::ShiftedPower { shift, power } => power * (shift + x).powf(power - 1.0),
                DensityShape::Box { .. } => 0.0,
            }
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        match self.shape {
            DensityShape::Box { lo, hi } => {
                let mut j = Vec::new();
                if lo > 0.0 {
                    j.push((lo, self.scale));
                }
                j.push((hi, -self.scale));
                j
            }
            _ => Vec::new(),
        }
    }

    fn singular_at_zero(&self) -> bool {
        matches!(self.shape, DensityShape::ExpPoly { power, .. } if power < 0.0)
    }

    /// `∫_lo^hi h(x) density(x) dx` for `0 ≤ lo < hi ≤ ∞`.
    fn integrate(&self, h: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let (lo, hi) = match self.shape {
            DensityShape::Box { lo: a, hi: b } => (lo.max(a), hi.min(b)),
            _ => (lo, hi),
        };
        if !(hi > lo) {
            return Ok(0.0);
        }
        let f = |x: f64| {
            let d = self.value(x);
            if d == 0.0 {
                0.0
            } else {
                h(x) * d
            }
        };
        let pivot = match self.shape {
            DensityShape::ExpPoly { rate, .. } => (1.0 / rate).min(1.0),
            DensityShape::ShiftedPower { shift, .. } => shift,
            DensityShape::Box { .. } => 1.0,
        };
        integrate_measure_range(&f, lo, hi, pivot, self.singular_at_zero())
    }
}

/// Integrate `f` over `(lo, hi)` with `0 ≤ lo < hi ≤ ∞`, choosing transforms
/// for an origin singularity and an infinite upper limit.
pub(crate) fn integrate_measure_range(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    pivot: f64,
    singular_at_zero: bool,
) -> Result<f64> {
    let opts = QuadOptions::default();
    let mut total = 0.0;
    let mut a = lo;
    if a == 0.0 {
        let b = hi.min(pivot);
        total += if singular_at_zero {
            integrate_from_origin(f, b, opts)?.value
        } else {
            integrate(f, 0.0, b, opts)?.value
        };
        a = b;
    } else if singular_at_zero && a < pivot * 1e-3 {
        // Close to the singularity: shift the origin map to start at `a`.
        let b = hi.min(pivot);
        let g = |t: f64| f(a + t);
        total += integrate_from_origin(g, b - a, opts)?.value;
        a = b;
    }
    if a >= hi {
        return Ok(total);
    }
    if hi.is_infinite() {
        let b = a.max(pivot);
        if b > a {
            total += integrate(f, a, b, opts)?.value;
        }
        total += integrate_semi_infinite(f, b, b.max(1e-300), opts)?.value;
    } else {
        // Long finite ranges are split on a geometric grid.
        let mut breaks = vec![a];
        let mut x = a.max(pivot);
        while x * 4.0 < hi {
            x *= 4.0;
            breaks.push(x);
        }
        breaks.push(hi);
        breaks.dedup();
        total += crate::quad::integrate_split(f, &breaks, opts)?.value;
    }
    Ok(total)
}

/// Density tabulated on a strictly increasing grid of positive points and
/// interpolated by monotone piecewise-cubic Hermite (Fritsch–Carlson)
/// splines. The measure carries no mass outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    xs: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    // cumulative mass from xs[i] to the last grid point
    tail_from: Vec<f64>,
    pub side: Side,
}

impl TabulatedDensity {
    pub fn new(xs: Vec<f64>, values: Vec<f64>, side: Side) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() {
            return Err(Error::domain("tabulated density needs matching grids of length >= 2"));
        }
        if !(xs[0] > 0.0) || xs.windows(2).any(|w| !(w[1] > w[0])) || !xs[xs.len() - 1].is_finite() {
            return Err(Error::domain("tabulated density grid must be positive, finite and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("tabulated density values must be finite and non-negative"));
        }
        let slopes = pchip_slopes(&xs, &values);
        let n = xs.len();
        let mut tail_from = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let h = xs[i + 1] - xs[i];
            let seg = h * (values[i] + values[i + 1]) / 2.0 + h * h * (slopes[i] - slopes[i + 1]) / 12.0;
            tail_from[i] = tail_from[i + 1] + seg;
        }
        Ok(TabulatedDensity { xs, values, slopes, tail_from, side })
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if x < self.lower() || x > self.upper() {
            return None;
        }
        let i = self.xs.partition_point(|&g| g <= x);
        Some(i.saturating_sub(1).min(self.xs.len() - 2))
    }

    /// Interpolated density; zero off the grid.
    pub fn value(&self, x: f64) -> f64 {
        self.hermite(x).map(|(v, _)| v).unwrap_or(0.0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.hermite(x).map(|(_, d)| d).unwrap_or(0.0)
    }

    fn hermite(&self, x: f64) -> Option<(f64, f64)> {
        let i = self.locate(x)?;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let d = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * h * m1)
            / h;
        Some((v.max(0.0), d))
    }

    /// Mass on `(x, ∞)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return self.tail_from[0];
        }
        if x >= self.upper() {
            return 0.0;
        }
        let i = self.locate(x).expect("inside grid");
        let partial = integrate(|s| self.value(s), x, self.xs[i + 1], QuadOptions::default())
            .map(|q| q.value)
            .unwrap_or(0.0);
        partial + self.tail_from[i + 1]
    }

    fn integrate(&self, h: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let a = lo.max(self.lower());
        let b = hi.min(self.upper());
        if !(b > a) {
            return Ok(0.0);
        }
        let mut breaks: Vec<f64> = vec![a];
        breaks.extend(self.xs.iter().copied().filter(|&x| x > a && x < b));
        breaks.push(b);
        Ok(crate::quad::integrate_split(|x| h(x) * self.value(x), &breaks, QuadOptions::default())?.value)
    }
}

fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
        return m;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

/// Parametric Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasureSpec {
    Zero,
    Atoms(Vec<Atom>),
    /// Density `c·|x|^{−1−α}` on one half-line, `α ∈ (0, 2)`.
    Stable { alpha: f64, c: f64, side: Side },
    Density(ParametricDensity),
    Tabulated(TabulatedDensity),
    Sum(Vec<LevyMeasureSpec>),
}

impl LevyMeasureSpec {
    pub fn atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let atoms: Vec<Atom> = atoms.iter().map(|&(position, mass)| Atom { position, mass }).collect();
        let m = LevyMeasureSpec::Atoms(atoms);
        m.validate()?;
        Ok(m)
    }

    pub fn stable(alpha: f64, c: f64, side: Side) -> Result<Self> {
        let m = LevyMeasureSpec::Stable { alpha, c, side };
        m.validate()?;
        Ok(m)
    }

    pub fn density(scale: f64, shape: DensityShape, side: Side) -> Result<Self> {
        Ok(LevyMeasureSpec::Density(ParametricDensity::new(scale, shape, side)?))
    }

    /// Check the parameter constraints, including `∫ min(1, x²) ν(dx) < ∞`.
    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasureSpec::Zero | LevyMeasureSpec::Tabulated(_) => Ok(()),
            LevyMeasureSpec::Atoms(atoms) => {
                for a in atoms {
                    if !(a.position != 0.0 && a.position.is_finite()) {
                        return Err(Error::domain("atom positions must be finite and non-zero"));
                    }
                    if !(a.mass > 0.0 && a.mass.is_finite()) {
                        return Err(Error::domain("atom masses must be positive and finite"));
                    }
                }
                Ok(())
            }
            LevyMeasureSpec::Stable { alpha, c, .. } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::domain(format!("stable index must lie in (0, 2), got {alpha}")));
                }
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::domain(format!("stable scale must be positive, got {c}")));
                }
                Ok(())
            }
            LevyMeasureSpec::Density(d) => d.validate(),
            LevyMeasureSpec::Sum(parts) => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    /// Flattened list of non-sum components.
    pub fn components(&self) -> Vec<&LevyMeasureSpec> {
        match self {
            LevyMeasureSpec::Sum(parts) => parts.iter().flat_map(|p| p.components()).collect(),
            LevyMeasureSpec::Zero => Vec::new(),
            other => vec![other],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| match c {
            LevyMeasureSpec::Atoms(a) => a.is_empty(),
            LevyMeasureSpec::Tabulated(t) => t.tail(0.0) == 0.0,
            _ => false,
        })
    }

    /// `ν((x, ∞))` for `side = Positive`, `ν((−∞, −x))` for `Negative`; `x ≥ 0`.
    pub fn tail(&self, side: Side, x: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components() {
            total += match c {
                LevyMeasureSpec::Atoms(atoms) => atoms
                    .iter()
                    .filter(|a| a.position * side.sign() > x)
                    .map(|a| a.mass)
                    .sum(),
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => {
                    if x <= 0.0 {
                        f64::INFINITY
                    } else {
                        c * x.powf(-alpha) / alpha
                    }
                }
                LevyMeasureSpec::Density(d) if d.side == side => match d.shape {
                    DensityShape::ShiftedPower { shift, power } => {
                        d.scale * (shift + x.max(0.0)).powf(power + 1.0) / (-(power + 1.0))
                    }
                    DensityShape::Box { lo, hi } => d.scale * (hi - x.max(lo)).max(0.0),
                    DensityShape::ExpPoly { power, .. } => {
                        if x <= 0.0 && power <= -1.0 {
                            f64::INFINITY
                        } else {
                            d.integrate(&|_| 1.0, x.max(0.0), f64::INFINITY)?
                        }
                    }
                },
                LevyMeasureSpec::Tabulated(t) if t.side == side => t.tail(x),
                _ => 0.0,
            };
        }
        Ok(total)
    }

    /// Total mass `ν(ℝ∖{0})`, possibly infinite.
    pub fn total_mass(&self) -> Result<f64> {
        Ok(self.tail(Side::Positive, 0.0)? + self.tail(Side::Negative, 0.0)?)
    }

    /// Mass outside `[−r, r]`.
    pub fn mass_outside(&self, r: f64) -> Result<f64> {
        Ok(self.tail(Side::Positive, r)? + self.tail(Side::Negative, r)?)
    }

    pub fn is_finite(&self) -> Result<bool> {
        Ok(self.total_mass()?.is_finite())
    }

    pub fn has_mass_on(&self, side: Side) -> bool {
        self.components().iter().any(|c| match c {
            LevyMeasureSpec::Atoms(atoms) => atoms.iter().any(|a| a.position * side.sign() > 0.0),
            LevyMeasureSpec::Stable { side: s, .. } => *s == side,
            LevyMeasureSpec::Density(d) => d.side == side,
            LevyMeasureSpec::Tabulated(t) => t.side == side && t.tail(0.0) > 0.0,
            _ => false,
        })
    }

    /// `∫ h(|x|) ν(dx)` over `|x| ∈ (lo, hi)` on one side, `0 ≤ lo < hi ≤ ∞`.
    pub fn integrate_side(&self, side: Side, h: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components() {
            total += match c {
                LevyMeasureSpec::Atoms(atoms) => atoms
                    .iter()
                    .filter(|a| {
                        let m = a.position * side.sign();
                        m > lo && m < hi
                    })
                    .map(|a| a.mass * h(a.position.abs()))
                    .sum(),
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => {
                    let f = |x: f64| h(x) * c * x.powf(-1.0 - alpha);
                    integrate_measure_range(&f, lo, hi, 1.0, true)?
                }
                LevyMeasureSpec::Density(d) if d.side == side => d.integrate(h, lo, hi)?,
                LevyMeasureSpec::Tabulated(t) if t.side == side => t.integrate(h, lo, hi)?,
                _ => 0.0,
            };
        }
        Ok(total)
    }

    /// `∫_{0<|x|≤1} |x|^p ν(dx)` on one side, possibly infinite.
    pub fn moment_near_zero(&self, side: Side, p: f64) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components() {
            total += match c {
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => {
                    if p > *alpha {
                        c / (p - alpha)
                    } else {
                        f64::INFINITY
                    }
                }
                LevyMeasureSpec::Density(d) if d.side == side => match d.shape {
                    DensityShape::ExpPoly { power, .. } if p + power <= -1.0 => f64::INFINITY,
                    _ => d.integrate(&|x| x.powf(p), 0.0, 1.0)?,
                },
                LevyMeasureSpec::Atoms(atoms) => atoms
                    .iter()
                    .map(|a| (a.position * side.sign(), a.mass))
                    .filter(|&(m, _)| m > 0.0 && m <= 1.0)
                    .map(|(m, w)| w * m.powf(p))
                    .sum::<f64>(),
                other => other.integrate_side(side, &|x| x.powf(p), 0.0, 1.0)?,
            };
        }
        Ok(total)
    }

    /// `∫_{|x|>1} |x| ν(dx)` on one side, possibly infinite.
    pub fn large_jump_mean(&self, side: Side) -> Result<f64> {
        let mut total = 0.0;
        for c in self.components() {
            total += match c {
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => {
                    if *alpha > 1.0 {
                        c / (alpha - 1.0)
                    } else {
                        f64::INFINITY
                    }
                }
                LevyMeasureSpec::Density(d) if d.side == side => match d.shape {
                    DensityShape::ShiftedPower { power, .. } if power >= -2.0 => f64::INFINITY,
                    _ => d.integrate(&|x| x, 1.0, f64::INFINITY)?,
                },
                other => other.integrate_side(side, &|x| x, 1.0, f64::INFINITY)?,
            };
        }
        Ok(total)
    }

    /// `∫ x ν(dx)` over `0 < |x| ≤ 1`, signed; infinite when not absolutely
    /// convergent.
    pub fn signed_mean_near_zero(&self) -> Result<f64> {
        let p = self.moment_near_zero(Side::Positive, 1.0)?;
        let n = self.moment_near_zero(Side::Negative, 1.0)?;
        if p.is_infinite() || n.is_infinite() {
            return Ok(f64::INFINITY);
        }
        Ok(p - n)
    }

    /// Signed `∫ x ν(dx)` over `lo < |x| ≤ hi`.
    pub fn signed_mean_between(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut total = 0.0;
        for side in [Side::Positive, Side::Negative] {
            // closed at the upper end for atoms sitting exactly at `hi`
            let atoms_at_hi: f64 = self
                .components()
                .iter()
                .map(|c| match c {
                    LevyMeasureSpec::Atoms(a) => a
                        .iter()
                        .filter(|a| a.position * side.sign() == hi)
                        .map(|a| a.mass * hi)
                        .sum(),
                    _ => 0.0,
                })
                .sum();
            total += side.sign() * (self.integrate_side(side, &|x| x, lo, hi)? + atoms_at_hi);
        }
        Ok(total)
    }

    /// `∫ (e^{−ux} − 1) ν(dx)` for a measure on `(0, ∞)`.
    pub fn laplace_integral(&self, u: f64) -> Result<f64> {
        self.subordinator_integrals(u).map(|(v, _, _)| v)
    }

    /// `(∫(e^{−ux}−1)ν, −∫x e^{−ux}ν, ∫x² e^{−ux}ν)` for a measure on `(0, ∞)`:
    /// the jump part of `ψ` and its first two derivatives.
    pub fn subordinator_integrals(&self, u: f64) -> Result<(f64, f64, f64)> {
        if self.has_mass_on(Side::Negative) {
            return Err(Error::domain("subordinator Laplace exponent needs a measure on (0, inf)"));
        }
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for c in self.components() {
            match c {
                LevyMeasureSpec::Atoms(atoms) => {
                    for a in atoms {
                        let e = (-u * a.position).exp();
                        v += a.mass * (-u * a.position).exp_m1();
                        d1 -= a.mass * a.position * e;
                        d2 += a.mass * a.position * a.position * e;
                    }
                }
                LevyMeasureSpec::Stable { alpha, c, .. } => {
                    if *alpha >= 1.0 {
                        return Err(Error::domain(format!(
                            "stable component with index {alpha} >= 1 is not a subordinator"
                        )));
                    }
                    let g = gamma(1.0 - alpha);
                    v -= c * g / alpha * u.powf(*alpha);
                    d1 -= c * g * u.powf(alpha - 1.0);
                    d2 += c * g * (1.0 - alpha) * u.powf(alpha - 2.0);
                }
                LevyMeasureSpec::Density(d) => {
                    if let DensityShape::Box { lo, hi } = d.shape {
                        let (el, eh) = ((-u * lo).exp(), (-u * hi).exp());
                        v += d.scale * ((el - eh) / u - (hi - lo));
                        d1 -= d.scale * ((lo * el - hi * eh) / u + (el - eh) / (u * u));
                        d2 += d.scale
                            * ((lo * lo * el - hi * hi * eh) / u
                                + 2.0 * (lo * el - hi * eh) / (u * u)
                                + 2.0 * (el - eh) / (u * u * u));
                    } else {
                        v += d.integrate(&|x| (-u * x).exp_m1(), 0.0, f64::INFINITY)?;
                        d1 -= d.integrate(&|x| x * (-u * x).exp(), 0.0, f64::INFINITY)?;
                        d2 += d.integrate(&|x| x * x * (-u * x).exp(), 0.0, f64::INFINITY)?;
                    }
                }
                LevyMeasureSpec::Tabulated(t) => {
                    v += t.integrate(&|x| (-u * x).exp_m1(), 0.0, f64::INFINITY)?;
                    d1 -= t.integrate(&|x| x * (-u * x).exp(), 0.0, f64::INFINITY)?;
                    d2 += t.integrate(&|x| x * x * (-u * x).exp(), 0.0, f64::INFINITY)?;
                }
                LevyMeasureSpec::Zero | LevyMeasureSpec::Sum(_) => {}
            }
        }
        Ok((v, d1, d2))
    }

    /// Density at signed `x` when the measure is absolutely continuous
    /// there (atoms contribute nothing).
    pub fn density_at(&self, x: f64) -> f64 {
        let side = if x > 0.0 { Side::Positive } else { Side::Negative };
        let m = x.abs();
        self.components()
            .iter()
            .map(|c| match c {
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => c * m.powf(-1.0 - alpha),
                LevyMeasureSpec::Density(d) if d.side == side => d.value(m),
                LevyMeasureSpec::Tabulated(t) if t.side == side => t.value(m),
                _ => 0.0,
            })
            .sum()
    }

    /// Derivative of the density in `|x|` on one side.
    pub fn density_derivative(&self, side: Side, x: f64) -> f64 {
        self.components()
            .iter()
            .map(|c| match c {
                LevyMeasureSpec::Stable { alpha, c, side: s } if *s == side => {
                    -(1.0 + alpha) * c * x.powf(-2.0 - alpha)
                }
                LevyMeasureSpec::Density(d) if d.side == side => d.derivative(x),
                LevyMeasureSpec::Tabulated(t) if t.side == side => t.derivative(x),
                _ => 0.0,
            })
            .sum()
    }

    pub fn has_atoms(&self) -> bool {
        self.components()
            .iter()
            .any(|c| matches!(c, LevyMeasureSpec::Atoms(a) if !a.is_empty()))
    }

    /// Jump discontinuities `(x, jump)` of the density in `|x|` on one side.
    pub fn density_jumps(&self, side: Side) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in self.components() {
            match c {
                LevyMeasureSpec::Density(d) if d.side == side => out.extend(d.jumps()),
                LevyMeasureSpec::Tabulated(t) if t.side == side => {
                    if t.values[0] > 0.0 {
                        out.push((t.lower(), t.values[0]));
                    }
                    let last = t.values[t.values.len() - 1];
                    if last > 0.0 {
                        out.push((t.upper(), -last));
                    }
                }
                _ => {}
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Points in `|x|` where the density is not smooth, for quadrature breaks.
    pub fn breakpoints(&self, side: Side) -> Vec<f64> {
        let mut out: Vec<f64> = self.density_jumps(side).into_iter().map(|(x, _)| x).collect();
        for c in self.components() {
            if let LevyMeasureSpec::Tabulated(t) = c {
                if t.side == side {
                    out.extend_from_slice(t.grid());
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
