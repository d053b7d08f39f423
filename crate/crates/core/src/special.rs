//! Special functions: gamma (delegated to `statrs`), the entire exponential
//! integral `Ein`, the modified Bessel function `K_ν`, and the Laplace
//! transform of an inverse-gamma law.

use crate::error::{Error, Result};
use crate::quad::{integrate_split, QuadOptions};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gamma function. Lanczos approximation from `statrs`, accurate to about
/// 15 significant digits on the positive axis; reflection for `x < 0.5`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `E_1(z) = ∫_z^∞ e^{−t}/t dt` for `z ≥ 1`, by the continued fraction
/// (modified Lentz).
fn expint_e1_cf(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// `Ein(z) = ∫_0^z (1 − e^{−t})/t dt`, the entire part of the exponential
/// integral. Non-negative and increasing on `[0, ∞)`.
pub fn ein(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z <= 2.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        z.ln() + EULER_GAMMA + expint_e1_cf(z)
    }
}

/// Modified Bessel function of the second kind, `K_ν(x)` for real order
/// and `x > 0`, from `K_ν(x) = ∫_0^∞ e^{−x cosh t} cosh(νt) dt`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, x)? * (-x).exp())
}

/// `e^x K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_k needs x > 0, got {x}")));
    }
    let nu = nu.abs();
    // Integrand e^{−x (cosh t − 1)} cosh(νt) is below 1e-300 past t_max.
    let mut t_max = (1.0 + 700.0 / x).acosh();
    t_max += nu * t_max / 700.0 + 1.0;
    let f = |t: f64| {
        // x (cosh t − 1) written as 2x sinh²(t/2) to keep precision near 0
        let e = -x * 2.0 * (0.5 * t).sinh().powi(2);
        0.5 * ((nu * t + e).exp() + (e - nu * t).exp())
    };
    let breaks: Vec<f64> = (0..=8).map(|i| t_max * i as f64 / 8.0).collect();
    let q = integrate_split(f, &breaks, QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_intervals: 2000 })?;
    Ok(q.value)
}

/// Law of `s / Γ_θ` where `Γ_θ` is standard gamma with shape `θ`; the
/// stationary law of the exponential functional with Brownian `ξ` and
/// `η_t = t` has this form with `s = 2/σ²`, `θ = 2a/σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGammaLaw {
    pub shape: f64,
    pub scale: f64,
}

impl InverseGammaLaw {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) {
            return Err(Error::domain("inverse gamma law needs shape > 0 and scale > 0"));
        }
        Ok(InverseGammaLaw { shape, scale })
    }

    /// `(𝕃, 𝕃′, 𝕃″)` at `u > 0`, with
    /// `𝕃(u) = 2 z^{θ/2} K_θ(2√z) / Γ(θ)`, `z = s·u`.
    pub fn laplace_with_derivs(&self, u: f64) -> Result<(f64, f64, f64)> {
        if !(u > 0.0) {
            return Err(Error::domain("Laplace transform evaluated at u <= 0"));
        }
        let th = self.shape;
        let s = self.scale;
        let z = s * u;
        let x = 2.0 * z.sqrt();
        let norm = 2.0 / gamma(th);
        // Work in scaled Bessel values and multiply e^{−x} in at the end.
        let damp = (-x).exp();
        let k0 = bessel_k_scaled(th, x)?;
        let k1 = bessel_k_scaled(th - 1.0, x)?;
        let k2 = bessel_k_scaled(th - 2.0, x)?;
        let l = norm * z.powf(0.5 * th) * k0 * damp;
        let l1 = -norm * s * z.powf(0.5 * (th - 1.0)) * k1 * damp;
        let l2 = norm * s * s * z.powf(0.5 * (th - 2.0)) * k2 * damp;
        Ok((l, l1, l2))
    }

    pub fn laplace(&self, u: f64) -> Result<f64> {
        Ok(self.laplace_with_derivs(u)?.0)
    }

    /// `(ψ, ψ′, ψ″)` with `ψ = ln 𝕃`, computed from Bessel ratios so that
    /// large `u` does not underflow.
    pub fn log_laplace_with_derivs(&self, u: f64) -> Result<(f64, f64, f64)> {
        if !(u > 0.0) {
            return Err(Error::domain("Laplace exponent evaluated at u <= 0"));
        }
        let th = self.shape;
        let s = self.scale;
        let z = s * u;
        let x = 2.0 * z.sqrt();
        let k0 = bessel_k_scaled(th, x)?;
        let k1 = bessel_k_scaled(th - 1.0, x)?;
        let k2 = bessel_k_scaled(th - 2.0, x)?;
        let psi = (2.0f64).ln() - ln_gamma(th) + 0.5 * th * z.ln() + k0.ln() - x;
        let d1 = -s * k1 / (z.sqrt() * k0);
        let d2 = s * s * k2 / (z * k0) - d1 * d1;
        Ok((psi, d1, d2))
    }
}
