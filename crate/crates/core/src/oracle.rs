//! Quadrature reference values for `K_ν` and the Riemann–Liouville
//! fractional integral.
//!
//! Nothing in the production series path calls into this module. It exists
//! to check the series, to serve as the exact Bessel backend of the relay
//! model, and to verify the fractional-integral identity the series is
//! derived from.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};

/// Riemann–Liouville order `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("fractional order must be positive, got {s}")));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `K_ν(z) = ∫_0^∞ e^{-z cosh t} cosh(νt) dt`.
///
/// The integrand is rescaled by `e^{z}` so the tolerance is relative to an
/// O(1) quantity, and the range is cut at the first `T` where
/// `e^{-z(cosh T - 1) + νT}` drops below `abs_tol/10`.
pub fn k_reference(nu: f64, z: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("K_nu oracle requires z > 0, got {z}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("K_nu oracle requires finite order"));
    }
    // K_{-ν} = K_ν
    let nu = nu.abs();
    let log_floor = (spec.abs_tol / 10.0).ln();
    let log_envelope = |t: f64| -z * (t.cosh() - 1.0) + nu * t;
    let mut cutoff = 1.0;
    while log_envelope(cutoff) > log_floor || log_envelope(cutoff) > log_envelope(cutoff * 0.5) {
        cutoff *= 2.0;
        if cutoff > 1e3 {
            return Err(Error::domain("K_nu oracle could not bracket the integrand tail"));
        }
    }
    let integrand = |t: f64| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let scaled = integrate(integrand, 0.0, cutoff, spec)?;
    Ok(scaled.value * (-z).exp())
}

/// `(1/Γ(s)) ∫_0^x (x-t)^{s-1} f(t) dt`.
///
/// For `s < 1` the endpoint singularity is removed with `u = (x-t)^s`,
/// which turns the integral into `(1/Γ(s+1)) ∫_0^{x^s} f(x - u^{1/s}) du`.
pub fn riemann_liouville<F: Fn(f64) -> f64>(
    f: F,
    s: FractionalOrder,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Riemann-Liouville integral requires x > 0, got {x}")));
    }
    let s = s.value();
    if s < 1.0 {
        let inv = 1.0 / s;
        let upper = x.powf(s);
        let r = integrate(|u| f((x - u.powf(inv)).max(0.0)), 0.0, upper, spec)?;
        Ok(r.value / statrs::function::gamma::gamma(s + 1.0))
    } else {
        let r = integrate(|t| (x - t).powf(s - 1.0) * f(t), 0.0, x, spec)?;
        Ok(r.value / statrs::function::gamma::gamma(s))
    }
}

/// Left side of the fractional-integral identity: `I^s{t^{-2s} e^{-β/t}}(x)`.
pub fn rl_exp_reciprocal(s: FractionalOrder, beta: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain("beta must be positive"));
    }
    let sv = s.value();
    let f = move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            // t^{-2s} e^{-β/t}, combined in the exponent to avoid ∞·0
            (-2.0 * sv * t.ln() - beta / t).exp()
        }
    };
    riemann_liouville(f, s, x, spec)
}

/// Right side of the identity:
/// `β^{1/2-s} (πx)^{-1/2} e^{-β/(2x)} K_{s-1/2}(β/(2x))`.
pub fn rl_exp_reciprocal_closed_form(
    s: FractionalOrder,
    beta: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(beta > 0.0) || !(x > 0.0) {
        return Err(Error::domain("beta and x must be positive"));
    }
    let sv = s.value();
    let arg = beta / (2.0 * x);
    let k = k_reference(sv - 0.5, arg, spec)?;
    Ok(beta.powf(0.5 - sv) / (PI * x).sqrt() * (-arg).exp() * k)
}
