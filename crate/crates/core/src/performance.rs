//! Outage, coherent-BPSK bit error probability and ergodic capacity of the
//! MRC output, in closed form from the series CDF coefficients.
//!
//! Both integrals reduce to one-dimensional Laplace-type integrals of
//! `1 - F_eq(x) = A e^{-λ_sd x} - Σ B_{q,c} x^c e^{-λ_srd x}` after
//! integrating by parts:
//!
//! ```text
//! p_b   = ½ √(γ/π) ∫ x^{-1/2} e^{-γx} F_eq(x) dx
//! C_av  = ½ ∫ γ/(1+γx) (1 - F_eq(x)) dx
//! ```
//!
//! The capacity pieces are `∫ x^c e^{-λx}/(x + 1/γ) dx = c! λ^{-c} e^{λ/γ} E_{c+1}(λ/γ)`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadratureSpec};
use crate::relay::{cdf_eq, pdf_eq, SeriesCdfCoeffs};
use crate::special::{erfc, exp_integral_scaled, factorial};

/// One row of a transmit-SNR sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfPoint {
    pub gamma_db: f64,
    pub outage: f64,
    pub bep: f64,
    /// Ergodic capacity in nats/s/Hz, half-duplex pre-log included.
    pub capacity_nats: f64,
}

/// `P(γ|h_eq|² < threshold)`, the series CDF at `threshold/γ`.
pub fn outage(coeffs: &SeriesCdfCoeffs, snr_threshold: f64) -> Result<f64> {
    if !(snr_threshold > 0.0) {
        return Err(Error::domain(format!("SNR threshold must be positive, got {snr_threshold}")));
    }
    Ok(cdf_eq(coeffs, snr_threshold / coeffs.params().gamma)?.value)
}

/// Closed-form BEP of coherent BPSK averaged over the series density.
///
/// The `A` term is written as `A·√(γ/(γ+λ_sd))`, which is what integration
/// by parts produces and coincides with `√(γA²/(γ+λ_sd))` for `A ≥ 0`.
pub fn bep(coeffs: &SeriesCdfCoeffs) -> Result<f64> {
    let g = coeffs.params().gamma;
    let direct = coeffs.a() * (g / (g + coeffs.lambda_sd())).sqrt();
    let rate = g + coeffs.lambda_srd();
    let relayed: f64 = coeffs
        .terms()
        .map(|(c, b)| {
            let half = c as f64 + 0.5;
            b * gamma(half) / rate.powf(half)
        })
        .sum();
    let raw = 0.5 * (1.0 - direct + (g / PI).sqrt() * relayed);
    Ok(raw.clamp(0.0, 1.0))
}

/// `½ ∫_0^∞ erfc(√(γx)) f_eq(x) dx` by adaptive quadrature.
///
/// Integrated in `t = √(γx)`, where the erfc factor has unit scale and no
/// square-root kink; at high SNR all of the mass sits within `x ≲ 1/γ`.
pub fn bep_quadrature(coeffs: &SeriesCdfCoeffs, spec: &QuadratureSpec) -> Result<f64> {
    let g = coeffs.params().gamma;
    let r = integrate_to_infinity(
        |t| t * erfc(t) * pdf_eq(coeffs, t * t / g).unwrap_or(f64::NAN) / g,
        0.0,
        spec,
    )?;
    Ok(r.value)
}

/// `∫_0^∞ x^c e^{-λx} / (x + 1/γ) dx`.
fn shifted_laplace(c: usize, lambda: f64, gamma: f64) -> Result<f64> {
    let y = lambda / gamma;
    Ok(factorial(c) * lambda.powi(-(c as i32)) * exp_integral_scaled(c + 1, y)?)
}

/// Closed-form ergodic capacity `½ E[ln(1 + γ|h_eq|²)]` in nats/s/Hz.
pub fn capacity(coeffs: &SeriesCdfCoeffs) -> Result<f64> {
    let g = coeffs.params().gamma;
    let direct = coeffs.a() * shifted_laplace(0, coeffs.lambda_sd(), g)?;
    let mut relayed = 0.0;
    for (c, b) in coeffs.terms() {
        relayed += b * shifted_laplace(c, coeffs.lambda_srd(), g)?;
    }
    Ok((0.5 * (direct - relayed)).max(0.0))
}

/// `½ ∫_0^∞ ln(1 + γx) f_eq(x) dx` by adaptive quadrature.
pub fn capacity_quadrature(coeffs: &SeriesCdfCoeffs, spec: &QuadratureSpec) -> Result<f64> {
    let g = coeffs.params().gamma;
    let r = integrate_to_infinity(
        |x| 0.5 * (g * x).ln_1p() * pdf_eq(coeffs, x).unwrap_or(f64::NAN),
        0.0,
        spec,
    )?;
    Ok(r.value)
}

/// All three metrics at the coefficients' transmit SNR.
pub fn perf_point(coeffs: &SeriesCdfCoeffs, snr_threshold: f64) -> Result<PerfPoint> {
    Ok(PerfPoint {
        gamma_db: 10.0 * coeffs.params().gamma.log10(),
        outage: outage(coeffs, snr_threshold)?,
        bep: bep(coeffs)?,
        capacity_nats: capacity(coeffs)?,
    })
}
