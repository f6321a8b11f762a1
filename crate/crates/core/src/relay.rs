//! Two-hop variable-gain AF link with an MRC receiver.
//!
//! Channel powers are exponential: `|h_sd|² ~ Exp(λ_sd)`, `|h_sr|² ~ Exp(λ_sr)`,
//! `|h_rd|² ~ Exp(λ_rd)`. The relayed branch has power
//! `|h_srd|² = |h_sr|²|h_rd|² / (|h_sr|² + |h_rd|² + 1/γ)` and the MRC output
//! SNR is `γ|h_eq|²` with `|h_eq|² = |h_sd|² + |h_srd|²`.
//!
//! Under the high-SNR approximation and the depth-`k` series for `K_1`,
//!
//! ```text
//! F_eq(x) ≈ 1 - A e^{-λ_sd x} + Σ_{q=0}^{k} Σ_{c=0}^{q} B_{q,c} x^c e^{-λ_srd x}
//! ```
//!
//! with `λ_srd = (√λ_sr + √λ_rd)²`, `D = λ_srd - λ_sd`, `β = 2√(λ_sr λ_rd)`,
//! `A = 1 + Σ_q λ_sd β^q q! a_q / D^{q+1}` and
//! `B_{q,c} = λ_sd β^q q! a_q / (c! D^{q-c+1})`.

use crate::error::{Error, Result};
use crate::oracle::k_reference;
use crate::quadrature::{integrate, QuadratureSpec};
use crate::series::{eval_k0_truncated, eval_k_truncated, CoefficientTable};
use crate::special::factorial;

/// Relative gap below which `λ_srd` and `λ_sd` are treated as equal.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Excursions of a clamped probability beyond this are flagged.
pub const EXCURSION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Transmit SNR, linear.
    pub gamma: f64,
    pub lambda_sd: f64,
    pub lambda_sr: f64,
    pub lambda_rd: f64,
}

impl ChannelParams {
    pub fn new(gamma: f64, lambda_sd: f64, lambda_sr: f64, lambda_rd: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma", gamma),
            ("lambda_sd", lambda_sd),
            ("lambda_sr", lambda_sr),
            ("lambda_rd", lambda_rd),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(Self {
            gamma,
            lambda_sd,
            lambda_sr,
            lambda_rd,
        })
    }

    /// Same fading, transmit SNR given in dB.
    pub fn from_db(gamma_db: f64, lambda_sd: f64, lambda_sr: f64, lambda_rd: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma_db), lambda_sd, lambda_sr, lambda_rd)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(gamma, self.lambda_sd, self.lambda_sr, self.lambda_rd)
    }

    pub fn derived(&self) -> DerivedParams {
        DerivedParams::from(self)
    }

    /// `ζ(x) = √(λ_P x (x + 1/γ))`.
    pub fn zeta(&self, x: f64) -> f64 {
        (self.lambda_sr * self.lambda_rd * x * (x + 1.0 / self.gamma)).sqrt()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `λ_sr λ_rd`
    pub lambda_p: f64,
    /// `λ_sr + λ_rd`
    pub lambda_s: f64,
    /// `(√λ_sr + √λ_rd)²`
    pub lambda_srd: f64,
}

impl From<&ChannelParams> for DerivedParams {
    fn from(p: &ChannelParams) -> Self {
        let lambda_p = p.lambda_sr * p.lambda_rd;
        let lambda_s = p.lambda_sr + p.lambda_rd;
        Self {
            lambda_p,
            lambda_s,
            lambda_srd: lambda_s + 2.0 * lambda_p.sqrt(),
        }
    }
}

/// Where `K_0` and `K_1` come from in the exact S-R-D expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesselBackend {
    Oracle(QuadratureSpec),
    Series { k: usize },
}

impl Default for BesselBackend {
    fn default() -> Self {
        BesselBackend::Oracle(QuadratureSpec::default())
    }
}

impl BesselBackend {
    fn k0(&self, z: f64) -> Result<f64> {
        match self {
            BesselBackend::Oracle(spec) => k_reference(0.0, z, spec),
            BesselBackend::Series { k } => Ok(eval_k0_truncated(*k, z)?.value),
        }
    }

    fn k1(&self, z: f64) -> Result<f64> {
        match self {
            BesselBackend::Oracle(spec) => k_reference(1.0, z, spec),
            BesselBackend::Series { k } => Ok(eval_k_truncated(1.0, *k, z)?.value),
        }
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::domain(format!("x must be nonnegative, got {x}")));
    }
    Ok(())
}

/// `F_srd(x) = 1 - 2ζ e^{-λ_S x} K_1(2ζ)`, with `F_srd(0) = 0`.
pub fn cdf_srd_exact(p: &ChannelParams, x: f64, backend: &BesselBackend) -> Result<f64> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let d = p.derived();
    let zeta = p.zeta(x);
    let tail = 2.0 * zeta * (-d.lambda_s * x).exp() * backend.k1(2.0 * zeta)?;
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// `f_srd(x) = 2 e^{-λ_S x} (λ_P (2x + 1/γ) K_0(2ζ) + λ_S ζ K_1(2ζ))` for `x > 0`.
///
/// `K_0` diverges logarithmically at the origin, so `x = 0` is rejected.
pub fn pdf_srd_exact(p: &ChannelParams, x: f64, backend: &BesselBackend) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "S-R-D density has an integrable singularity at 0; x must be > 0, got {x}"
        )));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let d = p.derived();
    let zeta = p.zeta(x);
    let z = 2.0 * zeta;
    let bracket = d.lambda_p * (2.0 * x + 1.0 / p.gamma) * backend.k0(z)? + d.lambda_s * zeta * backend.k1(z)?;
    Ok(2.0 * (-d.lambda_s * x).exp() * bracket)
}

/// The `A` and `B_{q,c}` coefficients of the series CDF of `|h_eq|²`.
///
/// They do not depend on `γ`; `params` is kept for the performance metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCdfCoeffs {
    params: ChannelParams,
    lambda_srd: f64,
    k: usize,
    a: f64,
    b: Vec<Vec<f64>>,
}

impl SeriesCdfCoeffs {
    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Row `q` holds `B_{q,0..=q}`.
    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn lambda_sd(&self) -> f64 {
        self.params.lambda_sd
    }

    pub fn lambda_srd(&self) -> f64 {
        self.lambda_srd
    }

    /// Same coefficients at another transmit SNR.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Ok(Self {
            params: self.params.with_gamma(gamma)?,
            ..self.clone()
        })
    }

    /// Iterates `(c, B_{q,c})` over every `(q, c)` pair.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.b.iter().flat_map(|row| row.iter().copied().enumerate())
    }
}

/// Builds `A` and `B` from a `ν = 1` coefficient table.
pub fn series_cdf_coeffs(p: &ChannelParams, table: &CoefficientTable) -> Result<SeriesCdfCoeffs> {
    if table.nu() != 1.0 {
        return Err(Error::domain(format!(
            "series CDF needs the K_1 coefficient table, got nu = {}",
            table.nu()
        )));
    }
    let d = p.derived();
    let gap = d.lambda_srd - p.lambda_sd;
    let relative_gap = gap.abs() / d.lambda_srd;
    if relative_gap < DEGENERACY_TOLERANCE {
        return Err(Error::Degenerate {
            lambda_srd: d.lambda_srd,
            lambda_sd: p.lambda_sd,
            relative_gap,
        });
    }
    let beta = 2.0 * d.lambda_p.sqrt();
    let mut a = 1.0;
    let mut b = Vec::with_capacity(table.k() + 1);
    for (q, &a_q) in table.coefficients().iter().enumerate() {
        // λ_sd β^q q! a_q / D^{q+1}
        let base = p.lambda_sd * (beta / gap).powi(q as i32) * factorial(q) * a_q / gap;
        a += base;
        let row = (0..=q)
            .map(|c| base * gap.powi(c as i32) / factorial(c))
            .collect();
        b.push(row);
    }
    Ok(SeriesCdfCoeffs {
        params: *p,
        lambda_srd: d.lambda_srd,
        k: table.k(),
        a,
        b,
    })
}

/// A probability clamped to `[0, 1]` with the raw value kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedProbability {
    pub value: f64,
    pub raw: f64,
}

impl ClampedProbability {
    fn from_raw(raw: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            raw,
        }
    }

    /// How far the raw value left `[0, 1]`.
    pub fn excursion(&self) -> f64 {
        (self.raw - self.value).abs()
    }

    pub fn is_excursion(&self) -> bool {
        self.excursion() > EXCURSION_TOLERANCE
    }
}

/// Series CDF of `|h_eq|²` (high-SNR form).
pub fn cdf_eq(coeffs: &SeriesCdfCoeffs, x: f64) -> Result<ClampedProbability> {
    check_nonnegative(x)?;
    if x.is_infinite() {
        return Ok(ClampedProbability::from_raw(1.0));
    }
    let direct = coeffs.a * (-coeffs.lambda_sd() * x).exp();
    let relayed: f64 = coeffs.terms().map(|(c, b)| b * x.powi(c as i32)).sum();
    let raw = 1.0 - direct + relayed * (-coeffs.lambda_srd * x).exp();
    Ok(ClampedProbability::from_raw(raw))
}

/// Series density of `|h_eq|²`, the derivative of [`cdf_eq`]. Finite at 0.
pub fn pdf_eq(coeffs: &SeriesCdfCoeffs, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lsd = coeffs.lambda_sd();
    let lsrd = coeffs.lambda_srd;
    let relayed: f64 = coeffs
        .terms()
        .map(|(c, b)| {
            let rising = if c == 0 { 0.0 } else { c as f64 * x.powi(c as i32 - 1) };
            b * (rising - lsrd * x.powi(c as i32))
        })
        .sum();
    Ok(coeffs.a * lsd * (-lsd * x).exp() + relayed * (-lsrd * x).exp())
}

/// Exact CDF of `|h_eq|²` by quadrature of the convolution
/// `λ_sd e^{-λ_sd x} ∫_0^x e^{λ_sd u} F_srd(u) du`, with the oracle `K_1`.
pub fn cdf_eq_quadrature(p: &ChannelParams, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let backend = BesselBackend::Oracle(*spec);
    let lsd = p.lambda_sd;
    // Integrand errors cannot escape the closure; record the first one.
    let failure = std::cell::RefCell::new(None);
    let integrand = |u: f64| match cdf_srd_exact(p, u, &backend) {
        Ok(f) => lsd * (lsd * (u - x)).exp() * f,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let outer = QuadratureSpec {
        abs_tol: spec.abs_tol.max(1e-13),
        rel_tol: spec.rel_tol.max(1e-10),
        ..*spec
    };
    let r = integrate(integrand, 0.0, x, &outer)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.value.clamp(0.0, 1.0))
}

/// CDF of `Exp(λ_sd) + Exp(λ_sr + λ_rd)`, the min-bound baseline.
pub fn cdf_minbound(p: &ChannelParams, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    let l1 = p.lambda_sd;
    let l2 = p.derived().lambda_s;
    let v = if ((l1 - l2) / l2).abs() < DEGENERACY_TOLERANCE {
        // Erlang(2, λ)
        1.0 - (-l1 * x).exp() * (1.0 + l1 * x)
    } else {
        1.0 - (l2 * (-l1 * x).exp() - l1 * (-l2 * x).exp()) / (l2 - l1)
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Density of the min-bound baseline.
pub fn pdf_minbound(p: &ChannelParams, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    let l1 = p.lambda_sd;
    let l2 = p.derived().lambda_s;
    Ok(if ((l1 - l2) / l2).abs() < DEGENERACY_TOLERANCE {
        l1 * l1 * x * (-l1 * x).exp()
    } else {
        l1 * l2 * ((-l1 * x).exp() - (-l2 * x).exp()) / (l2 - l1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::series_coeffs;
    use approx::assert_relative_eq;

    fn unit(gamma: f64) -> ChannelParams {
        ChannelParams::new(gamma, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn derived_params() {
        let p = ChannelParams::new(10.0, 0.5, 2.0, 0.5).unwrap();
        let d = p.derived();
        assert_relative_eq!(d.lambda_p, 1.0);
        assert_relative_eq!(d.lambda_s, 2.5);
        assert_relative_eq!(d.lambda_srd, 4.5, max_relative = 1e-15);
        assert!(d.lambda_srd > d.lambda_s);
    }

    #[test]
    fn rejects_nonpositive_params() {
        assert!(ChannelParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn a_coefficient_for_unit_fading() {
        let c = series_cdf_coeffs(&unit(1000.0), &series_coeffs(1.0, 2).unwrap()).unwrap();
        assert_relative_eq!(c.lambda_srd(), 4.0);
        // 1 + 1/3 + 2·0.8/9 + 8·(-2/15)/27
        let expected = 1.0 + 1.0 / 3.0 + 1.6 / 9.0 - 16.0 / 405.0;
        assert_relative_eq!(c.a(), expected, max_relative = 1e-14);
        assert_relative_eq!(c.a(), 1.47161, max_relative = 1e-5);
    }

    #[test]
    fn b_diagonal_definition() {
        let p = ChannelParams::new(100.0, 0.7, 1.3, 2.1).unwrap();
        let table = series_coeffs(1.0, 6).unwrap();
        let c = series_cdf_coeffs(&p, &table).unwrap();
        let d = p.derived();
        let beta = 2.0 * d.lambda_p.sqrt();
        let q = 6;
        let lhs = c.b()[q][q] * factorial(q);
        let rhs = p.lambda_sd * beta.powi(q as i32) * factorial(q) * table.coefficients()[q] / (d.lambda_srd - p.lambda_sd);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_parameters_rejected() {
        // λ_srd = 4 = λ_sd
        let p = ChannelParams::new(10.0, 4.0, 1.0, 1.0).unwrap();
        let err = series_cdf_coeffs(&p, &series_coeffs(1.0, 4).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }));
        assert!(err.is_numerical());
        // The documented perturbation works.
        let p = ChannelParams::new(10.0, 4.0 * (1.0 + 1e-6), 1.0, 1.0).unwrap();
        assert!(series_cdf_coeffs(&p, &series_coeffs(1.0, 4).unwrap()).is_ok());
    }

    #[test]
    fn wrong_order_table_rejected() {
        assert!(series_cdf_coeffs(&unit(10.0), &series_coeffs(2.0, 3).unwrap()).is_err());
    }

    #[test]
    fn cdf_limits() {
        let c = series_cdf_coeffs(&unit(1000.0), &series_coeffs(1.0, 10).unwrap()).unwrap();
        assert!(cdf_eq(&c, 0.0).unwrap().raw.abs() < 1e-13);
        assert_eq!(cdf_eq(&c, f64::INFINITY).unwrap().value, 1.0);
        assert!((cdf_eq(&c, 60.0).unwrap().value - 1.0).abs() < 1e-15);
        assert!(cdf_eq(&c, -1.0).is_err());
    }

    #[test]
    fn srd_limits() {
        let p = unit(1000.0);
        let b = BesselBackend::default();
        assert_eq!(cdf_srd_exact(&p, 0.0, &b).unwrap(), 0.0);
        assert!(cdf_srd_exact(&p, 50.0 / 2.0, &b).unwrap() >= 1.0 - 1e-6);
        assert!(pdf_srd_exact(&p, 0.0, &b).is_err());
    }

    #[test]
    fn minbound_closed_form() {
        // λ_sd = 1, λ_S = 2
        let p = ChannelParams::new(10.0, 1.0, 1.0, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert_relative_eq!(cdf_minbound(&p, 1.0).unwrap(), 1.0 - 2.0 / e + 1.0 / (e * e), max_relative = 1e-14);
        assert_relative_eq!(cdf_minbound(&p, 1.0).unwrap(), 0.39958, max_relative = 1e-5);
        assert_eq!(cdf_minbound(&p, 0.0).unwrap(), 0.0);
        // Erlang branch: λ_sd = λ_S = 2
        let p = ChannelParams::new(10.0, 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(cdf_minbound(&p, 0.5).unwrap(), 1.0 - (-1.0f64).exp() * 2.0, max_relative = 1e-14);
    }
}
