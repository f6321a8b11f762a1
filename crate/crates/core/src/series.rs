//! Series representation of `K_ν` in elementary functions.
//!
//! For `ν > 0` outside the half-integers,
//!
//! ```text
//! K_ν(z) = e^{-z} Σ_{n≥0} Σ_{i=0}^{n} Λ(ν,n,i) z^{i-ν}
//!
//! Λ(ν,n,i) = (-1)^i √π Γ(2ν) Γ(1/2+n-ν) L(n,i)
//!            ─────────────────────────────────────
//!            2^{ν-i} Γ(1/2-ν) Γ(1/2+n+ν) n!
//! ```
//!
//! with `L(n,i)` the Lah numbers. Truncating the outer sum at `k` and
//! collecting equal powers of `z` gives
//! `K_ν(z) ≈ e^{-z} z^{-ν} Σ_{q=0}^{k} a_{ν,k,q} z^q`, where
//! `a_{ν,k,q} = Σ_{l=q}^{k} Λ(ν,l,q)`.
//!
//! Accuracy against the quadrature oracle is characterised for
//! `z ∈ [0.05, 10]`; the truncated polynomial is not a convergent
//! approximation for large `z`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, ln_gamma_signed};

/// Largest supported truncation depth.
pub const K_MAX: usize = 30;

/// Lah number `L(n, i) = C(n-1, i-1)·n!/i!`, exact.
///
/// `L(0,0) = 1` and `L(n,0) = 0` for `n > 0`.
pub fn lah(n: usize, i: usize) -> Result<BigUint> {
    if i > n {
        return Err(Error::domain(format!("Lah number L({n},{i}) requires i <= n")));
    }
    if n == 0 {
        return Ok(BigUint::one());
    }
    if i == 0 {
        return Ok(BigUint::zero());
    }
    // C(n-1, i-1) · n!/i! = C(n-1, i-1) · (i+1)(i+2)…n
    let mut binom = BigUint::one();
    for j in 0..(i - 1) {
        binom = binom * BigUint::from(n - 1 - j) / BigUint::from(j + 1);
    }
    let rising: BigUint = ((i + 1)..=n).map(BigUint::from).product();
    Ok(binom * rising)
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        v.to_f64().expect("fits in f64").ln()
    } else {
        let shift = bits - 64;
        (v >> shift).to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Order `ν` of the Bessel function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOrder(f64);

impl SeriesOrder {
    /// Rejects `ν ≤ 0` and half-integer orders, where the Gamma factors of
    /// `Λ` have poles.
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(Error::domain(format!("series order must be positive, got {nu}")));
        }
        let offset = nu - 0.5;
        if (offset - offset.round()).abs() < 1e-12 {
            return Err(Error::domain(format!("half-integer order unsupported (nu = {nu})")));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Outer-sum cutoff `k`, `0 ≤ k ≤ K_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationDepth(usize);

impl TruncationDepth {
    pub fn new(k: usize) -> Result<Self> {
        if k > K_MAX {
            return Err(Error::domain(format!("truncation depth {k} exceeds K_MAX = {K_MAX}")));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> usize {
        self.0
    }
}

/// `Λ(ν, n, i)`, evaluated in the log-Gamma domain with the sign tracked
/// separately (`Γ(1/2 - ν)` is negative for `ν ∈ (1/2, 3/2)`).
pub fn lambda_coeff(order: SeriesOrder, n: usize, i: usize) -> Result<f64> {
    let lah = lah(n, i)?;
    if lah.is_zero() {
        return Ok(0.0);
    }
    let nu = order.value();
    let (ln_g2nu, s_g2nu) = ln_gamma_signed(2.0 * nu)?;
    let (ln_num, s_num) = ln_gamma_signed(0.5 + n as f64 - nu)?;
    let (ln_den, s_den) = ln_gamma_signed(0.5 - nu)?;
    let (ln_den2, s_den2) = ln_gamma_signed(0.5 + n as f64 + nu)?;

    let ln_abs = 0.5 * PI.ln() + ln_g2nu + ln_num + ln_biguint(&lah)
        - (nu - i as f64) * std::f64::consts::LN_2
        - ln_den
        - ln_den2
        - ln_factorial(n);
    let parity = if i % 2 == 0 { 1.0 } else { -1.0 };
    Ok(parity * s_g2nu * s_num * s_den * s_den2 * ln_abs.exp())
}

/// The collapsed coefficients `a_{ν,k,q}` for `q = 0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    nu: f64,
    k: usize,
    a: Vec<f64>,
}

impl CoefficientTable {
    /// Builds a table from explicit coefficients; `a.len()` fixes `k`.
    pub fn from_coefficients(nu: f64, a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::domain("coefficient table needs at least one entry"));
        }
        Ok(Self { nu, k: a.len() - 1, a })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    /// `e^{-z} z^{-ν} Σ_q a_q z^q`.
    pub fn evaluate(&self, z: f64) -> Result<f64> {
        check_argument(z)?;
        let poly = self.a.iter().rev().fold(0.0, |acc, &c| acc * z + c);
        Ok((-z - self.nu * z.ln()).exp() * poly)
    }
}

fn check_argument(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("series argument must be finite and positive, got {z}")));
    }
    Ok(())
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn coeffs_unchecked(order: SeriesOrder, k: usize) -> Result<CoefficientTable> {
    let mut a = Vec::with_capacity(k + 1);
    for q in 0..=k {
        let terms = (q..=k)
            .map(|l| lambda_coeff(order, l, q))
            .collect::<Result<Vec<_>>>()?;
        // Smallest terms first.
        let mut terms = terms;
        terms.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        a.push(compensated_sum(terms));
    }
    Ok(CoefficientTable {
        nu: order.value(),
        k,
        a,
    })
}

/// `a_{ν,k,q} = Σ_{l=q}^{k} Λ(ν,l,q)` for `q = 0..=k`.
pub fn series_coeffs(nu: f64, k: usize) -> Result<CoefficientTable> {
    let order = SeriesOrder::new(nu)?;
    let depth = TruncationDepth::new(k)?;
    coeffs_unchecked(order, depth.value())
}

/// A truncated series value and its successive-depth error estimate
/// `|S_k - S_{k+1}|`. The estimate is not a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedValue {
    pub value: f64,
    pub epsilon_estimate: f64,
}

/// `K_ν(z)` from the depth-`k` collapsed series.
pub fn eval_k_truncated(nu: f64, k: usize, z: f64) -> Result<TruncatedValue> {
    let order = SeriesOrder::new(nu)?;
    let depth = TruncationDepth::new(k)?;
    check_argument(z)?;
    let value = coeffs_unchecked(order, depth.value())?.evaluate(z)?;
    let next = coeffs_unchecked(order, depth.value() + 1)?.evaluate(z)?;
    Ok(TruncatedValue {
        value,
        epsilon_estimate: (value - next).abs(),
    })
}

fn k0_from_tables(k1: &CoefficientTable, k2: &CoefficientTable, z: f64) -> Result<f64> {
    Ok(k2.evaluate(z)? - 2.0 / z * k1.evaluate(z)?)
}

/// `K_0(z) = K_2(z) - (2/z) K_1(z)`, both from the depth-`k` series.
pub fn eval_k0_truncated(k: usize, z: f64) -> Result<TruncatedValue> {
    let depth = TruncationDepth::new(k)?.value();
    check_argument(z)?;
    let one = SeriesOrder::new(1.0)?;
    let two = SeriesOrder::new(2.0)?;
    let value = k0_from_tables(&coeffs_unchecked(one, depth)?, &coeffs_unchecked(two, depth)?, z)?;
    let next = k0_from_tables(
        &coeffs_unchecked(one, depth + 1)?,
        &coeffs_unchecked(two, depth + 1)?,
        z,
    )?;
    Ok(TruncatedValue {
        value,
        epsilon_estimate: (value - next).abs(),
    })
}

/// The uncollapsed double sum `e^{-z} Σ_{n≤k} Σ_{i≤n} Λ(ν,n,i) z^{i-ν}`,
/// summed row by row.
pub fn eval_k_rowwise(nu: f64, k: usize, z: f64) -> Result<f64> {
    let order = SeriesOrder::new(nu)?;
    let depth = TruncationDepth::new(k)?.value();
    check_argument(z)?;
    let mut total = Vec::with_capacity((depth + 1) * (depth + 2) / 2);
    for n in 0..=depth {
        for i in 0..=n {
            total.push(lambda_coeff(order, n, i)? * z.powi(i as i32));
        }
    }
    Ok((-z - nu * z.ln()).exp() * compensated_sum(total))
}

/// `dⁿ/dxⁿ e^{-β/x} = e^{-β/x} (-1)ⁿ x^{-n} Σ_{i=0}^{n} (-1)^i L(n,i) (β/x)^i`.
pub fn deriv_exp_reciprocal(n: usize, beta: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !(beta > 0.0) {
        return Err(Error::domain("deriv_exp_reciprocal requires beta > 0 and x > 0"));
    }
    let ratio = beta / x;
    let mut sum = 0.0;
    for i in 0..=n {
        let l = lah(n, i)?.to_f64().unwrap_or(f64::INFINITY);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * l * ratio.powi(i as i32);
    }
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok((-ratio).exp() * sign_n * x.powi(-(n as i32)) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lah_examples() {
        assert_eq!(lah(0, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(lah(3, 0).unwrap(), BigUint::from(0u32));
        assert_eq!(lah(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(lah(4, 2).unwrap(), BigUint::from(36u32));
        assert_eq!(lah(5, 5).unwrap(), BigUint::from(1u32));
        assert!(lah(2, 3).is_err());
    }

    #[test]
    fn lah_beyond_u64() {
        // L(25,1) = 25!
        let f25: BigUint = (1..=25u32).map(BigUint::from).product();
        assert_eq!(lah(25, 1).unwrap(), f25);
        assert!(lah(25, 1).unwrap() > BigUint::from(u64::MAX));
    }

    #[test]
    fn order_validation() {
        assert!(SeriesOrder::new(0.5).is_err());
        assert!(SeriesOrder::new(1.5).is_err());
        assert!(SeriesOrder::new(2.5).is_err());
        assert!(SeriesOrder::new(0.0).is_err());
        assert!(SeriesOrder::new(-1.0).is_err());
        assert!(SeriesOrder::new(f64::NAN).is_err());
        assert!(SeriesOrder::new(1.0).is_ok());
        assert!(SeriesOrder::new(0.25).is_ok());
        assert!(series_coeffs(0.0, 3).is_err());
        let msg = series_coeffs(0.5, 2).unwrap_err().to_string();
        assert!(msg.contains("half-integer order unsupported"), "{msg}");
    }

    #[test]
    fn depth_validation() {
        assert!(TruncationDepth::new(K_MAX).is_ok());
        assert!(TruncationDepth::new(K_MAX + 1).is_err());
        assert!(series_coeffs(1.0, K_MAX + 1).is_err());
    }

    #[test]
    fn lambda_examples() {
        let one = SeriesOrder::new(1.0).unwrap();
        assert_relative_eq!(lambda_coeff(one, 0, 0).unwrap(), 1.0, max_relative = 1e-14);
        for n in 1..12 {
            assert_eq!(lambda_coeff(one, n, 0).unwrap(), 0.0);
        }
        // Λ(1,n,1) = 2/(4n²-1); in particular Λ(1,2,1) = 2/15.
        assert_relative_eq!(lambda_coeff(one, 2, 1).unwrap(), 2.0 / 15.0, max_relative = 1e-13);
        assert!(lambda_coeff(one, 1, 2).is_err());
    }

    #[test]
    fn lambda_sums_to_table_entry() {
        let one = SeriesOrder::new(1.0).unwrap();
        let s = lambda_coeff(one, 1, 1).unwrap() + lambda_coeff(one, 2, 1).unwrap();
        assert_relative_eq!(s, 0.8, max_relative = 1e-13);
    }

    #[test]
    fn table_row_k2() {
        let t = series_coeffs(1.0, 2).unwrap();
        assert_eq!(t.coefficients().len(), 3);
        assert_relative_eq!(t.coefficients()[0], 1.0, max_relative = 1e-13);
        assert_relative_eq!(t.coefficients()[1], 0.8, max_relative = 1e-13);
        assert_relative_eq!(t.coefficients()[2], -2.0 / 15.0, max_relative = 1e-13);
    }

    #[test]
    fn evaluation_is_linear_in_table() {
        let t = series_coeffs(1.0, 5).unwrap();
        let zeros = CoefficientTable::from_coefficients(1.0, vec![0.0; 6]).unwrap();
        assert_eq!(zeros.evaluate(1.3).unwrap(), 0.0);
        let scaled = CoefficientTable::from_coefficients(
            1.0,
            t.coefficients().iter().map(|c| 3.0 * c).collect(),
        )
        .unwrap();
        assert_relative_eq!(
            scaled.evaluate(0.7).unwrap(),
            3.0 * t.evaluate(0.7).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(eval_k_truncated(1.0, 2, 0.0).is_err());
        assert!(eval_k_truncated(1.0, 2, -1.0).is_err());
        assert!(eval_k0_truncated(2, 0.0).is_err());
    }

    #[test]
    fn k0_recurrence_identity() {
        for &z in &[0.3, 1.0, 4.0] {
            let k0 = eval_k0_truncated(10, z).unwrap().value;
            let k1 = eval_k_truncated(1.0, 10, z).unwrap().value;
            let k2 = eval_k_truncated(2.0, 10, z).unwrap().value;
            assert!((k0 + 2.0 / z * k1 - k2).abs() <= 1e-15 * k2.abs());
        }
    }

    #[test]
    fn derivative_examples() {
        assert_relative_eq!(deriv_exp_reciprocal(0, 1.7, 0.9).unwrap(), (-1.7f64 / 0.9).exp());
        assert_relative_eq!(
            deriv_exp_reciprocal(1, 1.0, 2.0).unwrap(),
            (-0.5f64).exp() / 4.0,
            max_relative = 1e-15
        );
        assert!(deriv_exp_reciprocal(1, 1.0, 0.0).is_err());
    }
}
