//! Scalar special functions used across the crate.
//!
//! `ln Γ` for positive arguments and `erfc` come from `statrs`; this module
//! adds the signed log-gamma on the negative axis and the generalized
//! exponential integral `E_n`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use statrs::function::erf::erfc;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
///
/// Negative non-integer arguments go through the reflection formula
/// `Γ(x) Γ(1 - x) = π / sin(πx)`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma of non-finite argument {x}")));
    }
    if x > 0.0 {
        return Ok((statrs::function::gamma::ln_gamma(x), 1.0));
    }
    if x == x.floor() {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    let s = (PI * x).sin();
    let ln_abs = PI.ln() - s.abs().ln() - statrs::function::gamma::ln_gamma(1.0 - x);
    Ok((ln_abs, s.signum()))
}

/// `ln(n!)`, exact summation for small `n`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Scaled generalized exponential integral `e^x E_n(x)` for `x > 0`, `n ≥ 1`,
/// where `E_n(x) = ∫_1^∞ e^{-xt} t^{-n} dt`.
///
/// Power series below `x = 1`, Lentz continued fraction above. The scaling
/// keeps large arguments representable.
pub fn exp_integral_scaled(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("E_n requires n >= 1"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("E_n requires finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return if n == 1 {
            Err(Error::domain("E_1 diverges at 0"))
        } else {
            Ok(1.0 / (n as f64 - 1.0))
        };
    }
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    let nm1 = n - 1;
    if x > 1.0 {
        let tiny = 1e-300;
        let mut b = x + n as f64;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -((i * (nm1 + i)) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok(h);
            }
        }
        Err(Error::domain(format!("E_{n}({x}) continued fraction did not converge")))
    } else {
        let mut ans = if nm1 != 0 {
            1.0 / nm1 as f64
        } else {
            -x.ln() - EULER_GAMMA
        };
        let mut fact = 1.0;
        for i in 1..=MAX_ITER {
            fact *= -x / i as f64;
            let del = if i != nm1 {
                -fact / (i as f64 - nm1 as f64)
            } else {
                let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / j as f64).sum::<f64>();
                fact * (-x.ln() + psi)
            };
            ans += del;
            if del.abs() < ans.abs() * EPS {
                return Ok(ans * x.exp());
            }
        }
        Err(Error::domain(format!("E_{n}({x}) series did not converge")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_reflection() {
        // Γ(-1/2) = -2√π
        let (l, s) = ln_gamma_signed(-0.5).unwrap();
        assert_eq!(s, -1.0);
        assert_relative_eq!(l.exp(), 2.0 * PI.sqrt(), max_relative = 1e-13);
        // Γ(-3/2) = 4√π/3
        let (l, s) = ln_gamma_signed(-1.5).unwrap();
        assert_eq!(s, 1.0);
        assert_relative_eq!(l.exp(), 4.0 * PI.sqrt() / 3.0, max_relative = 1e-13);
        assert!(ln_gamma_signed(-2.0).is_err());
        assert!(ln_gamma_signed(0.0).is_err());
    }

    #[test]
    fn e1_reference_values() {
        let cases = [
            (0.5, 0.559_773_594_776_160_8),
            (1.0, 0.219_383_934_395_520_27),
            (2.0, 0.048_900_510_708_061_12),
            (10.0, 4.156_968_929_685_324e-6),
        ];
        for (x, e1) in cases {
            let got = exp_integral_scaled(1, x).unwrap() * (-x as f64).exp();
            assert_relative_eq!(got, e1, max_relative = 1e-12);
        }
    }

    #[test]
    fn en_recurrence() {
        // n E_{n+1}(x) = e^{-x} - x E_n(x)
        for &x in &[0.1, 0.7, 1.0, 1.3, 4.0, 25.0] {
            for n in 1..12 {
                let lhs = n as f64 * exp_integral_scaled(n + 1, x).unwrap();
                let rhs = 1.0 - x * exp_integral_scaled(n, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-11, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn en_at_zero() {
        assert_relative_eq!(exp_integral_scaled(3, 0.0).unwrap(), 0.5);
        assert!(exp_integral_scaled(1, 0.0).is_err());
        assert!(exp_integral_scaled(0, 1.0).is_err());
    }
}
