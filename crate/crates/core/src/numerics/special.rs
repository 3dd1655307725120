//! Digamma function and the Coulomb level function F̃.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn digamma_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_2k / (2k x^2k), k = 1..7.
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    x.ln() - 0.5 / x - series
}

fn digamma_positive(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    acc + digamma_asymptotic(x)
}

/// Ψ(x) = Γ′(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("digamma argument {x} is not finite")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole { x });
    }
    if x > 0.0 {
        return Ok(digamma_positive(x));
    }
    // Reflection Ψ(x) = Ψ(1 − x) − π cot(πx), with the period of cot reduced exactly.
    let frac = x - x.floor();
    let (s, c) = (PI * frac).sin_cos();
    Ok(digamma_positive(1.0 - x) - PI * c / s)
}

/// F̃(ξ) = Ψ(1+ξ) − ln|ξ| − 1/(2ξ) − Ψ(1) − Ψ(2).
pub fn f_tilde(xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::Pole { x: 0.0 });
    }
    let psi = digamma(1.0 + xi).map_err(|_| Error::Pole { x: xi })?;
    // Ψ(1) + Ψ(2) = 1 − 2γ.
    Ok(psi - xi.abs().ln() - 0.5 / xi - (1.0 - 2.0 * EULER_GAMMA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identities() {
        assert_abs_diff_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, epsilon = 1e-14);
        assert_abs_diff_eq!(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, epsilon = 1e-14);
        assert_abs_diff_eq!(digamma(0.5).unwrap(), -EULER_GAMMA - 2.0 * 2f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn reference_values() {
        let table = [
            (-49.5, 3.912_039_670_928_392),
            (-3.7, -0.845_076_858_870_416_7),
            (-0.3, 2.113_309_779_635_398_7),
            (0.1, -10.423_754_940_411_077),
            (0.7, -1.220_023_553_697_934_6),
            (2.5, 0.703_156_640_645_243_2),
            (13.3, 2.549_699_213_309_268_3),
            (49.9, 3.899_967_496_953_373_3),
            (1e-3, -1000.5755719318103),
            (-12.25, 5.687_379_961_836_387),
        ];
        for (x, want) in table {
            assert_abs_diff_eq!(digamma(x).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn recurrence_lattice() {
        for i in 1..=100 {
            let x = 0.1 * i as f64;
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert_abs_diff_eq!(lhs, 1.0 / x, epsilon = 1e-12);
        }
    }

    #[test]
    fn poles_rejected() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(digamma(x), Err(Error::Pole { .. })));
        }
        assert!(f_tilde(0.0).is_err());
        assert!(f_tilde(-2.0).is_err());
    }

    #[test]
    fn f_tilde_diverges_near_poles() {
        for n in 1..5 {
            let v = f_tilde(-(n as f64) + 1e-9).unwrap();
            assert!(v.abs() > 1e7, "n = {n}: {v}");
        }
    }
}
