//! Richardson and Aitken extrapolation.

use num_complex::Complex64 as C64;

/// A limit estimate with the size of the last correction as error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Two-point Richardson extrapolation of v(h) = v₀ + C·h^order.
pub fn richardson(h1: f64, v1: f64, h2: f64, v2: f64, order: f64) -> Estimate<f64> {
    let r1 = h1.abs().powf(order);
    let r2 = h2.abs().powf(order);
    let value = (r1 * v2 - r2 * v1) / (r1 - r2);
    Estimate { value, error: (value - v2).abs() }
}

/// Aitken Δ² on three samples taken at geometrically shrinking distance
/// from the limit point, ordered from far to near.
pub fn aitken(far: C64, mid: C64, near: C64) -> Estimate<C64> {
    let d1 = mid - far;
    let d2 = near - mid;
    let denom = d2 - d1;
    let scale = far.norm().max(mid.norm()).max(near.norm());
    // Already converged or not geometric: keep the nearest sample.
    if d2.norm() <= 1e-15 * scale || denom.norm() <= 1e-15 * scale {
        return Estimate { value: near, error: d2.norm() };
    }
    let ratio = d2 / d1;
    if !(ratio.norm() < 1.0) {
        return Estimate { value: near, error: f64::INFINITY };
    }
    let value = near - d2 * d2 / denom;
    Estimate { value, error: (value - near).norm() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn richardson_removes_leading_term() {
        let f = |h: f64| 2.0 + 3.0 * h * h + 0.1 * h.powi(4);
        let e = richardson(0.1, f(0.1), 0.05, f(0.05), 2.0);
        assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn aitken_exact_on_geometric() {
        let f = |s: f64| C64::new(1.0, -2.0) + C64::new(0.3, 0.1) * s.powf(0.5);
        let e = aitken(f(1e-2), f(1e-3), f(1e-4));
        assert!((e.value - C64::new(1.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn aitken_divergent_flagged() {
        let e = aitken(C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0));
        assert!(e.error.is_infinite());
    }
}
