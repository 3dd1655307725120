//! Bracketing and Brent polishing for scalar roots.

use crate::error::{Error, Result};

/// An interval with a sign change of the scanned function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Scan `[lo, hi]` with `n_probes` points and return every sign change.
/// Sub-intervals are split at the declared `poles`, so a pole is never
/// reported as a root.
pub fn bracket_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n_probes: usize, poles: &[f64]) -> Vec<Bracket> {
    let mut out = Vec::new();
    if !(lo < hi) || n_probes < 2 {
        return out;
    }
    let mut cuts: Vec<f64> = poles.iter().copied().filter(|p| *p > lo && *p < hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);
    let width = hi - lo;
    for seg in edges.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let pad = 1e-12 * (a.abs() + b.abs() + 1.0);
        let a = if poles.contains(&a) { a + pad } else { a };
        let b = if poles.contains(&b) { b - pad } else { b };
        if !(a < b) {
            continue;
        }
        let n = ((n_probes as f64 * (b - a) / width).ceil() as usize).max(2);
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..n {
            let x = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
            let fx = f(x);
            if !fx.is_finite() {
                prev = None;
                continue;
            }
            if let Some((xp, fp)) = prev {
                if fp != 0.0 && (fx == 0.0 || fp.signum() != fx.signum()) {
                    out.push(Bracket { lo: xp, hi: x, f_lo: fp, f_hi: fx });
                }
            }
            prev = Some((x, fx));
        }
    }
    out
}

/// Brent's method on a bracket; converges to |Δx| ≤ xtol + rtol·|x|.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64, rtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotFound(format!("no sign change on [{lo}, {hi}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::RootNotFound(format!("function not finite at {b}")));
        }
    }
    Err(Error::RootNotFound("Brent iteration limit".into()))
}
