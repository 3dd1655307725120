//! Reference modes at regular and limit-circle endpoints, limit numbers of
//! arbitrary solutions and the SL(2,ℝ) re-choice of modes.
//!
//! All quantities are expressed in the inward coordinate s ≥ 0 measured
//! from the endpoint, so the modes on the left side of a line are mirror
//! images of those on the right.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::classify::{classify_endpoint, Verdict};
use crate::error::{Error, Result};
use crate::model::{Endpoint, KineticWeight, PotentialFamily, PotentialSpec, Problem, Robin, SingularTail};
use crate::numerics::extrapolate::Estimate;
use crate::numerics::ode::{integrate_real, From};
use crate::numerics::{Grid, SolutionSamples};

pub type Real2 = [[f64; 2]; 2];

const IDENTITY: Real2 = [[1.0, 0.0], [0.0, 1.0]];

/// Closed-form (series) description of the modes near the endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeHead {
    /// Bounded V ≈ v0 and p ≈ p0: φ⁽¹⁾ = −s/p0 + …, φ⁽²⁾ = 1 + ….
    Regular { v0: f64, p0: f64 },
    /// V = c/s² + shift: φ⁽¹⁾ = s^{ν₊}(1 + …), φ⁽²⁾ = −s^{ν₋}(1 + …)/√(1+4c).
    InverseSquare { c: f64, shift: f64 },
    /// V = g/s + shift: φ⁽¹⁾ = −s + …, φ⁽²⁾ = 1 + g s ln|g|s + ….
    Coulomb { g: f64, shift: f64 },
    /// p = b·s^α with V = a·s^{α−2}: φ⁽¹⁾ = s^{s₁}, φ⁽²⁾ = s^{s₂}/(b(s₂−s₁)); leading order only.
    Euler { b: f64, alpha: f64, s1: f64, s2: f64 },
}

impl ModeHead {
    /// (φ, pφ′) of both modes at distance s for energy e, derivative taken
    /// along the inward coordinate.
    pub fn eval(&self, s: f64, e: f64) -> [(f64, f64); 2] {
        match *self {
            ModeHead::Regular { v0, p0 } => {
                let q = (v0 - e) / p0;
                let (s1, c) = if q > 0.0 {
                    let k = q.sqrt();
                    ((k * s).sinh() / k, (k * s).cosh())
                } else if q < 0.0 {
                    let k = (-q).sqrt();
                    ((k * s).sin() / k, (k * s).cos())
                } else {
                    (s, 1.0)
                };
                [(-s1 / p0, -c), (c, p0 * q * s1)]
            }
            ModeHead::InverseSquare { c, shift } => {
                let root = (1.0 + 4.0 * c).sqrt();
                let e = e - shift;
                let (a, da) = frobenius_even(0.5 * (1.0 + root), e, s);
                let (b, db) = frobenius_even(0.5 * (1.0 - root), e, s);
                [(a, da), (-b / root, -db / root)]
            }
            ModeHead::Coulomb { g, shift } => coulomb_pair(g, e - shift, s),
            ModeHead::Euler { b, alpha, s1, s2 } => {
                let n = b * (s2 - s1);
                [(s.powf(s1), b * s1 * s.powf(s1 + alpha - 1.0)), (s.powf(s2) / n, s2 * s.powf(s2 + alpha - 1.0) / (s2 - s1))]
            }
        }
    }
}

impl ModeHead {
    /// Powers (p, m) of the terms s^p (ln s)^m by which pW[φ_j, ψ] approaches
    /// its limit when ψ solves the equation at a nearby energy.
    pub fn correction_powers(&self, j: usize) -> Vec<(f64, u32)> {
        let mut out: Vec<(f64, u32)> = match *self {
            ModeHead::Regular { .. } => (1..=6).map(|k| (k as f64, 0)).collect(),
            ModeHead::Coulomb { .. } => {
                let mut v = vec![(1.0, 0)];
                for k in 2..=5 {
                    v.extend([(k as f64, 1), (k as f64, 0)]);
                }
                v
            }
            ModeHead::InverseSquare { c, .. } => {
                let r = (1.0 + 4.0 * c).sqrt();
                let a = [0.5 * (1.0 + r), 0.5 * (1.0 - r)];
                let mut v: Vec<(f64, u32)> = Vec::new();
                for k in 0..2 {
                    for extra in [0.0, 2.0] {
                        v.push((a[j] + a[k] + 1.0 + extra, 0));
                    }
                }
                v
            }
            ModeHead::Euler { alpha, s1, s2, .. } => {
                let a = [s1, s2];
                let mut v: Vec<(f64, u32)> = Vec::new();
                for k in 0..2 {
                    for extra in [0.0, 2.0 - alpha] {
                        v.push((a[j] + a[k] + 1.0 + extra, 0));
                    }
                }
                v
            }
        };
        out.retain(|p| p.0 > 0.0);
        out.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
        let mut kept: Vec<(f64, u32)> = Vec::new();
        for p in out {
            if kept.iter().all(|q| (q.0 - p.0).abs() > 0.05 || q.1 != p.1) {
                kept.push(p);
            }
        }
        kept
    }
}

/// s^ν Σ A_n s^{2n} for −ψ″ + (c/s²)ψ = Eψ and its derivative.
pub(crate) fn frobenius_even(nu: f64, e: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = nu;
    for n in 1..400 {
        let nf = n as f64;
        term *= -e * s2 / (2.0 * nf * (2.0 * nu + 2.0 * nf - 1.0));
        sum += term;
        dsum += term * (nu + 2.0 * nf);
        if term.abs() <= 1e-18 * sum.abs() && n > 2 {
            break;
        }
    }
    let p = s.powf(nu);
    (p * sum, p * dsum / s)
}

/// Frobenius pair for −u″ + (g/s)u = Eu with limit numbers (1,0), (0,1).
fn coulomb_pair(g: f64, e: f64, s: f64) -> [(f64, f64); 2] {
    // u1 = Σ a_n s^{n+1}; u2 = g·u1·ln(|g|s) + Σ b_n s^n with b0 = 1, b1 = 0.
    let mut a = vec![1.0];
    let mut b = vec![1.0, 0.0];
    let (mut u1, mut du1) = (s, 1.0);
    let (mut bb, mut dbb) = (1.0, 0.0);
    let mut sp = s; // s^n
    for n in 1..400 {
        let nf = n as f64;
        let an = (g * a[n - 1] - if n >= 2 { e * a[n - 2] } else { 0.0 }) / (nf * (nf + 1.0));
        a.push(an);
        // (m+1)m b_{m+1} = g b_m − E b_{m−1} − g(2m+1) a_m with m = n.
        let m = nf;
        let bn1 = (g * b[n] - e * b[n - 1] - g * (2.0 * m + 1.0) * a[n]) / ((m + 1.0) * m);
        b.push(bn1);
        let t1 = an * sp * s;
        u1 += t1;
        du1 += an * (nf + 1.0) * sp;
        let tb = b[n] * sp;
        bb += tb;
        dbb += b[n] * nf * sp / s;
        let tb1 = bn1 * sp * s;
        let scale = u1.abs() + bb.abs();
        if n > 3 && t1.abs() <= 1e-18 * scale && tb.abs() <= 1e-18 * scale && tb1.abs() <= 1e-18 * scale {
            break;
        }
        sp *= s;
    }
    let (u2, du2) = if g == 0.0 {
        (bb, dbb)
    } else {
        let l = (g.abs() * s).ln();
        (g * u1 * l + bb, g * (du1 * l + u1 / s) + dbb)
    };
    [(-u1, -du1), (u2, du2)]
}

/// A normalized pair (φ⁽¹⁾, φ⁽²⁾) at one endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModePair {
    endpoint: Endpoint,
    location: f64,
    inward: f64,
    e0: f64,
    head: ModeHead,
    transform: Real2,
    samples: [SolutionSamples; 2],
    exact_to: f64,
    scale: f64,
}

/// Limit numbers (c⁽¹⁾, c⁽²⁾) with the size of the extrapolation correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitNumbers {
    pub c1: C64,
    pub c2: C64,
    pub error: f64,
}

/// Map induced on boundary parameters by a change of reference modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterMap {
    m: Real2,
}

impl ReferenceModePair {
    pub fn endpoint(&self) -> Endpoint {
        self.endpoint
    }

    /// Endpoint location and inward direction (+1 or −1).
    pub fn geometry(&self) -> (f64, f64) {
        (self.location, self.inward)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn head(&self) -> ModeHead {
        self.head
    }

    /// φ′ = Mφ relative to the built-in pair.
    pub fn transform(&self) -> Real2 {
        self.transform
    }

    /// Numerically extended samples (x coordinates, x-derivatives).
    pub fn samples(&self) -> [SolutionSamples; 2] {
        let m = self.transform;
        let [a, b] = &self.samples;
        let mk = |r: usize| a.combine(C64::new(m[r][0], 0.0), b, C64::new(m[r][1], 0.0)).expect("shared grid");
        [mk(0), mk(1)]
    }

    /// (φ_j, pφ_j′) at inward distance s, derivative along s.
    pub fn eval(&self, s: f64) -> [(f64, f64); 2] {
        apply(&self.transform, self.head.eval(s, self.e0))
    }

    /// Solutions at energy e with limit numbers (1,0) and (0,1) relative to
    /// this pair, evaluated at inward distance s.
    pub fn eval_at_energy(&self, s: f64, e: f64) -> [(f64, f64); 2] {
        apply(&self.transform, self.head.eval(s, e))
    }

    /// Initial data (ψ, pψ′ along x) at inward distance s for the solution at
    /// energy e with limit numbers (c1, c2).
    pub fn seed(&self, s: f64, e: f64, c1: f64, c2: f64) -> (f64, f64) {
        let [(p1, d1), (p2, d2)] = self.eval_at_energy(s, e);
        (c1 * p1 + c2 * p2, self.inward * (c1 * d1 + c2 * d2))
    }
}

fn apply(m: &Real2, v: [(f64, f64); 2]) -> [(f64, f64); 2] {
    let row = |r: usize| (m[r][0] * v[0].0 + m[r][1] * v[1].0, m[r][0] * v[0].1 + m[r][1] * v[1].1);
    [row(0), row(1)]
}

pub(crate) fn head_for(problem: &Problem, endpoint: Endpoint) -> Result<ModeHead> {
    let (loc, _) = problem.domain().geometry(endpoint)?;
    let pot = problem.potential();
    if loc.is_infinite() {
        return Err(Error::Unsupported("reference modes at an infinite endpoint".into()));
    }
    if loc != 0.0 {
        return Ok(ModeHead::Regular { v0: pot.value(loc), p0: pot.weight(loc) });
    }
    if let KineticWeight::PowerLaw { coefficient: b, exponent: alpha } = *pot.weight_spec() {
        if alpha != 0.0 {
            return euler_head(pot, b, alpha);
        }
    }
    let p0 = pot.weight(0.0);
    let unit = pot.has_unit_weight();
    let need_unit = |h: ModeHead| {
        if unit {
            Ok(h)
        } else {
            Err(Error::Unsupported("singular potential combined with a non-unit weight".into()))
        }
    };
    match pot.family() {
        PotentialFamily::Free => Ok(ModeHead::Regular { v0: 0.0, p0 }),
        PotentialFamily::InverseSquare { c } if *c == 0.0 => Ok(ModeHead::Regular { v0: 0.0, p0 }),
        PotentialFamily::InverseSquare { c } => {
            if *c <= -0.25 {
                return Err(Error::Unsupported("inverse-square coupling c <= -1/4 has complex exponents".into()));
            }
            need_unit(ModeHead::InverseSquare { c: *c, shift: 0.0 })
        }
        PotentialFamily::Coulomb { g } | PotentialFamily::CoulombPlusCentrifugal { g, l: 0 } => {
            if *g == 0.0 {
                Ok(ModeHead::Regular { v0: 0.0, p0 })
            } else {
                need_unit(ModeHead::Coulomb { g: *g, shift: 0.0 })
            }
        }
        PotentialFamily::CoulombPlusCentrifugal { .. } => Err(Error::LimitPointEndpoint),
        PotentialFamily::PowerLaw { coefficient, exponent } => {
            if *coefficient == 0.0 || *exponent > 0.0 {
                Ok(ModeHead::Regular { v0: 0.0, p0 })
            } else if *exponent == 0.0 {
                Ok(ModeHead::Regular { v0: *coefficient, p0 })
            } else if *exponent == -2.0 && *coefficient > -0.25 {
                need_unit(ModeHead::InverseSquare { c: *coefficient, shift: 0.0 })
            } else if *exponent == -1.0 {
                need_unit(ModeHead::Coulomb { g: *coefficient, shift: 0.0 })
            } else {
                Err(Error::UnknownAsymptotics)
            }
        }
        PotentialFamily::Tabulated(t) => {
            let (x, v) = t.samples();
            match t.tail() {
                None if x[0] == 0.0 => Ok(ModeHead::Regular { v0: v[0], p0 }),
                None => Err(Error::UnknownAsymptotics),
                Some(SingularTail::Power { exponents: [a, b] }) => {
                    let c = -a * b;
                    need_unit(ModeHead::InverseSquare { c, shift: v[0] - c / (x[0] * x[0]) })
                }
                Some(SingularTail::Coulomb { g }) => need_unit(ModeHead::Coulomb { g, shift: v[0] - g / x[0] }),
            }
        }
    }
}

fn euler_head(pot: &PotentialSpec, b: f64, alpha: f64) -> Result<ModeHead> {
    let a = match pot.family() {
        PotentialFamily::Free => 0.0,
        PotentialFamily::PowerLaw { coefficient, exponent } if (*exponent - (alpha - 2.0)).abs() < 1e-14 => *coefficient,
        _ => return Err(Error::UnknownAsymptotics),
    };
    let disc = (1.0 - alpha) * (1.0 - alpha) + 4.0 * a / b;
    if disc <= 0.0 {
        return Err(Error::Unsupported("weighted endpoint with degenerate or complex exponents".into()));
    }
    let r = disc.sqrt();
    Ok(ModeHead::Euler { b, alpha, s1: 0.5 * (1.0 - alpha + r), s2: 0.5 * (1.0 - alpha - r) })
}

/// Inward distance up to which the head series is exact and summable.
pub(crate) fn head_exact_range(problem: &Problem, location: f64, e0: f64) -> f64 {
    let pot = problem.potential();
    let exact = if location != 0.0 || matches!(pot.weight_spec(), KineticWeight::Tabulated { .. }) {
        0.0
    } else {
        match pot.family() {
            PotentialFamily::Tabulated(t) => match t.tail() {
                Some(_) => t.samples().0[0],
                None => 0.0,
            },
            _ => f64::INFINITY,
        }
    };
    if e0 == 0.0 {
        exact
    } else {
        exact.min((400.0 / e0.abs()).sqrt())
    }
}

/// Samples of both modes: the head where it is exact, Numerov beyond.
fn extend_modes(
    pot: &PotentialSpec,
    head: &ModeHead,
    e0: f64,
    location: f64,
    inward: f64,
    exact_to: f64,
    grid: &Grid,
) -> Result<[SolutionSamples; 2]> {
    let n = grid.len();
    // Index order from the endpoint outward.
    let idx: Vec<usize> = if inward > 0.0 { (0..n).collect() } else { (0..n).rev().collect() };
    let dist = |i: usize| inward * (grid.nodes()[i] - location);
    let mut n_head = idx.iter().take_while(|&&i| dist(i) <= exact_to).count().max(1);
    if n_head < n {
        n_head = n_head.min(n.saturating_sub(8)).max(1);
    }
    let mut out = Vec::with_capacity(2);
    for j in 0..2 {
        let mut psi = vec![0.0; n];
        let mut pd = vec![0.0; n];
        for &i in &idx[..n_head] {
            let (v, d) = head.eval(dist(i), e0)[j];
            psi[i] = v;
            pd[i] = inward * d;
        }
        if n_head < n {
            let start = idx[n_head - 1];
            let (a, b, from) = if inward > 0.0 { (start, n, From::First) } else { (0, start + 1, From::Last) };
            let sub = grid.slice(a, b);
            let sol = integrate_real(pot, e0, from, (psi[start], pd[start]), &sub)?;
            psi[a..b].copy_from_slice(&sol.psi);
            pd[a..b].copy_from_slice(&sol.p_dpsi);
        }
        out.push(SolutionSamples::from_real(grid.clone(), &psi, &pd));
    }
    Ok(out.try_into().expect("two modes"))
}

/// Built-in reference modes at a regular or limit-circle endpoint.
pub fn reference_modes(problem: &Problem, endpoint: Endpoint, e0: f64) -> Result<ReferenceModePair> {
    if !e0.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let class = classify_endpoint(problem, endpoint, e0)?;
    if class.verdict == Verdict::LimitPoint {
        return Err(Error::LimitPointEndpoint);
    }
    let head = head_for(problem, endpoint)?;
    if matches!(head, ModeHead::Euler { .. }) && e0 != 0.0 {
        return Err(Error::Unsupported("weighted reference modes are built at E0 = 0 only".into()));
    }
    let (location, inward) = problem.domain().geometry(endpoint)?;
    let far = match problem.domain().kind() {
        crate::model::DomainKind::Interval => (0.5 * (problem.domain().upper() - problem.domain().lower())).min(1.0),
        _ => 1.0,
    };
    let near = 1e-6 * far;
    let grid = Grid::log_toward_step(location, inward, near, far, std::f64::consts::LN_10 / 200.0)?;
    let exact_to = head_exact_range(problem, location, e0);
    let samples = extend_modes(problem.potential(), &head, e0, location, inward, exact_to, &grid)?;
    Ok(ReferenceModePair { endpoint, location, inward, e0, head, transform: IDENTITY, samples, exact_to: exact_to.max(far), scale: far })
}

/// Reference modes of every endpoint that needs a condition, in the order
/// of the boundary space: (Lower) for half lines, (MarkedPlus, MarkedMinus)
/// for lines, (Lower, Upper) for intervals.
pub fn boundary_modes(problem: &Problem) -> Result<Vec<ReferenceModePair>> {
    let eps: Vec<Endpoint> = match problem.domain().kind() {
        crate::model::DomainKind::HalfLine => vec![Endpoint::Lower],
        crate::model::DomainKind::Line => vec![Endpoint::MarkedPlus, Endpoint::MarkedMinus],
        crate::model::DomainKind::Interval => vec![Endpoint::Lower, Endpoint::Upper],
    };
    eps.into_iter().map(|ep| reference_modes(problem, ep, problem.e0())).collect()
}

/// φ⁽²⁾ = φ⁽¹⁾∫_{x0}^x dx′/(pφ⁽¹⁾²) by fourth-order Hermite quadrature.
pub fn second_solution(potential: &PotentialSpec, phi1: &SolutionSamples, x0: f64) -> Result<SolutionSamples> {
    let nodes = phi1.grid().nodes();
    let n = nodes.len();
    let i0 = phi1.grid().nearest_index(x0)?;
    let f: Vec<f64> = phi1.psi().iter().map(|z| z.re).collect();
    let q: Vec<f64> = phi1.p_dpsi().iter().map(|z| z.re).collect();
    if phi1.psi().iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidParameter("second_solution expects a real solution".into()));
    }
    for i in 0..n {
        if f[i] == 0.0 || (i > 0 && f[i].signum() != f[i - 1].signum()) {
            return Err(Error::ZeroInRange { x: nodes[i] });
        }
    }
    let p = |x: f64| potential.weight(x);
    let dp = |x: f64| {
        if potential.has_unit_weight() {
            0.0
        } else {
            let h = 1e-6 * x.abs().max(1e-3);
            (p(x + h) - p(x - h)) / (2.0 * h)
        }
    };
    let g: Vec<f64> = (0..n).map(|i| 1.0 / (p(nodes[i]) * f[i] * f[i])).collect();
    let dg: Vec<f64> = (0..n)
        .map(|i| {
            let x = nodes[i];
            let w = p(x) * f[i] * f[i];
            -(dp(x) * f[i] * f[i] + 2.0 * f[i] * q[i]) / (w * w)
        })
        .collect();
    let mut integral = vec![0.0; n];
    let seg = |i: usize| {
        let h = nodes[i + 1] - nodes[i];
        0.5 * h * (g[i] + g[i + 1]) + h * h / 12.0 * (dg[i] - dg[i + 1])
    };
    for i in i0..n - 1 {
        integral[i + 1] = integral[i] + seg(i);
    }
    for i in (0..i0).rev() {
        integral[i] = integral[i + 1] - seg(i);
    }
    let psi: Vec<f64> = (0..n).map(|i| f[i] * integral[i]).collect();
    let pd: Vec<f64> = (0..n).map(|i| q[i] * integral[i] + 1.0 / f[i]).collect();
    Ok(SolutionSamples::from_real(phi1.grid().clone(), &psi, &pd))
}

/// Wronskians pW[φ_j, ψ] along the inward coordinate with a rounding-noise
/// scale, ordered from far to near.
struct Profile {
    s: Vec<f64>,
    w: Vec<[C64; 2]>,
    noise: Vec<[f64; 2]>,
}

fn wronskian_profile(psi: &SolutionSamples, modes: &ReferenceModePair) -> Profile {
    let (loc, inward) = modes.geometry();
    let mut rows: Vec<(f64, [C64; 2], [f64; 2])> = psi
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            let s = inward * (x - loc);
            if s <= 0.0 {
                return None;
            }
            let v = psi.psi()[i];
            let dv = inward * psi.p_dpsi()[i];
            let mut w = [C64::new(0.0, 0.0); 2];
            let mut noise = [0.0; 2];
            for (j, (f, d)) in modes.eval(s).into_iter().enumerate() {
                w[j] = f * dv - d * v;
                noise[j] = 1e-11 * ((f * dv).norm() + (d * v).norm());
            }
            Some((s, w, noise))
        })
        .collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    Profile { s: rows.iter().map(|r| r.0).collect(), w: rows.iter().map(|r| r.1).collect(), noise: rows.iter().map(|r| r.2).collect() }
}

impl Profile {
    /// Least-squares fit W(s) = W(0) + Σ A_k s^{p_k} (ln s)^{m_k} over the
    /// window [lo, hi]; returns the intercept and a truncation error
    /// estimate from dropping the last basis term.
    fn limit(&self, j: usize, basis: &[(f64, u32)], lo: f64, hi: f64) -> Result<Estimate<C64>> {
        let rows: Vec<usize> = (0..self.s.len()).filter(|&i| self.s[i] >= lo && self.s[i] <= hi).collect();
        if rows.len() < basis.len() + 4 {
            return Err(Error::InvalidParameter("too few solution samples near the endpoint".into()));
        }
        let fit = |nb: usize| -> (C64, f64) {
            let a = DMatrix::from_fn(rows.len(), nb + 1, |r, c| {
                if c == 0 {
                    1.0
                } else {
                    let (p, m) = basis[c - 1];
                    let t = self.s[rows[r]] / hi;
                    t.powf(p) * t.ln().powi(m as i32)
                }
            });
            let y = DMatrix::from_fn(rows.len(), 2, |r, c| {
                let w = self.w[rows[r]][j];
                if c == 0 {
                    w.re
                } else {
                    w.im
                }
            });
            let svd = a.clone().svd(true, true);
            let x = svd.solve(&y, 1e-14).expect("svd with vectors");
            let res = (&a * &x - &y).norm() / (rows.len() as f64).sqrt();
            (C64::new(x[(0, 0)], x[(0, 1)]), res)
        };
        let (full, res) = fit(basis.len());
        let (trunc, _) = fit(basis.len().saturating_sub(1));
        let scale = rows.iter().map(|&i| self.w[i][0].norm().max(self.w[i][1].norm())).fold(0.0, f64::max);
        let noise = rows.iter().map(|&i| self.noise[i][j]).fold(0.0, f64::max);
        if res > 1e-5 * scale && res > 100.0 * noise {
            return Err(Error::NonConvergent("boundary Wronskian does not settle toward the endpoint".into()));
        }
        Ok(Estimate { value: full, error: (full - trunc).norm().max(res) })
    }
}

/// c⁽¹⁾ = lim −pW[φ⁽²⁾, ψ], c⁽²⁾ = lim pW[φ⁽¹⁾, ψ] at the endpoint.
pub fn limit_numbers(psi: &SolutionSamples, modes: &ReferenceModePair) -> Result<LimitNumbers> {
    let profile = wronskian_profile(psi, modes);
    if profile.s.len() < 3 {
        return Err(Error::InvalidParameter("solution grid does not reach the endpoint side".into()));
    }
    let s_min = profile.s[profile.s.len() - 1];
    let s_max = profile.s[0];
    let hi = (0.1 * modes.scale).min(modes.exact_to).min(s_max);
    let lo = (hi * 1e-2).max(s_min);
    if hi / lo < 10.0 {
        return Err(Error::InvalidParameter("solution grid does not approach the endpoint".into()));
    }
    let powers = |j: usize| {
        if modes.transform == IDENTITY {
            return modes.head.correction_powers(j);
        }
        // Re-chosen modes mix both channels' corrections.
        let mut p = modes.head.correction_powers(0);
        for q in modes.head.correction_powers(1) {
            if p.iter().all(|r| (r.0 - q.0).abs() > 0.05 || r.1 != q.1) {
                p.push(q);
            }
        }
        p.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
        p
    };
    let w1 = profile.limit(0, &powers(0), lo, hi)?;
    let w2 = profile.limit(1, &powers(1), lo, hi)?;
    Ok(LimitNumbers { c1: -w2.value, c2: w1.value, error: w1.error.max(w2.error) })
}

impl ParameterMap {
    pub fn matrix(&self) -> Real2 {
        self.m
    }

    /// Linear map on one side's (Γ₁, Γ₂).
    pub fn gamma_map(&self, l0: f64) -> Real2 {
        let m = self.m;
        [[m[0][0], m[0][1] / l0], [l0 * m[1][0], m[1][1]]]
    }

    /// Robin condition accepting the same solutions after the re-choice.
    pub fn map_robin(&self, robin: &Robin) -> Result<Robin> {
        let l0 = robin.l0();
        let (s, c) = robin.half_angle();
        // Accepted ray (Γ₁, Γ₂) ∝ (cos, −sin); map it and read the angle back.
        let t = self.gamma_map(l0);
        let g1 = t[0][0] * c - t[0][1] * s;
        let g2 = t[1][0] * c - t[1][1] * s;
        let (mut sn, mut cs) = (-g2, g1);
        if sn < 0.0 || (sn == 0.0 && cs < 0.0) {
            sn = -sn;
            cs = -cs;
        }
        let mut theta = 2.0 * sn.atan2(cs);
        if theta >= std::f64::consts::TAU {
            theta = 0.0;
        }
        if sn == 0.0 {
            theta = 0.0;
        } else if cs == 0.0 {
            theta = std::f64::consts::PI;
        }
        Robin::from_theta(theta, l0)
    }
}

/// Re-choose the modes as φ′ = Mφ with det M = 1.
pub fn transform_modes(modes: &ReferenceModePair, m: Real2) -> Result<(ReferenceModePair, ParameterMap)> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if (det - 1.0).abs() > 1e-12 || m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::BadDeterminant { det });
    }
    let t = modes.transform;
    let mut composed = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            composed[r][c] = m[r][0] * t[0][c] + m[r][1] * t[1][c];
        }
    }
    let mut out = modes.clone();
    out.transform = composed;
    Ok((out, ParameterMap { m }))
}
