//! Stationary scattering: half-line phase shifts, the line S-matrix,
//! transmission filter curves and the Wigner time delay.
//!
//! On the half line the scattering solution is e^{−ikx} − e^{2iδ}·e^{ikx}.
//! On the line, S[a][b] is the outgoing amplitude on side a for a unit
//! incoming wave on side b, with sides ordered (x > 0, x < 0).

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, DomainKind, Endpoint, Mat2, PotentialFamily, PotentialSpec, Problem, Robin};
use crate::numerics::ode::{integrate_real, From};
use crate::numerics::Grid;
use crate::refmodes::head_for;
use crate::spectrum::{recessive_seed, seed_for, Seed, S_MIN};

/// Below this wavenumber the time delay is declared ill-conditioned.
pub const K_MIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringPoint {
    pub k: f64,
    /// Half-line phase shift.
    pub delta: Option<f64>,
    /// Line S-matrix.
    pub s: Option<Mat2>,
    /// Transmission probability |t|² (0 on the half line).
    pub transmission: f64,
    /// Wigner time delay (half line).
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    LowPass,
    HighPass,
    Neither,
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::LowPass => "low-pass",
            FilterKind::HighPass => "high-pass",
            FilterKind::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterCurve {
    /// (k, |t|²) in the order of the input grid.
    pub points: Vec<(f64, f64)>,
    pub kind: FilterKind,
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
    }
    Ok(())
}

fn check_short_range(pot: &PotentialSpec) -> Result<()> {
    if !pot.has_unit_weight() {
        return Err(Error::Unsupported("scattering supports unit kinetic weight only".into()));
    }
    match pot.family() {
        PotentialFamily::Coulomb { g } | PotentialFamily::CoulombPlusCentrifugal { g, .. } if *g != 0.0 => {
            Err(Error::LongRange("Coulomb tail modifies the free asymptotics".into()))
        }
        PotentialFamily::PowerLaw { coefficient, exponent } if *coefficient != 0.0 && *exponent >= -1.0 => {
            Err(Error::LongRange(format!("power law r^{exponent} does not decay fast enough")))
        }
        PotentialFamily::Tabulated(t) if *t.samples().1.last().expect("non-empty table") != 0.0 => {
            Err(Error::Unsupported("tabulated potential must vanish beyond the table".into()))
        }
        _ => Ok(()),
    }
}

fn is_free(pot: &PotentialSpec) -> bool {
    matches!(pot.family(), PotentialFamily::Free) && pot.has_unit_weight()
}

/// Matching radius for wavenumber k: just past the support of a compact
/// potential, far out for power tails.
fn match_radius(pot: &PotentialSpec, k: f64) -> f64 {
    match pot.family() {
        PotentialFamily::Free => 20.0,
        PotentialFamily::Tabulated(t) => t.samples().0.last().expect("non-empty table") + 20.0,
        _ => 400.0f64.max(100.0 / k),
    }
}

/// Amplitudes (A, B) of ψ ≈ A·e^{−iks} + B·e^{iks} for the solution seeded
/// by `seed`, read once at radius x_m with a WKB correction for the tail.
fn far_amplitudes(problem: &Problem, seed: Seed, k: f64, x_m: f64) -> Result<(C64, C64)> {
    let e = k * k;
    let pot = problem.potential();
    let s_start = seed.exact_to(problem, e).min(0.5 * 1f64.min(1.0 / k)).max(S_MIN);
    let mut state = seed.eval(s_start, e);
    let mut x = s_start;
    if x < 1.0 {
        let g = Grid::log_toward_step(0.0, 1.0, x, 1.0, 0.002)?;
        let out = integrate_real(pot, e, From::First, state, &g)?;
        state = (*out.psi.last().expect("nodes"), *out.p_dpsi.last().expect("nodes"));
        x = 1.0;
    }
    let g = Grid::uniform_step(x, x_m, 0.01f64.min(0.005 / k))?;
    let out = integrate_real(pot, e, From::First, state, &g)?;
    let (psi, dpsi) = (*out.psi.last().expect("nodes"), *out.p_dpsi.last().expect("nodes"));
    let v = pot.value(x_m);
    if !(v.abs() < 0.01 * e) {
        return Err(Error::NonConvergent(format!("potential not negligible at the matching radius {x_m}")));
    }
    let q = (e - v).sqrt();
    // ∫ₓ^∞ (k − q) for a tail decaying like x^{−p}.
    let remainder = if v != 0.0 {
        let ratio = pot.value(2.0 * x_m) / v;
        let p = if ratio > 0.0 { -ratio.log2() } else { f64::INFINITY };
        if p > 1.0 && p.is_finite() {
            v * x_m / (2.0 * k * (p - 1.0))
        } else {
            0.0
        }
    } else {
        0.0
    };
    let theta = k * x_m + remainder;
    let iq = C64::new(0.0, q);
    let amp = (q / k).sqrt();
    let a = C64::from_polar(amp, theta) * (iq * psi - dpsi) / (2.0 * iq);
    let b = C64::from_polar(amp, -theta) * (iq * psi + dpsi) / (2.0 * iq);
    Ok((a, b))
}

/// e^{2iδ} from the numeric solution at matching radius x1.
fn phase_factor_numeric(problem: &Problem, k: f64, x1: f64) -> Result<C64> {
    let robin = match problem.bc() {
        BoundaryCondition::HalfLineRobin(r) => Some(*r),
        _ => None,
    };
    let seed = seed_for(problem, robin.as_ref())?;
    let (a, b) = far_amplitudes(problem, seed, k, x1)?;
    let s = -b / a;
    Ok(s / s.norm())
}

fn free_phase(robin: &Robin, k: f64) -> f64 {
    match robin.length().finite() {
        Some(l) => -(k * l).atan(),
        None => -0.5 * std::f64::consts::PI,
    }
}

fn halfline_robin(problem: &Problem) -> Result<Option<Robin>> {
    if problem.domain().kind() != DomainKind::HalfLine {
        return Err(Error::InvalidParameter("phase shifts need a half-line problem".into()));
    }
    Ok(match problem.bc() {
        BoundaryCondition::HalfLineRobin(r) => Some(*r),
        _ => None,
    })
}

fn wrap_phase(delta: f64) -> f64 {
    let half_pi = 0.5 * std::f64::consts::PI;
    if delta >= half_pi - 1e-12 {
        delta - 2.0 * half_pi
    } else {
        delta
    }
}

/// Phase shift δ ∈ [−π/2, π/2) extracted from the numeric solution.
pub fn phase_shift_halfline_numeric(problem: &Problem, k: f64) -> Result<f64> {
    check_k(k)?;
    halfline_robin(problem)?;
    check_short_range(problem.potential())?;
    Ok(wrap_phase(0.5 * phase_factor_numeric(problem, k, match_radius(problem.potential(), k))?.arg()))
}

/// Phase shift δ ∈ [−π/2, π/2); closed form −arctan(kL) on the free half line.
pub fn phase_shift_halfline(problem: &Problem, k: f64) -> Result<f64> {
    check_k(k)?;
    let robin = halfline_robin(problem)?;
    check_short_range(problem.potential())?;
    match robin {
        Some(r) if is_free(problem.potential()) => Ok(free_phase(&r, k)),
        _ => phase_shift_halfline_numeric(problem, k),
    }
}

/// Closed-form free half-line delay −L/(k(1 + k²L²)).
pub fn free_time_delay(length: f64, k: f64) -> f64 {
    -length / (k * (1.0 + k * k * length * length))
}

/// Wigner delay τ = 2·dδ/dE = (dδ/dk)/k by centered differences on δ(k),
/// Richardson-combined over two steps.
pub fn wigner_time_delay(problem: &Problem, k: f64) -> Result<f64> {
    check_k(k)?;
    if k < K_MIN {
        return Err(Error::IllConditioned(format!("time delay below k = {K_MIN}")));
    }
    let robin = halfline_robin(problem)?;
    check_short_range(problem.potential())?;
    let factor: Box<dyn Fn(f64) -> Result<C64> + Sync> = match robin {
        Some(r) if is_free(problem.potential()) => Box::new(move |q| Ok(C64::from_polar(1.0, 2.0 * free_phase(&r, q)))),
        _ => {
            let x1 = match_radius(problem.potential(), k);
            Box::new(move |q| phase_factor_numeric(problem, q, x1))
        }
    };
    let diff = |h: f64| -> Result<f64> {
        let ratio = factor(k + h)? / factor(k - h)?;
        Ok(0.5 * ratio.arg() / (2.0 * h))
    };
    let h = 1e-3 * k;
    let (d1, d2) = (diff(h)?, diff(0.5 * h)?);
    Ok((4.0 * d2 - d1) / 3.0 / k)
}

fn inv2(m: &Mat2) -> Option<Mat2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if !(det.norm() > 1e-14 * scale * scale) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// Line S-matrix for the condition U of the problem at wavenumber k.
pub fn smatrix_line(problem: &Problem, k: f64) -> Result<Mat2> {
    check_k(k)?;
    let u = match (problem.domain().kind(), problem.bc()) {
        (DomainKind::Line, BoundaryCondition::LineU2(u)) => *u,
        _ => return Err(Error::InvalidParameter("the S-matrix needs a line problem with a U(2) condition".into())),
    };
    let pot = problem.potential();
    check_short_range(pot)?;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let half = Problem::half_line(pot.clone(), Robin::dirichlet(u.l0())?)?;
    let x1 = match_radius(problem.potential(), k);
    if let Some(seed) = recessive_seed(pot) {
        // The two sides never communicate through a limit-point origin.
        let (a, b) = far_amplitudes(&half, seed, k, x1)?;
        let r = b / a;
        return Ok([[r / r.norm(), zero], [zero, r / r.norm()]]);
    }
    // Amplitudes of the solutions with (Γ₁, Γ₂) = (1, 0) and (0, 1).
    let l0 = u.l0();
    let basis = if is_free(pot) {
        let i = C64::new(0.0, 1.0);
        [(0.5 * one, 0.5 * one), (i / (2.0 * k * l0), -i / (2.0 * k * l0))]
    } else {
        let head = head_for(&half, Endpoint::Lower)?;
        [far_amplitudes(&half, Seed::Modes { head, c: (0.0, 1.0) }, k, x1)?, far_amplitudes(&half, Seed::Modes { head, c: (-1.0 / l0, 0.0) }, k, x1)?]
    };
    let m = u.matrix();
    let i = C64::new(0.0, 1.0);
    // Γ₁ = X·w, Γ₂ = Y·w spans the solutions of the condition.
    let x: Mat2 = [[-i * (m[0][0] + one), -i * m[0][1]], [-i * m[1][0], -i * (m[1][1] + one)]];
    let y: Mat2 = [[m[0][0] - one, m[0][1]], [m[1][0], m[1][1] - one]];
    let comb =
        |p: C64, q: C64| -> Mat2 { [[p * x[0][0] + q * y[0][0], p * x[0][1] + q * y[0][1]], [p * x[1][0] + q * y[1][0], p * x[1][1] + q * y[1][1]]] };
    let incoming = comb(basis[0].0, basis[1].0);
    let outgoing = comb(basis[0].1, basis[1].1);
    let inv = inv2(&incoming).ok_or_else(|| Error::SingularSystem("boundary condition admits no scattering solution".into()))?;
    Ok(mul2(&outgoing, &inv))
}

/// Largest |S†S − 1| entry.
pub fn unitarity_defect(s: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut z = s[0][i].conj() * s[0][j] + s[1][i].conj() * s[1][j];
            if i == j {
                z -= 1.0;
            }
            d = d.max(z.norm());
        }
    }
    d
}

/// Full scattering record for a half-line or line problem.
pub fn scatter(problem: &Problem, k: f64) -> Result<ScatteringPoint> {
    match problem.domain().kind() {
        DomainKind::HalfLine => {
            let delta = phase_shift_halfline(problem, k)?;
            let tau = if k >= K_MIN { Some(wigner_time_delay(problem, k)?) } else { None };
            Ok(ScatteringPoint { k, delta: Some(delta), s: None, transmission: 0.0, tau })
        }
        DomainKind::Line => {
            let s = smatrix_line(problem, k)?;
            Ok(ScatteringPoint { k, delta: None, s: Some(s), transmission: s[0][1].norm_sqr().min(1.0), tau: None })
        }
        DomainKind::Interval => Err(Error::Unsupported("scattering on intervals".into())),
    }
}

/// |t|²(k) on a grid, classified by comparing the means of the lowest and
/// highest thirds of the grid.
pub fn filter_curve(problem: &Problem, k_grid: &[f64]) -> Result<FilterCurve> {
    if k_grid.len() < 3 {
        return Err(Error::InvalidParameter("filter curve needs at least three wavenumbers".into()));
    }
    let ts: Vec<Result<f64>> = k_grid.par_iter().map(|&k| smatrix_line(problem, k).map(|s| s[0][1].norm_sqr().min(1.0))).collect();
    let mut points = Vec::with_capacity(k_grid.len());
    for (k, t) in k_grid.iter().zip(ts) {
        points.push((*k, t?));
    }
    let third = (points.len() / 3).max(1);
    let mean = |p: &[(f64, f64)]| p.iter().map(|q| q.1).sum::<f64>() / p.len() as f64;
    let low = mean(&points[..third]);
    let high = mean(&points[points.len() - third..]);
    let mid = if points.len() > 2 * third { mean(&points[third..points.len() - third]) } else { 0.5 * (low + high) };
    // A pass band must also dominate the middle band; a peaked curve is neither.
    let kind = if low > high + 0.05 && low + 0.05 >= mid {
        FilterKind::LowPass
    } else if high > low + 0.05 && high + 0.05 >= mid {
        FilterKind::HighPass
    } else {
        FilterKind::Neither
    };
    Ok(FilterCurve { points, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExtendedReal, PointInteraction};

    fn free_half(l: ExtendedReal) -> Problem {
        Problem::half_line(PotentialSpec::free(), Robin::from_length(l, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn free_phase_examples() {
        let p = free_half(ExtendedReal::Finite(1.0));
        let d = phase_shift_halfline(&p, 1.0).unwrap();
        assert!((d + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let s = C64::from_polar(1.0, 2.0 * d);
        assert!((s - C64::new(0.0, -1.0)).norm() < 1e-15);
        for k in [0.3, 2.0] {
            let d0 = phase_shift_halfline(&free_half(ExtendedReal::Finite(0.0)), k).unwrap();
            assert!(C64::from_polar(1.0, 2.0 * d0).re > 1.0 - 1e-15);
            let di = phase_shift_halfline(&free_half(ExtendedReal::Infinite), k).unwrap();
            assert!((C64::from_polar(1.0, 2.0 * di) + 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn numeric_phase_matches_closed_form() {
        for l in [-2.0, 0.5, 3.0] {
            let p = free_half(ExtendedReal::Finite(l));
            for k in [0.1, 0.7, 3.0, 10.0] {
                let want = C64::new(1.0, -k * l) / C64::new(1.0, k * l);
                let d = phase_shift_halfline_numeric(&p, k).unwrap();
                let got = C64::from_polar(1.0, 2.0 * d);
                assert!((got - want).norm() < 1e-8, "L {l} k {k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn time_delay_closed_form_and_sign() {
        let p = free_half(ExtendedReal::Finite(1.0));
        let tau = wigner_time_delay(&p, 1.0).unwrap();
        assert!((tau - free_time_delay(1.0, 1.0)).abs() < 1e-9 && (tau + 0.5).abs() < 1e-9);
        for l in [-2.0, -0.3, 0.4, 5.0] {
            let p = free_half(ExtendedReal::Finite(l));
            for k in [0.05, 0.5, 4.0] {
                let tau = wigner_time_delay(&p, k).unwrap();
                assert!(((tau - free_time_delay(l, k)) / free_time_delay(l, k)).abs() < 1e-6);
                assert_eq!(tau.signum(), -l.signum());
            }
        }
        assert_eq!(wigner_time_delay(&free_half(ExtendedReal::Finite(0.0)), 1.0).unwrap(), 0.0);
        assert!(wigner_time_delay(&p, 1e-4).is_err());
    }

    #[test]
    fn numeric_time_delay_matches() {
        let p = free_half(ExtendedReal::Finite(1.0));
        let x1 = match_radius(p.potential(), 1.0);
        let f = |q: f64| phase_factor_numeric(&p, q, x1).unwrap();
        let h = 1e-3;
        let tau = 0.5 * (f(1.0 + h) / f(1.0 - h)).arg() / (2.0 * h);
        assert!((tau + 0.5).abs() < 1e-5);
    }

    #[test]
    fn coulomb_rejected() {
        let p = Problem::half_line(PotentialSpec::coulomb(-2.0).unwrap(), Robin::dirichlet(1.0).unwrap()).unwrap();
        assert!(matches!(phase_shift_halfline(&p, 1.0), Err(Error::LongRange(_))));
    }

    #[test]
    fn inverse_square_phase_is_unimodular_and_shifted() {
        // c = 2 (l = 1): regular solution k·x·j₁(kx), δ = −π/2 in this convention.
        let p = Problem::new(crate::model::Domain1D::half_line(), PotentialSpec::inverse_square(2.0).unwrap(), BoundaryCondition::Intrinsic).unwrap();
        let d = phase_shift_halfline(&p, 1.0).unwrap();
        let s = C64::from_polar(1.0, 2.0 * d);
        assert!((s + 1.0).norm() < 1e-4, "{s}");
    }

    #[test]
    fn line_separated_and_transparent() {
        let z = ExtendedReal::Finite;
        let sep = PointInteraction::from_lengths(z(1.0), z(-0.5), 0.0, 0.0, 1.0).unwrap();
        let p = Problem::line(PotentialSpec::free(), sep).unwrap();
        for k in [0.1, 1.0, 7.0] {
            let s = smatrix_line(&p, k).unwrap();
            assert!(s[0][1].norm_sqr() < 1e-24 && s[1][0].norm_sqr() < 1e-24);
            assert!(unitarity_defect(&s) < 1e-12);
            let want = -C64::new(1.0, -k) / C64::new(1.0, k);
            assert!((s[0][0] - want).norm() < 1e-12);
        }
        let t = Problem::line(PotentialSpec::free(), PointInteraction::transparent(1.0).unwrap()).unwrap();
        let s = smatrix_line(&t, 2.0).unwrap();
        assert!((s[0][1] - 1.0).norm() < 1e-12 && s[0][0].norm() < 1e-12);
    }

    #[test]
    fn delta_transmission() {
        // Continuity with a jump α in ψ′: t = 2ik/(2ik − α).
        let alpha = 1.5;
        let p = Problem::line(PotentialSpec::free(), PointInteraction::delta(alpha, 1.0).unwrap()).unwrap();
        for k in [0.2, 1.0, 4.0] {
            let s = smatrix_line(&p, k).unwrap();
            let want = (2.0 * k / (4.0 * k * k + alpha * alpha).sqrt()).powi(2);
            assert!((s[0][1].norm_sqr() - want).abs() < 1e-12, "k {k}");
            assert!(unitarity_defect(&s) < 1e-12);
        }
    }

    #[test]
    fn inverse_square_wings_tunnel() {
        let u = PointInteraction::from_lengths(ExtendedReal::Finite(1.0), ExtendedReal::Finite(-2.0), 0.7, 0.0, 1.0).unwrap();
        let p = Problem::line(PotentialSpec::inverse_square(0.3).unwrap(), u).unwrap();
        let curve = filter_curve(&p, &[0.3, 1.0, 3.0]).unwrap();
        assert!(curve.points.iter().any(|q| q.1 > 1e-3), "{curve:?}");
        for k in [0.3, 3.0] {
            let s = smatrix_line(&p, k).unwrap();
            assert!(unitarity_defect(&s) < 1e-8);
            assert!((s[0][1].norm() - s[1][0].norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn filter_classification() {
        let z = ExtendedReal::Finite;
        let sep = PointInteraction::from_lengths(z(1.0), z(2.0), 0.0, 0.0, 1.0).unwrap();
        let p = Problem::line(PotentialSpec::free(), sep).unwrap();
        let ks: Vec<f64> = (0..21).map(|j| 0.1 * 100f64.powf(j as f64 / 20.0)).collect();
        assert_eq!(filter_curve(&p, &ks).unwrap().kind, FilterKind::Neither);
        let d = Problem::line(PotentialSpec::free(), PointInteraction::delta(1.0, 1.0).unwrap()).unwrap();
        let c1 = filter_curve(&d, &ks).unwrap();
        assert_eq!(c1.kind, FilterKind::HighPass);
        let fine: Vec<f64> = (0..41).map(|j| 0.1 * 100f64.powf(j as f64 / 40.0)).collect();
        assert_eq!(filter_curve(&d, &fine).unwrap().kind, c1.kind);
        let quarter = std::f64::consts::FRAC_PI_4;
        let low = PointInteraction::from_lengths(ExtendedReal::Infinite, z(0.5), quarter, 0.0, 1.0).unwrap();
        let c = filter_curve(&Problem::line(PotentialSpec::free(), low).unwrap(), &ks).unwrap();
        assert_eq!(c.kind, FilterKind::LowPass);
        let peaked = PointInteraction::from_lengths(z(1.0), z(-0.5), quarter, 0.0, 1.0).unwrap();
        let c = filter_curve(&Problem::line(PotentialSpec::free(), peaked).unwrap(), &ks).unwrap();
        assert!(c.points[10].1 > 0.8 && c.points[0].1 < 0.1 && c.points[20].1 < 0.1);
        assert_eq!(c.kind, FilterKind::Neither);
    }
}
