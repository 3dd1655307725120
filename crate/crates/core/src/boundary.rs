//! Boundary data and self-adjoint boundary conditions.
//!
//! For every endpoint the boundary values are read off from the limit
//! numbers of the reference modes,
//!
//! Γ₁ψ = lim pW[φ⁽¹⁾, ψ] = c⁽²⁾,  Γ₂ψ = L₀·lim pW[φ⁽²⁾, ψ] = −L₀c⁽¹⁾,
//!
//! with Wronskians taken along the inward coordinate. At a regular endpoint
//! with modes (−s, 1) this is Γ₁ = ψ(0), Γ₂ = L₀·∂ₛψ(0). On a line the
//! boundary space is ℂ² with component 0 for x > 0 and component 1 for
//! x < 0; on the left side ∂ₛ = −∂ₓ, so continuity of ψ and ψ′ reads
//! Γ₁₊ = Γ₁₋, Γ₂₊ = −Γ₂₋ and is selected by U = σₓ.
//!
//! A condition is the Lagrangian subspace (U − 1)Γ₁ + i(U + 1)Γ₂ = 0; on a
//! half line U = e^{iϑ} and this is the Robin condition Γ₁ + (L/L₀)Γ₂ = 0
//! with L = L₀·cot(ϑ/2).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{DomainKind, Endpoint, Mat2, PointInteraction, Problem, Robin};
use crate::numerics::SolutionSamples;
use crate::refmodes::{boundary_modes, limit_numbers, LimitNumbers, ParameterMap, ReferenceModePair};

pub use crate::refmodes::transform_modes;

/// Boundary values (Γ₁ψ, Γ₂ψ) in the boundary space ℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub gamma1: Vec<C64>,
    pub gamma2: Vec<C64>,
    /// Extrapolation error carried over from the limit numbers.
    pub error: f64,
    pub l0: f64,
}

impl BoundaryData {
    /// Boundary data from limit numbers, one entry per endpoint.
    pub fn from_limit_numbers(ln: &[LimitNumbers], l0: f64) -> Self {
        Self {
            gamma1: ln.iter().map(|c| c.c2).collect(),
            gamma2: ln.iter().map(|c| -l0 * c.c1).collect(),
            error: ln.iter().map(|c| c.error).fold(0.0, f64::max),
            l0,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma1.len()
    }

    /// (Γ₁ψ, Γ₂χ) − (Γ₂ψ, Γ₁χ) with the ℂⁿ inner product antilinear on the left.
    pub fn boundary_form(&self, other: &BoundaryData) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.dim().min(other.dim()) {
            acc += self.gamma1[k].conj() * other.gamma2[k] - self.gamma2[k].conj() * other.gamma1[k];
        }
        acc
    }

    fn norm(&self) -> f64 {
        self.gamma1.iter().chain(&self.gamma2).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Same data measured in units of another reference length.
    pub fn with_l0(&self, l0: f64) -> Self {
        let f = l0 / self.l0;
        Self { gamma1: self.gamma1.clone(), gamma2: self.gamma2.iter().map(|z| z * f).collect(), error: self.error * f.max(1.0), l0 }
    }
}

/// Boundary data of ψ at every endpoint that needs a condition.
///
/// `psi` holds one sample set, or for a line optionally two (x > 0 first).
pub fn boundary_data(psi: &[SolutionSamples], problem: &Problem) -> Result<BoundaryData> {
    let modes = boundary_modes(problem)?;
    boundary_data_with(psi, &modes, problem.bc().l0())
}

/// As [`boundary_data`] with reference modes built beforehand.
pub fn boundary_data_with(psi: &[SolutionSamples], modes: &[ReferenceModePair], l0: f64) -> Result<BoundaryData> {
    if psi.is_empty() {
        return Err(Error::InvalidParameter("no samples given".into()));
    }
    let mut ln = Vec::with_capacity(modes.len());
    for (k, m) in modes.iter().enumerate() {
        let samples = if psi.len() == modes.len() { &psi[k] } else { &psi[0] };
        ln.push(limit_numbers(samples, m)?);
    }
    Ok(BoundaryData::from_limit_numbers(&ln, l0))
}

/// sin(ϑ/2)γ₁ + cos(ϑ/2)γ₂ for one channel.
fn channel_residual(theta: f64, g1: C64, g2: C64) -> C64 {
    let (s, c) = Robin::from_theta(theta, 1.0).map(|r| r.half_angle()).unwrap_or(((0.5 * theta).sin(), (0.5 * theta).cos()));
    g1 * s + g2 * c
}

/// Check Γ₁ + (L/L₀)Γ₂ = 0 on a half line.
///
/// Returns the verdict and the residual |Γ₁ + (L/L₀)Γ₂| (|Γ₂| for L = ∞).
/// The verdict compares the angular residual sin(ϑ/2)Γ₁ + cos(ϑ/2)Γ₂
/// against `tol`·‖Γ‖ plus the extrapolation error.
pub fn robin_satisfied(data: &BoundaryData, robin: &Robin, tol: f64) -> Result<(bool, f64)> {
    if data.dim() != 1 {
        return Err(Error::InvalidParameter(format!("Robin condition needs a 1-dimensional boundary space, got {}", data.dim())));
    }
    let d = data.with_l0(robin.l0());
    let (g1, g2) = (d.gamma1[0], d.gamma2[0]);
    let residual = match robin.length().finite() {
        Some(l) => (g1 + g2 * (l / robin.l0())).norm(),
        None => g2.norm(),
    };
    let ang = channel_residual(robin.theta(), g1, g2).norm();
    Ok((ang <= tol * d.norm() + 2.0 * d.error, residual))
}

/// Check (U − 1)Γ₁ + i(U + 1)Γ₂ = 0 on a line.
///
/// Returns the verdict and the norm of the residual vector. The verdict is
/// taken channel by channel in the eigenbasis of U, so a diagonal U gives
/// exactly the two Robin verdicts.
pub fn u2_satisfied(data: &BoundaryData, u: &PointInteraction, tol: f64) -> Result<(bool, f64)> {
    if data.dim() != 2 {
        return Err(Error::InvalidParameter(format!("U(2) condition needs a 2-dimensional boundary space, got {}", data.dim())));
    }
    let d = data.with_l0(u.l0());
    let m = u.matrix();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let mut res = 0.0;
    for r in 0..2 {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..2 {
            let id = if r == c { one } else { C64::new(0.0, 0.0) };
            acc += (m[r][c] - id) * d.gamma1[c] + i * (m[r][c] + id) * d.gamma2[c];
        }
        res += acc.norm_sqr();
    }
    let mut ang = 0.0;
    for (theta, v) in u.eigen() {
        let g1 = v[0].conj() * d.gamma1[0] + v[1].conj() * d.gamma1[1];
        let g2 = v[0].conj() * d.gamma2[0] + v[1].conj() * d.gamma2[1];
        ang += channel_residual(theta, g1, g2).norm_sqr();
    }
    let ok = if u.is_diagonal() {
        // Per-side verdicts, identical to two Robin checks.
        let [(t0, _), (t1, _)] = u.eigen();
        let n0 = (d.gamma1[0].norm_sqr() + d.gamma2[0].norm_sqr()).sqrt();
        let n1 = (d.gamma1[1].norm_sqr() + d.gamma2[1].norm_sqr()).sqrt();
        channel_residual(t0, d.gamma1[0], d.gamma2[0]).norm() <= tol * n0 + 2.0 * d.error
            && channel_residual(t1, d.gamma1[1], d.gamma2[1]).norm() <= tol * n1 + 2.0 * d.error
    } else {
        ang.sqrt() <= tol * d.norm() + 2.0 * d.error
    };
    Ok((ok, res.sqrt()))
}

/// U(2) condition accepting the same solutions after the modes on each
/// side are re-chosen (`maps[0]` for x > 0, `maps[1]` for x < 0).
pub fn map_point_interaction(u: &PointInteraction, maps: [&ParameterMap; 2]) -> Result<PointInteraction> {
    // Columns of (X, Y) = (−i(U + 1), U − 1) span the accepted (Γ₁, Γ₂).
    let i = C64::new(0.0, 1.0);
    let m = u.matrix();
    let mut x: Mat2 = [[C64::new(0.0, 0.0); 2]; 2];
    let mut y = x;
    for r in 0..2 {
        for c in 0..2 {
            let id = if r == c { 1.0 } else { 0.0 };
            x[r][c] = -i * (m[r][c] + id);
            y[r][c] = m[r][c] - id;
        }
    }
    let mut x2 = x;
    let mut y2 = y;
    for side in 0..2 {
        let t = maps[side].gamma_map(u.l0());
        for c in 0..2 {
            x2[side][c] = t[0][0] * x[side][c] + t[0][1] * y[side][c];
            y2[side][c] = t[1][0] * x[side][c] + t[1][1] * y[side][c];
        }
    }
    PointInteraction::from_lagrangian(x2, y2, u.l0())
}

/// Endpoints carrying boundary data, in boundary-space order.
pub fn boundary_endpoints(problem: &Problem) -> Vec<Endpoint> {
    match problem.domain().kind() {
        DomainKind::HalfLine => vec![Endpoint::Lower],
        DomainKind::Line => vec![Endpoint::MarkedPlus, Endpoint::MarkedMinus],
        DomainKind::Interval => vec![Endpoint::Lower, Endpoint::Upper],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExtendedReal, PotentialSpec};
    use crate::numerics::Grid;
    use approx::assert_abs_diff_eq;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn data(g1: f64, g2: f64) -> BoundaryData {
        BoundaryData { gamma1: vec![c(g1)], gamma2: vec![c(g2)], error: 0.0, l0: 1.0 }
    }

    fn free_half() -> Problem {
        Problem::half_line(PotentialSpec::free(), Robin::dirichlet(1.0).unwrap()).unwrap()
    }

    #[test]
    fn free_half_line_values() {
        // ψ = a cosh x + b sinh x solves the free equation at E = −1.
        let (a, b) = (0.7, -1.3);
        let grid = Grid::log_toward_step(0.0, 1.0, 1e-6, 3.0, 0.01).unwrap();
        let psi: Vec<C64> = grid.nodes().iter().map(|x| c(a * x.cosh() + b * x.sinh())).collect();
        let d: Vec<C64> = grid.nodes().iter().map(|x| c(a * x.sinh() + b * x.cosh())).collect();
        let s = SolutionSamples::new(grid, psi, d).unwrap();
        let bd = boundary_data(&[s], &free_half()).unwrap();
        assert_abs_diff_eq!(bd.gamma1[0].re, a, epsilon = 1e-9);
        assert_abs_diff_eq!(bd.gamma2[0].re, b, epsilon = 1e-9);
    }

    #[test]
    fn mode_data() {
        let p = free_half();
        let m = crate::refmodes::reference_modes(&p, Endpoint::Lower, 0.0).unwrap();
        let [phi1, phi2] = m.samples();
        let d1 = boundary_data(&[phi1], &p).unwrap();
        assert!(d1.gamma1[0].norm() < 1e-12 && (d1.gamma2[0] + 1.0).norm() < 1e-12);
        let d2 = boundary_data(&[phi2], &p).unwrap();
        assert!((d2.gamma1[0] - 1.0).norm() < 1e-12 && d2.gamma2[0].norm() < 1e-12);
    }

    #[test]
    fn even_function_on_line() {
        let p = Problem::line(PotentialSpec::free(), PointInteraction::transparent(1.0).unwrap()).unwrap();
        let n = 4001;
        let grid = Grid::uniform(-4.0, 4.0, n).unwrap();
        let psi: Vec<C64> = grid.nodes().iter().map(|x| c((-x * x).exp())).collect();
        let d: Vec<C64> = grid.nodes().iter().map(|x| c(-2.0 * x * (-x * x).exp())).collect();
        let s = SolutionSamples::new(grid, psi, d).unwrap();
        let bd = boundary_data(&[s], &p).unwrap();
        assert!((bd.gamma1[0] - bd.gamma1[1]).norm() < 1e-6);
        assert!((bd.gamma2[0] - bd.gamma2[1]).norm() < 1e-6);
        assert!(u2_satisfied(&bd, &PointInteraction::transparent(1.0).unwrap(), 1e-6).unwrap().0);
    }

    #[test]
    fn robin_examples() {
        let dir = Robin::dirichlet(1.0).unwrap();
        assert!(robin_satisfied(&data(0.0, 0.8), &dir, 1e-10).unwrap().0);
        let l2 = Robin::length_value(2.0, 1.0).unwrap();
        let (ok, r) = robin_satisfied(&data(-2.0, 1.0), &l2, 1e-10).unwrap();
        assert!(ok && r < 1e-12);
        let neu = Robin::from_length(ExtendedReal::Infinite, 1.0).unwrap();
        let (ok, r) = robin_satisfied(&data(5.0, 0.0), &neu, 1e-10).unwrap();
        assert!(ok && r == 0.0);
        assert!(!robin_satisfied(&data(1.0, 1.0), &l2, 1e-6).unwrap().0);
        let two = BoundaryData { gamma1: vec![c(1.0); 2], gamma2: vec![c(1.0); 2], error: 0.0, l0: 1.0 };
        assert!(robin_satisfied(&two, &l2, 1e-6).is_err());
    }

    #[test]
    fn u2_examples() {
        let z = c(0.0);
        let one = c(1.0);
        let minus = PointInteraction::new([[-one, z], [z, -one]], 1.0).unwrap();
        let plus = PointInteraction::new([[one, z], [z, one]], 1.0).unwrap();
        let bd =
            |g1: [f64; 2], g2: [f64; 2]| BoundaryData { gamma1: vec![c(g1[0]), c(g1[1])], gamma2: vec![c(g2[0]), c(g2[1])], error: 0.0, l0: 1.0 };
        assert!(u2_satisfied(&bd([0.0, 0.0], [1.0, -2.0]), &minus, 1e-10).unwrap().0);
        assert!(!u2_satisfied(&bd([0.1, 0.0], [1.0, -2.0]), &minus, 1e-6).unwrap().0);
        assert!(u2_satisfied(&bd([3.0, 1.0], [0.0, 0.0]), &plus, 1e-10).unwrap().0);
        assert!(!u2_satisfied(&bd([3.0, 1.0], [0.0, 1.0]), &plus, 1e-6).unwrap().0);
        // Decoupled: two independent Robin checks.
        let rp = Robin::length_value(0.5, 1.0).unwrap();
        let rm = Robin::length_value(-3.0, 1.0).unwrap();
        let u = PointInteraction::separated(rp, rm).unwrap();
        for (g1, g2) in [([-0.5, 3.0], [1.0, 1.0]), ([-0.5, 1.0], [1.0, 1.0]), ([1.0, 3.0], [1.0, 1.0])] {
            let both = u2_satisfied(&bd(g1, g2), &u, 1e-8).unwrap().0;
            let a = robin_satisfied(&data(g1[0], g2[0]), &rp, 1e-8).unwrap().0;
            let b = robin_satisfied(&data(g1[1], g2[1]), &rm, 1e-8).unwrap().0;
            assert_eq!(both, a && b);
        }
    }

    #[test]
    fn delta_and_transparent_accept_continuous_data() {
        // ψ(0) = 1 both sides, ψ′(0±) = ±α/2: kink of a δ of strength α.
        let alpha = 1.7;
        let bd = BoundaryData { gamma1: vec![c(1.0), c(1.0)], gamma2: vec![c(0.5 * alpha), c(0.5 * alpha)], error: 0.0, l0: 1.0 };
        assert!(u2_satisfied(&bd, &PointInteraction::delta(alpha, 1.0).unwrap(), 1e-10).unwrap().0);
        assert!(!u2_satisfied(&bd, &PointInteraction::transparent(1.0).unwrap(), 1e-6).unwrap().0);
        let smooth = BoundaryData { gamma1: vec![c(1.0), c(1.0)], gamma2: vec![c(0.3), c(-0.3)], error: 0.0, l0: 1.0 };
        assert!(u2_satisfied(&smooth, &PointInteraction::transparent(1.0).unwrap(), 1e-10).unwrap().0);
    }

    #[test]
    fn mapped_point_interaction_accepts_same_data() {
        let p = Problem::line(PotentialSpec::free(), PointInteraction::transparent(1.0).unwrap()).unwrap();
        let modes = boundary_modes(&p).unwrap();
        let (_, ma) = transform_modes(&modes[0], [[1.0, 0.0], [0.4, 1.0]]).unwrap();
        let (_, mb) = transform_modes(&modes[1], [[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let u = PointInteraction::delta(0.9, 1.0).unwrap();
        let u2 = map_point_interaction(&u, [&ma, &mb]).unwrap();
        // Limit numbers transform as c′ = M^{−T}c, i.e. Γ′ = TΓ per side.
        let g = BoundaryData { gamma1: vec![c(1.0), c(1.0)], gamma2: vec![c(0.45), c(0.45)], error: 0.0, l0: 1.0 };
        let mut g2 = g.clone();
        for (side, map) in [(0, &ma), (1, &mb)] {
            let t = map.gamma_map(1.0);
            g2.gamma1[side] = t[0][0] * g.gamma1[side] + t[0][1] * g.gamma2[side];
            g2.gamma2[side] = t[1][0] * g.gamma1[side] + t[1][1] * g.gamma2[side];
        }
        assert!(u2_satisfied(&g, &u, 1e-10).unwrap().0);
        assert!(u2_satisfied(&g2, &u2, 1e-10).unwrap().0);
    }
}
