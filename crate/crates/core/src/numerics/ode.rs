//! Integration of −(pψ′)′ + Vψ = Eψ on a grid.
//!
//! With p ≡ 1 the equation is solved by Numerov's method, on log grids in
//! the variable t = ln d (d the distance to the accumulation point) for
//! y = ψ/√d, which satisfies y″ = (1/4 + d²(V − E))y. Otherwise the first
//! order system (ψ, pψ′) is integrated with the adaptive Dormand–Prince
//! 5(4) pair.

use num_complex::Complex64 as C64;

use super::grid::{Grid, Spacing};
use crate::error::{Error, Result};
use crate::model::PotentialSpec;

/// ψ and the quasi-derivative pψ′ sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSamples {
    grid: Grid,
    psi: Vec<C64>,
    p_dpsi: Vec<C64>,
}

impl SolutionSamples {
    pub fn new(grid: Grid, psi: Vec<C64>, p_dpsi: Vec<C64>) -> Result<Self> {
        if psi.len() != grid.len() || p_dpsi.len() != grid.len() {
            return Err(Error::InvalidParameter("sample arrays must match the grid length".into()));
        }
        Ok(Self { grid, psi, p_dpsi })
    }

    pub(crate) fn from_real(grid: Grid, psi: &[f64], p_dpsi: &[f64]) -> Self {
        Self { grid, psi: psi.iter().map(|&v| C64::new(v, 0.0)).collect(), p_dpsi: p_dpsi.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[C64] {
        &self.psi
    }

    pub fn p_dpsi(&self) -> &[C64] {
        &self.p_dpsi
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self { grid: self.grid.clone(), psi: self.psi.iter().map(|v| v * a).collect(), p_dpsi: self.p_dpsi.iter().map(|v| v * a).collect() }
    }

    /// αself + βother on a shared grid.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        if self.grid.nodes() != other.grid.nodes() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            psi: self.psi.iter().zip(&other.psi).map(|(a, b)| alpha * a + beta * b).collect(),
            p_dpsi: self.p_dpsi.iter().zip(&other.p_dpsi).map(|(a, b)| alpha * a + beta * b).collect(),
        })
    }
}

/// Which end of the grid carries the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum From {
    First,
    Last,
}

/// Integrate from one end of `grid` with initial (ψ, pψ′).
pub fn integrate_stationary(potential: &PotentialSpec, energy: f64, from: From, init: (C64, C64), grid: &Grid) -> Result<SolutionSamples> {
    if init.0 == C64::new(0.0, 0.0) && init.1 == C64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("initial data must not vanish".into()));
    }
    let n = grid.len();
    let mut psi = vec![C64::new(0.0, 0.0); n];
    let mut dpsi = psi.clone();
    let parts = [(init.0.re, init.1.re, C64::new(1.0, 0.0)), (init.0.im, init.1.im, C64::new(0.0, 1.0))];
    for (a, b, unit) in parts {
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let sol = integrate_real(potential, energy, from, (a, b), grid)?;
        for i in 0..n {
            psi[i] += unit * sol.psi[i];
            dpsi[i] += unit * sol.p_dpsi[i];
        }
    }
    SolutionSamples::new(grid.clone(), psi, dpsi)
}

/// Real solution samples.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RealSolution {
    pub psi: Vec<f64>,
    pub p_dpsi: Vec<f64>,
}

pub(crate) const OVERFLOW: f64 = 1e250;

pub(crate) fn integrate_real(potential: &PotentialSpec, energy: f64, from: From, init: (f64, f64), grid: &Grid) -> Result<RealSolution> {
    if !energy.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let mut xs: Vec<f64> = grid.nodes().to_vec();
    if from == From::Last {
        xs.reverse();
    }
    let (mut psi, mut p_dpsi) = if potential.has_unit_weight() {
        numerov_march(potential, energy, &xs, grid.spacing(), init)?
    } else {
        rk_march(potential, energy, &xs, init)?
    };
    if from == From::Last {
        psi.reverse();
        p_dpsi.reverse();
    }
    Ok(RealSolution { psi, p_dpsi })
}

/// Transformed-variable description of a march for Numerov's method.
pub(crate) struct NumerovFrame {
    pub h: f64,
    /// ψ = w·y.
    pub w: Vec<f64>,
    pub f: Vec<f64>,
    /// dψ/dx = dfac·(y′ + shift·y) with y′ the t-derivative.
    pub dfac: Vec<f64>,
    pub shift: f64,
}

pub(crate) fn numerov_frame(potential: &PotentialSpec, energy: f64, xs: &[f64], spacing: Spacing) -> Result<NumerovFrame> {
    let n = xs.len();
    let mut f = Vec::with_capacity(n);
    for &x in xs {
        let v = potential.value(x);
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("potential is singular at grid node {x}")));
        }
        f.push(v - energy);
    }
    match spacing {
        Spacing::Uniform => {
            let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
            Ok(NumerovFrame { h, w: vec![1.0; n], f, dfac: vec![1.0; n], shift: 0.0 })
        }
        Spacing::LogTowardEndpoint { endpoint, .. } => {
            let side = if xs[0] > endpoint { 1.0 } else { -1.0 };
            let d: Vec<f64> = xs.iter().map(|x| side * (x - endpoint)).collect();
            if d.iter().any(|v| *v <= 0.0) {
                return Err(Error::InvalidParameter("log grid crosses its endpoint".into()));
            }
            let h = (d[n - 1] / d[0]).ln() / (n - 1) as f64;
            let w: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
            let f = f.iter().zip(&d).map(|(fv, dv)| 0.25 + dv * dv * fv).collect();
            let dfac = w.iter().map(|wv| side / wv).collect();
            Ok(NumerovFrame { h, w, f, dfac, shift: 0.5 })
        }
        Spacing::Composite => Err(Error::InvalidParameter("cannot integrate across a composite grid".into())),
    }
}

fn numerov_march(potential: &PotentialSpec, energy: f64, xs: &[f64], spacing: Spacing, init: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let fr = numerov_frame(potential, energy, xs, spacing)?;
    let h2 = fr.h * fr.h;
    let s1 = dp45(potential, energy, xs[0], [init.0, init.1], xs[1], 1e-13)?;
    let mut y = vec![0.0; n];
    y[0] = init.0 / fr.w[0];
    y[1] = s1[0] / fr.w[1];
    for i in 1..n - 1 {
        let next = (2.0 * (1.0 + 5.0 * h2 * fr.f[i] / 12.0) * y[i] - (1.0 - h2 * fr.f[i - 1] / 12.0) * y[i - 1]) / (1.0 - h2 * fr.f[i + 1] / 12.0);
        if !(next.abs() < OVERFLOW) {
            return Err(Error::Overflow { x: xs[i + 1] });
        }
        y[i + 1] = next;
    }
    let psi: Vec<f64> = y.iter().zip(&fr.w).map(|(a, b)| a * b).collect();
    let mut dpsi = vec![0.0; n];
    dpsi[0] = init.1;
    for i in 1..n - 1 {
        let yp = (y[i + 1] * (1.0 - h2 * fr.f[i + 1] / 6.0) - y[i - 1] * (1.0 - h2 * fr.f[i - 1] / 6.0)) / (2.0 * fr.h);
        dpsi[i] = fr.dfac[i] * (yp + fr.shift * y[i]);
    }
    let tail = dp45(potential, energy, xs[n - 2], [psi[n - 2], dpsi[n - 2]], xs[n - 1], 1e-13)?;
    dpsi[n - 1] = tail[1];
    Ok((psi, dpsi))
}

fn rk_march(potential: &PotentialSpec, energy: f64, xs: &[f64], init: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = xs.len();
    let mut psi = vec![0.0; n];
    let mut q = vec![0.0; n];
    psi[0] = init.0;
    q[0] = init.1;
    for i in 1..n {
        let s = dp45(potential, energy, xs[i - 1], [psi[i - 1], q[i - 1]], xs[i], 1e-12)?;
        psi[i] = s[0];
        q[i] = s[1];
    }
    Ok((psi, q))
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Adaptive Dormand–Prince integration of (ψ, pψ′) from x0 to x1.
pub(crate) fn dp45(potential: &PotentialSpec, energy: f64, x0: f64, y0: [f64; 2], x1: f64, rtol: f64) -> Result<[f64; 2]> {
    let rhs = |x: f64, y: [f64; 2]| -> [f64; 2] { [y[1] / potential.weight(x), (potential.value(x) - energy) * y[0]] };
    dp45_with(rhs, x0, y0, x1, rtol)
}

pub(crate) fn dp45_with<F: Fn(f64, [f64; 2]) -> [f64; 2]>(rhs: F, x0: f64, y0: [f64; 2], x1: f64, rtol: f64) -> Result<[f64; 2]> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let mut x = x0;
    let mut y = y0;
    let mut h = span;
    let mut peak = [y0[0].abs(), y0[1].abs()];
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(x, y);
    for _ in 0..2_000_000 {
        if (x1 - x) * span.signum() <= 0.0 {
            return Ok(y);
        }
        if (x + h - x1) * span.signum() > 0.0 {
            h = x1 - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s - 1][j];
                ys[0] += h * a * kj[0];
                ys[1] += h * a * kj[1];
            }
            k[s] = rhs(x + C[s] * h, ys);
        }
        let mut y5 = y;
        let mut err = [0.0; 2];
        for c in 0..2 {
            for s in 0..7 {
                let b5 = if s < 6 { A[5][s] } else { 0.0 };
                y5[c] += h * b5 * k[s][c];
                err[c] += h * (b5 - B4[s]) * k[s][c];
            }
        }
        let floor = 1e-3 * peak[0].max(peak[1]);
        let mut norm: f64 = 0.0;
        for c in 0..2 {
            let scale = y[c].abs().max(y5[c].abs()).max(1e-3 * peak[c]).max(1e-3 * floor).max(1e-300);
            norm = norm.max(err[c].abs() / (rtol * scale));
        }
        if !norm.is_finite() {
            if !(y5[0].is_finite() && y5[1].is_finite()) || y5[0].abs() > OVERFLOW {
                return Err(Error::Overflow { x: x + h });
            }
            h *= 0.2;
            continue;
        }
        if norm <= 1.0 {
            x += h;
            y = y5;
            if y[0].abs() > OVERFLOW || y[1].abs() > OVERFLOW {
                return Err(Error::Overflow { x });
            }
            peak = [peak[0].max(y[0].abs()), peak[1].max(y[1].abs())];
            // First-same-as-last: stage 7 is the derivative at the new point.
            k[0] = k[6];
            let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).min(5.0) };
            h *= grow;
        } else {
            h *= (0.9 * norm.powf(-0.2)).max(0.2);
        }
        if h.abs() < 1e-14 * x.abs().max(span.abs()) {
            return Err(Error::NonConvergent(format!("step size underflow at x = {x}")));
        }
    }
    Err(Error::NonConvergent("too many Runge-Kutta steps".into()))
}

/// Quasi-derivative Wronskian a·(pb′) − (pa′)·b at the node nearest `at`.
pub fn wronskian(a: &SolutionSamples, b: &SolutionSamples, at: f64) -> Result<C64> {
    if a.grid.nodes() != b.grid.nodes() {
        return Err(Error::GridMismatch);
    }
    let i = a.grid.nearest_index(at)?;
    Ok(a.psi[i] * b.p_dpsi[i] - a.p_dpsi[i] * b.psi[i])
}
