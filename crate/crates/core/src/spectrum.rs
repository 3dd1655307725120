//! Bound states: shooting for any half line or line problem, closed forms
//! for free problems and the digamma equation for the Coulomb half line.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, DomainKind, Endpoint, PointInteraction, PotentialFamily, PotentialSpec, Problem, Robin, SingularTail};
use crate::numerics::ode::{integrate_real, From};
use crate::numerics::{brent, f_tilde, simpson, Grid, SolutionSamples, Spacing};
use crate::refmodes::{frobenius_even, head_exact_range, head_for, ModeHead};

/// Smallest distance from the endpoint kept on shooting grids.
pub(crate) const S_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Shooting,
    ClosedForm,
    DigammaEq,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Shooting => "Shooting",
            Backend::ClosedForm => "ClosedForm",
            Backend::DigammaEq => "DigammaEq",
        }
    }
}

/// A normalized bound state. On a line, `nodes` is the position of the
/// state in the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub nodes: usize,
    pub psi: SolutionSamples,
    pub backend: Backend,
}

/// Initial data for the outward solution.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Seed {
    /// c1·φ⁽¹⁾ + c2·φ⁽²⁾ continued to energy E.
    Modes { head: ModeHead, c: (f64, f64) },
    /// The square-integrable solution s^ν(1 + …) of c/s² + shift.
    InverseSquareLp { nu: f64, shift: f64 },
    /// s^{l+1}(1 + …) for g/s + l(l+1)/s².
    CoulombLp { g: f64, l: u32 },
}

impl Seed {
    /// Distance from the endpoint below which `eval` is exact at energy e.
    pub(crate) fn exact_to(&self, problem: &Problem, e: f64) -> f64 {
        let exact = head_exact_range(problem, 0.0, e).max(0.0);
        match self {
            Seed::Modes { .. } => exact,
            _ if matches!(problem.potential().family(), PotentialFamily::Tabulated(_)) => exact,
            _ => (400.0 / e.abs().max(1e-300)).sqrt(),
        }
    }

    /// (ψ, ∂ₛψ·p) at inward distance s and energy e.
    pub(crate) fn eval(&self, s: f64, e: f64) -> (f64, f64) {
        match *self {
            Seed::Modes { head, c } => {
                let [(a, da), (b, db)] = head.eval(s, e);
                (c.0 * a + c.1 * b, c.0 * da + c.1 * db)
            }
            Seed::InverseSquareLp { nu, shift } => frobenius_even(nu, e - shift, s),
            Seed::CoulombLp { g, l } => {
                let lf = l as f64;
                let (mut a2, mut a1) = (0.0, 1.0);
                let (mut sum, mut dsum) = (1.0, lf + 1.0);
                let mut sp = 1.0;
                for n in 1..400 {
                    let nf = n as f64;
                    let an = (g * a1 - e * a2) / (nf * (nf + 2.0 * lf + 1.0));
                    sp *= s;
                    sum += an * sp;
                    dsum += an * (nf + lf + 1.0) * sp;
                    if n > 3 && (an * sp).abs() <= 1e-18 * sum.abs() && (a1 * sp / s).abs() <= 1e-18 * sum.abs() {
                        break;
                    }
                    a2 = a1;
                    a1 = an;
                }
                let p = s.powf(lf + 1.0);
                (p * sum, p * dsum / s)
            }
        }
    }
}

/// Half-line shooting problem for one boundary condition.
struct HalfLine<'a> {
    problem: &'a Problem,
    seed: Seed,
    v_inf: f64,
}

struct Geometry {
    grid: Grid,
    i_start: usize,
    i_match: usize,
}

struct Shot {
    psi: Vec<f64>,
    pd: Vec<f64>,
    mismatch: f64,
    nodes: usize,
    /// Factor applied to the inward solution so that it joins the outward one.
    join: f64,
    inward: (Vec<f64>, Vec<f64>),
}

fn potential_at_infinity(pot: &PotentialSpec) -> Result<f64> {
    let far = pot.value(1e12);
    let farther = pot.value(1e15);
    if !(far.is_finite() && (far - farther).abs() <= 1e-6 * (1.0 + far.abs())) {
        return Err(Error::Unsupported("bound states need a potential with a finite limit at infinity".into()));
    }
    Ok(match pot.family() {
        PotentialFamily::Tabulated(t) => *t.samples().1.last().expect("non-empty table"),
        PotentialFamily::PowerLaw { coefficient, exponent } if *exponent == 0.0 => *coefficient,
        _ => 0.0,
    })
}

/// Square-integrable seed at a limit-point origin.
pub(crate) fn recessive_seed(pot: &PotentialSpec) -> Option<Seed> {
    let lp_power = |c: f64, shift: f64| Seed::InverseSquareLp { nu: 0.5 * (1.0 + (1.0 + 4.0 * c).sqrt()), shift };
    match pot.family() {
        PotentialFamily::CoulombPlusCentrifugal { g, l } if *l >= 1 => Some(Seed::CoulombLp { g: *g, l: *l }),
        PotentialFamily::InverseSquare { c } if *c >= 0.75 => Some(lp_power(*c, 0.0)),
        PotentialFamily::PowerLaw { coefficient, exponent } if *exponent == -2.0 && *coefficient >= 0.75 => Some(lp_power(*coefficient, 0.0)),
        PotentialFamily::Tabulated(t) => match t.tail() {
            Some(SingularTail::Power { exponents: [a, b] }) if -a * b >= 0.75 => {
                let c = -a * b;
                let (x, v) = t.samples();
                Some(lp_power(c, v[0] - c / (x[0] * x[0])))
            }
            _ => None,
        },
        _ => None,
    }
}

pub(crate) fn seed_for(problem: &Problem, robin: Option<&Robin>) -> Result<Seed> {
    if !problem.potential().has_unit_weight() {
        return Err(Error::Unsupported("only unit kinetic weight is supported here".into()));
    }
    if let Some(seed) = recessive_seed(problem.potential()) {
        return Ok(seed);
    }
    let head = head_for(problem, Endpoint::Lower)?;
    let robin = robin.ok_or_else(|| Error::InvalidParameter("the endpoint needs a boundary condition".into()))?;
    Ok(Seed::Modes { head, c: robin.limit_ray() })
}

impl<'a> HalfLine<'a> {
    fn new(problem: &'a Problem, robin: Option<&Robin>) -> Result<Self> {
        let seed = seed_for(problem, robin)?;
        let v_inf = potential_at_infinity(problem.potential())?;
        Ok(Self { problem, seed, v_inf })
    }

    fn pot(&self) -> &PotentialSpec {
        self.problem.potential()
    }

    /// Grid covering the deeper energy `e_deep` and the shallower `e_shallow`.
    fn geometry(&self, e_deep: f64, e_shallow: f64) -> Result<Geometry> {
        let kappa = (self.v_inf - e_shallow).sqrt();
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter("energy must lie below the continuum threshold".into()));
        }
        let exact = self.seed.exact_to(self.problem, e_deep);
        let s_start = exact.min(0.5 * (1.0f64).min(1.0 / kappa)).max(S_MIN);
        let pot = self.pot();
        let mut x_turn = s_start;
        let mut scan = Vec::new();
        for k in 0..=650 {
            let x = S_MIN * 10f64.powf(k as f64 / 50.0);
            let v = pot.value(x);
            if v <= e_shallow {
                x_turn = x_turn.max(x);
            }
            scan.push((x, v));
        }
        let x_max = x_turn.max(s_start) + 30.0 / kappa;
        let mut fmax: f64 = 0.25 + x_max * x_max * (pot.value(x_max) - e_deep).abs();
        for &(x, v) in scan.iter().filter(|p| p.0 <= x_max) {
            fmax = fmax.max((0.25 + x * x * (v - e_deep)).abs());
        }
        let h = 0.004f64.min(0.05 / fmax.sqrt());
        let grid = Grid::log_toward_step(0.0, 1.0, S_MIN, x_max, h)?;
        let nodes = grid.nodes();
        let n = nodes.len();
        let i_start = nodes.partition_point(|&x| x <= s_start).saturating_sub(1);
        let x_m = x_turn.max(2.0 * s_start).min(0.5 * x_max);
        let i_match = grid.nearest_index(x_m)?.clamp(i_start + 8, n - 8);
        Ok(Geometry { grid, i_start, i_match })
    }

    fn shoot(&self, e: f64, geo: &Geometry) -> Result<Shot> {
        let nodes = geo.grid.nodes();
        let n = nodes.len();
        let mut psi = vec![0.0; n];
        let mut pd = vec![0.0; n];
        for i in 0..=geo.i_start {
            let (a, b) = self.seed.eval(nodes[i], e);
            psi[i] = a;
            pd[i] = b;
        }
        let out = integrate_real(self.pot(), e, From::First, (psi[geo.i_start], pd[geo.i_start]), &geo.grid.slice(geo.i_start, n))?;
        psi[geo.i_start..].copy_from_slice(&out.psi);
        pd[geo.i_start..].copy_from_slice(&out.p_dpsi);
        let kappa = (self.v_inf - e).sqrt();
        let inn = integrate_real(self.pot(), e, From::Last, (1e-200, -kappa * 1e-200), &geo.grid.slice(geo.i_match, n))?;
        let m = geo.i_match;
        let (po, qo) = (psi[m], pd[m]);
        let (pi, qi) = (inn.psi[0], inn.p_dpsi[0]);
        let norm_o = po.hypot(qo / kappa.max(1.0 / nodes[m]));
        let norm_i = pi.hypot(qi / kappa.max(1.0 / nodes[m]));
        let mismatch = (po * qi - qo * pi) / (norm_o * norm_i * kappa.max(1.0 / nodes[m]));
        let mut count = 0;
        let mut last = 0.0;
        for &v in &psi {
            if v != 0.0 {
                if last != 0.0 && v.signum() != last {
                    count += 1;
                }
                last = v.signum();
            }
        }
        let ni = pi.hypot(qi);
        let join = (po * (pi / ni) + qo * (qi / ni)) / ni;
        Ok(Shot { psi, pd, mismatch, nodes: count, join, inward: (inn.psi, inn.p_dpsi) })
    }

    fn probe(&self, e: f64) -> Result<(f64, usize)> {
        let geo = self.geometry(e, e)?;
        let s = self.shoot(e, &geo)?;
        Ok((s.mismatch, s.nodes))
    }

    /// Normalized eigenfunction at an (approximate) eigenvalue.
    fn eigenfunction(&self, e: f64) -> Result<(Grid, Vec<f64>, Vec<f64>, usize)> {
        let geo = self.geometry(e, e)?;
        let shot = self.shoot(e, &geo)?;
        let m = geo.i_match;
        let mut psi = shot.psi;
        let mut pd = shot.pd;
        for (k, i) in (m..psi.len()).enumerate() {
            psi[i] = shot.join * shot.inward.0[k];
            pd[i] = shot.join * shot.inward.1[k];
        }
        let nodes_x = geo.grid.nodes();
        let mut count = 0;
        let mut last = 0.0;
        for &v in &psi {
            if v != 0.0 {
                if last != 0.0 && v.signum() != last {
                    count += 1;
                }
                last = v.signum();
            }
        }
        let dens: Vec<f64> = psi.iter().map(|v| v * v).collect();
        let mut total = simpson(nodes_x, &dens);
        // Below the first node |ψ|² ≈ A·s^q.
        let q = (dens[1] / dens[0]).ln() / (nodes_x[1] / nodes_x[0]).ln();
        if q > -1.0 && q.is_finite() {
            total += dens[0] * nodes_x[0] / (q + 1.0);
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NonConvergent(format!("eigenfunction normalization failed (norm {total}, join {}, q {q})", shot.join)));
        }
        let f = total.sqrt().recip() * if psi[psi.len() / 2] < 0.0 && psi.iter().all(|v| *v <= 0.0) { -1.0 } else { 1.0 };
        psi.iter_mut().for_each(|v| *v *= f);
        pd.iter_mut().for_each(|v| *v *= f);
        Ok((geo.grid, psi, pd, count))
    }

    fn refine(&self, lo: f64, hi: f64) -> Result<f64> {
        let geo = self.geometry(lo, hi)?;
        let f = |e: f64| self.shoot(e, &geo).map(|s| s.mismatch).unwrap_or(f64::NAN);
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (f(a), f(b));
        if !(fa.signum() != fb.signum()) {
            // The shared grid moved the crossing; rescan the bracket on it.
            let k = 32;
            let mut prev = (a, fa);
            let mut found = false;
            for j in 1..=k {
                let e = lo + (hi - lo) * j as f64 / k as f64;
                let fe = f(e);
                if fe.signum() != prev.1.signum() {
                    a = prev.0;
                    b = e;
                    found = true;
                    break;
                }
                prev = (e, fe);
            }
            if !found {
                return Err(Error::RootNotFound(format!("matching function keeps its sign on [{lo}, {hi}]")));
            }
        }
        brent(f, a, b, 1e-15 * lo.abs().max(hi.abs()), 1e-15)
    }

    /// Eigenvalues in (lo, hi), deepest first.
    fn eigenvalues(&self, lo: f64, hi: f64, max_states: usize) -> Result<Vec<f64>> {
        let xi = |e: f64| 1.0 / (self.v_inf - e).sqrt();
        let e_of = |x: f64| self.v_inf - 1.0 / (x * x);
        let (x_lo, x_hi) = (xi(lo), xi(hi));
        let n_probe = ((8.0 * (x_hi - x_lo)).ceil() as usize).clamp(64, 4000);
        let probes: Vec<f64> = (0..=n_probe).map(|j| e_of(x_lo + (x_hi - x_lo) * j as f64 / n_probe as f64)).collect();
        let vals: Vec<Result<(f64, usize)>> = probes.par_iter().map(|&e| self.probe(e)).collect();
        let mut pts: Vec<Probe> = Vec::with_capacity(probes.len());
        for (e, v) in probes.iter().zip(vals) {
            let (w, n) = v?;
            pts.push((*e, w, n));
        }
        let mut brackets = Vec::new();
        let mut stack: Vec<(Probe, Probe, u32)> = pts.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
        while let Some((a, b, depth)) = stack.pop() {
            let sign_change = a.1.signum() != b.1.signum();
            let extra = b.2.saturating_sub(a.2);
            if (extra >= 2 || (extra == 1 && !sign_change)) && depth < 40 {
                let xm = 0.5 * (xi(a.0) + xi(b.0));
                let em = e_of(xm);
                let (w, n) = self.probe(em)?;
                let mid = (em, w, n);
                stack.push((mid, b, depth + 1));
                stack.push((a, mid, depth + 1));
                continue;
            }
            if sign_change {
                brackets.push((a.0, b.0));
            }
        }
        brackets.truncate(max_states);
        brackets.into_par_iter().map(|(a, b)| self.refine(a, b)).collect()
    }
}

fn robin_of(problem: &Problem) -> Option<Robin> {
    match problem.bc() {
        BoundaryCondition::HalfLineRobin(r) => Some(*r),
        _ => None,
    }
}

fn check_range(e_range: (f64, f64)) -> Result<()> {
    let (lo, hi) = e_range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("invalid energy range [{lo}, {hi}]")));
    }
    Ok(())
}

/// Energy, grid, ψ and pψ′ of a state.
type Sampled = (f64, Grid, Vec<f64>, Vec<f64>);
/// A state with its node count.
type SampledState = (f64, Grid, Vec<f64>, Vec<f64>, usize);
/// Scan probe: energy coordinate, mismatch, node count.
type Probe = (f64, f64, usize);

fn halfline_states(problem: &Problem, robin: Option<&Robin>, e_range: (f64, f64), max_states: usize) -> Result<Vec<SampledState>> {
    let hl = HalfLine::new(problem, robin)?;
    if e_range.1 >= hl.v_inf {
        return Err(Error::InvalidParameter("no decaying far solution at or above the continuum threshold".into()));
    }
    let es = hl.eigenvalues(e_range.0, e_range.1, max_states)?;
    es.into_par_iter()
        .map(|e| {
            let (g, p, d, n) = hl.eigenfunction(e)?;
            Ok((e, g, p, d, n))
        })
        .collect()
}

fn real_samples(grid: Grid, psi: &[f64], pd: &[f64]) -> SolutionSamples {
    SolutionSamples::new(grid, psi.iter().map(|v| C64::new(*v, 0.0)).collect(), pd.iter().map(|v| C64::new(*v, 0.0)).collect())
        .expect("matching lengths")
}

/// Two-sided samples v₊·χ(x) for x > 0 and v₋·χ(−x) for x < 0.
fn line_samples(grid: &Grid, chi: &[f64], pchi: &[f64], v: [C64; 2]) -> SolutionSamples {
    let s = grid.nodes();
    let n = s.len();
    let mut x = Vec::with_capacity(2 * n);
    let mut psi = Vec::with_capacity(2 * n);
    let mut pd = Vec::with_capacity(2 * n);
    for i in (0..n).rev() {
        x.push(-s[i]);
        psi.push(v[1] * chi[i]);
        pd.push(-v[1] * pchi[i]);
    }
    for i in 0..n {
        x.push(s[i]);
        psi.push(v[0] * chi[i]);
        pd.push(v[0] * pchi[i]);
    }
    SolutionSamples::new(Grid::from_nodes(x, Spacing::Composite), psi, pd).expect("matching lengths")
}

/// Bound states by shooting, for half lines and (through the eigen-channels
/// of U) lines with a symmetric potential.
pub fn bound_states_shooting(problem: &Problem, e_range: (f64, f64), max_states: usize) -> Result<Vec<BoundState>> {
    check_range(e_range)?;
    match problem.domain().kind() {
        DomainKind::HalfLine => {
            let robin = robin_of(problem);
            let states = halfline_states(problem, robin.as_ref(), e_range, max_states)?;
            let mut out: Vec<BoundState> = states
                .into_iter()
                .map(|(e, g, p, d, n)| BoundState { energy: e, nodes: n, psi: real_samples(g, &p, &d), backend: Backend::Shooting })
                .collect();
            out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            Ok(out)
        }
        DomainKind::Line => {
            let u = match problem.bc() {
                BoundaryCondition::LineU2(u) => *u,
                _ => return Err(Error::InvalidParameter("line problems need a U(2) condition".into())),
            };
            let half = Problem::half_line(problem.potential().clone(), Robin::dirichlet(u.l0())?)?;
            let mut out = Vec::new();
            for (theta, v) in u.eigen() {
                let r = Robin::from_theta(theta, u.l0())?;
                for (e, g, p, d, _) in halfline_states(&half, Some(&r), e_range, max_states)? {
                    out.push(BoundState { energy: e, nodes: 0, psi: line_samples(&g, &p, &d, v), backend: Backend::Shooting });
                }
            }
            Ok(finish_line(out, max_states))
        }
        DomainKind::Interval => Err(Error::Unsupported("bound states on intervals".into())),
    }
}

fn finish_line(mut out: Vec<BoundState>, max_states: usize) -> Vec<BoundState> {
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out.truncate(max_states);
    for (i, s) in out.iter_mut().enumerate() {
        s.nodes = i;
    }
    out
}

/// Free half-line state ψ = √(2/L)·e^{−x/L}, E = −1/L², for L > 0.
fn free_halfline(robin: &Robin, e_range: (f64, f64)) -> Result<Vec<Sampled>> {
    let l = match robin.length().finite() {
        Some(l) if l > 0.0 => l,
        _ => return Ok(Vec::new()),
    };
    let e = -1.0 / (l * l);
    if !(e > e_range.0 && e < e_range.1) {
        return Ok(Vec::new());
    }
    let grid = Grid::log_toward_step(0.0, 1.0, S_MIN, 40.0 * l, 0.004)?;
    let a = (2.0 / l).sqrt();
    let psi: Vec<f64> = grid.nodes().iter().map(|x| a * (-x / l).exp()).collect();
    let pd: Vec<f64> = psi.iter().map(|v| -v / l).collect();
    Ok(vec![(e, grid, psi, pd)])
}

/// Levels of the Coulomb half line −ψ″ + (g/r)ψ with g < 0 and the Robin
/// condition of the given length: roots of g·F̃(ξ) = −1/L, ξ = g/(2√−E).
/// One level lies in each interval (−n, −n+1); L = 0 gives ξ = −n exactly.
pub fn coulomb_levels(g: f64, robin: &Robin, n_levels: usize) -> Result<Vec<f64>> {
    if !(g < 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!("coulomb_levels needs g < 0, got {g}")));
    }
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be at least 1".into()));
    }
    let energy = |xi: f64| -g * g / (4.0 * xi * xi);
    if robin.is_dirichlet() {
        return Ok((1..=n_levels).map(|n| energy(-(n as f64))).collect());
    }
    let (s, c) = robin.half_angle();
    // F̃(ξ) = −1/(gL) = −tan(ϑ/2)/(g·L0).
    let target = -s / (c * g * robin.l0());
    let h = |xi: f64| f_tilde(xi).map(|v| v - target).unwrap_or(f64::NAN);
    let mut out = Vec::with_capacity(n_levels);
    for n in 1..=n_levels {
        let (left, right) = (-(n as f64), -(n as f64) + 1.0);
        let mut eps = 1e-3;
        let (a, b) = loop {
            let (a, b) = (left + eps, right - eps);
            let (fa, fb) = (h(a), h(b));
            if fa < 0.0 && fb > 0.0 {
                break (a, b);
            }
            eps *= 1e-2;
            if eps < 1e-15 {
                return Err(Error::RootNotFound(format!("no Coulomb level bracket in ({left}, {right})")));
            }
        };
        let xi = brent(h, a, b, 1e-15, 1e-15)?;
        out.push(energy(xi));
    }
    Ok(out)
}

/// Number of negative-energy states of the free line with condition U: the
/// number of eigen-channels with L_j > 0.
pub fn point_interaction_bound_count(u: &PointInteraction) -> usize {
    u.eigen().iter().filter(|(theta, _)| *theta > 0.0 && *theta < std::f64::consts::PI).count()
}

fn coulomb_coupling(problem: &Problem) -> Option<f64> {
    if !problem.potential().has_unit_weight() {
        return None;
    }
    match problem.potential().family() {
        PotentialFamily::Coulomb { g } | PotentialFamily::CoulombPlusCentrifugal { g, l: 0 } if *g < 0.0 => Some(*g),
        _ => None,
    }
}

/// Bound states with the fastest exact backend available: closed forms for
/// free problems, the digamma equation for the Coulomb half line, shooting
/// otherwise.
pub fn bound_states(problem: &Problem, e_range: (f64, f64), max_states: usize) -> Result<Vec<BoundState>> {
    check_range(e_range)?;
    let free = matches!(problem.potential().family(), PotentialFamily::Free) && problem.potential().has_unit_weight();
    match (problem.domain().kind(), problem.bc()) {
        (DomainKind::HalfLine, BoundaryCondition::HalfLineRobin(r)) if free => {
            let mut v: Vec<BoundState> = free_halfline(r, e_range)?
                .into_iter()
                .map(|(e, g, p, d)| BoundState { energy: e, nodes: 0, psi: real_samples(g, &p, &d), backend: Backend::ClosedForm })
                .collect();
            v.truncate(max_states);
            Ok(v)
        }
        (DomainKind::Line, BoundaryCondition::LineU2(u)) if free => {
            let mut out = Vec::new();
            for (theta, v) in u.eigen() {
                let r = Robin::from_theta(theta, u.l0())?;
                for (e, g, p, d) in free_halfline(&r, e_range)? {
                    out.push(BoundState { energy: e, nodes: 0, psi: line_samples(&g, &p, &d, v), backend: Backend::ClosedForm });
                }
            }
            Ok(finish_line(out, max_states))
        }
        (DomainKind::HalfLine, BoundaryCondition::HalfLineRobin(r)) if coulomb_coupling(problem).is_some() => {
            let g = coulomb_coupling(problem).expect("checked");
            let hl = HalfLine::new(problem, Some(r))?;
            // Enough levels to pass the upper end of the range.
            let mut n = max_states.max(1);
            let levels = loop {
                let lv = coulomb_levels(g, r, n)?;
                if lv.last().is_none_or(|e| *e >= e_range.1) || n >= max_states.saturating_add(2) {
                    break lv;
                }
                n += 1;
            };
            let wanted: Vec<f64> = levels.into_iter().filter(|e| *e > e_range.0 && *e < e_range.1).take(max_states).collect();
            wanted
                .into_par_iter()
                .map(|e| {
                    let (grid, p, d, nodes) = hl.eigenfunction(e)?;
                    Ok(BoundState { energy: e, nodes, psi: real_samples(grid, &p, &d), backend: Backend::DigammaEq })
                })
                .collect()
        }
        _ => bound_states_shooting(problem, e_range, max_states),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{boundary_data, robin_satisfied, u2_satisfied};
    use crate::model::ExtendedReal;

    fn coulomb(robin: Robin) -> Problem {
        Problem::half_line(PotentialSpec::coulomb(-2.0).unwrap(), robin).unwrap()
    }

    fn norm(s: &SolutionSamples) -> f64 {
        let d: Vec<f64> = s.psi().iter().map(|z| z.norm_sqr()).collect();
        simpson(s.grid().nodes(), &d) + d[0] * s.grid().nodes()[0]
    }

    #[test]
    fn free_half_line_shooting() {
        for l in [0.5, 1.0, 3.0] {
            let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(l, 1.0).unwrap()).unwrap();
            let st = bound_states_shooting(&p, (-50.0, -1e-3), 10).unwrap();
            assert_eq!(st.len(), 1, "L = {l}");
            let want = -1.0 / (l * l);
            assert!(((st[0].energy - want) / want).abs() < 1e-8, "L = {l}: {}", st[0].energy);
            assert_eq!(st[0].nodes, 0);
            assert!((norm(&st[0].psi) - 1.0).abs() < 1e-6);
        }
        for r in [Robin::length_value(-1.0, 1.0).unwrap(), Robin::dirichlet(1.0).unwrap(), Robin::neumann(1.0).unwrap()] {
            let p = Problem::half_line(PotentialSpec::free(), r).unwrap();
            assert!(bound_states_shooting(&p, (-50.0, -1e-3), 10).unwrap().is_empty());
        }
    }

    #[test]
    fn free_closed_form() {
        let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(1.0, 1.0).unwrap()).unwrap();
        let st = bound_states(&p, (-10.0, -1e-6), 5).unwrap();
        assert_eq!(st.len(), 1);
        assert!((st[0].energy + 1.0).abs() < 1e-14);
        assert_eq!(st[0].backend, Backend::ClosedForm);
    }

    #[test]
    fn coulomb_dirichlet_levels() {
        let lv = coulomb_levels(-2.0, &Robin::dirichlet(1.0).unwrap(), 5).unwrap();
        for (n, e) in lv.iter().enumerate() {
            let want = -1.0 / ((n + 1) as f64).powi(2);
            assert!(((e - want) / want).abs() < 1e-12);
        }
    }

    #[test]
    fn coulomb_neumann_shifts() {
        let lv = coulomb_levels(-2.0, &Robin::neumann(1.0).unwrap(), 3).unwrap();
        let c: Vec<f64> = lv.iter().enumerate().map(|(i, e)| (i + 1) as f64 - 1.0 / (-e).sqrt()).collect();
        for (got, want) in c.iter().zip([0.5130, 0.4879, 0.4857]) {
            assert!((got - want).abs() < 5e-4, "{c:?}");
        }
    }

    #[test]
    fn coulomb_shooting_matches_digamma() {
        for r in [
            Robin::dirichlet(1.0).unwrap(),
            Robin::length_value(1.0, 1.0).unwrap(),
            Robin::from_length(ExtendedReal::Infinite, 1.0).unwrap(),
            Robin::length_value(-1.0, 1.0).unwrap(),
        ] {
            let p = coulomb(r);
            let st = bound_states_shooting(&p, (-30.0, -0.02), 5).unwrap();
            let lv = coulomb_levels(-2.0, &r, 8).unwrap();
            let lv: Vec<f64> = lv.into_iter().filter(|e| *e > -30.0 && *e < -0.02).take(5).collect();
            assert_eq!(st.len(), lv.len(), "{r:?}");
            for (s, e) in st.iter().zip(&lv) {
                assert!(((s.energy - e) / e).abs() < 1e-5, "{r:?}: {} vs {e}", s.energy);
            }
            for w in st.windows(2) {
                assert_eq!(w[1].nodes, w[0].nodes + 1, "{r:?}");
            }
            for s in &st {
                let bd = boundary_data(std::slice::from_ref(&s.psi), &p).map_err(|e| format!("{r:?} E {}: {e}", s.energy)).unwrap();
                let (ok, res) = robin_satisfied(&bd, &r, 1e-6).unwrap();
                assert!(ok && res <= 1e-6 * (1.0 + bd.gamma1[0].norm()), "{r:?} E {} res {res}", s.energy);
            }
        }
    }

    #[test]
    fn point_interaction_counts() {
        let z = ExtendedReal::Finite;
        let mk = |a: f64, b: f64| PointInteraction::from_lengths(z(a), z(b), 0.0, 0.0, 1.0).unwrap();
        assert_eq!(point_interaction_bound_count(&mk(1.0, 2.0)), 2);
        assert_eq!(point_interaction_bound_count(&mk(1.0, -2.0)), 1);
        assert_eq!(point_interaction_bound_count(&mk(-1.0, -2.0)), 0);
        let mixed = PointInteraction::from_lengths(z(0.5), z(-1.0), 0.3, 0.2, 1.0).unwrap();
        assert_eq!(point_interaction_bound_count(&mixed), 1);
    }

    #[test]
    fn free_line_states_satisfy_u() {
        let z = ExtendedReal::Finite;
        let u = PointInteraction::from_lengths(z(0.5), z(2.0), 0.4, 0.3, 1.0).unwrap();
        let p = Problem::line(PotentialSpec::free(), u).unwrap();
        let closed = bound_states(&p, (-10.0, -1e-4), 5).unwrap();
        let shot = bound_states_shooting(&p, (-10.0, -1e-4), 5).unwrap();
        assert_eq!(closed.len(), 2);
        assert_eq!(shot.len(), 2);
        for (a, b) in closed.iter().zip(&shot) {
            assert!(((a.energy - b.energy) / a.energy).abs() < 1e-8);
            for s in [a, b] {
                let bd = boundary_data(std::slice::from_ref(&s.psi), &p).unwrap();
                assert!(u2_satisfied(&bd, &u, 1e-6).unwrap().0);
            }
        }
        assert!((closed[0].energy + 4.0).abs() < 1e-12 && (closed[1].energy + 0.25).abs() < 1e-12);
    }

    #[test]
    fn inverse_square_limit_point_ground_state() {
        // −ψ″ + (c/x²)ψ with c = 21/16 has no negative levels.
        let p = Problem::new(crate::model::Domain1D::half_line(), PotentialSpec::inverse_square(21.0 / 16.0).unwrap(), BoundaryCondition::Intrinsic)
            .unwrap();
        assert!(bound_states_shooting(&p, (-10.0, -0.01), 3).unwrap().is_empty());
    }

    #[test]
    fn coulomb_p_wave_levels() {
        // l = 1 hydrogen-like levels −g²/(4n²), n ≥ 2.
        let p = Problem::new(crate::model::Domain1D::half_line(), PotentialSpec::coulomb_centrifugal(-2.0, 1).unwrap(), BoundaryCondition::Intrinsic)
            .unwrap();
        let st = bound_states_shooting(&p, (-2.0, -0.03), 3).unwrap();
        assert_eq!(st.len(), 3);
        for (i, s) in st.iter().enumerate() {
            let n = (i + 2) as f64;
            assert!(((s.energy + 1.0 / (n * n)) * n * n).abs() < 1e-7, "{}", s.energy);
            assert_eq!(s.nodes, i);
        }
    }
}
