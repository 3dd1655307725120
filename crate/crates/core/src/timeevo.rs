//! Crank–Nicolson evolution on a lattice whose endpoint rows carry the
//! boundary condition, and packet-peak measurement of the reflection delay.
//!
//! The lattice operator is M⁻¹K with M the diagonal trapezoid mass and K the
//! Hermitian matrix of the discrete form Σ|Δψ|²/h + Σ h·V|ψ|² + boundary
//! term. Each step solves (M + i·dt/2·K)ψ′ = (M − i·dt/2·K)ψ, which conserves
//! the M-norm exactly.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, DomainKind, Problem};
use crate::spectrum::seed_for;

/// Eigen-angles this close to π are treated as Dirichlet channels.
const DIRICHLET_TOL: f64 = 1e-12;

/// Discrete operator. Unknown i sits at `x[i]`; its squared modulus counts
/// with `w_plus[i]` on the side x > 0 and `w_minus[i]` on the side x < 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub x: Vec<f64>,
    pub w_plus: Vec<f64>,
    pub w_minus: Vec<f64>,
    pub h: f64,
    diag: Vec<C64>,
    /// K[i][i+1]; K[i+1][i] is its conjugate.
    upper: Vec<C64>,
}

struct Builder {
    x: Vec<f64>,
    w_plus: Vec<f64>,
    w_minus: Vec<f64>,
    diag: Vec<C64>,
    upper: Vec<C64>,
}

impl Builder {
    fn push(&mut self, x: f64, wp: f64, wm: f64, v: f64) -> usize {
        self.x.push(x);
        self.w_plus.push(wp);
        self.w_minus.push(wm);
        self.diag.push(C64::new((wp + wm) * v, 0.0));
        self.upper.push(C64::new(0.0, 0.0));
        self.x.len() - 1
    }

    /// Adds |a·ψᵢ − b·ψᵢ₊₁|²/h.
    fn edge(&mut self, i: usize, a: C64, b: C64, h: f64) {
        self.diag[i] += a.norm_sqr() / h;
        self.diag[i + 1] += b.norm_sqr() / h;
        self.upper[i] -= a.conj() * b / h;
    }

    /// Adds |ψᵢ|²/h for an edge to a Dirichlet node.
    fn wall(&mut self, i: usize, a: C64, h: f64) {
        self.diag[i] += a.norm_sqr() / h;
    }

    fn finish(mut self, h: f64) -> Lattice {
        self.upper.pop();
        Lattice { x: self.x, w_plus: self.w_plus, w_minus: self.w_minus, h, diag: self.diag, upper: self.upper }
    }
}

impl Lattice {
    /// Lattice with spacing h on [0, x_max] (half line) or [−x_max, x_max]
    /// (line), Dirichlet at the far ends.
    pub fn new(problem: &Problem, h: f64, x_max: f64) -> Result<Self> {
        if !(h > 0.0 && x_max > 0.0 && x_max / h >= 16.0) {
            return Err(Error::InvalidParameter(format!("lattice needs 0 < 16h <= x_max, got h = {h}, x_max = {x_max}")));
        }
        let pot = problem.potential();
        if !pot.has_unit_weight() {
            return Err(Error::Unsupported("time evolution supports unit kinetic weight only".into()));
        }
        let n = (x_max / h).round() as usize;
        let one = C64::new(1.0, 0.0);
        let mut b = Builder { x: Vec::new(), w_plus: Vec::new(), w_minus: Vec::new(), diag: Vec::new(), upper: Vec::new() };
        match problem.domain().kind() {
            DomainKind::HalfLine => {
                let robin = match problem.bc() {
                    BoundaryCondition::HalfLineRobin(r) => Some(*r),
                    _ => None,
                };
                // Boundary node at 0, or at h with the head's log-derivative when V is singular.
                let singular = pot.singular_at_origin();
                let first = if singular { 1 } else { 0 };
                let (rho, dirichlet) = if singular {
                    let seed = seed_for(problem, robin.as_ref())?;
                    let (psi, dpsi) = seed.eval(h, 0.0);
                    if psi.abs() <= 1e-12 * dpsi.abs() * h {
                        (0.0, true)
                    } else {
                        (dpsi / psi, false)
                    }
                } else {
                    let r = robin.ok_or_else(|| Error::InvalidParameter("the endpoint needs a boundary condition".into()))?;
                    match r.length().finite() {
                        Some(0.0) => (0.0, true),
                        Some(l) => (-1.0 / l, false),
                        None => (0.0, false),
                    }
                };
                let start = if dirichlet { first + 1 } else { first };
                for j in start..n {
                    let x = j as f64 * h;
                    let w = if j == start && !dirichlet { 0.5 * h } else { h };
                    b.push(x, w, 0.0, pot.value(x));
                }
                if dirichlet {
                    b.wall(0, one, h);
                } else {
                    b.diag[0] += rho;
                }
                for i in 0..b.x.len() - 1 {
                    b.edge(i, one, one, h);
                }
                let last = b.x.len() - 1;
                b.wall(last, one, h);
            }
            DomainKind::Line => {
                let u = match problem.bc() {
                    BoundaryCondition::LineU2(u) => *u,
                    _ => return Err(Error::InvalidParameter("line problems need a U(2) condition".into())),
                };
                if pot.singular_at_origin() {
                    return Err(Error::Unsupported("time evolution on a line with a singular origin".into()));
                }
                let mut open = Vec::new();
                for (theta, v) in u.eigen() {
                    if (theta.abs() - std::f64::consts::PI).abs() > DIRICHLET_TOL {
                        open.push((-(0.5 * theta).tan() / u.l0(), v));
                    }
                }
                for j in (1..n).rev() {
                    let x = -(j as f64) * h;
                    b.push(x, 0.0, h, pot.value(x));
                }
                let left_end = b.x.len() - 1;
                b.wall(0, one, h);
                for i in 0..left_end {
                    b.edge(i, one, one, h);
                }
                let v0 = pot.value(0.0);
                // Boundary unknowns and the coefficients tying them to ψ(±0).
                let mut right_link = (left_end, one, false);
                match open.len() {
                    2 => {
                        let mut lam = [[C64::new(0.0, 0.0); 2]; 2];
                        for (l, v) in &open {
                            for r in 0..2 {
                                for c in 0..2 {
                                    lam[r][c] += *l * v[r] * v[c].conj();
                                }
                            }
                        }
                        let im = b.push(0.0, 0.0, 0.5 * h, v0);
                        let ip = b.push(0.0, 0.5 * h, 0.0, v0);
                        b.diag[im] += lam[1][1];
                        b.diag[ip] += lam[0][0];
                        b.upper[im] += lam[1][0];
                        b.edge(left_end, one, one, h);
                        right_link = (ip, one, true);
                    }
                    1 => {
                        let (l, w) = open[0];
                        let ia = b.push(0.0, 0.5 * h * w[0].norm_sqr(), 0.5 * h * w[1].norm_sqr(), v0);
                        b.diag[ia] += l;
                        b.edge(left_end, one, w[1], h);
                        right_link = (ia, w[0], true);
                    }
                    _ => b.wall(left_end, one, h),
                }
                let (link, coef, connected) = right_link;
                let mut prev = link;
                for j in 1..n {
                    let x = j as f64 * h;
                    let i = b.push(x, h, 0.0, pot.value(x));
                    if j == 1 {
                        if connected {
                            b.edge(prev, coef, one, h);
                        } else {
                            b.wall(i, one, h);
                        }
                    } else {
                        b.edge(prev, one, one, h);
                    }
                    prev = i;
                }
                b.wall(prev, one, h);
            }
            DomainKind::Interval => return Err(Error::Unsupported("time evolution on intervals".into())),
        }
        Ok(b.finish(h))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn mass(&self, i: usize) -> f64 {
        self.w_plus[i] + self.w_minus[i]
    }

    /// M-inner product ⟨a, b⟩.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        (0..self.len()).map(|i| self.mass(i) * a[i].conj() * b[i]).sum()
    }

    /// (norm on x > 0, norm on x < 0).
    pub fn side_norms(&self, psi: &[C64]) -> (f64, f64) {
        let mut p = 0.0;
        let mut m = 0.0;
        for (i, z) in psi.iter().enumerate() {
            p += self.w_plus[i] * z.norm_sqr();
            m += self.w_minus[i] * z.norm_sqr();
        }
        (p, m)
    }

    pub fn norm(&self, psi: &[C64]) -> f64 {
        let (p, m) = self.side_norms(psi);
        p + m
    }

    /// ⟨ψ, Kψ⟩ / ⟨ψ, Mψ⟩.
    pub fn energy(&self, psi: &[C64]) -> f64 {
        let n = self.len();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut k = self.diag[i] * psi[i];
            if i + 1 < n {
                k += self.upper[i] * psi[i + 1];
            }
            if i > 0 {
                k += self.upper[i - 1].conj() * psi[i - 1];
            }
            acc += psi[i].conj() * k;
        }
        acc.re / self.norm(psi)
    }

    /// One Crank–Nicolson step.
    fn step(&self, psi: &[C64], dt: f64, work: &mut Work) {
        let n = self.len();
        let half = C64::new(0.0, 0.5 * dt);
        for i in 0..n {
            let mut k = self.diag[i] * psi[i];
            if i + 1 < n {
                k += self.upper[i] * psi[i + 1];
            }
            if i > 0 {
                k += self.upper[i - 1].conj() * psi[i - 1];
            }
            work.rhs[i] = self.mass(i) * psi[i] - half * k;
        }
        // Thomas sweep on M + i·dt/2·K.
        let mut denom = self.mass(0) + half * self.diag[0];
        work.c[0] = if n > 1 { half * self.upper[0] / denom } else { C64::new(0.0, 0.0) };
        work.out[0] = work.rhs[0] / denom;
        for i in 1..n {
            let a = half * self.upper[i - 1].conj();
            denom = self.mass(i) + half * self.diag[i] - a * work.c[i - 1];
            if i + 1 < n {
                work.c[i] = half * self.upper[i] / denom;
            }
            work.out[i] = (work.rhs[i] - a * work.out[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            let next = work.out[i + 1];
            work.out[i] -= work.c[i] * next;
        }
    }
}

struct Work {
    rhs: Vec<C64>,
    c: Vec<C64>,
    out: Vec<C64>,
}

/// A state on a lattice; for Gaussians, x0, σ (standard deviation of |ψ|²)
/// and mean wavenumber k0.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub lattice: Lattice,
    pub psi: Vec<C64>,
}

impl WavePacket {
    /// Normalized Gaussian exp(−(x−x0)²/(4σ²) + i·k0·x) on a lattice with
    /// spacing h out to x_max.
    pub fn gaussian(problem: &Problem, x0: f64, sigma: f64, k0: f64, h: f64, x_max: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && x0.is_finite() && k0.is_finite()) {
            return Err(Error::InvalidParameter("packet needs finite x0, k0 and sigma > 0".into()));
        }
        if sigma < 10.0 * h || k0.abs() * h > 0.1 {
            return Err(Error::InvalidParameter(format!("lattice spacing must satisfy h <= sigma/10 and |k0|·h <= 0.1, got h = {h}")));
        }
        let lattice = Lattice::new(problem, h, x_max)?;
        let psi: Vec<C64> = lattice.x.iter().map(|&x| C64::from_polar((-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp(), k0 * x)).collect();
        Self::from_samples(x0, sigma, k0, lattice, psi)
    }

    /// Wraps and normalizes arbitrary lattice samples.
    pub fn from_samples(x0: f64, sigma: f64, k0: f64, lattice: Lattice, mut psi: Vec<C64>) -> Result<Self> {
        if psi.len() != lattice.len() {
            return Err(Error::GridMismatch);
        }
        let n = lattice.norm(&psi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("packet vanishes on the lattice".into()));
        }
        let f = n.sqrt().recip();
        psi.iter_mut().for_each(|z| *z *= f);
        Ok(Self { x0, sigma, k0, lattice, psi })
    }

    pub fn norm(&self) -> f64 {
        self.lattice.norm(&self.psi)
    }

    pub fn energy(&self) -> f64 {
        self.lattice.energy(&self.psi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frames: Vec<Vec<C64>>,
    /// Norm at each frame.
    pub norms: Vec<f64>,
    /// (x > 0, x < 0) norms at each frame.
    pub side_norms: Vec<(f64, f64)>,
    /// Largest norm change over a single step.
    pub max_step_drift: f64,
    pub final_state: WavePacket,
}

/// Evolves for total time t_total with step dt (negative runs backwards),
/// keeping `n_frames` evenly spaced snapshots plus the initial state.
pub fn evolve(packet: &WavePacket, dt: f64, t_total: f64, n_frames: usize) -> Result<Trajectory> {
    if !(dt.is_finite() && dt != 0.0 && t_total.is_finite() && t_total * dt >= 0.0) {
        return Err(Error::InvalidParameter("dt must be nonzero with the sign of the total time".into()));
    }
    let k0 = packet.k0.abs().max(1e-300);
    if dt.abs() * packet.k0 * packet.k0 > 0.1 {
        return Err(Error::ResolutionViolation { suggested_dt: 0.1 / (k0 * k0) });
    }
    let lat = &packet.lattice;
    let n = lat.len();
    let steps = (t_total / dt).round() as usize;
    let every = steps.checked_div(n_frames).map_or(usize::MAX, |q| q.max(1));
    let mut work = Work { rhs: vec![C64::new(0.0, 0.0); n], c: vec![C64::new(0.0, 0.0); n], out: vec![C64::new(0.0, 0.0); n] };
    let mut psi = packet.psi.clone();
    let mut norm = lat.norm(&psi);
    let mut traj = Trajectory {
        times: vec![0.0],
        frames: vec![psi.clone()],
        norms: vec![norm],
        side_norms: vec![lat.side_norms(&psi)],
        max_step_drift: 0.0,
        final_state: packet.clone(),
    };
    for s in 1..=steps {
        lat.step(&psi, dt, &mut work);
        std::mem::swap(&mut psi, &mut work.out);
        let next = lat.norm(&psi);
        traj.max_step_drift = traj.max_step_drift.max((next - norm).abs());
        norm = next;
        if s % every == 0 || s == steps {
            traj.times.push(s as f64 * dt);
            traj.frames.push(psi.clone());
            traj.norms.push(norm);
            traj.side_norms.push(lat.side_norms(&psi));
        }
    }
    traj.final_state = WavePacket { psi, ..packet.clone() };
    Ok(traj)
}

/// Peak position of |ψ|² on x > x_min, by quadratic interpolation around the
/// largest sample. Fails when another maximum separated by more than
/// `separation` reaches half the height.
fn peak(lat: &Lattice, psi: &[C64], x_min: f64, separation: f64, t: f64) -> Result<f64> {
    let dens: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let idx: Vec<usize> = (1..lat.len() - 1).filter(|&i| lat.x[i] > x_min && lat.x[i - 1] < lat.x[i] && lat.x[i] < lat.x[i + 1]).collect();
    let &top = idx.iter().max_by(|&&a, &&b| dens[a].total_cmp(&dens[b])).ok_or(Error::AmbiguousPeak { t })?;
    for &i in &idx {
        let local = dens[i] >= dens[i - 1] && dens[i] >= dens[i + 1];
        if local && (lat.x[i] - lat.x[top]).abs() > separation && dens[i] >= 0.5 * dens[top] {
            return Err(Error::AmbiguousPeak { t });
        }
    }
    let (a, b, c) = (dens[top - 1], dens[top], dens[top + 1]);
    let curv = a - 2.0 * b + c;
    let shift = if curv < 0.0 { 0.5 * (a - c) / curv } else { 0.0 };
    Ok(lat.x[top] + shift * lat.h)
}

fn fit_line(t: &[f64], x: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let (mt, mx) = (t.iter().sum::<f64>() / n, x.iter().sum::<f64>() / n);
    let sxy: f64 = t.iter().zip(x).map(|(a, b)| (a - mt) * (b - mx)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    let slope = sxy / sxx;
    (mx - slope * mt, slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayMeasurement {
    pub tau: f64,
    pub speed_in: f64,
    pub speed_out: f64,
}

/// Reflection delay of a packet moving toward the wall of a half line: the
/// difference between the wall-crossing times of straight lines fitted to
/// the outgoing and incoming peak tracks.
pub fn measure_time_delay(packet: &WavePacket, dt: f64) -> Result<DelayMeasurement> {
    let lat = &packet.lattice;
    if lat.w_minus.iter().any(|w| *w > 0.0) {
        return Err(Error::InvalidParameter("delay measurement needs a half-line lattice".into()));
    }
    if !(packet.k0 < 0.0) {
        return Err(Error::InvalidParameter("packet must move toward the wall (k0 < 0)".into()));
    }
    if packet.sigma * packet.k0.abs() < 5.0 {
        return Err(Error::InvalidParameter("broad packet needs sigma·|k0| >= 5".into()));
    }
    let v = 2.0 * packet.k0.abs();
    let t_wall = packet.x0 / v;
    let spread = |t: f64| packet.sigma * (1.0 + (t / (packet.sigma * packet.sigma)).powi(2)).sqrt();
    let margin = 4.0 * spread(2.0 * t_wall);
    let x_end = *lat.x.last().expect("non-empty lattice");
    if packet.x0 < 2.0 * margin || x_end < packet.x0 + 1.5 * margin {
        return Err(Error::InvalidParameter(format!("packet needs x0 >= {:.3} and lattice extent >= {:.3}", 2.0 * margin, packet.x0 + 1.5 * margin)));
    }
    let t_in_end = (packet.x0 - margin) / v;
    let t_out_start = t_wall + margin / v;
    let t_total = 2.0 * t_wall;
    let traj = evolve(packet, dt, t_total, 400)?;
    let mut track_in = (Vec::new(), Vec::new());
    let mut track_out = (Vec::new(), Vec::new());
    for (t, frame) in traj.times.iter().zip(&traj.frames) {
        let track = if *t <= t_in_end {
            &mut track_in
        } else if *t >= t_out_start {
            &mut track_out
        } else {
            continue;
        };
        let x = peak(lat, frame, 0.5 * margin, 2.0 * spread(*t), *t)?;
        track.0.push(*t);
        track.1.push(x);
    }
    if track_in.0.len() < 5 || track_out.0.len() < 5 {
        return Err(Error::InvalidParameter("too few frames on the peak tracks".into()));
    }
    let (a_in, b_in) = fit_line(&track_in.0, &track_in.1);
    let (a_out, b_out) = fit_line(&track_out.0, &track_out.1);
    Ok(DelayMeasurement { tau: -a_out / b_out + a_in / b_in, speed_in: -b_in, speed_out: b_out })
}
