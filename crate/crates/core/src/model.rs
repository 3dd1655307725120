//! Problem description: units, domains, potentials and boundary conditions.
//!
//! All computations run in the internal convention ħ²/(2m) = 1, where an
//! energy E is stored as E/ε with ε = ħ²/(2m), lengths are unchanged and
//! potential couplings are divided by ε. In a problem expressed in physical
//! units every potential coupling is the coefficient appearing in V itself
//! (for example V = g/r with g in energy·length).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Physical constants used to convert between physical and internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    hbar: f64,
    mass: f64,
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// ħ = 1, m = 1/2, so that ħ²/(2m) = 1.
    pub fn internal() -> Self {
        Self { hbar: 1.0, mass: 0.5 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// ε = ħ²/(2m).
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    pub fn is_internal(&self) -> bool {
        self.energy_scale() == 1.0
    }

    pub fn energy_to_internal(&self, e: f64) -> f64 {
        e / self.energy_scale()
    }

    pub fn energy_to_physical(&self, e: f64) -> f64 {
        e * self.energy_scale()
    }

    /// Internal time is t·ε/ħ.
    pub fn time_to_internal(&self, t: f64) -> f64 {
        t * self.energy_scale() / self.hbar
    }

    pub fn time_to_physical(&self, t: f64) -> f64 {
        t * self.hbar / self.energy_scale()
    }
}

impl Default for Units {
    fn default() -> Self {
        Self::internal()
    }
}

/// A real number or the unsigned infinity that closes the Robin family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }
}

impl std::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => write!(f, "inf"),
        }
    }
}

/// L = L₀·cot(ϑ/2); ϑ = 0 is the Neumann end of the family.
pub fn robin_from_theta(theta: f64, l0: f64) -> ExtendedReal {
    if theta == 0.0 {
        return ExtendedReal::Infinite;
    }
    if theta == PI {
        return ExtendedReal::Finite(0.0);
    }
    let half = 0.5 * theta;
    ExtendedReal::Finite(l0 * half.cos() / half.sin())
}

/// Robin condition Γ₁ + (L/L₀)Γ₂ = 0 stored by its angle ϑ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Robin {
    theta: f64,
    l0: f64,
}

impl Robin {
    pub fn from_theta(theta: f64, l0: f64) -> Result<Self> {
        check_l0(l0)?;
        if !(theta.is_finite() && (0.0..TAU).contains(&theta)) {
            return Err(Error::InvalidParameter(format!("Robin angle {theta} outside [0, 2pi)")));
        }
        Ok(Self { theta, l0 })
    }

    pub fn from_length(length: ExtendedReal, l0: f64) -> Result<Self> {
        check_l0(l0)?;
        match length {
            ExtendedReal::Infinite => Ok(Self { theta: 0.0, l0 }),
            ExtendedReal::Finite(l) if l.is_finite() => Ok(Self { theta: 2.0 * l0.atan2(l), l0 }),
            ExtendedReal::Finite(l) => Err(Error::InvalidParameter(format!("Robin length {l} is not finite; use Infinite"))),
        }
    }

    pub fn length_value(l: f64, l0: f64) -> Result<Self> {
        Self::from_length(ExtendedReal::Finite(l), l0)
    }

    pub fn dirichlet(l0: f64) -> Result<Self> {
        Self::from_theta(PI, l0)
    }

    pub fn neumann(l0: f64) -> Result<Self> {
        Self::from_theta(0.0, l0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn length(&self) -> ExtendedReal {
        robin_from_theta(self.theta, self.l0)
    }

    pub fn is_dirichlet(&self) -> bool {
        self.theta == PI
    }

    pub fn is_neumann(&self) -> bool {
        self.theta == 0.0
    }

    /// (sin ϑ/2, cos ϑ/2), exact at ϑ ∈ {0, π}.
    pub fn half_angle(&self) -> (f64, f64) {
        if self.theta == 0.0 {
            (0.0, 1.0)
        } else if self.theta == PI {
            (1.0, 0.0)
        } else {
            let h = 0.5 * self.theta;
            (h.sin(), h.cos())
        }
    }

    /// Limit numbers (c1, c2) of the ray accepted by the condition.
    pub fn limit_ray(&self) -> (f64, f64) {
        let (s, c) = self.half_angle();
        (s, self.l0 * c)
    }

    /// The U(1) element e^{iϑ}.
    pub fn unitary(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }
}

fn check_l0(l0: f64) -> Result<()> {
    if l0.is_finite() && l0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("reference length L0 must be positive, got {l0}")))
    }
}

/// Parameters of U = P·R(μ)·diag(e^{iϑ₊}, e^{iϑ₋})·R(μ)ᵀ·P†, with R a real
/// rotation by the mixing angle μ and P = diag(e^{iφ/2}, e^{−iφ/2}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U2Params {
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub mixing: f64,
    pub phase: f64,
}

pub type Mat2 = [[C64; 2]; 2];

/// A point interaction: 2×2 unitary U acting on the boundary space ℂ².
/// Component 0 refers to the side x > 0, component 1 to x < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointInteraction {
    u: Mat2,
    l0: f64,
}

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub(crate) fn mat_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub(crate) fn mat_inverse(a: &Mat2) -> Option<Mat2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-14 * scale * scale || det.norm() == 0.0 {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Largest entrywise deviation of U·U† from the identity.
pub fn unitarity_defect(u: &Mat2) -> f64 {
    let p = mat_mul(u, &mat_adjoint(u));
    let mut worst: f64 = 0.0;
    for (i, row) in p.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((z - target).norm());
        }
    }
    worst
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl PointInteraction {
    pub const UNITARITY_TOL: f64 = 1e-12;

    pub fn new(u: Mat2, l0: f64) -> Result<Self> {
        check_l0(l0)?;
        if u.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("U has non-finite entries".into()));
        }
        let deviation = unitarity_defect(&u);
        if deviation > Self::UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { u, l0 })
    }

    pub fn from_params(p: U2Params, l0: f64) -> Result<Self> {
        let all = [p.theta_plus, p.theta_minus, p.mixing, p.phase];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("U(2) parameters must be finite".into()));
        }
        let (s, c) = p.mixing.sin_cos();
        let dp = C64::from_polar(1.0, p.theta_plus);
        let dm = C64::from_polar(1.0, p.theta_minus);
        let off = C64::from_polar(s * c, p.phase) * (dp - dm);
        let u = [[dp * c * c + dm * s * s, off], [C64::from_polar(s * c, -p.phase) * (dp - dm), dp * s * s + dm * c * c]];
        Self::new(u, l0)
    }

    /// Eigen-channel lengths L± with mixing and phase angles.
    pub fn from_lengths(l_plus: ExtendedReal, l_minus: ExtendedReal, mixing: f64, phase: f64, l0: f64) -> Result<Self> {
        let tp = Robin::from_length(l_plus, l0)?.theta();
        let tm = Robin::from_length(l_minus, l0)?.theta();
        Self::from_params(U2Params { theta_plus: tp, theta_minus: tm, mixing, phase }, l0)
    }

    /// Two independent Robin conditions, one per side.
    pub fn separated(plus: Robin, minus: Robin) -> Result<Self> {
        if plus.l0() != minus.l0() {
            return Err(Error::InvalidParameter("both sides must share L0".into()));
        }
        let z = C64::new(0.0, 0.0);
        Self::new([[plus.unitary(), z], [z, minus.unitary()]], plus.l0())
    }

    /// U from a Lagrangian basis: columns of X span Γ₁, columns of Y span Γ₂.
    pub fn from_lagrangian(x: Mat2, y: Mat2, l0: f64) -> Result<Self> {
        let i = C64::new(0.0, 1.0);
        let mut minus = [[C64::new(0.0, 0.0); 2]; 2];
        let mut plus = minus;
        for r in 0..2 {
            for c in 0..2 {
                minus[r][c] = x[r][c] - i * y[r][c];
                plus[r][c] = x[r][c] + i * y[r][c];
            }
        }
        let inv = mat_inverse(&plus).ok_or_else(|| Error::SingularSystem("X + iY is singular".into()))?;
        let mut u = mat_mul(&minus, &inv);
        // Remove rounding so that the unitarity check is meaningful.
        polish_unitary(&mut u);
        Self::new(u, l0)
    }

    /// Continuity of ψ and ψ′ across the point: U = σₓ.
    pub fn transparent(l0: f64) -> Result<Self> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        Self::new([[z, o], [o, z]], l0)
    }

    /// Contact interaction αδ(x): ψ continuous, ψ′(+0) − ψ′(−0) = αψ(0).
    pub fn delta(alpha: f64, l0: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("delta strength must be finite".into()));
        }
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let x = [[o, z], [o, z]];
        let y = [[C64::new(0.5 * alpha * l0, 0.0), C64::new(l0, 0.0)], [C64::new(0.5 * alpha * l0, 0.0), C64::new(-l0, 0.0)]];
        Self::from_lagrangian(x, y, l0)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.u
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn is_diagonal(&self) -> bool {
        self.u[0][1] == C64::new(0.0, 0.0) && self.u[1][0] == C64::new(0.0, 0.0)
    }

    /// Eigen-channels (ϑ_j, v_j) with e^{iϑ_j} the eigenvalue and v_j unit norm.
    pub fn eigen(&self) -> [(f64, [C64; 2]); 2] {
        let u = &self.u;
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        if self.is_diagonal() {
            return [(wrap_angle(u[0][0].arg()), [o, z]), (wrap_angle(u[1][1].arg()), [z, o])];
        }
        let half_tr = 0.5 * (u[0][0] + u[1][1]);
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        let disc = (half_tr * half_tr - det).sqrt();
        let lam = half_tr + disc;
        let cand_a = [u[0][1], lam - u[0][0]];
        let cand_b = [lam - u[1][1], u[1][0]];
        let na = (cand_a[0].norm_sqr() + cand_a[1].norm_sqr()).sqrt();
        let nb = (cand_b[0].norm_sqr() + cand_b[1].norm_sqr()).sqrt();
        let (v, n) = if na >= nb { (cand_a, na) } else { (cand_b, nb) };
        if n < 1e-14 {
            return [(wrap_angle(u[0][0].arg()), [o, z]), (wrap_angle(u[1][1].arg()), [z, o])];
        }
        let v1 = [v[0] / n, v[1] / n];
        let v2 = [-v1[1].conj(), v1[0].conj()];
        let rayleigh = |v: &[C64; 2]| {
            let w0 = u[0][0] * v[0] + u[0][1] * v[1];
            let w1 = u[1][0] * v[0] + u[1][1] * v[1];
            v[0].conj() * w0 + v[1].conj() * w1
        };
        [(wrap_angle(rayleigh(&v1).arg()), v1), (wrap_angle(rayleigh(&v2).arg()), v2)]
    }

    /// Canonical parameters: the "+" channel is the eigenvector weighted
    /// more on the x > 0 side, so μ ∈ [0, π/4].
    pub fn params(&self) -> U2Params {
        let [a, b] = self.eigen();
        let (plus, minus) = if a.1[0].norm() > b.1[0].norm() + 1e-13 {
            (a, b)
        } else if b.1[0].norm() > a.1[0].norm() + 1e-13 {
            (b, a)
        } else if a.0 <= b.0 {
            (a, b)
        } else {
            (b, a)
        };
        let v = plus.1;
        let mixing = v[1].norm().atan2(v[0].norm());
        let phase = if v[1].norm() > 1e-15 && v[0].norm() > 1e-15 {
            let r = -(v[1] / v[0]).arg();
            if r <= -PI {
                r + TAU
            } else {
                r
            }
        } else {
            0.0
        };
        U2Params { theta_plus: plus.0, theta_minus: minus.0, mixing, phase }
    }

    /// Eigen-channel lengths (L₊, L₋) for the canonical parameters.
    pub fn lengths(&self) -> (ExtendedReal, ExtendedReal) {
        let p = self.params();
        (robin_from_theta(p.theta_plus, self.l0), robin_from_theta(p.theta_minus, self.l0))
    }
}

fn polish_unitary(u: &mut Mat2) {
    // One Newton step of the polar iteration U ← (U + U^{-†})/2.
    if let Some(inv) = mat_inverse(u) {
        let inv_adj = mat_adjoint(&inv);
        for r in 0..2 {
            for c in 0..2 {
                u[r][c] = 0.5 * (u[r][c] + inv_adj[r][c]);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    HalfLine,
    Line,
    Interval,
}

/// The four places where a boundary can sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Lower,
    Upper,
    /// The marked point 0 of a line, approached from x > 0.
    MarkedPlus,
    /// The marked point 0 of a line, approached from x < 0.
    MarkedMinus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain1D {
    kind: DomainKind,
    lower: f64,
    upper: f64,
}

impl Domain1D {
    pub fn half_line() -> Self {
        Self { kind: DomainKind::HalfLine, lower: 0.0, upper: f64::INFINITY }
    }

    pub fn line() -> Self {
        Self { kind: DomainKind::Line, lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    /// A finite interval [a, b] with 0 ≤ a < b.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
            return Err(Error::InvalidParameter(format!("interval needs 0 <= a < b finite, got [{a}, {b}]")));
        }
        Ok(Self { kind: DomainKind::Interval, lower: a, upper: b })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn endpoints(&self) -> Vec<Endpoint> {
        match self.kind {
            DomainKind::Line => vec![Endpoint::Lower, Endpoint::MarkedMinus, Endpoint::MarkedPlus, Endpoint::Upper],
            _ => vec![Endpoint::Lower, Endpoint::Upper],
        }
    }

    pub fn has(&self, ep: Endpoint) -> bool {
        self.endpoints().contains(&ep)
    }

    /// Location of the endpoint and the sign of the inward direction.
    pub fn geometry(&self, ep: Endpoint) -> Result<(f64, f64)> {
        if !self.has(ep) {
            return Err(Error::InvalidParameter(format!("{ep:?} is not an endpoint of {:?}", self.kind)));
        }
        Ok(match ep {
            Endpoint::Lower => (self.lower, 1.0),
            Endpoint::Upper => (self.upper, -1.0),
            Endpoint::MarkedPlus => (0.0, 1.0),
            Endpoint::MarkedMinus => (0.0, -1.0),
        })
    }
}

/// Asymptotic law of a tabulated potential below its first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularTail {
    /// V ≈ c/x² with Frobenius exponents s₁ + s₂ = 1, c = s₁s₂·(−1).
    Power { exponents: [f64; 2] },
    /// V ≈ g/x, solutions carry a logarithm.
    Coulomb { g: f64 },
}

impl SingularTail {
    fn value(&self, x: f64) -> f64 {
        match *self {
            SingularTail::Power { exponents: [a, b] } => -a * b / (x * x),
            SingularTail::Coulomb { g } => g / x,
        }
    }
}

/// Samples of V on a regular sub-grid, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    x: Vec<f64>,
    v: Vec<f64>,
    tail: Option<SingularTail>,
}

impl TabulatedPotential {
    pub fn new(x: Vec<f64>, v: Vec<f64>, tail: Option<SingularTail>) -> Result<Self> {
        if x.len() != v.len() || x.len() < 2 {
            return Err(Error::InvalidParameter("tabulated potential needs >= 2 matching samples".into()));
        }
        if x[0] < 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("sample coordinates must be >= 0 and increasing".into()));
        }
        if x.iter().chain(v.iter()).any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("tabulated samples must be finite".into()));
        }
        if let Some(SingularTail::Power { exponents: [a, b] }) = tail {
            if ((a + b) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter("power tail exponents must sum to 1".into()));
            }
        }
        if tail.is_some() && x[0] == 0.0 {
            return Err(Error::InvalidParameter("a singular tail needs the first sample at x > 0".into()));
        }
        Ok(Self { x, v, tail })
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.v)
    }

    pub fn tail(&self) -> Option<SingularTail> {
        self.tail
    }

    fn value(&self, r: f64) -> f64 {
        let n = self.x.len();
        if r <= self.x[0] {
            return match self.tail {
                Some(t) => t.value(r) + self.v[0] - t.value(self.x[0]),
                None => self.v[0],
            };
        }
        if r >= self.x[n - 1] {
            return self.v[n - 1];
        }
        let j = self.x.partition_point(|&xi| xi <= r).min(n - 1);
        let (x0, x1) = (self.x[j - 1], self.x[j]);
        let w = (r - x0) / (x1 - x0);
        self.v[j - 1] * (1.0 - w) + self.v[j] * w
    }

    fn scaled(&self, f: f64) -> Self {
        let tail = self.tail.map(|t| match t {
            SingularTail::Coulomb { g } => SingularTail::Coulomb { g: g * f },
            p => p,
        });
        Self { x: self.x.clone(), v: self.v.iter().map(|v| v * f).collect(), tail }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    Free,
    /// c/x².
    InverseSquare {
        c: f64,
    },
    /// g/r.
    Coulomb {
        g: f64,
    },
    /// l(l+1)/r² + g/r.
    CoulombPlusCentrifugal {
        g: f64,
        l: u32,
    },
    /// a·x^β.
    PowerLaw {
        coefficient: f64,
        exponent: f64,
    },
    Tabulated(TabulatedPotential),
}

/// Kinetic weight p(x) in −(pψ′)′ + Vψ = Eψ.
#[derive(Debug, Clone, PartialEq)]
pub enum KineticWeight {
    Unit,
    /// a·x^α with a > 0.
    PowerLaw {
        coefficient: f64,
        exponent: f64,
    },
    /// Positive samples, linearly interpolated and held constant outside.
    Tabulated {
        x: Vec<f64>,
        p: Vec<f64>,
    },
}

/// Potential and kinetic weight, both functions of the distance r = |x|
/// from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    family: PotentialFamily,
    weight: KineticWeight,
}

impl PotentialSpec {
    pub fn new(family: PotentialFamily, weight: KineticWeight) -> Result<Self> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be finite")))
            }
        };
        match &family {
            PotentialFamily::Free | PotentialFamily::Tabulated(_) => {}
            PotentialFamily::InverseSquare { c } => finite(*c, "c")?,
            PotentialFamily::Coulomb { g } | PotentialFamily::CoulombPlusCentrifugal { g, .. } => finite(*g, "g")?,
            PotentialFamily::PowerLaw { coefficient, exponent } => {
                finite(*coefficient, "coefficient")?;
                finite(*exponent, "exponent")?;
            }
        }
        match &weight {
            KineticWeight::Unit => {}
            KineticWeight::PowerLaw { coefficient, exponent } => {
                if !(coefficient.is_finite() && *coefficient > 0.0 && exponent.is_finite()) {
                    return Err(Error::InvalidParameter("weight must be a positive power law".into()));
                }
            }
            KineticWeight::Tabulated { x, p } => {
                if x.len() != p.len() || x.len() < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("tabulated weight needs increasing samples".into()));
                }
                if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidParameter("tabulated weight must be positive".into()));
                }
            }
        }
        Ok(Self { family, weight })
    }

    pub fn free() -> Self {
        Self { family: PotentialFamily::Free, weight: KineticWeight::Unit }
    }

    pub fn inverse_square(c: f64) -> Result<Self> {
        Self::new(PotentialFamily::InverseSquare { c }, KineticWeight::Unit)
    }

    pub fn coulomb(g: f64) -> Result<Self> {
        Self::new(PotentialFamily::Coulomb { g }, KineticWeight::Unit)
    }

    pub fn coulomb_centrifugal(g: f64, l: u32) -> Result<Self> {
        Self::new(PotentialFamily::CoulombPlusCentrifugal { g, l }, KineticWeight::Unit)
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn weight_spec(&self) -> &KineticWeight {
        &self.weight
    }

    pub fn has_unit_weight(&self) -> bool {
        matches!(self.weight, KineticWeight::Unit)
    }

    /// V at distance r from the origin.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.family {
            PotentialFamily::Free => 0.0,
            PotentialFamily::InverseSquare { c } => c / (r * r),
            PotentialFamily::Coulomb { g } => g / r,
            PotentialFamily::CoulombPlusCentrifugal { g, l } => {
                let l = *l as f64;
                l * (l + 1.0) / (r * r) + g / r
            }
            PotentialFamily::PowerLaw { coefficient, exponent } => coefficient * r.powf(*exponent),
            PotentialFamily::Tabulated(t) => t.value(r),
        }
    }

    /// p at distance r from the origin.
    pub fn weight(&self, r: f64) -> f64 {
        let r = r.abs();
        match &self.weight {
            KineticWeight::Unit => 1.0,
            KineticWeight::PowerLaw { coefficient, exponent } => coefficient * r.powf(*exponent),
            KineticWeight::Tabulated { x, p } => {
                let n = x.len();
                if r <= x[0] {
                    p[0]
                } else if r >= x[n - 1] {
                    p[n - 1]
                } else {
                    let j = x.partition_point(|&xi| xi <= r).min(n - 1);
                    let w = (r - x[j - 1]) / (x[j] - x[j - 1]);
                    p[j - 1] * (1.0 - w) + p[j] * w
                }
            }
        }
    }

    /// True when V is singular at the origin.
    pub fn singular_at_origin(&self) -> bool {
        match &self.family {
            PotentialFamily::Free => false,
            PotentialFamily::InverseSquare { c } => *c != 0.0,
            PotentialFamily::Coulomb { g } => *g != 0.0,
            PotentialFamily::CoulombPlusCentrifugal { g, l } => *g != 0.0 || *l > 0,
            PotentialFamily::PowerLaw { coefficient, exponent } => *coefficient != 0.0 && *exponent < 0.0,
            PotentialFamily::Tabulated(t) => t.tail.is_some(),
        }
    }

    /// Multiply every energy-valued coupling by f.
    fn scaled(&self, f: f64) -> Self {
        let family = match &self.family {
            PotentialFamily::Free => PotentialFamily::Free,
            PotentialFamily::InverseSquare { c } => PotentialFamily::InverseSquare { c: c * f },
            PotentialFamily::Coulomb { g } => PotentialFamily::Coulomb { g: g * f },
            PotentialFamily::CoulombPlusCentrifugal { g, l } => PotentialFamily::CoulombPlusCentrifugal { g: g * f, l: *l },
            PotentialFamily::PowerLaw { coefficient, exponent } => PotentialFamily::PowerLaw { coefficient: coefficient * f, exponent: *exponent },
            PotentialFamily::Tabulated(t) => PotentialFamily::Tabulated(t.scaled(f)),
        };
        Self { family, weight: self.weight.clone() }
    }
}

/// Boundary condition attached to a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    HalfLineRobin(Robin),
    LineU2(PointInteraction),
    IntervalRobin {
        lower: Robin,
        upper: Robin,
    },
    /// No condition: every endpoint is limit point.
    Intrinsic,
}

impl BoundaryCondition {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::HalfLineRobin(_) => "HalfLineRobin",
            BoundaryCondition::LineU2(_) => "LineU2",
            BoundaryCondition::IntervalRobin { .. } => "IntervalRobin",
            BoundaryCondition::Intrinsic => "Intrinsic",
        }
    }

    pub fn l0(&self) -> f64 {
        match self {
            BoundaryCondition::HalfLineRobin(r) => r.l0(),
            BoundaryCondition::LineU2(u) => u.l0(),
            BoundaryCondition::IntervalRobin { lower, .. } => lower.l0(),
            BoundaryCondition::Intrinsic => 1.0,
        }
    }
}

/// A complete problem: domain, potential, boundary condition and the
/// reference energy E₀ used for reference modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    domain: Domain1D,
    potential: PotentialSpec,
    bc: BoundaryCondition,
    e0: f64,
}

impl Problem {
    pub fn new(domain: Domain1D, potential: PotentialSpec, bc: BoundaryCondition) -> Result<Self> {
        let ok = matches!(
            (domain.kind(), &bc),
            (DomainKind::HalfLine, BoundaryCondition::HalfLineRobin(_))
                | (DomainKind::Line, BoundaryCondition::LineU2(_))
                | (DomainKind::Interval, BoundaryCondition::IntervalRobin { .. })
                | (_, BoundaryCondition::Intrinsic)
        );
        if !ok {
            return Err(Error::MismatchedBoundary { bc: bc.name().into(), domain: format!("{:?}", domain.kind()) });
        }
        Ok(Self { domain, potential, bc, e0: 0.0 })
    }

    pub fn half_line(potential: PotentialSpec, robin: Robin) -> Result<Self> {
        Self::new(Domain1D::half_line(), potential, BoundaryCondition::HalfLineRobin(robin))
    }

    pub fn line(potential: PotentialSpec, u: PointInteraction) -> Result<Self> {
        Self::new(Domain1D::line(), potential, BoundaryCondition::LineU2(u))
    }

    pub fn with_e0(mut self, e0: f64) -> Result<Self> {
        if !e0.is_finite() {
            return Err(Error::NonFiniteEnergy);
        }
        self.e0 = e0;
        Ok(self)
    }

    pub fn with_bc(&self, bc: BoundaryCondition) -> Result<Self> {
        Self::new(self.domain, self.potential.clone(), bc)?.with_e0(self.e0)
    }

    pub fn domain(&self) -> &Domain1D {
        &self.domain
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn bc(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }
}

/// Rescale a physically specified problem to ħ²/(2m) = 1.
pub fn to_internal_units(problem: &Problem, units: &Units) -> Result<Problem> {
    let units = Units::new(units.hbar(), units.mass())?;
    rescale(problem, 1.0 / units.energy_scale())
}

/// Inverse of [`to_internal_units`].
pub fn to_physical_units(problem: &Problem, units: &Units) -> Result<Problem> {
    let units = Units::new(units.hbar(), units.mass())?;
    rescale(problem, units.energy_scale())
}

fn rescale(problem: &Problem, f: f64) -> Result<Problem> {
    let e0 = problem.e0 * f;
    if !e0.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    Ok(Problem { domain: problem.domain, potential: problem.potential.scaled(f), bc: problem.bc, e0 })
}
