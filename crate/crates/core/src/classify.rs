//! Regular / limit-circle / limit-point classification of endpoints.

use crate::error::{Error, Result};
use crate::model::{Endpoint, KineticWeight, PotentialFamily, PotentialSpec, Problem, SingularTail};
use crate::numerics::ode::{integrate_real, From};
use crate::numerics::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Regular,
    LimitCircle,
    LimitPoint,
}

impl Verdict {
    /// True when a boundary condition is needed at the endpoint.
    pub fn needs_condition(self) -> bool {
        !matches!(self, Verdict::LimitPoint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Analytic,
    /// ∫|φ|² dx per decade toward the endpoint for two independent solutions.
    NumericalL2Test {
        decade_integrals: [Vec<f64>; 2],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointClassification {
    pub verdict: Verdict,
    /// Leading exponents s of x^s (or of the distance) near the endpoint, larger first.
    pub frobenius_exponents: Option<(f64, f64)>,
    pub evidence: Evidence,
}

/// The c/x² coupling separating limit circle (c < 3/4) from limit point.
pub fn inverse_square_threshold() -> f64 {
    0.75
}

/// Leading behaviour p ≈ b·r^α and V ≈ a·r^β at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LocalLaw {
    weight: (f64, f64),
    potential: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Place {
    Origin,
    Infinity,
    Regular,
}

fn place(problem: &Problem, endpoint: Endpoint) -> Result<Place> {
    let (loc, _) = problem.domain().geometry(endpoint)?;
    Ok(if loc.is_infinite() {
        Place::Infinity
    } else if loc == 0.0 {
        Place::Origin
    } else {
        Place::Regular
    })
}

fn weight_law(w: &KineticWeight, at: Place) -> (f64, f64) {
    match w {
        KineticWeight::Unit => (1.0, 0.0),
        KineticWeight::PowerLaw { coefficient, exponent } => (*coefficient, *exponent),
        KineticWeight::Tabulated { p, .. } => match at {
            Place::Infinity => (p[p.len() - 1], 0.0),
            _ => (p[0], 0.0),
        },
    }
}

fn potential_law(pot: &PotentialSpec, at: Place) -> Result<Option<(f64, f64)>> {
    let nonzero = |a: f64, b: f64| if a == 0.0 { None } else { Some((a, b)) };
    Ok(match (pot.family(), at) {
        (PotentialFamily::Free, _) => None,
        (PotentialFamily::InverseSquare { c }, _) => nonzero(*c, -2.0),
        (PotentialFamily::Coulomb { g }, _) => nonzero(*g, -1.0),
        (PotentialFamily::CoulombPlusCentrifugal { g, l }, Place::Origin) => {
            if *l > 0 {
                let l = *l as f64;
                Some((l * (l + 1.0), -2.0))
            } else {
                nonzero(*g, -1.0)
            }
        }
        (PotentialFamily::CoulombPlusCentrifugal { g, l }, _) => {
            if *g != 0.0 {
                Some((*g, -1.0))
            } else {
                let l = *l as f64;
                nonzero(l * (l + 1.0), -2.0)
            }
        }
        (PotentialFamily::PowerLaw { coefficient, exponent }, _) => nonzero(*coefficient, *exponent),
        (PotentialFamily::Tabulated(t), Place::Origin) => match t.tail() {
            Some(SingularTail::Power { exponents: [s1, s2] }) => nonzero(-s1 * s2, -2.0),
            Some(SingularTail::Coulomb { g }) => nonzero(g, -1.0),
            None if t.samples().0[0] == 0.0 => None,
            None => return Err(Error::UnknownAsymptotics),
        },
        (PotentialFamily::Tabulated(t), _) => {
            let v = t.samples().1;
            nonzero(v[v.len() - 1], 0.0)
        }
    })
}

/// Square integrability of r^s toward the endpoint.
fn l2_power(s: f64, at: Place) -> bool {
    match at {
        Place::Infinity => 2.0 * s + 1.0 < 0.0,
        _ => 2.0 * s + 1.0 > 0.0,
    }
}

fn analytic_law(law: LocalLaw, at: Place) -> EndpointClassification {
    let (b, alpha) = law.weight;
    let sorted = |x: f64, y: f64| if x >= y { (x, y) } else { (y, x) };
    let verdict_from = |s1: f64, s2: f64| {
        if l2_power(s1, at) && l2_power(s2, at) {
            Verdict::LimitCircle
        } else {
            Verdict::LimitPoint
        }
    };
    let free_like = || {
        // Solutions 1 and r^{1−α} (log r when α = 1).
        let (s1, s2) = sorted(0.0, 1.0 - alpha);
        (verdict_from(s1, s2), Some((s1, s2)))
    };
    let (verdict, exps) = match law.potential {
        None => free_like(),
        Some((a, beta)) => {
            let euler = alpha - 2.0;
            let dominant = match at {
                Place::Infinity => beta > euler,
                _ => beta < euler,
            };
            if (beta - euler).abs() < 1e-14 {
                let disc = (1.0 - alpha) * (1.0 - alpha) + 4.0 * a / b;
                if disc >= 0.0 {
                    let r = disc.sqrt();
                    let (s1, s2) = sorted(0.5 * (1.0 - alpha + r), 0.5 * (1.0 - alpha - r));
                    (verdict_from(s1, s2), Some((s1, s2)))
                } else {
                    let re = 0.5 * (1.0 - alpha);
                    (verdict_from(re, re), None)
                }
            } else if dominant {
                if a > 0.0 {
                    (Verdict::LimitPoint, None)
                } else {
                    // WKB: |φ|² ~ r^{−(α+β)/2} for both solutions.
                    (verdict_from(-(alpha + beta) / 4.0, -(alpha + beta) / 4.0), None)
                }
            } else {
                free_like()
            }
        }
    };
    let bounded = match law.potential {
        None => true,
        Some((_, beta)) => beta >= 0.0,
    };
    let verdict = if at == Place::Origin && bounded && alpha == 0.0 && verdict == Verdict::LimitCircle { Verdict::Regular } else { verdict };
    EndpointClassification { verdict, frobenius_exponents: exps, evidence: Evidence::Analytic }
}

/// Classification from the known leading laws of the potential and weight.
pub fn classify_endpoint_analytic(problem: &Problem, endpoint: Endpoint) -> Result<EndpointClassification> {
    let at = place(problem, endpoint)?;
    if at == Place::Regular {
        return Ok(EndpointClassification { verdict: Verdict::Regular, frobenius_exponents: Some((1.0, 0.0)), evidence: Evidence::Analytic });
    }
    let pot = problem.potential();
    let law = LocalLaw { weight: weight_law(pot.weight_spec(), at), potential: potential_law(pot, at)? };
    Ok(analytic_law(law, at))
}

const NODES_PER_DECADE: f64 = 200.0;

/// Per-decade ∫|φ|² dx of two independent solutions at E0 integrated
/// toward the endpoint, and the verdict they imply.
pub fn classify_endpoint_numeric(problem: &Problem, endpoint: Endpoint, e0: f64) -> Result<EndpointClassification> {
    let at = place(problem, endpoint)?;
    let pot = problem.potential();
    if at == Place::Regular {
        return classify_endpoint_analytic(problem, endpoint);
    }
    if let (PotentialFamily::Tabulated(t), Place::Origin) = (pot.family(), at) {
        if t.tail().is_none() && t.samples().0[0] > 0.0 {
            return Err(Error::UnknownAsymptotics);
        }
    }
    let (grid, from) = match at {
        Place::Origin => {
            let h = std::f64::consts::LN_10 / NODES_PER_DECADE;
            (Grid::log_toward_step(0.0, 1.0, 1e-12, 1.0, h)?, From::Last)
        }
        _ => (infinity_grid(pot, e0)?, From::First),
    };
    let mut decades = [Vec::new(), Vec::new()];
    let mut overflowed = [false, false];
    for (k, init) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
        match integrate_real(pot, e0, from, init, &grid) {
            Ok(sol) => decades[k] = decade_integrals(grid.nodes(), &sol.psi, at),
            Err(Error::Overflow { .. }) => overflowed[k] = true,
            Err(e) => return Err(e),
        }
    }
    let mut tests = [L2::Diverges, L2::Diverges];
    for k in 0..2 {
        if !overflowed[k] {
            tests[k] = l2_test(&decades[k]);
        }
    }
    let analytic = classify_endpoint_analytic(problem, endpoint).ok();
    let mut both_l2 = true;
    for t in tests {
        match t {
            L2::Converges => {}
            L2::Diverges => both_l2 = false,
            L2::Undetermined => {
                let a = analytic.as_ref().ok_or_else(|| Error::NonConvergent("borderline L2 test".into()))?;
                both_l2 &= a.verdict != Verdict::LimitPoint;
            }
        }
    }
    let verdict = if !both_l2 {
        Verdict::LimitPoint
    } else if at == Place::Origin && bounded_near_origin(pot) {
        Verdict::Regular
    } else {
        Verdict::LimitCircle
    };
    Ok(EndpointClassification {
        verdict,
        frobenius_exponents: analytic.and_then(|a| a.frobenius_exponents),
        evidence: Evidence::NumericalL2Test { decade_integrals: decades },
    })
}

fn bounded_near_origin(pot: &PotentialSpec) -> bool {
    let v_far = pot.value(1.0).abs().max(1.0);
    let v_near = pot.value(1e-12).abs();
    let (p_far, p_near) = (pot.weight(1.0), pot.weight(1e-12));
    v_near <= 1e4 * v_far && p_near >= 1e-4 * p_far && p_near <= 1e4 * p_far
}

fn infinity_grid(pot: &PotentialSpec, e0: f64) -> Result<Grid> {
    let mut decades = 8;
    loop {
        let r_max = 10f64.powi(decades);
        let f_max = if pot.has_unit_weight() { (0.25 + r_max * r_max * (pot.value(r_max) - e0)).abs().max(1.0) } else { 1.0 };
        let h = (std::f64::consts::LN_10 / NODES_PER_DECADE).min(0.05 / f_max.sqrt());
        let n = (r_max.ln() / h) as usize;
        if n <= 3_000_000 || decades == 3 {
            return Grid::log_toward_step(0.0, 1.0, 1.0, r_max, h);
        }
        decades -= 1;
    }
}

fn decade_integrals(nodes: &[f64], psi: &[f64], at: Place) -> Vec<f64> {
    // Trapezoid in t = ln r: ∫ψ² dr = ∫ψ² r dt. Decade k spans distances
    // with endpoint-ward index k.
    let key = |r: f64| match at {
        Place::Infinity => r.log10().floor() as i64,
        _ => (-r.log10()).ceil() as i64,
    };
    let mut sums: std::collections::BTreeMap<i64, f64> = Default::default();
    for i in 1..nodes.len() {
        let (r0, r1) = (nodes[i - 1], nodes[i]);
        let dt = (r1 / r0).ln();
        let val = 0.5 * dt * (psi[i - 1] * psi[i - 1] * r0 + psi[i] * psi[i] * r1);
        *sums.entry(key((r0 * r1).sqrt())).or_default() += val;
    }
    sums.into_values().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum L2 {
    Converges,
    Diverges,
    Undetermined,
}

fn l2_test(d: &[f64]) -> L2 {
    let n = d.len();
    if n < 3 {
        return L2::Undetermined;
    }
    let total: f64 = d.iter().sum();
    if !total.is_finite() {
        return L2::Diverges;
    }
    if d[n - 1] <= 1e-6 * total {
        return L2::Converges;
    }
    let ratio = |k: usize| d[k] / d[k - 1];
    if ratio(n - 1) > 10.0 * (1.0 + 1e-9) {
        return L2::Diverges;
    }
    // Stable geometric tail: decide on the per-decade ratio itself.
    let rho = ratio(n - 1);
    let stable = (n - 4..n - 1).all(|k| (ratio(k) / rho - 1.0).abs() < 1e-2);
    if stable && rho < 1.0 - 1e-3 {
        L2::Converges
    } else if stable && rho > 1.0 + 1e-3 {
        L2::Diverges
    } else {
        L2::Undetermined
    }
}

/// Analytic classification for built-in families; tabulated potentials
/// go through the numerical L² test.
pub fn classify_endpoint(problem: &Problem, endpoint: Endpoint, e0: f64) -> Result<EndpointClassification> {
    if !e0.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    match problem.potential().family() {
        PotentialFamily::Tabulated(_) => classify_endpoint_numeric(problem, endpoint, e0),
        _ => classify_endpoint_analytic(problem, endpoint),
    }
}

/// Deficiency indices (n, n): the number of endpoints needing a condition.
pub fn deficiency_indices(problem: &Problem) -> Result<(usize, usize)> {
    let mut n = 0;
    for ep in problem.domain().endpoints() {
        if classify_endpoint(problem, ep, problem.e0())?.verdict.needs_condition() {
            n += 1;
        }
    }
    Ok((n, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Domain1D, PointInteraction, Robin};

    fn half(pot: PotentialSpec) -> Problem {
        Problem::half_line(pot, Robin::dirichlet(1.0).unwrap()).unwrap()
    }

    fn weighted() -> PotentialSpec {
        PotentialSpec::new(
            PotentialFamily::PowerLaw { coefficient: -2.0, exponent: 2.0 },
            KineticWeight::PowerLaw { coefficient: 1.0, exponent: 4.0 },
        )
        .unwrap()
    }

    #[test]
    fn inverse_square_examples() {
        let c = classify_endpoint(&half(PotentialSpec::inverse_square(5.0 / 16.0).unwrap()), Endpoint::Lower, 0.0).unwrap();
        assert_eq!(c.verdict, Verdict::LimitCircle);
        assert_eq!(c.frobenius_exponents, Some((1.25, -0.25)));
        let c = classify_endpoint(&half(PotentialSpec::inverse_square(21.0 / 16.0).unwrap()), Endpoint::Lower, 0.0).unwrap();
        assert_eq!(c.verdict, Verdict::LimitPoint);
        assert_eq!(c.frobenius_exponents, Some((1.75, -0.75)));
    }

    #[test]
    fn threshold_bracketing() {
        assert_eq!(inverse_square_threshold(), 0.75);
        for (c, want) in [(0.74, Verdict::LimitCircle), (0.76, Verdict::LimitPoint), (-0.5, Verdict::LimitCircle)] {
            let p = half(PotentialSpec::inverse_square(c).unwrap());
            assert_eq!(classify_endpoint(&p, Endpoint::Lower, 0.0).unwrap().verdict, want, "c = {c}");
        }
    }

    #[test]
    fn free_endpoints() {
        let p = half(PotentialSpec::free());
        assert_eq!(classify_endpoint(&p, Endpoint::Lower, 0.0).unwrap().verdict, Verdict::Regular);
        assert_eq!(classify_endpoint(&p, Endpoint::Upper, 0.0).unwrap().verdict, Verdict::LimitPoint);
    }

    #[test]
    fn coulomb_channels() {
        let l0 = half(PotentialSpec::coulomb_centrifugal(-2.0, 0).unwrap());
        let l1 = half(PotentialSpec::coulomb_centrifugal(-2.0, 1).unwrap());
        assert_eq!(classify_endpoint(&l0, Endpoint::Lower, 0.0).unwrap().verdict, Verdict::LimitCircle);
        assert_eq!(classify_endpoint(&l1, Endpoint::Lower, 0.0).unwrap().verdict, Verdict::LimitPoint);
    }

    #[test]
    fn weighted_example_is_limit_point_at_origin() {
        let p = Problem::new(Domain1D::half_line(), weighted(), crate::model::BoundaryCondition::Intrinsic).unwrap();
        let c = classify_endpoint(&p, Endpoint::Lower, 0.0).unwrap();
        assert_eq!(c.verdict, Verdict::LimitPoint);
        assert_eq!(c.frobenius_exponents, Some((-1.0, -2.0)));
        let n = classify_endpoint_numeric(&p, Endpoint::Lower, 0.0).unwrap();
        assert_eq!(n.verdict, Verdict::LimitPoint);
    }

    #[test]
    fn deficiency_examples() {
        assert_eq!(deficiency_indices(&half(PotentialSpec::free())).unwrap(), (1, 1));
        let line = Problem::line(PotentialSpec::free(), PointInteraction::transparent(1.0).unwrap()).unwrap();
        assert_eq!(deficiency_indices(&line).unwrap(), (2, 2));
        let c1 = half(PotentialSpec::coulomb_centrifugal(-2.0, 1).unwrap());
        assert_eq!(deficiency_indices(&c1).unwrap(), (0, 0));
    }

    #[test]
    fn unknown_tabulated_asymptotics() {
        let t = crate::model::TabulatedPotential::new(vec![0.1, 1.0], vec![1.0, 0.0], None).unwrap();
        let pot = PotentialSpec::new(PotentialFamily::Tabulated(t), KineticWeight::Unit).unwrap();
        assert!(matches!(classify_endpoint(&half(pot), Endpoint::Lower, 0.0), Err(Error::UnknownAsymptotics)));
    }

    #[test]
    fn numeric_matches_analytic() {
        let cases = [
            PotentialSpec::inverse_square(5.0 / 16.0).unwrap(),
            PotentialSpec::inverse_square(21.0 / 16.0).unwrap(),
            PotentialSpec::inverse_square(0.74).unwrap(),
            PotentialSpec::inverse_square(0.76).unwrap(),
            PotentialSpec::coulomb(-2.0).unwrap(),
            PotentialSpec::coulomb_centrifugal(-2.0, 1).unwrap(),
            PotentialSpec::free(),
        ];
        for pot in cases {
            let p = half(pot.clone());
            for e0 in [0.0, 1.0] {
                let a = classify_endpoint_analytic(&p, Endpoint::Lower).unwrap();
                let n = classify_endpoint_numeric(&p, Endpoint::Lower, e0).unwrap();
                assert_eq!(a.verdict, n.verdict, "{pot:?} E0 = {e0}");
            }
        }
    }
}
