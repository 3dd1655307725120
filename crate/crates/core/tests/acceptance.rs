//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::time::Instant;

use common::*;
use num_complex::Complex64 as C64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use selfadj::classify::{classify_endpoint, classify_endpoint_analytic, classify_endpoint_numeric, Verdict};
use selfadj::model::{
    BoundaryCondition, Domain1D, Endpoint, ExtendedReal, KineticWeight, PointInteraction, PotentialFamily, PotentialSpec, Problem, Robin,
};
use selfadj::scattering::{free_time_delay, phase_shift_halfline_numeric, smatrix_line, wigner_time_delay};
use selfadj::spectrum::{bound_states_shooting, coulomb_levels};
use selfadj::timeevo::{evolve, measure_time_delay, WavePacket};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn coulomb_half(robin: Robin) -> Problem {
    Problem::half_line(PotentialSpec::coulomb(-2.0).unwrap(), robin).unwrap()
}

fn neumann() -> Robin {
    Robin::from_length(ExtendedReal::Infinite, 1.0).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let lv = coulomb_levels(-2.0, &neumann(), 50).map_err(err)?;
    let shift: Vec<f64> = lv.iter().enumerate().map(|(i, e)| (i + 1) as f64 - 1.0 / (-e).sqrt()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    for (n, want) in [(1, 0.5130), (2, 0.4879), (3, 0.4857), (50, 0.4844)] {
        let got = shift[n - 1];
        ensure((got - want).abs() <= 5e-4, || format!("c_{n} = {got:.6}, expected {want} ± 5e-4"))?;
    }
    ensure(elapsed < 1.0, || format!("runtime {elapsed:.3} s exceeds 1 s"))?;
    Ok(format!("c1 {:.5}, c2 {:.5}, c3 {:.5}, c50 {:.5}; {elapsed:.3} s", shift[0], shift[1], shift[2], shift[49]))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let dir = bound_states_shooting(&coulomb_half(Robin::dirichlet(1.0).unwrap()), (-1.5, -0.03), 5).map_err(err)?;
    ensure(dir.len() == 5, || format!("L = 0: {} states found, expected 5", dir.len()))?;
    for (i, s) in dir.iter().enumerate() {
        let want = -1.0 / ((i + 1) as f64).powi(2);
        worst = worst.max(((s.energy - want) / want).abs());
    }
    let lv = coulomb_levels(-2.0, &neumann(), 3).map_err(err)?;
    let neu = bound_states_shooting(&coulomb_half(neumann()), (-10.0, -0.12), 3).map_err(err)?;
    ensure(neu.len() == 3, || format!("L = inf: {} states found, expected 3", neu.len()))?;
    for (s, want) in neu.iter().zip(&lv) {
        worst = worst.max(((s.energy - want) / want).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-5, || format!("largest relative deviation {worst:e}"))?;
    ensure(elapsed < 30.0, || format!("runtime {elapsed:.1} s exceeds 30 s"))?;
    Ok(format!("largest relative deviation {worst:.2e}; {elapsed:.2} s"))
}

fn criterion_3() -> Outcome {
    let mut worst_e: f64 = 0.0;
    for l in [0.5, 1.0, 3.0] {
        let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(l, 1.0).unwrap()).unwrap();
        let st = bound_states_shooting(&p, (-50.0, -1e-4), 5).map_err(err)?;
        ensure(st.len() == 1, || format!("L = {l}: {} states, expected 1", st.len()))?;
        let want = -1.0 / (l * l);
        worst_e = worst_e.max(((st[0].energy - want) / want).abs());
    }
    ensure(worst_e <= 1e-8, || format!("bound-state relative deviation {worst_e:e}"))?;
    for r in [Robin::length_value(-1.0, 1.0).unwrap(), Robin::dirichlet(1.0).unwrap(), neumann()] {
        let p = Problem::half_line(PotentialSpec::free(), r).unwrap();
        let st = bound_states_shooting(&p, (-50.0, -1e-4), 5).map_err(err)?;
        ensure(st.is_empty(), || format!("{} spurious states for L = {:?}", st.len(), r.length()))?;
    }
    let mut worst_s: f64 = 0.0;
    for l in [-2.0, 0.5, 1.0, 3.0] {
        let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(l, 1.0).unwrap()).unwrap();
        for j in 0..=20 {
            let k = 0.1 * 100f64.powf(j as f64 / 20.0);
            let d = phase_shift_halfline_numeric(&p, k).map_err(err)?;
            let want = C64::new(1.0, -k * l) / C64::new(1.0, k * l);
            worst_s = worst_s.max((C64::from_polar(1.0, 2.0 * d) - want).norm());
        }
    }
    ensure(worst_s <= 1e-8, || format!("phase factor deviation {worst_s:e}"))?;
    Ok(format!("energy deviation {worst_e:.2e}; phase factor deviation {worst_s:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in [-2.0, -0.5, 0.5, 1.0, 3.0] {
        let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(l, 1.0).unwrap()).unwrap();
        for k in [0.1, 0.3, 1.0, 3.0, 10.0] {
            let tau = wigner_time_delay(&p, k).map_err(err)?;
            let want = free_time_delay(l, k);
            worst = worst.max(((tau - want) / want).abs());
            ensure(tau.signum() == -l.signum(), || format!("sign of tau at L = {l}, k = {k}"))?;
        }
    }
    ensure(worst <= 1e-4, || format!("finite-difference tau deviates by {worst:e}"))?;
    let mut measured = Vec::new();
    for l in [1.0, -1.0] {
        let p = Problem::half_line(PotentialSpec::free(), Robin::length_value(l, 1.0).unwrap()).unwrap();
        let pk = WavePacket::gaussian(&p, 150.0, 10.0, -1.0, 0.05, 260.0).map_err(err)?;
        let m = measure_time_delay(&pk, 0.01).map_err(err)?;
        let want = free_time_delay(l, 1.0);
        ensure(((m.tau - want) / want).abs() <= 0.05, || format!("packet delay {} vs {want} at L = {l}", m.tau))?;
        ensure(m.tau.signum() == -l.signum(), || format!("packet delay sign at L = {l}"))?;
        measured.push(m.tau);
    }
    Ok(format!("tau deviation {worst:.2e}; packet delays {:.4} (L=1), {:.4} (L=-1)", measured[0], measured[1]))
}

fn criterion_5() -> Outcome {
    let half = |pot: PotentialSpec| Problem::half_line(pot, Robin::dirichlet(1.0).unwrap()).unwrap();
    let weighted = Problem::new(
        Domain1D::half_line(),
        PotentialSpec::new(
            PotentialFamily::PowerLaw { coefficient: -2.0, exponent: 2.0 },
            KineticWeight::PowerLaw { coefficient: 1.0, exponent: 4.0 },
        )
        .unwrap(),
        BoundaryCondition::Intrinsic,
    )
    .unwrap();
    let cases = vec![
        ("c = 5/16", half(PotentialSpec::inverse_square(5.0 / 16.0).unwrap()), Verdict::LimitCircle),
        ("c = 21/16", half(PotentialSpec::inverse_square(21.0 / 16.0).unwrap()), Verdict::LimitPoint),
        ("c = 0.74", half(PotentialSpec::inverse_square(0.74).unwrap()), Verdict::LimitCircle),
        ("c = 0.76", half(PotentialSpec::inverse_square(0.76).unwrap()), Verdict::LimitPoint),
        ("Coulomb l = 0", half(PotentialSpec::coulomb_centrifugal(-2.0, 0).unwrap()), Verdict::LimitCircle),
        ("Coulomb l = 1", half(PotentialSpec::coulomb_centrifugal(-2.0, 1).unwrap()), Verdict::LimitPoint),
        ("p = x^4", weighted, Verdict::LimitPoint),
    ];
    for (name, p, want) in &cases {
        let main = classify_endpoint(p, Endpoint::Lower, 0.0).map_err(err)?.verdict;
        let analytic = classify_endpoint_analytic(p, Endpoint::Lower).map_err(err)?.verdict;
        let numeric = classify_endpoint_numeric(p, Endpoint::Lower, 0.0).map_err(err)?.verdict;
        let shifted = classify_endpoint(p, Endpoint::Lower, 1.0).map_err(err)?.verdict;
        ensure(main == *want, || format!("{name}: {main:?}, expected {want:?}"))?;
        ensure(analytic == main && numeric == main && shifted == main, || {
            format!("{name}: analytic {analytic:?}, numeric {numeric:?}, E0 = 1 {shifted:?}")
        })?;
    }
    Ok(format!("{} endpoints, analytic and numeric evidence agree", cases.len()))
}

fn criterion_6() -> Outcome {
    let z = ExtendedReal::Finite;
    let mut worst_t: f64 = 0.0;
    for (pot, lp, lm) in
        [(PotentialSpec::free(), 1.0, -0.5), (PotentialSpec::free(), 2.0, 0.3), (PotentialSpec::inverse_square(0.3).unwrap(), 1.0, -2.0)]
    {
        let u = PointInteraction::from_lengths(z(lp), z(lm), 0.0, 0.0, 1.0).map_err(err)?;
        let p = Problem::line(pot, u).map_err(err)?;
        for j in 0..=10 {
            let k = 0.1 * 100f64.powf(j as f64 / 10.0);
            let s = smatrix_line(&p, k).map_err(err)?;
            worst_t = worst_t.max(s[0][1].norm_sqr()).max(s[1][0].norm_sqr());
        }
    }
    ensure(worst_t <= 1e-12, || format!("|t|^2 reaches {worst_t:e}"))?;
    let u = PointInteraction::from_lengths(z(1.0), z(-2.0), 0.0, 0.0, 1.0).map_err(err)?;
    let p = Problem::line(PotentialSpec::free(), u).map_err(err)?;
    let pk = WavePacket::gaussian(&p, -8.0, 2.0, 1.5, 0.05, 40.0).map_err(err)?;
    let tr = evolve(&pk, 0.01, 20.0, 40).map_err(err)?;
    let (p0, m0) = tr.side_norms[0];
    let drift = tr.side_norms.iter().map(|(p, m)| (p - p0).abs().max((m - m0).abs())).fold(0.0, f64::max);
    ensure(drift <= 1e-8, || format!("half-line norm drift {drift:e}"))?;
    Ok(format!("max |t|^2 {worst_t:.1e}; half-line norm drift {drift:.1e}"))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();

    let mut worst: f64 = 0.0;
    let mut r = runner(32);
    let strat = (0u8..3, -0.2f64..0.7, -3.0f64..3.0, (-2.0f64..2.0, -2.0f64..2.0), (-2.0f64..2.0, -2.0f64..2.0));
    for _ in 0..32 {
        let (kind, strength, e, a, b) = strat.new_tree(&mut r).map_err(err)?.current();
        if (a.0 * b.1 - a.1 * b.0).abs() <= 0.1 {
            continue;
        }
        let strength = if kind == 2 { -1.0 - strength.abs() } else { strength };
        worst = worst.max(wronskian_drift(&potential(kind, strength), e, a, b)?);
    }
    ensure(worst <= 1e-8, || format!("Wronskian drift {worst:e}"))?;
    notes.push(format!("Wronskian drift {worst:.1e}"));

    let mut r = runner(32);
    let strat = (-2.0f64..2.0, proptest::array::uniform4(-2.0f64..2.0), (-2.0f64..2.0, -2.0f64..2.0), (-2.0f64..2.0, -2.0f64..2.0));
    let mut ratio: f64 = 0.0;
    for _ in 0..32 {
        let (e, a, al, be) = strat.new_tree(&mut r).map_err(err)?.current();
        let (gap, tol) = linearity_gap(e, [c(a[0]), C64::new(0.0, a[1])], [c(a[2]), c(a[3])], C64::new(al.0, al.1), C64::new(be.0, be.1))?;
        ensure(gap <= tol + 1e-9, || format!("limit-number linearity gap {gap:e} above tolerance {tol:e}"))?;
        ratio = ratio.max(gap / (tol + 1e-9));
    }
    notes.push(format!("linearity gap/tolerance {ratio:.2}"));

    let mut r = runner(128);
    let strat = (
        -2.0f64..2.0,
        -4.0f64..4.0,
        proptest::bool::ANY,
        proptest::bool::ANY,
        0.1f64..3.0,
        proptest::prop_oneof![-3.0f64..-0.3, 0.3f64..3.0],
        -2.0f64..2.0,
        -2.0f64..2.0,
    );
    let mut triples = 0;
    for _ in 0..128 {
        let (e, l, inf, satisfy, tilt, a, b, d) = strat.new_tree(&mut r).map_err(err)?.current();
        let (v1, v2) = sl2_verdicts(e, if inf { None } else { Some(l) }, satisfy, tilt, a, b, d)?;
        ensure(v1 == v2 && v1 == satisfy, || format!("SL(2) verdicts {v1}/{v2}, expected {satisfy}"))?;
        triples += 1;
    }
    notes.push(format!("SL(2) verdicts equal on {triples} triples"));

    let mut r = runner(64);
    let strat = (-3.0f64..3.0, -3.0f64..3.0, 0.0f64..0.78, -3.0f64..3.0, 0.2f64..10.0);
    let mut defect: f64 = 0.0;
    for i in 0..64 {
        let (lp, lm, mixing, phase, k) = strat.new_tree(&mut r).map_err(err)?.current();
        if lp.abs() < 1e-3 || lm.abs() < 1e-3 {
            continue;
        }
        let strength = if i % 8 == 0 { 0.4 } else { 0.0 };
        defect = defect.max(smatrix_defect(lp, lm, mixing, phase, k, strength)?);
    }
    ensure(defect <= 1e-8, || format!("S-matrix unitarity defect {defect:e}"))?;
    notes.push(format!("unitarity defect {defect:.1e}"));

    let mut r = runner(32);
    let strat = (proptest::bool::ANY, -3.0f64..3.0, -3.0f64..3.0, 0.0f64..0.78, 3.0f64..8.0, -2.0f64..2.0);
    let mut drift: f64 = 0.0;
    for _ in 0..32 {
        let (line, lp, lm, mixing, x0, k0) = strat.new_tree(&mut r).map_err(err)?.current();
        if lp.abs() < 1e-3 || lm.abs() < 1e-3 {
            continue;
        }
        drift = drift.max(cn_drift(line, lp, lm, mixing, if line { x0 - 10.0 } else { x0 }, k0)?);
    }
    ensure(drift <= 1e-10, || format!("Crank-Nicolson drift {drift:e} per step"))?;
    notes.push(format!("CN drift {drift:.1e}/step"));
    Ok(notes.join("; "))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("Coulomb level shifts", criterion_1),
        ("shooting vs closed-form Coulomb spectra", criterion_2),
        ("free half line", criterion_3),
        ("time delay", criterion_4),
        ("classification", criterion_5),
        ("decoupling", criterion_6),
        ("property suites", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
