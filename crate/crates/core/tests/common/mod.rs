//! Property checks shared by the property suite and the acceptance runner.
#![allow(dead_code)]

use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use selfadj::boundary::{boundary_data_with, robin_satisfied, transform_modes};
use selfadj::model::Endpoint;
use selfadj::model::{ExtendedReal, PointInteraction, PotentialSpec, Problem, Robin};
use selfadj::numerics::{integrate_stationary, From, Grid, SolutionSamples};
use selfadj::refmodes::{limit_numbers, reference_modes, ReferenceModePair};
use selfadj::scattering::{smatrix_line, unitarity_defect};
use selfadj::timeevo::{evolve, WavePacket};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn potential(kind: u8, strength: f64) -> PotentialSpec {
    match kind % 3 {
        0 => PotentialSpec::free(),
        1 => PotentialSpec::inverse_square(strength).unwrap(),
        _ => PotentialSpec::coulomb(strength).unwrap(),
    }
}

/// Largest |W(x) − W(x_ref)| / (|ψa|·|pψb′| + |pψa′|·|ψb|) over the grid.
pub fn wronskian_drift(pot: &PotentialSpec, e: f64, a: (f64, f64), b: (f64, f64)) -> Result<f64, String> {
    let grid = Grid::log_toward_step(0.0, 1.0, 1e-3, 3.0, 0.004).map_err(|e| e.to_string())?;
    let sa = integrate_stationary(pot, e, From::Last, (c(a.0), c(a.1)), &grid).map_err(|e| e.to_string())?;
    let sb = integrate_stationary(pot, e, From::Last, (c(b.0), c(b.1)), &grid).map_err(|e| e.to_string())?;
    let w = |i: usize| sa.psi()[i] * sb.p_dpsi()[i] - sa.p_dpsi()[i] * sb.psi()[i];
    let scale = |i: usize| sa.psi()[i].norm() * sb.p_dpsi()[i].norm() + sa.p_dpsi()[i].norm() * sb.psi()[i].norm();
    let n = grid.len();
    let w_ref = w(n - 1);
    Ok((0..n).map(|i| (w(i) - w_ref).norm() / scale(i).max(scale(n - 1))).fold(0.0, f64::max))
}

pub fn lc_modes() -> &'static ReferenceModePair {
    static M: OnceLock<ReferenceModePair> = OnceLock::new();
    M.get_or_init(|| {
        let p = Problem::half_line(PotentialSpec::inverse_square(5.0 / 16.0).unwrap(), Robin::dirichlet(1.0).unwrap()).unwrap();
        reference_modes(&p, Endpoint::Lower, 0.0).unwrap()
    })
}

/// c1·φ⁽¹⁾ + c2·φ⁽²⁾ continued to energy e, integrated toward the endpoint.
pub fn lc_solution(e: f64, c1: C64, c2: C64) -> SolutionSamples {
    let m = lc_modes();
    let p = PotentialSpec::inverse_square(5.0 / 16.0).unwrap();
    let grid = Grid::log_toward_step(0.0, 1.0, 1e-6, 2.0, 0.005).unwrap();
    let (v1, d1) = m.seed(2.0, e, 1.0, 0.0);
    let (v2, d2) = m.seed(2.0, e, 0.0, 1.0);
    integrate_stationary(&p, e, From::Last, (c1 * v1 + c2 * v2, c1 * d1 + c2 * d2), &grid).unwrap()
}

/// |LN(αψ + βχ) − α·LN(ψ) − β·LN(χ)| against the reported extrapolation errors.
pub fn linearity_gap(e: f64, a: [C64; 2], b: [C64; 2], alpha: C64, beta: C64) -> Result<(f64, f64), String> {
    let m = lc_modes();
    let psi = lc_solution(e, a[0], a[1]);
    let chi = lc_solution(e, b[0], b[1]);
    let mix = psi.combine(alpha, &chi, beta).map_err(|e| e.to_string())?;
    let lp = limit_numbers(&psi, m).map_err(|e| e.to_string())?;
    let lc = limit_numbers(&chi, m).map_err(|e| e.to_string())?;
    let lm = limit_numbers(&mix, m).map_err(|e| e.to_string())?;
    let gap = (lm.c1 - alpha * lp.c1 - beta * lc.c1).norm().max((lm.c2 - alpha * lp.c2 - beta * lc.c2).norm());
    let tol = lm.error + alpha.norm() * lp.error + beta.norm() * lc.error;
    Ok((gap, tol))
}

/// Robin verdicts before and after the re-choice φ′ = Mφ, with M = [[a, b], [d, (1 + b·d)/a]].
pub fn sl2_verdicts(e: f64, length: Option<f64>, satisfy: bool, tilt: f64, a: f64, b: f64, d: f64) -> Result<(bool, bool), String> {
    let robin = match length {
        Some(l) => Robin::length_value(l, 1.0),
        None => Robin::from_length(ExtendedReal::Infinite, 1.0),
    }
    .map_err(|e| e.to_string())?;
    let (s, co) = robin.limit_ray();
    let (c1, c2) = if satisfy {
        (s, co)
    } else {
        let (st, ct) = tilt.sin_cos();
        (ct * s - st * co, st * s + ct * co)
    };
    let psi = lc_solution(e, c(c1), c(c2));
    let m = lc_modes();
    let mat = [[a, b], [d, (1.0 + b * d) / a]];
    let (mt, map) = transform_modes(m, mat).map_err(|e| e.to_string())?;
    let before = boundary_data_with(std::slice::from_ref(&psi), std::slice::from_ref(m), 1.0).map_err(|e| e.to_string())?;
    let after = boundary_data_with(&[psi], &[mt], 1.0).map_err(|e| e.to_string())?;
    let mapped = map.map_robin(&robin).map_err(|e| e.to_string())?;
    let v1 = robin_satisfied(&before, &robin, 1e-6).map_err(|e| e.to_string())?.0;
    let v2 = robin_satisfied(&after, &mapped, 1e-6).map_err(|e| e.to_string())?.0;
    Ok((v1, v2))
}

pub fn smatrix_defect(l_plus: f64, l_minus: f64, mixing: f64, phase: f64, k: f64, strength: f64) -> Result<f64, String> {
    let u =
        PointInteraction::from_lengths(ExtendedReal::Finite(l_plus), ExtendedReal::Finite(l_minus), mixing, phase, 1.0).map_err(|e| e.to_string())?;
    let pot = if strength == 0.0 { PotentialSpec::free() } else { PotentialSpec::inverse_square(strength).unwrap() };
    let p = Problem::line(pot, u).map_err(|e| e.to_string())?;
    let s = smatrix_line(&p, k).map_err(|e| e.to_string())?;
    Ok(unitarity_defect(&s))
}

/// Largest per-step norm change for a packet under a random condition.
pub fn cn_drift(line: bool, l_plus: f64, l_minus: f64, mixing: f64, x0: f64, k0: f64) -> Result<f64, String> {
    let p = if line {
        let u = PointInteraction::from_lengths(ExtendedReal::Finite(l_plus), ExtendedReal::Finite(l_minus), mixing, 0.3, 1.0)
            .map_err(|e| e.to_string())?;
        Problem::line(PotentialSpec::free(), u)
    } else {
        Problem::half_line(PotentialSpec::free(), Robin::length_value(l_plus, 1.0).map_err(|e| e.to_string())?)
    }
    .map_err(|e| e.to_string())?;
    let pk = WavePacket::gaussian(&p, x0, 1.0, k0, 0.05, 20.0).map_err(|e| e.to_string())?;
    let tr = evolve(&pk, 0.01, 2.0, 1).map_err(|e| e.to_string())?;
    Ok(tr.max_step_drift)
}
