//! Command dispatch: each command turns a validated config into rendered
//! documents. Every number comes from a library call.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use selfadj::classify::{classify_endpoint, deficiency_indices, Evidence};
use selfadj::model::{Endpoint, Problem, Units};
use selfadj::refmodes::reference_modes;
use selfadj::scattering::{filter_curve, scatter};
use selfadj::spectrum::{bound_states, bound_states_shooting, BoundState};
use selfadj::timeevo::{evolve, measure_time_delay, WavePacket};

use crate::config::{BackendChoice, CommandName, EndpointName, Format, ParameterSweep, ProblemConfig, RunConfig};
use crate::error::CliError;
use crate::output::{json_num, json_text, Cell, Table};

/// Rendered output of a command.
#[derive(Debug, Default)]
pub struct Report {
    pub main: String,
    /// Extra documents; `None` paths are reported as notes.
    pub side: Vec<(Option<PathBuf>, String)>,
    pub notes: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let problem = cfg.problem.build()?;
    let units = cfg.problem.units()?;
    let (format, precision) = (cfg.output.format, cfg.output.precision);
    match cfg.command {
        CommandName::Classify => {
            let e0 = cfg.classify.as_ref().and_then(|c| c.e0).map(|e| units.energy_to_internal(e)).unwrap_or(problem.e0());
            let table = classify(&problem, e0)?;
            Ok(Report { main: table.render(format, precision), ..Report::default() })
        }
        CommandName::Refmodes => {
            let params = cfg.refmodes.clone().unwrap_or_default();
            let e0 = params.e0.map(|e| units.energy_to_internal(e)).unwrap_or(problem.e0());
            let table = refmodes(&problem, params.endpoint, e0)?;
            Ok(Report { main: table.render(format, precision), ..Report::default() })
        }
        CommandName::Bound => bound(cfg, &units),
        CommandName::Scatter => scatter_cmd(cfg, &units),
        CommandName::Evolve => evolve_cmd(cfg, &problem, &units),
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref().ok_or_else(|| CliError::config(format!("command `{name}` needs a `{name}` section")))
}

fn endpoint_name(ep: Endpoint) -> &'static str {
    match ep {
        Endpoint::Lower => "lower",
        Endpoint::Upper => "upper",
        Endpoint::MarkedPlus => "marked_plus",
        Endpoint::MarkedMinus => "marked_minus",
    }
}

fn classify(problem: &Problem, e0: f64) -> Result<Table, CliError> {
    let stage = CliError::stage("classify");
    let (n_plus, n_minus) = deficiency_indices(problem).map_err(&stage)?;
    let mut t =
        Table::new(&["endpoint", "verdict", "exponent_1", "exponent_2", "evidence", "needs_condition", "deficiency_plus", "deficiency_minus"]);
    for ep in problem.domain().endpoints() {
        let c = classify_endpoint(problem, ep, e0).map_err(&stage)?;
        let (s1, s2) = c.frobenius_exponents.unwrap_or((f64::NAN, f64::NAN));
        let evidence = match c.evidence {
            Evidence::Analytic => "Analytic",
            Evidence::NumericalL2Test { .. } => "NumericalL2Test",
        };
        t.push(vec![
            endpoint_name(ep).into(),
            format!("{:?}", c.verdict).into(),
            s1.into(),
            s2.into(),
            evidence.into(),
            c.verdict.needs_condition().into(),
            n_plus.into(),
            n_minus.into(),
        ]);
    }
    Ok(t)
}

fn refmodes(problem: &Problem, endpoint: EndpointName, e0: f64) -> Result<Table, CliError> {
    let ep = match endpoint {
        EndpointName::Lower => Endpoint::Lower,
        EndpointName::Upper => Endpoint::Upper,
        EndpointName::MarkedPlus => Endpoint::MarkedPlus,
        EndpointName::MarkedMinus => Endpoint::MarkedMinus,
    };
    let modes = reference_modes(problem, ep, e0).map_err(CliError::stage("refmodes"))?;
    let [a, b] = modes.samples();
    let mut t = Table::new(&["x", "phi1", "p_dphi1", "phi2", "p_dphi2"]);
    for (i, &x) in a.grid().nodes().iter().enumerate() {
        t.push(vec![x.into(), a.psi()[i].re.into(), a.p_dpsi()[i].re.into(), b.psi()[i].re.into(), b.p_dpsi()[i].re.into()]);
    }
    Ok(t)
}

/// Problems for every sweep value, or the single configured problem.
fn sweep_problems(base: &ProblemConfig, sweep: Option<&ParameterSweep>) -> Result<Vec<(Option<f64>, Problem)>, CliError> {
    match sweep {
        None => Ok(vec![(None, base.build()?)]),
        Some(s) => s.values()?.into_iter().map(|v| Ok((Some(v), base.with_parameter(s.parameter, v)?.build()?))).collect(),
    }
}

fn bound(cfg: &RunConfig, units: &Units) -> Result<Report, CliError> {
    let params = section(&cfg.bound, "bound")?;
    let range = (units.energy_to_internal(params.e_min), units.energy_to_internal(params.e_max));
    let problems = sweep_problems(&cfg.problem, params.sweep.as_ref())?;
    let results: Vec<Result<Vec<BoundState>, CliError>> = problems
        .par_iter()
        .map(|(_, p)| {
            match params.backend {
                BackendChoice::Auto => bound_states(p, range, params.max_states),
                BackendChoice::Shooting => bound_states_shooting(p, range, params.max_states),
            }
            .map_err(CliError::stage("bound"))
        })
        .collect();
    let mut cols = vec!["n", "E", "nodes", "backend"];
    let mut psi_cols = vec!["n", "x", "psi"];
    if let Some(s) = &params.sweep {
        cols.insert(0, s.parameter.name());
        psi_cols.insert(0, s.parameter.name());
    }
    let mut table = Table::new(&cols);
    let mut psi_table = Table::new(&psi_cols);
    for ((value, _), states) in problems.iter().zip(results) {
        for (i, st) in states?.iter().enumerate() {
            let mut row: Vec<Cell> = vec![(i + 1).into(), units.energy_to_physical(st.energy).into(), st.nodes.into(), st.backend.name().into()];
            if let Some(v) = value {
                row.insert(0, (*v).into());
            }
            table.push(row);
            if params.eigenfunctions.is_some() {
                for (x, psi) in st.psi.grid().nodes().iter().zip(st.psi.psi()) {
                    let mut r: Vec<Cell> = vec![(i + 1).into(), (*x).into(), psi.re.into()];
                    if let Some(v) = value {
                        r.insert(0, (*v).into());
                    }
                    psi_table.push(r);
                }
            }
        }
    }
    let precision = cfg.output.precision;
    let side = params.eigenfunctions.iter().map(|p| (Some(p.clone()), psi_table.to_csv(precision))).collect();
    Ok(Report { main: table.render(cfg.output.format, precision), side, notes: Vec::new() })
}

fn scatter_cmd(cfg: &RunConfig, units: &Units) -> Result<Report, CliError> {
    let params = section(&cfg.scatter, "scatter")?;
    let ks = params.k.values()?;
    let problems = sweep_problems(&cfg.problem, params.sweep.as_ref())?;
    let line = problems[0].1.domain().kind() == selfadj::model::DomainKind::Line;
    if params.filter && !line {
        return Err(CliError::config("filter classification applies to line problems only"));
    }
    let stage = CliError::stage("scatter");
    let jobs: Vec<(usize, f64)> = (0..problems.len()).flat_map(|i| ks.iter().map(move |&k| (i, k))).collect();
    let points: Vec<_> = jobs.par_iter().map(|&(i, k)| scatter(&problems[i].1, k).map_err(&stage)).collect();
    let filters: Vec<Option<&'static str>> = if params.filter {
        problems.par_iter().map(|(_, p)| filter_curve(p, &ks).map(|f| Some(f.kind.name())).map_err(&stage)).collect::<Result<_, _>>()?
    } else {
        vec![None; problems.len()]
    };
    let mut cols: Vec<&str> = vec!["k"];
    if line {
        cols.extend(["S_pp_re", "S_pp_im", "S_pm_re", "S_pm_im", "S_mp_re", "S_mp_im", "S_mm_re", "S_mm_im", "transmission"]);
    } else {
        cols.extend(["delta", "tau", "transmission"]);
    }
    if params.filter {
        cols.push("filter");
    }
    if let Some(s) = &params.sweep {
        cols.insert(0, s.parameter.name());
    }
    let mut table = Table::new(&cols);
    for (&(i, _), pt) in jobs.iter().zip(points) {
        let pt = pt?;
        let mut row: Vec<Cell> = Vec::with_capacity(cols.len());
        if let Some(v) = problems[i].0 {
            row.push(v.into());
        }
        row.push(pt.k.into());
        match (pt.s, pt.delta) {
            (Some(s), _) => {
                for z in [s[0][0], s[0][1], s[1][0], s[1][1]] {
                    row.push(z.re.into());
                    row.push(z.im.into());
                }
            }
            (None, delta) => {
                row.push(delta.unwrap_or(f64::NAN).into());
                row.push(pt.tau.map(|t| units.time_to_physical(t)).unwrap_or(f64::NAN).into());
            }
        }
        row.push(pt.transmission.into());
        if let Some(f) = filters[i] {
            row.push(f.into());
        }
        table.push(row);
    }
    Ok(Report { main: table.render(cfg.output.format, cfg.output.precision), ..Report::default() })
}

fn evolve_cmd(cfg: &RunConfig, problem: &Problem, units: &Units) -> Result<Report, CliError> {
    let p = section(&cfg.evolve, "evolve")?;
    let precision = cfg.output.precision;
    let stage = CliError::stage("evolve");
    let dt = units.time_to_internal(p.dt);
    let packet = WavePacket::gaussian(problem, p.x0, p.sigma, p.k0, p.h, p.x_max).map_err(&stage)?;
    let traj = evolve(&packet, dt, units.time_to_internal(p.t_total), p.frames).map_err(&stage)?;
    let delay = if p.measure_delay { Some(measure_time_delay(&packet, dt).map_err(CliError::stage("delay measurement"))?) } else { None };

    let mut frames = Table::new(&["t", "x", "prob", "re", "im"]);
    for (t, frame) in traj.times.iter().zip(&traj.frames) {
        let t = units.time_to_physical(*t);
        for (x, psi) in packet.lattice.x.iter().zip(frame) {
            frames.push(vec![t.into(), (*x).into(), psi.norm_sqr().into(), psi.re.into(), psi.im.into()]);
        }
    }
    let n0 = traj.norms[0];
    let drift = traj.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max);
    let (sp, sm) = *traj.side_norms.last().expect("at least one frame");
    let mut summary = json!({
        "frames": traj.times.len(),
        "initial_norm": json_num(n0, precision),
        "norm_drift": json_num(drift, precision),
        "max_step_drift": json_num(traj.max_step_drift, precision),
        "final_norm_plus": json_num(sp, precision),
        "final_norm_minus": json_num(sm, precision),
        "final_energy": json_num(units.energy_to_physical(traj.final_state.energy()), precision),
    });
    if let Some(d) = delay {
        summary["tau"] = json_num(units.time_to_physical(d.tau), precision);
        summary["speed_in"] = json_num(d.speed_in, precision);
        summary["speed_out"] = json_num(d.speed_out, precision);
    }
    match cfg.output.format {
        Format::Json => {
            let doc = json!({ "summary": summary, "frames": frames.to_json(precision) });
            Ok(Report { main: json_text(&doc), ..Report::default() })
        }
        Format::Csv => {
            let summary_path = p.summary.clone().or_else(|| cfg.output.path.as_ref().map(|o| o.with_extension("summary.json")));
            Ok(Report { main: frames.to_csv(precision), side: vec![(summary_path, json_text(&summary))], notes: Vec::new() })
        }
    }
}
