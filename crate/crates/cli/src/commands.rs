//! Command drivers. Each command solves, writes its tables into the output
//! directory in schedule order, and finishes with `manifest.json`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use selfsim::analysis::{
    component_residual, decompose, entropy_residual, extract_limit, interaction_coefficients, l1_distance_to,
    linearized_measures, linf_distance_to, total_variation, uncoupled_measures, InteractionCoefficients,
    WaveMeasureSet,
};
use selfsim::bvp::{
    equilibrium_defect, solve_boundary_diffusive, solve_riemann_diffusive, solve_riemann_relaxation,
    SelfSimilarSolution,
};
use selfsim::models::{exact_riemann, psystem_lax_point_with_amplitude, Oracle};
use selfsim::system::validate_system;
use selfsim::wavecurve::{cone_check, lipschitz_probe, trace_wave_curve};
use selfsim::State;

use crate::config::{LoadedConfig, Resolved};
use crate::error::CliError;
use crate::output::{indexed, num, Manifest, OutputDir};

/// Entropy residuals above this count as a violated inequality.
pub const ENTROPY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Solve,
    Analyze,
    Limit,
    Wavecurve,
    Compare,
    Boundary,
    Relaxation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Solve => "solve",
            Command::Analyze => "analyze",
            Command::Limit => "limit",
            Command::Wavecurve => "wavecurve",
            Command::Compare => "compare",
            Command::Boundary => "boundary",
            Command::Relaxation => "relaxation",
        }
    }
}

/// Runs `command` and returns the manifest path.
pub fn execute(command: Command, loaded: &LoadedConfig, out: &Path) -> Result<PathBuf, CliError> {
    let resolved = loaded.config.resolve()?;
    let mut dir = OutputDir::create(out)?;
    let mut manifest = Manifest::new(command.name(), loaded, &resolved);
    log::info!("{} with model {} into {}", command.name(), resolved.model.name, out.display());
    let pending = match command {
        Command::Validate => validate(loaded, &resolved, &mut dir, &mut manifest),
        Command::Solve => solve(loaded, &resolved, &mut dir, &mut manifest),
        Command::Analyze => analyze(loaded, &resolved, &mut dir, &mut manifest),
        Command::Limit => limit(loaded, &resolved, &mut dir, &mut manifest),
        Command::Wavecurve => wavecurve(loaded, &resolved, &mut dir, &mut manifest),
        Command::Compare => compare(loaded, &resolved, &mut dir, &mut manifest),
        Command::Boundary => boundary(loaded, &resolved, &mut dir, &mut manifest),
        Command::Relaxation => relaxation(loaded, &resolved, &mut dir, &mut manifest),
    }?;
    let path = manifest.write(&mut dir)?;
    // failed checks are reported after every output is on disk
    match pending {
        Some(e) => Err(e),
        None => Ok(path),
    }
}

/// Commands return an error to raise once the manifest is written.
type Outcome = Result<Option<CliError>, CliError>;

fn lib<T>(r: selfsim::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::from_library)
}

fn vec_json(u: &State) -> Value {
    json!(u.iter().copied().collect::<Vec<f64>>())
}

fn validate(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let cfg = &loaded.config;
    let mut diffusion = r.diffusion.clone();
    let report = validate_system(
        &r.model.system,
        &mut diffusion,
        &r.model.entropy_pairs,
        cfg.validation.samples,
        cfg.seed,
    );
    let mut checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail}))
        .collect();
    let mut failed: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
    let mut data_check = |name: &str, result: Result<(State, State), CliError>| {
        let (passed, detail) = match result {
            Ok(_) => (true, "within the data ball".to_string()),
            Err(e) => (false, e.message),
        };
        if !passed {
            failed.push(name.to_string());
        }
        checks.push(json!({"name": name, "passed": passed, "margin": Value::Null, "detail": detail}));
    };
    if cfg.data.u_l.is_some() {
        data_check("riemann_data", cfg.riemann_data(r));
    }
    if cfg.data.u_b.is_some() {
        data_check("boundary_data", cfg.boundary_data(r));
    }
    dir.json(
        "validate.json",
        &json!({
            "system": report.system,
            "passed": failed.is_empty(),
            "samples": report.sample_count,
            "eta": report.eta,
            "eta_max": diffusion.eta_max,
            "schedule": r.schedule.epsilons(),
            "checks": checks,
        }),
    )?;
    manifest.eta = report.eta;
    manifest.summary = json!({"passed": failed.is_empty(), "failed_checks": failed});
    if failed.is_empty() {
        Ok(None)
    } else {
        Ok(Some(CliError {
            kind: "ValidationFailed".into(),
            message: format!("violated: {}", failed.join(", ")),
            ..CliError::config("")
        }))
    }
}

fn solution_header(n: usize, relaxation: bool) -> Vec<String> {
    let mut h = vec!["y".to_string()];
    h.extend(indexed("u", n));
    if relaxation {
        h.extend(indexed("v", n));
    }
    h.extend(indexed("a", n));
    h
}

/// Writes `solution_XX.csv` and returns its manifest entry.
fn write_solution(
    r: &Resolved,
    dir: &mut OutputDir,
    index: usize,
    s: &SelfSimilarSolution,
) -> Result<Value, CliError> {
    let n = s.dimension();
    let dec = lib(decompose(&r.model.system, &r.diffusion, s))?;
    let y = s.mesh.nodes();
    let rows = (0..y.len()).map(|k| {
        let mut row = vec![num(y[k])];
        row.extend(s.states[k].iter().map(|v| num(*v)));
        if let Some(aux) = &s.aux_states {
            row.extend(aux[k].iter().map(|v| num(*v)));
        }
        row.extend(dec.a[k].iter().map(|v| num(*v)));
        row
    });
    let name = format!("solution_{index:02}.csv");
    dir.csv(&name, &solution_header(n, s.aux_states.is_some()), rows)?;
    let jumps: Vec<f64> = (0..n)
        .map(|j| {
            let a = dec.family(j);
            (0..y.len() - 1).map(|k| 0.5 * (y[k + 1] - y[k]) * (a[k] + a[k + 1])).sum()
        })
        .collect();
    Ok(json!({
        "epsilon": s.epsilon,
        "file": name,
        "kind": s.kind.as_str(),
        "mesh_nodes": s.mesh.len(),
        "newton_iterations": s.newton_report.iterations,
        "newton_backtracks": s.newton_report.backtracks,
        "residual": s.newton_report.residual,
        "total_variation": total_variation(s),
        "jumps": jumps,
    }))
}

fn diffusive_sweep(loaded: &LoadedConfig, r: &Resolved) -> Result<(State, State, Vec<SelfSimilarSolution>), CliError> {
    let (ul, ur) = loaded.config.riemann_data(r)?;
    let sweep = lib(solve_riemann_diffusive(
        &r.model.system,
        &r.diffusion,
        &ul,
        &ur,
        &r.schedule,
        &r.policy,
    ))?;
    Ok((ul, ur, sweep))
}

fn solve(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let (ul, ur, sweep) = diffusive_sweep(loaded, r)?;
    for (i, s) in sweep.iter().enumerate() {
        manifest.runs.push(write_solution(r, dir, i, s)?);
    }
    manifest.summary = json!({"u_l": vec_json(&ul), "u_r": vec_json(&ur)});
    Ok(None)
}

fn boundary(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let (ub, ur) = loaded.config.boundary_data(r)?;
    let sweep = lib(solve_boundary_diffusive(
        &r.model.system,
        &r.diffusion,
        &ub,
        &ur,
        &r.schedule,
        &r.policy,
    ))?;
    for (i, s) in sweep.iter().enumerate() {
        let mut entry = write_solution(r, dir, i, s)?;
        if let Some(info) = &s.boundary {
            entry["layer_width"] = json!(info.layer_width);
            entry["p"] = json!(info.p.map(|p| p + 1));
            entry["characteristic"] = json!(info.characteristic);
        }
        manifest.runs.push(entry);
    }
    manifest.summary = json!({"u_b": vec_json(&ub), "u_r": vec_json(&ur)});
    Ok(None)
}

fn relaxation(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let speed = loaded
        .config
        .relaxation
        .as_ref()
        .ok_or_else(|| CliError::config("[relaxation] with a speed is required"))?
        .speed;
    let (ul, ur) = loaded.config.riemann_data(r)?;
    let sweep = lib(solve_riemann_relaxation(
        &r.model.system,
        &r.diffusion,
        speed,
        &ul,
        &ur,
        &r.schedule,
        &r.policy,
    ))?;
    for (i, s) in sweep.iter().enumerate() {
        let mut entry = write_solution(r, dir, i, s)?;
        let (left, right) = lib(equilibrium_defect(&r.model.system, s))?;
        entry["equilibrium_defect"] = json!([left, right]);
        manifest.runs.push(entry);
    }
    manifest.summary = json!({"u_l": vec_json(&ul), "u_r": vec_json(&ur), "relaxation_speed": speed});
    Ok(None)
}

struct Analysis {
    measures: Option<WaveMeasureSet>,
    interactions: Option<InteractionCoefficients>,
    entropy: Vec<f64>,
    tv: f64,
    reconstruction: f64,
    component_residual: f64,
}

fn analyze_one(loaded: &LoadedConfig, r: &Resolved, s: &SelfSimilarSolution) -> Result<Analysis, CliError> {
    let a = &loaded.config.analysis;
    let system = &r.model.system;
    let dec = lib(decompose(system, &r.diffusion, s))?;
    let comp = lib(component_residual(system, &r.diffusion, s, &dec))?;
    let mut measures = None;
    let mut interactions = None;
    if a.measures || a.interactions {
        let m = lib(uncoupled_measures(system, &r.diffusion, s))?;
        if a.interactions {
            interactions = Some(lib(interaction_coefficients(&m))?);
        }
        measures = Some(if a.linearized {
            lib(linearized_measures(system, &r.diffusion, s, &m))?
        } else {
            m
        });
    }
    let mut entropy = Vec::new();
    if a.entropy && system.is_conservative() {
        for pair in &r.model.entropy_pairs {
            entropy.push(lib(entropy_residual(system, &r.diffusion, s, pair))?);
        }
    }
    Ok(Analysis {
        measures,
        interactions,
        entropy,
        tv: total_variation(s),
        reconstruction: dec.reconstruction_error(),
        component_residual: comp.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())),
    })
}

fn analyze(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let (ul, ur, sweep) = diffusive_sweep(loaded, r)?;
    let n = r.model.system.dimension;
    let results: Vec<Result<Analysis, CliError>> = sweep.par_iter().map(|s| analyze_one(loaded, r, s)).collect();
    let mut summary_rows = Vec::new();
    let mut violations = Vec::new();
    for (i, (s, res)) in sweep.iter().zip(results).enumerate() {
        let an = res?;
        let mut entry = write_solution(r, dir, i, s)?;
        if let Some(m) = &an.measures {
            let mut header = vec!["y".to_string()];
            for f in 1..=n {
                header.extend([format!("phi_star_{f}"), format!("phi_{f}"), format!("g_{f}")]);
            }
            let coupled = m.coupled.as_ref();
            let rows = (0..m.nodes.len()).map(|k| {
                let mut row = vec![num(m.nodes[k])];
                for f in 0..n {
                    row.push(num(m.phi_star[f][k]));
                    row.push(coupled.map_or(String::new(), |c| num(c.phi[f][k])));
                    row.push(num(m.g[f][k]));
                }
                row
            });
            let name = format!("measures_{i:02}.csv");
            dir.csv(&name, &header, rows)?;
            entry["measures_file"] = json!(name);
            entry["rho"] = json!(m.rho);
            entry["rho_clamped"] = json!(m.clamped);
            entry["masses"] = json!((0..n).map(|f| m.mass(f)).collect::<Vec<_>>());
            if let Some(c) = coupled {
                entry["sandwich_constant"] = json!(c.sandwich_constant);
                entry["relative_deviation"] = json!(c.relative_deviation);
            }
        }
        if let Some(f) = &an.interactions {
            let header: Vec<String> = ["y", "i", "j", "k", "F"].iter().map(|s| s.to_string()).collect();
            let rows = (0..f.nodes.len()).flat_map(|q| {
                f.triples().map(move |(i, j, k)| {
                    vec![
                        num(f.nodes[q]),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        (k + 1).to_string(),
                        num(f.get(i, j, k)[q]),
                    ]
                })
            });
            let name = format!("interactions_{i:02}.csv");
            dir.csv(&name, &header, rows)?;
            entry["interactions_file"] = json!(name);
            let sups: Vec<Value> = f
                .triples()
                .map(|(i, j, k)| json!({"triple": [i + 1, j + 1, k + 1], "sup": f.sup(i, j, k)}))
                .collect();
            entry["interaction_sup"] = json!(sups);
        }
        for (pair, v) in r.model.entropy_pairs.iter().zip(&an.entropy) {
            if *v > ENTROPY_TOL {
                violations.push(format!("{} residual {v:e} at epsilon {:e}", pair.name, s.epsilon));
            }
        }
        entry["entropy_residuals"] = json!(an.entropy);
        entry["reconstruction_error"] = json!(an.reconstruction);
        entry["component_residual"] = json!(an.component_residual);
        let mut row = vec![num(s.epsilon), s.mesh.len().to_string(), num(an.tv)];
        row.extend(an.entropy.iter().map(|v| num(*v)));
        row.push(num(an.reconstruction));
        row.push(num(an.component_residual));
        summary_rows.push(row);
        manifest.runs.push(entry);
    }
    let mut header: Vec<String> = ["epsilon", "mesh_nodes", "total_variation"].iter().map(|s| s.to_string()).collect();
    if loaded.config.analysis.entropy && r.model.system.is_conservative() {
        header.extend(r.model.entropy_pairs.iter().map(|p| format!("entropy_{}", p.name)));
    }
    header.extend(["reconstruction_error".to_string(), "component_residual".to_string()]);
    dir.csv("summary.csv", &header, summary_rows)?;
    manifest.summary = json!({"u_l": vec_json(&ul), "u_r": vec_json(&ur), "entropy_violations": violations});
    if violations.is_empty() {
        Ok(None)
    } else {
        Ok(Some(CliError::assertion("EntropyInequality", violations.join("; "))))
    }
}

fn limit(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let (ul, ur, sweep) = diffusive_sweep(loaded, r)?;
    let n = r.model.system.dimension;
    for s in &sweep {
        manifest.runs.push(json!({
            "epsilon": s.epsilon,
            "mesh_nodes": s.mesh.len(),
            "residual": s.newton_report.residual,
        }));
    }
    let lim = lib(extract_limit(&r.model.system, &r.diffusion, &r.model.entropy_pairs, &sweep))?;
    let mut header = vec!["gap".to_string()];
    header.extend(indexed("u", n));
    header.push("flatness".into());
    let rows = lim.plateaus.iter().zip(&lim.flatness).enumerate().map(|(g, (p, f))| {
        let mut row = vec![g.to_string()];
        row.extend(p.iter().map(|v| num(*v)));
        row.push(num(*f));
        row
    });
    dir.csv("plateaus.csv", &header, rows)?;
    let header: Vec<String> = ["family", "amplitude", "speed", "rarefaction", "rh_residual", "alpha_min"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = lim.waves.iter().map(|w| {
        vec![
            (w.family + 1).to_string(),
            num(w.amplitude),
            num(w.speed),
            w.rarefaction.to_string(),
            w.rh_residual.map_or(String::new(), num),
            num(w.alpha_min),
        ]
    });
    dir.csv("waves.csv", &header, rows)?;
    let header: Vec<String> = ["epsilon", "total_variation", "l1_to_next"].iter().map(|s| s.to_string()).collect();
    let rows = sweep.iter().enumerate().map(|(i, s)| {
        vec![
            num(s.epsilon),
            num(lim.total_variation[i]),
            lim.cauchy_l1.get(i).map_or(String::new(), |v| num(*v)),
        ]
    });
    dir.csv("sweep.csv", &header, rows)?;
    let violations: Vec<String> = lim
        .entropy_residuals
        .iter()
        .filter(|(_, v)| *v > ENTROPY_TOL)
        .map(|(name, v)| format!("{name} residual {v:e}"))
        .collect();
    let report = json!({
        "epsilon": lim.epsilon,
        "u_l": vec_json(&ul),
        "u_r": vec_json(&ur),
        "plateaus": lim.plateaus.iter().map(vec_json).collect::<Vec<_>>(),
        "flatness": lim.flatness,
        "flatness_tolerance": lim.flatness_tolerance,
        "waves": lim.waves.iter().map(|w| json!({
            "family": w.family + 1,
            "jump": vec_json(&w.jump),
            "amplitude": w.amplitude,
            "speed": w.speed,
            "rarefaction": w.rarefaction,
            "rh_residual": w.rh_residual,
            "alpha_min": w.alpha_min,
        })).collect::<Vec<_>>(),
        "cauchy_l1": lim.cauchy_l1,
        "cauchy_decreasing": lim.cauchy_decreasing,
        "total_variation": lim.total_variation,
        "c0": lim.c0,
        "entropy_residuals": lim.entropy_residuals.iter().map(|(k, v)| json!({"pair": k, "residual": v})).collect::<Vec<_>>(),
    });
    dir.json("limit.json", &report)?;
    manifest.summary = report;
    if violations.is_empty() {
        Ok(None)
    } else {
        Ok(Some(CliError::assertion("EntropyInequality", violations.join("; "))))
    }
}

fn wavecurve(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let cfg = &loaded.config;
    let wc = cfg.wavecurve.as_ref().ok_or_else(|| CliError::config("[wavecurve] section is required"))?;
    let system = &r.model.system;
    let n = system.dimension;
    if wc.family >= n {
        return Err(CliError::config(format!("wavecurve.family {} out of range (N = {n})", wc.family)));
    }
    let ul = cfg.riemann_data(r).map(|d| d.0).or_else(|_| match &cfg.data.u_l {
        Some(v) if v.len() == n => Ok(State::from_vec(v.clone())),
        _ => Err(CliError::config("data.u_l is required for wavecurve")),
    })?;
    let grid = wc.grid()?;
    let epsilon = wc.epsilon.unwrap_or(r.schedule.epsilon_min);
    let curve = lib(trace_wave_curve(system, &r.diffusion, &ul, wc.family, &grid, epsilon, &r.policy))?;
    let lax_covector = lib(system.reference_frame())?.l(wc.family);
    let oracle: Vec<Option<State>> = curve
        .points
        .iter()
        .map(|p| match r.model.oracle {
            Some(Oracle::PSystem { gamma }) => {
                psystem_lax_point_with_amplitude(gamma, wc.family, &ul, &lax_covector, p.m).ok()
            }
            _ => None,
        })
        .collect();
    let mut header = vec!["m".to_string()];
    header.extend(indexed("u", n));
    header.extend(indexed("t", n));
    header.extend(["margin".to_string(), "residual".to_string(), "lax_error".to_string()]);
    let rows = curve.points.iter().enumerate().map(|(k, p)| {
        let mut row = vec![num(p.m)];
        row.extend(p.state.iter().map(|v| num(*v)));
        row.extend(curve.tangents[k].iter().map(|v| num(*v)));
        row.push(num(curve.margins[k]));
        row.push(num(p.report.residual));
        row.push(oracle[k].as_ref().map_or(String::new(), |o| num((&p.state - o).norm())));
        row
    });
    dir.csv("curve.csv", &header, rows)?;
    for p in &curve.points {
        manifest.runs.push(json!({
            "m": p.m,
            "epsilon": curve.epsilon,
            "mesh_nodes": p.solution.mesh.len(),
            "newton_iterations": p.report.iterations,
            "residual": p.report.residual,
        }));
    }
    let cone = if curve.points.len() >= 3 {
        Some(lib(cone_check(system, &curve, wc.c))?)
    } else {
        None
    };
    let lipschitz = if wc.lipschitz_bases.is_empty() {
        None
    } else {
        let mut bases = vec![ul.clone()];
        for b in &wc.lipschitz_bases {
            if b.len() != n {
                return Err(CliError::config("wavecurve.lipschitz_bases entries must have N components"));
            }
            bases.push(State::from_vec(b.clone()));
        }
        Some(lib(lipschitz_probe(system, &r.diffusion, wc.family, &bases, &grid, epsilon, &r.policy))?)
    };
    let lax_max = oracle
        .iter()
        .zip(&curve.points)
        .filter_map(|(o, p)| o.as_ref().map(|o| (&p.state - o).norm()))
        .reduce(f64::max);
    let report = json!({
        "family": wc.family + 1,
        "epsilon": curve.epsilon,
        "base": vec_json(&ul),
        "range": if curve.points.is_empty() { Value::Null } else { json!(curve.range()) },
        "points": curve.points.len(),
        "failures": curve.failures.iter().map(|(m, e)| json!({"m": m, "error": e})).collect::<Vec<_>>(),
        "cone": cone.as_ref().map(|c| json!({"c": c.c, "min_margin": c.min_margin, "passed": c.passed})),
        "lipschitz": lipschitz.as_ref().map(|l| json!({"constant": l.constant, "pairs": l.pairs})),
        "lax_max_error": lax_max,
    });
    dir.json("wavecurve.json", &report)?;
    manifest.summary = report;
    match cone {
        Some(c) if !c.passed => Ok(Some(CliError::assertion(
            "ConeViolated",
            format!("minimum cone margin {} below {}", c.min_margin, 1.0 - c.c),
        ))),
        _ => Ok(None),
    }
}

fn compare(loaded: &LoadedConfig, r: &Resolved, dir: &mut OutputDir, manifest: &mut Manifest) -> Outcome {
    let (ul, ur) = loaded.config.riemann_data(r)?;
    let exact = lib(exact_riemann(&r.model, &ul, &ur))?;
    let sweep = lib(solve_riemann_diffusive(
        &r.model.system,
        &r.diffusion,
        &ul,
        &ur,
        &r.schedule,
        &r.policy,
    ))?;
    let f = |y: f64| exact.sample(y);
    let errors: Vec<(f64, f64)> = sweep
        .par_iter()
        .map(|s| (l1_distance_to(s, &f), linf_distance_to(s, &f)))
        .collect();
    let header: Vec<String> = ["epsilon", "mesh_nodes", "l1", "linf", "l1_rate"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(i, (s, (l1, linf)))| {
            let rate = if i == 0 {
                String::new()
            } else {
                num((errors[i - 1].0 / l1).ln() / (sweep[i - 1].epsilon / s.epsilon).ln())
            };
            vec![num(s.epsilon), s.mesh.len().to_string(), num(*l1), num(*linf), rate]
        })
        .collect();
    dir.csv("convergence.csv", &header, rows)?;
    for (s, (l1, linf)) in sweep.iter().zip(&errors) {
        manifest.runs.push(json!({
            "epsilon": s.epsilon,
            "mesh_nodes": s.mesh.len(),
            "residual": s.newton_report.residual,
            "l1": l1,
            "linf": linf,
        }));
    }
    let decreasing = errors.windows(2).all(|w| w[1].0 < w[0].0);
    manifest.summary = json!({
        "u_l": vec_json(&ul),
        "u_r": vec_json(&ur),
        "exact_states": exact.states.iter().map(vec_json).collect::<Vec<_>>(),
        "l1_decreasing": decreasing,
    });
    if loaded.config.analysis.require_decreasing && !decreasing {
        return Ok(Some(CliError::assertion("NotConverging", "L1 error column is not strictly decreasing")));
    }
    Ok(None)
}
