//! One function per subcommand. Each reads a resolved config and writes its
//! artifacts; errors bubble up to the exit-code mapping in [`crate::cli`].

use std::sync::Arc;

use nslab_core::conditions::{
    example_grid, make_example, scaling_study, smallness_report, DecayQuadrature, ExampleSpec,
    H3Settings, HypothesisReport, ReportSettings, ScanTable,
};
use nslab_core::decomposition::{
    picard_pns, run_pipeline, sup_l2_distance, Coupling, PicardConfig, PipelineConfig,
};
use nslab_core::lp::{besov_dyadic, besov_heat, BesovParams, ChiProfile, HeatQuadrature, LPDecomposition};
use nslab_core::norms::{hs_norm, l2_norm, linf_norm};
use nslab_core::ops::{leray_project, tilde_part};
use nslab_core::solver::{
    solve_ns2d, solve_ns3d, solve_pns, DiagnosticsLevel, DiagnosticsSeries, Scheme, Solution,
    SolverConfig,
};
use nslab_core::{Error as CoreError, SpectralField, TimeSampledField, TorusGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::ResolvedConfig;
use crate::error::LabError;
use crate::report::{jlist, jnum, num, Artifacts};

type Res<T> = Result<T, LabError>;

/// The only source of randomness: ChaCha8 keyed by the config seed.
pub fn generator(cfg: &ResolvedConfig) -> Res<ChaCha8Rng> {
    Ok(ChaCha8Rng::seed_from_u64(cfg.usize("seed")? as u64))
}

pub fn taylor_green(res: usize) -> Res<SpectralField> {
    let g = TorusGrid::cube(2, res)?;
    let mut u = SpectralField::zeros(g, 3);
    u.add_sin(0, [1, 1, 0], 0.5)?;
    u.add_sin(0, [1, -1, 0], 0.5)?;
    u.add_sin(1, [1, 1, 0], -0.5)?;
    u.add_sin(1, [-1, 1, 0], -0.5)?;
    Ok(u)
}

/// `(sin z + cos y, sin x + cos z, sin y + cos x)`, an eigenfunction of curl.
pub fn abc(res: usize) -> Res<SpectralField> {
    let g = TorusGrid::cube(3, res)?;
    let mut u = SpectralField::zeros(g, 3);
    u.add_sin(0, [0, 0, 1], 1.0)?;
    u.add_cos(0, [0, 1, 0], 1.0)?;
    u.add_sin(1, [1, 0, 0], 1.0)?;
    u.add_cos(1, [0, 0, 1], 1.0)?;
    u.add_sin(2, [0, 1, 0], 1.0)?;
    u.add_cos(2, [1, 0, 0], 1.0)?;
    Ok(u)
}

/// Divergence-free random field with `‖u‖_{L²} = amp`.
pub fn random_solenoidal(grid: TorusGrid, kmax: f64, amp: f64, rng: &mut ChaCha8Rng) -> Res<SpectralField> {
    let u = leray_project(&SpectralField::random(grid, 3, kmax, 2.0, rng))?;
    let n = l2_norm(&u);
    if n == 0.0 {
        return Err(LabError::Core(CoreError::Capacity(format!(
            "no modes with |k| <= {kmax} on this grid"
        ))));
    }
    Ok(u.scaled(amp / n))
}

fn example_spec(cfg: &ResolvedConfig, n: usize, amp: f64) -> Res<ExampleSpec> {
    let grid = example_grid(n, cfg.usize("h_res")?, cfg.usize("n3")?)?;
    let mut rng = generator(cfg)?;
    Ok(ExampleSpec::random(n, cfg.usize("N0")?, amp, grid, &mut rng)?)
}

fn load_or_random(cfg: &ResolvedConfig) -> Res<SpectralField> {
    if let Some(path) = cfg.opt_str("input") {
        return crate::cgns::read(std::path::Path::new(path));
    }
    let dim = cfg.usize("dim")?;
    if !(2..=3).contains(&dim) {
        return Err(LabError::Config(format!("`dim` must be 2 or 3, got {dim}")));
    }
    let grid = TorusGrid::cube(dim, cfg.usize("resolution")?)?;
    let mut rng = generator(cfg)?;
    Ok(SpectralField::random(grid, 3, cfg.f64("kmax")?, 1.0, &mut rng))
}

fn field_summary(u: &SpectralField) -> Res<Value> {
    let g = u.grid();
    Ok(json!({
        "shape": g.shape(),
        "strides": g.strides(),
        "components": u.ncomp(),
        "l2": jnum(l2_norm(u)),
        "h_half": jnum(hs_norm(u, 0.5)),
        "linf": jnum(linf_norm(u)),
        "divergence_ratio": jnum(u.divergence_ratio()?),
    }))
}

pub fn example(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let spec = example_spec(cfg, cfg.usize("N")?, cfg.f64("amp")?)?;
    let u0 = make_example(&spec)?;
    let file = cfg.str("out")?.to_string();
    out.write_snapshot(&file, &u0)?;
    out.write_json(
        "example.json",
        json!({
            "snapshot": file,
            "v0h_l2": jnum(spec.amplitude()),
            "u0": field_summary(&u0)?,
            "tilde_l2": jnum(l2_norm(&tilde_part(&u0)?)),
        }),
    )?;
    Ok(())
}

pub fn project(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let u = load_or_random(cfg)?;
    let p = leray_project(&u)?;
    let file = cfg.str("out")?.to_string();
    out.write_snapshot(&file, &p)?;
    let twice = leray_project(&p)?;
    out.write_json(
        "project.json",
        json!({
            "snapshot": file,
            "before": field_summary(&u)?,
            "after": field_summary(&p)?,
            "idempotence_defect": jnum(twice.sub(&p)?.max_amplitude()),
        }),
    )?;
    Ok(())
}

pub fn besov(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let u = load_or_random(cfg)?;
    let (s, p, q) = (cfg.f64("s")?, cfg.f64("p")?, cfg.f64("q")?);
    let method = cfg.str("method")?;
    let mut rows = Vec::new();
    let chi = ChiProfile::default();
    if method != "heat" {
        let v = besov_dyadic(&u, BesovParams::new(s, p, q)?, &chi)?;
        rows.push(vec!["besov_dyadic".into(), num(s), num(p), num(q), num(v), "0".into()]);
    }
    if method != "dyadic" {
        if !(s < 0.0) {
            return Err(LabError::Core(CoreError::Domain(format!(
                "the heat characterisation needs s < 0, got {s}"
            ))));
        }
        let quad = HeatQuadrature::for_grid(u.grid()).with_points(cfg.usize("points")?);
        let v = besov_heat(&u, -s, p, q, &quad)?;
        rows.push(vec!["besov_heat".into(), num(s), num(p), num(q), num(v), quad.n.to_string()]);
    }
    out.write_csv(
        "norms.csv",
        &["norm_name", "s", "p", "q", "value", "quadrature_points"],
        &rows,
    )?;
    if let Some(prefix) = cfg.opt_str("blocks_out") {
        let prefix = prefix.to_string();
        let lp = LPDecomposition::new(&u, &chi);
        for (i, b) in lp.blocks.iter().enumerate() {
            out.write_snapshot(&format!("{prefix}_j{}.cgns", lp.j_min + i as i32), b)?;
        }
    }
    Ok(())
}

fn solver_config(cfg: &ResolvedConfig) -> Res<SolverConfig> {
    match cfg.str("scheme")? {
        "ifrk4" => {}
        other => return Err(LabError::Config(format!("unknown scheme `{other}`"))),
    }
    let mut s = SolverConfig::new(cfg.f64("dt")?, cfg.f64("t_end")?)?
        .with_strides(cfg.usize("snapshot_stride")?, cfg.usize("diag_stride")?)
        .with_diagnostics(DiagnosticsLevel::Full);
    s.scheme = Scheme::IfRk4;
    s.p_blowup = cfg.f64("p_blowup")?;
    s.validate()?;
    Ok(s)
}

fn diagnostics_rows(d: &DiagnosticsSeries) -> Vec<Vec<String>> {
    let at = |v: &Vec<f64>, i: usize| v.get(i).map(|x| num(*x)).unwrap_or_default();
    (0..d.times.len())
        .map(|i| {
            vec![
                num(d.times[i]),
                at(&d.energy, i),
                at(&d.dissipation, i),
                at(&d.h_half, i),
                at(&d.h_three_half, i),
                at(&d.linf, i),
                at(&d.blowup_integral, i),
                at(&d.cum_linf_sq, i),
            ]
        })
        .collect()
}

const DIAG_HEADER: [&str; 8] = [
    "t",
    "energy",
    "dissipation",
    "h_half",
    "h_three_half",
    "linf",
    "blowup_integral",
    "cum_linf_sq",
];

fn write_solution(out: &mut Artifacts, sol: &Solution) -> Res<()> {
    out.write_csv("diagnostics.csv", &DIAG_HEADER, &diagnostics_rows(&sol.diagnostics))?;
    let traj = &sol.trajectory;
    let mut index = Vec::new();
    for (i, (t, s)) in traj.times().iter().zip(traj.samples()).enumerate() {
        let name = format!("snap_{i:05}.cgns");
        out.write_snapshot(&name, s)?;
        index.push(vec![i.to_string(), num(*t), name]);
    }
    out.write_csv("snapshots.csv", &["index", "t", "file"], &index)?;
    out.write_json(
        "summary.json",
        json!({
            "final_time": jnum(*traj.times().last().unwrap_or(&0.0)),
            "final": field_summary(sol.final_state())?,
            "cfl_max": jnum(sol.diagnostics.cfl_max),
            "warnings": sol.diagnostics.warnings,
        }),
    )?;
    Ok(())
}

/// Writes the blow-up report and passes the error on.
fn on_blowup(out: &mut Artifacts, e: CoreError) -> LabError {
    if let CoreError::BlowUp { time, last_state } = e.root() {
        let state = (**last_state).clone();
        let time = *time;
        let _ = out.write_snapshot("blowup_last_state.cgns", &state);
        let _ = out.write_json(
            "blowup.json",
            json!({
                "time": jnum(time),
                "last_state": "blowup_last_state.cgns",
                "last_state_l2": jnum(l2_norm(&state)),
            }),
        );
    }
    LabError::Core(e)
}

pub fn simulate2d(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let res = cfg.usize("resolution")?;
    let amp = cfg.f64("amp")?;
    let v0 = match cfg.str("init")? {
        "taylor-green" => taylor_green(res)?.scaled(amp),
        "random" => random_solenoidal(TorusGrid::cube(2, res)?, cfg.f64("kmax")?, amp, &mut generator(cfg)?)?,
        _ => {
            let path = cfg
                .opt_str("input")
                .ok_or_else(|| LabError::Config("init = file needs `input`".into()))?;
            crate::cgns::read(std::path::Path::new(path))?
        }
    };
    let s = solver_config(cfg)?;
    let sol = solve_ns2d(&v0, None, &s).map_err(|e| on_blowup(out, e))?;
    write_solution(out, &sol)
}

pub fn simulate3d(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let res = cfg.usize("resolution")?;
    let amp = cfg.f64("amp")?;
    let u0 = match cfg.str("init")? {
        "abc" => abc(res)?.scaled(amp),
        "random" => random_solenoidal(TorusGrid::cube(3, res)?, cfg.f64("kmax")?, amp, &mut generator(cfg)?)?,
        "example" => make_example(&example_spec(cfg, cfg.usize("N")?, amp)?)?,
        _ => {
            let path = cfg
                .opt_str("input")
                .ok_or_else(|| LabError::Config("init = file needs `input`".into()))?;
            crate::cgns::read(std::path::Path::new(path))?
        }
    };
    let s = solver_config(cfg)?;
    let sol = solve_ns3d(&u0, &s).map_err(|e| on_blowup(out, e))?;
    write_solution(out, &sol)
}

fn sup_norm_series(tr: &TimeSampledField) -> Value {
    jlist(&tr.samples().iter().map(l2_norm).collect::<Vec<_>>())
}

pub fn pipeline(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let spec = example_spec(cfg, cfg.usize("N")?, cfg.f64("amp")?)?;
    let u0 = make_example(&spec)?;
    let solver = SolverConfig::new(cfg.f64("dt")?, cfg.f64("t_end")?)?
        .with_strides(cfg.usize("snapshot_stride")?, cfg.usize("snapshot_stride")?)
        .with_diagnostics(DiagnosticsLevel::Off);
    let mut pc = PipelineConfig::new(solver, cfg.f64("p")?)?;
    pc.lambdas = cfg.f64_list("lambdas")?;
    pc.coupling = match cfg.str("coupling")? {
        "sequential" => Coupling::Sequential,
        _ => Coupling::Lockstep,
    };
    pc.validate()?;
    let r = run_pipeline(&u0, &pc).map_err(|e| on_blowup(out, e))?;
    let times = r.r.times().to_vec();
    out.write_json(
        "pipeline.json",
        json!({
            "times": jlist(&times),
            "stage_l2": {
                "u_F": sup_norm_series(&r.u_f),
                "u_2D": sup_norm_series(&r.u_2d),
                "R": sup_norm_series(&r.r),
                "u": sup_norm_series(&r.u),
            },
            "reference_linf_sq": jlist(&r.weight),
            "reference_linf_sq_integral": jlist(&r.weight_integral),
            "x_lambda": r.x_lambda.iter().map(|(l, v)| json!({"lambda": jnum(*l), "norm": jnum(*v)})).collect::<Vec<_>>(),
            "contraction_ratios": Vec::<f64>::new(),
            "caveats": r.caveats,
        }),
    )?;
    match cfg.str("snapshots")? {
        "none" => {}
        which => {
            let n = times.len();
            let range = if which == "final" { n - 1..n } else { 0..n };
            for i in range {
                for (name, tr) in [("u_F", &r.u_f), ("u_2D", &r.u_2d), ("R", &r.r)] {
                    out.write_snapshot(&format!("{name}_{i:05}.cgns"), &tr.samples()[i])?;
                }
            }
        }
    }
    Ok(())
}

pub fn picard(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let res = cfg.usize("resolution")?;
    let g = TorusGrid::cube(3, res)?;
    let a = abc(res)?.scaled(cfg.f64("reference_amp")?);
    let reference = TimeSampledField::exact(g, 3, Arc::new(move |t| Ok(a.scaled((-t).exp()))), vec![])?;
    let r0 = random_solenoidal(g, cfg.f64("kmax")?, cfg.f64("amp")?, &mut generator(cfg)?)?;
    let nodes = cfg.usize("nodes")?;
    let t_end = cfg.f64("t_end")?;
    if nodes == 0 || !(t_end > 0.0) {
        return Err(LabError::Config("`nodes` and `t_end` must be positive".into()));
    }
    let times: Vec<f64> = (0..=nodes).map(|i| t_end * i as f64 / nodes as f64).collect();
    let mut pc = PicardConfig::new(cfg.f64("lambda")?, cfg.usize("max_iters")?);
    pc.p = cfg.f64("p")?;
    pc.tol = cfg.f64("tol")?;
    let rep = picard_pns(&r0, &reference, None, &times, &pc)?;
    let distance = match cfg.values.get("compare_dt") {
        Some(_) => {
            let s = SolverConfig::new(cfg.f64("compare_dt")?, t_end)?
                .with_strides(1, usize::MAX / 2)
                .with_diagnostics(DiagnosticsLevel::Off);
            let sol = solve_pns(&r0, &reference, None, &s).map_err(|e| on_blowup(out, e))?;
            jnum(sup_l2_distance(&rep.solution, &sol.trajectory)?)
        }
        None => Value::Null,
    };
    out.write_json(
        "picard.json",
        json!({
            "r0_norm": jnum(rep.r0_norm),
            "increments": jlist(&rep.increments),
            "contraction_ratios": jlist(&rep.ratios),
            "converged": rep.converged,
            "non_contraction": rep.non_contraction,
            "iterations": rep.iterations,
            "distance_to_time_stepped": distance,
        }),
    )?;
    Ok(())
}

fn report_settings(cfg: &ResolvedConfig) -> Res<ReportSettings> {
    let time = DecayQuadrature {
        horizon: 30.0,
        intervals: cfg.usize("intervals")?,
    };
    time.validate()?;
    Ok(ReportSettings {
        h1: time,
        h3: H3Settings {
            time,
            heat_points: cfg.usize("heat_points")?,
            substeps: 2,
            parts: true,
        },
        heat_points: HeatQuadrature::DEFAULT_POINTS,
    })
}

fn report_json(r: &HypothesisReport) -> Value {
    json!({
        "N": r.n,
        "N0": r.n0,
        "amplitude": jnum(r.amplitude),
        "p": jnum(r.p),
        "h1": jnum(r.h1_value),
        "h2": jnum(r.h2_value),
        "h3": jnum(r.h3_value),
        "h3_oscillating_part": jnum(r.h3_oscillating),
        "h3_q_part": jnum(r.h3_q_part),
        "A": jnum(r.a),
        "B": jnum(r.b),
        "log_ratio": r.log_ratio.iter().map(|(c, v)| json!({"C0": jnum(*c), "log_rho": jnum(*v)})).collect::<Vec<_>>(),
        "predicted_A_trend": jnum(r.predicted_a_trend),
        "predicted_B_trend": jnum(r.predicted_b_trend),
        "lower_bound": {"lhs": jnum(r.lower_bound_lhs), "rhs": jnum(r.lower_bound_rhs)},
        "h1_third_component_max": jnum(r.h1_third_component_max),
        "u2d_third_component_max": jnum(r.u2d_third_max),
        "caveats": r.caveats,
    })
}

const SCAN_HEADER: [&str; 10] = [
    "N", "amplitude", "h1", "h2", "h2_over_amp", "h3", "h3_oscillating", "h3_q", "A", "B",
];

fn scan_rows(t: &ScanTable) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|row| {
            let r = &row.report;
            vec![
                row.n.to_string(),
                num(r.amplitude),
                num(r.h1_value),
                num(r.h2_value),
                num(r.h2_value / r.amplitude),
                num(r.h3_value),
                num(r.h3_oscillating),
                num(r.h3_q_part),
                num(r.a),
                num(r.b),
            ]
        })
        .collect();
    rows.push(vec![
        "slope".into(),
        String::new(),
        num(t.slope_h1),
        String::new(),
        num(t.slope_h2_over_amp),
        num(t.slope_h3),
        num(t.slope_h3_oscillating),
        num(t.slope_h3_q),
        String::new(),
        String::new(),
    ]);
    rows
}

pub fn conditions(cfg: &ResolvedConfig, out: &mut Artifacts) -> Res<()> {
    let ns = cfg.usize_list("N")?;
    let p = cfg.f64("p")?;
    let settings = report_settings(cfg)?;
    let amp = cfg.f64("amp")?;
    let law = cfg.str("amp_law")?.to_string();
    let amp_of = move |n: usize| {
        if law == "log19" {
            (n as f64).ln().powf(1.0 / 9.0)
        } else {
            amp
        }
    };
    match cfg.str("mode")? {
        "check" => {
            let [n] = ns[..] else {
                return Err(LabError::Config("`conditions check` takes a single N".into()));
            };
            let spec = example_spec(cfg, n, amp_of(n))?;
            let r = smallness_report(&spec, p, &settings)?;
            out.write_json("report.json", report_json(&r))?;
        }
        _ => {
            if ns.len() < 2 {
                return Err(LabError::Config("a scan needs at least two values of N".into()));
            }
            let template = example_spec(cfg, ns[0], amp_of(ns[0]))?;
            let (h_res, n3) = (cfg.usize("h_res")?, cfg.usize("n3")?);
            let grid_for = move |n: usize| example_grid(n, h_res, n3);
            let t = scaling_study(&template, &ns, p, &grid_for, Some(&amp_of), &settings)?;
            out.write_csv("scan.csv", &SCAN_HEADER, &scan_rows(&t))?;
            out.write_json(
                "scan.json",
                json!({
                    "reports": t.rows.iter().map(|r| report_json(&r.report)).collect::<Vec<_>>(),
                    "slopes": {
                        "h1": jnum(t.slope_h1),
                        "h2_over_amp": jnum(t.slope_h2_over_amp),
                        "h3": jnum(t.slope_h3),
                        "h3_oscillating": jnum(t.slope_h3_oscillating),
                        "h3_q": jnum(t.slope_h3_q),
                        "lower_bound_lhs": jnum(t.slope_lower_bound_lhs),
                    },
                }),
            )?;
        }
    }
    Ok(())
}
