//! The split `u = u_F + u_2D + R` and a Duhamel/Picard solver for `R`.
//!
//! * `u_F(t) = S(t)ũ₀` is exact.
//! * `u_2D` solves the three-component 2D system with `f = -M P(u_F·∇u_F)`
//!   and data `ū₀`.
//! * `R` solves the perturbed system around `u⁽⁰⁾ = u_F + u_2D` with `R₀ = 0`
//!   and `F = -(Id - M)P(u_F·∇u_F) - Q(u_F, u_2D)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::lp::{linf_sq_series, BlockNormTable, ChiProfile};
use crate::norms::{l2_norm, linf_norm};
use crate::ops::{
    apply_heat, embed, heat_symbol, horizontal_mean, projected_self_flux, q_form, tilde_part,
    HeatAxes,
};
use crate::solver::{
    is_recorded, pns_nonlinearity, solve_ns2d, solve_pns, DiagnosticsSeries, NsRhs, Rhs,
    SolverConfig, Stage, Stepper,
};
use crate::trajectory::TimeSampledField;

/// `u_F(t) = S(t) ũ₀` as an exact-closure trajectory.
pub fn build_u_f(u0: &SpectralField) -> Result<TimeSampledField> {
    let tilde = tilde_part(u0)?;
    let grid = *u0.grid();
    TimeSampledField::exact(
        grid,
        u0.ncomp(),
        Arc::new(move |t| apply_heat(&tilde, t)),
        Vec::new(),
    )
}

/// `P div(u_F ⊗ u_F)` split into `(M·, (Id - M)·)`: the mean as a T² field.
pub fn split_self_flux(uf: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let full = projected_self_flux(uf)?;
    Ok((horizontal_mean(&full)?, tilde_part(&full)?))
}

/// `f = -M P(u_F·∇u_F)` at one time.
pub fn forcing_2d(uf: &SpectralField) -> Result<SpectralField> {
    let mut f = horizontal_mean(&projected_self_flux(uf)?)?;
    f.scale(-1.0);
    Ok(f)
}

/// `F = -(Id - M)P(u_F·∇u_F) - Q(u_F, u_2D)` at one time, `u_2D` embedded.
pub fn pns_forcing(uf: &SpectralField, u2d: &SpectralField) -> Result<SpectralField> {
    let mut f = tilde_part(&projected_self_flux(uf)?)?;
    f.axpy(1.0, &q_form(uf, u2d)?)?;
    f.scale(-1.0);
    Ok(f)
}

/// `f(t) = -M P(u_F·∇u_F)(t)`; exact closure when `u_F` is.
pub fn build_f2d(u_f: &TimeSampledField) -> Result<TimeSampledField> {
    let grid2 = u_f.grid().horizontal()?;
    let ncomp = u_f.ncomp();
    match u_f.closure() {
        Some(c) => {
            let c = c.clone();
            TimeSampledField::exact(
                grid2,
                ncomp,
                Arc::new(move |t| forcing_2d(&c(t)?)),
                u_f.times().to_vec(),
            )
        }
        None => {
            let samples = u_f.samples().iter().map(forcing_2d).collect::<Result<Vec<_>>>()?;
            TimeSampledField::sampled(u_f.times().to_vec(), samples)
        }
    }
}

/// How the 2D and perturbed systems are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// One NS2D step, then one PNS step fed with the NS2D stage states.
    Lockstep,
    /// NS2D solved over the whole horizon first, then PNS with `u_2D`
    /// interpolated in time.
    Sequential,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    /// Besov index of the `X_λ` norms; `p > 6`.
    pub p: f64,
    pub lambdas: Vec<f64>,
    pub coupling: Coupling,
}

impl PipelineConfig {
    pub fn new(solver: SolverConfig, p: f64) -> Result<Self> {
        let cfg = Self {
            solver,
            p,
            lambdas: vec![1.0, 10.0, 100.0],
            coupling: Coupling::Lockstep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.p > 6.0) {
            return Err(Error::Domain(format!(
                "the pipeline needs p in (6, inf), got {}",
                self.p
            )));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Domain("lambda ladder entries must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub u_f: TimeSampledField,
    /// `u_2D` on T².
    pub u_2d_plane: TimeSampledField,
    /// `u_2D` embedded in T³.
    pub u_2d: TimeSampledField,
    pub r: TimeSampledField,
    /// `u_F + u_2D + R` at every sample time.
    pub u: TimeSampledField,
    /// `‖u⁽⁰⁾(t)‖²_{L^∞}` on the sample times.
    pub weight: Vec<f64>,
    /// `∫₀^t ‖u⁽⁰⁾‖²_{L^∞}` on the sample times.
    pub weight_integral: Vec<f64>,
    /// `(λ, ‖R‖_{X_λ})`.
    pub x_lambda: Vec<(f64, f64)>,
    pub diagnostics_2d: DiagnosticsSeries,
    pub diagnostics_r: DiagnosticsSeries,
    pub caveats: Vec<String>,
}

/// PNS right-hand side whose reference flow comes from NS2D stage states.
struct StagedPns<'a> {
    u_f: &'a TimeSampledField,
    grid3: TorusGrid,
    stages: Option<[SpectralField; 4]>,
}

impl Rhs for StagedPns<'_> {
    fn eval(&mut self, r: &SpectralField, at: Stage) -> Result<SpectralField> {
        let stages = self
            .stages
            .as_ref()
            .ok_or_else(|| Error::Contract("NS2D stages not provided".into()))?;
        let uf = self.u_f.at(at.t)?;
        let u2d = embed(&stages[at.index], &self.grid3)?;
        let mut u0 = uf.clone();
        u0.axpy(1.0, &u2d)?;
        let mut out = pns_nonlinearity(r, &u0)?;
        out.axpy(1.0, &pns_forcing(&uf, &u2d)?)?;
        Ok(out)
    }
}

/// Sample-wise `u_F(t_i)` on the given times.
fn sample(traj: &TimeSampledField, times: &[f64]) -> Result<TimeSampledField> {
    let s = times.iter().map(|&t| traj.at(t)).collect::<Result<Vec<_>>>()?;
    TimeSampledField::sampled(times.to_vec(), s)
}

fn embed_traj(v: &TimeSampledField, grid3: &TorusGrid) -> Result<TimeSampledField> {
    let s = v.samples().iter().map(|x| embed(x, grid3)).collect::<Result<Vec<_>>>()?;
    TimeSampledField::sampled(v.times().to_vec(), s)
}

/// Runs the decomposition from `u0` and reconstructs `u`.
pub fn run_pipeline(u0: &SpectralField, cfg: &PipelineConfig) -> Result<PipelineResult> {
    cfg.validate()?;
    let grid3 = *u0.grid();
    if grid3.dim() != 3 || u0.ncomp() != 3 {
        return Err(Error::Dimension("the pipeline needs a three-component field on T^3".into()));
    }
    if !u0.is_mean_free() || u0.divergence_ratio()? > 1e-10 {
        return Err(Error::Contract("u0 must be mean-free and divergence-free".into()));
    }
    let u_f = build_u_f(u0).map_err(|e| e.in_stage("u_F"))?;
    let f = build_f2d(&u_f).map_err(|e| e.in_stage("f"))?;
    let v0 = horizontal_mean(u0)?;
    let scfg = cfg.solver;
    let mut caveats = Vec::new();

    let (u_2d_plane, r, diag2, diag_r) = match cfg.coupling {
        Coupling::Lockstep => {
            let n = scfg.n_steps();
            let st2 = Stepper::new(v0.grid(), scfg.effective_dt());
            let st3 = Stepper::new(&grid3, scfg.effective_dt());
            let mut rhs2 = NsRhs { forcing: Some(&f) };
            let mut rhs3 = StagedPns {
                u_f: &u_f,
                grid3,
                stages: None,
            };
            let mut v = v0.clone();
            let mut r = SpectralField::zeros(grid3, 3);
            let (mut times, mut vs, mut rs) = (Vec::new(), Vec::new(), Vec::new());
            for k in 0..=n {
                let t = scfg.time_of(k);
                if is_recorded(k, scfg.snapshot_stride, n) {
                    times.push(t);
                    vs.push(v.clone());
                    rs.push(r.clone());
                }
                if k == n {
                    break;
                }
                let out2 = st2.step(&mut rhs2, &v, t, k).map_err(|e| e.in_stage("u_2D"))?;
                rhs3.stages = Some(out2.stages);
                r = st3.step(&mut rhs3, &r, t, k).map_err(|e| e.in_stage("R"))?.next;
                v = out2.next;
            }
            (
                TimeSampledField::sampled(times.clone(), vs)?,
                TimeSampledField::sampled(times, rs)?,
                DiagnosticsSeries::default(),
                DiagnosticsSeries::default(),
            )
        }
        Coupling::Sequential => {
            let dense = scfg.with_strides(1, scfg.diag_stride);
            let sol2 = solve_ns2d(&v0, Some(&f), &dense).map_err(|e| e.in_stage("u_2D"))?;
            let v_traj = sol2.trajectory.clone();
            let (uf_c, v_c) = (u_f.clone(), v_traj.clone());
            let reference = TimeSampledField::exact(
                grid3,
                3,
                Arc::new(move |t| {
                    let mut a = uf_c.at(t)?;
                    a.axpy(1.0, &embed(&v_c.at(t)?, &grid3)?)?;
                    Ok(a)
                }),
                Vec::new(),
            )?;
            let (uf_c, v_c) = (u_f.clone(), v_traj.clone());
            let forcing = TimeSampledField::exact(
                grid3,
                3,
                Arc::new(move |t| pns_forcing(&uf_c.at(t)?, &embed(&v_c.at(t)?, &grid3)?)),
                Vec::new(),
            )?;
            caveats.push("u_2D enters R through piecewise-linear interpolation".into());
            let sol_r = solve_pns(&SpectralField::zeros(grid3, 3), &reference, Some(&forcing), &scfg)
                .map_err(|e| e.in_stage("R"))?;
            let times = sol_r.trajectory.times().to_vec();
            (
                sample(&v_traj, &times)?,
                sol_r.trajectory,
                sol2.diagnostics,
                sol_r.diagnostics,
            )
        }
    };

    let times = r.times().to_vec();
    let u_f_s = sample(&u_f, &times)?;
    let u_2d = embed_traj(&u_2d_plane, &grid3)?;
    let u = TimeSampledField::sum(&[&u_f_s, &u_2d, &r])?;
    let u0_traj = TimeSampledField::sum(&[&u_f_s, &u_2d])?;
    let weight = linf_sq_series(&u0_traj);
    let weight_integral = crate::lp::cumulative_trapezoid(&times, &weight);
    let table = BlockNormTable::new(&r, cfg.p, &ChiProfile::default())?;
    let x_lambda = cfg
        .lambdas
        .iter()
        .map(|&l| Ok((l, table.x_lambda(&weight, l)?)))
        .collect::<Result<Vec<_>>>()?;
    caveats.push(format!(
        "time integrals over R+ truncated at t_end = {}",
        scfg.t_end
    ));
    Ok(PipelineResult {
        u_f: u_f_s,
        u_2d_plane,
        u_2d,
        r,
        u,
        weight,
        weight_integral,
        x_lambda,
        diagnostics_2d: diag2,
        diagnostics_r: diag_r,
        caveats,
    })
}

/// Outcome of a Picard run.
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub times: Vec<f64>,
    /// Last iterate `R⁽ⁿ⁾` on the time nodes.
    pub solution: TimeSampledField,
    /// `‖R⁽ⁿ⁺¹⁾ - R⁽ⁿ⁾‖_{X_λ}` for each performed iteration.
    pub increments: Vec<f64>,
    /// `ρ_n = increments[n] / increments[n - 1]`.
    pub ratios: Vec<f64>,
    /// `‖ℛ₀‖_{X_λ}`, the size of the first iterate.
    pub r0_norm: f64,
    pub converged: bool,
    /// Three consecutive ratios above one, or a non-finite iterate.
    pub non_contraction: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub lambda: f64,
    pub p: f64,
    pub max_iters: usize,
    /// Stop once `increment ≤ tol · ‖R⁽ⁿ⁺¹⁾‖_{X_λ}`.
    pub tol: f64,
    /// Keep the bilinear term `B_NS`; off gives the affine map `ℛ₀ + L₀R`.
    pub bilinear: bool,
}

impl PicardConfig {
    pub const MAX_NODES: usize = 256;

    pub fn new(lambda: f64, max_iters: usize) -> Self {
        Self {
            lambda,
            p: 8.0,
            max_iters,
            tol: 1e-12,
            bilinear: true,
        }
    }
}

/// Trapezoid Duhamel integral `∫₀^{t_i} S(t_i - s) g(s) ds` on all nodes, with
/// the heat factor applied exactly.
pub fn duhamel(times: &[f64], g: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let grid = *g[0].grid();
    let mut out = Vec::with_capacity(times.len());
    let mut acc = SpectralField::zeros(grid, g[0].ncomp());
    out.push(acc.clone());
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        let e = heat_symbol(&grid, h, HeatAxes::All);
        let mut prev = g[i - 1].clone();
        prev.scale(0.5 * h);
        acc.axpy(1.0, &prev)?;
        acc.apply_multiplier(&e);
        acc.axpy(0.5 * h, &g[i])?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// One application of `R ↦ ℛ₀ + L₀R + B_NS(R, R)` on the nodes.
pub fn picard_map(
    times: &[f64],
    r0_free: &[SpectralField],
    forcing: &[SpectralField],
    reference: &[SpectralField],
    r: &[SpectralField],
    bilinear: bool,
) -> Result<Vec<SpectralField>> {
    let g = (0..times.len())
        .map(|i| {
            let mut gi = if bilinear {
                pns_nonlinearity(&r[i], &reference[i])?
            } else {
                let zero = SpectralField::zeros(*r[i].grid(), r[i].ncomp());
                let mut a = pns_nonlinearity(&r[i], &reference[i])?;
                a.axpy(-1.0, &pns_nonlinearity(&r[i], &zero)?)?;
                a
            };
            gi.axpy(1.0, &forcing[i])?;
            Ok(gi)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = duhamel(times, &g)?;
    for (o, free) in out.iter_mut().zip(r0_free) {
        o.axpy(1.0, free)?;
    }
    Ok(out)
}

fn x_norm(times: &[f64], s: &[SpectralField], weight: &[f64], cfg: &PicardConfig) -> Result<f64> {
    let traj = TimeSampledField::sampled(times.to_vec(), s.to_vec())?;
    BlockNormTable::new(&traj, cfg.p, &ChiProfile::default())?.x_lambda(weight, cfg.lambda)
}

/// Picard iteration for the perturbed system on the time nodes `times`.
pub fn picard_pns(
    r0: &SpectralField,
    reference: &TimeSampledField,
    forcing: Option<&TimeSampledField>,
    times: &[f64],
    cfg: &PicardConfig,
) -> Result<PicardReport> {
    if times.len() < 2 || times.len() > PicardConfig::MAX_NODES {
        return Err(Error::TimeGrid(format!(
            "Picard mode needs 2 to {} time nodes, got {}",
            PicardConfig::MAX_NODES,
            times.len()
        )));
    }
    if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::TimeGrid("Picard nodes must start at 0 and increase".into()));
    }
    if cfg.max_iters < 2 {
        return Err(Error::Domain("Picard needs at least 2 iterations".into()));
    }
    if !(cfg.lambda > 0.0) || !(cfg.p > 3.0) {
        return Err(Error::Domain("Picard needs lambda > 0 and p > 3".into()));
    }
    let grid = *r0.grid();
    reference.grid().ensure_same(&grid)?;
    let refs = times.iter().map(|&t| reference.at(t)).collect::<Result<Vec<_>>>()?;
    let fs = match forcing {
        Some(f) => times.iter().map(|&t| f.at(t)).collect::<Result<Vec<_>>>()?,
        None => vec![SpectralField::zeros(grid, r0.ncomp()); times.len()],
    };
    let free = times.iter().map(|&t| apply_heat(r0, t)).collect::<Result<Vec<_>>>()?;
    let weight: Vec<f64> = refs
        .iter()
        .map(|u| {
            let v = linf_norm(u);
            v * v
        })
        .collect();

    let zero = vec![SpectralField::zeros(grid, r0.ncomp()); times.len()];
    let mut current = picard_map(times, &free, &fs, &refs, &zero, cfg.bilinear)?;
    let r0_norm = x_norm(times, &current, &weight, cfg)?;
    let mut increments = vec![r0_norm];
    let mut ratios = Vec::new();
    let mut converged = r0_norm == 0.0;
    let mut non_contraction = false;
    let mut above = 0;
    let mut iterations = 1;
    while !converged && !non_contraction && iterations < cfg.max_iters {
        let next = picard_map(times, &free, &fs, &refs, &current, cfg.bilinear)?;
        iterations += 1;
        if next.iter().any(|s| !s.is_finite()) {
            non_contraction = true;
            break;
        }
        let diff: Vec<SpectralField> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        let inc = x_norm(times, &diff, &weight, cfg)?;
        let size = x_norm(times, &next, &weight, cfg)?;
        let prev = *increments.last().unwrap();
        let rho = inc / prev;
        ratios.push(rho);
        increments.push(inc);
        if !inc.is_finite() || !size.is_finite() {
            non_contraction = true;
        } else if rho > 1.0 {
            above += 1;
            if above >= 3 {
                non_contraction = true;
            }
        } else {
            above = 0;
        }
        current = next;
        if inc <= cfg.tol * size {
            converged = true;
        }
    }
    Ok(PicardReport {
        times: times.to_vec(),
        solution: TimeSampledField::sampled(times.to_vec(), current)?,
        increments,
        ratios,
        r0_norm,
        converged,
        non_contraction,
        iterations,
    })
}

/// `sup_i ‖a(t_i) - b(t_i)‖_{L²}` over the samples of `a`.
pub fn sup_l2_distance(a: &TimeSampledField, b: &TimeSampledField) -> Result<f64> {
    let mut worst = 0.0f64;
    for (t, s) in a.times().iter().zip(a.samples()) {
        worst = worst.max(l2_norm(&s.sub(&b.at(*t)?)?));
    }
    Ok(worst)
}
