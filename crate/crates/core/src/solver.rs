//! Integrating-factor RK4 for NS, the three-component 2D system and the
//! perturbed system around a reference flow.
//!
//! With `L = Δ` treated exactly and `E = e^{L dt/2}`, one step of the Lawson
//! scheme reads
//!
//! ```text
//! k1 = N(u_n, t)
//! k2 = N(E(u_n + dt/2 k1), t + dt/2)
//! k3 = N(E u_n + dt/2 k2, t + dt/2)
//! k4 = N(E² u_n + dt E k3, t + dt)
//! u_{n+1} = E² u_n + dt/6 (E² k1 + 2E(k2 + k3) + k4)
//! ```
//!
//! after which the state is re-projected and its mean removed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lp::{besov_dyadic, BesovParams, ChiProfile};
use crate::norms::{hs_norm, l2_norm, linf_norm};
use crate::ops::{
    dealiased_physical, flux_divergence, heat_symbol, leray_project_in_place, projected_self_flux,
    HeatAxes,
};
use crate::sum::pairwise_sum;
use crate::trajectory::TimeSampledField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Lawson integrating-factor Runge-Kutta 4.
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticsLevel {
    Off,
    /// Energy, dissipation and Sobolev norms only.
    Spectral,
    /// Adds `L^∞`, the blow-up integral and the CFL report.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Keep a trajectory sample every this many steps (plus step 0, powers of
    /// two and the last step).
    pub snapshot_stride: usize,
    /// Same rule for diagnostics records.
    pub diag_stride: usize,
    pub cfl_limit: f64,
    /// `p` of the blow-up monitor `∫ ‖u‖⁴_{B^{-1/2+3/p}_{p,∞}}`.
    pub p_blowup: f64,
    pub diagnostics: DiagnosticsLevel,
}

impl SolverConfig {
    pub const DEFAULT_P_BLOWUP: f64 = 8.0;

    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            scheme: Scheme::IfRk4,
            snapshot_stride: 10,
            diag_stride: 10,
            cfl_limit: 1.0,
            p_blowup: Self::DEFAULT_P_BLOWUP,
            diagnostics: DiagnosticsLevel::Full,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_strides(mut self, snapshot: usize, diag: usize) -> Self {
        self.snapshot_stride = snapshot;
        self.diag_stride = diag;
        self
    }

    pub fn with_diagnostics(mut self, level: DiagnosticsLevel) -> Self {
        self.diagnostics = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 || self.diag_stride == 0 {
            return Err(Error::Domain("strides must be at least 1".into()));
        }
        if !(self.p_blowup >= 1.0) {
            return Err(Error::Domain(format!("p_blowup must be >= 1, got {}", self.p_blowup)));
        }
        if !(self.cfl_limit > 0.0) {
            return Err(Error::Domain("cfl_limit must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shortened so they tile `[0, t_end]`.
    pub fn n_steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let n = libm::round(r);
        if (r - n).abs() <= 1e-9 * r.max(1.0) {
            (n as usize).max(1)
        } else {
            libm::ceil(r) as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    pub fn time_of(&self, step: usize) -> f64 {
        if step == self.n_steps() {
            self.t_end
        } else {
            step as f64 * self.effective_dt()
        }
    }
}

/// Recording rule shared by snapshots and diagnostics.
pub fn is_recorded(step: usize, stride: usize, n_steps: usize) -> bool {
    step == 0 || step == n_steps || step.is_power_of_two() || step % stride == 0
}

/// Position of an RHS evaluation within the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub step: usize,
    /// 0..4 in the order k1, k2, k3, k4.
    pub index: usize,
    pub t: f64,
}

/// Non-stiff part `N(u, t)` of `∂_t u = Δu + N(u, t)`.
pub trait Rhs {
    fn eval(&mut self, u: &SpectralField, at: Stage) -> Result<SpectralField>;

    /// `‖u⁽⁰⁾(t)‖²_{L^∞}` of a reference flow, if the system has one.
    fn reference_linf_sq(&mut self, _t: f64) -> Result<Option<f64>> {
        Ok(None)
    }
}

fn add_forcing(out: &mut SpectralField, f: Option<&TimeSampledField>, t: f64) -> Result<()> {
    if let Some(f) = f {
        out.axpy(1.0, &f.at(t)?)?;
    }
    Ok(())
}

/// `-P div(u ⊗ u)`; on T² with three components this is the 2D system.
#[derive(Debug, Clone, Copy, Default)]
pub struct NsRhs<'a> {
    pub forcing: Option<&'a TimeSampledField>,
}

impl Rhs for NsRhs<'_> {
    fn eval(&mut self, u: &SpectralField, at: Stage) -> Result<SpectralField> {
        let mut out = projected_self_flux(u)?;
        out.scale(-1.0);
        add_forcing(&mut out, self.forcing, at.t)?;
        Ok(out)
    }
}

/// `-P div(R ⊗ R + u⁽⁰⁾ ⊗ R + R ⊗ u⁽⁰⁾)` for a given reference flow.
pub fn pns_nonlinearity(r: &SpectralField, u0: &SpectralField) -> Result<SpectralField> {
    r.ensure_compatible(u0)?;
    let pr = dealiased_physical(r);
    let pu = dealiased_physical(u0);
    let n = pr.len();
    let mut out = flux_divergence(*r.grid(), r.ncomp(), |j, i| {
        (0..n)
            .map(|x| {
                let (rj, ri) = (pr.comps[j][x], pr.comps[i][x]);
                rj * ri + pu.comps[j][x] * ri + rj * pu.comps[i][x]
            })
            .collect()
    });
    leray_project_in_place(&mut out)?;
    out.scale(-1.0);
    Ok(out)
}

/// Perturbed system around `u⁽⁰⁾` with forcing `F`.
#[derive(Debug, Clone, Copy)]
pub struct PnsRhs<'a> {
    pub reference: &'a TimeSampledField,
    pub forcing: Option<&'a TimeSampledField>,
}

impl Rhs for PnsRhs<'_> {
    fn eval(&mut self, r: &SpectralField, at: Stage) -> Result<SpectralField> {
        let u0 = self.reference.at(at.t)?;
        let mut out = pns_nonlinearity(r, &u0)?;
        add_forcing(&mut out, self.forcing, at.t)?;
        Ok(out)
    }

    fn reference_linf_sq(&mut self, t: f64) -> Result<Option<f64>> {
        let v = linf_norm(&self.reference.at(t)?);
        Ok(Some(v * v))
    }
}

/// Precomputed heat factors for one step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    dt: f64,
    half: Vec<f64>,
    full: Vec<f64>,
}

/// Result of one step with the four stage inputs it evaluated the RHS at.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub next: SpectralField,
    pub stages: [SpectralField; 4],
}

impl Stepper {
    pub fn new(grid: &crate::grid::TorusGrid, dt: f64) -> Self {
        Self {
            dt,
            half: heat_symbol(grid, 0.5 * dt, HeatAxes::All),
            full: heat_symbol(grid, dt, HeatAxes::All),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step from `(u, t)`; `step` only labels the stages.
    pub fn step<R: Rhs + ?Sized>(
        &self,
        rhs: &mut R,
        u: &SpectralField,
        t: f64,
        step: usize,
    ) -> Result<StepOutput> {
        let dt = self.dt;
        let stage = |index: usize, t: f64| Stage { step, index, t };
        let mul = |f: &SpectralField, m: &[f64]| {
            let mut g = f.clone();
            g.apply_multiplier(m);
            g
        };

        let k1 = rhs.eval(u, stage(0, t))?;

        let mut ua = u.clone();
        ua.axpy(0.5 * dt, &k1)?;
        ua.apply_multiplier(&self.half);
        let k2 = rhs.eval(&ua, stage(1, t + 0.5 * dt))?;

        let eu = mul(u, &self.half);
        let mut ub = eu.clone();
        ub.axpy(0.5 * dt, &k2)?;
        let k3 = rhs.eval(&ub, stage(2, t + 0.5 * dt))?;

        let e2u = mul(u, &self.full);
        let mut uc = e2u.clone();
        uc.axpy(dt, &mul(&k3, &self.half))?;
        let k4 = rhs.eval(&uc, stage(3, t + dt))?;

        let mut mid = k2;
        mid.axpy(1.0, &k3)?;
        mid.apply_multiplier(&self.half);
        let mut next = e2u;
        next.axpy(dt / 6.0, &mul(&k1, &self.full))?;
        next.axpy(dt / 3.0, &mid)?;
        next.axpy(dt / 6.0, &k4)?;

        leray_project_in_place(&mut next)?;
        next.remove_mean();
        if !next.is_finite() {
            return Err(Error::BlowUp {
                time: t,
                last_state: alloc::boxed::Box::new(u.clone()),
            });
        }
        Ok(StepOutput {
            next,
            stages: [u.clone(), ua, ub, uc],
        })
    }
}

/// `step` with a fresh stepper (convenience; loops should reuse a [`Stepper`]).
pub fn step<R: Rhs + ?Sized>(
    u: &SpectralField,
    t: f64,
    cfg: &SolverConfig,
    rhs: &mut R,
) -> Result<SpectralField> {
    cfg.validate()?;
    Ok(Stepper::new(u.grid(), cfg.dt).step(rhs, u, t, 0)?.next)
}

/// Per-record scalars of a run. Cumulative integrals use the trapezoid rule
/// on the recorded times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    /// `‖u‖²_{L²}`.
    pub energy: Vec<f64>,
    /// `‖∇u‖²_{L²}`.
    pub dissipation: Vec<f64>,
    pub h_half: Vec<f64>,
    pub h_three_half: Vec<f64>,
    pub linf: Vec<f64>,
    /// `‖u‖⁴_{B^{-1/2+3/p}_{p,∞}}` at each record.
    pub besov_fourth: Vec<f64>,
    /// `∫₀^t ‖u‖⁴_{B^{-1/2+3/p}_{p,∞}}`.
    pub blowup_integral: Vec<f64>,
    /// `∫₀^t ‖u‖²_{L^∞}`.
    pub cum_linf_sq: Vec<f64>,
    /// `‖u⁽⁰⁾(t)‖²_{L^∞}` for the perturbed system, empty otherwise.
    pub reference_linf_sq: Vec<f64>,
    pub cum_reference_linf_sq: Vec<f64>,
    /// Largest `dt·‖u‖_{L^∞}·k_max` seen.
    pub cfl_max: f64,
    pub warnings: Vec<String>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push_cumulative(series: &mut Vec<f64>, times: &[f64], values: &[f64]) {
        let i = values.len() - 1;
        let prev = series.last().copied().unwrap_or(0.0);
        let inc = if i == 0 {
            0.0
        } else {
            0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1])
        };
        series.push(prev + inc);
    }

    fn record<R: Rhs + ?Sized>(
        &mut self,
        u: &SpectralField,
        t: f64,
        cfg: &SolverConfig,
        rhs: &mut R,
    ) -> Result<()> {
        self.times.push(t);
        let e = l2_norm(u);
        self.energy.push(e * e);
        let d = hs_norm(u, 1.0);
        self.dissipation.push(d * d);
        self.h_half.push(hs_norm(u, 0.5));
        self.h_three_half.push(hs_norm(u, 1.5));
        if cfg.diagnostics == DiagnosticsLevel::Full {
            let li = linf_norm(u);
            self.linf.push(li);
            let p = cfg.p_blowup;
            let b = besov_dyadic(
                u,
                BesovParams::new(-0.5 + 3.0 / p, p, f64::INFINITY)?,
                &ChiProfile::default(),
            )?;
            self.besov_fourth.push(b.powi(4));
            let sq: Vec<f64> = self.linf.iter().map(|x| x * x).collect();
            Self::push_cumulative(&mut self.blowup_integral, &self.times, &self.besov_fourth);
            Self::push_cumulative(&mut self.cum_linf_sq, &self.times, &sq);
            let cfl = cfg.effective_dt() * li * u.grid().max_wavenumber();
            if cfl > self.cfl_max {
                self.cfl_max = cfl;
                if cfl > cfg.cfl_limit && !self.warnings.iter().any(|w| w.starts_with("cfl")) {
                    self.warnings.push(format!(
                        "cfl number {cfl:.3} exceeds advisory limit {} at t = {t}",
                        cfg.cfl_limit
                    ));
                }
            }
            if let Some(w) = rhs.reference_linf_sq(t)? {
                self.reference_linf_sq.push(w);
                Self::push_cumulative(
                    &mut self.cum_reference_linf_sq,
                    &self.times,
                    &self.reference_linf_sq,
                );
            }
        }
        Ok(())
    }

    /// Every entry finite and nonnegative, cumulative entries nondecreasing.
    pub fn is_consistent(&self) -> bool {
        let series = [
            &self.energy,
            &self.dissipation,
            &self.h_half,
            &self.h_three_half,
            &self.linf,
            &self.besov_fourth,
            &self.blowup_integral,
            &self.cum_linf_sq,
            &self.reference_linf_sq,
            &self.cum_reference_linf_sq,
        ];
        let ok = series
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite() && *x >= 0.0));
        let mono = [&self.blowup_integral, &self.cum_linf_sq, &self.cum_reference_linf_sq]
            .iter()
            .all(|s| s.windows(2).all(|w| w[1] >= w[0]));
        ok && mono
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: TimeSampledField,
    pub diagnostics: DiagnosticsSeries,
}

impl Solution {
    pub fn final_state(&self) -> &SpectralField {
        self.trajectory.samples().last().expect("at least the initial sample")
    }
}

/// Runs `rhs` from `u0` over `[0, t_end]`.
pub fn integrate<R: Rhs + ?Sized>(
    u0: &SpectralField,
    cfg: &SolverConfig,
    rhs: &mut R,
) -> Result<Solution> {
    cfg.validate()?;
    let n = cfg.n_steps();
    let stepper = Stepper::new(u0.grid(), cfg.effective_dt());
    let mut diag = DiagnosticsSeries::default();
    let mut times = Vec::new();
    let mut samples = Vec::new();
    let mut u = u0.clone();
    for k in 0..=n {
        let t = cfg.time_of(k);
        if is_recorded(k, cfg.snapshot_stride, n) {
            times.push(t);
            samples.push(u.clone());
        }
        if cfg.diagnostics != DiagnosticsLevel::Off && is_recorded(k, cfg.diag_stride, n) {
            diag.record(&u, t, cfg, rhs)?;
        }
        if k == n {
            break;
        }
        u = stepper.step(rhs, &u, t, k)?.next;
    }
    Ok(Solution {
        trajectory: TimeSampledField::sampled(times, samples)?,
        diagnostics: diag,
    })
}

fn ensure_initial(u: &SpectralField, what: &str) -> Result<()> {
    if !u.is_mean_free() {
        return Err(Error::Contract(format!("{what} must be mean-free")));
    }
    let h = match (u.grid().dim(), u.ncomp()) {
        (2, 3) => crate::ops::horizontal_components(u)?,
        _ => u.clone(),
    };
    if h.divergence_ratio()? > 1e-10 {
        return Err(Error::Contract(format!("{what} must be divergence-free")));
    }
    Ok(())
}

/// The three-component 2D system `∂_t v + P(v^h·∇^h v) - Δ_h v = f` on T².
pub fn solve_ns2d(
    v0: &SpectralField,
    forcing: Option<&TimeSampledField>,
    cfg: &SolverConfig,
) -> Result<Solution> {
    if v0.grid().dim() != 2 || v0.ncomp() != 3 {
        return Err(Error::Dimension("the 2D system needs a three-component field on T^2".into()));
    }
    ensure_initial(v0, "initial data")?;
    if let Some(f) = forcing {
        f.grid().ensure_same(v0.grid())?;
        if f.ncomp() != 3 {
            return Err(Error::Dimension("2D forcing needs three components".into()));
        }
        if !f.covers(cfg.t_end) {
            return Err(Error::TimeGrid("forcing does not cover [0, t_end]".into()));
        }
    }
    integrate(v0, cfg, &mut NsRhs { forcing })
}

/// Navier-Stokes on T³.
pub fn solve_ns3d(u0: &SpectralField, cfg: &SolverConfig) -> Result<Solution> {
    if u0.grid().dim() != 3 || u0.ncomp() != 3 {
        return Err(Error::Dimension("3D Navier-Stokes needs a three-component field on T^3".into()));
    }
    ensure_initial(u0, "initial data")?;
    integrate(u0, cfg, &mut NsRhs { forcing: None })
}

/// The perturbed system around `reference` with forcing `F`.
pub fn solve_pns(
    r0: &SpectralField,
    reference: &TimeSampledField,
    forcing: Option<&TimeSampledField>,
    cfg: &SolverConfig,
) -> Result<Solution> {
    ensure_initial(r0, "R0")?;
    reference.grid().ensure_same(r0.grid())?;
    if !reference.covers(cfg.t_end) {
        return Err(Error::TimeGrid("reference flow does not cover [0, t_end]".into()));
    }
    if let Some(f) = forcing {
        f.grid().ensure_same(r0.grid())?;
        if !f.covers(cfg.t_end) {
            return Err(Error::TimeGrid("forcing does not cover [0, t_end]".into()));
        }
    }
    integrate(r0, cfg, &mut PnsRhs { reference, forcing })
}

/// `E₀ = ‖v₀‖²_{L²} + (∫ ‖f(t)‖_{L²} dt)²`, trapezoid on the forcing samples.
pub fn e0_quantity(v0: &SpectralField, forcing: Option<&TimeSampledField>) -> Result<f64> {
    let e = l2_norm(v0);
    let Some(f) = forcing else {
        return Ok(e * e);
    };
    if f.is_empty() {
        return Err(Error::TimeGrid("E0 needs a sampled forcing".into()));
    }
    let norms: Vec<f64> = f.samples().iter().map(l2_norm).collect();
    let integral = crate::lp::trapezoid(f.times(), &norms);
    Ok(e * e + integral * integral)
}

/// Energy-balance residual `‖u(t)‖² + 2∫‖∇u‖² - ‖u₀‖² - 2∫⟨f,u⟩` at the last record,
/// with the caller supplying `⟨f,u⟩` per record (zero when unforced).
pub fn energy_balance_residual(diag: &DiagnosticsSeries, work: &[f64]) -> f64 {
    let n = diag.times.len();
    if n < 2 {
        return 0.0;
    }
    let parts: Vec<f64> = (1..n)
        .map(|i| {
            let h = diag.times[i] - diag.times[i - 1];
            let a = diag.dissipation[i] + diag.dissipation[i - 1];
            let w = work.get(i).copied().unwrap_or(0.0) + work.get(i - 1).copied().unwrap_or(0.0);
            h * (a - w)
        })
        .collect();
    diag.energy[n - 1] + pairwise_sum(&parts) - diag.energy[0]
}
