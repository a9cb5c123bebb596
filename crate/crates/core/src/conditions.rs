//! The oscillating large-data example and its hypothesis report.
//!
//! For a divergence-free `v₀ʰ` on T² with `Supp v̂₀ʰ ⊂ [-N₀, N₀]²`,
//!
//! ```text
//! u₀(x) = (N v₀ʰ(x_h) cos(N x₃), -div_h v₀ʰ(x_h) sin(N x₃)).
//! ```
//!
//! The functionals are
//!
//! * `h1 = ‖ū₀‖_{L²} + ‖M P(u_F·∇u_F)‖_{L¹(R⁺; L²(T²))}`
//! * `h2 = ‖ũ₀‖_{B^{-1}_{∞,2}}`
//! * `h3 = ‖(Id - M)P(u_F·∇u_F) + Q(u_2D, u_F)‖_{L¹(R⁺; B^{-1+3/p}_{p,2})}`
//!
//! with time integrals over `[0, t_end]` (composite Simpson) plus an explicit
//! exponential tail estimate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;
use rand::Rng;

use crate::decomposition::{build_f2d, build_u_f};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::lp::{besov_heat, heat_aggregate, heat_profile, HeatQuadrature};
use crate::norms::l2_norm;
use crate::ops::{
    embed, horizontal_components, horizontal_mean, projected_self_flux, q_form, tilde_part,
};
use crate::solver::{solve_ns2d, DiagnosticsLevel, SolverConfig};
use crate::sum::{max_of, pairwise_sum};

/// Data of the example: `N`, `N₀`, `v₀ʰ` and the T³ grid it lives on.
#[derive(Debug, Clone)]
pub struct ExampleSpec {
    pub n: usize,
    pub n0: usize,
    /// Two-component divergence-free field on the horizontal grid.
    pub v0h: SpectralField,
    pub grid: TorusGrid,
}

/// 3D grid `h_res² × n3` whose vertical lattice is `N·Z` (stride `N`).
pub fn example_grid(n: usize, h_res: usize, n3: usize) -> Result<TorusGrid> {
    TorusGrid::cube(2, h_res)?.extend_vertical(n3, n)
}

impl ExampleSpec {
    pub fn new(n: usize, n0: usize, v0h: SpectralField, grid: TorusGrid) -> Result<Self> {
        let spec = Self { n, n0, v0h, grid };
        spec.validate()?;
        Ok(spec)
    }

    /// Random `v₀ʰ = ∇^⊥ψ` with `ψ̂` supported in `[-N₀, N₀]²`, rescaled to
    /// `‖v₀ʰ‖_{L²(T²)} = amplitude`.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        n0: usize,
        amplitude: f64,
        grid: TorusGrid,
        rng: &mut R,
    ) -> Result<Self> {
        let g2 = grid.horizontal()?;
        let v = random_v0h(&g2, n0, rng)?;
        Self::new(n, n0, rescaled(&v, amplitude), grid)
    }

    /// Same shape with `‖v₀ʰ‖_{L²} = amplitude` on another grid / frequency.
    pub fn with_n(&self, n: usize, grid: TorusGrid) -> Result<Self> {
        let g2 = grid.horizontal()?;
        g2.ensure_same(self.v0h.grid())?;
        Self::new(n, self.n0, self.v0h.clone(), grid)
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.n, self.n0, rescaled(&self.v0h, amplitude), self.grid)
    }

    pub fn amplitude(&self) -> f64 {
        l2_norm(&self.v0h)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.dim() != 3 {
            return Err(Error::Dimension("example grid must be 3D".into()));
        }
        g.horizontal()?.ensure_same(self.v0h.grid())?;
        if self.v0h.ncomp() != 2 {
            return Err(Error::Dimension("v0h must have two components".into()));
        }
        if self.n0 == 0 || self.n == 0 {
            return Err(Error::Domain("N and N0 must be positive".into()));
        }
        if self.n <= 2 * self.n0 {
            return Err(Error::Domain(format!(
                "need N > 2 N0 for spectral separation, got N = {}, N0 = {}",
                self.n, self.n0
            )));
        }
        // Support in [-N0, N0]^2.
        let g2 = *self.v0h.grid();
        let mut outside = false;
        for c in 0..2 {
            let comp = self.v0h.component(c);
            g2.for_each_mode(|f, k| {
                if (k[0].abs() > self.n0 as f64 || k[1].abs() > self.n0 as f64)
                    && comp[f].norm() > 0.0
                {
                    outside = true;
                }
            });
        }
        if outside {
            return Err(Error::Contract("v0h has modes outside [-N0, N0]^2".into()));
        }
        if self.v0h.divergence_ratio()? > 1e-12 {
            return Err(Error::Contract("v0h must be divergence-free".into()));
        }
        // Products must stay inside the dealiasing box.
        let hcut = g.dealias_cutoff(0).min(g.dealias_cutoff(1)) as usize;
        if 2 * self.n0 > hcut {
            return Err(Error::Capacity(format!(
                "horizontal resolution {} cannot resolve products of |k| <= {}",
                g.resolution(0),
                self.n0
            )));
        }
        let two_n = 2 * self.n as i64;
        let ok = g
            .index_of_wavenumber(2, two_n)
            .map(|i| g.signed_index(2, i).abs() <= g.dealias_cutoff(2))
            .unwrap_or(false);
        if !ok {
            return Err(Error::Capacity(format!(
                "vertical axis cannot resolve wavenumber 2N = {two_n}"
            )));
        }
        Ok(())
    }
}

fn rescaled(v: &SpectralField, amplitude: f64) -> SpectralField {
    let n = l2_norm(v);
    if n == 0.0 {
        v.clone()
    } else {
        v.scaled(amplitude / n)
    }
}

/// `∇^⊥ψ = (-∂₂ψ, ∂₁ψ)` for a random real `ψ` with `ψ̂` in `[-N₀, N₀]² \ {0}`.
pub fn random_v0h<R: Rng + ?Sized>(g2: &TorusGrid, n0: usize, rng: &mut R) -> Result<SpectralField> {
    let m = n0 as i64;
    let mut v = SpectralField::zeros(*g2, 2);
    for k1 in -m..=m {
        for k2 in -m..=m {
            // One representative per ±k pair.
            if (k1, k2) <= (0, 0) {
                continue;
            }
            let psi = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let i = Complex64::new(0.0, 1.0);
            v.add_wave(0, [k1, k2, 0], -i * (k2 as f64) * psi)?;
            v.add_wave(1, [k1, k2, 0], i * (k1 as f64) * psi)?;
        }
    }
    Ok(v)
}

/// `u₀ = (N v₀ʰ cos(N x₃), -div_h v₀ʰ sin(N x₃))` on `spec.grid`.
pub fn make_example(spec: &ExampleSpec) -> Result<SpectralField> {
    spec.validate()?;
    let g = spec.grid;
    let g2 = *spec.v0h.grid();
    let n = spec.n as i64;
    let ip = g.index_of_wavenumber(2, n).ok_or_else(|| Error::Capacity("N".into()))?;
    let im = g.index_of_wavenumber(2, -n).ok_or_else(|| Error::Capacity("-N".into()))?;
    let div = spec.v0h.divergence()?;
    let n3 = g.resolution(2);
    let mut u = SpectralField::zeros(g, 3);
    let nf = spec.n as f64;
    let half_i = Complex64::new(0.0, 0.5);
    for f2 in 0..g2.total() {
        for c in 0..2 {
            let a = spec.v0h.component(c)[f2] * (0.5 * nf);
            u.component_mut(c)[f2 * n3 + ip] += a;
            u.component_mut(c)[f2 * n3 + im] += a;
        }
        // -d sin(N x3) = -d (e^{iNx3} - e^{-iNx3}) / 2i
        let d = div.component(0)[f2];
        u.component_mut(2)[f2 * n3 + ip] += d * half_i;
        u.component_mut(2)[f2 * n3 + im] -= d * half_i;
    }
    Ok(u)
}

/// Simpson quadrature on `[0, horizon / rate]` for integrands decaying at
/// least like `e^{-rate t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayQuadrature {
    /// `rate · t_end`.
    pub horizon: f64,
    /// Number of subintervals (even).
    pub intervals: usize,
}

impl Default for DecayQuadrature {
    fn default() -> Self {
        Self {
            horizon: 30.0,
            intervals: 200,
        }
    }
}

impl DecayQuadrature {
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            intervals: 2 * self.intervals,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals < 2 || self.intervals % 2 != 0 || !(self.horizon > 0.0) {
            return Err(Error::Domain(
                "decay quadrature needs an even number of intervals and a positive horizon".into(),
            ));
        }
        Ok(())
    }

    pub fn nodes(&self, rate: f64) -> Vec<f64> {
        let h = self.horizon / rate / self.intervals as f64;
        (0..=self.intervals).map(|i| i as f64 * h).collect()
    }

    /// Simpson sum of `values` on `nodes(rate)`.
    pub fn integrate(&self, values: &[f64], rate: f64) -> f64 {
        let h = self.horizon / rate / self.intervals as f64;
        let last = values.len() - 1;
        let w: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = if i == 0 || i == last {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * v
            })
            .collect();
        h / 3.0 * pairwise_sum(&w)
    }

    /// `∫_{t_end}^∞` assuming `value(t) ≤ G e^{-rate t}`, with `G` the
    /// largest `value·e^{rate t}` seen on the nodes.
    pub fn tail(&self, values: &[f64], rate: f64) -> f64 {
        let nodes = self.nodes(rate);
        let g = max_of(
            values
                .iter()
                .zip(&nodes)
                .map(|(v, t)| v * libm::exp(rate * t)),
        );
        g * libm::exp(-self.horizon) / rate
    }
}

/// Smallest nonzero `|k₃|` carried by the oscillating part of `u0`.
fn vertical_rate(u0: &SpectralField) -> Result<f64> {
    let tilde = tilde_part(u0)?;
    let g = *u0.grid();
    let n = g.total();
    let mut kmin = f64::INFINITY;
    g.for_each_mode(|f, k| {
        if k[2] != 0.0 && (0..tilde.ncomp()).any(|c| tilde.coeffs()[c * n + f].norm() > 0.0) {
            kmin = kmin.min(k[2].abs());
        }
    });
    Ok(kmin)
}

#[derive(Debug, Clone, PartialEq)]
pub struct H1Report {
    pub mean_l2: f64,
    /// `∫₀^{t_end} ‖M P(u_F·∇u_F)‖_{L²}`.
    pub forcing_integral: f64,
    pub tail: f64,
    pub value: f64,
    /// `max_t max_k |M P(u_F·∇u_F)³|` over the nodes.
    pub third_component_max: f64,
    pub t_end: f64,
}

/// (H1) for arbitrary data `u0` on T³.
pub fn h1_of(u0: &SpectralField, quad: &DecayQuadrature) -> Result<H1Report> {
    quad.validate()?;
    let mean_l2 = l2_norm(&horizontal_mean(u0)?);
    let k3 = vertical_rate(u0)?;
    if !k3.is_finite() {
        return Ok(H1Report {
            mean_l2,
            forcing_integral: 0.0,
            tail: 0.0,
            value: mean_l2,
            third_component_max: 0.0,
            t_end: 0.0,
        });
    }
    let rate = 2.0 * k3 * k3;
    let u_f = build_u_f(u0)?;
    let nodes = quad.nodes(rate);
    let mut values = Vec::with_capacity(nodes.len());
    let mut third = 0.0f64;
    for &t in &nodes {
        let m = horizontal_mean(&projected_self_flux(&u_f.at(t)?)?)?;
        values.push(l2_norm(&m));
        third = third.max(m.component(2).iter().fold(0.0, |a, z| a.max(z.norm())));
    }
    let forcing_integral = quad.integrate(&values, rate);
    let tail = quad.tail(&values, rate);
    Ok(H1Report {
        mean_l2,
        forcing_integral,
        tail,
        value: mean_l2 + forcing_integral + tail,
        third_component_max: third,
        t_end: *nodes.last().unwrap(),
    })
}

pub fn check_h1(spec: &ExampleSpec, quad: &DecayQuadrature) -> Result<H1Report> {
    h1_of(&make_example(spec)?, quad)
}

/// (H2): `‖ũ₀‖_{B^{-1}_{∞,2}}`.
pub fn h2_of(u0: &SpectralField, quad: &HeatQuadrature) -> Result<f64> {
    besov_heat(&tilde_part(u0)?, 1.0, f64::INFINITY, 2.0, quad)
}

pub fn check_h2(spec: &ExampleSpec, quad: &HeatQuadrature) -> Result<f64> {
    h2_of(&make_example(spec)?, quad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct H3Report {
    pub p: f64,
    /// Time integral of the full forcing norm (plus tail).
    pub value: f64,
    /// The same for `(Id - M)P(u_F·∇u_F)` alone.
    pub oscillating: f64,
    /// The same for `Q(u_2D, u_F)` alone.
    pub q_part: f64,
    pub tail: f64,
    /// `max_t max_k |u_2D³|` on the nodes.
    pub u2d_third_max: f64,
    pub t_end: f64,
}

/// Settings shared by the (H3) computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Settings {
    pub time: DecayQuadrature,
    /// Points of the heat quadrature for the inner Besov norm.
    pub heat_points: usize,
    /// NS2D steps per time node.
    pub substeps: usize,
    /// Compute the two parts separately as well.
    pub parts: bool,
}

impl Default for H3Settings {
    fn default() -> Self {
        Self {
            time: DecayQuadrature::default(),
            heat_points: 100,
            substeps: 2,
            parts: true,
        }
    }
}

fn check_p_range(p: f64) -> Result<()> {
    if !(p > 6.0) || p.is_infinite() {
        return Err(Error::Domain(format!(
            "the smallness hypothesis needs p in (6, inf), got {p}"
        )));
    }
    Ok(())
}

/// (H3) for arbitrary data; `p ∈ (3, ∞]` is accepted here.
pub fn h3_of(u0: &SpectralField, p: f64, settings: &H3Settings) -> Result<H3Report> {
    if !(p > 3.0) {
        return Err(Error::Domain(format!("B^(-1+3/p)_(p,2) needs p > 3, got {p}")));
    }
    settings.time.validate()?;
    let k3 = vertical_rate(u0)?;
    if !k3.is_finite() {
        return Ok(H3Report {
            p,
            value: 0.0,
            oscillating: 0.0,
            q_part: 0.0,
            tail: 0.0,
            u2d_third_max: 0.0,
            t_end: 0.0,
        });
    }
    let grid3 = *u0.grid();
    let rate = k3 * k3;
    let nodes = settings.time.nodes(rate);
    let t_end = *nodes.last().unwrap();
    let u_f = build_u_f(u0)?;
    let f = build_f2d(&u_f)?;
    let v0 = horizontal_mean(u0)?;
    let dt = (nodes[1] - nodes[0]) / settings.substeps as f64;
    let cfg = SolverConfig::new(dt, t_end)?
        .with_strides(settings.substeps, usize::MAX / 2)
        .with_diagnostics(DiagnosticsLevel::Off);
    let sol = solve_ns2d(&v0, Some(&f), &cfg).map_err(|e| e.in_stage("u_2D"))?;
    let u2d = sol.trajectory;
    let s = 1.0 - 3.0 / p;
    let quad = HeatQuadrature::for_grid(&grid3).with_points(settings.heat_points);
    let norm = |x: &SpectralField| -> Result<f64> {
        let prof = heat_profile(x, s, p, 2.0, &quad)?;
        Ok(heat_aggregate(&prof, 2.0, &quad))
    };
    let mut total = Vec::with_capacity(nodes.len());
    let mut osc = Vec::new();
    let mut qp = Vec::new();
    let mut third = 0.0f64;
    for &t in &nodes {
        let uf = u_f.at(t)?;
        let v = u2d.at(t)?;
        third = third.max(v.component(2).iter().fold(0.0, |a, z| a.max(z.norm())));
        let v3 = embed(&v, &grid3)?;
        let a = tilde_part(&projected_self_flux(&uf)?)?;
        let b = q_form(&v3, &uf)?;
        total.push(norm(&a.add(&b)?)?);
        if settings.parts {
            osc.push(norm(&a)?);
            qp.push(norm(&b)?);
        }
    }
    let integral = |vals: &[f64]| {
        if vals.is_empty() {
            0.0
        } else {
            settings.time.integrate(vals, rate) + settings.time.tail(vals, rate)
        }
    };
    Ok(H3Report {
        p,
        value: integral(&total),
        oscillating: integral(&osc),
        q_part: integral(&qp),
        tail: settings.time.tail(&total, rate),
        u2d_third_max: third,
        t_end,
    })
}

pub fn check_h3(spec: &ExampleSpec, p: f64, settings: &H3Settings) -> Result<H3Report> {
    check_p_range(p)?;
    h3_of(&make_example(spec)?, p, settings)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// `lhs = ‖u₀ʰ‖_{B^{-1}_{∞,∞}}` against `rhs = ‖v₀ʰ‖_{L²}/(4π√e)`.
pub fn lower_bound_check(spec: &ExampleSpec, quad: &HeatQuadrature) -> Result<LowerBound> {
    if spec.n < spec.n0 {
        return Err(Error::Domain("the lower bound needs N >= N0".into()));
    }
    let u0 = make_example(spec)?;
    let uh = horizontal_components(&u0)?;
    let lhs = besov_heat(&uh, 1.0, f64::INFINITY, f64::INFINITY, quad)?;
    let rhs = spec.amplitude() / (4.0 * core::f64::consts::PI * libm::sqrt(core::f64::consts::E));
    Ok(LowerBound {
        lhs,
        rhs,
        margin: lhs - rhs,
    })
}

pub const C0_LADDER: [f64; 3] = [0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub n: usize,
    pub n0: usize,
    pub amplitude: f64,
    pub p: f64,
    pub h1_value: f64,
    pub h2_value: f64,
    pub h3_value: f64,
    pub h3_oscillating: f64,
    pub h3_q_part: f64,
    pub a: f64,
    pub b: f64,
    /// `(C₀, log ρ(C₀))` with `ρ = C₀ · B · exp(C₀A²(1 + A log(e + A))²)`.
    pub log_ratio: Vec<(f64, f64)>,
    /// Predicted trends `(log N)^{2/9}` and `N^{-1/4}` (constants unknown).
    pub predicted_a_trend: f64,
    pub predicted_b_trend: f64,
    pub lower_bound_lhs: f64,
    pub lower_bound_rhs: f64,
    pub h1_third_component_max: f64,
    pub u2d_third_max: f64,
    pub caveats: Vec<String>,
}

impl HypothesisReport {
    /// `log(B exp(C₀A²(1 + A log(e + A))²))`, i.e. without the `C₀` prefactor.
    pub fn log_smallness(&self, c0: f64) -> f64 {
        log_smallness(self.a, self.b, c0)
    }
}

pub fn log_smallness(a: f64, b: f64, c0: f64) -> f64 {
    let inner = 1.0 + a * libm::log(core::f64::consts::E + a);
    libm::log(b) + c0 * a * a * inner * inner
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportSettings {
    pub h1: DecayQuadrature,
    pub h3: H3Settings,
    pub heat_points: usize,
}

impl Default for ReportSettings {
    fn default() -> Self {
        Self {
            h1: DecayQuadrature::default(),
            h3: H3Settings::default(),
            heat_points: HeatQuadrature::DEFAULT_POINTS,
        }
    }
}

pub fn smallness_report(spec: &ExampleSpec, p: f64, settings: &ReportSettings) -> Result<HypothesisReport> {
    check_p_range(p)?;
    let u0 = make_example(spec)?;
    let h1 = h1_of(&u0, &settings.h1)?;
    let quad = HeatQuadrature::for_grid(&spec.grid).with_points(settings.heat_points);
    let h2 = h2_of(&u0, &quad)?;
    let h3 = h3_of(&u0, p, &settings.h3)?;
    let lb = lower_bound_check(spec, &quad)?;
    let a = h1.value.max(h2);
    let b = h3.value;
    let log_ratio = C0_LADDER
        .iter()
        .map(|&c| (c, libm::log(c) + log_smallness(a, b, c)))
        .collect();
    let ln_n = libm::log(spec.n as f64);
    Ok(HypothesisReport {
        n: spec.n,
        n0: spec.n0,
        amplitude: spec.amplitude(),
        p,
        h1_value: h1.value,
        h2_value: h2,
        h3_value: h3.value,
        h3_oscillating: h3.oscillating,
        h3_q_part: h3.q_part,
        a,
        b,
        log_ratio,
        predicted_a_trend: ln_n.powf(2.0 / 9.0),
        predicted_b_trend: (spec.n as f64).powf(-0.25),
        lower_bound_lhs: lb.lhs,
        lower_bound_rhs: lb.rhs,
        h1_third_component_max: h1.third_component_max,
        u2d_third_max: h3.u2d_third_max,
        caveats: vec![
            format!(
                "time integrals over R+ evaluated on [0, {:.3e}] (H1) and [0, {:.3e}] (H3) plus exponential tail estimates",
                h1.t_end, h3.t_end
            ),
            "C0 is not known; the ratio is reported for a ladder of values".into(),
        ],
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(*v)).collect();
    let n = lx.len() as f64;
    let mx = pairwise_sum(&lx) / n;
    let my = pairwise_sum(&ly) / n;
    let sxy: Vec<f64> = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = lx.iter().map(|a| (a - mx) * (a - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: usize,
    pub report: HypothesisReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    pub slope_h1: f64,
    pub slope_h2_over_amp: f64,
    pub slope_h3: f64,
    pub slope_h3_oscillating: f64,
    pub slope_h3_q: f64,
    pub slope_lower_bound_lhs: f64,
}

/// Grid used for entry `n` of a scan.
pub type GridFor<'a> = &'a dyn Fn(usize) -> Result<TorusGrid>;

/// Evaluates the report for each `N` at the template's `v₀ʰ` (amplitude fixed
/// unless `amplitude_of` is given) and fits log-log slopes.
pub fn scaling_study(
    template: &ExampleSpec,
    ns: &[usize],
    p: f64,
    grid_for: GridFor<'_>,
    amplitude_of: Option<&dyn Fn(usize) -> f64>,
    settings: &ReportSettings,
) -> Result<ScanTable> {
    check_p_range(p)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut spec = template.with_n(n, grid_for(n)?)?;
        if let Some(amp) = amplitude_of {
            spec = spec.with_amplitude(amp(n))?;
        }
        rows.push(ScanRow {
            n,
            report: smallness_report(&spec, p, settings)?,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let col = |f: &dyn Fn(&HypothesisReport) -> f64| -> Vec<f64> {
        rows.iter().map(|r| f(&r.report)).collect()
    };
    Ok(ScanTable {
        slope_h1: loglog_slope(&x, &col(&|r| r.h1_value)),
        slope_h2_over_amp: loglog_slope(&x, &col(&|r| r.h2_value / r.amplitude)),
        slope_h3: loglog_slope(&x, &col(&|r| r.h3_value)),
        slope_h3_oscillating: loglog_slope(&x, &col(&|r| r.h3_oscillating)),
        slope_h3_q: loglog_slope(&x, &col(&|r| r.h3_q_part)),
        slope_lower_bound_lhs: loglog_slope(&x, &col(&|r| r.lower_bound_lhs)),
        rows,
    })
}
