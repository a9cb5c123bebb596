//! Littlewood-Paley blocks and the Besov-type norms built on them.
//!
//! Blocks are Fourier multipliers `Δ_j = χ(|k|/2^j) - χ(|k|/2^{j-1})`,
//! `j = 0..=j_max`. Since torus fields are mean-free, `|k| ≥ 1` and there are
//! no negative blocks: `Δ_0 = χ(|k|)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::norms::{lp_norm, linf_norm};
use crate::ops::apply_heat;
use crate::sum::{max_of, pairwise_sum};
use crate::trajectory::TimeSampledField;

/// Radial cut-off, `1` on `[0, 1]`, `0` on `[2, ∞)`, smooth in between.
///
/// The transition is `g(2 - r) / (g(2 - r) + g(r - 1))` with
/// `g(x) = exp(-1/x^order)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiProfile {
    pub order: u32,
}

impl Default for ChiProfile {
    fn default() -> Self {
        Self { order: 1 }
    }
}

impl ChiProfile {
    fn g(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            libm::exp(-1.0 / x.powi(self.order as i32))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let a = self.g(2.0 - r);
            let b = self.g(r - 1.0);
            a / (a + b)
        }
    }

    /// Symbol of `Δ_j` at radius `r`.
    pub fn block_symbol(&self, r: f64, j: i32) -> f64 {
        let s = libm::exp2(j as f64);
        self.eval(r / s) - self.eval(2.0 * r / s)
    }
}

/// Highest block index needed to cover every mode of `grid`.
pub fn j_max(grid: &TorusGrid) -> i32 {
    let kmax = grid.max_wavenumber();
    libm::ceil(libm::log2(kmax)).max(0.0) as i32
}

fn radii(grid: &TorusGrid) -> Vec<f64> {
    let mut r = vec![0.0; grid.total()];
    grid.for_each_mode(|f, k| r[f] = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
    r
}

fn multiply(u: &SpectralField, sym: impl Fn(f64) -> f64) -> SpectralField {
    let r = radii(u.grid());
    let m: Vec<f64> = r.iter().map(|&x| if x == 0.0 { 0.0 } else { sym(x) }).collect();
    let mut out = u.clone();
    out.apply_multiplier(&m);
    out
}

/// `Δ_j u`; zero for `j` outside the grid's block range.
pub fn lp_block(u: &SpectralField, j: i32, chi: &ChiProfile) -> SpectralField {
    multiply(u, |r| chi.block_symbol(r, j))
}

/// `S_j u`, the multiplier `χ(|k|/2^j)` (mean mode dropped).
pub fn lp_lowpass(u: &SpectralField, j: i32, chi: &ChiProfile) -> SpectralField {
    let s = libm::exp2(j as f64);
    multiply(u, |r| chi.eval(r / s))
}

#[derive(Debug, Clone)]
pub struct LPDecomposition {
    pub grid: TorusGrid,
    pub j_min: i32,
    pub j_max: i32,
    pub blocks: Vec<SpectralField>,
}

impl LPDecomposition {
    pub fn new(u: &SpectralField, chi: &ChiProfile) -> Self {
        let grid = *u.grid();
        let jm = j_max(&grid);
        let blocks = (0..=jm).map(|j| lp_block(u, j, chi)).collect();
        Self {
            grid,
            j_min: 0,
            j_max: jm,
            blocks,
        }
    }

    pub fn block(&self, j: i32) -> Option<&SpectralField> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        self.blocks.get((j - self.j_min) as usize)
    }

    /// `Σ_j Δ_j u`.
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = SpectralField::zeros(self.grid, self.blocks[0].ncomp());
        for b in &self.blocks {
            out.axpy(1.0, b).expect("blocks share one grid");
        }
        out
    }

    /// `‖Δ_j u‖_{L^p}` for every block.
    pub fn block_norms(&self, p: f64) -> Result<Vec<f64>> {
        self.blocks.iter().map(|b| lp_norm(b, p)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        let out = Self { s, p, q };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::Domain(format!("Besov index s = {} must be finite", self.s)));
        }
        if !(self.p >= 1.0) || !(self.q >= 1.0) {
            return Err(Error::Domain(format!(
                "Besov exponents need p, q in [1, inf], got p = {}, q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// `‖(a_i)‖_{ℓ^q}` (sup for `q = ∞`).
pub fn lq_aggregate(a: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return max_of(a.iter().copied());
    }
    let scale = max_of(a.iter().copied());
    if scale == 0.0 {
        return 0.0;
    }
    let terms: Vec<f64> = a.iter().map(|x| (x / scale).powf(q)).collect();
    scale * pairwise_sum(&terms).powf(1.0 / q)
}

/// `‖ 2^{js} ‖Δ_j u‖_{L^p} ‖_{ℓ^q}`.
pub fn besov_dyadic(u: &SpectralField, params: BesovParams, chi: &ChiProfile) -> Result<f64> {
    params.validate()?;
    let dec = LPDecomposition::new(u, chi);
    let norms = dec.block_norms(params.p)?;
    let weighted: Vec<f64> = norms
        .iter()
        .enumerate()
        .map(|(i, n)| libm::exp2(params.s * (dec.j_min + i as i32) as f64) * n)
        .collect();
    Ok(lq_aggregate(&weighted, params.q))
}

/// Log-spaced time grid for the heat characterisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatQuadrature {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl HeatQuadrature {
    pub const DEFAULT_T_MAX: f64 = 100.0;
    pub const DEFAULT_POINTS: usize = 200;

    /// `t_min = 10⁻⁴/res²` with `res` the finest effective axis resolution.
    pub fn for_grid(grid: &TorusGrid) -> Self {
        let res = (0..grid.dim())
            .map(|a| grid.effective_resolution(a))
            .max()
            .unwrap_or(1) as f64;
        Self {
            t_min: 1e-4 / (res * res),
            t_max: Self::DEFAULT_T_MAX,
            n: Self::DEFAULT_POINTS,
        }
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0) || !(self.t_max > self.t_min) || !self.t_max.is_finite() {
            return Err(Error::Domain(format!(
                "heat quadrature needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.n < 2 {
            return Err(Error::Domain("heat quadrature needs at least 2 points".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        let a = libm::log(self.t_min);
        let b = libm::log(self.t_max);
        let h = (b - a) / (self.n - 1) as f64;
        (0..self.n).map(|i| libm::exp(a + h * i as f64)).collect()
    }

    /// Spacing in `log t`.
    pub fn log_step(&self) -> f64 {
        (libm::log(self.t_max) - libm::log(self.t_min)) / (self.n - 1) as f64
    }
}

/// Level below which a node cannot change an `L^q` aggregate of `n` nodes
/// by more than a relative `1e-16`; nodes cannot change a max at all below 1.
fn skip_level(q: f64, n: usize) -> f64 {
    if q.is_infinite() {
        1.0
    } else {
        (1e-16 / n as f64).powf(1.0 / q)
    }
}

/// Samples `t^{s/2} ‖S(t)u‖_{L^p}` on the quadrature nodes.
///
/// Nodes are visited in decreasing order of an a-priori bound and skipped
/// (left at zero) once the bound drops below `skip_level(q)` times the
/// largest value found. The bounds used are `‖S(t)u‖_p ≤ ‖u‖_p` and
/// `‖S(t)u‖_p ≤ V^{1/p} e^{-t k²_min} Σ|û|`. With `q = ∞` only nodes that
/// could hold the max are evaluated.
pub fn heat_profile(
    u: &SpectralField,
    s: f64,
    p: f64,
    q: f64,
    quad: &HeatQuadrature,
) -> Result<Vec<f64>> {
    quad.validate()?;
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let t = quad.nodes();
    let mut out = vec![0.0; t.len()];
    if u.is_zero() {
        return Ok(out);
    }
    let r = radii(u.grid());
    let n = u.grid().total();
    let mut kmin2 = f64::INFINITY;
    for (i, z) in u.coeffs().iter().enumerate() {
        if z.norm_sqr() > 0.0 && r[i % n] > 0.0 {
            kmin2 = kmin2.min(r[i % n] * r[i % n]);
        }
    }
    let wiener = pairwise_sum(&u.coeffs().iter().map(|z| z.norm()).collect::<Vec<_>>())
        * (u.ncomp() as f64).sqrt();
    let vol = u.grid().volume();
    let base = lp_norm(u, p)?;
    let vfac = if p.is_infinite() { 1.0 } else { vol.powf(1.0 / p) };
    let bound: Vec<f64> = t
        .iter()
        .map(|&ti| {
            let heat = vfac * wiener * libm::exp(-ti * kmin2);
            ti.powf(0.5 * s) * base.min(heat)
        })
        .collect();
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| bound[b].total_cmp(&bound[a]));
    let level = skip_level(q, t.len());
    let mut best = 0.0f64;
    for &i in &order {
        if bound[i] < level * best {
            break;
        }
        let v = t[i].powf(0.5 * s) * lp_norm(&apply_heat(u, t[i])?, p)?;
        out[i] = v;
        best = best.max(v);
    }
    Ok(out)
}

/// Aggregates a heat profile in `L^q(dt/t)`: trapezoid in `log t`, or the
/// grid max for `q = ∞`.
pub fn heat_aggregate(profile: &[f64], q: f64, quad: &HeatQuadrature) -> f64 {
    if q.is_infinite() {
        return max_of(profile.iter().copied());
    }
    let scale = max_of(profile.iter().copied());
    if scale == 0.0 {
        return 0.0;
    }
    let h = quad.log_step();
    let last = profile.len() - 1;
    let terms: Vec<f64> = profile
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            w * (v / scale).powf(q)
        })
        .collect();
    scale * (h * pairwise_sum(&terms)).powf(1.0 / q)
}

/// `‖u‖_{B^{-s}_{p,q}} = ‖ t^{s/2} ‖S(t)u‖_{L^p} ‖_{L^q(dt/t)}`, `s > 0`.
pub fn besov_heat(u: &SpectralField, s: f64, p: f64, q: f64, quad: &HeatQuadrature) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("heat Besov norm needs s > 0, got {s}")));
    }
    BesovParams::new(-s, p, q)?;
    let profile = heat_profile(u, s, p, q, quad)?;
    Ok(heat_aggregate(&profile, q, quad))
}

/// Cumulative trapezoid `∫₀^{t_i} w`, starting at 0 on the first node.
pub fn cumulative_trapezoid(times: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (w[i] + w[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Trapezoid `∫ w dt` over the whole grid, pairwise-summed.
pub fn trapezoid(times: &[f64], w: &[f64]) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    let parts: Vec<f64> = (1..times.len())
        .map(|i| 0.5 * (times[i] - times[i - 1]) * (w[i] + w[i - 1]))
        .collect();
    pairwise_sum(&parts)
}

/// Per-time, per-block `‖Δ_j a(t)‖_{L^p}`; reusable across `λ`.
#[derive(Debug, Clone)]
pub struct BlockNormTable {
    pub times: Vec<f64>,
    pub p: f64,
    pub j_min: i32,
    /// `norms[i][j - j_min]` at `times[i]`.
    pub norms: Vec<Vec<f64>>,
}

impl BlockNormTable {
    pub fn new(a: &TimeSampledField, p: f64, chi: &ChiProfile) -> Result<Self> {
        check_x_lambda_p(p)?;
        let norms = a
            .samples()
            .iter()
            .map(|s| LPDecomposition::new(s, chi).block_norms(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: a.times().to_vec(),
            p,
            j_min: 0,
            norms,
        })
    }

    /// `‖a‖_{X_λ}` for the weight series `w(t) = ‖u⁽⁰⁾(t)‖²_{L^∞}`.
    pub fn x_lambda(&self, u0_weight: &[f64], lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("X_lambda needs lambda > 0, got {lambda}")));
        }
        if u0_weight.len() != self.times.len() {
            return Err(Error::TimeGrid(format!(
                "weight series has {} samples, trajectory {}",
                u0_weight.len(),
                self.times.len()
            )));
        }
        let cum = cumulative_trapezoid(&self.times, u0_weight);
        let damp: Vec<f64> = cum.iter().map(|c| libm::exp(-lambda * c)).collect();
        let nj = self.norms.iter().map(Vec::len).max().unwrap_or(0);
        let exponent = 1.0 - 3.0 / self.p;
        let mut terms = Vec::with_capacity(nj);
        for jj in 0..nj {
            let j = (self.j_min + jj as i32) as f64;
            let series: Vec<f64> = self
                .norms
                .iter()
                .zip(&damp)
                .map(|(row, d)| d * row.get(jj).copied().unwrap_or(0.0))
                .collect();
            let sup = max_of(series.iter().copied());
            let sq: Vec<f64> = series.iter().map(|x| x * x).collect();
            let l2 = trapezoid(&self.times, &sq);
            terms.push(libm::exp2(-2.0 * j * exponent) * (sup * sup + libm::exp2(2.0 * j) * l2));
        }
        Ok(pairwise_sum(&terms).sqrt())
    }
}

fn check_x_lambda_p(p: f64) -> Result<()> {
    if !(p > 3.0) {
        return Err(Error::Domain(format!("X_lambda needs p in (3, inf], got {p}")));
    }
    Ok(())
}

/// `‖a‖_{X_λ}`, with `u0_weight[i] = ‖u⁽⁰⁾(t_i)‖²_{L^∞}` on the trajectory grid.
pub fn x_lambda_norm(
    a: &TimeSampledField,
    u0_weight: &[f64],
    lambda: f64,
    p: f64,
    chi: &ChiProfile,
) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::TimeGrid("X_lambda norm of an unsampled trajectory".into()));
    }
    BlockNormTable::new(a, p, chi)?.x_lambda(u0_weight, lambda)
}

/// `‖u⁽⁰⁾(t_i)‖²_{L^∞}` for every stored sample.
pub fn linf_sq_series(u0: &TimeSampledField) -> Vec<f64> {
    u0.samples()
        .iter()
        .map(|s| {
            let v = linf_norm(s);
            v * v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn chi_is_monotone_blend() {
        let chi = ChiProfile::default();
        assert_eq!(chi.eval(1.0), 1.0);
        assert_eq!(chi.eval(2.0), 0.0);
        let mut prev = 1.0;
        for i in 1..200 {
            let v = chi.eval(1.0 + i as f64 / 200.0);
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
        assert!((chi.eval(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn blocks_sum_to_field() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let u = SpectralField::random(g, 3, 20.0, 0.0, &mut rng);
        let dec = LPDecomposition::new(&u, &ChiProfile::default());
        let err = dec.reconstruct().sub(&u).unwrap().max_amplitude();
        assert!(err <= 1e-14 * u.max_amplitude());
    }

    #[test]
    fn plateau_mode_lives_in_one_block() {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::zeros(g, 1);
        u.add_cos(0, [4, 0, 0], 1.0).unwrap();
        let chi = ChiProfile::default();
        assert_eq!(lp_block(&u, 2, &chi), u);
        assert!(lp_block(&u, 1, &chi).is_zero());
        assert!(lp_block(&u, 3, &chi).is_zero());
        assert!(lp_block(&u, -1, &chi).is_zero());
    }

    #[test]
    fn heat_profile_skip_is_exact_for_single_mode() {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::zeros(g, 1);
        u.add_cos(0, [3, 1, 0], 1.0).unwrap();
        let quad = HeatQuadrature::for_grid(&g);
        let prof = heat_profile(&u, 1.0, 2.0, 2.0, &quad).unwrap();
        let l2 = crate::norms::l2_norm(&u);
        for (t, v) in quad.nodes().iter().zip(&prof) {
            let exact = t.sqrt() * libm::exp(-10.0 * t) * l2;
            assert!(*v == 0.0 || (v - exact).abs() <= 1e-13 * l2);
        }
    }
}
