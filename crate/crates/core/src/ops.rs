//! Fourier-multiplier and pseudo-spectral operators: Leray projection, heat
//! semiflow, derivatives, dealiased products, horizontal averaging.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::physical::{spectral_components, to_physical, to_spectral, PhysicalField};

/// Tolerance on `|k·û| / max|û|` for operations that require a
/// divergence-free advecting field.
pub const DIV_FREE_CONTRACT_TOL: f64 = 1e-10;

/// Number of components the Leray projector acts on (the horizontal pair for
/// fields on T², all three on T³).
fn projected_components(u: &SpectralField) -> Result<usize> {
    match (u.grid().dim(), u.ncomp()) {
        (3, 3) => Ok(3),
        (2, 2) | (2, 3) => Ok(2),
        (d, c) => Err(Error::Dimension(format!(
            "Leray projection undefined for {c} components on T^{d}"
        ))),
    }
}

/// `P = I - k kᵀ/|k|²` applied modewise. On T² with three components the
/// third component is left untouched.
pub fn leray_project(u: &SpectralField) -> Result<SpectralField> {
    let mut out = u.clone();
    leray_project_in_place(&mut out)?;
    Ok(out)
}

pub fn leray_project_in_place(u: &mut SpectralField) -> Result<()> {
    let m = projected_components(u)?;
    let grid = *u.grid();
    let n = grid.total();
    let coeffs = u.coeffs_mut();
    grid.for_each_mode(|f, k| {
        let k2: f64 = k[..m].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            return;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (j, &kj) in k.iter().enumerate().take(m) {
            dot += coeffs[j * n + f] * kj;
        }
        let dot = dot / k2;
        for (j, &kj) in k.iter().enumerate().take(m) {
            coeffs[j * n + f] -= dot * kj;
        }
    });
    Ok(())
}

/// Which Laplacian generates the semiflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatAxes {
    /// `e^{tΔ}` over all grid axes.
    All,
    /// `e^{tΔ_h}`: only the first two axes.
    Horizontal,
}

/// Per-mode symbol `exp(-t|k|²)` (or `exp(-t|k_h|²)`).
pub fn heat_symbol(grid: &TorusGrid, t: f64, axes: HeatAxes) -> Vec<f64> {
    let mut out = alloc::vec![0.0; grid.total()];
    grid.for_each_mode(|f, k| {
        let k2 = match axes {
            HeatAxes::All => k[0] * k[0] + k[1] * k[1] + k[2] * k[2],
            HeatAxes::Horizontal => k[0] * k[0] + k[1] * k[1],
        };
        out[f] = libm::exp(-t * k2);
    });
    out
}

/// `S(t)u = e^{tΔ}u`.
pub fn apply_heat(u: &SpectralField, t: f64) -> Result<SpectralField> {
    apply_heat_axes(u, t, HeatAxes::All)
}

pub fn apply_heat_axes(u: &SpectralField, t: f64, axes: HeatAxes) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat flow time must be finite and >= 0, got {t}")));
    }
    let mut out = u.clone();
    if t > 0.0 {
        out.apply_multiplier(&heat_symbol(u.grid(), t, axes));
    }
    Ok(out)
}

/// `∂_axis u`; Nyquist modes along `axis` are zeroed so the result stays real.
pub fn derivative(u: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = *u.grid();
    if axis >= grid.dim() {
        return Err(Error::Dimension(format!("axis {axis} on a {}D grid", grid.dim())));
    }
    let mut out = u.clone();
    let n = grid.total();
    let coeffs = out.coeffs_mut();
    let nyq = grid.resolution(axis) / 2;
    let stride_after: usize = grid.shape()[axis + 1..].iter().product();
    let res = grid.resolution(axis);
    for f in 0..n {
        let i = (f / stride_after) % res;
        let k = if i == nyq { 0.0 } else { grid.wavenumber(axis, i) };
        for c in 0..u.ncomp() {
            let z = coeffs[c * n + f];
            coeffs[c * n + f] = Complex64::new(-z.im * k, z.re * k);
        }
    }
    Ok(out)
}

fn dealiased(u: &SpectralField) -> SpectralField {
    let mut v = u.clone();
    v.dealias();
    v
}

fn ensure_div_free(u: &SpectralField) -> Result<()> {
    let ratio = u.divergence_ratio()?;
    if ratio > DIV_FREE_CONTRACT_TOL {
        return Err(Error::Contract(format!(
            "advecting field is not divergence-free (|k·û|/max|û| = {ratio:e})"
        )));
    }
    Ok(())
}

/// `u·∇w = Σ_{j<d} u_j ∂_j w`, pseudo-spectral with 2/3 dealiasing. On T² only
/// horizontal derivatives exist, so this is `u^h·∇^h w`.
pub fn advect(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    u.grid().ensure_same(w.grid())?;
    let d = u.grid().dim();
    if u.ncomp() < d {
        return Err(Error::Dimension(format!(
            "advecting field needs {d} components, has {}",
            u.ncomp()
        )));
    }
    ensure_div_free(u)?;
    let grid = *u.grid();
    let pu = to_physical(&dealiased(u), 1);
    let wd = dealiased(w);
    let n = grid.total();
    let mut acc: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.0; n]; w.ncomp()];
    for j in 0..d {
        let dw = to_physical(&derivative(&wd, j)?, 1);
        for (c, a) in acc.iter_mut().enumerate() {
            for ((o, &x), &y) in a.iter_mut().zip(&pu.comps[j]).zip(&dw.comps[c]) {
                *o += x * y;
            }
        }
    }
    let mut out = to_spectral(grid, &acc);
    out.dealias();
    out.remove_mean();
    Ok(out)
}

/// `Σ_j ∂_j T_{ji}` for a symmetric flux `T` sampled in physical space.
///
/// `flux(j, i)` must return the samples of `T_{ji}` for `j < d`, `i < ncomp`;
/// it is only called for `j ≤ i` when `i < d` (the remaining entries follow by
/// symmetry). The result is dealiased and mean-free but not projected.
pub fn flux_divergence<F>(grid: TorusGrid, ncomp: usize, flux: F) -> SpectralField
where
    F: Fn(usize, usize) -> Vec<f64>,
{
    let d = grid.dim();
    let mut keys: Vec<(usize, usize)> = Vec::new();
    for j in 0..d {
        for i in 0..ncomp {
            if i < d && i < j {
                continue;
            }
            keys.push((j, i));
        }
    }
    let samples: Vec<Vec<f64>> = keys.iter().map(|&(j, i)| flux(j, i)).collect();
    let hat = spectral_components(grid, &samples);
    let lookup = |j: usize, i: usize| -> usize {
        let key = if i < d && i < j { (i, j) } else { (j, i) };
        keys.iter().position(|&x| x == key).expect("flux key")
    };
    let n = grid.total();
    let mut out = SpectralField::zeros(grid, ncomp);
    let mask = grid.dealias_mask();
    // Wavenumbers with the Nyquist entry zeroed, per axis.
    let kax: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..grid.resolution(a))
                .map(|i| if grid.is_nyquist(a, i) { 0.0 } else { grid.wavenumber(a, i) })
                .collect()
        })
        .collect();
    for i in 0..ncomp {
        let comps: Vec<&[Complex64]> = (0..d).map(|j| hat[lookup(j, i)].as_slice()).collect();
        let dst = out.component_mut(i);
        grid.for_each_index(|f, idx| {
            if mask[f] == 0.0 {
                return;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, comp) in comps.iter().enumerate() {
                s += comp[f] * kax[j][idx[j]];
            }
            dst[f] = Complex64::new(-s.im, s.re);
        });
    }
    out.remove_mean();
    debug_assert_eq!(out.coeffs().len(), ncomp * n);
    out
}

/// Physical samples of the dealiased field (the input of every product).
pub fn dealiased_physical(u: &SpectralField) -> PhysicalField {
    to_physical(&dealiased(u), 1)
}

/// `P div(u ⊗ u)`, equal to `P(u·∇u)` for divergence-free `u` (and to
/// `P(u^h·∇^h u)` for three-component fields on T²).
pub fn projected_self_flux(u: &SpectralField) -> Result<SpectralField> {
    let p = dealiased_physical(u);
    let mut out = flux_divergence(*u.grid(), u.ncomp(), |j, i| {
        p.comps[j].iter().zip(&p.comps[i]).map(|(a, b)| a * b).collect()
    });
    leray_project_in_place(&mut out)?;
    Ok(out)
}

/// `Q(a, b) = P div(a ⊗ b + b ⊗ a)`, symmetric in `(a, b)` bit for bit.
pub fn q_form(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.ensure_compatible(b)?;
    let pa = dealiased_physical(a);
    let pb = dealiased_physical(b);
    let mut out = flux_divergence(*a.grid(), a.ncomp(), |j, i| {
        (0..pa.len())
            .map(|x| pa.comps[j][x] * pb.comps[i][x] + pb.comps[j][x] * pa.comps[i][x])
            .collect()
    });
    leray_project_in_place(&mut out)?;
    Ok(out)
}

fn ensure_3d(u: &SpectralField, what: &str) -> Result<()> {
    if u.grid().dim() != 3 {
        return Err(Error::Dimension(format!("{what} requires a field on T^3")));
    }
    Ok(())
}

/// `M u = ū`: the `x₃`-average, returned as a field on T² with the same
/// components.
pub fn horizontal_mean(u: &SpectralField) -> Result<SpectralField> {
    ensure_3d(u, "horizontal mean")?;
    let g3 = *u.grid();
    let g2 = g3.horizontal()?;
    let n3 = g3.resolution(2);
    let mut out = SpectralField::zeros(g2, u.ncomp());
    for c in 0..u.ncomp() {
        let src = u.component(c);
        let dst = out.component_mut(c);
        for (f2, z) in dst.iter_mut().enumerate() {
            *z = src[f2 * n3];
        }
    }
    Ok(out)
}

/// `(Id - M) u = ũ`.
pub fn tilde_part(u: &SpectralField) -> Result<SpectralField> {
    ensure_3d(u, "oscillating part")?;
    let n3 = u.grid().resolution(2);
    let mut out = u.clone();
    for c in 0..u.ncomp() {
        for (f, z) in out.component_mut(c).iter_mut().enumerate() {
            if f % n3 == 0 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Embeds a field on T² into T³ as an `x₃`-independent field.
pub fn embed(v: &SpectralField, grid3: &TorusGrid) -> Result<SpectralField> {
    if v.grid().dim() != 2 {
        return Err(Error::Dimension("embedding expects a field on T^2".into()));
    }
    grid3.horizontal()?.ensure_same(v.grid())?;
    let n3 = grid3.resolution(2);
    let mut out = SpectralField::zeros(*grid3, v.ncomp());
    for c in 0..v.ncomp() {
        let src = v.component(c);
        let dst = out.component_mut(c);
        for (f2, &z) in src.iter().enumerate() {
            dst[f2 * n3] = z;
        }
    }
    Ok(out)
}

/// The first two components `u^h`.
pub fn horizontal_components(u: &SpectralField) -> Result<SpectralField> {
    if u.ncomp() < 2 {
        return Err(Error::Dimension("field has fewer than two components".into()));
    }
    let n = u.grid().total();
    SpectralField::from_coeffs(*u.grid(), 2, u.coeffs()[..2 * n].to_vec())
}

/// Pads a field with zero components up to `ncomp`.
pub fn with_components(u: &SpectralField, ncomp: usize) -> Result<SpectralField> {
    if ncomp < u.ncomp() || ncomp > 3 {
        return Err(Error::Dimension(format!("cannot widen {} to {ncomp} components", u.ncomp())));
    }
    let mut coeffs = u.coeffs().to_vec();
    coeffs.resize(ncomp * u.grid().total(), Complex64::new(0.0, 0.0));
    SpectralField::from_coeffs(*u.grid(), ncomp, coeffs)
}

/// `L²` inner product `∫ u·w dx` over the full torus.
pub fn inner_product(u: &SpectralField, w: &SpectralField) -> Result<f64> {
    u.ensure_compatible(w)?;
    let n = u.coeffs().len();
    let a = u.coeffs();
    let b = w.coeffs();
    let s = crate::sum::pairwise_sum_by(n, &|i| (a[i] * b[i].conj()).re);
    Ok(s * u.grid().volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::l2_norm;
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(seed)
    }

    #[test]
    fn gradient_fields_are_annihilated() {
        // u = ∇ sin(x1) = (cos x1, 0, 0)
        let g = TorusGrid::cube(3, 8).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        u.add_cos(0, [1, 0, 0], 1.0).unwrap();
        assert!(leray_project(&u).unwrap().max_amplitude() < 1e-15);
        let mut s = SpectralField::zeros(g, 3);
        s.add_sin(0, [1, 0, 0], 1.0).unwrap();
        assert!(leray_project(&s).unwrap().max_amplitude() < 1e-15);
    }

    #[test]
    fn divergence_free_field_is_fixed() {
        let g = TorusGrid::cube(3, 8).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        u.add_sin(0, [0, 1, 0], 1.0).unwrap();
        let pu = leray_project(&u).unwrap();
        assert!(pu.sub(&u).unwrap().max_amplitude() < 1e-12);
    }

    #[test]
    fn three_on_two_keeps_third_component() {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::random(g, 3, 5.0, 0.0, &mut rng(1));
        let p = leray_project(&u).unwrap();
        assert_eq!(p.component(2), u.component(2));
        assert!(horizontal_components(&p).unwrap().divergence_ratio().unwrap() < 1e-12);
        u = SpectralField::random(TorusGrid::cube(3, 8).unwrap(), 1, 3.0, 0.0, &mut rng(2));
        assert!(matches!(leray_project(&u), Err(Error::Dimension(_))));
    }

    #[test]
    fn heat_scales_single_mode() {
        let g = TorusGrid::cube(3, 8).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        u.add_cos(2, [1, 2, 0], 1.0).unwrap();
        let h = apply_heat(&u, 0.1).unwrap();
        let ratio = h.coeff(2, [1, 2, 0]).unwrap().re / u.coeff(2, [1, 2, 0]).unwrap().re;
        assert!((ratio - libm::exp(-0.5)).abs() < 1e-15);
        assert_eq!(apply_heat(&u, 0.0).unwrap(), u);
        assert!(matches!(apply_heat(&u, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn horizontal_heat_ignores_vertical_wavenumber() {
        let g = TorusGrid::cube(3, 8).unwrap();
        let mut u = SpectralField::zeros(g, 1);
        u.add_cos(0, [1, 0, 3], 1.0).unwrap();
        let h = apply_heat_axes(&u, 0.2, HeatAxes::Horizontal).unwrap();
        let r = h.coeff(0, [1, 0, 3]).unwrap().re / 0.5;
        assert!((r - libm::exp(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn advect_rejects_compressible_velocity() {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::zeros(g, 2);
        u.add_sin(0, [1, 0, 0], 1.0).unwrap();
        assert!(matches!(advect(&u, &u), Err(Error::Contract(_))));
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        let g = TorusGrid::cube(2, 32).unwrap();
        let mut u = SpectralField::zeros(g, 2);
        // (sin x1 cos x2, -cos x1 sin x2)
        u.add_sin(0, [1, 1, 0], 0.5).unwrap();
        u.add_sin(0, [1, -1, 0], 0.5).unwrap();
        u.add_sin(1, [1, 1, 0], -0.5).unwrap();
        u.add_sin(1, [-1, 1, 0], -0.5).unwrap();
        assert!(u.divergence_ratio().unwrap() < 1e-15);
        let nl = leray_project(&advect(&u, &u).unwrap()).unwrap();
        assert!(nl.max_amplitude() < 1e-10);
        assert!(advect(&u, &u).unwrap().max_amplitude() > 0.1);
    }

    #[test]
    fn beltrami_nonlinearity_is_a_gradient() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        // (sin x3 + cos x2, sin x1 + cos x3, sin x2 + cos x1)
        u.add_sin(0, [0, 0, 1], 1.0).unwrap();
        u.add_cos(0, [0, 1, 0], 1.0).unwrap();
        u.add_sin(1, [1, 0, 0], 1.0).unwrap();
        u.add_cos(1, [0, 0, 1], 1.0).unwrap();
        u.add_sin(2, [0, 1, 0], 1.0).unwrap();
        u.add_cos(2, [1, 0, 0], 1.0).unwrap();
        let nl = leray_project(&advect(&u, &u).unwrap()).unwrap();
        assert!(nl.max_amplitude() < 1e-10);
    }

    #[test]
    fn q_form_matches_twice_projected_advection() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let u = leray_project(&SpectralField::random(g, 3, 4.0, 1.0, &mut rng(9))).unwrap();
        let q = q_form(&u, &u).unwrap();
        let a = leray_project(&advect(&u, &u).unwrap()).unwrap().scaled(2.0);
        assert!(q.sub(&a).unwrap().max_amplitude() < 1e-12 * a.max_amplitude().max(1.0));
        let s = projected_self_flux(&u).unwrap().scaled(2.0);
        assert!(q.sub(&s).unwrap().max_amplitude() < 1e-13);
        let zero = SpectralField::zeros(g, 3);
        assert!(q_form(&u, &zero).unwrap().is_zero());
    }

    #[test]
    fn q_form_is_symmetric_and_scales_exactly() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let a = SpectralField::random(g, 3, 5.0, 1.0, &mut rng(21));
        let b = SpectralField::random(g, 3, 5.0, 1.0, &mut rng(22));
        assert_eq!(q_form(&a, &b).unwrap(), q_form(&b, &a).unwrap());
        let lhs = q_form(&a.scaled(-4.0), &b).unwrap();
        let rhs = q_form(&a, &b).unwrap().scaled(-4.0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn energy_identity_of_projected_advection() {
        let g = TorusGrid::cube(3, 16).unwrap();
        for seed in 0..5 {
            let u = leray_project(&SpectralField::random(g, 3, 5.0, 1.0, &mut rng(seed))).unwrap();
            let nl = projected_self_flux(&u).unwrap();
            let e = inner_product(&nl, &u).unwrap();
            let scale = l2_norm(&nl) * l2_norm(&u);
            assert!(e.abs() <= 1e-10 * scale.max(1.0), "seed {seed}: {e}");
        }
    }

    #[test]
    fn mean_and_tilde_split() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        u.add_cos(0, [1, 2, 0], 1.0).unwrap();
        let m = horizontal_mean(&u).unwrap();
        assert_eq!(embed(&m, &g).unwrap(), u);
        assert!(tilde_part(&u).unwrap().is_zero());

        let mut w = SpectralField::zeros(g, 3);
        w.add_cos(1, [1, 0, 4], 1.0).unwrap();
        assert!(horizontal_mean(&w).unwrap().is_zero());
        assert_eq!(tilde_part(&w).unwrap(), w);

        let g2 = TorusGrid::cube(2, 16).unwrap();
        assert!(matches!(
            horizontal_mean(&SpectralField::zeros(g2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
