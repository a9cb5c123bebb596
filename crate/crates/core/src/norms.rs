//! Lebesgue and Sobolev norms with the unnormalised measure `dx` on
//! `[0, 2π)^d`, so that `‖u‖²_{L²} = (2π)^d Σ_k |û(k)|²`.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::physical::to_physical;
use crate::sum::{max_of, pairwise_sum, pairwise_sum_by};

/// Oversampling used for `L^∞` (sup of a trigonometric polynomial).
pub const LINF_OVERSAMPLE: usize = 4;
/// Oversampling used for finite-`p` quadrature.
pub const LP_OVERSAMPLE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    L2,
    /// `L^p`, `1 ≤ p < ∞`; `p = ∞` is accepted and treated as [`Norm::Linf`].
    Lp(f64),
    Linf,
    /// `H^s` (homogeneous; fields are mean-free).
    Hs(f64),
}

pub fn norm(u: &SpectralField, which: Norm) -> Result<f64> {
    match which {
        Norm::L2 => Ok(l2_norm(u)),
        Norm::Lp(p) => lp_norm(u, p),
        Norm::Linf => Ok(linf_norm(u)),
        Norm::Hs(s) => Ok(hs_norm(u, s)),
    }
}

pub fn l2_norm(u: &SpectralField) -> f64 {
    let c = u.coeffs();
    (u.grid().volume() * pairwise_sum_by(c.len(), &|i| c[i].norm_sqr())).sqrt()
}

/// `(2π)^d Σ |k|^{2s} |û(k)|²`, square-rooted.
pub fn hs_norm(u: &SpectralField, s: f64) -> f64 {
    let grid = *u.grid();
    let mut weight = alloc::vec![0.0; grid.total()];
    grid.for_each_mode(|f, k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 > 0.0 {
            weight[f] = k2.powf(s);
        }
    });
    let n = grid.total();
    let c = u.coeffs();
    let total = pairwise_sum_by(c.len(), &|i| weight[i % n] * c[i].norm_sqr());
    (grid.volume() * total).sqrt()
}

/// `L^p` norm of the pointwise Euclidean magnitude, default oversampling.
pub fn lp_norm(u: &SpectralField, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(linf_norm(u));
    }
    lp_norm_with(u, p, LP_OVERSAMPLE)
}

pub fn lp_norm_with(u: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(linf_norm_with(u, oversample));
    }
    if u.is_zero() {
        return Ok(0.0);
    }
    let mag = to_physical(u, oversample.max(1)).magnitude();
    Ok(lp_of_samples(&mag, p, u.grid().volume()))
}

/// `(V · mean |x|^p)^{1/p}` over physical samples, `p = ∞` gives the max.
pub fn lp_of_samples(mag: &[f64], p: f64, volume: f64) -> f64 {
    if p.is_infinite() {
        return max_of(mag.iter().copied());
    }
    let scale = max_of(mag.iter().copied());
    if scale == 0.0 {
        return 0.0;
    }
    // Normalise by the max so large p does not overflow.
    let terms: alloc::vec::Vec<f64> = mag.iter().map(|&m| (m / scale).powf(p)).collect();
    let mean = pairwise_sum(&terms) / mag.len() as f64;
    scale * (volume * mean).powf(1.0 / p)
}

pub fn linf_norm(u: &SpectralField) -> f64 {
    linf_norm_with(u, LINF_OVERSAMPLE)
}

pub fn linf_norm_with(u: &SpectralField, oversample: usize) -> f64 {
    if u.is_zero() {
        return 0.0;
    }
    max_of(to_physical(u, oversample.max(1)).magnitude())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::ops::derivative;
    use core::f64::consts::PI;
    use rand::SeedableRng;

    fn sin_x1() -> SpectralField {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::zeros(g, 1);
        u.add_sin(0, [1, 0, 0], 1.0).unwrap();
        u
    }

    #[test]
    fn l2_of_sine_on_t2() {
        // ∫ sin² x1 over [0,2π)² = 2π².
        let u = sin_x1();
        assert!((l2_norm(&u) - PI * 2f64.sqrt()).abs() < 1e-13);
        assert!((lp_norm(&u, 2.0).unwrap() - PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linf_of_sine() {
        let u = sin_x1();
        assert!((linf_norm(&u) - 1.0).abs() < 1e-6);
        assert!((norm(&u, Norm::Lp(f64::INFINITY)).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn p_below_one_is_rejected() {
        assert!(matches!(lp_norm(&sin_x1(), 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn h1_is_gradient_l2() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..5 {
            let u = SpectralField::random(g, 3, 6.0, 1.0, &mut rng);
            let grad2: f64 = (0..3)
                .map(|a| l2_norm(&derivative(&u, a).unwrap()).powi(2))
                .sum();
            let h1 = hs_norm(&u, 1.0);
            assert!((h1 * h1 - grad2).abs() <= 1e-12 * grad2);
        }
    }
}
