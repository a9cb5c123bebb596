//! Real, mean-free vector fields stored by their Fourier coefficients.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;

/// `u(x) = Σ_k û(k) e^{ik·x}` per component, coefficients component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid, ncomp: usize) -> Self {
        assert!((1..=3).contains(&ncomp), "1 to 3 components supported");
        Self {
            grid,
            ncomp,
            coeffs: vec![Complex64::new(0.0, 0.0); ncomp * grid.total()],
        }
    }

    pub fn from_coeffs(grid: TorusGrid, ncomp: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(1..=3).contains(&ncomp) || coeffs.len() != ncomp * grid.total() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for {ncomp} components, got {}",
                ncomp * grid.total(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, ncomp, coeffs })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.total();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.total();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    fn flat_of(&self, k: [i64; 3]) -> Result<usize> {
        let mut idx = [0usize; 3];
        for (a, slot) in idx.iter_mut().enumerate().take(self.grid.dim()) {
            *slot = self.grid.index_of_wavenumber(a, k[a]).ok_or_else(|| {
                Error::Capacity(format!("wavenumber {k:?} not representable on the grid"))
            })?;
        }
        Ok(self.grid.flat(idx))
    }

    /// Coefficient of wavenumber `k` (integer vector).
    pub fn coeff(&self, c: usize, k: [i64; 3]) -> Result<Complex64> {
        Ok(self.component(c)[self.flat_of(k)?])
    }

    /// Adds the real wave `amp·e^{ik·x} + conj(amp)·e^{-ik·x}` to component `c`.
    pub fn add_wave(&mut self, c: usize, k: [i64; 3], amp: Complex64) -> Result<()> {
        let f = self.flat_of(k)?;
        let g = self.flat_of([-k[0], -k[1], -k[2]])?;
        let comp = self.component_mut(c);
        if f == g {
            comp[f] += amp + amp.conj();
        } else {
            comp[f] += amp;
            comp[g] += amp.conj();
        }
        Ok(())
    }

    /// Adds `a·cos(k·x)` to component `c`.
    pub fn add_cos(&mut self, c: usize, k: [i64; 3], a: f64) -> Result<()> {
        self.add_wave(c, k, Complex64::new(0.5 * a, 0.0))
    }

    /// Adds `a·sin(k·x)` to component `c`.
    pub fn add_sin(&mut self, c: usize, k: [i64; 3], a: f64) -> Result<()> {
        self.add_wave(c, k, Complex64::new(0.0, -0.5 * a))
    }

    pub fn ensure_compatible(&self, other: &SpectralField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.ncomp != other.ncomp {
            return Err(Error::Dimension(format!(
                "component counts differ: {} vs {}",
                self.ncomp, other.ncomp
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn scale(&mut self, alpha: f64) {
        for c in &mut self.coeffs {
            *c *= alpha;
        }
    }

    /// `self += alpha · x`.
    pub fn axpy(&mut self, alpha: f64, x: &SpectralField) -> Result<()> {
        self.ensure_compatible(x)?;
        for (a, b) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *a += b * alpha;
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Multiplies every component by a per-mode real factor.
    pub fn apply_multiplier(&mut self, factor: &[f64]) {
        let n = self.grid.total();
        debug_assert_eq!(factor.len(), n);
        for comp in self.coeffs.chunks_exact_mut(n) {
            for (c, &f) in comp.iter_mut().zip(factor) {
                *c *= f;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `max_k |û(k) - conj(û(-k))|` over all components.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.total();
        let mut worst = 0.0f64;
        let conj = self.grid.conjugate_table();
        for comp in self.coeffs.chunks_exact(n) {
            for f in 0..n {
                let g = conj[f];
                worst = worst.max((comp[f] - comp[g].conj()).norm());
            }
        }
        worst
    }

    /// Projects onto Hermitian-symmetric coefficients (real fields).
    pub fn symmetrize(&mut self) {
        let n = self.grid.total();
        let conj = self.grid.conjugate_table();
        for comp in self.coeffs.chunks_exact_mut(n) {
            for f in 0..n {
                let g = conj[f];
                if g < f {
                    continue;
                }
                let avg = (comp[f] + comp[g].conj()) * 0.5;
                comp[f] = avg;
                comp[g] = avg.conj();
            }
        }
    }

    pub fn mean(&self, c: usize) -> Complex64 {
        self.component(c)[0]
    }

    pub fn is_mean_free(&self) -> bool {
        (0..self.ncomp).all(|c| self.mean(c) == Complex64::new(0.0, 0.0))
    }

    pub fn remove_mean(&mut self) {
        for c in 0..self.ncomp {
            self.component_mut(c)[0] = Complex64::new(0.0, 0.0);
        }
    }

    /// Zeroes every mode outside the dealiasing box.
    pub fn dealias(&mut self) {
        let mask = self.grid.dealias_mask();
        self.apply_multiplier(&mask);
    }

    /// Divergence over the grid axes (`div_h` for the first two components on T²).
    pub fn divergence(&self) -> Result<SpectralField> {
        let d = self.grid.dim();
        if self.ncomp < d {
            return Err(Error::Dimension(format!(
                "divergence needs at least {d} components, field has {}",
                self.ncomp
            )));
        }
        let mut out = SpectralField::zeros(self.grid, 1);
        let n = self.grid.total();
        let coeffs = &self.coeffs;
        let dst = out.component_mut(0);
        self.grid.for_each_mode(|f, k| {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &kj) in k.iter().enumerate().take(d) {
                s += coeffs[j * n + f] * kj;
            }
            dst[f] = Complex64::new(-s.im, s.re);
        });
        Ok(out)
    }

    /// `max_k |Σ_j k_j û_j(k)| / max-amplitude`; zero for the zero field.
    pub fn divergence_ratio(&self) -> Result<f64> {
        let amp = self.max_amplitude();
        if amp == 0.0 {
            return Ok(0.0);
        }
        Ok(self.divergence()?.max_amplitude() / amp)
    }

    /// Random real, mean-free field with modes in `0 < |k| ≤ kmax`, spectrum
    /// decaying like `(1 + |k|²)^{-decay/2}`. Nyquist modes are left empty.
    pub fn random<R: Rng + ?Sized>(
        grid: TorusGrid,
        ncomp: usize,
        kmax: f64,
        decay: f64,
        rng: &mut R,
    ) -> Self {
        let mut out = SpectralField::zeros(grid, ncomp);
        let n = grid.total();
        let mut weights = vec![0.0; n];
        grid.for_each_mode(|f, k| {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let idx = grid.unflat(f);
            let nyq = (0..grid.dim()).any(|a| grid.is_nyquist(a, idx[a]));
            if k2 > 0.0 && k2 <= kmax * kmax && !nyq {
                weights[f] = (1.0 + k2).powf(-0.5 * decay);
            }
        });
        for c in 0..ncomp {
            let comp = out.component_mut(c);
            for (z, &w) in comp.iter_mut().zip(&weights) {
                if w > 0.0 {
                    let re: f64 = rng.gen_range(-1.0..1.0);
                    let im: f64 = rng.gen_range(-1.0..1.0);
                    *z = Complex64::new(re, im) * w;
                }
            }
        }
        out.symmetrize();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn waves_are_hermitian() {
        let g = TorusGrid::cube(2, 16).unwrap();
        let mut u = SpectralField::zeros(g, 2);
        u.add_sin(0, [1, 2, 0], 1.0).unwrap();
        u.add_cos(1, [-3, 1, 0], 2.0).unwrap();
        assert_eq!(u.hermitian_defect(), 0.0);
        assert!(u.is_mean_free());
        assert_eq!(u.coeff(0, [1, 2, 0]).unwrap(), Complex64::new(0.0, -0.5));
        assert_eq!(u.coeff(1, [3, -1, 0]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn unrepresentable_wave_is_capacity_error() {
        let g = TorusGrid::cube(3, 8).unwrap();
        let mut u = SpectralField::zeros(g, 3);
        assert!(matches!(u.add_cos(0, [0, 0, 9], 1.0), Err(Error::Capacity(_))));
    }

    #[test]
    fn random_fields_are_real_and_mean_free() {
        let g = TorusGrid::cube(3, 16).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let u = SpectralField::random(g, 3, 5.0, 1.0, &mut rng);
        assert!(u.hermitian_defect() < 1e-15);
        assert!(u.is_mean_free());
        assert!(u.max_amplitude() > 0.0);
    }

    #[test]
    fn divergence_of_gradient_like_field() {
        // u = (cos x1, 0): div u = -sin x1.
        let g = TorusGrid::cube(2, 8).unwrap();
        let mut u = SpectralField::zeros(g, 2);
        u.add_cos(0, [1, 0, 0], 1.0).unwrap();
        let d = u.divergence().unwrap();
        let mut expect = SpectralField::zeros(g, 1);
        expect.add_sin(0, [1, 0, 0], -1.0).unwrap();
        assert!(d.sub(&expect).unwrap().max_amplitude() < 1e-15);
    }
}
