//! The discrete torus `(R/2πZ)^d` and its Fourier lattice.
//!
//! Axis `a` holds `n[a]` points (a power of two). Storage index `i` maps to the
//! signed lattice index `m ∈ (-n/2, n/2]` and to the wavenumber `k = s[a]·m`,
//! where `s[a] ≥ 1` is the axis stride. A stride `s > 1` represents fields that
//! are `2π/s`-periodic along that axis exactly: the physical grid then covers
//! one period cell and all integrals over the full torus are recovered from
//! cell averages.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dim: usize,
    n: [usize; 3],
    stride: [usize; 3],
    dealias_num: usize,
    dealias_den: usize,
}

impl TorusGrid {
    pub const MIN_RESOLUTION: usize = 8;

    /// Grid with the given per-axis resolutions, unit strides and 2/3 dealiasing.
    pub fn new(shape: &[usize]) -> Result<Self> {
        let dim = shape.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::Dimension(format!("torus dimension must be 2 or 3, got {dim}")));
        }
        let mut n = [1usize; 3];
        for (a, &na) in shape.iter().enumerate() {
            if !na.is_power_of_two() || na < Self::MIN_RESOLUTION {
                return Err(Error::Domain(format!(
                    "resolution {na} on axis {a} must be a power of two >= {}",
                    Self::MIN_RESOLUTION
                )));
            }
            n[a] = na;
        }
        Ok(Self {
            dim,
            n,
            stride: [1; 3],
            dealias_num: 2,
            dealias_den: 3,
        })
    }

    pub fn cube(dim: usize, resolution: usize) -> Result<Self> {
        let shape = [resolution; 3];
        Self::new(&shape[..dim])
    }

    /// Sets the lattice stride of one axis (see module docs).
    pub fn with_stride(mut self, axis: usize, stride: usize) -> Result<Self> {
        if axis >= self.dim || stride == 0 {
            return Err(Error::Domain(format!("invalid stride {stride} on axis {axis}")));
        }
        self.stride[axis] = stride;
        Ok(self)
    }

    pub fn with_dealias(mut self, num: usize, den: usize) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::Domain(format!("dealias fraction {num}/{den} not in (0, 1]")));
        }
        self.dealias_num = num;
        self.dealias_den = den;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn resolution(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.stride[axis]
    }

    pub fn strides(&self) -> &[usize] {
        &self.stride[..self.dim]
    }

    pub fn dealias_fraction(&self) -> (usize, usize) {
        (self.dealias_num, self.dealias_den)
    }

    pub fn total(&self) -> usize {
        self.shape().iter().product()
    }

    /// Signed lattice index of storage index `i` on `axis`.
    #[inline]
    pub fn signed_index(&self, axis: usize, i: usize) -> i64 {
        let n = self.n[axis];
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    #[inline]
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        (self.stride[axis] as i64 * self.signed_index(axis, i)) as f64
    }

    /// Storage index of lattice index `m`, if representable.
    pub fn storage_index(&self, axis: usize, m: i64) -> Option<usize> {
        let n = self.n[axis] as i64;
        if m > n / 2 || m <= -n / 2 {
            return None;
        }
        Some(if m >= 0 { m as usize } else { (m + n) as usize })
    }

    /// Storage index of wavenumber `k` (must be a multiple of the axis stride).
    pub fn index_of_wavenumber(&self, axis: usize, k: i64) -> Option<usize> {
        let s = self.stride[axis] as i64;
        if k % s != 0 {
            return None;
        }
        self.storage_index(axis, k / s)
    }

    pub fn axis_wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    #[inline]
    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.n[axis] / 2
    }

    /// Largest retained `|m|` on `axis` under the dealiasing rule.
    pub fn dealias_cutoff(&self, axis: usize) -> i64 {
        ((self.dealias_num * self.n[axis]) / (2 * self.dealias_den)) as i64
    }

    #[inline]
    pub fn flat(&self, idx: [usize; 3]) -> usize {
        match self.dim {
            2 => idx[0] * self.n[1] + idx[1],
            _ => (idx[0] * self.n[1] + idx[1]) * self.n[2] + idx[2],
        }
    }

    pub fn unflat(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    /// Flat index of the mode `-k` for the mode stored at `flat`.
    pub fn conjugate_flat(&self, flat: usize) -> usize {
        let idx = self.unflat(flat);
        let mut neg = [0usize; 3];
        for a in 0..self.dim {
            neg[a] = (self.n[a] - idx[a]) % self.n[a];
        }
        self.flat(neg)
    }

    /// `conjugate_flat` for every stored mode.
    pub fn conjugate_table(&self) -> Vec<usize> {
        let mut out = alloc::vec![0usize; self.total()];
        self.for_each_index(|f, idx| {
            let mut neg = [0usize; 3];
            for a in 0..self.dim {
                neg[a] = (self.n[a] - idx[a]) % self.n[a];
            }
            out[f] = self.flat(neg);
        });
        out
    }

    /// Calls `f(flat, idx)` for every storage multi-index in storage order.
    #[inline]
    pub fn for_each_index<F: FnMut(usize, [usize; 3])>(&self, mut f: F) {
        let n2 = if self.dim == 2 { 1 } else { self.n[2] };
        let mut flat = 0;
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..n2 {
                    f(flat, [i, j, k]);
                    flat += 1;
                }
            }
        }
    }

    /// Calls `f(flat, k)` for every stored mode in storage order.
    #[inline]
    pub fn for_each_mode<F: FnMut(usize, [f64; 3])>(&self, mut f: F) {
        let k0 = self.axis_wavenumbers(0);
        let k1 = self.axis_wavenumbers(1);
        if self.dim == 2 {
            let mut flat = 0;
            for &a in &k0 {
                for &b in &k1 {
                    f(flat, [a, b, 0.0]);
                    flat += 1;
                }
            }
        } else {
            let k2 = self.axis_wavenumbers(2);
            let mut flat = 0;
            for &a in &k0 {
                for &b in &k1 {
                    for &c in &k2 {
                        f(flat, [a, b, c]);
                        flat += 1;
                    }
                }
            }
        }
    }

    /// `|k|²` for every stored mode.
    pub fn k_squared(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.total()];
        self.for_each_mode(|i, k| out[i] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        out
    }

    /// 1.0 where the mode survives dealiasing, 0.0 elsewhere.
    pub fn dealias_mask(&self) -> Vec<f64> {
        let keep: Vec<Vec<bool>> = (0..self.dim)
            .map(|a| {
                let c = self.dealias_cutoff(a);
                (0..self.n[a]).map(|i| self.signed_index(a, i).abs() <= c).collect()
            })
            .collect();
        let mut out = alloc::vec![0.0; self.total()];
        self.for_each_index(|flat, idx| {
            if (0..self.dim).all(|a| keep[a][idx[a]]) {
                out[flat] = 1.0;
            }
        });
        out
    }

    /// Largest `|k|` over the stored lattice.
    pub fn max_wavenumber(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let k = (self.stride[a] * self.n[a] / 2) as f64;
            s += k * k;
        }
        s.sqrt()
    }

    /// Number of points per `2π` along the axis if the stride were unrolled.
    pub fn effective_resolution(&self, axis: usize) -> usize {
        self.n[axis] * self.stride[axis]
    }

    /// The horizontal (first two axes) grid of a 3D grid.
    pub fn horizontal(&self) -> Result<Self> {
        if self.dim != 3 {
            return Err(Error::Dimension("horizontal grid requires a 3D grid".into()));
        }
        let mut g = *self;
        g.dim = 2;
        g.n[2] = 1;
        g.stride[2] = 1;
        Ok(g)
    }

    /// 3D grid extending this 2D grid with a vertical axis.
    pub fn extend_vertical(&self, n3: usize, stride3: usize) -> Result<Self> {
        if self.dim != 2 {
            return Err(Error::Dimension("vertical extension requires a 2D grid".into()));
        }
        if !n3.is_power_of_two() || n3 < Self::MIN_RESOLUTION || stride3 == 0 {
            return Err(Error::Domain(format!("invalid vertical axis n3 = {n3}, stride = {stride3}")));
        }
        let mut g = *self;
        g.dim = 3;
        g.n[2] = n3;
        g.stride[2] = stride3;
        Ok(g)
    }

    /// Same lattice with every axis resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = *self;
        for a in 0..self.dim {
            g.n[a] *= factor;
        }
        g
    }

    /// Lebesgue measure of the full torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * core::f64::consts::PI).powi(self.dim as i32)
    }

    pub fn ensure_same(&self, other: &TorusGrid) -> Result<()> {
        if self.dim != other.dim || self.n != other.n || self.stride != other.stride {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_indexing() {
        let g = TorusGrid::cube(2, 8).unwrap();
        let ms: Vec<i64> = (0..8).map(|i| g.signed_index(0, i)).collect();
        assert_eq!(ms, [0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.storage_index(0, -3), Some(5));
        assert_eq!(g.storage_index(0, -4), None);
        assert_eq!(g.dealias_cutoff(0), 2);
        let flat = g.flat([1, 6, 0]);
        assert_eq!(g.conjugate_flat(flat), g.flat([7, 2, 0]));
    }

    #[test]
    fn stride_scales_wavenumbers() {
        let g = TorusGrid::new(&[8, 8, 8]).unwrap().with_stride(2, 32).unwrap();
        assert_eq!(g.wavenumber(2, 1), 32.0);
        assert_eq!(g.wavenumber(2, 7), -32.0);
        assert_eq!(g.index_of_wavenumber(2, 64), Some(2));
        assert_eq!(g.index_of_wavenumber(2, 33), None);
        assert_eq!(g.effective_resolution(2), 256);
    }

    #[test]
    fn rejects_bad_resolutions() {
        assert!(TorusGrid::new(&[12, 16]).is_err());
        assert!(TorusGrid::new(&[4, 4]).is_err());
        assert!(TorusGrid::new(&[8]).is_err());
    }

    #[test]
    fn dealias_mask_counts() {
        let g = TorusGrid::cube(3, 32).unwrap();
        let kept = g.dealias_mask().iter().filter(|&&m| m > 0.0).count();
        assert_eq!(kept, 21 * 21 * 21);
    }
}
