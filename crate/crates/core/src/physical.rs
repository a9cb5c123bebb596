//! Transforms between Fourier coefficients and physical-space samples.
//!
//! Real fields are transformed two at a time: the coefficients of `a` and `b`
//! are packed as `â + i b̂`, one complex transform is performed, and the two
//! real signals are read back from the real and imaginary parts (forward:
//! separated with the Hermitian symmetry of the lattice).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fft::FftNd;
use crate::field::SpectralField;
use crate::grid::TorusGrid;

/// Sample values of each component on a (possibly refined) physical grid.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub grid: TorusGrid,
    pub comps: Vec<Vec<f64>>,
}

impl PhysicalField {
    pub fn len(&self) -> usize {
        self.grid.total()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pointwise Euclidean magnitude `|u(x)|`.
    pub fn magnitude(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for comp in &self.comps {
            for (o, v) in out.iter_mut().zip(comp) {
                *o += v * v;
            }
        }
        for o in &mut out {
            *o = libm::sqrt(*o);
        }
        out
    }
}

/// Destination indices (with weights) of source storage index `i` when the
/// axis is refined by `factor`; Nyquist modes are split symmetrically.
fn pad_targets(n: usize, factor: usize, i: usize) -> [(usize, f64); 2] {
    let nf = n * factor;
    if factor == 1 {
        return [(i, 1.0), (usize::MAX, 0.0)];
    }
    if i == n / 2 {
        return [(n / 2, 0.5), (nf - n / 2, 0.5)];
    }
    let dest = if i < n / 2 { i } else { nf - (n - i) };
    [(dest, 1.0), (usize::MAX, 0.0)]
}

/// Scatters one or two coefficient arrays (packed as `a + i b`) onto the
/// refined grid.
fn pack_padded(
    grid: &TorusGrid,
    fine: &TorusGrid,
    factor: usize,
    a: &[Complex64],
    b: Option<&[Complex64]>,
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); fine.total()];
    let i_unit = Complex64::new(0.0, 1.0);
    if factor == 1 {
        for (f, o) in out.iter_mut().enumerate() {
            *o = match b {
                Some(b) => a[f] + i_unit * b[f],
                None => a[f],
            };
        }
        return out;
    }
    let d = grid.dim();
    let targets: Vec<Vec<[(usize, f64); 2]>> = (0..d)
        .map(|ax| {
            let n = grid.resolution(ax);
            (0..n).map(|i| pad_targets(n, factor, i)).collect()
        })
        .collect();
    grid.for_each_index(|f, idx| {
        let v = match b {
            Some(b) => a[f] + i_unit * b[f],
            None => a[f],
        };
        if v.re == 0.0 && v.im == 0.0 {
            return;
        }
        for mask in 0..(1usize << d) {
            let mut dest = [0usize; 3];
            let mut w = 1.0;
            let mut valid = true;
            for ax in 0..d {
                let (di, dw) = targets[ax][idx[ax]][(mask >> ax) & 1];
                if di == usize::MAX {
                    valid = false;
                    break;
                }
                dest[ax] = di;
                w *= dw;
            }
            if valid {
                out[fine.flat(dest)] += v * w;
            }
        }
    });
    out
}

/// Evaluates all components on the grid refined by `factor` (1 = native grid).
pub fn to_physical(field: &SpectralField, factor: usize) -> PhysicalField {
    let grid = *field.grid();
    let fine = grid.refined(factor);
    let plan = FftNd::new(fine.shape());
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(field.ncomp());
    let mut c = 0;
    while c < field.ncomp() {
        let a = field.component(c);
        let b = if c + 1 < field.ncomp() {
            Some(field.component(c + 1))
        } else {
            None
        };
        let mut buf = pack_padded(&grid, &fine, factor, a, b);
        plan.inverse(&mut buf);
        comps.push(buf.iter().map(|z| z.re).collect());
        if b.is_some() {
            comps.push(buf.iter().map(|z| z.im).collect());
        }
        c += 2;
    }
    PhysicalField { grid: fine, comps }
}

/// Forward transform of real samples on the native grid of `grid`.
pub fn to_spectral(grid: TorusGrid, comps: &[Vec<f64>]) -> SpectralField {
    let coeffs: Vec<Complex64> = spectral_components(grid, comps).concat();
    SpectralField::from_coeffs(grid, comps.len(), coeffs).expect("1 to 3 components")
}

/// Normalised forward transforms of any number of real sample arrays.
pub fn spectral_components(grid: TorusGrid, comps: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let n = grid.total();
    let plan = FftNd::new(grid.shape());
    let ncomp = comps.len();
    let mut out = Vec::with_capacity(ncomp);
    let scale = 1.0 / n as f64;
    let conj_idx = grid.conjugate_table();
    let mut c = 0;
    while c < ncomp {
        let pair = c + 1 < ncomp;
        let mut buf: Vec<Complex64> = if pair {
            comps[c]
                .iter()
                .zip(&comps[c + 1])
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect()
        } else {
            comps[c].iter().map(|&x| Complex64::new(x, 0.0)).collect()
        };
        plan.forward(&mut buf);
        if pair {
            let mut ca = vec![Complex64::new(0.0, 0.0); n];
            let mut cb = vec![Complex64::new(0.0, 0.0); n];
            for f in 0..n {
                let z = buf[f];
                let zc = buf[conj_idx[f]].conj();
                ca[f] = (z + zc) * (0.5 * scale);
                // (z - zc) / 2i
                let d = (z - zc) * (0.5 * scale);
                cb[f] = Complex64::new(d.im, -d.re);
            }
            out.push(ca);
            out.push(cb);
        } else {
            for z in &mut buf {
                *z *= scale;
            }
            out.push(buf);
        }
        c += 2;
    }
    out
}
