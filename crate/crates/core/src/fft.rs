//! Radix-2 complex FFT for power-of-two lengths, plus a row-major N-d driver.
//!
//! Strided axes are transformed "block-wise": the butterflies of an axis of
//! length `n` with inner stride `b` act on whole contiguous rows of length `b`,
//! so no gather/scatter pass is needed.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct Fft1d {
    n: usize,
    rev: Vec<u32>,
    /// `exp(-2πi k / n)` for `k < n/2`.
    twiddles: Vec<Complex64>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length must be a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        Self { n, rev, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalised transform of every length-`n` sequence laid out as
    /// `[outer][n][inner]` in `data`. `inverse` uses `exp(+2πi ...)`.
    pub fn process_strided(&self, data: &mut [Complex64], inner: usize, inverse: bool) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let span = n * inner;
        debug_assert_eq!(data.len() % span, 0);
        for chunk in data.chunks_exact_mut(span) {
            if inner == 1 {
                self.process_contiguous(chunk, inverse);
            } else {
                self.process_blocks(chunk, inner, inverse);
            }
        }
    }

    fn process_contiguous(&self, x: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.rev[i] as usize;
            if j > i {
                x.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = x[start + k];
                    let b = x[start + k + half] * w;
                    x[start + k] = a + b;
                    x[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn process_blocks(&self, x: &mut [Complex64], inner: usize, inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.rev[i] as usize;
            if j > i {
                let (lo, hi) = x.split_at_mut(j * inner);
                lo[i * inner..(i + 1) * inner].swap_with_slice(&mut hi[..inner]);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let ia = (start + k) * inner;
                    let ib = (start + k + half) * inner;
                    let (lo, hi) = x.split_at_mut(ib);
                    let ra = &mut lo[ia..ia + inner];
                    let rb = &mut hi[..inner];
                    for (a, b) in ra.iter_mut().zip(rb.iter_mut()) {
                        let t = *b * w;
                        let s = *a;
                        *a = s + t;
                        *b = s - t;
                    }
                }
            }
            len <<= 1;
        }
    }
}

/// Row-major N-d transform over a fixed shape.
#[derive(Debug, Clone)]
pub struct FftNd {
    shape: Vec<usize>,
    plans: Vec<Fft1d>,
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let plans = shape.iter().map(|&n| Fft1d::new(n)).collect();
        Self {
            shape: shape.to_vec(),
            plans,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn total(&self) -> usize {
        self.shape.iter().product()
    }

    /// Unnormalised forward transform (`exp(-i k·x)` kernel).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Unnormalised inverse transform (`exp(+i k·x)` kernel).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.total());
        let d = self.shape.len();
        for axis in (0..d).rev() {
            let inner: usize = self.shape[axis + 1..].iter().product();
            self.plans[axis].process_strided(data, inner, inverse);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let a = sign * 2.0 * PI * (j * k) as f64 / n as f64;
                    acc += v * Complex64::new(a.cos(), a.sin());
                }
                acc
            })
            .collect()
    }

    fn test_signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                Complex64::new((0.37 * t).sin() + 0.1 * t, (1.3 * t).cos())
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 4, 8, 16, 64] {
            let x = test_signal(n);
            for inverse in [false, true] {
                let mut y = x.clone();
                Fft1d::new(n).process_strided(&mut y, 1, inverse);
                let z = naive_dft(&x, inverse);
                for (a, b) in y.iter().zip(z.iter()) {
                    assert!((a - b).norm() < 1e-10 * n as f64, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn strided_axis_matches_contiguous() {
        // 8 x 4 array, transform along axis 0 (stride 4).
        let (n0, n1) = (8, 4);
        let x = test_signal(n0 * n1);
        let mut y = x.clone();
        Fft1d::new(n0).process_strided(&mut y, n1, false);
        for c in 0..n1 {
            let col: Vec<Complex64> = (0..n0).map(|r| x[r * n1 + c]).collect();
            let z = naive_dft(&col, false);
            for r in 0..n0 {
                assert!((y[r * n1 + c] - z[r]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn nd_round_trip() {
        let shape = [4usize, 8, 16];
        let plan = FftNd::new(&shape);
        let x = test_signal(plan.total());
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse(&mut y);
        let scale = 1.0 / plan.total() as f64;
        for (a, b) in x.iter().zip(y.iter()) {
            assert!((a - b * scale).norm() < 1e-12);
        }
        let mut single = vec![Complex64::new(0.0, 0.0); plan.total()];
        single[0] = Complex64::new(1.0, 0.0);
        plan.forward(&mut single);
        assert!(single.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }
}
