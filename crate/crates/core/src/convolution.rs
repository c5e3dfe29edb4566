//! Linear (non-circular) 2-D convolution of `n x n` fields with kernels
//! tabulated on the doubled `2n x 2n` offset lattice.
//!
//! Kernel offsets `(di, dj)` with `-n <= di, dj < n` are stored at
//! `((dj mod 2n) * 2n + (di mod 2n))`. Inputs are zero-padded to `2n`, so the
//! circular product on the doubled lattice equals the linear sum on the box.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub type Spectrum = Vec<Complex<f64>>;

pub struct PaddedConvolver {
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedConvolver").field("n", &self.n).finish()
    }
}

impl PaddedConvolver {
    pub fn new(n: usize) -> Self {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        Self { n, m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice slot of offset `(di, dj)`.
    pub fn offset_slot(&self, di: isize, dj: isize) -> usize {
        let m = self.m as isize;
        (dj.rem_euclid(m) * m + di.rem_euclid(m)) as usize
    }

    /// Builds a wrapped kernel table from `k(di, dj)`.
    pub fn tabulate(&self, k: impl Fn(isize, isize) -> f64) -> Vec<f64> {
        let n = self.n as isize;
        let mut table = vec![0.0; self.m * self.m];
        for dj in -n..n {
            for di in -n..n {
                table[self.offset_slot(di, dj)] = k(di, dj);
            }
        }
        table
    }

    pub fn kernel_spectrum(&self, table: &[f64]) -> Spectrum {
        assert_eq!(table.len(), self.m * self.m);
        let mut buf: Vec<Complex<f64>> = table.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward_2d(&mut buf, self.m);
        buf
    }

    /// Spectrum of a zero-padded `n x n` input.
    pub fn input_spectrum(&self, input: &[f64]) -> Spectrum {
        let (n, m) = (self.n, self.m);
        assert_eq!(input.len(), n * n);
        let mut buf = vec![Complex::new(0.0, 0.0); m * m];
        for j in 0..n {
            for i in 0..n {
                buf[j * m + i].re = input[j * n + i];
            }
        }
        self.forward_2d(&mut buf, n);
        buf
    }

    /// `sum_y K(x - y) f(y)` on the box, from precomputed spectra.
    pub fn apply(&self, input: &Spectrum, kernel: &Spectrum) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = input.iter().zip(kernel).map(|(a, b)| a * b).collect();
        self.inverse_2d(&mut buf);
        self.extract(&buf, |c| c.re)
    }

    /// Two real convolutions of one input in a single inverse transform.
    pub fn apply_pair(&self, input: &Spectrum, ka: &Spectrum, kb: &Spectrum) -> (Vec<f64>, Vec<f64>) {
        let i = Complex::new(0.0, 1.0);
        let mut buf: Vec<Complex<f64>> =
            input.iter().zip(ka.iter().zip(kb)).map(|(f, (a, b))| f * (a + i * b)).collect();
        self.inverse_2d(&mut buf);
        (self.extract(&buf, |c| c.re), self.extract(&buf, |c| c.im))
    }

    fn extract(&self, buf: &[Complex<f64>], part: impl Fn(&Complex<f64>) -> f64) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let scale = 1.0 / (m * m) as f64;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(part(&buf[j * m + i]) * scale);
            }
        }
        out
    }

    /// Row transforms on the first `rows` rows, transpose, then all rows.
    /// The result is the transposed spectrum; every spectrum in this module
    /// shares that layout.
    fn forward_2d(&self, buf: &mut [Complex<f64>], rows: usize) {
        let m = self.m;
        let mut scratch = vec![Complex::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(&mut buf[..rows * m], &mut scratch);
        transpose(buf, m);
        self.forward.process_with_scratch(buf, &mut scratch);
    }

    /// Inverse of [`Self::forward_2d`] (unnormalized); only rows `< n` of the
    /// final pass are needed.
    fn inverse_2d(&self, buf: &mut [Complex<f64>]) {
        let m = self.m;
        let mut scratch = vec![Complex::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        self.inverse.process_with_scratch(buf, &mut scratch);
        transpose(buf, m);
        self.inverse.process_with_scratch(&mut buf[..self.n * m], &mut scratch);
    }
}

fn transpose(buf: &mut [Complex<f64>], m: usize) {
    const BLOCK: usize = 32;
    for bi in (0..m).step_by(BLOCK) {
        for bj in (bi..m).step_by(BLOCK) {
            for r in bi..(bi + BLOCK).min(m) {
                let start = if bi == bj { r + 1 } else { bj };
                for c in start..(bj + BLOCK).min(m) {
                    buf.swap(r * m + c, c * m + r);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_linear_sum() {
        let n = 16;
        let conv = PaddedConvolver::new(n);
        let k = |di: isize, dj: isize| 1.0 + 0.1 * di as f64 - 0.03 * (dj * dj) as f64;
        let input: Vec<f64> = (0..n * n).map(|q| ((q * 37) % 11) as f64 - 4.0).collect();
        let ks = conv.kernel_spectrum(&conv.tabulate(k));
        let out = conv.apply(&conv.input_spectrum(&input), &ks);
        for (x, y) in [(0usize, 0usize), (5, 9), (15, 15), (15, 0)] {
            let mut direct = 0.0;
            for yj in 0..n {
                for yi in 0..n {
                    direct += k(x as isize - yi as isize, y as isize - yj as isize) * input[yj * n + yi];
                }
            }
            assert!((out[y * n + x] - direct).abs() < 1e-10 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn pair_matches_two_single_applications() {
        let n = 16;
        let conv = PaddedConvolver::new(n);
        let a = conv.kernel_spectrum(&conv.tabulate(|i, j| (i - j) as f64));
        let b = conv.kernel_spectrum(&conv.tabulate(|i, j| ((i * j) as f64).cos()));
        let input: Vec<f64> = (0..n * n).map(|q| (q as f64 * 0.37).sin()).collect();
        let s = conv.input_spectrum(&input);
        let (pa, pb) = conv.apply_pair(&s, &a, &b);
        let (sa, sb) = (conv.apply(&s, &a), conv.apply(&s, &b));
        for q in 0..n * n {
            assert!((pa[q] - sa[q]).abs() < 1e-11);
            assert!((pb[q] - sb[q]).abs() < 1e-11);
        }
    }
}
