//! Beurling and Cauchy transforms on a zero-padded grid, by FFT. The Beurling
//! transform is a Fourier multiplier; the Cauchy transform convolves with the
//! exact cell integrals of its kernel.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::par::{self, Exec};
use crate::{c64, C64};

/// Transforms on an `n x n` grid of spacing `h`, embedded in a `2n x 2n`
/// periodic grid so the circular convolution equals the linear one.
pub struct Spectral {
    n: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    beurling: Vec<C64>,
    h: f64,
    exec: Exec,
}

/// `∫∫ dA/ζ` over `[x0,x1] x [y0,y1]`.
pub(crate) fn cell_inv(x0: f64, x1: f64, y0: f64, y1: f64) -> C64 {
    // antiderivatives of x/r² and y/r²
    let xlogt = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (b / a).atan() };
    let ylog = |a: f64, b: f64| {
        let r2 = a * a + b * b;
        if r2 == 0.0 { 0.0 } else { 0.5 * b * r2.ln() }
    };
    let re = |x: f64, y: f64| ylog(x, y) + xlogt(x, y) - y;
    let im = |x: f64, y: f64| ylog(y, x) + xlogt(y, x) - x;
    let rect = |g: &dyn Fn(f64, f64) -> f64| g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0);
    c64(rect(&re), -rect(&im))
}

impl Spectral {
    /// Beurling multiplier `conj(κ)/κ` with the zero mode dropped.
    pub fn new(n: usize, h: f64, exec: Exec) -> Self {
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let freq = |j: usize| {
            let s = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
            2.0 * PI * s / (m as f64 * h)
        };
        let mut beurling = vec![c64(0.0, 0.0); m * m];
        for r in 0..m {
            let ky = freq(r);
            for c in 0..m {
                let kappa = c64(freq(c), ky);
                if kappa.norm() > 0.0 {
                    beurling[r * m + c] = kappa.conj() / kappa;
                }
            }
        }
        Spectral { n, m, fwd, inv, beurling, h, exec }
    }

    /// Beurling transform on the full padded grid, for norm checks.
    pub fn beurling_padded(&self, padded: &[C64]) -> Vec<C64> {
        let mut buf = padded.to_vec();
        self.fft2(&mut buf, false);
        for (b, s) in buf.iter_mut().zip(&self.beurling) {
            *b *= s;
        }
        self.fft2(&mut buf, true);
        buf
    }

    pub fn padded_len(&self) -> usize {
        self.m
    }

    /// Beurling transform of `h` (row-major `n x n`), returned on the same grid.
    pub fn beurling(&self, h: &[C64]) -> Vec<C64> {
        self.apply(h, &self.beurling)
    }

    /// Cauchy transform `(1/π) ∫ h(ζ)/(z - ζ)`.
    /// Cauchy transform of the cellwise-constant density with values `h`,
    /// by exact cell integrals of the kernel.
    pub fn cauchy(&self, h: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let offset = |j: usize| if j < n { j as f64 } else { j as f64 - m as f64 };
        let hs = self.h;
        let mut kern = vec![c64(0.0, 0.0); m * m];
        par::for_each_chunk_mut(self.exec, &mut kern, m, |k, row| {
            if k == n {
                return;
            }
            let dy = offset(k);
            for (c, v) in row.iter_mut().enumerate() {
                if c != n {
                    let dx = offset(c);
                    *v = cell_inv((dx - 0.5) * hs, (dx + 0.5) * hs, (dy - 0.5) * hs, (dy + 0.5) * hs) / PI;
                }
            }
        });
        self.fft2(&mut kern, false);
        self.apply(h, &kern)
    }


    fn apply(&self, h: &[C64], symbol: &[C64]) -> Vec<C64> {
        let (n, m) = (self.n, self.m);
        let mut buf = vec![c64(0.0, 0.0); m * m];
        for r in 0..n {
            buf[r * m..r * m + n].copy_from_slice(&h[r * n..(r + 1) * n]);
        }
        self.fft2(&mut buf, false);
        for (b, s) in buf.iter_mut().zip(symbol) {
            *b *= s;
        }
        self.fft2(&mut buf, true);
        let mut out = vec![c64(0.0, 0.0); n * n];
        for r in 0..n {
            out[r * n..(r + 1) * n].copy_from_slice(&buf[r * m..r * m + n]);
        }
        out
    }

    /// In-place 2D transform; the inverse is normalised.
    fn fft2(&self, buf: &mut [C64], inverse: bool) {
        let m = self.m;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let rows = |data: &mut [C64]| {
            par::for_each_chunk_mut(self.exec, data, m * 16, |_, chunk| {
                let mut scratch = vec![c64(0.0, 0.0); plan.get_inplace_scratch_len()];
                for row in chunk.chunks_mut(m) {
                    plan.process_with_scratch(row, &mut scratch);
                }
            });
        };
        rows(buf);
        transpose(buf, m);
        rows(buf);
        transpose(buf, m);
        if inverse {
            let s = 1.0 / (m * m) as f64;
            for v in buf.iter_mut() {
                *v *= s;
            }
        }
    }
}

fn transpose(a: &mut [C64], m: usize) {
    const B: usize = 32;
    for bi in (0..m).step_by(B) {
        for bj in (bi..m).step_by(B) {
            for i in bi..(bi + B).min(m) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + B).min(m) {
                    a.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}
