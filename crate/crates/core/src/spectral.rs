//! Fast constant-coefficient solvers used as preconditioners.
//!
//! [`PeriodicSolver`] inverts the symmetric (conductivity) part of the
//! flux-form stencil on the periodic grid exactly, by 2D FFT. [`DirichletSolver`]
//! inverts the diagonal-conductivity five-point stencil on the box with zero
//! boundary values by a 2D sine transform.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::tensor::SpdTensor;

fn transpose(buf: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in (j + 1)..n {
            buf.swap(j * n + i, i * n + j);
        }
    }
}

/// Symbol of the conductivity part of the periodic flux stencil at
/// wavenumbers `(k1, k2)` on an `n × n` grid (dimensionless: the grid
/// spacing cancels between the gradient and the cell area).
pub fn periodic_symbol(a: &SpdTensor, n: usize, k1: usize, k2: usize) -> f64 {
    let t1 = 2.0 * PI * k1 as f64 / n as f64;
    let t2 = 2.0 * PI * k2 as f64 / n as f64;
    let s1 = (0.5 * t1).sin();
    let s2 = (0.5 * t2).sin();
    4.0 * a.a11 * s1 * s1 + 4.0 * a.a22 * s2 * s2 + 2.0 * a.a12 * t1.sin() * t2.sin()
}

/// Exact inverse of the constant-coefficient symmetric stencil on mean-zero
/// periodic grid functions.
pub struct PeriodicSolver {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    inv_symbol: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PeriodicSolver {
    pub fn new(a: &SpdTensor, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scale = 1.0 / (n * n) as f64;
        let mut inv_symbol = vec![0.0; n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                inv_symbol[k1 * n + k2] = scale / periodic_symbol(a, n, k1, k2);
            }
        }
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            inv_symbol,
            buf: vec![Complex64::new(0.0, 0.0); n * n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// `out = M⁻¹ r` (mean mode of `r` is discarded, `out` has zero mean).
    pub fn solve(&mut self, r: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (b, &v) in self.buf.iter_mut().zip(r) {
            *b = Complex64::new(v, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        transpose(&mut self.buf, n);
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (b, &s) in self.buf.iter_mut().zip(&self.inv_symbol) {
            *b *= s;
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        transpose(&mut self.buf, n);
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re;
        }
    }
}

/// Sine-transform solver for `a11 (−D²₁) + a22 (−D²₂)` (scaled like the flux
/// stencil) on the interior `(n−1) × (n−1)` block of an `n × n` array whose
/// first row and column are boundary nodes.
pub struct DirichletSolver {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    inv_symbol: Vec<f64>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
    work: Vec<f64>,
}

impl DirichletSolver {
    pub fn new(a11: f64, a22: f64, n: usize) -> Self {
        let m = n - 1;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * n);
        let lam = |k: usize| {
            let s = (PI * k as f64 / (2.0 * n as f64)).sin();
            4.0 * s * s
        };
        // forward and inverse DST-I together scale by (2/(m+1))² = (2/n)²
        let norm = (2.0 / n as f64).powi(2);
        let mut inv_symbol = vec![0.0; m * m];
        for k1 in 0..m {
            for k2 in 0..m {
                inv_symbol[k1 * m + k2] = norm / (a11 * lam(k1 + 1) + a22 * lam(k2 + 1));
            }
        }
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Self {
            n,
            fft,
            inv_symbol,
            line: vec![Complex64::new(0.0, 0.0); 2 * n],
            scratch,
            work: vec![0.0; m * m],
        }
    }

    fn dst_rows(&mut self) {
        let n = self.n;
        let m = n - 1;
        for row in self.work.chunks_mut(m) {
            self.line[0] = Complex64::new(0.0, 0.0);
            self.line[n] = Complex64::new(0.0, 0.0);
            for (j, &v) in row.iter().enumerate() {
                self.line[j + 1] = Complex64::new(v, 0.0);
                self.line[2 * n - 1 - j] = Complex64::new(-v, 0.0);
            }
            self.fft.process_with_scratch(&mut self.line, &mut self.scratch);
            for (k, v) in row.iter_mut().enumerate() {
                *v = -0.5 * self.line[k + 1].im;
            }
        }
    }

    fn transpose_work(&mut self) {
        let m = self.n - 1;
        for j in 0..m {
            for i in (j + 1)..m {
                self.work.swap(j * m + i, i * m + j);
            }
        }
    }

    /// `out = M_D⁻¹ r` on the interior block; boundary row and column of
    /// `out` are set to zero.
    pub fn solve(&mut self, r: &[f64], out: &mut [f64]) {
        let n = self.n;
        let m = n - 1;
        for j in 0..m {
            for i in 0..m {
                self.work[j * m + i] = r[(j + 1) * n + (i + 1)];
            }
        }
        self.dst_rows();
        self.transpose_work();
        self.dst_rows();
        for (w, s) in self.work.iter_mut().zip(&self.inv_symbol) {
            *w *= s;
        }
        self.dst_rows();
        self.transpose_work();
        self.dst_rows();
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..m {
            for i in 0..m {
                out[(j + 1) * n + (i + 1)] = self.work[j * m + i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_periodic(a: &SpdTensor, u: &[f64], n: usize) -> Vec<f64> {
        // reference application of the same stencil via direct Fourier sum
        let mut out = vec![0.0; n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                let sym = periodic_symbol(a, n, k1, k2);
                let (mut re, mut im) = (0.0, 0.0);
                for j in 0..n {
                    for i in 0..n {
                        let ph = -2.0 * PI * ((k1 * i + k2 * j) as f64) / n as f64;
                        re += u[j * n + i] * ph.cos();
                        im += u[j * n + i] * ph.sin();
                    }
                }
                for j in 0..n {
                    for i in 0..n {
                        let ph = 2.0 * PI * ((k1 * i + k2 * j) as f64) / n as f64;
                        out[j * n + i] += sym * (re * ph.cos() - im * ph.sin()) / (n * n) as f64;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn periodic_round_trip() {
        let n = 8;
        let a = SpdTensor::new(1.3, 0.4, 0.7).unwrap();
        let mut u: Vec<f64> = (0..n * n).map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.1).collect();
        let mean = u.iter().sum::<f64>() / (n * n) as f64;
        u.iter_mut().for_each(|v| *v -= mean);
        let f = laplacian_periodic(&a, &u, n);
        let mut back = vec![0.0; n * n];
        PeriodicSolver::new(&a, n).solve(&f, &mut back);
        for (x, y) in u.iter().zip(&back) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_inverts_five_point() {
        let n = 16;
        let (a11, a22) = (1.5, 0.5);
        let mut u = vec![0.0; n * n];
        for j in 1..n {
            for i in 1..n {
                u[j * n + i] = ((i * 7 + j * 3) % 5) as f64 - 2.0;
            }
        }
        let at = |i: usize, j: usize| if i == 0 || j == 0 || i >= n || j >= n { 0.0 } else { u[j * n + i] };
        let mut f = vec![0.0; n * n];
        for j in 1..n {
            for i in 1..n {
                f[j * n + i] = a11 * (2.0 * at(i, j) - at(i + 1, j) - at(i - 1, j))
                    + a22 * (2.0 * at(i, j) - at(i, j + 1) - at(i, j - 1));
            }
        }
        let mut back = vec![0.0; n * n];
        DirichletSolver::new(a11, a22, n).solve(&f, &mut back);
        for (x, y) in u.iter().zip(&back) {
            assert!((x - y).abs() < 1e-11);
        }
    }
}
