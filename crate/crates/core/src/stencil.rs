//! Conservative flux-form discretization of `−∇·(a + E)∇` on a periodic
//! `n × n` grid.
//!
//! Unknowns live on nodes `(i, j)`. The stream function is sampled on face
//! midpoints: x-faces `(i+½, j)` and y-faces `(i, j+½)`. At an x-face the
//! normal derivative is the compact difference and the tangential one the
//! average of the two adjacent centered differences (and symmetrically on
//! y-faces). The operator is `Gᵀ Q G` with `G` the face gradient and `Q`
//! the pointwise face flux, so the conductivity part is symmetric and the
//! stream part is exactly skew.

use rayon::prelude::*;

use crate::field::StreamField;
use crate::tensor::SpdTensor;

/// Which part of the operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Conductivity part `a` only (symmetric).
    Sym,
    /// Stream-function part `E` only (skew).
    Skew,
    Full,
}

/// Face gradients: `g1x, g2x` at x-faces, `g1y, g2y` at y-faces.
#[derive(Debug, Clone)]
pub struct FaceGrad {
    pub g1x: Vec<f64>,
    pub g2x: Vec<f64>,
    pub g1y: Vec<f64>,
    pub g2y: Vec<f64>,
}

impl FaceGrad {
    pub fn zeros(len: usize) -> Self {
        Self { g1x: vec![0.0; len], g2x: vec![0.0; len], g1y: vec![0.0; len], g2y: vec![0.0; len] }
    }
}

/// Stream function sampled at x-face and y-face midpoints of the grid with
/// spacing `dx` whose node `(0, 0)` sits at `origin`.
pub fn sample_faces<F: StreamField + ?Sized>(
    field: &F,
    n: usize,
    dx: f64,
    origin: [f64; 2],
) -> (Vec<f64>, Vec<f64>) {
    let mut hx = vec![0.0; n * n];
    let mut hy = vec![0.0; n * n];
    hx.par_chunks_mut(n).zip(hy.par_chunks_mut(n)).enumerate().for_each(|(j, (rx, ry))| {
        let y = origin[1] + j as f64 * dx;
        for i in 0..n {
            let x = origin[0] + i as f64 * dx;
            rx[i] = field.value(x + 0.5 * dx, y);
            ry[i] = field.value(x, y + 0.5 * dx);
        }
    });
    (hx, hy)
}

/// The discrete operator with its coefficient data and scratch space.
pub struct FluxOperator {
    n: usize,
    dx: f64,
    a: SpdTensor,
    hx: Vec<f64>,
    hy: Vec<f64>,
    wx: Option<Vec<f64>>,
    wy: Option<Vec<f64>>,
    mask: Option<Vec<bool>>,
    ip: Vec<usize>,
    im: Vec<usize>,
    grad: FaceGrad,
    flux: FaceGrad,
    px: Vec<f64>,
    py: Vec<f64>,
}

impl FluxOperator {
    pub fn new(a: SpdTensor, n: usize, dx: f64, hx: Vec<f64>, hy: Vec<f64>) -> Self {
        let len = n * n;
        Self {
            n,
            dx,
            a,
            hx,
            hy,
            wx: None,
            wy: None,
            mask: None,
            ip: (0..n).map(|i| (i + 1) % n).collect(),
            im: (0..n).map(|i| (i + n - 1) % n).collect(),
            grad: FaceGrad::zeros(len),
            flux: FaceGrad::zeros(len),
            px: vec![0.0; len],
            py: vec![0.0; len],
        }
    }

    /// Face weights multiplying `a11` on x-faces and `a22` on y-faces.
    pub fn with_face_weights(mut self, wx: Vec<f64>, wy: Vec<f64>) -> Self {
        self.wx = Some(wx);
        self.wy = Some(wy);
        self
    }

    /// Restricts the operator to nodes flagged `true`.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn conductivity(&self) -> &SpdTensor {
        &self.a
    }

    pub fn hx(&self) -> &[f64] {
        &self.hx
    }

    pub fn hy(&self) -> &[f64] {
        &self.hy
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn face_weights(&self) -> Option<(&[f64], &[f64])> {
        match (&self.wx, &self.wy) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        }
    }

    /// Face gradients of `l·x + u`.
    pub fn gradients(&self, u: &[f64], l: [f64; 2], g: &mut FaceGrad) {
        let n = self.n;
        let inv = 1.0 / self.dx;
        let half = 0.5 * inv;
        for j in 0..n {
            let (jp, jm) = (self.ip[j], self.im[j]);
            for i in 0..n {
                let (ip, im) = (self.ip[i], self.im[i]);
                let k = j * n + i;
                let c2 = (u[jp * n + i] - u[jm * n + i]) * half;
                let c2p = (u[jp * n + ip] - u[jm * n + ip]) * half;
                let c1 = (u[j * n + ip] - u[j * n + im]) * half;
                let c1p = (u[jp * n + ip] - u[jp * n + im]) * half;
                g.g1x[k] = l[0] + (u[j * n + ip] - u[k]) * inv;
                g.g2x[k] = l[1] + 0.5 * (c2 + c2p);
                g.g2y[k] = l[1] + (u[jp * n + i] - u[k]) * inv;
                g.g1y[k] = l[0] + 0.5 * (c1 + c1p);
            }
        }
    }

    /// Pointwise face fluxes (coefficients of the test-function gradients).
    pub fn fluxes(&self, g: &FaceGrad, part: Part, q: &mut FaceGrad) {
        let a = &self.a;
        let sym = part != Part::Skew;
        let skew = part != Part::Sym;
        for k in 0..self.n * self.n {
            let (wx, wy) = match (&self.wx, &self.wy) {
                (Some(x), Some(y)) => (x[k], y[k]),
                _ => (1.0, 1.0),
            };
            let (mut q1x, mut q2x, mut q1y, mut q2y) = (0.0, 0.0, 0.0, 0.0);
            if sym {
                q1x = a.a11 * wx * g.g1x[k] + a.a12 * g.g2x[k];
                q2y = a.a12 * g.g1y[k] + a.a22 * wy * g.g2y[k];
            }
            if skew {
                let hx = 0.5 * self.hx[k];
                let hy = 0.5 * self.hy[k];
                q1x += hx * g.g2x[k];
                q2x = -hx * g.g1x[k];
                q1y = hy * g.g2y[k];
                q2y -= hy * g.g1y[k];
            }
            q.g1x[k] = q1x;
            q.g2x[k] = q2x;
            q.g1y[k] = q1y;
            q.g2y[k] = q2y;
        }
    }

    /// `out = Gᵀ q` scaled by the cell area, i.e. the node residual of
    /// the bilinear form `dx² Σ_faces q · ∇v`.
    pub fn divergence(&mut self, q: &FaceGrad, out: &mut [f64]) {
        let n = self.n;
        let dx = self.dx;
        for j in 0..n {
            let jm = self.im[j];
            for i in 0..n {
                let im = self.im[i];
                let k = j * n + i;
                self.px[k] = 0.5 * (q.g2x[j * n + im] + q.g2x[k]);
                self.py[k] = 0.5 * (q.g1y[jm * n + i] + q.g1y[k]);
            }
        }
        for j in 0..n {
            let (jp, jm) = (self.ip[j], self.im[j]);
            for i in 0..n {
                let (ip, im) = (self.ip[i], self.im[i]);
                let k = j * n + i;
                out[k] = dx * (q.g1x[j * n + im] - q.g1x[k])
                    + dx * (q.g2y[jm * n + i] - q.g2y[k])
                    + 0.5 * dx * (self.px[jm * n + i] - self.px[jp * n + i])
                    + 0.5 * dx * (self.py[j * n + im] - self.py[j * n + ip]);
            }
        }
        if let Some(mask) = &self.mask {
            for (o, &m) in out.iter_mut().zip(mask) {
                if !m {
                    *o = 0.0;
                }
            }
        }
    }

    /// `out = A u` for the requested part.
    pub fn apply(&mut self, u: &[f64], out: &mut [f64], part: Part) {
        let mut grad = std::mem::replace(&mut self.grad, FaceGrad::zeros(0));
        let mut flux = std::mem::replace(&mut self.flux, FaceGrad::zeros(0));
        self.gradients(u, [0.0, 0.0], &mut grad);
        self.fluxes(&grad, part, &mut flux);
        self.divergence(&flux, out);
        self.grad = grad;
        self.flux = flux;
    }

    /// Right-hand side `Gᵀ Q l` for the constant gradient `l`.
    pub fn constant_gradient_rhs(&mut self, l: [f64; 2], part: Part, out: &mut [f64]) {
        let zero = vec![0.0; self.n * self.n];
        let mut grad = FaceGrad::zeros(self.n * self.n);
        let mut flux = FaceGrad::zeros(self.n * self.n);
        self.gradients(&zero, l, &mut grad);
        self.fluxes(&grad, part, &mut flux);
        self.divergence(&flux, out);
    }

    /// `dx² Σ_faces q(gu) · gv`.
    pub fn form(&self, gu: &FaceGrad, gv: &FaceGrad, part: Part) -> f64 {
        let mut q = FaceGrad::zeros(self.n * self.n);
        self.fluxes(gu, part, &mut q);
        let s: f64 = (0..self.n * self.n)
            .map(|k| {
                q.g1x[k] * gv.g1x[k] + q.g2x[k] * gv.g2x[k] + q.g1y[k] * gv.g1y[k] + q.g2y[k] * gv.g2y[k]
            })
            .sum();
        s * self.dx * self.dx
    }
}
