//! Mean exit times `ψ` solving `−∇·(a + E)∇ψ = 1` on a disk or square with
//! `ψ = 0` on the boundary.
//!
//! The domain is embedded in a periodic box whose outer frame is always
//! exterior. Faces crossing the boundary get the symmetric cut-face
//! weight `1/θ` on the normal conductivity (`θ dx` the distance from the
//! interior node to the boundary), and the load and quadrature weights
//! are the covered area fractions of the node cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldView, FlowSpec};
use crate::krylov::gmres;
use crate::spectral::DirichletSolver;
use crate::stencil::{sample_faces, FaceGrad, FluxOperator, Part};
use crate::tensor::SpdTensor;

/// Smallest admissible cut fraction of a boundary face.
pub const MIN_CUT_FRACTION: f64 = 0.1;
const GMRES_RESTART: usize = 60;
const SUBSAMPLES: usize = 16;

/// Bounded domain centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Disk { radius: f64 },
    Square { side: f64 },
}

impl Domain {
    fn validate(&self) -> Result<()> {
        let v = match self {
            Domain::Disk { radius } => *radius,
            Domain::Square { side } => *side,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("domain size must be positive (got {v})")));
        }
        Ok(())
    }

    /// Half-width of the bounding square.
    pub fn extent(&self) -> f64 {
        match self {
            Domain::Disk { radius } => *radius,
            Domain::Square { side } => 0.5 * side,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Domain::Disk { radius } => std::f64::consts::PI * radius * radius,
            Domain::Square { side } => side * side,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Domain::Disk { radius } => x * x + y * y < radius * radius,
            Domain::Square { side } => x.abs() < 0.5 * side && y.abs() < 0.5 * side,
        }
    }

    fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match self {
            Domain::Disk { radius } => x.hypot(y) - radius,
            Domain::Square { side } => x.abs().max(y.abs()) - 0.5 * side,
        }
    }

    /// Fraction `θ ∈ (0, 1]` of the segment from `p_in` to `p_out` lying
    /// inside the domain.
    fn crossing(&self, p_in: [f64; 2], p_out: [f64; 2]) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let x = p_in[0] + mid * (p_out[0] - p_in[0]);
            let y = p_in[1] + mid * (p_out[1] - p_in[1]);
            if self.contains(x, y) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Grid geometry of an exit-time problem.
#[derive(Debug, Clone, PartialEq)]
struct ExitGrid {
    n: usize,
    dx: f64,
    origin: f64,
    interior: Vec<bool>,
    weights: Vec<f64>,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl ExitGrid {
    fn new(domain: &Domain, n: usize) -> Self {
        let dx = 2.0 * domain.extent() / (n - 6) as f64;
        let origin = -0.5 * n as f64 * dx;
        let coord = |i: usize| origin + i as f64 * dx;
        let mut interior = vec![false; n * n];
        let mut weights = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (coord(i), coord(j));
                let k = j * n + i;
                interior[k] = domain.contains(x, y);
                let sd = domain.signed_distance(x, y);
                weights[k] = if sd < -0.75 * dx {
                    1.0
                } else if sd > 0.75 * dx {
                    0.0
                } else {
                    let mut inside = 0;
                    for b in 0..SUBSAMPLES {
                        for c in 0..SUBSAMPLES {
                            let sx = x + ((c as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * dx;
                            let sy = y + ((b as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * dx;
                            if domain.contains(sx, sy) {
                                inside += 1;
                            }
                        }
                    }
                    inside as f64 / (SUBSAMPLES * SUBSAMPLES) as f64
                } * dx
                    * dx;
            }
        }
        let mut wx = vec![1.0; n * n];
        let mut wy = vec![1.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                let (ip, jp) = ((i + 1) % n, (j + 1) % n);
                let here = [coord(i), coord(j)];
                for (w, other, nb) in [
                    (&mut wx, [coord(i) + dx, coord(j)], j * n + ip),
                    (&mut wy, [coord(i), coord(j) + dx], jp * n + i),
                ] {
                    let theta = match (interior[k], interior[nb]) {
                        (true, false) => domain.crossing(here, other),
                        (false, true) => domain.crossing(other, here),
                        _ => continue,
                    };
                    w[k] = 1.0 / theta.max(MIN_CUT_FRACTION);
                }
            }
        }
        Self { n, dx, origin, interior, weights, wx, wy }
    }

    fn load(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.interior).map(|(w, &m)| if m { *w } else { 0.0 }).collect()
    }
}

/// Solution of an exit-time problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeField {
    pub domain: Domain,
    pub n: usize,
    pub dx: f64,
    /// Coordinate of node 0 along both axes.
    pub origin: f64,
    pub psi: Vec<f64>,
    pub interior: Vec<bool>,
    /// Covered area of each node cell.
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Smallest `ψ` over interior nodes.
    pub min_interior: f64,
}

impl ExitTimeField {
    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }

    /// `∫ψ` by cell quadrature.
    pub fn integral(&self) -> f64 {
        self.psi.iter().zip(&self.weights).map(|(p, w)| p * w).sum()
    }

    /// Largest `ψ` on the grid.
    pub fn max(&self) -> f64 {
        self.psi.iter().copied().fold(0.0, f64::max)
    }
}

fn resolution_required(flow: &FlowSpec, n_max: usize, domain: &Domain) -> usize {
    let finest = (0..=n_max)
        .filter(|&k| !flow.eddy(k).is_zero())
        .map(|k| flow.big_r(k))
        .fold(f64::INFINITY, f64::min);
    if !finest.is_finite() {
        return 16;
    }
    // dx = 2·extent/(n − 6) ≤ finest/8
    (16.0 * domain.extent() / finest).ceil() as usize + 6
}

struct ExitProblem {
    grid: ExitGrid,
    op: FluxOperator,
}

fn build(a: &SpdTensor, view: Option<&FieldView<'_>>, domain: &Domain, n: usize) -> ExitProblem {
    let grid = ExitGrid::new(domain, n);
    let (hx, hy) = match view {
        Some(v) => sample_faces(v, n, grid.dx, [grid.origin, grid.origin]),
        None => (vec![0.0; n * n], vec![0.0; n * n]),
    };
    let op = FluxOperator::new(*a, n, grid.dx, hx, hy)
        .with_face_weights(grid.wx.clone(), grid.wy.clone())
        .with_mask(grid.interior.clone());
    ExitProblem { grid, op }
}

fn check_common(a: &SpdTensor, flow: &FlowSpec, n_max: usize, domain: &Domain, n: usize, tol: f64) -> Result<()> {
    a.eigen_bounds()?;
    domain.validate()?;
    if n_max >= flow.n_scales() {
        return Err(Error::Config(format!(
            "scale truncation {n_max} out of range for a flow with {} scales",
            flow.n_scales()
        )));
    }
    if n < 16 {
        return Err(Error::Config(format!("exit-time grid N = {n} below minimum 16")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::Config(format!("tolerance {tol} outside (0, 1e-3]")));
    }
    let need = resolution_required(flow, n_max, domain);
    if need > n {
        return Err(Error::Refusal {
            reason: format!("smallest included eddy spans fewer than 8 cells at N = {n}"),
            required_n: need.next_power_of_two(),
        });
    }
    Ok(())
}

fn solve_problem(p: &mut ExitProblem, a: &SpdTensor, domain: Domain, tol: f64) -> Result<ExitTimeField> {
    let n = p.grid.n;
    let b = p.grid.load();
    let mut psi = vec![0.0; n * n];
    let mask = p.grid.interior.clone();
    let mut pre = DirichletSolver::new(a.a11, a.a22, n);
    let mut masked = vec![0.0; n * n];
    let op = &mut p.op;
    let stats = gmres(
        |u, out| op.apply(u, out, Part::Full),
        |r, out| {
            for k in 0..r.len() {
                masked[k] = if mask[k] { r[k] } else { 0.0 };
            }
            pre.solve(&masked, out);
            for k in 0..out.len() {
                if !mask[k] {
                    out[k] = 0.0;
                }
            }
        },
        &b,
        &mut psi,
        tol,
        GMRES_RESTART,
        20 * n,
    );
    if !stats.converged {
        return Err(Error::Solver { iterations: stats.iterations, residual: stats.residual });
    }
    let min_interior = psi
        .iter()
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    Ok(ExitTimeField {
        domain,
        n,
        dx: p.grid.dx,
        origin: p.grid.origin,
        psi,
        interior: mask,
        weights: p.grid.weights.clone(),
        residual: stats.residual,
        iterations: stats.iterations,
        min_interior,
    })
}

fn flow_view(flow: &FlowSpec, n_max: usize) -> Result<Option<FieldView<'_>>> {
    let view = flow.physical_view(n_max)?;
    Ok(if view.is_zero() { None } else { Some(view) })
}

/// Solves for the mean exit time with the stream function truncated at
/// scale `n_max`.
pub fn solve_exit_time(
    a: &SpdTensor,
    flow: &FlowSpec,
    n_max: usize,
    domain: Domain,
    n: usize,
    tol: f64,
) -> Result<ExitTimeField> {
    check_common(a, flow, n_max, &domain, n, tol)?;
    let view = flow_view(flow, n_max)?;
    let mut p = build(a, view.as_ref(), &domain, n);
    solve_problem(&mut p, a, domain, tol)
}

/// Same as [`solve_exit_time`] without drift.
pub fn solve_drift_free(a: &SpdTensor, domain: Domain, n: usize, tol: f64) -> Result<ExitTimeField> {
    a.eigen_bounds()?;
    domain.validate()?;
    let mut p = build(a, None, &domain, n);
    solve_problem(&mut p, a, domain, tol)
}

/// Interior average of `ψ` weighted by covered cell area.
pub fn mean_exit_time(field: &ExitTimeField) -> f64 {
    let area: f64 = field.weights.iter().sum();
    if area == 0.0 {
        return 0.0;
    }
    field.integral() / area
}

/// The three mean exit times of the drift sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSandwichReport {
    /// `sup λ_max(ᵗE a⁻¹ E)` over face samples adjacent to the domain.
    pub lambda: f64,
    /// Mean exit time with conductivity `a + λI` and no drift.
    pub lower: f64,
    /// Mean exit time with conductivity `a` and drift.
    pub middle: f64,
    /// Mean exit time with conductivity `a` and no drift.
    pub upper: f64,
    /// `r²/(8(κ+λ))` and `r²/(8κ)` for isotropic `a` on a disk.
    pub analytic_lower: Option<f64>,
    pub analytic_upper: Option<f64>,
    pub ordered: bool,
    pub strict: bool,
}

fn face_lambda(op: &FluxOperator, a: &SpdTensor) -> Result<f64> {
    let n = op.n();
    let mask = op.mask().unwrap_or(&[]);
    let inv_lmin = 1.0 / a.lambda_min()?;
    let mut m = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            let ip = j * n + (i + 1) % n;
            let jp = ((j + 1) % n) * n + i;
            if mask.get(k).copied().unwrap_or(true) || mask.get(ip).copied().unwrap_or(true) {
                m = m.max(op.hx()[k].powi(2));
            }
            if mask.get(k).copied().unwrap_or(true) || mask.get(jp).copied().unwrap_or(true) {
                m = m.max(op.hy()[k].powi(2));
            }
        }
    }
    Ok(m * inv_lmin)
}

/// Checks `τ^{a+λI,0} ≤ τ^{a,E} ≤ τ^{a,0}` on the mean exit times.
pub fn exit_sandwich_check(
    a: &SpdTensor,
    flow: &FlowSpec,
    n_max: usize,
    domain: Domain,
    n: usize,
    tol: f64,
) -> Result<ExitSandwichReport> {
    check_common(a, flow, n_max, &domain, n, tol)?;
    let view = flow_view(flow, n_max)?;
    let mut p = build(a, view.as_ref(), &domain, n);
    let lambda = face_lambda(&p.op, a)?;
    let middle = mean_exit_time(&solve_problem(&mut p, a, domain, tol)?);
    let upper = mean_exit_time(&solve_drift_free(a, domain, n, tol)?);
    let shifted = a.add(&SpdTensor::isotropic(lambda));
    let lower = mean_exit_time(&solve_drift_free(&shifted, domain, n, tol)?);
    let (analytic_lower, analytic_upper) = match domain {
        Domain::Disk { radius } if a.a12 == 0.0 && a.a11 == a.a22 => (
            Some(radius * radius / (8.0 * (a.a11 + lambda))),
            Some(radius * radius / (8.0 * a.a11)),
        ),
        _ => (None, None),
    };
    let slack = 10.0 * tol * upper;
    let ordered = lower <= middle + slack && middle <= upper + slack;
    if !ordered {
        return Err(Error::Consistency(format!(
            "exit-time sandwich violated: {lower} <= {middle} <= {upper}"
        )));
    }
    Ok(ExitSandwichReport {
        lambda,
        lower,
        middle,
        upper,
        analytic_lower,
        analytic_upper,
        ordered,
        strict: lower < middle && middle < upper,
    })
}

/// Test functions for the variational lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// The drift-free exit-time solution on the same grid.
    DriftFree,
    /// `r² − |x|²` on a disk, `(s²/4 − x²)(s²/4 − y²)` on a square.
    Paraboloid,
    Zero,
    /// Explicit grid values (masked to the interior).
    Grid(Vec<f64>),
}

/// Evaluation of `2∫f − ∫|∇f|²_a − ∫|E∇f|²_{a⁻¹}` at the optimally
/// scaled test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub bracket: f64,
    /// `∫ψ` of the solved field.
    pub integral: f64,
    pub gap: f64,
    /// Factor `t` applied to the test function (`t = ∫f / (B + Z)`).
    pub scale: f64,
    pub valid: bool,
}

/// Lower bound of `∫ψ` from a test function with `H = 0`.
pub fn variational_lower_bound(
    field: &ExitTimeField,
    a: &SpdTensor,
    flow: &FlowSpec,
    n_max: usize,
    f: &TestFunction,
    tol: f64,
) -> Result<VariationalReport> {
    let n = field.n;
    let view = flow_view(flow, n_max)?;
    let p = build(a, view.as_ref(), &field.domain, n);
    let mut f0 = match f {
        TestFunction::Zero => vec![0.0; n * n],
        TestFunction::DriftFree => solve_drift_free(a, field.domain, n, tol.min(1e-10))?.psi,
        TestFunction::Paraboloid => {
            let mut v = vec![0.0; n * n];
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (field.coord(i), field.coord(j));
                    v[j * n + i] = match field.domain {
                        Domain::Disk { radius } => radius * radius - x * x - y * y,
                        Domain::Square { side } => {
                            let h = 0.25 * side * side;
                            (h - x * x) * (h - y * y)
                        }
                    };
                }
            }
            v
        }
        TestFunction::Grid(v) => {
            if v.len() != n * n {
                return Err(Error::Config(format!("test function needs {} values", n * n)));
            }
            v.clone()
        }
    };
    for (v, &m) in f0.iter_mut().zip(&p.grid.interior) {
        if !m {
            *v = 0.0;
        }
    }
    let ell: f64 = f0.iter().zip(&p.grid.weights).map(|(v, w)| v * w).sum();
    let mut g = FaceGrad::zeros(n * n);
    p.op.gradients(&f0, [0.0, 0.0], &mut g);
    let energy = p.op.form(&g, &g, Part::Sym);
    let det = a.det();
    let hx = p.op.hx();
    let hy = p.op.hy();
    let drift: f64 = (0..n * n)
        .map(|k| {
            hx[k] * hx[k] * a.quad([g.g1x[k], g.g2x[k]]) + hy[k] * hy[k] * a.quad([g.g1y[k], g.g2y[k]])
        })
        .sum::<f64>()
        * 0.5
        * field.dx
        * field.dx
        / det;
    let denom = energy + drift;
    let (bracket, scale) = if denom > 0.0 { (ell * ell / denom, ell / denom) } else { (0.0, 0.0) };
    let integral = field.integral();
    Ok(VariationalReport {
        bracket,
        integral,
        gap: integral - bracket,
        scale,
        valid: bracket <= integral + 10.0 * tol * integral.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Eddy;

    #[test]
    fn pure_diffusion_disk() {
        let flow = FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::zero(8).unwrap(), 1);
        let f = solve_exit_time(&SpdTensor::isotropic(1.0), &flow, 0, Domain::Disk { radius: 4.0 }, 64, 1e-9).unwrap();
        let m = mean_exit_time(&f);
        assert!((m - 2.0).abs() < 0.02 * 2.0, "mean {m}");
        assert!(f.min_interior > 0.0);
        assert!(f.psi.iter().zip(&f.interior).all(|(p, &i)| i || *p == 0.0));
    }

    #[test]
    fn zero_test_function() {
        let flow = FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::zero(8).unwrap(), 1);
        let a = SpdTensor::isotropic(1.0);
        let f = solve_exit_time(&a, &flow, 0, Domain::Square { side: 2.0 }, 32, 1e-9).unwrap();
        let r = variational_lower_bound(&f, &a, &flow, 0, &TestFunction::Zero, 1e-9).unwrap();
        assert_eq!(r.bracket, 0.0);
        assert!(r.valid);
    }
}
