//! Periodic cell problems and effective conductivities.
//!
//! For each unit vector `l` the corrector `χ_l` solves
//! `∇·(a + E)(l − ∇χ_l) = 0` on the torus. With `F_l = l·x − χ_l`:
//!
//! * `σ_sym(a, E)_{lm} = ∫ ᵗ∇F_m a ∇F_l`,
//! * `σ(a, E)_{ml} = ∫ e_m · (a + E)∇F_l`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Eddy, FieldView, StreamField};
use crate::fit::line_fit;
use crate::krylov::{skew_minres, SplitOperator};
use crate::spectral::PeriodicSolver;
use crate::stencil::{sample_faces, FaceGrad, FluxOperator, Part};
use crate::tensor::{Mat2, SpdTensor};

/// Default relative residual tolerance of the cell solver.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest grid the automatic resolution escalation may reach.
pub const DEFAULT_N_CAP: usize = 2048;

/// Correctors `χ_{e1}, χ_{e2}` on the `n × n` grid.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub n: usize,
    pub chi: [Vec<f64>; 2],
    /// Largest relative residual of the two solves.
    pub residual: f64,
    /// Total Krylov iterations of the two solves.
    pub iterations: usize,
}

/// Effective conductivities together with the bounds they were checked
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConductivity {
    pub sigma_sym: SpdTensor,
    /// `σ(a, E)`, not necessarily symmetric.
    pub sigma_full: Mat2,
    /// Molecular conductivity `a` (lower bound).
    pub lower: SpdTensor,
    /// `a + Q` with `Q` the grid quadrature of `ᵗE a⁻¹ E` (upper bound).
    pub upper: SpdTensor,
    pub n: usize,
    pub residual: f64,
    pub iterations: usize,
}

struct CellOperator {
    op: FluxOperator,
    pre: PeriodicSolver,
}

impl SplitOperator for CellOperator {
    fn apply_sym(&mut self, u: &[f64], out: &mut [f64]) {
        self.op.apply(u, out, Part::Sym);
    }
    fn apply_skew(&mut self, u: &[f64], out: &mut [f64]) {
        self.op.apply(u, out, Part::Skew);
    }
    fn solve_sym(&mut self, r: &[f64], out: &mut [f64]) {
        self.pre.solve(r, out);
    }
}

fn check_inputs(a: &SpdTensor, n: usize, tol: f64) -> Result<f64> {
    let (lmin, _) = a.eigen_bounds()?;
    if n < 8 {
        return Err(Error::Config(format!("cell grid N = {n} below minimum 8")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::Config(format!("tolerance {tol} outside (0, 1e-3]")));
    }
    Ok(lmin)
}

/// Discrete Lipschitz constant of the face samples.
fn face_lipschitz(hx: &[f64], hy: &[f64], n: usize) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..n {
        let jp = (j + 1) % n;
        for i in 0..n {
            let ip = (i + 1) % n;
            let k = j * n + i;
            m = m
                .max((hx[j * n + ip] - hx[k]).abs())
                .max((hx[jp * n + i] - hx[k]).abs())
                .max((hy[j * n + ip] - hy[k]).abs())
                .max((hy[jp * n + i] - hy[k]).abs());
        }
    }
    m * n as f64
}

/// Smallest grid on which the advective boundary layer of width
/// `√(λ_min(a) / U)` spans four cells, `U` the Lipschitz constant of the
/// stream function.
pub fn required_resolution(lambda_min: f64, lipschitz: f64) -> usize {
    if lipschitz <= 0.0 {
        return 8;
    }
    let n = 4.0 * (lipschitz / lambda_min).sqrt();
    (n.ceil() as usize).max(8)
}

fn resolution_check(lmin: f64, hx: &[f64], hy: &[f64], n: usize) -> Result<()> {
    let u = face_lipschitz(hx, hy, n);
    let need = required_resolution(lmin, u);
    if need > n {
        return Err(Error::Refusal {
            reason: format!(
                "boundary layer width {:.3e} spans fewer than 4 cells of size {:.3e}",
                (lmin / u).sqrt(),
                1.0 / n as f64
            ),
            required_n: need.next_power_of_two(),
        });
    }
    Ok(())
}

fn solve_sampled(a: &SpdTensor, hx: Vec<f64>, hy: Vec<f64>, n: usize, tol: f64) -> Result<CellSolution> {
    let dx = 1.0 / n as f64;
    let max_iter = 10 * n;
    let solve_one = |l: [f64; 2], hx: Vec<f64>, hy: Vec<f64>| -> Result<(Vec<f64>, f64, usize)> {
        let mut cell = CellOperator {
            op: FluxOperator::new(*a, n, dx, hx, hy),
            pre: PeriodicSolver::new(a, n),
        };
        let mut b = vec![0.0; n * n];
        cell.op.constant_gradient_rhs(l, Part::Full, &mut b);
        let mut chi = vec![0.0; n * n];
        let stats = skew_minres(&mut cell, &b, &mut chi, tol, max_iter);
        if !stats.converged {
            return Err(Error::Solver { iterations: stats.iterations, residual: stats.residual });
        }
        let mean = chi.iter().sum::<f64>() / (n * n) as f64;
        chi.iter_mut().for_each(|v| *v -= mean);
        Ok((chi, stats.residual, stats.iterations))
    };
    let (r1, r2) = rayon::join(
        || solve_one([1.0, 0.0], hx.clone(), hy.clone()),
        || solve_one([0.0, 1.0], hx.clone(), hy.clone()),
    );
    let (c1, res1, it1) = r1?;
    let (c2, res2, it2) = r2?;
    Ok(CellSolution { n, chi: [c1, c2], residual: res1.max(res2), iterations: it1 + it2 })
}

/// Solves the two cell problems for `l = e₁, e₂`.
///
/// Refuses when the advective boundary layer is not resolved by `n`.
pub fn solve_cell<F: StreamField + ?Sized>(
    a: &SpdTensor,
    field: &F,
    n: usize,
    tol: f64,
) -> Result<CellSolution> {
    let lmin = check_inputs(a, n, tol)?;
    let (hx, hy) = sample_faces(field, n, 1.0 / n as f64, [0.0, 0.0]);
    resolution_check(lmin, &hx, &hy, n)?;
    solve_sampled(a, hx, hy, n, tol)
}

/// `σ_sym(a, E)` and `σ(a, E)` by quadrature of the corrector gradients,
/// checked against `a ≤ σ_sym ≤ a + Q` on three probe directions.
pub fn effective_conductivity<F: StreamField + ?Sized>(
    a: &SpdTensor,
    field: &F,
    n: usize,
    tol: f64,
) -> Result<EffectiveConductivity> {
    let lmin = check_inputs(a, n, tol)?;
    let dx = 1.0 / n as f64;
    let (hx, hy) = sample_faces(field, n, dx, [0.0, 0.0]);
    resolution_check(lmin, &hx, &hy, n)?;
    if hx.iter().chain(&hy).all(|&v| v == 0.0) {
        // the correctors vanish identically
        return Ok(EffectiveConductivity {
            sigma_sym: *a,
            sigma_full: a.as_matrix(),
            lower: *a,
            upper: *a,
            n,
            residual: 0.0,
            iterations: 0,
        });
    }
    let h2: f64 = hx.iter().chain(&hy).map(|v| v * v).sum::<f64>() * 0.5 * dx * dx;
    let op = FluxOperator::new(*a, n, dx, hx.clone(), hy.clone());
    let sol = solve_sampled(a, hx, hy, n, tol)?;

    let grads: Vec<FaceGrad> = [[1.0, 0.0], [0.0, 1.0]]
        .iter()
        .zip(&sol.chi)
        .map(|(l, chi)| {
            let neg: Vec<f64> = chi.iter().map(|v| -v).collect();
            let mut g = FaceGrad::zeros(n * n);
            op.gradients(&neg, *l, &mut g);
            g
        })
        .collect();

    let s11 = op.form(&grads[0], &grads[0], Part::Sym);
    let s22 = op.form(&grads[1], &grads[1], Part::Sym);
    let s12 = 0.5 * (op.form(&grads[0], &grads[1], Part::Sym) + op.form(&grads[1], &grads[0], Part::Sym));
    let sigma_sym = SpdTensor { a11: s11, a12: s12, a22: s22 };

    let mut sigma_full = [[0.0; 2]; 2];
    let mut q = FaceGrad::zeros(n * n);
    for (l, g) in grads.iter().enumerate() {
        op.fluxes(g, Part::Full, &mut q);
        let area = dx * dx;
        sigma_full[0][l] = (q.g1x.iter().sum::<f64>() + q.g1y.iter().sum::<f64>()) * area;
        sigma_full[1][l] = (q.g2x.iter().sum::<f64>() + q.g2y.iter().sum::<f64>()) * area;
    }

    let upper = a.add(&a.scale(h2 / a.det()));
    let probes = [[1.0, 0.0], [0.0, 1.0], [std::f64::consts::FRAC_1_SQRT_2; 2]];
    for l in probes {
        let (lo, mid, hi) = (a.quad(l), sigma_sym.quad(l), upper.quad(l));
        let slack = 10.0 * tol * hi;
        if mid < lo - slack || mid > hi + slack {
            return Err(Error::Consistency(format!(
                "sandwich a <= sigma_sym <= a + Q violated along {l:?}: {lo} <= {mid} <= {hi}"
            )));
        }
    }
    sigma_sym.validate()?;
    Ok(EffectiveConductivity {
        sigma_sym,
        sigma_full,
        lower: *a,
        upper,
        n,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Outcome of comparing `σ_sym(a, E)` with `σ_sym(a, S_ρ E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rho: usize,
    pub base: SpdTensor,
    pub scaled: SpdTensor,
    /// Largest entrywise deviation relative to the largest base entry.
    pub max_rel_dev: f64,
}

fn rel_dev(x: &SpdTensor, y: &SpdTensor) -> f64 {
    let d = (x.a11 - y.a11).abs().max((x.a12 - y.a12).abs()).max((x.a22 - y.a22).abs());
    d / x.max_abs()
}

/// Both sides of the scaling invariance at matched resolution: `n` for
/// `E`, `ρ·n` for `S_ρ E`.
pub fn scaling_invariance_check(
    a: &SpdTensor,
    field: &FieldView<'_>,
    rho: usize,
    n: usize,
    tol: f64,
) -> Result<ScalingReport> {
    if rho == 0 {
        return Err(Error::Config("scaling factor must be a positive integer".into()));
    }
    let base = effective_conductivity(a, field, n, tol)?.sigma_sym;
    let scaled = if rho == 1 {
        base
    } else {
        let view = field.clone().scaled(rho as f64);
        effective_conductivity(a, &view, rho * n, tol)?.sigma_sym
    };
    Ok(ScalingReport { rho, base, scaled, max_rel_dev: rel_dev(&base, &scaled) })
}

/// One point `(ζ, V, W)` of the vanishing-conductivity curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VPoint {
    pub zeta: f64,
    pub v: f64,
    pub w: f64,
    pub n_used: usize,
    pub residual: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Grid required when the point was refused as under-resolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_n: Option<usize>,
}

/// `V(ζ, E)` and `W(ζ, E)` sampled on a descending list of `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VCurve {
    pub points: Vec<VPoint>,
    /// Whether `V` and `W` are nonincreasing in `ζ` over converged points.
    pub monotone: bool,
}

impl VCurve {
    pub fn converged(&self) -> impl Iterator<Item = &VPoint> {
        self.points.iter().filter(|p| p.converged)
    }
}

/// Effective conductivity at `a`, escalating the grid up to `n_cap` when
/// the solve is refused as under-resolved.
pub fn effective_conductivity_adaptive<F: StreamField + ?Sized>(
    a: &SpdTensor,
    field: &F,
    n: usize,
    tol: f64,
    n_cap: usize,
) -> Result<EffectiveConductivity> {
    let mut n_used = n;
    loop {
        match effective_conductivity(a, field, n_used, tol) {
            Err(Error::Refusal { required_n, reason }) => {
                if required_n > n_cap {
                    return Err(Error::Refusal { reason, required_n });
                }
                n_used = required_n.max(2 * n_used).min(n_cap);
            }
            other => return other,
        }
    }
}

/// Vanishing-conductivity curves. Points whose solve is refused or fails
/// are kept with `converged = false` and an annotation.
pub fn v_curve<F: StreamField + ?Sized>(
    field: &F,
    zetas: &[f64],
    n: usize,
    tol: f64,
    n_cap: usize,
) -> Result<VCurve> {
    if zetas.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
        return Err(Error::Config("all zeta values must be positive".into()));
    }
    if zetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("zeta list must be strictly descending".into()));
    }
    let points: Vec<VPoint> = zetas
        .par_iter()
        .map(|&zeta| {
            match effective_conductivity_adaptive(&SpdTensor::isotropic(zeta), field, n, tol, n_cap) {
                Ok(ec) => {
                    let (lmin, lmax) = ec.sigma_sym.eigen_bounds().unwrap_or((f64::NAN, f64::NAN));
                    VPoint {
                        zeta,
                        v: lmin / zeta,
                        w: lmax / zeta,
                        n_used: ec.n,
                        residual: ec.residual,
                        converged: true,
                        note: None,
                        required_n: None,
                    }
                }
                Err(e) => {
                    let (residual, required_n) = match &e {
                        Error::Solver { residual, .. } => (*residual, None),
                        Error::Refusal { required_n, .. } => (f64::NAN, Some(*required_n)),
                        _ => (f64::NAN, None),
                    };
                    VPoint {
                        zeta,
                        v: f64::NAN,
                        w: f64::NAN,
                        n_used: n,
                        residual,
                        converged: false,
                        note: Some(e.to_string()),
                        required_n,
                    }
                }
            }
        })
        .collect();
    let slack = 10.0 * tol;
    let good: Vec<&VPoint> = points.iter().filter(|p| p.converged).collect();
    let monotone = good
        .windows(2)
        .all(|w| w[1].v >= w[0].v * (1.0 - slack) && w[1].w >= w[0].w * (1.0 - slack));
    Ok(VCurve { points, monotone })
}

/// `V⁻¹(x) = sup{ζ > 0 : V(ζ) > x}` on the log-log piecewise-linear
/// interpolant of the converged points.
pub fn v_inverse(curve: &VCurve, x: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = curve.converged().map(|p| (p.zeta, p.v)).collect();
    if pts.len() < 2 {
        return Err(Error::Config("curve needs at least two converged points".into()));
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let vmin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let vmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if !(x >= vmin && x <= vmax) {
        return Err(Error::Range { value: x, min: vmin, max: vmax });
    }
    // scan from large to small zeta; the first segment reaching x gives the sup
    for w in pts.windows(2) {
        let ((z0, v0), (z1, v1)) = (w[0], w[1]);
        if v0 >= x {
            return Ok(z0);
        }
        if v1 >= x {
            let (l0, l1) = (v0.ln(), v1.ln());
            let t = if l1 == l0 { 1.0 } else { (x.ln() - l0) / (l1 - l0) };
            return Ok((z0.ln() + t * (z1.ln() - z0.ln())).exp());
        }
    }
    Ok(pts.last().map(|p| p.0).unwrap_or(f64::NAN))
}

/// Direct two-scale conductivity versus the reiterated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoScaleReport {
    pub r: usize,
    /// `σ_sym(a, S_R P + K)`.
    pub direct: SpdTensor,
    /// `σ_sym(σ_sym(a, P), K)`.
    pub reiterated: SpdTensor,
    /// Extremes of `ᵗl direct l / ᵗl reiterated l` (closed form).
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// The same extremes over 64 sampled directions.
    pub ratio_min_sampled: f64,
    pub ratio_max_sampled: f64,
    pub n_used: usize,
}

impl TwoScaleReport {
    /// Largest deviation of the ratio interval from 1.
    pub fn max_deviation(&self) -> f64 {
        (self.ratio_max - 1.0).abs().max((1.0 - self.ratio_min).abs())
    }
}

/// Closed-form and sampled extremes of the quadratic-form ratio.
pub fn ratio_interval(x: &SpdTensor, y: &SpdTensor) -> Result<(f64, f64, f64, f64)> {
    let (lo, hi) = x.ratio_bounds(y)?;
    let (mut slo, mut shi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..64 {
        let t = std::f64::consts::PI * k as f64 / 64.0;
        let l = [t.cos(), t.sin()];
        let r = x.quad(l) / y.quad(l);
        slo = slo.min(r);
        shi = shi.max(r);
    }
    Ok((lo, hi, slo, shi))
}

/// Two-scale averaging comparison with the fast scale resolved by
/// `per_period` grid points per period.
pub fn two_scale_compare(
    a: &SpdTensor,
    p: &Eddy,
    k: &Eddy,
    r: usize,
    per_period: usize,
    tol: f64,
    n_cap: usize,
) -> Result<TwoScaleReport> {
    if r < 2 {
        return Err(Error::Config(format!("scale ratio R = {r} must be an integer >= 2")));
    }
    let n = per_period * r;
    if n > n_cap {
        return Err(Error::Refusal {
            reason: format!("direct two-scale solve at R = {r} exceeds the grid budget {n_cap}"),
            required_n: n,
        });
    }
    let direct_field = FieldView::new().with(1.0, r as f64, [0.0, 0.0], p).with(1.0, 1.0, [0.0, 0.0], k);
    let (direct, inner) = rayon::join(
        || effective_conductivity(a, &direct_field, n, tol),
        || effective_conductivity(a, p, per_period, tol),
    );
    let direct = direct?.sigma_sym;
    let inner = inner?.sigma_sym;
    let reiterated = effective_conductivity(&inner, k, n, tol)?.sigma_sym;
    let (ratio_min, ratio_max, ratio_min_sampled, ratio_max_sampled) = ratio_interval(&direct, &reiterated)?;
    Ok(TwoScaleReport {
        r,
        direct,
        reiterated,
        ratio_min,
        ratio_max,
        ratio_min_sampled,
        ratio_max_sampled,
        n_used: n,
    })
}

/// One `ζ` of the translation-sensitivity experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub zeta: f64,
    pub base: Option<SpdTensor>,
    pub shifted: Option<SpdTensor>,
    pub n_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Sensitivity of two-scale conductivities to a relative translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub shift: [f64; 2],
    pub points: Vec<SensitivityPoint>,
    /// Log-log slope of `λ_min` versus `ζ` over the three smallest
    /// resolved `ζ`, untranslated and translated.
    pub slope_base: Option<f64>,
    pub slope_shifted: Option<f64>,
}

fn small_zeta_slope(points: &[SensitivityPoint], pick: impl Fn(&SensitivityPoint) -> Option<SpdTensor>) -> Option<f64> {
    let mut good: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| pick(p).and_then(|t| t.lambda_min().ok()).map(|l| (p.zeta, l)))
        .collect();
    good.sort_by(|a, b| a.0.total_cmp(&b.0));
    if good.len() < 3 {
        return None;
    }
    let tail = &good[..3];
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    line_fit(&x, &y).map(|f| f.slope)
}

/// `σ_sym(ζI, S_R P + K)` against `σ_sym(ζI, S_R Θ_y P + K)` over a
/// descending list of `ζ`.
pub fn translation_sensitivity(
    zetas: &[f64],
    p: &Eddy,
    k: &Eddy,
    r: usize,
    shift: [f64; 2],
    per_period: usize,
    tol: f64,
    n_cap: usize,
) -> Result<SensitivityReport> {
    if r < 1 {
        return Err(Error::Config("scale ratio R must be a positive integer".into()));
    }
    if zetas.iter().any(|z| !(*z > 0.0)) || zetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("zeta list must be positive and strictly descending".into()));
    }
    let rf = r as f64;
    let base = FieldView::new().with(1.0, rf, [0.0, 0.0], p).with(1.0, 1.0, [0.0, 0.0], k);
    let moved = FieldView::new().with(1.0, rf, shift, p).with(1.0, 1.0, [0.0, 0.0], k);
    let same = shift == [0.0, 0.0];
    let n = per_period * r;
    let points: Vec<SensitivityPoint> = zetas
        .par_iter()
        .map(|&zeta| {
            let a = SpdTensor::isotropic(zeta);
            let b = effective_conductivity_adaptive(&a, &base, n, tol, n_cap);
            let s = if same {
                b.clone()
            } else {
                effective_conductivity_adaptive(&a, &moved, n, tol, n_cap)
            };
            let n_used = b.as_ref().map(|e| e.n).unwrap_or(n).max(s.as_ref().map(|e| e.n).unwrap_or(n));
            let note = match (&b, &s) {
                (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
                _ => None,
            };
            SensitivityPoint {
                zeta,
                base: b.ok().map(|e| e.sigma_sym),
                shifted: s.ok().map(|e| e.sigma_sym),
                n_used,
                note,
            }
        })
        .collect();
    let slope_base = small_zeta_slope(&points, |p| p.base);
    let slope_shifted = small_zeta_slope(&points, |p| p.shifted);
    Ok(SensitivityReport { shift, points, slope_base, slope_shifted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero_corrector() {
        let e = Eddy::zero(8).unwrap();
        let a = SpdTensor::new(1.0, 0.3, 2.0).unwrap();
        let sol = solve_cell(&a, &e, 32, 1e-10).unwrap();
        assert!(sol.chi.iter().flatten().all(|&v| v == 0.0));
        let ec = effective_conductivity(&a, &e, 32, 1e-10).unwrap();
        assert_eq!(ec.sigma_sym, a);
    }

    #[test]
    fn shear_corrector_closed_form() {
        let e = Eddy::shear(64).unwrap();
        let kappa = 1.0;
        let n = 64;
        let sol = solve_cell(&SpdTensor::isotropic(kappa), &e, n, 1e-10).unwrap();
        let mut err = 0.0_f64;
        for j in 0..n {
            let y = j as f64 / n as f64;
            let exact = (2.0 * std::f64::consts::PI * y).cos() / (2.0 * std::f64::consts::PI * kappa);
            for i in 0..n {
                err = err.max((sol.chi[0][j * n + i] - exact).abs());
            }
        }
        assert!(err < 2e-3 * 0.16, "max error {err}");
        assert!(sol.chi[1].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn v_inverse_on_synthetic_curve() {
        let zetas: Vec<f64> = (0..200).map(|k| 10f64.powf(1.0 - k as f64 * 0.01)).collect();
        let points = zetas
            .iter()
            .map(|&z| VPoint {
                zeta: z,
                v: 1.0 + 1.0 / z,
                w: 1.0 + 1.0 / z,
                n_used: 0,
                residual: 0.0,
                converged: true,
                note: None,
                required_n: None,
            })
            .collect();
        let curve = VCurve { points, monotone: true };
        assert!((v_inverse(&curve, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((v_inverse(&curve, 3.0).unwrap() - 0.5).abs() < 1e-3);
        assert!(matches!(v_inverse(&curve, 0.9), Err(Error::Range { .. })));
    }
}
