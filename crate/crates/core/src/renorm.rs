//! The renormalization core `A⁰ = κ/γ₀ I`,
//! `Aⁿ⁺¹ = (γₙ/γₙ₊₁) σ_sym(Aⁿ, Eⁿ)`, its pathology diagnostics and regime
//! classification.

use serde::{Deserialize, Serialize};

use crate::cell::{effective_conductivity, ratio_interval, v_inverse, VCurve};
use crate::error::{Error, Result};
use crate::field::{eddy_norms, validate_flow, FieldView, FlowSpec};
use crate::fit::line_fit;
use crate::tensor::SpdTensor;

/// The sequence `A⁰ … Aⁿ` with running diagnostics and per-step solver
/// metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreTrajectory {
    pub kappa: f64,
    /// `γ₀ … γₙ` of the flow the trajectory was computed from.
    pub gammas: Vec<f64>,
    pub states: Vec<SpdTensor>,
    /// Running `inf λ_min(Aᵖ)`.
    pub lambda_minus: Vec<f64>,
    /// Running `sup λ_max(Aᵖ)`.
    pub lambda_plus: Vec<f64>,
    /// Running `sup λ_max(Aᵖ)/λ_min(Aᵖ)`.
    pub mu: Vec<f64>,
    /// Solver residual of the step producing each state (0 for `A⁰`).
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    pub n_used: Vec<usize>,
}

impl CoreTrajectory {
    /// Trajectory from given states (diagnostics recomputed).
    pub fn from_states(kappa: f64, gammas: Vec<f64>, states: Vec<SpdTensor>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Config("trajectory must contain at least one state".into()));
        }
        let len = states.len();
        let mut t = Self {
            kappa,
            gammas,
            states: Vec::with_capacity(len),
            lambda_minus: Vec::with_capacity(len),
            lambda_plus: Vec::with_capacity(len),
            mu: Vec::with_capacity(len),
            residuals: vec![0.0; len],
            iterations: vec![0; len],
            n_used: vec![0; len],
        };
        for s in states {
            t.push_state(s)?;
        }
        Ok(t)
    }

    fn push_state(&mut self, s: SpdTensor) -> Result<()> {
        let (lmin, lmax) = s.eigen_bounds()?;
        let (lm, lp, mu) = match (self.lambda_minus.last(), self.lambda_plus.last(), self.mu.last()) {
            (Some(&a), Some(&b), Some(&c)) => (a.min(lmin), b.max(lmax), c.max(lmax / lmin)),
            _ => (lmin, lmax, lmax / lmin),
        };
        self.states.push(s);
        self.lambda_minus.push(lm);
        self.lambda_plus.push(lp);
        self.mu.push(mu);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn check_flow(flow: &FlowSpec) -> Result<()> {
    let report = validate_flow(flow);
    if !report.compliant {
        return Err(Error::Config(format!("flow violates: {}", report.violations.join("; "))));
    }
    Ok(())
}

fn step_error(step: usize, e: Error) -> Error {
    match e {
        Error::Solver { iterations, residual } => Error::Solver { iterations, residual },
        Error::Refusal { reason, required_n } => {
            Error::Refusal { reason: format!("core step {step}: {reason}"), required_n }
        }
        Error::Consistency(m) => Error::Consistency(format!("core step {step}: {m}")),
        Error::Validation(m) => Error::Validation(format!("core step {step}: {m}")),
        other => other,
    }
}

/// Iterates the core for `steps` steps, returning the states computed
/// before the first failure together with that failure.
pub fn iterate_core_partial(
    flow: &FlowSpec,
    steps: usize,
    n: usize,
    tol: f64,
) -> Result<(CoreTrajectory, Option<(usize, Error)>)> {
    check_flow(flow)?;
    if steps >= flow.n_scales() {
        return Err(Error::Config(format!(
            "{steps} core steps need {} scales, flow has {}",
            steps + 1,
            flow.n_scales()
        )));
    }
    let gammas: Vec<f64> = (0..=steps).map(|k| flow.gamma(k)).collect();
    let a0 = SpdTensor::isotropic(flow.kappa / flow.gamma(0));
    let mut traj = CoreTrajectory::from_states(flow.kappa, gammas, vec![a0])?;
    traj.n_used[0] = n;
    for k in 0..steps {
        let a = traj.states[k];
        let ratio = flow.gamma(k) / flow.gamma(k + 1);
        match effective_conductivity(&a, flow.eddy(k), n, tol) {
            Ok(ec) => {
                let next = ec.sigma_sym.scale(ratio);
                if let Err(e) = traj.push_state(next) {
                    return Ok((traj, Some((k + 1, step_error(k + 1, e)))));
                }
                traj.residuals.push(ec.residual);
                traj.iterations.push(ec.iterations);
                traj.n_used.push(ec.n);
            }
            Err(e) => return Ok((traj, Some((k + 1, step_error(k + 1, e))))),
        }
    }
    Ok((traj, None))
}

/// Iterates the core for `steps` steps on an `n × n` grid.
pub fn iterate_core(flow: &FlowSpec, steps: usize, n: usize, tol: f64) -> Result<CoreTrajectory> {
    let (traj, err) = iterate_core_partial(flow, steps, n, tol)?;
    match err {
        Some((_, e)) => Err(e),
        None => Ok(traj),
    }
}

/// One row of the diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub n: usize,
    pub state: SpdTensor,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mu: f64,
    pub peclet: SpdTensor,
    pub residual: f64,
}

/// Stability, ubiety and distortion sequences with the Peclet tensors.
pub fn diagnostics(traj: &CoreTrajectory) -> Result<Vec<DiagnosticRow>> {
    if traj.is_empty() {
        return Err(Error::Config("empty trajectory".into()));
    }
    traj.states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (lmin, lmax) = s.eigen_bounds()?;
            Ok(DiagnosticRow {
                n: k,
                state: *s,
                lambda_min: lmin,
                lambda_max: lmax,
                lambda_minus: traj.lambda_minus[k],
                lambda_plus: traj.lambda_plus[k],
                mu: traj.mu[k],
                peclet: s.peclet()?,
                residual: traj.residuals[k],
            })
        })
        .collect()
}

/// Fitted constant of the pathology bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathologyReport {
    /// Smallest `C` with `λ⁺ₙ ≤ κ + C/λ⁻ₙ₋₁` and `μₙ ≤ C/(λ⁻ₙ)²` along
    /// the trajectory.
    pub c_hat: f64,
    /// `Ĉ / (K₀² (1 − 1/γ_min)⁻¹)`.
    pub c_normalized: f64,
    /// `(λ⁺ₙ − κ) λ⁻ₙ₋₁` for `n ≥ 1`.
    pub ubiety_products: Vec<f64>,
    /// `μₙ (λ⁻ₙ)²`.
    pub distortion_products: Vec<f64>,
    pub flags: Vec<String>,
}

fn growing(seq: &[f64]) -> bool {
    if seq.len() < 3 {
        return false;
    }
    let tail = &seq[seq.len() - 3..];
    tail[0] < tail[1] && tail[1] < tail[2] && tail[2] > 2.0 * tail[0].max(f64::MIN_POSITIVE)
}

/// Fits the constant of the pathology bounds and flags unbounded growth
/// (strictly increasing over the last three steps with total growth
/// beyond a factor two).
pub fn pathology_bounds_check(traj: &CoreTrajectory, gamma_min: f64, k0: f64) -> Result<PathologyReport> {
    if traj.len() < 3 {
        return Err(Error::Config("pathology check needs a trajectory with n >= 2".into()));
    }
    let ubiety: Vec<f64> = (1..traj.len())
        .map(|n| (traj.lambda_plus[n] - traj.kappa) * traj.lambda_minus[n - 1])
        .collect();
    let distortion: Vec<f64> = (0..traj.len()).map(|n| traj.mu[n] * traj.lambda_minus[n].powi(2)).collect();
    let c_hat = ubiety.iter().chain(&distortion).copied().fold(0.0, f64::max);
    let reference = if gamma_min > 1.0 { k0 * k0 / (1.0 - 1.0 / gamma_min) } else { f64::NAN };
    let mut flags = Vec::new();
    if growing(&ubiety) {
        flags.push("lambda_plus_n * lambda_minus_{n-1} grows over the last steps".to_string());
    }
    if growing(&distortion) {
        flags.push("mu_n * lambda_minus_n^2 grows over the last steps".to_string());
    }
    Ok(PathologyReport {
        c_hat,
        c_normalized: c_hat / reference,
        ubiety_products: ubiety,
        distortion_products: distortion,
        flags,
    })
}

/// Regime of a core trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Stable,
    VanishingPolynomial,
    VanishingExponential,
    Undetermined,
}

/// Regime label with fit metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub kind: RegimeKind,
    /// Exponential: slope of `ln λ_min(Aⁿ)` in `n`. Polynomial: slope in
    /// `ln n`. Stable: `λ_min` of the last state.
    pub rate: f64,
    /// `1 − R²` of the chosen fit (0 for stable).
    pub confidence: f64,
    pub exp_r2: f64,
    pub poly_r2: f64,
    /// Number of trailing states used by the fits.
    pub window: usize,
}

/// Relative change below which consecutive states count as converged.
pub const STABLE_TOL: f64 = 1e-6;
/// Coefficient of determination required to accept a vanishing fit.
pub const FIT_R2: f64 = 0.99;

/// Classifies a trajectory: stable, then exponential, then polynomial
/// vanishing, otherwise undetermined.
pub fn classify_regime(traj: &CoreTrajectory) -> Result<RegimeLabel> {
    let len = traj.len();
    if len < 5 {
        return Err(Error::Config(format!("classification needs >= 5 states, got {len}")));
    }
    let s = &traj.states;
    let stable = (len - 3..len).all(|k| {
        let d = SpdTensor {
            a11: s[k].a11 - s[k - 1].a11,
            a12: s[k].a12 - s[k - 1].a12,
            a22: s[k].a22 - s[k - 1].a22,
        };
        d.max_abs() < STABLE_TOL * s[k].max_abs()
    });
    let lmins: Vec<f64> = s.iter().map(|t| t.lambda_min()).collect::<Result<_>>()?;
    let window = 3.max((len - 1) / 2).min(len - 1);
    let idx: Vec<usize> = (len - window..len).collect();
    let y: Vec<f64> = idx.iter().map(|&k| lmins[k].ln()).collect();
    let xe: Vec<f64> = idx.iter().map(|&k| k as f64).collect();
    let xp: Vec<f64> = idx.iter().map(|&k| (k as f64).ln()).collect();
    let exp = line_fit(&xe, &y);
    let poly = line_fit(&xp, &y);
    let r2 = |f: Option<crate::fit::LineFit>| f.map(|f| if f.r2.is_nan() { 0.0 } else { f.r2 }).unwrap_or(0.0);
    let (exp_r2, poly_r2) = (r2(exp), r2(poly));
    let label = |kind, rate, confidence| RegimeLabel { kind, rate, confidence, exp_r2, poly_r2, window };
    if stable {
        return Ok(label(RegimeKind::Stable, lmins[len - 1], 0.0));
    }
    if let Some(f) = exp {
        if f.slope < 0.0 && exp_r2 > FIT_R2 && exp_r2 >= poly_r2 {
            return Ok(label(RegimeKind::VanishingExponential, f.slope, 1.0 - exp_r2));
        }
    }
    if let Some(f) = poly {
        if f.slope < 0.0 && poly_r2 > FIT_R2 {
            return Ok(label(RegimeKind::VanishingPolynomial, f.slope, 1.0 - poly_r2));
        }
    }
    Ok(label(RegimeKind::Undetermined, f64::NAN, 1.0 - exp_r2.max(poly_r2)))
}

/// Fixed point `V(ζ₀) = γ` of the self-similar core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub gamma: f64,
    pub zeta0: f64,
}

/// Solves `V(ζ₀) = γ` on the interpolated curve. A `γ` above the achieved
/// range means `γ ≥ γ_c` as far as the curve can tell.
pub fn fixed_point(curve: &VCurve, gamma: f64) -> Result<FixedPoint> {
    if !(gamma > 1.0) {
        return Err(Error::Range { value: gamma, min: 1.0, max: f64::INFINITY });
    }
    Ok(FixedPoint { gamma, zeta0: v_inverse(curve, gamma)? })
}

/// Estimate of the critical rate `γ_c = V(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaC {
    /// Largest achieved `V` (a lower bound for `γ_c`).
    pub gamma_c_lower: f64,
    /// Extrapolated `V(0)` when the curve has levelled off.
    pub estimate: Option<f64>,
    pub divergent: bool,
    /// Log-log slope of `V` against `ζ` over the three smallest `ζ`.
    pub slope: f64,
    /// Difference between the extrapolate and the last value.
    pub uncertainty: f64,
}

/// Log-log slope below which `V` counts as still diverging.
pub const DIVERGENCE_SLOPE: f64 = -0.05;

/// Estimates `γ_c` from the three smallest resolved `ζ` of a curve.
pub fn gamma_c_estimate(curve: &VCurve) -> Result<GammaC> {
    let mut pts: Vec<(f64, f64)> = curve.converged().map(|p| (p.zeta, p.v)).collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let smallest_failed = curve
        .points
        .iter()
        .filter(|p| !p.converged)
        .filter(|p| pts.last().map(|l| p.zeta < l.0).unwrap_or(true))
        .filter_map(|p| p.required_n)
        .max();
    if pts.len() < 3 {
        return Err(Error::Refusal {
            reason: "fewer than three resolved small-zeta points".into(),
            required_n: smallest_failed.unwrap_or(0),
        });
    }
    let tail = &pts[pts.len() - 3..];
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let slope = line_fit(&x, &y).map(|f| f.slope).unwrap_or(0.0);
    let vmax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (z1, z2, z3) = (tail[0].0, tail[1].0, tail[2].0);
    let (v1, v2, v3) = (tail[0].1, tail[1].1, tail[2].1);
    let (d1, d2) = (v2 - v1, v3 - v2);
    // increments of V per unit of ln ζ; a converging tail has them shrinking
    let q = (d2 / (z2 / z3).ln()) / (d1 / (z1 / z2).ln());
    let shrinking = d1 > 0.0 && d2 > 0.0 && q < 1.0;
    if slope < DIVERGENCE_SLOPE && !shrinking {
        return Ok(GammaC { gamma_c_lower: vmax, estimate: None, divergent: true, slope, uncertainty: f64::INFINITY });
    }
    let est = if shrinking { power_tail_limit(tail).unwrap_or(v3) } else { v3 };
    let est = est.max(vmax);
    Ok(GammaC {
        gamma_c_lower: vmax,
        estimate: Some(est),
        divergent: false,
        slope,
        uncertainty: (est - v3).abs().max(d2.abs()),
    })
}

/// `V(0)` from the model `V(ζ) = V₀ − c ζᵖ` through three points
/// (Richardson extrapolation with the order fitted).
fn power_tail_limit(tail: &[(f64, f64)]) -> Option<f64> {
    let (z1, z2, z3) = (tail[0].0, tail[1].0, tail[2].0);
    let (v1, v2, v3) = (tail[0].1, tail[1].1, tail[2].1);
    let target = (v2 - v1) / (v3 - v2);
    let g = |p: f64| (z1.powf(p) - z2.powf(p)) / (z2.powf(p) - z3.powf(p));
    let (mut lo, mut hi) = (1e-6, 20.0);
    if !(g(lo) < target && g(hi) > target) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = (v3 - v2) / (z2.powf(p) - z3.powf(p));
    Some(v3 + c * z3.powf(p))
}

/// Direct multiscale conductivity against the reiterated estimate
/// `γₙ₊₁Aⁿ⁺¹ = γₙ σ_sym(Aⁿ, Eⁿ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleReport {
    pub n: usize,
    /// `σ_sym(κI, Γ^{0,n})`.
    pub direct: SpdTensor,
    pub reiterated: SpdTensor,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub n_used: usize,
}

/// Compares `σ_sym(κI, Σ_{k≤n} γₖ Eᵏ(x/Rₖ))` with the core recursion.
/// The direct solve runs on the period-`Rₙ` torus rescaled to the unit
/// cell with `per_period · Rₙ` points; the core step at scale `k` uses
/// `per_period · Rₖ` points, matching the resolution of that scale in the
/// direct solve.
pub fn multiscale_sandwich(
    flow: &FlowSpec,
    n: usize,
    per_period: usize,
    tol: f64,
    n_cap: usize,
) -> Result<MultiscaleReport> {
    check_flow(flow)?;
    if n > 2 {
        return Err(Error::Config(format!("multiscale sandwich supports n <= 2, got {n}")));
    }
    if n >= flow.n_scales() {
        return Err(Error::Config(format!("flow has only {} scales", flow.n_scales())));
    }
    for k in 1..=n {
        let r = flow.scales[k].r;
        if r.fract() != 0.0 {
            return Err(Error::Config(format!("scale {k}: ratio r = {r} is not an integer")));
        }
    }
    let big_rn = flow.big_r(n);
    let n_direct = per_period * big_rn as usize;
    if n_direct > n_cap {
        return Err(Error::Refusal {
            reason: format!("direct solve over period R_{n} = {big_rn} exceeds the grid budget {n_cap}"),
            required_n: n_direct,
        });
    }
    let mut view = FieldView::new();
    for k in 0..=n {
        view = view.with(flow.gamma(k), big_rn / flow.big_r(k), [0.0, 0.0], flow.eddy(k));
    }
    let kappa = SpdTensor::isotropic(flow.kappa);
    let direct = effective_conductivity(&kappa, &view, n_direct, tol)?.sigma_sym;

    let mut a = SpdTensor::isotropic(flow.kappa / flow.gamma(0));
    for k in 0..=n {
        let nk = per_period * flow.big_r(k) as usize;
        let s = effective_conductivity(&a, flow.eddy(k), nk, tol).map_err(|e| step_error(k + 1, e))?;
        if k == n {
            a = s.sigma_sym.scale(flow.gamma(k));
        } else {
            a = s.sigma_sym.scale(flow.gamma(k) / flow.gamma(k + 1));
        }
    }
    let (ratio_min, ratio_max, _, _) = ratio_interval(&direct, &a)?;
    Ok(MultiscaleReport { n, direct, reiterated: a, ratio_min, ratio_max, n_used: n_direct })
}

/// `K₀` over the scales of a flow.
pub fn flow_k0(flow: &FlowSpec) -> f64 {
    flow.scales.iter().map(|s| eddy_norms(&s.eddy).0).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Eddy;

    fn zero_flow(gamma: f64, scales: usize) -> FlowSpec {
        FlowSpec::self_similar(1.0, gamma, 4.0, &Eddy::zero(8).unwrap(), scales)
    }

    #[test]
    fn zero_eddy_decay_is_exact() {
        let t = iterate_core(&zero_flow(2.0, 11), 10, 16, 1e-8).unwrap();
        for (k, s) in t.states.iter().enumerate() {
            assert_eq!(*s, SpdTensor::isotropic(0.5f64.powi(k as i32)));
        }
        let r = classify_regime(&t).unwrap();
        assert_eq!(r.kind, RegimeKind::VanishingExponential);
        assert!((r.rate - 0.5f64.ln()).abs() < 1e-9 * 0.5f64.ln().abs());
        let p = pathology_bounds_check(&t, 2.0, 0.0).unwrap();
        assert!(p.flags.is_empty());
        assert_eq!(p.c_hat, 1.0);
    }

    #[test]
    fn constant_trajectory_is_stable() {
        let t = CoreTrajectory::from_states(1.0, vec![], vec![SpdTensor::identity(); 6]).unwrap();
        assert_eq!(classify_regime(&t).unwrap().kind, RegimeKind::Stable);
        let p = pathology_bounds_check(&t, 2.0, 1.0).unwrap();
        assert_eq!(p.c_hat, 1.0);
        assert!(p.flags.is_empty());
    }

    #[test]
    fn short_trajectory_rejected() {
        let t = CoreTrajectory::from_states(1.0, vec![], vec![SpdTensor::identity(); 4]).unwrap();
        assert!(classify_regime(&t).is_err());
    }

    #[test]
    fn non_compliant_flow_rejected() {
        let mut f = zero_flow(2.0, 3);
        f.scales[1].r = 1.5;
        assert!(matches!(iterate_core(&f, 2, 16, 1e-8), Err(Error::Config(_))));
    }
}
