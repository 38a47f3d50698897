//! Periodic eddies on the unit torus and the multiscale flow built from them.
//!
//! In two dimensions a skew stream matrix is a single scalar `h = E₁₂`, so an
//! eddy is a periodic stream function sampled on an `n × n` grid. The drift
//! derived from a stream function `H` is the perpendicular gradient
//! `(∂₂H, −∂₁H)`, divergence-free by construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Anything that can be sampled as a unit-periodic stream function.
pub trait StreamField: Sync {
    fn value(&self, x: f64, y: f64) -> f64;
}

/// Closed-form generators an eddy may be built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EddyKind {
    /// Identically zero.
    Zero,
    /// `sin(2πx) cos(2πy)`.
    Cellular,
    /// `sin(2πy)`, a pure shear along the first axis.
    Shear,
    /// `sin(2πx) sin(2πy) g(4|x − c|²)` with a compact cutoff `g`.
    Implosive,
    /// The three-parameter nested-trigonometric eddy of the illustrative
    /// multiscale flow, shifted so that it vanishes at the origin.
    Meander,
    /// Arbitrary samples, bilinearly interpolated.
    Grid,
}

/// Smooth cutoff used by the implosive eddy: 1 on `[0, 1/3]`, 0 on
/// `[2/3, ∞)`, quintic smoothstep in between (C² continuous).
pub fn implosive_cutoff(s: f64) -> f64 {
    if s <= 1.0 / 3.0 {
        1.0
    } else if s >= 2.0 / 3.0 {
        0.0
    } else {
        let t = 3.0 * (s - 1.0 / 3.0);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn meander_raw(x: f64, y: f64) -> f64 {
    let u = TWO_PI * x + 3.0 * (TWO_PI * y - 3.0 * (TWO_PI * x + 1.0).sin()).cos();
    let v = TWO_PI * y + 3.0 * (TWO_PI * x - 3.0 * (TWO_PI * y + 1.0).sin()).cos();
    2.0 * u.sin() * v.sin()
}

#[inline]
fn wrap(t: f64) -> f64 {
    let w = t - t.floor();
    // t - floor(t) can round up to exactly 1.0 for tiny negative t
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn analytic(kind: EddyKind, x: f64, y: f64) -> f64 {
    match kind {
        EddyKind::Zero => 0.0,
        EddyKind::Cellular => (TWO_PI * x).sin() * (TWO_PI * y).cos(),
        EddyKind::Shear => (TWO_PI * y).sin(),
        EddyKind::Implosive => {
            let (dx, dy) = (x - 0.5, y - 0.5);
            let g = implosive_cutoff(4.0 * (dx * dx + dy * dy));
            if g == 0.0 {
                0.0
            } else {
                (TWO_PI * x).sin() * (TWO_PI * y).sin() * g
            }
        }
        EddyKind::Meander => meander_raw(x, y),
        EddyKind::Grid => unreachable!("grid eddies are interpolated"),
    }
}

/// A periodic stream function on `[0,1)²`, stored as `n × n` samples
/// (row-major, `data[j * n + i] = h(i/n, j/n)`).
///
/// Eddies built from a closed form keep their generator: sampling off the
/// grid evaluates the formula, so resampling at a finer resolution is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EddySpec", into = "EddySpec")]
pub struct Eddy {
    kind: EddyKind,
    n: usize,
    data: Vec<f64>,
    /// Value subtracted from the closed form (non-zero only for `Meander`).
    offset: f64,
}

/// Serialized form of an eddy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EddySpec {
    pub kind: EddyKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<f64>>,
}

impl TryFrom<EddySpec> for Eddy {
    type Error = Error;

    fn try_from(spec: EddySpec) -> Result<Self> {
        match spec.kind {
            EddyKind::Grid => {
                let data = spec
                    .data
                    .ok_or_else(|| Error::Config("grid eddy requires \"data\"".into()))?;
                Eddy::from_grid(spec.n, data)
            }
            kind => {
                if spec.data.is_some() {
                    return Err(Error::Config(format!(
                        "eddy kind {kind:?} does not take \"data\""
                    )));
                }
                Eddy::analytic(kind, spec.n)
            }
        }
    }
}

impl From<Eddy> for EddySpec {
    fn from(e: Eddy) -> Self {
        let data = (e.kind == EddyKind::Grid).then_some(e.data);
        EddySpec { kind: e.kind, n: e.n, data }
    }
}

fn check_resolution(n: usize, min: usize) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::Config(format!("resolution {n} is not a power of two")));
    }
    if n < min {
        return Err(Error::Config(format!("resolution {n} below minimum {min}")));
    }
    Ok(())
}

impl Eddy {
    /// Samples a closed-form eddy on an `n × n` grid.
    pub fn analytic(kind: EddyKind, n: usize) -> Result<Self> {
        let min = match kind {
            EddyKind::Implosive => 64,
            EddyKind::Grid => {
                return Err(Error::Config("grid eddies need explicit samples".into()))
            }
            _ => 8,
        };
        check_resolution(n, min)?;
        let offset = if kind == EddyKind::Meander { meander_raw(0.0, 0.0) } else { 0.0 };
        let h = 1.0 / n as f64;
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(analytic(kind, i as f64 * h, j as f64 * h) - offset);
            }
        }
        Ok(Self { kind, n, data, offset })
    }

    pub fn cellular(n: usize) -> Result<Self> {
        Self::analytic(EddyKind::Cellular, n)
    }

    pub fn implosive(n: usize) -> Result<Self> {
        Self::analytic(EddyKind::Implosive, n)
    }

    pub fn shear(n: usize) -> Result<Self> {
        Self::analytic(EddyKind::Shear, n)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::analytic(EddyKind::Zero, n)
    }

    pub fn meander(n: usize) -> Result<Self> {
        Self::analytic(EddyKind::Meander, n)
    }

    pub fn from_grid(n: usize, data: Vec<f64>) -> Result<Self> {
        check_resolution(n, 2)?;
        if data.len() != n * n {
            return Err(Error::Config(format!(
                "grid eddy with n = {n} needs {} samples, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid eddy samples must be finite".into()));
        }
        Ok(Self { kind: EddyKind::Grid, n, data, offset: 0.0 })
    }

    pub fn kind(&self) -> EddyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Value subtracted from the generator to enforce `h(0) = 0`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[(j % self.n) * self.n + (i % self.n)]
    }

    fn bilinear(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        let fx = wrap(x) * n as f64;
        let fy = wrap(y) * n as f64;
        let i0 = (fx.floor() as usize).min(n - 1);
        let j0 = (fy.floor() as usize).min(n - 1);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
        let v00 = self.data[j0 * n + i0];
        let v10 = self.data[j0 * n + i1];
        let v01 = self.data[j1 * n + i0];
        let v11 = self.data[j1 * n + i1];
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    /// Centered finite-difference gradient with the grid step `1/n`.
    ///
    /// Cellular and shear eddies use the exact closed form of the same
    /// difference quotient.
    pub fn fd_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let d = 1.0 / self.n as f64;
        match self.kind {
            EddyKind::Zero => [0.0, 0.0],
            EddyKind::Cellular => {
                let damp = (TWO_PI * d).sin() / d;
                let (sx, cx) = (TWO_PI * x).sin_cos();
                let (sy, cy) = (TWO_PI * y).sin_cos();
                [cx * cy * damp, -sx * sy * damp]
            }
            EddyKind::Shear => {
                let damp = (TWO_PI * d).sin() / d;
                [0.0, (TWO_PI * y).cos() * damp]
            }
            _ => {
                let inv = 0.5 / d;
                [
                    (self.value(x + d, y) - self.value(x - d, y)) * inv,
                    (self.value(x, y + d) - self.value(x, y - d)) * inv,
                ]
            }
        }
    }
}

impl StreamField for Eddy {
    fn value(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            EddyKind::Grid => self.bilinear(x, y),
            EddyKind::Implosive | EddyKind::Meander => {
                analytic(self.kind, wrap(x), wrap(y)) - self.offset
            }
            kind => analytic(kind, wrap(x), wrap(y)),
        }
    }
}

/// One term `weight · E(scale · x + shift)` of a composite field.
#[derive(Debug, Clone, Copy)]
pub struct Term<'a> {
    pub weight: f64,
    pub scale: f64,
    pub shift: [f64; 2],
    pub eddy: &'a Eddy,
}

/// Sampler for weighted sums of scaled and translated eddies.
#[derive(Debug, Clone, Default)]
pub struct FieldView<'a> {
    pub terms: Vec<Term<'a>>,
}

impl<'a> FieldView<'a> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn of(eddy: &'a Eddy) -> Self {
        Self::new().with(1.0, 1.0, [0.0, 0.0], eddy)
    }

    pub fn with(mut self, weight: f64, scale: f64, shift: [f64; 2], eddy: &'a Eddy) -> Self {
        self.terms.push(Term { weight, scale, shift, eddy });
        self
    }

    /// Composes a further scaling `x ↦ ρx` onto every term.
    pub fn scaled(mut self, rho: f64) -> Self {
        for t in &mut self.terms {
            t.scale *= rho;
        }
        self
    }

    /// Multiplies every term by `c`.
    pub fn weighted(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.weight *= c;
        }
        self
    }

    pub fn extend(mut self, other: FieldView<'a>) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.weight == 0.0 || t.eddy.is_zero())
    }

    /// Finest resolution of any term measured in units of the unit cell.
    pub fn finest_resolution(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.eddy.is_zero())
            .map(|t| t.eddy.n() as f64 * t.scale.abs())
            .fold(0.0, f64::max)
    }

    /// Upper estimate of the Lipschitz constant of the composite field.
    pub fn lipschitz(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight.abs() * t.scale.abs() * eddy_norms(t.eddy).1)
            .sum()
    }
}

impl StreamField for FieldView<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * t.eddy.value(t.scale * x + t.shift[0], t.scale * y + t.shift[1]))
            .sum()
    }
}

/// `S_ρ E`: the eddy sampled at `ρx`.
pub fn scale_eddy(eddy: &Eddy, rho: f64) -> FieldView<'_> {
    FieldView::new().with(1.0, rho, [0.0, 0.0], eddy)
}

/// `Θ_y E`: the eddy sampled at `x + y`.
pub fn translate_eddy(eddy: &Eddy, shift: [f64; 2]) -> FieldView<'_> {
    FieldView::new().with(1.0, 1.0, shift, eddy)
}

/// Discrete sup norm `K₀` and discrete Lipschitz constant `K₁` of an eddy.
pub fn eddy_norms(eddy: &Eddy) -> (f64, f64) {
    let n = eddy.n();
    let mut k0 = 0.0_f64;
    let mut k1 = 0.0_f64;
    for j in 0..n {
        for i in 0..n {
            let v = eddy.at(i, j);
            k0 = k0.max(v.abs());
            k1 = k1.max((eddy.at(i + 1, j) - v).abs()).max((eddy.at(i, j + 1) - v).abs());
        }
    }
    (k0, k1 * n as f64)
}

/// One scale `γₖ Eᵏ(x/Rₖ)` of the multiscale flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scale {
    pub gamma: f64,
    pub r: f64,
    pub eddy: Eddy,
}

/// The multiscale flow: molecular conductivity plus the list of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub kappa: f64,
    pub scales: Vec<Scale>,
}

impl FlowSpec {
    /// Self-similar flow `γₖ = γᵏ`, `rₖ = ρ` (k ≥ 1), same eddy at every scale.
    pub fn self_similar(kappa: f64, gamma: f64, rho: f64, eddy: &Eddy, n_scales: usize) -> Self {
        let scales = (0..n_scales)
            .map(|k| Scale {
                gamma: gamma.powi(k as i32),
                r: if k == 0 { 1.0 } else { rho },
                eddy: eddy.clone(),
            })
            .collect();
        Self { kappa, scales }
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.scales[k].gamma
    }

    /// `Rₖ = r₁ ⋯ rₖ`, with `R₀ = 1`.
    pub fn big_r(&self, k: usize) -> f64 {
        self.scales[1..=k].iter().map(|s| s.r).product()
    }

    pub fn eddy(&self, k: usize) -> &Eddy {
        &self.scales[k].eddy
    }

    fn check_truncation(&self, n_max: usize) -> Result<()> {
        if n_max >= self.scales.len() {
            return Err(Error::Config(format!(
                "scale index {n_max} out of range for a flow with {} scales",
                self.scales.len()
            )));
        }
        Ok(())
    }

    /// Largest `p` with `R_p ≤ r` (the number of scales averaged at radius r).
    pub fn scales_below(&self, r: f64) -> usize {
        (0..self.scales.len()).take_while(|&k| self.big_r(k) <= r).last().unwrap_or(0)
    }

    /// The truncated stream function `Σ_{k ≤ n_max} γₖ hₖ(x/Rₖ)` as a field
    /// in physical coordinates.
    pub fn physical_view(&self, n_max: usize) -> Result<FieldView<'_>> {
        self.check_truncation(n_max)?;
        let mut view = FieldView::new();
        for k in 0..=n_max {
            view = view.with(self.gamma(k), 1.0 / self.big_r(k), [0.0, 0.0], self.eddy(k));
        }
        Ok(view)
    }

    /// Divergence-free drift `(∂₂H, −∂₁H)` truncated at scale `n_max`.
    pub fn velocity(&self, x: [f64; 2], n_max: usize) -> Result<[f64; 2]> {
        self.check_truncation(n_max)?;
        Ok(self.velocity_unchecked(x, n_max))
    }

    /// As [`velocity`](Self::velocity) without the range check, for inner loops.
    pub fn velocity_unchecked(&self, x: [f64; 2], n_max: usize) -> [f64; 2] {
        let mut v = [0.0, 0.0];
        let mut big_r = 1.0;
        for (k, s) in self.scales[..=n_max].iter().enumerate() {
            if k > 0 {
                big_r *= s.r;
            }
            if s.eddy.kind() == EddyKind::Zero {
                continue;
            }
            let inv = 1.0 / big_r;
            let g = s.eddy.fd_gradient(x[0] * inv, x[1] * inv);
            let c = s.gamma * inv;
            v[0] += c * g[1];
            v[1] -= c * g[0];
        }
        v
    }
}

/// Outcome of checking a flow against the model hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub compliant: bool,
    pub violations: Vec<String>,
    pub deviations: Vec<String>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub k0: f64,
    pub k1: f64,
}

/// Lists every violated hypothesis of the multiscale model.
pub fn validate_flow(flow: &FlowSpec) -> FlowReport {
    let mut violations = Vec::new();
    let mut deviations = Vec::new();
    if !(flow.kappa > 0.0 && flow.kappa.is_finite()) {
        violations.push(format!("kappa must be positive (got {})", flow.kappa));
    }
    if flow.scales.is_empty() {
        violations.push("flow has no scales".to_string());
    }
    let (mut k0, mut k1) = (0.0_f64, 0.0_f64);
    for (k, s) in flow.scales.iter().enumerate() {
        let (a, b) = eddy_norms(&s.eddy);
        k0 = k0.max(a);
        k1 = k1.max(b);
        if s.eddy.at(0, 0) != 0.0 {
            violations.push(format!("scale {k}: E^k(0)=0 violated (h(0,0) = {})", s.eddy.at(0, 0)));
        }
        if s.eddy.offset() != 0.0 {
            deviations.push(format!(
                "scale {k}: generator shifted by {} to enforce h(0,0)=0",
                -s.eddy.offset()
            ));
        }
    }
    if let Some(first) = flow.scales.first() {
        if first.gamma != 1.0 {
            violations.push(format!("gamma_0 = 1 violated (got {})", first.gamma));
        }
        if first.r != 1.0 {
            violations.push(format!("R_0 = r_0 = 1 violated (got {})", first.r));
        }
    }
    let ratios: Vec<f64> = flow.scales.iter().skip(1).map(|s| s.r).collect();
    let grow: Vec<f64> = flow.scales.windows(2).map(|w| w[1].gamma / w[0].gamma).collect();
    let rho_min = ratios.iter().copied().reduce(f64::min);
    let rho_max = ratios.iter().copied().reduce(f64::max);
    let gamma_min = grow.iter().copied().reduce(f64::min);
    let gamma_max = grow.iter().copied().reduce(f64::max);
    for (k, r) in ratios.iter().enumerate() {
        if !(*r >= 2.0) {
            violations.push(format!("scale {}: rho_min >= 2 violated (r = {r})", k + 1));
        }
    }
    for (k, g) in grow.iter().enumerate() {
        if !(*g > 1.0) {
            violations.push(format!("scale {}: gamma_min > 1 violated (ratio = {g})", k + 1));
        }
    }
    if let (Some(gmax), Some(rmin)) = (gamma_max, rho_min) {
        if !(gmax < rmin) {
            violations.push(format!("gamma_max < rho_min^alpha violated ({gmax} >= {rmin})"));
        }
    }
    FlowReport {
        compliant: violations.is_empty(),
        violations,
        deviations,
        rho_min,
        rho_max,
        gamma_min,
        gamma_max,
        k0,
        k1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cellular_samples() {
        let e = Eddy::cellular(8).unwrap();
        assert_eq!(e.at(2, 0), 1.0);
        assert_eq!(e.value(0.25, 0.0), 1.0);
        assert_eq!(e.at(0, 0), 0.0);
        assert!(matches!(Eddy::cellular(12), Err(Error::Config(_))));
        let (k0, _) = eddy_norms(&Eddy::cellular(256).unwrap());
        assert!((k0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn implosive_samples() {
        let e = Eddy::implosive(256).unwrap();
        assert!(e.value(0.5, 0.5).abs() < 1e-15);
        assert_eq!(e.value(0.0, 0.0), 0.0);
        assert!(Eddy::implosive(32).is_err());
        // strictly-zero samples are exactly the nodes outside the cutoff disk
        let n = 256;
        let mut zeros = 0;
        let mut outside = 0;
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
                let s = 4.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2));
                if s >= 2.0 / 3.0 {
                    outside += 1;
                }
                if e.at(i, j) == 0.0 {
                    zeros += 1;
                }
            }
        }
        assert_eq!(zeros, outside);
        assert!(outside > 0);
    }

    #[test]
    fn cutoff_is_smooth_step() {
        assert_eq!(implosive_cutoff(0.2), 1.0);
        assert_eq!(implosive_cutoff(0.7), 0.0);
        assert!((implosive_cutoff(0.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        assert_eq!(eddy_norms(&Eddy::zero(16).unwrap()), (0.0, 0.0));
        let (k0, k1) = eddy_norms(&Eddy::cellular(256).unwrap());
        assert!((k0 - 1.0).abs() < 1e-3);
        assert!((k1 / TWO_PI - 1.0).abs() < 0.02);
    }

    #[test]
    fn scaling_and_translation() {
        let e = Eddy::cellular(64).unwrap();
        let id = scale_eddy(&e, 1.0);
        for j in 0..64 {
            for i in 0..64 {
                let (x, y) = (i as f64 / 64.0, j as f64 / 64.0);
                assert_eq!(id.value(x, y), e.at(i, j));
            }
        }
        let s2 = scale_eddy(&e, 2.0);
        assert_eq!(s2.value(0.125, 0.0), 1.0);
        let t = translate_eddy(&e, [0.5, 0.0]);
        assert!(t.value(0.0, 0.0).abs() < 1e-15);
        assert_eq!(translate_eddy(&e, [0.0, 0.0]).value(0.3, 0.7), e.value(0.3, 0.7));
    }

    #[test]
    fn grid_eddy_round_trip_and_periodicity() {
        let data: Vec<f64> = (0..16).map(|k| k as f64 * 0.1).collect();
        let e = Eddy::from_grid(4, data).unwrap();
        assert_eq!(e.value(0.25, 0.5), e.at(1, 2));
        assert_eq!(e.value(0.25, 0.5), e.value(1.25, 0.5));
        let json = serde_json::to_string(&e).unwrap();
        let back: Eddy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert!(Eddy::from_grid(4, vec![0.0; 15]).is_err());
    }

    #[test]
    fn velocity_of_cellular_flow() {
        let e = Eddy::cellular(4096).unwrap();
        let flow = FlowSpec::self_similar(1.0, 1.0, 2.0, &e, 1);
        let v = flow.velocity([0.25, 0.25], 0).unwrap();
        assert!((v[0] + TWO_PI).abs() < 1e-5);
        assert!(v[1].abs() < 1e-12);
        assert!(flow.velocity([0.0, 0.0], 1).is_err());
        let z = FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::zero(8).unwrap(), 3);
        assert_eq!(z.velocity([0.3, 0.1], 2).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn flow_json_rejects_unknown_keys() {
        let ok = r#"{"kappa": 1.0, "scales": [{"gamma": 1.0, "r": 1.0, "eddy": {"kind": "cellular", "n": 16}}]}"#;
        let flow: FlowSpec = serde_json::from_str(ok).unwrap();
        assert_eq!(flow.n_scales(), 1);
        let bad = r#"{"kappa": 1.0, "scale": []}"#;
        assert!(serde_json::from_str::<FlowSpec>(bad).is_err());
        let bad_eddy = r#"{"kappa": 1.0, "scales": [{"gamma": 1.0, "r": 1.0, "eddy": {"kind": "cellular", "n": 16, "data": [0.0]}}]}"#;
        assert!(serde_json::from_str::<FlowSpec>(bad_eddy).is_err());
    }
}
