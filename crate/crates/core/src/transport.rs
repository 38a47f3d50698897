//! Monte Carlo exit times of the Lagrangian diffusion
//! `dy = √(2κ) dω + v(y) dt` for single tracers and independent-noise pairs.
//!
//! Particle `i` draws from its own ChaCha stream `(seed, i)`, so results do
//! not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{eddy_norms, validate_flow, FlowSpec};
use crate::fit::weighted_line_fit;

/// Fraction of outer-face exits above which a pair run is flagged.
pub const OUTER_FLAG: f64 = 0.05;

fn default_dt_factor() -> f64 {
    0.25
}

fn default_particles() -> usize {
    10_000
}

fn default_max_steps() -> usize {
    10_000_000
}

/// Integration parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Fraction of the stability limit used as the time step.
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    #[serde(default = "default_particles")]
    pub n_particles: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Largest included scale; defaults to every scale with `Rₖ ≤ 8r`.
    #[serde(default)]
    pub scale_truncation: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_factor: default_dt_factor(),
            n_particles: default_particles(),
            seed: 0,
            max_steps: default_max_steps(),
            scale_truncation: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_factor > 0.0 && self.dt_factor <= 1.0) {
            return Err(Error::Config(format!("dt_factor {} outside (0, 1]", self.dt_factor)));
        }
        if self.n_particles == 0 || self.max_steps == 0 {
            return Err(Error::Config("n_particles and max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Which boundary ended a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitFace {
    /// `|y| = r` for a single tracer, `|y − z| = r` for a pair.
    Inner,
    /// `|y|² + |z|² = l²`.
    Outer,
    Censored,
}

/// Exit times of one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeSample {
    pub r: f64,
    pub l: Option<f64>,
    pub dt: f64,
    pub scale_truncation: usize,
    /// Per-particle exit time (elapsed time at censoring for censored ones).
    pub times: Vec<f64>,
    pub faces: Vec<ExitFace>,
    pub start_points: Vec<[f64; 2]>,
    /// Second particle of each pair.
    pub partner_points: Vec<[f64; 2]>,
    pub mean: f64,
    pub stderr: f64,
    pub censored: usize,
    pub outer: usize,
    /// Pair run with more than 5% outer-face exits.
    pub flagged: bool,
}

impl ExitTimeSample {
    pub fn n_particles(&self) -> usize {
        self.times.len()
    }

    pub fn n_uncensored(&self) -> usize {
        self.times.len() - self.censored
    }

    /// Exit times through the inner face.
    pub fn inner_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().zip(&self.faces).filter(|(_, f)| **f == ExitFace::Inner).map(|(t, _)| *t)
    }
}

fn default_truncation(flow: &FlowSpec, r: f64) -> usize {
    (0..flow.n_scales()).take_while(|&k| flow.big_r(k) <= 8.0 * r).last().unwrap_or(0)
}

/// Time step `dt_factor · min(advective crossing, diffusive limit)` for
/// scales `0..=n_max`.
pub fn time_step(flow: &FlowSpec, n_max: usize, r: f64, dt_factor: f64) -> f64 {
    let mut adv = f64::INFINITY;
    let mut finest = r;
    for k in 0..=n_max {
        let e = flow.eddy(k);
        if e.is_zero() {
            continue;
        }
        let big_r = flow.big_r(k);
        let (_, k1) = eddy_norms(e);
        adv = adv.min(big_r * big_r / (8.0 * flow.gamma(k) * k1));
        finest = finest.min(big_r);
    }
    let diff = (finest / 8.0).powi(2) / (2.0 * flow.kappa);
    dt_factor * adv.min(diff)
}

fn setup(flow: &FlowSpec, r: f64, cfg: &SimConfig) -> Result<(usize, f64)> {
    cfg.validate()?;
    let report = validate_flow(flow);
    if !(flow.kappa > 0.0) || flow.scales.is_empty() {
        return Err(Error::Config(report.violations.join("; ")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Config(format!("radius must be positive (got {r})")));
    }
    let n_max = cfg.scale_truncation.unwrap_or_else(|| default_truncation(flow, r));
    if n_max >= flow.n_scales() {
        return Err(Error::Config(format!(
            "scale truncation {n_max} out of range for a flow with {} scales",
            flow.n_scales()
        )));
    }
    Ok((n_max, time_step(flow, n_max, r, cfg.dt_factor)))
}

fn rng_for(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn uniform_disk(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    loop {
        let x = radius * (2.0 * rng.random::<f64>() - 1.0);
        let y = radius * (2.0 * rng.random::<f64>() - 1.0);
        if x * x + y * y < radius * radius {
            return [x, y];
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

/// Probability that a Brownian bridge with per-coordinate variance `var`
/// touches a flat boundary at distances `d0`, `d1` from the endpoints.
fn bridge_hit(d0: f64, d1: f64, var: f64) -> f64 {
    (-2.0 * d0 * d1 / var).exp()
}

fn summarize(times: &[f64], faces: &[ExitFace]) -> Result<(f64, f64, usize, usize)> {
    let done: Vec<f64> =
        times.iter().zip(faces).filter(|(_, f)| **f != ExitFace::Censored).map(|(t, _)| *t).collect();
    let censored = times.len() - done.len();
    let outer = faces.iter().filter(|f| **f == ExitFace::Outer).count();
    if done.is_empty() {
        return Err(Error::Statistical(format!(
            "all {} particles censored; increase max_steps",
            times.len()
        )));
    }
    let n = done.len() as f64;
    let mean = pairwise_sum(&done) / n;
    let dev: Vec<f64> = done.iter().map(|t| (t - mean).powi(2)).collect();
    let stderr = if done.len() > 1 { (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt() } else { f64::NAN };
    Ok((mean, stderr, censored, outer))
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Exit times from the disk `|y| < r`, started uniformly in the disk.
pub fn simulate_exit(flow: &FlowSpec, r: f64, cfg: &SimConfig) -> Result<ExitTimeSample> {
    let (n_max, dt) = setup(flow, r, cfg)?;
    let s = (2.0 * flow.kappa * dt).sqrt();
    let var = 2.0 * flow.kappa * dt;
    let runs: Vec<(f64, ExitFace, [f64; 2])> = (0..cfg.n_particles)
        .into_par_iter()
        .map(|id| {
            let mut rng = rng_for(cfg.seed, id);
            let start = uniform_disk(&mut rng, r);
            let mut y = start;
            let mut t = 0.0;
            for _ in 0..cfg.max_steps {
                let v = flow.velocity_unchecked(y, n_max);
                let xi = gauss(&mut rng);
                let y1 = [y[0] + v[0] * dt + s * xi[0], y[1] + v[1] * dt + s * xi[1]];
                let d0 = r - y[0].hypot(y[1]);
                let d1 = r - y1[0].hypot(y1[1]);
                let u: f64 = rng.random();
                if d1 <= 0.0 {
                    return (t + dt * d0 / (d0 - d1), ExitFace::Inner, start);
                }
                if u < bridge_hit(d0, d1, var) {
                    return (t + dt * d0 / (d0 + d1), ExitFace::Inner, start);
                }
                y = y1;
                t += dt;
            }
            (t, ExitFace::Censored, start)
        })
        .collect();
    let times: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let faces: Vec<ExitFace> = runs.iter().map(|r| r.1).collect();
    let (mean, stderr, censored, outer) = summarize(&times, &faces)?;
    Ok(ExitTimeSample {
        r,
        l: None,
        dt,
        scale_truncation: n_max,
        times,
        faces,
        start_points: runs.iter().map(|r| r.2).collect(),
        partner_points: Vec::new(),
        mean,
        stderr,
        censored,
        outer,
        flagged: false,
    })
}

/// Default outer radius `max(4r, R_{n(r)+1})`.
pub fn default_pair_l(flow: &FlowSpec, r: f64) -> f64 {
    let next = flow.scales_below(r) + 1;
    let big = if next < flow.n_scales() { flow.big_r(next) } else { 0.0 };
    (4.0 * r).max(big)
}

fn pair_start(rng: &mut ChaCha8Rng, r: f64, l: f64) -> ([f64; 2], [f64; 2]) {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    loop {
        let u = uniform_disk(rng, r * inv);
        let w = uniform_disk(rng, l);
        if u[0] * u[0] + u[1] * u[1] + w[0] * w[0] + w[1] * w[1] < l * l {
            let y = [(w[0] + u[0]) * inv, (w[1] + u[1]) * inv];
            let z = [(w[0] - u[0]) * inv, (w[1] - u[1]) * inv];
            return (y, z);
        }
    }
}

/// Separation times of pairs sharing the drift with independent noise,
/// started uniformly on `{|y − z| < r, |y|² + |z|² < l²}`.
pub fn simulate_pair(flow: &FlowSpec, r: f64, l: Option<f64>, cfg: &SimConfig) -> Result<ExitTimeSample> {
    let l = l.unwrap_or_else(|| default_pair_l(flow, r));
    if !(l > r) {
        return Err(Error::Config(format!("outer radius l = {l} must exceed r = {r}")));
    }
    let (n_max, dt) = setup(flow, r, cfg)?;
    let s = (2.0 * flow.kappa * dt).sqrt();
    let var = 2.0 * flow.kappa * dt;
    let runs: Vec<(f64, ExitFace, [f64; 2], [f64; 2])> = (0..cfg.n_particles)
        .into_par_iter()
        .map(|id| {
            let mut rng = rng_for(cfg.seed, id);
            let (y0, z0) = pair_start(&mut rng, r, l);
            let (mut y, mut z) = (y0, z0);
            let mut t = 0.0;
            let dist = |y: [f64; 2], z: [f64; 2]| {
                (
                    r - (y[0] - z[0]).hypot(y[1] - z[1]),
                    l - (y[0] * y[0] + y[1] * y[1] + z[0] * z[0] + z[1] * z[1]).sqrt(),
                )
            };
            for _ in 0..cfg.max_steps {
                let vy = flow.velocity_unchecked(y, n_max);
                let vz = flow.velocity_unchecked(z, n_max);
                let (a, b) = (gauss(&mut rng), gauss(&mut rng));
                let y1 = [y[0] + vy[0] * dt + s * a[0], y[1] + vy[1] * dt + s * a[1]];
                let z1 = [z[0] + vz[0] * dt + s * b[0], z[1] + vz[1] * dt + s * b[1]];
                let (s0, o0) = dist(y, z);
                let (s1, o1) = dist(y1, z1);
                let (us, uo): (f64, f64) = (rng.random(), rng.random());
                let sep = if s1 <= 0.0 {
                    Some(s0 / (s0 - s1))
                } else if us < bridge_hit(s0, s1, 2.0 * var) {
                    Some(s0 / (s0 + s1))
                } else {
                    None
                };
                let out = if o1 <= 0.0 {
                    Some(o0 / (o0 - o1))
                } else if uo < bridge_hit(o0, o1, var) {
                    Some(o0 / (o0 + o1))
                } else {
                    None
                };
                match (sep, out) {
                    (Some(a), Some(b)) if b < a => return (t + dt * b, ExitFace::Outer, y0, z0),
                    (Some(a), _) => return (t + dt * a, ExitFace::Inner, y0, z0),
                    (None, Some(b)) => return (t + dt * b, ExitFace::Outer, y0, z0),
                    (None, None) => {}
                }
                y = y1;
                z = z1;
                t += dt;
            }
            (t, ExitFace::Censored, y0, z0)
        })
        .collect();
    let times: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let faces: Vec<ExitFace> = runs.iter().map(|r| r.1).collect();
    let inner: Vec<f64> =
        times.iter().zip(&faces).filter(|(_, f)| **f == ExitFace::Inner).map(|(t, _)| *t).collect();
    let inner_faces = vec![ExitFace::Inner; inner.len()];
    let (_, _, censored, outer) = summarize(&times, &faces)?;
    let (mean, stderr, _, _) = summarize(&inner, &inner_faces)?;
    Ok(ExitTimeSample {
        r,
        l: Some(l),
        dt,
        scale_truncation: n_max,
        times,
        faces,
        start_points: runs.iter().map(|r| r.2).collect(),
        partner_points: runs.iter().map(|r| r.3).collect(),
        mean,
        stderr,
        censored,
        outer,
        flagged: outer as f64 > OUTER_FLAG * cfg.n_particles as f64,
    })
}

/// `ν(r) = 2 − ln τ / ln r` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuRow {
    pub r: f64,
    pub mean: f64,
    pub stderr: f64,
    pub nu: f64,
    pub nu_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuTable {
    pub rows: Vec<NuRow>,
    /// Fitted slope of `ln τ` against `ln r`.
    pub slope: f64,
    pub slope_stderr: f64,
    /// `2 − slope`.
    pub nu_hat: f64,
    /// `ln γ / ln ρ` for self-similar flows.
    pub prediction: Option<f64>,
}

impl NuTable {
    /// `(2 − slope)/stderr`.
    pub fn sigmas_below_diffusive(&self) -> f64 {
        (2.0 - self.slope) / self.slope_stderr
    }
}

/// `ln γ / ln ρ` when every scale ratio and amplitude ratio is the same.
pub fn self_similar_prediction(flow: &FlowSpec) -> Option<f64> {
    let rep = validate_flow(flow);
    match (rep.gamma_min, rep.gamma_max, rep.rho_min, rep.rho_max) {
        (Some(g0), Some(g1), Some(r0), Some(r1)) if g0 == g1 && r0 == r1 => Some(g0.ln() / r0.ln()),
        _ => None,
    }
}

/// Anomalous exponent per radius and from a weighted fit across radii.
pub fn estimate_nu(samples: &[ExitTimeSample], prediction: Option<f64>) -> Result<NuTable> {
    if samples.len() < 3 {
        return Err(Error::Refusal {
            reason: format!("need at least 3 radii, got {}", samples.len()),
            required_n: 3,
        });
    }
    let rmin = samples.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
    let rmax = samples.iter().map(|s| s.r).fold(0.0, f64::max);
    if rmax < 10.0 * rmin || rmin <= 1.0 {
        return Err(Error::Refusal {
            reason: format!("radii [{rmin}, {rmax}] must exceed 1 and span a decade"),
            required_n: 3,
        });
    }
    for s in samples {
        if 2 * s.censored >= s.n_particles() {
            return Err(Error::Statistical(format!("radius {}: majority censored", s.r)));
        }
    }
    let rows: Vec<NuRow> = samples
        .iter()
        .map(|s| {
            let lr = s.r.ln();
            NuRow { r: s.r, mean: s.mean, stderr: s.stderr, nu: 2.0 - s.mean.ln() / lr, nu_err: s.stderr / s.mean / lr }
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
    let w: Vec<f64> = rows.iter().map(|r| (r.mean / r.stderr).powi(2)).collect();
    let fit = weighted_line_fit(&x, &y, &w)
        .ok_or_else(|| Error::Statistical("degenerate radius set".into()))?;
    Ok(NuTable { rows, slope: fit.slope, slope_stderr: fit.slope_stderr, nu_hat: 2.0 - fit.slope, prediction })
}

/// Empirical `P[τ(r) ≤ r^{2−δ}]` at one radius with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub r: f64,
    pub threshold: f64,
    pub frequency: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTable {
    pub delta: f64,
    pub rows: Vec<EventRow>,
    pub nondecreasing: bool,
    pub nonincreasing: bool,
    /// No consecutive drop exceeds `TREND_Z` pooled binomial standard errors.
    pub nondecreasing_within_noise: bool,
    pub nonincreasing_within_noise: bool,
}

/// Two-proportion z threshold for the noise-tolerant trend flags.
pub const TREND_Z: f64 = 2.0;

fn trend_z(a: &EventRow, b: &EventRow) -> f64 {
    let (na, nb) = (a.n as f64, b.n as f64);
    let p = (a.frequency * na + b.frequency * nb) / (na + nb);
    let se = (p * (1.0 - p) * (1.0 / na + 1.0 / nb)).sqrt();
    let d = b.frequency - a.frequency;
    if se > 0.0 {
        d / se
    } else {
        0.0
    }
}

/// `0.9 ln γ_min / ln ρ_max`.
pub fn default_delta(flow: &FlowSpec) -> Option<f64> {
    let rep = validate_flow(flow);
    Some(0.9 * rep.gamma_min?.ln() / rep.rho_max?.ln())
}

fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let d = 1.0 + z * z / n;
    let c = (p + z * z / (2.0 * n)) / d;
    let h = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / d;
    let lo = if k == 0.0 { 0.0 } else { (c - h).max(0.0) };
    let hi = if k == n { 1.0 } else { (c + h).min(1.0) };
    (lo, hi)
}

/// Frequency of the fast-exit event per radius. Censored particles count
/// as failures.
pub fn event_frequency(flow: &FlowSpec, radii: &[f64], delta: Option<f64>, cfg: &SimConfig) -> Result<EventTable> {
    let delta = match delta.or_else(|| default_delta(flow)) {
        Some(d) => d,
        None => return Err(Error::Config("delta needs at least two scales or an override".into())),
    };
    let samples = radii.iter().map(|&r| simulate_exit(flow, r, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(event_table(&samples, delta))
}

/// [`event_frequency`] on already simulated samples.
pub fn event_table(samples: &[ExitTimeSample], delta: f64) -> EventTable {
    let rows: Vec<EventRow> = samples
        .iter()
        .map(|s| {
            let threshold = s.r.powf(2.0 - delta);
            let k = s.inner_times().filter(|t| *t <= threshold).count();
            let n = s.n_particles();
            let (lower, upper) = wilson(k, n);
            EventRow { r: s.r, threshold, frequency: k as f64 / n as f64, lower, upper, n }
        })
        .collect();
    let nondecreasing = rows.windows(2).all(|w| w[1].frequency >= w[0].frequency);
    let nonincreasing = rows.windows(2).all(|w| w[1].frequency <= w[0].frequency);
    let nondecreasing_within_noise = rows.windows(2).all(|w| trend_z(&w[0], &w[1]) >= -TREND_Z);
    let nonincreasing_within_noise = rows.windows(2).all(|w| trend_z(&w[0], &w[1]) <= TREND_Z);
    EventTable { delta, rows, nondecreasing, nonincreasing, nondecreasing_within_noise, nonincreasing_within_noise }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Eddy;

    fn zero_flow() -> FlowSpec {
        FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::zero(8).unwrap(), 3)
    }

    #[test]
    fn bookkeeping_and_positivity() {
        let cfg = SimConfig { n_particles: 200, max_steps: 50, seed: 3, ..SimConfig::default() };
        let s = simulate_exit(&zero_flow(), 4.0, &cfg).unwrap();
        assert_eq!(s.n_uncensored() + s.censored, 200);
        assert!(s.censored > 0);
        assert!(s.times.iter().all(|t| *t > 0.0));
    }

    #[test]
    fn all_censored_is_an_error() {
        let cfg = SimConfig { n_particles: 10, max_steps: 1, dt_factor: 1e-6, ..SimConfig::default() };
        let r = simulate_exit(&zero_flow(), 1000.0, &cfg);
        assert!(matches!(r, Err(Error::Statistical(_))), "{r:?}");
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn trend_tolerates_sampling_noise() {
        let row = |frequency: f64| EventRow { r: 1.0, threshold: 1.0, frequency, lower: 0.0, upper: 1.0, n: 10_000 };
        assert!(trend_z(&row(0.9962), &row(0.9959)).abs() < 1.0);
        assert!(trend_z(&row(0.99), &row(0.95)) < -TREND_Z);
        assert_eq!(trend_z(&row(1.0), &row(1.0)), 0.0);
    }
}
