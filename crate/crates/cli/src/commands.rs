//! Subcommand implementations.

use eddylab_core::cell::{
    effective_conductivity, effective_conductivity_adaptive, two_scale_compare, translation_sensitivity,
    v_curve, EffectiveConductivity, VCurve,
};
use eddylab_core::exit_pde::{
    exit_sandwich_check, mean_exit_time, solve_exit_time, variational_lower_bound, Domain,
};
use eddylab_core::field::validate_flow;
use eddylab_core::renorm::{
    classify_regime, diagnostics, fixed_point, flow_k0, gamma_c_estimate, iterate_core_partial,
    pathology_bounds_check,
};
use eddylab_core::transport::{
    default_delta, estimate_nu, event_table, self_similar_prediction, simulate_exit, simulate_pair,
    ExitFace,
};
use eddylab_core::{Error, FieldView, FlowSpec, SpdTensor};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{num, Sink};

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Core(Error::Refusal { .. } | Error::Solver { .. }) => 2,
            CliError::Core(Error::Consistency(_)) => 3,
            CliError::Io(_) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Exit code of a command that wrote its outputs.
pub type Outcome = Result<u8, CliError>;

fn header<C: Serialize>(command: &str, cfg: &C) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    })
}

fn with(mut base: Value, key: &str, v: impl Serialize) -> Value {
    base[key] = serde_json::to_value(v).unwrap_or(Value::Null);
    base
}

fn tensor_row(t: &SpdTensor) -> [String; 3] {
    [num(t.a11), num(t.a12), num(t.a22)]
}

pub fn homogenize(cfg: &HomogenizeConfig, sink: &mut Sink) -> Outcome {
    let field = FieldView::new().with(cfg.gamma, 1.0, [0.0, 0.0], &cfg.eddy);
    let ec: EffectiveConductivity = if cfg.adaptive {
        effective_conductivity_adaptive(&cfg.a, &field, cfg.n, cfg.tol, cfg.n_cap)?
    } else {
        effective_conductivity(&cfg.a, &field, cfg.n, cfg.tol)?
    };
    let full_sym = [ec.sigma_full[0][0], 0.5 * (ec.sigma_full[0][1] + ec.sigma_full[1][0]), ec.sigma_full[1][1]];
    let sym_dev = (full_sym[0] - ec.sigma_sym.a11)
        .abs()
        .max((full_sym[1] - ec.sigma_sym.a12).abs())
        .max((full_sym[2] - ec.sigma_sym.a22).abs())
        / ec.sigma_sym.max_abs();
    let checks = json!({
        "upper_bound": ec.sigma_sym.loewner_le(&ec.upper, 10.0 * cfg.tol * ec.upper.max_abs()),
        "lower_bound": ec.lower.loewner_le(&ec.sigma_sym, 10.0 * cfg.tol * ec.upper.max_abs()),
        "symmetric_part_deviation": sym_dev,
    });
    let out = with(with(header("homogenize", cfg), "result", ec), "checks", checks);
    sink.json("homogenize.json", &out)?;
    let mut rows = Vec::new();
    for (name, t) in [("sigma_sym", ec.sigma_sym), ("lower", ec.lower), ("upper", ec.upper)] {
        let [a, b, c] = tensor_row(&t);
        rows.push(vec![name.to_string(), a, b.clone(), b, c]);
    }
    let f = ec.sigma_full;
    rows.push(vec!["sigma_full".into(), num(f[0][0]), num(f[0][1]), num(f[1][0]), num(f[1][1])]);
    sink.csv("homogenize.csv", &["tensor", "m11", "m12", "m21", "m22"], &rows)?;
    Ok(0)
}

fn swept(flow: &FlowSpec, g: f64) -> FlowSpec {
    let mut f = flow.clone();
    for (k, s) in f.scales.iter_mut().enumerate() {
        s.gamma = g.powi(k as i32);
    }
    f
}

pub fn core(cfg: &CoreConfig, sink: &mut Sink) -> Outcome {
    let flows: Vec<(Option<f64>, FlowSpec)> = match &cfg.gamma_sweep {
        Some(gs) => gs.iter().map(|&g| (Some(g), swept(&cfg.flow, g))).collect(),
        None => vec![(None, cfg.flow.clone())],
    };
    let mut runs = Vec::new();
    let mut code = 0;
    for (idx, (g, flow)) in flows.iter().enumerate() {
        let (traj, stop) = iterate_core_partial(flow, cfg.steps, cfg.n, cfg.tol)?;
        let regime = classify_regime(&traj).map_err(|e| e.to_string());
        let diag = diagnostics(&traj)?;
        let report = validate_flow(flow);
        let pathology = pathology_bounds_check(&traj, report.gamma_min.unwrap_or(f64::NAN), flow_k0(flow))
            .map_err(|e| e.to_string());
        let fixed = match (&cfg.fixed_point_zetas, flow.n_scales() > 1) {
            (Some(z), true) => {
                let curve = v_curve(flow.eddy(0), z, cfg.n, cfg.tol, cfg.n_cap)?;
                Some(fixed_point(&curve, flow.gamma(1) / flow.gamma(0)).map_err(|e| e.to_string()))
            }
            _ => None,
        };
        let stopped = stop.as_ref().map(|(step, e)| json!({"step": step, "reason": e.to_string()}));
        if let Some((_, e)) = &stop {
            code = code.max(CliError::Core(e.clone()).code());
        }
        let rows: Vec<Vec<String>> = diag
            .iter()
            .map(|d| {
                let [a, b, c] = tensor_row(&d.state);
                vec![
                    idx.to_string(),
                    d.n.to_string(),
                    a,
                    b,
                    c,
                    num(d.lambda_min),
                    num(d.lambda_max),
                    num(d.lambda_minus),
                    num(d.lambda_plus),
                    num(d.mu),
                    num(d.residual),
                ]
            })
            .collect();
        let name = if cfg.gamma_sweep.is_some() { format!("core_sweep_{idx}.csv") } else { "core.csv".into() };
        sink.csv(
            &name,
            &[
                "sweep_index", "n", "a11", "a12", "a22", "lambda_min", "lambda_max", "lambda_minus", "lambda_plus",
                "mu", "residual",
            ],
            &rows,
        )?;
        runs.push(json!({
            "sweep_index": idx,
            "gamma": g,
            "trajectory": traj,
            "diagnostics": diag,
            "regime": regime,
            "pathology": pathology,
            "fixed_point": fixed,
            "stopped": stopped,
        }));
    }
    sink.json("core.json", &with(header("core", cfg), "runs", runs))?;
    Ok(code)
}

pub fn exit_pde(cfg: &ExitPdeConfig, sink: &mut Sink) -> Outcome {
    let a = cfg.a.unwrap_or_else(|| SpdTensor::isotropic(cfg.flow.kappa));
    let n_max = cfg.n_max.unwrap_or(cfg.flow.n_scales().saturating_sub(1));
    let field = solve_exit_time(&a, &cfg.flow, n_max, cfg.domain, cfg.n, cfg.tol)?;
    let mean = mean_exit_time(&field);
    let sandwich = if cfg.sandwich {
        Some(exit_sandwich_check(&a, &cfg.flow, n_max, cfg.domain, cfg.n, cfg.tol)?)
    } else {
        None
    };
    let variational = cfg
        .test_functions
        .iter()
        .map(|f| variational_lower_bound(&field, &a, &cfg.flow, n_max, f, cfg.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let r = match cfg.domain {
        Domain::Disk { radius } => radius,
        Domain::Square { side } => 0.5 * side,
    };
    let summary = json!({
        "domain": cfg.domain,
        "r": r,
        "kappa": cfg.flow.kappa,
        "n_max": n_max,
        "mean_exit_time": mean,
        "integral": field.integral(),
        "min_interior": field.min_interior,
        "residual": field.residual,
        "iterations": field.iterations,
        "sandwich": sandwich,
        "variational": variational,
    });
    sink.json("exit_pde.json", &with(header("exit-pde", cfg), "summary", summary))?;
    let n = field.n;
    let rows: Vec<Vec<String>> = (0..n * n)
        .map(|k| {
            vec![
                num(field.coord(k % n)),
                num(field.coord(k / n)),
                num(field.psi[k]),
                u8::from(field.interior[k]).to_string(),
            ]
        })
        .collect();
    sink.csv("exit_pde_field.csv", &["x", "y", "psi", "interior"], &rows)?;
    Ok(0)
}

fn face_name(f: ExitFace) -> &'static str {
    match f {
        ExitFace::Inner => "inner",
        ExitFace::Outer => "outer",
        ExitFace::Censored => "censored",
    }
}

pub fn simulate(cfg: &SimulateConfig, sink: &mut Sink) -> Outcome {
    if cfg.radii.is_empty() {
        return Err(CliError::Usage("radii must not be empty".into()));
    }
    let mut samples = Vec::with_capacity(cfg.radii.len());
    for &r in &cfg.radii {
        let s = if cfg.pairs {
            simulate_pair(&cfg.flow, r, cfg.l_factor.map(|f| f * r), &cfg.sim)?
        } else {
            simulate_exit(&cfg.flow, r, &cfg.sim)?
        };
        samples.push(s);
    }
    let prediction = self_similar_prediction(&cfg.flow);
    let nu = if samples.len() >= 3 {
        Some(estimate_nu(&samples, prediction).map_err(|e| e.to_string()))
    } else {
        None
    };
    let delta = cfg.delta.or_else(|| default_delta(&cfg.flow));
    let events = if cfg.pairs { None } else { delta.map(|d| event_table(&samples, d)) };
    let runs: Vec<Value> = samples
        .iter()
        .map(|s| {
            json!({
                "r": s.r,
                "l": s.l,
                "n": s.n_particles(),
                "mean": s.mean,
                "stderr": s.stderr,
                "censored": s.censored,
                "outer": s.outer,
                "flagged": s.flagged,
                "dt": s.dt,
                "scale_truncation": s.scale_truncation,
                "nu_point": 2.0 - s.mean.ln() / s.r.ln(),
            })
        })
        .collect();
    let out = json!({
        "seed": cfg.sim.seed,
        "runs": runs,
        "nu": nu,
        "delta": delta,
        "events": events,
    });
    let mut base = header("simulate", cfg);
    for (k, v) in out.as_object().into_iter().flatten() {
        base[k] = v.clone();
    }
    sink.json("simulate.json", &base)?;
    for (idx, s) in samples.iter().enumerate() {
        let rows: Vec<Vec<String>> = s
            .times
            .iter()
            .zip(&s.faces)
            .enumerate()
            .map(|(id, (t, f))| {
                vec![
                    id.to_string(),
                    num(*t),
                    u8::from(*f == ExitFace::Censored).to_string(),
                    face_name(*f).to_string(),
                ]
            })
            .collect();
        sink.csv(
            &format!("simulate_r{idx}.csv"),
            &["particle_id", "exit_time", "censored", "exit_face"],
            &rows,
        )?;
    }
    Ok(0)
}

fn curve_rows(curve: &VCurve) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.zeta),
                num(p.v),
                num(p.w),
                p.n_used.to_string(),
                num(p.residual),
                u8::from(p.converged).to_string(),
            ]
        })
        .collect()
}

pub fn vcurve(cfg: &VCurveConfig, sink: &mut Sink) -> Outcome {
    let curve = v_curve(&cfg.eddy, &cfg.zetas, cfg.n, cfg.tol, cfg.n_cap)?;
    let gamma_c = gamma_c_estimate(&curve).map_err(|e| e.to_string());
    let fixed = cfg.fixed_point_gamma.map(|g| fixed_point(&curve, g).map_err(|e| e.to_string()));
    let out = with(with(with(header("vcurve", cfg), "curve", &curve), "gamma_c", gamma_c), "fixed_point", fixed);
    sink.json("vcurve.json", &out)?;
    sink.csv("vcurve.csv", &["zeta", "v", "w", "n_used", "residual", "converged"], &curve_rows(&curve))?;
    Ok(0)
}

pub fn validate(cfg: &ValidateConfig, sink: &mut Sink) -> Outcome {
    let report = validate_flow(&cfg.flow);
    sink.json_always("validate.json", &with(header("validate", cfg), "report", &report))?;
    Ok(if report.compliant { 0 } else { 1 })
}

pub fn two_scale(cfg: &TwoScaleConfig, sink: &mut Sink) -> Outcome {
    let reports = cfg
        .ratios
        .iter()
        .map(|&r| two_scale_compare(&cfg.a, &cfg.p, &cfg.k, r, cfg.per_period, cfg.tol, cfg.n_cap))
        .collect::<Result<Vec<_>, _>>()?;
    let devs: Vec<f64> = reports.iter().map(|r| r.max_deviation()).collect();
    let shrink: Vec<f64> = devs.windows(2).map(|w| w[0] / w[1]).collect();
    let out = json!({
        "reports": reports,
        "max_deviation": devs,
        "shrink_factors": shrink,
        "monotone": devs.windows(2).all(|w| w[1] < w[0]),
    });
    let mut base = header("two-scale", cfg);
    base["result"] = out;
    sink.json("two_scale.json", &base)?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![r.r.to_string(), num(r.ratio_min), num(r.ratio_max), num(r.max_deviation()), r.n_used.to_string()]
        })
        .collect();
    sink.csv("two_scale.csv", &["r", "ratio_min", "ratio_max", "max_deviation", "n_used"], &rows)?;
    Ok(0)
}

pub fn sensitivity(cfg: &SensitivityConfig, sink: &mut Sink) -> Outcome {
    let report =
        translation_sensitivity(&cfg.zetas, &cfg.p, &cfg.k, cfg.r, cfg.shift, cfg.per_period, cfg.tol, cfg.n_cap)?;
    sink.json("sensitivity.json", &with(header("sensitivity", cfg), "report", &report))?;
    let lmin = |t: &Option<SpdTensor>| t.and_then(|t| t.lambda_min().ok()).map(num).unwrap_or_default();
    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|p| vec![num(p.zeta), lmin(&p.base), lmin(&p.shifted), p.n_used.to_string()])
        .collect();
    sink.csv("sensitivity.csv", &["zeta", "lambda_min_base", "lambda_min_shifted", "n_used"], &rows)?;
    Ok(0)
}
