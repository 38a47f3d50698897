use eddylab_core::exit_pde::{
    exit_sandwich_check, mean_exit_time, solve_exit_time, variational_lower_bound, Domain, TestFunction,
};
use eddylab_core::{Eddy, Error, FlowSpec, SpdTensor};

fn zero_flow(kappa: f64) -> FlowSpec {
    FlowSpec::self_similar(kappa, 2.0, 4.0, &Eddy::zero(8).unwrap(), 1)
}

/// Mean of `ψ` for `−κΔψ = 1` on a square of side `s`, by the sine series.
fn square_series(side: f64, kappa: f64) -> f64 {
    let mut sum = 0.0;
    for m in (1..400).step_by(2) {
        for n in (1..400).step_by(2) {
            let (m, n) = (m as f64, n as f64);
            sum += 1.0 / (m * m * n * n * (m * m + n * n));
        }
    }
    64.0 * side * side / (std::f64::consts::PI.powi(6) * kappa) * sum
}

#[test]
fn disk_matches_pure_diffusion_oracle() {
    for (kappa, r) in [(1.0, 4.0), (0.5, 1.0)] {
        let f = solve_exit_time(&SpdTensor::isotropic(kappa), &zero_flow(kappa), 0, Domain::Disk { radius: r }, 128, 1e-10)
            .unwrap();
        let want = r * r / (8.0 * kappa);
        assert!((mean_exit_time(&f) - want).abs() < 0.01 * want);
    }
}

#[test]
fn square_matches_series_oracle() {
    let f = solve_exit_time(&SpdTensor::identity(), &zero_flow(1.0), 0, Domain::Square { side: 2.0 }, 128, 1e-10).unwrap();
    let want = square_series(2.0, 1.0);
    assert!((mean_exit_time(&f) - want).abs() < 0.02 * want, "{} vs {want}", mean_exit_time(&f));
}

#[test]
fn maximum_principle_and_boundary_values() {
    let flow = FlowSpec::self_similar(0.5, 1.0, 4.0, &Eddy::cellular(64).unwrap(), 1);
    let f = solve_exit_time(&SpdTensor::isotropic(0.5), &flow, 0, Domain::Disk { radius: 2.0 }, 96, 1e-9).unwrap();
    assert!(f.min_interior > 0.0);
    for (k, &inside) in f.interior.iter().enumerate() {
        if !inside {
            assert_eq!(f.psi[k], 0.0);
        }
    }
}

#[test]
fn psi_scales_quadratically_with_radius() {
    let a = SpdTensor::identity();
    let f1 = solve_exit_time(&a, &zero_flow(1.0), 0, Domain::Disk { radius: 1.0 }, 64, 1e-11).unwrap();
    let f2 = solve_exit_time(&a, &zero_flow(1.0), 0, Domain::Disk { radius: 2.0 }, 64, 1e-11).unwrap();
    let ratio = mean_exit_time(&f2) / mean_exit_time(&f1);
    assert!((ratio - 4.0).abs() < 1e-8);
}

#[test]
fn sandwich_for_cellular_flow() {
    let flow = FlowSpec::self_similar(1.0, 1.0, 4.0, &Eddy::cellular(64).unwrap(), 1);
    let r = exit_sandwich_check(&SpdTensor::identity(), &flow, 0, Domain::Disk { radius: 4.0 }, 128, 1e-9).unwrap();
    assert!(r.strict);
    assert!((r.lambda - 1.0).abs() < 0.01, "lambda {}", r.lambda);
    assert!((r.upper - 2.0).abs() < 0.02);
    let z = exit_sandwich_check(&SpdTensor::identity(), &zero_flow(1.0), 0, Domain::Disk { radius: 4.0 }, 64, 1e-9)
        .unwrap();
    assert_eq!(z.lambda, 0.0);
    assert!(z.lower == z.middle && z.middle == z.upper);
}

#[test]
fn variational_brackets_are_lower_bounds() {
    let a = SpdTensor::isotropic(0.5);
    let flow = FlowSpec::self_similar(0.5, 1.0, 4.0, &Eddy::cellular(64).unwrap(), 1);
    let f = solve_exit_time(&a, &flow, 0, Domain::Disk { radius: 2.0 }, 96, 1e-10).unwrap();
    for tf in [TestFunction::DriftFree, TestFunction::Paraboloid, TestFunction::Zero] {
        let r = variational_lower_bound(&f, &a, &flow, 0, &tf, 1e-10).unwrap();
        assert!(r.valid);
        if tf != TestFunction::Zero {
            assert!(r.gap > 0.0 && r.bracket > 0.0);
        }
    }
    let zf = solve_exit_time(&a, &zero_flow(0.5), 0, Domain::Disk { radius: 2.0 }, 96, 1e-11).unwrap();
    let r = variational_lower_bound(&zf, &a, &zero_flow(0.5), 0, &TestFunction::DriftFree, 1e-11).unwrap();
    assert!(r.gap.abs() < 1e-8 * r.integral);
}

#[test]
fn coarse_grid_is_refused() {
    let flow = FlowSpec::self_similar(1.0, 1.0, 4.0, &Eddy::cellular(64).unwrap(), 1);
    let r = solve_exit_time(&SpdTensor::identity(), &flow, 0, Domain::Disk { radius: 16.0 }, 64, 1e-8);
    assert!(matches!(r, Err(Error::Refusal { .. })));
}
