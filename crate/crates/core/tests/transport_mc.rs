use eddylab_core::transport::{
    default_delta, estimate_nu, event_frequency, simulate_exit, simulate_pair, time_step, ExitFace, SimConfig,
};
use eddylab_core::{Eddy, Error, FlowSpec};

fn zero_flow() -> FlowSpec {
    FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::zero(8).unwrap(), 6)
}

fn cfg(n: usize, seed: u64) -> SimConfig {
    SimConfig { n_particles: n, seed, ..SimConfig::default() }
}

#[test]
fn deterministic_for_fixed_seed() {
    let flow = FlowSpec::self_similar(0.5, 2.0, 4.0, &Eddy::cellular(64).unwrap(), 2);
    let a = simulate_exit(&flow, 3.0, &cfg(300, 9)).unwrap();
    let b = simulate_exit(&flow, 3.0, &cfg(300, 9)).unwrap();
    assert_eq!(a, b);
    let c = simulate_exit(&flow, 3.0, &cfg(300, 10)).unwrap();
    assert_ne!(a.times, c.times);
}

#[test]
fn zero_drift_exit_matches_oracle() {
    let s = simulate_exit(&zero_flow(), 2.0, &cfg(4000, 1)).unwrap();
    assert!((s.mean - 0.5).abs() < 3.0 * s.stderr, "{} +- {}", s.mean, s.stderr);
    assert!(s.start_points.iter().all(|p| p[0].hypot(p[1]) < 2.0));
    assert_eq!(s.censored + s.n_uncensored(), 4000);
}

#[test]
fn zero_drift_pair_matches_doubled_diffusion() {
    let s = simulate_pair(&zero_flow(), 2.0, Some(512.0), &cfg(4000, 2)).unwrap();
    let want = 4.0 / 16.0;
    assert!((s.mean - want).abs() < 3.0 * s.stderr, "{} +- {}", s.mean, s.stderr);
    assert!((s.outer as f64) < 0.01 * 4000.0);
    assert!(s.times.iter().all(|t| *t > 0.0));
}

#[test]
fn outer_exits_shrink_with_l() {
    let small = simulate_pair(&zero_flow(), 2.0, Some(4.0), &cfg(2000, 3)).unwrap();
    let large = simulate_pair(&zero_flow(), 2.0, Some(32.0), &cfg(2000, 3)).unwrap();
    assert!(large.outer < small.outer);
    assert!(small.flagged);
}

#[test]
fn halving_dt_is_consistent() {
    let coarse = simulate_exit(&zero_flow(), 2.0, &cfg(4000, 4)).unwrap();
    let fine = simulate_exit(&zero_flow(), 2.0, &SimConfig { dt_factor: 0.125, ..cfg(4000, 5) }).unwrap();
    let se = coarse.stderr.hypot(fine.stderr);
    assert!((coarse.mean - fine.mean).abs() < 3.0 * se);
}

#[test]
fn time_step_respects_both_limits() {
    let flow = FlowSpec::self_similar(0.1, 2.0, 4.0, &Eddy::cellular(64).unwrap(), 3);
    let dt = time_step(&flow, 2, 10.0, 1.0);
    assert!((2.0 * 0.1 * dt).sqrt() <= 1.0 / 8.0 + 1e-12);
    let (_, k1) = eddylab_core::field::eddy_norms(&Eddy::cellular(64).unwrap());
    for k in 0..=2 {
        let (g, r) = (2f64.powi(k), 4f64.powi(k));
        assert!(dt <= r * r / (8.0 * g * k1) * (1.0 + 1e-12));
    }
}

#[test]
fn nu_needs_a_decade_of_radii() {
    let s: Vec<_> = [2.0, 3.0].iter().map(|&r| simulate_exit(&zero_flow(), r, &cfg(200, 6)).unwrap()).collect();
    assert!(matches!(estimate_nu(&s, None), Err(Error::Refusal { .. })));
}

#[test]
fn zero_flow_nu_is_small() {
    let s: Vec<_> =
        [4.0, 16.0, 64.0].iter().map(|&r| simulate_exit(&zero_flow(), r, &cfg(2000, 7)).unwrap()).collect();
    let nu = estimate_nu(&s, None).unwrap();
    assert!((nu.slope - 2.0).abs() < 3.0 * nu.slope_stderr + 0.02, "{nu:?}");
}

#[test]
fn delta_zero_event_is_containment() {
    let flow = FlowSpec::self_similar(0.5, 2.0, 4.0, &Eddy::cellular(64).unwrap(), 3);
    assert!((default_delta(&flow).unwrap() - 0.45).abs() < 1e-12);
    let t = event_frequency(&flow, &[4.0], Some(0.0), &cfg(500, 8)).unwrap();
    let s = simulate_exit(&flow, 4.0, &cfg(500, 8)).unwrap();
    let want = s.times.iter().zip(&s.faces).filter(|(t, f)| **f == ExitFace::Inner && **t <= 16.0).count();
    assert_eq!(t.rows[0].frequency, want as f64 / 500.0);
    assert!(t.rows[0].frequency > 0.9);
}
