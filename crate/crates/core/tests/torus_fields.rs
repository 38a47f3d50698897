use eddylab_core::field::{eddy_norms, validate_flow};
use eddylab_core::{Eddy, EddyKind, FlowSpec, StreamField};
use proptest::prelude::*;

fn meander_flow() -> FlowSpec {
    FlowSpec::self_similar(1.0, 1.1, 3.0, &Eddy::meander(64).unwrap(), 4)
}

#[test]
fn meander_flow_is_compliant() {
    let r = validate_flow(&meander_flow());
    assert!(r.compliant, "{:?}", r.violations);
    assert_eq!(r.gamma_min, Some(1.1));
    assert_eq!(r.rho_max, Some(3.0));
}

#[test]
fn violations_are_listed() {
    let mut flow = meander_flow();
    flow.scales[2].r = 1.5;
    flow.scales[3].gamma = flow.scales[2].gamma;
    let r = validate_flow(&flow);
    assert!(!r.compliant);
    assert!(r.violations.len() >= 2);
}

#[test]
fn cellular_norms() {
    let (k0, k1) = eddy_norms(&Eddy::cellular(256).unwrap());
    assert!((k0 - 1.0).abs() < 1e-3);
    assert!((k1 - 2.0 * std::f64::consts::PI).abs() < 0.05);
}

#[test]
fn flow_round_trips_through_json() {
    let flow = meander_flow();
    let text = serde_json::to_string(&flow).unwrap();
    let back: FlowSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(flow, back);
}

fn divergence(flow: &FlowSpec, x: [f64; 2]) -> f64 {
    let h = 1e-4;
    let vx = |p: [f64; 2]| flow.velocity(p, flow.n_scales() - 1).unwrap();
    (vx([x[0] + h, x[1]])[0] - vx([x[0] - h, x[1]])[0] + vx([x[0], x[1] + h])[1] - vx([x[0], x[1] - h])[1])
        / (2.0 * h)
}

proptest! {
    #[test]
    fn grid_eddy_round_trips(data in prop::collection::vec(-3.0f64..3.0, 16)) {
        let mut data = data;
        data[0] = 0.0;
        let e = Eddy::from_grid(4, data).unwrap();
        let back: Eddy = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        prop_assert_eq!(e.kind(), EddyKind::Grid);
        prop_assert_eq!(e, back);
    }

    #[test]
    fn velocity_is_divergence_free(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let flow = FlowSpec::self_similar(1.0, 2.0, 4.0, &Eddy::cellular(64).unwrap(), 3);
        prop_assert!(divergence(&flow, [x, y]).abs() < 1e-3);
    }

    #[test]
    fn eddies_are_periodic(x in 0.0f64..1.0, y in 0.0f64..1.0, i in -3i32..3, j in -3i32..3) {
        for e in [Eddy::cellular(64).unwrap(), Eddy::implosive(64).unwrap(), Eddy::meander(64).unwrap()] {
            let d = e.value(x, y) - e.value(x + i as f64, y + j as f64);
            prop_assert!(d.abs() < 1e-9);
        }
    }
}
