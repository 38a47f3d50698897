use eddylab_core::{Error, SpdTensor};
use proptest::prelude::*;

fn spd() -> impl Strategy<Value = SpdTensor> {
    (0.05f64..10.0, 0.05f64..10.0, -0.95f64..0.95)
        .prop_map(|(a, b, c)| SpdTensor::new(a, c * (a * b).sqrt(), b).unwrap())
}

#[test]
fn rejects_indefinite() {
    assert!(SpdTensor::new(1.0, 2.0, 1.0).is_err());
    assert!(SpdTensor::new(-1.0, 0.0, 1.0).is_err());
    let singular = SpdTensor::new(1.0, 1.0, 1.0).unwrap();
    assert!(matches!(singular.eigen_bounds(), Err(Error::Validation(_))));
}

#[test]
fn unknown_json_keys_are_rejected() {
    assert!(serde_json::from_str::<SpdTensor>(r#"{"a11": 1, "a12": 0, "a22": 1, "b": 2}"#).is_err());
}

proptest! {
    #[test]
    fn eigen_bounds_bracket_quadratic_form(t in spd(), th in 0.0f64..std::f64::consts::PI) {
        let (lo, hi) = t.eigen_bounds().unwrap();
        let q = t.quad([th.cos(), th.sin()]);
        prop_assert!(q >= lo * (1.0 - 1e-12) && q <= hi * (1.0 + 1e-12));
        prop_assert!((lo + hi - t.trace()).abs() < 1e-9 * t.trace());
        prop_assert!((lo * hi - t.det()).abs() < 1e-9 * hi * hi);
    }

    #[test]
    fn inverse_round_trip(t in spd()) {
        let u = t.inverse().unwrap().inverse().unwrap();
        prop_assert!((u.a11 - t.a11).abs() < 1e-9 * t.max_abs());
        prop_assert!((u.a12 - t.a12).abs() < 1e-9 * t.max_abs());
    }

    #[test]
    fn ratio_bounds_are_one_for_self(t in spd()) {
        let (lo, hi) = t.ratio_bounds(&t).unwrap();
        prop_assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn loewner_order_of_sum(a in spd(), b in spd()) {
        prop_assert!(a.loewner_le(&a.add(&b), 1e-12));
    }
}
