use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn marginal_export_has_equal_length_columns() {
    let v = parse(mmq_demo::marginal_json(1.0, 1e-2, 3.0, 40).unwrap());
    for k in ["x", "log10_m", "log10_small", "log10_large"] {
        assert_eq!(v[k].as_array().unwrap().len(), 40, "{k}");
    }
}

#[test]
fn point_export_round_trips() {
    let v = parse(mmq_demo::point_json(0.5, 0.3, 1.0, 1e-3).unwrap());
    assert!(v["region"].is_string());
    assert!(v["log10_value"].as_f64().unwrap().is_finite());
}

#[test]
fn caustics_export_has_a_cusp() {
    let v = parse(mmq_demo::caustics_json(1.0, 60, 3.0).unwrap());
    let xc = v["cusp"][0].as_f64().unwrap();
    assert!((xc - 0.652).abs() < 1e-3, "{xc}");
}
