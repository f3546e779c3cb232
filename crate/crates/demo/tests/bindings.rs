use serde_json::Value;
use tangents_demo::{density_curve, garding_spectrum, riesz};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn riesz_of_minmax_is_p_and_dual_is_conjugate() {
    let v = parse(riesz("minmax", 4, 3.0));
    assert!((v["p"]["value"].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert!((v["conjugacy_product"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn bad_inputs_come_back_as_errors() {
    assert!(parse(riesz("pconvex", 3, 7.0))["error"].is_string());
    assert!(parse(riesz("nonsense", 3, 2.0))["error"].is_string());
    assert!(parse(garding_spectrum("det_real", "1,2;3"))["error"].is_string());
    assert!(parse(density_curve("no_such_field", 2.0, 4, 100, 1))["error"].is_string());
}

#[test]
fn det_real_spectrum_matches_symmetric_eigenvalues() {
    let v = parse(garding_spectrum("det_real", "2,1,0; 1,-1,0.5; 0,0.5,3"));
    let a: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let b: Vec<f64> = v["symmetric_eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
    assert_eq!(v["branches"].as_array().unwrap().len(), 3);
}

#[test]
fn corrupted_operator_reports_hyperbolicity_failure() {
    // det(sI + A) + 0.5 = s³ − s + 0.5 has negative discriminant.
    let v = parse(garding_spectrum("corrupted", "0,1,0; 1,0,0; 0,0,0"));
    assert!(v["error"].as_str().unwrap().contains("hyperbolicity"), "{v}");
}

#[test]
fn kernel_density_is_one() {
    let v = parse(density_curve("kernel(p=3, n=3)", 3.0, 5, 200, 1));
    assert!((v["theta"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["radii"].as_array().unwrap().len(), 6);
}
