//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string;
//! failures come back as `{"error": "..."}` so the page never has to catch.

use serde::Serialize;
use serde_json::json;
use tangents_core::flow::{catalog_field, density, FlowSchedule};
use tangents_core::garding::{garding_eigenvalues, GardingOperator};
use tangents_core::linalg::{ComplexStructure, QuaternionStructure, SymMatrix};
use tangents_core::subeq::{
    dual, riesz_characteristic_decreasing, riesz_characteristic_increasing, RieszOptions, Subequation,
};
use wasm_bindgen::prelude::*;

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    let v = match r {
        Ok(v) => serde_json::to_value(v).unwrap_or_else(|e| json!({ "error": e.to_string() })),
        Err(e) => json!({ "error": e }),
    };
    v.to_string()
}

fn subequation(kind: &str, n: usize, p: f64) -> Result<Subequation, String> {
    let f = match kind {
        "orphant" => Ok(Subequation::orphant(n)),
        "laplacian" => Ok(Subequation::laplacian(n)),
        "minmax" => Subequation::minmax(n, p),
        "min2" => Subequation::min2(n, p),
        "pconvex" => Subequation::pconvex(n, p),
        other => return Err(format!("unknown subequation `{other}`")),
    };
    f.map_err(|e| e.to_string())
}

/// Riesz characteristics of F and of its dual, with the conjugacy product.
#[wasm_bindgen]
pub fn riesz(kind: &str, n: usize, p: f64) -> String {
    respond((|| {
        let f = subequation(kind, n, p)?;
        let opts = RieszOptions::default();
        let err = |e: tangents_core::Error| e.to_string();
        let p_f = riesz_characteristic_increasing(&f, opts).map_err(err)?.value;
        let q_f = riesz_characteristic_decreasing(&f, opts).map_err(err)?.value;
        let p_dual = riesz_characteristic_increasing(&dual(&f), opts).map_err(err)?.value;
        let product = match (p_f.finite(), p_dual.finite()) {
            (Some(a), Some(b)) => Some((a - 1.0) * (b - 1.0)),
            _ => None,
        };
        Ok(json!({ "name": f.name(), "p": p_f, "q": q_f, "p_dual": p_dual, "conjugacy_product": product }))
    })())
}

fn parse_matrix(text: &str) -> Result<SymMatrix, String> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| r.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", x.trim()))).collect())
        .collect::<Result<_, _>>()?;
    SymMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

fn operator(kind: &str, n: usize) -> Result<GardingOperator, String> {
    let op = match kind {
        "det_real" => GardingOperator::det_real(n),
        "det_complex" if n % 2 == 0 => GardingOperator::det_complex(ComplexStructure::standard(n / 2)),
        "det_quaternionic" if n % 4 == 0 => GardingOperator::det_quaternionic(QuaternionStructure::standard(n / 4)),
        "lag" if n % 2 == 0 => GardingOperator::lag(ComplexStructure::standard(n / 2)),
        "sigma2" => GardingOperator::det_real(n).and_then(|b| GardingOperator::elementary_symmetric(b, 2)),
        "corrupted" => GardingOperator::corrupted(n, 0.5),
        other => return Err(format!("operator `{other}` is unknown or does not fit n = {n}")),
    };
    op.map_err(|e| e.to_string())
}

/// Gårding eigenvalues of a matrix given as `a,b;c,d`, with the branch
/// margins (the k-th eigenvalue is the margin of branch k).
#[wasm_bindgen]
pub fn garding_spectrum(kind: &str, matrix: &str) -> String {
    respond((|| {
        let a = parse_matrix(matrix)?;
        let op = operator(kind, a.dim())?;
        let s = garding_eigenvalues(&op, &a).map_err(|e| e.to_string())?;
        let branches: Vec<_> = s
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &m)| json!({ "branch": k + 1, "margin": m, "member": m >= 0.0 }))
            .collect();
        Ok(json!({
            "operator": op.name(),
            "degree": op.degree(),
            "eigenvalues": s.eigenvalues,
            "residual": s.residual,
            "branches": branches,
            "symmetric_eigenvalues": a.eigenvalues(),
        }))
    })())
}

/// Sup-radius curve M(u, r) and density quotients for a catalog field.
#[wasm_bindgen]
pub fn density_curve(catalog: &str, p: f64, levels: u32, samples: usize, seed: u64) -> String {
    respond((|| {
        if levels < 2 || levels > 14 {
            return Err("levels must lie in 2..=14".to_string());
        }
        let u = catalog_field(catalog).map_err(|e| e.to_string())?;
        let schedule = FlowSchedule::dyadic(p, levels, samples, samples, seed);
        let r = density(&u, &schedule).map_err(|e| e.to_string())?;
        Ok(json!({
            "field": r.field,
            "p": r.p,
            "radii": r.radii,
            "sup": r.sup.iter().map(|s| s.value).collect::<Vec<_>>(),
            "theta": r.theta,
            "theta_extrapolated": r.theta_extrapolated,
            "quotients": r.table,
            "violations": r.violations.len(),
        }))
    })())
}
