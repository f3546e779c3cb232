//! One function per subcommand. Each reads its spec keys, runs the core
//! pipeline and returns the payload, an optional table and any failed
//! assertion-style checks.

use anyhow::{bail, Result};
use serde_json::json;
use tangents_core::flow::{
    convex_tangent, density, expression_field, plane_restriction_density, restriction_profile,
    tangent_convergence, DensityReport, ScalarField,
};
use tangents_core::garding::{
    certify_garding, elementary_symmetric_value, garding_eigenvalues, GardingOperator,
};
use tangents_core::grassmann::{invariant_statistics, transitivity_check};
use tangents_core::sphjet::{
    assemble_phi, complex_radial_structure_check, fd_cross_check, jet_from_function, quaternionic_block_check,
    sphere_subeq_member, trace_of_phi, DEFAULT_STEP,
};
use tangents_core::subeq::{
    dual, expand, predicted_expansion_characteristic, riesz_characteristic_decreasing,
    riesz_characteristic_increasing, RieszOptions,
};
use tangents_core::linalg::{ComplexStructure, QuaternionStructure};

use crate::inputs::{self, FAMILY_KEYS, MATRIX_KEYS, SCHEDULE_KEYS, SUBEQ_KEYS};
use crate::report::{joined, num, Outcome, Table};
use crate::spec::Spec;

/// Parsed spec plus the command-line overrides.
pub struct Context {
    pub spec: Spec,
    pub seed: u64,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
}

impl Context {
    fn allow(&self, groups: &[&[&str]]) -> Result<()> {
        let mut keys: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
        keys.push("seed");
        keys.sort_unstable();
        keys.dedup();
        Ok(self.spec.restrict(&keys)?)
    }

    fn tol(&mut self, default: f64) -> f64 {
        let t = self.tol.unwrap_or(default);
        self.spec.record("tol", t);
        t
    }

    fn budget(&mut self, default: usize) -> usize {
        let b = self.budget.unwrap_or(default);
        self.spec.record("budget", b);
        b
    }
}

fn riesz_opts(cx: &mut Context) -> RieszOptions {
    let opts = RieszOptions { tol: cx.tol(1e-9), ..RieszOptions::default() };
    cx.spec.record("p_max", opts.p_max);
    opts
}

// ---- subeq ----------------------------------------------------------------

pub fn subeq_member(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS, MATRIX_KEYS])?;
    let f = inputs::subequation(&mut cx.spec)?;
    let tol = cx.tol(1e-10);
    let mats = inputs::matrices(&mut cx.spec, f.dim(), cx.seed)?;
    let mut table = Table::new(&["index", "margin", "member"]);
    let mut results = Vec::new();
    for (i, a) in mats.iter().enumerate() {
        let margin = f.margin(a)?;
        let member = margin >= -tol;
        table.push(vec![i.to_string(), num(margin), member.to_string()]);
        results.push(json!({ "matrix": a, "margin": margin, "member": member }));
    }
    Ok(Outcome::new(json!({ "subequation": f.name(), "tol": tol, "matrices": results }))?.with_table(table))
}

pub fn subeq_riesz(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS])?;
    let f = inputs::subequation(&mut cx.spec)?;
    let opts = riesz_opts(cx);
    let inc = riesz_characteristic_increasing(&f, opts)?;
    let dec = riesz_characteristic_decreasing(&f, opts)?;
    let mut table = Table::new(&["characteristic", "value", "bracket_lo", "bracket_hi"]);
    for (name, c) in [("increasing", &inc), ("decreasing", &dec)] {
        let [lo, hi] = c.bracket.unwrap_or([f64::NAN, f64::NAN]);
        table.push(vec![name.into(), c.value.to_string(), num(lo), num(hi)]);
    }
    Ok(Outcome::new(json!({ "subequation": f.name(), "increasing": inc, "decreasing": dec }))?.with_table(table))
}

pub fn subeq_dual(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS, MATRIX_KEYS])?;
    let f = inputs::subequation(&mut cx.spec)?;
    let opts = riesz_opts(cx);
    let d = dual(&f);
    let p_dual = riesz_characteristic_increasing(&d, opts)?;
    let q_f = riesz_characteristic_decreasing(&f, opts)?;
    let p_f = riesz_characteristic_increasing(&f, opts)?;
    // (p−1)(q−1) = 1 for conjugate exponents; reported, not enforced, since
    // it only holds for the O(n)-invariant families.
    let conjugacy = match (p_f.value.finite(), p_dual.value.finite()) {
        (Some(p), Some(q)) => Some((p - 1.0) * (q - 1.0)),
        _ => None,
    };
    let mats = inputs::matrices(&mut cx.spec, f.dim(), cx.seed)?;
    let mut table = Table::new(&["index", "dual_margin", "dual_member"]);
    let mut results = Vec::new();
    for (i, a) in mats.iter().enumerate() {
        let margin = d.margin(a)?;
        let member = margin >= -opts.tol;
        table.push(vec![i.to_string(), num(margin), member.to_string()]);
        results.push(json!({ "matrix": a, "margin": margin, "member": member }));
    }
    let payload = json!({
        "subequation": f.name(),
        "dual": d.name(),
        "p_f": p_f,
        "p_dual": p_dual,
        "q_f": q_f,
        "conjugacy_product": conjugacy,
        "matrices": results,
    });
    Ok(Outcome::new(payload)?.with_table(table))
}

pub fn subeq_expand(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS])?;
    let deltas = cx.spec.list("delta")?.unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 10.0]);
    cx.spec.record("delta", deltas.clone());
    let f = inputs::subequation(&mut cx.spec)?;
    let opts = riesz_opts(cx);
    let p = riesz_characteristic_increasing(&f, opts)?.value;
    let mut table = Table::new(&["delta", "characteristic", "predicted", "error"]);
    let mut rows = Vec::new();
    for &delta in &deltas {
        let e = expand(&f, delta)?;
        let got = riesz_characteristic_increasing(&e, opts)?.value;
        let want = predicted_expansion_characteristic(p, delta, f.dim());
        let err = match (got.finite(), want.finite()) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        table.push(vec![num(delta), got.to_string(), want.to_string(), num(err)]);
        rows.push(json!({ "delta": delta, "characteristic": got, "predicted": want, "error": err }));
    }
    Ok(Outcome::new(json!({ "subequation": f.name(), "p_f": p, "expansions": rows }))?.with_table(table))
}

// ---- garding --------------------------------------------------------------

pub fn garding_eig(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS, MATRIX_KEYS])?;
    let op = inputs::operator(&mut cx.spec)?;
    let mats = inputs::matrices(&mut cx.spec, op.dim(), cx.seed)?;
    let mut table = Table::new(&["index", "eigenvalues", "residual", "closed_form_difference"]);
    let mut results = Vec::new();
    let mut violations = 0;
    for (i, a) in mats.iter().enumerate() {
        match garding_eigenvalues(&op, a) {
            Ok(s) => {
                let diff = match op.closed_spectrum(a) {
                    Some(Ok(c)) => c.iter().zip(&s.eigenvalues).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
                    _ => f64::NAN,
                };
                if s.residual > op.hyperbolicity_tol(a) {
                    violations += 1;
                }
                table.push(vec![i.to_string(), joined(&s.eigenvalues), num(s.residual), num(diff)]);
                results.push(json!({ "matrix": a, "spectrum": s, "closed_form_difference": diff }));
            }
            Err(e) => {
                violations += 1;
                table.push(vec![i.to_string(), String::new(), "nan".into(), "nan".into()]);
                results.push(json!({ "matrix": a, "error": e.to_string() }));
            }
        }
    }
    let payload = json!({ "operator": op.name(), "degree": op.degree(), "matrices": results });
    Ok(Outcome::new(payload)?.with_table(table).fail_if(violations > 0, format!("{violations} hyperbolicity violations")))
}

pub fn garding_branch(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS, MATRIX_KEYS])?;
    let op = inputs::operator(&mut cx.spec)?;
    let branch = cx.spec.or("branch", 1usize)?;
    if branch == 0 || branch > op.degree() {
        bail!("branch must lie in 1..={}, got {branch}", op.degree());
    }
    let tol = cx.tol(1e-10);
    let mats = inputs::matrices(&mut cx.spec, op.dim(), cx.seed)?;
    let mut table = Table::new(&["index", "margin", "member", "eigenvalues"]);
    let mut results = Vec::new();
    for (i, a) in mats.iter().enumerate() {
        let spectrum = op.spectrum(a)?;
        let margin = spectrum[branch - 1];
        let member = margin >= -tol;
        table.push(vec![i.to_string(), num(margin), member.to_string(), joined(&spectrum)]);
        results.push(json!({ "matrix": a, "eigenvalues": spectrum, "margin": margin, "member": member }));
    }
    let payload = json!({ "operator": op.name(), "branch": branch, "tol": tol, "matrices": results });
    Ok(Outcome::new(payload)?.with_table(table))
}

pub fn garding_certify(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS])?;
    let op = inputs::operator(&mut cx.spec)?;
    let trials = cx.budget(1000);
    let report = certify_garding(&op, trials, cx.seed);
    let mut table = Table::new(&["check", "trials", "failures", "worst"]);
    for c in &report.checks {
        table.push(vec![c.name.clone(), c.trials.to_string(), c.failures.to_string(), num(c.worst)]);
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| c.failures > 0).map(|c| c.name.as_str()).collect();
    let msg = format!("certification failed: {}", failed.join(", "));
    let passed = report.passed;
    Ok(Outcome::new(report)?.with_table(table).fail_if(!passed, msg))
}

fn elementary(values: &[f64], k: usize) -> f64 {
    // e_k by the running-product recurrence.
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

pub fn garding_sigma(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SUBEQ_KEYS, MATRIX_KEYS])?;
    let op: GardingOperator = inputs::operator(&mut cx.spec)?;
    let k: usize = cx.spec.require("k")?;
    let tol = cx.tol(1e-6);
    let mats = inputs::matrices(&mut cx.spec, op.dim(), cx.seed)?;
    let mut table = Table::new(&["index", "sigma_k", "from_eigenvalues", "relative_error"]);
    let mut results = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, a) in mats.iter().enumerate() {
        let value = elementary_symmetric_value(&op, k, a)?;
        let oracle = elementary(&op.spectrum(a)?, k);
        let rel = (value - oracle).abs() / oracle.abs().max(1.0);
        worst = worst.max(rel);
        table.push(vec![i.to_string(), num(value), num(oracle), num(rel)]);
        results.push(json!({ "matrix": a, "sigma_k": value, "from_eigenvalues": oracle, "relative_error": rel }));
    }
    let payload = json!({ "operator": op.name(), "k": k, "tol": tol, "matrices": results });
    Ok(Outcome::new(payload)?
        .with_table(table)
        .fail_if(worst > tol, format!("sigma_k disagrees with the eigenvalue route: {worst:e}")))
}

// ---- grass ----------------------------------------------------------------

pub fn grass_invariant(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FAMILY_KEYS])?;
    let fam = inputs::family(&mut cx.spec)?;
    let count = cx.spec.or("samples", 200usize)?;
    let stats = invariant_statistics(&fam, count, cx.seed)?;
    let mut table = Table::new(&["statistic", "value"]);
    for (k, v) in &stats {
        table.push(vec![k.clone(), num(*v)]);
    }
    Ok(Outcome::new(json!({ "family": fam.name(), "samples": count, "statistics": stats }))?.with_table(table))
}

pub fn grass_transitivity(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FAMILY_KEYS])?;
    let fam = inputs::family(&mut cx.spec)?;
    let n = fam.ambient_dim();
    let x = inputs::unit_vectors(&mut cx.spec, "x", n, 1, cx.seed)?;
    let y = inputs::unit_vectors(&mut cx.spec, "y", n, 1, cx.seed)?;
    if x.len() != 1 || y.len() != 1 {
        bail!("keys `x` and `y` take a single point each");
    }
    let budget = cx.budget(1000);
    let report = transitivity_check(&fam, &x[0], &y[0], budget, cx.seed)?;
    let mut table = Table::new(&["link", "intersection_with_next", "frame_columns"]);
    for (i, link) in report.chain.iter().enumerate() {
        let cols: Vec<String> = link.frame.to_columns_vec().iter().map(|c| joined(c)).collect();
        let meet = link.intersection_with_next.map(|d| d.to_string()).unwrap_or_default();
        table.push(vec![i.to_string(), meet, cols.join("; ")]);
    }
    let payload = json!({ "x": x[0], "y": y[0], "report": report });
    Ok(Outcome::new(payload)?.with_table(table))
}

// ---- flow -----------------------------------------------------------------

const FIELD_KEYS: &[&str] = &["catalog", "field", "n"];

fn density_table(report: &DensityReport) -> Table {
    let mut table = Table::new(&["r", "s", "quotient", "noise"]);
    for q in &report.table {
        table.push(vec![num(q.r), num(q.s), num(q.value), num(q.noise)]);
    }
    table
}

pub fn flow_density(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FIELD_KEYS, SCHEDULE_KEYS])?;
    let u = inputs::field(&mut cx.spec, "catalog", "field")?;
    let schedule = inputs::schedule(&mut cx.spec, &u, cx.seed)?;
    let report = density(&u, &schedule)?;
    let table = density_table(&report);
    let n = report.violations.len();
    Ok(Outcome::new(report)?.with_table(table).fail_if(n > 0, format!("{n} monotonicity violations")))
}

pub fn flow_tangent(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FIELD_KEYS, SCHEDULE_KEYS, &["candidate", "candidate_field"]])?;
    let u = inputs::field(&mut cx.spec, "catalog", "field")?;
    let candidate = inputs::field(&mut cx.spec, "candidate", "candidate_field")?;
    let schedule = inputs::schedule(&mut cx.spec, &u, cx.seed)?;
    let tol = cx.tol(1e-2);
    let report = tangent_convergence(&u, &schedule, &candidate, tol)?;
    let mut table = Table::new(&["radius", "distance", "stderr", "noise", "saturation"]);
    for r in &report.rows {
        table.push(vec![num(r.radius), num(r.distance), num(r.stderr), num(r.noise), num(r.saturation)]);
    }
    let converged = report.converged;
    Ok(Outcome::new(report)?.with_table(table).fail_if(!converged, "flow did not converge to the candidate"))
}

pub fn flow_convex(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FIELD_KEYS, &["radii", "grid", "zero_tol"]])?;
    let u = inputs::field(&mut cx.spec, "catalog", "field")?;
    let radii = inputs::radii(&mut cx.spec, 10)?;
    let grid = cx.spec.or("grid", 2000usize)?;
    let zero_tol = cx.spec.or("zero_tol", 1e-12)?;
    let monotone_tol = cx.tol(1e-9);
    let report = convex_tangent(&u, &radii, grid, cx.seed, monotone_tol, zero_tol)?;
    let mut table = Table::new(&["radius", "sphere_average"]);
    for (r, a) in report.radii.iter().zip(&report.sphere_averages) {
        table.push(vec![num(*r), num(*a)]);
    }
    Ok(Outcome::new(report)?.with_table(table))
}

pub fn flow_restrict(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[FIELD_KEYS, SCHEDULE_KEYS, &["plane", "axes", "samples"]])?;
    let u = inputs::field(&mut cx.spec, "catalog", "field")?;
    let w = inputs::plane(&mut cx.spec, u.dim())?;
    let restricted = u.restrict(&w)?;
    let schedule = inputs::schedule(&mut cx.spec, &restricted, cx.seed)?;
    let count = cx.spec.or("samples", 2000usize)?;
    let report = plane_restriction_density(&u, &w, &schedule)?;
    let profile = restriction_profile(&u, &w, count, cx.seed)?;
    let table = report.density.as_ref().map(density_table).unwrap_or_else(|| Table::new(&["r", "s", "quotient", "noise"]));
    Ok(Outcome::new(json!({ "restriction": report, "profile": profile }))?.with_table(table))
}

// ---- sphere ---------------------------------------------------------------

const SPHERE_KEYS: &[&str] = &["g", "n", "sigma", "samples", "h"];

fn sphere_function(cx: &mut Context) -> Result<(ScalarField, usize)> {
    let expr = cx.spec.string("g")?;
    let n: usize = cx.spec.require("n")?;
    Ok((expression_field(&expr, n)?, n))
}

pub fn sphere_phi(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SPHERE_KEYS, &["p"]])?;
    let (g, n) = sphere_function(cx)?;
    let p: f64 = cx.spec.require("p")?;
    let h = cx.spec.or("h", DEFAULT_STEP)?;
    let count = cx.spec.or("samples", 1usize)?;
    let sigmas = inputs::unit_vectors(&mut cx.spec, "sigma", n, count, cx.seed)?;
    let eval = |x: &[f64]| g.raw(x);
    let mut table = Table::new(&["index", "sigma", "phi_eigenvalues", "trace", "trace_formula"]);
    let mut results = Vec::new();
    for (i, s) in sigmas.iter().enumerate() {
        let jet = jet_from_function(&eval, s, h)?;
        let phi = assemble_phi(&jet, p);
        let eig = phi.eigenvalues();
        let tr = trace_of_phi(&jet, p);
        table.push(vec![i.to_string(), joined(&s.to_vec()), joined(&eig), num(tr.trace), num(tr.formula)]);
        results.push(json!({ "jet": jet, "phi": phi, "eigenvalues": eig, "trace": tr }));
    }
    Ok(Outcome::new(json!({ "g": g.name(), "p": p, "h": h, "points": results }))?.with_table(table))
}

pub fn sphere_fdcheck(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SPHERE_KEYS, &["p"]])?;
    let (g, n) = sphere_function(cx)?;
    let p: f64 = cx.spec.require("p")?;
    let h = cx.spec.or("h", DEFAULT_STEP)?;
    let tol = cx.tol(1e-5);
    let count = cx.spec.or("samples", 5usize)?;
    let sigmas = inputs::unit_vectors(&mut cx.spec, "sigma", n, count, cx.seed)?;
    let eval = |x: &[f64]| g.raw(x);
    let mut table = Table::new(&["index", "sigma", "residual", "constant"]);
    let mut results = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, s) in sigmas.iter().enumerate() {
        let c = fd_cross_check(&eval, s, p, h)?;
        worst = worst.max(c.residual);
        table.push(vec![i.to_string(), joined(&s.to_vec()), num(c.residual), num(c.constant)]);
        results.push(json!({ "sigma": s, "check": c }));
    }
    let payload = json!({ "g": g.name(), "p": p, "h": h, "tol": tol, "worst_residual": worst, "points": results });
    Ok(Outcome::new(payload)?
        .with_table(table)
        .fail_if(worst > tol, format!("Phi disagrees with the finite-difference Hessian: {worst:e}")))
}

pub fn sphere_member(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SPHERE_KEYS, SUBEQ_KEYS, &["exponent"]])?;
    let (g, n) = sphere_function(cx)?;
    let f = inputs::subequation(&mut cx.spec)?;
    if f.dim() != n {
        bail!("subequation lives in dimension {} but n = {n}", f.dim());
    }
    let tol = cx.tol(1e-8);
    let exponent = match cx.spec.get::<f64>("exponent")? {
        Some(p) => p,
        None => {
            let p = riesz_characteristic_increasing(&f, RieszOptions::default())?.value.finite().ok_or_else(|| {
                anyhow::anyhow!("the Riesz characteristic of {} is infinite; set `exponent`", f.name())
            })?;
            cx.spec.record("exponent", p);
            p
        }
    };
    let h = cx.spec.or("h", DEFAULT_STEP)?;
    let count = cx.spec.or("samples", 5usize)?;
    let sigmas = inputs::unit_vectors(&mut cx.spec, "sigma", n, count, cx.seed)?;
    let eval = |x: &[f64]| g.raw(x);
    let mut table = Table::new(&["index", "sigma", "margin", "member"]);
    let mut results = Vec::new();
    for (i, s) in sigmas.iter().enumerate() {
        let jet = jet_from_function(&eval, s, h)?;
        let m = sphere_subeq_member(&f, &jet, exponent, tol)?;
        table.push(vec![i.to_string(), joined(&s.to_vec()), num(m.margin), m.member.to_string()]);
        results.push(json!({ "sigma": s, "membership": m }));
    }
    let payload = json!({ "g": g.name(), "subequation": f.name(), "exponent": exponent, "points": results });
    Ok(Outcome::new(payload)?.with_table(table))
}

fn structure_table() -> Table {
    Table::new(&["index", "sigma", "line_deviation", "line_block_norm", "min_horizontal"])
}

pub fn sphere_complex(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SPHERE_KEYS, &["theta"]])?;
    let (g, n) = sphere_function(cx)?;
    if n % 2 != 0 {
        bail!("a complex structure needs even n, got n = {n}");
    }
    let s = ComplexStructure::standard(n / 2);
    let theta = cx.spec.or("theta", 1.0)?;
    let h = cx.spec.or("h", 1e-3)?;
    let count = cx.spec.or("samples", 3usize)?;
    let sigmas = inputs::unit_vectors(&mut cx.spec, "sigma", n, count, cx.seed)?;
    let eval = |x: &[f64]| g.raw(x);
    let mut table = structure_table();
    let mut results = Vec::new();
    for (i, sig) in sigmas.iter().enumerate() {
        let c = complex_radial_structure_check(&eval, theta, sig, &s, h)?;
        table.push(vec![i.to_string(), joined(&c.sigma), num(c.line_deviation), num(c.line_block_norm), num(c.min_horizontal)]);
        results.push(c);
    }
    Ok(Outcome::new(json!({ "g": g.name(), "theta": theta, "h": h, "points": results }))?.with_table(table))
}

pub fn sphere_quaternion(cx: &mut Context) -> Result<Outcome> {
    cx.allow(&[SPHERE_KEYS])?;
    let (g, n) = sphere_function(cx)?;
    if n % 4 != 0 {
        bail!("a quaternionic structure needs n divisible by 4, got n = {n}");
    }
    let s = QuaternionStructure::standard(n / 4);
    let h = cx.spec.or("h", 1e-3)?;
    let count = cx.spec.or("samples", 3usize)?;
    let sigmas = inputs::unit_vectors(&mut cx.spec, "sigma", n, count, cx.seed)?;
    let eval = |x: &[f64]| g.raw(x);
    let mut table = structure_table();
    let mut results = Vec::new();
    for (i, sig) in sigmas.iter().enumerate() {
        let c = quaternionic_block_check(&eval, sig, &s, h)?;
        table.push(vec![i.to_string(), joined(&c.sigma), num(c.line_deviation), num(c.line_block_norm), num(c.min_horizontal)]);
        results.push(c);
    }
    Ok(Outcome::new(json!({ "g": g.name(), "h": h, "points": results }))?.with_table(table))
}
