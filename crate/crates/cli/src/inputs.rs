//! Builds core objects (subequations, operators, families, fields,
//! schedules, matrices) from spec keys.

use anyhow::{anyhow, bail, Context, Result};
use tangents_core::flow::{catalog_field, expression_field, FlowSchedule, ScalarField};
use tangents_core::garding::GardingOperator;
use tangents_core::grassmann::PlaneFamily;
use tangents_core::linalg::{random_symmetric, ComplexStructure, Frame, QuaternionStructure, SymMatrix, UnitVector};
use tangents_core::nalgebra::DVector;
use tangents_core::seed;
use tangents_core::subeq::{EigenProfile, Subequation};

use crate::spec::{Spec, SpecError};

pub const SUBEQ_KEYS: &[&str] = &["kind", "n", "p", "delta", "base", "structure", "branch", "k", "weight"];
pub const MATRIX_KEYS: &[&str] = &["matrix", "samples"];
pub const FAMILY_KEYS: &[&str] = &["family", "n", "p", "k", "costheta", "invariant", "x", "y", "samples"];
pub const SCHEDULE_KEYS: &[&str] = &["p", "radii", "ns", "nb", "annulus", "seed"];

fn standard_structure(spec: &mut Spec) -> Result<()> {
    let s = spec.or("structure", "standard".to_string())?;
    if s != "standard" {
        bail!("structure `{s}` is not supported; only `standard` is available from spec files");
    }
    Ok(())
}

fn complex_structure(spec: &mut Spec, n: usize) -> Result<ComplexStructure> {
    standard_structure(spec)?;
    if n % 2 != 0 {
        bail!("a complex structure needs even n, got n = {n}");
    }
    Ok(ComplexStructure::standard(n / 2))
}

fn quaternion_structure(spec: &mut Spec, n: usize) -> Result<QuaternionStructure> {
    standard_structure(spec)?;
    if n % 4 != 0 {
        bail!("a quaternionic structure needs n divisible by 4, got n = {n}");
    }
    Ok(QuaternionStructure::standard(n / 4))
}

fn profile(name: &str, spec: &mut Spec) -> Result<EigenProfile> {
    Ok(match name {
        "orphant" => EigenProfile::Orphant,
        "laplacian" | "trace" => EigenProfile::Trace,
        "minmax" => EigenProfile::MinMax(spec.require("p")?),
        "min2" => EigenProfile::Min2(spec.require("p")?),
        "pconvex" => EigenProfile::PConvex(spec.require("p")?),
        other => bail!("unknown eigenvalue profile `{other}` (expected orphant, laplacian, minmax, min2, pconvex)"),
    })
}

/// Operator from `kind = garding:<variant>`.
pub fn operator(spec: &mut Spec) -> Result<GardingOperator> {
    let kind = spec.string("kind")?;
    let variant = kind
        .strip_prefix("garding:")
        .ok_or_else(|| anyhow!("kind `{kind}` is not an operator; expected garding:<variant>"))?
        .to_string();
    operator_variant(&variant, spec)
}

fn base_operator(spec: &mut Spec) -> Result<GardingOperator> {
    let base = spec.string("base")?;
    match base.as_str() {
        "det_real" | "det_complex" | "det_quaternionic" => operator_variant(&base, spec),
        other => bail!("base operator `{other}` must be det_real, det_complex or det_quaternionic"),
    }
}

fn operator_variant(variant: &str, spec: &mut Spec) -> Result<GardingOperator> {
    let n: usize = spec.require("n")?;
    let op = match variant {
        "det_real" => GardingOperator::det_real(n)?,
        "det_complex" => GardingOperator::det_complex(complex_structure(spec, n)?)?,
        "det_quaternionic" => GardingOperator::det_quaternionic(quaternion_structure(spec, n)?)?,
        "sigma" => GardingOperator::elementary_symmetric(base_operator(spec)?, spec.require("k")?)?,
        "pconvex" => GardingOperator::pconvexity(base_operator(spec)?, spec.require("p")?)?,
        "delta" => GardingOperator::delta_reg(base_operator(spec)?, spec.require("delta")?)?,
        "lag" => GardingOperator::lag(complex_structure(spec, n)?)?,
        "iso" => GardingOperator::iso(complex_structure(spec, n)?, spec.require("p")?)?,
        "corrupted" => GardingOperator::corrupted(n, spec.or("weight", 0.5)?)?,
        other => bail!(
            "unknown operator garding:{other} (expected det_real, det_complex, det_quaternionic, sigma, pconvex, delta, lag, iso, corrupted)"
        ),
    };
    Ok(op)
}

/// Subequation from `kind`; Gårding kinds give the branch `branch` (default 1).
pub fn subequation(spec: &mut Spec) -> Result<Subequation> {
    let kind = spec.string("kind")?;
    if kind.starts_with("garding:") {
        let op = operator(spec)?;
        let branch = spec.or("branch", 1usize)?;
        return Ok(Subequation::garding_branch(op, branch)?);
    }
    let n: usize = spec.require("n")?;
    let f = match kind.as_str() {
        "complex" => {
            let base = spec.string("base")?;
            let prof = profile(&base, spec)?;
            Subequation::complex_lift(prof, complex_structure(spec, n)?)?
        }
        "quaternionic" => {
            let base = spec.string("base")?;
            let prof = profile(&base, spec)?;
            Subequation::quaternionic_lift(prof, quaternion_structure(spec, n)?)?
        }
        "lagrangian" => Subequation::lagrangian(complex_structure(spec, n)?),
        "isotropic" => Subequation::isotropic(complex_structure(spec, n)?, spec.require("p")?)?,
        other => Subequation::profile(n, profile(other, spec)?)?,
    };
    Ok(f)
}

pub fn family(spec: &mut Spec) -> Result<PlaneFamily> {
    let name = spec.string("family")?;
    let n: usize = spec.require("n")?;
    let fam = match name.as_str() {
        "real" | "full_real" => PlaneFamily::full_real(n, spec.require("p")?)?,
        "complex" => PlaneFamily::complex_planes(spec.require("k")?, complex_structure(spec, n)?)?,
        "quaternionic" => PlaneFamily::quaternionic_planes(spec.require("k")?, quaternion_structure(spec, n)?)?,
        "lagrangian" => PlaneFamily::lagrangian(complex_structure(spec, n)?),
        "isotropic" => PlaneFamily::isotropic(spec.require("p")?, complex_structure(spec, n)?)?,
        "kahler" => PlaneFamily::kahler_orbit(spec.require("costheta")?, complex_structure(spec, n)?)?,
        "quat_orbit" => PlaneFamily::quat_orbit(spec.require("invariant")?, quaternion_structure(spec, n)?)?,
        other => bail!(
            "unknown family `{other}` (expected real, complex, quaternionic, lagrangian, isotropic, kahler, quat_orbit)"
        ),
    };
    Ok(fam)
}

/// Matrices from `matrix = a,b;c,d` or `samples` seeded random ones.
pub fn matrices(spec: &mut Spec, n: usize, seed: u64) -> Result<Vec<SymMatrix>> {
    if let Some(rows) = spec.rows("matrix")? {
        if spec.has("samples") {
            return Err(SpecError::Invalid("give either `matrix` or `samples`, not both".into()).into());
        }
        let a = SymMatrix::from_rows(&rows).context("key `matrix`")?;
        if a.dim() != n {
            bail!("key `matrix` is {}x{} but n = {n}", a.dim(), a.dim());
        }
        return Ok(vec![a]);
    }
    let count = spec.or("samples", 8usize)?;
    Ok((0..count).map(|i| random_symmetric(n, &mut seed::rng(seed, "cli-matrix", i as u64))).collect())
}

/// Points from a `;`-separated key, or `count` seeded random unit vectors.
pub fn unit_vectors(spec: &mut Spec, key: &str, n: usize, count: usize, seed: u64) -> Result<Vec<UnitVector>> {
    match spec.rows(key)? {
        Some(rows) => rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    bail!("key `{key}`: point {r:?} has {} entries, expected {n}", r.len());
                }
                UnitVector::from_slice(r).with_context(|| format!("key `{key}`"))
            })
            .collect(),
        None => Ok((0..count).map(|i| UnitVector::random(n, &mut seed::rng(seed, key, i as u64))).collect()),
    }
}

/// The field named by `<key>` (catalog id) or `<expr_key>` (expression in x1..xn, r).
pub fn field(spec: &mut Spec, key: &str, expr_key: &str) -> Result<ScalarField> {
    match (spec.has(key), spec.has(expr_key)) {
        (true, true) => bail!("give either `{key}` or `{expr_key}`, not both"),
        (true, false) => {
            let id = spec.string(key)?;
            Ok(catalog_field(&id)?)
        }
        (false, true) => {
            let expr = spec.string(expr_key)?;
            let n: usize = spec.require("n")?;
            Ok(expression_field(&expr, n)?)
        }
        (false, false) => Err(SpecError::Missing(format!("{key} or {expr_key}")).into()),
    }
}

/// `radii = dyadic:L` (2^-j for j = 0..L) or an explicit decreasing list.
pub fn radii(spec: &mut Spec, default_levels: u32) -> Result<Vec<f64>> {
    let text = spec.raw("radii").map(str::to_string);
    let radii = match text {
        None => dyadic(default_levels),
        Some(t) => match t.strip_prefix("dyadic:") {
            Some(l) => dyadic(l.trim().parse().map_err(|e| anyhow!("key `radii`: bad level count `{l}`: {e}"))?),
            None => crate::spec::parse_list("radii", &t)?,
        },
    };
    spec.record("radii", radii.clone());
    Ok(radii)
}

fn dyadic(levels: u32) -> Vec<f64> {
    (0..=levels).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// Schedule keys; `p` defaults to the field's declared p.
pub fn schedule(spec: &mut Spec, field: &ScalarField, seed: u64) -> Result<FlowSchedule> {
    let p = match (spec.get::<f64>("p")?, field.meta.p) {
        (Some(p), _) => p,
        (None, Some(p)) => {
            spec.record("p", p);
            p
        }
        (None, None) => return Err(SpecError::Missing("p".into()).into()),
    };
    let radii = radii(spec, 10)?;
    let ns = spec.or("ns", 4000usize)?;
    let nb = spec.or("nb", 4000usize)?;
    let annulus = match spec.list("annulus")? {
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(v) => bail!("key `annulus` needs two numbers, got {}", v.len()),
        None => {
            spec.record("annulus", vec![0.5, 1.0]);
            (0.5, 1.0)
        }
    };
    let s = FlowSchedule { p, radii, ns, nb, annulus, seed };
    s.validate()?;
    Ok(s)
}

/// A plane from `plane = v1;v2;...` (orthonormalized) or `axes = i,j,...` (1-based).
pub fn plane(spec: &mut Spec, n: usize) -> Result<Frame> {
    if let Some(rows) = spec.rows("plane")? {
        let cols: Vec<_> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
        if rows.iter().any(|r| r.len() != n) {
            bail!("key `plane`: every vector needs {n} entries");
        }
        return Ok(Frame::orthonormalize(&cols).context("key `plane`")?);
    }
    let axes = spec.list("axes")?.ok_or_else(|| SpecError::Missing("plane or axes".into()))?;
    let idx: Vec<usize> = axes
        .iter()
        .map(|a| {
            if a.fract() == 0.0 && *a >= 1.0 && *a <= n as f64 {
                Ok(*a as usize - 1)
            } else {
                Err(anyhow!("key `axes`: {a} is not a coordinate index in 1..={n}"))
            }
        })
        .collect::<Result<_>>()?;
    Ok(Frame::coordinate(n, &idx)?)
}
