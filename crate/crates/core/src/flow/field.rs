//! Scalar fields on ℝⁿ: a versioned catalog of closed-form examples and
//! user expressions.

use std::fmt;
use std::sync::Arc;

use meval::{ContextProvider, Expr, FuncEvalError};

use crate::error::{Error, Result};
use crate::linalg::Frame;

/// Values at or below this are treated as −∞.
pub const NEG_INF_FLOOR: f64 = -1e12;

pub const CATALOG_VERSION: &str = "1";

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Metadata a catalog entry may carry.
#[derive(Clone, Default)]
pub struct FieldMeta {
    /// Riesz exponent of the natural subequation for this field.
    pub p: Option<f64>,
    /// Known density at the origin.
    pub density: Option<f64>,
    /// Known tangent at the origin.
    pub tangent: Option<Evaluator>,
    /// Convex on ℝⁿ.
    pub convex: bool,
    /// Differentiable at the origin.
    pub smooth_at_origin: Option<bool>,
}

#[derive(Clone)]
enum Inner {
    Base(Evaluator),
    /// x ↦ r^{p−2} base(r x) − shift.
    Rescaled { base: Arc<ScalarField>, r: f64, p: f64, shift: f64 },
    /// y ↦ base(W y) on the coordinates of a plane.
    Restricted { base: Arc<ScalarField>, frame: Frame },
}

#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    name: String,
    inner: Inner,
    pub meta: FieldMeta,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.dim).field("name", &self.name).finish()
    }
}

impl ScalarField {
    pub fn new(dim: usize, name: impl Into<String>, eval: Evaluator) -> Self {
        ScalarField { dim, name: name.into(), inner: Inner::Base(eval), meta: FieldMeta::default() }
    }

    pub fn from_fn(dim: usize, name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(dim, name, Arc::new(f))
    }

    pub fn with_meta(mut self, meta: FieldMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Value with −∞ (and NaN) kept as −∞.
    pub fn raw(&self, x: &[f64]) -> f64 {
        let v = match &self.inner {
            Inner::Base(f) => f(x),
            Inner::Rescaled { base, r, p, shift } => {
                let y: Vec<f64> = x.iter().map(|t| t * r).collect();
                let b = base.raw(&y);
                if b == f64::NEG_INFINITY {
                    b
                } else if *p == 2.0 {
                    b - shift
                } else {
                    r.powf(p - 2.0) * b - shift
                }
            }
            Inner::Restricted { base, frame } => {
                let m = frame.as_matrix();
                let y: Vec<f64> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect();
                base.raw(&y)
            }
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Value with −∞ replaced by the finite floor.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.raw(x).max(NEG_INF_FLOOR)
    }

    pub fn is_saturated(&self, x: &[f64]) -> bool {
        self.raw(x) <= NEG_INF_FLOOR
    }

    /// x ↦ r^{p−2} u(r x) − shift. Rescalings with the same p compose into
    /// a single rescaling by the product of radii.
    pub(crate) fn rescaled(&self, r: f64, p: f64, shift: f64) -> ScalarField {
        if let Inner::Rescaled { base, r: r0, p: p0, shift: s0 } = &self.inner {
            if *p0 == p && *s0 == 0.0 && shift == 0.0 && p != 2.0 {
                return ScalarField {
                    dim: self.dim,
                    name: self.name.clone(),
                    inner: Inner::Rescaled { base: base.clone(), r: r0 * r, p, shift: 0.0 },
                    meta: self.meta.clone(),
                };
            }
        }
        ScalarField {
            dim: self.dim,
            name: self.name.clone(),
            inner: Inner::Rescaled { base: Arc::new(self.clone()), r, p, shift },
            meta: self.meta.clone(),
        }
    }

    /// The restriction y ↦ u(W y), a field on ℝ^k for a k-plane W.
    pub fn restrict(&self, frame: &Frame) -> Result<ScalarField> {
        if frame.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: frame.ambient_dim() });
        }
        Ok(ScalarField {
            dim: frame.plane_dim(),
            name: format!("{}|W", self.name),
            inner: Inner::Restricted { base: Arc::new(self.clone()), frame: frame.clone() },
            meta: FieldMeta { p: Some(frame.plane_dim() as f64), ..FieldMeta::default() },
        })
    }
}

/// The Riesz kernel K_p(t): t^{2−p} for p < 2, log t for p = 2 and
/// −t^{2−p} for p > 2.
pub fn riesz_kernel(p: f64, t: f64) -> f64 {
    if p < 2.0 {
        t.powf(2.0 - p)
    } else if p == 2.0 {
        t.ln()
    } else {
        -t.powf(2.0 - p)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Expression context: variables x1…xn and r = |x|, the constants pi and e,
/// and the usual elementary functions (log is the natural logarithm).
struct ExprContext<'a> {
    x: &'a [f64],
    r: f64,
}

impl ContextProvider for ExprContext<'_> {
    fn get_var(&self, name: &str) -> Option<f64> {
        match name {
            "r" => Some(self.r),
            "pi" => Some(std::f64::consts::PI),
            "e" => Some(std::f64::consts::E),
            _ => {
                let i: usize = name.strip_prefix('x')?.parse().ok()?;
                if i >= 1 && i <= self.x.len() {
                    Some(self.x[i - 1])
                } else {
                    None
                }
            }
        }
    }

    fn eval_func(&self, name: &str, args: &[f64]) -> std::result::Result<f64, FuncEvalError> {
        let one = |f: fn(f64) -> f64| -> std::result::Result<f64, FuncEvalError> {
            match args {
                [a] => Ok(f(*a)),
                _ => Err(FuncEvalError::NumberArgs(1)),
            }
        };
        match name {
            "abs" => one(f64::abs),
            "sqrt" => one(f64::sqrt),
            "exp" => one(f64::exp),
            "log" | "ln" => one(f64::ln),
            "sin" => one(f64::sin),
            "cos" => one(f64::cos),
            "tan" => one(f64::tan),
            "atan" => one(f64::atan),
            "tanh" => one(f64::tanh),
            "signum" => one(f64::signum),
            "max" if !args.is_empty() => Ok(args.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            "min" if !args.is_empty() => Ok(args.iter().copied().fold(f64::INFINITY, f64::min)),
            "max" | "min" => Err(FuncEvalError::TooFewArguments),
            "norm" => Ok(norm(args)),
            "pow" => match args {
                [a, b] => Ok(a.powf(*b)),
                _ => Err(FuncEvalError::NumberArgs(2)),
            },
            _ => Err(FuncEvalError::UnknownFunction),
        }
    }
}

/// Parses an expression in x1…xn and r = |x|.
pub fn expression_field(expr: &str, dim: usize) -> Result<ScalarField> {
    let parsed: Expr = expr.parse().map_err(|e| Error::Parse(format!("expression `{expr}`: {e}")))?;
    // Validate names once at a generic point.
    let probe: Vec<f64> = (0..dim).map(|i| 0.3 + 0.1 * i as f64).collect();
    parsed
        .eval_with_context(ExprContext { x: &probe, r: norm(&probe) })
        .map_err(|e| Error::Parse(format!("expression `{expr}`: {e}")))?;
    let name = expr.to_string();
    Ok(ScalarField::from_fn(dim, name, move |x| {
        parsed.eval_with_context(ExprContext { x, r: norm(x) }).unwrap_or(f64::NAN)
    }))
}

/// Parameters of a catalog reference such as `kernel(p=3, n=4)`.
#[derive(Clone, Debug, Default)]
pub struct CatalogParams {
    pairs: Vec<(String, f64)>,
}

impl CatalogParams {
    fn get(&self, key: &str) -> Option<f64> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn require(&self, key: &str, id: &str) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::Parse(format!("catalog entry {id} needs parameter {key}")))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) if v >= 1.0 && v.fract() == 0.0 => Ok(v as usize),
            Some(v) => Err(Error::Parse(format!("parameter {key} must be a positive integer, got {v}"))),
        }
    }
}

/// Splits `name(k=v, ...)` into the name and its parameters.
pub fn parse_catalog_ref(s: &str) -> Result<(String, CatalogParams)> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok((s.to_string(), CatalogParams::default()));
    };
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
    }
    let name = s[..open].trim().to_string();
    let body = &s[open + 1..s.len() - 1];
    let mut pairs = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
        let k = k.trim().to_ascii_lowercase();
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad number in `{part}`")))?;
        if pairs.iter().any(|(q, _): &(String, f64)| *q == k) {
            return Err(Error::Parse(format!("duplicate parameter {k}")));
        }
        pairs.push((k, v));
    }
    Ok((name, CatalogParams { pairs }))
}

const ALLOWED: &[(&str, &[&str])] = &[
    ("kernel", &["p", "n", "theta"]),
    ("kernel_plus_square", &["p", "n"]),
    ("kernel_shift", &["p", "n", "c"]),
    ("abs_x1", &["n"]),
    ("euclid_norm", &["n"]),
    ("square_norm", &["n"]),
    ("linear_plus_square", &["n"]),
    ("max_affine", &["n"]),
    ("halfspace_seminorm", &["n"]),
    ("log_z1", &["m"]),
    ("max_log_z", &["m"]),
    ("log_norm", &["m"]),
    ("quat_pole", &["m"]),
];

/// Catalog entry names.
pub fn catalog_names() -> Vec<&'static str> {
    ALLOWED.iter().map(|(n, _)| *n).collect()
}

/// A representative instance of every catalog entry, for sweeps.
pub fn catalog_instances() -> Vec<&'static str> {
    vec![
        "kernel(p=1.5, n=3)",
        "kernel(p=2, n=3)",
        "kernel(p=3, n=3)",
        "kernel(p=4, n=5, theta=2)",
        "kernel_plus_square(p=1.5, n=3)",
        "kernel_plus_square(p=2, n=2)",
        "kernel_plus_square(p=3, n=3)",
        "kernel_shift(p=3, n=3, c=1)",
        "abs_x1(n=3)",
        "euclid_norm(n=3)",
        "square_norm(n=3)",
        "linear_plus_square(n=3)",
        "max_affine(n=3)",
        "halfspace_seminorm(n=3)",
        "log_z1(m=2)",
        "max_log_z(m=2)",
        "log_norm(m=2)",
        "quat_pole(m=2)",
    ]
}

/// Affine pieces (a, b) of the max-affine catalog field in ℝⁿ; the first
/// two are active at the origin.
fn max_affine_pieces(n: usize) -> Vec<(Vec<f64>, f64)> {
    let mut a1 = vec![0.0; n];
    let mut a2 = vec![0.0; n];
    let mut a3 = vec![0.0; n];
    a1[0] = 1.0;
    a2[0] = -1.0;
    if n > 1 {
        a1[1] = 0.5;
        a2[1] = 0.25;
        a3[1] = 2.0;
    } else {
        a3[0] = 2.0;
    }
    vec![(a1, 0.0), (a2, 0.0), (a3, -0.5)]
}

fn dot(a: &[f64], x: &[f64]) -> f64 {
    a.iter().zip(x).map(|(p, q)| p * q).sum()
}

fn linear_coeffs(n: usize) -> Vec<f64> {
    (0..n).map(|i| [1.0, -2.0, 0.5, 0.75][i % 4]).collect()
}

/// Builds a catalog field from a reference like `kernel(p=3, n=4)`.
pub fn catalog_field(reference: &str) -> Result<ScalarField> {
    let (name, params) = parse_catalog_ref(reference)?;
    let allowed = ALLOWED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| Error::Parse(format!("unknown catalog entry `{name}` (catalog version {CATALOG_VERSION})")))?;
    for (k, _) in &params.pairs {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Parse(format!("catalog entry {name} has no parameter {k}")));
        }
    }
    let label = reference.trim().to_string();
    let kernel_p = |id: &str| -> Result<f64> {
        let p = params.require("p", id)?;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Parse(format!("{id}: need p >= 1, got {p}")));
        }
        Ok(p)
    };
    let field = match name.as_str() {
        "kernel" => {
            let p = kernel_p("kernel")?;
            let n = params.usize_or("n", 3)?;
            let theta = params.get("theta").unwrap_or(1.0);
            let tangent: Evaluator = Arc::new(move |x: &[f64]| theta * riesz_kernel(p, norm(x)));
            ScalarField::new(n, label, tangent.clone()).with_meta(FieldMeta {
                p: Some(p),
                density: Some(theta),
                tangent: Some(tangent),
                convex: p == 1.0,
                smooth_at_origin: Some(false),
            })
        }
        "kernel_plus_square" => {
            let p = kernel_p("kernel_plus_square")?;
            let n = params.usize_or("n", 3)?;
            ScalarField::from_fn(n, label, move |x| {
                let t = norm(x);
                riesz_kernel(p, t) + t * t
            })
            .with_meta(FieldMeta {
                p: Some(p),
                density: Some(1.0),
                tangent: Some(Arc::new(move |x: &[f64]| riesz_kernel(p, norm(x)))),
                ..FieldMeta::default()
            })
        }
        "kernel_shift" => {
            let p = kernel_p("kernel_shift")?;
            let n = params.usize_or("n", 3)?;
            let c = params.require("c", "kernel_shift")?;
            ScalarField::from_fn(n, label, move |x| riesz_kernel(p, norm(x)) + c).with_meta(FieldMeta {
                p: Some(p),
                density: Some(1.0),
                ..FieldMeta::default()
            })
        }
        "abs_x1" => {
            let n = params.usize_or("n", 3)?;
            let f: Evaluator = Arc::new(|x: &[f64]| x[0].abs());
            ScalarField::new(n, label, f.clone()).with_meta(convex_meta(Some(f), false))
        }
        "euclid_norm" => {
            let n = params.usize_or("n", 3)?;
            let f: Evaluator = Arc::new(|x: &[f64]| norm(x));
            ScalarField::new(n, label, f.clone()).with_meta(convex_meta(Some(f), false))
        }
        "square_norm" => {
            let n = params.usize_or("n", 3)?;
            ScalarField::from_fn(n, label, |x| dot(x, x)).with_meta(convex_meta(Some(Arc::new(|_: &[f64]| 0.0)), true))
        }
        "linear_plus_square" => {
            let n = params.usize_or("n", 3)?;
            let a = linear_coeffs(n);
            let a2 = a.clone();
            ScalarField::from_fn(n, label, move |x| dot(&a, x) + dot(x, x))
                .with_meta(convex_meta(Some(Arc::new(move |x: &[f64]| dot(&a2, x))), true))
        }
        "max_affine" => {
            let n = params.usize_or("n", 3)?;
            let pieces = max_affine_pieces(n);
            let active: Vec<Vec<f64>> = pieces.iter().filter(|(_, b)| *b == 0.0).map(|(a, _)| a.clone()).collect();
            let support: Evaluator =
                Arc::new(move |x: &[f64]| active.iter().map(|a| dot(a, x)).fold(f64::NEG_INFINITY, f64::max));
            ScalarField::from_fn(n, label, move |x| {
                pieces.iter().map(|(a, b)| dot(a, x) + b).fold(f64::NEG_INFINITY, f64::max)
            })
            .with_meta(convex_meta(Some(support), false))
        }
        "halfspace_seminorm" => {
            let n = params.usize_or("n", 3)?;
            let f: Evaluator = Arc::new(|x: &[f64]| x[0].max(0.0));
            ScalarField::new(n, label, f.clone()).with_meta(convex_meta(Some(f), false))
        }
        "log_z1" => {
            let m = params.usize_or("m", 2)?;
            let f: Evaluator = Arc::new(|x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt().ln());
            ScalarField::new(2 * m, label, f.clone()).with_meta(FieldMeta {
                p: Some(2.0),
                density: Some(1.0),
                tangent: Some(f),
                ..FieldMeta::default()
            })
        }
        "max_log_z" => {
            let m = params.usize_or("m", 2)?;
            let f: Evaluator = Arc::new(move |x: &[f64]| {
                (0..m).map(|i| (x[2 * i] * x[2 * i] + x[2 * i + 1] * x[2 * i + 1]).sqrt().ln()).fold(f64::NEG_INFINITY, f64::max)
            });
            ScalarField::new(2 * m, label, f.clone()).with_meta(FieldMeta {
                p: Some(2.0),
                density: Some(1.0),
                tangent: Some(f),
                ..FieldMeta::default()
            })
        }
        "log_norm" => {
            let m = params.usize_or("m", 2)?;
            let f: Evaluator = Arc::new(|x: &[f64]| norm(x).ln());
            ScalarField::new(2 * m, label, f.clone()).with_meta(FieldMeta {
                p: Some(2.0),
                density: Some(1.0),
                tangent: Some(f),
                ..FieldMeta::default()
            })
        }
        "quat_pole" => {
            let m = params.usize_or("m", 2)?;
            let f: Evaluator = Arc::new(|x: &[f64]| -1.0 / dot(&x[..4], &x[..4]));
            ScalarField::new(4 * m, label, f.clone()).with_meta(FieldMeta {
                p: Some(4.0),
                density: Some(1.0),
                tangent: Some(f),
                ..FieldMeta::default()
            })
        }
        _ => unreachable!("name checked against the catalog"),
    };
    Ok(field)
}

fn convex_meta(tangent: Option<Evaluator>, smooth: bool) -> FieldMeta {
    FieldMeta { p: Some(1.0), density: None, tangent, convex: true, smooth_at_origin: Some(smooth) }
}
