//! Gårding operators: homogeneous polynomials M on Sym(ℝⁿ) that are
//! hyperbolic in the direction of I, their eigenvalues and branches, and a
//! sampled certification of real-rootedness, convexity of the Gårding cone,
//! positivity and monotonicity of the eigenvalues.
//!
//! Eigenvalues are normalized so that they behave like matrix eigenvalues:
//! with γ = M(I)^{1/m} they are the negatives of the roots of
//! s ↦ M(A + (s/γ) I). Then Π μ_j = M(A) and μ(A + cI) = μ(A) + cγ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    complex_eigenvalues, quaternionic_eigenvalues, random_psd, random_symmetric, skew_hermitian_eigenvalue_pairs,
    ComplexStructure, QuaternionStructure, SymMatrix,
};
use crate::poly;
use crate::seed;

#[derive(Clone, Debug)]
pub enum GardingKind {
    DetReal,
    DetComplex(ComplexStructure),
    DetQuaternionic(QuaternionStructure),
    ElementarySymmetric { base: Box<GardingOperator>, k: usize },
    PConvexity { base: Box<GardingOperator>, p: f64 },
    DeltaReg { base: Box<GardingOperator>, delta: f64 },
    Lag(ComplexStructure),
    Iso { structure: ComplexStructure, p: usize },
    /// det A + w·a₀₁ⁿ: homogeneous of degree n but not hyperbolic, used as a
    /// negative control for certification.
    Corrupted { weight: f64 },
}

#[derive(Clone, Debug)]
pub struct GardingOperator {
    dim: usize,
    degree: usize,
    kind: GardingKind,
    /// M(I)^{1/m}
    gamma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GardingSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest imaginary part among the computed roots after merging
    /// clusters of a multiple root.
    pub residual: f64,
}

fn sign_patterns(values: &[f64]) -> Vec<f64> {
    let mut sums = vec![0.0];
    for v in values {
        sums = sums.iter().flat_map(|s| [s + v, s - v]).collect();
    }
    sums
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Factor values of the p-convexity construction on a base spectrum μ:
/// Σ_{i∈I} μ_i over |I| = p for integer p; Σ_{i∈I} μ_i + (p−⌊p⌋)μ_j over
/// |I| = ⌊p⌋ and j ∉ I otherwise.
pub fn pconvexity_factors(mu: &[f64], p: f64) -> Vec<f64> {
    let m = mu.len();
    let k = p.floor() as usize;
    let frac = p - p.floor();
    let mut out = Vec::new();
    for set in subsets(m, k) {
        let s: f64 = set.iter().map(|&i| mu[i]).sum();
        if frac == 0.0 {
            out.push(s);
        } else {
            for j in (0..m).filter(|j| !set.contains(j)) {
                out.push(s + frac * mu[j]);
            }
        }
    }
    out
}

/// (p/2m)·tr A ± λ_{i₁} ± ⋯ ± λ_{i_p} over all p-subsets of the skew pairs
/// and all sign patterns. At p = m these are the Lagrangian factors.
fn isotropic_factors(a: &SymMatrix, s: &ComplexStructure, p: usize) -> Result<Vec<f64>> {
    let pairs = skew_hermitian_eigenvalue_pairs(a, s)?;
    let m = s.complex_dim();
    let base = p as f64 / (2 * m) as f64 * a.trace();
    let mut out = Vec::new();
    for set in subsets(m, p) {
        let vals: Vec<f64> = set.iter().map(|&i| pairs[i]).collect();
        out.extend(sign_patterns(&vals).into_iter().map(|x| base + x));
    }
    Ok(out)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

impl GardingOperator {
    fn build(dim: usize, degree: usize, kind: GardingKind) -> Result<Self> {
        let mut op = GardingOperator { dim, degree, kind, gamma: 1.0 };
        let mi = op.evaluate(&SymMatrix::identity(dim))?;
        if !(mi > 0.0 && mi.is_finite()) {
            return Err(Error::NotGarding(format!("M(I) = {mi} is not positive")));
        }
        op.gamma = mi.powf(1.0 / degree as f64);
        Ok(op)
    }

    pub fn det_real(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::OutOfRange("dimension must be positive".into()));
        }
        Self::build(n, n, GardingKind::DetReal)
    }

    pub fn det_complex(s: ComplexStructure) -> Result<Self> {
        Self::build(s.dim(), s.complex_dim(), GardingKind::DetComplex(s))
    }

    pub fn det_quaternionic(s: QuaternionStructure) -> Result<Self> {
        Self::build(s.dim(), s.quaternionic_dim(), GardingKind::DetQuaternionic(s))
    }

    /// σ_k built on the eigenvalues of a base operator.
    pub fn elementary_symmetric(base: GardingOperator, k: usize) -> Result<Self> {
        if k == 0 || k > base.degree {
            return Err(Error::OutOfRange(format!("need 1 <= k <= {}, got {k}", base.degree)));
        }
        Self::build(base.dim, k, GardingKind::ElementarySymmetric { base: Box::new(base), k })
    }

    /// Σ_p: product of the p-convexity factors of the base eigenvalues.
    pub fn pconvexity(base: GardingOperator, p: f64) -> Result<Self> {
        let m = base.degree;
        if !(p >= 1.0 && p <= m as f64) {
            return Err(Error::OutOfRange(format!("need 1 <= p <= {m}, got {p}")));
        }
        let k = p.floor() as usize;
        let degree = if p == p.floor() { poly::binomial(m, k) } else { poly::binomial(m, k) * (m - k) };
        Self::build(base.dim, degree, GardingKind::PConvexity { base: Box::new(base), p })
    }

    /// M^δ(A) = M(A + (δ/n)(tr A) I).
    pub fn delta_reg(base: GardingOperator, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::OutOfRange(format!("delta must be >= 0, got {delta}")));
        }
        Self::build(base.dim, base.degree, GardingKind::DeltaReg { base: Box::new(base), delta })
    }

    /// M_LAG: product of t/2 ± λ₁ ± ⋯ ± λ_m over all sign patterns.
    pub fn lag(s: ComplexStructure) -> Result<Self> {
        let m = s.complex_dim();
        Self::build(s.dim(), 1 << m, GardingKind::Lag(s))
    }

    pub fn iso(s: ComplexStructure, p: usize) -> Result<Self> {
        let m = s.complex_dim();
        if p == 0 || p > m {
            return Err(Error::OutOfRange(format!("need 1 <= p <= {m}, got {p}")));
        }
        Self::build(s.dim(), poly::binomial(m, p) << p, GardingKind::Iso { structure: s, p })
    }

    pub fn corrupted(n: usize, weight: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange("corrupted operator needs n >= 2".into()));
        }
        Self::build(n, n, GardingKind::Corrupted { weight })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> &GardingKind {
        &self.kind
    }

    /// M(I)^{1/m}.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GardingKind::DetReal => format!("det_real(n={})", self.dim),
            GardingKind::DetComplex(_) => format!("det_complex(n={})", self.dim),
            GardingKind::DetQuaternionic(_) => format!("det_quaternionic(n={})", self.dim),
            GardingKind::ElementarySymmetric { base, k } => format!("sigma_{k}({})", base.name()),
            GardingKind::PConvexity { base, p } => format!("pconvexity_{p}({})", base.name()),
            GardingKind::DeltaReg { base, delta } => format!("delta_{delta}({})", base.name()),
            GardingKind::Lag(_) => format!("lag(n={})", self.dim),
            GardingKind::Iso { p, .. } => format!("iso_{p}(n={})", self.dim),
            GardingKind::Corrupted { weight } => format!("corrupted(n={}, weight={weight})", self.dim),
        }
    }

    fn check_dim(&self, a: &SymMatrix) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
        }
        Ok(())
    }

    pub fn evaluate(&self, a: &SymMatrix) -> Result<f64> {
        self.check_dim(a)?;
        Ok(match &self.kind {
            GardingKind::DetReal => a.as_matrix().clone().lu().determinant(),
            GardingKind::DetComplex(s) => complex_eigenvalues(a, s)?.iter().product(),
            GardingKind::DetQuaternionic(s) => quaternionic_eigenvalues(a, s)?.iter().product(),
            GardingKind::ElementarySymmetric { base, k } => poly::elementary_symmetric_all(&base.spectrum(a)?)[*k],
            GardingKind::PConvexity { base, p } => pconvexity_factors(&base.spectrum(a)?, *p).iter().product(),
            GardingKind::DeltaReg { base, delta } => base.evaluate(&a.shift(delta / self.dim as f64 * a.trace()))?,
            GardingKind::Lag(s) => isotropic_factors(a, s, s.complex_dim())?.iter().product(),
            GardingKind::Iso { structure, p } => isotropic_factors(a, structure, *p)?.iter().product(),
            GardingKind::Corrupted { weight } => {
                a.as_matrix().clone().lu().determinant() + weight * a.get(0, 1).powi(self.dim as i32)
            }
        })
    }

    /// Eigenvalues from a closed formula, when the construction has one.
    pub fn closed_spectrum(&self, a: &SymMatrix) -> Option<Result<Vec<f64>>> {
        if let Err(e) = self.check_dim(a) {
            return Some(Err(e));
        }
        let out = match &self.kind {
            GardingKind::DetReal => Ok(a.eigenvalues()),
            GardingKind::DetComplex(s) => complex_eigenvalues(a, s),
            GardingKind::DetQuaternionic(s) => quaternionic_eigenvalues(a, s),
            GardingKind::PConvexity { base, p } => {
                let mu = base.closed_spectrum(a)?;
                mu.map(|mu| sorted(pconvexity_factors(&mu, *p)))
            }
            GardingKind::DeltaReg { base, delta } => base.closed_spectrum(&a.shift(delta / self.dim as f64 * a.trace()))?,
            GardingKind::Lag(s) => isotropic_factors(a, s, s.complex_dim()).map(sorted),
            GardingKind::Iso { structure, p } => isotropic_factors(a, structure, *p).map(sorted),
            GardingKind::ElementarySymmetric { .. } | GardingKind::Corrupted { .. } => return None,
        };
        Some(out)
    }

    /// Ascending eigenvalues, by formula where available and by root
    /// finding otherwise.
    pub fn spectrum(&self, a: &SymMatrix) -> Result<Vec<f64>> {
        match self.closed_spectrum(a) {
            Some(r) => r,
            None => Ok(garding_eigenvalues(self, a)?.eigenvalues),
        }
    }

    /// Largest imaginary root part tolerated at A.
    pub fn hyperbolicity_tol(&self, a: &SymMatrix) -> f64 {
        1e-6 * (1.0 + a.frobenius()) * self.gamma.max(1.0)
    }
}

/// Largest degree handled by `garding_eigenvalues`; beyond it the monomial
/// interpolant loses all accuracy in double precision.
pub const MAX_ROOT_DEGREE: usize = 24;

/// Gårding eigenvalues of A by root finding on s ↦ M(A + (s/γ) I): the
/// polynomial is sampled at Chebyshev nodes, converted to monomial form,
/// and its companion matrix diagonalized, then repeated on an interval
/// shrunk around the roots. Roots that split off a multiple
/// root are merged; a remaining imaginary part above 1e−6·(1+‖A‖) (scaled
/// by γ) is a hyperbolicity violation.
pub fn garding_eigenvalues(op: &GardingOperator, a: &SymMatrix) -> Result<GardingSpectrum> {
    op.check_dim(a)?;
    let m = op.degree;
    if m > MAX_ROOT_DEGREE {
        return Err(Error::OutOfRange(format!(
            "degree {m} is too high for interpolation root finding (limit {MAX_ROOT_DEGREE}); use the closed-form spectrum"
        )));
    }
    let gamma = op.gamma;
    let f = |s: f64| op.evaluate(&a.shift(s / gamma));
    // Roots in x for s = center + width·x, from the degree-m interpolant at
    // Chebyshev nodes.
    let interp = |center: f64, width: f64| -> Result<(Vec<f64>, Vec<nalgebra::Complex<f64>>)> {
        let nodes = poly::chebyshev_nodes(m + 1);
        let values: Vec<f64> = nodes.iter().map(|&x| f(center + width * x)).collect::<Result<_>>()?;
        let coeffs = poly::interpolate_monomial(&values);
        if !(coeffs[m].abs() > 0.0) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NotGarding("degenerate restriction to the identity direction".into()));
        }
        let roots = poly::roots(&coeffs);
        Ok((coeffs, roots))
    };
    // The first interval contains every root; it is then shrunk around the
    // roots found, since a wide interval makes close roots ill-conditioned.
    let w0 = gamma * (a.frobenius() + 1.0);
    let (mut center, mut half_width) = (0.0, w0);
    let (mut coeffs, mut raw) = interp(center, half_width)?;
    for _ in 0..2 {
        let s: Vec<nalgebra::Complex<f64>> = raw.iter().map(|z| z * half_width + center).collect();
        let c = s.iter().map(|z| z.re).sum::<f64>() / s.len() as f64;
        let rho = s.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
        let w1 = (1.25 * rho).max(1e-3 * w0);
        if w1 > 0.5 * half_width {
            break;
        }
        center = c;
        half_width = w1;
        (coeffs, raw) = interp(center, half_width)?;
    }
    let f = |x: f64| f(center + half_width * x);
    let dcoef = poly::derivative(&coeffs);
    let noise = 1e-12 * coeffs.iter().map(|c| c.abs()).sum::<f64>();
    let tol = op.hyperbolicity_tol(a);
    let merge_radius = 1e-2;

    // Work in x = s / half_width.
    let mut done = vec![false; raw.len()];
    let mut real_roots: Vec<f64> = Vec::with_capacity(m);
    let mut residual = 0.0f64;
    for i in 0..raw.len() {
        if done[i] || (raw[i].im * half_width).abs() <= tol {
            continue;
        }
        // Collect the connected cluster around a non-real root.
        let mut group = vec![i];
        done[i] = true;
        let mut k = 0;
        while k < group.len() {
            let z = raw[group[k]];
            for j in 0..raw.len() {
                if !done[j] && (raw[j] - z).norm() <= merge_radius {
                    done[j] = true;
                    group.push(j);
                }
            }
            k += 1;
        }
        let centroid = group.iter().map(|&j| raw[j]).sum::<nalgebra::Complex<f64>>() / group.len() as f64;
        let imag = (centroid.im * half_width).abs();
        let spread = group.iter().map(|&j| (raw[j] - centroid).norm()).fold(0.0, f64::max);
        // Close real roots can come back from the companion matrix as
        // complex pairs; the operator itself decides by changing sign.
        if let Some(found) = real_roots_near(&f, &group.iter().map(|&j| raw[j]).collect::<Vec<_>>(), noise)? {
            real_roots.extend(found);
        } else if group.len() >= 3 && imag <= tol && spread <= merge_radius {
            residual = residual.max(imag);
            real_roots.extend(std::iter::repeat(centroid.re).take(group.len()));
        } else {
            let worst = group.iter().map(|&j| (raw[j].im * half_width).abs()).fold(0.0, f64::max);
            return Err(Error::HyperbolicityViolation { matrix: a.rows(), residual: worst });
        }
    }
    for i in 0..raw.len() {
        if done[i] {
            continue;
        }
        residual = residual.max((raw[i].im * half_width).abs());
        let mut x = raw[i].re;
        let isolated = raw.iter().enumerate().all(|(j, z)| j == i || (z - raw[i]).norm() > merge_radius);
        if isolated {
            // Newton on the operator itself, with the interpolant's slope.
            for _ in 0..3 {
                let d = poly::eval_real(&dcoef, x);
                if d == 0.0 {
                    break;
                }
                let fx = f(x)?;
                let next = x - fx / d;
                if f(next)?.abs() < fx.abs() {
                    x = next;
                } else {
                    break;
                }
            }
        }
        real_roots.push(x);
    }
    let mut eig: Vec<f64> = real_roots.iter().map(|x| -(center + x * half_width)).collect();
    eig.sort_by(f64::total_cmp);
    Ok(GardingSpectrum { eigenvalues: eig, residual })
}

/// Real roots of f accounting for a group of nearly real complex roots:
/// the sign changes of f on a fine grid over the group's window, located by
/// bisection, when there are as many as the group has members. A conjugate
/// pair with no sign change counts as a double root when |f| drops to the
/// noise level inside the window.
fn real_roots_near(
    f: &impl Fn(f64) -> Result<f64>,
    group: &[nalgebra::Complex<f64>],
    noise: f64,
) -> Result<Option<Vec<f64>>> {
    let lo = group.iter().map(|z| z.re - 4.0 * z.im.abs()).fold(f64::INFINITY, f64::min) - 1e-9;
    let hi = group.iter().map(|z| z.re + 4.0 * z.im.abs()).fold(f64::NEG_INFINITY, f64::max) + 1e-9;
    const GRID: usize = 256;
    let xs: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..GRID {
        if vs[i] == 0.0 {
            roots.push(xs[i]);
        } else if vs[i] * vs[i + 1] < 0.0 {
            let (mut a, mut b, fa) = (xs[i], xs[i + 1], vs[i]);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = f(mid)?;
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    if roots.len() == group.len() {
        return Ok(Some(roots));
    }
    if group.len() == 2 && roots.is_empty() {
        let (k, v) = vs.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, v)| if v.abs() < acc.1 { (k, v.abs()) } else { acc });
        if v <= noise {
            return Ok(Some(vec![xs[k], xs[k]]));
        }
    }
    Ok(None)
}

/// Coefficient extraction: with M(A + tI) = Σ c_j t^j (degree m), returns
/// c_{m−k} / γ^{m−k}, which equals e_k of the Gårding eigenvalues of A.
pub fn elementary_symmetric_value(base: &GardingOperator, k: usize, a: &SymMatrix) -> Result<f64> {
    let m = base.degree;
    if k > m {
        return Err(Error::OutOfRange(format!("need k <= {m}, got {k}")));
    }
    let half_width = a.frobenius() + 1.0;
    let nodes = poly::chebyshev_nodes(m + 1);
    let values: Vec<f64> = nodes.iter().map(|&x| base.evaluate(&a.shift(half_width * x))).collect::<Result<_>>()?;
    let coeffs = poly::interpolate_monomial(&values);
    let j = m - k;
    Ok(coeffs[j] / (half_width * base.gamma).powi(j as i32))
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub matrices: Vec<SymMatrix>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed violation (0 when every trial passed cleanly).
    pub worst: f64,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub operator: String,
    pub degree: usize,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

const CHECKS: [&str; 4] = ["real_rootedness", "cone_convexity", "positivity", "monotonicity"];

/// Per-trial outcome of each check: None if it passed, else (violation, counterexample).
type TrialOutcome = [Option<(f64, Counterexample)>; 4];

fn run_trial(op: &GardingOperator, seed: u64, trial: usize) -> TrialOutcome {
    let mut rng = seed::rng(seed, "certify", trial as u64);
    let n = op.dim;
    let g = op.gamma;
    let mut out: TrialOutcome = [None, None, None, None];
    let cx = |mats: Vec<SymMatrix>, detail: String| Counterexample { trial, matrices: mats, detail };
    let fail = |e: &Error| match e {
        Error::HyperbolicityViolation { residual, .. } => residual.max(f64::MIN_POSITIVE),
        _ => f64::INFINITY,
    };

    let a0 = random_symmetric(n, &mut rng);
    let spec0 = garding_eigenvalues(op, &a0);
    match &spec0 {
        Ok(s) if s.residual <= op.hyperbolicity_tol(&a0) => {}
        Ok(s) => out[0] = Some((s.residual, cx(vec![a0.clone()], "residual above tolerance".into()))),
        Err(e) => out[0] = Some((fail(e), cx(vec![a0.clone()], e.to_string()))),
    }

    // Points of Γ: shift a random matrix so its smallest eigenvalue is τ > 0.
    let mut into_cone = |tau: f64| -> Result<SymMatrix> {
        let a = random_symmetric(n, &mut rng);
        let mu = garding_eigenvalues(op, &a)?.eigenvalues;
        Ok(a.shift((tau - mu[0]) / g))
    };
    let t_a = 0.1 + 0.9 * rand::Rng::gen::<f64>(&mut seed::rng(seed, "certify-tau", trial as u64));
    let cone = into_cone(t_a).and_then(|a| Ok((a, into_cone(0.5)?, into_cone(0.0)?)));
    let (a, b, bz) = match cone {
        Ok(v) => v,
        Err(e) => {
            let v = fail(&e);
            let c = cx(vec![a0.clone()], format!("could not place a matrix in the cone: {e}"));
            for slot in out.iter_mut().skip(1) {
                *slot = Some((v, c.clone()));
            }
            return out;
        }
    };
    let mut rng = seed::rng(seed, "certify-extra", trial as u64);
    let tol = |mats: &[&SymMatrix]| 1e-8 * (1.0 + mats.iter().map(|m| m.frobenius()).sum::<f64>()) * g.max(1.0);

    // Convexity: segment between two cone points stays in the closed cone.
    let t: f64 = rand::Rng::gen(&mut rng);
    let c = a.scale(t).add(&b.scale(1.0 - t));
    match garding_eigenvalues(op, &c) {
        Ok(s) if s.eigenvalues[0] >= -tol(&[&a, &b]) => {}
        Ok(s) => out[1] = Some((-s.eigenvalues[0], cx(vec![a.clone(), b.clone()], format!("t = {t}")))),
        Err(e) => out[1] = Some((fail(&e), cx(vec![a.clone(), b.clone()], e.to_string()))),
    }

    // Positivity: Γ + P ⊂ Γ.
    let rank = rand::Rng::gen_range(&mut rng, 1..=n);
    let p = random_psd(n, rank, &mut rng);
    match garding_eigenvalues(op, &a.add(&p)) {
        Ok(s) if s.eigenvalues[0] >= -tol(&[&a, &p]) => {}
        Ok(s) => out[2] = Some((-s.eigenvalues[0], cx(vec![a.clone(), p.clone()], "A + P left the cone".into()))),
        Err(e) => out[2] = Some((fail(&e), cx(vec![a.clone(), p.clone()], e.to_string()))),
    }

    // Monotonicity: λ_k(A + B) ≥ λ_k(A) for B in the closed cone.
    let base = a0;
    let sum = base.add(&bz);
    match (garding_eigenvalues(op, &base), garding_eigenvalues(op, &sum)) {
        (Ok(s0), Ok(s1)) => {
            let worst = s0
                .eigenvalues
                .iter()
                .zip(&s1.eigenvalues)
                .map(|(x, y)| x - y)
                .fold(f64::NEG_INFINITY, f64::max);
            if worst > tol(&[&base, &bz]) {
                out[3] = Some((worst, cx(vec![base.clone(), bz.clone()], "an eigenvalue decreased".into())));
            }
        }
        (Err(e), _) | (_, Err(e)) => out[3] = Some((fail(&e), cx(vec![base.clone(), bz.clone()], e.to_string()))),
    }
    out
}

/// Sampled certification of Gårding's facts for an operator: real roots,
/// convex cone, Γ + 𝒫 ⊂ Γ and monotone eigenvalues. Each trial draws from
/// its own derived seed; the first failing trial of each check is kept.
pub fn certify_garding(op: &GardingOperator, trials: usize, seed: u64) -> CertificationReport {
    #[cfg(feature = "parallel")]
    let outcomes: Vec<TrialOutcome> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(|t| run_trial(op, seed, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<TrialOutcome> = (0..trials).map(|t| run_trial(op, seed, t)).collect();

    let mut checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|n| CheckResult { name: n.to_string(), trials, failures: 0, worst: 0.0, counterexample: None })
        .collect();
    for o in outcomes {
        for (check, slot) in checks.iter_mut().zip(o) {
            if let Some((v, c)) = slot {
                check.failures += 1;
                check.worst = check.worst.max(v);
                if check.counterexample.is_none() {
                    check.counterexample = Some(c);
                }
            }
        }
    }
    for c in checks.iter_mut() {
        if c.worst.is_infinite() {
            c.worst = f64::MAX;
        }
    }
    let passed = checks.iter().all(|c| c.failures == 0);
    CertificationReport { operator: op.name(), degree: op.degree, trials, seed, passed, checks }
}
