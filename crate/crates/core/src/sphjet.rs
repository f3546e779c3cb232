//! The spherical 2-jet map Φ: a 2-jet (g, Dg, Hess g) of a function on
//! S^{n−1} at σ goes to |x|^p D²u at σ, where u = |x|^{2−p} g(x/|x|).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_part_complex, hermitian_part_quaternionic, random_symmetric, tangent_frame, ComplexStructure, Frame,
    QuaternionStructure, SymMatrix, UnitVector,
};
use crate::seed::Rng;
use crate::subeq::Subequation;

/// A real-valued function on ℝⁿ, evaluated at unit vectors.
pub type SphereFn<'a> = &'a dyn Fn(&[f64]) -> f64;

pub const DEFAULT_STEP: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct SphericalJet {
    pub sigma: UnitVector,
    /// Orthonormal basis of T_σ S^{n−1}, one column per coordinate of Dg.
    pub basis: Frame,
    pub g: f64,
    pub dg: Vec<f64>,
    pub hess: SymMatrix,
}

impl SphericalJet {
    pub fn new(sigma: UnitVector, basis: Frame, g: f64, dg: Vec<f64>, hess: SymMatrix) -> Result<Self> {
        let n = sigma.dim();
        if n < 2 {
            return Err(Error::Jet("sphere dimension must be at least one".into()));
        }
        if basis.ambient_dim() != n || basis.plane_dim() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, got: basis.plane_dim() });
        }
        if dg.len() != n - 1 || hess.dim() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n - 1, got: dg.len().max(hess.dim()) });
        }
        let off = (basis.as_matrix().transpose() * sigma.as_vector()).amax();
        if off > 1e-10 {
            return Err(Error::Jet(format!("tangent basis is not orthogonal to sigma (residual {off:e})")));
        }
        Ok(SphericalJet { sigma, basis, g, dg, hess })
    }

    /// The jet of a constant function.
    pub fn constant(sigma: UnitVector, g: f64) -> Self {
        let n = sigma.dim();
        let basis = tangent_frame(&sigma);
        SphericalJet { sigma, basis, g, dg: vec![0.0; n - 1], hess: SymMatrix::zeros(n - 1) }
    }

    /// A jet with standard normal entries at a uniformly random point.
    pub fn random(n: usize, rng: &mut Rng) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let sigma = UnitVector::random(n, rng);
        let basis = tangent_frame(&sigma);
        let g: f64 = StandardNormal.sample(rng);
        let dg = (0..n - 1).map(|_| StandardNormal.sample(rng)).collect();
        let hess = random_symmetric(n - 1, rng);
        SphericalJet { sigma, basis, g, dg, hess }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// Same jet expressed in another tangent basis B' = B R.
    pub fn rebased(&self, basis: Frame) -> Result<Self> {
        let r = self.basis.as_matrix().transpose() * basis.as_matrix();
        let dg = r.transpose() * DVector::from_column_slice(&self.dg);
        let hess = self.hess.conjugate(&r.transpose());
        SphericalJet::new(self.sigma.clone(), basis, self.g, dg.iter().copied().collect(), hess)
    }

    fn q(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut q = DMatrix::zeros(n, n);
        q.columns_mut(0, n - 1).copy_from(self.basis.as_matrix());
        q.set_column(n - 1, self.sigma.as_vector());
        q
    }
}

/// Φ in the basis (tangent frame, σ):
/// [[Hess − (p−2)g I, −(p−1)Dg], [−(p−1)Dgᵀ, (p−2)(p−1)g]].
pub fn phi_blocks(jet: &SphericalJet, p: f64) -> SymMatrix {
    let n = jet.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            m[(i, j)] = jet.hess.get(i, j);
        }
        m[(i, i)] -= (p - 2.0) * jet.g;
        m[(i, n - 1)] = -(p - 1.0) * jet.dg[i];
        m[(n - 1, i)] = -(p - 1.0) * jet.dg[i];
    }
    m[(n - 1, n - 1)] = (p - 2.0) * (p - 1.0) * jet.g;
    SymMatrix::symmetrize(m)
}

/// Φ(J²_σ g) as a symmetric matrix on ℝⁿ.
pub fn assemble_phi(jet: &SphericalJet, p: f64) -> SymMatrix {
    phi_blocks(jet, p).conjugate(&jet.q())
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceIdentity {
    pub trace: f64,
    /// tr Hess − (n − p)(p − 2) g, computed from the jet directly.
    pub formula: f64,
    pub difference: f64,
}

pub fn trace_of_phi(jet: &SphericalJet, p: f64) -> TraceIdentity {
    let n = jet.dim() as f64;
    let trace = phi_blocks(jet, p).trace();
    let formula = jet.hess.trace() - (n - p) * (p - 2.0) * jet.g;
    TraceIdentity { trace, formula, difference: (trace - formula).abs() }
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::OutOfRange(format!("finite-difference step must lie in [1e-6, 1e-2], got {h}")));
    }
    Ok(())
}

fn sample(f: SphereFn, x: &DVector<f64>) -> Result<f64> {
    let v = f(x.as_slice());
    if !v.is_finite() {
        return Err(Error::Jet(format!("non-finite sample {v} at {:?}", x.as_slice())));
    }
    Ok(v)
}

/// Central-difference gradient and Hessian of f at x.
pub fn fd_derivatives(f: SphereFn, x: &DVector<f64>, h: f64) -> Result<(DVector<f64>, SymMatrix)> {
    let n = x.len();
    let f0 = sample(f, x)?;
    let e = |i: usize| DVector::from_fn(n, |k, _| if k == i { h } else { 0.0 });
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = sample(f, &(x + e(i)))?;
        let fm = sample(f, &(x - e(i)))?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let pp = sample(f, &(x + e(i) + e(j)))?;
            let pm = sample(f, &(x + e(i) - e(j)))?;
            let mp = sample(f, &(x - e(i) + e(j)))?;
            let mm = sample(f, &(x - e(i) - e(j)))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok((grad, SymMatrix::symmetrize(hess)))
}

fn unit(x: &[f64]) -> Vec<f64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / r).collect()
}

/// Recovers the riemannian 2-jet of g at σ from finite differences of its
/// degree-0 extension g̃(x) = g(x/|x|): at |x| = 1 the tangent block of D²g̃
/// is Hess g and the tangential gradient is Dg.
pub fn jet_from_function(g: SphereFn, sigma: &UnitVector, h: f64) -> Result<SphericalJet> {
    check_step(h)?;
    let ext = |x: &[f64]| g(&unit(x));
    let (grad, d2) = fd_derivatives(&ext, sigma.as_vector(), h)?;
    let basis = tangent_frame(sigma);
    let dg = basis.as_matrix().transpose() * grad;
    let hess = d2.restrict(&basis);
    let g0 = sample(g, sigma.as_vector())?;
    SphericalJet::new(sigma.clone(), basis, g0, dg.iter().copied().collect(), hess)
}

#[derive(Clone, Debug, Serialize)]
pub struct FdCheck {
    pub p: f64,
    pub h: f64,
    pub residual: f64,
    /// residual / h².
    pub constant: f64,
    pub phi: SymMatrix,
    pub hessian: SymMatrix,
}

/// Compares the finite-difference Hessian of u = |x|^{2−p} g(x/|x|) at σ
/// with Φ of the finite-difference jet of g.
pub fn fd_cross_check(g: SphereFn, sigma: &UnitVector, p: f64, h: f64) -> Result<FdCheck> {
    check_step(h)?;
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("p must be >= 1, got {p}")));
    }
    let u = |x: &[f64]| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        r.powf(2.0 - p) * g(&unit(x))
    };
    let (_, hessian) = fd_derivatives(&u, sigma.as_vector(), h)?;
    let jet = jet_from_function(g, sigma, h)?;
    let phi = assemble_phi(&jet, p);
    let residual = (hessian.as_matrix() - phi.as_matrix()).amax();
    Ok(FdCheck { p, h, residual, constant: residual / (h * h), phi, hessian })
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereMembership {
    pub member: bool,
    pub margin: f64,
}

/// Membership of the jet in F_{S^{n−1}} = Φ^{−1}(F).
pub fn sphere_subeq_member(f: &Subequation, jet: &SphericalJet, p: f64, tol: f64) -> Result<SphereMembership> {
    let margin = f.margin(&assemble_phi(jet, p))?;
    Ok(SphereMembership { member: margin >= -tol, margin })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureCheck {
    pub sigma: Vec<f64>,
    /// Largest deviation of g along the unit circle(s) of the line through σ.
    pub line_deviation: f64,
    /// Operator norm of the hermitian part restricted to the line through σ.
    pub line_block_norm: f64,
    /// Spectrum of the hermitian part on the orthogonal complement of the line.
    pub horizontal_eigenvalues: Vec<f64>,
    pub min_horizontal: f64,
    pub hessian: SymMatrix,
    pub hermitian_part: SymMatrix,
}

const LINE_TOL: f64 = 1e-8;

fn line_deviation(g: SphereFn, sigma: &DVector<f64>, rotations: &[DVector<f64>]) -> Result<f64> {
    let g0 = sample(g, sigma)?;
    let mut worst: f64 = 0.0;
    for w in rotations {
        for k in 1..8 {
            let t = k as f64 * std::f64::consts::TAU / 8.0;
            let x = sigma * t.cos() + w * t.sin();
            worst = worst.max((sample(g, &x)? - g0).abs());
        }
    }
    Ok(worst)
}

fn split_line(herm: &SymMatrix, line: &[DVector<f64>]) -> Result<(f64, Vec<f64>)> {
    let frame = Frame::orthonormalize(line)?;
    let block = herm.restrict(&frame).spectral_norm();
    let horizontal = match frame.complement() {
        Some(c) => herm.restrict(&c).eigenvalues(),
        None => Vec::new(),
    };
    Ok((block, horizontal))
}

/// For U = Θ log|x| + g(x/|x|) with g constant on complex lines: the
/// complex hermitian part of D²U at σ splits into a vanishing block on ℂσ
/// and a horizontal block whose positivity is plurisubharmonicity at σ.
pub fn complex_radial_structure_check(
    g: SphereFn,
    theta: f64,
    sigma: &UnitVector,
    structure: &ComplexStructure,
    h: f64,
) -> Result<StructureCheck> {
    check_step(h)?;
    if sigma.dim() != structure.dim() {
        return Err(Error::DimensionMismatch { expected: structure.dim(), got: sigma.dim() });
    }
    let s = sigma.as_vector();
    let js = structure.apply(s);
    let dev = line_deviation(g, s, std::slice::from_ref(&js))?;
    if dev > LINE_TOL {
        return Err(Error::Jet(format!("g is not constant on the complex line through sigma (deviation {dev:e})")));
    }
    let u = |x: &[f64]| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        theta * r.ln() + g(&unit(x))
    };
    let (_, hessian) = fd_derivatives(&u, s, h)?;
    let herm = hermitian_part_complex(&hessian, structure)?;
    let (line_block_norm, horizontal_eigenvalues) = split_line(&herm, &[s.clone(), js])?;
    Ok(StructureCheck {
        sigma: sigma.to_vec(),
        line_deviation: dev,
        line_block_norm,
        min_horizontal: horizontal_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        horizontal_eigenvalues,
        hessian,
        hermitian_part: herm,
    })
}

/// For U = |x|^{−2} g(x/|x|) with g constant on quaternionic lines: the
/// quaternionic hermitian part of D²U at σ vanishes on ℍσ and its
/// horizontal block is Hess g − 2g I there.
pub fn quaternionic_block_check(
    g: SphereFn,
    sigma: &UnitVector,
    structure: &QuaternionStructure,
    h: f64,
) -> Result<StructureCheck> {
    check_step(h)?;
    if sigma.dim() != structure.dim() {
        return Err(Error::DimensionMismatch { expected: structure.dim(), got: sigma.dim() });
    }
    let s = sigma.as_vector();
    let line = structure.line_basis(s);
    let dev = line_deviation(g, s, &line[1..])?;
    if dev > LINE_TOL {
        return Err(Error::Jet(format!(
            "g is not constant on the quaternionic line through sigma (deviation {dev:e})"
        )));
    }
    let u = |x: &[f64]| {
        let r2 = x.iter().map(|v| v * v).sum::<f64>();
        g(&unit(x)) / r2
    };
    let (_, hessian) = fd_derivatives(&u, s, h)?;
    let herm = hermitian_part_quaternionic(&hessian, structure)?;
    let (line_block_norm, horizontal_eigenvalues) = split_line(&herm, &line)?;
    Ok(StructureCheck {
        sigma: sigma.to_vec(),
        line_deviation: dev,
        line_block_norm,
        min_horizontal: horizontal_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
        horizontal_eigenvalues,
        hessian,
        hermitian_part: herm,
    })
}
