//! Symmetric matrices, orthonormal frames and the complex / quaternionic
//! structures on ℝⁿ together with the hermitian-part projections.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Tolerance for accepting a matrix as symmetric, relative to its scale.
const SYMMETRY_TOL: f64 = 1e-12;
/// Frames with a larger Gram residual are rejected.
const FRAME_TOL: f64 = 1e-8;
/// Residual allowed for J² = −I and orthogonality of structures.
const STRUCTURE_TOL: f64 = 1e-12;

/// A real symmetric n×n matrix. The stored entries are exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Accepts a matrix that is symmetric up to rounding and stores its
    /// symmetrization.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::OutOfRange("matrix has non-finite entries".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self::symmetrize(m))
    }

    /// ½(M + Mᵀ) without any symmetry check.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix { m: (m + t) * 0.5 }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { m: DMatrix::identity(n, n) }
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMatrix { m: DMatrix::from_diagonal(&DVector::from_column_slice(d)) }
    }

    /// v vᵀ
    pub fn outer(v: &DVector<f64>) -> Self {
        Self::symmetrize(v * v.transpose())
    }

    /// Projection onto the column span of an orthonormal frame.
    pub fn projector(frame: &Frame) -> Self {
        Self::symmetrize(&frame.m * frame.m.transpose())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.m.row(i).iter().copied().collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix { m: &self.m - &other.m }
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { m: &self.m * c }
    }

    /// A + c·I
    pub fn shift(&self, c: f64) -> SymMatrix {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += c;
        }
        SymMatrix { m }
    }

    /// Q A Qᵀ for an orthogonal (or any square) Q.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> SymMatrix {
        Self::symmetrize(q * &self.m * q.transpose())
    }

    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.m * v))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Ascending eigenvalues with matching orthonormal eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let se = SymmetricEigen::new(self.m.clone());
        let n = self.dim();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.m - self.m.transpose()).amax()
    }

    /// Restriction Wᵀ A W to the span of a frame.
    pub fn restrict(&self, frame: &Frame) -> SymMatrix {
        Self::symmetrize(frame.m.transpose() * &self.m * &frame.m)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// A vector of Euclidean norm one.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector {
    v: DVector<f64>,
}

impl UnitVector {
    pub fn normalize(v: DVector<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::DegenerateVector);
        }
        Ok(UnitVector { v: v / n })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::normalize(DVector::from_column_slice(x))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        UnitVector { v }
    }

    pub fn random(n: usize, rng: &mut Rng) -> Self {
        loop {
            let v = gaussian_vector(n, rng);
            if let Ok(u) = Self::normalize(v) {
                return u;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.v
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.v.iter().copied().collect()
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Symmetric matrix with independent N(0,1) entries on and above the diagonal.
pub fn random_symmetric(n: usize, rng: &mut Rng) -> SymMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    SymMatrix { m }
}

/// Random positive semidefinite matrix G Gᵀ with G of the given rank.
pub fn random_psd(n: usize, rank: usize, rng: &mut Rng) -> SymMatrix {
    let g = DMatrix::from_fn(n, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    SymMatrix::symmetrize(&g * g.transpose())
}

/// n×p matrix with orthonormal columns, spanning a p-plane in ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    m: DMatrix<f64>,
}

impl Frame {
    /// Accepts columns that are orthonormal to within 1e-8; anything worse
    /// is rejected rather than repaired.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.ncols() == 0 || m.ncols() > m.nrows() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let r = gram_residual(&m);
        if !(r <= FRAME_TOL) {
            return Err(Error::NotOrthonormal { residual: r });
        }
        Ok(Frame { m })
    }

    pub fn from_columns(cols: &[DVector<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Self::new(DMatrix::from_columns(cols))
    }

    /// Gram–Schmidt (twice) on the given vectors; fails when they are
    /// numerically dependent.
    pub fn orthonormalize(cols: &[DVector<f64>]) -> Result<Self> {
        let mut out: Vec<DVector<f64>> = Vec::with_capacity(cols.len());
        for c in cols {
            let w = project_off(c, &out);
            if w.norm() < 1e-10 * c.norm().max(1e-300) {
                return Err(Error::DegenerateVector);
            }
            out.push(w.normalize());
        }
        Self::from_columns(&out)
    }

    /// The standard coordinate plane spanned by the listed axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let cols: Vec<DVector<f64>> = axes.iter().map(|&i| UnitVector::basis(n, i).v).collect();
        Self::from_columns(&cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn plane_dim(&self) -> usize {
        self.m.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.m.column(i).into_owned()
    }

    pub fn columns(&self) -> Vec<DVector<f64>> {
        (0..self.plane_dim()).map(|i| self.column(i)).collect()
    }

    pub fn gram_residual(&self) -> f64 {
        gram_residual(&self.m)
    }

    /// Orthogonal projection of v onto the plane.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * (self.m.transpose() * v)
    }

    /// Euclidean distance from v to the plane.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    /// Uniformly distributed unit vector in the plane.
    pub fn random_unit(&self, rng: &mut Rng) -> UnitVector {
        let c = UnitVector::random(self.plane_dim(), rng);
        UnitVector { v: &self.m * c.v }
    }

    /// Extends the frame by orthonormal columns to a full orthonormal basis.
    pub fn complete(&self) -> Frame {
        let n = self.ambient_dim();
        let mut cols = self.columns();
        for i in 0..n {
            if cols.len() == n {
                break;
            }
            let w = project_off(&UnitVector::basis(n, i).v, &cols);
            if w.norm() > 1e-6 {
                cols.push(w.normalize());
            }
        }
        Frame { m: DMatrix::from_columns(&cols) }
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Option<Frame> {
        let full = self.complete();
        let p = self.plane_dim();
        if p == self.ambient_dim() {
            return None;
        }
        Some(Frame { m: full.m.columns(p, full.m.ncols() - p).into_owned() })
    }

    pub fn to_columns_vec(&self) -> Vec<Vec<f64>> {
        self.columns().iter().map(|c| c.iter().copied().collect()).collect()
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_columns_vec().serialize(s)
    }
}

fn gram_residual(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    (g - DMatrix::identity(m.ncols(), m.ncols())).amax()
}

/// v minus its projection on the span of orthonormal `basis`, applied twice
/// for stability.
pub fn project_off(v: &DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w.axpy(-c, b, 1.0);
        }
    }
    w
}

/// Orthonormal basis of the tangent space σ^⊥ of the unit sphere at σ.
pub fn tangent_frame(sigma: &UnitVector) -> Frame {
    let f = Frame { m: DMatrix::from_columns(&[sigma.v.clone()]) };
    f.complement().expect("sphere of dimension at least one")
}

/// Dimension of W₁ ∩ W₂, from the numerical rank of [W₁ | W₂].
pub fn intersection_dim(a: &Frame, b: &Frame) -> usize {
    let n = a.ambient_dim();
    let p = a.plane_dim() + b.plane_dim();
    let mut m = DMatrix::zeros(n, p);
    m.columns_mut(0, a.plane_dim()).copy_from(&a.m);
    m.columns_mut(a.plane_dim(), b.plane_dim()).copy_from(&b.m);
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0f64, |x, y| x.max(*y));
    let rank = sv.iter().filter(|s| **s > 1e-8 * smax).count();
    p - rank
}

/// Trace of A restricted to the plane spanned by the frame.
pub fn trace_on_plane(a: &SymMatrix, w: &Frame) -> f64 {
    let aw = &a.m * &w.m;
    (0..w.plane_dim()).map(|i| w.m.column(i).dot(&aw.column(i))).sum()
}

/// Orthogonal complex structure J on ℝ^{2m}: J² = −I, Jᵀ = −J.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    j: DMatrix<f64>,
}

impl ComplexStructure {
    /// Real coordinates (x₀, y₀, x₁, y₁, …) with J x_k = y_k, J y_k = −x_k.
    pub fn standard(m: usize) -> Self {
        let n = 2 * m;
        let mut j = DMatrix::zeros(n, n);
        for k in 0..m {
            j[(2 * k + 1, 2 * k)] = 1.0;
            j[(2 * k, 2 * k + 1)] = -1.0;
        }
        ComplexStructure { j }
    }

    pub fn from_matrix(j: DMatrix<f64>) -> Result<Self> {
        check_structure(&j, "J")?;
        Ok(ComplexStructure { j })
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn complex_dim(&self) -> usize {
        self.j.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.j * v
    }

    /// Multiplication by e^{iθ}: cos θ + sin θ J.
    pub fn rotate(&self, v: &DVector<f64>, theta: f64) -> DVector<f64> {
        v * theta.cos() + self.apply(v) * theta.sin()
    }
}

/// Quaternionic structure I, J, K on ℝ^{4m} with IJ = K, acting on each
/// block (a, b, c, d) ≅ a + bi + cj + dk by left multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionStructure {
    i: DMatrix<f64>,
    j: DMatrix<f64>,
    k: DMatrix<f64>,
}

impl QuaternionStructure {
    pub fn standard(m: usize) -> Self {
        let n = 4 * m;
        let mut i = DMatrix::zeros(n, n);
        let mut j = DMatrix::zeros(n, n);
        let mut k = DMatrix::zeros(n, n);
        // (row, col, sign) triples for one block; I q = (−b, a, −d, c) etc.
        let iq = [(0, 1, -1.0), (1, 0, 1.0), (2, 3, -1.0), (3, 2, 1.0)];
        let jq = [(0, 2, -1.0), (1, 3, 1.0), (2, 0, 1.0), (3, 1, -1.0)];
        let kq = [(0, 3, -1.0), (1, 2, -1.0), (2, 1, 1.0), (3, 0, 1.0)];
        for b in 0..m {
            let o = 4 * b;
            for &(r, c, s) in &iq {
                i[(o + r, o + c)] = s;
            }
            for &(r, c, s) in &jq {
                j[(o + r, o + c)] = s;
            }
            for &(r, c, s) in &kq {
                k[(o + r, o + c)] = s;
            }
        }
        QuaternionStructure { i, j, k }
    }

    pub fn from_matrices(i: DMatrix<f64>, j: DMatrix<f64>, k: DMatrix<f64>) -> Result<Self> {
        check_structure(&i, "I")?;
        check_structure(&j, "J")?;
        check_structure(&k, "K")?;
        let r = (&i * &j - &k).amax();
        if r > STRUCTURE_TOL * 10.0 {
            return Err(Error::InvalidStructure(format!("IJ != K (residual {r:e})")));
        }
        Ok(QuaternionStructure { i, j, k })
    }

    pub fn dim(&self) -> usize {
        self.i.nrows()
    }

    pub fn quaternionic_dim(&self) -> usize {
        self.i.nrows() / 4
    }

    pub fn units(&self) -> [&DMatrix<f64>; 3] {
        [&self.i, &self.j, &self.k]
    }

    /// The complex structure given by the unit I.
    pub fn complex_i(&self) -> ComplexStructure {
        ComplexStructure { j: self.i.clone() }
    }

    /// Orthonormal basis (v, Iv, Jv, Kv) of the quaternionic line through v.
    pub fn line_basis(&self, v: &DVector<f64>) -> [DVector<f64>; 4] {
        [v.clone(), &self.i * v, &self.j * v, &self.k * v]
    }
}

fn check_structure(j: &DMatrix<f64>, name: &str) -> Result<()> {
    let n = j.nrows();
    if n != j.ncols() || n % 2 != 0 || n == 0 {
        return Err(Error::InvalidStructure(format!("{name} must be square of even size")));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let sq = (j * j + &id).amax();
    let orth = (j.transpose() * j - &id).amax();
    if sq > STRUCTURE_TOL || orth > STRUCTURE_TOL {
        return Err(Error::InvalidStructure(format!(
            "{name}^2 + I residual {sq:e}, orthogonality residual {orth:e}"
        )));
    }
    Ok(())
}

fn check_dim(a: &SymMatrix, n: usize) -> Result<()> {
    if a.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.dim() });
    }
    Ok(())
}

/// A_ℂ = ½(A − JAJ), the J-hermitian symmetric part.
pub fn hermitian_part_complex(a: &SymMatrix, s: &ComplexStructure) -> Result<SymMatrix> {
    check_dim(a, s.dim())?;
    let jaj = &s.j * &a.m * &s.j;
    Ok(SymMatrix::symmetrize((&a.m - jaj) * 0.5))
}

/// ½(A + JAJ), the J-skew-hermitian symmetric part.
pub fn skew_part_complex(a: &SymMatrix, s: &ComplexStructure) -> Result<SymMatrix> {
    check_dim(a, s.dim())?;
    let jaj = &s.j * &a.m * &s.j;
    Ok(SymMatrix::symmetrize((&a.m + jaj) * 0.5))
}

/// A_ℍ = ¼(A − IAI − JAJ − KAK).
pub fn hermitian_part_quaternionic(a: &SymMatrix, s: &QuaternionStructure) -> Result<SymMatrix> {
    check_dim(a, s.dim())?;
    let mut out = a.m.clone();
    for u in s.units() {
        out -= u * &a.m * u;
    }
    Ok(SymMatrix::symmetrize(out * 0.25))
}

fn pairing_tol(a: &SymMatrix) -> f64 {
    1e-8 * (1.0 + a.frobenius())
}

/// The magnitudes λ₁ ≤ … ≤ λ_m ≥ 0 of the skew part, whose spectrum is
/// {±λ_k}. Fails when the spectrum is not symmetric.
pub fn skew_hermitian_eigenvalue_pairs(a: &SymMatrix, s: &ComplexStructure) -> Result<Vec<f64>> {
    let skew = skew_part_complex(a, s)?;
    let mu = skew.eigenvalues();
    let n = mu.len();
    let m = n / 2;
    let tol = pairing_tol(a);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let lo = mu[k];
        let hi = mu[n - 1 - k];
        if (lo + hi).abs() > tol {
            return Err(Error::Pairing(format!("skew spectrum not symmetric: {lo} vs {hi}")));
        }
        out.push(((hi - lo) * 0.5).max(0.0));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn grouped_eigenvalues(h: &SymMatrix, group: usize, tol: f64) -> Result<Vec<f64>> {
    let mu = h.eigenvalues();
    let mut out = Vec::with_capacity(mu.len() / group);
    for chunk in mu.chunks(group) {
        let spread = chunk[group - 1] - chunk[0];
        if spread > tol {
            return Err(Error::Pairing(format!(
                "eigenvalues {chunk:?} do not form a multiplicity-{group} group"
            )));
        }
        out.push(chunk.iter().sum::<f64>() / group as f64);
    }
    Ok(out)
}

/// Complex eigenvalues λ^ℂ(A): the spectrum of A_ℂ with each (doubled)
/// eigenvalue listed once, ascending.
pub fn complex_eigenvalues(a: &SymMatrix, s: &ComplexStructure) -> Result<Vec<f64>> {
    let h = hermitian_part_complex(a, s)?;
    grouped_eigenvalues(&h, 2, pairing_tol(a))
}

/// Quaternionic eigenvalues λ^ℍ(A): the spectrum of A_ℍ with each
/// (quadrupled) eigenvalue listed once, ascending.
pub fn quaternionic_eigenvalues(a: &SymMatrix, s: &QuaternionStructure) -> Result<Vec<f64>> {
    let h = hermitian_part_quaternionic(a, s)?;
    grouped_eigenvalues(&h, 4, pairing_tol(a))
}

/// Random element of U(m) ⊂ O(2m): complex Gram–Schmidt of Gaussian vectors.
pub fn random_unitary(s: &ComplexStructure, rng: &mut Rng) -> DMatrix<f64> {
    let n = s.dim();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let w = project_off(&gaussian_vector(n, rng), &cols);
        if w.norm() < 1e-6 {
            continue;
        }
        let w = w.normalize();
        let jw = s.apply(&w);
        cols.push(w);
        cols.push(jw);
    }
    DMatrix::from_columns(&cols)
}

/// Random element of Sp(m) ⊂ O(4m) (commuting with I, J, K).
pub fn random_symplectic(s: &QuaternionStructure, rng: &mut Rng) -> DMatrix<f64> {
    let n = s.dim();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let w = project_off(&gaussian_vector(n, rng), &cols);
        if w.norm() < 1e-6 {
            continue;
        }
        let w = w.normalize();
        cols.extend(s.line_basis(&w));
    }
    DMatrix::from_columns(&cols)
}

/// Random orthogonal matrix.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let w = project_off(&gaussian_vector(n, rng), &cols);
        if w.norm() > 1e-6 {
            cols.push(w.normalize());
        }
    }
    DMatrix::from_columns(&cols)
}

/// Right multiplication by the unit quaternion (a, b, c, d) on every block;
/// commutes with the left-multiplication structure.
pub fn right_quaternion(m: usize, q: [f64; 4]) -> DMatrix<f64> {
    let [a, b, c, d] = q;
    // x ↦ x·q for x = (x0, x1, x2, x3).
    let block = DMatrix::from_row_slice(
        4,
        4,
        &[a, -b, -c, -d, b, a, d, -c, c, -d, a, b, d, c, -b, a],
    );
    let mut out = DMatrix::zeros(4 * m, 4 * m);
    for k in 0..m {
        out.view_mut((4 * k, 4 * k), (4, 4)).copy_from(&block);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn standard_complex_structure_squares_to_minus_identity() {
        let s = ComplexStructure::standard(3);
        assert!(ComplexStructure::from_matrix(s.matrix().clone()).is_ok());
        let e0 = UnitVector::basis(6, 0);
        assert_eq!(s.apply(e0.as_vector())[1], 1.0);
    }

    #[test]
    fn quaternion_units_multiply() {
        let q = QuaternionStructure::standard(2);
        let [i, j, k] = q.units();
        assert!(QuaternionStructure::from_matrices(i.clone(), j.clone(), k.clone()).is_ok());
        assert!((j * k - i).amax() < 1e-15);
        assert!((k * i - j).amax() < 1e-15);
    }

    #[test]
    fn right_multiplication_commutes_with_left_units() {
        let q = QuaternionStructure::standard(1);
        let n = (0.3f64 * 0.3 + 0.4 * 0.4 + 0.5 * 0.5 + 0.1 * 0.1).sqrt();
        let r = right_quaternion(1, [0.3 / n, 0.4 / n, 0.5 / n, 0.1 / n]);
        for u in q.units() {
            assert!((u * &r - &r * u).amax() < 1e-14);
        }
        assert!((r.transpose() * &r - DMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn hermitian_parts_of_examples() {
        let s = ComplexStructure::standard(2);
        let a = SymMatrix::diag(&[1.0, -1.0, 1.0, -1.0]);
        let h = hermitian_part_complex(&a, &s).unwrap();
        assert!(h.frobenius() < 1e-15);
        let pairs = skew_hermitian_eigenvalue_pairs(&a, &s).unwrap();
        assert!((pairs[0] - 1.0).abs() < 1e-12 && (pairs[1] - 1.0).abs() < 1e-12);

        let b = SymMatrix::diag(&[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(complex_eigenvalues(&b, &s).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn projector_trace_is_plane_dim() {
        let mut rng = seed::rng(1, "t", 0);
        let q = random_orthogonal(5, &mut rng);
        let f = Frame::new(q.columns(0, 2).into_owned()).unwrap();
        let p = SymMatrix::projector(&f);
        assert!((p.trace() - 2.0).abs() < 1e-12);
        assert!((trace_on_plane(&SymMatrix::identity(5), &f) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_frames_are_rejected() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.1, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(Frame::new(m), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn intersection_dimensions() {
        let a = Frame::coordinate(3, &[0, 1]).unwrap();
        let b = Frame::coordinate(3, &[1, 2]).unwrap();
        let c = Frame::coordinate(4, &[0, 1]).unwrap();
        let d = Frame::coordinate(4, &[2, 3]).unwrap();
        assert_eq!(intersection_dim(&a, &b), 1);
        assert_eq!(intersection_dim(&a, &a), 2);
        assert_eq!(intersection_dim(&c, &d), 0);
    }
}
