//! Cone subequations F ⊂ Sym(ℝⁿ), their margins, duals, expansions and
//! Riesz characteristics.
//!
//! Every subequation is represented through a margin function m_F with
//! F = {m_F ≥ 0}; membership with tolerance ε means m_F(A) ≥ −ε.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::garding::GardingOperator;
use crate::grassmann::PlaneFamily;
use crate::linalg::{
    complex_eigenvalues, quaternionic_eigenvalues, skew_hermitian_eigenvalue_pairs, trace_on_plane,
    ComplexStructure, Frame, QuaternionStructure, SymMatrix,
};

/// O(n)-invariant subequations described by a condition on the ascending
/// eigenvalue tuple.
#[derive(Clone, Debug, PartialEq)]
pub enum EigenProfile {
    /// 𝒫: λ₁ ≥ 0.
    Orphant,
    /// Δ: Σλ ≥ 0.
    Trace,
    /// λ₁ + (p−1)λₙ ≥ 0.
    MinMax(f64),
    /// λ₁ + (p−1)λ₂ ≥ 0.
    Min2(f64),
    /// 𝒫_p: λ₁ + … + λ_⌊p⌋ + (p−⌊p⌋)λ_{⌊p⌋+1} ≥ 0.
    PConvex(f64),
    /// Condition of `base` applied to λ + (δ/n)Σλ.
    Expansion { base: Box<EigenProfile>, delta: f64 },
    /// Dual profile: −m(−λ).
    Dual(Box<EigenProfile>),
}

impl EigenProfile {
    pub fn validate(&self, n: usize) -> Result<()> {
        let check_p = |p: f64, hi: f64, name: &str| -> Result<()> {
            if !(p.is_finite() && p >= 1.0 && p <= hi) {
                return Err(Error::MalformedSubequation(format!(
                    "{name} requires 1 <= p <= {hi}, got p = {p}"
                )));
            }
            Ok(())
        };
        if n == 0 {
            return Err(Error::MalformedSubequation("dimension must be positive".into()));
        }
        match self {
            EigenProfile::Orphant | EigenProfile::Trace => Ok(()),
            EigenProfile::MinMax(p) => check_p(*p, f64::MAX, "minmax"),
            EigenProfile::Min2(p) => {
                if n < 2 {
                    return Err(Error::MalformedSubequation("min2 needs n >= 2".into()));
                }
                check_p(*p, f64::MAX, "min2")
            }
            EigenProfile::PConvex(p) => check_p(*p, n as f64, "pconvex"),
            EigenProfile::Expansion { base, delta } => {
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(Error::MalformedSubequation(format!("delta must be >= 0, got {delta}")));
                }
                base.validate(n)
            }
            EigenProfile::Dual(base) => base.validate(n),
        }
    }

    /// Margin on an ascending eigenvalue tuple.
    pub fn margin(&self, lam: &[f64]) -> f64 {
        let n = lam.len();
        match self {
            EigenProfile::Orphant => lam[0],
            EigenProfile::Trace => lam.iter().sum(),
            EigenProfile::MinMax(p) => lam[0] + (p - 1.0) * lam[n - 1],
            EigenProfile::Min2(p) => lam[0] + (p - 1.0) * lam[1.min(n - 1)],
            EigenProfile::PConvex(p) => {
                let k = (p.floor() as usize).min(n);
                let frac = p - p.floor();
                let mut s: f64 = lam[..k].iter().sum();
                if k < n && frac > 0.0 {
                    s += frac * lam[k];
                }
                s
            }
            EigenProfile::Expansion { base, delta } => {
                let shift = delta / n as f64 * lam.iter().sum::<f64>();
                let moved: Vec<f64> = lam.iter().map(|x| x + shift).collect();
                base.margin(&moved)
            }
            EigenProfile::Dual(base) => {
                let neg: Vec<f64> = lam.iter().rev().map(|x| -x).collect();
                -base.margin(&neg)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            EigenProfile::Orphant => "orphant".into(),
            EigenProfile::Trace => "trace".into(),
            EigenProfile::MinMax(p) => format!("minmax({p})"),
            EigenProfile::Min2(p) => format!("min2({p})"),
            EigenProfile::PConvex(p) => format!("pconvex({p})"),
            EigenProfile::Expansion { base, delta } => format!("expansion({}, {delta})", base.name()),
            EigenProfile::Dual(base) => format!("dual({})", base.name()),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Profile(EigenProfile),
    ComplexLift { base: EigenProfile, structure: ComplexStructure },
    QuaternionLift { base: EigenProfile, structure: QuaternionStructure },
    Isotropic { structure: ComplexStructure, p: usize },
    Geometric { family: PlaneFamily, planes: Arc<Vec<Frame>> },
    GardingBranch { operator: GardingOperator, branch: usize },
    Expansion { base: Box<Subequation>, delta: f64 },
    Dual(Box<Subequation>),
}

/// A closed cone subequation on Sym(ℝⁿ).
#[derive(Clone, Debug)]
pub struct Subequation {
    dim: usize,
    repr: Repr,
}

impl Subequation {
    pub fn profile(n: usize, profile: EigenProfile) -> Result<Self> {
        profile.validate(n)?;
        Ok(Subequation { dim: n, repr: Repr::Profile(profile) })
    }

    pub fn orphant(n: usize) -> Self {
        Subequation { dim: n, repr: Repr::Profile(EigenProfile::Orphant) }
    }

    pub fn laplacian(n: usize) -> Self {
        Subequation { dim: n, repr: Repr::Profile(EigenProfile::Trace) }
    }

    pub fn minmax(n: usize, p: f64) -> Result<Self> {
        Self::profile(n, EigenProfile::MinMax(p))
    }

    pub fn min2(n: usize, p: f64) -> Result<Self> {
        Self::profile(n, EigenProfile::Min2(p))
    }

    pub fn pconvex(n: usize, p: f64) -> Result<Self> {
        Self::profile(n, EigenProfile::PConvex(p))
    }

    /// F^ℂ: the profile applied to the complex eigenvalues of A.
    pub fn complex_lift(base: EigenProfile, structure: ComplexStructure) -> Result<Self> {
        base.validate(structure.complex_dim())?;
        Ok(Subequation { dim: structure.dim(), repr: Repr::ComplexLift { base, structure } })
    }

    /// F^ℍ: the profile applied to the quaternionic eigenvalues of A.
    pub fn quaternionic_lift(base: EigenProfile, structure: QuaternionStructure) -> Result<Self> {
        base.validate(structure.quaternionic_dim())?;
        Ok(Subequation { dim: structure.dim(), repr: Repr::QuaternionLift { base, structure } })
    }

    /// LAG: A is nonnegative on every Lagrangian plane.
    pub fn lagrangian(structure: ComplexStructure) -> Self {
        let p = structure.complex_dim();
        Subequation { dim: structure.dim(), repr: Repr::Isotropic { structure, p } }
    }

    /// ISO_p: A has nonnegative trace on every isotropic p-plane.
    pub fn isotropic(structure: ComplexStructure, p: usize) -> Result<Self> {
        if p == 0 || p > structure.complex_dim() {
            return Err(Error::MalformedSubequation(format!(
                "isotropic planes need 1 <= p <= {}, got {p}",
                structure.complex_dim()
            )));
        }
        Ok(Subequation { dim: structure.dim(), repr: Repr::Isotropic { structure, p } })
    }

    /// F(Gl): nonnegative trace on every plane of the family, tested on
    /// `budget` planes sampled once from the seed.
    pub fn geometric(family: PlaneFamily, budget: usize, seed: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::MalformedSubequation("geometric subequation needs budget > 0".into()));
        }
        let planes = family.sample_many(budget, seed)?;
        Ok(Subequation { dim: family.ambient_dim(), repr: Repr::Geometric { family, planes: Arc::new(planes) } })
    }

    /// The k-th Gårding branch {λ_k ≥ 0}, 1-based with λ₁ the smallest.
    pub fn garding_branch(operator: GardingOperator, branch: usize) -> Result<Self> {
        if branch == 0 || branch > operator.degree() {
            return Err(Error::MalformedSubequation(format!(
                "branch must lie in 1..={}, got {branch}",
                operator.degree()
            )));
        }
        Ok(Subequation { dim: operator.dim(), repr: Repr::GardingBranch { operator, branch } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> String {
        match &self.repr {
            Repr::Profile(p) => p.name(),
            Repr::ComplexLift { base, .. } => format!("complex_lift({})", base.name()),
            Repr::QuaternionLift { base, .. } => format!("quaternionic_lift({})", base.name()),
            Repr::Isotropic { structure, p } if *p == structure.complex_dim() => "lagrangian".into(),
            Repr::Isotropic { p, .. } => format!("isotropic({p})"),
            Repr::Geometric { family, planes } => format!("geometric({}, {})", family.name(), planes.len()),
            Repr::GardingBranch { operator, branch } => format!("branch({}, {branch})", operator.name()),
            Repr::Expansion { base, delta } => format!("expansion({}, {delta})", base.name()),
            Repr::Dual(base) => format!("dual({})", base.name()),
        }
    }

    pub fn margin(&self, a: &SymMatrix) -> Result<f64> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
        }
        match &self.repr {
            Repr::Profile(p) => Ok(p.margin(&a.eigenvalues())),
            Repr::ComplexLift { base, structure } => Ok(base.margin(&complex_eigenvalues(a, structure)?)),
            Repr::QuaternionLift { base, structure } => Ok(base.margin(&quaternionic_eigenvalues(a, structure)?)),
            Repr::Isotropic { structure, p } => isotropic_margin(a, structure, *p),
            Repr::Geometric { planes, .. } => {
                Ok(planes.iter().map(|w| trace_on_plane(a, w)).fold(f64::INFINITY, f64::min))
            }
            Repr::GardingBranch { operator, branch } => Ok(operator.spectrum(a)?[branch - 1]),
            Repr::Expansion { base, delta } => base.margin(&a.shift(delta / self.dim as f64 * a.trace())),
            Repr::Dual(base) => Ok(-base.margin(&a.scale(-1.0))?),
        }
    }

    pub fn member(&self, a: &SymMatrix, tol: f64) -> Result<bool> {
        Ok(self.margin(a)? >= -tol)
    }
}

/// Margin of ISO_p: (p/2m)·tr A minus the p largest skew-hermitian
/// magnitudes. At p = m this is tr A/2 − Σλ_k, the Lagrangian margin.
fn isotropic_margin(a: &SymMatrix, s: &ComplexStructure, p: usize) -> Result<f64> {
    let pairs = skew_hermitian_eigenvalue_pairs(a, s)?;
    let m = s.complex_dim();
    let top: f64 = pairs.iter().rev().take(p).sum();
    Ok(p as f64 / (2 * m) as f64 * a.trace() - top)
}

/// F(δ) = {A : A + (δ/n)(tr A)·I ∈ F}.
pub fn expand(f: &Subequation, delta: f64) -> Result<Subequation> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::MalformedSubequation(format!("delta must be >= 0, got {delta}")));
    }
    if let Repr::Profile(p) = &f.repr {
        return Subequation::profile(f.dim, EigenProfile::Expansion { base: Box::new(p.clone()), delta });
    }
    Ok(Subequation { dim: f.dim, repr: Repr::Expansion { base: Box::new(f.clone()), delta } })
}

/// The dual subequation F̃ = −(∼ int F).
pub fn dual(f: &Subequation) -> Subequation {
    match &f.repr {
        Repr::Profile(p) => Subequation { dim: f.dim, repr: Repr::Profile(EigenProfile::Dual(Box::new(p.clone()))) },
        Repr::Dual(inner) => (**inner).clone(),
        _ => Subequation { dim: f.dim, repr: Repr::Dual(Box::new(f.clone())) },
    }
}

/// A ∈ F̃ at tolerance ε, decided as −A − εI ∉ F.
pub fn dual_member(f: &Subequation, a: &SymMatrix, eps: f64) -> Result<bool> {
    let probe = a.scale(-1.0).shift(-eps);
    Ok(!f.member(&probe, 0.0)?)
}

#[derive(Clone, Copy, Debug)]
pub struct RieszOptions {
    /// Target width of the final bisection bracket.
    pub tol: f64,
    /// Largest exponent probed before declaring the characteristic infinite.
    pub p_max: f64,
}

impl Default for RieszOptions {
    fn default() -> Self {
        RieszOptions { tol: 1e-9, p_max: 1e6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RieszCharacteristic {
    pub value: Extended,
    /// Final bisection bracket [lo, hi]; membership holds at lo, fails at hi.
    pub bracket: Option<[f64; 2]>,
}

fn riesz_probe_increasing(n: usize, p: f64) -> SymMatrix {
    let mut d = vec![1.0; n];
    d[0] = -(p - 1.0);
    SymMatrix::diag(&d)
}

fn riesz_probe_decreasing(n: usize, q: f64) -> SymMatrix {
    let mut d = vec![-1.0; n];
    d[n - 1] = q - 1.0;
    SymMatrix::diag(&d)
}

fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut inside: impl FnMut(f64) -> Result<bool>) -> Result<[f64; 2]> {
    // Invariant: inside(lo) and !inside(hi).
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok([lo, hi])
}

/// p_F = sup{p ≥ 1 : diag(−(p−1), 1, …, 1) ∈ F}.
pub fn riesz_characteristic_increasing(f: &Subequation, opts: RieszOptions) -> Result<RieszCharacteristic> {
    let n = f.dim();
    let inside = |p: f64| f.member(&riesz_probe_increasing(n, p), 0.0);
    if !inside(1.0)? {
        return Err(Error::MalformedSubequation(
            "diag(0, 1, ..., 1) is not in F, so F does not contain the positive cone".into(),
        ));
    }
    if inside(opts.p_max)? {
        return Ok(RieszCharacteristic { value: Extended::Infinite, bracket: None });
    }
    let br = bisect(1.0, opts.p_max, opts.tol, inside)?;
    Ok(RieszCharacteristic { value: Extended::Finite(0.5 * (br[0] + br[1])), bracket: Some(br) })
}

/// q_F: the threshold in q ≥ 1 above which diag(−1, …, −1, q−1) ∈ F.
/// Equal to 1 when the probe already lies in F at q = 1, and infinite when
/// it never does. For dual pairs q_F = p_{F̃}.
pub fn riesz_characteristic_decreasing(f: &Subequation, opts: RieszOptions) -> Result<RieszCharacteristic> {
    let n = f.dim();
    let inside = |q: f64| f.member(&riesz_probe_decreasing(n, q), 0.0);
    if inside(1.0)? {
        return Ok(RieszCharacteristic { value: Extended::Finite(1.0), bracket: Some([1.0, 1.0]) });
    }
    if !inside(opts.p_max)? {
        return Ok(RieszCharacteristic { value: Extended::Infinite, bracket: None });
    }
    // Here membership fails at the low end, so bisect on the complement.
    let br = bisect(1.0, opts.p_max, opts.tol, |q| inside(q).map(|b| !b))?;
    Ok(RieszCharacteristic { value: Extended::Finite(0.5 * (br[0] + br[1])), bracket: Some(br) })
}

/// Characteristic of the expansion F(δ) predicted from p = p_F:
/// n(1+δ)p/(n+δp), and n(1+δ)/δ when p = ∞.
pub fn predicted_expansion_characteristic(p: Extended, delta: f64, n: usize) -> Extended {
    let nf = n as f64;
    match p {
        Extended::Finite(p) => Extended::Finite(nf * (1.0 + delta) * p / (nf + delta * p)),
        Extended::Infinite if delta > 0.0 => Extended::Finite(nf * (1.0 + delta) / delta),
        Extended::Infinite => Extended::Infinite,
    }
}

/// The δ for which 𝒫(δ) has characteristic p: δ = (p−1)n/(n−p), 1 ≤ p < n.
pub fn expansion_delta_for(p: f64, n: usize) -> Result<f64> {
    let nf = n as f64;
    if !(p >= 1.0 && p < nf) {
        return Err(Error::OutOfRange(format!("need 1 <= p < n = {n}, got {p}")));
    }
    Ok((p - 1.0) * nf / (nf - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RieszOptions {
        RieszOptions { tol: 1e-9, p_max: 1e6 }
    }

    fn value(r: RieszCharacteristic) -> f64 {
        r.value.finite().expect("finite characteristic")
    }

    #[test]
    fn closed_form_characteristics() {
        for n in 3..=5 {
            assert!((value(riesz_characteristic_increasing(&Subequation::laplacian(n), opts()).unwrap()) - n as f64).abs() < 1e-6);
            assert!((value(riesz_characteristic_increasing(&Subequation::orphant(n), opts()).unwrap()) - 1.0).abs() < 1e-6);
            for p in [1.5, 2.0, 3.0] {
                let mm = Subequation::minmax(n, p).unwrap();
                assert!((value(riesz_characteristic_increasing(&mm, opts()).unwrap()) - p).abs() < 1e-6);
                let pc = Subequation::pconvex(n, p).unwrap();
                assert!((value(riesz_characteristic_increasing(&pc, opts()).unwrap()) - p).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn dual_of_orphant_has_infinite_characteristic() {
        let f = dual(&Subequation::orphant(3));
        assert!(riesz_characteristic_increasing(&f, opts()).unwrap().value.is_infinite());
        // The decreasing characteristic of 𝒫 is the increasing one of 𝒫̃.
        assert!(riesz_characteristic_decreasing(&Subequation::orphant(3), opts()).unwrap().value.is_infinite());
    }

    #[test]
    fn decreasing_characteristics() {
        let q = riesz_characteristic_decreasing(&Subequation::laplacian(4), opts()).unwrap();
        assert!((value(q) - 4.0).abs() < 1e-6);
        let q = riesz_characteristic_decreasing(&dual(&Subequation::orphant(4)), opts()).unwrap();
        assert_eq!(value(q), 1.0);
        let q = riesz_characteristic_decreasing(&Subequation::minmax(4, 3.0).unwrap(), opts()).unwrap();
        assert!((value(q) - 1.5).abs() < 1e-6);
    }

    #[test]
    fn pconvex_range_is_checked() {
        assert!(Subequation::pconvex(3, 3.5).is_err());
        assert!(Subequation::pconvex(3, 0.5).is_err());
    }

    #[test]
    fn lagrangian_examples() {
        let s = ComplexStructure::standard(2);
        let lag = Subequation::lagrangian(s.clone());
        assert!(lag.margin(&SymMatrix::identity(4)).unwrap() > 0.0);
        let a = SymMatrix::diag(&[1.0, -1.0, 1.0, -1.0]);
        assert!(lag.margin(&a).unwrap() < 0.0);
        let iso1 = Subequation::isotropic(s, 1).unwrap();
        let m = iso1.margin(&SymMatrix::identity(4)).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expansion_delta_reproduces_p() {
        let n = 5;
        for p in [1.5, 2.0, 3.0] {
            let d = expansion_delta_for(p, n).unwrap();
            let f = expand(&Subequation::orphant(n), d).unwrap();
            let got = value(riesz_characteristic_increasing(&f, opts()).unwrap());
            assert!((got - p).abs() < 2e-6, "p={p} got {got}");
        }
    }
}
