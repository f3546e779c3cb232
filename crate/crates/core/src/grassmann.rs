//! Structured families of real p-planes, their orbit invariants and a
//! sampled checker for the transitivity property (chains of planes with
//! consecutive nontrivial intersections joining two given vectors).

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    gaussian_vector, intersection_dim, project_off, ComplexStructure, Frame, QuaternionStructure, SymMatrix,
    UnitVector,
};
use crate::seed::{self, Rng};

/// Structural predicates are enforced to this tolerance.
pub const PREDICATE_TOL: f64 = 1e-8;
const MAX_RETRIES: usize = 100;
const SAMPLE_BATCH: usize = 64;

#[derive(Clone, Debug)]
pub enum FamilyKind {
    /// All p-planes.
    FullReal { p: usize },
    /// Complex k-dimensional subspaces (real dimension 2k).
    ComplexPlanes { k: usize, structure: ComplexStructure },
    /// Quaternionic k-dimensional subspaces (real dimension 4k).
    QuaternionicPlanes { k: usize, structure: QuaternionStructure },
    /// Lagrangian m-planes in ℂᵐ.
    Lagrangian { structure: ComplexStructure },
    /// Isotropic real p-planes (ω|_W = 0).
    Isotropic { p: usize, structure: ComplexStructure },
    /// The U(m)-orbit of 2-planes with Kähler angle invariant cos θ.
    KahlerOrbit { cos_theta: f64, structure: ComplexStructure },
    /// The Sp(m)·Sp(1)-orbit of 2-planes with quaternionic invariant s.
    QuatOrbit { invariant: f64, structure: QuaternionStructure },
    /// A finite list of planes.
    Explicit(Arc<Vec<Frame>>),
}

#[derive(Clone, Debug)]
pub struct PlaneFamily {
    n: usize,
    kind: FamilyKind,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::OutOfRange(msg.into())
}

impl PlaneFamily {
    pub fn full_real(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(bad(format!("need 1 <= p <= n, got p = {p}, n = {n}")));
        }
        Ok(PlaneFamily { n, kind: FamilyKind::FullReal { p } })
    }

    pub fn complex_planes(k: usize, structure: ComplexStructure) -> Result<Self> {
        if k == 0 || k > structure.complex_dim() {
            return Err(bad(format!("need 1 <= k <= {}, got {k}", structure.complex_dim())));
        }
        Ok(PlaneFamily { n: structure.dim(), kind: FamilyKind::ComplexPlanes { k, structure } })
    }

    pub fn quaternionic_planes(k: usize, structure: QuaternionStructure) -> Result<Self> {
        if k == 0 || k > structure.quaternionic_dim() {
            return Err(bad(format!("need 1 <= k <= {}, got {k}", structure.quaternionic_dim())));
        }
        Ok(PlaneFamily { n: structure.dim(), kind: FamilyKind::QuaternionicPlanes { k, structure } })
    }

    pub fn lagrangian(structure: ComplexStructure) -> Self {
        PlaneFamily { n: structure.dim(), kind: FamilyKind::Lagrangian { structure } }
    }

    pub fn isotropic(p: usize, structure: ComplexStructure) -> Result<Self> {
        if p == 0 || p > structure.complex_dim() {
            return Err(bad(format!("need 1 <= p <= {}, got {p}", structure.complex_dim())));
        }
        Ok(PlaneFamily { n: structure.dim(), kind: FamilyKind::Isotropic { p, structure } })
    }

    pub fn kahler_orbit(cos_theta: f64, structure: ComplexStructure) -> Result<Self> {
        if !(0.0..=1.0).contains(&cos_theta) {
            return Err(bad(format!("cos theta must lie in [0, 1], got {cos_theta}")));
        }
        if structure.complex_dim() < 2 && cos_theta < 1.0 {
            return Err(bad("Kahler orbits with cos theta < 1 need complex dimension >= 2"));
        }
        Ok(PlaneFamily { n: structure.dim(), kind: FamilyKind::KahlerOrbit { cos_theta, structure } })
    }

    pub fn quat_orbit(invariant: f64, structure: QuaternionStructure) -> Result<Self> {
        if !(0.0..=1.0).contains(&invariant) {
            return Err(bad(format!("invariant must lie in [0, 1], got {invariant}")));
        }
        if structure.quaternionic_dim() < 2 && invariant > 0.0 {
            return Err(bad("quaternionic orbits with invariant > 0 need quaternionic dimension >= 2"));
        }
        Ok(PlaneFamily { n: structure.dim(), kind: FamilyKind::QuatOrbit { invariant, structure } })
    }

    pub fn explicit(frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or_else(|| Error::EmptyFamily("no frames given".into()))?;
        let (n, p) = (first.ambient_dim(), first.plane_dim());
        if frames.iter().any(|f| f.ambient_dim() != n || f.plane_dim() != p) {
            return Err(bad("explicit frames must share ambient and plane dimension"));
        }
        Ok(PlaneFamily { n, kind: FamilyKind::Explicit(Arc::new(frames)) })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn plane_dim(&self) -> usize {
        match &self.kind {
            FamilyKind::FullReal { p } | FamilyKind::Isotropic { p, .. } => *p,
            FamilyKind::ComplexPlanes { k, .. } => 2 * k,
            FamilyKind::QuaternionicPlanes { k, .. } => 4 * k,
            FamilyKind::Lagrangian { structure } => structure.complex_dim(),
            FamilyKind::KahlerOrbit { .. } | FamilyKind::QuatOrbit { .. } => 2,
            FamilyKind::Explicit(f) => f[0].plane_dim(),
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FamilyKind::FullReal { p } => format!("full_real(p={p})"),
            FamilyKind::ComplexPlanes { k, .. } => format!("complex_planes(k={k})"),
            FamilyKind::QuaternionicPlanes { k, .. } => format!("quaternionic_planes(k={k})"),
            FamilyKind::Lagrangian { .. } => "lagrangian".into(),
            FamilyKind::Isotropic { p, .. } => format!("isotropic(p={p})"),
            FamilyKind::KahlerOrbit { cos_theta, .. } => format!("kahler_orbit(costheta={cos_theta})"),
            FamilyKind::QuatOrbit { invariant, .. } => format!("quat_orbit(invariant={invariant})"),
            FamilyKind::Explicit(f) => format!("explicit({})", f.len()),
        }
    }

    /// Families in which every plane through a vector is the same plane, so
    /// distinct planes meet only at 0 and no chain can ever exist.
    pub fn structurally_disconnected(&self) -> bool {
        match &self.kind {
            FamilyKind::FullReal { p } | FamilyKind::Isotropic { p, .. } => *p == 1,
            FamilyKind::ComplexPlanes { k, structure } => *k == 1 && structure.complex_dim() > 1,
            FamilyKind::QuaternionicPlanes { k, structure } => *k == 1 && structure.quaternionic_dim() > 1,
            FamilyKind::Lagrangian { structure } => structure.complex_dim() == 1,
            FamilyKind::KahlerOrbit { cos_theta, .. } => *cos_theta >= 1.0,
            FamilyKind::QuatOrbit { invariant, .. } => *invariant <= 0.0,
            FamilyKind::Explicit(_) => false,
        }
    }

    /// Largest deviation of a frame from the family predicate.
    pub fn predicate_violation(&self, w: &Frame) -> f64 {
        if w.ambient_dim() != self.n || w.plane_dim() != self.plane_dim() {
            return f64::INFINITY;
        }
        let g = w.gram_residual();
        let v = match &self.kind {
            FamilyKind::FullReal { .. } => 0.0,
            FamilyKind::ComplexPlanes { structure, .. } => invariance_defect(w, &[structure.matrix()]),
            FamilyKind::QuaternionicPlanes { structure, .. } => invariance_defect(w, &structure.units()),
            FamilyKind::Lagrangian { structure } | FamilyKind::Isotropic { structure, .. } => {
                isotropy_check(w, structure).1
            }
            FamilyKind::KahlerOrbit { cos_theta, structure } => {
                (kahler_angle_invariant(w, structure).unwrap_or(f64::INFINITY) - cos_theta).abs()
            }
            FamilyKind::QuatOrbit { invariant, structure } => {
                (quaternionic_invariant(w, structure).unwrap_or(f64::INFINITY) - invariant).abs()
            }
            FamilyKind::Explicit(frames) => {
                let pw = SymMatrix::projector(w);
                frames
                    .iter()
                    .map(|f| pw.sub(&SymMatrix::projector(f)).as_matrix().amax())
                    .fold(f64::INFINITY, f64::min)
            }
        };
        g.max(v)
    }

    /// A random plane of the family.
    pub fn sample(&self, rng: &mut Rng) -> Result<Frame> {
        match &self.kind {
            FamilyKind::Explicit(frames) => Ok(frames[rng.gen_range(0..frames.len())].clone()),
            _ => {
                let x = UnitVector::random(self.n, rng);
                self.plane_through(&x, rng)
            }
        }
    }

    /// `count` planes drawn in fixed-size batches, each batch from its own
    /// derived seed, so the list does not depend on how batches are scheduled.
    pub fn sample_many(&self, count: usize, seed: u64) -> Result<Vec<Frame>> {
        let batches = count.div_ceil(SAMPLE_BATCH);
        let run = |b: usize| -> Result<Vec<Frame>> {
            let mut rng = seed::rng(seed, "plane-batch", b as u64);
            let len = SAMPLE_BATCH.min(count - b * SAMPLE_BATCH);
            (0..len).map(|_| self.sample(&mut rng)).collect()
        };
        #[cfg(feature = "parallel")]
        let parts: Vec<Result<Vec<Frame>>> = {
            use rayon::prelude::*;
            (0..batches).into_par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Result<Vec<Frame>>> = (0..batches).map(run).collect();
        let mut out = Vec::with_capacity(count);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    /// A random plane of the family containing x.
    pub fn plane_through(&self, x: &UnitVector, rng: &mut Rng) -> Result<Frame> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.dim() });
        }
        let xv = x.as_vector();
        if let FamilyKind::Explicit(frames) = &self.kind {
            return frames
                .iter()
                .find(|f| f.distance(xv) <= PREDICATE_TOL)
                .cloned()
                .ok_or_else(|| Error::EmptyFamily("no explicit frame contains the vector".into()));
        }
        for _ in 0..MAX_RETRIES {
            let candidate = match &self.kind {
                FamilyKind::KahlerOrbit { cos_theta, structure } => {
                    kahler_partner(xv, *cos_theta, structure, rng).and_then(|v| Frame::orthonormalize(&[xv.clone(), v]).ok())
                }
                FamilyKind::QuatOrbit { invariant, structure } => {
                    quat_partner(xv, *invariant, structure, rng).and_then(|v| Frame::orthonormalize(&[xv.clone(), v]).ok())
                }
                _ => self.complete(&[xv.clone()], rng),
            };
            if let Some(w) = candidate {
                if w.distance(xv) <= PREDICATE_TOL && self.predicate_violation(&w) <= PREDICATE_TOL {
                    return Ok(w);
                }
            }
        }
        Err(Error::EmptyFamily(format!("could not build a {} plane through the vector", self.name())))
    }

    /// Completes the given vectors to a family plane by structured
    /// Gram–Schmidt. Returns None if the vectors do not fit.
    fn complete(&self, init: &[DVector<f64>], rng: &mut Rng) -> Option<Frame> {
        let n = self.n;
        let target = self.plane_dim();
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(target);
        // Vectors whose span must stay orthogonal to new columns.
        let mut guard: Vec<DVector<f64>> = Vec::new();
        let mut candidates = init.to_vec().into_iter();
        let mut tries = 0;
        while cols.len() < target {
            let v = match candidates.next() {
                Some(v) => v,
                None => {
                    tries += 1;
                    if tries > MAX_RETRIES {
                        return None;
                    }
                    gaussian_vector(n, rng)
                }
            };
            let w = project_off(&v, &guard);
            if w.norm() < 1e-8 * v.norm().max(1e-300) {
                continue;
            }
            let w = w.normalize();
            let added: Vec<DVector<f64>> = match &self.kind {
                FamilyKind::FullReal { .. } | FamilyKind::Explicit(_) => vec![w],
                FamilyKind::ComplexPlanes { structure, .. } => vec![w.clone(), structure.apply(&w)],
                FamilyKind::QuaternionicPlanes { structure, .. } => structure.line_basis(&w).to_vec(),
                FamilyKind::Lagrangian { structure } | FamilyKind::Isotropic { structure, .. } => {
                    guard.push(structure.apply(&w));
                    vec![w]
                }
                FamilyKind::KahlerOrbit { .. } | FamilyKind::QuatOrbit { .. } => vec![w],
            };
            if cols.len() + added.len() > target {
                return None;
            }
            guard.extend(added.iter().cloned());
            cols.extend(added);
        }
        Frame::from_columns(&cols).ok()
    }

    /// A family plane containing both a and b, when one exists up to the
    /// predicate tolerance.
    pub fn plane_through_pair(&self, a: &DVector<f64>, b: &DVector<f64>, rng: &mut Rng) -> Option<Frame> {
        let w = match &self.kind {
            FamilyKind::KahlerOrbit { .. } | FamilyKind::QuatOrbit { .. } => {
                Frame::orthonormalize(&[a.clone(), b.clone()]).ok()?
            }
            FamilyKind::Explicit(frames) => frames
                .iter()
                .find(|f| f.distance(a) <= PREDICATE_TOL && f.distance(b) <= PREDICATE_TOL)?
                .clone(),
            _ => self.complete(&[a.clone(), b.clone()], rng)?,
        };
        let ok = w.distance(a) <= PREDICATE_TOL * a.norm().max(1.0)
            && w.distance(b) <= PREDICATE_TOL * b.norm().max(1.0)
            && self.predicate_violation(&w) <= PREDICATE_TOL;
        ok.then_some(w)
    }

    /// Pairs of unit vectors (a, b) lie in a common family plane exactly on
    /// the zero set of this function (for the constrained families).
    /// Returns None where the question is vacuous or always answered yes.
    fn pair_defect(&self, a: &DVector<f64>, b: &DVector<f64>) -> Option<f64> {
        let bp = b - a * a.dot(b);
        let nb = bp.norm();
        if nb < 1e-12 {
            return None;
        }
        let bh = bp / nb;
        match &self.kind {
            FamilyKind::Lagrangian { structure } | FamilyKind::Isotropic { structure, .. } => {
                Some(structure.apply(a).dot(&bh))
            }
            FamilyKind::KahlerOrbit { cos_theta, structure } => Some(structure.apply(a).dot(&bh).abs() - cos_theta),
            FamilyKind::QuatOrbit { invariant, structure } => {
                let s: f64 = structure.units().iter().map(|u| (*u * a).dot(&bh).powi(2)).sum();
                Some(1.0 - s - invariant)
            }
            _ => None,
        }
    }

    /// Whether any two vectors always lie in a common family plane.
    fn pairs_always_joinable(&self) -> bool {
        match &self.kind {
            FamilyKind::FullReal { p } => *p >= 2,
            FamilyKind::ComplexPlanes { k, .. } => *k >= 2,
            FamilyKind::QuaternionicPlanes { k, .. } => *k >= 2,
            _ => false,
        }
    }
}

/// max ‖(I − P_W) U w‖ over columns w and structure units U.
fn invariance_defect(w: &Frame, units: &[&nalgebra::DMatrix<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for u in units {
        for c in w.columns() {
            worst = worst.max(w.distance(&(*u * &c)));
        }
    }
    worst
}

fn kahler_partner(x: &DVector<f64>, c: f64, s: &ComplexStructure, rng: &mut Rng) -> Option<DVector<f64>> {
    let jx = s.apply(x);
    let w = project_off(&gaussian_vector(x.len(), rng), &[x.clone(), jx.clone()]);
    if w.norm() < 1e-8 {
        return None;
    }
    let w = w.normalize();
    Some(jx * c + w * (1.0 - c * c).max(0.0).sqrt())
}

fn quat_partner(x: &DVector<f64>, inv: f64, s: &QuaternionStructure, rng: &mut Rng) -> Option<DVector<f64>> {
    let line = s.line_basis(x);
    let coef = gaussian_vector(3, rng);
    let imag = (&line[1] * coef[0] + &line[2] * coef[1] + &line[3] * coef[2]).normalize();
    let w = project_off(&gaussian_vector(x.len(), rng), &line);
    if w.norm() < 1e-8 {
        return None;
    }
    let w = w.normalize();
    Some(imag * (1.0 - inv).max(0.0).sqrt() + w * inv.sqrt())
}

/// |⟨J w₁, w₂⟩| for a 2-plane; independent of the orthonormal basis.
pub fn kahler_angle_invariant(w: &Frame, s: &ComplexStructure) -> Result<f64> {
    if w.plane_dim() != 2 {
        return Err(bad(format!("Kahler angle needs a 2-plane, got dimension {}", w.plane_dim())));
    }
    Ok(s.apply(&w.column(0)).dot(&w.column(1)).abs())
}

/// 1 − ⟨v,x⟩² − Σ_{e∈{I,J,K}} ⟨v, e x⟩² for an orthonormal basis {x, v}:
/// the squared length of the part of v orthogonal to the quaternion line ℍx.
pub fn quaternionic_invariant(w: &Frame, s: &QuaternionStructure) -> Result<f64> {
    if w.plane_dim() != 2 {
        return Err(bad(format!("quaternionic invariant needs a 2-plane, got dimension {}", w.plane_dim())));
    }
    let (x, v) = (w.column(0), w.column(1));
    let mut r = 1.0 - v.dot(&x).powi(2);
    for u in s.units() {
        r -= v.dot(&(u * &x)).powi(2);
    }
    Ok(r)
}

/// (isotropic?, max |⟨wᵢ, J wⱼ⟩|).
pub fn isotropy_check(w: &Frame, s: &ComplexStructure) -> (bool, f64) {
    let cols = w.columns();
    let mut worst = 0.0f64;
    for a in &cols {
        let ja = s.apply(a);
        for b in &cols {
            worst = worst.max(ja.dot(b).abs());
        }
    }
    (worst <= PREDICATE_TOL, worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ChainFound,
    NoChainAtBudget,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainLink {
    pub frame: Frame,
    /// dim(Wᵢ ∩ Wᵢ₊₁); absent for the last plane.
    pub intersection_with_next: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityReport {
    pub family: String,
    pub verdict: Verdict,
    pub chain: Vec<ChainLink>,
    pub samples_used: usize,
    pub budget: usize,
    pub seed: u64,
    /// True when every plane of an explicit family was checked, which makes a
    /// negative verdict a proof.
    pub exhaustive: bool,
    /// Distinct family planes meet only at 0 for this family.
    pub structurally_forced: bool,
    /// counts[d] = number of (x-side, y-side) plane pairs meeting in dimension d.
    pub intersection_histogram: Vec<usize>,
}

struct Graph {
    frames: Vec<Frame>,
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
}

impl Graph {
    fn new() -> Self {
        Graph { frames: Vec::new(), adj: Vec::new(), parent: Vec::new() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }

    /// Adds a plane unless it coincides with an existing one; returns its index.
    fn add(&mut self, w: Frame) -> usize {
        let p = w.plane_dim();
        let mut neighbours = Vec::new();
        for (i, f) in self.frames.iter().enumerate() {
            let d = intersection_dim(f, &w);
            if d == p && f.plane_dim() == p {
                return i;
            }
            if d >= 1 {
                neighbours.push(i);
            }
        }
        let id = self.frames.len();
        self.frames.push(w);
        self.adj.push(neighbours.clone());
        self.parent.push(id);
        for &j in &neighbours {
            self.adj[j].push(id);
            self.union(j, id);
        }
        id
    }

    fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    fn shortest_path(&self, from: &[usize], to: &[usize]) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.frames.len()];
        let mut seen = vec![false; self.frames.len()];
        let mut queue = VecDeque::new();
        for &s in from {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(i) = queue.pop_front() {
            if to.contains(&i) {
                let mut path = vec![i];
                let mut cur = i;
                while prev[cur] != usize::MAX {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &j in &self.adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    prev[j] = i;
                    queue.push_back(j);
                }
            }
        }
        None
    }
}

fn build_chain(frames: &[Frame], x: &DVector<f64>, y: &DVector<f64>) -> Result<Vec<ChainLink>> {
    let first = frames.first().ok_or_else(|| Error::ChainValidation("empty chain".into()))?;
    let last = frames.last().unwrap();
    if first.distance(x) > PREDICATE_TOL || last.distance(y) > PREDICATE_TOL {
        return Err(Error::ChainValidation("chain does not start at x or end at y".into()));
    }
    let mut links = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        let next = frames.get(i + 1).map(|g| intersection_dim(f, g));
        if next == Some(0) {
            return Err(Error::ChainValidation(format!("planes {i} and {} do not meet", i + 1)));
        }
        links.push(ChainLink { frame: f.clone(), intersection_with_next: next });
    }
    Ok(links)
}

fn histogram(frames: &[Frame], xs: &[usize], ys: &[usize], p: usize) -> Vec<usize> {
    let mut h = vec![0usize; p + 1];
    for &i in xs {
        for &j in ys {
            if i != j {
                h[intersection_dim(&frames[i], &frames[j]).min(p)] += 1;
            }
        }
    }
    h
}

/// Unit vector on a random great circle of the plane, parameterized by β.
struct Circle {
    e: DVector<f64>,
    f: DVector<f64>,
}

impl Circle {
    fn random(w: &Frame, rng: &mut Rng) -> Option<Circle> {
        if w.plane_dim() < 2 {
            return None;
        }
        let e = w.random_unit(rng).as_vector().clone();
        let f = project_off(w.random_unit(rng).as_vector(), &[e.clone()]);
        if f.norm() < 1e-6 {
            return None;
        }
        Some(Circle { e, f: f.normalize() })
    }

    fn at(&self, beta: f64) -> DVector<f64> {
        &self.e * beta.cos() + &self.f * beta.sin()
    }
}

const SCAN_POINTS: usize = 64;

/// Looks for a ∈ Wa and b ∈ Wb lying in a common family plane by scanning
/// the pair defect along a great circle of Wb and bisecting a sign change.
fn try_bridge(family: &PlaneFamily, wa: &Frame, wb: &Frame, rng: &mut Rng) -> Option<Frame> {
    if family.pairs_always_joinable() {
        let a = wa.random_unit(rng);
        let b = wb.random_unit(rng);
        return family.plane_through_pair(a.as_vector(), b.as_vector(), rng);
    }
    for _ in 0..4 {
        let a = wa.random_unit(rng).as_vector().clone();
        let circle = Circle::random(wb, rng)?;
        let f = |beta: f64| family.pair_defect(&a, &circle.at(beta));
        let step = std::f64::consts::PI / SCAN_POINTS as f64;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SCAN_POINTS {
            let beta = i as f64 * step;
            let Some(v) = f(beta) else {
                prev = None;
                continue;
            };
            if let Some((b0, v0)) = prev {
                if v0 == 0.0 || v0.signum() != v.signum() {
                    let (mut lo, mut hi, mut flo) = (b0, beta, v0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let Some(fm) = f(mid) else { break };
                        if fm == 0.0 {
                            lo = mid;
                            hi = mid;
                            break;
                        }
                        if fm.signum() == flo.signum() {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    let b = circle.at(0.5 * (lo + hi));
                    if let Some(w) = family.plane_through_pair(&a, &b, rng) {
                        return Some(w);
                    }
                }
            }
            prev = Some((beta, v));
        }
    }
    None
}

/// Searches for a chain of family planes from x to y.
///
/// Planes through x and y are grown into a graph whose edges join planes
/// meeting nontrivially. Each of the `budget` steps either grows the graph
/// (a family plane through a random vector of an existing plane) or tries
/// to bridge the x-side and y-side components with a plane through one
/// vector of each. A negative verdict is evidence, not proof, unless the
/// family is explicit (then every plane is checked).
pub fn transitivity_check(
    family: &PlaneFamily,
    x: &UnitVector,
    y: &UnitVector,
    budget: usize,
    seed: u64,
) -> Result<TransitivityReport> {
    if budget < 2 {
        return Err(bad("transitivity budget must be at least 2"));
    }
    let (xv, yv) = (x.as_vector(), y.as_vector());
    let p = family.plane_dim();
    let mut report = TransitivityReport {
        family: family.name(),
        verdict: Verdict::NoChainAtBudget,
        chain: Vec::new(),
        samples_used: 0,
        budget,
        seed,
        exhaustive: false,
        structurally_forced: family.structurally_disconnected(),
        intersection_histogram: vec![0; p + 1],
    };

    if let FamilyKind::Explicit(frames) = &family.kind {
        let mut g = Graph::new();
        for f in frames.iter() {
            g.add(f.clone());
        }
        let xs: Vec<usize> = (0..g.frames.len()).filter(|&i| g.frames[i].distance(xv) <= PREDICATE_TOL).collect();
        let ys: Vec<usize> = (0..g.frames.len()).filter(|&i| g.frames[i].distance(yv) <= PREDICATE_TOL).collect();
        if xs.is_empty() || ys.is_empty() {
            return Err(Error::EmptyFamily("no explicit frame contains x or y".into()));
        }
        report.exhaustive = true;
        report.samples_used = frames.len();
        report.intersection_histogram = histogram(&g.frames, &xs, &ys, p);
        if let Some(path) = g.shortest_path(&xs, &ys) {
            let chain: Vec<Frame> = path.iter().map(|&i| g.frames[i].clone()).collect();
            report.chain = build_chain(&chain, xv, yv)?;
            report.verdict = Verdict::ChainFound;
        }
        return Ok(report);
    }

    let mut rng = seed::rng(seed, "transitivity", 0);
    let wx = family.plane_through(x, &mut rng)?;
    if wx.distance(yv) <= PREDICATE_TOL {
        report.chain = build_chain(&[wx], xv, yv)?;
        report.verdict = Verdict::ChainFound;
        return Ok(report);
    }
    let wy = family.plane_through(y, &mut rng)?;
    let mut g = Graph::new();
    let ix = g.add(wx);
    let iy = g.add(wy);
    let mut used = 0;
    while !g.connected(ix, iy) && used < budget {
        used += 1;
        let side_x: Vec<usize> = (0..g.frames.len()).filter(|&i| g.find(i) == g.find(ix)).collect();
        let side_y: Vec<usize> = (0..g.frames.len()).filter(|&i| g.find(i) == g.find(iy)).collect();
        if used % 2 == 1 {
            let a = side_x[rng.gen_range(0..side_x.len())];
            let b = side_y[rng.gen_range(0..side_y.len())];
            let (fa, fb) = (g.frames[a].clone(), g.frames[b].clone());
            if let Some(w) = try_bridge(family, &fa, &fb, &mut rng) {
                g.add(w);
            }
        } else {
            let pool = if used % 4 == 0 { &side_x } else { &side_y };
            let parent = pool[rng.gen_range(0..pool.len())];
            let v = g.frames[parent].random_unit(&mut rng);
            if let Ok(w) = family.plane_through(&v, &mut rng) {
                g.add(w);
            }
        }
    }
    report.samples_used = used;
    let xs: Vec<usize> = (0..g.frames.len()).filter(|&i| g.frames[i].distance(xv) <= PREDICATE_TOL).collect();
    let ys: Vec<usize> = (0..g.frames.len()).filter(|&i| g.frames[i].distance(yv) <= PREDICATE_TOL).collect();
    if g.connected(ix, iy) {
        let path = g.shortest_path(&xs, &ys).ok_or_else(|| Error::ChainValidation("graph search lost the path".into()))?;
        let chain: Vec<Frame> = path.iter().map(|&i| g.frames[i].clone()).collect();
        report.chain = build_chain(&chain, xv, yv)?;
        report.verdict = Verdict::ChainFound;
    }
    let side_x: Vec<usize> = (0..g.frames.len()).filter(|&i| g.find(i) == g.find(ix)).collect();
    let side_y: Vec<usize> = (0..g.frames.len()).filter(|&i| g.find(i) == g.find(iy)).collect();
    report.intersection_histogram = histogram(&g.frames, &side_x, &side_y, p);
    Ok(report)
}

/// Summary of invariant values over many sampled planes, keyed by a label.
pub fn invariant_statistics(family: &PlaneFamily, count: usize, seed: u64) -> Result<BTreeMap<String, f64>> {
    let planes = family.sample_many(count, seed)?;
    let mut worst = 0.0f64;
    for w in &planes {
        worst = worst.max(family.predicate_violation(w));
    }
    let mut out = BTreeMap::new();
    out.insert("count".to_string(), planes.len() as f64);
    out.insert("max_predicate_violation".to_string(), worst);
    // The orbit invariants are defined on 2-planes only.
    let invariant: Option<(&str, Box<dyn Fn(&Frame) -> Result<f64>>)> = match (&family.kind, family.plane_dim()) {
        (FamilyKind::QuaternionicPlanes { structure, .. } | FamilyKind::QuatOrbit { structure, .. }, 2) => {
            let s = structure.clone();
            Some(("quaternionic_invariant", Box::new(move |w| quaternionic_invariant(w, &s))))
        }
        (
            FamilyKind::ComplexPlanes { structure, .. }
            | FamilyKind::Lagrangian { structure }
            | FamilyKind::Isotropic { structure, .. }
            | FamilyKind::KahlerOrbit { structure, .. },
            2,
        ) => {
            let s = structure.clone();
            Some(("kahler_cos_theta", Box::new(move |w| kahler_angle_invariant(w, &s))))
        }
        (FamilyKind::Lagrangian { structure } | FamilyKind::Isotropic { structure, .. }, _) => {
            let s = structure.clone();
            Some(("isotropy_residual", Box::new(move |w| Ok(isotropy_check(w, &s).1))))
        }
        _ => None,
    };
    if let Some((name, f)) = invariant {
        let values: Vec<f64> = planes.iter().map(|w| f(w)).collect::<Result<_>>()?;
        let k = values.len().max(1) as f64;
        out.insert(format!("{name}_min"), values.iter().copied().fold(f64::INFINITY, f64::min));
        out.insert(format!("{name}_max"), values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        out.insert(format!("{name}_mean"), values.iter().sum::<f64>() / k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_planes_satisfy_predicates() {
        let c2 = ComplexStructure::standard(2);
        let c3 = ComplexStructure::standard(3);
        let h2 = QuaternionStructure::standard(2);
        let fams = vec![
            PlaneFamily::full_real(3, 2).unwrap(),
            PlaneFamily::complex_planes(1, c2.clone()).unwrap(),
            PlaneFamily::quaternionic_planes(1, h2.clone()).unwrap(),
            PlaneFamily::lagrangian(c2.clone()),
            PlaneFamily::isotropic(2, c3.clone()).unwrap(),
            PlaneFamily::kahler_orbit(0.5, c3.clone()).unwrap(),
            PlaneFamily::quat_orbit(0.3, h2.clone()).unwrap(),
        ];
        for f in &fams {
            let planes = f.sample_many(50, 3).unwrap();
            for w in &planes {
                assert!(f.predicate_violation(w) <= PREDICATE_TOL, "{}", f.name());
                assert!(w.gram_residual() <= 1e-10);
            }
        }
    }

    #[test]
    fn kahler_sample_has_requested_angle() {
        let f = PlaneFamily::kahler_orbit(0.5, ComplexStructure::standard(3)).unwrap();
        let mut rng = seed::rng(5, "k", 0);
        let w = f.sample(&mut rng).unwrap();
        let c = kahler_angle_invariant(&w, &ComplexStructure::standard(3)).unwrap();
        assert!((c - 0.5).abs() < 1e-8);
    }

    #[test]
    fn invariants_of_simple_planes() {
        let s = ComplexStructure::standard(2);
        // Complex line through the first complex coordinate.
        let cl = Frame::coordinate(4, &[0, 1]).unwrap();
        assert!((kahler_angle_invariant(&cl, &s).unwrap() - 1.0).abs() < 1e-15);
        // Totally real plane spanned by the real parts of both coordinates.
        let tr = Frame::coordinate(4, &[0, 2]).unwrap();
        assert_eq!(kahler_angle_invariant(&tr, &s).unwrap(), 0.0);
        assert!(isotropy_check(&tr, &s).0);
        assert!((isotropy_check(&cl, &s).1 - 1.0).abs() < 1e-15);

        let q = QuaternionStructure::standard(2);
        let inside = Frame::coordinate(8, &[0, 1]).unwrap();
        assert!(quaternionic_invariant(&inside, &q).unwrap().abs() < 1e-15);
        let across = Frame::coordinate(8, &[0, 4]).unwrap();
        assert!((quaternionic_invariant(&across, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_family_is_exhaustive() {
        let a = Frame::coordinate(3, &[0, 1]).unwrap();
        let b = Frame::coordinate(3, &[1, 2]).unwrap();
        let f = PlaneFamily::explicit(vec![a, b]).unwrap();
        let x = UnitVector::basis(3, 0);
        let y = UnitVector::basis(3, 2);
        let r = transitivity_check(&f, &x, &y, 10, 1).unwrap();
        assert_eq!(r.verdict, Verdict::ChainFound);
        assert_eq!(r.chain.len(), 2);
        assert!(r.exhaustive);
    }
}
