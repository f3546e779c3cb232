//! Worked examples with hand-computed answers, plus cross-module checks.

use tangents_core::extended::Extended;
use tangents_core::garding::{elementary_symmetric_value, garding_eigenvalues, GardingOperator};
use tangents_core::grassmann::{transitivity_check, PlaneFamily, Verdict};
use tangents_core::linalg::{random_symmetric, ComplexStructure, SymMatrix, UnitVector};
use tangents_core::seed;
use tangents_core::subeq::{
    dual, dual_member, expand, riesz_characteristic_decreasing, riesz_characteristic_increasing, RieszOptions,
    Subequation,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn det_real_eigenvalues_of_a_diagonal() {
    let op = GardingOperator::det_real(2).unwrap();
    let s = garding_eigenvalues(&op, &SymMatrix::diag(&[3.0, -1.0])).unwrap();
    assert!(close(s.eigenvalues[0], -1.0, 1e-10) && close(s.eigenvalues[1], 3.0, 1e-10), "{:?}", s.eigenvalues);
}

#[test]
fn elementary_symmetric_examples() {
    let det = GardingOperator::det_real(3).unwrap();
    let a = SymMatrix::diag(&[1.0, 2.0, 3.0]);
    assert!(close(elementary_symmetric_value(&det, 1, &a).unwrap(), 6.0, 1e-10));
    assert!(close(elementary_symmetric_value(&det, 2, &a).unwrap(), 11.0, 1e-10));
    assert!(close(elementary_symmetric_value(&det, 3, &a).unwrap(), det.evaluate(&a).unwrap(), 1e-8));
}

#[test]
fn lagrangian_operator_values() {
    // Every one of the 2^m factors equals m at the identity.
    for m in 1..=3usize {
        let op = GardingOperator::lag(ComplexStructure::standard(m)).unwrap();
        let v = op.evaluate(&SymMatrix::identity(2 * m)).unwrap();
        let want = (m as f64).powi(1 << m);
        assert!(close(v, want, 1e-8 * want), "m = {m}: {v} vs {want}");
    }
    let op = GardingOperator::lag(ComplexStructure::standard(1)).unwrap();
    assert!(close(op.evaluate(&SymMatrix::diag(&[1.0, -1.0])).unwrap(), -1.0, 1e-10));
}

#[test]
fn lagrangian_branch_one_at_identity() {
    let s = ComplexStructure::standard(2);
    let f = Subequation::garding_branch(GardingOperator::lag(s).unwrap(), 1).unwrap();
    assert!(f.member(&SymMatrix::identity(4), 0.0).unwrap());
}

#[test]
fn det_real_branches_are_the_orphant_and_its_dual() {
    let n = 4;
    let first = Subequation::garding_branch(GardingOperator::det_real(n).unwrap(), 1).unwrap();
    let last = Subequation::garding_branch(GardingOperator::det_real(n).unwrap(), n).unwrap();
    let p = Subequation::orphant(n);
    let mut rng = seed::rng(3, "branches", 0);
    for _ in 0..200 {
        let a = random_symmetric(n, &mut rng).shift(1.0);
        assert_eq!(first.member(&a, 0.0).unwrap(), p.member(&a, 0.0).unwrap());
        assert_eq!(last.member(&a, 0.0).unwrap(), dual_member(&p, &a, 0.0).unwrap());
        // Branches nest because the spectrum comes back sorted.
        let spec = GardingOperator::det_real(n).unwrap().spectrum(&a).unwrap();
        for k in 0..n - 1 {
            assert!(spec[k] <= spec[k + 1]);
        }
    }
}

#[test]
fn branch_one_of_pconvexity_has_characteristic_p() {
    for (n, p) in [(3, 1.5), (4, 2.0), (4, 2.5)] {
        let op = GardingOperator::pconvexity(GardingOperator::det_real(n).unwrap(), p).unwrap();
        let f = Subequation::garding_branch(op, 1).unwrap();
        let c = riesz_characteristic_increasing(&f, RieszOptions::default()).unwrap();
        assert!(close(c.value.finite().unwrap(), p, 1e-6), "n = {n}, p = {p}: {:?}", c.value);
    }
}

#[test]
fn characteristics_of_basic_cones() {
    let opts = RieszOptions::default();
    let n = 5;
    let lap = riesz_characteristic_increasing(&Subequation::laplacian(n), opts).unwrap();
    assert!(close(lap.value.finite().unwrap(), 5.0, 1e-6));
    // The dual of 𝒫 contains every probe diag(−(p−1), 1, ..., 1).
    let pt = riesz_characteristic_increasing(&dual(&Subequation::orphant(n)), opts).unwrap();
    assert_eq!(pt.value, Extended::Infinite);
    let q = riesz_characteristic_decreasing(&Subequation::minmax(n, 3.0).unwrap(), opts).unwrap();
    assert!(close(q.value.finite().unwrap(), 1.5, 1e-6));
    let e = expand(&Subequation::orphant(n), 1.0).unwrap();
    let pe = riesz_characteristic_increasing(&e, opts).unwrap();
    assert!(close(pe.value.finite().unwrap(), 10.0 / 6.0, 1e-6));
}

#[test]
fn pconvex_rejects_p_above_n() {
    assert!(Subequation::pconvex(3, 5.0).is_err());
}

#[test]
fn real_planes_in_r3_chain_in_two_steps() {
    let fam = PlaneFamily::full_real(3, 2).unwrap();
    let mut rng = seed::rng(1, "examples", 0);
    for i in 0..10 {
        let x = UnitVector::random(3, &mut rng);
        let y = UnitVector::random(3, &mut rng);
        let r = transitivity_check(&fam, &x, &y, 200, i).unwrap();
        assert_eq!(r.verdict, Verdict::ChainFound);
        assert!(r.chain.len() <= 2);
    }
}

#[test]
fn too_high_degree_is_refused() {
    let op = GardingOperator::pconvexity(GardingOperator::det_real(6).unwrap(), 2.5).unwrap();
    assert!(op.degree() > 24);
    assert!(garding_eigenvalues(&op, &SymMatrix::identity(6)).is_err());
    // The closed-form route still works.
    assert_eq!(op.spectrum(&SymMatrix::identity(6)).unwrap().len(), op.degree());
}
