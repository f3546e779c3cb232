//! Property tests. Each case draws a u64 seed and builds its random objects
//! from the crate's own seeded generator, so failures shrink to a seed.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng as _;
use tangents_core::flow::{catalog_field, flow_rescale, kernel, SupSettings};
use tangents_core::garding::{elementary_symmetric_value, GardingOperator};
use tangents_core::grassmann::{kahler_angle_invariant, PlaneFamily};
use tangents_core::linalg::{
    hermitian_part_complex, hermitian_part_quaternionic, intersection_dim, random_orthogonal, random_psd,
    random_symmetric, random_unitary, trace_on_plane, ComplexStructure, Frame, QuaternionStructure, SymMatrix,
};
use tangents_core::seed::{self, Rng};
use tangents_core::sphjet::{assemble_phi, sphere_subeq_member, SphericalJet};
use tangents_core::subeq::{
    dual, expand, expansion_delta_for, riesz_characteristic_increasing, EigenProfile, RieszOptions, Subequation,
};

fn rng(s: u64) -> Rng {
    seed::rng(s, "properties", 0)
}

fn frob(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.as_matrix().component_mul(b.as_matrix()).sum()
}

fn max_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
    (a.as_matrix() - b.as_matrix()).amax()
}

fn random_frame(n: usize, p: usize, rng: &mut Rng) -> Frame {
    let q = random_orthogonal(n, rng);
    Frame::new(q.columns(0, p).into_owned()).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn projector_depends_only_on_span(s in any::<u64>(), n in 3usize..7, p in 1usize..3) {
        let mut r = rng(s);
        let w = random_frame(n, p, &mut r);
        let rot = random_orthogonal(p, &mut r);
        let w2 = Frame::new(w.as_matrix() * rot).unwrap();
        prop_assert!(max_diff(&SymMatrix::projector(&w), &SymMatrix::projector(&w2)) <= 1e-10);
        let a = random_symmetric(n, &mut r);
        let via_projector = (SymMatrix::projector(&w).as_matrix() * a.as_matrix()).trace();
        prop_assert!((trace_on_plane(&a, &w) - via_projector).abs() <= 1e-10);
    }

    #[test]
    fn hermitian_parts_are_orthogonal_projections(s in any::<u64>(), m in 1usize..3) {
        let mut r = rng(s);
        let c = ComplexStructure::standard(2 * m);
        let q = QuaternionStructure::standard(m);
        let n = 4 * m;
        let (a, b) = (random_symmetric(n, &mut r), random_symmetric(n, &mut r));
        let ha = hermitian_part_complex(&a, &c).unwrap();
        prop_assert!(max_diff(&hermitian_part_complex(&ha, &c).unwrap(), &ha) <= 1e-12);
        let hb = hermitian_part_complex(&b, &c).unwrap();
        prop_assert!((frob(&ha, &b) - frob(&a, &hb)).abs() <= 1e-10);
        let qa = hermitian_part_quaternionic(&a, &q).unwrap();
        prop_assert!(max_diff(&hermitian_part_quaternionic(&qa, &q).unwrap(), &qa) <= 1e-12);
        let qb = hermitian_part_quaternionic(&b, &q).unwrap();
        prop_assert!((frob(&qa, &b) - frob(&a, &qb)).abs() <= 1e-10);
    }

    #[test]
    fn sorted_eigenvalues_move_by_at_most_the_perturbation(s in any::<u64>(), n in 2usize..7) {
        let mut r = rng(s);
        let a = random_symmetric(n, &mut r);
        let e = random_symmetric(n, &mut r);
        let eps = 1e-6;
        let e = e.scale(eps / e.spectral_norm());
        let (la, lb) = (a.eigenvalues(), a.add(&e).eigenvalues());
        prop_assert!(la.windows(2).all(|w| w[0] <= w[1]));
        for (x, y) in la.iter().zip(&lb) {
            prop_assert!((x - y).abs() <= eps * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sandwich_between_min2_and_minmax(s in any::<u64>(), n in 3usize..6, t in 0.0f64..1.0) {
        let mut r = rng(s);
        let p = 1.0 + t * (n as f64 - 1.5);
        let inner = Subequation::minmax(n, p).unwrap();
        let lower = Subequation::min2(n, p).unwrap();
        let mut families = vec![Subequation::pconvex(n, p).unwrap()];
        if p < n as f64 {
            families.push(expand(&Subequation::orphant(n), expansion_delta_for(p, n).unwrap()).unwrap());
        }
        for f in &families {
            let pf = riesz_characteristic_increasing(f, RieszOptions::default()).unwrap().value.finite().unwrap();
            prop_assert!((pf - p).abs() <= 1e-6, "{} has characteristic {pf}", f.name());
            for _ in 0..20 {
                let a = random_symmetric(n, &mut r).shift(r.gen_range(-1.0..1.0));
                if lower.member(&a, 0.0).unwrap() {
                    prop_assert!(f.member(&a, 1e-12).unwrap(), "{} misses a min2 member", f.name());
                }
                if f.member(&a, 0.0).unwrap() {
                    prop_assert!(inner.member(&a, 1e-12).unwrap(), "{} escapes minmax", f.name());
                }
            }
        }
    }

    #[test]
    fn duality_is_an_involution(s in any::<u64>(), n in 3usize..6, p in 1.0f64..3.0) {
        let mut r = rng(s);
        let families = [
            Subequation::orphant(n),
            Subequation::laplacian(n),
            Subequation::minmax(n, p).unwrap(),
            Subequation::pconvex(n, p).unwrap(),
            Subequation::profile(n, EigenProfile::Min2(p)).unwrap(),
        ];
        let eps = 1e-9;
        for f in &families {
            let dd = dual(&dual(f));
            for _ in 0..20 {
                let a = random_symmetric(n, &mut r);
                prop_assert!((dd.margin(&a).unwrap() - f.margin(&a).unwrap()).abs() <= 1e-12);
                let m = f.margin(&a).unwrap();
                if m.abs() > 2.0 * eps {
                    prop_assert_eq!(dd.member(&a, eps).unwrap(), f.member(&a, eps).unwrap());
                }
            }
        }
    }

    #[test]
    fn expansion_is_uniformly_elliptic(s in any::<u64>(), n in 3usize..6, delta in 0.0f64..5.0) {
        let mut r = rng(s);
        let f = expand(&Subequation::minmax(n, 2.0).unwrap(), delta).unwrap();
        let pd = expand(&Subequation::orphant(n), delta).unwrap();
        for _ in 0..20 {
            // Push A into F and B into 𝒫(δ) along the identity.
            let mut a = random_symmetric(n, &mut r);
            while !f.member(&a, 0.0).unwrap() {
                a = a.shift(0.5);
            }
            let b = random_psd(n, 1 + r.gen_range(0..n), &mut r).add(&random_symmetric(n, &mut r).scale(0.1));
            let m = pd.margin(&b).unwrap();
            let b = if m < 0.0 { b.shift(-m / (1.0 + delta)) } else { b };
            prop_assert!(pd.member(&b, 1e-12).unwrap());
            prop_assert!(f.margin(&a.add(&b)).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn garding_spectrum_is_homogeneous_and_translation_covariant(s in any::<u64>(), t in 0.1f64..5.0, c in -3.0f64..3.0) {
        let mut r = rng(s);
        let ops = [
            GardingOperator::det_real(4).unwrap(),
            GardingOperator::elementary_symmetric(GardingOperator::det_real(4).unwrap(), 2).unwrap(),
            GardingOperator::pconvexity(GardingOperator::det_real(3).unwrap(), 1.5).unwrap(),
            GardingOperator::det_complex(ComplexStructure::standard(2)).unwrap(),
            GardingOperator::lag(ComplexStructure::standard(2)).unwrap(),
        ];
        for op in &ops {
            let a = random_symmetric(op.dim(), &mut r);
            let base = op.spectrum(&a).unwrap();
            prop_assert!(base.windows(2).all(|w| w[0] <= w[1]), "{} spectrum not ascending", op.name());
            let scaled = op.spectrum(&a.scale(t)).unwrap();
            let shifted = op.spectrum(&a.shift(c)).unwrap();
            // Eigenvalues are normalized by γ = M(I)^{1/m}, so a shift by cI
            // moves each one by cγ.
            let g = op.gamma();
            for ((x, y), z) in base.iter().zip(&scaled).zip(&shifted) {
                prop_assert!((t * x - y).abs() <= 1e-8 * (1.0 + y.abs()), "{}: homogeneity", op.name());
                prop_assert!((x + c * g - z).abs() <= 1e-8 * (1.0 + z.abs()), "{}: translation", op.name());
            }
        }
    }

    #[test]
    fn sigma_k_matches_eigenvalue_route(s in any::<u64>(), n in 2usize..6) {
        let mut r = rng(s);
        let op = GardingOperator::det_complex(ComplexStructure::standard(n)).unwrap();
        let a = random_symmetric(2 * n, &mut r);
        let mu = op.spectrum(&a).unwrap();
        for k in 1..=n {
            let mut e = vec![0.0; k + 1];
            e[0] = 1.0;
            for &v in &mu {
                for j in (1..=k).rev() {
                    e[j] += v * e[j - 1];
                }
            }
            let got = elementary_symmetric_value(&op, k, &a).unwrap();
            prop_assert!((got - e[k]).abs() <= 1e-6 * e[k].abs().max(1.0));
        }
    }

    #[test]
    fn intersection_dim_is_symmetric(s in any::<u64>(), n in 3usize..7, p in 1usize..3, q in 1usize..3) {
        let mut r = rng(s);
        let a = random_frame(n, p, &mut r);
        let b = random_frame(n, q, &mut r);
        prop_assert_eq!(intersection_dim(&a, &b), intersection_dim(&b, &a));
        prop_assert_eq!(intersection_dim(&a, &a), p);
    }

    #[test]
    fn kahler_invariant_is_unitary_invariant(s in any::<u64>(), cos in 0.0f64..1.0) {
        let mut r = rng(s);
        let c = ComplexStructure::standard(3);
        let fam = PlaneFamily::kahler_orbit(cos, c.clone()).unwrap();
        let w = fam.sample(&mut r).unwrap();
        let u: DMatrix<f64> = random_unitary(&c, &mut r);
        let gw = Frame::new(&u * w.as_matrix()).unwrap();
        let (x, y) = (kahler_angle_invariant(&w, &c).unwrap(), kahler_angle_invariant(&gw, &c).unwrap());
        prop_assert!((x - y).abs() <= 1e-9);
        prop_assert!((x - cos).abs() <= 1e-8);
    }

    #[test]
    fn kernels_increase(p in 1.0f64..6.0, a in 0.01f64..10.0, b in 0.01f64..10.0) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(kernel(p, lo).unwrap() < kernel(p, hi).unwrap());
    }

    #[test]
    fn flow_is_a_semigroup(s in any::<u64>(), r1 in 0.05f64..1.0, r2 in 0.05f64..1.0) {
        let mut r = rng(s);
        let settings = SupSettings::new(200, 200, 1);
        for id in ["kernel_plus_square(p=3, n=3)", "kernel_shift(p=1.5, n=3, c=0.5)", "quat_pole(m=1)"] {
            let u = catalog_field(id).unwrap();
            let p = u.meta.p.unwrap();
            let twice = flow_rescale(&flow_rescale(&u, r1, p, &settings).unwrap(), r2, p, &settings).unwrap();
            let once = flow_rescale(&u, r1 * r2, p, &settings).unwrap();
            for _ in 0..10 {
                let x: Vec<f64> = (0..u.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
                let (a, b) = (twice.eval(&x), once.eval(&x));
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{id}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_is_linear_in_the_jet(s in any::<u64>(), n in 3usize..6, p in 1.0f64..5.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut r = rng(s);
        let j1 = SphericalJet::random(n, &mut r);
        let hess2 = random_symmetric(n - 1, &mut r);
        let dg2: Vec<f64> = (0..n - 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let g2 = r.gen_range(-1.0..1.0);
        let j2 = SphericalJet::new(j1.sigma.clone(), j1.basis.clone(), g2, dg2.clone(), hess2.clone()).unwrap();
        let mix = SphericalJet::new(
            j1.sigma.clone(),
            j1.basis.clone(),
            a * j1.g + b * g2,
            j1.dg.iter().zip(&dg2).map(|(x, y)| a * x + b * y).collect(),
            j1.hess.scale(a).add(&hess2.scale(b)),
        )
        .unwrap();
        let lhs = assemble_phi(&mix, p);
        let rhs = assemble_phi(&j1, p).scale(a).add(&assemble_phi(&j2, p).scale(b));
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * (1.0 + rhs.frobenius()));
    }

    #[test]
    fn phi_is_basis_covariant(s in any::<u64>(), n in 3usize..6, p in 1.0f64..5.0) {
        let mut r = rng(s);
        let j = SphericalJet::random(n, &mut r);
        let rot = random_orthogonal(n - 1, &mut r);
        let rebased = j.rebased(Frame::new(j.basis.as_matrix() * rot).unwrap()).unwrap();
        prop_assert!(max_diff(&assemble_phi(&j, p), &assemble_phi(&rebased, p)) <= 1e-10);
    }

    #[test]
    fn positive_hessian_increments_keep_membership(s in any::<u64>(), n in 3usize..6, p in 1.0f64..3.0) {
        let mut r = rng(s);
        let families = [Subequation::minmax(n, p).unwrap(), Subequation::pconvex(n, p).unwrap(), Subequation::laplacian(n)];
        for f in &families {
            let j = SphericalJet::random(n, &mut r);
            let bump = random_psd(n - 1, 1 + r.gen_range(0..n - 1), &mut r);
            let k = SphericalJet::new(j.sigma.clone(), j.basis.clone(), j.g, j.dg.clone(), j.hess.add(&bump)).unwrap();
            let m0 = sphere_subeq_member(f, &j, p, 0.0).unwrap().margin;
            let m1 = sphere_subeq_member(f, &k, p, 0.0).unwrap().margin;
            prop_assert!(m1 >= m0 - 1e-12, "{}: {m0} -> {m1}", f.name());
        }
    }
}
