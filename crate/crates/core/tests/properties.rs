//! Property tests for the algebra/group invariants.

use lieopt_core::algebra::{pairing, project_dual, AlgebraVector, CostMetric, DualVector, Part};
use lieopt_core::dynamics::{legendre, legendre_inverse};
use lieopt_core::interaction::{potential, EdgeParams};
use lieopt_core::se2::{self, exp, hat, log, vee, GroupElement};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn alg_vec() -> impl Strategy<Value = AlgebraVector> {
    prop::array::uniform3(coeff()).prop_map(|c| AlgebraVector(c.to_vec()))
}

fn dual_vec() -> impl Strategy<Value = DualVector> {
    prop::array::uniform3(coeff()).prop_map(|c| DualVector(c.to_vec()))
}

proptest! {
    #[test]
    fn ad_star_is_adjoint_to_bracket(xi in alg_vec(), eta in alg_vec(), mu in dual_vec()) {
        let sc = se2::structure_constants();
        let lhs = pairing(&sc.ad_star(&xi, &mu).unwrap(), &eta).unwrap();
        let rhs = pairing(&mu, &sc.bracket(&xi, &eta).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn vee_hat_commutator_matches_bracket(xi in alg_vec(), eta in alg_vec()) {
        let sc = se2::structure_constants();
        let comm = hat(&xi) * hat(&eta) - hat(&eta) * hat(&xi);
        let lhs = vee(&comm).unwrap();
        let rhs = sc.bracket(&xi, &eta).unwrap();
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-13);
    }

    #[test]
    fn exp_log_roundtrip(omega in -2.9..2.9f64, v1 in -2.0..2.0f64, v2 in -2.0..2.0f64) {
        let xi = AlgebraVector(vec![omega, v1, v2]);
        let back = log(&exp(&xi).unwrap()).unwrap();
        prop_assert!(back.sub(&xi).norm() <= 1e-10);
    }

    #[test]
    fn group_closure_under_composition(
        a in prop::array::uniform3(coeff()),
        b in prop::array::uniform3(coeff()),
    ) {
        let g = GroupElement::from_pose(a[0], a[1], 3.0 * a[2]).unwrap();
        let h = GroupElement::from_pose(b[0], b[1], 3.0 * b[2]).unwrap();
        prop_assert!(g.compose(&h).orthogonality_defect() <= 1e-12);
        prop_assert!(g.inverse().unwrap().orthogonality_defect() <= 1e-12);
    }

    #[test]
    fn projections_are_complementary_idempotents(v in dual_vec()) {
        let d = se2::decomposition();
        let r = project_dual(&v, &d, Part::R);
        let s = project_dual(&v, &d, Part::S);
        prop_assert_eq!(r.add(&s), v);
        prop_assert_eq!(project_dual(&r, &d, Part::R), r.clone());
        let s_of_r = project_dual(&r, &d, Part::S);
        prop_assert_eq!(s_of_r.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn legendre_roundtrip_exact(u1 in coeff(), u2 in coeff(), l3 in coeff()) {
        let d = se2::decomposition();
        let w = CostMetric::diagonal(&[2.0, 1.0], &d).unwrap();
        let u = AlgebraVector(vec![u1, u2, 0.0]);
        let lam = DualVector(vec![0.0, 0.0, l3]);
        let mu = legendre(&u, &lam, &w, &d).unwrap();
        let (u_back, lam_back) = legendre_inverse(&mu, &w, &d);
        prop_assert_eq!(u_back, u);
        prop_assert_eq!(lam_back, lam);
    }

    #[test]
    fn barrier_is_left_invariant(
        gi in prop::array::uniform3(coeff()),
        h in prop::array::uniform3(coeff()),
        offset in 1.0..3.0f64,
    ) {
        let e = EdgeParams { sigma: 1.0, distance: 0.1 };
        let a = GroupElement::from_pose(gi[0], gi[1], gi[2]).unwrap();
        let b = GroupElement::from_pose(gi[0] + offset, gi[1] - offset, gi[2]).unwrap();
        let t = GroupElement::from_pose(h[0], h[1], 3.0 * h[2]).unwrap();
        let v = potential(&e, &a, &b).unwrap();
        let vt = potential(&e, &t.compose(&a), &t.compose(&b)).unwrap();
        prop_assert!((v - vt).abs() <= 1e-12);
    }
}
