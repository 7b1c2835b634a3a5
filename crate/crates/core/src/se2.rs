//! SE(2) as 3×3 homogeneous matrices: hat/vee, exp/log, composition and the
//! left-translation pullback of configuration gradients to the coalgebra.
//!
//! Basis convention (fixed throughout): e_1 generates rotation, e_2 and e_3
//! translation along the body x and y axes, so an algebra coefficient vector
//! reads (ω, v₁, v₂). The dual basis is normalized against the trace pairing,
//! which makes coefficient pairing the plain dot product.

use crate::algebra::{AlgebraVector, Decomposition, DualVector, StructureConstants};
use crate::error::{Error, Result};
use nalgebra::Matrix3;

/// Default tolerance on ‖RᵀR − I‖_F for checked constructors.
pub const GROUP_TOL: f64 = 1e-9;

/// Central finite-difference step for [`body_gradient`].
pub const FD_STEP: f64 = 1e-6;

/// Dimension of se(2).
pub const DIM: usize = 3;

/// Rotation generator, as printed in the basis display.
pub fn e1() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Body-x translation generator.
pub fn e2() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Body-y translation generator.
pub fn e3() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
}

/// Dual basis element e^1 (normalized so tr(e^i e_j) = δ_ij).
pub fn e1_dual() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.5, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0)
}

/// Dual basis element e^2.
pub fn e2_dual() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

/// Dual basis element e^3.
pub fn e3_dual() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)
}

/// Structure constants of se(2): [e1,e2] = e3, [e3,e1] = e2, [e2,e3] = 0.
pub fn structure_constants() -> StructureConstants {
    StructureConstants::new(
        3,
        &[
            ((2, 0, 1), 1.0),
            ((2, 1, 0), -1.0),
            ((1, 2, 0), 1.0),
            ((1, 0, 2), -1.0),
        ],
    )
    .expect("se(2) constants are a Lie algebra")
}

/// The split r = span{e1, e2}, s = span{e3} used by the unicycle model.
pub fn decomposition() -> Decomposition {
    Decomposition::new(3, &[0, 1], &[2]).expect("valid index split")
}

/// Planar rigid motion stored as a 3×3 homogeneous matrix.
///
/// Checked constructors enforce the bottom row (0,0,1) and an orthogonal
/// rotation block; `from_matrix_unchecked` admits drifted matrices so that
/// the entrywise Euler integrator can evolve them unprojected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    m: Matrix3<f64>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement {
            m: Matrix3::identity(),
        }
    }

    /// Build from (x, y, θ). The angle is stored through cos/sin only.
    pub fn from_pose(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::NonFinite { context: "pose" });
        }
        let (s, c) = theta.sin_cos();
        Ok(GroupElement {
            m: Matrix3::new(c, -s, x, s, c, y, 0.0, 0.0, 1.0),
        })
    }

    /// Checked matrix constructor (tolerance `GROUP_TOL`).
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let g = GroupElement { m };
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { context: "matrix" });
        }
        if m[(2, 0)] != 0.0 || m[(2, 1)] != 0.0 || m[(2, 2)] != 1.0 {
            return Err(Error::GroupInvariant {
                defect: f64::INFINITY,
                tol: GROUP_TOL,
            });
        }
        let defect = g.orthogonality_defect();
        if defect > GROUP_TOL {
            return Err(Error::GroupInvariant {
                defect,
                tol: GROUP_TOL,
            });
        }
        Ok(g)
    }

    /// Admit any matrix; used by integrators that deliberately leave the
    /// group (entrywise Euler) and by internal arithmetic.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        GroupElement { m }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn x(&self) -> f64 {
        self.m[(0, 2)]
    }

    pub fn y(&self) -> f64 {
        self.m[(1, 2)]
    }

    /// Heading extracted from the rotation block by atan2.
    pub fn theta(&self) -> f64 {
        self.m[(1, 0)].atan2(self.m[(0, 0)])
    }

    pub fn pose(&self) -> (f64, f64, f64) {
        (self.x(), self.y(), self.theta())
    }

    /// ‖RᵀR − I‖_F of the rotation block.
    pub fn orthogonality_defect(&self) -> f64 {
        let r = self.m.fixed_view::<2, 2>(0, 0);
        let d = r.transpose() * r - nalgebra::Matrix2::identity();
        d.norm()
    }

    /// Group product.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { m: self.m * other.m }
    }

    /// Closed-form inverse (Rᵀ, −Rᵀ t); errors if the rotation block has
    /// drifted beyond `GROUP_TOL`, since the closed form presumes R ∈ SO(2).
    pub fn inverse(&self) -> Result<GroupElement> {
        let defect = self.orthogonality_defect();
        if defect > GROUP_TOL {
            return Err(Error::GroupInvariant {
                defect,
                tol: GROUP_TOL,
            });
        }
        let r = self.m.fixed_view::<2, 2>(0, 0);
        let t = nalgebra::Vector2::new(self.x(), self.y());
        let rt = r.transpose();
        let tt = -rt * t;
        Ok(GroupElement {
            m: Matrix3::new(
                rt[(0, 0)],
                rt[(0, 1)],
                tt[0],
                rt[(1, 0)],
                rt[(1, 1)],
                tt[1],
                0.0,
                0.0,
                1.0,
            ),
        })
    }

    /// Project the rotation block back onto SO(2) (closed-form 2×2 polar
    /// factor) and restore the exact bottom row.
    pub fn reorthonormalized(&self) -> GroupElement {
        let ang = (self.m[(1, 0)] - self.m[(0, 1)]).atan2(self.m[(0, 0)] + self.m[(1, 1)]);
        let (s, c) = ang.sin_cos();
        GroupElement {
            m: Matrix3::new(c, -s, self.x(), s, c, self.y(), 0.0, 0.0, 1.0),
        }
    }
}

/// hat: coefficients to matrix, Σ ξ_k e_k.
pub fn hat(xi: &AlgebraVector) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -xi[0], xi[1], xi[0], 0.0, xi[2], 0.0, 0.0, 0.0,
    )
}

/// vee: matrix to coefficients; the input must lie in span{e1,e2,e3}
/// within `1e-12` per entry.
pub fn vee(x: &Matrix3<f64>) -> Result<AlgebraVector> {
    let omega = x[(1, 0)];
    let residual = [
        x[(0, 0)],
        x[(1, 1)],
        x[(2, 2)],
        x[(2, 0)],
        x[(2, 1)],
        x[(0, 1)] + omega,
    ]
    .iter()
    .map(|v| v.abs())
    .fold(0.0, f64::max);
    if residual > 1e-12 {
        return Err(Error::OutsideSpan { residual });
    }
    Ok(AlgebraVector(vec![omega, x[(0, 2)], x[(1, 2)]]))
}

// sin(ω)/ω and (1−cos(ω))/ω with series fallbacks near zero.
fn v_entries(omega: f64) -> (f64, f64) {
    if omega.abs() < 1e-6 {
        let w2 = omega * omega;
        (1.0 - w2 / 6.0 + w2 * w2 / 120.0, omega / 2.0 - omega * w2 / 24.0)
    } else {
        (omega.sin() / omega, (1.0 - omega.cos()) / omega)
    }
}

/// Closed-form exponential: rotation by ω, translation V(ω)·(v₁, v₂).
pub fn exp(xi: &AlgebraVector) -> Result<GroupElement> {
    if !xi.is_finite() {
        return Err(Error::NonFinite { context: "exp" });
    }
    let (omega, v1, v2) = (xi[0], xi[1], xi[2]);
    let (a, b) = v_entries(omega);
    let (s, c) = omega.sin_cos();
    Ok(GroupElement::from_matrix_unchecked(Matrix3::new(
        c,
        -s,
        a * v1 - b * v2,
        s,
        c,
        b * v1 + a * v2,
        0.0,
        0.0,
        1.0,
    )))
}

/// Inverse of [`exp`]; undefined within `1e-9` of the cut locus θ = ±π.
pub fn log(g: &GroupElement) -> Result<AlgebraVector> {
    let theta = g.theta();
    if std::f64::consts::PI - theta.abs() < 1e-9 {
        return Err(Error::LogDomain { theta });
    }
    let (a, b) = v_entries(theta);
    // V(θ)⁻¹ = 1/(a²+b²) [[a, b], [-b, a]]
    let det = a * a + b * b;
    let (x, y) = (g.x(), g.y());
    let v1 = (a * x + b * y) / det;
    let v2 = (-b * x + a * y) / det;
    Ok(AlgebraVector(vec![theta, v1, v2]))
}

/// Left-trivialized gradient of a scalar function on the group:
/// component k is d/dt F(g · exp(t e_k)) at t = 0, by central differences
/// with step `FD_STEP`.
///
/// This is the oracle route; closed-form gradients (e.g. the interaction
/// coupling force) are validated against it.
pub fn body_gradient<F>(g: &GroupElement, f: F) -> Result<DualVector>
where
    F: Fn(&GroupElement) -> Result<f64>,
{
    let mut out = DualVector::zero(DIM);
    for k in 0..DIM {
        let mut step = AlgebraVector::zero(DIM);
        step[k] = FD_STEP;
        let plus = f(&g.compose(&exp(&step)?))?;
        step[k] = -FD_STEP;
        let minus = f(&g.compose(&exp(&step)?))?;
        out[k] = (plus - minus) / (2.0 * FD_STEP);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pairing;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_pose(rng: &mut StdRng) -> GroupElement {
        GroupElement::from_pose(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
        )
        .unwrap()
    }

    #[test]
    fn hat_matches_basis() {
        assert_eq!(hat(&AlgebraVector(vec![1.0, 0.0, 0.0])), e1());
        assert_eq!(hat(&AlgebraVector(vec![0.0, 1.0, 0.0])), e2());
        assert_eq!(hat(&AlgebraVector(vec![0.0, 0.0, 1.0])), e3());
    }

    #[test]
    fn trace_pairing_is_kronecker() {
        let basis = [e1(), e2(), e3()];
        let duals = [e1_dual(), e2_dual(), e3_dual()];
        for (i, d) in duals.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let tr = (d * b).trace();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(tr, expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn vee_inverts_hat() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..50 {
            let xi = AlgebraVector((0..3).map(|_| rng.gen_range(-3.0..3.0)).collect());
            let back = vee(&hat(&xi)).unwrap();
            assert_eq!(back, xi);
        }
        assert!(vee(&Matrix3::identity()).is_err());
    }

    #[test]
    fn commutator_consistency_with_structure_constants() {
        let sc = structure_constants();
        // exact on basis pairs
        let basis = [e1(), e2(), e3()];
        for i in 0..3 {
            for j in 0..3 {
                let comm = basis[i] * basis[j] - basis[j] * basis[i];
                let via_sc = sc
                    .bracket(&AlgebraVector::basis(3, i), &AlgebraVector::basis(3, j))
                    .unwrap();
                assert_eq!(vee(&comm).unwrap(), via_sc);
            }
        }
        // <= 1e-13 on random pairs
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let xi = AlgebraVector((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let eta = AlgebraVector((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let comm = hat(&xi) * hat(&eta) - hat(&eta) * hat(&xi);
            let lhs = vee(&comm).unwrap();
            let rhs = sc.bracket(&xi, &eta).unwrap();
            assert!(lhs.sub(&rhs).norm() <= 1e-13);
        }
    }

    #[test]
    fn from_pose_matches_experiment_initial_condition() {
        let g = GroupElement::from_pose(-0.25, 0.0, std::f64::consts::FRAC_PI_4).unwrap();
        let r2 = 2.0_f64.sqrt() / 2.0;
        let expect = Matrix3::new(r2, -r2, -0.25, r2, r2, 0.0, 0.0, 0.0, 1.0);
        assert!((g.matrix() - expect).norm() < 1e-15);
        let (x, y, th) = g.pose();
        assert_abs_diff_eq!(x, -0.25);
        assert_abs_diff_eq!(y, 0.0);
        assert_abs_diff_eq!(th, std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn compose_and_inverse() {
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..50 {
            let g = rand_pose(&mut rng);
            let gi = g.inverse().unwrap();
            let id = g.compose(&gi);
            assert!((id.matrix() - Matrix3::identity()).norm() < 1e-14);
            assert_eq!(
                GroupElement::identity().compose(&g).matrix(),
                g.matrix()
            );
        }
        let a = GroupElement::from_pose(1.0, 0.0, 0.0).unwrap();
        let b = GroupElement::from_pose(0.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        let c = a.compose(&b);
        let direct = a.matrix() * b.matrix();
        assert!((c.matrix() - direct).norm() == 0.0);
        let expect = GroupElement::from_pose(1.0, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((c.matrix() - expect.matrix()).norm() < 1e-15);
    }

    // 20-term truncated matrix exponential, the independent oracle for exp.
    fn exp_series(x: &Matrix3<f64>) -> Matrix3<f64> {
        let mut sum = Matrix3::identity();
        let mut term = Matrix3::identity();
        for k in 1..=20 {
            term = term * x / (k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn exp_against_series_oracle() {
        assert_eq!(
            exp(&AlgebraVector::zero(3)).unwrap().matrix(),
            GroupElement::identity().matrix()
        );
        let quarter = exp(&AlgebraVector(vec![std::f64::consts::FRAC_PI_2, 0.0, 0.0])).unwrap();
        let expect = GroupElement::from_pose(0.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((quarter.matrix() - expect.matrix()).norm() < 1e-15);

        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let xi = AlgebraVector((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let closed = exp(&xi).unwrap();
            let series = exp_series(&hat(&xi));
            assert!((closed.matrix() - series).norm() < 1e-13);
        }
        // pure translation: V(0) = I
        let t = exp(&AlgebraVector(vec![0.0, 0.3, -0.8])).unwrap();
        let expect = GroupElement::from_pose(0.3, -0.8, 0.0).unwrap();
        assert!((t.matrix() - expect.matrix()).norm() == 0.0);
    }

    #[test]
    fn log_roundtrip() {
        assert_eq!(
            log(&GroupElement::identity()).unwrap().as_slice(),
            &[0.0, 0.0, 0.0]
        );
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..200 {
            let mut xi = AlgebraVector((0..3).map(|_| rng.gen_range(-1.7..1.7)).collect());
            // keep |omega| < pi - 0.1 and norm <= 3
            xi[0] = xi[0].clamp(-(std::f64::consts::PI - 0.1), std::f64::consts::PI - 0.1);
            let back = log(&exp(&xi).unwrap()).unwrap();
            assert!(back.sub(&xi).norm() <= 1e-10, "roundtrip {:?}", xi);
        }
        let half_turn = GroupElement::from_pose(0.0, 0.0, std::f64::consts::PI).unwrap();
        assert!(matches!(log(&half_turn), Err(Error::LogDomain { .. })));
        // rotation-only log has zero translation part
        let quarter = GroupElement::from_pose(0.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        let l = log(&quarter).unwrap();
        assert_abs_diff_eq!(l[0], std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn body_gradient_of_x_coordinate() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let g = rand_pose(&mut rng);
            let grad = body_gradient(&g, |h| Ok(h.x())).unwrap();
            // chain rule: moving along e2 changes x by cos θ, along e3 by −sin θ
            let th = g.theta();
            assert_abs_diff_eq!(grad[0], 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(grad[1], th.cos(), epsilon = 1e-9);
            assert_abs_diff_eq!(grad[2], -th.sin(), epsilon = 1e-9);
        }
        let g = rand_pose(&mut rng);
        let zero = body_gradient(&g, |_| Ok(42.0)).unwrap();
        assert_eq!(zero.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn body_gradient_left_invariance() {
        // F(g) = F0(h g) has the same body gradient at g as F0 at h g.
        let mut rng = StdRng::seed_from_u64(10);
        let f0 = |g: &GroupElement| Ok(g.x() * g.x() + 0.5 * g.y() + g.theta().sin());
        for _ in 0..20 {
            let g = rand_pose(&mut rng);
            let h = rand_pose(&mut rng);
            let lhs = body_gradient(&g, |q| f0(&h.compose(q))).unwrap();
            let rhs = body_gradient(&h.compose(&g), f0).unwrap();
            assert!(lhs.sub(&rhs).norm() < 1e-7);
        }
    }

    #[test]
    fn trace_pairing_agrees_with_coefficient_pairing() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let xi = AlgebraVector((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let mu = DualVector((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let alpha = mu[0] * e1_dual() + mu[1] * e2_dual() + mu[2] * e3_dual();
            let tr = (alpha * hat(&xi)).trace();
            assert_abs_diff_eq!(tr, pairing(&mu, &xi).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn reorthonormalization_restores_rotation() {
        let drifted = GroupElement::from_matrix_unchecked(Matrix3::new(
            1.0, -0.01, 0.3, 0.012, 1.0, -0.2, 0.0, 0.0, 1.0,
        ));
        assert!(drifted.orthogonality_defect() > 1e-3);
        let fixed = drifted.reorthonormalized();
        assert!(fixed.orthogonality_defect() < 1e-15);
        assert_eq!(fixed.x(), drifted.x());
        assert_eq!(fixed.y(), drifted.y());
    }
}
