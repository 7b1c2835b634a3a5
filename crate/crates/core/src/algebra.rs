//! Basis-indexed Lie algebra arithmetic driven by structure constants.
//!
//! Algebra and coalgebra elements are coefficient vectors against a fixed
//! basis {e_1, ..., e_n} and its dual; everything here is dimension-generic.
//! The matrix realization for SE(2) lives in [`crate::se2`].

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Tolerance for validating antisymmetry and the Jacobi identity.
const STRUCTURE_TOL: f64 = 1e-12;

/// Element of the Lie algebra, as coefficients against the basis {e_k}.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector(pub Vec<f64>);

/// Element of the dual (momenta, costates), as coefficients against {e^k}.
///
/// The dual basis is normalized so that ⟨e^i, e_j⟩ = δ_ij, which makes the
/// natural pairing a plain dot product on coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(pub Vec<f64>);

macro_rules! coeff_vector_impl {
    ($t:ident) => {
        impl $t {
            pub fn zero(dim: usize) -> Self {
                $t(vec![0.0; dim])
            }

            /// k-th basis vector of the given dimension.
            pub fn basis(dim: usize, k: usize) -> Self {
                let mut c = vec![0.0; dim];
                c[k] = 1.0;
                $t(c)
            }

            pub fn new(coeffs: Vec<f64>) -> Result<Self> {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite {
                        context: stringify!($t),
                    });
                }
                Ok($t(coeffs))
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.is_finite())
            }

            pub fn scaled(&self, a: f64) -> Self {
                $t(self.0.iter().map(|c| a * c).collect())
            }

            pub fn add(&self, other: &Self) -> Self {
                debug_assert_eq!(self.dim(), other.dim());
                $t(self
                    .0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| a + b)
                    .collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                debug_assert_eq!(self.dim(), other.dim());
                $t(self
                    .0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| a - b)
                    .collect())
            }

            pub fn norm(&self) -> f64 {
                self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
            }
        }

        impl std::ops::Index<usize> for $t {
            type Output = f64;
            fn index(&self, k: usize) -> &f64 {
                &self.0[k]
            }
        }

        impl std::ops::IndexMut<usize> for $t {
            fn index_mut(&mut self, k: usize) -> &mut f64 {
                &mut self.0[k]
            }
        }
    };
}

coeff_vector_impl!(AlgebraVector);
coeff_vector_impl!(DualVector);

/// Structure constants C[k][i][j]: the coefficient of e_k in [e_i, e_j].
///
/// Validated at construction: antisymmetry in (i, j) and the Jacobi identity,
/// both to `1e-12` (the SE(2) constants are exact integers).
#[derive(Debug, Clone)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<f64>, // flattened [k][i][j]
}

impl StructureConstants {
    pub fn new(dim: usize, constants: &[((usize, usize, usize), f64)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for &((k, i, j), v) in constants {
            if k >= dim || i >= dim || j >= dim {
                return Err(Error::InvalidStructureConstants(format!(
                    "index ({k},{i},{j}) out of range for dimension {dim}"
                )));
            }
            c[(k * dim + i) * dim + j] = v;
        }
        let sc = StructureConstants { dim, c };
        sc.validate()?;
        Ok(sc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// C[k][i][j].
    #[inline]
    pub fn coeff(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.dim + i) * self.dim + j]
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let r = self.coeff(k, i, j) + self.coeff(k, j, i);
                    if r.abs() > STRUCTURE_TOL {
                        return Err(Error::InvalidStructureConstants(format!(
                            "antisymmetry fails at (k,i,j)=({k},{i},{j}): residual {r:.3e}"
                        )));
                    }
                }
            }
        }
        // Jacobi: sum_m C[m][i][j] C[l][m][k] + cyclic = 0
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.coeff(m, i, j) * self.coeff(l, m, k)
                                + self.coeff(m, j, k) * self.coeff(l, m, i)
                                + self.coeff(m, k, i) * self.coeff(l, m, j);
                        }
                        if s.abs() > STRUCTURE_TOL {
                            return Err(Error::InvalidStructureConstants(format!(
                                "Jacobi identity fails at (i,j,k,l)=({i},{j},{k},{l}): residual {s:.3e}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d,
            });
        }
        Ok(())
    }

    /// Lie bracket on coefficients: result_k = Σ_{i,j} C[k][i][j] ξ_i η_j.
    pub fn bracket(&self, xi: &AlgebraVector, eta: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_dim(xi.dim())?;
        self.check_dim(eta.dim())?;
        let n = self.dim;
        let mut out = AlgebraVector::zero(n);
        for i in 0..n {
            if xi[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let p = xi[i] * eta[j];
                if p == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.coeff(k, i, j) * p;
                }
            }
        }
        Ok(out)
    }

    /// Coadjoint action, defined by ⟨ad*_ξ μ, η⟩ = ⟨μ, [ξ, η]⟩ for all η:
    /// result_k = Σ_{m,i} μ_m C[m][i][k] ξ_i.
    pub fn ad_star(&self, xi: &AlgebraVector, mu: &DualVector) -> Result<DualVector> {
        self.check_dim(xi.dim())?;
        self.check_dim(mu.dim())?;
        let n = self.dim;
        let mut out = DualVector::zero(n);
        for m in 0..n {
            if mu[m] == 0.0 {
                continue;
            }
            for i in 0..n {
                let p = mu[m] * xi[i];
                if p == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[k] += self.coeff(m, i, k) * p;
                }
            }
        }
        Ok(out)
    }
}

/// Natural pairing ⟨μ, ξ⟩ on coefficients.
pub fn pairing(mu: &DualVector, xi: &AlgebraVector) -> Result<f64> {
    if mu.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: xi.dim(),
        });
    }
    Ok(mu.0.iter().zip(&xi.0).map(|(a, b)| a * b).sum())
}

/// Which factor of the split g = r ⊕ s to keep when projecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Actuated subspace span{e_1, ..., e_m}.
    R,
    /// Unactuated subspace span{e_{m+1}, ..., e_n}.
    S,
}

/// Index split of the basis into actuated (r) and unactuated (s) directions.
#[derive(Debug, Clone)]
pub struct Decomposition {
    dim: usize,
    in_r: Vec<bool>,
}

impl Decomposition {
    pub fn new(dim: usize, r_indices: &[usize], s_indices: &[usize]) -> Result<Self> {
        let mut seen = vec![false; dim];
        let mut in_r = vec![false; dim];
        for &k in r_indices {
            if k >= dim || seen[k] {
                return Err(Error::InvalidDecomposition(format!(
                    "index {k} repeated or out of range"
                )));
            }
            seen[k] = true;
            in_r[k] = true;
        }
        for &k in s_indices {
            if k >= dim || seen[k] {
                return Err(Error::InvalidDecomposition(format!(
                    "index {k} repeated or out of range"
                )));
            }
            seen[k] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidDecomposition(
                "index sets do not cover the basis".into(),
            ));
        }
        Ok(Decomposition { dim, in_r })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, part: Part, k: usize) -> bool {
        match part {
            Part::R => self.in_r[k],
            Part::S => !self.in_r[k],
        }
    }

    pub fn r_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&k| self.in_r[k]).collect()
    }

    pub fn s_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&k| !self.in_r[k]).collect()
    }

    /// True iff the split is in the normal form r = span{e_1,…,e_m},
    /// s = span{e_{m+1},…,e_n} and the inclusions [s,s] ⊆ s, [s,r] ⊆ r,
    /// [r,r] ⊆ s hold on basis brackets.
    ///
    /// The inclusions are checked by expanding [e_i, e_j] through the
    /// structure constants and requiring exactly zero coefficients outside
    /// the target subspace. The prefix requirement is conventional: a split
    /// with scattered actuated indices can satisfy the inclusions too, but
    /// the equations are stated for actuated-first bases, and relabeling
    /// the basis (with the correspondingly permuted structure constants)
    /// brings any such split into this form.
    pub fn check(&self, sc: &StructureConstants) -> bool {
        if sc.dim() != self.dim {
            return false;
        }
        let n = self.dim;
        let m = self.in_r.iter().filter(|&&r| r).count();
        if self.in_r[..m].iter().any(|&r| !r) {
            return false; // actuated indices are not the basis prefix
        }
        for i in 0..n {
            for j in 0..n {
                // target subspace for [e_i, e_j] under the three inclusions
                let target_r = self.in_r[i] != self.in_r[j];
                for k in 0..n {
                    if sc.coeff(k, i, j) != 0.0 && self.in_r[k] != target_r {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Zero out all coefficients outside the selected part of the split.
pub fn project_algebra(v: &AlgebraVector, d: &Decomposition, part: Part) -> AlgebraVector {
    AlgebraVector(
        v.0.iter()
            .enumerate()
            .map(|(k, &c)| if d.contains(part, k) { c } else { 0.0 })
            .collect(),
    )
}

/// Dual-side counterpart of [`project_algebra`].
pub fn project_dual(v: &DualVector, d: &Decomposition, part: Part) -> DualVector {
    DualVector(
        v.0.iter()
            .enumerate()
            .map(|(k, &c)| if d.contains(part, k) { c } else { 0.0 })
            .collect(),
    )
}

/// Quadratic cost metric: C(u) = ½ uᵀ W u with W supported on the actuated
/// block and symmetric positive definite there.
#[derive(Debug, Clone)]
pub struct CostMetric {
    dim: usize,
    w: Vec<f64>,     // n x n, row-major
    w_inv: Vec<f64>, // inverse on the r block, zero elsewhere
}

impl CostMetric {
    /// Build from the full n×n matrix; rows/columns on s indices must vanish.
    pub fn new(w: &DMatrix<f64>, d: &Decomposition) -> Result<Self> {
        let n = d.dim();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.nrows(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let off_block = !d.contains(Part::R, i) || !d.contains(Part::R, j);
                if off_block && w[(i, j)] != 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "entry ({i},{j}) lies outside the actuated block but is nonzero"
                    )));
                }
                if (w[(i, j)] - w[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidMetric(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let r = d.r_indices();
        let m = r.len();
        let block = DMatrix::from_fn(m, m, |a, b| w[(r[a], r[b])]);
        if block.clone().cholesky().is_none() {
            return Err(Error::InvalidMetric(
                "actuated block is not positive definite".into(),
            ));
        }
        // direct inverse rather than Cholesky back-substitution: keeps the
        // inverse of simple diagonal metrics exact (e.g. diag(2,1) inverts
        // to diag(0.5, 1) bit-for-bit), which the Legendre round trip needs
        let block_inv = block
            .try_inverse()
            .ok_or_else(|| Error::InvalidMetric("actuated block is singular".into()))?;

        let mut w_flat = vec![0.0; n * n];
        let mut w_inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                w_flat[i * n + j] = w[(i, j)];
            }
        }
        for a in 0..m {
            for b in 0..m {
                w_inv[r[a] * n + r[b]] = block_inv[(a, b)];
            }
        }
        Ok(CostMetric {
            dim: n,
            w: w_flat,
            w_inv,
        })
    }

    /// Diagonal metric with the given weights on the r indices.
    pub fn diagonal(weights: &[f64], d: &Decomposition) -> Result<Self> {
        let n = d.dim();
        let r = d.r_indices();
        if weights.len() != r.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                got: weights.len(),
            });
        }
        let mut w = DMatrix::zeros(n, n);
        for (a, &k) in r.iter().enumerate() {
            w[(k, k)] = weights[a];
        }
        Self::new(&w, d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.dim + j]
    }

    /// ∂C/∂u = W u, defined for controls supported on the actuated subspace.
    pub fn gradient(&self, u: &AlgebraVector, d: &Decomposition) -> Result<DualVector> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.dim(),
            });
        }
        for k in d.s_indices() {
            if u[k] != 0.0 {
                return Err(Error::SupportViolation {
                    context: "control has nonzero unactuated components",
                });
            }
        }
        Ok(self.apply(u))
    }

    /// W u without the support check (internal fast path).
    pub fn apply(&self, u: &AlgebraVector) -> DualVector {
        let n = self.dim;
        let mut out = DualVector::zero(n);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.w[i * n + j] * u.0[j];
            }
            out[i] = s;
        }
        out
    }

    /// W⁻¹ restricted to the r block, applied to a covector (zero on s).
    pub fn apply_inverse(&self, mu: &DualVector) -> AlgebraVector {
        let n = self.dim;
        let mut out = AlgebraVector::zero(n);
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.w_inv[i * n + j] * mu.0[j];
            }
            out[i] = s;
        }
        out
    }

    /// C(u) = ½ uᵀ W u.
    pub fn cost(&self, u: &AlgebraVector) -> f64 {
        let wu = self.apply(u);
        0.5 * wu.0.iter().zip(&u.0).map(|(a, b)| a * b).sum::<f64>()
    }
}
