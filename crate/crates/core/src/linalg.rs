//! Small dense/sparse complex linear-algebra helpers shared by the solvers.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Frobenius norm of a complex matrix.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖m − m†‖_F`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigen-decomposition of a Hermitian matrix, eigenpairs sorted by ascending eigenvalue.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues of a general complex square matrix, read off the complex Schur form.
pub fn general_eigenvalues(m: &CMatrix) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Thin SVD of a wide matrix (`rows ≤ cols`) by one-sided Jacobi rotations on `g†`.
///
/// Returns `(u, sigma, v)` with `g = u · diag(sigma) · v†` and `u` square unitary. Columns
/// of `v` are orthonormal where `sigma` exceeds `ε·‖g‖`; below that they carry no
/// reliable direction. No ordering.
pub fn jacobi_svd(g: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    const MAX_SWEEPS: usize = 100;
    let m = g.nrows();
    assert!(m <= g.ncols(), "jacobi_svd expects rows <= cols");
    let mut a = g.adjoint();
    let mut u = CMatrix::identity(m, m);
    // Columns below this squared norm are numerically zero and are not rotated.
    let floor = (f64::EPSILON * frobenius(g)).powi(2);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let gnorm = gamma.norm();
                if alpha <= floor || beta <= floor || gnorm <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / gnorm).conj();
                let zeta = (beta - alpha) / (2.0 * gnorm);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut u] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase;
                        mat[(i, p)] = x * c - y * s;
                        mat[(i, q)] = x * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..m).map(|j| a.column(j).norm()).collect();
    for (j, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            a.column_mut(j).unscale_mut(s);
        }
    }
    (u, sigma, a)
}

/// Column-stacking vectorization: `vec(ρ)[i + d·j] = ρ[i, j]`.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_iterator(dim, dim, v.iter().copied())
}

/// Sparse complex operator stored as coordinate triplets.
///
/// Duplicate coordinates are summed when the operator is applied or densified.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        assert!(m.is_square());
        let mut op = Self::new(m.nrows());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                op.push(i, j, m[(i, j)]);
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Adds `value` at `(row, col)`; exact zeros are dropped.
    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.dim && col < self.dim);
        if value != ZERO {
            self.entries.push((row, col, value));
        }
    }

    /// `self += other`.
    pub fn add(&mut self, other: &SparseOperator) {
        assert_eq!(self.dim, other.dim);
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c, v * factor))
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(r, c, v)| (c, r, v.conj()))
                .collect(),
        }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &SparseOperator) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let mut rhs_rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); rhs.dim];
        for &(r, c, v) in &rhs.entries {
            rhs_rows[r].push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for &(r, k, a) in &self.entries {
            for &(c, b) in &rhs_rows[k] {
                *acc.entry((r, c)).or_insert(ZERO) += a * b;
            }
        }
        let mut out = Self::new(self.dim);
        for ((r, c), v) in acc {
            out.push(r, c, v);
        }
        out
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        assert_eq!(x.len(), self.dim);
        let mut y = CVector::zeros(self.dim);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `Q† · self · Q` for an isometry `Q` with `dim` rows.
    pub fn project(&self, q: &CMatrix) -> CMatrix {
        assert_eq!(q.nrows(), self.dim);
        let mut aq = CMatrix::zeros(self.dim, q.ncols());
        for &(r, c, v) in &self.entries {
            for j in 0..q.ncols() {
                aq[(r, j)] += v * q[(c, j)];
            }
        }
        q.adjoint() * aq
    }
}

/// Orthonormal basis (as columns) of the smallest subspace that contains `seed` and is
/// invariant under every operator in `generators`.
///
/// Candidates are orthogonalized twice against the current basis; a candidate is kept
/// when the surviving component exceeds `rel_tol` times the norm of the image vector.
pub fn invariant_subspace(seed: &CVector, generators: &[SparseOperator], rel_tol: f64) -> CMatrix {
    let dim = seed.len();
    let seed_norm = seed.norm();
    assert!(seed_norm > 0.0, "seed vector must be nonzero");
    let mut basis: Vec<CVector> = vec![seed / real(seed_norm)];
    let mut cursor = 0;
    while cursor < basis.len() && basis.len() < dim {
        for op in generators {
            let mut v = op.apply(&basis[cursor]);
            let image_norm = v.norm();
            if image_norm == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for q in &basis {
                    let overlap = q.dotc(&v);
                    v -= q * overlap;
                }
            }
            let rest = v.norm();
            if rest > rel_tol * image_norm {
                basis.push(v / real(rest));
                if basis.len() == dim {
                    break;
                }
            }
        }
        cursor += 1;
    }
    CMatrix::from_columns(&basis)
}
