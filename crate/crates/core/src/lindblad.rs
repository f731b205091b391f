//! Lindblad generators in vectorized (superoperator) form and the trace-constrained
//! stationary solve shared by the weak-excitation solver and the Fock oracle.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{
    frobenius, hermitian_eigenvalues, hermiticity_error, invariant_subspace, real, unvectorize,
    vectorize, CMatrix, CVector, SparseOperator, I, ONE, ZERO,
};

/// Hamiltonian plus jump operators (each already scaled by the square root of its rate).
#[derive(Debug, Clone)]
pub struct OpenSystem {
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<SparseOperator>,
}

impl OpenSystem {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Orthonormal basis of the smallest subspace that contains `seed` and is closed
    /// under H, every L and every L†L.
    ///
    /// Such a subspace carries the full master-equation dynamics of any state starting
    /// inside it, so the stationary state reached from `seed` lives there.
    pub fn dynamical_subspace(&self, seed: &CVector) -> CMatrix {
        let mut generators = vec![self.hamiltonian.clone()];
        for l in &self.jumps {
            generators.push(l.clone());
            generators.push(l.adjoint().compose(l));
        }
        invariant_subspace(seed, &generators, 1e-10)
    }

    /// Dense Liouvillian of the dynamics restricted to the span of `isometry`.
    pub fn restricted_liouvillian(&self, isometry: &CMatrix) -> Liouvillian {
        let h = self.hamiltonian.project(isometry);
        let jumps: Vec<CMatrix> = self.jumps.iter().map(|l| l.project(isometry)).collect();
        Liouvillian::new(&h, &jumps)
    }

    /// Dense Liouvillian on the full Hilbert space.
    pub fn liouvillian(&self) -> Liouvillian {
        let h = self.hamiltonian.to_dense();
        let jumps: Vec<CMatrix> = self.jumps.iter().map(SparseOperator::to_dense).collect();
        Liouvillian::new(&h, &jumps)
    }
}

/// Superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    matrix: CMatrix,
}

impl Liouvillian {
    /// `−i[H,·] + Σ_L (L·L† − ½{L†L, ·})`, with `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
    pub fn new(hamiltonian: &CMatrix, jumps: &[CMatrix]) -> Self {
        let d = hamiltonian.nrows();
        let id = CMatrix::identity(d, d);
        let mut matrix =
            (id.kronecker(hamiltonian) - hamiltonian.transpose().kronecker(&id)) * (-I);
        for l in jumps {
            let ldl = l.adjoint() * l;
            matrix += l.conjugate().kronecker(l);
            matrix -= id.kronecker(&ldl) * real(0.5);
            matrix -= ldl.transpose().kronecker(&id) * real(0.5);
        }
        Self { dim: d, matrix }
    }

    /// Hilbert-space dimension D (the superoperator is D²×D²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.matrix)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    /// `‖vec(I)ᵀ L‖`: the rate of change of the trace, identically zero in Lindblad form.
    pub fn trace_drift(&self) -> f64 {
        let d = self.dim;
        let mut row = CVector::zeros(d * d);
        for i in 0..d {
            row += self.matrix.row(i + d * i).transpose();
        }
        row.norm()
    }

    /// All eigenvalues of the superoperator (dense; meant for small instances).
    pub fn eigenvalues(&self) -> Vec<num_complex::Complex64> {
        crate::linalg::general_eigenvalues(&self.matrix)
    }

    /// Number of singular values below `rel_tol · σ_max`.
    pub fn kernel_dimension(&self, rel_tol: f64) -> usize {
        let svd = SVD::new(self.matrix.clone(), false, false);
        let sigma_max = svd.singular_values.max();
        svd.singular_values
            .iter()
            .filter(|&&s| s <= rel_tol * sigma_max)
            .count()
    }
}

/// Hermitian, unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
}

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Wraps `data` after checking the Hermiticity, trace and positivity tolerances.
    pub fn new(data: CMatrix) -> Result<Self> {
        let rho = Self { data };
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(data: CMatrix) -> Self {
        Self { data }
    }

    pub fn pure(state: &CVector) -> Self {
        let psi = state / real(state.norm());
        Self {
            data: &psi * psi.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_inner(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.data)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.data)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// `⟨i|ρ|i⟩`.
    pub fn population(&self, index: usize) -> f64 {
        self.data[(index, index)].re
    }

    /// `Tr(A ρ)`, real part.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        (op * &self.data).trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized `ψ`.
    pub fn fidelity_with(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.data * psi)).re
    }

    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian: ‖ρ − ρ†‖ = {herm:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Accept the solve when `‖L vec(ρ)‖ ≤ residual_tol · ‖L‖`.
    pub residual_tol: f64,
    /// Compute the Liouvillian kernel dimension first and reject degenerate kernels.
    pub check_uniqueness: bool,
    /// Relative singular-value cutoff used by the uniqueness check.
    pub kernel_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            check_uniqueness: false,
            kernel_tol: 1e-12,
        }
    }
}

/// Stationary state of a Liouvillian and solve diagnostics.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖` after symmetrization.
    pub residual: f64,
    /// `‖ρ − ρ†‖` of the raw solution, before symmetrization.
    pub asymmetry: f64,
    /// Ratio of the largest to smallest pivot magnitude of the LU factorization.
    pub condition_estimate: f64,
}

/// Solves `L vec(ρ) = 0` with the first equation replaced by `Tr ρ = 1`.
///
/// The raw solution is symmetrized, `ρ ← (ρ + ρ†)/2`, and the residual is checked
/// against the original (unmodified) Liouvillian.
pub fn solve_stationary(liouvillian: &Liouvillian, options: &SolveOptions) -> Result<StationarySolution> {
    let d = liouvillian.dim();
    if options.check_uniqueness {
        let kernel_dim = liouvillian.kernel_dimension(options.kernel_tol);
        if kernel_dim > 1 {
            return Err(Error::Degenerate { kernel_dim });
        }
    }
    let mut system = liouvillian.matrix().clone();
    for j in 0..d * d {
        system[(0, j)] = ZERO;
    }
    for i in 0..d {
        system[(0, i + d * i)] = ONE;
    }
    let mut rhs = CVector::zeros(d * d);
    rhs[0] = ONE;

    let lu = system.lu();
    let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
    let max_pivot = pivots.iter().copied().fold(0.0, f64::max);
    let min_pivot = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if min_pivot > 0.0 {
        max_pivot / min_pivot
    } else {
        f64::INFINITY
    };
    let x = lu
        .solve(&rhs)
        .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or_else(|| Error::NumericalFailure {
            reason: "trace-constrained Liouvillian system is singular".into(),
            condition,
        })?;

    let raw = unvectorize(&x, d);
    let asymmetry = hermiticity_error(&raw);
    let rho = (&raw + raw.adjoint()) * real(0.5);
    let residual = (liouvillian.matrix() * vectorize(&rho)).norm();
    let scale = liouvillian.norm().max(f64::MIN_POSITIVE);
    if residual.is_nan() || residual > options.residual_tol * scale {
        return Err(Error::NumericalFailure {
            reason: format!(
                "stationary residual {residual:.3e} exceeds {:.1e}·‖L‖ = {:.3e}",
                options.residual_tol,
                options.residual_tol * scale
            ),
            condition,
        });
    }
    Ok(StationarySolution {
        rho: DensityMatrix::new_unchecked(rho),
        residual,
        asymmetry,
        condition_estimate: condition,
    })
}
