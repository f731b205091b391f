//! Physical parameters, coupling-matrix generators and the collective-mode
//! (singular value) decomposition of the atom-cavity coupling.
//!
//! Energies and rates are in units of the cavity loss rate κ unless a caller
//! chooses otherwise; nothing here assumes κ = 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, real, CMatrix, CVector, C64, ZERO};

/// Default relative cutoff below which a singular value is treated as zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Parameters of the driven, lossy M-mode N-atom cavity.
///
/// `coupling` is the M×N matrix `G` with entries `g_kl`; the mode and atom counts are
/// read off its shape. Operations call [`SystemParams::validate`] before use.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub delta_c: f64,
    pub delta_a: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub drives: Vec<C64>,
    pub coupling: CMatrix,
}

impl SystemParams {
    /// Resonant (Δ = 0), κ = 1, γ = 0 system with the given coupling and drives.
    pub fn new(coupling: CMatrix, drives: Vec<C64>) -> Result<Self> {
        let params = Self {
            delta_c: 0.0,
            delta_a: 0.0,
            kappa: 1.0,
            gamma: 0.0,
            drives,
            coupling,
        };
        params.validate()?;
        Ok(params)
    }

    /// Single-mode system with real drive `eta` and uniform coupling `g` to `n_atoms` atoms.
    pub fn single_mode(n_atoms: usize, g: f64, eta: f64) -> Result<Self> {
        Self::new(make_uniform_coupling(1, n_atoms, g)?, vec![real(eta)])
    }

    pub fn n_modes(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.coupling.ncols()
    }

    /// Sets Δ_A = Δ_C = `delta`.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta_a = delta;
        self.delta_c = delta;
        self
    }

    pub fn with_detunings(mut self, delta_c: f64, delta_a: f64) -> Self {
        self.delta_c = delta_c;
        self.delta_a = delta_a;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_drives(mut self, drives: Vec<C64>) -> Self {
        self.drives = drives;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = self.coupling.shape();
        if m == 0 || n == 0 {
            return Err(Error::Dimension(format!(
                "coupling must be at least 1x1, got {m}x{n}"
            )));
        }
        if m > n {
            return Err(Error::Dimension(format!(
                "more modes than atoms (M = {m} > N = {n}) is not supported"
            )));
        }
        if self.drives.len() != m {
            return Err(Error::Dimension(format!(
                "expected {m} drive amplitudes, got {}",
                self.drives.len()
            )));
        }
        if !self.kappa.is_finite() || self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive and finite, got {}",
                self.kappa
            )));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be non-negative and finite, got {}",
                self.gamma
            )));
        }
        if !self.delta_a.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::InvalidParameter("detunings must be finite".into()));
        }
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !self.drives.iter().all(finite) || !self.coupling.iter().all(finite) {
            return Err(Error::InvalidParameter(
                "drives and coupling entries must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Dimension(format!(
            "mode and atom counts must be positive, got M = {m}, N = {n}"
        )));
    }
    Ok(())
}

/// M×N coupling matrix with every entry equal to `g`.
pub fn make_uniform_coupling(m: usize, n: usize, g: f64) -> Result<CMatrix> {
    check_dims(m, n)?;
    Ok(CMatrix::from_element(m, n, real(g)))
}

/// Atoms localized on a scale short compared with the mode functions: every entry is
/// `g` plus a seeded uniform perturbation in `[-perturbation, perturbation]`.
///
/// At zero perturbation the matrix has rank one with singular value `g·√(MN)`.
pub fn make_localized_coupling(
    m: usize,
    n: usize,
    g: f64,
    perturbation: f64,
    seed: u64,
) -> Result<CMatrix> {
    check_dims(m, n)?;
    if m > n {
        return Err(Error::Dimension(format!(
            "localized coupling needs M <= N, got M = {m}, N = {n}"
        )));
    }
    if perturbation.is_nan() || perturbation < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "perturbation must be non-negative, got {perturbation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(CMatrix::from_fn(m, n, |_, _| {
        let offset = perturbation * (2.0 * rng.gen::<f64>() - 1.0);
        real(g + offset)
    }))
}

/// Collective cavity/atomic modes: `G = U Λ W†`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveDecomposition {
    /// M×M unitary; column j is the collective cavity mode |C̃_j⟩ in the |C_k⟩ basis.
    pub u: CMatrix,
    /// N×N unitary; column j is the collective atomic mode |Ã_j⟩ in the |A_l⟩ basis.
    pub w: CMatrix,
    /// All M singular values, non-increasing (zeros included).
    pub singular_values: Vec<f64>,
    /// Number of singular values above the relative cutoff.
    pub rank: usize,
    /// η̃ = U†η.
    pub transformed_drives: Vec<C64>,
}

impl CollectiveDecomposition {
    pub fn n_modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_atoms(&self) -> usize {
        self.w.nrows()
    }

    /// The retained (nonzero) singular values λ_1..λ_R.
    pub fn retained(&self) -> &[f64] {
        &self.singular_values[..self.rank]
    }

    /// The rectangular M×N matrix Λ.
    pub fn lambda_matrix(&self) -> CMatrix {
        let mut lambda = CMatrix::zeros(self.n_modes(), self.n_atoms());
        for (j, &s) in self.singular_values.iter().enumerate() {
            lambda[(j, j)] = real(s);
        }
        lambda
    }

    /// `U Λ W†`.
    pub fn reconstruct(&self) -> CMatrix {
        &self.u * self.lambda_matrix() * self.w.adjoint()
    }

    /// Unitary mapping collective weak-basis coordinates (|0̲⟩, |C̃_j⟩, |Ã_j⟩) to the
    /// original weak basis (|0̲⟩, |C_k⟩, |A_l⟩): block-diag(1, U, W).
    pub fn weak_basis_transform(&self) -> CMatrix {
        let (m, n) = (self.n_modes(), self.n_atoms());
        let mut t = CMatrix::zeros(1 + m + n, 1 + m + n);
        t[(0, 0)] = real(1.0);
        t.view_mut((1, 1), (m, m)).copy_from(&self.u);
        t.view_mut((1 + m, 1 + m), (n, n)).copy_from(&self.w);
        t
    }
}

/// Singular value decomposition of the coupling matrix into collective modes.
///
/// Singular values are sorted non-increasing (stable among ties). Each left singular
/// vector is rephased so its largest-magnitude entry is real and non-negative, and the
/// matching right vector gets the same phase. `W` is completed to a full N×N unitary.
pub fn decompose(params: &SystemParams, rank_tolerance: f64) -> Result<CollectiveDecomposition> {
    params.validate()?;
    if !(rank_tolerance > 0.0 && rank_tolerance < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rank tolerance must lie in (0, 1), got {rank_tolerance}"
        )));
    }
    let (m, n) = params.coupling.shape();
    let (u_raw, sigma, v_raw) = jacobi_svd(&params.coupling);
    let negligible = f64::EPSILON * n as f64 * sigma.iter().copied().fold(0.0, f64::max);

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));

    let mut u = CMatrix::zeros(m, m);
    let mut v_cols: Vec<CVector> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        let mut u_col: CVector = u_raw.column(src).into_owned();
        let mut v_col: CVector = v_raw.column(src).into_owned();
        let pivot = u_col
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| {
                if z.norm() > best.1 {
                    (i, z.norm())
                } else {
                    best
                }
            })
            .0;
        let phase = u_col[pivot].arg();
        let rot = C64::from_polar(1.0, -phase);
        u_col *= rot;
        v_col *= rot;
        u_col[pivot] = real(u_col[pivot].norm());
        u.set_column(dst, &u_col);
        if sigma[src] > negligible {
            v_cols.push(v_col);
        }
        singular_values.push(sigma[src]);
    }

    let w = complete_unitary(v_cols, n);
    let lambda_max = singular_values.first().copied().unwrap_or(0.0);
    let rank = if lambda_max > 0.0 {
        singular_values
            .iter()
            .filter(|&&s| s > rank_tolerance * lambda_max)
            .count()
    } else {
        0
    };
    let eta = CVector::from_column_slice(&params.drives);
    let transformed_drives = (u.adjoint() * eta).iter().copied().collect();

    Ok(CollectiveDecomposition {
        u,
        w,
        singular_values,
        rank,
        transformed_drives,
    })
}

/// Extends nearly orthonormal columns to a full `dim`×`dim` unitary: the given columns
/// are re-orthonormalized in order, then completed by greedy Gram–Schmidt over the
/// standard basis (largest residual first, lowest index on ties).
fn complete_unitary(given: Vec<CVector>, dim: usize) -> CMatrix {
    let orthogonalize = |v: &mut CVector, basis: &[CVector]| {
        for _ in 0..2 {
            for q in basis {
                let overlap = q.dotc(v);
                *v -= q * overlap;
            }
        }
    };
    let mut columns: Vec<CVector> = Vec::with_capacity(dim);
    for mut v in given {
        orthogonalize(&mut v, &columns);
        let norm = v.norm();
        columns.push(v / real(norm));
    }
    while columns.len() < dim {
        let mut best: Option<(f64, CVector)> = None;
        for i in 0..dim {
            let mut e = CVector::from_element(dim, ZERO);
            e[i] = real(1.0);
            orthogonalize(&mut e, &columns);
            let norm = e.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
                best = Some((norm, e));
            }
        }
        let (norm, v) = best.expect("dim > 0");
        columns.push(v / real(norm));
    }
    CMatrix::from_columns(&columns)
}
