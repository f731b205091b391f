//! Brute-force reference model on a truncated Fock space: every mode keeps photon
//! numbers 0..=n_max and every atom is a two-level system.
//!
//! Used to check the weak-excitation truncation and to look beyond it.

use crate::error::{Error, Result};
use crate::lindblad::{solve_stationary, DensityMatrix, OpenSystem, SolveOptions};
use crate::linalg::{hermitian_eigh, real, CMatrix, CVector, SparseOperator, ONE};
use crate::model::SystemParams;
use crate::weaksolver::WeakBasis;

/// Product basis |n_1 … n_M⟩ ⊗ |b_1 … b_N⟩.
///
/// Index encoding: `Σ_k n_k (n_max+1)^k + (n_max+1)^M Σ_l b_l 2^l`, so index 0 is the
/// vacuum with all atoms in the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n_modes: usize,
    pub n_atoms: usize,
    pub n_max: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(n_modes: usize, n_atoms: usize, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        let overflow = || Error::Budget {
            what: "Fock dimension",
            required: usize::MAX,
            limit: usize::MAX,
        };
        let mut dim: usize = 1;
        for _ in 0..n_modes {
            dim = dim.checked_mul(n_max + 1).ok_or_else(overflow)?;
        }
        for _ in 0..n_atoms {
            dim = dim.checked_mul(2).ok_or_else(overflow)?;
        }
        Ok(Self {
            n_modes,
            n_atoms,
            n_max,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn mode_stride(&self, k: usize) -> usize {
        (self.n_max + 1).pow(k as u32)
    }

    fn atom_stride(&self, l: usize) -> usize {
        (self.n_max + 1).pow(self.n_modes as u32) << l
    }

    pub fn encode(&self, photons: &[usize], excited: &[bool]) -> usize {
        assert_eq!(photons.len(), self.n_modes);
        assert_eq!(excited.len(), self.n_atoms);
        let modes: usize = photons
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                assert!(n <= self.n_max);
                n * self.mode_stride(k)
            })
            .sum();
        let atoms: usize = excited
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(l, _)| self.atom_stride(l))
            .sum();
        modes + atoms
    }

    pub fn decode(&self, index: usize) -> (Vec<usize>, Vec<bool>) {
        assert!(index < self.dim);
        let base = self.n_max + 1;
        let mut rest = index;
        let photons = (0..self.n_modes)
            .map(|_| {
                let n = rest % base;
                rest /= base;
                n
            })
            .collect();
        let excited = (0..self.n_atoms).map(|l| (rest >> l) & 1 == 1).collect();
        (photons, excited)
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim);
        v[0] = ONE;
        v
    }

    fn diagonal(&self, f: impl Fn(&[usize], &[bool]) -> f64) -> SparseOperator {
        let mut op = SparseOperator::new(self.dim);
        for i in 0..self.dim {
            let (n, b) = self.decode(i);
            op.push(i, i, real(f(&n, &b)));
        }
        op
    }

    /// Annihilation operator of mode `k`; a† maps the top level to zero.
    pub fn annihilation(&self, k: usize) -> SparseOperator {
        let mut op = SparseOperator::new(self.dim);
        let stride = self.mode_stride(k);
        for i in 0..self.dim {
            let n = (i / stride) % (self.n_max + 1);
            if n > 0 {
                op.push(i - stride, i, real((n as f64).sqrt()));
            }
        }
        op
    }

    /// σ⁻ of atom `l`.
    pub fn lowering(&self, l: usize) -> SparseOperator {
        let mut op = SparseOperator::new(self.dim);
        let stride = self.atom_stride(l);
        for i in 0..self.dim {
            if (i / stride) & 1 == 1 {
                op.push(i - stride, i, ONE);
            }
        }
        op
    }

    pub fn number(&self, k: usize) -> SparseOperator {
        self.diagonal(|n, _| n[k] as f64)
    }

    /// σ⁺σ⁻ of atom `l`.
    pub fn atom_excitation(&self, l: usize) -> SparseOperator {
        self.diagonal(|_, b| if b[l] { 1.0 } else { 0.0 })
    }

    /// Σ_k a_k†a_k + Σ_l (σ_l^z + 1)/2.
    pub fn excitation_number(&self) -> SparseOperator {
        self.diagonal(|n, b| (n.iter().sum::<usize>() + b.iter().filter(|&&x| x).count()) as f64)
    }
}

/// Hilbert-space and superoperator size limits for dense work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockBudget {
    pub max_hilbert_dim: usize,
    /// Limit on d² for the dense Liouvillian on the dynamical subspace of dimension d.
    pub max_superoperator_dim: usize,
}

impl Default for FockBudget {
    fn default() -> Self {
        Self {
            max_hilbert_dim: 4096,
            max_superoperator_dim: 2500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    pub budget: FockBudget,
    pub solve: SolveOptions,
    /// Warn when the top Fock level holds more than this fraction of the cavity population.
    pub truncation_threshold: f64,
}

impl Default for FockOptions {
    fn default() -> Self {
        Self {
            budget: FockBudget::default(),
            solve: SolveOptions::default(),
            truncation_threshold: 1e-6,
        }
    }
}

/// Checks the Hilbert-space budget before anything is built.
pub fn fock_basis(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<FockBasis> {
    params.validate()?;
    let basis = FockBasis::new(params.n_modes(), params.n_atoms(), n_max)?;
    if basis.dim() > budget.max_hilbert_dim {
        return Err(Error::Budget {
            what: "Fock Hilbert dimension",
            required: basis.dim(),
            limit: budget.max_hilbert_dim,
        });
    }
    Ok(basis)
}

fn hamiltonian_sparse(params: &SystemParams, basis: &FockBasis) -> SparseOperator {
    let mut h = SparseOperator::new(basis.dim());
    for i in 0..basis.dim() {
        let (n, b) = basis.decode(i);
        let photons: usize = n.iter().sum();
        let sz: f64 = b.iter().map(|&x| if x { 1.0 } else { -1.0 }).sum();
        h.push(i, i, real(-params.delta_c * photons as f64 - 0.5 * params.delta_a * sz));
    }
    let a: Vec<SparseOperator> = (0..basis.n_modes).map(|k| basis.annihilation(k)).collect();
    let sm: Vec<SparseOperator> = (0..basis.n_atoms).map(|l| basis.lowering(l)).collect();
    for (k, ak) in a.iter().enumerate() {
        let ak_dag = ak.adjoint();
        for (l, sl) in sm.iter().enumerate() {
            let g = params.coupling[(k, l)];
            if g.norm() == 0.0 {
                continue;
            }
            let forward = ak_dag.compose(sl).scaled(g * 0.5);
            let backward = forward.adjoint();
            h.add(&forward);
            h.add(&backward);
        }
        let eta = params.drives[k];
        h.add(&ak_dag.scaled(eta));
        h.add(&ak.scaled(eta.conj()));
    }
    h
}

/// Full Hamiltonian H_S + H_D on the truncated Fock space (dense).
pub fn build_full_hamiltonian(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<CMatrix> {
    let basis = fock_basis(params, n_max, budget)?;
    Ok(hamiltonian_sparse(params, &basis).to_dense())
}

/// Hamiltonian plus jumps √κ a_m and √γ σ_n⁻.
pub fn full_open_system(params: &SystemParams, basis: &FockBasis) -> OpenSystem {
    let mut jumps: Vec<SparseOperator> = (0..basis.n_modes)
        .map(|k| basis.annihilation(k).scaled(real(params.kappa.sqrt())))
        .collect();
    if params.gamma > 0.0 {
        jumps.extend((0..basis.n_atoms).map(|l| basis.lowering(l).scaled(real(params.gamma.sqrt()))));
    }
    OpenSystem {
        hamiltonian: hamiltonian_sparse(params, basis),
        jumps,
    }
}

/// Rows/columns of the full Hamiltonian on the zero- and one-excitation states, in
/// weak-basis order, shifted so the vacuum energy is zero.
pub fn single_excitation_block(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<CMatrix> {
    let basis = fock_basis(params, n_max, budget)?;
    let weak = WeakBasis::of(params);
    let h = hamiltonian_sparse(params, &basis).to_dense();
    let mut index = vec![0usize; weak.dim()];
    for k in 0..weak.n_modes {
        let mut n = vec![0; basis.n_modes];
        n[k] = 1;
        index[weak.cavity(k)] = basis.encode(&n, &vec![false; basis.n_atoms]);
    }
    for l in 0..weak.n_atoms {
        let mut b = vec![false; basis.n_atoms];
        b[l] = true;
        index[weak.atom(l)] = basis.encode(&vec![0; basis.n_modes], &b);
    }
    let offset = h[(0, 0)];
    Ok(CMatrix::from_fn(weak.dim(), weak.dim(), |i, j| {
        let v = h[(index[i], index[j])];
        if i == j {
            v - offset
        } else {
            v
        }
    }))
}

/// Diagonal of `Q ρ Q†`.
fn lifted_diagonal(q: &CMatrix, rho: &CMatrix) -> Vec<f64> {
    let qr = q * rho;
    (0..q.nrows())
        .map(|i| {
            (0..q.ncols())
                .map(|a| qr[(i, a)] * q[(i, a)].conj())
                .sum::<crate::linalg::C64>()
                .re
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FockStationaryState {
    pub basis: FockBasis,
    /// Orthonormal basis (columns) of the dynamical subspace in the Fock basis.
    pub isometry: CMatrix,
    /// Stationary density matrix in the coordinates of `isometry`.
    pub rho: DensityMatrix,
    pub residual: f64,
    pub asymmetry: f64,
    pub condition_estimate: f64,
    /// ⟨a_m†a_m⟩ per mode.
    pub mode_populations: Vec<f64>,
    pub total_cavity_population: f64,
    pub atom_excitations: Vec<f64>,
    /// Weight of the vacuum with all atoms down.
    pub ground_weight: f64,
    /// Σ_m P(n_m = n_max).
    pub top_level_population: f64,
    pub truncation_warning: bool,
}

impl FockStationaryState {
    pub fn reduced_dim(&self) -> usize {
        self.isometry.ncols()
    }

    /// Stationary density matrix on the whole Fock space.
    pub fn full_density_matrix(&self) -> CMatrix {
        &self.isometry * self.rho.data() * self.isometry.adjoint()
    }
}

fn truncation_flag(top: f64, total: f64, threshold: f64) -> bool {
    if total > 0.0 {
        top > threshold * total
    } else {
        top > 0.0
    }
}

fn planned_subspace(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<(FockBasis, OpenSystem, CMatrix)> {
    let basis = fock_basis(params, n_max, budget)?;
    let system = full_open_system(params, &basis);
    let q = system.dynamical_subspace(&basis.vacuum());
    let d = q.ncols();
    if d * d > budget.max_superoperator_dim {
        return Err(Error::Budget {
            what: "Liouvillian dimension",
            required: d * d,
            limit: budget.max_superoperator_dim,
        });
    }
    Ok((basis, system, q))
}

/// Checks both budgets without solving and returns the dynamical-subspace dimension.
pub fn check_budget(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<usize> {
    planned_subspace(params, n_max, budget).map(|(_, _, q)| q.ncols())
}

/// Stationary state of the full master equation reached from the vacuum.
pub fn solve_full_stationary(params: &SystemParams, n_max: usize, options: &FockOptions) -> Result<FockStationaryState> {
    let (basis, system, q) = planned_subspace(params, n_max, &options.budget)?;
    let liouvillian = system.restricted_liouvillian(&q);
    let solution = solve_stationary(&liouvillian, &options.solve)?;
    solution.rho.check().map_err(|e| Error::NumericalFailure {
        reason: format!("stationary state failed validation: {e}"),
        condition: solution.condition_estimate,
    })?;

    let diag = lifted_diagonal(&q, solution.rho.data());
    let mut mode_populations = vec![0.0; basis.n_modes];
    let mut atom_excitations = vec![0.0; basis.n_atoms];
    let mut top = 0.0;
    for (i, &p) in diag.iter().enumerate() {
        let (n, b) = basis.decode(i);
        for k in 0..basis.n_modes {
            mode_populations[k] += n[k] as f64 * p;
            if n[k] == n_max {
                top += p;
            }
        }
        for l in 0..basis.n_atoms {
            if b[l] {
                atom_excitations[l] += p;
            }
        }
    }
    let total: f64 = mode_populations.iter().sum();
    Ok(FockStationaryState {
        basis,
        rho: solution.rho,
        residual: solution.residual,
        asymmetry: solution.asymmetry,
        condition_estimate: solution.condition_estimate,
        total_cavity_population: total,
        mode_populations,
        atom_excitations,
        ground_weight: diag[0],
        top_level_population: top,
        truncation_warning: truncation_flag(top, total, options.truncation_threshold),
        isometry: q,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateReport {
    pub cavity_population: f64,
    pub energy: f64,
    /// Mean total excitation number of the selected state.
    pub excitation: f64,
    /// Number of (numerically) degenerate eigenstates the state was selected from.
    pub degeneracy: usize,
    pub top_level_population: f64,
    pub truncation_warning: bool,
    /// 4η/(Ng).
    pub threshold_ratio: f64,
}

/// Cavity population of the isolated, driven, uniformly coupled single-mode system in
/// the eigenstate that continues the undriven ground state |0, ↓…↓⟩.
///
/// The eigenstate is selected from the energy level with the largest vacuum overlap;
/// within that (possibly degenerate) level the state of least total excitation is
/// taken, which is the limit of adding an infinitesimal excitation energy.
pub fn ground_state_population(params: &SystemParams, n_max: usize, budget: &FockBudget) -> Result<GroundStateReport> {
    let basis = fock_basis(params, n_max, budget)?;
    if params.n_modes() != 1 {
        return Err(Error::InvalidParameter(format!(
            "ground-state check needs a single mode, got M = {}",
            params.n_modes()
        )));
    }
    let g = params.coupling[(0, 0)];
    if g.norm() == 0.0 || params.coupling.iter().any(|z| (z - g).norm() > 1e-12 * g.norm()) {
        return Err(Error::InvalidParameter(
            "ground-state check needs a uniform nonzero coupling".into(),
        ));
    }
    let ratio = 4.0 * params.drives[0].norm() / (params.n_atoms() as f64 * g.norm());
    if ratio >= 1.0 {
        return Err(Error::Threshold { ratio });
    }

    let h = hamiltonian_sparse(params, &basis);
    let q = crate::linalg::invariant_subspace(&basis.vacuum(), std::slice::from_ref(&h), 1e-10);
    let hr = h.project(&q);
    let (values, vectors) = hermitian_eigh(&hr);
    let vac_r = q.adjoint() * basis.vacuum();
    let best = (0..values.len())
        .max_by(|&a, &b| {
            let oa = vectors.column(a).dotc(&vac_r).norm_sqr();
            let ob = vectors.column(b).dotc(&vac_r).norm_sqr();
            oa.total_cmp(&ob)
        })
        .expect("nonempty spectrum");
    let energy = values[best];
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let cluster: Vec<usize> = (0..values.len())
        .filter(|&i| (values[i] - energy).abs() <= 1e-8 * scale)
        .collect();
    let p = CMatrix::from_columns(&cluster.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>());
    let excitation_r = basis.excitation_number().project(&q);
    let (exc_values, exc_vectors) = hermitian_eigh(&(p.adjoint() * &excitation_r * &p));
    let state = &q * (&p * exc_vectors.column(0));

    let rho = &state * state.adjoint();
    let diag: Vec<f64> = (0..basis.dim()).map(|i| rho[(i, i)].re).collect();
    let mut population = 0.0;
    let mut top = 0.0;
    for (i, &w) in diag.iter().enumerate() {
        let (n, _) = basis.decode(i);
        population += n[0] as f64 * w;
        if n[0] == n_max {
            top += w;
        }
    }
    Ok(GroundStateReport {
        cavity_population: population,
        energy,
        excitation: exc_values[0],
        degeneracy: cluster.len(),
        top_level_population: top,
        truncation_warning: truncation_flag(top, population, 1e-6),
        threshold_ratio: ratio,
    })
}
