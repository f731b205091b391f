//! Weak-excitation model: at most one excitation (a photon in some mode or one excited
//! atom) on top of the ground state |0̲⟩, giving a (1 + M + N)-dimensional basis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::{solve_stationary, DensityMatrix, Liouvillian, OpenSystem, SolveOptions};
use crate::linalg::{real, CMatrix, CVector, SparseOperator, ONE};
use crate::model::{CollectiveDecomposition, SystemParams};

/// Index map `0 ↦ |0̲⟩`, `1..=M ↦ |C_k⟩`, `M+1..=M+N ↦ |A_l⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakBasis {
    pub n_modes: usize,
    pub n_atoms: usize,
}

impl WeakBasis {
    pub fn new(n_modes: usize, n_atoms: usize) -> Self {
        Self { n_modes, n_atoms }
    }

    pub fn of(params: &SystemParams) -> Self {
        Self::new(params.n_modes(), params.n_atoms())
    }

    pub fn dim(&self) -> usize {
        1 + self.n_modes + self.n_atoms
    }

    pub const GROUND: usize = 0;

    pub fn cavity(&self, k: usize) -> usize {
        debug_assert!(k < self.n_modes);
        1 + k
    }

    pub fn atom(&self, l: usize) -> usize {
        debug_assert!(l < self.n_atoms);
        1 + self.n_modes + l
    }

    pub fn ground_state(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[Self::GROUND] = ONE;
        v
    }
}

/// Weak-excitation Hamiltonian (constant offset dropped).
pub fn build_hamiltonian(params: &SystemParams) -> Result<CMatrix> {
    params.validate()?;
    let basis = WeakBasis::of(params);
    let mut h = CMatrix::zeros(basis.dim(), basis.dim());
    for k in 0..basis.n_modes {
        let c = basis.cavity(k);
        h[(c, c)] = real(-params.delta_c);
        h[(c, WeakBasis::GROUND)] = params.drives[k];
        h[(WeakBasis::GROUND, c)] = params.drives[k].conj();
        for l in 0..basis.n_atoms {
            let a = basis.atom(l);
            let g = params.coupling[(k, l)];
            h[(c, a)] = g * 0.5;
            h[(a, c)] = g.conj() * 0.5;
        }
    }
    for l in 0..basis.n_atoms {
        let a = basis.atom(l);
        h[(a, a)] = real(-params.delta_a);
    }
    Ok(h)
}

/// The same Hamiltonian written directly in the collective basis
/// (|0̲⟩, |C̃_j⟩, |Ã_j⟩): uncoupled pairs for j > R, ½λ_j couplings for j ≤ R and
/// drives η̃_j.
pub fn build_collective_hamiltonian(
    params: &SystemParams,
    decomposition: &CollectiveDecomposition,
) -> Result<CMatrix> {
    params.validate()?;
    let basis = WeakBasis::of(params);
    let mut h = CMatrix::zeros(basis.dim(), basis.dim());
    for j in 0..basis.n_modes {
        let c = basis.cavity(j);
        h[(c, c)] = real(-params.delta_c);
        h[(c, WeakBasis::GROUND)] = decomposition.transformed_drives[j];
        h[(WeakBasis::GROUND, c)] = decomposition.transformed_drives[j].conj();
        if j < decomposition.rank {
            let a = basis.atom(j);
            h[(c, a)] = real(0.5 * decomposition.singular_values[j]);
            h[(a, c)] = real(0.5 * decomposition.singular_values[j]);
        }
    }
    for l in 0..basis.n_atoms {
        let a = basis.atom(l);
        h[(a, a)] = real(-params.delta_a);
    }
    Ok(h)
}

/// Jump operators `√κ |0̲⟩⟨C_k|` and `√γ |0̲⟩⟨A_l|` (the latter omitted when γ = 0).
pub fn build_jumps(params: &SystemParams) -> Result<Vec<CMatrix>> {
    params.validate()?;
    let basis = WeakBasis::of(params);
    let d = basis.dim();
    let mut jumps = Vec::with_capacity(basis.n_modes + basis.n_atoms);
    let lowering = |from: usize, rate: f64| {
        let mut l = CMatrix::zeros(d, d);
        l[(WeakBasis::GROUND, from)] = real(rate.sqrt());
        l
    };
    for k in 0..basis.n_modes {
        jumps.push(lowering(basis.cavity(k), params.kappa));
    }
    if params.gamma > 0.0 {
        for l in 0..basis.n_atoms {
            jumps.push(lowering(basis.atom(l), params.gamma));
        }
    }
    Ok(jumps)
}

pub fn open_system(params: &SystemParams) -> Result<OpenSystem> {
    Ok(OpenSystem {
        hamiltonian: SparseOperator::from_dense(&build_hamiltonian(params)?),
        jumps: build_jumps(params)?
            .iter()
            .map(SparseOperator::from_dense)
            .collect(),
    })
}

/// Liouvillian on the full weak basis.
pub fn build_liouvillian(params: &SystemParams) -> Result<Liouvillian> {
    Ok(Liouvillian::new(&build_hamiltonian(params)?, &build_jumps(params)?))
}

/// Populations read off a weak-basis density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakObservables {
    /// `⟨|C_m⟩⟨C_m|⟩` per mode.
    pub cavity_populations: Vec<f64>,
    pub total_cavity_population: f64,
    /// `⟨|A_l⟩⟨A_l|⟩` per atom.
    pub atom_excitations: Vec<f64>,
    pub ground_weight: f64,
}

impl WeakObservables {
    pub fn from_density(basis: &WeakBasis, rho: &DensityMatrix) -> Self {
        let cavity_populations: Vec<f64> =
            (0..basis.n_modes).map(|k| rho.population(basis.cavity(k))).collect();
        let atom_excitations = (0..basis.n_atoms).map(|l| rho.population(basis.atom(l))).collect();
        Self {
            total_cavity_population: cavity_populations.iter().sum(),
            cavity_populations,
            atom_excitations,
            ground_weight: rho.population(WeakBasis::GROUND),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryState {
    pub basis: WeakBasis,
    /// Stationary density matrix on the full weak basis.
    pub rho: DensityMatrix,
    pub residual: f64,
    pub asymmetry: f64,
    pub condition_estimate: f64,
    /// Dimension of the dynamical subspace the solve ran on.
    pub reduced_dim: usize,
    pub observables: WeakObservables,
}

/// Stationary state reached from |0̲⟩.
///
/// The solve runs on the dynamical subspace generated from the ground state, which
/// excludes collective atomic modes that neither couple to the cavity nor decay. Those
/// would otherwise make the stationary state non-unique when γ = 0.
pub fn solve_weak_stationary(params: &SystemParams, options: &SolveOptions) -> Result<StationaryState> {
    let basis = WeakBasis::of(params);
    let system = open_system(params)?;
    let q = system.dynamical_subspace(&basis.ground_state());
    let liouvillian = system.restricted_liouvillian(&q);
    let solution = solve_stationary(&liouvillian, options)?;
    let full = &q * solution.rho.data() * q.adjoint();
    let rho = DensityMatrix::new(full).map_err(|e| Error::NumericalFailure {
        reason: format!("stationary state failed validation: {e}"),
        condition: solution.condition_estimate,
    })?;
    let observables = WeakObservables::from_density(&basis, &rho);
    Ok(StationaryState {
        basis,
        rho,
        residual: solution.residual,
        asymmetry: solution.asymmetry,
        condition_estimate: solution.condition_estimate,
        reduced_dim: q.ncols(),
        observables,
    })
}

/// How the cavity detuning follows the swept detuning Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityDetuning {
    /// Δ_C = Δ_A = Δ.
    FollowAtoms,
    /// Δ_A = Δ with Δ_C held fixed.
    Pinned(f64),
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub observables: WeakObservables,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub delta: f64,
    pub delta_c: f64,
    pub outcome: Result<SweepPoint>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub n_modes: usize,
    pub n_atoms: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    /// Total cavity population per row, NaN for failed rows.
    pub fn total_populations(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                r.outcome
                    .as_ref()
                    .map(|p| p.observables.total_cavity_population)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Stationary observables along a detuning grid, rows in grid order.
///
/// Points are solved in parallel; a failing point is recorded in its row and does not
/// abort the sweep.
pub fn sweep_detuning(
    params: &SystemParams,
    deltas: &[f64],
    cavity: CavityDetuning,
    options: &SolveOptions,
) -> Result<SweepResult> {
    params.validate()?;
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("detuning grid is empty".into()));
    }
    let rows = deltas
        .par_iter()
        .map(|&delta| {
            let delta_c = match cavity {
                CavityDetuning::FollowAtoms => delta,
                CavityDetuning::Pinned(dc) => dc,
            };
            let point = params.clone().with_detunings(delta_c, delta);
            let outcome = solve_weak_stationary(&point, options).map(|s| SweepPoint {
                observables: s.observables,
                residual: s.residual,
            });
            SweepRow {
                delta,
                delta_c,
                outcome,
            }
        })
        .collect();
    Ok(SweepResult {
        n_modes: params.n_modes(),
        n_atoms: params.n_atoms(),
        rows,
    })
}

/// Evenly spaced grid of `count` points over `[min, max]` (both ends included).
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Full width of the dip around Δ = 0, measured between the points where the
/// population climbs back to half of the neighbouring shoulder maximum.
///
/// `deltas` must be increasing. Crossings are linearly interpolated. Returns `None`
/// when either side has no interior shoulder.
pub fn measure_anti_resonance_width(deltas: &[f64], populations: &[f64]) -> Option<f64> {
    let n = deltas.len();
    if n < 3 || populations.len() != n {
        return None;
    }
    let centre = (0..n).min_by(|&a, &b| deltas[a].abs().total_cmp(&deltas[b].abs()))?;

    let mut left_peak = centre;
    while left_peak > 0 && populations[left_peak - 1] >= populations[left_peak] {
        left_peak -= 1;
    }
    let mut right_peak = centre;
    while right_peak + 1 < n && populations[right_peak + 1] >= populations[right_peak] {
        right_peak += 1;
    }
    if left_peak == 0 || right_peak == n - 1 || left_peak == centre || right_peak == centre {
        return None;
    }

    let crossing = |from: usize, to: usize, level: f64| -> Option<f64> {
        let step: isize = if to > from { 1 } else { -1 };
        let mut i = from as isize;
        while i != to as isize {
            let j = i + step;
            let (pi, pj) = (populations[i as usize], populations[j as usize]);
            if pi < level && pj >= level {
                let t = (level - pi) / (pj - pi);
                let (xi, xj) = (deltas[i as usize], deltas[j as usize]);
                return Some(xi + t * (xj - xi));
            }
            i = j;
        }
        None
    };
    let left = crossing(centre, left_peak, populations[left_peak] / 2.0)?;
    let right = crossing(centre, right_peak, populations[right_peak] / 2.0)?;
    Some(right - left)
}
