mod common;

use common::{random_system, real_system};
use darkcav_core::analytic::dark_state;
use darkcav_core::lindblad::{solve_stationary, OpenSystem, SolveOptions};
use darkcav_core::linalg::{frobenius, hermitian_eigenvalues, CMatrix, SparseOperator, C64};
use darkcav_core::weaksolver::{
    build_collective_hamiltonian, build_hamiltonian, build_jumps, build_liouvillian, linspace,
    solve_weak_stationary, sweep_detuning, CavityDetuning, WeakBasis,
};
use darkcav_core::{decompose, SystemParams, DEFAULT_RANK_TOLERANCE};
use proptest::prelude::*;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationary_residual_is_small(
        params in random_system(5), delta in -3.0..3.0f64, gamma in 0.0..1.0f64
    ) {
        let params = params.with_detuning(delta).with_gamma(gamma);
        let state = solve_weak_stationary(&params, &opts()).unwrap();
        let l = build_liouvillian(&params).unwrap();
        let residual = frobenius(&l.apply(state.rho.data()));
        prop_assert!(residual <= 1e-10 * l.norm(), "{residual:e}");
        state.rho.check().unwrap();
        prop_assert!(state.observables.cavity_populations.iter().all(|&p| p >= -1e-10));
    }

    #[test]
    fn population_is_even_in_detuning(
        params in real_system(4), delta in 0.0..4.0f64, gamma in 0.0..0.5f64
    ) {
        let grid = [-delta, delta];
        let sweep = sweep_detuning(&params.with_gamma(gamma), &grid, CavityDetuning::FollowAtoms, &opts()).unwrap();
        let p = sweep.total_populations();
        prop_assert!((p[0] - p[1]).abs() <= 1e-10 * p[0].abs().max(1e-12), "{p:?}");
    }

    #[test]
    fn losses_drive_into_dark_state(params in random_system(6), delta_c in -2.0..2.0f64) {
        let params = params.with_detunings(delta_c, 0.0);
        let d = decompose(&params, DEFAULT_RANK_TOLERANCE).unwrap();
        let dark = dark_state(&d).unwrap();
        let weak = dark.weak_vector(&d);
        let basis = WeakBasis::of(&params);
        for k in 0..basis.n_modes {
            prop_assert_eq!(weak[basis.cavity(k)].norm(), 0.0);
        }
        let state = solve_weak_stationary(&params, &opts()).unwrap();
        prop_assert!(state.rho.fidelity_with(&weak) >= 1.0 - 1e-8);
    }

    #[test]
    fn collective_basis_is_equivalent(
        params in random_system(5), delta in -2.0..2.0f64, gamma in 0.0..0.5f64
    ) {
        let params = params.with_detuning(delta).with_gamma(gamma);
        let d = decompose(&params, DEFAULT_RANK_TOLERANCE).unwrap();
        let h = build_hamiltonian(&params).unwrap();
        let hc = build_collective_hamiltonian(&params, &d).unwrap();
        let t = d.weak_basis_transform();
        prop_assert!(frobenius(&(t.adjoint() * &h * &t - &hc)) <= 1e-10 * frobenius(&h));
        for (a, b) in hermitian_eigenvalues(&h).iter().zip(&hermitian_eigenvalues(&hc)) {
            prop_assert!((a - b).abs() <= 1e-10);
        }

        // Equal loss rates make the jumps basis independent.
        let rotated: Vec<SparseOperator> = build_jumps(&params)
            .unwrap()
            .iter()
            .map(|l| SparseOperator::from_dense(&(t.adjoint() * l * &t)))
            .collect();
        let system = OpenSystem { hamiltonian: SparseOperator::from_dense(&hc), jumps: rotated };
        let q = system.dynamical_subspace(&WeakBasis::of(&params).ground_state());
        let solution = solve_stationary(&system.restricted_liouvillian(&q), &opts()).unwrap();
        let rho_c = &q * solution.rho.data() * q.adjoint();
        let basis = WeakBasis::of(&params);
        let pop_c: f64 = (0..basis.n_modes).map(|j| rho_c[(basis.cavity(j), basis.cavity(j))].re).sum();
        let pop = solve_weak_stationary(&params, &opts()).unwrap().observables.total_cavity_population;
        prop_assert!((pop - pop_c).abs() <= 1e-10 * pop.max(1e-12), "{pop:e} vs {pop_c:e}");
    }

    #[test]
    fn liouvillian_spectrum_is_stable(params in random_system(4), delta in -2.0..2.0f64, gamma in 0.0..1.0f64) {
        let l = build_liouvillian(&params.with_detuning(delta).with_gamma(gamma)).unwrap();
        prop_assert!(l.eigenvalues().iter().all(|z| z.re <= 1e-9));
        prop_assert!(l.trace_drift() <= 1e-12 * l.norm());
    }
}

/// Equal singular values: relabelling the cavity modes must not change observables.
#[test]
fn degenerate_ordering_does_not_matter() {
    let g = CMatrix::from_row_slice(
        2,
        3,
        &[C64::new(0.8, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)],
    );
    let drives = vec![C64::new(0.1, 0.0), C64::new(0.0, 0.05)];
    let swapped = CMatrix::from_fn(2, 3, |i, j| g[(1 - i, j)]);
    let swapped_drives = vec![drives[1], drives[0]];
    let a = SystemParams::new(g, drives).unwrap().with_gamma(0.2);
    let b = SystemParams::new(swapped, swapped_drives).unwrap().with_gamma(0.2);
    let da = decompose(&a, DEFAULT_RANK_TOLERANCE).unwrap();
    assert_eq!(da.singular_values[0], da.singular_values[1]);
    for delta in linspace(-2.0, 2.0, 9) {
        let pa = solve_weak_stationary(&a.clone().with_detuning(delta), &opts()).unwrap();
        let pb = solve_weak_stationary(&b.clone().with_detuning(delta), &opts()).unwrap();
        let (x, y) = (pa.observables.total_cavity_population, pb.observables.total_cavity_population);
        assert!((x - y).abs() <= 1e-12 * x.max(1e-12), "{x:e} vs {y:e}");
    }
}

#[test]
fn sweep_rows_follow_grid_order() {
    let params = SystemParams::single_mode(3, 0.4, 0.1).unwrap().with_gamma(0.05);
    let grid = linspace(-4.0, 4.0, 41);
    let sweep = sweep_detuning(&params, &grid, CavityDetuning::Pinned(0.3), &opts()).unwrap();
    assert_eq!(sweep.deltas(), grid);
    assert!(sweep.rows.iter().all(|r| r.delta_c == 0.3 && r.outcome.is_ok()));
}
