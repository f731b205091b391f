use darkcav_core::fockoracle::{
    build_full_hamiltonian, solve_full_stationary, FockBasis, FockBudget, FockOptions,
};
use darkcav_core::linalg::{frobenius, C64};
use darkcav_core::weaksolver::solve_weak_stationary;
use darkcav_core::model::make_localized_coupling;
use darkcav_core::SystemParams;
use proptest::prelude::*;

fn weak_and_fock(params: &SystemParams, n_max: usize) -> (f64, f64) {
    let weak = solve_weak_stationary(params, &Default::default()).unwrap();
    let fock = solve_full_stationary(params, n_max, &FockOptions::default()).unwrap();
    fock.rho.check().unwrap();
    (weak.observables.total_cavity_population, fock.total_cavity_population)
}

#[test]
fn weak_drive_gap_scales_quadratically() {
    let base = SystemParams::single_mode(2, 0.5, 0.0).unwrap().with_detuning(0.7).with_gamma(0.1);
    let constants: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eta| {
            let (w, f) = weak_and_fock(&base.clone().with_drives(vec![C64::new(eta, 0.0)]), 3);
            (f - w).abs() / w / (eta * eta)
        })
        .collect();
    let (lo, hi) = constants
        .iter()
        .fold((f64::MAX, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    assert!(hi / lo < 1.05, "{constants:?}");
}

#[test]
fn truncation_is_stable_at_weak_drive() {
    let params = SystemParams::new(make_localized_coupling(1, 2, 0.6, 0.1, 3).unwrap(), vec![C64::new(1e-2, 0.0)])
        .unwrap()
        .with_detuning(0.4)
        .with_gamma(0.05);
    let options = FockOptions::default();
    let a = solve_full_stationary(&params, 3, &options).unwrap();
    let b = solve_full_stationary(&params, 4, &options).unwrap();
    assert!((a.total_cavity_population - b.total_cavity_population).abs() < 1e-8);
    for (x, y) in a.atom_excitations.iter().zip(&b.atom_excitations) {
        assert!((x - y).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closed_evolution_conserves_excitations(
        m in 1usize..=2, n in 1usize..=3, n_max in 1usize..=3,
        g in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
        dc in -1.0..1.0f64, da in -1.0..1.0f64,
    ) {
        prop_assume!(m <= n);
        let coupling = darkcav_core::linalg::CMatrix::from_fn(m, n, |k, l| {
            let (re, im) = g[k * n + l];
            C64::new(re, im)
        });
        let params = SystemParams::new(coupling, vec![C64::new(0.0, 0.0); m]).unwrap().with_detunings(dc, da);
        let h = build_full_hamiltonian(&params, n_max, &FockBudget::default()).unwrap();
        let basis = FockBasis::new(m, n, n_max).unwrap();
        let x = basis.excitation_number().to_dense();
        let commutator = &h * &x - &x * &h;
        prop_assert!(frobenius(&commutator) <= 1e-12 * frobenius(&h).max(1.0));
    }
}
