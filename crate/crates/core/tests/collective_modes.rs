mod common;

use common::{complex_matrix, complex_vec, random_system};
use darkcav_core::linalg::{frobenius, hermitian_eigenvalues, C64};
use darkcav_core::model::{make_localized_coupling, make_uniform_coupling};
use darkcav_core::{decompose, Error, SystemParams, DEFAULT_RANK_TOLERANCE};
use proptest::prelude::*;

fn check_decomposition(params: &SystemParams) -> Result<(), TestCaseError> {
    let d = decompose(params, DEFAULT_RANK_TOLERANCE).unwrap();
    let g = &params.coupling;
    let scale = frobenius(g).max(f64::MIN_POSITIVE);
    prop_assert!(frobenius(&(d.reconstruct() - g)) <= 1e-12 * scale);

    let before: f64 = params.drives.iter().map(|z| z.norm_sqr()).sum();
    let after: f64 = d.transformed_drives.iter().map(|z| z.norm_sqr()).sum();
    prop_assert!((before - after).abs() <= 1e-12 * before.max(1e-300));

    prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));

    let mut eig = hermitian_eigenvalues(&(g * g.adjoint()));
    eig.reverse();
    for (s, e) in d.singular_values.iter().zip(&eig) {
        prop_assert!((s - e.max(0.0).sqrt()).abs() <= 1e-10 * d.singular_values[0].max(1.0));
    }

    for j in 0..d.n_modes() {
        let col = d.u.column(j);
        let pivot = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let largest = col.iter().find(|z| z.norm() == pivot).unwrap();
        prop_assert!(largest.im == 0.0 && largest.re >= 0.0);
    }
    let n = d.n_atoms();
    prop_assert!(frobenius(&(d.w.adjoint() * &d.w - darkcav_core::linalg::CMatrix::identity(n, n))) <= 1e-12);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_couplings_decompose(params in random_system(8)) {
        check_decomposition(&params)?;
    }

    #[test]
    fn localized_couplings_decompose(
        m in 1usize..=3, extra in 0usize..4, g in 0.1..2.0f64, p in 0.0..0.5f64, seed in any::<u64>()
    ) {
        let n = m + extra;
        let coupling = make_localized_coupling(m, n, g, p, seed).unwrap();
        let params = SystemParams::new(coupling, vec![C64::new(0.1, 0.0); m]).unwrap();
        check_decomposition(&params)?;
    }

    #[test]
    fn uniform_coupling_has_rank_one(m in 1usize..=3, extra in 0usize..4, g in 0.01..3.0f64) {
        let n = m + extra;
        let params = SystemParams::new(make_uniform_coupling(m, n, g).unwrap(), vec![C64::new(0.1, 0.0); m]).unwrap();
        let d = decompose(&params, DEFAULT_RANK_TOLERANCE).unwrap();
        prop_assert_eq!(d.rank, 1);
        let lambda = g * ((m * n) as f64).sqrt();
        prop_assert!((d.singular_values[0] - lambda).abs() <= 1e-11 * lambda);
        check_decomposition(&params)?;
    }

    #[test]
    fn decomposition_is_reproducible(g in complex_matrix(2, 4, 1.0), eta in complex_vec(2, 0.1)) {
        let params = SystemParams::new(g, eta).unwrap();
        let a = decompose(&params, DEFAULT_RANK_TOLERANCE).unwrap();
        let b = decompose(&params, DEFAULT_RANK_TOLERANCE).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn more_modes_than_atoms_is_rejected() {
    let g = make_uniform_coupling(3, 3, 1.0).unwrap().columns(0, 2).into_owned();
    let err = SystemParams::new(g, vec![C64::new(0.1, 0.0); 3]).unwrap_err();
    assert!(matches!(err, Error::Dimension(_)), "{err:?}");
}
