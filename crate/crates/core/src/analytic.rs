//! Closed-form cavity populations, the dark state and the observability conditions
//! for the dark anti-resonance.
//!
//! Single-mode formulas assume a real drive η, Δ_A = Δ_C = Δ and a single collective
//! splitting λ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{real, CMatrix, CVector, C64, ZERO};
use crate::model::{CollectiveDecomposition, SystemParams};
use crate::weaksolver::WeakBasis;

/// Two independent Lorentzians at Δ = ∓λ/2, valid for well-separated peaks.
pub fn two_lorentzian_population(delta: f64, lambda: f64, eta: f64, gamma: f64, kappa: f64) -> f64 {
    let eta2 = eta * eta;
    let broad = (gamma + kappa) * (gamma + kappa);
    [1.0, -1.0]
        .iter()
        .map(|s| {
            let x = delta + s * lambda / 2.0;
            4.0 * eta2 / (16.0 * x * x + 16.0 * eta2 + broad)
        })
        .sum()
}

/// Exact weak-excitation cavity population at γ = 0.
pub fn population_gamma_zero(delta: f64, lambda: f64, eta: f64, kappa: f64) -> f64 {
    let (d2, e2, l2, k2) = (delta * delta, eta * eta, lambda * lambda, kappa * kappa);
    let num = 16.0 * d2 * e2;
    if num == 0.0 {
        return 0.0;
    }
    let base = 4.0 * e2 + l2;
    num / (16.0 * d2 * d2 + 4.0 * d2 * (8.0 * e2 + k2 - 2.0 * l2) + base * base)
}

/// Exact weak-excitation cavity population at Δ = 0 as a function of γ.
pub fn population_delta_zero(gamma: f64, lambda: f64, eta: f64, kappa: f64) -> f64 {
    let (e2, l2) = (eta * eta, lambda * lambda);
    let gk = gamma * (gamma + kappa);
    let num = 4.0 * e2 * gamma * (4.0 * e2 + gk);
    if num == 0.0 {
        return 0.0;
    }
    let den = gamma * (8.0 * e2 + kappa * kappa) * (4.0 * e2 + gk)
        + 2.0 * kappa * l2 * (2.0 * e2 + gk)
        + (gamma + kappa) * l2 * l2;
    num / den
}

/// Approximate full width of the dark anti-resonance.
pub fn anti_resonance_width(lambda: f64, eta: f64, kappa: f64) -> f64 {
    (4.0 * eta * eta + lambda * lambda) / (2.0 * (16.0 * eta * eta + kappa * kappa)).sqrt()
}

/// `4η/(Ng)`, the drive relative to the collective threshold.
pub fn threshold_ratio(eta: f64, g: f64, n_atoms: usize) -> f64 {
    4.0 * eta / (n_atoms as f64 * g)
}

/// Below-threshold cavity population of the driven, isolated symmetric system:
/// `−¼ ln(1 − (4η/(Ng))²)`.
pub fn milburn_alsing_population(eta: f64, g: f64, n_atoms: usize) -> Result<f64> {
    let x = threshold_ratio(eta, g, n_atoms);
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(Error::Threshold { ratio: x.abs() });
    }
    Ok(-0.25 * (-x * x).ln_1p())
}

/// Leading small-drive form `(2η/(Ng))²`.
pub fn milburn_alsing_approx(eta: f64, g: f64, n_atoms: usize) -> f64 {
    let y = 2.0 * eta / (n_atoms as f64 * g);
    y * y
}

/// Zero-energy eigenstate of the Hamiltonian at Δ_A = 0 with an empty cavity.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkState {
    /// Normalized amplitude on |0̲⟩ (real, equal to 1/𝒩).
    pub ground_amplitude: C64,
    /// Normalized amplitudes on the collective atomic states |Ã_j⟩ (length N).
    pub atomic_amplitudes: Vec<C64>,
    /// 𝒩 with 𝒩² = 1 + 4 Σ_j |η̃_j|²/λ_j².
    pub norm: f64,
    n_modes: usize,
}

impl DarkState {
    /// State vector in the collective weak basis (|0̲⟩, |C̃_j⟩, |Ã_j⟩).
    pub fn collective_vector(&self) -> CVector {
        let n = self.atomic_amplitudes.len();
        let basis = WeakBasis::new(self.n_modes, n);
        let mut v = CVector::zeros(basis.dim());
        v[WeakBasis::GROUND] = self.ground_amplitude;
        for (j, &a) in self.atomic_amplitudes.iter().enumerate() {
            v[basis.atom(j)] = a;
        }
        v
    }

    /// State vector in the original weak basis (|0̲⟩, |C_k⟩, |A_l⟩).
    pub fn weak_vector(&self, decomposition: &CollectiveDecomposition) -> CVector {
        decomposition.weak_basis_transform() * self.collective_vector()
    }

    /// `‖H ψ_D‖` for a weak-basis Hamiltonian.
    pub fn residual(&self, hamiltonian: &CMatrix, decomposition: &CollectiveDecomposition) -> f64 {
        (hamiltonian * self.weak_vector(decomposition)).norm()
    }
}

/// Dark state built from the collective drives: amplitudes −2η̃_j/λ_j on |Ã_j⟩.
///
/// Fails when a collective cavity mode without coupling (j > R) is driven, since
/// nothing can cancel that drive.
pub fn dark_state(decomposition: &CollectiveDecomposition) -> Result<DarkState> {
    let drives = &decomposition.transformed_drives;
    let scale = drives.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    for (j, z) in drives.iter().enumerate().skip(decomposition.rank) {
        let drive = z.norm();
        if drive > 1e-12 * scale {
            return Err(Error::NoDarkState { mode: j, drive });
        }
    }
    let mut atomic: Vec<C64> = vec![ZERO; decomposition.n_atoms()];
    for (j, &lambda) in decomposition.retained().iter().enumerate() {
        atomic[j] = -drives[j] * 2.0 / lambda;
    }
    let norm = (1.0 + atomic.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt();
    Ok(DarkState {
        ground_amplitude: real(1.0 / norm),
        atomic_amplitudes: atomic.iter().map(|a| a / norm).collect(),
        norm,
        n_modes: decomposition.n_modes(),
    })
}

/// Factor standing in for "≫" in the suppression condition.
pub const MUCH_GREATER_FACTOR: f64 = 10.0;
/// `|η| ≤ WEAK_DRIVE_FACTOR · κ` is taken as the weak-driving regime.
pub const WEAK_DRIVE_FACTOR: f64 = 0.1;

/// Observability conditions for one collective mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeObservability {
    pub mode: usize,
    pub lambda: f64,
    pub drive: f64,
    /// λ² ≤ κ² + 16|η̃|²: the dip is not just the gap between split peaks.
    pub distinguishable: bool,
    /// (κ² + 16|η̃|²) − λ²; non-negative when `distinguishable`.
    pub distinguishable_margin: f64,
    /// λ² ≥ 10·(2γ/κ)(8|η̃|² + κ²): spontaneous emission does not fill the dip.
    pub suppressed: bool,
    /// λ² / ((2γ/κ)(8|η̃|² + κ²)); infinite when γ = 0.
    pub suppression_ratio: f64,
    pub width_estimate: f64,
}

impl ModeObservability {
    pub fn observable(&self) -> bool {
        self.distinguishable && self.suppressed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Observable,
    /// A window exists but no collective splitting falls inside it.
    NotObservable,
    /// Spontaneous emission is too strong for any splitting to show the dip.
    WindowEmpty,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Observable => "observable",
            Verdict::NotObservable => "not observable",
            Verdict::WindowEmpty => "not observable (window empty)",
        })
    }
}

/// Inputs that do not belong to the system itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityTarget {
    /// Single-atom coupling g used for the atom-number estimate.
    pub single_atom_g: Option<f64>,
    /// Collective splitting to aim for, usually κ.
    pub target_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub kappa: f64,
    pub gamma: f64,
    /// 2γ/κ.
    pub emission_ratio: f64,
    /// Lower edge √(2γκ) of the splitting window.
    pub window_lower: f64,
    /// Upper edge κ of the splitting window.
    pub window_upper: f64,
    /// True when the strongest-drive mode admits no λ satisfying both conditions.
    pub window_empty: bool,
    pub modes: Vec<ModeObservability>,
    /// At least one mode satisfies both conditions.
    pub condition1_satisfied: bool,
    pub condition2_satisfied: bool,
    pub any_mode_observable: bool,
    pub weak_drive: bool,
    pub max_drive: f64,
    /// `(target_λ / g)²` when a single-atom coupling is supplied.
    pub atoms_required: Option<f64>,
    pub verdict: Verdict,
}

/// Evaluates both observability conditions per collective mode.
pub fn observability_report(
    params: &SystemParams,
    decomposition: &CollectiveDecomposition,
    target: &ObservabilityTarget,
) -> Result<ObservabilityReport> {
    params.validate()?;
    let (kappa, gamma) = (params.kappa, params.gamma);
    let emission_ratio = 2.0 * gamma / kappa;
    let modes: Vec<ModeObservability> = decomposition
        .singular_values
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let lambda = if j < decomposition.rank { lambda } else { 0.0 };
            let drive = decomposition.transformed_drives[j].norm();
            let (l2, e2) = (lambda * lambda, drive * drive);
            let upper = kappa * kappa + 16.0 * e2;
            let lower = emission_ratio * (8.0 * e2 + kappa * kappa);
            let suppression_ratio = if lower > 0.0 { l2 / lower } else { f64::INFINITY };
            ModeObservability {
                mode: j,
                lambda,
                drive,
                distinguishable: l2 <= upper,
                distinguishable_margin: upper - l2,
                suppressed: lambda > 0.0 && suppression_ratio >= MUCH_GREATER_FACTOR,
                suppression_ratio,
                width_estimate: anti_resonance_width(lambda, drive, kappa),
            }
        })
        .collect();

    let max_drive = params.drives.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let window_empty = {
        let e2 = decomposition
            .transformed_drives
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max);
        MUCH_GREATER_FACTOR * emission_ratio * (8.0 * e2 + kappa * kappa) > kappa * kappa + 16.0 * e2
    };
    let any_mode_observable = modes.iter().any(ModeObservability::observable);
    let verdict = if any_mode_observable {
        Verdict::Observable
    } else if window_empty {
        Verdict::WindowEmpty
    } else {
        Verdict::NotObservable
    };
    let atoms_required = target.single_atom_g.map(|g| {
        let r = target.target_lambda / g;
        r * r
    });
    Ok(ObservabilityReport {
        kappa,
        gamma,
        emission_ratio,
        window_lower: (2.0 * gamma * kappa).sqrt(),
        window_upper: kappa,
        window_empty,
        condition1_satisfied: modes.iter().any(|m| m.distinguishable && m.lambda > 0.0),
        condition2_satisfied: modes.iter().any(|m| m.suppressed),
        any_mode_observable,
        weak_drive: max_drive <= WEAK_DRIVE_FACTOR * kappa,
        max_drive,
        modes,
        atoms_required,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{decompose, make_uniform_coupling};
    use approx::assert_relative_eq;

    #[test]
    fn two_lorentzian_values() {
        assert_eq!(two_lorentzian_population(0.3, 2.0, 0.0, 0.1, 1.0), 0.0);
        let v = two_lorentzian_population(0.0, 5.0, 0.1, 0.0, 1.0);
        assert_relative_eq!(v, 2.0 * 0.04 / (16.0 * 6.25 + 0.16 + 1.0), max_relative = 1e-15);
        assert!((v - 7.9e-4).abs() < 1e-5);
        // far-separated peak centre: the near Lorentzian dominates
        let lambda = 200.0;
        let at_peak = two_lorentzian_population(lambda / 2.0, lambda, 0.1, 0.0, 1.0);
        assert_relative_eq!(at_peak, 0.04 / (0.16 + 1.0), max_relative = 1e-4);
    }

    #[test]
    fn gamma_zero_population() {
        for (l, e) in [(1.0, 0.1), (5.0, 0.3), (0.5, 0.0)] {
            assert_eq!(population_gamma_zero(0.0, l, e, 1.0), 0.0);
        }
        // anti-resonance flank rises monotonically away from the origin
        let p: Vec<f64> = [0.01, 0.05, 0.1, 0.2].iter().map(|&d| population_gamma_zero(d, 1.0, 0.1, 1.0)).collect();
        assert!(p[0] > 0.0 && p.windows(2).all(|w| w[1] > w[0]));
        // independent evaluation at Δ = 0.05
        let (d, l, e) = (0.05f64, 1.0f64, 0.1f64);
        let expected = 16.0 * d.powi(2) * e.powi(2)
            / (16.0 * d.powi(4) + 4.0 * d.powi(2) * (8.0 * e.powi(2) + 1.0 - 2.0 * l * l) + (4.0 * e.powi(2) + 1.0).powi(2));
        assert_relative_eq!(p[1], expected, max_relative = 1e-15);
    }

    #[test]
    fn delta_zero_population_limits() {
        assert_eq!(population_delta_zero(0.0, 0.5, 0.1, 1.0), 0.0);
        // λ = 0 reduces to the driven two-level cavity value 4η²/(8η² + κ²)
        for gamma in [0.01, 0.3, 2.0] {
            assert_relative_eq!(
                population_delta_zero(gamma, 0.0, 0.1, 1.0),
                0.04 / (0.08 + 1.0),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn width_values() {
        assert_relative_eq!(anti_resonance_width(1.0, 0.1, 1.0), 1.04 / (2.0f64 * 1.16).sqrt(), max_relative = 1e-15);
        assert!((anti_resonance_width(1.0, 0.1, 1.0) - 0.683).abs() < 1e-3);
        assert_eq!(anti_resonance_width(0.0, 0.0, 1.0), 0.0);
    }

    #[test]
    fn milburn_alsing_values() {
        assert_eq!(milburn_alsing_population(0.0, 1.0, 4).unwrap(), 0.0);
        // 4η/(Ng) = 0.2
        let (eta, g, n) = (0.05, 1.0, 1);
        assert_relative_eq!(milburn_alsing_population(eta, g, n).unwrap(), -0.25 * 0.96f64.ln(), max_relative = 1e-15);
        assert!((milburn_alsing_population(eta, g, n).unwrap() - 0.0102).abs() < 1e-4);
        assert_relative_eq!(milburn_alsing_approx(eta, g, n), 0.01, max_relative = 1e-14);
        assert!(matches!(milburn_alsing_population(0.25, 1.0, 1), Err(Error::Threshold { .. })));
        assert!(matches!(milburn_alsing_population(0.3, 1.0, 1), Err(Error::Threshold { .. })));
        assert!(milburn_alsing_population(0.2499, 1.0, 1).unwrap() > 1.0);
    }

    #[test]
    fn single_mode_dark_state_amplitudes() {
        let p = SystemParams::single_mode(1, 0.5, 0.05).unwrap();
        let d = decompose(&p, 1e-10).unwrap();
        let ds = dark_state(&d).unwrap();
        let n = 1.04f64.sqrt();
        assert_relative_eq!(ds.norm, n, max_relative = 1e-15);
        assert_relative_eq!(ds.ground_amplitude.re, 1.0 / n, max_relative = 1e-15);
        assert_relative_eq!(ds.atomic_amplitudes[0].re, -0.2 / n, max_relative = 1e-14);
        let v = ds.collective_vector();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert_eq!(v[1], ZERO);
    }

    #[test]
    fn undriven_dark_state_is_vacuum() {
        let p = SystemParams::single_mode(3, 0.5, 0.0).unwrap();
        let d = decompose(&p, 1e-10).unwrap();
        let ds = dark_state(&d).unwrap();
        assert_eq!(ds.ground_amplitude, real(1.0));
        assert!(ds.atomic_amplitudes.iter().all(|a| *a == ZERO));
    }

    #[test]
    fn driven_uncoupled_mode_has_no_dark_state() {
        let p = SystemParams::new(make_uniform_coupling(2, 2, 0.5).unwrap(), vec![real(0.1), real(0.0)]).unwrap();
        let d = decompose(&p, 1e-10).unwrap();
        assert_eq!(d.rank, 1);
        assert!(matches!(dark_state(&d), Err(Error::NoDarkState { mode: 1, .. })));
        // the symmetric drive only pumps the coupled collective mode
        let p = p.with_drives(vec![real(0.1), real(0.1)]);
        assert!(dark_state(&decompose(&p, 1e-10).unwrap()).is_ok());
    }

    fn report(lambda: f64, eta: f64, gamma: f64, g: Option<f64>) -> ObservabilityReport {
        let p = SystemParams::single_mode(1, lambda, eta).unwrap().with_gamma(gamma);
        let d = decompose(&p, 1e-10).unwrap();
        observability_report(&p, &d, &ObservabilityTarget { single_atom_g: g, target_lambda: 1.0 }).unwrap()
    }

    #[test]
    fn observability_anchors() {
        let r = report(1.0, 0.01, 0.0, Some(0.0075));
        assert_eq!(r.window_lower, 0.0);
        assert!(r.condition2_satisfied);
        assert_eq!(r.verdict, Verdict::Observable);
        let n = r.atoms_required.unwrap();
        assert!((n - 1.0 / 0.0075f64.powi(2)).abs() < 1e-6 && n > 1.5e4 && n < 2.0e4);

        let r = report(1.0, 0.01, 3.25, None);
        assert!((r.emission_ratio - 6.5).abs() < 1e-15);
        assert!(r.window_empty);
        assert_eq!(r.verdict, Verdict::WindowEmpty);
        assert_eq!(r.verdict.to_string(), "not observable (window empty)");

        // splitting far above κ: suppressed but not distinguishable
        let r = report(5.0, 0.01, 0.001, None);
        assert!(!r.condition1_satisfied && r.condition2_satisfied);
        assert_eq!(r.verdict, Verdict::NotObservable);
        assert!(r.weak_drive);
        assert!(r.modes[0].width_estimate > 0.0);
    }
}
