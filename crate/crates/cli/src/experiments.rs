//! Experiment drivers behind the subcommands. Each returns the text it emits.

use std::fmt::Write as _;

use darkcav_core::analytic::{dark_state, observability_report, ObservabilityReport, ObservabilityTarget};
use darkcav_core::fockoracle::{check_budget, solve_full_stationary, FockBudget, FockOptions};
use darkcav_core::lindblad::SolveOptions;
use darkcav_core::linalg::C64;
use darkcav_core::weaksolver::{
    build_hamiltonian, linspace, solve_weak_stationary, sweep_detuning, CavityDetuning, SweepResult,
};
use darkcav_core::{decompose, CollectiveDecomposition, Error as CoreError, DEFAULT_RANK_TOLERANCE};
use serde::Serialize;

use crate::config::{ExperimentConfig, ObservabilityConfig};
use crate::error::CliError;
use crate::output::{header, number};

/// Relative gaps below this are treated as exact agreement and left out of the order fit.
pub const EXACT_GAP: f64 = 1e-12;
/// Allowed deviation of the fitted convergence order from 2.
pub const ORDER_TOLERANCE: f64 = 0.5;

fn status_token(e: &CoreError) -> &'static str {
    match e {
        CoreError::Dimension(_) => "dimension",
        CoreError::InvalidParameter(_) => "invalid-parameter",
        CoreError::NumericalFailure { .. } => "numerical-failure",
        CoreError::Degenerate { .. } => "degenerate",
        CoreError::NoDarkState { .. } => "no-dark-state",
        CoreError::Threshold { .. } => "threshold",
        CoreError::Budget { .. } => "budget",
    }
}

/// Output of a sweep: the CSV text and the number of failed grid points.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: String,
    pub result: SweepResult,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.result.failures()
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput, CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("the sweep subcommand needs a [sweep] block".into()))?;
    let params = config.system_params()?;
    let deltas = linspace(sweep.delta_min, sweep.delta_max, sweep.count);
    let cavity = sweep.pin_delta_c.map_or(CavityDetuning::FollowAtoms, CavityDetuning::Pinned);
    let result = sweep_detuning(&params, &deltas, cavity, &SolveOptions::default())?;

    let digits = config.output.precision;
    let (m, n) = (result.n_modes, result.n_atoms);
    let mut csv = header("sweep", config);
    let mut columns = vec!["delta".to_string(), "delta_c".to_string()];
    columns.extend((0..m).map(|k| format!("pop_mode_{k}")));
    columns.push("total_population".into());
    columns.push("ground_weight".into());
    columns.extend((0..n).map(|l| format!("atom_exc_{l}")));
    columns.push("residual".into());
    columns.push("status".into());
    csv.push_str(&columns.join(","));
    csv.push('\n');

    for row in &result.rows {
        let mut fields = vec![number(row.delta, digits), number(row.delta_c, digits)];
        match &row.outcome {
            Ok(point) => {
                let obs = &point.observables;
                fields.extend(obs.cavity_populations.iter().map(|&p| number(p, digits)));
                fields.push(number(obs.total_cavity_population, digits));
                fields.push(number(obs.ground_weight, digits));
                fields.extend(obs.atom_excitations.iter().map(|&p| number(p, digits)));
                fields.push(number(point.residual, digits));
                fields.push("ok".into());
            }
            Err(e) => {
                fields.extend(std::iter::repeat_n("nan".to_string(), m + 2 + n + 1));
                fields.push(status_token(e).into());
            }
        }
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    Ok(SweepOutput { csv, result })
}

fn target(config: &ExperimentConfig) -> ObservabilityTarget {
    let block = config.observability.clone().unwrap_or(ObservabilityConfig {
        single_atom_g: None,
        target_lambda: 1.0,
    });
    ObservabilityTarget {
        single_atom_g: block.single_atom_g,
        target_lambda: block.target_lambda,
    }
}

fn write_observability(out: &mut String, report: &ObservabilityReport) {
    writeln!(out, "kappa: {}", report.kappa).unwrap();
    writeln!(out, "gamma: {}", report.gamma).unwrap();
    writeln!(out, "emission_ratio (2 gamma/kappa): {}", report.emission_ratio).unwrap();
    writeln!(out, "window: [{}, {}]", report.window_lower, report.window_upper).unwrap();
    writeln!(out, "window_empty: {}", report.window_empty).unwrap();
    for m in &report.modes {
        writeln!(
            out,
            "mode {}: lambda {} drive {} distinguishable {} (margin {}) suppressed {} (ratio {}) width {}",
            m.mode,
            m.lambda,
            m.drive,
            m.distinguishable,
            m.distinguishable_margin,
            m.suppressed,
            m.suppression_ratio,
            m.width_estimate
        )
        .unwrap();
    }
    writeln!(out, "condition1_satisfied: {}", report.condition1_satisfied).unwrap();
    writeln!(out, "condition2_satisfied: {}", report.condition2_satisfied).unwrap();
    writeln!(out, "weak_drive: {} (max drive {})", report.weak_drive, report.max_drive).unwrap();
    if let Some(n) = report.atoms_required {
        writeln!(out, "atoms_required: {n}").unwrap();
    }
    writeln!(out, "verdict: {}", report.verdict).unwrap();
}

/// Text and JSON renderings of a report.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub json: String,
}

pub fn run_observability(config: &ExperimentConfig) -> Result<Report, CliError> {
    let params = config.system_params()?;
    let decomposition = decompose(&params, DEFAULT_RANK_TOLERANCE)?;
    let report = observability_report(&params, &decomposition, &target(config))?;
    let mut text = String::new();
    write_observability(&mut text, &report);
    Ok(Report {
        text,
        json: serde_json::to_string_pretty(&report).expect("report serializes"),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DarkStateReport {
    pub config_sha256: String,
    /// ‖H ψ_D‖.
    pub residual: f64,
    /// ⟨ψ_D|ρ_ss|ψ_D⟩.
    pub fidelity: f64,
    pub norm: f64,
    pub ground_amplitude: f64,
    /// Amplitudes on the collective atomic states as (re, im) pairs.
    pub atomic_amplitudes: Vec<(f64, f64)>,
    pub stationary_residual: f64,
    pub stationary_cavity_population: f64,
    pub observability: ObservabilityReport,
}

/// Checks the dark state at Δ_A = 0 (Δ_C as configured).
pub fn run_darkstate(config: &ExperimentConfig) -> Result<(Report, DarkStateReport), CliError> {
    let params = config.system_params()?;
    let params = params.clone().with_detunings(params.delta_c, 0.0);
    let decomposition = decompose(&params, DEFAULT_RANK_TOLERANCE)?;
    let dark = dark_state(&decomposition)?;
    let h = build_hamiltonian(&params)?;
    let residual = dark.residual(&h, &decomposition);
    let stationary = solve_weak_stationary(&params, &SolveOptions::default())?;
    let fidelity = stationary.rho.fidelity_with(&dark.weak_vector(&decomposition));
    let observability = observability_report(&params, &decomposition, &target(config))?;

    let report = DarkStateReport {
        config_sha256: config.digest(),
        residual,
        fidelity,
        norm: dark.norm,
        ground_amplitude: dark.ground_amplitude.re,
        atomic_amplitudes: dark.atomic_amplitudes.iter().map(|z| (z.re, z.im)).collect(),
        stationary_residual: stationary.residual,
        stationary_cavity_population: stationary.observables.total_cavity_population,
        observability,
    };
    let mut text = String::new();
    writeln!(text, "dark-state residual ||H psi_D||: {:e}", report.residual).unwrap();
    writeln!(text, "stationary fidelity: {}", report.fidelity).unwrap();
    writeln!(text, "infidelity: {:e}", 1.0 - report.fidelity).unwrap();
    writeln!(text, "normalization: {}", report.norm).unwrap();
    writeln!(text, "stationary cavity population: {:e}", report.stationary_cavity_population).unwrap();
    write_observability(&mut text, &report.observability);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    Ok((Report { text, json }, report))
}

#[derive(Debug, Clone, Serialize)]
struct SvdJson {
    rank: usize,
    singular_values: Vec<f64>,
    transformed_drives: Vec<(f64, f64)>,
    u: Vec<Vec<(f64, f64)>>,
    w: Vec<Vec<(f64, f64)>>,
    reconstruction_error: f64,
}

fn rows(m: &darkcav_core::linalg::CMatrix) -> Vec<Vec<(f64, f64)>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
        .collect()
}

fn complex(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

pub fn run_svd(config: &ExperimentConfig) -> Result<(Report, CollectiveDecomposition), CliError> {
    let params = config.system_params()?;
    let d = decompose(&params, DEFAULT_RANK_TOLERANCE)?;
    let reconstruction_error = (d.reconstruct() - &params.coupling).norm();
    let mut text = String::new();
    writeln!(text, "modes: {}  atoms: {}  rank: {}", d.n_modes(), d.n_atoms(), d.rank).unwrap();
    for (j, s) in d.singular_values.iter().enumerate() {
        writeln!(text, "lambda_{j}: {s}  drive_{j}: {}", complex(d.transformed_drives[j])).unwrap();
    }
    writeln!(text, "reconstruction error: {reconstruction_error:e}").unwrap();
    writeln!(text, "U:").unwrap();
    for i in 0..d.u.nrows() {
        let row: Vec<String> = (0..d.u.ncols()).map(|j| complex(d.u[(i, j)])).collect();
        writeln!(text, "  {}", row.join("  ")).unwrap();
    }
    let json = serde_json::to_string_pretty(&SvdJson {
        rank: d.rank,
        singular_values: d.singular_values.clone(),
        transformed_drives: d.transformed_drives.iter().map(|z| (z.re, z.im)).collect(),
        u: rows(&d.u),
        w: rows(&d.w),
        reconstruction_error,
    })
    .expect("svd serializes");
    Ok((Report { text, json }, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub eta: f64,
    pub pop_weak: f64,
    pub pop_fock: f64,
    /// |pop_fock − pop_weak| / pop_weak, zero when both agree exactly.
    pub relative_gap: f64,
    pub truncation_warning: bool,
}

#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub csv: String,
    pub rows: Vec<OracleRow>,
    /// Least-squares slope of log(gap) against log(η); `None` with fewer than two usable points.
    pub order: Option<f64>,
}

impl OracleOutput {
    pub fn order_ok(&self) -> bool {
        self.order.is_none_or(|p| (p - 2.0).abs() <= ORDER_TOLERANCE)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Drive vector for a ladder value: the configured drive direction rescaled so the
/// strongest mode has amplitude `eta`.
fn ladder_drives(config: &ExperimentConfig, base: &[C64], eta: f64) -> Result<Vec<C64>, CliError> {
    let peak = base.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(CliError::Validation(format!(
            "oracle needs a nonzero drive direction in system.drives (got {:?})",
            config.system.drives
        )));
    }
    Ok(base.iter().map(|z| z * (eta / peak)).collect())
}

pub fn run_oracle(config: &ExperimentConfig) -> Result<OracleOutput, CliError> {
    let oracle = config
        .oracle
        .as_ref()
        .ok_or_else(|| CliError::Validation("the oracle subcommand needs an [oracle] block".into()))?;
    let base = config.system_params()?.with_detuning(oracle.delta);
    let options = FockOptions {
        budget: FockBudget {
            max_hilbert_dim: oracle.max_hilbert_dim,
            max_superoperator_dim: oracle.max_superoperator_dim,
        },
        ..FockOptions::default()
    };
    // Budgets are checked for every ladder point before the first solve.
    let mut ladder = Vec::with_capacity(oracle.drives.len());
    for &eta in &oracle.drives {
        let params = base.clone().with_drives(ladder_drives(config, &base.drives, eta)?);
        check_budget(&params, oracle.n_max, &options.budget)?;
        ladder.push((eta, params));
    }

    let mut rows = Vec::with_capacity(ladder.len());
    for (eta, params) in &ladder {
        let weak = solve_weak_stationary(params, &options.solve)?;
        let fock = solve_full_stationary(params, oracle.n_max, &options)?;
        let pop_weak = weak.observables.total_cavity_population;
        let pop_fock = fock.total_cavity_population;
        let gap = (pop_weak - pop_fock).abs();
        rows.push(OracleRow {
            eta: *eta,
            pop_weak,
            pop_fock,
            relative_gap: if gap == 0.0 { 0.0 } else { gap / pop_weak.abs() },
            truncation_warning: fock.truncation_warning,
        });
    }
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.eta > 0.0 && r.relative_gap > EXACT_GAP)
        .map(|r| (r.eta, r.relative_gap))
        .collect();
    let order = log_log_slope(&fit);

    let digits = config.output.precision;
    let mut csv = header("oracle", config);
    match order {
        Some(p) => writeln!(csv, "# fitted-order: {}", number(p, digits)).unwrap(),
        None => csv.push_str("# fitted-order: none\n"),
    }
    csv.push_str("eta,pop_weak,pop_fock,relative_gap,truncation_warning\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{}",
            number(r.eta, digits),
            number(r.pop_weak, digits),
            number(r.pop_fock, digits),
            number(r.relative_gap, digits),
            r.truncation_warning
        )
        .unwrap();
    }
    Ok(OracleOutput { csv, rows, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str, gamma: f64, eta: f64) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "[system]\nmodes = 1\natoms = 2\ngamma = {gamma:?}\ndrives = [{eta:?}]\n\
             [system.coupling]\nkind = \"uniform\"\ng = 0.5\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn single_point_sweep_at_dark_point_is_empty() {
        let c = config("[sweep]\ndelta_min = 0.0\ndelta_max = 0.0\ncount = 1\n", 0.0, 0.1);
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.result.rows.len(), 1);
        let data: Vec<&str> = out.csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(
            data[0],
            "delta,delta_c,pop_mode_0,total_population,ground_weight,atom_exc_0,atom_exc_1,residual,status"
        );
        let fields: Vec<&str> = data[1].split(',').collect();
        assert!(fields[3].parse::<f64>().unwrap().abs() < 1e-12);
        assert_eq!(fields.last(), Some(&"ok"));
    }

    #[test]
    fn sweep_requires_block() {
        let c = config("", 0.0, 0.1);
        assert!(matches!(run_sweep(&c), Err(CliError::Validation(_))));
    }

    #[test]
    fn darkstate_fidelity_at_zero_gamma() {
        let c = config("", 0.0, 0.05);
        let (_, r) = run_darkstate(&c).unwrap();
        assert!(r.residual < 1e-12);
        assert!(r.fidelity >= 1.0 - 1e-8);
    }

    #[test]
    fn undriven_dark_state_is_ground() {
        let c = config("", 0.1, 0.0);
        let (_, r) = run_darkstate(&c).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert_eq!(r.norm, 1.0);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4].iter().map(|&x| (x, 3.0 * x * x)).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&pts[..1]), None);
    }

    #[test]
    fn oracle_zero_drive_rows_are_zero() {
        let c = config("[oracle]\nn_max = 2\ndrives = [0.0]\n", 0.1, 0.1);
        let out = run_oracle(&c).unwrap();
        assert_eq!(out.rows[0].pop_weak, 0.0);
        assert_eq!(out.rows[0].pop_fock, 0.0);
        assert_eq!(out.rows[0].relative_gap, 0.0);
        assert!(out.order.is_none() && out.order_ok());
    }

    #[test]
    fn oracle_budget_is_checked_first() {
        let c = config("[oracle]\nn_max = 3\ndrives = [0.01]\nmax_hilbert_dim = 4\n", 0.1, 0.1);
        let err = run_oracle(&c).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
