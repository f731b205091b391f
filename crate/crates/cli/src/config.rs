//! Experiment configuration: a single TOML document, strictly validated.

use darkcav_core::linalg::{CMatrix, C64};
use darkcav_core::model::{make_localized_coupling, make_uniform_coupling};
use darkcav_core::SystemParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Upper bound on M and N accepted from a config file.
pub const MAX_BODIES: usize = 1024;
/// Upper bound on sweep grid sizes.
pub const MAX_GRID: usize = 1_000_000;

fn default_kappa() -> f64 {
    1.0
}

fn default_precision() -> usize {
    17
}

fn default_target_lambda() -> f64 {
    1.0
}

fn default_oracle_delta() -> f64 {
    0.5
}

fn default_max_hilbert_dim() -> usize {
    4096
}

fn default_max_superoperator_dim() -> usize {
    2500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observability: Option<ObservabilityConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub modes: usize,
    pub atoms: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta_c: f64,
    #[serde(default)]
    pub delta_a: f64,
    /// Real parts of the drive amplitudes, one per mode.
    pub drives: Vec<f64>,
    /// Optional imaginary parts of the drive amplitudes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drives_im: Option<Vec<f64>>,
    pub coupling: CouplingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingConfig {
    Uniform {
        g: f64,
    },
    Localized {
        g: f64,
        perturbation: f64,
        #[serde(default)]
        seed: u64,
    },
    Explicit {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
    /// Hold Δ_C fixed instead of following Δ_A = Δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin_delta_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n_max: usize,
    /// Drive ladder; each value replaces the amplitude of every driven mode.
    pub drives: Vec<f64>,
    /// Δ_A = Δ_C used for the comparison.
    #[serde(default = "default_oracle_delta")]
    pub delta: f64,
    #[serde(default = "default_max_hilbert_dim")]
    pub max_hilbert_dim: usize,
    #[serde(default = "default_max_superoperator_dim")]
    pub max_superoperator_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservabilityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_atom_g: Option<f64>,
    #[serde(default = "default_target_lambda")]
    pub target_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Significant digits for floating-point CSV fields.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            precision: default_precision(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn require_finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}

fn check_matrix(name: &str, rows: &[Vec<f64>], m: usize, n: usize) -> Result<(), CliError> {
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("{name} must be a {m}x{n} matrix")));
    }
    for x in rows.iter().flatten() {
        require_finite(name, *x)?;
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        if s.modes == 0 || s.atoms == 0 {
            return Err(invalid("system.modes and system.atoms must be positive"));
        }
        if s.modes > MAX_BODIES || s.atoms > MAX_BODIES {
            return Err(invalid(format!("system.modes and system.atoms are limited to {MAX_BODIES}")));
        }
        if s.modes > s.atoms {
            return Err(invalid(format!(
                "system.modes ({}) must not exceed system.atoms ({})",
                s.modes, s.atoms
            )));
        }
        if s.drives.len() != s.modes {
            return Err(invalid(format!("system.drives needs {} entries", s.modes)));
        }
        if let Some(im) = &s.drives_im {
            if im.len() != s.modes {
                return Err(invalid(format!("system.drives_im needs {} entries", s.modes)));
            }
            for &x in im {
                require_finite("system.drives_im", x)?;
            }
        }
        for &x in &s.drives {
            require_finite("system.drives", x)?;
        }
        for (name, x) in [("system.delta_c", s.delta_c), ("system.delta_a", s.delta_a)] {
            require_finite(name, x)?;
        }
        if !(s.kappa > 0.0 && s.kappa.is_finite()) {
            return Err(invalid("system.kappa must be positive"));
        }
        if !(s.gamma >= 0.0 && s.gamma.is_finite()) {
            return Err(invalid("system.gamma must be non-negative"));
        }
        match &s.coupling {
            CouplingConfig::Uniform { g } => require_finite("coupling.g", *g)?,
            CouplingConfig::Localized { g, perturbation, .. } => {
                require_finite("coupling.g", *g)?;
                if !(*perturbation >= 0.0 && perturbation.is_finite()) {
                    return Err(invalid("coupling.perturbation must be non-negative"));
                }
            }
            CouplingConfig::Explicit { re, im } => {
                check_matrix("coupling.re", re, s.modes, s.atoms)?;
                if let Some(im) = im {
                    check_matrix("coupling.im", im, s.modes, s.atoms)?;
                }
            }
        }
        if let Some(sw) = &self.sweep {
            require_finite("sweep.delta_min", sw.delta_min)?;
            require_finite("sweep.delta_max", sw.delta_max)?;
            if sw.delta_min > sw.delta_max {
                return Err(invalid("sweep.delta_min must not exceed sweep.delta_max"));
            }
            if sw.count == 0 || sw.count > MAX_GRID {
                return Err(invalid(format!("sweep.count must lie in 1..={MAX_GRID}")));
            }
            if let Some(dc) = sw.pin_delta_c {
                require_finite("sweep.pin_delta_c", dc)?;
            }
        }
        if let Some(o) = &self.oracle {
            if o.n_max == 0 {
                return Err(invalid("oracle.n_max must be at least 1"));
            }
            if o.drives.is_empty() || o.drives.len() > MAX_GRID {
                return Err(invalid("oracle.drives must be a non-empty ladder"));
            }
            for &x in &o.drives {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(invalid("oracle.drives entries must be non-negative"));
                }
            }
            require_finite("oracle.delta", o.delta)?;
        }
        if let Some(ob) = &self.observability {
            if !(ob.target_lambda > 0.0 && ob.target_lambda.is_finite()) {
                return Err(invalid("observability.target_lambda must be positive"));
            }
            if let Some(g) = ob.single_atom_g {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(invalid("observability.single_atom_g must be positive"));
                }
            }
        }
        if !(15..=17).contains(&self.output.precision) {
            return Err(invalid("output.precision must lie in 15..=17"));
        }
        Ok(())
    }

    /// Applies a `--seed` override to a localized coupling.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let (Some(new), CouplingConfig::Localized { seed, .. }) = (seed, &mut self.system.coupling) {
            *seed = new;
        }
        self
    }

    /// The fully resolved configuration (defaults filled in) as TOML.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// SHA-256 of the resolved configuration, lowercase hex.
    pub fn digest(&self) -> String {
        Sha256::digest(self.resolved_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn coupling_matrix(&self) -> Result<CMatrix, CliError> {
        let s = &self.system;
        let matrix = match &s.coupling {
            CouplingConfig::Uniform { g } => make_uniform_coupling(s.modes, s.atoms, *g)?,
            CouplingConfig::Localized { g, perturbation, seed } => {
                make_localized_coupling(s.modes, s.atoms, *g, *perturbation, *seed)?
            }
            CouplingConfig::Explicit { re, im } => CMatrix::from_fn(s.modes, s.atoms, |k, l| {
                C64::new(re[k][l], im.as_ref().map_or(0.0, |im| im[k][l]))
            }),
        };
        Ok(matrix)
    }

    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let s = &self.system;
        let drives = s
            .drives
            .iter()
            .enumerate()
            .map(|(k, &re)| C64::new(re, s.drives_im.as_ref().map_or(0.0, |im| im[k])))
            .collect();
        let params = SystemParams::new(self.coupling_matrix()?, drives)?
            .with_kappa(s.kappa)
            .with_gamma(s.gamma)
            .with_detunings(s.delta_c, s.delta_a);
        params.validate()?;
        Ok(params)
    }
}

/// Recovers the resolved configuration echoed in the `#` header of an output file.
pub fn config_from_header(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut inside = false;
    let mut body = String::new();
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        let comment = comment.strip_prefix(' ').unwrap_or(comment);
        if comment == crate::output::CONFIG_BEGIN {
            inside = true;
        } else if comment == crate::output::CONFIG_END {
            return ExperimentConfig::parse(&body);
        } else if inside {
            body.push_str(comment);
            body.push('\n');
        }
    }
    Err(invalid("no resolved configuration found in header"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[system]
modes = 1
atoms = 2
gamma = 0.1
drives = [0.1]

[system.coupling]
kind = "uniform"
g = 0.5

[sweep]
delta_min = -1.0
delta_max = 1.0
count = 5
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.system.kappa, 1.0);
        assert_eq!(c.output.precision, 17);
        assert!(c.oracle.is_none());
        let p = c.system_params().unwrap();
        assert_eq!(p.n_atoms(), 2);
        assert_eq!(p.gamma, 0.1);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASIC.replace("gamma = 0.1", "gamma = 0.1\nbogus = 3");
        assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Validation(_))));
        let text = BASIC.replace("g = 0.5", "g = 0.5\nseed = 2");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = BASIC.replace("kind = \"uniform\"", "kind = \"random\"");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn rejects_inconsistent_values() {
        for (from, to) in [
            ("atoms = 2", "atoms = 0"),
            ("modes = 1", "modes = 3"),
            ("drives = [0.1]", "drives = [0.1, 0.2]"),
            ("gamma = 0.1", "gamma = -0.1"),
            ("count = 5", "count = 0"),
            ("delta_min = -1.0", "delta_min = 2.0"),
            ("gamma = 0.1", "gamma = nan"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(ExperimentConfig::parse(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn explicit_coupling_shape_is_checked() {
        let text = BASIC.replace(
            "kind = \"uniform\"\ng = 0.5",
            "kind = \"explicit\"\nre = [[0.1, 0.2]]\nim = [[0.0, 0.3]]",
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(c.coupling_matrix().unwrap()[(0, 1)], C64::new(0.2, 0.3));
        let bad = text.replace("re = [[0.1, 0.2]]", "re = [[0.1]]");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn seed_override_only_touches_localized() {
        let text = BASIC.replace(
            "kind = \"uniform\"\ng = 0.5",
            "kind = \"localized\"\ng = 0.5\nperturbation = 0.1\nseed = 4",
        );
        let c = ExperimentConfig::parse(&text).unwrap().with_seed(Some(9));
        assert!(matches!(c.system.coupling, CouplingConfig::Localized { seed: 9, .. }));
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.clone().with_seed(Some(9)), c);
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        let again = ExperimentConfig::parse(&c.resolved_toml()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest(), c.digest());
        assert_eq!(c.digest().len(), 64);
    }
}
