//! CSV and report emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const CONFIG_BEGIN: &str = "resolved-config-begin";
pub const CONFIG_END: &str = "resolved-config-end";

/// Formats `x` in scientific notation with `digits` significant digits.
pub fn number(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

/// The `#` comment block that opens every CSV: kind, config hash and the resolved config.
pub fn header(kind: &str, config: &ExperimentConfig) -> String {
    let mut out = String::new();
    writeln!(out, "# darkcav {kind}").unwrap();
    writeln!(out, "# config-sha256: {}", config.digest()).unwrap();
    writeln!(out, "# {CONFIG_BEGIN}").unwrap();
    for line in config.resolved_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "# {CONFIG_END}").unwrap();
    out
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
