//! `--config` files: a JSON object whose keys override the matching flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub radius: Option<f64>,
    pub cutoff: Option<f64>,
    pub nr: Option<usize>,
    pub ntheta: Option<usize>,
    pub nphi: Option<usize>,
    pub tol_res: Option<f64>,
    pub solvability_tol: Option<f64>,
    pub trace_tol: Option<f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub kind: Option<String>,
    pub n: Option<i64>,
    pub m: Option<usize>,
    pub k: Option<i64>,
    pub count: Option<usize>,
    pub family: Option<String>,
    pub field: Option<String>,
    pub lambda: Option<f64>,
    pub s: Option<u32>,
    pub suite: Option<String>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Format(format!("config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("radius", self.radius),
            ("cutoff", self.cutoff),
            ("tol_res", self.tol_res),
            ("solvability_tol", self.solvability_tol),
            ("trace_tol", self.trace_tol),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("config: {name} must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("nr", self.nr), ("ntheta", self.ntheta), ("nphi", self.nphi)] {
            if v == Some(0) {
                return Err(CliError::Usage(format!("config: {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Replaces `slot` with the configured value, if any.
pub fn overlay<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

/// Like [`overlay`] for optional flags.
pub fn overlay_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_config() {
        let cfg: RunConfig = serde_json::from_str(r#"{"radius": 2.0, "suite": "eigen"}"#).unwrap();
        assert_eq!(cfg.radius, Some(2.0));
        assert_eq!(cfg.suite.as_deref(), Some("eigen"));
        assert!(cfg.cutoff.is_none());
        assert!(serde_json::from_str::<RunConfig>(r#"{"radious": 2.0}"#).is_err());
    }

    #[test]
    fn overlay_prefers_config() {
        let mut x = 1.0;
        overlay(&mut x, &Some(3.0));
        assert_eq!(x, 3.0);
        overlay(&mut x, &None);
        assert_eq!(x, 3.0);
        let mut y: Option<u32> = Some(1);
        overlay_opt(&mut y, &None);
        assert_eq!(y, Some(1));
    }

    #[test]
    fn rejects_nonpositive_values() {
        let cfg = RunConfig {
            cutoff: Some(-1.0),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
