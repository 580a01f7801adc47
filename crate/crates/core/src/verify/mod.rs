//! Verification suites producing a deterministic, machine-readable report.
//!
//! Every check is computed from fixed seeds and summed in a fixed order, so
//! repeated runs serialize to identical bytes.

pub mod fields;
mod suites;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Zeros,
    Orthonormality,
    Eigen,
    Boundary,
    Helmholtz,
    Parseval,
    Bvp,
    Fredholm,
    Sobolev,
    #[serde(rename = "selfadjoint")]
    SelfAdjoint,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 10] = [
        Suite::Zeros,
        Suite::Orthonormality,
        Suite::Eigen,
        Suite::Boundary,
        Suite::Helmholtz,
        Suite::Parseval,
        Suite::Bvp,
        Suite::Fredholm,
        Suite::Sobolev,
        Suite::SelfAdjoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Zeros => "zeros",
            Suite::Orthonormality => "orthonormality",
            Suite::Eigen => "eigen",
            Suite::Boundary => "boundary",
            Suite::Helmholtz => "helmholtz",
            Suite::Parseval => "parseval",
            Suite::Bvp => "bvp",
            Suite::Fredholm => "fredholm",
            Suite::Sobolev => "sobolev",
            Suite::SelfAdjoint => "selfadjoint",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::INDIVIDUAL
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub radius: f64,
    /// Highest degree `n` of the individual modes checked by the per-mode suites.
    pub n_max: usize,
    /// Cutoff of the tables used by the per-mode suites.
    pub cutoff: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            n_max: 3,
            cutoff: 12.0,
            seed: 20_240_611,
        }
    }
}

impl VerifyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Invalid(format!("radius {} must be positive", self.radius)));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Invalid(format!("cutoff {} must be positive", self.cutoff)));
        }
        Ok(())
    }
}

/// One measured quantity compared against its bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
    /// Informational checks are reported but do not affect the verdict.
    pub required: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: None,
            upper: Some(upper),
            passed: value <= upper,
            required: true,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: Some(lower),
            upper: None,
            passed: value >= lower,
            required: true,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: Some(lower),
            upper: Some(upper),
            passed: value >= lower && value <= upper,
            required: true,
        }
    }

    /// A boolean outcome; `value` is 1 when the condition holds.
    pub fn holds(name: impl Into<String>, condition: bool) -> Self {
        Self {
            name: name.into(),
            value: if condition { 1.0 } else { 0.0 },
            lower: Some(1.0),
            upper: None,
            passed: condition,
            required: true,
        }
    }

    /// A measured value with no pass criterion.
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: None,
            upper: None,
            passed: true,
            required: false,
        }
    }

    pub fn optional(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite,
            passed: checks.iter().all(|c| c.passed || !c.required),
            checks,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Required checks that failed.
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.required && !c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs one suite.
pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    config.validate()?;
    let checks = match suite {
        Suite::Zeros => suites::zeros(config)?,
        Suite::Orthonormality => suites::orthonormality(config)?,
        Suite::Eigen => suites::eigen(config)?,
        Suite::Boundary => suites::boundary(config)?,
        Suite::Helmholtz => suites::helmholtz(config)?,
        Suite::Parseval => suites::parseval(config)?,
        Suite::Bvp => suites::bvp(config)?,
        Suite::Fredholm => suites::fredholm(config)?,
        Suite::Sobolev => suites::sobolev(config)?,
        Suite::SelfAdjoint => suites::selfadjoint(config)?,
        Suite::All => return Err(Error::Invalid("`all` is a group of suites".into())),
    };
    Ok(SuiteReport::new(suite, checks))
}

/// Runs `suite`, expanding `all` into every individual suite in a fixed order.
pub fn run(suite: Suite, config: &VerifyConfig) -> Result<VerifyReport> {
    let list: Vec<Suite> = match suite {
        Suite::All => Suite::INDIVIDUAL.to_vec(),
        s => vec![s],
    };
    let suites = list
        .into_iter()
        .map(|s| run_suite(s, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        config: *config,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}
