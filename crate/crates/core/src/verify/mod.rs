//! Monte Carlo verification: empirical characteristic functions with error
//! bars compared against the analytic limits, tail checks and reports.

mod checks;
mod ecf;
mod ks;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use checks::{
    check_corollary28, check_forward_tail, check_karamata, check_stationary_tail,
    check_tail_ratio, check_theorem21, check_theorem29, default_theta_grid, AggregationMode,
    CheckOptions, NSchedule,
};
pub use ecf::{ecf, ecf_scalar, z_score, EcfEstimate};
pub use ks::{kolmogorov_survival, ks_one_sample, ks_two_sample, KsResult};
pub use report::{Criterion, PointResult, TolerancePolicy, VerificationReport};

/// Names of the checks a suite can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Theorem21,
    Corollary28I,
    Corollary28Ii,
    Corollary28Iii,
    Theorem29,
    TailRatio,
    StationaryTail,
    ForwardTail,
    Karamata,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        CheckName::Theorem21,
        CheckName::Corollary28I,
        CheckName::Corollary28Ii,
        CheckName::Corollary28Iii,
        CheckName::Theorem29,
        CheckName::TailRatio,
        CheckName::StationaryTail,
        CheckName::ForwardTail,
        CheckName::Karamata,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckName::Theorem21 => "theorem21",
            CheckName::Corollary28I => "corollary28_i",
            CheckName::Corollary28Ii => "corollary28_ii",
            CheckName::Corollary28Iii => "corollary28_iii",
            CheckName::Theorem29 => "theorem29",
            CheckName::TailRatio => "tail_ratio",
            CheckName::StationaryTail => "stationary_tail",
            CheckName::ForwardTail => "forward_tail",
            CheckName::Karamata => "karamata",
        }
    }

    /// Whether the check applies at tail index `alpha`.
    pub fn applies(&self, alpha: f64) -> bool {
        match self {
            CheckName::Corollary28Ii => alpha < 1.0,
            CheckName::Corollary28Iii => alpha > 1.0,
            _ => true,
        }
    }

    /// Every check that applies at `alpha`.
    pub fn default_suite(alpha: f64) -> Vec<CheckName> {
        Self::ALL.into_iter().filter(|c| c.applies(alpha)).collect()
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|c| c.as_str()).collect();
                Error::InvalidParams(format!("unknown check '{s}'; known checks: {}", known.join(", ")))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert!("theorem22".parse::<CheckName>().is_err());
        assert!(!CheckName::default_suite(0.5).contains(&CheckName::Corollary28Iii));
        assert!(!CheckName::default_suite(1.0).contains(&CheckName::Corollary28Ii));
    }
}
