//! Check verdicts and the serialization helpers shared by the JSON outputs.

use std::fmt::Display;

use serde::{Serialize, Serializer};

use crate::exact::Valuation;

/// Version of every JSON document the library and CLI emit.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of a congruence check. All verdicts hold up to the recorded
/// truncation (half-weight) and precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub status: Status,
    pub check: String,
    pub prime: Option<u64>,
    /// Weight (not half-weight) of the first failing entry.
    pub first_failure_weight: Option<u64>,
    pub required_valuation: Option<i64>,
    pub observed_valuation: Option<Valuation>,
    /// Largest half-weight actually examined.
    pub truncation: u64,
    pub detail: String,
}

impl CheckReport {
    pub fn pass(check: &str, truncation: u64) -> Self {
        Self {
            status: Status::Pass,
            check: check.to_string(),
            prime: None,
            first_failure_weight: None,
            required_valuation: None,
            observed_valuation: None,
            truncation,
            detail: format!("all conditions hold up to half-weight {truncation}"),
        }
    }

    pub fn fail(check: &str, truncation: u64, detail: impl Into<String>) -> Self {
        Self {
            status: Status::Fail,
            check: check.to_string(),
            prime: None,
            first_failure_weight: None,
            required_valuation: None,
            observed_valuation: None,
            truncation,
            detail: detail.into(),
        }
    }

    /// A failed congruence `residual = 0 mod p^required` at `weight`.
    pub fn congruence_failure(
        check: &str,
        truncation: u64,
        p: u64,
        weight: u64,
        required: i64,
        observed: Valuation,
    ) -> Self {
        Self {
            prime: Some(p),
            first_failure_weight: Some(weight),
            required_valuation: Some(required),
            observed_valuation: Some(observed),
            ..Self::fail(
                check,
                truncation,
                format!(
                    "weight {weight}: residual has {p}-adic valuation {observed}, need at least {required}"
                ),
            )
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_check(mut self, check: &str) -> Self {
        self.check = check.to_string();
        self
    }
}

pub(crate) fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub(crate) fn ser_display_seq<T: Display, S: Serializer>(
    v: &[T],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}
