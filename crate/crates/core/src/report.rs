//! Machine-readable verification reports. Every check emits one report;
//! a failing report always carries a concrete witness.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub params: Value,
    pub witnesses: Value,
}

impl VerificationReport {
    pub fn passed(check: impl Into<String>, params: Value) -> VerificationReport {
        VerificationReport {
            check: check.into(),
            pass: true,
            params,
            witnesses: Value::Object(Default::default()),
        }
    }

    pub fn passed_with(
        check: impl Into<String>,
        params: Value,
        witnesses: Value,
    ) -> VerificationReport {
        VerificationReport {
            check: check.into(),
            pass: true,
            params,
            witnesses,
        }
    }

    pub fn failed(check: impl Into<String>, params: Value, witnesses: Value) -> VerificationReport {
        assert!(
            witnesses != Value::Null && witnesses != Value::Object(Default::default()),
            "a failing report must carry a concrete witness"
        );
        VerificationReport {
            check: check.into(),
            pass: false,
            params,
            witnesses,
        }
    }

    pub fn from_outcome(
        check: impl Into<String>,
        pass: bool,
        params: Value,
        witnesses: Value,
    ) -> VerificationReport {
        if pass {
            VerificationReport::passed_with(check, params, witnesses)
        } else {
            VerificationReport::failed(check, params, witnesses)
        }
    }
}
