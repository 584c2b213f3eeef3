//! Certificates and run manifests.
//!
//! Every certifying operation returns a [`Certificate`]: verdict, an echo of
//! the parameters it was run with, and a kind-specific payload. FAIL
//! certificates carry an explicit counterexample; PASS certificates carry
//! enough data to re-check independently.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

pub const CERT_SCHEMA: &str = "aptlat.certificate/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    HeuristicPass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::HeuristicPass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn passed(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::HeuristicPass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    Delone,
    RelativeDense,
    Syndetic,
    ApproxSubgroup,
    RegularWindow,
    SchemeValid,
    Enlargement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub kind: CertKind,
    pub verdict: Verdict,
    /// Echo of the inputs the certificate was computed from.
    pub parameters: Value,
    /// Kind-specific evidence: witnesses on FAIL, re-check data on PASS.
    pub witnesses: Value,
}

impl Certificate {
    pub fn new(kind: CertKind, verdict: Verdict, parameters: Value, witnesses: Value) -> Self {
        Certificate {
            schema: CERT_SCHEMA.to_string(),
            kind,
            verdict,
            parameters,
            witnesses,
        }
    }
}

/// Reproducibility metadata embedded in every emitted artifact.
///
/// Deliberately contains nothing volatile (no timestamps), so re-running a
/// command with the same inputs and seed reproduces the artifact byte for
/// byte. Wall time is reported on stderr instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub threads: usize,
    pub tolerances: BTreeMap<String, f64>,
}

pub const MANIFEST_SCHEMA: &str = "aptlat.manifest/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}
