use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::topo::{Asn, AddressPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Addressing,
    L2Isolation,
    StpPattern,
    IntraReach,
    Ecmp,
    SessionsUp,
    PolicyLocalPref,
    PolicyExport,
    HijackReport,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Addressing,
        CheckKind::L2Isolation,
        CheckKind::StpPattern,
        CheckKind::IntraReach,
        CheckKind::Ecmp,
        CheckKind::SessionsUp,
        CheckKind::PolicyLocalPref,
        CheckKind::PolicyExport,
        CheckKind::HijackReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Addressing => "addressing",
            CheckKind::L2Isolation => "l2-isolation",
            CheckKind::StpPattern => "stp-pattern",
            CheckKind::IntraReach => "intra-reach",
            CheckKind::Ecmp => "ecmp",
            CheckKind::SessionsUp => "sessions-up",
            CheckKind::PolicyLocalPref => "policy-local-pref",
            CheckKind::PolicyExport => "policy-export",
            CheckKind::HijackReport => "hijack-report",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown check kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub kind: CheckKind,
    pub weight: u32,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Rubric {
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rubric line {line}: {message}")]
pub struct RubricError {
    pub line: usize,
    pub message: String,
}

/// Parse `check <id> <kind> weight=<n> [key=value ...]` lines; `#` starts a comment.
pub fn parse_rubric(text: &str) -> Result<Rubric, RubricError> {
    let mut rubric = Rubric::default();
    let mut ids = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| RubricError { line, message };
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        if words.next() != Some("check") {
            return Err(err("expected `check`".into()));
        }
        let (Some(id), Some(kind)) = (words.next(), words.next()) else {
            return Err(err("expected `check <id> <kind> weight=<n>`".into()));
        };
        let kind: CheckKind = kind.parse().map_err(err)?;
        let mut params = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{w}`")))?;
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(err(format!("parameter `{k}` given twice")));
            }
        }
        let weight = params
            .remove("weight")
            .ok_or_else(|| err("missing weight=<n>".into()))?
            .parse::<u32>()
            .map_err(|_| err("weight must be a non-negative integer".into()))?;
        if !ids.insert(id.to_string()) {
            return Err(err(format!("duplicate check id `{id}`")));
        }
        rubric.checks.push(Check {
            id: id.to_string(),
            kind,
            weight,
            params,
        });
    }
    Ok(rubric)
}

impl fmt::Display for Rubric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "check {} {} weight={}", c.id, c.kind, c.weight)?;
            for (k, v) in &c.params {
                write!(f, " {k}={v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Rubric every reference-configured AS passes in full.
pub fn default_rubric(asn: Asn) -> Rubric {
    let lo5 = AddressPlan::loopback(asn, 5);
    parse_rubric(&format!(
        "check addr addressing weight=10
check l2 l2-isolation weight=10
check intra intra-reach weight=20
check lb ecmp weight=5 router=ROUTER1 dst={lo5}
check bgp sessions-up weight=20
check lp policy-local-pref weight=15 customer=300 peer=200 provider=100
check export policy-export weight=20
"
    ))
    .expect("default rubric parses")
}
