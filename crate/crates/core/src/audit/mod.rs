//! Configuration audits over policy formulas.
//!
//! Satisfiability is decided by [`RegionSolver`], a complete enumeration over
//! the elementary regions induced by the formula's atoms. [`Auditor`] builds
//! the six standard misconfiguration queries on top of it, and
//! [`export_smtlib`] renders any formula for an external solver.

mod queries;
mod smtlib;
mod solver;

use serde::Serialize;

pub use queries::{Auditor, EVERYONE_ELSE};
pub use smtlib::{export_smtlib, find_external_solver, run_external_solver, ExternalVerdict};
pub use solver::{Assignment, RegionSolver, SatBackend, DEFAULT_ATOM_BUDGET};

use crate::engine::StoreError;
use crate::formula::TranslateError;

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("formula has {atoms} atoms, over the audit budget of {budget}")]
    AtomBudget { atoms: usize, budget: usize },
    #[error("unknown space \"{0}\"")]
    UnknownSpace(String),
    #[error("new policy must have effect allow")]
    NotAnAllow,
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AuditResult {
    Bool(bool),
    Principals(Vec<String>),
}

/// Outcome of one audit query, serialisable as the CLI's JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub query: String,
    pub result: AuditResult,
    pub witnesses: Vec<Assignment>,
    pub explanation: String,
}

impl AuditReport {
    pub fn as_bool(&self) -> Option<bool> {
        match self.result {
            AuditResult::Bool(b) => Some(b),
            AuditResult::Principals(_) => None,
        }
    }

    pub fn principals(&self) -> Option<&[String]> {
        match &self.result {
            AuditResult::Principals(p) => Some(p),
            AuditResult::Bool(_) => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
