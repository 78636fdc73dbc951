//! Rubric-driven grading of one AS, plus the network-wide valley-free check.

mod checks;
mod rubric;

pub use checks::{check_valley_free, run_rubric, CheckResult, GradeReport};
pub use rubric::{default_rubric, parse_rubric, Check, CheckKind, Rubric, RubricError};
