//! Operator instruments: connectivity matrix, diagnosis, looking glass and
//! AS-path extraction.

mod lg;
mod matrix;
mod path;

pub use lg::{looking_glass, LgError, LgView};
pub use matrix::{
    connectivity_matrix, diagnose, diagonal_target, host_address, probe_host, Cell,
    ConnectivityMatrix, Diagnosis, Finding, FindingCode,
};
pub use path::{as_path_between, is_valley_free, AsPathReport, EdgeLabel};
