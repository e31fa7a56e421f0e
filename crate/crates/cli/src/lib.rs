//! Command-line front end for the `ptwall-core` engine: scenario files,
//! deterministic text reports and exit codes.

pub mod report;
pub mod scenario;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use ptwall_core::wallcross::{Memo, ModVal};

pub use report::{run, Command, Options};

/// Failure of a command, split by exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 1.
    Validation(String),
    /// A certificate or invariant check failed; exit code 2.
    Certification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Certification(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Certification(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ptwall_core::Error> for CliError {
    fn from(e: ptwall_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Certification(e.to_string())
        }
    }
}

/// Memo shared between worker threads.
#[derive(Debug, Default)]
pub struct SharedMemo(Mutex<BTreeMap<(Vec<i64>, i64), ModVal>>);

impl SharedMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Memo for SharedMemo {
    fn get(&self, key: &(Vec<i64>, i64)) -> Option<ModVal> {
        self.0.lock().expect("memo lock").get(key).cloned()
    }

    fn put(&self, key: (Vec<i64>, i64), v: ModVal) -> ModVal {
        self.0
            .lock()
            .expect("memo lock")
            .entry(key)
            .or_insert(v)
            .clone()
    }
}
