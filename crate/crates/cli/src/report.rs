//! The JSON run report printed by every command.

use std::collections::BTreeMap;
use std::path::Path;

use gurarii_core::rational::format_rational;
use gurarii_core::trace::Check;
use gurarii_core::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

/// Everything a command established. `duration_ms` is wall-clock time and is
/// the only field that varies between identical runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<FileHash>,
    pub flags: BTreeMap<String, String>,
    pub values: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub outputs: Vec<FileHash>,
    pub pass: bool,
    pub duration_ms: u64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            inputs: Vec::new(),
            flags: BTreeMap::new(),
            values: BTreeMap::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
            pass: false,
            duration_ms: 0,
        }
    }

    pub fn input(&mut self, path: &Path, sha256: &str) {
        self.inputs.push(FileHash {
            path: path.display().to_string(),
            sha256: sha256.to_string(),
        });
    }

    pub fn output(&mut self, path: &Path, sha256: &str) {
        self.outputs.push(FileHash {
            path: path.display().to_string(),
            sha256: sha256.to_string(),
        });
    }

    pub fn flag(&mut self, name: &str, value: impl ToString) {
        self.flags.insert(name.to_string(), value.to_string());
    }

    pub fn value(&mut self, name: &str, q: &Rational) {
        self.values.insert(name.to_string(), format_rational(q));
    }

    pub fn text(&mut self, name: &str, value: impl ToString) {
        self.values.insert(name.to_string(), value.to_string());
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    /// Sets `pass` from the checks; a report without checks does not pass.
    pub fn settle(&mut self) -> bool {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self.pass
    }
}
