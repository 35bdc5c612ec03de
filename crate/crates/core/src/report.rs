//! Verification reports shared by every checker.

use serde::{Deserialize, Serialize};

/// One failed comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub pair: String,
    pub expected: String,
    pub computed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            mismatches: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Records one comparison; `expected == computed` by rendering is not
    /// assumed, the caller decides equality.
    pub fn record(&mut self, ok: bool, pair: impl Into<String>, expected: impl ToString, computed: impl ToString) {
        self.checked += 1;
        if !ok {
            self.mismatches.push(Mismatch {
                pair: pair.into(),
                expected: expected.to_string(),
                computed: computed.to_string(),
            });
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn absorb(&mut self, other: VerificationReport) {
        self.checked += other.checked;
        self.mismatches.extend(other.mismatches);
        self.notes.extend(other.notes);
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: {} ({} checks, {} mismatches)",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.mismatches.len()
        )
    }
}
