//! Named record of achieved constants with provenance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Where a value was observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub measure: String,
    pub operation: String,
    pub location: String,
}

impl Provenance {
    pub fn new(measure: impl Into<String>, operation: impl Into<String>, location: impl Into<String>) -> Self {
        Self { measure: measure.into(), operation: operation.into(), location: location.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub value: f64,
    pub provenance: Provenance,
}

/// Constant tag to the largest value seen so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConstantsLedger {
    pub entries: BTreeMap<String, LedgerEntry>,
}

impl ConstantsLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keeps the larger of the stored and the new value; NaN never replaces a number.
    pub fn record(&mut self, tag: &str, value: f64, provenance: Provenance) {
        match self.entries.get_mut(tag) {
            Some(e) if !(value > e.value) && !e.value.is_nan() => {}
            Some(e) => *e = LedgerEntry { value, provenance },
            None => {
                self.entries.insert(tag.to_string(), LedgerEntry { value, provenance });
            }
        }
    }

    /// Overwrites unconditionally.
    pub fn set(&mut self, tag: &str, value: f64, provenance: Provenance) {
        self.entries.insert(tag.to_string(), LedgerEntry { value, provenance });
    }

    pub fn get(&self, tag: &str) -> Option<f64> {
        self.entries.get(tag).map(|e| e.value)
    }

    pub fn merge(&mut self, other: &ConstantsLedger) {
        for (k, e) in &other.entries {
            self.record(k, e.value, e.provenance.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
