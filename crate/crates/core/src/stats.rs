use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Transition labels: β, substitution, overhead.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    B,
    S,
    O,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::B => "b",
            Label::S => "s",
            Label::O => "o",
        })
    }
}

/// Per-label and per-rule transition counters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub b: usize,
    pub s: usize,
    pub o: usize,
    pub per_rule: BTreeMap<String, usize>,
}

impl RunStats {
    pub fn new(b: usize, s: usize, o: usize) -> Self {
        RunStats {
            b,
            s,
            o,
            per_rule: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, label: Label, rule: &str) {
        match label {
            Label::B => self.b += 1,
            Label::S => self.s += 1,
            Label::O => self.o += 1,
        }
        *self.per_rule.entry(rule.to_string()).or_insert(0) += 1;
    }

    pub fn total(&self) -> usize {
        self.b + self.s + self.o
    }

    pub fn rule(&self, rule: &str) -> usize {
        self.per_rule.get(rule).copied().unwrap_or(0)
    }
}
