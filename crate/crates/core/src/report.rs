//! Check reports shared by the probes and the scenario harness.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn merge(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        })
    }
}

/// Outcome of one check. A `fail` carries the violated exact inequality as
/// its witness; an `inconclusive` carries the best bound reached in `bounds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub scenario: String,
    pub check: String,
    pub verdict: Verdict,
    pub bounds: BTreeMap<String, String>,
    pub iterations: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<String>>,
    pub seed: u64,
}

impl CheckReport {
    pub fn new(scenario: impl Into<String>, check: impl Into<String>, seed: u64) -> Self {
        CheckReport {
            scenario: scenario.into(),
            check: check.into(),
            verdict: Verdict::Pass,
            bounds: BTreeMap::new(),
            iterations: 0,
            witness: None,
            trace: None,
            seed,
        }
    }

    pub fn bound(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.bounds.insert(key.into(), value.to_string());
        self
    }

    /// Records a failure. The first witness is kept.
    pub fn fail(&mut self, witness: impl Into<String>) -> &mut Self {
        self.verdict = Verdict::Fail;
        if self.witness.is_none() {
            self.witness = Some(witness.into());
        }
        self
    }

    pub fn inconclusive(&mut self, note: impl Into<String>) -> &mut Self {
        self.verdict = self.verdict.merge(Verdict::Inconclusive);
        if self.witness.is_none() && self.verdict == Verdict::Inconclusive {
            self.witness = Some(note.into());
        }
        self
    }

    pub fn push_trace(&mut self, line: impl Into<String>) {
        self.trace.get_or_insert_with(Vec::new).push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} {} [{}] iterations={}",
            self.verdict.to_string().to_uppercase(),
            self.scenario,
            self.check,
            self.iterations
        )?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_merge_pessimistically() {
        assert_eq!(Verdict::Pass.merge(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(Verdict::Fail.merge(Verdict::Inconclusive), Verdict::Fail);
    }

    #[test]
    fn json_line_is_stable() {
        let mut r = CheckReport::new("s", "c", 7);
        r.bound("b", "1/2").bound("a", 3);
        r.iterations = 2;
        assert_eq!(
            r.to_json_line(),
            r#"{"scenario":"s","check":"c","verdict":"pass","bounds":{"a":"3","b":"1/2"},"iterations":2,"seed":7}"#
        );
        r.fail("x > y");
        r.inconclusive("later");
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.witness.as_deref(), Some("x > y"));
    }
}
