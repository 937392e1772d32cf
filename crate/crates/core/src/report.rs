//! Structured pass/fail records shared by every verifier.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Write as _};

use serde::{Deserialize, Serialize};

use crate::coeff::IntegralityVerdict;

/// One checked identity: both sides, their difference, and the verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub input: String,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralityEntry {
    pub coeff: String,
    pub verdict: IntegralityVerdict,
    pub denominator: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub cases: Vec<Case>,
    #[serde(default)]
    pub integrality: Vec<IntegralityEntry>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            params: BTreeMap::new(),
            cases: Vec::new(),
            integrality: Vec::new(),
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Records a case; it passes iff `residual_is_zero`.
    pub fn push(
        &mut self,
        group: Option<&str>,
        input: impl Display,
        lhs: impl Display,
        rhs: impl Display,
        residual: impl Display,
        residual_is_zero: bool,
    ) {
        self.pass &= residual_is_zero;
        self.cases.push(Case {
            group: group.map(str::to_string),
            input: input.to_string(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            residual: residual.to_string(),
            pass: residual_is_zero,
        });
    }

    /// Appends every case of `other` under `group`.
    pub fn absorb(&mut self, group: &str, other: VerificationReport) {
        for mut case in other.cases {
            let label = match case.group.take() {
                Some(g) => format!("{group}/{g}"),
                None => group.to_string(),
            };
            case.group = Some(label);
            self.pass &= case.pass;
            self.cases.push(case);
        }
        self.integrality.extend(other.integrality);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Summary line, then per-group counts, then residuals of failing cases.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            out,
            "{} [{}]: {} ({}/{} cases)",
            self.name,
            params.join(" "),
            if self.pass { "PASS" } else { "FAIL" },
            self.cases.iter().filter(|c| c.pass).count(),
            self.cases.len()
        );
        let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for c in &self.cases {
            if let Some(g) = &c.group {
                let entry = groups.entry(g.as_str()).or_default();
                entry.0 += c.pass as usize;
                entry.1 += 1;
            }
        }
        for (g, (ok, total)) in groups {
            let _ = writeln!(out, "  {g}: {ok}/{total}");
        }
        for c in self.failures() {
            let label = c.group.as_deref().map(|g| format!("[{g}] ")).unwrap_or_default();
            let _ = writeln!(out, "  FAIL {label}{}", c.input);
            let _ = writeln!(out, "    lhs      = {}", c.lhs);
            let _ = writeln!(out, "    rhs      = {}", c.rhs);
            let _ = writeln!(out, "    residual = {}", c.residual);
        }
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}
