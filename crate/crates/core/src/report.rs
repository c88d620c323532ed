//! Structured check reports with deterministic text rendering.
//!
//! Every check renders one machine-readable summary line prefixed `RESULT `
//! so CI can grep pass/fail without parsing the details.

use std::fmt;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub details: Vec<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: true,
            details: vec![],
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: false,
            details: vec![detail.into()],
        }
    }

    pub fn from_outcome(name: impl Into<String>, outcome: Result<(), String>) -> Self {
        match outcome {
            Ok(()) => Check::pass(name),
            Err(msg) => Check::fail(name, msg),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.details.push(detail.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub title: String,
    pub header: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            header: vec![],
            checks: vec![],
        }
    }

    pub fn header_line(&mut self, line: impl Into<String>) {
        self.header.push(line.into());
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn record(&mut self, name: impl Into<String>, outcome: Result<(), String>) {
        self.push(Check::from_outcome(name, outcome));
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("== {} ==\n", self.title));
        for h in &self.header {
            out.push_str(&format!("   {h}\n"));
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("RESULT {} {}\n", c.name, status));
            for d in &c.details {
                out.push_str(&format!("       {d}\n"));
            }
        }
        let status = if self.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("RESULT {} {}\n", self.title, status));
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
