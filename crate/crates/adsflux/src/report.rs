//! Machine-readable verification reports: one record per check, assembled in
//! a stable order so that a fixed configuration and seed produce
//! byte-identical output. Timing is deliberately excluded from the rendered
//! report (it goes to stderr) to keep reports diffable across runs.

use serde::{Deserialize, Serialize};

/// Outcome of a single check: the computed quantity, the oracle it is
/// compared against, and the tolerance on their difference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub computed: f64,
    pub oracle: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Gate |computed − oracle| ≤ tolerance.
    pub fn compare(name: &str, computed: f64, oracle: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            computed,
            oracle,
            tolerance,
            pass: (computed - oracle).abs() <= tolerance && computed.is_finite(),
        }
    }

    /// A check that could not produce a value at all.
    pub fn error(name: &str, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            computed: f64::NAN,
            oracle: 0.0,
            tolerance,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub tol_scale: f64,
    pub checks: Vec<CheckRecord>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

impl Report {
    /// Assemble a report; records are sorted by name for order stability.
    pub fn assemble(seed: u64, tol_scale: f64, mut checks: Vec<CheckRecord>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed = checks.len() - passed;
        Report { seed, tol_scale, checks, passed, failed, pass: failed == 0 }
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Render scan rows as CSV with a header line; rows print with 17 significant
/// digits so the table is reproducible bit for bit.
pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
