//! Verification reports in text and JSON form.

use std::fmt;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictLabel {
    Reachable,
    Unreachable,
    SafeWithinBound,
    BoundExceeded,
}

impl VerdictLabel {
    pub fn exit_code(self) -> u8 {
        match self {
            VerdictLabel::Reachable => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictLabel::Reachable => "reachable",
            VerdictLabel::Unreachable => "unreachable",
            VerdictLabel::SafeWithinBound => "safe-within-bound",
            VerdictLabel::BoundExceeded => "bound-exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub verdict: VerdictLabel,
    pub mode: String,
    pub configs_generated: u64,
    pub iterations: u64,
    pub time_ms: u64,
    /// Run-file lines of a witness run, when one was requested and exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!(
                "verdict            {}\nmode               {}\nconfigs_generated  {}\niterations         {}\ntime_ms            {}\n",
                report.verdict, report.mode, report.configs_generated, report.iterations, report.time_ms
            );
            if let Some(w) = &report.witness {
                s.push_str("witness\n");
                for line in w {
                    s.push_str("  ");
                    s.push_str(line);
                    s.push('\n');
                }
            }
            s
        }
    }
}
