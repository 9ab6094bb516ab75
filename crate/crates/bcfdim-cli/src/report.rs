//! Report plumbing: the echoed run configuration, the JSON envelope, and the
//! output sink. Every report embeds the full config and the library version,
//! and identical configs produce byte-identical bytes (fixed field order,
//! fixed float formatting, no hash maps anywhere).

use std::io::Write;
use std::path::PathBuf;

use crate::CliError;

/// The configuration echoed into every report. The worker count is
/// deliberately absent: reports are byte-identical across `--threads`
/// by contract.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub letter_cutoff: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub star_n_cutoff: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_samples: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: String,
    pub budget: u128,
}

/// Top-level JSON schema: `{config, result, evidence[], certified, version}`.
#[derive(serde::Serialize)]
pub struct Report<'a, R: serde::Serialize> {
    pub config: &'a RunConfig,
    pub result: R,
    pub evidence: Vec<serde_json::Value>,
    pub certified: bool,
    pub version: &'static str,
}

impl<R: serde::Serialize> Report<'_, R> {
    pub fn body(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(CliError::from)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn evidence_value<T: serde::Serialize>(item: &T) -> serde_json::Value {
    serde_json::to_value(item).unwrap_or(serde_json::Value::Null)
}

/// Writes the report text to stdout and, when requested, to the output file.
pub fn emit(body: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(body.as_bytes())?;
    stdout.flush()?;
    if let Some(path) = output {
        std::fs::write(path, body)?;
    }
    Ok(())
}
