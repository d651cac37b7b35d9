use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use ncfa::dual::GroupId;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::finite::check_finite;

/// Provenance block embedded in every report. Two runs with equal manifests
/// (timestamp aside) produce identical payload bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 of the canonical JSON of the effective parameters.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub library_version: &'static str,
    pub group: Option<GroupId>,
    pub normalization: Option<&'static str>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(config: &C, seed: Option<u64>, group: Option<GroupId>) -> Result<Self> {
        let canonical = serde_json::to_vec(config)?;
        let digest = Sha256::digest(&canonical);
        Ok(RunManifest {
            command_line: std::env::args().collect(),
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed,
            library_version: ncfa::VERSION,
            group,
            normalization: group.map(GroupId::normalization_note),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        })
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    payload: &'a T,
}

/// Writes `{"manifest": …, …payload}` as pretty JSON to `out` or stdout.
pub fn emit_json<T: Serialize>(out: Option<&Path>, manifest: &RunManifest, payload: &T) -> Result<()> {
    let env = Envelope { manifest, payload };
    check_finite(&env)?;
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    write_text(out, &text)
}

/// Formats a CSV number with the shortest round-trip representation.
pub fn csv_num(v: f64) -> Result<String> {
    if !v.is_finite() {
        anyhow::bail!(crate::finite::NonFinite(format!("non-finite number {v} in CSV payload")));
    }
    Ok(format!("{v:?}"))
}

/// Writes a CSV payload; with a file target the manifest goes to
/// `<out>.manifest.json` next to it.
pub fn emit_csv(out: Option<&Path>, manifest: &RunManifest, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 48);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(out, &text)?;
    if let Some(path) = out {
        let mut side = path.as_os_str().to_owned();
        side.push(".manifest.json");
        emit_json(Some(Path::new(&side)), manifest, &serde_json::json!({}))?;
    }
    Ok(())
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
