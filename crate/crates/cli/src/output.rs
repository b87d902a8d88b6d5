//! Output files: a CSV per run plus a JSON sidecar carrying every resolved
//! spec field for provenance. The sidecar lands next to the CSV with a
//! `.json` extension.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::Value;

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn write_outputs(out: &Path, csv: &str, sidecar: &Value) -> anyhow::Result<()> {
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    let json = format!("{:#}\n", sidecar);
    let sidecar_file = sidecar_path(out);
    fs::write(&sidecar_file, json)
        .with_context(|| format!("writing {}", sidecar_file.display()))?;
    Ok(())
}
