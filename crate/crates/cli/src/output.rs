//! Report files. Every artifact carries the echoed configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::Failure;
use crate::config::RunConfig;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: &'a T,
}

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub fn json<T: Serialize>(command: &str, config: &RunConfig, result: &T) -> Artifact {
    let text = serde_json::to_string_pretty(&Report {
        command,
        config,
        result,
    })
    .expect("reports serialize");
    Artifact {
        name: format!("{command}.json"),
        contents: text + "\n",
    }
}

/// CSV preceded by a `#` line holding the configuration.
pub fn csv(name: String, config: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> Artifact {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    let cfg = serde_json::to_string(config).expect("config serializes");
    Artifact {
        name,
        contents: format!("# config: {cfg}\n{body}"),
    }
}

/// Write all artifacts, refusing to replace existing files unless `force`.
pub fn write_all(dir: &Path, artifacts: &[Artifact], force: bool) -> Result<Vec<PathBuf>, Failure> {
    let paths: Vec<PathBuf> = artifacts.iter().map(|a| dir.join(&a.name)).collect();
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(Failure::param(format!(
                "{} exists; pass --force to overwrite",
                p.display()
            )));
        }
    }
    fs::create_dir_all(dir)
        .map_err(|e| Failure::param(format!("cannot create {}: {e}", dir.display())))?;
    for (a, p) in artifacts.iter().zip(&paths) {
        fs::write(p, &a.contents)
            .map_err(|e| Failure::param(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(paths)
}
