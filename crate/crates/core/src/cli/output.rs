//! CSV artifacts and the JSON-lines run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::RiskCurve;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_SUFFIX: &str = "manifest.jsonl";

/// Column layouts shared with the figure renderer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Curve,
    Heatmap,
    Sweep,
    Dimensionality,
    Derivative,
    SminSq,
    Coefficients,
}

impl Schema {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Schema::Curve => &["lambda", "mean_nmse", "std_err", "n_rep", "excluded"],
            Schema::Heatmap => &["n", "p", "lambda_opt", "boundary_hit"],
            Schema::Sweep => &["q", "risk_trunc", "risk_full", "lambda_opt"],
            Schema::Dimensionality => &[
                "p",
                "min_norm_nmse",
                "min_norm_se",
                "opt_nmse",
                "opt_se",
                "lambda_opt",
                "boundary_hit",
            ],
            Schema::Derivative => &[
                "p",
                "derivative",
                "std_err",
                "signal",
                "cross",
                "trace",
                "spike_noise",
                "decoupled",
            ],
            Schema::SminSq => &["replicate", "smin_sq", "above_threshold"],
            Schema::Coefficients => &["term", "coefficient"],
        }
    }
}

/// A table ready to be written: all cells pre-formatted.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub schema: Schema,
    pub panel: String,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, panel: impl Into<String>, schema: Schema) -> Self {
        Table {
            name: name.into(),
            schema,
            panel: panel.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.schema.columns().len());
        self.rows.push(row);
    }

    pub fn curve(name: &str, panel: &str, curve: &RiskCurve) -> Self {
        let mut t = Table::new(name, panel, Schema::Curve);
        for i in 0..curve.len() {
            t.push(vec![
                num(curve.lambdas[i]),
                num(curve.mean[i]),
                num(curve.std_err[i]),
                curve.n_rep.to_string(),
                curve.excluded[i].to_string(),
            ]);
        }
        t
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Csv {
            path: PathBuf::from(&self.name),
            message: e.to_string(),
        };
        w.write_record(self.schema.columns()).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| Error::Csv {
            path: PathBuf::from(&self.name),
            message: e.to_string(),
        })
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ManifestRecord {
    Run {
        command: String,
        params: serde_json::Value,
        master_seed: u64,
        tool_version: String,
        schema_version: u32,
        threads: usize,
        wall_time_s: f64,
    },
    File {
        path: String,
        panel: String,
        schema: Schema,
        columns: Vec<String>,
        rows: usize,
        sha256: String,
    },
}

pub fn manifest_path(out_dir: &Path, command: &str) -> PathBuf {
    out_dir.join(format!("{command}.{MANIFEST_SUFFIX}"))
}

/// Writes every table into `out_dir` and then the manifest.
pub fn write_outputs(out_dir: &Path, run: ManifestRecord, tables: &[Table]) -> Result<PathBuf> {
    let command = match &run {
        ManifestRecord::Run { command, .. } => command.clone(),
        ManifestRecord::File { .. } => return Err(Error::InvalidInput("manifest must start with a run record".into())),
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut lines = vec![run];
    for t in tables {
        let bytes = t.to_bytes()?;
        let path = out_dir.join(&t.name);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        lines.push(ManifestRecord::File {
            path: t.name.clone(),
            panel: t.panel.clone(),
            schema: t.schema,
            columns: t.schema.columns().iter().map(|c| c.to_string()).collect(),
            rows: t.rows.len(),
            sha256: sha256_hex(&bytes),
        });
    }
    let path = manifest_path(out_dir, &command);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    for rec in &lines {
        let line = serde_json::to_string(rec).map_err(|e| Error::InvalidInput(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile {
            path: path.to_path_buf(),
            hint: "run the command without --check first".into(),
        });
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub path: String,
    pub expected: String,
    pub found: Option<String>,
}

impl CheckLine {
    pub fn ok(&self) -> bool {
        self.found.as_deref() == Some(self.expected.as_str())
    }
}

/// Compares freshly computed tables against the hashes in a manifest.
pub fn check_against(manifest: &[ManifestRecord], tables: &[Table]) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    for rec in manifest {
        if let ManifestRecord::File { path, sha256, .. } = rec {
            let found = match tables.iter().find(|t| &t.name == path) {
                Some(t) => Some(sha256_hex(&t.to_bytes()?)),
                None => None,
            };
            out.push(CheckLine {
                path: path.clone(),
                expected: sha256.clone(),
                found,
            });
        }
    }
    Ok(out)
}
