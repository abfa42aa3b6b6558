//! File formats: dataset CSV (`m` column) and JSON envelope, chain CSV
//! (`iter,kernel,accepted,K,J,h,logpost`), and JSON reports.
//!
//! Floats are written with the shortest round-trippable representation, so
//! rewriting a parsed file reproduces it byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Theta;
use crate::samplers::{Chain, KernelTag};
use crate::simulate::{Dataset, DatasetMeta};

#[derive(Debug, Serialize, Deserialize)]
struct DatasetEnvelope {
    n: usize,
    m_count: usize,
    seed: u64,
    stream: u64,
    theta_true: Option<Theta>,
    values: Vec<f64>,
}

pub fn write_dataset_json(path: &Path, data: &Dataset) -> Result<()> {
    let envelope = DatasetEnvelope {
        n: data.n(),
        m_count: data.len(),
        seed: data.meta().seed,
        stream: data.meta().stream,
        theta_true: data.meta().theta_true,
        values: data.values().to_vec(),
    };
    write_json(path, &envelope)
}

pub fn read_dataset_json(path: &Path) -> Result<Dataset> {
    let envelope: DatasetEnvelope = read_json(path)?;
    if envelope.values.len() != envelope.m_count {
        return Err(Error::parse(
            path,
            format!(
                "m_count is {} but {} values present",
                envelope.m_count,
                envelope.values.len()
            ),
        ));
    }
    Dataset::from_values(
        envelope.n,
        envelope.values,
        DatasetMeta {
            theta_true: envelope.theta_true,
            seed: envelope.seed,
            stream: envelope.stream,
        },
    )
}

pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::with_capacity(data.len() * 20 + 2);
    out.push_str("m\n");
    for &m in data.values() {
        out.push_str(&format!("{m}\n"));
    }
    write_bytes(path, out.as_bytes())
}

/// Reads the one-column magnetization CSV; the spectrum size is not stored
/// there, so the caller supplies it.
pub fn read_dataset_csv(path: &Path, n: usize, meta: DatasetMeta) -> Result<Dataset> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines();
    match lines.next() {
        Some("m") => {}
        Some(other) => {
            return Err(Error::parse(
                path,
                format!("expected header `m`, got `{other}`"),
            ))
        }
        None => return Err(Error::parse(path, "empty file")),
    }
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::DataRow {
            row,
            detail: format!("not a number: `{line}`"),
        })?;
        values.push(value);
    }
    Dataset::from_values(n, values, meta)
}

pub fn write_chain_csv(path: &Path, chain: &Chain) -> Result<()> {
    let mut out = String::with_capacity(chain.len() * 48 + 40);
    out.push_str("iter,kernel,accepted,K,J,h,logpost\n");
    for i in 0..chain.len() {
        let t = chain.draws()[i];
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            i + 1,
            chain.tags()[i],
            chain.accepted()[i],
            t.k,
            t.j,
            t.h,
            chain.log_post()[i]
        ));
    }
    write_bytes(path, out.as_bytes())
}

pub fn read_chain_csv(path: &Path) -> Result<Chain> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let mut draws = Vec::new();
    let mut tags = Vec::new();
    let mut accepted = Vec::new();
    let mut log_post = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::DataRow {
                row,
                detail: format!("missing column {i}"),
            })
        };
        let parse = |i: usize| -> Result<f64> {
            field(i)?.parse().map_err(|_| Error::DataRow {
                row,
                detail: format!("column {i} is not a number"),
            })
        };
        tags.push(match field(1)? {
            "AMH" => KernelTag::Amh,
            "RMAHMC" => KernelTag::Rmahmc,
            other => {
                return Err(Error::DataRow {
                    row,
                    detail: format!("unknown kernel tag `{other}`"),
                })
            }
        });
        accepted.push(match field(2)? {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::DataRow {
                    row,
                    detail: format!("bad accepted flag `{other}`"),
                })
            }
        });
        draws.push(Theta::new(parse(3)?, parse(4)?, parse(5)?));
        log_post.push(parse(6)?);
    }
    Chain::new(draws, tags, accepted, log_post)
}

/// Spectrum-vs-pmf table, one pmf column per theta.
pub fn write_density_csv(path: &Path, atoms: &[f64], pmfs: &[Vec<f64>]) -> Result<()> {
    let mut header = String::from("m");
    for i in 1..=pmfs.len() {
        header.push_str(&format!(",pmf_{i}"));
    }
    header.push('\n');
    let mut out = header;
    for (k, &m) in atoms.iter().enumerate() {
        out.push_str(&format!("{m}"));
        for pmf in pmfs {
            out.push_str(&format!(",{}", pmf[k]));
        }
        out.push('\n');
    }
    write_bytes(path, out.as_bytes())
}

/// Writes a text artifact (plot-ready traces and the like).
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::parse(path, e.to_string()))?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&content).map_err(|e| Error::parse(path, e.to_string()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(path, e))?;
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}
