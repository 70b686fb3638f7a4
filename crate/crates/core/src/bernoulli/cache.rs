//! Write-through, line-delimited cache of Bernoulli residues.
//!
//! ```text
//! {"format": "bernoulli-cache", "version": 1}
//! {"p":37,"prec":1,"k":2,"value":31}
//! ...
//! ```
//!
//! Entries are keyed by `(p, prec)`. A precision-1 table counts as present
//! only when every even index in `[2, p-3]` has a record, so an interrupted
//! scan resumes from the first incomplete prime. Malformed lines are errors,
//! never skipped.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::modp::BernoulliTableModP;
use crate::error::{Error, Result};
use crate::modring::is_prime;

pub const HEADER_LINE: &str = r#"{"format": "bernoulli-cache", "version": 1}"#;
pub const FORMAT_NAME: &str = "bernoulli-cache";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheRecord {
    pub p: u64,
    pub prec: u8,
    pub k: u64,
    pub value: u64,
}

#[derive(Debug)]
pub struct BernoulliCache {
    path: PathBuf,
    entries: BTreeMap<(u64, u8), BTreeMap<u64, u64>>,
    writer: BufWriter<File>,
}

impl BernoulliCache {
    /// Opens (or creates) the cache file and loads every record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let exists = path.exists() && std::fs::metadata(&path)?.len() > 0;
        let mut entries: BTreeMap<(u64, u8), BTreeMap<u64, u64>> = BTreeMap::new();

        if exists {
            let reader = BufReader::new(File::open(&path)?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                let lineno = idx + 1;
                let corrupt = |detail: String| Error::Cache {
                    path: path.display().to_string(),
                    line: lineno,
                    detail,
                };
                if idx == 0 {
                    let header: Header = serde_json::from_str(&line)
                        .map_err(|e| corrupt(format!("bad header: {e}")))?;
                    if header.format != FORMAT_NAME || header.version != FORMAT_VERSION {
                        return Err(corrupt(format!(
                            "unsupported format {:?} version {}",
                            header.format, header.version
                        )));
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    return Err(corrupt("blank line".into()));
                }
                let rec: CacheRecord =
                    serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                validate(&rec).map_err(corrupt)?;
                let slot = entries.entry((rec.p, rec.prec)).or_default();
                if let Some(old) = slot.insert(rec.k, rec.value) {
                    if old != rec.value {
                        return Err(corrupt(format!(
                            "conflicting values {old} and {} for B_{} mod {}^{}",
                            rec.value, rec.k, rec.p, rec.prec
                        )));
                    }
                }
            }
        }

        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut writer = BufWriter::new(file);
        if !exists {
            writeln!(writer, "{HEADER_LINE}")?;
            writer.flush()?;
        }
        Ok(BernoulliCache {
            path,
            entries,
            writer,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, p: u64, prec: u8, k: u64) -> Option<u64> {
        self.entries.get(&(p, prec))?.get(&k).copied()
    }

    /// The complete precision-1 table for `p`, if every index is cached.
    pub fn table_mod_p(&self, p: u64) -> Option<BernoulliTableModP> {
        let slot = self.entries.get(&(p, 1))?;
        let top = p.checked_sub(3)?;
        let values: Option<Vec<u64>> = (2..=top)
            .step_by(2)
            .map(|k| slot.get(&k).copied())
            .collect();
        BernoulliTableModP::from_values(p, values?).ok()
    }

    pub fn insert(&mut self, p: u64, prec: u8, k: u64, value: u64) -> Result<()> {
        let rec = CacheRecord { p, prec, k, value };
        validate(&rec).map_err(Error::domain)?;
        let slot = self.entries.entry((p, prec)).or_default();
        match slot.get(&k) {
            Some(&old) if old == value => return Ok(()),
            Some(&old) => {
                return Err(Error::domain(format!(
                    "refusing to overwrite cached B_{k} mod {p}^{prec} = {old} with {value}"
                )))
            }
            None => {}
        }
        slot.insert(k, value);
        serde_json::to_writer(&mut self.writer, &rec).map_err(std::io::Error::from)?;
        self.writer.write_all(b"\n")?;
        Ok(())
    }

    /// Appends a whole precision-1 table and flushes.
    pub fn insert_table(&mut self, table: &BernoulliTableModP) -> Result<()> {
        for (k, v) in table.iter() {
            self.insert(table.prime(), 1, k, v)?;
        }
        self.flush()
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Drop for BernoulliCache {
    fn drop(&mut self) {
        let _ = self.writer.flush();
    }
}

fn validate(rec: &CacheRecord) -> std::result::Result<(), String> {
    if !(rec.prec == 1 || rec.prec == 2) {
        return Err(format!("precision {} is not 1 or 2", rec.prec));
    }
    if rec.p == 2 || rec.p > u32::MAX as u64 || !is_prime(rec.p) {
        return Err(format!("{} is not an odd prime", rec.p));
    }
    if rec.k % 2 == 1 || rec.k < 2 {
        return Err(format!("index {} is not even and >= 2", rec.k));
    }
    if rec.value >= rec.p.pow(rec.prec as u32) {
        return Err(format!("value {} out of range", rec.value));
    }
    Ok(())
}
