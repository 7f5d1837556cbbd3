//! On-disk cache of potential tables.
//!
//! Each table is a CSV file (`x1,...,xd,value`, values at round-trip
//! precision) plus a JSON sidecar with its metadata and the SHA-256 of the
//! CSV bytes. A checksum or parse mismatch is treated as a miss, so a
//! corrupted entry is recomputed rather than used. Writers hold an exclusive
//! lock on `<dir>/.lock`; readers a shared one.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harmonic::{standard_table, PotentialTable, TableKind};

pub const CACHE_ENV: &str = "RESTART_GRADE_CACHE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub d: usize,
    pub kind: TableKind,
    #[serde(rename = "L")]
    pub radius: i64,
    pub method: String,
    pub accuracy: f64,
    pub sha256: String,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn table_csv(table: &PotentialTable) -> String {
    let grid = table.grid();
    let mut out = String::new();
    for k in 1..=table.d {
        let _ = write!(out, "x{k},");
    }
    out.push_str("value\n");
    let mut c = vec![0i64; table.d];
    for (i, v) in table.values().iter().enumerate() {
        grid.coords_into(i, &mut c);
        for x in &c {
            let _ = write!(out, "{x},");
        }
        // `{}` on f64 prints the shortest string that parses back exactly.
        let _ = writeln!(out, "{v}");
    }
    out
}

fn parse_csv(text: &str, meta: &TableMeta) -> Option<PotentialTable> {
    let mut lines = text.lines();
    let header = lines.next()?;
    if header.split(',').count() != meta.d + 1 {
        return None;
    }
    let mut values = Vec::new();
    for line in lines {
        let v: f64 = line.rsplit(',').next()?.parse().ok()?;
        values.push(v);
    }
    let table = PotentialTable::new(
        meta.d,
        meta.kind,
        meta.radius,
        values,
        &meta.method,
        meta.accuracy,
    )
    .ok()?;
    // Row order must match the grid.
    let grid = table.grid();
    let mut c = vec![0i64; meta.d];
    for (i, line) in text.lines().skip(1).enumerate() {
        grid.coords_into(i, &mut c);
        let coords: Vec<i64> = line
            .split(',')
            .take(meta.d)
            .map(|s| s.parse().ok())
            .collect::<Option<_>>()?;
        if coords != c {
            return None;
        }
    }
    Some(table)
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// Directory from `RESTART_GRADE_CACHE`, defaulting to `./cache`.
    pub fn from_env() -> Self {
        Cache::new(
            std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from("cache"), PathBuf::from),
        )
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stem(d: usize, kind: TableKind, radius: i64, method: &str) -> String {
        format!("{}-d{d}-L{radius}-{method}", kind.as_str())
    }

    pub fn paths(
        &self,
        d: usize,
        kind: TableKind,
        radius: i64,
        method: &str,
    ) -> (PathBuf, PathBuf) {
        let stem = Self::stem(d, kind, radius, method);
        (
            self.dir.join(format!("{stem}.csv")),
            self.dir.join(format!("{stem}.json")),
        )
    }

    fn lock_file(&self) -> Result<File> {
        fs::create_dir_all(&self.dir)?;
        Ok(OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?)
    }

    /// The cached table, or `None` when absent or failing verification.
    pub fn load(
        &self,
        d: usize,
        kind: TableKind,
        radius: i64,
        method: &str,
    ) -> Result<Option<PotentialTable>> {
        let (csv_path, meta_path) = self.paths(d, kind, radius, method);
        if !meta_path.exists() || !csv_path.exists() {
            return Ok(None);
        }
        let lock = self.lock_file()?;
        lock.lock_shared()?;
        let meta_text = fs::read_to_string(&meta_path)?;
        let csv_bytes = fs::read(&csv_path)?;
        lock.unlock()?;

        let Ok(meta) = serde_json::from_str::<TableMeta>(&meta_text) else {
            log::warn!(
                "unreadable cache metadata {}; recomputing",
                meta_path.display()
            );
            return Ok(None);
        };
        if meta.d != d || meta.kind != kind || meta.radius != radius || meta.method != method {
            log::warn!(
                "cache metadata {} does not match its key; recomputing",
                meta_path.display()
            );
            return Ok(None);
        }
        if digest(&csv_bytes) != meta.sha256 {
            log::warn!("checksum mismatch for {}; recomputing", csv_path.display());
            return Ok(None);
        }
        let parsed = std::str::from_utf8(&csv_bytes)
            .ok()
            .and_then(|text| parse_csv(text, &meta));
        if parsed.is_none() {
            log::warn!("malformed cache table {}; recomputing", csv_path.display());
        }
        Ok(parsed)
    }

    pub fn store(&self, table: &PotentialTable) -> Result<()> {
        let (csv_path, meta_path) = self.paths(table.d, table.kind, table.radius, &table.method);
        let csv = table_csv(table);
        let meta = TableMeta {
            d: table.d,
            kind: table.kind,
            radius: table.radius,
            method: table.method.clone(),
            accuracy: table.accuracy,
            sha256: digest(csv.as_bytes()),
        };
        let meta_text =
            serde_json::to_string_pretty(&meta).map_err(|e| Error::Cache(e.to_string()))?;
        let lock = self.lock_file()?;
        lock.lock()?;
        let tmp_csv = csv_path.with_extension("csv.tmp");
        let tmp_meta = meta_path.with_extension("json.tmp");
        fs::write(&tmp_csv, csv)?;
        fs::write(&tmp_meta, meta_text)?;
        fs::rename(&tmp_csv, &csv_path)?;
        fs::rename(&tmp_meta, &meta_path)?;
        lock.unlock()?;
        Ok(())
    }

    /// Cached table for `(d, radius)` with the standard method, computed and
    /// stored on a miss.
    pub fn table(&self, d: usize, radius: i64) -> Result<PotentialTable> {
        let (kind, method) = crate::harmonic::standard_method(d)?;
        if let Some(t) = self.load(d, kind, radius, method)? {
            return Ok(t);
        }
        let t = standard_table(d, radius)?;
        self.store(&t)?;
        Ok(t)
    }
}

/// Table from the cache when one is given, otherwise computed directly.
pub fn load_or_build(cache: Option<&Cache>, d: usize, radius: i64) -> Result<PotentialTable> {
    match cache {
        Some(c) => c.table(d, radius),
        None => standard_table(d, radius),
    }
}
