//! Position fingerprint map.
//!
//! The floor is quantized into 0.5 m grid cells. Each cell remembers a
//! fingerprint: a hash over the sorted set of sensor ids that witnessed
//! an entity there. A position claim matches a cell only when the same
//! sensor constellation sees the claimant, which an off-site impersonator
//! cannot reproduce. The map persists as sorted plain text, one cell per
//! line, so runs diff cleanly.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scene::Vec3;

/// Side length of a fingerprint grid cell, metres.
pub const CELL_SIZE_M: f64 = 0.5;

/// Grid cell containing a world position (floor-plane quantization).
pub fn cell_of(p: Vec3) -> (i64, i64) {
    ((p.x / CELL_SIZE_M).floor() as i64, (p.y / CELL_SIZE_M).floor() as i64)
}

/// Fingerprint over a witnessing sensor set: ids are deduplicated and
/// sorted before hashing, so the value depends only on set membership.
pub fn witness_hash(witnesses: &[String]) -> u64 {
    let mut ids: Vec<&str> = witnesses.iter().map(|s| s.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut hasher = Sha256::new();
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            hasher.update([b',']);
        }
        hasher.update(id.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("sha256 yields at least 8 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerprintRecord {
    pub hash: u64,
    /// Number of confirmations (initial seeding counts as the first).
    pub count: u64,
    pub first_seen_s: f64,
    pub last_seen_s: f64,
}

/// Persistent cell-to-fingerprint store.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapDb {
    records: BTreeMap<(i64, i64), FingerprintRecord>,
}

impl MapDb {
    pub fn new() -> Self {
        MapDb::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, cell: (i64, i64)) -> Option<&FingerprintRecord> {
        self.records.get(&cell)
    }

    /// Seed a cell first seen now. The cell must be vacant.
    pub fn seed(&mut self, cell: (i64, i64), hash: u64, now_s: f64) {
        debug_assert!(!self.records.contains_key(&cell), "seeding an occupied cell");
        self.records.insert(
            cell,
            FingerprintRecord { hash, count: 1, first_seen_s: now_s, last_seen_s: now_s },
        );
    }

    /// Record another successful match against an existing cell.
    pub fn confirm(&mut self, cell: (i64, i64), now_s: f64) {
        let rec = self.records.get_mut(&cell).expect("confirming a vacant cell");
        rec.count += 1;
        rec.last_seen_s = now_s;
    }

    /// Text form: one line per cell, cells in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (&(i, j), r) in &self.records {
            writeln!(
                out,
                "cell={i},{j} hash={:016x} count={} first={:.6} last={:.6}",
                r.hash, r.count, r.first_seen_s, r.last_seen_s
            )
            .expect("string write");
        }
        out
    }

    /// Parse the text form produced by [`MapDb::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut records = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cell = None;
            let mut hash = None;
            let mut count = None;
            let mut first = None;
            let mut last = None;
            for field in line.split_whitespace() {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("map line {}: bad field {field}", ln + 1)))?;
                match key {
                    "cell" => {
                        let (a, b) = value.split_once(',').ok_or_else(|| {
                            Error::invalid(format!("map line {}: bad cell {value}", ln + 1))
                        })?;
                        cell = Some((
                            a.parse::<i64>().map_err(|e| {
                                Error::invalid(format!("map line {}: {e}", ln + 1))
                            })?,
                            b.parse::<i64>().map_err(|e| {
                                Error::invalid(format!("map line {}: {e}", ln + 1))
                            })?,
                        ));
                    }
                    "hash" => {
                        hash = Some(u64::from_str_radix(value, 16).map_err(|e| {
                            Error::invalid(format!("map line {}: {e}", ln + 1))
                        })?);
                    }
                    "count" => {
                        count = Some(value.parse::<u64>().map_err(|e| {
                            Error::invalid(format!("map line {}: {e}", ln + 1))
                        })?);
                    }
                    "first" => {
                        first = Some(value.parse::<f64>().map_err(|e| {
                            Error::invalid(format!("map line {}: {e}", ln + 1))
                        })?);
                    }
                    "last" => {
                        last = Some(value.parse::<f64>().map_err(|e| {
                            Error::invalid(format!("map line {}: {e}", ln + 1))
                        })?);
                    }
                    other => {
                        return Err(Error::invalid(format!(
                            "map line {}: unknown field {other}",
                            ln + 1
                        )))
                    }
                }
            }
            match (cell, hash, count, first, last) {
                (Some(c), Some(h), Some(n), Some(f), Some(l)) => {
                    records.insert(
                        c,
                        FingerprintRecord { hash: h, count: n, first_seen_s: f, last_seen_s: l },
                    );
                }
                _ => {
                    return Err(Error::invalid(format!("map line {}: missing fields", ln + 1)))
                }
            }
        }
        Ok(MapDb { records })
    }
}

// ── tests ──────────────────────────────────────────────────────────────
