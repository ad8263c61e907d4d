//! Binary checkpoint for a trained table, plus the JSONL training log.
//!
//! ```text
//! magic "HRBOE\0\0\0" | version u32 | dim u32 | vocab_len u64 | seed u64
//! config_sha256 [32]u8
//! vocab_len x (byte_len u32, utf-8 bytes)
//! vocab_len * dim x f64           (row-major)
//! ```
//! All integers and floats are little-endian.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::table::EmbeddingTable;
use super::train::TrainLogEntry;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::io::{read_bytes, write_atomic};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"HRBOE\0\0\0";
const CHECKPOINT_VERSION: u32 = 1;

pub fn config_digest(cfg: &TrainConfig) -> [u8; 32] {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&json).into()
}

pub fn save_checkpoint(path: &Path, table: &EmbeddingTable, cfg: &TrainConfig) -> Result<()> {
    write_atomic(path, |w| {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(table.dim() as u32).to_le_bytes())?;
        w.write_all(&(table.len() as u64).to_le_bytes())?;
        w.write_all(&cfg.seed.to_le_bytes())?;
        w.write_all(&config_digest(cfg))?;
        for t in table.tokens() {
            w.write_all(&(t.len() as u32).to_le_bytes())?;
            w.write_all(t.as_bytes())?;
        }
        for x in table.weights() {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    })
}

/// Header fields recorded in a checkpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointInfo {
    pub seed: u64,
    pub config_sha256: [u8; 32],
}

pub fn load_checkpoint(path: &Path) -> Result<(EmbeddingTable, CheckpointInfo)> {
    let bytes = read_bytes(path)?;
    let bad = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let out = bytes
            .get(pos..pos + n)
            .ok_or_else(|| bad("truncated checkpoint"))?;
        pos += n;
        Ok(out)
    };
    if take(8)? != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(bad(&format!("unsupported checkpoint version {version}")));
    }
    let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let config_sha256: [u8; 32] = take(32)?.try_into().unwrap();
    let mut tokens = Vec::with_capacity(n);
    for _ in 0..n {
        let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let s = std::str::from_utf8(take(len)?).map_err(|_| bad("token is not utf-8"))?;
        tokens.push(s.to_string());
    }
    let mut weights = Vec::with_capacity(n * dim);
    for _ in 0..n * dim {
        weights.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes after weights"));
    }
    let table = EmbeddingTable::from_parts(tokens, dim, weights)?;
    Ok((
        table,
        CheckpointInfo {
            seed,
            config_sha256,
        },
    ))
}

pub fn write_train_log(path: &Path, log: &[TrainLogEntry]) -> Result<()> {
    write_atomic(path, |w| {
        for entry in log {
            serde_json::to_writer(&mut *w, entry)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}
