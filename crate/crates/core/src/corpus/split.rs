use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pairs::QueryArticlePair;
use crate::error::{Error, Result};
use crate::io::{read_to_string, write_atomic};

pub const MANIFEST_FORMAT: &str = "hybrid-rank.split-manifest";
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

impl std::str::FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "dev" => Ok(SplitName::Dev),
            "test" => Ok(SplitName::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSizes {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.dev + self.test
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<QueryArticlePair>,
    pub dev: Vec<QueryArticlePair>,
    pub test: Vec<QueryArticlePair>,
    pub seed: u64,
}

impl DatasetSplit {
    /// Shuffles `pairs` with a seeded generator and carves off the three splits.
    /// Pairs beyond `sizes.total()` are left out. Each split is kept in
    /// ascending pair id order.
    pub fn make(pairs: &[QueryArticlePair], sizes: SplitSizes, seed: u64) -> Result<Self> {
        if sizes.total() > pairs.len() {
            return Err(Error::Size {
                requested: sizes.total(),
                available: pairs.len(),
            });
        }
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        let take = |range: std::ops::Range<usize>| {
            let mut idx = order[range].to_vec();
            idx.sort_unstable_by_key(|&i| pairs[i].pair_id);
            idx.into_iter()
                .map(|i| pairs[i].clone())
                .collect::<Vec<_>>()
        };
        let a = sizes.train;
        let b = a + sizes.dev;
        let c = b + sizes.test;
        Ok(Self {
            train: take(0..a),
            dev: take(a..b),
            test: take(b..c),
            seed,
        })
    }

    pub fn get(&self, which: SplitName) -> &[QueryArticlePair] {
        match which {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }

    pub fn sizes(&self) -> SplitSizes {
        SplitSizes {
            train: self.train.len(),
            dev: self.dev.len(),
            test: self.test.len(),
        }
    }

    /// (pair id, split) for every assigned pair, ascending by pair id.
    pub fn manifest(&self) -> Vec<(u32, SplitName)> {
        let mut rows: Vec<(u32, SplitName)> = [SplitName::Train, SplitName::Dev, SplitName::Test]
            .into_iter()
            .flat_map(|s| self.get(s).iter().map(move |p| (p.pair_id, s)))
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Rebuilds a split from a manifest and the pairs it refers to.
    pub fn from_manifest(
        pairs: &[QueryArticlePair],
        manifest: &[(u32, SplitName)],
        seed: u64,
    ) -> Result<Self> {
        let by_id: HashMap<u32, &QueryArticlePair> = pairs.iter().map(|p| (p.pair_id, p)).collect();
        let mut split = DatasetSplit {
            train: Vec::new(),
            dev: Vec::new(),
            test: Vec::new(),
            seed,
        };
        for &(id, which) in manifest {
            let pair = by_id
                .get(&id)
                .ok_or_else(|| Error::Format(format!("manifest refers to unknown pair {id}")))?;
            let dst = match which {
                SplitName::Train => &mut split.train,
                SplitName::Dev => &mut split.dev,
                SplitName::Test => &mut split.test,
            };
            dst.push((*pair).clone());
        }
        for v in [&mut split.train, &mut split.dev, &mut split.test] {
            v.sort_unstable_by_key(|p| p.pair_id);
        }
        Ok(split)
    }
}

pub fn make_splits(
    pairs: &[QueryArticlePair],
    sizes: SplitSizes,
    seed: u64,
) -> Result<DatasetSplit> {
    DatasetSplit::make(pairs, sizes, seed)
}

#[derive(Serialize, Deserialize)]
struct ManifestHeader {
    format: String,
    version: u32,
    seed: u64,
    sizes: SplitSizes,
}

#[derive(Serialize, Deserialize)]
struct ManifestRow {
    pair_id: u32,
    split: SplitName,
}

pub fn write_manifest(path: &Path, split: &DatasetSplit) -> Result<()> {
    let header = ManifestHeader {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        seed: split.seed,
        sizes: split.sizes(),
    };
    let rows = split.manifest();
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        for (pair_id, split) in rows {
            serde_json::to_writer(&mut *w, &ManifestRow { pair_id, split })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Returns (seed, rows).
pub fn read_manifest(path: &Path) -> Result<(u64, Vec<(u32, SplitName)>)> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty manifest", path.display())))?;
    let header: ManifestHeader = serde_json::from_str(first).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.format != MANIFEST_FORMAT || header.version != MANIFEST_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported manifest {} v{}",
            path.display(),
            header.format,
            header.version
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: ManifestRow = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        rows.push((row.pair_id, row.split));
    }
    Ok((header.seed, rows))
}
