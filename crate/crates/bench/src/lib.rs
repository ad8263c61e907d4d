//! Shared fixtures for the criterion benchmarks.

use hybrid_rank::corpus::{build_pairs, DatasetSplit, PairConfig, SplitSizes};
use hybrid_rank::synth::{news_records, NewsConfig};

/// A seeded synthetic split with `test` evaluation pairs.
pub fn news_split(train: usize, dev: usize, test: usize, seed: u64) -> DatasetSplit {
    let sizes = SplitSizes { train, dev, test };
    let records = news_records(sizes.total() * 11 / 10, &NewsConfig::default(), seed);
    let pairs = build_pairs(&records, &PairConfig::default()).pairs;
    DatasetSplit::make(&pairs, sizes, seed).expect("generator yields enough pairs")
}
