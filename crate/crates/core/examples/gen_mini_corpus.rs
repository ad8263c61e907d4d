//! Regenerates `data/mini_corpus.jsonl`.
//!
//!     cargo run -p hybrid-rank-core --example gen_mini_corpus [out] [n] [seed]

use std::io::Write;

use hybrid_rank::synth::{news_records, NewsConfig};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/mini_corpus.jsonl").into());
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(20_17, |s| s.parse().expect("seed"));

    let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
    for r in news_records(n, &NewsConfig::default(), seed) {
        let line = serde_json::json!({ "id": r.id, "title": r.title, "body": r.body });
        writeln!(f, "{line}")?;
    }
    f.flush()
}
