//! Regenerates the bundled planted-topic corpus and its run config.
//!
//! `cargo run -p adm-core --example gen_synthetic -- [DIR]` (default
//! `data/synthetic` under the workspace root).

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use adm_core::synth::{planted_corpus, write_jsonl, SyntheticConfig};

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic"));
    std::fs::create_dir_all(&dir)?;
    let docs = planted_corpus(&SyntheticConfig::default());
    write_jsonl(&docs, BufWriter::new(File::create(dir.join("corpus.jsonl"))?))?;
    let config = serde_json::json!({
        "corpus": "corpus.jsonl",
        "output_dir": "out",
        "k": 8,
        "cut_k": 3,
        "out_dim": 5,
        "seed": 42,
        "coherence_topics": 8,
    });
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
    println!("wrote {} documents to {}", docs.len(), dir.display());
    Ok(())
}
