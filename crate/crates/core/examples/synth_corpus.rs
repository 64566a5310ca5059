//! Generates the labeled training corpus and writes it to a directory as
//! `payloads.jsonl` + `labels.csv`.
//!
//! cargo run -p botscope --example synth_corpus -- /tmp/corpus

use botscope::corpus::{load_dataset, save_dataset, synthesize_corpus, CorpusSpec};

fn main() -> botscope::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "corpus".into());
    let spec = CorpusSpec::fixture();
    let dataset = synthesize_corpus(&spec, 42)?;
    save_dataset(&dataset, std::path::Path::new(&dir))?;

    let back = load_dataset(std::path::Path::new(&dir), dataset.name())?;
    let (bots, humans) = back.counts();
    println!(
        "{} accounts ({bots} bots, {humans} humans) written to {dir}",
        back.len()
    );
    for (archetype, n) in &spec.counts {
        println!("  {archetype:?}: {n}");
    }
    Ok(())
}
