//! Picks the training sets for the metadata-only classifier by exhaustive
//! search, with one of the candidates carrying inverted labels.
//!
//! cargo run --release -p botscope --example lite_selection

use botscope::corpus::{
    synthesize_corpus, Archetype, CorpusSpec, Label, LabeledDataset, LabeledRecord,
};
use botscope::ensemble::train_esc;
use botscope::features::default_registry;
use botscope::forest::ForestParams;
use botscope::lite::{select_training_sets, SelectionWeights};

fn dataset(name: &str, mix: &[(Archetype, u32)], seed: u64) -> botscope::Result<LabeledDataset> {
    let mut spec = CorpusSpec::fixture().with_counts(mix);
    spec.name = name.into();
    let ds = synthesize_corpus(&spec, seed)?;
    let records = ds
        .records()
        .iter()
        .map(|r| LabeledRecord {
            payload: r.payload.with_user_id(&format!("{name}-{}", r.user_id())),
            ..r.clone()
        })
        .collect();
    LabeledDataset::new(name, records)
}

fn main() -> botscope::Result<()> {
    let registry = default_registry();
    let params = ForestParams::default().with_trees(50);
    let spam = dataset(
        "spam",
        &[(Archetype::Human, 60), (Archetype::Spammer, 60)],
        1,
    )?;
    let followers = dataset(
        "followers",
        &[(Archetype::Human, 60), (Archetype::FakeFollower, 60)],
        2,
    )?;
    let inverted = {
        let ds = dataset(
            "inverted",
            &[(Archetype::Human, 60), (Archetype::Spammer, 60)],
            3,
        )?;
        let flipped = ds
            .records()
            .iter()
            .map(|r| LabeledRecord {
                label: if r.label.is_bot() {
                    Label::Human
                } else {
                    Label::Bot
                },
                bot_class: None,
                ..r.clone()
            })
            .collect();
        LabeledDataset::new("inverted", flipped)?
    };
    let holdout = dataset(
        "holdout",
        &[
            (Archetype::Human, 50),
            (Archetype::Spammer, 25),
            (Archetype::FakeFollower, 25),
        ],
        4,
    )?;
    let reference = train_esc(&[spam.clone(), followers.clone()], &registry, &params, 5)?;

    let model = select_training_sets(
        &[spam, followers, inverted],
        &holdout,
        &reference,
        SelectionWeights::default(),
        &registry,
        &params,
        6,
    )?;
    print!("{}", model.selection_csv());
    println!("selected: {}", model.selected_datasets.join(", "));

    let probe = &holdout.records()[0].payload;
    println!(
        "lite score for {}: {:.2}",
        probe.user.user_id,
        model.score(&probe.user, probe.probe_time)?
    );
    Ok(())
}
