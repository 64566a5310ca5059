//! Five-fold cross-validation of a single random forest on the synthetic
//! corpus, with the full and the language-independent feature sets.
//!
//! cargo run --release -p botscope --example cross_validation

use botscope::corpus::{synthesize_corpus, CorpusSpec, LabeledRecord};
use botscope::ensemble::extract_records;
use botscope::features::default_registry;
use botscope::forest::{cross_validate, ForestParams};

fn main() -> botscope::Result<()> {
    let dataset = synthesize_corpus(&CorpusSpec::fixture(), 42)?;
    let registry = default_registry();
    let records: Vec<&LabeledRecord> = dataset.records().iter().collect();
    let vectors = extract_records(&records, &registry)?;
    let labels = records.iter().map(|r| r.label);

    let full: Vec<_> = vectors.iter().cloned().zip(labels.clone()).collect();
    let universal = registry.universal();
    let columns = registry.columns_of(&universal)?;
    let projected: Vec<_> = vectors
        .iter()
        .map(|v| v.project(&columns, &universal.version))
        .zip(labels)
        .collect();

    let params = ForestParams::default();
    for (name, data) in [("full", &full), ("universal", &projected)] {
        let report = cross_validate(data, &params, 5, 42)?;
        let folds: Vec<String> = report
            .per_fold_auc
            .iter()
            .map(|a| format!("{a:.3}"))
            .collect();
        println!(
            "{name:<9} {} features: AUC {:.4} (folds {}), accuracy at 0.5 {:.3}",
            data[0].0.len(),
            report.auc,
            folds.join(" "),
            report.accuracy()
        );
    }
    Ok(())
}
