//! Trains the ensemble, fits the CAP calibration on a separate labeled set and
//! prints the full score report for a few accounts.
//!
//! cargo run --release -p botscope --example score_account

use botscope::corpus::{synthesize_corpus, CorpusSpec};
use botscope::ensemble::{train_esc, Calibration, DEFAULT_PRIOR};
use botscope::features::default_registry;
use botscope::forest::ForestParams;

fn main() -> botscope::Result<()> {
    let spec = CorpusSpec::fixture();
    let training = synthesize_corpus(&spec, 1)?;
    let mut held_out = spec.clone();
    held_out.name = "calibration".into();
    let calibration_set = synthesize_corpus(&held_out, 2)?;

    let model = train_esc(
        &[training],
        &default_registry(),
        &ForestParams::default(),
        1,
    )?;
    let calibration = Calibration::fit(
        &model,
        std::slice::from_ref(&calibration_set),
        DEFAULT_PRIOR,
    )?;
    println!(
        "model {} calibration {}",
        model.model_version, calibration.version
    );

    for record in calibration_set.records().iter().step_by(97) {
        let report = model
            .score_account(&record.payload)?
            .calibrate(&calibration)?;
        println!(
            "{:<10} label {:<5} raw {:.2} display {:.1}/5 universal {:.1}/5 CAP {:.3}",
            report.user.user_id,
            record.label.as_str(),
            report.raw_overall(),
            report.display_overall(),
            report.display_universal(),
            report.cap.english.unwrap_or(f64::NAN),
        );
    }

    let first = &calibration_set.records()[0].payload;
    let report = model.score_account(first)?.calibrate(&calibration)?;
    println!(
        "\n{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}
