//! The hypothesis tests used to compare groups, on small worked inputs.
//!
//! cargo run -p botscope --example statistics

use botscope::analysis::{mann_whitney_u, threshold_validation, two_proportion_z};
use botscope::corpus::Label;

fn main() -> botscope::Result<()> {
    for (a, b) in [
        (vec![1.0, 2.0], vec![3.0, 4.0]),
        (vec![1.0, 2.0, 3.0, 4.0], vec![10.0, 11.0, 12.0, 13.0]),
        (
            vec![0.1, 0.4, 0.4, 0.9, 0.3, 0.8, 0.2],
            vec![0.5, 0.6, 0.7, 0.95, 0.99, 0.4, 0.85],
        ),
    ] {
        let r = mann_whitney_u(&a, &b)?;
        println!(
            "MWU {a:?} vs {b:?}: U = {}, p = {:.6} ({:?}) {}",
            r.statistic,
            r.p_value,
            r.method,
            r.stars()
        );
    }

    let z = two_proportion_z(30, 100, 10, 100)?;
    println!(
        "30/100 vs 10/100: z = {:.4}, p = {:.3e} {}",
        z.statistic,
        z.p_value,
        z.stars()
    );

    let labeled: Vec<(f64, Label)> = [
        (0.9, Label::Bot),
        (0.8, Label::Bot),
        (0.55, Label::Human),
        (0.3, Label::Bot),
        (0.2, Label::Human),
        (0.1, Label::Human),
    ]
    .into();
    for row in threshold_validation(&labeled, &[0.5, 0.7, 1.0])? {
        println!(
            "threshold {}: accuracy {:.3} precision {:.3} recall {:.3} f1 {:.3}{}",
            row.threshold,
            row.accuracy,
            row.precision,
            row.recall,
            row.f1,
            if row.degenerate {
                " (no positives)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
