//! Metric reports as JSON/CSV and the fixed-order summary table that
//! collects them.
//!
//! ```bash
//! cargo run --example reports
//! ```

use inkbridge::report::{parse_reports, reports_to_json, summarize_reports, ItemValue, MetricReport};

fn main() -> inkbridge::Result<()> {
    let items = vec![ItemValue { id: "p01".into(), value: 0.61 }, ItemValue { id: "p02".into(), value: 0.47 }];
    let meteor = MetricReport::new("meteor_simplified", 0.54).with("n_pairs", 2).with_items(items);
    println!("{}", meteor.to_json());
    print!("{}", meteor.to_csv());

    let reports = vec![
        MetricReport::new("dce", 0.85).with("pca_dim", 100).with("estimator", "ledoit_wolf"),
        MetricReport::new("mce", 1.44),
        MetricReport::new("mte", 1.26),
        MetricReport::new("fid", 57.2).with("estimator", "sample"),
        meteor,
    ];
    let round_trip = parse_reports(&reports_to_json(&reports), "reports")?;
    assert_eq!(round_trip, reports);

    let table = summarize_reports(&reports)?;
    println!("{}", table.to_json());
    print!("{}", table.to_csv());
    Ok(())
}
