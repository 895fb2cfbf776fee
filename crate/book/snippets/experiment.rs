use strbf::experiment::{run_monte_carlo, summarize, ExperimentConfig};
use strbf::series::{IndexRange, MackeyGlassParams};

fn main() {
    let config = ExperimentConfig {
        series: MackeyGlassParams {
            horizon: 1000.0,
            ..Default::default()
        },
        train_range: IndexRange::new(100, 800),
        test_range: IndexRange::new(801, 1000),
        runs: 4,
        ..Default::default()
    };
    let mc = run_monte_carlo(&config).unwrap();
    assert_eq!(mc.records.len(), 4);
    assert_eq!(mc.rbf.train_curve.len(), 3 * 699);

    let table = summarize(&mc.rbf, &mc.strbf);
    for row in &table.rows {
        println!("{:<6} {:>8.2} {:>8.2} {:>6.2}", row.configuration, row.train_mse_db, row.test_mse_db, row.gap_db);
    }

    // Adding runs leaves the first four untouched.
    let more = run_monte_carlo(&ExperimentConfig { runs: 5, ..config }).unwrap();
    assert_eq!(more.records[..4], mc.records[..]);
}
