use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strbf::experiment::{mse_to_db, run_monte_carlo, smooth_curve, summarize, ComparisonTable, ExperimentConfig, RunStats};
use strbf::network::ModelKind;

fn stats_with_db(model: ModelKind, train_db: f64, test_db: f64) -> RunStats {
    let train = 10f64.powf(train_db / 10.0);
    let test = 10f64.powf(test_db / 10.0);
    RunStats {
        model,
        run_seeds: vec![0],
        per_run_train_mse: vec![train],
        per_run_test_mse: vec![test],
        mean_train_mse: train,
        mean_test_mse: test,
        mean_train_mse_db: train_db,
        mean_test_mse_db: test_db,
        train_curve: vec![],
        test_curve: vec![],
    }
}

#[test]
fn reference_table_gaps() {
    let rbf = stats_with_db(ModelKind::Rbf, -19.38, -20.88);
    let strbf = stats_with_db(ModelKind::Strbf, -23.52, -26.34);
    let table = summarize(&rbf, &strbf);
    let gap = table.row("gap").unwrap();
    assert!((gap.train_mse_db - 4.14).abs() < 1e-9);
    assert!((gap.test_mse_db - 5.46).abs() < 1e-9);
    assert!((table.row("strbf").unwrap().gap_db - 5.46).abs() < 1e-9);
    assert!((mse_to_db(strbf.mean_train_mse).unwrap() + 23.52).abs() < 1e-9);

    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("configuration,train_mse_db,test_mse_db,gap_db\n"));
    assert_eq!(ComparisonTable::read_csv(buf.as_slice()).unwrap(), table);
}

/// Direct truncated box filter: position i averages the samples with
/// offsets -(w-1)/2 ..= w/2 that exist.
fn box_filter(x: &[f64], w: usize) -> Vec<f64> {
    let (l, r) = ((w - 1) / 2, w / 2);
    (0..x.len())
        .map(|i| {
            let idx: Vec<usize> = (i.saturating_sub(l)..=(i + r).min(x.len() - 1)).collect();
            idx.iter().map(|&j| x[j]).sum::<f64>() / idx.len() as f64
        })
        .collect()
}

/// Full convolution with an explicit kernel; `offset` is the index of the
/// kernel tap aligned with the output sample.
fn convolve_at(x: &[f64], kernel: &[f64], offset: usize, i: usize) -> f64 {
    kernel
        .iter()
        .enumerate()
        .map(|(k, c)| c * x[i + k - offset])
        .sum()
}

#[test]
fn smoothing_matches_direct_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trace: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
    for w in [1, 2, 5, 50] {
        let once = smooth_curve(&trace, w);
        for (a, b) in once.iter().zip(box_filter(&trace, w)) {
            assert!((a - b).abs() < 1e-12);
        }

        // Away from the edges, two passes are one pass of the box kernel
        // convolved with itself.
        let twice = smooth_curve(&once, w);
        let box_kernel = vec![1.0 / w as f64; w];
        let mut composed = vec![0.0; 2 * w - 1];
        for (i, a) in box_kernel.iter().enumerate() {
            for (j, b) in box_kernel.iter().enumerate() {
                composed[i + j] += a * b;
            }
        }
        let offset = 2 * ((w - 1) / 2);
        for i in (2 * w)..(trace.len() - 2 * w) {
            let direct = convolve_at(&trace, &composed, offset, i);
            assert!((twice[i] - direct).abs() < 1e-12, "w={w} i={i}");
        }
    }
}

#[test]
fn hundred_run_ordering() {
    let mc = run_monte_carlo(&ExperimentConfig::default()).unwrap();
    assert!(mc.strbf.mean_test_mse < mc.rbf.mean_test_mse);
    assert!(mc.strbf.mean_train_mse < mc.rbf.mean_train_mse);
    let table = summarize(&mc.rbf, &mc.strbf);
    let gap = table.row("gap").unwrap();
    assert!(gap.train_mse_db > 0.0 && gap.test_mse_db > 0.0);
}
