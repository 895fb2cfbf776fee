//! Monte-Carlo comparison of the conventional and spatio-temporal networks.
//!
//! Every run derives its seed from `(base_seed, run_index)` alone, draws one
//! noise realization of the training range, and trains both models on that
//! same realization. Aggregation is a fixed-order reduction over ascending
//! run index, so a configuration fixes every reported number bit for bit.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csvfmt::{fmt_f64, parse_f64};
use crate::error::{Error, Result};
use crate::kernels::{KernelKind, KmeansConfig};
use crate::network::{init_network, BranchInput, InitConfig, ModelKind, NetworkState, Topology};
use crate::series::{
    add_awgn_in_range, generate_mackey_glass, make_windows, IndexRange, MackeyGlassParams, TimeSeries,
    WindowedDataset,
};

/// Where training noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScope {
    /// Only samples in the training range; validation stays clean.
    #[default]
    Train,
    /// Every sample of the series.
    All,
}

impl fmt::Display for NoiseScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseScope::Train => "train",
            NoiseScope::All => "all",
        })
    }
}

impl FromStr for NoiseScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(NoiseScope::Train),
            "all" => Ok(NoiseScope::All),
            other => Err(Error::parse("noise scope", other)),
        }
    }
}

/// Everything that determines a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub series: MackeyGlassParams,
    pub snr_db: f64,
    pub noise_scope: NoiseScope,
    pub train_range: IndexRange,
    pub test_range: IndexRange,
    pub lag_count: usize,
    pub rbf_neurons: usize,
    /// Neurons per temporal branch.
    pub strbf_neurons: usize,
    pub strbf_branch_input: BranchInput,
    /// Branch count for [`BranchInput::FullVector`]; per-lag networks always
    /// have `lag_count` branches.
    pub strbf_branches: usize,
    pub kernel: KernelKind,
    pub eta_rbf: f64,
    pub eta_strbf: f64,
    pub spread_scale_rbf: f64,
    pub spread_scale_strbf: f64,
    /// Half-width of the uniform weight/bias initialization.
    pub init_range: f64,
    pub kmeans: KmeansConfig,
    pub runs: usize,
    pub base_seed: u64,
    pub epochs: usize,
    pub smoothing_window: usize,
    /// Run whose test predictions are exported.
    pub prediction_run: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            series: MackeyGlassParams::default(),
            snr_db: 30.0,
            noise_scope: NoiseScope::Train,
            train_range: IndexRange::new(100, 2500),
            test_range: IndexRange::new(2501, 3000),
            lag_count: 2,
            rbf_neurons: 20,
            strbf_neurons: 10,
            strbf_branch_input: BranchInput::PerLag,
            strbf_branches: 2,
            kernel: KernelKind::Gaussian,
            eta_rbf: 1e-2,
            eta_strbf: 5e-2,
            spread_scale_rbf: 4.5,
            spread_scale_strbf: 2.25,
            init_range: 1.5,
            kmeans: KmeansConfig::default(),
            runs: 100,
            base_seed: 1,
            epochs: 3,
            smoothing_window: 50,
            prediction_run: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn rbf_topology(&self) -> Topology {
        Topology::rbf(self.rbf_neurons, self.lag_count)
    }

    pub fn strbf_topology(&self) -> Topology {
        match self.strbf_branch_input {
            BranchInput::PerLag => Topology::strbf(self.strbf_neurons, self.lag_count),
            BranchInput::FullVector => {
                Topology::strbf_full_vector(self.strbf_neurons, self.strbf_branches, self.lag_count)
            }
        }
    }

    pub fn topology(&self, model: ModelKind) -> Topology {
        match model {
            ModelKind::Rbf => self.rbf_topology(),
            ModelKind::Strbf => self.strbf_topology(),
        }
    }

    pub fn eta(&self, model: ModelKind) -> f64 {
        match model {
            ModelKind::Rbf => self.eta_rbf,
            ModelKind::Strbf => self.eta_strbf,
        }
    }

    pub fn init_config(&self, model: ModelKind) -> InitConfig {
        InitConfig {
            kernel: self.kernel,
            spread_scale: match model {
                ModelKind::Rbf => self.spread_scale_rbf,
                ModelKind::Strbf => self.spread_scale_strbf,
            },
            init_range: self.init_range,
            kmeans: self.kmeans.clone(),
        }
    }

    /// Number of samples the series parameters produce.
    pub fn series_len(&self) -> usize {
        (self.series.horizon / self.series.sample_interval + 1e-9).floor() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        self.series.validate()?;
        self.rbf_topology().validate()?;
        self.strbf_topology().validate()?;
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.train_range.overlaps(&self.test_range) {
            return bad("train_range and test_range overlap".into());
        }
        let len = self.series_len();
        for (name, r) in [("train_range", self.train_range), ("test_range", self.test_range)] {
            if r.is_empty() || r.end >= len {
                return bad(format!("{name} [{}, {}] outside the {len}-sample series", r.start, r.end));
            }
        }
        for (name, eta) in [("eta_rbf", self.eta_rbf), ("eta_strbf", self.eta_strbf)] {
            if !(eta > 0.0 && eta.is_finite()) {
                return bad(format!("{name} must be positive, got {eta}"));
            }
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db must be finite or inf, got {}", self.snr_db));
        }
        if self.smoothing_window == 0 {
            return bad("smoothing_window must be at least 1".into());
        }
        if self.prediction_run >= self.runs {
            return bad(format!("prediction_run {} >= runs {}", self.prediction_run, self.runs));
        }
        Ok(())
    }

    pub fn noise_range(&self) -> IndexRange {
        match self.noise_scope {
            NoiseScope::Train => self.train_range,
            NoiseScope::All => IndexRange::full(self.series_len()),
        }
    }
}

/// `10·log10(mse)`.
pub fn mse_to_db(mse: f64) -> Result<f64> {
    if !(mse > 0.0) {
        return Err(Error::Domain(format!("MSE must be positive to convert to dB, got {mse}")));
    }
    Ok(10.0 * mse.log10())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of run `run_index`; depends on nothing else, so adding runs never
/// perturbs existing ones.
pub fn run_seed(base_seed: u64, run_index: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ (run_index as u64).wrapping_mul(0xd6e8_feb8_6659_fd93))
}

const NOISE_STREAM: u64 = 0;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream)))
}

fn model_stream(model: ModelKind) -> u64 {
    match model {
        ModelKind::Rbf => 1,
        ModelKind::Strbf => 2,
    }
}

/// Noisy series and the datasets cut from it for one run.
#[derive(Debug, Clone)]
pub struct RunData {
    pub seed: u64,
    pub noisy: TimeSeries,
    pub train: WindowedDataset,
    /// Windows of the test range of the noisy series (clean under the
    /// default noise scope).
    pub test: WindowedDataset,
}

/// Prepares the data realization of run `run_index` from the clean series.
pub fn prepare_run(config: &ExperimentConfig, clean: &TimeSeries, run_index: usize) -> Result<RunData> {
    let seed = run_seed(config.base_seed, run_index);
    let mut rng = stream_rng(seed, NOISE_STREAM);
    let noisy = add_awgn_in_range(clean, config.noise_range(), config.snr_db, &mut rng)?;
    let train = make_windows(&noisy, config.lag_count, config.train_range)?;
    let test = make_windows(&noisy, config.lag_count, config.test_range)?;
    Ok(RunData {
        seed,
        noisy,
        train,
        test,
    })
}

/// A model trained and evaluated within one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub model: ModelKind,
    pub state: NetworkState,
    /// `e²(k)` of every training iteration.
    pub train_trace: Vec<f64>,
    pub test_predictions: Vec<f64>,
    pub test_squared_errors: Vec<f64>,
    /// Mean of the training trace.
    pub train_mse: f64,
    pub test_mse: f64,
}

/// Initializes, trains and evaluates one model on prepared run data.
pub fn train_model(config: &ExperimentConfig, data: &RunData, model: ModelKind) -> Result<ModelRecord> {
    train_model_with_eta(config, data, model, config.eta(model))
}

/// [`train_model`] with an explicit learning rate (zero allowed).
pub fn train_model_with_eta(
    config: &ExperimentConfig,
    data: &RunData,
    model: ModelKind,
    eta: f64,
) -> Result<ModelRecord> {
    let mut rng = stream_rng(data.seed, model_stream(model));
    let mut state = init_network(config.topology(model), &data.train, &config.init_config(model), &mut rng)?;
    let train_trace = state.train_online(&data.train, eta, config.epochs)?;
    let train_mse = if train_trace.is_empty() {
        state.evaluate(&data.train)?.mse
    } else {
        train_trace.iter().sum::<f64>() / train_trace.len() as f64
    };
    let eval = state.evaluate(&data.test)?;
    Ok(ModelRecord {
        model,
        state,
        train_trace,
        test_predictions: eval.predictions,
        test_squared_errors: eval.squared_errors,
        train_mse,
        test_mse: eval.mse,
    })
}

/// Both models of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    /// Checksum of the noisy series both models were trained on.
    pub series_checksum: u64,
    pub rbf: ModelRecord,
    pub strbf: ModelRecord,
}

impl RunRecord {
    pub fn model(&self, model: ModelKind) -> &ModelRecord {
        match model {
            ModelKind::Rbf => &self.rbf,
            ModelKind::Strbf => &self.strbf,
        }
    }
}

/// Runs one paired comparison on an already generated clean series.
pub fn run_single_on(config: &ExperimentConfig, clean: &TimeSeries, run_index: usize) -> Result<RunRecord> {
    let wrap = |e: Error| Error::Run {
        run_index,
        source: Box::new(e),
    };
    let data = prepare_run(config, clean, run_index).map_err(wrap)?;
    let rbf = train_model(config, &data, ModelKind::Rbf).map_err(wrap)?;
    let strbf = train_model(config, &data, ModelKind::Strbf).map_err(wrap)?;
    Ok(RunRecord {
        run_index,
        seed: data.seed,
        series_checksum: data.noisy.checksum(),
        rbf,
        strbf,
    })
}

/// Generates the series and runs one paired comparison.
pub fn run_single(config: &ExperimentConfig, run_index: usize) -> Result<RunRecord> {
    config.validate()?;
    let clean = generate_mackey_glass(&config.series)?;
    run_single_on(config, &clean, run_index)
}

/// Monte-Carlo aggregate of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub model: ModelKind,
    pub run_seeds: Vec<u64>,
    pub per_run_train_mse: Vec<f64>,
    pub per_run_test_mse: Vec<f64>,
    pub mean_train_mse: f64,
    pub mean_test_mse: f64,
    pub mean_train_mse_db: f64,
    pub mean_test_mse_db: f64,
    /// Pointwise mean of `e²(k)` across runs.
    pub train_curve: Vec<f64>,
    pub test_curve: Vec<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn pointwise_mean<'a>(curves: impl Iterator<Item = &'a [f64]>) -> Result<Vec<f64>> {
    let mut acc: Option<Vec<f64>> = None;
    let mut n = 0usize;
    for c in curves {
        n += 1;
        match acc.as_mut() {
            None => acc = Some(c.to_vec()),
            Some(a) => {
                if a.len() != c.len() {
                    return Err(Error::InvalidParams("curves of unequal length".into()));
                }
                for (x, y) in a.iter_mut().zip(c) {
                    *x += y;
                }
            }
        }
    }
    Ok(acc
        .map(|a| a.into_iter().map(|x| x / n as f64).collect())
        .unwrap_or_default())
}

/// Aggregates the records of one model in the order given.
pub fn aggregate(records: &[RunRecord], model: ModelKind) -> Result<RunStats> {
    if records.is_empty() {
        return Err(Error::InvalidParams("no runs to aggregate".into()));
    }
    let per_run_train_mse: Vec<f64> = records.iter().map(|r| r.model(model).train_mse).collect();
    let per_run_test_mse: Vec<f64> = records.iter().map(|r| r.model(model).test_mse).collect();
    let mean_train_mse = mean(&per_run_train_mse);
    let mean_test_mse = mean(&per_run_test_mse);
    Ok(RunStats {
        model,
        run_seeds: records.iter().map(|r| r.seed).collect(),
        mean_train_mse_db: mse_to_db(mean_train_mse)?,
        mean_test_mse_db: mse_to_db(mean_test_mse)?,
        train_curve: pointwise_mean(records.iter().map(|r| r.model(model).train_trace.as_slice()))?,
        test_curve: pointwise_mean(records.iter().map(|r| r.model(model).test_squared_errors.as_slice()))?,
        per_run_train_mse,
        per_run_test_mse,
        mean_train_mse,
        mean_test_mse,
    })
}

/// Output of [`run_monte_carlo`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub records: Vec<RunRecord>,
    pub rbf: RunStats,
    pub strbf: RunStats,
    /// Clean series the runs were built from.
    pub clean: TimeSeries,
}

impl MonteCarlo {
    pub fn stats(&self, model: ModelKind) -> &RunStats {
        match model {
            ModelKind::Rbf => &self.rbf,
            ModelKind::Strbf => &self.strbf,
        }
    }

    /// Runs in which the spatio-temporal network reached the lower test MSE.
    pub fn strbf_wins(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.strbf.test_mse < r.rbf.test_mse)
            .count()
    }
}

/// Runs `config.runs` paired comparisons in parallel and aggregates them in
/// ascending run order. The first failing run (by index) aborts the whole
/// aggregate.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<MonteCarlo> {
    config.validate()?;
    let clean = generate_mackey_glass(&config.series)?;
    let results: Vec<Result<RunRecord>> = (0..config.runs)
        .into_par_iter()
        .map(|i| run_single_on(config, &clean, i))
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(MonteCarlo {
        rbf: aggregate(&records, ModelKind::Rbf)?,
        strbf: aggregate(&records, ModelKind::Strbf)?,
        records,
        clean,
    })
}

/// Centered moving average over `window` samples, truncated at the edges.
/// Position `i` averages indices `i − (window−1)/2 ..= i + window/2` that
/// exist.
pub fn smooth_curve(trace: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    if window == 1 || trace.is_empty() {
        return trace.to_vec();
    }
    let left = (window - 1) / 2;
    let right = window / 2;
    let mut prefix = Vec::with_capacity(trace.len() + 1);
    prefix.push(0.0);
    for v in trace {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..trace.len())
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(trace.len() - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub configuration: String,
    pub train_mse_db: f64,
    pub test_mse_db: f64,
    pub gap_db: f64,
}

/// Learning-phase and validation MSE of both models plus the gaps.
///
/// Rows are `rbf`, `strbf` and `gap`. On a model row `gap_db` is its
/// validation improvement over `rbf`; the `gap` row holds the training and
/// validation improvements in its phase columns (positive means the
/// spatio-temporal network is better).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(rbf: &RunStats, strbf: &RunStats) -> ComparisonTable {
    let train_gap = rbf.mean_train_mse_db - strbf.mean_train_mse_db;
    let test_gap = rbf.mean_test_mse_db - strbf.mean_test_mse_db;
    ComparisonTable {
        rows: vec![
            SummaryRow {
                configuration: "rbf".into(),
                train_mse_db: rbf.mean_train_mse_db,
                test_mse_db: rbf.mean_test_mse_db,
                gap_db: 0.0,
            },
            SummaryRow {
                configuration: "strbf".into(),
                train_mse_db: strbf.mean_train_mse_db,
                test_mse_db: strbf.mean_test_mse_db,
                gap_db: test_gap,
            },
            SummaryRow {
                configuration: "gap".into(),
                train_mse_db: train_gap,
                test_mse_db: test_gap,
                gap_db: test_gap,
            },
        ],
    }
}

impl ComparisonTable {
    pub fn row(&self, configuration: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.configuration == configuration)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["configuration", "train_mse_db", "test_mse_db", "gap_db"])?;
        for r in &self.rows {
            w.write_record([
                r.configuration.clone(),
                fmt_f64(r.train_mse_db),
                fmt_f64(r.test_mse_db),
                fmt_f64(r.gap_db),
            ])?;
        }
        w.flush().map_err(|e| Error::io("summary.csv", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r
            .records()
            .map(|rec| {
                let rec = rec?;
                if rec.len() != 4 {
                    return Err(Error::parse("summary csv", "expected four columns"));
                }
                Ok(SummaryRow {
                    configuration: rec[0].to_string(),
                    train_mse_db: parse_f64(&rec[1], "train_mse_db")?,
                    test_mse_db: parse_f64(&rec[2], "test_mse_db")?,
                    gap_db: parse_f64(&rec[3], "gap_db")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }
}

fn create(dir: &Path, name: &str) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>> {
    let path = dir.join(name);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok(csv::Writer::from_writer(std::io::BufWriter::new(file)))
}

fn finish<W: Write>(mut w: csv::Writer<W>, dir: &Path, name: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(dir.join(name), e))
}

/// Writes `summary.csv`, `train_curve.csv`, `test_curve.csv`,
/// `predictions.csv` and `runs.csv` into `dir`.
pub fn write_artifacts(dir: &Path, config: &ExperimentConfig, mc: &MonteCarlo) -> Result<()> {
    let summary_path = dir.join("summary.csv");
    let file = std::fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    summarize(&mc.rbf, &mc.strbf).write_csv(std::io::BufWriter::new(file))?;

    for (name, rbf, strbf) in [
        ("train_curve.csv", &mc.rbf.train_curve, &mc.strbf.train_curve),
        ("test_curve.csv", &mc.rbf.test_curve, &mc.strbf.test_curve),
    ] {
        let rbf_s = smooth_curve(rbf, config.smoothing_window);
        let strbf_s = smooth_curve(strbf, config.smoothing_window);
        let mut w = create(dir, name)?;
        w.write_record(["iteration", "rbf_mse", "strbf_mse", "rbf_mse_smoothed", "strbf_mse_smoothed"])?;
        for i in 0..rbf.len().min(strbf.len()) {
            w.write_record([
                (i + 1).to_string(),
                fmt_f64(rbf[i]),
                fmt_f64(strbf[i]),
                fmt_f64(rbf_s[i]),
                fmt_f64(strbf_s[i]),
            ])?;
        }
        finish(w, dir, name)?;
    }

    let run = &mc.records[config.prediction_run];
    let data = prepare_run(config, &mc.clean, config.prediction_run)?;
    let mut w = create(dir, "predictions.csv")?;
    w.write_record(["t", "actual", "rbf_pred", "strbf_pred"])?;
    for (k, &idx) in data.test.source_indices.iter().enumerate() {
        w.write_record([
            fmt_f64(data.noisy.time(idx)),
            fmt_f64(data.test.targets[k]),
            fmt_f64(run.rbf.test_predictions[k]),
            fmt_f64(run.strbf.test_predictions[k]),
        ])?;
    }
    finish(w, dir, "predictions.csv")?;

    let mut w = create(dir, "runs.csv")?;
    w.write_record([
        "run_index",
        "seed",
        "rbf_train_mse",
        "rbf_test_mse",
        "strbf_train_mse",
        "strbf_test_mse",
    ])?;
    for r in &mc.records {
        w.write_record([
            r.run_index.to_string(),
            r.seed.to_string(),
            fmt_f64(r.rbf.train_mse),
            fmt_f64(r.rbf.test_mse),
            fmt_f64(r.strbf.train_mse),
            fmt_f64(r.strbf.test_mse),
        ])?;
    }
    finish(w, dir, "runs.csv")
}
