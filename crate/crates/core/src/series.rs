//! Mackey-Glass series generation, noise injection and supervised windowing.
//!
//! The generator integrates
//!
//! ```text
//! du/dt = a·u(t−τ) / (1 + u(t−τ)^n) − b·u(t)
//! ```
//!
//! with classical fourth-order Runge-Kutta. The delayed state is zero while
//! `t ≤ τ`; afterwards it is read back from a ring buffer of past steps using
//! cubic Hermite interpolation with one-sided endpoint derivatives, so the
//! dense output keeps fourth-order accuracy across the derivative kinks at
//! multiples of τ.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::csvfmt::{fmt_f64, parse_f64};
use crate::error::{Error, Result};

/// Parameters of the Mackey-Glass delay differential equation and of its
/// numerical integration. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct MackeyGlassParams {
    pub a: f64,
    pub b: f64,
    pub delay: f64,
    pub exponent: f64,
    pub initial_value: f64,
    /// Time of the last sample.
    pub horizon: f64,
    pub integration_step: f64,
    pub sample_interval: f64,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: 0.1,
            delay: 20.0,
            exponent: 10.0,
            initial_value: 1.2,
            horizon: 3000.0,
            integration_step: 0.1,
            sample_interval: 1.0,
        }
    }
}

impl MackeyGlassParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("delay", self.delay),
            ("exponent", self.exponent),
            ("initial_value", self.initial_value),
            ("horizon", self.horizon),
            ("integration_step", self.integration_step),
            ("sample_interval", self.sample_interval),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.delay <= 0.0 {
            return bad(format!("delay must be positive, got {}", self.delay));
        }
        if self.horizon <= self.delay {
            return bad(format!(
                "horizon ({}) must exceed delay ({})",
                self.horizon, self.delay
            ));
        }
        if self.integration_step <= 0.0 {
            return bad(format!(
                "integration_step must be positive, got {}",
                self.integration_step
            ));
        }
        if self.integration_step > self.delay {
            return bad(format!(
                "integration_step ({}) must not exceed delay ({})",
                self.integration_step, self.delay
            ));
        }
        if self.exponent < 1.0 {
            return bad(format!("exponent must be >= 1, got {}", self.exponent));
        }
        let ratio = self.sample_interval / self.integration_step;
        if ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!(
                "sample_interval ({}) must be a positive integer multiple of integration_step ({})",
                self.sample_interval, self.integration_step
            ));
        }
        Ok(())
    }

    fn steps_per_sample(&self) -> usize {
        (self.sample_interval / self.integration_step).round() as usize
    }
}

/// A uniformly sampled scalar sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    t0: f64,
    sample_interval: f64,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, t0: f64, sample_interval: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParams("time series must be non-empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time series value {i} is not finite"
            )));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sample_interval must be positive, got {sample_interval}"
            )));
        }
        Ok(Self {
            values,
            t0,
            sample_interval,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Time stamp of sample `index`.
    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 * self.sample_interval
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// FNV-1a over the bit patterns of the samples; equal series give equal
    /// checksums.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for byte in v.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    /// Writes the `t,value` CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([fmt_f64(self.time(i)), fmt_f64(*v)])?;
        }
        w.flush().map_err(|e| Error::io("<series csv>", e))?;
        Ok(())
    }

    /// Reads a `t,value` CSV. The sample interval is taken from the first two
    /// time stamps (1 s when the file holds a single sample).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "value"] {
            return Err(Error::parse("series csv", "expected header `t,value`"));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::parse("series csv", "expected two columns"));
            }
            times.push(parse_f64(&record[0], "series time")?);
            values.push(parse_f64(&record[1], "series value")?);
        }
        let t0 = times.first().copied().unwrap_or(0.0);
        let dt = if times.len() >= 2 { times[1] - times[0] } else { 1.0 };
        TimeSeries::new(values, t0, dt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Inclusive range of sample indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

impl IndexRange {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    /// The whole of a series of `len` samples.
    pub fn full(len: usize) -> Self {
        Self {
            start: 0,
            end: len.saturating_sub(1),
        }
    }

    pub fn len(&self) -> usize {
        if self.end < self.start {
            0
        } else {
            self.end - self.start + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.start && index <= self.end
    }

    pub fn overlaps(&self, other: &IndexRange) -> bool {
        !self.is_empty() && !other.is_empty() && self.start <= other.end && other.start <= self.end
    }
}

/// Stored history of one integration step: the state at its start and the
/// one-sided derivatives at both of its ends.
#[derive(Debug, Clone, Copy, Default)]
struct StepNode {
    u: f64,
    d_start: f64,
    d_end: f64,
}

/// Fixed-capacity ring of the most recent integration steps.
struct DelayBuffer {
    nodes: Vec<StepNode>,
}

impl DelayBuffer {
    fn new(capacity: usize) -> Self {
        Self {
            nodes: vec![StepNode::default(); capacity],
        }
    }

    fn slot(&self, step: usize) -> usize {
        step % self.nodes.len()
    }

    fn node(&self, step: usize) -> &StepNode {
        &self.nodes[self.slot(step)]
    }

    fn node_mut(&mut self, step: usize) -> &mut StepNode {
        let s = self.slot(step);
        &mut self.nodes[s]
    }

    /// State at absolute time `s` (≥ 0, not later than the current step).
    fn value_at(&self, s: f64, h: f64) -> f64 {
        let q = s / h;
        let i = (q + 1e-9).floor() as usize;
        let frac = q - i as f64;
        let left = self.node(i);
        if frac < 1e-9 {
            return left.u;
        }
        let right = self.node(i + 1);
        hermite(left.u, right.u, left.d_start * h, left.d_end * h, frac)
    }
}

fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    (2.0 * x3 - 3.0 * x2 + 1.0) * p0
        + (x3 - 2.0 * x2 + x) * m0
        + (-2.0 * x3 + 3.0 * x2) * p1
        + (x3 - x2) * m1
}

/// Integrates the Mackey-Glass equation and samples it every
/// `sample_interval` seconds from `t = 0` through `horizon`.
pub fn generate_mackey_glass(params: &MackeyGlassParams) -> Result<TimeSeries> {
    params.validate()?;
    let h = params.integration_step;
    let tau = params.delay;
    let n_steps = (params.horizon / h + 1e-9).floor() as usize;
    let stride = params.steps_per_sample();
    let integer_exponent = params.exponent.fract() == 0.0 && params.exponent <= i32::MAX as f64;

    let rhs = |u: f64, delayed: f64| -> f64 {
        let power = if integer_exponent {
            delayed.powi(params.exponent as i32)
        } else {
            delayed.powf(params.exponent)
        };
        params.a * delayed / (1.0 + power) - params.b * u
    };

    let mut buffer = DelayBuffer::new((tau / h).ceil() as usize + 3);
    let mut samples = Vec::with_capacity(n_steps / stride + 1);
    let mut u = params.initial_value;
    samples.push(u);

    for k in 0..n_steps {
        let t = k as f64 * h;
        buffer.node_mut(k).u = u;
        // Until the step's end passes τ the delayed argument lies in the zero
        // pre-history; afterwards the history is right-continuous at s = 0.
        let quiet = (k + 1) as f64 * h <= tau + 1e-9 * h;
        let delayed = |s: f64| -> f64 {
            if quiet || s < -1e-9 * h {
                0.0
            } else {
                buffer.value_at(s.max(0.0), h)
            }
        };
        let d0 = delayed(t - tau);
        let dm = delayed(t + 0.5 * h - tau);
        let d1 = delayed(t + h - tau);

        let k1 = rhs(u, d0);
        let k2 = rhs(u + 0.5 * h * k1, dm);
        let k3 = rhs(u + 0.5 * h * k2, dm);
        let k4 = rhs(u + h * k3, d1);
        let next = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::IntegrationDiverged { time: t + h });
        }
        let d_end = rhs(next, d1);
        let node = buffer.node_mut(k);
        node.d_start = k1;
        node.d_end = d_end;
        u = next;
        if (k + 1) % stride == 0 {
            samples.push(u);
        }
    }
    TimeSeries::new(samples, 0.0, params.sample_interval)
}

/// Adds white Gaussian noise at `snr_db` to the whole series.
///
/// `snr_db = +∞` disables noise and returns an identical copy without
/// touching `rng`.
pub fn add_awgn<R: Rng + ?Sized>(series: &TimeSeries, snr_db: f64, rng: &mut R) -> Result<TimeSeries> {
    add_awgn_in_range(series, IndexRange::full(series.len()), snr_db, rng)
}

/// Adds white Gaussian noise to the samples in `range` only. The signal power
/// is the mean square of the clean samples in that range.
pub fn add_awgn_in_range<R: Rng + ?Sized>(
    series: &TimeSeries,
    range: IndexRange,
    snr_db: f64,
    rng: &mut R,
) -> Result<TimeSeries> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::InvalidParams(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    if range.is_empty() || range.end >= series.len() {
        return Err(Error::InvalidParams(format!(
            "noise range [{}, {}] outside series of length {}",
            range.start,
            range.end,
            series.len()
        )));
    }
    if snr_db == f64::INFINITY {
        return Ok(series.clone());
    }
    let segment = &series.values[range.start..=range.end];
    let power = segment.iter().map(|v| v * v).sum::<f64>() / segment.len() as f64;
    if power == 0.0 {
        return Err(Error::ZeroSignalPower);
    }
    let std_dev = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut values = series.values.clone();
    for v in &mut values[range.start..=range.end] {
        let z: f64 = rng.sample(StandardNormal);
        *v += std_dev * z;
    }
    TimeSeries::new(values, series.t0, series.sample_interval)
}

/// Supervised (lag vector → next value) pairs cut from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub lag_count: usize,
    /// Series index of each target.
    pub source_indices: Vec<usize>,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.inputs
            .iter()
            .zip(&self.targets)
            .map(|(u, d)| (u.as_slice(), *d))
    }

    /// Every series index touched by an input or a target.
    pub fn covered_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.source_indices
            .iter()
            .flat_map(move |&target| (target - self.lag_count)..=target)
    }
}

/// Cuts stride-1 windows whose every sample lies inside `range`: for each
/// position `k` the input is `[u(k−L+1), …, u(k)]` and the target `u(k+1)`.
pub fn make_windows(series: &TimeSeries, lag_count: usize, range: IndexRange) -> Result<WindowedDataset> {
    if lag_count == 0 {
        return Err(Error::InvalidParams("lag_count must be at least 1".into()));
    }
    if range.end >= series.len() || range.end < range.start {
        return Err(Error::InvalidParams(format!(
            "range [{}, {}] does not lie inside a series of length {}",
            range.start,
            range.end,
            series.len()
        )));
    }
    if range.len() <= lag_count {
        return Err(Error::EmptyDataset {
            start: range.start,
            end: range.end,
            len: series.len(),
            lag_count,
        });
    }
    let u = series.values();
    let first = range.start + lag_count - 1;
    let count = range.len() - lag_count;
    let mut inputs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    let mut source_indices = Vec::with_capacity(count);
    for k in first..range.end {
        inputs.push(u[k + 1 - lag_count..=k].to_vec());
        targets.push(u[k + 1]);
        source_indices.push(k + 1);
    }
    Ok(WindowedDataset {
        inputs,
        targets,
        lag_count,
        source_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decay(horizon: f64) -> MackeyGlassParams {
        MackeyGlassParams {
            a: 0.0,
            horizon,
            ..Default::default()
        }
    }

    #[test]
    fn pure_decay_matches_exponential() {
        let s = generate_mackey_glass(&decay(100.0)).unwrap();
        assert_eq!(s.len(), 101);
        let exact = 1.2 * (-0.1f64 * 10.0).exp();
        assert!((s.values()[10] - exact).abs() < 1e-4);
        assert!((s.values()[10] - 0.44146).abs() < 1e-4);
    }

    #[test]
    fn zero_prehistory_gives_decay_until_delay() {
        let s = generate_mackey_glass(&MackeyGlassParams {
            horizon: 100.0,
            ..Default::default()
        })
        .unwrap();
        let d = generate_mackey_glass(&decay(100.0)).unwrap();
        for t in 0..=20 {
            assert_eq!(s.values()[t], d.values()[t], "t = {t}");
        }
        assert_ne!(s.values()[21], d.values()[21]);
    }

    #[test]
    fn default_series_is_bounded_and_deterministic() {
        let p = MackeyGlassParams::default();
        let a = generate_mackey_glass(&p).unwrap();
        let b = generate_mackey_glass(&p).unwrap();
        assert_eq!(a.len(), 3001);
        assert_eq!(a.checksum(), b.checksum());
        assert!(a.values().iter().all(|v| v.is_finite() && *v > 0.0 && *v < 1.5));
    }

    #[test]
    fn rejects_bad_params() {
        let bad = [
            MackeyGlassParams { delay: 0.0, ..Default::default() },
            MackeyGlassParams { horizon: 10.0, ..Default::default() },
            MackeyGlassParams { integration_step: -0.1, ..Default::default() },
            MackeyGlassParams { sample_interval: 0.25, ..Default::default() },
            MackeyGlassParams { exponent: 0.5, ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(generate_mackey_glass(&p), Err(Error::InvalidParams(_))), "{p:?}");
        }
    }

    #[test]
    fn divergence_names_the_time() {
        // Negative decay rate: the state blows up.
        let p = MackeyGlassParams {
            a: 1.0,
            b: -5.0,
            initial_value: 1.0,
            horizon: 2000.0,
            ..Default::default()
        };
        match generate_mackey_glass(&p) {
            Err(Error::IntegrationDiverged { time }) => assert!(time > 0.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn awgn_identity_when_disabled() {
        let s = TimeSeries::new(vec![1.0, -2.0, 3.0], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(add_awgn(&s, f64::INFINITY, &mut rng).unwrap(), s);
    }

    #[test]
    fn awgn_rejects_zero_power_and_nan() {
        let s = TimeSeries::new(vec![0.0; 8], 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(add_awgn(&s, 30.0, &mut rng), Err(Error::ZeroSignalPower)));
        let s = TimeSeries::new(vec![1.0; 8], 0.0, 1.0).unwrap();
        assert!(add_awgn(&s, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn awgn_only_touches_range() {
        let s = TimeSeries::new((0..50).map(|i| 1.0 + i as f64).collect(), 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy = add_awgn_in_range(&s, IndexRange::new(10, 19), 30.0, &mut rng).unwrap();
        for i in 0..50 {
            let changed = noisy.values()[i] != s.values()[i];
            assert_eq!(changed, (10..=19).contains(&i), "index {i}");
        }
    }

    #[test]
    fn awgn_empirical_snr() {
        let n = 100_000;
        let s = TimeSeries::new(
            (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            0.0,
            1.0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy = add_awgn(&s, 30.0, &mut rng).unwrap();
        let noise_power = noisy
            .values()
            .iter()
            .zip(s.values())
            .map(|(y, x)| (y - x).powi(2))
            .sum::<f64>()
            / n as f64;
        let snr = 10.0 * (1.0 / noise_power).log10();
        assert!((snr - 30.0).abs() < 0.3, "snr = {snr}");
    }

    #[test]
    fn windows_enumerate() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 1.0).unwrap();
        let w = make_windows(&s, 2, IndexRange::full(5)).unwrap();
        assert_eq!(w.inputs, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);
        assert_eq!(w.targets, vec![3.0, 4.0, 5.0]);
        assert_eq!(w.source_indices, vec![2, 3, 4]);
    }

    #[test]
    fn windows_reject_short_range() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 1.0).unwrap();
        assert!(matches!(
            make_windows(&s, 2, IndexRange::new(1, 2)),
            Err(Error::EmptyDataset { .. })
        ));
        assert!(make_windows(&s, 0, IndexRange::full(5)).is_err());
        assert!(make_windows(&s, 2, IndexRange::new(0, 5)).is_err());
    }

    #[test]
    fn default_split_is_disjoint() {
        let s = generate_mackey_glass(&MackeyGlassParams::default()).unwrap();
        let train = make_windows(&s, 2, IndexRange::new(100, 2500)).unwrap();
        let test = make_windows(&s, 2, IndexRange::new(2501, 3000)).unwrap();
        assert_eq!(train.len(), 2399);
        assert_eq!(test.len(), 498);
        let tr: std::collections::BTreeSet<_> = train.covered_indices().collect();
        let te: std::collections::BTreeSet<_> = test.covered_indices().collect();
        assert!(tr.is_disjoint(&te));
        assert!(tr.iter().chain(&te).all(|&i| (100..=3000).contains(&i)));
    }

    #[test]
    fn series_csv_round_trip() {
        let s = generate_mackey_glass(&decay(30.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n0.0000000000000000e0,1.2000000000000000e0\n"));
        assert_eq!(TimeSeries::read_csv(buf.as_slice()).unwrap(), s);
    }

    proptest::proptest! {
        #[test]
        fn window_count_and_reconstruction(
            values in proptest::collection::vec(-10.0f64..10.0, 2..60),
            lag in 1usize..6,
        ) {
            proptest::prop_assume!(values.len() > lag);
            let s = TimeSeries::new(values.clone(), 0.0, 1.0).unwrap();
            let w = make_windows(&s, lag, IndexRange::full(values.len())).unwrap();
            proptest::prop_assert_eq!(w.len(), values.len() - lag);
            proptest::prop_assert_eq!(&w.targets[..], &values[lag..]);
            for (k, input) in w.inputs.iter().enumerate() {
                proptest::prop_assert_eq!(input.len(), lag);
                proptest::prop_assert_eq!(&input[..], &values[k..k + lag]);
            }
        }
    }
}
