//! Conventional and spatio-temporal RBF networks with online gradient descent.
//!
//! Both models share one parameter layout: an `S × T` grid of kernels and
//! link weights plus a scalar bias `p`,
//!
//! ```text
//! y(k) = Σ_i Σ_t w(i,t) · ψ(i,t)(branch_input(t), c(i,t)) + p
//! ```
//!
//! The conventional network is the `T = 1` case evaluated on the whole lag
//! vector. The spatio-temporal network routes lag component `u[t]` to branch
//! `t` ([`BranchInput::PerLag`]), or feeds every branch the whole vector
//! ([`BranchInput::FullVector`]).
//!
//! Training minimises `O(k) = ½ e²(k)` with `e(k) = d(k) − y(k)`. Since `y` is
//! linear in the weights and the bias, the gradient is `−ψ(i,t)·e` and `−e`,
//! giving the updates `w ← w + η ψ e` and `p ← p + η e`. Centers and spreads
//! stay at their K-means values.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::csvfmt::{fmt_f64, parse_f64, parse_usize};
use crate::error::{Error, Result};
use crate::kernels::{init_kernels_from_points, KernelKind, KernelSpec, KmeansConfig};
use crate::series::WindowedDataset;

/// Errors larger than this abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Rbf,
    Strbf,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Rbf => "rbf",
            ModelKind::Strbf => "strbf",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbf" => Ok(ModelKind::Rbf),
            "strbf" => Ok(ModelKind::Strbf),
            other => Err(Error::parse("model kind", other)),
        }
    }
}

/// What each temporal branch of a spatio-temporal network sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchInput {
    /// Branch `t` gets the scalar lag component `u[t]`.
    #[default]
    PerLag,
    /// Every branch gets the whole lag vector.
    FullVector,
}

impl fmt::Display for BranchInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchInput::PerLag => "per_lag",
            BranchInput::FullVector => "full_vector",
        })
    }
}

impl FromStr for BranchInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_lag" => Ok(BranchInput::PerLag),
            "full_vector" => Ok(BranchInput::FullVector),
            other => Err(Error::parse("branch input", other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub kind: ModelKind,
    /// Neurons per branch (S).
    pub spatial_size: usize,
    /// Number of branches (T).
    pub temporal_depth: usize,
    /// Length of the lag vector.
    pub input_dim: usize,
    pub branch_input: BranchInput,
}

impl Topology {
    pub fn rbf(spatial_size: usize, input_dim: usize) -> Self {
        Self {
            kind: ModelKind::Rbf,
            spatial_size,
            temporal_depth: 1,
            input_dim,
            branch_input: BranchInput::FullVector,
        }
    }

    /// One branch per lag component.
    pub fn strbf(spatial_size: usize, input_dim: usize) -> Self {
        Self {
            kind: ModelKind::Strbf,
            spatial_size,
            temporal_depth: input_dim,
            input_dim,
            branch_input: BranchInput::PerLag,
        }
    }

    /// `temporal_depth` branches, each over the whole lag vector.
    pub fn strbf_full_vector(spatial_size: usize, temporal_depth: usize, input_dim: usize) -> Self {
        Self {
            kind: ModelKind::Strbf,
            spatial_size,
            temporal_depth,
            input_dim,
            branch_input: BranchInput::FullVector,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.spatial_size == 0 {
            return bad("spatial_size must be at least 1".into());
        }
        if self.input_dim == 0 {
            return bad("input_dim must be at least 1".into());
        }
        if self.temporal_depth == 0 {
            return bad("temporal_depth must be at least 1".into());
        }
        match (self.kind, self.branch_input) {
            (ModelKind::Rbf, _) if self.temporal_depth != 1 => {
                bad(format!("rbf requires temporal_depth 1, got {}", self.temporal_depth))
            }
            (ModelKind::Rbf, BranchInput::PerLag) => bad("rbf evaluates the full input vector".into()),
            (ModelKind::Strbf, BranchInput::PerLag) if self.temporal_depth != self.input_dim => bad(format!(
                "per-lag strbf needs one branch per lag: temporal_depth {} != input_dim {}",
                self.temporal_depth, self.input_dim
            )),
            _ => Ok(()),
        }
    }

    /// Number of kernels (and weights): `S × T`.
    pub fn size(&self) -> usize {
        self.spatial_size * self.temporal_depth
    }

    /// Dimension of each kernel's center.
    pub fn kernel_dim(&self) -> usize {
        match self.branch_input {
            BranchInput::PerLag => 1,
            BranchInput::FullVector => self.input_dim,
        }
    }

    /// Flat storage index of neuron `i` in branch `t`.
    pub fn index(&self, neuron: usize, branch: usize) -> usize {
        branch * self.spatial_size + neuron
    }

    #[inline]
    fn branch_slice<'a>(&self, u: &'a [f64], branch: usize) -> &'a [f64] {
        match self.branch_input {
            BranchInput::PerLag => &u[branch..branch + 1],
            BranchInput::FullVector => u,
        }
    }
}

/// Parameters of either network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    topology: Topology,
    /// Branch-major: entry `t·S + i` is neuron `i` of branch `t`.
    kernels: Vec<KernelSpec>,
    weights: Vec<f64>,
    bias: f64,
}

/// Output of a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub prediction: f64,
    /// Kernel outputs in the same branch-major layout as the weights.
    pub activations: Vec<f64>,
}

/// Output of one online update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub prediction: f64,
    /// `target − prediction`.
    pub error: f64,
    pub activations: Vec<f64>,
}

/// Pure forward passes over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<f64>,
    pub squared_errors: Vec<f64>,
    pub mse: f64,
}

/// Settings for [`init_network`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub kernel: KernelKind,
    /// Multiplier on the K-means cluster spread.
    pub spread_scale: f64,
    /// Weights and bias are drawn uniformly from `[−init_range, init_range]`.
    pub init_range: f64,
    pub kmeans: KmeansConfig,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Gaussian,
            spread_scale: 1.0,
            init_range: 1.0,
            kmeans: KmeansConfig::default(),
        }
    }
}

impl NetworkState {
    pub fn new(topology: Topology, kernels: Vec<KernelSpec>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        topology.validate()?;
        let n = topology.size();
        if kernels.len() != n || weights.len() != n {
            return Err(Error::InvalidParams(format!(
                "expected {n} kernels and weights, got {} and {}",
                kernels.len(),
                weights.len()
            )));
        }
        let dim = topology.kernel_dim();
        if let Some(k) = kernels.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
        if kernels.iter().any(|k| !(k.spread > 0.0 && k.spread.is_finite())) {
            return Err(Error::InvalidParams("kernel spreads must be positive".into()));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParams("weights and bias must be finite".into()));
        }
        Ok(Self {
            topology,
            kernels,
            weights,
            bias,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn kernel(&self, neuron: usize, branch: usize) -> &KernelSpec {
        &self.kernels[self.topology.index(neuron, branch)]
    }

    pub fn weight(&self, neuron: usize, branch: usize) -> f64 {
        self.weights[self.topology.index(neuron, branch)]
    }

    /// Replaces the weights and bias, keeping the kernels.
    pub fn set_linear_params(&mut self, weights: Vec<f64>, bias: f64) -> Result<()> {
        if weights.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: weights.len(),
            });
        }
        self.weights = weights;
        self.bias = bias;
        Ok(())
    }

    fn check_input(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.topology.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.topology.input_dim,
                found: u.len(),
            });
        }
        Ok(())
    }

    fn activations_into(&self, u: &[f64], out: &mut [f64]) {
        let s = self.topology.spatial_size;
        for t in 0..self.topology.temporal_depth {
            let x = self.topology.branch_slice(u, t);
            for i in 0..s {
                let j = t * s + i;
                out[j] = self.kernels[j].eval_unchecked(x);
            }
        }
    }

    fn output(&self, activations: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (w, a) in self.weights.iter().zip(activations) {
            acc += w * a;
        }
        acc + self.bias
    }

    /// Forward pass for either topology.
    pub fn forward(&self, u: &[f64]) -> Result<Forward> {
        self.check_input(u)?;
        let mut activations = vec![0.0; self.weights.len()];
        self.activations_into(u, &mut activations);
        Ok(Forward {
            prediction: self.output(&activations),
            activations,
        })
    }

    /// Forward pass of the conventional network.
    pub fn forward_rbf(&self, u: &[f64]) -> Result<Forward> {
        if self.topology.kind != ModelKind::Rbf {
            return Err(Error::InvalidParams("forward_rbf on a spatio-temporal network".into()));
        }
        self.forward(u)
    }

    /// Forward pass of the spatio-temporal network.
    pub fn forward_strbf(&self, u: &[f64]) -> Result<Forward> {
        if self.topology.kind != ModelKind::Strbf {
            return Err(Error::InvalidParams("forward_strbf on a conventional network".into()));
        }
        self.forward(u)
    }

    /// One online gradient-descent update on `(u, d)`.
    pub fn sgd_step(&mut self, u: &[f64], target: f64, eta: f64) -> Result<StepResult> {
        check_eta(eta)?;
        self.step_at(u, target, eta, 0)
    }

    fn step_at(&mut self, u: &[f64], target: f64, eta: f64, iteration: usize) -> Result<StepResult> {
        let Forward {
            prediction,
            activations,
        } = self.forward(u)?;
        let error = target - prediction;
        if !error.is_finite() || error.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { iteration, error });
        }
        for (w, a) in self.weights.iter_mut().zip(&activations) {
            *w += eta * a * error;
        }
        self.bias += eta * error;
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged { iteration, error });
        }
        Ok(StepResult {
            prediction,
            error,
            activations,
        })
    }

    /// Sequential updates over the dataset in temporal order, `epochs` times.
    /// Returns `e²(k)` for every iteration.
    pub fn train_online(&mut self, dataset: &WindowedDataset, eta: f64, epochs: usize) -> Result<Vec<f64>> {
        check_eta(eta)?;
        if dataset.is_empty() {
            return Err(Error::InvalidParams("training dataset is empty".into()));
        }
        let mut trace = Vec::with_capacity(dataset.len() * epochs);
        for _ in 0..epochs {
            for (u, d) in dataset.iter() {
                let step = self.step_at(u, d, eta, trace.len())?;
                trace.push(step.error * step.error);
            }
        }
        Ok(trace)
    }

    pub fn evaluate(&self, dataset: &WindowedDataset) -> Result<Evaluation> {
        if dataset.is_empty() {
            return Err(Error::InvalidParams("evaluation dataset is empty".into()));
        }
        let mut predictions = Vec::with_capacity(dataset.len());
        let mut squared_errors = Vec::with_capacity(dataset.len());
        let mut activations = vec![0.0; self.weights.len()];
        for (u, d) in dataset.iter() {
            self.check_input(u)?;
            self.activations_into(u, &mut activations);
            let y = self.output(&activations);
            predictions.push(y);
            squared_errors.push((d - y) * (d - y));
        }
        let mse = squared_errors.iter().sum::<f64>() / squared_errors.len() as f64;
        Ok(Evaluation {
            predictions,
            squared_errors,
            mse,
        })
    }

    /// Writes the checkpoint CSV: `#` metadata lines, then
    /// `branch,neuron,center_0..,spread,weight` rows and a final bias row.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let t = &self.topology;
        let kind = self.kernels.first().map_or(KernelKind::Gaussian, |k| k.kind);
        writeln!(
            writer,
            "# model={} spatial_size={} temporal_depth={} input_dim={} branch_input={} kernel={}",
            t.kind, t.spatial_size, t.temporal_depth, t.input_dim, t.branch_input, kind
        )
        .map_err(|e| Error::io("<checkpoint>", e))?;
        let dim = t.kernel_dim();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["branch".to_string(), "neuron".to_string()];
        header.extend((0..dim).map(|d| format!("center_{d}")));
        header.extend(["spread".to_string(), "weight".to_string()]);
        w.write_record(&header)?;
        for branch in 0..t.temporal_depth {
            for neuron in 0..t.spatial_size {
                let j = t.index(neuron, branch);
                let mut row = vec![branch.to_string(), neuron.to_string()];
                row.extend(self.kernels[j].center.iter().map(|c| fmt_f64(*c)));
                row.push(fmt_f64(self.kernels[j].spread));
                row.push(fmt_f64(self.weights[j]));
                w.write_record(&row)?;
            }
        }
        let mut bias_row = vec!["bias".to_string()];
        bias_row.extend(std::iter::repeat_n(String::new(), dim + 2));
        bias_row.push(fmt_f64(self.bias));
        w.write_record(&bias_row)?;
        w.flush().map_err(|e| Error::io("<checkpoint>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::io("<checkpoint>", e))?;
        let meta_line = text
            .lines()
            .find_map(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::parse("checkpoint", "missing `# model=...` metadata line"))?;
        let mut model = None;
        let mut sizes = [None; 3];
        let mut branch_input = None;
        let mut kernel = None;
        for item in meta_line.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::parse("checkpoint metadata", item))?;
            match k {
                "model" => model = Some(v.parse::<ModelKind>()?),
                "spatial_size" => sizes[0] = Some(parse_usize(v, "spatial_size")?),
                "temporal_depth" => sizes[1] = Some(parse_usize(v, "temporal_depth")?),
                "input_dim" => sizes[2] = Some(parse_usize(v, "input_dim")?),
                "branch_input" => branch_input = Some(v.parse::<BranchInput>()?),
                "kernel" => kernel = Some(v.parse::<KernelKind>()?),
                other => return Err(Error::parse("checkpoint metadata", format!("unknown key {other}"))),
            }
        }
        let missing = |name: &str| Error::parse("checkpoint metadata", format!("missing {name}"));
        let topology = Topology {
            kind: model.ok_or_else(|| missing("model"))?,
            spatial_size: sizes[0].ok_or_else(|| missing("spatial_size"))?,
            temporal_depth: sizes[1].ok_or_else(|| missing("temporal_depth"))?,
            input_dim: sizes[2].ok_or_else(|| missing("input_dim"))?,
            branch_input: branch_input.ok_or_else(|| missing("branch_input"))?,
        };
        topology.validate()?;
        let kind = kernel.ok_or_else(|| missing("kernel"))?;
        let dim = topology.kernel_dim();

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let n = topology.size();
        let mut kernels: Vec<Option<KernelSpec>> = vec![None; n];
        let mut weights = vec![f64::NAN; n];
        let mut bias = None;
        for record in rdr.records() {
            let record = record?;
            if record.len() != dim + 4 {
                return Err(Error::parse("checkpoint", format!("expected {} columns", dim + 4)));
            }
            if &record[0] == "bias" {
                bias = Some(parse_f64(&record[dim + 3], "bias")?);
                continue;
            }
            let branch = parse_usize(&record[0], "branch")?;
            let neuron = parse_usize(&record[1], "neuron")?;
            if branch >= topology.temporal_depth || neuron >= topology.spatial_size {
                return Err(Error::parse("checkpoint", format!("neuron ({neuron}, {branch}) out of range")));
            }
            let center = (0..dim)
                .map(|d| parse_f64(&record[2 + d], "center"))
                .collect::<Result<Vec<_>>>()?;
            let spread = parse_f64(&record[dim + 2], "spread")?;
            let j = topology.index(neuron, branch);
            kernels[j] = Some(KernelSpec::new(kind, center, spread)?);
            weights[j] = parse_f64(&record[dim + 3], "weight")?;
        }
        let kernels = kernels
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::parse("checkpoint", "missing neuron rows"))?;
        let bias = bias.ok_or_else(|| Error::parse("checkpoint", "missing bias row"))?;
        NetworkState::new(topology, kernels, weights, bias)
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

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParams(format!("learning rate must be >= 0, got {eta}")));
    }
    Ok(())
}

/// Builds a network for `topology`: kernels from K-means on the dataset's
/// inputs (one fit per branch, over that branch's input), then weights and
/// bias drawn uniformly from `[−init_range, init_range]`.
pub fn init_network<R: Rng + ?Sized>(
    topology: Topology,
    dataset: &WindowedDataset,
    config: &InitConfig,
    rng: &mut R,
) -> Result<NetworkState> {
    topology.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidParams("dataset is empty".into()));
    }
    if dataset.lag_count != topology.input_dim {
        return Err(Error::DimensionMismatch {
            expected: topology.input_dim,
            found: dataset.lag_count,
        });
    }
    if !(config.init_range >= 0.0 && config.init_range.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "init_range must be >= 0, got {}",
            config.init_range
        )));
    }
    let mut kernels = Vec::with_capacity(topology.size());
    for branch in 0..topology.temporal_depth {
        let points: Vec<Vec<f64>> = match topology.branch_input {
            BranchInput::PerLag => dataset.inputs.iter().map(|u| vec![u[branch]]).collect(),
            BranchInput::FullVector => dataset.inputs.clone(),
        };
        kernels.extend(init_kernels_from_points(
            &points,
            topology.spatial_size,
            config.kernel,
            config.spread_scale,
            &config.kmeans,
            rng,
        )?);
    }
    let r = config.init_range;
    let mut draw = || if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
    let weights = (0..topology.size()).map(|_| draw()).collect();
    let bias = draw();
    NetworkState::new(topology, kernels, weights, bias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::eval_kernel;
    use crate::series::{make_windows, IndexRange, TimeSeries};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(center: Vec<f64>, sigma: f64) -> KernelSpec {
        KernelSpec::new(KernelKind::Gaussian, center, sigma).unwrap()
    }

    fn toy_dataset(n: usize) -> WindowedDataset {
        let s = TimeSeries::new((0..n).map(|i| (i as f64 * 0.3).sin()).collect(), 0.0, 1.0).unwrap();
        make_windows(&s, 2, IndexRange::full(n)).unwrap()
    }

    #[test]
    fn zero_weights_output_bias() {
        let net = NetworkState::new(
            Topology::rbf(2, 2),
            vec![g(vec![0.0, 0.0], 1.0), g(vec![1.0, 1.0], 0.5)],
            vec![0.0, 0.0],
            0.75,
        )
        .unwrap();
        assert_eq!(net.forward_rbf(&[3.0, -1.0]).unwrap().prediction, 0.75);
        assert!(net.forward_strbf(&[3.0, -1.0]).is_err());
    }

    #[test]
    fn unit_activation() {
        let net = NetworkState::new(Topology::rbf(1, 2), vec![g(vec![0.4, 0.6], 0.2)], vec![1.0], 0.0).unwrap();
        assert_eq!(net.forward_rbf(&[0.4, 0.6]).unwrap().prediction, 1.0);
    }

    #[test]
    fn two_neuron_rbf_matches_direct_sum() {
        let c1 = [0.2, 0.5];
        let c2 = [0.9, -0.1];
        let (s1, s2) = (0.4, 0.7);
        let u = [0.35, 0.1];
        let net = NetworkState::new(
            Topology::rbf(2, 2),
            vec![g(c1.to_vec(), s1), g(c2.to_vec(), s2)],
            vec![1.0, -2.0],
            0.5,
        )
        .unwrap();
        let psi = |c: [f64; 2], s: f64| (-((u[0] - c[0]).powi(2) + (u[1] - c[1]).powi(2)) / (s * s)).exp();
        let expected = 1.0 * psi(c1, s1) - 2.0 * psi(c2, s2) + 0.5;
        assert_abs_diff_eq!(net.forward_rbf(&u).unwrap().prediction, expected, epsilon = 1e-12);
    }

    #[test]
    fn strbf_double_sum() {
        // S = 2, T = 2, scalar centers per branch.
        let centers = [[0.1, 0.6], [0.3, -0.2]]; // [branch][neuron]
        let spreads = [[0.5, 0.25], [0.8, 0.4]];
        let w = [[0.7, -0.3], [1.1, 0.2]];
        let mut kernels = Vec::new();
        let mut weights = Vec::new();
        for t in 0..2 {
            for i in 0..2 {
                kernels.push(g(vec![centers[t][i]], spreads[t][i]));
                weights.push(w[t][i]);
            }
        }
        let net = NetworkState::new(Topology::strbf(2, 2), kernels, weights, -0.05).unwrap();
        let u = [0.25, 0.05];
        let mut expected = -0.05;
        for i in 0..2 {
            for t in 0..2 {
                let r = u[t] - centers[t][i];
                expected += w[t][i] * (-(r * r) / (spreads[t][i] * spreads[t][i])).exp();
            }
        }
        assert_abs_diff_eq!(net.forward_strbf(&u).unwrap().prediction, expected, epsilon = 1e-12);
        assert_eq!(net.weight(1, 0), -0.3);
        assert_eq!(net.kernel(0, 1).center, vec![0.3]);
    }

    #[test]
    fn zero_weight_strbf_ignores_input() {
        let kernels = (0..4).map(|j| g(vec![j as f64 * 0.1], 0.3)).collect();
        let net = NetworkState::new(Topology::strbf(2, 2), kernels, vec![0.0; 4], 1.5).unwrap();
        for u in [[0.0, 0.0], [5.0, -3.0], [0.2, 0.9]] {
            assert_eq!(net.forward(&u).unwrap().prediction, 1.5);
        }
    }

    #[test]
    fn single_neuron_update() {
        let mut net = NetworkState::new(Topology::rbf(1, 1), vec![g(vec![0.0], 1.0)], vec![0.0], 0.0).unwrap();
        let step = net.sgd_step(&[0.0], 0.5, 0.1).unwrap();
        assert_eq!(step.error, 0.5);
        assert_abs_diff_eq!(net.weights()[0], 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(net.bias(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn zero_error_leaves_parameters() {
        let mut net = NetworkState::new(Topology::rbf(1, 1), vec![g(vec![0.0], 1.0)], vec![0.3], 0.2).unwrap();
        let y = net.forward(&[0.4]).unwrap().prediction;
        let before = net.clone();
        net.sgd_step(&[0.4], y, 0.1).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn divergence_is_reported() {
        let mut net = NetworkState::new(Topology::rbf(1, 1), vec![g(vec![0.0], 1.0)], vec![0.0], 0.0).unwrap();
        match net.sgd_step(&[0.0], 1e7, 0.1) {
            Err(Error::Diverged { error, .. }) => assert_eq!(error, 1e7),
            other => panic!("{other:?}"),
        }
        let ds = WindowedDataset {
            inputs: vec![vec![0.0]; 3],
            targets: vec![0.0, 0.0, 1e9],
            lag_count: 1,
            source_indices: vec![1, 2, 3],
        };
        match net.train_online(&ds, 0.1, 1) {
            Err(Error::Diverged { iteration, .. }) => assert_eq!(iteration, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_inputs() {
        let mut net = NetworkState::new(Topology::strbf(1, 2), vec![g(vec![0.0], 1.0), g(vec![0.0], 1.0)], vec![0.0; 2], 0.0).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(net.sgd_step(&[1.0, 2.0], 0.0, -0.1).is_err());
        assert!(NetworkState::new(Topology::rbf(2, 2), vec![g(vec![0.0, 0.0], 1.0)], vec![0.0], 0.0).is_err());
        assert!(Topology { temporal_depth: 3, ..Topology::strbf(2, 2) }.validate().is_err());
        assert!(Topology { temporal_depth: 2, ..Topology::rbf(2, 2) }.validate().is_err());
    }

    #[test]
    fn train_noop_cases() {
        let ds = toy_dataset(40);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = init_network(Topology::rbf(4, 2), &ds, &InitConfig::default(), &mut rng).unwrap();

        let mut a = net.clone();
        assert!(a.train_online(&ds, 0.05, 0).unwrap().is_empty());
        assert_eq!(a, net);

        let mut b = net.clone();
        let trace = b.train_online(&ds, 0.0, 3).unwrap();
        assert_eq!(b, net);
        let fixed = net.evaluate(&ds).unwrap().squared_errors;
        assert_eq!(trace, [fixed.clone(), fixed.clone(), fixed].concat());
    }

    #[test]
    fn bias_follows_scalar_lms_recursion() {
        // Kernels far from the inputs: activations underflow to zero, so only
        // the bias learns and p(k+1) = p(k) + η(c − p(k)).
        let n = 200;
        let ds = WindowedDataset {
            inputs: vec![vec![0.0]; n],
            targets: vec![0.8; n],
            lag_count: 1,
            source_indices: (1..=n).collect(),
        };
        let mut net = NetworkState::new(Topology::rbf(1, 1), vec![g(vec![1e3], 1.0)], vec![0.0], 0.0).unwrap();
        let eta = 0.05;
        let trace = net.train_online(&ds, eta, 1).unwrap();
        for (k, e2) in trace.iter().enumerate() {
            let p_k = 0.8 * (1.0 - (1.0 - eta).powi(k as i32));
            assert_abs_diff_eq!(*e2, (0.8 - p_k).powi(2), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(net.bias(), 0.8 * (1.0 - (1.0 - eta).powi(n as i32)), epsilon = 1e-12);
        assert!((net.bias() - 0.8).abs() < 1e-4);
    }

    #[test]
    fn evaluate_recomputes_mean() {
        let ds = toy_dataset(30);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = init_network(Topology::strbf(3, 2), &ds, &InitConfig::default(), &mut rng).unwrap();
        let before = net.clone();
        let ev = net.evaluate(&ds).unwrap();
        assert_eq!(net, before);
        let mut sum = 0.0;
        for (u, d) in ds.iter() {
            let y = net.forward(u).unwrap().prediction;
            sum += (d - y).powi(2);
        }
        assert_abs_diff_eq!(ev.mse, sum / ds.len() as f64, epsilon = 1e-15);

        let zero = NetworkState::new(*net.topology(), net.kernels().to_vec(), vec![0.0; 6], 0.0).unwrap();
        let m = ds.targets.iter().map(|d| d * d).sum::<f64>() / ds.len() as f64;
        assert_abs_diff_eq!(zero.evaluate(&ds).unwrap().mse, m, epsilon = 1e-15);
    }

    #[test]
    fn perfect_predictor_has_zero_mse() {
        let ds = toy_dataset(30);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = init_network(Topology::rbf(5, 2), &ds, &InitConfig::default(), &mut rng).unwrap();
        let targets = net.evaluate(&ds).unwrap().predictions;
        let self_ds = WindowedDataset { targets, ..ds };
        assert_eq!(net.evaluate(&self_ds).unwrap().mse, 0.0);
    }

    #[test]
    fn init_shapes_and_determinism() {
        let ds = toy_dataset(120);
        let cfg = InitConfig::default();
        let rbf = init_network(Topology::rbf(20, 2), &ds, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(rbf.kernels().len(), 20);
        assert!(rbf.kernels().iter().all(|k| k.dim() == 2));
        assert_eq!(rbf.weights().len(), 20);

        let strbf = init_network(Topology::strbf(10, 2), &ds, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(strbf.kernels().len(), 20);
        assert!(strbf.kernels().iter().all(|k| k.dim() == 1));
        assert_eq!(strbf.weights().len(), 20);
        assert!(strbf.weights().iter().chain([strbf.bias()].iter()).all(|w| w.abs() <= 1.0));

        let again = init_network(Topology::strbf(10, 2), &ds, &cfg, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(strbf, again);
    }

    #[test]
    fn activations_are_bounded() {
        let ds = toy_dataset(80);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut net = init_network(Topology::strbf(4, 2), &ds, &InitConfig::default(), &mut rng).unwrap();
        for (u, d) in ds.iter() {
            let before = net.weights().to_vec();
            let step = net.sgd_step(u, d, 0.05).unwrap();
            for (j, a) in step.activations.iter().enumerate() {
                assert!(*a > 0.0 && *a <= 1.0);
                assert_eq!(*a, eval_kernel(&net.kernels()[j], &u[j / 4..j / 4 + 1]).unwrap());
                assert!((net.weights()[j] - before[j]).abs() <= 0.05 * step.error.abs());
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let ds = toy_dataset(60);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for topo in [Topology::rbf(5, 2), Topology::strbf(3, 2), Topology::strbf_full_vector(2, 3, 2)] {
            let mut net = init_network(topo, &ds, &InitConfig::default(), &mut rng).unwrap();
            net.train_online(&ds, 0.03, 1).unwrap();
            let mut buf = Vec::new();
            net.write_csv(&mut buf).unwrap();
            let back = NetworkState::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(NetworkState::read_csv("branch,neuron\n".as_bytes()).is_err());
        let text = "# model=rbf spatial_size=1 temporal_depth=1 input_dim=1 branch_input=full_vector kernel=gaussian\nbranch,neuron,center_0,spread,weight\n0,0,1.0,1.0,0.5\n";
        assert!(matches!(NetworkState::read_csv(text.as_bytes()), Err(Error::Parse { .. })));
    }
}
