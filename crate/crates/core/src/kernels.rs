//! Radial basis functions and the K-means fit that places them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;

use crate::csvfmt::fmt_f64;
use crate::error::{Error, Result};
use crate::series::WindowedDataset;

/// Radial basis function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelKind {
    /// `exp(−r²/σ²)`
    #[default]
    Gaussian,
    /// `(r² + τ²)^½`
    Multiquadric,
    /// `(r² + τ²)^−½`
    InverseMultiquadric,
}

impl KernelKind {
    /// Evaluates the basis function at squared distance `r2` with width
    /// `spread`.
    #[inline]
    pub fn eval_sq(self, r2: f64, spread: f64) -> f64 {
        match self {
            KernelKind::Gaussian => (-r2 / (spread * spread)).exp(),
            KernelKind::Multiquadric => (r2 + spread * spread).sqrt(),
            KernelKind::InverseMultiquadric => 1.0 / (r2 + spread * spread).sqrt(),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Multiquadric => "multiquadric",
            KernelKind::InverseMultiquadric => "inverse_multiquadric",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelKind::Gaussian),
            "multiquadric" => Ok(KernelKind::Multiquadric),
            "inverse_multiquadric" => Ok(KernelKind::InverseMultiquadric),
            other => Err(Error::parse("kernel kind", other)),
        }
    }
}

/// One basis function: family, center and width.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub center: Vec<f64>,
    /// σ for the Gaussian, τ for the multiquadric pair.
    pub spread: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, center: Vec<f64>, spread: f64) -> Result<Self> {
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "kernel spread must be positive, got {spread}"
            )));
        }
        Ok(Self { kind, center, spread })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Evaluation without the dimension check; callers guarantee
    /// `u.len() == self.dim()`.
    #[inline]
    pub(crate) fn eval_unchecked(&self, u: &[f64]) -> f64 {
        self.kind.eval_sq(squared_distance(u, &self.center), self.spread)
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Evaluates `spec` at input `u`.
pub fn eval_kernel(spec: &KernelSpec, u: &[f64]) -> Result<f64> {
    if u.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: u.len(),
        });
    }
    Ok(spec.eval_unchecked(u))
}

/// How the initial centroids are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KmeansInit {
    /// `k` distinct data points drawn uniformly.
    #[default]
    RandomPoints,
    /// k-means++ seeding.
    PlusPlus,
}

impl fmt::Display for KmeansInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KmeansInit::RandomPoints => "random",
            KmeansInit::PlusPlus => "plusplus",
        })
    }
}

impl FromStr for KmeansInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(KmeansInit::RandomPoints),
            "plusplus" => Ok(KmeansInit::PlusPlus),
            other => Err(Error::parse("k-means init", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansConfig {
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    /// Lower bound on reported spreads.
    pub spread_min: f64,
    pub init: KmeansInit,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-6,
            spread_min: 1e-3,
            init: KmeansInit::RandomPoints,
        }
    }
}

/// Result of a K-means fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    /// Per-cluster RMS distance of members to their centroid, floored at
    /// `spread_min`.
    pub spreads: Vec<f64>,
    pub assignments: Vec<usize>,
    /// Total within-cluster squared distance of the final assignment.
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Writes `cluster,center_0..,spread`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let dim = self.centroids.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["cluster".to_string()];
        header.extend((0..dim).map(|d| format!("center_{d}")));
        header.push("spread".into());
        w.write_record(&header)?;
        for (j, (c, s)) in self.centroids.iter().zip(&self.spreads).enumerate() {
            let mut row = vec![j.to_string()];
            row.extend(c.iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(*s));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<cluster csv>", e))?;
        Ok(())
    }
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn check_points(points: &[Vec<f64>], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            k,
            points: points.len(),
        });
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    Ok(dim)
}

/// Chooses `k` initial centroids.
pub fn seed_centroids<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    init: KmeansInit,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    check_points(points, k)?;
    match init {
        KmeansInit::RandomPoints => Ok(sample(rng, points.len(), k)
            .into_iter()
            .map(|i| points[i].clone())
            .collect()),
        KmeansInit::PlusPlus => {
            let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
            let mut d2: Vec<f64> = points
                .iter()
                .map(|p| squared_distance(p, &centroids[0]))
                .collect();
            while centroids.len() < k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.random::<f64>() * total;
                    let mut chosen = points.len() - 1;
                    for (i, w) in d2.iter().enumerate() {
                        if target < *w {
                            chosen = i;
                            break;
                        }
                        target -= w;
                    }
                    chosen
                } else {
                    rng.random_range(0..points.len())
                };
                let c = points[next].clone();
                for (d, p) in d2.iter_mut().zip(points) {
                    *d = d.min(squared_distance(p, &c));
                }
                centroids.push(c);
            }
            Ok(centroids)
        }
    }
}

/// Lloyd iterations from the given centroids.
///
/// A cluster left empty by an assignment step receives the point that is
/// currently farthest from its own centroid.
pub fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, config: &KmeansConfig) -> Result<ClusterModel> {
    let k = centroids.len();
    let dim = check_points(points, k)?;
    if let Some(c) = centroids.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: c.len(),
        });
    }

    let mut assignments = vec![0usize; points.len()];
    let mut dists = vec![0.0f64; points.len()];
    let mut inertia_history = Vec::new();
    let mut iterations = 0;

    let assign = |centroids: &[Vec<f64>], assignments: &mut [usize], dists: &mut [f64]| {
        for ((p, a), d) in points.iter().zip(assignments.iter_mut()).zip(dists.iter_mut()) {
            let (j, dd) = nearest(p, centroids);
            *a = j;
            *d = dd;
        }
    };

    while iterations < config.max_iters {
        assign(&centroids, &mut assignments, &mut dists);
        repair_empty(&mut centroids, &mut assignments, &mut dists, points);
        inertia_history.push(dists.iter().sum());
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for ((c, s), &n) in centroids.iter_mut().zip(&sums).zip(&counts) {
            let updated: Vec<f64> = s.iter().map(|v| v / n as f64).collect();
            shift = shift.max(squared_distance(c, &updated).sqrt());
            *c = updated;
        }
        if shift < config.tol {
            break;
        }
    }

    assign(&centroids, &mut assignments, &mut dists);
    repair_empty(&mut centroids, &mut assignments, &mut dists, points);
    let inertia = dists.iter().sum();

    let mut sq = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&a, &d) in assignments.iter().zip(&dists) {
        sq[a] += d;
        counts[a] += 1;
    }
    let spreads = sq
        .iter()
        .zip(&counts)
        .map(|(s, &n)| (s / n as f64).sqrt().max(config.spread_min))
        .collect();

    Ok(ClusterModel {
        centroids,
        spreads,
        assignments,
        inertia,
        inertia_history,
        iterations,
    })
}

fn repair_empty(
    centroids: &mut [Vec<f64>],
    assignments: &mut [usize],
    dists: &mut [f64],
    points: &[Vec<f64>],
) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        // Only take from clusters that keep at least one member.
        let donor = (0..points.len())
            .filter(|&i| counts[assignments[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
        let Some(i) = donor else { return };
        centroids[empty] = points[i].clone();
        assignments[i] = empty;
        dists[i] = 0.0;
    }
}

/// Seeds and runs K-means on `points`.
pub fn kmeans_fit<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    config: &KmeansConfig,
    rng: &mut R,
) -> Result<ClusterModel> {
    let init = seed_centroids(points, k, config.init, rng)?;
    lloyd(points, init, config)
}

/// Fits `k` kernels to arbitrary points: centers are the centroids and each
/// spread is `spread_scale` times the cluster spread.
pub fn init_kernels_from_points<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    kind: KernelKind,
    spread_scale: f64,
    config: &KmeansConfig,
    rng: &mut R,
) -> Result<Vec<KernelSpec>> {
    if !(spread_scale > 0.0 && spread_scale.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "spread_scale must be positive, got {spread_scale}"
        )));
    }
    let model = kmeans_fit(points, k, config, rng)?;
    model
        .centroids
        .into_iter()
        .zip(model.spreads)
        .map(|(c, s)| KernelSpec::new(kind, c, spread_scale * s))
        .collect()
}

/// [`init_kernels_from_points`] over the input vectors of a dataset.
pub fn init_kernels<R: Rng + ?Sized>(
    dataset: &WindowedDataset,
    k: usize,
    kind: KernelKind,
    spread_scale: f64,
    config: &KmeansConfig,
    rng: &mut R,
) -> Result<Vec<KernelSpec>> {
    if dataset.is_empty() {
        return Err(Error::InvalidParams("dataset is empty".into()));
    }
    init_kernels_from_points(&dataset.inputs, k, kind, spread_scale, config, rng)
}
