//! Reproduction checks: each acceptance criterion evaluated against the
//! library and the command-line front end, reported as PASS/FAIL lines.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strbf::experiment::{run_monte_carlo, smooth_curve, ExperimentConfig, MonteCarlo};
use strbf::kernels::{eval_kernel, KernelKind, KernelSpec};
use strbf::network::{NetworkState, Topology};
use strbf::series::{add_awgn, generate_mackey_glass, MackeyGlassParams, TimeSeries};

const RBF_TABLE_DB: f64 = -20.88;
const STRBF_TABLE_DB: f64 = -26.34;
const TABLE_TOLERANCE_DB: f64 = 3.0;
const MIN_GAP_DB: f64 = 3.0;
const MIN_WINS: usize = 80;
const GRADIENT_TOLERANCE: f64 = 1e-6;
const KERNEL_TOLERANCE: f64 = 1e-12;
const DECAY_TOLERANCE: f64 = 1e-4;
const HALVING_TOLERANCE: f64 = 1e-3;
const SNR_TOLERANCE_DB: f64 = 0.3;
const DOMINANCE_FRACTION: f64 = 0.9;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Criterion {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn table_reproduction(mc: &MonteCarlo, elapsed: f64) -> Criterion {
    let rbf = mc.rbf.mean_test_mse_db;
    let strbf = mc.strbf.mean_test_mse_db;
    let pass = (rbf - RBF_TABLE_DB).abs() <= TABLE_TOLERANCE_DB
        && (strbf - STRBF_TABLE_DB).abs() <= TABLE_TOLERANCE_DB
        && elapsed < 600.0;
    Criterion::new(
        "1 table reproduction",
        pass,
        format!(
            "test MSE rbf {rbf:.2} dB (target {RBF_TABLE_DB} ± {TABLE_TOLERANCE_DB}), strbf {strbf:.2} dB \
             (target {STRBF_TABLE_DB} ± {TABLE_TOLERANCE_DB}); train rbf {:.2} dB, strbf {:.2} dB; {} runs in {elapsed:.1} s",
            mc.rbf.mean_train_mse_db,
            mc.strbf.mean_train_mse_db,
            mc.records.len()
        ),
    )
}

pub fn ordering(mc: &MonteCarlo) -> Criterion {
    let gap = mc.rbf.mean_test_mse_db - mc.strbf.mean_test_mse_db;
    let wins = mc.strbf_wins();
    Criterion::new(
        "2 ordering",
        gap >= MIN_GAP_DB && wins >= MIN_WINS && mc.records.len() == 100,
        format!("test gap {gap:.2} dB (need >= {MIN_GAP_DB}), strbf wins {wins}/{} (need >= {MIN_WINS})", mc.records.len()),
    )
}

fn random_state(topology: Topology, kind: KernelKind, rng: &mut ChaCha8Rng) -> NetworkState {
    let dim = topology.kernel_dim();
    let kernels = (0..topology.size())
        .map(|_| {
            let center = (0..dim).map(|_| rng.random_range(0.2..1.4)).collect();
            KernelSpec::new(kind, center, rng.random_range(0.1..1.0)).unwrap()
        })
        .collect();
    let weights = (0..topology.size()).map(|_| rng.random_range(-1.0..1.0)).collect();
    NetworkState::new(topology, kernels, weights, rng.random_range(-1.0..1.0)).unwrap()
}

fn random_input(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(0.2..1.4)).collect()
}

/// Relative error between `-(updated - current)/eta` and central finite
/// differences of `e²/2` over every weight and the bias.
fn gradient_error(state: &NetworkState, u: &[f64], target: f64, eta: f64) -> f64 {
    let mut stepped = state.clone();
    stepped.sgd_step(u, target, eta).unwrap();
    let n = state.weights().len();
    let mut diff2 = 0.0;
    let mut ref2 = 0.0;
    for j in 0..=n {
        let analytic = if j < n {
            -(stepped.weights()[j] - state.weights()[j]) / eta
        } else {
            -(stepped.bias() - state.bias()) / eta
        };
        let cost = |delta: f64| {
            let mut s = state.clone();
            let mut w = s.weights().to_vec();
            let mut p = s.bias();
            if j < n {
                w[j] += delta;
            } else {
                p += delta;
            }
            s.set_linear_params(w, p).unwrap();
            let e = target - s.forward(u).unwrap().prediction;
            0.5 * e * e
        };
        let h = 1e-6;
        let numeric = (cost(h) - cost(-h)) / (2.0 * h);
        diff2 += (analytic - numeric).powi(2);
        ref2 += numeric * numeric;
    }
    diff2.sqrt() / ref2.sqrt().max(1e-300)
}

pub fn gradient_audit() -> Criterion {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kinds = [KernelKind::Gaussian, KernelKind::Multiquadric, KernelKind::InverseMultiquadric];
    let mut worst: f64 = 0.0;
    for topology in [Topology::rbf(20, 2), Topology::strbf(10, 2)] {
        for trial in 0..100 {
            let state = random_state(topology, kinds[trial % 3], &mut rng);
            let u = random_input(2, &mut rng);
            let target = rng.random_range(0.2..1.4);
            let eta = rng.random_range(1e-3..1e-1);
            worst = worst.max(gradient_error(&state, &u, target, eta));
        }
    }
    Criterion::new(
        "3 gradient audit",
        worst <= GRADIENT_TOLERANCE,
        format!(
            "worst relative error {worst:.2e} over 2 x 100 triples (limit {GRADIENT_TOLERANCE:e}) in {:.2} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

pub fn kernel_identities() -> Criterion {
    let eval = |kind, center: Vec<f64>, spread, u: &[f64]| {
        eval_kernel(&KernelSpec::new(kind, center, spread).unwrap(), u).unwrap()
    };
    let checks = [
        ("gaussian at center", eval(KernelKind::Gaussian, vec![0.3, -1.2], 0.7, &[0.3, -1.2]), 1.0),
        ("gaussian at one spread", eval(KernelKind::Gaussian, vec![0.0, 0.0], 0.7, &[0.0, 0.7]), (-1.0f64).exp()),
        ("multiquadric r=3 tau=4", eval(KernelKind::Multiquadric, vec![1.0, 1.0], 4.0, &[4.0, 1.0]), 5.0),
        ("multiquadric r=4 tau=3", eval(KernelKind::Multiquadric, vec![0.0, 0.0], 3.0, &[0.0, 4.0]), 5.0),
        ("inverse multiquadric r=3 tau=4", eval(KernelKind::InverseMultiquadric, vec![0.0], 4.0, &[-3.0]), 0.2),
        ("inverse multiquadric r=4 tau=3", eval(KernelKind::InverseMultiquadric, vec![0.0, 0.0], 3.0, &[0.0, 4.0]), 0.2),
    ];
    let worst = checks.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let failing: Vec<&str> = checks
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > KERNEL_TOLERANCE)
        .map(|(name, ..)| *name)
        .collect();
    Criterion::new(
        "4 kernel identities",
        failing.is_empty(),
        format!("{} cases, worst deviation {worst:.1e} (limit {KERNEL_TOLERANCE:e}); failing {failing:?}", checks.len()),
    )
}

pub fn integrator() -> Criterion {
    let start = Instant::now();
    let decay = generate_mackey_glass(&MackeyGlassParams {
        a: 0.0,
        horizon: 100.0,
        ..Default::default()
    })
    .unwrap();
    let decay_err = (decay.values()[10] - 1.2 * (-1.0f64).exp()).abs();

    let coarse = generate_mackey_glass(&MackeyGlassParams::default()).unwrap();
    let fine = generate_mackey_glass(&MackeyGlassParams {
        integration_step: 0.05,
        ..Default::default()
    })
    .unwrap();
    let diffs: Vec<f64> = coarse
        .values()
        .iter()
        .zip(fine.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let max_diff = diffs.iter().copied().fold(0.0, f64::max);
    let departure = diffs.iter().position(|&d| d > HALVING_TOLERANCE);
    Criterion::new(
        "5 integrator",
        decay_err <= DECAY_TOLERANCE && departure.is_none(),
        format!(
            "decay error at t=10 {decay_err:.1e} (limit {DECAY_TOLERANCE:e}); step-halving max difference over 3000 s \
             {max_diff:.2e} (limit {HALVING_TOLERANCE:e}), first exceeded at t = {}; {:.2} s",
            departure.map_or("never".into(), |i| coarse.time(i).to_string()),
            start.elapsed().as_secs_f64()
        ),
    )
}

pub fn snr_calibration() -> Criterion {
    let n = 100_000;
    let values: Vec<f64> = (0..n)
        .map(|i| std::f64::consts::SQRT_2 * (0.01 * i as f64).sin())
        .collect();
    let clean = TimeSeries::new(values, 0.0, 1.0).unwrap();
    let power = clean.values().iter().map(|v| v * v).sum::<f64>() / n as f64;
    let noisy = add_awgn(&clean, 30.0, &mut ChaCha8Rng::seed_from_u64(30)).unwrap();
    let noise_power = noisy
        .values()
        .iter()
        .zip(clean.values())
        .map(|(y, x)| (y - x).powi(2))
        .sum::<f64>()
        / n as f64;
    let snr = 10.0 * (power / noise_power).log10();
    Criterion::new(
        "6 snr calibration",
        (snr - 30.0).abs() <= SNR_TOLERANCE_DB,
        format!("empirical SNR {snr:.3} dB over {n} samples of a power-{power:.3} signal (target 30 ± {SNR_TOLERANCE_DB})"),
    )
}

pub fn determinism() -> Criterion {
    let dir = std::env::temp_dir().join(format!("strbf-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let run = |name: &str| {
        let out = dir.join(name);
        let args = ["strbf-cli", "--quiet", "--out", out.to_str().unwrap(), "compare", "--runs", "3", "--seed", "7"];
        (strbf_cli::run_args(args).is_ok(), out)
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    let csvs = |p: &Path| {
        let mut names: Vec<String> = std::fs::read_dir(p)
            .map(|d| {
                d.filter_map(|e| e.ok())
                    .map(|e| e.file_name().to_string_lossy().into_owned())
                    .filter(|n| n.ends_with(".csv"))
                    .collect()
            })
            .unwrap_or_default();
        names.sort();
        names
    };
    let names = csvs(&a);
    let identical = names == csvs(&b)
        && names
            .iter()
            .all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok());
    let _ = std::fs::remove_dir_all(&dir);
    Criterion::new(
        "7 determinism",
        ok_a && ok_b && names.len() == 5 && identical,
        format!("two `compare --runs 3 --seed 7` invocations, {} CSV files, byte-identical: {identical}", names.len()),
    )
}

pub fn degeneracy() -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rbf = random_state(Topology::rbf(20, 2), KernelKind::Gaussian, &mut rng);
    let strbf = NetworkState::new(
        Topology::strbf_full_vector(20, 1, 2),
        rbf.kernels().to_vec(),
        rbf.weights().to_vec(),
        rbf.bias(),
    )
    .unwrap();
    let mismatches = (0..1000)
        .filter(|_| {
            let u = random_input(2, &mut rng);
            rbf.forward(&u).unwrap().prediction.to_bits() != strbf.forward(&u).unwrap().prediction.to_bits()
        })
        .count();
    Criterion::new(
        "8 degeneracy",
        mismatches == 0,
        format!("{mismatches} of 1000 random inputs differ bitwise between single-branch full-vector STRBF and RBF"),
    )
}

pub fn curve_dominance(mc: &MonteCarlo, window: usize) -> Criterion {
    let fraction = |rbf: &[f64], strbf: &[f64]| {
        let r = smooth_curve(rbf, window);
        let s = smooth_curve(strbf, window);
        r.iter().zip(&s).filter(|(a, b)| b <= a).count() as f64 / r.len() as f64
    };
    let train = fraction(&mc.rbf.train_curve, &mc.strbf.train_curve);
    let test = fraction(&mc.rbf.test_curve, &mc.strbf.test_curve);
    Criterion::new(
        "curve dominance",
        train >= DOMINANCE_FRACTION && test >= DOMINANCE_FRACTION,
        format!(
            "smoothed strbf <= rbf on {:.1}% of training and {:.1}% of testing iterations (need >= {:.0}%)",
            100.0 * train,
            100.0 * test,
            100.0 * DOMINANCE_FRACTION
        ),
    )
}

/// Evaluates every criterion, running the full default comparison once.
pub fn evaluate_all() -> Vec<Criterion> {
    let config = ExperimentConfig::default();
    let start = Instant::now();
    let mc = run_monte_carlo(&config).expect("default comparison runs");
    let elapsed = start.elapsed().as_secs_f64();
    vec![
        table_reproduction(&mc, elapsed),
        ordering(&mc),
        gradient_audit(),
        kernel_identities(),
        integrator(),
        snr_calibration(),
        determinism(),
        degeneracy(),
        curve_dominance(&mc, config.smoothing_window),
    ]
}

/// Prints one line per criterion and a closing summary; returns whether all
/// passed.
pub fn print_report(criteria: &[Criterion]) -> bool {
    for c in criteria {
        println!("{c}");
    }
    let failing: Vec<&str> = criteria.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failing.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: {} of {} failing: {}", failing.len(), criteria.len(), failing.join(", "));
    }
    failing.is_empty()
}
