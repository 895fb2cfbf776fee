use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strbf::kernels::{eval_kernel, kmeans_fit, lloyd, seed_centroids, KernelKind, KernelSpec, KmeansConfig, KmeansInit};

const KINDS: [KernelKind; 3] = [
    KernelKind::Gaussian,
    KernelKind::Multiquadric,
    KernelKind::InverseMultiquadric,
];

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Plain Lloyd: assign to nearest, move to member means, stop when nothing
/// moves more than `tol`.
fn reference_lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, tol: f64, max_iters: usize) -> (Vec<Vec<f64>>, f64) {
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let assign = |cs: &[Vec<f64>]| -> Vec<usize> {
        points
            .iter()
            .map(|p| {
                (0..cs.len())
                    .min_by(|&i, &j| d2(p, &cs[i]).partial_cmp(&d2(p, &cs[j])).unwrap())
                    .unwrap()
            })
            .collect()
    };
    for _ in 0..max_iters {
        let a = assign(&centroids);
        let mut moved: f64 = 0.0;
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points.iter().zip(&a).filter(|(_, &aj)| aj == j).map(|(p, _)| p).collect();
            assert!(!members.is_empty(), "reference does not handle empty clusters");
            let mean: Vec<f64> = (0..c.len())
                .map(|d| members.iter().map(|m| m[d]).sum::<f64>() / members.len() as f64)
                .collect();
            moved = moved.max(c.iter().zip(&mean).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            *c = mean;
        }
        if moved < tol {
            break;
        }
    }
    let a = assign(&centroids);
    let inertia = points.iter().zip(&a).map(|(p, &j)| d2(p, &centroids[j])).sum();
    (centroids, inertia)
}

#[test]
fn lloyd_matches_reference_rerun() {
    let points = random_points(200, 2, 11);
    let config = KmeansConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let init = seed_centroids(&points, 5, KmeansInit::RandomPoints, &mut rng).unwrap();
    let fit = lloyd(&points, init.clone(), &config).unwrap();
    let (centroids, inertia) = reference_lloyd(&points, init, config.tol, config.max_iters);
    assert!((fit.inertia - inertia).abs() <= 1e-9 * inertia, "{} vs {}", fit.inertia, inertia);
    for (a, b) in fit.centroids.iter().zip(&centroids) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn fit_is_reproducible_from_seed() {
    let points = random_points(200, 2, 3);
    let config = KmeansConfig::default();
    let a = kmeans_fit(&points, 5, &config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = kmeans_fit(&points, 5, &config, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gaussian_decreases_with_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let center: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let spread = rng.random_range(0.1..3.0);
        let spec = KernelSpec::new(KernelKind::Gaussian, center.clone(), spread).unwrap();
        let dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        let mut prev = f64::INFINITY;
        for step in 0..20 {
            let r = 0.1 * spread * step as f64;
            let u: Vec<f64> = center.iter().zip(&dir).map(|(c, d)| c + r * d / norm).collect();
            let got = eval_kernel(&spec, &u).unwrap();
            let direct = (-(u.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>()) / (spread * spread)).exp();
            assert!((got - direct).abs() < 1e-12);
            assert!(got < prev);
            prev = got;
        }
    }
}

proptest! {
    #[test]
    fn kernels_are_radially_symmetric(
        cx in -2.0..2.0f64, cy in -2.0..2.0f64,
        dx in -2.0..2.0f64, dy in -2.0..2.0f64,
        angle in 0.0..std::f64::consts::TAU,
        spread in 0.05..3.0f64,
    ) {
        let (s, c) = angle.sin_cos();
        let rotated = [cx + c * dx - s * dy, cy + s * dx + c * dy];
        let reflected = [cx - dx, cy + dy];
        for kind in KINDS {
            let spec = KernelSpec::new(kind, vec![cx, cy], spread).unwrap();
            let base = eval_kernel(&spec, &[cx + dx, cy + dy]).unwrap();
            for moved in [rotated, reflected] {
                let v = eval_kernel(&spec, &moved).unwrap();
                prop_assert!((v - base).abs() <= 1e-12 * base.max(1.0), "{} vs {}", v, base);
            }
        }
    }

    #[test]
    fn kernel_ranges(u in -5.0..5.0f64, center in -5.0..5.0f64, spread in 0.05..3.0f64) {
        let eval = |kind| eval_kernel(&KernelSpec::new(kind, vec![center], spread).unwrap(), &[u]).unwrap();
        let g = eval(KernelKind::Gaussian);
        prop_assert!(g > 0.0 || (u - center).abs() > 20.0 * spread);
        prop_assert!(g <= 1.0);
        prop_assert!(eval(KernelKind::Multiquadric) >= spread);
        let imq = eval(KernelKind::InverseMultiquadric);
        prop_assert!(imq > 0.0 && imq <= 1.0 / spread);
    }

    #[test]
    fn inertia_never_increases(seed in 0u64..500, k in 1usize..8, plusplus in any::<bool>()) {
        let points = random_points(120, 2, seed);
        let config = KmeansConfig {
            init: if plusplus { KmeansInit::PlusPlus } else { KmeansInit::RandomPoints },
            ..Default::default()
        };
        let fit = kmeans_fit(&points, k, &config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for w in fit.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", fit.inertia_history);
        }
        prop_assert!(fit.spreads.iter().all(|&s| s >= config.spread_min));
    }
}
