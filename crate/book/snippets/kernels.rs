use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strbf::kernels::{eval_kernel, kmeans_fit, KernelKind, KernelSpec, KmeansConfig};

fn main() {
    let g = KernelSpec::new(KernelKind::Gaussian, vec![0.0, 0.0], 0.5).unwrap();
    assert_eq!(eval_kernel(&g, &[0.0, 0.0]).unwrap(), 1.0);
    assert!((eval_kernel(&g, &[0.0, 0.5]).unwrap() - (-1.0f64).exp()).abs() < 1e-12);

    let mq = KernelSpec::new(KernelKind::Multiquadric, vec![0.0], 4.0).unwrap();
    assert_eq!(eval_kernel(&mq, &[3.0]).unwrap(), 5.0);

    // Two well separated groups of points.
    let points: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![if i < 10 { 0.0 } else { 5.0 } + 0.01 * i as f64])
        .collect();
    let fit = kmeans_fit(&points, 2, &KmeansConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut centers: Vec<f64> = fit.centroids.iter().map(|c| c[0]).collect();
    centers.sort_by(f64::total_cmp);
    assert!((centers[0] - 0.045).abs() < 1e-12 && (centers[1] - 5.145).abs() < 1e-12);
    assert!(fit.spreads.iter().all(|&s| s >= 1e-3));
}
