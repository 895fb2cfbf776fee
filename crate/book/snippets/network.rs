use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strbf::kernels::{KernelKind, KernelSpec};
use strbf::network::{init_network, InitConfig, NetworkState, Topology};
use strbf::series::{generate_mackey_glass, make_windows, IndexRange, MackeyGlassParams};

fn main() {
    // Two branches of two scalar kernels: branch t sees lag u[t].
    let topology = Topology::strbf(2, 2);
    let kernel = |c: f64| KernelSpec::new(KernelKind::Gaussian, vec![c], 0.5).unwrap();
    let mut net = NetworkState::new(
        topology,
        vec![kernel(0.5), kernel(1.0), kernel(0.5), kernel(1.0)],
        vec![0.1, 0.2, 0.3, 0.4],
        0.0,
    )
    .unwrap();

    let u = [0.5, 1.0];
    let y = net.forward(&u).unwrap().prediction;
    let g = (-1.0f64).exp();
    let expected = 0.1 + 0.2 * g + 0.3 * g + 0.4;
    assert!((y - expected).abs() < 1e-12);

    let step = net.sgd_step(&u, 1.0, 0.1).unwrap();
    assert!((net.bias() - 0.1 * step.error).abs() < 1e-15);

    let series = generate_mackey_glass(&MackeyGlassParams::default()).unwrap();
    let train = make_windows(&series, 2, IndexRange::new(100, 2500)).unwrap();
    let test = make_windows(&series, 2, IndexRange::new(2501, 3000)).unwrap();
    let config = InitConfig {
        spread_scale: 2.25,
        init_range: 1.5,
        ..Default::default()
    };
    let mut net = init_network(Topology::strbf(10, 2), &train, &config, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    let before = net.evaluate(&test).unwrap().mse;
    let trace = net.train_online(&train, 0.05, 3).unwrap();
    assert_eq!(trace.len(), 3 * train.len());
    let after = net.evaluate(&test).unwrap().mse;
    assert!(after < before);
}

