use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strbf::series::{add_awgn_in_range, generate_mackey_glass, make_windows, IndexRange, MackeyGlassParams};

fn main() {
    let params = MackeyGlassParams::default();
    let clean = generate_mackey_glass(&params).unwrap();
    assert_eq!(clean.len(), 3001);

    // Until t = 20 the delayed term is zero, so the solution is pure decay.
    let decay = 1.2 * (-0.1f64 * 10.0).exp();
    assert!((clean.values()[10] - decay).abs() < 1e-4);

    let train = IndexRange::new(100, 2500);
    let test = IndexRange::new(2501, 3000);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let noisy = add_awgn_in_range(&clean, train, 30.0, &mut rng).unwrap();
    assert_eq!(noisy.values()[2600], clean.values()[2600]);

    let train_set = make_windows(&noisy, 2, train).unwrap();
    let test_set = make_windows(&noisy, 2, test).unwrap();
    assert_eq!((train_set.len(), test_set.len()), (2399, 498));

    let (input, target) = train_set.iter().next().unwrap();
    assert_eq!(input, &noisy.values()[100..102]);
    assert_eq!(target, noisy.values()[102]);
}
