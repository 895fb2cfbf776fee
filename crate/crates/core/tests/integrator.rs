//! Mackey-Glass integration checked against an independent fine-step
//! integrator and against itself under step halving.

use strbf::series::{generate_mackey_glass, MackeyGlassParams};

/// Heun's method at step `h` with the delay an exact multiple of `h`, so the
/// delayed state is always a stored grid value. The delayed term is zero
/// up to t = delay; a step starting there already sees u(0).
fn heun_reference(p: &MackeyGlassParams, h: f64) -> Vec<f64> {
    let lag = (p.delay / h).round() as usize;
    let per_sample = (p.sample_interval / h).round() as usize;
    let steps = (p.horizon / h).round() as usize;
    let f = |u: f64, ud: f64| p.a * ud / (1.0 + ud.powf(p.exponent)) - p.b * u;
    let mut grid = Vec::with_capacity(steps + 1);
    grid.push(p.initial_value);
    for n in 0..steps {
        let u = grid[n];
        let k1 = f(u, if n >= lag { grid[n - lag] } else { 0.0 });
        let pred = u + h * k1;
        let k2 = f(pred, if n + 1 > lag { grid[n + 1 - lag] } else { 0.0 });
        grid.push(u + 0.5 * h * (k1 + k2));
    }
    grid.iter().step_by(per_sample).copied().collect()
}

/// Richardson extrapolation of two Heun solutions, cancelling the leading
/// error term.
fn reference(p: &MackeyGlassParams) -> Vec<f64> {
    let coarse = heun_reference(p, 1e-3);
    let fine = heun_reference(p, 5e-4);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

fn first_departure(a: &[f64], b: &[f64], tol: f64) -> Option<usize> {
    a.iter().zip(b).position(|(x, y)| (x - y).abs() > tol)
}

#[test]
fn matches_fine_reference_over_first_1500_seconds() {
    let p = MackeyGlassParams {
        horizon: 1500.0,
        ..Default::default()
    };
    let ours = generate_mackey_glass(&p).unwrap();
    let reference = reference(&p);
    assert_eq!(ours.len(), reference.len());
    let worst = ours
        .values()
        .iter()
        .zip(&reference)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max deviation {worst:e}");
}

#[test]
fn full_horizon_is_finite_and_bounded() {
    let s = generate_mackey_glass(&MackeyGlassParams::default()).unwrap();
    assert!(s.values().iter().all(|v| v.is_finite()));
    assert!(s.min() > 0.1 && s.max() < 1.4, "[{}, {}]", s.min(), s.max());
}

#[test]
fn step_halving_agrees_over_first_1500_seconds() {
    let p = MackeyGlassParams {
        horizon: 1500.0,
        ..Default::default()
    };
    let coarse = generate_mackey_glass(&p).unwrap();
    let fine = generate_mackey_glass(&MackeyGlassParams {
        integration_step: 0.05,
        ..p
    })
    .unwrap();
    assert_eq!(first_departure(coarse.values(), fine.values(), 1e-3), None);
}

#[test]
fn step_halving_error_shrinks_at_fourth_order() {
    let base = MackeyGlassParams {
        horizon: 200.0,
        ..Default::default()
    };
    let at = |h: f64| {
        generate_mackey_glass(&MackeyGlassParams {
            integration_step: h,
            ..base
        })
        .unwrap()
    };
    let (s1, s2, s4) = (at(0.2), at(0.1), at(0.05));
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let ratio = diff(s1.values(), s2.values()) / diff(s2.values(), s4.values());
    assert!(ratio > 12.0, "ratio {ratio}");
}
