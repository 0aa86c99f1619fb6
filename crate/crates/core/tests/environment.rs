//! Environment properties: positivity and outcome bookkeeping over many
//! random episodes, the integrator against finer references, fixed-point
//! residuals and the normalization map.

mod common;

use ays_rl::env::{
    black_fixed_point, denormalize, derivatives, integrate, integrate_step_with, normalize, Action,
    AysEnv, AysParams, Boundaries, EnvConfig, Lorenz, NoiseSpec, NormState, Outcome, RawState,
    DEFAULT_SUBSTEPS, DEFAULT_TOLERANCE,
};
use common::rng;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn random_episodes_stay_positive_and_end_once() {
    let mut r = rng(31);
    for noisy in [false, true] {
        let config = EnvConfig {
            noise: if noisy { NoiseSpec::constant(0.05) } else { NoiseSpec::default() },
            ..EnvConfig::default()
        };
        let mut env = AysEnv::new(config).unwrap();
        for _ in 0..5_000 {
            env.reset(&mut r);
            let mut outcomes = 0;
            loop {
                let step = env.step(Action::from_index(r.random_range(0..4)).unwrap()).unwrap();
                let s = env.state();
                for v in s.to_array() {
                    assert!((0.0..1.0).contains(&v), "normalized coordinate {v}");
                }
                let raw = denormalize(s).unwrap();
                assert!(raw.a >= 0.0 && raw.y >= 0.0 && raw.s >= 0.0);
                if step.outcome.is_some() {
                    outcomes += 1;
                }
                if step.done {
                    break;
                }
            }
            assert_eq!(outcomes, 1);
            assert!(env.steps() <= 600);
        }
    }
}

fn max_abs_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn step_error(start: NormState, action: Action, params: &AysParams) -> f64 {
    let coarse = integrate_step_with(start, action, params, DEFAULT_SUBSTEPS).unwrap();
    let fine = integrate_step_with(start, action, params, DEFAULT_SUBSTEPS * 100).unwrap();
    max_abs_diff(coarse.to_array(), fine.to_array())
}

#[test]
fn one_year_step_matches_finer_reference_on_visited_states() {
    let mut r = rng(32);
    let params = AysParams::default();
    let mut env = AysEnv::new(EnvConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    for episode in 0..300 {
        env.reset(&mut r);
        loop {
            // Alternate random play with a schedule that reaches Green, so
            // the far side of the state space is covered too.
            let action = if episode % 2 == 0 {
                Action::from_index(r.random_range(0..4)).unwrap()
            } else if env.steps() < 35 {
                Action::DgEt
            } else {
                Action::Et
            };
            worst = worst.max(step_error(env.state(), action, &params));
            if env.step(action).unwrap().done {
                break;
            }
        }
    }
    assert!(worst < 1e-8, "worst {worst:e}");
}

#[test]
fn one_year_step_matches_finer_reference_on_inner_box() {
    let mut r = rng(34);
    let params = AysParams::default();
    let b = Boundaries::new(&params, DEFAULT_TOLERANCE);
    for _ in 0..500 {
        let start = NormState {
            a: r.random_range(0.0..b.a_pb),
            y: r.random_range(b.y_sf..0.75),
            s: r.random_range(0.0..0.999),
        };
        for action in Action::ALL {
            let err = step_error(start, action, &params);
            assert!(err < 1e-8, "{start:?} {action:?}: {err:e}");
        }
    }
}

#[test]
fn lorenz_fixture_matches_finer_reference() {
    let lorenz = Lorenz::default();
    for start in [[1.0, 1.0, 1.0], [-8.0, 7.0, 27.0], [0.1, 0.0, 0.0]] {
        let coarse = integrate(start, 1.0, 1_000, |v| lorenz.rhs(v));
        let fine = integrate(start, 1.0, 100_000, |v| lorenz.rhs(v));
        let err = max_abs_diff(coarse, fine);
        assert!(err < 1e-6, "{start:?}: {err:e}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    // dy/dt = y has the closed form e^t; halving h cuts the error by ~16.
    let err = |n: u32| (integrate([1.0], 1.0, n, |y| [y[0]])[0] - 1f64.exp()).abs();
    let ratio = err(10) / err(20);
    assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn black_fixed_point_residual() {
    let params = AysParams::default();
    let black = black_fixed_point(&params);
    let d = derivatives(black, &params);
    let scale = [black.a, black.y, 1.0];
    for (di, si) in d.iter().zip(scale) {
        assert!(di.abs() / si < 1e-9, "residual {d:?} at {black:?}");
    }
    let n = normalize(black);
    assert!((n.a - 0.5933).abs() < 1e-3 && (n.y - 0.4086).abs() < 1e-3 && n.s == 0.0);
}

#[test]
fn green_and_black_regions_disjoint() {
    let b = Boundaries::new(&AysParams::default(), DEFAULT_TOLERANCE);
    let gap = max_abs_diff(b.green.to_array(), b.black.to_array());
    assert!(gap > 2.0 * b.tolerance, "gap {gap}");
    assert_eq!(b.check(NormState { a: 0.01, y: 0.995, s: 0.995 }), Some(Outcome::GreenFixedPoint));
    assert_eq!(b.check(NormState::START), None);
}

#[test]
fn noise_multipliers_clipped() {
    let mut r = rng(33);
    let base = AysParams::default();
    let spec = NoiseSpec::constant(1.0);
    let (mut low, mut high) = (0, 0);
    for _ in 0..100_000 / 8 {
        let p = spec.sample_episode(&base, 0, &mut r);
        for (v, b) in p.to_array().iter().zip(base.to_array()) {
            let m = v / b;
            assert!((0.5 - 1e-12..=1.5 + 1e-12).contains(&m), "multiplier {m}");
            low += usize::from((m - 0.5).abs() < 1e-12);
            high += usize::from((m - 1.5).abs() < 1e-12);
        }
    }
    assert!(low > 0 && high > 0, "clip bounds never reached");
}

proptest! {
    #[test]
    fn normalization_round_trip(a in 0.0f64..0.999, y in 0.0f64..0.999, s in 0.0f64..0.999) {
        let n = NormState { a, y, s };
        let back = normalize(denormalize(n).unwrap());
        prop_assert!(max_abs_diff(back.to_array(), n.to_array()) < 1e-12);
    }

    #[test]
    fn raw_round_trip(a in 0.0f64..1e4, y in 0.0f64..1e16, s in 0.0f64..1e14) {
        let raw = RawState { a, y, s };
        let back = denormalize(normalize(raw)).unwrap();
        for (x, b) in raw.to_array().iter().zip(back.to_array()) {
            prop_assert!((x - b).abs() <= 1e-12 * x.abs().max(1.0) * 1e3);
        }
    }
}
