//! Harness contracts: determinism, metrics algebra, file outputs, grid
//! sweeps against closed forms, numeric aborts and the CLI.

use std::path::Path;
use std::process::Command;

use ays_rl::agents::{AgentContext, AgentKind, DqnAgent, DqnConfig, Overrides};
use ays_rl::env::{Action, EnvConfig, NormState, Outcome};
use ays_rl::harness::{
    evaluate, grid_sweep, moving_average, outcomes, read_records, returns, success_rate, train,
    EvalOptions, GridCell, GridMode, GridSpec, Preset, RunCheckpoint, RunConfig, ABORT_FILE,
    CHECKPOINT_FILE, METRICS_FILE, MOVING_AVERAGE_WINDOW, SUMMARY_FILE,
};
use ays_rl::nn::{Activation, Dense, HeadKind, LayerSpec, MlpNetwork};
use ays_rl::Error;

fn small_dqn(frames: u64) -> RunConfig {
    let mut c = RunConfig::new(Preset::Pb, AgentKind::DuelDdqn);
    c.frame_limit = frames;
    c.overrides = Overrides {
        hidden_width: Some(16),
        batch_size: Some(32),
        buffer_size: Some(1024),
        ..Overrides::default()
    };
    c
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_dqn(3_000);
    for run in ["a", "b"] {
        train(&config, 7, Some(&dir.path().join(run))).unwrap();
    }
    for f in [METRICS_FILE, CHECKPOINT_FILE] {
        assert_eq!(read(&dir.path().join("a").join(f)), read(&dir.path().join("b").join(f)), "{f}");
    }
    train(&config, 8, Some(&dir.path().join("c"))).unwrap();
    assert_ne!(
        read(&dir.path().join("a").join(METRICS_FILE)),
        read(&dir.path().join("c").join(METRICS_FILE))
    );
}

#[test]
fn logged_statistics_recompute_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::new(Preset::Pb, AgentKind::Random);
    config.frame_limit = 20_000;
    let out = train(&config, 1, Some(dir.path())).unwrap();
    let records = read_records(&dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(records.len(), out.records.len());
    assert!(records.len() > MOVING_AVERAGE_WINDOW);

    let ma = moving_average(&returns(&records), MOVING_AVERAGE_WINDOW).unwrap();
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.moving_average, ma[i], "episode {i}");
        assert_eq!(r.success_rate, success_rate(&outcomes(&records[..=i])).unwrap());
        assert_eq!(r.episode_return, out.records[i].episode_return);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary["success_rate"].as_f64(), success_rate(&outcomes(&records)));
    let mean = returns(&records).iter().sum::<f64>() / records.len() as f64;
    assert_eq!(summary["mean_return"].as_f64().unwrap(), mean);
    let frames: u64 = records.iter().map(|r| u64::from(r.length)).sum();
    assert_eq!(frames, 20_000);
    assert_eq!(summary["frames"], 20_000);
}

fn linear_dqn(weights: Vec<f64>, bias: Vec<f64>) -> DqnAgent {
    let config = DqnConfig {
        hidden: vec![],
        ..DqnConfig::dqn()
    };
    let mut agent = DqnAgent::new(config, false, AgentContext::new(3, 100, 0)).unwrap();
    let layer = Dense::new(
        LayerSpec {
            input_width: 3,
            output_width: 4,
            activation: Activation::Identity,
        },
        weights,
        bias,
    )
    .unwrap();
    *agent.policy_net_mut() = MlpNetwork::from_layers(HeadKind::ActionValues, vec![layer]).unwrap();
    agent
}

#[test]
fn value_grid_of_constant_network_is_constant() {
    let mut agent = linear_dqn(vec![0.0; 12], vec![0.25, 1.5, -2.0, 0.0]);
    let g = grid_sweep(&mut agent, &EnvConfig::default(), &GridSpec::with_resolution(5), GridMode::Value, true)
        .unwrap();
    assert_eq!(g.cells.len(), 5);
    assert!(g.cells.iter().flatten().all(|c| *c == GridCell::Value(1.5)));
}

#[test]
fn value_grid_of_linear_network_matches_closed_form() {
    // Rows are actions; Q(s, k) = w_k · (a, y, s) + b_k.
    let w = vec![
        1.0, -2.0, 0.5, //
        -1.0, 3.0, 0.0, //
        0.0, 0.0, 4.0, //
        2.0, 2.0, -1.0,
    ];
    let b = vec![0.1, -0.3, -1.5, 0.0];
    let mut agent = linear_dqn(w.clone(), b.clone());
    let grid = GridSpec::with_resolution(7);
    let values = grid_sweep(&mut agent, &EnvConfig::default(), &grid, GridMode::Value, true).unwrap();
    let first = grid_sweep(&mut agent, &EnvConfig::default(), &grid, GridMode::FirstAction, true).unwrap();
    for (j, y) in grid.y_values().into_iter().enumerate() {
        for (i, a) in grid.a_values().into_iter().enumerate() {
            let x = [a, y, grid.s];
            let q: Vec<f64> = (0..4)
                .map(|k| (0..3).map(|d| w[3 * k + d] * x[d]).sum::<f64>() + b[k])
                .collect();
            let (best, max) = q
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if *v > acc.1 { (k, *v) } else { acc });
            match values.cells[j][i] {
                GridCell::Value(v) => assert!((v - max).abs() < 1e-12, "({a}, {y}): {v} vs {max}"),
                other => panic!("{other:?}"),
            }
            assert_eq!(first.cells[j][i], GridCell::Action(Action::from_index(best).unwrap()));
        }
    }
}

#[test]
fn single_cell_end_state_matches_evaluation_from_start() {
    let config = small_dqn(2_000);
    let out = train(&config, 2, None).unwrap();
    let mut agent = out.checkpoint.restore_agent().unwrap();
    let grid = grid_sweep(
        agent.as_mut(),
        &config.env,
        &GridSpec::with_resolution(1),
        GridMode::EndState,
        true,
    )
    .unwrap();
    let eval = evaluate(
        agent.as_mut(),
        &config.env,
        &EvalOptions {
            episodes: 1,
            greedy: Some(true),
            start: Some(NormState::START),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(grid.a_values, vec![0.5]);
    assert_eq!(grid.cells[0][0], GridCell::Outcome(eval.details[0].outcome));
}

#[test]
fn evaluation_checks_agent_kind() {
    let out = train(&small_dqn(300), 0, None).unwrap();
    let mut other = out.checkpoint.config.clone();
    other.agent = AgentKind::Dqn;
    let r = ays_rl::harness::evaluate_checkpoint(&out.checkpoint, &other, &EvalOptions::default());
    assert!(matches!(r, Err(Error::Config(_))));
}

fn exploding(frames: u64) -> RunConfig {
    let mut c = small_dqn(frames);
    c.overrides.learning_rate = Some(1e305);
    c.stable_interval = 1;
    c
}

#[test]
fn numeric_blowup_aborts_with_stable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let r = train(&exploding(5_000), 0, Some(dir.path()));
    assert!(matches!(r, Err(Error::Numeric(_))), "{r:?}");
    let abort: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(ABORT_FILE)).unwrap()).unwrap();
    assert!(abort["error"].as_str().unwrap().contains("non-finite"));
    let ckpt = RunCheckpoint::load(&dir.path().join(CHECKPOINT_FILE)).unwrap();
    assert_eq!(ckpt.episodes, abort["checkpoint_episodes"].as_u64().unwrap());
    assert!(ckpt.restore_agent().unwrap().is_finite());
    assert!(!dir.path().join(SUMMARY_FILE).exists());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ays-rl"))
}

#[test]
fn cli_train_evaluate_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = cli()
        .args(["train", "--preset", "simple", "--agent", "random", "--seed", "3", "--frames", "800", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let ckpt = out.join(CHECKPOINT_FILE);
    assert!(out.join(METRICS_FILE).exists() && out.join(SUMMARY_FILE).exists());

    let eval = cli()
        .args(["evaluate", "--episodes", "2", "--checkpoint"])
        .arg(&ckpt)
        .output()
        .unwrap();
    assert!(eval.status.success(), "{}", String::from_utf8_lossy(&eval.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(summary["episodes"], 2);
    assert!(out.join("trajectory_0001.csv").exists());

    let grid = cli()
        .args(["grid", "--mode", "end-state", "--resolution", "3", "--checkpoint"])
        .arg(&ckpt)
        .output()
        .unwrap();
    assert!(grid.status.success(), "{}", String::from_utf8_lossy(&grid.stderr));
    let csv = std::fs::read_to_string(out.join("grid_end_state.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("y\\a,0.45,0.5,0.55"));
    let known: Vec<&str> = Outcome::ALL.iter().map(|o| o.name()).collect();
    for line in csv.lines().skip(1) {
        assert!(line.split(',').skip(1).all(|c| known.contains(&c)), "{line}");
    }
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| cli().args(args).output().unwrap().status.code();

    assert_eq!(code(&["train", "--preset", "chaos", "--out", "x"]), Some(2));
    assert_eq!(code(&["train", "--agent", "sarsa", "--out", "x"]), Some(2));

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "frame_limit = 10\nwarp_factor = 9\n").unwrap();
    let out = dir.path().join("o");
    let c = cli()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&c.stderr).contains("warp_factor"));

    let good = dir.path().join("boom.toml");
    std::fs::write(
        &good,
        "agent = \"duelddqn\"\nframe_limit = 5000\nlearning_rate = 1e305\nhidden_width = 16\nbatch_size = 32\nbuffer_size = 1024\n",
    )
    .unwrap();
    let c = cli()
        .args(["train", "--seed", "0", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(3), "{}", String::from_utf8_lossy(&c.stderr));
    assert!(out.join(ABORT_FILE).exists());

    assert_eq!(
        code(&["evaluate", "--episodes", "1", "--checkpoint", dir.path().join("missing.bin").to_str().unwrap()]),
        Some(1)
    );
}
