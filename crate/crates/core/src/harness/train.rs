use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::metrics::{MetricsLog, RecordWriter, RunRecord, RunSummary};
use crate::agents::{build_agent, load_agent, Agent, AgentContext};
use crate::codec::{Reader, Writer};
use crate::env::{Action, AysEnv, Outcome};
use crate::error::{Error, Result};
use crate::replay::Transition;

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ABORT_FILE: &str = "abort.json";

/// Random stream for the environment; the agent seeds its own from the same
/// seed on stream 0.
pub fn env_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// A trained agent together with the run that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct RunCheckpoint {
    pub config: RunConfig,
    pub seed: u64,
    pub frames: u64,
    pub episodes: u64,
    /// Bytes from [`Agent::save`].
    pub agent: Vec<u8>,
}

const MAGIC: &[u8] = b"AYSRUN";
const VERSION: u16 = 1;

impl RunCheckpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.str(&serde_json::to_string(&self.config).expect("config serializes"));
        w.u64(self.seed);
        w.u64(self.frames);
        w.u64(self.episodes);
        w.blob(&self.agent);
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect(MAGIC)?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported run checkpoint version {version}")));
        }
        let config = serde_json::from_str(r.str()?)
            .map_err(|e| Error::Format(format!("run config: {e}")))?;
        let out = Self {
            config,
            seed: r.u64()?,
            frames: r.u64()?,
            episodes: r.u64()?,
            agent: r.blob()?.to_vec(),
        };
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after run checkpoint".into()));
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn restore_agent(&self) -> Result<Box<dyn Agent>> {
        load_agent(&self.agent)
    }
}

#[derive(Debug)]
pub struct TrainOutput {
    pub records: Vec<RunRecord>,
    pub summary: RunSummary,
    pub checkpoint: RunCheckpoint,
}

/// Written next to the last stable checkpoint when a run blows up.
#[derive(Clone, Debug, Serialize)]
pub struct AbortRecord {
    pub error: String,
    pub episode: u64,
    pub frames: u64,
    /// Episodes covered by the saved checkpoint.
    pub checkpoint_episodes: u64,
    pub checkpoint_frames: u64,
}

fn is_numeric(e: &Error) -> bool {
    matches!(e, Error::Numeric(_) | Error::Integration { .. })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Trains one agent under `config` and `seed`; see [`train_with`].
pub fn train(config: &RunConfig, seed: u64, out_dir: Option<&Path>) -> Result<TrainOutput> {
    train_with(config, seed, out_dir, |_| {})
}

/// Runs reset → act → step → observe → update until `frame_limit` frames
/// (or `episode_limit` episodes) are consumed. The last episode is cut at
/// the frame limit and recorded as [`Outcome::FrameLimit`].
///
/// With `out_dir`, writes `metrics.jsonl` as episodes finish, then
/// `checkpoint.bin` and `summary.json`. A numeric failure writes the last
/// stable checkpoint and `abort.json` and returns the numeric error.
pub fn train_with(
    config: &RunConfig,
    seed: u64,
    out_dir: Option<&Path>,
    mut on_episode: impl FnMut(&RunRecord),
) -> Result<TrainOutput> {
    config.validate()?;
    let spec = config.agent_spec()?;
    let mut env = AysEnv::new(config.env)?;
    let ctx = AgentContext::new(env.observation_width(), config.frame_limit, seed);
    let mut agent = build_agent(&spec, ctx)?;
    let mut rng = env_rng(seed);

    let mut writer = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Some(RecordWriter::create(&dir.join(METRICS_FILE))?)
        }
        None => None,
    };

    let started = Instant::now();
    let mut log = MetricsLog::new();
    let mut frames = 0u64;
    let checkpoint = |agent: &dyn Agent, frames: u64, episodes: u64| RunCheckpoint {
        config: config.clone(),
        seed,
        frames,
        episodes,
        agent: agent.save(),
    };
    let mut stable = checkpoint(agent.as_ref(), 0, 0);

    let episode_cap = config.episode_limit.unwrap_or(u64::MAX);
    while frames < config.frame_limit && (log.records().len() as u64) < episode_cap {
        let episode = log.records().len() as u64;
        match run_episode(&mut env, agent.as_mut(), &mut rng, &mut frames, config.frame_limit) {
            Ok((episode_return, length, outcome)) => {
                if !agent.is_finite() {
                    let e = Error::Numeric("agent parameters became non-finite".into());
                    return abort(out_dir, writer, &stable, e, episode, frames);
                }
                let record = log.push(RunRecord {
                    episode,
                    episode_return,
                    length,
                    outcome,
                    frames,
                    moving_average: 0.0,
                    success_rate: 0.0,
                    agent: agent.diagnostics(),
                    wall_time: started.elapsed().as_secs_f64(),
                });
                if let Some(w) = writer.as_mut() {
                    w.append(record)?;
                }
                on_episode(record);
                if (episode + 1).is_multiple_of(config.stable_interval) {
                    stable = checkpoint(agent.as_ref(), frames, episode + 1);
                }
            }
            Err(e) if is_numeric(&e) => return abort(out_dir, writer, &stable, e, episode, frames),
            Err(e) => return Err(e),
        }
    }

    let final_checkpoint = checkpoint(agent.as_ref(), frames, log.records().len() as u64);
    let summary = RunSummary::from_records(
        config.agent,
        config.preset,
        seed,
        log.records(),
        frames,
        started.elapsed().as_secs_f64(),
        false,
    );
    if let (Some(dir), Some(w)) = (out_dir, writer) {
        w.finish()?;
        final_checkpoint.save(&dir.join(CHECKPOINT_FILE))?;
        write_json(&dir.join(SUMMARY_FILE), &summary)?;
    }
    Ok(TrainOutput {
        records: log.into_records(),
        summary,
        checkpoint: final_checkpoint,
    })
}

fn run_episode(
    env: &mut AysEnv,
    agent: &mut dyn Agent,
    rng: &mut ChaCha8Rng,
    frames: &mut u64,
    frame_limit: u64,
) -> Result<(f64, u32, Outcome)> {
    let mut obs = env.reset(rng);
    let mut total = 0.0;
    let mut length = 0u32;
    loop {
        let action = agent.act(&obs)?;
        let step = env.step(Action::from_index(action)?)?;
        if !step.reward.is_finite() {
            return Err(Error::Numeric(format!("non-finite reward {}", step.reward)));
        }
        *frames += 1;
        length += 1;
        total += step.reward;
        agent.observe(&Transition {
            state: obs,
            action,
            reward: step.reward,
            next_state: step.observation.clone(),
            done: step.done,
        })?;
        agent.maybe_update(*frames)?;
        obs = step.observation;
        if let Some(outcome) = step.outcome {
            return Ok((total, length, outcome));
        }
        if *frames >= frame_limit {
            return Ok((total, length, Outcome::FrameLimit));
        }
    }
}

fn abort(
    out_dir: Option<&Path>,
    writer: Option<RecordWriter>,
    stable: &RunCheckpoint,
    error: Error,
    episode: u64,
    frames: u64,
) -> Result<TrainOutput> {
    if let Some(dir) = out_dir {
        if let Some(w) = writer {
            w.finish()?;
        }
        stable.save(&dir.join(CHECKPOINT_FILE))?;
        write_json(
            &dir.join(ABORT_FILE),
            &AbortRecord {
                error: error.to_string(),
                episode,
                frames,
                checkpoint_episodes: stable.episodes,
                checkpoint_frames: stable.frames,
            },
        )?;
    }
    Err(match error {
        Error::Numeric(m) => Error::Numeric(format!("run aborted at episode {episode}: {m}")),
        other => Error::Numeric(format!("run aborted at episode {episode}: {other}")),
    })
}

/// Trains every seed in `config.seeds`, each into `<out_dir>/seed_<n>` when
/// an output directory is given.
pub fn train_all(config: &RunConfig, out_dir: Option<&Path>) -> Result<Vec<TrainOutput>> {
    config
        .seeds
        .iter()
        .map(|&seed| {
            let dir: Option<PathBuf> = out_dir.map(|d| d.join(format!("seed_{seed}")));
            train(config, seed, dir.as_deref())
        })
        .collect()
}
