use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_observation, read_rng, write_header, write_rng};
use super::{Agent, AgentContext, AgentDiagnostics, AgentSpec, UpdateStats};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::replay::Transition;

/// Uniformly random actions.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    ctx: AgentContext,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(ctx: AgentContext) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(ctx.seed),
            ctx,
        }
    }

    pub(crate) fn read_body(r: &mut Reader<'_>, ctx: AgentContext) -> Result<Self> {
        Ok(Self {
            ctx,
            rng: read_rng(r)?,
        })
    }
}

impl Agent for RandomAgent {
    fn spec(&self) -> AgentSpec {
        AgentSpec::Random
    }

    fn context(&self) -> AgentContext {
        self.ctx
    }

    fn act(&mut self, observation: &[f64]) -> Result<usize> {
        check_observation(observation, &self.ctx)?;
        Ok(self.rng.random_range(0..self.ctx.num_actions))
    }

    fn act_eval(&mut self, observation: &[f64], _greedy: bool) -> Result<usize> {
        self.act(observation)
    }

    fn observe(&mut self, _transition: &Transition) -> Result<()> {
        Ok(())
    }

    fn maybe_update(&mut self, _frame: u64) -> Result<Option<UpdateStats>> {
        Ok(None)
    }

    fn state_value(&self, _observation: &[f64]) -> Result<f64> {
        Err(Error::Usage("the random agent has no value estimate".into()))
    }

    fn diagnostics(&self) -> AgentDiagnostics {
        AgentDiagnostics::default()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn save(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_header(&mut w, &AgentSpec::Random, &self.ctx);
        write_rng(&mut w, &self.rng);
        w.into_inner()
    }
}
