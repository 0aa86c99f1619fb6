use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::params::AysParams;
use crate::error::{Error, Result};

/// Episode-indexed growth of the noise variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSchedule {
    pub start: f64,
    pub multiplier: f64,
    /// Episodes between multiplications.
    pub period: u64,
    pub cap: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            start: 1e-5,
            multiplier: 10.0,
            period: 500,
            cap: 1.0,
        }
    }
}

/// Multiplicative Gaussian noise on the model parameters, redrawn per episode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Variance used when there is no schedule.
    pub variance: f64,
    pub clip_low: f64,
    pub clip_high: f64,
    pub schedule: Option<NoiseSchedule>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl NoiseSpec {
    pub fn constant(variance: f64) -> Self {
        Self {
            variance,
            clip_low: 0.5,
            clip_high: 1.5,
            schedule: None,
        }
    }

    pub fn scheduled(schedule: NoiseSchedule) -> Self {
        Self {
            schedule: Some(schedule),
            ..Self::constant(schedule.start)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.variance >= 0.0
            && self.variance.is_finite()
            && self.clip_low <= self.clip_high
            && self.clip_low > 0.0
            && self.schedule.is_none_or(|s| {
                s.start >= 0.0 && s.multiplier >= 1.0 && s.period > 0 && s.cap >= 0.0
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid noise spec {self:?}")))
        }
    }

    pub fn variance_at(&self, episode: u64) -> f64 {
        match self.schedule {
            None => self.variance,
            Some(s) => {
                let steps = (episode / s.period).min(i32::MAX as u64) as i32;
                (s.start * s.multiplier.powi(steps)).min(s.cap)
            }
        }
    }

    /// Draws one multiplier per parameter. No random numbers are consumed at
    /// zero variance.
    pub fn sample_episode<R: Rng + ?Sized>(
        &self,
        base: &AysParams,
        episode: u64,
        rng: &mut R,
    ) -> AysParams {
        let variance = self.variance_at(episode);
        if variance <= 0.0 {
            return *base;
        }
        let normal = Normal::new(1.0, variance.sqrt()).expect("finite positive std");
        let mut p = base.to_array();
        for v in &mut p {
            *v *= normal.sample(rng).clamp(self.clip_low, self.clip_high);
        }
        AysParams::from_array(p)
    }
}
