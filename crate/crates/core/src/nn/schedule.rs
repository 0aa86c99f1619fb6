use serde::{Deserialize, Serialize};

/// Step decay: the rate is multiplied by `decay_factor` at `decay_number`
/// evenly spaced frames, the last one landing on `total_frames`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub initial_rate: f64,
    pub decay_factor: f64,
    pub decay_number: u32,
    pub total_frames: u64,
}

impl LrSchedule {
    pub fn new(initial_rate: f64, decay_number: u32, total_frames: u64) -> Self {
        Self {
            initial_rate,
            decay_factor: 0.5,
            decay_number,
            total_frames: total_frames.max(1),
        }
    }

    /// Number of decays applied by `frame`, capped at `decay_number`.
    pub fn decays_completed(&self, frame: u64) -> u32 {
        if self.decay_number == 0 {
            return 0;
        }
        let k = (frame as u128 * self.decay_number as u128) / self.total_frames as u128;
        k.min(self.decay_number as u128) as u32
    }

    pub fn rate_at(&self, frame: u64) -> f64 {
        self.initial_rate * self.decay_factor.powi(self.decays_completed(frame) as i32)
    }
}
