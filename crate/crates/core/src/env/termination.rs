use serde::{Deserialize, Serialize};

use super::dynamics::black_fixed_point;
use super::params::AysParams;
use super::state::{normalize, NormState, REFERENCE_STATE};

/// How an episode ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GreenFixedPoint,
    BlackFixedPoint,
    CarbonBoundary,
    EconomicBoundary,
    FrameLimit,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::GreenFixedPoint,
        Outcome::BlackFixedPoint,
        Outcome::CarbonBoundary,
        Outcome::EconomicBoundary,
        Outcome::FrameLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::GreenFixedPoint => "green_fixed_point",
            Outcome::BlackFixedPoint => "black_fixed_point",
            Outcome::CarbonBoundary => "carbon_boundary",
            Outcome::EconomicBoundary => "economic_boundary",
            Outcome::FrameLimit => "frame_limit",
        }
    }

    /// Fixed-point outcomes earn the discounted-future bonus.
    pub fn is_fixed_point(self) -> bool {
        matches!(self, Outcome::GreenFixedPoint | Outcome::BlackFixedPoint)
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, Outcome::CarbonBoundary | Outcome::EconomicBoundary)
    }
}

/// Planetary boundaries and fixed-point vicinities in normalized coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    /// Carbon planetary boundary; crossing means `a > a_pb`.
    pub a_pb: f64,
    /// Social foundation; crossing means `y < y_sf`.
    pub y_sf: f64,
    pub green: NormState,
    pub black: NormState,
    /// L∞ radius of the fixed-point vicinities.
    pub tolerance: f64,
}

pub const A_PB_RAW: f64 = 345.0;
pub const Y_SF_RAW: f64 = 4e13;
pub const DEFAULT_TOLERANCE: f64 = 0.01;

impl Boundaries {
    pub fn new(params: &AysParams, tolerance: f64) -> Self {
        let r = REFERENCE_STATE;
        Self {
            a_pb: A_PB_RAW / (A_PB_RAW + r.a),
            y_sf: Y_SF_RAW / (Y_SF_RAW + r.y),
            green: NormState {
                a: 0.0,
                y: 1.0,
                s: 1.0,
            },
            black: normalize(black_fixed_point(params)),
            tolerance,
        }
    }

    /// Boundaries are checked before vicinities, so a state inside the Black
    /// box but past the carbon boundary counts as a boundary crossing.
    pub fn check(&self, s: NormState) -> Option<Outcome> {
        if s.a > self.a_pb {
            Some(Outcome::CarbonBoundary)
        } else if s.y < self.y_sf {
            Some(Outcome::EconomicBoundary)
        } else if linf(s, self.green) <= self.tolerance {
            Some(Outcome::GreenFixedPoint)
        } else if linf(s, self.black) <= self.tolerance {
            Some(Outcome::BlackFixedPoint)
        } else {
            None
        }
    }
}

impl Default for Boundaries {
    fn default() -> Self {
        Self::new(&AysParams::default(), DEFAULT_TOLERANCE)
    }
}

fn linf(p: NormState, q: NormState) -> f64 {
    (p.a - q.a).abs().max((p.y - q.y).abs()).max((p.s - q.s).abs())
}
