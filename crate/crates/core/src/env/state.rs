use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AYS state in physical units: GtC, $/yr, GJ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawState {
    pub a: f64,
    pub y: f64,
    pub s: f64,
}

/// AYS state mapped into `[0, 1)` by `x / (x + x0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormState {
    pub a: f64,
    pub y: f64,
    pub s: f64,
}

/// Normalized position plus accumulated normalized velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovState {
    pub position: NormState,
    pub velocity: [f64; 3],
}

/// Reference point of the normalization; also the nominal present-day state.
pub const REFERENCE_STATE: RawState = RawState {
    a: 240.0,
    y: 7e13,
    s: 5e11,
};

impl RawState {
    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.y, self.s]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self {
            a: v[0],
            y: v[1],
            s: v[2],
        }
    }
}

impl NormState {
    pub const START: NormState = NormState {
        a: 0.5,
        y: 0.5,
        s: 0.5,
    };

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.y, self.s]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self {
            a: v[0],
            y: v[1],
            s: v[2],
        }
    }
}

impl MarkovState {
    pub fn at_rest(position: NormState) -> Self {
        Self {
            position,
            velocity: [0.0; 3],
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        let [a, y, s] = self.position.to_array();
        let [da, dy, ds] = self.velocity;
        [a, y, s, da, dy, ds]
    }
}

pub fn normalize(raw: RawState) -> NormState {
    let r = REFERENCE_STATE;
    NormState {
        a: raw.a / (raw.a + r.a),
        y: raw.y / (raw.y + r.y),
        s: raw.s / (raw.s + r.s),
    }
}

pub fn denormalize(norm: NormState) -> Result<RawState> {
    let r = REFERENCE_STATE;
    let back = |x: f64, x0: f64, name: &str| {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "normalized {name} = {x} is outside [0, 1)"
            )));
        }
        Ok(x * x0 / (1.0 - x))
    };
    Ok(RawState {
        a: back(norm.a, r.a, "a")?,
        y: back(norm.y, r.y, "y")?,
        s: back(norm.s, r.s, "s")?,
    })
}

/// Chain rule through the normalization: `d(x̄)/dt = x0 / (x + x0)^2 · dx/dt`.
pub fn normalized_rate(raw: RawState, raw_rate: [f64; 3]) -> [f64; 3] {
    let r = REFERENCE_STATE.to_array();
    let x = raw.to_array();
    std::array::from_fn(|i| r[i] / (x[i] + r[i]).powi(2) * raw_rate[i])
}
