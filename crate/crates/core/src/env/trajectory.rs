use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::params::Action;
use super::state::NormState;
use super::termination::Outcome;
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: &str = "t,a,y,s,action,reward,outcome";

/// One row of an exported trajectory. Row 0 is the start state and has no
/// action or reward.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: u32,
    pub state: NormState,
    pub action: Option<Action>,
    pub reward: Option<f64>,
    pub outcome: Option<Outcome>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn start(state: NormState) -> Self {
        Self {
            rows: vec![TrajectoryRow {
                t: 0,
                state,
                action: None,
                reward: None,
                outcome: None,
            }],
        }
    }

    pub fn record(&mut self, action: Action, next: NormState, reward: f64, outcome: Option<Outcome>) {
        let t = self.rows.len() as u32;
        self.rows.push(TrajectoryRow {
            t,
            state: next,
            action: Some(action),
            reward: Some(reward),
            outcome,
        });
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.rows.last().and_then(|r| r.outcome)
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.rows.iter().filter_map(|r| r.action)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRAJECTORY_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.t,
                format_sig(r.state.a),
                format_sig(r.state.y),
                format_sig(r.state.s),
                r.action.map_or("", Action::name),
                r.reward.map(format_sig).unwrap_or_default(),
                r.outcome.map_or("", Outcome::name),
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `%.12g`: twelve significant digits, trailing zeros trimmed.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
