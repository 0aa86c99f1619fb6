use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::Agent;
use crate::env::{format_sig, Action, AysEnv, EnvConfig, NormState, Outcome};
use crate::error::{Error, Result};

/// Square of initial states `(a, y, s)` with `s` held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a_range: (f64, f64),
    pub y_range: (f64, f64),
    pub s: f64,
    /// Points per axis, ends included. A single point sits at the centre.
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::with_resolution(21)
    }
}

impl GridSpec {
    /// The initialization square `[0.45, 0.55]² × {0.5}`.
    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            a_range: (0.45, 0.55),
            y_range: (0.45, 0.55),
            s: 0.5,
            resolution,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v.is_finite() && (0.0..1.0).contains(&v);
        let range = |(lo, hi): (f64, f64)| unit(lo) && unit(hi) && lo <= hi;
        if self.resolution == 0 || !range(self.a_range) || !range(self.y_range) || !unit(self.s) {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn a_values(&self) -> Vec<f64> {
        linspace(self.a_range, self.resolution)
    }

    pub fn y_values(&self) -> Vec<f64> {
        linspace(self.y_range, self.resolution)
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// `max_a Q(s, a)` or the critic's `v(s)`.
    Value,
    FirstAction,
    /// Outcome of a full rollout.
    EndState,
}

impl GridMode {
    pub fn name(self) -> &'static str {
        match self {
            GridMode::Value => "value",
            GridMode::FirstAction => "first_action",
            GridMode::EndState => "end_state",
        }
    }
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "value" => Ok(GridMode::Value),
            "first_action" => Ok(GridMode::FirstAction),
            "end_state" => Ok(GridMode::EndState),
            _ => Err(Error::Config(format!(
                "unknown grid mode `{s}` (expected value, first-action or end-state)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridCell {
    Value(f64),
    Action(Action),
    Outcome(Outcome),
}

impl GridCell {
    fn render(&self) -> String {
        match self {
            GridCell::Value(v) => format_sig(*v),
            GridCell::Action(a) => a.name().to_string(),
            GridCell::Outcome(o) => o.name().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub mode: GridMode,
    pub a_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// `cells[j][i]` is the cell at `(a_values[i], y_values[j])`.
    pub cells: Vec<Vec<GridCell>>,
}

impl GridResult {
    /// One row per `y`; the header row carries the `a` values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y\\a");
        for a in &self.a_values {
            out.push(',');
            out.push_str(&format_sig(*a));
        }
        out.push('\n');
        for (y, row) in self.y_values.iter().zip(&self.cells) {
            out.push_str(&format_sig(*y));
            for c in row {
                out.push(',');
                out.push_str(&c.render());
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn file_name(&self) -> String {
        format!("grid_{}.csv", self.mode.name())
    }
}

/// Evaluates the agent at every grid point. Rollouts for `EndState` use the
/// base model parameters and act with `greedy`.
pub fn grid_sweep(
    agent: &mut dyn Agent,
    env: &EnvConfig,
    grid: &GridSpec,
    mode: GridMode,
    greedy: bool,
) -> Result<GridResult> {
    grid.validate()?;
    if agent.context().observation_width != env.observation_width() {
        return Err(Error::Config(format!(
            "agent expects {}-wide observations but the environment produces {}",
            agent.context().observation_width,
            env.observation_width()
        )));
    }
    let mut sim = AysEnv::new(*env)?;
    let a_values = grid.a_values();
    let y_values = grid.y_values();
    let mut cells = Vec::with_capacity(y_values.len());
    for &y in &y_values {
        let mut row = Vec::with_capacity(a_values.len());
        for &a in &a_values {
            let obs = sim.reset_to(NormState { a, y, s: grid.s })?;
            let cell = match mode {
                GridMode::Value => GridCell::Value(agent.state_value(&obs)?),
                GridMode::FirstAction => {
                    GridCell::Action(Action::from_index(agent.act_eval(&obs, greedy)?)?)
                }
                GridMode::EndState => GridCell::Outcome(rollout(&mut sim, agent, obs, greedy)?),
            };
            row.push(cell);
        }
        cells.push(row);
    }
    Ok(GridResult {
        mode,
        a_values,
        y_values,
        cells,
    })
}

fn rollout(sim: &mut AysEnv, agent: &mut dyn Agent, mut obs: Vec<f64>, greedy: bool) -> Result<Outcome> {
    loop {
        let step = sim.step(Action::from_index(agent.act_eval(&obs, greedy)?)?)?;
        if let Some(o) = step.outcome {
            return Ok(o);
        }
        obs = step.observation;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        let g = GridSpec::with_resolution(3);
        assert_eq!(g.a_values(), vec![0.45, 0.5, 0.55]);
        assert_eq!(GridSpec::with_resolution(1).y_values(), vec![0.5]);
        assert!(GridSpec::with_resolution(0).validate().is_err());
    }

    #[test]
    fn modes_parse() {
        assert_eq!("first-action".parse::<GridMode>().unwrap(), GridMode::FirstAction);
        assert_eq!("end_state".parse::<GridMode>().unwrap(), GridMode::EndState);
        assert!("corner".parse::<GridMode>().is_err());
    }

    #[test]
    fn csv_layout() {
        let r = GridResult {
            mode: GridMode::FirstAction,
            a_values: vec![0.45, 0.55],
            y_values: vec![0.5],
            cells: vec![vec![GridCell::Action(Action::Et), GridCell::Action(Action::Default)]],
        };
        assert_eq!(r.to_csv(), "y\\a,0.45,0.55\n0.5,et,default\n");
        assert_eq!(r.file_name(), "grid_first_action.csv");
    }
}
