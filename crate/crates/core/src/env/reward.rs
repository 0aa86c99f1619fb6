use serde::{Deserialize, Serialize};

use super::params::Action;
use super::state::NormState;
use super::termination::Outcome;

/// Normalized target point of the PB reward.
pub const PB_TARGET: NormState = NormState {
    a: 0.59,
    y: 0.37,
    s: 0.0,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardScheme {
    /// Distance from the planetary-boundary corner.
    Pb,
    /// PB scaled down for every management action taken.
    PolicyCost,
    /// +1 at the Green fixed point, -1 on a boundary crossing.
    Simple,
}

/// Whether the PB reward is the distance or its square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbMetric {
    #[default]
    Norm,
    Squared,
}

impl RewardScheme {
    pub fn name(self) -> &'static str {
        match self {
            RewardScheme::Pb => "pb",
            RewardScheme::PolicyCost => "policy_cost",
            RewardScheme::Simple => "simple",
        }
    }
}

pub fn policy_cost_multiplier(action: Action) -> f64 {
    match action {
        Action::Default => 1.0,
        Action::Dg | Action::Et => 0.5,
        Action::DgEt => 0.25,
    }
}

pub fn pb_reward(next: NormState, metric: PbMetric) -> f64 {
    let d2 = (next.a - PB_TARGET.a).powi(2)
        + (next.y - PB_TARGET.y).powi(2)
        + (next.s - PB_TARGET.s).powi(2);
    match metric {
        PbMetric::Norm => d2.sqrt(),
        PbMetric::Squared => d2,
    }
}

/// Step reward for the transition into `next`. Fixed-point terminations of
/// the distance-based schemes add `r·γ/(1−γ)` for the episode's cut-off tail.
pub fn reward(
    action: Action,
    next: NormState,
    scheme: RewardScheme,
    metric: PbMetric,
    terminal: Option<Outcome>,
    gamma: f64,
) -> f64 {
    let base = match scheme {
        RewardScheme::Pb => pb_reward(next, metric),
        RewardScheme::PolicyCost => pb_reward(next, metric) * policy_cost_multiplier(action),
        RewardScheme::Simple => {
            return match terminal {
                Some(Outcome::GreenFixedPoint) => 1.0,
                Some(o) if o.is_boundary() => -1.0,
                _ => 0.0,
            }
        }
    };
    match terminal {
        Some(o) if o.is_fixed_point() => base + base * gamma / (1.0 - gamma),
        _ => base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pb_at_start() {
        let r = pb_reward(NormState::START, PbMetric::Norm);
        let oracle = (0.09f64 * 0.09 + 0.13 * 0.13 + 0.25).sqrt();
        assert!((r - oracle).abs() < 1e-15);
        assert!((r - 0.524).abs() < 1e-3);
        assert!((pb_reward(NormState::START, PbMetric::Squared) - oracle * oracle).abs() < 1e-15);
    }

    #[test]
    fn policy_cost_scales_pb() {
        let s = NormState::START;
        let pb = reward(Action::Default, s, RewardScheme::Pb, PbMetric::Norm, None, 0.99);
        for a in Action::ALL {
            let pc = reward(a, s, RewardScheme::PolicyCost, PbMetric::Norm, None, 0.99);
            assert_eq!(pc, pb * policy_cost_multiplier(a));
        }
        let dget = reward(Action::DgEt, s, RewardScheme::PolicyCost, PbMetric::Norm, None, 0.99);
        assert_eq!(dget, 0.25 * pb);
    }

    #[test]
    fn simple_scheme() {
        let s = NormState::START;
        let r = |t| reward(Action::Default, s, RewardScheme::Simple, PbMetric::Norm, t, 0.99);
        assert_eq!(r(None), 0.0);
        assert_eq!(r(Some(Outcome::GreenFixedPoint)), 1.0);
        assert_eq!(r(Some(Outcome::CarbonBoundary)), -1.0);
        assert_eq!(r(Some(Outcome::EconomicBoundary)), -1.0);
        assert_eq!(r(Some(Outcome::BlackFixedPoint)), 0.0);
        assert_eq!(r(Some(Outcome::FrameLimit)), 0.0);
    }

    #[test]
    fn fixed_point_bonus_is_geometric_tail() {
        let s = NormState { a: 0.0, y: 1.0, s: 1.0 };
        let plain = pb_reward(s, PbMetric::Norm);
        let green = reward(
            Action::Default,
            s,
            RewardScheme::Pb,
            PbMetric::Norm,
            Some(Outcome::GreenFixedPoint),
            0.99,
        );
        assert!((green - plain * 100.0).abs() < 1e-9);
        let limit = reward(
            Action::Default,
            s,
            RewardScheme::Pb,
            PbMetric::Norm,
            Some(Outcome::FrameLimit),
            0.99,
        );
        assert_eq!(limit, plain);
    }
}
