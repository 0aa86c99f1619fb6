use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight AYS model parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AysParams {
    /// Carbon decay time out of the atmosphere, years.
    pub tau_a: f64,
    /// Decay time of renewable knowledge, years.
    pub tau_s: f64,
    /// Economic growth rate, 1/yr.
    pub beta: f64,
    /// Break-even knowledge, GJ.
    pub sigma: f64,
    /// Fossil combustion efficiency, GJ/GtC.
    pub phi: f64,
    /// Energy efficiency, $/GJ.
    pub eps_energy: f64,
    /// Temperature sensitivity.
    pub theta: f64,
    /// Renewable knowledge learning exponent.
    pub rho: f64,
}

impl Default for AysParams {
    fn default() -> Self {
        Self {
            tau_a: 50.0,
            tau_s: 50.0,
            beta: 0.03,
            sigma: 4e12,
            phi: 4.7e10,
            eps_energy: 147.0,
            theta: 8.57e-5,
            rho: 2.0,
        }
    }
}

impl AysParams {
    pub const COUNT: usize = 8;

    pub fn to_array(self) -> [f64; Self::COUNT] {
        [
            self.tau_a,
            self.tau_s,
            self.beta,
            self.sigma,
            self.phi,
            self.eps_energy,
            self.theta,
            self.rho,
        ]
    }

    pub fn from_array(v: [f64; Self::COUNT]) -> Self {
        Self {
            tau_a: v[0],
            tau_s: v[1],
            beta: v[2],
            sigma: v[3],
            phi: v[4],
            eps_energy: v[5],
            theta: v[6],
            rho: v[7],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|p| p.is_finite() && *p > 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "AYS parameters must be finite and positive: {self:?}"
            )))
        }
    }
}

/// The four management options.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Default,
    /// DeGrowth: halves economic growth.
    Dg,
    /// Energy transition: break-even knowledge scaled by 1/sqrt(2).
    Et,
    DgEt,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Default, Action::Dg, Action::Et, Action::DgEt];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Usage(format!("action index {i} out of range 0..4")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Default => "default",
            Action::Dg => "dg",
            Action::Et => "et",
            Action::DgEt => "dg_et",
        }
    }

    fn degrowth(self) -> bool {
        matches!(self, Action::Dg | Action::DgEt)
    }

    fn energy_transition(self) -> bool {
        matches!(self, Action::Et | Action::DgEt)
    }
}

/// Parameters in force while `action` is applied.
pub fn effective_params(base: &AysParams, action: Action) -> AysParams {
    let mut p = *base;
    if action.degrowth() {
        p.beta *= 0.5;
    }
    if action.energy_transition() {
        p.sigma *= std::f64::consts::FRAC_1_SQRT_2;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn action_overlays() {
        let base = AysParams::default();
        assert_eq!(effective_params(&base, Action::Default), base);
        assert_eq!(effective_params(&base, Action::Dg).beta, 0.015);
        let et = effective_params(&base, Action::Et);
        assert!((et.sigma - 4e12 / 2f64.sqrt()).abs() < 1e-3);
        assert_eq!(et.beta, base.beta);
        let both = effective_params(&base, Action::DgEt);
        assert_eq!(both.beta, 0.015);
        assert_eq!(both.sigma, et.sigma);
    }

    #[test]
    fn index_round_trip() {
        for a in Action::ALL {
            assert_eq!(Action::from_index(a.index()).unwrap(), a);
        }
        assert!(Action::from_index(4).is_err());
    }
}
