//! AYS right-hand side and the fixed-step RK4 integrator.

use super::params::{effective_params, Action, AysParams};
use super::state::{denormalize, normalize, NormState, RawState};
use crate::error::{Error, Result};

/// RK4 substeps per one-year action interval.
pub const DEFAULT_SUBSTEPS: u32 = 10;

/// Fossil share of energy, `Γ = 1 / (1 + (S/σ)^ρ)`.
pub fn fossil_share(s: f64, params: &AysParams) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    1.0 / (1.0 + (s / params.sigma).powf(params.rho))
}

/// `(dA/dt, dY/dt, dS/dt)` in physical units.
pub fn derivatives(raw: RawState, params: &AysParams) -> [f64; 3] {
    let RawState { a, y, s } = raw;
    let gamma = fossil_share(s, params);
    let demand = y / params.eps_energy;
    let emissions = gamma * demand / params.phi;
    let renewables = (1.0 - gamma) * demand;
    [
        emissions - a / params.tau_a,
        params.beta * y - params.theta * a * y,
        renewables - s / params.tau_s,
    ]
}

/// The undesirable equilibrium `(β/θ, φβε/(θτ_A), 0)`.
pub fn black_fixed_point(params: &AysParams) -> RawState {
    RawState {
        a: params.beta / params.theta,
        y: params.phi * params.beta * params.eps_energy / (params.theta * params.tau_a),
        s: 0.0,
    }
}

/// One classical Runge-Kutta step of size `h` for an autonomous system.
pub fn rk4_step<const N: usize, F>(y: &[f64; N], h: f64, f: &F) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let shift = |base: &[f64; N], k: &[f64; N], c: f64| -> [f64; N] {
        std::array::from_fn(|i| base[i] + c * k[i])
    };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, h / 2.0));
    let k3 = f(&shift(y, &k2, h / 2.0));
    let k4 = f(&shift(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates over `duration` with `substeps` equal RK4 steps.
pub fn integrate<const N: usize, F>(y0: [f64; N], duration: f64, substeps: u32, f: F) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let h = duration / substeps as f64;
    (0..substeps).fold(y0, |y, _| rk4_step(&y, h, &f))
}

/// Advances the raw-space ODE by one year under `action` with
/// [`DEFAULT_SUBSTEPS`] RK4 substeps.
pub fn integrate_step(norm: NormState, action: Action, params: &AysParams) -> Result<NormState> {
    integrate_step_with(norm, action, params, DEFAULT_SUBSTEPS)
}

pub fn integrate_step_with(
    norm: NormState,
    action: Action,
    params: &AysParams,
    substeps: u32,
) -> Result<NormState> {
    let raw = integrate_raw(denormalize(norm)?, action, params, substeps)?;
    Ok(normalize(raw))
}

pub fn integrate_raw(
    raw: RawState,
    action: Action,
    params: &AysParams,
    substeps: u32,
) -> Result<RawState> {
    let p = effective_params(params, action);
    let end = integrate(raw.to_array(), 1.0, substeps, |x| {
        derivatives(RawState::from_array(*x), &p)
    });
    if end.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Integration {
            time: 1.0,
            detail: format!("start {raw:?}, action {action:?}, params {p:?} -> {end:?}"),
        });
    }
    Ok(RawState::from_array(end))
}

/// Lorenz system parameters; used to exercise the integrator on a stiff,
/// chaotic flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorenz {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for Lorenz {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

impl Lorenz {
    pub fn rhs(&self, v: &[f64; 3]) -> [f64; 3] {
        let [x, y, z] = *v;
        [
            self.sigma * (y - x),
            x * (self.rho - z) - y,
            x * y - self.beta * z,
        ]
    }
}
