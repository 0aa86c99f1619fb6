use serde::{Deserialize, Serialize};

use super::network::{Gradients, MlpNetwork};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments for one network. The learning rate is set by the caller
/// before each step (see [`super::LrSchedule`]).
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub config: AdamConfig,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
}

impl AdamState {
    pub fn new(net: &MlpNetwork, learning_rate: f64, config: AdamConfig) -> Self {
        let zeros: Vec<Vec<f64>> = Gradients::zeros_like(net)
            .slices()
            .map(|s| s.to_vec())
            .collect();
        Self {
            learning_rate,
            config,
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// One bias-corrected Adam update of `net` along `-grads`.
    pub fn step(&mut self, net: &mut MlpNetwork, grads: &Gradients) -> Result<()> {
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Usage(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        net.check_gradients(grads)?;
        if self.first_moment.len() != grads.layers.len() * 2 {
            return Err(Error::Shape("optimizer state does not match network".into()));
        }
        if !grads.is_finite() {
            return Err(Error::Numeric("non-finite gradient passed to Adam".into()));
        }
        self.step_count += 1;
        let AdamConfig {
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        let lr = self.learning_rate;
        for (((param, grad), m), v) in net
            .param_slices_mut()
            .zip(grads.slices())
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            for i in 0..param.len() {
                let g = grad[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * g;
                v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                param[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.f64(self.learning_rate);
        w.f64(self.config.beta1);
        w.f64(self.config.beta2);
        w.f64(self.config.epsilon);
        w.u64(self.step_count);
        w.u64(self.first_moment.len() as u64);
        for (m, v) in self.first_moment.iter().zip(&self.second_moment) {
            w.f64s(m);
            w.f64s(v);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>, net: &MlpNetwork) -> Result<Self> {
        let learning_rate = r.f64()?;
        let config = AdamConfig {
            beta1: r.f64()?,
            beta2: r.f64()?,
            epsilon: r.f64()?,
        };
        let step_count = r.u64()?;
        let n = r.len()?;
        let mut first_moment = Vec::with_capacity(n);
        let mut second_moment = Vec::with_capacity(n);
        for _ in 0..n {
            first_moment.push(r.f64s()?);
            second_moment.push(r.f64s()?);
        }
        let expected: Vec<usize> = Gradients::zeros_like(net).slices().map(|s| s.len()).collect();
        let got: Vec<usize> = first_moment.iter().map(Vec::len).collect();
        if expected != got || second_moment.iter().map(Vec::len).ne(expected.iter().copied()) {
            return Err(Error::Format("optimizer moments do not match network".into()));
        }
        Ok(Self {
            learning_rate,
            config,
            first_moment,
            second_moment,
            step_count,
        })
    }
}
