use serde::{Deserialize, Serialize};

use super::params::Parameterized;
use crate::error::{Error, Result};

pub trait Optimizer {
    /// Applies one update. A non-finite gradient aborts the step before any
    /// parameter is touched.
    fn step<P: Parameterized>(&mut self, params: &mut P, grads: &P) -> Result<()>;
}

fn check_finite<P: Parameterized>(grads: &P) -> Result<()> {
    for (name, m) in grads.blocks() {
        if !m.is_finite() {
            return Err(Error::NonFinite(format!("gradient of {name}")));
        }
    }
    Ok(())
}

fn ensure_state<P: Parameterized>(state: &mut Vec<Vec<f64>>, params: &P) {
    if state.is_empty() {
        *state = params
            .blocks()
            .iter()
            .map(|(_, m)| vec![0.0; m.data.len()])
            .collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Adam {
            config,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

impl Optimizer for Adam {
    fn step<P: Parameterized>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        check_finite(grads)?;
        ensure_state(&mut self.m, params);
        ensure_state(&mut self.v, params);
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        let grads = grads.blocks();
        for (b, (_, p)) in params.blocks_mut().into_iter().enumerate() {
            let g = &grads[b].1.data;
            let (m, v) = (&mut self.m[b], &mut self.v[b]);
            for k in 0..g.len() {
                m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                p.data[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig {
            lr: 1e-3,
            rho: 0.9,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    sq: Vec<Vec<f64>>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig) -> Self {
        RmsProp {
            config,
            sq: Vec::new(),
        }
    }
}

impl Optimizer for RmsProp {
    fn step<P: Parameterized>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        check_finite(grads)?;
        ensure_state(&mut self.sq, params);
        let RmsPropConfig { lr, rho, eps } = self.config;
        let grads = grads.blocks();
        for (b, (_, p)) in params.blocks_mut().into_iter().enumerate() {
            let g = &grads[b].1.data;
            let s = &mut self.sq[b];
            for k in 0..g.len() {
                s[k] = rho * s[k] + (1.0 - rho) * g[k] * g[k];
                p.data[k] -= lr * g[k] / (s[k].sqrt() + eps);
            }
        }
        Ok(())
    }
}
