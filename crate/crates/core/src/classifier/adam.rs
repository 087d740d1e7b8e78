use serde::{Deserialize, Serialize};

use super::model::ClassifierParams;
use crate::matrix::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: ClassifierParams<T>,
    pub v: ClassifierParams<T>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &ClassifierParams<T>) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<T: Real>(
    params: &mut ClassifierParams<T>,
    grads: &ClassifierParams<T>,
    state: &mut AdamState<T>,
    lr: f64,
    cfg: &AdamConfig,
) {
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let c = |x: f64| T::from(x).unwrap();
    let (b1, b2, eps) = (c(cfg.beta1), c(cfg.beta2), c(cfg.eps));
    let (step, bc1, bc2) = (c(lr), c(bc1), c(bc2));

    let p_mats = params.matrices_mut();
    let g_mats = grads.matrices();
    let m_mats = state.m.matrices_mut();
    let v_mats = state.v.matrices_mut();
    for (((p, g), m), v) in p_mats.into_iter().zip(g_mats).zip(m_mats).zip(v_mats) {
        let cells = p
            .as_mut_slice()
            .iter_mut()
            .zip(g.as_slice())
            .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice().iter_mut()));
        for ((p, &g), (m, v)) in cells {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p = *p - step * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
