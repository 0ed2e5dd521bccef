use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BETA: f64 = 0.1;

/// Sequence log-probabilities of the chosen (`w`) and rejected (`l`) samples
/// under the trained policy and the frozen reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoInputs {
    pub logp_policy_w: f64,
    pub logp_ref_w: f64,
    pub logp_policy_l: f64,
    pub logp_ref_l: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpoOutput {
    pub loss: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DpoError {
    #[error("non-finite input")]
    NonFinite,
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
}

/// `ln(1 + e^x)` without overflow for large `|x|`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn dpo_loss(inp: &DpoInputs) -> Result<DpoOutput, DpoError> {
    let vals = [inp.logp_policy_w, inp.logp_ref_w, inp.logp_policy_l, inp.logp_ref_l, inp.beta];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(DpoError::NonFinite);
    }
    if inp.beta <= 0.0 {
        return Err(DpoError::NonPositiveBeta(inp.beta));
    }
    let margin = (inp.logp_policy_w - inp.logp_ref_w) - (inp.logp_policy_l - inp.logp_ref_l);
    Ok(DpoOutput { loss: dpo_loss_from_margin(inp.beta, margin), margin })
}

/// `-ln σ(β·m)`.
pub fn dpo_loss_from_margin(beta: f64, margin: f64) -> f64 {
    softplus(-beta * margin)
}

/// Derivative of the loss with respect to the margin.
pub fn dpo_loss_grad(beta: f64, margin: f64) -> f64 {
    -beta * sigmoid(-beta * margin)
}
