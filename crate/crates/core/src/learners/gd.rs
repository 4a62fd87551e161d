//! Full-batch gradient descent with optional L1 or L2 penalties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consecutive objective increases that count as divergence.
pub const DIVERGENCE_STREAK: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GDConfig {
    pub step_size: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    pub l1: f64,
    pub l2: f64,
    /// Seeds the small random jitter of the initial weights.
    pub seed: u64,
}

impl Default for GDConfig {
    fn default() -> Self {
        Self {
            step_size: 0.1,
            max_iters: 2000,
            tolerance: 1e-6,
            l1: 0.0,
            l2: 0.0,
            seed: 0,
        }
    }
}

impl GDConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step_size must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if !(self.l1 >= 0.0 && self.l2 >= 0.0) {
            return bad("penalties must be non-negative");
        }
        if self.l1 > 0.0 && self.l2 > 0.0 {
            return bad("choose either an l1 (lasso) or an l2 (ridge) penalty, not both");
        }
        Ok(())
    }
}

/// A differentiable data term. Penalties are added by [`gradient_descent`].
pub trait Objective {
    fn value(&self, w: &[f64]) -> f64;
    fn gradient(&self, w: &[f64]) -> Vec<f64>;
    /// Coordinates excluded from the penalty, such as an intercept.
    fn is_penalized(&self, _index: usize) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdOutcome {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

/// Data term plus `λ₁Σ|w| + λ₂Σw²` over penalized coordinates.
pub fn penalized_value(obj: &dyn Objective, w: &[f64], cfg: &GDConfig) -> f64 {
    let penalty: f64 = w
        .iter()
        .enumerate()
        .filter(|(i, _)| obj.is_penalized(*i))
        .map(|(_, v)| cfg.l1 * v.abs() + cfg.l2 * v * v)
        .sum();
    obj.value(w) + penalty
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Minimizes the penalized objective from `init`.
///
/// Stops when the smallest-norm subgradient falls below `tolerance` or after
/// `max_iters` updates. The L1 step is clipped at zero, so a weight that
/// would cross zero lands on it.
pub fn gradient_descent(obj: &dyn Objective, init: Vec<f64>, cfg: &GDConfig) -> Result<GdOutcome> {
    cfg.validate()?;
    let mut w = init;
    let mut prev = penalized_value(obj, &w, cfg);
    let mut streak = 0;
    for it in 0..cfg.max_iters {
        let mut g = obj.gradient(&w);
        let mut norm_sq = 0.0;
        for (i, gi) in g.iter_mut().enumerate() {
            if !obj.is_penalized(i) {
                norm_sq += *gi * *gi;
                continue;
            }
            *gi += 2.0 * cfg.l2 * w[i];
            let sub = if w[i] != 0.0 {
                *gi + cfg.l1 * sign(w[i])
            } else {
                sign(*gi) * (gi.abs() - cfg.l1).max(0.0)
            };
            norm_sq += sub * sub;
        }
        if norm_sq.sqrt() < cfg.tolerance {
            return Ok(GdOutcome {
                weights: w,
                iterations: it,
                converged: true,
                objective: prev,
            });
        }
        for (i, wi) in w.iter_mut().enumerate() {
            let stepped = *wi - cfg.step_size * g[i];
            *wi = if cfg.l1 > 0.0 && obj.is_penalized(i) {
                let shrink = cfg.step_size * cfg.l1;
                sign(stepped) * (stepped.abs() - shrink).max(0.0)
            } else {
                stepped
            };
        }
        let value = penalized_value(obj, &w, cfg);
        if !value.is_finite() {
            return Err(Error::Diverged {
                iterations: it + 1,
                streak,
            });
        }
        streak = if value > prev { streak + 1 } else { 0 };
        if streak >= DIVERGENCE_STREAK {
            return Err(Error::Diverged {
                iterations: it + 1,
                streak,
            });
        }
        prev = value;
    }
    Ok(GdOutcome {
        weights: w,
        iterations: cfg.max_iters,
        converged: false,
        objective: prev,
    })
}

/// Central finite-difference gradient, used to check analytic gradients.
pub fn numerical_gradient(obj: &dyn Objective, w: &[f64], h: f64) -> Vec<f64> {
    let mut probe = w.to_vec();
    (0..w.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = obj.value(&probe);
            probe[i] = orig - h;
            let down = obj.value(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}
