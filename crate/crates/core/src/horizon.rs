//! Random-horizon value function: each period the state is exogenously
//! revealed with probability `1 - delta`, otherwise the sender keeps
//! communicating. The value function solves the concavified Bellman
//! recursion
//!
//! `V(p) = cav_q[ mu(q - p) + delta*V(q) + (1 - delta)*B(q) ](p)`
//!
//! where `B(q)` is the expected news utility of immediate revelation.
//! The operator is a `delta`-contraction in the sup norm, so iteration
//! from zero converges geometrically for any `delta < 1`.

use crate::cheaptalk::{self, GgnLadder};
use crate::concavify::{concavify_at, interp_uniform, GridCfg};
use crate::gainloss::GainLossSpec;
use crate::{Error, Result};

/// Fixed point of the random-horizon recursion on a uniform grid.
#[derive(Debug, Clone)]
pub struct DiscountedValue {
    pub delta: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change of the final iteration.
    pub final_step: f64,
    pub converged: bool,
}

impl DiscountedValue {
    pub fn value_at(&self, p: f64) -> f64 {
        interp_uniform(&self.values, p)
    }
}

/// One application of the Bellman operator to `values` on the uniform
/// grid implied by `cfg.n`.
pub fn bellman_step(
    spec: &GainLossSpec,
    delta: f64,
    values: &[f64],
    cfg: &GridCfg,
) -> Result<Vec<f64>> {
    if values.len() != cfg.n {
        return Err(Error::InvalidParams(format!(
            "value vector has {} entries for a {}-point grid",
            values.len(),
            cfg.n
        )));
    }
    let n = cfg.n;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let p = i as f64 / (n - 1) as f64;
        let obj = |q: f64| {
            spec.mu_unchecked(q - p)
                + delta * interp_uniform(values, q)
                + (1.0 - delta) * spec.babbling_unchecked(q)
        };
        out[i] = concavify_at(obj, p, cfg)?.value;
    }
    Ok(out)
}

/// Iterate the operator from zero until the sup-norm step falls below
/// `tol`. The contraction modulus `delta` bounds the iteration count by
/// `log(tol / range) / log(delta)`.
pub fn value_iteration(
    spec: &GainLossSpec,
    delta: f64,
    cfg: &GridCfg,
    tol: f64,
    max_iter: usize,
) -> Result<DiscountedValue> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta={delta} outside [0, 1)")));
    }
    if cfg.n < 2 {
        return Err(Error::GridTooCoarse(cfg.n, 2));
    }
    let n = cfg.n;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut values = vec![0.0; n];
    let mut step = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = bellman_step(spec, delta, &values, cfg)?;
        step = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        values = next;
        iterations += 1;
        if step <= tol {
            break;
        }
    }
    if step > tol {
        return Err(Error::NoConvergence(format!(
            "value iteration stopped after {iterations} iterations with step {step:.3e}"
        )));
    }
    Ok(DiscountedValue {
        delta,
        grid,
        values,
        iterations,
        final_step: step,
        converged: true,
    })
}

/// Verify `V_{delta_hi} >= V_{delta_lo} - 1e-8` on the whole grid.
pub fn check_monotone_delta(
    spec: &GainLossSpec,
    delta_lo: f64,
    delta_hi: f64,
    cfg: &GridCfg,
) -> Result<bool> {
    if delta_lo > delta_hi {
        return Err(Error::InvalidParams(format!(
            "delta_lo={delta_lo} exceeds delta_hi={delta_hi}"
        )));
    }
    let lo = value_iteration(spec, delta_lo, cfg, 1e-9, 20_000)?;
    let hi = value_iteration(spec, delta_hi, cfg, 1e-9, 20_000)?;
    Ok(lo
        .values
        .iter()
        .zip(&hi.values)
        .all(|(l, h)| *h >= *l - 1e-8))
}

/// Gradual-good-news ladders of the random-horizon game: the chaining
/// condition is the same bad-state indifference as in the finite game and
/// does not depend on `delta`, but chains are no longer capped by a
/// horizon; they end only when the next indifference point would leave the
/// unit interval. Returns the maximal chains and all prefixes, babbling
/// included.
pub fn ggn_infinite(spec: &GainLossSpec, pi0: f64, delta: f64) -> Result<Vec<GgnLadder>> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta={delta} outside [0, 1)")));
    }
    // Increments grow under diminishing sensitivity, so chains are finite;
    // the depth cap is defensive.
    cheaptalk::ggn_enumerate(spec, pi0, 10_000, 100_000)
}
