//! Percentile-by-percentile news utility over consumption-utility
//! distributions: quantile machinery for two-component mixtures, the
//! quantile-integral news functional, its commitment solver, the
//! multi-state improvement construction, and the uniform-band power
//! improvement sweep.
//!
//! News from updating the mixture weight from `p_old` to `p_new` is
//! `N = integral_0^1 mu(F_new^{-1}(q) - F_old^{-1}(q)) dq`, evaluated by
//! a midpoint rule on uniform quantile panels (Gaussian quantiles diverge
//! at the endpoints, so the half-panel offset matters).

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::commitment::{solve_with_kernel, NewsKernel, OptimalPolicy};
use crate::concavify::GridCfg;
use crate::gainloss::GainLossSpec;
use crate::{Error, Result};

/// Default quadrature panel count.
pub const DEFAULT_QUAD: usize = 10_000;

/// Default quantile-inversion tolerance.
pub const QUANTILE_TOL: f64 = 1e-10;

/// Distribution of consumption utility conditional on one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConsumptionDist {
    Degenerate { v: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl ConsumptionDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConsumptionDist::Degenerate { v } => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(
                        "degenerate value must be finite".into(),
                    ))
                }
            }
            ConsumptionDist::Uniform { lo, hi } => {
                if hi > lo {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "uniform needs hi > lo, got [{lo}, {hi}]"
                    )))
                }
            }
            ConsumptionDist::Gaussian { sd, .. } => {
                if sd > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "gaussian needs sd > 0, got {sd}"
                    )))
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ConsumptionDist::Degenerate { v } => {
                if x >= v {
                    1.0
                } else {
                    0.0
                }
            }
            ConsumptionDist::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            ConsumptionDist::Gaussian { mean, sd } => {
                Normal::new(mean, sd).expect("validated").cdf(x)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            ConsumptionDist::Degenerate { .. } => 0.0,
            ConsumptionDist::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            ConsumptionDist::Gaussian { mean, sd } => {
                Normal::new(mean, sd).expect("validated").pdf(x)
            }
        }
    }

    /// Exact inverse CDF (generalized inverse for the degenerate case).
    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            ConsumptionDist::Degenerate { v } => v,
            ConsumptionDist::Uniform { lo, hi } => lo + q * (hi - lo),
            ConsumptionDist::Gaussian { mean, sd } => {
                Normal::new(mean, sd).expect("validated").inverse_cdf(q)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ConsumptionDist::Degenerate { v } => v,
            ConsumptionDist::Uniform { lo, hi } => 0.5 * (lo + hi),
            ConsumptionDist::Gaussian { mean, .. } => mean,
        }
    }
}

/// Belief over final consumption: weight `weight_g` on the good-state
/// component, the rest on the bad-state component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureBelief {
    pub weight_g: f64,
    pub comp_g: ConsumptionDist,
    pub comp_b: ConsumptionDist,
}

impl MixtureBelief {
    pub fn new(weight_g: f64, comp_g: ConsumptionDist, comp_b: ConsumptionDist) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight_g) {
            return Err(Error::Domain(format!("weight {weight_g} outside [0, 1]")));
        }
        comp_g.validate()?;
        comp_b.validate()?;
        Ok(MixtureBelief {
            weight_g,
            comp_g,
            comp_b,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.weight_g * self.comp_g.cdf(x) + (1.0 - self.weight_g) * self.comp_b.cdf(x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.weight_g * self.comp_g.pdf(x) + (1.0 - self.weight_g) * self.comp_b.pdf(x)
    }

    pub fn mean(&self) -> f64 {
        self.weight_g * self.comp_g.mean() + (1.0 - self.weight_g) * self.comp_b.mean()
    }

    /// Generalized inverse CDF by bracketing bisection with a Newton
    /// polish. The mixture quantile always lies between the component
    /// quantiles, which gives a tight starting bracket.
    pub fn quantile(&self, q: f64, tol: f64) -> Result<f64> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
        }
        if self.weight_g == 0.0 {
            return Ok(self.comp_b.quantile(q));
        }
        if self.weight_g == 1.0 {
            return Ok(self.comp_g.quantile(q));
        }
        let (qa, qb) = (self.comp_g.quantile(q), self.comp_b.quantile(q));
        let mut lo = qa.min(qb);
        let mut hi = qa.max(qb);
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        // Generalized inverse: smallest x with F(x) >= q.
        let mut iterations = 0;
        while hi - lo > tol && iterations < 200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
            // Newton polish once the bracket is small and the density is
            // informative; fall back to pure bisection otherwise.
            if iterations % 8 == 0 {
                let x = 0.5 * (lo + hi);
                let d = self.pdf(x);
                if d > 1e-12 {
                    let step = (self.cdf(x) - q) / d;
                    let cand = x - step;
                    if cand > lo && cand < hi {
                        if self.cdf(cand) >= q {
                            hi = cand;
                        } else {
                            lo = cand;
                        }
                    }
                }
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Midpoint quadrature nodes: `q_k = (k + 1/2)/n`.
fn quad_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect()
}

/// Percentile news with an arbitrary gain-loss closure. Used internally by
/// the sweeps whose quantile gaps exceed the unit interval.
pub fn percentile_news_with(
    new: &MixtureBelief,
    old: &MixtureBelief,
    mut mu: impl FnMut(f64) -> f64,
    n_quad: usize,
) -> Result<f64> {
    if new.comp_g != old.comp_g || new.comp_b != old.comp_b {
        return Err(Error::InvalidParams(
            "percentile news compares beliefs over the same component pair".into(),
        ));
    }
    if n_quad == 0 {
        return Err(Error::InvalidParams(
            "need at least one quadrature panel".into(),
        ));
    }
    let mut acc = 0.0;
    for q in quad_nodes(n_quad) {
        let d = new.quantile(q, QUANTILE_TOL)? - old.quantile(q, QUANTILE_TOL)?;
        acc += mu(d);
    }
    Ok(acc / n_quad as f64)
}

/// Quantile-integral news utility between two beliefs over the same
/// component pair.
pub fn percentile_news(
    new: &MixtureBelief,
    old: &MixtureBelief,
    spec: &GainLossSpec,
    n_quad: usize,
) -> Result<f64> {
    let mut err = None;
    let value = percentile_news_with(
        new,
        old,
        |d| match spec.mu(d) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        n_quad,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// News kernel for the percentile model over a fixed component pair.
///
/// Quantile rows (all quadrature nodes for one mixture weight) and
/// pairwise news values are memoized: the backwards induction asks for the
/// same `(new, old)` weight pairs once per layer.
pub struct PercentileKernel {
    comp_g: ConsumptionDist,
    comp_b: ConsumptionDist,
    spec: GainLossSpec,
    nodes: Vec<f64>,
    rows: RefCell<HashMap<u64, Rc<Vec<f64>>>>,
    pairs: RefCell<HashMap<(u64, u64), f64>>,
}

impl PercentileKernel {
    /// The component consumption utilities must be normalized so quantile
    /// gaps stay inside the gain-loss domain `[-1, 1]`.
    pub fn new(
        comp_g: ConsumptionDist,
        comp_b: ConsumptionDist,
        spec: GainLossSpec,
        n_quad: usize,
    ) -> Result<Self> {
        comp_g.validate()?;
        comp_b.validate()?;
        spec.validate()?;
        if n_quad == 0 {
            return Err(Error::InvalidParams(
                "need at least one quadrature panel".into(),
            ));
        }
        let kernel = PercentileKernel {
            comp_g,
            comp_b,
            spec,
            nodes: quad_nodes(n_quad),
            rows: RefCell::new(HashMap::new()),
            pairs: RefCell::new(HashMap::new()),
        };
        // Extremal beliefs have the widest quantile gaps; probing them
        // verifies the normalization once.
        let top = kernel.row(1.0)?;
        let bot = kernel.row(0.0)?;
        let max_gap = top
            .iter()
            .zip(bot.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if max_gap > 1.0 + 1e-6 {
            return Err(Error::InvalidParams(format!(
                "quantile gap {max_gap:.4} exceeds the unit gain-loss domain; \
                 normalize the consumption-utility components"
            )));
        }
        Ok(kernel)
    }

    fn row(&self, weight: f64) -> Result<Rc<Vec<f64>>> {
        let key = weight.to_bits();
        if let Some(r) = self.rows.borrow().get(&key) {
            return Ok(Rc::clone(r));
        }
        let mix = MixtureBelief {
            weight_g: weight,
            comp_g: self.comp_g,
            comp_b: self.comp_b,
        };
        let row: Vec<f64> = self
            .nodes
            .iter()
            .map(|&q| mix.quantile(q, QUANTILE_TOL))
            .collect::<Result<_>>()?;
        let rc = Rc::new(row);
        self.rows.borrow_mut().insert(key, Rc::clone(&rc));
        Ok(rc)
    }
}

impl NewsKernel for PercentileKernel {
    fn news(&self, new_belief: f64, old_belief: f64) -> f64 {
        let key = (new_belief.to_bits(), old_belief.to_bits());
        if let Some(&v) = self.pairs.borrow().get(&key) {
            return v;
        }
        let new_row = self.row(new_belief).expect("validated weights");
        let old_row = self.row(old_belief).expect("validated weights");
        let n = self.nodes.len() as f64;
        let v = new_row
            .iter()
            .zip(old_row.iter())
            .map(|(a, b)| self.spec.mu_unchecked((a - b).clamp(-1.0, 1.0)))
            .sum::<f64>()
            / n;
        self.pairs.borrow_mut().insert(key, v);
        v
    }
}

/// Commitment solver under percentile-based news utility: the same
/// backwards induction, with the quantile-integral kernel in place of the
/// mean-based one. The default grid is coarser and unrefined because every
/// news evaluation integrates over quantiles.
pub fn solve_percentile(
    comp_g: ConsumptionDist,
    comp_b: ConsumptionDist,
    spec: &GainLossSpec,
    pi0: f64,
    horizon: usize,
    cfg: &GridCfg,
    n_quad: usize,
) -> Result<OptimalPolicy> {
    let kernel = PercentileKernel::new(comp_g, comp_b, *spec, n_quad)?;
    solve_with_kernel(&kernel, pi0, horizon, cfg)
}

/// Default grid for the percentile solver.
pub fn percentile_grid_default() -> GridCfg {
    GridCfg::coarse(401)
}

// --- Exact percentile news for discrete distributions ----------------------

/// A finite consumption-utility distribution: `(value, probability)` pairs
/// sorted by value.
fn discrete_percentile_news(
    new: &[(f64, f64)],
    old: &[(f64, f64)],
    mu: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    // Quantile functions of finite distributions are step functions; the
    // difference is constant between the merged cumulative breakpoints.
    let mut acc = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ci, mut cj) = (0.0f64, 0.0f64); // cumulative mass below segment
    let mut q = 0.0f64;
    while i < new.len() && j < old.len() {
        let top_i = ci + new[i].1;
        let top_j = cj + old[j].1;
        let top = top_i.min(top_j).min(1.0);
        if top > q {
            acc += (top - q) * mu(new[i].0 - old[j].0)?;
            q = top;
        }
        if top_i <= top_j {
            ci = top_i;
            i += 1;
        }
        if top_j <= top_i {
            cj = top_j;
            j += 1;
        }
    }
    Ok(acc)
}

fn degenerate_at(k: usize, values: &[f64]) -> Vec<(f64, f64)> {
    vec![(values[k], 1.0)]
}

/// Gain of the two-period pooled-message structure over one-shot
/// resolution for `K >= 3` states under percentile news utility.
///
/// Period 1 reveals every state except the top two; the top state is
/// revealed outright with some probability and otherwise pooled with the
/// second-best state into one message calibrated so the posterior on the
/// top state equals its prior. Period 2 reveals everything. For `mu`
/// strictly concave on gains the pooled branch splits the top state's good
/// news into two pieces and strictly improves.
pub fn kr_improvement_value(
    prior: &[f64],
    consumption_utils: &[f64],
    spec: &GainLossSpec,
) -> Result<f64> {
    let k = prior.len();
    if k < 3 {
        return Err(Error::InvalidParams(format!(
            "need at least 3 states, got {k}"
        )));
    }
    if consumption_utils.len() != k {
        return Err(Error::InvalidParams(
            "consumption utilities must match the prior in length".into(),
        ));
    }
    if (prior.iter().sum::<f64>() - 1.0).abs() > 1e-12 || prior.iter().any(|p| *p <= 0.0) {
        return Err(Error::InvalidParams(
            "prior must be a full-support probability vector".into(),
        ));
    }
    if consumption_utils.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "consumption utilities must be strictly increasing".into(),
        ));
    }
    if consumption_utils.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain(
            "consumption utilities must lie in [0, 1]".into(),
        ));
    }
    let v = consumption_utils;
    let mu = |d: f64| spec.mu(d);
    let prior_dist: Vec<(f64, f64)> = v.iter().copied().zip(prior.iter().copied()).collect();

    // One-shot: reveal the state in period 1.
    let mut one_shot = 0.0;
    for s in 0..k {
        one_shot += prior[s] * discrete_percentile_news(&degenerate_at(s, v), &prior_dist, mu)?;
    }

    // Pooled structure.
    let p_top = prior[k - 1];
    let p_second = prior[k - 2];
    let sigma_pool = p_second / (1.0 - p_top);
    let prob_pool = p_second + p_top * sigma_pool;
    let prob_reveal_top = p_top * (1.0 - sigma_pool);
    // Posterior after the pooled message: top keeps its prior mass.
    let post: Vec<(f64, f64)> = vec![(v[k - 2], 1.0 - p_top), (v[k - 1], p_top)];

    let mut value = 0.0;
    for s in 0..k - 2 {
        value += prior[s] * discrete_percentile_news(&degenerate_at(s, v), &prior_dist, mu)?;
    }
    let pool_news = discrete_percentile_news(&post, &prior_dist, mu)?;
    let second_reveal = discrete_percentile_news(&degenerate_at(k - 2, v), &post, mu)?;
    let top_reveal = discrete_percentile_news(&degenerate_at(k - 1, v), &post, mu)?;
    value += prob_pool * (pool_news + (1.0 - p_top) * second_reveal + p_top * top_reveal);
    value += prob_reveal_top * discrete_percentile_news(&degenerate_at(k - 1, v), &prior_dist, mu)?;

    Ok(value - one_shot)
}

// --- Uniform-band power improvement sweep -----------------------------------

/// Result of the partial-good-news sweep over the split parameter.
#[derive(Debug, Clone, Copy)]
pub struct ResidualGain {
    pub max_gain: f64,
    pub argmax_eps: f64,
}

/// Log-spaced default sweep grid over the pooling parameter.
pub fn default_eps_grid() -> Vec<f64> {
    let (lo, hi, n) = (1e-4f64, 0.2f64, 60usize);
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Improvement of the two-period partial-good-news structure over one-shot
/// resolution when consumption utilities are `Unif[0, L]` in the bad state
/// and `J + Unif[0, L]` in the good state, with power gain-loss utility
/// `x^alpha` on gains and `-lambda*(-x)^alpha` on losses (evaluated on the
/// band's own scale, so gaps up to `J` are fine). The prior weight on the
/// good state is fixed at one half. Reports the best gain on the sweep
/// grid, honestly including non-positive maxima on coarse grids.
pub fn residual_power_gain(
    band: f64,
    shift: f64,
    alpha: f64,
    lambda: f64,
    eps_grid: &[f64],
) -> Result<ResidualGain> {
    if band <= 0.0 || shift <= 0.0 {
        return Err(Error::InvalidParams(
            "band and shift must be positive".into(),
        ));
    }
    if !(0.0 < alpha && alpha < 1.0) || lambda < 1.0 {
        return Err(Error::InvalidParams(
            "need alpha in (0, 1) and lambda >= 1".into(),
        ));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(ment01(*e))) {
        return Err(Error::InvalidParams(
            "split grid must contain values in (0, 1)".into(),
        ));
    }
    let comp_b = ConsumptionDist::Uniform { lo: 0.0, hi: band };
    let comp_g = ConsumptionDist::Uniform {
        lo: shift,
        hi: band + shift,
    };
    let mu = |x: f64| {
        if x >= 0.0 {
            x.powf(alpha)
        } else {
            -lambda * (-x).powf(alpha)
        }
    };
    let mix = |w: f64| MixtureBelief {
        weight_g: w,
        comp_g,
        comp_b,
    };
    let pi_g = 0.5;
    let prior = mix(pi_g);
    let top = mix(1.0);
    let bot = mix(0.0);
    let n_quad = DEFAULT_QUAD;

    let news_top_prior = percentile_news_with(&top, &prior, mu, n_quad)?;
    let news_bot_prior = percentile_news_with(&bot, &prior, mu, n_quad)?;
    let mut best = ResidualGain {
        max_gain: f64::NEG_INFINITY,
        argmax_eps: eps_grid[0],
    };
    for &eps in eps_grid {
        let pooled = mix(1.0 - eps);
        let news_pooled = percentile_news_with(&pooled, &prior, mu, n_quad)?;
        let news_top_pooled = percentile_news_with(&top, &pooled, mu, n_quad)?;
        let news_bot_pooled = percentile_news_with(&bot, &pooled, mu, n_quad)?;
        let gain = pi_g * (news_pooled + news_top_pooled - news_top_prior)
            + eps / (1.0 - eps) * pi_g * (news_pooled + news_bot_pooled - news_bot_prior);
        if gain > best.max_gain {
            best = ResidualGain {
                max_gain: gain,
                argmax_eps: eps,
            };
        }
    }
    Ok(best)
}

fn ment01(e: f64) -> bool {
    e > 0.0 && e < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn degenerate_pair(w: f64) -> MixtureBelief {
        MixtureBelief::new(
            w,
            ConsumptionDist::Degenerate { v: 1.0 },
            ConsumptionDist::Degenerate { v: 0.0 },
        )
        .unwrap()
    }

    fn gaussian_pair(w: f64, sd: f64) -> MixtureBelief {
        MixtureBelief::new(
            w,
            ConsumptionDist::Gaussian { mean: 1.0, sd },
            ConsumptionDist::Gaussian { mean: 0.0, sd },
        )
        .unwrap()
    }

    #[test]
    fn degenerate_step_quantiles() {
        let m = degenerate_pair(0.5);
        assert!((m.quantile(0.25, 1e-12).unwrap() - 0.0).abs() < 1e-10);
        assert!((m.quantile(0.75, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_shift_quantile_identity() {
        // Mixture of Unif[0, L] and d + Unif[0, L] with weight p on the
        // shifted component: the quantile at level d/L is exactly d + p*d.
        let (l, d) = (10.0, 1.0);
        for p in [0.1, 0.5, 0.9] {
            let m = MixtureBelief::new(
                p,
                ConsumptionDist::Uniform { lo: d, hi: l + d },
                ConsumptionDist::Uniform { lo: 0.0, hi: l },
            )
            .unwrap();
            assert_relative_eq!(m.quantile(d / l, 1e-12).unwrap(), d + p * d, epsilon = 1e-9);
        }
    }

    #[test]
    fn gaussian_mixture_median_and_monotonicity() {
        let m = gaussian_pair(0.9, 1.0);
        let med = m.quantile(0.5, 1e-10).unwrap();
        assert!((m.cdf(med) - 0.5).abs() < 1e-9);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let x = m.quantile(q, 1e-10).unwrap();
            assert!(x >= prev);
            prev = x;
        }
    }

    #[test]
    fn quantile_mean_consistency() {
        // Integral of the quantile function equals the mixture mean.
        let cases = [
            degenerate_pair(0.3),
            MixtureBelief::new(
                0.7,
                ConsumptionDist::Uniform { lo: 1.0, hi: 2.0 },
                ConsumptionDist::Uniform { lo: 0.0, hi: 1.0 },
            )
            .unwrap(),
            gaussian_pair(0.4, 0.5),
        ];
        for m in cases {
            let n = 2_000_000usize;
            let mut acc = 0.0;
            for q in quad_nodes(n) {
                acc += m.quantile(q, 1e-10).unwrap();
            }
            acc /= n as f64;
            assert!(
                (acc - m.mean()).abs() < 1e-6,
                "quadrature mean {acc} vs true {}",
                m.mean()
            );
        }
    }

    #[test]
    fn percentile_news_zero_and_sign() {
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let m = gaussian_pair(0.5, 1.0);
        assert_relative_eq!(
            percentile_news(&m, &m, &spec, 500).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        // Symmetric mu: swapping the beliefs flips the sign.
        let sym = GainLossSpec::sqrt_scaled(1.0).unwrap();
        let hi = gaussian_pair(0.8, 1.0);
        let lo = gaussian_pair(0.3, 1.0);
        let up = percentile_news(&hi, &lo, &sym, 2000).unwrap();
        let down = percentile_news(&lo, &hi, &sym, 2000).unwrap();
        assert_relative_eq!(up, -down, epsilon = 1e-9);
        assert!(up > 0.0);
    }

    #[test]
    fn identical_degenerate_components_produce_no_news() {
        // If both states pay the same consumption utility, belief changes
        // are payoff-irrelevant and the quantile gap vanishes everywhere.
        let spec = GainLossSpec::sqrt_scaled(2.0).unwrap();
        let mk = |w| {
            MixtureBelief::new(
                w,
                ConsumptionDist::Degenerate { v: 0.5 },
                ConsumptionDist::Degenerate { v: 0.5 },
            )
            .unwrap()
        };
        let n = percentile_news(&mk(0.9), &mk(0.3), &spec, 1000).unwrap();
        assert_relative_eq!(n, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn percentile_news_degenerate_components_is_two_part_linear() {
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let mu1 = spec.mu(1.0).unwrap();
        let (p1, p2) = (0.3, 0.8);
        let n =
            percentile_news(&degenerate_pair(p2), &degenerate_pair(p1), &spec, 100_000).unwrap();
        assert!((n - (p2 - p1) * mu1).abs() < 1e-4);
    }

    #[test]
    fn percentile_news_uniform_band_approaches_mean_based() {
        // Wide bands: percentile news converges to mu applied to the mean
        // shift, at rate 1/L.
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let d = 1.0;
        let err_at = |l: f64| {
            let mk = |w: f64| {
                MixtureBelief::new(
                    w,
                    ConsumptionDist::Uniform { lo: d, hi: l + d },
                    ConsumptionDist::Uniform { lo: 0.0, hi: l },
                )
                .unwrap()
            };
            let mut worst = 0.0f64;
            for (p1, p2) in [(0.1, 0.9), (0.2, 0.5), (0.7, 0.3), (0.05, 0.95)] {
                let n = percentile_news(&mk(p2), &mk(p1), &spec, 20_000).unwrap();
                let mean_based = spec.mu((p2 - p1) * d / l.max(1.0)).unwrap();
                // Consumption utilities live on the band scale; normalize
                // the comparison by evaluating mu on the same scale.
                let _ = mean_based;
                let target = if (p2 - p1) >= 0.0 {
                    ((p2 - p1) * d).sqrt() * 1.0
                } else {
                    -1.5 * ((p1 - p2) * d).sqrt()
                };
                worst = worst.max((n - target).abs());
            }
            worst
        };
        let (e3, e4) = (err_at(1e3), err_at(1e4));
        assert!(e4 < e3);
        assert!(
            e3 <= 20.0 * e4,
            "decay slower than 1/L: err(1e3)={e3}, err(1e4)={e4}"
        );
        // And the bound from the band geometry holds at moderate widths.
        let l = 50.0;
        let mk = |w: f64| {
            MixtureBelief::new(
                w,
                ConsumptionDist::Uniform { lo: d, hi: l + d },
                ConsumptionDist::Uniform { lo: 0.0, hi: l },
            )
            .unwrap()
        };
        let n = percentile_news(&mk(0.9), &mk(0.2), &spec, 20_000).unwrap();
        let target = spec.mu(0.7 * d).unwrap();
        let max_mu = 1.5 * (2.0 * d).sqrt();
        assert!((n - target).abs() <= 4.0 * d / l * max_mu);
    }

    #[test]
    fn kernel_requires_normalized_gap() {
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        assert!(PercentileKernel::new(
            ConsumptionDist::Gaussian { mean: 2.0, sd: 1.0 },
            ConsumptionDist::Gaussian { mean: 0.0, sd: 1.0 },
            spec,
            100,
        )
        .is_err());
        assert!(PercentileKernel::new(
            ConsumptionDist::Gaussian { mean: 1.0, sd: 1.0 },
            ConsumptionDist::Gaussian { mean: 0.0, sd: 1.0 },
            spec,
            100,
        )
        .is_ok());
    }

    #[test]
    fn kernel_news_matches_direct_evaluation() {
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let (g, b) = (
            ConsumptionDist::Gaussian { mean: 1.0, sd: 1.0 },
            ConsumptionDist::Gaussian { mean: 0.0, sd: 1.0 },
        );
        let kernel = PercentileKernel::new(g, b, spec, 2000).unwrap();
        for (p_new, p_old) in [(0.8, 0.5), (0.2, 0.5), (0.55, 0.5)] {
            let direct = percentile_news(
                &MixtureBelief::new(p_new, g, b).unwrap(),
                &MixtureBelief::new(p_old, g, b).unwrap(),
                &spec,
                2000,
            )
            .unwrap();
            assert_relative_eq!(kernel.news(p_new, p_old), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_components_solver_matches_two_part_linear_equivalent() {
        // With degenerate components the quantile difference is an
        // indicator band, so the model is behaviorally two-part linear in
        // the belief change: news(p2|p1) = (p2-p1)^+ mu(1) - (p2-p1)^- |mu(-1)|.
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let cfg = GridCfg::coarse(201);
        let policy = solve_percentile(
            ConsumptionDist::Degenerate { v: 1.0 },
            ConsumptionDist::Degenerate { v: 0.0 },
            &spec,
            0.5,
            3,
            &cfg,
            4000,
        )
        .unwrap();
        let mu1 = spec.mu(1.0).unwrap();
        let lambda_eff = -spec.mu(-1.0).unwrap() / mu1;
        let tpl = GainLossSpec::two_part_linear(lambda_eff).unwrap();
        let equiv = crate::commitment::solve(&tpl, 0.5, 3, &cfg).unwrap();
        assert!(
            (policy.value - mu1 * equiv.value).abs() < 2e-3,
            "percentile {} vs scaled two-part-linear {}",
            policy.value,
            mu1 * equiv.value
        );
    }

    #[test]
    fn kr_improvement_reference_case() {
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let delta =
            kr_improvement_value(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], &[0.0, 0.5, 1.0], &spec)
                .unwrap();
        assert!(delta > 0.0);
        // Exact evaluation: the pooled structure is worth -1/9 here and
        // one-shot is worth (mu(.5) + mu(-.5) + mu(1) + mu(-1))/3... the
        // frozen value below was cross-checked against a fine-quadrature
        // evaluation of both structures.
        assert_relative_eq!(delta, 0.023_011_864_576_283, epsilon = 1e-9);

        // Linear mu on both sides: no curvature, no gain.
        let tpl = GainLossSpec::two_part_linear(1.5).unwrap();
        let none = kr_improvement_value(&[0.25, 0.25, 0.5], &[0.0, 0.4, 1.0], &tpl).unwrap();
        assert_relative_eq!(none, 0.0, epsilon = 1e-12);

        // Lopsided prior: still positive, just small.
        let small = kr_improvement_value(&[0.98, 0.01, 0.01], &[0.0, 0.5, 1.0], &spec).unwrap();
        assert!(small > 0.0 && small < delta);

        assert!(kr_improvement_value(&[0.5, 0.5], &[0.0, 1.0], &spec).is_err());
    }

    #[test]
    fn kr_improvement_matches_quadrature_oracle() {
        // Independent check of the exact step-function integration: the
        // same structure evaluated with the generic quantile quadrature.
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let prior = [0.2, 0.3, 0.5];
        let v = [0.0, 0.45, 1.0];
        let exact = kr_improvement_value(&prior, &v, &spec).unwrap();

        let mu = |d: f64| spec.mu(d).unwrap();
        let quad = |new: &[(f64, f64)], old: &[(f64, f64)]| {
            let n = 200_000;
            let q_of = |dist: &[(f64, f64)], q: f64| {
                let mut c = 0.0;
                for &(val, p) in dist {
                    c += p;
                    if q <= c {
                        return val;
                    }
                }
                dist.last().unwrap().0
            };
            let mut acc = 0.0;
            for q in quad_nodes(n) {
                acc += mu(q_of(new, q) - q_of(old, q));
            }
            acc / n as f64
        };
        let prior_dist: Vec<(f64, f64)> = v.iter().copied().zip(prior).collect();
        let one_shot: f64 = (0..3)
            .map(|s| prior[s] * quad(&[(v[s], 1.0)], &prior_dist))
            .sum();
        let p_top = prior[2];
        let sigma = prior[1] / (1.0 - p_top);
        let prob_pool = prior[1] + p_top * sigma;
        let post = vec![(v[1], 1.0 - p_top), (v[2], p_top)];
        let mut constructed = prior[0] * quad(&[(v[0], 1.0)], &prior_dist);
        constructed += prob_pool
            * (quad(&post, &prior_dist)
                + (1.0 - p_top) * quad(&[(v[1], 1.0)], &post)
                + p_top * quad(&[(v[2], 1.0)], &post));
        constructed += p_top * (1.0 - sigma) * quad(&[(v[2], 1.0)], &prior_dist);
        let oracle = constructed - one_shot;
        assert!(
            (exact - oracle).abs() < 1e-5,
            "exact {exact} vs quadrature oracle {oracle}"
        );
    }

    #[test]
    fn residual_gain_positive_for_moderate_parameters() {
        let grid = default_eps_grid();
        let r = residual_power_gain(1.0, 1.0, 0.5, 1.5, &grid).unwrap();
        assert!(
            r.max_gain > 0.0,
            "gain {} at eps {}",
            r.max_gain,
            r.argmax_eps
        );
    }

    #[test]
    fn residual_gain_grows_as_curvature_strengthens() {
        let eps = [1e-3];
        let g = |alpha: f64| {
            residual_power_gain(1.0, 1.0, alpha, 1.5, &eps)
                .unwrap()
                .max_gain
        };
        let (g3, g5, g7) = (g(0.3), g(0.5), g(0.7));
        assert!(g3 > g5 && g5 > g7, "gains {g3}, {g5}, {g7}");
    }

    #[test]
    fn residual_gain_reports_honest_negatives() {
        // Extreme loss aversion with a coarse grid: the best found gain
        // may be non-positive and is reported as such.
        let r = residual_power_gain(1.0, 1.0, 0.5, 1e6, &[0.1, 0.2]).unwrap();
        assert!(r.max_gain < 0.0);
    }
}
