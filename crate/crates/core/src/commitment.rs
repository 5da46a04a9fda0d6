//! The benevolent-sender commitment problem: backwards induction with
//! concavification over belief space, an exhaustive two-period oracle,
//! and closed-form solutions and conditions for the quadratic family.
//!
//! The recursion works on a uniform belief grid. The terminal layer is the
//! expected news utility of the exogenous revelation,
//! `B(q) = q*mu(1-q) + (1-q)*mu(-q)`; each earlier layer concavifies
//! `q -> news(q | x) + V_next(q)` at every grid prior `x`. The on-path
//! tree is extracted by following supporting splits from the prior.

use crate::concavify::{concavify_at, interp_uniform, GridCfg, Support};
use crate::gainloss::{GainLossSpec, Side};
use crate::infostruct::{Branch, PosteriorTree, TreeNode};
use crate::{Error, Result};

/// Minimum admissible grid size for the solvers.
pub const MIN_GRID: usize = 101;

/// Beliefs this close to 0 or 1 are snapped during tree extraction.
const SNAP_TOL: f64 = 1e-9;

/// Per-period news utility as a function of (new, old) beliefs. The
/// mean-based model applies `mu` to the belief change directly; the
/// percentile model integrates `mu` across quantiles.
pub trait NewsKernel {
    fn news(&self, new_belief: f64, old_belief: f64) -> f64;

    /// Expected news utility of the terminal revelation from belief `q`.
    fn terminal(&self, q: f64) -> f64 {
        q * self.news(1.0, q) + (1.0 - q) * self.news(0.0, q)
    }
}

/// Mean-based kernel: `news(q | x) = mu(q - x)`.
pub struct MeanBasedKernel<'a>(pub &'a GainLossSpec);

impl NewsKernel for MeanBasedKernel<'_> {
    #[inline]
    fn news(&self, new_belief: f64, old_belief: f64) -> f64 {
        self.0.mu_unchecked(new_belief - old_belief)
    }

    fn terminal(&self, q: f64) -> f64 {
        self.0.babbling_unchecked(q)
    }
}

/// One period of the backward recursion on the grid.
#[derive(Debug, Clone)]
pub struct ValueLayer {
    /// Communication period this layer decides (1-based).
    pub period: usize,
    pub grid: Vec<f64>,
    /// Concavified value `U*_t` at each grid prior.
    pub values: Vec<f64>,
    /// Continuation value of releasing nothing this period.
    pub stay_values: Vec<f64>,
    /// Optimal supporting split at each grid prior.
    pub supports: Vec<Support>,
}

/// Solver output: per-period value layers, the extracted on-path tree,
/// and the optimal value at the prior.
#[derive(Debug, Clone)]
pub struct OptimalPolicy {
    pub layers: Vec<ValueLayer>,
    pub tree: PosteriorTree,
    pub value: f64,
}

impl OptimalPolicy {
    /// Good-state belief path `pi0, p_1, ..., p_{T-1}, 1`: the beliefs along
    /// the path that never hears conclusive bad news.
    pub fn good_state_path(&self) -> Vec<f64> {
        let nodes = self.tree.nodes();
        let mut path = vec![nodes[0].belief];
        let mut cur = &nodes[0];
        while let Some(up) = cur
            .children
            .iter()
            .max_by(|a, b| {
                nodes[a.child]
                    .belief
                    .partial_cmp(&nodes[b.child].belief)
                    .unwrap()
            })
            .map(|b| &nodes[b.child])
        {
            path.push(up.belief);
            cur = up;
        }
        path
    }

    /// The objective and its envelope for one layer at an arbitrary prior:
    /// rows `(q, u, cav_u)` on the stored grid. Mean-based specs only.
    pub fn layer_curve(
        &self,
        spec: &GainLossSpec,
        period: usize,
        prior: f64,
    ) -> Result<Vec<(f64, f64, f64)>> {
        let layer = self
            .layers
            .iter()
            .find(|l| l.period == period)
            .ok_or_else(|| Error::InvalidParams(format!("no layer for period {period}")))?;
        let next = &layer.stay_values;
        let obj = |q: f64| spec.mu_unchecked(q - prior) + interp_uniform(next, q);
        let samples = crate::concavify::SampledFunction::from_fn(obj, layer.grid.len())?;
        let env = crate::concavify::concave_envelope(&samples)?;
        Ok(layer
            .grid
            .iter()
            .map(|&q| (q, obj(q), env.value_at(q)))
            .collect())
    }
}

/// Solve the commitment problem for a mean-based gain-loss spec.
pub fn solve(
    spec: &GainLossSpec,
    pi0: f64,
    horizon: usize,
    cfg: &GridCfg,
) -> Result<OptimalPolicy> {
    solve_with_kernel(&MeanBasedKernel(spec), pi0, horizon, cfg)
}

/// Backwards-induction concavification for any news kernel.
pub fn solve_with_kernel(
    kernel: &impl NewsKernel,
    pi0: f64,
    horizon: usize,
    cfg: &GridCfg,
) -> Result<OptimalPolicy> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::Domain(format!("pi0={pi0} outside [0, 1]")));
    }
    if horizon < 2 {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} below minimum of 2"
        )));
    }
    if cfg.n < MIN_GRID {
        return Err(Error::GridTooCoarse(cfg.n, MIN_GRID));
    }
    let n = cfg.n;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();

    // Terminal expectation layer.
    let mut v_next: Vec<f64> = grid.iter().map(|&q| kernel.terminal(q)).collect();

    let mut layers: Vec<ValueLayer> = Vec::with_capacity(horizon - 1);
    for t in (1..horizon).rev() {
        let mut values = vec![0.0; n];
        let mut supports = vec![Support::Point(0.0); n];
        for (i, &x) in grid.iter().enumerate() {
            let obj = |q: f64| kernel.news(q, x) + interp_uniform(&v_next, q);
            let sol = concavify_at(obj, x, cfg)?;
            values[i] = sol.value;
            supports[i] = sol.support;
        }
        layers.push(ValueLayer {
            period: t,
            grid: grid.clone(),
            values: values.clone(),
            stay_values: v_next.clone(),
            supports,
        });
        v_next = values;
    }
    layers.reverse();

    let (tree, value) = extract_tree(kernel, pi0, horizon, &layers, cfg)?;
    Ok(OptimalPolicy {
        layers,
        tree,
        value,
    })
}

/// Follow the supporting splits from the prior to build the on-path tree.
/// Queries the envelope at the exact path beliefs, which need not be grid
/// points.
fn extract_tree(
    kernel: &impl NewsKernel,
    pi0: f64,
    horizon: usize,
    layers: &[ValueLayer],
    cfg: &GridCfg,
) -> Result<(PosteriorTree, f64)> {
    let mut nodes = vec![TreeNode {
        id: 0,
        period: 0,
        belief: snap(pi0),
        children: Vec::new(),
    }];
    let mut frontier: Vec<usize> = vec![0];
    let mut root_value = None;

    for t in 1..horizon {
        let stay = &layers[t - 1].stay_values;
        let mut next_frontier = Vec::new();
        for &node_id in &frontier {
            let x = nodes[node_id].belief;
            if x <= 0.0 || x >= 1.0 {
                // Degenerate beliefs stay put until the revelation.
                let id = push_child(&mut nodes, node_id, t, x, 1.0, 1.0);
                next_frontier.push(id);
                continue;
            }
            let obj = |q: f64| kernel.news(q, x) + interp_uniform(stay, q);
            let sol = concavify_at(obj, x, cfg)?;
            if node_id == 0 {
                root_value = Some(sol.value);
            }
            match sol.support {
                Support::Point(_) => {
                    let id = push_child(&mut nodes, node_id, t, x, 1.0, 1.0);
                    next_frontier.push(id);
                }
                Support::Pair { lo, hi, w_lo, w_hi } => {
                    let (lo, hi) = (snap(lo), snap(hi));
                    // Per-state message probabilities from the unconditional
                    // weights: sigma_G = w*q/x, sigma_B = w*(1-q)/(1-x).
                    let mut sg = [w_lo * lo / x, w_hi * hi / x];
                    let mut sb = [w_lo * (1.0 - lo) / (1.0 - x), w_hi * (1.0 - hi) / (1.0 - x)];
                    let (tg, tb) = (sg[0] + sg[1], sb[0] + sb[1]);
                    if (tg - 1.0).abs() > 1e-6 || (tb - 1.0).abs() > 1e-6 {
                        return Err(Error::NoConvergence(format!(
                            "support at {x} is not Bayes-plausible: sums ({tg}, {tb})"
                        )));
                    }
                    sg[0] /= tg;
                    sg[1] /= tg;
                    sb[0] /= tb;
                    sb[1] /= tb;
                    for (k, &q) in [lo, hi].iter().enumerate() {
                        let id = push_child(&mut nodes, node_id, t, q, sg[k], sb[k]);
                        next_frontier.push(id);
                    }
                }
            }
        }
        frontier = next_frontier;
    }

    // Terminal revelation layer.
    for &node_id in &frontier {
        let x = nodes[node_id].belief;
        if x <= 0.0 || x >= 1.0 {
            push_child(&mut nodes, node_id, horizon, x, 1.0, 1.0);
        } else {
            push_child(&mut nodes, node_id, horizon, 1.0, 1.0, 0.0);
            push_child(&mut nodes, node_id, horizon, 0.0, 0.0, 1.0);
        }
    }

    // A two-period problem's root value comes from the single layer pass.
    let value = match root_value {
        Some(v) => v,
        None => kernel.terminal(pi0),
    };
    let tree = PosteriorTree::from_nodes(snap(pi0), horizon, nodes)?;
    Ok((tree, value))
}

fn snap(q: f64) -> f64 {
    if q < SNAP_TOL {
        0.0
    } else if q > 1.0 - SNAP_TOL {
        1.0
    } else {
        q
    }
}

fn push_child(
    nodes: &mut Vec<TreeNode>,
    parent: usize,
    period: usize,
    belief: f64,
    prob_g: f64,
    prob_b: f64,
) -> usize {
    let id = nodes.len();
    nodes.push(TreeNode {
        id,
        period,
        belief,
        children: Vec::new(),
    });
    nodes[parent].children.push(Branch {
        child: id,
        prob_g,
        prob_b,
    });
    id
}

/// Exhaustive two-period oracle: search every Bayes-plausible period-1
/// posterior distribution supported on at most three points of
/// `support_grid` and return the best total news utility.
///
/// The objective is linear in the weights, so three-point supports can
/// never beat the best two-point support; they are searched anyway so the
/// oracle stays independent of that argument (each triple's feasible
/// weight segment is evaluated at both endpoints and its midpoint).
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub value: f64,
    /// `(belief, weight)` pairs of the best distribution found.
    pub support: Vec<(f64, f64)>,
}

pub fn brute_force_t2(spec: &GainLossSpec, pi0: f64, support_grid: &[f64]) -> Result<BruteForce> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::Domain(format!("pi0={pi0} outside [0, 1]")));
    }
    let grid = support_grid;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    for required in [0.0, pi0, 1.0] {
        if !grid.iter().any(|&g| close(g, required)) {
            return Err(Error::InvalidParams(format!(
                "support grid must contain {required}"
            )));
        }
    }
    let u: Vec<f64> = grid
        .iter()
        .map(|&q| spec.mu_unchecked(q - pi0) + spec.babbling_unchecked(q))
        .collect();

    // Babbling baseline: the one-point support {pi0}.
    let mut best = BruteForce {
        value: spec.babbling_unchecked(pi0),
        support: vec![(pi0, 1.0)],
    };
    let mut consider = |value: f64, support: Vec<(f64, f64)>| {
        let better = value > best.value + 1e-15
            || (value > best.value - 1e-15 && support.len() < best.support.len());
        if better {
            best = BruteForce { value, support };
        }
    };

    // All two-point supports straddling the prior.
    for (i, &ql) in grid.iter().enumerate() {
        if ql > pi0 {
            break;
        }
        for (j, &qh) in grid.iter().enumerate().skip(i + 1) {
            if qh < pi0 {
                continue;
            }
            let w_hi = (pi0 - ql) / (qh - ql);
            let w_lo = 1.0 - w_hi;
            let value = w_lo * u[i] + w_hi * u[j];
            consider(value, vec![(ql, w_lo), (qh, w_hi)]);
        }
    }

    // All three-point supports with q1 < q2 < q3 and pi0 in [q1, q3].
    let m = grid.len();
    for i in 0..m {
        let q1 = grid[i];
        if q1 > pi0 {
            break;
        }
        for k in (i + 2..m).rev() {
            let q3 = grid[k];
            if q3 < pi0 {
                break;
            }
            for j in i + 1..k {
                let q2 = grid[j];
                // Weight on q2 parametrizes the feasible segment.
                let s_max = if q2 <= pi0 {
                    (q3 - pi0) / (q3 - q2)
                } else {
                    (pi0 - q1) / (q2 - q1)
                };
                for s in [0.0, 0.5 * s_max, s_max] {
                    let w1 = ((q3 - pi0) - s * (q3 - q2)) / (q3 - q1);
                    let w3 = ((pi0 - q1) - s * (q2 - q1)) / (q3 - q1);
                    if w1 < -1e-12 || w3 < -1e-12 {
                        continue;
                    }
                    let value = w1 * u[i] + s * u[j] + w3 * u[k];
                    let support: Vec<(f64, f64)> = [(q1, w1), (q2, s), (q3, w3)]
                        .into_iter()
                        .filter(|&(_, w)| w > 1e-12)
                        .collect();
                    consider(value, support);
                }
            }
        }
    }
    Ok(best)
}

/// Closed-form optimal partial good news for the quadratic family with two
/// periods: the root in `(max(pi0, 1/3), 1)` of
/// `pi0*(an-ap) - (bp+bn)*pi0^2 = p^2*(an-ap+bn+bp) - p^3*(2bp+2bn)`,
/// found by safeguarded Newton with a bisection fallback. Requires
/// `0 <= an - ap < bn + bp`, the region where one-shot resolution is
/// strictly suboptimal.
pub fn quadratic_p_high(
    alpha_p: f64,
    beta_p: f64,
    alpha_n: f64,
    beta_n: f64,
    pi0: f64,
) -> Result<f64> {
    GainLossSpec::quadratic(alpha_p, beta_p, alpha_n, beta_n)?;
    if !(0.0 < pi0 && pi0 < 1.0) {
        return Err(Error::Domain(format!("pi0={pi0} outside (0, 1)")));
    }
    let da = alpha_n - alpha_p;
    let db = beta_n + beta_p;
    let c = da / db;
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParams(format!(
            "needs 0 <= alpha_n - alpha_p < beta_n + beta_p (ratio {c})"
        )));
    }
    let rhs0 = pi0 * da - db * pi0 * pi0;
    let a2 = da + db;
    let a3 = 2.0 * db;
    let g = |p: f64| a2 * p * p - a3 * p * p * p - rhs0;
    let dg = |p: f64| 2.0 * a2 * p - 3.0 * a3 * p * p;

    let mut lo = pi0.max(1.0 / 3.0) + 1e-12;
    let mut hi = 1.0 - 1e-12;
    let (glo, ghi) = (g(lo), g(hi));
    if glo <= 0.0 || ghi >= 0.0 {
        // The bracket should straddle a down-crossing; rescan if not.
        let mut found = false;
        let mut prev = (lo, glo);
        for k in 1..=2000 {
            let p = lo + (hi - lo) * k as f64 / 2000.0;
            let gp = g(p);
            if prev.1 > 0.0 && gp <= 0.0 {
                lo = prev.0;
                hi = p;
                found = true;
                break;
            }
            prev = (p, gp);
        }
        if !found {
            return Err(Error::NoRoot(format!(
                "no partial-good-news root in ({lo}, {hi})"
            )));
        }
    }

    // Safeguarded Newton on the bracket [lo, hi] with g(lo) > 0 > g(hi).
    let mut p = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gp = g(p);
        if gp > 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let d = dg(p);
        let newton = if d != 0.0 { p - gp / d } else { f64::NAN };
        p = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(p)
}

/// The sufficient condition for one-shot resolution to be strictly
/// suboptimal under a mean-based spec with binary states:
/// `mu(1-v0) - mu(-v0) + mu'(0+) - mu'(1-v0) + mu(-1) > 0` with `v0 = pi0`.
/// An infinite marginal utility of small good news makes it hold
/// trivially.
#[derive(Debug, Clone, Copy)]
pub struct OneShotSuboptimality {
    pub holds: bool,
    pub lhs_minus_rhs: f64,
}

pub fn one_shot_suboptimal(spec: &GainLossSpec, pi0: f64) -> Result<OneShotSuboptimality> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::Domain(format!("pi0={pi0} outside [0, 1]")));
    }
    let v0 = pi0;
    let slope0 = spec.mu_deriv(0.0, Side::Right)?;
    if slope0.is_infinite() {
        return Ok(OneShotSuboptimality {
            holds: true,
            lhs_minus_rhs: f64::INFINITY,
        });
    }
    let margin = spec.mu_unchecked(1.0 - v0) - spec.mu_unchecked(-v0) + slope0
        - spec.mu_deriv(1.0 - v0, Side::Right)?
        + spec.mu_unchecked(-1.0);
    Ok(OneShotSuboptimality {
        holds: margin > 0.0,
        lhs_minus_rhs: margin,
    })
}

/// Whether the chord from `(0, f(0))` to `(q, f(q))` strictly dominates
/// `f` on the open interval `(0, pi0)`, checked on a grid with the given
/// strictness margin.
pub fn chord_dominates(f: impl Fn(f64) -> f64, pi0: f64, q: f64, n: usize, margin: f64) -> bool {
    let f0 = f(0.0);
    let fq = f(q);
    let slope = if q > 0.0 { (fq - f0) / q } else { 0.0 };
    let m = n.max(MIN_GRID);
    (1..m)
        .map(|i| pi0 * i as f64 / m as f64)
        .filter(|&p| p > 0.0 && p < pi0)
        .all(|p| f0 + slope * p - f(p) > margin)
}

/// The two-period partial-bad-news test: inconclusive bad news is strictly
/// suboptimal iff some chord from 0 to `q >= pi0` on the period-1 objective
/// dominates it on `(0, pi0)`.
pub fn chord_condition(spec: &GainLossSpec, pi0: f64, q: f64, cfg: &GridCfg) -> Result<bool> {
    if !(0.0..=1.0).contains(&pi0) || !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(
            "chord condition needs pi0, q in [0, 1]".into(),
        ));
    }
    if q < pi0 {
        return Err(Error::InvalidParams(format!(
            "chord endpoint q={q} must be at least pi0={pi0}"
        )));
    }
    let f = |p: f64| spec.mu_unchecked(p - pi0) + spec.babbling_unchecked(p);
    Ok(chord_dominates(f, pi0, q, cfg.n, 1e-10))
}
