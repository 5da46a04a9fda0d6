//! Bayes-plausible posterior trees over a binary state space, pathwise
//! expected news utility, canonical structure constructors, and scoring
//! under alternative belief-based preferences.
//!
//! A tree covers periods `0..=T`. Period 0 is the prior node; in periods
//! `1..T-1` branch probabilities per state encode the signal structure;
//! period `T` is the exogenous revelation, so terminal beliefs are 0 or 1.
//! Branch probabilities are the primitives; node beliefs are derived and
//! cached, and validation re-derives them so Bayes plausibility stays
//! checkable instead of assumed.

use serde::{Deserialize, Serialize};

use crate::gainloss::GainLossSpec;
use crate::{Error, Result};

/// Tolerance for the martingale / stored-vs-derived belief checks.
pub const BAYES_TOL: f64 = 1e-10;

/// Tolerance under which a belief counts as degenerate (0 or 1).
const DEGENERATE_TOL: f64 = 1e-9;

/// Tolerance for treating a belief change as zero when classifying paths.
const MOVE_TOL: f64 = 1e-9;

/// One outgoing message edge with its per-state send probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub child: usize,
    /// Probability of this message in the good state.
    pub prob_g: f64,
    /// Probability of this message in the bad state.
    pub prob_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub period: usize,
    /// Probability the node assigns to the good state.
    pub belief: f64,
    /// Empty for terminal nodes.
    pub children: Vec<Branch>,
}

/// A finite-depth tree of receiver beliefs with per-state branch
/// probabilities. Node ids equal their index in `nodes`; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTree {
    pub pi0: f64,
    pub horizon: usize,
    nodes: Vec<TreeNode>,
}

/// A single invariant violation, located by the node path from the root.
#[derive(Debug, Clone)]
pub struct Violation {
    pub node: usize,
    pub path: Vec<usize>,
    pub message: String,
}

/// Outcome of [`PosteriorTree::validate`]; empty iff the tree is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| format!("node {} (path {:?}): {}", v.node, v.path, v.message))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// One root-to-terminal belief path with its reach probabilities.
#[derive(Debug, Clone)]
pub struct PathEval {
    /// Beliefs at periods `0..=T`.
    pub beliefs: Vec<f64>,
    /// Unconditional reach probability.
    pub prob: f64,
    pub prob_given_g: f64,
    pub prob_given_b: f64,
}

/// Pathwise news-utility breakdown of a tree under a gain-loss spec.
#[derive(Debug, Clone)]
pub struct NewsUtility {
    pub total: f64,
    /// Expected totals conditional on the good and bad state.
    pub by_state: (f64, f64),
    pub by_path: Vec<(PathEval, f64)>,
}

/// Belief-path monotonicity classes of a structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureTag {
    OneShot,
    GgnOsb,
    GbnOsg,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureClass {
    pub tag: StructureTag,
    /// At least two strict moves in the gradual direction with positive
    /// probability.
    pub strict: bool,
}

impl PosteriorTree {
    /// Assemble a tree from raw nodes. Node ids must equal their indices
    /// and node 0 must be the root at period 0.
    pub fn from_nodes(pi0: f64, horizon: usize, nodes: Vec<TreeNode>) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi0) {
            return Err(Error::Domain(format!("pi0={pi0} outside [0, 1]")));
        }
        if horizon < 2 {
            return Err(Error::InvalidTree(format!(
                "horizon {horizon} below minimum of 2"
            )));
        }
        if nodes.is_empty() || nodes[0].period != 0 {
            return Err(Error::InvalidTree(
                "node 0 must be the period-0 root".into(),
            ));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidTree(format!(
                    "node at index {i} has id {}",
                    n.id
                )));
            }
            for b in &n.children {
                if b.child >= nodes.len() {
                    return Err(Error::InvalidTree(format!(
                        "node {i} references missing child {}",
                        b.child
                    )));
                }
            }
        }
        Ok(PosteriorTree {
            pi0,
            horizon,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// One-shot resolution: belief constant except a single jump to the
    /// state indicator at `reveal_period`.
    pub fn one_shot(pi0: f64, horizon: usize, reveal_period: usize) -> Result<Self> {
        if reveal_period < 1 || reveal_period > horizon {
            return Err(Error::InvalidParams(format!(
                "reveal period {reveal_period} outside 1..={horizon}"
            )));
        }
        let mut interior = vec![pi0; horizon.saturating_sub(1)];
        for t in reveal_period..horizon {
            // After the reveal the good-state path sits at belief 1.
            interior[t - 1] = 1.0;
        }
        Self::gradual_good_news(pi0, &interior, horizon)
    }

    /// Canonical gradual-good-news / one-shot-bad-news tree: in the good
    /// state beliefs follow `interior` (periods `1..T-1`, non-decreasing);
    /// in the bad state the path tracks the same beliefs until a single
    /// conclusive drop to 0, which can happen in any period where the good
    /// path strictly rises (and at the terminal revelation at latest).
    pub fn gradual_good_news(pi0: f64, interior: &[f64], horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::InvalidTree(format!(
                "horizon {horizon} below minimum of 2"
            )));
        }
        if interior.len() != horizon - 1 {
            return Err(Error::InvalidParams(format!(
                "need {} interior beliefs for horizon {horizon}, got {}",
                horizon - 1,
                interior.len()
            )));
        }
        let mut path = Vec::with_capacity(horizon + 1);
        path.push(pi0);
        path.extend_from_slice(interior);
        path.push(1.0);
        for w in path.windows(2) {
            if w[1] < w[0] - 1e-15 || !(0.0..=1.0).contains(&w[1]) {
                return Err(Error::InvalidParams(
                    "good-state belief path must be non-decreasing within [0, 1]".into(),
                ));
            }
        }

        let mut nodes: Vec<TreeNode> = Vec::new();
        let mut zero_chain_heads: Vec<(usize, usize)> = Vec::new(); // (node, period)
        nodes.push(TreeNode {
            id: 0,
            period: 0,
            belief: pi0,
            children: Vec::new(),
        });
        let mut cur = 0usize;
        for t in 1..=horizon {
            let p_prev = path[t - 1];
            let p_next = path[t];
            if p_prev >= 1.0 - DEGENERATE_TOL || (p_next - p_prev).abs() <= f64::EPSILON {
                // No informative signal this period.
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    period: t,
                    belief: p_prev.max(p_next),
                    children: Vec::new(),
                });
                nodes[cur].children.push(Branch {
                    child: id,
                    prob_g: 1.0,
                    prob_b: 1.0,
                });
                cur = id;
            } else {
                // Good news with probability x in the bad state, chosen so
                // that Bayes updating lands exactly on p_next.
                let x = p_prev * (1.0 - p_next) / (p_next * (1.0 - p_prev));
                let up = nodes.len();
                nodes.push(TreeNode {
                    id: up,
                    period: t,
                    belief: p_next,
                    children: Vec::new(),
                });
                let down = nodes.len();
                nodes.push(TreeNode {
                    id: down,
                    period: t,
                    belief: 0.0,
                    children: Vec::new(),
                });
                nodes[cur].children.push(Branch {
                    child: up,
                    prob_g: 1.0,
                    prob_b: x,
                });
                nodes[cur].children.push(Branch {
                    child: down,
                    prob_g: 0.0,
                    prob_b: 1.0 - x,
                });
                zero_chain_heads.push((down, t));
                cur = up;
            }
        }
        // Extend each conclusive-bad-news node to the horizon.
        for (head, t0) in zero_chain_heads {
            let mut cur = head;
            for t in t0 + 1..=horizon {
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    period: t,
                    belief: 0.0,
                    children: Vec::new(),
                });
                nodes[cur].children.push(Branch {
                    child: id,
                    prob_g: 1.0,
                    prob_b: 1.0,
                });
                cur = id;
            }
        }
        Self::from_nodes(pi0, horizon, nodes)
    }

    /// The sequential-binary process: independent signals `X_t = 1` with
    /// probability `q_t`; the good state obtains iff every signal is 1.
    /// Watching the signals in real time yields this posterior tree.
    pub fn sequential_binary(success_probs: &[f64]) -> Result<Self> {
        let t_len = success_probs.len();
        if t_len < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 signal rounds, got {t_len}"
            )));
        }
        if success_probs.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(Error::InvalidParams(
                "success probabilities must lie in (0, 1)".into(),
            ));
        }
        // Belief in the good state after t successes is the probability
        // that all remaining signals succeed.
        let mut tail = vec![1.0; t_len + 1];
        for t in (0..t_len).rev() {
            tail[t] = tail[t + 1] * success_probs[t];
        }
        Self::gradual_good_news(tail[0], &tail[1..t_len], t_len)
    }

    /// Swap the state labels: beliefs become one minus beliefs and the
    /// per-state branch probabilities trade places.
    pub fn flip_states(&self) -> PosteriorTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| TreeNode {
                id: n.id,
                period: n.period,
                belief: 1.0 - n.belief,
                children: n
                    .children
                    .iter()
                    .map(|b| Branch {
                        child: b.child,
                        prob_g: b.prob_b,
                        prob_b: b.prob_g,
                    })
                    .collect(),
            })
            .collect();
        PosteriorTree {
            pi0: 1.0 - self.pi0,
            horizon: self.horizon,
            nodes,
        }
    }

    /// Check every structural invariant, reporting all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut push = |node: usize, path: &[usize], message: String| {
            report.violations.push(Violation {
                node,
                path: path.to_vec(),
                message,
            });
        };

        if (self.root().belief - self.pi0).abs() > BAYES_TOL {
            push(
                0,
                &[0],
                format!(
                    "root belief {} does not match pi0 {}",
                    self.root().belief,
                    self.pi0
                ),
            );
        }

        // DFS from the root; unreachable nodes are ignored by evaluation
        // and flagged here.
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, vec![0])];
        while let Some((i, path)) = stack.pop() {
            seen[i] = true;
            let n = &self.nodes[i];
            if !(0.0..=1.0).contains(&n.belief) {
                push(i, &path, format!("belief {} outside [0, 1]", n.belief));
                continue;
            }
            if n.children.is_empty() {
                if n.period != self.horizon {
                    push(
                        i,
                        &path,
                        format!(
                            "terminal node at period {} before horizon {}",
                            n.period, self.horizon
                        ),
                    );
                }
                if n.belief.min(1.0 - n.belief) > DEGENERATE_TOL {
                    push(
                        i,
                        &path,
                        format!("terminal belief {} not a state indicator", n.belief),
                    );
                }
                continue;
            }
            let (mut sum_g, mut sum_b) = (0.0, 0.0);
            let mut mean_child = 0.0;
            for b in &n.children {
                let child = &self.nodes[b.child];
                if child.period != n.period + 1 {
                    push(
                        i,
                        &path,
                        format!(
                            "child {} at period {} does not follow period {}",
                            b.child, child.period, n.period
                        ),
                    );
                }
                if !(0.0..=1.0).contains(&b.prob_g) || !(0.0..=1.0).contains(&b.prob_b) {
                    push(
                        i,
                        &path,
                        format!(
                            "branch to {} has probabilities ({}, {}) outside [0, 1]",
                            b.child, b.prob_g, b.prob_b
                        ),
                    );
                }
                sum_g += b.prob_g;
                sum_b += b.prob_b;
                let w = n.belief * b.prob_g + (1.0 - n.belief) * b.prob_b;
                mean_child += w * child.belief;
                if w > BAYES_TOL {
                    let derived = n.belief * b.prob_g / w;
                    if (derived - child.belief).abs() > BAYES_TOL {
                        push(
                            i,
                            &path,
                            format!(
                                "child {} stores belief {} but branch probabilities imply {}",
                                b.child, child.belief, derived
                            ),
                        );
                    }
                }
                let mut next_path = path.clone();
                next_path.push(b.child);
                stack.push((b.child, next_path));
            }
            if (sum_g - 1.0).abs() > BAYES_TOL || (sum_b - 1.0).abs() > BAYES_TOL {
                push(
                    i,
                    &path,
                    format!("branch probabilities sum to ({sum_g}, {sum_b}) per state"),
                );
            }
            if (mean_child - n.belief).abs() > BAYES_TOL {
                push(
                    i,
                    &path,
                    format!(
                        "martingale violation: children average {} under belief {}",
                        mean_child, n.belief
                    ),
                );
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                push(i, &[], "unreachable node".into());
            }
        }
        report
    }

    /// Enumerate every root-to-terminal path with per-state reach
    /// probabilities. Trees are desk-scale, so enumeration is exhaustive.
    pub fn paths(&self) -> Vec<PathEval> {
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Vec<f64>, f64, f64)> =
            vec![(0, vec![self.nodes[0].belief], 1.0, 1.0)];
        while let Some((i, beliefs, pg, pb)) = stack.pop() {
            let n = &self.nodes[i];
            if n.children.is_empty() {
                let prob = self.pi0 * pg + (1.0 - self.pi0) * pb;
                out.push(PathEval {
                    beliefs,
                    prob,
                    prob_given_g: pg,
                    prob_given_b: pb,
                });
                continue;
            }
            for b in &n.children {
                let (npg, npb) = (pg * b.prob_g, pb * b.prob_b);
                if npg <= 0.0 && npb <= 0.0 {
                    continue;
                }
                let mut nb = beliefs.clone();
                nb.push(self.nodes[b.child].belief);
                stack.push((b.child, nb, npg, npb));
            }
        }
        out.sort_by(|a, b| a.beliefs.partial_cmp(&b.beliefs).unwrap());
        out
    }

    /// Expected news utility of the tree under a gain-loss spec, summed
    /// over `mu` of the belief changes along every path.
    pub fn expected_news_utility(&self, spec: &GainLossSpec) -> Result<NewsUtility> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidTree(report.summary()));
        }
        let mut by_path = Vec::new();
        let (mut good, mut bad) = (0.0, 0.0);
        for path in self.paths() {
            let u: f64 = path
                .beliefs
                .windows(2)
                .map(|w| spec.mu_unchecked(w[1] - w[0]))
                .sum();
            good += path.prob_given_g * u;
            bad += path.prob_given_b * u;
            by_path.push((path, u));
        }
        Ok(NewsUtility {
            total: self.pi0 * good + (1.0 - self.pi0) * bad,
            by_state: (good, bad),
            by_path,
        })
    }

    /// Classify the structure by the per-state monotonicity of its belief
    /// paths. Good-state paths are those with positive probability given
    /// the good state, and symmetrically for bad.
    pub fn classify(&self) -> Result<StructureClass> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::InvalidTree(report.summary()));
        }
        let paths = self.paths();
        let moves = |p: &PathEval| {
            let (mut ups, mut downs, mut changes) = (0usize, 0usize, 0usize);
            for w in p.beliefs.windows(2) {
                let d = w[1] - w[0];
                if d > MOVE_TOL {
                    ups += 1;
                    changes += 1;
                } else if d < -MOVE_TOL {
                    downs += 1;
                    changes += 1;
                }
            }
            (ups, downs, changes)
        };

        let mut one_shot = true;
        let mut ggn_osb = true;
        let mut gbn_osg = true;
        let (mut strict_ggn, mut strict_gbn) = (false, false);
        for p in &paths {
            let (ups, downs, changes) = moves(p);
            if (p.prob_given_g > 0.0 || p.prob_given_b > 0.0) && changes > 1 {
                one_shot = false;
            }
            if p.prob_given_g > 0.0 {
                if downs > 0 {
                    ggn_osb = false;
                }
                if ups > 1 {
                    gbn_osg = false;
                    strict_ggn = true;
                }
            }
            if p.prob_given_b > 0.0 {
                if ups > 0 {
                    gbn_osg = false;
                }
                if downs > 1 {
                    ggn_osb = false;
                    strict_gbn = true;
                }
            }
        }
        let class = if one_shot {
            StructureClass {
                tag: StructureTag::OneShot,
                strict: false,
            }
        } else if ggn_osb {
            StructureClass {
                tag: StructureTag::GgnOsb,
                strict: strict_ggn,
            }
        } else if gbn_osg {
            StructureClass {
                tag: StructureTag::GbnOsg,
                strict: strict_gbn,
            }
        } else {
            StructureClass {
                tag: StructureTag::Other,
                strict: false,
            }
        };
        Ok(class)
    }
}

/// Which state the agent prefers in the binary gradual-vs-one-shot choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatePreference {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfoChoice {
    Gradual,
    OneShot,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoComparison {
    pub choice: InfoChoice,
    /// Absolute payoff gap between the two structures.
    pub utility_gap: f64,
    pub gradual_value: f64,
    pub one_shot_value: f64,
}

/// Compare watching a sequential-binary process in real time against
/// learning the outcome at the end, for an agent whose preferred state is
/// `prefers`. Beliefs enter news utility as probabilities of the preferred
/// state.
pub fn compare_gradual_oneshot(
    spec: &GainLossSpec,
    prefers: StatePreference,
    success_probs: &[f64],
) -> Result<InfoComparison> {
    let mut gradual = PosteriorTree::sequential_binary(success_probs)?;
    if prefers == StatePreference::B {
        gradual = gradual.flip_states();
    }
    let horizon = gradual.horizon;
    let one_shot = PosteriorTree::one_shot(gradual.pi0, horizon, horizon)?;
    let g = gradual.expected_news_utility(spec)?.total;
    let o = one_shot.expected_news_utility(spec)?.total;
    let choice = if g > o {
        InfoChoice::Gradual
    } else {
        InfoChoice::OneShot
    };
    Ok(InfoComparison {
        choice,
        utility_gap: (g - o).abs(),
        gradual_value: g,
        one_shot_value: o,
    })
}

/// Increasing felicity curve used by the alternative preference models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilCurve {
    Identity,
    /// `u(x) = x^gamma` with `gamma` in (0, 1]: concave.
    Power(f64),
}

impl UtilCurve {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            UtilCurve::Identity => x,
            UtilCurve::Power(g) => x.max(0.0).powf(g),
        }
    }
}

/// Alternative belief-based preference models scored over posterior trees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AltModel {
    /// News utility with a two-part linear gain-loss curve.
    TwoPartLinear { lambda: f64 },
    /// Per-period felicity over the level of expected consumption utility.
    Anticipatory { u: UtilCurve },
    /// Felicity over the conditional expectation of squared belief moves,
    /// with state-dependent scaling weights.
    Suspense {
        u: UtilCurve,
        alpha_a: f64,
        alpha_b: f64,
    },
    /// Expected felicity over realized squared belief moves.
    Surprise {
        u: UtilCurve,
        alpha_a: f64,
        alpha_b: f64,
    },
}

/// Score a valid tree under an alternative preference model.
pub fn score_alternative_model(tree: &PosteriorTree, model: &AltModel) -> Result<f64> {
    let report = tree.validate();
    if !report.is_valid() {
        return Err(Error::InvalidTree(report.summary()));
    }
    match *model {
        AltModel::TwoPartLinear { lambda } => {
            let spec = GainLossSpec::two_part_linear(lambda)?;
            Ok(tree.expected_news_utility(&spec)?.total)
        }
        AltModel::Anticipatory { u } => {
            let mut total = 0.0;
            for p in tree.paths() {
                let inner: f64 = p.beliefs.iter().skip(1).map(|&b| u.eval(b)).sum();
                total += p.prob * inner;
            }
            Ok(total)
        }
        AltModel::Surprise {
            u,
            alpha_a,
            alpha_b,
        } => {
            let mut total = 0.0;
            for p in tree.paths() {
                let inner: f64 = p
                    .beliefs
                    .windows(2)
                    .map(|w| {
                        let d_pi = w[1] - w[0];
                        let d_rho = (1.0 - w[1]) - (1.0 - w[0]);
                        u.eval(alpha_a * d_pi * d_pi + alpha_b * d_rho * d_rho)
                    })
                    .sum();
                total += p.prob * inner;
            }
            Ok(total)
        }
        AltModel::Suspense {
            u,
            alpha_a,
            alpha_b,
        } => {
            // Sum over non-terminal nodes of reach probability times
            // u(conditional expectation of the squared next move).
            let nodes = tree.nodes();
            let mut reach = vec![0.0; nodes.len()];
            reach[0] = 1.0;
            let mut order: Vec<usize> = (0..nodes.len()).collect();
            order.sort_by_key(|&i| nodes[i].period);
            let mut total = 0.0;
            for i in order {
                let n = &nodes[i];
                if n.children.is_empty() || reach[i] <= 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for b in &n.children {
                    let cond = n.belief * b.prob_g + (1.0 - n.belief) * b.prob_b;
                    reach[b.child] += reach[i] * cond;
                    let d_pi = nodes[b.child].belief - n.belief;
                    let d_rho = (1.0 - nodes[b.child].belief) - (1.0 - n.belief);
                    inner += cond * (alpha_a * d_pi * d_pi + alpha_b * d_rho * d_rho);
                }
                total += reach[i] * u.eval(inner);
            }
            Ok(total)
        }
    }
}

/// The unconstrained-smoothing comparator: in the good state the belief
/// path rises in equal steps `x_t = pi0 + (t/T)(1 - pi0)`, ignoring Bayes
/// plausibility. Upper bound on the good-state value of any feasible tree
/// under diminishing sensitivity.
#[derive(Debug, Clone)]
pub struct RelaxedSmoothing {
    pub path: Vec<f64>,
    pub value: f64,
}

pub fn relaxed_smoothing_value(
    spec: &GainLossSpec,
    pi0: f64,
    horizon: usize,
) -> Result<RelaxedSmoothing> {
    if !(0.0..=1.0).contains(&pi0) {
        return Err(Error::Domain(format!("pi0={pi0} outside [0, 1]")));
    }
    if horizon == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    let t = horizon as f64;
    let path: Vec<f64> = (0..=horizon)
        .map(|k| pi0 + (k as f64 / t) * (1.0 - pi0))
        .collect();
    let value = t * spec.mu((1.0 - pi0) / t)?;
    Ok(RelaxedSmoothing { path, value })
}

// --- JSON wire format -----------------------------------------------------
//
// {"pi0": .., "T": .., "nodes": [{"id", "period", "children":
//   [{"id", "prob_G", "prob_B"}]}]}
//
// Beliefs are not serialized; they are re-derived from the branch
// probabilities on load. Node ids may be arbitrary unique integers; the
// root is the unique node never referenced as a child.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChildWire {
    id: u64,
    #[serde(rename = "prob_G")]
    prob_g: f64,
    #[serde(rename = "prob_B")]
    prob_b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeWire {
    id: u64,
    period: usize,
    children: Vec<ChildWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeWire {
    pi0: f64,
    #[serde(rename = "T")]
    horizon: usize,
    nodes: Vec<NodeWire>,
}

impl Serialize for PosteriorTree {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeWire {
                id: n.id as u64,
                period: n.period,
                children: n
                    .children
                    .iter()
                    .map(|b| ChildWire {
                        id: b.child as u64,
                        prob_g: b.prob_g,
                        prob_b: b.prob_b,
                    })
                    .collect(),
            })
            .collect();
        TreeWire {
            pi0: self.pi0,
            horizon: self.horizon,
            nodes,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PosteriorTree {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = TreeWire::deserialize(deserializer)?;
        PosteriorTree::from_wire(wire).map_err(D::Error::custom)
    }
}

impl PosteriorTree {
    fn from_wire(wire: TreeWire) -> Result<Self> {
        use std::collections::HashMap;
        let mut index: HashMap<u64, usize> = HashMap::new();
        for (i, n) in wire.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::InvalidTree(format!("duplicate node id {}", n.id)));
            }
        }
        let mut referenced = vec![false; wire.nodes.len()];
        for n in &wire.nodes {
            for c in &n.children {
                let &i = index
                    .get(&c.id)
                    .ok_or_else(|| Error::InvalidTree(format!("missing child id {}", c.id)))?;
                referenced[i] = true;
            }
        }
        let roots: Vec<usize> = (0..wire.nodes.len()).filter(|&i| !referenced[i]).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidTree(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        };

        // Re-index so the root is node 0 and ids equal indices, walking
        // breadth-first for a stable order.
        let mut order = vec![root];
        let mut pos = 0;
        while pos < order.len() {
            let cur = order[pos];
            pos += 1;
            for c in &wire.nodes[cur].children {
                order.push(index[&c.id]);
            }
        }
        if order.len() != wire.nodes.len() {
            return Err(Error::InvalidTree("disconnected nodes present".into()));
        }
        let mut new_id = vec![0usize; wire.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }

        // Derive beliefs top-down from the branch probabilities.
        let mut beliefs = vec![f64::NAN; wire.nodes.len()];
        beliefs[root] = wire.pi0;
        for &i in &order {
            let p = beliefs[i];
            for c in &wire.nodes[i].children {
                let j = index[&c.id];
                let w = p * c.prob_g + (1.0 - p) * c.prob_b;
                beliefs[j] = if w > 0.0 { p * c.prob_g / w } else { p };
            }
        }

        let nodes: Vec<TreeNode> = order
            .iter()
            .map(|&old| TreeNode {
                id: new_id[old],
                period: wire.nodes[old].period,
                belief: beliefs[old],
                children: wire.nodes[old]
                    .children
                    .iter()
                    .map(|c| Branch {
                        child: new_id[index[&c.id]],
                        prob_g: c.prob_g,
                        prob_b: c.prob_b,
                    })
                    .collect(),
            })
            .collect();
        PosteriorTree::from_nodes(wire.pi0, wire.horizon, nodes)
    }
}
