//! Equilibrium objects of the cheap-talk game without commitment:
//! bad-state indifference sets `P*`, deterministic gradual-good-news
//! ladders and their payoffs, babbling-uniqueness conditions, and the
//! loss-aversion threshold at which informative equilibria appear.
//!
//! The indifference function is `D(x) = N_B(x; pi) - N_B(0; pi)`:
//! the sender's bad-state gain from inducing belief `x` today over
//! conceding immediately. `P*(pi)` collects its roots on `(pi, 1]`.

use crate::gainloss::{GainLossSpec, MuPosSpec, Side};
use crate::{Error, Result};

/// Panels used by the root scan over `(pi, 1]`.
const SCAN_PANELS: usize = 10_000;

/// Ladder beliefs must satisfy the indifference within this tolerance.
pub const LADDER_TOL: f64 = 1e-9;

/// A root of the bad-state indifference condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PStarRoot {
    pub belief: f64,
    /// Tangency roots (no sign change) are numerically fragile and flagged.
    pub tangent: bool,
}

/// An increasing chain of intermediate beliefs `pi0 < q(1) < ... < q(J) < 1`
/// supporting a deterministic gradual-good-news equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct GgnLadder {
    pub pi0: f64,
    pub beliefs: Vec<f64>,
}

impl GgnLadder {
    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    /// Re-verify the chaining indifference to [`LADDER_TOL`].
    pub fn verify(&self, spec: &GainLossSpec) -> Result<()> {
        let mut prev = self.pi0;
        for (j, &q) in self.beliefs.iter().enumerate() {
            if !(q > prev && q < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "ladder belief {j} = {q} not in ({prev}, 1)"
                )));
            }
            let d = spec.n_bad(q, prev)? - spec.n_bad(0.0, prev)?;
            if d.abs() > LADDER_TOL {
                return Err(Error::InvalidParams(format!(
                    "ladder belief {j} = {q} misses indifference by {d:.3e}"
                )));
            }
            prev = q;
        }
        Ok(())
    }

    /// Consecutive belief increments.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = self.pi0;
        self.beliefs
            .iter()
            .map(|&q| {
                let d = q - prev;
                prev = q;
                d
            })
            .collect()
    }
}

/// Payoff decomposition of a GGN equilibrium. Along every bad-state path
/// the indifference telescopes, so the bad-state value is exactly
/// `mu(-pi0)` regardless of when the concession happens.
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumPayoff {
    pub value_good: f64,
    pub value_bad: f64,
    pub total: f64,
}

/// All indifference points above `pi`: roots of `D` on `(pi, 1]`.
/// The quadratic family uses its closed form (a single candidate from the
/// linear ladder map); everything else is a scan-plus-bisection, which is
/// also exposed directly as [`p_star_scan`] for cross-checking.
pub fn p_star(spec: &GainLossSpec, pi: f64, tol: f64) -> Result<Vec<PStarRoot>> {
    if !(0.0 < pi && pi < 1.0) {
        return Err(Error::Domain(format!("pi={pi} outside (0, 1)")));
    }
    if let GainLossSpec::Quadratic {
        alpha_p,
        beta_p,
        alpha_n,
        beta_n,
    } = *spec
    {
        if beta_p != beta_n {
            let x = pi * (beta_p + beta_n) / (beta_p - beta_n)
                - (alpha_n - alpha_p) / (beta_p - beta_n);
            if x > pi && x < 1.0 {
                // Guard the fast path by re-verifying the indifference.
                let d = spec.n_bad(x, pi)? - spec.n_bad(0.0, pi)?;
                if d.abs() <= LADDER_TOL {
                    return Ok(vec![PStarRoot {
                        belief: x,
                        tangent: false,
                    }]);
                }
            }
            return Ok(Vec::new());
        }
    }
    p_star_scan(spec, pi, tol)
}

/// Sign-scan over uniform panels on `(pi, 1]` with bisection refinement;
/// local extrema that touch zero within tolerance are reported as tangent
/// roots.
pub fn p_star_scan(spec: &GainLossSpec, pi: f64, tol: f64) -> Result<Vec<PStarRoot>> {
    if !(0.0 < pi && pi < 1.0) {
        return Err(Error::Domain(format!("pi={pi} outside (0, 1)")));
    }
    let base = spec.n_bad(0.0, pi)?;
    let d = |x: f64| spec.mu_unchecked(x - pi) + spec.mu_unchecked(-x) - base;
    let lo = pi + 1e-9;
    let span = 1.0 - lo;
    if span <= 0.0 {
        return Ok(Vec::new());
    }
    let xs: Vec<f64> = (0..=SCAN_PANELS)
        .map(|i| lo + span * i as f64 / SCAN_PANELS as f64)
        .collect();
    let ds: Vec<f64> = xs.iter().map(|&x| d(x)).collect();

    let mut roots: Vec<PStarRoot> = Vec::new();
    for i in 0..SCAN_PANELS {
        if ds[i] == 0.0 {
            roots.push(PStarRoot {
                belief: xs[i],
                tangent: false,
            });
            continue;
        }
        if ds[i] * ds[i + 1] < 0.0 {
            let (mut a, mut b) = (xs[i], xs[i + 1]);
            let mut da = ds[i];
            while b - a > tol {
                let m = 0.5 * (a + b);
                let dm = d(m);
                if da * dm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    da = dm;
                }
            }
            roots.push(PStarRoot {
                belief: 0.5 * (a + b),
                tangent: false,
            });
        } else if i > 0 {
            // Interior extremum pinched against zero: tangency candidate.
            let is_min = ds[i] < ds[i - 1] && ds[i] < ds[i + 1] && ds[i - 1] > 0.0;
            let is_max = ds[i] > ds[i - 1] && ds[i] > ds[i + 1] && ds[i - 1] < 0.0;
            if (is_min || is_max) && ds[i].abs() <= 1e-10 {
                roots.push(PStarRoot {
                    belief: xs[i],
                    tangent: true,
                });
            }
        }
    }
    if ds[SCAN_PANELS].abs() <= 1e-14 && roots.iter().all(|r| (r.belief - 1.0).abs() > tol) {
        roots.push(PStarRoot {
            belief: 1.0,
            tangent: false,
        });
    }
    Ok(roots)
}

/// Depth-first chaining of `p_star` from the prior up to `horizon - 1`
/// intermediate beliefs, prefix-closed and including the empty (babbling)
/// ladder. Tangent roots are skipped: the indifference there is fragile.
/// Deterministic order: by length, then lexicographically by beliefs.
pub fn ggn_enumerate(
    spec: &GainLossSpec,
    pi0: f64,
    horizon: usize,
    max_ladders: usize,
) -> Result<Vec<GgnLadder>> {
    if horizon < 2 {
        return Err(Error::InvalidParams(format!(
            "horizon {horizon} below minimum of 2"
        )));
    }
    enumerate_chains(spec, pi0, horizon - 1, max_ladders)
}

fn enumerate_chains(
    spec: &GainLossSpec,
    pi0: f64,
    max_depth: usize,
    max_ladders: usize,
) -> Result<Vec<GgnLadder>> {
    if !(0.0 < pi0 && pi0 < 1.0) {
        return Err(Error::Domain(format!("pi0={pi0} outside (0, 1)")));
    }
    let mut out = vec![GgnLadder {
        pi0,
        beliefs: Vec::new(),
    }];
    let mut stack: Vec<Vec<f64>> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() >= max_depth || out.len() >= max_ladders {
            continue;
        }
        let from = *prefix.last().unwrap_or(&pi0);
        let mut nexts: Vec<f64> = p_star(spec, from, 1e-12)?
            .into_iter()
            .filter(|r| !r.tangent && r.belief < 1.0 - 1e-12 && r.belief > from)
            .map(|r| r.belief)
            .collect();
        nexts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for q in nexts {
            let mut chain = prefix.clone();
            chain.push(q);
            out.push(GgnLadder {
                pi0,
                beliefs: chain.clone(),
            });
            stack.push(chain);
            if out.len() >= max_ladders {
                break;
            }
        }
    }
    out.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.beliefs.partial_cmp(&b.beliefs).unwrap())
    });
    Ok(out)
}

/// Equilibrium payoff of a GGN ladder: the good state walks the whole
/// ladder then hears the terminal confirmation; the bad state is worth
/// exactly the immediate-concession value by the telescoping indifference.
pub fn ggn_payoff(spec: &GainLossSpec, ladder: &GgnLadder) -> Result<EquilibriumPayoff> {
    if !(0.0..=1.0).contains(&ladder.pi0) {
        return Err(Error::Domain(format!("pi0={} outside [0, 1]", ladder.pi0)));
    }
    ladder.verify(spec)?;
    let mut value_good = 0.0;
    let mut prev = ladder.pi0;
    for &q in &ladder.beliefs {
        value_good += spec.mu_unchecked(q - prev);
        prev = q;
    }
    value_good += spec.mu_unchecked(1.0 - prev);
    let value_bad = spec.mu_unchecked(-ladder.pi0);
    Ok(EquilibriumPayoff {
        value_good,
        value_bad,
        total: ladder.pi0 * value_good + (1.0 - ladder.pi0) * value_bad,
    })
}

/// Why babbling is (or is not) the unique equilibrium payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BabblingVerdict {
    /// Unique for every horizon: `mu` symmetric with concave gains.
    UniqueSymmetric,
    /// Unique in the two-period game: marginal-utility ratio condition
    /// `min_z mu'(z)/mu'(-(pi0+z)) > 1` holds.
    UniqueDerivativeRatio,
    /// Unique in the two-period game: lambda-scaled bound
    /// `lambda < min_z base'(z)/base'(pi0+z)` holds.
    UniqueLambdaBound,
    /// An indifference point exists, so a non-babbling GGN equilibrium
    /// exists; the witness is its intermediate belief.
    NotUnique { witness: f64 },
    /// No sufficient condition applies and no witness was found.
    Unknown,
}

/// Test the known sufficient conditions for babbling uniqueness, falling
/// back to searching for a witness equilibrium.
pub fn babbling_unique(spec: &GainLossSpec, pi0: f64) -> Result<BabblingVerdict> {
    if !(0.0 < pi0 && pi0 < 1.0) {
        return Err(Error::Domain(format!("pi0={pi0} outside (0, 1)")));
    }
    let shape = spec.check_shape();
    if spec.is_symmetric() && shape.diminishing_sensitivity {
        return Ok(BabblingVerdict::UniqueSymmetric);
    }

    if let GainLossSpec::LambdaScaled { base, lambda } = *spec {
        let bound = min_over_grid(|z| ratio_or_inf(base.deriv(z), base.deriv(pi0 + z)), pi0);
        if lambda < bound {
            return Ok(BabblingVerdict::UniqueLambdaBound);
        }
    } else if shape.greater_sensitivity_to_losses {
        let bound = min_over_grid(
            |z| {
                let num = spec.mu_deriv(z, Side::Right).unwrap_or(f64::INFINITY);
                let den = spec
                    .mu_deriv(-(pi0 + z), Side::Left)
                    .unwrap_or(f64::INFINITY);
                ratio_or_inf(num, den)
            },
            pi0,
        );
        if bound > 1.0 {
            return Ok(BabblingVerdict::UniqueDerivativeRatio);
        }
    }

    let roots = p_star(spec, pi0, 1e-12)?;
    if let Some(r) = roots.iter().find(|r| !r.tangent) {
        return Ok(BabblingVerdict::NotUnique { witness: r.belief });
    }
    Ok(BabblingVerdict::Unknown)
}

fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if num.is_infinite() && den.is_infinite() {
        // Both slopes blow up at the same rate only for z = 0 with
        // pi0 = 0, which is outside the domain; treat as large.
        f64::INFINITY
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn min_over_grid(f: impl Fn(f64) -> f64, pi0: f64) -> f64 {
    let n = 4000;
    let hi = 1.0 - pi0;
    (0..=n)
        .map(|i| f(hi * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest loss-aversion scale at which the indifference set becomes
/// non-empty for a lambda-scaled family, by bisection on
/// `min_x D(x; lambda) <= 0`. Requires a base with infinite marginal
/// utility at zero, which pins the indifference point interior.
pub fn lambda_threshold(base: &MuPosSpec, pi0: f64, tol: f64) -> Result<f64> {
    base.validate()?;
    if !(0.0 < pi0 && pi0 < 1.0) {
        return Err(Error::Domain(format!("pi0={pi0} outside (0, 1)")));
    }
    if !base.infinite_slope_at_zero() {
        return Err(Error::InvalidParams(
            "lambda threshold needs a base with infinite slope at zero".into(),
        ));
    }
    let min_d = |lambda: f64| -> f64 {
        let n = 4000;
        let mut m = f64::INFINITY;
        for i in 1..=n {
            let x = pi0 + (1.0 - pi0) * i as f64 / n as f64;
            let d = base.eval(x - pi0) - lambda * (base.eval(x) - base.eval(pi0));
            m = m.min(d);
        }
        m
    };
    if min_d(1.0) <= 0.0 {
        return Ok(1.0);
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut guard = 0;
    while min_d(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NoRoot(
                "indifference set stays empty for any finite lambda".into(),
            ));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if min_d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Highest total payoff over the enumerated GGN ladders, ties broken
/// toward shorter ladders.
pub fn best_ggn_payoff(
    spec: &GainLossSpec,
    pi0: f64,
    horizon: usize,
) -> Result<(EquilibriumPayoff, GgnLadder)> {
    let ladders = ggn_enumerate(spec, pi0, horizon, 10_000)?;
    let mut best: Option<(EquilibriumPayoff, GgnLadder)> = None;
    for ladder in ladders {
        let payoff = ggn_payoff(spec, &ladder)?;
        let better = match &best {
            None => true,
            Some((bp, bl)) => {
                payoff.total > bp.total + 1e-15
                    || (payoff.total > bp.total - 1e-15 && ladder.len() < bl.len())
            }
        };
        if better {
            best = Some((payoff, ladder));
        }
    }
    best.ok_or_else(|| Error::NoRoot("no ladder enumerated".into()))
}

/// Whether consecutive ladder increments are strictly increasing.
/// Needs at least two increments to be meaningful.
pub fn increasing_increments(ladder: &GgnLadder) -> Result<bool> {
    if ladder.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 intermediate beliefs, got {}",
            ladder.len()
        )));
    }
    let inc = ladder.increments();
    Ok(inc.windows(2).all(|w| w[1] > w[0]))
}

/// Loss-aversion level above which winning a consumption prize with
/// probability `p` (fully revealed one period before consumption) is worse
/// than a sure loss, under square-root news utility:
/// `sqrt(p)*(1 + sqrt(1-p))/(1-p)`.
pub fn dominated_lottery_threshold(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Domain(format!("p={p} outside (0, 1)")));
    }
    Ok(p.sqrt() * (1.0 + (1.0 - p).sqrt()) / (1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad_ladder_spec() -> GainLossSpec {
        GainLossSpec::quadratic(2.0, 1.0, 2.1, 0.2).unwrap()
    }

    /// For sqrt gains scaled by lambda, the indifference point above pi
    /// is pi*((l^2+1)/(l^2-1))^2 whenever interior: an independent oracle
    /// for the scan.
    fn sqrt_root_oracle(lambda: f64, pi: f64) -> Option<f64> {
        let r = (lambda * lambda + 1.0) / (lambda * lambda - 1.0);
        let x = pi * r * r;
        (x < 1.0).then_some(x)
    }

    #[test]
    fn p_star_empty_for_symmetric() {
        let s = GainLossSpec::sqrt_scaled(1.0).unwrap();
        for pi in [0.2, 0.5, 0.8] {
            assert!(p_star(&s, pi, 1e-12).unwrap().is_empty());
        }
    }

    #[test]
    fn p_star_quadratic_closed_form() {
        let s = quad_ladder_spec();
        let roots = p_star(&s, 1.0 / 3.0, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].belief, 0.375, epsilon = 1e-12);

        // Agreement with the generic scan.
        let scanned = p_star_scan(&s, 1.0 / 3.0, 1e-12).unwrap();
        assert_eq!(scanned.len(), 1);
        assert!((scanned[0].belief - 0.375).abs() < 1e-10);
    }

    #[test]
    fn p_star_sqrt_scaled_matches_oracle() {
        for (lambda, pi) in [(3.0, 0.5), (2.5, 0.5), (3.0, 0.3), (4.0, 0.2)] {
            let s = GainLossSpec::sqrt_scaled(lambda).unwrap();
            let roots = p_star(&s, pi, 1e-12).unwrap();
            let oracle = sqrt_root_oracle(lambda, pi).unwrap();
            assert_eq!(roots.len(), 1, "lambda={lambda}, pi={pi}");
            assert!(
                (roots[0].belief - oracle).abs() < 1e-9,
                "lambda={lambda}, pi={pi}: {} vs {oracle}",
                roots[0].belief
            );
        }
        // lambda = 3, pi = 1/2: the root is exactly 25/32.
        let s = GainLossSpec::sqrt_scaled(3.0).unwrap();
        let r = p_star(&s, 0.5, 1e-12).unwrap();
        assert!((r[0].belief - 0.78125).abs() < 1e-10);
    }

    #[test]
    fn p_star_empty_below_threshold() {
        let s = GainLossSpec::sqrt_scaled(1.4).unwrap();
        assert!(p_star(&s, 0.5, 1e-12).unwrap().is_empty());
        let s = GainLossSpec::sqrt_scaled(2.5).unwrap();
        assert!(!p_star(&s, 0.5, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn ggn_enumeration_reference_chain() {
        let s = quad_ladder_spec();
        let ladders = ggn_enumerate(&s, 1.0 / 3.0, 7, 1000).unwrap();
        // Prefix closure of the maximal 5-belief chain plus babbling.
        assert_eq!(ladders.len(), 6);
        let longest = ladders.last().unwrap();
        let expected = [0.375, 0.4375, 0.53125, 0.671875, 0.8828125];
        assert_eq!(longest.len(), 5);
        for (got, want) in longest.beliefs.iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
        longest.verify(&s).unwrap();
        assert!(increasing_increments(longest).unwrap());

        // The chain length is capped by the horizon.
        let shorter = ggn_enumerate(&s, 1.0 / 3.0, 3, 1000).unwrap();
        assert_eq!(shorter.last().unwrap().len(), 2);

        // And identical for every horizon beyond the uniform bound.
        for t in [6, 8, 12] {
            let l = ggn_enumerate(&s, 1.0 / 3.0, t, 1000).unwrap();
            assert_eq!(l.last().unwrap().len(), 5, "horizon {t}");
        }
    }

    #[test]
    fn ggn_only_babbling_for_symmetric() {
        let s = GainLossSpec::sqrt_scaled(1.0).unwrap();
        let ladders = ggn_enumerate(&s, 0.5, 6, 1000).unwrap();
        assert_eq!(ladders.len(), 1);
        assert!(ladders[0].is_empty());
    }

    #[test]
    fn ggn_short_ladders_when_loss_curvature_dominates() {
        // beta_n > beta_p: the ladder map has negative slope, so chains
        // stop after one step.
        let s = GainLossSpec::quadratic(2.0, 1.0, 2.1, 1.5).unwrap();
        let ladders = ggn_enumerate(&s, 0.02, 8, 1000).unwrap();
        let max_len = ladders.iter().map(|l| l.len()).max().unwrap();
        assert_eq!(max_len, 1);
    }

    #[test]
    fn ggn_payoff_decomposition() {
        let s = GainLossSpec::sqrt_scaled(3.0).unwrap();
        // Babbling ladder decomposes into the babbling payoff.
        let empty = GgnLadder {
            pi0: 0.5,
            beliefs: vec![],
        };
        let p = ggn_payoff(&s, &empty).unwrap();
        assert_relative_eq!(p.value_good, s.mu(0.5).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(p.value_bad, s.mu(-0.5).unwrap(), epsilon = 1e-15);
        assert_relative_eq!(p.total, s.babbling_payoff(0.5).unwrap(), epsilon = 1e-15);

        // One-step ladder at the exact indifference point 25/32.
        let ladder = GgnLadder {
            pi0: 0.5,
            beliefs: vec![0.78125],
        };
        let p = ggn_payoff(&s, &ladder).unwrap();
        assert_relative_eq!(
            p.value_good,
            0.28125f64.sqrt() + 0.21875f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(p.value_good > s.mu(0.5).unwrap());
        assert_relative_eq!(p.value_bad, -3.0 * 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(p.total, -0.561_641_542_161_494_5, epsilon = 1e-9);

        // Any valid non-empty ladder beats babbling in total under
        // diminishing sensitivity.
        assert!(p.total > s.babbling_payoff(0.5).unwrap());
    }

    #[test]
    fn ggn_payoff_rejects_invalid_ladder() {
        let s = GainLossSpec::sqrt_scaled(3.0).unwrap();
        let bad = GgnLadder {
            pi0: 0.5,
            beliefs: vec![0.7],
        };
        assert!(ggn_payoff(&s, &bad).is_err());
    }

    #[test]
    fn telescoping_holds_at_every_truncation() {
        let s = quad_ladder_spec();
        let ladders = ggn_enumerate(&s, 1.0 / 3.0, 7, 1000).unwrap();
        let longest = ladders.last().unwrap();
        // Bad-state path pi0 -> q1 -> ... -> qj -> 0 is worth mu(-pi0)
        // for every truncation point.
        for j in 0..=longest.len() {
            let mut value = 0.0;
            let mut prev = longest.pi0;
            for &q in &longest.beliefs[..j] {
                value += s.mu(q - prev).unwrap();
                prev = q;
            }
            value += s.mu(-prev).unwrap();
            assert_relative_eq!(value, s.mu(-longest.pi0).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn good_state_deviation_is_dominated() {
        // mu(-q) + mu(1) < mu(1-q) along ladder beliefs under weak loss
        // aversion: conceding in the good state is never profitable.
        let s = quad_ladder_spec();
        let ladders = ggn_enumerate(&s, 1.0 / 3.0, 7, 1000).unwrap();
        for q in &ladders.last().unwrap().beliefs {
            let deviate = s.mu(-q).unwrap() + s.mu(1.0).unwrap();
            let stay = s.mu(1.0 - q).unwrap();
            assert!(deviate < stay);
        }
    }

    #[test]
    fn babbling_uniqueness_verdicts() {
        let low = GainLossSpec::sqrt_scaled(1.3).unwrap();
        assert_eq!(
            babbling_unique(&low, 0.5).unwrap(),
            BabblingVerdict::UniqueLambdaBound
        );

        let high = GainLossSpec::sqrt_scaled(3.0).unwrap();
        match babbling_unique(&high, 0.5).unwrap() {
            BabblingVerdict::NotUnique { witness } => {
                assert!((witness - 0.78125).abs() < 1e-9)
            }
            other => panic!("expected witness, got {other:?}"),
        }

        let sym = GainLossSpec::quadratic(2.0, 0.9, 2.0, 0.9).unwrap();
        assert_eq!(
            babbling_unique(&sym, 0.3).unwrap(),
            BabblingVerdict::UniqueSymmetric
        );

        // Between the ratio bound and the threshold the theory is silent.
        let mid = GainLossSpec::sqrt_scaled(1.9).unwrap();
        assert_eq!(
            babbling_unique(&mid, 0.5).unwrap(),
            BabblingVerdict::Unknown
        );

        // Asymmetric quadratic with greater sensitivity to losses and a
        // small kink: ratio condition applies.
        let q = GainLossSpec::quadratic(2.0, 1.0, 2.05, 1.0).unwrap();
        assert_eq!(
            babbling_unique(&q, 0.5).unwrap(),
            BabblingVerdict::UniqueDerivativeRatio
        );
    }

    #[test]
    fn ratio_bound_implies_empty_p_star() {
        // Consistency: whenever the lambda bound certifies uniqueness the
        // indifference set is indeed empty.
        for lambda in [1.05, 1.2, 1.35] {
            for pi0 in [0.3, 0.5, 0.7] {
                let base = MuPosSpec::Sqrt;
                let bound = super::min_over_grid(
                    |z| super::ratio_or_inf(base.deriv(z), base.deriv(pi0 + z)),
                    pi0,
                );
                if lambda < bound {
                    let s = GainLossSpec::sqrt_scaled(lambda).unwrap();
                    assert!(
                        p_star(&s, pi0, 1e-12).unwrap().is_empty(),
                        "lambda={lambda}, pi0={pi0}"
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_threshold_reference_values() {
        let t = lambda_threshold(&MuPosSpec::Sqrt, 0.5, 1e-9).unwrap();
        assert_relative_eq!(t, 1.0 + 2f64.sqrt(), epsilon = 1e-6);
        // Boundary identity: base(1-pi0)/(base(1)-base(pi0)).
        let t25 = lambda_threshold(&MuPosSpec::Sqrt, 0.25, 1e-9).unwrap();
        assert_relative_eq!(t25, 0.75f64.sqrt() / 0.5, epsilon = 1e-6);
        assert_relative_eq!(t25, 1.732_050_807_568_877_2, epsilon = 1e-6);

        // Diverges as the prior approaches certainty of the good state.
        let t99 = lambda_threshold(&MuPosSpec::Sqrt, 0.999, 1e-6).unwrap();
        assert!(t99 > 50.0);
        assert!(t99 > lambda_threshold(&MuPosSpec::Sqrt, 0.9, 1e-6).unwrap());

        // Finite-slope bases are rejected.
        assert!(lambda_threshold(
            &MuPosSpec::QuadraticPos {
                alpha: 2.0,
                beta: 1.0
            },
            0.5,
            1e-9
        )
        .is_err());
    }

    #[test]
    fn threshold_splits_empty_from_nonempty() {
        let t = lambda_threshold(&MuPosSpec::Sqrt, 0.5, 1e-9).unwrap();
        let below = GainLossSpec::sqrt_scaled(t - 1e-3).unwrap();
        let above = GainLossSpec::sqrt_scaled(t + 1e-3).unwrap();
        assert!(p_star(&below, 0.5, 1e-12).unwrap().is_empty());
        assert!(!p_star(&above, 0.5, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn best_ggn_payoff_jumps_at_threshold() {
        // Below the threshold only babbling exists; just above it the
        // informative equilibrium strictly improves, producing the
        // non-monotonicity of the highest payoff in lambda.
        let s240 = GainLossSpec::sqrt_scaled(2.40).unwrap();
        let (p240, l240) = best_ggn_payoff(&s240, 0.5, 2).unwrap();
        assert!(l240.is_empty());
        assert_relative_eq!(
            p240.total,
            s240.babbling_payoff(0.5).unwrap(),
            epsilon = 1e-12
        );

        let s243 = GainLossSpec::sqrt_scaled(2.43).unwrap();
        let (p243, l243) = best_ggn_payoff(&s243, 0.5, 2).unwrap();
        assert_eq!(l243.len(), 1);
        assert!(p243.total > s243.babbling_payoff(0.5).unwrap() + 1e-6);

        let s15 = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let (p15, _) = best_ggn_payoff(&s15, 0.5, 2).unwrap();
        // Falling, then jumping up: non-monotone in lambda.
        assert!(p15.total > p240.total);
        assert!(p243.total > p240.total);
    }

    #[test]
    fn best_ggn_payoff_reference_value() {
        let s = GainLossSpec::sqrt_scaled(3.0).unwrap();
        let (p, ladder) = best_ggn_payoff(&s, 0.5, 2).unwrap();
        assert_eq!(ladder.len(), 1);
        assert_relative_eq!(p.total, -0.561_641_542_161_494_5, epsilon = 1e-9);
    }

    #[test]
    fn increments_grow_for_power_family_ladders() {
        // Power news utility with matching exponents keeps chaining until
        // the ladder leaves the unit interval; increments must grow.
        let s = GainLossSpec::power(0.5, 0.5, 3.0).unwrap();
        let ladders = ggn_enumerate(&s, 0.3, 8, 1000).unwrap();
        let longest = ladders.last().unwrap();
        assert!(longest.len() >= 2);
        assert!(increasing_increments(longest).unwrap());

        let synthetic = GgnLadder {
            pi0: 0.3,
            beliefs: vec![0.4, 0.5, 0.55],
        };
        assert!(!increasing_increments(&synthetic).unwrap());
        let short = GgnLadder {
            pi0: 0.3,
            beliefs: vec![0.4],
        };
        assert!(increasing_increments(&short).is_err());
    }

    #[test]
    fn dominated_lottery_threshold_values() {
        assert_relative_eq!(
            dominated_lottery_threshold(0.5).unwrap(),
            2.414_213_562_373_095,
            epsilon = 1e-12
        );
        // Vanishes as the winning probability does.
        assert!(dominated_lottery_threshold(1e-6).unwrap() < 3e-3);
        assert!(dominated_lottery_threshold(0.0).is_err());

        // Just above the threshold the sure loss really is preferred:
        // p + p*sqrt(1-p) - lambda*(1-p)*sqrt(p) < 0.
        for p in [0.2, 0.5, 0.8] {
            let lambda = dominated_lottery_threshold(p).unwrap() + 0.01;
            let lottery = p + p * (1.0 - p).sqrt() - lambda * (1.0 - p) * p.sqrt();
            assert!(lottery < 0.0);
            let lambda_low = dominated_lottery_threshold(p).unwrap() - 0.01;
            let lottery = p + p * (1.0 - p).sqrt() - lambda_low * (1.0 - p) * p.sqrt();
            assert!(lottery > 0.0);
        }
    }
}
