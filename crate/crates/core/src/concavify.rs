//! Concave envelopes of sampled functions on [0, 1] and the supporting
//! two-point splits used by the information-design solvers.
//!
//! The envelope is the upper concave hull of the sample points, computed
//! by a monotone-chain scan. `support_at` extracts, for an evaluation
//! point, either a single supporting vertex (no information released) or
//! the two hull points bracketing it together with the mean-preserving
//! mixing weights.

use crate::{Error, Result};

/// Relative tolerance for treating three hull points as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Tolerance for "the function already touches its envelope here".
const ON_HULL_TOL: f64 = 1e-11;

/// Function values sampled on a grid over [0, 1].
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    /// `grid` must be strictly increasing, span exactly [0, 1], and match
    /// `values` in length; all values must be finite.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParams(format!(
                "grid has {} points but values has {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::GridTooCoarse(grid.len(), 2));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::InvalidParams(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("grid not strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite function value".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Sample a closure on a uniform grid of `n` points.
    pub fn from_fn(f: impl Fn(f64) -> f64, n: usize) -> Result<Self> {
        let n = n.max(2);
        let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Where the envelope is supported at an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// The point itself supports the envelope: release no information.
    Point(f64),
    /// Mean-preserving split onto the two bracketing hull vertices with
    /// Bayes weights `w_lo = (hi - x)/(hi - lo)`, `w_hi = (x - lo)/(hi - lo)`.
    Pair {
        lo: f64,
        hi: f64,
        w_lo: f64,
        w_hi: f64,
    },
}

impl Support {
    /// Supporting beliefs with their weights.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match *self {
            Support::Point(x) => vec![(x, 1.0)],
            Support::Pair { lo, hi, w_lo, w_hi } => vec![(lo, w_lo), (hi, w_hi)],
        }
    }

    pub fn mean(&self) -> f64 {
        self.points().iter().map(|(q, w)| q * w).sum()
    }
}

/// Upper concave hull of a sampled function, with a piecewise-linear
/// evaluator and per-grid-point vertex flags.
#[derive(Debug, Clone)]
pub struct Envelope {
    hull_x: Vec<f64>,
    hull_y: Vec<f64>,
    vertex_mask: Vec<bool>,
}

impl Envelope {
    pub fn hull_x(&self) -> &[f64] {
        &self.hull_x
    }

    pub fn hull_y(&self) -> &[f64] {
        &self.hull_y
    }

    /// Whether grid point `i` of the source samples is a hull vertex.
    pub fn is_vertex(&self, i: usize) -> bool {
        self.vertex_mask[i]
    }

    /// Envelope value at `x` in [0, 1] by linear interpolation on the hull.
    pub fn value_at(&self, x: f64) -> f64 {
        let x = x.clamp(self.hull_x[0], *self.hull_x.last().unwrap());
        let k = match self.hull_x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return self.hull_y[i],
            Err(i) => i.max(1).min(self.hull_x.len() - 1),
        };
        let (x0, x1) = (self.hull_x[k - 1], self.hull_x[k]);
        let (y0, y1) = (self.hull_y[k - 1], self.hull_y[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Supporting split at `x`: the point itself if it is a hull vertex
    /// (within a snap tolerance), otherwise the bracketing hull segment
    /// with exact mean-preserving weights.
    pub fn support_at(&self, x: f64) -> Result<Support> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("support point {x} outside [0, 1]")));
        }
        let k = match self.hull_x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(_) => return Ok(Support::Point(x)),
            Err(i) => i.max(1).min(self.hull_x.len() - 1),
        };
        let (lo, hi) = (self.hull_x[k - 1], self.hull_x[k]);
        let snap = 1e-12 * (1.0 + x.abs());
        if (x - lo).abs() <= snap || (hi - x).abs() <= snap {
            return Ok(Support::Point(x));
        }
        let w_lo = (hi - x) / (hi - lo);
        let w_hi = (x - lo) / (hi - lo);
        Ok(Support::Pair { lo, hi, w_lo, w_hi })
    }
}

/// Upper concave hull via a monotone-chain scan, O(n) on the sorted grid.
/// Collinear interior points are dropped so only extreme points remain.
pub fn concave_envelope(f: &SampledFunction) -> Result<Envelope> {
    let (xs, ys) = (f.grid(), f.values());
    let y_scale = ys.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut stack: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while stack.len() >= 2 {
            let a = stack[stack.len() - 2];
            let b = stack[stack.len() - 1];
            // cross > 0 means point i lies above segment (a, b): b is not
            // on the upper hull. Collinear-within-tolerance also pops.
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross >= -COLLINEAR_TOL * (xs[i] - xs[a]).max(1e-300) * y_scale {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(i);
    }
    let mut vertex_mask = vec![false; xs.len()];
    for &i in &stack {
        vertex_mask[i] = true;
    }
    Ok(Envelope {
        hull_x: stack.iter().map(|&i| xs[i]).collect(),
        hull_y: stack.iter().map(|&i| ys[i]).collect(),
        vertex_mask,
    })
}

/// Grid configuration for envelope-based solvers.
#[derive(Debug, Clone, Copy)]
pub struct GridCfg {
    /// Number of uniform grid points on [0, 1].
    pub n: usize,
    /// Whether to re-hull once with extra points around the support
    /// vertices bracketing the query point.
    pub refine: bool,
    /// Points inserted per refined vertex neighborhood.
    pub refine_points: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg {
            n: 2001,
            refine: true,
            refine_points: 201,
        }
    }
}

impl GridCfg {
    pub fn with_n(n: usize) -> Self {
        GridCfg {
            n,
            ..Default::default()
        }
    }

    /// Coarser default without local refinement, for solvers that iterate
    /// the envelope many times.
    pub fn coarse(n: usize) -> Self {
        GridCfg {
            n,
            refine: false,
            refine_points: 0,
        }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }
}

/// Concavification of `f` queried at a single point `x`: the envelope value
/// and the supporting split there.
///
/// The sample set is the uniform grid plus `x` itself (the objectives fed
/// in by the solvers are kinked exactly at the current prior, so the kink
/// is always sampled). With `cfg.refine`, one extra pass inserts
/// `cfg.refine_points` points within one grid spacing of each support
/// vertex and re-hulls.
#[derive(Debug, Clone, Copy)]
pub struct CavPoint {
    pub value: f64,
    pub support: Support,
}

pub fn concavify_at(f: impl Fn(f64) -> f64, x: f64, cfg: &GridCfg) -> Result<CavPoint> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("prior {x} outside [0, 1]")));
    }
    if cfg.n < 2 {
        return Err(Error::GridTooCoarse(cfg.n, 2));
    }
    let h = cfg.spacing();
    let mut points: Vec<f64> = (0..cfg.n).map(|i| i as f64 * h).collect();
    points.push(x);
    let sol = hull_query(&f, points, x)?;

    if !cfg.refine {
        return Ok(sol);
    }
    let Support::Pair { lo, hi, .. } = sol.support else {
        return Ok(sol);
    };
    let mut points: Vec<f64> = (0..cfg.n).map(|i| i as f64 * h).collect();
    points.push(x);
    for v in [lo, hi] {
        let a = (v - h).max(0.0);
        let b = (v + h).min(1.0);
        let m = cfg.refine_points.max(2);
        for k in 0..m {
            points.push(a + (b - a) * k as f64 / (m - 1) as f64);
        }
    }
    hull_query(&f, points, x)
}

fn hull_query(f: &impl Fn(f64) -> f64, mut points: Vec<f64>, x: f64) -> Result<CavPoint> {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let values: Vec<f64> = points.iter().map(|&q| f(q)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams(
            "objective produced a non-finite value".into(),
        ));
    }
    let sampled = SampledFunction {
        grid: points,
        values,
    };
    let env = concave_envelope(&sampled)?;
    let value = env.value_at(x);
    let fx = f(x);
    let scale = 1.0 + value.abs().max(fx.abs());
    // Ties between splitting and staying resolve toward the smaller
    // support: if f already attains the envelope at x, release nothing.
    let support = if value - fx <= ON_HULL_TOL * scale {
        Support::Point(x)
    } else {
        env.support_at(x)?
    };
    Ok(CavPoint { value, support })
}

/// Linear interpolation of values stored on the uniform grid over [0, 1].
#[inline]
pub(crate) fn interp_uniform(values: &[f64], q: f64) -> f64 {
    let n = values.len();
    let t = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (t.floor() as usize).min(n - 2);
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GainLossSpec;
    use approx::assert_relative_eq;

    #[test]
    fn concave_function_is_its_own_envelope() {
        let f = SampledFunction::from_fn(|x| -(x - 0.5) * (x - 0.5), 101).unwrap();
        let env = concave_envelope(&f).unwrap();
        for i in 0..101 {
            assert!(env.is_vertex(i), "point {i} should be a hull vertex");
            assert_relative_eq!(env.value_at(f.grid()[i]), f.values()[i], epsilon = 1e-14);
        }
        assert_eq!(env.support_at(0.37).unwrap(), Support::Point(0.37));
    }

    #[test]
    fn convex_interior_collapses_to_endpoint_chord() {
        let f = SampledFunction::from_fn(|x| (x - 0.5).abs(), 101).unwrap();
        let env = concave_envelope(&f).unwrap();
        assert_eq!(env.hull_x(), &[0.0, 1.0]);
        for x in [0.1, 0.5, 0.9] {
            assert_relative_eq!(env.value_at(x), 0.5, epsilon = 1e-14);
        }
        match env.support_at(0.3).unwrap() {
            Support::Pair { lo, hi, w_lo, w_hi } => {
                assert_eq!((lo, hi), (0.0, 1.0));
                assert_relative_eq!(w_lo, 0.7, epsilon = 1e-14);
                assert_relative_eq!(w_hi, 0.3, epsilon = 1e-14);
            }
            other => panic!("expected a pair, got {other:?}"),
        }
    }

    #[test]
    fn last_layer_objective_support_matches_on_path_value() {
        // Terminal-layer objective entering the final communication period
        // with belief 0.715: the envelope splits onto {0, ~0.834}.
        let spec = GainLossSpec::sqrt_scaled(1.5).unwrap();
        let prior = 0.715;
        let obj = |q: f64| spec.mu_unchecked(q - prior) + spec.babbling_unchecked(q);
        let sol = concavify_at(obj, prior, &GridCfg::default()).unwrap();
        match sol.support {
            Support::Pair { lo, hi, .. } => {
                assert!(lo.abs() < 1e-9, "low support {lo} should be 0");
                assert!((hi - 0.834).abs() < 1e-3, "high support {hi} vs 0.834");
            }
            other => panic!("expected a split, got {other:?}"),
        }
        // Strictly above the objective strictly inside the support interval.
        for q in [0.05, 0.3, 0.5, 0.7, 0.8] {
            assert!(
                sol.value > obj(prior)
                    && concavify_at(obj, q, &GridCfg::default()).unwrap().value >= obj(q)
            );
        }
    }

    #[test]
    fn support_mean_preserving_is_exact() {
        let f = SampledFunction::from_fn(|x| (x * 7.3).sin().abs() - x * x, 501).unwrap();
        let env = concave_envelope(&f).unwrap();
        for i in 0..400 {
            let x = 0.001 + i as f64 * 0.0024;
            let s = env.support_at(x).unwrap();
            assert!((s.mean() - x).abs() <= 1e-12);
            for (_, w) in s.points() {
                assert!((0.0..=1.0 + 1e-15).contains(&w));
            }
        }
    }

    #[test]
    fn envelope_rejects_bad_input() {
        assert!(SampledFunction::new(vec![0.0, 0.5], vec![0.0, 1.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, f64::NAN, 1.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err());
    }

    #[test]
    fn refinement_error_shrinks_quadratically() {
        // Piecewise-linear envelopes of a smooth concave function converge
        // at rate h^2; fit the constant on the coarse grid and check the
        // fine grid stays within it.
        let f = |x: f64| x * (1.0 - x);
        let probe = [0.123, 0.377, 0.61, 0.883];
        let err = |n: usize| {
            let s = SampledFunction::from_fn(f, n).unwrap();
            let env = concave_envelope(&s).unwrap();
            probe
                .iter()
                .map(|&x| (env.value_at(x) - f(x)).abs())
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (err(101), err(201));
        let h1 = 1.0 / 100.0;
        let c = e1 / (h1 * h1);
        let h2 = 1.0 / 200.0;
        assert!(e2 <= 1.5 * c * h2 * h2, "e2={e2}, bound={}", c * h2 * h2);
    }
}
