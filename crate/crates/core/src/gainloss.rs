//! Gain-loss utility families over news, their one-sided derivatives,
//! shape predicates, and the two-period helper payoffs `N_B`, `N_G`.
//!
//! All functions map a change in expected consumption utility
//! `x ∈ [-1, 1]` into a felicity `mu(x)` with `mu(0) = 0`. Evaluation
//! outside `[-1, 1]` is a domain error: with consumption utilities
//! normalized to `[0, 1]`, no belief update can produce a larger change,
//! and the functional forms are not pinned down beyond that interval.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Slack accepted on the `[-1, 1]` evaluation domain before erroring.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Which one-sided derivative to take at a kink (only `x = 0` matters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A strictly increasing, strictly concave map `[0,1] -> R+` with value 0
/// at 0, used as the gains branch of a lambda-scaled family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuPosSpec {
    /// `sqrt(x)`.
    Sqrt,
    /// `x^alpha` with `alpha` in (0,1).
    PowerAlpha { alpha: f64 },
    /// `alpha*x - beta*x^2` with `alpha >= 2*beta > 0` (increasing on [0,1]).
    QuadraticPos { alpha: f64, beta: f64 },
}

impl MuPosSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MuPosSpec::Sqrt => Ok(()),
            MuPosSpec::PowerAlpha { alpha } => {
                if alpha > 0.0 && alpha < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "power base needs alpha in (0,1), got {alpha}"
                    )))
                }
            }
            MuPosSpec::QuadraticPos { alpha, beta } => {
                if alpha > 0.0 && beta > 0.0 && alpha >= 2.0 * beta {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "quadratic base needs alpha >= 2*beta > 0, got alpha={alpha}, beta={beta}"
                    )))
                }
            }
        }
    }

    /// Value at `x` in [0,1].
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MuPosSpec::Sqrt => x.sqrt(),
            MuPosSpec::PowerAlpha { alpha } => x.powf(alpha),
            MuPosSpec::QuadraticPos { alpha, beta } => alpha * x - beta * x * x,
        }
    }

    /// Derivative at `x > 0`; right derivative at 0 (may be `+inf`).
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            MuPosSpec::Sqrt => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.5 / x.sqrt()
                }
            }
            MuPosSpec::PowerAlpha { alpha } => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    alpha * x.powf(alpha - 1.0)
                }
            }
            MuPosSpec::QuadraticPos { alpha, beta } => alpha - 2.0 * beta * x,
        }
    }

    /// Whether the right derivative at 0 is infinite.
    pub fn infinite_slope_at_zero(&self) -> bool {
        matches!(self, MuPosSpec::Sqrt | MuPosSpec::PowerAlpha { .. })
    }
}

/// Parametric gain-loss utility over belief-induced changes in expected
/// consumption utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainLossSpec {
    /// `alpha_p*x - beta_p*x^2` on gains, `alpha_n*x + beta_n*x^2` on losses.
    Quadratic {
        alpha_p: f64,
        beta_p: f64,
        alpha_n: f64,
        beta_n: f64,
    },
    /// `x^alpha` on gains, `-lambda*|x|^beta` on losses.
    Power { alpha: f64, beta: f64, lambda: f64 },
    /// `base(x)` on gains, `-lambda*base(|x|)` on losses.
    LambdaScaled { base: MuPosSpec, lambda: f64 },
    /// `x` on gains, `lambda*x` on losses.
    TwoPartLinear { lambda: f64 },
}

/// Shape flags of a gain-loss utility, decided analytically from the
/// parameters (monotonicity is reported weakly so that boundary families
/// like the quadratic with `alpha = 2*beta` are accepted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShapeReport {
    /// Strictly concave on gains and strictly convex on losses.
    pub diminishing_sensitivity: bool,
    /// `-mu(-x) >= mu(x)` for all `x` in (0,1].
    pub weak_loss_aversion: bool,
    /// `-mu(-x) > mu(x)` for all `x` in (0,1].
    pub strict_loss_aversion: bool,
    /// `mu'(x) <= mu'(-x)` for all `x` in (0,1].
    pub greater_sensitivity_to_losses: bool,
    /// Weakly increasing on [-1,1] (strictly on the interior for the
    /// boundary quadratics).
    pub monotone: bool,
}

impl GainLossSpec {
    pub fn quadratic(alpha_p: f64, beta_p: f64, alpha_n: f64, beta_n: f64) -> Result<Self> {
        let s = GainLossSpec::Quadratic {
            alpha_p,
            beta_p,
            alpha_n,
            beta_n,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn power(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let s = GainLossSpec::Power {
            alpha,
            beta,
            lambda,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn lambda_scaled(base: MuPosSpec, lambda: f64) -> Result<Self> {
        let s = GainLossSpec::LambdaScaled { base, lambda };
        s.validate()?;
        Ok(s)
    }

    /// Square-root gains scaled by `lambda` on losses.
    pub fn sqrt_scaled(lambda: f64) -> Result<Self> {
        Self::lambda_scaled(MuPosSpec::Sqrt, lambda)
    }

    pub fn two_part_linear(lambda: f64) -> Result<Self> {
        let s = GainLossSpec::TwoPartLinear { lambda };
        s.validate()?;
        Ok(s)
    }

    /// Parameter-range validation (positivity and exponent ranges). Shape
    /// restrictions such as monotonicity or loss aversion are reported by
    /// [`GainLossSpec::check_shape`] instead of enforced here, since
    /// several results deliberately evaluate specs that violate them.
    pub fn validate(&self) -> Result<()> {
        match *self {
            GainLossSpec::Quadratic {
                alpha_p,
                beta_p,
                alpha_n,
                beta_n,
            } => {
                if alpha_p > 0.0 && beta_p > 0.0 && alpha_n > 0.0 && beta_n > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(
                        "quadratic family needs alpha_p, beta_p, alpha_n, beta_n > 0".into(),
                    ))
                }
            }
            GainLossSpec::Power {
                alpha,
                beta,
                lambda,
            } => {
                if alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 && lambda >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "power family needs alpha, beta in (0,1) and lambda >= 1, got \
                         alpha={alpha}, beta={beta}, lambda={lambda}"
                    )))
                }
            }
            GainLossSpec::LambdaScaled { base, lambda } => {
                base.validate()?;
                if lambda >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "lambda-scaled family needs lambda >= 1, got {lambda}"
                    )))
                }
            }
            GainLossSpec::TwoPartLinear { lambda } => {
                if lambda >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!(
                        "two-part linear family needs lambda >= 0, got {lambda}"
                    )))
                }
            }
        }
    }

    fn check_domain(x: f64) -> Result<f64> {
        if x.abs() > 1.0 + DOMAIN_SLACK || !x.is_finite() {
            Err(Error::Domain(format!("mu argument {x} outside [-1, 1]")))
        } else {
            Ok(x.clamp(-1.0, 1.0))
        }
    }

    /// Evaluate `mu(x)` for `x` in [-1, 1]. Exact per-variant closed form.
    pub fn mu(&self, x: f64) -> Result<f64> {
        Ok(self.mu_unchecked(Self::check_domain(x)?))
    }

    /// `mu` without the domain check; callers guarantee `x` in [-1, 1].
    #[inline]
    pub(crate) fn mu_unchecked(&self, x: f64) -> f64 {
        debug_assert!((-1.0 - DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x));
        match *self {
            GainLossSpec::Quadratic {
                alpha_p,
                beta_p,
                alpha_n,
                beta_n,
            } => {
                if x >= 0.0 {
                    alpha_p * x - beta_p * x * x
                } else {
                    alpha_n * x + beta_n * x * x
                }
            }
            GainLossSpec::Power {
                alpha,
                beta,
                lambda,
            } => {
                if x >= 0.0 {
                    x.powf(alpha)
                } else {
                    -lambda * (-x).powf(beta)
                }
            }
            GainLossSpec::LambdaScaled { base, lambda } => {
                if x >= 0.0 {
                    base.eval(x)
                } else {
                    -lambda * base.eval(-x)
                }
            }
            GainLossSpec::TwoPartLinear { lambda } => {
                if x >= 0.0 {
                    x
                } else {
                    lambda * x
                }
            }
        }
    }

    /// One-sided derivative of `mu` at `x`. The side only matters at the
    /// kink `x = 0`; elsewhere both sides agree. Infinite slopes (power and
    /// lambda-scaled bases at `0+`) are returned as `f64::INFINITY`, which
    /// compares greater than any finite value.
    pub fn mu_deriv(&self, x: f64, side: Side) -> Result<f64> {
        let x = Self::check_domain(x)?;
        let gains_side = x > 0.0 || (x == 0.0 && side == Side::Right);
        Ok(match *self {
            GainLossSpec::Quadratic {
                alpha_p,
                beta_p,
                alpha_n,
                beta_n,
            } => {
                if gains_side {
                    alpha_p - 2.0 * beta_p * x
                } else {
                    alpha_n + 2.0 * beta_n * x
                }
            }
            GainLossSpec::Power {
                alpha,
                beta,
                lambda,
            } => {
                if gains_side {
                    if x == 0.0 {
                        f64::INFINITY
                    } else {
                        alpha * x.powf(alpha - 1.0)
                    }
                } else if x == 0.0 {
                    f64::INFINITY
                } else {
                    lambda * beta * (-x).powf(beta - 1.0)
                }
            }
            GainLossSpec::LambdaScaled { base, lambda } => {
                if gains_side {
                    base.deriv(x)
                } else {
                    lambda * base.deriv(-x)
                }
            }
            GainLossSpec::TwoPartLinear { lambda } => {
                if gains_side {
                    1.0
                } else {
                    lambda
                }
            }
        })
    }

    /// Shape predicates, decided analytically from the parameters.
    pub fn check_shape(&self) -> ShapeReport {
        match *self {
            GainLossSpec::Quadratic {
                alpha_p,
                beta_p,
                alpha_n,
                beta_n,
            } => {
                let da = alpha_n - alpha_p;
                let db = beta_n - beta_p;
                // -mu(-z) - mu(z) = da*z - db*z^2, so (weak) loss aversion is
                // da >= db*z on [0,1]; linear in z, so endpoints suffice.
                let weak_la = da >= 0.0 && da >= db;
                let strict_la = if db > 0.0 {
                    da > db
                } else if db == 0.0 {
                    da > 0.0
                } else {
                    da >= 0.0
                };
                ShapeReport {
                    diminishing_sensitivity: beta_p > 0.0 && beta_n > 0.0,
                    weak_loss_aversion: weak_la,
                    strict_loss_aversion: strict_la,
                    // mu'(-z) - mu'(z) = da - 2*db*z, linear again.
                    greater_sensitivity_to_losses: da >= 0.0 && da >= 2.0 * db,
                    monotone: alpha_p >= 2.0 * beta_p && alpha_n >= 2.0 * beta_n,
                }
            }
            GainLossSpec::Power {
                alpha,
                beta,
                lambda,
            } => {
                // -mu(-z)/mu(z) = lambda*z^(beta-alpha): bounded below by
                // lambda at z=1 when alpha >= beta, vanishes as z->0 when
                // alpha < beta.
                let weak_la = alpha >= beta && lambda >= 1.0;
                let strict_la = (alpha > beta && lambda >= 1.0) || (alpha == beta && lambda > 1.0);
                // mu'(z) <= mu'(-z) iff alpha*z^(alpha-1) <= lambda*beta*z^(beta-1).
                let gsl = if beta > alpha {
                    false
                } else if beta == alpha {
                    lambda >= 1.0
                } else {
                    alpha <= lambda * beta
                };
                ShapeReport {
                    diminishing_sensitivity: true,
                    weak_loss_aversion: weak_la,
                    strict_loss_aversion: strict_la,
                    greater_sensitivity_to_losses: gsl,
                    monotone: true,
                }
            }
            GainLossSpec::LambdaScaled { base, lambda } => {
                let monotone = match base {
                    MuPosSpec::QuadraticPos { alpha, beta } => alpha >= 2.0 * beta,
                    _ => true,
                };
                ShapeReport {
                    diminishing_sensitivity: true,
                    weak_loss_aversion: lambda >= 1.0,
                    strict_loss_aversion: lambda > 1.0,
                    greater_sensitivity_to_losses: lambda >= 1.0,
                    monotone,
                }
            }
            GainLossSpec::TwoPartLinear { lambda } => ShapeReport {
                diminishing_sensitivity: false,
                weak_loss_aversion: lambda >= 1.0,
                strict_loss_aversion: lambda > 1.0,
                greater_sensitivity_to_losses: lambda >= 1.0,
                monotone: lambda > 0.0,
            },
        }
    }

    /// Whether `mu(-x) = -mu(x)` identically.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            GainLossSpec::Quadratic {
                alpha_p,
                beta_p,
                alpha_n,
                beta_n,
            } => alpha_p == alpha_n && beta_p == beta_n,
            GainLossSpec::Power {
                alpha,
                beta,
                lambda,
            } => alpha == beta && lambda == 1.0,
            GainLossSpec::LambdaScaled { lambda, .. } => lambda == 1.0,
            GainLossSpec::TwoPartLinear { lambda } => lambda == 1.0,
        }
    }

    /// Total news utility of the bad-state two-step path `pi -> x -> 0`:
    /// `N_B(x; pi) = mu(x - pi) + mu(-x)`.
    pub fn n_bad(&self, x: f64, pi: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("pi", pi)?;
        Ok(self.mu_unchecked(x - pi) + self.mu_unchecked(-x))
    }

    /// Total news utility of the good-state two-step path `pi -> p -> 1`:
    /// `N_G(p; pi) = mu(p - pi) + mu(1 - p)`.
    pub fn n_good(&self, p: f64, pi: f64) -> Result<f64> {
        check_unit("p", p)?;
        check_unit("pi", pi)?;
        Ok(self.mu_unchecked(p - pi) + self.mu_unchecked(1.0 - p))
    }

    /// Expected news utility when beliefs stay at the prior until the
    /// exogenous terminal revelation:
    /// `pi0*mu(1 - pi0) + (1 - pi0)*mu(-pi0)`. Independent of the horizon.
    pub fn babbling_payoff(&self, pi0: f64) -> Result<f64> {
        check_unit("pi0", pi0)?;
        Ok(self.babbling_unchecked(pi0))
    }

    #[inline]
    pub(crate) fn babbling_unchecked(&self, pi0: f64) -> f64 {
        pi0 * self.mu_unchecked(1.0 - pi0) + (1.0 - pi0) * self.mu_unchecked(-pi0)
    }

    /// The loss-aversion scale for lambda-indexed families, if any.
    pub fn lambda(&self) -> Option<f64> {
        match *self {
            GainLossSpec::Power { lambda, .. }
            | GainLossSpec::LambdaScaled { lambda, .. }
            | GainLossSpec::TwoPartLinear { lambda } => Some(lambda),
            GainLossSpec::Quadratic { .. } => None,
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name}={v} outside [0, 1]")))
    }
}

/// Grid-based strict-concavity probe for bases lacking closed-form shape
/// conditions. Checks midpoint dominance on `n` interior triples with the
/// given strictness margin.
pub fn concave_on_grid(f: impl Fn(f64) -> f64, n: usize, margin: f64) -> bool {
    let n = n.max(3);
    let h = 1.0 / (n - 1) as f64;
    (1..n - 1).all(|i| {
        let x = i as f64 * h;
        f(x) > 0.5 * (f(x - h) + f(x + h)) + margin
    })
}
