//! Command-line front end: parses a run configuration, dispatches to the
//! solver modules, and writes deterministic JSON/CSV outputs.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
//! specs, out-of-range parameters), 3 on numeric failures inside a solver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use newsdesign_core::cheaptalk;
use newsdesign_core::commitment::{self, MIN_GRID};
use newsdesign_core::gainloss::MuPosSpec;
use newsdesign_core::infostruct::StatePreference;
use newsdesign_core::percentile::{self, ConsumptionDist};
use newsdesign_core::{horizon, Error as CoreError, GainLossSpec, GridCfg};

const GRID_ENV: &str = "NEWSDESIGN_GRID";

#[derive(Parser)]
#[command(
    name = "newsdesign",
    about = "Optimal dynamic information structures and cheap-talk equilibria \
             for receivers with gain-loss news utility",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the commitment problem by backwards-induction concavification.
    SolveCommitment {
        /// Gain-loss spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        mu: String,
        #[arg(long)]
        pi0: f64,
        #[arg(long = "T")]
        horizon: usize,
        /// Belief-grid size (default 2001; NEWSDESIGN_GRID overrides).
        #[arg(long)]
        grid: Option<usize>,
        /// Output path for the optimal posterior tree.
        #[arg(long, default_value = "tree.json")]
        out: PathBuf,
        /// Optional CSV dump of every value layer.
        #[arg(long)]
        layers_csv: Option<PathBuf>,
    },
    /// Exhaustive two-period oracle over a finite support grid.
    BruteForceT2 {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        pi0: f64,
        /// Number of uniform support-grid points.
        #[arg(long, default_value_t = 401)]
        support_grid: usize,
    },
    /// Enumerate gradual-good-news equilibrium ladders with payoffs.
    Equilibria {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        pi0: f64,
        #[arg(long = "T")]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bad-state indifference points above a belief.
    Pstar {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        pi: f64,
    },
    /// Smallest loss-aversion scale with a non-empty indifference set.
    LambdaThreshold {
        #[arg(long, value_enum)]
        base: BaseKind,
        /// Exponent for the power base.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        pi0: f64,
    },
    /// Random-horizon value function by contraction iteration.
    ValueIteration {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        delta: f64,
        /// Belief-grid size (default 1001; NEWSDESIGN_GRID overrides).
        #[arg(long)]
        grid: Option<usize>,
        /// Iteration budget before reporting non-convergence.
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Good-state disclosure path under percentile news utility with
    /// Gaussian consumption components.
    PercentileTable {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long = "T", default_value_t = 5)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare gradual against one-shot information for a sequential
    /// binary process.
    CompareInfo {
        #[arg(long)]
        mu: String,
        #[arg(long, value_enum)]
        prefers: Prefers,
        /// Comma-separated per-round success probabilities.
        #[arg(long)]
        q: String,
    },
    /// Report the shape flags of a gain-loss spec.
    CheckShape {
        #[arg(long)]
        mu: String,
    },
    /// Write plot-ready CSV data for a named sweep target.
    EmitFigure {
        #[arg(long)]
        which: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseKind {
    Sqrt,
    PowerAlpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prefers {
    A,
    B,
}

/// Errors carrying their process exit code.
enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => m,
        }
    }
}

/// Errors raised while running a module map to the numeric exit code;
/// validation happens before dispatch.
fn numeric(e: CoreError) -> CliError {
    CliError::Numeric(e.to_string())
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::SolveCommitment {
            mu,
            pi0,
            horizon,
            grid,
            out,
            layers_csv,
        } => {
            let spec = parse_mu(&mu)?;
            check_unit("pi0", pi0)?;
            check_horizon(horizon)?;
            let cfg = grid_cfg(grid, GridCfg::default())?;
            let policy = commitment::solve(&spec, pi0, horizon, &cfg).map_err(numeric)?;
            let json = serde_json::to_string_pretty(&policy.tree)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            write_atomic(&out, &(json + "\n"))?;
            if let Some(path) = layers_csv {
                write_atomic(&path, &layers_to_csv(&policy))?;
            }
            let path_str = policy
                .good_state_path()
                .iter()
                .map(|p| fmt_f(*p))
                .collect::<Vec<_>>()
                .join(" -> ");
            println!(
                "value {} good-state path {} tree {}",
                fmt_f(policy.value),
                path_str,
                out.display()
            );
            Ok(())
        }
        Cmd::BruteForceT2 {
            mu,
            pi0,
            support_grid,
        } => {
            let spec = parse_mu(&mu)?;
            check_unit("pi0", pi0)?;
            if support_grid < 3 {
                return Err(validation("support grid needs at least 3 points"));
            }
            let mut grid: Vec<f64> = (0..support_grid)
                .map(|i| i as f64 / (support_grid - 1) as f64)
                .collect();
            grid.push(pi0);
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            let r = commitment::brute_force_t2(&spec, pi0, &grid).map_err(numeric)?;
            let support = r
                .support
                .iter()
                .map(|(q, w)| format!("{}@{}", fmt_f(*q), fmt_f(*w)))
                .collect::<Vec<_>>()
                .join(" ");
            println!("value {} support {}", fmt_f(r.value), support);
            Ok(())
        }
        Cmd::Equilibria {
            mu,
            pi0,
            horizon,
            out,
        } => {
            let spec = parse_mu(&mu)?;
            check_open_unit("pi0", pi0)?;
            check_horizon(horizon)?;
            let ladders = cheaptalk::ggn_enumerate(&spec, pi0, horizon, 10_000).map_err(numeric)?;
            let mut items = Vec::new();
            for ladder in &ladders {
                let payoff = cheaptalk::ggn_payoff(&spec, ladder).map_err(numeric)?;
                items.push(serde_json::json!({
                    "j": ladder.len(),
                    "beliefs": ladder.beliefs,
                    "value_good": payoff.value_good,
                    "value_bad": payoff.value_bad,
                    "total": payoff.total,
                }));
            }
            let body = serde_json::to_string_pretty(&items).expect("serializable");
            match out {
                Some(path) => {
                    write_atomic(&path, &(body + "\n"))?;
                    println!("{} ladders {}", items.len(), path.display());
                }
                None => println!("{body}"),
            }
            Ok(())
        }
        Cmd::Pstar { mu, pi } => {
            let spec = parse_mu(&mu)?;
            check_open_unit("pi", pi)?;
            let roots = cheaptalk::p_star(&spec, pi, 1e-12).map_err(numeric)?;
            let items: Vec<_> = roots
                .iter()
                .map(|r| serde_json::json!({"belief": r.belief, "tangent": r.tangent}))
                .collect();
            println!("{}", serde_json::to_string(&items).expect("serializable"));
            Ok(())
        }
        Cmd::LambdaThreshold { base, alpha, pi0 } => {
            check_open_unit("pi0", pi0)?;
            let base = match base {
                BaseKind::Sqrt => MuPosSpec::Sqrt,
                BaseKind::PowerAlpha => MuPosSpec::PowerAlpha {
                    alpha: alpha.ok_or_else(|| validation("power base needs --alpha"))?,
                },
            };
            base.validate().map_err(|e| validation(e.to_string()))?;
            let t = cheaptalk::lambda_threshold(&base, pi0, 1e-9).map_err(numeric)?;
            println!("lambda_threshold {}", fmt_f(t));
            Ok(())
        }
        Cmd::ValueIteration {
            mu,
            delta,
            grid,
            max_iter,
            out,
        } => {
            let spec = parse_mu(&mu)?;
            if !(0.0..1.0).contains(&delta) {
                return Err(validation(format!("delta={delta} outside [0, 1)")));
            }
            let cfg = grid_cfg(grid, GridCfg::coarse(1001))?;
            let v =
                horizon::value_iteration(&spec, delta, &cfg, 1e-9, max_iter).map_err(numeric)?;
            let mut csv = String::from("p,v\n");
            for (p, val) in v.grid.iter().zip(&v.values) {
                csv.push_str(&format!("{},{}\n", fmt_f(*p), fmt_f(*val)));
            }
            match out {
                Some(path) => {
                    write_atomic(&path, &csv)?;
                    println!(
                        "converged in {} iterations (step {:.2e}) csv {}",
                        v.iterations,
                        v.final_step,
                        path.display()
                    );
                }
                None => print!("{csv}"),
            }
            Ok(())
        }
        Cmd::PercentileTable {
            sigma,
            lambda,
            horizon,
            out,
        } => {
            if sigma <= 0.0 {
                return Err(validation(format!("sigma={sigma} must be positive")));
            }
            if lambda < 1.0 {
                return Err(validation(format!("lambda={lambda} must be at least 1")));
            }
            check_horizon(horizon)?;
            let spec = GainLossSpec::sqrt_scaled(lambda).map_err(|e| validation(e.to_string()))?;
            let cfg = grid_cfg(None, percentile::percentile_grid_default())?;
            let policy = percentile::solve_percentile(
                ConsumptionDist::Gaussian {
                    mean: 1.0,
                    sd: sigma,
                },
                ConsumptionDist::Gaussian {
                    mean: 0.0,
                    sd: sigma,
                },
                &spec,
                0.5,
                horizon,
                &cfg,
                percentile::DEFAULT_QUAD,
            )
            .map_err(numeric)?;
            let path = policy.good_state_path();
            let header: Vec<String> = (0..horizon).map(|t| format!("t{t}")).collect();
            let row: Vec<String> = path[..horizon].iter().map(|p| format!("{p:.2}")).collect();
            let csv = format!("{}\n{}\n", header.join(","), row.join(","));
            println!("{}", row.join(","));
            if let Some(path) = out {
                write_atomic(&path, &csv)?;
            }
            Ok(())
        }
        Cmd::CompareInfo { mu, prefers, q } => {
            let spec = parse_mu(&mu)?;
            let qs: Vec<f64> = q
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| validation(format!("bad probability '{s}'")))
                })
                .collect::<Result<_, _>>()?;
            if qs.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(validation("success probabilities must lie in (0, 1)"));
            }
            let prefers = match prefers {
                Prefers::A => StatePreference::A,
                Prefers::B => StatePreference::B,
            };
            let cmp = newsdesign_core::infostruct::compare_gradual_oneshot(&spec, prefers, &qs)
                .map_err(numeric)?;
            println!(
                "choice {:?} gap {} gradual {} one_shot {}",
                cmp.choice,
                fmt_f(cmp.utility_gap),
                fmt_f(cmp.gradual_value),
                fmt_f(cmp.one_shot_value)
            );
            Ok(())
        }
        Cmd::CheckShape { mu } => {
            let spec = parse_mu(&mu)?;
            let report = spec.check_shape();
            println!(
                "{}",
                serde_json::to_string(&report).expect("serializable report")
            );
            Ok(())
        }
        Cmd::EmitFigure { which, out_dir } => emit_figure(&which, &out_dir),
    }
}

// --- shared helpers ---------------------------------------------------------

fn parse_mu(arg: &str) -> Result<GainLossSpec, CliError> {
    let body = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| validation(format!("cannot read mu spec '{arg}': {e}")))?
    };
    let spec: GainLossSpec =
        serde_json::from_str(&body).map_err(|e| validation(format!("malformed mu spec: {e}")))?;
    spec.validate().map_err(|e| validation(e.to_string()))?;
    Ok(spec)
}

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(validation(format!("{name}={v} outside [0, 1]")))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(validation(format!("{name}={v} outside (0, 1)")))
    }
}

fn check_horizon(t: usize) -> Result<(), CliError> {
    if t >= 2 {
        Ok(())
    } else {
        Err(validation(format!("T={t} below minimum of 2")))
    }
}

fn grid_cfg(flag: Option<usize>, default: GridCfg) -> Result<GridCfg, CliError> {
    let env = std::env::var(GRID_ENV)
        .ok()
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| validation(format!("bad {GRID_ENV} value '{v}'")))
        })
        .transpose()?;
    let n = flag.or(env).unwrap_or(default.n);
    if n < MIN_GRID {
        return Err(validation(format!(
            "grid size {n} below minimum of {MIN_GRID}"
        )));
    }
    Ok(GridCfg { n, ..default })
}

/// Round to 12 significant digits, then print the shortest representation
/// of the rounded value. Locale-independent and deterministic.
fn fmt_f(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("round-trip");
    format!("{rounded}")
}

/// Write through a sibling temp file and rename, so outputs are never
/// observed half-written.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)
        .map_err(|e| validation(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| validation(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

fn layers_to_csv(policy: &commitment::OptimalPolicy) -> String {
    let mut csv = String::from("period,x,u_stay,cav_u,support_lo,support_hi\n");
    for layer in &policy.layers {
        for (i, &x) in layer.grid.iter().enumerate() {
            let (lo, hi) = match layer.supports[i] {
                newsdesign_core::Support::Point(p) => (p, p),
                newsdesign_core::Support::Pair { lo, hi, .. } => (lo, hi),
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                layer.period,
                fmt_f(x),
                fmt_f(layer.stay_values[i]),
                fmt_f(layer.values[i]),
                fmt_f(lo),
                fmt_f(hi)
            ));
        }
    }
    csv
}

// --- figure data sweeps ------------------------------------------------------

fn emit_figure(which: &str, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| validation(format!("cannot create {}: {e}", out_dir.display())))?;
    let out = out_dir.join(format!("{which}.csv"));
    let csv = match which {
        "fig2" => fig2_csv()?,
        "fig3_left" => fig3_left_csv()?,
        "fig3_right" => fig3_right_csv()?,
        "figA1" => fig_a1_csv()?,
        "fig4" => fig4_csv()?,
        "figOA1" => fig_oa1_csv()?,
        "tableOA1" => table_oa1_csv()?,
        other => return Err(validation(format!("unknown figure target '{other}'"))),
    };
    write_atomic(&out, &csv)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn fig2_csv() -> Result<String, CliError> {
    // Objective and envelope at each on-path prior, one block per period.
    let spec = GainLossSpec::sqrt_scaled(1.5).expect("valid spec");
    let cfg = grid_cfg(None, GridCfg::default())?;
    let policy = commitment::solve(&spec, 0.5, 5, &cfg).map_err(numeric)?;
    let path = policy.good_state_path();
    let mut csv = String::from("# figure: fig2\nperiod,prior,q,u,cav_u\n");
    for (t, prior) in path.iter().take(4).enumerate() {
        let rows = policy.layer_curve(&spec, t + 1, *prior).map_err(numeric)?;
        for (q, u, cav) in rows.iter().step_by(5) {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                t + 1,
                fmt_f(*prior),
                fmt_f(*q),
                fmt_f(*u),
                fmt_f(*cav)
            ));
        }
    }
    Ok(csv)
}

fn fig3_left_csv() -> Result<String, CliError> {
    let mut csv = String::from("# figure: fig3_left\nalpha_n,p_high\n");
    let mut a = 2.01;
    while a <= 3.0 + 1e-9 {
        let p = commitment::quadratic_p_high(2.0, 1.0, a, 1.0, 0.1).map_err(numeric)?;
        csv.push_str(&format!("{},{}\n", fmt_f(a), fmt_f(p)));
        a += 0.01;
    }
    Ok(csv)
}

fn fig3_right_csv() -> Result<String, CliError> {
    let mut csv = String::from("# figure: fig3_right\npi0,p_high,even_split\n");
    let mut pi0 = 0.005;
    while pi0 < 0.995 {
        let p = commitment::quadratic_p_high(2.0, 1.0, 3.0, 1.0, pi0).map_err(numeric)?;
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f(pi0),
            fmt_f(p),
            fmt_f(0.5 * (1.0 + pi0))
        ));
        pi0 += 0.005;
    }
    Ok(csv)
}

fn fig_a1_csv() -> Result<String, CliError> {
    let mut csv =
        String::from("# figure: figA1\nlambda,best_payoff,intermediate_beliefs,babbling\n");
    let mut lambda = 1.0;
    while lambda <= 6.0 + 1e-9 {
        let spec = GainLossSpec::sqrt_scaled(lambda).expect("valid spec");
        let (payoff, ladder) = cheaptalk::best_ggn_payoff(&spec, 0.5, 2).map_err(numeric)?;
        let bab = spec.babbling_payoff(0.5).map_err(numeric)?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(lambda),
            fmt_f(payoff.total),
            ladder.len(),
            fmt_f(bab)
        ));
        lambda += 0.05;
    }
    Ok(csv)
}

fn fig4_csv() -> Result<String, CliError> {
    let spec = GainLossSpec::quadratic(2.0, 1.0, 2.1, 0.2).expect("valid spec");
    let ladders = cheaptalk::ggn_enumerate(&spec, 1.0 / 3.0, 12, 1000).map_err(numeric)?;
    let longest = ladders.last().expect("babbling ladder always present");
    let mut csv = String::from("# figure: fig4\nj,belief,increment\n");
    let mut prev = longest.pi0;
    csv.push_str(&format!("0,{},\n", fmt_f(longest.pi0)));
    for (j, &q) in longest.beliefs.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", j + 1, fmt_f(q), fmt_f(q - prev)));
        prev = q;
    }
    Ok(csv)
}

fn fig_oa1_csv() -> Result<String, CliError> {
    let spec = GainLossSpec::quadratic(2.0, 1.0, 2.1, 0.2).expect("valid spec");
    let cfg = grid_cfg(None, GridCfg::coarse(1001))?;
    let deltas = [0.0, 0.8, 0.95];
    let mut columns = Vec::new();
    for d in deltas {
        columns.push(horizon::value_iteration(&spec, d, &cfg, 1e-9, 20_000).map_err(numeric)?);
    }
    let mut csv = String::from("# figure: figOA1\np,v_delta_0,v_delta_0.8,v_delta_0.95\n");
    for i in 0..cfg.n {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f(columns[0].grid[i]),
            fmt_f(columns[0].values[i]),
            fmt_f(columns[1].values[i]),
            fmt_f(columns[2].values[i])
        ));
    }
    Ok(csv)
}

fn table_oa1_csv() -> Result<String, CliError> {
    let spec = GainLossSpec::sqrt_scaled(1.5).expect("valid spec");
    let cfg = grid_cfg(None, percentile::percentile_grid_default())?;
    let mut csv = String::from("# figure: tableOA1\nsigma,t0,t1,t2,t3,t4,t5\n");
    for sigma in [0.1, 1.0, 10.0] {
        let policy = percentile::solve_percentile(
            ConsumptionDist::Gaussian {
                mean: 1.0,
                sd: sigma,
            },
            ConsumptionDist::Gaussian {
                mean: 0.0,
                sd: sigma,
            },
            &spec,
            0.5,
            5,
            &cfg,
            percentile::DEFAULT_QUAD,
        )
        .map_err(numeric)?;
        let path = policy.good_state_path();
        let row: Vec<String> = path.iter().map(|p| format!("{p:.2}")).collect();
        csv.push_str(&format!("{},{}\n", fmt_f(sigma), row.join(",")));
    }
    Ok(csv)
}
