use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pairig::baselines::brute_force_affine_vi;
use pairig::linalg::Matrix;
use pairig::metrics::{
    rate_bound_gap, rate_bound_suboptimality, ConstantsEstimate, ConstantsMethod, RateBoundInputs,
};

use pairig_cli::config::ExperimentConfig;
use pairig_cli::run::{run_experiment, validate_only};

#[derive(Parser)]
#[command(
    name = "pairig",
    version,
    about = "Solvers and experiments for distributed finite-sum optimization with VI constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write a CSV trace plus sidecar.
    Run {
        /// Path to a pairig-config/1 JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the configured problem and run the assumption checks only.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the theoretical rate bounds for given constants.
    Bounds(BoundsArgs),
    /// Solve a small affine box VI by exhaustive face enumeration.
    Oracle {
        /// Mapping matrix: "identityN" or semicolon-separated rows
        /// ("1,0;0,1").
        #[arg(long = "M")]
        matrix: String,
        /// Offset vector, comma-separated.
        #[arg(long = "q", allow_hyphen_values = true)]
        offset: String,
        /// Box bounds "lo,hi" applied to every coordinate.
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Epoch count the bounds are evaluated at.
    #[arg(long = "N")]
    epochs: usize,
    #[arg(long)]
    gamma0: f64,
    #[arg(long)]
    eta0: f64,
    #[arg(long)]
    b: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Number of agents m.
    #[arg(long, default_value_t = 1)]
    agents: usize,
    /// One-based agent index i; defaults to the last agent.
    #[arg(long)]
    agent: Option<usize>,
    /// C_f: bound on m·sup‖∇̃f_i‖.
    #[arg(long)]
    subgradient_bound: f64,
    /// C_F: bound on m·sup‖F_i‖.
    #[arg(long)]
    mapping_bound: f64,
    /// M_X: sup of ‖x‖ over the set.
    #[arg(long)]
    set_norm_bound: f64,
    /// M_f: sup of |f| over the set.
    #[arg(long)]
    objective_bound: f64,
    /// f(x̄_{0,m}) − f(x_{0,1}).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    init_objective_gap: f64,
    /// ‖x̄_{0,i} − x̄_{0,m}‖.
    #[arg(long, default_value_t = 0.0)]
    init_consensus_dist: f64,
    /// ‖x̄_{0,m} − x_{0,1}‖.
    #[arg(long, default_value_t = 0.0)]
    init_anchor_dist: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let parsed = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(err) => {
                    eprintln!("error: {err:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            let config_dir = config
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let outcome = run_experiment(&parsed, &config_dir, &out)?;
            println!("trace written to {}", outcome.trace_path.display());
            println!("sidecar written to {}", outcome.sidecar_path.display());
            if let Some(reason) = &outcome.truncated {
                eprintln!("run truncated: {reason}");
                return Ok(ExitCode::from(1));
            }
            if outcome.invariant_failures > 0 {
                eprintln!(
                    "invariant checks failed on {} epoch(s)",
                    outcome.invariant_failures
                );
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let parsed = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(err) => {
                    eprintln!("error: {err:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            let config_dir = config
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let summary = validate_only(&parsed, &config_dir)?;
            println!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds(args) => {
            let inputs = RateBoundInputs {
                constants: ConstantsEstimate {
                    subgradient_bound: args.subgradient_bound,
                    mapping_bound: args.mapping_bound,
                    set_norm_bound: args.set_norm_bound,
                    objective_bound: args.objective_bound,
                    method: ConstantsMethod::Sampled,
                    samples: None,
                },
                gamma0: args.gamma0,
                eta0: args.eta0,
                b: args.b,
                r: args.r,
                num_agents: args.agents,
                agent: args.agent.unwrap_or(args.agents),
                init_objective_gap: args.init_objective_gap,
                init_consensus_dist: args.init_consensus_dist,
                init_anchor_dist: args.init_anchor_dist,
            };
            let sub = rate_bound_suboptimality(&inputs, args.epochs);
            let gap = rate_bound_gap(&inputs, args.epochs);
            match (sub, gap) {
                (Ok(s), Ok(g)) => {
                    println!("suboptimality_bound: {s}");
                    println!("dual_gap_bound: {g}");
                    Ok(ExitCode::SUCCESS)
                }
                (Err(err), _) | (_, Err(err)) => {
                    eprintln!("refused: {err}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Command::Oracle {
            matrix,
            offset,
            bounds,
        } => {
            let q = parse_vector(&offset).context("parsing --q")?;
            let n = q.len();
            let m = parse_matrix(&matrix, n).context("parsing --M")?;
            let (lo, hi) = parse_box(&bounds).context("parsing --box")?;
            let solution = brute_force_affine_vi(&m, &q, &vec![lo; n], &vec![hi; n])
                .map_err(|e| anyhow!("{e}"))?;
            let rendered: Vec<String> = solution.iter().map(|v| format!("{v}")).collect();
            println!("({})", rendered.join(", "));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {tok:?}"))
        })
        .collect()
}

fn parse_matrix(text: &str, n: usize) -> Result<Matrix<f64>> {
    if let Some(dim) = text.strip_prefix("identity") {
        let d: usize = dim.parse().context("identityN needs a dimension")?;
        if d != n {
            bail!("identity{d} does not match offset length {n}");
        }
        return Ok(Matrix::identity(d));
    }
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(parse_vector)
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("matrix must be {n}x{n}");
    }
    Matrix::from_rows(&rows).map_err(|e| anyhow!("{e}"))
}

fn parse_box(text: &str) -> Result<(f64, f64)> {
    let parts = parse_vector(text)?;
    if parts.len() != 2 || parts[0] > parts[1] {
        bail!("--box expects \"lo,hi\" with lo ≤ hi");
    }
    Ok((parts[0], parts[1]))
}
