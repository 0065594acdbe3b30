//! Experiment orchestration: build → validate → solve → metrics → persist.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use pairig::baselines::{
    projected_ig_run, proximal_iag_run, saga_projected_run, BaselineConfig, StepsizeRule,
};
use pairig::geometry::{SetSpec, DEFAULT_DYKSTRA_MAX_SWEEPS, DEFAULT_DYKSTRA_TOL};
use pairig::metrics::estimate_constants;
use pairig::problem::{validate_problem, ViProblem};
use pairig::solver::{ncp_phi_metric, run_pair_ig, InfeasibilityFn, InstrumentationConfig, RunOptions};
use pairig::trace::RunTrace;

use crate::config::{
    ExperimentConfig, InstrumentationLevel, ProblemSelector, SolverSelector,
};
use crate::experiments::{
    build_custom_problem, build_svm_problem, build_traffic_problem, generate_synthetic_svm_data,
    RNG_ALGORITHM, SVM_BOX_RADIUS,
};
use crate::trace_io::{write_sidecar, write_trace_csv, Sidecar};

pub struct ExperimentOutcome {
    pub trace_path: std::path::PathBuf,
    pub sidecar_path: std::path::PathBuf,
    pub invariant_failures: usize,
    pub truncated: Option<String>,
}

struct BuiltProblem {
    problem: ViProblem<f64>,
    infeasibility: Option<InfeasibilityFn<f64>>,
    /// Box used for sampling-based validation/constants when the set is
    /// unbounded.
    sampling_box: Option<SetSpec<f64>>,
    svm_box_radius: Option<f64>,
}

fn build_problem(config: &ExperimentConfig, config_dir: &Path) -> Result<BuiltProblem> {
    match &config.problem {
        ProblemSelector::Traffic(spec) => {
            let built = build_traffic_problem(spec)?;
            Ok(BuiltProblem {
                problem: built.problem,
                infeasibility: Some(ncp_phi_metric()),
                sampling_box: Some(SetSpec::hyper_box(vec![0.0; 7], vec![1000.0; 7])?),
                svm_box_radius: None,
            })
        }
        ProblemSelector::Svm(spec) => {
            let data = generate_synthetic_svm_data(spec)?;
            let built = build_svm_problem(spec, &data)?;
            let blocks = built.blocks.clone();
            let metric: InfeasibilityFn<f64> = Arc::new(move |_, x: &[f64]| {
                blocks.iter().map(|b| b.constraint_residual(x)).sum()
            });
            Ok(BuiltProblem {
                problem: built.problem,
                infeasibility: Some(metric),
                sampling_box: None,
                svm_box_radius: Some(SVM_BOX_RADIUS),
            })
        }
        ProblemSelector::Custom { .. } => {
            let spec = config
                .load_custom_problem(config_dir)?
                .ok_or_else(|| anyhow!("custom problem spec missing"))?;
            let built = build_custom_problem(&spec)?;
            let infeasibility = match built.problem.set() {
                SetSpec::NonnegativeOrthant { .. } => Some(ncp_phi_metric()),
                _ => None,
            };
            let sampling_box = match built.problem.set() {
                SetSpec::WholeSpace { dim } => Some(SetSpec::symmetric_box(*dim, 10.0)),
                SetSpec::NonnegativeOrthant { dim } => {
                    Some(SetSpec::hyper_box(vec![0.0; *dim], vec![10.0; *dim])?)
                }
                _ => None,
            };
            Ok(BuiltProblem {
                problem: built.problem,
                infeasibility,
                sampling_box,
                svm_box_radius: None,
            })
        }
    }
}

fn default_initial_point(problem: &ViProblem<f64>) -> Result<Vec<f64>> {
    problem
        .set()
        .project(&vec![0.0; problem.dim()])
        .map_err(|e| anyhow!("projecting the default initial point: {e}"))
}

/// Rate-bound values for the sidecar (last agent at the final epoch).
/// Only defined for the diminishing rate schedule and epochs above the
/// validity threshold; sampled constants make these indicative, not
/// guaranteed, which the sidecar's `constants.method` field records.
fn rate_bounds_at_final_epoch(
    config: &ExperimentConfig,
    constants: &pairig::metrics::ConstantsEstimate<f64>,
    problem: &ViProblem<f64>,
) -> Option<serde_json::Value> {
    let crate::config::ScheduleConfig::Rate { gamma0, eta0, b } = config.schedule else {
        return None;
    };
    let m = problem.num_agents();
    let inputs = pairig::metrics::RateBoundInputs {
        constants: constants.clone(),
        gamma0,
        eta0,
        b,
        r: config.r,
        num_agents: m,
        agent: m,
        init_objective_gap: 0.0,
        init_consensus_dist: 0.0,
        init_anchor_dist: 0.0,
    };
    let sub = pairig::metrics::rate_bound_suboptimality(&inputs, config.epochs).ok()?;
    let gap = pairig::metrics::rate_bound_gap(&inputs, config.epochs).ok()?;
    Some(json!({
        "epoch": config.epochs,
        "agent": m,
        "suboptimality_bound": sub,
        "dual_gap_bound": gap,
    }))
}

/// Runs one configured experiment and persists the trace and sidecar.
pub fn run_experiment(
    config: &ExperimentConfig,
    config_dir: &Path,
    out: &Path,
) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let built = build_problem(config, config_dir)?;
    let problem = &built.problem;

    let validation = validate_problem(
        problem,
        50,
        1e-6,
        built.sampling_box.as_ref(),
        config.seed,
    )
    .map_err(|e| anyhow!("validation setup: {e}"))?;
    if !validation.passed() {
        bail!(
            "problem validation failed with {} violation(s); first: {:?}",
            validation.violations.len(),
            validation.violations.first()
        );
    }

    let schedule = config.schedule.build()?;
    let x0 = match &config.initial_point {
        Some(p) => {
            if p.len() != problem.dim() {
                bail!("initial point dimension mismatch");
            }
            p.clone()
        }
        None => default_initial_point(problem)?,
    };

    let mut constants_json = None;
    let mut bounds_json = None;
    let trace: RunTrace<f64> = match config.solver {
        SolverSelector::PairIg => {
            let mut options = RunOptions::new(schedule, config.r, config.epochs, x0);
            options.logging = config.logging.build();
            options.infeasibility = built.infeasibility.clone();
            if config.instrumentation == InstrumentationLevel::FullInvariants {
                let constants = estimate_constants(
                    problem,
                    200,
                    built.sampling_box.as_ref(),
                    config.seed,
                )
                .map_err(|e| anyhow!("constants estimation: {e}"))?;
                constants_json = Some(serde_json::to_value(&constants)?);
                bounds_json = rate_bounds_at_final_epoch(config, &constants, problem);
                let sampler = built
                    .sampling_box
                    .clone()
                    .unwrap_or_else(|| problem.set().clone());
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x70c0_ffee);
                let mut pseudo = Vec::with_capacity(10);
                for _ in 0..10 {
                    pseudo.push(
                        sampler
                            .sample_uniform(&mut rng)
                            .map_err(|e| anyhow!("sampling pseudo points: {e}"))?,
                    );
                }
                options.instrumentation =
                    Some(InstrumentationConfig::new(constants).with_pseudo_points(pseudo));
            }
            run_pair_ig(problem, &options)
                .map_err(|e| anyhow!("pair-ig run: {e}"))?
                .trace
        }
        SolverSelector::ProjectedIg | SolverSelector::ProximalIag | SolverSelector::Saga => {
            let stepsize = match config.constant_stepsize {
                Some(g) => StepsizeRule::Constant(g),
                None => StepsizeRule::DiminishingSqrt(config.schedule.gamma0()),
            };
            let baseline = BaselineConfig {
                stepsize,
                epochs: config.epochs,
                seed: config.seed,
                logging: config.logging.build(),
            };
            let run = match config.solver {
                SolverSelector::ProjectedIg => projected_ig_run(problem, x0, &baseline),
                SolverSelector::ProximalIag => proximal_iag_run(problem, x0, &baseline),
                SolverSelector::Saga => saga_projected_run(problem, x0, &baseline),
                SolverSelector::PairIg => unreachable!(),
            };
            run.map_err(|e| anyhow!("baseline run: {e}"))?
        }
    };

    write_trace_csv(&trace, out)?;
    let sidecar = Sidecar {
        schema: "pairig-trace-sidecar/1",
        config: serde_json::to_value(config)?,
        rng_algorithm: RNG_ALGORITHM,
        dykstra_tolerance: DEFAULT_DYKSTRA_TOL,
        dykstra_max_sweeps: DEFAULT_DYKSTRA_MAX_SWEEPS,
        svm_box_radius: built.svm_box_radius,
        constants: constants_json,
        validation: Some(json!({
            "sample_pairs": validation.samples_used,
            "tol": validation.tol,
            "violations": validation.violations.len(),
        })),
        bounds: bounds_json,
        invariant_failures: trace.invariant_failures,
        truncated: trace.truncated.clone(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let sidecar_path = write_sidecar(&sidecar, out)?;
    Ok(ExperimentOutcome {
        trace_path: out.to_path_buf(),
        sidecar_path,
        invariant_failures: trace.invariant_failures,
        truncated: trace.truncated,
    })
}

/// Builds the configured problem and runs the assumption checks only.
pub fn validate_only(config: &ExperimentConfig, config_dir: &Path) -> Result<String> {
    let built = build_problem(config, config_dir)?;
    let report = validate_problem(
        &built.problem,
        200,
        1e-6,
        built.sampling_box.as_ref(),
        config.seed,
    )
    .map_err(|e| anyhow!("validation: {e}"))?;
    if report.passed() {
        Ok(format!(
            "validation passed: {} sample pairs, tol {:.0e}",
            report.samples_used, report.tol
        ))
    } else {
        bail!(
            "validation failed: {} violation(s); first: {:?}",
            report.violations.len(),
            report.violations.first()
        )
    }
}
