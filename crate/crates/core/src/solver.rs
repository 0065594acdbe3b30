//! The pair-IG method: cyclic per-agent regularized projection steps
//! with a distributed weighted-averaging recursion.
//!
//! One epoch visits the agents in the fixed cycle `1..m`. Agent `i`
//! takes the projected step
//!
//! ```text
//! x_{k,i+1} = P_X(x_{k,i} − γ_k (F_i(x_{k,i}) + η_k ∇̃f_i(x_{k,i})))
//! ```
//!
//! and immediately folds the fresh iterate into its running weighted
//! average
//!
//! ```text
//! x̄_{k+1,i} = (S_k/S_{k+1}) x̄_{k,i} + (γ_{k+1}^r/S_{k+1}) x_{k,i+1},
//! ```
//!
//! where `S_k = Σ_{t≤k} γ_t^r`. The regularization weight `η_k` multiplies
//! the subgradient only, never the mapping. Agents may start their
//! averages at arbitrary feasible points, independently of each other.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, CompensatedSum};
use crate::metrics::ConstantsEstimate;
use crate::problem::ViProblem;
use crate::scalar::Scalar;
use crate::schedule::Schedule;
use crate::trace::{AgentSample, EpochRecord, LogSchedule, RunTrace};

pub type InfeasibilityFn<T> = Arc<dyn Fn(&ViProblem<T>, &[T]) -> T + Send + Sync>;

/// Runtime invariant checking performed while the solver runs.
#[derive(Clone)]
pub struct InstrumentationConfig<T> {
    /// Problem constants the runtime bound checks are evaluated with.
    /// The checks are only guaranteed to hold for true (exact) constants.
    pub constants: ConstantsEstimate<T>,
    /// Fixed comparison points `y ∈ X` for the per-iteration descent
    /// inequality; empty disables that check.
    pub pseudo_points: Vec<Vec<T>>,
    /// Absolute slack for the two neighbor-distance bounds.
    pub neighbor_slack: T,
    /// Absolute slack for the per-iteration descent inequality.
    pub pseudo_slack: T,
    /// Feasibility tolerance for iterates and averages.
    pub feasibility_tol: T,
}

impl<T: Scalar> InstrumentationConfig<T> {
    pub fn new(constants: ConstantsEstimate<T>) -> Self {
        Self {
            constants,
            pseudo_points: Vec::new(),
            neighbor_slack: T::c(1e-9),
            pseudo_slack: T::c(1e-8),
            feasibility_tol: T::c(1e-8),
        }
    }

    pub fn with_pseudo_points(mut self, points: Vec<Vec<T>>) -> Self {
        self.pseudo_points = points;
        self
    }
}

/// Options for one pair-IG run.
pub struct RunOptions<T> {
    pub schedule: Schedule<T>,
    /// Averaging exponent `r ∈ [0, 1)`; `r = 0` is standard averaging.
    pub averaging_exponent: T,
    /// Number of epochs `N`.
    pub epochs: usize,
    /// `x_{0,1}`, must lie in the set.
    pub initial_point: Vec<T>,
    /// `x̄_{0,i}` per agent; defaults to `initial_point` for every agent.
    pub initial_averages: Option<Vec<Vec<T>>>,
    pub logging: LogSchedule,
    /// Metric logged in the `infeasibility` trace column.
    pub infeasibility: Option<InfeasibilityFn<T>>,
    pub instrumentation: Option<InstrumentationConfig<T>>,
    /// Keep the full per-step iterate history (verification runs only;
    /// memory grows as `N·m·n`).
    pub record_history: bool,
}

impl<T: Scalar> RunOptions<T> {
    pub fn new(schedule: Schedule<T>, r: T, epochs: usize, initial_point: Vec<T>) -> Self {
        Self {
            schedule,
            averaging_exponent: r,
            epochs,
            initial_point,
            initial_averages: None,
            logging: LogSchedule::EveryEpoch,
            infeasibility: None,
            instrumentation: None,
            record_history: false,
        }
    }
}

/// Full per-step history of a verification run.
pub struct RunHistory<T> {
    pub initial_averages: Vec<Vec<T>>,
    /// `steps[k][i] = x_{k,i+1}` (the iterate right after agent `i+1`'s
    /// step in epoch `k`).
    pub steps: Vec<Vec<Vec<T>>>,
    /// `cycle_starts[k] = x_k`, with `x_0 = x_{0,1}`.
    pub cycle_starts: Vec<Vec<T>>,
}

impl<T: Scalar> RunHistory<T> {
    /// Direct evaluation of the explicit weighted average
    /// `λ_{0,N} x̄_{0,i} + Σ_{k=1}^{N} λ_{k,N} x_{k−1,i+1}`, independent of
    /// the recursion the solver uses. `agent` is zero-based.
    pub fn reconstruct_average(
        &self,
        schedule: &Schedule<T>,
        r: T,
        upto: usize,
        agent: usize,
    ) -> Vec<T> {
        let weights = averaging_weights(schedule, r, upto);
        let n = self.initial_averages[agent].len();
        let mut acc: Vec<CompensatedSum<T>> =
            vec![CompensatedSum::new(T::zero()); n];
        for (c, &v) in acc.iter_mut().zip(&self.initial_averages[agent]) {
            c.add(weights[0] * v);
        }
        for (&weight, epoch_steps) in weights[1..].iter().zip(&self.steps) {
            let x = &epoch_steps[agent];
            for (c, &v) in acc.iter_mut().zip(x) {
                c.add(weight * v);
            }
        }
        acc.into_iter().map(|c| c.value()).collect()
    }
}

pub struct RunOutput<T> {
    pub trace: RunTrace<T>,
    /// `x̄_{N,i}` for every agent (or the last completed epoch on abort).
    pub final_averages: Vec<Vec<T>>,
    /// `x_N`, the cycle-start iterate after the last completed epoch.
    pub final_point: Vec<T>,
    pub history: Option<RunHistory<T>>,
}

/// The averaging weights `λ_{k,N} = γ_k^r / Σ_{j=0}^{N} γ_j^r`;
/// nonnegative and summing to one.
pub fn averaging_weights<T: Scalar>(schedule: &Schedule<T>, r: T, n: usize) -> Vec<T> {
    let mut raw = Vec::with_capacity(n + 1);
    let mut total = CompensatedSum::new(T::zero());
    for k in 0..=n {
        let w = schedule.gamma(k).powf(r);
        raw.push(w);
        total.add(w);
    }
    let t = total.value();
    raw.into_iter().map(|w| w / t).collect()
}

/// One regularized projected step for agent `i` (zero-based) from `x`:
/// `P_X(x − γ(F_i(x) + η g_i(x)))`.
pub fn agent_step<T: Scalar>(
    problem: &ViProblem<T>,
    agent: usize,
    x: &[T],
    gamma: T,
    eta: T,
    epoch: usize,
) -> Result<Vec<T>> {
    let oracle = problem.agent(agent);
    let mapped = oracle.mapping(x);
    let grad = oracle.subgradient(x);
    if !linalg::all_finite(&mapped) || !linalg::all_finite(&grad) {
        return Err(Error::NonFinite {
            source_name: "agent oracle",
            epoch,
            agent: agent + 1,
        });
    }
    let mut step = x.to_vec();
    for ((s, &fv), &gv) in step.iter_mut().zip(&mapped).zip(&grad) {
        *s = *s - gamma * (fv + eta * gv);
    }
    if !linalg::all_finite(&step) {
        return Err(Error::NonFinite {
            source_name: "iterate update",
            epoch,
            agent: agent + 1,
        });
    }
    problem.set().project(&step)
}

struct Instrumented<T> {
    config: InstrumentationConfig<T>,
    /// `F(y)` and `f(y)` for each fixed pseudo point, computed once.
    pseudo_cache: Vec<(Vec<T>, T)>,
    /// Max signed residual since the last logged epoch.
    window_max: T,
    /// Max signed residual over the whole run.
    run_max: T,
    failures: usize,
}

impl<T: Scalar> Instrumented<T> {
    fn new(config: InstrumentationConfig<T>, problem: &ViProblem<T>) -> Result<Self> {
        let mut cache = Vec::with_capacity(config.pseudo_points.len());
        for y in &config.pseudo_points {
            if !problem.set().contains(y, config.feasibility_tol) {
                return Err(Error::configuration(
                    "pseudo-bound comparison points must lie in the set",
                ));
            }
            cache.push((problem.mapping(y)?, problem.objective(y)?));
        }
        Ok(Self {
            config,
            pseudo_cache: cache,
            window_max: T::neg_infinity(),
            run_max: T::neg_infinity(),
            failures: 0,
        })
    }

    fn observe(&mut self, residual: T, slack: T) -> bool {
        self.window_max = self.window_max.max(residual);
        self.run_max = self.run_max.max(residual);
        if residual > slack {
            self.failures += 1;
            true
        } else {
            false
        }
    }

    fn take_window(&mut self) -> T {
        let v = self.window_max;
        self.window_max = T::neg_infinity();
        v
    }
}

/// Runs pair-IG for `options.epochs` epochs.
///
/// Pre-flight configuration problems return an error. A non-finite
/// oracle value mid-run stops the run and marks the trace truncated, so
/// partial traces survive for inspection.
pub fn run_pair_ig<T: Scalar>(
    problem: &ViProblem<T>,
    options: &RunOptions<T>,
) -> Result<RunOutput<T>> {
    let m = problem.num_agents();
    let n = problem.dim();
    let r = options.averaging_exponent;
    options.schedule.validate()?;
    if r < T::zero() || r >= T::one() {
        return Err(Error::configuration("averaging exponent must satisfy 0 ≤ r < 1"));
    }
    if options.initial_point.len() != n {
        return Err(Error::configuration("initial point dimension mismatch"));
    }
    let feas_tol = T::c(1e-9);
    if !problem.set().contains(&options.initial_point, feas_tol) {
        return Err(Error::configuration("initial point must lie in the set"));
    }
    let initial_averages: Vec<Vec<T>> = match &options.initial_averages {
        Some(list) => {
            if list.len() != m {
                return Err(Error::configuration(
                    "one initial average per agent is required",
                ));
            }
            for avg in list {
                if avg.len() != n || !problem.set().contains(avg, feas_tol) {
                    return Err(Error::configuration(
                        "initial averages must be feasible points of the set",
                    ));
                }
            }
            list.clone()
        }
        None => vec![options.initial_point.clone(); m],
    };

    let schedule = &options.schedule;
    let log_epochs = options.logging.epochs_to_log(options.epochs);
    let mut log_iter = log_epochs.iter().copied().peekable();

    let mut instrumented = match &options.instrumentation {
        Some(cfg) => Some(Instrumented::new(cfg.clone(), problem)?),
        None => None,
    };

    // S_0 = γ_0^r, accumulated with compensation to keep the averaging
    // identity tight over long runs.
    let mut weight_sum = CompensatedSum::new(schedule.gamma(0).powf(r));
    let mut current = options.initial_point.clone();
    let mut cycle_start = current.clone();
    let mut averages = initial_averages.clone();

    let mut history = options.record_history.then(|| RunHistory {
        initial_averages: initial_averages.clone(),
        steps: Vec::with_capacity(options.epochs),
        cycle_starts: vec![cycle_start.clone()],
    });

    let mut records: Vec<EpochRecord<T>> = Vec::with_capacity(log_epochs.len());
    let mut truncated = None;

    let make_record = |epoch: usize,
                       averages: &[Vec<T>],
                       residual: Option<T>,
                       problem: &ViProblem<T>|
     -> Result<EpochRecord<T>> {
        let (gamma, eta) = schedule.values(epoch);
        let last = &averages[m - 1];
        let mut agents = Vec::with_capacity(m);
        for avg in averages.iter() {
            agents.push(AgentSample {
                objective: problem.objective(avg)?,
                infeasibility: options.infeasibility.as_ref().map(|f| f(problem, avg)),
                consensus_dist: linalg::dist(avg, last),
                average: avg.clone(),
            });
        }
        Ok(EpochRecord {
            epoch,
            gamma,
            eta,
            agents,
            invariant_max_residual: residual,
        })
    };

    if log_iter.peek() == Some(&0) {
        log_iter.next();
        records.push(make_record(0, &averages, None, problem)?);
    }

    'epochs: for k in 0..options.epochs {
        let (gamma_k, eta_k) = schedule.values(k);
        let gamma_next_r = schedule.gamma(k + 1).powf(r);
        let s_prev = weight_sum.value();
        weight_sum.add(gamma_next_r);
        let s_next = weight_sum.value();

        let mut epoch_steps: Vec<Vec<T>> = Vec::with_capacity(m);
        #[allow(clippy::needless_range_loop)] // i is the agent index of the cycle
        for i in 0..m {
            if let Some(ins) = instrumented.as_mut() {
                // Neighbor-distance bound (a): ‖x_k − x_{k,i}‖ ≤ (i−1)γ_k(C_F+η_kC_f)/m.
                let bound = T::from_count(i) * gamma_k
                    * (ins.config.constants.mapping_bound
                        + eta_k * ins.config.constants.subgradient_bound)
                    / T::from_count(m);
                let residual = linalg::dist(&cycle_start, &current) - bound;
                let slack = ins.config.neighbor_slack;
                ins.observe(residual, slack);
            }
            match agent_step(problem, i, &current, gamma_k, eta_k, k) {
                Ok(next) => current = next,
                Err(err) => {
                    truncated = Some(err.to_string());
                    break 'epochs;
                }
            }
            // x̄_{k+1,i} from the convex-combination recursion.
            for (avg, &xv) in averages[i].iter_mut().zip(&current) {
                *avg = (s_prev / s_next) * *avg + (gamma_next_r / s_next) * xv;
            }
            epoch_steps.push(current.clone());
        }

        if let Some(ins) = instrumented.as_mut() {
            let neighbor_slack = ins.config.neighbor_slack;
            let pseudo_slack = ins.config.pseudo_slack;
            let drift =
                ins.config.constants.mapping_bound + eta_k * ins.config.constants.subgradient_bound;
            let coeff = gamma_k * drift / T::from_count(m);
            // Neighbor-distance bound (b): ‖x_{k,i+1} − x_{k+1}‖ ≤ (m−i)γ_k(C_F+η_kC_f)/m.
            let x_next = epoch_steps[m - 1].clone();
            for (i0, step) in epoch_steps.iter().enumerate() {
                let bound = T::from_count(m - (i0 + 1)) * coeff;
                let residual = linalg::dist(step, &x_next) - bound;
                ins.observe(residual, neighbor_slack);
            }
            // Per-iteration descent inequality at the fixed points.
            if !ins.pseudo_cache.is_empty() {
                let f_xk = problem.objective(&cycle_start)?;
                let gr = gamma_k.powf(r);
                let quad = gamma_k.powf(r + T::one()) * drift.powi(2);
                let mut residuals = Vec::with_capacity(ins.pseudo_cache.len());
                for (y, (f_y_map, f_y_val)) in
                    ins.config.pseudo_points.iter().zip(&ins.pseudo_cache)
                {
                    let d_k = linalg::sub(&cycle_start, y);
                    let d_next = linalg::sub(&x_next, y);
                    let lhs = T::two()
                        * gr
                        * (eta_k * (f_xk - *f_y_val) + dot(f_y_map, &d_k));
                    let rhs = gamma_k.powf(r - T::one()) * (dot(&d_k, &d_k) - dot(&d_next, &d_next))
                        + quad;
                    residuals.push(lhs - rhs);
                }
                for residual in residuals {
                    ins.observe(residual, pseudo_slack);
                }
            }
            // Feasibility of the iterate and the averages.
            let tol = ins.config.feasibility_tol;
            let mut worst = if problem.set().contains(&current, tol) {
                T::zero()
            } else {
                T::one()
            };
            for avg in &averages {
                if !problem.set().contains(avg, tol) {
                    worst = T::one();
                }
            }
            ins.observe(worst - tol, tol);
        }

        cycle_start = current.clone();
        if let Some(h) = history.as_mut() {
            h.steps.push(epoch_steps);
            h.cycle_starts.push(cycle_start.clone());
        }

        let completed = k + 1;
        if log_iter.peek() == Some(&completed) {
            log_iter.next();
            let residual = instrumented.as_mut().map(Instrumented::take_window);
            records.push(make_record(completed, &averages, residual, problem)?);
        }
    }

    let invariant_failures = instrumented.as_ref().map_or(0, |i| i.failures);
    Ok(RunOutput {
        trace: RunTrace {
            records,
            epochs_requested: options.epochs,
            num_agents: m,
            truncated,
            invariant_failures,
        },
        final_averages: averages,
        final_point: cycle_start,
        history,
    })
}

/// Norm of the complementarity infeasibility metric
/// `φ(x) = ‖max{0,−x}‖² + ‖max{0,−F(x)}‖² + |xᵀF(x)|` packaged as a
/// trace metric.
pub fn ncp_phi_metric<T: Scalar>() -> InfeasibilityFn<T> {
    Arc::new(|problem: &ViProblem<T>, x: &[T]| {
        let mapped = problem.mapping(x).unwrap_or_else(|_| vec![T::nan(); x.len()]);
        crate::metrics::ncp_infeasibility_phi(x, &mapped)
    })
}

/// Euclidean-norm helper exposed for trace consumers.
pub fn iterate_norm<T: Scalar>(x: &[T]) -> T {
    norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{AgentOracle, BasicAgent};
    use crate::problem::ProblemMetadata;
    use crate::geometry::SetSpec;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_quadratic_problem(set: SetSpec<f64>) -> ViProblem<f64> {
        let agent: Arc<dyn AgentOracle<f64>> =
            Arc::new(BasicAgent::quadratic(vec![0.0; set.dim()], 1.0));
        ViProblem::new(vec![agent], set, ProblemMetadata::default()).unwrap()
    }

    #[test]
    fn agent_step_hand_example() {
        // F ≡ 0, η = 1, γ = 1, f(x) = ½x², X = ℝ: 2 − 1·(0 + 2) = 0.
        let p = single_quadratic_problem(SetSpec::whole_space(1));
        let next = agent_step(&p, 0, &[2.0], 1.0, 1.0, 0).unwrap();
        assert_eq!(next, vec![0.0]);
    }

    #[test]
    fn agent_step_zero_gamma_is_identity() {
        let p = single_quadratic_problem(SetSpec::whole_space(1));
        let next = agent_step(&p, 0, &[2.0], 0.0, 1.0, 0).unwrap();
        assert_eq!(next, vec![2.0]);
    }

    #[test]
    fn agent_step_singleton_set_projects_to_it() {
        let p = single_quadratic_problem(SetSpec::hyper_box(vec![0.0], vec![0.0]).unwrap());
        let next = agent_step(&p, 0, &[0.0], 5.0, 3.0, 0).unwrap();
        assert_eq!(next, vec![0.0]);
    }

    #[test]
    fn agent_step_aborts_on_non_finite_oracle() {
        let agent: Arc<dyn AgentOracle<f64>> = Arc::new(BasicAgent::new(
            1,
            Arc::new(|_: &[f64]| 0.0),
            Arc::new(|_: &[f64]| vec![f64::NAN]),
            Arc::new(|_: &[f64]| vec![0.0]),
        ));
        let p = ViProblem::new(vec![agent], SetSpec::whole_space(1), ProblemMetadata::default())
            .unwrap();
        let err = agent_step(&p, 0, &[1.0], 1.0, 1.0, 7).unwrap_err();
        assert!(matches!(err, Error::NonFinite { epoch: 7, agent: 1, .. }));
    }

    #[test]
    fn averaging_weights_sum_to_one() {
        let s = Schedule::rate(0.7, 1.0, 0.25).unwrap();
        for (r, n) in [(0.0, 3), (0.5, 17), (0.9, 200)] {
            let w = averaging_weights(&s, r, n);
            assert_eq!(w.len(), n + 1);
            assert!(w.iter().all(|&x| x >= 0.0));
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "sum {total}");
        }
    }

    #[test]
    fn averaging_weights_uniform_when_r_zero() {
        let s = Schedule::rate(1.0, 1.0, 0.25).unwrap();
        let w: Vec<f64> = averaging_weights(&s, 0.0, 3);
        for &x in &w {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn averaging_weights_single_epoch_is_one() {
        let s = Schedule::rate(0.3, 1.0, 0.25).unwrap();
        assert_eq!(averaging_weights(&s, 0.6, 0), vec![1.0]);
    }

    #[test]
    fn averaging_weights_power_law_example() {
        // γ_k = 1/√(k+1), r = 0.5, N = 1 → weights ∝ (1, 2^{-1/4}).
        let s = Schedule::rate(1.0, 1.0, 0.25).unwrap();
        let w = averaging_weights(&s, 0.5, 1);
        let z = 1.0 + 2f64.powf(-0.25);
        assert!((w[0] - 1.0 / z).abs() < 1e-15);
        assert!((w[1] - 2f64.powf(-0.25) / z).abs() < 1e-15);
    }

    fn two_agent_problem() -> ViProblem<f64> {
        let a1: Arc<dyn AgentOracle<f64>> = Arc::new(BasicAgent::quadratic(vec![1.0, 0.5], 1.0));
        let a2: Arc<dyn AgentOracle<f64>> = Arc::new(BasicAgent::quadratic(vec![-0.5, 0.0], 2.0));
        ViProblem::new(
            vec![a1, a2],
            SetSpec::symmetric_box(2, 2.0),
            ProblemMetadata::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_epochs_returns_initial_averages() {
        let p = two_agent_problem();
        let opts = RunOptions::new(
            Schedule::rate(0.5, 0.5, 0.25).unwrap(),
            0.0,
            0,
            vec![0.25, -0.5],
        );
        let out = run_pair_ig(&p, &opts).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert_eq!(out.final_averages[0], vec![0.25, -0.5]);
        assert_eq!(out.final_averages[1], vec![0.25, -0.5]);
    }

    #[test]
    fn first_epoch_average_matches_recursion() {
        let p = two_agent_problem();
        let schedule = Schedule::rate(0.5, 0.5, 0.25).unwrap();
        let r = 0.4;
        let mut opts = RunOptions::new(schedule, r, 1, vec![0.25, -0.5]);
        opts.record_history = true;
        let out = run_pair_ig(&p, &opts).unwrap();
        let h = out.history.as_ref().unwrap();
        // x̄_{1,i} = (γ₀^r x̄_{0,i} + γ₁^r x_{0,i+1}) / (γ₀^r + γ₁^r)
        let g0r = schedule.gamma(0).powf(r);
        let g1r = schedule.gamma(1).powf(r);
        for i in 0..2 {
            let expect: Vec<f64> = h.initial_averages[i]
                .iter()
                .zip(&h.steps[0][i])
                .map(|(&a, &b)| (g0r * a + g1r * b) / (g0r + g1r))
                .collect();
            for (got, want) in out.final_averages[i].iter().zip(&expect) {
                assert!((got - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_inputs_average_to_the_constant() {
        // Fixed point of the recursion: everything starts (and stays) at c.
        let c = vec![0.5, 0.5];
        let agents: Vec<Arc<dyn AgentOracle<f64>>> = (0..3)
            .map(|_| {
                Arc::new(BasicAgent::quadratic(c.clone(), 1.0)) as Arc<dyn AgentOracle<f64>>
            })
            .collect();
        let p = ViProblem::new(
            agents,
            SetSpec::symmetric_box(2, 1.0),
            ProblemMetadata::default(),
        )
        .unwrap();
        let opts = RunOptions::new(Schedule::rate(0.5, 0.5, 0.25).unwrap(), 0.0, 50, c.clone());
        let out = run_pair_ig(&p, &opts).unwrap();
        for avg in &out.final_averages {
            for (a, b) in avg.iter().zip(&c) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn r_zero_average_is_arithmetic_mean_of_history() {
        let p = two_agent_problem();
        let schedule = Schedule::rate(0.5, 0.5, 0.25).unwrap();
        let n = 13;
        let mut opts = RunOptions::new(schedule, 0.0, n, vec![0.25, -0.5]);
        opts.record_history = true;
        let out = run_pair_ig(&p, &opts).unwrap();
        let h = out.history.as_ref().unwrap();
        for i in 0..2 {
            let mut mean = h.initial_averages[i].clone();
            for k in 0..n {
                linalg::axpy(&mut mean, 1.0, &h.steps[k][i]);
            }
            for v in mean.iter_mut() {
                *v /= (n + 1) as f64;
            }
            for (got, want) in out.final_averages[i].iter().zip(&mean) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    // m = 1, F ≡ 0 reduces to projected subgradient with averaging; on
    // f(x) = |x| over [−1, 1] the averaged iterate approaches 0.
    #[test]
    fn reduces_to_projected_subgradient() {
        let agent: Arc<dyn AgentOracle<f64>> = Arc::new(BasicAgent::with_zero_mapping(
            1,
            Arc::new(|x: &[f64]| x[0].abs()),
            Arc::new(|x: &[f64]| vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }]),
        ));
        let p = ViProblem::new(
            vec![agent],
            SetSpec::hyper_box(vec![-1.0], vec![1.0]).unwrap(),
            ProblemMetadata::default(),
        )
        .unwrap();
        let opts = RunOptions::new(
            Schedule::rate(0.5, 1.0, 0.25).unwrap(),
            0.0,
            4000,
            vec![1.0],
        );
        let out = run_pair_ig(&p, &opts).unwrap();
        // Independent reference: same recursion written directly.
        let mut x = 1.0f64;
        let mut sum = x;
        for k in 0..4000 {
            let gamma = 0.5 / ((k + 1) as f64).sqrt();
            let eta = 1.0 / ((k + 1) as f64).powf(0.25);
            let g = if x >= 0.0 { 1.0 } else { -1.0 };
            x = (x - gamma * eta * g).clamp(-1.0, 1.0);
            sum += x;
        }
        let reference = sum / 4001.0;
        assert!((out.final_averages[0][0] - reference).abs() < 1e-10);
        assert!(out.final_averages[0][0].abs() < 0.05);
    }

    #[test]
    fn infeasible_initial_point_is_rejected() {
        let p = two_agent_problem();
        let opts = RunOptions::new(
            Schedule::rate(0.5, 0.5, 0.25).unwrap(),
            0.0,
            1,
            vec![5.0, 0.0],
        );
        assert!(matches!(
            run_pair_ig(&p, &opts),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn invalid_averaging_exponent_is_rejected() {
        let p = two_agent_problem();
        let opts = RunOptions::new(
            Schedule::rate(0.5, 0.5, 0.25).unwrap(),
            1.0,
            1,
            vec![0.0, 0.0],
        );
        assert!(run_pair_ig(&p, &opts).is_err());
    }

    #[test]
    fn hand_built_invalid_schedule_is_rejected_before_any_step() {
        let p = two_agent_problem();
        // bypasses the smart constructor with b outside (0, 0.5)
        let opts = RunOptions::new(
            Schedule::Rate {
                gamma0: 1.0,
                eta0: 1.0,
                b: 0.9,
            },
            0.0,
            5,
            vec![0.0, 0.0],
        );
        assert!(matches!(
            run_pair_ig(&p, &opts),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn non_finite_oracle_truncates_trace() {
        let agent: Arc<dyn AgentOracle<f64>> = Arc::new(BasicAgent::new(
            1,
            Arc::new(|x: &[f64]| x[0]),
            Arc::new(|_: &[f64]| vec![1.0]),
            Arc::new(|x: &[f64]| vec![if x[0] < 0.4 { 0.0 } else { f64::INFINITY }]),
        ));
        let p = ViProblem::new(
            vec![agent],
            SetSpec::hyper_box(vec![-1.0], vec![1.0]).unwrap(),
            ProblemMetadata::default(),
        )
        .unwrap();
        let opts = RunOptions::new(
            Schedule::rate(0.1, 0.1, 0.25).unwrap(),
            0.0,
            100,
            vec![0.5],
        );
        let out = run_pair_ig(&p, &opts).unwrap();
        assert!(out.trace.truncated.is_some());
        assert!(!out.trace.records.is_empty());
    }

    #[test]
    fn trace_has_n_plus_one_records_when_logging_every_epoch() {
        let p = two_agent_problem();
        let opts = RunOptions::new(
            Schedule::rate(0.5, 0.5, 0.25).unwrap(),
            0.3,
            17,
            vec![0.0, 0.0],
        );
        let out = run_pair_ig(&p, &opts).unwrap();
        assert_eq!(out.trace.records.len(), 18);
        assert!(out
            .trace
            .records
            .windows(2)
            .all(|w| w[0].epoch < w[1].epoch));
    }

    // x̄_{N,i} must equal the explicit convex combination of the swept
    // iterates, for randomized problems, r values, and initial averages.
    #[test]
    fn averaging_identity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for trial in 0..10 {
            let m = rng.random_range(1..=4);
            let dim = rng.random_range(1..=5);
            let r = [0.0, 0.3, 0.7][trial % 3];
            let agents: Vec<Arc<dyn AgentOracle<f64>>> = (0..m)
                .map(|_| {
                    let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    Arc::new(BasicAgent::quadratic(c, rng.random_range(0.5..2.0)))
                        as Arc<dyn AgentOracle<f64>>
                })
                .collect();
            let p = ViProblem::new(
                agents,
                SetSpec::symmetric_box(dim, 2.0),
                ProblemMetadata::default(),
            )
            .unwrap();
            let schedule = Schedule::rate(rng.random_range(0.1..1.0), 0.5, 0.25).unwrap();
            let n = rng.random_range(5..60);
            let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let init_avgs: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let mut opts = RunOptions::new(schedule, r, n, x0);
            opts.initial_averages = Some(init_avgs);
            opts.record_history = true;
            let out = run_pair_ig(&p, &opts).unwrap();
            let h = out.history.as_ref().unwrap();
            for i in 0..m {
                let direct = h.reconstruct_average(&schedule, r, n, i);
                for (a, b) in out.final_averages[i].iter().zip(&direct) {
                    assert!(
                        (a - b).abs() < 1e-12,
                        "trial {trial} agent {i}: {a} vs {b}"
                    );
                }
            }
        }
    }
}
