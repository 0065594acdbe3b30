//! The distributed VI-constrained problem: `m` agent oracles, a shared
//! projectable set, and optional known-optimum metadata, plus builders
//! for the complementarity and coupled-equality sub-models.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::SetSpec;
use crate::linalg::{self, dot};
use crate::oracle::{AgentOracle, BasicAgent, ObjectiveFn, VectorFn};
use crate::scalar::Scalar;

/// Optional analytic knowledge about a problem instance, used by rate
/// checks and the regularized reference solver.
#[derive(Debug, Clone)]
pub struct ProblemMetadata<T> {
    pub name: String,
    /// `f*`, when analytically known or computed by an independent oracle.
    pub known_optimal_value: Option<T>,
    pub known_optimal_point: Option<Vec<T>>,
    /// `μ_min = min_i μ_{f_i}` when every `f_i` is strongly convex.
    pub strong_convexity_modulus: Option<T>,
}

impl<T> Default for ProblemMetadata<T> {
    fn default() -> Self {
        Self {
            name: String::new(),
            known_optimal_value: None,
            known_optimal_point: None,
            strong_convexity_modulus: None,
        }
    }
}

impl<T: Scalar> ProblemMetadata<T> {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }
}

/// Minimize `Σ_i f_i(x)` over `x ∈ SOL(X, Σ_i F_i)`.
///
/// Immutable after construction; safe to share across concurrent runs.
pub struct ViProblem<T> {
    agents: Vec<Arc<dyn AgentOracle<T>>>,
    set: SetSpec<T>,
    metadata: ProblemMetadata<T>,
}

impl<T: Scalar> ViProblem<T> {
    pub fn new(
        agents: Vec<Arc<dyn AgentOracle<T>>>,
        set: SetSpec<T>,
        metadata: ProblemMetadata<T>,
    ) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::argument("a problem needs at least one agent"));
        }
        let n = set.dim();
        if agents.iter().any(|a| a.dim() != n) {
            return Err(Error::argument(
                "all agents must share the set's dimension",
            ));
        }
        if let Some(x) = &metadata.known_optimal_point {
            if x.len() != n {
                return Err(Error::argument("known optimal point dimension mismatch"));
            }
            if set.is_compact() && !set.contains(x, T::c(1e-7)) {
                return Err(Error::argument(
                    "known optimal point lies outside the compact set",
                ));
            }
        }
        Ok(Self {
            agents,
            set,
            metadata,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn agent(&self, i: usize) -> &dyn AgentOracle<T> {
        self.agents[i].as_ref()
    }

    pub fn agents(&self) -> &[Arc<dyn AgentOracle<T>>] {
        &self.agents
    }

    pub fn set(&self) -> &SetSpec<T> {
        &self.set
    }

    pub fn metadata(&self) -> &ProblemMetadata<T> {
        &self.metadata
    }

    /// Global objective `f(x) = Σ_i f_i(x)`.
    pub fn objective(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        Ok(self.agents.iter().map(|a| a.objective(x)).sum())
    }

    /// Global mapping `F(x) = Σ_i F_i(x)`.
    pub fn mapping(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let mut out = vec![T::zero(); x.len()];
        for a in &self.agents {
            linalg::axpy(&mut out, T::one(), &a.mapping(x));
        }
        Ok(out)
    }

    /// Sum of the agents' subgradient selections, an element of `∂f(x)`.
    pub fn subgradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let mut out = vec![T::zero(); x.len()];
        for a in &self.agents {
            linalg::axpy(&mut out, T::one(), &a.subgradient(x));
        }
        Ok(out)
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::argument(format!(
                "point has dimension {}, problem has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Per-sample oracles for the sample-average complementarity model: the
/// objective and mapping of one observation `ξ_ℓ`.
pub struct SampleOracle<T> {
    pub objective: ObjectiveFn<T>,
    pub subgradient: VectorFn<T>,
    pub mapping: VectorFn<T>,
}

/// Builds the distributed complementarity problem over the nonnegative
/// orthant: agent `i` sums the sample oracles in its index cell.
pub fn build_ncp_problem<T: Scalar>(
    dim: usize,
    samples: Vec<SampleOracle<T>>,
    partition: &[Vec<usize>],
    metadata: ProblemMetadata<T>,
) -> Result<ViProblem<T>> {
    if partition.is_empty() {
        return Err(Error::argument("partition must have at least one cell"));
    }
    if partition.iter().any(Vec::is_empty) {
        return Err(Error::argument("empty partition cell"));
    }
    let mut seen = vec![false; samples.len()];
    for &idx in partition.iter().flatten() {
        if idx >= samples.len() {
            return Err(Error::argument("partition index out of range"));
        }
        if seen[idx] {
            return Err(Error::argument("partition cells must be disjoint"));
        }
        seen[idx] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::argument("partition must cover every sample"));
    }

    let samples = Arc::new(samples);
    let agents: Vec<Arc<dyn AgentOracle<T>>> = partition
        .iter()
        .map(|cell| {
            let cell_obj = cell.clone();
            let cell_grad = cell.clone();
            let cell_map = cell.clone();
            let s_obj = Arc::clone(&samples);
            let s_grad = Arc::clone(&samples);
            let s_map = Arc::clone(&samples);
            Arc::new(BasicAgent::new(
                dim,
                Arc::new(move |x: &[T]| cell_obj.iter().map(|&l| (s_obj[l].objective)(x)).sum()),
                Arc::new(move |x: &[T]| {
                    let mut g = vec![T::zero(); x.len()];
                    for &l in &cell_grad {
                        linalg::axpy(&mut g, T::one(), &(s_grad[l].subgradient)(x));
                    }
                    g
                }),
                Arc::new(move |x: &[T]| {
                    let mut v = vec![T::zero(); x.len()];
                    for &l in &cell_map {
                        linalg::axpy(&mut v, T::one(), &(s_map[l].mapping)(x));
                    }
                    v
                }),
            )) as Arc<dyn AgentOracle<T>>
        })
        .collect();

    ViProblem::new(agents, SetSpec::nonnegative_orthant(dim), metadata)
}

/// Builds the coupled-equality model `Σ F_i(x) = 0` as an unconstrained
/// VI over the whole space; the constraint lives entirely in the mapping.
pub fn build_equality_coupled_problem<T: Scalar>(
    agents: Vec<Arc<dyn AgentOracle<T>>>,
    metadata: ProblemMetadata<T>,
) -> Result<ViProblem<T>> {
    let dim = agents
        .first()
        .ok_or_else(|| Error::argument("a problem needs at least one agent"))?
        .dim();
    ViProblem::new(agents, SetSpec::whole_space(dim), metadata)
}

/// One detected violation of the standing assumptions.
#[derive(Debug, Clone)]
pub struct ValidationViolation<T> {
    pub agent: usize,
    pub kind: ViolationKind,
    pub magnitude: T,
    pub witness: (Vec<T>, Vec<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Convexity,
    Monotonicity,
    SubgradientNondeterministic,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct ValidationReport<T> {
    pub violations: Vec<ValidationViolation<T>>,
    pub samples_used: usize,
    pub tol: T,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const DEFAULT_VALIDATION_SAMPLES: usize = 200;
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-8;

/// Numerically spot-checks convexity of each `f_i` (subgradient
/// inequality on sampled pairs), monotonicity of each `F_i`, and
/// determinism of the subgradient selection.
///
/// Compact sets are sampled directly; unbounded sets need a caller
/// supplied sampling box.
pub fn validate_problem<T: Scalar>(
    problem: &ViProblem<T>,
    sample_pairs: usize,
    tol: T,
    sampling_box: Option<&SetSpec<T>>,
    seed: u64,
) -> Result<ValidationReport<T>> {
    let domain = match sampling_box {
        Some(b) => b,
        None if problem.set().is_compact() => problem.set(),
        None => {
            return Err(Error::argument(
                "validate_problem on an unbounded set needs a sampling box",
            ))
        }
    };
    if domain.dim() != problem.dim() {
        return Err(Error::argument("sampling box dimension mismatch"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..sample_pairs {
        let x = domain.sample_uniform(&mut rng)?;
        let y = domain.sample_uniform(&mut rng)?;
        let d_xy = linalg::sub(&x, &y);
        for (idx, agent) in problem.agents().iter().enumerate() {
            let fx = agent.objective(&x);
            let fy = agent.objective(&y);
            let gx = agent.subgradient(&x);
            let mapped_x = agent.mapping(&x);
            let mapped_y = agent.mapping(&y);
            if !fx.is_finite()
                || !fy.is_finite()
                || !linalg::all_finite(&gx)
                || !linalg::all_finite(&mapped_x)
            {
                violations.push(ValidationViolation {
                    agent: idx,
                    kind: ViolationKind::NonFinite,
                    magnitude: T::infinity(),
                    witness: (x.clone(), y.clone()),
                });
                continue;
            }
            // f_i(y) ≥ f_i(x) + ⟨g, y−x⟩ − tol
            let linearization = fx + dot(&gx, &linalg::sub(&y, &x));
            if fy < linearization - tol {
                violations.push(ValidationViolation {
                    agent: idx,
                    kind: ViolationKind::Convexity,
                    magnitude: linearization - fy,
                    witness: (x.clone(), y.clone()),
                });
            }
            // ⟨F_i(x) − F_i(y), x − y⟩ ≥ −tol
            let mono = dot(&linalg::sub(&mapped_x, &mapped_y), &d_xy);
            if mono < -tol {
                violations.push(ValidationViolation {
                    agent: idx,
                    kind: ViolationKind::Monotonicity,
                    magnitude: -mono,
                    witness: (x.clone(), y.clone()),
                });
            }
            let gx_again = agent.subgradient(&x);
            if gx != gx_again {
                violations.push(ValidationViolation {
                    agent: idx,
                    kind: ViolationKind::SubgradientNondeterministic,
                    magnitude: linalg::dist(&gx, &gx_again),
                    witness: (x.clone(), x.clone()),
                });
            }
        }
    }
    Ok(ValidationReport {
        violations,
        samples_used: sample_pairs,
        tol,
    })
}
