//! Builders for the two bundled experiments: the stochastic traffic
//! equilibrium problem and distributed soft-margin SVM, plus a small
//! JSON-described custom problem class.

use std::sync::Arc;

use anyhow::{ensure, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use pairig::geometry::SetSpec;
use pairig::linalg::Matrix;
use pairig::metrics::AffineForm;
use pairig::oracle::{
    build_penalty_agent, AgentOracle, BasicAgent, ConstraintBlock, Inequality,
};
use pairig::problem::{ProblemMetadata, ViProblem};

/// Arc travel-cost matrix of the five-arc network; two-way roads couple
/// the flow on both directions.
pub const TRAFFIC_COST_MATRIX: [[f64; 5]; 5] = [
    [0.92, 0.0, 0.0, 5.0, 0.0],
    [0.0, 5.92, 0.0, 0.0, 5.0],
    [0.0, 0.0, 10.92, 0.0, 0.0],
    [2.0, 0.0, 0.0, 10.92, 0.0],
    [0.0, 1.0, 0.0, 0.0, 15.92],
];

/// Fixed part of the arc costs.
pub const TRAFFIC_COST_OFFSET: [f64; 5] = [1000.0, 950.0, 3000.0, 1000.0, 1300.0];

/// (OD pair, arc) incidence: arcs 1–3 serve the first pair, arcs 4–5 the
/// second.
pub const TRAFFIC_INCIDENCE: [[f64; 5]; 2] = [
    [1.0, 1.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, 1.0],
];

pub const TRAFFIC_DEMAND_MEANS: [f64; 2] = [210.0, 120.0];
pub const TRAFFIC_DEMAND_STD: f64 = 10.0;
pub const TRAFFIC_COST_STD: f64 = 300.0;

/// Name of the RNG stack, recorded in trace sidecars so other
/// implementations can match the distributions statistically.
pub const RNG_ALGORITHM: &str = "ChaCha8 (64-bit seed) + ziggurat normal";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficNetworkSpec {
    pub samples: usize,
    pub agents: usize,
    pub seed: u64,
}

impl TrafficNetworkSpec {
    pub fn new(samples: usize, agents: usize, seed: u64) -> Self {
        Self {
            samples,
            agents,
            seed,
        }
    }
}

/// A traffic problem instance: the decision vector stacks arc flows `h`
/// (5) and minimum OD travel costs `u` (2).
pub struct TrafficProblem {
    pub problem: ViProblem<f64>,
    /// The sample-average global mapping `F(x) = M x + ξ̄` in affine form.
    pub global_form: AffineForm<f64>,
    pub spec: TrafficNetworkSpec,
}

/// The 7×7 block matrix `[[C, −Bᵀ], [B, 0]]` of the equilibrium mapping.
pub fn traffic_block_matrix() -> Matrix<f64> {
    let mut m = Matrix::zeros(7, 7);
    for i in 0..5 {
        for j in 0..5 {
            m[(i, j)] = TRAFFIC_COST_MATRIX[i][j];
        }
    }
    for od in 0..2 {
        for arc in 0..5 {
            m[(arc, 5 + od)] = -TRAFFIC_INCIDENCE[od][arc];
            m[(5 + od, arc)] = TRAFFIC_INCIDENCE[od][arc];
        }
    }
    m
}

/// One observation's mapping `F(x, ξ) = [[C, −Bᵀ],[B, 0]]x + (q̃, −d̃)`,
/// before any sample normalization.
pub fn traffic_sample_mapping(x: &[f64], q_tilde: &[f64; 5], d_tilde: &[f64; 2]) -> Vec<f64> {
    let mut v = traffic_block_matrix().matvec(x);
    for i in 0..5 {
        v[i] += q_tilde[i];
    }
    for i in 0..2 {
        v[5 + i] -= d_tilde[i];
    }
    v
}

/// Draws the stochastic demands and costs and assembles the per-agent
/// oracles of the sample-average equilibrium problem over `ℝ⁷₊`.
///
/// Normalization: each agent's mapping is the mean over its own samples
/// (`F_i = (1/|S_i|) Σ_{ℓ∈S_i} F(·, ξ_ℓ)`), and the objective carries
/// the global sample mean (`f = (1/|S|) Σ f(·, ξ_ℓ)`, so `f(0) ≈ Σ q`).
/// Positive rescaling changes neither the solution set nor the
/// complementarity structure, keeps magnitudes well inside `f64` range,
/// and makes the `γ₀ ∈ {0.1, 1}` stepsize grid behave as intended.
pub fn build_traffic_problem(spec: &TrafficNetworkSpec) -> Result<TrafficProblem> {
    ensure!(spec.samples > 0, "traffic problem needs samples > 0");
    ensure!(spec.agents > 0, "traffic problem needs agents > 0");
    ensure!(
        spec.samples.is_multiple_of(spec.agents),
        "sample count {} must be divisible by agent count {}",
        spec.samples,
        spec.agents
    );
    let per_agent = spec.samples / spec.agents;
    // objective weight: global sample mean; mapping weight: per-agent mean
    let weight = 1.0 / spec.samples as f64;
    let map_weight = 1.0 / per_agent as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let demand = [
        Normal::new(TRAFFIC_DEMAND_MEANS[0], TRAFFIC_DEMAND_STD)?,
        Normal::new(TRAFFIC_DEMAND_MEANS[1], TRAFFIC_DEMAND_STD)?,
    ];
    let costs: Vec<Normal<f64>> = TRAFFIC_COST_OFFSET
        .iter()
        .map(|&q| Normal::new(q, TRAFFIC_COST_STD))
        .collect::<std::result::Result<_, _>>()?;

    let matrix = Arc::new(traffic_block_matrix());
    // Gradient of (Ch)ᵀ1₅ with respect to x = (h, u): (Cᵀ1₅, 0₂).
    let mut cost_grad = vec![0.0; 7];
    for j in 0..5 {
        cost_grad[j] = (0..5).map(|i| TRAFFIC_COST_MATRIX[i][j]).sum();
    }

    let mut agents: Vec<Arc<dyn AgentOracle<f64>>> = Vec::with_capacity(spec.agents);
    let mut total_offset = vec![0.0; 7];
    for _ in 0..spec.agents {
        // Sum of (q̃, −d̃) across this agent's samples. The linear parts
        // of all samples coincide, so the per-agent mean mapping is the
        // single affine form F_i(x) = Mx + ξ̄_i.
        let mut offset_sum = vec![0.0; 7];
        let mut q_component_sum = 0.0;
        for _ in 0..per_agent {
            let d = [demand[0].sample(&mut rng), demand[1].sample(&mut rng)];
            for i in 0..5 {
                let q = costs[i].sample(&mut rng);
                offset_sum[i] += q;
                q_component_sum += q;
            }
            offset_sum[5] -= d[0];
            offset_sum[6] -= d[1];
        }
        for (t, &o) in total_offset.iter_mut().zip(&offset_sum) {
            *t += o * map_weight;
        }
        let count = per_agent as f64;
        // f_i(x) = weight·(|S_i|(Ch)ᵀ1 + Σ_ℓ q̃_ℓᵀ1): affine with this
        // gradient and constant term.
        let grad = scale_vec(&cost_grad, weight * count);
        let grad_for_f = grad.clone();
        let const_term = weight * q_component_sum;
        let agent = BasicAgent::new(
            7,
            Arc::new(move |x: &[f64]| {
                grad_for_f.iter().zip(x).map(|(gv, xv)| gv * xv).sum::<f64>() + const_term
            }),
            Arc::new(move |_: &[f64]| grad.clone()),
            Arc::new(|x: &[f64]| vec![0.0; x.len()]),
        )
        .with_affine_mapping(
            Arc::clone(&matrix),
            scale_vec(&offset_sum, map_weight),
            1.0,
        );
        agents.push(Arc::new(agent));
    }

    let metadata = ProblemMetadata::named(format!(
        "traffic-equilibrium(samples={}, agents={}, seed={})",
        spec.samples, spec.agents, spec.seed
    ));
    let problem = ViProblem::new(agents, SetSpec::nonnegative_orthant(7), metadata)
        .context("traffic problem assembly")?;
    // Global mapping: Σ_i (per-agent mean) = m·(Mx) + Σ_i ξ̄_i.
    let mut global_matrix = traffic_block_matrix();
    for i in 0..7 {
        for j in 0..7 {
            global_matrix[(i, j)] *= spec.agents as f64;
        }
    }
    let global_form =
        AffineForm::new(global_matrix, total_offset).context("traffic affine form")?;
    Ok(TrafficProblem {
        problem,
        global_form,
        spec: spec.clone(),
    })
}

fn scale_vec(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmDatasetSpec {
    /// Feature dimension `n`.
    pub dim: usize,
    /// Sample count `|S|`.
    pub samples: usize,
    /// Agent count `m`.
    pub agents: usize,
    /// Margin penalty `λ`.
    pub lambda: f64,
    pub seed: u64,
    /// Cluster center magnitude along `1ₙ/√n`; defaults to 1.5.
    #[serde(default = "default_separation")]
    pub separation: f64,
}

fn default_separation() -> f64 {
    1.5
}

impl SvmDatasetSpec {
    pub fn new(dim: usize, samples: usize, agents: usize, lambda: f64, seed: u64) -> Self {
        Self {
            dim,
            samples,
            agents,
            lambda,
            seed,
            separation: default_separation(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmDataset {
    pub features: Vec<Vec<f64>>,
    /// Labels in {−1, +1}.
    pub labels: Vec<f64>,
}

/// Two unit-variance Gaussian blobs centered at `±separation·1ₙ/√n`,
/// labels alternating (+1 for even indices), deterministic under the
/// seed.
pub fn generate_synthetic_svm_data(spec: &SvmDatasetSpec) -> Result<SvmDataset> {
    ensure!(spec.samples >= spec.agents, "need at least one sample per agent");
    ensure!(spec.lambda > 0.0, "λ must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0)?;
    let shift = spec.separation / (spec.dim as f64).sqrt();
    let mut features = Vec::with_capacity(spec.samples);
    let mut labels = Vec::with_capacity(spec.samples);
    for j in 0..spec.samples {
        let label = if j % 2 == 0 { 1.0 } else { -1.0 };
        let point: Vec<f64> = (0..spec.dim)
            .map(|_| label * shift + normal.sample(&mut rng))
            .collect();
        features.push(point);
        labels.push(label);
    }
    Ok(SvmDataset { features, labels })
}

/// Bounding-box half-width making the feasible set compact; recorded in
/// the trace sidecar.
pub const SVM_BOX_RADIUS: f64 = 1e3;

pub struct SvmProblem {
    pub problem: ViProblem<f64>,
    /// Per-agent constraint blocks, kept for the feasibility-residual
    /// metric.
    pub blocks: Vec<Arc<ConstraintBlock<f64>>>,
    pub dataset: SvmDataset,
    pub spec: SvmDatasetSpec,
}

impl SvmProblem {
    /// Aggregated constraint residual `Σ_j max{0, g_j(x)}²` over every
    /// agent's local constraints; zero exactly on feasible points.
    pub fn constraint_residual(&self, x: &[f64]) -> f64 {
        self.blocks.iter().map(|b| b.constraint_residual(x)).sum()
    }
}

/// Casts the soft-margin SVM into the constrained finite-sum model: the
/// decision vector is `(w, b, z)`, agent `i` owns the margin constraints
/// of its samples through the penalty mapping, and the shared set is a
/// large box.
pub fn build_svm_problem(spec: &SvmDatasetSpec, dataset: &SvmDataset) -> Result<SvmProblem> {
    ensure!(
        dataset.features.len() == dataset.labels.len(),
        "feature/label count mismatch"
    );
    ensure!(
        dataset.features.len() == spec.samples,
        "dataset size does not match the spec"
    );
    ensure!(spec.agents > 0, "need at least one agent");
    ensure!(
        spec.samples >= spec.agents,
        "cannot split {} samples across {} agents",
        spec.samples,
        spec.agents
    );
    let n = spec.dim;
    let total_dim = n + 1 + spec.samples;
    let m = spec.agents;

    // Contiguous near-equal split of the sample indices.
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); m];
    for j in 0..spec.samples {
        cells[j * m / spec.samples].push(j);
    }

    let mut agents: Vec<Arc<dyn AgentOracle<f64>>> = Vec::with_capacity(m);
    let mut blocks = Vec::with_capacity(m);
    for cell in &cells {
        ensure!(!cell.is_empty(), "empty agent cell in the sample split");
        let mut inequalities = Vec::with_capacity(2 * cell.len());
        for &j in cell {
            let v = dataset.labels[j];
            let u = &dataset.features[j];
            // v_j(wᵀu_j + b) ≥ 1 − z_j  ⇔  −v_j(wᵀu_j) − v_j b − z_j ≤ −1
            let mut a = vec![0.0; total_dim];
            for (c, &uc) in a.iter_mut().zip(u) {
                *c = -v * uc;
            }
            a[n] = -v;
            a[n + 1 + j] = -1.0;
            inequalities.push(Inequality::affine(a, -1.0));
            // z_j ≥ 0 ⇔ −z_j ≤ 0
            let mut a2 = vec![0.0; total_dim];
            a2[n + 1 + j] = -1.0;
            inequalities.push(Inequality::affine(a2, 0.0));
        }
        let block = Arc::new(ConstraintBlock::new(total_dim, None, inequalities)?);
        blocks.push(Arc::clone(&block));

        let cell_obj = cell.clone();
        let cell_grad = cell.clone();
        let inv_lambda = 1.0 / spec.lambda;
        let m_f = m as f64;
        let objective = Arc::new(move |x: &[f64]| {
            let w_norm_sq: f64 = x[..n].iter().map(|v| v * v).sum();
            let slack: f64 = cell_obj.iter().map(|&j| x[n + 1 + j]).sum();
            w_norm_sq / (2.0 * m_f) + inv_lambda * slack
        });
        let subgradient = Arc::new(move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            for (gc, &wc) in g.iter_mut().zip(&x[..n]) {
                *gc = wc / m_f;
            }
            for &j in &cell_grad {
                g[n + 1 + j] = inv_lambda;
            }
            g
        });
        agents.push(Arc::new(build_penalty_agent(
            (*block).clone(),
            objective,
            subgradient,
        )));
    }

    let metadata = ProblemMetadata::named(format!(
        "svm(n={}, samples={}, agents={}, lambda={}, seed={})",
        spec.dim, spec.samples, spec.agents, spec.lambda, spec.seed
    ));
    let problem = ViProblem::new(
        agents,
        SetSpec::symmetric_box(total_dim, SVM_BOX_RADIUS),
        metadata,
    )
    .context("svm problem assembly")?;
    Ok(SvmProblem {
        problem,
        blocks,
        dataset: dataset.clone(),
        spec: spec.clone(),
    })
}

/// A feasible point of the SVM constraints: slacks absorb every margin
/// violation, plus the requested cushion.
pub fn svm_feasible_point(
    spec: &SvmDatasetSpec,
    dataset: &SvmDataset,
    w: &[f64],
    b: f64,
    cushion: f64,
) -> Vec<f64> {
    let n = spec.dim;
    let mut x = vec![0.0; n + 1 + spec.samples];
    x[..n].copy_from_slice(w);
    x[n] = b;
    for j in 0..spec.samples {
        let margin: f64 = dataset.labels[j]
            * (dataset.features[j].iter().zip(w).map(|(u, wv)| u * wv).sum::<f64>() + b);
        x[n + 1 + j] = (1.0 - margin).max(0.0) + cushion;
    }
    x
}

/// JSON-described affine/quadratic problem for the `custom` selector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblemSpec {
    pub dim: usize,
    pub agents: usize,
    pub set: CustomSetSpec,
    /// Global affine mapping `F(x) = M x + q`, split evenly across agents.
    pub mapping: CustomAffine,
    pub objective: CustomObjective,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
pub enum CustomSetSpec {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Orthant,
    Whole,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomAffine {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
pub enum CustomObjective {
    /// `f_i(x) = (weight/2)‖x − centers[i]‖²`.
    Quadratic { centers: Vec<Vec<f64>>, weight: f64 },
}

pub struct CustomProblem {
    pub problem: ViProblem<f64>,
    pub global_form: AffineForm<f64>,
}

pub fn build_custom_problem(spec: &CustomProblemSpec) -> Result<CustomProblem> {
    let n = spec.dim;
    let m = spec.agents;
    ensure!(m > 0, "custom problem needs agents > 0");
    ensure!(
        spec.mapping.offset.len() == n && spec.mapping.matrix.len() == n,
        "custom mapping must be {n}x{n} with an offset of length {n}"
    );
    let rows: Vec<Vec<f64>> = spec.mapping.matrix.clone();
    let matrix = Matrix::from_rows(&rows).map_err(|e| anyhow::anyhow!(e.to_string()))?;
    ensure!(matrix.cols() == n, "custom mapping matrix must be square");
    let set = match &spec.set {
        CustomSetSpec::Box { lower, upper } => SetSpec::hyper_box(lower.clone(), upper.clone())
            .map_err(|e| anyhow::anyhow!(e.to_string()))?,
        CustomSetSpec::Orthant => SetSpec::nonnegative_orthant(n),
        CustomSetSpec::Whole => SetSpec::whole_space(n),
    };
    let CustomObjective::Quadratic { centers, weight } = &spec.objective;
    ensure!(
        centers.len() == m,
        "need one quadratic center per agent ({m})"
    );
    ensure!(*weight >= 0.0, "quadratic weight must be nonnegative");
    let shared_matrix = Arc::new(matrix.clone());
    let agents: Vec<Arc<dyn AgentOracle<f64>>> = centers
        .iter()
        .map(|c| {
            ensure!(c.len() == n, "quadratic center dimension mismatch");
            Ok(Arc::new(
                BasicAgent::quadratic(c.clone(), *weight).with_affine_mapping(
                    Arc::clone(&shared_matrix),
                    spec.mapping.offset.clone(),
                    1.0 / m as f64,
                ),
            ) as Arc<dyn AgentOracle<f64>>)
        })
        .collect::<Result<_>>()?;
    let mut metadata = ProblemMetadata::named("custom");
    if *weight > 0.0 {
        metadata.strong_convexity_modulus = Some(*weight);
    }
    let problem = ViProblem::new(agents, set, metadata)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    let global_form = AffineForm::new(matrix, spec.mapping.offset.clone())
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    Ok(CustomProblem {
        problem,
        global_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pairig::linalg;
    use pairig::problem::validate_problem;

    #[test]
    fn cost_matrix_and_incidence_match_the_reference_values() {
        let m = traffic_block_matrix();
        let diag: Vec<f64> = (0..5).map(|i| m[(i, i)]).collect();
        assert_eq!(diag, vec![0.92, 5.92, 10.92, 10.92, 15.92]);
        assert_eq!(m[(0, 3)], 5.0);
        assert_eq!(m[(3, 0)], 2.0);
        // incidence block: −Bᵀ upper right, B lower left
        assert_eq!(m[(0, 5)], -1.0);
        assert_eq!(m[(5, 0)], 1.0);
        // B rows sum to 3 and 2.
        let row_sums: Vec<f64> = (0..2)
            .map(|od| (0..5).map(|arc| TRAFFIC_INCIDENCE[od][arc]).sum())
            .collect();
        assert_eq!(row_sums, vec![3.0, 2.0]);
    }

    #[test]
    fn sample_mapping_at_origin_stacks_costs_and_demands() {
        let q = [1.0, 2.0, 3.0, 4.0, 5.0];
        let d = [10.0, 20.0];
        let v = traffic_sample_mapping(&[0.0; 7], &q, &d);
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 5.0, -10.0, -20.0]);
    }

    #[test]
    fn traffic_objective_at_origin_is_mean_cost_offset_sum() {
        // With the per-sample normalization, f(0) should be close to
        // Σ q_i = 7250 (sample means fluctuate around the q vector).
        let spec = TrafficNetworkSpec::new(1000, 10, 42);
        let built = build_traffic_problem(&spec).unwrap();
        let f0 = built.problem.objective(&[0.0; 7]).unwrap();
        assert!(
            (f0 - 7250.0).abs() < 100.0,
            "sample-normalized objective at origin: {f0}"
        );
    }

    #[test]
    fn traffic_global_mapping_matches_affine_form() {
        let spec = TrafficNetworkSpec::new(100, 10, 3);
        let built = build_traffic_problem(&spec).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let via_problem = built.problem.mapping(&x).unwrap();
        let via_form = built.global_form.eval(&x);
        for (a, b) in via_problem.iter().zip(&via_form) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn traffic_problem_is_monotone_on_a_sampling_box() {
        // sample-independent: the cost matrix's symmetric part is psd
        for seed in [7, 11, 99] {
            let spec = TrafficNetworkSpec::new(100, 5, seed);
            let built = build_traffic_problem(&spec).unwrap();
            let sampling = SetSpec::hyper_box(vec![0.0; 7], vec![500.0; 7]).unwrap();
            let report =
                validate_problem(&built.problem, 100, 1e-6, Some(&sampling), 11).unwrap();
            assert!(report.passed(), "seed {seed}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn traffic_same_seed_same_problem() {
        let spec = TrafficNetworkSpec::new(50, 5, 9);
        let a = build_traffic_problem(&spec).unwrap();
        let b = build_traffic_problem(&spec).unwrap();
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0];
        assert_eq!(
            a.problem.mapping(&x).unwrap(),
            b.problem.mapping(&x).unwrap()
        );
        assert_eq!(
            a.problem.objective(&x).unwrap(),
            b.problem.objective(&x).unwrap()
        );
    }

    #[test]
    fn traffic_rejects_uneven_split() {
        assert!(build_traffic_problem(&TrafficNetworkSpec::new(10, 3, 0)).is_err());
    }

    #[test]
    fn svm_data_is_deterministic_and_balanced() {
        let spec = SvmDatasetSpec::new(50, 100, 20, 10.0, 5);
        let a = generate_synthetic_svm_data(&spec).unwrap();
        let b = generate_synthetic_svm_data(&spec).unwrap();
        assert_eq!(a, b);
        let positives = a.labels.iter().filter(|&&l| l > 0.0).count();
        assert!((positives as f64 - 50.0).abs() <= 10.0);
    }

    #[test]
    fn svm_mappings_vanish_on_feasible_points() {
        let spec = SvmDatasetSpec::new(5, 12, 3, 10.0, 8);
        let data = generate_synthetic_svm_data(&spec).unwrap();
        let built = build_svm_problem(&spec, &data).unwrap();
        let w = vec![0.2; 5];
        let x = svm_feasible_point(&spec, &data, &w, -0.1, 0.5);
        let mapped = built.problem.mapping(&x).unwrap();
        assert!(linalg::norm(&mapped) == 0.0);
        assert_eq!(built.constraint_residual(&x), 0.0);
    }

    #[test]
    fn svm_penalty_matches_hand_computation_for_single_point() {
        // One data point u = (2), v = +1, n = 1: at w = 0, b = 0, z = 0
        // the margin constraint is violated by exactly 1 and the penalty
        // mapping is max{0,1}·∇g = (−2, −1, −1).
        let spec = SvmDatasetSpec::new(1, 1, 1, 10.0, 0);
        let data = SvmDataset {
            features: vec![vec![2.0]],
            labels: vec![1.0],
        };
        let built = build_svm_problem(&spec, &data).unwrap();
        let mapped = built.problem.mapping(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(mapped, vec![-2.0, -1.0, -1.0]);
        assert_eq!(built.constraint_residual(&[0.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn svm_objective_splits_regularizer_across_agents() {
        let spec = SvmDatasetSpec::new(3, 8, 4, 2.0, 13);
        let data = generate_synthetic_svm_data(&spec).unwrap();
        let built = build_svm_problem(&spec, &data).unwrap();
        let mut x = vec![0.0; 3 + 1 + 8];
        x[0] = 2.0; // w = (2,0,0)
        for j in 0..8 {
            x[4 + j] = 1.0; // all slacks at 1
        }
        // Σᵢ f_i = ½‖w‖² + (1/λ)Σz = 2 + 4.
        let f = built.problem.objective(&x).unwrap();
        assert!((f - 6.0).abs() < 1e-12);
    }

    #[test]
    fn custom_problem_round_trips() {
        let spec = CustomProblemSpec {
            dim: 2,
            agents: 2,
            set: CustomSetSpec::Box {
                lower: vec![-1.0, -1.0],
                upper: vec![1.0, 1.0],
            },
            mapping: CustomAffine {
                matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                offset: vec![-0.5, 0.25],
            },
            objective: CustomObjective::Quadratic {
                centers: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
                weight: 1.0,
            },
        };
        let built = build_custom_problem(&spec).unwrap();
        assert_eq!(built.problem.num_agents(), 2);
        let x = [0.5, -0.25];
        let mapped = built.problem.mapping(&x).unwrap();
        assert!((mapped[0] - 0.0).abs() < 1e-12);
        assert!((mapped[1] - 0.0).abs() < 1e-12);
    }
}
