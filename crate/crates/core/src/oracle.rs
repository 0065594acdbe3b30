//! Agent-local oracles: objective value, a deterministic subgradient
//! selection, and the local mapping.
//!
//! Subgradient selections must be deterministic (same input, same
//! output). The convention for hinge-type kinks throughout this crate is
//! the one-sided derivative from the right, i.e. `max{0, g}` contributes
//! `∇g` exactly when `g > 0` and zero otherwise.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::scalar::Scalar;

pub type ObjectiveFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type VectorFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// One agent's local view of the problem: `f_i`, a subgradient selection
/// from `∂f_i`, and the local mapping `F_i`.
///
/// Implementations must be re-entrant; solvers share oracles across
/// concurrent runs.
pub trait AgentOracle<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// `f_i(x)`.
    fn objective(&self, x: &[T]) -> T;

    /// A deterministic selection from `∂f_i(x)`.
    fn subgradient(&self, x: &[T]) -> Vec<T>;

    /// `F_i(x)`.
    fn mapping(&self, x: &[T]) -> Vec<T>;
}

/// Closure-backed oracle for problems assembled in code.
#[derive(Clone)]
pub struct BasicAgent<T> {
    dim: usize,
    objective: ObjectiveFn<T>,
    subgradient: VectorFn<T>,
    mapping: VectorFn<T>,
}

impl<T: Scalar> BasicAgent<T> {
    pub fn new(
        dim: usize,
        objective: ObjectiveFn<T>,
        subgradient: VectorFn<T>,
        mapping: VectorFn<T>,
    ) -> Self {
        Self {
            dim,
            objective,
            subgradient,
            mapping,
        }
    }

    /// Agent with `F_i ≡ 0`, which reduces the constrained model to plain
    /// finite-sum minimization over the set.
    pub fn with_zero_mapping(
        dim: usize,
        objective: ObjectiveFn<T>,
        subgradient: VectorFn<T>,
    ) -> Self {
        Self::new(
            dim,
            objective,
            subgradient,
            Arc::new(move |x: &[T]| vec![T::zero(); x.len()]),
        )
    }

    /// `f_i(x) = (weight/2)‖x − center‖²` with its gradient, and `F_i ≡ 0`.
    pub fn quadratic(center: Vec<T>, weight: T) -> Self {
        let dim = center.len();
        let c_obj = center.clone();
        let c_grad = center;
        Self::with_zero_mapping(
            dim,
            Arc::new(move |x: &[T]| {
                let d = linalg::sub(x, &c_obj);
                weight * T::half() * dot(&d, &d)
            }),
            Arc::new(move |x: &[T]| {
                let mut g = linalg::sub(x, &c_grad);
                for v in g.iter_mut() {
                    *v = *v * weight;
                }
                g
            }),
        )
    }

    /// Replaces the mapping with `F_i(x) = scale·(M x + q)`.
    pub fn with_affine_mapping(mut self, matrix: Arc<Matrix<T>>, offset: Vec<T>, scale: T) -> Self {
        self.mapping = Arc::new(move |x: &[T]| {
            let mut v = matrix.matvec(x);
            for (vi, qi) in v.iter_mut().zip(&offset) {
                *vi = (*vi + *qi) * scale;
            }
            v
        });
        self
    }
}

impl<T: Scalar> AgentOracle<T> for BasicAgent<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn objective(&self, x: &[T]) -> T {
        (self.objective)(x)
    }

    fn subgradient(&self, x: &[T]) -> Vec<T> {
        (self.subgradient)(x)
    }

    fn mapping(&self, x: &[T]) -> Vec<T> {
        (self.mapping)(x)
    }
}

/// A differentiable convex inequality constraint `g(x) ≤ 0`.
#[derive(Clone)]
pub struct Inequality<T> {
    pub g: ObjectiveFn<T>,
    pub grad: VectorFn<T>,
}

impl<T: Scalar> Inequality<T> {
    pub fn new(g: ObjectiveFn<T>, grad: VectorFn<T>) -> Self {
        Self { g, grad }
    }

    /// Affine constraint `aᵀx ≤ c` as `g(x) = aᵀx − c`.
    pub fn affine(a: Vec<T>, c: T) -> Self {
        let a_val = a.clone();
        Self {
            g: Arc::new(move |x: &[T]| dot(&a_val, x) - c),
            grad: Arc::new(move |_: &[T]| a.clone()),
        }
    }
}

/// One agent's local constraints: optional linear equalities `A x = b`
/// and differentiable convex inequalities `g_j(x) ≤ 0`.
#[derive(Clone)]
pub struct ConstraintBlock<T> {
    pub equality: Option<(Arc<Matrix<T>>, Vec<T>)>,
    pub inequalities: Vec<Inequality<T>>,
    dim: usize,
}

impl<T: Scalar> ConstraintBlock<T> {
    pub fn new(
        dim: usize,
        equality: Option<(Matrix<T>, Vec<T>)>,
        inequalities: Vec<Inequality<T>>,
    ) -> Result<Self> {
        if let Some((a, b)) = &equality {
            if a.cols() != dim {
                return Err(Error::argument("equality matrix width must equal dim"));
            }
            if a.rows() != b.len() {
                return Err(Error::argument("equality rhs length must match rows"));
            }
        }
        Ok(Self {
            equality: equality.map(|(a, b)| (Arc::new(a), b)),
            inequalities,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Penalty mapping `Aᵀ(Ax−b) + Σ_j max{0, g_j(x)} ∇g_j(x)`: the
    /// gradient of the quadratic-penalty function below.
    pub fn penalty_mapping(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        if let Some((a, b)) = &self.equality {
            let residual = linalg::sub(&a.matvec(x), b);
            let pulled = a.t_matvec(&residual);
            linalg::axpy(&mut out, T::one(), &pulled);
        }
        for ineq in &self.inequalities {
            let v = (ineq.g)(x);
            if v > T::zero() {
                linalg::axpy(&mut out, v, &(ineq.grad)(x));
            }
        }
        out
    }

    /// `Θ(x) = ½‖Ax−b‖² + ½ Σ_j max{0, g_j(x)}²`.
    pub fn penalty_value(&self, x: &[T]) -> T {
        let mut total = T::zero();
        if let Some((a, b)) = &self.equality {
            let residual = linalg::sub(&a.matvec(x), b);
            total = total + T::half() * dot(&residual, &residual);
        }
        for ineq in &self.inequalities {
            let v = (ineq.g)(x).max(T::zero());
            total = total + T::half() * v * v;
        }
        total
    }

    /// Aggregated feasibility residual `‖Ax−b‖² + Σ max{0,g_j(x)}²`
    /// (twice the penalty value); zero exactly on feasible points.
    pub fn constraint_residual(&self, x: &[T]) -> T {
        self.penalty_value(x) * T::two()
    }

    /// Spot-checks that every `grad` matches finite differences of its
    /// `g` and that each `g` passes a sampled midpoint-convexity test.
    pub fn validate(
        &self,
        sample_points: &[Vec<T>],
        rel_tol: T,
    ) -> Result<()> {
        let h = T::c(1e-6);
        for (j, ineq) in self.inequalities.iter().enumerate() {
            for x in sample_points {
                let grad = (ineq.grad)(x);
                for coord in 0..self.dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[coord] = xp[coord] + h;
                    xm[coord] = xm[coord] - h;
                    let fd = ((ineq.g)(&xp) - (ineq.g)(&xm)) / (T::two() * h);
                    let scale = T::one().max(grad[coord].abs()).max(fd.abs());
                    if (fd - grad[coord]).abs() > rel_tol * scale {
                        return Err(Error::argument(format!(
                            "inequality {j}: gradient component {coord} disagrees with finite differences"
                        )));
                    }
                }
            }
            for pair in sample_points.windows(2) {
                let (x, y) = (&pair[0], &pair[1]);
                let mid: Vec<T> = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| (a + b) * T::half())
                    .collect();
                let secant = ((ineq.g)(x) + (ineq.g)(y)) * T::half();
                if (ineq.g)(&mid) > secant + T::c(1e-8) {
                    return Err(Error::argument(format!(
                        "inequality {j}: sampled midpoint-convexity check failed"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Agent whose mapping is the penalty mapping of its constraint block;
/// its objective part is supplied by the caller.
pub struct PenaltyAgent<T> {
    block: ConstraintBlock<T>,
    objective: ObjectiveFn<T>,
    subgradient: VectorFn<T>,
}

impl<T: Scalar> PenaltyAgent<T> {
    pub fn block(&self) -> &ConstraintBlock<T> {
        &self.block
    }
}

impl<T: Scalar> AgentOracle<T> for PenaltyAgent<T> {
    fn dim(&self) -> usize {
        self.block.dim()
    }

    fn objective(&self, x: &[T]) -> T {
        (self.objective)(x)
    }

    fn subgradient(&self, x: &[T]) -> Vec<T> {
        (self.subgradient)(x)
    }

    fn mapping(&self, x: &[T]) -> Vec<T> {
        self.block.penalty_mapping(x)
    }
}

/// Reformulates local functional constraints into a monotone mapping.
///
/// The returned oracle's mapping is the gradient of the convex penalty
/// `½‖Ax−b‖² + ½Σ max{0,g_j}²`, so it vanishes exactly on the block's
/// feasible set and is monotone whenever each `g_j` is convex and
/// differentiable.
pub fn build_penalty_agent<T: Scalar>(
    block: ConstraintBlock<T>,
    objective: ObjectiveFn<T>,
    subgradient: VectorFn<T>,
) -> PenaltyAgent<T> {
    PenaltyAgent {
        block,
        objective,
        subgradient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_objective(dim: usize) -> (ObjectiveFn<f64>, VectorFn<f64>) {
        (
            Arc::new(|_: &[f64]| 0.0),
            Arc::new(move |_: &[f64]| vec![0.0; dim]),
        )
    }

    #[test]
    fn penalty_mapping_pure_least_squares() {
        let block =
            ConstraintBlock::new(2, Some((Matrix::identity(2), vec![0.0, 0.0])), vec![]).unwrap();
        let (f, g) = zero_objective(2);
        let agent = build_penalty_agent(block, f, g);
        assert_eq!(agent.mapping(&[1.0, 2.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn penalty_mapping_single_inequality() {
        let block = ConstraintBlock::new(
            2,
            None,
            vec![Inequality::affine(vec![1.0, 0.0], 1.0)],
        )
        .unwrap();
        let (f, g) = zero_objective(2);
        let agent = build_penalty_agent(block, f, g);
        // g(x) = x₁ − 1 at (2, 0): max{0, 1}·(1, 0).
        assert_eq!(agent.mapping(&[2.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn penalty_mapping_vanishes_on_feasible_points() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let block = ConstraintBlock::new(
            2,
            Some((a, vec![1.0])),
            vec![Inequality::affine(vec![0.0, 1.0], 2.0)],
        )
        .unwrap();
        let (f, g) = zero_objective(2);
        let agent = build_penalty_agent(block, f, g);
        // x = (0.4, 0.6) satisfies x₁+x₂ = 1 and x₂ ≤ 2 strictly.
        let m = agent.mapping(&[0.4, 0.6]);
        assert_eq!(m, vec![0.0, 0.0]);
    }

    // The mapping is the gradient of Θ; compare against central
    // differences at random points, including infeasible ones.
    #[test]
    fn penalty_mapping_matches_finite_difference_gradient() {
        let a = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 1.0]]).unwrap();
        let block = ConstraintBlock::new(
            2,
            Some((a, vec![0.3, -0.7])),
            vec![
                Inequality::affine(vec![1.0, 1.0], 0.25),
                Inequality::new(
                    Arc::new(|x: &[f64]| x[0] * x[0] + 0.5 * x[1] * x[1] - 1.0),
                    Arc::new(|x: &[f64]| vec![2.0 * x[0], x[1]]),
                ),
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let grad = block.penalty_mapping(&x);
            for c in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let fd = (block.penalty_value(&xp) - block.penalty_value(&xm)) / (2.0 * h);
                let scale = 1.0f64.max(grad[c].abs()).max(fd.abs());
                assert!(
                    (fd - grad[c]).abs() <= 1e-5 * scale,
                    "component {c} at {x:?}: fd={fd}, grad={}",
                    grad[c]
                );
            }
        }
    }

    #[test]
    fn constraint_block_validate_catches_bad_gradient() {
        let block = ConstraintBlock::new(
            1,
            None,
            vec![Inequality::new(
                Arc::new(|x: &[f64]| x[0] * x[0]),
                Arc::new(|_: &[f64]| vec![1.0]), // wrong gradient
            )],
        )
        .unwrap();
        let pts = vec![vec![0.7], vec![-0.3]];
        assert!(block.validate(&pts, 1e-5).is_err());
    }

    #[test]
    fn constraint_block_validate_accepts_affine() {
        let block = ConstraintBlock::new(
            2,
            None,
            vec![Inequality::affine(vec![2.0, -1.0], 0.5)],
        )
        .unwrap();
        let pts = vec![vec![0.1, 0.2], vec![-1.0, 0.5], vec![2.0, -2.0]];
        block.validate(&pts, 1e-5).unwrap();
    }

    #[test]
    fn quadratic_agent_evaluates() {
        let a = BasicAgent::quadratic(vec![1.0, -1.0], 2.0);
        assert_eq!(a.objective(&[1.0, -1.0]), 0.0);
        assert_eq!(a.objective(&[2.0, -1.0]), 1.0);
        assert_eq!(a.subgradient(&[2.0, 0.0]), vec![2.0, 2.0]);
        assert_eq!(a.mapping(&[2.0, 0.0]), vec![0.0, 0.0]);
    }
}
