//! Comparison solvers and reference machinery: projected incremental
//! (sub)gradient, aggregated-gradient methods, the extragradient solver
//! for regularized problems, the regularization trajectory built from
//! it, and a small enumeration oracle for affine box problems.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::SetSpec;
use crate::linalg::{self, norm, Matrix};
use crate::problem::ViProblem;
use crate::scalar::Scalar;
use crate::trace::{AgentSample, EpochRecord, LogSchedule, RunTrace};

/// Stepsize rule for the baseline methods.
#[derive(Debug, Clone, Copy)]
pub enum StepsizeRule<T> {
    Constant(T),
    /// `γ_k = γ₀/√(k+1)`.
    DiminishingSqrt(T),
}

impl<T: Scalar> StepsizeRule<T> {
    pub fn value(&self, k: usize) -> T {
        match self {
            StepsizeRule::Constant(g) => *g,
            StepsizeRule::DiminishingSqrt(g0) => *g0 / T::from_count(k + 1).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = match self {
            StepsizeRule::Constant(g) | StepsizeRule::DiminishingSqrt(g) => *g > T::zero(),
        };
        if positive {
            Ok(())
        } else {
            Err(Error::configuration("baseline stepsize must be positive"))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineConfig<T> {
    pub stepsize: StepsizeRule<T>,
    pub epochs: usize,
    pub seed: u64,
    pub logging: LogSchedule,
}

impl<T: Scalar> BaselineConfig<T> {
    pub fn new(stepsize: StepsizeRule<T>, epochs: usize, seed: u64) -> Self {
        Self {
            stepsize,
            epochs,
            seed,
            logging: LogSchedule::default_stride(),
        }
    }
}

fn baseline_trace<T: Scalar>(
    problem: &ViProblem<T>,
    config: &BaselineConfig<T>,
    mut inner: impl FnMut(usize, &mut Vec<T>) -> Result<()>,
    x0: Vec<T>,
) -> Result<RunTrace<T>> {
    config.stepsize.validate()?;
    if !problem.set().contains(&x0, T::c(1e-9)) {
        return Err(Error::configuration("baseline start must lie in the set"));
    }
    let log_epochs = config.logging.epochs_to_log(config.epochs);
    let mut log_iter = log_epochs.iter().copied().peekable();
    let mut records = Vec::with_capacity(log_epochs.len());
    let mut truncated = None;
    let mut x = x0;

    let record = |epoch: usize, x: &[T], problem: &ViProblem<T>| -> Result<EpochRecord<T>> {
        Ok(EpochRecord {
            epoch,
            gamma: config.stepsize.value(epoch),
            eta: T::zero(),
            agents: vec![AgentSample {
                objective: problem.objective(x)?,
                infeasibility: None,
                consensus_dist: T::zero(),
                average: x.to_vec(),
            }],
            invariant_max_residual: None,
        })
    };

    if log_iter.peek() == Some(&0) {
        log_iter.next();
        records.push(record(0, &x, problem)?);
    }
    for k in 0..config.epochs {
        if let Err(err) = inner(k, &mut x) {
            truncated = Some(err.to_string());
            break;
        }
        if log_iter.peek() == Some(&(k + 1)) {
            log_iter.next();
            records.push(record(k + 1, &x, problem)?);
        }
    }
    Ok(RunTrace {
        records,
        epochs_requested: config.epochs,
        num_agents: 1,
        truncated,
        invariant_failures: 0,
    })
}

/// Projected incremental subgradient: one cyclic pass per epoch of
/// `x ← P_X(x − γ_k ∇̃f_i(x))`.
pub fn projected_ig_run<T: Scalar>(
    problem: &ViProblem<T>,
    x0: Vec<T>,
    config: &BaselineConfig<T>,
) -> Result<RunTrace<T>> {
    let m = problem.num_agents();
    baseline_trace(
        problem,
        config,
        |k, x| {
            let gamma = config.stepsize.value(k);
            for i in 0..m {
                let g = problem.agent(i).subgradient(x);
                if !linalg::all_finite(&g) {
                    return Err(Error::NonFinite {
                        source_name: "subgradient",
                        epoch: k,
                        agent: i + 1,
                    });
                }
                let mut z = x.clone();
                linalg::axpy(&mut z, -gamma, &g);
                *x = problem.set().project(&z)?;
            }
            Ok(())
        },
        x0,
    )
}

/// Aggregated-gradient method with projection as the proximal step:
/// cyclic visits refresh one stored gradient at a time and every update
/// uses the sum of the stored gradients.
pub fn proximal_iag_run<T: Scalar>(
    problem: &ViProblem<T>,
    x0: Vec<T>,
    config: &BaselineConfig<T>,
) -> Result<RunTrace<T>> {
    let m = problem.num_agents();
    let n = problem.dim();
    let mut table: Vec<Vec<T>> = (0..m).map(|i| problem.agent(i).subgradient(&x0)).collect();
    let mut aggregate = vec![T::zero(); n];
    for g in &table {
        linalg::axpy(&mut aggregate, T::one(), g);
    }
    baseline_trace(
        problem,
        config,
        move |k, x| {
            let gamma = config.stepsize.value(k);
            for (i, stored) in table.iter_mut().enumerate() {
                let fresh = problem.agent(i).subgradient(x);
                if !linalg::all_finite(&fresh) {
                    return Err(Error::NonFinite {
                        source_name: "gradient",
                        epoch: k,
                        agent: i + 1,
                    });
                }
                for ((agg, new), old) in
                    aggregate.iter_mut().zip(&fresh).zip(stored.iter())
                {
                    *agg = *agg + *new - *old;
                }
                *stored = fresh;
                let mut z = x.clone();
                linalg::axpy(&mut z, -gamma, &aggregate);
                *x = problem.set().project(&z)?;
            }
            Ok(())
        },
        x0,
    )
}

/// Projected variance-reduced method with a stored gradient table:
/// sampled agent `j` contributes `m(∇f_j(x) − α_j) + Σα`, then `α_j` is
/// refreshed. The table starts from the gradients at the initial point,
/// so the first pass matches plain table-based stochastic steps. One
/// epoch is `m` sampled updates.
pub fn saga_projected_run<T: Scalar>(
    problem: &ViProblem<T>,
    x0: Vec<T>,
    config: &BaselineConfig<T>,
) -> Result<RunTrace<T>> {
    let m = problem.num_agents();
    let n = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut table: Vec<Vec<T>> = (0..m).map(|i| problem.agent(i).subgradient(&x0)).collect();
    let mut table_sum = vec![T::zero(); n];
    for g in &table {
        linalg::axpy(&mut table_sum, T::one(), g);
    }
    let mf = T::from_count(m);
    baseline_trace(
        problem,
        config,
        move |k, x| {
            let gamma = config.stepsize.value(k);
            for _ in 0..m {
                let j = rng.random_range(0..m);
                let fresh = problem.agent(j).subgradient(x);
                if !linalg::all_finite(&fresh) {
                    return Err(Error::NonFinite {
                        source_name: "gradient",
                        epoch: k,
                        agent: j + 1,
                    });
                }
                // v = m(∇f_j(x) − α_j) + Σα, an unbiased estimator of Σ∇f_i.
                let mut z = x.clone();
                for (idx, zi) in z.iter_mut().enumerate() {
                    let v = mf * (fresh[idx] - table[j][idx]) + table_sum[idx];
                    *zi = *zi - gamma * v;
                }
                for ((sum, new), old) in table_sum.iter_mut().zip(&fresh).zip(&table[j]) {
                    *sum = *sum + *new - *old;
                }
                table[j] = fresh;
                *x = problem.set().project(&z)?;
            }
            Ok(())
        },
        x0,
    )
}

/// A point of the regularization trajectory.
#[derive(Debug, Clone)]
pub struct TikhonovPoint<T> {
    pub eta: T,
    pub point: Vec<T>,
    /// Fixed-point residual `‖x − P_X(x − G_η(x))‖` achieved by the
    /// reference solver.
    pub residual: T,
}

/// Solution of a variational inequality found by the extragradient
/// method.
#[derive(Debug, Clone)]
pub struct ViSolution<T> {
    pub point: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

/// Extragradient iteration on a mapping `G` over `set`, started from
/// `start`, until the natural residual `‖x − P_X(x − G(x))‖ ≤ tol`.
/// The stepsize is `1/(2L̂)` with `L̂` a sampled Lipschitz estimate.
pub fn extragradient_solve<T: Scalar>(
    mapping: &dyn Fn(&[T]) -> Vec<T>,
    set: &SetSpec<T>,
    start: &[T],
    tol: T,
    max_iters: usize,
) -> Result<ViSolution<T>> {
    let mut x = set.project(start)?;
    let lips = sampled_lipschitz(mapping, set, &x)?;
    let step = if lips > T::zero() {
        T::one() / (T::two() * lips)
    } else {
        T::one()
    };
    let mut best_residual = T::infinity();
    for it in 0..max_iters {
        let gx = mapping(&x);
        if !linalg::all_finite(&gx) {
            return Err(Error::numerical("extragradient mapping produced non-finite values"));
        }
        let mut z = x.clone();
        linalg::axpy(&mut z, -T::one(), &gx);
        let residual = linalg::dist(&x, &set.project(&z)?);
        best_residual = best_residual.min(residual);
        if residual <= tol {
            return Ok(ViSolution {
                point: x,
                residual,
                iterations: it,
            });
        }
        // Half step to the midpoint, full step with the midpoint field.
        let mut half = x.clone();
        linalg::axpy(&mut half, -step, &gx);
        let y = set.project(&half)?;
        let gy = mapping(&y);
        let mut full = x.clone();
        linalg::axpy(&mut full, -step, &gy);
        x = set.project(&full)?;
    }
    Err(Error::numerical(format!(
        "extragradient did not reach tol {tol} in {max_iters} iterations (best residual {best_residual})"
    )))
}

fn sampled_lipschitz<T: Scalar>(
    mapping: &dyn Fn(&[T]) -> Vec<T>,
    set: &SetSpec<T>,
    anchor: &[T],
) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4c69_7073);
    let sampler: SetSpec<T> = if set.is_compact() {
        set.clone()
    } else {
        let radius = T::two() * (T::one() + norm(anchor));
        let lower: Vec<T> = anchor.iter().map(|&v| v - radius).collect();
        let upper: Vec<T> = anchor.iter().map(|&v| v + radius).collect();
        SetSpec::hyper_box(lower, upper)?
    };
    let mut lips = T::zero();
    for _ in 0..24 {
        let u = sampler.sample_uniform(&mut rng)?;
        let v = sampler.sample_uniform(&mut rng)?;
        let d = linalg::dist(&u, &v);
        if d <= T::epsilon() {
            continue;
        }
        lips = lips.max(linalg::dist(&mapping(&u), &mapping(&v)) / d);
    }
    Ok(lips * T::c(1.2))
}

/// Solves the regularized problem `VI(X, Σ(F_i + η ∇f_i))` with the
/// extragradient method. Needs a strong-convexity modulus in the
/// problem metadata so the solution is unique.
pub fn solve_regularized_vi<T: Scalar>(
    problem: &ViProblem<T>,
    eta: T,
    tol: T,
    max_iters: usize,
    warm_start: Option<&[T]>,
) -> Result<TikhonovPoint<T>> {
    let mu = problem
        .metadata()
        .strong_convexity_modulus
        .filter(|&mu| mu > T::zero())
        .ok_or_else(|| {
            Error::argument(
                "solve_regularized_vi needs metadata.strong_convexity_modulus > 0",
            )
        })?;
    let _ = mu;
    if eta < T::zero() {
        return Err(Error::argument("regularization weight must be nonnegative"));
    }
    let mapping = |x: &[T]| {
        let mut v = problem.mapping(x).expect("dimension checked");
        let g = problem.subgradient(x).expect("dimension checked");
        linalg::axpy(&mut v, eta, &g);
        v
    };
    let start: Vec<T> = match warm_start {
        Some(w) => w.to_vec(),
        None => vec![T::zero(); problem.dim()],
    };
    let solution = extragradient_solve(&mapping, problem.set(), &start, tol, max_iters)?;
    Ok(TikhonovPoint {
        eta,
        point: solution.point,
        residual: solution.residual,
    })
}

/// Computes the regularization trajectory `{x*_{η_k}}` for the first
/// `epochs + 1` schedule values, warm-starting each solve from the
/// previous point (justified by the trajectory's continuity in η).
pub fn tikhonov_trajectory<T: Scalar>(
    problem: &ViProblem<T>,
    etas: impl Iterator<Item = T>,
    tol: T,
    max_iters: usize,
) -> Result<Vec<TikhonovPoint<T>>> {
    let mut points: Vec<TikhonovPoint<T>> = Vec::new();
    for eta in etas {
        let warm = points.last().map(|p| p.point.as_slice());
        let point = solve_regularized_vi(problem, eta, tol, max_iters, warm)?;
        points.push(point);
    }
    Ok(points)
}

/// Independent desk-scale oracle for `VI([lower,upper], Mx+q)` with a
/// monotone affine mapping: enumerates the face patterns of the box
/// (each coordinate at its lower bound, upper bound, or interior with a
/// zero mapped component), solves the induced linear system per pattern,
/// and keeps solutions satisfying the optimality conditions. Ties break
/// toward the smallest norm.
pub fn brute_force_affine_vi<T: Scalar>(
    matrix: &Matrix<T>,
    offset: &[T],
    lower: &[T],
    upper: &[T],
) -> Result<Vec<T>> {
    let n = offset.len();
    if n == 0 || n > 3 {
        return Err(Error::argument("enumeration oracle supports 1 ≤ n ≤ 3"));
    }
    if matrix.rows() != n || matrix.cols() != n || lower.len() != n || upper.len() != n {
        return Err(Error::argument("enumeration oracle dimension mismatch"));
    }
    let tol = T::c(1e-9);
    #[derive(Clone, Copy, PartialEq)]
    enum Face {
        Lower,
        Upper,
        Interior,
    }
    let faces = [Face::Lower, Face::Upper, Face::Interior];
    let mut best: Option<Vec<T>> = None;

    let mut pattern = vec![Face::Lower; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for p in pattern.iter_mut() {
            *p = faces[c % 3];
            c /= 3;
        }
        let interior: Vec<usize> = (0..n)
            .filter(|&j| pattern[j] == Face::Interior)
            .collect();
        let mut x = vec![T::zero(); n];
        for j in 0..n {
            x[j] = match pattern[j] {
                Face::Lower => lower[j],
                Face::Upper => upper[j],
                Face::Interior => T::zero(),
            };
        }
        if !interior.is_empty() {
            // Solve M_II x_I = −q_I − M_IB x_B for the interior block.
            let k = interior.len();
            let mut sub = Matrix::zeros(k, k);
            let mut rhs = vec![T::zero(); k];
            for (r, &jr) in interior.iter().enumerate() {
                let mut acc = -offset[jr];
                for jc in 0..n {
                    if pattern[jc] == Face::Interior {
                        continue;
                    }
                    acc = acc - matrix[(jr, jc)] * x[jc];
                }
                rhs[r] = acc;
                for (cc, &jc) in interior.iter().enumerate() {
                    sub[(r, cc)] = matrix[(jr, jc)];
                }
            }
            let Ok(sol) = linalg::solve_dense(&sub, &rhs) else {
                continue;
            };
            for (r, &jr) in interior.iter().enumerate() {
                x[jr] = sol[r];
            }
        }
        // Optimality: interior coords inside bounds; F ≥ 0 at lower
        // bounds; F ≤ 0 at upper bounds.
        let mapped = {
            let mut v = matrix.matvec(&x);
            linalg::axpy(&mut v, T::one(), offset);
            v
        };
        let mut ok = true;
        for j in 0..n {
            match pattern[j] {
                Face::Interior => {
                    if x[j] < lower[j] - tol || x[j] > upper[j] + tol || mapped[j].abs() > tol {
                        ok = false;
                    }
                }
                Face::Lower => {
                    if mapped[j] < -tol {
                        ok = false;
                    }
                }
                Face::Upper => {
                    if mapped[j] > tol {
                        ok = false;
                    }
                }
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        // normalize -0.0 from the linear solve
        for v in x.iter_mut() {
            *v = *v + T::zero();
        }
        match &best {
            Some(current) if norm(current) <= norm(&x) => {}
            _ => best = Some(x),
        }
    }
    best.ok_or_else(|| {
        Error::numerical("no face pattern satisfied the optimality conditions")
    })
}
