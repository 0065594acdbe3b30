//! Contract tests: concurrent sharing of immutable problems and the
//! scalar-generic surface.

use std::sync::Arc;

use pairig::geometry::SetSpec;
use pairig::oracle::{AgentOracle, BasicAgent};
use pairig::problem::{ProblemMetadata, ViProblem};
use pairig::scalar::Scalar;
use pairig::solver::{run_pair_ig, RunOptions};
use pairig::Schedule;

fn shared_problem() -> Arc<ViProblem<f64>> {
    let agents: Vec<Arc<dyn AgentOracle<f64>>> = (0..4)
        .map(|i| {
            Arc::new(BasicAgent::quadratic(vec![i as f64 * 0.1, -0.2], 1.0))
                as Arc<dyn AgentOracle<f64>>
        })
        .collect();
    Arc::new(
        ViProblem::new(
            agents,
            SetSpec::symmetric_box(2, 2.0),
            ProblemMetadata::default(),
        )
        .unwrap(),
    )
}

// Problems are immutable after construction; concurrent runs over one
// shared instance give the same results as sequential runs.
#[test]
fn concurrent_runs_share_one_problem() {
    let problem = shared_problem();
    let run_once = |seed_shift: usize| {
        let schedule = Schedule::rate(0.5, 0.5, 0.25).unwrap();
        let x0 = vec![0.1 * seed_shift as f64, 0.5];
        let opts = RunOptions::new(schedule, 0.0, 500, x0);
        run_pair_ig(&problem, &opts).unwrap().final_averages
    };
    let sequential: Vec<_> = (0..4).map(run_once).collect();
    let handles: Vec<_> = (0..4)
        .map(|i| {
            let problem = Arc::clone(&problem);
            std::thread::spawn(move || {
                let schedule = Schedule::rate(0.5, 0.5, 0.25).unwrap();
                let x0 = vec![0.1 * i as f64, 0.5];
                let opts = RunOptions::new(schedule, 0.0, 500, x0);
                run_pair_ig(&problem, &opts).unwrap().final_averages
            })
        })
        .collect();
    for (i, handle) in handles.into_iter().enumerate() {
        let parallel = handle.join().unwrap();
        assert_eq!(parallel, sequential[i]);
    }
}

// The solver stack is generic over the scalar; a single-precision run
// lands near its double-precision twin.
#[test]
fn single_precision_instantiation_works() {
    fn run<T: Scalar>() -> Vec<T> {
        let agents: Vec<Arc<dyn AgentOracle<T>>> = vec![
            Arc::new(BasicAgent::quadratic(vec![T::c(0.5), T::c(-0.25)], T::one())),
            Arc::new(BasicAgent::quadratic(vec![T::c(-0.5), T::c(0.25)], T::one())),
        ];
        let problem = ViProblem::new(
            agents,
            SetSpec::symmetric_box(2, T::c(1.0)),
            ProblemMetadata::default(),
        )
        .unwrap();
        let schedule = Schedule::rate(T::c(0.5), T::c(0.5), T::c(0.25)).unwrap();
        let opts = RunOptions::new(schedule, T::zero(), 2000, vec![T::c(0.9), T::c(0.9)]);
        run_pair_ig(&problem, &opts)
            .unwrap()
            .final_averages
            .pop()
            .unwrap()
    }
    let fine = run::<f64>();
    let coarse = run::<f32>();
    for (a, b) in fine.iter().zip(&coarse) {
        assert!((a - *b as f64).abs() < 1e-3, "{a} vs {b}");
    }
}

// pair-IG over iterative-projection sets: iterates stay feasible and
// the averages approach the constrained minimizer.
#[test]
fn solver_handles_polyhedron_and_ball_sets() {
    use pairig::geometry::Halfspace;
    use pairig::linalg;

    // minimize ½‖x − (1,1)‖² over the triangle x₁+x₂ ≤ 1, x ≥ −2:
    // constrained minimum at (0.5, 0.5).
    let agents: Vec<Arc<dyn AgentOracle<f64>>> =
        vec![Arc::new(BasicAgent::quadratic(vec![1.0, 1.0], 1.0))];
    let triangle = SetSpec::polyhedron(
        vec![Halfspace::new(vec![1.0, 1.0], 1.0)],
        Some((vec![-2.0, -2.0], vec![2.0, 2.0])),
        vec![0.0, 0.0],
    )
    .unwrap();
    let problem = ViProblem::new(agents, triangle, ProblemMetadata::default()).unwrap();
    let schedule = Schedule::rate(0.8, 1.0, 0.25).unwrap();
    let opts = RunOptions::new(schedule, 0.0, 4000, vec![0.0, 0.0]);
    let out = run_pair_ig(&problem, &opts).unwrap();
    let avg = &out.final_averages[0];
    assert!(problem.set().contains(avg, 1e-8));
    assert!(linalg::dist(avg, &[0.5, 0.5]) < 0.05, "{avg:?}");

    // same objective over the unit ball: minimum at (1,1)/√2.
    let agents: Vec<Arc<dyn AgentOracle<f64>>> =
        vec![Arc::new(BasicAgent::quadratic(vec![1.0, 1.0], 1.0))];
    let problem = ViProblem::new(
        agents,
        SetSpec::ball(vec![0.0, 0.0], 1.0).unwrap(),
        ProblemMetadata::default(),
    )
    .unwrap();
    let schedule = Schedule::rate(0.8, 1.0, 0.25).unwrap();
    let opts = RunOptions::new(schedule, 0.0, 4000, vec![0.0, 0.0]);
    let out = run_pair_ig(&problem, &opts).unwrap();
    let avg = &out.final_averages[0];
    let target = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    assert!(problem.set().contains(avg, 1e-9));
    assert!(linalg::dist(avg, &target) < 0.05, "{avg:?}");
}

// The compensated weight accumulation keeps the explicit-average
// identity at 1e-10 even over a million epochs.
#[test]
fn averaging_identity_survives_a_million_epochs() {
    let agents: Vec<Arc<dyn AgentOracle<f64>>> =
        vec![Arc::new(BasicAgent::quadratic(vec![0.4], 1.0))];
    let problem = ViProblem::new(
        agents,
        SetSpec::symmetric_box(1, 1.0),
        ProblemMetadata::default(),
    )
    .unwrap();
    let schedule = Schedule::rate(0.7, 0.9, 0.25).unwrap();
    let r = 0.3;
    let n = 1_000_000usize;
    let mut opts = RunOptions::new(schedule, r, n, vec![-0.8]);
    opts.record_history = true;
    opts.logging = pairig::LogSchedule::Strided {
        dense_until: 1,
        growth: 4.0,
    };
    let out = run_pair_ig(&problem, &opts).unwrap();
    let direct = out
        .history
        .as_ref()
        .unwrap()
        .reconstruct_average(&schedule, r, n, 0);
    let recursive = &out.final_averages[0];
    assert!(
        (direct[0] - recursive[0]).abs() <= 1e-10,
        "identity residual {:.3e}",
        (direct[0] - recursive[0]).abs()
    );
}
