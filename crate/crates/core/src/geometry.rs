//! Projectable convex sets and Euclidean projection operators.
//!
//! Every solver step goes through [`SetSpec::project`]. Closed-form
//! projections cover the whole space, the nonnegative orthant, boxes, and
//! balls; polyhedra described by halfspaces use Dykstra's alternating
//! projections, which (unlike plain cyclic projection) converges to the
//! Euclidean projection.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;

/// A halfspace `aᵀx ≤ c`.
#[derive(Debug, Clone)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> Halfspace<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Self {
        Self { normal, offset }
    }

    pub fn violation(&self, x: &[T]) -> T {
        dot(&self.normal, x) - self.offset
    }

    /// Closed-form projection onto the halfspace.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        let v = self.violation(x);
        if v <= T::zero() {
            return x.to_vec();
        }
        let nn = dot(&self.normal, &self.normal);
        let mut out = x.to_vec();
        linalg::axpy(&mut out, -v / nn, &self.normal);
        out
    }
}

/// Result of an iterative polyhedral projection.
#[derive(Debug, Clone)]
pub struct PolyhedronProjection<T> {
    pub point: Vec<T>,
    /// Set when the sweep budget ran out before the movement tolerance
    /// was met; the point is the best iterate found.
    pub converged: bool,
    pub sweeps: usize,
}

/// Projectable convex set specification.
#[derive(Debug, Clone)]
pub enum SetSpec<T> {
    WholeSpace {
        dim: usize,
    },
    NonnegativeOrthant {
        dim: usize,
    },
    Box {
        lower: Vec<T>,
        upper: Vec<T>,
    },
    Ball {
        center: Vec<T>,
        radius: T,
    },
    /// Intersection of halfspaces, optionally bounded by a box. The
    /// witness certifies nonemptiness and is validated at construction.
    Polyhedron {
        halfspaces: Vec<Halfspace<T>>,
        bounds: Option<(Vec<T>, Vec<T>)>,
        witness: Vec<T>,
    },
}

pub const DEFAULT_DYKSTRA_TOL: f64 = 1e-10;
pub const DEFAULT_DYKSTRA_MAX_SWEEPS: usize = 10_000;

impl<T: Scalar> SetSpec<T> {
    pub fn whole_space(dim: usize) -> Self {
        SetSpec::WholeSpace { dim }
    }

    pub fn nonnegative_orthant(dim: usize) -> Self {
        SetSpec::NonnegativeOrthant { dim }
    }

    pub fn hyper_box(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::argument("box bound dimensions differ"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::argument("box requires lower <= upper componentwise"));
        }
        Ok(SetSpec::Box { lower, upper })
    }

    /// Centered cube `[-radius, radius]^dim`.
    pub fn symmetric_box(dim: usize, radius: T) -> Self {
        SetSpec::Box {
            lower: vec![-radius; dim],
            upper: vec![radius; dim],
        }
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if radius <= T::zero() {
            return Err(Error::argument("ball radius must be positive"));
        }
        Ok(SetSpec::Ball { center, radius })
    }

    pub fn polyhedron(
        halfspaces: Vec<Halfspace<T>>,
        bounds: Option<(Vec<T>, Vec<T>)>,
        witness: Vec<T>,
    ) -> Result<Self> {
        let dim = witness.len();
        if halfspaces.iter().any(|h| h.normal.len() != dim) {
            return Err(Error::argument("halfspace dimension mismatch"));
        }
        let tol = T::c(1e-9);
        let feasible = halfspaces.iter().all(|h| h.violation(&witness) <= tol)
            && bounds.as_ref().is_none_or(|(l, u)| {
                witness
                    .iter()
                    .zip(l.iter().zip(u))
                    .all(|(x, (lo, hi))| *x >= *lo - tol && *x <= *hi + tol)
            });
        if !feasible {
            return Err(Error::configuration(
                "polyhedron witness point violates the constraints",
            ));
        }
        Ok(SetSpec::Polyhedron {
            halfspaces,
            bounds,
            witness,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SetSpec::WholeSpace { dim } | SetSpec::NonnegativeOrthant { dim } => *dim,
            SetSpec::Box { lower, .. } => lower.len(),
            SetSpec::Ball { center, .. } => center.len(),
            SetSpec::Polyhedron { witness, .. } => witness.len(),
        }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            SetSpec::WholeSpace { .. } | SetSpec::NonnegativeOrthant { .. } => false,
            SetSpec::Box { .. } | SetSpec::Ball { .. } => true,
            SetSpec::Polyhedron { bounds, .. } => bounds.is_some(),
        }
    }

    /// Euclidean projection `argmin_{x∈X} ‖x−z‖₂`.
    pub fn project(&self, z: &[T]) -> Result<Vec<T>> {
        if z.len() != self.dim() {
            return Err(Error::argument(format!(
                "projection input has dimension {}, set has {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(match self {
            SetSpec::WholeSpace { .. } => z.to_vec(),
            SetSpec::NonnegativeOrthant { .. } => {
                z.iter().map(|&v| v.max(T::zero())).collect()
            }
            SetSpec::Box { lower, upper } => z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
                .collect(),
            SetSpec::Ball { center, radius } => {
                let d = linalg::sub(z, center);
                let n = norm(&d);
                if n <= *radius {
                    z.to_vec()
                } else {
                    let mut out = center.clone();
                    linalg::axpy(&mut out, *radius / n, &d);
                    out
                }
            }
            SetSpec::Polyhedron { .. } => {
                self.project_polyhedron(
                    z,
                    DEFAULT_DYKSTRA_MAX_SWEEPS,
                    T::c(DEFAULT_DYKSTRA_TOL),
                )?
                .point
            }
        })
    }

    /// Dykstra's alternating projection over the halfspace family (and
    /// the bounding box, when present). Terminates when one full sweep
    /// moves the iterate less than `tol`, or after `max_sweeps` sweeps.
    pub fn project_polyhedron(
        &self,
        z: &[T],
        max_sweeps: usize,
        tol: T,
    ) -> Result<PolyhedronProjection<T>> {
        let SetSpec::Polyhedron {
            halfspaces, bounds, ..
        } = self
        else {
            return Err(Error::argument("project_polyhedron requires a polyhedron"));
        };
        let n_sets = halfspaces.len() + usize::from(bounds.is_some());
        if n_sets == 0 {
            return Ok(PolyhedronProjection {
                point: z.to_vec(),
                converged: true,
                sweeps: 0,
            });
        }
        let mut x = z.to_vec();
        let mut corrections = vec![vec![T::zero(); z.len()]; n_sets];
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < max_sweeps {
            sweeps += 1;
            let start = x.clone();
            for (s, correction) in corrections.iter_mut().enumerate() {
                let shifted = linalg::add(&x, correction);
                let projected = if s < halfspaces.len() {
                    halfspaces[s].project(&shifted)
                } else {
                    let (lo, hi) = bounds.as_ref().expect("bounds set");
                    shifted
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(&v, (&l, &h))| v.max(l).min(h))
                        .collect()
                };
                *correction = linalg::sub(&shifted, &projected);
                x = projected;
            }
            if linalg::dist(&x, &start) < tol {
                converged = true;
                break;
            }
        }
        Ok(PolyhedronProjection {
            point: x,
            converged,
            sweeps,
        })
    }

    /// `M_X = sup_{x∈X} ‖x‖` for compact sets. For polyhedra with box
    /// bounds this is the box value, an upper estimate.
    pub fn diameter_bound(&self) -> Result<DiameterBound<T>> {
        match self {
            SetSpec::WholeSpace { .. } | SetSpec::NonnegativeOrthant { .. } => Err(
                Error::unsupported("norm bound is undefined for an unbounded set"),
            ),
            SetSpec::Box { lower, upper } => {
                // sup over a product set splits per coordinate.
                let sq = lower
                    .iter()
                    .zip(upper)
                    .map(|(&l, &u)| l.abs().max(u.abs()).powi(2))
                    .sum::<T>();
                Ok(DiameterBound {
                    value: sq.sqrt(),
                    exact: true,
                })
            }
            SetSpec::Ball { center, radius } => Ok(DiameterBound {
                value: norm(center) + *radius,
                exact: true,
            }),
            SetSpec::Polyhedron { bounds, .. } => match bounds {
                Some((lo, hi)) => {
                    let sq = lo
                        .iter()
                        .zip(hi)
                        .map(|(&l, &u)| l.abs().max(u.abs()).powi(2))
                        .sum::<T>();
                    Ok(DiameterBound {
                        value: sq.sqrt(),
                        exact: false,
                    })
                }
                None => Err(Error::unsupported(
                    "polyhedron without box bounds may be unbounded",
                )),
            },
        }
    }

    /// Membership within `tol` in every defining inequality.
    pub fn contains(&self, x: &[T], tol: T) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            SetSpec::WholeSpace { .. } => true,
            SetSpec::NonnegativeOrthant { .. } => x.iter().all(|&v| v >= -tol),
            SetSpec::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol),
            SetSpec::Ball { center, radius } => dist_ok(x, center, *radius, tol),
            SetSpec::Polyhedron {
                halfspaces, bounds, ..
            } => {
                halfspaces.iter().all(|h| h.violation(x) <= tol)
                    && bounds.as_ref().is_none_or(|(lo, hi)| {
                        x.iter()
                            .zip(lo.iter().zip(hi))
                            .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
                    })
            }
        }
    }

    /// Uniform sample from a compact set. Polyhedra sample by rejection
    /// from their bounding box.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Result<Vec<T>> {
        match self {
            SetSpec::WholeSpace { .. } | SetSpec::NonnegativeOrthant { .. } => Err(
                Error::argument("uniform sampling requires a compact set; supply a sampling box"),
            ),
            SetSpec::Box { lower, upper } => Ok(lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| {
                    let u: f64 = rng.random_range(0.0..=1.0);
                    lo + (hi - lo) * T::c(u)
                })
                .collect()),
            SetSpec::Ball { center, radius } => {
                let n = center.len();
                let mut dir: Vec<T> = (0..n)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(rng);
                        T::c(g)
                    })
                    .collect();
                let dn = norm(&dir);
                if dn <= T::epsilon() {
                    return Ok(center.clone());
                }
                let u: f64 = rng.random_range(0.0..=1.0);
                let r = *radius * T::c(u.powf(1.0 / n as f64));
                for d in dir.iter_mut() {
                    *d = *d / dn * r;
                }
                Ok(linalg::add(center, &dir))
            }
            SetSpec::Polyhedron { bounds, witness, .. } => {
                let Some((lo, hi)) = bounds else {
                    return Err(Error::argument(
                        "uniform sampling of a polyhedron requires box bounds",
                    ));
                };
                for _ in 0..10_000 {
                    let candidate: Vec<T> = lo
                        .iter()
                        .zip(hi)
                        .map(|(&l, &h)| {
                            let u: f64 = rng.random_range(0.0..=1.0);
                            l + (h - l) * T::c(u)
                        })
                        .collect();
                    if self.contains(&candidate, T::c(1e-12)) {
                        return Ok(candidate);
                    }
                }
                // Thin polyhedra defeat rejection sampling; fall back to
                // the witness so callers still get a feasible point.
                Ok(witness.clone())
            }
        }
    }
}

fn dist_ok<T: Scalar>(x: &[T], center: &[T], radius: T, tol: T) -> bool {
    linalg::dist(x, center) <= radius + tol
}

/// Diameter bound with an exactness flag (polyhedron values are estimates).
#[derive(Debug, Clone, Copy)]
pub struct DiameterBound<T> {
    pub value: T,
    pub exact: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_box() -> SetSpec<f64> {
        SetSpec::hyper_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn orthant_projection_clamps() {
        let s = SetSpec::nonnegative_orthant(2);
        assert_eq!(s.project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn ball_projection_scales_radially() {
        let s = SetSpec::<f64>::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = s.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15);
        assert!((p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn box_projection_is_identity_inside() {
        let p = unit_box().project(&[0.5, 0.5]).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn single_halfspace_projection_is_closed_form() {
        let s = SetSpec::<f64>::polyhedron(
            vec![Halfspace::new(vec![1.0, 0.0], 0.0)],
            None,
            vec![-1.0, 0.0],
        )
        .unwrap();
        let p = s.project(&[1.0, 1.0]).unwrap();
        assert!((p[0] - 0.0).abs() < 1e-9);
        assert!((p[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dykstra_handles_orthogonal_halfspaces() {
        let s = SetSpec::<f64>::polyhedron(
            vec![
                Halfspace::new(vec![1.0, 0.0], 0.0),
                Halfspace::new(vec![0.0, 1.0], 0.0),
            ],
            None,
            vec![-1.0, -1.0],
        )
        .unwrap();
        let r = s.project_polyhedron(&[1.0, 1.0], 10_000, 1e-10).unwrap();
        assert!(r.converged);
        assert!(r.point[0].abs() < 1e-9);
        assert!(r.point[1].abs() < 1e-9);
    }

    #[test]
    fn dykstra_identity_on_feasible_point() {
        let s = SetSpec::polyhedron(
            vec![Halfspace::new(vec![1.0, 1.0], 1.0)],
            None,
            vec![0.0, 0.0],
        )
        .unwrap();
        let r = s.project_polyhedron(&[0.2, 0.3], 10_000, 1e-10).unwrap();
        assert_eq!(r.point, vec![0.2, 0.3]);
    }

    // Dykstra converges to the Euclidean projection, which plain cyclic
    // projection does not; check against the closed form for a wedge.
    #[test]
    fn dykstra_matches_euclidean_projection_on_wedge() {
        let s = SetSpec::polyhedron(
            vec![
                Halfspace::new(vec![1.0, 0.0], 0.5),
                Halfspace::new(vec![1.0, 1.0], 0.6),
            ],
            None,
            vec![0.0, 0.0],
        )
        .unwrap();
        let z = [2.0, 1.0];
        let r = s.project_polyhedron(&z, 10_000, 1e-12).unwrap();
        // Dense check: the variational inequality of a projection.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            if !s.contains(&y, 1e-12) {
                continue;
            }
            let lhs = dot(&linalg::sub(&z, &r.point), &linalg::sub(&y, &r.point));
            assert!(lhs <= 1e-8, "variational characterization violated: {lhs}");
        }
    }

    #[test]
    fn infeasible_witness_is_rejected() {
        let err = SetSpec::polyhedron(
            vec![Halfspace::new(vec![1.0], -1.0)],
            None,
            vec![0.0],
        );
        assert!(matches!(err, Err(Error::Configuration(_))));
    }

    #[test]
    fn diameter_bounds() {
        let b = SetSpec::hyper_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!((b.diameter_bound().unwrap().value - 2f64.sqrt()).abs() < 1e-15);
        let ball = SetSpec::ball(vec![0.0, 0.0], 2.5).unwrap();
        assert_eq!(ball.diameter_bound().unwrap().value, 2.5);
        let orthant = SetSpec::<f64>::nonnegative_orthant(3);
        assert!(matches!(
            orthant.diameter_bound(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn contains_respects_tolerance() {
        let b = SetSpec::hyper_box(vec![0.0], vec![1.0]).unwrap();
        assert!(b.contains(&[1.0 + 1e-12], 1e-9));
        assert!(!b.contains(&[1.1], 1e-9));
        let orthant = SetSpec::nonnegative_orthant(2);
        assert!(orthant.contains(&[0.0, 0.0], 1e-9));
        let ball = SetSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!ball.contains(&[2.0, 0.0], 1e-9));
    }

    fn arb_point2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 2)
    }

    proptest! {
        // ‖P(u) − P(v)‖ ≤ ‖u − v‖ for every set variant.
        #[test]
        fn projection_nonexpansive(u in arb_point2(), v in arb_point2(), which in 0usize..4) {
            let set: SetSpec<f64> = match which {
                0 => SetSpec::nonnegative_orthant(2),
                1 => SetSpec::hyper_box(vec![-1.0, 0.0], vec![2.0, 1.5]).unwrap(),
                2 => SetSpec::ball(vec![0.5, -0.5], 1.25).unwrap(),
                _ => SetSpec::polyhedron(
                    vec![
                        Halfspace::new(vec![1.0, 1.0], 1.0),
                        Halfspace::new(vec![-1.0, 2.0], 2.0),
                    ],
                    Some((vec![-3.0, -3.0], vec![3.0, 3.0])),
                    vec![0.0, 0.0],
                ).unwrap(),
            };
            let pu = set.project(&u).unwrap();
            let pv = set.project(&v).unwrap();
            prop_assert!(linalg::dist(&pu, &pv) <= linalg::dist(&u, &v) + 1e-8);
        }

        // P(P(z)) = P(z).
        #[test]
        fn projection_idempotent(z in arb_point2(), which in 0usize..3) {
            let set: SetSpec<f64> = match which {
                0 => SetSpec::nonnegative_orthant(2),
                1 => SetSpec::hyper_box(vec![-1.0, 0.0], vec![2.0, 1.5]).unwrap(),
                _ => SetSpec::ball(vec![0.5, -0.5], 1.25).unwrap(),
            };
            let p = set.project(&z).unwrap();
            let pp = set.project(&p).unwrap();
            prop_assert!(linalg::dist(&p, &pp) <= 1e-12);
        }

        // ⟨z − P(z), y − P(z)⟩ ≤ 0 for y ∈ X.
        #[test]
        fn projection_variational_characterization(z in arb_point2(), seed in 0u64..1000) {
            let set = SetSpec::hyper_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
            let p = set.project(&z).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let y = set.sample_uniform(&mut rng).unwrap();
                let ip = dot(&linalg::sub(&z, &p), &linalg::sub(&y, &p));
                prop_assert!(ip <= 1e-10);
            }
        }
    }
}
