//! Stepsize and regularization parameter schedules.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of the power-law schedule used by the solution-space
/// analysis: `γ_k = γ/(k+Γ)^a`, `η_k = η/(k+Γ)^b`.
#[derive(Debug, Clone, Copy)]
pub struct TikhonovParams<T> {
    pub gamma: T,
    pub eta: T,
    pub a: T,
    pub b: T,
    pub big_gamma: T,
}

/// Joint stepsize/regularization schedule. Both sequences are strictly
/// positive and nonincreasing by construction.
#[derive(Debug, Clone, Copy)]
pub enum Schedule<T> {
    /// `γ_k = γ₀/√(k+1)`, `η_k = η₀/(k+1)^b` with `b ∈ (0, 0.5)`.
    Rate { gamma0: T, eta0: T, b: T },
    /// `γ_k = γ/(k+Γ)^a`, `η_k = η/(k+Γ)^b` with `a > b`, `a+b < 1`,
    /// `3a+b < 2`, `Γ ≥ 1`. The two Γ lower bounds that involve the
    /// strong-convexity modulus are checked by
    /// [`crate::metrics::check_schedule_conditions`].
    Tikhonov(TikhonovParams<T>),
}

impl<T: Scalar> Schedule<T> {
    pub fn rate(gamma0: T, eta0: T, b: T) -> Result<Self> {
        if gamma0 <= T::zero() || eta0 <= T::zero() {
            return Err(Error::configuration("rate schedule needs gamma0, eta0 > 0"));
        }
        if b <= T::zero() || b >= T::half() {
            return Err(Error::configuration("rate schedule needs b in (0, 0.5)"));
        }
        Ok(Schedule::Rate { gamma0, eta0, b })
    }

    pub fn tikhonov(gamma: T, eta: T, a: T, b: T, big_gamma: T) -> Result<Self> {
        let params = TikhonovParams {
            gamma,
            eta,
            a,
            b,
            big_gamma,
        };
        if gamma <= T::zero() || eta <= T::zero() || a <= T::zero() || b <= T::zero() {
            return Err(Error::configuration(
                "tikhonov schedule needs strictly positive parameters",
            ));
        }
        if a <= b {
            return Err(Error::configuration("tikhonov schedule needs a > b"));
        }
        if a + b >= T::one() {
            return Err(Error::configuration("tikhonov schedule needs a + b < 1"));
        }
        if T::c(3.0) * a + b >= T::two() {
            return Err(Error::configuration("tikhonov schedule needs 3a + b < 2"));
        }
        if big_gamma < T::one() {
            return Err(Error::configuration("tikhonov schedule needs Γ ≥ 1"));
        }
        Ok(Schedule::Tikhonov(params))
    }

    /// `(γ_k, η_k)` in closed form.
    pub fn values(&self, k: usize) -> (T, T) {
        match self {
            Schedule::Rate { gamma0, eta0, b } => {
                let k1 = T::from_count(k + 1);
                (*gamma0 / k1.sqrt(), *eta0 / k1.powf(*b))
            }
            Schedule::Tikhonov(p) => {
                let base = T::from_count(k) + p.big_gamma;
                (p.gamma / base.powf(p.a), p.eta / base.powf(p.b))
            }
        }
    }

    pub fn gamma(&self, k: usize) -> T {
        self.values(k).0
    }

    pub fn eta(&self, k: usize) -> T {
        self.values(k).1
    }

    /// Re-checks the constructor invariants; catches directly built
    /// enum values that bypassed the smart constructors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Rate { gamma0, eta0, b } => Self::rate(gamma0, eta0, b).map(|_| ()),
            Schedule::Tikhonov(p) => {
                Self::tikhonov(p.gamma, p.eta, p.a, p.b, p.big_gamma).map(|_| ())
            }
        }
    }

    pub fn rate_params(&self) -> Option<(T, T, T)> {
        match self {
            Schedule::Rate { gamma0, eta0, b } => Some((*gamma0, *eta0, *b)),
            _ => None,
        }
    }

    pub fn tikhonov_params(&self) -> Option<TikhonovParams<T>> {
        match self {
            Schedule::Tikhonov(p) => Some(*p),
            _ => None,
        }
    }
}
