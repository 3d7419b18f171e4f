//! Computable calculus over the ring of gauge-indexed generalized numbers.
//!
//! Scalars are nets `eps -> x_eps` sampled on a finite decreasing grid and
//! measured against a gauge `eps -> rho_eps`. On top of them the crate builds
//! generalized smooth functions as expression trees with exact derivative
//! rules, mollifier embeddings of Schwartz distributions with honest pointwise
//! values (`delta(0) = b`, `H(0) = 1/2`), eps-wise integration and ODE
//! solving, order-tagged nilpotent calculus, and a set of singular
//! dynamical-system scenarios verified against classical piecewise oracles.
//!
//! Every asymptotic statement (`x <= y`, "x is infinitesimal", `x =_j y`) is
//! decided on the tail of the grid and carries the exponents and constants
//! used, so answers are explicit finite-precision approximations of the
//! quotient-ring semantics, never silent idealizations.

pub mod error;
pub mod gsf;
pub mod hft;
pub mod mollifier;
pub mod nilpotent;
pub mod ode;
pub mod physics;
pub mod ring;
pub mod scenarios;
pub mod verify;
pub mod util;

pub use error::{BuildError, ConfigError, EvalError, QuadError, RingError, SolveError};
pub use gsf::{FcBox, GPoint, Gsf};
pub use mollifier::{build_cutoff, build_mollifier, moment, CutoffFn, MollifierFn};
pub use ring::{
    classify, drho, drho_pow, AsymptoticClass, AsymptoticLabel, Ctx, EpsGrid, Gauge, GaugeKind,
    GenNum, SubpointMask,
};
