//! The scalar ring: gauge, sample grid, generalized numbers, asymptotic
//! classification, order relations and subpoint decompositions.

mod classify;
mod compare;
mod gauge;
mod gennum;

pub use classify::{classify, near_standard_part, AsymptoticClass, AsymptoticLabel};
pub use compare::{
    decompose_comparison, in_internal_interval, leq, lt, nudge_invertible, ComparisonDecomposition,
    Relation, SubpointMask,
};
pub use gauge::{make_gauge, Ctx, EpsGrid, Gauge, GaugeKind, RingParams};
pub use gennum::{drho, drho_pow, eps_net, GenNum};
pub use gennum::{is_invertible, Invertibility};
