//! The singular dynamical-system scenarios: configured simulations with
//! invariant checks against classical piecewise oracles. Physics is only
//! trusted far from the singular layers; every check says which regime it
//! probes and on which part of the grid it is decided.

pub mod config;
mod oracles;
mod pendulum;
mod snell;
mod step_potential;
mod stress_strain;
mod two_media;

pub use config::{HeavisideVariant, ScenarioConfig};
pub use pendulum::{pendulum_small_oscillation_check, run_pendulum, PendulumCfg};
pub use snell::{run_snell, SnellCfg};
pub use step_potential::{run_step_potential, StepPotentialCfg};
pub use stress_strain::{nonlinear_force, nonlinear_potential, run_stress_strain, StressStrainCfg};
pub use two_media::{run_two_media, TwoMediaCfg};

use crate::error::BuildError;
use crate::gsf::Gsf;
use crate::ring::{drho_pow, Ctx, GenNum};

/// One verdict line of a scenario report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tol: f64,
    pub note: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, value: f64, tol: f64, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            value,
            tol,
            note: note.into(),
        }
    }
}

/// Sampled per-eps trajectories plus event annotations.
pub struct TimeSeries {
    pub ctx: Ctx,
    pub dim: usize,
    pub times: Vec<f64>,
    /// states[idx][sample][component]
    pub states: Vec<Vec<Vec<f64>>>,
    pub derivs: Vec<Vec<Vec<f64>>>,
    /// (grid index, event time, crossing id)
    pub events: Vec<(usize, f64, usize)>,
}

pub struct ScenarioOutput {
    pub series: TimeSeries,
    pub checks: Vec<Check>,
}

impl ScenarioOutput {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The embedding scale `b = drho^{-a}` and the chosen Heaviside variant.
pub(crate) fn heaviside_for(
    ctx: &Ctx,
    a: f64,
    variant: HeavisideVariant,
) -> Result<(GenNum, Gsf), BuildError> {
    let b = drho_pow(ctx, -a);
    let h = match variant {
        HeavisideVariant::Mollifier => crate::gsf::embed_heaviside(&b)?,
        HeavisideVariant::Smoothstep => crate::gsf::smoothstep_heaviside(&b)?,
    };
    Ok((b, h))
}

/// First grid index from which a layer-width-sensitive comparison against a
/// sharp-jump oracle is meaningful: the mollifier window `width / b_eps`
/// must sit below the tolerance.
pub(crate) fn sharp_tail_start(ctx: &Ctx, b: &GenNum, scale: f64, tol: f64) -> usize {
    let r = crate::mollifier::standard_mollifier().radius();
    for i in ctx.indices() {
        if scale * r / b.at(i) <= tol {
            return i;
        }
    }
    ctx.len() - 1
}
