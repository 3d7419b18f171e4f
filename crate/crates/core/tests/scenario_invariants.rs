//! Cross-run scenario invariants: robustness of far-field outputs to the
//! regularization scale (embedding exponent) and to the Heaviside variant.
//! Far-field outputs are compared through their extrapolated limits: the
//! per-eps values differ by the layer scale 1/b_eps, which vanishes in the
//! limit the model claims to describe.

use gsf_core::ring::{Ctx, EpsGrid, Gauge, RingParams};
use gsf_core::scenarios::{run_pendulum, HeavisideVariant, PendulumCfg};

/// Aitken extrapolation of the last three tail values.
fn extrapolate(values: &[f64]) -> f64 {
    let n = values.len();
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let dd = (c - b) - (b - a);
    if dd.abs() < 1e-300 {
        c
    } else {
        c - (c - b) * (c - b) / dd
    }
}

/// Grid whose floor keeps the layer time-scale `1/b = rho^a` resolvable in
/// f64 time arithmetic; steeper embeddings take a shorter grid, and the
/// extrapolated limit is what gets compared.
fn ctx_for_exponent(a: f64) -> Ctx {
    let n = if a > 1.5 { 16 } else { 24 };
    Ctx::new(
        Gauge::identity(),
        EpsGrid::geometric(0.5, 0.5, n).unwrap(),
        RingParams::default(),
    )
    .unwrap()
}

fn pendulum_output(ctx: &Ctx, b_exponent: f64, heaviside: HeavisideVariant) -> (f64, f64) {
    let cfg = PendulumCfg {
        b_exponent,
        heaviside,
        t_end: 0.6,
        sample_dt: 0.005,
        ..PendulumCfg::default()
    };
    let out = run_pendulum(ctx, &cfg).unwrap();
    // Probe a far-field time: well after the first wrapping, before the
    // second crossing (theta sits above theta0 around t ~ 0.2).
    let k = out
        .series
        .times
        .iter()
        .position(|&t| (t - 0.2).abs() < 2e-3)
        .unwrap();
    let theta: Vec<f64> = (0..ctx.len()).map(|i| out.series.states[i][k][0]).collect();
    let omega: Vec<f64> = (0..ctx.len()).map(|i| out.series.states[i][k][1]).collect();
    (extrapolate(&theta), extrapolate(&omega))
}

#[test]
fn pendulum_robust_to_regularization_scale_and_heaviside_variant() {
    let base = pendulum_output(&ctx_for_exponent(1.0), 1.0, HeavisideVariant::Mollifier);
    let variants = [
        (
            "b = drho^-1/2",
            pendulum_output(&ctx_for_exponent(0.5), 0.5, HeavisideVariant::Mollifier),
        ),
        (
            "b = drho^-2",
            pendulum_output(&ctx_for_exponent(2.0), 2.0, HeavisideVariant::Mollifier),
        ),
        (
            "smoothstep H",
            pendulum_output(&ctx_for_exponent(1.0), 1.0, HeavisideVariant::Smoothstep),
        ),
    ];
    for (name, v) in variants {
        let d_theta = (v.0 - base.0).abs() / base.0.abs().max(1.0);
        let d_omega = (v.1 - base.1).abs() / base.1.abs().max(1.0);
        println!("variant {name}: d_theta = {d_theta:.3e}, d_omega = {d_omega:.3e}");
        assert!(
            d_theta <= 1e-5 && d_omega <= 1e-5,
            "{name}: far-field limit moved by ({d_theta:.3e}, {d_omega:.3e}), tol 1e-5"
        );
    }
}
