//! Ray propagation through a plane-stratified medium from the eikonal
//! equation; the refraction invariant `n sin(phi)` is conserved exactly by
//! the formulation and the exit angle reproduces the classical law.

use crate::error::BuildError;
use crate::gsf::Gsf;
use crate::ode::{solve_forward, Ivp, RkOpts};
use crate::ring::{Ctx, GenNum};

use super::config::{HeavisideVariant, ScenarioConfig};
use super::{heaviside_for, sharp_tail_start, Check, ScenarioOutput, TimeSeries};

#[derive(Clone, Debug)]
pub struct SnellCfg {
    pub n1: f64,
    pub n2: f64,
    pub z_interface: f64,
    /// Incidence angle from the z axis (the stratification normal), radians.
    pub incidence: f64,
    pub s_end: f64,
    pub b_exponent: f64,
    pub heaviside: HeavisideVariant,
    pub sample_ds: f64,
}

impl Default for SnellCfg {
    fn default() -> Self {
        SnellCfg {
            n1: 1.0,
            n2: 1.5,
            z_interface: 0.0,
            incidence: 30f64.to_radians(),
            s_end: 1.0,
            b_exponent: 1.0,
            heaviside: HeavisideVariant::Mollifier,
            sample_ds: 0.002,
        }
    }
}

impl SnellCfg {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self, crate::error::ConfigError> {
        let s = "scenario.snell";
        let d = SnellCfg::default();
        Ok(SnellCfg {
            n1: cfg.f64_or(s, "n1", d.n1)?,
            n2: cfg.f64_or(s, "n2", d.n2)?,
            z_interface: cfg.f64_or(s, "z_interface", d.z_interface)?,
            incidence: cfg.f64_or(s, "incidence_deg", d.incidence.to_degrees())?.to_radians(),
            s_end: cfg.f64_or(s, "s_end", d.s_end)?,
            b_exponent: cfg.f64_or(s, "b_exponent", d.b_exponent)?,
            heaviside: cfg.heaviside_or(s, d.heaviside)?,
            sample_ds: cfg.f64_or(s, "sample_ds", d.sample_ds)?,
        })
    }
}

pub fn run_snell(ctx: &Ctx, cfg: &SnellCfg) -> Result<ScenarioOutput, BuildError> {
    let (b, h) = heaviside_for(ctx, cfg.b_exponent, cfg.heaviside)?;
    // State (x, z, w1, w2) with w = n t_hat; the eikonal equation in the
    // unit-speed parametrization: r' = w / n(z), w' = grad n(z).
    let z = Gsf::coord(2);
    let w1 = Gsf::coord(3);
    let w2 = Gsf::coord(4);
    // n as a one-variable profile, then substituted with the z coordinate.
    let n_profile = h
        .compose(vec![Gsf::x().sub(&Gsf::literal(cfg.z_interface))])
        .scale(cfg.n2 - cfg.n1)
        .add(&Gsf::literal(cfg.n1));
    let n_at_z = n_profile.compose(vec![z.clone()]);
    let dn_dz = crate::gsf::derive(&n_profile, 0).compose(vec![z.clone()]);
    let rhs = vec![
        w1.div(&n_at_z),
        w2.div(&n_at_z),
        Gsf::zero(),
        dn_dz,
    ];
    let start_z = cfg.z_interface - 0.5;
    let w0 = [
        cfg.n1 * cfg.incidence.sin(),
        cfg.n1 * cfg.incidence.cos(),
    ];
    let ivp = Ivp {
        rhs: rhs.clone(),
        t0: GenNum::constant(ctx, 0.0),
        y0: vec![
            GenNum::constant(ctx, 0.0),
            GenNum::constant(ctx, start_z),
            GenNum::constant(ctx, w0[0]),
            GenNum::constant(ctx, w0[1]),
        ],
        alpha: GenNum::constant(ctx, cfg.s_end),
        r: GenNum::constant(ctx, 5.0),
    };
    let path = solve_forward(&ivp, RkOpts::default()).map_err(|e| BuildError::Other(e.to_string()))?;

    let n_samp = (cfg.s_end / cfg.sample_ds).round() as usize + 1;
    let times: Vec<f64> = (0..n_samp).map(|k| k as f64 * cfg.sample_ds).collect();
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    for i in ctx.indices() {
        let mut st = Vec::with_capacity(n_samp);
        let mut dv = Vec::with_capacity(n_samp);
        for &s in &times {
            let mut buf = [0.0; 4];
            path.state_at_idx(i, s, &mut buf);
            let arg = [s, buf[0], buf[1], buf[2], buf[3]];
            dv.push(rhs.iter().map(|f| f.eval_at(i, &arg)).collect());
            st.push(buf.to_vec());
        }
        states.push(st);
        derivs.push(dv);
    }

    let mut checks = Vec::new();
    let total_internal = cfg.n1 * cfg.incidence.sin() > cfg.n2;

    // Conservation: |w| must track n(z), so n sin(phi) = w1 n / |w| stays
    // at its initial value.
    let tail = sharp_tail_start(ctx, &b, 1.0, 1e-3);
    let mut worst_drift = 0.0f64;
    for i in tail.max(ctx.tail_start())..ctx.len() {
        for (k, st) in states[i].iter().enumerate() {
            let zz = st[1];
            if (zz - cfg.z_interface).abs() < 0.02 {
                continue;
            }
            let n_here = if zz < cfg.z_interface { cfg.n1 } else { cfg.n2 };
            let wn = (st[2] * st[2] + st[3] * st[3]).sqrt();
            let inv = st[2] * n_here / wn;
            worst_drift = worst_drift.max((inv - w0[0]).abs());
            let _ = k;
        }
    }
    checks.push(Check::new(
        "n_sin_phi_conserved",
        worst_drift <= 1e-6,
        worst_drift,
        1e-6,
        "far from the interface layer",
    ));

    if !total_internal {
        // Exit angle after the layer.
        let snell_angle = (cfg.n1 * cfg.incidence.sin() / cfg.n2).asin();
        let mut worst = 0.0f64;
        for i in tail.max(ctx.tail_start())..ctx.len() {
            let last = states[i].last().unwrap();
            assert!(last[1] > cfg.z_interface + 0.05, "ray must pass the layer");
            let angle = (last[2] / (last[2] * last[2] + last[3] * last[3]).sqrt()).asin();
            worst = worst.max((angle - snell_angle).abs());
        }
        checks.push(Check::new(
            "refraction_angle",
            worst <= 1e-4,
            worst,
            1e-4,
            format!("asin(n1 sin(i)/n2) = {:.6} rad", snell_angle),
        ));
    } else {
        // Total internal reflection: the ray returns below the interface
        // with the vertical direction flipped.
        let mut ok = true;
        for i in ctx.tail() {
            let last = states[i].last().unwrap();
            if !(last[1] < cfg.z_interface && last[3] < 0.0) {
                ok = false;
            }
        }
        checks.push(Check::new(
            "total_internal_reflection",
            ok,
            0.0,
            0.0,
            "ray bends back below the interface",
        ));
    }

    // Straight-line propagation far from the layer: the direction before
    // the interface is constant.
    let i_ref = ctx.len() - 1;
    let mut worst_dir = 0.0f64;
    for (k, &s) in times.iter().enumerate() {
        let st = &states[i_ref][k];
        // Inbound pass only: below the interface and still heading up.
        if st[1] < cfg.z_interface - 0.05 && st[3] > 0.0 {
            worst_dir = worst_dir.max((st[2] - w0[0]).abs().max((st[3] - w0[1]).abs()));
        }
        let _ = s;
    }
    checks.push(Check::new(
        "straight_line_before_interface",
        worst_dir <= 1e-9,
        worst_dir,
        1e-9,
        "w constant where grad n = 0",
    ));

    Ok(ScenarioOutput {
        series: TimeSeries {
            ctx: ctx.clone(),
            dim: 4,
            times,
            states,
            derivs,
            events: path.events.clone(),
        },
        checks,
    })
}
