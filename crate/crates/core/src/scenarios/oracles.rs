//! Classical piecewise-smooth reference solutions. These integrate plain
//! f64 closures with sharp regime switches located by bisection -- an
//! independent code path from the eps-wise kernel machinery they calibrate.

use crate::error::SolveError;
use crate::ode::{DenseOut, RkOpts};

pub struct PiecewiseOracle {
    #[allow(dead_code)]
    pub dim: usize,
    /// (segment start time, dense output valid until the next start).
    pub pieces: Vec<(f64, DenseOut)>,
    pub events: Vec<f64>,
}

impl PiecewiseOracle {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let pos = self
            .pieces
            .partition_point(|p| p.0 <= t)
            .saturating_sub(1);
        self.pieces[pos].1.eval(t, out);
    }
}

/// Integrate `rhs(regime, t, y)` forward, switching regimes at zeros of
/// `event(regime, t, y)` with the state jump `jump`.
pub fn integrate_piecewise(
    mut regime: usize,
    rhs: &(dyn Fn(usize, f64, &[f64], &mut [f64]) + Sync),
    event: &(dyn Fn(usize, f64, &[f64]) -> f64 + Sync),
    jump: &(dyn Fn(usize, f64, &mut [f64]) -> usize + Sync),
    t0: f64,
    y0: &[f64],
    t_end: f64,
    rtol: f64,
) -> Result<PiecewiseOracle, SolveError> {
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = PiecewiseOracle {
        dim,
        pieces: Vec::new(),
        events: Vec::new(),
    };
    let opts = RkOpts {
        rtol,
        atol: rtol * 1e-2,
        max_steps: 5_000_000,
    };
    let empty = crate::ode::no_layers();
    for _ in 0..10_000 {
        let r = regime;
        let f = |tt: f64, yy: &[f64], dy: &mut [f64]| rhs(r, tt, yy, dy);
        let (dense, _, _) = crate::ode::integrate_raw(&f, t, &y, t_end, opts, &empty, f64::NAN)?;
        // Scan for the first sign change of the event function. Detection
        // arms only after the event value has moved away from zero, so a
        // jump landing exactly on the switching surface does not chatter.
        let arm = 1e-7;
        let mut armed = event(regime, t, &y).abs() > arm;
        let mut prev_t = t;
        let mut prev_v = event(regime, t, &y);
        let mut hit: Option<(f64, f64)> = None;
        let mut buf = vec![0.0; dim];
        for seg_idx in 0..dense.segments.len() {
            let s = &dense.segments[seg_idx];
            let te = s.t0 + s.h;
            dense.eval(te, &mut buf);
            let v = event(regime, te, &buf);
            if armed && prev_v != 0.0 && v.signum() != prev_v.signum() {
                hit = Some((prev_t, te));
                break;
            }
            if v.abs() > arm {
                armed = true;
            }
            prev_t = te;
            prev_v = v;
        }
        match hit {
            None => {
                out.pieces.push((t, dense));
                return Ok(out);
            }
            Some((mut lo, mut hi)) => {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    dense.eval(mid, &mut buf);
                    let v = event(regime, mid, &buf);
                    let lo_v = {
                        dense.eval(lo, &mut buf);
                        event(regime, lo, &buf)
                    };
                    if v == 0.0 || (hi - lo) < 1e-15 * hi.abs().max(1.0) {
                        break;
                    }
                    if v.signum() == lo_v.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_star = 0.5 * (lo + hi);
                dense.eval(t_star, &mut buf);
                out.pieces.push((t, dense));
                out.events.push(t_star);
                let mut y_star = buf.clone();
                regime = jump(regime, t_star, &mut y_star);
                t = t_star;
                y = y_star;
                if (t_end - t).abs() < 1e-12 {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

/// Sharp-jump pendulum oracle: fixed-length segments with the tangential
/// velocity continuity jump `Lambda^- theta' = Lambda^+ theta'` at the
/// wrapping angle.
pub struct PendulumOracleCfg {
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
    pub theta0: f64,
}

pub fn pendulum_oracle(
    cfg: &PendulumOracleCfg,
    theta_init: f64,
    omega_init: f64,
    t_end: f64,
) -> Result<PiecewiseOracle, SolveError> {
    let long = cfg.l1 + cfg.l2;
    let short = cfg.l2;
    let g = cfg.g;
    let theta0 = cfg.theta0;
    // Regime 0: theta < theta0 (length long); regime 1: theta > theta0.
    let rhs = move |regime: usize, _t: f64, y: &[f64], dy: &mut [f64]| {
        let l = if regime == 0 { long } else { short };
        dy[0] = y[1];
        dy[1] = -g / l * y[0].sin();
    };
    let event = move |_r: usize, _t: f64, y: &[f64]| y[0] - theta0;
    let jump = move |r: usize, _t: f64, y: &mut [f64]| -> usize {
        let (from, to) = if r == 0 { (long, short) } else { (short, long) };
        y[1] *= from / to;
        1 - r
    };
    let start_regime = if theta_init < theta0 { 0 } else { 1 };
    integrate_piecewise(
        start_regime,
        &rhs,
        &event,
        &jump,
        0.0,
        &[theta_init, omega_init],
        t_end,
        1e-11,
    )
}

/// Two-media damped pendulum: damping beta2 inside |theta| < theta0, beta1
/// outside; velocity is continuous at the interface.
pub struct TwoMediaOracleCfg {
    pub beta1: f64,
    pub beta2: f64,
    pub theta0: f64,
    pub lambda: f64,
    pub g: f64,
}

pub fn two_media_oracle(
    cfg: &TwoMediaOracleCfg,
    theta_init: f64,
    omega_init: f64,
    t_end: f64,
    constant_beta: Option<f64>,
) -> Result<PiecewiseOracle, SolveError> {
    let (b1, b2, th0, lam, g) = (cfg.beta1, cfg.beta2, cfg.theta0, cfg.lambda, cfg.g);
    let rhs = move |regime: usize, _t: f64, y: &[f64], dy: &mut [f64]| {
        let beta = match constant_beta {
            Some(b) => b,
            None => {
                if regime == 1 {
                    b2
                } else {
                    b1
                }
            }
        };
        dy[0] = y[1];
        dy[1] = -2.0 * beta * y[1] - g * y[0].sin() / lam;
    };
    // Event: |theta| - theta0 changes sign.
    let event = move |_r: usize, _t: f64, y: &[f64]| y[0].abs() - th0;
    let jump = move |r: usize, _t: f64, _y: &mut [f64]| 1 - r;
    let start = if theta_init.abs() < th0 { 1 } else { 0 };
    integrate_piecewise(
        start,
        &rhs,
        &event,
        &jump,
        0.0,
        &[theta_init, omega_init],
        t_end,
        1e-11,
    )
}

/// Step-potential matching-system ratios for `U_0 < E` (transmission):
/// returns (|A2/A1|^2, |B1/A1|^2) with B2 = 0.
pub fn step_matching_ratios(energy: f64, u0: f64) -> (f64, f64) {
    let k1 = (2.0 * energy).sqrt();
    let k2 = (2.0 * (energy - u0)).sqrt();
    let r = (k1 - k2) / (k1 + k2);
    let t = 2.0 * k1 / (k1 + k2);
    (r * r, t * t)
}
