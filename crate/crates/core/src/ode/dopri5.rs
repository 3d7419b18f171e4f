//! Dormand-Prince 5(4) with dense output for one member of the eps-net,
//! plus singular-layer step control: the caller registers crossing
//! functions (scaled kernel arguments) and the stepper refuses to fly over
//! their active windows.

use crate::error::SolveError;

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct RkOpts {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u64,
}

impl Default for RkOpts {
    fn default() -> Self {
        RkOpts {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
        }
    }
}

/// One dense-output segment of an accepted step.
#[derive(Clone, Debug)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    rcont: Vec<[f64; 5]>,
}

impl Segment {
    pub fn new(t0: f64, h: f64, rcont: Vec<[f64; 5]>) -> Self {
        Segment { t0, h, rcont }
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let th = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        for (k, rc) in self.rcont.iter().enumerate() {
            out[k] = rc[0] + th * (rc[1] + th1 * (rc[2] + th * (rc[3] + th1 * rc[4])));
        }
    }
}

/// Dense output over one direction of integration.
#[derive(Clone, Debug, Default)]
pub struct DenseOut {
    pub segments: Vec<Segment>,
}

impl DenseOut {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        if self.segments.is_empty() {
            return;
        }
        // Segments are ordered by t0 (increasing or decreasing uniformly).
        let increasing = self.segments.last().unwrap().h > 0.0;
        let pos = self.segments.partition_point(|s| {
            if increasing {
                s.t0 + s.h < t
            } else {
                s.t0 + s.h > t
            }
        });
        let seg = &self.segments[pos.min(self.segments.len() - 1)];
        seg.eval(t, out);
    }

    pub fn t_end(&self) -> f64 {
        self.segments
            .last()
            .map(|s| s.t0 + s.h)
            .unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

pub struct EventHit {
    pub t: f64,
    pub crossing_id: usize,
}

/// Crossing functions: scaled kernel arguments with their support radii.
/// A layer is "active" where |c(t, y)| <= support.
pub struct Layers<'a> {
    pub crossings: &'a [Box<dyn Fn(f64, &[f64]) -> f64 + Sync>],
    pub supports: &'a [f64],
}

impl Layers<'_> {
    fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }
}

/// Integrate from `t0` to `t_end` (either direction).
pub fn integrate(
    rhs: &(dyn Fn(f64, &[f64], &mut [f64]) + Sync),
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: RkOpts,
    layers: &Layers,
    eps: f64,
) -> Result<(DenseOut, StepStats, Vec<EventHit>), SolveError> {
    let dim = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut stats = StepStats::default();
    let mut events = Vec::new();
    let mut out = DenseOut::default();
    if span == 0.0 {
        return Ok((out, stats, events));
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;

    // Initial step size from the RHS scale.
    let scale0 = y
        .iter()
        .zip(&k1)
        .map(|(yi, ki)| (ki / (opts.atol + opts.rtol * yi.abs())).abs())
        .fold(0.0f64, f64::max);
    let mut h = dir * (0.01 / scale0.max(1e-8)).min(span * 0.1).max(span * 1e-12);

    let mut cross_prev: Vec<f64> = layers
        .crossings
        .iter()
        .map(|c| c(t, &y))
        .collect();

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut ytmp = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];

    loop {
        if (t - t_end) * dir >= 0.0 {
            break;
        }
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(SolveError::StepBudget {
                eps,
                t,
                budget: opts.max_steps,
            });
        }
        // Do not overshoot.
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        // Inside a layer: cap the step so the window is crossed in several
        // steps (estimate dc/dt from the previous crossing values).
        if !layers.is_empty() {
            for (ci, c) in layers.crossings.iter().enumerate() {
                let cv = c(t, &y);
                let support = layers.supports[ci];
                if cv.abs() <= 2.0 * support {
                    // Estimate the time to traverse the window.
                    let dcdt = {
                        let mut probe = vec![0.0; dim];
                        rhs(t, &y, &mut probe);
                        stats.rhs_evals += 1;
                        let dt = (h * 1e-3).abs().max(1e-300) * dir;
                        let mut y2 = y.clone();
                        for (yi, pi) in y2.iter_mut().zip(&probe) {
                            *yi += dt * pi;
                        }
                        (c(t + dt, &y2) - cv) / dt
                    };
                    if dcdt.abs() > 1e-300 {
                        let window_time = 2.0 * support / dcdt.abs();
                        let cap = (window_time / 6.0).max(1e-3 * window_time);
                        if h.abs() > cap {
                            h = dir * cap;
                        }
                    }
                }
            }
        }
        if h.abs() < f64::EPSILON * t.abs().max(1e-3) * 1e-2 {
            return Err(SolveError::StepUnderflow { eps, t, h });
        }

        // The seven stages.
        for i in 0..dim {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4);
        for i in 0..dim {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5);
        for i in 0..dim {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, &ytmp, &mut k6);
        for i in 0..dim {
            ynew[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t + h, &ynew, &mut k7);
        stats.rhs_evals += 6;

        let mut err = 0.0;
        for i in 0..dim {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / dim as f64).sqrt();

        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            // Layer fly-over check: a crossing that changed сign while both
            // endpoints are outside the window means the spike was skipped.
            let mut flyover = false;
            if !layers.is_empty() {
                for (ci, c) in layers.crossings.iter().enumerate() {
                    let c_new = c(t + h, &ynew);
                    let c_old = cross_prev[ci];
                    let support = layers.supports[ci];
                    if c_old.signum() != c_new.signum()
                        && c_old.abs() > support
                        && c_new.abs() > support
                    {
                        // Shrink toward the window edge.
                        let frac = ((c_old.abs() - support).max(0.0)
                            / (c_old.abs() + c_new.abs()))
                        .clamp(0.05, 0.8);
                        h *= frac;
                        flyover = true;
                        break;
                    }
                }
            }
            if flyover {
                stats.rejected += 1;
                continue;
            }

            // Record zero crossings for the event file.
            for (ci, c) in layers.crossings.iter().enumerate() {
                let c_new = c(t + h, &ynew);
                let c_old = cross_prev[ci];
                if c_old.signum() != c_new.signum() && c_old != 0.0 {
                    let frac = c_old.abs() / (c_old.abs() + c_new.abs());
                    events.push(EventHit {
                        t: t + frac * h,
                        crossing_id: ci,
                    });
                }
                cross_prev[ci] = c_new;
            }

            // Dense coefficients.
            let mut rcont = Vec::with_capacity(dim);
            for i in 0..dim {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                let r5 = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
                rcont.push([y[i], ydiff, bspl, ydiff - h * k7[i] - bspl, r5]);
            }
            out.segments.push(Segment { t0: t, h, rcont });

            t += h;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;

            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
        } else {
            stats.rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
        }
    }
    Ok((out, stats, events))
}
