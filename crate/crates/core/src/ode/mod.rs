//! Generalized norms, the Picard-Lindelof machinery, eps-wise adaptive
//! integration of singular IVPs, closed-form linear solutions and the
//! Gronwall bound verifier.

mod dopri5;

pub use dopri5::{integrate as integrate_raw, DenseOut, Layers, RkOpts, StepStats};

/// Empty layer set for classical (non-singular) integrations.
pub fn no_layers() -> Layers<'static> {
    Layers {
        crossings: &[],
        supports: &[],
    }
}

use rayon::prelude::*;

use crate::error::SolveError;
use crate::gsf::{
    antiderivative, derive, extremum, features_of, FcBox, GPoint, Gsf,
};
use crate::ring::{classify, leq, AsymptoticLabel, Ctx, GenNum};

/// An initial value problem `y' = F(t, y)` on `[t0 - alpha, t0 + alpha]`.
/// `rhs` components are trees in the coordinates `(t, y_1, ..., y_d)`.
pub struct Ivp {
    pub rhs: Vec<Gsf>,
    pub t0: GenNum,
    pub y0: Vec<GenNum>,
    pub alpha: GenNum,
    /// State-ball radius used by the contraction precheck.
    pub r: GenNum,
}

#[derive(Clone, Copy, Debug)]
pub enum Method {
    PerEpsRk(RkOpts),
    Picard { n_iter: usize, grid: usize },
}

/// Per-eps dense solution with solver statistics and event annotations.
pub struct SolvedPath {
    ctx: Ctx,
    pub dim: usize,
    t0: Vec<f64>,
    forward: Vec<DenseOut>,
    backward: Vec<DenseOut>,
    pub stats: Vec<StepStats>,
    /// (grid index, event time, crossing id).
    pub events: Vec<(usize, f64, usize)>,
}

impl SolvedPath {
    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn state_at_idx(&self, i: usize, t: f64, out: &mut [f64]) {
        if t >= self.t0[i] {
            self.forward[i].eval(t, out);
        } else {
            self.backward[i].eval(t, out);
        }
    }

    /// Dense evaluation at a generalized time.
    pub fn state_at(&self, t: &GenNum) -> Vec<GenNum> {
        (0..self.dim)
            .map(|k| {
                let t = t.clone();
                let dim = self.dim;
                GenNum::from_indexed(&self.ctx, {
                    let fwd = self.forward.clone();
                    let bwd = self.backward.clone();
                    let t0 = self.t0.clone();
                    move |i, _| {
                        let mut buf = vec![0.0; dim];
                        if t.at(i) >= t0[i] {
                            fwd[i].eval(t.at(i), &mut buf);
                        } else {
                            bwd[i].eval(t.at(i), &mut buf);
                        }
                        buf[k]
                    }
                })
            })
            .collect()
    }
}

fn state_buf(t: f64, y: &[f64]) -> [f64; 8] {
    let mut s = [0.0f64; 8];
    s[0] = t;
    s[1..1 + y.len()].copy_from_slice(y);
    s
}

/// Solve eps-wise in parallel. The RK path receives the kernel windows of
/// the right-hand side as singular layers; the Picard path iterates the
/// integral operator on a dense time grid.
pub fn solve_ivp(ivp: &Ivp, method: Method) -> Result<SolvedPath, SolveError> {
    let dim = ivp.y0.len();
    assert!(dim >= 1 && dim <= 7, "state dimension 1..=7");
    for f in &ivp.rhs {
        assert!(f.arity() <= 1 + dim, "rhs arity exceeds (t, y) coordinates");
    }
    match method {
        Method::PerEpsRk(opts) => rk_path(ivp, opts, true),
        Method::Picard { n_iter, grid } => {
            let run = picard_run(ivp, n_iter, grid)?;
            Ok(run.into_path())
        }
    }
}

/// Forward-only variant of `solve_ivp` for scenario runs starting at `t0`.
pub fn solve_forward(ivp: &Ivp, opts: RkOpts) -> Result<SolvedPath, SolveError> {
    let dim = ivp.y0.len();
    assert!(dim >= 1 && dim <= 7);
    rk_path(ivp, opts, false)
}

fn rk_path(ivp: &Ivp, opts: RkOpts, both_directions: bool) -> Result<SolvedPath, SolveError> {
    let ctx = ivp.t0.ctx().clone();
    let dim = ivp.y0.len();
    // Kernel windows of the RHS: crossing functions in (t, y).
    let mut feats = Vec::new();
    for f in &ivp.rhs {
        feats.extend(features_of(f));
    }

    let idx: Vec<usize> = ctx.indices().collect();
    let results: Result<Vec<_>, SolveError> = idx
        .par_iter()
        .map(|&i| {
            let rhs_trees = ivp.rhs.clone();
            let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
                let s = state_buf(t, y);
                for (k, f) in rhs_trees.iter().enumerate() {
                    dy[k] = f.eval_at(i, &s[..1 + y.len()]);
                }
            };
            let crossings: Vec<Box<dyn Fn(f64, &[f64]) -> f64 + Sync>> = feats
                .iter()
                .map(|ft| {
                    let arg = ft.arg.clone();
                    Box::new(move |t: f64, y: &[f64]| {
                        let s = state_buf(t, y);
                        arg.eval_at(i, &s[..1 + y.len()])
                    }) as Box<dyn Fn(f64, &[f64]) -> f64 + Sync>
                })
                .collect();
            let supports: Vec<f64> = feats.iter().map(|ft| ft.support_at(i)).collect();
            let layers = dopri5::Layers {
                crossings: &crossings,
                supports: &supports,
            };
            let t0 = ivp.t0.at(i);
            let a = ivp.alpha.at(i);
            let y0: Vec<f64> = ivp.y0.iter().map(|y| y.at(i)).collect();
            let (fwd, st_f, ev_f) =
                dopri5::integrate(&rhs, t0, &y0, t0 + a, opts, &layers, ctx.eps(i))?;
            let (bwd, st_b, ev_b) = if both_directions {
                dopri5::integrate(&rhs, t0, &y0, t0 - a, opts, &layers, ctx.eps(i))?
            } else {
                (DenseOut::default(), StepStats::default(), Vec::new())
            };
            let mut stats = st_f;
            stats.accepted += st_b.accepted;
            stats.rejected += st_b.rejected;
            stats.rhs_evals += st_b.rhs_evals;
            let mut events: Vec<(usize, f64, usize)> =
                ev_f.into_iter().map(|e| (i, e.t, e.crossing_id)).collect();
            events.extend(ev_b.into_iter().map(|e| (i, e.t, e.crossing_id)));
            Ok((t0, fwd, bwd, stats, events))
        })
        .collect();
    let results = results?;
    let mut path = SolvedPath {
        ctx,
        dim,
        t0: Vec::new(),
        forward: Vec::new(),
        backward: Vec::new(),
        stats: Vec::new(),
        events: Vec::new(),
    };
    for (t0, fwd, bwd, stats, events) in results {
        path.t0.push(t0);
        path.forward.push(fwd);
        path.backward.push(bwd);
        path.stats.push(stats);
        path.events.extend(events);
    }
    Ok(path)
}

/// The Picard iteration record: iterates sampled on a dense uniform grid,
/// one block per grid index.
pub struct PicardRun {
    pub ctx: Ctx,
    pub dim: usize,
    pub per_idx: Vec<PicardIdx>,
}

pub struct PicardIdx {
    pub ts: Vec<f64>,
    /// iterates[n][k][c]: n-th iterate, time sample k, component c.
    pub iterates: Vec<Vec<Vec<f64>>>,
    /// Sup-norm of consecutive iterate differences.
    pub sup_steps: Vec<f64>,
}

impl PicardIdx {
    /// Sup distance between iterate `n` and the final iterate.
    pub fn sup_distance_to_last(&self, n: usize) -> f64 {
        let last = self.iterates.last().unwrap();
        let mut sup = 0.0f64;
        for (row, lrow) in self.iterates[n].iter().zip(last) {
            for (a, b) in row.iter().zip(lrow) {
                sup = sup.max((a - b).abs());
            }
        }
        sup
    }
}

impl PicardRun {
    fn into_path(self) -> SolvedPath {
        // Hermite segments from the final iterate samples.
        let mut path = SolvedPath {
            ctx: self.ctx.clone(),
            dim: self.dim,
            t0: Vec::new(),
            forward: Vec::new(),
            backward: Vec::new(),
            stats: Vec::new(),
            events: Vec::new(),
        };
        for pi in &self.per_idx {
            let last = pi.iterates.last().unwrap();
            let mut fwd = DenseOut::default();
            for k in 0..pi.ts.len() - 1 {
                let h = pi.ts[k + 1] - pi.ts[k];
                let rcont: Vec<[f64; 5]> = (0..self.dim)
                    .map(|c| {
                        let y0 = last[k][c];
                        let y1 = last[k + 1][c];
                        [y0, y1 - y0, 0.0, 0.0, 0.0]
                    })
                    .collect();
                fwd.segments
                    .push(dopri5::Segment::new(pi.ts[k], h, rcont));
            }
            path.t0.push(pi.ts[0]);
            path.forward.push(fwd);
            path.backward.push(DenseOut::default());
            path.stats.push(StepStats::default());
        }
        path
    }
}

/// Run `n_iter` Picard iterations `P(y)(t) = y0 + int_{t0}^t F(s, y(s)) ds`
/// from the constant function `y0`, on a uniform grid of `grid` points over
/// `[t0 - alpha, t0 + alpha]`.
pub fn picard_run(ivp: &Ivp, n_iter: usize, grid: usize) -> Result<PicardRun, SolveError> {
    let ctx = ivp.t0.ctx().clone();
    let dim = ivp.y0.len();
    let n = if grid % 2 == 0 { grid + 1 } else { grid };
    let idx: Vec<usize> = ctx.indices().collect();
    let per: Result<Vec<PicardIdx>, SolveError> = idx
        .par_iter()
        .map(|&i| {
            let t0 = ivp.t0.at(i);
            let a = ivp.alpha.at(i);
            let ts: Vec<f64> = (0..n)
                .map(|k| t0 - a + 2.0 * a * k as f64 / (n - 1) as f64)
                .collect();
            let center = (n - 1) / 2;
            let y0: Vec<f64> = ivp.y0.iter().map(|y| y.at(i)).collect();
            let mut iterates = vec![vec![y0.clone(); n]];
            let mut sup_steps = Vec::new();
            let mut grow_count = 0usize;
            for _ in 0..n_iter {
                let prev = iterates.last().unwrap();
                // Sample F along the previous iterate.
                let mut fv = vec![vec![0.0; dim]; n];
                for (k, t) in ts.iter().enumerate() {
                    let s = state_buf(*t, &prev[k]);
                    for (c, f) in ivp.rhs.iter().enumerate() {
                        fv[k][c] = f.eval_at(i, &s[..1 + dim]);
                    }
                }
                // Cumulative integral from the center outward (3-point
                // parabolic rule).
                let h = ts[1] - ts[0];
                let mut next = vec![vec![0.0; dim]; n];
                next[center] = y0.clone();
                for c in 0..dim {
                    let mut acc = 0.0;
                    for k in center..n - 1 {
                        let inc = if k + 2 < n {
                            h / 12.0 * (5.0 * fv[k][c] + 8.0 * fv[k + 1][c] - fv[k + 2][c])
                        } else {
                            h / 12.0 * (-fv[k - 1][c] + 8.0 * fv[k][c] + 5.0 * fv[k + 1][c])
                        };
                        acc += inc;
                        next[k + 1][c] = y0[c] + acc;
                    }
                    let mut acc = 0.0;
                    for k in (1..=center).rev() {
                        let dec = if k >= 2 {
                            h / 12.0 * (5.0 * fv[k][c] + 8.0 * fv[k - 1][c] - fv[k - 2][c])
                        } else {
                            h / 12.0 * (-fv[k + 1][c] + 8.0 * fv[k][c] + 5.0 * fv[k - 1][c])
                        };
                        acc -= dec;
                        next[k - 1][c] = y0[c] + acc;
                    }
                }
                let mut sup = 0.0f64;
                for (row, prow) in next.iter().zip(prev) {
                    for (a1, b1) in row.iter().zip(prow) {
                        sup = sup.max((a1 - b1).abs());
                    }
                }
                if let Some(&last) = sup_steps.last() {
                    if sup > last {
                        grow_count += 1;
                        if grow_count >= 3 {
                            return Err(SolveError::PicardDiverged {
                                eps: ctx.eps(i),
                                count: grow_count,
                            });
                        }
                    } else {
                        grow_count = 0;
                    }
                }
                sup_steps.push(sup);
                iterates.push(next);
            }
            Ok(PicardIdx {
                ts,
                iterates,
                sup_steps,
            })
        })
        .collect();
    Ok(PicardRun {
        ctx,
        dim,
        per_idx: per?,
    })
}

fn multi_indices(dim: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if dim == 1 {
        for k in 0..=l {
            out.push(vec![k]);
        }
    } else {
        for total in 0..=l {
            for k in 0..=total {
                out.push(vec![k, total - k]);
            }
        }
    }
    out
}

/// Generalized norm `||v||_l`: the eps-wise max over the box of all partial
/// derivatives up to order `l`, over all components.
pub fn gnorm(v: &[Gsf], l: usize, bx: &FcBox) -> GenNum {
    let ctx = bx.lo.ctx().clone();
    let mut best = GenNum::constant(&ctx, 0.0);
    for comp in v {
        for alpha in multi_indices(bx.dim(), l) {
            let mut g = comp.clone();
            for (var, &count) in alpha.iter().enumerate() {
                for _ in 0..count {
                    g = derive(&g, var);
                }
            }
            let ext = extremum(&g, bx);
            let bound = ext.min.abs().sup(&ext.max.abs());
            best = best.sup(&bound);
        }
    }
    best
}

#[derive(Debug)]
pub struct Precheck {
    pub m_bound: GenNum,
    pub l_bound: GenNum,
    pub alpha_m_le_r: bool,
    pub contraction_ok: bool,
}

/// Bounds `M = max |F|`, `L = max |dF/dy|` over the time-state box and the
/// contraction condition `(alpha L)^n -> 0`.
pub fn picard_precheck(ivp: &Ivp) -> Precheck {
    assert_eq!(ivp.y0.len(), 1, "precheck implemented for scalar states");
    let ctx = ivp.t0.ctx().clone();
    let t_lo = &ivp.t0 - &ivp.alpha;
    let t_hi = &ivp.t0 + &ivp.alpha;
    let y_lo = &ivp.y0[0] - &ivp.r;
    let y_hi = &ivp.y0[0] + &ivp.r;
    let bx = FcBox::new(
        GPoint::new(vec![t_lo, y_lo]),
        GPoint::new(vec![t_hi, y_hi]),
    )
    .expect("precheck box");
    let m_bound = gnorm(&ivp.rhs, 0, &bx);
    let dfdy: Vec<Gsf> = ivp.rhs.iter().map(|f| derive(f, 1)).collect();
    let l_bound = gnorm(&dfdy, 0, &bx);
    let alpha_m = &ivp.alpha * &m_bound;
    let alpha_m_le_r = leq(&alpha_m, &ivp.r);
    let al = &ivp.alpha * &l_bound;
    let cl = classify(&al, ctx.params().n_max);
    let contraction_ok = match cl.label {
        AsymptoticLabel::Negligible | AsymptoticLabel::Infinitesimal => true,
        AsymptoticLabel::NearStandard(v) => v.abs() < 1.0,
        AsymptoticLabel::FiniteNonzero => ctx.tail().all(|i| al.at(i).abs() < 0.999),
        _ => false,
    };
    Precheck {
        m_bound,
        l_bound,
        alpha_m_le_r,
        contraction_ok,
    }
}

/// Solution report of the homogeneous linear system `y' = A(t) y`.
pub struct LinearReport {
    /// Attained constant in `|int A| <= C log(drho^-1)` over the tail.
    pub log_constant: f64,
    pub used_closed_form: bool,
    /// Max relative deviation between the closed form and the RK
    /// cross-check at sample times (tail indices).
    pub max_rel_dev: f64,
    pub path: SolvedPath,
    closed: Option<ClosedLinear>,
}

struct ClosedLinear {
    b_entries: Vec<Gsf>,
    d: usize,
    y0: Vec<GenNum>,
}

impl LinearReport {
    /// Closed-form state, when the coefficient family commutes.
    pub fn closed_state(&self, i: usize, t: f64) -> Option<Vec<f64>> {
        let c = self.closed.as_ref()?;
        let d = c.d;
        let mut b = nalgebra::DMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                b[(r, s)] = c.b_entries[r * d + s].eval_at(i, &[t]);
            }
        }
        let e = matrix_exp(&b);
        let y0: Vec<f64> = c.y0.iter().map(|v| v.at(i)).collect();
        let mut out = vec![0.0; d];
        for r in 0..d {
            for s in 0..d {
                out[r] += e[(r, s)] * y0[s];
            }
        }
        Some(out)
    }
}

fn matrix_exp(b: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let d = b.nrows();
    let norm = b.iter().map(|v| v.abs()).fold(0.0f64, f64::max) * d as f64;
    let s = norm.log2().ceil().max(0.0) as u32 + 1;
    let a = b / 2f64.powi(s as i32);
    let mut term = nalgebra::DMatrix::identity(d, d);
    let mut acc = nalgebra::DMatrix::identity(d, d);
    for k in 1..=18 {
        term = &term * &a / k as f64;
        acc += &term;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}

/// Solve `y' = A(t) y, y(t0) = y0` on `[lo, hi]`. The closed form
/// `exp(int A) y0` applies to scalar or verified-commuting families and is
/// always cross-checked against the eps-wise RK path.
pub fn solve_linear(
    a: &[Vec<Gsf>],
    t0: &GenNum,
    y0: &[GenNum],
    lo: &GenNum,
    hi: &GenNum,
) -> Result<LinearReport, SolveError> {
    let d = a.len();
    assert!(d >= 1 && d <= 4, "linear solver supports d <= 4");
    for row in a {
        assert_eq!(row.len(), d);
    }
    let ctx = t0.ctx().clone();

    // Antiderivative trees B(t) = int_{t0}^t A.
    let b_entries: Vec<Gsf> = a
        .iter()
        .flat_map(|row| row.iter().map(|e| antiderivative(e, t0)))
        .collect();

    // Hypothesis |int A| <= -C log drho at sampled times.
    let mut log_c = 0.0f64;
    for i in ctx.tail() {
        let (l, h) = (lo.at(i), hi.at(i));
        for k in 0..=8 {
            let t = l + (h - l) * k as f64 / 8.0;
            let mut frob = 0.0;
            for e in &b_entries {
                let v = e.eval_at(i, &[t]);
                frob += v * v;
            }
            let ratio = frob.sqrt() / ctx.ln_rho(i).abs();
            log_c = log_c.max(ratio);
            if !ratio.is_finite() || ratio > ctx.params().c_max {
                return Err(SolveError::LogHypothesis {
                    eps: ctx.eps(i),
                    ratio,
                });
            }
        }
    }

    // Commutativity of {B(t)} on samples.
    let commuting = if d == 1 {
        true
    } else {
        let i = ctx.len() - 1;
        let (l, h) = (lo.at(i), hi.at(i));
        let sample = |t: f64| {
            let mut m = nalgebra::DMatrix::zeros(d, d);
            for r in 0..d {
                for s in 0..d {
                    m[(r, s)] = b_entries[r * d + s].eval_at(i, &[t]);
                }
            }
            m
        };
        let m1 = sample(l + 0.3 * (h - l));
        let m2 = sample(l + 0.8 * (h - l));
        let comm = &m1 * &m2 - &m2 * &m1;
        let scale = m1.norm() * m2.norm();
        comm.norm() <= 1e-10 * scale.max(1e-30)
    };

    // RK cross-check path: rhs_j = sum_k a_jk(t) y_k.
    let rhs: Vec<Gsf> = (0..d)
        .map(|j| {
            let mut acc = Gsf::zero();
            for (k, e) in a[j].iter().enumerate() {
                acc = acc.add(&e.mul(&Gsf::coord(k + 1)));
            }
            acc
        })
        .collect();
    // Integrate from t0 across [lo, hi]: alpha covers both sides.
    let alpha_fwd = (hi - t0).abs().sup(&(t0 - lo).abs());
    let ivp = Ivp {
        rhs,
        t0: t0.clone(),
        y0: y0.to_vec(),
        alpha: alpha_fwd,
        r: GenNum::constant(&ctx, 1.0),
    };
    let path = rk_path(&ivp, RkOpts::default(), true)?;

    let closed = if commuting {
        Some(ClosedLinear {
            b_entries,
            d,
            y0: y0.to_vec(),
        })
    } else {
        None
    };
    let mut report = LinearReport {
        log_constant: log_c,
        used_closed_form: commuting,
        max_rel_dev: 0.0,
        path,
        closed,
    };
    if commuting {
        let mut dev = 0.0f64;
        for i in ctx.tail() {
            let (l, h) = (lo.at(i), hi.at(i));
            for k in 1..=4 {
                let t = l + (h - l) * k as f64 / 4.0;
                let cf = report.closed_state(i, t).unwrap();
                let mut rk = vec![0.0; d];
                report.path.state_at_idx(i, t, &mut rk);
                for c in 0..d {
                    let scale = cf[c].abs().max(1.0);
                    dev = dev.max((cf[c] - rk[c]).abs() / scale);
                }
            }
        }
        report.max_rel_dev = dev;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct GronwallReport {
    /// False when a hypothesis fails (then nothing is claimed).
    pub applicable: bool,
    pub hypothesis_note: Option<String>,
    /// Bound 1: u <= b + int a b e^{int a}.
    pub bound1_ok: bool,
    /// Bound 2 (b non-decreasing): u <= b e^{int a}.
    pub bound2_ok: Option<bool>,
    pub max_violation: f64,
}

/// Third-order cumulative integral on a uniform grid (parabolic rule; the
/// last step uses the mirrored stencil to keep the order).
fn cumulative_parabolic(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for k in 0..n - 1 {
        let inc = if k + 2 < n {
            h / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2])
        } else {
            h / 12.0 * (-f[k - 1] + 8.0 * f[k] + 5.0 * f[k + 1])
        };
        out[k + 1] = out[k] + inc;
    }
    out
}

/// Verify the integral Gronwall bounds on a dense time sample per eps.
pub fn gronwall_check(u: &Gsf, a: &Gsf, b: &Gsf, alpha: &GenNum) -> GronwallReport {
    let ctx = alpha.ctx().clone();
    let n = 401;
    let slack = 1e-9;
    let mut bound1_ok = true;
    let mut bound2_ok = Some(true);
    let mut max_violation = 0.0f64;
    let mut nondecreasing = true;

    // Hypothesis ||a||_0 * alpha <= N log(drho^-1).
    let zero = GenNum::constant(&ctx, 0.0);
    let bx = match FcBox::scalar(zero.clone(), alpha.clone()) {
        Ok(b) => b,
        Err(e) => {
            return GronwallReport {
                applicable: false,
                hypothesis_note: Some(e),
                bound1_ok: false,
                bound2_ok: None,
                max_violation: f64::NAN,
            }
        }
    };
    let a_sup = gnorm(&[a.clone()], 0, &bx);
    for i in ctx.tail() {
        let ratio = a_sup.at(i) * alpha.at(i) / ctx.ln_rho(i).abs();
        if !ratio.is_finite() || ratio > ctx.params().c_max {
            return GronwallReport {
                applicable: false,
                hypothesis_note: Some(format!(
                    "||a|| alpha exceeds the log bound at eps = {} (ratio {ratio:.3e})",
                    ctx.eps(i)
                )),
                bound1_ok: false,
                bound2_ok: None,
                max_violation: f64::NAN,
            };
        }
    }

    for i in ctx.indices() {
        let al = alpha.at(i);
        let h = al / (n - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let av: Vec<f64> = ts.iter().map(|&t| a.eval_at(i, &[t])).collect();
        let bv: Vec<f64> = ts.iter().map(|&t| b.eval_at(i, &[t])).collect();
        let uv: Vec<f64> = ts.iter().map(|&t| u.eval_at(i, &[t])).collect();
        if av.iter().any(|&v| v < -1e-12) {
            return GronwallReport {
                applicable: false,
                hypothesis_note: Some(format!("a(t) < 0 at eps = {}", ctx.eps(i))),
                bound1_ok: false,
                bound2_ok: None,
                max_violation: f64::NAN,
            };
        }
        // Cumulative E(t) = int_0^t a.
        let e_cum = cumulative_parabolic(h, &av);
        // Hypothesis u <= b + int a u.
        let au: Vec<f64> = av.iter().zip(&uv).map(|(x, y)| x * y).collect();
        let iau = cumulative_parabolic(h, &au);
        for k in 0..n {
            let scale = uv[k].abs().max(bv[k].abs()).max(1.0);
            if uv[k] > bv[k] + iau[k] + 1e-6 * scale {
                return GronwallReport {
                    applicable: false,
                    hypothesis_note: Some(format!(
                        "u <= b + int a u fails at eps = {}, t = {}",
                        ctx.eps(i),
                        ts[k]
                    )),
                    bound1_ok: false,
                    bound2_ok: None,
                    max_violation: f64::NAN,
                };
            }
        }
        for k in 1..n {
            if bv[k] < bv[k - 1] - 1e-14 * bv[k].abs().max(1.0) {
                nondecreasing = false;
            }
        }
        // Bound 1: u(t) <= b(t) + int_0^t a b e^{E(t)-E(s)} ds. The inner
        // integrand only depends on s through a b e^{-E(s)}, so one
        // cumulative suffices.
        let inner: Vec<f64> = (0..n).map(|s| av[s] * bv[s] * (-e_cum[s]).exp()).collect();
        let inner_cum = cumulative_parabolic(h, &inner);
        for k in 0..n {
            let integral = e_cum[k].exp() * inner_cum[k];
            let rhs1 = bv[k] + integral;
            let scale = rhs1.abs().max(1.0);
            if uv[k] > rhs1 + slack * scale {
                bound1_ok = false;
                max_violation = max_violation.max((uv[k] - rhs1) / scale);
            }
            if nondecreasing {
                let rhs2 = bv[k] * e_cum[k].exp();
                if uv[k] > rhs2 + slack * rhs2.abs().max(1.0) {
                    bound2_ok = Some(false);
                    max_violation = max_violation.max((uv[k] - rhs2) / rhs2.abs().max(1.0));
                }
            }
        }
    }
    if !nondecreasing {
        bound2_ok = None;
    }
    GronwallReport {
        applicable: true,
        hypothesis_note: None,
        bound1_ok,
        bound2_ok,
        max_violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{drho, drho_pow, eps_net};

    fn ctx() -> Ctx {
        Ctx::default_identity()
    }

    #[test]
    fn exponential_ivp_per_eps() {
        let c = ctx();
        let ivp = Ivp {
            rhs: vec![Gsf::coord(1)],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 1.0)],
            alpha: GenNum::constant(&c, 1.0),
            r: GenNum::constant(&c, 3.0),
        };
        let path = solve_ivp(&ivp, Method::PerEpsRk(RkOpts::default())).unwrap();
        let y1 = &path.state_at(&GenNum::constant(&c, 1.0))[0];
        for i in c.indices() {
            assert!((y1.at(i) - std::f64::consts::E).abs() < 1e-8);
        }
    }

    #[test]
    fn infinitesimal_domain_ivp() {
        // y' = -t / ((1 + y) h), y(0) = 0, h = drho: the solution
        // y = -1 + sqrt(1 - t^2/h) lives on an infinitesimal interval.
        let c = ctx();
        let h = drho(&c);
        let t = Gsf::coord(0);
        let y = Gsf::coord(1);
        let rhs = t
            .neg()
            .div(&Gsf::one().add(&y).mul(&Gsf::constant(h.clone())));
        let alpha = h.sqrt().scale(0.5);
        let ivp = Ivp {
            rhs: vec![rhs],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 0.0)],
            alpha: alpha.clone(),
            r: GenNum::constant(&c, 0.5),
        };
        let path = solve_ivp(&ivp, Method::PerEpsRk(RkOpts::default())).unwrap();
        // Probe a few times inside |t| <= sqrt(h)/2 per eps.
        for i in c.indices() {
            let hi_val = h.at(i);
            for frac in [-1.0, -0.5, 0.4, 1.0] {
                let tt = frac * alpha.at(i);
                let mut buf = [0.0];
                path.state_at_idx(i, tt, &mut buf);
                let exact = -1.0 + (1.0 - tt * tt / hi_val).sqrt();
                let rel = (buf[0] - exact).abs() / exact.abs().max(1e-3);
                assert!(rel <= 1e-6, "i={i} frac={frac}: {} vs {exact}", buf[0]);
            }
        }
    }

    #[test]
    fn precheck_contraction_cases() {
        let c = ctx();
        // F = y on alpha = 1/2: alpha L = 1/2 < 1.
        let ivp = Ivp {
            rhs: vec![Gsf::coord(1)],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 1.0)],
            alpha: GenNum::constant(&c, 0.5),
            r: GenNum::constant(&c, 2.0),
        };
        let pre = picard_precheck(&ivp);
        assert!(pre.contraction_ok);

        // F = [eps^-1] y with alpha = 1 under the identity gauge: alpha L
        // is infinite.
        let coeff = eps_net(&c).recip().unwrap();
        let ivp2 = Ivp {
            rhs: vec![Gsf::constant(coeff.clone()).mul(&Gsf::coord(1))],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 1.0)],
            alpha: GenNum::constant(&c, 1.0),
            r: GenNum::constant(&c, 1.0),
        };
        let pre2 = picard_precheck(&ivp2);
        assert!(!pre2.contraction_ok);

        // Same coefficient but alpha = drho^2: alpha L infinitesimal.
        let ivp3 = Ivp {
            rhs: vec![Gsf::constant(coeff).mul(&Gsf::coord(1))],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 1.0)],
            alpha: drho_pow(&c, 2.0),
            r: GenNum::constant(&c, 1.0),
        };
        let pre3 = picard_precheck(&ivp3);
        assert!(pre3.contraction_ok);
    }

    #[test]
    fn picard_converges_on_exponential() {
        let c = ctx();
        let ivp = Ivp {
            rhs: vec![Gsf::coord(1)],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![GenNum::constant(&c, 1.0)],
            alpha: GenNum::constant(&c, 0.5),
            r: GenNum::constant(&c, 2.0),
        };
        let run = picard_run(&ivp, 20, 512).unwrap();
        for pi in &run.per_idx {
            // Contraction of consecutive iterates.
            let s = &pi.sup_steps;
            assert!(s[s.len() - 1] < 1e-12, "converged: {:?}", &s[s.len() - 3..]);
            // Final iterate matches e^t at the right end.
            let last = pi.iterates.last().unwrap();
            let yend = last.last().unwrap()[0];
            assert!((yend - 0.5f64.exp()).abs() < 1e-7);
        }
        // Agreement with the RK path (contractive problem).
        let path = solve_ivp(&ivp, Method::PerEpsRk(RkOpts::default())).unwrap();
        let y_rk = &path.state_at(&GenNum::constant(&c, 0.5))[0];
        for i in c.indices() {
            assert!((y_rk.at(i) - 0.5f64.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn gnorm_cases() {
        let c = ctx();
        let bx = FcBox::scalar(
            GenNum::constant(&c, 0.0),
            GenNum::constant(&c, 2.0 * std::f64::consts::PI),
        )
        .unwrap();
        let n = gnorm(&[Gsf::x().sin()], 0, &bx);
        for i in c.indices() {
            assert!((n.at(i) - 1.0).abs() < 1e-9);
        }
        // ||delta||_0 on [-1, 1] is the b net.
        let b = drho_pow(&c, -1.0);
        let delta = crate::gsf::embed_delta(&b).unwrap();
        let bx2 = FcBox::scalar(GenNum::constant(&c, -1.0), GenNum::constant(&c, 1.0)).unwrap();
        let nd = gnorm(&[delta], 0, &bx2);
        for i in c.tail() {
            assert!((nd.at(i) - b.at(i)).abs() <= 1e-6 * b.at(i));
        }
    }

    #[test]
    fn linear_scalar_closed_form() {
        let c = ctx();
        let a = vec![vec![Gsf::literal(0.7)]];
        let t0 = GenNum::constant(&c, 0.0);
        let y0 = vec![GenNum::constant(&c, 2.0)];
        let lo = GenNum::constant(&c, 0.0);
        let hi = GenNum::constant(&c, 1.5);
        let rep = solve_linear(&a, &t0, &y0, &lo, &hi).unwrap();
        assert!(rep.used_closed_form);
        assert!(rep.max_rel_dev < 1e-7, "dev {}", rep.max_rel_dev);
        let v = rep.closed_state(5, 1.5).unwrap();
        assert!((v[0] - 2.0 * (0.7f64 * 1.5).exp()).abs() < 1e-9);
    }

    #[test]
    fn linear_diag_matrix() {
        let c = ctx();
        let a = vec![
            vec![Gsf::literal(1.0), Gsf::zero()],
            vec![Gsf::zero(), Gsf::literal(-1.0)],
        ];
        let t0 = GenNum::constant(&c, 0.0);
        let y0 = vec![GenNum::constant(&c, 1.0), GenNum::constant(&c, 2.0)];
        let lo = GenNum::constant(&c, 0.0);
        let hi = GenNum::constant(&c, 1.0);
        let rep = solve_linear(&a, &t0, &y0, &lo, &hi).unwrap();
        assert!(rep.used_closed_form);
        let v = rep.closed_state(3, 1.0).unwrap();
        assert!((v[0] - std::f64::consts::E).abs() < 1e-9);
        assert!((v[1] - 2.0 / std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn linear_eps_inverse_under_exp_inv_gauge() {
        // y' = [eps^-1] y is moderate under rho = e^{-1/eps}: y(t) = e^{t/eps}.
        let c = Ctx::default_exp_inv();
        let coeff = eps_net(&c).recip().unwrap();
        let a = vec![vec![Gsf::constant(coeff)]];
        let t0 = GenNum::constant(&c, 0.0);
        let y0 = vec![GenNum::constant(&c, 1.0)];
        let lo = GenNum::constant(&c, 0.0);
        let hi = GenNum::constant(&c, 1.0);
        let rep = solve_linear(&a, &t0, &y0, &lo, &hi).unwrap();
        assert!(rep.used_closed_form);
        let y1 = GenNum::from_indexed(&c, {
            let rep = std::sync::Arc::new(rep);
            move |i, _| rep.closed_state(i, 1.0).unwrap()[0]
        });
        let cl = classify(&y1, 12);
        assert_eq!(cl.label, AsymptoticLabel::Infinite);
        for i in c.indices() {
            let exact = (1.0 / c.eps(i)).exp();
            assert!((y1.at(i) - exact).abs() <= 1e-9 * exact);
        }
    }

    #[test]
    fn gronwall_saturating_and_strict() {
        let c = ctx();
        let alpha = GenNum::constant(&c, 1.0);
        // u = e^t, a = 1, b = 1: equality case.
        let rep = gronwall_check(&Gsf::x().exp(), &Gsf::one(), &Gsf::one(), &alpha);
        assert!(rep.applicable);
        assert!(rep.bound1_ok, "violation {:.3e}", rep.max_violation);
        assert_eq!(rep.bound2_ok, Some(true));

        // u = 2 e^t - 1 solves u' = u + 1; hypothesis holds with b = 1 + t.
        let u = Gsf::x().exp().scale(2.0).sub(&Gsf::one());
        let b = Gsf::one().add(&Gsf::x());
        let rep = gronwall_check(&u, &Gsf::one(), &b, &alpha);
        assert!(rep.applicable && rep.bound1_ok);
        assert_eq!(rep.bound2_ok, Some(true));

        // a with an infinite sup violates the log hypothesis.
        let a_inf = Gsf::constant(drho_pow(&c, -2.0));
        let rep = gronwall_check(&Gsf::x().exp(), &a_inf, &Gsf::one(), &alpha);
        assert!(!rep.applicable);
    }

    #[test]
    fn continuous_dependence_at_drho_scale() {
        // Perturbing y0 by drho^m changes y(t) by e^{L alpha} drho^m order.
        let c = ctx();
        let mk = |y0: GenNum| Ivp {
            rhs: vec![Gsf::coord(1)],
            t0: GenNum::constant(&c, 0.0),
            y0: vec![y0],
            alpha: GenNum::constant(&c, 1.0),
            r: GenNum::constant(&c, 3.0),
        };
        let base = solve_ivp(&mk(GenNum::constant(&c, 1.0)), Method::PerEpsRk(RkOpts::default()))
            .unwrap();
        let pert = solve_ivp(
            &mk(&GenNum::constant(&c, 1.0) + &drho(&c)),
            Method::PerEpsRk(RkOpts::default()),
        )
        .unwrap();
        let t1 = GenNum::constant(&c, 1.0);
        let diff = &pert.state_at(&t1)[0] - &base.state_at(&t1)[0];
        let cl = classify(&diff, 12);
        assert!((cl.order - 1.0).abs() < 0.1, "order {}", cl.order);
        // Magnitude bounded by the Gronwall factor e^{L alpha} drho.
        for i in c.indices() {
            assert!(diff.at(i).abs() <= std::f64::consts::E * c.rho(i) * 1.01 + 1e-9);
        }
    }
}
