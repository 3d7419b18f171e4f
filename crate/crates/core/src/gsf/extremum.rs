//! eps-wise global search on boxes (dense sampling aware of kernel scale,
//! then local polish) and intermediate-value root solving.

use rayon::prelude::*;

use crate::error::SolveError;
use crate::ring::GenNum;

use super::features::refinement_windows;
use super::{FcBox, GPoint, Gsf};

pub struct Extremum {
    pub min: GenNum,
    pub max: GenNum,
    pub argmin: GPoint,
    pub argmax: GPoint,
}

/// Candidate coordinates along one axis: uniform plus feature refinement.
fn axis_samples(f: &Gsf, var: usize, i: usize, frame: &[f64], lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    for (c, w) in refinement_windows(f, var, i, frame) {
        if c + w < lo || c - w > hi {
            continue;
        }
        for k in 0..65 {
            let x = c - w + 2.0 * w * k as f64 / 64.0;
            if x >= lo && x <= hi {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

fn golden_polish(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, maximize: bool) -> (f64, f64) {
    let phi = 0.618_033_988_749_895;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..80 {
        let pick_c = if maximize { fc > fd } else { fc < fd };
        if pick_c {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = g(d);
        }
        if (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1e-6) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}

/// Attained min and max of a scalar function on a box (dims 1 or 2), with
/// witnesses.
pub fn extremum(f: &Gsf, bx: &FcBox) -> Extremum {
    let dim = bx.dim();
    assert!(dim == 1 || dim == 2, "extremum supports dims 1 and 2");
    let ctx = bx.lo.ctx().clone();
    let idx: Vec<usize> = ctx.indices().collect();
    let per: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = idx
        .par_iter()
        .map(|&i| {
            let lo: Vec<f64> = (0..dim).map(|k| bx.lo.coord(k).at(i)).collect();
            let hi: Vec<f64> = (0..dim).map(|k| bx.hi.coord(k).at(i)).collect();
            if dim == 1 {
                let xs = axis_samples(f, 0, i, &[0.0], lo[0], hi[0], 801);
                let g = |x: f64| f.eval_at(i, &[x]);
                let mut best_min = (f64::INFINITY, lo[0]);
                let mut best_max = (f64::NEG_INFINITY, lo[0]);
                for (k, &x) in xs.iter().enumerate() {
                    let v = g(x);
                    if v < best_min.0 {
                        best_min = (v, x);
                        let _ = k;
                    }
                    if v > best_max.0 {
                        best_max = (v, x);
                    }
                }
                // Local polish around each winner.
                let polish = |center: f64, maximize: bool, current: (f64, f64)| {
                    let j = xs.partition_point(|&x| x < center).min(xs.len() - 1);
                    let a = if j > 0 { xs[j - 1] } else { xs[0] };
                    let b = if j + 1 < xs.len() { xs[j + 1] } else { xs[xs.len() - 1] };
                    if b > a {
                        let (x, v) = golden_polish(&g, a, b, maximize);
                        let better = if maximize { v > current.0 } else { v < current.0 };
                        if better {
                            return (v, x);
                        }
                    }
                    current
                };
                best_min = polish(best_min.1, false, (best_min.0, best_min.1));
                best_max = polish(best_max.1, true, (best_max.0, best_max.1));
                (best_min.0, best_max.0, vec![best_min.1], vec![best_max.1])
            } else {
                let xs = axis_samples(f, 0, i, &[0.0, 0.0], lo[0], hi[0], 97);
                let ys = axis_samples(f, 1, i, &[0.0, 0.0], lo[1], hi[1], 97);
                let mut best_min = (f64::INFINITY, lo[0], lo[1]);
                let mut best_max = (f64::NEG_INFINITY, lo[0], lo[1]);
                for &x in &xs {
                    for &y in &ys {
                        let v = f.eval_at(i, &[x, y]);
                        if v < best_min.0 {
                            best_min = (v, x, y);
                        }
                        if v > best_max.0 {
                            best_max = (v, x, y);
                        }
                    }
                }
                // Coordinate polish.
                let polish = |seed: (f64, f64, f64), maximize: bool| {
                    let mut p = seed;
                    for _ in 0..3 {
                        let gx = |x: f64| f.eval_at(i, &[x, p.2]);
                        let (x, _) = golden_polish(
                            &gx,
                            (p.1 - (hi[0] - lo[0]) / 96.0).max(lo[0]),
                            (p.1 + (hi[0] - lo[0]) / 96.0).min(hi[0]),
                            maximize,
                        );
                        p.1 = x;
                        let gy = |y: f64| f.eval_at(i, &[p.1, y]);
                        let (y, v) = golden_polish(
                            &gy,
                            (p.2 - (hi[1] - lo[1]) / 96.0).max(lo[1]),
                            (p.2 + (hi[1] - lo[1]) / 96.0).min(hi[1]),
                            maximize,
                        );
                        p.2 = y;
                        p.0 = v;
                    }
                    p
                };
                let pm = polish(best_min, false);
                if pm.0 < best_min.0 {
                    best_min = pm;
                }
                let px = polish(best_max, true);
                if px.0 > best_max.0 {
                    best_max = px;
                }
                (
                    best_min.0,
                    best_max.0,
                    vec![best_min.1, best_min.2],
                    vec![best_max.1, best_max.2],
                )
            }
        })
        .collect();

    let min = GenNum::from_values(&ctx, per.iter().map(|p| p.0).collect());
    let max = GenNum::from_values(&ctx, per.iter().map(|p| p.1).collect());
    let argmin = GPoint::new(
        (0..dim)
            .map(|k| GenNum::from_values(&ctx, per.iter().map(|p| p.2[k]).collect()))
            .collect(),
    );
    let argmax = GPoint::new(
        (0..dim)
            .map(|k| GenNum::from_values(&ctx, per.iter().map(|p| p.3[k]).collect()))
            .collect(),
    );
    Extremum {
        min,
        max,
        argmin,
        argmax,
    }
}

/// Intermediate-value solver: eps-wise bisection of `f(c) = y` on `[a, b]`.
/// The representative may be discontinuous in eps.
pub fn solve_scalar(
    f: &Gsf,
    y: &GenNum,
    a: &GenNum,
    b: &GenNum,
) -> Result<GenNum, SolveError> {
    let ctx = y.ctx().clone();
    let tol_root = 1e-12;
    let idx: Vec<usize> = ctx.indices().collect();
    let roots: Result<Vec<f64>, SolveError> = idx
        .par_iter()
        .map(|&i| {
            let target = y.at(i);
            let mut lo = a.at(i);
            let mut hi = b.at(i);
            let g = |x: f64| f.eval_at(i, &[x]) - target;
            let mut glo = g(lo);
            let ghi = g(hi);
            let scale = target.abs().max(1.0);
            if glo == 0.0 {
                return Ok(lo);
            }
            if ghi == 0.0 {
                return Ok(hi);
            }
            if glo.signum() == ghi.signum() {
                // Allow a sub-resolution slack before declaring violation.
                if glo.abs() <= tol_root * scale {
                    return Ok(lo);
                }
                if ghi.abs() <= tol_root * scale {
                    return Ok(hi);
                }
                return Err(SolveError::BracketViolation {
                    eps: ctx.eps(i),
                    fa: glo,
                    fb: ghi,
                });
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm.abs() <= tol_root * scale || (hi - lo).abs() < f64::EPSILON * (lo.abs() + hi.abs() + 1e-300)
                {
                    return Ok(mid);
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect();
    Ok(GenNum::from_values(&ctx, roots?))
}
