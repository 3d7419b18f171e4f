//! eps-wise integration, antiderivatives and incremental ratios.

use rayon::prelude::*;

use crate::error::{QuadError, RingError};
use crate::ring::{is_invertible, GenNum};
use crate::util::quad::{adaptive, QuadOpts};

use super::expr::{Gsf, Node};
use super::features::integration_breaks;
use super::{FcBox, GPoint};

/// Relative tolerance of the eps-wise quadratures.
pub const TOL_INT: f64 = 1e-10;

fn quad_opts(eps: f64, rel: f64) -> QuadOpts {
    QuadOpts {
        rel_tol: rel,
        abs_tol: 1e-280,
        max_depth: 60,
        eps,
    }
}

/// `int_a^b f` per eps with feature-aware subdivision. Reversed bounds flip
/// the sign.
pub fn integrate_1d(f: &Gsf, a: &GenNum, b: &GenNum) -> Result<GenNum, QuadError> {
    let ctx = a.ctx().clone();
    let vals: Result<Vec<f64>, QuadError> = ctx
        .indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let (lo, hi) = (a.at(i), b.at(i));
            let breaks = integration_breaks(f, 0, i, &[0.0], lo.min(hi), lo.max(hi));
            let g = |s: f64| f.eval_at(i, &[s]);
            adaptive(&g, lo, hi, &breaks, quad_opts(ctx.eps(i), TOL_INT)).map(|(v, _)| v)
        })
        .collect();
    Ok(GenNum::from_values(&ctx, vals?))
}

/// The unique primitive with value 0 at `c`, as an expression tree whose
/// derivative rule gives back `f` exactly.
pub fn antiderivative(f: &Gsf, c: &GenNum) -> Gsf {
    Gsf::from_node(Node::AntiDeriv {
        f: f.clone(),
        c: c.clone(),
        arg: Gsf::x(),
    })
}

/// Scalar value of `int_c^hi f` at one grid index (used by tree evaluation).
pub(crate) fn antideriv_value(f: &Gsf, c: f64, hi: f64, i: usize) -> f64 {
    let breaks = integration_breaks(f, 0, i, &[0.0], c.min(hi), c.max(hi));
    let g = |s: f64| f.eval_at(i, &[s]);
    adaptive(&g, c, hi, &breaks, quad_opts(f64::NAN, TOL_INT))
        .map(|(v, _)| v)
        .unwrap_or(f64::NAN)
}

/// Iterated integral over a coordinate box (dimension <= 3).
pub fn integrate_box(f: &Gsf, bx: &FcBox) -> Result<GenNum, QuadError> {
    let dim = bx.dim();
    assert!(dim >= 1 && dim <= 3, "box integration supports dims 1..=3");
    let ctx = bx.lo.ctx().clone();
    let vals: Result<Vec<f64>, QuadError> = ctx
        .indices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&i| {
            let lo: Vec<f64> = (0..dim).map(|k| bx.lo.coord(k).at(i)).collect();
            let hi: Vec<f64> = (0..dim).map(|k| bx.hi.coord(k).at(i)).collect();
            let mut frame = vec![0.0; dim];
            nested_integral(f, i, ctx.eps(i), &lo, &hi, 0, &mut frame)
        })
        .collect();
    Ok(GenNum::from_values(&ctx, vals?))
}

fn nested_integral(
    f: &Gsf,
    i: usize,
    eps: f64,
    lo: &[f64],
    hi: &[f64],
    axis: usize,
    frame: &mut Vec<f64>,
) -> Result<f64, QuadError> {
    let last = axis == lo.len() - 1;
    let breaks = integration_breaks(f, axis, i, frame, lo[axis], hi[axis]);
    // Outer axes get slightly looser tolerance than the innermost.
    let rel = if last { TOL_INT } else { TOL_INT * 10.0 };
    let mut err: Option<QuadError> = None;
    let g = |s: f64| {
        let mut frame2 = frame.clone();
        frame2[axis] = s;
        if last {
            f.eval_at(i, &frame2)
        } else {
            match nested_integral(f, i, eps, lo, hi, axis + 1, &mut frame2) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }
        }
    };
    let out = adaptive(&g, lo[axis], hi[axis], &breaks, quad_opts(eps, rel)).map(|(v, _)| v);
    if let Some(e) = err.take() {
        return Err(e);
    }
    out
}

/// `(f(x + h v) - f(x)) / h`; `h` must be invertible.
pub fn incremental_ratio(
    f: &Gsf,
    x: &GPoint,
    h: &GenNum,
    v: &GPoint,
) -> Result<GenNum, RingError> {
    if !is_invertible(h).invertible {
        return Err(RingError::NotInvertible);
    }
    let ctx = h.ctx().clone();
    let f = f.clone();
    let (x, v, h) = (x.clone(), v.clone(), h.clone());
    Ok(GenNum::from_indexed(&ctx, move |i, _| {
        let hi = h.at(i);
        let base: Vec<f64> = (0..x.dim()).map(|k| x.coord(k).at(i)).collect();
        let shifted: Vec<f64> = (0..x.dim())
            .map(|k| base[k] + hi * v.coord(k).at(i))
            .collect();
        (f.eval_at(i, &shifted) - f.eval_at(i, &base)) / hi
    }))
}
