//! Embeddings of model distributions and locally integrable functions.
//!
//! The embeddings evaluate as the paper-style regularizations: delta is
//! `b mu(b x) chi(x |log b|)`, the Heaviside function is the exact
//! cumulative of the mollifier kernel (so `H(0) = 1/2` exactly and
//! `H' = delta` by the tree's derivative rule), and the principal value is
//! the convolution kernel with far-field value exactly `1/x`. Sampled
//! functions go through an eps-indexed convolution table with
//! mollifier-scale patches around declared jumps.

use std::sync::{Arc, OnceLock};

use crate::error::BuildError;
use crate::mollifier::standard_mollifier;
use crate::ring::{classify, AsymptoticLabel, Ctx, GenNum};
use crate::util::quad::gauss_legendre;
use crate::util::spline::CubicSpline;

use super::expr::{Gsf, MollKind, Node};

/// Verify `b` is an infinite positive number with a power-law witness
/// `b >= drho^{-a}`; returns the witness exponent.
pub fn require_infinite_b(b: &GenNum) -> Result<f64, BuildError> {
    let cl = classify(b, b.ctx().params().n_max);
    if cl.label != AsymptoticLabel::Infinite || cl.order >= -0.01 {
        return Err(BuildError::BNotInfinite {
            detail: format!("classify gave {:?} with order {:.3}", cl.label, cl.order),
        });
    }
    if b.values().iter().any(|&v| v <= 0.0) {
        return Err(BuildError::BNotInfinite {
            detail: "b has non-positive samples".into(),
        });
    }
    Ok(-cl.order)
}

/// `delta(x) = b mu(b x) chi(x |log b|)`. The cutoff factor transitions only
/// where the truncated mu already vanishes, so derivative rules stay exact.
pub fn embed_delta(b: &GenNum) -> Result<Gsf, BuildError> {
    require_infinite_b(b)?;
    let bb = Gsf::constant(b.clone());
    let lnb = Gsf::constant(b.map(|v| v.ln().abs()));
    let x = Gsf::x();
    Ok(bb
        .mul(&Gsf::moll(MollKind::Mu, 0, bb.mul(&x)))
        .mul(&Gsf::moll(MollKind::Chi, 0, x.mul(&lnb))))
}

/// `H(x) = M(b x)` with `M` the cumulative mollifier; exact antiderivative
/// of the delta kernel from below.
pub fn embed_heaviside(b: &GenNum) -> Result<Gsf, BuildError> {
    require_infinite_b(b)?;
    let bb = Gsf::constant(b.clone());
    Ok(Gsf::moll(MollKind::MuCum, 0, bb.mul(&Gsf::x())))
}

/// Monotone smooth Heaviside variant: a plateau-blend ramp on `[-1/b, 1/b]`
/// with no mollifier oscillations and exactly constant tails.
pub fn smoothstep_heaviside(b: &GenNum) -> Result<Gsf, BuildError> {
    require_infinite_b(b)?;
    let bb = Gsf::constant(b.clone());
    Ok(Gsf::moll(MollKind::Ramp, 0, bb.mul(&Gsf::x())))
}

/// Principal value of `1/x`: `b w(b x)` with the far field exactly `1/x`.
pub fn embed_vp(b: &GenNum) -> Result<Gsf, BuildError> {
    require_infinite_b(b)?;
    let bb = Gsf::constant(b.clone());
    Ok(bb.mul(&Gsf::moll(MollKind::Vp, 0, bb.mul(&Gsf::x()))))
}

/// eps-indexed convolution table of a locally integrable sample function.
pub struct EmbeddedFn {
    g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    window: (f64, f64),
    b: GenNum,
    singular: Vec<f64>,
    patch_width: GenNum,
    tables: Vec<[OnceLock<CubicSpline>; 3]>,
    gl: (Vec<f64>, Vec<f64>),
}

impl EmbeddedFn {
    pub fn singular_points(&self) -> &[f64] {
        &self.singular
    }

    pub fn patch_width_net(&self) -> GenNum {
        self.patch_width.clone()
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Direct quadrature of the convolution `b^o int g(x - u/b) mu^(o)(u) du`
    /// over the kernel support; the reference the tables are built from.
    pub fn convolve_direct(&self, i: usize, order: usize, x: f64) -> f64 {
        let m = standard_mollifier();
        let bi = self.b.at(i);
        let r = m.radius();
        let (nodes, weights) = &self.gl;
        let panels = (2.0 * r).ceil() as usize;
        let h = 2.0 * r / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = -r + p as f64 * h;
            let c = lo + 0.5 * h;
            for (t, w) in nodes.iter().zip(weights) {
                let u = c + 0.5 * h * t;
                acc += 0.5 * h * w * (self.g)(x - u / bi) * m.eval(order, u);
            }
        }
        acc * bi.powi(order as i32)
    }

    fn knots(&self, i: usize) -> Vec<f64> {
        let (w0, w1) = self.window;
        let base = 257;
        let mut xs: Vec<f64> = (0..base)
            .map(|k| w0 + (w1 - w0) * k as f64 / (base - 1) as f64)
            .collect();
        let pw = self.patch_width.at(i);
        for &s in &self.singular {
            for k in 0..129 {
                let x = s - pw + 2.0 * pw * k as f64 / 128.0;
                if x > w0 && x < w1 {
                    xs.push(x);
                }
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
        xs
    }

    pub fn eval(&self, i: usize, order: usize, x: f64) -> f64 {
        if order > 2 {
            return f64::NAN;
        }
        let (w0, w1) = self.window;
        if x < w0 || x > w1 {
            return f64::NAN;
        }
        let spline = self.tables[i][order].get_or_init(|| {
            let xs = self.knots(i);
            let ys: Vec<f64> = xs
                .iter()
                .map(|&t| self.convolve_direct(i, order, t))
                .collect();
            CubicSpline::new(xs, ys)
        });
        spline.eval(x, 0)
    }
}

/// Options for `embed_function`.
pub struct EmbedOpts {
    pub window: (f64, f64),
    /// Declared jump locations of the sample function (drives patch
    /// refinement).
    pub singular_points: Vec<f64>,
    /// Verify smooth-compatibility `|conv - g| <= b^-2` at build time.
    pub verify_smooth: bool,
}

/// Embed a locally integrable function by per-eps convolution with the
/// scaled mollifier, evaluated through a dense table with smooth
/// interpolation.
pub fn embed_function(
    ctx: &Ctx,
    g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    b: &GenNum,
    opts: EmbedOpts,
) -> Result<Gsf, BuildError> {
    require_infinite_b(b)?;
    let m = standard_mollifier();
    let (w0, w1) = opts.window;
    if !(w1 > w0) {
        return Err(BuildError::Other("empty embedding window".into()));
    }
    // The finest-eps patch must stay representable around its center.
    let b_max = b.at(ctx.len() - 1);
    let pw_min = (m.radius() + 2.0) / b_max;
    for &s in &opts.singular_points {
        let cap = 64.0 * f64::EPSILON * s.abs().max(1.0);
        if pw_min < cap {
            return Err(BuildError::InsufficientDensity {
                eps: ctx.eps(ctx.len() - 1),
                needed: (1.0 / pw_min) as usize,
                cap: (1.0 / cap) as usize,
            });
        }
    }
    let patch_width = b.map({
        let r = m.radius() + 2.0;
        move |v| r / v
    });
    let table = EmbeddedFn {
        g: Box::new(g),
        window: opts.window,
        b: b.clone(),
        singular: opts.singular_points,
        patch_width,
        tables: (0..ctx.len()).map(|_| Default::default()).collect(),
        gl: gauss_legendre(16),
    };
    if opts.verify_smooth {
        // Smooth-compatibility bound at sample interior points: the
        // convolution agrees with g within b^-2 (plus an f64 floor).
        for i in [ctx.len() / 2, ctx.len() - 1] {
            let bi = table.b.at(i);
            let tol = bi.powi(-2) + 1e-12;
            for k in 1..=5 {
                let x = w0 + (w1 - w0) * k as f64 / 6.0;
                if table
                    .singular
                    .iter()
                    .any(|s| (x - s).abs() < 2.0 * table.patch_width.at(i))
                {
                    continue;
                }
                let conv = table.convolve_direct(i, 0, x);
                let direct = (table.g)(x);
                if (conv - direct).abs() > tol * direct.abs().max(1.0) {
                    return Err(BuildError::Other(format!(
                        "embedding accuracy check failed at eps={} x={x}: |conv-g|={:.3e} > {:.3e}",
                        ctx.eps(i),
                        (conv - direct).abs(),
                        tol
                    )));
                }
            }
        }
    }
    Ok(Gsf::from_node(Node::EmbedFn {
        table: Arc::new(table),
        order: 0,
        arg: Gsf::x(),
    }))
}
