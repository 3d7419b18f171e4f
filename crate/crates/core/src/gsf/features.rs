//! Feature registry: where mollifier-scale kernels are active. Integrators
//! and samplers force resolution there, because adaptive control alone can
//! step over spikes of width `1/b_eps`.

use super::expr::{Gsf, MollKind, Node};
use crate::ring::GenNum;

#[derive(Clone)]
pub enum SupportWidth {
    Fixed(f64),
    /// Width net indexed by the grid (e.g. kernel radius over `b_eps`).
    PerIdx(GenNum),
}

/// A kernel window: the feature is active where `|arg| <= support`.
#[derive(Clone)]
pub struct Feature {
    pub arg: Gsf,
    pub support: SupportWidth,
}

impl Feature {
    pub fn support_at(&self, i: usize) -> f64 {
        match &self.support {
            SupportWidth::Fixed(w) => *w,
            SupportWidth::PerIdx(net) => net.at(i),
        }
    }
}

fn kind_support(kind: MollKind) -> f64 {
    let m = crate::mollifier::standard_mollifier();
    match kind {
        MollKind::Mu | MollKind::MuCum => m.radius(),
        MollKind::Chi => 2.0,
        MollKind::Ramp => 1.0,
        MollKind::Vp => m.radius() + 2.0,
    }
}

pub fn collect_features(g: &Gsf, out: &mut Vec<Feature>) {
    match &*g.node {
        Node::Lit(_) | Node::Const(_) | Node::Coord(_) => {}
        Node::Sum(v) | Node::Prod(v) => {
            for p in v {
                collect_features(p, out);
            }
        }
        Node::Quot(a, b) => {
            collect_features(a, out);
            collect_features(b, out);
        }
        Node::Prim(_, inner) => collect_features(inner, out),
        Node::Moll { kind, arg, .. } => {
            out.push(Feature {
                arg: arg.clone(),
                support: SupportWidth::Fixed(kind_support(*kind)),
            });
            collect_features(arg, out);
        }
        Node::EmbedFn { table, arg, .. } => {
            for &s in table.singular_points() {
                out.push(Feature {
                    arg: arg.sub(&Gsf::literal(s)),
                    support: SupportWidth::PerIdx(table.patch_width_net()),
                });
            }
            collect_features(arg, out);
        }
        Node::AntiDeriv { arg, .. } => collect_features(arg, out),
        Node::Subst { f, args } => {
            let mut inner = Vec::new();
            collect_features(f, &mut inner);
            for ft in inner {
                out.push(Feature {
                    arg: ft.arg.compose(args.clone()),
                    support: ft.support,
                });
            }
            for a in args {
                collect_features(a, out);
            }
        }
    }
}

pub fn features_of(g: &Gsf) -> Vec<Feature> {
    let mut out = Vec::new();
    collect_features(g, &mut out);
    out
}

/// Structural affine decomposition in coordinate `var`: returns `(slope,
/// intercept)` trees not depending on `var`, when the expression is affine.
pub fn affine_in(g: &Gsf, var: usize) -> Option<(Gsf, Gsf)> {
    if !g.depends_on(var) {
        return Some((Gsf::zero(), g.clone()));
    }
    match &*g.node {
        Node::Coord(v) if *v == var => Some((Gsf::one(), Gsf::zero())),
        Node::Sum(v) => {
            let mut slope = Gsf::zero();
            let mut icept = Gsf::zero();
            for p in v {
                let (a, c) = affine_in(p, var)?;
                slope = slope.add(&a);
                icept = icept.add(&c);
            }
            Some((slope, icept))
        }
        Node::Prod(v) => {
            let mut rest = Gsf::one();
            let mut dep: Option<&Gsf> = None;
            for p in v {
                if p.depends_on(var) {
                    if dep.is_some() {
                        return None;
                    }
                    dep = Some(p);
                } else {
                    rest = rest.mul(p);
                }
            }
            let (a, c) = affine_in(dep?, var)?;
            Some((rest.mul(&a), rest.mul(&c)))
        }
        Node::Quot(a, b) => {
            if b.depends_on(var) {
                return None;
            }
            let (sa, sc) = affine_in(a, var)?;
            Some((sa.div(b), sc.div(b)))
        }
        _ => None,
    }
}

/// Forced panel boundaries for integrating `f` in coordinate `var` over
/// `[lo, hi]` at grid index `i`. `frame` supplies the other coordinates.
pub fn integration_breaks(
    f: &Gsf,
    var: usize,
    i: usize,
    frame: &[f64],
    lo: f64,
    hi: f64,
) -> Vec<f64> {
    let mut breaks = Vec::new();
    for ft in features_of(f) {
        if let Some((slope, icept)) = affine_in(&ft.arg, var) {
            let a = slope.eval_at(i, frame);
            if a == 0.0 || !a.is_finite() {
                continue;
            }
            let c = icept.eval_at(i, frame);
            let x0 = -c / a;
            let w = ft.support_at(i) / a.abs();
            for t in [-1.0, -0.25, 0.0, 0.25, 1.0] {
                let p = x0 + t * w;
                if p > lo && p < hi {
                    breaks.push(p);
                }
            }
        }
    }
    breaks
}

/// Refinement windows (center, half-width) for sampling-based search.
pub fn refinement_windows(f: &Gsf, var: usize, i: usize, frame: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for ft in features_of(f) {
        if let Some((slope, icept)) = affine_in(&ft.arg, var) {
            let a = slope.eval_at(i, frame);
            if a == 0.0 || !a.is_finite() {
                continue;
            }
            let c = icept.eval_at(i, frame);
            out.push((-c / a, ft.support_at(i) / a.abs()));
        }
    }
    out
}
