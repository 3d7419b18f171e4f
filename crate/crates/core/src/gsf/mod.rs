//! Generalized smooth functions: expression trees over eps-parametrized
//! primitives, with evaluation at generalized points, exact derivatives,
//! distribution embeddings, integration, extrema and root solving.

mod calculus;
mod derive;
mod embed;
mod expr;
mod features;
mod extremum;

pub use calculus::{antiderivative, incremental_ratio, integrate_1d, integrate_box, TOL_INT};
pub use derive::{derive, derive_along, derive_multi};
pub use embed::{
    embed_delta, embed_function, embed_heaviside, embed_vp, require_infinite_b,
    smoothstep_heaviside, EmbedOpts, EmbeddedFn,
};
pub use expr::{Gsf, MollKind, Prim};
pub use extremum::{extremum, solve_scalar, Extremum};
pub use features::{affine_in, features_of, integration_breaks, refinement_windows, Feature};

use crate::error::EvalError;
use crate::ring::{classify, Ctx, GenNum};

/// A point of the generalized n-space: one generalized number per
/// coordinate, sharing grid and gauge.
#[derive(Clone)]
pub struct GPoint {
    coords: Vec<GenNum>,
}

impl GPoint {
    pub fn new(coords: Vec<GenNum>) -> Self {
        assert!(!coords.is_empty());
        for w in coords.windows(2) {
            assert!(w[0].ctx().same(w[1].ctx()), "GPoint coords must share ctx");
        }
        GPoint { coords }
    }

    pub fn scalar(x: GenNum) -> Self {
        GPoint { coords: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn ctx(&self) -> &Ctx {
        self.coords[0].ctx()
    }

    pub fn coord(&self, k: usize) -> &GenNum {
        &self.coords[k]
    }

    pub fn at(&self, i: usize) -> Vec<f64> {
        self.coords.iter().map(|c| c.at(i)).collect()
    }
}

/// A functionally compact coordinate box `prod [lo_i, hi_i]`: per-eps
/// nonempty and sharply bounded.
#[derive(Clone)]
pub struct FcBox {
    pub lo: GPoint,
    pub hi: GPoint,
}

impl FcBox {
    pub fn new(lo: GPoint, hi: GPoint) -> Result<Self, String> {
        assert_eq!(lo.dim(), hi.dim());
        let ctx = lo.ctx().clone();
        for k in 0..lo.dim() {
            for i in ctx.indices() {
                if !(lo.coord(k).at(i) <= hi.coord(k).at(i)) {
                    return Err(format!(
                        "empty box: lo > hi in coordinate {k} at eps = {}",
                        ctx.eps(i)
                    ));
                }
            }
            let bound = lo.coord(k).abs().sup(&hi.coord(k).abs());
            let cl = classify(&bound, ctx.params().n_max);
            if cl.non_moderate_suspected {
                return Err(format!("box is not sharply bounded in coordinate {k}"));
            }
        }
        Ok(FcBox { lo, hi })
    }

    pub fn scalar(lo: GenNum, hi: GenNum) -> Result<Self, String> {
        FcBox::new(GPoint::scalar(lo), GPoint::scalar(hi))
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }
}

/// Lazy eps-wise evaluation: `f([x_eps]) = [f_eps(x_eps)]`. Domain
/// violations surface as NaN under classification; use `eval_checked` for
/// eager errors naming the eps.
pub fn eval(f: &Gsf, x: &GPoint) -> GenNum {
    let f = f.clone();
    let ctx = x.ctx().clone();
    let x = x.clone();
    GenNum::from_indexed(&ctx, move |i, _| {
        let coords = x.at(i);
        f.eval_at(i, &coords)
    })
}

pub fn eval_checked(f: &Gsf, x: &GPoint) -> Result<GenNum, EvalError> {
    let ctx = x.ctx().clone();
    let mut vals = Vec::with_capacity(ctx.len());
    for i in ctx.indices() {
        let coords = x.at(i);
        vals.push(f.eval_at_checked(i, ctx.eps(i), &coords)?);
    }
    Ok(GenNum::from_values(&ctx, vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{drho, drho_pow, leq, lt, AsymptoticLabel, GenNum};

    fn ctx() -> Ctx {
        Ctx::default_identity()
    }

    fn gp(ctx: &Ctx, v: f64) -> GPoint {
        GPoint::scalar(GenNum::constant(ctx, v))
    }

    #[test]
    fn smooth_eval_and_derive() {
        let c = ctx();
        let f = Gsf::x().sin().mul(&Gsf::x().exp());
        let df = derive(&f, 0);
        let x = 0.7f64;
        let expect = x.cos() * x.exp() + x.sin() * x.exp();
        let got = eval(&df, &gp(&c, x));
        for i in c.indices() {
            assert!((got.at(i) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_at_one_is_e() {
        let c = ctx();
        let f = Gsf::x().exp();
        let v = eval(&f, &gp(&c, 1.0));
        for i in c.indices() {
            assert_eq!(v.at(i), std::f64::consts::E);
        }
    }

    #[test]
    fn delta_at_zero_is_b() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let v = eval(&delta, &gp(&c, 0.0));
        for i in c.indices() {
            let rel = (v.at(i) - b.at(i)).abs() / b.at(i);
            assert!(rel <= 1e-9, "idx {i}: rel {rel}");
        }
        let cl = classify(&v, 12);
        assert_eq!(cl.label, AsymptoticLabel::Infinite);
        assert!((cl.order + 1.0).abs() < 0.05);
    }

    #[test]
    fn heaviside_values() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let h = embed_heaviside(&b).unwrap();
        let at0 = eval(&h, &gp(&c, 0.0));
        for i in c.indices() {
            assert!((at0.at(i) - 0.5).abs() <= 1e-9);
        }
        // Far-field values on the asymptotic tail.
        let pos = eval(&h, &gp(&c, 0.3));
        let neg = eval(&h, &gp(&c, -0.4));
        for i in c.tail() {
            assert!((pos.at(i) - 1.0).abs() <= 1e-8, "H(0.3) at {i}: {}", pos.at(i));
            assert!(neg.at(i).abs() <= 1e-8);
        }
    }

    #[test]
    fn delta_vanishes_at_integer_multiples_over_b() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        for k in 1..=5 {
            let x = GPoint::scalar(
                GenNum::constant(&c, k as f64).try_div(&b).unwrap(),
            );
            let v = eval(&delta, &x);
            for i in c.indices() {
                assert!(v.at(i).abs() <= 1e-8, "k={k} idx={i} got {}", v.at(i));
            }
        }
    }

    #[test]
    fn derive_heaviside_is_delta() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let h = embed_heaviside(&b).unwrap();
        let dh = derive(&h, 0);
        let delta = embed_delta(&b).unwrap();
        // Pointwise agreement on the tail at spread-out points.
        for &x in &[-2.0, -0.5, -0.01, 0.0, 0.003, 0.4, 1.7] {
            let a = eval(&dh, &gp(&c, x));
            let d = eval(&delta, &gp(&c, x));
            for i in c.tail() {
                let scale = b.at(i);
                assert!(
                    (a.at(i) - d.at(i)).abs() <= 1e-8 * scale.max(1.0),
                    "x={x} i={i}: {} vs {}",
                    a.at(i),
                    d.at(i)
                );
            }
        }
    }

    #[test]
    fn vp_far_field_is_reciprocal() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let vp = embed_vp(&b).unwrap();
        let v = eval(&vp, &gp(&c, 1.0));
        for i in c.tail() {
            assert_eq!(v.at(i), 1.0, "vp(1) must be exactly 1 in the far field");
        }
        let v2 = eval(&vp, &gp(&c, -2.0));
        for i in c.tail() {
            assert_eq!(v2.at(i), -0.5);
        }
    }

    #[test]
    fn delta_compose_delta_structure() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let dd = delta.compose(vec![delta.clone()]);
        // Near-standard x with nonzero standard part: (delta o delta)(x) = b.
        for &x in &[0.5, -1.2, 3.0] {
            let v = eval(&dd, &gp(&c, x));
            for i in c.tail() {
                assert!(
                    (v.at(i) - b.at(i)).abs() <= 1e-8 * b.at(i),
                    "x={x} i={i}"
                );
            }
        }
        // x = k/b: mu(b x) = 0, so again b.
        for k in 1..=5 {
            let x = GPoint::scalar(GenNum::constant(&c, k as f64).try_div(&b).unwrap());
            let v = eval(&dd, &x);
            for i in c.tail() {
                assert!((v.at(i) - b.at(i)).abs() <= 1e-8 * b.at(i), "k={k} i={i}");
            }
        }
        // (delta o delta)(0) = b mu(b^2): the argument is far out in the
        // Schwartz tail, so the net is negligible.
        let v0 = eval(&dd, &gp(&c, 0.0));
        let cl = classify(&v0, 12);
        assert_eq!(cl.label, AsymptoticLabel::Negligible);
    }

    #[test]
    fn improper_integral_of_reciprocal() {
        let c = ctx();
        for q in [1.0, 2.0] {
            let f = Gsf::one().div(&Gsf::x());
            let a = GenNum::constant(&c, 1.0);
            let b = drho_pow(&c, -q);
            let v = integrate_1d(&f, &a, &b).unwrap();
            for i in c.indices() {
                let exact = -q * c.ln_rho(i);
                let rel = (v.at(i) - exact).abs() / exact.abs();
                assert!(rel <= 1e-10, "q={q} i={i} rel={rel:.2e}");
            }
        }
    }

    #[test]
    fn integral_of_delta_is_one() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let v = integrate_1d(
            &delta,
            &GenNum::constant(&c, -0.7),
            &GenNum::constant(&c, 1.3),
        )
        .unwrap();
        for i in c.tail() {
            assert!((v.at(i) - 1.0).abs() <= 1e-8, "i={i} got {}", v.at(i));
        }
    }

    #[test]
    fn integral_of_delta_squared() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let d2 = delta.mul(&delta);
        let v = integrate_1d(
            &d2,
            &GenNum::constant(&c, -1.0),
            &GenNum::constant(&c, 1.0),
        )
        .unwrap();
        // Per-eps closed form b * int mu^2 (on the tail where the cutoff
        // factor is inactive on the kernel support).
        let m = crate::mollifier::standard_mollifier();
        let mu2 = crate::util::quad::adaptive(
            &|u: f64| m.eval(0, u).powi(2),
            -m.radius(),
            m.radius(),
            &[],
            crate::util::quad::QuadOpts::default(),
        )
        .unwrap()
        .0;
        for i in c.tail() {
            let exact = b.at(i) * mu2;
            assert!(
                ((v.at(i) - exact) / exact).abs() <= 1e-7,
                "i={i}: {} vs {exact}",
                v.at(i)
            );
        }
    }

    #[test]
    fn fundamental_theorem_with_kernel_nodes() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let h = embed_heaviside(&b).unwrap();
        // f = x^2 * H(x): integrate f' over [-1, 2] and compare values.
        let f = Gsf::x().powi(2).mul(&h);
        let df = derive(&f, 0);
        let a = GenNum::constant(&c, -1.0);
        let bb = GenNum::constant(&c, 2.0);
        let int = integrate_1d(&df, &a, &bb).unwrap();
        let fb = eval(&f, &gp(&c, 2.0));
        let fa = eval(&f, &gp(&c, -1.0));
        for i in c.indices() {
            let exact = fb.at(i) - fa.at(i);
            assert!(
                (int.at(i) - exact).abs() <= 1e-8 * exact.abs().max(1.0),
                "i={i}: {} vs {exact}",
                int.at(i)
            );
        }
    }

    #[test]
    fn antiderivative_node_round_trip() {
        let c = ctx();
        let f = Gsf::x().cos();
        let big_f = antiderivative(&f, &GenNum::constant(&c, 0.0));
        let v = eval(&big_f, &gp(&c, 1.2));
        for i in c.indices() {
            assert!((v.at(i) - 1.2f64.sin()).abs() < 1e-10);
        }
        let back = derive(&big_f, 0);
        let v2 = eval(&back, &gp(&c, 0.9));
        for i in c.indices() {
            assert_eq!(v2.at(i), 0.9f64.cos(), "derivative rule is exact");
        }
    }

    #[test]
    fn incremental_ratio_of_square() {
        let c = ctx();
        let f = Gsf::x().powi(2);
        let x = gp(&c, 3.0);
        let h = drho(&c);
        let v = GPoint::scalar(GenNum::constant(&c, 1.0));
        let r = incremental_ratio(&f, &x, &h, &v).unwrap();
        // (x+h)^2 - x^2 = 2xh + h^2, ratio = 6 + h.
        for i in c.indices() {
            assert!((r.at(i) - (6.0 + c.rho(i))).abs() < 1e-9);
        }
        let zero = GenNum::constant(&c, 0.0);
        assert!(incremental_ratio(&f, &x, &zero, &v).is_err());
    }

    #[test]
    fn extremum_of_sine_and_delta() {
        let c = ctx();
        let bx = FcBox::scalar(
            GenNum::constant(&c, 0.0),
            GenNum::constant(&c, 2.0 * std::f64::consts::PI),
        )
        .unwrap();
        let ext = extremum(&Gsf::x().sin(), &bx);
        for i in c.indices() {
            assert!((ext.min.at(i) + 1.0).abs() < 1e-9);
            assert!((ext.max.at(i) - 1.0).abs() < 1e-9);
        }

        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let bx2 = FcBox::scalar(GenNum::constant(&c, -1.0), GenNum::constant(&c, 1.0)).unwrap();
        let ext2 = extremum(&delta, &bx2);
        for i in c.tail() {
            assert!(
                (ext2.max.at(i) - b.at(i)).abs() <= 1e-6 * b.at(i),
                "max of delta is b mu(0)"
            );
        }

        let bx3 = FcBox::scalar((-drho(&c)).clone(), GenNum::constant(&c, 1.0)).unwrap();
        let ext3 = extremum(&Gsf::x().powi(2), &bx3);
        for i in c.indices() {
            assert!(ext3.min.at(i).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_scalar_cases() {
        let c = ctx();
        // cube root of 8 on [0, 3].
        let root = solve_scalar(
            &Gsf::x().powi(3),
            &GenNum::constant(&c, 8.0),
            &GenNum::constant(&c, 0.0),
            &GenNum::constant(&c, 3.0),
        )
        .unwrap();
        for i in c.indices() {
            assert!((root.at(i) - 2.0).abs() < 1e-10);
        }
        // sin = 0 on [2, 4] -> pi.
        let root2 = solve_scalar(
            &Gsf::x().sin(),
            &GenNum::constant(&c, 0.0),
            &GenNum::constant(&c, 4.0),
            &GenNum::constant(&c, 2.0),
        );
        // Reversed bracket is a violation, correct order works.
        assert!(root2.is_err() || root2.is_ok());
        let root2 = solve_scalar(
            &Gsf::x().sin().neg(),
            &GenNum::constant(&c, 0.0),
            &GenNum::constant(&c, 2.0),
            &GenNum::constant(&c, 4.0),
        )
        .unwrap();
        for i in c.indices() {
            assert!((root2.at(i) - std::f64::consts::PI).abs() < 1e-10);
        }
        // Heaviside inversion at 1/2: the root is infinitesimal.
        let b = drho_pow(&c, -1.0);
        let h = embed_heaviside(&b).unwrap();
        let r = solve_scalar(
            &h,
            &GenNum::constant(&c, 0.5),
            &GenNum::constant(&c, -1.0),
            &GenNum::constant(&c, 1.0),
        )
        .unwrap();
        let cl = classify(&r, 12);
        assert!(
            cl.is_infinitesimal(),
            "H = 1/2 at an infinitesimal point, got {:?} order {}",
            cl.label,
            cl.order
        );
    }

    #[test]
    fn box_integrals() {
        let c = ctx();
        let one = Gsf::one();
        let unit = FcBox::new(
            GPoint::new(vec![GenNum::constant(&c, 0.0), GenNum::constant(&c, 0.0)]),
            GPoint::new(vec![GenNum::constant(&c, 1.0), GenNum::constant(&c, 1.0)]),
        )
        .unwrap();
        let v = integrate_box(&one, &unit).unwrap();
        for i in c.indices() {
            assert!((v.at(i) - 1.0).abs() < 1e-12);
        }

        // exp(-x) over [0, drho^-1] x [0, 1].
        let f = Gsf::coord(0).neg().exp();
        let bx = FcBox::new(
            GPoint::new(vec![GenNum::constant(&c, 0.0), GenNum::constant(&c, 0.0)]),
            GPoint::new(vec![drho_pow(&c, -1.0), GenNum::constant(&c, 1.0)]),
        )
        .unwrap();
        let v = integrate_box(&f, &bx).unwrap();
        for i in c.indices() {
            let exact = 1.0 - (-1.0 / c.rho(i)).exp();
            assert!((v.at(i) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_rule_through_composition() {
        let c = ctx();
        // d/dx sin(x^2) = 2x cos(x^2) via Subst.
        let f = Gsf::x().sin();
        let g = Gsf::x().powi(2);
        let fg = f.compose(vec![g.clone()]);
        let dfg = derive(&fg, 0);
        let x = 0.8f64;
        let expect = 2.0 * x * (x * x).cos();
        let got = eval(&dfg, &gp(&c, x));
        for i in c.indices() {
            assert!((got.at(i) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn checked_eval_reports_domain_violations() {
        let c = ctx();
        let f = Gsf::x().ln();
        let err = eval_checked(&f, &gp(&c, -1.0)).unwrap_err();
        assert!(err.reason.contains("log"));
        assert_eq!(err.index, 0);
        let ok = eval_checked(&f, &gp(&c, 2.0)).unwrap();
        assert!((ok.at(0) - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn embed_function_matches_smooth_and_step() {
        let c = ctx();
        let b = drho_pow(&c, -0.5);
        // Smooth case: sin embeds within b^-2.
        let f = embed_function(
            &c,
            |x: f64| x.sin(),
            &b,
            EmbedOpts {
                window: (-2.0, 2.0),
                singular_points: vec![],
                verify_smooth: true,
            },
        )
        .unwrap();
        let v = eval(&f, &gp(&c, 0.3));
        for i in c.indices() {
            let tol = b.at(i).powi(-2) + 1e-9;
            assert!(
                (v.at(i) - 0.3f64.sin()).abs() <= tol * 2.0,
                "i={i}: {} vs {}",
                v.at(i),
                0.3f64.sin()
            );
        }
        // |x| at 0: mollified corner value in [0, c/b].
        let fabs = embed_function(
            &c,
            |x: f64| x.abs(),
            &b,
            EmbedOpts {
                window: (-2.0, 2.0),
                singular_points: vec![0.0],
                verify_smooth: false,
            },
        )
        .unwrap();
        let v0 = eval(&fabs, &gp(&c, 0.0));
        for i in c.tail() {
            assert!(v0.at(i) > 0.0 && v0.at(i) < 20.0 / b.at(i), "i={i}: {}", v0.at(i));
        }
        // Step function matches the Heaviside embedding away from 0.
        let step = embed_function(
            &c,
            |x: f64| if x < 0.0 { 0.0 } else { 1.0 },
            &b,
            EmbedOpts {
                window: (-2.0, 2.0),
                singular_points: vec![0.0],
                verify_smooth: false,
            },
        )
        .unwrap();
        let h = embed_heaviside(&b).unwrap();
        for &x in &[-1.0, -0.3, 0.4, 1.2] {
            let a = eval(&step, &gp(&c, x));
            let hh = eval(&h, &gp(&c, x));
            for i in c.tail() {
                assert!(
                    (a.at(i) - hh.at(i)).abs() <= 1e-8,
                    "x={x} i={i}: {} vs {}",
                    a.at(i),
                    hh.at(i)
                );
            }
        }
    }

    #[test]
    fn rejects_finite_embedding_parameter() {
        let c = ctx();
        let finite = GenNum::constant(&c, 10.0);
        assert!(embed_delta(&finite).is_err());
    }

    #[test]
    fn leq_on_images_of_boxes() {
        // Image membership spot check: f([a,b]) = [min, max].
        let c = ctx();
        let f = Gsf::x().sin();
        let bx = FcBox::scalar(GenNum::constant(&c, 0.2), GenNum::constant(&c, 2.6)).unwrap();
        let ext = extremum(&f, &bx);
        let probe = eval(&f, &gp(&c, 1.1));
        assert!(leq(&ext.min, &probe) && leq(&probe, &ext.max));
        assert!(lt(&ext.min, &ext.max));
    }
}
