//! Order-tagged equality `x =_j y` (difference bounded by `C rho^{1/j}`),
//! the nilpotent neighborhoods `D_kj`, Taylor theorems in Lagrange, Peano
//! and nilpotent form, and the cancellation law. All order statements are
//! bounded-ratio tests on the grid tail with the attained constant reported.

use crate::error::SolveError;
use crate::gsf::{derive, eval, extremum, FcBox, GPoint, Gsf};
use crate::ring::{classify, drho_pow, AsymptoticLabel, GenNum};

/// The order tag `j > 0` of the equality `=_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderTag(pub f64);

impl OrderTag {
    pub fn new(j: f64) -> Self {
        assert!(j > 0.0, "order tag must be positive");
        OrderTag(j)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EqVerdict {
    pub holds: bool,
    /// Attained constant `C = sup |x-y| / rho^{a}` over the tail.
    pub constant: f64,
    /// The exponent `a` used (`1/j` for `=_j`).
    pub exponent: f64,
    /// Fitted order of the ratio itself; negative means the ratio grows as
    /// eps shrinks and no real constant can bound it.
    pub ratio_slope: f64,
    /// Set when `a <= 0`: the bound is weaker than moderateness and holds
    /// vacuously for any moderate difference.
    pub vacuous: bool,
}

/// Bounded-ratio test `|x_eps - y_eps| <= C rho_eps^a` on the tail, with the
/// attained `C` reported. "O(rho^a)" at a finite grid means: the sup of the
/// ratio stays under `c_max` *and* the ratio does not drift upward as eps
/// shrinks (fitted slope not clearly negative).
pub fn eq_upto_exponent(x: &GenNum, y: &GenNum, a: f64) -> EqVerdict {
    let ctx = x.ctx().clone();
    let c_max = ctx.params().c_max;
    let mut ln_c = f64::NEG_INFINITY;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in ctx.tail() {
        let d = (x.at(i) - y.at(i)).abs();
        // Differences at the f64 noise floor of the operands count as equal.
        let floor = 1e-14 * x.at(i).abs().max(y.at(i).abs());
        if d == 0.0 || d <= floor {
            continue;
        }
        let lr = d.ln() - a * ctx.ln_rho(i);
        ln_c = ln_c.max(lr);
        xs.push(ctx.ln_rho(i));
        ys.push(lr);
    }
    let constant = ln_c.exp();
    let ratio_slope = if xs.len() >= 3 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (p, q) in xs.iter().zip(&ys) {
            sxx += (p - mx) * (p - mx);
            sxy += (p - mx) * (q - my);
        }
        sxy / sxx
    } else {
        0.0
    };
    EqVerdict {
        holds: constant <= c_max && ratio_slope >= -0.05,
        constant,
        exponent: a,
        ratio_slope,
        vacuous: a <= 0.0,
    }
}

/// `x =_j y`: equality up to j-th order infinitesimals.
pub fn eq_upto(x: &GenNum, y: &GenNum, j: OrderTag) -> EqVerdict {
    eq_upto_exponent(x, y, 1.0 / j.0)
}

/// Membership in `D_kj = { x : x^{k+1} =_j 0 }`.
pub fn in_dkj(x: &GenNum, k: u32, j: OrderTag) -> bool {
    let zero = GenNum::constant(x.ctx(), 0.0);
    eq_upto(&x.powi(k as i32 + 1), &zero, j).holds
}

/// Taylor polynomial of a scalar tree at `a`: coefficients `f^(r)(a)/r!`.
pub struct TaylorPoly {
    pub coeffs: Vec<GenNum>,
}

impl TaylorPoly {
    pub fn eval(&self, u: &GenNum) -> GenNum {
        let ctx = u.ctx();
        let mut acc = GenNum::constant(ctx, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * u) + c;
        }
        acc
    }
}

pub fn taylor_poly(f: &Gsf, a: &GenNum, n: usize) -> TaylorPoly {
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut g = f.clone();
    let mut fact = 1.0;
    for r in 0..=n {
        if r > 0 {
            g = derive(&g, 0);
            fact *= r as f64;
        }
        coeffs.push(eval(&g, &GPoint::scalar(a.clone())).scale(1.0 / fact));
    }
    TaylorPoly { coeffs }
}

/// Lagrange remainder bound: `max |f^(n+1)| / (n+1)!` over the interval, to
/// be multiplied by `|u|^{n+1}`.
pub fn lagrange_remainder_factor(f: &Gsf, lo: &GenNum, hi: &GenNum, n: usize) -> GenNum {
    let mut g = f.clone();
    for _ in 0..=n {
        g = derive(&g, 0);
    }
    let bx = FcBox::scalar(lo.clone(), hi.clone()).expect("remainder interval");
    let ext = extremum(&g, &bx);
    let bound = ext.min.abs().sup(&ext.max.abs());
    let mut fact = 1.0;
    for r in 2..=(n + 1) {
        fact *= r as f64;
    }
    bound.scale(1.0 / fact)
}

#[derive(Clone, Debug)]
pub struct NilpotentTaylorReport {
    pub holds: bool,
    /// Largest `e <= j` in the ladder for which all sampled `u in D_ne`
    /// satisfy the nilpotent Taylor formula at order `j`.
    pub e_witness: Option<f64>,
    /// Measured order of the worst remainder at the witness level.
    pub achieved_exponent: f64,
}

/// Search a decreasing ladder `e in {j, j/2, ..., j/64}` for the nilpotent
/// Taylor formula: for sampled `u` at the `D_ne` scale,
/// `f(x+u) =_j sum_{r<=n} f^(r)(x)/r! u^r`.
pub fn check_taylor_nilpotent(
    f: &Gsf,
    x: &GenNum,
    n: usize,
    j: OrderTag,
) -> NilpotentTaylorReport {
    let ctx = x.ctx().clone();
    let poly = taylor_poly(f, x, n);
    let mut witness = None;
    let mut achieved = f64::NAN;
    let mut e = j.0;
    for _ in 0..7 {
        let mut all_pass = true;
        let mut worst_exponent = f64::INFINITY;
        for mult in [1.0, 0.5, 2.0] {
            let u = drho_pow(&ctx, 1.0 / ((n as f64 + 1.0) * e)).scale(mult);
            if !in_dkj(&u, n as u32, OrderTag(e)) {
                continue;
            }
            let shifted = &GenNum::from_indexed(&ctx, {
                let x = x.clone();
                let u = u.clone();
                move |i, _| x.at(i) + u.at(i)
            });
            let fx = eval(f, &GPoint::scalar(shifted.clone()));
            let tx = poly.eval(&u);
            let verdict = eq_upto(&fx, &tx, j);
            if !verdict.holds {
                all_pass = false;
                break;
            }
            let resid = &fx - &tx;
            let cl = classify(&resid, ctx.params().n_max);
            if cl.order.is_finite() {
                worst_exponent = worst_exponent.min(cl.order);
            }
        }
        if all_pass {
            witness = Some(e);
            achieved = worst_exponent;
            break;
        }
        e *= 0.5;
    }
    NilpotentTaylorReport {
        holds: witness.is_some(),
        e_witness: witness,
        achieved_exponent: achieved,
    }
}

#[derive(Clone, Debug)]
pub struct CancelReport {
    /// The forward implication held on this instance.
    pub holds: bool,
    pub k: f64,
    pub premise: EqVerdict,
    pub conclusion: EqVerdict,
}

/// Cancellation law: from `x r =_j x s` and `|x| >= drho^q` with
/// `1/k = 1/j - q > 0`, conclude `r =_k s`.
pub fn cancel(
    r: &GenNum,
    s: &GenNum,
    x: &GenNum,
    j: OrderTag,
    q: f64,
) -> Result<CancelReport, SolveError> {
    let ctx = x.ctx().clone();
    for i in ctx.tail() {
        let lhs = x.at(i).abs();
        // |x| >= rho^q in the log domain.
        if !(lhs > 0.0 && lhs.ln() >= q * ctx.ln_rho(i) - 1e-12 * ctx.ln_rho(i).abs()) {
            return Err(SolveError::BracketViolation {
                eps: ctx.eps(i),
                fa: lhs,
                fb: (q * ctx.ln_rho(i)).exp(),
            });
        }
    }
    let inv_k = 1.0 / j.0 - q;
    assert!(inv_k > 0.0, "cancellation needs 1/j - q > 0");
    let premise = eq_upto(&(x * r), &(x * s), j);
    let conclusion = eq_upto_exponent(r, s, inv_k);
    Ok(CancelReport {
        holds: !premise.holds || conclusion.holds,
        k: 1.0 / inv_k,
        premise,
        conclusion,
    })
}

/// Converse branch: for finite `x`, `r =_k s` implies `x r =_k x s`.
pub fn cancel_converse(r: &GenNum, s: &GenNum, x: &GenNum, k: OrderTag) -> CancelReport {
    let premise = eq_upto(r, s, k);
    let conclusion = eq_upto(&(x * r), &(x * s), k);
    CancelReport {
        holds: !premise.holds || conclusion.holds,
        k: k.0,
        premise,
        conclusion,
    }
}

/// Peano form: the remainder over `u^n` tends to zero sharply along
/// `u = drho^m` for growing `m`.
pub fn little_oh_check(f: &Gsf, x: &GenNum, n: usize) -> bool {
    let ctx = x.ctx().clone();
    let poly = taylor_poly(f, x, n);
    let mut orders = Vec::new();
    for m in 1..=6 {
        let u = drho_pow(&ctx, m as f64);
        let shifted = GenNum::from_indexed(&ctx, {
            let x = x.clone();
            let u = u.clone();
            move |i, _| x.at(i) + u.at(i)
        });
        let fx = eval(f, &GPoint::scalar(shifted));
        let tx = poly.eval(&u);
        let rem = &fx - &tx;
        let ratio = GenNum::from_indexed(&ctx, {
            let u = u.clone();
            move |i, _| rem.at(i) / u.at(i).powi(n as i32)
        });
        let cl = classify(&ratio, ctx.params().n_max);
        let ord = if cl.label == AsymptoticLabel::Negligible {
            f64::INFINITY
        } else {
            cl.order
        };
        orders.push((ord, cl.is_infinitesimal() || cl.label == AsymptoticLabel::Negligible));
    }
    // Eventually infinitesimal with non-decreasing measured order.
    let k = orders.len();
    orders[k - 1].1 && orders[k - 2].1 && orders[k - 1].0 >= orders[k - 2].0 - 0.1
}
