use super::gauge::Ctx;
use super::gennum::GenNum;

/// Asymptotic class of a net measured against the gauge.
#[derive(Clone, Debug, PartialEq)]
pub enum AsymptoticLabel {
    /// Below `rho^n` for every tested `n` up to the configured cap.
    Negligible,
    Infinitesimal,
    FiniteNonzero,
    NearStandard(f64),
    Infinite,
    Indeterminate,
}

#[derive(Clone, Debug)]
pub struct AsymptoticClass {
    pub label: AsymptoticLabel,
    /// Estimated exponent `a` in `|x_eps| ~ rho_eps^a` (least squares on the
    /// grid tail).
    pub order: f64,
    pub fit_residual: f64,
    pub non_moderate_suspected: bool,
    /// Decays to zero slower than every `rho^a`: a "large" infinitesimal in
    /// the sense used by the far-from-singularity notion.
    pub far_from_zero: bool,
    pub diagnostic: Option<String>,
}

impl AsymptoticClass {
    pub fn is_infinitesimal(&self) -> bool {
        matches!(
            self.label,
            AsymptoticLabel::Negligible | AsymptoticLabel::Infinitesimal
        ) || matches!(self.label, AsymptoticLabel::NearStandard(l) if l == 0.0)
    }

    pub fn is_infinite(&self) -> bool {
        self.label == AsymptoticLabel::Infinite
    }
}

fn slope_fit(ctx: &Ctx, vals: &[f64]) -> (f64, f64) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in ctx.tail() {
        let v = vals[i].abs();
        if v > 0.0 && v.is_finite() {
            xs.push(ctx.ln_rho(i));
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return (f64::NAN, f64::INFINITY);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (a * x + b);
        ss += r * r;
    }
    (a, (ss / n).sqrt())
}

fn aitken(v: [f64; 3]) -> f64 {
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[1];
    let dd = d2 - d1;
    if dd.abs() < 1e-300 {
        v[2]
    } else {
        v[2] - d2 * d2 / dd
    }
}

/// Tail extrapolation of the net: `Some(limit)` when successive differences
/// contract geometrically below `tol_std`; conservative by design, so slow
/// (sub-geometric) decay reports `None`.
pub fn near_standard_part(x: &GenNum) -> Option<f64> {
    let ctx = x.ctx();
    let p = ctx.params();
    let n = ctx.len();
    let take = 5.min(n);
    let tail: Vec<f64> = (n - take..n).map(|i| x.at(i)).collect();
    if tail.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let scale = tail.last().unwrap().abs().max(1.0);
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let last_d = diffs.last().unwrap().abs();
    if last_d <= p.tol_std * scale * 1e-3 {
        // Already numerically flat.
        return Some(*tail.last().unwrap());
    }
    // Geometric contraction of the differences.
    let mut contracting = true;
    for w in diffs.windows(2) {
        if !(w[1].abs() <= 0.75 * w[0].abs()) {
            contracting = false;
            break;
        }
    }
    if !contracting {
        return None;
    }
    let ratio = diffs[diffs.len() - 1].abs() / diffs[diffs.len() - 2].abs();
    let tail_bound = last_d * ratio / (1.0 - ratio.min(0.9));
    if tail_bound > p.tol_std * scale {
        return None;
    }
    Some(aitken([
        tail[take - 3],
        tail[take - 2],
        tail[take - 1],
    ]))
}

/// Classify a net as negligible / infinitesimal / finite / near-standard /
/// infinite / indeterminate, with the fitted `rho`-order and residual.
///
/// `n_max` caps both the negligibility and the moderateness probes; a net
/// exceeding `rho^-n_max` on the tail is flagged non-moderate.
pub fn classify(x: &GenNum, n_max: u32) -> AsymptoticClass {
    let ctx = x.ctx().clone();
    let p = *ctx.params();
    let vals = x.values();

    for i in ctx.indices() {
        if vals[i].is_nan() {
            return AsymptoticClass {
                label: AsymptoticLabel::Indeterminate,
                order: f64::NAN,
                fit_residual: f64::INFINITY,
                non_moderate_suspected: false,
                far_from_zero: false,
                diagnostic: Some(format!("NaN at eps = {}", ctx.eps(i))),
            };
        }
        if vals[i].is_infinite() {
            return AsymptoticClass {
                label: AsymptoticLabel::Indeterminate,
                order: f64::NEG_INFINITY,
                fit_residual: f64::INFINITY,
                non_moderate_suspected: true,
                far_from_zero: false,
                diagnostic: Some(format!("overflow at eps = {}", ctx.eps(i))),
            };
        }
    }

    if ctx.tail().all(|i| vals[i] == 0.0) {
        return AsymptoticClass {
            label: AsymptoticLabel::Negligible,
            order: f64::INFINITY,
            fit_residual: 0.0,
            non_moderate_suspected: false,
            far_from_zero: false,
            diagnostic: None,
        };
    }

    let (order, fit_residual) = slope_fit(&ctx, &vals);

    let neg_bound = |i: usize| n_max as f64 * ctx.ln_rho(i);
    if ctx
        .tail()
        .all(|i| vals[i] == 0.0 || vals[i].abs().ln() <= neg_bound(i))
    {
        return AsymptoticClass {
            label: AsymptoticLabel::Negligible,
            order,
            fit_residual,
            non_moderate_suspected: false,
            far_from_zero: false,
            diagnostic: None,
        };
    }

    if ctx
        .tail()
        .any(|i| vals[i].abs().ln() > -(n_max as f64) * ctx.ln_rho(i))
    {
        return AsymptoticClass {
            label: AsymptoticLabel::Indeterminate,
            order,
            fit_residual,
            non_moderate_suspected: true,
            far_from_zero: false,
            diagnostic: Some(format!("exceeds rho^-{n_max} on the tail")),
        };
    }

    let done = |label: AsymptoticLabel, far: bool| AsymptoticClass {
        label,
        order,
        fit_residual,
        non_moderate_suspected: false,
        far_from_zero: far,
        diagnostic: None,
    };

    if let Some(limit) = near_standard_part(x) {
        if limit.abs() <= p.tol_std {
            return done(AsymptoticLabel::Infinitesimal, order < p.far_slope);
        }
        return done(AsymptoticLabel::NearStandard(limit), false);
    }

    // Slow decay to zero: monotone magnitudes whose extrapolation keeps
    // dropping well below the last sample.
    let mags: Vec<f64> = ctx.tail().map(|i| vals[i].abs()).collect();
    let decreasing = mags.windows(2).all(|w| w[1] < w[0]);
    if decreasing && mags.len() >= 3 {
        let ext = aitken([
            mags[mags.len() - 3],
            mags[mags.len() - 2],
            mags[mags.len() - 1],
        ]);
        if ext < 0.75 * mags[mags.len() - 1] {
            return done(AsymptoticLabel::Infinitesimal, order < p.far_slope);
        }
    }

    if fit_residual <= p.fit_residual_max {
        if order < -0.02 {
            return done(AsymptoticLabel::Infinite, false);
        }
        if order > 0.02 {
            return done(AsymptoticLabel::Infinitesimal, order < p.far_slope);
        }
        return done(AsymptoticLabel::FiniteNonzero, false);
    }

    AsymptoticClass {
        label: AsymptoticLabel::Indeterminate,
        order,
        fit_residual,
        non_moderate_suspected: false,
        far_from_zero: false,
        diagnostic: Some("no clean power behavior on the tail".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::gennum::{drho, drho_pow, GenNum};
    use crate::ring::Ctx;

    #[test]
    fn drho_is_infinitesimal_order_one() {
        let c = Ctx::default_identity();
        let cl = classify(&drho(&c), 12);
        assert_eq!(cl.label, AsymptoticLabel::Infinitesimal);
        assert!((cl.order - 1.0).abs() < 0.05);
    }

    #[test]
    fn order_estimates_within_tolerance() {
        let c = Ctx::default_identity();
        for a in [-3.0, -1.0, 0.5, 1.0, 2.0] {
            let cl = classify(&drho_pow(&c, a), 12);
            assert!((cl.order - a).abs() < 0.05, "a={a} got {}", cl.order);
            if a > 0.0 {
                assert_eq!(cl.label, AsymptoticLabel::Infinitesimal);
            } else if a < 0.0 {
                assert_eq!(cl.label, AsymptoticLabel::Infinite);
            }
        }
    }

    #[test]
    fn exp_inv_net_non_moderate_under_identity() {
        let c = Ctx::default_identity();
        let x = GenNum::from_fn(&c, |e| (1.0 / e).exp());
        let cl = classify(&x, 12);
        assert_eq!(cl.label, AsymptoticLabel::Indeterminate);
        assert!(cl.non_moderate_suspected);
    }

    #[test]
    fn exp_inv_net_infinite_under_exp_inv_gauge() {
        let c = Ctx::default_exp_inv();
        let x = GenNum::from_fn(&c, |e| (1.0 / e).exp());
        let cl = classify(&x, 12);
        assert_eq!(cl.label, AsymptoticLabel::Infinite);
        assert!((cl.order + 1.0).abs() < 0.05);
    }

    #[test]
    fn near_standard_detection() {
        let c = Ctx::default_identity();
        let x = GenNum::constant(&c, 3.0) + drho(&c);
        assert!((near_standard_part(&x).unwrap() - 3.0).abs() < 1e-9);
        assert!(near_standard_part(&drho_pow(&c, -1.0)).is_none());
        let osc = GenNum::from_fn(&c, |e| (1.0 / e).sin());
        assert!(near_standard_part(&osc).is_none());
        match classify(&x, 12).label {
            AsymptoticLabel::NearStandard(l) => assert!((l - 3.0).abs() < 1e-9),
            other => panic!("expected near-standard, got {other:?}"),
        }
    }

    #[test]
    fn log_scale_infinitesimal_is_flagged_far_from_zero() {
        let c = Ctx::default_identity();
        let x = GenNum::from_fn(&c, |e| -1.0 / e.ln());
        let cl = classify(&x, 12);
        assert_eq!(cl.label, AsymptoticLabel::Infinitesimal);
        assert!(cl.far_from_zero, "order {} residual {}", cl.order, cl.fit_residual);
        assert!(cl.order.abs() < 0.2);
    }

    #[test]
    fn nan_gives_indeterminate_with_diagnostic() {
        let c = Ctx::default_identity();
        let x = GenNum::from_fn(&c, |e| if e < 1e-4 { f64::NAN } else { 1.0 });
        let cl = classify(&x, 12);
        assert_eq!(cl.label, AsymptoticLabel::Indeterminate);
        assert!(cl.diagnostic.unwrap().contains("NaN"));
    }

    #[test]
    fn deep_negligible_nets() {
        let c = Ctx::default_identity();
        let cl = classify(&drho_pow(&c, 14.0), 12);
        assert_eq!(cl.label, AsymptoticLabel::Negligible);
        let cl0 = classify(&GenNum::constant(&c, 0.0), 12);
        assert_eq!(cl0.label, AsymptoticLabel::Negligible);
    }
}
