//! Hyperfinite Fourier transform `int_{-k}^{k} f(x) e^{-i x omega} dx` on
//! functionally compact boxes with an infinite half-width `k`, and the
//! uncertainty-product computation. No `1/2pi` normalization.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::QuadError;
use crate::gsf::{eval, features_of, integrate_1d, integration_breaks, FcBox, GPoint, Gsf};
use crate::ring::{classify, leq, AsymptoticClass, GenNum};
use crate::util::quad::{adaptive, QuadOpts};

/// Complex generalized number: componentwise nets sharing grid and gauge.
#[derive(Clone)]
pub struct CGenNum {
    pub re: GenNum,
    pub im: GenNum,
}

impl CGenNum {
    pub fn at(&self, i: usize) -> Complex64 {
        Complex64::new(self.re.at(i), self.im.at(i))
    }

    pub fn abs(&self) -> GenNum {
        self.re.zip(&self.im, |r, m| (r * r + m * m).sqrt())
    }

    pub fn conj(&self) -> CGenNum {
        CGenNum {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
}

fn hft_at(
    f: &Gsf,
    i: usize,
    eps: f64,
    k: f64,
    omega: f64,
    rel_tol: f64,
) -> Result<Complex64, QuadError> {
    let g = |x: f64| {
        let v = f.eval_at(i, &[x]);
        let phase = -x * omega;
        Complex64::new(v * phase.cos(), v * phase.sin())
    };
    let mut breaks = integration_breaks(f, 0, i, &[0.0], -k, k);

    // Effective-support probe: oscillation panels are only worth paying for
    // where |f| is alive (a delta spike or a Schwartz bump occupies a tiny
    // hull of the huge box).
    let mut probes: Vec<f64> = vec![-k, 0.0, k];
    let mut step = k;
    for _ in 0..60 {
        probes.push(-k + step);
        probes.push(k - step);
        probes.push(-step);
        probes.push(step);
        step *= 0.5;
        if step < 1e-9 {
            break;
        }
    }
    for &b in &breaks {
        probes.push(b);
    }
    let fmax = probes
        .iter()
        .map(|&x| f.eval_at(i, &[x]).abs())
        .fold(0.0f64, f64::max);
    let mut hull = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in &probes {
        if f.eval_at(i, &[x]).abs() > 1e-14 * fmax {
            hull.0 = hull.0.min(x);
            hull.1 = hull.1.max(x);
        }
    }
    if hull.0 > hull.1 {
        hull = (-k, k);
    }
    // Expand by a probe gap and clamp.
    let pad = 0.05 * (hull.1 - hull.0) + 1e-6;
    let (lo, hi) = ((hull.0 - pad).max(-k), (hull.1 + pad).min(k));
    let periods = omega.abs() * (hi - lo) / (2.0 * std::f64::consts::PI);
    if periods > 8.0 {
        let n = (periods / 4.0).ceil().min(4096.0) as usize;
        for p in 1..n {
            breaks.push(lo + (hi - lo) * p as f64 / n as f64);
        }
    }
    // Oscillatory cancellation floor: values below roundoff of the total
    // variation int |f| are numerically zero and not worth refining for.
    let abs_floor = 1e-13 * fmax * (hi - lo).max(1e-30);
    let opts = QuadOpts {
        rel_tol,
        abs_tol: abs_floor.max(1e-280),
        max_depth: 60,
        eps,
    };
    adaptive(&g, -k, k, &breaks, opts).map(|(v, _)| v)
}

/// The transform at one generalized frequency, eps-wise in parallel.
pub fn hft(f: &Gsf, k: &GenNum, omega: &GenNum) -> Result<CGenNum, QuadError> {
    let ctx = k.ctx().clone();
    let idx: Vec<usize> = ctx.indices().collect();
    let vals: Result<Vec<Complex64>, QuadError> = idx
        .par_iter()
        .map(|&i| hft_at(f, i, ctx.eps(i), k.at(i), omega.at(i), 1e-8))
        .collect();
    let vals = vals?;
    Ok(CGenNum {
        re: GenNum::from_values(&ctx, vals.iter().map(|v| v.re).collect()),
        im: GenNum::from_values(&ctx, vals.iter().map(|v| v.im).collect()),
    })
}

#[derive(Clone)]
pub struct UncertaintyReport {
    /// `(int x^2 |psi|^2)(int omega^2 |F psi|^2)`.
    pub lhs: GenNum,
    /// `1/4 ||psi||_2 ||F psi||_2`.
    pub rhs: GenNum,
    pub holds: bool,
    pub x_moment_class: AsymptoticClass,
    pub omega_moment_class: AsymptoticClass,
    /// Crude indicator of the omega-truncation tail: `|F(Omega)|^2 Omega^3`.
    pub truncation_tail: GenNum,
}

/// Uncertainty product for a compactly supported `psi` (support inside the
/// box is checked); omega-integrals are truncated at `omega_max` per eps.
pub fn uncertainty_product(
    psi: &Gsf,
    support: &FcBox,
    omega_max: &GenNum,
) -> Result<UncertaintyReport, QuadError> {
    assert_eq!(support.dim(), 1);
    let ctx = omega_max.ctx().clone();
    let lo = support.lo.coord(0).clone();
    let hi = support.hi.coord(0).clone();
    // Support check: |psi| must vanish outside the box.
    for frac in [1.1, 1.5, 2.0] {
        let probe_hi = hi.scale(frac).add_real(0.5);
        let probe_lo = lo.scale(frac).add_real(-0.5);
        for p in [probe_hi, probe_lo] {
            let v = eval(psi, &GPoint::scalar(p));
            // Support is an asymptotic premise: checked on the grid tail,
            // where kernel widths have shrunk into the box.
            for i in ctx.tail() {
                assert!(
                    v.at(i).abs() <= 1e-10,
                    "psi not supported in the box: |psi| = {} at eps index {i}",
                    v.at(i)
                );
            }
        }
    }

    let x2psi2 = Gsf::x().powi(2).mul(&psi.mul(psi));
    let x_moment = integrate_1d(&x2psi2, &lo, &hi)?;
    let psi2 = psi.mul(psi);
    let norm2_sq = integrate_1d(&psi2, &lo, &hi)?;

    let kk = lo.abs().sup(&hi.abs());
    let idx: Vec<usize> = ctx.indices().collect();
    // omega-integrals by fixed Gauss panels in omega (each node is an hft).
    let per: Result<Vec<(f64, f64, f64)>, QuadError> = idx
        .par_iter()
        .map(|&i| {
            let om = omega_max.at(i);
            let kv = kk.at(i);
            let (nodes, weights) = crate::util::quad::gauss_legendre(16);
            let panels = 24usize;
            let h = om / panels as f64;
            let mut m2 = 0.0;
            let mut n2 = 0.0;
            for p in 0..panels {
                let c = p as f64 * h + 0.5 * h;
                for (t, w) in nodes.iter().zip(&weights) {
                    let w_node = c + 0.5 * h * t;
                    let f = hft_at(psi, i, ctx.eps(i), kv, w_node, 1e-7)?;
                    let a2 = f.norm_sqr();
                    // psi real: |F(-w)| = |F(w)|, double the half line.
                    m2 += h * 0.5 * w * w_node * w_node * a2 * 2.0;
                    n2 += h * 0.5 * w * a2 * 2.0;
                }
            }
            let f_edge = hft_at(psi, i, ctx.eps(i), kv, om, 1e-7)?;
            Ok((m2, n2, f_edge.norm_sqr() * om * om * om))
        })
        .collect();
    let per = per?;
    let omega_moment = GenNum::from_values(&ctx, per.iter().map(|p| p.0).collect());
    let f_norm2_sq = GenNum::from_values(&ctx, per.iter().map(|p| p.1).collect());
    let truncation_tail = GenNum::from_values(&ctx, per.iter().map(|p| p.2).collect());

    let lhs = &x_moment * &omega_moment;
    let rhs = (norm2_sq.sqrt() * f_norm2_sq.sqrt()).scale(0.25);
    let holds = leq(&rhs, &lhs);
    let n_max = ctx.params().n_max;
    Ok(UncertaintyReport {
        holds,
        x_moment_class: classify(&x_moment, n_max),
        omega_moment_class: classify(&omega_moment, n_max),
        lhs,
        rhs,
        truncation_tail,
    })
}

/// Check that `f` has enough kernel structure to drive feature-aware
/// subdivision (used by diagnostics).
pub fn has_features(f: &Gsf) -> bool {
    !features_of(f).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsf::embed_delta;
    use crate::ring::{drho_pow, Ctx, GenNum};

    fn ctx() -> Ctx {
        Ctx::default_identity()
    }

    fn ln_drho_inv(c: &Ctx) -> GenNum {
        let cc = c.clone();
        GenNum::from_indexed(c, move |i, _| -cc.ln_rho(i))
    }

    #[test]
    fn exponential_closed_form() {
        let c = ctx();
        let f = Gsf::x().exp();
        let k = ln_drho_inv(&c);
        for om in [0.0, 1.0, 3.0] {
            let omega = GenNum::constant(&c, om);
            let got = hft(&f, &k, &omega).unwrap();
            for i in c.indices() {
                let l = c.ln_rho(i);
                let rho = c.rho(i);
                let phase = Complex64::new(0.0, om * l).exp();
                let exact = (phase / rho - rho / phase) / Complex64::new(1.0, -om);
                let rel = (got.at(i) - exact).norm() / exact.norm();
                assert!(rel <= 1e-6, "omega={om} i={i} rel={rel:.2e}");
            }
        }
    }

    #[test]
    fn delta_transform_is_flat_near_zero_frequency() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let k = drho_pow(&c, -0.5);
        for om in [0.0, 1.3, 3.0] {
            let omega = GenNum::constant(&c, om);
            let got = hft(&delta, &k, &omega).unwrap();
            for i in c.tail() {
                assert!(
                    (got.at(i) - Complex64::new(1.0, 0.0)).norm() <= 1e-6,
                    "om={om} i={i}: {}",
                    got.at(i)
                );
            }
        }
        let zero = hft(&Gsf::zero(), &k, &GenNum::constant(&c, 1.0)).unwrap();
        for i in c.indices() {
            assert_eq!(zero.at(i), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn linearity_and_conjugate_symmetry() {
        let c = ctx();
        let k = GenNum::constant(&c, 6.0);
        let f = Gsf::x().powi(2).neg().exp();
        let g = Gsf::x().sin().mul(&Gsf::x().powi(2).neg().exp());
        let omega = GenNum::constant(&c, 1.7);
        let fa = hft(&f, &k, &omega).unwrap();
        let ga = hft(&g, &k, &omega).unwrap();
        let combo = hft(&f.scale(2.0).add(&g.scale(-0.7)), &k, &omega).unwrap();
        for i in c.indices() {
            let want = fa.at(i) * 2.0 - ga.at(i) * 0.7;
            assert!((combo.at(i) - want).norm() < 1e-9);
        }
        // Real f: F(-omega) = conj(F(omega)).
        let neg = hft(&f, &k, &(-&omega)).unwrap();
        for i in c.indices() {
            assert!((neg.at(i) - fa.at(i).conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn matches_classical_transform_for_schwartz_function() {
        // Gaussian: int e^{-x^2} e^{-i x w} dx = sqrt(pi) e^{-w^2/4}.
        let c = ctx();
        let f = Gsf::x().powi(2).neg().exp();
        let k = drho_pow(&c, -0.5);
        for om in [0.0, 1.0, 2.5] {
            let got = hft(&f, &k, &GenNum::constant(&c, om)).unwrap();
            let exact = std::f64::consts::PI.sqrt() * (-om * om / 4.0).exp();
            for i in c.tail() {
                assert!(
                    (got.at(i) - Complex64::new(exact, 0.0)).norm() <= 1e-6 * exact.max(1e-3),
                    "om={om} i={i}"
                );
            }
        }
    }

    #[test]
    fn uncertainty_for_smooth_bump() {
        let c = ctx();
        // Gaussian times the plateau cutoff (compact support in [-8, 8]).
        let cut = Gsf::moll(crate::gsf::MollKind::Chi, 0, Gsf::x().scale(0.25));
        let psi = Gsf::x().powi(2).scale(-0.5).exp().mul(&cut);
        let bx = FcBox::scalar(GenNum::constant(&c, -8.0), GenNum::constant(&c, 8.0)).unwrap();
        let rep = uncertainty_product(&psi, &bx, &GenNum::constant(&c, 12.0)).unwrap();
        assert!(rep.holds);
        // Classical values: int x^2 e^{-x^2} = sqrt(pi)/2; F = sqrt(2 pi)
        // e^{-w^2/2}, int w^2 |F|^2 = pi sqrt(pi).
        let lhs_exact = (std::f64::consts::PI.sqrt() / 2.0)
            * (std::f64::consts::PI * std::f64::consts::PI.sqrt());
        for i in c.indices() {
            assert!((rep.lhs.at(i) - lhs_exact).abs() < 1e-3 * lhs_exact);
        }
    }

    #[test]
    fn uncertainty_for_delta() {
        let c = ctx();
        let b = drho_pow(&c, -1.0);
        let delta = embed_delta(&b).unwrap();
        let bx = FcBox::scalar(GenNum::constant(&c, -1.0), GenNum::constant(&c, 1.0)).unwrap();
        let omega_max = drho_pow(&c, -1.0);
        let rep = uncertainty_product(&delta, &bx, &omega_max).unwrap();
        assert!(rep.x_moment_class.is_infinitesimal(), "{:?}", rep.x_moment_class.label);
        assert!(rep.omega_moment_class.is_infinite(), "{:?}", rep.omega_moment_class.label);
        assert!(rep.holds, "product bound must hold for delta");
    }
}
