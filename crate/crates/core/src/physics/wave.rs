//! Wave balance for a transversally oscillating string `gamma = (x, u)`:
//! the finite-increment Newton form against the wave-equation form, and the
//! cosine-cubed smallness of the tangent angle, at the stated order
//! relations. The string-length defect closes the loop.

use crate::gsf::{derive, eval, integrate_1d, GPoint, Gsf};
use crate::nilpotent::{eq_upto, eq_upto_exponent, in_dkj, EqVerdict, OrderTag};
use crate::ring::{classify, drho_pow, GenNum};

/// Inputs at a probe point: displacement `u(x, t)` (coords x, t), constant
/// linear density and tension, transverse load `g2(x, t)`.
pub struct WaveSetup {
    pub displacement: Gsf,
    pub density: Gsf,
    pub g2: Gsf,
    pub tension: GenNum,
    pub x: GenNum,
    pub t: GenNum,
    pub j: f64,
    /// delta x = drho^q.
    pub q: f64,
    /// Lower witness of |d phi / dx| >= drho^p.
    pub p: f64,
}

#[derive(Clone, Debug)]
pub struct WaveVerdict {
    pub pre_dx_nilpotent: bool,
    pub pre_phi_slope: bool,
    pub pre_phi_small: bool,
    /// Fitted order of the defect between the dynamic side and the
    /// finite-increment Newton side (reported, not asserted).
    pub newton_defect_order: f64,
    pub forward_hypothesis: EqVerdict,
    pub forward_conclusion: EqVerdict,
    pub forward_holds: bool,
    /// `1/h = 1/j - p - 2q`; non-positive exponents make the forward
    /// conclusion vacuous and are flagged on the verdict.
    pub h_exponent: f64,
    pub backward_hypothesis: EqVerdict,
    pub backward_conclusion: EqVerdict,
    pub backward_holds: bool,
    pub k_order: f64,
}

pub fn wave_balance(setup: &WaveSetup) -> WaveVerdict {
    let ctx = setup.x.ctx().clone();
    let u = &setup.displacement;
    let dux = derive(u, 0);
    // Tangent angle phi = atan(du/dx); sin phi = du/dx / sqrt(1 + (du/dx)^2).
    let phi = dux.atan();
    let sinphi = dux.div(&Gsf::one().add(&dux.mul(&dux)).sqrt());

    let at = |f: &Gsf, xx: &GenNum, tt: &GenNum| {
        eval(f, &GPoint::new(vec![xx.clone(), tt.clone()]))
    };

    let dx = drho_pow(&ctx, setup.q);
    let x_next = &setup.x + &dx;

    let je = OrderTag(setup.j);
    let pre_dx_nilpotent = in_dkj(&dx, 1, je);

    let dphidx = derive(&phi, 0);
    let slope = at(&dphidx, &setup.x, &setup.t);
    let pre_phi_slope = ctx.tail().all(|i| {
        let v = slope.at(i).abs();
        v > 0.0 && v.ln() >= setup.p * ctx.ln_rho(i) + 1e-9 * ctx.ln_rho(i)
    });
    let phi_val = at(&phi, &setup.x, &setup.t);
    let pre_phi_small = ctx
        .indices()
        .all(|i| phi_val.at(i).abs() < std::f64::consts::FRAC_PI_2);

    let rho_val = at(&setup.density, &setup.x, &setup.t);
    let g2_val = at(&setup.g2, &setup.x, &setup.t);
    let t_big = Gsf::constant(setup.tension.clone());

    // Dynamic side rho u_tt, Newton difference side, and the wave side.
    let dutt = derive(&derive(u, 1), 1);
    let dynamic = &rho_val * &at(&dutt, &setup.x, &setup.t);
    let newton = {
        let s1 = at(&sinphi, &x_next, &setup.t);
        let s0 = at(&sinphi, &setup.x, &setup.t);
        let diff = &(&s1 - &s0).try_div(&dx).expect("dx invertible");
        &(&setup.tension * diff) + &(&g2_val * &rho_val)
    };
    let wave_side = {
        let duxx = derive(&dux, 0);
        let txx = t_big.mul(&duxx);
        &at(&txx, &setup.x, &setup.t) + &(&g2_val * &rho_val)
    };
    let newton_defect_order = classify(&(&dynamic - &newton), ctx.params().n_max).order;

    // Forward: wave relation at order j implies cos^3 phi =_h 1.
    let forward_hypothesis = eq_upto(&dynamic, &wave_side, je);
    let h_exponent = 1.0 / setup.j - setup.p - 2.0 * setup.q;
    let cos3 = phi_val.map(|v| v.cos().powi(3));
    let one = GenNum::constant(&ctx, 1.0);
    let forward_conclusion = eq_upto_exponent(&cos3, &one, h_exponent);
    let forward_holds = !forward_hypothesis.holds || forward_conclusion.holds;

    // Backward: cos^3 phi =_j 1 implies the Newton side satisfies the wave
    // equation at order k, 1/k = 1/j - q.
    let backward_hypothesis = eq_upto(&cos3, &one, je);
    let inv_k = 1.0 / setup.j - setup.q;
    let backward_conclusion = eq_upto_exponent(&newton, &wave_side, inv_k);
    let backward_holds = !backward_hypothesis.holds || backward_conclusion.holds;

    WaveVerdict {
        pre_dx_nilpotent,
        pre_phi_slope,
        pre_phi_small,
        newton_defect_order,
        forward_hypothesis,
        forward_conclusion,
        forward_holds,
        h_exponent,
        backward_hypothesis,
        backward_conclusion,
        backward_holds,
        k_order: if inv_k > 0.0 { 1.0 / inv_k } else { f64::NAN },
    }
}

#[derive(Clone, Debug)]
pub struct StringLengthReport {
    /// phi in D_{3j} at the sampled cross-sections.
    pub pre_angle_nilpotent: bool,
    pub verdict: EqVerdict,
    pub length: GenNum,
}

/// Arc length of the displaced string at time `t` against `b - a` at order
/// `2j`.
pub fn string_length_check(
    u: &Gsf,
    t: &GenNum,
    a: &GenNum,
    b: &GenNum,
    j: f64,
) -> StringLengthReport {
    let dux = derive(u, 0);
    let dux_t = dux.compose(vec![Gsf::coord(0), Gsf::constant(t.clone())]);
    let integrand = Gsf::one().add(&dux_t.mul(&dux_t)).sqrt();
    let length = integrate_1d(&integrand, a, b).expect("arc length quadrature");
    let span = b - a;
    let verdict = eq_upto(&length, &span, OrderTag(2.0 * j));

    let phi = dux.atan();
    let mut pre = true;
    for k in 1..=5 {
        let frac = k as f64 / 6.0;
        let x = &(a + &span.scale(frac));
        let val = eval(&phi, &GPoint::new(vec![x.clone(), t.clone()]));
        if !in_dkj(&val, 3, OrderTag(j)) {
            pre = false;
        }
    }
    StringLengthReport {
        pre_angle_nilpotent: pre,
        verdict,
        length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ctx;

    /// u = A sin(x) cos(c t) with c^2 = T / rho0: exact standing wave.
    fn standing_wave(amp: &GenNum, tension: f64, rho0: f64) -> Gsf {
        let c = (tension / rho0).sqrt();
        Gsf::constant(amp.clone())
            .mul(&Gsf::coord(0).sin())
            .mul(&Gsf::coord(1).scale(c).cos())
    }

    fn setup(ctxv: &Ctx, amp: GenNum, j: f64) -> WaveSetup {
        WaveSetup {
            displacement: standing_wave(&amp, 1.0, 1.0),
            density: Gsf::one(),
            g2: Gsf::zero(),
            tension: GenNum::constant(ctxv, 1.0),
            x: GenNum::constant(ctxv, 0.7),
            t: GenNum::constant(ctxv, 0.3),
            j,
            q: 1.0 / (2.0 * j),
            // The measured |d phi/dx| is ~0.6 A = 0.6 drho^{1/(2j)}; claim a
            // witness with slack so the constant is absorbed.
            p: 1.0 / (2.0 * j) + 0.1,
        }
    }

    #[test]
    fn small_angle_string_passes_both_directions() {
        let c = Ctx::default_identity();
        let j = 1.0;
        let amp = drho_pow(&c, 1.0 / (2.0 * j));
        let s = setup(&c, amp, j);
        let v = wave_balance(&s);
        assert!(v.pre_dx_nilpotent && v.pre_phi_small);
        assert!(v.pre_phi_slope, "amplitude sets the slope witness");
        assert!(v.forward_hypothesis.holds, "exact standing wave");
        assert!(v.forward_holds);
        // With e <= j forced, 1/h = 1/j - p - 2q <= -p < 0: the forward
        // conclusion is vacuous at these order choices and flagged so.
        assert!(v.h_exponent <= 0.0 && v.forward_conclusion.vacuous);
        assert!(v.backward_hypothesis.holds, "cos^3 phi =_j 1 for A = drho^(1/2j)");
        assert!(
            v.backward_conclusion.holds,
            "k-order Newton-vs-wave: C = {:.3e}, slope {:.3}",
            v.backward_conclusion.constant,
            v.backward_conclusion.ratio_slope
        );
        assert!(v.backward_holds);
        assert!((v.k_order - 2.0 * j).abs() < 1e-9);
    }

    #[test]
    fn flat_string_trivially_passes() {
        let c = Ctx::default_identity();
        let s = setup(&c, GenNum::constant(&c, 0.0), 1.0);
        let v = wave_balance(&s);
        assert!(!v.pre_phi_slope, "phi = 0 cannot witness a positive slope");
        assert!(v.forward_conclusion.constant == 0.0 || v.forward_conclusion.holds);
        assert!(v.backward_holds);
    }

    #[test]
    fn large_amplitude_fails_the_order_relations() {
        let c = Ctx::default_identity();
        let s = setup(&c, GenNum::constant(&c, 0.5), 1.0);
        let v = wave_balance(&s);
        assert!(!v.backward_hypothesis.holds, "cos^3 phi - 1 = O(1)");
        assert!(
            !v.backward_conclusion.holds,
            "O(A^3) defect between Newton and wave forms"
        );
    }

    #[test]
    fn string_length_cases() {
        let c = Ctx::default_identity();
        let a = GenNum::constant(&c, 0.0);
        let b = GenNum::constant(&c, std::f64::consts::PI);
        let t = GenNum::constant(&c, 0.2);
        let j = 1.0;

        let flat = standing_wave(&GenNum::constant(&c, 0.0), 1.0, 1.0);
        let r = string_length_check(&flat, &t, &a, &b, j);
        assert!(r.verdict.holds && r.verdict.constant == 0.0);

        // A = drho^{1/(4j)} lies in D_{3j} and passes at order 2j.
        let amp = drho_pow(&c, 1.0 / (4.0 * j));
        let u = standing_wave(&amp, 1.0, 1.0);
        let r = string_length_check(&u, &t, &a, &b, j);
        assert!(r.pre_angle_nilpotent);
        assert!(r.verdict.holds, "C = {}", r.verdict.constant);

        // A = drho^{1/(6j)} has phi^4 of order 2/(3j) < 1/j: pre fails.
        let amp6 = drho_pow(&c, 1.0 / (6.0 * j));
        let r6 = string_length_check(&standing_wave(&amp6, 1.0, 1.0), &t, &a, &b, j);
        assert!(!r6.pre_angle_nilpotent);

        let big = standing_wave(&GenNum::constant(&c, 0.3), 1.0, 1.0);
        let r = string_length_check(&big, &t, &a, &b, j);
        assert!(!r.verdict.holds, "O(1) arc-length excess");
    }
}
