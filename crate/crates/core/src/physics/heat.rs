//! Heat balance: the flux form `Q_env = Q_cv + Q_ext` over an infinitesimal
//! parallelepiped against the field form `c rho du/dt = div(k grad u) + F`,
//! with the increment choices and order bookkeeping of the balance lemma.

use crate::error::BuildError;
use crate::gsf::{derive, eval, GPoint, Gsf};
use crate::nilpotent::{eq_upto, eq_upto_exponent, in_dkj, EqVerdict, OrderTag};
use crate::ring::{drho_pow, Ctx, GenNum};

/// Fields on a spatial box times time: `c`, `rho`, `k` in coords
/// (x1, x2, x3); `u`, `source` in coords (x1, x2, x3, t).
pub struct HeatFields {
    pub heat_capacity: Gsf,
    pub density: Gsf,
    pub conductivity: Gsf,
    pub temperature: Gsf,
    pub source: Gsf,
}

#[derive(Clone, Debug)]
pub struct HeatIncrements {
    pub dt: GenNum,
    pub dx: [GenNum; 3],
    pub e: f64,
    pub j: f64,
    pub q: f64,
    /// `1/k = 1/j - q` when positive.
    pub k_out: Option<f64>,
}

/// The paper-style increments `dt = drho^{1/(3e)}`, `dx_i = drho^{1/(5e)}`
/// with `q = 14/(15 e)`; verifies the compatibility conditions on the grid.
pub fn choose_heat_increments(
    ctx: &Ctx,
    e: f64,
    j: f64,
) -> Result<HeatIncrements, BuildError> {
    assert!(e > 0.0 && j > 0.0 && e <= j, "need 0 < e <= j");
    let dt = drho_pow(ctx, 1.0 / (3.0 * e));
    let dx = [
        drho_pow(ctx, 1.0 / (5.0 * e)),
        drho_pow(ctx, 1.0 / (5.0 * e)),
        drho_pow(ctx, 1.0 / (5.0 * e)),
    ];
    let q = 14.0 / (15.0 * e);
    let inv_k = 1.0 / j - q;
    let k_out = if inv_k > 0.0 { Some(1.0 / inv_k) } else { None };

    let dv = &(&dx[0] * &dx[1]) * &dx[2];
    let dvdt = &dv * &dt;
    let je = OrderTag(e);
    let jj = OrderTag(j);
    if !in_dkj(&dvdt, 1, je) {
        return Err(BuildError::Other(
            "dv*dt is not a first-order nilpotent at this grid resolution".into(),
        ));
    }
    let zero = GenNum::constant(ctx, 0.0);
    let ds0 = &dx[1] * &dx[2];
    let cond2 = &(&dt * &ds0) * &dx[0].powi(2);
    if !eq_upto(&cond2, &zero, jj).holds {
        return Err(BuildError::Other("dt ds_i dx_i^2 =_j 0 fails".into()));
    }
    let cond3 = &dt.powi(2) * &dv;
    if !eq_upto(&cond3, &zero, jj).holds {
        return Err(BuildError::Other("dt^2 dv =_j 0 fails".into()));
    }
    // dv dt >= drho^q (equality by construction; allow rounding slack).
    for i in ctx.tail() {
        let lhs = dvdt.at(i).ln();
        let rhs = q * ctx.ln_rho(i);
        if !(lhs >= rhs + 1e-9 * rhs.abs().min(-1.0)) && lhs < rhs - 1e-9 * rhs.abs() {
            return Err(BuildError::Other(format!(
                "dv dt >= drho^q fails at eps = {}",
                ctx.eps(i)
            )));
        }
    }
    Ok(HeatIncrements {
        dt,
        dx,
        e,
        j,
        q,
        k_out,
    })
}

#[derive(Clone, Debug)]
pub struct HeatVerdict {
    pub flux_eq_j: EqVerdict,
    pub field_eq_k: EqVerdict,
    /// Item-1 and item-2 verdicts agree at the corresponding orders.
    pub equivalent: bool,
    /// Fitted rho-order of the flux residual (grows as j shrinks for exact
    /// solutions).
    pub flux_residual_order: f64,
    pub field_residual_order: f64,
}

/// Evaluate both sides of the balance lemma at an interior point `(x, t)`.
pub fn heat_balance(
    fields: &HeatFields,
    x: &[GenNum; 3],
    t: &GenNum,
    inc: &HeatIncrements,
) -> HeatVerdict {
    let ctx = t.ctx().clone();
    let dv = &(&inc.dx[0] * &inc.dx[1]) * &inc.dx[2];

    let point4 = |x0: &GenNum, x1: &GenNum, x2: &GenNum, tt: &GenNum| {
        GPoint::new(vec![x0.clone(), x1.clone(), x2.clone(), tt.clone()])
    };
    let point3 =
        |x0: &GenNum, x1: &GenNum, x2: &GenNum| GPoint::new(vec![x0.clone(), x1.clone(), x2.clone()]);

    // Q_cv: fluxes through opposite faces, exactly per the definition.
    let mut q_cv = GenNum::constant(&ctx, 0.0);
    for i in 0..3 {
        let mut ds = GenNum::constant(&ctx, 1.0);
        for j2 in 0..3 {
            if j2 != i {
                ds = &ds * &inc.dx[j2];
            }
        }
        let half = inc.dx[i].scale(0.5);
        let mut xp = x.clone();
        xp[i] = &x[i] + &half;
        let mut xm = x.clone();
        xm[i] = &x[i] - &half;
        let du_dxi = derive(&fields.temperature, i);
        let k_p = eval(&fields.conductivity, &point3(&xp[0], &xp[1], &xp[2]));
        let k_m = eval(&fields.conductivity, &point3(&xm[0], &xm[1], &xm[2]));
        let g_p = eval(&du_dxi, &point4(&xp[0], &xp[1], &xp[2], t));
        let g_m = eval(&du_dxi, &point4(&xm[0], &xm[1], &xm[2], t));
        let face = &(&k_p * &g_p) - &(&k_m * &g_m);
        q_cv = &q_cv + &(&ds * &face);
    }
    q_cv = &q_cv * &inc.dt;

    let f_val = eval(&fields.source, &point4(&x[0], &x[1], &x[2], t));
    let q_ext = &(&f_val * &dv) * &inc.dt;

    let t_next = t + &inc.dt;
    let u_next = eval(&fields.temperature, &point4(&x[0], &x[1], &x[2], &t_next));
    let u_now = eval(&fields.temperature, &point4(&x[0], &x[1], &x[2], t));
    let c_val = eval(&fields.heat_capacity, &point3(&x[0], &x[1], &x[2]));
    let rho_val = eval(&fields.density, &point3(&x[0], &x[1], &x[2]));
    let q_env = &(&(&u_next - &u_now) * &(&c_val * &rho_val)) * &dv;

    let flux_rhs = &q_cv + &q_ext;
    let flux_eq_j = eq_upto(&q_env, &flux_rhs, OrderTag(inc.j));
    let flux_res = &q_env - &flux_rhs;
    let flux_residual_order = crate::ring::classify(&flux_res, ctx.params().n_max).order;

    // Field form at (x, t).
    let du_dt = derive(&fields.temperature, 3);
    let lhs_tree = fields
        .heat_capacity
        .mul(&fields.density)
        .mul(&du_dt);
    let mut div_tree = Gsf::zero();
    for i in 0..3 {
        let flux_i = fields.conductivity.mul(&derive(&fields.temperature, i));
        div_tree = div_tree.add(&derive(&flux_i, i));
    }
    let rhs_tree = div_tree.add(&fields.source);
    let lhs = eval(&lhs_tree, &point4(&x[0], &x[1], &x[2], t));
    let rhs = eval(&rhs_tree, &point4(&x[0], &x[1], &x[2], t));
    let field_eq_k = match inc.k_out {
        Some(k) => eq_upto(&lhs, &rhs, OrderTag(k)),
        None => eq_upto_exponent(&lhs, &rhs, 0.0),
    };
    let field_res = &lhs - &rhs;
    let field_residual_order = crate::ring::classify(&field_res, ctx.params().n_max).order;

    HeatVerdict {
        equivalent: flux_eq_j.holds == field_eq_k.holds,
        flux_eq_j,
        field_eq_k,
        flux_residual_order,
        field_residual_order,
    }
}

/// Run the balance over a ladder of orders; for exact solutions the
/// flux-residual order must grow as j shrinks (the numerical rendering of
/// "let j -> 0+").
pub fn heat_order_table(
    fields: &HeatFields,
    x: &[GenNum; 3],
    t: &GenNum,
    js: &[f64],
) -> Result<Vec<(f64, HeatVerdict)>, BuildError> {
    let ctx = t.ctx().clone();
    let mut out = Vec::new();
    for &j in js {
        let inc = choose_heat_increments(&ctx, j, j)?;
        out.push((j, heat_balance(fields, x, t, &inc)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ctx;

    fn manufactured_exact(ctx: &Ctx) -> HeatFields {
        // u = e^{-t} sin(x1) solves the constant-coefficient heat equation.
        let _ = ctx;
        let u = Gsf::coord(3).neg().exp().mul(&Gsf::coord(0).sin());
        HeatFields {
            heat_capacity: Gsf::one(),
            density: Gsf::one(),
            conductivity: Gsf::one(),
            temperature: u,
            source: Gsf::zero(),
        }
    }

    fn probe_point(ctx: &Ctx) -> ([GenNum; 3], GenNum) {
        (
            [
                GenNum::constant(ctx, 0.7),
                GenNum::constant(ctx, -0.2),
                GenNum::constant(ctx, 1.1),
            ],
            GenNum::constant(ctx, 0.4),
        )
    }

    #[test]
    fn increments_match_paper_choice() {
        let c = Ctx::default_identity();
        let inc = choose_heat_increments(&c, 1.0, 1.0).unwrap();
        assert!((inc.q - 14.0 / 15.0).abs() < 1e-12);
        assert!((inc.k_out.unwrap() - 15.0).abs() < 1e-9);
        for i in c.indices() {
            assert!((inc.dt.at(i) - c.rho(i).powf(1.0 / 3.0)).abs() < 1e-12);
        }
        // e = j/2 still satisfies the compatibility conditions.
        let inc2 = choose_heat_increments(&c, 0.5, 1.0).unwrap();
        assert!(inc2.k_out.is_none(), "q eats the whole budget at e = j/2");
    }

    #[test]
    fn exact_solution_passes_both_forms() {
        let c = Ctx::default_identity();
        let fields = manufactured_exact(&c);
        let (x, t) = probe_point(&c);
        let inc = choose_heat_increments(&c, 1.0, 1.0).unwrap();
        let v = heat_balance(&fields, &x, &t, &inc);
        assert!(v.flux_eq_j.holds, "flux C = {}", v.flux_eq_j.constant);
        assert!(v.field_eq_k.holds);
        assert!(v.equivalent);
    }

    #[test]
    fn perturbed_source_fails_field_form() {
        let c = Ctx::default_identity();
        let mut fields = manufactured_exact(&c);
        fields.source = Gsf::one();
        let (x, t) = probe_point(&c);
        let inc = choose_heat_increments(&c, 1.0, 1.0).unwrap();
        let v = heat_balance(&fields, &x, &t, &inc);
        assert!(!v.field_eq_k.holds, "O(1) residual cannot be =_k 0");
        assert!(!v.flux_eq_j.holds);
        assert!(v.equivalent);
    }

    #[test]
    fn axis_relabeling_symmetry() {
        // Isotropic manufactured field: swapping axes must not change the
        // flux residual beyond roundoff.
        let c = Ctx::default_identity();
        let u1 = Gsf::coord(3)
            .neg()
            .exp()
            .mul(&Gsf::coord(0).sin().mul(&Gsf::coord(1).cos()));
        let u2 = Gsf::coord(3)
            .neg()
            .exp()
            .mul(&Gsf::coord(1).sin().mul(&Gsf::coord(0).cos()));
        let mk = |u: Gsf| HeatFields {
            heat_capacity: Gsf::one(),
            density: Gsf::one(),
            conductivity: Gsf::one(),
            temperature: u,
            source: Gsf::zero(),
        };
        let inc = choose_heat_increments(&c, 1.0, 1.0).unwrap();
        let t = GenNum::constant(&c, 0.3);
        let x1 = [
            GenNum::constant(&c, 0.4),
            GenNum::constant(&c, 0.9),
            GenNum::constant(&c, 0.0),
        ];
        let x2 = [
            GenNum::constant(&c, 0.9),
            GenNum::constant(&c, 0.4),
            GenNum::constant(&c, 0.0),
        ];
        let v1 = heat_balance(&mk(u1), &x1, &t, &inc);
        let v2 = heat_balance(&mk(u2), &x2, &t, &inc);
        assert!((v1.flux_eq_j.constant - v2.flux_eq_j.constant).abs() < 1e-6);
    }

    #[test]
    fn slab_with_embedded_step_conductivity() {
        // k has a mollified jump in x1; the source is manufactured so the
        // field equation holds identically, and then the flux form must
        // also pass at the corresponding order.
        let c = Ctx::default_identity();
        let b = crate::ring::drho_pow(&c, -1.0);
        let h = crate::gsf::embed_heaviside(&b).unwrap();
        let k = Gsf::one().add(&h.compose(vec![Gsf::coord(0)]));
        let u = Gsf::coord(3).neg().exp().mul(&Gsf::coord(0).sin());
        let du_dt = derive(&u, 3);
        let mut div = Gsf::zero();
        for i in 0..3 {
            div = div.add(&derive(&k.mul(&derive(&u, i)), i));
        }
        let source = du_dt.sub(&div); // c = rho = 1
        let fields = HeatFields {
            heat_capacity: Gsf::one(),
            density: Gsf::one(),
            conductivity: k,
            temperature: u,
            source,
        };
        // Interior point away from the jump: the step layer sits at x1 = 0.
        let (x, t) = probe_point(&c);
        let inc = choose_heat_increments(&c, 1.0, 1.0).unwrap();
        let v = heat_balance(&fields, &x, &t, &inc);
        assert!(v.field_eq_k.holds);
        assert!(v.flux_eq_j.holds, "flux C = {}", v.flux_eq_j.constant);
        assert!(v.equivalent);
    }

    #[test]
    fn order_table_grows() {
        let c = Ctx::default_identity();
        let fields = manufactured_exact(&c);
        let (x, t) = probe_point(&c);
        let table = heat_order_table(&fields, &x, &t, &[1.0, 0.5, 0.25]).unwrap();
        for w in table.windows(2) {
            assert!(
                w[1].1.flux_residual_order > w[0].1.flux_residual_order,
                "{} !> {}",
                w[1].1.flux_residual_order,
                w[0].1.flux_residual_order
            );
        }
        for (_, v) in &table {
            assert!(v.flux_eq_j.holds && v.field_eq_k.holds && v.equivalent);
        }
    }
}
