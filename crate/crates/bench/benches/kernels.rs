//! Hot-path benchmarks: mollifier kernels, embedded evaluation, quadrature
//! with singular features, classification, and a scenario right-hand side.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use gsf_core::gsf::{embed_delta, embed_heaviside, integrate_1d, Gsf};
use gsf_core::mollifier::standard_mollifier;
use gsf_core::ring::{classify, drho_pow, Ctx, GenNum};
use gsf_core::scenarios::PendulumCfg;

fn bench_mollifier(c: &mut Criterion) {
    let m = standard_mollifier();
    c.bench_function("mollifier_value", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for k in 0..64 {
                acc += m.eval(0, black_box(-12.0 + 0.375 * k as f64));
            }
            acc
        })
    });
    c.bench_function("mollifier_second_derivative", |b| {
        b.iter(|| m.eval(2, black_box(1.7)))
    });
    c.bench_function("heaviside_kernel", |b| {
        b.iter(|| m.cumulative(black_box(0.37)))
    });
}

fn bench_gennum(c: &mut Criterion) {
    let ctx = Ctx::default_identity();
    c.bench_function("gennum_pointwise_ops", |b| {
        b.iter(|| {
            let x = drho_pow(&ctx, 1.0);
            let y = GenNum::constant(&ctx, 2.0);
            let z = &(&x + &y) * &x.abs();
            black_box(z.values())
        })
    });
    c.bench_function("classify_power_net", |b| {
        let x = drho_pow(&ctx, 1.5);
        b.iter(|| classify(black_box(&x), 12))
    });
}

fn bench_embedded(c: &mut Criterion) {
    let ctx = Ctx::default_identity();
    let b_net = drho_pow(&ctx, -1.0);
    let delta = embed_delta(&b_net).unwrap();
    let i = ctx.len() - 1;
    c.bench_function("delta_eval_in_layer", |bch| {
        let x = 0.5 / b_net.at(i);
        bch.iter(|| delta.eval_at(i, black_box(&[x])))
    });
    c.bench_function("delta_eval_far_field", |bch| {
        bch.iter(|| delta.eval_at(i, black_box(&[0.7])))
    });
    c.bench_function("integrate_delta", |bch| {
        let a = GenNum::constant(&ctx, -0.5);
        let b2 = GenNum::constant(&ctx, 0.5);
        bch.iter(|| integrate_1d(black_box(&delta), &a, &b2).unwrap())
    });
}

fn bench_scenario_rhs(c: &mut Criterion) {
    let ctx = Ctx::default_identity();
    let cfg = PendulumCfg::default();
    let b_net = drho_pow(&ctx, -1.0);
    let h = embed_heaviside(&b_net).unwrap();
    // Same structure the pendulum solver evaluates per step.
    let theta = Gsf::coord(1);
    let lam = h
        .compose(vec![Gsf::literal(cfg.theta0).sub(&theta)])
        .scale(cfg.l1)
        .add(&Gsf::literal(cfg.l2));
    let i = ctx.len() - 1;
    c.bench_function("pendulum_length_eval", |bch| {
        bch.iter(|| lam.eval_at(i, black_box(&[0.0, 0.03, 1.0])))
    });
}

criterion_group!(
    benches,
    bench_mollifier,
    bench_gennum,
    bench_embedded,
    bench_scenario_rhs
);
criterion_main!(benches);
