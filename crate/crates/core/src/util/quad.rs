//! Adaptive Gauss–Kronrod quadrature plus fixed Gauss–Legendre panels.

use super::Lin;
use crate::error::QuadError;

// G7/K15 nodes and weights on [-1, 1], positive half; node 7 is the origin.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gk15<T: Lin>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    let mut resabs = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let pair = f1.add(f2);
        kron = kron.add(pair.scale(WGK[i]));
        resabs += WGK[i] * (f1.norm() + f2.norm());
        if i % 2 == 1 {
            gauss = gauss.add(pair.scale(WG[i / 2]));
        }
    }
    let err = kron.add(gauss.scale(-1.0)).norm() * h.abs();
    (kron.scale(h), err, resabs * h.abs())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Context value reported in errors (the eps the integral belongs to).
    pub eps: f64,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_depth: 60,
            eps: f64::NAN,
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    val: T,
    err: f64,
    depth: u32,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Adaptive integration of `f` on `[a, b]`, splitting first at `breaks`.
///
/// `breaks` carry the mollifier-scale feature edges; forcing panel
/// boundaries there keeps spikes of width `1/b_eps` from being stepped over.
pub fn adaptive<T: Lin>(
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOpts,
) -> Result<(T, f64), QuadError> {
    if a == b {
        return Ok((T::zero(), 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges: Vec<f64> = vec![lo, hi];
    for &x in breaks {
        if x > lo && x < hi {
            edges.push(x);
        }
    }
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    // Wide spans get geometric ladders toward both endpoints, so boundary
    // layers (e.g. e^{-x} on [0, rho^-1]) cannot hide between the initial
    // Kronrod nodes.
    let mut ladder = Vec::new();
    for w in edges.windows(2) {
        let width = w[1] - w[0];
        if width > 16.0 {
            let mid = 0.5 * (w[0] + w[1]);
            let mut step = width * 0.5;
            for _ in 0..60 {
                ladder.push(w[0] + step);
                ladder.push(w[1] - step);
                // Two-sided ladder around the midpoint as well, so mass
                // concentrated in the interior of a huge symmetric interval
                // (e.g. a Schwartz function on [-k, k]) is resolved too.
                if step < 0.5 * width {
                    ladder.push(mid - step);
                    ladder.push(mid + step);
                }
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
    }
    edges.extend(ladder);
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    let mut total = T::zero();
    let mut resabs = 0.0;
    let mut heap: std::collections::BinaryHeap<Panel<T>> = std::collections::BinaryHeap::new();
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (v, e, ra) = gk15(f, w[0], w[1]);
        total = total.add(v);
        resabs += ra;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            val: v,
            err: e,
            depth: 0,
        });
    }

    let tol_of = |scale: f64| (opts.rel_tol * scale).max(opts.abs_tol);
    let mut guard = 0usize;
    while err > tol_of(total.norm().max(resabs * 1e-14)) {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        let p = heap.pop().unwrap();
        if p.depth >= opts.max_depth || (p.b - p.a) < f64::EPSILON * (p.b.abs() + p.a.abs()) {
            // Cannot refine further; fail only when far off the tolerance.
            if err > 1e3 * tol_of(total.norm()) {
                return Err(QuadError {
                    eps: opts.eps,
                    a: p.a,
                    b: p.b,
                    err_est: err,
                    tol: tol_of(total.norm()),
                });
            }
            break;
        }
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1, _) = gk15(f, p.a, mid);
        let (v2, e2, _) = gk15(f, mid, p.b);
        total = total.add(p.val.scale(-1.0)).add(v1).add(v2);
        err = err - p.err + e1 + e2;
        heap.push(Panel {
            a: p.a,
            b: mid,
            val: v1,
            err: e1,
            depth: p.depth + 1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            val: v2,
            err: e2,
            depth: p.depth + 1,
        });
    }
    Ok((total.scale(sign), err))
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed composite Gauss–Legendre rule: `panels` panels of `n` points.
pub fn composite_gl<T: Lin>(f: &impl Fn(f64) -> T, a: f64, b: f64, n: usize, panels: usize) -> T {
    let (nodes, weights) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            acc = acc.add(f(c + 0.5 * h * x).scale(0.5 * h * w));
        }
    }
    acc
}
