use std::fmt;
use std::sync::{Arc, OnceLock};

use super::gauge::Ctx;
use crate::error::RingError;

enum Net {
    Fn(Box<dyn Fn(f64) -> f64 + Send + Sync>),
    Indexed(Box<dyn Fn(usize, f64) -> f64 + Send + Sync>),
    Values(Vec<f64>),
}

struct Imp {
    net: Net,
    cache: Box<[OnceLock<f64>]>,
}

/// A generalized number: an eps-parametrized net of reals with lazy,
/// per-grid-point cached evaluation. Pure nets make evaluation deterministic;
/// a filled cache entry is immutable, so values can be shared and filled
/// concurrently for distinct indices.
#[derive(Clone)]
pub struct GenNum {
    ctx: Ctx,
    imp: Arc<Imp>,
}

impl fmt::Debug for GenNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.ctx.len();
        write!(
            f,
            "GenNum[{}..{}; head={:.6e}, tail={:.6e}]",
            0,
            n,
            self.at(0),
            self.at(n - 1)
        )
    }
}

impl GenNum {
    fn build(ctx: Ctx, net: Net) -> Self {
        let cache = (0..ctx.len()).map(|_| OnceLock::new()).collect();
        GenNum {
            ctx,
            imp: Arc::new(Imp { net, cache }),
        }
    }

    pub fn from_fn(ctx: &Ctx, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GenNum::build(ctx.clone(), Net::Fn(Box::new(f)))
    }

    pub fn from_indexed(ctx: &Ctx, f: impl Fn(usize, f64) -> f64 + Send + Sync + 'static) -> Self {
        GenNum::build(ctx.clone(), Net::Indexed(Box::new(f)))
    }

    pub fn from_values(ctx: &Ctx, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), ctx.len(), "value net length != grid length");
        GenNum::build(ctx.clone(), Net::Values(values))
    }

    /// The constant net of a real number.
    pub fn constant(ctx: &Ctx, r: f64) -> Self {
        GenNum::build(ctx.clone(), Net::Fn(Box::new(move |_| r)))
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    /// Evaluate at grid index `i` (cached).
    pub fn at(&self, i: usize) -> f64 {
        *self.imp.cache[i].get_or_init(|| match &self.imp.net {
            Net::Fn(f) => f(self.ctx.eps(i)),
            Net::Indexed(f) => f(i, self.ctx.eps(i)),
            Net::Values(v) => v[i],
        })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.ctx.len()).map(|i| self.at(i)).collect()
    }

    fn same_ctx(&self, other: &GenNum) {
        assert!(
            self.ctx.same(&other.ctx),
            "{}",
            RingError::CtxMismatch.to_string()
        );
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> GenNum {
        let a = self.clone();
        GenNum::from_indexed(&self.ctx, move |i, _| f(a.at(i)))
    }

    pub fn zip(&self, other: &GenNum, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> GenNum {
        self.same_ctx(other);
        let a = self.clone();
        let b = other.clone();
        GenNum::from_indexed(&self.ctx, move |i, _| f(a.at(i), b.at(i)))
    }

    pub fn abs(&self) -> GenNum {
        self.map(f64::abs)
    }

    /// Pointwise infimum `[min(x_eps, y_eps)]`.
    pub fn inf(&self, other: &GenNum) -> GenNum {
        self.zip(other, f64::min)
    }

    /// Pointwise supremum `[max(x_eps, y_eps)]`.
    pub fn sup(&self, other: &GenNum) -> GenNum {
        self.zip(other, f64::max)
    }

    pub fn powi(&self, n: i32) -> GenNum {
        self.map(move |v| v.powi(n))
    }

    pub fn powf(&self, p: f64) -> GenNum {
        self.map(move |v| v.powf(p))
    }

    pub fn sqrt(&self) -> GenNum {
        self.map(f64::sqrt)
    }

    pub fn exp(&self) -> GenNum {
        self.map(f64::exp)
    }

    pub fn ln(&self) -> GenNum {
        self.map(f64::ln)
    }

    pub fn scale(&self, s: f64) -> GenNum {
        self.map(move |v| v * s)
    }

    pub fn add_real(&self, r: f64) -> GenNum {
        self.map(move |v| v + r)
    }

    /// Division guarded by invertibility: a non-invertible divisor is an
    /// error rather than NaN propagation.
    pub fn try_div(&self, rhs: &GenNum) -> Result<GenNum, RingError> {
        self.same_ctx(rhs);
        let w = is_invertible(rhs);
        if !w.invertible {
            return Err(RingError::NotInvertible);
        }
        Ok(self.zip(rhs, |a, b| a / b))
    }

    pub fn recip(&self) -> Result<GenNum, RingError> {
        GenNum::constant(&self.ctx, 1.0).try_div(self)
    }
}

impl std::ops::Add for &GenNum {
    type Output = GenNum;
    fn add(self, rhs: &GenNum) -> GenNum {
        self.zip(rhs, |a, b| a + b)
    }
}

impl std::ops::Sub for &GenNum {
    type Output = GenNum;
    fn sub(self, rhs: &GenNum) -> GenNum {
        self.zip(rhs, |a, b| a - b)
    }
}

impl std::ops::Mul for &GenNum {
    type Output = GenNum;
    fn mul(self, rhs: &GenNum) -> GenNum {
        self.zip(rhs, |a, b| a * b)
    }
}

impl std::ops::Neg for &GenNum {
    type Output = GenNum;
    fn neg(self) -> GenNum {
        self.map(|a| -a)
    }
}

impl std::ops::Add for GenNum {
    type Output = GenNum;
    fn add(self, rhs: GenNum) -> GenNum {
        &self + &rhs
    }
}

impl std::ops::Sub for GenNum {
    type Output = GenNum;
    fn sub(self, rhs: GenNum) -> GenNum {
        &self - &rhs
    }
}

impl std::ops::Mul for GenNum {
    type Output = GenNum;
    fn mul(self, rhs: GenNum) -> GenNum {
        &self * &rhs
    }
}

impl std::ops::Neg for GenNum {
    type Output = GenNum;
    fn neg(self) -> GenNum {
        -&self
    }
}

/// `drho = [rho_eps]`, the canonical positive invertible infinitesimal.
pub fn drho(ctx: &Ctx) -> GenNum {
    let c = ctx.clone();
    GenNum::from_indexed(ctx, move |i, _| c.rho(i))
}

/// `drho^a`. Integer exponents use exact floating powers (so that e.g.
/// `drho^-1` is bit-exact on power-of-two grids and lattice points `k/b`
/// are exactly representable); general exponents go through the log domain
/// so steep gauges stay representable.
pub fn drho_pow(ctx: &Ctx, a: f64) -> GenNum {
    let c = ctx.clone();
    if a.fract() == 0.0 && a.abs() <= 64.0 {
        let n = a as i32;
        return GenNum::from_indexed(ctx, move |i, _| c.rho(i).powi(n));
    }
    GenNum::from_indexed(ctx, move |i, _| (a * c.ln_rho(i)).exp())
}

/// The raw net `eps -> eps`, independent of the gauge.
pub fn eps_net(ctx: &Ctx) -> GenNum {
    GenNum::from_fn(ctx, |e| e)
}

/// Invertibility verdict with the witness exponent `m` of `|x_eps| > rho^m`.
#[derive(Clone, Copy, Debug)]
pub struct Invertibility {
    pub invertible: bool,
    pub witness_m: Option<u32>,
    /// Set when the failure is not explained by negligibility: the net mixes
    /// scales across the grid and a subpoint decomposition applies.
    pub inconclusive: bool,
}

/// `x` is invertible iff `|x_eps| > rho_eps^m` beyond the tail start for
/// some witness `m <= m_max`.
pub fn is_invertible(x: &GenNum) -> Invertibility {
    let ctx = x.ctx().clone();
    let p = *ctx.params();
    'witness: for m in 1..=p.m_max {
        for i in ctx.tail() {
            let v = x.at(i).abs();
            if !(v.ln() > m as f64 * ctx.ln_rho(i)) {
                continue 'witness;
            }
        }
        return Invertibility {
            invertible: true,
            witness_m: Some(m),
            inconclusive: false,
        };
    }
    // Distinguish "provably ~ 0 at resolution n_max" from mixed scales.
    let negligible = ctx.tail().all(|i| {
        let v = x.at(i).abs();
        v == 0.0 || v.ln() <= p.n_max as f64 * ctx.ln_rho(i)
    });
    Invertibility {
        invertible: false,
        witness_m: None,
        inconclusive: !negligible,
    }
}
