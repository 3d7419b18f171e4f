use std::fmt;
use std::sync::Arc;

use crate::error::RingError;

/// The infinitesimal net `eps -> rho_eps` that sets the scale of
/// infinitesimals. `identity` is `rho = eps`, `exp_inv` is `rho = e^{-1/eps}`.
#[derive(Clone)]
pub struct Gauge {
    kind: GaugeKind,
    custom: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GaugeKind {
    Identity,
    ExpInv,
    Custom,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gauge({:?})", self.kind)
    }
}

impl Gauge {
    pub fn identity() -> Self {
        Gauge {
            kind: GaugeKind::Identity,
            custom: None,
        }
    }

    pub fn exp_inv() -> Self {
        Gauge {
            kind: GaugeKind::ExpInv,
            custom: None,
        }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Gauge {
            kind: GaugeKind::Custom,
            custom: Some(Arc::new(f)),
        }
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn rho(&self, eps: f64) -> f64 {
        match self.kind {
            GaugeKind::Identity => eps,
            GaugeKind::ExpInv => (-1.0 / eps).exp(),
            GaugeKind::Custom => (self.custom.as_ref().unwrap())(eps),
        }
    }

    /// `ln rho_eps` in closed form where possible. All order arithmetic runs
    /// in the log domain so that gauges like `e^{-1/eps}` never overflow.
    pub fn ln_rho(&self, eps: f64) -> f64 {
        match self.kind {
            GaugeKind::Identity => eps.ln(),
            GaugeKind::ExpInv => -1.0 / eps,
            GaugeKind::Custom => (self.custom.as_ref().unwrap())(eps).ln(),
        }
    }
}

/// Finite decreasing stand-in for "for eps small": all nets are sampled here.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsGrid {
    samples: Vec<f64>,
}

impl EpsGrid {
    pub const MIN_LEN: usize = 8;

    pub fn new(samples: Vec<f64>) -> Result<Self, RingError> {
        if samples.len() < Self::MIN_LEN {
            return Err(RingError::GridTooShort {
                min: Self::MIN_LEN,
                got: samples.len(),
            });
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                return Err(RingError::BadGrid { index: i + 1 });
            }
        }
        for (i, &e) in samples.iter().enumerate() {
            if !(e > 0.0 && e <= 1.0) {
                return Err(RingError::BadGrid { index: i });
            }
        }
        Ok(EpsGrid { samples })
    }

    /// `eps_k = eps0 * ratio^k`, k = 0..n.
    pub fn geometric(eps0: f64, ratio: f64, n: usize) -> Result<Self, RingError> {
        let samples = (0..n).map(|k| eps0 * ratio.powi(k as i32)).collect();
        EpsGrid::new(samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn eps(&self, i: usize) -> f64 {
        self.samples[i]
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Decidability thresholds. Every boolean the ring reports is relative to
/// these exponents; they ship with the context so answers are reproducible.
#[derive(Clone, Copy, Debug)]
pub struct RingParams {
    /// Negligibility resolution: equality/<= are decided up to `rho^n_eq`.
    pub n_eq: u32,
    /// Moderateness cap for classification.
    pub n_max: u32,
    /// Invertibility witness cap.
    pub m_max: u32,
    /// Least-squares residual separating clean power behavior.
    pub fit_residual_max: f64,
    /// Convergence tolerance of near-standard-part extrapolation.
    pub tol_std: f64,
    /// Bounded-ratio constant cap for order-tagged equality.
    pub c_max: f64,
    /// Fraction of the grid (from the coarse end) excluded from tail tests.
    pub tail_fraction: f64,
    /// Slope below which a decaying net is flagged "far from zero".
    pub far_slope: f64,
}

impl Default for RingParams {
    fn default() -> Self {
        RingParams {
            n_eq: 8,
            n_max: 12,
            m_max: 12,
            fit_residual_max: 0.15,
            tol_std: 1e-6,
            c_max: 1e3,
            tail_fraction: 0.5,
            far_slope: 0.2,
        }
    }
}

struct CtxInner {
    gauge: Gauge,
    grid: EpsGrid,
    params: RingParams,
    rho: Vec<f64>,
    ln_rho: Vec<f64>,
}

/// Shared evaluation context: gauge + grid + decidability parameters.
/// Cheap to clone; all generalized numbers hold one.
#[derive(Clone)]
pub struct Ctx(Arc<CtxInner>);

impl fmt::Debug for Ctx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Ctx({:?}, n={}, eps0={}, floor={:.3e})",
            self.0.gauge.kind,
            self.len(),
            self.eps(0),
            self.eps(self.len() - 1)
        )
    }
}

impl Ctx {
    pub fn new(gauge: Gauge, grid: EpsGrid, params: RingParams) -> Result<Self, RingError> {
        let rho: Vec<f64> = grid.samples().iter().map(|&e| gauge.rho(e)).collect();
        let ln_rho: Vec<f64> = grid.samples().iter().map(|&e| gauge.ln_rho(e)).collect();
        for (i, (&r, &e)) in rho.iter().zip(grid.samples()).enumerate() {
            // rho may underflow to 0 at the fine end for steep gauges; the
            // log-domain value stays informative, so only reject values that
            // are genuinely out of range at representable scale.
            if !(r >= 0.0 && r <= 1.0) || !ln_rho[i].is_finite() && r > 0.0 {
                return Err(RingError::GaugeOutOfRange { eps: e, rho: r });
            }
        }
        for i in 1..rho.len() {
            if gauge.kind() == GaugeKind::Custom && !(ln_rho[i] < ln_rho[i - 1]) {
                return Err(RingError::NonMonotoneGauge {
                    eps_hi: grid.eps(i - 1),
                    eps_lo: grid.eps(i),
                    rho_hi: rho[i - 1],
                    rho_lo: rho[i],
                });
            }
        }
        Ok(Ctx(Arc::new(CtxInner {
            gauge,
            grid,
            params,
            rho,
            ln_rho,
        })))
    }

    /// Default grid for the identity gauge: 24 geometric points from 0.5,
    /// ratio 0.5 (floor ~6e-8). Slope fits stay well conditioned in f64.
    pub fn default_identity() -> Self {
        Ctx::new(
            Gauge::identity(),
            EpsGrid::geometric(0.5, 0.5, 24).unwrap(),
            RingParams::default(),
        )
        .unwrap()
    }

    /// Default grid for the `e^{-1/eps}` gauge. The floor is chosen so that
    /// moderate quantities (up to `rho^-1`) stay inside f64 range.
    pub fn default_exp_inv() -> Self {
        Ctx::new(
            Gauge::exp_inv(),
            EpsGrid::geometric(0.5, 0.82, 24).unwrap(),
            RingParams::default(),
        )
        .unwrap()
    }

    pub fn default_for(kind: GaugeKind) -> Self {
        match kind {
            GaugeKind::Identity => Ctx::default_identity(),
            GaugeKind::ExpInv => Ctx::default_exp_inv(),
            GaugeKind::Custom => panic!("custom gauges need an explicit grid"),
        }
    }

    pub fn gauge(&self) -> &Gauge {
        &self.0.gauge
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.0.grid
    }

    pub fn params(&self) -> &RingParams {
        &self.0.params
    }

    pub fn len(&self) -> usize {
        self.0.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eps(&self, i: usize) -> f64 {
        self.0.grid.eps(i)
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.0.rho[i]
    }

    pub fn ln_rho(&self, i: usize) -> f64 {
        self.0.ln_rho[i]
    }

    /// First index of the asymptotic tail on which order statements are
    /// decided.
    pub fn tail_start(&self) -> usize {
        ((self.len() as f64) * self.0.params.tail_fraction) as usize
    }

    pub fn tail(&self) -> std::ops::Range<usize> {
        self.tail_start()..self.len()
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn same(&self, other: &Ctx) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.grid == other.0.grid && self.0.gauge.kind == other.0.gauge.kind)
    }
}

/// Gauge construction per the spec surface: identity and exp_inv are exact
/// closed forms; custom evaluators are validated on the grid.
pub fn make_gauge(kind: GaugeKind) -> Gauge {
    match kind {
        GaugeKind::Identity => Gauge::identity(),
        GaugeKind::ExpInv => Gauge::exp_inv(),
        GaugeKind::Custom => panic!("use Gauge::custom with an evaluator"),
    }
}
