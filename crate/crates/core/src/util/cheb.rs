//! Piecewise Chebyshev interpolants with termwise derivatives and
//! antiderivatives. Used for precomputed kernels (cumulative mollifier,
//! principal-value kernel) that must evaluate fast and differentiate
//! consistently with what `eval` returns.

#[derive(Clone, Debug)]
pub struct ChebPiece {
    pub a: f64,
    pub b: f64,
    /// Plain coefficients: f = sum coef[j] * T_j.
    pub coef: Vec<f64>,
}

impl ChebPiece {
    /// Interpolate `f` at `n` Chebyshev points of the first kind on [a, b].
    pub fn fit(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Self {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                f(mid + half * t)
            })
            .collect();
        let mut coef = vec![0.0; n];
        for (j, c) in coef.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in vals.iter().enumerate() {
                s += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coef[0] *= 0.5;
        ChebPiece { a, b, coef }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coef[1..].iter().rev() {
            let tmp = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = tmp;
        }
        t * b1 - b2 + self.coef[0]
    }

    pub fn derivative(&self) -> ChebPiece {
        let n = self.coef.len();
        let mut d = vec![0.0; n.max(1)];
        if n >= 2 {
            d[n - 2] = 2.0 * (n - 1) as f64 * self.coef[n - 1];
            for k in (0..n - 2).rev() {
                let up = if k + 2 < n - 1 { d[k + 2] } else { 0.0 };
                d[k] = up + 2.0 * (k + 1) as f64 * self.coef[k + 1];
            }
            d[0] *= 0.5;
        }
        d.truncate(n.saturating_sub(1).max(1));
        let scale = 2.0 / (self.b - self.a);
        for c in d.iter_mut() {
            *c *= scale;
        }
        ChebPiece {
            a: self.a,
            b: self.b,
            coef: d,
        }
    }

    /// Antiderivative with value 0 at the left endpoint.
    pub fn antiderivative(&self) -> ChebPiece {
        let n = self.coef.len();
        let mut int = vec![0.0; n + 1];
        for k in 1..=n {
            let prev = if k == 1 {
                2.0 * self.coef[0]
            } else {
                self.coef[k - 1]
            };
            let next = if k + 1 < n { self.coef[k + 1] } else { 0.0 };
            int[k] = (prev - next) / (2.0 * k as f64);
        }
        let half = 0.5 * (self.b - self.a);
        for c in int.iter_mut() {
            *c *= half;
        }
        let mut piece = ChebPiece {
            a: self.a,
            b: self.b,
            coef: int,
        };
        let at_a = piece.eval(self.a);
        piece.coef[0] -= at_a;
        piece
    }
}

/// Contiguous Chebyshev pieces covering [lo, hi]; evaluation clamps to the
/// domain, so the interpolant extends by its boundary values.
#[derive(Clone, Debug)]
pub struct PiecewiseCheb {
    pieces: Vec<ChebPiece>,
    lo: f64,
    hi: f64,
    step: f64,
}

impl PiecewiseCheb {
    pub fn fit(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n_pieces: usize, degree: usize) -> Self {
        let step = (hi - lo) / n_pieces as f64;
        let pieces = (0..n_pieces)
            .map(|i| {
                let a = lo + i as f64 * step;
                ChebPiece::fit(f, a, a + step, degree)
            })
            .collect();
        PiecewiseCheb {
            pieces,
            lo,
            hi,
            step,
        }
    }

    fn locate(&self, x: f64) -> usize {
        (((x - self.lo) / self.step) as usize).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.lo, self.hi);
        self.pieces[self.locate(x)].eval(x)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn derivative(&self) -> PiecewiseCheb {
        PiecewiseCheb {
            pieces: self.pieces.iter().map(|p| p.derivative()).collect(),
            lo: self.lo,
            hi: self.hi,
            step: self.step,
        }
    }

    /// Cumulative antiderivative, zero at `lo`.
    pub fn antiderivative(&self) -> PiecewiseCheb {
        let mut out = Vec::with_capacity(self.pieces.len());
        let mut offset = 0.0;
        for p in &self.pieces {
            let mut ad = p.antiderivative();
            ad.coef[0] += offset;
            offset = ad.eval(p.b);
            out.push(ad);
        }
        PiecewiseCheb {
            pieces: out,
            lo: self.lo,
            hi: self.hi,
            step: self.step,
        }
    }
}
