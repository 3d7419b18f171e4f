//! Natural cubic spline on non-uniform knots, with first and second
//! derivative evaluation. Backs the sampled-convolution tables.

#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 3, "spline needs at least 3 knots");
        assert_eq!(n, y.len());
        // Tridiagonal system for natural boundary conditions.
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 1.0;
        b[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        // Thomas algorithm.
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c[0] / b[0];
        dp[0] = d[0] / b[0];
        for i in 1..n {
            let denom = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / denom;
            dp[i] = (d[i] - a[i] * dp[i - 1]) / denom;
        }
        let mut m = vec![0.0; n];
        m[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = dp[i] - cp[i] * m[i + 1];
        }
        CubicSpline { x, y, m }
    }

    fn seg(&self, t: f64) -> usize {
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// Value and the first `orders` derivatives (orders <= 2).
    pub fn eval(&self, t: f64, order: usize) -> f64 {
        let t = t.clamp(self.x[0], *self.x.last().unwrap());
        let i = self.seg(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (self.x[i + 1] - t) / h;
        let v = (t - self.x[i]) / h;
        match order {
            0 => {
                u * self.y[i]
                    + v * self.y[i + 1]
                    + ((u * u * u - u) * self.m[i] + (v * v * v - v) * self.m[i + 1]) * h * h / 6.0
            }
            1 => {
                (self.y[i + 1] - self.y[i]) / h
                    + ((3.0 * v * v - 1.0) * self.m[i + 1] - (3.0 * u * u - 1.0) * self.m[i]) * h
                        / 6.0
            }
            2 => u * self.m[i] + v * self.m[i + 1],
            _ => panic!("cubic spline supports derivatives up to order 2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 / 199.0 * 3.0).collect();
        let y: Vec<f64> = x.iter().map(|&t| (2.0 * t).sin()).collect();
        let s = CubicSpline::new(x, y);
        for i in 0..50 {
            let t = 0.1 + i as f64 * 0.055;
            assert!((s.eval(t, 0) - (2.0 * t).sin()).abs() < 2e-7);
            assert!((s.eval(t, 1) - 2.0 * (2.0 * t).cos()).abs() < 1e-4);
        }
    }
}
