//! Truncated Taylor jets: arithmetic on series coefficients
//! `c[i] = f^(i)(x0)/i!` up to a fixed order. Powers the exact derivative
//! evaluators of the smooth cutoff and any bump-type construction.

#[derive(Clone, Debug)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// k-th derivative value (not divided by k!).
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for j in 0..k {
                s -= c[j] * o.c[k - j];
            }
            c[k] = s / o.c[0];
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.order()).div(self)
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * g[k - j];
            }
            g[k] = s / k as f64;
        }
        Jet { c: g }
    }

    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].ln();
        for k in 1..n {
            let mut s = self.c[k] * k as f64;
            for j in 1..k {
                s -= j as f64 * g[j] * self.c[k - j];
            }
            g[k] = s / (k as f64 * self.c[0]);
        }
        Jet { c: g }
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut s = self.c[k];
            for j in 1..k {
                s -= g[j] * g[k - j];
            }
            g[k] = s / (2.0 * g[0]);
        }
        Jet { c: g }
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..n {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for j in 1..=k {
                sa += j as f64 * self.c[j] * c[k - j];
                ca += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = sa / k as f64;
            c[k] = -ca / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn atan(&self) -> Jet {
        let n = self.c.len();
        // g' = f' / (1 + f^2)
        let denom = Jet::constant(1.0, self.order()).add(&self.mul(self));
        let r = denom.recip();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].atan();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * r.c[k - j];
            }
            g[k] = s / k as f64;
        }
        Jet { c: g }
    }

    pub fn tanh(&self) -> Jet {
        // Stable via e^{-2|f|}: tanh(f) = sign * (1 - u) / (1 + u), u = e^{-2|f|}.
        let sign = if self.c[0] >= 0.0 { 1.0 } else { -1.0 };
        let af = self.scale(sign);
        let u = af.scale(-2.0).exp();
        let one = Jet::constant(1.0, self.order());
        one.sub(&u).div(&one.add(&u)).scale(sign)
    }

    pub fn powf(&self, p: f64) -> Jet {
        self.ln().scale(p).exp()
    }

    pub fn powi(&self, mut n: u32) -> Jet {
        let mut acc = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivatives() {
        let x = Jet::variable(0.7, 6);
        let g = x.exp();
        for k in 0..=6 {
            assert!((g.derivative(k) - 0.7f64.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_chain() {
        // f(x) = exp(-1/x) at x=0.5: f' = f / x^2.
        let x = Jet::variable(0.5, 4);
        let f = x.recip().neg().exp();
        let f0 = (-2.0f64).exp();
        assert!((f.derivative(0) - f0).abs() < 1e-14);
        assert!((f.derivative(1) - f0 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn trig_and_atan() {
        let x = Jet::variable(0.3, 5);
        let (s, c) = x.sin_cos();
        assert!((s.derivative(1) - 0.3f64.cos()).abs() < 1e-14);
        assert!((c.derivative(1) + 0.3f64.sin()).abs() < 1e-14);
        let a = x.atan();
        assert!((a.derivative(1) - 1.0 / 1.09).abs() < 1e-13);
    }

    #[test]
    fn tanh_matches_closed_form() {
        for &x0 in &[-30.0, -0.4, 0.0, 0.4, 30.0] {
            let t = Jet::variable(x0, 3).tanh();
            assert!((t.derivative(0) - x0.tanh()).abs() < 1e-14);
            let sech2 = 1.0 - x0.tanh() * x0.tanh();
            assert!((t.derivative(1) - sech2).abs() < 1e-12);
        }
    }
}
