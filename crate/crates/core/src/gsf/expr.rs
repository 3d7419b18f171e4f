//! Expression trees denoting nets of smooth functions. Every node carries
//! exact symbolic derivative rules, so differentiation closes the tree and
//! evaluation at a generalized point is eps-wise.

use std::sync::Arc;

use crate::error::EvalError;
use crate::mollifier::{standard_cutoff, standard_mollifier};
use crate::ring::GenNum;

use super::embed::EmbeddedFn;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Prim {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Atan,
    PowF(f64),
    PowI(i32),
}

/// Kernels from the mollifier family. The `order` field on the node counts
/// derivatives of the base kernel: `MuCum` differentiates to `Mu`, which
/// differentiates through the exact term lists.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MollKind {
    /// mu and its derivatives.
    Mu,
    /// Cumulative int_{-inf}^y mu (the Heaviside kernel).
    MuCum,
    /// The plateau cutoff chi.
    Chi,
    /// Monotone ramp: exactly 0 below -1, exactly 1 above +1.
    Ramp,
    /// Principal-value kernel, exactly 1/v in the far field.
    Vp,
}

pub(crate) enum Node {
    /// A real literal (net-independent).
    Lit(f64),
    Const(GenNum),
    Coord(usize),
    Sum(Vec<Gsf>),
    Prod(Vec<Gsf>),
    Quot(Gsf, Gsf),
    Prim(Prim, Gsf),
    Moll {
        kind: MollKind,
        order: usize,
        arg: Gsf,
    },
    EmbedFn {
        table: Arc<EmbeddedFn>,
        order: usize,
        arg: Gsf,
    },
    /// F(arg) = int_c^{arg} f(s) ds with `f` one-dimensional in coord 0.
    AntiDeriv {
        f: Gsf,
        c: GenNum,
        arg: Gsf,
    },
    /// Composition by substitution: the coordinates of `f` are replaced by
    /// `args`.
    Subst {
        f: Gsf,
        args: Vec<Gsf>,
    },
}

/// A scalar generalized smooth function. Cheap to clone.
#[derive(Clone)]
pub struct Gsf {
    pub(crate) node: Arc<Node>,
}

impl Gsf {
    pub(crate) fn from_node(node: Node) -> Self {
        Gsf {
            node: Arc::new(node),
        }
    }

    pub fn constant(value: GenNum) -> Self {
        Gsf::from_node(Node::Const(value))
    }

    pub fn literal(r: f64) -> Self {
        Gsf::from_node(Node::Lit(r))
    }

    pub fn zero() -> Self {
        Gsf::literal(0.0)
    }

    pub fn one() -> Self {
        Gsf::literal(1.0)
    }

    pub fn coord(i: usize) -> Self {
        Gsf::from_node(Node::Coord(i))
    }

    /// The identity function of one variable.
    pub fn x() -> Self {
        Gsf::coord(0)
    }

    pub(crate) fn literal_value(&self) -> Option<f64> {
        match &*self.node {
            Node::Lit(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        self.literal_value() == Some(0.0)
    }

    pub fn is_one_literal(&self) -> bool {
        self.literal_value() == Some(1.0)
    }

    pub fn add(&self, other: &Gsf) -> Gsf {
        if self.is_zero_literal() {
            return other.clone();
        }
        if other.is_zero_literal() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.literal_value(), other.literal_value()) {
            return Gsf::literal(a + b);
        }
        let mut parts = Vec::new();
        for g in [self, other] {
            match &*g.node {
                Node::Sum(v) => parts.extend(v.iter().cloned()),
                _ => parts.push(g.clone()),
            }
        }
        Gsf::from_node(Node::Sum(parts))
    }

    pub fn sub(&self, other: &Gsf) -> Gsf {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Gsf {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Gsf {
        if s == 1.0 {
            return self.clone();
        }
        if s == 0.0 {
            return Gsf::zero();
        }
        if let Some(l) = self.literal_value() {
            return Gsf::literal(l * s);
        }
        self.mul(&Gsf::literal(s))
    }

    pub fn mul(&self, other: &Gsf) -> Gsf {
        if self.is_zero_literal() || other.is_one_literal() {
            return self.clone();
        }
        if other.is_zero_literal() || self.is_one_literal() {
            return other.clone();
        }
        if let (Some(a), Some(b)) = (self.literal_value(), other.literal_value()) {
            return Gsf::literal(a * b);
        }
        let mut parts = Vec::new();
        for g in [self, other] {
            match &*g.node {
                Node::Prod(v) => parts.extend(v.iter().cloned()),
                _ => parts.push(g.clone()),
            }
        }
        Gsf::from_node(Node::Prod(parts))
    }

    pub fn div(&self, other: &Gsf) -> Gsf {
        if self.is_zero_literal() || other.is_one_literal() {
            return self.clone();
        }
        Gsf::from_node(Node::Quot(self.clone(), other.clone()))
    }

    pub fn prim(p: Prim, arg: Gsf) -> Gsf {
        Gsf::from_node(Node::Prim(p, arg))
    }

    pub fn sin(&self) -> Gsf {
        Gsf::prim(Prim::Sin, self.clone())
    }
    pub fn cos(&self) -> Gsf {
        Gsf::prim(Prim::Cos, self.clone())
    }
    pub fn exp(&self) -> Gsf {
        Gsf::prim(Prim::Exp, self.clone())
    }
    pub fn ln(&self) -> Gsf {
        Gsf::prim(Prim::Ln, self.clone())
    }
    pub fn sqrt(&self) -> Gsf {
        Gsf::prim(Prim::Sqrt, self.clone())
    }
    pub fn tanh(&self) -> Gsf {
        Gsf::prim(Prim::Tanh, self.clone())
    }
    pub fn atan(&self) -> Gsf {
        Gsf::prim(Prim::Atan, self.clone())
    }
    pub fn powi(&self, n: i32) -> Gsf {
        if n == 1 {
            return self.clone();
        }
        Gsf::prim(Prim::PowI(n), self.clone())
    }
    pub fn powf(&self, p: f64) -> Gsf {
        Gsf::prim(Prim::PowF(p), self.clone())
    }

    pub fn moll(kind: MollKind, order: usize, arg: Gsf) -> Gsf {
        Gsf::from_node(Node::Moll { kind, order, arg })
    }

    /// Compose: `self` after `args` (coordinate j of self becomes args[j]).
    pub fn compose(&self, args: Vec<Gsf>) -> Gsf {
        Gsf::from_node(Node::Subst {
            f: self.clone(),
            args,
        })
    }

    /// Largest coordinate index used plus one.
    pub fn arity(&self) -> usize {
        match &*self.node {
            Node::Lit(_) | Node::Const(_) => 0,
            Node::Coord(i) => i + 1,
            Node::Sum(v) | Node::Prod(v) => v.iter().map(|g| g.arity()).max().unwrap_or(0),
            Node::Quot(a, b) => a.arity().max(b.arity()),
            Node::Prim(_, g) | Node::Moll { arg: g, .. } | Node::EmbedFn { arg: g, .. } => {
                g.arity()
            }
            Node::AntiDeriv { arg, .. } => arg.arity(),
            Node::Subst { args, .. } => args.iter().map(|g| g.arity()).max().unwrap_or(0),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match &*self.node {
            Node::Lit(_) | Node::Const(_) => false,
            Node::Coord(i) => *i == var,
            Node::Sum(v) | Node::Prod(v) => v.iter().any(|g| g.depends_on(var)),
            Node::Quot(a, b) => a.depends_on(var) || b.depends_on(var),
            Node::Prim(_, g) | Node::Moll { arg: g, .. } | Node::EmbedFn { arg: g, .. } => {
                g.depends_on(var)
            }
            Node::AntiDeriv { arg, .. } => arg.depends_on(var),
            Node::Subst { args, .. } => args.iter().any(|g| g.depends_on(var)),
        }
    }

    /// eps-wise evaluation at grid index `i` with concrete coordinates.
    /// Domain violations propagate as NaN; use `eval_at_checked` for errors.
    pub fn eval_at(&self, i: usize, x: &[f64]) -> f64 {
        match &*self.node {
            Node::Lit(r) => *r,
            Node::Const(value) => value.at(i),
            Node::Coord(j) => x[*j],
            Node::Sum(v) => v.iter().map(|g| g.eval_at(i, x)).sum(),
            Node::Prod(v) => v.iter().map(|g| g.eval_at(i, x)).product(),
            Node::Quot(a, b) => a.eval_at(i, x) / b.eval_at(i, x),
            Node::Prim(p, g) => eval_prim(*p, g.eval_at(i, x)),
            Node::Moll { kind, order, arg } => eval_moll(*kind, *order, arg.eval_at(i, x)),
            Node::EmbedFn { table, order, arg } => table.eval(i, *order, arg.eval_at(i, x)),
            Node::AntiDeriv { f, c, arg } => {
                let hi = arg.eval_at(i, x);
                super::calculus::antideriv_value(f, c.at(i), hi, i)
            }
            Node::Subst { f, args } => {
                let inner: Vec<f64> = args.iter().map(|g| g.eval_at(i, x)).collect();
                f.eval_at(i, &inner)
            }
        }
    }

    /// Checked evaluation with a reason naming the grid point.
    pub fn eval_at_checked(&self, i: usize, eps: f64, x: &[f64]) -> Result<f64, EvalError> {
        let fail = |reason: String| EvalError {
            index: i,
            eps,
            reason,
        };
        let v = match &*self.node {
            Node::Prim(p, g) => {
                let a = g.eval_at_checked(i, eps, x)?;
                match p {
                    Prim::Ln if a <= 0.0 => {
                        return Err(fail(format!("log of non-positive argument {a}")))
                    }
                    Prim::Sqrt if a < 0.0 => {
                        return Err(fail(format!("sqrt of negative argument {a}")))
                    }
                    Prim::PowF(_) if a < 0.0 => {
                        return Err(fail(format!("fractional power of negative argument {a}")))
                    }
                    _ => {}
                }
                eval_prim(*p, a)
            }
            Node::Quot(a, b) => {
                let num = a.eval_at_checked(i, eps, x)?;
                let den = b.eval_at_checked(i, eps, x)?;
                if den == 0.0 {
                    return Err(fail("division by zero".into()));
                }
                num / den
            }
            Node::Sum(v) => {
                let mut s = 0.0;
                for g in v {
                    s += g.eval_at_checked(i, eps, x)?;
                }
                s
            }
            Node::Prod(v) => {
                let mut s = 1.0;
                for g in v {
                    s *= g.eval_at_checked(i, eps, x)?;
                }
                s
            }
            Node::Subst { f, args } => {
                let mut inner = Vec::with_capacity(args.len());
                for g in args {
                    inner.push(g.eval_at_checked(i, eps, x)?);
                }
                f.eval_at_checked(i, eps, &inner)?
            }
            _ => self.eval_at(i, x),
        };
        if v.is_nan() {
            return Err(fail("evaluation produced NaN".into()));
        }
        Ok(v)
    }
}

fn eval_prim(p: Prim, a: f64) -> f64 {
    match p {
        Prim::Sin => a.sin(),
        Prim::Cos => a.cos(),
        Prim::Exp => a.exp(),
        Prim::Ln => a.ln(),
        Prim::Sqrt => a.sqrt(),
        Prim::Tanh => a.tanh(),
        Prim::Atan => a.atan(),
        Prim::PowF(p) => a.powf(p),
        Prim::PowI(n) => a.powi(n),
    }
}

fn eval_moll(kind: MollKind, order: usize, a: f64) -> f64 {
    match kind {
        MollKind::Mu => standard_mollifier().eval(order, a),
        MollKind::MuCum => {
            if order == 0 {
                standard_mollifier().cumulative(a)
            } else {
                standard_mollifier().eval(order - 1, a)
            }
        }
        MollKind::Chi => standard_cutoff().eval(order, a),
        MollKind::Ramp => standard_cutoff().ramp(order, a),
        MollKind::Vp => standard_mollifier().vp_kernel(order, a),
    }
}
