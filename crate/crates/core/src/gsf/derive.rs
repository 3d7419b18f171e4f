//! Exact differentiation of expression trees. The derivative of a tree is a
//! tree; no finite differences anywhere.

use super::expr::{Gsf, Node, Prim};

/// Partial derivative with respect to coordinate `var`.
pub fn derive(f: &Gsf, var: usize) -> Gsf {
    match &*f.node {
        Node::Lit(_) | Node::Const(_) => Gsf::zero(),
        Node::Coord(i) => {
            if *i == var {
                Gsf::one()
            } else {
                Gsf::zero()
            }
        }
        Node::Sum(v) => {
            let mut acc = Gsf::zero();
            for g in v {
                acc = acc.add(&derive(g, var));
            }
            acc
        }
        Node::Prod(v) => {
            let mut acc = Gsf::zero();
            for (i, _) in v.iter().enumerate() {
                let mut parts: Vec<Gsf> = Vec::with_capacity(v.len());
                let mut dead = false;
                for (j, g) in v.iter().enumerate() {
                    let factor = if i == j { derive(g, var) } else { g.clone() };
                    if factor.is_zero_literal() {
                        dead = true;
                        break;
                    }
                    parts.push(factor);
                }
                if dead {
                    continue;
                }
                let mut term = parts[0].clone();
                for p in &parts[1..] {
                    term = term.mul(p);
                }
                acc = acc.add(&term);
            }
            acc
        }
        Node::Quot(a, b) => {
            let da = derive(a, var);
            let db = derive(b, var);
            let num = da.mul(b).sub(&a.mul(&db));
            num.div(&b.mul(b))
        }
        Node::Prim(p, g) => {
            let dg = derive(g, var);
            if dg.is_zero_literal() {
                return Gsf::zero();
            }
            let outer = match p {
                Prim::Sin => g.cos(),
                Prim::Cos => g.sin().neg(),
                Prim::Exp => f.clone(),
                Prim::Ln => Gsf::one().div(g),
                Prim::Sqrt => Gsf::literal(0.5).div(&g.sqrt()),
                Prim::Tanh => Gsf::one().sub(&f.mul(f)),
                Prim::Atan => Gsf::one().div(&Gsf::one().add(&g.mul(g))),
                Prim::PowF(p) => g.powf(p - 1.0).scale(*p),
                Prim::PowI(n) => {
                    if *n == 0 {
                        Gsf::zero()
                    } else {
                        g.powi(n - 1).scale(*n as f64)
                    }
                }
            };
            outer.mul(&dg)
        }
        Node::Moll { kind, order, arg } => {
            let darg = derive(arg, var);
            if darg.is_zero_literal() {
                return Gsf::zero();
            }
            Gsf::moll(*kind, order + 1, arg.clone()).mul(&darg)
        }
        Node::EmbedFn { table, order, arg } => {
            let darg = derive(arg, var);
            if darg.is_zero_literal() {
                return Gsf::zero();
            }
            Gsf::from_node(Node::EmbedFn {
                table: table.clone(),
                order: order + 1,
                arg: arg.clone(),
            })
            .mul(&darg)
        }
        Node::AntiDeriv { f: inner, c: _, arg } => {
            // d/dx int_c^{arg} f = f(arg) * arg'.
            let darg = derive(arg, var);
            if darg.is_zero_literal() {
                return Gsf::zero();
            }
            inner.compose(vec![arg.clone()]).mul(&darg)
        }
        Node::Subst { f: outer, args } => {
            let mut acc = Gsf::zero();
            for (j, a) in args.iter().enumerate() {
                let da = derive(a, var);
                if da.is_zero_literal() {
                    continue;
                }
                let dj = derive(outer, j).compose(args.clone());
                acc = acc.add(&dj.mul(&da));
            }
            acc
        }
    }
}

/// Repeated partial derivative by a multi-index.
pub fn derive_multi(f: &Gsf, alpha: &[usize]) -> Gsf {
    let mut g = f.clone();
    for (var, &count) in alpha.iter().enumerate() {
        for _ in 0..count {
            g = derive(&g, var);
        }
    }
    g
}

/// Directional derivative along the vector of coefficients `v` (one entry
/// per coordinate).
pub fn derive_along(f: &Gsf, v: &[Gsf]) -> Gsf {
    let mut acc = Gsf::zero();
    for (i, coeff) in v.iter().enumerate() {
        let d = derive(f, i);
        if d.is_zero_literal() || coeff.is_zero_literal() {
            continue;
        }
        acc = acc.add(&coeff.mul(&d));
    }
    acc
}
