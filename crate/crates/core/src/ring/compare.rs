use super::gauge::Ctx;
use super::gennum::{is_invertible, GenNum, Invertibility};

/// Restriction of the grid to a subset of indices. The finite stand-in for
/// cofinality: the mask keeps accumulating points at the fine end of the
/// grid, here read as "intersects the last quarter".
#[derive(Clone, Debug, PartialEq)]
pub struct SubpointMask {
    indices: Vec<usize>,
    grid_len: usize,
}

impl SubpointMask {
    pub fn new(mut indices: Vec<usize>, grid_len: usize) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SubpointMask { indices, grid_len }
    }

    pub fn full(grid_len: usize) -> Self {
        SubpointMask {
            indices: (0..grid_len).collect(),
            grid_len,
        }
    }

    pub fn empty(grid_len: usize) -> Self {
        SubpointMask {
            indices: Vec::new(),
            grid_len,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn cofinal(&self) -> bool {
        self.indices
            .last()
            .is_some_and(|&i| i >= self.grid_len - self.grid_len / 4)
    }

    pub fn complement(&self) -> SubpointMask {
        let inside: std::collections::HashSet<usize> = self.indices.iter().copied().collect();
        SubpointMask {
            indices: (0..self.grid_len).filter(|i| !inside.contains(i)).collect(),
            grid_len: self.grid_len,
        }
    }
}

fn tol_neg(ctx: &Ctx, i: usize) -> f64 {
    // rho^n_eq; may underflow to 0 at the fine end, which degrades to exact
    // comparison there.
    (ctx.params().n_eq as f64 * ctx.ln_rho(i)).exp()
}

/// `x <= y` up to the negligibility resolution, decided on the grid tail.
pub fn leq(x: &GenNum, y: &GenNum) -> bool {
    let ctx = x.ctx();
    ctx.tail().all(|i| x.at(i) <= y.at(i) + tol_neg(ctx, i))
}

/// Strict order: `x <= y` and `y - x` invertible at the equality resolution
/// (witness exponent capped by `n_eq`, so differences below the resolution do
/// not count as strict).
pub fn lt(x: &GenNum, y: &GenNum) -> bool {
    if !leq(x, y) {
        return false;
    }
    let d = y - x;
    strict_witness(&d).invertible
}

/// Invertibility of a comparison difference, capped at the equality
/// resolution n_eq rather than the moderateness cap.
pub fn strict_witness(d: &GenNum) -> Invertibility {
    let ctx = d.ctx().clone();
    let n_eq = ctx.params().n_eq;
    'witness: for m in 1..=n_eq {
        for i in ctx.tail() {
            if !(d.at(i).abs().ln() > m as f64 * ctx.ln_rho(i)) {
                continue 'witness;
            }
        }
        return Invertibility {
            invertible: true,
            witness_m: Some(m),
            inconclusive: false,
        };
    }
    Invertibility {
        invertible: false,
        witness_m: None,
        inconclusive: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    Leq,
    Geq,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct ComparisonDecomposition {
    pub relation: Relation,
    /// The mask `L` with `x >=_L y` (deadband counts as equality and lands in
    /// `L`); for global relations this is the full grid.
    pub mask: SubpointMask,
    /// Complement `L^c` with `x <=_{L^c} y` strictly.
    pub complement: SubpointMask,
}

/// Quadrichotomy on the grid: either a global relation holds, or the grid is
/// partitioned into two masks with opposite strict signs, both reported with
/// their cofinality.
pub fn decompose_comparison(x: &GenNum, y: &GenNum) -> ComparisonDecomposition {
    let ctx = x.ctx().clone();
    let n = ctx.len();
    let mut ge = Vec::new();
    let mut strict_neg = Vec::new();
    let mut any_strict_pos = false;
    for i in ctx.indices() {
        let d = x.at(i) - y.at(i);
        let tol = tol_neg(&ctx, i);
        if d < -tol {
            strict_neg.push(i);
        } else {
            if d > tol {
                any_strict_pos = true;
            }
            ge.push(i);
        }
    }
    if strict_neg.is_empty() && !any_strict_pos {
        return ComparisonDecomposition {
            relation: Relation::Equal,
            mask: SubpointMask::full(n),
            complement: SubpointMask::empty(n),
        };
    }
    if strict_neg.is_empty() {
        return ComparisonDecomposition {
            relation: Relation::Geq,
            mask: SubpointMask::full(n),
            complement: SubpointMask::empty(n),
        };
    }
    if !any_strict_pos {
        return ComparisonDecomposition {
            relation: Relation::Leq,
            mask: SubpointMask::full(n),
            complement: SubpointMask::empty(n),
        };
    }
    ComparisonDecomposition {
        relation: Relation::Mixed,
        mask: SubpointMask::new(ge, n),
        complement: SubpointMask::new(strict_neg, n),
    }
}

/// Invertible elements are dense: returns `k` with `|k - h| < delta` and `k`
/// invertible, by bumping the small values of `h` to `rho^m` with `m` one
/// past delta's witness.
pub fn nudge_invertible(h: &GenNum, delta: &GenNum) -> GenNum {
    let w = is_invertible(delta);
    assert!(
        w.invertible && leq(&GenNum::constant(delta.ctx(), 0.0), delta),
        "delta must be positive invertible"
    );
    let m = (w.witness_m.unwrap() + 1) as f64;
    let h = h.clone();
    let ctx = h.ctx().clone();
    let cc = ctx.clone();
    GenNum::from_indexed(&ctx, move |i, _| {
        let floor = (m * cc.ln_rho(i)).exp();
        let v = h.at(i);
        if v.abs() >= floor {
            v
        } else {
            floor
        }
    })
}

/// Membership in the internal interval `[[a_eps, b_eps]]`: the distance net
/// must vanish at the equality resolution `n_eq`.
pub fn in_internal_interval(x: &GenNum, a: &GenNum, b: &GenNum) -> bool {
    let ctx = x.ctx();
    let n_eq = ctx.params().n_eq as f64;
    ctx.tail().all(|i| {
        let d = (a.at(i) - x.at(i)).max(x.at(i) - b.at(i)).max(0.0);
        d == 0.0 || d.ln() <= n_eq * ctx.ln_rho(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::gennum::{drho, drho_pow, GenNum};
    use crate::ring::Ctx;

    fn c() -> Ctx {
        Ctx::default_identity()
    }

    #[test]
    fn order_comparisons() {
        let ctx = c();
        let d = drho(&ctx);
        let d2 = drho_pow(&ctx, 2.0);
        let zero = GenNum::constant(&ctx, 0.0);
        assert!(leq(&d2, &d));
        assert!(lt(&zero, &d), "drho is a positive invertible infinitesimal");
        assert!(!lt(&d, &zero));
    }

    #[test]
    fn differences_below_resolution_are_not_strict() {
        let ctx = c();
        let x = GenNum::constant(&ctx, 1.0);
        let bump = drho_pow(&ctx, (ctx.params().n_eq + 2) as f64);
        let y = &x + &bump;
        assert!(leq(&x, &y));
        assert!(!lt(&x, &y));
    }

    #[test]
    fn lt_implies_leq_and_asymmetry() {
        let ctx = c();
        let x = drho(&ctx);
        let y = GenNum::constant(&ctx, 0.5);
        assert!(lt(&x, &y) && leq(&x, &y));
        assert!(!lt(&y, &x));
    }

    #[test]
    fn decompose_global_and_mixed() {
        let ctx = c();
        let zero = GenNum::constant(&ctx, 0.0);
        let d = drho(&ctx);
        let dec = decompose_comparison(&zero, &d);
        assert_eq!(dec.relation, Relation::Leq);
        assert_eq!(dec.mask.len(), ctx.len());

        let osc = GenNum::from_indexed(&ctx, {
            let cc = ctx.clone();
            move |i, e| (1.0 / e).sin() * cc.rho(i)
        });
        let dec = decompose_comparison(&osc, &zero);
        assert_eq!(dec.relation, Relation::Mixed);
        assert!(dec.mask.cofinal() && dec.complement.cofinal());
        assert_eq!(dec.mask.len() + dec.complement.len(), ctx.len());

        let x = GenNum::constant(&ctx, 2.0);
        let dec = decompose_comparison(&x, &x.clone());
        assert_eq!(dec.relation, Relation::Equal);
        assert!(dec.complement.is_empty());
    }

    #[test]
    fn mask_partitions_grid() {
        let m = SubpointMask::new(vec![0, 3, 5], 8);
        let comp = m.complement();
        assert_eq!(comp.indices(), &[1, 2, 4, 6, 7]);
    }

    #[test]
    fn nudging_makes_things_invertible() {
        let ctx = c();
        let d = drho(&ctx);
        let zero = GenNum::constant(&ctx, 0.0);
        let k = nudge_invertible(&zero, &d);
        assert!(is_invertible(&k).invertible);
        assert!(lt(&(&k - &zero).abs(), &d));

        let one = GenNum::constant(&ctx, 1.0);
        let k1 = nudge_invertible(&one, &d);
        for i in ctx.indices() {
            assert_eq!(k1.at(i), 1.0);
        }

        let alt = GenNum::from_indexed(&ctx, {
            let cc = ctx.clone();
            move |i, _| if i % 2 == 0 { 0.0 } else { cc.rho(i) }
        });
        let ka = nudge_invertible(&alt, &d);
        assert!(is_invertible(&ka).invertible);
    }

    #[test]
    fn interval_membership() {
        let ctx = c();
        let a = GenNum::constant(&ctx, -1.0);
        let b = GenNum::constant(&ctx, 2.0);
        let inside = GenNum::constant(&ctx, 0.5);
        assert!(in_internal_interval(&inside, &a, &b));
        let outside = GenNum::constant(&ctx, -1.5);
        assert!(!in_internal_interval(&outside, &a, &b));
        let shaved = &a - &drho_pow(&ctx, (ctx.params().n_eq + 3) as f64);
        assert!(in_internal_interval(&shaved, &a, &b));
        let mid = (&a + &b).scale(0.5);
        assert!(in_internal_interval(&mid, &a, &b));
    }
}
