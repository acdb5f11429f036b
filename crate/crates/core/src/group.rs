//! Discrete groups that act on the unit spaces of the desk models:
//! Z, Z^2, the discrete Heisenberg group H(Z), finite cyclic groups and
//! arbitrary finite groups given by a multiplication table.

use crate::error::{Error, Result};
use std::sync::Arc;

/// A group element, tagged by the lattice it lives in. Ordered so that
/// kernel supports and arrow tables iterate deterministically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum GroupElem {
    Z(i64),
    Z2(i64, i64),
    /// Discrete Heisenberg group: (a1,a2,a3)(b1,b2,b3) = (a1+b1, a2+b2, a3+b3+a1*b2).
    Heis(i64, i64, i64),
    Cyclic(u32),
    Fin(u32),
}

impl std::fmt::Display for GroupElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupElem::Z(a) => write!(f, "{a}"),
            GroupElem::Z2(a, b) => write!(f, "({a},{b})"),
            GroupElem::Heis(a, b, c) => write!(f, "({a},{b},{c})"),
            GroupElem::Cyclic(k) => write!(f, "{k}"),
            GroupElem::Fin(k) => write!(f, "g{k}"),
        }
    }
}

/// Multiplication table of a finite group; element 0 is the identity.
#[derive(Debug)]
pub struct FiniteGroupTable {
    pub order: u32,
    /// table[a*order + b] = a*b
    pub table: Vec<u32>,
    pub inverse: Vec<u32>,
}

impl FiniteGroupTable {
    pub fn new(order: u32, table: Vec<u32>) -> Result<Self> {
        let n = order as usize;
        if table.len() != n * n {
            return Err(Error::InvalidInput("group table size mismatch".into()));
        }
        let mut inverse = vec![u32::MAX; n];
        for a in 0..n {
            if table[a * n] != a as u32 || table[a] != a as u32 {
                return Err(Error::InvalidInput("element 0 is not an identity".into()));
            }
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inverse[a] = b as u32;
                }
            }
        }
        if inverse.iter().any(|&i| i == u32::MAX) {
            return Err(Error::InvalidInput("group table has a non-invertible element".into()));
        }
        Ok(FiniteGroupTable { order, table, inverse })
    }
}

/// Group descriptor: the arithmetic used to compose arrow labels.
#[derive(Clone, Debug)]
pub enum GroupDesc {
    Z,
    Z2,
    Heisenberg,
    Cyclic(u32),
    Finite(Arc<FiniteGroupTable>),
}

impl GroupDesc {
    pub fn identity(&self) -> GroupElem {
        match self {
            GroupDesc::Z => GroupElem::Z(0),
            GroupDesc::Z2 => GroupElem::Z2(0, 0),
            GroupDesc::Heisenberg => GroupElem::Heis(0, 0, 0),
            GroupDesc::Cyclic(_) => GroupElem::Cyclic(0),
            GroupDesc::Finite(_) => GroupElem::Fin(0),
        }
    }

    /// Product a*b.
    pub fn mul(&self, a: GroupElem, b: GroupElem) -> GroupElem {
        match (self, a, b) {
            (GroupDesc::Z, GroupElem::Z(x), GroupElem::Z(y)) => GroupElem::Z(x + y),
            (GroupDesc::Z2, GroupElem::Z2(x1, x2), GroupElem::Z2(y1, y2)) => {
                GroupElem::Z2(x1 + y1, x2 + y2)
            }
            (GroupDesc::Heisenberg, GroupElem::Heis(a1, a2, a3), GroupElem::Heis(b1, b2, b3)) => {
                GroupElem::Heis(a1 + b1, a2 + b2, a3 + b3 + a1 * b2)
            }
            (GroupDesc::Cyclic(m), GroupElem::Cyclic(x), GroupElem::Cyclic(y)) => {
                GroupElem::Cyclic((x + y) % m)
            }
            (GroupDesc::Finite(t), GroupElem::Fin(x), GroupElem::Fin(y)) => {
                GroupElem::Fin(t.table[(x * t.order + y) as usize])
            }
            _ => panic!("group element does not belong to this group"),
        }
    }

    pub fn inv(&self, a: GroupElem) -> GroupElem {
        match (self, a) {
            (GroupDesc::Z, GroupElem::Z(x)) => GroupElem::Z(-x),
            (GroupDesc::Z2, GroupElem::Z2(x1, x2)) => GroupElem::Z2(-x1, -x2),
            (GroupDesc::Heisenberg, GroupElem::Heis(a1, a2, a3)) => {
                GroupElem::Heis(-a1, -a2, -a3 + a1 * a2)
            }
            (GroupDesc::Cyclic(m), GroupElem::Cyclic(x)) => GroupElem::Cyclic((m - x) % m),
            (GroupDesc::Finite(t), GroupElem::Fin(x)) => GroupElem::Fin(t.inverse[x as usize]),
            _ => panic!("group element does not belong to this group"),
        }
    }

    /// Sup-norm of a lattice element; 0 for finite groups.
    pub fn norm(&self, a: GroupElem) -> i64 {
        match a {
            GroupElem::Z(x) => x.abs(),
            GroupElem::Z2(x1, x2) => x1.abs().max(x2.abs()),
            GroupElem::Heis(a1, a2, a3) => a1.abs().max(a2.abs()).max(a3.abs()),
            GroupElem::Cyclic(_) | GroupElem::Fin(_) => 0,
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, GroupDesc::Z | GroupDesc::Z2 | GroupDesc::Heisenberg)
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupDesc::Z | GroupDesc::Z2 | GroupDesc::Cyclic(_) => true,
            GroupDesc::Heisenberg => false,
            GroupDesc::Finite(t) => {
                let n = t.order as usize;
                (0..n).all(|a| (0..n).all(|b| t.table[a * n + b] == t.table[b * n + a]))
            }
        }
    }

    /// All elements of sup-norm <= radius, closed under inversion, sorted.
    /// For finite groups the whole group is returned.
    pub fn ball(&self, radius: i64) -> Vec<GroupElem> {
        let mut out = Vec::new();
        match self {
            GroupDesc::Z => {
                for x in -radius..=radius {
                    out.push(GroupElem::Z(x));
                }
            }
            GroupDesc::Z2 => {
                for x in -radius..=radius {
                    for y in -radius..=radius {
                        out.push(GroupElem::Z2(x, y));
                    }
                }
            }
            GroupDesc::Heisenberg => {
                for x in -radius..=radius {
                    for y in -radius..=radius {
                        for z in -radius..=radius {
                            out.push(GroupElem::Heis(x, y, z));
                        }
                    }
                }
                // close under inversion: |a3 - a1*a2| can exceed the radius
                let extra: Vec<_> = out.iter().map(|&a| self.inv(a)).collect();
                out.extend(extra);
            }
            GroupDesc::Cyclic(m) => {
                for k in 0..*m {
                    out.push(GroupElem::Cyclic(k));
                }
            }
            GroupDesc::Finite(t) => {
                for k in 0..t.order {
                    out.push(GroupElem::Fin(k));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_group_laws() {
        let g = GroupDesc::Heisenberg;
        let e = g.identity();
        let a = GroupElem::Heis(1, 2, 3);
        let b = GroupElem::Heis(-2, 1, 0);
        let c = GroupElem::Heis(4, 0, -1);
        assert_eq!(g.mul(a, e), a);
        assert_eq!(g.mul(e, a), a);
        assert_eq!(g.mul(a, g.inv(a)), e);
        assert_eq!(g.mul(g.inv(a), a), e);
        assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
    }

    #[test]
    fn heisenberg_ball_inversion_closed() {
        let g = GroupDesc::Heisenberg;
        let ball = g.ball(2);
        for &a in &ball {
            assert!(ball.binary_search(&g.inv(a)).is_ok());
        }
    }

    #[test]
    fn cyclic_arithmetic() {
        let g = GroupDesc::Cyclic(4);
        assert_eq!(g.mul(GroupElem::Cyclic(3), GroupElem::Cyclic(2)), GroupElem::Cyclic(1));
        assert_eq!(g.inv(GroupElem::Cyclic(1)), GroupElem::Cyclic(3));
        assert_eq!(g.inv(GroupElem::Cyclic(0)), GroupElem::Cyclic(0));
    }
}
