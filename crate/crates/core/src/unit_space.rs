//! Unit spaces with an explicit specialization topology.
//!
//! Infinite unit spaces are materialized within a window; the topology is
//! carried by a pointwise closure map plus the declared accumulation set of
//! the main orbit (the boundary points every cofinal part of the orbit
//! reaches). No metric machinery.

use crate::error::{Error, Result};
use crate::group::GroupElem;
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UnitId(pub u32);

impl UnitId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub struct UnitPoint {
    pub name: String,
    /// Points in the topological closure of this point (reflexive).
    pub closure: BTreeSet<UnitId>,
    /// Main-orbit member (true) vs boundary point (false).
    pub interior: bool,
    /// Lattice coordinate when the point sits in the acting group.
    pub coord: Option<GroupElem>,
}

#[derive(Clone, Debug)]
pub struct UnitSpace {
    points: Vec<UnitPoint>,
    /// Boundary points in the closure of the main orbit as a whole.
    main_orbit_closure: BTreeSet<UnitId>,
    by_name: HashMap<String, UnitId>,
    by_coord: HashMap<GroupElem, UnitId>,
}

impl UnitSpace {
    pub fn new(points: Vec<UnitPoint>, main_orbit_closure: BTreeSet<UnitId>) -> Result<Self> {
        let mut by_name = HashMap::new();
        let mut by_coord = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let id = UnitId(i as u32);
            if by_name.insert(p.name.clone(), id).is_some() {
                return Err(Error::InvalidInput(format!("duplicate unit name {}", p.name)));
            }
            if let Some(c) = p.coord {
                if by_coord.insert(c, id).is_some() {
                    return Err(Error::InvalidInput(format!("duplicate unit coordinate {c}")));
                }
            }
        }
        let space = UnitSpace { points, main_orbit_closure, by_name, by_coord };
        space.validate()?;
        Ok(space)
    }

    /// Closure map must be reflexive and transitive; boundary points closed.
    fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            let id = UnitId(i as u32);
            if !p.closure.contains(&id) {
                return Err(Error::InvalidInput(format!("closure of {} not reflexive", p.name)));
            }
            for &q in &p.closure {
                if q.idx() >= self.points.len() {
                    return Err(Error::InvalidInput("closure references unknown unit".into()));
                }
                for &r in &self.points[q.idx()].closure {
                    if !p.closure.contains(&r) {
                        return Err(Error::InvalidInput(format!(
                            "closure map not transitive at {}",
                            p.name
                        )));
                    }
                }
            }
            if !p.interior {
                for &q in &p.closure {
                    if self.points[q.idx()].interior {
                        return Err(Error::InvalidInput(format!(
                            "boundary point {} is not closed",
                            p.name
                        )));
                    }
                }
            }
        }
        for &b in &self.main_orbit_closure {
            if self.points[b.idx()].interior {
                return Err(Error::InvalidInput(
                    "main-orbit accumulation set must consist of boundary points".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = UnitId> + '_ {
        (0..self.points.len() as u32).map(UnitId)
    }

    pub fn point(&self, id: UnitId) -> &UnitPoint {
        &self.points[id.idx()]
    }

    pub fn closure_of(&self, id: UnitId) -> &BTreeSet<UnitId> {
        &self.points[id.idx()].closure
    }

    pub fn is_interior(&self, id: UnitId) -> bool {
        self.points[id.idx()].interior
    }

    pub fn interior_units(&self) -> Vec<UnitId> {
        self.ids().filter(|&i| self.is_interior(i)).collect()
    }

    pub fn boundary_units(&self) -> Vec<UnitId> {
        self.ids().filter(|&i| !self.is_interior(i)).collect()
    }

    /// Declared accumulation set of the main orbit.
    pub fn main_orbit_closure(&self) -> &BTreeSet<UnitId> {
        &self.main_orbit_closure
    }

    pub fn by_name(&self, name: &str) -> Option<UnitId> {
        self.by_name.get(name).copied()
    }

    pub fn by_coord(&self, c: GroupElem) -> Option<UnitId> {
        self.by_coord.get(&c).copied()
    }

    pub fn name(&self, id: UnitId) -> &str {
        &self.points[id.idx()].name
    }

    pub fn coord(&self, id: UnitId) -> Option<GroupElem> {
        self.points[id.idx()].coord
    }

    /// Restriction of the unit space to a subset; closures are intersected
    /// with the subset (subspace topology) and the accumulation set is kept
    /// where it survives, dropped entirely when no interior point remains.
    pub fn restrict(&self, keep: &BTreeSet<UnitId>) -> Result<(UnitSpace, HashMap<UnitId, UnitId>)> {
        let mut map = HashMap::new();
        let mut points = Vec::new();
        for (new_idx, &old) in keep.iter().enumerate() {
            map.insert(old, UnitId(new_idx as u32));
            points.push(self.points[old.idx()].clone());
        }
        for p in &mut points {
            p.closure = p.closure.iter().filter(|q| keep.contains(q)).map(|&q| map[&q]).collect();
        }
        let has_interior = points.iter().any(|p| p.interior);
        let moc = if has_interior {
            self.main_orbit_closure
                .iter()
                .filter(|b| keep.contains(b))
                .map(|&b| map[&b])
                .collect()
        } else {
            BTreeSet::new()
        };
        let space = UnitSpace::new(points, moc)?;
        Ok((space, map))
    }
}

/// Convenience builder: a single anonymous unit (one-object groupoid = group).
pub fn single_unit() -> UnitSpace {
    let p = UnitPoint {
        name: "pt".into(),
        closure: [UnitId(0)].into_iter().collect(),
        interior: true,
        coord: None,
    };
    UnitSpace::new(vec![p], BTreeSet::new()).expect("static unit space")
}

/// Discrete finite set of closed points, all interior.
pub fn discrete(names: &[&str]) -> UnitSpace {
    let points = names
        .iter()
        .enumerate()
        .map(|(i, n)| UnitPoint {
            name: n.to_string(),
            closure: [UnitId(i as u32)].into_iter().collect(),
            interior: true,
            coord: None,
        })
        .collect();
    UnitSpace::new(points, BTreeSet::new()).expect("static unit space")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonreflexive_closure() {
        let p = UnitPoint {
            name: "x".into(),
            closure: BTreeSet::new(),
            interior: true,
            coord: None,
        };
        assert!(UnitSpace::new(vec![p], BTreeSet::new()).is_err());
    }

    #[test]
    fn rejects_open_boundary_point() {
        let a = UnitPoint {
            name: "a".into(),
            closure: [UnitId(0)].into_iter().collect(),
            interior: true,
            coord: None,
        };
        let b = UnitPoint {
            name: "b".into(),
            closure: [UnitId(0), UnitId(1)].into_iter().collect(),
            interior: false,
            coord: None,
        };
        assert!(UnitSpace::new(vec![a, b], BTreeSet::new()).is_err());
    }
}
