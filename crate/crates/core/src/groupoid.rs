//! Finite and windowed lattice groupoids: arrow tables, transformation
//! groupoids of group actions on compactified unit spaces, invariant
//! restrictions, non-invariant reductions, orbit and quasi-orbit analysis.
//!
//! Lattice groupoids are materialized within a window. Any operation that
//! would consult an arrow outside the materialized part raises
//! [`Error::OutOfWindow`] instead of truncating silently.

use crate::error::{Error, Result};
use crate::group::{GroupDesc, GroupElem};
use crate::unit_space::{UnitId, UnitSpace};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ArrowId(pub u32);

impl ArrowId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// Label carried by an arrow; used for composition lookup in action
/// groupoids and for human-readable provenance elsewhere.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ArrowLabel {
    Elem(GroupElem),
    /// Pair-groupoid arrow (determined by endpoints).
    Pair,
    /// Extension-groupoid arrow: k-th root of unity times a base arrow.
    Ext { root: u32, base: ArrowId },
    Tag(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct Arrow {
    pub source: UnitId,
    pub range: UnitId,
    pub label: ArrowLabel,
}

/// How the group acts on the unit space.
#[derive(Clone, Debug)]
enum ActionKind {
    /// Interior units carry group coordinates, acted on by left translation;
    /// boundary units are fixed points.
    Translation,
    /// Every group element acts as the identity (group bundles).
    Trivial,
}

/// A group action on a (windowed) unit space.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub group: GroupDesc,
    pub units: UnitSpace,
    kind: ActionKind,
}

impl GroupAction {
    /// Left-translation action on a compactification of the group: interior
    /// units carry coordinates, boundary units are fixed.
    pub fn translation(group: GroupDesc, units: UnitSpace) -> Result<Self> {
        for id in units.ids() {
            if units.is_interior(id) && units.coord(id).is_none() {
                return Err(Error::InvalidInput(format!(
                    "interior unit {} has no group coordinate",
                    units.name(id)
                )));
            }
        }
        Ok(GroupAction { group, units, kind: ActionKind::Translation })
    }

    pub fn trivial(group: GroupDesc, units: UnitSpace) -> Self {
        GroupAction { group, units, kind: ActionKind::Trivial }
    }

    /// theta_a(x); `None` when the image is outside the materialized units.
    pub fn theta(&self, a: GroupElem, x: UnitId) -> Option<UnitId> {
        match self.kind {
            ActionKind::Trivial => Some(x),
            ActionKind::Translation => match self.units.coord(x) {
                None => Some(x), // boundary fixed point
                Some(c) => self.units.by_coord(self.group.mul(a, c)),
            },
        }
    }

    /// The label of the (conceptual) arrow x -> y inside the main orbit.
    pub fn label_from_to(&self, x: UnitId, y: UnitId) -> Option<GroupElem> {
        match self.kind {
            ActionKind::Trivial => None,
            ActionKind::Translation => {
                let (cx, cy) = (self.units.coord(x)?, self.units.coord(y)?);
                Some(self.group.mul(cy, self.group.inv(cx)))
            }
        }
    }
}

#[derive(Debug)]
enum Engine {
    Table { compose: HashMap<(ArrowId, ArrowId), ArrowId>, invert: Vec<ArrowId> },
    Action { action: GroupAction, lookup: HashMap<(UnitId, GroupElem), ArrowId>, label_window: i64 },
}

/// A groupoid with explicitly materialized arrows.
#[derive(Debug)]
pub struct FiniteGroupoid {
    pub units: UnitSpace,
    arrows: Vec<Arrow>,
    engine: Engine,
    /// Uniform counting weight of the Haar system (1 in all desk models,
    /// 1/N on mu_N extensions).
    fiber_weight: f64,
    unit_arrows: Vec<ArrowId>,
    fibers_source: Vec<Vec<ArrowId>>,
    fibers_range: Vec<Vec<ArrowId>>,
}

/// Result of reducing a groupoid to a unit subset: the reduced groupoid plus
/// the maps identifying surviving units and arrows.
pub struct Reduction {
    pub groupoid: Arc<FiniteGroupoid>,
    pub unit_map: HashMap<UnitId, UnitId>,
    pub arrow_map: HashMap<ArrowId, ArrowId>,
}

/// A reduction together with the certificate that the subset was invariant.
/// Only this type unlocks the exact-sequence identities in the kernel algebra.
pub struct InvariantRestriction {
    pub reduction: Reduction,
    /// The invariant subset, in parent unit ids.
    pub subset: BTreeSet<UnitId>,
}

impl FiniteGroupoid {
    // ------------------------------------------------------------------
    // builders

    /// Transformation groupoid of `action`, materializing arrows (x, a) with
    /// |a| <= label_window whose range stays inside the unit window.
    pub fn from_action(action: GroupAction, label_window: i64) -> Result<Arc<Self>> {
        let labels = action.group.ball(label_window);
        let mut arrows = Vec::new();
        let mut lookup = HashMap::new();
        for x in action.units.ids() {
            for &a in &labels {
                if let Some(y) = action.theta(a, x) {
                    let id = ArrowId(arrows.len() as u32);
                    arrows.push(Arrow { source: x, range: y, label: ArrowLabel::Elem(a) });
                    lookup.insert((x, a), id);
                }
            }
        }
        let units = action.units.clone();
        let g = FiniteGroupoid::assemble(
            units,
            arrows,
            Engine::Action { action, lookup, label_window },
            1.0,
        )?;
        Ok(Arc::new(g))
    }

    /// Pair groupoid on n points: arrows (i <- j) for all i, j.
    pub fn pair_groupoid(n: usize) -> Result<Arc<Self>> {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let units = crate::unit_space::discrete(&name_refs);
        let mut arrows = Vec::new();
        let mut ids = HashMap::new();
        for j in 0..n {
            for i in 0..n {
                let id = ArrowId(arrows.len() as u32);
                // arrow from unit j to unit i
                arrows.push(Arrow {
                    source: UnitId(j as u32),
                    range: UnitId(i as u32),
                    label: ArrowLabel::Pair,
                });
                ids.insert((i, j), id);
            }
        }
        let mut compose = HashMap::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    // (i <- j) o (j <- k) = (i <- k)
                    compose.insert((ids[&(i, j)], ids[&(j, k)]), ids[&(i, k)]);
                }
            }
        }
        let invert = (0..n * n)
            .map(|raw| {
                let (j, i) = (arrows[raw].source.idx(), arrows[raw].range.idx());
                ids[&(j, i)]
            })
            .collect();
        let g = FiniteGroupoid::assemble(units, arrows, Engine::Table { compose, invert }, 1.0)?;
        g.validate_structure()?;
        Ok(Arc::new(g))
    }

    /// One-unit groupoid carrying a (finite) group.
    pub fn group_groupoid(group: GroupDesc) -> Result<Arc<Self>> {
        if group.is_lattice() {
            return Err(Error::InvalidInput(
                "lattice groups need a window; use from_action with a compactified unit space"
                    .into(),
            ));
        }
        let units = crate::unit_space::single_unit();
        let action = GroupAction::trivial(group, units);
        FiniteGroupoid::from_action(action, 0)
    }

    /// Group bundle: one copy of `group` over each named unit, trivial action.
    pub fn group_bundle(names: &[&str], group: GroupDesc) -> Result<Arc<Self>> {
        let units = crate::unit_space::discrete(names);
        let action = GroupAction::trivial(group, units);
        FiniteGroupoid::from_action(action, 0)
    }

    /// Explicit table groupoid (used by the extension construction).
    pub fn from_table(
        units: UnitSpace,
        arrows: Vec<Arrow>,
        compose: HashMap<(ArrowId, ArrowId), ArrowId>,
        invert: Vec<ArrowId>,
        fiber_weight: f64,
    ) -> Result<Arc<Self>> {
        let g = FiniteGroupoid::assemble(units, arrows, Engine::Table { compose, invert }, fiber_weight)?;
        Ok(Arc::new(g))
    }

    fn assemble(
        units: UnitSpace,
        arrows: Vec<Arrow>,
        engine: Engine,
        fiber_weight: f64,
    ) -> Result<Self> {
        let mut fibers_source = vec![Vec::new(); units.len()];
        let mut fibers_range = vec![Vec::new(); units.len()];
        for (i, a) in arrows.iter().enumerate() {
            fibers_source[a.source.idx()].push(ArrowId(i as u32));
            fibers_range[a.range.idx()].push(ArrowId(i as u32));
        }
        let mut g = FiniteGroupoid {
            units,
            arrows,
            engine,
            fiber_weight,
            unit_arrows: Vec::new(),
            fibers_source,
            fibers_range,
        };
        g.unit_arrows = g.find_unit_arrows()?;
        Ok(g)
    }

    fn find_unit_arrows(&self) -> Result<Vec<ArrowId>> {
        let mut out = Vec::with_capacity(self.units.len());
        for x in self.units.ids() {
            let id = match &self.engine {
                Engine::Action { action, lookup, .. } => lookup
                    .get(&(x, action.group.identity()))
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("missing unit arrow at {}", self.units.name(x))))?,
                Engine::Table { compose, .. } => {
                    // the unique loop at x acting as a left and right identity
                    let mut found = None;
                    for &cand in &self.fibers_source[x.idx()] {
                        if self.arrows[cand.idx()].range != x {
                            continue;
                        }
                        let ok = self.fibers_range[x.idx()].iter().all(|&xi| {
                            compose.get(&(cand, xi)).map(|&p| p == xi).unwrap_or(false)
                        }) && self.fibers_source[x.idx()].iter().all(|&xi| {
                            compose.get(&(xi, cand)).map(|&p| p == xi).unwrap_or(false)
                        });
                        if ok {
                            found = Some(cand);
                            break;
                        }
                    }
                    found.ok_or_else(|| {
                        Error::InvalidInput(format!("no identity arrow at {}", self.units.name(x)))
                    })?
                }
            };
            out.push(id);
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // basic accessors

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len() as u32).map(ArrowId)
    }

    pub fn arrow(&self, id: ArrowId) -> &Arrow {
        &self.arrows[id.idx()]
    }

    pub fn source(&self, id: ArrowId) -> UnitId {
        self.arrows[id.idx()].source
    }

    pub fn range(&self, id: ArrowId) -> UnitId {
        self.arrows[id.idx()].range
    }

    pub fn label(&self, id: ArrowId) -> ArrowLabel {
        self.arrows[id.idx()].label
    }

    pub fn unit_arrow(&self, x: UnitId) -> ArrowId {
        self.unit_arrows[x.idx()]
    }

    pub fn is_unit_arrow(&self, id: ArrowId) -> bool {
        self.unit_arrows[self.arrows[id.idx()].source.idx()] == id
            && self.arrows[id.idx()].source == self.arrows[id.idx()].range
    }

    /// d-fiber of x (arrows with source x), in id order.
    pub fn fiber_source(&self, x: UnitId) -> &[ArrowId] {
        &self.fibers_source[x.idx()]
    }

    /// r-fiber of x (arrows with range x), in id order.
    pub fn fiber_range(&self, x: UnitId) -> &[ArrowId] {
        &self.fibers_range[x.idx()]
    }

    /// Counting Haar weight of a fiber arrow.
    pub fn haar_weight(&self, _id: ArrowId) -> f64 {
        self.fiber_weight
    }

    pub fn fiber_weight(&self) -> f64 {
        self.fiber_weight
    }

    pub fn action(&self) -> Option<&GroupAction> {
        match &self.engine {
            Engine::Action { action, .. } => Some(action),
            Engine::Table { .. } => None,
        }
    }

    pub fn label_window(&self) -> Option<i64> {
        match &self.engine {
            Engine::Action { label_window, .. } => Some(*label_window),
            Engine::Table { .. } => None,
        }
    }

    /// Arrow with given source and group label, when materialized.
    pub fn arrow_by_label(&self, x: UnitId, a: GroupElem) -> Option<ArrowId> {
        match &self.engine {
            Engine::Action { lookup, .. } => lookup.get(&(x, a)).copied(),
            Engine::Table { .. } => None,
        }
    }

    // ------------------------------------------------------------------
    // composition and inversion

    /// Product xi . eta, defined when d(xi) = r(eta).
    pub fn compose(&self, xi: ArrowId, eta: ArrowId) -> Result<ArrowId> {
        let (axi, aeta) = (&self.arrows[xi.idx()], &self.arrows[eta.idx()]);
        if axi.source != aeta.range {
            return Err(Error::NotComposable(xi, eta));
        }
        match &self.engine {
            Engine::Table { compose, .. } => compose
                .get(&(xi, eta))
                .copied()
                .ok_or_else(|| Error::OutOfWindow(format!("table product {xi:?}.{eta:?} missing"))),
            Engine::Action { action, lookup, label_window } => {
                let (ArrowLabel::Elem(b), ArrowLabel::Elem(a)) = (axi.label, aeta.label) else {
                    return Err(Error::InvalidInput("action arrow without group label".into()));
                };
                let ba = action.group.mul(b, a);
                lookup.get(&(aeta.source, ba)).copied().ok_or_else(|| {
                    Error::OutOfWindow(format!(
                        "product label {ba} at {} exceeds label window {label_window}",
                        self.units.name(aeta.source)
                    ))
                })
            }
        }
    }

    pub fn invert(&self, xi: ArrowId) -> ArrowId {
        match &self.engine {
            Engine::Table { invert, .. } => invert[xi.idx()],
            Engine::Action { action, lookup, .. } => {
                let arrow = &self.arrows[xi.idx()];
                let ArrowLabel::Elem(a) = arrow.label else {
                    unreachable!("action arrow without group label")
                };
                lookup[&(arrow.range, action.group.inv(a))]
            }
        }
    }

    /// Composable pairs (xi, eta) with d(xi) = r(eta), materialized products only.
    pub fn composable_pairs(&self) -> Vec<(ArrowId, ArrowId)> {
        let mut out = Vec::new();
        for eta in self.arrow_ids() {
            let mid = self.range(eta);
            for &xi in self.fiber_source(mid) {
                if self.compose(xi, eta).is_ok() {
                    out.push((xi, eta));
                }
            }
        }
        out
    }

    // ------------------------------------------------------------------
    // structural validation

    /// Full axiom check: identities, involution, endpoint bookkeeping and
    /// associativity over every materialized composable triple. Intended for
    /// finite models and verification windows; cost grows with |arrows|^3
    /// fiber degree.
    pub fn validate_structure(&self) -> Result<()> {
        for xi in self.arrow_ids() {
            let inv = self.invert(xi);
            if self.invert(inv) != xi {
                return Err(Error::InvalidInput(format!("involution broken at {xi:?}")));
            }
            if self.source(inv) != self.range(xi) || self.range(inv) != self.source(xi) {
                return Err(Error::InvalidInput(format!("inverse endpoints wrong at {xi:?}")));
            }
            // xi . xi^{-1} = unit arrow at r(xi)
            let p = self.compose(xi, inv)?;
            if p != self.unit_arrow(self.range(xi)) {
                return Err(Error::InvalidInput(format!("xi.xi^-1 not a unit at {xi:?}")));
            }
            // units act as identities
            let u_r = self.unit_arrow(self.range(xi));
            let u_s = self.unit_arrow(self.source(xi));
            if self.compose(u_r, xi)? != xi || self.compose(xi, u_s)? != xi {
                return Err(Error::InvalidInput(format!("unit arrows not neutral at {xi:?}")));
            }
        }
        // associativity on all materialized composable triples; products that
        // leave the window are skipped (they are checked on larger windows)
        for eta in self.arrow_ids() {
            for &xi in self.fiber_source(self.range(eta)) {
                let Ok(xi_eta) = self.compose(xi, eta) else { continue };
                for &zeta in self.fiber_range(self.source(eta)) {
                    let Ok(eta_zeta) = self.compose(eta, zeta) else { continue };
                    let (Ok(l), Ok(r)) = (self.compose(xi_eta, zeta), self.compose(xi, eta_zeta))
                    else {
                        continue;
                    };
                    if l != r {
                        return Err(Error::InvalidInput(format!(
                            "associativity fails on ({xi:?},{eta:?},{zeta:?})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // reductions

    /// Reduction to the arrows with both endpoints in L (Xi(L)). Always a
    /// subgroupoid; may be non-invariant.
    pub fn reduce_to_subset(&self, keep: &BTreeSet<UnitId>) -> Result<Reduction> {
        if keep.is_empty() {
            return Err(Error::Empty("reduction to empty unit set".into()));
        }
        let (units, unit_map) = self.units.restrict(keep)?;
        let mut arrow_map = HashMap::new();
        let mut arrows = Vec::new();
        for id in self.arrow_ids() {
            let a = &self.arrows[id.idx()];
            if keep.contains(&a.source) && keep.contains(&a.range) {
                let nid = ArrowId(arrows.len() as u32);
                arrows.push(Arrow {
                    source: unit_map[&a.source],
                    range: unit_map[&a.range],
                    label: a.label,
                });
                arrow_map.insert(id, nid);
            }
        }
        let engine = match &self.engine {
            Engine::Action { action, lookup, label_window } => {
                let new_action = GroupAction {
                    group: action.group.clone(),
                    units: units.clone(),
                    kind: action.kind.clone(),
                };
                let mut new_lookup = HashMap::new();
                for (&(x, a), &old_id) in lookup.iter() {
                    if let Some(&nid) = arrow_map.get(&old_id) {
                        new_lookup.insert((unit_map[&x], a), nid);
                    }
                }
                Engine::Action { action: new_action, lookup: new_lookup, label_window: *label_window }
            }
            Engine::Table { compose, invert } => {
                let mut new_compose = HashMap::new();
                for (&(xi, eta), &prod) in compose.iter() {
                    if let (Some(&nxi), Some(&neta)) = (arrow_map.get(&xi), arrow_map.get(&eta)) {
                        let nprod = arrow_map.get(&prod).copied().ok_or_else(|| {
                            Error::InvalidInput(
                                "reduction dropped the product of two surviving arrows".into(),
                            )
                        })?;
                        new_compose.insert((nxi, neta), nprod);
                    }
                }
                let mut new_invert = vec![ArrowId(0); arrows.len()];
                for (&old, &new) in arrow_map.iter() {
                    new_invert[new.idx()] = arrow_map[&invert[old.idx()]];
                }
                Engine::Table { compose: new_compose, invert: new_invert }
            }
        };
        let g = FiniteGroupoid::assemble(units, arrows, engine, self.fiber_weight)?;
        Ok(Reduction { groupoid: Arc::new(g), unit_map, arrow_map })
    }

    /// Restriction to an invariant subset; the invariance is checked on every
    /// materialized arrow and certified in the result.
    pub fn restrict_invariant(&self, subset: &BTreeSet<UnitId>) -> Result<InvariantRestriction> {
        for id in self.arrow_ids() {
            let a = &self.arrows[id.idx()];
            let (s_in, r_in) = (subset.contains(&a.source), subset.contains(&a.range));
            if s_in != r_in {
                return Err(Error::NotInvariant { arrow: id, source_in: s_in, range_in: r_in });
            }
        }
        let reduction = self.reduce_to_subset(subset)?;
        Ok(InvariantRestriction { reduction, subset: subset.clone() })
    }

    // ------------------------------------------------------------------
    // orbits and quasi-orbits

    /// Orbit partition. For lattice actions the main orbit is computed
    /// symbolically (all interior units), never by enumerating the group.
    pub fn orbits(&self) -> Vec<Vec<UnitId>> {
        let n = self.units.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        let symbolic_main = matches!(&self.engine, Engine::Action { action, .. } if action.group.is_lattice());
        if symbolic_main {
            let interior = self.units.interior_units();
            for w in interior.windows(2) {
                let (a, b) = (find(&mut parent, w[0].idx()), find(&mut parent, w[1].idx()));
                parent[a] = b;
            }
            for id in self.arrow_ids() {
                let a = &self.arrows[id.idx()];
                if !self.units.is_interior(a.source) || !self.units.is_interior(a.range) {
                    let (x, y) = (find(&mut parent, a.source.idx()), find(&mut parent, a.range.idx()));
                    parent[x] = y;
                }
            }
        } else {
            for id in self.arrow_ids() {
                let a = &self.arrows[id.idx()];
                let (x, y) = (find(&mut parent, a.source.idx()), find(&mut parent, a.range.idx()));
                parent[x] = y;
            }
        }
        let mut classes: BTreeMap<usize, Vec<UnitId>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            classes.entry(r).or_default().push(UnitId(i as u32));
        }
        classes.into_values().collect()
    }

    /// Closure of the orbit of x as a unit set (quasi-orbit support).
    fn orbit_closure(&self, orbit: &[UnitId]) -> BTreeSet<UnitId> {
        let mut q: BTreeSet<UnitId> = BTreeSet::new();
        let has_interior = orbit.iter().any(|&y| self.units.is_interior(y));
        for &y in orbit {
            q.extend(self.units.closure_of(y).iter().copied());
        }
        if has_interior {
            q.extend(self.units.main_orbit_closure().iter().copied());
        }
        q
    }

    /// Quasi-orbit generated by x: Q = cl(O_x), split into generic and
    /// non-generic parts; x itself is always a generator.
    pub fn quasi_orbit_of(&self, x: UnitId) -> QuasiOrbit {
        let orbits = self.orbits();
        let closures: Vec<BTreeSet<UnitId>> = orbits.iter().map(|c| self.orbit_closure(c)).collect();
        let orbit_index: HashMap<UnitId, usize> = orbits
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |&u| (u, i)))
            .collect();
        let q = closures[orbit_index[&x]].clone();
        let mut generic = BTreeSet::new();
        let mut non_generic = BTreeSet::new();
        for &y in &q {
            if closures[orbit_index[&y]] == q {
                generic.insert(y);
            } else {
                non_generic.insert(y);
            }
        }
        QuasiOrbit { members: q, generic, non_generic, generator: x }
    }

    /// Standardness: a dense open orbit with trivial isotropy. Returns the
    /// main orbit when standard.
    pub fn is_standard(&self) -> (bool, Option<Vec<UnitId>>) {
        let orbits = self.orbits();
        for orbit in &orbits {
            if !orbit.iter().all(|&u| self.units.is_interior(u)) {
                continue; // not open
            }
            let closure = self.orbit_closure(orbit);
            if closure.len() != self.units.len() {
                continue; // not dense
            }
            // trivial isotropy at every orbit point
            let trivial = orbit.iter().all(|&m| {
                self.fiber_source(m)
                    .iter()
                    .all(|&a| self.range(a) != m || self.is_unit_arrow(a))
            });
            if trivial {
                return (true, Some(orbit.clone()));
            }
        }
        (false, None)
    }
}

/// A quasi-orbit: closure of an orbit with its generic/non-generic split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiOrbit {
    pub members: BTreeSet<UnitId>,
    pub generic: BTreeSet<UnitId>,
    pub non_generic: BTreeSet<UnitId>,
    pub generator: UnitId,
}
