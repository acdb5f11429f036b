//! 2-cocycles on finite groupoids: validation, coboundaries, cohomology
//! operations, magnetic cocycles from flux data, and the mu_N extension
//! groupoid.

use crate::error::{Error, Result};
use crate::flux::{triangle_flux_constant, triangle_flux_table, MagneticFieldSpec};
use crate::group::GroupElem;
use crate::groupoid::{Arrow, ArrowId, ArrowLabel, FiniteGroupoid};
use crate::unit_space::UnitId;
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

const IDENTITY_TOL: f64 = 1e-12;
/// Constructors defer the full triple enumeration beyond this budget; models
/// then run `verify` on their (smaller) verification groupoid, which is what
/// the verification suites execute.
const AUTO_VERIFY_TRIPLES: usize = 2_000_000;

fn root_value(k: u32, order: u32) -> Complex64 {
    let theta = std::f64::consts::TAU * (k % order) as f64 / order as f64;
    Complex64::new(theta.cos(), theta.sin())
}

#[derive(Clone, Debug)]
enum CocycleData {
    Trivial,
    /// Exact mu_N exponents over composable pairs.
    RootTable { table: BTreeMap<(ArrowId, ArrowId), u32> },
    /// Complex phase table over composable pairs.
    RootTableComplex(BTreeMap<(ArrowId, ArrowId), Complex64>),
    /// Coboundary of an exact mu_N-valued sigma.
    RootCoboundary { sigma: Vec<u32> },
    /// Coboundary of a unit-modulus sigma.
    Coboundary { sigma: Vec<Complex64> },
    /// Magnetic cocycle: phase = exp(i flux through <<e, a, ba>>).
    Magnetic { field: MagneticFieldSpec },
    Product(Box<CocycleData>, Box<CocycleData>),
    Inverse(Box<CocycleData>),
    Power(Box<CocycleData>, i32),
}

/// A phase-valued 2-cocycle, constructible only through validating factories.
#[derive(Clone, Debug)]
pub struct TwoCocycle {
    groupoid: Arc<FiniteGroupoid>,
    data: CocycleData,
    root_order: Option<u32>,
}

/// Outcome of a cocycle identity check.
#[derive(Clone, Debug)]
pub struct CocycleCheck {
    pub ok: bool,
    pub worst_residual: f64,
    pub worst_triple: Option<String>,
    pub normalization_residual: f64,
    pub triples_checked: usize,
}

impl TwoCocycle {
    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn root_order(&self) -> Option<u32> {
        self.root_order
    }

    pub fn same_groupoid(&self, other: &TwoCocycle) -> bool {
        Arc::ptr_eq(&self.groupoid, &other.groupoid)
    }

    // ------------------------------------------------------------------
    // factories

    pub fn trivial(groupoid: Arc<FiniteGroupoid>) -> Self {
        TwoCocycle { groupoid, data: CocycleData::Trivial, root_order: Some(1) }
    }

    /// Phase table over all materialized composable pairs; validated.
    pub fn from_phase_table(
        groupoid: Arc<FiniteGroupoid>,
        table: BTreeMap<(ArrowId, ArrowId), Complex64>,
    ) -> Result<Self> {
        for (&(xi, eta), v) in &table {
            if (v.norm() - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidInput(format!(
                    "phase at ({xi:?},{eta:?}) has modulus {}",
                    v.norm()
                )));
            }
        }
        // completeness over materialized composable pairs
        for (xi, eta) in groupoid.composable_pairs() {
            if !table.contains_key(&(xi, eta)) {
                return Err(Error::IncompleteCocycle(format!("({xi:?},{eta:?})")));
            }
        }
        let c = TwoCocycle {
            groupoid,
            data: CocycleData::RootTableComplex(table),
            root_order: None,
        };
        c.verify_or_reject()?;
        Ok(c)
    }

    /// Exact mu_N table of exponents; phases are snapped to exact roots of
    /// unity, which keeps the extension construction exact.
    pub fn from_root_table(
        groupoid: Arc<FiniteGroupoid>,
        order: u32,
        table: BTreeMap<(ArrowId, ArrowId), u32>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("root order must be positive".into()));
        }
        for (xi, eta) in groupoid.composable_pairs() {
            if !table.contains_key(&(xi, eta)) {
                return Err(Error::IncompleteCocycle(format!("({xi:?},{eta:?})")));
            }
        }
        let c = TwoCocycle {
            groupoid,
            data: CocycleData::RootTable { table },
            root_order: Some(order),
        };
        c.verify_or_reject()?;
        Ok(c)
    }

    /// Coboundary delta^1(sigma): omega(xi, eta) = sigma(xi) sigma(eta) / sigma(xi eta).
    /// sigma is renormalized to unit modulus and to 1 on unit arrows.
    pub fn coboundary(groupoid: Arc<FiniteGroupoid>, mut sigma: Vec<Complex64>) -> Result<Self> {
        if sigma.len() != groupoid.arrow_count() {
            return Err(Error::InvalidInput("sigma must assign a phase to every arrow".into()));
        }
        for (i, s) in sigma.iter_mut().enumerate() {
            let n = s.norm();
            if n < 1e-14 {
                return Err(Error::InvalidInput(format!("sigma vanishes on arrow {i}")));
            }
            *s /= n;
        }
        for x in groupoid.units.ids() {
            sigma[groupoid.unit_arrow(x).idx()] = Complex64::new(1.0, 0.0);
        }
        Ok(TwoCocycle { groupoid, data: CocycleData::Coboundary { sigma }, root_order: None })
    }

    /// Coboundary of an exact mu_N-valued sigma (exponents).
    pub fn coboundary_roots(
        groupoid: Arc<FiniteGroupoid>,
        order: u32,
        mut sigma: Vec<u32>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("root order must be positive".into()));
        }
        if sigma.len() != groupoid.arrow_count() {
            return Err(Error::InvalidInput("sigma must assign a root to every arrow".into()));
        }
        for k in sigma.iter_mut() {
            *k %= order;
        }
        for x in groupoid.units.ids() {
            sigma[groupoid.unit_arrow(x).idx()] = 0;
        }
        Ok(TwoCocycle {
            groupoid,
            data: CocycleData::RootCoboundary { sigma },
            root_order: Some(order),
        })
    }

    /// Magnetic cocycle of a field continuous on the compactified unit space:
    /// omega_B((theta_a x, b), (x, a)) = exp(i flux of B_x through <<e, a, ba>>).
    pub fn magnetic(groupoid: Arc<FiniteGroupoid>, field: MagneticFieldSpec) -> Result<Self> {
        let action = groupoid.action().ok_or_else(|| {
            Error::InvalidInput("magnetic cocycles need a transformation groupoid".into())
        })?;
        match &field {
            MagneticFieldSpec::Zero => {
                return Ok(TwoCocycle::trivial(groupoid));
            }
            MagneticFieldSpec::ConstantFlux { .. } | MagneticFieldSpec::UnitFlux { .. } => {
                let ok_labels = groupoid
                    .arrow_ids()
                    .all(|id| matches!(groupoid.label(id), ArrowLabel::Elem(GroupElem::Z2(_, _))));
                if !ok_labels {
                    return Err(Error::InvalidInput(
                        "flux data requires Z^2 arrow labels".into(),
                    ));
                }
            }
        }
        if let MagneticFieldSpec::UnitFlux { alpha, core_radius } = &field {
            if alpha.len() != groupoid.units.len() {
                return Err(Error::InvalidInput("flux table must cover every unit".into()));
            }
            // continuity in the closure sense: constant value outside the core,
            // matching the declared boundary values
            let boundary = groupoid.units.boundary_units();
            if boundary.len() > 1 {
                return Err(Error::InvalidInput(
                    "unit-dependent flux supports a single boundary point".into(),
                ));
            }
            if let Some(&b) = boundary.first() {
                let limit = alpha[b.idx()];
                for u in groupoid.units.ids() {
                    if let Some(c) = groupoid.units.coord(u) {
                        if action.group.norm(c) > *core_radius
                            && (alpha[u.idx()] - limit).abs() > 0.0
                        {
                            return Err(Error::InvalidInput(format!(
                                "flux at {} differs from the boundary limit outside the core",
                                groupoid.units.name(u)
                            )));
                        }
                    }
                }
            }
        }
        let c = TwoCocycle { groupoid, data: CocycleData::Magnetic { field }, root_order: None };
        c.verify_or_reject()?;
        Ok(c)
    }

    /// Pointwise product; both factors must live on the same groupoid.
    pub fn multiply(&self, other: &TwoCocycle) -> Result<TwoCocycle> {
        if !self.same_groupoid(other) {
            return Err(Error::MismatchedAlgebra);
        }
        // flux additivity: constant magnetic fields compose into one field
        if let (CocycleData::Magnetic { field: MagneticFieldSpec::ConstantFlux { alpha: a1 } },
                CocycleData::Magnetic { field: MagneticFieldSpec::ConstantFlux { alpha: a2 } }) =
            (&self.data, &other.data)
        {
            return Ok(TwoCocycle {
                groupoid: self.groupoid.clone(),
                data: CocycleData::Magnetic {
                    field: MagneticFieldSpec::ConstantFlux { alpha: a1 + a2 },
                },
                root_order: None,
            });
        }
        let root_order = match (self.root_order, other.root_order) {
            (Some(a), Some(b)) => Some(lcm(a, b)),
            _ => None,
        };
        Ok(TwoCocycle {
            groupoid: self.groupoid.clone(),
            data: CocycleData::Product(Box::new(self.data.clone()), Box::new(other.data.clone())),
            root_order,
        })
    }

    /// Pointwise complex conjugate (= pointwise inverse).
    pub fn conjugate(&self) -> TwoCocycle {
        TwoCocycle {
            groupoid: self.groupoid.clone(),
            data: CocycleData::Inverse(Box::new(self.data.clone())),
            root_order: self.root_order,
        }
    }

    /// Pointwise integer power omega^n.
    pub fn power(&self, n: i32) -> TwoCocycle {
        if n == 1 {
            return self.clone();
        }
        TwoCocycle {
            groupoid: self.groupoid.clone(),
            data: CocycleData::Power(Box::new(self.data.clone()), n),
            root_order: self.root_order,
        }
    }

    // ------------------------------------------------------------------
    // evaluation

    /// omega(xi, eta) for a composable materialized pair.
    pub fn eval(&self, xi: ArrowId, eta: ArrowId) -> Result<Complex64> {
        eval_data(&self.data, &self.groupoid, self.root_order, PairRef::Ids(xi, eta))
    }

    /// omega((theta_a x, b), (x, a)) evaluated from labels; works even when
    /// the arrows themselves are not materialized (vector representations on
    /// large windows). Only label-evaluable data (trivial, magnetic, and
    /// their products) support this.
    pub fn eval_action(&self, base: UnitId, a: GroupElem, b: GroupElem) -> Result<Complex64> {
        eval_data(&self.data, &self.groupoid, self.root_order, PairRef::Labels { base, a, b })
    }

    /// Exact mu_N exponent of omega(xi, eta), when representable.
    pub fn eval_root(&self, xi: ArrowId, eta: ArrowId) -> Result<Option<u32>> {
        let Some(order) = self.root_order else { return Ok(None) };
        Ok(eval_root_data(&self.data, &self.groupoid, order, xi, eta))
    }

    // ------------------------------------------------------------------
    // verification

    fn verify_or_reject(&self) -> Result<()> {
        if self.triple_estimate() > AUTO_VERIFY_TRIPLES {
            return Ok(());
        }
        let check = self.verify()?;
        if !check.ok {
            return Err(Error::InvalidInput(format!(
                "cocycle identity fails: residual {} at {}",
                check.worst_residual,
                check.worst_triple.unwrap_or_default()
            )));
        }
        Ok(())
    }

    fn triple_estimate(&self) -> usize {
        let g = &self.groupoid;
        let max_fiber = g.units.ids().map(|x| g.fiber_source(x).len()).max().unwrap_or(0);
        g.arrow_count().saturating_mul(max_fiber).saturating_mul(max_fiber)
    }

    /// Cocycle identity and unit normalization over every materialized
    /// composable triple.
    pub fn verify(&self) -> Result<CocycleCheck> {
        check_phase_map(&self.groupoid, &|xi, eta| self.eval(xi, eta).ok())
    }

    /// Restriction of the cocycle along a reduction of its groupoid; the
    /// result lives on the reduced groupoid.
    pub fn restrict(&self, red: &crate::groupoid::Reduction) -> Result<TwoCocycle> {
        let data = restrict_data(&self.data, red)?;
        Ok(TwoCocycle {
            groupoid: red.groupoid.clone(),
            data,
            root_order: self.root_order,
        })
    }

    /// Does sigma intertwine self and other: other = delta^1(sigma) * self?
    pub fn cohomologous_check(&self, other: &TwoCocycle, sigma: &[Complex64]) -> Result<bool> {
        if !self.same_groupoid(other) {
            return Err(Error::MismatchedAlgebra);
        }
        if sigma.len() != self.groupoid.arrow_count() {
            return Err(Error::InvalidInput("sigma must cover every arrow".into()));
        }
        let g = &self.groupoid;
        for (xi, eta) in g.composable_pairs() {
            let prod = g.compose(xi, eta)?;
            let delta = sigma[xi.idx()] * sigma[eta.idx()] / sigma[prod.idx()];
            let lhs = other.eval(xi, eta)?;
            let rhs = delta * self.eval(xi, eta)?;
            if (lhs - rhs).norm() > IDENTITY_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

enum PairRef {
    Ids(ArrowId, ArrowId),
    Labels { base: UnitId, a: GroupElem, b: GroupElem },
}

fn restrict_data(data: &CocycleData, red: &crate::groupoid::Reduction) -> Result<CocycleData> {
    Ok(match data {
        CocycleData::Trivial => CocycleData::Trivial,
        CocycleData::RootTable { table } => {
            let mut out = BTreeMap::new();
            for (&(xi, eta), &k) in table {
                if let (Some(&nxi), Some(&neta)) =
                    (red.arrow_map.get(&xi), red.arrow_map.get(&eta))
                {
                    out.insert((nxi, neta), k);
                }
            }
            CocycleData::RootTable { table: out }
        }
        CocycleData::RootTableComplex(table) => {
            let mut out = BTreeMap::new();
            for (&(xi, eta), &v) in table {
                if let (Some(&nxi), Some(&neta)) =
                    (red.arrow_map.get(&xi), red.arrow_map.get(&eta))
                {
                    out.insert((nxi, neta), v);
                }
            }
            CocycleData::RootTableComplex(out)
        }
        CocycleData::RootCoboundary { sigma } => {
            let mut out = vec![0u32; red.groupoid.arrow_count()];
            for (&old, &new) in &red.arrow_map {
                out[new.idx()] = sigma[old.idx()];
            }
            CocycleData::RootCoboundary { sigma: out }
        }
        CocycleData::Coboundary { sigma } => {
            let mut out = vec![Complex64::new(1.0, 0.0); red.groupoid.arrow_count()];
            for (&old, &new) in &red.arrow_map {
                out[new.idx()] = sigma[old.idx()];
            }
            CocycleData::Coboundary { sigma: out }
        }
        CocycleData::Magnetic { field } => {
            let field = match field {
                MagneticFieldSpec::UnitFlux { alpha, core_radius } => {
                    let mut out = vec![0.0; red.groupoid.units.len()];
                    for (&old, &new) in &red.unit_map {
                        out[new.idx()] = alpha[old.idx()];
                    }
                    MagneticFieldSpec::UnitFlux { alpha: out, core_radius: *core_radius }
                }
                other => other.clone(),
            };
            CocycleData::Magnetic { field }
        }
        CocycleData::Product(l, r) => CocycleData::Product(
            Box::new(restrict_data(l, red)?),
            Box::new(restrict_data(r, red)?),
        ),
        CocycleData::Inverse(inner) => CocycleData::Inverse(Box::new(restrict_data(inner, red)?)),
        CocycleData::Power(inner, n) => {
            CocycleData::Power(Box::new(restrict_data(inner, red)?), *n)
        }
    })
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(mut a: u32, mut b: u32) -> u32 {
        while b != 0 {
            let t = b;
            b = a % b;
            a = t;
        }
        a
    }
    a / gcd(a, b) * b
}

fn eval_data(
    data: &CocycleData,
    g: &Arc<FiniteGroupoid>,
    root_order: Option<u32>,
    pair: PairRef,
) -> Result<Complex64> {
    match data {
        CocycleData::Trivial => Ok(Complex64::new(1.0, 0.0)),
        CocycleData::Magnetic { field } => {
            let (base, a, b) = resolve_labels(g, &pair)?;
            magnetic_phase(g, field, base, a, b)
        }
        CocycleData::RootTable { table } => {
            let (xi, eta) = resolve_ids(g, &pair)?;
            let order = root_order.expect("root table without order");
            table
                .get(&(xi, eta))
                .map(|&k| root_value(k, order))
                .ok_or_else(|| Error::IncompleteCocycle(format!("({xi:?},{eta:?})")))
        }
        CocycleData::RootTableComplex(table) => {
            let (xi, eta) = resolve_ids(g, &pair)?;
            table
                .get(&(xi, eta))
                .copied()
                .ok_or_else(|| Error::IncompleteCocycle(format!("({xi:?},{eta:?})")))
        }
        CocycleData::RootCoboundary { sigma } => {
            let order = root_order.expect("root coboundary without order");
            let (xi, eta) = resolve_ids(g, &pair)?;
            let prod = g.compose(xi, eta)?;
            let k = (sigma[xi.idx()] + sigma[eta.idx()] + order - sigma[prod.idx()] % order) % order;
            Ok(root_value(k, order))
        }
        CocycleData::Coboundary { sigma } => {
            let (xi, eta) = resolve_ids(g, &pair)?;
            let prod = g.compose(xi, eta)?;
            Ok(sigma[xi.idx()] * sigma[eta.idx()] * sigma[prod.idx()].conj())
        }
        CocycleData::Product(l, r) => {
            let (lv, rv) = match pair {
                PairRef::Ids(xi, eta) => (
                    eval_data(l, g, root_order, PairRef::Ids(xi, eta))?,
                    eval_data(r, g, root_order, PairRef::Ids(xi, eta))?,
                ),
                PairRef::Labels { base, a, b } => (
                    eval_data(l, g, root_order, PairRef::Labels { base, a, b })?,
                    eval_data(r, g, root_order, PairRef::Labels { base, a, b })?,
                ),
            };
            Ok(lv * rv)
        }
        CocycleData::Inverse(inner) => {
            let v = eval_data(inner, g, root_order, pair)?;
            Ok(v.conj())
        }
        CocycleData::Power(inner, n) => {
            let v = eval_data(inner, g, root_order, pair)?;
            Ok(v.powi(*n))
        }
    }
}

fn eval_root_data(
    data: &CocycleData,
    g: &Arc<FiniteGroupoid>,
    order: u32,
    xi: ArrowId,
    eta: ArrowId,
) -> Option<u32> {
    match data {
        CocycleData::Trivial => Some(0),
        CocycleData::RootTable { table } => table.get(&(xi, eta)).map(|&k| k % order),
        CocycleData::RootCoboundary { sigma } => {
            let prod = g.compose(xi, eta).ok()?;
            Some((sigma[xi.idx()] + sigma[eta.idx()] + order - sigma[prod.idx()] % order) % order)
        }
        CocycleData::Product(l, r) => {
            let (a, b) = (
                eval_root_data(l, g, order, xi, eta)?,
                eval_root_data(r, g, order, xi, eta)?,
            );
            Some((a + b) % order)
        }
        CocycleData::Inverse(inner) => {
            let k = eval_root_data(inner, g, order, xi, eta)?;
            Some((order - k % order) % order)
        }
        CocycleData::Power(inner, n) => {
            let k = eval_root_data(inner, g, order, xi, eta)? as i64;
            let m = order as i64;
            Some((((k * *n as i64) % m + m) % m) as u32)
        }
        CocycleData::RootTableComplex(_) | CocycleData::Coboundary { .. }
        | CocycleData::Magnetic { .. } => None,
    }
}

fn resolve_ids(g: &FiniteGroupoid, pair: &PairRef) -> Result<(ArrowId, ArrowId)> {
    match pair {
        PairRef::Ids(xi, eta) => Ok((*xi, *eta)),
        PairRef::Labels { base, a, b } => {
            let eta = g.arrow_by_label(*base, *a).ok_or_else(|| {
                Error::OutOfWindow(format!("arrow ({}, {a}) not materialized", g.units.name(*base)))
            })?;
            let mid = g.range(eta);
            let xi = g.arrow_by_label(mid, *b).ok_or_else(|| {
                Error::OutOfWindow(format!("arrow ({}, {b}) not materialized", g.units.name(mid)))
            })?;
            Ok((xi, eta))
        }
    }
}

fn resolve_labels(g: &FiniteGroupoid, pair: &PairRef) -> Result<(UnitId, GroupElem, GroupElem)> {
    match pair {
        PairRef::Labels { base, a, b } => Ok((*base, *a, *b)),
        PairRef::Ids(xi, eta) => {
            let (ArrowLabel::Elem(b), ArrowLabel::Elem(a)) = (g.label(*xi), g.label(*eta)) else {
                return Err(Error::InvalidInput(
                    "label evaluation on a non-action groupoid".into(),
                ));
            };
            Ok((g.source(*eta), a, b))
        }
    }
}

/// Flux of B seen from `base` through the triangle (e, a, ba).
fn magnetic_phase(
    g: &FiniteGroupoid,
    field: &MagneticFieldSpec,
    base: UnitId,
    a: GroupElem,
    b: GroupElem,
) -> Result<Complex64> {
    let action = g
        .action()
        .ok_or_else(|| Error::InvalidInput("magnetic cocycle on a table groupoid".into()))?;
    let ba = action.group.mul(b, a);
    let (GroupElem::Z2(ax, ay), GroupElem::Z2(bx, by)) = (a, ba) else {
        return Err(Error::InvalidInput("magnetic flux needs Z^2 labels".into()));
    };
    let tri = [(0i64, 0i64), (ax, ay), (bx, by)];
    let flux = match field {
        MagneticFieldSpec::Zero => 0.0,
        MagneticFieldSpec::ConstantFlux { alpha } => {
            triangle_flux_constant(*alpha, tri[0], tri[1], tri[2])
        }
        MagneticFieldSpec::UnitFlux { alpha, .. } => {
            let mut missing: Option<String> = None;
            let flux = triangle_flux_table(
                &|c| match action.theta(GroupElem::Z2(c.0, c.1), base) {
                    Some(u) => alpha[u.idx()],
                    None => {
                        // recorded and reported below; clipped cells outside the
                        // window are a genuine materialization gap
                        0.0
                    }
                },
                tri[0],
                tri[1],
                tri[2],
            );
            // re-scan for gaps to report honestly
            let (lo_x, hi_x) = (
                tri.iter().map(|p| p.0).min().unwrap(),
                tri.iter().map(|p| p.0).max().unwrap(),
            );
            let (lo_y, hi_y) = (
                tri.iter().map(|p| p.1).min().unwrap(),
                tri.iter().map(|p| p.1).max().unwrap(),
            );
            'scan: for i in lo_x..hi_x {
                for j in lo_y..hi_y {
                    if action.theta(GroupElem::Z2(i, j), base).is_none() {
                        missing = Some(format!("plaquette ({i},{j}) from {}", g.units.name(base)));
                        break 'scan;
                    }
                }
            }
            if let Some(m) = missing {
                return Err(Error::OutOfWindow(format!("flux table consulted outside window: {m}")));
            }
            flux
        }
    };
    Ok(Complex64::new(flux.cos(), flux.sin()))
}

/// Cocycle identity and normalization over all materialized composable
/// triples of g, for an arbitrary candidate phase map. `None` from the
/// candidate on a composable pair is an incompleteness error. Triples are
/// checked in parallel per middle arrow with a fixed reduction order, so the
/// reported worst triple is deterministic.
pub fn check_phase_map(
    g: &Arc<FiniteGroupoid>,
    phase: &(dyn Fn(ArrowId, ArrowId) -> Option<Complex64> + Sync),
) -> Result<CocycleCheck> {
    use rayon::prelude::*;

    let get = |xi: ArrowId, eta: ArrowId| -> Result<Complex64> {
        phase(xi, eta).ok_or_else(|| Error::IncompleteCocycle(format!("({xi:?},{eta:?})")))
    };

    // normalization at units
    let mut norm_res = 0.0f64;
    for id in g.arrow_ids() {
        let u_r = g.unit_arrow(g.range(id));
        let u_s = g.unit_arrow(g.source(id));
        norm_res = norm_res.max((get(u_r, id)? - 1.0).norm());
        norm_res = norm_res.max((get(id, u_s)? - 1.0).norm());
    }

    // identity over triples (xi, eta, zeta) with products materialized
    let per_eta: Vec<Result<(f64, Option<String>, usize)>> = (0..g.arrow_count() as u32)
        .into_par_iter()
        .map(|raw| {
            let eta = ArrowId(raw);
            let mut worst = 0.0f64;
            let mut worst_triple = None;
            let mut triples = 0usize;
            let fiber_left = g.fiber_source(g.range(eta));
            let fiber_right = g.fiber_range(g.source(eta));
            for &xi in fiber_left {
                let Ok(xi_eta) = g.compose(xi, eta) else { continue };
                let w_xi_eta = get(xi, eta)?;
                for &zeta in fiber_right {
                    let Ok(eta_zeta) = g.compose(eta, zeta) else { continue };
                    triples += 1;
                    let lhs = w_xi_eta * get(xi_eta, zeta)?;
                    let rhs = get(eta, zeta)? * get(xi, eta_zeta)?;
                    let r = (lhs - rhs).norm();
                    if r > worst {
                        worst = r;
                        worst_triple = Some(format!("({xi:?},{eta:?},{zeta:?})"));
                    }
                }
            }
            Ok((worst, worst_triple, triples))
        })
        .collect();

    let mut worst = 0.0f64;
    let mut worst_triple = None;
    let mut triples = 0usize;
    for entry in per_eta {
        let (w, t, n) = entry?;
        if w > worst {
            worst = w;
            worst_triple = t;
        }
        triples += n;
    }
    Ok(CocycleCheck {
        ok: worst <= IDENTITY_TOL && norm_res <= IDENTITY_TOL,
        worst_residual: worst,
        worst_triple,
        normalization_residual: norm_res,
        triples_checked: triples,
    })
}

/// The mu_N extension groupoid of (g, omega): arrows mu_N x arrows(g) with
/// (s, xi)(t, eta) = (s t omega(xi,eta), xi eta). Built as an explicit table
/// groupoid with Haar weight w/N; associativity is re-verified.
pub struct Extension {
    pub groupoid: Arc<FiniteGroupoid>,
    pub base: Arc<FiniteGroupoid>,
    pub order: u32,
    base_cocycle: Arc<TwoCocycle>,
    trivial: Arc<TwoCocycle>,
    powers: Vec<Arc<TwoCocycle>>,
}

impl Extension {
    pub fn arrow_id(&self, root: u32, base: ArrowId) -> ArrowId {
        ArrowId(root * self.base.arrow_count() as u32 + base.0)
    }

    pub fn split(&self, id: ArrowId) -> (u32, ArrowId) {
        let b = self.base.arrow_count() as u32;
        (id.0 / b, ArrowId(id.0 % b))
    }

    pub fn base_cocycle(&self) -> &Arc<TwoCocycle> {
        &self.base_cocycle
    }

    /// The trivial cocycle of the (untwisted) extension groupoid; shared so
    /// that kernels built through this extension stay composable.
    pub fn trivial_cocycle(&self) -> Arc<TwoCocycle> {
        self.trivial.clone()
    }

    /// omega^n on the base groupoid, |n| < N; the target twist of kappa^n.
    pub fn cocycle_power(&self, n: i32) -> Result<Arc<TwoCocycle>> {
        if n.unsigned_abs() >= self.order {
            return Err(Error::Aliasing { n, order: self.order });
        }
        let idx = (n + self.order as i32 - 1) as usize;
        Ok(self.powers[idx].clone())
    }
}

pub fn build_extension_groupoid(omega: &Arc<TwoCocycle>, order: u32) -> Result<Extension> {
    let base = omega.groupoid().clone();
    let Some(m) = omega.root_order() else {
        return Err(Error::NotRootsOfUnity(order));
    };
    if order == 0 || order % m != 0 {
        return Err(Error::NotRootsOfUnity(order));
    }
    let scale = order / m;
    let b_count = base.arrow_count() as u32;
    let mut arrows = Vec::with_capacity((order * b_count) as usize);
    for k in 0..order {
        for idx in 0..b_count {
            let a = base.arrow(ArrowId(idx));
            arrows.push(Arrow {
                source: a.source,
                range: a.range,
                label: ArrowLabel::Ext { root: k, base: ArrowId(idx) },
            });
        }
    }
    let ext_id = |k: u32, b: ArrowId| ArrowId(k * b_count + b.0);

    let pairs = base.composable_pairs();
    let mut compose = HashMap::with_capacity(pairs.len() * (order * order) as usize);
    for (xi, eta) in pairs {
        let prod = base.compose(xi, eta)?;
        let k_omega = omega
            .eval_root(xi, eta)?
            .ok_or(Error::NotRootsOfUnity(order))?
            * scale;
        for s in 0..order {
            for t in 0..order {
                compose.insert(
                    (ext_id(s, xi), ext_id(t, eta)),
                    ext_id((s + t + k_omega) % order, prod),
                );
            }
        }
    }
    let mut invert = vec![ArrowId(0); (order * b_count) as usize];
    for idx in 0..b_count {
        let xi = ArrowId(idx);
        let xi_inv = base.invert(xi);
        let k_omega = omega
            .eval_root(xi, xi_inv)?
            .ok_or(Error::NotRootsOfUnity(order))?
            * scale;
        for s in 0..order {
            // (s, xi)^{-1} = (s^{-1} omega(xi, xi^{-1})^{-1}, xi^{-1})
            let k = (2 * order - s - (k_omega % order)) % order;
            invert[ext_id(s, xi).idx()] = ext_id(k, xi_inv);
        }
    }
    let units = base.units.clone();
    let weight = base.fiber_weight() / order as f64;
    let groupoid = FiniteGroupoid::from_table(units, arrows, compose, invert, weight)?;
    groupoid.validate_structure()?;
    let trivial = Arc::new(TwoCocycle::trivial(groupoid.clone()));
    let powers = (1 - order as i32..order as i32)
        .map(|n| Arc::new(omega.power(n)))
        .collect();
    Ok(Extension { groupoid, base, order, base_cocycle: omega.clone(), trivial, powers })
}

/// Spec-level convenience: magnetic cocycle from a field and an action
/// materialized as a groupoid.
pub fn magnetic_cocycle(
    groupoid: Arc<FiniteGroupoid>,
    field: MagneticFieldSpec,
) -> Result<TwoCocycle> {
    TwoCocycle::magnetic(groupoid, field)
}
