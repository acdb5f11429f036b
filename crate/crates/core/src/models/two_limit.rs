//! The two-limit line: Z acting on its two-point compactification
//! Z u {-inf, +inf}, with finitely many hopping coefficients and a potential
//! taking the configured limits at the two ends. Includes the partial-action
//! reduction to the complement of a finite excluded set.

use super::{BoundaryComponent, BoundaryOperator, ModelBlueprint, ModelInstance, ScenarioModel};
use crate::cocycle::TwoCocycle;
use crate::error::{Error, Result};
use crate::group::{GroupDesc, GroupElem};
use crate::groupoid::{FiniteGroupoid, GroupAction};
use crate::kernel::TwistedKernel;
use crate::unit_space::{UnitId, UnitPoint, UnitSpace};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

const SYMBOL_GRID: usize = 4096;

#[derive(Clone, Debug)]
pub struct TwoLimitParams {
    pub v_minus: f64,
    pub v_plus: f64,
    pub hopping: Vec<(i64, Complex64)>,
}

impl TwoLimitParams {
    fn support_radius(&self) -> i64 {
        self.hopping.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }

    fn potential(&self, n: i64) -> f64 {
        if n < 0 {
            self.v_minus
        } else {
            self.v_plus
        }
    }

    fn symbol_offsets(&self, v: f64) -> Vec<(Vec<i64>, Complex64)> {
        let mut by_offset: BTreeMap<i64, Complex64> = BTreeMap::new();
        for &(k, t) in &self.hopping {
            *by_offset.entry(k).or_insert(Complex64::new(0.0, 0.0)) += t;
        }
        *by_offset.entry(0).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(v, 0.0);
        by_offset
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| (vec![k], c))
            .collect()
    }
}

/// Build the compactified line unit space plus its translation action,
/// materialized on [-radius, radius].
fn line_units(radius: i64) -> Result<UnitSpace> {
    let mut points = Vec::new();
    for n in -radius..=radius {
        points.push(UnitPoint {
            name: n.to_string(),
            closure: BTreeSet::new(), // filled below (reflexive)
            interior: true,
            coord: Some(GroupElem::Z(n)),
        });
    }
    let minus = UnitId(points.len() as u32);
    points.push(UnitPoint {
        name: "-inf".into(),
        closure: BTreeSet::new(),
        interior: false,
        coord: None,
    });
    let plus = UnitId(points.len() as u32);
    points.push(UnitPoint {
        name: "+inf".into(),
        closure: BTreeSet::new(),
        interior: false,
        coord: None,
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.closure.insert(UnitId(i as u32));
    }
    UnitSpace::new(points, [minus, plus].into_iter().collect())
}

/// Hopping + potential kernel on every unit (boundary arrows carry the same
/// hopping and the limit potential).
fn line_kernel(
    g: &Arc<FiniteGroupoid>,
    cocycle: &Arc<TwoCocycle>,
    params: &TwoLimitParams,
) -> Result<TwistedKernel> {
    let mut values: BTreeMap<crate::groupoid::ArrowId, Complex64> = BTreeMap::new();
    for x in g.units.ids() {
        let v = match g.units.coord(x) {
            Some(GroupElem::Z(n)) => params.potential(n),
            _ => {
                if g.units.name(x) == "-inf" {
                    params.v_minus
                } else {
                    params.v_plus
                }
            }
        };
        if v != 0.0 {
            values.insert(g.unit_arrow(x), Complex64::new(v, 0.0));
        }
        for &(k, t) in &params.hopping {
            if k == 0 {
                let e = values.entry(g.unit_arrow(x)).or_insert(Complex64::new(0.0, 0.0));
                *e += t;
                continue;
            }
            if let Some(a) = g.arrow_by_label(x, GroupElem::Z(k)) {
                values.insert(a, t);
            }
        }
    }
    TwistedKernel::new(g.clone(), cocycle.clone(), values, Complex64::new(0.0, 0.0))
}

struct TwoLimitBlueprint {
    params: TwoLimitParams,
    /// Interior coordinates excluded by the partial-action reduction.
    excluded: BTreeSet<i64>,
}

impl TwoLimitBlueprint {
    fn edge_width(n: usize) -> usize {
        ((n as f64) * 0.1).ceil() as usize
    }
}

impl ModelBlueprint for TwoLimitBlueprint {
    fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        if size < 8 {
            return Err(Error::InvalidInput("window too small".into()));
        }
        let half = (size as i64) / 2;
        let support = self.params.support_radius().max(1);
        let radius = half + 2 * support;
        let units = line_units(radius)?;
        let action = GroupAction::translation(GroupDesc::Z, units)?;
        let full = FiniteGroupoid::from_action(action, 2 * support)?;

        let groupoid = if self.excluded.is_empty() {
            full
        } else {
            let keep = kept_units(&full, &self.excluded);
            full.reduce_to_subset(&keep)?.groupoid
        };
        let cocycle = Arc::new(TwoCocycle::trivial(groupoid.clone()));
        let kernel = line_kernel(&groupoid, &cocycle, &self.params)?;

        let lo = -half;
        let hi = lo + size as i64 - 1;
        let mut window_units = Vec::new();
        for n in lo..=hi {
            if self.excluded.contains(&n) {
                continue;
            }
            if let Some(u) = groupoid.units.by_coord(GroupElem::Z(n)) {
                window_units.push(u);
            }
        }
        let base = window_units
            .first()
            .copied()
            .ok_or_else(|| Error::InvalidInput("excluded set covers the whole window".into()))?;
        let n = window_units.len();
        let w = TwoLimitBlueprint::edge_width(n);
        let edge_mask = (0..n).map(|i| i < w || i + w >= n).collect();
        Ok(ModelInstance { groupoid, cocycle, kernel, base: Some(base), window_units, edge_mask })
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

fn kept_units(g: &Arc<FiniteGroupoid>, excluded: &BTreeSet<i64>) -> BTreeSet<UnitId> {
    g.units
        .ids()
        .filter(|&u| match g.units.coord(u) {
            Some(GroupElem::Z(n)) => !excluded.contains(&n),
            _ => true,
        })
        .collect()
}

fn build(params: TwoLimitParams, excluded: BTreeSet<i64>, name: String) -> Result<ScenarioModel> {
    if params.hopping.is_empty() {
        return Err(Error::InvalidInput("at least one hopping coefficient required".into()));
    }
    let boundary = vec![
        BoundaryComponent {
            name: "-inf".into(),
            quasi_orbit_units: vec!["-inf".into()],
            generator: "-inf".into(),
            realization: BoundaryOperator::Symbol {
                offsets: params.symbol_offsets(params.v_minus),
                grid: SYMBOL_GRID,
            },
        },
        BoundaryComponent {
            name: "+inf".into(),
            quasi_orbit_units: vec!["+inf".into()],
            generator: "+inf".into(),
            realization: BoundaryOperator::Symbol {
                offsets: params.symbol_offsets(params.v_plus),
                grid: SYMBOL_GRID,
            },
        },
    ];
    let blueprint = Arc::new(TwoLimitBlueprint { params, excluded });
    let instance = blueprint.instantiate(64)?;
    Ok(ScenarioModel {
        name,
        blueprint,
        instance,
        boundary,
        boundary_nonunital: false,
        standard: true,
        truncation: crate::spectral::TruncationConfig {
            sizes: vec![500, 1000, 2000],
            ..Default::default()
        },
        nested_components: vec![],
        stretch: false,
        representative_units: vec!["0".into(), "-inf".into(), "+inf".into()],
        cone_symbol: None,
    })
}

/// X = Z u {-inf, +inf} with hopping `hopping` and potential limits v_minus,
/// v_plus; the boundary covering is the pair of fixed points with isotropy Z.
pub fn two_limit_line(
    v_minus: f64,
    v_plus: f64,
    hopping: &[(i64, Complex64)],
) -> Result<ScenarioModel> {
    let params = TwoLimitParams { v_minus, v_plus, hopping: hopping.to_vec() };
    let name = format!("two-limit(v-={v_minus},v+={v_plus})");
    build(params, BTreeSet::new(), name)
}

/// Partial-action reduction of a two-limit model to L = (Z \ K) u {-inf,+inf}:
/// the boundary covering is identical, so the boundary-formula clouds agree
/// exactly.
pub fn partial_action_complement(base: &ScenarioModel, k: &[i64]) -> Result<ScenarioModel> {
    let bp = base
        .blueprint_as_two_limit()
        .ok_or_else(|| Error::InvalidInput("partial-action reduction needs a two-limit base".into()))?;
    let excluded: BTreeSet<i64> = k.iter().copied().collect();
    let name = format!("{}|complement({} sites)", base.name, excluded.len());
    build(bp.params.clone(), excluded, name)
}

impl ScenarioModel {
    fn blueprint_as_two_limit(&self) -> Option<&TwoLimitBlueprint> {
        let any: &dyn std::any::Any = self.blueprint_any();
        any.downcast_ref::<TwoLimitBlueprint>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::vector_rep;

    fn nn_hopping() -> Vec<(i64, Complex64)> {
        vec![(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))]
    }

    #[test]
    fn structure_checks() {
        let m = two_limit_line(0.0, 4.0, &nn_hopping()).unwrap();
        let check = m.validate().unwrap();
        assert!(check.ok(), "{check:?}");
        let (std_flag, orbit) = m.instance.groupoid.is_standard();
        assert!(std_flag);
        assert!(orbit.unwrap().len() > 8);
        // three orbits: Z, -inf, +inf
        assert_eq!(m.instance.groupoid.orbits().len(), 3);
    }

    #[test]
    fn vector_rep_is_tridiagonal_with_step_potential() {
        let m = two_limit_line(0.0, 4.0, &nn_hopping()).unwrap();
        let inst = m.instantiate(32).unwrap();
        let h = inst.vector_matrix().unwrap();
        assert!(h.hermitian);
        let n = h.dim();
        for i in 0..n {
            for j in 0..n {
                let v = h.data[[i, j]];
                let (ci, cj) = (
                    inst.groupoid.units.coord(inst.window_units[i]).unwrap(),
                    inst.groupoid.units.coord(inst.window_units[j]).unwrap(),
                );
                let (GroupElem::Z(ni), GroupElem::Z(nj)) = (ci, cj) else { panic!() };
                match ni - nj {
                    0 => {
                        let want = if ni < 0 { 0.0 } else { 4.0 };
                        assert!((v.re - want).abs() < 1e-14);
                    }
                    1 | -1 => assert!((v.re - 1.0).abs() < 1e-14),
                    _ => assert!(v.norm() < 1e-14),
                }
            }
        }
    }

    #[test]
    fn boundary_restriction_is_the_limit_kernel() {
        // restrict(f, {-inf,+inf}) equals the declared asymptotic kernel
        let m = two_limit_line(-1.0, 1.0, &nn_hopping()).unwrap();
        let g = &m.instance.groupoid;
        let subset: BTreeSet<UnitId> = g.units.boundary_units().into_iter().collect();
        let rho = crate::kernel::RestrictionMorphism::new(
            g.clone(),
            m.instance.cocycle.clone(),
            &subset,
        )
        .unwrap();
        let restricted = rho.apply(&m.instance.kernel).unwrap();
        let rg = rho.target();
        for id in rg.arrow_ids() {
            let v = restricted.value(id);
            let x = rg.source(id);
            let expected = if rg.is_unit_arrow(id) {
                if rg.units.name(x) == "-inf" {
                    -1.0
                } else {
                    1.0
                }
            } else {
                match rg.label(id) {
                    crate::groupoid::ArrowLabel::Elem(GroupElem::Z(k)) if k.abs() == 1 => 1.0,
                    _ => 0.0,
                }
            };
            assert!(
                (v - Complex64::new(expected, 0.0)).norm() < 1e-14,
                "arrow {id:?}: {v} vs {expected}"
            );
        }
    }

    #[test]
    fn reduction_drops_excluded_sites() {
        let base = two_limit_line(0.0, 0.0, &nn_hopping()).unwrap();
        let reduced = partial_action_complement(&base, &[-3, -2, -1, 0, 1, 2, 3]).unwrap();
        let inst = reduced.instantiate(64).unwrap();
        assert_eq!(inst.window_units.len(), 64 - 7);
        // boundary data identical
        let cb = base.essential_spectrum_boundary().unwrap();
        let cr = reduced.essential_spectrum_boundary().unwrap();
        assert_eq!(cb.points(), cr.points());
    }

    #[test]
    fn two_sided_reduction_example() {
        // L = {n >= 5} u {-inf, +inf}: boundary isotropy unchanged, main-orbit
        // arrows restricted to both endpoints >= 5
        let m = two_limit_line(0.0, 0.0, &nn_hopping()).unwrap();
        let g = &m.instance.groupoid;
        let keep: BTreeSet<UnitId> = g
            .units
            .ids()
            .filter(|&u| match g.units.coord(u) {
                Some(GroupElem::Z(n)) => n >= 5,
                _ => true,
            })
            .collect();
        let red = g.reduce_to_subset(&keep).unwrap();
        let rg = &red.groupoid;
        for id in rg.arrow_ids() {
            let (s, r) = (rg.source(id), rg.range(id));
            for u in [s, r] {
                match rg.units.coord(u) {
                    Some(GroupElem::Z(n)) => assert!(n >= 5),
                    _ => {}
                }
            }
        }
        // boundary isotropy count unchanged: same number of arrows at +inf
        let pinf_old = g.units.by_name("+inf").unwrap();
        let pinf_new = rg.units.by_name("+inf").unwrap();
        assert_eq!(
            g.fiber_source(pinf_old).len(),
            rg.fiber_source(pinf_new).len()
        );
    }

    #[test]
    fn quasi_orbits_of_the_line() {
        let m = two_limit_line(0.0, 0.0, &nn_hopping()).unwrap();
        let g = &m.instance.groupoid;
        let zero = g.units.by_coord(GroupElem::Z(0)).unwrap();
        let q = g.quasi_orbit_of(zero);
        assert_eq!(q.members.len(), g.units.len());
        let names: Vec<&str> = q.non_generic.iter().map(|&u| g.units.name(u)).collect();
        assert_eq!(names, vec!["-inf", "+inf"]);
        let pinf = g.units.by_name("+inf").unwrap();
        let qp = g.quasi_orbit_of(pinf);
        assert_eq!(qp.members.len(), 1);
        assert!(qp.generic.contains(&pinf));
    }

    #[test]
    fn vector_rep_matches_regular_rep_at_zero() {
        // unitary equivalence along the range bijection: same matrix up to
        // basis relabeling; with the label ordering they coincide exactly
        let m = two_limit_line(0.5, -0.25, &nn_hopping()).unwrap();
        let inst = m.instantiate(16).unwrap();
        let g = &inst.groupoid;
        let z = g.units.by_coord(GroupElem::Z(0)).unwrap();
        let labels: Vec<GroupElem> = inst
            .window_units
            .iter()
            .map(|&u| {
                let Some(GroupElem::Z(n)) = g.units.coord(u) else { panic!() };
                GroupElem::Z(n)
            })
            .collect();
        let w = crate::rep::TruncationWindow::FiberLabels { base: z, labels };
        let reg = crate::rep::regular_rep(&inst.kernel, &w).unwrap();
        let vec = vector_rep(&inst.kernel, z, &inst.window_units).unwrap();
        assert!(reg.max_abs_diff(&vec) < 1e-14);
    }
}
