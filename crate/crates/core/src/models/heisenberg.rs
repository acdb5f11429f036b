//! Discrete Heisenberg Wiener-Hopf scenario (stretch): compression of a
//! group convolution to the positive cone, with the two asymptotic cone
//! operators covering the boundary quasi-orbits. Desk analog of the
//! continuum construction; excluded from hard acceptance tolerances.

use super::{BoundaryComponent, BoundaryOperator, ConeBuilder, ModelBlueprint, ModelInstance, ScenarioModel};
use crate::cocycle::TwoCocycle;
use crate::error::{Error, Result};
use crate::group::{GroupDesc, GroupElem};
use crate::groupoid::{FiniteGroupoid, GroupAction};
use crate::kernel::TwistedKernel;
use crate::rep::{OperatorMatrix, Provenance};
use crate::unit_space::{UnitId, UnitPoint, UnitSpace};
use ndarray::prelude::*;
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct HeisenbergParams {
    pub symbol: Vec<(GroupElem, Complex64)>,
}

impl HeisenbergParams {
    fn support_radius(&self) -> i64 {
        let g = GroupDesc::Heisenberg;
        self.symbol.iter().map(|&(a, _)| g.norm(a)).max().unwrap_or(0)
    }
}

/// Ball of H(Z) of the given radius, one-point compactified.
fn heisenberg_units(radius: i64) -> Result<UnitSpace> {
    let mut points = Vec::new();
    for a in GroupDesc::Heisenberg.ball(radius) {
        points.push(UnitPoint {
            name: a.to_string(),
            closure: BTreeSet::new(),
            interior: true,
            coord: Some(a),
        });
    }
    let inf = UnitId(points.len() as u32);
    points.push(UnitPoint {
        name: "inf".into(),
        closure: BTreeSet::new(),
        interior: false,
        coord: None,
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.closure.insert(UnitId(i as u32));
    }
    UnitSpace::new(points, [inf].into_iter().collect())
}

struct HeisenbergBlueprint {
    params: HeisenbergParams,
}

impl ModelBlueprint for HeisenbergBlueprint {
    /// `size` = cone side w; the window is the cone [0, w)^3, w^3 sites.
    fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        if size < 2 || size > 12 {
            return Err(Error::InvalidInput("cone side must be in 2..=12".into()));
        }
        let w = size as i64;
        let support = self.params.support_radius().max(1);
        let radius = w + support;
        let units = heisenberg_units(radius)?;
        let action = GroupAction::translation(GroupDesc::Heisenberg, units)?;
        let full = FiniteGroupoid::from_action(action, support)?;
        // non-invariant reduction to the positive cone plus the boundary point
        let keep: BTreeSet<UnitId> = full
            .units
            .ids()
            .filter(|&u| match full.units.coord(u) {
                Some(GroupElem::Heis(a, b, c)) => a >= 0 && b >= 0 && c >= 0,
                _ => true,
            })
            .collect();
        let groupoid = full.reduce_to_subset(&keep)?.groupoid;
        let cocycle = Arc::new(TwoCocycle::trivial(groupoid.clone()));
        let mut values = BTreeMap::new();
        for x in groupoid.units.ids() {
            for &(a, c) in &self.params.symbol {
                if a == GroupDesc::Heisenberg.identity() {
                    let e = values.entry(groupoid.unit_arrow(x)).or_insert(Complex64::new(0.0, 0.0));
                    *e += c;
                } else if let Some(id) = groupoid.arrow_by_label(x, a) {
                    values.insert(id, c);
                }
            }
        }
        let kernel =
            TwistedKernel::new(groupoid.clone(), cocycle.clone(), values, Complex64::new(0.0, 0.0))?;

        let mut window_units = Vec::new();
        let mut edge_mask = Vec::new();
        let margin = ((size as f64) * 0.2).ceil() as i64;
        for a in 0..w {
            for b in 0..w {
                for c in 0..w {
                    let u = groupoid
                        .units
                        .by_coord(GroupElem::Heis(a, b, c))
                        .ok_or_else(|| Error::OutOfWindow("cone site missing".into()))?;
                    window_units.push(u);
                    // only the far faces are artificial cutoffs
                    edge_mask.push(a >= w - margin || b >= w - margin || c >= w - margin);
                }
            }
        }
        let base = groupoid
            .units
            .by_coord(GroupElem::Heis(0, 0, 0))
            .ok_or_else(|| Error::OutOfWindow("cone origin missing".into()))?;
        Ok(ModelInstance { groupoid, cocycle, kernel, base: Some(base), window_units, edge_mask })
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Symmetric nearest-neighbor symbol on H(Z).
pub fn symmetric_symbol() -> Vec<(GroupElem, Complex64)> {
    let g = GroupDesc::Heisenberg;
    let one = Complex64::new(1.0, 0.0);
    let gens = [GroupElem::Heis(1, 0, 0), GroupElem::Heis(0, 1, 0), GroupElem::Heis(0, 0, 1)];
    let mut out = Vec::new();
    for a in gens {
        out.push((a, one));
        out.push((g.inv(a), one));
    }
    out
}

/// Wiener-Hopf compression on the discrete Heisenberg cone, with the
/// asymptotic operators realized as cone compressions on the quasi-orbit
/// covering of the boundary.
pub fn heisenberg_wiener_hopf(
    symbol: &[(GroupElem, Complex64)],
    cone_side: usize,
) -> Result<ScenarioModel> {
    if symbol.is_empty() {
        return Err(Error::InvalidInput("symbol must be nonempty".into()));
    }
    for (a, _) in symbol {
        if !matches!(a, GroupElem::Heis(_, _, _)) {
            return Err(Error::InvalidInput("symbol must live on H(Z)".into()));
        }
    }
    let params = HeisenbergParams { symbol: symbol.to_vec() };
    let support = params.support_radius().max(1);
    if cone_side <= 2 * support as usize {
        return Err(Error::InvalidInput("window too small for the symbol support".into()));
    }
    let cone_matrix_side = cone_side.min(8);
    let boundary = vec![
        BoundaryComponent {
            name: "U".into(),
            quasi_orbit_units: vec!["inf".into()],
            generator: "inf".into(),
            realization: BoundaryOperator::Cone {
                matrix_side: cone_matrix_side,
                builder: ConeBuilder::HeisenbergU,
            },
        },
        BoundaryComponent {
            name: "V".into(),
            quasi_orbit_units: vec!["inf".into()],
            generator: "inf".into(),
            realization: BoundaryOperator::Cone {
                matrix_side: cone_matrix_side,
                builder: ConeBuilder::HeisenbergV,
            },
        },
        BoundaryComponent {
            name: "axis1".into(),
            quasi_orbit_units: vec!["inf".into()],
            generator: "inf".into(),
            realization: BoundaryOperator::Cone {
                matrix_side: cone_matrix_side,
                builder: ConeBuilder::HeisenbergAxis1,
            },
        },
    ];
    let blueprint = Arc::new(HeisenbergBlueprint { params: params.clone() });
    let instance = blueprint.instantiate((2 * support as usize + 2).min(4))?;
    Ok(ScenarioModel {
        name: format!("heisenberg-wh(side={cone_side})"),
        blueprint,
        instance,
        boundary,
        boundary_nonunital: false,
        standard: true,
        truncation: crate::spectral::TruncationConfig {
            sizes: vec![cone_side.saturating_sub(1).max(3), cone_side],
            cluster_tol: 0.25,
            min_cluster_population: 2,
            ..Default::default()
        },
        // X bar_1 is contained in the closure of X_{1,2}
        nested_components: vec![(2, 0)],
        stretch: true,
        representative_units: vec!["(0,0,0)".into(), "inf".into()],
        cone_symbol: Some(params.symbol),
    })
}

/// Sites of the asymptotic cones: U^{-1} = Z+ x Z+ x Z, V^{-1} = Z x Z+ x Z+,
/// and the axis-1 halfspace Z+ x Z x Z.
fn cone_sites(builder: &ConeBuilder, side: usize) -> Vec<GroupElem> {
    let s = side as i64;
    let half = s / 2;
    let range_pos: Vec<i64> = (0..s).collect();
    let range_sym: Vec<i64> = (-half..s - half).collect();
    let (r1, r2, r3) = match builder {
        ConeBuilder::HeisenbergU => (&range_pos, &range_pos, &range_sym),
        ConeBuilder::HeisenbergV => (&range_sym, &range_pos, &range_pos),
        ConeBuilder::HeisenbergAxis1 => (&range_pos, &range_sym, &range_sym),
    };
    let mut out = Vec::with_capacity(side * side * side);
    for &a in r1 {
        for &b in r2 {
            for &c in r3 {
                out.push(GroupElem::Heis(a, b, c));
            }
        }
    }
    out
}

/// Compression of group convolution by the model symbol to a cone window:
/// entries phi(h k^{-1}).
pub fn cone_matrix(
    model: &ScenarioModel,
    builder: &ConeBuilder,
    side: usize,
) -> Result<OperatorMatrix> {
    let symbol = model
        .cone_symbol
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("model has no cone symbol".into()))?;
    let sites = cone_sites(builder, side);
    let index: std::collections::HashMap<GroupElem, usize> =
        sites.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let n = sites.len();
    let desc = GroupDesc::Heisenberg;
    let mut data = Array2::<Complex64>::zeros((n, n));
    for (j, &k_site) in sites.iter().enumerate() {
        for &(a, c) in symbol {
            // h = a k  <->  h k^{-1} = a
            let h = desc.mul(a, k_site);
            if let Some(&i) = index.get(&h) {
                data[[i, j]] += c;
            }
        }
    }
    Ok(OperatorMatrix::new(
        data,
        Provenance {
            description: format!("cone[{builder:?}, side {side}]"),
            window: n,
            boundary_clipped: true,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{directed_hausdorff, spectrum};

    #[test]
    fn identity_symbol_everywhere_one() {
        let sym = vec![(GroupElem::Heis(0, 0, 0), Complex64::new(1.0, 0.0))];
        let m = heisenberg_wiener_hopf(&sym, 6).unwrap();
        let h = m.instantiate(4).unwrap().vector_matrix().unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((h.data[[i, j]] - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let cloud = m.essential_spectrum_boundary().unwrap();
        for z in cloud.points() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn model_structure() {
        let m = heisenberg_wiener_hopf(&symmetric_symbol(), 5).unwrap();
        let check = m.validate().unwrap();
        assert!(check.ok(), "{check:?}");
        // desk-scale orbit count: the cone orbit and the boundary point
        assert_eq!(m.instance.groupoid.orbits().len(), 2);
    }

    #[test]
    fn hermitian_cone_clouds_and_containment() {
        let m = heisenberg_wiener_hopf(&symmetric_symbol(), 6).unwrap();
        // W compression is Hermitian for the symmetric symbol
        let h = m.instantiate(5).unwrap().vector_matrix().unwrap();
        assert!(h.hermitian);
        // soft containment of each asymptotic cloud in the W cloud envelope
        let sp_w = spectrum(&h).unwrap();
        for comp in &m.boundary {
            let cloud = m.boundary_component_cloud(comp).unwrap();
            let d = directed_hausdorff(&cloud, &sp_w).unwrap();
            assert!(d < 1.0, "{}: {d}", comp.name);
        }
        // nested quasi-orbit leg reports finite numbers
        let rep = m.verify_decomposition(&m.default_truncation_config()).unwrap();
        assert_eq!(rep.containments.len(), 1);
        assert!(rep.containments[0].directed_hausdorff.is_finite());
    }

    #[test]
    fn gauge_conjugation_preserves_cone_spectra() {
        let m = heisenberg_wiener_hopf(&symmetric_symbol(), 6).unwrap();
        let w = cone_matrix(&m, &ConeBuilder::HeisenbergU, 5).unwrap();
        let nu: Vec<f64> = (0..w.dim()).map(|i| 0.3 * (i as f64).cos()).collect();
        let conj = crate::rep::gauge_conjugate(&w, &nu);
        let sa = spectrum(&w).unwrap();
        let sb = spectrum(&conj).unwrap();
        let d = crate::spectral::hausdorff_distance(&sa, &sb).unwrap();
        assert!(d < 1e-10);
    }
}
