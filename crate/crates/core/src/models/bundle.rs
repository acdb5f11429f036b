//! Finite scenarios: the two-fiber group bundle (whose component union is
//! genuinely non-convex) and the compact pair-groupoid case where the
//! essential spectrum collapses to the adjoined scalar.

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

/// Two closed points, each carrying a copy of Z_m; the totally intransitive
/// boundary structure in miniature.
fn bundle_units() -> Result<UnitSpace> {
    let points = vec![
        UnitPoint {
            name: "e1".into(),
            closure: [UnitId(0)].into_iter().collect(),
            interior: false,
            coord: None,
        },
        UnitPoint {
            name: "e2".into(),
            closure: [UnitId(1)].into_iter().collect(),
            interior: false,
            coord: None,
        },
    ];
    UnitSpace::new(points, BTreeSet::new())
}

struct FixedBlueprint {
    groupoid: Arc<FiniteGroupoid>,
    cocycle: Arc<TwoCocycle>,
    kernel: TwistedKernel,
    base: Option<UnitId>,
    window_units: Vec<UnitId>,
}

impl ModelBlueprint for FixedBlueprint {
    fn instantiate(&self, _size: usize) -> Result<ModelInstance> {
        Ok(ModelInstance {
            groupoid: self.groupoid.clone(),
            cocycle: self.cocycle.clone(),
            kernel: self.kernel.clone(),
            base: self.base,
            window_units: self.window_units.clone(),
            edge_mask: vec![false; self.window_units.len()],
        })
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Group bundle over {e1, e2} with cyclic fibers Z_m, carrying the kernel
/// pair (g, i g) for a real symmetric g: the component ranges are a real
/// segment and its rotation by i.
pub fn group_bundle_model(m: u32, coeffs: &[(i64, f64)]) -> Result<ScenarioModel> {
    if m < 2 {
        return Err(Error::InvalidInput("cyclic order must be at least 2".into()));
    }
    let units = bundle_units()?;
    let action = GroupAction::trivial(GroupDesc::Cyclic(m), units);
    let groupoid = FiniteGroupoid::from_action(action, 0)?;
    groupoid.validate_structure()?;
    let cocycle = Arc::new(TwoCocycle::trivial(groupoid.clone()));

    let mut values: BTreeMap<crate::groupoid::ArrowId, Complex64> = BTreeMap::new();
    for &(k, c) in coeffs {
        let kk = (((k % m as i64) + m as i64) % m as i64) as u32;
        for (unit, scale) in [(UnitId(0), Complex64::new(1.0, 0.0)), (UnitId(1), Complex64::new(0.0, 1.0))] {
            let arrow = groupoid
                .arrow_by_label(unit, GroupElem::Cyclic(kk))
                .ok_or_else(|| Error::InvalidInput("missing cyclic arrow".into()))?;
            let e = values.entry(arrow).or_insert(Complex64::new(0.0, 0.0));
            *e += scale * c;
        }
    }
    let kernel = TwistedKernel::new(groupoid.clone(), cocycle.clone(), values, Complex64::new(0.0, 0.0))?;

    let boundary = vec![
        BoundaryComponent {
            name: "e1".into(),
            quasi_orbit_units: vec!["e1".into()],
            generator: "e1".into(),
            realization: BoundaryOperator::FiniteFiber { unit: "e1".into() },
        },
        BoundaryComponent {
            name: "e2".into(),
            quasi_orbit_units: vec!["e2".into()],
            generator: "e2".into(),
            realization: BoundaryOperator::FiniteFiber { unit: "e2".into() },
        },
    ];
    let blueprint = Arc::new(FixedBlueprint {
        groupoid: groupoid.clone(),
        cocycle,
        kernel,
        base: None,
        window_units: vec![],
    });
    let instance = blueprint.instantiate(0)?;
    Ok(ScenarioModel {
        name: format!("group-bundle(Z_{m})"),
        blueprint,
        instance,
        boundary,
        boundary_nonunital: false,
        standard: false,
        truncation: crate::spectral::TruncationConfig { sizes: vec![], ..Default::default() },
        nested_components: vec![],
        stretch: false,
        representative_units: vec!["e1".into(), "e2".into()],
        cone_symbol: None,
    })
}

/// Pair groupoid on n points with a rank-style kernel: the orbit is closed
/// and free, so the essential spectrum is exactly the adjoined scalar.
pub fn compact_pair(n: usize, s: Complex64) -> Result<ScenarioModel> {
    if n < 2 {
        return Err(Error::InvalidInput("pair groupoid needs at least 2 points".into()));
    }
    let groupoid = FiniteGroupoid::pair_groupoid(n)?;
    let cocycle = Arc::new(TwoCocycle::trivial(groupoid.clone()));
    // a simple self-adjoint finite-rank kernel: nearest-neighbor hops
    let mut values = BTreeMap::new();
    for id in groupoid.arrow_ids() {
        let (i, j) = (groupoid.range(id).idx(), groupoid.source(id).idx());
        if i.abs_diff(j) == 1 {
            values.insert(id, Complex64::new(1.0, 0.0));
        }
    }
    let kernel = TwistedKernel::new(groupoid.clone(), cocycle.clone(), values, s)?;
    let window_units: Vec<UnitId> = groupoid.units.ids().collect();
    let blueprint = Arc::new(FixedBlueprint {
        groupoid: groupoid.clone(),
        cocycle,
        kernel,
        base: Some(UnitId(0)),
        window_units,
    });
    let instance = blueprint.instantiate(0)?;
    Ok(ScenarioModel {
        name: format!("compact-pair({n})"),
        blueprint,
        instance,
        boundary: vec![],
        boundary_nonunital: true,
        standard: true,
        truncation: crate::spectral::TruncationConfig { sizes: vec![], ..Default::default() },
        nested_components: vec![],
        stretch: false,
        representative_units: vec!["p0".into()],
        cone_symbol: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{direct_sum_rep, reduced_norm};

    #[test]
    fn bundle_has_two_singleton_orbits() {
        let m = group_bundle_model(4, &[(1, 1.0), (-1, 1.0)]).unwrap();
        let orbits = m.instance.groupoid.orbits();
        assert_eq!(orbits.len(), 2);
        assert!(orbits.iter().all(|o| o.len() == 1));
        let (std_flag, _) = m.instance.groupoid.is_standard();
        assert!(!std_flag);
        assert!(m.validate().unwrap().ok());
    }

    #[test]
    fn exel_witness_matches_direct_sum() {
        // kernels (g, i g): the witness is whichever unit carries the larger norm
        let m = group_bundle_model(8, &[(1, 1.0), (-1, 1.0), (0, 0.5)]).unwrap();
        let units: Vec<UnitId> = m.instance.groupoid.units.ids().collect();
        let (norm, witness) = reduced_norm(&m.instance.kernel, &units, None).unwrap();
        let ds = direct_sum_rep(&m.instance.kernel, &units).unwrap();
        let ds_norm = ds.opnorm().unwrap();
        assert!((norm - ds_norm).abs() < 1e-12, "{norm} vs {ds_norm}");
        // |g| = |i g| here, so any witness is fine; check value: ||g||_inf of symbol
        let _ = witness;
    }

    #[test]
    fn compact_pair_essential_spectrum_is_the_scalar() {
        let m = compact_pair(6, Complex64::new(0.25, 0.0)).unwrap();
        let cloud = m.essential_spectrum_boundary().unwrap();
        assert_eq!(cloud.points().len(), 1);
        assert!((cloud.points()[0] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let z = m.fredholm_check(Complex64::new(0.0, 0.0)).unwrap();
        assert!(z.fredholm, "s != 0 makes F Fredholm");
        let m0 = compact_pair(6, Complex64::new(0.0, 0.0)).unwrap();
        let z0 = m0.fredholm_check(Complex64::new(0.0, 0.0)).unwrap();
        assert!(!z0.fredholm, "compact operator is not Fredholm at 0");
    }

    #[test]
    fn pair_groupoid_convolution_is_matrix_multiplication() {
        use crate::kernel::{convolve, random_kernel};
        let g = FiniteGroupoid::pair_groupoid(5).unwrap();
        let c = Arc::new(TwoCocycle::trivial(g.clone()));
        let f1 = random_kernel(&g, &c, 12, 11).unwrap();
        let f2 = random_kernel(&g, &c, 12, 12).unwrap();
        let prod = convolve(&f1, &f2).unwrap();
        // value array as matrices: A[i][j] = f(arrow j->i)
        let as_matrix = |f: &TwistedKernel| {
            let mut m = vec![vec![Complex64::new(0.0, 0.0); 5]; 5];
            for id in g.arrow_ids() {
                m[g.range(id).idx()][g.source(id).idx()] = f.value(id);
            }
            m
        };
        let (a, b, p) = (as_matrix(&f1), as_matrix(&f2), as_matrix(&prod));
        for i in 0..5 {
            for j in 0..5 {
                let mut want = Complex64::new(0.0, 0.0);
                for k in 0..5 {
                    want += a[i][k] * b[k][j];
                }
                assert!((p[i][j] - want).norm() < 1e-12);
            }
        }
    }
}
