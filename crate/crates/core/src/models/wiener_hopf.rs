//! Wiener-Hopf model on the half line: the non-invariant reduction of the
//! one-point compactified line to Z_+ u {inf}. The vector representation is
//! the Toeplitz compression; the boundary operator at the single boundary
//! point is full-line convolution by the symbol.

use super::{BoundaryComponent, BoundaryOperator, ModelBlueprint, ModelInstance, ScenarioModel};
use crate::cocycle::TwoCocycle;
use crate::error::{Error, Result};
use crate::flux::DiscreteVectorPotential;
use crate::group::{GroupDesc, GroupElem};
use crate::groupoid::{FiniteGroupoid, GroupAction};
use crate::kernel::TwistedKernel;
use crate::rep::{OperatorMatrix, Provenance};
use crate::spectral::winding_number;
use crate::unit_space::{UnitId, UnitPoint, UnitSpace};
use ndarray::prelude::*;
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

const SYMBOL_GRID: usize = 4096;

#[derive(Clone, Debug)]
pub struct WienerHopfParams {
    pub symbol: Vec<(i64, Complex64)>,
}

impl WienerHopfParams {
    fn support_radius(&self) -> i64 {
        self.symbol.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }

    pub fn symbol_offsets(&self) -> Vec<(Vec<i64>, Complex64)> {
        let mut by_offset: BTreeMap<i64, Complex64> = BTreeMap::new();
        for &(k, c) in &self.symbol {
            *by_offset.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        by_offset.into_iter().map(|(k, c)| (vec![k], c)).collect()
    }

    /// Sampled symbol curve in the Toeplitz orientation,
    /// theta -> sum phi(k) exp(+i k theta), so that the Fredholm index of the
    /// compression is minus the winding number.
    pub fn symbol_curve(&self, samples: usize) -> Vec<Complex64> {
        let tau = std::f64::consts::TAU;
        (0..samples)
            .map(|j| {
                let theta = tau * j as f64 / samples as f64;
                self.symbol
                    .iter()
                    .map(|&(k, c)| c * Complex64::new(0.0, (k as f64) * theta).exp())
                    .sum()
            })
            .collect()
    }
}

/// One-point compactified line: every translate accumulates at the single
/// boundary point.
fn one_point_units(radius: i64) -> Result<UnitSpace> {
    let mut points = Vec::new();
    for n in -radius..=radius {
        points.push(UnitPoint {
            name: n.to_string(),
            closure: BTreeSet::new(),
            interior: true,
            coord: Some(GroupElem::Z(n)),
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

struct WienerHopfBlueprint {
    params: WienerHopfParams,
}

impl ModelBlueprint for WienerHopfBlueprint {
    /// `size` = number of half-line sites [0, size).
    fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        if size < 4 {
            return Err(Error::InvalidInput("window too small".into()));
        }
        let support = self.params.support_radius().max(1);
        let radius = size as i64 + 2 * support;
        let units = one_point_units(radius)?;
        let action = GroupAction::translation(GroupDesc::Z, units)?;
        let full = FiniteGroupoid::from_action(action, 2 * support)?;
        // non-invariant reduction to Z_+ u {inf}
        let keep: BTreeSet<UnitId> = full
            .units
            .ids()
            .filter(|&u| match full.units.coord(u) {
                Some(GroupElem::Z(n)) => n >= 0,
                _ => true,
            })
            .collect();
        let groupoid = full.reduce_to_subset(&keep)?.groupoid;
        let cocycle = Arc::new(TwoCocycle::trivial(groupoid.clone()));

        let mut values = BTreeMap::new();
        for x in groupoid.units.ids() {
            for &(k, c) in &self.params.symbol {
                if k == 0 {
                    let e = values
                        .entry(groupoid.unit_arrow(x))
                        .or_insert(Complex64::new(0.0, 0.0));
                    *e += c;
                } else if let Some(a) = groupoid.arrow_by_label(x, GroupElem::Z(k)) {
                    values.insert(a, c);
                }
            }
        }
        let kernel =
            TwistedKernel::new(groupoid.clone(), cocycle.clone(), values, Complex64::new(0.0, 0.0))?;

        let mut window_units = Vec::new();
        for n in 0..size as i64 {
            if let Some(u) = groupoid.units.by_coord(GroupElem::Z(n)) {
                window_units.push(u);
            }
        }
        let base = window_units[0];
        // only the far cutoff is artificial; the edge at 0 belongs to the
        // compression itself
        let w = ((size as f64) * 0.1).ceil() as usize;
        let edge_mask = (0..size).map(|i| i + w >= size).collect();
        Ok(ModelInstance { groupoid, cocycle, kernel, base: Some(base), window_units, edge_mask })
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Half-line Wiener-Hopf model of a finitely supported symbol.
pub fn wiener_hopf_line(symbol: &[(i64, Complex64)]) -> Result<ScenarioModel> {
    if symbol.is_empty() {
        return Err(Error::InvalidInput("symbol must have at least one coefficient".into()));
    }
    let params = WienerHopfParams { symbol: symbol.to_vec() };
    let boundary = vec![BoundaryComponent {
        name: "inf".into(),
        quasi_orbit_units: vec!["inf".into()],
        generator: "inf".into(),
        realization: BoundaryOperator::Symbol { offsets: params.symbol_offsets(), grid: SYMBOL_GRID },
    }];
    let offsets: Vec<String> = symbol.iter().map(|(k, _)| k.to_string()).collect();
    let blueprint = Arc::new(WienerHopfBlueprint { params });
    let instance = blueprint.instantiate(48)?;
    Ok(ScenarioModel {
        name: format!("wiener-hopf[{}]", offsets.join(",")),
        blueprint,
        instance,
        boundary,
        boundary_nonunital: false,
        standard: true,
        truncation: crate::spectral::TruncationConfig {
            sizes: vec![250, 500, 1000],
            ..Default::default()
        },
        nested_components: vec![],
        stretch: false,
        representative_units: vec!["0".into(), "inf".into()],
        cone_symbol: None,
    })
}

impl ScenarioModel {
    fn wiener_hopf_params(&self) -> Option<&WienerHopfParams> {
        self.blueprint_any()
            .downcast_ref::<WienerHopfBlueprint>()
            .map(|b| &b.params)
    }

    /// Winding-number oracle on the symbol curve: Fredholm iff lambda is off
    /// the curve; the index is minus the winding number.
    pub fn winding_oracle(&self, lambda: Complex64) -> Result<(bool, i32)> {
        let params = self
            .wiener_hopf_params()
            .ok_or_else(|| Error::InvalidInput("winding oracle needs a Wiener-Hopf model".into()))?;
        let curve = params.symbol_curve(SYMBOL_GRID);
        let dist = curve.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min);
        let fredholm = dist > 0.0;
        let index = if fredholm { -winding_number(&curve, lambda) } else { 0 };
        Ok((fredholm, index))
    }

    /// The Toeplitz compression dressed with gauge phases from a 1-D vector
    /// potential: W_A[h,k] = exp(i Gamma_A[k->h]) phi(h-k).
    pub fn toeplitz_with_gauge(
        &self,
        size: usize,
        gauge: Option<&DiscreteVectorPotential>,
    ) -> Result<OperatorMatrix> {
        let params = self
            .wiener_hopf_params()
            .ok_or_else(|| Error::InvalidInput("gauge dressing needs a Wiener-Hopf model".into()))?;
        let mut data = Array2::<Complex64>::zeros((size, size));
        for k in 0..size as i64 {
            for &(off, c) in &params.symbol {
                let h = k + off;
                if h < 0 || h >= size as i64 {
                    continue;
                }
                let phase = match gauge {
                    Some(a) => {
                        let g = a.circulation_1d(k, h)?;
                        Complex64::new(0.0, g).exp()
                    }
                    None => Complex64::new(1.0, 0.0),
                };
                data[[h as usize, k as usize]] += c * phase;
            }
        }
        Ok(OperatorMatrix::new(
            data,
            Provenance {
                description: format!("toeplitz[{size}]"),
                window: size,
                boundary_clipped: true,
            },
        ))
    }
}
