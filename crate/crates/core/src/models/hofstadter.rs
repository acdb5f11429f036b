//! Z^2 magnetic translation model at rational flux alpha = 2 pi p / q:
//! constant-flux magnetic cocycle, single-point compactification, Bloch
//! oracle over a momentum grid.

use super::{BoundaryComponent, BoundaryOperator, ModelBlueprint, ModelInstance, ScenarioModel};
use crate::cocycle::TwoCocycle;
use crate::eigen::{BACKEND, EigenBackend};
use crate::error::{Error, Result};
use crate::flux::{circulation, DiscreteVectorPotential, MagneticFieldSpec};
use crate::group::{GroupDesc, GroupElem};
use crate::groupoid::{FiniteGroupoid, GroupAction};
use crate::kernel::TwistedKernel;
use crate::rep::{OperatorMatrix, Provenance};
use crate::spectral::{MethodTag, Resolution, SpectralSet};
use crate::unit_space::{UnitId, UnitPoint, UnitSpace};
use ndarray::prelude::*;
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct HofstadterParams {
    pub p: u32,
    pub q: u32,
    pub t1: f64,
    pub t2: f64,
}

impl HofstadterParams {
    pub fn alpha(&self) -> f64 {
        std::f64::consts::TAU * self.p as f64 / self.q as f64
    }
}

/// Box units [lo, hi]^2 plus the point at infinity fixed by translations.
fn box_units(radius: i64) -> Result<UnitSpace> {
    let mut points = Vec::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            points.push(UnitPoint {
                name: format!("({x},{y})"),
                closure: BTreeSet::new(),
                interior: true,
                coord: Some(GroupElem::Z2(x, y)),
            });
        }
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

fn hopping_kernel(
    g: &Arc<FiniteGroupoid>,
    cocycle: &Arc<TwoCocycle>,
    t1: f64,
    t2: f64,
) -> Result<TwistedKernel> {
    let hops = [
        (GroupElem::Z2(1, 0), t1),
        (GroupElem::Z2(-1, 0), t1),
        (GroupElem::Z2(0, 1), t2),
        (GroupElem::Z2(0, -1), t2),
    ];
    let mut values = BTreeMap::new();
    for x in g.units.ids() {
        for (a, t) in hops {
            if let Some(id) = g.arrow_by_label(x, a) {
                values.insert(id, Complex64::new(t, 0.0));
            }
        }
    }
    TwistedKernel::new(g.clone(), cocycle.clone(), values, Complex64::new(0.0, 0.0))
}

struct HofstadterBlueprint {
    params: HofstadterParams,
}

impl ModelBlueprint for HofstadterBlueprint {
    /// `size` is the box side; the window is the centered size x size box.
    fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        if size < 4 {
            return Err(Error::InvalidInput("box side too small".into()));
        }
        let side = size as i64;
        let lo = -side / 2;
        let hi = lo + side - 1;
        let radius = hi.max(-lo) + 2;
        let units = box_units(radius)?;
        let action = GroupAction::translation(GroupDesc::Z2, units)?;
        let groupoid = FiniteGroupoid::from_action(action, 2)?;
        let field = MagneticFieldSpec::ConstantFlux { alpha: self.params.alpha() };
        let cocycle = Arc::new(TwoCocycle::magnetic(groupoid.clone(), field)?);
        let kernel = hopping_kernel(&groupoid, &cocycle, self.params.t1, self.params.t2)?;

        let mut window_units = Vec::new();
        let mut edge_mask = Vec::new();
        let frame = ((side as f64) * 0.1).ceil() as i64;
        for x in lo..=hi {
            for y in lo..=hi {
                let u = groupoid
                    .units
                    .by_coord(GroupElem::Z2(x, y))
                    .ok_or_else(|| Error::OutOfWindow("box unit missing".into()))?;
                window_units.push(u);
                let d = (x - lo).min(hi - x).min(y - lo).min(hi - y);
                edge_mask.push(d < frame);
            }
        }
        let base = groupoid
            .units
            .by_coord(GroupElem::Z2(0, 0))
            .ok_or_else(|| Error::OutOfWindow("origin missing".into()))?;
        Ok(ModelInstance { groupoid, cocycle, kernel, base: Some(base), window_units, edge_mask })
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

/// Magnetic translation model with constant flux 2 pi p / q per plaquette and
/// hopping anisotropy (t1, t2). Flux-homogeneous: the boundary operator is
/// the full-plane limit realized by the Bloch oracle.
pub fn hofstadter(p: u32, q: u32, t1: f64, t2: f64) -> Result<ScenarioModel> {
    if q == 0 || q > 16 {
        return Err(Error::InvalidInput("flux denominator must be in 1..=16".into()));
    }
    if gcd(p.max(1), q) != 1 && p != 0 {
        return Err(Error::InvalidInput("flux p/q must be reduced: gcd(p,q)=1".into()));
    }
    let params = HofstadterParams { p, q, t1, t2 };
    let boundary = vec![BoundaryComponent {
        name: "inf".into(),
        quasi_orbit_units: vec!["inf".into()],
        generator: "inf".into(),
        realization: BoundaryOperator::Bloch { p, q, t1, t2, grid: 32 },
    }];
    let blueprint = Arc::new(HofstadterBlueprint { params });
    let instance = blueprint.instantiate(10)?;
    Ok(ScenarioModel {
        name: format!("hofstadter(p={p},q={q})"),
        blueprint,
        instance,
        boundary,
        boundary_nonunital: false,
        standard: true,
        truncation: crate::spectral::TruncationConfig {
            sizes: vec![40, 50, 60],
            ..Default::default()
        },
        nested_components: vec![],
        stretch: false,
        representative_units: vec!["(0,0)".into(), "inf".into()],
        cone_symbol: None,
    })
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Landau-gauge Bloch reduction: q x q momentum matrices swept over a
/// grid x grid Brillouin grid; the union of the eigenvalue clouds is the
/// spectrum of the plane operator (gauge invariant).
pub fn bloch_band_union(p: u32, q: u32, t1: f64, t2: f64, grid: usize) -> Result<SpectralSet> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be positive".into()));
    }
    let qq = q as usize;
    let alpha = std::f64::consts::TAU * p as f64 / q as f64;
    let tau = std::f64::consts::TAU;
    let mut points = Vec::with_capacity(grid * grid * qq);
    for k1i in 0..grid {
        for k2i in 0..grid {
            let k1 = tau * k1i as f64 / grid as f64;
            let k2 = tau * k2i as f64 / grid as f64;
            if qq == 1 {
                points.push(2.0 * t1 * k1.cos() + 2.0 * t2 * k2.cos());
                continue;
            }
            let mut h = Array2::<Complex64>::zeros((qq, qq));
            for j in 0..qq {
                h[[j, j]] = Complex64::new(2.0 * t2 * (alpha * j as f64 + k2).cos(), 0.0);
                let jn = (j + 1) % qq;
                h[[jn, j]] += t1 * Complex64::new(0.0, k1).exp();
                h[[j, jn]] += t1 * Complex64::new(0.0, -k1).exp();
            }
            points.extend(BACKEND.eigh_values(&h)?);
        }
    }
    SpectralSet::from_reals(
        points,
        MethodTag::Bloch,
        Resolution { grid: Some(grid), windows: vec![q as usize], tolerance: None },
    )
}

/// Peierls matrix of the hopping model in an explicit vector potential on
/// the centered size x size box: entries t exp(i circulation(A, n -> m)).
pub fn peierls_matrix(
    a_pot: &DiscreteVectorPotential,
    side: usize,
    t1: f64,
    t2: f64,
) -> Result<OperatorMatrix> {
    let side_i = side as i64;
    let lo = -side_i / 2;
    let hi = lo + side_i - 1;
    let idx = |x: i64, y: i64| -> Option<usize> {
        if x < lo || x > hi || y < lo || y > hi {
            None
        } else {
            Some(((x - lo) * side_i + (y - lo)) as usize)
        }
    };
    let n = side * side;
    let mut data = Array2::<Complex64>::zeros((n, n));
    for x in lo..=hi {
        for y in lo..=hi {
            let j = idx(x, y).unwrap();
            for (dx, dy, t) in [(1i64, 0i64, t1), (-1, 0, t1), (0, 1, t2), (0, -1, t2)] {
                if let Some(i) = idx(x + dx, y + dy) {
                    let phase = circulation(a_pot, (x, y), (x + dx, y + dy))?;
                    data[[i, j]] += t * Complex64::new(0.0, phase).exp();
                }
            }
        }
    }
    Ok(OperatorMatrix::new(
        data,
        Provenance {
            description: format!("peierls[{side}x{side}]"),
            window: n,
            boundary_clipped: true,
        },
    ))
}

/// Gauge function connecting two equal-flux potentials, normalized so that
/// `gauge_conjugate(peierls(A), nu) = peierls(A')` exactly (the difference
/// potential has zero plaquette flux, so its circulations are
/// path-independent).
pub fn connecting_gauge(
    a: &DiscreteVectorPotential,
    a_prime: &DiscreteVectorPotential,
    side: usize,
) -> Result<Vec<f64>> {
    let side_i = side as i64;
    let lo = -side_i / 2;
    let hi = lo + side_i - 1;
    let mut nu = Vec::with_capacity(side * side);
    for x in lo..=hi {
        for y in lo..=hi {
            let c = circulation(a_prime, (0, 0), (x, y))? - circulation(a, (0, 0), (x, y))?;
            nu.push(-c);
        }
    }
    Ok(nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hausdorff_distance;

    #[test]
    fn model_validates() {
        let m = hofstadter(1, 3, 1.0, 1.0).unwrap();
        let check = m.validate().unwrap();
        assert!(check.ok(), "{check:?}");
        assert!(check.cocycle_residual <= 1e-12);
    }

    #[test]
    fn zero_flux_band() {
        // q = 1: free 2-D band [-4, 4]
        let cloud = bloch_band_union(0, 1, 1.0, 1.0, 48).unwrap();
        let (lo, hi) = cloud.points().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), z| {
            (l.min(z.re), h.max(z.re))
        });
        assert!((lo + 4.0).abs() < 1e-2 && (hi - 4.0).abs() < 1e-2);
    }

    #[test]
    fn q2_bands_touch_at_zero() {
        let cloud = bloch_band_union(1, 2, 1.0, 1.0, 48).unwrap();
        // symmetric about 0 and containing 0 (bands touch)
        let min_abs = cloud.points().iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
        assert!(min_abs < 1e-6);
        let max = cloud.points().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min = cloud.points().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!((max + min).abs() < 1e-9);
        // oracle formula +-sqrt(4cos^2 k1 + 4cos^2 k2)
        for z in cloud.points().iter().take(200) {
            assert!(z.re.abs() <= 2.0 * 2.0f64.sqrt() + 1e-9);
        }
    }

    #[test]
    fn cocycle_half_cross_formula() {
        // one-unit Z^2 group with constant flux: omega(b, a) = exp(i alpha (a ^ b)/2)
        let alpha = 0.7;
        let units = crate::unit_space::single_unit();
        let action = GroupAction::trivial(GroupDesc::Z2, units);
        let g = FiniteGroupoid::from_action(action, 3).unwrap();
        let omega =
            TwoCocycle::magnetic(g.clone(), MagneticFieldSpec::ConstantFlux { alpha }).unwrap();
        let a = GroupElem::Z2(1, 0);
        let b = GroupElem::Z2(0, 1);
        // pair (xi, eta) with eta = (x, a), xi = (theta_a x, b)
        let xi = g.arrow_by_label(UnitId(0), b).unwrap();
        let eta = g.arrow_by_label(UnitId(0), a).unwrap();
        let got = omega.eval(xi, eta).unwrap();
        // triangle (e, a, b+a): area = (a ^ b)/2 = 1/2
        let want = Complex64::new(0.0, alpha * 0.5).exp();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn truncation_cloud_near_bloch_small() {
        // small instance sanity: side 20 within 0.35 of the Bloch union at q=2
        let m = hofstadter(1, 2, 1.0, 1.0).unwrap();
        // small windows are sparse near the band extrema: drop the isolation
        // threshold for this sanity check
        let cfg = crate::spectral::TruncationConfig {
            sizes: vec![14, 20],
            min_cluster_population: 2,
            ..Default::default()
        };
        let cloud = m.essential_spectrum_truncation(&cfg).unwrap();
        let oracle = m.essential_spectrum_boundary().unwrap();
        let d = hausdorff_distance(&cloud, &oracle).unwrap();
        assert!(d < 0.35, "hausdorff {d}");
    }

    #[test]
    fn peierls_gauge_covariance_exact() {
        let alpha = std::f64::consts::TAU / 3.0;
        let a = DiscreteVectorPotential::LandauX { alpha };
        let b = DiscreteVectorPotential::LandauY { alpha };
        let side = 8;
        let ha = peierls_matrix(&a, side, 1.0, 1.0).unwrap();
        let hb = peierls_matrix(&b, side, 1.0, 1.0).unwrap();
        let nu = connecting_gauge(&a, &b, side).unwrap();
        let conj = crate::rep::gauge_conjugate(&ha, &nu);
        assert!(conj.max_abs_diff(&hb) < 1e-12);
    }
}
