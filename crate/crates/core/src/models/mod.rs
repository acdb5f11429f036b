//! Fully configured scenarios binding groupoid, cocycle, kernels, boundary
//! quasi-orbit coverings and window families, plus the model-level spectral
//! and propagation drivers.

pub mod bundle;
pub mod heisenberg;
pub mod hofstadter;
pub mod two_limit;
pub mod wiener_hopf;

pub use bundle::{compact_pair, group_bundle_model};
pub use heisenberg::heisenberg_wiener_hopf;
pub use hofstadter::hofstadter;
pub use two_limit::{partial_action_complement, two_limit_line};
pub use wiener_hopf::wiener_hopf_line;

use crate::cocycle::TwoCocycle;
use crate::eigen::{BACKEND, EigenBackend};
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::kernel::TwistedKernel;
use crate::propagation::{
    find_neighborhood, EnergyBump, KappaCalculus, NeighborhoodWindow,
    PropagationSession,
};
use crate::rep::{vector_rep, OperatorMatrix};
use crate::spectral::{
    convex_hull, essential_spectrum_truncation, hausdorff_distance, numerical_range, spectrum,
    symbol_range, ConvexRegion, MethodTag, Resolution, SpectralSet, TruncationConfig,
};
use crate::unit_space::UnitId;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// One materialization of a model at a given window scale.
pub struct ModelInstance {
    pub groupoid: Arc<FiniteGroupoid>,
    pub cocycle: Arc<TwoCocycle>,
    pub kernel: TwistedKernel,
    /// Designated main-orbit base unit for the vector representation.
    pub base: Option<UnitId>,
    /// Ordered main-orbit window basis.
    pub window_units: Vec<UnitId>,
    /// Artificial-cutoff sites (outer 10% of the window) for the
    /// edge-localization filter.
    pub edge_mask: Vec<bool>,
}

impl ModelInstance {
    pub fn vector_matrix(&self) -> Result<OperatorMatrix> {
        let base = self
            .base
            .ok_or_else(|| Error::InvalidInput("model has no vector representation".into()))?;
        vector_rep(&self.kernel, base, &self.window_units)
    }
}

/// Scale-parameterized materialization.
pub trait ModelBlueprint: Send + Sync {
    /// `size` is the window dimension parameter (matrix dimension scale).
    fn instantiate(&self, size: usize) -> Result<ModelInstance>;

    fn as_any(&self) -> &dyn std::any::Any;
}

/// How a boundary quasi-orbit's asymptotic operator is realized.
#[derive(Clone, Debug)]
pub enum BoundaryOperator {
    /// Abelian isotropy, untwisted restriction: Fourier symbol samples on
    /// the dual torus.
    Symbol { offsets: Vec<(Vec<i64>, Complex64)>, grid: usize },
    /// Finite isotropy fiber: exact regular representation at the generator.
    FiniteFiber { unit: String },
    /// Flux-homogeneous plane: union of Bloch bands on a momentum grid.
    Bloch { p: u32, q: u32, t1: f64, t2: f64, grid: usize },
    /// Windowed cone compression (stretch scenarios; soft tolerances only).
    Cone { matrix_side: usize, builder: ConeBuilder },
}

/// Builder tag for cone compressions; resolved by the owning model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConeBuilder {
    HeisenbergU,
    HeisenbergV,
    HeisenbergAxis1,
}

/// One boundary quasi-orbit of the covering, with its generator and the
/// realization of the asymptotic operator there.
#[derive(Clone, Debug)]
pub struct BoundaryComponent {
    pub name: String,
    /// Unit names (verification groupoid) forming the quasi-orbit.
    pub quasi_orbit_units: Vec<String>,
    pub generator: String,
    pub realization: BoundaryOperator,
}

/// A fully configured scenario.
pub struct ScenarioModel {
    pub name: String,
    blueprint: Arc<dyn ModelBlueprint>,
    /// Verification-scale instance (small window; full structural checks).
    pub instance: ModelInstance,
    pub boundary: Vec<BoundaryComponent>,
    /// Include the adjoined scalar in essential spectra (non-unital boundary
    /// algebra; the compact/pair case).
    pub boundary_nonunital: bool,
    /// Declared standardness (checked by validate()).
    pub standard: bool,
    /// Default truncation sweep (window dimensions and filter thresholds).
    pub truncation: TruncationConfig,
    /// Pairs (inner, outer) of boundary components with nested quasi-orbits,
    /// for the monotonicity leg of the decomposition check.
    pub nested_components: Vec<(usize, usize)>,
    /// Stretch scenarios carry soft tolerances only.
    pub stretch: bool,
    /// Representative units (names) for the reduced norm: one generic unit
    /// per quasi-orbit plus the boundary generators.
    pub representative_units: Vec<String>,
    /// Symbol coefficients of the cone compressions (stretch scenarios).
    pub cone_symbol: Option<Vec<(crate::group::GroupElem, Complex64)>>,
}

impl ScenarioModel {
    pub fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        self.blueprint.instantiate(size)
    }

    pub(crate) fn blueprint_any(&self) -> &dyn std::any::Any {
        self.blueprint.as_any()
    }

    /// Same scenario with the adjoined-unit scalar replaced: F = G + s*1.
    pub fn with_unit_scalar(mut self, s: Complex64) -> Result<ScenarioModel> {
        self.instance.kernel.unit_scalar = s;
        self.blueprint = Arc::new(ScalarBlueprint { inner: self.blueprint.clone(), s });
        Ok(self)
    }

    fn unit_by_name(&self, name: &str) -> Result<UnitId> {
        self.instance
            .groupoid
            .units
            .by_name(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown unit {name}")))
    }

    // ------------------------------------------------------------------
    // structural validation

    /// Cocycle identity, covering exhaustiveness, generator genericity and
    /// declared standardness, all on the verification instance.
    pub fn validate(&self) -> Result<ModelCheck> {
        let cocycle_check = self.instance.cocycle.verify()?;
        let g = &self.instance.groupoid;
        let boundary_units: std::collections::BTreeSet<UnitId> =
            g.units.boundary_units().into_iter().collect();
        let mut covered = std::collections::BTreeSet::new();
        let mut generators_generic = true;
        for comp in &self.boundary {
            let gen = self.unit_by_name(&comp.generator)?;
            let qo = g.quasi_orbit_of(gen);
            if !qo.generic.contains(&gen) {
                generators_generic = false;
            }
            for name in &comp.quasi_orbit_units {
                covered.insert(self.unit_by_name(name)?);
            }
        }
        let covering_exhaustive = boundary_units.is_subset(&covered);
        let (standard, _) = g.is_standard();
        let standard_ok = standard == self.standard;
        Ok(ModelCheck {
            model: self.name.clone(),
            cocycle_residual: cocycle_check.worst_residual.max(cocycle_check.normalization_residual),
            cocycle_triples: cocycle_check.triples_checked,
            cocycle_ok: cocycle_check.ok,
            covering_exhaustive,
            generators_generic,
            standard_ok,
        })
    }

    // ------------------------------------------------------------------
    // essential spectrum

    /// Cloud of one boundary component's asymptotic operator.
    pub fn boundary_component_cloud(&self, comp: &BoundaryComponent) -> Result<SpectralSet> {
        match &comp.realization {
            BoundaryOperator::Symbol { offsets, grid } => symbol_range(offsets, *grid),
            BoundaryOperator::FiniteFiber { unit } => {
                let x = self.unit_by_name(unit)?;
                let w = crate::rep::TruncationWindow::full_fiber(&self.instance.groupoid, x);
                let m = crate::rep::regular_rep(&self.instance.kernel, &w)?;
                spectrum(&m)
            }
            BoundaryOperator::Bloch { p, q, t1, t2, grid } => {
                hofstadter::bloch_band_union(*p, *q, *t1, *t2, *grid)
            }
            BoundaryOperator::Cone { matrix_side, builder } => {
                let m = heisenberg::cone_matrix(self, builder, *matrix_side)?;
                spectrum(&m)
            }
        }
    }

    /// Quasi-orbit decomposition formula: union of the boundary clouds, plus
    /// the adjoined scalar when the boundary algebra is non-unital.
    pub fn essential_spectrum_boundary(&self) -> Result<SpectralSet> {
        let mut points: Vec<Complex64> = Vec::new();
        for comp in &self.boundary {
            points.extend_from_slice(self.boundary_component_cloud(comp)?.points());
        }
        if self.boundary_nonunital {
            points.push(self.instance.kernel.unit_scalar);
        }
        if points.is_empty() {
            return Err(Error::InvalidInput(
                "no boundary covering declared and boundary algebra unital".into(),
            ));
        }
        SpectralSet::new(
            points,
            MethodTag::BoundaryFormula,
            Resolution { grid: None, windows: vec![], tolerance: None },
        )
    }

    /// Independent truncation oracle (Hermitian kernels only): filtered
    /// eigenvalue clouds of growing vector-representation windows.
    pub fn essential_spectrum_truncation(&self, cfg: &TruncationConfig) -> Result<SpectralSet> {
        let provider = |size: usize| -> Result<(OperatorMatrix, Vec<bool>)> {
            let inst = self.instantiate(size)?;
            let m = inst.vector_matrix()?;
            Ok((m, inst.edge_mask.clone()))
        };
        essential_spectrum_truncation(&provider, cfg)
    }

    pub fn default_truncation_config(&self) -> TruncationConfig {
        self.truncation.clone()
    }

    /// Eigenvalue cloud of one truncation window (cmd spectrum).
    pub fn spectrum_at_window(&self, size: usize) -> Result<SpectralSet> {
        let inst = self.instantiate(size)?;
        let m = inst.vector_matrix()?;
        spectrum(&m)
    }

    // ------------------------------------------------------------------
    // numerical ranges

    /// Convex region of one boundary component.
    pub fn boundary_component_range(&self, comp: &BoundaryComponent, angles: usize) -> Result<ConvexRegion> {
        match &comp.realization {
            // abelian isotropy: normal operator, range = hull of the symbol curve
            BoundaryOperator::Symbol { offsets, grid } => {
                convex_hull(symbol_range(offsets, *grid)?.points())
            }
            BoundaryOperator::FiniteFiber { unit } => {
                let x = self.unit_by_name(unit)?;
                let w = crate::rep::TruncationWindow::full_fiber(&self.instance.groupoid, x);
                let m = crate::rep::regular_rep(&self.instance.kernel, &w)?;
                numerical_range(&m, angles)
            }
            BoundaryOperator::Bloch { .. } => {
                // Hermitian plane operator: hull of the band union
                convex_hull(self.boundary_component_cloud(comp)?.points())
            }
            BoundaryOperator::Cone { matrix_side, builder } => {
                let m = heisenberg::cone_matrix(self, builder, *matrix_side)?;
                numerical_range(&m, angles)
            }
        }
    }

    /// Essential numerical range: closed convex hull of the boundary ranges
    /// and the adjoined scalar when the boundary algebra is non-unital.
    pub fn essential_numerical_range(&self, angles: usize) -> Result<ConvexRegion> {
        let mut pts: Vec<Complex64> = Vec::new();
        for comp in &self.boundary {
            pts.extend_from_slice(self.boundary_component_range(comp, angles)?.vertices());
        }
        if self.boundary_nonunital {
            pts.push(self.instance.kernel.unit_scalar);
        }
        if pts.is_empty() {
            return Err(Error::InvalidInput("no boundary data for the essential range".into()));
        }
        convex_hull(&pts)
    }

    // ------------------------------------------------------------------
    // Fredholm

    pub fn fredholm_check(&self, lambda: Complex64) -> Result<FredholmReport> {
        let cloud = self.essential_spectrum_boundary()?;
        let margin = cloud.min_distance_to(lambda);
        let mut certificates = Vec::new();
        for comp in &self.boundary {
            let comp_cloud = self.boundary_component_cloud(comp)?;
            let min_symbol_distance = comp_cloud.min_distance_to(lambda);
            let smallest_singular_value = match &comp.realization {
                BoundaryOperator::FiniteFiber { unit } => {
                    let x = self.unit_by_name(unit)?;
                    let w = crate::rep::TruncationWindow::full_fiber(&self.instance.groupoid, x);
                    let m = crate::rep::regular_rep(&self.instance.kernel, &w)?;
                    Some(smallest_singular(&m, lambda)?)
                }
                BoundaryOperator::Cone { matrix_side, builder } => {
                    let m = heisenberg::cone_matrix(self, builder, *matrix_side)?;
                    Some(smallest_singular(&m, lambda)?)
                }
                _ => None,
            };
            certificates.push(FredholmCertificate {
                component: comp.name.clone(),
                min_symbol_distance,
                smallest_singular_value,
            });
        }
        if self.boundary_nonunital {
            certificates.push(FredholmCertificate {
                component: "adjoined-unit".into(),
                min_symbol_distance: (self.instance.kernel.unit_scalar - lambda).norm(),
                smallest_singular_value: None,
            });
        }
        Ok(FredholmReport { lambda: (lambda.re, lambda.im), fredholm: margin > 0.0, margin, certificates })
    }

    // ------------------------------------------------------------------
    // decomposition verification

    /// (a) boundary-vs-truncation Hausdorff distance, (c) nested quasi-orbit
    /// cloud containment. The partial-action leg (b) is in
    /// [`verify_compression_invariance`].
    pub fn verify_decomposition(&self, cfg: &TruncationConfig) -> Result<DecompositionReport> {
        let boundary = self.essential_spectrum_boundary()?;
        let hermitian = {
            let inv = crate::kernel::involution(&self.instance.kernel)?;
            self.instance.kernel.max_abs_diff(&inv) <= 1e-12
        };
        let truncation_hausdorff = if hermitian && self.instance.base.is_some() {
            let cloud = self.essential_spectrum_truncation(cfg)?;
            if cloud.is_empty() {
                // every eigenvalue was filtered out: inconclusive at this scale
                None
            } else {
                Some(hausdorff_distance(&boundary, &cloud)?)
            }
        } else {
            None
        };
        let mut containments = Vec::new();
        for &(inner, outer) in &self.nested_components {
            let small = self.boundary_component_cloud(&self.boundary[inner])?;
            let big = self.boundary_component_cloud(&self.boundary[outer])?;
            let d = crate::spectral::directed_hausdorff(&small, &big)?;
            containments.push(ContainmentLeg {
                inner: self.boundary[inner].name.clone(),
                outer: self.boundary[outer].name.clone(),
                directed_hausdorff: d,
            });
        }
        Ok(DecompositionReport {
            model: self.name.clone(),
            truncation_hausdorff,
            containments,
            stretch: self.stretch,
        })
    }

    // ------------------------------------------------------------------
    // propagation

    /// Shrinking neighborhood family over the window basis of `inst`.
    pub fn window_family(&self, inst: &ModelInstance, params: &[i64]) -> Result<Vec<NeighborhoodWindow>> {
        let g = &inst.groupoid;
        let mut out = Vec::new();
        for &p in params {
            let mask: Vec<bool> = inst
                .window_units
                .iter()
                .map(|&u| match g.units.coord(u) {
                    Some(crate::group::GroupElem::Z(n)) => n >= p,
                    Some(c) => g.action().map(|a| a.group.norm(c) >= p).unwrap_or(false),
                    None => false,
                })
                .collect();
            out.push(NeighborhoodWindow { description: format!("n >= {p}"), param: p, mask });
        }
        Ok(out)
    }

    /// Non-propagation run: checks the kappa precondition against the
    /// targeted boundary component, sweeps the shrinking family for the
    /// static bound, and verifies time uniformity. The window-doubling
    /// convergence caveat is auto-checked at half the window.
    pub fn propagate(&self, opts: &PropagationOptions) -> Result<PropagationReport> {
        let comp = self
            .boundary
            .iter()
            .find(|c| c.name == opts.target_component)
            .ok_or_else(|| Error::InvalidInput(format!("unknown component {}", opts.target_component)))?;
        let kappa = EnergyBump::new(opts.kappa_min, opts.kappa_max, opts.plateau_fraction)?;
        // precondition: supp kappa disjoint from the asymptotic spectrum
        let comp_cloud = self.boundary_component_cloud(comp)?;
        let (lo, hi) = kappa.support();
        let overlap: Vec<f64> = comp_cloud
            .points()
            .iter()
            .filter(|z| z.im.abs() < 1e-9 && z.re > lo && z.re < hi)
            .map(|z| z.re)
            .collect();
        if !overlap.is_empty() {
            let omin = overlap.iter().cloned().fold(f64::INFINITY, f64::min);
            let omax = overlap.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::KappaOverlap { support: (lo, hi), overlap: (omin, omax) });
        }

        let inst = self.instantiate(opts.window)?;
        let h = inst.vector_matrix()?;
        let session = PropagationSession::new(&h)?;
        drop(h);
        let calc = KappaCalculus::new(&session, &|x| kappa.eval(x));
        let family = self.window_family(&inst, &opts.family)?;
        let search = find_neighborhood(&calc, &family, opts.epsilon)?;

        let mut report = PropagationReport {
            model: self.name.clone(),
            target: comp.name.clone(),
            epsilon: opts.epsilon,
            found_param: search.found.map(|i| family[i].param),
            static_bound: search.found.map(|i| search.profile[i].1),
            profile: search.profile.clone(),
            time_uniform_max: None,
            converged: true,
            inconclusive: search.inconclusive,
        };
        let Some(found) = search.found else {
            return Ok(report);
        };

        // a-priori bound check
        let static_bound = search.profile[found].1;
        debug_assert!(static_bound <= calc.sup_kappa() + 1e-12);

        // window-doubling caveat: same parameter at half the window
        if opts.check_half_window {
            let half = self.instantiate(opts.window / 2)?;
            let hh = half.vector_matrix()?;
            let half_session = PropagationSession::new(&hh)?;
            drop(hh);
            let half_calc = KappaCalculus::new(&half_session, &|x| kappa.eval(x));
            let half_family = self.window_family(&half, &[family[found].param])?;
            let half_bound = half_calc.masked_norm(&half_family[0].mask)?;
            let rel = if static_bound.max(half_bound) > 1e-14 {
                (static_bound - half_bound).abs() / static_bound.max(half_bound).max(opts.epsilon)
            } else {
                0.0
            };
            if rel > 0.10 {
                report.converged = false;
                report.inconclusive = true;
            }
        }

        if let Some((t_max, steps, trials)) = opts.time_check {
            let grid: Vec<f64> = (0..steps).map(|k| t_max * k as f64 / (steps - 1).max(1) as f64).collect();
            let v = calc.time_uniform_max(&family[found].mask, &grid, trials, opts.seed)?;
            report.time_uniform_max = Some(v);
        }
        Ok(report)
    }

    /// The static non-propagation bound for one explicit window parameter.
    pub fn non_propagation_bound(&self, opts: &PropagationOptions, param: i64) -> Result<f64> {
        let kappa = EnergyBump::new(opts.kappa_min, opts.kappa_max, opts.plateau_fraction)?;
        let inst = self.instantiate(opts.window)?;
        let h = inst.vector_matrix()?;
        let session = PropagationSession::new(&h)?;
        let calc = KappaCalculus::new(&session, &|x| kappa.eval(x));
        let family = self.window_family(&inst, &[param])?;
        calc.masked_norm(&family[0].mask)
    }
}

/// Wraps a blueprint, replacing the adjoined scalar of every materialized
/// kernel; downcasts see through to the inner blueprint.
struct ScalarBlueprint {
    inner: Arc<dyn ModelBlueprint>,
    s: Complex64,
}

impl ModelBlueprint for ScalarBlueprint {
    fn instantiate(&self, size: usize) -> Result<ModelInstance> {
        let mut inst = self.inner.instantiate(size)?;
        inst.kernel.unit_scalar = self.s;
        Ok(inst)
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self.inner.as_any()
    }
}

fn smallest_singular(m: &OperatorMatrix, lambda: Complex64) -> Result<f64> {
    let n = m.dim();
    let mut shifted = m.data.clone();
    for i in 0..n {
        shifted[[i, i]] -= lambda;
    }
    let mh = shifted.mapv(|z| z.conj());
    let gram = crate::eigen::zgemm_tn(&mh, &shifted);
    let vals = BACKEND.eigh_values(&gram)?;
    Ok(vals.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

// ---------------------------------------------------------------------
// reports

#[derive(Clone, Debug, Serialize)]
pub struct ModelCheck {
    pub model: String,
    pub cocycle_residual: f64,
    pub cocycle_triples: usize,
    pub cocycle_ok: bool,
    pub covering_exhaustive: bool,
    pub generators_generic: bool,
    pub standard_ok: bool,
}

impl ModelCheck {
    pub fn ok(&self) -> bool {
        self.cocycle_ok && self.covering_exhaustive && self.generators_generic && self.standard_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmCertificate {
    pub component: String,
    pub min_symbol_distance: f64,
    pub smallest_singular_value: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmReport {
    pub lambda: (f64, f64),
    pub fredholm: bool,
    pub margin: f64,
    pub certificates: Vec<FredholmCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContainmentLeg {
    pub inner: String,
    pub outer: String,
    pub directed_hausdorff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub model: String,
    pub truncation_hausdorff: Option<f64>,
    pub containments: Vec<ContainmentLeg>,
    pub stretch: bool,
}

#[derive(Clone, Debug)]
pub struct PropagationOptions {
    pub target_component: String,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub plateau_fraction: f64,
    pub epsilon: f64,
    /// Vector-representation window dimension parameter.
    pub window: usize,
    /// Shrinking-family parameters (n0 sweep), ascending.
    pub family: Vec<i64>,
    /// (t_max, grid steps, random trials); None skips the dynamic check.
    pub time_check: Option<(f64, usize, usize)>,
    pub seed: u64,
    pub check_half_window: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub model: String,
    pub target: String,
    pub epsilon: f64,
    pub found_param: Option<i64>,
    pub static_bound: Option<f64>,
    pub profile: Vec<(i64, f64)>,
    pub time_uniform_max: Option<f64>,
    pub converged: bool,
    pub inconclusive: bool,
}

/// Leg (b) of the decomposition check: a model and its partial-action
/// reduction must produce identical boundary-formula clouds (exact), and
/// truncation clouds differing only within the tolerance ball plus isolated
/// discrete-spectrum outliers.
#[derive(Clone, Debug, Serialize)]
pub struct CompressionInvarianceReport {
    pub boundary_exactly_equal: bool,
    pub truncation_hausdorff: f64,
    pub outliers: usize,
}

pub fn verify_compression_invariance(
    base: &ScenarioModel,
    reduced: &ScenarioModel,
    cfg: &TruncationConfig,
    tol: f64,
) -> Result<CompressionInvarianceReport> {
    let cb = base.essential_spectrum_boundary()?;
    let cr = reduced.essential_spectrum_boundary()?;
    let boundary_exactly_equal = cb.points() == cr.points();
    let tb = base.essential_spectrum_truncation(cfg)?;
    let tr = reduced.essential_spectrum_truncation(cfg)?;
    let truncation_hausdorff = hausdorff_distance(&tb, &tr)?;
    let out1 = tb.points().iter().filter(|&&p| tr.min_distance_to(p) > tol).count();
    let out2 = tr.points().iter().filter(|&&p| tb.min_distance_to(p) > tol).count();
    Ok(CompressionInvarianceReport {
        boundary_exactly_equal,
        truncation_hausdorff,
        outliers: out1 + out2,
    })
}
