//! Verification suites behind `gspec verify`: machine-readable pass/fail
//! checks with measured residuals against declared tolerances, run over the
//! shipped models (or one model file).

use crate::cocycle::{build_extension_groupoid, TwoCocycle};
use crate::error::Result;
use crate::groupoid::FiniteGroupoid;
use crate::kernel::{
    convolve, involution, random_kernel, random_kernel_bounded, random_selfadjoint_kernel,
    RestrictionMorphism,
};
use crate::models::{self, ScenarioModel};
use crate::rep::{extension_diagram_check, regular_rep, TruncationWindow};
use crate::spectral::{hausdorff_distance, spectrum, TruncationConfig};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteCheck {
    fn measured(name: impl Into<String>, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        SuiteCheck {
            name: name.into(),
            pass: residual <= tolerance,
            residual,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<SuiteCheck>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Cocycle,
    Extension,
    Morphism,
    Gauge,
    Decomposition,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Vec<Suite>> {
        match name {
            "cocycle" => Some(vec![Suite::Cocycle]),
            "extension" => Some(vec![Suite::Extension]),
            "morphism" => Some(vec![Suite::Morphism]),
            "gauge" => Some(vec![Suite::Gauge]),
            "decomposition" => Some(vec![Suite::Decomposition]),
            "all" => Some(vec![
                Suite::Cocycle,
                Suite::Extension,
                Suite::Morphism,
                Suite::Gauge,
                Suite::Decomposition,
            ]),
            _ => None,
        }
    }
}

/// The default shipped models exercised by the suites.
pub fn shipped_models() -> Result<Vec<ScenarioModel>> {
    let one = Complex64::new(1.0, 0.0);
    let nn = [(1i64, one), (-1, one)];
    Ok(vec![
        models::two_limit_line(0.0, 0.0, &nn)?,
        models::two_limit_line(0.0, 4.0, &nn)?,
        models::two_limit_line(-1.0, 1.0, &nn)?,
        models::hofstadter(1, 2, 1.0, 1.0)?,
        models::hofstadter(1, 3, 1.0, 1.0)?,
        models::hofstadter(2, 5, 1.0, 1.0)?,
        models::wiener_hopf_line(&[(1, one)])?,
        models::wiener_hopf_line(&nn)?,
        models::group_bundle_model(8, &[(1, 1.0), (-1, 1.0)])?,
        models::heisenberg_wiener_hopf(&models::heisenberg::symmetric_symbol(), 5)?,
        models::compact_pair(6, Complex64::new(0.5, 0.0))?,
    ])
}

pub fn run_suite(suite: Suite, models: &[ScenarioModel]) -> Result<SuiteReport> {
    match suite {
        Suite::Cocycle => suite_cocycle(models),
        Suite::Extension => suite_extension(),
        Suite::Morphism => suite_morphism(),
        Suite::Gauge => suite_gauge(models),
        Suite::Decomposition => suite_decomposition(models),
    }
}

/// Cocycle identity, normalization, covering and standardness for every model.
fn suite_cocycle(models: &[ScenarioModel]) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for m in models {
        let c = m.validate()?;
        let structural_ok = c.covering_exhaustive && c.generators_generic && c.standard_ok;
        checks.push(SuiteCheck {
            name: format!("cocycle/{}", m.name),
            pass: c.cocycle_ok && structural_ok,
            residual: c.cocycle_residual,
            tolerance: 1e-12,
            detail: format!(
                "triples={} covering={} generic={} standard={}",
                c.cocycle_triples, c.covering_exhaustive, c.generators_generic, c.standard_ok
            ),
        });
    }
    Ok(SuiteReport { suite: "cocycle".into(), checks })
}

/// Extension-diagram commutation on mu_N extensions of small groupoids.
fn suite_extension() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (order, seed_base, kernels) in [(2u32, 100u64, 6usize), (4, 200, 6), (8, 300, 4)] {
        let (g, omega, _sigma) = twisted_test_groupoid(order)?;
        let ext = build_extension_groupoid(&omega, order)?;
        let mut worst = 0.0f64;
        for k in 0..kernels {
            let f = random_kernel(&g, &omega, 24, seed_base + k as u64)?;
            for x in g.units.ids().take(3) {
                worst = worst.max(extension_diagram_check(&ext, &f, x)?);
            }
        }
        checks.push(SuiteCheck::measured(
            format!("extension/diagram-N{order}"),
            worst,
            1e-12,
            format!("{kernels} random kernels"),
        ));
    }
    Ok(SuiteReport { suite: "extension".into(), checks })
}

/// A windowed two-limit groupoid carrying a mu_N coboundary twist; returns
/// the groupoid, the twist and the sigma that produced it.
pub fn twisted_test_groupoid(
    order: u32,
) -> Result<(Arc<FiniteGroupoid>, Arc<TwoCocycle>, Vec<Complex64>)> {
    use rand::{Rng, SeedableRng};
    let base = models::two_limit_line(0.0, 1.0, &[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))])?;
    let inst = base.instantiate(24)?;
    let g = inst.groupoid;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42 + order as u64);
    let mut sigma_k: Vec<u32> = (0..g.arrow_count()).map(|_| rng.gen_range(0..order)).collect();
    for x in g.units.ids() {
        sigma_k[g.unit_arrow(x).idx()] = 0;
    }
    let tau = std::f64::consts::TAU;
    let sigma: Vec<Complex64> = sigma_k
        .iter()
        .map(|&k| Complex64::new(0.0, tau * k as f64 / order as f64).exp())
        .collect();
    let omega = Arc::new(TwoCocycle::coboundary_roots(g.clone(), order, sigma_k)?);
    Ok((g, omega, sigma))
}

/// Restriction morphism is a *-morphism on random kernels of the two-limit
/// model (exact at kernel level).
fn suite_morphism() -> Result<SuiteReport> {
    let base = models::two_limit_line(
        0.0,
        4.0,
        &[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))],
    )?;
    let inst = base.instantiate(32)?;
    let g = inst.groupoid.clone();
    let boundary: std::collections::BTreeSet<_> = g.units.boundary_units().into_iter().collect();
    let rho = RestrictionMorphism::new(g.clone(), inst.cocycle.clone(), &boundary)?;
    let mut worst_mult = 0.0f64;
    let mut worst_star = 0.0f64;
    for k in 0..25u64 {
        let f = random_kernel_bounded(&g, &inst.cocycle, 20, 1, 500 + k)?;
        let h = random_kernel_bounded(&g, &inst.cocycle, 20, 1, 600 + k)?;
        let lhs = rho.apply(&convolve(&f, &h)?)?;
        let rhs = convolve(&rho.apply(&f)?, &rho.apply(&h)?)?;
        worst_mult = worst_mult.max(lhs.max_abs_diff(&rhs));
        let ls = rho.apply(&involution(&f)?)?;
        let rs = involution(&rho.apply(&f)?)?;
        worst_star = worst_star.max(ls.max_abs_diff(&rs));
    }
    let checks = vec![
        SuiteCheck::measured("morphism/multiplicative", worst_mult, 1e-13, "25 random kernel pairs"),
        SuiteCheck::measured("morphism/star", worst_star, 1e-13, "25 random kernels"),
    ];
    Ok(SuiteReport { suite: "morphism".into(), checks })
}

/// Gauge covariance: equal-flux potentials give equal spectra; coboundary
/// twists give equal regular-representation spectra.
fn suite_gauge(models_list: &[ScenarioModel]) -> Result<SuiteReport> {
    use crate::flux::DiscreteVectorPotential;
    let mut checks = Vec::new();

    // Peierls matrices in two Landau gauges on a small box
    let alpha = std::f64::consts::TAU / 3.0;
    let side = 12;
    let a = DiscreteVectorPotential::LandauX { alpha };
    let b = DiscreteVectorPotential::LandauY { alpha };
    let ha = models::hofstadter::peierls_matrix(&a, side, 1.0, 1.0)?;
    let hb = models::hofstadter::peierls_matrix(&b, side, 1.0, 1.0)?;
    let d = eig_multiset_distance(&ha, &hb)?;
    checks.push(SuiteCheck::measured(
        "gauge/peierls-landau-x-vs-y",
        d,
        1e-10,
        format!("{side}x{side} box, flux 2pi/3"),
    ));

    // Wiener-Hopf gauge dressing
    if let Some(wh) = models_list.iter().find(|m| m.name.starts_with("wiener-hopf")) {
        let plain = wh.toeplitz_with_gauge(80, None)?;
        let mut edges = std::collections::BTreeMap::new();
        for n in -2i64..90 {
            edges.insert(n, 0.2 * (n as f64).sin());
        }
        let gauged = wh.toeplitz_with_gauge(80, Some(&DiscreteVectorPotential::Line { edges }))?;
        let d = eig_multiset_distance(&plain, &gauged)?;
        checks.push(SuiteCheck::measured("gauge/wiener-hopf-dressing", d, 1e-10, "N=80"));
    }

    // coboundary twist leaves regular-representation spectra invariant:
    // with omega = delta^1(sigma), the map f -> conj(sigma).f intertwines the
    // untwisted and twisted products, and the representations are conjugate
    // by a diagonal unitary
    let (g, omega, sigma) = twisted_test_groupoid(8)?;
    let trivial = Arc::new(TwoCocycle::trivial(g.clone()));
    let sigma_bar: Vec<Complex64> = sigma.iter().map(|s| s.conj()).collect();
    let mut worst = 0.0f64;
    for k in 0..5u64 {
        let f = random_selfadjoint_kernel(&g, &trivial, 16, 700 + k)?;
        let tf = f.pointwise_mul(&sigma_bar, &omega)?;
        for x in g.units.ids().take(2) {
            let w = TruncationWindow::full_fiber(&g, x);
            let m0 = regular_rep(&f, &w)?;
            let m1 = regular_rep(&tf, &w)?;
            let d = eig_multiset_distance(&m0, &m1)?;
            worst = worst.max(d);
        }
    }
    checks.push(SuiteCheck::measured(
        "gauge/coboundary-twist-spectra",
        worst,
        1e-10,
        "5 self-adjoint kernels, mu_8 coboundary",
    ));
    Ok(SuiteReport { suite: "gauge".into(), checks })
}

/// Boundary-formula vs truncation clouds at moderate windows, plus the
/// partial-action compression invariance.
fn suite_decomposition(models_list: &[ScenarioModel]) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    if let Some(m) = models_list.iter().find(|m| m.name.starts_with("two-limit(v-=0,v+=4")) {
        let cfg = TruncationConfig { sizes: vec![250, 500, 1000], ..TruncationConfig::default() };
        let rep = m.verify_decomposition(&cfg)?;
        let d = rep.truncation_hausdorff.unwrap_or(f64::INFINITY);
        checks.push(SuiteCheck::measured(
            format!("decomposition/{}", m.name),
            d,
            0.05,
            "boundary formula vs truncation cloud, window 1000",
        ));
        // compression invariance against the K = {-3..3} reduction
        let reduced = models::partial_action_complement(m, &[-3, -2, -1, 0, 1, 2, 3])?;
        let inv = models::verify_compression_invariance(m, &reduced, &cfg, 0.05)?;
        checks.push(SuiteCheck {
            name: "decomposition/compression-invariance".into(),
            pass: inv.boundary_exactly_equal && inv.outliers <= 10,
            residual: inv.truncation_hausdorff,
            tolerance: 0.05,
            detail: format!(
                "boundary-equal={} outliers={}",
                inv.boundary_exactly_equal, inv.outliers
            ),
        });
    }
    // compact case: essential spectrum is exactly the adjoined scalar
    if let Some(m) = models_list.iter().find(|m| m.name.starts_with("compact-pair")) {
        let cloud = m.essential_spectrum_boundary()?;
        let wanted = m.instance.kernel.unit_scalar;
        let residual = cloud
            .points()
            .iter()
            .map(|z| (z - wanted).norm())
            .fold(0.0f64, f64::max)
            .max(if cloud.len() == 1 { 0.0 } else { 1.0 });
        checks.push(SuiteCheck::measured(
            "decomposition/compact-pair-scalar",
            residual,
            1e-14,
            "essential spectrum of the compact case is {s}",
        ));
    }
    Ok(SuiteReport { suite: "decomposition".into(), checks })
}

fn eig_multiset_distance(
    a: &crate::rep::OperatorMatrix,
    b: &crate::rep::OperatorMatrix,
) -> Result<f64> {
    let sa = spectrum(a)?;
    let sb = spectrum(b)?;
    hausdorff_distance(&sa, &sb)
}

/// Render the full report and the pass verdict.
pub fn render_reports(reports: &[SuiteReport]) -> (String, bool) {
    let ok = reports.iter().all(|r| r.all_pass());
    let body = serde_json::to_string_pretty(&reports).expect("serializable reports");
    (body + "\n", ok)
}
