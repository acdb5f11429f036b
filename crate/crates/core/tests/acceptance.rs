//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantity against its pinned tolerance. Heavy criteria share
//! a lock so eigensolver memory and the two cores are not oversubscribed.

use gspec::cocycle::build_extension_groupoid;
use gspec::flux::DiscreteVectorPotential;
use gspec::kernel::{convolve, involution, random_kernel_bounded, RestrictionMorphism};
use gspec::models::{self, PropagationOptions};
use gspec::rep::{direct_sum_rep, extension_diagram_check, reduced_norm, OperatorMatrix};
use gspec::spectral::{
    convex_hull, hausdorff_distance, numerical_range, region_hausdorff, spectrum,
    TruncationConfig,
};
use gspec::unit_space::UnitId;
use gspec::verify;
use ndarray::prelude::*;
use num_complex::Complex64;
use std::sync::Mutex;
use std::time::Instant;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_lock() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|p| p.into_inner())
}

fn nn() -> Vec<(i64, Complex64)> {
    vec![(1, ONE), (-1, ONE)]
}

#[test]
fn criterion_01_cocycle_validity() {
    let t0 = Instant::now();
    let models = verify::shipped_models().unwrap();
    let mut worst = 0.0f64;
    for m in &models {
        let check = m.validate().unwrap();
        assert!(check.ok(), "{}: {:?}", m.name, check);
        worst = worst.max(check.cocycle_residual);
        if m.instance.cocycle.root_order().is_some() {
            assert_eq!(check.cocycle_residual, 0.0, "{}: mu_N case must be exact", m.name);
        }
    }
    let dt = t0.elapsed();
    assert!(worst <= 1e-12);
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}");
    println!("PASS criterion 1: cocycle residual {worst:.3e} <= 1e-12 over {} models in {dt:?}", models.len());
}

#[test]
fn criterion_02_extension_diagram() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut kernels = 0usize;
    for (order, n_kernels) in [(2u32, 34usize), (4, 33), (8, 33)] {
        let (g, omega, _sigma) = verify::twisted_test_groupoid(order).unwrap();
        let ext = build_extension_groupoid(&omega, order).unwrap();
        // fibers of the extension stay at or below 64
        let max_fiber = ext
            .groupoid
            .units
            .ids()
            .map(|x| ext.groupoid.fiber_source(x).len())
            .max()
            .unwrap();
        assert!(max_fiber <= 64, "fiber {max_fiber}");
        let units: Vec<UnitId> = g.units.ids().collect();
        for k in 0..n_kernels {
            let f = random_kernel_bounded(&g, &omega, 18, 1, 9000 + order as u64 * 100 + k as u64)
                .unwrap();
            let x = units[k % units.len()];
            let r = extension_diagram_check(&ext, &f, x).unwrap();
            worst = worst.max(r);
            kernels += 1;
        }
    }
    let dt = t0.elapsed();
    assert_eq!(kernels, 100);
    assert!(worst <= 1e-12, "residual {worst}");
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!("PASS criterion 2: extension diagram residual {worst:.3e} <= 1e-12 over 100 kernels in {dt:?}");
}

#[test]
fn criterion_03_restriction_morphism() {
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let inst = m.instantiate(40).unwrap();
    let g = inst.groupoid.clone();
    let boundary: std::collections::BTreeSet<UnitId> =
        g.units.boundary_units().into_iter().collect();
    let rho = RestrictionMorphism::new(g.clone(), inst.cocycle.clone(), &boundary).unwrap();
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let f = random_kernel_bounded(&g, &inst.cocycle, 22, 1, 3000 + k).unwrap();
        let h = random_kernel_bounded(&g, &inst.cocycle, 22, 1, 4000 + k).unwrap();
        let lhs = rho.apply(&convolve(&f, &h).unwrap()).unwrap();
        let rhs = convolve(&rho.apply(&f).unwrap(), &rho.apply(&h).unwrap()).unwrap();
        worst = worst.max(lhs.max_abs_diff(&rhs));
        for q in [&f, &h] {
            let a = rho.apply(&involution(q).unwrap()).unwrap();
            let b = involution(&rho.apply(q).unwrap()).unwrap();
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    assert!(worst <= 1e-13, "residual {worst}");
    println!("PASS criterion 3: restriction morphism residual {worst:.3e} <= 1e-13 on 200 kernels");
}

#[test]
fn criterion_04_two_limit_decomposition() {
    let _guard = heavy_lock();
    let t0 = Instant::now();
    let cfg = TruncationConfig { sizes: vec![500, 1000, 2000], ..Default::default() };
    let mut worst = 0.0f64;
    for (vm, vp) in [(0.0, 0.0), (0.0, 4.0), (-1.0, 1.0)] {
        let m = models::two_limit_line(vm, vp, &nn()).unwrap();
        let boundary = m.essential_spectrum_boundary().unwrap();
        let cloud = m.essential_spectrum_truncation(&cfg).unwrap();
        let d = hausdorff_distance(&boundary, &cloud).unwrap();
        assert!(d <= 0.05, "(v-={vm}, v+={vp}): hausdorff {d}");
        worst = worst.max(d);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "took {dt:?}");
    println!("PASS criterion 4: two-limit decomposition hausdorff {worst:.4} <= 0.05 at window 2000 in {dt:?}");
}

#[test]
fn criterion_05_hofstadter() {
    let _guard = heavy_lock();
    let t0 = Instant::now();
    let cfg = TruncationConfig { sizes: vec![40, 50, 60], ..Default::default() };
    let mut worst = 0.0f64;
    for q in [2u32, 3, 5] {
        let m = models::hofstadter(1, q, 1.0, 1.0).unwrap();
        let bloch = m.essential_spectrum_boundary().unwrap();
        let cloud = m.essential_spectrum_truncation(&cfg).unwrap();
        let d = hausdorff_distance(&bloch, &cloud).unwrap();
        assert!(d <= 0.1, "q={q}: hausdorff {d}");
        worst = worst.max(d);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "took {dt:?}");
    println!("PASS criterion 5: hofstadter truncation vs bloch hausdorff {worst:.4} <= 0.1 in {dt:?}");
}

#[test]
fn criterion_06_toeplitz_fredholm_grid() {
    let m = models::wiener_hopf_line(&[(1, ONE)]).unwrap();
    let mut disagreements = 0usize;
    let mut compared = 0usize;
    for i in 0..40 {
        for j in 0..40 {
            let re = -2.0 + 4.0 * i as f64 / 39.0;
            let im = -2.0 + 4.0 * j as f64 / 39.0;
            let lambda = Complex64::new(re, im);
            if (lambda.norm() - 1.0).abs() <= 0.05 {
                continue; // inside the exclusion band around the circle
            }
            compared += 1;
            let check = m.fredholm_check(lambda).unwrap();
            let (oracle, _index) = m.winding_oracle(lambda).unwrap();
            let circle_verdict = lambda.norm() != 1.0;
            if check.fredholm != oracle || check.fredholm != circle_verdict {
                disagreements += 1;
            }
        }
    }
    assert!(compared > 1200);
    assert_eq!(disagreements, 0);
    // and the winding index of the shift is -1 inside the circle
    let (_f, index) = m.winding_oracle(Complex64::new(0.0, 0.0)).unwrap();
    assert_eq!(index, -1);
    println!("PASS criterion 6: fredholm vs winding oracle, 0 disagreements on {compared} grid points");
}

#[test]
fn criterion_07_gauge_covariance() {
    let _guard = heavy_lock();
    let t0 = Instant::now();
    // two equal-flux vector potentials on the 40x40 box at q = 3
    let alpha = std::f64::consts::TAU / 3.0;
    let a = DiscreteVectorPotential::LandauX { alpha };
    let b = DiscreteVectorPotential::LandauY { alpha };
    let ha = models::hofstadter::peierls_matrix(&a, 40, 1.0, 1.0).unwrap();
    let hb = models::hofstadter::peierls_matrix(&b, 40, 1.0, 1.0).unwrap();
    let sa = spectrum(&ha).unwrap();
    let sb = spectrum(&hb).unwrap();
    let d1 = hausdorff_distance(&sa, &sb).unwrap();
    assert!(d1 <= 1e-10, "hofstadter gauge distance {d1}");

    // Wiener-Hopf compression at N = 500 with a gauge dressing
    let m = models::wiener_hopf_line(&nn()).unwrap();
    let plain = m.toeplitz_with_gauge(500, None).unwrap();
    let mut edges = std::collections::BTreeMap::new();
    for n in -2i64..510 {
        edges.insert(n, 0.2 * (n as f64).sin() - 0.07 * n as f64);
    }
    let gauged = m
        .toeplitz_with_gauge(500, Some(&DiscreteVectorPotential::Line { edges }))
        .unwrap();
    let sp = spectrum(&plain).unwrap();
    let sg = spectrum(&gauged).unwrap();
    let d2 = hausdorff_distance(&sp, &sg).unwrap();
    assert!(d2 <= 1e-10, "wiener-hopf gauge distance {d2}");
    let dt = t0.elapsed();
    println!("PASS criterion 7: gauge covariance distances {d1:.2e}, {d2:.2e} <= 1e-10 in {dt:?}");
}

/// Random normal matrix with hull vertices in angular general position, so
/// the 720-angle sweep resolves every vertex of co(sp).
fn random_normal_general_position(n: usize, seed: u64) -> OperatorMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let hull_points = 6 + (seed as usize % 5);
    let mut eigs = Vec::with_capacity(n);
    for k in 0..hull_points.min(n) {
        let theta = std::f64::consts::TAU * (k as f64 + rng.gen_range(0.0..0.25)) / hull_points as f64;
        let r = rng.gen_range(1.0..1.3);
        eigs.push(Complex64::new(r * theta.cos(), r * theta.sin()));
    }
    while eigs.len() < n {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = rng.gen_range(0.0..0.4);
        eigs.push(Complex64::new(r * theta.cos(), r * theta.sin()));
    }
    // conjugate by a random unitary (product of Householder reflections)
    let mut u = Array2::<Complex64>::eye(n);
    for _ in 0..3 {
        let mut v = Array1::<Complex64>::zeros(n);
        let mut norm = 0.0;
        for i in 0..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            v[i] = z;
            norm += z.norm_sqr();
        }
        let norm = norm.sqrt();
        v.mapv_inplace(|z| z / norm);
        let mut h = Array2::<Complex64>::eye(n);
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] -= 2.0 * v[i] * v[j].conj();
            }
        }
        u = u.dot(&h);
    }
    let mut d = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        d[[i, i]] = eigs[i];
    }
    let uh = u.t().mapv(|z| z.conj());
    let m = u.dot(&d).dot(&uh);
    OperatorMatrix::new(m, Default::default())
}

#[test]
fn criterion_08_numerical_range() {
    let t0 = Instant::now();
    // (a) 50 random normal matrices: the sweep polygon equals co(sp)
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let n = 2 + (seed as usize * 7) % 63;
        let h = random_normal_general_position(n.max(2), seed);
        let region = numerical_range(&h, 720).unwrap();
        let sp = spectrum(&h).unwrap();
        let hull = convex_hull(sp.points()).unwrap();
        let d = region_hausdorff(&region, &hull);
        worst = worst.max(d);
        assert!(d <= 1e-6, "seed {seed}, n {n}: hausdorff {d}");
    }

    // (b) Jordan block: disk of radius 1/2
    let data = array![
        [Complex64::new(0.0, 0.0), ONE],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    ];
    let jordan = OperatorMatrix::new(data, Default::default());
    let region = numerical_range(&jordan, 720).unwrap();
    assert!((region.radius() - 0.5).abs() <= 1e-3, "radius {}", region.radius());

    // (c) group bundle: nr equals the hull of the two component ranges
    let bundle = models::group_bundle_model(16, &[(1, 1.0), (-1, 1.0)]).unwrap();
    let units: Vec<UnitId> = bundle.instance.groupoid.units.ids().collect();
    let ds = direct_sum_rep(&bundle.instance.kernel, &units).unwrap();
    let nr_full = numerical_range(&ds, 720).unwrap();
    let hull_of_components = bundle.essential_numerical_range(720).unwrap();
    let d = region_hausdorff(&nr_full, &hull_of_components);
    assert!(d <= 1e-8, "bundle hull distance {d}");
    // the union itself is genuinely non-convex: the midpoint between the
    // extremes 2 and 2i lies in the hull but in neither component range
    let mid = Complex64::new(1.0, 1.0);
    let comp1 = bundle.boundary_component_range(&bundle.boundary[0], 720).unwrap();
    let comp2 = bundle.boundary_component_range(&bundle.boundary[1], 720).unwrap();
    assert!(gspec::spectral::distance_to_region(mid, &comp1) > 0.1);
    assert!(gspec::spectral::distance_to_region(mid, &comp2) > 0.1);
    assert!(gspec::spectral::distance_to_region(mid, &hull_of_components) < 1e-9);

    let dt = t0.elapsed();
    println!("PASS criterion 8: numerical ranges (normal {worst:.2e} <= 1e-6; jordan; bundle {d:.2e} <= 1e-8) in {dt:?}");
}

#[test]
fn criterion_09_compression_invariance() {
    let _guard = heavy_lock();
    let t0 = Instant::now();
    let base = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let reduced = models::partial_action_complement(&base, &[-3, -2, -1, 0, 1, 2, 3]).unwrap();
    let cfg = TruncationConfig { sizes: vec![500, 1000, 2000], ..Default::default() };
    let rep = models::verify_compression_invariance(&base, &reduced, &cfg, 0.05).unwrap();
    assert!(rep.boundary_exactly_equal, "boundary clouds must match exactly");
    assert!(rep.truncation_hausdorff <= 0.05, "hausdorff {}", rep.truncation_hausdorff);
    assert!(rep.outliers <= 10, "outliers {}", rep.outliers);
    let dt = t0.elapsed();
    println!(
        "PASS criterion 9: compression invariance (boundary exact, truncation {:.4} <= 0.05, {} outliers <= 10) in {dt:?}",
        rep.truncation_hausdorff, rep.outliers
    );
}

#[test]
fn criterion_10_non_propagation() {
    let _guard = heavy_lock();
    let t0 = Instant::now();
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let opts = PropagationOptions {
        target_component: "+inf".into(),
        kappa_min: -1.5,
        kappa_max: 1.5,
        plateau_fraction: 0.6,
        epsilon: 0.05,
        window: 4000,
        family: vec![0, 25, 50, 100, 200, 400, 800, 1600],
        time_check: Some((200.0, 50, 50)),
        seed: 11,
        check_half_window: true,
    };
    let rep = m.propagate(&opts).unwrap();
    let n0 = rep.found_param.expect("neighborhood found");
    let stat = rep.static_bound.unwrap();
    let dynamic = rep.time_uniform_max.unwrap();
    assert!(n0 <= 4000);
    assert!(stat <= 0.05, "static bound {stat}");
    assert!(dynamic <= stat + 1e-10, "dynamic {dynamic} vs static {stat}");
    assert!(rep.converged, "window-doubling check failed");
    assert!(!rep.inconclusive);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "took {dt:?}");
    println!("PASS criterion 10: non-propagation n0 = {n0}, static {stat:.2e} <= 0.05, dynamic {dynamic:.2e} in {dt:?}");
}

#[test]
fn criterion_11_exel_witness() {
    let finite_models = [
        models::group_bundle_model(8, &[(1, 1.0), (-1, 1.0)]).unwrap(),
        models::group_bundle_model(16, &[(1, 1.0), (-1, 1.0), (0, 0.5)]).unwrap(),
        models::compact_pair(6, Complex64::new(0.5, 0.0)).unwrap(),
        models::compact_pair(9, Complex64::new(0.0, 0.0)).unwrap(),
    ];
    let mut worst = 0.0f64;
    for m in &finite_models {
        let units: Vec<UnitId> = m.instance.groupoid.units.ids().collect();
        let (norm, witness) = reduced_norm(&m.instance.kernel, &units, None).unwrap();
        let ds = direct_sum_rep(&m.instance.kernel, &units).unwrap();
        let ds_norm = ds.opnorm().unwrap();
        let rel = (norm - ds_norm).abs() / (1.0 + ds_norm);
        worst = worst.max(rel);
        assert!(rel <= 1e-12, "{}: {norm} vs {ds_norm}", m.name);
        assert!(units.contains(&witness));
    }
    println!("PASS criterion 11: exel witness matches direct sum, residual {worst:.2e} <= 1e-12");
}

#[test]
fn criterion_12_determinism() {
    let models = verify::shipped_models().unwrap();
    let mut bodies = Vec::new();
    for _ in 0..2 {
        let mut reports = Vec::new();
        for s in verify::Suite::parse("all").unwrap() {
            reports.push(verify::run_suite(s, &models).unwrap());
        }
        let (body, ok) = verify::render_reports(&reports);
        assert!(ok);
        bodies.push(body);
    }
    assert_eq!(bodies[0], bodies[1], "verification reports must be bitwise identical");
    println!("PASS criterion 12: repeated verification reports bitwise identical ({} bytes)", bodies[0].len());
}
