//! Independent-oracle tests: closed forms, companion polynomials, Monte
//! Carlo bounds and explicit constructions cross-checking the spectral
//! pipelines.

use gspec::eigen::{BACKEND, EigenBackend};
use gspec::models;
use gspec::propagation::EnergyBump;
use gspec::rep::OperatorMatrix;
use gspec::spectral::{
    distance_to_region, essential_spectrum_truncation, hausdorff_distance, numerical_range,
    spectrum, truncation_outliers, MethodTag, Resolution, SpectralSet, TruncationConfig,
};
use ndarray::prelude::*;
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn nn() -> Vec<(i64, Complex64)> {
    vec![(1, ONE), (-1, ONE)]
}

#[test]
fn dirichlet_laplacian_closed_form() {
    // eigenvalues of the N x N free-hopping window are 2 cos(k pi / (N+1))
    let m = models::two_limit_line(0.0, 0.0, &nn()).unwrap();
    let n = 64usize;
    let inst = m.instantiate(n).unwrap();
    let h = inst.vector_matrix().unwrap();
    let got = BACKEND.eigh_values(&h.data).unwrap();
    let mut want: Vec<f64> = (1..=n)
        .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
        .collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, w) in got.iter().zip(want.iter()) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn identity_matrix_spectrum() {
    let data = Array2::<Complex64>::eye(3);
    let m = OperatorMatrix::new(data, Default::default());
    let s = spectrum(&m).unwrap();
    assert_eq!(s.len(), 3);
    for z in s.points() {
        assert!((z - ONE).norm() < 1e-14);
    }
}

#[test]
fn harper_bloch_matches_companion_polynomial_roots() {
    // q = 3 momentum matrix at k = (0,0): eigenvalues against the roots of
    // the characteristic cubic computed via its companion matrix
    let q = 3usize;
    let alpha = std::f64::consts::TAU / 3.0;
    let mut h = Array2::<Complex64>::zeros((q, q));
    for j in 0..q {
        h[[j, j]] = Complex64::new(2.0 * (alpha * j as f64).cos(), 0.0);
        let jn = (j + 1) % q;
        h[[jn, j]] += ONE;
        h[[j, jn]] += ONE;
    }
    let got = BACKEND.eigh_values(&h).unwrap();

    // characteristic polynomial lambda^3 + c2 lambda^2 + c1 lambda + c0
    let tr: Complex64 = (0..q).map(|i| h[[i, i]]).sum();
    let mut minors = Complex64::new(0.0, 0.0);
    for i in 0..q {
        for j in (i + 1)..q {
            minors += h[[i, i]] * h[[j, j]] - h[[i, j]] * h[[j, i]];
        }
    }
    let det = h[[0, 0]] * (h[[1, 1]] * h[[2, 2]] - h[[1, 2]] * h[[2, 1]])
        - h[[0, 1]] * (h[[1, 0]] * h[[2, 2]] - h[[1, 2]] * h[[2, 0]])
        + h[[0, 2]] * (h[[1, 0]] * h[[2, 1]] - h[[1, 1]] * h[[2, 0]]);
    let (c2, c1, c0) = (-tr, minors, -det);
    let mut companion = Array2::<Complex64>::zeros((3, 3));
    companion[[0, 2]] = -c0;
    companion[[1, 2]] = -c1;
    companion[[2, 2]] = -c2;
    companion[[1, 0]] = ONE;
    companion[[2, 1]] = ONE;
    let mut roots: Vec<f64> = BACKEND.eig_values(&companion).unwrap().iter().map(|z| z.re).collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, r) in got.iter().zip(roots.iter()) {
        assert!((g - r).abs() < 1e-10, "{g} vs {r}");
    }
}

#[test]
fn jordan_block_numerical_range_against_monte_carlo() {
    use rand::{Rng, SeedableRng};
    let data = array![
        [Complex64::new(0.0, 0.0), ONE],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    ];
    let h = OperatorMatrix::new(data.clone(), Default::default());
    let region = numerical_range(&h, 720).unwrap();
    // Monte Carlo from inside: max |<Hu, u>| over random unit vectors
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut mc = 0.0f64;
    for _ in 0..200_000 {
        let u = [
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ];
        let norm2 = u[0].norm_sqr() + u[1].norm_sqr();
        // <Hu, u> = conj(u0) u1
        let val = (u[0].conj() * u[1]).norm() / norm2;
        mc = mc.max(val);
    }
    // supporting-line value at angle 0 is exactly 1/2
    assert!(region.radius() <= 0.5 + 1e-12);
    assert!(region.radius() >= mc - 1e-3);
    assert!((region.radius() - 0.5).abs() < 1e-3);
}

#[test]
fn two_limit_boundary_formula_matches_shifted_symbols() {
    // v- = 0, v+ = 4: [-2,2] u [2,6]
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let cloud = m.essential_spectrum_boundary().unwrap();
    let (lo, hi) = cloud
        .points()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), z| (l.min(z.re), h.max(z.re)));
    assert!((lo + 2.0).abs() < 1e-9 && (hi - 6.0).abs() < 1e-9);
    // dense in the union: every grid point of [-2,6] is close to the cloud
    for k in 0..100 {
        let x = -2.0 + 8.0 * k as f64 / 99.0;
        assert!(cloud.min_distance_to(Complex64::new(x, 0.0)) < 0.01, "gap at {x}");
    }
}

#[test]
fn asymmetric_hopping_gives_ellipse_boundary_curves() {
    // non-Hermitian hopping t1 delta_1 + t2 delta_{-1}: the symbol curve is
    // the ellipse t1 e^{-i theta} + t2 e^{i theta}
    let (t1, t2) = (1.5, 0.5);
    let m = models::two_limit_line(
        0.0,
        0.0,
        &[(1, Complex64::new(t1, 0.0)), (-1, Complex64::new(t2, 0.0))],
    )
    .unwrap();
    let cloud = m.essential_spectrum_boundary().unwrap();
    for z in cloud.points() {
        // ellipse semi-axes |t1 + t2| (real), |t1 - t2| (imaginary)
        let e = (z.re / (t1 + t2)).powi(2) + (z.im / (t1 - t2)).powi(2);
        assert!((e - 1.0).abs() < 1e-9, "point {z} off the ellipse");
    }
    // the truncation leg refuses non-Hermitian kernels
    let cfg = TruncationConfig { sizes: vec![64, 96], ..Default::default() };
    assert!(matches!(
        m.essential_spectrum_truncation(&cfg),
        Err(gspec::error::Error::NotHermitian(_))
    ));
}

#[test]
fn rank_one_perturbation_bound_state_is_excluded_and_flagged() {
    // single-site potential v at the origin: bound state at sqrt(4 + v^2),
    // outside the essential band [-2, 2]
    let v = 3.0f64;
    let m = models::two_limit_line(0.0, 0.0, &nn()).unwrap();
    let provider = |size: usize| -> gspec::error::Result<(OperatorMatrix, Vec<bool>)> {
        let inst = m.instantiate(size)?;
        let mut h = inst.vector_matrix()?;
        // the window is centered; the origin sits at index size/2
        let mid = size / 2;
        h.data[[mid, mid]] += Complex64::new(v, 0.0);
        let h = OperatorMatrix::new(h.data, h.provenance);
        Ok((h, inst.edge_mask.clone()))
    };
    let cfg = TruncationConfig { sizes: vec![200, 400, 800], ..Default::default() };
    let cloud = essential_spectrum_truncation(&provider, &cfg).unwrap();
    let bound_state = (4.0 + v * v).sqrt();
    // the essential cloud fills [-2,2] and excludes the bound state
    let band = SpectralSet::from_reals(
        (0..400).map(|k| -2.0 + 4.0 * k as f64 / 399.0).collect(),
        MethodTag::SymbolRange,
        Resolution::default(),
    )
    .unwrap();
    let d = hausdorff_distance(&cloud, &band).unwrap();
    assert!(d < 0.05, "essential cloud off the band by {d}");
    assert!(cloud.min_distance_to(Complex64::new(bound_state, 0.0)) > 0.5);
    // and it is reported separately as discrete spectrum
    let outliers = truncation_outliers(&provider, &cfg, &cloud, 0.05).unwrap();
    assert_eq!(outliers.len(), 1);
    assert!((outliers[0] - bound_state).abs() < 1e-6);
}

#[test]
fn compression_of_hermitian_matrix_shrinks_numerical_range() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    let n = 12;
    let mut data = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..i {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            data[[i, j]] = z;
            data[[j, i]] = z.conj();
        }
        data[[i, i]] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    }
    let h = OperatorMatrix::new(data, Default::default());
    let big = numerical_range(&h, 180).unwrap();
    let keep: Vec<usize> = (0..n).step_by(2).collect();
    let small = gspec::rep::compress(&h, &keep).unwrap();
    let small_range = numerical_range(&small, 180).unwrap();
    for v in small_range.vertices() {
        assert!(distance_to_region(*v, &big) < 1e-9, "vertex {v} escaped");
    }
}

#[test]
fn laurent_compression_is_the_shift_toeplitz_matrix() {
    let m = models::wiener_hopf_line(&[(1, ONE)]).unwrap();
    let t = m.toeplitz_with_gauge(16, None).unwrap();
    for i in 0..16usize {
        for j in 0..16usize {
            let want = if i == j + 1 { 1.0 } else { 0.0 };
            assert!((t.data[[i, j]] - Complex64::new(want, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn kappa_in_global_gap_gives_zero_bound() {
    let m = models::two_limit_line(0.0, 0.0, &nn()).unwrap();
    let opts = gspec::models::PropagationOptions {
        target_component: "+inf".into(),
        kappa_min: 5.0,
        kappa_max: 6.0,
        plateau_fraction: 0.5,
        epsilon: 1e-10,
        window: 200,
        family: vec![0, 20],
        time_check: Some((10.0, 5, 4)),
        seed: 3,
        check_half_window: false,
    };
    let rep = m.propagate(&opts).unwrap();
    assert_eq!(rep.found_param, Some(0));
    assert!(rep.static_bound.unwrap() <= 1e-10);
    assert!(rep.time_uniform_max.unwrap() <= 1e-10);
}

#[test]
fn kappa_overlapping_the_targeted_component_is_refused() {
    // v- = 0, v+ = 4; kappa in [-1.5, 1.5] overlaps sp(F_{-inf}) = [-2, 2]
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let opts = gspec::models::PropagationOptions {
        target_component: "-inf".into(),
        kappa_min: -1.5,
        kappa_max: 1.5,
        plateau_fraction: 0.6,
        epsilon: 0.05,
        window: 200,
        family: vec![0, 20],
        time_check: None,
        seed: 0,
        check_half_window: false,
    };
    assert!(matches!(
        m.propagate(&opts),
        Err(gspec::error::Error::KappaOverlap { .. })
    ));
}

#[test]
fn neighborhood_search_reports_inconclusive_below_the_floor() {
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let opts = gspec::models::PropagationOptions {
        target_component: "+inf".into(),
        kappa_min: -1.5,
        kappa_max: 1.5,
        plateau_fraction: 0.6,
        epsilon: 1e-300,
        window: 120,
        family: vec![0, 10, 20],
        time_check: None,
        seed: 0,
        check_half_window: false,
    };
    let rep = m.propagate(&opts).unwrap();
    assert!(rep.inconclusive);
    assert!(rep.found_param.is_none());
    assert_eq!(rep.profile.len(), 3);
}

#[test]
fn shrinking_windows_never_increase_the_bound() {
    let m = models::two_limit_line(0.0, 4.0, &nn()).unwrap();
    let inst = m.instantiate(240).unwrap();
    let h = inst.vector_matrix().unwrap();
    let session = gspec::propagation::PropagationSession::new(&h).unwrap();
    let kappa = EnergyBump::new(-1.5, 1.5, 0.6).unwrap();
    let calc = gspec::propagation::KappaCalculus::new(&session, &|x| kappa.eval(x));
    let family = m.window_family(&inst, &[0, 10, 20, 40, 80]).unwrap();
    let mut prev = f64::INFINITY;
    for w in &family {
        let b = calc.masked_norm(&w.mask).unwrap();
        assert!(b <= prev + 1e-12, "bound increased: {b} after {prev}");
        prev = b;
    }
    // a-priori bound
    assert!(family
        .iter()
        .all(|w| calc.masked_norm(&w.mask).unwrap() <= calc.sup_kappa() + 1e-12));
}

#[test]
fn gauge_adapted_masks_commute_with_gauge_diagonals() {
    // bounds for gauge-conjugated Hamiltonians agree: masks are diagonal
    let m = models::wiener_hopf_line(&nn()).unwrap();
    let plain = m.toeplitz_with_gauge(160, None).unwrap();
    let mut edges = std::collections::BTreeMap::new();
    for n in -2i64..170 {
        edges.insert(n, 0.15 * (n as f64).cos());
    }
    let gauged = m
        .toeplitz_with_gauge(160, Some(&gspec::flux::DiscreteVectorPotential::Line { edges }))
        .unwrap();
    let kappa = EnergyBump::new(2.5, 3.5, 0.5).unwrap();
    let mask: Vec<bool> = (0..160).map(|i| i >= 120).collect();
    let s1 = gspec::propagation::PropagationSession::new(&plain).unwrap();
    let c1 = gspec::propagation::KappaCalculus::new(&s1, &|x| kappa.eval(x));
    let b1 = c1.masked_norm(&mask).unwrap();
    let s2 = gspec::propagation::PropagationSession::new(&gauged).unwrap();
    let c2 = gspec::propagation::KappaCalculus::new(&s2, &|x| kappa.eval(x));
    let b2 = c2.masked_norm(&mask).unwrap();
    assert!((b1 - b2).abs() < 1e-10, "{b1} vs {b2}");
}

#[test]
fn heisenberg_asymptotic_containment_soft() {
    // nested quasi-orbits: the axis-1 cloud sits inside the U cloud envelope
    let m = models::heisenberg_wiener_hopf(&models::heisenberg::symmetric_symbol(), 6).unwrap();
    let rep = m.verify_decomposition(&m.default_truncation_config()).unwrap();
    assert!(rep.stretch);
    for leg in &rep.containments {
        assert!(
            leg.directed_hausdorff < 0.6,
            "{} -> {}: {}",
            leg.inner,
            leg.outer,
            leg.directed_hausdorff
        );
    }
}
