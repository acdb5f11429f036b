//! Spectral sets, numerical ranges and the generic engines behind the
//! essential-spectrum computations: symbol ranges on dual tori, filtered
//! truncation clouds, convex hulls and Hausdorff comparisons.

use crate::eigen::{BACKEND, EigenBackend};
use crate::error::{Error, Result};
use crate::rep::OperatorMatrix;
use ndarray::prelude::*;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Eigen,
    SymbolRange,
    BoundaryFormula,
    TruncationCloud,
    Bloch,
    ConeCompression,
}

/// Grid/window metadata carried with every point cloud.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Resolution {
    pub grid: Option<usize>,
    pub windows: Vec<usize>,
    pub tolerance: Option<f64>,
}

/// A finite point cloud in the complex plane with method provenance.
#[derive(Clone, Debug)]
pub struct SpectralSet {
    points: Vec<Complex64>,
    pub method: MethodTag,
    pub resolution: Resolution,
}

impl SpectralSet {
    pub fn new(mut points: Vec<Complex64>, method: MethodTag, resolution: Resolution) -> Result<Self> {
        if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("spectral set contains non-finite points".into()));
        }
        points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(SpectralSet { points, method, resolution })
    }

    pub fn from_reals(reals: Vec<f64>, method: MethodTag, resolution: Resolution) -> Result<Self> {
        SpectralSet::new(
            reals.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            method,
            resolution,
        )
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Union keeping the method of the caller.
    pub fn union(&self, other: &SpectralSet) -> SpectralSet {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        SpectralSet {
            points,
            method: self.method,
            resolution: self.resolution.clone(),
        }
    }

    pub fn push(&mut self, z: Complex64) {
        self.points.push(z);
        self.points.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    }

    pub fn min_distance_to(&self, z: Complex64) -> f64 {
        self.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// All eigenvalues with multiplicity; the Hermitian path is used when the
/// matrix is flagged Hermitian.
pub fn spectrum(h: &OperatorMatrix) -> Result<SpectralSet> {
    let res = Resolution { grid: None, windows: vec![h.dim()], tolerance: None };
    if h.hermitian {
        let vals = BACKEND.eigh_values(&h.data)?;
        SpectralSet::from_reals(vals, MethodTag::Eigen, res)
    } else {
        let vals = BACKEND.eig_values(&h.data)?;
        SpectralSet::new(vals, MethodTag::Eigen, res)
    }
}

/// Samples of the Fourier transform sum_a f(a) exp(-i a.theta) on a uniform
/// grid of the dual torus (Z -> m points, Z^2 -> m x m points).
pub fn symbol_range(coeffs: &[(Vec<i64>, Complex64)], grid: usize) -> Result<SpectralSet> {
    if grid == 0 {
        return Err(Error::InvalidInput("symbol grid must be positive".into()));
    }
    let dim = coeffs.first().map(|(a, _)| a.len()).unwrap_or(1);
    if coeffs.iter().any(|(a, _)| a.len() != dim) || dim == 0 || dim > 2 {
        return Err(Error::InvalidInput("symbol offsets must share dimension 1 or 2".into()));
    }
    let mut points = Vec::new();
    let tau = std::f64::consts::TAU;
    match dim {
        1 => {
            for k in 0..grid {
                let theta = tau * k as f64 / grid as f64;
                let mut z = Complex64::new(0.0, 0.0);
                for (a, c) in coeffs {
                    z += c * Complex64::new(0.0, -(a[0] as f64) * theta).exp();
                }
                points.push(z);
            }
        }
        _ => {
            for k1 in 0..grid {
                for k2 in 0..grid {
                    let t1 = tau * k1 as f64 / grid as f64;
                    let t2 = tau * k2 as f64 / grid as f64;
                    let mut z = Complex64::new(0.0, 0.0);
                    for (a, c) in coeffs {
                        z += c
                            * Complex64::new(0.0, -(a[0] as f64) * t1 - (a[1] as f64) * t2).exp();
                    }
                    points.push(z);
                }
            }
        }
    }
    SpectralSet::new(
        points,
        MethodTag::SymbolRange,
        Resolution { grid: Some(grid), windows: vec![], tolerance: None },
    )
}

// ---------------------------------------------------------------------
// truncation clouds

/// Filtering thresholds for the truncation oracle; all overridable.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationConfig {
    /// Increasing window sizes; the last is the reference window.
    pub sizes: Vec<usize>,
    /// Fraction of the largest windows a value must persist across.
    pub stability_fraction: f64,
    /// Clustering tolerance for persistence matching.
    pub cluster_tol: f64,
    /// Reject eigenvectors with more than this mass on the edge region.
    pub edge_mass_threshold: f64,
    /// Reject isolated values: an eigenvalue of the reference window must
    /// have at least this many neighbors (itself included) within
    /// `cluster_tol`. Essential spectrum densifies with the window; discrete
    /// eigenvalues stay isolated.
    pub min_cluster_population: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            sizes: vec![500, 1000, 2000],
            stability_fraction: 0.5,
            cluster_tol: 0.02,
            edge_mass_threshold: 0.5,
            min_cluster_population: 3,
        }
    }
}

/// One truncation window: the Hermitian matrix plus the mask of edge basis
/// sites (the outer region used for edge-localization rejection).
pub type WindowProvider<'a> = dyn Fn(usize) -> Result<(OperatorMatrix, Vec<bool>)> + 'a;

/// Eigenvalues that persist across the top windows and whose eigenvectors are
/// not edge-localized. Hermitian input only; non-normal truncation spectra
/// are misleading, so the boundary formula is the only general route.
pub fn essential_spectrum_truncation(
    provider: &WindowProvider,
    cfg: &TruncationConfig,
) -> Result<SpectralSet> {
    if cfg.sizes.is_empty() {
        return Err(Error::Empty("no truncation windows configured".into()));
    }
    let mut clouds: Vec<Vec<f64>> = Vec::new();
    for &size in &cfg.sizes {
        let (h, edge_mask) = provider(size)?;
        if !h.hermitian {
            return Err(Error::NotHermitian(format!(
                "truncation window {size}: {}",
                h.provenance.description
            )));
        }
        if edge_mask.len() != h.dim() {
            return Err(Error::InvalidInput("edge mask does not match the window".into()));
        }
        let eig = BACKEND.eigh(&h.data)?;
        let mut kept = Vec::new();
        for (k, &lambda) in eig.values.iter().enumerate() {
            let col = eig.vectors.column(k);
            let edge_mass: f64 = col
                .iter()
                .zip(edge_mask.iter())
                .filter(|(_, &e)| e)
                .map(|(z, _)| z.norm_sqr())
                .sum();
            if edge_mass <= cfg.edge_mass_threshold {
                kept.push(lambda);
            }
        }
        kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
        clouds.push(kept);
    }
    let top = ((cfg.sizes.len() as f64) * cfg.stability_fraction).ceil().max(1.0) as usize;
    let top = top.min(clouds.len());
    let reference = clouds.last().unwrap().clone();
    let witnesses = &clouds[clouds.len() - top..];
    let population = |cloud: &[f64], lambda: f64| -> usize {
        let lo = cloud.partition_point(|&x| x < lambda - cfg.cluster_tol);
        let hi = cloud.partition_point(|&x| x <= lambda + cfg.cluster_tol);
        hi - lo
    };
    let survivors: Vec<f64> = reference
        .iter()
        .copied()
        .filter(|&lambda| {
            population(&reference, lambda) >= cfg.min_cluster_population
                && witnesses.iter().all(|cloud| {
                    match cloud.binary_search_by(|x| x.partial_cmp(&lambda).unwrap()) {
                        Ok(_) => true,
                        Err(pos) => {
                            let mut near = f64::INFINITY;
                            if pos < cloud.len() {
                                near = near.min((cloud[pos] - lambda).abs());
                            }
                            if pos > 0 {
                                near = near.min((cloud[pos - 1] - lambda).abs());
                            }
                            near <= cfg.cluster_tol
                        }
                    }
                })
        })
        .collect();
    SpectralSet::from_reals(
        survivors,
        MethodTag::TruncationCloud,
        Resolution {
            grid: None,
            windows: cfg.sizes.clone(),
            tolerance: Some(cfg.cluster_tol),
        },
    )
}

/// Eigenvalues of the largest window rejected by the essential filter
/// (candidate discrete spectrum: isolated or interface-localized states).
pub fn truncation_outliers(
    provider: &WindowProvider,
    cfg: &TruncationConfig,
    essential: &SpectralSet,
    tol: f64,
) -> Result<Vec<f64>> {
    let &size = cfg.sizes.last().unwrap();
    let (h, _) = provider(size)?;
    let vals = BACKEND.eigh_values(&h.data)?;
    Ok(vals
        .into_iter()
        .filter(|&v| essential.min_distance_to(Complex64::new(v, 0.0)) > tol)
        .collect())
}

// ---------------------------------------------------------------------
// convex geometry

/// Convex polygon in the complex plane, vertices counterclockwise.
#[derive(Clone, Debug)]
pub struct ConvexRegion {
    vertices: Vec<Complex64>,
}

impl ConvexRegion {
    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        distance_to_region(z, self) <= tol
    }

    /// Largest |v| over the vertices (polygon radius).
    pub fn radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Monotone-chain convex hull. Degenerate inputs give degenerate polygons
/// (a point or a segment).
pub fn convex_hull(points: &[Complex64]) -> Result<ConvexRegion> {
    if points.is_empty() {
        return Err(Error::Empty("convex hull of nothing".into()));
    }
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    if pts.len() <= 2 {
        return Ok(ConvexRegion { vertices: pts });
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(ConvexRegion { vertices: lower })
}

fn distance_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sqr();
    if denom == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / denom).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Euclidean distance from a point to a convex region (0 inside).
pub fn distance_to_region(z: Complex64, region: &ConvexRegion) -> f64 {
    let v = &region.vertices;
    match v.len() {
        0 => f64::INFINITY,
        1 => (z - v[0]).norm(),
        2 => distance_to_segment(z, v[0], v[1]),
        _ => {
            let inside = (0..v.len()).all(|i| {
                let j = (i + 1) % v.len();
                cross(v[i], v[j], z) >= -1e-12
            });
            if inside {
                0.0
            } else {
                (0..v.len())
                    .map(|i| distance_to_segment(z, v[i], v[(i + 1) % v.len()]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Hausdorff distance between convex regions (attained at vertices).
pub fn region_hausdorff(a: &ConvexRegion, b: &ConvexRegion) -> f64 {
    let d1 = a.vertices.iter().map(|&v| distance_to_region(v, b)).fold(0.0f64, f64::max);
    let d2 = b.vertices.iter().map(|&v| distance_to_region(v, a)).fold(0.0f64, f64::max);
    d1.max(d2)
}

/// Directed Hausdorff sup_{a in A} inf_{b in B} |a-b|.
pub fn directed_hausdorff(a: &SpectralSet, b: &SpectralSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("hausdorff distance of an empty set".into()));
    }
    let mut worst = 0.0f64;
    for &p in a.points() {
        let mut best = f64::INFINITY;
        for &q in b.points() {
            best = best.min((p - q).norm());
            if best == 0.0 {
                break;
            }
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance between point clouds.
pub fn hausdorff_distance(a: &SpectralSet, b: &SpectralSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

// ---------------------------------------------------------------------
// numerical range

/// Supporting-line angle sweep: for each angle the top eigenvector u of
/// Re(exp(-i theta) H) contributes the boundary point <Hu, u>. The hull of
/// these points is an inscribed polygon converging from inside.
pub fn numerical_range(h: &OperatorMatrix, n_angles: usize) -> Result<ConvexRegion> {
    if n_angles < 8 {
        return Err(Error::InvalidInput("angle sweep needs at least 8 angles".into()));
    }
    let n = h.dim();
    let mut boundary = Vec::with_capacity(n_angles);
    let tau = std::f64::consts::TAU;
    for k in 0..n_angles {
        let theta = tau * k as f64 / n_angles as f64;
        let phase = Complex64::new(0.0, -theta).exp();
        let mut re_part = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                re_part[[i, j]] =
                    0.5 * (phase * h.data[[i, j]] + (phase * h.data[[j, i]]).conj());
            }
        }
        let eig = BACKEND.eigh(&re_part)?;
        let u = eig.vectors.column(n - 1);
        let hu = h.data.dot(&u);
        let p: Complex64 = u.iter().zip(hu.iter()).map(|(ui, hui)| ui.conj() * hui).sum();
        boundary.push(p);
    }
    convex_hull(&boundary)
}

/// nr(H) for a normal H realized as co(sp(H)); used as the symbol-route
/// oracle for abelian boundary operators.
pub fn hull_of_spectrum(s: &SpectralSet) -> Result<ConvexRegion> {
    convex_hull(s.points())
}

// ---------------------------------------------------------------------
// winding-number oracle for symbol curves

/// Winding number of the closed sampled curve around z; the curve is assumed
/// sampled densely enough that consecutive steps stay below pi in angle.
pub fn winding_number(curve: &[Complex64], z: Complex64) -> i32 {
    let mut total = 0.0f64;
    for k in 0..curve.len() {
        let a = curve[k] - z;
        let b = curve[(k + 1) % curve.len()] - z;
        total += (b * a.conj()).arg();
    }
    (total / std::f64::consts::TAU).round() as i32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::Provenance;

    #[test]
    fn hull_of_square_corners() {
        let pts = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.5, 0.5),
            Complex64::new(0.25, 0.75),
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.vertices().len(), 4);
    }

    #[test]
    fn hausdorff_example() {
        let a = SpectralSet::new(vec![Complex64::new(0.0, 0.0)], MethodTag::Eigen, Resolution::default()).unwrap();
        let b = SpectralSet::new(
            vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)],
            MethodTag::Eigen,
            Resolution::default(),
        )
        .unwrap();
        assert!((hausdorff_distance(&a, &b).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn symbol_range_of_hopping() {
        let coeffs = vec![(vec![1], Complex64::new(1.0, 0.0)), (vec![-1], Complex64::new(1.0, 0.0))];
        let s = symbol_range(&coeffs, 64).unwrap();
        for p in s.points() {
            assert!(p.im.abs() < 1e-12);
            assert!(p.re.abs() <= 2.0 + 1e-12);
        }
        let m = s.points().iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((m - 2.0).abs() < 1e-2);
    }

    #[test]
    fn numerical_range_of_normal_diag() {
        let data = ndarray::array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        ];
        let h = OperatorMatrix::new(data, Provenance::default());
        let region = numerical_range(&h, 64).unwrap();
        // segment [0, 1]
        assert!(distance_to_region(Complex64::new(0.5, 0.0), &region) < 1e-9);
        assert!(distance_to_region(Complex64::new(0.5, 0.3), &region) > 0.29);
    }

    #[test]
    fn jordan_block_disk() {
        let data = ndarray::array![
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let h = OperatorMatrix::new(data, Provenance::default());
        let region = numerical_range(&h, 720).unwrap();
        assert!((region.radius() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn winding_of_unit_circle() {
        let curve: Vec<Complex64> = (0..256)
            .map(|k| Complex64::new(0.0, std::f64::consts::TAU * k as f64 / 256.0).exp())
            .collect();
        assert_eq!(winding_number(&curve, Complex64::new(0.0, 0.0)), 1);
        assert_eq!(winding_number(&curve, Complex64::new(2.0, 0.0)), 0);
    }
}
