//! Discrete vector potentials, magnetic field data and flux rules on Z^2.
//!
//! Two flux rules ship, with different exactness trade-offs:
//!  * `triangle_flux_*`: flux through the straight-edge triangle; constant
//!    fields use the exact signed-area formula, tabulated fields use
//!    orientation-signed clipped plaquette areas. This is the rule behind
//!    the magnetic cocycle (the simplex-boundary identity makes the cocycle
//!    identity hold to rounding).
//!  * `staircase_loop_flux`: winding-number-weighted plaquette sum through
//!    the region bounded by the canonical staircase segments. Against this
//!    rule the discrete Stokes identity with `circulation` is exact for
//!    every discrete potential.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

pub type LatticePoint = (i64, i64);

/// Oriented-edge circulation data for a discrete vector potential on Z^2
/// (or on Z for the one-dimensional gauge tests).
#[derive(Clone, Debug)]
pub enum DiscreteVectorPotential {
    /// Landau gauge along x: vertical edge at column x carries alpha*x.
    LandauX { alpha: f64 },
    /// Landau gauge along y: horizontal edge at row y carries -alpha*y.
    LandauY { alpha: f64 },
    /// Symmetric gauge: half of each Landau form.
    Symmetric { alpha: f64 },
    /// Explicit per-edge table; `horiz[(x,y)]` is the edge (x,y)->(x+1,y),
    /// `vert[(x,y)]` the edge (x,y)->(x,y+1). Missing edges are an error
    /// inside the declared domain radius, zero outside none is declared.
    Table {
        horiz: BTreeMap<LatticePoint, f64>,
        vert: BTreeMap<LatticePoint, f64>,
    },
    /// One-dimensional potential: `edges[n]` is the edge n -> n+1.
    Line { edges: BTreeMap<i64, f64> },
}

impl DiscreteVectorPotential {
    fn horiz_edge(&self, x: i64, y: i64) -> Result<f64> {
        match self {
            DiscreteVectorPotential::LandauX { .. } => Ok(0.0),
            DiscreteVectorPotential::LandauY { alpha } => Ok(-alpha * y as f64),
            DiscreteVectorPotential::Symmetric { alpha } => Ok(-0.5 * alpha * y as f64),
            DiscreteVectorPotential::Table { horiz, .. } => horiz
                .get(&(x, y))
                .copied()
                .ok_or_else(|| Error::OutOfWindow(format!("horizontal edge ({x},{y}) outside potential domain"))),
            DiscreteVectorPotential::Line { .. } => {
                Err(Error::InvalidInput("1-D potential used on a 2-D path".into()))
            }
        }
    }

    fn vert_edge(&self, x: i64, y: i64) -> Result<f64> {
        match self {
            DiscreteVectorPotential::LandauX { alpha } => Ok(alpha * x as f64),
            DiscreteVectorPotential::LandauY { .. } => Ok(0.0),
            DiscreteVectorPotential::Symmetric { alpha } => Ok(0.5 * alpha * x as f64),
            DiscreteVectorPotential::Table { vert, .. } => vert
                .get(&(x, y))
                .copied()
                .ok_or_else(|| Error::OutOfWindow(format!("vertical edge ({x},{y}) outside potential domain"))),
            DiscreteVectorPotential::Line { .. } => {
                Err(Error::InvalidInput("1-D potential used on a 2-D path".into()))
            }
        }
    }

    /// Circulation around the unit plaquette with lower-left corner (x, y);
    /// this is the discrete field strength dA.
    pub fn plaquette(&self, x: i64, y: i64) -> Result<f64> {
        Ok(self.horiz_edge(x, y)? + self.vert_edge(x + 1, y)?
            - self.horiz_edge(x, y + 1)?
            - self.vert_edge(x, y)?)
    }

    /// 1-D circulation of a `Line` potential from a to b.
    pub fn circulation_1d(&self, a: i64, b: i64) -> Result<f64> {
        let DiscreteVectorPotential::Line { edges } = self else {
            return Err(Error::InvalidInput("not a 1-D potential".into()));
        };
        let mut total = 0.0;
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        for n in lo..hi {
            total += sign
                * edges.get(&n).copied().ok_or_else(|| {
                    Error::OutOfWindow(format!("edge {n} outside potential domain"))
                })?;
        }
        Ok(total)
    }
}

/// Vertex chain of the canonical discrete segment from a to b. For the
/// lexicographically ordered pair it is the staircase "axis 1 first, then
/// axis 2"; for the opposite orientation it is the exact reverse of that
/// chain, so circulations are antisymmetric under path reversal.
fn segment_vertices(from: LatticePoint, to: LatticePoint, out: &mut Vec<LatticePoint>) {
    let (x0, y0) = from;
    let (x1, y1) = to;
    if from <= to {
        let mut x = x0;
        while x != x1 {
            out.push((x, y0));
            x += if x1 >= x0 { 1 } else { -1 };
        }
        let mut y = y0;
        while y != y1 {
            out.push((x1, y));
            y += if y1 >= y0 { 1 } else { -1 };
        }
    } else {
        let mut y = y0;
        while y != y1 {
            out.push((x0, y));
            y += if y1 >= y0 { 1 } else { -1 };
        }
        let mut x = x0;
        while x != x1 {
            out.push((x, y1));
            x += if x1 >= x0 { 1 } else { -1 };
        }
    }
}

/// Circulation of A along the canonical discrete segment from a to b.
pub fn circulation(a_pot: &DiscreteVectorPotential, from: LatticePoint, to: LatticePoint) -> Result<f64> {
    let mut verts = Vec::new();
    segment_vertices(from, to, &mut verts);
    verts.push(to);
    let mut total = 0.0;
    for w in verts.windows(2) {
        let (p, q) = (w[0], w[1]);
        total += match (q.0 - p.0, q.1 - p.1) {
            (1, 0) => a_pot.horiz_edge(p.0, p.1)?,
            (-1, 0) => -a_pot.horiz_edge(q.0, q.1)?,
            (0, 1) => a_pot.vert_edge(p.0, p.1)?,
            (0, -1) => -a_pot.vert_edge(q.0, q.1)?,
            _ => unreachable!("non-unit step in segment chain"),
        };
    }
    Ok(total)
}

/// Exact signed area of the triangle (a, b, c): half the cross product.
pub fn signed_area(a: LatticePoint, b: LatticePoint, c: LatticePoint) -> f64 {
    let (ux, uy) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
    let (vx, vy) = ((c.0 - a.0) as f64, (c.1 - a.1) as f64);
    0.5 * (ux * vy - uy * vx)
}

/// Clip a convex polygon against the half-plane n.(p - p0) >= 0.
fn clip_halfplane(poly: &[(f64, f64)], p0: (f64, f64), n: (f64, f64)) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let inside = |p: (f64, f64)| n.0 * (p.0 - p0.0) + n.1 * (p.1 - p0.1) >= 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (pi, qi) = (inside(p), inside(q));
        if pi {
            out.push(p);
        }
        if pi != qi {
            let dp = n.0 * (p.0 - p0.0) + n.1 * (p.1 - p0.1);
            let dq = n.0 * (q.0 - p0.0) + n.1 * (q.1 - p0.1);
            let t = dp / (dp - dq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        s += p.0 * q.1 - q.0 * p.1;
    }
    0.5 * s
}

/// Area of (triangle abc) clipped to the unit square with lower-left (i, j),
/// carrying the orientation sign of (a, b, c).
fn clipped_cell_area(a: LatticePoint, b: LatticePoint, c: LatticePoint, i: i64, j: i64) -> f64 {
    let orient = signed_area(a, b, c);
    if orient == 0.0 {
        return 0.0;
    }
    let sign = orient.signum();
    let mut tri = vec![
        (a.0 as f64, a.1 as f64),
        (b.0 as f64, b.1 as f64),
        (c.0 as f64, c.1 as f64),
    ];
    if sign < 0.0 {
        tri.reverse();
    }
    let (x, y) = (i as f64, j as f64);
    let mut poly = tri;
    for (p0, n) in [
        ((x, y), (1.0, 0.0)),
        ((x + 1.0, y), (-1.0, 0.0)),
        ((x, y), (0.0, 1.0)),
        ((x, y + 1.0), (0.0, -1.0)),
    ] {
        poly = clip_halfplane(&poly, p0, n);
        if poly.is_empty() {
            return 0.0;
        }
    }
    sign * polygon_area(&poly)
}

/// Flux of a constant field through the triangle (a, b, c).
pub fn triangle_flux_constant(alpha: f64, a: LatticePoint, b: LatticePoint, c: LatticePoint) -> f64 {
    alpha * signed_area(a, b, c)
}

/// Flux of a tabulated field through the triangle (a, b, c), plaquette values
/// weighted by the orientation-signed clipped areas. Agrees with the constant
/// rule when the table is constant.
pub fn triangle_flux_table(
    alpha_at: &dyn Fn(LatticePoint) -> f64,
    a: LatticePoint,
    b: LatticePoint,
    c: LatticePoint,
) -> f64 {
    let (lo_x, hi_x) = (a.0.min(b.0).min(c.0), a.0.max(b.0).max(c.0));
    let (lo_y, hi_y) = (a.1.min(b.1).min(c.1), a.1.max(b.1).max(c.1));
    let mut total = 0.0;
    for i in lo_x..hi_x {
        for j in lo_y..hi_y {
            let w = clipped_cell_area(a, b, c, i, j);
            if w != 0.0 {
                total += w * alpha_at((i, j));
            }
        }
    }
    total
}

/// Winding number of the closed lattice-edge loop around the center of the
/// plaquette (i, j). The loop is a vertex list of unit steps, closed.
fn winding(loop_vertices: &[LatticePoint], i: i64, j: i64) -> i64 {
    let mut w = 0;
    for k in 0..loop_vertices.len() {
        let p = loop_vertices[k];
        let q = loop_vertices[(k + 1) % loop_vertices.len()];
        if p.0 == q.0 && p.0 > i {
            if q.1 == p.1 + 1 && p.1 == j {
                w += 1;
            } else if q.1 == p.1 - 1 && q.1 == j {
                w -= 1;
            }
        }
    }
    w
}

/// Flux through the region bounded by the closed chain of canonical segments
/// visiting `corners` in order, as a winding-weighted plaquette sum. Satisfies
/// the discrete Stokes identity exactly: for any potential A,
/// `staircase_loop_flux(dA, corners) = sum of staircase circulations of A`.
pub fn staircase_loop_flux(alpha_at: &dyn Fn(LatticePoint) -> f64, corners: &[LatticePoint]) -> f64 {
    let mut verts = Vec::new();
    for k in 0..corners.len() {
        segment_vertices(corners[k], corners[(k + 1) % corners.len()], &mut verts);
    }
    if verts.is_empty() {
        return 0.0;
    }
    let (lo_x, hi_x) = (
        verts.iter().map(|p| p.0).min().unwrap(),
        verts.iter().map(|p| p.0).max().unwrap(),
    );
    let (lo_y, hi_y) = (
        verts.iter().map(|p| p.1).min().unwrap(),
        verts.iter().map(|p| p.1).max().unwrap(),
    );
    let mut total = 0.0;
    for i in lo_x..hi_x {
        for j in lo_y..hi_y {
            let w = winding(&verts, i, j);
            if w != 0 {
                total += w as f64 * alpha_at((i, j));
            }
        }
    }
    total
}

/// Magnetic field data for the lattice models.
#[derive(Clone, Debug)]
pub enum MagneticFieldSpec {
    Zero,
    /// Constant flux alpha through every unit plaquette.
    ConstantFlux { alpha: f64 },
    /// Unit-dependent flux alpha(x), indexed by unit id of the model's unit
    /// space. Must be constant outside `core_radius` (the boundary limit),
    /// which is how continuity in the closure sense is certified at desk
    /// scale.
    UnitFlux { alpha: Vec<f64>, core_radius: i64 },
}

impl MagneticFieldSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            MagneticFieldSpec::Zero => true,
            MagneticFieldSpec::ConstantFlux { alpha } => *alpha == 0.0,
            MagneticFieldSpec::UnitFlux { alpha, .. } => alpha.iter().all(|&a| a == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_table(radius: i64, seed: u64) -> DiscreteVectorPotential {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut horiz = BTreeMap::new();
        let mut vert = BTreeMap::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                horiz.insert((x, y), rng.gen_range(-1.0..1.0));
                vert.insert((x, y), rng.gen_range(-1.0..1.0));
            }
        }
        DiscreteVectorPotential::Table { horiz, vert }
    }

    #[test]
    fn circulation_zero_on_trivial_path() {
        let a = random_table(4, 1);
        assert_eq!(circulation(&a, (1, 1), (1, 1)).unwrap(), 0.0);
    }

    #[test]
    fn circulation_antisymmetric() {
        let a = random_table(5, 2);
        for (p, q) in [((-2, 1), (3, -2)), ((0, 0), (4, 4)), ((2, -3), (2, 5)), ((1, 1), (-4, 1))] {
            let f = circulation(&a, p, q).unwrap();
            let b = circulation(&a, q, p).unwrap();
            assert!((f + b).abs() < 1e-12, "not antisymmetric on {p:?}->{q:?}");
        }
    }

    #[test]
    fn landau_circulation_example() {
        // vertical edge at column x carries alpha*x; (0,0)->(1,1) picks the
        // vertical step at column 1
        let alpha = 0.37;
        let a = DiscreteVectorPotential::LandauX { alpha };
        let got = circulation(&a, (0, 0), (1, 1)).unwrap();
        assert!((got - alpha).abs() < 1e-15);
    }

    #[test]
    fn discrete_stokes_exact_on_staircase_loops() {
        let a = random_table(6, 3);
        let triangles = [
            [(0, 0), (1, 0), (1, 1)],
            [(0, 0), (3, 1), (-2, 2)],
            [(1, -1), (-3, -2), (2, 3)],
            [(0, 0), (2, 0), (4, 0)], // degenerate
        ];
        for tri in triangles {
            let circ: f64 = (0..3)
                .map(|k| circulation(&a, tri[k], tri[(k + 1) % 3]).unwrap())
                .sum();
            let flux = staircase_loop_flux(&|c| a.plaquette(c.0, c.1).unwrap(), &tri);
            assert!(
                (circ - flux).abs() < 1e-12,
                "stokes violated on {tri:?}: {circ} vs {flux}"
            );
        }
    }

    #[test]
    fn clipped_triangle_flux_matches_area_for_constant_tables() {
        let tris = [
            [(0, 0), (1, 0), (1, 1)],
            [(0, 0), (3, 1), (-2, 2)],
            [(2, 2), (-1, 3), (0, -2)],
        ];
        for tri in tris {
            let area = signed_area(tri[0], tri[1], tri[2]);
            let flux = triangle_flux_table(&|_| 0.77, tri[0], tri[1], tri[2]);
            assert!((flux - 0.77 * area).abs() < 1e-10, "{tri:?}: {flux} vs {}", 0.77 * area);
        }
    }

    #[test]
    fn half_unit_square_example() {
        let flux = triangle_flux_constant(1.0, (0, 0), (1, 0), (1, 1));
        assert!((flux - 0.5).abs() < 1e-15);
        assert_eq!(triangle_flux_constant(2.0, (0, 0), (1, 0), (2, 0)), 0.0);
    }
}
