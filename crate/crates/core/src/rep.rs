//! Kernels realized as matrices: regular representations on (truncated)
//! fibers, the vector representation on the main orbit, reduced norms with
//! Exel witnesses, compressions, gauge conjugation and the extension-diagram
//! check.

use crate::cocycle::Extension;
use crate::eigen::{opnorm2, BACKEND, EigenBackend};
use crate::error::{Error, Result};
use crate::group::GroupElem;
use crate::groupoid::{ArrowId, FiniteGroupoid};
use crate::kernel::TwistedKernel;
use crate::unit_space::UnitId;
use ndarray::prelude::*;
use num_complex::Complex64;
use std::collections::HashMap;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HERMITIAN_TOL: f64 = 1e-12;

/// Where a matrix came from: window data plus the boundary-effect flag set
/// when kernel support reached outside the window basis (compression
/// semantics, not an error).
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub description: String,
    pub window: usize,
    pub boundary_clipped: bool,
}

/// Dense complex matrix on an explicit truncation window.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub data: Array2<Complex64>,
    pub hermitian: bool,
    pub provenance: Provenance,
}

impl OperatorMatrix {
    /// Wrap a matrix, detecting hermitianness within 1e-12.
    pub fn new(data: Array2<Complex64>, provenance: Provenance) -> Self {
        let hermitian = matrix_is_hermitian(&data);
        OperatorMatrix { data, hermitian, provenance }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn opnorm(&self) -> Result<f64> {
        if self.hermitian {
            let vals = BACKEND.eigh_values(&self.data)?;
            Ok(vals.iter().fold(0.0f64, |m, &v| m.max(v.abs())))
        } else {
            opnorm2(&self.data)
        }
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.data.dim(), other.data.dim());
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

pub fn matrix_is_hermitian(m: &Array2<Complex64>) -> bool {
    let n = m.nrows();
    if n != m.ncols() {
        return false;
    }
    for i in 0..n {
        for j in i..n {
            if (m[[i, j]] - m[[j, i]].conj()).norm() > HERMITIAN_TOL {
                return false;
            }
        }
    }
    true
}

/// Ordered basis of a truncation window.
#[derive(Clone, Debug)]
pub enum TruncationWindow {
    /// Materialized fiber arrows of the base unit (table groupoids and small
    /// fibers).
    FiberArrows { base: UnitId, arrows: Vec<ArrowId> },
    /// Fiber arrows (base, label) addressed by group label; works for lattice
    /// fibers far beyond the materialized label window.
    FiberLabels { base: UnitId, labels: Vec<GroupElem> },
    /// Main-orbit units (vector representation).
    Units(Vec<UnitId>),
}

impl TruncationWindow {
    pub fn len(&self) -> usize {
        match self {
            TruncationWindow::FiberArrows { arrows, .. } => arrows.len(),
            TruncationWindow::FiberLabels { labels, .. } => labels.len(),
            TruncationWindow::Units(u) => u.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The whole materialized d-fiber of x, ordered by label.
    pub fn full_fiber(g: &FiniteGroupoid, x: UnitId) -> Self {
        let mut arrows: Vec<ArrowId> = g.fiber_source(x).to_vec();
        arrows.sort_by_key(|&a| g.label(a));
        TruncationWindow::FiberArrows { base: x, arrows }
    }

    /// Fiber labels within a lattice ball around the base unit; only labels
    /// whose endpoint is materialized are kept.
    pub fn fiber_ball(g: &FiniteGroupoid, x: UnitId, radius: i64) -> Result<Self> {
        let action = g
            .action()
            .ok_or_else(|| Error::InvalidInput("fiber_ball needs an action groupoid".into()))?;
        let labels = action
            .group
            .ball(radius)
            .into_iter()
            .filter(|&a| action.theta(a, x).is_some())
            .collect();
        Ok(TruncationWindow::FiberLabels { base: x, labels })
    }
}

fn herm_flag_and_clip(
    mut data: Array2<Complex64>,
    clipped: bool,
    description: String,
) -> OperatorMatrix {
    // scrub negative zeros for bitwise determinism of exports
    data.mapv_inplace(|z| Complex64::new(z.re + 0.0, z.im + 0.0));
    let n = data.nrows();
    let m = OperatorMatrix::new(
        data,
        Provenance { description, window: n, boundary_clipped: clipped },
    );
    m
}

/// Regular representation Pi_x(f) on the window basis: the matrix of left
/// twisted convolution, M[xi, eta] = w f(xi eta^{-1}) omega(xi eta^{-1}, eta),
/// plus the adjoined scalar on the diagonal.
pub fn regular_rep(f: &TwistedKernel, window: &TruncationWindow) -> Result<OperatorMatrix> {
    let g = f.groupoid();
    let w = g.fiber_weight();
    let n = window.len();
    if n == 0 {
        return Err(Error::Empty("empty truncation window".into()));
    }
    let mut data = Array2::<Complex64>::zeros((n, n));
    let mut clipped = false;

    match window {
        TruncationWindow::FiberArrows { base, arrows } => {
            let index: HashMap<ArrowId, usize> =
                arrows.iter().enumerate().map(|(i, &a)| (a, i)).collect();
            for (j, &eta) in arrows.iter().enumerate() {
                if g.source(eta) != *base {
                    return Err(Error::InvalidInput("window arrow outside the fiber".into()));
                }
                data[[j, j]] += f.unit_scalar;
                // column j: entries at xi = zeta.eta for zeta in supp f with
                // d(zeta) = r(eta)
                for (zeta, v) in f.support() {
                    if g.source(zeta) != g.range(eta) {
                        continue;
                    }
                    match g.compose(zeta, eta) {
                        Ok(xi) => match index.get(&xi) {
                            Some(&i) => {
                                let omega = f.cocycle().eval(zeta, eta)?;
                                data[[i, j]] += w * v * omega;
                            }
                            None => clipped = true,
                        },
                        Err(Error::OutOfWindow(_)) => clipped = true,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        TruncationWindow::FiberLabels { base, labels } => {
            let action = g
                .action()
                .ok_or_else(|| Error::InvalidInput("label window on a table groupoid".into()))?;
            let index: HashMap<GroupElem, usize> =
                labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
            let mut by_source: HashMap<UnitId, Vec<(GroupElem, Complex64)>> = HashMap::new();
            for (zeta, v) in f.support() {
                let crate::groupoid::ArrowLabel::Elem(a) = g.label(zeta) else {
                    return Err(Error::InvalidInput("action arrow without label".into()));
                };
                by_source.entry(g.source(zeta)).or_default().push((a, v));
            }
            for (j, &b_j) in labels.iter().enumerate() {
                let mid = action.theta(b_j, *base).ok_or_else(|| {
                    Error::OutOfWindow(format!("fiber label {b_j} leaves the unit window"))
                })?;
                data[[j, j]] += f.unit_scalar;
                let Some(hops) = by_source.get(&mid) else { continue };
                for &(a, v) in hops {
                    let b_i = action.group.mul(a, b_j);
                    match index.get(&b_i) {
                        Some(&i) => {
                            let omega = f.cocycle().eval_action(*base, b_j, a)?;
                            data[[i, j]] += w * v * omega;
                        }
                        None => clipped = true,
                    }
                }
            }
        }
        TruncationWindow::Units(_) => {
            return Err(Error::InvalidInput(
                "unit windows belong to the vector representation".into(),
            ))
        }
    }
    Ok(herm_flag_and_clip(data, clipped, format!("regular_rep[{}]", n)))
}

/// Vector representation Pi_0(f) on a main-orbit unit window: the regular
/// representation at z transported along the range bijection r_z.
pub fn vector_rep(f: &TwistedKernel, z: UnitId, units: &[UnitId]) -> Result<OperatorMatrix> {
    let g = f.groupoid();
    let w = g.fiber_weight();
    let n = units.len();
    if n == 0 {
        return Err(Error::Empty("empty unit window".into()));
    }
    if !g.units.is_interior(z) {
        return Err(Error::InvalidInput("vector representation needs a main-orbit base".into()));
    }
    let mut data = Array2::<Complex64>::zeros((n, n));
    let mut clipped = false;
    let index: HashMap<UnitId, usize> = units.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    if let Some(action) = g.action() {
        for (j, &u_j) in units.iter().enumerate() {
            if !g.units.is_interior(u_j) {
                return Err(Error::InvalidInput("vector window must stay in the main orbit".into()));
            }
            let b_j = action.label_from_to(z, u_j).ok_or_else(|| {
                Error::InvalidInput("window unit not reachable from the base".into())
            })?;
            data[[j, j]] += f.unit_scalar;
            for &zeta in g.fiber_source(u_j) {
                let v = f.value(zeta);
                if v == ZERO {
                    continue;
                }
                match index.get(&g.range(zeta)) {
                    Some(&i) => {
                        let crate::groupoid::ArrowLabel::Elem(a) = g.label(zeta) else {
                            return Err(Error::InvalidInput("action arrow without label".into()));
                        };
                        let omega = f.cocycle().eval_action(z, b_j, a)?;
                        data[[i, j]] += w * v * omega;
                    }
                    None => clipped = true,
                }
            }
        }
    } else {
        // table groupoid: transport via the materialized arrows z -> u
        let mut to_unit: HashMap<UnitId, ArrowId> = HashMap::new();
        for &xi in g.fiber_source(z) {
            if to_unit.insert(g.range(xi), xi).is_some() {
                return Err(Error::InvalidInput(
                    "vector representation needs trivial isotropy on the main orbit".into(),
                ));
            }
        }
        for (j, &u_j) in units.iter().enumerate() {
            let eta = *to_unit
                .get(&u_j)
                .ok_or_else(|| Error::InvalidInput("window unit not in the main orbit".into()))?;
            data[[j, j]] += f.unit_scalar;
            for (zeta, v) in f.support() {
                if g.source(zeta) != u_j {
                    continue;
                }
                match index.get(&g.range(zeta)) {
                    Some(&i) => {
                        let omega = f.cocycle().eval(zeta, eta)?;
                        data[[i, j]] += w * v * omega;
                    }
                    None => clipped = true,
                }
            }
        }
    }
    Ok(herm_flag_and_clip(data, clipped, format!("vector_rep[{}]", n)))
}

/// Reduced norm over the supplied representative units: max of the fiber
/// operator norms, together with the witness unit attaining it.
pub fn reduced_norm(
    f: &TwistedKernel,
    units: &[UnitId],
    fiber_radius: Option<i64>,
) -> Result<(f64, UnitId)> {
    if units.is_empty() {
        return Err(Error::Empty("reduced_norm needs at least one unit".into()));
    }
    let g = f.groupoid();
    let mut best = f64::NEG_INFINITY;
    let mut witness = units[0];
    for &x in units {
        let window = match fiber_radius {
            Some(r) if g.action().is_some() => TruncationWindow::fiber_ball(g, x, r)?,
            _ => TruncationWindow::full_fiber(g, x),
        };
        let m = regular_rep(f, &window)?;
        let norm = m.opnorm()?;
        if norm > best {
            best = norm;
            witness = x;
        }
    }
    Ok((best, witness))
}

/// Block-diagonal matrix of the regular representations at the given units
/// (the direct-sum representation used to cross-check the Exel witness).
pub fn direct_sum_rep(f: &TwistedKernel, units: &[UnitId]) -> Result<OperatorMatrix> {
    let g = f.groupoid();
    let blocks: Vec<OperatorMatrix> = units
        .iter()
        .map(|&x| regular_rep(f, &TruncationWindow::full_fiber(g, x)))
        .collect::<Result<_>>()?;
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut data = Array2::<Complex64>::zeros((n, n));
    let mut off = 0;
    for b in &blocks {
        let k = b.dim();
        data.slice_mut(s![off..off + k, off..off + k]).assign(&b.data);
        off += k;
    }
    Ok(herm_flag_and_clip(data, false, format!("direct_sum[{}]", n)))
}

/// Gauge conjugation D* H D with D = diag(exp(i nu)); spectra are invariant.
pub fn gauge_conjugate(h: &OperatorMatrix, nu: &[f64]) -> OperatorMatrix {
    let n = h.dim();
    assert_eq!(nu.len(), n, "gauge function must cover the window basis");
    let mut data = h.data.clone();
    for i in 0..n {
        for j in 0..n {
            let phase = Complex64::new(0.0, nu[j] - nu[i]).exp();
            data[[i, j]] *= phase;
        }
    }
    OperatorMatrix::new(data, h.provenance.clone())
}

/// Principal submatrix on the selected window indices (J* H J).
pub fn compress(h: &OperatorMatrix, keep: &[usize]) -> Result<OperatorMatrix> {
    let n = h.dim();
    if keep.iter().any(|&i| i >= n) {
        return Err(Error::InvalidInput("compression window exceeds the matrix".into()));
    }
    let k = keep.len();
    let mut data = Array2::<Complex64>::zeros((k, k));
    for (i, &pi) in keep.iter().enumerate() {
        for (j, &pj) in keep.iter().enumerate() {
            data[[i, j]] = h.data[[pi, pj]];
        }
    }
    let mut prov = h.provenance.clone();
    prov.description = format!("{} | compressed[{k}]", prov.description);
    prov.window = k;
    Ok(OperatorMatrix::new(data, prov))
}

/// Commutation check for the extension diagram: compares the regular
/// representation of delta(f) on l^2(mu_N x fiber) against S (x) Pi_x(f),
/// where S is the rank-one projection onto t -> t^{-1}. Returns the max-entry
/// difference.
pub fn extension_diagram_check(
    ext: &Extension,
    f: &TwistedKernel,
    x: UnitId,
) -> Result<f64> {
    if ext.order < 2 {
        return Err(Error::InvalidInput("extension order must be at least 2".into()));
    }
    let phi = crate::kernel::delta_embed(ext, f)?;

    // basis of the extension fiber at x: (k, xi_i), index k*n + i
    let base_fiber: Vec<ArrowId> = {
        let mut v = ext.base.fiber_source(x).to_vec();
        v.sort_by_key(|&a| ext.base.label(a));
        v
    };
    let nf = base_fiber.len();
    let order = ext.order as usize;
    let ext_arrows: Vec<ArrowId> = (0..ext.order)
        .flat_map(|k| base_fiber.iter().map(move |&b| (k, b)))
        .map(|(k, b)| ext.arrow_id(k, b))
        .collect();
    let lhs = regular_rep(
        &phi.kernel,
        &TruncationWindow::FiberArrows { base: x, arrows: ext_arrows },
    )?;

    let base_window = TruncationWindow::FiberArrows { base: x, arrows: base_fiber };
    let pi_f = regular_rep(f, &base_window)?;

    let mut rhs = Array2::<Complex64>::zeros((order * nf, order * nf));
    let n_c = ext.order as f64;
    for k in 0..order {
        for l in 0..order {
            // S[t, s] = t^{-1} s / N on the normalized mu_N basis
            let t = std::f64::consts::TAU * k as f64 / n_c;
            let s = std::f64::consts::TAU * l as f64 / n_c;
            let phase = Complex64::new(0.0, s - t).exp() / n_c;
            for i in 0..nf {
                for j in 0..nf {
                    rhs[[k * nf + i, l * nf + j]] = phase * pi_f.data[[i, j]];
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in lhs.data.iter().zip(rhs.iter()) {
        worst = worst.max((a - b).norm());
    }
    Ok(worst)
}
