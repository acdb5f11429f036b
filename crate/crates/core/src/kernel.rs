//! The twisted convolution *-algebra: finitely supported kernels with an
//! adjoined unit scalar, products, involutions, Hahn norms, restriction
//! morphisms, and the homogeneous-component maps delta, kappa^n, chi^n on
//! the mu_N extension.

use crate::cocycle::{Extension, TwoCocycle};
use crate::error::{Error, Result};
use crate::groupoid::{ArrowId, FiniteGroupoid, InvariantRestriction};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// F = G + s*1: a finitely supported kernel G on the arrows plus the
/// coefficient s of the adjoined unit of the minimal unitization.
#[derive(Clone, Debug)]
pub struct TwistedKernel {
    groupoid: Arc<FiniteGroupoid>,
    cocycle: Arc<TwoCocycle>,
    values: BTreeMap<ArrowId, Complex64>,
    pub unit_scalar: Complex64,
}

/// Hahn norm of the kernel part; the adjoined scalar is reported separately.
#[derive(Clone, Copy, Debug)]
pub struct HahnNorm {
    pub kernel: f64,
    pub unit_scalar_abs: f64,
}

impl TwistedKernel {
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        cocycle: Arc<TwoCocycle>,
        values: BTreeMap<ArrowId, Complex64>,
        unit_scalar: Complex64,
    ) -> Result<Self> {
        if !Arc::ptr_eq(&groupoid, cocycle.groupoid()) {
            return Err(Error::MismatchedAlgebra);
        }
        let mut pruned = BTreeMap::new();
        for (id, v) in values {
            if id.idx() >= groupoid.arrow_count() {
                return Err(Error::InvalidInput(format!("kernel value on unknown arrow {id:?}")));
            }
            if v != ZERO {
                pruned.insert(id, v);
            }
        }
        Ok(TwistedKernel { groupoid, cocycle, values: pruned, unit_scalar })
    }

    pub fn zero(groupoid: Arc<FiniteGroupoid>, cocycle: Arc<TwoCocycle>) -> Result<Self> {
        TwistedKernel::new(groupoid, cocycle, BTreeMap::new(), ZERO)
    }

    /// The adjoined unit alone: F = s*1.
    pub fn scalar(
        groupoid: Arc<FiniteGroupoid>,
        cocycle: Arc<TwoCocycle>,
        s: Complex64,
    ) -> Result<Self> {
        TwistedKernel::new(groupoid, cocycle, BTreeMap::new(), s)
    }

    /// Point mass at one arrow.
    pub fn delta(
        groupoid: Arc<FiniteGroupoid>,
        cocycle: Arc<TwoCocycle>,
        arrow: ArrowId,
    ) -> Result<Self> {
        let mut v = BTreeMap::new();
        v.insert(arrow, Complex64::new(1.0, 0.0));
        TwistedKernel::new(groupoid, cocycle, v, ZERO)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn cocycle(&self) -> &Arc<TwoCocycle> {
        &self.cocycle
    }

    pub fn value(&self, id: ArrowId) -> Complex64 {
        self.values.get(&id).copied().unwrap_or(ZERO)
    }

    pub fn support(&self) -> impl Iterator<Item = (ArrowId, Complex64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn compatible(&self, other: &TwistedKernel) -> bool {
        Arc::ptr_eq(&self.groupoid, &other.groupoid) && Arc::ptr_eq(&self.cocycle, &other.cocycle)
    }

    pub fn scale(&self, c: Complex64) -> TwistedKernel {
        let values = self.values.iter().map(|(&k, &v)| (k, c * v)).collect();
        TwistedKernel {
            groupoid: self.groupoid.clone(),
            cocycle: self.cocycle.clone(),
            values,
            unit_scalar: c * self.unit_scalar,
        }
    }

    pub fn add(&self, other: &TwistedKernel) -> Result<TwistedKernel> {
        if !self.compatible(other) {
            return Err(Error::MismatchedAlgebra);
        }
        let mut values = self.values.clone();
        for (&k, &v) in &other.values {
            let e = values.entry(k).or_insert(ZERO);
            *e += v;
        }
        values.retain(|_, v| *v != ZERO);
        Ok(TwistedKernel {
            groupoid: self.groupoid.clone(),
            cocycle: self.cocycle.clone(),
            values,
            unit_scalar: self.unit_scalar + other.unit_scalar,
        })
    }

    pub fn sub(&self, other: &TwistedKernel) -> Result<TwistedKernel> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise multiply the kernel part by a per-arrow phase (the
    /// intertwiner between cohomologous twists).
    pub fn pointwise_mul(&self, sigma: &[Complex64], target: &Arc<TwoCocycle>) -> Result<TwistedKernel> {
        if sigma.len() != self.groupoid.arrow_count() {
            return Err(Error::InvalidInput("sigma must cover every arrow".into()));
        }
        let values = self.values.iter().map(|(&k, &v)| (k, sigma[k.idx()] * v)).collect();
        TwistedKernel::new(self.groupoid.clone(), target.clone(), values, self.unit_scalar)
    }

    /// Same kernel data under a different (compatible) cocycle reference.
    pub fn with_cocycle(&self, cocycle: Arc<TwoCocycle>) -> Result<TwistedKernel> {
        TwistedKernel::new(self.groupoid.clone(), cocycle, self.values.clone(), self.unit_scalar)
    }

    pub fn max_abs_diff(&self, other: &TwistedKernel) -> f64 {
        let mut m = (self.unit_scalar - other.unit_scalar).norm();
        for (&k, &v) in &self.values {
            m = m.max((v - other.value(k)).norm());
        }
        for (&k, &v) in &other.values {
            m = m.max((v - self.value(k)).norm());
        }
        m
    }
}

/// Twisted convolution with the adjoined-unit bookkeeping:
/// (G1 + s1)(G2 + s2) = G1*G2 + s1 G2 + s2 G1 + s1 s2 * 1.
pub fn convolve(f: &TwistedKernel, g: &TwistedKernel) -> Result<TwistedKernel> {
    if !f.compatible(g) {
        return Err(Error::MismatchedAlgebra);
    }
    let gr = f.groupoid();
    let w = gr.fiber_weight();
    let mut values: BTreeMap<ArrowId, Complex64> = BTreeMap::new();
    for (eta, fv) in f.support() {
        for (zeta, gv) in g.support() {
            if gr.source(eta) != gr.range(zeta) {
                continue;
            }
            let prod = gr.compose(eta, zeta)?;
            let omega = f.cocycle().eval(eta, zeta)?;
            let e = values.entry(prod).or_insert(ZERO);
            *e += fv * gv * omega * w;
        }
    }
    if f.unit_scalar != ZERO {
        for (k, gv) in g.support() {
            let e = values.entry(k).or_insert(ZERO);
            *e += f.unit_scalar * gv;
        }
    }
    if g.unit_scalar != ZERO {
        for (k, fv) in f.support() {
            let e = values.entry(k).or_insert(ZERO);
            *e += g.unit_scalar * fv;
        }
    }
    values.retain(|_, v| *v != ZERO);
    TwistedKernel::new(
        f.groupoid().clone(),
        f.cocycle().clone(),
        values,
        f.unit_scalar * g.unit_scalar,
    )
}

/// f^*(xi) = conj(omega(xi, xi^{-1})) conj(f(xi^{-1})); s goes to conj(s).
pub fn involution(f: &TwistedKernel) -> Result<TwistedKernel> {
    let gr = f.groupoid();
    let mut values = BTreeMap::new();
    for (xi, v) in f.support() {
        let target = gr.invert(xi);
        let omega = f.cocycle().eval(target, xi)?;
        values.insert(target, omega.conj() * v.conj());
    }
    TwistedKernel::new(
        f.groupoid().clone(),
        f.cocycle().clone(),
        values,
        f.unit_scalar.conj(),
    )
}

/// Hahn norm: max over units of the weighted fiber l^1 sums of |f| along
/// source fibers and range fibers.
pub fn hahn_norm(f: &TwistedKernel) -> HahnNorm {
    let gr = f.groupoid();
    let w = gr.fiber_weight();
    let n = gr.units.len();
    let mut by_source = vec![0.0f64; n];
    let mut by_range = vec![0.0f64; n];
    for (id, v) in f.support() {
        by_source[gr.source(id).idx()] += w * v.norm();
        by_range[gr.range(id).idx()] += w * v.norm();
    }
    let m1 = by_source.iter().cloned().fold(0.0, f64::max);
    let m2 = by_range.iter().cloned().fold(0.0, f64::max);
    HahnNorm { kernel: m1.max(m2), unit_scalar_abs: f.unit_scalar.norm() }
}

/// A restriction morphism rho_A bound to one invariant subset: restricting
/// many kernels through the same value shares the restricted cocycle, so the
/// images stay composable with each other.
pub struct RestrictionMorphism {
    parent: Arc<FiniteGroupoid>,
    parent_cocycle: Arc<TwoCocycle>,
    pub restriction: InvariantRestriction,
    pub cocycle: Arc<TwoCocycle>,
}

impl RestrictionMorphism {
    pub fn new(
        parent: Arc<FiniteGroupoid>,
        parent_cocycle: Arc<TwoCocycle>,
        subset: &std::collections::BTreeSet<crate::unit_space::UnitId>,
    ) -> Result<Self> {
        if !Arc::ptr_eq(&parent, parent_cocycle.groupoid()) {
            return Err(Error::MismatchedAlgebra);
        }
        let restriction = parent.restrict_invariant(subset)?;
        let cocycle = Arc::new(parent_cocycle.restrict(&restriction.reduction)?);
        Ok(RestrictionMorphism { parent, parent_cocycle, restriction, cocycle })
    }

    pub fn target(&self) -> &Arc<FiniteGroupoid> {
        &self.restriction.reduction.groupoid
    }

    /// rho_A(G + s1) = G|_{Xi_A} + s1 (the minimal-unitization extension).
    pub fn apply(&self, f: &TwistedKernel) -> Result<TwistedKernel> {
        if !Arc::ptr_eq(f.groupoid(), &self.parent) || !Arc::ptr_eq(f.cocycle(), &self.parent_cocycle)
        {
            return Err(Error::MismatchedAlgebra);
        }
        let mut values = BTreeMap::new();
        for (id, v) in f.support() {
            if let Some(&nid) = self.restriction.reduction.arrow_map.get(&id) {
                values.insert(nid, v);
            }
        }
        TwistedKernel::new(self.target().clone(), self.cocycle.clone(), values, f.unit_scalar)
    }

    /// Support-level exactness: the kernel of rho_A is exactly the set of
    /// kernels supported on arrows over the complement.
    pub fn kernel_support_is_complement(&self, f: &TwistedKernel) -> bool {
        let image = match self.apply(f) {
            Ok(k) => k,
            Err(_) => return false,
        };
        let vanishes = image.support_len() == 0;
        let complement_supported = f
            .support()
            .all(|(id, _)| !self.restriction.reduction.arrow_map.contains_key(&id));
        vanishes == complement_supported
    }
}

// ---------------------------------------------------------------------
// homogeneous components on the extension groupoid

/// A kernel on the mu_N extension, homogeneous of a fixed degree:
/// Phi(ts, xi) = t^{-n} Phi(s, xi).
pub struct HomogeneousKernel {
    pub kernel: TwistedKernel,
    pub degree: i32,
}

fn root(ext: &Extension, k: i64) -> Complex64 {
    let n = ext.order as i64;
    let k = ((k % n) + n) % n;
    let theta = std::f64::consts::TAU * k as f64 / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

impl HomogeneousKernel {
    /// Exact homogeneity defect: max |Phi(ts,xi) - t^{-n} Phi(s,xi)|.
    pub fn homogeneity_defect(&self, ext: &Extension) -> f64 {
        let mut worst = 0.0f64;
        for base in ext.base.arrow_ids() {
            for s in 0..ext.order {
                let phi_s = self.kernel.value(ext.arrow_id(s, base));
                for t in 0..ext.order {
                    let phi_ts = self.kernel.value(ext.arrow_id((s + t) % ext.order, base));
                    let expect = root(ext, -(self.degree as i64) * t as i64) * phi_s;
                    worst = worst.max((phi_ts - expect).norm());
                }
            }
        }
        worst
    }
}

/// delta: C_c(Xi, omega) -> C_c(Xi^omega | 1), [delta(f)](t, xi) = t^{-1} f(xi).
/// Defined on the kernel part only (s must vanish).
pub fn delta_embed(ext: &Extension, f: &TwistedKernel) -> Result<HomogeneousKernel> {
    if !Arc::ptr_eq(f.groupoid(), &ext.base) {
        return Err(Error::MismatchedAlgebra);
    }
    if f.unit_scalar != ZERO {
        return Err(Error::InvalidInput(
            "delta embeds the kernel part only; split off the unit scalar first".into(),
        ));
    }
    let mut values = BTreeMap::new();
    for (id, v) in f.support() {
        for t in 0..ext.order {
            values.insert(ext.arrow_id(t, id), root(ext, -(t as i64)) * v);
        }
    }
    let kernel = TwistedKernel::new(ext.groupoid.clone(), ext.trivial_cocycle(), values, ZERO)?;
    Ok(HomogeneousKernel { kernel, degree: 1 })
}

/// kappa^n: evaluation at the fiber t = 1, landing in C_c(Xi, omega^n).
pub fn kappa_n(ext: &Extension, phi: &HomogeneousKernel, n: i32) -> Result<TwistedKernel> {
    if n.unsigned_abs() >= ext.order {
        return Err(Error::Aliasing { n, order: ext.order });
    }
    if phi.degree != n {
        return Err(Error::InvalidInput(format!(
            "kappa^{} applied to a degree-{} kernel",
            n, phi.degree
        )));
    }
    let mut values = BTreeMap::new();
    for (id, v) in phi.kernel.support() {
        let (t, base) = ext.split(id);
        if t == 0 {
            values.insert(base, v);
        }
    }
    TwistedKernel::new(ext.base.clone(), ext.cocycle_power(n)?, values, ZERO)
}

/// Inverse of kappa^n: (kappa^n)^{-1}(f)(t, xi) = t^{-n} f(xi).
pub fn kappa_n_inverse(ext: &Extension, f: &TwistedKernel, n: i32) -> Result<HomogeneousKernel> {
    if n.unsigned_abs() >= ext.order {
        return Err(Error::Aliasing { n, order: ext.order });
    }
    if !Arc::ptr_eq(f.groupoid(), &ext.base) {
        return Err(Error::MismatchedAlgebra);
    }
    let mut values = BTreeMap::new();
    for (id, v) in f.support() {
        for t in 0..ext.order {
            values.insert(ext.arrow_id(t, id), root(ext, -(n as i64) * t as i64) * v);
        }
    }
    let kernel = TwistedKernel::new(ext.groupoid.clone(), ext.trivial_cocycle(), values, ZERO)?;
    Ok(HomogeneousKernel { kernel, degree: n })
}

/// chi^n: projection onto the degree-n component,
/// [chi^n(Phi)](s, xi) = mean over t in mu_N of Phi(ts, xi) t^n.
pub fn chi_n(ext: &Extension, phi: &TwistedKernel, n: i32) -> Result<HomogeneousKernel> {
    if n.unsigned_abs() >= ext.order {
        return Err(Error::Aliasing { n, order: ext.order });
    }
    if !Arc::ptr_eq(phi.groupoid(), &ext.groupoid) {
        return Err(Error::MismatchedAlgebra);
    }
    let mut values = BTreeMap::new();
    let m = ext.order;
    for base in ext.base.arrow_ids() {
        for s in 0..m {
            let mut acc = ZERO;
            for t in 0..m {
                let v = phi.value(ext.arrow_id((t + s) % m, base));
                acc += v * root(ext, n as i64 * t as i64);
            }
            acc /= m as f64;
            if acc != ZERO {
                values.insert(ext.arrow_id(s, base), acc);
            }
        }
    }
    let kernel = TwistedKernel::new(ext.groupoid.clone(), ext.trivial_cocycle(), values, ZERO)?;
    Ok(HomogeneousKernel { kernel, degree: n })
}

/// Deterministic random kernel for the verification suites: `support_size`
/// arrows drawn without replacement, complex values in the unit box.
pub fn random_kernel(
    groupoid: &Arc<FiniteGroupoid>,
    cocycle: &Arc<TwoCocycle>,
    support_size: usize,
    seed: u64,
) -> Result<TwistedKernel> {
    random_kernel_bounded(groupoid, cocycle, support_size, i64::MAX, seed)
}

/// Random kernel with label norm at most `max_norm`, so that products stay
/// inside the materialized label window of lattice groupoids.
pub fn random_kernel_bounded(
    groupoid: &Arc<FiniteGroupoid>,
    cocycle: &Arc<TwoCocycle>,
    support_size: usize,
    max_norm: i64,
    seed: u64,
) -> Result<TwistedKernel> {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<ArrowId> = groupoid
        .arrow_ids()
        .filter(|&id| match groupoid.label(id) {
            crate::groupoid::ArrowLabel::Elem(e) => match groupoid.action() {
                Some(a) => a.group.norm(e) <= max_norm,
                None => true,
            },
            _ => true,
        })
        .collect();
    ids.shuffle(&mut rng);
    ids.truncate(support_size.min(ids.len()));
    ids.sort_unstable();
    let mut values = BTreeMap::new();
    for id in ids {
        values.insert(
            id,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    TwistedKernel::new(groupoid.clone(), cocycle.clone(), values, ZERO)
}

/// Hermitian random kernel: f + f^* with a real unit scalar.
pub fn random_selfadjoint_kernel(
    groupoid: &Arc<FiniteGroupoid>,
    cocycle: &Arc<TwoCocycle>,
    support_size: usize,
    seed: u64,
) -> Result<TwistedKernel> {
    let f = random_kernel(groupoid, cocycle, support_size, seed)?;
    f.add(&involution(&f)?)
}
