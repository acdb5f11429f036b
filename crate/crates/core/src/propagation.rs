//! Functional calculus, unitary time evolution and the non-propagation
//! bounds: find boundary-neighborhood windows on which the masked energy
//! cutoff has small norm, and verify the bound is uniform in time.

use crate::eigen::{dgemm_opts, eigh_real, zgemm, zgemm_tn, BACKEND, EigenBackend};
use crate::error::{Error, Result};
use crate::rep::{OperatorMatrix, Provenance};
use ndarray::prelude::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

/// Smooth bump built from the exp(-1/x) step: 0 outside [a, b], 1 on the
/// central plateau, C-infinity in between.
#[derive(Clone, Debug)]
pub struct EnergyBump {
    pub a: f64,
    pub b: f64,
    pub plateau_fraction: f64,
}

fn smooth_step(t: f64) -> f64 {
    fn g(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    let num = g(t);
    let den = num + g(1.0 - t);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl EnergyBump {
    pub fn new(a: f64, b: f64, plateau_fraction: f64) -> Result<Self> {
        if !(a < b) || !(0.0..1.0).contains(&plateau_fraction) {
            return Err(Error::InvalidInput(format!(
                "bad bump: [{a}, {b}], plateau {plateau_fraction}"
            )));
        }
        Ok(EnergyBump { a, b, plateau_fraction })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let w = (self.b - self.a) * (1.0 - self.plateau_fraction) / 2.0;
        if w == 0.0 {
            return 1.0;
        }
        let rise = smooth_step((x - self.a) / w);
        let fall = smooth_step((self.b - x) / w);
        rise.min(1.0) * fall.min(1.0)
    }
}

enum VecKind {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// One Hermitian eigendecomposition, reused by the functional calculus, the
/// masked-norm sweeps and the time evolution.
pub struct PropagationSession {
    values: Vec<f64>,
    vectors: VecKind,
}

impl PropagationSession {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if !h.hermitian {
            return Err(Error::NotHermitian(h.provenance.description.clone()));
        }
        if h.data.iter().all(|z| z.im == 0.0) {
            let hr = h.data.mapv(|z| z.re);
            let r = eigh_real(&hr)?;
            Ok(PropagationSession { values: r.values, vectors: VecKind::Real(r.vectors) })
        } else {
            let r = BACKEND.eigh(&h.data)?;
            Ok(PropagationSession { values: r.values, vectors: VecKind::Complex(r.vectors) })
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// kappa(H) = U kappa(Lambda) U^*.
    pub fn functional_calculus(&self, kappa: &dyn Fn(f64) -> f64) -> OperatorMatrix {
        let kv: Vec<f64> = self.values.iter().map(|&l| kappa(l)).collect();
        let data = match &self.vectors {
            VecKind::Real(u) => {
                let m = self.weighted_gram_real(u, &kv);
                m.mapv(|x| Complex64::new(x, 0.0))
            }
            VecKind::Complex(u) => self.weighted_gram_complex(u, &kv),
        };
        OperatorMatrix::new(
            data,
            Provenance {
                description: format!("functional_calculus[{}]", self.dim()),
                window: self.dim(),
                boundary_clipped: false,
            },
        )
    }

    fn nonzero_columns(&self, kv: &[f64]) -> Vec<usize> {
        (0..kv.len()).filter(|&i| kv[i] != 0.0).collect()
    }

    fn weighted_gram_real(&self, u: &Array2<f64>, kv: &[f64]) -> Array2<f64> {
        let n = self.dim();
        let idx = self.nonzero_columns(kv);
        if idx.is_empty() {
            return Array2::zeros((n, n));
        }
        let mut ur = Array2::<f64>::zeros((n, idx.len()));
        let mut urk = Array2::<f64>::zeros((n, idx.len()));
        for (c, &k) in idx.iter().enumerate() {
            for i in 0..n {
                ur[[i, c]] = u[[i, k]];
                urk[[i, c]] = u[[i, k]] * kv[k];
            }
        }
        dgemm_opts(&urk, &ur, false, true)
    }

    fn weighted_gram_complex(&self, u: &Array2<Complex64>, kv: &[f64]) -> Array2<Complex64> {
        let n = self.dim();
        let idx = self.nonzero_columns(kv);
        if idx.is_empty() {
            return Array2::zeros((n, n));
        }
        let mut urk = Array2::<Complex64>::zeros((n, idx.len()));
        let mut ur_conj = Array2::<Complex64>::zeros((idx.len(), n));
        for (c, &k) in idx.iter().enumerate() {
            for i in 0..n {
                urk[[i, c]] = u[[i, k]] * kv[k];
                ur_conj[[c, i]] = u[[i, k]].conj();
            }
        }
        zgemm(&urk, &ur_conj)
    }

    /// e^{itH} u via the eigendecomposition; norm preserved.
    pub fn evolve(&self, t: f64, u: &Array1<Complex64>) -> Array1<Complex64> {
        let n = self.dim();
        assert_eq!(u.len(), n);
        match &self.vectors {
            VecKind::Real(vs) => {
                let ur = u.mapv(|z| z.re);
                let ui = u.mapv(|z| z.im);
                let cr = vs.t().dot(&ur);
                let ci = vs.t().dot(&ui);
                let mut dr = Array1::<f64>::zeros(n);
                let mut di = Array1::<f64>::zeros(n);
                for k in 0..n {
                    let (s, c) = (t * self.values[k]).sin_cos();
                    // e^{it l}(cr + i ci) = (c cr - s ci) + i(s cr + c ci)
                    dr[k] = c * cr[k] - s * ci[k];
                    di[k] = s * cr[k] + c * ci[k];
                }
                let yr = vs.dot(&dr);
                let yi = vs.dot(&di);
                Array1::from_iter((0..n).map(|i| Complex64::new(yr[i], yi[i])))
            }
            VecKind::Complex(vs) => {
                let c = vs.t().mapv(|z| z.conj()).dot(u);
                let mut d = Array1::<Complex64>::zeros(n);
                for k in 0..n {
                    d[k] = Complex64::new(0.0, t * self.values[k]).exp() * c[k];
                }
                vs.dot(&d)
            }
        }
    }
}

/// Masked-norm calculator for one bump: materializes kappa(H)^2 once and
/// evaluates ||1_W kappa(H)|| exactly as the top eigenvalue of a principal
/// submatrix (so shrinking W is monotone by interlacing).
pub struct KappaCalculus<'a> {
    session: &'a PropagationSession,
    pub kappa_values: Vec<f64>,
    k2: VecKind,
}

impl<'a> KappaCalculus<'a> {
    pub fn new(session: &'a PropagationSession, kappa: &dyn Fn(f64) -> f64) -> Self {
        let kv: Vec<f64> = session.values.iter().map(|&l| kappa(l)).collect();
        let k2v: Vec<f64> = kv.iter().map(|&k| k * k).collect();
        let k2 = match &session.vectors {
            VecKind::Real(u) => VecKind::Real(session.weighted_gram_real(u, &k2v)),
            VecKind::Complex(u) => VecKind::Complex(session.weighted_gram_complex(u, &k2v)),
        };
        KappaCalculus { session, kappa_values: kv, k2 }
    }

    pub fn sup_kappa(&self) -> f64 {
        self.kappa_values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// ||1_W kappa(H)|| = sqrt(lambda_max(kappa(H)^2 restricted to W)).
    pub fn masked_norm(&self, mask: &[bool]) -> Result<f64> {
        assert_eq!(mask.len(), self.session.dim());
        let keep: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        if keep.is_empty() {
            return Ok(0.0);
        }
        let k = keep.len();
        let top = match &self.k2 {
            VecKind::Real(m) => {
                let mut sub = Array2::<f64>::zeros((k, k));
                for (i, &pi) in keep.iter().enumerate() {
                    for (j, &pj) in keep.iter().enumerate() {
                        sub[[i, j]] = m[[pi, pj]];
                    }
                }
                crate::eigen::eigh_real_values(&sub)?.last().copied().unwrap_or(0.0)
            }
            VecKind::Complex(m) => {
                let mut sub = Array2::<Complex64>::zeros((k, k));
                for (i, &pi) in keep.iter().enumerate() {
                    for (j, &pj) in keep.iter().enumerate() {
                        sub[[i, j]] = m[[pi, pj]];
                    }
                }
                BACKEND.eigh_values(&sub)?.last().copied().unwrap_or(0.0)
            }
        };
        Ok(top.max(0.0).sqrt())
    }

    /// max over the time grid and random trial vectors of
    /// ||1_W e^{itH} kappa(H) u|| / ||u||.
    pub fn time_uniform_max(
        &self,
        mask: &[bool],
        time_grid: &[f64],
        trials: usize,
        seed: u64,
    ) -> Result<f64> {
        let n = self.session.dim();
        assert_eq!(mask.len(), n);
        if trials == 0 || time_grid.is_empty() {
            return Err(Error::Empty("time grid and trials must be nonempty".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..n).filter(|&i| self.kappa_values[i] != 0.0).collect();
        if idx.is_empty() {
            return Ok(0.0);
        }
        let r = idx.len();
        match &self.session.vectors {
            VecKind::Real(u) => {
                // trial vectors real; evolution handled by cos/sin splits
                let mut trial = Array2::<f64>::zeros((n, trials));
                let mut norms = vec![0.0f64; trials];
                for c in 0..trials {
                    let mut s = 0.0;
                    for i in 0..n {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        trial[[i, c]] = v;
                        s += v * v;
                    }
                    norms[c] = s.sqrt();
                }
                let mut ur = Array2::<f64>::zeros((n, r));
                for (c, &k) in idx.iter().enumerate() {
                    for i in 0..n {
                        ur[[i, c]] = u[[i, k]];
                    }
                }
                // coefficients kappa(l) * (U^T u) on the active eigenspace
                let mut coef = dgemm_opts(&ur, &trial, true, false);
                for (c, &k) in idx.iter().enumerate() {
                    let kv = self.kappa_values[k];
                    for j in 0..trials {
                        coef[[c, j]] *= kv;
                    }
                }
                // masked rows of U restricted to active columns
                let rows: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
                let mut um = Array2::<f64>::zeros((rows.len(), r));
                for (i, &pi) in rows.iter().enumerate() {
                    for (c, &k) in idx.iter().enumerate() {
                        um[[i, c]] = u[[pi, k]];
                    }
                }
                let mut worst = 0.0f64;
                for &t in time_grid {
                    let mut cr = coef.clone();
                    let mut ci = coef.clone();
                    for (c, &k) in idx.iter().enumerate() {
                        let (s, co) = (t * self.session.values[k]).sin_cos();
                        for j in 0..trials {
                            let v = coef[[c, j]];
                            cr[[c, j]] = co * v;
                            ci[[c, j]] = s * v;
                        }
                    }
                    let yr = dgemm_opts(&um, &cr, false, false);
                    let yi = dgemm_opts(&um, &ci, false, false);
                    for j in 0..trials {
                        let mut s = 0.0;
                        for i in 0..rows.len() {
                            s += yr[[i, j]] * yr[[i, j]] + yi[[i, j]] * yi[[i, j]];
                        }
                        worst = worst.max(s.sqrt() / norms[j]);
                    }
                }
                Ok(worst)
            }
            VecKind::Complex(u) => {
                let mut trial = Array2::<Complex64>::zeros((n, trials));
                let mut norms = vec![0.0f64; trials];
                for c in 0..trials {
                    let mut s = 0.0;
                    for i in 0..n {
                        let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        trial[[i, c]] = v;
                        s += v.norm_sqr();
                    }
                    norms[c] = s.sqrt();
                }
                let mut ur = Array2::<Complex64>::zeros((n, r));
                for (c, &k) in idx.iter().enumerate() {
                    for i in 0..n {
                        ur[[i, c]] = u[[i, k]];
                    }
                }
                let urh = ur.mapv(|z| z.conj());
                let mut coef = zgemm_tn(&urh, &trial);
                for (c, &k) in idx.iter().enumerate() {
                    let kv = self.kappa_values[k];
                    for j in 0..trials {
                        coef[[c, j]] *= kv;
                    }
                }
                let rows: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
                let mut um = Array2::<Complex64>::zeros((rows.len(), r));
                for (i, &pi) in rows.iter().enumerate() {
                    for (c, &k) in idx.iter().enumerate() {
                        um[[i, c]] = u[[pi, k]];
                    }
                }
                let mut worst = 0.0f64;
                for &t in time_grid {
                    let mut ct = coef.clone();
                    for (c, &k) in idx.iter().enumerate() {
                        let phase = Complex64::new(0.0, t * self.session.values[k]).exp();
                        for j in 0..trials {
                            ct[[c, j]] *= phase;
                        }
                    }
                    let y = zgemm(&um, &ct);
                    for j in 0..trials {
                        let mut s = 0.0;
                        for i in 0..rows.len() {
                            s += y[[i, j]].norm_sqr();
                        }
                        worst = worst.max(s.sqrt() / norms[j]);
                    }
                }
                Ok(worst)
            }
        }
    }
}

/// A boundary-neighborhood window: the mask of basis sites lying in W_0,
/// with the shrinking parameter that produced it.
#[derive(Clone, Debug)]
pub struct NeighborhoodWindow {
    pub description: String,
    pub param: i64,
    pub mask: Vec<bool>,
}

/// Result of the monotone neighborhood search.
#[derive(Clone, Debug)]
pub struct NeighborhoodSearch {
    /// Index into the family of the first window meeting the target, if any.
    pub found: Option<usize>,
    /// (param, bound) pairs in search order.
    pub profile: Vec<(i64, f64)>,
    /// True when the family was exhausted without success.
    pub inconclusive: bool,
}

/// Monotone search over the shrinking window family: first window whose
/// static bound is at most eps. Exhaustion is an inconclusive report, not a
/// failure verdict.
pub fn find_neighborhood(
    calc: &KappaCalculus,
    family: &[NeighborhoodWindow],
    eps: f64,
) -> Result<NeighborhoodSearch> {
    if family.is_empty() {
        return Err(Error::Empty("empty window family".into()));
    }
    let mut profile = Vec::new();
    for (i, w) in family.iter().enumerate() {
        let bound = calc.masked_norm(&w.mask)?;
        profile.push((w.param, bound));
        if bound <= eps {
            return Ok(NeighborhoodSearch { found: Some(i), profile, inconclusive: false });
        }
    }
    Ok(NeighborhoodSearch { found: None, profile, inconclusive: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let k = EnergyBump::new(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(k.eval(-1.5), 0.0);
        assert_eq!(k.eval(1.0), 0.0);
        assert!((k.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((k.eval(0.4) - 1.0).abs() < 1e-15); // inside plateau
        let v = k.eval(0.8);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn calculus_and_evolution_on_small_matrix() {
        use crate::rep::{OperatorMatrix, Provenance};
        let n = 24;
        let mut data = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            if i + 1 < n {
                data[[i, i + 1]] = Complex64::new(1.0, 0.0);
                data[[i + 1, i]] = Complex64::new(1.0, 0.0);
            }
        }
        let h = OperatorMatrix::new(data, Provenance::default());
        let session = PropagationSession::new(&h).unwrap();
        // kappa supported in a gap far above the spectrum gives 0
        let gap = EnergyBump::new(5.0, 6.0, 0.5).unwrap();
        let kh = session.functional_calculus(&|x| gap.eval(x));
        assert!(kh.data.iter().all(|z| z.norm() < 1e-12));
        // kappa^2 calculus homomorphism
        let k = EnergyBump::new(-1.0, 1.0, 0.5).unwrap();
        let k1 = session.functional_calculus(&|x| k.eval(x));
        let k2 = session.functional_calculus(&|x| k.eval(x) * k.eval(x));
        let prod = k1.data.dot(&k1.data);
        let diff = (&prod - &k2.data).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-10);
        // unitarity of the evolution
        let u = Array1::from_iter((0..n).map(|i| Complex64::new((i as f64).sin(), 0.3)));
        let v = session.evolve(1.7, &u);
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((nu - nv).abs() < 1e-10);
        // eigenvector picks up a phase
        let eig = crate::eigen::BACKEND.eigh(&h.data).unwrap();
        let u0 = eig.vectors.column(0).to_owned();
        let ev = session.evolve(0.9, &u0);
        let expect = u0.mapv(|z| z * Complex64::new(0.0, 0.9 * eig.values[0]).exp());
        let diff = (&ev - &expect).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-10);
    }

    #[test]
    fn static_bound_dominates_dynamic() {
        use crate::rep::{OperatorMatrix, Provenance};
        let n = 40;
        let mut data = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            if i + 1 < n {
                data[[i, i + 1]] = Complex64::new(1.0, 0.0);
                data[[i + 1, i]] = Complex64::new(1.0, 0.0);
            }
            data[[i, i]] = Complex64::new(if i >= n / 2 { 4.0 } else { 0.0 }, 0.0);
        }
        let h = OperatorMatrix::new(data, Provenance::default());
        let session = PropagationSession::new(&h).unwrap();
        let k = EnergyBump::new(-1.5, 1.5, 0.6).unwrap();
        let calc = KappaCalculus::new(&session, &|x| k.eval(x));
        let mask: Vec<bool> = (0..n).map(|i| i >= 3 * n / 4).collect();
        let stat = calc.masked_norm(&mask).unwrap();
        let dyn_max = calc
            .time_uniform_max(&mask, &[0.0, 0.5, 1.0, 5.0, 20.0], 8, 7)
            .unwrap();
        assert!(dyn_max <= stat + 1e-10, "dynamic {dyn_max} vs static {stat}");
        assert!(stat <= calc.sup_kappa() + 1e-12);
    }
}
