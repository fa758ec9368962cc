//! The overlap functional `δ(A,B) = ‖P_A P_B − P_{A∪B}‖`, quasi-factorization,
//! the projector inequality, the gap→δ bound and δ_k tables.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::certify::Schedule;
use crate::dl::{layer_schedule, InequalityCheck, INEQ_TOL};
use crate::error::{Error, Result};
use crate::lattice::{
    classify_region, decompose_in_frame, fitting_frames, level_length, CanonicalFrame, Region,
};
use crate::linalg::{self, CMat, C64};
use crate::model::LocalHamiltonian;
use crate::space::{hilbert_dim, Space};
use crate::spectral::{self, diagonalize, kernel_by_intersection, AssembledOperator};

/// Agreement required between the two expressions for δ.
pub const FORM_AGREEMENT_TOL: f64 = 1e-9;
/// `‖P_A P_{A∪B} − P_{A∪B}‖` above this refuses the computation.
pub const FF_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMethod {
    ExactNorm,
    ClosedFormPvbs,
    AnalyticBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    pub value: f64,
    pub method: DeltaMethod,
    pub a: Region,
    pub b: Region,
    /// Size of `A ∩ B` (see [`Region::overlap_size`]).
    pub overlap_size: usize,
    /// `‖(P_A − P_U)(P_B − P_U)‖`.
    pub difference_form: Option<f64>,
    /// `‖P_A P_B − P_U‖`.
    pub product_form: Option<f64>,
    pub forms_agree: Option<bool>,
    /// `max(‖P_A P_U − P_U‖, ‖P_B P_U − P_U‖)`.
    pub ff_defect: Option<f64>,
}

/// Caches ground-space bases of sub-regions (in their own tensor space).
#[derive(Debug)]
pub struct KernelCache<'a> {
    h: &'a LocalHamiltonian,
    budget: usize,
    map: HashMap<Region, CMat>,
}

impl<'a> KernelCache<'a> {
    pub fn new(h: &'a LocalHamiltonian, budget: usize) -> Self {
        KernelCache {
            h,
            budget,
            map: HashMap::new(),
        }
    }

    pub fn model(&self) -> &LocalHamiltonian {
        self.h
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn kernel(&mut self, region: &Region) -> Result<CMat> {
        if let Some(k) = self.map.get(region) {
            return Ok(k.clone());
        }
        let tol = 1e-10 * (self.h.restrict(region)?.len().max(1) as f64);
        let k = kernel_by_intersection(self.h, region, self.budget, tol)?
            .basis()
            .to_owned();
        self.map.insert(region.clone(), k.clone());
        Ok(k)
    }
}

/// Ground bases of `A`, `B` and `U = A ∪ B`, embedded in the space of `U`.
#[derive(Clone, Debug)]
pub struct OverlapSetup {
    pub a: Region,
    pub b: Region,
    pub space: Space,
    pub ea: CMat,
    pub eb: CMat,
    pub vu: CMat,
}

impl OverlapSetup {
    pub fn new(cache: &mut KernelCache, a: &Region, b: &Region) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let u = a.union(b)?;
        let space = Space::new(&u, cache.model().local_dim(), cache.budget())?;
        let ea = space.embedding(a)?.embed_columns(&cache.kernel(a)?);
        let eb = space.embedding(b)?.embed_columns(&cache.kernel(b)?);
        let vu = cache.kernel(&u)?;
        Ok(OverlapSetup {
            a: a.clone(),
            b: b.clone(),
            space,
            ea,
            eb,
            vu,
        })
    }

    pub fn union(&self) -> &Region {
        self.space.region()
    }

    /// `max(‖P_A V_U − V_U‖, ‖P_B V_U − V_U‖)`.
    pub fn ff_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for e in [&self.ea, &self.eb] {
            let proj = e * (e.adjoint() * &self.vu);
            worst = worst.max(linalg::spectral_norm(&(&proj - &self.vu))?);
        }
        Ok(worst)
    }

    pub fn projectors(&self) -> (CMat, CMat, CMat) {
        (
            linalg::projector_from_basis(&self.ea),
            linalg::projector_from_basis(&self.eb),
            linalg::projector_from_basis(&self.vu),
        )
    }
}

/// Orthonormal basis of `(1 − V V^†) E` for `E` with orthonormal columns whose
/// span contains that of `V`. The compressed Gram matrix is a projector, so its
/// eigenvalues sit at 0 or 1 and the rank cut at 1/2 is unambiguous.
fn complement_basis(e: &CMat, v: &CMat) -> Result<CMat> {
    let f = e - v * (v.adjoint() * e);
    let gram = f.adjoint() * &f;
    let gram = linalg::scaled(&(&gram + gram.adjoint()), 0.5);
    let (vals, vecs) = linalg::hermitian_eigen(&gram)?;
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    let cols: Vec<Vec<C64>> = keep
        .iter()
        .map(|&i| {
            let y = linalg::column(&vecs, i);
            linalg::mat_vec(&f, &y)
        })
        .collect();
    let ortho = linalg::orthonormalize(&cols, 1e-6);
    Ok(linalg::from_columns(f.nrows(), &ortho))
}

/// Both expressions for `δ(A,B)` from precomputed ground bases.
pub fn delta_from_setup(setup: &OverlapSetup) -> Result<DeltaEstimate> {
    if setup.vu.ncols() == 0 {
        return Err(Error::NotFrustrationFree(format!(
            "H on {:?} has no zero-energy state",
            setup.union()
        )));
    }
    let ff = setup.ff_defect()?;
    if ff > FF_TOL {
        return Err(Error::NotFrustrationFree(format!(
            "‖P_A P_U − P_U‖ = {ff:.3e} exceeds {FF_TOL:.0e}"
        )));
    }
    let qa = complement_basis(&setup.ea, &setup.vu)?;
    let qb = complement_basis(&setup.eb, &setup.vu)?;
    let difference_form = if qa.ncols() == 0 || qb.ncols() == 0 {
        0.0
    } else {
        linalg::spectral_norm(&(qa.adjoint() * &qb))?
    };
    // P_A P_B − P_U maps range(E_B) into range(E_A) and vanishes elsewhere.
    let cross = setup.ea.adjoint() * &setup.eb;
    let au = setup.ea.adjoint() * &setup.vu;
    let ub = setup.vu.adjoint() * &setup.eb;
    let product_form = linalg::spectral_norm(&(cross - au * ub))?;
    let overlap_size = setup.a.intersection(&setup.b)?.overlap_size();
    Ok(DeltaEstimate {
        value: difference_form,
        method: DeltaMethod::ExactNorm,
        a: setup.a.clone(),
        b: setup.b.clone(),
        overlap_size,
        difference_form: Some(difference_form),
        product_form: Some(product_form),
        forms_agree: Some((difference_form - product_form).abs() <= FORM_AGREEMENT_TOL),
        ff_defect: Some(ff),
    })
}

/// Relative cut for the supports of the ground spaces on `A∖B` and `B∖A`.
const SUPPORT_TOL: f64 = 1e-13;

/// `δ(A,B)` data in reduced coordinates.
///
/// Write `L = A∖B`, `C = A∩B`, `R = B∖A`, `E_A = R_A ⊗ 1_R`, `E_B = 1_L ⊗ R_B`.
/// `P_A P_B − P_U` vanishes off `S_L ⊗ H_C ⊗ S_R`, where `S_L` (`S_R`) is the
/// support of `ker H_A` on `L` (of `ker H_B` on `R`). On that subspace the
/// ranges of `P_A` and `P_B` have orthonormal bases `R_A ⊗ W_R` and `W_L ⊗ R_B`,
/// indexed by `(α, ρ)` and `(λ, β)`.
#[derive(Clone, Debug)]
pub struct CompressedOverlap {
    /// `(R_A ⊗ W_R)^† (W_L ⊗ R_B)`.
    pub cross: CMat,
    /// `(R_A ⊗ W_R)^† V_U`.
    pub ma: CMat,
    /// `(W_L ⊗ R_B)^† V_U`.
    pub mb: CMat,
    /// `max(‖V_U − P_A V_U‖, ‖V_U − P_B V_U‖)`.
    pub ff_defect: f64,
}

/// For each basis index of `sub`, its indices in the spaces of `first` and
/// `second`, which partition `sub`.
fn split_index(sub: &Region, first: &Region, second: &Region, d: usize) -> Vec<(usize, usize)> {
    let place = |part: &Region| -> Vec<usize> {
        let n = part.len();
        sub.sites()
            .map(|x| part.position(x).map_or(0, |p| d.pow((n - 1 - p) as u32)))
            .collect()
    };
    let (w1, w2) = (place(first), place(second));
    let n = sub.len();
    let mut digits = vec![0usize; n];
    let total = d.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for x in 0..total {
        if x > 0 {
            let mut p = n;
            loop {
                p -= 1;
                digits[p] += 1;
                if digits[p] < d {
                    break;
                }
                digits[p] = 0;
            }
        }
        let (mut i1, mut i2) = (0, 0);
        for (p, &v) in digits.iter().enumerate() {
            i1 += v * w1[p];
            i2 += v * w2[p];
        }
        out.push((i1, i2));
    }
    out
}

pub fn compress_overlap(cache: &mut KernelCache, a: &Region, b: &Region) -> Result<CompressedOverlap> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let u = a.union(b)?;
    let d = cache.model().local_dim();
    hilbert_dim(d, u.len(), cache.budget())?;
    let ra = cache.kernel(a)?;
    let rb = cache.kernel(b)?;
    let vu = cache.kernel(&u)?;
    let (ka, kb, ku) = (ra.ncols(), rb.ncols(), vu.ncols());
    let l_reg = a.difference(b)?;
    let c_reg = a.intersection(b)?;
    let r_reg = b.difference(a)?;
    let (dl, dc, dr) = (
        d.pow(l_reg.len() as u32),
        d.pow(c_reg.len() as u32),
        d.pow(r_reg.len() as u32),
    );
    let a_idx = split_index(a, &l_reg, &c_reg, d);
    let b_idx = split_index(b, &c_reg, &r_reg, d);
    let u_idx = split_index(&u, a, &r_reg, d);
    let u_idx_b = split_index(&u, &l_reg, b, d);

    // Supports on L and R.
    let mut y_l = CMat::zeros(dl, dc * ka);
    for (ia, &(l, c)) in a_idx.iter().enumerate() {
        for al in 0..ka {
            y_l[(l, c * ka + al)] = ra[(ia, al)];
        }
    }
    let mut y_r = CMat::zeros(dr, dc * kb);
    for (ib, &(c, r)) in b_idx.iter().enumerate() {
        for be in 0..kb {
            y_r[(r, c * kb + be)] = rb[(ib, be)];
        }
    }
    let w_l = linalg::range_basis(&y_l, SUPPORT_TOL)?;
    let w_r = linalg::range_basis(&y_r, SUPPORT_TOL)?;
    let (sl, sr) = (w_l.ncols(), w_r.ncols());

    // cross = Σ_c Ã_c ⊗ B̃_c with Ã_c[α,λ] = Σ_l conj(R_A[(l,c),α]) W_L[l,λ]
    // and B̃_c[ρ,β] = Σ_r conj(W_R[r,ρ]) R_B[(c,r),β].
    let mut at = vec![CMat::zeros(ka, sl); dc];
    for (ia, &(l, c)) in a_idx.iter().enumerate() {
        for al in 0..ka {
            let x = ra[(ia, al)].conj();
            for la in 0..sl {
                at[c][(al, la)] += x * w_l[(l, la)];
            }
        }
    }
    let mut bt = vec![CMat::zeros(sr, kb); dc];
    for (ib, &(c, r)) in b_idx.iter().enumerate() {
        for rho in 0..sr {
            let x = w_r[(r, rho)].conj();
            for be in 0..kb {
                bt[c][(rho, be)] += x * rb[(ib, be)];
            }
        }
    }
    let mut cross = CMat::zeros(ka * sr, sl * kb);
    for c in 0..dc {
        for al in 0..ka {
            for rho in 0..sr {
                for la in 0..sl {
                    let x = at[c][(al, la)];
                    for be in 0..kb {
                        cross[(al * sr + rho, la * kb + be)] += x * bt[c][(rho, be)];
                    }
                }
            }
        }
    }

    // Full-width E_A^† V_U and E_B^† V_U, indexed by (α, r) and (l, β).
    let mut ma_full = CMat::zeros(ka * dr, ku);
    let mut mb_full = CMat::zeros(dl * kb, ku);
    for x in 0..vu.nrows() {
        let (ia, ir) = u_idx[x];
        let (il, ib) = u_idx_b[x];
        for al in 0..ka {
            let ca = ra[(ia, al)].conj();
            for w in 0..ku {
                ma_full[(al * dr + ir, w)] += ca * vu[(x, w)];
            }
        }
        for be in 0..kb {
            let cb = rb[(ib, be)].conj();
            for w in 0..ku {
                mb_full[(il * kb + be, w)] += cb * vu[(x, w)];
            }
        }
    }

    // Residuals V_U − E_A M_A and V_U − E_B M_B, formed entrywise so that the
    // defect is not lost to cancellation in a Gram matrix.
    let mut gram_a = CMat::zeros(ku, ku);
    let mut gram_b = CMat::zeros(ku, ku);
    let mut res_a = vec![C64::new(0.0, 0.0); ku];
    let mut res_b = vec![C64::new(0.0, 0.0); ku];
    for x in 0..vu.nrows() {
        let (ia, ir) = u_idx[x];
        let (il, ib) = u_idx_b[x];
        for w in 0..ku {
            let mut pa = C64::new(0.0, 0.0);
            for al in 0..ka {
                pa += ra[(ia, al)] * ma_full[(al * dr + ir, w)];
            }
            let mut pb = C64::new(0.0, 0.0);
            for be in 0..kb {
                pb += rb[(ib, be)] * mb_full[(il * kb + be, w)];
            }
            res_a[w] = vu[(x, w)] - pa;
            res_b[w] = vu[(x, w)] - pb;
        }
        for i in 0..ku {
            for j in 0..ku {
                gram_a[(i, j)] += res_a[i].conj() * res_a[j];
                gram_b[(i, j)] += res_b[i].conj() * res_b[j];
            }
        }
    }
    let top = |g: &CMat| -> Result<f64> {
        let g = linalg::scaled(&(g + g.adjoint()), 0.5);
        Ok(linalg::hermitian_eigenvalues(&g)?
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt())
    };
    let ff_defect = top(&gram_a)?.max(top(&gram_b)?);

    let ma = CMat::from_fn(ka * sr, ku, |row, w| {
        let (al, rho) = (row / sr, row % sr);
        (0..dr)
            .map(|r| w_r[(r, rho)].conj() * ma_full[(al * dr + r, w)])
            .sum::<C64>()
    });
    let mb = CMat::from_fn(sl * kb, ku, |row, w| {
        let (la, be) = (row / kb, row % kb);
        (0..dl)
            .map(|l| w_l[(l, la)].conj() * mb_full[(l * kb + be, w)])
            .sum::<C64>()
    });
    Ok(CompressedOverlap {
        cross,
        ma,
        mb,
        ff_defect,
    })
}

/// Operator norm: dense SVD up to the dense threshold, power iteration above.
fn operator_norm(m: &CMat) -> Result<f64> {
    if m.nrows().max(m.ncols()) <= spectral::DENSE_THRESHOLD {
        return linalg::spectral_norm(m);
    }
    Ok(linalg::power_norm(
        m.ncols(),
        |v| linalg::mat_vec(m, v),
        |v| linalg::adjoint_mat_vec(m, v),
        0,
        1e-10,
    ))
}

/// `δ(A,B)` from the reduced cross matrix; both forms are evaluated.
pub fn delta_cached(cache: &mut KernelCache, a: &Region, b: &Region) -> Result<DeltaEstimate> {
    let c = compress_overlap(cache, a, b)?;
    if c.ma.ncols() == 0 {
        return Err(Error::NotFrustrationFree(format!(
            "H on the union of {a:?} and {b:?} has no zero-energy state"
        )));
    }
    let ff = c.ff_defect;
    if ff > FF_TOL {
        return Err(Error::NotFrustrationFree(format!(
            "‖P_A P_U − P_U‖ = {ff:.3e} exceeds {FF_TOL:.0e}"
        )));
    }
    // (1 − M_A M_A^†) X (1 − M_B M_B^†)
    let left = &c.cross - &c.ma * (c.ma.adjoint() * &c.cross);
    let diff = &left - (&left * &c.mb) * c.mb.adjoint();
    let difference_form = operator_norm(&diff)?;
    let product_form = operator_norm(&(&c.cross - &c.ma * c.mb.adjoint()))?;
    Ok(DeltaEstimate {
        value: difference_form,
        method: DeltaMethod::ExactNorm,
        a: a.clone(),
        b: b.clone(),
        overlap_size: a.intersection(b)?.overlap_size(),
        difference_form: Some(difference_form),
        product_form: Some(product_form),
        forms_agree: Some((difference_form - product_form).abs() <= FORM_AGREEMENT_TOL),
        ff_defect: Some(ff),
    })
}

/// `δ(A,B)` by exact norms, using the ground spaces of `A`, `B` and `A ∪ B`.
pub fn delta_exact(h: &LocalHamiltonian, a: &Region, b: &Region, budget: usize) -> Result<DeltaEstimate> {
    let mut cache = KernelCache::new(h, budget);
    delta_cached(&mut cache, a, b)
}

/// Result of a check of the form `min eig(T) >= −tol`.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorCheck {
    pub name: String,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OperatorCheck {
    fn new(name: &str, min_eigenvalue: f64) -> Self {
        OperatorCheck {
            name: name.into(),
            min_eigenvalue,
            tolerance: INEQ_TOL,
            passed: min_eigenvalue >= -INEQ_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectorInequalityReport {
    /// `1 − P − Q + {P,Q} ⪰ 0`.
    pub lower: OperatorCheck,
    /// `{P^⊥,Q^⊥} − (1 − P − Q) ⪰ 0`.
    pub upper: OperatorCheck,
    pub passed: bool,
}

fn check_projector(p: &CMat, name: &str) -> Result<()> {
    let herm = linalg::hermiticity_defect(p)?;
    let idem = linalg::idempotency_defect(p)?;
    if herm > 1e-10 || idem > 1e-10 {
        return Err(Error::NotProjector(format!(
            "{name}: ‖P − P†‖ = {herm:.2e}, ‖P² − P‖ = {idem:.2e}"
        )));
    }
    Ok(())
}

/// `−{P,Q} ⪯ 1 − P − Q ⪯ {P^⊥,Q^⊥}` by dense eigenvalues.
pub fn verify_projector_inequality(p: &CMat, q: &CMat) -> Result<ProjectorInequalityReport> {
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            found: q.nrows(),
        });
    }
    check_projector(p, "P")?;
    check_projector(q, "Q")?;
    let n = p.nrows();
    let id = linalg::identity(n);
    let anti = |x: &CMat, y: &CMat| x * y + y * x;
    let middle = &id - p - q;
    let lower_op = &middle + anti(p, q);
    let pp = &id - p;
    let qp = &id - q;
    let upper_op = anti(&pp, &qp) - &middle;
    let min_eig = |m: &CMat| -> Result<f64> {
        let h = linalg::scaled(&(m + m.adjoint()), 0.5);
        Ok(linalg::hermitian_eigenvalues(&h)?.first().copied().unwrap_or(0.0))
    };
    let lower = OperatorCheck::new("anticommutator_lower", min_eig(&lower_op)?);
    let upper = OperatorCheck::new("anticommutator_upper", min_eig(&upper_op)?);
    let passed = lower.passed && upper.passed;
    Ok(ProjectorInequalityReport {
        lower,
        upper,
        passed,
    })
}

/// Uniformly random rank-`k` orthogonal projection on `C^n`.
pub fn random_projector<R: rand::Rng>(n: usize, k: usize, rng: &mut R) -> CMat {
    let cols: Vec<Vec<C64>> = (0..k).map(|_| linalg::random_state(n, rng)).collect();
    let basis = linalg::orthonormalize(&cols, 1e-10);
    linalg::projector_from_basis(&linalg::from_columns(n, &basis))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiFactorizationReport {
    pub delta: f64,
    /// `c = 1 − 2δ`.
    pub c: f64,
    /// Minimum eigenvalue of `P_A^⊥ + P_B^⊥ − c P_U^⊥`.
    pub min_eigenvalue: f64,
    pub operator_check: OperatorCheck,
    pub sampled: Option<InequalityCheck>,
    /// `c <= 0`: the inequality holds trivially.
    pub vacuous: bool,
    pub passed: bool,
}

/// Largest eigenvalue of `Σ_i s_i W_i W_i^†` through the Gram matrix of `[W_1 … W_m]`.
fn max_eig_of_weighted_sum(blocks: &[(&CMat, f64)], n: usize) -> Result<f64> {
    let widths: Vec<usize> = blocks.iter().map(|b| b.0.ncols()).collect();
    let m: usize = widths.iter().sum();
    if m == 0 {
        return Ok(0.0);
    }
    let mut w = CMat::zeros(n, m);
    let mut weights = Vec::with_capacity(m);
    let mut c = 0;
    for (block, s) in blocks {
        for j in 0..block.ncols() {
            for i in 0..n {
                w[(i, c)] = block[(i, j)];
            }
            weights.push(*s);
            c += 1;
        }
    }
    let gram = w.adjoint() * &w;
    let gram = linalg::scaled(&(&gram + gram.adjoint()), 0.5);
    let (g, v) = linalg::hermitian_eigen(&gram)?;
    let gmax = g.last().copied().unwrap_or(0.0).max(0.0);
    let sqrt_g: Vec<f64> = g
        .iter()
        .map(|&x| if x > 1e-12 * gmax { x.sqrt() } else { 0.0 })
        .collect();
    let vs = CMat::from_fn(m, m, |i, k| v[(i, k)] * sqrt_g[k]);
    let root = &vs * v.adjoint();
    let weighted = CMat::from_fn(m, m, |i, j| root[(i, j)] * weights[j]);
    let core = &weighted * &root;
    let core = linalg::scaled(&(&core + core.adjoint()), 0.5);
    Ok(linalg::hermitian_eigenvalues(&core)?
        .last()
        .copied()
        .unwrap_or(0.0))
}

fn qf_report(delta: f64, min_eigenvalue: f64, sampled: Option<InequalityCheck>) -> QuasiFactorizationReport {
    let c = 1.0 - 2.0 * delta;
    let operator_check = OperatorCheck::new("quasi_factorization", min_eigenvalue);
    let passed = operator_check.passed && sampled.as_ref().map(|s| s.passed).unwrap_or(true);
    QuasiFactorizationReport {
        delta,
        c,
        min_eigenvalue,
        operator_check,
        sampled,
        vacuous: c <= 0.0,
        passed,
    }
}

/// `(1 − 2δ) P_U^⊥ ⪯ P_A^⊥ + P_B^⊥` for `U = A ∪ B`.
pub fn verify_quasi_factorization(
    h: &LocalHamiltonian,
    a: &Region,
    b: &Region,
    budget: usize,
    samples: usize,
    seed: u64,
) -> Result<QuasiFactorizationReport> {
    let mut cache = KernelCache::new(h, budget);
    let setup = OverlapSetup::new(&mut cache, a, b)?;
    let delta = delta_from_setup(&setup)?.value;
    let c = 1.0 - 2.0 * delta;
    let n = setup.space.dim();
    // P_A^⊥ + P_B^⊥ − c P_U^⊥ = (2 − c) − (P_A + P_B − c P_U), and the bracket
    // is positive semidefinite with support in span(E_A, E_B).
    let top = max_eig_of_weighted_sum(&[(&setup.ea, 1.0), (&setup.eb, 1.0), (&setup.vu, -c)], n)?;
    let min_eigenvalue = (2.0 - c) - top.max(0.0);

    let mut check = InequalityCheck::new("quasi_factorization_sampled", INEQ_TOL);
    let mut rng = linalg::seeded_rng(seed);
    let perp_sq = |e: &CMat, phi: &[C64]| {
        linalg::norm_sqr(phi) - linalg::norm_sqr(&linalg::adjoint_mat_vec(e, phi))
    };
    for i in 0..samples {
        let phi = linalg::random_state(n, &mut rng);
        let lhs = c * perp_sq(&setup.vu, &phi);
        let rhs = perp_sq(&setup.ea, &phi) + perp_sq(&setup.eb, &phi);
        check.record(i, rhs - lhs);
    }
    Ok(qf_report(delta, min_eigenvalue, (samples > 0).then_some(check)))
}

/// Quasi-factorization for explicit dense projectors, with `δ = ‖P_A P_B − P_U‖`.
pub fn quasi_factorization_dense(pa: &CMat, pb: &CMat, pu: &CMat) -> Result<QuasiFactorizationReport> {
    for (p, name) in [(pa, "P_A"), (pb, "P_B"), (pu, "P_U")] {
        check_projector(p, name)?;
    }
    let delta = linalg::spectral_norm(&(pa * pb - pu))?;
    let c = 1.0 - 2.0 * delta;
    let id = linalg::identity(pa.nrows());
    let op = (&id - pa) + (&id - pb) - linalg::scaled(&(&id - pu), c);
    let op = linalg::scaled(&(&op + op.adjoint()), 0.5);
    let min = linalg::hermitian_eigenvalues(&op)?.first().copied().unwrap_or(0.0);
    Ok(qf_report(delta, min, None))
}

#[derive(Clone, Debug, Serialize)]
pub struct GapDeltaReport {
    pub delta: DeltaEstimate,
    pub gap: f64,
    pub g: usize,
    /// `dist(U∖A, U∖B)`.
    pub l: f64,
    /// `(1 + λ/g²)^{−l/2}`.
    pub bound: f64,
    /// The same bound with `l` replaced by the overlap size.
    pub bound_overlap_size: f64,
    pub check: InequalityCheck,
    pub passed: bool,
}

/// `δ(A,B) <= (1 + λ_U/g²)^{−l/2}` with `U = A ∪ B` and `l = dist(U∖A, U∖B)`.
pub fn verify_gap_to_delta(
    h: &LocalHamiltonian,
    a: &Region,
    b: &Region,
    budget: usize,
) -> Result<GapDeltaReport> {
    let u = a.union(b)?;
    let l = u.difference(a)?.dist(&u.difference(b)?)?;
    if !(l >= 1.0) || l.is_infinite() {
        return Err(Error::InvalidRegion(format!(
            "dist(U∖A, U∖B) = {l} must be a finite number >= 1"
        )));
    }
    let op = AssembledOperator::assemble(h, &u, budget)?;
    let gap = diagonalize(&op, None)?.gap();
    let g = layer_schedule(op.terms()).g.max(1);
    gap_to_delta_with_gap(h, a, b, gap, g, budget)
}

/// [`verify_gap_to_delta`] with `λ_U` and `g` already known, for sweeps over
/// many splits of one region.
pub fn gap_to_delta_with_gap(
    h: &LocalHamiltonian,
    a: &Region,
    b: &Region,
    gap: f64,
    g: usize,
    budget: usize,
) -> Result<GapDeltaReport> {
    let u = a.union(b)?;
    let l = u.difference(a)?.dist(&u.difference(b)?)?;
    if !(l >= 1.0) || l.is_infinite() {
        return Err(Error::InvalidRegion(format!(
            "dist(U∖A, U∖B) = {l} must be a finite number >= 1"
        )));
    }
    let g = g.max(1);
    let delta = delta_exact(h, a, b, budget)?;
    let eps = spectral::epsilon(gap, g);
    let bound = eps.powf(l);
    let bound_overlap_size = eps.powf(delta.overlap_size as f64);
    let check = InequalityCheck::single("gap_to_delta", INEQ_TOL, bound - delta.value);
    Ok(GapDeltaReport {
        passed: check.passed,
        delta,
        gap,
        g,
        l,
        bound,
        bound_overlap_size,
        check,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDelta {
    pub index: usize,
    pub frame: Vec<usize>,
    pub overlap_width: usize,
    pub delta: f64,
    pub method: DeltaMethod,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRow {
    pub k: usize,
    pub l_k: f64,
    pub s_k: usize,
    /// Whether `s_k` is the schedule's value and `s_k <= l_k/8`. Otherwise the
    /// level uses `max(1, min(s(k), ⌊l_k/8⌋))` and the distance guarantee may fail.
    pub s_admissible: bool,
    pub region: Region,
    pub pairs: Vec<PairDelta>,
    pub delta_k: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaTable {
    pub rows: Vec<DeltaRow>,
    /// First level skipped because `d^|Λ_k|` exceeded the budget.
    pub truncated_at: Option<usize>,
    /// Levels without a usable decomposition, with the reason.
    pub skipped: Vec<(usize, String)>,
    pub budget: usize,
}

impl DeltaTable {
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta_k).collect()
    }
}

/// The maximal box `[0, ⌊l_{k+1}⌋] × … × [0, ⌊l_{k+D}⌋]`.
pub fn maximal_region(k: usize, dim: usize) -> Result<Region> {
    let hi: Vec<i64> = (1..=dim)
        .map(|j| level_length((k + j) as i64, dim).floor() as i64)
        .collect();
    Region::cuboid(&vec![0; dim], &hi)
}

/// δ_k for `k = 1..=k_max` over the canonical decomposition of the maximal box.
pub fn delta_k_table(
    h: &LocalHamiltonian,
    k_max: usize,
    schedule: &Schedule,
    budget: usize,
    enumerate_frames: bool,
) -> Result<DeltaTable> {
    let dim = h.dim();
    let mut cache = KernelCache::new(h, budget);
    let mut rows = Vec::new();
    let mut truncated_at = None;
    let mut skipped = Vec::new();
    for k in 1..=k_max {
        let region = maximal_region(k, dim)?;
        if hilbert_dim(h.local_dim(), region.len(), budget).is_err() {
            truncated_at = Some(k);
            break;
        }
        if classify_region(&region)? != k {
            skipped.push((k, "maximal box does not lie in F_k∖F_{k−1}".into()));
            continue;
        }
        let l_k = level_length(k as i64, dim);
        let wanted = schedule.s(k, dim);
        let s_k = wanted.min((l_k / 8.0).floor() as usize).max(1);
        let frames: Vec<CanonicalFrame> = if enumerate_frames {
            fitting_frames(&region, k)?
        } else {
            vec![CanonicalFrame::of(&region)?]
        };
        let mut pairs = Vec::new();
        for frame in &frames {
            let dec = match decompose_in_frame(&region, k, s_k, frame) {
                Ok(d) => d,
                Err(Error::Decomposition(_)) => continue,
                Err(e) => return Err(e),
            };
            for (i, (a, b)) in dec.pairs.iter().enumerate() {
                let est = delta_cached(&mut cache, a, b)?;
                pairs.push(PairDelta {
                    index: i + 1,
                    frame: frame.perm.clone(),
                    overlap_width: est.overlap_size,
                    delta: est.value,
                    method: est.method,
                });
            }
        }
        if pairs.is_empty() {
            skipped.push((k, format!("no {s_k}-decomposition of the maximal box")));
            continue;
        }
        let delta_k = pairs.iter().map(|p| p.delta).fold(0.0, f64::max);
        rows.push(DeltaRow {
            k,
            l_k,
            s_k,
            s_admissible: s_k == wanted && s_k as f64 <= l_k / 8.0,
            region,
            pairs,
            delta_k,
        });
    }
    Ok(DeltaTable {
        rows,
        truncated_at,
        skipped,
        budget,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapCurvePoint {
    /// The overlap `[n−d, n]` has `d + 1` sites.
    pub d: usize,
    pub delta: f64,
    pub argmax_n: usize,
    pub argmax_m: usize,
    pub pairs: usize,
}

/// `δ(d) = sup δ([0,n], [n−d, n−d+m])` over `d < n, m <= 24√3 d^{3/2}` with at
/// most `max_sites` sites in the union, for a 1D model.
pub fn restricted_delta_curve(
    h: &LocalHamiltonian,
    d_max: usize,
    max_sites: usize,
    budget: usize,
) -> Result<Vec<OverlapCurvePoint>> {
    if h.dim() != 1 {
        return Err(Error::InvalidParameter("the overlap curve is defined for 1D models".into()));
    }
    let mut cache = KernelCache::new(h, budget);
    let mut out = Vec::new();
    for d in 1..=d_max {
        let cap = (24.0 * 3f64.sqrt() * (d as f64).powf(1.5)).floor() as usize;
        let mut best = (f64::NEG_INFINITY, 0, 0);
        let mut count = 0;
        for n in d + 1..=cap {
            for m in d + 1..=cap {
                if n - d + m + 1 > max_sites {
                    break;
                }
                let a = Region::interval(0, n as i64);
                let b = Region::interval((n - d) as i64, (n - d + m) as i64);
                let v = delta_cached(&mut cache, &a, &b)?.value;
                count += 1;
                if v > best.0 {
                    best = (v, n, m);
                }
            }
        }
        if count == 0 {
            break;
        }
        out.push(OverlapCurvePoint {
            d,
            delta: best.0,
            argmax_n: best.1,
            argmax_m: best.2,
            pairs: count,
        });
    }
    Ok(out)
}

/// Summary statistics for a family of δ estimates, keyed by name.
pub fn summarize(estimates: &[DeltaEstimate]) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let max = estimates.iter().map(|e| e.value).fold(0.0, f64::max);
    let worst_gap = estimates
        .iter()
        .filter_map(|e| Some((e.difference_form? - e.product_form?).abs()))
        .fold(0.0, f64::max);
    m.insert("max_delta".into(), max);
    m.insert("max_form_disagreement".into(), worst_gap);
    m
}
