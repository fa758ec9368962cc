//! Assembly of `H_Λ`, ground projectors, spectral gaps and the functionals
//! `Var(φ)` and `E(φ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{self, CMat, C64, ZERO};
use crate::model::{InteractionTerm, LocalHamiltonian};
use crate::space::{Embedding, Space};

/// Largest dimension assembled as a dense matrix.
pub const DENSE_THRESHOLD: usize = 4096;

/// Residual required of every eigenpair returned by the iterative solver.
pub const LANCZOS_RESIDUAL: f64 = 1e-9;

const LANCZOS_SEED: u64 = 0x6a09_e667_f3bc_c908;
const LANCZOS_MAX_RESTARTS: usize = 400;

/// `H_Λ` on `(C^d)^{⊗Λ}`: dense below [`DENSE_THRESHOLD`], otherwise only a matvec.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    space: Space,
    terms: Vec<InteractionTerm>,
    embeddings: Vec<Embedding>,
    dense: Option<CMat>,
}

impl AssembledOperator {
    pub fn assemble(h: &LocalHamiltonian, region: &Region, budget: usize) -> Result<Self> {
        Self::assemble_with_threshold(h, region, budget, DENSE_THRESHOLD)
    }

    pub fn assemble_with_threshold(
        h: &LocalHamiltonian,
        region: &Region,
        budget: usize,
        dense_threshold: usize,
    ) -> Result<Self> {
        let space = Space::new(region, h.local_dim(), budget)?;
        let terms = h.restrict(region)?;
        let embeddings = terms
            .iter()
            .map(|t| space.embedding(&t.support))
            .collect::<Result<Vec<_>>>()?;
        let mut op = AssembledOperator {
            space,
            terms,
            embeddings,
            dense: None,
        };
        if op.dim() <= dense_threshold {
            op.dense = Some(op.build_dense());
        }
        Ok(op)
    }

    fn build_dense(&self) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (t, e) in self.terms.iter().zip(&self.embeddings) {
            for &base in &e.rest {
                for (i, &oi) in e.local.iter().enumerate() {
                    for (j, &oj) in e.local.iter().enumerate() {
                        m[(base + oi, base + oj)] += t.matrix[(i, j)];
                    }
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn region(&self) -> &Region {
        self.space.region()
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn matrix(&self) -> Option<&CMat> {
        self.dense.as_ref()
    }

    /// The dense matrix, building it if the operator is implicit.
    pub fn to_dense(&self) -> CMat {
        match &self.dense {
            Some(m) => m.clone(),
            None => self.build_dense(),
        }
    }

    /// `H_Λ v`, always through the term-by-term product.
    pub fn apply_terms(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (t, e) in self.terms.iter().zip(&self.embeddings) {
            e.add_apply(&t.matrix, v, &mut out);
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match &self.dense {
            Some(m) => linalg::mat_vec(m, v),
            None => self.apply_terms(v),
        }
    }

    /// `10^-10 · max(1, #terms)`; the term count bounds `‖H_Λ‖`.
    pub fn default_tol(&self) -> f64 {
        1e-10 * (self.terms.len().max(1) as f64)
    }
}

/// Orthonormal basis of `ker H_Λ`.
#[derive(Clone, Debug)]
pub struct GroundProjector {
    basis: CMat,
    region: Region,
    tol_used: f64,
}

impl GroundProjector {
    pub fn new(basis: CMat, region: Region, tol_used: f64) -> Self {
        GroundProjector {
            basis,
            region,
            tol_used,
        }
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn tol_used(&self) -> f64 {
        self.tol_used
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn degeneracy(&self) -> usize {
        self.basis.ncols()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let c = linalg::adjoint_mat_vec(&self.basis, v);
        linalg::mat_vec(&self.basis, &c)
    }

    /// `P^⊥ v = v - P v`.
    pub fn apply_complement(&self, v: &[C64]) -> Vec<C64> {
        linalg::sub_vec(v, &self.apply(v))
    }

    /// Dense `P = B B^†`.
    pub fn projector(&self) -> CMat {
        linalg::projector_from_basis(&self.basis)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Smallest eigenvalue at or above the kernel tolerance (`+inf` if none).
    pub gap: f64,
    pub ground_degeneracy: usize,
    pub lowest_eigenvalue: f64,
    pub tol: f64,
    pub dim: usize,
    pub method: &'static str,
    /// `(1 + λ/g²)^{-1/2}` once a layer count is supplied.
    pub epsilon: Option<f64>,
    pub g: Option<usize>,
}

impl SpectralReport {
    pub fn with_layers(mut self, g: usize) -> Self {
        self.epsilon = Some(epsilon(self.gap, g));
        self.g = Some(g);
        self
    }
}

/// `ε = (1 + λ/g²)^{-1/2}`.
pub fn epsilon(gap: f64, g: usize) -> f64 {
    if gap.is_infinite() {
        return 0.0;
    }
    (1.0 + gap / (g * g) as f64).powf(-0.5)
}

/// Ground projector, spectral report and, for dense operators, the full
/// eigendecomposition.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub ground: GroundProjector,
    pub report: SpectralReport,
    pub eigenvalues: Option<Vec<f64>>,
    pub eigenvectors: Option<CMat>,
}

impl Spectrum {
    pub fn gap(&self) -> f64 {
        self.report.gap
    }
}

/// Diagonalizes `op` with kernel tolerance `tol` (default [`AssembledOperator::default_tol`]).
pub fn diagonalize(op: &AssembledOperator, tol: Option<f64>) -> Result<Spectrum> {
    let tol = tol.unwrap_or_else(|| op.default_tol());
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel tolerance {tol} must be positive")));
    }
    match op.matrix() {
        Some(m) => dense_spectrum(op, m, tol),
        None => lanczos_spectrum(op, tol),
    }
}

fn check_ambiguous(values: &[f64], tol: f64) -> Result<()> {
    if let Some(&e) = values.iter().find(|&&e| e >= tol / 10.0 && e <= tol) {
        return Err(Error::AmbiguousKernel { eigenvalue: e, tol });
    }
    Ok(())
}

fn dense_spectrum(op: &AssembledOperator, m: &CMat, tol: f64) -> Result<Spectrum> {
    let (values, vecs) = linalg::hermitian_eigen(m)?;
    check_ambiguous(&values, tol)?;
    let kernel = values.iter().take_while(|&&e| e < tol).count();
    let gap = values.get(kernel).copied().unwrap_or(f64::INFINITY);
    let basis = vecs.subcols(0, kernel).to_owned();
    Ok(Spectrum {
        ground: GroundProjector::new(basis, op.region().clone(), tol),
        report: SpectralReport {
            gap,
            ground_degeneracy: kernel,
            lowest_eigenvalue: values[0],
            tol,
            dim: op.dim(),
            method: "dense",
            epsilon: None,
            g: None,
        },
        eigenvalues: Some(values),
        eigenvectors: Some(vecs),
    })
}

fn lanczos_spectrum(op: &AssembledOperator, tol: f64) -> Result<Spectrum> {
    let pairs = lowest_eigenpairs_until(|v| op.apply(v), op.dim(), tol)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    check_ambiguous(&values, tol)?;
    let kernel: Vec<Vec<C64>> = pairs
        .iter()
        .filter(|p| p.0 < tol)
        .map(|p| p.1.clone())
        .collect();
    let gap = values
        .iter()
        .copied()
        .filter(|&e| e >= tol)
        .fold(f64::INFINITY, f64::min);
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let basis = linalg::from_columns(op.dim(), &kernel);
    Ok(Spectrum {
        ground: GroundProjector::new(basis, op.region().clone(), tol),
        report: SpectralReport {
            gap,
            ground_degeneracy: kernel.len(),
            lowest_eigenvalue: lowest,
            tol,
            dim: op.dim(),
            method: "lanczos",
            epsilon: None,
            g: None,
        },
        eigenvalues: None,
        eigenvectors: None,
    })
}

/// Restarted Lanczos with full reorthogonalization and locking of converged
/// pairs. Returns every locked eigenpair; on exit all eigenvalues below `tol`
/// are locked, together with the smallest eigenvalue at or above `tol`.
fn lowest_eigenpairs_until<F>(apply: F, n: usize, tol: f64) -> Result<Vec<(f64, Vec<C64>)>>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let mut rng = linalg::seeded_rng(LANCZOS_SEED);
    let mut locked: Vec<(f64, Vec<C64>)> = Vec::new();
    let krylov = n.min(120);
    let mut start = linalg::random_state(n, &mut rng);
    let mut last_residual = f64::INFINITY;
    for _ in 0..LANCZOS_MAX_RESTARTS {
        let basis_locked: Vec<&Vec<C64>> = locked.iter().map(|p| &p.1).collect();
        if basis_locked.len() >= n {
            return Ok(locked);
        }
        let (ritz, residuals) = lanczos_run(&apply, &start, &basis_locked, krylov, &mut rng)?;
        if ritz.is_empty() {
            start = linalg::random_state(n, &mut rng);
            continue;
        }
        let lowest_converged = residuals[0] <= LANCZOS_RESIDUAL;
        let lowest_value = ritz[0].0;
        let mut next_start = None;
        for ((theta, x), res) in ritz.into_iter().zip(residuals) {
            if res <= LANCZOS_RESIDUAL {
                lock(&mut locked, theta, x);
            } else if next_start.is_none() {
                last_residual = res;
                next_start = Some(x);
            }
        }
        if lowest_converged && lowest_value >= tol {
            return Ok(locked);
        }
        let mut fresh = linalg::random_state(n, &mut rng);
        let fnorm = linalg::norm(&fresh);
        fresh.iter_mut().for_each(|z| *z /= fnorm);
        start = match next_start {
            Some(x) => x.iter().zip(&fresh).map(|(a, b)| a + b * 1e-2).collect(),
            None => fresh,
        };
    }
    Err(Error::NoConvergence {
        iterations: LANCZOS_MAX_RESTARTS,
        residual: last_residual,
    })
}

fn lock(locked: &mut Vec<(f64, Vec<C64>)>, theta: f64, mut x: Vec<C64>) {
    for _ in 0..2 {
        for (_, b) in locked.iter() {
            let c = linalg::inner(b, &x);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
    let nrm = linalg::norm(&x);
    if nrm > 0.5 {
        x.iter_mut().for_each(|z| *z /= nrm);
        locked.push((theta, x));
    }
}

fn orthogonalize(w: &mut [C64], against: &[&Vec<C64>]) {
    for b in against {
        let c = linalg::inner(b, w);
        w.iter_mut().zip(b.iter()).for_each(|(wi, bi)| *wi -= c * bi);
    }
}

/// One Lanczos cycle on the operator deflated by `locked`. Returns Ritz pairs in
/// ascending order with their true residual norms.
#[allow(clippy::type_complexity)]
fn lanczos_run<F, R>(
    apply: &F,
    start: &[C64],
    locked: &[&Vec<C64>],
    m: usize,
    rng: &mut R,
) -> Result<(Vec<(f64, Vec<C64>)>, Vec<f64>)>
where
    F: Fn(&[C64]) -> Vec<C64>,
    R: rand::Rng,
{
    let n = start.len();
    let mut v = start.to_vec();
    orthogonalize(&mut v, locked);
    orthogonalize(&mut v, locked);
    let mut nv = linalg::norm(&v);
    if nv < 1e-12 {
        v = linalg::random_state(n, rng);
        orthogonalize(&mut v, locked);
        orthogonalize(&mut v, locked);
        nv = linalg::norm(&v);
        if nv < 1e-12 {
            return Ok((Vec::new(), Vec::new()));
        }
    }
    v.iter_mut().for_each(|z| *z /= nv);
    let mut vs: Vec<Vec<C64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let room = n - locked.len();
    for j in 0..m.min(room) {
        let mut w = apply(&vs[j]);
        alpha.push(linalg::inner(&vs[j], &w).re);
        for _ in 0..2 {
            orthogonalize(&mut w, locked);
            let refs: Vec<&Vec<C64>> = vs.iter().collect();
            orthogonalize(&mut w, &refs);
        }
        let b = linalg::norm(&w);
        if j + 1 == m.min(room) || b < 1e-10 {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|z| *z /= b);
        vs.push(w);
    }
    let k = alpha.len();
    let t = faer::Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let (theta, y) = linalg::real_symmetric_eigen(&t)?;
    let mut ritz = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (idx, &th) in theta.iter().enumerate() {
        let mut x = vec![ZERO; n];
        for (i, vi) in vs.iter().take(k).enumerate() {
            let c = y[(i, idx)];
            x.iter_mut().zip(vi).for_each(|(xi, a)| *xi += a * c);
        }
        let nx = linalg::norm(&x);
        x.iter_mut().for_each(|z| *z /= nx);
        let hx = apply(&x);
        let mut r = hx.clone();
        r.iter_mut().zip(&x).for_each(|(ri, xi)| *ri -= xi * th);
        // the deflated operator's residual excludes the locked directions
        orthogonalize(&mut r, locked);
        residuals.push(linalg::norm(&r));
        ritz.push((th, x));
    }
    Ok((ritz, residuals))
}

/// Kernel of `H_Λ` built site by site as the common kernel of all terms.
///
/// Every term is positive semidefinite, so `ker H_Λ = ∩_X ker h(X)`. Sites are
/// added in lexicographic order; at each step the running kernel is tensored
/// with the new site and compressed onto the kernel of the terms touching it.
/// Only small compressed matrices are diagonalized, which makes this far
/// cheaper than a full eigensolve when the ground space is small.
pub fn kernel_by_intersection(
    h: &LocalHamiltonian,
    region: &Region,
    budget: usize,
    tol: f64,
) -> Result<GroundProjector> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = h.local_dim();
    let sites: Vec<_> = region.sites().cloned().collect();
    let mut kernel = linalg::identity(1);
    let mut covered = Region::empty(region.dim());
    for site in &sites {
        let grown = covered.union(&Region::new(region.dim(), [site.clone()])?)?;
        let space = Space::new(&grown, d, budget)?;
        let k = kernel.ncols();
        let rows = kernel.nrows() * d;
        let ext = CMat::from_fn(rows, k * d, |r, c| {
            if r % d == c % d {
                kernel[(r / d, c / d)]
            } else {
                ZERO
            }
        });
        let new_terms: Vec<InteractionTerm> = h
            .restrict(&grown)?
            .into_iter()
            .filter(|t| t.support.contains(site))
            .collect();
        kernel = if new_terms.is_empty() {
            ext
        } else {
            let embeddings = new_terms
                .iter()
                .map(|t| space.embedding(&t.support))
                .collect::<Result<Vec<_>>>()?;
            let mut hk = CMat::zeros(rows, k * d);
            for c in 0..k * d {
                let col = linalg::column(&ext, c);
                let mut out = vec![ZERO; rows];
                for (t, e) in new_terms.iter().zip(&embeddings) {
                    e.add_apply(&t.matrix, &col, &mut out);
                }
                for (r, x) in out.into_iter().enumerate() {
                    hk[(r, c)] = x;
                }
            }
            let m = ext.adjoint() * &hk;
            let m = linalg::scaled(&(&m + m.adjoint()), 0.5);
            let (vals, vecs) = linalg::hermitian_eigen(&m)?;
            check_ambiguous(&vals, tol)?;
            let keep = vals.iter().take_while(|&&e| e < tol).count();
            &ext * vecs.subcols(0, keep)
        };
        covered = grown;
    }
    Ok(GroundProjector::new(kernel, region.clone(), tol))
}

/// `Var(φ) = ⟨φ|φ⟩ - ⟨φ|P|φ⟩`.
pub fn variance(p: &GroundProjector, phi: &[C64]) -> Result<f64> {
    linalg::check_len(phi, p.dim())?;
    let c = linalg::adjoint_mat_vec(p.basis(), phi);
    Ok(linalg::norm_sqr(phi) - linalg::norm_sqr(&c))
}

/// `E(φ) = ⟨φ|H_Λ|φ⟩`.
pub fn dirichlet(op: &AssembledOperator, phi: &[C64]) -> Result<f64> {
    linalg::check_len(phi, op.dim())?;
    Ok(linalg::inner(phi, &op.apply(phi)).re)
}

#[derive(Clone, Debug, Serialize)]
pub struct FrustrationReport {
    pub frustration_free: bool,
    pub lowest_eigenvalue: f64,
    /// `max_X ‖h(X) P_Λ‖`, 0 when the kernel is empty.
    pub max_term_defect: f64,
    pub ground_degeneracy: usize,
    pub tol: f64,
}

/// Lowest eigenvalue at most `tol` and `‖h(X) P_Λ‖ <= tol` for every term.
pub fn check_frustration_free(
    h: &LocalHamiltonian,
    region: &Region,
    tol: f64,
    budget: usize,
) -> Result<FrustrationReport> {
    let op = AssembledOperator::assemble(h, region, budget)?;
    let spec = diagonalize(&op, Some(tol))?;
    let basis = spec.ground.basis();
    let mut max_defect: f64 = 0.0;
    if basis.ncols() > 0 {
        for (t, e) in op.terms().iter().zip(op.embeddings()) {
            let cols: Vec<Vec<C64>> = (0..basis.ncols())
                .map(|j| {
                    let mut out = vec![ZERO; op.dim()];
                    e.add_apply(&t.matrix, &linalg::column(basis, j), &mut out);
                    out
                })
                .collect();
            let hp = linalg::from_columns(op.dim(), &cols);
            max_defect = max_defect.max(linalg::spectral_norm(&hp)?);
        }
    }
    let lowest = spec.report.lowest_eigenvalue;
    Ok(FrustrationReport {
        frustration_free: lowest <= tol && basis.ncols() > 0 && max_defect <= tol,
        lowest_eigenvalue: lowest,
        max_term_defect: max_defect,
        ground_degeneracy: spec.report.ground_degeneracy,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Builtin;
    use crate::space::DEFAULT_BUDGET;

    fn chain(model: Builtin, n: i64) -> AssembledOperator {
        let h = LocalHamiltonian::builtin(model, 1).unwrap();
        AssembledOperator::assemble(&h, &Region::interval(0, n - 1), DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn product_two_sites_is_diagonal() {
        let op = chain(Builtin::Product, 2);
        let m = op.matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { [0.0, 1.0, 1.0, 2.0][i] } else { 0.0 };
                assert_eq!(m[(i, j)], C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn product_gap() {
        let s = diagonalize(&chain(Builtin::Product, 3), None).unwrap();
        assert!((s.gap() - 1.0).abs() < 1e-12);
        assert_eq!(s.report.ground_degeneracy, 1);
    }

    #[test]
    fn heisenberg_four_sites() {
        let s = diagonalize(&chain(Builtin::HeisenbergFm, 4), None).unwrap();
        let expected = 1.0 - (std::f64::consts::PI / 4.0).cos();
        assert!((s.gap() - expected).abs() < 1e-10, "{}", s.gap());
        assert_eq!(s.report.ground_degeneracy, 5);
    }

    #[test]
    fn aklt_four_sites() {
        let s = diagonalize(&chain(Builtin::Aklt, 4), None).unwrap();
        assert!(s.gap() > 0.0);
        assert_eq!(s.report.ground_degeneracy, 4);
    }

    #[test]
    fn variance_and_energy() {
        let op = chain(Builtin::Product, 1);
        let s = diagonalize(&op, None).unwrap();
        let one = vec![ZERO, C64::new(1.0, 0.0)];
        assert!((variance(&s.ground, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!((dirichlet(&op, &one).unwrap() - 1.0).abs() < 1e-15);
        assert!(variance(&s.ground, &[ZERO; 3]).is_err());
    }

    #[test]
    fn ambiguous_kernel_reported() {
        let op = chain(Builtin::HeisenbergFm, 4);
        let gap = 1.0 - (std::f64::consts::PI / 4.0).cos();
        assert!(matches!(
            diagonalize(&op, Some(gap * 2.0)),
            Err(Error::AmbiguousKernel { .. })
        ));
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for (model, n) in [(Builtin::HeisenbergFm, 8), (Builtin::Aklt, 5), (Builtin::Product, 6)] {
            let h = LocalHamiltonian::builtin(model, 1).unwrap();
            let region = Region::interval(0, n - 1);
            let dense = AssembledOperator::assemble(&h, &region, DEFAULT_BUDGET).unwrap();
            let implicit =
                AssembledOperator::assemble_with_threshold(&h, &region, DEFAULT_BUDGET, 0).unwrap();
            assert!(!implicit.is_dense());
            let a = diagonalize(&dense, None).unwrap();
            let b = diagonalize(&implicit, None).unwrap();
            assert_eq!(a.report.ground_degeneracy, b.report.ground_degeneracy);
            assert!((a.gap() - b.gap()).abs() < 1e-8, "{} vs {}", a.gap(), b.gap());
            let pa = a.ground.projector();
            let pb = b.ground.projector();
            assert!(linalg::spectral_norm(&(&pa - &pb)).unwrap() < 1e-7);
        }
    }

    #[test]
    fn intersection_kernel_matches_eigensolve() {
        let cases = [
            (Builtin::HeisenbergFm, Region::cuboid(&[0, 0], &[1, 2]).unwrap()),
            (Builtin::Aklt, Region::interval(0, 4)),
            (Builtin::Product, Region::interval(-1, 3)),
        ];
        for (model, region) in cases {
            let h = LocalHamiltonian::builtin(model, region.dim()).unwrap();
            let op = AssembledOperator::assemble(&h, &region, DEFAULT_BUDGET).unwrap();
            let full = diagonalize(&op, None).unwrap();
            let fast = kernel_by_intersection(&h, &region, DEFAULT_BUDGET, 1e-9).unwrap();
            assert_eq!(full.ground.degeneracy(), fast.degeneracy());
            let diff = full.ground.projector() - fast.projector();
            assert!(linalg::spectral_norm(&diff).unwrap() < 1e-10);
        }
    }

    #[test]
    fn triplet_triangle_is_frustrated() {
        let singlet = {
            let h = LocalHamiltonian::builtin(Builtin::HeisenbergFm, 1).unwrap();
            h.restrict(&Region::interval(0, 1)).unwrap()[0].matrix.clone()
        };
        let triplet = linalg::identity(4) - &singlet;
        let bonds = [(0, 1), (1, 2), (0, 2)];
        let terms = bonds
            .iter()
            .map(|&(a, b)| (Region::new(1, [vec![a], vec![b]]).unwrap(), triplet.clone()))
            .collect();
        let h = LocalHamiltonian::explicit(1, 2, 2.0, terms).unwrap();
        let r = check_frustration_free(&h, &Region::interval(0, 2), 1e-9, DEFAULT_BUDGET).unwrap();
        assert!(!r.frustration_free);
        let fm = LocalHamiltonian::builtin(Builtin::HeisenbergFm, 1).unwrap();
        let r = check_frustration_free(&fm, &Region::interval(0, 3), 1e-9, DEFAULT_BUDGET).unwrap();
        assert!(r.frustration_free);
    }
}
