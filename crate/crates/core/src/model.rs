//! Finite-range projector Hamiltonians, builtin models and the JSON model format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::linalg::{self, CMat, C64, ONE, ZERO};

/// Current version of the model file format.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Tolerance for Hermiticity and idempotency of interaction terms.
pub const PROJECTOR_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct InteractionTerm {
    pub support: Region,
    /// Orthogonal projector on the support's tensor factor.
    pub matrix: CMat,
    /// The matrix as supplied, when it had to be replaced by a projector.
    pub original: Option<CMat>,
}

impl InteractionTerm {
    /// `1 - h(X)`: the projector onto the local ground space.
    pub fn kernel_projector(&self) -> CMat {
        linalg::identity(self.matrix.nrows()) - &self.matrix
    }

    pub fn rank(&self) -> usize {
        let tr: f64 = (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum();
        tr.round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Product,
    HeisenbergFm,
    Aklt,
}

impl Builtin {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "product" => Ok(Builtin::Product),
            "heisenberg_fm" => Ok(Builtin::HeisenbergFm),
            "aklt" => Ok(Builtin::Aklt),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Product => "product",
            Builtin::HeisenbergFm => "heisenberg_fm",
            Builtin::Aklt => "aklt",
        }
    }

    pub fn local_dim(self) -> usize {
        match self {
            Builtin::Product | Builtin::HeisenbergFm => 2,
            Builtin::Aklt => 3,
        }
    }

    pub fn range(self) -> f64 {
        match self {
            Builtin::Product => 1.0,
            Builtin::HeisenbergFm | Builtin::Aklt => 2.0,
        }
    }

    fn term_matrix(self) -> CMat {
        match self {
            Builtin::Product => {
                CMat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { ONE } else { ZERO })
            }
            Builtin::HeisenbergFm => singlet_projector(),
            Builtin::Aklt => spin_two_projector(),
        }
    }
}

/// Projector onto `(|01> - |10>)/sqrt(2)`.
fn singlet_projector() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(1, 1)] = C64::new(0.5, 0.0);
    m[(2, 2)] = C64::new(0.5, 0.0);
    m[(1, 2)] = C64::new(-0.5, 0.0);
    m[(2, 1)] = C64::new(-0.5, 0.0);
    m
}

/// Projector onto total spin 2 in spin-1 ⊗ spin-1: `(X+1)(X+2)/6` with `X = S·S`.
fn spin_two_projector() -> CMat {
    let s = std::f64::consts::SQRT_2 / 2.0;
    // basis m = +1, 0, -1
    let sx = CMat::from_fn(3, 3, |i, j| {
        if i.abs_diff(j) == 1 {
            C64::new(s, 0.0)
        } else {
            ZERO
        }
    });
    let sy = CMat::from_fn(3, 3, |i, j| {
        if j == i + 1 {
            C64::new(0.0, -s)
        } else if i == j + 1 {
            C64::new(0.0, s)
        } else {
            ZERO
        }
    });
    let sz = CMat::from_fn(3, 3, |i, j| {
        if i == j {
            C64::new(1.0 - i as f64, 0.0)
        } else {
            ZERO
        }
    });
    let kron = |a: &CMat, b: &CMat| {
        CMat::from_fn(9, 9, |i, j| a[(i / 3, j / 3)] * b[(i % 3, j % 3)])
    };
    let x = kron(&sx, &sx) + kron(&sy, &sy) + kron(&sz, &sz);
    let id = linalg::identity(9);
    let a = &x + &id;
    let b = &x + linalg::scaled(&id, 2.0);
    linalg::scaled(&(a * b), 1.0 / 6.0)
}

#[derive(Clone, Debug)]
enum TermSource {
    Builtin(Builtin),
    /// Terms attached to fixed supports.
    Explicit(Vec<InteractionTerm>),
    /// Templates anchored at the lexicographically smallest support site, placed
    /// at every translate that fits.
    Translated(Vec<InteractionTerm>),
}

/// A frustration-free-candidate Hamiltonian `H_Λ = Σ_{X ⊆ Λ} h(X)`.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    dim: usize,
    local_dim: usize,
    range: f64,
    source: TermSource,
}

impl LocalHamiltonian {
    pub fn builtin(model: Builtin, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be positive".into()));
        }
        Ok(LocalHamiltonian {
            dim,
            local_dim: model.local_dim(),
            range: model.range(),
            source: TermSource::Builtin(model),
        })
    }

    /// A model whose terms live on the given supports.
    pub fn explicit(
        dim: usize,
        local_dim: usize,
        range: f64,
        terms: Vec<(Region, CMat)>,
    ) -> Result<Self> {
        let terms = validate_terms(dim, local_dim, range, terms)?;
        Ok(LocalHamiltonian {
            dim,
            local_dim,
            range,
            source: TermSource::Explicit(terms),
        })
    }

    /// A translation-invariant model generated from term templates.
    pub fn translation_invariant(
        dim: usize,
        local_dim: usize,
        range: f64,
        templates: Vec<(Region, CMat)>,
    ) -> Result<Self> {
        let mut terms = validate_terms(dim, local_dim, range, templates)?;
        for t in &mut terms {
            let anchor = t.support.sites().next().cloned().expect("non-empty support");
            let shift: Site = anchor.iter().map(|x| -x).collect();
            t.support = t.support.translate(&shift)?;
        }
        Ok(LocalHamiltonian {
            dim,
            local_dim,
            range,
            source: TermSource::Translated(terms),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.source {
            TermSource::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// The terms with support inside `region`, ordered by support.
    pub fn restrict(&self, region: &Region) -> Result<Vec<InteractionTerm>> {
        if region.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: region.dim(),
            });
        }
        let mut terms = match &self.source {
            TermSource::Builtin(b) => builtin_terms(*b, region),
            TermSource::Explicit(ts) => ts
                .iter()
                .filter(|t| t.support.is_subset(region))
                .cloned()
                .collect(),
            TermSource::Translated(ts) => {
                let mut out = Vec::new();
                for site in region.sites() {
                    for t in ts {
                        let support = t.support.translate(site)?;
                        if support.is_subset(region) {
                            out.push(InteractionTerm {
                                support,
                                matrix: t.matrix.clone(),
                                original: t.original.clone(),
                            });
                        }
                    }
                }
                out
            }
        };
        terms.sort_by(|a, b| a.support.cmp(&b.support));
        Ok(terms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        file.build()
    }
}

fn builtin_terms(model: Builtin, region: &Region) -> Vec<InteractionTerm> {
    let matrix = model.term_matrix();
    let mut out = Vec::new();
    for site in region.sites() {
        match model {
            Builtin::Product => out.push(InteractionTerm {
                support: Region::new(region.dim(), [site.clone()]).expect("same dim"),
                matrix: matrix.clone(),
                original: None,
            }),
            Builtin::HeisenbergFm | Builtin::Aklt => {
                for axis in 0..region.dim() {
                    let mut nb = site.clone();
                    nb[axis] += 1;
                    if region.contains(&nb) {
                        out.push(InteractionTerm {
                            support: Region::new(region.dim(), [site.clone(), nb])
                                .expect("same dim"),
                            matrix: matrix.clone(),
                            original: None,
                        });
                    }
                }
            }
        }
    }
    out
}

fn validate_terms(
    dim: usize,
    local_dim: usize,
    range: f64,
    terms: Vec<(Region, CMat)>,
) -> Result<Vec<InteractionTerm>> {
    if local_dim < 2 {
        return Err(Error::InvalidParameter(format!("local_dim {local_dim} < 2")));
    }
    terms
        .into_iter()
        .map(|(support, m)| {
            if support.is_empty() || support.dim() != dim {
                return Err(Error::InvalidTerm(format!(
                    "support {support:?} is empty or not {dim}-dimensional"
                )));
            }
            if support.diameter() > range {
                return Err(Error::InvalidTerm(format!(
                    "support {support:?} has diameter {} > range {range}",
                    support.diameter()
                )));
            }
            let size = local_dim
                .checked_pow(support.len() as u32)
                .ok_or_else(|| Error::InvalidTerm("term too large".into()))?;
            if m.nrows() != size || m.ncols() != size {
                return Err(Error::InvalidTerm(format!(
                    "matrix is {}x{}, expected {size}x{size}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let (matrix, original) = to_projector(&m)?;
            Ok(InteractionTerm {
                support,
                matrix,
                original,
            })
        })
        .collect()
}

/// Returns `m` itself when it is an orthogonal projection; otherwise the
/// projector onto the complement of its lowest eigenspace, keeping `m`.
pub fn to_projector(m: &CMat) -> Result<(CMat, Option<CMat>)> {
    let scale = linalg::spectral_norm(m)?.max(1.0);
    let herm = linalg::hermiticity_defect(m)?;
    if herm > PROJECTOR_TOL * scale {
        return Err(Error::InvalidTerm(format!(
            "matrix is not Hermitian (defect {herm:.3e})"
        )));
    }
    if linalg::idempotency_defect(m)? <= PROJECTOR_TOL {
        return Ok((m.clone(), None));
    }
    let (vals, vecs) = linalg::hermitian_eigen(m)?;
    let e0 = vals[0];
    let tol = 1e-10 * scale;
    let ground: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] - e0 <= tol).collect();
    if ground.len() == vals.len() {
        return Err(Error::InvalidTerm(
            "term is a multiple of the identity and carries no interaction".into(),
        ));
    }
    let cols: Vec<Vec<C64>> = ground.iter().map(|&i| linalg::column(&vecs, i)).collect();
    let basis = linalg::from_columns(m.nrows(), &cols);
    let proj = linalg::identity(m.nrows()) - linalg::projector_from_basis(&basis);
    Ok((proj, Some(m.clone())))
}

/// On-disk model description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub dim: usize,
    pub local_dim: usize,
    pub range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermSpec>>,
    #[serde(default)]
    pub translation_invariant: bool,
}

fn default_version() -> u32 {
    MODEL_FORMAT_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuiltinSpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub support: Vec<Site>,
    /// Row-major entries as `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
}

impl ModelFile {
    pub fn build(&self) -> Result<LocalHamiltonian> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model format version {}",
                self.version
            )));
        }
        match (&self.builtin, &self.terms) {
            (Some(b), None) => {
                let h = builtin_model(&b.name, &b.params)?;
                if h.dim != self.dim || h.local_dim != self.local_dim {
                    return Err(Error::InvalidParameter(format!(
                        "builtin `{}` has dim {} and local_dim {}, file declares {} and {}",
                        b.name, h.dim, h.local_dim, self.dim, self.local_dim
                    )));
                }
                Ok(h)
            }
            (None, Some(ts)) => {
                let mut terms = Vec::with_capacity(ts.len());
                for t in ts {
                    let support = Region::new(self.dim, t.support.iter().cloned())?;
                    let n = (t.matrix.len() as f64).sqrt().round() as usize;
                    if n * n != t.matrix.len() {
                        return Err(Error::InvalidTerm(format!(
                            "{} matrix entries do not form a square",
                            t.matrix.len()
                        )));
                    }
                    let m = CMat::from_fn(n, n, |i, j| {
                        let [re, im] = t.matrix[i * n + j];
                        C64::new(re, im)
                    });
                    terms.push((support, m));
                }
                if self.translation_invariant {
                    LocalHamiltonian::translation_invariant(
                        self.dim,
                        self.local_dim,
                        self.range,
                        terms,
                    )
                } else {
                    LocalHamiltonian::explicit(self.dim, self.local_dim, self.range, terms)
                }
            }
            _ => Err(Error::InvalidParameter(
                "a model file needs exactly one of `builtin` and `terms`".into(),
            )),
        }
    }
}

/// Builtin model by name. `params` may set `{"dim": D}` (default 1).
pub fn builtin_model(name: &str, params: &Value) -> Result<LocalHamiltonian> {
    let model = Builtin::parse(name)?;
    let dim = match params {
        Value::Null => 1,
        Value::Object(map) => {
            for key in map.keys() {
                if key != "dim" {
                    return Err(Error::InvalidParameter(format!(
                        "unknown parameter `{key}` for model `{name}`"
                    )));
                }
            }
            match map.get("dim") {
                None => 1,
                Some(v) => v
                    .as_u64()
                    .filter(|&d| (1..=8).contains(&d))
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("`dim` must be an integer in 1..=8, got {v}"))
                    })? as usize,
            }
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "model parameters must be an object, got {other}"
            )))
        }
    };
    LocalHamiltonian::builtin(model, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_projector(m: &CMat) -> bool {
        linalg::hermiticity_defect(m).unwrap() <= 1e-12
            && linalg::idempotency_defect(m).unwrap() <= 1e-12
    }

    #[test]
    fn builtin_terms_are_projectors() {
        for b in [Builtin::Product, Builtin::HeisenbergFm, Builtin::Aklt] {
            assert!(is_projector(&b.term_matrix()), "{}", b.name());
        }
    }

    #[test]
    fn term_ranks() {
        let h = LocalHamiltonian::builtin(Builtin::HeisenbergFm, 1).unwrap();
        let t = h.restrict(&Region::interval(0, 1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].matrix.nrows(), 4);
        assert_eq!(t[0].rank(), 1);
        let h = LocalHamiltonian::builtin(Builtin::Aklt, 1).unwrap();
        let t = h.restrict(&Region::interval(0, 1)).unwrap();
        assert_eq!(t[0].matrix.nrows(), 9);
        assert_eq!(t[0].rank(), 5);
    }

    #[test]
    fn restrict_counts() {
        let bonds = LocalHamiltonian::builtin(Builtin::HeisenbergFm, 1).unwrap();
        let t = bonds.restrict(&Region::interval(0, 3)).unwrap();
        let supports: Vec<Region> = t.iter().map(|t| t.support.clone()).collect();
        assert_eq!(
            supports,
            vec![
                Region::interval(0, 1),
                Region::interval(1, 2),
                Region::interval(2, 3)
            ]
        );
        assert!(bonds.restrict(&Region::interval(5, 5)).unwrap().is_empty());
        let product = LocalHamiltonian::builtin(Builtin::Product, 1).unwrap();
        assert_eq!(product.restrict(&Region::interval(0, 3)).unwrap().len(), 4);
        let grid = LocalHamiltonian::builtin(Builtin::HeisenbergFm, 2).unwrap();
        let sq = Region::cuboid(&[0, 0], &[2, 2]).unwrap();
        assert_eq!(grid.restrict(&sq).unwrap().len(), 12);
    }

    #[test]
    fn non_projector_replaced() {
        // 2 * singlet projector + 0.5: same kernel, not idempotent
        let m = linalg::scaled(&singlet_projector(), 2.0) + linalg::scaled(&linalg::identity(4), 0.5);
        let (p, orig) = to_projector(&m).unwrap();
        assert!(orig.is_some());
        assert!((linalg::spectral_norm(&(&p - singlet_projector())).unwrap()) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = singlet_projector();
        m[(0, 1)] = C64::new(0.3, 0.0);
        assert!(matches!(to_projector(&m), Err(Error::InvalidTerm(_))));
    }

    #[test]
    fn model_file_builtin_and_terms() {
        let h = LocalHamiltonian::from_json(
            r#"{"dim":1,"local_dim":3,"range":2,"builtin":{"name":"aklt","params":{"dim":1}}}"#,
        )
        .unwrap();
        assert_eq!(h.builtin_kind(), Some(Builtin::Aklt));

        let json = r#"{"version":1,"dim":1,"local_dim":2,"range":1,"translation_invariant":true,
            "terms":[{"support":[[4]],"matrix":[[0,0],[0,0],[0,0],[1,0]]}]}"#;
        let h = LocalHamiltonian::from_json(json).unwrap();
        let t = h.restrict(&Region::interval(0, 2)).unwrap();
        assert_eq!(t.len(), 3);

        assert!(LocalHamiltonian::from_json(
            r#"{"dim":1,"local_dim":2,"range":2,"builtin":{"name":"xyz"}}"#
        )
        .is_err());
        assert!(LocalHamiltonian::from_json(
            r#"{"dim":1,"local_dim":2,"range":1,"terms":[{"support":[[0]],"matrix":[[1,0],[0,0],[0,0]]}]}"#
        )
        .is_err());
    }

    #[test]
    fn range_enforced() {
        let far = Region::new(1, [vec![0], vec![3]]).unwrap();
        let r = LocalHamiltonian::explicit(1, 2, 2.0, vec![(far, singlet_projector())]);
        assert!(matches!(r, Err(Error::InvalidTerm(_))));
    }
}
