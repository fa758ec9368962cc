//! Tensor-product Hilbert spaces over regions and the index maps that embed
//! operators acting on a sub-region.

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{CMat, C64, ZERO};

/// Default cap on the Hilbert-space dimension of a single region.
pub const DEFAULT_BUDGET: usize = 1 << 20;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "GAPCERT_MAX_DIM";

pub fn budget_from_env() -> usize {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

pub fn hilbert_dim(local_dim: usize, sites: usize, budget: usize) -> Result<usize> {
    let exceeded = Error::BudgetExceeded {
        local_dim,
        sites,
        budget,
    };
    let n = u32::try_from(sites).map_err(|_| Error::BudgetExceeded {
        local_dim,
        sites,
        budget,
    })?;
    match local_dim.checked_pow(n) {
        Some(d) if d <= budget => Ok(d),
        _ => Err(exceeded),
    }
}

/// `(C^d)^{⊗Λ}` with sites in lexicographic order, first site most significant.
#[derive(Clone, Debug)]
pub struct Space {
    region: Region,
    local_dim: usize,
    dim: usize,
}

impl Space {
    pub fn new(region: &Region, local_dim: usize, budget: usize) -> Result<Self> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if local_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "local dimension {local_dim} < 2"
            )));
        }
        let dim = hilbert_dim(local_dim, region.len(), budget)?;
        Ok(Space {
            region: region.clone(),
            local_dim,
            dim,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding(&self, sub: &Region) -> Result<Embedding> {
        if !sub.is_subset(&self.region) {
            return Err(Error::InvalidRegion(format!(
                "{sub:?} is not contained in {:?}",
                self.region
            )));
        }
        let n = self.region.len();
        let d = self.local_dim;
        let stride = |p: usize| d.pow((n - 1 - p) as u32);
        let inside: Vec<usize> = sub
            .sites()
            .map(|s| self.region.position(s).expect("subset"))
            .collect();
        let outside: Vec<usize> = (0..n).filter(|p| !inside.contains(p)).collect();
        Ok(Embedding {
            local: offsets(&inside, d, &stride),
            rest: offsets(&outside, d, &stride),
        })
    }
}

/// All sums `Σ_t digit_t · stride(pos_t)` with the first listed position most significant.
fn offsets(positions: &[usize], d: usize, stride: &dyn Fn(usize) -> usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let st = stride(p);
        let mut next = Vec::with_capacity(out.len() * d);
        for &o in &out {
            for digit in 0..d {
                next.push(o + digit * st);
            }
        }
        out = next;
    }
    out
}

/// Index map for `X ⊆ Λ`: full index = `rest[r] + local[a]`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub local: Vec<usize>,
    pub rest: Vec<usize>,
}

impl Embedding {
    pub fn local_dim(&self) -> usize {
        self.local.len()
    }

    pub fn full_dim(&self) -> usize {
        self.local.len() * self.rest.len()
    }

    /// `v <- (m ⊗ 1) v`.
    pub fn apply_in_place(&self, m: &CMat, v: &mut [C64]) {
        let k = self.local.len();
        let mut x = vec![ZERO; k];
        for &base in &self.rest {
            for (a, &off) in self.local.iter().enumerate() {
                x[a] = v[base + off];
            }
            for (i, &off) in self.local.iter().enumerate() {
                let mut acc = ZERO;
                for (j, xj) in x.iter().enumerate() {
                    acc += m[(i, j)] * xj;
                }
                v[base + off] = acc;
            }
        }
    }

    /// `out += (m ⊗ 1) v`.
    pub fn add_apply(&self, m: &CMat, v: &[C64], out: &mut [C64]) {
        for &base in &self.rest {
            for (i, &oi) in self.local.iter().enumerate() {
                let mut acc = ZERO;
                for (j, &oj) in self.local.iter().enumerate() {
                    acc += m[(i, j)] * v[base + oj];
                }
                out[base + oi] += acc;
            }
        }
    }

    /// Dense `m ⊗ 1` on the full space.
    pub fn embed_operator(&self, m: &CMat) -> CMat {
        let n = self.full_dim();
        let mut out = CMat::zeros(n, n);
        for &base in &self.rest {
            for (i, &oi) in self.local.iter().enumerate() {
                for (j, &oj) in self.local.iter().enumerate() {
                    out[(base + oi, base + oj)] = m[(i, j)];
                }
            }
        }
        out
    }

    /// Columns `b ⊗ e_r` for every column `b` of `basis` and every rest configuration.
    /// Orthonormal columns stay orthonormal.
    pub fn embed_columns(&self, basis: &CMat) -> CMat {
        let n = self.full_dim();
        let cols = basis.ncols() * self.rest.len();
        let mut out = CMat::zeros(n, cols);
        let mut c = 0;
        for &base in &self.rest {
            for b in 0..basis.ncols() {
                for (i, &oi) in self.local.iter().enumerate() {
                    out[(base + oi, c)] = basis[(i, b)];
                }
                c += 1;
            }
        }
        out
    }
}
