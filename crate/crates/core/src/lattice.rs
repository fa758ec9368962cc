//! Finite regions of Z^D, the box classes F_k and the s-decomposition.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Site = Vec<i64>;

/// A finite, deduplicated set of lattice sites in Z^D.
///
/// Sites are kept in lexicographic order; that order is also the tensor
/// factor order used when a region is turned into a Hilbert space.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr", into = "RegionRepr")]
pub struct Region {
    dim: usize,
    sites: BTreeSet<Site>,
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    dim: usize,
    sites: Vec<Site>,
}

impl TryFrom<RegionRepr> for Region {
    type Error = Error;
    fn try_from(r: RegionRepr) -> Result<Self> {
        Region::new(r.dim, r.sites)
    }
}

impl From<Region> for RegionRepr {
    fn from(r: Region) -> Self {
        RegionRepr {
            dim: r.dim,
            sites: r.sites.into_iter().collect(),
        }
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Region(D={}, ", self.dim)?;
        f.debug_set().entries(self.sites.iter()).finish()?;
        write!(f, ")")
    }
}

impl Region {
    pub fn new<I: IntoIterator<Item = Site>>(dim: usize, sites: I) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidRegion("dimension must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for s in sites {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            set.insert(s);
        }
        Ok(Region { dim, sites: set })
    }

    pub fn empty(dim: usize) -> Self {
        Region {
            dim,
            sites: BTreeSet::new(),
        }
    }

    /// The 1D interval `{lo, ..., hi}` (empty when `hi < lo`).
    pub fn interval(lo: i64, hi: i64) -> Self {
        Region {
            dim: 1,
            sites: (lo..=hi).map(|x| vec![x]).collect(),
        }
    }

    /// All sites `x` with `lo <= x <= hi` componentwise.
    pub fn cuboid(lo: &[i64], hi: &[i64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidRegion("corner lengths differ".into()));
        }
        let mut sites = vec![Vec::new()];
        for (&a, &b) in lo.iter().zip(hi) {
            let mut next = Vec::new();
            for prefix in &sites {
                for x in a..=b {
                    let mut s = prefix.clone();
                    s.push(x);
                    next.push(s);
                }
            }
            sites = next;
        }
        Region::new(lo.len(), sites)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> impl ExactSizeIterator<Item = &Site> + Clone {
        self.sites.iter()
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        self.sites.contains(site)
    }

    /// Position of `site` in the lexicographic order, i.e. its tensor slot.
    pub fn position(&self, site: &[i64]) -> Option<usize> {
        if !self.sites.contains(site) {
            return None;
        }
        Some(self.sites.iter().take_while(|s| s.as_slice() < site).count())
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.dim == other.dim && self.sites.is_subset(&other.sites)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.is_disjoint(&other.sites)
    }

    fn same_dim(&self, other: &Region) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        self.same_dim(other)?;
        Ok(Region {
            dim: self.dim,
            sites: self.sites.union(&other.sites).cloned().collect(),
        })
    }

    pub fn intersection(&self, other: &Region) -> Result<Region> {
        self.same_dim(other)?;
        Ok(Region {
            dim: self.dim,
            sites: self.sites.intersection(&other.sites).cloned().collect(),
        })
    }

    pub fn difference(&self, other: &Region) -> Result<Region> {
        self.same_dim(other)?;
        Ok(Region {
            dim: self.dim,
            sites: self.sites.difference(&other.sites).cloned().collect(),
        })
    }

    /// Minimum Euclidean distance between sites; `+inf` if either side is empty.
    pub fn dist(&self, other: &Region) -> Result<f64> {
        self.same_dim(other)?;
        let mut best = i64::MAX;
        for a in &self.sites {
            for b in &other.sites {
                best = best.min(sq_dist(a, b));
                if best == 0 {
                    return Ok(0.0);
                }
            }
        }
        if best == i64::MAX {
            Ok(f64::INFINITY)
        } else {
            Ok((best as f64).sqrt())
        }
    }

    /// Largest Euclidean distance between two sites (0 for a single site).
    pub fn diameter(&self) -> f64 {
        let mut best = 0;
        for a in &self.sites {
            for b in &self.sites {
                best = best.max(sq_dist(a, b));
            }
        }
        (best as f64).sqrt()
    }

    /// Componentwise minimum and maximum corner.
    pub fn bounding_box(&self) -> Option<(Site, Site)> {
        let first = self.sites.iter().next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for s in &self.sites {
            for j in 0..self.dim {
                lo[j] = lo[j].min(s[j]);
                hi[j] = hi[j].max(s[j]);
            }
        }
        Some((lo, hi))
    }

    /// Side lengths `max - min` of the bounding box, per axis.
    pub fn extents(&self) -> Option<Vec<i64>> {
        self.bounding_box()
            .map(|(lo, hi)| hi.iter().zip(&lo).map(|(h, l)| h - l).collect())
    }

    pub fn translate(&self, shift: &[i64]) -> Result<Region> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: shift.len(),
            });
        }
        Ok(Region {
            dim: self.dim,
            sites: self
                .sites
                .iter()
                .map(|s| s.iter().zip(shift).map(|(x, t)| x + t).collect())
                .collect(),
        })
    }

    /// New coordinates `y_i = x_{perm[i]}`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Region> {
        check_permutation(perm, self.dim)?;
        Ok(Region {
            dim: self.dim,
            sites: self
                .sites
                .iter()
                .map(|s| perm.iter().map(|&p| s[p]).collect())
                .collect(),
        })
    }

    pub fn filter<F: Fn(&Site) -> bool>(&self, keep: F) -> Region {
        Region {
            dim: self.dim,
            sites: self.sites.iter().filter(|s| keep(s)).cloned().collect(),
        }
    }

    /// Size of the largest lattice ball inside the region.
    ///
    /// In 1D this is the number of sites. For D >= 2 it is the diameter
    /// `2r + 1` of the largest Euclidean ball of integer radius `r` whose
    /// lattice points all lie in the region (0 for an empty region).
    pub fn overlap_size(&self) -> usize {
        if self.dim == 1 {
            return self.len();
        }
        let mut best = 0usize;
        for c in &self.sites {
            let mut r = 0i64;
            while self.contains_ball(c, r + 1) {
                r += 1;
            }
            best = best.max(2 * r as usize + 1);
        }
        best
    }

    fn contains_ball(&self, center: &[i64], r: i64) -> bool {
        let mut offset = vec![-r; self.dim];
        loop {
            let sq: i64 = offset.iter().map(|o| o * o).sum();
            if sq <= r * r {
                let p: Site = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
                if !self.sites.contains(&p) {
                    return false;
                }
            }
            let mut j = 0;
            loop {
                if j == self.dim {
                    return true;
                }
                offset[j] += 1;
                if offset[j] <= r {
                    break;
                }
                offset[j] = -r;
                j += 1;
            }
        }
    }
}

fn sq_dist(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_permutation(perm: &[usize], dim: usize) -> Result<()> {
    let mut seen = vec![false; dim];
    if perm.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "permutation of length {} for dimension {dim}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= dim || seen[p] {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `l_j = (3/2)^(j/D)`.
pub fn level_length(j: i64, dim: usize) -> f64 {
    1.5f64.powf(j as f64 / dim as f64)
}

/// The box R(k) = [0, l_{k+1}] x ... x [0, l_{k+D}] defining F_k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionClass {
    pub k: usize,
    pub lengths: Vec<f64>,
}

impl RegionClass {
    pub fn new(k: usize, dim: usize) -> Self {
        RegionClass {
            k,
            lengths: (1..=dim as i64)
                .map(|j| level_length(k as i64 + j, dim))
                .collect(),
        }
    }

    /// Whether sorted side lengths fit under the sorted box lengths.
    pub fn admits(&self, extents: &[i64]) -> bool {
        let mut e = extents.to_vec();
        e.sort_unstable();
        e.iter().zip(&self.lengths).all(|(&x, &l)| x as f64 <= l)
    }
}

/// Smallest `k` with `region ∈ F_k`.
pub fn classify_region(region: &Region) -> Result<usize> {
    let extents = region.extents().ok_or(Error::EmptyRegion)?;
    let mut k = 0;
    loop {
        if RegionClass::new(k, region.dim()).admits(&extents) {
            return Ok(k);
        }
        k += 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SDecomposition {
    pub parent: Region,
    pub k: usize,
    pub s: usize,
    pub pairs: Vec<(Region, Region)>,
    /// Axis of the parent's own coordinates along which the cuts are made (0-based).
    pub cut_axis: usize,
    /// `d_k = l_k / (8 s)`.
    pub width: f64,
}

/// Canonical frame of a region: the translation taking the bounding-box minimum
/// to the origin and the axis order sorting side lengths ascending (stable, so
/// ties keep the original axis order).
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalFrame {
    pub origin: Site,
    pub perm: Vec<usize>,
}

impl CanonicalFrame {
    pub fn of(region: &Region) -> Result<Self> {
        let (lo, hi) = region.bounding_box().ok_or(Error::EmptyRegion)?;
        let mut perm: Vec<usize> = (0..region.dim()).collect();
        perm.sort_by_key(|&j| hi[j] - lo[j]);
        Ok(CanonicalFrame { origin: lo, perm })
    }

    /// Coordinates of `site` in the canonical frame.
    pub fn coords(&self, site: &[i64]) -> Site {
        self.perm.iter().map(|&p| site[p] - self.origin[p]).collect()
    }
}

/// Every axis order under which the region's box fits `R(k)`, canonical first.
pub fn fitting_frames(region: &Region, k: usize) -> Result<Vec<CanonicalFrame>> {
    let canonical = CanonicalFrame::of(region)?;
    let extents = region.extents().ok_or(Error::EmptyRegion)?;
    let class = RegionClass::new(k, region.dim());
    let mut frames = vec![canonical.clone()];
    let mut perm: Vec<usize> = (0..region.dim()).collect();
    loop {
        let fits = perm
            .iter()
            .zip(&class.lengths)
            .all(|(&p, &l)| extents[p] as f64 <= l);
        if fits && perm != canonical.perm {
            frames.push(CanonicalFrame {
                origin: canonical.origin.clone(),
                perm: perm.clone(),
            });
        }
        if !next_permutation(&mut perm) {
            return Ok(frames);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The s-decomposition of a region in `F_k \ F_{k-1}`, with `1 <= s <= l_k/8`.
pub fn s_decompose(region: &Region, k: usize, s: usize) -> Result<SDecomposition> {
    let lk = level_length(k as i64, region.dim());
    if s == 0 || s as f64 > lk / 8.0 {
        return Err(Error::Decomposition(format!(
            "s = {s} outside [1, l_k/8] with l_{k} = {lk:.4}"
        )));
    }
    s_decompose_unchecked(region, k, s)
}

/// Same cut construction without the `s <= l_k/8` restriction.
///
/// Outside the admissible range the geometric guarantees may fail; callers
/// are expected to run [`verify_decomposition`] on the result.
pub fn s_decompose_unchecked(region: &Region, k: usize, s: usize) -> Result<SDecomposition> {
    let class = classify_region(region)?;
    if class != k {
        return Err(Error::Decomposition(if class < k {
            format!("region already lies in F_{class}, nothing to decompose at level {k}")
        } else {
            format!("region lies in F_{class}, not in F_{k}")
        }));
    }
    if s == 0 {
        return Err(Error::Decomposition("s must be positive".into()));
    }
    decompose_in_frame(region, k, s, &CanonicalFrame::of(region)?)
}

/// The cut construction in an explicit frame; the last frame axis is cut.
/// Level and range checks are the caller's responsibility.
pub fn decompose_in_frame(
    region: &Region,
    k: usize,
    s: usize,
    frame: &CanonicalFrame,
) -> Result<SDecomposition> {
    if s == 0 {
        return Err(Error::Decomposition("s must be positive".into()));
    }
    let dim = region.dim();
    let lk = level_length(k as i64, dim);
    let top = level_length((k + dim) as i64, dim);
    let d = lk / (8.0 * s as f64);
    let last = dim - 1;
    let mut pairs = Vec::with_capacity(s);
    for i in 1..=s {
        let a_max = top / 2.0 + 2.0 * i as f64 * d;
        let b_min = top / 2.0 + (2.0 * i as f64 - 1.0) * d;
        let a = region.filter(|x| frame.coords(x)[last] as f64 <= a_max);
        let b = region.filter(|x| frame.coords(x)[last] as f64 >= b_min);
        if a.is_empty() || b.is_empty() {
            return Err(Error::Decomposition(format!(
                "pair {i} has an empty side; the region violates the decomposition hypotheses"
            )));
        }
        pairs.push((a, b));
    }
    Ok(SDecomposition {
        parent: region.clone(),
        k,
        s,
        pairs,
        cut_axis: frame.perm[last],
        width: d,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// Every pair covers the parent, and both sides are non-empty members of F_{k-1}.
    pub prop1: bool,
    /// Every pair satisfies `dist(Λ∖A_i, Λ∖B_i) >= l_k/(8s) - 2`.
    pub prop2: bool,
    /// The overlaps `A_i ∩ B_i` are pairwise disjoint.
    pub prop3: bool,
    pub min_distance: f64,
    pub required_distance: f64,
}

impl DecompositionReport {
    pub fn all(&self) -> bool {
        self.prop1 && self.prop2 && self.prop3
    }
}

pub fn verify_decomposition(dec: &SDecomposition) -> DecompositionReport {
    let lam = &dec.parent;
    let dim = lam.dim();
    let required = level_length(dec.k as i64, dim) / (8.0 * dec.s as f64) - 2.0;
    let mut prop1 = true;
    let mut min_distance = f64::INFINITY;
    let mut overlaps = Vec::with_capacity(dec.pairs.len());
    for (a, b) in &dec.pairs {
        let union_ok = a.union(b).map(|u| &u == lam).unwrap_or(false);
        let in_lower = |r: &Region| {
            dec.k > 0
                && !r.is_empty()
                && r.dim() == dim
                && classify_region(r).map(|c| c < dec.k).unwrap_or(false)
        };
        prop1 &= union_ok && in_lower(a) && in_lower(b);
        let d = match (lam.difference(a), lam.difference(b)) {
            (Ok(ra), Ok(rb)) => ra.dist(&rb).unwrap_or(f64::NAN),
            _ => f64::NAN,
        };
        min_distance = min_distance.min(d);
        overlaps.push(a.intersection(b).unwrap_or_else(|_| Region::empty(dim)));
    }
    let mut prop3 = true;
    for i in 0..overlaps.len() {
        for j in i + 1..overlaps.len() {
            prop3 &= overlaps[i].is_disjoint(&overlaps[j]);
        }
    }
    DecompositionReport {
        prop1,
        prop2: min_distance >= required,
        prop3,
        min_distance,
        required_distance: required,
    }
}
