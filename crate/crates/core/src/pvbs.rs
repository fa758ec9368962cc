//! Closed-form overlap for product-vacua-with-boundary-states models.
//!
//! Only the normalization `C(X) = Σ_{x∈X} Π_j λ_j^{2x_j}` is used; the model's
//! interaction terms are never built.

use crate::certify::{recursion_bound, CertificationResult, DeltaModel, RecursionOptions, Schedule};
use crate::delta::{DeltaEstimate, DeltaMethod};
use crate::error::{Error, Result};
use crate::lattice::Region;

fn check_lambdas(lambdas: &[f64], dim: usize) -> Result<()> {
    if lambdas.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: lambdas.len(),
        });
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {l}")));
    }
    Ok(())
}

/// `Σ_{x=lo}^{hi} λ^{2x}`.
pub fn axis_sum(lambda: f64, lo: i64, hi: i64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    let q = lambda * lambda;
    if q == 1.0 {
        return (hi - lo + 1) as f64;
    }
    let n = (hi - lo + 1) as i32;
    q.powi(lo as i32) * (1.0 - q.powi(n)) / (1.0 - q)
}

fn is_box(r: &Region) -> bool {
    match r.extents() {
        Some(e) => e.iter().map(|&x| x as usize + 1).product::<usize>() == r.len(),
        None => false,
    }
}

/// `C(X)`; boxes use per-axis geometric sums, other sets a site sum.
pub fn normalization(region: &Region, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(lambdas, region.dim())?;
    if region.is_empty() {
        return Ok(0.0);
    }
    if is_box(region) {
        let (lo, hi) = region.bounding_box().expect("non-empty");
        return Ok((0..region.dim())
            .map(|j| axis_sum(lambdas[j], lo[j], hi[j]))
            .product());
    }
    Ok(region
        .sites()
        .map(|x| {
            x.iter()
                .zip(lambdas)
                .map(|(&c, &l)| (l * l).powi(c as i32))
                .product::<f64>()
        })
        .sum())
}

/// `δ(A,B)² = C(A∖B) C(B∖A) / (C(A) C(B))` for boxes `A`, `B` with box intersection.
pub fn pvbs_delta(a: &Region, b: &Region, lambdas: &[f64]) -> Result<DeltaEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let inter = a.intersection(b)?;
    for (r, name) in [(a, "A"), (b, "B"), (&inter, "A∩B")] {
        if !is_box(r) {
            return Err(Error::InvalidRegion(format!("{name} is not a connected box")));
        }
    }
    let ca = normalization(a, lambdas)?;
    let cb = normalization(b, lambdas)?;
    let cab = normalization(&a.difference(b)?, lambdas)?;
    let cba = normalization(&b.difference(a)?, lambdas)?;
    let value = ((cab / ca) * (cba / cb)).sqrt();
    Ok(DeltaEstimate {
        value,
        method: DeltaMethod::ClosedFormPvbs,
        a: a.clone(),
        b: b.clone(),
        overlap_size: inter.overlap_size(),
        difference_form: None,
        product_form: None,
        forms_agree: None,
        ff_defect: None,
    })
}

/// Case bound on δ for a cut along the last axis, with `l`, `l_A`, `l_B` the
/// coordinate lengths (sites − 1) of `A∩B`, `A` and `B` along that axis.
pub fn pvbs_bound(l: usize, l_a: usize, l_b: usize, lambdas: &[f64]) -> Result<f64> {
    let lam = *lambdas
        .last()
        .ok_or_else(|| Error::InvalidParameter("no λ given".into()))?;
    check_lambdas(lambdas, lambdas.len())?;
    if l > l_a || l > l_b {
        return Err(Error::InvalidParameter(format!(
            "overlap length {l} exceeds a side length ({l_a}, {l_b})"
        )));
    }
    if lam == 1.0 {
        return Ok(1.0);
    }
    let q = lam.min(1.0 / lam);
    let e = |n: usize| 1.0 - q.powi(2 * (n as i32 + 1));
    Ok(q.powi(l as i32 + 1) / (e(l_a) * e(l_b)).sqrt())
}

/// Certified recursion bound with `δ(l) = λ_*^l / (1 − λ_*²)`, in units of `λ_{k0}`.
pub fn pvbs_certify(
    lambdas: &[f64],
    schedule: &Schedule,
    lambda_k0: f64,
    k0: Option<usize>,
) -> Result<CertificationResult> {
    check_lambdas(lambdas, lambdas.len())?;
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("no λ given".into()));
    }
    let opts = RecursionOptions {
        dim: lambdas.len(),
        k0,
        ..RecursionOptions::default()
    };
    let model = DeltaModel::Pvbs {
        lambdas: lambdas.to_vec(),
    };
    let mut r = recursion_bound(lambda_k0, schedule, &model, &opts)?;
    if crate::certify::pvbs_lambda_star(lambdas) >= 1.0 {
        r.valid = false;
        r.lower_bound = 0.0;
        r.reason = "some λ_j = 1: δ(l) stays bounded away from zero on boxes".into();
    }
    Ok(r)
}
