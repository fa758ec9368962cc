//! Recursion engine for the gap lower bound
//! `λ_k >= λ_{k0} C Π_{j=k0+1}^k (1 − 2δ_j)`, with certified tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::level_length;
use crate::linalg::round_down;

/// Number of levels in the explicit part of `C = Π_{j>=1} (1 + 1/s_j)^{-1}`.
pub const C_LEVELS: usize = 100_000;
/// Default number of explicit levels after `k0` in the δ product.
pub const DEFAULT_EXPLICIT_LEVELS: usize = 256;
/// Cap on the number of terms summed explicitly in the δ tail.
const TAIL_TERMS: usize = 200_000;

/// Round up by one ulp.
fn round_up(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// The sequence `s_k` of decomposition multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    /// `s_k = ⌈k^{1+ε}⌉`.
    Power { epsilon: f64 },
    /// `s_k = k²`.
    Square,
    /// `s_k = ⌈l_k^{1/3}⌉`.
    CubeRootLength,
}

impl Schedule {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "k2" | "square" => return Ok(Schedule::Square),
            "cbrt" | "cube-root" => return Ok(Schedule::CubeRootLength),
            _ => {}
        }
        let eps = t
            .strip_prefix("power:")
            .or_else(|| t.strip_prefix("k^1+"))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown schedule `{t}`")))?;
        let epsilon: f64 = eps
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad exponent in `{t}`")))?;
        Schedule::power(epsilon)
    }

    pub fn power(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power schedule needs ε > 0, got {epsilon}"
            )));
        }
        Ok(Schedule::Power { epsilon })
    }

    pub fn name(&self) -> String {
        match self {
            Schedule::Power { epsilon } => format!("k^(1+{epsilon})"),
            Schedule::Square => "k^2".into(),
            Schedule::CubeRootLength => "ceil(l_k^(1/3))".into(),
        }
    }

    pub fn s(&self, k: usize, dim: usize) -> usize {
        let kf = k as f64;
        let v = match self {
            Schedule::Power { epsilon } => kf.powf(1.0 + epsilon).ceil(),
            Schedule::Square => kf * kf,
            Schedule::CubeRootLength => level_length(k as i64, dim).cbrt().ceil(),
        };
        if v.is_finite() && v < usize::MAX as f64 {
            (v as usize).max(1)
        } else {
            usize::MAX
        }
    }

    /// Upper bound on `Σ_{j>J} 1/s_j`.
    pub fn inverse_tail(&self, big_j: usize, dim: usize) -> f64 {
        let j = big_j as f64;
        let raw = match self {
            // Σ_{j>J} 1/j² < 1/(J + 1/2)
            Schedule::Square => 1.0 / (j + 0.5),
            Schedule::Power { epsilon } => j.powf(-epsilon) / epsilon,
            Schedule::CubeRootLength => {
                let r = 1.5f64.powf(-1.0 / (3.0 * dim as f64));
                r.powf(j + 1.0) / (1.0 - r)
            }
        };
        round_up(raw)
    }

    /// Upper bound on `Σ_{j>J} s_j/l_j`, by a ratio test on an upper envelope of `s_j`.
    pub fn length_ratio_tail(&self, big_j: usize, dim: usize) -> f64 {
        let j = (big_j + 1) as f64;
        let q = 1.5f64.powf(-1.0 / dim as f64);
        let (first, rho) = match self {
            Schedule::Square => (j * j / level_length((big_j + 1) as i64, dim), q * ((j + 1.0) / j).powi(2)),
            Schedule::Power { epsilon } => {
                let p = 1.0 + epsilon;
                ((j.powf(p) + 1.0) / level_length((big_j + 1) as i64, dim), q * ((j + 1.0) / j).powf(p))
            }
            Schedule::CubeRootLength => {
                let l = level_length((big_j + 1) as i64, dim);
                // s_j/l_j <= 2 l_j^{-2/3} once l_j >= 1
                (2.0 * l.powf(-2.0 / 3.0), q.powf(2.0 / 3.0))
            }
        };
        if rho >= 1.0 {
            f64::INFINITY
        } else {
            round_up(first / (1.0 - rho))
        }
    }
}

/// Model for the per-level overlap parameter δ_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeltaModel {
    /// Measured δ_k for `k = 1..=len`.
    Table { values: Vec<f64> },
    /// `δ_j = δ` for every level.
    Constant { value: f64 },
    /// `δ(l) = c α^l`.
    Exponential { c: f64, alpha: f64 },
    /// `δ(l) = c l^{−α}`.
    Polynomial { c: f64, alpha: f64 },
    /// `δ(l) = λ_*^l / (1 − λ_*²)`, `λ_* = max_i min(λ_i, 1/λ_i)`.
    Pvbs { lambdas: Vec<f64> },
}

impl DeltaModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            DeltaModel::Table { values } => {
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0 + 1e-9)) {
                    return bad(format!("table entry {v} outside [0, 1]"));
                }
            }
            DeltaModel::Constant { value } => {
                if !(*value >= 0.0 && *value <= 1.0) {
                    return bad(format!("constant δ = {value} outside [0, 1]"));
                }
            }
            DeltaModel::Exponential { c, alpha } => {
                if !(*c >= 0.0 && c.is_finite()) || !(*alpha > 0.0 && *alpha < 1.0) {
                    return bad(format!("exponential model needs c >= 0 and 0 < α < 1, got c={c}, α={alpha}"));
                }
            }
            DeltaModel::Polynomial { c, alpha } => {
                if !(*c >= 0.0 && c.is_finite()) || !(*alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("polynomial model needs c >= 0 and α > 0, got c={c}, α={alpha}"));
                }
            }
            DeltaModel::Pvbs { lambdas } => {
                if lambdas.is_empty() {
                    return bad("PVBS model needs at least one λ".into());
                }
                if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
                    return bad(format!("PVBS parameters must be positive, got {l}"));
                }
            }
        }
        Ok(())
    }

    /// Parse `exponential:c=1,alpha=0.5`, `polynomial:c=1,alpha=2`, `const:0`,
    /// `pvbs:0.5,0.8` or `table:0.3,0.2,0.1`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let list = |s: &str| -> Result<Vec<f64>> {
            s.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParameter(format!("bad number `{x}`")))
                })
                .collect()
        };
        let keyed = |s: &str| -> Result<(f64, f64)> {
            let (mut c, mut a) = (None, None);
            for part in s.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{part}`")))?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad number `{v}`")))?;
                match k.trim() {
                    "c" => c = Some(v),
                    "alpha" | "a" => a = Some(v),
                    other => return Err(Error::InvalidParameter(format!("unknown key `{other}`"))),
                }
            }
            match (c, a) {
                (Some(c), Some(a)) => Ok((c, a)),
                _ => Err(Error::InvalidParameter("both c and alpha are required".into())),
            }
        };
        let m = match kind.trim() {
            "table" => DeltaModel::Table { values: list(rest)? },
            "const" | "constant" => {
                let v = list(rest)?;
                if v.len() != 1 {
                    return Err(Error::InvalidParameter("const takes one value".into()));
                }
                DeltaModel::Constant { value: v[0] }
            }
            "zero" => DeltaModel::Constant { value: 0.0 },
            "exponential" | "exp" => {
                let (c, alpha) = keyed(rest)?;
                DeltaModel::Exponential { c, alpha }
            }
            "polynomial" | "poly" => {
                let (c, alpha) = keyed(rest)?;
                DeltaModel::Polynomial { c, alpha }
            }
            "pvbs" => DeltaModel::Pvbs { lambdas: list(rest)? },
            other => return Err(Error::InvalidParameter(format!("unknown δ model `{other}`"))),
        };
        m.validate()?;
        Ok(m)
    }

    /// `δ(l)` for an overlap width `l`; widths below 1 carry no information.
    pub fn at_width(&self, l: f64) -> f64 {
        let v = match self {
            DeltaModel::Table { .. } => return f64::NAN,
            DeltaModel::Constant { value } => return *value,
            _ if !(l >= 1.0) => return 1.0,
            DeltaModel::Exponential { c, alpha } => c * alpha.powf(l),
            DeltaModel::Polynomial { c, alpha } => c * l.powf(-alpha),
            DeltaModel::Pvbs { lambdas } => {
                let ls = pvbs_lambda_star(lambdas);
                if ls >= 1.0 {
                    return 1.0;
                }
                ls.powf(l) / (1.0 - ls * ls)
            }
        };
        round_up(v.min(1.0))
    }

    /// δ_j at level `j`; `None` past the end of a table.
    pub fn level(&self, j: usize, schedule: &Schedule, dim: usize) -> Option<f64> {
        match self {
            DeltaModel::Table { values } => values.get(j.checked_sub(1)?).copied(),
            _ => Some(self.at_width(level_width(j, schedule, dim))),
        }
    }
}

/// `λ_* = max_i min(λ_i, 1/λ_i)`.
pub fn pvbs_lambda_star(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|&l| l.min(1.0 / l))
        .fold(0.0, f64::max)
}

/// Overlap width `l_j/(8 s_j) − 2` guaranteed at level `j`.
pub fn level_width(j: usize, schedule: &Schedule, dim: usize) -> f64 {
    level_length(j as i64, dim) / (8.0 * schedule.s(j, dim) as f64) - 2.0
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelFactor {
    pub j: usize,
    pub s_j: usize,
    pub width: f64,
    pub delta: f64,
    /// `1 − 2δ_j`, rounded down.
    pub factor: f64,
    /// `λ_{k0} Π_{i=k0+1}^{j} (1 − 2δ_i)/(1 + 1/s_i)`.
    pub step_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleCertificate {
    pub schedule: Schedule,
    pub name: String,
    pub dim: usize,
    pub explicit_levels: usize,
    /// `Σ_{j<=J} 1/s_j`.
    pub inverse_sum_partial: f64,
    /// Upper bound on `Σ_{j>J} 1/s_j`.
    pub inverse_sum_tail: f64,
    /// Upper bound on `Σ_{j>J} s_j/l_j`.
    pub length_ratio_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationResult {
    pub lower_bound: f64,
    pub k0: usize,
    pub lambda_k0: f64,
    /// `C = Π_{j>=1} (1 + 1/s_j)^{-1}`, certified from below.
    #[serde(rename = "C")]
    pub c: f64,
    /// Explicit part of `C` over `j <= C_LEVELS`.
    pub c_partial: f64,
    /// Lower bound on `Π_{j>C_LEVELS} (1 + 1/s_j)^{-1}`.
    pub c_tail: f64,
    pub factors: Vec<LevelFactor>,
    /// Lower bound on `Π_{j>J} (1 − 2δ_j)` past the explicit levels.
    pub tail_bound: f64,
    /// Upper bound on `Σ_{j>J} δ_j` used for `tail_bound`.
    pub tail_delta_sum: f64,
    pub schedule: ScheduleCertificate,
    pub delta_model: DeltaModel,
    pub valid: bool,
    pub reason: String,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RecursionOptions {
    pub dim: usize,
    /// `None` uses the smallest `k0` with `δ_k < 1/2` for every `k >= k0`.
    pub k0: Option<usize>,
    pub explicit_levels: usize,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        RecursionOptions {
            dim: 1,
            k0: None,
            explicit_levels: DEFAULT_EXPLICIT_LEVELS,
        }
    }
}

/// Lower bound on `Π_{j>=1} (1 + 1/s_j)^{-1}` as (total, partial, tail).
pub fn c_constant(schedule: &Schedule, dim: usize) -> (f64, f64, f64) {
    let mut partial = 1.0f64;
    for j in 1..=C_LEVELS {
        let s = schedule.s(j, dim) as f64;
        partial = round_down(partial / round_up(1.0 + 1.0 / s));
    }
    // log(1 + x) <= x, so Π_{j>J} (1+1/s_j)^{-1} >= exp(−Σ_{j>J} 1/s_j).
    let tail = round_down((-schedule.inverse_tail(C_LEVELS, dim)).exp());
    (round_down(partial * tail), partial, tail)
}

/// Smallest `k0` such that `δ_k < 1/2` for all `k >= k0`, scanning the explicit
/// horizon; `None` if δ never settles below 1/2 there.
pub fn default_k0(delta: &DeltaModel, schedule: &Schedule, dim: usize, horizon: usize) -> Option<usize> {
    let mut last_bad = 0;
    for j in 1..=horizon {
        match delta.level(j, schedule, dim) {
            Some(d) if d >= 0.5 => last_bad = j,
            Some(_) => {}
            None => break,
        }
    }
    if last_bad == horizon {
        None
    } else {
        Some(last_bad + 1)
    }
}

/// Certified upper bound on `Σ_{j>J} δ_j`, together with `δ_{J+1}`. Terms are
/// summed explicitly while they matter, checking that they do not increase;
/// the remainder is closed with the last ratio, which is non-increasing for the
/// analytic models.
fn delta_tail(delta: &DeltaModel, schedule: &Schedule, dim: usize, big_j: usize) -> Result<(f64, f64)> {
    if let DeltaModel::Constant { value } = delta {
        return if *value == 0.0 {
            Ok((0.0, 0.0))
        } else {
            Err(Error::InvalidParameter("a constant δ > 0 is not summable".into()))
        };
    }
    let first = delta
        .level(big_j + 1, schedule, dim)
        .ok_or_else(|| Error::InvalidParameter("a finite table has no certified tail".into()))?;
    let mut sum = first;
    let mut prev = first;
    let mut ratio = 0.0;
    for j in big_j + 2..big_j + 2 + TAIL_TERMS {
        let d = delta.level(j, schedule, dim).unwrap_or(1.0);
        if d > prev {
            return Err(Error::InvalidParameter(format!(
                "δ increases from level {} to {j}",
                j - 1
            )));
        }
        if d == 0.0 {
            return Ok((round_up(sum), first));
        }
        ratio = d / prev;
        sum += d;
        prev = d;
        if d <= sum * 1e-18 {
            break;
        }
    }
    if ratio >= 1.0 {
        return Err(Error::InvalidParameter("δ tail does not decay".into()));
    }
    // Remainder Σ_{i>=1} prev·ρ^i with ρ the last observed ratio.
    sum += prev * ratio / (1.0 - ratio);
    // absorb accumulated rounding in the summation
    Ok((round_up(sum * (1.0 + 1e-12)), first))
}

/// The recursion bound of the main gap theorem.
pub fn recursion_bound(
    lambda_k0: f64,
    schedule: &Schedule,
    delta: &DeltaModel,
    opts: &RecursionOptions,
) -> Result<CertificationResult> {
    if !(lambda_k0 >= 0.0 && lambda_k0.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ_k0 must be finite and >= 0, got {lambda_k0}")));
    }
    if opts.dim == 0 {
        return Err(Error::InvalidParameter("lattice dimension must be >= 1".into()));
    }
    delta.validate()?;
    let dim = opts.dim;
    let (c, c_partial, c_tail) = c_constant(schedule, dim);
    let is_table = matches!(delta, DeltaModel::Table { .. });
    let explicit = match delta {
        DeltaModel::Table { values } => values.len(),
        _ => opts.explicit_levels.max(1),
    };
    let mut warnings = Vec::new();
    let auto_k0 = default_k0(delta, schedule, dim, explicit + opts.k0.unwrap_or(0));
    let k0 = match (opts.k0, auto_k0) {
        (Some(k), _) => k,
        (None, Some(k)) => k,
        (None, None) => explicit,
    };
    let big_j = if is_table { explicit } else { k0 + explicit };

    let cert = ScheduleCertificate {
        schedule: *schedule,
        name: schedule.name(),
        dim,
        explicit_levels: C_LEVELS,
        inverse_sum_partial: (1..=C_LEVELS).map(|j| 1.0 / schedule.s(j, dim) as f64).sum(),
        inverse_sum_tail: schedule.inverse_tail(C_LEVELS, dim),
        length_ratio_tail: schedule.length_ratio_tail(C_LEVELS.min(2000 * dim), dim),
    };

    let mut factors = Vec::new();
    let mut product = 1.0f64;
    let mut step = lambda_k0;
    let mut invalid: Option<String> = None;
    for j in k0 + 1..=big_j {
        let s_j = schedule.s(j, dim);
        let width = level_width(j, schedule, dim);
        let d = match delta.level(j, schedule, dim) {
            Some(d) => d,
            None => break,
        };
        let factor = round_down((1.0 - 2.0 * d).max(0.0));
        if d >= 0.5 && invalid.is_none() {
            invalid = Some(format!("δ_{j} = {d:.6} >= 1/2 at level {j} > k0 = {k0}"));
        }
        product = round_down(product * factor);
        step = round_down(step * factor / round_up(1.0 + 1.0 / s_j as f64));
        if s_j as f64 * 8.0 > level_length(j as i64, dim) && factors.is_empty() {
            warnings.push(format!(
                "s_{j} = {s_j} exceeds l_{j}/8: no {s_j}-decomposition exists at this level"
            ));
        }
        factors.push(LevelFactor {
            j,
            s_j,
            width,
            delta: d,
            factor,
            step_bound: step,
        });
    }
    let s_last = schedule.s(big_j.max(1), dim) as f64;
    if s_last * big_j as f64 > level_length(big_j as i64, dim) {
        warnings.push(format!(
            "s_k·k/l_k = {:.3} at k = {big_j}: the regime s_k = O(l_k/k) is not reached",
            s_last * big_j as f64 / level_length(big_j as i64, dim)
        ));
    }
    if opts.k0.is_none() && auto_k0.is_none() {
        invalid.get_or_insert_with(|| "δ_k stays >= 1/2 across the explicit horizon".into());
    }

    let (tail_bound, tail_delta_sum) = if invalid.is_some() {
        (0.0, f64::INFINITY)
    } else if is_table {
        invalid = Some(format!(
            "a finite δ table certifies only levels up to {big_j}; see step_bound"
        ));
        (0.0, f64::INFINITY)
    } else {
        match delta_tail(delta, schedule, dim, big_j) {
            Ok((sum, first)) if first < 0.5 => {
                // log(1 − x) >= −x/(1 − x) with x = 2δ_j <= 2δ_{J+1}
                let t = (-2.0 * sum / round_down(1.0 - 2.0 * first)).exp();
                (round_down(t), sum)
            }
            Ok((_, first)) => {
                invalid = Some(format!("δ_{} = {first} >= 1/2 in the tail", big_j + 1));
                (0.0, f64::INFINITY)
            }
            Err(e) => {
                invalid = Some(format!("tail not certifiably summable: {e}"));
                (0.0, f64::INFINITY)
            }
        }
    };

    let valid = invalid.is_none();
    let lower_bound = if valid {
        round_down(round_down(round_down(lambda_k0 * c) * product) * tail_bound)
    } else {
        0.0
    };
    Ok(CertificationResult {
        lower_bound,
        k0,
        lambda_k0,
        c,
        c_partial,
        c_tail,
        factors,
        tail_bound,
        tail_delta_sum,
        schedule: cert,
        delta_model: delta.clone(),
        valid,
        reason: invalid.unwrap_or_else(|| "ok".into()),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RecursionOptions {
        RecursionOptions::default()
    }

    #[test]
    fn zero_delta_gives_c() {
        let r = recursion_bound(1.0, &Schedule::Square, &DeltaModel::Constant { value: 0.0 }, &opts()).unwrap();
        assert!(r.valid, "{}", r.reason);
        let exact = std::f64::consts::PI / std::f64::consts::PI.sinh();
        assert!(r.lower_bound <= exact);
        assert!(exact - r.lower_bound < 2e-5, "{}", r.lower_bound);
        assert!((0.2719..=0.2721).contains(&r.lower_bound));
    }

    #[test]
    fn delta_above_half_invalidates() {
        let mut values = vec![0.1; 10];
        values[3] = 0.6;
        let o = RecursionOptions { k0: Some(3), ..opts() };
        let r = recursion_bound(1.0, &Schedule::Square, &DeltaModel::Table { values }, &o).unwrap();
        assert!(!r.valid);
        assert!(r.reason.contains("δ_4"));
        assert_eq!(r.lower_bound, 0.0);
    }

    #[test]
    fn exponential_model_with_default_k0() {
        let d = DeltaModel::Exponential { c: 1.0, alpha: 0.5 };
        let r = recursion_bound(1.0, &Schedule::Square, &d, &opts()).unwrap();
        assert!(r.valid, "{}", r.reason);
        assert!(r.lower_bound > 0.0);
        assert!(d.level(r.k0 - 1, &Schedule::Square, 1).unwrap() >= 0.5);
        assert!(r.factors.iter().all(|f| f.delta < 0.5));
    }

    #[test]
    fn explicit_small_k0_is_rejected_for_exponential() {
        let d = DeltaModel::Exponential { c: 1.0, alpha: 0.5 };
        let o = RecursionOptions { k0: Some(3), ..opts() };
        let r = recursion_bound(1.0, &Schedule::Square, &d, &o).unwrap();
        assert!(!r.valid);
    }

    #[test]
    fn tail_bounds_are_conservative() {
        for s in [Schedule::Square, Schedule::Power { epsilon: 0.5 }, Schedule::CubeRootLength] {
            let j = 50;
            let direct: f64 = (j + 1..j + 200_000).map(|k| 1.0 / s.s(k, 1) as f64).sum();
            assert!(s.inverse_tail(j, 1) >= direct, "{}", s.name());
        }
    }

    #[test]
    fn polynomial_and_pvbs() {
        let d = DeltaModel::Polynomial { c: 1.0, alpha: 2.0 };
        let r = recursion_bound(1.0, &Schedule::Square, &d, &opts()).unwrap();
        assert!(r.valid && r.lower_bound > 0.0, "{}", r.reason);
        let d = DeltaModel::Pvbs { lambdas: vec![1.0] };
        let r = recursion_bound(1.0, &Schedule::Square, &d, &opts()).unwrap();
        assert!(!r.valid);
    }

    #[test]
    fn parse_models_and_schedules() {
        assert_eq!(
            DeltaModel::parse("exponential:c=1,alpha=0.5").unwrap(),
            DeltaModel::Exponential { c: 1.0, alpha: 0.5 }
        );
        assert!(DeltaModel::parse("exponential:c=1,alpha=1.5").is_err());
        assert_eq!(Schedule::parse("k2").unwrap(), Schedule::Square);
        assert_eq!(Schedule::parse("power:0.5").unwrap(), Schedule::Power { epsilon: 0.5 });
        assert!(Schedule::parse("power:0").is_err());
    }
}
