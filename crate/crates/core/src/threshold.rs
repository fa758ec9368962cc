//! Finite-size gap thresholds: the classical nearest-neighbour values and the
//! `C log(n)^{2+ε}/n` bound that every gapless model must eventually fall under.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    Chain,
    Hexagonal,
    Square,
    /// Any other geometry: only the logarithmic threshold applies.
    Other,
}

impl LatticeKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "chain" | "1d" => Ok(LatticeKind::Chain),
            "hexagonal" | "hex" => Ok(LatticeKind::Hexagonal),
            "square" => Ok(LatticeKind::Square),
            "other" => Ok(LatticeKind::Other),
            _ => Err(Error::InvalidParameter(format!("unknown lattice kind `{s}`"))),
        }
    }
}

/// An unreduced fraction, kept as written in the reference table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalThresholds {
    /// `1/(n−1)`, 1D.
    pub knabe_chain: Fraction,
    /// `6/(n(n+1))`, 1D.
    pub gosset_chain: Fraction,
    /// `1/(3n−1)`, hexagonal.
    pub knabe_hexagonal: Fraction,
    /// `8/n²`, square.
    pub gosset_square: Fraction,
}

pub fn classical_thresholds(n: u64) -> Result<ClassicalThresholds> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("thresholds need n >= 2, got {n}")));
    }
    Ok(ClassicalThresholds {
        knabe_chain: Fraction { num: 1, den: n - 1 },
        gosset_chain: Fraction {
            num: 6,
            den: n * (n + 1),
        },
        knabe_hexagonal: Fraction {
            num: 1,
            den: 3 * n - 1,
        },
        gosset_square: Fraction { num: 8, den: n * n },
    })
}

/// `C log(n)^{2+ε}/n`.
pub fn log_threshold(n: u64, c: f64, epsilon: f64) -> f64 {
    c * (n as f64).ln().powf(2.0 + epsilon) / n as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdRow {
    pub n: u64,
    pub gap: f64,
    pub classical: ClassicalThresholds,
    pub log_threshold: f64,
    /// Names of the thresholds relevant to the lattice kind that `gap` exceeds.
    pub cleared: Vec<String>,
    /// Names of the relevant thresholds that `gap` does not exceed.
    pub below: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    pub lattice: LatticeKind,
    pub c: f64,
    pub epsilon: f64,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdRow {
    /// Whether `gap` exceeds all four classical values, whatever the lattice.
    pub fn clears_all_classical(&self) -> bool {
        let c = &self.classical;
        [c.knabe_chain, c.gosset_chain, c.knabe_hexagonal, c.gosset_square]
            .iter()
            .all(|f| self.gap > f.value())
    }
}

impl ThresholdReport {
    /// Whether every gap lies below the named threshold.
    pub fn all_below(&self, name: &str) -> bool {
        self.rows.iter().all(|r| r.below.iter().any(|b| b == name))
    }

    pub fn all_cleared(&self) -> bool {
        self.rows.iter().all(|r| r.below.is_empty())
    }
}

/// Compare measured gaps `(n, λ_n)` against the thresholds for `lattice`.
pub fn threshold_check(gaps: &[(u64, f64)], lattice: LatticeKind, c: f64, epsilon: f64) -> Result<ThresholdReport> {
    if !(c > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("C and ε must be positive".into()));
    }
    let mut rows = Vec::with_capacity(gaps.len());
    for &(n, gap) in gaps {
        let t = classical_thresholds(n)?;
        let log = log_threshold(n, c, epsilon);
        let mut relevant: Vec<(&str, f64)> = match lattice {
            LatticeKind::Chain => vec![("knabe_chain", t.knabe_chain.value()), ("gosset_chain", t.gosset_chain.value())],
            LatticeKind::Hexagonal => vec![("knabe_hexagonal", t.knabe_hexagonal.value())],
            LatticeKind::Square => vec![("gosset_square", t.gosset_square.value())],
            LatticeKind::Other => vec![],
        };
        relevant.push(("log", log));
        let (mut cleared, mut below) = (Vec::new(), Vec::new());
        for (name, v) in relevant {
            if gap > v {
                cleared.push(name.to_string());
            } else {
                below.push(name.to_string());
            }
        }
        rows.push(ThresholdRow {
            n,
            gap,
            classical: t,
            log_threshold: log,
            cleared,
            below,
        });
    }
    Ok(ThresholdReport {
        lattice,
        c,
        epsilon,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values_at_ten() {
        let t = classical_thresholds(10).unwrap();
        assert_eq!(t.knabe_chain, Fraction { num: 1, den: 9 });
        assert_eq!(t.gosset_chain, Fraction { num: 6, den: 110 });
        assert_eq!(t.knabe_hexagonal, Fraction { num: 1, den: 29 });
        assert_eq!(t.gosset_square, Fraction { num: 8, den: 100 });
    }

    #[test]
    fn small_n_rejected() {
        assert!(classical_thresholds(1).is_err());
        assert!(threshold_check(&[(1, 0.5)], LatticeKind::Chain, 1.0, 1.0).is_err());
    }

    #[test]
    fn unit_gap_clears_classical_levels() {
        let r = threshold_check(&[(10, 1.0)], LatticeKind::Chain, 1.0, 1.0).unwrap();
        assert!(r.rows[0].clears_all_classical());
        // with C = 1, ε = 1 the logarithmic level is ln(10)³/10 > 1
        assert_eq!(r.rows[0].below, vec!["log".to_string()]);
        let ferro = 1.0 - (std::f64::consts::PI / 8.0).cos();
        let r = threshold_check(&[(8, ferro)], LatticeKind::Chain, 1.0, 1.0).unwrap();
        assert!(r.all_below("knabe_chain"));
    }
}
