//! Exponent pairs: wave-admissible, sharp wave-admissible and
//! wave-acceptable classes, and the conditions for inhomogeneous estimates.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::check_exponent;
use crate::error::{Error, Result};

/// Tolerance for the equalities in the exponent relations.
const EQ_TOL: f64 = 1e-12;

#[inline]
fn inv(p: f64) -> f64 {
    1.0 / p
}

/// Hölder conjugate `p' = p/(p − 1)` (`1' = ∞`, `∞' = 1`).
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn admissible_gap(q: f64, r: f64, n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0 * (0.5 - inv(r)) - inv(q)
}

/// `q, r ≥ 2`, `r ≠ ∞`, `(q, r, n) ≠ (2, ∞, 3)`, `1/q ≤ ((n−1)/2)(1/2 − 1/r)`.
pub fn is_admissible(q: f64, r: f64, n: usize) -> bool {
    if q < 2.0 || r < 2.0 || r.is_infinite() {
        return false;
    }
    if q == 2.0 && r.is_infinite() && n == 3 {
        return false;
    }
    admissible_gap(q, r, n) >= -EQ_TOL
}

/// Admissible with equality in the defining inequality.
pub fn is_sharp_admissible(q: f64, r: f64, n: usize) -> bool {
    is_admissible(q, r, n) && admissible_gap(q, r, n).abs() <= EQ_TOL
}

/// `1 ≤ q < ∞`, `2 ≤ r ≤ ∞`, `1/q < (n−1)(1/2 − 1/r)`, or `(q, r) = (∞, 2)`.
pub fn is_acceptable(q: f64, r: f64, n: usize) -> bool {
    if q.is_infinite() && r == 2.0 {
        return true;
    }
    (1.0..f64::INFINITY).contains(&q) && r >= 2.0 && inv(q) < (n as f64 - 1.0) * (0.5 - inv(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    SharpAdmissible,
    Admissible,
    AcceptableOnly,
    NotAcceptable,
}

impl PairClass {
    pub fn name(self) -> &'static str {
        match self {
            PairClass::SharpAdmissible => "sharp_admissible",
            PairClass::Admissible => "admissible",
            PairClass::AcceptableOnly => "acceptable_only",
            PairClass::NotAcceptable => "not_acceptable",
        }
    }

    pub fn is_admissible(self) -> bool {
        matches!(self, PairClass::SharpAdmissible | PairClass::Admissible)
    }
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Strongest class containing `(q, r)`. Admissible pairs with `q = ∞`,
/// `r > 2` are reported as admissible although they are not acceptable.
pub fn classify_pair(q: f64, r: f64, n: usize) -> Result<PairClass> {
    check_exponent("q", q)?;
    check_exponent("r", r)?;
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(if is_sharp_admissible(q, r, n) {
        PairClass::SharpAdmissible
    } else if is_admissible(q, r, n) {
        PairClass::Admissible
    } else if is_acceptable(q, r, n) {
        PairClass::AcceptableOnly
    } else {
        PairClass::NotAcceptable
    })
}

/// `s = n/2 − 1/q − n/r`, the data regularity in the homogeneous estimate.
pub fn strichartz_regularity(q: f64, r: f64, n: usize) -> f64 {
    n as f64 / 2.0 - inv(q) - n as f64 * inv(r)
}

/// `σ = 1/q + n/r − (n−1)/2` for the perturbed equation.
pub fn perturbed_regularity(q: f64, r: f64, n: usize) -> f64 {
    inv(q) + n as f64 * inv(r) - (n as f64 - 1.0) / 2.0
}

/// Exponents attached to one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub n: usize,
    pub q: f64,
    pub r: f64,
    /// `(q̃, r̃)` for inhomogeneous estimates.
    #[serde(default)]
    pub dual: Option<(f64, f64)>,
}

impl ExponentTuple {
    pub fn new(n: usize, q: f64, r: f64) -> Result<Self> {
        classify_pair(q, r, n)?;
        Ok(ExponentTuple { n, q, r, dual: None })
    }

    pub fn with_dual(mut self, q_tilde: f64, r_tilde: f64) -> Result<Self> {
        classify_pair(q_tilde, r_tilde, self.n)?;
        self.dual = Some((q_tilde, r_tilde));
        Ok(self)
    }

    pub fn class(&self) -> PairClass {
        classify_pair(self.q, self.r, self.n).expect("validated on construction")
    }

    pub fn s(&self) -> f64 {
        strichartz_regularity(self.q, self.r, self.n)
    }

    pub fn sigma(&self) -> f64 {
        perturbed_regularity(self.q, self.r, self.n)
    }

    pub fn inhomogeneous(&self) -> Option<InhomogeneousCheck> {
        self.dual
            .map(|(qt, rt)| check_inhomogeneous_conditions(self.q, self.r, qt, rt, self.n))
    }
}

/// Why a tuple fails the inhomogeneous conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InhomogeneousFailure {
    NotAcceptable { q: f64, r: f64 },
    InfiniteSpatialExponent,
    Gap { lhs: f64, rhs: f64 },
    SideCondition { condition: String },
    UncoveredTimeSum { sum: f64 },
}

impl fmt::Display for InhomogeneousFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InhomogeneousFailure::NotAcceptable { q, r } => write!(f, "({q}, {r}) is not wave-acceptable"),
            InhomogeneousFailure::InfiniteSpatialExponent => f.write_str("r and r~ must both be finite"),
            InhomogeneousFailure::Gap { lhs, rhs } => {
                write!(f, "gap condition fails: 1/q + 1/q~ = {lhs} but (n-1)/2 (1 - 1/r - 1/r~) = {rhs}")
            }
            InhomogeneousFailure::SideCondition { condition } => write!(f, "side condition fails: {condition}"),
            InhomogeneousFailure::UncoveredTimeSum { sum } => {
                write!(f, "1/q + 1/q~ = {sum} > 1 is outside both side-condition cases")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousCheck {
    pub passed: bool,
    pub reasons: Vec<InhomogeneousFailure>,
}

/// Conditions for the inhomogeneous estimate with pairs `(q, r)`, `(q̃, r̃)`:
/// both wave-acceptable, `r, r̃ < ∞`, the gap condition
/// `1/q + 1/q̃ = ((n−1)/2)(1 − 1/r − 1/r̃)`, and for `n > 3`
///
/// * `1/q + 1/q̃ < 1`: `(n−3)/r ≤ (n−1)/r̃` and `(n−3)/r̃ ≤ (n−1)/r`;
/// * `1/q + 1/q̃ = 1`: the same with strict inequalities, plus
///   `1/r ≤ 1/q` and `1/r̃ ≤ 1/q̃`.
pub fn check_inhomogeneous_conditions(q: f64, r: f64, qt: f64, rt: f64, n: usize) -> InhomogeneousCheck {
    let mut reasons = Vec::new();
    for (a, b) in [(q, r), (qt, rt)] {
        if !is_acceptable(a, b, n) {
            reasons.push(InhomogeneousFailure::NotAcceptable { q: a, r: b });
        }
    }
    if r.is_infinite() || rt.is_infinite() {
        reasons.push(InhomogeneousFailure::InfiniteSpatialExponent);
    }
    let nf = n as f64;
    let lhs = inv(q) + inv(qt);
    let rhs = (nf - 1.0) / 2.0 * (1.0 - inv(r) - inv(rt));
    if (lhs - rhs).abs() > EQ_TOL {
        reasons.push(InhomogeneousFailure::Gap { lhs, rhs });
    }
    if n > 3 {
        let a = (nf - 3.0) * inv(r);
        let b = (nf - 1.0) * inv(rt);
        let c = (nf - 3.0) * inv(rt);
        let d = (nf - 1.0) * inv(r);
        let mut side = |ok: bool, text: &str| {
            if !ok {
                reasons.push(InhomogeneousFailure::SideCondition {
                    condition: text.to_string(),
                });
            }
        };
        if lhs < 1.0 - EQ_TOL {
            side(a <= b + EQ_TOL, "(n-3)/r <= (n-1)/r~");
            side(c <= d + EQ_TOL, "(n-3)/r~ <= (n-1)/r");
        } else if (lhs - 1.0).abs() <= EQ_TOL {
            side(a < b - EQ_TOL, "(n-3)/r < (n-1)/r~");
            side(c < d - EQ_TOL, "(n-3)/r~ < (n-1)/r");
            side(inv(r) <= inv(q) + EQ_TOL, "1/r <= 1/q");
            side(inv(rt) <= inv(qt) + EQ_TOL, "1/r~ <= 1/q~");
        } else {
            reasons.push(InhomogeneousFailure::UncoveredTimeSum { sum: lhs });
        }
    }
    InhomogeneousCheck {
        passed: reasons.is_empty(),
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_pair(4.0, 4.0, 3).unwrap(), PairClass::SharpAdmissible);
        assert!(!is_admissible(2.0, INF, 3));
        for n in 2..5 {
            let c = classify_pair(INF, 2.0, n).unwrap();
            assert!(c.is_admissible());
            assert!(is_acceptable(INF, 2.0, n));
        }
        assert_eq!(classify_pair(INF, 4.0, 3).unwrap(), PairClass::Admissible);
        assert!(!is_acceptable(INF, 4.0, 3));
        assert_eq!(classify_pair(1.5, 8.0, 3).unwrap(), PairClass::AcceptableOnly);
        assert_eq!(classify_pair(1.0, 2.0, 3).unwrap(), PairClass::NotAcceptable);
        assert!(classify_pair(0.5, 2.0, 3).is_err());
        assert_eq!(PairClass::SharpAdmissible.to_string(), "sharp_admissible");
    }

    #[test]
    fn inhomogeneous_examples() {
        assert!(check_inhomogeneous_conditions(4.0, 4.0, 4.0, 4.0, 3).passed);
        let c = check_inhomogeneous_conditions(4.0, 4.0, 2.0, INF, 3);
        assert!(!c.passed);
        assert!(c.reasons.contains(&InhomogeneousFailure::InfiniteSpatialExponent));
    }

    #[test]
    fn regularity_relations() {
        assert!((strichartz_regularity(4.0, 4.0, 3) - 0.5).abs() < 1e-15);
        assert_eq!(strichartz_regularity(INF, 2.0, 3), 0.0);
        assert!((perturbed_regularity(4.0, 4.0, 3) - 0.0).abs() < 1e-15);
        assert_eq!(conjugate(1.0), INF);
        assert_eq!(conjugate(INF), 1.0);
        assert!((conjugate(4.0) - 4.0 / 3.0).abs() < 1e-15);
    }
}
