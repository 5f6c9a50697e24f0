//! Table sizing for the correlated sketch.
//!
//! Two conditions on the outer capacity `s1` and inner capacity `s2` make the
//! sketch's guarantees hold:
//!
//! * `1/s1 ≤ ε₁`
//! * `1/s2 + (1+φ₂)/(s1·(φ₁−ε₁)) ≤ ε₂`
//!
//! With `α = (1+φ₂)/(φ₁−ε₁)` the space `s1·s2` is minimized at
//! `s1 = 2α/ε₂, s2 = 2/ε₂` when `ε₁ ≥ ε₂/(2α)` and at
//! `s1 = 1/ε₁, s2 = 1/(ε₂ − αε₁)` otherwise. [`solve_params`] takes ceilings
//! of those values, all in exact rational arithmetic.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{ChhError, Result};
use crate::fraction::{ceil_u64, Fraction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverCase {
    /// `ε₁ ≥ ε₂/(2α)`: the unconstrained optimum is feasible.
    CaseI,
    /// `ε₁ < ε₂/(2α)`: the optimum sits on `1/s1 = ε₁`.
    CaseII,
}

impl fmt::Display for SolverCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverCase::CaseI => "I",
            SolverCase::CaseII => "II",
        })
    }
}

/// How the table sizes were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sizing {
    Solved(SolverCase),
    /// Caller-supplied sizes with caller-supplied tolerances.
    Raw,
    /// Caller-supplied sizes; the tolerances are the tightest the sizes
    /// support (`ε₁ = 1/s1`, `ε₂` at equality in the second condition).
    RawImplied,
}

/// Outcome of checking a parameter set against the sizing conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintCheck {
    /// `1/s1 ≤ ε₁`.
    pub constraint1: bool,
    /// `1/s2 + (1+φ₂)/(s1·(φ₁−ε₁)) ≤ ε₂` (false when `φ₁ ≤ ε₁`).
    pub constraint2: bool,
    /// `0 < ε₁ ≤ φ₁/2` and `0 < ε₂ ≤ φ₂`.
    pub tolerances_valid: bool,
}

impl ConstraintCheck {
    pub fn holds(&self) -> bool {
        self.constraint1 && self.constraint2 && self.tolerances_valid
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChhParams {
    pub phi1: Fraction,
    pub phi2: Fraction,
    pub eps1: Fraction,
    pub eps2: Fraction,
    pub s1: u64,
    pub s2: u64,
    pub sizing: Sizing,
}

fn ratio(v: u64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn alpha_of(phi1: &BigRational, phi2: &BigRational, eps1: &BigRational) -> Option<BigRational> {
    let gap = phi1 - eps1;
    if gap <= BigRational::zero() {
        return None;
    }
    Some((BigRational::one() + phi2) / gap)
}

fn check_thresholds(phi1: &Fraction, phi2: &Fraction) -> Result<()> {
    if !phi1.is_proper() {
        return Err(ChhError::invalid(format!("phi1 = {phi1} must lie in (0, 1)")));
    }
    if !phi2.is_proper() {
        return Err(ChhError::invalid(format!("phi2 = {phi2} must lie in (0, 1)")));
    }
    Ok(())
}

fn constraint2_holds(
    phi1: &BigRational,
    phi2: &BigRational,
    eps1: &BigRational,
    eps2: &BigRational,
    s1: u64,
    s2: u64,
) -> bool {
    match alpha_of(phi1, phi2, eps1) {
        Some(alpha) => ratio(s2).recip() + alpha / ratio(s1) <= *eps2,
        None => false,
    }
}

/// Space-minimal table sizes for the given thresholds and tolerances.
///
/// Requires `0 < φ₁, φ₂ < 1`, `0 < ε₁ ≤ φ₁/2` and `0 < ε₂ ≤ φ₂`. At
/// `ε₂ = φ₂` the secondary false-positive bound is vacuous but the sizing is
/// still well defined.
pub fn solve_params(phi1: &Fraction, phi2: &Fraction, eps1: &Fraction, eps2: &Fraction) -> Result<ChhParams> {
    check_thresholds(phi1, phi2)?;
    let half_phi1 = phi1.as_ratio() / BigRational::from_integer(2.into());
    if eps1.is_zero() || *eps1.as_ratio() > half_phi1 {
        return Err(ChhError::invalid(format!(
            "eps1 = {eps1} must satisfy 0 < eps1 <= phi1/2 = {}",
            Fraction::from_ratio(half_phi1)
        )));
    }
    if eps2.is_zero() || eps2 > phi2 {
        return Err(ChhError::invalid(format!(
            "eps2 = {eps2} must satisfy 0 < eps2 <= phi2 = {phi2}"
        )));
    }

    let (p1, p2, e1, e2) = (phi1.as_ratio(), phi2.as_ratio(), eps1.as_ratio(), eps2.as_ratio());
    let alpha = alpha_of(p1, p2, e1).expect("eps1 <= phi1/2 < phi1");
    let two = BigRational::from_integer(2.into());
    let too_big = || ChhError::invalid("table sizes do not fit in 64 bits");

    let (case, s1, mut s2) = if *e1 >= e2 / (&two * &alpha) {
        let s1 = ceil_u64(&(&two * &alpha / e2)).ok_or_else(too_big)?;
        let s2 = ceil_u64(&(&two / e2)).ok_or_else(too_big)?;
        (SolverCase::CaseI, s1, s2)
    } else {
        let s1 = ceil_u64(&e1.recip()).ok_or_else(too_big)?;
        let s2 = ceil_u64(&(e2 - &alpha * e1).recip()).ok_or_else(too_big)?;
        (SolverCase::CaseII, s1, s2)
    };

    // Ceilings only shrink 1/s1 and 1/s2, so this loop is a guard rather than
    // an expected path.
    while !constraint2_holds(p1, p2, e1, e2, s1, s2) {
        s2 = s2.checked_add(1).ok_or_else(too_big)?;
    }

    let params = ChhParams {
        phi1: phi1.clone(),
        phi2: phi2.clone(),
        eps1: eps1.clone(),
        eps2: eps2.clone(),
        s1,
        s2,
        sizing: Sizing::Solved(case),
    };
    debug_assert!(params.constraints().holds());
    Ok(params)
}

impl ChhParams {
    /// Parameters with caller-chosen table sizes.
    ///
    /// Sizes that violate the sizing conditions are accepted; inspect
    /// [`constraints`](Self::constraints). Without explicit tolerances the
    /// tightest ones the sizes support are recorded instead.
    pub fn with_sizes(
        phi1: &Fraction,
        phi2: &Fraction,
        s1: u64,
        s2: u64,
        tolerances: Option<(Fraction, Fraction)>,
    ) -> Result<Self> {
        check_thresholds(phi1, phi2)?;
        if s1 == 0 || s2 == 0 {
            return Err(ChhError::invalid("s1 and s2 must be at least 1"));
        }
        let (eps1, eps2, sizing) = match tolerances {
            Some((e1, e2)) => (e1, e2, Sizing::Raw),
            None => {
                let e1 = ratio(s1).recip();
                // With φ₁ ≤ 1/s1 no secondary guarantee exists; ε₂ = 1 says so.
                let e2 = match alpha_of(phi1.as_ratio(), phi2.as_ratio(), &e1) {
                    Some(alpha) => ratio(s2).recip() + alpha / ratio(s1),
                    None => BigRational::one(),
                };
                (Fraction::from_ratio(e1), Fraction::from_ratio(e2), Sizing::RawImplied)
            }
        };
        Ok(ChhParams {
            phi1: phi1.clone(),
            phi2: phi2.clone(),
            eps1,
            eps2,
            s1,
            s2,
            sizing,
        })
    }

    /// `(1+φ₂)/(φ₁−ε₁)`, undefined when `φ₁ ≤ ε₁`.
    pub fn alpha(&self) -> Option<Fraction> {
        alpha_of(self.phi1.as_ratio(), self.phi2.as_ratio(), self.eps1.as_ratio()).map(Fraction::from_ratio)
    }

    pub fn case(&self) -> Option<SolverCase> {
        match self.sizing {
            Sizing::Solved(c) => Some(c),
            _ => None,
        }
    }

    pub fn constraints(&self) -> ConstraintCheck {
        let (p1, p2, e1, e2) = (
            self.phi1.as_ratio(),
            self.phi2.as_ratio(),
            self.eps1.as_ratio(),
            self.eps2.as_ratio(),
        );
        let half_phi1 = p1 / BigRational::from_integer(2.into());
        ConstraintCheck {
            constraint1: ratio(self.s1).recip() <= *e1,
            constraint2: constraint2_holds(p1, p2, e1, e2, self.s1, self.s2),
            tolerances_valid: !e1.is_zero() && *e1 <= half_phi1 && !e2.is_zero() && e2 <= p2,
        }
    }
}
