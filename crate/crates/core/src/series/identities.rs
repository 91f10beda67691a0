//! Coefficientwise checks of the basic delta-function identities.
//!
//! With the binomial expansion convention (expand in nonnegative powers of
//! the second summand):
//!
//! * `x2^-1 d((x1-x0)/x2) = x1^-1 d((x2+x0)/x1)`
//! * `x0^-1 d((x1-x2)/x0) - x0^-1 d((x2-x1)/(-x0)) = x2^-1 d((x1-x0)/x2)`
//! * `d(x) = (1/p) sum_r d(w^r x^(1/p))`
//! * `x2^-1 d(w^r ((x1-x0)/x2)^(1/p)) = x1^-1 d(w^-r ((x2+x0)/x1)^(1/p))`
//!
//! where `d` is the formal delta function and `w` a primitive `p`-th root of
//! unity. Every check compares both sides on the window where both are
//! trusted and requires a nonzero coefficient to be among the compared ones,
//! so an empty window cannot pass vacuously.

use serde::Serialize;

use super::{Series, VarSpec};
use crate::cyclotomic::{Coeff, Cyclotomic};
use crate::error::Result;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityOutcome {
    pub identity: String,
    pub r: Option<i64>,
    /// Exponent tuples compared on the common trusted window.
    pub compared: usize,
    pub pass: bool,
    /// First differing exponent tuple with both coefficients.
    pub witness: Option<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub variables: Vec<String>,
    pub exponent: Vec<String>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub p: i64,
    pub window: i64,
    pub outcomes: Vec<IdentityOutcome>,
}

impl DeltaReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

fn outcome<S: Coeff>(name: &str, r: Option<i64>, lhs: &Series<S>, rhs: &Series<S>) -> Result<IdentityOutcome> {
    let (compared, diff) = lhs.compare(rhs)?;
    let witness = diff.map(|e| Mismatch {
        variables: lhs.vars().iter().map(|v| v.name.clone()).collect(),
        exponent: lhs.format_exponent(&e),
        lhs: lhs.coeff(&e).to_string(),
        rhs: rhs.coeff(&e).to_string(),
    });
    let nonvacuous = lhs.terms().any(|(e, _)| rhs.is_trusted(e)) || rhs.terms().any(|(e, _)| lhs.is_trusted(e));
    Ok(IdentityOutcome { identity: name.to_string(), r, compared, pass: witness.is_none() && nonvacuous, witness })
}

fn integral_vars(window: i64) -> Vec<VarSpec> {
    ["x0", "x1", "x2"].iter().map(|n| VarSpec::symmetric(n, 1, window)).collect()
}

/// `x^e` times a series, as a product with an exact monomial.
fn times_monomial<S: Coeff>(s: &Series<S>, exps: Vec<i64>) -> Result<Series<S>> {
    s.mul(&Series::monomial(s.vars().to_vec(), exps, S::one()))
}

/// Both sides of the two-term identity.
pub fn two_term_sides(window: i64) -> Result<(Series, Series)> {
    let vars = integral_vars(window);
    let lhs = Series::delta_binomial(vars.clone(), (1, 1), (0, -1), (2, 1), 1, 0)?;
    let lhs = times_monomial(&lhs, vec![0, 0, -1])?;
    let rhs = Series::delta_binomial(vars, (2, 1), (0, 1), (1, 1), 1, 0)?;
    let rhs = times_monomial(&rhs, vec![0, -1, 0])?;
    Ok((lhs, rhs))
}

/// The two left-hand terms and the right-hand side of the three-term
/// identity, before the left-hand terms are combined.
pub fn three_term_parts(window: i64) -> Result<(Series, Series, Series)> {
    let vars = integral_vars(window);
    let a = Series::delta_binomial(vars.clone(), (1, 1), (2, -1), (0, 1), 1, 0)?;
    let a = times_monomial(&a, vec![-1, 0, 0])?;
    let b = Series::delta_binomial(vars.clone(), (2, 1), (1, -1), (0, -1), 1, 0)?;
    let b = times_monomial(&b, vec![-1, 0, 0])?;
    let c = Series::delta_binomial(vars, (1, 1), (0, -1), (2, 1), 1, 0)?;
    let c = times_monomial(&c, vec![0, 0, -1])?;
    Ok((a, b, c))
}

fn fractional_vars(p: i64, window: i64) -> Vec<VarSpec> {
    vec![VarSpec::symmetric("x0", 1, window), VarSpec::symmetric("x1", p, window), VarSpec::symmetric("x2", p, window)]
}

/// Both sides of the fractional two-term identity for root index `r`.
pub fn fractional_two_term_sides(p: i64, r: i64, window: i64) -> Result<(Series<Cyclotomic>, Series<Cyclotomic>)> {
    let vars = fractional_vars(p, window);
    let lhs = Series::delta_binomial(vars.clone(), (1, 1), (0, -1), (2, 1), p, r)?;
    let lhs = times_monomial(&lhs, vec![0, 0, -p])?;
    let rhs = Series::delta_binomial(vars, (2, 1), (0, 1), (1, 1), p, -r)?;
    let rhs = times_monomial(&rhs, vec![0, -p, 0])?;
    Ok((lhs, rhs))
}

/// Verifies all four identities for period `p` on windows of the given
/// half-width. The two identities without fractional powers do not depend
/// on `p` and are checked as stated.
pub fn check_delta_identities(p: i64, window: i64) -> Result<DeltaReport> {
    let mut outcomes = Vec::new();

    let (lhs, rhs) = two_term_sides(window)?;
    outcomes.push(outcome("two-term", None, &lhs, &rhs)?);

    let (a, b, c) = three_term_parts(window)?;
    outcomes.push(outcome("three-term", None, &a.sub(&b)?, &c)?);

    // d(x) = (1/p) sum_r d(w^r x^(1/p)), with x in (1/p)Z.
    let x = vec![VarSpec::symmetric("x", p, window)];
    let whole = Series::<Cyclotomic>::delta_monomial(x.clone(), &[p], None)?;
    let mut avg = Series::<Cyclotomic>::zero(x.clone());
    for r in 0..p {
        avg = avg.add(&Series::delta_monomial(x.clone(), &[1], Some((p, r)))?)?;
    }
    let avg = avg.scale(&Rational::new(1, p));
    outcomes.push(outcome("root-average", None, &whole, &avg)?);

    for r in 0..p {
        let (lhs, rhs) = fractional_two_term_sides(p, r, window)?;
        outcomes.push(outcome("fractional-two-term", Some(r), &lhs, &rhs)?);

        // The same left-hand side, obtained from r = 0 by x2^(1/p) -> w^-r x2^(1/p).
        let (base, _) = fractional_two_term_sides(p, 0, window)?;
        let substituted = base.substitute_root(2, -r)?;
        outcomes.push(outcome("fractional-substitution", Some(r), &substituted, &lhs)?);
    }

    Ok(DeltaReport { p, window, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn all_identities_hold() {
        for p in 1..=3 {
            let report = check_delta_identities(p, 6).unwrap();
            for o in &report.outcomes {
                assert!(o.pass, "p = {p}: {o:?}");
                assert!(o.compared > 0);
            }
        }
    }

    /// The three-term identity is often quoted with a plus sign between the
    /// two left-hand terms. That version is false: at x0^-1 x1^0 x2^0 the
    /// left side is 2 and the right side is 0.
    #[test]
    fn plus_sign_three_term_fails() {
        let (a, b, c) = three_term_parts(6).unwrap();
        let plus = a.add(&b).unwrap();
        let (_, diff) = plus.compare(&c).unwrap();
        assert!(diff.is_some());
        assert_eq!(plus.coeff(&[-1, 0, 0]), q(2, 1));
        assert!(c.coeff(&[-1, 0, 0]).is_zero());
        assert!(c.is_trusted(&[-1, 0, 0]));
    }

    #[test]
    fn two_term_coefficients_are_binomials() {
        // coefficient of x0^a x1^b x2^c with a + b + c = -1 is C(-1-b, a)
        let (lhs, _) = two_term_sides(6).unwrap();
        for a in 0..=4i64 {
            for b in -4..=4i64 {
                let c = -1 - a - b;
                if !(-6..=5).contains(&c) {
                    continue;
                }
                let expected = Rational::binomial(&Rational::from_int(-1 - b), a as u32);
                assert_eq!(lhs.coeff(&[a, b, c]), expected, "{a} {b} {c}");
            }
        }
    }

    #[test]
    fn rational_roots_suffice_for_period_two() {
        let x = vec![VarSpec::symmetric("x", 2, 5)];
        let whole = Series::<Rational>::delta_monomial(x.clone(), &[2], None).unwrap();
        let avg = Series::<Rational>::delta_monomial(x.clone(), &[1], Some((2, 0)))
            .unwrap()
            .add(&Series::delta_monomial(x.clone(), &[1], Some((2, 1))).unwrap())
            .unwrap()
            .scale(&q(1, 2));
        assert_eq!(whole.compare(&avg).unwrap().1, None);
        assert!(Series::<Rational>::delta_monomial(vec![VarSpec::symmetric("x", 3, 2)], &[1], Some((3, 1))).is_err());
    }
}
