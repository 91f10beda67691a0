//! Bernoulli numbers and polynomials, and the special values of the Riemann
//! and Hurwitz zeta functions at nonpositive integers.
//!
//! The convention is `B_1 = -1/2`, fixed by
//! `1/(1 - e^x) = -sum_k B_k x^(k-1) / k!`.

use std::sync::{OnceLock, RwLock};

use serde::Serialize;

use crate::poly::Poly;
use crate::rational::Rational;
use crate::series::{Series, VarSpec};

fn number_table() -> &'static RwLock<Vec<Rational>> {
    static TABLE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![Rational::one()]))
}

fn poly_table() -> &'static RwLock<Vec<Poly>> {
    static TABLE: OnceLock<RwLock<Vec<Poly>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

/// `B_k`, from `sum_{j=0}^{k} C(k+1, j) B_j = 0`.
pub fn bernoulli_number(k: usize) -> Rational {
    if let Some(b) = number_table().read().unwrap().get(k) {
        return b.clone();
    }
    let mut table = number_table().write().unwrap();
    while table.len() <= k {
        let n = table.len();
        if n > 1 && n % 2 == 1 {
            table.push(Rational::zero());
            continue;
        }
        // B_n = -1/(n+1) * sum_{j<n} C(n+1, j) B_j
        let mut binom = Rational::one();
        let mut acc = Rational::zero();
        for (j, b) in table.iter().enumerate() {
            acc += &binom * b;
            binom = binom * Rational::from_int((n + 1 - j) as i64) / Rational::from_int(j as i64 + 1);
        }
        table.push(-acc / Rational::from_int(n as i64 + 1));
    }
    table[k].clone()
}

/// `B_k(v) = sum_j C(k, j) B_j v^(k-j)`.
pub fn bernoulli_polynomial(k: usize) -> Poly {
    if let Some(p) = poly_table().read().unwrap().get(k) {
        return p.clone();
    }
    let numbers: Vec<Rational> = (0..=k).map(bernoulli_number).collect();
    let mut table = poly_table().write().unwrap();
    while table.len() <= k {
        let n = table.len();
        let mut coeffs = vec![Rational::zero(); n + 1];
        let mut binom = Rational::one();
        for (j, b) in numbers.iter().enumerate().take(n + 1) {
            coeffs[n - j] = &binom * b;
            binom = binom * Rational::from_int((n - j) as i64) / Rational::from_int(j as i64 + 1);
        }
        table.push(Poly::from_coeffs(coeffs));
    }
    table[k].clone()
}

/// `B_k(v)` evaluated at a rational point.
pub fn bernoulli_value(k: usize, v: &Rational) -> Rational {
    bernoulli_polynomial(k).eval(v)
}

/// `zeta(-s)` for `s >= 0`.
pub fn zeta_negative(s: usize) -> Rational {
    if s == 0 {
        return Rational::new(-1, 2);
    }
    -bernoulli_number(s + 1) / Rational::from_int(s as i64 + 1)
}

/// `zeta(-s, v) = -B_{s+1}(v)/(s+1)` for `s >= 0`.
pub fn hurwitz_zeta_negative(s: usize, v: &Rational) -> Rational {
    -bernoulli_value(s + 1, v) / Rational::from_int(s as i64 + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratingRow {
    pub k: usize,
    pub expected: Rational,
    pub actual: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratingReport {
    pub v: Rational,
    pub max_degree: usize,
    pub rows: Vec<GeneratingRow>,
}

impl GeneratingReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&GeneratingRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

/// Expands `e^(vx)/(1 - e^x)` by exact series division and compares the
/// coefficient of `x^(k-1)` with `-B_k(v)/k!` for `0 <= k <= max_degree`.
pub fn check_generating_function(max_degree: usize, v: &Rational) -> GeneratingReport {
    let top = max_degree as i64;
    let spec = VarSpec::new("x", 1, -2, top + 2);
    let numerator = Series::exp_scaled(spec.clone(), v, top);
    let one = Series::constant(vec![spec.clone()], Rational::one());
    let exp = Series::exp_scaled(spec, &Rational::one(), top + 1);
    let denominator = one.sub(&exp).expect("same variables");
    let quotient = numerator
        .mul(&denominator.inverse().expect("invertible"))
        .expect("window large enough");

    let rows = (0..=max_degree)
        .map(|k| {
            let expected = -bernoulli_value(k, v) / Rational::factorial(k as u32);
            let actual = quotient.coeff(&[k as i64 - 1]);
            let pass = quotient.is_trusted(&[k as i64 - 1]) && expected == actual;
            GeneratingRow { k, expected, actual, pass }
        })
        .collect();
    GeneratingReport { v: v.clone(), max_degree, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    /// Independent oracle: the power series of `x/(e^x - 1)` by long division.
    fn bernoulli_by_division(max: usize) -> Vec<Rational> {
        // e^x - 1 = x * sum_j x^j/(j+1)!, so x/(e^x-1) = 1/sum_j x^j/(j+1)!.
        let d: Vec<Rational> = (0..=max).map(|j| Rational::factorial(j as u32 + 1).recip()).collect();
        let mut inv = vec![Rational::zero(); max + 1];
        inv[0] = Rational::one();
        for n in 1..=max {
            let s: Rational = (1..=n).map(|j| &d[j] * &inv[n - j]).sum();
            inv[n] = -s;
        }
        inv.iter().enumerate().map(|(k, c)| c * &Rational::factorial(k as u32)).collect()
    }

    #[test]
    fn numbers_match_division_oracle() {
        let oracle = bernoulli_by_division(16);
        for (k, b) in oracle.iter().enumerate() {
            // x/(e^x-1) has B_1 = -1/2 as well, so the two conventions agree.
            assert_eq!(&bernoulli_number(k), b, "k = {k}");
        }
        assert_eq!(bernoulli_number(4), q(-1, 30));
        assert_eq!(bernoulli_number(2), q(1, 6));
    }

    #[test]
    fn odd_numbers_vanish() {
        for j in 1..=10 {
            assert!(bernoulli_number(2 * j + 1).is_zero());
        }
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(bernoulli_polynomial(0), Poly::one());
        assert_eq!(bernoulli_value(1, &Rational::one()), q(1, 2));
        assert_eq!(bernoulli_value(2, &q(1, 2)), q(-1, 12));
        assert_eq!(bernoulli_value(4, &q(1, 2)), q(7, 240));
        for k in 2..=12 {
            assert_eq!(bernoulli_value(k, &Rational::one()), bernoulli_number(k));
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_negative(0), q(-1, 2));
        assert_eq!(zeta_negative(1), q(-1, 12));
        assert_eq!(zeta_negative(3), q(1, 120));
        assert_eq!(hurwitz_zeta_negative(0, &Rational::one()), q(-1, 2));
        assert_eq!(hurwitz_zeta_negative(1, &Rational::zero()), q(-1, 12));
        assert_eq!(hurwitz_zeta_negative(1, &q(1, 2)), q(1, 24));
        for s in 1..=10 {
            assert_eq!(hurwitz_zeta_negative(s, &Rational::one()), zeta_negative(s));
        }
    }

    #[test]
    fn generating_function_agrees() {
        for v in [q(0, 1), q(1, 3), q(1, 2), q(2, 3), q(1, 1)] {
            let report = check_generating_function(12, &v);
            assert!(report.passed(), "{:?}", report.first_failure());
        }
        let at_one = check_generating_function(8, &Rational::one());
        let b1 = bernoulli_number(1);
        assert_eq!(at_one.rows[1].actual, -(b1 + Rational::one()));
    }

    #[test]
    fn concurrent_reads_agree() {
        let handles: Vec<_> = (0..4)
            .map(|t| std::thread::spawn(move || bernoulli_number(20 + 2 * t)))
            .collect();
        let got: Vec<Rational> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let oracle = bernoulli_by_division(26);
        for (t, b) in got.iter().enumerate() {
            assert_eq!(b, &oracle[20 + 2 * t]);
        }
    }
}
