//! Scalars for series coefficients: the rationals and cyclotomic fields.
//!
//! A `Cyclotomic` value is `sum_i c_i w^i` with `w = exp(2 pi i / n)`, reduced
//! modulo the cyclotomic polynomial `Phi_n`, so it is stored as `phi(n)`
//! rational coefficients. Values of different orders are lifted to the least
//! common multiple before combining.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Coefficient ring of a `Series`.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn from_rational(r: Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, r: &Rational) -> Self;
    /// `w_n^k` for a primitive `n`-th root of unity `w_n`.
    fn root_of_unity(n: i64, k: i64) -> Result<Self>;
    /// The value as a rational, if it is one.
    fn to_rational(&self) -> Option<Rational>;

    fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn from_rational(r: Rational) -> Self {
        r
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
    fn root_of_unity(n: i64, k: i64) -> Result<Self> {
        assert!(n >= 1);
        let k = k.rem_euclid(n);
        if k == 0 {
            Ok(Rational::one())
        } else if 2 * k == n {
            Ok(-Rational::one())
        } else {
            Err(Error::UnsupportedField(format!(
                "w_{n}^{k} is not rational; use cyclotomic coefficients"
            )))
        }
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

fn poly_rem(mut num: Vec<Rational>, monic: &[Rational]) -> Vec<Rational> {
    let m = monic.len() - 1;
    while num.len() > m {
        let lead = num.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = num.len() - m;
        for (i, c) in monic.iter().take(m).enumerate() {
            num[shift + i] -= &(&lead * c);
        }
    }
    num.resize(m, Rational::zero());
    num
}

fn poly_div_exact(num: &[Rational], den: &[Rational]) -> Vec<Rational> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let mut quot = vec![Rational::zero(); num.len() - dl + 1];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dl - 1] / &den[dl - 1];
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= &(&c * d);
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Coefficients of `Phi_n`, ascending.
pub fn cyclotomic_polynomial(n: i64) -> Vec<Rational> {
    static CACHE: OnceLock<RwLock<HashMap<i64, Vec<Rational>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 = prod_{d | n} Phi_d
    let mut poly = vec![Rational::zero(); n as usize + 1];
    poly[0] = -Rational::one();
    poly[n as usize] = Rational::one();
    for d in 1..n {
        if n % d == 0 {
            poly = poly_div_exact(&poly, &cyclotomic_polynomial(d));
        }
    }
    cache.write().unwrap().insert(n, poly.clone());
    poly
}

#[derive(Clone)]
pub struct Cyclotomic {
    order: i64,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    fn from_powers(order: i64, powers: Vec<Rational>) -> Self {
        let phi = cyclotomic_polynomial(order);
        Cyclotomic { order, coeffs: poly_rem(powers, &phi) }
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    fn lift(&self, to: i64) -> Cyclotomic {
        if to == self.order {
            return self.clone();
        }
        let step = (to / self.order) as usize;
        let mut powers = vec![Rational::zero(); self.coeffs.len() * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            powers[i * step] = c.clone();
        }
        Cyclotomic::from_powers(to, powers)
    }

    fn common(&self, other: &Cyclotomic) -> (Cyclotomic, Cyclotomic) {
        let l = self.order.lcm(&other.order);
        (self.lift(l), other.lift(l))
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.common(other);
        a.coeffs == b.coeffs
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.to_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*w{}", self.order)?,
                _ => write!(f, "({c})*w{}^{i}", self.order)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Coeff for Cyclotomic {
    fn zero() -> Self {
        Cyclotomic { order: 1, coeffs: vec![Rational::zero()] }
    }
    fn from_rational(r: Rational) -> Self {
        Cyclotomic { order: 1, coeffs: vec![r] }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
    fn add(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Cyclotomic { order: a.order, coeffs }
    }
    fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.common(other);
        let mut powers = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len()];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                powers[i + j] += x * y;
            }
        }
        Cyclotomic::from_powers(a.order, powers)
    }
    fn neg(&self) -> Self {
        Cyclotomic { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
    fn scale(&self, r: &Rational) -> Self {
        Cyclotomic { order: self.order, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }
    fn root_of_unity(n: i64, k: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("root of unity of order {n}")));
        }
        let k = k.rem_euclid(n) as usize;
        let mut powers = vec![Rational::zero(); k + 1];
        powers[k] = Rational::one();
        Ok(Cyclotomic::from_powers(n, powers))
    }
    fn to_rational(&self) -> Option<Rational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn w(n: i64, k: i64) -> Cyclotomic {
        Cyclotomic::root_of_unity(n, k).unwrap()
    }

    #[test]
    fn cyclotomic_polynomials() {
        let ints = |n| -> Vec<i64> {
            cyclotomic_polynomial(n).iter().map(|c| c.to_i64().unwrap()).collect()
        };
        assert_eq!(ints(1), vec![-1, 1]);
        assert_eq!(ints(3), vec![1, 1, 1]);
        assert_eq!(ints(4), vec![1, 0, 1]);
        assert_eq!(ints(6), vec![1, -1, 1]);
        assert_eq!(ints(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for n in 2..=7 {
            let s = (0..n).fold(Cyclotomic::zero(), |acc, k| acc.add(&w(n, k)));
            assert!(s.is_zero(), "n = {n}");
            assert_eq!(w(n, 1).mul(&w(n, n - 1)), Cyclotomic::one());
        }
    }

    #[test]
    fn mixed_orders_lift() {
        // w_6^2 = w_3 and w_6^3 = -1
        assert_eq!(w(6, 2), w(3, 1));
        assert_eq!(w(6, 3).to_rational(), Some(-Rational::one()));
        assert_eq!(w(2, 1).mul(&w(3, 1)), w(6, 5));
        assert_eq!(w(4, 1).mul(&w(4, 1)).to_rational(), Some(-Rational::one()));
    }

    #[test]
    fn rational_roots() {
        assert_eq!(Rational::root_of_unity(2, 3).unwrap(), -Rational::one());
        assert_eq!(Rational::root_of_unity(3, 6).unwrap(), Rational::one());
        assert!(Rational::root_of_unity(3, 1).is_err());
        assert_eq!(Cyclotomic::from_rational(q(1, 2)).scale(&q(2, 1)), Cyclotomic::one());
    }
}
