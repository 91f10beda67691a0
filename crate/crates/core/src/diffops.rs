//! The central extension of the Lie algebra of differential operators on the
//! circle, restricted to the subalgebra spanned by
//! `L_n^(r) = (-1)^(r+1) D^r (t^n D) D^r` with `D = t d/dt`.
//!
//! Operators are kept in t-normal form `sum_n t^n f_n(D) + c * central`,
//! using `D^r t^n = t^n (D + n)^r`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::bernoulli::zeta_negative;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DOp {
    terms: BTreeMap<i64, Poly>,
    central: Rational,
}

impl DOp {
    pub fn zero() -> Self {
        DOp::default()
    }

    /// `t^n f(D)`.
    pub fn term(n: i64, f: Poly) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(n, f);
        }
        DOp { terms, central: Rational::zero() }
    }

    /// `c` times the central element.
    pub fn central_element(c: Rational) -> Self {
        DOp { terms: BTreeMap::new(), central: c }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Poly)> {
        self.terms.iter().map(|(n, f)| (*n, f))
    }

    /// The polynomial multiplying `t^n`, zero if absent.
    pub fn component(&self, n: i64) -> Poly {
        self.terms.get(&n).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn central(&self) -> &Rational {
        &self.central
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.central.is_zero()
    }

    pub fn add(&self, other: &DOp) -> DOp {
        let mut terms = self.terms.clone();
        for (n, g) in &other.terms {
            let sum = terms.get(n).map_or_else(|| g.clone(), |f| f + g);
            if sum.is_zero() {
                terms.remove(n);
            } else {
                terms.insert(*n, sum);
            }
        }
        DOp { terms, central: &self.central + &other.central }
    }

    pub fn scale(&self, c: &Rational) -> DOp {
        if c.is_zero() {
            return DOp::zero();
        }
        let terms = self.terms.iter().map(|(n, f)| (*n, f.scale(c))).collect();
        DOp { terms, central: &self.central * c }
    }

    pub fn sub(&self, other: &DOp) -> DOp {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Image of the monomial `t^a` under the non-central part:
    /// `t^n f(D) t^a = f(a) t^(n+a)`.
    pub fn apply_monomial(&self, a: i64) -> BTreeMap<i64, Rational> {
        let at = Rational::from_int(a);
        self.terms
            .iter()
            .map(|(n, f)| (n + a, f.eval(&at)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// The first index where two operators differ, as a readable string.
    pub fn first_difference(&self, other: &DOp) -> Option<String> {
        let keys: std::collections::BTreeSet<i64> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        for n in keys {
            let (f, g) = (self.component(n), other.component(n));
            if f != g {
                return Some(format!("t^{n}: {f} vs {g}"));
            }
        }
        if self.central != other.central {
            return Some(format!("central: {} vs {}", self.central, other.central));
        }
        None
    }
}

impl fmt::Display for DOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(|(n, p)| format!("t^{n}*({p})")).collect();
        if !self.central.is_zero() {
            parts.push(format!("({})*c", self.central));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for DOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            terms: BTreeMap<String, String>,
            central: Rational,
        }
        let terms = self.terms.iter().map(|(n, p)| (n.to_string(), p.to_string())).collect();
        Wire { terms, central: self.central.clone() }.serialize(s)
    }
}

/// `L_n^(r)` in t-normal form: `t^n (-1)^(r+1) (D+n)^r D^(r+1)`.
pub fn make_l(n: i64, r: u32) -> DOp {
    let f = Poly::linear(Rational::from_int(n)).pow(r) * Poly::x().pow(r + 1);
    DOp::term(n, f.scale(&Rational::sign_power(r as i64 + 1)))
}

/// The shift of `L_0^(r)` by the zeta value that turns every central term
/// into a pure monomial in the mode.
pub fn lbar_shift(r: u32) -> Rational {
    Rational::sign_power(r as i64) * zeta_negative(1 + 2 * r as usize) / Rational::from_int(2)
}

/// `L_n^(r) + delta_{n,0} (-1)^r zeta(-1-2r)/2 c`.
pub fn make_lbar(n: i64, r: u32) -> DOp {
    let l = make_l(n, r);
    if n == 0 {
        l.add(&DOp::central_element(lbar_shift(r)))
    } else {
        l
    }
}

/// `Psi(t^m f, t^n g)` on single terms.
fn psi_terms(m: i64, f: &Poly, n: i64, g: &Poly) -> Rational {
    if m + n != 0 || m == 0 {
        return Rational::zero();
    }
    if m < 0 {
        return -psi_terms(n, g, m, f);
    }
    (1..=m)
        .map(|i| f.eval(&Rational::from_int(-i)) * g.eval(&Rational::from_int(m - i)))
        .sum()
}

/// The 2-cocycle `Psi`, extended bilinearly; central parts pair to zero.
pub fn psi_cocycle(a: &DOp, b: &DOp) -> Rational {
    let mut acc = Rational::zero();
    for (m, f) in &a.terms {
        if let Some(g) = b.terms.get(&-m) {
            acc += psi_terms(*m, f, -m, g);
        }
    }
    acc
}

/// Scale of `Psi` in the bracket of the subalgebra.
pub fn cocycle_normalization() -> Rational {
    Rational::new(-1, 2)
}

/// The bracket with central term `-1/2 Psi`.
pub fn bracket(a: &DOp, b: &DOp) -> DOp {
    bracket_with_cocycle(a, b, &cocycle_normalization())
}

/// The bracket with central term `cocycle * Psi`. Only the default scale
/// gives a Lie algebra matching the Fock realization; other values exist for
/// negative controls.
pub fn bracket_with_cocycle(a: &DOp, b: &DOp, cocycle: &Rational) -> DOp {
    let mut out = DOp::zero();
    for (m, f) in &a.terms {
        let fm = Rational::from_int(*m);
        for (n, g) in &b.terms {
            let fnn = Rational::from_int(*n);
            // [t^m f(D), t^n g(D)] = t^(m+n) (f(D+n) g(D) - g(D+m) f(D))
            let poly = f.shift(&fnn) * g.clone() - g.shift(&fm) * f.clone();
            out = out.add(&DOp::term(m + n, poly));
        }
    }
    out.add(&DOp::central_element(cocycle * &psi_cocycle(a, b)))
}

/// Polynomial in two variables, keyed by `(deg x1, deg x2)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BiPoly {
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rational)>>(it: I) -> Self {
        let mut p = BiPoly::default();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: (u32, u32), c: Rational) {
        if c.is_zero() {
            return;
        }
        let sum = self.terms.get(&e).map_or_else(|| c.clone(), |a| a + &c);
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum);
        }
    }

    /// `f(x1)` or `f(x2)` as a two-variable polynomial.
    pub fn in_var(f: &Poly, second: bool) -> Self {
        BiPoly::from_terms(
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| (if second { (0, k as u32) } else { (k as u32, 0) }, c.clone())),
        )
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::default();
        for ((a1, a2), c) in &self.terms {
            for ((b1, b2), d) in &other.terms {
                out.add_term((a1 + b1, a2 + b2), c * d);
            }
        }
        out
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> BiPoly {
        BiPoly::from_terms(self.terms.iter().map(|(e, a)| (*e, a * c)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|((a, b), c)| self.terms.get(&(*b, *a)) == Some(c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: u32, b: u32) -> Rational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
    }
}

/// Writes a symmetric polynomial as `sum_i g_i(x1 + x2) (x1 x2)^i` and returns
/// the `g_i`.
pub fn symmetric_decompose(poly: &BiPoly) -> Result<BTreeMap<u32, Poly>> {
    if !poly.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    let e1 = BiPoly::from_terms([((1, 0), Rational::one()), ((0, 1), Rational::one())]);
    let mut rest = poly.clone();
    let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
    // The lex-leading term c x1^a x2^b (a >= b) is also the leading term of
    // c e1^(a-b) e2^b; subtracting it strictly lowers the leading term.
    while let Some((&(a, b), c)) = rest.terms.iter().next_back() {
        let c = c.clone();
        let mut piece = BiPoly::from_terms([((b, b), c.clone())]);
        for _ in 0..(a - b) {
            piece = piece.mul(&e1);
        }
        rest = rest.add(&piece.scale(&-Rational::one()));
        let g = out.entry(b).or_insert_with(Poly::zero);
        *g = &*g + &Poly::monomial(c, (a - b) as usize);
    }
    out.retain(|_, g| !g.is_zero());
    Ok(out)
}

/// `f^(r,s)(n; x1, x2) = (-1)^(s+1) ((x2+n)^(r+s+1) x1^r x2^s + (x1+n)^(r+s+1) x1^s x2^r)`.
pub fn structure_polynomial(r: u32, s: u32, n: i64) -> BiPoly {
    let shift = Poly::linear(Rational::from_int(n)).pow(r + s + 1);
    let x = Poly::x();
    let first = BiPoly::in_var(&shift, true).mul(&BiPoly::in_var(&x.pow(r), false)).mul(&BiPoly::in_var(&x.pow(s), true));
    let second = BiPoly::in_var(&shift, false).mul(&BiPoly::in_var(&x.pow(s), false)).mul(&BiPoly::in_var(&x.pow(r), true));
    first.add(&second).scale(&Rational::sign_power(s as i64 + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureConstants {
    pub r: u32,
    pub s: u32,
    pub m: i64,
    pub n: i64,
    /// `a_i` for every `min(r,s) <= i <= r+s`, zeros included.
    pub values: BTreeMap<u32, Rational>,
    /// Central coefficient in the shifted basis, present when `m + n = 0`.
    pub central: Option<Rational>,
}

/// `(r+s+1)!^2 / (2 (2(r+s)+3)!) * m^(2(r+s)+3)`: the central term of
/// `[Lbar_m^(r), Lbar_-m^(s)]`.
pub fn bar_central(r: u32, s: u32, m: i64) -> Rational {
    let k = r + s;
    let f = Rational::factorial(k + 1);
    &f * &f / (Rational::from_int(2) * Rational::factorial(2 * k + 3)) * Rational::from_int(m).pow(2 * k as i32 + 3)
}

/// `a_i^(r,s)(m,n) = f_i^(r,s)(n; -m-n)`.
pub fn structure_constants(r: u32, s: u32, m: i64, n: i64) -> StructureConstants {
    let parts = symmetric_decompose(&structure_polynomial(r, s, n)).expect("symmetric by construction");
    let at = Rational::from_int(-m - n);
    let values = (r.min(s)..=r + s)
        .map(|i| (i, parts.get(&i).map_or_else(Rational::zero, |g| g.eval(&at))))
        .collect();
    let central = (m + n == 0).then(|| bar_central(r, s, m));
    StructureConstants { r, s, m, n, values, central }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bl2cocReport {
    pub r: u32,
    pub s: u32,
    pub m: i64,
    pub n: i64,
    pub pass: bool,
    pub bracket: DOp,
    pub expected: DOp,
    pub difference: Option<String>,
}

/// Compares `[Lbar_m^(r), Lbar_n^(s)]` from the bracket with
/// `sum_i a_i Lbar_(m+n)^(i) + delta_{m+n,0} bar_central(r,s,m) c`.
pub fn verify_bl2coc(r: u32, s: u32, m: i64, n: i64) -> Bl2cocReport {
    verify_bl2coc_with(r, s, m, n, &cocycle_normalization())
}

/// `verify_bl2coc` with the bracket's cocycle scale replaced.
pub fn verify_bl2coc_with(r: u32, s: u32, m: i64, n: i64, cocycle: &Rational) -> Bl2cocReport {
    let lhs = bracket_with_cocycle(&make_lbar(m, r), &make_lbar(n, s), cocycle);
    let sc = structure_constants(r, s, m, n);
    let mut rhs = DOp::zero();
    for (i, a) in &sc.values {
        rhs = rhs.add(&make_lbar(m + n, *i).scale(a));
    }
    if let Some(c) = &sc.central {
        rhs = rhs.add(&DOp::central_element(c.clone()));
    }
    let difference = lhs.first_difference(&rhs);
    Bl2cocReport { r, s, m, n, pass: difference.is_none(), bracket: lhs, expected: rhs, difference }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    /// Step-by-step action of `(-1)^(r+1) D^r (t^n D) D^r` on `t^a`.
    fn composed_action(n: i64, rr: u32, a: i64) -> (i64, Rational) {
        let apply_d = |(e, c): (i64, Rational)| (e, c * r(e));
        let mut v = (a, Rational::one());
        for _ in 0..rr {
            v = apply_d(v);
        }
        v = apply_d(v);
        v = (v.0 + n, v.1);
        for _ in 0..rr {
            v = apply_d(v);
        }
        (v.0, v.1 * Rational::sign_power(rr as i64 + 1))
    }

    #[test]
    fn generator_examples() {
        assert_eq!(make_l(1, 0), DOp::term(1, Poly::from_ints(&[0, -1])));
        assert_eq!(make_l(0, 1), DOp::term(0, Poly::from_ints(&[0, 0, 0, 1])));
        // (D+2) D^2
        assert_eq!(make_l(2, 1), DOp::term(2, Poly::from_ints(&[0, 0, 2, 1])));
    }

    #[test]
    fn normal_form_matches_composed_action() {
        for n in -3..=3 {
            for rr in 0..=3 {
                let op = make_l(n, rr);
                for a in -5..=5 {
                    let (e, c) = composed_action(n, rr, a);
                    let got = op.apply_monomial(a);
                    assert_eq!(got.get(&e).cloned().unwrap_or_else(Rational::zero), c, "n={n} r={rr} a={a}");
                    assert!(got.keys().all(|k| *k == e));
                }
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let b = bracket(&make_l(1, 0), &make_l(-1, 0));
        assert_eq!(b, make_l(0, 0).scale(&r(2)));
        let b = bracket(&make_l(2, 0), &make_l(-2, 0));
        assert_eq!(b, make_l(0, 0).scale(&r(4)).add(&DOp::central_element(q(1, 2))));
        let a = make_l(3, 2);
        assert!(bracket(&a, &a).is_zero());
    }

    #[test]
    fn cocycle_examples() {
        assert!(psi_cocycle(&make_l(1, 0), &make_l(-1, 0)).is_zero());
        assert_eq!(psi_cocycle(&make_l(2, 0), &make_l(-2, 0)), r(-1));
        assert_eq!(psi_cocycle(&make_l(-2, 0), &make_l(2, 0)), r(1));
        let f = make_l(2, 1).add(&make_l(-2, 1));
        assert!(psi_cocycle(&f, &f).is_zero());
    }

    #[test]
    fn shifted_generators() {
        assert_eq!(make_lbar(0, 0), make_l(0, 0).add(&DOp::central_element(q(-1, 24))));
        assert_eq!(make_lbar(1, 5), make_l(1, 5));
        assert_eq!(make_lbar(0, 1), make_l(0, 1).add(&DOp::central_element(q(-1, 240))));
    }

    fn spanning_set() -> Vec<DOp> {
        (-3..=3).flat_map(|n| (0..=2).map(move |rr| make_l(n, rr))).collect()
    }

    #[test]
    fn antisymmetry() {
        let set = spanning_set();
        for a in &set {
            for b in &set {
                assert_eq!(bracket(a, b), bracket(b, a).scale(&r(-1)));
            }
        }
    }

    #[test]
    fn jacobi_identity() {
        let set = spanning_set();
        for (i, a) in set.iter().enumerate() {
            for (j, b) in set.iter().enumerate().skip(i) {
                for c in set.iter().skip(j) {
                    let sum = bracket(a, &bracket(b, c))
                        .add(&bracket(b, &bracket(c, a)))
                        .add(&bracket(c, &bracket(a, b)));
                    assert!(sum.is_zero(), "{a} | {b} | {c}: {sum}");
                }
            }
        }
    }

    #[test]
    fn virasoro_relations() {
        for m in -5..=5i64 {
            for n in -5..=5i64 {
                let got = bracket(&make_l(m, 0), &make_l(n, 0));
                let mut want = make_l(m + n, 0).scale(&r(m - n));
                if m + n == 0 {
                    want = want.add(&DOp::central_element(Rational::new(m * m * m - m, 12)));
                }
                assert_eq!(got, want, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let e1 = BiPoly::from_terms([((1, 0), r(1)), ((0, 1), r(1))]);
        assert_eq!(symmetric_decompose(&e1).unwrap(), BTreeMap::from([(0, Poly::x())]));
        let e2 = BiPoly::from_terms([((1, 1), r(1))]);
        assert_eq!(symmetric_decompose(&e2).unwrap(), BTreeMap::from([(1, Poly::one())]));
        let p = BiPoly::from_terms([((2, 1), r(1)), ((1, 2), r(1))]);
        assert_eq!(symmetric_decompose(&p).unwrap(), BTreeMap::from([(1, Poly::x())]));
        let bad = BiPoly::from_terms([((1, 0), r(1))]);
        assert!(matches!(symmetric_decompose(&bad), Err(Error::Asymmetric)));
    }

    /// Rebuilds the polynomial from its parts.
    fn recompose(parts: &BTreeMap<u32, Poly>) -> BiPoly {
        let e1 = BiPoly::from_terms([((1, 0), r(1)), ((0, 1), r(1))]);
        let mut out = BiPoly::default();
        for (i, g) in parts {
            let mut pow = BiPoly::from_terms([((*i, *i), r(1))]);
            for c in g.coeffs() {
                out = out.add(&pow.scale(c));
                pow = pow.mul(&e1);
            }
        }
        out
    }

    #[test]
    fn structure_polynomials_decompose_exactly() {
        for rr in 0..=3 {
            for s in 0..=3 {
                for n in -3..=3 {
                    let f = structure_polynomial(rr, s, n);
                    let parts = symmetric_decompose(&f).unwrap();
                    assert_eq!(recompose(&parts), f);
                    assert!(parts.keys().all(|i| (rr.min(s)..=rr + s).contains(i)));
                }
            }
        }
    }

    #[test]
    fn structure_constant_examples() {
        for (m, n) in [(2, -2), (3, 1), (-1, 4)] {
            let sc = structure_constants(0, 0, m, n);
            assert_eq!(sc.values, BTreeMap::from([(0, r(m - n))]));
        }
        assert_eq!(structure_constants(0, 0, 2, -2).central, Some(q(2, 3)));
        let keys: Vec<u32> = structure_constants(1, 2, 0, 0).values.keys().copied().collect();
        assert_eq!(keys, vec![1, 2, 3]);
    }

    /// `f_i^(r,s)(n, x)` is homogeneous of degree `2(r+s-i)+1` in `(n, x)`:
    /// scaling both by `lambda` scales the value by `lambda^deg`.
    #[test]
    fn structure_constants_are_homogeneous() {
        for rr in 0..=2 {
            for s in 0..=2 {
                for (n, x) in [(1i64, 2i64), (-2, 3), (3, -1)] {
                    let base = symmetric_decompose(&structure_polynomial(rr, s, n)).unwrap();
                    let scaled = symmetric_decompose(&structure_polynomial(rr, s, 2 * n)).unwrap();
                    for (i, g) in &base {
                        let deg = 2 * (rr + s - i) as i32 + 1;
                        let a = g.eval(&r(x)) * r(2).pow(deg);
                        let b = scaled.get(i).map_or_else(Rational::zero, |h| h.eval(&r(2 * x)));
                        assert_eq!(a, b, "r={rr} s={s} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn bl2coc_examples() {
        let rep = verify_bl2coc(0, 0, 2, -2);
        assert!(rep.pass, "{:?}", rep.difference);
        let rep = verify_bl2coc(1, 1, 1, -1);
        assert!(rep.pass, "{:?}", rep.difference);
        assert_eq!(bar_central(1, 1, 1), q(1, 280));
        let rep = verify_bl2coc(2, 1, 3, 1);
        assert!(rep.pass && rep.bracket.central().is_zero());
    }

    #[test]
    fn bl2coc_grid() {
        for rr in 0..=3u32 {
            for s in 0..=(3 - rr) {
                for m in -4..=4 {
                    for n in -4..=4 {
                        let rep = verify_bl2coc(rr, s, m, n);
                        assert!(rep.pass, "r={rr} s={s} m={m} n={n}: {:?}", rep.difference);
                    }
                }
            }
        }
    }

    #[test]
    fn flipped_cocycle_breaks_bl2coc() {
        let rep = verify_bl2coc_with(0, 0, 2, -2, &q(1, 2));
        assert!(!rep.pass);
        assert!(rep.difference.unwrap().starts_with("central"));
    }
}
