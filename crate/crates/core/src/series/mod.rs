//! Truncated multivariate formal Laurent series with fractional exponents.
//!
//! Each variable `x` has a fixed denominator `p`, so its exponents live in
//! `(1/p)Z` and are stored as integer numerators. A series only ever stores
//! coefficients that are known exactly. The region where that holds is
//! tracked explicitly, in one of two regimes:
//!
//! * **Box.** Per variable a range `[lo, hi]` with a flag per side. A closed
//!   side means the untruncated series has no support beyond that bound, so
//!   every coefficient out there is known to be zero; an open side means the
//!   series continues and nothing beyond the bound is known. Products shrink
//!   the open sides by the support radius of the other factor.
//! * **Graded.** For series in integral powers of several variables where at
//!   most one variable (the Laurent variable) has negative powers: every
//!   coefficient of total degree at most `t` inside the per-variable ranges is
//!   exact, and the untruncated series has total degree at least `dlo`. This
//!   is what makes `(y1 - y2)^-2 * exp(y1 + y3)` computable, where no box can
//!   be trusted.

pub mod identities;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::cyclotomic::Coeff;
use crate::error::{Error, Result};
use crate::rational::Rational;

pub use identities::{check_delta_identities, DeltaReport, IdentityOutcome};

/// A formal variable whose exponents are `numerator / den`, with the
/// ambient window `[lo, hi]` given as numerators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarSpec {
    pub name: String,
    pub den: i64,
    pub lo: i64,
    pub hi: i64,
}

impl VarSpec {
    pub fn new(name: &str, den: i64, lo: i64, hi: i64) -> Self {
        assert!(den >= 1, "denominator must be positive");
        assert!(lo <= hi, "empty ambient window for `{name}`");
        VarSpec { name: name.to_string(), den, lo, hi }
    }

    /// Integral exponents in `[lo, hi]`.
    pub fn integral(name: &str, lo: i64, hi: i64) -> Self {
        VarSpec::new(name, 1, lo, hi)
    }

    /// Exponents in `(1/den)Z` between `-half_width` and `half_width`.
    pub fn symmetric(name: &str, den: i64, half_width: i64) -> Self {
        VarSpec::new(name, den, -half_width * den, half_width * den)
    }
}

/// Trusted range of one variable in the box regime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub lo: i64,
    pub hi: i64,
    pub closed_lo: bool,
    pub closed_hi: bool,
}

impl Bound {
    fn open(lo: i64, hi: i64) -> Self {
        Bound { lo, hi, closed_lo: false, closed_hi: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Graded {
    laurent: Option<usize>,
    dlo: i64,
    /// `None` means no degree limit inside the box.
    t: Option<i64>,
}

fn opt_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn opt_add(a: Option<i64>, b: i64) -> Option<i64> {
    a.map(|x| x + b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<S: Coeff = Rational> {
    vars: Vec<VarSpec>,
    terms: BTreeMap<Vec<i64>, S>,
    bounds: Vec<Bound>,
    graded: Option<Graded>,
}

impl<S: Coeff> Series<S> {
    // ---- construction -------------------------------------------------

    pub fn zero(vars: Vec<VarSpec>) -> Self {
        Series::polynomial(vars, std::iter::empty())
    }

    pub fn constant(vars: Vec<VarSpec>, c: S) -> Self {
        let n = vars.len();
        Series::polynomial(vars, [(vec![0; n], c)])
    }

    pub fn monomial(vars: Vec<VarSpec>, exps: Vec<i64>, c: S) -> Self {
        Series::polynomial(vars, [(exps, c)])
    }

    /// The variable `vars[i]` to the first power.
    pub fn variable(vars: Vec<VarSpec>, i: usize) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[i] = vars[i].den;
        Series::monomial(vars, exps, S::one())
    }

    /// A finite sum of terms. Terms outside the ambient window are dropped,
    /// which opens the corresponding side.
    pub fn polynomial(vars: Vec<VarSpec>, terms: impl IntoIterator<Item = (Vec<i64>, S)>) -> Self {
        let n = vars.len();
        let mut map: BTreeMap<Vec<i64>, S> = BTreeMap::new();
        let mut closed_lo = vec![true; n];
        let mut closed_hi = vec![true; n];
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent arity");
            if c.is_zero() {
                continue;
            }
            let mut inside = true;
            for (i, v) in vars.iter().enumerate() {
                if e[i] < v.lo {
                    closed_lo[i] = false;
                    inside = false;
                }
                if e[i] > v.hi {
                    closed_hi[i] = false;
                    inside = false;
                }
            }
            if inside {
                accumulate(&mut map, e, c);
            }
        }
        let bounds = (0..n)
            .map(|i| {
                let v = &vars[i];
                let lo = if closed_lo[i] { map.keys().map(|e| e[i]).min().unwrap_or(v.lo) } else { v.lo };
                let hi = if closed_hi[i] { map.keys().map(|e| e[i]).max().unwrap_or(v.lo) } else { v.hi };
                Bound { lo, hi, closed_lo: closed_lo[i], closed_hi: closed_hi[i] }
            })
            .collect();
        Series { vars, terms: map, bounds, graded: None }
    }

    /// Truncation of `delta(m) = sum_{n in Z} (w_p^r m)^n` where `m` is the
    /// monomial with exponent numerators `exps`. `root` is `(p, r)`.
    pub fn delta_monomial(vars: Vec<VarSpec>, exps: &[i64], root: Option<(i64, i64)>) -> Result<Self> {
        if exps.iter().all(|&e| e == 0) {
            return Err(Error::InvalidArgument("delta of a constant".into()));
        }
        let (mut nmin, mut nmax) = (i64::MIN, i64::MAX);
        for (v, &e) in vars.iter().zip(exps) {
            if e > 0 {
                nmin = nmin.max(div_ceil(v.lo, e));
                nmax = nmax.min(v.hi.div_euclid(e));
            } else if e < 0 {
                nmin = nmin.max(div_ceil(-v.hi, -e));
                nmax = nmax.min((-v.lo).div_euclid(-e));
            }
        }
        let mut terms = BTreeMap::new();
        for n in nmin..=nmax {
            let c = match root {
                Some((p, r)) => S::root_of_unity(p, r * n)?,
                None => S::one(),
            };
            let e: Vec<i64> = exps.iter().map(|&k| k * n).collect();
            accumulate(&mut terms, e, c);
        }
        let bounds = vars
            .iter()
            .zip(exps)
            .map(|(v, &e)| {
                if e == 0 {
                    Bound { lo: 0, hi: 0, closed_lo: true, closed_hi: true }
                } else {
                    Bound::open(v.lo, v.hi)
                }
            })
            .collect();
        Ok(Series { vars, terms, bounds, graded: None })
    }

    /// Truncation of
    /// `sum_{n in Z} w_p^(rn) (s1 x_i + s2 x_j)^(n/p) (s3 x_k)^(-n/p)`,
    /// the binomial expanded in nonnegative powers of `x_j`. Each argument is
    /// `(variable index, sign)`.
    pub fn delta_binomial(
        vars: Vec<VarSpec>,
        first: (usize, i64),
        second: (usize, i64),
        denom: (usize, i64),
        p: i64,
        r: i64,
    ) -> Result<Self> {
        let (i, si) = first;
        let (j, sj) = second;
        let (k, sk) = denom;
        if i == j || j == k || i == k {
            return Err(Error::InvalidArgument("delta arguments must be distinct variables".into()));
        }
        if vars[i].den % p != 0 || vars[k].den % p != 0 {
            return Err(Error::InvalidArgument(format!("variables need denominators divisible by {p}")));
        }
        if p > 1 && (si < 0 || sk < 0) {
            return Err(Error::InvalidArgument("negated base under a fractional power".into()));
        }
        let step_i = vars[i].den / p;
        let step_k = vars[k].den / p;
        // exponent of x_k is -n * step_k
        let nmin = div_ceil(-vars[k].hi, step_k);
        let nmax = (-vars[k].lo).div_euclid(step_k);
        let mut terms = BTreeMap::new();
        for n in nmin..=nmax {
            let root = S::root_of_unity(p, r * n)?;
            let power = Rational::new(n, p);
            let mut m = 0i64;
            loop {
                let ei = (n - m * p) * step_i;
                let ej = m * vars[j].den;
                if ei < vars[i].lo || ej > vars[j].hi {
                    break;
                }
                if ei <= vars[i].hi {
                    let mut c = Rational::binomial(&power, m as u32);
                    if si < 0 && (n / p - m) % 2 != 0 {
                        c = -c;
                    }
                    if sj < 0 && m % 2 != 0 {
                        c = -c;
                    }
                    if sk < 0 && (n / p) % 2 != 0 {
                        c = -c;
                    }
                    let mut e = vec![0; vars.len()];
                    e[i] = ei;
                    e[j] = ej;
                    e[k] = -n * step_k;
                    accumulate(&mut terms, e, root.scale(&c));
                }
                m += 1;
            }
        }
        let bounds = (0..vars.len())
            .map(|v| {
                if v == i || v == k {
                    Bound::open(vars[v].lo, vars[v].hi)
                } else if v == j {
                    Bound { lo: 0.max(vars[v].lo), hi: vars[v].hi, closed_lo: vars[v].lo <= 0, closed_hi: false }
                } else {
                    Bound { lo: 0, hi: 0, closed_lo: true, closed_hi: true }
                }
            })
            .collect();
        let mut out = Series { vars, terms, bounds, graded: None };
        out.prune();
        Ok(out)
    }

    /// `(sign * x_first + second)^n`, expanded in nonnegative powers of
    /// `second`. `second` must be an exact polynomial not involving
    /// `x_first` with nonnegative exponents and no constant term.
    ///
    /// When every denominator is 1 and `n` is an integer, the result also
    /// carries total-degree data, so it can be multiplied by power series in
    /// the other variables.
    pub fn binomial_power(first: usize, sign: i64, second: &Series<S>, n: &Rational) -> Result<Self> {
        let vars = second.vars.clone();
        let fv = &vars[first];
        let exp_num = n * &Rational::from_int(fv.den);
        if !exp_num.is_integer() {
            return Err(Error::InvalidArgument(format!("exponent {n} not in (1/{})Z", fv.den)));
        }
        let top = exp_num.to_i64().expect("exponent fits");
        if sign < 0 && !n.is_integer() {
            return Err(Error::InvalidArgument("negated base under a fractional power".into()));
        }
        if !second.is_polynomial() {
            return Err(Error::InvalidArgument("second summand must be an exact polynomial".into()));
        }
        if second.terms.keys().any(|e| e[first] != 0 || e.iter().any(|&x| x < 0) || e.iter().all(|&x| x == 0)) {
            return Err(Error::InvalidArgument(
                "second summand must avoid the first variable, with positive degree".into(),
            ));
        }
        if let Some(v) = vars.iter().enumerate().find(|(v, s)| *v != first && s.lo > 0) {
            return Err(Error::WindowUnderflow(v.1.name.clone()));
        }
        if n.is_integer() && !n.is_negative() {
            let base = Series::variable(vars, first).scale(&Rational::from_int(sign)).add(second)?;
            return base.pow(n.to_i64().unwrap() as u32);
        }
        let mut terms = BTreeMap::new();
        let mut power = Series::constant(vars.clone(), S::one());
        let mut j: i64 = 0;
        loop {
            let fe = top - j * fv.den;
            if fe < fv.lo || power.terms.is_empty() {
                break;
            }
            if fe <= fv.hi {
                let mut c = Rational::binomial(n, j as u32);
                if sign < 0 && (n.to_i64().unwrap() - j) % 2 != 0 {
                    c = -c;
                }
                for (e, a) in &power.terms {
                    let mut e = e.clone();
                    e[first] = fe;
                    accumulate(&mut terms, e, a.scale(&c));
                }
            }
            // Once every term leaves the window the product bound is empty.
            power = match power.mul_box(second) {
                Ok(next) => next,
                Err(Error::WindowUnderflow(_)) => break,
                Err(e) => return Err(e),
            };
            j += 1;
        }
        let bounds = (0..vars.len())
            .map(|v| {
                let amb = &vars[v];
                if v == first {
                    Bound { lo: amb.lo, hi: top.min(amb.hi), closed_lo: false, closed_hi: top <= amb.hi }
                } else {
                    let used = second.terms.keys().any(|e| e[v] != 0);
                    if used {
                        Bound { lo: 0, hi: amb.hi, closed_lo: true, closed_hi: false }
                    } else {
                        Bound { lo: 0, hi: 0, closed_lo: true, closed_hi: true }
                    }
                }
            })
            .collect();
        let mut out = Series { vars, terms, bounds, graded: None };
        out.prune();
        if n.is_integer() && out.vars.iter().all(|v| v.den == 1) {
            let t = out.vars[first].hi;
            out.graded = Some(Graded { laurent: Some(first), dlo: top, t: Some(t) });
            for (v, b) in out.bounds.iter_mut().enumerate() {
                if v == first {
                    *b = Bound::open(out.vars[v].lo, out.vars[v].hi);
                } else {
                    *b = Bound { lo: 0, hi: out.vars[v].hi, closed_lo: true, closed_hi: false };
                }
            }
            out.prune();
        }
        Ok(out)
    }

    /// `exp(scale * sum_i c_i y_i)` to total degree `cap`.
    pub fn exp_linear(vars: Vec<VarSpec>, coeffs: &[(usize, Rational)], scale: &Rational, cap: i64) -> Result<Self> {
        for v in &vars {
            if v.lo > 0 {
                return Err(Error::WindowUnderflow(v.name.clone()));
            }
        }
        if vars.len() > 1 && vars.iter().any(|v| v.den != 1) {
            return Err(Error::InvalidArgument("multivariate exponentials need integral exponents".into()));
        }
        let n = vars.len();
        let mut lin = vec![Rational::zero(); n];
        for (i, c) in coeffs {
            lin[*i] += c * scale;
        }
        // Enumerate exponent tuples of total degree <= cap over the variables
        // that actually occur.
        let active: Vec<usize> = (0..n).filter(|&i| !lin[i].is_zero()).collect();
        let mut terms = BTreeMap::new();
        let mut stack: Vec<(usize, Vec<i64>, Rational, i64)> = vec![(0, vec![0; n], Rational::one(), 0)];
        while let Some((pos, e, c, deg)) = stack.pop() {
            if pos == active.len() {
                let numerators: Vec<i64> = e.iter().zip(&vars).map(|(k, v)| k * v.den).collect();
                if numerators.iter().zip(&vars).all(|(k, v)| *k <= v.hi) {
                    accumulate(&mut terms, numerators, S::from_rational(c));
                }
                continue;
            }
            let i = active[pos];
            let mut ck = c.clone();
            for k in 0..=(cap - deg) {
                let mut e2 = e.clone();
                e2[i] = k;
                stack.push((pos + 1, e2, ck.clone(), deg + k));
                ck = ck * &lin[i] / Rational::from_int(k + 1);
            }
        }
        let bounds = (0..n)
            .map(|i| {
                Bound { lo: 0, hi: vars[i].hi, closed_lo: true, closed_hi: false }
            })
            .collect();
        let out = Series { vars, terms, bounds, graded: Some(Graded { laurent: None, dlo: 0, t: Some(cap) }) };
        Ok(out.normalize())
    }

    // ---- accessors ----------------------------------------------------

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn is_graded(&self) -> bool {
        self.graded.is_some()
    }

    /// Coefficient at the exponent numerators `e` (zero if not stored).
    pub fn coeff(&self, e: &[i64]) -> S {
        self.terms.get(e).cloned().unwrap_or_else(S::zero)
    }

    /// The trusted range of variable `i` as numerators. In the graded regime
    /// this ignores the total-degree limit.
    pub fn trusted_window(&self, i: usize) -> (i64, i64) {
        let b = &self.bounds[i];
        let v = &self.vars[i];
        let lo = if b.closed_lo { v.lo } else { b.lo };
        let hi = if b.closed_hi { v.hi } else { b.hi };
        (lo, hi)
    }

    /// Whether the coefficient at `e` is known exactly.
    pub fn is_trusted(&self, e: &[i64]) -> bool {
        if e.len() != self.vars.len() {
            return false;
        }
        let boxed = (0..e.len()).all(|i| {
            let (lo, hi) = self.trusted_window(i);
            lo <= e[i] && e[i] <= hi
        });
        boxed
            && match &self.graded {
                Some(g) => g.t.is_none_or(|t| e.iter().sum::<i64>() <= t),
                None => true,
            }
    }

    /// Closed on both sides in every variable: a finite, exactly known sum.
    pub fn is_polynomial(&self) -> bool {
        self.graded.is_none() && self.bounds.iter().all(|b| b.closed_lo && b.closed_hi)
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no variable `{name}`")))
    }

    // ---- arithmetic ---------------------------------------------------

    fn check_vars(&self, other: &Series<S>) -> Result<()> {
        if self.vars != other.vars {
            let names = |s: &Series<S>| s.vars.iter().map(|v| v.name.clone()).collect::<Vec<_>>().join(",");
            return Err(Error::VariableMismatch(format!("[{}] vs [{}]", names(self), names(other))));
        }
        Ok(())
    }

    pub fn neg(&self) -> Series<S> {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Series<S> {
        self.scale_by(&S::from_rational(r.clone()))
    }

    pub fn scale_by(&self, c: &S) -> Series<S> {
        let mut out = self.clone();
        out.terms = self.terms.iter().map(|(e, a)| (e.clone(), a.mul(c))).filter(|(_, a)| !a.is_zero()).collect();
        out
    }

    pub fn add(&self, other: &Series<S>) -> Result<Series<S>> {
        self.check_vars(other)?;
        if self.graded.is_some() || other.graded.is_some() {
            return self.add_graded(other);
        }
        let mut bounds = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            let (a, b) = (&self.bounds[i], &other.bounds[i]);
            let (lo, closed_lo) = match (a.closed_lo, b.closed_lo) {
                (true, true) => (a.lo.min(b.lo), true),
                (true, false) => (b.lo, false),
                (false, true) => (a.lo, false),
                (false, false) => (a.lo.max(b.lo), false),
            };
            let (hi, closed_hi) = match (a.closed_hi, b.closed_hi) {
                (true, true) => (a.hi.max(b.hi), true),
                (true, false) => (b.hi, false),
                (false, true) => (a.hi, false),
                (false, false) => (a.hi.min(b.hi), false),
            };
            if !(closed_lo || closed_hi) && lo > hi {
                return Err(Error::WindowUnderflow(v.name.clone()));
            }
            bounds.push(Bound { lo, hi, closed_lo, closed_hi });
        }
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            accumulate(&mut terms, e.clone(), c.clone());
        }
        let out = Series { vars: self.vars.clone(), terms, bounds, graded: None };
        Ok(out.tighten())
    }

    pub fn sub(&self, other: &Series<S>) -> Result<Series<S>> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series<S>) -> Result<Series<S>> {
        self.check_vars(other)?;
        if self.is_zero_polynomial() || other.is_zero_polynomial() {
            return Ok(Series::zero(self.vars.clone()));
        }
        if self.graded.is_some() || other.graded.is_some() {
            return self.mul_graded(other);
        }
        self.mul_box(other)
    }

    fn is_zero_polynomial(&self) -> bool {
        self.terms.is_empty() && self.is_polynomial()
    }

    fn mul_box(&self, other: &Series<S>) -> Result<Series<S>> {
        let mut bounds = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            bounds.push(product_bound(&self.bounds[i], &other.bounds[i], v)?);
        }
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if e.iter().zip(&bounds).all(|(x, b)| b.lo <= *x && *x <= b.hi) {
                    accumulate(&mut terms, e, ca.mul(cb));
                }
            }
        }
        let out = Series { vars: self.vars.clone(), terms, bounds, graded: None };
        Ok(out.tighten())
    }

    /// Box to graded, when the series is an exact polynomial or is closed
    /// below in every variable; at most one variable may have negative
    /// exponents.
    fn to_graded(&self) -> Result<Series<S>> {
        if self.graded.is_some() {
            return Ok(self.clone());
        }
        if self.vars.iter().any(|v| v.den != 1) {
            return Err(Error::InvalidArgument("graded arithmetic needs integral exponents".into()));
        }
        if self.bounds.iter().any(|b| !b.closed_lo) {
            return Err(Error::UnboundedProduct("series open below in the box regime".into()));
        }
        let negative: Vec<usize> = (0..self.vars.len()).filter(|&i| self.bounds[i].lo < 0).collect();
        if negative.len() > 1 {
            return Err(Error::InvalidArgument("more than one variable with negative exponents".into()));
        }
        let laurent = negative.first().copied();
        let dlo: i64 = self.bounds.iter().map(|b| b.lo).sum();
        let mut bounds = Vec::new();
        for i in 0..self.vars.len() {
            let (_, hi) = self.trusted_window(i);
            if Some(i) == laurent {
                bounds.push(Bound::open(self.vars[i].lo, hi));
            } else {
                bounds.push(Bound { lo: 0, hi, closed_lo: true, closed_hi: false });
            }
        }
        let t = laurent.map(|l| bounds[l].hi);
        let mut out = Series { vars: self.vars.clone(), terms: self.terms.clone(), bounds, graded: Some(Graded { laurent, dlo, t }) };
        out.prune();
        Ok(out)
    }

    fn add_graded(&self, other: &Series<S>) -> Result<Series<S>> {
        let a = self.to_graded()?;
        let b = other.to_graded()?;
        let (ga, gb) = (a.graded.as_ref().unwrap(), b.graded.as_ref().unwrap());
        let laurent = merge_laurent(ga.laurent, gb.laurent)?;
        let mut bounds = Vec::new();
        for i in 0..self.vars.len() {
            let hi = a.bounds[i].hi.min(b.bounds[i].hi);
            if Some(i) == laurent {
                bounds.push(Bound::open(self.vars[i].lo, hi));
            } else {
                bounds.push(Bound { lo: 0, hi, closed_lo: true, closed_hi: false });
            }
        }
        let mut t = opt_min(ga.t, gb.t);
        if let Some(l) = laurent {
            t = opt_min(t, Some(bounds[l].hi));
        }
        let graded = Graded { laurent, dlo: ga.dlo.min(gb.dlo), t };
        let mut terms = a.terms;
        for (e, c) in b.terms {
            accumulate(&mut terms, e, c);
        }
        let mut out = Series { vars: self.vars.clone(), terms, bounds, graded: Some(graded) };
        out.prune();
        Ok(out.normalize())
    }

    fn mul_graded(&self, other: &Series<S>) -> Result<Series<S>> {
        let a = self.to_graded()?;
        let b = other.to_graded()?;
        let (ga, gb) = (a.graded.as_ref().unwrap(), b.graded.as_ref().unwrap());
        let laurent = merge_laurent(ga.laurent, gb.laurent)?;
        let n = self.vars.len();
        let mut his: Vec<i64> = (0..n).map(|i| a.bounds[i].hi.min(b.bounds[i].hi)).collect();
        let dlo = ga.dlo + gb.dlo;
        let mut t = opt_min(opt_add(ga.t, gb.dlo), opt_add(gb.t, ga.dlo));
        if let Some(l) = laurent {
            t = opt_min(t, Some(his[l]));
            // A term a factor drops above its Laurent-variable window has
            // degree above that edge, and the other factor's arbitrarily
            // negative Laurent powers can bring it back into the window.
            t = opt_min(t, Some(a.bounds[l].hi + gb.dlo));
            t = opt_min(t, Some(b.bounds[l].hi + ga.dlo));
            // A Laurent factor only stores exponents down to the ambient
            // edge, so the other variables' trusted range shrinks until no
            // missing term can reach the window.
            let room = [ga, gb]
                .iter()
                .filter(|g| g.laurent == Some(l))
                .map(|g| g.dlo - self.vars[l].lo)
                .min()
                .unwrap_or(i64::MAX);
            if room < 0 {
                return Err(Error::WindowUnderflow(self.vars[l].name.clone()));
            }
            let mut others: i64 = (0..n).filter(|&i| i != l).map(|i| his[i]).sum();
            while others > room {
                let widest = (0..n).filter(|&i| i != l).max_by_key(|&i| (his[i], i)).unwrap();
                his[widest] -= 1;
                others -= 1;
            }
        }
        let bounds: Vec<Bound> = (0..n)
            .map(|i| {
                if Some(i) == laurent {
                    Bound::open(self.vars[i].lo, his[i])
                } else {
                    Bound { lo: 0, hi: his[i], closed_lo: true, closed_hi: false }
                }
            })
            .collect();
        let mut terms = BTreeMap::new();
        for (ea, ca) in &a.terms {
            let da: i64 = ea.iter().sum();
            for (eb, cb) in &b.terms {
                if let Some(t) = t {
                    if da + eb.iter().sum::<i64>() > t {
                        continue;
                    }
                }
                let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if e.iter().zip(&bounds).all(|(x, b)| b.lo <= *x && *x <= b.hi) {
                    accumulate(&mut terms, e, ca.mul(cb));
                }
            }
        }
        let out = Series { vars: self.vars.clone(), terms, bounds, graded: Some(Graded { laurent, dlo, t }) };
        Ok(out.normalize())
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Result<Series<S>> {
        let mut acc = Series::constant(self.vars.clone(), S::one());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    // ---- calculus -----------------------------------------------------

    /// Derivative with respect to `vars[i]`.
    pub fn derivative(&self, i: usize) -> Series<S> {
        if self.is_zero_polynomial() {
            return self.clone();
        }
        let q = self.vars[i].den;
        let amb = &self.vars[i];
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= q;
            accumulate(&mut terms, e2, c.scale(&Rational::new(e[i], q)));
        }
        let mut out = self.clone();
        out.terms = terms;
        if let Some(g) = out.graded.as_mut() {
            g.dlo -= 1;
            g.t = opt_add(g.t, -1);
            out.bounds[i].hi -= 1;
        } else {
            let b = &self.bounds[i];
            let (lo, closed_lo) = if b.closed_lo {
                if b.lo - q >= amb.lo { (b.lo - q, true) } else { (amb.lo, false) }
            } else {
                ((b.lo - q).max(amb.lo), false)
            };
            let (hi, closed_hi) = if b.closed_hi { (b.hi - q, true) } else { (b.hi - q, false) };
            out.bounds[i] = Bound { lo, hi, closed_lo, closed_hi };
        }
        out.tighten()
    }

    /// Derivative with respect to the variable called `name`.
    pub fn derivative_by(&self, name: &str) -> Result<Series<S>> {
        Ok(self.derivative(self.var_index(name)?))
    }

    /// Coefficient of `vars[i]^-1`, as a series in the remaining variables.
    pub fn residue(&self, i: usize) -> Result<Series<S>> {
        let target = -self.vars[i].den;
        let (lo, hi) = self.trusted_window(i);
        if target < lo || target > hi {
            return Err(Error::OutsideWindow { var: self.vars[i].name.clone(), exponent: "-1".into() });
        }
        let mut vars = self.vars.clone();
        vars.remove(i);
        let mut bounds = self.bounds.clone();
        bounds.remove(i);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == target {
                let mut e2 = e.clone();
                e2.remove(i);
                accumulate(&mut terms, e2, c.clone());
            }
        }
        let graded = self.graded.as_ref().map(|g| Graded {
            laurent: match g.laurent {
                Some(l) if l == i => None,
                Some(l) if l > i => Some(l - 1),
                other => other,
            },
            dlo: g.dlo + 1,
            t: opt_add(g.t, 1),
        });
        let mut out = Series { vars, terms, bounds, graded };
        out.prune();
        Ok(out.normalize())
    }

    /// Drops every term with a negative power of `vars[i]`.
    pub fn regular_part(&self, i: usize) -> Series<S> {
        let mut out = self.clone();
        out.terms.retain(|e, _| e[i] >= 0);
        if let Some(g) = out.graded.as_mut() {
            if g.laurent == Some(i) {
                g.laurent = None;
                out.bounds[i].lo = 0;
                out.bounds[i].closed_lo = true;
            }
        } else {
            let b = &mut out.bounds[i];
            let amb_lo = self.vars[i].lo;
            if b.closed_lo || b.lo <= 0 {
                let lo = b.lo.max(0);
                if lo >= amb_lo {
                    b.lo = lo;
                    b.closed_lo = true;
                } else {
                    b.lo = amb_lo;
                    b.closed_lo = false;
                }
            }
            if b.closed_hi && b.hi < 0 {
                b.hi = 0;
            }
        }
        out.tighten()
    }

    /// Keeps the terms with integral powers of `vars[i]`.
    pub fn project_integral(&self, i: usize) -> Series<S> {
        let den = self.vars[i].den;
        let mut out = self.clone();
        out.terms.retain(|e, _| e[i] % den == 0);
        out
    }

    /// `x^(1/q) -> w_q^r x^(1/q)` for `x = vars[i]` with denominator `q`.
    pub fn substitute_root(&self, i: usize, r: i64) -> Result<Series<S>> {
        let q = self.vars[i].den;
        let mut out = self.clone();
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let w = S::root_of_unity(q, r * e[i])?;
            accumulate(&mut terms, e.clone(), c.mul(&w));
        }
        out.terms = terms;
        Ok(out)
    }

    /// `x -> e^y x` for `x = vars[i]` and `y = vars[j]`, keeping powers of
    /// `y` up to `cap`. The series must not depend on `y`.
    pub fn substitute_exp(&self, i: usize, j: usize, cap: i64) -> Result<Series<S>> {
        let bj = &self.bounds[j];
        if self.graded.is_some() || !(bj.closed_lo && bj.closed_hi) || self.terms.keys().any(|e| e[j] != 0) {
            return Err(Error::InvalidArgument("exponential substitution needs a box series free of y".into()));
        }
        let q = self.vars[i].den;
        let yden = self.vars[j].den;
        let yhi = (cap * yden).min(self.vars[j].hi);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let a = Rational::new(e[i], q);
            let mut ck = Rational::one();
            for k in 0..=cap {
                if k * yden > yhi {
                    break;
                }
                let mut e2 = e.clone();
                e2[j] = k * yden;
                accumulate(&mut terms, e2, c.scale(&ck));
                ck = ck * &a / Rational::from_int(k + 1);
            }
        }
        let mut out = self.clone();
        out.terms = terms;
        out.bounds[j] = Bound { lo: 0, hi: yhi, closed_lo: true, closed_hi: false };
        Ok(out)
    }

    /// Comparison on the region where both series are trusted. Returns the
    /// number of exponents compared (stored in either series) and the first
    /// exponent at which they differ.
    pub fn compare(&self, other: &Series<S>) -> Result<(usize, Option<Vec<i64>>)> {
        self.check_vars(other)?;
        let mut keys: Vec<&Vec<i64>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        let mut compared = 0;
        for e in keys {
            if self.is_trusted(e) && other.is_trusted(e) {
                compared += 1;
                if self.coeff(e) != other.coeff(e) {
                    return Ok((compared, Some(e.clone())));
                }
            }
        }
        Ok((compared, None))
    }

    /// Human-readable exponent tuple, e.g. `[-1/2, 3]`.
    pub fn format_exponent(&self, e: &[i64]) -> Vec<String> {
        e.iter().zip(&self.vars).map(|(k, v)| Rational::new(*k, v.den).to_string()).collect()
    }

    // ---- internal -----------------------------------------------------

    fn prune(&mut self) {
        let bounds = &self.bounds;
        let t = self.graded.as_ref().and_then(|g| g.t);
        self.terms.retain(|e, c| {
            !c.is_zero()
                && e.iter().zip(bounds).all(|(x, b)| b.lo <= *x && *x <= b.hi)
                && t.is_none_or(|t| e.iter().sum::<i64>() <= t)
        });
    }

    /// Shrinks closed sides to the actual support.
    fn tighten(mut self) -> Self {
        self.prune();
        if self.graded.is_none() && !self.terms.is_empty() {
            for i in 0..self.vars.len() {
                let b = &mut self.bounds[i];
                if b.closed_lo {
                    b.lo = self.terms.keys().map(|e| e[i]).min().unwrap();
                }
                if b.closed_hi {
                    b.hi = self.terms.keys().map(|e| e[i]).max().unwrap();
                }
            }
        } else if self.graded.is_none() {
            // Known to vanish up to the open edge.
            for b in &mut self.bounds {
                match (b.closed_lo, b.closed_hi) {
                    (true, false) => b.lo = b.hi,
                    (false, true) => b.hi = b.lo,
                    _ => {}
                }
            }
        }
        self
    }

    /// A univariate graded series is just a box series.
    fn normalize(mut self) -> Self {
        if self.vars.len() == 1 {
            if let Some(g) = self.graded.take() {
                let v = &self.vars[0];
                let hi = g.t.map_or(self.bounds[0].hi, |t| t.min(self.bounds[0].hi));
                self.bounds[0] = match g.laurent {
                    None => Bound { lo: 0, hi, closed_lo: true, closed_hi: false },
                    Some(_) if v.lo <= g.dlo => Bound { lo: g.dlo, hi, closed_lo: true, closed_hi: false },
                    Some(_) => Bound::open(v.lo, hi),
                };
                self.prune();
            }
        }
        self
    }
}

impl Series<Rational> {
    /// `e^(v x)` in the single variable described by `spec`, to degree `cap`.
    pub fn exp_scaled(spec: VarSpec, v: &Rational, cap: i64) -> Series<Rational> {
        Series::exp_linear(vec![spec], &[(0, v.clone())], &Rational::one(), cap).expect("univariate exponential")
    }

    /// Multiplicative inverse of a univariate series that is closed below.
    pub fn inverse(&self) -> Result<Series<Rational>> {
        if self.vars.len() != 1 || self.graded.is_some() {
            return Err(Error::InvalidArgument("inverse needs a univariate box series".into()));
        }
        let b = &self.bounds[0];
        let v = self.vars[0].clone();
        let (l, lead) = match self.terms.iter().next() {
            Some((e, c)) if b.closed_lo => (e[0], c.clone()),
            _ => return Err(Error::InvalidArgument("inverse needs a known leading term".into())),
        };
        if self.terms.len() == 1 && b.closed_hi {
            return Ok(Series::monomial(vec![v], vec![-l], lead.recip()));
        }
        let (_, th) = self.trusted_window(0);
        let inv_lead = lead.recip();
        let span = th - l;
        let mut gamma: Vec<Rational> = Vec::with_capacity(span as usize + 1);
        gamma.push(Rational::one());
        for k in 1..=span {
            let mut s = Rational::zero();
            for j in 1..=k {
                let a = self.coeff(&[l + j]);
                if !a.is_zero() {
                    s += &a * &gamma[(k - j) as usize];
                }
            }
            gamma.push(-(s * &inv_lead));
        }
        let terms = gamma
            .into_iter()
            .enumerate()
            .map(|(k, g)| (vec![-l + k as i64], g * &inv_lead));
        let lo = -l;
        let hi = (-l + span).min(v.hi);
        let (lo, closed_lo) = if lo >= v.lo { (lo, true) } else { (v.lo, false) };
        if lo > hi {
            return Err(Error::WindowUnderflow(v.name.clone()));
        }
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            accumulate(&mut map, e, c);
        }
        let mut out = Series { vars: vec![v], terms: map, bounds: vec![Bound { lo, hi, closed_lo, closed_hi: false }], graded: None };
        out.prune();
        Ok(out)
    }
}

impl<S: Coeff> fmt::Display for Series<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (k, v) in e.iter().zip(&self.vars) {
                if *k != 0 {
                    write!(f, "*{}^{}", v.name, Rational::new(*k, v.den))?;
                }
            }
        }
        Ok(())
    }
}

fn accumulate<S: Coeff>(map: &mut BTreeMap<Vec<i64>, S>, e: Vec<i64>, c: S) {
    if c.is_zero() {
        return;
    }
    match map.entry(e) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            let s = slot.get().add(&c);
            if s.is_zero() {
                slot.remove();
            } else {
                *slot.get_mut() = s;
            }
        }
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

fn merge_laurent(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => {
            Err(Error::InvalidArgument("graded series with different Laurent variables".into()))
        }
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

/// Trusted range of a product in one variable.
fn product_bound(a: &Bound, b: &Bound, v: &VarSpec) -> Result<Bound> {
    let unbounded = || Error::UnboundedProduct(v.name.clone());
    let (mut lo, mut closed_lo) = if a.closed_lo && b.closed_lo {
        (a.lo + b.lo, true)
    } else {
        let mut lo = i64::MIN;
        if !a.closed_lo {
            if !b.closed_hi {
                return Err(unbounded());
            }
            lo = lo.max(a.lo + b.hi);
        }
        if !b.closed_lo {
            if !a.closed_hi {
                return Err(unbounded());
            }
            lo = lo.max(a.hi + b.lo);
        }
        (lo, false)
    };
    let (mut hi, mut closed_hi) = if a.closed_hi && b.closed_hi {
        (a.hi + b.hi, true)
    } else {
        let mut hi = i64::MAX;
        if !a.closed_hi {
            if !b.closed_lo {
                return Err(unbounded());
            }
            hi = hi.min(a.hi + b.lo);
        }
        if !b.closed_hi {
            if !a.closed_lo {
                return Err(unbounded());
            }
            hi = hi.min(a.lo + b.hi);
        }
        (hi, false)
    };
    if lo < v.lo {
        lo = v.lo;
        closed_lo = false;
    }
    if hi > v.hi {
        hi = v.hi;
        closed_hi = false;
    }
    if lo > hi && !(closed_lo && closed_hi) {
        // Exact on one side with all support beyond the other edge: the
        // window holds only zeros.
        if closed_lo && lo > v.hi {
            return Ok(Bound { lo: v.hi, hi: v.hi, closed_lo: true, closed_hi: false });
        }
        if closed_hi && hi < v.lo {
            return Ok(Bound { lo: v.lo, hi: v.lo, closed_lo: false, closed_hi: true });
        }
        return Err(Error::WindowUnderflow(v.name.clone()));
    }
    Ok(Bound { lo, hi, closed_lo, closed_hi })
}
