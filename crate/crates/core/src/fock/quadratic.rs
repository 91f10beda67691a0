//! Normal-ordered quadratic operators
//! `1/2 sum_{k,i} sum_j K(j, n-j) :a_{k,i}(j) a_{-k,i}(n-j): + c`
//! and their scalar corrections.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{apply_mode_monomial, FockMonomial, FockVector, Mode, TwistData};
use crate::bernoulli::bernoulli_value;
use crate::diffops::{symmetric_decompose, BiPoly};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::series::{Series, VarSpec};

/// Which quadratic: `j^r (n-j)^r` or `j^r1 (n-j)^r2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum QuadKind {
    Diagonal(u32),
    General(u32, u32),
}

impl QuadKind {
    pub fn exponents(&self) -> (u32, u32) {
        match *self {
            QuadKind::Diagonal(r) => (r, r),
            QuadKind::General(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadOp {
    twist: TwistData,
    n: i64,
    /// `K(j, l) = sum c j^a l^b`, keyed by `(a, b)`.
    kernel: BTreeMap<(u32, u32), Rational>,
    correction: Rational,
}

impl QuadOp {
    pub fn new(twist: &TwistData, n: i64, kernel: BTreeMap<(u32, u32), Rational>, correction: Rational) -> Self {
        let kernel = kernel.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        QuadOp { twist: twist.clone(), n, kernel, correction }
    }

    /// `c` times the identity, filed under mode `n`.
    pub fn scalar(twist: &TwistData, n: i64, c: Rational) -> Self {
        QuadOp::new(twist, n, BTreeMap::new(), c)
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn twist(&self) -> &TwistData {
        &self.twist
    }

    pub fn kernel(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.kernel
    }

    pub fn correction(&self) -> &Rational {
        &self.correction
    }

    pub fn add(&self, other: &QuadOp) -> Result<QuadOp> {
        if self.n != other.n || self.twist != other.twist {
            return Err(Error::InvalidArgument(format!("adding operators of modes {} and {}", self.n, other.n)));
        }
        let mut kernel = self.kernel.clone();
        for (e, c) in &other.kernel {
            let sum = kernel.get(e).map_or_else(|| c.clone(), |a| a + c);
            kernel.insert(*e, sum);
        }
        Ok(QuadOp::new(&self.twist, self.n, kernel, &self.correction + &other.correction))
    }

    pub fn scale(&self, c: &Rational) -> QuadOp {
        let kernel = self.kernel.iter().map(|(e, a)| (*e, a * c)).collect();
        QuadOp::new(&self.twist, self.n, kernel, &self.correction * c)
    }

    /// `K(j, l)`.
    pub fn kernel_at(&self, j: &Rational, l: &Rational) -> Rational {
        self.kernel.iter().map(|((a, b), c)| c * &j.pow(*a as i32) * l.pow(*b as i32)).sum()
    }

    /// The exact image of `v`. Only finitely many `j` contribute: two
    /// creations need `n < j < 0`, and an annihilation mode must not exceed
    /// the weight of the monomial it acts on.
    pub fn apply(&self, v: &FockVector) -> FockVector {
        let top = v.terms().map(|(m, _)| m.weight_numerator()).max().unwrap_or(0);
        let total = self.n * self.twist.p;
        self.apply_over(v, total.min(0) - top, total.max(0) + top)
    }

    /// The image of `v` with the `j`-sum cut to level numerators in
    /// `[lo, hi]`. Any window containing the contributing range gives the
    /// same result as `apply`.
    pub fn apply_over(&self, v: &FockVector, lo: i64, hi: i64) -> FockVector {
        let p = self.twist.p;
        let total = self.n * p;
        let half = Rational::new(1, 2);
        let weights: Vec<(i64, Rational)> = (lo..=hi)
            .filter(|&j| j != 0 && j != total && self.twist.dim(self.twist.sector(j)) > 0)
            .map(|j| (j, &half * &self.kernel_at(&Rational::new(j, p), &Rational::new(total - j, p))))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        let mut out = v.scale(&self.correction);
        for (m, c) in v.terms() {
            let wm = m.weight_numerator();
            for (j, w) in &weights {
                let l = total - j;
                // positive level acts first
                let (first, second) = if *j > 0 { (*j, l) } else { (l, *j) };
                if first > wm {
                    continue;
                }
                let k = self.twist.sector(*j);
                let coeff = c * w;
                for i in 1..=self.twist.dim(k) {
                    let a = Mode { level: first, k: self.twist.sector(first), i };
                    let b = Mode { level: second, k: self.twist.sector(second), i };
                    let mut scratch = FockVector::zero();
                    apply_mode_monomial(&self.twist, a, m, &coeff, &mut scratch);
                    for (m2, c2) in scratch.terms() {
                        apply_mode_monomial(&self.twist, b, m2, c2, &mut out);
                    }
                }
            }
        }
        out
    }

    /// The image of a single basis monomial.
    pub fn apply_monomial(&self, m: &FockMonomial) -> FockVector {
        self.apply(&FockVector::basis(m.clone()))
    }
}

/// `[a, b] v`.
pub fn commutator_apply(a: &QuadOp, b: &QuadOp, v: &FockVector) -> FockVector {
    a.apply(&b.apply(v)).sub(&b.apply(&a.apply(v)))
}

/// Coefficients of the scalar series
/// `f(u) = -1/2 d/du sum_k d_k (e^(-k u/p) - [non-bar] 1) / (1 - e^-u)`:
/// the coefficient of `u^-2` and the regular coefficients of `u^0..=u^max`.
/// Computed by series division, independently of the Bernoulli recurrence.
pub fn scalar_series_coefficients(bar: bool, twist: &TwistData, max: usize) -> (Rational, Vec<Rational>) {
    let top = max as i64 + 2;
    let spec = VarSpec::new("u", 1, -3, top + 2);
    let vars = vec![spec.clone()];
    let mut numerator = Series::zero(vars.clone());
    for k in 0..twist.p() as usize {
        let d = Rational::from_int(twist.dim(k) as i64);
        if d.is_zero() {
            continue;
        }
        let mut term = Series::exp_scaled(spec.clone(), &Rational::new(-(k as i64), twist.p()), top + 1);
        if !bar {
            term = term.sub(&Series::constant(vars.clone(), Rational::one())).expect("same variables");
        }
        numerator = numerator.add(&term.scale(&d)).expect("same variables");
    }
    let one = Series::constant(vars.clone(), Rational::one());
    let denominator = one.sub(&Series::exp_scaled(spec, &-Rational::one(), top + 2)).expect("same variables");
    let quotient = numerator.mul(&denominator.inverse().expect("invertible")).expect("window large enough");
    let f = quotient.derivative(0).scale(&Rational::new(-1, 2));
    for e in -2..=max as i64 {
        assert!(f.is_trusted(&[e]), "scalar series not trusted at u^{e}");
    }
    let regular = (0..=max as i64).map(|e| f.coeff(&[e])).collect();
    (f.coeff(&[-2]), regular)
}

/// `-(-1)^r/(4(r+1)) sum_k d_k (B_{2r+2}(k/p) - [non-bar] B_{2r+2})`.
pub fn diagonal_correction_closed_form(r: u32, bar: bool, twist: &TwistData) -> Rational {
    let deg = 2 * (r as usize + 1);
    let mut acc = Rational::zero();
    for k in 0..twist.p() as usize {
        let d = Rational::from_int(twist.dim(k) as i64);
        let mut b = bernoulli_value(deg, &Rational::new(k as i64, twist.p()));
        if !bar {
            b -= &bernoulli_value(deg, &Rational::zero());
        }
        acc += d * b;
    }
    -Rational::sign_power(r as i64) / Rational::from_int(4 * (r as i64 + 1)) * acc
}

/// The bar correction in closed form.
pub fn bar_correction_closed_form(r: u32, twist: &TwistData) -> Rational {
    diagonal_correction_closed_form(r, true, twist)
}

/// Coefficient of `y1^r1 y2^r2 / (r1! r2!)` in `f(y1 - y2)`, given the
/// regular coefficients of `f`.
fn correction_from_series(r1: u32, r2: u32, regular: &[Rational]) -> Rational {
    let n = r1 + r2;
    Rational::sign_power(r2 as i64) * Rational::factorial(n) * regular[n as usize].clone()
}

/// The scalar added at mode 0. Diagonal kinds use the closed Bernoulli
/// forms; general kinds read the scalar series.
pub fn correction_scalar(kind: QuadKind, bar: bool, twist: &TwistData) -> Rational {
    match kind {
        QuadKind::Diagonal(r) => diagonal_correction_closed_form(r, bar, twist),
        QuadKind::General(r1, r2) => {
            let (_, regular) = scalar_series_coefficients(bar, twist, (r1 + r2) as usize);
            correction_from_series(r1, r2, &regular)
        }
    }
}

/// `1/2 sum j^r1 (n-j)^r2 :a(j) a'(n-j): + delta_{n,0} correction`.
pub fn make_quadratic(kind: QuadKind, n: i64, bar: bool, twist: &TwistData) -> QuadOp {
    let correction = if n == 0 { correction_scalar(kind, bar, twist) } else { Rational::zero() };
    QuadOp::new(twist, n, BTreeMap::from([(kind.exponents(), Rational::one())]), correction)
}

/// `C_n^(r1,r2|r)`: writing `(j^r1 l^r2 + l^r1 j^r2)/2` as
/// `sum_r g_r(j + l) (j l)^r`, the value `g_r(n)`.
pub fn lincomb_coefficients(r1: u32, r2: u32, n: i64) -> BTreeMap<u32, Rational> {
    let half = Rational::new(1, 2);
    let sym = BiPoly::from_terms([((r1, r2), half.clone()), ((r2, r1), half)]);
    let parts = symmetric_decompose(&sym).expect("symmetrized");
    parts.into_iter().map(|(r, g)| (r, g.eval(&Rational::from_int(n)))).filter(|(_, c)| !c.is_zero()).collect()
}

/// Truncation of the generating series in `y1, y2, x`.
#[derive(Debug, Clone)]
pub struct GeneratingOperator {
    pub bar: bool,
    pub twist: TwistData,
    pub y_cap: u32,
    pub mode_window: i64,
    /// Coefficient of `(y1 - y2)^-2`.
    pub singular: Rational,
    entries: BTreeMap<(u32, u32, i64), QuadOp>,
}

impl GeneratingOperator {
    /// The coefficient of `y1^r1 y2^r2 x^-n / (r1! r2!)`.
    pub fn coefficient(&self, r1: u32, r2: u32, n: i64) -> Option<&QuadOp> {
        self.entries.get(&(r1, r2, n))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32, i64), &QuadOp)> {
        self.entries.iter()
    }
}

/// Expands the generating series with kernels `(-j)^r1 (-(n-j))^r2` and
/// scalar part from `scalar_series_coefficients`, for `r1 + r2 <= y_cap`
/// and `|n| <= mode_window`.
pub fn generating_operator(bar: bool, twist: &TwistData, y_cap: u32, mode_window: i64) -> GeneratingOperator {
    let (singular, regular) = scalar_series_coefficients(bar, twist, y_cap as usize);
    let mut entries = BTreeMap::new();
    for r1 in 0..=y_cap {
        for r2 in 0..=(y_cap - r1) {
            for n in -mode_window..=mode_window {
                let correction = if n == 0 { correction_from_series(r1, r2, &regular) } else { Rational::zero() };
                let kernel = BTreeMap::from([((r1, r2), Rational::sign_power((r1 + r2) as i64))]);
                entries.insert((r1, r2, n), QuadOp::new(twist, n, kernel, correction));
            }
        }
    }
    GeneratingOperator { bar, twist: twist.clone(), y_cap, mode_window, singular, entries }
}
