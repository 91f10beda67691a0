//! The twisted Heisenberg Fock space.
//!
//! A twist of period `p` splits the space of oscillators into eigenspaces
//! `k = 0..p`, of dimension `d_k`, and gives each a basis `e_{k,1..d_k}`
//! paired dually with `e_{-k,1..d_k}`. The mode `a_{k,i}(n)` exists for
//! `n` in `(1/p)Z` with `p n = k (mod p)`; levels are stored as the integer
//! numerator `p n`. States are polynomials in the creation modes (`n < 0`)
//! applied to the vacuum.

mod quadratic;

pub use quadratic::{
    bar_correction_closed_form, commutator_apply, correction_scalar, diagonal_correction_closed_form,
    generating_operator, lincomb_coefficients, make_quadratic, scalar_series_coefficients, GeneratingOperator,
    QuadKind, QuadOp,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TwistData {
    p: i64,
    dims: Vec<usize>,
}

impl TwistData {
    /// `dims[k]` is the dimension of the eigenspace `k`; it must equal
    /// `dims[p-k]`, since the invariant form pairs the two.
    pub fn new(p: i64, dims: Vec<usize>) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidTwist(format!("period {p} < 1")));
        }
        if dims.len() != p as usize {
            return Err(Error::InvalidTwist(format!("{} dimensions given for period {p}", dims.len())));
        }
        for k in 1..dims.len() {
            if dims[k] != dims[dims.len() - k] {
                return Err(Error::InvalidTwist(format!("d_{k} = {} but d_{} = {}", dims[k], dims.len() - k, dims[dims.len() - k])));
            }
        }
        Ok(TwistData { p, dims })
    }

    /// The untwisted space of dimension `d`.
    pub fn untwisted(d: usize) -> Self {
        TwistData { p: 1, dims: vec![d] }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Eigenspace index of the level numerator `level`.
    pub fn sector(&self, level: i64) -> usize {
        level.rem_euclid(self.p) as usize
    }

    /// Index of the eigenspace paired with `k`.
    pub fn dual(&self, k: usize) -> usize {
        (self.p as usize - k) % self.p as usize
    }
}

impl fmt::Display for TwistData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "p={} dims=[{}]", self.p, dims.join(","))
    }
}

/// The invariant form on the adapted basis.
pub fn pairing(twist: &TwistData, k: usize, i: usize, k2: usize, j: usize) -> Rational {
    if (k + k2) as i64 % twist.p == 0 && i == j {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// `a_{k,i}(level / p)`. Ordered by level, then `k`, then `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub level: i64,
    pub k: usize,
    pub i: usize,
}

impl Mode {
    /// Checks the level against the eigenspace and the basis index against
    /// its dimension.
    pub fn new(twist: &TwistData, level: i64, k: usize, i: usize) -> Result<Self> {
        if k >= twist.dims.len() || twist.sector(level) != k {
            return Err(Error::InvalidArgument(format!("level {level}/{} is not in sector {k}", twist.p)));
        }
        if i == 0 || i > twist.dims[k] {
            return Err(Error::InvalidArgument(format!("basis index {i} out of range for sector {k}")));
        }
        Ok(Mode { level, k, i })
    }

    pub fn is_creation(&self) -> bool {
        self.level < 0
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{},{}({})", self.k, self.i, self.level)
    }
}

/// A product of creation modes, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FockMonomial(Vec<Mode>);

impl FockMonomial {
    pub fn from_modes(mut modes: Vec<Mode>) -> Result<Self> {
        if let Some(m) = modes.iter().find(|m| !m.is_creation()) {
            return Err(Error::InvalidArgument(format!("{m} is not a creation mode")));
        }
        modes.sort();
        Ok(FockMonomial(modes))
    }

    pub fn modes(&self) -> &[Mode] {
        &self.0
    }

    /// The weight times `p`.
    pub fn weight_numerator(&self) -> i64 {
        self.0.iter().map(|m| -m.level).sum()
    }

    fn with(&self, mode: Mode) -> FockMonomial {
        let mut modes = self.0.clone();
        let at = modes.partition_point(|m| *m <= mode);
        modes.insert(at, mode);
        FockMonomial(modes)
    }
}

impl fmt::Display for FockMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "vac");
        }
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl Serialize for FockMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FockVector(BTreeMap<FockMonomial, Rational>);

impl FockVector {
    pub fn zero() -> Self {
        FockVector::default()
    }

    pub fn vacuum() -> Self {
        FockVector::basis(FockMonomial::default())
    }

    pub fn basis(m: FockMonomial) -> Self {
        FockVector(BTreeMap::from([(m, Rational::one())]))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &Rational)> {
        self.0.iter()
    }

    pub fn coeff(&self, m: &FockMonomial) -> Rational {
        self.0.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, m: FockMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(a) => {
                *a += &c;
                if a.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, a) in &other.0 {
            self.add_term(m.clone(), a * c);
        }
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn scale(&self, c: &Rational) -> FockVector {
        let mut out = FockVector::zero();
        out.add_scaled(self, c);
        out
    }
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> = self.0.iter().map(|(m, c)| (m.to_string(), c.to_string())).collect();
        map.serialize(s)
    }
}

/// Action of one mode on a monomial, accumulated into `out` with factor `c`.
fn apply_mode_monomial(twist: &TwistData, mode: Mode, m: &FockMonomial, c: &Rational, out: &mut FockVector) {
    if mode.level < 0 {
        out.add_term(m.with(mode), c.clone());
    } else if mode.level > 0 {
        // n times the derivative in the dual creation mode
        let dual = Mode { level: -mode.level, k: twist.dual(mode.k), i: mode.i };
        let count = m.0.iter().filter(|x| **x == dual).count();
        if count == 0 {
            return;
        }
        let mut modes = m.0.clone();
        let at = modes.iter().position(|x| *x == dual).unwrap();
        modes.remove(at);
        let factor = Rational::new(mode.level * count as i64, twist.p);
        out.add_term(FockMonomial(modes), c * &factor);
    }
}

/// `a_{k,i}(n) v`. Zero modes act as zero.
pub fn apply_mode(twist: &TwistData, mode: Mode, v: &FockVector) -> Result<FockVector> {
    Mode::new(twist, mode.level, mode.k, mode.i)?;
    Ok(apply_mode_unchecked(twist, mode, v))
}

pub(crate) fn apply_mode_unchecked(twist: &TwistData, mode: Mode, v: &FockVector) -> FockVector {
    let mut out = FockVector::zero();
    for (m, c) in &v.0 {
        apply_mode_monomial(twist, mode, m, c, &mut out);
    }
    out
}

/// All modes of a given level.
pub fn modes_at(twist: &TwistData, level: i64) -> Vec<Mode> {
    let k = twist.sector(level);
    (1..=twist.dims[k]).map(|i| Mode { level, k, i }).collect()
}

/// Every basis monomial of weight at most `max_weight_numerator / p`,
/// ordered by weight and then canonically.
pub fn basis(twist: &TwistData, max_weight_numerator: i64) -> Vec<FockMonomial> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    // Multisets as nondecreasing sequences of (weight, k, i), largest first.
    let parts: Vec<Mode> = (1..=max_weight_numerator).flat_map(|w| modes_at(twist, -w)).collect();
    fn rec(parts: &[Mode], start: usize, budget: i64, current: &mut Vec<Mode>, out: &mut Vec<FockMonomial>) {
        let mut m = current.clone();
        m.sort();
        out.push(FockMonomial(m));
        for (idx, part) in parts.iter().enumerate().skip(start) {
            if -part.level > budget {
                break;
            }
            current.push(*part);
            rec(parts, idx, budget + part.level, current, out);
            current.pop();
        }
    }
    rec(&parts, 0, max_weight_numerator, &mut current, &mut out);
    out.sort_by(|a, b| a.weight_numerator().cmp(&b.weight_numerator()).then_with(|| a.cmp(b)));
    out
}
