//! Exact checks of the representation identities on truncated Fock spaces
//! and of the abstract algebra, as structured pass/fail reports.
//!
//! Every comparison is exact equality of rationals. A failing report
//! carries a witness: the basis monomial together with both image vectors,
//! or the first differing coefficient for scalar checks.

mod prop;
mod suite;

#[cfg(test)]
mod tests;

pub use prop::{check_prop_bracket, check_prop_main1_agreement, check_prop_scalar_sector};
pub use suite::{run_suite, Config, TwistSpec, CHECK_NAMES};

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bernoulli::zeta_negative;
use crate::diffops::{
    bar_central, bracket_with_cocycle, cocycle_normalization, make_l, make_lbar, structure_constants, DOp,
};
use crate::fock::{
    apply_mode, basis, diagonal_correction_closed_form, lincomb_coefficients, make_quadratic, modes_at, pairing,
    FockMonomial, FockVector, QuadKind, QuadOp, TwistData,
};
use crate::rational::Rational;
use crate::series::{Series, VarSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    pub status: Status,
    pub witness: Option<Value>,
    /// Milliseconds; left at 0 unless timings are requested, so that
    /// reports are reproducible byte for byte.
    pub ms: u64,
}

impl CheckReport {
    pub fn new(check: &str, params: Value, witness: Option<Value>) -> Self {
        let status = if witness.is_none() { Status::Pass } else { Status::Fail };
        CheckReport { check: check.to_string(), params, status, witness, ms: 0 }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// `{"p", "dims"}` merged with `extra`.
fn twist_params(twist: &TwistData, extra: Value) -> Value {
    let mut map = Map::new();
    map.insert("p".into(), json!(twist.p()));
    map.insert("dims".into(), json!(twist.dims()));
    if let Value::Object(rest) = extra {
        map.extend(rest);
    }
    Value::Object(map)
}

fn operator_witness(m: &FockMonomial, lhs: &FockVector, rhs: &FockVector) -> Value {
    json!({ "monomial": m, "lhs": lhs, "rhs": rhs })
}

/// The first basis monomial on which the two operators differ.
fn first_mismatch(
    basis: &[FockMonomial],
    lhs: impl Fn(&FockVector) -> FockVector,
    rhs: impl Fn(&FockVector) -> FockVector,
) -> Option<Value> {
    basis.iter().find_map(|m| {
        let v = FockVector::basis(m.clone());
        let (a, b) = (lhs(&v), rhs(&v));
        (a != b).then(|| operator_witness(m, &a, &b))
    })
}

/// Prepends `extra` to a witness object.
fn tag_witness(extra: Value, witness: Value) -> Value {
    let mut map = match extra {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    if let Value::Object(rest) = witness {
        map.extend(rest);
    }
    Value::Object(map)
}

/// An operator whose images of basis monomials are memoized.
struct Memo {
    op: QuadOp,
    images: RefCell<HashMap<FockMonomial, FockVector>>,
}

impl Memo {
    fn new(op: QuadOp) -> Self {
        Memo { op, images: RefCell::new(HashMap::new()) }
    }

    fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.terms() {
            if let Some(img) = self.images.borrow().get(m) {
                out.add_scaled(img, c);
                continue;
            }
            let img = self.op.apply_monomial(m);
            out.add_scaled(&img, c);
            self.images.borrow_mut().insert(m.clone(), img);
        }
        out
    }
}

/// The operators `L^(r)(n)` (or their bar versions) of one twist, built on
/// demand and shared between the comparisons of a grid.
struct Family {
    twist: TwistData,
    bar: bool,
    ops: RefCell<HashMap<(u32, i64), Rc<Memo>>>,
}

impl Family {
    fn new(twist: &TwistData, bar: bool) -> Self {
        Family { twist: twist.clone(), bar, ops: RefCell::new(HashMap::new()) }
    }

    fn get(&self, r: u32, n: i64) -> Rc<Memo> {
        let mut ops = self.ops.borrow_mut();
        ops.entry((r, n))
            .or_insert_with(|| Rc::new(Memo::new(make_quadratic(QuadKind::Diagonal(r), n, self.bar, &self.twist))))
            .clone()
    }

    fn apply(&self, r: u32, n: i64, v: &FockVector) -> FockVector {
        self.get(r, n).apply(v)
    }

    fn commutator(&self, (r, m): (u32, i64), (s, n): (u32, i64), v: &FockVector) -> FockVector {
        let (a, b) = (self.get(r, m), self.get(s, n));
        a.apply(&b.apply(v)).sub(&b.apply(&a.apply(v)))
    }
}

fn modes(range: i64) -> impl Iterator<Item = i64> + Clone {
    -range..=range
}

/// `d (m^3 - m) / 12`.
fn virasoro_central(d: usize, m: i64) -> Rational {
    Rational::from_int(d as i64) * Rational::new(m * m * m - m, 12)
}

/// `[L(m), L(n)] = (m-n) L(m+n) + d (m^3-m)/12 delta_{m+n,0}` on every
/// basis monomial of weight at most `weight_cap`.
pub fn check_virasoro(twist: &TwistData, m: i64, n: i64, weight_cap: i64) -> CheckReport {
    let family = Family::new(twist, false);
    let params = twist_params(twist, json!({ "m": m, "n": n, "weight_cap": weight_cap }));
    CheckReport::new("virasoro", params, virasoro_at(&family, m, n, weight_cap))
}

/// `check_virasoro` over all `|m|, |n| <= mode_range`, as one report.
pub fn check_virasoro_grid(twist: &TwistData, mode_range: i64, weight_cap: i64) -> CheckReport {
    let family = Family::new(twist, false);
    let params = twist_params(twist, json!({ "mode_range": mode_range, "weight_cap": weight_cap }));
    let witness = modes(mode_range)
        .flat_map(|m| modes(mode_range).map(move |n| (m, n)))
        .find_map(|(m, n)| virasoro_at(&family, m, n, weight_cap));
    CheckReport::new("virasoro", params, witness)
}

fn virasoro_at(family: &Family, m: i64, n: i64, weight_cap: i64) -> Option<Value> {
    let twist = &family.twist;
    let basis = basis(twist, weight_cap * twist.p());
    let central = if m + n == 0 { virasoro_central(twist.total_dim(), m) } else { Rational::zero() };
    let diff = Rational::from_int(m - n);
    first_mismatch(
        &basis,
        |v| family.commutator((0, m), (0, n), v),
        |v| family.apply(0, m + n, v).scale(&diff).add(&v.scale(&central)),
    )
    .map(|w| tag_witness(json!({ "m": m, "n": n }), w))
}

/// Central term of `[X_m^(r), X_n^(s)] - sum_i a_i X_(m+n)^(i)` in the
/// abstract algebra, where `X` is `L` or `Lbar`. Errors with the first
/// non-central difference if the structure constants do not account for
/// the whole bracket.
fn abstract_central(r: u32, s: u32, m: i64, n: i64, bar: bool, cocycle: &Rational) -> Result<Rational, String> {
    let gen = |k: i64, i: u32| if bar { make_lbar(k, i) } else { make_l(k, i) };
    let lhs = bracket_with_cocycle(&gen(m, r), &gen(n, s), cocycle);
    let mut rhs = DOp::zero();
    for (i, a) in &structure_constants(r, s, m, n).values {
        rhs = rhs.add(&gen(m + n, *i).scale(a));
    }
    let rest = lhs.sub(&rhs);
    let central = rest.central().clone();
    match rest.first_difference(&DOp::central_element(central.clone())) {
        Some(diff) => Err(diff),
        None => Ok(central),
    }
}

/// `[L(r; m), L(s; n)] = sum_i a_i L(i; m+n) + central` on the Fock space,
/// with the central term from the abstract bracket (non-bar) or the
/// monomial `bar_central` (bar), times the total dimension.
pub fn check_main1(
    twist: &TwistData,
    r: u32,
    s: u32,
    m: i64,
    n: i64,
    bar: bool,
    weight_cap: i64,
) -> CheckReport {
    let family = Family::new(twist, bar);
    let params =
        twist_params(twist, json!({ "r": r, "s": s, "m": m, "n": n, "bar": bar, "weight_cap": weight_cap }));
    CheckReport::new("main1", params, main1_at(&family, r, s, m, n, weight_cap, &cocycle_normalization()))
}

/// `check_main1` for every `r + s <= rs_max`, over all `|m|, |n| <=
/// mode_range`: one report per `(r, s)`. `cocycle` replaces the bracket's
/// cocycle scale in the non-bar central term.
pub fn check_main1_grid(
    twist: &TwistData,
    rs_max: u32,
    mode_range: i64,
    bar: bool,
    weight_cap: i64,
    cocycle: &Rational,
) -> Vec<CheckReport> {
    let family = Family::new(twist, bar);
    let mut out = Vec::new();
    for r in 0..=rs_max {
        for s in 0..=(rs_max - r) {
            let params = twist_params(
                twist,
                json!({ "r": r, "s": s, "mode_range": mode_range, "bar": bar, "weight_cap": weight_cap }),
            );
            let witness = modes(mode_range)
                .flat_map(|m| modes(mode_range).map(move |n| (m, n)))
                .find_map(|(m, n)| main1_at(&family, r, s, m, n, weight_cap, cocycle));
            out.push(CheckReport::new("main1", params, witness));
        }
    }
    out
}

fn main1_at(family: &Family, r: u32, s: u32, m: i64, n: i64, weight_cap: i64, cocycle: &Rational) -> Option<Value> {
    let twist = &family.twist;
    let d = Rational::from_int(twist.total_dim() as i64);
    let at = json!({ "m": m, "n": n });
    let central = if family.bar {
        if m + n == 0 { bar_central(r, s, m) * &d } else { Rational::zero() }
    } else {
        match abstract_central(r, s, m, n, false, cocycle) {
            Ok(c) => c * &d,
            Err(diff) => return Some(tag_witness(at, json!({ "abstract": diff }))),
        }
    };
    let coeffs = structure_constants(r, s, m, n).values;
    let basis = basis(twist, weight_cap * twist.p());
    first_mismatch(
        &basis,
        |v| family.commutator((r, m), (s, n), v),
        |v| {
            let mut out = v.scale(&central);
            for (i, a) in &coeffs {
                out.add_scaled(&family.apply(*i, m + n, v), a);
            }
            out
        },
    )
    .map(|w| tag_witness(at, w))
}

/// The central scalar read off the Fock side on the vacuum: the vacuum
/// component of `[L(r; m), L(s; -m)] vac` minus that of the structure
/// constant terms.
fn fock_central(family: &Family, r: u32, s: u32, m: i64) -> Rational {
    let vac = FockVector::vacuum();
    let empty = FockMonomial::default();
    let mut c = family.commutator((r, m), (s, -m), &vac).coeff(&empty);
    for (i, a) in &structure_constants(r, s, m, -m).values {
        c -= &(a * &family.apply(*i, 0, &vac).coeff(&empty));
    }
    c
}

/// Cross-realization: for all `r + s <= rs_max` and `|m| <= mode_range`,
/// the central scalar of the Fock commutator on the vacuum equals the
/// abstract central coefficient times the total dimension.
pub fn check_cross_realization(
    twist: &TwistData,
    rs_max: u32,
    mode_range: i64,
    bar: bool,
    cocycle: &Rational,
) -> CheckReport {
    let family = Family::new(twist, bar);
    let d = Rational::from_int(twist.total_dim() as i64);
    let params = twist_params(twist, json!({ "rs_max": rs_max, "mode_range": mode_range, "bar": bar }));
    let mut witness = None;
    'grid: for r in 0..=rs_max {
        for s in 0..=(rs_max - r) {
            for m in modes(mode_range) {
                let at = json!({ "r": r, "s": s, "m": m, "n": -m });
                let fock = fock_central(&family, r, s, m);
                let abs = match abstract_central(r, s, m, -m, bar, cocycle) {
                    Ok(c) => c * &d,
                    Err(diff) => {
                        witness = Some(tag_witness(at, json!({ "abstract": diff })));
                        break 'grid;
                    }
                };
                if fock != abs {
                    witness = Some(tag_witness(at, json!({ "fock": fock, "abstract": abs })));
                    break 'grid;
                }
            }
        }
    }
    CheckReport::new("cross_realization", params, witness)
}

/// The bar central scalar sampled at `m = 1..=4` is a pure monomial: with
/// `D = 2(r+s)+3`, fitting `c_D m^D + ... + c_(D-3) m^(D-3)` through the
/// samples gives zero lower coefficients and
/// `c_D = (r+s+1)!^2 / (2 (2(r+s)+3)!) d`.
pub fn check_central_monomial(twist: &TwistData, r: u32, s: u32) -> CheckReport {
    let family = Family::new(twist, true);
    let deg = 2 * (r + s) as i64 + 3;
    let samples: Vec<(i64, Rational)> = (1..=4).map(|m| (m, fock_central(&family, r, s, m))).collect();
    // c(m) / m^(D-3) is a cubic whose coefficients are c_(D-3..=D)
    let points: Vec<(Rational, Rational)> = samples
        .iter()
        .map(|(m, c)| (Rational::from_int(*m), c / &Rational::from_int(*m).pow(deg as i32 - 3)))
        .collect();
    let cubic = interpolate(&points);
    let d = Rational::from_int(twist.total_dim() as i64);
    let leading = bar_central(r, s, 1) * &d;
    let mut expected = vec![Rational::zero(); 4];
    expected[3] = leading;
    let params = twist_params(twist, json!({ "r": r, "s": s, "degree": deg, "samples": [1, 2, 3, 4] }));
    let witness = (cubic != expected).then(|| {
        json!({
            "coefficients_from_low_degree": cubic,
            "expected": expected,
            "samples": samples.iter().map(|(m, c)| json!({ "m": m, "central": c })).collect::<Vec<_>>(),
        })
    });
    CheckReport::new("central_monomial", params, witness)
}

/// Coefficients (constant term first) of the polynomial of degree
/// `< points.len()` through `points`, by Newton's divided differences.
fn interpolate(points: &[(Rational, Rational)]) -> Vec<Rational> {
    let n = points.len();
    let xs: Vec<Rational> = points.iter().map(|(x, _)| x.clone()).collect();
    let mut table: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            table[i] = (&table[i] - &table[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // expand the Newton form from the innermost factor outwards
    let mut coeffs = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut next = vec![Rational::zero(); n];
        for (k, c) in coeffs.iter().enumerate() {
            if k + 1 < n {
                next[k + 1] += c;
            }
            next[k] -= &(c * &xs[i]);
        }
        next[0] += &table[i];
        coeffs = next;
    }
    coeffs
}

/// Corrections of `L^(r)(0)`: the scalar-series value of the general
/// operator `(r, r)` against the closed Bernoulli forms for `r <= r_max`,
/// in both versions.
pub fn check_corrections(twist: &TwistData, r_max: u32) -> CheckReport {
    let params = twist_params(twist, json!({ "r_max": r_max }));
    let mut witness = None;
    'outer: for r in 0..=r_max {
        for bar in [false, true] {
            let from_series = make_quadratic(QuadKind::General(r, r), 0, bar, twist).correction().clone();
            let closed = diagonal_correction_closed_form(r, bar, twist);
            let used = make_quadratic(QuadKind::Diagonal(r), 0, bar, twist).correction().clone();
            if from_series != closed || used != closed {
                witness = Some(json!({ "r": r, "bar": bar, "series": from_series, "closed_form": closed, "operator": used }));
                break 'outer;
            }
        }
    }
    CheckReport::new("corrections", params, witness)
}

/// Untwisted bar corrections are `d (-1)^r zeta(-1-2r) / 2`.
pub fn check_untwisted_bar_corrections(d: usize, r_max: u32) -> CheckReport {
    let twist = TwistData::untwisted(d);
    let params = twist_params(&twist, json!({ "r_max": r_max }));
    let witness = (0..=r_max).find_map(|r| {
        let got = make_quadratic(QuadKind::Diagonal(r), 0, true, &twist).correction().clone();
        let want = Rational::from_int(d as i64) * Rational::sign_power(r as i64) * zeta_negative(1 + 2 * r as usize)
            / Rational::from_int(2);
        (got != want).then(|| json!({ "r": r, "operator": got, "zeta_value": want }))
    });
    CheckReport::new("untwisted_bar_corrections", params, witness)
}

/// `delta(L_0^(k))` for `1 <= k <= k_max`, from the vacuum eigenvalue
/// `L^(k)(0) vac = (-1)^k delta vac` and from the expansion of
/// `1/2 d/dx sum_j d_j (e^(j x/p) - 1) / (1 - e^x)` (coefficient of
/// `x^(2k)` times `(2k)!`). Odd powers of the expansion must vanish.
pub fn check_delta_generating(twist: &TwistData, k_max: u32) -> CheckReport {
    let params = twist_params(twist, json!({ "k_max": k_max }));
    let witness = match delta_series(twist, 2 * k_max as i64) {
        Err(e) => Some(json!({ "error": e })),
        Ok(coeffs) => {
            let odd = (1..=2 * k_max as usize)
                .step_by(2)
                .find(|&e| !coeffs[e].is_zero())
                .map(|e| json!({ "odd_power": e, "coefficient": coeffs[e] }));
            odd.or_else(|| {
                (1..=k_max).find_map(|k| {
                    let vac = FockVector::vacuum();
                    let eigen = make_quadratic(QuadKind::Diagonal(k), 0, false, twist)
                        .apply(&vac)
                        .coeff(&FockMonomial::default());
                    let fock = Rational::sign_power(k as i64) * eigen;
                    let series = &coeffs[2 * k as usize] * &Rational::factorial(2 * k);
                    (fock != series).then(|| json!({ "k": k, "fock": fock, "series": series }))
                })
            })
        }
    };
    CheckReport::new("delta_generating", params, witness)
}

/// Coefficients of `x^0..=x^top` of the generating series above.
fn delta_series(twist: &TwistData, top: i64) -> Result<Vec<Rational>, String> {
    let spec = VarSpec::integral("x", -3, top + 3);
    let vars = vec![spec.clone()];
    let one = Series::constant(vars.clone(), Rational::one());
    let mut numerator = Series::zero(vars.clone());
    for k in 0..twist.p() as usize {
        let d = Rational::from_int(twist.dim(k) as i64);
        if d.is_zero() {
            continue;
        }
        let term = Series::exp_scaled(spec.clone(), &Rational::new(k as i64, twist.p()), top + 2)
            .sub(&one)
            .map_err(|e| e.to_string())?;
        numerator = numerator.add(&term.scale(&d)).map_err(|e| e.to_string())?;
    }
    let denominator = one.sub(&Series::exp_scaled(spec, &Rational::one(), top + 3)).map_err(|e| e.to_string())?;
    let inverse = denominator.inverse().map_err(|e| e.to_string())?;
    let quotient = numerator.mul(&inverse).map_err(|e| e.to_string())?;
    let delta = quotient.derivative(0).scale(&Rational::new(1, 2));
    (0..=top)
        .map(|e| {
            if delta.is_trusted(&[e]) {
                Ok(delta.coeff(&[e]))
            } else {
                Err(format!("x^{e} outside the trusted window"))
            }
        })
        .collect()
}

/// `L^(r1, r2)(n)` maps weight `w` to weight `w - n`.
pub fn check_grading(twist: &TwistData, mode_range: i64, r_max: u32, weight_cap: i64) -> CheckReport {
    let p = twist.p();
    let params = twist_params(twist, json!({ "mode_range": mode_range, "r_max": r_max, "weight_cap": weight_cap }));
    let basis = basis(twist, weight_cap * p);
    let mut witness = None;
    'outer: for n in modes(mode_range) {
        for r1 in 0..=r_max {
            for r2 in 0..=r_max {
                let op = make_quadratic(QuadKind::General(r1, r2), n, false, twist);
                for m in &basis {
                    let img = op.apply_monomial(m);
                    let bad = img.terms().find(|(m2, _)| m2.weight_numerator() != m.weight_numerator() - n * p);
                    if let Some((bad, _)) = bad {
                        witness = Some(json!({ "n": n, "r1": r1, "r2": r2, "monomial": m, "image_monomial": bad }));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckReport::new("grading", params, witness)
}

/// Normal ordering is symmetric: the kernels `j^a l^b` and `j^b l^a` give
/// the same operator.
pub fn check_normal_ordering_symmetry(twist: &TwistData, mode_range: i64, r_max: u32, weight_cap: i64) -> CheckReport {
    let params = twist_params(twist, json!({ "mode_range": mode_range, "r_max": r_max, "weight_cap": weight_cap }));
    let basis = basis(twist, weight_cap * twist.p());
    let mut witness = None;
    'outer: for n in modes(mode_range) {
        for bar in [false, true] {
            for r1 in 0..=r_max {
                for r2 in 0..r1 {
                    let a = make_quadratic(QuadKind::General(r1, r2), n, bar, twist);
                    let b = make_quadratic(QuadKind::General(r2, r1), n, bar, twist);
                    if let Some(w) = first_mismatch(&basis, |v| a.apply(v), |v| b.apply(v)) {
                        witness = Some(tag_witness(json!({ "n": n, "bar": bar, "r1": r1, "r2": r2 }), w));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckReport::new("normal_ordering_symmetry", params, witness)
}

/// `L^(r1, r2)(n) = sum_r C_n^(r1,r2|r) L^(r)(n)` as operators, and at
/// `n = 0` the coefficients are `(-1)^(r1+r) delta_{r1+r2, 2r}`.
pub fn check_lincomb(twist: &TwistData, mode_range: i64, degree_max: u32, weight_cap: i64) -> CheckReport {
    let params =
        twist_params(twist, json!({ "mode_range": mode_range, "degree_max": degree_max, "weight_cap": weight_cap }));
    let basis = basis(twist, weight_cap * twist.p());
    let mut witness = None;
    'outer: for r1 in 0..=degree_max {
        for r2 in 0..=(degree_max - r1) {
            let at_zero = lincomb_coefficients(r1, r2, 0);
            let mut want = BTreeMap::new();
            if (r1 + r2) % 2 == 0 {
                let r = (r1 + r2) / 2;
                want.insert(r, Rational::sign_power((r1 + r) as i64));
            }
            if at_zero != want {
                witness = Some(json!({ "r1": r1, "r2": r2, "n": 0, "coefficients": at_zero, "expected": want }));
                break 'outer;
            }
            for n in modes(mode_range) {
                let coeffs = lincomb_coefficients(r1, r2, n);
                for bar in [false, true] {
                    let lhs = make_quadratic(QuadKind::General(r1, r2), n, bar, twist);
                    let mut rhs = QuadOp::scalar(twist, n, Rational::zero());
                    for (r, c) in &coeffs {
                        let term = make_quadratic(QuadKind::Diagonal(*r), n, bar, twist).scale(c);
                        rhs = rhs.add(&term).expect("same mode");
                    }
                    if let Some(w) = first_mismatch(&basis, |v| lhs.apply(v), |v| rhs.apply(v)) {
                        witness = Some(tag_witness(json!({ "r1": r1, "r2": r2, "n": n, "bar": bar }), w));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckReport::new("lincomb", params, witness)
}

/// `[a_{k,i}(x), a_{k',j}(y)] = x (e_{k,i}, e_{k',j}) delta_{x+y,0}` on the
/// Fock space, for nonzero levels up to `level_range` in absolute value.
pub fn check_heisenberg(twist: &TwistData, level_range: i64, weight_cap: i64) -> CheckReport {
    let p = twist.p();
    let params = twist_params(twist, json!({ "level_range": level_range, "weight_cap": weight_cap }));
    let basis = basis(twist, weight_cap * p);
    let all: Vec<_> =
        (-level_range * p..=level_range * p).filter(|l| *l != 0).flat_map(|l| modes_at(twist, l)).collect();
    let mut witness = None;
    'outer: for a in &all {
        for b in &all {
            let scalar = if a.level + b.level == 0 {
                pairing(twist, a.k, a.i, b.k, b.i) * Rational::new(a.level, p)
            } else {
                Rational::zero()
            };
            let act = |x, v: &FockVector| apply_mode(twist, x, v).expect("valid mode");
            if let Some(w) = first_mismatch(&basis, |v| act(*a, &act(*b, v)).sub(&act(*b, &act(*a, v))), |v| v.scale(&scalar)) {
                witness = Some(tag_witness(json!({ "a": a.to_string(), "b": b.to_string() }), w));
                break 'outer;
            }
        }
    }
    CheckReport::new("heisenberg", params, witness)
}

/// Jacobi identity of the abstract bracket on `{L_n^(r) : |n| <= n_max,
/// r <= r_max}`.
pub fn check_jacobi(n_max: i64, r_max: u32, cocycle: &Rational) -> CheckReport {
    let params = json!({ "n_max": n_max, "r_max": r_max, "cocycle": cocycle });
    let gens: Vec<(i64, u32, DOp)> =
        modes(n_max).flat_map(|n| (0..=r_max).map(move |r| (n, r, make_l(n, r)))).collect();
    let br = |a: &DOp, b: &DOp| bracket_with_cocycle(a, b, cocycle);
    let mut witness = None;
    'outer: for (i, (n1, r1, a)) in gens.iter().enumerate() {
        for (j, (n2, r2, b)) in gens.iter().enumerate().skip(i + 1) {
            let ab = br(a, b);
            for (n3, r3, c) in gens.iter().skip(j + 1) {
                let sum = br(&ab, c).add(&br(&br(b, c), a)).add(&br(&br(c, a), b));
                if !sum.is_zero() {
                    witness = Some(json!({ "generators": [[n1, r1], [n2, r2], [n3, r3]], "sum": sum }));
                    break 'outer;
                }
            }
        }
    }
    CheckReport::new("jacobi", params, witness)
}

/// `verify_bl2coc` over `|m|, |n| <= mode_range` for one `(r, s)`.
pub fn check_bl2coc(r: u32, s: u32, mode_range: i64, cocycle: &Rational) -> CheckReport {
    let params = json!({ "r": r, "s": s, "mode_range": mode_range, "cocycle": cocycle });
    let witness = modes(mode_range).flat_map(|m| modes(mode_range).map(move |n| (m, n))).find_map(|(m, n)| {
        let rep = crate::diffops::verify_bl2coc_with(r, s, m, n, cocycle);
        (!rep.pass).then(|| {
            json!({ "m": m, "n": n, "difference": rep.difference, "bracket": rep.bracket, "expected": rep.expected })
        })
    });
    CheckReport::new("bl2coc", params, witness)
}

/// Bernoulli generating function to `max_degree` at `v`.
pub fn check_bernoulli(v: &Rational, max_degree: usize) -> CheckReport {
    let rep = crate::bernoulli::check_generating_function(max_degree, v);
    let witness = rep.first_failure().map(|row| json!({ "k": row.k, "expected": row.expected, "actual": row.actual }));
    CheckReport::new("bernoulli", json!({ "v": v, "max_degree": max_degree }), witness)
}

/// The delta-function identities at period `p` on a window.
pub fn check_delta_identities(p: i64, window: i64) -> CheckReport {
    let params = json!({ "p": p, "window": window });
    let witness = match crate::series::check_delta_identities(p, window) {
        Err(e) => Some(json!({ "error": e.to_string() })),
        Ok(rep) => rep.outcomes.iter().find(|o| !o.pass).map(|o| serde_json::to_value(o).expect("serializable")),
    };
    CheckReport::new("delta_identities", params, witness)
}
