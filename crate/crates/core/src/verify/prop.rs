//! The commutator of two generating series of bar operators.
//!
//! With `Lbar(y1, y2; x) = sum G^(r1,r2)(n) y1^r1 y2^r2 x^-n / (r1! r2!)`
//! plus `1/2 d (y1 - y2)^-2` at `n = 0`, the coefficient of
//! `x1^-M x2^-N` in `[Lbar(y1, y2; x1), Lbar(y3, y4; x2)]` is
//!
//! ```text
//! -1/2 d/dy1 [ Lbar_(M+N)(-y1+y2+y3, y4) e^(-M(y1-y3)) + Lbar_(M+N)(-y1+y2+y4, y3) e^(-M(y1-y4)) ]
//! -1/2 d/dy2 [ Lbar_(M+N)(y1-y2+y3, y4) e^(-M(y2-y3)) + Lbar_(M+N)(y1-y2+y4, y3) e^(-M(y2-y4)) ]
//! ```
//!
//! Both sides are expanded coefficientwise in `y1..y4`. The substituted
//! arguments and exponentials are expanded with the series engine; the
//! singular scalar terms are expanded in `|y1| > |y2|, |y3|, |y4|`, and
//! their poles in `y1` must cancel between the four terms.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{first_mismatch, tag_witness, twist_params, CheckReport};
use crate::diffops::{bar_central, structure_constants};
use crate::fock::{basis, commutator_apply, generating_operator, make_quadratic, FockMonomial, FockVector, GeneratingOperator, QuadKind, QuadOp, TwistData};
use crate::rational::Rational;
use crate::series::{Series, VarSpec};

/// One of the four right-hand terms: differentiate in `dvar`, substitute
/// `first . y` and `y_second` into the generating series, multiply by
/// `exp(-M shift . y)`. `pole_rest` is `first . y - y_second - y1` up to
/// an overall sign, which the square removes.
struct Term {
    dvar: usize,
    first: [i64; 4],
    second: usize,
    shift: [i64; 4],
    pole_rest: [i64; 4],
}

const TERMS: [Term; 4] = [
    Term { dvar: 0, first: [-1, 1, 1, 0], second: 3, shift: [1, 0, -1, 0], pole_rest: [0, -1, -1, 1] },
    Term { dvar: 0, first: [-1, 1, 0, 1], second: 2, shift: [1, 0, 0, -1], pole_rest: [0, -1, 1, -1] },
    Term { dvar: 1, first: [1, -1, 1, 0], second: 3, shift: [0, 1, -1, 0], pole_rest: [0, -1, 1, -1] },
    Term { dvar: 1, first: [1, -1, 0, 1], second: 2, shift: [0, 1, 0, -1], pole_rest: [0, -1, -1, 1] },
];

/// Exponents `(e1, .., e4)` with total degree at most `cap`.
fn exponents(cap: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in 0..=cap {
        for b in 0..=(cap - a) {
            for c in 0..=(cap - a - b) {
                for d in 0..=(cap - a - b - c) {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn factorials(e: &[u32; 4]) -> Rational {
    e.iter().map(|k| Rational::factorial(*k)).product()
}

/// Ambient windows: `y1` reaches far enough down that the Laurent
/// expansion of the poles stays exact through total degree `y_cap`.
fn variables(y_cap: u32) -> Vec<VarSpec> {
    let h = y_cap as i64 + 3;
    vec![
        VarSpec::integral("y1", -3 * h - 4, h),
        VarSpec::integral("y2", 0, h),
        VarSpec::integral("y3", 0, h),
        VarSpec::integral("y4", 0, h),
    ]
}

fn linear(vars: &[VarSpec], coeffs: &[i64; 4]) -> Series {
    let terms = (0..4).filter(|&i| coeffs[i] != 0).map(|i| {
        let mut e = vec![0; 4];
        e[i] = 1;
        (e, Rational::from_int(coeffs[i]))
    });
    Series::polynomial(vars.to_vec(), terms)
}

fn shift_exponential(vars: &[VarSpec], term: &Term, m: i64, cap: i64) -> Result<Series, String> {
    let coeffs: Vec<(usize, Rational)> = (0..4).map(|i| (i, Rational::from_int(term.shift[i]))).collect();
    Series::exp_linear(vars.to_vec(), &coeffs, &Rational::from_int(-m), cap).map_err(|e| e.to_string())
}

fn coefficient_at(s: &Series, e: &[i64]) -> Result<Rational, String> {
    if s.is_trusted(e) {
        Ok(s.coeff(e))
    } else {
        Err(format!("y^{e:?} outside the trusted window"))
    }
}

/// Regular part of the right-hand side at first mode `m`: for each `y^e`
/// with `|e| <= y_cap`, the coefficients `c` with which
/// `G^(r1,r2)(m + n)` enters.
type RegularRhs = BTreeMap<[u32; 4], BTreeMap<(u32, u32), Rational>>;

fn regular_rhs(m: i64, y_cap: u32) -> Result<RegularRhs, String> {
    let vars = variables(y_cap);
    let top = y_cap + 1;
    let mut out: RegularRhs = BTreeMap::new();
    for term in &TERMS {
        let exp = shift_exponential(&vars, term, m, top as i64)?;
        let first = linear(&vars, &term.first);
        let mut second = [0; 4];
        second[term.second] = 1;
        let second = linear(&vars, &second);
        for r1 in 0..=top {
            for r2 in 0..=(top - r1) {
                let mono = first.pow(r1).and_then(|a| a.mul(&second.pow(r2)?)).map_err(|e| e.to_string())?;
                let scale = -Rational::new(1, 2) / (Rational::factorial(r1) * Rational::factorial(r2));
                let s = mono.mul(&exp).map_err(|e| e.to_string())?.derivative(term.dvar).scale(&scale);
                for e in exponents(y_cap) {
                    let ei: Vec<i64> = e.iter().map(|x| *x as i64).collect();
                    let c = coefficient_at(&s, &ei)?;
                    if !c.is_zero() {
                        let slot = out.entry(e).or_default().entry((r1, r2)).or_insert_with(Rational::zero);
                        *slot += &c;
                    }
                }
            }
        }
    }
    for row in out.values_mut() {
        row.retain(|_, c| !c.is_zero());
    }
    Ok(out)
}

/// The singular scalar terms at first mode `m`, summed over the four
/// right-hand terms: `-1/2 d/dy [weight (Y1 - Y2)^-2 e^(-m shift . y)]`.
fn singular_term(m: i64, y_cap: u32, weight: &Rational, term: &Term) -> Result<Series, String> {
    let vars = variables(y_cap);
    // the pole costs two degrees and the derivative one more
    let exp = shift_exponential(&vars, term, m, y_cap as i64 + 3)?;
    let rest = linear(&vars, &term.pole_rest);
    let pole = Series::binomial_power(0, 1, &rest, &Rational::from_int(-2)).map_err(|e| e.to_string())?;
    let s = pole.mul(&exp).map_err(|e| e.to_string())?;
    Ok(s.derivative(term.dvar).scale(&(-Rational::new(1, 2) * weight)))
}

/// Trusted coefficients of total degree at most `y_cap` of the summed
/// singular terms. Returns the regular part; any surviving pole in `y1`
/// is an error naming its exponent.
fn singular_rhs(m: i64, y_cap: u32, weight: &Rational) -> Result<BTreeMap<[u32; 4], Rational>, Value> {
    let mut sum: Option<Series> = None;
    for term in &TERMS {
        let s = singular_term(m, y_cap, weight, term).map_err(|e| json!({ "error": e }))?;
        sum = Some(match sum {
            None => s,
            Some(acc) => acc.add(&s).map_err(|e| json!({ "error": e.to_string() }))?,
        });
    }
    let sum = sum.expect("four terms");
    for (e, c) in sum.terms() {
        if e[0] < 0 && e.iter().sum::<i64>() <= y_cap as i64 && sum.is_trusted(e) && !c.is_zero() {
            return Err(json!({ "pole": e, "coefficient": c }));
        }
    }
    let mut out = BTreeMap::new();
    for e in exponents(y_cap) {
        let ei: Vec<i64> = e.iter().map(|x| *x as i64).collect();
        let c = coefficient_at(&sum, &ei).map_err(|err| json!({ "error": err }))?;
        if !c.is_zero() {
            out.insert(e, c);
        }
    }
    Ok(out)
}

/// `sum c G^(r1,r2)(n)` times `scale`, plus `scalar`.
fn combine(gen: &GeneratingOperator, twist: &TwistData, n: i64, row: Option<&BTreeMap<(u32, u32), Rational>>, scale: &Rational, scalar: Rational) -> QuadOp {
    let mut op = QuadOp::scalar(twist, n, scalar);
    for ((r1, r2), c) in row.into_iter().flatten() {
        let g = gen.coefficient(*r1, *r2, n).expect("generating operator covers the substituted degrees");
        op = op.add(&g.scale(&(c * scale))).expect("same mode");
    }
    op
}

/// The operator standing at `y^e x1^-m x2^-n` on the right, multiplied by
/// `e1! e2! e3! e4!`.
struct RhsTables {
    regular: RegularRhs,
    singular: Option<BTreeMap<[u32; 4], Rational>>,
}

fn rhs_tables(gen: &GeneratingOperator, m: i64, y_cap: u32, with_singular: bool) -> Result<RhsTables, Value> {
    let regular = regular_rhs(m, y_cap).map_err(|e| json!({ "error": e }))?;
    let singular = if with_singular { Some(singular_rhs(m, y_cap, &gen.singular)?) } else { None };
    Ok(RhsTables { regular, singular })
}

fn rhs_operator(gen: &GeneratingOperator, twist: &TwistData, tables: &RhsTables, e: &[u32; 4], total: i64) -> QuadOp {
    let fact = factorials(e);
    let scalar = match (&tables.singular, total) {
        (Some(sing), 0) => sing.get(e).map_or_else(Rational::zero, |c| c * &fact),
        _ => Rational::zero(),
    };
    combine(gen, twist, total, tables.regular.get(e), &fact, scalar)
}

fn exp_json(e: &[u32; 4]) -> Value {
    json!(e)
}

fn prop_params(twist: &TwistData, y_cap: u32, mode_window: i64, weight_cap: Option<i64>) -> Value {
    match weight_cap {
        Some(w) => twist_params(twist, json!({ "y_cap": y_cap, "mode_window": mode_window, "weight_cap": w })),
        None => twist_params(twist, json!({ "y_cap": y_cap, "mode_window": mode_window })),
    }
}

/// Both sides of the generating-series commutator, coefficientwise for
/// total y-degree at most `y_cap` and modes `|M|, |N| <= mode_window`, as
/// operators on basis monomials of weight at most `weight_cap`.
pub fn check_prop_bracket(twist: &TwistData, y_cap: u32, mode_window: i64, weight_cap: i64) -> CheckReport {
    let params = prop_params(twist, y_cap, mode_window, Some(weight_cap));
    CheckReport::new("prop_bracket", params, prop_bracket_witness(twist, y_cap, mode_window, weight_cap))
}

fn prop_bracket_witness(twist: &TwistData, y_cap: u32, mode_window: i64, weight_cap: i64) -> Option<Value> {
    let gen = generating_operator(true, twist, y_cap + 1, 2 * mode_window);
    let basis = basis(twist, weight_cap * twist.p());
    for m in -mode_window..=mode_window {
        let tables = match rhs_tables(&gen, m, y_cap, -mode_window <= -m && -m <= mode_window) {
            Ok(t) => t,
            Err(w) => return Some(tag_witness(json!({ "M": m }), w)),
        };
        for n in -mode_window..=mode_window {
            for e in exponents(y_cap) {
                let a = gen.coefficient(e[0], e[1], m).expect("in range");
                let b = gen.coefficient(e[2], e[3], n).expect("in range");
                let rhs = rhs_operator(&gen, twist, &tables, &e, m + n);
                if let Some(w) = first_mismatch(&basis, |v| commutator_apply(a, b, v), |v| rhs.apply(v)) {
                    return Some(tag_witness(json!({ "y_exponent": exp_json(&e), "M": m, "N": n }), w));
                }
            }
        }
    }
    None
}

/// The identity component at `N = -M`: the vacuum expectation of the
/// commutator against the scalar parts of the right side, including the
/// singular terms, whose poles must cancel.
pub fn check_prop_scalar_sector(twist: &TwistData, y_cap: u32, mode_window: i64) -> CheckReport {
    let params = prop_params(twist, y_cap, mode_window, None);
    let gen = generating_operator(true, twist, y_cap + 1, 2 * mode_window);
    let vac = FockVector::vacuum();
    let empty = FockMonomial::default();
    let mut witness = None;
    'outer: for m in -mode_window..=mode_window {
        let tables = match rhs_tables(&gen, m, y_cap, true) {
            Ok(t) => t,
            Err(w) => {
                witness = Some(tag_witness(json!({ "M": m }), w));
                break;
            }
        };
        for e in exponents(y_cap) {
            let a = gen.coefficient(e[0], e[1], m).expect("in range");
            let b = gen.coefficient(e[2], e[3], -m).expect("in range");
            let lhs = commutator_apply(a, b, &vac).coeff(&empty);
            let rhs = rhs_operator(&gen, twist, &tables, &e, 0).apply(&vac).coeff(&empty);
            if lhs != rhs {
                witness = Some(json!({ "y_exponent": exp_json(&e), "M": m, "N": -m, "lhs": lhs, "rhs": rhs }));
                break 'outer;
            }
        }
    }
    CheckReport::new("prop_scalar", params, witness)
}

/// Untwisted agreement with the representation check: at
/// `y^(r, r, s, s)` the generating coefficients are `Lbar^(r)(M)` and
/// `Lbar^(s)(N)`, and the right side times `(r! s!)^2` is
/// `sum_i a_i Lbar^(i)(M+N) + delta_{M+N,0} bar_central d`.
pub fn check_prop_main1_agreement(twist: &TwistData, y_cap: u32, mode_window: i64, weight_cap: i64) -> CheckReport {
    let params = prop_params(twist, y_cap, mode_window, Some(weight_cap));
    let gen = generating_operator(true, twist, y_cap + 1, 2 * mode_window);
    let basis = basis(twist, weight_cap * twist.p());
    let d = Rational::from_int(twist.total_dim() as i64);
    let mut witness = None;
    'outer: for m in -mode_window..=mode_window {
        let tables = match rhs_tables(&gen, m, y_cap, true) {
            Ok(t) => t,
            Err(w) => {
                witness = Some(tag_witness(json!({ "M": m }), w));
                break;
            }
        };
        for n in -mode_window..=mode_window {
            for r in 0..=y_cap / 2 {
                for s in 0..=(y_cap / 2 - r) {
                    let e = [r, r, s, s];
                    let at = json!({ "r": r, "s": s, "M": m, "N": n });
                    for (deg, mode) in [(r, m), (s, n)] {
                        let coefficient = gen.coefficient(deg, deg, mode).expect("in range");
                        let direct = make_quadratic(QuadKind::Diagonal(deg), mode, true, twist);
                        if let Some(w) = first_mismatch(&basis, |v| coefficient.apply(v), |v| direct.apply(v)) {
                            witness = Some(tag_witness(tag_witness(at, json!({ "generator": [deg, mode] })), w));
                            break 'outer;
                        }
                    }
                    let rhs = rhs_operator(&gen, twist, &tables, &e, m + n);
                    let central = if m + n == 0 { bar_central(r, s, m) * &d } else { Rational::zero() };
                    let coeffs = structure_constants(r, s, m, n).values;
                    let mut main1 = QuadOp::scalar(twist, m + n, central);
                    for (i, a) in &coeffs {
                        main1 = main1.add(&make_quadratic(QuadKind::Diagonal(*i), m + n, true, twist).scale(a)).expect("same mode");
                    }
                    if let Some(w) = first_mismatch(&basis, |v| rhs.apply(v), |v| main1.apply(v)) {
                        witness = Some(tag_witness(at, w));
                        break 'outer;
                    }
                }
            }
        }
    }
    CheckReport::new("prop_main1", params, witness)
}

#[cfg(test)]
pub(super) fn singular_terms_for_test(m: i64, y_cap: u32) -> Vec<Series> {
    TERMS.iter().map(|t| singular_term(m, y_cap, &Rational::one(), t).unwrap()).collect()
}
