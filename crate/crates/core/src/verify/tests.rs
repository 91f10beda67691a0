use super::*;
use crate::fock::commutator_apply;
use crate::rational::q;

fn twist(p: i64, dims: &[usize]) -> TwistData {
    TwistData::new(p, dims.to_vec()).unwrap()
}

fn assert_pass(rep: &CheckReport) {
    assert!(rep.passed(), "{}", serde_json::to_string_pretty(rep).unwrap());
}

#[test]
fn virasoro_examples() {
    assert_pass(&check_virasoro(&TwistData::untwisted(1), 2, -2, 5));
    assert_pass(&check_virasoro(&twist(2, &[0, 1]), 1, -1, 4));
    assert_pass(&check_virasoro(&twist(3, &[1, 1, 1]), 3, 3, 2));
    assert_eq!(virasoro_central(1, 2), q(1, 2));
}

#[test]
fn virasoro_needs_the_twisted_correction() {
    // Without the 1/16 in L(0) the commutator [L(1), L(-1)] = 2 L(0) fails
    // on the vacuum.
    let t = twist(2, &[0, 1]);
    let l1 = make_quadratic(QuadKind::Diagonal(0), 1, false, &t);
    let lm1 = make_quadratic(QuadKind::Diagonal(0), -1, false, &t);
    let vac = FockVector::vacuum();
    let bare = QuadOp::new(&t, 0, BTreeMap::from([((0, 0), Rational::one())]), Rational::zero());
    let lhs = commutator_apply(&l1, &lm1, &vac);
    assert_ne!(lhs, bare.apply(&vac).scale(&q(2, 1)));
    assert_eq!(lhs, make_quadratic(QuadKind::Diagonal(0), 0, false, &t).apply(&vac).scale(&q(2, 1)));
}

#[test]
fn main1_examples() {
    let rep = check_main1(&TwistData::untwisted(1), 1, 1, 1, -1, true, 4);
    assert_pass(&rep);
    assert_eq!(bar_central(1, 1, 1), q(1, 280));
    assert_pass(&check_main1(&twist(3, &[1, 1, 1]), 0, 1, 2, -2, true, 3));
    assert_pass(&check_main1(&twist(2, &[0, 1]), 0, 0, 2, -2, false, 4));
}

#[test]
fn main1_grid_small() {
    for t in [TwistData::untwisted(2), twist(2, &[1, 1])] {
        for bar in [false, true] {
            for rep in check_main1_grid(&t, 1, 2, bar, 3, &cocycle_normalization()) {
                assert_pass(&rep);
            }
        }
    }
}

#[test]
fn corrupted_cocycle_is_caught() {
    let bad = q(1, 2);
    let reps = check_main1_grid(&TwistData::untwisted(1), 0, 2, false, 3, &bad);
    assert!(!reps[0].passed());
    let w = reps[0].witness.as_ref().unwrap();
    assert!(w.get("monomial").is_some() && w.get("lhs").is_some() && w.get("rhs").is_some());
    assert!(!check_bl2coc(0, 0, 2, &bad).passed());
    assert!(!check_cross_realization(&TwistData::untwisted(1), 1, 2, true, &bad).passed());
    // the cocycle scale does not affect the Jacobi identity
    assert_pass(&check_jacobi(1, 1, &bad));
}

#[test]
fn cross_realization_and_monomial() {
    for t in [TwistData::untwisted(1), twist(2, &[0, 1]), twist(3, &[0, 1, 1])] {
        for bar in [false, true] {
            assert_pass(&check_cross_realization(&t, 2, 2, bar, &cocycle_normalization()));
        }
        for (r, s) in [(0, 0), (1, 0), (1, 1), (0, 2)] {
            assert_pass(&check_central_monomial(&t, r, s));
        }
    }
}

#[test]
fn interpolation_recovers_coefficients() {
    let points: Vec<(Rational, Rational)> =
        (0..4).map(|x| (q(x, 1), q(3, 1) - q(x, 2) + q(x * x * x, 7))).collect();
    assert_eq!(interpolate(&points), vec![q(3, 1), q(-1, 2), q(0, 1), q(1, 7)]);
}

#[test]
fn corrections_and_delta_generating() {
    for t in [TwistData::untwisted(1), TwistData::untwisted(2), twist(2, &[0, 1]), twist(2, &[1, 1]), twist(3, &[0, 1, 1])] {
        assert_pass(&check_corrections(&t, 3));
        assert_pass(&check_delta_generating(&t, 3));
    }
    assert_pass(&check_untwisted_bar_corrections(2, 3));
    // p = 1: every delta vanishes
    let coeffs = delta_series(&TwistData::untwisted(2), 6).unwrap();
    assert!(coeffs.iter().all(Rational::is_zero));
    let coeffs = delta_series(&twist(2, &[0, 1]), 6).unwrap();
    assert!(coeffs.iter().skip(1).step_by(2).all(Rational::is_zero));
    assert!(!coeffs[2].is_zero());
}

#[test]
fn property_checks() {
    let t = twist(2, &[0, 1]);
    assert_pass(&check_grading(&t, 2, 2, 3));
    assert_pass(&check_normal_ordering_symmetry(&t, 2, 2, 3));
    assert_pass(&check_lincomb(&t, 2, 3, 3));
    assert_pass(&check_heisenberg(&t, 2, 3));
}

#[test]
fn abstract_checks() {
    assert_pass(&check_bl2coc(1, 1, 2, &cocycle_normalization()));
    assert_pass(&check_jacobi(1, 1, &cocycle_normalization()));
    assert_pass(&check_bernoulli(&q(1, 3), 8));
    assert_pass(&check_delta_identities(2, 3));
}

#[test]
fn singular_terms_have_poles_that_cancel() {
    let terms = prop::singular_terms_for_test(1, 2);
    let pole = |s: &crate::series::Series| s.terms().any(|(e, c)| e[0] < 0 && e.iter().sum::<i64>() <= 2 && !c.is_zero());
    assert!(terms.iter().all(pole));
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum = sum.add(t).unwrap();
    }
    assert!(!pole(&sum));
}

#[test]
fn prop_bracket_examples() {
    assert_pass(&check_prop_bracket(&TwistData::untwisted(1), 2, 2, 3));
    assert_pass(&check_prop_scalar_sector(&TwistData::untwisted(1), 2, 2));
    assert_pass(&check_prop_main1_agreement(&TwistData::untwisted(1), 2, 2, 3));
    let t = twist(2, &[0, 1]);
    assert_pass(&check_prop_bracket(&t, 2, 2, 3));
    assert_pass(&check_prop_scalar_sector(&t, 2, 2));
}

#[test]
fn suite_selection_and_order() {
    let empty = Config { suite: vec![], ..Config::default() };
    assert!(run_suite(&empty).unwrap().is_empty());

    let config = Config {
        suite: vec!["bl2coc".into(), "bernoulli".into()],
        bl2coc_rs_max: 1,
        bl2coc_mode_range: 2,
        bernoulli_points: vec![q(1, 2)],
        jobs: 3,
        ..Config::default()
    };
    let reports = run_suite(&config).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.check.as_str()).collect();
    // configuration order, not selection order
    assert_eq!(names, ["bernoulli", "bl2coc", "bl2coc", "bl2coc"]);
    assert!(reports.iter().all(|r| r.passed() && r.ms == 0));
    let sequential = run_suite(&Config { jobs: 1, ..config }).unwrap();
    assert_eq!(reports, sequential);
}

#[test]
fn negative_control_config() {
    let config = Config {
        suite: vec!["bl2coc".into()],
        bl2coc_rs_max: 1,
        bl2coc_mode_range: 2,
        cocycle: q(1, 2),
        ..Config::default()
    };
    let reports = run_suite(&config).unwrap();
    assert!(reports.iter().any(|r| !r.passed() && r.witness.is_some()));
}

#[test]
fn config_validation() {
    let bad = Config { suite: vec!["nope".into()], ..Config::default() };
    assert!(run_suite(&bad).is_err());
    let bad = Config { twists: vec![TwistSpec { p: 3, dims: vec![0, 1, 2] }], ..Config::default() };
    assert!(bad.validate().is_err());
    let parsed: Config = serde_json::from_str(r#"{"suite": ["jacobi"], "cocycle": "1/2"}"#).unwrap();
    assert_eq!(parsed.cocycle, q(1, 2));
    assert_eq!(parsed.weight_cap, Config::default().weight_cap);
    assert!(serde_json::from_str::<Config>(r#"{"unknown": 1}"#).is_err());
}

#[test]
fn report_wire_format() {
    let rep = CheckReport::new("x", json!({ "p": 1 }), None);
    assert_eq!(serde_json::to_string(&rep).unwrap(), r#"{"check":"x","params":{"p":1},"status":"pass","witness":null,"ms":0}"#);
}

