use proptest::prelude::*;
use vertexcalc::fields::{EvalCtx, Evaluator, FieldExpr};
use vertexcalc::fock::{apply_mode, AlgebraKind, FockVector, ModeIndex};
use vertexcalc::scalar::{rat, rat_int, CycScalar};
use vertexcalc::series::{Coefficient, Window};
use vertexcalc::verify::*;

fn one() -> CycScalar {
    CycScalar::one(2)
}

fn unit(i: i64, j: i64) -> InfMatrix {
    InfMatrix::unit(2, i, j)
}

fn sum(ms: &[(i64, InfMatrix)]) -> InfMatrix {
    ms.iter().fold(InfMatrix::zero(2), |acc, (c, m)| acc.add(&m.scale(&CycScalar::from_int(2, *c))))
}

#[test]
fn bracket_examples() {
    let b = matrix_bracket(&unit(0, 1), &unit(1, 0), Flavor::A);
    let mut expect = sum(&[(1, unit(0, 0)), (-1, unit(1, 1))]);
    expect.central = one();
    assert_eq!(b, expect);
    // the reverse order flips the cocycle
    assert_eq!(matrix_bracket(&unit(1, 0), &unit(0, 1), Flavor::A).central, CycScalar::from_int(2, -1));
    let a = sum(&[(3, unit(0, 2)), (-1, unit(-1, 1))]);
    assert!(matrix_bracket(&a, &a, Flavor::B).is_zero());
    assert!(matrix_bracket(&unit(1, 2), &unit(3, 4), Flavor::A).is_zero());
    // half weight in b and d
    assert_eq!(matrix_bracket(&unit(0, 1), &unit(1, 0), Flavor::D).central, CycScalar::from_rational(2, rat(1, 2)));
}

#[test]
fn generator_examples() {
    assert_eq!(generator(Flavor::D, 2, 1, 1), sum(&[(1, unit(1, 1)), (-1, unit(0, 0))]));
    for i in -3..=3 {
        assert!(generator(Flavor::B, 2, i, i).is_zero());
    }
    // (-1)^1 E_{01} - (-1)^0 E_{0,1}
    assert_eq!(generator(Flavor::C, 2, 0, 1), sum(&[(-2, unit(0, 1))]));
    assert_eq!(generator(Flavor::B, 2, 1, 2), sum(&[(1, unit(1, -2)), (1, unit(2, -1))]));
}

#[test]
fn decomposition_into_generators() {
    for flavor in [Flavor::B, Flavor::C, Flavor::D] {
        let m = generator(flavor, 2, 2, -1).add(&generator(flavor, 2, 0, 3).scale(&CycScalar::from_int(2, 5)));
        let parts = decompose_generators(&m, flavor).unwrap();
        let back = parts.iter().fold(InfMatrix::zero(2), |acc, ((i, j), c)| acc.add(&generator(flavor, 2, *i, *j).scale(c)));
        assert_eq!(back, m, "{flavor}");
    }
    // E_{12} alone is not in d_inf
    assert!(decompose_generators(&unit(1, 2), Flavor::D).is_none());
}

fn arb_flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::B), Just(Flavor::C), Just(Flavor::D)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generators_have_symmetry(f in arb_flavor(), i in -6i64..6, j in -6i64..6) {
        prop_assert!(generator(f, 2, i, j).has_symmetry(f));
    }

    #[test]
    fn brackets_close(f in arb_flavor(), i in -4i64..4, j in -4i64..4, k in -4i64..4, l in -4i64..4) {
        let x = generator(f, 2, i, j);
        let y = generator(f, 2, k, l);
        let xy = matrix_bracket(&x, &y, f);
        let yx = matrix_bracket(&y, &x, f);
        prop_assert!(xy.has_symmetry(f));
        prop_assert!(decompose_generators(&xy, f).is_some());
        prop_assert_eq!(xy.add(&yx), InfMatrix::zero(2));
    }
}

#[test]
fn rep_on_vacuum() {
    // d: coefficient z^{i-1} w^{-j} of :phiD(z) phiD(w):|0>, phiD(z) = sum phi_n z^{-n-1/2}
    let mut rep = Representation::new(Flavor::D).unwrap();
    let vac = FockVector::vacuum(AlgebraKind::D, 2);
    for i in -2..=2i64 {
        for j in -2..=2i64 {
            let (a, b) = (ModeIndex::from_doubled(1 - 2 * i), ModeIndex::from_doubled(2 * j - 1));
            let oracle = if a.doubled() < 0 && b.doubled() < 0 { apply_mode(a, &apply_mode(b, &vac)) } else { FockVector::zero(AlgebraKind::D, 2) };
            assert_eq!(rep_operator(&mut rep, i, j, &vac), oracle, "({i},{j})");
        }
    }
    assert!(rep.apply_matrix(&InfMatrix::zero(2), &vac).unwrap().is_zero());
    // b: both factors annihilate when i, j < 0
    let mut rep = Representation::new(Flavor::B).unwrap();
    let vac = FockVector::vacuum(AlgebraKind::B, 2);
    for (i, j) in [(-1, -2), (-3, -1), (-2, -4)] {
        assert!(rep_operator(&mut rep, i, j, &vac).is_zero());
    }
    assert!(!rep_operator(&mut rep, 1, 2, &vac).is_zero());
}

#[test]
fn d_central_term_on_vacuum() {
    let x = generator(Flavor::D, 2, 0, 2);
    let y = generator(Flavor::D, 2, 2, 0);
    let br = matrix_bracket(&x, &y, Flavor::D);
    assert_eq!(br.central, one());
    let mut rep = Representation::new(Flavor::D).unwrap();
    let vac = FockVector::vacuum(AlgebraKind::D, 2);
    let lhs = rep.apply_matrix(&br, &vac).unwrap();
    let t = rep.apply_generator(2, 0, &vac);
    let xy = rep.apply_generator(0, 2, &t);
    let t = rep.apply_generator(0, 2, &vac);
    let yx = rep.apply_generator(2, 0, &t);
    assert_eq!(lhs, xy.try_add(&yx.negate()).unwrap());
    assert!(!lhs.is_zero());
}

#[test]
fn representations() {
    for f in [Flavor::B, Flavor::C, Flavor::D] {
        let r = check_representation(f, 2, &rat_int(3));
        assert!(r.all_pass(), "{r}");
    }
    let r = check_representation(Flavor::D, 2, &rat(5, 2));
    assert!(r.all_pass(), "{r}");
}

#[test]
fn heisenberg_suites() {
    for (k, range) in [(HeisenbergKind::B, 5), (HeisenbergKind::D, 5), (HeisenbergKind::DN(3), 2)] {
        let r = heisenberg_check(k, range, &rat_int(4));
        assert!(r.all_pass(), "{r}");
    }
    let r = heisenberg_check(HeisenbergKind::C, 5, &rat_int(4));
    let bad: Vec<_> = r.failures().map(|c| c.desc.clone()).collect();
    assert_eq!(bad, vec!["support only on odd powers z^{-2n-1}".to_string()], "{r}");
    assert!(!r.params.contains_key("literal_kappa"));
    let dn = heisenberg_check(HeisenbergKind::DN(3), 2, &rat_int(3));
    assert_eq!(dn.params["literal_kappa"], serde_json::json!("3*e + 3"));
}

#[test]
fn highest_weight() {
    let r = highest_weight_check(7);
    assert!(r.all_pass(), "{r}");
}

#[test]
fn tva_suites() {
    let b = tva_axiom_audit(&Generators::suite(AlgebraKind::B), &rat(3, 2));
    assert!(b.all_pass(), "{b}");
    let shift = b.checks.iter().find(|c| c.desc == "shift uniformity per pole order").unwrap();
    assert_eq!(shift.witness.as_deref(), Some("pole order 1: shift {1}"));
    for kind in [AlgebraKind::C, AlgebraKind::D] {
        let r = tva_axiom_audit(&Generators::suite(kind), &rat(3, 2));
        assert!(r.all_pass(), "{r}");
        let shift = r.checks.iter().find(|c| c.desc == "shift uniformity per pole order").unwrap();
        assert_eq!(shift.witness.as_deref(), Some("pole order 1: shift {0}"));
    }
}

#[test]
fn triple_ope() {
    // phi(z) :phi(-w) phi(w): ~ phi(w)/(z+w) - phi(-w)/(z-w)
    let r = tva_axiom_audit(&Generators::suite(AlgebraKind::D), &rat(3, 2));
    let t = r.checks.iter().find(|c| c.desc.starts_with("triple OPE")).unwrap();
    assert_eq!(t.witness.as_deref(), Some("(1,0): -1 * phiD(-z); (2,0): 1 * phiD"));
}

#[test]
fn analytic_continuation() {
    let ctx = EvalCtx::new(2, 2).unwrap();
    let mut ev = Evaluator::new(ctx);
    let pd = FieldExpr::gen(AlgebraKind::D);
    let pb = FieldExpr::gen(AlgebraKind::B);
    let vd = ev.vacuum(AlgebraKind::D);
    let vb = ev.vacuum(AlgebraKind::B);
    let w = Window::new(-5, 5);
    let one = analytic_continuation_sample(&mut ev, std::slice::from_ref(&pd), &vd, 2, 3, &w).unwrap();
    assert!(one.irregular.is_none() && !one.cleared.is_empty());
    // uncleared (M = 0): the pole shows up as negative z1 powers
    let raw = analytic_continuation_sample(&mut ev, &[pd.clone(), pd.clone()], &vd, 2, 0, &w).unwrap();
    assert!(raw.irregular.is_some());
    let cleared = analytic_continuation_sample(&mut ev, &[pd.clone(), pd.clone()], &vd, 2, 1, &w).unwrap();
    assert!(cleared.irregular.is_none());
    let triple = analytic_continuation_sample(&mut ev, &[pb.clone(), pb.clone(), pb.clone()], &vb, 2, 2, &Window::new(-3, 12)).unwrap();
    assert!(triple.irregular.is_none());
    assert!(!triple.cleared.is_empty());
}

#[test]
fn closure_wick_li() {
    let d = dong_closure(&rat(3, 2));
    assert!(d.all_pass(), "{d}");
    let w = wick_check(&rat(3, 2), 2);
    assert!(w.all_pass(), "{w}");
    let li = li_appendix(&rat_int(3));
    let bad: Vec<_> = li.failures().map(|c| c.desc.clone()).collect();
    assert_eq!(bad, vec!["hD ov(1,0) = 1/(8x)".to_string()], "{li}");
}

#[test]
fn report_shape() {
    let cfg = SuiteConfig { cutoff: Some(rat_int(3)), mode_range: Some(4), roots: None };
    let r = run_suite("heisenberg-d", &cfg).unwrap();
    assert!(r.all_pass());
    let j = r.to_json();
    assert_eq!(j["suite"], "heisenberg-d");
    assert_eq!(j["params"]["mode_range"], 4);
    assert!(j["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true && c["desc"].is_string()));
    assert!(r.to_string().contains("[PASS]"));
    assert!(run_suite("unknown-suite", &cfg).is_none());
    for name in SUITES {
        assert!(run_suite(name, &cfg).is_some());
    }
}
