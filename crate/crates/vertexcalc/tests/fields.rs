use vertexcalc::fields::*;
use vertexcalc::fock::{AlgebraKind, FockVector};
use vertexcalc::scalar::{rat, rat_int, Rational};
use vertexcalc::series::{Coefficient, LaurentPoly, Window};

fn setup(roots: u32, order: u32) -> (EvalCtx, Registry, Evaluator) {
    let ctx = EvalCtx::new(roots, order).unwrap();
    (ctx, Registry::standard(ctx), Evaluator::new(ctx))
}

/// Every coefficient in [lo, hi] agrees on every basis vector up to `cutoff`.
fn same_field(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, kind: AlgebraKind, cutoff: Rational, lo: i64, hi: i64) {
    for v in ev.basis(kind, &cutoff) {
        for m in lo..=hi {
            assert_eq!(ev.coeff(a, m, &v), ev.coeff(b, m, &v), "{a} vs {b} at z^{m} on {v}");
        }
    }
}

fn c(ctx: &EvalCtx, q: Rational) -> LaurentPoly {
    ctx.constant(q)
}

#[test]
fn contractions_on_vacuum() {
    let (_, reg, mut ev) = setup(2, 2);
    let zw = Window::new(-5, 2);
    let ww = Window::new(-2, 5);
    // B: -2w/(z+w), C: 1/(z+w), D: 1/(z-w), each expanded in w/z
    for (kind, name) in [(AlgebraKind::B, "phiB"), (AlgebraKind::C, "phiC"), (AlgebraKind::D, "phiD")] {
        let f = reg.get(name).unwrap().clone();
        let vac = ev.vacuum(kind);
        let got = contraction(&mut ev, &f, &f, &vac, &zw, &ww).unwrap();
        let direct = product_2var(&mut ev, &f, &f, &vac, &zw, &ww).unwrap();
        let normal = normprod_2var(&mut ev, &f, &f, &vac, &zw, &ww).unwrap();
        assert_eq!(direct.sub(&normal).unwrap(), got);
        for n in 0..=3i64 {
            let alt = if n % 2 == 0 { 1 } else { -1 };
            let (cell, coeff) = match kind {
                AlgebraKind::B => ((-n - 1, n + 1), -2 * alt),
                AlgebraKind::C => ((-n - 1, n), alt),
                AlgebraKind::D => ((-n - 1, n), 1),
            };
            assert_eq!(got.get(cell.0, cell.1), Some(&vac.scale_rational(&rat_int(coeff))), "{name} n={n}");
        }
        assert_eq!(got.coeffs.len(), 5, "{name}");
    }
}

#[test]
fn normal_squares() {
    let (ctx, reg, mut ev) = setup(2, 2);
    let pb = reg.get("phiB").unwrap().clone();
    let pd = reg.get("phiD").unwrap().clone();
    let one = FieldExpr::id();
    same_field(&mut ev, &FieldExpr::normprod(&pb, &pb), &one, AlgebraKind::B, rat_int(3), -3, 3);
    same_field(&mut ev, &FieldExpr::normprod(&pd, &pd), &FieldExpr::lincomb(vec![]), AlgebraKind::D, rat_int(3), -3, 3);
    let _ = ctx;
}

#[test]
fn generator_opes() {
    let (_, reg, mut ev) = setup(2, 2);
    let cfg = OpeConfig::default();
    let pb = reg.get("phiB").unwrap().clone();
    let t = ope_extract(&mut ev, &pb, &pb, &[1, 1], &cfg, &reg).unwrap();
    assert_eq!(t.entries.len(), 1);
    assert_eq!(t.render(2, 0).as_deref(), Some("-2w * Id"));
    assert_eq!(t.get(2, 0).unwrap().identified.as_ref().unwrap().shift, 1);

    let pd = reg.get("phiD").unwrap().clone();
    let t = ope_extract(&mut ev, &pd, &pd, &[1, 1], &cfg, &reg).unwrap();
    assert_eq!(t.entries.len(), 1);
    assert_eq!(t.render(1, 0).as_deref(), Some("1"));

    let pc = reg.get("phiC").unwrap().clone();
    let t = ope_extract(&mut ev, &pc, &pc, &[1, 1], &cfg, &reg).unwrap();
    assert_eq!(t.render(2, 0).as_deref(), Some("1"));
}

#[test]
fn heisenberg_tables() {
    let (_, reg, mut ev) = setup(2, 2);
    let cfg = OpeConfig { cutoff: rat_int(2), ..Default::default() };
    let expect: [(&str, Vec<((usize, i64), &str)>); 3] = [
        ("hB", vec![((1, 0), "1/4*w * Id"), ((1, 1), "1/4*w^2 * Id"), ((2, 0), "1/4*w * Id"), ((2, 1), "-1/4*w^2 * Id")]),
        ("hC", vec![((1, 1), "-1/4"), ((2, 1), "-1/4")]),
        ("hD", vec![((1, 1), "1/4"), ((2, 1), "-1/4")]),
    ];
    for (name, table) in expect {
        let h = reg.get(name).unwrap().clone();
        let t = ope_extract(&mut ev, &h, &h, &[2, 2], &cfg, &reg).unwrap();
        let got: Vec<_> = t.entries.iter().map(|(k, e)| (*k, e.identified.as_ref().unwrap().render())).collect();
        let want: Vec<_> = table.iter().map(|(k, s)| (*k, s.to_string())).collect();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn negative_products() {
    let (ctx, reg, mut ev) = setup(2, 2);
    let g = |n: &str| reg.get(n).unwrap().clone();
    let cases = [
        // :phi(z)phi(w): + :phi(w)phi(z): = 2 phi_0^2 = 2 for B
        (AlgebraKind::B, "phiB", "hB", rat_int(1), rat_int(-4)),
        // bosonic and no same-sign pairing: :phi(-w)phi(w): = :phi(w)phi(-w):
        (AlgebraKind::C, "phiC", "hC", rat_int(1), rat_int(2)),
        (AlgebraKind::D, "phiD", "hD", rat_int(0), rat_int(-2)),
    ];
    for (kind, phi, h, id_coeff, h_coeff) in cases {
        let p = FieldExpr::product_jk(&g(phi), 2, -1, &g(phi), None);
        let expect = FieldExpr::lincomb(vec![(c(&ctx, id_coeff), FieldExpr::id()), (c(&ctx, h_coeff), g(h))]);
        same_field(&mut ev, &p, &expect, kind, rat(5, 2), -3, 3);
    }
}

#[test]
fn positive_products_match_ope() {
    let (_, reg, mut ev) = setup(2, 2);
    let h = reg.get("hB").unwrap().clone();
    let t = ope_extract(&mut ev, &h, &h, &[2, 2], &OpeConfig::default(), &reg).unwrap();
    for ((j, k), e) in &t.entries {
        let p = FieldExpr::product_jk(&h, *j, *k, &h, Some(vec![2, 2]));
        for ((w, q), x) in &e.samples {
            let v = FockVector::basis_word(AlgebraKind::B, 2, w.clone());
            assert_eq!(&ev.coeff(&p, *q, &v), x);
        }
        let ident = e.identified.as_ref().unwrap().to_expr(&reg).unwrap();
        same_field(&mut ev, &p, &ident, AlgebraKind::B, rat_int(2), -3, 3);
    }
    // beyond the order the product vanishes
    let p = FieldExpr::product_jk(&h, 1, 2, &h, Some(vec![2, 2]));
    same_field(&mut ev, &p, &FieldExpr::lincomb(vec![]), AlgebraKind::B, rat_int(2), -3, 3);
}

#[test]
fn missing_orders_rejected() {
    let (ctx, reg, _) = setup(2, 2);
    let h = reg.get("hB").unwrap().clone();
    let p = FieldExpr::product_jk(&h, 1, 0, &h, None);
    assert_eq!(p.validate(&ctx), Err(FieldError::MissingOrders(2)));
    let p = FieldExpr::product_jk(&h, 3, -1, &h, None);
    assert_eq!(p.validate(&ctx), Err(FieldError::PointIndex(3, 2)));
    let mixed = FieldExpr::normprod(reg.get("phiB").unwrap(), reg.get("phiD").unwrap());
    assert_eq!(mixed.validate(&ctx), Err(FieldError::MixedSpaces));
}

#[test]
fn taylor_formula() {
    let (_, reg, mut ev) = setup(2, 2);
    for (a, b) in [("phiB", "phiB"), ("phiD", "phiD"), ("hB", "phiB"), ("phiC", "hC")] {
        let (a, b) = (reg.get(a).unwrap().clone(), reg.get(b).unwrap().clone());
        for lp in [0, 1] {
            let bad = taylor_normprod_check(&mut ev, &a, &b, lp, 3, &Window::new(-3, 3), &rat(3, 2)).unwrap();
            assert_eq!(bad, None);
        }
    }
}

#[test]
fn li_products_phi_b() {
    let (ctx, reg, mut ev) = setup(2, 2);
    let pb = reg.get("phiB").unwrap().clone();
    let orders = [0, 1];
    let expect_m2 = FieldExpr::lincomb(vec![
        (LaurentPoly::monomial(ctx.scalar(rat(1, 2)), -1), FieldExpr::id()),
        (c(&ctx, rat_int(1)), FieldExpr::normprod(&pb.deriv(1), &pb)),
    ]);
    for v in ev.basis(AlgebraKind::B, &rat_int(2)) {
        for m in -3..=3 {
            let l1 = LiProduct { a: &pb, b: &pb, alpha: 1, k: -1, orders: &orders }.coeff(&mut ev, m, &v);
            assert!(l1.is_zero(), "ov(1,-1) at {m} on {v}");
            let l2 = LiProduct { a: &pb, b: &pb, alpha: 1, k: -2, orders: &orders }.coeff(&mut ev, m, &v);
            assert_eq!(l2, ev.coeff(&expect_m2, m, &v));
            // simple pole at -1: the comparison products agree with ours there
            for k in -2..=1 {
                let lm = LiProduct { a: &pb, b: &pb, alpha: 2, k, orders: &orders }.coeff(&mut ev, m, &v);
                let ours = FieldExpr::product_jk(&pb, 2, k, &pb, Some(vec![0, 1]));
                assert_eq!(lm, ev.coeff(&ours, m, &v), "ov(-1,{k}) at {m} on {v}");
            }
        }
    }
}

#[test]
fn li_products_h_d() {
    let (ctx, reg, mut ev) = setup(2, 2);
    let h = reg.get("hD").unwrap().clone();
    let orders = [2, 2];
    let mono = |q: Rational, e: i64| LaurentPoly::monomial(ctx.scalar(q), e);
    let e1 = FieldExpr::lincomb(vec![(mono(rat(1, 4), 0), FieldExpr::id())]);
    // (1/4 + x0/(4x))(1 - x0/x + 3x0^2/(4x^2)) has no x0^1 term
    let e0 = FieldExpr::lincomb(vec![]);
    let em = FieldExpr::lincomb(vec![(mono(rat(-1, 16), -2), FieldExpr::id()), (mono(rat_int(1), 0), FieldExpr::normprod(&h, &h))]);
    for v in ev.basis(AlgebraKind::D, &rat(3, 2)) {
        for m in -3..=2 {
            for (k, e) in [(1, &e1), (0, &e0), (-1, &em)] {
                let l = LiProduct { a: &h, b: &h, alpha: 1, k, orders: &orders }.coeff(&mut ev, m, &v);
                assert_eq!(l, ev.coeff(e, m, &v), "ov(1,{k}) at {m} on {v}");
            }
        }
    }
}

#[test]
fn locality_of_fixtures() {
    let (_, reg, mut ev) = setup(2, 2);
    for (name, orders) in [("phiB", vec![0, 1]), ("phiD", vec![1, 0]), ("hB", vec![2, 2]), ("hD", vec![2, 2])] {
        let f = reg.get(name).unwrap().clone();
        let r = locality_check(&mut ev, &f, &f, &orders, &rat(3, 2)).unwrap();
        assert!(r.local, "{name}");
    }
    let pb = reg.get("phiB").unwrap().clone();
    let r = locality_check(&mut ev, &pb, &pb, &[1, 0], &rat(3, 2)).unwrap();
    assert!(!r.local);
    assert!(r.witness.is_some());
}

#[test]
fn dn_heisenberg_field() {
    let (_, reg, mut ev) = setup(3, 3);
    // literal sum: [h_1, h_{-1}] = -3e^2 (complex-float oracle: 1.5 + 2.598i)
    assert_eq!(dn_literal_kappa(&EvalCtx::new(3, 3).unwrap()), vertexcalc::scalar::CycScalar::parse(3, "-3*e^2").unwrap());
    // at N = 2 the literal sum is :phiD(z)phiD(-z): = 2 hD
    assert_eq!(dn_literal_kappa(&EvalCtx::new(2, 2).unwrap()), vertexcalc::scalar::CycScalar::from_int(2, 4));
    let h = reg.get("hD_N").unwrap().clone();
    // [h_m, h_n] = m delta_{m,-n}, h_n at z^{-3n-1}
    for v in ev.basis(AlgebraKind::D, &rat_int(2)) {
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                let hm = |ev: &mut Evaluator, x: &FockVector| ev.coeff(&h, -3 * m - 1, x);
                let hn = |ev: &mut Evaluator, x: &FockVector| ev.coeff(&h, -3 * n - 1, x);
                let a = { let t = hn(&mut ev, &v); hm(&mut ev, &t) };
                let b = { let t = hm(&mut ev, &v); hn(&mut ev, &t) };
                let lhs = a.try_add(&b.negate()).unwrap();
                let rhs = if m == -n { v.scale_rational(&rat_int(m)) } else { FockVector::zero(AlgebraKind::D, 3) };
                assert_eq!(lhs, rhs, "m={m} n={n} v={v}");
            }
        }
    }
}

#[test]
fn json_ast_roundtrip() {
    let (ctx, reg, _) = setup(2, 2);
    for (_, e) in reg.entries() {
        let back = FieldExpr::from_json(&e.to_json(), &reg).unwrap();
        assert_eq!(&back, e);
    }
    let p = FieldExpr::product_jk(reg.get("hB").unwrap(), 2, 1, reg.get("hB").unwrap(), Some(vec![2, 2]));
    assert_eq!(FieldExpr::from_json(&p.to_json(), &reg).unwrap(), p);
    let named = FieldExpr::from_json(&serde_json::json!({"op": "normprod", "left": "phiB", "right": {"op": "d", "arg": "phiB"}}), &reg).unwrap();
    assert_eq!(named.to_string(), ":phiB d(phiB):");
    assert!(matches!(FieldExpr::from_json(&serde_json::json!("nope"), &reg), Err(FieldError::UnknownField(_))));
    let _ = ctx;
}
