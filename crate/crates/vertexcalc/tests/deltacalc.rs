use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use vertexcalc::deltacalc::*;
use vertexcalc::scalar::{rat, root_power, CycScalar, Rational};
use vertexcalc::series::*;

fn s(order: u32, n: i64) -> CycScalar {
    CycScalar::from_int(order, n)
}

fn lp(order: u32, text: &str) -> LaurentPoly {
    LaurentPoly::parse(order, text, 'w').unwrap()
}

fn total(p: &LaurentPoly) -> WindowSeries<CycScalar> {
    p.to_series()
}

fn pm1() -> PointSet {
    PointSet::roots_of_unity(2)
}

/// Set partitions of {0..n} into k blocks, returning the multiset of block sizes.
fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, k: usize, blocks: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if blocks.len() == k {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] += 1;
            go(i + 1, n, k, blocks, out);
            blocks[b] -= 1;
        }
        if blocks.len() < k {
            blocks.push(1);
            go(i + 1, n, k, blocks, out);
            blocks.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn bell_oracle(n: usize, k: usize) -> BTreeMap<Vec<u32>, Rational> {
    let mut m: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for blocks in partitions(n, k) {
        let mut mono = vec![0u32; n];
        for b in blocks {
            mono[b - 1] += 1;
        }
        while mono.last() == Some(&0) {
            mono.pop();
        }
        *m.entry(mono).or_insert_with(Rational::zero) += Rational::one();
    }
    m
}

#[test]
fn bell_against_partition_enumeration() {
    for n in 1..=6 {
        for k in 1..=n {
            assert_eq!(bell_polynomial(n, k).unwrap().terms, bell_oracle(n, k), "B({n},{k})");
        }
    }
    assert_eq!(bell_polynomial(1, 1).unwrap().to_string(), "x1");
    assert_eq!(bell_polynomial(3, 2).unwrap().to_string(), "3*x1*x2");
    assert_eq!(bell_polynomial(5, 5).unwrap().to_string(), "x1^5");
    assert_eq!(bell_polynomial(4, 2).unwrap().to_string(), "4*x1*x3 + 3*x2^2");
    assert!(matches!(bell_polynomial(2, 3), Err(DeltaError::BellRange { .. })));
}

#[test]
fn delta_term_coefficients() {
    let one = PointSet::roots_of_unity(1);
    let d = delta_term(&one, 1, 0, &Window::new(-5, 5), &Window::new(-6, 6)).unwrap();
    for n in -5..=5 {
        assert_eq!(d.get(n, -n - 1), Some(&s(1, 1)));
    }
    let p3 = PointSet::roots_of_unity(3);
    let lam = p3.point(2).unwrap().clone();
    let d = delta_term(&p3, 2, 0, &Window::new(-4, 4), &Window::new(-5, 5)).unwrap();
    for n in -4..=4 {
        assert_eq!(d.get(n, -n - 1), Some(&lam.pow(-n - 1).unwrap()));
    }
    // (z - lam w) d^{(1)} delta = delta
    let d1 = delta_term(&p3, 2, 1, &Window::new(-9, 9), &Window::new(-9, 9)).unwrap();
    let prod = bidist_mul(&Factor::Dist(&linear_power(&lam, 1)), &d1, &Window::new(-5, 5), &Window::new(-5, 5)).unwrap();
    let d0 = delta_term(&p3, 2, 0, &prod.zwindow, &prod.wwindow).unwrap();
    assert_eq!(prod, d0);
    assert_eq!(delta_term(&p3, 4, 0, &Window::new(0, 1), &Window::new(0, 1)).unwrap_err(), DeltaError::InvalidPoint(4));
}

#[test]
fn factoring_rules() {
    let pts = PointSet::roots_of_unity(3);
    let (l1, l2) = (pts.point(1).unwrap().clone(), pts.point(2).unwrap().clone());
    let mut t = DeltaSum::new(pts.clone());
    t.insert(2, 0, total(&LaurentPoly::constant(s(3, 1))));
    let r = t.factor_rewrite(1).unwrap();
    assert_eq!(r.terms.len(), 1);
    assert_eq!(r.coeff(2, 0).unwrap().coeffs, LaurentPoly::monomial(&l2 - &l1, 1).terms().clone());

    assert!(t.factor_rewrite(2).unwrap().terms.is_empty());

    let mut t = DeltaSum::new(pts.clone());
    t.insert(2, 3, total(&LaurentPoly::constant(s(3, 1))));
    let r = t.factor_rewrite(1).unwrap();
    assert_eq!(r.coeff(2, 2).unwrap().coeffs, LaurentPoly::constant(s(3, 1)).terms().clone());
    assert_eq!(r.coeff(2, 3).unwrap().coeffs, LaurentPoly::monomial(&l2 - &l1, 1).terms().clone());

    // against expansion
    let w = Window::new(-6, 6);
    let lhs = bidist_mul(&Factor::Dist(&linear_power(&l1, 1)), &t.expand(&Window::new(-12, 12), &Window::new(-12, 12)).unwrap(), &w, &w).unwrap();
    let rhs = r.expand(&lhs.zwindow, &lhs.wwindow).unwrap();
    assert_eq!(lhs.coeffs, rhs.restrict(&lhs.zwindow, &lhs.wwindow).unwrap().coeffs);
}

#[test]
fn inverse_series_examples() {
    let p = inverse_series_coeffs(&pm1(), &[1, 1], 2).unwrap();
    assert_eq!(p, vec![LaurentPoly::monomial(CycScalar::from_rational(2, rat(-1, 2)), -1)]);

    let p = inverse_series_coeffs(&PointSet::roots_of_unity(1), &[1], 1).unwrap();
    assert_eq!(p, vec![LaurentPoly::constant(s(1, 1))]);
}

/// sum P_i t^i * sum p_{-i} t^i = 1 through t^{n_j - 1}.
fn check_inverse(points: &PointSet, orders: &[u32], j: usize) {
    let nj = orders[j - 1] as usize;
    let big = inverse_series_coeffs(points, orders, j).unwrap();
    let p = taylor_multipliers(points, orders, j, nj);
    for n in 0..nj {
        let mut acc = LaurentPoly::zero(points.order());
        for i in 0..=n {
            acc = acc.add(&big[i].mul(&p[n - i]));
        }
        let expect = if n == 0 { LaurentPoly::constant(CycScalar::one(points.order())) } else { LaurentPoly::zero(points.order()) };
        assert_eq!(acc, expect, "orders {orders:?} j={j} n={n}");
    }
}

#[test]
fn inverse_series_by_series_inversion() {
    check_inverse(&pm1(), &[2, 1], 2);
    check_inverse(&pm1(), &[3, 3], 1);
    check_inverse(&PointSet::roots_of_unity(3), &[2, 3, 4], 2);
    check_inverse(&PointSet::roots_of_unity(4), &[3, 1, 5, 2], 3);
}

#[test]
fn decompose_examples() {
    let zw = Window::new(-8, 6);
    let ww = Window::new(-10, 10);
    let mut d = DeltaSum::new(pm1());
    d.insert(1, 0, total(&LaurentPoly::constant(s(2, 1))));
    let a = d.expand(&zw, &ww).unwrap();
    let got = decompose(&a, &pm1(), &[1, 1]).unwrap();
    assert_eq!(got.terms.len(), 1);
    assert_eq!(got.coeff(1, 0).unwrap().coeffs, LaurentPoly::constant(s(2, 1)).terms().clone());

    let mut d = DeltaSum::new(pm1());
    d.insert(2, 0, total(&lp(2, "-2w")));
    let got = decompose(&d.expand(&zw, &ww).unwrap(), &pm1(), &[1, 1]).unwrap();
    assert_eq!(got.terms.keys().collect::<Vec<_>>(), vec![&(2, 0)]);
    assert_eq!(LaurentPoly::from_terms(2, got.coeff(2, 0).unwrap().coeffs.clone()).render('w'), "-2w");

    let mut d = DeltaSum::new(pm1());
    d.insert(1, 1, total(&lp(2, "w^2")));
    d.insert(2, 0, total(&lp(2, "3w^-1")));
    let got = decompose(&d.expand(&zw, &ww).unwrap(), &pm1(), &[2, 1]).unwrap();
    assert_eq!(got.terms.len(), 2);
    assert_eq!(got.coeff(1, 1).unwrap().coeffs, lp(2, "w^2").terms().clone());
    assert_eq!(got.coeff(2, 0).unwrap().coeffs, lp(2, "3w^-1").terms().clone());
}

#[test]
fn decompose_errors() {
    let w = Window::new(-8, 8);
    let a = expand_inverse_power(&s(1, 1), 1, ExpansionDir::ZW, &w, &w).unwrap();
    let one = PointSet::roots_of_unity(1);
    assert!(matches!(decompose(&a, &one, &[1]), Err(DeltaError::NotLocal(..))));
    let cert = is_local(&a, &one, &[1]).unwrap();
    assert!(!cert.local);

    let d = delta_term(&one, 1, 0, &w, &w).unwrap();
    assert!(is_local(&d, &one, &[1]).unwrap().local);

    let tiny = delta_term(&one, 1, 0, &Window::new(0, 3), &w).unwrap();
    assert!(matches!(decompose(&tiny, &one, &[1]), Err(DeltaError::WindowTooSmall { .. })));
}

#[test]
fn padded_orders_same_terms() {
    let pts = PointSet::roots_of_unity(3);
    let mut d = DeltaSum::new(pts.clone());
    d.insert(1, 1, total(&lp(3, "w + 2")));
    d.insert(3, 0, total(&lp(3, "w^-2")));
    let a = d.expand(&Window::new(-14, 4), &Window::new(-16, 16)).unwrap();
    let base = decompose(&a, &pts, &[2, 0, 1]).unwrap();
    let padded = decompose(&a, &pts, &[3, 1, 2]).unwrap();
    assert_eq!(base.terms.keys().collect::<Vec<_>>(), padded.terms.keys().collect::<Vec<_>>());
    for (k, c) in &base.terms {
        let p = &padded.terms[k];
        let win = c.window.intersect(&p.window).unwrap();
        assert_eq!(c.restrict(&win).unwrap().coeffs, p.restrict(&win).unwrap().coeffs);
    }
}

fn ratfrac(points: PointSet, num: BiDist<CycScalar>, z: u32, w: u32, pp: Vec<u32>) -> RatFrac {
    RatFrac { points, num, z_pole: z, w_pole: w, point_poles: pp }
}

#[test]
fn partial_fraction_examples() {
    let f = ratfrac(pm1(), poly2(2, [(0, 0, s(2, 1))]), 0, 0, vec![1, 1]);
    let pf = partial_fractions(&f).unwrap();
    assert!(pf.poly.is_zero());
    assert_eq!(pf.residue_at_point(1), LaurentPoly::monomial(CycScalar::from_rational(2, rat(1, 2)), -1));
    assert_eq!(pf.residue_at_point(2), LaurentPoly::monomial(CycScalar::from_rational(2, rat(-1, 2)), -1));
    assert_eq!(pf.reassemble(&f), f.num);

    let one = PointSet::roots_of_unity(1);
    let f = ratfrac(one.clone(), poly2(1, [(1, 0, s(1, 1))]), 0, 0, vec![1]);
    let pf = partial_fractions(&f).unwrap();
    assert_eq!(pf.poly, poly2(1, [(0, 0, s(1, 1))]));
    assert_eq!(pf.residue_at_point(1), lp(1, "w"));

    let f = ratfrac(one, poly2(1, [(0, 0, s(1, 1))]), 1, 0, vec![0]);
    let pf = partial_fractions(&f).unwrap();
    assert!(pf.poly.is_zero());
    assert_eq!(pf.z_parts, vec![LaurentPoly::constant(s(1, 1))]);
    assert!(pf.residue_at_point(1).is_zero());
}

fn arb_coeff(order: u32) -> impl Strategy<Value = CycScalar> {
    let d = vertexcalc::scalar::totient(order).max(1);
    proptest::collection::vec(-3i64..4, d).prop_map(move |v| {
        CycScalar::from_poly(order, v.into_iter().map(|x| Rational::from_integer(x.into())).collect())
    })
}

fn arb_laurent(order: u32) -> impl Strategy<Value = LaurentPoly> {
    proptest::collection::vec((-3i64..4, arb_coeff(order)), 0..3).prop_map(move |t| {
        let mut p = LaurentPoly::zero(order);
        for (e, c) in t {
            p = p.add(&LaurentPoly::monomial(c, e));
        }
        p
    })
}

fn arb_deltasum() -> impl Strategy<Value = (u32, Vec<u32>, Vec<(usize, u32, LaurentPoly)>)> {
    (1u32..=4).prop_flat_map(|n| {
        (Just(n), proptest::collection::vec(0u32..=3, n as usize)).prop_flat_map(move |(n, orders)| {
            let slots: Vec<(usize, u32)> =
                orders.iter().enumerate().flat_map(|(k, o)| (0..*o).map(move |l| (k + 1, l))).collect();
            let m = slots.len();
            (Just(n), Just(orders), proptest::collection::vec(arb_laurent(n), m)).prop_map(move |(n, o, cs)| {
                let terms = slots.iter().zip(cs).map(|((k, l), c)| (*k, *l, c)).collect();
                (n, o, terms)
            })
        })
    })
}

fn arb_ratfrac() -> impl Strategy<Value = RatFrac> {
    (1u32..=4).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec((0i64..=4, -2i64..=4, arb_coeff(n)), 1..5),
            0u32..=2,
            0u32..=2,
            proptest::collection::vec(0u32..=3, n as usize),
        )
            .prop_map(|(n, num, z, w, pp)| {
                ratfrac(PointSet::roots_of_unity(n), poly2(n, num), z, w, pp)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn decomposition_roundtrip((n, orders, terms) in arb_deltasum()) {
        let pts = PointSet::roots_of_unity(n);
        let mut d = DeltaSum::new(pts.clone());
        for (k, l, c) in &terms {
            d.insert(*k, *l, total(c));
        }
        let sum: i64 = orders.iter().map(|o| *o as i64).sum();
        let zw = Window::new(-2 * sum - 2, 4);
        let ww = Window::new(-3 * sum - 12, 3 * sum + 12);
        let a = d.expand(&zw, &ww).unwrap();
        let got = decompose(&a, &pts, &orders).unwrap();
        prop_assert_eq!(got.terms.keys().collect::<Vec<_>>(), d.terms.keys().collect::<Vec<_>>());
        for (key, c) in &d.terms {
            let g = &got.terms[key];
            prop_assert!(g.window.contains_window(&Window::new(-3, 3)), "window {}", g.window);
            prop_assert_eq!(&g.coeffs, &c.coeffs);
        }
    }

    #[test]
    fn linear_independence((n, _orders, terms) in arb_deltasum()) {
        let pts = PointSet::roots_of_unity(n);
        let mut d = DeltaSum::new(pts);
        for (k, l, c) in &terms {
            d.insert(*k, *l, total(c));
        }
        let a = d.expand(&Window::new(-12, 4), &Window::new(-24, 24)).unwrap();
        prop_assert_eq!(a.is_zero(), d.terms.is_empty());
    }

    #[test]
    fn partial_fractions_reassemble(f in arb_ratfrac()) {
        let pf = partial_fractions(&f).unwrap();
        prop_assert_eq!(pf.reassemble(&f), f.num);
    }
}

#[test]
fn point_set_validation() {
    assert_eq!(PointSet::new(2, vec![s(2, 1), s(2, 1)]).unwrap_err(), DeltaError::BadPoints);
    assert_eq!(PointSet::new(2, vec![s(2, 0)]).unwrap_err(), DeltaError::BadPoints);
    let p = PointSet::roots_in(2, 4);
    assert_eq!(p.points(), &[s(4, 1), s(4, -1)]);
    assert_eq!(p.index_of(&s(4, -1)), Some(2));
    assert_eq!(root_power(4, 2), s(4, -1));
}
