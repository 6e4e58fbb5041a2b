use proptest::prelude::*;
use vertexcalc::fock::*;
use vertexcalc::scalar::{rat, rat_int, CycScalar};
use vertexcalc::series::Coefficient;

fn modes(kind: AlgebraKind, bound: i64) -> Vec<ModeIndex> {
    (-2 * bound..=2 * bound).map(ModeIndex::from_doubled).filter(|n| kind.in_lattice(*n)).collect()
}

#[test]
fn relation_soundness() {
    for kind in AlgebraKind::ALL {
        let basis = basis(kind, 1, &rat_int(6));
        assert!(basis.len() > 10);
        let ms = modes(kind, 6);
        for v in &basis {
            for &m in &ms {
                let nv_m = apply_mode(m, v);
                for &n in &ms {
                    let mn = apply_mode(m, &apply_mode(n, v));
                    let nm = apply_mode(n, &nv_m);
                    let lhs = if kind.is_odd() { mn.try_add(&nm).unwrap() } else { mn.try_add(&nm.negate()).unwrap() };
                    let rhs = v.scale_rational(&kind.kappa(m, n));
                    assert_eq!(lhs, rhs, "{kind} m={m} n={n} v={v}");
                }
            }
        }
    }
}

#[test]
fn squares() {
    for v in basis(AlgebraKind::D, 1, &rat_int(5)) {
        for n in modes(AlgebraKind::D, 6) {
            assert!(apply_mode(n, &apply_mode(n, &v)).is_zero());
        }
    }
    for v in basis(AlgebraKind::B, 1, &rat_int(5)) {
        for n in modes(AlgebraKind::B, 6) {
            let sq = apply_mode(n, &apply_mode(n, &v));
            if n == ModeIndex::from_int(0) {
                assert_eq!(sq, v);
            } else {
                assert!(sq.is_zero());
            }
        }
    }
}

#[test]
fn examples() {
    let b0 = FockVector::vacuum(AlgebraKind::B, 1);
    let z = ModeIndex::from_int(0);
    assert_eq!(apply_mode(z, &apply_mode(z, &b0)), b0);

    let d0 = FockVector::vacuum(AlgebraKind::D, 1);
    let v = apply_mode(ModeIndex::half(0), &apply_mode(ModeIndex::half(-1), &d0));
    assert_eq!(v, d0);

    for kind in AlgebraKind::ALL {
        let vac = FockVector::vacuum(kind, 1);
        for n in modes(kind, 4).into_iter().filter(|n| kind.is_annihilator(*n)) {
            assert!(apply_mode(n, &vac).is_zero());
        }
    }

    // phi(-1/2) phi(-3/2)|0> = -phi(-3/2) phi(-1/2)|0>
    let a = apply_mode(ModeIndex::half(-1), &apply_mode(ModeIndex::half(-2), &d0));
    let b = apply_mode(ModeIndex::half(-2), &apply_mode(ModeIndex::half(-1), &d0));
    assert_eq!(a, b.negate());
    assert_eq!(b.to_string(), "phi(-3/2) phi(-1/2) |0>");
    assert_eq!(a.to_string(), "(-1) phi(-3/2) phi(-1/2) |0>");

    let one = apply_mode(ModeIndex::from_int(1), &apply_mode(z, &b0));
    assert_eq!(one.to_string(), "phi(1) phi(0) |0>");

    let u = apply_mode(ModeIndex::from_int(2), &b0);
    assert_eq!(u.try_add(&FockVector::zero(AlgebraKind::B, 1)).unwrap(), u);
    assert!(u.scale_rational(&rat(0, 1)).is_zero());
    assert_eq!(u.try_add(&d0), Err(FockError::SpecMismatch));
}

#[test]
fn json_roundtrip() {
    let vac = FockVector::vacuum(AlgebraKind::C, 4);
    let v = apply_mode(ModeIndex::half(1), &apply_mode(ModeIndex::half(0), &vac));
    let v = v.try_add(&Coefficient::scale(&apply_mode(ModeIndex::half(2), &vac), &CycScalar::parse(4, "e - 2").unwrap())).unwrap();
    let back = FockVector::from_json(&v.to_json(), 4).unwrap();
    assert_eq!(back, v);
    let j = serde_json::json!({"spec": "D", "terms": [{"word": ["-1/2", "-3/2"], "coeff": "2"}]});
    let w = FockVector::from_json(&j, 1).unwrap();
    assert_eq!(w.to_string(), "(-2) phi(-3/2) phi(-1/2) |0>");
}

#[test]
fn basis_counts() {
    // Cl_D energies are sums of distinct half-odd numbers; up to 2: 1, 1/2, 3/2, 2 (= 1/2 + 3/2)
    assert_eq!(basis_words(AlgebraKind::D, &rat_int(2)).len(), 4);
    // L_C allows repeats: 1/2, 1/2+1/2, 3/2, 1/2*3, 1/2+3/2, 1/2*4 -> with vacuum 7
    assert_eq!(basis_words(AlgebraKind::C, &rat_int(2)).len(), 7);
    for kind in AlgebraKind::ALL {
        for w in basis_words(kind, &rat_int(4)) {
            // every basis word is already in normal form
            let mut v = FockVector::vacuum(kind, 1);
            for n in w.0.iter().rev() {
                v = apply_mode(*n, &v);
            }
            assert_eq!(v, FockVector::basis_word(kind, 1, w.clone()));
        }
    }
}

fn arb_kind() -> impl Strategy<Value = AlgebraKind> {
    prop_oneof![Just(AlgebraKind::B), Just(AlgebraKind::C), Just(AlgebraKind::D)]
}

fn pick(kind: AlgebraKind, raw: i64) -> ModeIndex {
    let d = if kind.half_integer() { 2 * raw + 1 } else { 2 * raw };
    ModeIndex::from_doubled(d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Reordering a random word by the engine agrees with reordering the
    /// first two letters by hand with the defining relation.
    #[test]
    fn confluence(kind in arb_kind(), raw in proptest::collection::vec(-4i64..4, 2..=6)) {
        let word: Vec<ModeIndex> = raw.iter().map(|r| pick(kind, *r)).collect();
        let vac = FockVector::vacuum(kind, 1);
        let apply_all = |ws: &[ModeIndex]| ws.iter().rev().fold(vac.clone(), |acc, n| apply_mode(*n, &acc));
        let direct = apply_all(&word);
        let mut swapped = word.clone();
        swapped.swap(0, 1);
        let tail = apply_all(&word[2..]);
        let swapped_v = apply_all(&swapped);
        let sign = if kind.is_odd() { rat_int(-1) } else { rat_int(1) };
        let expect = swapped_v.scale_rational(&sign).try_add(&tail.scale_rational(&kind.kappa(word[0], word[1]))).unwrap();
        prop_assert_eq!(direct, expect);
    }
}
