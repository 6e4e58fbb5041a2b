//! Mode algebras with quadratic relations and their Fock spaces.
//!
//! Basis vectors are words of creation modes applied to the vacuum. Words
//! are kept with the larger |index| leftmost, so a Cl_B word ends in phi(0)
//! when it contains it.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::scalar::{rat_int, CycScalar, Rational, ScalarError};
use crate::series::Coefficient;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FockError {
    #[error("mode {0} is not in the index lattice of {1}")]
    Lattice(ModeIndex, AlgebraKind),
    #[error("vectors belong to different spaces")]
    SpecMismatch,
    #[error("unknown algebra {0:?}")]
    UnknownAlgebra(String),
    #[error("malformed vector: {0}")]
    Parse(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A mode index, stored doubled so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(i64);

impl ModeIndex {
    pub fn from_int(n: i64) -> Self {
        ModeIndex(2 * n)
    }

    /// The half-integer n + 1/2.
    pub fn half(n: i64) -> Self {
        ModeIndex(2 * n + 1)
    }

    pub fn from_doubled(d: i64) -> Self {
        ModeIndex(d)
    }

    pub fn doubled(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn neg(self) -> Self {
        ModeIndex(-self.0)
    }

    pub fn parse(s: &str) -> Result<Self, FockError> {
        let s = s.trim();
        let bad = || FockError::Parse(format!("bad mode index {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                if d.trim() != "2" {
                    return Err(bad());
                }
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                if n % 2 == 0 {
                    return Err(bad());
                }
                Ok(ModeIndex(n))
            }
            None => Ok(ModeIndex::from_int(s.parse().map_err(|_| bad())?)),
        }
    }

    fn to_json(self) -> Value {
        if self.is_integer() {
            json!(self.0 / 2)
        } else {
            json!(self.to_string())
        }
    }

    fn from_json(v: &Value) -> Result<Self, FockError> {
        match v {
            Value::Number(n) => n.as_i64().map(ModeIndex::from_int).ok_or_else(|| FockError::Parse(n.to_string())),
            Value::String(s) => ModeIndex::parse(s),
            other => Err(FockError::Parse(other.to_string())),
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgebraKind {
    /// Clifford algebra Cl_B: {phi_m, phi_n} = 2(-1)^m delta_{m,-n}
    B,
    /// Lie algebra L_C: [phi_m, phi_n] = (-1)^{n-1/2} delta_{m,-n}
    C,
    /// Clifford algebra Cl_D: {phi_m, phi_n} = delta_{m,-n}
    D,
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraKind::B => "B",
            AlgebraKind::C => "C",
            AlgebraKind::D => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for AlgebraKind {
    type Err = FockError;
    fn from_str(s: &str) -> Result<Self, FockError> {
        match s {
            "B" | "b" => Ok(AlgebraKind::B),
            "C" | "c" => Ok(AlgebraKind::C),
            "D" | "d" => Ok(AlgebraKind::D),
            _ => Err(FockError::UnknownAlgebra(s.to_string())),
        }
    }
}

impl AlgebraKind {
    pub const ALL: [AlgebraKind; 3] = [AlgebraKind::B, AlgebraKind::C, AlgebraKind::D];

    pub fn half_integer(self) -> bool {
        !matches!(self, AlgebraKind::B)
    }

    /// Odd generators anticommute.
    pub fn is_odd(self) -> bool {
        !matches!(self, AlgebraKind::C)
    }

    pub fn in_lattice(self, n: ModeIndex) -> bool {
        n.is_integer() != self.half_integer()
    }

    /// The scalar in a_m a_n -/+ a_n a_m = kappa(m, n).
    pub fn kappa(self, m: ModeIndex, n: ModeIndex) -> Rational {
        if m.0 != -n.0 {
            return Rational::zero();
        }
        let sign = |e: i64| if e.rem_euclid(2) == 0 { rat_int(1) } else { rat_int(-1) };
        match self {
            AlgebraKind::B => rat_int(2) * sign(m.0 / 2),
            AlgebraKind::C => sign((n.0 - 1) / 2),
            AlgebraKind::D => Rational::one(),
        }
    }

    pub fn is_annihilator(self, n: ModeIndex) -> bool {
        match self {
            AlgebraKind::B | AlgebraKind::C => n.0 < 0,
            AlgebraKind::D => n.0 > 0,
        }
    }

    /// Energy of a creation mode in units of 1/2.
    pub fn energy2(self, n: ModeIndex) -> i64 {
        if self == AlgebraKind::B && n.0 == 0 {
            1
        } else {
            n.0.abs()
        }
    }

    /// Whether creation mode `n` may sit directly left of `x` in a word.
    fn precedes(self, n: ModeIndex, x: ModeIndex) -> bool {
        if self.is_annihilator(n) {
            return false;
        }
        let (a, b) = (n.0.abs(), x.0.abs());
        if self.is_odd() {
            a > b
        } else {
            a >= b
        }
    }
}

/// Normal-form word of creation modes; the vacuum is the empty word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ModeWord(pub Vec<ModeIndex>);

impl ModeWord {
    pub fn vacuum() -> Self {
        ModeWord(Vec::new())
    }

    pub fn energy2(&self, kind: AlgebraKind) -> i64 {
        self.0.iter().map(|n| kind.energy2(*n)).sum()
    }

    fn prepend(&self, n: ModeIndex) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(n);
        v.extend_from_slice(&self.0);
        ModeWord(v)
    }

    fn tail(&self) -> ModeWord {
        ModeWord(self.0[1..].to_vec())
    }
}

impl fmt::Display for ModeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.0 {
            write!(f, "phi({n}) ")?;
        }
        write!(f, "|0>")
    }
}

/// Finite linear combination of basis words.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    kind: AlgebraKind,
    order: u32,
    terms: BTreeMap<ModeWord, CycScalar>,
}

impl FockVector {
    pub fn zero(kind: AlgebraKind, order: u32) -> Self {
        FockVector { kind, order, terms: BTreeMap::new() }
    }

    pub fn vacuum(kind: AlgebraKind, order: u32) -> Self {
        Self::basis_word(kind, order, ModeWord::vacuum())
    }

    pub fn basis_word(kind: AlgebraKind, order: u32, w: ModeWord) -> Self {
        let mut t = BTreeMap::new();
        t.insert(w, CycScalar::one(order));
        FockVector { kind, order, terms: t }
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<ModeWord, CycScalar> {
        &self.terms
    }

    pub fn coeff(&self, w: &ModeWord) -> CycScalar {
        self.terms.get(w).cloned().unwrap_or_else(|| CycScalar::zero(self.order))
    }

    /// Largest energy (units of 1/2) among the terms.
    pub fn max_energy2(&self) -> Option<i64> {
        self.terms.keys().map(|w| w.energy2(self.kind)).max()
    }

    pub fn add_term(&mut self, w: ModeWord, c: CycScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FockError> {
        if self.kind != other.kind || self.order != other.order {
            return Err(FockError::SpecMismatch);
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale_rational(&self, q: &Rational) -> Self {
        let mut out = Self::zero(self.kind, self.order);
        if q.is_zero() {
            return out;
        }
        for (w, c) in &self.terms {
            out.terms.insert(w.clone(), c.scale(q));
        }
        out
    }

    /// Re-embed coefficient values into Q(e_order); order must divide it.
    pub fn with_order(&self, order: u32) -> Self {
        if order == self.order {
            return self.clone();
        }
        assert_eq!(order % self.order, 0);
        let mut out = Self::zero(self.kind, order);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), crate::scalar::embed(c, order));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(w, c)| json!({"word": w.0.iter().map(|n| n.to_json()).collect::<Vec<_>>(), "coeff": c.to_string()}))
            .collect();
        json!({"spec": self.kind.to_string(), "terms": terms})
    }

    /// Parses the JSON form; words are normalized through `apply_mode`.
    pub fn from_json(v: &Value, order: u32) -> Result<Self, FockError> {
        let kind: AlgebraKind = v
            .get("spec")
            .and_then(Value::as_str)
            .ok_or_else(|| FockError::Parse("missing spec".into()))?
            .parse()?;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| FockError::Parse("missing terms".into()))?;
        let mut out = Self::zero(kind, order);
        for t in terms {
            let word = t.get("word").and_then(Value::as_array).ok_or_else(|| FockError::Parse("missing word".into()))?;
            let c = match t.get("coeff") {
                None => CycScalar::one(order),
                Some(Value::String(s)) => CycScalar::parse(order, s)?,
                Some(Value::Number(n)) => CycScalar::parse(order, &n.to_string())?,
                Some(other) => return Err(FockError::Parse(other.to_string())),
            };
            let mut vec = Self::vacuum(kind, order);
            for idx in word.iter().rev() {
                let n = ModeIndex::from_json(idx)?;
                if !kind.in_lattice(n) {
                    return Err(FockError::Lattice(n, kind));
                }
                vec = apply_mode(n, &vec);
            }
            out = out.try_add(&Coefficient::scale(&vec, &c))?;
        }
        Ok(out)
    }
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !c.is_one() {
                write!(f, "({c}) ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

impl Coefficient for FockVector {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        assert!(self.kind == other.kind && self.order == other.order, "mixed Fock spaces");
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c.clone());
        }
    }
    fn scale(&self, s: &CycScalar) -> Self {
        let mut out = Self::zero(self.kind, self.order);
        if s.is_zero() {
            return out;
        }
        for (w, c) in &self.terms {
            out.terms.insert(w.clone(), c * s);
        }
        out
    }
    fn negate(&self) -> Self {
        FockVector { kind: self.kind, order: self.order, terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect() }
    }
}

/// a_n applied to a single normal-form word, written into `out` with weight `c`.
fn apply_to_word(kind: AlgebraKind, n: ModeIndex, w: &ModeWord, c: &CycScalar, out: &mut FockVector) {
    let Some(&x) = w.0.first() else {
        if !kind.is_annihilator(n) {
            out.add_term(ModeWord(vec![n]), c.clone());
        }
        return;
    };
    if kind.precedes(n, x) {
        out.add_term(w.prepend(n), c.clone());
        return;
    }
    let rest = w.tail();
    if kind.is_odd() && n == x {
        // a_n a_n = kappa(n, n) / 2
        let k = kind.kappa(n, n) / rat_int(2);
        if !k.is_zero() {
            out.add_term(rest, c.scale(&k));
        }
        return;
    }
    // a_n x rest = s x (a_n rest) + kappa(n, x) rest
    let k = kind.kappa(n, x);
    if !k.is_zero() {
        out.add_term(rest.clone(), c.scale(&k));
    }
    let mut inner = FockVector::zero(kind, out.order);
    apply_to_word(kind, n, &rest, c, &mut inner);
    let s_neg = kind.is_odd();
    for (u, d) in inner.terms {
        let d = if s_neg { -d } else { d };
        out.add_term(u.prepend(x), d);
    }
}

/// The vector a_n v in normal form.
pub fn apply_mode(n: ModeIndex, v: &FockVector) -> FockVector {
    debug_assert!(v.kind.in_lattice(n), "mode {n} outside lattice");
    let mut out = FockVector::zero(v.kind, v.order);
    for (w, c) in &v.terms {
        apply_to_word(v.kind, n, w, c, &mut out);
    }
    out
}

/// Creation modes in increasing energy.
fn creation_modes(kind: AlgebraKind, max_energy2: i64) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    let mut d = 0i64;
    loop {
        for cand in [ModeIndex(d), ModeIndex(-d)] {
            if kind.in_lattice(cand) && !kind.is_annihilator(cand) && kind.energy2(cand) <= max_energy2 && !out.contains(&cand) {
                out.push(cand);
            }
        }
        if d > max_energy2 {
            break;
        }
        d += 1;
    }
    out.sort_by_key(|n| kind.energy2(*n));
    out
}

/// All normal-form words with energy at most `max_energy` (in the units where
/// modes have energy |n|, and the Cl_B zero mode 1/2), smallest energy first.
pub fn basis_words(kind: AlgebraKind, max_energy: &Rational) -> Vec<ModeWord> {
    let cap = (max_energy * rat_int(2)).floor().to_integer();
    let cap: i64 = i64::try_from(cap).unwrap_or(i64::MAX);
    if cap < 0 {
        return Vec::new();
    }
    let modes = creation_modes(kind, cap);
    let mut words = Vec::new();
    // modes sorted ascending by energy; build words right to left
    fn go(kind: AlgebraKind, modes: &[ModeIndex], start: usize, left: i64, cur: &mut Vec<ModeIndex>, out: &mut Vec<ModeWord>) {
        out.push(ModeWord(cur.iter().rev().copied().collect()));
        for i in start..modes.len() {
            let e = kind.energy2(modes[i]);
            if e > left {
                break;
            }
            cur.push(modes[i]);
            let next = if kind.is_odd() { i + 1 } else { i };
            go(kind, modes, next, left - e, cur, out);
            cur.pop();
        }
    }
    go(kind, &modes, 0, cap, &mut Vec::new(), &mut words);
    words.sort_by(|a, b| a.energy2(kind).cmp(&b.energy2(kind)).then_with(|| a.cmp(b)));
    words
}

/// Unit vectors of the basis up to the given energy.
pub fn basis(kind: AlgebraKind, order: u32, max_energy: &Rational) -> Vec<FockVector> {
    basis_words(kind, max_energy).into_iter().map(|w| FockVector::basis_word(kind, order, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn mode_index_text() {
        assert_eq!(ModeIndex::half(-1).to_string(), "-1/2");
        assert_eq!(ModeIndex::parse("-3/2").unwrap(), ModeIndex::half(-2));
        assert_eq!(ModeIndex::parse("4").unwrap(), ModeIndex::from_int(4));
        assert!(ModeIndex::parse("2/2").is_err());
    }

    #[test]
    fn small_bases() {
        let d = basis_words(AlgebraKind::D, &rat(1, 2));
        assert_eq!(d, vec![ModeWord::vacuum(), ModeWord(vec![ModeIndex::half(-1)])]);
        let b = basis_words(AlgebraKind::B, &rat(3, 2));
        let want = vec![
            ModeWord::vacuum(),
            ModeWord(vec![ModeIndex::from_int(0)]),
            ModeWord(vec![ModeIndex::from_int(1)]),
            ModeWord(vec![ModeIndex::from_int(1), ModeIndex::from_int(0)]),
        ];
        assert_eq!(b, want);
        assert_eq!(basis_words(AlgebraKind::C, &Rational::zero()), vec![ModeWord::vacuum()]);
    }
}
