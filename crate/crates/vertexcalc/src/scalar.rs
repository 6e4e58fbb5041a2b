//! Exact scalars: rationals and elements of the cyclotomic field Q(e_N).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("scalar order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Euler totient.
pub fn totient(n: u32) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

fn poly_divmod_int(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic; coefficients are little-endian.
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= &c * d;
        }
        quot[i] = c;
    }
    quot
}

fn cyclo_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The N-th cyclotomic polynomial, little-endian integer coefficients.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "cyclotomic polynomial needs N >= 1");
    if let Some(p) = cyclo_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_divmod_int(&num, &cyclotomic_polynomial(d));
        }
    }
    let p = Arc::new(num);
    cyclo_cache().lock().unwrap().insert(n, p.clone());
    p
}

/// Element of Q(e_N), stored as a polynomial in e of degree < phi(N).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycScalar {
    order: u32,
    coeffs: Vec<Rational>,
}

fn dim(order: u32) -> usize {
    if order <= 2 {
        1
    } else {
        totient(order)
    }
}

impl CycScalar {
    pub fn zero(order: u32) -> Self {
        assert!(order >= 1);
        CycScalar { order, coeffs: vec![Rational::zero(); dim(order)] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, Rational::one())
    }

    pub fn from_int(order: u32, n: i64) -> Self {
        Self::from_rational(order, rat_int(n))
    }

    pub fn from_rational(order: u32, q: Rational) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = q;
        s
    }

    /// Reduce an arbitrary polynomial in e (little-endian) into the field.
    pub fn from_poly(order: u32, poly: Vec<Rational>) -> Self {
        let mut s = CycScalar { order, coeffs: poly };
        s.reduce();
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value, if the element lies in Q.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.coeffs[1..].iter().all(|c| c.is_zero()).then(|| &self.coeffs[0])
    }

    fn reduce(&mut self) {
        match self.order {
            1 => {
                let s: Rational = self.coeffs.iter().cloned().sum();
                self.coeffs = vec![s];
            }
            2 => {
                let mut s = Rational::zero();
                for (i, c) in self.coeffs.iter().enumerate() {
                    if i % 2 == 0 {
                        s += c;
                    } else {
                        s -= c;
                    }
                }
                self.coeffs = vec![s];
            }
            n => {
                let phi = cyclotomic_polynomial(n);
                let d = phi.len() - 1;
                let c = &mut self.coeffs;
                for i in (d..c.len()).rev() {
                    let lead = std::mem::take(&mut c[i]);
                    if lead.is_zero() {
                        continue;
                    }
                    for (j, p) in phi.iter().enumerate().take(d) {
                        if !p.is_zero() {
                            c[i - d + j] -= &lead * Rational::from_integer(p.clone());
                        }
                    }
                }
                c.resize(d, Rational::zero());
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), ScalarError> {
        if self.order == other.order {
            Ok(())
        } else {
            Err(ScalarError::OrderMismatch(self.order, other.order))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CycScalar { order: self.order, coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CycScalar { order: self.order, coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check(other)?;
        if self.coeffs.len() == 1 {
            let a = &self.coeffs[0];
            return Ok(CycScalar { order: self.order, coeffs: other.coeffs.iter().map(|b| a * b).collect() });
        }
        let n = self.coeffs.len();
        let mut prod = vec![Rational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(Self::from_poly(self.order, prod))
    }

    pub fn scale(&self, q: &Rational) -> Self {
        CycScalar { order: self.order, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm over Q.
    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.coeffs.len() == 1 {
            return Ok(Self::from_rational(self.order, self.coeffs[0].recip()));
        }
        let modulus: Vec<Rational> =
            cyclotomic_polynomial(self.order).iter().map(|c| Rational::from_integer(c.clone())).collect();
        let (g, s) = ext_gcd(trim(self.coeffs.clone()), modulus);
        // g is a nonzero constant since Phi_N is irreducible.
        let g0 = g[0].recip();
        Ok(Self::from_poly(self.order, s.into_iter().map(|c| c * &g0).collect()))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, ScalarError> {
        self.check(other)?;
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one(self.order);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Numerical value at e = exp(2 pi i / N).
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let ang = if self.order == 2 { std::f64::consts::PI * k as f64 } else {
                2.0 * std::f64::consts::PI * k as f64 / self.order as f64
            };
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    pub fn parse(order: u32, s: &str) -> Result<Self, ScalarError> {
        parse_poly(order, s)
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_sub_mul(a: &[Rational], q: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = a.to_vec();
    let len = (q.len() + b.len()).saturating_sub(1).max(out.len());
    out.resize(len, Rational::zero());
    for (i, x) in q.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] -= x * y;
        }
    }
    trim(out)
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    if rem.len() <= db {
        return (vec![Rational::zero()], trim(rem));
    }
    let lead = b[db].recip();
    let mut quot = vec![Rational::zero(); rem.len() - db];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + db] * &lead;
        if c.is_zero() {
            continue;
        }
        for (j, d) in b.iter().enumerate() {
            rem[i + j] -= &c * d;
        }
        quot[i] = c;
    }
    rem.truncate(db.max(1));
    (trim(quot), trim(rem))
}

fn is_zero_poly(p: &[Rational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Returns (g, s) with s*a = g mod m.
fn ext_gcd(a: Vec<Rational>, m: Vec<Rational>) -> (Vec<Rational>, Vec<Rational>) {
    let (mut r0, mut r1) = (a, m);
    let (mut s0, mut s1) = (vec![Rational::one()], vec![Rational::zero()]);
    while !is_zero_poly(&r1) {
        let (q, r) = poly_divmod(&r0, &r1);
        let s2 = poly_sub_mul(&s0, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    (r0, s0)
}

/// Returns e^k in Q(e_N).
pub fn root_power(order: u32, k: i64) -> CycScalar {
    let k = k.rem_euclid(order as i64) as usize;
    let mut poly = vec![Rational::zero(); k + 1];
    poly[k] = Rational::one();
    CycScalar::from_poly(order, poly)
}

/// Image of `c` under Q(e_n) -> Q(e_order), e_n = e_order^{order/n}.
pub fn embed(c: &CycScalar, order: u32) -> CycScalar {
    let n = c.order();
    assert_eq!(order % n, 0, "Q(e_{n}) does not embed in Q(e_{order})");
    let step = (order / n) as i64;
    let mut out = CycScalar::zero(order);
    for (i, q) in c.coeffs().iter().enumerate() {
        if !q.is_zero() {
            out += &root_power(order, i as i64 * step).scale(q);
        }
    }
    out
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

/// A square root of `x` of the form e^a * q * s with q rational and s a
/// square root of -1, +-2, +-3 available in the same field. `None` if no
/// root of that shape exists.
pub fn sqrt_search(x: &CycScalar) -> Option<CycScalar> {
    let order = x.order();
    if x.is_zero() {
        return Some(x.clone());
    }
    let mut radicals = vec![CycScalar::one(order)];
    if order.is_multiple_of(4) {
        radicals.push(root_power(order, (order / 4) as i64));
    }
    if order.is_multiple_of(3) {
        let e3 = root_power(order, (order / 3) as i64);
        radicals.push(&CycScalar::one(order) + &(&e3 + &e3));
    }
    if order.is_multiple_of(8) {
        let e8 = |k: i64| root_power(order, k * (order / 8) as i64);
        radicals.push(&e8(1) + &e8(7));
        radicals.push(&e8(1) + &e8(3));
    }
    if order.is_multiple_of(12) {
        let p = &radicals[1] * &radicals[2];
        radicals.push(p);
    }
    for a in 0..order as i64 {
        let y = x * &root_power(order, -2 * a);
        for s in &radicals {
            let s2 = s * s;
            let Some(t) = y.try_div(&s2).ok().and_then(|r| r.as_rational().cloned()) else { continue };
            if let Some(q) = rational_sqrt(&t) {
                return Some(&root_power(order, a) * &s.scale(&q));
            }
        }
    }
    None
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[N={}]", self, self.order)
    }
}

fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            let body = match (k, a.is_one()) {
                (0, _) => fmt_rational(&a),
                (1, true) => "e".to_string(),
                (1, false) => format!("{}*e", fmt_rational(&a)),
                (_, true) => format!("e^{k}"),
                (_, false) => format!("{}*e^{k}", fmt_rational(&a)),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            write!(f, "{body}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ScalarError> {
    let t = s.trim();
    let err = || ScalarError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational::new(n, d))
    } else {
        Ok(Rational::from_integer(BigInt::from_str(t).map_err(|_| err())?))
    }
}

/// Split a sum like "1/2*e^2 - 1/3" into signed terms.
pub(crate) fn split_terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut depth = 0i32;
    let mut prev_op = true;
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
                prev_op = false;
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
                prev_op = false;
            }
            '+' | '-' if depth == 0 && !cur.trim_end().ends_with('^') && !cur.trim_end().ends_with('/') => {
                if !cur.trim().is_empty() {
                    out.push((neg, cur.trim().to_string()));
                    cur.clear();
                    neg = ch == '-';
                } else if prev_op
                    && ch == '-' {
                        neg = !neg;
                    }
                prev_op = true;
            }
            c if c.is_whitespace() => cur.push(c),
            c => {
                cur.push(c);
                prev_op = false;
            }
        }
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur.trim().to_string()));
    }
    out
}

/// Parse "c*v^k", "c v^k", "cv", "v", "c" into (coefficient string, exponent) for variable `var`.
pub(crate) fn split_monomial(term: &str, var: char) -> Option<(&str, Option<i64>)> {
    let t = term.trim();
    match t.find(var) {
        None => Some((t, None)),
        Some(pos) => {
            let coef = t[..pos].trim().trim_end_matches('*').trim();
            let rest = t[pos + var.len_utf8()..].trim();
            let k = if rest.is_empty() {
                1
            } else {
                let e = rest.strip_prefix('^')?.trim();
                let e = e.trim_start_matches('(').trim_end_matches(')');
                e.parse::<i64>().ok()?
            };
            Some((coef, Some(k)))
        }
    }
}

fn parse_poly(order: u32, s: &str) -> Result<CycScalar, ScalarError> {
    let err = || ScalarError::Parse(s.to_string());
    let terms = split_terms(s);
    if terms.is_empty() {
        return Err(err());
    }
    let mut acc = CycScalar::zero(order);
    for (neg, t) in terms {
        let (coef, k) = split_monomial(&t, 'e').ok_or_else(err)?;
        let c = if coef.is_empty() { Rational::one() } else { parse_rational(coef)? };
        let mut term = match k {
            None => CycScalar::from_rational(order, c),
            Some(k) => root_power(order, k).scale(&c),
        };
        if neg {
            term = -term;
        }
        acc += &term;
    }
    Ok(acc)
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&CycScalar> for &CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                self.$f(rhs).expect("scalar order mismatch")
            }
        }
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: CycScalar) -> CycScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, rhs: &CycScalar) -> CycScalar {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, rhs: &CycScalar) {
        self.check(rhs).expect("scalar order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, rhs: &CycScalar) {
        self.check(rhs).expect("scalar order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(mut self) -> CycScalar {
        for c in self.coeffs.iter_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(p: &[BigInt]) -> Vec<i64> {
        p.iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(ints(&cyclotomic_polynomial(1)), vec![-1, 1]);
        assert_eq!(ints(&cyclotomic_polynomial(2)), vec![1, 1]);
        assert_eq!(ints(&cyclotomic_polynomial(4)), vec![1, 0, 1]);
        assert_eq!(ints(&cyclotomic_polynomial(6)), vec![1, -1, 1]);
        assert_eq!(ints(&cyclotomic_polynomial(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots() {
        assert_eq!(root_power(2, 1), CycScalar::from_int(2, -1));
        assert_eq!(root_power(4, 2), CycScalar::from_int(4, -1));
        for n in 1..10 {
            assert!(root_power(n, n as i64).is_one());
            assert!(root_power(n, 0).is_one());
        }
    }

    #[test]
    fn arithmetic_examples() {
        let e = root_power(3, 1);
        assert_eq!(e.inv().unwrap(), root_power(3, 2));
        assert_eq!(&e + &root_power(3, 2), CycScalar::from_int(3, -1));
        let m = CycScalar::from_int(2, -1);
        assert!((&m * &m).is_one());
        assert_eq!(CycScalar::zero(5).inv(), Err(ScalarError::DivisionByZero));
        assert!(CycScalar::one(3).try_add(&CycScalar::one(4)).is_err());
    }

    #[test]
    fn display_and_parse() {
        let x = CycScalar::parse(5, "1/2*e^2 - 1/3").unwrap();
        assert_eq!(x.to_string(), "1/2*e^2 - 1/3");
        assert_eq!(CycScalar::parse(5, &x.to_string()).unwrap(), x);
        assert_eq!(CycScalar::parse(2, "e").unwrap(), CycScalar::from_int(2, -1));
        assert_eq!(CycScalar::parse(4, "-e").unwrap().to_string(), "-e");
        assert_eq!(CycScalar::parse(1, "-3/6").unwrap().to_string(), "-1/2");
        assert_eq!(CycScalar::zero(3).to_string(), "0");
    }
}
