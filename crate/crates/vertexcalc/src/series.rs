//! Laurent polynomials, windowed series and bivariate distributions in (z, w).
//!
//! Exponents are raw integers. A window records the exponent range on which
//! the stored coefficients are exact; outside it nothing is claimed.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{parse_rational, split_monomial, split_terms, CycScalar, Rational, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("expansion point must be nonzero")]
    ZeroLambda,
    #[error("requested window must be finite")]
    InfiniteWindow,
    #[error("window unsatisfiable: {0}")]
    WindowUnsatisfiable(String),
    #[error("z-window does not contain -1")]
    NoResidueExponent,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("malformed series: {0}")]
    Parse(String),
}

/// Values that can sit in a series: scalars or vectors.
pub trait Coefficient: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    fn scale(&self, s: &CycScalar) -> Self;
    fn negate(&self) -> Self;
}

impl Coefficient for CycScalar {
    fn is_zero(&self) -> bool {
        CycScalar::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn scale(&self, s: &CycScalar) -> Self {
        self * s
    }
    fn negate(&self) -> Self {
        -self
    }
}

pub(crate) fn accumulate<K: Ord, V: Coefficient>(map: &mut BTreeMap<K, V>, key: K, val: V) {
    if val.is_zero() {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(val);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            e.get_mut().add_assign_ref(&val);
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Integer interval; `None` bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "window bounds out of order: {lo} > {hi}");
        Window { lo: Some(lo), hi: Some(hi) }
    }

    pub const fn all() -> Self {
        Window { lo: None, hi: None }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn contains(&self, e: i64) -> bool {
        self.lo.is_none_or(|l| e >= l) && self.hi.is_none_or(|h| e <= h)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        let lo_ok = match (self.lo, other.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a <= b,
        };
        let hi_ok = match (self.hi, other.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        };
        lo_ok && hi_ok
    }

    /// Intersection, `None` when empty.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        match (lo, hi) {
            (Some(l), Some(h)) if l > h => None,
            _ => Some(Window { lo, hi }),
        }
    }

    pub fn shift(&self, d: i64) -> Window {
        Window { lo: self.lo.map(|l| l + d), hi: self.hi.map(|h| h + d) }
    }

    /// Exponents of a finite window.
    pub fn range(&self) -> std::ops::RangeInclusive<i64> {
        self.lo.expect("finite window")..=self.hi.expect("finite window")
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.map_or("-inf".to_string(), |l| l.to_string());
        let hi = self.hi.map_or("+inf".to_string(), |h| h.to_string());
        write!(f, "[{lo}, {hi}]")
    }
}

/// Finitely supported Laurent polynomial in one variable.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentPoly {
    order: u32,
    coeffs: BTreeMap<i64, CycScalar>,
}

impl LaurentPoly {
    pub fn zero(order: u32) -> Self {
        LaurentPoly { order, coeffs: BTreeMap::new() }
    }

    pub fn monomial(c: CycScalar, e: i64) -> Self {
        let mut p = Self::zero(c.order());
        accumulate(&mut p.coeffs, e, c);
        p
    }

    pub fn constant(c: CycScalar) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_terms(order: u32, terms: impl IntoIterator<Item = (i64, CycScalar)>) -> Self {
        let mut p = Self::zero(order);
        for (e, c) in terms {
            accumulate(&mut p.coeffs, e, c);
        }
        p
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<i64, CycScalar> {
        &self.coeffs
    }

    pub fn coeff(&self, e: i64) -> CycScalar {
        self.coeffs.get(&e).cloned().unwrap_or_else(|| CycScalar::zero(self.order))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Single term, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(i64, &CycScalar)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            accumulate(&mut out.coeffs, *e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&CycScalar::from_int(self.order, -1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.order);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                accumulate(&mut out.coeffs, a + b, x * y);
            }
        }
        out
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        Self::from_terms(self.order, self.coeffs.iter().map(|(e, c)| (*e, c * s)))
    }

    pub fn shift(&self, d: i64) -> Self {
        LaurentPoly { order: self.order, coeffs: self.coeffs.iter().map(|(e, c)| (e + d, c.clone())).collect() }
    }

    pub fn to_series(&self) -> WindowSeries<CycScalar> {
        WindowSeries { coeffs: self.coeffs.clone(), window: Window::all() }
    }

    /// Render with the given variable name, highest power first.
    pub fn render(&self, var: char) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.coeffs.iter().rev().enumerate() {
            let (neg, body) = render_monomial(c, *e, var);
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    pub fn parse(order: u32, s: &str, var: char) -> Result<Self, SeriesError> {
        let err = || SeriesError::Parse(s.to_string());
        let mut out = Self::zero(order);
        let terms = split_terms(s);
        if terms.is_empty() {
            return Err(err());
        }
        for (neg, t) in terms {
            let (coef, k) = split_monomial(&t, var).ok_or_else(err)?;
            let coef = coef.trim();
            let coef = coef.strip_prefix('(').and_then(|c| c.strip_suffix(')')).unwrap_or(coef);
            let c = if coef.is_empty() {
                CycScalar::one(order)
            } else if coef.contains('e') {
                CycScalar::parse(order, coef)?
            } else {
                CycScalar::from_rational(order, parse_rational(coef)?)
            };
            let c = if neg { -c } else { c };
            accumulate(&mut out.coeffs, k.unwrap_or(0), c);
        }
        Ok(out)
    }
}

fn render_monomial(c: &CycScalar, e: i64, var: char) -> (bool, String) {
    let powstr = match e {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{e}"),
    };
    if let Some(q) = c.as_rational() {
        let neg = q.is_negative();
        let a = q.abs();
        let cs = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
        let body = if e == 0 {
            cs
        } else if a.is_one() {
            powstr
        } else if a.is_integer() {
            format!("{cs}{powstr}")
        } else {
            format!("{cs}*{powstr}")
        };
        (neg, body)
    } else if e == 0 {
        (false, format!("({c})"))
    } else {
        (false, format!("({c})*{powstr}"))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render('w'))
    }
}

/// Windowed one-variable series: exact on `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeries<V> {
    pub coeffs: BTreeMap<i64, V>,
    pub window: Window,
}

impl<V: Coefficient> WindowSeries<V> {
    pub fn new(window: Window) -> Self {
        WindowSeries { coeffs: BTreeMap::new(), window }
    }

    pub fn get(&self, e: i64) -> Option<&V> {
        self.coeffs.get(&e)
    }

    pub fn insert(&mut self, e: i64, v: V) {
        debug_assert!(self.window.contains(e));
        accumulate(&mut self.coeffs, e, v);
    }

    pub fn restrict(&self, w: &Window) -> Option<Self> {
        let window = self.window.intersect(w)?;
        let coeffs = self.coeffs.iter().filter(|(e, _)| window.contains(**e)).map(|(e, v)| (*e, v.clone())).collect();
        Some(WindowSeries { coeffs, window })
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        let mut out = Self::new(self.window);
        for (e, v) in &self.coeffs {
            accumulate(&mut out.coeffs, *e, v.scale(s));
        }
        out
    }

    pub fn shift(&self, d: i64) -> Self {
        WindowSeries { coeffs: self.coeffs.iter().map(|(e, v)| (e + d, v.clone())).collect(), window: self.window.shift(d) }
    }

    /// Sum on the common window.
    pub fn add(&self, other: &Self) -> Option<Self> {
        let window = self.window.intersect(&other.window)?;
        let mut out = Self::new(window);
        for (e, v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if window.contains(*e) {
                accumulate(&mut out.coeffs, *e, v.clone());
            }
        }
        Some(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Multiply by a Laurent polynomial with scalar coefficients; `None` when
    /// no exponent of the product can be certified.
    pub fn mul_poly(&self, p: &LaurentPoly) -> Option<Self> {
        let (Some(lo), Some(hi)) = (p.min_exp(), p.max_exp()) else {
            return Some(Self::new(self.window));
        };
        let window = Window { lo: self.window.lo.map(|l| l + hi), hi: self.window.hi.map(|h| h + lo) };
        if window.lo.zip(window.hi).is_some_and(|(l, h)| l > h) {
            return None;
        }
        let mut out = Self::new(window);
        for (e, v) in &self.coeffs {
            for (d, c) in p.terms() {
                if window.contains(e + d) {
                    accumulate(&mut out.coeffs, e + d, v.scale(c));
                }
            }
        }
        Some(out)
    }

    pub fn split_pm(&self, sign: Sign) -> Self {
        let part = sign.window();
        let window = self.window.intersect(&part).unwrap_or(part);
        let coeffs = self.coeffs.iter().filter(|(e, _)| part.contains(**e)).map(|(e, v)| (*e, v.clone())).collect();
        WindowSeries { coeffs, window }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn window(self) -> Window {
        match self {
            Sign::Plus => Window { lo: Some(0), hi: None },
            Sign::Minus => Window { lo: None, hi: Some(-1) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Z,
    W,
}

/// Region of expansion for rational functions of z and w.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionDir {
    /// |z| >> |w|
    ZW,
    /// |w| >> |z|
    WZ,
}

/// Windowed bivariate distribution, exact on `zwindow x wwindow`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiDist<V> {
    pub coeffs: BTreeMap<(i64, i64), V>,
    pub zwindow: Window,
    pub wwindow: Window,
}

impl<V: Coefficient> BiDist<V> {
    pub fn new(zwindow: Window, wwindow: Window) -> Self {
        BiDist { coeffs: BTreeMap::new(), zwindow, wwindow }
    }

    pub fn get(&self, ze: i64, we: i64) -> Option<&V> {
        self.coeffs.get(&(ze, we))
    }

    pub fn insert(&mut self, ze: i64, we: i64, v: V) {
        accumulate(&mut self.coeffs, (ze, we), v);
    }

    pub fn is_total(&self) -> bool {
        self.zwindow == Window::all() && self.wwindow == Window::all()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn restrict(&self, zw: &Window, ww: &Window) -> Option<Self> {
        let zwindow = self.zwindow.intersect(zw)?;
        let wwindow = self.wwindow.intersect(ww)?;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|((z, w), _)| zwindow.contains(*z) && wwindow.contains(*w))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Some(BiDist { coeffs, zwindow, wwindow })
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        let mut out = Self::new(self.zwindow, self.wwindow);
        for (k, v) in &self.coeffs {
            accumulate(&mut out.coeffs, *k, v.scale(s));
        }
        out
    }

    /// Sum on the common rectangle.
    pub fn add(&self, other: &Self) -> Option<Self> {
        let zw = self.zwindow.intersect(&other.zwindow)?;
        let ww = self.wwindow.intersect(&other.wwindow)?;
        let mut out = Self::new(zw, ww);
        for ((z, w), v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if zw.contains(*z) && ww.contains(*w) {
                accumulate(&mut out.coeffs, (*z, *w), v.clone());
            }
        }
        Some(out)
    }

    pub fn sub(&self, other: &Self) -> Option<Self> {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> Self {
        BiDist {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.negate())).collect(),
            zwindow: self.zwindow,
            wwindow: self.wwindow,
        }
    }

    /// True when all stored coefficients on the rectangle vanish.
    pub fn is_zero_on(&self, zw: &Window, ww: &Window) -> bool {
        self.coeffs.keys().all(|(z, w)| !(zw.contains(*z) && ww.contains(*w)))
    }

    pub fn split_pm(&self, var: Var, sign: Sign) -> Self {
        let part = sign.window();
        let (zwindow, wwindow) = match var {
            Var::Z => (self.zwindow.intersect(&part).unwrap_or(part), self.wwindow),
            Var::W => (self.zwindow, self.wwindow.intersect(&part).unwrap_or(part)),
        };
        let coeffs = self
            .coeffs
            .iter()
            .filter(|((z, w), _)| part.contains(if var == Var::Z { *z } else { *w }))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        BiDist { coeffs, zwindow, wwindow }
    }

    /// Swap the roles of z and w.
    pub fn swap(&self) -> Self {
        BiDist {
            coeffs: self.coeffs.iter().map(|((z, w), v)| ((*w, *z), v.clone())).collect(),
            zwindow: self.wwindow,
            wwindow: self.zwindow,
        }
    }

    fn support_box(&self) -> Option<SupportBox> {
        let mut it = self.coeffs.keys();
        let (z0, w0) = *it.next()?;
        let mut b = SupportBox { zmin: Some(z0), zmax: Some(z0), wmin: Some(w0), wmax: Some(w0) };
        for (z, w) in it {
            b.zmin = b.zmin.map(|m| m.min(*z));
            b.zmax = b.zmax.map(|m| m.max(*z));
            b.wmin = b.wmin.map(|m| m.min(*w));
            b.wmax = b.wmax.map(|m| m.max(*w));
        }
        Some(b)
    }
}

/// Residue in z: the coefficient series of z^{-1}.
pub fn residue_z<V: Coefficient>(a: &BiDist<V>) -> Result<WindowSeries<V>, SeriesError> {
    if !a.zwindow.contains(-1) {
        return Err(SeriesError::NoResidueExponent);
    }
    let mut out = WindowSeries::new(a.wwindow);
    for ((z, w), v) in &a.coeffs {
        if *z == -1 {
            out.insert(*w, v.clone());
        }
    }
    Ok(out)
}

pub(crate) fn binomial(n: i64, k: i64) -> Rational {
    // Generalized binomial coefficient n choose k for k >= 0.
    if k < 0 {
        return Rational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    Rational::new(num, den)
}

/// Lazy expansion of 1/(z - lambda w)^k in a given region.
#[derive(Debug, Clone, PartialEq)]
pub struct InversePower {
    pub lambda: CycScalar,
    pub k: u32,
    pub dir: ExpansionDir,
    lambda_inv: CycScalar,
}

impl InversePower {
    pub fn new(lambda: CycScalar, k: u32, dir: ExpansionDir) -> Result<Self, SeriesError> {
        if lambda.is_zero() {
            return Err(SeriesError::ZeroLambda);
        }
        assert!(k >= 1, "inverse power needs k >= 1");
        let lambda_inv = lambda.inv()?;
        Ok(InversePower { lambda, k, dir, lambda_inv })
    }

    /// Coefficient of z^ze w^we.
    pub fn coeff(&self, ze: i64, we: i64) -> Option<CycScalar> {
        let k = self.k as i64;
        if ze + we != -k {
            return None;
        }
        match self.dir {
            ExpansionDir::ZW => {
                let n = we;
                if n < 0 {
                    return None;
                }
                let b = binomial(n + k - 1, k - 1);
                Some(self.lambda.pow(n).unwrap().scale(&b))
            }
            ExpansionDir::WZ => {
                let n = ze;
                if n < 0 {
                    return None;
                }
                let mut b = binomial(n + k - 1, k - 1);
                if k % 2 == 1 {
                    b = -b;
                }
                Some(self.lambda_inv.pow(n + k).unwrap().scale(&b))
            }
        }
    }

    fn support(&self) -> SupportBox {
        let k = self.k as i64;
        match self.dir {
            ExpansionDir::ZW => SupportBox { zmin: None, zmax: Some(-k), wmin: Some(0), wmax: None },
            ExpansionDir::WZ => SupportBox { zmin: Some(0), zmax: None, wmin: None, wmax: Some(-k) },
        }
    }

    pub fn materialize(&self, zout: &Window, wout: &Window) -> Result<BiDist<CycScalar>, SeriesError> {
        if !zout.is_finite() || !wout.is_finite() {
            return Err(SeriesError::InfiniteWindow);
        }
        let mut out = BiDist::new(*zout, *wout);
        for ze in zout.range() {
            let we = -(self.k as i64) - ze;
            if wout.contains(we) {
                if let Some(c) = self.coeff(ze, we) {
                    out.insert(ze, we, c);
                }
            }
        }
        Ok(out)
    }
}

/// Windowed i_{z,w} or i_{w,z} of 1/(z - lambda w)^k.
pub fn expand_inverse_power(
    lambda: &CycScalar,
    k: u32,
    dir: ExpansionDir,
    zout: &Window,
    wout: &Window,
) -> Result<BiDist<CycScalar>, SeriesError> {
    InversePower::new(lambda.clone(), k, dir)?.materialize(zout, wout)
}

/// Bounding box of possibly nonzero exponents; `None` bounds are infinite.
#[derive(Debug, Clone, Copy)]
struct SupportBox {
    zmin: Option<i64>,
    zmax: Option<i64>,
    wmin: Option<i64>,
    wmax: Option<i64>,
}

/// A scalar factor of a product: a windowed distribution or a lazy expansion.
pub enum Factor<'a> {
    Dist(&'a BiDist<CycScalar>),
    Lazy(&'a InversePower),
}

struct Extent {
    zwindow: Window,
    wwindow: Window,
    support: Option<SupportBox>,
}

impl Factor<'_> {
    fn extent(&self) -> Extent {
        match self {
            Factor::Dist(d) => Extent { zwindow: d.zwindow, wwindow: d.wwindow, support: d.support_box() },
            Factor::Lazy(e) => Extent { zwindow: Window::all(), wwindow: Window::all(), support: Some(e.support()) },
        }
    }
}

fn extent_of<V: Coefficient>(b: &BiDist<V>) -> Extent {
    Extent { zwindow: b.zwindow, wwindow: b.wwindow, support: b.support_box() }
}

#[derive(Default)]
struct Bounds {
    plo: Option<i64>,
    phi: Option<i64>,
    qlo: Option<i64>,
    qhi: Option<i64>,
}

impl Bounds {
    fn raise(slot: &mut Option<i64>, v: i64) {
        *slot = Some(slot.map_or(v, |s| s.max(v)));
    }
    fn lower(slot: &mut Option<i64>, v: i64) {
        *slot = Some(slot.map_or(v, |s| s.min(v)));
    }
}

/// For every unknown half-plane of `x`, constrain the output cell so that no
/// possibly-nonzero term of `y` pairs with it.
fn constrain(x: &Extent, y: &Extent, b: &mut Bounds) -> Result<(), SeriesError> {
    let unsat = |what: &str| SeriesError::WindowUnsatisfiable(what.to_string());
    // (axis is z, below=true) means the half-plane {z < bound}.
    let mut planes = Vec::new();
    if let Some(l) = x.zwindow.lo {
        planes.push((true, true, l));
    }
    if let Some(h) = x.zwindow.hi {
        planes.push((true, false, h));
    }
    if let Some(l) = x.wwindow.lo {
        planes.push((false, true, l));
    }
    if let Some(h) = x.wwindow.hi {
        planes.push((false, false, h));
    }
    for (is_z, below, bound) in planes {
        let (own, other) = if is_z { (&y.zwindow, &y.wwindow) } else { (&y.wwindow, &y.zwindow) };
        if other.lo.is_some() || other.hi.is_some() {
            return Err(unsat("truncated factors in both arguments"));
        }
        let (smin, smax) = match (y.support, is_z) {
            (None, _) => (None, None),
            (Some(s), true) => (Some(s.zmin), Some(s.zmax)),
            (Some(s), false) => (Some(s.wmin), Some(s.wmax)),
        };
        let (lo_slot, hi_slot) = if is_z { (&mut b.plo, &mut b.phi) } else { (&mut b.qlo, &mut b.qhi) };
        if below {
            // shifted region {coord > p - bound}: y must be known and zero there
            if own.hi.is_some() {
                return Err(unsat("expansion directions incompatible"));
            }
            if let Some(l) = own.lo {
                Bounds::raise(lo_slot, bound + l - 1);
            }
            match smax {
                None => {}
                Some(None) => return Err(unsat("unbounded support meets truncation")),
                Some(Some(m)) => Bounds::raise(lo_slot, bound + m),
            }
        } else {
            if own.lo.is_some() {
                return Err(unsat("expansion directions incompatible"));
            }
            if let Some(h) = own.hi {
                Bounds::lower(hi_slot, bound + h + 1);
            }
            match smin {
                None => {}
                Some(None) => return Err(unsat("unbounded support meets truncation")),
                Some(Some(m)) => Bounds::lower(hi_slot, bound + m),
            }
        }
    }
    Ok(())
}

/// Product of a scalar factor with a distribution, exact on the certified
/// sub-rectangle of the requested output, which is the returned window.
pub fn bidist_mul<V: Coefficient>(
    a: &Factor<'_>,
    b: &BiDist<V>,
    zout: &Window,
    wout: &Window,
) -> Result<BiDist<V>, SeriesError> {
    let ea = a.extent();
    let eb = extent_of(b);
    let mut bounds = Bounds::default();
    if ea.support.is_some() && eb.support.is_some() {
        constrain(&ea, &eb, &mut bounds)?;
        constrain(&eb, &ea, &mut bounds)?;
    }
    let zcert = Window { lo: bounds.plo, hi: bounds.phi };
    let wcert = Window { lo: bounds.qlo, hi: bounds.qhi };
    let unsat = || SeriesError::WindowUnsatisfiable(format!("no exact cell in {zout} x {wout}"));
    let zw = if zcert.lo.zip(zcert.hi).is_some_and(|(l, h)| l > h) { None } else { zcert.intersect(zout) };
    let ww = if wcert.lo.zip(wcert.hi).is_some_and(|(l, h)| l > h) { None } else { wcert.intersect(wout) };
    let (zw, ww) = (zw.ok_or_else(unsat)?, ww.ok_or_else(unsat)?);
    let mut out = BiDist::new(zw, ww);
    match a {
        Factor::Dist(d) => {
            for ((za, wa), x) in &d.coeffs {
                for ((zb, wb), y) in &b.coeffs {
                    let (p, q) = (za + zb, wa + wb);
                    if zw.contains(p) && ww.contains(q) {
                        out.insert(p, q, y.scale(x));
                    }
                }
            }
        }
        Factor::Lazy(e) => {
            if !zw.is_finite() && !ww.is_finite() {
                return Err(SeriesError::InfiniteWindow);
            }
            for ((zb, wb), y) in &b.coeffs {
                // lazy term lies on the line ze + we = -k
                let zr = zw.shift(-zb);
                let wr = ww.shift(-wb);
                let k = e.k as i64;
                let ze_range = match (zr.is_finite(), wr.is_finite()) {
                    (true, _) => zr,
                    (false, true) => Window { lo: wr.hi.map(|h| -k - h), hi: wr.lo.map(|l| -k - l) },
                    _ => unreachable!(),
                };
                for ze in ze_range.range() {
                    let we = -k - ze;
                    if !wr.contains(we) || !zr.contains(ze) {
                        continue;
                    }
                    if let Some(c) = e.coeff(ze, we) {
                        out.insert(ze + zb, we + wb, y.scale(&c));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Finitely supported polynomial in z, w as a total distribution.
pub fn poly2(order: u32, terms: impl IntoIterator<Item = (i64, i64, CycScalar)>) -> BiDist<CycScalar> {
    let mut d = BiDist::new(Window::all(), Window::all());
    for (z, w, c) in terms {
        assert_eq!(c.order(), order);
        d.insert(z, w, c);
    }
    d
}

/// The binomial expansion of (z - lambda w)^n.
pub fn linear_power(lambda: &CycScalar, n: u32) -> BiDist<CycScalar> {
    let order = lambda.order();
    let neg = -lambda;
    let terms = (0..=n as i64).map(|i| {
        // z^{n-i} (-lambda w)^i
        let c = neg.pow(i).unwrap().scale(&binomial(n as i64, i));
        (n as i64 - i, i, c)
    });
    poly2(order, terms)
}

/// Product of two total (finitely supported) scalar distributions.
pub fn poly2_mul(a: &BiDist<CycScalar>, b: &BiDist<CycScalar>) -> BiDist<CycScalar> {
    assert!(a.is_total() && b.is_total());
    bidist_mul(&Factor::Dist(a), b, &Window::all(), &Window::all()).expect("total polynomials")
}

#[derive(Serialize, Deserialize)]
struct BiDistJson {
    #[serde(rename = "N")]
    n: u32,
    zwindow: [Option<i64>; 2],
    wwindow: [Option<i64>; 2],
    terms: Vec<(i64, i64, String)>,
}

impl BiDist<CycScalar> {
    pub fn to_json(&self, order: u32) -> serde_json::Value {
        let j = BiDistJson {
            n: order,
            zwindow: [self.zwindow.lo, self.zwindow.hi],
            wwindow: [self.wwindow.lo, self.wwindow.hi],
            terms: self.coeffs.iter().map(|((z, w), c)| (*z, *w, c.to_string())).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }

    /// Parse the JSON form; returns the scalar order as well.
    pub fn from_json(v: &serde_json::Value) -> Result<(u32, Self), SeriesError> {
        let j: BiDistJson = serde_json::from_value(v.clone()).map_err(|e| SeriesError::Parse(e.to_string()))?;
        if j.n == 0 {
            return Err(SeriesError::Parse("N must be positive".into()));
        }
        let win = |w: [Option<i64>; 2]| -> Result<Window, SeriesError> {
            if let [Some(l), Some(h)] = w {
                if l > h {
                    return Err(SeriesError::Parse(format!("window [{l}, {h}] out of order")));
                }
            }
            Ok(Window { lo: w[0], hi: w[1] })
        };
        let mut d = BiDist::new(win(j.zwindow)?, win(j.wwindow)?);
        for (z, w, s) in j.terms {
            if !d.zwindow.contains(z) || !d.wwindow.contains(w) {
                return Err(SeriesError::Parse(format!("term ({z}, {w}) outside window")));
            }
            d.insert(z, w, CycScalar::parse(j.n, &s)?);
        }
        Ok((j.n, d))
    }
}
