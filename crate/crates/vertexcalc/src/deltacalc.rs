//! Delta functions at z = lambda w, decomposition of N-point local
//! distributions, locality tests and partial fractions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{rat_int, root_power, CycScalar, Rational, ScalarError};
use crate::series::{
    accumulate, bidist_mul, binomial, linear_power, poly2, poly2_mul, residue_z, BiDist, Coefficient, Factor,
    LaurentPoly, SeriesError, Window, WindowSeries,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeltaError {
    #[error("point index {0} out of range")]
    InvalidPoint(usize),
    #[error("points must be distinct and nonzero")]
    BadPoints,
    #[error("distribution is not local at the given points and orders (witness at z^{0} w^{1})")]
    NotLocal(i64, i64),
    #[error("window too small: need z-window {needed_z} and a w-window wider than {margin}")]
    WindowTooSmall { needed_z: Window, margin: i64 },
    #[error("Bell polynomial B({n},{k}) needs 1 <= k <= n")]
    BellRange { n: usize, k: usize },
    #[error("orders list has {got} entries for {expected} points")]
    OrdersLength { got: usize, expected: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("malformed input: {0}")]
    Parse(String),
}

/// Points of locality lambda_1..lambda_N inside Q(e_order).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    order: u32,
    points: Vec<CycScalar>,
}

impl PointSet {
    /// The default points lambda_k = e^{k-1}, k = 1..N.
    pub fn roots_of_unity(n: u32) -> Self {
        PointSet { order: n, points: (0..n as i64).map(|k| root_power(n, k)).collect() }
    }

    /// The N-th roots of unity inside a larger cyclotomic field.
    pub fn roots_in(n: u32, order: u32) -> Self {
        assert_eq!(order % n, 0, "Q(e_{n}) does not embed in Q(e_{order})");
        let step = (order / n) as i64;
        PointSet { order, points: (0..n as i64).map(|k| root_power(order, k * step)).collect() }
    }

    pub fn new(order: u32, points: Vec<CycScalar>) -> Result<Self, DeltaError> {
        for (i, p) in points.iter().enumerate() {
            if p.is_zero() || p.order() != order || points[..i].contains(p) {
                return Err(DeltaError::BadPoints);
            }
        }
        Ok(PointSet { order, points })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CycScalar] {
        &self.points
    }

    /// 1-based access.
    pub fn point(&self, k: usize) -> Result<&CycScalar, DeltaError> {
        k.checked_sub(1).and_then(|i| self.points.get(i)).ok_or(DeltaError::InvalidPoint(k))
    }

    /// 1-based index of a point, if present.
    pub fn index_of(&self, lambda: &CycScalar) -> Option<usize> {
        self.points.iter().position(|p| p == lambda).map(|i| i + 1)
    }

    fn check_orders(&self, orders: &[u32]) -> Result<(), DeltaError> {
        if orders.len() != self.len() {
            return Err(DeltaError::OrdersLength { got: orders.len(), expected: self.len() });
        }
        Ok(())
    }
}

/// Windowed coefficient of the l-th divided derivative of delta(z - lambda w)
/// at z^m: binom(-m-1, l) lambda^{-m-l-1}, sitting at w^{-m-l-1}.
fn delta_coeff(lambda_inv: &CycScalar, l: u32, m: i64) -> Option<CycScalar> {
    let b = binomial(-m - 1, l as i64);
    if b.is_zero() {
        return None;
    }
    Some(lambda_inv.pow(m + l as i64 + 1).ok()?.scale(&b))
}

/// Windowed expansion of the l-th divided derivative of delta(z - lambda_k w).
pub fn delta_term(
    points: &PointSet,
    k: usize,
    l: u32,
    zout: &Window,
    wout: &Window,
) -> Result<BiDist<CycScalar>, DeltaError> {
    let lambda = points.point(k)?;
    if !zout.is_finite() || !wout.is_finite() {
        return Err(SeriesError::InfiniteWindow.into());
    }
    let inv = lambda.inv()?;
    let mut out = BiDist::new(*zout, *wout);
    for m in zout.range() {
        let we = -m - l as i64 - 1;
        if wout.contains(we) {
            if let Some(c) = delta_coeff(&inv, l, m) {
                out.insert(m, we, c);
            }
        }
    }
    Ok(out)
}

/// Finite sum of c_{kl}(w) times derivatives of delta(z - lambda_k w).
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSum<V> {
    pub points: PointSet,
    /// (1-based point index, derivative order) to coefficient series in w.
    pub terms: BTreeMap<(usize, u32), WindowSeries<V>>,
}

impl<V: Coefficient> DeltaSum<V> {
    pub fn new(points: PointSet) -> Self {
        DeltaSum { points, terms: BTreeMap::new() }
    }

    pub fn insert(&mut self, k: usize, l: u32, c: WindowSeries<V>) {
        if !c.is_zero() {
            self.terms.insert((k, l), c);
        }
    }

    pub fn coeff(&self, k: usize, l: u32) -> Option<&WindowSeries<V>> {
        self.terms.get(&(k, l))
    }

    /// Expand on a finite rectangle; the result is exact on the returned window.
    pub fn expand(&self, zout: &Window, wout: &Window) -> Result<BiDist<V>, DeltaError> {
        if !zout.is_finite() || !wout.is_finite() {
            return Err(SeriesError::InfiniteWindow.into());
        }
        let (zlo, zhi) = (zout.lo.unwrap(), zout.hi.unwrap());
        let mut wcert = *wout;
        for ((_, l), c) in &self.terms {
            // c_{q'} feeds z^m w^{q' - m - l - 1}
            let lim = Window {
                lo: c.window.lo.map(|lo| lo - zlo - *l as i64 - 1),
                hi: c.window.hi.map(|hi| hi - zhi - *l as i64 - 1),
            };
            wcert = wcert
                .intersect(&lim)
                .ok_or_else(|| SeriesError::WindowUnsatisfiable("coefficient windows too narrow".into()))?;
        }
        let mut out = BiDist::new(*zout, wcert);
        for ((k, l), c) in &self.terms {
            let inv = self.points.point(*k)?.inv()?;
            for m in zout.range() {
                let Some(d) = delta_coeff(&inv, *l, m) else { continue };
                for (q, v) in &c.coeffs {
                    let we = q - m - *l as i64 - 1;
                    if wcert.contains(we) {
                        out.insert(m, we, v.scale(&d));
                    }
                }
            }
        }
        Ok(out)
    }

    /// (z - lambda_i w) times the sum, rewritten with delta-factoring rules.
    pub fn factor_rewrite(&self, i: usize) -> Result<Self, DeltaError> {
        let li = self.points.point(i)?.clone();
        let mut acc: BTreeMap<(usize, u32), WindowSeries<V>> = BTreeMap::new();
        let mut push = |key: (usize, u32), s: WindowSeries<V>| {
            let merged = match acc.remove(&key) {
                None => s,
                Some(prev) => prev.add(&s).expect("overlapping coefficient windows"),
            };
            acc.insert(key, merged);
        };
        for ((j, l), c) in &self.terms {
            let diff = self.points.point(*j)? - &li;
            if *l > 0 {
                push((*j, l - 1), c.clone());
            }
            if !diff.is_zero() {
                push((*j, *l), c.scale(&diff).shift(1));
            }
        }
        let mut out = DeltaSum::new(self.points.clone());
        for ((k, l), c) in acc {
            out.insert(k, l, c);
        }
        Ok(out)
    }
}

/// Multivariate polynomial with rational coefficients in x_1, x_2, ...
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BellPoly {
    /// exponent vector (x_1, x_2, ...) to coefficient
    pub terms: BTreeMap<Vec<u32>, Rational>,
}

impl BellPoly {
    fn one() -> Self {
        let mut t = BTreeMap::new();
        t.insert(vec![], Rational::one());
        BellPoly { terms: t }
    }

    fn add_term(&mut self, mono: Vec<u32>, c: Rational) {
        let mut mono = mono;
        while mono.last() == Some(&0) {
            mono.pop();
        }
        let e = self.terms.entry(mono).or_insert_with(Rational::zero);
        *e += c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    /// Evaluate with x_i taken from `vals[i-1]`.
    pub fn eval_with<T: Clone>(
        &self,
        vals: &[T],
        one: T,
        mul: impl Fn(&T, &T) -> T,
        add: impl Fn(&T, &T) -> T,
        scale: impl Fn(&T, &Rational) -> T,
    ) -> Option<T> {
        let mut acc: Option<T> = None;
        for (mono, c) in &self.terms {
            let mut t = one.clone();
            for (i, e) in mono.iter().enumerate() {
                for _ in 0..*e {
                    t = mul(&t, &vals[i]);
                }
            }
            let t = scale(&t, c);
            acc = Some(match acc {
                None => t,
                Some(a) => add(&a, &t),
            });
        }
        acc
    }
}

impl fmt::Display for BellPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, c) in self.terms.iter().rev() {
            let mut parts = Vec::new();
            if !c.is_one() || mono.iter().all(|e| *e == 0) {
                parts.push(if c.is_integer() { c.numer().to_string() } else { format!("{}/{}", c.numer(), c.denom()) });
            }
            for (i, e) in mono.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("x{}", i + 1)),
                    _ => parts.push(format!("x{}^{}", i + 1, e)),
                }
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", parts.join("*"))?;
            first = false;
        }
        Ok(())
    }
}

/// Partial Bell polynomial B_{n,k} by the standard recurrence.
pub fn bell_polynomial(n: usize, k: usize) -> Result<BellPoly, DeltaError> {
    if k == 0 || k > n {
        return Err(DeltaError::BellRange { n, k });
    }
    Ok(bell_table(n)[n][k].clone())
}

/// Table of B_{m,j} for 0 <= j <= m <= n.
fn bell_table(n: usize) -> Vec<Vec<BellPoly>> {
    let mut t: Vec<Vec<BellPoly>> = vec![vec![BellPoly::default(); n + 1]; n + 1];
    t[0][0] = BellPoly::one();
    for m in 1..=n {
        for j in 1..=m {
            let mut p = BellPoly::default();
            for i in 1..=(m - j + 1) {
                let c = binomial(m as i64 - 1, i as i64 - 1);
                for (mono, v) in &t[m - i][j - 1].terms {
                    let mut mono = mono.clone();
                    if mono.len() < i {
                        mono.resize(i, 0);
                    }
                    mono[i - 1] += 1;
                    p.add_term(mono, v * &c);
                }
            }
            t[m][j] = p;
        }
    }
    t
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, i| acc * rat_int(i))
}

/// Polynomial in t over Q(e) (little-endian), helpers.
fn tpoly_mul(a: &[CycScalar], b: &[CycScalar], order: u32) -> Vec<CycScalar> {
    let mut out = vec![CycScalar::zero(order); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

fn tpoly_linear_power(lambda: &CycScalar, n: u32) -> Vec<CycScalar> {
    let order = lambda.order();
    let mut p = vec![CycScalar::one(order)];
    for _ in 0..n {
        p = tpoly_mul(&p, &[-lambda, CycScalar::one(order)], order);
    }
    p
}

/// Coefficients of p(t + a) given p(t).
fn tpoly_shift(p: &[CycScalar], a: &CycScalar) -> Vec<CycScalar> {
    let order = a.order();
    let mut out = vec![CycScalar::zero(order); p.len()];
    for (i, c) in p.iter().enumerate() {
        // c (t + a)^i
        for j in 0..=i {
            let b = binomial(i as i64, j as i64);
            out[j] += &(c * &a.pow((i - j) as i64).unwrap()).scale(&b);
        }
    }
    out
}

/// Taylor data of Q(z) = prod_{r != j} (z - lambda_r w)^{n_r} at z = lambda_j w:
/// returns (scalar c_i, degree d) with p_{-i,j}(w) = c_i w^{d-i}.
fn taylor_data(points: &PointSet, orders: &[u32], j: usize) -> (Vec<CycScalar>, i64) {
    let order = points.order();
    let mut q = vec![CycScalar::one(order)];
    let mut d = 0i64;
    for (r, (lam, n)) in points.points().iter().zip(orders).enumerate() {
        if r + 1 != j {
            q = tpoly_mul(&q, &tpoly_linear_power(lam, *n), order);
            d += *n as i64;
        }
    }
    (tpoly_shift(&q, &points.points()[j - 1]), d)
}

/// p_{-i,j}(w) for i = 0..count.
pub fn taylor_multipliers(points: &PointSet, orders: &[u32], j: usize, count: usize) -> Vec<LaurentPoly> {
    let (c, d) = taylor_data(points, orders, j);
    (0..count)
        .map(|i| {
            let ci = c.get(i).cloned().unwrap_or_else(|| CycScalar::zero(points.order()));
            LaurentPoly::monomial(ci, d - i as i64)
        })
        .collect()
}

/// P_{0,j} .. P_{n_j-1,j}: coefficients of the reciprocal of the local
/// multiplier series, via Faa di Bruno with Bell polynomials.
pub fn inverse_series_coeffs(points: &PointSet, orders: &[u32], j: usize) -> Result<Vec<LaurentPoly>, DeltaError> {
    points.check_orders(orders)?;
    points.point(j)?;
    let nj = orders[j - 1] as usize;
    let count = nj.max(1);
    let p = taylor_multipliers(points, orders, j, count);
    let order = points.order();
    let (e0, c0) = match p[0].as_monomial() {
        Some((e, c)) => (e, c.clone()),
        None => return Err(DeltaError::BadPoints),
    };
    let p0_inv = c0.inv().map_err(|_| DeltaError::BadPoints)?;
    // Bell variables are the ordinary derivatives i! p_{-i}.
    let xs: Vec<LaurentPoly> = (1..count).map(|i| p[i].scale(&CycScalar::from_rational(order, factorial(i)))).collect();
    let table = bell_table(count.saturating_sub(1));
    let mut out = vec![LaurentPoly::monomial(p0_inv.clone(), -e0)];
    for n in 1..count {
        let mut acc = LaurentPoly::zero(order);
        for k in 1..=n {
            let b = table[n][k].eval_with(
                &xs,
                LaurentPoly::constant(CycScalar::one(order)),
                |a, b| a.mul(b),
                |a, b| a.add(b),
                |a, q| a.scale(&CycScalar::from_rational(order, q.clone())),
            );
            let Some(b) = b else { continue };
            let sign = if k % 2 == 1 { -Rational::one() } else { Rational::one() };
            let coef = sign * factorial(k) / factorial(n);
            let p0pow = p0_inv.pow(k as i64 + 1)?;
            let term = b.scale(&p0pow.scale(&coef)).shift(-(k as i64 + 1) * e0);
            acc = acc.add(&term);
        }
        out.push(acc);
    }
    out.truncate(nj.max(1));
    Ok(out)
}

/// prod_i (z - lambda_i w)^{n_i} as a polynomial.
pub fn locality_polynomial(points: &PointSet, orders: &[u32]) -> BiDist<CycScalar> {
    let mut m = poly2(points.order(), [(0, 0, CycScalar::one(points.order()))]);
    for (lam, n) in points.points().iter().zip(orders) {
        if *n > 0 {
            m = poly2_mul(&m, &linear_power(lam, *n));
        }
    }
    m
}

/// Certificate of a locality test.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityCert {
    pub local: bool,
    pub zwindow: Window,
    pub wwindow: Window,
    /// first nonzero cell of the cleared product, when not local
    pub witness: Option<(i64, i64)>,
}

fn required_window(orders: &[u32]) -> (Window, i64) {
    let s: i64 = orders.iter().map(|n| *n as i64).sum();
    (Window::new(-s.max(1), -1), s)
}

/// Tests whether prod (z - lambda_i w)^{n_i} kills `a` on the certified window.
pub fn is_local<V: Coefficient>(a: &BiDist<V>, points: &PointSet, orders: &[u32]) -> Result<LocalityCert, DeltaError> {
    points.check_orders(orders)?;
    let m = locality_polynomial(points, orders);
    let (needed_z, margin) = required_window(orders);
    let too_small = || DeltaError::WindowTooSmall { needed_z, margin };
    let prod = bidist_mul(&Factor::Dist(&m), a, &a.zwindow, &a.wwindow).map_err(|_| too_small())?;
    if !prod.zwindow.contains_window(&needed_z) {
        return Err(too_small());
    }
    let witness = prod.coeffs.keys().next().copied();
    Ok(LocalityCert { local: witness.is_none(), zwindow: prod.zwindow, wwindow: prod.wwindow, witness })
}

/// Decomposes a local distribution into derivatives of delta functions.
pub fn decompose<V: Coefficient>(a: &BiDist<V>, points: &PointSet, orders: &[u32]) -> Result<DeltaSum<V>, DeltaError> {
    let cert = is_local(a, points, orders)?;
    if let Some((z, w)) = cert.witness {
        return Err(DeltaError::NotLocal(z, w));
    }
    let (needed_z, margin) = required_window(orders);
    let too_small = || DeltaError::WindowTooSmall { needed_z, margin };
    let mut out = DeltaSum::new(points.clone());
    let res_window = Window::new(-1, -1);
    for j in 1..=points.len() {
        let nj = orders[j - 1];
        if nj == 0 {
            continue;
        }
        let lam = points.point(j)?;
        let q = {
            let mut o = orders.to_vec();
            o[j - 1] = 0;
            locality_polynomial(points, &o)
        };
        let pcoef = inverse_series_coeffs(points, orders, j)?;
        let mut residues = Vec::with_capacity(nj as usize);
        for r in 0..nj {
            let mult = poly2_mul(&linear_power(lam, nj - 1 - r), &q);
            let prod = bidist_mul(&Factor::Dist(&mult), a, &res_window, &a.wwindow).map_err(|_| too_small())?;
            residues.push(residue_z(&prod)?);
        }
        for r in 0..nj as usize {
            let mut acc: Option<WindowSeries<V>> = None;
            for i in 0..=r {
                let term = residues[i].mul_poly(&pcoef[r - i]).ok_or_else(too_small)?;
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.add(&term).ok_or_else(too_small)?,
                });
            }
            let c = acc.expect("at least one term");
            out.insert(j, nj - 1 - r as u32, c);
        }
    }
    Ok(out)
}

/// Rational function num / (z^m w^n prod (z - lambda_k w)^{n_k}).
#[derive(Debug, Clone, PartialEq)]
pub struct RatFrac {
    pub points: PointSet,
    pub num: BiDist<CycScalar>,
    pub z_pole: u32,
    pub w_pole: u32,
    pub point_poles: Vec<u32>,
}

/// q(z,w) + sum A_{-i,0}(w) z^{-i} + sum_k sum_i A_{-i,k}(w) (z - lambda_k w)^{-i}.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionForm {
    pub points: PointSet,
    pub poly: BiDist<CycScalar>,
    /// index i-1 holds A_{-i,0}
    pub z_parts: Vec<LaurentPoly>,
    /// [k-1][i-1] holds A_{-i,k}
    pub point_parts: Vec<Vec<LaurentPoly>>,
}

impl PartialFractionForm {
    /// A_{-1} at the k-th point: the residue in z at z = lambda_k w.
    pub fn residue_at_point(&self, k: usize) -> LaurentPoly {
        self.point_parts.get(k - 1).and_then(|v| v.first()).cloned().unwrap_or_else(|| LaurentPoly::zero(self.points.order()))
    }

    /// Clear the denominator of `f`'s shape; must equal `f.num`.
    pub fn reassemble(&self, f: &RatFrac) -> BiDist<CycScalar> {
        let order = self.points.order();
        let wpow = |e: i64| poly2(order, [(0, e, CycScalar::one(order))]);
        let zpow = |e: i64| poly2(order, [(e, 0, CycScalar::one(order))]);
        let lp = |p: &LaurentPoly| poly2(order, p.terms().iter().map(|(e, c)| (0, *e, c.clone())));
        let base = poly2_mul(&wpow(f.w_pole as i64), &zpow(f.z_pole as i64));
        let full = poly2_mul(&base, &locality_polynomial(&f.points, &f.point_poles));
        let mut total = poly2_mul(&self.poly, &full);
        let add = |acc: &BiDist<CycScalar>, b: &BiDist<CycScalar>| acc.add(b).expect("total");
        for (i, a) in self.z_parts.iter().enumerate() {
            let i = i as i64 + 1;
            let t = poly2_mul(&lp(a), &poly2_mul(&poly2_mul(&wpow(f.w_pole as i64), &zpow(f.z_pole as i64 - i)), &locality_polynomial(&f.points, &f.point_poles)));
            total = add(&total, &t);
        }
        for (k, parts) in self.point_parts.iter().enumerate() {
            for (i, a) in parts.iter().enumerate() {
                let mut o = f.point_poles.clone();
                o[k] -= i as u32 + 1;
                let t = poly2_mul(&lp(a), &poly2_mul(&base, &locality_polynomial(&f.points, &o)));
                total = add(&total, &t);
            }
        }
        total
    }
}

fn tpoly_trim(mut p: Vec<CycScalar>) -> Vec<CycScalar> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Division by a monic polynomial.
fn tpoly_divmod_monic(a: &[CycScalar], d: &[CycScalar], order: u32) -> (Vec<CycScalar>, Vec<CycScalar>) {
    let dd = d.len() - 1;
    let mut rem = a.to_vec();
    if rem.len() <= dd {
        rem.resize(dd.max(1), CycScalar::zero(order));
        return (vec![CycScalar::zero(order)], rem);
    }
    let mut quot = vec![CycScalar::zero(order); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, x) in d.iter().enumerate() {
            rem[i + j] -= &(&c * x);
        }
        quot[i] = c;
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

/// Power series quotient a / b up to t^{count-1}; b[0] != 0.
fn series_div(a: &[CycScalar], b: &[CycScalar], count: usize, order: u32) -> Result<Vec<CycScalar>, ScalarError> {
    let b0 = b[0].inv()?;
    let mut out: Vec<CycScalar> = Vec::with_capacity(count);
    for n in 0..count {
        let mut s = a.get(n).cloned().unwrap_or_else(|| CycScalar::zero(order));
        for i in 1..=n {
            if let Some(bi) = b.get(i) {
                s -= &(bi * &out[n - i]);
            }
        }
        out.push(&s * &b0);
    }
    Ok(out)
}

/// One-variable decomposition of r(t)/d(t), d = prod (t - pole)^mult, deg r < deg d.
/// Returns for each pole the coefficients of (t - pole)^{-i}, i = 1..mult.
fn tpoly_pfd(r: &[CycScalar], poles: &[(CycScalar, u32)], order: u32) -> Result<Vec<Vec<CycScalar>>, ScalarError> {
    let mut out = Vec::new();
    for (idx, (lam, mult)) in poles.iter().enumerate() {
        if *mult == 0 {
            out.push(vec![]);
            continue;
        }
        let mut g = vec![CycScalar::one(order)];
        for (o, (mu, m)) in poles.iter().enumerate() {
            if o != idx {
                g = tpoly_mul(&g, &tpoly_linear_power(mu, *m), order);
            }
        }
        let rs = tpoly_shift(r, lam);
        let gs = tpoly_shift(&g, lam);
        let h = series_div(&rs, &gs, *mult as usize, order)?;
        // coefficient of (t - lam)^{-i} is h_{mult - i}
        out.push((1..=*mult as usize).map(|i| h[*mult as usize - i].clone()).collect());
    }
    Ok(out)
}

/// Partial fraction decomposition through the substitution t = z / w.
pub fn partial_fractions(f: &RatFrac) -> Result<PartialFractionForm, DeltaError> {
    f.points.check_orders(&f.point_poles)?;
    let order = f.points.order();
    let s: i64 = f.point_poles.iter().map(|n| *n as i64).sum();
    let base_shift = -(f.z_pole as i64) - f.w_pole as i64 - s;
    let mut poles = vec![(CycScalar::zero(order), f.z_pole)];
    for (lam, n) in f.points.points().iter().zip(&f.point_poles) {
        poles.push((lam.clone(), *n));
    }
    let mut d = vec![CycScalar::one(order)];
    for (lam, n) in &poles {
        d = tpoly_mul(&d, &tpoly_linear_power(lam, *n), order);
    }
    // group the numerator by total degree e = a + b; N_e(t) = sum c_{a,b} t^a
    let mut groups: BTreeMap<i64, Vec<CycScalar>> = BTreeMap::new();
    for ((a, b), c) in &f.num.coeffs {
        if *a < 0 {
            return Err(DeltaError::Parse("numerator must be polynomial in z".into()));
        }
        let g = groups.entry(a + b).or_default();
        if g.len() <= *a as usize {
            g.resize(*a as usize + 1, CycScalar::zero(order));
        }
        g[*a as usize] += c;
    }
    let mut poly = BiDist::new(Window::all(), Window::all());
    let mut z_acc: Vec<BTreeMap<i64, CycScalar>> = vec![BTreeMap::new(); f.z_pole as usize];
    let mut pt_acc: Vec<Vec<BTreeMap<i64, CycScalar>>> =
        f.point_poles.iter().map(|n| vec![BTreeMap::new(); *n as usize]).collect();
    for (e, ne) in groups {
        let ne = tpoly_trim(ne);
        let (q, r) = tpoly_divmod_monic(&ne, &d, order);
        let shift = e + base_shift;
        for (a, c) in q.iter().enumerate() {
            poly.insert(a as i64, shift - a as i64, c.clone());
        }
        let parts = tpoly_pfd(&r, &poles, order)?;
        for (pi, coeffs) in parts.into_iter().enumerate() {
            for (i, c) in coeffs.into_iter().enumerate() {
                let we = shift + i as i64 + 1;
                if pi == 0 {
                    accumulate(&mut z_acc[i], we, c);
                } else {
                    accumulate(&mut pt_acc[pi - 1][i], we, c);
                }
            }
        }
    }
    let to_lp = |m: BTreeMap<i64, CycScalar>| LaurentPoly::from_terms(order, m);
    Ok(PartialFractionForm {
        points: f.points.clone(),
        poly,
        z_parts: z_acc.into_iter().map(to_lp).collect(),
        point_parts: pt_acc.into_iter().map(|v| v.into_iter().map(to_lp).collect()).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct DeltaTermJson {
    k: usize,
    l: u32,
    coeff: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    window: Option<[Option<i64>; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DeltaSumJson {
    points: Vec<String>,
    terms: Vec<DeltaTermJson>,
}

impl DeltaSum<CycScalar> {
    pub fn to_json(&self) -> serde_json::Value {
        let j = DeltaSumJson {
            points: self.points.points().iter().map(|p| p.to_string()).collect(),
            terms: self
                .terms
                .iter()
                .map(|((k, l), c)| DeltaTermJson {
                    k: *k,
                    l: *l,
                    coeff: LaurentPoly::from_terms(self.points.order(), c.coeffs.clone()).render('w'),
                    window: (c.window != Window::all()).then_some([c.window.lo, c.window.hi]),
                })
                .collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
pub struct RatFracJson {
    #[serde(rename = "N", default)]
    pub n: Option<u32>,
    pub num: Vec<(i64, i64, String)>,
    pub z_pole: u32,
    pub w_pole: u32,
    pub point_poles: Vec<u32>,
}

impl RatFrac {
    pub fn from_json(v: &serde_json::Value, default_n: u32) -> Result<Self, DeltaError> {
        let j: RatFracJson = serde_json::from_value(v.clone()).map_err(|e| DeltaError::Parse(e.to_string()))?;
        let n = j.n.unwrap_or(default_n);
        let points = PointSet::roots_of_unity(n);
        let mut num = BiDist::new(Window::all(), Window::all());
        for (z, w, c) in &j.num {
            num.insert(*z, *w, CycScalar::parse(n, c)?);
        }
        Ok(RatFrac { points, num, z_pole: j.z_pole, w_pole: j.w_pole, point_poles: j.point_poles })
    }
}

impl PartialFractionForm {
    pub fn to_json(&self) -> serde_json::Value {
        let poly: Vec<(i64, i64, String)> = self.poly.coeffs.iter().map(|((z, w), c)| (*z, *w, c.to_string())).collect();
        let z_parts: Vec<serde_json::Value> = self
            .z_parts
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| serde_json::json!({"i": -(i as i64) - 1, "coeff": a.render('w')}))
            .collect();
        let mut point_parts = Vec::new();
        for (k, parts) in self.point_parts.iter().enumerate() {
            for (i, a) in parts.iter().enumerate() {
                if !a.is_zero() {
                    point_parts.push(serde_json::json!({
                        "k": k + 1,
                        "point": self.points.points()[k].to_string(),
                        "i": -(i as i64) - 1,
                        "coeff": a.render('w'),
                    }));
                }
            }
        }
        serde_json::json!({"poly": poly, "z_parts": z_parts, "point_parts": point_parts})
    }
}
