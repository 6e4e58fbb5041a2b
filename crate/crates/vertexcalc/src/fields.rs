//! Field expressions on Fock spaces: evaluation, normal ordered products,
//! (j,k)-products, OPE extraction and the comparison products.
//!
//! A field a(z) = sum_m a_m z^m is handled through its coefficients a_m on
//! basis words. The +/- split of normal ordering is by the sign of the raw
//! z-exponent (m >= 0 is the + part).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::deltacalc::{decompose, inverse_series_coeffs, is_local, locality_polynomial, DeltaError, PointSet};
use crate::fock::{apply_mode, basis, AlgebraKind, FockError, FockVector, ModeIndex, ModeWord};
use crate::scalar::{rat, rat_int, root_power, sqrt_search, CycScalar, Rational, ScalarError};
use crate::series::{binomial, linear_power, poly2_mul, BiDist, Coefficient, LaurentPoly, SeriesError, Window, WindowSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("fields act on different Fock spaces")]
    MixedSpaces,
    #[error("linear combination mixes parities")]
    MixedParity,
    #[error("point index {0} outside 1..={1}")]
    PointIndex(usize, usize),
    #[error("(j,k)-product with k >= 0 needs locality orders for all {0} points")]
    MissingOrders(usize),
    #[error("scalar order {0} does not match the evaluation field Q(e_{1})")]
    ScalarOrder(u32, u32),
    #[error("roots {0} do not divide scalar order {1}")]
    Roots(u32, u32),
    #[error("fields are not local at the given orders (witness z^{0} w^{1})")]
    NotLocal(i64, i64),
    #[error("window unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("unknown field {0:?}")]
    UnknownField(String),
    #[error("malformed field expression: {0}")]
    Parse(String),
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Affine map from raw z-exponent to mode index: doubled mode = sign (2m - off2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExponentMap {
    sign: i64,
    off2: i64,
}

impl ExponentMap {
    /// phi^B = sum phi_n z^n, phi^C = sum phi_n z^{n-1/2}, phi^D = sum phi_n z^{-n-1/2}.
    pub fn standard(kind: AlgebraKind) -> Self {
        match kind {
            AlgebraKind::B => ExponentMap { sign: 1, off2: 0 },
            AlgebraKind::C => ExponentMap { sign: 1, off2: -1 },
            AlgebraKind::D => ExponentMap { sign: -1, off2: -1 },
        }
    }

    pub fn mode(&self, m: i64) -> ModeIndex {
        ModeIndex::from_doubled(self.sign * (2 * m - self.off2))
    }

    pub fn exponent(&self, n: ModeIndex) -> i64 {
        (self.sign * n.doubled() + self.off2) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldNode {
    Gen { kind: AlgebraKind, map: ExponentMap },
    Id,
    Scalar(LaurentPoly),
    /// n-th divided derivative
    Deriv { arg: FieldExpr, n: u32 },
    /// a(e^k z) with e the ambient primitive root
    Dilate { arg: FieldExpr, k: i64 },
    NormProd { left: FieldExpr, right: FieldExpr },
    ProductJk { left: FieldExpr, j: usize, k: i64, right: FieldExpr, orders: Option<Vec<u32>>, lowered: Option<FieldExpr> },
    LinComb(Vec<(LaurentPoly, FieldExpr)>),
}

/// Shared, immutable field expression.
#[derive(Clone, PartialEq)]
pub struct FieldExpr(Arc<FieldNode>);

impl fmt::Debug for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FieldExpr {
    fn new(n: FieldNode) -> Self {
        FieldExpr(Arc::new(n))
    }

    pub fn node(&self) -> &FieldNode {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn gen(kind: AlgebraKind) -> Self {
        Self::new(FieldNode::Gen { kind, map: ExponentMap::standard(kind) })
    }

    pub fn id() -> Self {
        Self::new(FieldNode::Id)
    }

    pub fn scalar(p: LaurentPoly) -> Self {
        Self::new(FieldNode::Scalar(p))
    }

    pub fn deriv(&self, n: u32) -> Self {
        if n == 0 {
            return self.clone();
        }
        Self::new(FieldNode::Deriv { arg: self.clone(), n })
    }

    pub fn dilate(&self, k: i64) -> Self {
        Self::new(FieldNode::Dilate { arg: self.clone(), k })
    }

    pub fn normprod(a: &FieldExpr, b: &FieldExpr) -> Self {
        Self::new(FieldNode::NormProd { left: a.clone(), right: b.clone() })
    }

    /// a(w)_{(j,k)} b(w); `orders` are the locality orders used for k >= 0.
    pub fn product_jk(a: &FieldExpr, j: usize, k: i64, b: &FieldExpr, orders: Option<Vec<u32>>) -> Self {
        let lowered = (k < 0).then(|| FieldExpr::normprod(&a.deriv((-k - 1) as u32).dilate(j as i64 - 1), b));
        Self::new(FieldNode::ProductJk { left: a.clone(), j, k, right: b.clone(), orders, lowered })
    }

    pub fn lincomb(terms: Vec<(LaurentPoly, FieldExpr)>) -> Self {
        Self::new(FieldNode::LinComb(terms))
    }

    /// Odd parity.
    pub fn is_odd(&self) -> bool {
        match self.node() {
            FieldNode::Gen { kind, .. } => kind.is_odd(),
            FieldNode::Id | FieldNode::Scalar(_) => false,
            FieldNode::Deriv { arg, .. } | FieldNode::Dilate { arg, .. } => arg.is_odd(),
            FieldNode::NormProd { left, right } | FieldNode::ProductJk { left, right, .. } => left.is_odd() != right.is_odd(),
            FieldNode::LinComb(t) => t.first().is_some_and(|(_, e)| e.is_odd()),
        }
    }

    /// The Fock space the expression acts on, if it names a generator.
    pub fn space(&self) -> Result<Option<AlgebraKind>, FieldError> {
        let merge = |a: Option<AlgebraKind>, b: Option<AlgebraKind>| match (a, b) {
            (Some(x), Some(y)) if x != y => Err(FieldError::MixedSpaces),
            (x, y) => Ok(x.or(y)),
        };
        match self.node() {
            FieldNode::Gen { kind, .. } => Ok(Some(*kind)),
            FieldNode::Id | FieldNode::Scalar(_) => Ok(None),
            FieldNode::Deriv { arg, .. } | FieldNode::Dilate { arg, .. } => arg.space(),
            FieldNode::NormProd { left, right } | FieldNode::ProductJk { left, right, .. } => merge(left.space()?, right.space()?),
            FieldNode::LinComb(t) => t.iter().try_fold(None, |acc, (_, e)| merge(acc, e.space()?)),
        }
    }

    /// Structural checks against an evaluation context.
    pub fn validate(&self, ctx: &EvalCtx) -> Result<(), FieldError> {
        self.space()?;
        match self.node() {
            FieldNode::Gen { .. } | FieldNode::Id => Ok(()),
            FieldNode::Scalar(p) => check_order(p, ctx),
            FieldNode::Deriv { arg, .. } | FieldNode::Dilate { arg, .. } => arg.validate(ctx),
            FieldNode::NormProd { left, right } => {
                left.validate(ctx)?;
                right.validate(ctx)
            }
            FieldNode::ProductJk { left, j, k, right, orders, .. } => {
                let n = ctx.roots as usize;
                if *j == 0 || *j > n {
                    return Err(FieldError::PointIndex(*j, n));
                }
                if *k >= 0 && orders.as_ref().is_none_or(|o| o.len() != n) {
                    return Err(FieldError::MissingOrders(n));
                }
                left.validate(ctx)?;
                right.validate(ctx)
            }
            FieldNode::LinComb(t) => {
                if let Some((_, first)) = t.first() {
                    if t.iter().any(|(_, e)| e.is_odd() != first.is_odd()) {
                        return Err(FieldError::MixedParity);
                    }
                }
                for (c, e) in t {
                    check_order(c, ctx)?;
                    e.validate(ctx)?;
                }
                Ok(())
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self.node() {
            FieldNode::Gen { kind, .. } => json!({"op": "gen", "spec": kind.to_string()}),
            FieldNode::Id => json!({"op": "id"}),
            FieldNode::Scalar(p) => json!({"op": "scalar", "value": p.render('z')}),
            FieldNode::Deriv { arg, n } => json!({"op": "d", "n": n, "arg": arg.to_json()}),
            FieldNode::Dilate { arg, k } => json!({"op": "dilate", "k": k, "arg": arg.to_json()}),
            FieldNode::NormProd { left, right } => json!({"op": "normprod", "left": left.to_json(), "right": right.to_json()}),
            FieldNode::ProductJk { left, j, k, right, orders, .. } => {
                let mut v = json!({"op": "prodjk", "jk": [j, k], "left": left.to_json(), "right": right.to_json()});
                if let Some(o) = orders {
                    v["orders"] = json!(o);
                }
                v
            }
            FieldNode::LinComb(t) => json!({
                "op": "lincomb",
                "terms": t.iter().map(|(c, e)| json!({"coeff": c.render('z'), "arg": e.to_json()})).collect::<Vec<_>>(),
            }),
        }
    }

    /// Parses the JSON AST; a bare string names a registry field.
    pub fn from_json(v: &Value, registry: &Registry) -> Result<Self, FieldError> {
        let order = registry.ctx.order;
        let bad = |m: &str| FieldError::Parse(m.to_string());
        if let Some(name) = v.as_str() {
            return registry.get(name).cloned().ok_or_else(|| FieldError::UnknownField(name.to_string()));
        }
        let op = v.get("op").and_then(Value::as_str).ok_or_else(|| bad("missing op"))?;
        let sub = |key: &str| -> Result<FieldExpr, FieldError> {
            FieldExpr::from_json(v.get(key).ok_or_else(|| FieldError::Parse(format!("{op}: missing {key}")))?, registry)
        };
        let laurent = |s: &Value| -> Result<LaurentPoly, FieldError> {
            let text = match s {
                Value::String(t) => t.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(bad("coefficient must be a string")),
            };
            let var = if text.contains('w') { 'w' } else { 'z' };
            Ok(LaurentPoly::parse(order, &text, var)?)
        };
        match op {
            "gen" => {
                let spec = v.get("spec").and_then(Value::as_str).ok_or_else(|| bad("gen: missing spec"))?;
                Ok(FieldExpr::gen(spec.parse()?))
            }
            "id" => Ok(FieldExpr::id()),
            "ref" => {
                let name = v.get("name").and_then(Value::as_str).ok_or_else(|| bad("ref: missing name"))?;
                registry.get(name).cloned().ok_or_else(|| FieldError::UnknownField(name.to_string()))
            }
            "scalar" => Ok(FieldExpr::scalar(laurent(v.get("value").ok_or_else(|| bad("scalar: missing value"))?)?)),
            "d" => {
                let n = v.get("n").and_then(Value::as_u64).unwrap_or(1) as u32;
                Ok(sub("arg")?.deriv(n))
            }
            "dilate" => {
                let k = v.get("k").and_then(Value::as_i64).ok_or_else(|| bad("dilate: missing k"))?;
                Ok(sub("arg")?.dilate(k))
            }
            "normprod" => Ok(FieldExpr::normprod(&sub("left")?, &sub("right")?)),
            "prodjk" => {
                let jk = v.get("jk").and_then(Value::as_array).ok_or_else(|| bad("prodjk: missing jk"))?;
                let (Some(j), Some(k)) = (jk.first().and_then(Value::as_u64), jk.get(1).and_then(Value::as_i64)) else {
                    return Err(bad("prodjk: jk must be [j, k]"));
                };
                let orders = match v.get("orders") {
                    None => None,
                    Some(o) => Some(
                        o.as_array()
                            .ok_or_else(|| bad("orders must be a list"))?
                            .iter()
                            .map(|x| x.as_u64().map(|u| u as u32).ok_or_else(|| bad("orders must be integers")))
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                };
                Ok(FieldExpr::product_jk(&sub("left")?, j as usize, k, &sub("right")?, orders))
            }
            "lincomb" => {
                let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("lincomb: missing terms"))?;
                let mut out = Vec::new();
                for t in terms {
                    let c = laurent(t.get("coeff").ok_or_else(|| bad("lincomb term: missing coeff"))?)?;
                    let e = FieldExpr::from_json(t.get("arg").ok_or_else(|| bad("lincomb term: missing arg"))?, registry)?;
                    out.push((c, e));
                }
                Ok(FieldExpr::lincomb(out))
            }
            other => Err(FieldError::Parse(format!("unknown op {other:?}"))),
        }
    }
}

fn check_order(p: &LaurentPoly, ctx: &EvalCtx) -> Result<(), FieldError> {
    if p.order() != ctx.order {
        return Err(FieldError::ScalarOrder(p.order(), ctx.order));
    }
    Ok(())
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            FieldNode::Gen { kind, .. } => write!(f, "phi{kind}"),
            FieldNode::Id => write!(f, "Id"),
            FieldNode::Scalar(p) => write!(f, "({})", p.render('z')),
            FieldNode::Deriv { arg, n: 1 } => write!(f, "d({arg})"),
            FieldNode::Deriv { arg, n } => write!(f, "d^({n})({arg})"),
            FieldNode::Dilate { arg, k } => write!(f, "{arg}[e^{k} z]"),
            FieldNode::NormProd { left, right } => write!(f, ":{left} {right}:"),
            FieldNode::ProductJk { left, j, k, right, .. } => write!(f, "({left})_({j},{k})({right})"),
            FieldNode::LinComb(t) => {
                for (i, (c, e)) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "({})*{e}", c.render('z'))?;
                }
                Ok(())
            }
        }
    }
}

/// Scalar field and points of locality used during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalCtx {
    /// scalars live in Q(e_order)
    pub order: u32,
    /// points of locality are the `roots`-th roots of unity
    pub roots: u32,
}

impl EvalCtx {
    pub fn new(roots: u32, order: u32) -> Result<Self, FieldError> {
        if roots == 0 || !order.is_multiple_of(roots) {
            return Err(FieldError::Roots(roots, order));
        }
        Ok(EvalCtx { order, roots })
    }

    pub fn points(&self) -> PointSet {
        PointSet::roots_in(self.roots, self.order)
    }

    /// e^k for the primitive `roots`-th root e, inside Q(e_order).
    pub fn eps_pow(&self, k: i64) -> CycScalar {
        let step = (self.order / self.roots) as i64;
        root_power(self.order, k.rem_euclid(self.roots as i64) * step)
    }

    pub fn scalar(&self, q: Rational) -> CycScalar {
        CycScalar::from_rational(self.order, q)
    }

    pub fn constant(&self, q: Rational) -> LaurentPoly {
        LaurentPoly::constant(self.scalar(q))
    }
}

struct JkData {
    r: usize,
    /// for i = 0..=r: terms (alpha, beta, coeff) of (z - l_j w)^{n_j-1-i} prod_{t != j}(z - l_t w)^{n_t}
    multipliers: Vec<Vec<(i64, i64, CycScalar)>>,
    /// P_0..P_r as (exponent, coefficient) lists
    weights: Vec<Vec<(i64, CycScalar)>>,
}

/// Memoizing evaluator of field coefficients on Fock basis words.
pub struct Evaluator {
    ctx: EvalCtx,
    points: PointSet,
    memo: HashMap<(usize, i64, ModeWord), FockVector>,
    beta: HashMap<usize, i64>,
    jk: HashMap<usize, Option<Arc<JkData>>>,
    keep: Vec<FieldExpr>,
}

impl Evaluator {
    pub fn new(ctx: EvalCtx) -> Self {
        Evaluator { points: ctx.points(), ctx, memo: HashMap::new(), beta: HashMap::new(), jk: HashMap::new(), keep: Vec::new() }
    }

    pub fn ctx(&self) -> EvalCtx {
        self.ctx
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn vacuum(&self, kind: AlgebraKind) -> FockVector {
        FockVector::vacuum(kind, self.ctx.order)
    }

    pub fn basis(&self, kind: AlgebraKind, cutoff: &Rational) -> Vec<FockVector> {
        basis(kind, self.ctx.order, cutoff)
    }

    fn remember(&mut self, e: &FieldExpr) {
        if self.keep.len() > 4096 {
            self.keep.clear();
            self.memo.clear();
            self.beta.clear();
            self.jk.clear();
        }
        self.keep.push(e.clone());
    }

    /// In units of 1/2: the coefficient of z^m raises energy by at most 2m + beta2.
    pub fn beta2(&mut self, e: &FieldExpr) -> i64 {
        if let Some(b) = self.beta.get(&e.key()) {
            return *b;
        }
        let b = match e.node() {
            FieldNode::Gen { .. } => 1,
            FieldNode::Id => 0,
            FieldNode::Scalar(p) => p.min_exp().map_or(0, |m| -2 * m),
            FieldNode::Deriv { arg, n } => self.beta2(arg) + 2 * *n as i64,
            FieldNode::Dilate { arg, .. } => self.beta2(arg),
            FieldNode::NormProd { left, right } => self.beta2(left) + self.beta2(right),
            FieldNode::ProductJk { left, k, right, lowered, .. } => match lowered {
                Some(l) => self.beta2(l),
                None => self.beta2(left) + self.beta2(right) - 2 * k - 2,
            },
            FieldNode::LinComb(t) => {
                let mut best = i64::MIN;
                for (c, x) in t {
                    if let Some(lo) = c.min_exp() {
                        best = best.max(self.beta2(x) - 2 * lo);
                    }
                }
                if best == i64::MIN {
                    0
                } else {
                    best
                }
            }
        };
        self.remember(e);
        self.beta.insert(e.key(), b);
        b
    }

    /// Lowest exponent that can act nontrivially on a vector of the given energy.
    pub fn lower_bound(&mut self, e: &FieldExpr, energy2: i64) -> i64 {
        // smallest m with energy2 + 2m + beta >= 0
        let b = self.beta2(e);
        (-(energy2 + b)).div_euclid(2) + i64::from((-(energy2 + b)).rem_euclid(2) != 0)
    }

    /// Coefficient of z^m of `e`, applied to `v`.
    pub fn coeff(&mut self, e: &FieldExpr, m: i64, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero(v.kind(), v.order());
        for (w, c) in v.terms() {
            let x = self.coeff_word(e, m, v.kind(), w);
            if !x.is_zero() {
                out.add_assign_ref(&Coefficient::scale(&x, c));
            }
        }
        out
    }

    fn coeff_word(&mut self, e: &FieldExpr, m: i64, kind: AlgebraKind, w: &ModeWord) -> FockVector {
        let order = self.ctx.order;
        let e2 = w.energy2(kind);
        if e2 + 2 * m + self.beta2(e) < 0 {
            return FockVector::zero(kind, order);
        }
        let unit = || FockVector::basis_word(kind, order, w.clone());
        match e.node() {
            FieldNode::Gen { map, .. } => return apply_mode(map.mode(m), &unit()),
            FieldNode::Id => {
                return if m == 0 { unit() } else { FockVector::zero(kind, order) };
            }
            FieldNode::Scalar(p) => return Coefficient::scale(&unit(), &p.coeff(m)),
            _ => {}
        }
        let key = (e.key(), m, w.clone());
        if let Some(x) = self.memo.get(&key) {
            return x.clone();
        }
        let v = unit();
        let out = match e.node() {
            FieldNode::Gen { .. } | FieldNode::Id | FieldNode::Scalar(_) => unreachable!(),
            FieldNode::Deriv { arg, n } => {
                let b = binomial(m + *n as i64, *n as i64);
                self.coeff(arg, m + *n as i64, &v).scale_rational(&b)
            }
            FieldNode::Dilate { arg, k } => {
                let s = self.ctx.eps_pow(k * m);
                Coefficient::scale(&self.coeff(arg, m, &v), &s)
            }
            FieldNode::NormProd { left, right } => {
                let (left, right) = (left.clone(), right.clone());
                self.normprod_coeff(&left, &right, m, &v)
            }
            FieldNode::ProductJk { lowered: Some(l), .. } => {
                let l = l.clone();
                self.coeff(&l, m, &v)
            }
            FieldNode::ProductJk { left, j, k, right, orders, lowered: None } => {
                let data = self.jk_data(e, *j, *k, orders.as_deref().expect("validated"));
                let (left, right) = (left.clone(), right.clone());
                match data {
                    None => FockVector::zero(kind, order),
                    Some(d) => self.jk_coeff(&left, &right, &d, m, &v),
                }
            }
            FieldNode::LinComb(t) => {
                let mut acc = FockVector::zero(kind, order);
                for (c, x) in t.clone() {
                    for (s, cs) in c.terms() {
                        let y = self.coeff(&x, m - s, &v);
                        acc.add_assign_ref(&Coefficient::scale(&y, cs));
                    }
                }
                acc
            }
        };
        self.remember(e);
        self.memo.insert(key, out.clone());
        out
    }

    fn normprod_coeff(&mut self, a: &FieldExpr, b: &FieldExpr, m: i64, v: &FockVector) -> FockVector {
        let e2 = v.max_energy2().unwrap_or(0);
        let (ba, bb) = (self.beta2(a), self.beta2(b));
        let sign_neg = a.is_odd() && b.is_odd();
        let mut acc = FockVector::zero(v.kind(), v.order());
        // sum_{p >= 0} a_p b_{m-p} v
        let top = (e2 + 2 * m + bb).div_euclid(2);
        for p in 0..=top {
            let x = self.coeff(b, m - p, v);
            if !x.is_zero() {
                acc.add_assign_ref(&self.coeff(a, p, &x));
            }
        }
        // +- sum_{p < 0} b_{m-p} a_p v
        let bottom = -(e2 + ba).div_euclid(2);
        for p in bottom.min(0)..0 {
            let x = self.coeff(a, p, v);
            if x.is_zero() {
                continue;
            }
            let y = self.coeff(b, m - p, &x);
            if sign_neg {
                acc.add_assign_ref(&y.negate());
            } else {
                acc.add_assign_ref(&y);
            }
        }
        acc
    }

    fn jk_data(&mut self, e: &FieldExpr, j: usize, k: i64, orders: &[u32]) -> Option<Arc<JkData>> {
        if let Some(d) = self.jk.get(&e.key()) {
            return d.clone();
        }
        let nj = orders[j - 1] as i64;
        let data = if k >= nj {
            None
        } else {
            let r = (nj - 1 - k) as usize;
            let lam = &self.points.points()[j - 1];
            let q = {
                let mut o = orders.to_vec();
                o[j - 1] = 0;
                locality_polynomial(&self.points, &o)
            };
            let multipliers = (0..=r)
                .map(|i| {
                    let m = poly2_mul(&linear_power(lam, (nj - 1) as u32 - i as u32), &q);
                    m.coeffs.into_iter().map(|((a, b), c)| (a, b, c)).collect()
                })
                .collect();
            let p = inverse_series_coeffs(&self.points, orders, j).expect("distinct points");
            let weights = p.iter().map(|l| l.terms().iter().map(|(e, c)| (*e, c.clone())).collect()).collect();
            Some(Arc::new(JkData { r, multipliers, weights }))
        };
        self.remember(e);
        self.jk.insert(e.key(), data.clone());
        data
    }

    fn jk_coeff(&mut self, a: &FieldExpr, b: &FieldExpr, d: &JkData, m: i64, v: &FockVector) -> FockVector {
        let mut acc = FockVector::zero(v.kind(), v.order());
        for i in 0..=d.r {
            for (e, pc) in &d.weights[d.r - i] {
                let qq = m - e;
                for (alpha, beta, mc) in &d.multipliers[i] {
                    let x = self.commutator_cell(a, b, -1 - alpha, qq - beta, v);
                    if !x.is_zero() {
                        acc.add_assign_ref(&Coefficient::scale(&x, &(pc * mc)));
                    }
                }
            }
        }
        acc
    }

    /// a_p b_q v
    pub fn product_cell(&mut self, a: &FieldExpr, b: &FieldExpr, p: i64, q: i64, v: &FockVector) -> FockVector {
        let x = self.coeff(b, q, v);
        self.coeff(a, p, &x)
    }

    /// (a_p b_q -+ b_q a_p) v
    pub fn commutator_cell(&mut self, a: &FieldExpr, b: &FieldExpr, p: i64, q: i64, v: &FockVector) -> FockVector {
        let mut x = self.product_cell(a, b, p, q, v);
        let y = {
            let t = self.coeff(a, p, v);
            self.coeff(b, q, &t)
        };
        if a.is_odd() && b.is_odd() {
            x.add_assign_ref(&y);
        } else {
            x.add_assign_ref(&y.negate());
        }
        x
    }

    /// Coefficient (p, q) of :a(z) b(w): v.
    pub fn normprod_cell(&mut self, a: &FieldExpr, b: &FieldExpr, p: i64, q: i64, v: &FockVector) -> FockVector {
        if p >= 0 {
            return self.product_cell(a, b, p, q, v);
        }
        let t = self.coeff(a, p, v);
        let y = self.coeff(b, q, &t);
        if a.is_odd() && b.is_odd() {
            y.negate()
        } else {
            y
        }
    }
}

fn finite(w: &Window) -> Result<(i64, i64), FieldError> {
    match (w.lo, w.hi) {
        (Some(l), Some(h)) => Ok((l, h)),
        _ => Err(SeriesError::InfiniteWindow.into()),
    }
}

/// Exact coefficients of e(z) v on the window.
pub fn eval_field(ev: &mut Evaluator, e: &FieldExpr, v: &FockVector, out: &Window) -> Result<WindowSeries<FockVector>, FieldError> {
    e.validate(&ev.ctx)?;
    check_space(e, v)?;
    let (lo, hi) = finite(out)?;
    let mut s = WindowSeries::new(*out);
    for m in lo..=hi {
        let x = ev.coeff(e, m, v);
        if !x.is_zero() {
            s.insert(m, x);
        }
    }
    Ok(s)
}

fn check_space(e: &FieldExpr, v: &FockVector) -> Result<(), FieldError> {
    match e.space()? {
        Some(k) if k != v.kind() => Err(FieldError::MixedSpaces),
        _ => Ok(()),
    }
}

fn two_var(
    ev: &mut Evaluator,
    a: &FieldExpr,
    b: &FieldExpr,
    v: &FockVector,
    zout: &Window,
    wout: &Window,
    mut cell: impl FnMut(&mut Evaluator, i64, i64) -> FockVector,
) -> Result<BiDist<FockVector>, FieldError> {
    a.validate(&ev.ctx)?;
    b.validate(&ev.ctx)?;
    check_space(a, v)?;
    check_space(b, v)?;
    let (zl, zh) = finite(zout)?;
    let (wl, wh) = finite(wout)?;
    let mut d = BiDist::new(*zout, *wout);
    for p in zl..=zh {
        for q in wl..=wh {
            let x = cell(ev, p, q);
            if !x.is_zero() {
                d.insert(p, q, x);
            }
        }
    }
    Ok(d)
}

/// a(z) b(w) v on a rectangle.
pub fn product_2var(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, v: &FockVector, zout: &Window, wout: &Window) -> Result<BiDist<FockVector>, FieldError> {
    two_var(ev, a, b, v, zout, wout, |ev, p, q| ev.product_cell(a, b, p, q, v))
}

/// :a(z) b(w): v on a rectangle.
pub fn normprod_2var(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, v: &FockVector, zout: &Window, wout: &Window) -> Result<BiDist<FockVector>, FieldError> {
    two_var(ev, a, b, v, zout, wout, |ev, p, q| ev.normprod_cell(a, b, p, q, v))
}

/// a(z) b(w) v - :a(z) b(w): v.
pub fn contraction(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, v: &FockVector, zout: &Window, wout: &Window) -> Result<BiDist<FockVector>, FieldError> {
    two_var(ev, a, b, v, zout, wout, |ev, p, q| {
        if p >= 0 {
            FockVector::zero(v.kind(), v.order())
        } else {
            ev.commutator_cell(a, b, p, q, v)
        }
    })
}

/// a(z) b(w) v -+ b(w) a(z) v.
pub fn graded_commutator(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, v: &FockVector, zout: &Window, wout: &Window) -> Result<BiDist<FockVector>, FieldError> {
    two_var(ev, a, b, v, zout, wout, |ev, p, q| ev.commutator_cell(a, b, p, q, v))
}

/// Outcome of a locality test over sampled basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub local: bool,
    pub samples: usize,
    /// (basis vector, z-exponent, w-exponent) of the first failure
    pub witness: Option<(FockVector, i64, i64)>,
}

fn sum_orders(orders: &[u32]) -> i64 {
    orders.iter().map(|o| *o as i64).sum::<i64>().max(1)
}

/// Certified N-point locality of (a, b) on every basis vector up to `cutoff`.
pub fn locality_check(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, orders: &[u32], cutoff: &Rational) -> Result<LocalityReport, FieldError> {
    let kind = a.space()?.or(b.space()?).unwrap_or(AlgebraKind::D);
    let s = sum_orders(orders);
    let points = ev.points.clone();
    let basis = ev.basis(kind, cutoff);
    for v in &basis {
        let e2 = v.max_energy2().unwrap_or(0);
        let wlo = ev.lower_bound(b, e2) - 1;
        let zw = Window::new(-2 * s - 3, 3);
        let ww = Window::new(wlo, wlo + 2 * s + 6);
        let c = graded_commutator(ev, a, b, v, &zw, &ww)?;
        let cert = is_local(&c, &points, orders)?;
        if let Some((z, w)) = cert.witness {
            return Ok(LocalityReport { local: false, samples: basis.len(), witness: Some((v.clone(), z, w)) });
        }
    }
    Ok(LocalityReport { local: true, samples: basis.len(), witness: None })
}

/// Named fields used for lookup and symbolic identification.
#[derive(Debug, Clone)]
pub struct Registry {
    pub ctx: EvalCtx,
    entries: Vec<(String, FieldExpr)>,
}

impl Registry {
    pub fn empty(ctx: EvalCtx) -> Self {
        Registry { ctx, entries: Vec::new() }
    }

    /// phiB, phiC, phiD, hB, hC, hD, hD_N (the latter at the context's roots).
    pub fn standard(ctx: EvalCtx) -> Self {
        let mut r = Registry::empty(ctx);
        let (pb, pc, pd) = (FieldExpr::gen(AlgebraKind::B), FieldExpr::gen(AlgebraKind::C), FieldExpr::gen(AlgebraKind::D));
        r.push("Id", FieldExpr::id());
        r.push("phiB", pb.clone());
        r.push("phiC", pc.clone());
        r.push("phiD", pd.clone());
        if ctx.roots.is_multiple_of(2) {
            let half = ctx.roots as i64 / 2;
            let c = |q: Rational| ctx.constant(q);
            r.push(
                "hB",
                FieldExpr::lincomb(vec![(c(rat(1, 4)), FieldExpr::normprod(&pb, &pb.dilate(half))), (c(rat(-1, 4)), FieldExpr::id())]),
            );
            r.push(
                "hC",
                FieldExpr::lincomb(vec![(c(rat(1, 2)), FieldExpr::normprod(&pc, &pc.dilate(half))), (c(rat(-1, 2)), FieldExpr::id())]),
            );
            r.push("hD", FieldExpr::lincomb(vec![(c(rat(1, 2)), FieldExpr::normprod(&pd, &pd.dilate(half)))]));
        }
        if let Ok(h) = heisenberg_dn(&ctx) {
            r.push("hD_N", h);
        }
        r
    }

    pub fn push(&mut self, name: &str, e: FieldExpr) {
        self.entries.retain(|(n, _)| n != name);
        self.entries.push((name.to_string(), e));
    }

    pub fn get(&self, name: &str) -> Option<&FieldExpr> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn entries(&self) -> &[(String, FieldExpr)] {
        &self.entries
    }

    pub fn name_of(&self, e: &FieldExpr) -> Option<&str> {
        self.entries.iter().find(|(_, x)| x == e).map(|(n, _)| n.as_str())
    }
}

/// (1/N) sum_i e^{i-1} :phiD(e^{i-1} z) phiD(e^i z):, exactly as written.
pub fn heisenberg_dn_literal(ctx: &EvalCtx) -> FieldExpr {
    let pd = FieldExpr::gen(AlgebraKind::D);
    let n = ctx.roots as i64;
    let terms = (0..n)
        .map(|i| {
            let c = ctx.eps_pow(i - 1).scale(&rat(1, n));
            (LaurentPoly::constant(c), FieldExpr::normprod(&pd.dilate(i - 1), &pd.dilate(i)))
        })
        .collect();
    FieldExpr::lincomb(terms)
}

/// The constant k with [h_1, h_{-1}] = k for the literal order-N sum
/// (modes h_n at z^{-Nn-1}).
pub fn dn_literal_kappa(ctx: &EvalCtx) -> CycScalar {
    let h = heisenberg_dn_literal(ctx);
    let mut ev = Evaluator::new(*ctx);
    let vac = ev.vacuum(AlgebraKind::D);
    let n = ctx.roots as i64;
    let (up, down) = (-n - 1, n - 1);
    let a = {
        let t = ev.coeff(&h, down, &vac);
        ev.coeff(&h, up, &t)
    };
    let b = {
        let t = ev.coeff(&h, up, &vac);
        ev.coeff(&h, down, &t)
    };
    a.try_add(&b.negate()).expect("same space").coeff(&ModeWord::vacuum())
}

/// The order-N sum rescaled so that [h_m, h_n] = m delta_{m+n,0}.
pub fn heisenberg_dn(ctx: &EvalCtx) -> Result<FieldExpr, FieldError> {
    let k = dn_literal_kappa(ctx);
    let c = k
        .inv()
        .ok()
        .and_then(|x| sqrt_search(&x))
        .ok_or_else(|| FieldError::Unsatisfiable(format!("no square root of 1/({k}) in Q(e_{})", ctx.order)))?;
    Ok(FieldExpr::lincomb(vec![(LaurentPoly::constant(c), heisenberg_dn_literal(ctx))]))
}

/// Symbolic form w^shift * sum coeff_f f(w).
#[derive(Debug, Clone, PartialEq)]
pub struct Identified {
    pub shift: i64,
    pub terms: Vec<(CycScalar, String)>,
}

impl Identified {
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, name)| {
                let mono = LaurentPoly::monomial(c.clone(), self.shift).render('w');
                if name == "Id" && self.shift == 0 {
                    mono
                } else {
                    format!("{mono} * {name}")
                }
            })
            .collect();
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }

    /// The identified coefficient as a field expression.
    pub fn to_expr(&self, registry: &Registry) -> Option<FieldExpr> {
        let terms = self
            .terms
            .iter()
            .map(|(c, n)| registry.get(n).map(|e| (LaurentPoly::monomial(c.clone(), self.shift), e.clone())))
            .collect::<Option<Vec<_>>>()?;
        Some(FieldExpr::lincomb(terms))
    }
}

/// One OPE coefficient c_{jk}(w).
#[derive(Debug, Clone, PartialEq)]
pub struct OpeEntry {
    pub j: usize,
    pub k: i64,
    pub lambda: CycScalar,
    /// (basis word, w-exponent) -> c_{jk,q} v
    pub samples: BTreeMap<(ModeWord, i64), FockVector>,
    pub identified: Option<Identified>,
}

#[derive(Debug, Clone)]
pub struct OpeTable {
    pub points: PointSet,
    pub orders: Vec<u32>,
    pub entries: BTreeMap<(usize, i64), OpeEntry>,
}

impl OpeTable {
    pub fn get(&self, j: usize, k: i64) -> Option<&OpeEntry> {
        self.entries.get(&(j, k))
    }

    pub fn render(&self, j: usize, k: i64) -> Option<String> {
        self.get(j, k).and_then(|e| e.identified.as_ref()).map(Identified::render)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .values()
            .map(|e| {
                json!({
                    "j": e.j,
                    "lambda": e.lambda.to_string(),
                    "k": e.k,
                    "coeff": e.identified.as_ref().map(Identified::render),
                    "shift": e.identified.as_ref().map(|i| i.shift),
                    "samples": e.samples.len(),
                })
            })
            .collect();
        json!({
            "points": self.points.points().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "orders": self.orders,
            "entries": entries,
        })
    }
}

/// Sampling parameters for OPE extraction.
#[derive(Debug, Clone)]
pub struct OpeConfig {
    pub cutoff: Rational,
    /// number of consecutive w-exponents sampled per basis vector
    pub span: i64,
    pub max_shift: i64,
}

impl Default for OpeConfig {
    fn default() -> Self {
        OpeConfig { cutoff: rat(3, 2), span: 5, max_shift: 4 }
    }
}

/// OPE coefficients of (a, b) at the context's points, via decomposition of
/// the graded commutator on each basis vector.
pub fn ope_extract(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, orders: &[u32], cfg: &OpeConfig, registry: &Registry) -> Result<OpeTable, FieldError> {
    a.validate(&ev.ctx)?;
    b.validate(&ev.ctx)?;
    let kind = a.space()?.or(b.space()?).unwrap_or(AlgebraKind::D);
    let points = ev.points.clone();
    let s = sum_orders(orders);
    let (ba, bb) = (ev.beta2(a), ev.beta2(b));
    let mut entries: BTreeMap<(usize, i64), OpeEntry> = BTreeMap::new();
    let basis = ev.basis(kind, &cfg.cutoff);
    for v in &basis {
        let word = v.terms().keys().next().expect("unit vector").clone();
        let e2 = v.max_energy2().unwrap_or(0);
        // c_{jk} raises energy by at most 2q + ba + bb - 2k - 2 <= 2q + ba + bb - 2
        let qlo = (-(e2 + ba + bb - 2)).div_euclid(2);
        let qhi = qlo + cfg.span + s;
        let zw = Window::new(-2 * s - 2, 1);
        let ww = Window::new(qlo - 3 * s - 4, qhi + 3 * s + 4);
        let c = graded_commutator(ev, a, b, v, &zw, &ww)?;
        let ds = match decompose(&c, &points, orders) {
            Ok(ds) => ds,
            Err(DeltaError::NotLocal(z, w)) => return Err(FieldError::NotLocal(z, w)),
            Err(e) => return Err(e.into()),
        };
        let want = Window::new(qlo, qhi);
        for ((j, l), series) in &ds.terms {
            if !series.window.contains_window(&want) {
                return Err(FieldError::Unsatisfiable(format!("coefficient window {} misses {want}", series.window)));
            }
            let entry = entries.entry((*j, *l as i64)).or_insert_with(|| OpeEntry {
                j: *j,
                k: *l as i64,
                lambda: points.points()[*j - 1].clone(),
                samples: BTreeMap::new(),
                identified: None,
            });
            for (q, x) in &series.coeffs {
                if want.contains(*q) {
                    entry.samples.insert((word.clone(), *q), x.clone());
                }
            }
        }
    }
    entries.retain(|_, e| !e.samples.is_empty());
    let candidates: Vec<(String, FieldExpr)> =
        registry.entries().iter().filter(|(_, e)| !matches!(e.node(), FieldNode::Scalar(_))).filter(|(_, e)| e.space().ok().flatten().is_none_or(|k| k == kind)).cloned().collect();
    for e in entries.values_mut() {
        e.identified = identify(ev, &e.samples, kind, &candidates, cfg.max_shift);
    }
    Ok(OpeTable { points, orders: orders.to_vec(), entries })
}

/// Exact solve of rows * x = rhs over Q(e); `None` when inconsistent.
pub fn solve_linear(mut rows: Vec<Vec<CycScalar>>, mut rhs: Vec<CycScalar>, ncols: usize, order: u32) -> Option<Vec<CycScalar>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|i| !rows[*i][c].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = rows[r][c].inv().ok()?;
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for cc in 0..ncols {
                    let t = &f * &rows[r][cc];
                    rows[i][cc] -= &t;
                }
                let t = &f * &rhs[r];
                rhs[i] -= &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rhs[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![CycScalar::zero(order); ncols];
    for (i, c) in pivots.iter().enumerate() {
        x[*c] = rhs[i].clone();
    }
    Some(x)
}

fn identify(
    ev: &mut Evaluator,
    samples: &BTreeMap<(ModeWord, i64), FockVector>,
    kind: AlgebraKind,
    candidates: &[(String, FieldExpr)],
    max_shift: i64,
) -> Option<Identified> {
    let order = ev.ctx.order;
    let mut shifts = vec![0];
    for s in 1..=max_shift {
        shifts.push(s);
        shifts.push(-s);
    }
    for s in shifts {
        // coordinates: (sample key, output word)
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut cols: Vec<BTreeMap<(usize, ModeWord), CycScalar>> = Vec::new();
        let keys: Vec<_> = samples.keys().cloned().collect();
        for (_, f) in candidates {
            let mut col = BTreeMap::new();
            for (i, (w, q)) in keys.iter().enumerate() {
                let v = FockVector::basis_word(kind, order, w.clone());
                let y = ev.coeff(f, q - s, &v);
                for (u, c) in y.terms() {
                    col.insert((i, u.clone()), c.clone());
                }
            }
            cols.push(col);
        }
        let mut coords: std::collections::BTreeSet<(usize, ModeWord)> = std::collections::BTreeSet::new();
        for (i, k) in keys.iter().enumerate() {
            for u in samples[k].terms().keys() {
                coords.insert((i, u.clone()));
            }
        }
        for c in &cols {
            coords.extend(c.keys().cloned());
        }
        for coord in &coords {
            rows.push(cols.iter().map(|c| c.get(coord).cloned().unwrap_or_else(|| CycScalar::zero(order))).collect());
            rhs.push(samples[&keys[coord.0]].coeff(&coord.1));
        }
        if let Some(x) = solve_linear(rows, rhs, candidates.len(), order) {
            let terms: Vec<(CycScalar, String)> =
                x.into_iter().zip(candidates).filter(|(c, _)| !c.is_zero()).map(|(c, (n, _))| (c, n.clone())).collect();
            if !terms.is_empty() {
                return Some(Identified { shift: s, terms });
            }
        }
    }
    None
}

/// Coefficient (m, k) of z^m z0^k of i_{z,z0} :a(l z + z0) b(z): v, computed
/// from the modes of a and b directly.
pub fn taylor_lhs(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, lambda_pow: i64, m: i64, k: u32, v: &FockVector) -> FockVector {
    let lam = ev.ctx.eps_pow(lambda_pow);
    let e2 = v.max_energy2().unwrap_or(0);
    let (ba, bb) = (ev.beta2(a), ev.beta2(b));
    let k = k as i64;
    let sign_neg = a.is_odd() && b.is_odd();
    let mut acc = FockVector::zero(v.kind(), v.order());
    // a_p (l z + z0)^p -> binom(p, k) l^{p-k} z^{p-k} z0^k, so b carries z^{m-p+k}
    let top = (e2 + 2 * (m + k) + bb).div_euclid(2);
    let bottom = (-(e2 + ba)).div_euclid(2);
    for p in bottom.min(0)..=top.max(-1) {
        let bin = binomial(p, k);
        if bin.is_zero() {
            continue;
        }
        let c = lam.pow(p - k).expect("root of unity").scale(&bin);
        let x = if p >= 0 {
            ev.product_cell(a, b, p, m - p + k, v)
        } else {
            let t = ev.coeff(a, p, v);
            let y = ev.coeff(b, m - p + k, &t);
            if sign_neg {
                y.negate()
            } else {
                y
            }
        };
        acc.add_assign_ref(&Coefficient::scale(&x, &c));
    }
    acc
}

/// Checks the Taylor formula for normal ordered products on sampled vectors.
pub fn taylor_normprod_check(ev: &mut Evaluator, a: &FieldExpr, b: &FieldExpr, lambda_pow: i64, max_k: u32, window: &Window, cutoff: &Rational) -> Result<Option<(FockVector, i64, u32)>, FieldError> {
    let kind = a.space()?.or(b.space()?).unwrap_or(AlgebraKind::D);
    let (lo, hi) = finite(window)?;
    for v in ev.basis(kind, cutoff) {
        for k in 0..=max_k {
            let rhs = FieldExpr::normprod(&a.deriv(k).dilate(lambda_pow), b);
            for m in lo..=hi {
                let l = taylor_lhs(ev, a, b, lambda_pow, m, k, &v);
                let r = ev.coeff(&rhs, m, &v);
                if l != r {
                    return Ok(Some((v, m, k)));
                }
            }
        }
    }
    Ok(None)
}

/// The comparison product a(x)_{ov(alpha,k)} b(x), by the clearing recipe:
/// coefficient of x0^{-k-1} x^m in i_{x,x0} f(alpha x + x0, x)^{-1}
/// (f a(x1) b(x))|_{x1 = alpha x + x0}, applied to v.
pub struct LiProduct<'a> {
    pub a: &'a FieldExpr,
    pub b: &'a FieldExpr,
    /// index of alpha among the points (1-based)
    pub alpha: usize,
    pub k: i64,
    /// clearing polynomial prod (x1 - l_i x2)^{orders_i}
    pub orders: &'a [u32],
}

impl LiProduct<'_> {
    pub fn coeff(&self, ev: &mut Evaluator, m: i64, v: &FockVector) -> FockVector {
        let points = ev.points.clone();
        let order = ev.ctx.order;
        let alpha = points.points()[self.alpha - 1].clone();
        let n_alpha = self.orders[self.alpha - 1] as i64;
        let mut acc = FockVector::zero(v.kind(), v.order());
        let umax = n_alpha - self.k - 1;
        if umax < 0 {
            return acc;
        }
        // h_u: coefficients of y^u in prod_{l_i != alpha} ((alpha - l_i) + y)^{-n_i}
        let mut poly = vec![CycScalar::one(order)];
        for (i, (lam, n)) in points.points().iter().zip(self.orders).enumerate() {
            if i + 1 == self.alpha {
                continue;
            }
            let d = &alpha - lam;
            for _ in 0..*n {
                let mut next = vec![CycScalar::zero(order); poly.len() + 1];
                for (t, c) in poly.iter().enumerate() {
                    next[t] += &(c * &d);
                    next[t + 1] += c;
                }
                poly = next;
            }
        }
        let h = series_inverse(&poly, umax as usize + 1, order);
        let f = locality_polynomial(&points, self.orders);
        let deg: i64 = self.orders.iter().map(|n| *n as i64).sum();
        let e2 = v.max_energy2().unwrap_or(0);
        let p0 = ev.lower_bound(self.a, e2);
        let q0 = ev.lower_bound(self.b, e2);
        for u in 0..=umax {
            let t = umax - u;
            let s = m + t + deg - n_alpha + u;
            // G(p, s - p) with p in [p0, s - q0]
            for p in p0..=(s - q0) {
                let bin = binomial(p, t);
                if bin.is_zero() {
                    continue;
                }
                let q = s - p;
                let mut g = FockVector::zero(v.kind(), v.order());
                for ((fa, fb), fc) in &f.coeffs {
                    let x = ev.product_cell(self.a, self.b, p - fa, q - fb, v);
                    if !x.is_zero() {
                        g.add_assign_ref(&Coefficient::scale(&x, fc));
                    }
                }
                if g.is_zero() {
                    continue;
                }
                let c = &alpha.pow(p - t).expect("nonzero").scale(&bin) * &h[u as usize];
                acc.add_assign_ref(&Coefficient::scale(&g, &c));
            }
        }
        acc
    }
}

fn series_inverse(p: &[CycScalar], count: usize, order: u32) -> Vec<CycScalar> {
    let inv0 = p[0].inv().expect("nonzero constant term");
    let mut out: Vec<CycScalar> = Vec::with_capacity(count);
    for n in 0..count {
        let mut s = if n == 0 { CycScalar::one(order) } else { CycScalar::zero(order) };
        for i in 1..=n {
            if let Some(pi) = p.get(i) {
                s -= &(pi * &out[n - i]);
            }
        }
        out.push(&s * &inv0);
    }
    out
}

/// Mode h_n of a Heisenberg field sits at z^{-step n - 1 + shift}; this helper
/// evaluates the mode's action.
pub fn mode_action(ev: &mut Evaluator, e: &FieldExpr, exponent: i64, v: &FockVector) -> FockVector {
    ev.coeff(e, exponent, v)
}

/// A scalar Laurent polynomial divided into its field, for convenience.
pub fn scalar_field(ctx: &EvalCtx, terms: &[(i64, Rational)]) -> FieldExpr {
    FieldExpr::scalar(LaurentPoly::from_terms(ctx.order, terms.iter().map(|(e, q)| (*e, ctx.scalar(q.clone())))))
}

/// rat_int re-export for callers building coefficients.
pub fn int(ctx: &EvalCtx, n: i64) -> LaurentPoly {
    ctx.constant(rat_int(n))
}
