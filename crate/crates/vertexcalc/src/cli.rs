//! Command-line frontend.

use std::io::{Read, Write};
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::deltacalc::{bell_polynomial, decompose, partial_fractions, DeltaError, PointSet, RatFrac};
use crate::fields::{eval_field, ope_extract, EvalCtx, Evaluator, FieldError, FieldExpr, OpeConfig, Registry};
use crate::fock::FockVector;
use crate::scalar::{parse_rational, CycScalar, Rational};
use crate::series::{BiDist, Coefficient, SeriesError, Window};
use crate::verify::{self, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NOT_LOCAL: i32 = 2;
pub const EXIT_WINDOW: i32 = 3;
pub const EXIT_CHECKS_FAILED: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "vertexcalc", version, about = "Exact calculus of N-point local formal distributions")]
pub struct Cli {
    /// number of points of locality (N-th roots of unity)
    #[arg(long, global = true)]
    pub roots: Option<u32>,
    /// zlo:zhi[,wlo:whi]
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_windows)]
    pub window: Option<(Window, Option<Window>)>,
    /// basis energy cutoff, p/q
    #[arg(long, global = true, value_parser = parse_cutoff)]
    pub cutoff: Option<Rational>,
    #[arg(long = "mode-range", global = true)]
    pub mode_range: Option<i64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a local distribution (BiDist JSON) into delta derivatives
    Decompose {
        /// inline JSON, file path, or - for stdin
        input: String,
        /// comma-separated orders, one per point
        #[arg(long, value_parser = parse_orders)]
        orders: Orders,
    },
    /// OPE coefficients of two fields (registry names or JSON ASTs)
    Ope {
        a: String,
        b: String,
        #[arg(long, value_parser = parse_orders)]
        orders: Option<Orders>,
    },
    /// Partial fractions of "num/(factors)" or a RatFrac JSON
    Pfd { input: String },
    /// Partial Bell polynomial B(n, k)
    Bell { n: usize, k: usize },
    /// Run a verification suite
    Verify { suite: String },
    /// Coefficients of a field applied to a vector (vacuum by default)
    Eval {
        field: String,
        /// FockVector JSON, file path, or - for stdin
        #[arg(long)]
        vector: Option<String>,
    },
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: i64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi: i64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if lo > hi {
        return Err(format!("window {lo}:{hi} out of order"));
    }
    Ok(Window::new(lo, hi))
}

fn parse_windows(s: &str) -> Result<(Window, Option<Window>), String> {
    match s.split_once(',') {
        Some((z, w)) => Ok((parse_window(z)?, Some(parse_window(w)?))),
        None => Ok((parse_window(s)?, None)),
    }
}

fn parse_cutoff(s: &str) -> Result<Rational, String> {
    let q = parse_rational(s).map_err(|e| e.to_string())?;
    if q < Rational::from_integer(0.into()) {
        return Err("cutoff must be nonnegative".into());
    }
    Ok(q)
}

/// Comma-separated locality orders, one per point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orders(pub Vec<u32>);

fn parse_orders(s: &str) -> Result<Orders, String> {
    s.split(',').map(|t| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>().map(Orders)
}

/// Failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(m: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: m.into() }
    }
}

impl From<DeltaError> for CliError {
    fn from(e: DeltaError) -> Self {
        let code = match e {
            DeltaError::NotLocal(..) => EXIT_NOT_LOCAL,
            DeltaError::WindowTooSmall { .. } => EXIT_WINDOW,
            _ => EXIT_PARSE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        let code = match &e {
            FieldError::NotLocal(..) => EXIT_NOT_LOCAL,
            FieldError::Unsatisfiable(_) => EXIT_WINDOW,
            FieldError::Delta(d) => return d.clone().into(),
            _ => EXIT_PARSE,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        CliError::parse(e.to_string())
    }
}

/// Result of a successful command: the JSON value, its text rendering and the exit code.
struct Output {
    json: Value,
    text: String,
    code: i32,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, code: EXIT_OK }
    }
}

fn read_input(s: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if s == "-" {
        let mut buf = String::new();
        stdin.read_to_string(&mut buf).map_err(|e| CliError::parse(e.to_string()))?;
        return Ok(buf);
    }
    let t = s.trim_start();
    if !t.starts_with('{') && !t.starts_with('[') && Path::new(s).is_file() {
        return std::fs::read_to_string(s).map_err(|e| CliError::parse(format!("{s}: {e}")));
    }
    Ok(s.to_string())
}

fn read_json(s: &str, stdin: &mut dyn Read) -> Result<Value, CliError> {
    let text = read_input(s, stdin)?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("invalid JSON: {e}")))
}

fn field_arg(s: &str, registry: &Registry, stdin: &mut dyn Read) -> Result<FieldExpr, CliError> {
    if let Some(e) = registry.get(s.trim()) {
        return Ok(e.clone());
    }
    let v = read_json(s, stdin).map_err(|_| CliError::parse(format!("unknown field {s:?}")))?;
    Ok(FieldExpr::from_json(&v, registry)?)
}

fn context(roots: u32) -> Result<EvalCtx, CliError> {
    if roots == 0 {
        return Err(CliError::parse("--roots must be positive"));
    }
    Ok(EvalCtx::new(roots, roots)?)
}

fn cmd_decompose(cli: &Cli, input: &str, orders: &[u32], stdin: &mut dyn Read) -> Result<Output, CliError> {
    let v = read_json(input, stdin)?;
    let (order, mut d) = BiDist::<CycScalar>::from_json(&v)?;
    if let Some((zw, ww)) = &cli.window {
        let ww = (*ww).unwrap_or(d.wwindow);
        d = d.restrict(zw, &ww).ok_or_else(|| CliError { code: EXIT_WINDOW, message: format!("window {zw} x {ww} exceeds the input's") })?;
    }
    let n = cli.roots.unwrap_or(order);
    if n == 0 || order % n != 0 {
        return Err(CliError::parse(format!("{n} roots do not live in Q(e_{order})")));
    }
    let points = PointSet::roots_in(n, order);
    let ds = decompose(&d, &points, orders)?;
    let mut text = Vec::new();
    for ((k, l), c) in &ds.terms {
        let poly = crate::series::LaurentPoly::from_terms(order, c.coeffs.clone());
        text.push(format!("k={k} l={l}: {}", poly.render('w')));
    }
    if text.is_empty() {
        text.push("0".into());
    }
    Ok(Output::ok(ds.to_json(), text.join("\n")))
}

fn cmd_ope(cli: &Cli, a: &str, b: &str, orders: Option<&[u32]>, stdin: &mut dyn Read) -> Result<Output, CliError> {
    let ctx = context(cli.roots.unwrap_or(2))?;
    let registry = Registry::standard(ctx);
    let fa = field_arg(a, &registry, stdin)?;
    let fb = field_arg(b, &registry, stdin)?;
    let mut ev = Evaluator::new(ctx);
    let cfg = OpeConfig { cutoff: cli.cutoff.clone().unwrap_or_else(|| OpeConfig::default().cutoff), ..OpeConfig::default() };
    let orders = match orders {
        Some(o) => o.to_vec(),
        None => {
            let bound = std::env::var("VERTEXCALC_MAX_M").ok().and_then(|s| s.parse().ok()).unwrap_or(6);
            match verify::locality_order(&mut ev, &fa, &fb, &cfg.cutoff, bound)? {
                Some(m) => vec![m; ctx.roots as usize],
                None => return Err(CliError { code: EXIT_NOT_LOCAL, message: format!("not local with (z^N - w^N)^M for M <= {bound}") }),
            }
        }
    };
    let table = ope_extract(&mut ev, &fa, &fb, &orders, &cfg, &registry)?;
    let mut lines = vec![format!("orders {orders:?}")];
    for ((j, k), e) in &table.entries {
        let c = e.identified.as_ref().map(|i| i.render()).unwrap_or_else(|| format!("unidentified ({} samples)", e.samples.len()));
        lines.push(format!("({j},{k}) lambda={}: {c}", e.lambda));
    }
    if table.entries.is_empty() {
        lines.push("no singular part".into());
    }
    Ok(Output::ok(table.to_json(), lines.join("\n")))
}

/// Parses "num/(f1)(f2)^k..." with num a polynomial in z, w and factors
/// z, w or (z - c w) for a point c.
pub fn parse_ratfrac(s: &str, n: u32) -> Result<RatFrac, CliError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match split_top(&s, '/') {
        Some((a, b)) => (a, b),
        None => (s.as_str(), "1"),
    };
    let points = PointSet::roots_of_unity(n);
    let num = strip_parens(num);
    let mut numd = BiDist::new(Window::all(), Window::all());
    for ((z, w), c) in parse_poly2(num, n)? {
        numd.insert(z, w, c);
    }
    let den = strip_outer(den);
    let mut z_pole = 0u32;
    let mut w_pole = 0u32;
    let mut point_poles = vec![0u32; n as usize];
    let mut rest = den;
    while !rest.is_empty() && rest != "1" {
        let (factor, after) = if let Some(r) = rest.strip_prefix('(') {
            let close = matching(r).ok_or_else(|| CliError::parse(format!("unbalanced parentheses in {den:?}")))?;
            (&r[..close], &r[close + 1..])
        } else {
            let end = rest[1..].find(['(', '*', '^', 'z', 'w']).map(|i| i + 1).unwrap_or(rest.len());
            (&rest[..end], &rest[end..])
        };
        let (after, pow) = parse_power(after)?;
        let after = after.strip_prefix('*').unwrap_or(after);
        match factor {
            "z" => z_pole += pow,
            "w" => w_pole += pow,
            "1" => {}
            f => {
                let lam = linear_point(f, n)?;
                let k = points.index_of(&lam).ok_or_else(|| CliError::parse(format!("{lam} is not an {n}-th root of unity")))?;
                point_poles[k - 1] += pow;
            }
        }
        rest = after;
    }
    Ok(RatFrac { points, num: numd, z_pole, w_pole, point_poles })
}

fn matching(s: &str) -> Option<usize> {
    let mut depth = 1;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top(s: &str, sep: char) -> Option<(&str, &str)> {
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn strip_parens(s: &str) -> &str {
    match s.strip_prefix('(') {
        Some(r) if matching(r) == Some(r.len() - 1) => &r[..r.len() - 1],
        _ => s,
    }
}

/// Drops one layer of parentheses around a whole product like ((z-w)(z+w)).
fn strip_outer(s: &str) -> &str {
    match s.strip_prefix('(') {
        Some(r) if matching(r) == Some(r.len() - 1) && (r.starts_with('(') || !has_top_sum(&r[..r.len() - 1])) => &r[..r.len() - 1],
        _ => s,
    }
}

fn has_top_sum(s: &str) -> bool {
    let mut depth = 0;
    s.char_indices().any(|(i, c)| {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        depth == 0 && i > 0 && (c == '+' || c == '-') && !s[..i].ends_with('^')
    })
}

fn parse_power(s: &str) -> Result<(&str, u32), CliError> {
    match s.strip_prefix('^') {
        Some(r) => {
            let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
            let p = r[..end].parse().map_err(|_| CliError::parse(format!("bad exponent in {s:?}")))?;
            Ok((&r[end..], p))
        }
        None => Ok((s, 1)),
    }
}

/// The point c of a factor "z - c*w" (or "z+w", "z-w").
fn linear_point(f: &str, n: u32) -> Result<CycScalar, CliError> {
    let terms = parse_poly2(f, n)?;
    let one = CycScalar::one(n);
    if terms.len() != 2 || terms.get(&(1, 0)) != Some(&one) {
        return Err(CliError::parse(format!("factor {f:?} is not of the form z - c w")));
    }
    let c = terms.get(&(0, 1)).ok_or_else(|| CliError::parse(format!("factor {f:?} is not of the form z - c w")))?;
    Ok(c.negate())
}

/// Polynomial in z, w with cyclotomic coefficients: terms like 3*z^2*w, -e*w, 1/2.
fn parse_poly2(s: &str, n: u32) -> Result<std::collections::BTreeMap<(i64, i64), CycScalar>, CliError> {
    let mut out: std::collections::BTreeMap<(i64, i64), CycScalar> = std::collections::BTreeMap::new();
    let mut terms = Vec::new();
    let mut start = 0;
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > start && !s[..i].ends_with('^') => {
                terms.push(&s[start..i]);
                start = i;
            }
            _ => {}
        }
    }
    terms.push(&s[start..]);
    for t in terms.into_iter().filter(|t| !t.is_empty()) {
        let (sign, body) = match t.as_bytes()[0] {
            b'-' => (-1, &t[1..]),
            b'+' => (1, &t[1..]),
            _ => (1, t),
        };
        let mut coef = CycScalar::from_int(n, sign);
        let (mut ze, mut we) = (0i64, 0i64);
        for f in body.split('*').filter(|f| !f.is_empty()) {
            let (base, pow) = parse_power(f).unwrap_or((f, 1));
            let (var, pow) = match f.split_once('^') {
                Some((v, p)) if v == "z" || v == "w" => (v, p.parse::<i64>().map_err(|_| CliError::parse(format!("bad exponent in {f:?}")))?),
                _ => (base, pow as i64),
            };
            match var {
                "z" => ze += pow,
                "w" => we += pow,
                _ => {
                    let c = CycScalar::parse(n, strip_parens(f)).map_err(|e| CliError::parse(format!("{f:?}: {e}")))?;
                    coef = &coef * &c;
                }
            }
        }
        let e = out.entry((ze, we)).or_insert_with(|| CycScalar::zero(n));
        *e += &coef;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

fn cmd_pfd(cli: &Cli, input: &str, stdin: &mut dyn Read) -> Result<Output, CliError> {
    let text = read_input(input, stdin)?;
    let n = cli.roots.unwrap_or(2);
    if n == 0 {
        return Err(CliError::parse("--roots must be positive"));
    }
    let f = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::parse(format!("invalid JSON: {e}")))?;
        RatFrac::from_json(&v, n)?
    } else {
        parse_ratfrac(&text, n)?
    };
    let form = partial_fractions(&f)?;
    let j = form.to_json();
    let mut lines = Vec::new();
    for p in j["point_parts"].as_array().into_iter().flatten() {
        lines.push(format!("({})/(z - ({})w)^{}", p["coeff"].as_str().unwrap_or(""), p["point"].as_str().unwrap_or(""), -p["i"].as_i64().unwrap_or(0)));
    }
    for p in j["z_parts"].as_array().into_iter().flatten() {
        lines.push(format!("({})/z^{}", p["coeff"].as_str().unwrap_or(""), -p["i"].as_i64().unwrap_or(0)));
    }
    if !form.poly.coeffs.is_empty() {
        lines.push(format!("polynomial part with {} terms", form.poly.coeffs.len()));
    }
    if lines.is_empty() {
        lines.push("0".into());
    }
    Ok(Output::ok(j, lines.join(" + ")))
}

fn cmd_bell(n: usize, k: usize) -> Result<Output, CliError> {
    let p = bell_polynomial(n, k)?;
    let s = p.to_string();
    Ok(Output::ok(json!({"n": n, "k": k, "poly": s}), s))
}

fn cmd_verify(cli: &Cli, suite: &str) -> Result<Output, CliError> {
    let cfg = SuiteConfig { cutoff: cli.cutoff.clone(), mode_range: cli.mode_range, roots: cli.roots };
    let report = verify::run_suite(suite, &cfg).ok_or_else(|| CliError::parse(format!("unknown suite {suite:?}; known: {}", verify::SUITES.join(", "))))?;
    let code = if report.all_pass() { EXIT_OK } else { EXIT_CHECKS_FAILED };
    Ok(Output { json: report.to_json(), text: report.to_string(), code })
}

fn cmd_eval(cli: &Cli, field: &str, vector: Option<&str>, stdin: &mut dyn Read) -> Result<Output, CliError> {
    let ctx = context(cli.roots.unwrap_or(2))?;
    let registry = Registry::standard(ctx);
    let f = field_arg(field, &registry, stdin)?;
    let mut ev = Evaluator::new(ctx);
    let v = match vector {
        Some(s) => FockVector::from_json(&read_json(s, stdin)?, ctx.order).map_err(|e| CliError::parse(e.to_string()))?,
        None => ev.vacuum(f.space()?.unwrap_or(crate::fock::AlgebraKind::D)),
    };
    let window = cli.window.as_ref().map(|w| w.0).unwrap_or_else(|| Window::new(-4, 4));
    let s = eval_field(&mut ev, &f, &v, &window)?;
    let mut coeffs = Vec::new();
    let mut lines = Vec::new();
    for m in window.range() {
        if let Some(x) = s.get(m).filter(|x| !x.is_zero()) {
            coeffs.push(json!({"exp": m, "vector": x.to_json()}));
            lines.push(format!("z^{m}: {x}"));
        }
    }
    if lines.is_empty() {
        lines.push("0".into());
    }
    let j = json!({"field": f.to_string(), "vector": v.to_json(), "window": [window.lo, window.hi], "coeffs": coeffs});
    Ok(Output::ok(j, lines.join("\n")))
}

fn dispatch(cli: &Cli, stdin: &mut dyn Read) -> Result<Output, CliError> {
    match &cli.command {
        Command::Decompose { input, orders } => cmd_decompose(cli, input, &orders.0, stdin),
        Command::Ope { a, b, orders } => cmd_ope(cli, a, b, orders.as_ref().map(|o| o.0.as_slice()), stdin),
        Command::Pfd { input } => cmd_pfd(cli, input, stdin),
        Command::Bell { n, k } => cmd_bell(*n, *k),
        Command::Verify { suite } => cmd_verify(cli, suite),
        Command::Eval { field, vector } => cmd_eval(cli, field, vector.as_deref(), stdin),
    }
}

/// Runs the CLI on explicit streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    match dispatch(&cli, stdin) {
        Ok(o) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&o.json).expect("serializable"),
                Format::Text => o.text,
            };
            let _ = writeln!(out, "{body}");
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdin(), &mut std::io::stdout(), &mut std::io::stderr())
}
