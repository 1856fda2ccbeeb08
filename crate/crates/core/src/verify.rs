//! Identity registry and the exact checker that runs it.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qexpr::{parse, Evaluator};
use crate::qlaurent::{exp_int, render_exp, Comparison, Exp};
use crate::ring::Conductor;
use crate::strings::{cross_spin_rhs, polar_finite_rhs, quasi_period_rhs, theta_decomposition, KappaSign};

/// The registry shipped with the crate.
pub const BUILTIN_REGISTRY: &str = include_str!("../registry/identities.txt");

/// Ring names accepted in the registry and on the command line.
pub fn ring_from_name(name: &str) -> Result<Conductor> {
    match name {
        "rat" => Ok(Conductor::One),
        "eisenstein" => Ok(Conductor::Three),
        "gauss" => Ok(Conductor::Four),
        _ => Err(Error::Usage(format!("unknown ring `{name}` (expected rat, gauss or eisenstein)"))),
    }
}

pub fn ring_name(c: Conductor) -> &'static str {
    match c {
        Conductor::One => "rat",
        Conductor::Three => "eisenstein",
        Conductor::Four => "gauss",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamValue {
    Int(i64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(n) => write!(f, "{n}"),
            ParamValue::Text(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub values: Vec<ParamValue>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityRecord {
    pub name: String,
    pub params: Vec<ParamSpec>,
    pub ring: Conductor,
    pub order: Exp,
    pub lhs: String,
    pub rhs: String,
    pub anchor: String,
}

pub type Binding = Vec<(String, ParamValue)>;

impl IdentityRecord {
    /// Every assignment of the parameters, first parameter varying slowest.
    pub fn bindings(&self) -> Vec<Binding> {
        let mut out: Vec<Binding> = vec![Vec::new()];
        for p in &self.params {
            out = out
                .into_iter()
                .flat_map(|b| {
                    p.values.iter().map(move |v| {
                        let mut b = b.clone();
                        b.push((p.name.clone(), v.clone()));
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// Both sides with templates and builders expanded.
    pub fn instantiate(&self, binding: &Binding) -> Result<(String, String)> {
        Ok((expand(&self.lhs, binding)?, expand(&self.rhs, binding)?))
    }
}

// ---------------------------------------------------------------------------
// Registry text format
// ---------------------------------------------------------------------------

fn split_depth0(s: &str, sep: impl Fn(char) -> bool) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if depth == 0 && sep(c) => {
                out.push(&s[start..k]);
                start = k + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_params(text: &str, line: usize) -> Result<Vec<ParamSpec>> {
    let text = text.trim();
    if text == "-" || text.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |msg: String| Error::Usage(format!("registry line {line}: {msg}"));
    let mut out: Vec<ParamSpec> = Vec::new();
    for item in split_depth0(text, char::is_whitespace).into_iter().filter(|s| !s.is_empty()) {
        let (name, spec) = item
            .split_once('=')
            .ok_or_else(|| bad(format!("parameter `{item}` needs name=values")))?;
        let name = name.trim().to_string();
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || name.is_empty() {
            return Err(bad(format!("bad parameter name `{name}`")));
        }
        let values = if let Some(list) = spec.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            split_depth0(list, |c| c == ',')
                .into_iter()
                .map(|v| {
                    let v = v.trim();
                    match v.parse::<i64>() {
                        Ok(n) => ParamValue::Int(n),
                        Err(_) => ParamValue::Text(v.to_string()),
                    }
                })
                .collect()
        } else if let Some((lo, hi)) = spec.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| bad(format!("bad range start in `{item}`")))?;
            let hi: i64 = hi.trim().parse().map_err(|_| bad(format!("bad range end in `{item}`")))?;
            if hi < lo {
                return Err(bad(format!("empty range in `{item}`")));
            }
            (lo..=hi).map(ParamValue::Int).collect()
        } else {
            let n: i64 = spec.trim().parse().map_err(|_| bad(format!("bad value in `{item}`")))?;
            vec![ParamValue::Int(n)]
        };
        if values.is_empty() {
            return Err(bad(format!("parameter `{name}` has no values")));
        }
        if out.iter().any(|p| p.name == name) {
            return Err(bad(format!("parameter `{name}` given twice")));
        }
        out.push(ParamSpec { name, values });
    }
    Ok(out)
}

/// Parse registry text: `name | params | ring | order | lhs | rhs | anchor`
/// per record, `#` comments, indented lines continuing the previous record.
pub fn parse_registry(text: &str) -> Result<Vec<IdentityRecord>> {
    let mut logical: Vec<(usize, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a);
        if line.trim().is_empty() {
            continue;
        }
        if raw.starts_with(char::is_whitespace) {
            match logical.last_mut() {
                Some((_, acc)) => {
                    acc.push(' ');
                    acc.push_str(line.trim());
                }
                None => return Err(Error::Usage(format!("registry line {}: continuation without a record", k + 1))),
            }
        } else {
            logical.push((k + 1, line.trim().to_string()));
        }
    }
    let mut out = Vec::new();
    let mut names = HashSet::new();
    let mut anchors = HashSet::new();
    for (line, rec) in logical {
        let fields: Vec<&str> = rec.split('|').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::Usage(format!(
                "registry line {line}: expected 7 `|`-separated fields, found {}",
                fields.len()
            )));
        }
        let order: i64 = fields[3]
            .parse()
            .map_err(|_| Error::Usage(format!("registry line {line}: bad order `{}`", fields[3])))?;
        if order <= 0 {
            return Err(Error::Usage(format!("registry line {line}: order must be positive")));
        }
        let rec = IdentityRecord {
            name: fields[0].to_string(),
            params: parse_params(fields[1], line)?,
            ring: ring_from_name(fields[2])?,
            order: exp_int(order),
            lhs: fields[4].to_string(),
            rhs: fields[5].to_string(),
            anchor: fields[6].to_string(),
        };
        if rec.name.is_empty() || rec.anchor.is_empty() {
            return Err(Error::Usage(format!("registry line {line}: empty name or anchor")));
        }
        if !names.insert(rec.name.clone()) {
            return Err(Error::Usage(format!("registry line {line}: duplicate name `{}`", rec.name)));
        }
        if !anchors.insert(rec.anchor.clone()) {
            return Err(Error::Usage(format!("registry line {line}: duplicate anchor `{}`", rec.anchor)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// The shipped registry.
pub fn builtin_registry() -> Vec<IdentityRecord> {
    parse_registry(BUILTIN_REGISTRY).expect("shipped registry parses")
}

// ---------------------------------------------------------------------------
// Templates `{expr}` and builders `@name(args)`
// ---------------------------------------------------------------------------

struct Tmpl<'a> {
    s: &'a [u8],
    pos: usize,
    env: &'a Binding,
}

impl Tmpl<'_> {
    fn err(&self, msg: impl fmt::Display) -> Error {
        Error::Usage(format!(
            "template `{}`: {msg}",
            String::from_utf8_lossy(self.s)
        ))
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Exp> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            v = if c == b'+' { v + t } else { v - t };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Exp> {
        let mut v = self.unary()?;
        while let Some(c @ (b'*' | b'/' | b'%')) = self.peek() {
            self.pos += 1;
            let t = self.unary()?;
            v = match c {
                b'*' => v * t,
                b'/' if t.is_zero() => return Err(self.err("division by zero")),
                b'/' => v / t,
                _ => {
                    if !v.is_integer() || !t.is_integer() || t.is_zero() {
                        return Err(self.err("% needs nonzero integers"));
                    }
                    Exp::from_integer(v.to_integer().mod_floor(&t.to_integer()))
                }
            };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<Exp> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.unary()?;
            if !e.is_integer() {
                return Err(self.err("powers must be integers"));
            }
            let e = e.to_integer();
            let e32 = i32::try_from(e).map_err(|_| self.err("power out of range"))?;
            if base.is_zero() && e < 0 {
                return Err(self.err("division by zero"));
            }
            return Ok(base.pow(e32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Exp> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let s = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n: i64 = std::str::from_utf8(&self.s[s..self.pos]).unwrap().parse().map_err(|_| self.err("number out of range"))?;
                Ok(exp_int(n))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let s = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[s..self.pos]).unwrap();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err(self.err("expected `)`"));
                    }
                    self.pos += 1;
                    return match name {
                        "floor" => Ok(exp_int(arg.floor().to_integer())),
                        "kappa" => {
                            if !arg.is_integer() {
                                return Err(self.err("kappa needs an integer"));
                            }
                            Ok(exp_int(KappaSign::kappa(arg.to_integer())))
                        }
                        "binom2" => Ok(arg * (arg - 1) / 2),
                        _ => Err(self.err(format!("unknown function `{name}`"))),
                    };
                }
                match self.env.iter().rev().find(|(k, _)| k == name) {
                    Some((_, ParamValue::Int(n))) => Ok(exp_int(*n)),
                    Some((_, ParamValue::Text(_))) => Err(self.err(format!("`{name}` is text, not a number"))),
                    None => Err(self.err(format!("unbound name `{name}`"))),
                }
            }
            _ => Err(self.err("expected a number, a name or `(`")),
        }
    }
}

fn eval_template(body: &str, env: &Binding) -> Result<Exp> {
    let mut t = Tmpl { s: body.as_bytes(), pos: 0, env };
    let v = t.expr()?;
    if t.peek().is_some() {
        return Err(t.err("trailing input"));
    }
    Ok(v)
}

fn render_value(v: Exp) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        render_exp(v)
    }
}

fn closing(s: &str, open_at: usize, open: char, close: char) -> Result<usize> {
    let mut depth = 0i32;
    for (k, c) in s[open_at..].char_indices() {
        if c == open {
            depth += 1;
        } else if c == close {
            depth -= 1;
            if depth == 0 {
                return Ok(open_at + k);
            }
        }
    }
    Err(Error::Usage(format!("unbalanced `{open}` in `{s}`")))
}

fn int_of(text: &str, env: &Binding) -> Result<i64> {
    let v = eval_template(&expand(text, env)?, env)?;
    if !v.is_integer() {
        return Err(Error::Usage(format!("`{text}` is not an integer")));
    }
    v.to_integer().to_i64().ok_or_else(|| Error::Usage(format!("`{text}` is out of range")))
}

/// Expand `{template}` arithmetic and `@builder(...)` calls in identity text.
///
/// `@sum(k, lo, hi, body)` and `@prod(k, lo, hi, body)` repeat `body` with
/// `k` bound; the remaining builders assemble structural right-hand sides.
pub fn expand(text: &str, env: &Binding) -> Result<String> {
    let mut out = String::new();
    let mut k = 0;
    while k < text.len() {
        let c = text[k..].chars().next().unwrap();
        if c == '{' {
            let end = closing(text, k, '{', '}')?;
            let body = &text[k + 1..end];
            let name = body.trim();
            match env.iter().rev().find(|(n, _)| n == name) {
                Some((_, ParamValue::Text(t))) => out.push_str(&format!("({t})")),
                _ => out.push_str(&render_value(eval_template(body, env)?)),
            }
            k = end + 1;
        } else if c == '@' {
            let name_end = text[k + 1..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .map_or(text.len(), |n| k + 1 + n);
            let name = &text[k + 1..name_end];
            if !text[name_end..].starts_with('(') {
                return Err(Error::Usage(format!("builder `@{name}` needs arguments")));
            }
            let end = closing(text, name_end, '(', ')')?;
            let args = split_depth0(&text[name_end + 1..end], |ch| ch == ',');
            out.push('(');
            out.push_str(&builder(name, &args, env)?);
            out.push(')');
            k = end + 1;
        } else {
            out.push(c);
            k += c.len_utf8();
        }
    }
    Ok(out)
}

fn builder(name: &str, args: &[&str], env: &Binding) -> Result<String> {
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Usage(format!("builder `@{name}` takes {n} arguments, got {}", args.len())))
        }
    };
    match name {
        "sum" | "prod" => {
            if args.len() < 4 {
                return Err(Error::Usage(format!("builder `@{name}` takes var, lo, hi, body")));
            }
            let var = args[0].trim().to_string();
            let lo = int_of(args[1], env)?;
            let hi = int_of(args[2], env)?;
            let body = args[3..].join(",");
            let mut parts = Vec::new();
            for v in lo..=hi {
                let mut inner = env.clone();
                inner.push((var.clone(), ParamValue::Int(v)));
                parts.push(format!("({})", expand(&body, &inner)?));
            }
            Ok(match (name, parts.is_empty()) {
                ("sum", true) => "0".into(),
                ("prod", true) => "1".into(),
                ("sum", false) => parts.join(" + "),
                _ => parts.join("*"),
            })
        }
        "quasi_period_rhs" => {
            arity(5)?;
            let v: Vec<i64> = args.iter().map(|a| int_of(a, env)).collect::<Result<_>>()?;
            quasi_period_rhs(v[0], v[1], v[2], v[3], v[4])
        }
        "polar_finite_rhs" => {
            arity(4)?;
            polar_finite_rhs(int_of(args[0], env)?, int_of(args[1], env)?, int_of(args[2], env)?, &expand(args[3].trim(), env)?)
        }
        "cross_spin_rhs" => {
            arity(2)?;
            cross_spin_rhs(int_of(args[0], env)?, int_of(args[1], env)?)
        }
        "theta_decomp" => {
            arity(4)?;
            theta_decomposition(
                int_of(args[0], env)?,
                int_of(args[1], env)?,
                int_of(args[2], env)?,
                &expand(args[3].trim(), env)?,
            )
        }
        _ => Err(Error::Usage(format!("unknown builder `@{name}`"))),
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Mismatch,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MismatchInfo {
    pub exponent: String,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of checking one identity instance.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub status: Status,
    pub order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<MismatchInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub exit_code: i32,
}

impl VerifyReport {
    /// `name[k=v,...]`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.name, ps.join(","))
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            Status::Pass => write!(f, "PASS {} through q^{}", self.label(), self.order),
            Status::Mismatch => {
                let m = self.mismatch.as_ref().unwrap();
                write!(
                    f,
                    "MISMATCH {} at q^{}: lhs {} rhs {}",
                    self.label(),
                    m.exponent,
                    m.lhs,
                    m.rhs
                )
            }
            Status::Error => write!(f, "ERROR {}: {}", self.label(), self.error.as_deref().unwrap_or("")),
        }
    }
}

fn binding_map(binding: &Binding) -> BTreeMap<String, String> {
    binding.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}

/// Compare two expression texts exactly through `q^order`.
pub fn check_texts(name: &str, params: BTreeMap<String, String>, lhs: &str, rhs: &str, ring: Conductor, order: Exp) -> VerifyReport {
    let start = Instant::now();
    let side = |side: &'static str| move |e: Error| (side, e);
    let outcome = (|| -> std::result::Result<Comparison, (&'static str, Error)> {
        let l = parse(lhs).map_err(side("lhs"))?;
        let r = parse(rhs).map_err(side("rhs"))?;
        let ev = Evaluator::new(ring);
        let a = ev.eval(&l, order).map_err(side("lhs"))?;
        let b = ev.eval(&r, order).map_err(side("rhs"))?;
        a.eq_to_order(&b, order).map_err(side("comparison"))
    })();
    let mut rep = VerifyReport {
        name: name.to_string(),
        params,
        status: Status::Pass,
        order: render_exp(order),
        mismatch: None,
        error: None,
        elapsed: Duration::ZERO,
        exit_code: 0,
    };
    match outcome {
        Ok(Comparison::Equal) => {}
        Ok(Comparison::Mismatch { exponent, lhs, rhs }) => {
            rep.status = Status::Mismatch;
            rep.exit_code = 1;
            rep.mismatch = Some(MismatchInfo {
                exponent: render_exp(exponent),
                lhs: lhs.to_ring_string(),
                rhs: rhs.to_ring_string(),
            });
        }
        Err((side, e)) => {
            rep.status = Status::Error;
            rep.exit_code = e.exit_code();
            rep.error = Some(format!("{side}: {e}"));
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Check one instance of a record.
pub fn run_instance(rec: &IdentityRecord, binding: &Binding, order: Option<Exp>) -> VerifyReport {
    let order = order.unwrap_or(rec.order);
    match rec.instantiate(binding) {
        Ok((l, r)) => check_texts(&rec.name, binding_map(binding), &l, &r, rec.ring, order),
        Err(e) => VerifyReport {
            name: rec.name.clone(),
            params: binding_map(binding),
            status: Status::Error,
            order: render_exp(order),
            mismatch: None,
            error: Some(e.to_string()),
            elapsed: Duration::ZERO,
            exit_code: e.exit_code(),
        },
    }
}

/// Check every parameter binding of a record.
pub fn run_identity(rec: &IdentityRecord, order: Option<Exp>) -> Vec<VerifyReport> {
    rec.bindings().iter().map(|b| run_instance(rec, b, order)).collect()
}

/// Aggregated suite outcome, ordered by (record name, binding index).
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<VerifyReport>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.passed()).count()
    }

    /// 0 when everything passed, 1 if anything mismatched, otherwise the
    /// largest error status.
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.status == Status::Mismatch) {
            return 1;
        }
        self.reports.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.reports).expect("reports serialize")
    }
}

/// Records whose name matches the glob `filter`.
pub fn select<'a>(records: &'a [IdentityRecord], filter: &str) -> Result<Vec<&'a IdentityRecord>> {
    let pat = glob::Pattern::new(filter).map_err(|e| Error::Usage(format!("bad filter `{filter}`: {e}")))?;
    Ok(records.iter().filter(|r| pat.matches(&r.name)).collect())
}

/// Run the matching records on `jobs` worker threads.
pub fn run_suite(records: &[IdentityRecord], filter: &str, order: Option<Exp>, jobs: usize) -> Result<SuiteReport> {
    if jobs == 0 {
        return Err(Error::Usage("jobs must be at least 1".into()));
    }
    let chosen = select(records, filter)?;
    let mut units: Vec<(&str, usize, &IdentityRecord, Binding)> = Vec::new();
    for rec in chosen {
        for (k, b) in rec.bindings().into_iter().enumerate() {
            units.push((&rec.name, k, rec, b));
        }
    }
    units.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let reports = pool.install(|| {
        units
            .par_iter()
            .map(|(_, _, rec, b)| run_instance(rec, b, order))
            .collect::<Vec<_>>()
    });
    Ok(SuiteReport { reports })
}

/// Parse an order given on the command line or in a test: an integer or
/// `a/b`.
pub fn parse_order(text: &str) -> Result<Exp> {
    let bad = || Error::Usage(format!("bad order `{text}`"));
    let v = match text.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0 {
                return Err(bad());
            }
            Exp::new(a, b)
        }
        None => exp_int(text.trim().parse().map_err(|_| bad())?),
    };
    if !v.is_positive() {
        return Err(Error::Usage(format!("order must be positive, got {text}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatch_forensics() {
        let rep = check_texts("t", BTreeMap::new(), "1+q", "1+2*q", Conductor::One, exp_int(10));
        assert_eq!(rep.status, Status::Mismatch);
        let m = rep.mismatch.unwrap();
        assert_eq!((m.exponent.as_str(), m.lhs.as_str(), m.rhs.as_str()), ("1", "1", "2"));
    }

    #[test]
    fn templates_and_builders() {
        let env: Binding = vec![("r".into(), ParamValue::Int(3)), ("z".into(), ParamValue::Text("2*q".into()))];
        assert_eq!(expand("q^({r^2/2-5*r/2+1})", &env).unwrap(), "q^(-2)");
        assert_eq!(expand("{(-1)^kappa(r)}", &env).unwrap(), "-1");
        assert_eq!(expand("{floor((r+1)/2)}", &env).unwrap(), "2");
        assert_eq!(expand("j({z},1)", &env).unwrap(), "j((2*q),1)");
        assert_eq!(expand("@sum(k,1,{r-1},q^({k}))", &env).unwrap(), "((q^(1)) + (q^(2)))");
        assert_eq!(expand("@prod(k,1,0,x)", &env).unwrap(), "(1)");
        assert!(expand("{s}", &env).is_err());
        assert!(expand("@nope(1)", &env).is_err());
    }

    #[test]
    fn registry_format() {
        let text = "# comment\nid | r=0..2 z=[q, 2*q] | rat | 10 | q^{r}*{z} \n   + 0 | {z}*q^{r} | a1\nother | - | gauss | 5 | i | i | a2\n";
        let recs = parse_registry(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].bindings().len(), 6);
        assert_eq!(recs[0].lhs, "q^{r}*{z} + 0");
        let reps = run_identity(&recs[0], None);
        assert!(reps.iter().all(|r| r.passed()), "{reps:?}");
        assert_eq!(reps[5].label(), "id[r=2,z=2*q]");
        assert!(parse_registry("a | - | rat | 1 | 1 | 1 | x\nb | - | rat | 1 | 1 | 1 | x\n").is_err());
        assert!(parse_registry("a | - | rat | 1 | 1 | 1 | x\na | - | rat | 1 | 1 | 1 | y\n").is_err());
        assert!(parse_registry("a | - | rat | 1 | 1 | 1 | \n").is_err());
        assert!(parse_registry("a | - | real | 1 | 1 | 1 | x\n").is_err());
    }

    #[test]
    fn suite_filter_and_order() {
        let recs = parse_registry("b | n=1..3 | rat | 6 | JJ(1,3) | Ja(1) | x\na | - | rat | 6 | 1+q | 1 | y\n").unwrap();
        let rep = run_suite(&recs, "*", None, 2).unwrap();
        let labels: Vec<String> = rep.reports.iter().map(|r| r.label()).collect();
        assert_eq!(labels, vec!["a", "b[n=1]", "b[n=2]", "b[n=3]"]);
        assert_eq!(rep.exit_code(), 1);
        assert!(run_suite(&recs, "zzz*", None, 1).unwrap().reports.is_empty());
        let err = check_texts("e", BTreeMap::new(), "j(q;", "1", Conductor::One, exp_int(3));
        assert_eq!((err.status, err.exit_code), (Status::Error, 2));
        let pole = check_texts("p", BTreeMap::new(), "1/j(q,1)", "1", Conductor::One, exp_int(3));
        assert_eq!((pole.status, pole.exit_code), (Status::Error, 3));
    }
}
