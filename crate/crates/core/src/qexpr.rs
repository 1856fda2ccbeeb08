//! Text expressions over truncated q-series: parser, printer and evaluator.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::appell::{appell_m, bilateral_pf_sum, AppellSpec};
use crate::error::{Error, Result};
use crate::mocktheta::{g_universal, mock_series, MockName};
use crate::qlaurent::{quotient_to_order, render_exp, Exp, QSeries};
use crate::ring::{Conductor, CycCoeff};
use crate::strings::{char_weyl_kac, string_coeff_oracle, string_normalized, LevelData, StringId};
use crate::theta::{eta, euler, jb, jj, jtheta, poch, theta_nm, Monomial, PochLen};

/// Functions and constants callable from expression text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    J,
    M,
    JJ,
    JB,
    Ja,
    Eta,
    Poch,
    PochInf,
    Theta,
    Mock(MockName),
    G,
    Bsum,
    C,
    CC,
    Chi,
    I,
    W,
}

impl Builtin {
    pub const ALL: [Builtin; 24] = [
        Builtin::J,
        Builtin::M,
        Builtin::JJ,
        Builtin::JB,
        Builtin::Ja,
        Builtin::Eta,
        Builtin::Poch,
        Builtin::PochInf,
        Builtin::Theta,
        Builtin::Mock(MockName::F3),
        Builtin::Mock(MockName::Omega3),
        Builtin::Mock(MockName::F0),
        Builtin::Mock(MockName::F1),
        Builtin::Mock(MockName::Phi10),
        Builtin::Mock(MockName::Psi10),
        Builtin::Mock(MockName::X10),
        Builtin::Mock(MockName::Chi10),
        Builtin::G,
        Builtin::Bsum,
        Builtin::C,
        Builtin::CC,
        Builtin::Chi,
        Builtin::I,
        Builtin::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::J => "j",
            Builtin::M => "m",
            Builtin::JJ => "JJ",
            Builtin::JB => "JB",
            Builtin::Ja => "Ja",
            Builtin::Eta => "eta",
            Builtin::Poch => "poch",
            Builtin::PochInf => "pochinf",
            Builtin::Theta => "theta",
            Builtin::Mock(m) => m.as_str(),
            Builtin::G => "g",
            Builtin::Bsum => "bsum",
            Builtin::C => "C",
            Builtin::CC => "CC",
            Builtin::Chi => "chi",
            Builtin::I => "i",
            Builtin::W => "w",
        }
    }

    pub fn lookup(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Accepted argument counts.
    pub fn arities(self) -> &'static [usize] {
        match self {
            Builtin::J | Builtin::JJ | Builtin::JB | Builtin::PochInf | Builtin::G | Builtin::Bsum => &[2],
            Builtin::M | Builtin::Poch => &[3],
            Builtin::Ja | Builtin::Eta => &[1],
            Builtin::Theta | Builtin::C | Builtin::CC | Builtin::Chi => &[4],
            Builtin::Mock(_) => &[0, 1],
            Builtin::I | Builtin::W => &[0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Num(BigRational),
    QPow(Exp),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i64),
    Call(Builtin, Vec<Node>),
}

/// Expression tree node with its byte span in the source text.
#[derive(Clone, Debug)]
pub struct Node {
    pub kind: Kind,
    pub span: (usize, usize),
}

/// Structural equality; spans are ignored.
impl PartialEq for Node {
    fn eq(&self, other: &Node) -> bool {
        self.kind == other.kind
    }
}

impl Node {
    pub fn new(kind: Kind) -> Node {
        Node { kind, span: (0, 0) }
    }

}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Num(r) => {
                if r.is_negative() {
                    write!(f, "(-{})", Node::new(Kind::Num(-r)))
                } else if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "({}/{})", r.numer(), r.denom())
                }
            }
            Kind::QPow(e) => write!(f, "q^({})", render_exp(*e)),
            Kind::Neg(x) => write!(f, "-({x})"),
            Kind::Add(a, b) => write!(f, "({a} + {b})"),
            Kind::Sub(a, b) => write!(f, "({a} - {b})"),
            Kind::Mul(a, b) => write!(f, "({a}*{b})"),
            Kind::Div(a, b) => write!(f, "({a}/{b})"),
            Kind::Pow(x, n) => write!(f, "({x})^({n})"),
            Kind::Call(b, args) => {
                write!(f, "{}", b.name())?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

const ATOM_START: [&str; 5] = ["number", "q", "name", "(", "-"];

fn syntax(offset: usize, message: impl Into<String>, expected: &[&str]) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn found(&mut self) -> String {
        match self.peek() {
            Some(c) => format!("unexpected `{}`", c as char),
            None => "unexpected end of input".into(),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, expected: &[&str]) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(syntax(self.pos, self.found(), expected))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let start = self.peek().map(|_| self.pos).unwrap_or(self.pos);
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => b'+',
                Some(b'-') => b'-',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            let end = rhs.span.1;
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            let kind = if op == b'+' { Kind::Add(a, b) } else { Kind::Sub(a, b) };
            lhs = Node { kind, span: (start, end) };
        }
    }

    fn term(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => b'*',
                Some(b'/') => b'/',
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            let end = rhs.span.1;
            let (a, b) = (Box::new(lhs), Box::new(rhs));
            let kind = if op == b'*' { Kind::Mul(a, b) } else { Kind::Div(a, b) };
            lhs = Node { kind, span: (start, end) };
        }
    }

    fn factor(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let (n, end) = self.signed_rational(&["integer"])?;
        if !n.is_integer() {
            return Err(syntax(start, "power exponents must be integers", &["integer"]));
        }
        let n = n
            .to_integer()
            .to_i64()
            .ok_or_else(|| syntax(start, "exponent out of range", &["integer"]))?;
        Ok(Node {
            kind: Kind::Pow(Box::new(base), n),
            span: (start, end),
        })
    }

    fn digits(&mut self) -> Option<BigInt> {
        let s = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if s == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[s..self.pos]).ok()?.parse().ok()
    }

    /// `a` or `a/b` with the slash immediately followed by a digit.
    fn unsigned_rational(&mut self, expected: &[&str]) -> Result<BigRational> {
        self.skip_ws();
        let at = self.pos;
        let num = self.digits().ok_or_else(|| syntax(at, self.found(), expected))?;
        let save = self.pos;
        if self.src.get(self.pos) == Some(&b'/') && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
            let den = self.digits().unwrap();
            if den.is_zero() {
                return Err(syntax(save + 1, "zero denominator", &["nonzero integer"]));
            }
            return Ok(BigRational::new(num, den));
        }
        Ok(BigRational::from_integer(num))
    }

    /// Exponent after `^`: optionally parenthesised, optionally signed.
    fn signed_rational(&mut self, expected: &[&str]) -> Result<(BigRational, usize)> {
        let paren = self.eat(b'(');
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let mut r = self.unsigned_rational(expected)?;
        if neg {
            r = -r;
        }
        if paren {
            self.expect(b')', &[")"])?;
        }
        Ok((r, self.pos))
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(c) = self.peek() else {
            return Err(syntax(self.pos, "unexpected end of input", &ATOM_START));
        };
        let start = self.pos;
        if c.is_ascii_digit() {
            let r = self.unsigned_rational(&["number"])?;
            return Ok(Node {
                kind: Kind::Num(r),
                span: (start, self.pos),
            });
        }
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')', &[")", "+", "-", "*", "/"])?;
            return Ok(Node {
                kind: inner.kind,
                span: (start, self.pos),
            });
        }
        if c == b'-' {
            self.pos += 1;
            let inner = self.atom()?;
            let end = inner.span.1;
            return Ok(Node {
                kind: Kind::Neg(Box::new(inner)),
                span: (start, end),
            });
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            if name == "q" {
                let save = self.pos;
                if self.eat(b'^') {
                    // q^e with a rational exponent; an integer exponent is
                    // read the same way
                    let (e, end) = self.signed_rational(&["rational"])?;
                    let e = to_exp(&e).ok_or_else(|| syntax(save, "exponent out of range", &["rational"]))?;
                    return Ok(Node {
                        kind: Kind::QPow(e),
                        span: (start, end),
                    });
                }
                return Ok(Node {
                    kind: Kind::QPow(Exp::one()),
                    span: (start, self.pos),
                });
            }
            let builtin = Builtin::lookup(&name).ok_or(Error::UnknownName {
                name: name.clone(),
                offset: start,
            })?;
            let mut args = Vec::new();
            if self.eat(b'(') {
                loop {
                    args.push(self.expr()?);
                    if self.eat(b',') || self.eat(b';') {
                        continue;
                    }
                    self.expect(b')', &[",", ")"])?;
                    break;
                }
            }
            if !builtin.arities().contains(&args.len()) {
                let expected = builtin
                    .arities()
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" or ");
                return Err(Error::Arity {
                    name,
                    expected,
                    got: args.len(),
                }
                .at(start, self.pos));
            }
            return Ok(Node {
                kind: Kind::Call(builtin, args),
                span: (start, self.pos),
            });
        }
        Err(syntax(start, self.found(), &ATOM_START))
    }
}

fn to_exp(r: &BigRational) -> Option<Exp> {
    Some(Exp::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

/// Parse expression text.
pub fn parse(text: &str) -> Result<Node> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let node = p.expr()?;
    if p.peek().is_some() {
        return Err(syntax(p.pos, p.found(), &["+", "-", "*", "/", "^", "end of input"]));
    }
    Ok(node)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates expressions in a fixed coefficient field, memoizing builtin
/// calls by their printed form and requested order.
pub struct Evaluator {
    cond: Conductor,
    memo: Mutex<HashMap<(String, Exp), QSeries>>,
}

impl Evaluator {
    pub fn new(cond: Conductor) -> Evaluator {
        Evaluator {
            cond,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn conductor(&self) -> Conductor {
        self.cond
    }

    /// Value of `node` with coefficients known through `q^order`.
    pub fn eval(&self, node: &Node, order: Exp) -> Result<QSeries> {
        let out = self.node(node, order)?;
        if out.trunc() < order {
            return Err(Error::InsufficientPrecision {
                requested: render_exp(order),
                available: render_exp(out.trunc()),
            }
            .at(node.span.0, node.span.1));
        }
        fit_conductor(&out, self.cond).map_err(|e| at_node(e, node))
    }

    fn node(&self, node: &Node, t: Exp) -> Result<QSeries> {
        self.node_inner(node, t).map_err(|e| e.at(node.span.0, node.span.1))
    }

    fn node_inner(&self, node: &Node, t: Exp) -> Result<QSeries> {
        match &node.kind {
            Kind::Num(r) if r.is_zero() => Ok(QSeries::zero_to(t, Conductor::One)),
            Kind::Num(_) | Kind::QPow(_) => {
                let m = monomial(node)?;
                Ok(QSeries::monomial(m.coeff, m.exp, t))
            }
            Kind::Neg(x) => Ok(self.node(x, t)?.neg()),
            Kind::Add(a, b) => self.node(a, t)?.add(&self.node(b, t)?),
            Kind::Sub(a, b) => self.node(a, t)?.sub(&self.node(b, t)?),
            Kind::Mul(a, b) => self.product(a, b, t),
            Kind::Div(a, b) => quotient_to_order(t, |s| self.node(a, s), |s| self.node(b, s)),
            Kind::Pow(x, n) => self.power(x, *n, t),
            Kind::Call(b, args) => self.call(node, *b, args, t),
        }
    }

    fn product(&self, a: &Node, b: &Node, t: Exp) -> Result<QSeries> {
        if let (Ok(ma), Ok(mb)) = (monomial(a), monomial(b)) {
            let m = ma.mul(&mb)?;
            return Ok(QSeries::monomial(m.coeff, m.exp, t));
        }
        if let Ok(ma) = monomial(a) {
            return self.node(b, t - ma.exp)?.mul_monomial(&ma.coeff, ma.exp);
        }
        if let Ok(mb) = monomial(b) {
            return self.node(a, t - mb.exp)?.mul_monomial(&mb.coeff, mb.exp);
        }
        let mut x = self.node(a, t)?;
        let mut y = self.node(b, t)?;
        for _ in 0..3 {
            let (vx, vy) = (x.valuation_bound(), y.valuation_bound());
            let (nx, ny) = (t - vy.min(t), t - vx.min(t));
            let mut again = false;
            if x.trunc() < nx {
                x = self.node(a, nx)?;
                again = true;
            }
            if y.trunc() < ny {
                y = self.node(b, ny)?;
                again = true;
            }
            if !again {
                break;
            }
        }
        x.mul(&y)
    }

    fn power(&self, x: &Node, n: i64, t: Exp) -> Result<QSeries> {
        if n == 0 {
            return Ok(QSeries::one(t));
        }
        if let Ok(m) = monomial(x) {
            let m = m.pow(n)?;
            return Ok(QSeries::monomial(m.coeff, m.exp, t));
        }
        if n < 0 {
            return quotient_to_order(t, |s| Ok(QSeries::one(s)), |s| self.power(x, -n, s));
        }
        let mut s = self.node(x, t)?;
        let v = s.valuation_bound();
        let need = t - v * (n - 1);
        if v.is_negative() && s.trunc() < need {
            s = self.node(x, need)?;
        }
        s.pow(n)
    }

    fn call(&self, node: &Node, b: Builtin, args: &[Node], t: Exp) -> Result<QSeries> {
        let key = (node.to_string(), t);
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let out = fit_conductor(&self.call_uncached(b, args, t)?, self.cond)?;
        self.memo.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    fn call_uncached(&self, b: Builtin, args: &[Node], t: Exp) -> Result<QSeries> {
        let arg = |k: usize| -> Result<Monomial> { monomial(&args[k]).map_err(|e| at_node(e, &args[k])) };
        let base = |k: usize| base_arg(&args[k]).map_err(|e| at_node(e, &args[k]));
        let int = |k: usize| int_arg(&args[k]).map_err(|e| at_node(e, &args[k]));
        let rat = |k: usize| rational_arg(&args[k]).map_err(|e| at_node(e, &args[k]));
        match b {
            Builtin::J => jtheta(&arg(0)?, base(1)?, t),
            Builtin::M => appell_m(&AppellSpec::new(arg(0)?, arg(1)?, base(2)?)?, t),
            Builtin::JJ => jj(rat(0)?, base(1)?, t),
            Builtin::JB => jb(rat(0)?, base(1)?, t),
            Builtin::Ja => euler(base(0)?, t),
            Builtin::Eta => eta(base(0)?, t),
            Builtin::Poch => {
                let n = int(2)?;
                if n < 0 {
                    return Err(at_node(Error::Usage(format!("poch length must be nonnegative, got {n}")), &args[2]));
                }
                poch(&arg(0)?, base(1)?, PochLen::Finite(n as u64), t)
            }
            Builtin::PochInf => poch(&arg(0)?, base(1)?, PochLen::Infinite, t),
            Builtin::Theta => theta_nm(int(0)?, int(1)?, &arg(2)?, base(3)?, t),
            Builtin::Mock(name) => match args.first() {
                None => mock_series(name, None, t),
                Some(_) => mock_series(name, Some(&arg(0)?), t),
            },
            Builtin::G => g_universal(&arg(0)?, base(1)?, t),
            Builtin::Bsum => bilateral_pf_sum(rat(0)?, base(1)?, t),
            Builtin::C | Builtin::CC => {
                let level = LevelData::new(int(0)?, int(1)?)?;
                let id = StringId::new(level, int(2)?, int(3)?)?;
                if b == Builtin::C {
                    string_coeff_oracle(&id, t)
                } else {
                    string_normalized(&id, t)
                }
            }
            Builtin::Chi => {
                let level = LevelData::new(int(0)?, int(1)?)?;
                char_weyl_kac(level, int(2)?, &arg(3)?, t)
            }
            Builtin::I => Ok(QSeries::monomial(CycCoeff::i(), Exp::zero(), t)),
            Builtin::W => Ok(QSeries::monomial(CycCoeff::omega(), Exp::zero(), t)),
        }
    }
}

/// `s` in the field of conductor `cond`, if its coefficients lie there.
fn fit_conductor(s: &QSeries, cond: Conductor) -> Result<QSeries> {
    let joined = s.conductor().join(cond)?;
    if joined == cond {
        return s.embed(cond);
    }
    if s.terms().all(|(_, c)| c.is_rational()) {
        let terms = s.raw_terms().iter().map(|(e, c)| (*e, c.shrink()));
        return QSeries::from_terms(s.denom(), s.trunc_num(), Conductor::One, terms)?.embed(cond);
    }
    Err(Error::ConductorMismatch(s.conductor().n(), cond.n()))
}

fn at_node(e: Error, n: &Node) -> Error {
    e.at(n.span.0, n.span.1)
}

/// The value of a monomial-valued subexpression `c * q^e`.
pub fn monomial(node: &Node) -> Result<Monomial> {
    let not_mono = || Error::Usage(format!("`{node}` is not a monomial c*q^e"));
    match &node.kind {
        Kind::Num(r) => Monomial::constant(CycCoeff::from_rational(r.clone(), Conductor::One)).map_err(|_| not_mono()),
        Kind::QPow(e) => Ok(Monomial::q_pow(*e)),
        Kind::Neg(x) => Ok(monomial(x)?.neg()),
        Kind::Mul(a, b) => monomial(a)?.mul(&monomial(b)?),
        Kind::Div(a, b) => monomial(a)?.mul(&monomial(b)?.inv()?),
        Kind::Pow(x, n) => monomial(x)?.pow(*n),
        Kind::Call(Builtin::I, _) => Monomial::constant(CycCoeff::i()),
        Kind::Call(Builtin::W, _) => Monomial::constant(CycCoeff::omega()),
        _ => Err(not_mono()),
    }
}

/// Base argument `q^rho`, given either as that power of `q` or as the
/// number `rho`.
fn base_arg(node: &Node) -> Result<Exp> {
    let m = monomial(node)?;
    let rho = if m.exp.is_zero() {
        m.coeff
            .to_rational()
            .and_then(to_exp)
            .ok_or_else(|| Error::Usage(format!("`{node}` is not a base q^rho")))?
    } else if m.coeff.is_one() {
        m.exp
    } else {
        return Err(Error::Usage(format!("`{node}` is not a base q^rho")));
    };
    if !rho.is_positive() {
        return Err(Error::Usage(format!("base `{node}` must have a positive exponent")));
    }
    Ok(rho)
}

fn rational_arg(node: &Node) -> Result<Exp> {
    if let Kind::Num(r) = &node.kind {
        return to_exp(r).ok_or_else(|| Error::Usage(format!("`{node}` is out of range")));
    }
    let m = monomial(node)?;
    if !m.exp.is_zero() {
        return Err(Error::Usage(format!("`{node}` must be a rational number")));
    }
    m.coeff
        .to_rational()
        .and_then(to_exp)
        .ok_or_else(|| Error::Usage(format!("`{node}` must be a rational number")))
}

fn int_arg(node: &Node) -> Result<i64> {
    let r = rational_arg(node)?;
    if !r.is_integer() {
        return Err(Error::Usage(format!("`{node}` must be an integer")));
    }
    Ok(r.to_integer())
}

/// Parse and evaluate `text` through `q^order` in the field of the given
/// conductor.
pub fn eval_text(text: &str, order: Exp, cond: Conductor) -> Result<QSeries> {
    let node = parse(text)?;
    Evaluator::new(cond).eval(&node, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlaurent::{exp, exp_int, Comparison};

    fn ints(s: &QSeries, upto: i64) -> Vec<i64> {
        (0..=upto)
            .map(|k| s.coeff(exp_int(k)).unwrap().to_rational().unwrap().to_integer().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn parses_calls_and_semicolons() {
        let a = parse("j(q;q^3)").unwrap();
        let b = parse("j(q, q^3)").unwrap();
        assert_eq!(a, b);
        match &a.kind {
            Kind::Call(Builtin::J, args) => {
                assert_eq!(args[0].kind, Kind::QPow(exp_int(1)));
                assert_eq!(args[1].kind, Kind::QPow(exp_int(3)));
            }
            k => panic!("{k:?}"),
        }
        assert!(matches!(parse("JB(4,20)").unwrap().kind, Kind::Call(Builtin::JB, _)));
    }

    #[test]
    fn syntax_errors_have_offsets() {
        match parse("j(q;") {
            Err(Error::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"q".to_string()));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("foo(1)"), Err(Error::UnknownName { offset: 0, .. })));
        assert!(matches!(parse("1 + JJ(1)").unwrap_err().root(), Error::Arity { got: 1, .. }));
        assert!(matches!(parse("q^(1/8)^(1/2)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(1 + q"), Err(Error::Syntax { offset: 6, .. })));
    }

    #[test]
    fn unary_minus_binds_tightly() {
        let a = parse("-q*2").unwrap();
        assert!(matches!(a.kind, Kind::Mul(..)));
        let b = parse("-q^2").unwrap();
        assert!(matches!(b.kind, Kind::Neg(_)));
        let c = parse("-(q)^2").unwrap();
        assert!(matches!(c.kind, Kind::Pow(..)));
    }

    #[test]
    fn print_reparse() {
        for text in ["j(-q^2, q^5)*m(q, q^2, 10)/JJ(1,3)^(-2) - 3/4*q^(-1/8)", "phi10(-q^2) + f3", "chi(5,12,0,i)"] {
            let a = parse(text).unwrap();
            let b = parse(&a.to_string()).unwrap();
            assert_eq!(a, b, "{text} -> {a}");
        }
    }

    #[test]
    fn evaluates_examples() {
        let s = eval_text("JJ(1,3)", exp_int(7), Conductor::One).unwrap();
        assert_eq!(ints(&s, 7), vec![1, -1, -1, 0, 0, 1, 0, 1]);
        let one = eval_text("q^(1/8)*q^(-1/8)", exp_int(5), Conductor::One).unwrap();
        assert_eq!(one.eq_to_order(&QSeries::one(exp_int(5)), exp_int(5)).unwrap(), Comparison::Equal);
        let z = eval_text("j(q;q)", exp_int(5), Conductor::One).unwrap();
        assert!(z.is_zero() && z.trunc() >= exp_int(5));
    }

    #[test]
    fn precision_through_negative_valuations() {
        let order = exp_int(12);
        let a = eval_text("(q^(-3) + 1)*(JJ(1,2) - 1)", order, Conductor::One).unwrap();
        assert!(a.trunc() >= order);
        let b = eval_text("q^(-3)*JJ(1,2) - q^(-3)", order, Conductor::One).unwrap();
        let c = eval_text("(JJ(1,2)-1)*q^(-3)", order, Conductor::One).unwrap();
        assert_eq!(b.eq_to_order(&c, order).unwrap(), Comparison::Equal);
        let d = eval_text("1/(q^(-2)*JJ(1,2))^3", order, Conductor::One).unwrap();
        assert!(d.trunc() >= order);
        assert_eq!(d.valuation(), Some(exp_int(6)));
    }

    #[test]
    fn conductor_rules() {
        assert!(matches!(
            eval_text("i*q", exp_int(3), Conductor::One).unwrap_err().root(),
            Error::ConductorMismatch(..)
        ));
        let s = eval_text("i*i", exp_int(3), Conductor::One).unwrap();
        assert_eq!(s.coeff(exp_int(0)).unwrap(), CycCoeff::from_i64(-1));
        let w = eval_text("w^3", exp(1, 2), Conductor::Three).unwrap();
        assert!(w.coeff(exp_int(0)).unwrap().is_one());
    }

    #[test]
    fn argument_kinds_are_checked() {
        let e = eval_text("j(1+q, 2)", exp_int(3), Conductor::One).unwrap_err();
        assert!(matches!(e, Error::AtSpan { start: 2, .. }), "{e:?}");
        assert!(eval_text("theta(1/2, 2, q, 1)", exp_int(3), Conductor::One).is_err());
        assert!(eval_text("Ja(-1)", exp_int(3), Conductor::One).is_err());
    }
}
