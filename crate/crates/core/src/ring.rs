//! Exact coefficients in Q, Q(i) and Q(omega).
//!
//! An element of `Q(zeta_n)` for `n` in {1, 3, 4} is stored in the power basis
//! `{1, zeta_n}` modulo the n-th cyclotomic polynomial:
//!
//! * `n = 1`: a single rational coordinate,
//! * `n = 3`: `a + b*w` with `w^2 = -1 - w`,
//! * `n = 4`: `a + b*i` with `i^2 = -1`.
//!
//! Coordinates are `BigRational`s, which are always kept reduced, so the
//! coordinate vector is a canonical form and derived equality is field
//! equality.  Integer-valued coordinates take a fast path that never calls
//! `gcd`, since nearly all series coefficients are integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Which cyclotomic field a coefficient lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Conductor {
    One,
    Three,
    Four,
}

impl Conductor {
    pub fn n(self) -> u8 {
        match self {
            Conductor::One => 1,
            Conductor::Three => 3,
            Conductor::Four => 4,
        }
    }

    pub fn from_n(n: i64) -> Result<Conductor> {
        match n {
            1 => Ok(Conductor::One),
            3 => Ok(Conductor::Three),
            4 => Ok(Conductor::Four),
            _ => Err(Error::Usage(format!(
                "unsupported conductor {n}; expected 1, 3 or 4"
            ))),
        }
    }

    /// Smallest supported field containing both, if any.
    pub fn join(self, other: Conductor) -> Result<Conductor> {
        match (self, other) {
            (a, b) if a == b => Ok(a),
            (Conductor::One, b) => Ok(b),
            (a, Conductor::One) => Ok(a),
            (a, b) => Err(Error::ConductorMismatch(a.n(), b.n())),
        }
    }

    /// Short ring tag used by the JSON series format.
    pub fn tag(self) -> &'static str {
        match self {
            Conductor::One => "Q",
            Conductor::Three => "Qw",
            Conductor::Four => "Qi",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Conductor> {
        match tag {
            "Q" => Ok(Conductor::One),
            "Qw" => Ok(Conductor::Three),
            "Qi" => Ok(Conductor::Four),
            _ => Err(Error::Usage(format!("unknown ring tag `{tag}`"))),
        }
    }
}

impl fmt::Display for Conductor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Arithmetic operation selector for [`cyc_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycCoeff {
    cond: Conductor,
    c0: BigRational,
    c1: BigRational,
}

// ---------------------------------------------------------------------------
// Rational helpers with an integer fast path.
// ---------------------------------------------------------------------------

#[inline]
fn is_int(r: &BigRational) -> bool {
    r.denom().is_one()
}

#[inline]
pub(crate) fn int(n: BigInt) -> BigRational {
    BigRational::new_raw(n, BigInt::one())
}

#[inline]
fn radd(a: &BigRational, b: &BigRational) -> BigRational {
    if is_int(a) && is_int(b) {
        int(a.numer() + b.numer())
    } else {
        a + b
    }
}

#[inline]
fn rsub(a: &BigRational, b: &BigRational) -> BigRational {
    if is_int(a) && is_int(b) {
        int(a.numer() - b.numer())
    } else {
        a - b
    }
}

#[inline]
fn rmul(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() || b.is_zero() {
        return BigRational::zero();
    }
    if is_int(a) && is_int(b) {
        int(a.numer() * b.numer())
    } else {
        a * b
    }
}

#[inline]
fn radd_assign(a: &mut BigRational, b: &BigRational) {
    if b.is_zero() {
        return;
    }
    if is_int(a) && is_int(b) {
        let n = a.numer() + b.numer();
        *a = int(n);
    } else {
        *a = &*a + b;
    }
}

impl CycCoeff {
    pub fn zero(cond: Conductor) -> CycCoeff {
        CycCoeff {
            cond,
            c0: BigRational::zero(),
            c1: BigRational::zero(),
        }
    }

    pub fn one(cond: Conductor) -> CycCoeff {
        CycCoeff::from_rational(BigRational::one(), cond)
    }

    pub fn from_i64(n: i64) -> CycCoeff {
        CycCoeff::from_rational(int(BigInt::from(n)), Conductor::One)
    }

    pub fn from_int(n: BigInt) -> CycCoeff {
        CycCoeff::from_rational(int(n), Conductor::One)
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<CycCoeff> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(CycCoeff::from_rational(
            BigRational::new(num.into(), den.into()),
            Conductor::One,
        ))
    }

    pub fn from_rational(r: BigRational, cond: Conductor) -> CycCoeff {
        CycCoeff {
            cond,
            c0: r,
            c1: BigRational::zero(),
        }
    }

    /// `a + b*zeta_n`.  For `n = 1` the second coordinate must be zero.
    pub fn from_coords(cond: Conductor, a: BigRational, b: BigRational) -> Result<CycCoeff> {
        if cond == Conductor::One && !b.is_zero() {
            return Err(Error::Usage(
                "a rational coefficient has no second coordinate".into(),
            ));
        }
        Ok(CycCoeff { cond, c0: a, c1: b })
    }

    /// The Gaussian unit `i`.
    pub fn i() -> CycCoeff {
        CycCoeff {
            cond: Conductor::Four,
            c0: BigRational::zero(),
            c1: BigRational::one(),
        }
    }

    /// The primitive cube root of unity `w = exp(2*pi*i/3)`.
    pub fn omega() -> CycCoeff {
        CycCoeff {
            cond: Conductor::Three,
            c0: BigRational::zero(),
            c1: BigRational::one(),
        }
    }

    pub fn conductor(&self) -> Conductor {
        self.cond
    }

    pub fn coords(&self) -> (&BigRational, &BigRational) {
        (&self.c0, &self.c1)
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.c1.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_one() && self.c1.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.c1.is_zero()
    }

    /// True when both coordinates are integers.
    pub fn is_integral(&self) -> bool {
        is_int(&self.c0) && is_int(&self.c1)
    }

    pub fn to_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.c0)
    }

    /// Embed into a (possibly larger) field.
    pub fn embed(&self, cond: Conductor) -> Result<CycCoeff> {
        let joined = self.cond.join(cond)?;
        if joined != cond {
            return Err(Error::ConductorMismatch(self.cond.n(), cond.n()));
        }
        let mut out = self.clone();
        out.cond = cond;
        Ok(out)
    }

    /// Drop to the smallest conductor that holds the value.
    pub fn shrink(&self) -> CycCoeff {
        if self.is_rational() {
            CycCoeff::from_rational(self.c0.clone(), Conductor::One)
        } else {
            self.clone()
        }
    }

    fn check_same(&self, other: &CycCoeff) -> Result<()> {
        if self.cond != other.cond {
            return Err(Error::ConductorMismatch(self.cond.n(), other.cond.n()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &CycCoeff) -> Result<CycCoeff> {
        self.check_same(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &CycCoeff) -> Result<CycCoeff> {
        self.check_same(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn checked_mul(&self, other: &CycCoeff) -> Result<CycCoeff> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn joined(&self, other: &CycCoeff) -> Conductor {
        self.cond
            .join(other.cond)
            .unwrap_or_else(|_| panic!("mixed conductors {} and {}", self.cond, other.cond))
    }

    pub(crate) fn add_unchecked(&self, other: &CycCoeff) -> CycCoeff {
        CycCoeff {
            cond: self.joined(other),
            c0: radd(&self.c0, &other.c0),
            c1: radd(&self.c1, &other.c1),
        }
    }

    pub(crate) fn sub_unchecked(&self, other: &CycCoeff) -> CycCoeff {
        CycCoeff {
            cond: self.joined(other),
            c0: rsub(&self.c0, &other.c0),
            c1: rsub(&self.c1, &other.c1),
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &CycCoeff) -> CycCoeff {
        let cond = self.joined(other);
        if self.c1.is_zero() {
            return CycCoeff {
                cond,
                c0: rmul(&self.c0, &other.c0),
                c1: rmul(&self.c0, &other.c1),
            };
        }
        if other.c1.is_zero() {
            return CycCoeff {
                cond,
                c0: rmul(&self.c0, &other.c0),
                c1: rmul(&self.c1, &other.c0),
            };
        }
        let (a, b, c, d) = (&self.c0, &self.c1, &other.c0, &other.c1);
        let ac = rmul(a, c);
        let bd = rmul(b, d);
        let cross = radd(&rmul(a, d), &rmul(b, c));
        match cond {
            // (a + bi)(c + di) = (ac - bd) + (ad + bc)i
            Conductor::Four => CycCoeff {
                cond,
                c0: rsub(&ac, &bd),
                c1: cross,
            },
            // (a + bw)(c + dw) = (ac - bd) + (ad + bc - bd)w
            Conductor::Three => CycCoeff {
                cond,
                c0: rsub(&ac, &bd),
                c1: rsub(&cross, &bd),
            },
            Conductor::One => unreachable!("rational element with a second coordinate"),
        }
    }

    /// `self += other` (mixed conductors are joined).
    pub(crate) fn add_assign_ref(&mut self, other: &CycCoeff) {
        if self.cond != other.cond {
            self.cond = self.joined(other);
        }
        radd_assign(&mut self.c0, &other.c0);
        radd_assign(&mut self.c1, &other.c1);
    }

    pub fn neg(&self) -> CycCoeff {
        CycCoeff {
            cond: self.cond,
            c0: -self.c0.clone(),
            c1: -self.c1.clone(),
        }
    }

    /// Multiplicative inverse by the closed-form norm formula.
    pub fn inv(&self) -> Result<CycCoeff> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (a, b) = (&self.c0, &self.c1);
        match self.cond {
            Conductor::One => Ok(CycCoeff::from_rational(a.recip(), Conductor::One)),
            Conductor::Four => {
                // 1/(a + bi) = (a - bi)/(a^2 + b^2)
                let norm = a * a + b * b;
                Ok(CycCoeff {
                    cond: Conductor::Four,
                    c0: a / &norm,
                    c1: -(b / &norm),
                })
            }
            Conductor::Three => {
                // conj(a + bw) = (a - b) - bw, norm a^2 - ab + b^2
                let norm = a * a - a * b + b * b;
                Ok(CycCoeff {
                    cond: Conductor::Three,
                    c0: (a - b) / &norm,
                    c1: -(b / &norm),
                })
            }
        }
    }

    pub fn div(&self, other: &CycCoeff) -> Result<CycCoeff> {
        Ok(self.mul_unchecked(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<CycCoeff> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = CycCoeff::one(self.cond);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul_unchecked(&sq);
            }
        }
        Ok(acc)
    }

    /// Multiplicative order if the element is a root of unity.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        let mut x = self.clone();
        for k in 1..=12 {
            if x.is_one() {
                return Some(k);
            }
            x = x.mul_unchecked(self);
        }
        None
    }

    /// Principal square root when it lies in Q, Q(i) or Q(w).
    pub fn sqrt(&self) -> Option<CycCoeff> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if self.is_rational() {
            let r = &self.c0;
            let root = rational_sqrt(&r.abs())?;
            if r.is_positive() {
                return Some(CycCoeff::from_rational(root, self.cond));
            }
            if self.cond == Conductor::Three {
                return None;
            }
            return Some(CycCoeff {
                cond: Conductor::Four,
                c0: BigRational::zero(),
                c1: root,
            });
        }
        // Non-rational units: w -> -w^2 = 1 + w, w^2 = -1 - w -> -w.
        match self.cond {
            Conductor::Three => {
                let w = CycCoeff::omega();
                let w2 = w.mul_unchecked(&w);
                if *self == w {
                    Some(w2.neg())
                } else if *self == w2 {
                    Some(w.neg())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Canonical serialization: `a/b`, `a/b+c/d*i`, `a/b+c/d*w`; zero
    /// components are omitted and the zero element is `0`.
    pub fn to_ring_string(&self) -> String {
        let unit = match self.cond {
            Conductor::Four => "i",
            Conductor::Three => "w",
            Conductor::One => "",
        };
        let mut s = String::new();
        if !self.c0.is_zero() {
            s.push_str(&self.c0.to_string());
        }
        if !self.c1.is_zero() {
            if s.is_empty() {
                s.push_str(&self.c1.to_string());
            } else if self.c1.is_negative() {
                s.push('-');
                s.push_str(&(-self.c1.clone()).to_string());
            } else {
                s.push('+');
                s.push_str(&self.c1.to_string());
            }
            s.push('*');
            s.push_str(unit);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    /// Parse the canonical serialization.  The field is inferred from the
    /// unit suffix; a plain rational parses into `cond`.
    pub fn parse_in(text: &str, cond: Conductor) -> Result<CycCoeff> {
        let t = text.trim();
        let bad = || Error::Usage(format!("malformed coefficient `{text}`"));
        let (unit_cond, body) = if let Some(b) = t.strip_suffix("*i") {
            (Some(Conductor::Four), b)
        } else if let Some(b) = t.strip_suffix("*w") {
            (Some(Conductor::Three), b)
        } else {
            (None, t)
        };
        let Some(uc) = unit_cond else {
            return Ok(CycCoeff::from_rational(parse_rational(t).ok_or_else(bad)?, cond));
        };
        // split "a/b+c/d" at the sign that starts the second coordinate
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| bytes[k] == b'+' || bytes[k] == b'-');
        let (c0, c1) = match split {
            Some(k) => {
                let first = parse_rational(&body[..k]).ok_or_else(bad)?;
                let second_txt = if bytes[k] == b'+' { &body[k + 1..] } else { &body[k..] };
                (first, parse_rational(second_txt).ok_or_else(bad)?)
            }
            None => (BigRational::zero(), parse_rational(body).ok_or_else(bad)?),
        };
        let field = uc.join(cond)?;
        CycCoeff::from_coords(field, c0, c1)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n.trim()).ok()?;
    let d = BigInt::from_str(d.trim()).ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

fn bigint_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = bigint_sqrt(r.numer())?;
    let d = bigint_sqrt(r.denom())?;
    Some(BigRational::new(n, d))
}

impl fmt::Display for CycCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ring_string())
    }
}

impl fmt::Debug for CycCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.to_ring_string(), self.cond)
    }
}

impl FromStr for CycCoeff {
    type Err = Error;
    fn from_str(s: &str) -> Result<CycCoeff> {
        CycCoeff::parse_in(s, Conductor::One)
    }
}

/// Checked arithmetic on two coefficients of the same field.
pub fn cyc_arith(a: &CycCoeff, b: &CycCoeff, op: CycOp) -> Result<CycCoeff> {
    match op {
        CycOp::Add => a.checked_add(b),
        CycOp::Sub => a.checked_sub(b),
        CycOp::Mul => a.checked_mul(b),
    }
}

pub fn cyc_inv(a: &CycCoeff) -> Result<CycCoeff> {
    a.inv()
}

/// Integer coordinates used by the series kernels after clearing
/// denominators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct IntCyc {
    pub a: BigInt,
    pub b: BigInt,
}

impl IntCyc {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `self += x * y` in the given field.
    #[inline]
    pub fn fma(&mut self, x: &IntCyc, y: &IntCyc, cond: Conductor) {
        match cond {
            Conductor::One => self.a += &x.a * &y.a,
            _ => {
                let bd = &x.b * &y.b;
                self.a += &x.a * &y.a;
                self.a -= &bd;
                self.b += &x.a * &y.b;
                self.b += &x.b * &y.a;
                if cond == Conductor::Three {
                    self.b -= &bd;
                }
            }
        }
    }
}

impl CycCoeff {
    /// Least common multiple of the coordinate denominators.
    pub(crate) fn denom_lcm(&self) -> BigInt {
        self.c0.denom().lcm(self.c1.denom())
    }

    /// `self * scale` as integer coordinates; `scale` must clear denominators.
    pub(crate) fn to_int_scaled(&self, scale: &BigInt) -> IntCyc {
        let conv = |r: &BigRational| -> BigInt {
            if r.is_zero() {
                BigInt::zero()
            } else if r.denom().is_one() {
                r.numer() * scale
            } else {
                r.numer() * (scale / r.denom())
            }
        };
        IntCyc {
            a: conv(&self.c0),
            b: conv(&self.c1),
        }
    }

    /// `x / scale` back to reduced coordinates.
    pub(crate) fn from_int_scaled(x: IntCyc, scale: &BigInt, cond: Conductor) -> CycCoeff {
        let conv = |n: BigInt| -> BigRational {
            if scale.is_one() || n.is_zero() {
                int(n)
            } else {
                BigRational::new(n, scale.clone())
            }
        };
        CycCoeff {
            cond,
            c0: conv(x.a),
            c1: conv(x.b),
        }
    }
}
