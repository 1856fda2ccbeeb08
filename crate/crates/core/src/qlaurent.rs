//! Truncated Laurent series in `u = q^(1/D)` with exact coefficients.
//!
//! A [`QSeries`] stores exponent numerators over a per-series denominator `D`
//! together with an explicit truncation: every coefficient of `q^(e/D)` with
//! `e <= trunc` is known exactly, nothing above it is known.  Operations
//! track the truncation pessimistically, and every query above it fails with
//! [`Error::InsufficientPrecision`] instead of reporting a guess.

use std::cmp::{max, min};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{Conductor, CycCoeff, IntCyc};

/// Rational exponent of `q`.
pub type Exp = Rational64;

/// Starting exponent denominator; covers 1/8, 1/24, 1/40, 1/48 and 5/2.
pub const DEFAULT_DENOM: i64 = 120;

pub fn exp(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

pub fn exp_int(n: i64) -> Exp {
    Exp::from_integer(n)
}

/// Numerator of `e` over `denom`, if `e` is representable there.
pub fn exp_num(e: Exp, denom: i64) -> Option<i64> {
    let scaled = e * denom;
    scaled.is_integer().then(|| scaled.to_integer())
}

/// `lcm(base, denominators of exps)`.
pub fn fit_denom(base: i64, exps: &[Exp]) -> i64 {
    exps.iter().fold(base, |d, e| d.lcm(e.denom()))
}

pub fn floor_num(e: Exp, denom: i64) -> i64 {
    (e * denom).floor().to_integer()
}

pub fn render_exp(e: Exp) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    denom: i64,
    terms: Vec<(i64, CycCoeff)>,
    trunc: i64,
    cond: Conductor,
}

/// Outcome of comparing two series through a given order.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Comparison {
    Equal,
    Mismatch {
        exponent: Exp,
        lhs: CycCoeff,
        rhs: CycCoeff,
    },
}

impl QSeries {
    pub fn zero(denom: i64, trunc: i64, cond: Conductor) -> QSeries {
        assert!(denom > 0, "series denominator must be positive");
        QSeries {
            denom,
            terms: Vec::new(),
            trunc,
            cond,
        }
    }

    /// Zero series known through `q^order`.
    pub fn zero_to(order: Exp, cond: Conductor) -> QSeries {
        let d = fit_denom(DEFAULT_DENOM, &[order]);
        QSeries::zero(d, floor_num(order, d), cond)
    }

    /// Build from arbitrary (unsorted, possibly repeated) terms.  Terms above
    /// the truncation are dropped and coefficients are embedded in `cond`.
    pub fn from_terms<I>(denom: i64, trunc: i64, cond: Conductor, terms: I) -> Result<QSeries>
    where
        I: IntoIterator<Item = (i64, CycCoeff)>,
    {
        let mut map: BTreeMap<i64, CycCoeff> = BTreeMap::new();
        for (e, c) in terms {
            if e > trunc || c.is_zero() {
                continue;
            }
            let c = c.embed(cond)?;
            match map.get_mut(&e) {
                Some(slot) => slot.add_assign_ref(&c),
                None => {
                    map.insert(e, c);
                }
            }
        }
        Ok(QSeries {
            denom,
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            trunc,
            cond,
        })
    }

    /// Terms already sorted, unique, nonzero and in `cond`.
    pub(crate) fn from_sorted_unchecked(
        denom: i64,
        trunc: i64,
        cond: Conductor,
        terms: Vec<(i64, CycCoeff)>,
    ) -> QSeries {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|(e, c)| *e <= trunc && !c.is_zero()));
        QSeries {
            denom,
            terms,
            trunc,
            cond,
        }
    }

    /// `c * q^e` known through `q^order`.
    pub fn monomial(c: CycCoeff, e: Exp, order: Exp) -> QSeries {
        let d = fit_denom(DEFAULT_DENOM, &[e, order]);
        let cond = c.conductor();
        let num = exp_num(e, d).expect("denominator fitted");
        let trunc = floor_num(order, d);
        let terms = if num <= trunc && !c.is_zero() {
            vec![(num, c)]
        } else {
            Vec::new()
        };
        QSeries {
            denom: d,
            terms,
            trunc,
            cond,
        }
    }

    pub fn one(order: Exp) -> QSeries {
        QSeries::monomial(CycCoeff::one(Conductor::One), Exp::zero(), order)
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn conductor(&self) -> Conductor {
        self.cond
    }

    pub fn trunc_num(&self) -> i64 {
        self.trunc
    }

    /// Largest exponent whose coefficient is known.
    pub fn trunc(&self) -> Exp {
        Exp::new(self.trunc, self.denom)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exp, &CycCoeff)> + '_ {
        let d = self.denom;
        self.terms.iter().map(move |(e, c)| (Exp::new(*e, d), c))
    }

    pub fn raw_terms(&self) -> &[(i64, CycCoeff)] {
        &self.terms
    }

    pub fn nnz(&self) -> usize {
        self.terms.len()
    }

    /// No nonzero coefficient through the truncation.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exponent of the first nonzero term.
    pub fn valuation(&self) -> Option<Exp> {
        self.terms.first().map(|(e, _)| Exp::new(*e, self.denom))
    }

    /// Valuation numerator, or `trunc + 1` when nothing nonzero is known.
    fn val_bound(&self) -> i64 {
        self.terms.first().map(|(e, _)| *e).unwrap_or(self.trunc + 1)
    }

    /// Valuation, or a strict lower bound just above the truncation.
    pub fn valuation_bound(&self) -> Exp {
        Exp::new(self.val_bound(), self.denom)
    }

    /// True when every known coefficient is rational with denominator one.
    pub fn has_integer_coefficients(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, c)| c.is_rational() && c.is_integral())
    }

    /// True when every known exponent is an integer.
    pub fn has_integer_exponents(&self) -> bool {
        self.terms.iter().all(|(e, _)| e % self.denom == 0)
    }

    // -- representation changes ------------------------------------------

    /// Same series over denominator `denom`, which must be a multiple of the
    /// current one.
    pub fn with_denom(&self, denom: i64) -> QSeries {
        assert!(denom % self.denom == 0, "denominator must be a multiple");
        let k = denom / self.denom;
        if k == 1 {
            return self.clone();
        }
        QSeries {
            denom,
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
            // known through (t+1)/D exclusive = (t+1)k/D' exclusive
            trunc: (self.trunc + 1) * k - 1,
            cond: self.cond,
        }
    }

    /// Lower the denominator to `denom` (a divisor of the current one).
    /// Fails if some known exponent is not representable over `denom`.
    pub fn reduce_denom(&self, denom: i64) -> Result<QSeries> {
        if self.denom % denom != 0 {
            return Err(Error::Usage(format!(
                "cannot reduce denominator {} to {denom}",
                self.denom
            )));
        }
        let k = self.denom / denom;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if e % k != 0 {
                return Err(Error::Usage(format!(
                    "exponent {} is not representable over denominator {denom}",
                    render_exp(Exp::new(*e, self.denom))
                )));
            }
            terms.push((e / k, c.clone()));
        }
        Ok(QSeries {
            denom,
            terms,
            trunc: Integer::div_floor(&self.trunc, &k),
            cond: self.cond,
        })
    }

    pub fn embed(&self, cond: Conductor) -> Result<QSeries> {
        let joined = self.cond.join(cond)?;
        if joined == self.cond {
            return Ok(self.clone());
        }
        Ok(QSeries {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| Ok((*e, c.embed(joined)?)))
                .collect::<Result<_>>()?,
            trunc: self.trunc,
            cond: joined,
        })
    }

    /// Forget everything above `q^order`.
    pub fn truncate(&self, order: Exp) -> QSeries {
        let d = fit_denom(self.denom, &[order]);
        let s = self.with_denom(d);
        let t = min(floor_num(order, d), s.trunc);
        QSeries {
            denom: d,
            terms: s.terms.into_iter().filter(|(e, _)| *e <= t).collect(),
            trunc: t,
            cond: s.cond,
        }
    }

    fn require(&self, order: Exp) -> Result<()> {
        if order > self.trunc() {
            return Err(Error::InsufficientPrecision {
                requested: render_exp(order),
                available: render_exp(self.trunc()),
            });
        }
        Ok(())
    }

    /// Coefficient of `q^e`.
    pub fn coeff(&self, e: Exp) -> Result<CycCoeff> {
        self.require(e)?;
        let Some(num) = exp_num(e, self.denom) else {
            return Ok(CycCoeff::zero(self.cond));
        };
        Ok(self
            .terms
            .binary_search_by_key(&num, |(k, _)| *k)
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| CycCoeff::zero(self.cond)))
    }

    /// Exact comparison of all coefficients through `q^order`.
    pub fn eq_to_order(&self, other: &QSeries, order: Exp) -> Result<Comparison> {
        self.require(order)?;
        other.require(order)?;
        let (a, b) = unify(self, other)?;
        let limit = floor_num(order, a.denom);
        let mut i = a.terms.iter().take_while(|(e, _)| *e <= limit).peekable();
        let mut j = b.terms.iter().take_while(|(e, _)| *e <= limit).peekable();
        let zero = CycCoeff::zero(a.cond);
        loop {
            let (e, ca, cb) = match (i.peek(), j.peek()) {
                (None, None) => return Ok(Comparison::Equal),
                (Some((ea, ca)), Some((eb, cb))) if ea == eb => {
                    if ca != cb {
                        (*ea, ca.clone(), cb.clone())
                    } else {
                        i.next();
                        j.next();
                        continue;
                    }
                }
                (Some((ea, ca)), Some((eb, _))) if ea < eb => (*ea, ca.clone(), zero.clone()),
                (Some(_), Some((eb, cb))) => (*eb, zero.clone(), cb.clone()),
                (Some((ea, ca)), None) => (*ea, ca.clone(), zero.clone()),
                (None, Some((eb, cb))) => (*eb, zero.clone(), cb.clone()),
            };
            return Ok(Comparison::Mismatch {
                exponent: Exp::new(e, a.denom),
                lhs: ca.shrink(),
                rhs: cb.shrink(),
            });
        }
    }

    // -- arithmetic ------------------------------------------------------

    pub fn neg(&self) -> QSeries {
        QSeries {
            denom: self.denom,
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            trunc: self.trunc,
            cond: self.cond,
        }
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        let (a, b) = unify(self, other)?;
        let trunc = min(a.trunc, b.trunc);
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let mut i = a.terms.into_iter().filter(|(e, _)| *e <= trunc).peekable();
        let mut j = b.terms.into_iter().filter(|(e, _)| *e <= trunc).peekable();
        loop {
            match (i.peek(), j.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(i.next().unwrap()),
                (None, Some(_)) => out.push(j.next().unwrap()),
                (Some((ea, _)), Some((eb, _))) => {
                    if ea < eb {
                        out.push(i.next().unwrap());
                    } else if eb < ea {
                        out.push(j.next().unwrap());
                    } else {
                        let (e, mut ca) = i.next().unwrap();
                        let (_, cb) = j.next().unwrap();
                        ca.add_assign_ref(&cb);
                        if !ca.is_zero() {
                            out.push((e, ca));
                        }
                    }
                }
            }
        }
        Ok(QSeries::from_sorted_unchecked(a.denom, trunc, a.cond, out))
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.add(&other.neg())
    }

    /// Multiply by a constant.
    pub fn scale(&self, c: &CycCoeff) -> Result<QSeries> {
        let cond = self.cond.join(c.conductor())?;
        if c.is_zero() {
            return Ok(QSeries::zero(self.denom, self.trunc, cond));
        }
        Ok(QSeries {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (*e, x.mul_unchecked(c)))
                .collect(),
            trunc: self.trunc,
            cond,
        })
    }

    /// Multiply by the exact monomial `q^e`; the truncation moves with it.
    pub fn shift(&self, e: Exp) -> QSeries {
        let d = fit_denom(self.denom, &[e]);
        let s = self.with_denom(d);
        let k = exp_num(e, d).expect("denominator fitted");
        QSeries {
            denom: d,
            terms: s.terms.into_iter().map(|(x, c)| (x + k, c)).collect(),
            trunc: s.trunc + k,
            cond: s.cond,
        }
    }

    /// Multiply by the exact monomial `c * q^e`.
    pub fn mul_monomial(&self, c: &CycCoeff, e: Exp) -> Result<QSeries> {
        Ok(self.scale(c)?.shift(e))
    }

    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        let (a, b) = unify(self, other)?;
        let cond = a.cond;
        let (va, vb) = (a.val_bound(), b.val_bound());
        let trunc = min(a.trunc + vb, b.trunc + va);
        if a.terms.is_empty() || b.terms.is_empty() {
            return Ok(QSeries::zero(a.denom, trunc, cond));
        }
        let base = va + vb;
        if trunc < base {
            return Ok(QSeries::zero(a.denom, trunc, cond));
        }
        let step = {
            let g = a
                .terms
                .iter()
                .map(|(e, _)| e - va)
                .chain(b.terms.iter().map(|(e, _)| e - vb))
                .fold(0i64, |g, x| g.gcd(&x));
            if g == 0 {
                trunc - base + 1
            } else {
                g
            }
        };
        let len = ((trunc - base) / step + 1) as usize;
        let sa = lcm_denoms(&a.terms);
        let sb = lcm_denoms(&b.terms);
        let ia: Vec<(i64, IntCyc)> = a
            .terms
            .iter()
            .filter(|(e, _)| *e + vb <= trunc)
            .map(|(e, c)| (*e, c.to_int_scaled(&sa)))
            .collect();
        let ib: Vec<(i64, IntCyc)> = b
            .terms
            .iter()
            .filter(|(e, _)| *e + va <= trunc)
            .map(|(e, c)| (*e, c.to_int_scaled(&sb)))
            .collect();
        let mut acc = vec![IntCyc::default(); len];
        for (ea, xa) in &ia {
            for (eb, xb) in &ib {
                let e = ea + eb;
                if e > trunc {
                    break;
                }
                acc[((e - base) / step) as usize].fma(xa, xb, cond);
            }
        }
        let scale = sa * sb;
        let terms = acc
            .into_iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(k, x)| {
                (
                    base + k as i64 * step,
                    CycCoeff::from_int_scaled(x, &scale, cond),
                )
            })
            .collect();
        Ok(QSeries::from_sorted_unchecked(a.denom, trunc, cond, terms))
    }

    /// Multiplicative inverse.  The lead term must be known and nonzero.
    pub fn inv(&self) -> Result<QSeries> {
        let Some((v, c0)) = self.terms.first().cloned() else {
            return Err(Error::NotInvertible(format!(
                "identically zero through q^{}",
                render_exp(self.trunc())
            )));
        };
        let cond = self.cond;
        let trunc_out = self.trunc - 2 * v;
        let rel = self.trunc - v; // known relative span of the unit part
        let c0_inv = c0.inv()?;
        // unit part 1 + sum alpha_k q^(k*step)
        let step = {
            let g = self.terms.iter().fold(0i64, |g, (e, _)| g.gcd(&(e - v)));
            if g == 0 {
                rel + 1
            } else {
                g
            }
        };
        let len = (rel / step + 1) as usize;
        let alphas: Vec<(usize, CycCoeff)> = self.terms[1..]
            .iter()
            .map(|(e, c)| (((e - v) / step) as usize, c.mul_unchecked(&c0_inv)))
            .collect();
        let unit_inv: Vec<CycCoeff> = if alphas.iter().all(|(_, c)| c.is_integral()) {
            let one = BigInt::one();
            let ia: Vec<(usize, IntCyc)> = alphas
                .iter()
                .map(|(k, c)| (*k, c.to_int_scaled(&one)))
                .collect();
            let mut b: Vec<IntCyc> = Vec::with_capacity(len);
            b.push(IntCyc {
                a: BigInt::one(),
                b: BigInt::zero(),
            });
            for n in 1..len {
                let mut acc = IntCyc::default();
                for (k, x) in &ia {
                    if *k > n {
                        break;
                    }
                    acc.fma(x, &b[n - k], cond);
                }
                acc.a = -acc.a;
                acc.b = -acc.b;
                b.push(acc);
            }
            b.into_iter()
                .map(|x| CycCoeff::from_int_scaled(x, &one, cond))
                .collect()
        } else {
            let mut b: Vec<CycCoeff> = Vec::with_capacity(len);
            b.push(CycCoeff::one(cond));
            for n in 1..len {
                let mut acc = CycCoeff::zero(cond);
                for (k, x) in &alphas {
                    if *k > n {
                        break;
                    }
                    acc.add_assign_ref(&x.mul_unchecked(&b[n - k]));
                }
                b.push(acc.neg());
            }
            b
        };
        let terms = unit_inv
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (-v + k as i64 * step, c.mul_unchecked(&c0_inv)))
            .collect();
        Ok(QSeries::from_sorted_unchecked(
            self.denom, trunc_out, cond, terms,
        ))
    }

    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        self.mul(&other.inv()?)
    }

    /// Integer power; negative exponents go through [`QSeries::inv`].
    pub fn pow(&self, n: i64) -> Result<QSeries> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut k = n.unsigned_abs();
        if k == 0 {
            return Ok(QSeries {
                denom: self.denom,
                terms: vec![(0, CycCoeff::one(self.cond))]
                    .into_iter()
                    .filter(|_| self.trunc >= 0)
                    .collect(),
                trunc: self.trunc,
                cond: self.cond,
            });
        }
        let mut acc: Option<QSeries> = None;
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => sq.clone(),
                    Some(a) => a.mul(&sq)?,
                });
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc.expect("nonzero exponent"))
    }

    /// Substitute `q -> c * q^m`.
    ///
    /// With `c != 1` every known exponent must be an integer, otherwise
    /// `c^e` has no canonical value.
    pub fn substitute(&self, c: &CycCoeff, m: Exp) -> Result<QSeries> {
        if !m.is_positive() {
            return Err(Error::Usage(format!(
                "substitution exponent must be positive, got {}",
                render_exp(m)
            )));
        }
        if c.is_zero() {
            return Err(Error::Usage("substitution coefficient is zero".into()));
        }
        let cond = self.cond.join(c.conductor())?;
        if !c.is_one() {
            if let Some((e, _)) = self.terms.iter().find(|(e, _)| e % self.denom != 0) {
                return Err(Error::Ambiguous(format!(
                    "q^{} under q -> ({})*q^{}",
                    render_exp(Exp::new(*e, self.denom)),
                    c,
                    render_exp(m)
                )));
            }
        }
        let (u, w) = (*m.numer(), *m.denom());
        let denom = self.denom * w;
        let c_inv = if c.is_one() { None } else { Some(c.inv()?) };
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, x) in &self.terms {
            let x = x.embed(cond)?;
            let coeff = if c.is_one() {
                x
            } else {
                let k = e / self.denom;
                let unit = if k >= 0 {
                    c.pow(k)?
                } else {
                    c_inv.as_ref().unwrap().pow(-k)?
                };
                x.mul_unchecked(&unit.embed(cond)?)
            };
            terms.push((e * u, coeff));
        }
        let out = QSeries::from_sorted_unchecked(denom, (self.trunc + 1) * u - 1, cond, terms);
        Ok(out)
    }

    // -- serialization ---------------------------------------------------

    pub fn to_json_value(&self) -> SeriesJson {
        SeriesJson {
            denom: self.denom,
            trunc: self.trunc,
            ring: self.cond.tag().to_string(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, c.to_ring_string()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("series serializes")
    }

    pub fn from_json(text: &str) -> Result<QSeries> {
        let j: SeriesJson = serde_json::from_str(text)
            .map_err(|e| Error::Usage(format!("malformed series JSON: {e}")))?;
        QSeries::from_json_value(&j)
    }

    pub fn from_json_value(j: &SeriesJson) -> Result<QSeries> {
        if j.denom <= 0 {
            return Err(Error::Usage("series denominator must be positive".into()));
        }
        let cond = Conductor::from_tag(&j.ring)?;
        let terms = j
            .terms
            .iter()
            .map(|(e, c)| Ok((*e, CycCoeff::parse_in(c, cond)?)))
            .collect::<Result<Vec<_>>>()?;
        QSeries::from_terms(j.denom, j.trunc, cond, terms)
    }

    /// Human-readable form: `1 + q - 2*q^2 + O(q^3)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let ex = Exp::new(*e, self.denom);
            let (negative, body) = render_term(c, ex);
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if !out.is_empty() {
            out.push_str(" + ");
        }
        let _ = write!(out, "O({})", render_power(self.next_unknown()));
        out
    }

    /// First exponent above the truncation in the lattice the known terms
    /// live on (integer steps from the lead exponent).
    fn next_unknown(&self) -> Exp {
        let d = self.denom;
        let (class, step) = match self.terms.first() {
            Some((v, _)) => {
                let g = self.terms.iter().fold(d, |g, (e, _)| g.gcd(&(e - v)));
                (v.rem_euclid(g), g)
            }
            None => (0, d),
        };
        let t = self.trunc;
        let next = t + 1 + (class - (t + 1)).rem_euclid(step);
        Exp::new(next, d)
    }
}

fn lcm_denoms(terms: &[(i64, CycCoeff)]) -> BigInt {
    terms
        .iter()
        .fold(BigInt::one(), |l, (_, c)| l.lcm(&c.denom_lcm()))
}

fn render_power(e: Exp) -> String {
    if e.is_zero() {
        "1".into()
    } else if e.is_one() {
        "q".into()
    } else if e.is_integer() && e.is_positive() {
        format!("q^{}", e)
    } else {
        format!("q^({})", render_exp(e))
    }
}

/// Returns (leading minus, body) for one term.
fn render_term(c: &CycCoeff, e: Exp) -> (bool, String) {
    let power = render_power(e);
    if let Some(r) = c.to_rational() {
        let neg = r.is_negative();
        let mag = r.abs();
        let body = if e.is_zero() {
            mag.to_string()
        } else if mag.is_one() {
            power
        } else {
            format!("{}*{}", mag, power)
        };
        (neg, body)
    } else if e.is_zero() {
        (false, format!("({})", c))
    } else {
        (false, format!("({})*{}", c, power))
    }
}

/// Bring two series to a common denominator and field.
pub fn unify(a: &QSeries, b: &QSeries) -> Result<(QSeries, QSeries)> {
    let cond = a.cond.join(b.cond)?;
    let d = a.denom.lcm(&b.denom);
    Ok((a.with_denom(d).embed(cond)?, b.with_denom(d).embed(cond)?))
}

/// JSON wire form of a series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub denom: i64,
    pub trunc: i64,
    pub ring: String,
    pub terms: Vec<(i64, String)>,
}

pub fn qs_add(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    a.add(b)
}

pub fn qs_mul(a: &QSeries, b: &QSeries) -> Result<QSeries> {
    a.mul(b)
}

pub fn qs_inv(a: &QSeries) -> Result<QSeries> {
    a.inv()
}

pub fn qs_substitute(a: &QSeries, c: &CycCoeff, m: Exp) -> Result<QSeries> {
    a.substitute(c, m)
}

pub fn qs_coeff(a: &QSeries, e: Exp) -> Result<CycCoeff> {
    a.coeff(e)
}

pub fn qs_eq_to_order(a: &QSeries, b: &QSeries, order: Exp) -> Result<Comparison> {
    a.eq_to_order(b, order)
}

/// Compute `num / den` with coefficients guaranteed through `q^order`.
///
/// Both sides are produced on demand at a requested order.  The divisor is
/// evaluated first to learn its valuation, then both sides are recomputed to
/// exactly the precision the quotient needs.
pub fn quotient_to_order<N, D>(order: Exp, num: N, den: D) -> Result<QSeries>
where
    N: Fn(Exp) -> Result<QSeries>,
    D: Fn(Exp) -> Result<QSeries>,
{
    let mut d = den(order)?;
    let mut probe = order;
    let mut widen = max(Exp::one(), order.abs());
    for _ in 0..6 {
        if !d.is_zero() {
            break;
        }
        probe += widen;
        widen *= 2;
        d = den(probe)?;
    }
    let vd = d.valuation().ok_or_else(|| {
        Error::NotInvertible(format!(
            "divisor vanishes through q^{}",
            render_exp(d.trunc())
        ))
    })?;
    let n = num(order + vd)?;
    let vn = n.valuation_bound();
    let need = order + vd * 2 - vn;
    if d.trunc() < need {
        d = den(need)?;
    }
    let q = n.mul(&d.inv()?)?;
    q.require(order)?;
    Ok(q)
}

// ---------------------------------------------------------------------------
// Dense working buffers for products and quotients by binomials.
// ---------------------------------------------------------------------------

/// Dense coefficient buffer `coeffs[k] <-> q^((start + k*step)/denom)`,
/// known through numerator `trunc`.
#[derive(Clone, Debug)]
pub(crate) struct Dense {
    pub denom: i64,
    pub start: i64,
    pub step: i64,
    pub trunc: i64,
    pub cond: Conductor,
    pub coeffs: Vec<CycCoeff>,
}

impl Dense {
    /// The constant 1 known through numerator `trunc`.
    pub fn one(denom: i64, step: i64, trunc: i64, cond: Conductor) -> Dense {
        let mut d = Dense::zero(denom, 0, step, trunc, cond);
        if !d.coeffs.is_empty() {
            d.coeffs[0] = CycCoeff::one(cond);
        }
        d
    }

    pub fn zero(denom: i64, start: i64, step: i64, trunc: i64, cond: Conductor) -> Dense {
        let len = if trunc >= start {
            ((trunc - start) / step + 1) as usize
        } else {
            0
        };
        Dense {
            denom,
            start,
            step,
            trunc,
            cond,
            coeffs: vec![CycCoeff::zero(cond); len],
        }
    }

    fn embed(&mut self, c: &CycCoeff) {
        if let Ok(j) = self.cond.join(c.conductor()) {
            if j != self.cond {
                self.cond = j;
                for x in &mut self.coeffs {
                    *x = x.embed(j).expect("joined conductor");
                }
            }
        }
    }

    /// Multiply every coefficient by `c`.
    pub fn scale(&mut self, c: &CycCoeff) {
        self.embed(c);
        for x in &mut self.coeffs {
            *x = term_times(x, c);
        }
    }

    /// Multiply in place by `(1 - c*q^e)` for `e >= 0` a multiple of `step`.
    pub fn mul_binomial(&mut self, c: &CycCoeff, e: i64) {
        debug_assert!(e >= 0 && e % self.step == 0);
        self.embed(c);
        let s = (e / self.step) as usize;
        if s == 0 {
            let f = CycCoeff::one(self.cond).sub_unchecked(c);
            for x in &mut self.coeffs {
                *x = x.mul_unchecked(&f);
            }
            return;
        }
        let neg = c.neg();
        for k in (s..self.coeffs.len()).rev() {
            let t = term_times(&self.coeffs[k - s], &neg);
            self.coeffs[k].add_assign_ref(&t);
        }
    }

    /// Multiply in place by `(v - w*q^e)` for `e >= 0` a multiple of `step`.
    pub fn mul_binomial_scaled(&mut self, v: &CycCoeff, w: &CycCoeff, e: i64) {
        debug_assert!(e >= 0 && e % self.step == 0);
        self.embed(v);
        self.embed(w);
        let s = (e / self.step) as usize;
        if s == 0 {
            let f = v.sub_unchecked(w);
            for x in &mut self.coeffs {
                *x = x.mul_unchecked(&f);
            }
            return;
        }
        let neg = w.neg();
        for k in (s..self.coeffs.len()).rev() {
            let t = term_times(&self.coeffs[k - s], &neg);
            let head = term_times(&self.coeffs[k], v);
            self.coeffs[k] = head;
            self.coeffs[k].add_assign_ref(&t);
        }
        let low = s.min(self.coeffs.len());
        for x in &mut self.coeffs[..low] {
            *x = term_times(x, v);
        }
    }

    /// Divide in place by `(1 - c*q^e)`.  Negative `e` expands in inverse
    /// powers, which moves the buffer up by `|e|`.
    pub fn div_binomial(&mut self, c: &CycCoeff, e: i64) -> Result<()> {
        debug_assert!(e % self.step == 0);
        self.embed(c);
        if e == 0 {
            let f = CycCoeff::one(self.cond).sub_unchecked(c);
            if f.is_zero() {
                return Err(Error::NonGeneric("factor (1 - 1) in a denominator".into()));
            }
            let fi = f.inv()?;
            for x in &mut self.coeffs {
                *x = x.mul_unchecked(&fi);
            }
            return Ok(());
        }
        if e < 0 {
            // 1/(1 - w) = -w^-1 / (1 - w^-1)
            let ci = c.inv()?;
            let minus = ci.neg();
            for x in &mut self.coeffs {
                *x = x.mul_unchecked(&minus);
            }
            self.start -= e;
            self.trunc -= e;
            return self.div_binomial(&ci, -e);
        }
        let s = (e / self.step) as usize;
        for k in s..self.coeffs.len() {
            let t = term_times(&self.coeffs[k - s], c);
            self.coeffs[k].add_assign_ref(&t);
        }
        Ok(())
    }

    /// `acc += shift * coeff * self` where `shift` is an exponent numerator.
    pub fn add_into(&self, acc: &mut Dense, coeff: &CycCoeff, shift: i64) {
        acc.embed(coeff);
        acc.embed(&CycCoeff::zero(self.cond));
        for (k, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let e = self.start + k as i64 * self.step + shift;
            if e > acc.trunc {
                break;
            }
            debug_assert!((e - acc.start) % acc.step == 0 && e >= acc.start);
            let idx = ((e - acc.start) / acc.step) as usize;
            acc.coeffs[idx].add_assign_ref(&term_times(x, coeff));
        }
    }

    pub fn into_series(self) -> QSeries {
        let Dense {
            denom,
            start,
            step,
            trunc,
            cond,
            coeffs,
        } = self;
        let terms = coeffs
            .into_iter()
            .enumerate()
            .map(|(k, c)| (start + k as i64 * step, c))
            .filter(|(e, c)| !c.is_zero() && *e <= trunc)
            .collect();
        QSeries::from_sorted_unchecked(denom, trunc, cond, terms)
    }
}

#[inline]
fn term_times(x: &CycCoeff, c: &CycCoeff) -> CycCoeff {
    if c.is_one() {
        x.clone()
    } else if c.is_rational() && c.to_rational().is_some_and(|r| (-r).is_one()) {
        x.neg()
    } else {
        x.mul_unchecked(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[(i64, i64)], order: i64) -> QSeries {
        QSeries::from_terms(
            1,
            order,
            Conductor::One,
            coeffs.iter().map(|(e, c)| (*e, CycCoeff::from_i64(*c))),
        )
        .unwrap()
    }

    #[test]
    fn cyclotomic_product() {
        let a = poly(&[(0, 1), (1, -1)], 10);
        let b = poly(&[(0, 1), (1, 1), (2, 1)], 10);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.eq_to_order(&poly(&[(0, 1), (3, -1)], 10), exp_int(10)).unwrap(), Comparison::Equal);
    }

    #[test]
    fn fractional_product_upgrades_denominator() {
        let a = QSeries::monomial(CycCoeff::from_i64(1), exp(1, 8), exp_int(2));
        let b = QSeries::monomial(CycCoeff::from_i64(1), exp(3, 8), exp_int(2));
        let p = a.mul(&b).unwrap();
        assert_eq!(p.valuation(), Some(exp(1, 2)));
        assert_eq!(p.nnz(), 1);
    }

    #[test]
    fn cancellation_gives_empty_terms() {
        let a = poly(&[(0, 1), (1, 1)], 5);
        let s = a.add(&a.neg()).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.trunc(), exp_int(5));
    }

    #[test]
    fn geometric_inverse() {
        let a = poly(&[(0, 1), (1, -1)], 12);
        let inv = a.inv().unwrap();
        for k in 0..=12 {
            assert_eq!(inv.coeff(exp_int(k)).unwrap(), CycCoeff::from_i64(1));
        }
        let b = poly(&[(2, 1), (3, -1)], 12);
        let ib = b.inv().unwrap();
        assert_eq!(ib.valuation(), Some(exp_int(-2)));
        assert_eq!(ib.trunc(), exp_int(8));
        assert!(matches!(QSeries::zero(1, 5, Conductor::One).inv(), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn substitutions() {
        let a = poly(&[(0, 1), (1, 1), (3, 1)], 10);
        let s = a.substitute(&CycCoeff::from_i64(-1), exp_int(2)).unwrap();
        let expect = poly(&[(0, 1), (2, -1), (6, -1)], 21);
        assert_eq!(s.eq_to_order(&expect, exp_int(21)).unwrap(), Comparison::Equal);

        let b = poly(&[(0, 1), (1, 1)], 5);
        let s = b.substitute(&CycCoeff::omega(), exp_int(1)).unwrap();
        assert_eq!(s.conductor(), Conductor::Three);
        assert_eq!(s.coeff(exp_int(1)).unwrap(), CycCoeff::omega());

        let h = QSeries::monomial(CycCoeff::from_i64(1), exp(1, 2), exp_int(3));
        assert!(matches!(
            h.substitute(&CycCoeff::from_i64(-1), exp_int(1)),
            Err(Error::Ambiguous(_))
        ));
    }

    #[test]
    fn comparisons() {
        let a = poly(&[(0, 1), (1, 1)], 5);
        let b = poly(&[(0, 1), (1, 2)], 5);
        assert_eq!(
            a.eq_to_order(&b, exp_int(5)).unwrap(),
            Comparison::Mismatch {
                exponent: exp_int(1),
                lhs: CycCoeff::from_i64(1),
                rhs: CycCoeff::from_i64(2)
            }
        );
        assert!(matches!(
            a.eq_to_order(&b, exp_int(6)),
            Err(Error::InsufficientPrecision { .. })
        ));
        let g = poly(&[(0, 1), (1, -1)], 20).inv().unwrap();
        assert_eq!(g.coeff(exp_int(3)).unwrap(), CycCoeff::from_i64(1));
    }

    #[test]
    fn rendering() {
        let a = poly(&[(0, 1), (1, 1), (2, -2), (3, 3)], 3);
        assert_eq!(a.render(), "1 + q - 2*q^2 + 3*q^3 + O(q^4)");
        let h = QSeries::monomial(CycCoeff::from_i64(1), exp(1, 8), exp_int(1));
        assert_eq!(h.render(), "q^(1/8) + O(q^(9/8))");
        let z = QSeries::zero(1, 4, Conductor::One);
        assert_eq!(z.render(), "O(q^5)");
    }

    #[test]
    fn json_round_trip() {
        let a = poly(&[(0, 1), (1, -3)], 4)
            .substitute(&CycCoeff::i(), exp_int(1))
            .unwrap();
        let text = a.to_json();
        assert_eq!(QSeries::from_json(&text).unwrap(), a);
        assert!(text.starts_with("{\"denom\":1,\"trunc\":4,\"ring\":\"Qi\""));
    }

    #[test]
    fn dense_binomials() {
        let mut d = Dense::one(1, 1, 10, Conductor::One);
        d.div_binomial(&CycCoeff::from_i64(1), 1).unwrap();
        d.mul_binomial(&CycCoeff::from_i64(1), 1);
        let s = d.into_series();
        assert_eq!(s.nnz(), 1);
        let mut d = Dense::one(1, 1, 10, Conductor::One);
        d.div_binomial(&CycCoeff::from_i64(2), -2).unwrap();
        // 1/(1 - 2q^-2) = -(1/2)q^2 / (1 - q^2/2)
        let s = d.into_series();
        assert_eq!(s.valuation(), Some(exp_int(2)));
        assert_eq!(s.coeff(exp_int(4)).unwrap(), CycCoeff::from_ratio(-1, 4).unwrap());
    }
}
