//! Pochhammer symbols, Jacobi theta functions, eta and the Θ lattice sums.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qlaurent::{exp_num, fit_denom, floor_num, render_exp, Dense, Exp, QSeries, DEFAULT_DENOM};
use crate::ring::{Conductor, CycCoeff};

/// `coeff * q^exp` with a nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: CycCoeff,
    pub exp: Exp,
}

impl Monomial {
    pub fn new(coeff: CycCoeff, exp: Exp) -> Result<Monomial> {
        if coeff.is_zero() {
            return Err(Error::Usage("monomial coefficient must be nonzero".into()));
        }
        Ok(Monomial { coeff, exp })
    }

    /// `q^e`.
    pub fn q_pow(e: Exp) -> Monomial {
        Monomial {
            coeff: CycCoeff::one(Conductor::One),
            exp: e,
        }
    }

    /// `c * q^0`.
    pub fn constant(c: CycCoeff) -> Result<Monomial> {
        Monomial::new(c, Exp::zero())
    }

    pub fn int(c: i64, e: Exp) -> Monomial {
        Monomial::new(CycCoeff::from_i64(c), e).expect("nonzero coefficient")
    }

    pub fn one() -> Monomial {
        Monomial::q_pow(Exp::zero())
    }

    pub fn conductor(&self) -> Conductor {
        self.coeff.conductor()
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        let cond = self.conductor().join(other.conductor())?;
        Ok(Monomial {
            coeff: self.coeff.embed(cond)?.checked_mul(&other.coeff.embed(cond)?)?,
            exp: self.exp + other.exp,
        })
    }

    pub fn inv(&self) -> Result<Monomial> {
        Ok(Monomial {
            coeff: self.coeff.inv()?,
            exp: -self.exp,
        })
    }

    pub fn neg(&self) -> Monomial {
        Monomial {
            coeff: self.coeff.neg(),
            exp: self.exp,
        }
    }

    pub fn pow(&self, n: i64) -> Result<Monomial> {
        Ok(Monomial {
            coeff: self.coeff.pow(n)?,
            exp: self.exp * n,
        })
    }

    /// `self^(h/2)`, taking the principal square root of the coefficient
    /// when `h` is odd.
    pub fn half_pow(&self, h: i64) -> Result<Monomial> {
        if h.is_even() {
            return self.pow(h / 2);
        }
        let root = self.coeff.sqrt().ok_or_else(|| {
            Error::Branch(format!("square root of {} is not in Q, Q(i) or Q(w)", self.coeff))
        })?;
        Ok(Monomial {
            coeff: root.pow(h)?,
            exp: self.exp * Exp::new(h, 2),
        })
    }

    pub fn to_series(&self, order: Exp) -> QSeries {
        QSeries::monomial(self.coeff.clone(), self.exp, order)
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})*q^({})", self.coeff, render_exp(self.exp))
    }
}

/// Length of a Pochhammer product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochLen {
    Finite(u64),
    Infinite,
}

/// Integers `n` with `a*n^2 + b*n + c <= t`, for `a > 0`.
pub fn quadratic_range(a: Exp, b: Exp, c: Exp, t: Exp) -> Option<(i64, i64)> {
    assert!(a.is_positive(), "leading coefficient must be positive");
    let f = |n: i64| a * n * n + b * n + c;
    let disc = b * b - a * (c - t) * 4;
    if disc.is_negative() {
        return None;
    }
    let af = a.to_f64()?;
    let bf = b.to_f64()?;
    let sq = disc.to_f64()?.sqrt();
    let lo0 = ((-bf - sq) / (2.0 * af)).floor() as i64;
    let hi0 = ((-bf + sq) / (2.0 * af)).ceil() as i64;
    let vertex = (-bf / (2.0 * af)).round() as i64;
    let (mut lo, mut hi) = (lo0.min(vertex), hi0.max(vertex));
    // exact correction on both ends; the parabola is convex
    while lo > i64::MIN / 4 && f(lo - 1) <= t {
        lo -= 1;
    }
    while f(lo) > t && lo <= hi {
        lo += 1;
    }
    while f(hi + 1) <= t {
        hi += 1;
    }
    while f(hi) > t && hi >= lo {
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// `(x; q^rho)_n` truncated at `q^order`.
pub fn poch(x: &Monomial, rho: Exp, n: PochLen, order: Exp) -> Result<QSeries> {
    if !rho.is_positive() {
        return Err(Error::Usage(format!("Pochhammer base q^{} must have a positive exponent", render_exp(rho))));
    }
    let count = match n {
        PochLen::Finite(k) => k,
        PochLen::Infinite => {
            if x.exp.is_negative() {
                return Err(Error::Divergent(format!("({x}; q^{})_inf", render_exp(rho))));
            }
            if x.exp.is_zero() && x.coeff.is_one() {
                return Err(Error::ZeroDivisor(format!("(1; q^{})_inf has the factor 1 - 1", render_exp(rho))));
            }
            // factors beyond the order contribute nothing below it
            let over = ((order - x.exp) / rho).floor().to_integer();
            (over.max(-1) + 1) as u64
        }
    };
    let d = fit_denom(DEFAULT_DENOM, &[x.exp, rho, order]);
    let a = exp_num(x.exp, d).unwrap();
    let r = exp_num(rho, d).unwrap();
    let step = a.gcd(&r).max(1);
    let t = floor_num(order, d);
    // negative-exponent factors pull the whole product down; compensate
    let deficit: i64 = (0..count as i64).map(|i| (a + r * i).min(0)).sum();
    let mut acc = Dense::one(d, step, t - deficit, x.conductor());
    let mut shift = 0i64;
    // clear denominators so the running product stays integral
    let (ca, cb) = x.coeff.coords();
    let v = CycCoeff::from_int(ca.denom().lcm(cb.denom()));
    let w = x.coeff.checked_mul(&v)?;
    let mut cleared = 0i64;
    for i in 0..count as i64 {
        let e = a + r * i;
        if e >= 0 && !v.is_one() {
            acc.mul_binomial_scaled(&v, &w, e);
            cleared += 1;
        } else if e >= 0 {
            acc.mul_binomial(&x.coeff, e);
        } else {
            // 1 - c q^e = -c q^e (1 - c^-1 q^-e)
            acc.mul_binomial(&x.coeff.inv()?, -e);
            acc.scale(&x.coeff.neg());
            shift += e;
        }
    }
    if cleared > 0 {
        acc.scale(&v.inv()?.pow(cleared)?);
    }
    acc.start += shift;
    acc.trunc += shift;
    Ok(acc.into_series().truncate(order))
}

/// `j(x; q^rho) = sum_n (-1)^n q^(rho n(n-1)/2) x^n`, truncated at `q^order`.
pub fn jtheta(x: &Monomial, rho: Exp, order: Exp) -> Result<QSeries> {
    if !rho.is_positive() {
        return Err(Error::Usage(format!("theta base q^{} must have a positive exponent", render_exp(rho))));
    }
    let half = rho / 2;
    let d = fit_denom(DEFAULT_DENOM, &[x.exp, half, order]);
    let t = floor_num(order, d);
    let cond = x.conductor();
    let mut terms: BTreeMap<i64, CycCoeff> = BTreeMap::new();
    if let Some((lo, hi)) = quadratic_range(half, x.exp - half, Exp::zero(), order) {
        let inv = x.coeff.inv()?;
        for n in lo..=hi {
            let e = half * n * (n - 1) + x.exp * n;
            let num = exp_num(e, d).unwrap();
            let mut c = if n >= 0 { x.coeff.pow(n)? } else { inv.pow(-n)? };
            if n.is_odd() {
                c = c.neg();
            }
            match terms.get_mut(&num) {
                Some(slot) => slot.add_assign_ref(&c),
                None => {
                    terms.insert(num, c);
                }
            }
        }
    }
    QSeries::from_terms(d, t, cond, terms)
}

/// `(q^rho; q^rho)_inf` from the pentagonal number theorem.
pub fn euler(rho: Exp, order: Exp) -> Result<QSeries> {
    if !rho.is_positive() {
        return Err(Error::Usage(format!("base q^{} must have a positive exponent", render_exp(rho))));
    }
    let d = fit_denom(DEFAULT_DENOM, &[rho, order]);
    let t = floor_num(order, d);
    let mut terms = Vec::new();
    if let Some((lo, hi)) = quadratic_range(rho * Exp::new(3, 2), -rho / 2, Exp::zero(), order) {
        for k in lo..=hi {
            let e = rho * Exp::new(k * (3 * k - 1), 2);
            let c = if k.is_odd() { -1 } else { 1 };
            terms.push((exp_num(e, d).unwrap(), CycCoeff::from_i64(c)));
        }
    }
    QSeries::from_terms(d, t, Conductor::One, terms)
}

/// Dedekind eta at `q^rho`: `q^(rho/24) (q^rho; q^rho)_inf`.
pub fn eta(rho: Exp, order: Exp) -> Result<QSeries> {
    let lead = rho / 24;
    Ok(euler(rho, order - lead)?.shift(lead))
}

/// `J_{a,b} = j(q^a; q^b)`.
pub fn jj(a: Exp, b: Exp, order: Exp) -> Result<QSeries> {
    jtheta(&Monomial::q_pow(a), b, order)
}

/// `Jbar_{a,b} = j(-q^a; q^b)`.
pub fn jb(a: Exp, b: Exp, order: Exp) -> Result<QSeries> {
    jtheta(&Monomial::int(-1, a), b, order)
}

/// `z^(h/2) Θ_{n,m}(z; q^base)` where
/// `Θ_{n,m}(z;q) = sum_{j in Z + n/2m} q^(m j^2) z^(-m j)`.
///
/// Square roots of the coefficient of `z` are needed only when `h - n` is
/// odd.
pub fn theta_nm_scaled(n: i64, m: i64, z: &Monomial, base: Exp, h: i64, order: Exp) -> Result<QSeries> {
    if m <= 0 {
        return Err(Error::Usage(format!("theta index m must be positive, got {m}")));
    }
    if !base.is_positive() {
        return Err(Error::Usage(format!("theta base q^{} must have a positive exponent", render_exp(base))));
    }
    // j = k + n/2m; exponent base*m*j^2 + (h/2 - m j) * z.exp
    let shift = Exp::new(n, 2 * m);
    let a = base * m;
    let b = base * m * shift * 2 - z.exp * m;
    let c = base * m * shift * shift + z.exp * Exp::new(h - n, 2);
    let d = fit_denom(DEFAULT_DENOM, &[a, b, c, order]);
    let t = floor_num(order, d);
    let root = if (h - n).is_odd() {
        Some(z.coeff.sqrt().ok_or_else(|| {
            Error::Branch(format!("square root of {} is not in Q, Q(i) or Q(w)", z.coeff))
        })?)
    } else {
        None
    };
    let inv = z.coeff.inv()?;
    let cond = root.as_ref().map(|r| r.conductor()).unwrap_or(z.conductor());
    let mut terms = Vec::new();
    if let Some((lo, hi)) = quadratic_range(a, b, c, order) {
        for k in lo..=hi {
            let e = a * k * k + b * k + c;
            // z power: (h - n)/2 - m k
            let coeff = match &root {
                None => {
                    let p = (h - n) / 2 - m * k;
                    if p >= 0 { z.coeff.pow(p)? } else { inv.pow(-p)? }
                }
                Some(r) => r.pow(h - n - 2 * m * k)?,
            };
            terms.push((exp_num(e, d).unwrap(), coeff));
        }
    }
    QSeries::from_terms(d, t, cond, terms)
}

/// `Θ_{n,m}(z; q^base)`.
pub fn theta_nm(n: i64, m: i64, z: &Monomial, base: Exp, order: Exp) -> Result<QSeries> {
    theta_nm_scaled(n, m, z, base, 0, order)
}

pub(crate) fn is_one_aligned(x: &Monomial, rho: Exp) -> bool {
    x.coeff.is_one() && (x.exp / rho).is_integer()
}
