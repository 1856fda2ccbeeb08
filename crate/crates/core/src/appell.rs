//! Appell functions at monomial specializations and the bilateral
//! partial-fraction sum.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::qlaurent::{exp_num, fit_denom, floor_num, quotient_to_order, render_exp, Exp, QSeries, DEFAULT_DENOM};
use crate::ring::CycCoeff;
use crate::theta::{jtheta, quadratic_range, Monomial};

/// Parameters of `m(x, z; q^rho)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppellSpec {
    pub x: Monomial,
    pub z: Monomial,
    pub rho: Exp,
}

impl AppellSpec {
    pub fn new(x: Monomial, z: Monomial, rho: Exp) -> Result<AppellSpec> {
        if !rho.is_positive() {
            return Err(Error::Usage(format!(
                "Appell base q^{} must have a positive exponent",
                render_exp(rho)
            )));
        }
        let spec = AppellSpec { x, z, rho };
        spec.check_generic()?;
        Ok(spec)
    }

    /// The index `r` whose denominator `1 - q^(rho(r-1)) x z` vanishes.
    pub fn pole(&self) -> Result<Option<i64>> {
        let xz = self.x.mul(&self.z)?;
        if !xz.coeff.is_one() {
            return Ok(None);
        }
        let k = xz.exp / self.rho;
        Ok(k.is_integer().then(|| 1 - k.to_integer()))
    }

    fn check_generic(&self) -> Result<()> {
        if let Some(r) = self.pole()? {
            return Err(Error::NonGeneric(format!(
                "m({}, {}; q^{}) has a pole at r = {r}",
                self.x,
                self.z,
                render_exp(self.rho)
            )));
        }
        if self.z.coeff.is_one() && (self.z.exp / self.rho).is_integer() {
            return Err(Error::ZeroDivisor(format!(
                "j({}; q^{}) vanishes identically",
                self.z,
                render_exp(self.rho)
            )));
        }
        Ok(())
    }
}

/// `sum_r s_r q^(E_r) / (1 - u q^(e_r))` with `E_r = a r^2 + b r + c0`,
/// `e_r = rho r + e0`, every denominator expanded in the direction of
/// increasing exponents.
struct PfSum<'a> {
    a: Exp,
    b: Exp,
    c0: Exp,
    rho: Exp,
    e0: Exp,
    u: CycCoeff,
    sign: &'a dyn Fn(i64) -> Result<CycCoeff>,
    what: &'a str,
}

impl PfSum<'_> {
    fn eval(&self, order: Exp) -> Result<QSeries> {
        let d = fit_denom(DEFAULT_DENOM, &[self.a, self.b, self.c0, self.rho, self.e0, order]);
        let t = floor_num(order, d);
        let cond = self.u.conductor().join((self.sign)(0)?.conductor())?;
        let mut acc: BTreeMap<i64, CycCoeff> = BTreeMap::new();
        let mut push = |e: i64, c: CycCoeff| match acc.get_mut(&e) {
            Some(slot) => slot.add_assign_ref(&c),
            None => {
                acc.insert(e, c);
            }
        };
        let u_inv = self.u.inv()?;
        let Some((lo, hi)) = quadratic_range(self.a, self.b, self.c0, order) else {
            return Ok(QSeries::zero(d, t, cond));
        };
        for r in lo..=hi {
            let big = self.a * r * r + self.b * r + self.c0;
            let small = self.rho * r + self.e0;
            let s = (self.sign)(r)?;
            let en = exp_num(big, d).unwrap();
            let step = exp_num(small, d).unwrap();
            if step > 0 {
                let mut c = s;
                let mut e = en;
                while e <= t {
                    push(e, c.clone());
                    c = c.mul_unchecked(&self.u);
                    e += step;
                }
            } else if step < 0 {
                let mut c = s.neg().mul_unchecked(&u_inv);
                let mut e = en - step;
                while e <= t {
                    push(e, c.clone());
                    c = c.mul_unchecked(&u_inv);
                    e -= step;
                }
            } else {
                let denom = CycCoeff::one(cond).sub_unchecked(&self.u);
                if denom.is_zero() {
                    return Err(Error::NonGeneric(format!("{} has a pole at r = {r}", self.what)));
                }
                if en <= t {
                    push(en, s.mul_unchecked(&denom.inv()?));
                }
            }
        }
        QSeries::from_terms(d, t, cond, acc)
    }
}

fn alternating(k: i64) -> Result<CycCoeff> {
    Ok(CycCoeff::from_i64(if k.is_odd() { -1 } else { 1 }))
}

/// `m(x, z; q^rho)` truncated at `q^order`.
pub fn appell_m(spec: &AppellSpec, order: Exp) -> Result<QSeries> {
    spec.check_generic()?;
    let AppellSpec { x, z, rho } = spec;
    let cond = x.conductor().join(z.conductor())?;
    let cz = z.coeff.embed(cond)?;
    let cz_inv = cz.inv()?;
    let sign = move |r: i64| -> Result<CycCoeff> {
        let p = if r >= 0 { cz.pow(r)? } else { cz_inv.pow(-r)? };
        Ok(if r.is_odd() { p.neg() } else { p })
    };
    let what = format!("m({x}, {z}; q^{})", render_exp(*rho));
    let sum = PfSum {
        a: rho / 2,
        b: z.exp - rho / 2,
        c0: Exp::zero(),
        rho: *rho,
        e0: x.exp + z.exp - rho,
        u: x.mul(z)?.coeff.embed(cond)?,
        sign: &sign,
        what: &what,
    };
    quotient_to_order(order, |t| sum.eval(t), |t| jtheta(z, *rho, t))
}

/// `sum_k (-1)^k q^(rho k(k+1)/2) / (1 + q^(rho k + e))`.
pub fn bilateral_pf_sum(e: Exp, rho: Exp, order: Exp) -> Result<QSeries> {
    if !rho.is_positive() {
        return Err(Error::Usage(format!(
            "bilateral sum base q^{} must have a positive exponent",
            render_exp(rho)
        )));
    }
    let what = format!("bsum({}, {})", render_exp(e), render_exp(rho));
    PfSum {
        a: rho / 2,
        b: rho / 2,
        c0: Exp::zero(),
        rho,
        e0: e,
        u: CycCoeff::from_i64(-1),
        sign: &alternating,
        what: &what,
    }
    .eval(order)
}
