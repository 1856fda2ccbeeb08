//! Admissible characters of affine sl(2), string functions and builders for
//! the structural theorems about them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qlaurent::{exp, exp_int, fit_denom, DEFAULT_DENOM, quotient_to_order, render_exp, Exp, QSeries};
use crate::ring::{Conductor, CycCoeff};
use crate::theta::{euler, is_one_aligned, jtheta, quadratic_range, theta_nm_scaled, Monomial};

/// Admissible level `N = p'/p - 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LevelData {
    pub p: i64,
    pub pprime: i64,
}

impl LevelData {
    pub fn new(p: i64, pprime: i64) -> Result<LevelData> {
        if p < 1 || pprime < 2 {
            return Err(Error::Usage(format!(
                "level needs p >= 1 and p' >= 2, got ({p}, {pprime})"
            )));
        }
        if p.gcd(&pprime) != 1 {
            return Err(Error::Usage(format!(
                "level ({p}, {pprime}) is not admissible: gcd(p, p') != 1"
            )));
        }
        if pprime == 2 * p {
            return Err(Error::Usage(format!("level ({p}, {pprime}) has N = 0")));
        }
        Ok(LevelData { p, pprime })
    }

    pub fn n(&self) -> Exp {
        exp(self.pprime, self.p) - 2
    }

    /// `p' - 2p` when positive.
    pub fn j(&self) -> Option<i64> {
        let j = self.pprime - 2 * self.p;
        (j > 0).then_some(j)
    }
}

/// A string function `C^N_{m,ell}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StringId {
    pub level: LevelData,
    pub m: i64,
    pub ell: i64,
}

impl StringId {
    pub fn new(level: LevelData, m: i64, ell: i64) -> Result<StringId> {
        if ell < 0 {
            return Err(Error::Usage(format!("spin must be nonnegative, got {ell}")));
        }
        if (m - ell).is_odd() {
            return Err(Error::Usage(format!(
                "quantum number {m} and spin {ell} must have the same parity"
            )));
        }
        Ok(StringId { level, m, ell })
    }

    /// `s_ell - m^2/(4N)`, the lead exponent removed by normalization.
    pub fn s_norm(&self) -> Exp {
        let LevelData { p, pprime } = self.level;
        exp(-1, 8) + exp(p * (self.ell + 1).pow(2), 4 * pprime) - exp_int(self.m * self.m) / (self.level.n() * 4)
    }
}

/// `(-1)^kappa(r)` with `kappa(r) = 1` exactly when `r mod 6` is 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KappaSign {
    pub r: i64,
    pub value: i64,
}

impl KappaSign {
    pub fn of(r: i64) -> KappaSign {
        let value = if matches!(r.rem_euclid(6), 2 | 3) { -1 } else { 1 };
        KappaSign { r, value }
    }

    pub fn kappa(r: i64) -> i64 {
        i64::from(KappaSign::of(r).value == -1)
    }
}

// ---------------------------------------------------------------------------
// Characters
// ---------------------------------------------------------------------------

fn check_pole(z: &Monomial) -> Result<()> {
    if is_one_aligned(z, Exp::from_integer(1)) {
        return Err(Error::ZeroDivisor(format!("j({z}; q) vanishes identically")));
    }
    Ok(())
}

/// Weyl–Kac character `chi_ell(z; q)` at a monomial `z`, written with two
/// theta functions of nome `q^(2pp')` over `j(z; q)`.
pub fn char_weyl_kac(level: LevelData, ell: i64, z: &Monomial, order: Exp) -> Result<QSeries> {
    check_pole(z)?;
    let LevelData { p, pprime: pp } = level;
    let pre = z.half_pow(-ell)?;
    let mu = pre.exp + exp(p * (ell + 1).pow(2), 4 * pp) - exp(1, 8);
    let zpp = z.pow(-pp)?;
    let a_arg = Monomial::int(-1, exp_int(p * (ell + 1) + p * pp)).mul(&zpp)?;
    let b_arg = Monomial::int(-1, exp_int(-p * (ell + 1) + p * pp)).mul(&zpp)?;
    let zl = z.pow(ell + 1)?;
    let nome = exp_int(2 * p * pp);
    let num = |t: Exp| -> Result<QSeries> {
        let inner = t - mu;
        let a = jtheta(&a_arg, nome, inner)?;
        let b = jtheta(&b_arg, nome, inner - zl.exp)?.mul_monomial(&zl.coeff, zl.exp)?;
        a.sub(&b)?.mul_monomial(&pre.coeff, mu)
    };
    quotient_to_order(order, num, |t| jtheta(z, Exp::from_integer(1), t))
}

/// The same character as a quotient of Θ lattice sums,
/// `sum_s s Θ_{s(ell+1),p'}(z; q^p) / sum_s s Θ_{s,2}(z; q)`.
pub fn char_theta_form(level: LevelData, ell: i64, z: &Monomial, order: Exp) -> Result<QSeries> {
    check_pole(z)?;
    let LevelData { p, pprime: pp } = level;
    // numerator times z^((ell+1)/2), denominator times z^(1/2)
    let num = |t: Exp| -> Result<QSeries> {
        let shift = z.half_pow(-ell)?;
        let inner = t - shift.exp;
        let plus = theta_nm_scaled(ell + 1, pp, z, exp_int(p), ell + 1, inner)?;
        let minus = theta_nm_scaled(-(ell + 1), pp, z, exp_int(p), ell + 1, inner)?;
        plus.sub(&minus)?.mul_monomial(&shift.coeff, shift.exp)
    };
    let den = |t: Exp| -> Result<QSeries> {
        let plus = theta_nm_scaled(1, 2, z, exp_int(1), 1, t)?;
        let minus = theta_nm_scaled(-1, 2, z, exp_int(1), 1, t)?;
        plus.sub(&minus)
    };
    quotient_to_order(order, num, den)
}

// ---------------------------------------------------------------------------
// String function oracle
// ---------------------------------------------------------------------------

/// `H_K = sum_t q^t / ((q)_t (q)_(t+K))` as dense integer coefficients.
fn h_series(k: u64, len: usize) -> Vec<BigInt> {
    let mut term = vec![BigInt::zero(); len];
    if len == 0 {
        return term;
    }
    term[0] = BigInt::from(1);
    let divide = |v: &mut Vec<BigInt>, e: usize, from: usize| {
        for idx in from.max(e)..v.len() {
            let (lo, hi) = v.split_at_mut(idx);
            hi[0] += &lo[idx - e];
        }
    };
    for i in 1..=k as usize {
        divide(&mut term, i, 0);
    }
    let mut acc = term.clone();
    for t in 1..len {
        term.rotate_right(1);
        term[0] = BigInt::zero();
        divide(&mut term, t, t);
        divide(&mut term, t + k as usize, t);
        for idx in t..len {
            acc[idx] += &term[idx];
        }
    }
    acc
}

/// Memo of `H_K` series shared by every oracle call.
#[derive(Default)]
pub struct HCache {
    map: Mutex<HashMap<u64, Arc<Vec<BigInt>>>>,
}

impl HCache {
    pub fn global() -> &'static HCache {
        static CACHE: OnceLock<HCache> = OnceLock::new();
        CACHE.get_or_init(HCache::default)
    }

    fn get(&self, k: u64, len: usize) -> Arc<Vec<BigInt>> {
        if let Some(v) = self.map.lock().unwrap().get(&k) {
            if v.len() >= len {
                return v.clone();
            }
        }
        let v = Arc::new(h_series(k, len));
        let mut map = self.map.lock().unwrap();
        match map.get(&k) {
            Some(old) if old.len() >= len => old.clone(),
            _ => {
                map.insert(k, v.clone());
                v
            }
        }
    }
}

/// `(q)_inf * Cnorm_{m,ell}` through `q^t` (integer exponents only), via
/// the Fourier coefficient of the Weyl–Kac numerator against
/// `1/j(z;q) = (1/(q)_inf) sum_{a,b>=0} z^(a-b) q^b / ((q)_a (q)_b)`.
fn oracle_numerator(id: &StringId, t: i64) -> Vec<BigInt> {
    let LevelData { p, pprime: pp } = id.level;
    let (m, ell) = (id.m, id.ell);
    let len = (t + 1).max(0) as usize;
    let mut acc = vec![BigInt::zero(); len];
    if len == 0 {
        return acc;
    }
    let cache = HCache::global();
    let mut add = |lead: i64, k: i64, sign: i64| {
        let shift = lead + (-k).max(0);
        if shift > t {
            return;
        }
        let need = (t - shift + 1) as usize;
        let h = cache.get(k.unsigned_abs(), need);
        for (i, c) in h.iter().take(need).enumerate() {
            let idx = (shift + i as i64) as usize;
            if shift + (i as i64) < 0 {
                continue;
            }
            if sign > 0 {
                acc[idx] += c;
            } else {
                acc[idx] -= c;
            }
        }
    };
    let ppp = exp_int(p * pp);
    let lin = exp_int(p * (ell + 1));
    let range = |b: Exp| quadratic_range(ppp, b, Exp::zero(), exp_int(t));
    if let Some((lo, hi)) = range(lin) {
        for n in lo..=hi {
            add(p * pp * n * n + p * (ell + 1) * n, pp * n + (ell - m) / 2, 1);
        }
    }
    if let Some((lo, hi)) = range(-lin) {
        for n in lo..=hi {
            add(p * pp * n * n - p * (ell + 1) * n, pp * n - (ell + m) / 2 - 1, -1);
        }
    }
    acc
}

/// Normalized string function `Cnorm_{m,ell} = q^(-s) C_{m,ell}` through
/// `q^order`, computed by the coefficient-extraction oracle.
pub fn string_normalized(id: &StringId, order: Exp) -> Result<QSeries> {
    let t = order.floor().to_integer();
    if t < 0 {
        return Ok(QSeries::zero(1, t, Conductor::One));
    }
    let num = oracle_numerator(id, t);
    let series = QSeries::from_terms(
        1,
        t,
        Conductor::One,
        num.into_iter()
            .enumerate()
            .map(|(k, c)| (k as i64, CycCoeff::from_int(c))),
    )?;
    let euler_inv = euler(exp_int(1), exp_int(t))?.inv()?;
    series.mul(&euler_inv)
}

/// String function `C^N_{m,ell}` with its fractional lead power, through
/// `q^order`.
pub fn string_coeff_oracle(id: &StringId, order: Exp) -> Result<QSeries> {
    let s = id.s_norm();
    let norm = string_normalized(id, order - s)?;
    // integer exponents only: known up to the next integer
    let d = fit_denom(DEFAULT_DENOM, &[s, order]);
    let t = norm.trunc().floor().to_integer();
    let terms = norm.terms().map(|(e, c)| (e.to_integer() * d, c.clone()));
    Ok(QSeries::from_terms(d, (t + 1) * d - 1, norm.conductor(), terms)?.shift(s))
}

/// `q^(-s) c`, checked to lie in `Z[[q]]`.
pub fn normalize_c(id: &StringId, c: &QSeries) -> Result<QSeries> {
    let out = c.shift(-id.s_norm());
    for (e, coeff) in out.terms() {
        if !e.is_integer() || e.is_negative() {
            return Err(Error::Integrality(format!(
                "normalized C_{{{},{}}} has a term at q^{}",
                id.m,
                id.ell,
                render_exp(e)
            )));
        }
        if !(coeff.is_rational() && coeff.is_integral()) {
            return Err(Error::Integrality(format!(
                "normalized C_{{{},{}}} has coefficient {} at q^{}",
                id.m,
                id.ell,
                coeff,
                render_exp(e)
            )));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Builders: right-hand sides of the structural theorems as expression text
// ---------------------------------------------------------------------------

fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// `q^(e)` in expression syntax.
fn qp(e: Exp) -> String {
    format!("q^({})", render_exp(e))
}

fn sign_text(negative: bool) -> &'static str {
    if negative {
        "-"
    } else {
        "+"
    }
}

/// `(j(-q^(m p' + p(2r+1)); q^(2pp')) - q^(m p' - m(2r+1)) j(-q^(-m p' + p(2r+1)); q^(2pp')))`.
fn theta_pair(p: i64, pp: i64, r: i64, m: i64) -> String {
    let nome = 2 * p * pp;
    format!(
        "(j(-q^({}), {nome}) - q^({})*j(-q^({}), {nome}))",
        m * pp + p * (2 * r + 1),
        m * pp - m * (2 * r + 1),
        -m * pp + p * (2 * r + 1)
    )
}

/// Right side of the quasi-periodic relation for
/// `(q)^3_inf (C_{2jt+2s,2r} - C_{2s,2r})` at level `(p, 2p+j)`.
pub fn quasi_period_rhs(p: i64, j: i64, t: i64, s: i64, r: i64) -> Result<String> {
    if p < 1 || j < 1 || t < 0 {
        return Err(Error::Usage(format!(
            "quasi-period needs p, j >= 1 and t >= 0, got p={p}, j={j}, t={t}"
        )));
    }
    let pp = 2 * p + j;
    let lead = exp(-1, 8) + exp(p * (2 * r + 1).pow(2), 4 * pp) + exp_int(binom2(p) - p * (r - s)) - exp(p * s * s, j);
    let mut inner = Vec::new();
    for i in 1..=t {
        let qi = exp_int(-2 * p * j * binom2(i) - 2 * p * s * i);
        for m in 1..p {
            let qm = exp_int(binom2(m + 1) + m * (r - p));
            inner.push(format!(
                "{}{}*(q^({}) - q^({}))*{}",
                sign_text(m % 2 == 1),
                qp(qi + qm),
                m * (j * i + s - j),
                -m * (j * i + s),
                theta_pair(p, pp, r, m)
            ));
        }
    }
    if inner.is_empty() {
        return Ok("0".into());
    }
    Ok(format!(
        "{}{}*({})",
        if p % 2 == 1 { "-" } else { "" },
        qp(lead),
        join_terms(&inner)
    ))
}

fn join_terms(terms: &[String]) -> String {
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let (sign, body) = t.split_at(1);
        if k == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        out.push_str(body);
    }
    out
}

/// Right side of the even-spin polar-finite decomposition of
/// `chi_{2r}` at level `(p, 2p+j)`, evaluated at the monomial text `z`.
pub fn polar_finite_rhs(p: i64, j: i64, r: i64, z: &str) -> Result<String> {
    if p < 1 || j < 1 {
        return Err(Error::Usage(format!("polar-finite needs p, j >= 1, got p={p}, j={j}")));
    }
    let pp = 2 * p + j;
    let z = format!("({z})");
    let nome = 2 * p * j;
    let mut finite = Vec::new();
    let mut polar = Vec::new();
    for s in 0..j {
        finite.push(format!(
            "+{z}^({})*{}*C({p},{pp},{},{})*j(-q^({})*{z}^({j}), {nome})",
            -s,
            qp(exp(p * s * s, j)),
            2 * s,
            2 * r,
            p * (j - 2 * s)
        ));
        let lead = exp(-1, 8) + exp(p * (2 * r + 1).pow(2), 4 * pp) + exp_int(binom2(p) - p * (r - s));
        let mut ms = Vec::new();
        for m in 1..p {
            ms.push(format!(
                "{}q^({})*{}*(q^({})*m(-q^({}), -q^({})*{z}^({}), {nome}) + q^({})*m(-q^({}), -q^({})*{z}^({j}), {nome}))",
                sign_text(m % 2 == 1),
                binom2(m + 1) + m * (r - p),
                theta_pair(p, pp, r, m),
                m * s - 2 * p * s,
                j * m - 2 * p * s,
                p * (j + 2 * s),
                -j,
                -m * s,
                j * m + 2 * p * s,
                p * (j - 2 * s)
            ));
        }
        if !ms.is_empty() {
            polar.push(format!(
                "{}{}*{z}^({})*j(-q^({})*{z}^({j}), {nome})*({})",
                sign_text(p % 2 == 1),
                qp(lead),
                -s,
                p * (j - 2 * s),
                join_terms(&ms)
            ));
        }
    }
    let mut out = join_terms(&finite);
    if !polar.is_empty() {
        let _ = write!(out, " + Ja(1)^(-3)*({})", join_terms(&polar));
    }
    Ok(out)
}

/// Right side of the cross-spin identity for
/// `(q)^3_inf Cnorm_{0,2k}` at level `(p, 2p+1)`.
pub fn cross_spin_rhs(p: i64, k: i64) -> Result<String> {
    if p < 1 || k < 0 || 2 * k > 2 * p - 1 {
        return Err(Error::Usage(format!("cross-spin needs p >= 1 and 0 <= 2k <= 2p-1, got p={p}, k={k}")));
    }
    let pp = 2 * p + 1;
    let nome = 2 * p * pp;
    let mut out = format!(
        "{}Ja(1)^3*q^({})*CC({p},{pp},1,{})",
        if (p + 1) % 2 == 1 { "-" } else { "" },
        -p * (k + 1) + binom2(p + 1),
        2 * p - 1 - 2 * k
    );
    for m in 1..=p {
        // - (-1)^m ...
        let _ = write!(
            out,
            " {} q^({})*j(-q^({}), {nome})",
            if m % 2 == 1 { "+" } else { "-" },
            -m * (k + 1) + binom2(m + 1),
            -m * pp + p * (2 * p + 2 * k + 2)
        );
    }
    for m in 1..=p {
        let _ = write!(
            out,
            " {} q^({})*j(-q^({}), {nome})",
            if m % 2 == 1 { "-" } else { "+" },
            m * k + binom2(m + 1),
            -m * pp + p * (2 * p - 2 * k)
        );
    }
    Ok(out)
}

/// `sum_{0 <= m < 2N, m = ell mod 2} C_{m,ell} Θ_{m,N}(z; q)` at integral level.
pub fn theta_decomposition(p: i64, pp: i64, ell: i64, z: &str) -> Result<String> {
    let level = LevelData::new(p, pp)?;
    let n = level.n();
    if !n.is_integer() || n.is_negative() {
        return Err(Error::Usage(format!("theta decomposition needs a positive integral level, got {}", render_exp(n))));
    }
    let n = n.to_integer();
    let terms: Vec<String> = (0..2 * n)
        .filter(|m| (m - ell).is_even())
        .map(|m| format!("+C({p},{pp},{m},{ell})*theta({m},{n},{z},1)"))
        .collect();
    Ok(join_terms(&terms))
}

/// `theta_pair` sum used by the character-evaluation identities, exposed
/// for the registry builders.
pub fn j_pair_text(p: i64, pp: i64, r: i64, m: i64) -> String {
    theta_pair(p, pp, r, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlaurent::Comparison;
    use num_traits::ToPrimitive;

    fn ints(s: &QSeries, upto: i64) -> Vec<i64> {
        (0..=upto)
            .map(|k| s.coeff(exp_int(k)).unwrap().to_rational().unwrap().to_integer().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn h_series_matches_pochhammer_sum() {
        use crate::theta::{poch, PochLen};
        let order = exp_int(12);
        for k in [0u64, 1, 3] {
            let h = h_series(k, 13);
            let mut sum = QSeries::zero_to(order, Conductor::One);
            for t in 0..=12u64 {
                let a = poch(&Monomial::q_pow(exp_int(1)), exp_int(1), PochLen::Finite(t), order).unwrap();
                let b = poch(&Monomial::q_pow(exp_int(1)), exp_int(1), PochLen::Finite(t + k), order).unwrap();
                let term = a.mul(&b).unwrap().inv().unwrap().shift(exp_int(t as i64)).truncate(order);
                sum = sum.add(&term).unwrap();
            }
            let got: Vec<i64> = h.iter().map(|x| x.to_i64().unwrap()).collect();
            assert_eq!(got, ints(&sum, 12), "K={k}");
        }
    }

    #[test]
    fn level_one_partitions() {
        let id = StringId::new(LevelData::new(1, 3).unwrap(), 1, 1).unwrap();
        let c = string_normalized(&id, exp_int(5)).unwrap();
        assert_eq!(ints(&c, 5), vec![1, 1, 2, 3, 5, 7]);
        assert_eq!(id.s_norm(), exp(-1, 24));
    }

    #[test]
    fn validation() {
        assert!(LevelData::new(2, 4).is_err());
        assert!(LevelData::new(1, 2).is_err());
        let l = LevelData::new(5, 12).unwrap();
        assert_eq!(l.n(), exp(2, 5));
        assert_eq!(l.j(), Some(2));
        assert!(StringId::new(l, 1, 0).is_err());
        assert_eq!(KappaSign::of(2).value, -1);
        assert_eq!(KappaSign::kappa(5), 0);
        let id = StringId::new(LevelData::new(1, 5).unwrap(), 1, 1).unwrap();
        assert_eq!(id.s_norm(), exp(-1, 120));
    }

    #[test]
    fn normalization_integrality() {
        let id = StringId::new(LevelData::new(5, 12).unwrap(), 0, 0).unwrap();
        let c = string_coeff_oracle(&id, exp_int(20)).unwrap();
        let n = normalize_c(&id, &c).unwrap();
        assert!(n.has_integer_coefficients());
        let bad = QSeries::monomial(CycCoeff::from_i64(1), exp(1, 3), exp_int(3));
        assert!(matches!(normalize_c(&id, &bad), Err(Error::Integrality(_))));
        let unit = QSeries::monomial(CycCoeff::from_i64(1), id.s_norm(), exp_int(3));
        let one = normalize_c(&id, &unit).unwrap();
        assert_eq!(one.eq_to_order(&QSeries::one(exp_int(2)), exp_int(2)).unwrap(), Comparison::Equal);
    }

    #[test]
    fn character_routes_agree() {
        let level = LevelData::new(3, 7).unwrap();
        let z = Monomial::int(2, exp_int(1));
        for ell in [0, 2, 4] {
            let a = char_weyl_kac(level, ell, &z, exp_int(15)).unwrap();
            let b = char_theta_form(level, ell, &z, exp_int(15)).unwrap();
            assert_eq!(a.eq_to_order(&b, exp_int(15)).unwrap(), Comparison::Equal, "ell={ell}");
        }
        let z = Monomial::int(4, exp_int(2));
        let a = char_weyl_kac(level, 1, &z, exp_int(10)).unwrap();
        let b = char_theta_form(level, 1, &z, exp_int(10)).unwrap();
        assert_eq!(a.eq_to_order(&b, exp_int(10)).unwrap(), Comparison::Equal);
        assert!(matches!(
            char_weyl_kac(level, 0, &Monomial::q_pow(exp_int(1)), exp_int(3)),
            Err(Error::ZeroDivisor(_))
        ));
    }

    #[test]
    fn quasi_period_empty_sum() {
        assert_eq!(quasi_period_rhs(5, 2, 0, 0, 0).unwrap(), "0");
        assert!(quasi_period_rhs(5, 2, 1, 0, 0).unwrap().starts_with("-q^("));
    }

    #[test]
    fn order_below_lead_exponent() {
        let id = StringId::new(LevelData::new(5, 11).unwrap(), 0, 8).unwrap();
        assert!(id.s_norm() > exp_int(6));
        let c = string_coeff_oracle(&id, exp_int(6)).unwrap();
        assert!(c.is_zero());
        assert!(c.trunc() >= exp_int(6));
    }
}
