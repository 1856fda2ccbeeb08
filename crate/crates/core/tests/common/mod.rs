//! Naive dense integer series used as independent oracles.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use qseries::qlaurent::{exp_int, Exp};
use qseries::QSeries;

/// Coefficients of q^0 ..= q^t.
pub type Dense = Vec<BigInt>;

pub fn zero(t: usize) -> Dense {
    vec![BigInt::zero(); t + 1]
}

pub fn one(t: usize) -> Dense {
    let mut v = zero(t);
    v[0] = BigInt::one();
    v
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let t = a.len().min(b.len()) - 1;
    let mut out = zero(t);
    for (i, x) in a.iter().enumerate().take(t + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(t + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Inverse of a series with constant term 1.
pub fn inv(a: &Dense) -> Dense {
    assert!(a[0].is_one());
    let t = a.len() - 1;
    let mut out = zero(t);
    out[0] = BigInt::one();
    for n in 1..=t {
        let mut s = BigInt::zero();
        for k in 1..=n {
            s -= &a[k] * &out[n - k];
        }
        out[n] = s;
    }
    out
}

/// prod_{k >= 1} (1 - q^(step k)) by repeated multiplication.
pub fn euler(step: usize, t: usize) -> Dense {
    let mut out = one(t);
    let mut e = step;
    while e <= t {
        for n in (e..=t).rev() {
            let v = out[n - e].clone();
            out[n] -= v;
        }
        e += step;
    }
    out
}

/// prod over the given exponents of (1 + sign q^e).
pub fn product(factors: &[(i64, usize)], t: usize) -> Dense {
    let mut out = one(t);
    for &(sign, e) in factors {
        if e == 0 {
            for c in out.iter_mut() {
                *c *= 1 + sign;
            }
            continue;
        }
        for n in (e..=t).rev() {
            let v = out[n - e].clone();
            out[n] += v * sign;
        }
    }
    out
}

/// Number of partitions of each n <= t by direct counting of parts.
pub fn partitions(t: usize) -> Dense {
    fn count(n: usize, largest: usize, memo: &mut Vec<Vec<Option<BigInt>>>) -> BigInt {
        if n == 0 {
            return BigInt::one();
        }
        if let Some(v) = &memo[n][largest] {
            return v.clone();
        }
        let mut s = BigInt::zero();
        for part in 1..=largest.min(n) {
            s += count(n - part, part, memo);
        }
        memo[n][largest] = Some(s.clone());
        s
    }
    let mut memo = vec![vec![None; t + 1]; t + 1];
    (0..=t).map(|n| count(n, n, &mut memo)).collect()
}

/// Integer coefficients of `s` at q^(base + k), k = 0 ..= t.
pub fn extract(s: &QSeries, base: Exp, t: usize) -> Dense {
    (0..=t)
        .map(|k| {
            let c = s.coeff(base + exp_int(k as i64)).expect("coefficient known");
            let r = c.to_rational().expect("rational coefficient");
            assert!(r.is_integer(), "non-integer coefficient {r}");
            r.to_integer()
        })
        .collect()
}

pub fn ints(v: &[i64]) -> Dense {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Normalized string function of level (p, pp) as the coefficient of
/// z^((ell-m)/2) in numerator / j(z; q), expanding 1/j(z; q) through the
/// partial fractions sum_n (-1)^n q^(n(n+1)/2) / ((1 - q^n z) (q)^3_inf)
/// on |q| < |z| < 1.
pub fn normalized_string_pf(p: i64, pp: i64, m: i64, ell: i64, t: usize) -> Dense {
    assert_eq!((ell - m).rem_euclid(2), 0);
    let target = (ell - m) / 2;
    let beta = 2 * p * pp;
    let alphas = [(p * (ell + 1) + p * pp, 0i64, 1i64), (-p * (ell + 1) + p * pp, ell + 1, -1i64)];
    let ti = t as i64;
    // numerator terms (z power, q power, sign)
    let mut numer = Vec::new();
    for &(alpha, zshift, sign) in &alphas {
        let mut n = 0i64;
        loop {
            let mut any = false;
            for k in [n, -n - 1] {
                let e = beta * k * (k - 1) / 2 + alpha * k;
                if (0..=ti).contains(&e) {
                    numer.push((zshift - pp * k, e, sign));
                    any = true;
                } else {
                    assert!(e >= 0);
                }
            }
            if !any && n > 2 {
                break;
            }
            n += 1;
        }
    }
    let mut acc = zero(t);
    for (a, e, sign) in numer {
        let g = pf_coeff(target - a, t);
        for (i, c) in g.iter().enumerate() {
            let idx = i as i64 + e;
            if idx > ti {
                break;
            }
            acc[idx as usize] += c * sign;
        }
    }
    let cube = {
        let e = euler(1, t);
        mul(&mul(&e, &e), &e)
    };
    mul(&acc, &inv(&cube))
}

/// Coefficient of z^k in sum_n (-1)^n q^(n(n+1)/2) / (1 - q^n z).
fn pf_coeff(k: i64, t: usize) -> Dense {
    let mut out = zero(t);
    let ti = t as i64;
    if k >= 0 {
        let mut n = 0i64;
        loop {
            let e = n * (n + 1) / 2 + n * k;
            if e > ti {
                break;
            }
            out[e as usize] += if n % 2 == 0 { 1 } else { -1 };
            n += 1;
        }
    } else {
        let j = -k;
        let mut n = -1i64;
        loop {
            let e = n * (n + 1) / 2 - n * j;
            if e > ti {
                break;
            }
            // -(-1)^n
            out[e as usize] += if n % 2 == 0 { -1 } else { 1 };
            n -= 1;
        }
    }
    out
}

pub fn to_i64s(v: &Dense) -> Vec<i64> {
    v.iter().map(|x| x.to_i64().unwrap()).collect()
}
