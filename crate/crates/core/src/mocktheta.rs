//! Mock theta functions from their Eulerian definitions.

use std::str::FromStr;

use num_integer::Integer;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::qlaurent::{exp_num, fit_denom, floor_num, render_exp, Dense, Exp, QSeries, DEFAULT_DENOM};
use crate::ring::{Conductor, CycCoeff};
use crate::theta::Monomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MockName {
    F3,
    Omega3,
    F0,
    F1,
    Phi10,
    Psi10,
    X10,
    Chi10,
}

impl MockName {
    pub const ALL: [MockName; 8] = [
        MockName::F3,
        MockName::Omega3,
        MockName::F0,
        MockName::F1,
        MockName::Phi10,
        MockName::Psi10,
        MockName::X10,
        MockName::Chi10,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MockName::F3 => "f3",
            MockName::Omega3 => "omega3",
            MockName::F0 => "f0",
            MockName::F1 => "f1",
            MockName::Phi10 => "phi10",
            MockName::Psi10 => "psi10",
            MockName::X10 => "X10",
            MockName::Chi10 => "chi10",
        }
    }

    /// Exponent of the `n`-th numerator, sign of the `n`-th term, the
    /// factors `(c, e)` of `1/(1 - c q^e)` present at `n = 0`, and those
    /// added when stepping from `n - 1` to `n`.
    fn shape(self) -> Shape {
        match self {
            // sum q^(n^2) / (-q;q)_n^2
            MockName::F3 => Shape {
                lead: |n| n * n,
                alternating: false,
                first: &[],
                step: |n| vec![(-1, n), (-1, n)],
            },
            // sum q^(2n(n+1)) / (q;q^2)_(n+1)^2
            MockName::Omega3 => Shape {
                lead: |n| 2 * n * (n + 1),
                alternating: false,
                first: &[(1, 1), (1, 1)],
                step: |n| vec![(1, 2 * n + 1), (1, 2 * n + 1)],
            },
            // sum q^(n^2) / (-q;q)_n
            MockName::F0 => Shape {
                lead: |n| n * n,
                alternating: false,
                first: &[],
                step: |n| vec![(-1, n)],
            },
            // sum q^(n(n+1)) / (-q;q)_n
            MockName::F1 => Shape {
                lead: |n| n * (n + 1),
                alternating: false,
                first: &[],
                step: |n| vec![(-1, n)],
            },
            // sum q^(n(n+1)/2) / (q;q^2)_(n+1)
            MockName::Phi10 => Shape {
                lead: |n| n * (n + 1) / 2,
                alternating: false,
                first: &[(1, 1)],
                step: |n| vec![(1, 2 * n + 1)],
            },
            // sum q^((n+1)(n+2)/2) / (q;q^2)_(n+1)
            MockName::Psi10 => Shape {
                lead: |n| (n + 1) * (n + 2) / 2,
                alternating: false,
                first: &[(1, 1)],
                step: |n| vec![(1, 2 * n + 1)],
            },
            // sum (-1)^n q^(n^2) / (-q;q)_(2n)
            MockName::X10 => Shape {
                lead: |n| n * n,
                alternating: true,
                first: &[],
                step: |n| vec![(-1, 2 * n - 1), (-1, 2 * n)],
            },
            // sum (-1)^n q^((n+1)^2) / (-q;q)_(2n+1)
            MockName::Chi10 => Shape {
                lead: |n| (n + 1) * (n + 1),
                alternating: true,
                first: &[(-1, 1)],
                step: |n| vec![(-1, 2 * n), (-1, 2 * n + 1)],
            },
        }
    }
}

impl FromStr for MockName {
    type Err = Error;

    fn from_str(s: &str) -> Result<MockName> {
        MockName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown mock theta function `{s}`")))
    }
}

struct Shape {
    lead: fn(i64) -> i64,
    alternating: bool,
    first: &'static [(i64, i64)],
    step: fn(i64) -> Vec<(i64, i64)>,
}

fn eulerian(shape: &Shape, order: Exp) -> Result<QSeries> {
    let d = fit_denom(DEFAULT_DENOM, &[order]);
    let t = floor_num(order, d);
    let cond = Conductor::One;
    let mut acc = Dense::zero(d, 0, d, t, cond);
    let mut p = Dense::one(d, d, t, cond);
    for &(c, e) in shape.first {
        p.div_binomial(&CycCoeff::from_i64(c), e * d)?;
    }
    let minus = CycCoeff::from_i64(-1);
    let plus = CycCoeff::from_i64(1);
    for n in 0.. {
        if n > 0 {
            for (c, e) in (shape.step)(n) {
                p.div_binomial(&CycCoeff::from_i64(c), e * d)?;
            }
        }
        let lead = (shape.lead)(n) * d;
        if lead + p.start > t {
            break;
        }
        let sign = if shape.alternating && n.is_odd() { &minus } else { &plus };
        p.add_into(&mut acc, sign, lead);
    }
    Ok(acc.into_series())
}

/// The named mock theta function at `q`, or at `arg` when given
/// (`q -> c q^M`), truncated at `q^order`.
pub fn mock_series(name: MockName, arg: Option<&Monomial>, order: Exp) -> Result<QSeries> {
    let shape = name.shape();
    let Some(x) = arg else {
        return eulerian(&shape, order);
    };
    if !x.exp.is_positive() {
        return Err(Error::Usage(format!(
            "{}: the argument must be c*q^M with M > 0, got {x}",
            name.as_str()
        )));
    }
    let base = eulerian(&shape, order / x.exp)?;
    base.substitute(&x.coeff, x.exp)
}

/// Universal mock theta function
/// `g(x; q^rho) = x^-1 (-1 + sum Q^(n^2) / ((x;Q)_(n+1) (Q/x;Q)_n))`, `Q = q^rho`.
pub fn g_universal(x: &Monomial, rho: Exp, order: Exp) -> Result<QSeries> {
    if !rho.is_positive() {
        return Err(Error::Usage(format!(
            "g: base q^{} must have a positive exponent",
            render_exp(rho)
        )));
    }
    if x.coeff.is_one() && (x.exp / rho).is_integer() {
        return Err(Error::NonGeneric(format!(
            "g({x}; q^{}): a Pochhammer factor vanishes",
            render_exp(rho)
        )));
    }
    let inner_order = order + x.exp;
    let d = fit_denom(DEFAULT_DENOM, &[x.exp, rho, inner_order]);
    let beta = exp_num(x.exp, d).unwrap();
    let r = exp_num(rho, d).unwrap();
    let step = beta.gcd(&r).max(1);
    let t = floor_num(inner_order, d);
    let cond = x.conductor();
    let c = &x.coeff;
    let ci = c.inv()?;
    let mut acc = Dense::zero(d, 0, step, t, cond);
    let mut p = Dense::one(d, step, t, cond);
    p.div_binomial(c, beta)?;
    let one = CycCoeff::one(cond);
    for n in 0i64.. {
        if n > 0 {
            p.div_binomial(c, beta + r * n)?;
            p.div_binomial(&ci, r * n - beta)?;
        }
        let lead = r * n * n;
        if lead + p.start > t {
            break;
        }
        p.add_into(&mut acc, &one, lead);
    }
    let sum = acc.into_series();
    let minus_one = QSeries::from_terms(d, t, cond, [(0, CycCoeff::from_i64(-1))])?;
    let inner = sum.add(&minus_one)?;
    inner.mul_monomial(&ci, -x.exp)
}

/// Zero-argument evaluation used by tests.
pub fn mock_plain(name: MockName, order: Exp) -> Result<QSeries> {
    mock_series(name, None, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlaurent::exp_int;
    use num_traits::ToPrimitive;

    fn ints(s: &QSeries, upto: i64) -> Vec<i64> {
        (0..=upto)
            .map(|k| s.coeff(exp_int(k)).unwrap().to_rational().unwrap().to_integer().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn leading_coefficients() {
        let o = exp_int(3);
        assert_eq!(ints(&mock_plain(MockName::F3, o).unwrap(), 3), vec![1, 1, -2, 3]);
        assert_eq!(ints(&mock_plain(MockName::Phi10, o).unwrap(), 3), vec![1, 2, 2, 3]);
        assert_eq!(ints(&mock_plain(MockName::Psi10, o).unwrap(), 3), vec![0, 1, 1, 2]);
    }

    #[test]
    fn substituted_argument() {
        let x = Monomial::int(-1, exp_int(2));
        let s = mock_series(MockName::Phi10, Some(&x), exp_int(6)).unwrap();
        let base = mock_plain(MockName::Phi10, exp_int(3)).unwrap();
        for k in 0..=3 {
            let b = base.coeff(exp_int(k)).unwrap();
            let expect = if k % 2 == 1 { b.neg() } else { b };
            assert_eq!(s.coeff(exp_int(2 * k)).unwrap(), expect);
        }
        assert!(s.trunc() >= exp_int(6));
    }

    #[test]
    fn g_rejects_aligned_arguments() {
        assert!(matches!(
            g_universal(&Monomial::q_pow(exp_int(10)), exp_int(10), exp_int(5)),
            Err(Error::NonGeneric(_))
        ));
        assert!(g_universal(&Monomial::q_pow(exp_int(2)), exp_int(10), exp_int(20)).is_ok());
    }
}
