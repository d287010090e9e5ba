//! Exact arithmetic helpers: rationals, binomials with the extended
//! zero convention, and shifted harmonic sums.
//!
//! Every probability in this crate is a [`Rational`]. The binomial here is
//! total on `ℤ × ℤ`: `C(0, 0) = 1` and `C(m, l) = 0` whenever `m < l`,
//! `m < 0` or `l < 0`. Under that convention Pascal's rule holds on
//! `ℤ² \ {(0, 0)}` and holds as `≥` everywhere.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

thread_local! {
    static BINOMIAL_MEMO: RefCell<HashMap<(i64, i64), BigInt>> = RefCell::new(HashMap::new());
}

/// `C(m, l)` with the zero convention outside `0 ≤ l ≤ m`.
pub fn binomial(m: i64, l: i64) -> BigInt {
    if m < 0 || l < 0 || m < l {
        return BigInt::zero();
    }
    let l = l.min(m - l);
    if l == 0 {
        return BigInt::one();
    }
    if l == 1 {
        return BigInt::from(m);
    }
    if let Some(hit) = BINOMIAL_MEMO.with(|memo| memo.borrow().get(&(m, l)).cloned()) {
        return hit;
    }
    // C(m, i) = C(m, i-1) * (m - i + 1) / i, exact at every step.
    let mut acc = BigInt::one();
    for i in 1..=l {
        acc *= m - i + 1;
        acc /= i;
    }
    BINOMIAL_MEMO.with(|memo| memo.borrow_mut().insert((m, l), acc.clone()));
    acc
}

/// Binomial as a rational, for mixing into probability expressions.
pub fn binomial_q(m: i64, l: i64) -> Rational {
    Rational::from_integer(binomial(m, l))
}

/// `Σ_{i=lo}^{hi} 1 / (i - shift)`, zero when `lo > hi`.
///
/// Folds left over an unreduced numerator/denominator pair and reduces once
/// at the end.
pub fn harmonic_shift_sum(lo: i64, hi: i64, shift: i64) -> Result<Rational> {
    if lo > hi {
        return Ok(Rational::zero());
    }
    if (lo..=hi).contains(&shift) {
        return Err(Error::ZeroDenominator(shift));
    }
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for i in lo..=hi {
        let d = i - shift;
        // num/den + 1/d = (num*d + den) / (den*d)
        num = num * d + &den;
        den *= d;
    }
    Ok(Rational::new(num, den))
}

/// `Σ_{i=d+1}^{c} C(c-1, i-1) · C(n-c+1, j-i)`.
pub fn chu_vandermonde_lhs(c: i64, d: i64, n: i64, j: i64) -> BigInt {
    ((d + 1)..=c).map(|i| binomial(c - 1, i - 1) * binomial(n - c + 1, j - i)).sum()
}

/// `Σ_{ℓ=d}^{c-1} C(ℓ-1, d-1) · C(n-ℓ, j-d-1)`; counts `(j-1)`-subsets of
/// `{1..n}` by their `d`-th smallest element.
pub fn chu_vandermonde_rhs(c: i64, d: i64, n: i64, j: i64) -> BigInt {
    (d..c).map(|l| binomial(l - 1, d - 1) * binomial(n - l, j - d - 1)).sum()
}

/// Lossy conversion for display and float-side comparisons.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `sig` significant digits, rounded half away from
/// zero, computed exactly from the rational.
pub fn decimal_string(r: &Rational, sig: usize) -> String {
    let sig = sig.max(1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10);

    // Find e with 10^(e-1) <= a < 10^e.
    let mut e: i64 = (a.numer().bits() as i64 - a.denom().bits() as i64) * 3 / 10;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(ten.pow(k as u32))
        } else {
            Rational::new(BigInt::one(), ten.pow((-k) as u32))
        }
    };
    while a >= pow10(e) {
        e += 1;
    }
    while a < pow10(e - 1) {
        e -= 1;
    }

    let scaled = &a * pow10(sig as i64 - e);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = q;
    if rem * 2 >= *scaled.denom() {
        digits += 1;
    }
    let mut s = digits.to_string();
    if s.len() > sig {
        // Rounding carried into a new leading digit.
        s.pop();
        e += 1;
    }

    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if e <= 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-e) as usize));
        out.push_str(s.trim_end_matches('0'));
    } else if (e as usize) >= s.len() {
        out.push_str(&s);
        out.push_str(&"0".repeat(e as usize - s.len()));
    } else {
        let (int_part, frac) = s.split_at(e as usize);
        out.push_str(int_part);
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    }
    out
}

/// Serde adapter writing a rational as `{"num": "..", "den": "..", "decimal": ".."}`.
///
/// Numerator and denominator are decimal strings so no precision is lost;
/// `decimal` is informational and ignored on input.
pub mod serde_rational {
    use super::{decimal_string, Rational};
    use num_bigint::BigInt;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        num: String,
        den: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decimal: Option<String>,
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Repr { num: r.numer().to_string(), den: r.denom().to_string(), decimal: Some(decimal_string(r, 15)) }
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = Repr::deserialize(d)?;
        let num: BigInt = repr.num.parse().map_err(de::Error::custom)?;
        let den: BigInt = repr.den.parse().map_err(de::Error::custom)?;
        if den == BigInt::from(0) {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}
