use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in canonical form.
pub type Rational = BigRational;

/// Parses `"p/q"` or an integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("expected a rational \"p/q\", got {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Always `"p/q"`, including `q = 1`.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// The exact value of a finite double.
pub(crate) fn exact(lambda: f64) -> Rational {
    Rational::from_float(lambda).expect("finite scalar")
}

/// `v` rounded to the nearest multiple of `2^-bits`.
pub(crate) fn round_dyadic(v: f64, bits: i32) -> Rational {
    let unit = f64::from(bits).exp2();
    exact((v * unit).round()) / Rational::from_integer(BigInt::one() << bits as usize)
}

pub(crate) fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}
