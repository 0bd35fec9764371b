//! Exact rational scalars and their text form.
//!
//! Coefficients throughout the crate are reduced fractions over
//! arbitrary-precision integers. The wire form is the string `"p/q"`
//! (or `"p"` when the denominator is 1), matching `Display`/`FromStr`
//! of [`num_rational::BigRational`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational scalar used for every series coefficient and trace value.
pub type Rat = BigRational;

/// Shorthand constructor from machine integers. Panics on zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer as a rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"p/q"` or `"p"`.
pub fn rat_from_str(text: &str) -> Result<Rat> {
    let t = text.trim();
    t.parse::<Rat>()
        .map_err(|_| Error::ParseRational(t.to_string()))
        .and_then(|r| {
            // `Ratio::from_str` already rejects q = 0, but keep the check
            // so a future backend swap cannot silently admit it.
            if r.denom().is_zero() {
                Err(Error::ParseRational(t.to_string()))
            } else {
                Ok(r)
            }
        })
}

/// Render as `"p/q"`, or `"p"` when the denominator is 1.
pub fn rat_to_string(r: &Rat) -> String {
    r.to_string()
}

/// Nearest `f64`. Falls back to signed infinity on overflow.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
