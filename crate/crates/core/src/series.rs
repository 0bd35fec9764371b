//! Truncated formal power series in one variable over the rationals.
//!
//! A [`TruncatedSeries`] keeps the coefficients of `r^0 .. r^order`
//! exactly, together with an advisory parity tag. All arithmetic is
//! exact; binary operations truncate to the minimum order of the two
//! operands, which is the natural semantics for formal germs.
//!
//! Besides ring arithmetic the module provides composition, compositional
//! reversion, rational powers of unit-constant series, termwise calculus,
//! and the standard Maclaurin expansions used to assemble density
//! functions.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{rat_from_str, rat_to_f64, rat_to_string, Rat};
use crate::{Error, Result};

/// Parity tag of a series. Advisory metadata: it is validated when a
/// series is constructed from raw coefficients and propagated through
/// arithmetic, but never enforced by silently zeroing coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "none" => Ok(Parity::None),
            other => Err(Error::Parity(format!("unknown parity tag '{other}'"))),
        }
    }
}

/// Truncated formal power series with exact rational coefficients.
///
/// `coeffs[i]` is the coefficient of `r^i`; there are exactly
/// `order + 1` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    order: usize,
    coeffs: Vec<Rat>,
    parity: Parity,
}

impl TruncatedSeries {
    /// Build a series from coefficients `c_0 .. c_order`, validating the
    /// claimed parity. A mismatch is reported loudly rather than fixed.
    pub fn new(coeffs: Vec<Rat>, parity: Parity) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a series needs at least the r^0 coefficient".into()));
        }
        let order = coeffs.len() - 1;
        let s = TruncatedSeries { order, coeffs, parity };
        s.check_parity()?;
        Ok(s)
    }

    /// Internal constructor for results whose parity is known by
    /// construction. Validated in debug builds.
    fn new_unchecked(coeffs: Vec<Rat>, parity: Parity) -> Self {
        debug_assert!(!coeffs.is_empty());
        let order = coeffs.len() - 1;
        let s = TruncatedSeries { order, coeffs, parity };
        debug_assert!(s.check_parity().is_ok(), "parity bug: {s}");
        s
    }

    fn check_parity(&self) -> Result<()> {
        let bad = |i: usize| match self.parity {
            Parity::Even => i % 2 == 1,
            Parity::Odd => i % 2 == 0,
            Parity::None => false,
        };
        for (i, c) in self.coeffs.iter().enumerate() {
            if bad(i) && !c.is_zero() {
                return Err(Error::Parity(format!(
                    "claimed {} parity but coefficient of r^{i} is {c}",
                    self.parity.as_str()
                )));
            }
        }
        Ok(())
    }

    /// The zero series of the given order.
    pub fn zero(order: usize) -> Self {
        TruncatedSeries::new_unchecked(vec![Rat::zero(); order + 1], Parity::Even)
    }

    /// The constant series 1.
    pub fn one(order: usize) -> Self {
        Self::constant(Rat::one(), order)
    }

    /// A constant series (even parity).
    pub fn constant(c: Rat, order: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); order + 1];
        coeffs[0] = c;
        TruncatedSeries::new_unchecked(coeffs, Parity::Even)
    }

    /// The identity series `r`.
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = Rat::one();
        }
        TruncatedSeries::new_unchecked(coeffs, Parity::Odd)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Coefficient of `r^i`; zero beyond the truncation order.
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    /// Retag parity, validating the claim against the coefficients.
    pub fn with_parity(&self, parity: Parity) -> Result<Self> {
        TruncatedSeries::new(self.coeffs.clone(), parity)
    }

    /// Truncate (or zero-extend) to the given order.
    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs: Vec<Rat> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, Rat::zero());
        TruncatedSeries::new_unchecked(coeffs, self.parity)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order).map(|i| self.coeff(i) + other.coeff(i)).collect();
        let parity = if self.parity == other.parity { self.parity } else { Parity::None };
        TruncatedSeries::new_unchecked(coeffs, parity)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|c| -c).collect();
        TruncatedSeries::new_unchecked(coeffs, self.parity)
    }

    /// Cauchy product, truncated to the minimum order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = convolve(&self.coeffs, &other.coeffs, order);
        let parity = match (self.parity, other.parity) {
            (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
            (Parity::Even, Parity::Odd) | (Parity::Odd, Parity::Even) => Parity::Odd,
            _ => Parity::None,
        };
        TruncatedSeries::new_unchecked(coeffs, parity)
    }

    /// Multiply every coefficient by a rational scalar.
    pub fn scale(&self, c: &Rat) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        TruncatedSeries::new_unchecked(coeffs, self.parity)
    }

    /// Substitute `inner` into `self`. Requires `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeff(0).is_zero() {
            return Err(Error::CompositionDomain(inner.coeff(0).to_string()));
        }
        let order = self.order.min(inner.order);
        // Horner over the coefficient vectors; outer coefficients above
        // `order` only feed powers of valuation > order, so they cannot
        // appear in the truncation.
        let mut acc = vec![Rat::zero(); order + 1];
        acc[0] = self.coeff(order);
        for i in (0..order).rev() {
            acc = convolve(&acc, &inner.coeffs, order);
            acc[0] += &self.coeffs[i];
        }
        let parity = match (self.parity, inner.parity) {
            (_, Parity::Even) => Parity::Even,
            (p, Parity::Odd) => p,
            (_, Parity::None) => Parity::None,
        };
        Ok(TruncatedSeries::new_unchecked(acc, parity))
    }

    /// Compositional inverse. Requires `self(0) = 0` and a unit linear
    /// coefficient; `compose(self, revert(self))` is the identity to the
    /// truncation order.
    pub fn revert(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() || !self.coeff(1).is_one() {
            return Err(Error::ReversionDomain);
        }
        let n = self.order;
        let mut inv = TruncatedSeries::identity(n);
        inv.parity = if self.parity == Parity::Odd { Parity::Odd } else { Parity::None };
        // Back-substitution: with the partial inverse correct through
        // r^(k-1), the coefficient of r^k in self(inv) moves by exactly
        // delta when inv[k] moves by delta (unit linear coefficient).
        for k in 2..=n {
            let c = self.truncate(k).compose(&inv.truncate(k))?.coeff(k);
            inv.coeffs[k] = -c;
        }
        debug_assert!(inv.check_parity().is_ok());
        Ok(inv)
    }

    /// Rational power of a series with constant term 1.
    pub fn pow_q(&self, q: &Rat) -> Result<Self> {
        if !self.coeff(0).is_one() {
            return Err(Error::PowerDomain(self.coeff(0).to_string()));
        }
        let n = self.order;
        let mut out = vec![Rat::zero(); n + 1];
        out[0] = Rat::one();
        // From s * f' = q * s' * f with f = s^q:
        //   n f_n = sum_{k=1..n} ((q+1) k - n) s_k f_{n-k}
        for m in 1..=n {
            let mut acc = Rat::zero();
            for k in 1..=m {
                if self.coeffs[k].is_zero() || out[m - k].is_zero() {
                    continue;
                }
                let w = (q + Rat::one()) * Rat::from_integer(BigInt::from(k))
                    - Rat::from_integer(BigInt::from(m));
                acc += w * &self.coeffs[k] * &out[m - k];
            }
            out[m] = acc / Rat::from_integer(BigInt::from(m));
        }
        let parity = match self.parity {
            Parity::Even => Parity::Even,
            _ => Parity::None,
        };
        Ok(TruncatedSeries::new_unchecked(out, parity))
    }

    /// Termwise derivative; the order drops by one (saturating at 0).
    pub fn derivative(&self) -> Self {
        if self.order == 0 {
            return TruncatedSeries::zero(0);
        }
        let coeffs = (1..=self.order)
            .map(|i| &self.coeffs[i] * Rat::from_integer(BigInt::from(i)))
            .collect();
        TruncatedSeries::new_unchecked(coeffs, flip_parity(self.parity))
    }

    /// Termwise antiderivative with constant term 0; the order rises by one.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![Rat::zero(); self.order + 2];
        for i in 0..=self.order {
            coeffs[i + 1] = &self.coeffs[i] / Rat::from_integer(BigInt::from(i + 1));
        }
        TruncatedSeries::new_unchecked(coeffs, flip_parity(self.parity))
    }

    /// Divide by `r^k`. The low `k` coefficients must vanish; the order
    /// drops by `k`.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if k > self.order {
            return Err(Error::Domain(format!(
                "cannot divide an order-{} series by r^{k}",
                self.order
            )));
        }
        for i in 0..k {
            if !self.coeffs[i].is_zero() {
                return Err(Error::Domain(format!(
                    "dividing by r^{k} but coefficient of r^{i} is {}",
                    self.coeffs[i]
                )));
            }
        }
        let coeffs: Vec<Rat> = self.coeffs[k..].to_vec();
        let parity = if k % 2 == 0 { self.parity } else { flip_parity(self.parity) };
        Ok(TruncatedSeries::new_unchecked(coeffs, parity))
    }

    /// Multiply by `r^k`; the order rises by `k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); self.order + k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i + k] = c.clone();
        }
        let parity = if k % 2 == 0 { self.parity } else { flip_parity(self.parity) };
        TruncatedSeries::new_unchecked(coeffs, parity)
    }

    /// Replace `s(r)` by `s(c r)`: coefficient `i` picks up `c^i`.
    pub fn scale_argument(&self, c: &Rat) -> Self {
        let mut pow = Rat::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|x| {
                let v = x * &pow;
                pow *= c;
                v
            })
            .collect();
        TruncatedSeries::new_unchecked(coeffs, self.parity)
    }

    /// Replace `s(r)` by `s(c r)` for an even series, given only `c^2`.
    /// Keeps the result exact when `c` itself is irrational.
    pub fn scale_argument_even(&self, c_squared: &Rat) -> Result<Self> {
        if self.parity != Parity::Even {
            return Err(Error::Parity(
                "argument rescale by a squared factor needs an even series".into(),
            ));
        }
        let mut pow = Rat::one();
        let mut coeffs = Vec::with_capacity(self.order + 1);
        for (i, x) in self.coeffs.iter().enumerate() {
            if i > 0 && i % 2 == 0 {
                pow *= c_squared;
            }
            coeffs.push(x * &pow);
        }
        Ok(TruncatedSeries::new_unchecked(coeffs, Parity::Even))
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }
}

fn flip_parity(p: Parity) -> Parity {
    match p {
        Parity::Even => Parity::Odd,
        Parity::Odd => Parity::Even,
        Parity::None => Parity::None,
    }
}

fn convolve(a: &[Rat], b: &[Rat], order: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); order + 1];
    for (i, ci) in a.iter().enumerate().take(order + 1) {
        if ci.is_zero() {
            continue;
        }
        for (j, cj) in b.iter().enumerate().take(order + 1 - i) {
            if !cj.is_zero() {
                out[i + j] += ci * cj;
            }
        }
    }
    out
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                first = false;
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 if a.is_one() => write!(f, "r")?,
                1 => write!(f, "{a} r")?,
                _ if a.is_one() => write!(f, "r^{i}")?,
                _ => write!(f, "{a} r^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(r^{})", self.order + 1)
    }
}

/// Names of the built-in Maclaurin expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementary {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log1p,
}

/// Maclaurin expansion of an elementary function, exact to `order`.
pub fn elementary(name: Elementary, order: usize) -> TruncatedSeries {
    let mut coeffs = vec![Rat::zero(); order + 1];
    let mut factorial = BigInt::one();
    for k in 0..=order {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        let inv_fact = Rat::new(BigInt::one(), factorial.clone());
        coeffs[k] = match name {
            Elementary::Sin => match k % 4 {
                1 => inv_fact,
                3 => -inv_fact,
                _ => Rat::zero(),
            },
            Elementary::Cos => match k % 4 {
                0 => inv_fact,
                2 => -inv_fact,
                _ => Rat::zero(),
            },
            Elementary::Sinh => {
                if k % 2 == 1 {
                    inv_fact
                } else {
                    Rat::zero()
                }
            }
            Elementary::Cosh => {
                if k % 2 == 0 {
                    inv_fact
                } else {
                    Rat::zero()
                }
            }
            Elementary::Exp => inv_fact,
            Elementary::Log1p => {
                if k == 0 {
                    Rat::zero()
                } else {
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    Rat::new(BigInt::from(sign), BigInt::from(k))
                }
            }
        };
    }
    let parity = match name {
        Elementary::Sin | Elementary::Sinh => Parity::Odd,
        Elementary::Cos | Elementary::Cosh => Parity::Even,
        Elementary::Exp | Elementary::Log1p => Parity::None,
    };
    TruncatedSeries::new_unchecked(coeffs, parity)
}

/// `exp(u)` for a series with zero constant term.
pub fn exp_of(u: &TruncatedSeries) -> Result<TruncatedSeries> {
    elementary(Elementary::Exp, u.order()).compose(u)
}

/// `log(s)` for a series with constant term 1.
pub fn log_of(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if !s.coeff(0).is_one() {
        return Err(Error::PowerDomain(s.coeff(0).to_string()));
    }
    let shifted = s.sub(&TruncatedSeries::one(s.order()));
    elementary(Elementary::Log1p, s.order()).compose(&shifted)
}

// --- JSON form -------------------------------------------------------------
//
// {"order": N, "parity": "even"|"odd"|"none", "coeffs": ["p/q", ...]}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    parity: String,
    coeffs: Vec<String>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            order: self.order,
            parity: self.parity.as_str().to_string(),
            coeffs: self.coeffs.iter().map(rat_to_string).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        if repr.coeffs.len() != repr.order + 1 {
            return Err(D::Error::custom(format!(
                "order {} demands {} coefficients, got {}",
                repr.order,
                repr.order + 1,
                repr.coeffs.len()
            )));
        }
        let parity = Parity::from_str(&repr.parity).map_err(D::Error::custom)?;
        let coeffs = repr
            .coeffs
            .iter()
            .map(|s| rat_from_str(s))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        TruncatedSeries::new(coeffs, parity).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn s(coeffs: &[(i64, i64)], parity: Parity) -> TruncatedSeries {
        TruncatedSeries::new(coeffs.iter().map(|&(n, d)| rat(n, d)).collect(), parity).unwrap()
    }

    #[test]
    fn parity_validation_is_loud() {
        assert!(TruncatedSeries::new(vec![rat(1, 1), rat(1, 1)], Parity::Even).is_err());
        assert!(TruncatedSeries::new(vec![rat(1, 1), rat(0, 1)], Parity::Odd).is_err());
        assert!(TruncatedSeries::new(vec![rat(1, 1), rat(0, 1), rat(2, 1)], Parity::Even).is_ok());
    }

    #[test]
    fn mul_sinc_squared() {
        // (1 - r^2/6 + r^4/120)^2 = 1 - r^2/3 + 2 r^4/45, the square of the
        // sine-quotient expansion, checked by an independent Cauchy product.
        let sinc = s(&[(1, 1), (0, 1), (-1, 6), (0, 1), (1, 120)], Parity::Even);
        let sq = sinc.mul(&sinc);
        assert_eq!(sq.coeff(0), rat(1, 1));
        assert_eq!(sq.coeff(2), rat(-1, 3));
        assert_eq!(sq.coeff(4), rat(2, 45));
        assert_eq!(sq.parity(), Parity::Even);
    }

    #[test]
    fn add_zero_is_identity() {
        let a = s(&[(3, 2), (0, 1), (-1, 7)], Parity::Even);
        assert_eq!(a.add(&TruncatedSeries::zero(2)), a);
    }

    #[test]
    fn scale_is_linear() {
        let a = s(&[(1, 1), (0, 1), (1, 1)], Parity::Even);
        let scaled = a.scale(&rat(3, 2));
        assert_eq!(scaled.coeff(0), rat(3, 2));
        assert_eq!(scaled.coeff(2), rat(3, 2));
    }

    #[test]
    fn compose_cos_with_r_squared() {
        let cos = elementary(Elementary::Cos, 4);
        let r2 = TruncatedSeries::identity(4).shift_up(1); // r^2, order 5
        let out = cos.compose(&r2.truncate(4)).unwrap();
        assert_eq!(out.coeff(0), rat(1, 1));
        assert_eq!(out.coeff(2), rat(0, 1));
        assert_eq!(out.coeff(4), rat(-1, 2));
    }

    #[test]
    fn compose_identity_inner() {
        let a = s(&[(1, 1), (2, 1), (3, 1), (4, 1)], Parity::None);
        assert_eq!(a.compose(&TruncatedSeries::identity(3)).unwrap().coeffs(), a.coeffs());
    }

    #[test]
    fn compose_log1p_with_r2_plus_r3() {
        // log(1 + r^2 + r^3) = r^2 + r^3 - r^4/2 + O(r^5)
        let log1p = elementary(Elementary::Log1p, 4);
        let inner = s(&[(0, 1), (0, 1), (1, 1), (1, 1), (0, 1)], Parity::None);
        let out = log1p.compose(&inner).unwrap();
        assert_eq!(out.coeff(2), rat(1, 1));
        assert_eq!(out.coeff(3), rat(1, 1));
        assert_eq!(out.coeff(4), rat(-1, 2));
    }

    #[test]
    fn compose_rejects_nonzero_constant() {
        let a = elementary(Elementary::Exp, 4);
        let inner = TruncatedSeries::one(4);
        assert!(matches!(a.compose(&inner), Err(Error::CompositionDomain(_))));
    }

    #[test]
    fn revert_identity() {
        let id = TruncatedSeries::identity(5);
        assert_eq!(id.revert().unwrap(), id);
    }

    #[test]
    fn revert_sinh_like() {
        // revert(r + r^3/6) = r - r^3/6 + O(r^4)
        let a = s(&[(0, 1), (1, 1), (0, 1), (1, 6)], Parity::Odd);
        let inv = a.revert().unwrap();
        assert_eq!(inv.coeff(1), rat(1, 1));
        assert_eq!(inv.coeff(3), rat(-1, 6));
        assert_eq!(inv.parity(), Parity::Odd);
    }

    #[test]
    fn revert_rejects_bad_linear_term() {
        let a = s(&[(0, 1), (2, 1)], Parity::Odd);
        assert!(matches!(a.revert(), Err(Error::ReversionDomain)));
        let b = s(&[(1, 1), (1, 1)], Parity::None);
        assert!(matches!(b.revert(), Err(Error::ReversionDomain)));
    }

    #[test]
    fn pow_q_negative_third() {
        // (1 - r^2 + 2 r^4/5)^(-1/3) = 1 + r^2/3 + 4 r^4/45, binomial oracle.
        let a = s(&[(1, 1), (0, 1), (-1, 1), (0, 1), (2, 5)], Parity::Even);
        let p = a.pow_q(&rat(-1, 3)).unwrap();
        assert_eq!(p.coeff(0), rat(1, 1));
        assert_eq!(p.coeff(2), rat(1, 3));
        assert_eq!(p.coeff(4), rat(4, 45));
    }

    #[test]
    fn pow_q_zero_exponent() {
        let a = s(&[(1, 1), (2, 1), (3, 1)], Parity::None);
        let p = a.pow_q(&rat(0, 1)).unwrap();
        assert!(p.sub(&TruncatedSeries::one(2)).is_zero());
    }

    #[test]
    fn pow_q_rejects_non_unit_constant() {
        let a = s(&[(2, 1), (1, 1)], Parity::None);
        assert!(matches!(a.pow_q(&rat(1, 2)), Err(Error::PowerDomain(_))));
    }

    #[test]
    fn antiderivative_of_psi_head() {
        let a = s(&[(1, 1), (0, 1), (1, 2), (0, 1), (13, 72)], Parity::Even);
        let int = a.antiderivative();
        assert_eq!(int.coeff(1), rat(1, 1));
        assert_eq!(int.coeff(3), rat(1, 6));
        assert_eq!(int.coeff(5), rat(13, 360));
        assert_eq!(int.parity(), Parity::Odd);
        assert_eq!(int.coeff(0), rat(0, 1));
    }

    #[test]
    fn derivative_of_constant() {
        assert!(TruncatedSeries::one(0).derivative().is_zero());
    }

    #[test]
    fn elementary_expansions() {
        let sin = elementary(Elementary::Sin, 5);
        assert_eq!(sin.coeff(1), rat(1, 1));
        assert_eq!(sin.coeff(3), rat(-1, 6));
        assert_eq!(sin.coeff(5), rat(1, 120));
        let cosh = elementary(Elementary::Cosh, 4);
        assert_eq!(cosh.coeff(0), rat(1, 1));
        assert_eq!(cosh.coeff(2), rat(1, 2));
        assert_eq!(cosh.coeff(4), rat(1, 24));
        let log1p = elementary(Elementary::Log1p, 3);
        assert_eq!(log1p.coeff(1), rat(1, 1));
        assert_eq!(log1p.coeff(2), rat(-1, 2));
        assert_eq!(log1p.coeff(3), rat(1, 3));
    }

    #[test]
    fn json_round_trip() {
        let a = s(&[(1, 1), (0, 1), (-13, 72)], Parity::Even);
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(
            text,
            r#"{"order":2,"parity":"even","coeffs":["1","0","-13/72"]}"#
        );
        let back: TruncatedSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn json_rejects_parity_mismatch() {
        let text = r#"{"order":1,"parity":"even","coeffs":["1","2"]}"#;
        assert!(serde_json::from_str::<TruncatedSeries>(text).is_err());
    }

    // Random series generators for the algebra properties.

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec(arb_rat(), order + 1)
            .prop_map(|coeffs| TruncatedSeries::new(coeffs, Parity::None).unwrap())
    }

    fn arb_unit_series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        arb_series(order).prop_map(|mut_s| {
            let mut coeffs = mut_s.coeffs().to_vec();
            coeffs[0] = Rat::one();
            TruncatedSeries::new(coeffs, Parity::None).unwrap()
        })
    }

    fn arb_odd_unit(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec(arb_rat(), order + 1).prop_map(move |mut coeffs| {
            for (i, c) in coeffs.iter_mut().enumerate() {
                if i % 2 == 0 {
                    *c = Rat::zero();
                }
            }
            if order >= 1 {
                coeffs[1] = Rat::one();
            }
            TruncatedSeries::new(coeffs, Parity::Odd).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ring_axioms(a in arb_series(12), b in arb_series(12), c in arb_series(12)) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn compose_is_associative(
            a in arb_series(10),
            b in arb_odd_unit(10),
            c in arb_odd_unit(10),
        ) {
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn revert_is_two_sided_inverse(a in arb_odd_unit(9)) {
            let inv = a.revert().unwrap();
            let id = TruncatedSeries::identity(a.order());
            prop_assert_eq!(a.compose(&inv).unwrap(), id.clone());
            prop_assert_eq!(inv.compose(&a).unwrap(), id);
            // involution
            prop_assert_eq!(inv.revert().unwrap(), a);
        }

        #[test]
        fn pow_q_exponents_add(s in arb_unit_series(10), n1 in -4i64..=4, n2 in -4i64..=4) {
            let q1 = rat(n1, 3);
            let q2 = rat(n2, 3);
            let lhs = s.pow_q(&q1).unwrap().mul(&s.pow_q(&q2).unwrap());
            let rhs = s.pow_q(&(q1 + q2)).unwrap();
            prop_assert_eq!(lhs.coeffs().to_vec(), rhs.coeffs().to_vec());
        }

        #[test]
        fn pow_square_then_sqrt(s in arb_unit_series(10)) {
            let rt = s.pow_q(&rat(2, 1)).unwrap().pow_q(&rat(1, 2)).unwrap();
            prop_assert_eq!(rt.coeffs().to_vec(), s.coeffs().to_vec());
        }

        #[test]
        fn fundamental_theorem(s in arb_series(10)) {
            prop_assert_eq!(s.antiderivative().derivative(), s);
        }

        #[test]
        fn exp_log_round_trip(s in arb_unit_series(12)) {
            let back = exp_of(&log_of(&s).unwrap()).unwrap();
            prop_assert_eq!(back.coeffs().to_vec(), s.coeffs().to_vec());
        }

        #[test]
        fn parity_algebra(a in arb_odd_unit(8), b in arb_odd_unit(8)) {
            prop_assert_eq!(a.mul(&b).parity(), Parity::Even);
            prop_assert_eq!(a.compose(&b).unwrap().parity(), Parity::Odd);
            let even = a.mul(&a);
            prop_assert_eq!(even.compose(&b).unwrap().parity(), Parity::Even);
        }
    }
}
