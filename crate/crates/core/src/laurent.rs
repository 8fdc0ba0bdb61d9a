//! Sparse bivariate Laurent polynomials with exact rational coefficients.
//!
//! A term `g * z_m^{-k_m} * z_n^{-k_n}` is stored under the key `(k_m, k_n)`,
//! so the key is the offset the term reads from: when a polynomial acts on a
//! polyphase component, a term keyed `(k_m, k_n)` reads the sample at
//! `(x + k_m, y + k_n)`. The subscript `m` is the horizontal axis and `n` the
//! vertical one.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact coefficient type of the symbolic layer.
pub type Coeff = BigRational;

/// Exponent key `(k_m, k_n)`.
pub type Exponent = (i32, i32);

/// Direction a univariate polynomial is laid along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    /// `z_m`, along image rows.
    Horizontal,
    /// `z_n`, along image columns.
    Vertical,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<Exponent, Coeff>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Self::monomial((0, 0), c)
    }

    pub fn monomial(exp: Exponent, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Self { terms }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed and zero results dropped.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, Coeff)>,
    {
        let mut out = BTreeMap::new();
        for (exp, c) in terms {
            accumulate(&mut out, exp, c);
        }
        Self { terms: out }
    }

    /// Univariate polynomial in `z_m` from `(k, g_k)` pairs.
    pub fn horizontal<I>(taps: I) -> Self
    where
        I: IntoIterator<Item = (i32, Coeff)>,
    {
        Self::from_terms(taps.into_iter().map(|(k, c)| ((k, 0), c)))
    }

    /// Same as [`LaurentPoly::horizontal`] with small-integer fractions.
    pub fn horizontal_ratios(taps: &[(i32, i64, i64)]) -> Self {
        Self::horizontal(taps.iter().map(|&(k, n, d)| (k, ratio(n, d))))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)).is_some_and(One::is_one)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == (0, 0))
    }

    pub fn coeff(&self, exp: Exponent) -> Coeff {
        self.terms.get(&exp).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coeff)> {
        self.terms.iter()
    }

    /// Number of stored nonzero terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `G*(z_m, z_n) = G(z_n, z_m)`.
    pub fn transpose(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(km, kn), c)| ((kn, km), c.clone())).collect(),
        }
    }

    /// The single formal variable this polynomial uses, if it is univariate.
    /// Constants report `Some(None)`; genuinely bivariate polynomials `None`.
    pub fn univariate_axis(&self) -> Option<Option<Axis>> {
        let horizontal = self.terms.keys().all(|&(_, kn)| kn == 0);
        let vertical = self.terms.keys().all(|&(km, _)| km == 0);
        match (horizontal, vertical) {
            (true, true) => Some(None),
            (true, false) => Some(Some(Axis::Horizontal)),
            (false, true) => Some(Some(Axis::Vertical)),
            (false, false) => None,
        }
    }

    /// Lays a univariate polynomial along `axis`.
    pub fn embed(&self, axis: Axis) -> Result<Self> {
        let current = self
            .univariate_axis()
            .ok_or_else(|| Error::NotUnivariate(self.to_string()))?;
        Ok(match current {
            Some(a) if a != axis => self.transpose(),
            _ => self.clone(),
        })
    }

    /// Splits into the constant term and the remainder.
    pub fn split_constant(&self) -> (Self, Self) {
        let mut rest = self.terms.clone();
        let constant = match rest.remove(&(0, 0)) {
            Some(c) => Self::constant(c),
            None => Self::zero(),
        };
        (constant, Self { terms: rest })
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&e, v)| (e, v * c)).collect(),
        }
    }

    /// Inclusive exponent ranges `((min_m, max_m), (min_n, max_n))`, or
    /// `None` for the zero polynomial.
    pub fn extent(&self) -> Option<((i32, i32), (i32, i32))> {
        let mut it = self.terms.keys();
        let &(m0, n0) = it.next()?;
        let mut ext = ((m0, m0), (n0, n0));
        for &(m, n) in it {
            ext.0 .0 = ext.0 .0.min(m);
            ext.0 .1 = ext.0 .1.max(m);
            ext.1 .0 = ext.1 .0.min(n);
            ext.1 .1 = ext.1 .1.max(n);
        }
        Some(ext)
    }

    /// Largest absolute coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (e, c) in &self.terms {
            worst = worst.max(to_f64(&(c - other.coeff(*e))).abs());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(to_f64(c).abs());
            }
        }
        worst
    }

    /// Terms lowered to `f64` in exponent order.
    pub fn to_f64_terms(&self) -> Vec<(Exponent, f64)> {
        self.terms.iter().map(|(&e, c)| (e, to_f64(c))).collect()
    }
}

fn accumulate(terms: &mut BTreeMap<Exponent, Coeff>, exp: Exponent, c: Coeff) {
    if c.is_zero() {
        return;
    }
    match terms.entry(exp) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

pub fn ratio(numer: i64, denom: i64) -> Coeff {
    Coeff::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn to_f64(c: &Coeff) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Parses an exact coefficient: an integer, `a/b`, or a decimal literal with
/// optional exponent (`-1.586134342059924`, `2.5e-3`). Decimals are read as
/// exact decimal fractions, not through binary floating point.
pub fn parse_coeff(text: &str) -> Result<Coeff> {
    let s = text.trim();
    let bad = || Error::Parse(format!("invalid coefficient `{text}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Coeff::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Coeff::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Coeff::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut terms = self.terms.clone();
        for (&e, c) in &rhs.terms {
            accumulate(&mut terms, e, c.clone());
        }
        LaurentPoly { terms }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut terms = self.terms.clone();
        for (&e, c) in &rhs.terms {
            accumulate(&mut terms, e, -c.clone());
        }
        LaurentPoly { terms }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;

    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        for (&(am, an), a) in &self.terms {
            for (&(bm, bn), b) in &rhs.terms {
                accumulate(&mut terms, (am + bm, an + bn), a * b);
            }
        }
        LaurentPoly { terms }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl fmt::Display for LaurentPoly {
    /// `0` for the zero polynomial, otherwise terms such as
    /// `-1/2 + -1/2*zm^-1*zn^0`, listed in exponent order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&(km, kn), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            if km != 0 {
                write!(f, "*zm^{}", -km)?;
            }
            if kn != 0 {
                write!(f, "*zn^{}", -kn)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cdf53_predict() -> LaurentPoly {
        LaurentPoly::horizontal_ratios(&[(0, -1, 2), (1, -1, 2)])
    }

    fn cdf53_update() -> LaurentPoly {
        LaurentPoly::horizontal_ratios(&[(0, 1, 4), (-1, 1, 4)])
    }

    #[test]
    fn add_builds_cdf53_predict() {
        let a = LaurentPoly::constant(ratio(-1, 2));
        let b = LaurentPoly::monomial((1, 0), ratio(-1, 2));
        assert_eq!(&a + &b, cdf53_predict());
    }

    #[test]
    fn add_identity_and_cancellation() {
        let p = cdf53_predict();
        assert_eq!(&p + &LaurentPoly::zero(), p);
        let sum = &p + &(-&p);
        assert!(sum.is_zero());
        assert_eq!(sum.term_count(), 0);
    }

    #[test]
    fn predict_update_product_plus_one() {
        let v = &(&cdf53_predict() * &cdf53_update()) + &LaurentPoly::one();
        let expected = LaurentPoly::horizontal_ratios(&[(-1, -1, 8), (0, 3, 4), (1, -1, 8)]);
        assert_eq!(v, expected);
        assert_eq!(v.term_count(), 3);
    }

    #[test]
    fn mul_identity_and_expansion() {
        let p = cdf53_predict();
        assert_eq!(&p * &LaurentPoly::one(), p);
        let a = LaurentPoly::horizontal_ratios(&[(0, 1, 1), (1, 1, 1)]);
        let b = LaurentPoly::horizontal_ratios(&[(0, 1, 1), (-1, 1, 1)]);
        let expected = LaurentPoly::horizontal_ratios(&[(-1, 1, 1), (0, 2, 1), (1, 1, 1)]);
        assert_eq!(&a * &b, expected);
    }

    #[test]
    fn transpose_examples() {
        let c = LaurentPoly::constant(ratio(3, 7));
        assert_eq!(c.transpose(), c);
        let p = cdf53_predict();
        let t = p.transpose();
        assert_eq!(t.coeff((0, 1)), ratio(-1, 2));
        assert_eq!(t.coeff((0, 0)), ratio(-1, 2));
        assert_eq!(t.term_count(), 2);
        assert_eq!(t.transpose(), p);
    }

    #[test]
    fn embed_examples() {
        let p = cdf53_predict();
        let h = p.embed(Axis::Horizontal).unwrap();
        assert_eq!(h.coeff((0, 0)), ratio(-1, 2));
        assert_eq!(h.coeff((1, 0)), ratio(-1, 2));
        assert_eq!(p.embed(Axis::Vertical).unwrap(), h.transpose());
        // Already-vertical input lands on the requested axis too.
        assert_eq!(h.transpose().embed(Axis::Horizontal).unwrap(), h);
        let c = LaurentPoly::constant(ratio(5, 1));
        assert_eq!(c.embed(Axis::Vertical).unwrap(), c);
        assert_eq!(c.embed(Axis::Horizontal).unwrap(), c);
    }

    #[test]
    fn embed_rejects_bivariate() {
        let p = LaurentPoly::monomial((1, 1), ratio(1, 1));
        assert!(matches!(p.embed(Axis::Horizontal), Err(Error::NotUnivariate(_))));
    }

    #[test]
    fn split_constant_examples() {
        let (p0, p1) = cdf53_predict().split_constant();
        assert_eq!(p0, LaurentPoly::constant(ratio(-1, 2)));
        assert_eq!(p1, LaurentPoly::monomial((1, 0), ratio(-1, 2)));

        let c = LaurentPoly::constant(ratio(2, 3));
        let (c0, c1) = c.split_constant();
        assert_eq!(c0, c);
        assert!(c1.is_zero());

        let z = LaurentPoly::monomial((1, 0), ratio(1, 1));
        let (z0, z1) = z.split_constant();
        assert!(z0.is_zero());
        assert_eq!(z1, z);
    }

    #[test]
    fn term_counts() {
        let v = &(&cdf53_predict() * &cdf53_update()) + &LaurentPoly::one();
        assert_eq!(v.term_count(), 3);
        assert_eq!(LaurentPoly::zero().term_count(), 0);
        assert_eq!(cdf53_predict().term_count(), 2);
    }

    #[test]
    fn parse_coefficients() {
        assert_eq!(parse_coeff("-1/2").unwrap(), ratio(-1, 2));
        assert_eq!(parse_coeff("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_coeff("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_coeff("-1.5e1").unwrap(), ratio(-15, 1));
        assert_eq!(parse_coeff("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_coeff(".5").unwrap(), ratio(1, 2));
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "e5"] {
            assert!(parse_coeff(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn f64_lowering_survives_huge_rationals() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let c = Coeff::new(big.clone() * BigInt::from(3), big * BigInt::from(4));
        assert_eq!(to_f64(&c), 0.75);
        let c = Coeff::new(
            num_traits::pow(BigInt::from(2), 1100),
            num_traits::pow(BigInt::from(2), 1099),
        );
        assert_eq!(to_f64(&c), 2.0);
    }

    #[test]
    fn display_is_stable() {
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(cdf53_predict().to_string(), "-1/2 + -1/2*zm^-1");
    }
}
