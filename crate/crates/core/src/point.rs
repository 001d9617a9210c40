//! Exact price points, bundles and the extended-real valuation type.
//!
//! Prices are arbitrary-precision rationals. Demand evaluation never
//! touches floating point: a point is rescaled to a common denominator and
//! every surplus `b_i - p_i` is compared as an integer.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse `"7"`, `"-3/4"` into an exact rational. Decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub(crate) fn to_i64(r: &BigInt) -> i64 {
    r.to_i64().expect("integer out of i64 range")
}

/// A price vector over goods `1..=n`; the reject good is implicit at price 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(Vec<Rational>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RationalPoint(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RationalPoint(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        RationalPoint(vec![Rational::zero(); n])
    }

    /// `"3,5/2"` style literal.
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()
            .map(RationalPoint)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    /// Price of good `g` in `[n]_0` numbering (good 0 costs nothing).
    pub fn price(&self, good: usize) -> Rational {
        if good == 0 {
            Rational::zero()
        } else {
            self.0[good - 1].clone()
        }
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    pub fn ceil(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|c| to_i64(&c.ceil().to_integer()))
            .collect()
    }

    pub fn floor(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|c| to_i64(&c.floor().to_integer()))
            .collect()
    }

    pub fn linf_distance(&self, other: &RationalPoint) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Translate by an integral vector.
    pub fn shifted(&self, by: &[i64]) -> RationalPoint {
        RationalPoint(self.0.iter().zip(by).map(|(c, &d)| c + int(d)).collect())
    }

    pub fn offset_from(&self, center: &[i64]) -> Vec<Rational> {
        self.0
            .iter()
            .zip(center)
            .map(|(c, &o)| c - int(o))
            .collect()
    }

    /// `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &RationalPoint, t: &Rational) -> RationalPoint {
        let s = Rational::one() - t;
        RationalPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a * &s + b * t)
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &RationalPoint) -> RationalPoint {
        let half = ratio(1, 2);
        RationalPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a + b) * &half)
                .collect(),
        )
    }

    /// True when no integral SS hyperplane (`p_i = c` or `p_i - p_j = c`)
    /// passes through the point, i.e. the point is non-marginal for every
    /// integral bid list.
    pub fn is_generic(&self) -> bool {
        let n = self.0.len();
        for i in 0..n {
            if self.0[i].is_integer() {
                return false;
            }
            for j in (i + 1)..n {
                if (&self.0[i] - &self.0[j]).is_integer() {
                    return false;
                }
            }
        }
        true
    }
}

impl Index<usize> for RationalPoint {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// An aggregate demanded bundle; entry `i` counts items of good `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle(pub Vec<i64>);

impl Bundle {
    pub fn zero(n: usize) -> Self {
        Bundle(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    /// Add `weight` items of good `good` (`[n]_0` numbering; good 0 is a no-op).
    pub fn add_good(&mut self, good: usize, weight: i64) {
        if good > 0 {
            self.0[good - 1] += weight;
        }
    }

    pub fn sub(&self, other: &Bundle) -> Bundle {
        Bundle(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self - e^i + e^j` with `e^0 = 0`.
    pub fn exchanged(&self, drop: usize, add: usize) -> Bundle {
        let mut out = self.clone();
        out.add_good(drop, -1);
        out.add_good(add, 1);
        out
    }

    pub fn dot(&self, p: &RationalPoint) -> Rational {
        self.0
            .iter()
            .zip(p.coords())
            .map(|(&x, c)| c * int(x))
            .sum()
    }
}

impl Index<usize> for Bundle {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Bundle {
    fn index_mut(&mut self, i: usize) -> &mut i64 {
        &mut self.0[i]
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A rational extended by minus infinity; the codomain of valuations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtRational {
    MinusInfinity,
    Finite(Rational),
}

impl ExtRational {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::MinusInfinity => None,
        }
    }

    /// Sum, absorbing into minus infinity.
    pub fn plus(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::MinusInfinity,
        }
    }

    pub fn minus_finite(&self, r: &Rational) -> ExtRational {
        match self {
            ExtRational::Finite(a) => ExtRational::Finite(a - r),
            ExtRational::MinusInfinity => ExtRational::MinusInfinity,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::MinusInfinity => write!(f, "-inf"),
            ExtRational::Finite(r) => write!(f, "{r}"),
        }
    }
}

/// A price point rescaled to a common denominator, for exact integer
/// surplus comparisons. Small values stay in `i128`.
#[derive(Clone, Debug)]
pub(crate) enum ScaledPoint {
    Small { den: i128, nums: Vec<i128> },
    Big { den: BigInt, nums: Vec<BigInt> },
}

impl ScaledPoint {
    pub(crate) fn new(p: &RationalPoint) -> Self {
        let den = p
            .coords()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums: Vec<BigInt> = p
            .coords()
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let small = den.to_i64().is_some() && nums.iter().all(|v| v.to_i64().is_some());
        if small {
            ScaledPoint::Small {
                den: den.to_i64().unwrap() as i128,
                nums: nums.iter().map(|v| v.to_i64().unwrap() as i128).collect(),
            }
        } else {
            ScaledPoint::Big { den, nums }
        }
    }

    /// Bitmask over `[n]_0` of the goods maximizing `b_i - p_i`.
    pub(crate) fn demanded_mask(&self, vector: &[i64]) -> u64 {
        match self {
            ScaledPoint::Small { den, nums } => {
                let mut best: i128 = 0;
                let mut mask = 1u64;
                for (k, (&b, &p)) in vector.iter().zip(nums).enumerate() {
                    // |b| < 2^63 and |den|, |p| < 2^63, so this cannot overflow.
                    let s = b as i128 * den - p;
                    match s.cmp(&best) {
                        Ordering::Greater => {
                            best = s;
                            mask = 1 << (k + 1);
                        }
                        Ordering::Equal => mask |= 1 << (k + 1),
                        Ordering::Less => {}
                    }
                }
                mask
            }
            ScaledPoint::Big { den, nums } => {
                let mut best = BigInt::zero();
                let mut mask = 1u64;
                for (k, (&b, p)) in vector.iter().zip(nums).enumerate() {
                    let s = BigInt::from(b) * den - p;
                    match s.cmp(&best) {
                        Ordering::Greater => {
                            best = s;
                            mask = 1 << (k + 1);
                        }
                        Ordering::Equal => mask |= 1 << (k + 1),
                        Ordering::Less => {}
                    }
                }
                mask
            }
        }
    }
}
