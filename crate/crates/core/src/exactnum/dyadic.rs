use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational `numerator / 2^exponent`, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, exp: u64) -> Dyadic {
        let mut d = Dyadic {
            num: num.into(),
            exp,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Dyadic {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Dyadic {
        Dyadic {
            num: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(n: i64) -> Dyadic {
        Dyadic::new(n, 0)
    }

    /// 2^-k.
    pub fn pow2_neg(k: u64) -> Dyadic {
        Dyadic {
            num: BigInt::one(),
            exp: k,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        if self.exp == 0 {
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz as usize;
            self.exp -= tz;
        }
    }

    /// Numerator rescaled to denominator 2^exp (exp ≥ self.exp).
    fn scaled_num(&self, exp: u64) -> BigInt {
        &self.num << ((exp - self.exp) as usize)
    }

    pub fn pow(&self, n: u32) -> Dyadic {
        Dyadic {
            num: num_traits::pow(self.num.clone(), n as usize),
            exp: self.exp * n as u64,
        }
    }

    pub fn min(self, other: Dyadic) -> Dyadic {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Dyadic) -> Dyadic {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Largest multiple of 2^-bits that is ≤ self.
    pub fn floor_to(&self, bits: u64) -> Dyadic {
        if self.exp <= bits {
            return self.clone();
        }
        let shift = (self.exp - bits) as usize;
        Dyadic::new(self.num.clone() >> shift, bits)
    }

    /// Smallest multiple of 2^-bits that is ≥ self.
    pub fn ceil_to(&self, bits: u64) -> Dyadic {
        if self.exp <= bits {
            return self.clone();
        }
        let shift = (self.exp - bits) as usize;
        let (q, r) = self.num.div_mod_floor(&(BigInt::one() << shift));
        let q = if r.is_zero() { q } else { q + 1 };
        Dyadic::new(q, bits)
    }

    /// Largest power of two 2^-k (k ≥ 0) not exceeding `x`, for turning a
    /// decimal tolerance into an exact one. Returns `None` for x ≤ 0.
    pub fn pow2_at_most(x: f64) -> Option<Dyadic> {
        if x.is_nan() || x <= 0.0 || !x.is_finite() {
            return None;
        }
        if x >= 1.0 {
            return Some(Dyadic::one());
        }
        let mut k = 0u64;
        let mut v = 1.0f64;
        while v > x {
            v /= 2.0;
            k += 1;
        }
        Some(Dyadic::pow2_neg(k))
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.num.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.num >> (shift as usize)).to_f64().unwrap_or(0.0);
        ldexp(top, shift as i64 - self.exp as i64)
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 0 {
        let s = e.min(1000);
        x *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 {
        let s = (-e).min(1000);
        x /= 2f64.powi(s as i32);
        e += s;
    }
    x
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled_num(e).cmp(&other.scaled_num(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, o: &Dyadic) -> Dyadic {
        let e = self.exp.max(o.exp);
        Dyadic::new(self.scaled_num(e) + o.scaled_num(e), e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, o: &Dyadic) -> Dyadic {
        let e = self.exp.max(o.exp);
        Dyadic::new(self.scaled_num(e) - o.scaled_num(e), e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, o: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &o.num, self.exp + o.exp)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, o: Dyadic) -> Dyadic {
                (&self).$m(&o)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, o: &Dyadic) -> Dyadic {
                (&self).$m(o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |a, b| a + b)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Dyadic {
        Dyadic::from_int(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

fn power_of_two_exponent(d: &BigInt) -> Option<u64> {
    if d.sign() != Sign::Plus {
        return None;
    }
    let tz = d.trailing_zeros()?;
    if d == &(BigInt::one() << tz as usize) {
        Some(tz)
    } else {
        None
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `num/2^exp`, `p/q` with q a power of two, integers, and
    /// terminating decimals whose value is dyadic (`0.375`).
    fn from_str(s: &str) -> Result<Dyadic, Error> {
        let bad = || Error::InvalidDyadic(s.to_string());
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let num: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim();
            if let Some(e) = d.strip_prefix("2^") {
                return Ok(Dyadic::new(num, e.parse().map_err(|_| bad())?));
            }
            let den: BigInt = d.parse().map_err(|_| bad())?;
            let e = power_of_two_exponent(&den).ok_or_else(bad)?;
            return Ok(Dyadic::new(num, e));
        }
        if let Some((ip, fp)) = t.split_once('.') {
            if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = ip.starts_with('-');
            let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
            let mut num: BigInt = digits.parse().map_err(|_| bad())?;
            if neg {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), fp.len());
            let g = num.gcd(&den);
            let den = den / &g;
            let e = power_of_two_exponent(&den).ok_or_else(bad)?;
            return Ok(Dyadic::new(num / g, e));
        }
        let num: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(num, 0))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Dyadic, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}
