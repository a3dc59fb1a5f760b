//! Exact rational scalars.
//!
//! Thin newtype over an arbitrary-precision rational. The inner value is kept
//! canonical (gcd 1, positive denominator) by construction.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn recip(&self) -> Result<Rat> {
        if self.is_zero() {
            return Err(Error::NotInvertible("1/0".into()));
        }
        Ok(Rat(self.0.recip()))
    }

    pub fn pow(&self, e: i32) -> Result<Rat> {
        if e >= 0 {
            Ok(Rat(self.0.pow(e)))
        } else {
            Ok(Rat(self.recip()?.0.pow(-e)))
        }
    }

    /// Binomial coefficient with rational upper argument, C(a, k).
    pub fn binom(a: &Rat, k: usize) -> Rat {
        let mut out = Rat::one();
        for j in 0..k {
            out = &out * &(a - &Rat::from_int(j as i64));
            out = &out / &Rat::from_int((j + 1) as i64);
        }
        out
    }

    pub fn factorial(n: usize) -> Rat {
        let mut out = Rat::one();
        for j in 2..=n {
            out = &out * &Rat::from_int(j as i64);
        }
        out
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rat {
    type Err = Error;

    /// Accepts `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Rat> {
        let bad = || Error::Invalid(format!("cannot parse rational `{s}`"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(Rat(BigRational::new(p, q)))
            }
            None => {
                let p: BigInt = s.trim().parse().map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(p)))
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $m:ident, $op:tt) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_and_parse() {
        let a: Rat = "4/-6".parse().unwrap();
        assert_eq!(a, Rat::new(-2, 3));
        assert_eq!(a.to_string(), "-2/3");
        let b: Rat = "7".parse().unwrap();
        assert_eq!(b, Rat::from_int(7));
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn binom_rational_upper() {
        // C(1/2, 2) = (1/2)(-1/2)/2 = -1/8
        assert_eq!(Rat::binom(&Rat::new(1, 2), 2), Rat::new(-1, 8));
    }
}
