//! Rational functions over the truncated series ring.
//!
//! A [`RatFun`] is a pair numerator/denominator of exact polynomial-style
//! series. Equality is decided by cross multiplication, so no gcd
//! normalization is ever needed; expansion into an iterated Laurent ring is
//! performed by [`RatFun::iota`] with an explicit variable order.

use crate::error::Result;
use crate::profile::{Ctx, VarId};
use crate::rat::Rat;
use crate::series::Series;

#[derive(Clone, Debug)]
pub struct RatFun {
    pub num: Series,
    pub den: Series,
}

impl RatFun {
    pub fn from_series(s: Series) -> RatFun {
        let den = Series::one(s.ctx());
        RatFun { num: s, den }
    }

    pub fn zero(ctx: &Ctx) -> RatFun {
        RatFun::from_series(Series::zero(ctx))
    }

    pub fn one(ctx: &Ctx) -> RatFun {
        RatFun::from_series(Series::one(ctx))
    }

    pub fn new(num: Series, den: Series) -> RatFun {
        RatFun { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFun) -> Result<RatFun> {
        Ok(RatFun {
            num: self.num.mul(&o.den)?.add(&o.num.mul(&self.den)?)?,
            den: self.den.mul(&o.den)?,
        })
    }

    pub fn sub(&self, o: &RatFun) -> Result<RatFun> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFun) -> Result<RatFun> {
        Ok(RatFun {
            num: self.num.mul(&o.num)?,
            den: self.den.mul(&o.den)?,
        })
    }

    pub fn mul_series(&self, s: &Series) -> Result<RatFun> {
        Ok(RatFun {
            num: self.num.mul(s)?,
            den: self.den.clone(),
        })
    }

    pub fn scale(&self, r: &Rat) -> RatFun {
        RatFun {
            num: self.num.scale(r),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> RatFun {
        RatFun {
            num: self.den.clone(),
            den: self.num.clone(),
        }
    }

    /// Cross-multiplied difference `num*o.den - o.num*den`; zero iff the two
    /// rational functions agree on retained coefficients.
    pub fn cross_defect(&self, o: &RatFun) -> Result<Series> {
        self.num.mul(&o.den)?.sub(&o.num.mul(&self.den)?)
    }

    /// Expand into the iterated Laurent ring selected by the variable order.
    /// The denominator's retained h-valuation is handled by reducing the
    /// quotient's retained h-order.
    pub fn iota(&self, order: &[VarId]) -> Result<Series> {
        self.num.div_iota(&self.den, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TruncationProfile;
    use crate::series::Series;

    #[test]
    fn reexpansion_consistency() {
        // iota(num/den) * den == num exactly on retained coefficients
        let ctx = TruncationProfile::builder(3)
            .laurent("u", -6, 6)
            .taylor("v", 4)
            .build();
        let u = ctx.var("u").unwrap();
        let v = ctx.var("v").unwrap();
        // (1 + v) / (u - v)
        let num = Series::one(&ctx).add(&Series::var(&ctx, v)).unwrap();
        let den = Series::var(&ctx, u).sub(&Series::var(&ctx, v)).unwrap();
        let rf = RatFun::new(num.clone(), den.clone());
        let exp = rf.iota(&[u, v]).unwrap();
        let back = exp.mul(&den).unwrap();
        let defect = back
            .sub(&num)
            .unwrap()
            .first_defect(&[(u, -3, 3), (v, 0, 3)], 3)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn iota_respects_products() {
        // iota(fg) = iota(f) iota(g) on retained coefficients
        let ctx = TruncationProfile::builder(2)
            .laurent("u", -8, 12)
            .taylor("v", 4)
            .build();
        let u = ctx.var("u").unwrap();
        let v = ctx.var("v").unwrap();
        let f = RatFun::new(
            Series::one(&ctx),
            Series::var(&ctx, u).sub(&Series::var(&ctx, v)).unwrap(),
        );
        let g = RatFun::new(
            Series::var(&ctx, v),
            Series::one(&ctx).sub(&Series::var(&ctx, u)).unwrap(),
        );
        let lhs = f.mul(&g).unwrap().iota(&[u, v]).unwrap();
        let rhs = f
            .iota(&[u, v])
            .unwrap()
            .mul(&g.iota(&[u, v]).unwrap())
            .unwrap();
        let defect = lhs
            .sub(&rhs)
            .unwrap()
            .first_defect(&[(u, -4, 4), (v, 0, 3)], 2)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn cross_equality() {
        let ctx = TruncationProfile::builder(2).taylor("x", 6).build();
        let x = ctx.var("x").unwrap();
        // x/(1-x) == (x - x^2)/(1 - 2x + x^2)
        let a = RatFun::new(
            Series::var(&ctx, x),
            Series::one(&ctx).sub(&Series::var(&ctx, x)).unwrap(),
        );
        let d = Series::one(&ctx).sub(&Series::var(&ctx, x)).unwrap();
        let b = RatFun::new(
            Series::var(&ctx, x).mul(&d).unwrap(),
            d.mul(&d).unwrap(),
        );
        assert!(a.cross_defect(&b).unwrap().is_zero());
    }
}
