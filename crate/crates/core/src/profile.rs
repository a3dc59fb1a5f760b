//! Truncation profiles: the global exactness contract.
//!
//! A profile fixes the retained h-orders (`h^0 .. h^{K-1}`), and for every
//! formal variable the retained degree window. Taylor variables have window
//! `[0, cap]`; distinguished Laurent variables have a window that may extend
//! below zero. All series arithmetic is exact on retained coefficients;
//! producing a nonzero coefficient below a window floor is an error rather
//! than a silent clip.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a variable inside its profile.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpec {
    pub name: String,
    /// Window floor; 0 for Taylor variables.
    pub min_deg: i64,
    /// Window ceiling (the cap).
    pub max_deg: i64,
}

impl VarSpec {
    pub fn is_laurent(&self) -> bool {
        self.min_deg < 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationProfile {
    /// Retain h^0 .. h^{h_order-1}.
    pub h_order: usize,
    pub vars: Vec<VarSpec>,
}

pub type Ctx = Arc<TruncationProfile>;

impl TruncationProfile {
    pub fn builder(h_order: usize) -> ProfileBuilder {
        assert!(h_order >= 1, "h_order must be at least 1");
        ProfileBuilder {
            h_order,
            vars: Vec::new(),
        }
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn check_compatible(a: &Ctx, b: &Ctx) -> Result<()> {
        if Arc::ptr_eq(a, b) || **a == **b {
            Ok(())
        } else {
            Err(Error::ProfileMismatch(format!(
                "left has {} vars / h^{}, right has {} vars / h^{}",
                a.nvars(),
                a.h_order,
                b.nvars(),
                b.h_order
            )))
        }
    }
}

pub struct ProfileBuilder {
    h_order: usize,
    vars: Vec<VarSpec>,
}

impl ProfileBuilder {
    /// Taylor variable retaining degrees `0..=cap`.
    pub fn taylor(mut self, name: &str, cap: i64) -> Self {
        assert!(cap >= 1, "cap must be at least 1");
        self.push(name, 0, cap);
        self
    }

    /// Laurent variable retaining degrees `lo..=hi`.
    pub fn laurent(mut self, name: &str, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "window floor above ceiling");
        self.push(name, lo, hi);
        self
    }

    fn push(&mut self, name: &str, lo: i64, hi: i64) {
        assert!(
            !self.vars.iter().any(|v| v.name == name),
            "duplicate variable {name}"
        );
        self.vars.push(VarSpec {
            name: name.to_string(),
            min_deg: lo,
            max_deg: hi,
        });
    }

    pub fn build(self) -> Ctx {
        Arc::new(TruncationProfile {
            h_order: self.h_order,
            vars: self.vars,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_compat() {
        let p = TruncationProfile::builder(3)
            .taylor("u", 4)
            .laurent("z", -2, 5)
            .build();
        assert_eq!(p.var("u").unwrap(), 0);
        assert_eq!(p.var("z").unwrap(), 1);
        assert!(p.var("w").is_err());
        assert!(p.vars[1].is_laurent() && !p.vars[0].is_laurent());

        let q = TruncationProfile::builder(3)
            .taylor("u", 4)
            .laurent("z", -2, 5)
            .build();
        TruncationProfile::check_compatible(&p, &q).unwrap();
        let r = TruncationProfile::builder(4).taylor("u", 4).build();
        assert!(TruncationProfile::check_compatible(&p, &r).is_err());
    }
}
