//! Exact truncated series: sparse multivariate power/Laurent series over the
//! rationals with an h-adic grading.
//!
//! A [`Series`] stores a sparse map from monomials to nonzero rationals,
//! together with precision data that makes truncation honest:
//!
//! - `h_len`: coefficients of `h^0 .. h^{h_len-1}` are exact (`h_len` can drop
//!   below the profile order after divisions with h-valuation);
//! - per variable and h-order, content bounds `(lo, up)` and a trust bound
//!   `hi` (see [`Prec`]). Multiplying by a series with negative Laurent
//!   degrees shrinks `hi`; multiplying fully-known polynomials does not.
//!
//! Invariants:
//! - stored terms are nonzero and lie inside the trusted box;
//! - producing a nonzero coefficient below a window floor is a hard error,
//!   dropping one above a ceiling is recorded in the precision data;
//! - every trusted coefficient of every operation is exact.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::profile::{Ctx, TruncationProfile, VarId};
use crate::rat::Rat;

/// Unbounded sentinel for precision bookkeeping (kept far from i64 overflow).
const BIG: i64 = 1 << 40;

/// Exponent vector: slots `0..nvars` are the profile variables, the last slot
/// is the h-exponent.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Mono(pub Box<[i32]>);

impl Mono {
    pub fn unit(nvars: usize) -> Self {
        Mono(vec![0; nvars + 1].into_boxed_slice())
    }

    pub fn h_exp(&self) -> usize {
        self.0[self.0.len() - 1] as usize
    }

    fn grade(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn to_string_in(&self, ctx: &TruncationProfile) -> String {
        let mut parts = Vec::new();
        for (v, &e) in self.0[..ctx.nvars()].iter().enumerate() {
            if e != 0 {
                parts.push(format!("{}^{}", ctx.vars[v].name, e));
            }
        }
        let h = self.h_exp();
        if h != 0 {
            parts.push(format!("h^{h}"));
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Mono {
    // Graded lex with h last; purely internal.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.grade()
            .cmp(&other.grade())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-variable, per-h-order validity data.
///
/// For each variable `v` and retained h-order `k`:
/// - `lo[v][k]`: the true object has no content of `v`-degree `< lo` (among
///   monomials whose other coordinates lie inside their windows);
/// - `up[v][k]`: the content tops out at `up` (`BIG` once above-window terms
///   were dropped, i.e. the top is unknown);
/// - `hi[v][k]`: stored coefficients of `v`-degree `<= hi` are exact.
///
/// A monomial is trusted iff its degree in *every* variable is `<= hi`.
/// An empty slice is encoded as `lo = BIG, up = -BIG`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prec {
    pub h_len: usize,
    lo: Vec<Vec<i64>>,
    up: Vec<Vec<i64>>,
    hi: Vec<Vec<i64>>,
}

impl Prec {
    fn vacuous(ctx: &TruncationProfile, h_len: usize) -> Prec {
        Prec {
            h_len,
            lo: ctx.vars.iter().map(|_| vec![BIG; h_len]).collect(),
            up: ctx.vars.iter().map(|_| vec![-BIG; h_len]).collect(),
            hi: ctx.vars.iter().map(|_| vec![BIG; h_len]).collect(),
        }
    }

    pub fn lo(&self, v: VarId, k: usize) -> i64 {
        self.lo[v][k]
    }

    pub fn up(&self, v: VarId, k: usize) -> i64 {
        self.up[v][k]
    }

    pub fn hi(&self, v: VarId, k: usize) -> i64 {
        self.hi[v][k]
    }

    fn slice_empty(&self, k: usize) -> bool {
        // emptiness of the slice shows up in every slot; checking one is enough
        self.lo.iter().zip(&self.up).any(|(lo, up)| lo[k] > up[k])
    }

    /// min over h-orders `0..=k`.
    fn lo_env(&self, v: VarId, k: usize) -> i64 {
        (0..=k).map(|j| self.lo[v][j]).min().unwrap()
    }

    fn up_env(&self, v: VarId, k: usize) -> i64 {
        (0..=k).map(|j| self.up[v][j]).max().unwrap()
    }

    fn hi_env(&self, v: VarId, k: usize) -> i64 {
        (0..=k).map(|j| self.hi[v][j]).min().unwrap()
    }

    /// Where content may extend above a window ceiling, stored data is only
    /// trustworthy up to the ceiling.
    fn clip_to_windows(&mut self, ctx: &TruncationProfile) {
        for (v, spec) in ctx.vars.iter().enumerate() {
            for k in 0..self.h_len {
                if self.up[v][k] > spec.max_deg {
                    self.hi[v][k] = self.hi[v][k].min(spec.max_deg);
                }
            }
        }
    }
}

#[derive(Clone)]
pub struct Series {
    ctx: Ctx,
    terms: BTreeMap<Mono, Rat>,
    prec: Prec,
}

impl PartialEq for Series {
    /// Structural equality of stored content (precision data not compared).
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.terms == other.terms
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c, m.to_string_in(&self.ctx)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Series {
    // ------------------------------------------------------------------
    // Constructors. These build exact objects: storage equals truth.
    // ------------------------------------------------------------------

    pub fn zero(ctx: &Ctx) -> Series {
        Series {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            prec: Prec::vacuous(ctx, ctx.h_order),
        }
    }

    pub fn constant(ctx: &Ctx, r: Rat) -> Series {
        let mut s = Series::zero(ctx);
        if !r.is_zero() {
            s.terms.insert(Mono::unit(ctx.nvars()), r);
            s.recompute_bounds_exact();
        }
        s
    }

    pub fn one(ctx: &Ctx) -> Series {
        Series::constant(ctx, Rat::one())
    }

    pub fn int(ctx: &Ctx, n: i64) -> Series {
        Series::constant(ctx, Rat::from_int(n))
    }

    /// Single exact monomial `r * prod v^e * h^h_exp`; the exponents must lie
    /// inside the storage windows.
    pub fn monomial(ctx: &Ctx, exps: &[(VarId, i64)], h_exp: usize, r: Rat) -> Result<Series> {
        let mut s = Series::zero(ctx);
        if r.is_zero() || h_exp >= ctx.h_order {
            return Ok(s);
        }
        let mut m = Mono::unit(ctx.nvars());
        for &(v, e) in exps {
            m.0[v] += e as i32;
        }
        m.0[ctx.nvars()] = h_exp as i32;
        for v in 0..ctx.nvars() {
            let e = m.0[v] as i64;
            if e < ctx.vars[v].min_deg || e > ctx.vars[v].max_deg {
                return Err(Error::WindowExceeded {
                    var: ctx.vars[v].name.clone(),
                    h_order: h_exp,
                    degree: e,
                    floor: ctx.vars[v].min_deg,
                });
            }
        }
        s.terms.insert(m, r);
        s.recompute_bounds_exact();
        Ok(s)
    }

    pub fn var(ctx: &Ctx, v: VarId) -> Series {
        Series::monomial(ctx, &[(v, 1)], 0, Rat::one()).expect("variable monomial")
    }

    pub fn h(ctx: &Ctx) -> Series {
        Series::monomial(ctx, &[], 1, Rat::one()).expect("h monomial")
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn prec(&self) -> &Prec {
        &self.prec
    }

    pub fn h_len(&self) -> usize {
        self.prec.h_len
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Minimal h-exponent of the stored content; `None` for the zero series.
    pub fn h_valuation(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.h_exp()).min()
    }

    /// Shrink the retained h-order (dropping terms and precision data).
    pub fn truncate_h_len(&self, len: usize) -> Series {
        let len = len.min(self.prec.h_len).max(1);
        let mut out = self.clone();
        out.prec.h_len = len;
        for v in 0..self.nvars() {
            out.prec.lo[v].truncate(len);
            out.prec.up[v].truncate(len);
            out.prec.hi[v].truncate(len);
        }
        out.terms.retain(|m, _| m.h_exp() < len);
        out
    }

    /// Declare that the content of `v` continues above the stored window
    /// (deliberate truncation of an infinite series).
    pub fn mark_truncated_above(&mut self, v: VarId) {
        let cap = self.ctx.vars[v].max_deg;
        for k in 0..self.prec.h_len {
            self.prec.up[v][k] = BIG;
            self.prec.hi[v][k] = self.prec.hi[v][k].min(cap);
        }
    }

    // ------------------------------------------------------------------
    // Precision plumbing
    // ------------------------------------------------------------------

    fn nvars(&self) -> usize {
        self.ctx.nvars()
    }

    /// For constructors whose storage IS the true object: overwrite the
    /// content bounds with the stored minima/maxima, full trust.
    fn recompute_bounds_exact(&mut self) {
        let nv = self.nvars();
        let h_len = self.prec.h_len;
        let mut lo = vec![vec![BIG; h_len]; nv];
        let mut up = vec![vec![-BIG; h_len]; nv];
        for m in self.terms.keys() {
            let k = m.h_exp();
            for v in 0..nv {
                let e = m.0[v] as i64;
                lo[v][k] = lo[v][k].min(e);
                up[v][k] = up[v][k].max(e);
            }
        }
        self.prec.lo = lo;
        self.prec.up = up;
        self.prec.hi = vec![vec![BIG; h_len]; nv];
    }

    /// A one-term decomposition piece of `self`: exact single monomial, with
    /// `self`'s retained h-order.
    fn term_piece(&self, ex: Box<[i32]>, c: Rat) -> Series {
        let mut s = Series {
            ctx: self.ctx.clone(),
            terms: BTreeMap::from([(Mono(ex), c)]),
            prec: Prec::vacuous(&self.ctx, self.prec.h_len),
        };
        s.recompute_bounds_exact();
        s
    }

    /// Drop terms that are zero or fall outside the trusted box, then raise
    /// the content bounds to the tightest sound claim.
    fn normalize(&mut self) {
        self.prec.clip_to_windows(&self.ctx);
        let prec = &self.prec;
        let nv = self.nvars();
        self.terms.retain(|m, c| {
            if c.is_zero() {
                return false;
            }
            let k = m.h_exp();
            if k >= prec.h_len {
                return false;
            }
            (0..nv).all(|v| (m.0[v] as i64) <= prec.hi[v][k])
        });
        // Tightening pass: stored content within trust equals truth there, so
        // the sharpest sound claims are min(stored min, hi+1) from below and
        // max(stored max, recorded up beyond hi) from above.
        let h_len = self.prec.h_len;
        let mut mins = vec![vec![BIG; h_len]; nv];
        let mut maxs = vec![vec![-BIG; h_len]; nv];
        for m in self.terms.keys() {
            let k = m.h_exp();
            for v in 0..nv {
                let e = m.0[v] as i64;
                mins[v][k] = mins[v][k].min(e);
                maxs[v][k] = maxs[v][k].max(e);
            }
        }
        for v in 0..nv {
            for k in 0..h_len {
                let lo_bound = mins[v][k].min(self.prec.hi[v][k].saturating_add(1));
                if lo_bound > self.prec.lo[v][k] {
                    self.prec.lo[v][k] = lo_bound;
                }
                let up_bound = if self.prec.up[v][k] > self.prec.hi[v][k] {
                    self.prec.up[v][k]
                } else {
                    maxs[v][k]
                };
                if up_bound < self.prec.up[v][k] {
                    self.prec.up[v][k] = up_bound;
                }
            }
        }
    }

    fn check_ctx(&self, other: &Series) -> Result<()> {
        TruncationProfile::check_compatible(&self.ctx, &other.ctx)
    }

    /// Accumulate `r` at `m`, erroring below window floors and dropping above
    /// ceilings (the caller's precision data must cover the drop).
    fn accumulate(
        ctx: &TruncationProfile,
        terms: &mut BTreeMap<Mono, Rat>,
        m: Mono,
        r: Rat,
    ) -> Result<()> {
        if r.is_zero() {
            return Ok(());
        }
        for v in 0..ctx.nvars() {
            let e = m.0[v] as i64;
            if e < ctx.vars[v].min_deg {
                return Err(Error::WindowExceeded {
                    var: ctx.vars[v].name.clone(),
                    h_order: m.h_exp(),
                    degree: e,
                    floor: ctx.vars[v].min_deg,
                });
            }
            if e > ctx.vars[v].max_deg {
                return Ok(());
            }
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(r);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &r;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Ring operations
    // ------------------------------------------------------------------

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_ctx(other)?;
        let h_len = self.prec.h_len.min(other.prec.h_len);
        let nv = self.nvars();
        let mut prec = Prec::vacuous(&self.ctx, h_len);
        for v in 0..nv {
            for k in 0..h_len {
                prec.lo[v][k] = self.prec.lo[v][k].min(other.prec.lo[v][k]);
                prec.up[v][k] = self.prec.up[v][k].max(other.prec.up[v][k]);
                prec.hi[v][k] = self.prec.hi[v][k].min(other.prec.hi[v][k]);
            }
        }
        let mut terms = self.terms.clone();
        terms.retain(|m, _| m.h_exp() < h_len);
        for (m, c) in &other.terms {
            if m.h_exp() >= h_len {
                continue;
            }
            Series::accumulate(&self.ctx, &mut terms, m.clone(), c.clone())?;
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn scale(&self, r: &Rat) -> Series {
        if r.is_zero() {
            return Series::zero(&self.ctx);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = &*c * r;
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_ctx(other)?;
        let h_len = self.prec.h_len.min(other.prec.h_len);
        let nv = self.nvars();

        let mut prec = Prec::vacuous(&self.ctx, h_len);
        for k in 0..h_len {
            for k1 in 0..=k {
                let k2 = k - k1;
                if self.prec.slice_empty(k1) || other.prec.slice_empty(k2) {
                    continue;
                }
                for v in 0..nv {
                    let la = self.prec.lo[v][k1];
                    let ua = self.prec.up[v][k1];
                    let ha = self.prec.hi[v][k1];
                    let lb = other.prec.lo[v][k2];
                    let ub = other.prec.up[v][k2];
                    let hb = other.prec.hi[v][k2];
                    prec.lo[v][k] = prec.lo[v][k].min(la + lb);
                    let up_pair = if ua >= BIG || ub >= BIG { BIG } else { ua + ub };
                    prec.up[v][k] = prec.up[v][k].max(up_pair);
                    // a pair constrains trust only where a factor's content
                    // extends beyond its own trusted degrees
                    if ua > ha {
                        prec.hi[v][k] = prec.hi[v][k].min(ha + lb);
                    }
                    if ub > hb {
                        prec.hi[v][k] = prec.hi[v][k].min(hb + la);
                    }
                }
            }
        }

        let mut terms = BTreeMap::new();
        let n_slots = nv + 1;
        for (ma, ca) in &self.terms {
            let ha = ma.h_exp();
            if ha >= h_len {
                continue;
            }
            for (mb, cb) in &other.terms {
                if ha + mb.h_exp() >= h_len {
                    continue;
                }
                let mut ex = vec![0i32; n_slots];
                for i in 0..n_slots {
                    ex[i] = ma.0[i] + mb.0[i];
                }
                Series::accumulate(&self.ctx, &mut terms, Mono(ex.into_boxed_slice()), ca * cb)?;
            }
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Result<Series> {
        let mut out = Series::one(&self.ctx);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // h-adic division
    // ------------------------------------------------------------------

    /// Exact division by h^d. The quotient retains `h_len - d` exact orders.
    pub fn div_h_pow(&self, d: usize) -> Result<Series> {
        if d == 0 {
            return Ok(self.clone());
        }
        if self.prec.h_len <= d {
            return Err(Error::DivisionNotExact(format!(
                "h^{d} division leaves no retained h-orders"
            )));
        }
        let nv = self.nvars();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.h_exp();
            if k < d {
                return Err(Error::DivisionNotExact(format!(
                    "coefficient at {} has h-valuation {k} < {d}",
                    m.to_string_in(&self.ctx)
                )));
            }
            let mut ex = m.0.clone();
            ex[nv] -= d as i32;
            terms.insert(Mono(ex), c.clone());
        }
        let h_len = self.prec.h_len - d;
        let mut prec = Prec::vacuous(&self.ctx, h_len);
        for v in 0..nv {
            for k in 0..h_len {
                prec.lo[v][k] = self.prec.lo[v][k + d];
                prec.up[v][k] = self.prec.up[v][k + d];
                prec.hi[v][k] = self.prec.hi[v][k + d];
            }
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    // ------------------------------------------------------------------
    // Inversion along an expansion order
    // ------------------------------------------------------------------

    /// Compare monomials in the expansion sense for the given variable order
    /// (first entry is the outermost/largest variable). Variables not listed
    /// act adically (checked first, in profile order). Returns Greater when
    /// `a` is the larger monomial.
    fn iota_cmp(&self, a: &Mono, b: &Mono, order: &[VarId]) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let nv = self.nvars();
        for v in 0..nv {
            if order.contains(&v) {
                continue;
            }
            let (ea, eb) = (a.0[v], b.0[v]);
            if ea != eb {
                // smaller exponent in an adic variable = larger monomial
                return if ea < eb { Ordering::Greater } else { Ordering::Less };
            }
        }
        for &v in order.iter().rev() {
            let (ea, eb) = (a.0[v], b.0[v]);
            if ea != eb {
                return if ea < eb { Ordering::Greater } else { Ordering::Less };
            }
        }
        Ordering::Equal
    }

    fn max_iteration_bound(&self) -> usize {
        let widths: i64 = self
            .ctx
            .vars
            .iter()
            .map(|v| (v.max_deg - v.min_deg).max(1))
            .sum();
        (widths as usize + self.ctx.h_order + 8) * 2
    }

    /// Invert a series whose h-order-zero part has an invertible leading term
    /// under the given expansion order. This realizes the embedding of
    /// 1/denominator into the iterated Laurent ring selected by `order`.
    pub fn invert_iota(&self, order: &[VarId]) -> Result<Series> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero series".into()));
        }
        // Split off the h-order-zero part.
        let mut d0 = self.clone();
        d0.terms.retain(|m, _| m.h_exp() == 0);
        let mut dpos = self.clone();
        dpos.terms.retain(|m, _| m.h_exp() > 0);
        if d0.is_zero() {
            return Err(Error::NotInvertible(
                "positive h-valuation; divide with h-valuation tracking instead".into(),
            ));
        }

        // Leading term under the expansion order.
        let (lead_m, lead_c) = d0
            .terms
            .iter()
            .max_by(|(a, _), (b, _)| self.iota_cmp(a, b, order))
            .map(|(m, c)| (m.clone(), c.clone()))
            .unwrap();

        // T^{-1}
        let nv = self.nvars();
        let mut inv_exps = Vec::new();
        for v in 0..nv {
            if lead_m.0[v] != 0 {
                inv_exps.push((v, -(lead_m.0[v] as i64)));
            }
        }
        let lead_inv = Series::monomial(&self.ctx, &inv_exps, 0, lead_c.recip()?)?;

        // E = 1 - D0 * T^{-1}; every monomial of E must be strictly small.
        let e = Series::one(&self.ctx).sub(&d0.mul(&lead_inv)?)?;
        let unit = Mono::unit(nv);
        for m in e.terms.keys() {
            let mut probe = m.clone();
            probe.0[nv] = 0;
            if self.iota_cmp(&probe, &unit, order) != std::cmp::Ordering::Less {
                return Err(Error::NotInvertible(format!(
                    "term {} is not subordinate to the leading term {}",
                    m.to_string_in(&self.ctx),
                    lead_m.to_string_in(&self.ctx)
                )));
            }
        }

        // Geometric series in E. The final storage-empty partial product is
        // folded in so that truncated-tail claims survive in the result.
        let mut inv0 = Series::one(&self.ctx);
        let mut acc = Series::one(&self.ctx);
        let bound = self.max_iteration_bound();
        let mut steps = 0usize;
        loop {
            acc = acc.mul(&e)?;
            inv0 = inv0.add(&acc)?;
            if acc.is_zero() {
                break;
            }
            steps += 1;
            if steps > bound {
                return Err(Error::ExpansionDiverged(format!(
                    "geometric expansion still alive after {bound} steps"
                )));
            }
        }
        let inv0 = lead_inv.mul(&inv0)?;

        if dpos.is_zero() {
            return Ok(inv0);
        }
        // 1/(D0 + D+) = inv0 * sum_j (-D+ * inv0)^j ; D+ has h-valuation >= 1.
        let step = dpos.mul(&inv0)?.neg();
        let mut out = Series::one(&self.ctx);
        let mut acc = Series::one(&self.ctx);
        for _ in 1..self.prec.h_len {
            acc = acc.mul(&step)?;
            out = out.add(&acc)?;
            if acc.is_zero() {
                break;
            }
        }
        inv0.mul(&out)
    }

    /// `num / den` where `den` may have positive h-valuation; the quotient's
    /// retained h-order drops by that valuation.
    pub fn div_iota(&self, den: &Series, order: &[VarId]) -> Result<Series> {
        let w = den
            .h_valuation()
            .ok_or_else(|| Error::NotInvertible("division by zero series".into()))?;
        if w == 0 {
            return self.mul(&den.invert_iota(order)?);
        }
        let num = self.div_h_pow(w)?;
        let den = den.div_h_pow(w)?;
        num.mul(&den.invert_iota(order)?)
    }

    // ------------------------------------------------------------------
    // Analytic-style series maps
    // ------------------------------------------------------------------

    /// exp of a series with no constant term and no negative exponents.
    pub fn exp(&self) -> Result<Series> {
        for m in self.terms.keys() {
            let positive = m.h_exp() > 0 || m.0[..self.nvars()].iter().any(|&e| e > 0);
            let nonneg = m.0[..self.nvars()].iter().all(|&e| e >= 0);
            if !positive || !nonneg {
                return Err(Error::Invalid(format!(
                    "exp argument has non-nilpotent monomial {}",
                    m.to_string_in(&self.ctx)
                )));
            }
        }
        let mut out = Series::one(&self.ctx);
        let mut acc = Series::one(&self.ctx);
        let bound = self.max_iteration_bound();
        for j in 1..=bound {
            acc = acc.mul(self)?.scale(&Rat::from_int(j as i64).recip()?);
            out = out.add(&acc)?;
            if acc.is_zero() {
                return Ok(out);
            }
        }
        Err(Error::ExpansionDiverged("exp".into()))
    }

    /// Square root of a series with constant term 1; the result also has
    /// constant term 1 and squares back to the input on retained
    /// coefficients.
    pub fn sqrt_unit(&self) -> Result<Series> {
        let unit = Mono::unit(self.nvars());
        match self.terms.get(&unit) {
            Some(c) if c.is_one() => {}
            _ => {
                return Err(Error::Invalid(
                    "sqrt_unit requires constant term exactly 1".into(),
                ))
            }
        }
        let e = self.sub(&Series::one(&self.ctx))?;
        let half = Rat::new(1, 2);
        let mut out = Series::one(&self.ctx);
        let mut acc = Series::one(&self.ctx);
        let bound = self.max_iteration_bound();
        for j in 1..=bound {
            acc = acc.mul(&e)?;
            out = out.add(&acc.scale(&Rat::binom(&half, j)))?;
            if acc.is_zero() {
                return Ok(out);
            }
        }
        Err(Error::ExpansionDiverged("sqrt_unit".into()))
    }

    // ------------------------------------------------------------------
    // Extraction
    // ------------------------------------------------------------------

    fn validity_check(&self, m: &Mono) -> Result<()> {
        let k = m.h_exp();
        if k >= self.prec.h_len {
            return Err(Error::ValidityExceeded(format!(
                "h-order {k} beyond retained {}",
                self.prec.h_len
            )));
        }
        for v in 0..self.nvars() {
            let e = m.0[v] as i64;
            if e > self.prec.hi[v][k] {
                return Err(Error::ValidityExceeded(format!(
                    "{} degree {e} above trusted degree {} at h-order {k}",
                    self.ctx.vars[v].name, self.prec.hi[v][k]
                )));
            }
            if e < self.ctx.vars[v].min_deg {
                return Err(Error::ValidityExceeded(format!(
                    "{} degree {e} below window floor",
                    self.ctx.vars[v].name
                )));
            }
        }
        Ok(())
    }

    /// Exact coefficient of a single monomial (validity-checked).
    pub fn coeff(&self, exps: &[(VarId, i64)], h_exp: usize) -> Result<Rat> {
        let mut m = Mono::unit(self.nvars());
        for &(v, e) in exps {
            m.0[v] = e as i32;
        }
        m.0[self.nvars()] = h_exp as i32;
        self.validity_check(&m)?;
        Ok(self.terms.get(&m).cloned().unwrap_or_else(Rat::zero))
    }

    /// Extract the coefficient of `v^deg` as a series in the remaining
    /// variables (the `v` slot of the result is zero). The result's retained
    /// h-order is the longest prefix on which the requested degree is trusted.
    pub fn var_coeff(&self, v: VarId, deg: i64) -> Result<Series> {
        let mut h_len = 0;
        while h_len < self.prec.h_len && deg <= self.prec.hi[v][h_len] {
            h_len += 1;
        }
        if h_len == 0 {
            return Err(Error::ValidityExceeded(format!(
                "coefficient of {}^{deg} is not trusted at any retained h-order (hi = {})",
                self.ctx.vars[v].name, self.prec.hi[v][0]
            )));
        }
        let nv = self.nvars();
        let mut prec = Prec::vacuous(&self.ctx, h_len);
        for w in 0..nv {
            for k in 0..h_len {
                if w != v {
                    prec.lo[w][k] = self.prec.lo[w][k];
                    prec.up[w][k] = self.prec.up[w][k];
                    prec.hi[w][k] = self.prec.hi[w][k];
                } else {
                    // all remaining content sits at v-degree 0
                    prec.lo[w][k] = 0;
                    prec.up[w][k] = 0;
                }
            }
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.0[v] as i64 == deg && m.h_exp() < h_len {
                let mut ex = m.0.clone();
                ex[v] = 0;
                terms.insert(Mono(ex), c.clone());
            }
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    /// Formal residue in `v`: the coefficient of `v^{-1}`.
    pub fn residue(&self, v: VarId) -> Result<Series> {
        self.var_coeff(v, -1)
    }

    /// Set a variable to zero (the degree-0 slice).
    pub fn eval_var_zero(&self, v: VarId) -> Result<Series> {
        self.var_coeff(v, 0)
    }

    /// Lowest retained degree of `v` with nonzero stored content at h-order
    /// `k`, if any.
    pub fn min_deg_at(&self, v: VarId, k: usize) -> Option<i64> {
        self.terms
            .iter()
            .filter(|(m, _)| m.h_exp() == k)
            .map(|(m, _)| m.0[v] as i64)
            .min()
    }

    // ------------------------------------------------------------------
    // Checks
    // ------------------------------------------------------------------

    /// Assert the given box (per-variable degree windows, h-orders `< h_need`)
    /// lies inside this series' trusted region.
    pub fn assert_valid_on(&self, window: &[(VarId, i64, i64)], h_need: usize) -> Result<()> {
        if self.prec.h_len < h_need {
            return Err(Error::ValidityExceeded(format!(
                "retained h-order {} below required {h_need}",
                self.prec.h_len
            )));
        }
        for &(v, _, hi) in window {
            for k in 0..h_need {
                if self.prec.hi[v][k] < hi {
                    return Err(Error::ValidityExceeded(format!(
                        "{} trusted only through degree {} (< {hi}) at h-order {k}",
                        self.ctx.vars[v].name, self.prec.hi[v][k]
                    )));
                }
            }
        }
        Ok(())
    }

    /// First nonzero coefficient inside the window (monomial rendered as a
    /// string plus the value), or None when exactly zero there. The window
    /// must be inside the trusted region.
    pub fn first_defect(
        &self,
        window: &[(VarId, i64, i64)],
        h_need: usize,
    ) -> Result<Option<(String, Rat)>> {
        self.assert_valid_on(window, h_need)?;
        for (m, c) in &self.terms {
            if m.h_exp() >= h_need {
                continue;
            }
            let inside = window.iter().all(|&(v, lo, hi)| {
                let e = m.0[v] as i64;
                e >= lo && e <= hi
            });
            if inside {
                return Ok(Some((m.to_string_in(&self.ctx), c.clone())));
            }
        }
        Ok(None)
    }

    // ------------------------------------------------------------------
    // Substitutions
    // ------------------------------------------------------------------

    /// x -> e^{sum c_i * v_i + hmult * h}. The substituted variable's content
    /// must be fully trusted (an honest polynomial / power series in `x` at
    /// this truncation); target variables must differ from `x`.
    pub fn subst_exp(&self, x: VarId, lin: &[(VarId, Rat)], hmult: &Rat) -> Result<Series> {
        for k in 0..self.prec.h_len {
            if self.prec.up[x][k] > self.prec.hi[x][k] {
                return Err(Error::ValidityExceeded(format!(
                    "exp substitution source {} has untrusted content at h-order {k}",
                    self.ctx.vars[x].name
                )));
            }
        }
        let mut arg = Series::h(&self.ctx).scale(hmult);
        for (v, c) in lin {
            assert!(*v != x, "substitution target used in its own image");
            arg = arg.add(&Series::var(&self.ctx, *v).scale(c))?;
        }
        let e_pos = arg.exp()?;
        let e_neg = arg.neg().exp()?;
        let mut pow_cache: BTreeMap<i64, Series> = BTreeMap::new();
        pow_cache.insert(0, Series::one(&self.ctx));

        let mut out = Series::zero(&self.ctx);
        for (m, c) in &self.terms {
            let a = m.0[x] as i64;
            if !pow_cache.contains_key(&a) {
                let base = if a > 0 { &e_pos } else { &e_neg };
                let p = base.pow(a.unsigned_abs() as usize)?;
                pow_cache.insert(a, p);
            }
            let mut ex = m.0.clone();
            ex[x] = 0;
            let rest = self.term_piece(ex, c.clone());
            out = out.add(&rest.mul(&pow_cache[&a])?)?;
        }
        // Unaffected variables keep (enveloped) source claims.
        for v in 0..self.nvars() {
            if v == x || lin.iter().any(|&(w, _)| w == v) {
                continue;
            }
            for k in 0..out.prec.h_len.min(self.prec.h_len) {
                out.prec.lo[v][k] = out.prec.lo[v][k].min(self.prec.lo_env(v, k));
                out.prec.up[v][k] = out.prec.up[v][k].max(self.prec.up_env(v, k));
                out.prec.hi[v][k] = out.prec.hi[v][k].min(self.prec.hi_env(v, k));
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Simultaneous substitution `src_i -> scale_i * e^{expvar_i + hmult_i*h}`
    /// (each `expvar` optional). Degree-preserving in the scale variables, so
    /// truncated Laurent content substitutes soundly.
    pub fn subst_scale_exp(&self, subs: &[ScaleExpSub]) -> Result<Series> {
        let nv = self.nvars();
        for s in subs {
            assert!(
                subs.iter().filter(|t| t.src == s.src).count() == 1,
                "duplicate substitution source"
            );
        }

        // exp factors and power caches per substitution
        let mut caches: Vec<(Series, Series, BTreeMap<i64, Series>)> = Vec::new();
        for s in subs {
            let mut arg = Series::h(&self.ctx).scale(&s.hmult);
            if let Some(w) = s.expvar {
                arg = arg.add(&Series::var(&self.ctx, w))?;
            }
            let e_pos = arg.exp()?;
            let e_neg = arg.neg().exp()?;
            let mut cache = BTreeMap::new();
            cache.insert(0i64, Series::one(&self.ctx));
            caches.push((e_pos, e_neg, cache));
        }

        let mut out = Series::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut ex = m.0.clone();
            let mut factor = Series::one(&self.ctx);
            for (si, s) in subs.iter().enumerate() {
                let a = ex[s.src] as i64;
                if a == 0 {
                    continue;
                }
                ex[s.src] = 0;
                ex[s.scale] += a as i32;
                let (e_pos, e_neg, cache) = &mut caches[si];
                if !cache.contains_key(&a) {
                    let base = if a > 0 { &*e_pos } else { &*e_neg };
                    let p = base.pow(a.unsigned_abs() as usize)?;
                    cache.insert(a, p);
                }
                factor = factor.mul(&cache[&a])?;
            }
            // the combined scale exponent must stay inside the window
            for v in 0..nv {
                let e = ex[v] as i64;
                if e < self.ctx.vars[v].min_deg {
                    return Err(Error::WindowExceeded {
                        var: self.ctx.vars[v].name.clone(),
                        h_order: m.h_exp(),
                        degree: e,
                        floor: self.ctx.vars[v].min_deg,
                    });
                }
            }
            let e_above = (0..nv).any(|v| (ex[v] as i64) > self.ctx.vars[v].max_deg);
            if e_above {
                continue; // recorded below through the combined up-claims
            }
            let t = self.term_piece(ex, c.clone());
            out = out.add(&t.mul(&factor)?)?;
        }

        // Precision: participants in each scale variable are the sources
        // mapping into it plus the scale variable itself.
        let mut scale_vars: Vec<VarId> = subs.iter().map(|s| s.scale).collect();
        scale_vars.sort_unstable();
        scale_vars.dedup();
        let src_of = |v: VarId| subs.iter().any(|s| s.src == v);
        for &z in &scale_vars {
            let mut participants: Vec<VarId> =
                subs.iter().filter(|s| s.scale == z).map(|s| s.src).collect();
            if !src_of(z) {
                participants.push(z);
            }
            for k in 0..out.prec.h_len.min(self.prec.h_len) {
                let mut lo_sum = 0i64;
                let mut up_sum = 0i64;
                let mut any_empty = false;
                for &p in &participants {
                    let l = self.prec.lo_env(p, k);
                    let u = self.prec.up_env(p, k);
                    if l > u {
                        any_empty = true;
                        break;
                    }
                    lo_sum += l;
                    up_sum = if up_sum >= BIG || u >= BIG { BIG } else { up_sum + u };
                }
                if any_empty {
                    continue;
                }
                let mut hi = BIG;
                for &p in &participants {
                    if self.prec.up_env(p, k) <= self.prec.hi_env(p, k) {
                        continue;
                    }
                    let rest: i64 = participants
                        .iter()
                        .filter(|&&q| q != p)
                        .map(|&q| self.prec.lo_env(q, k))
                        .sum();
                    hi = hi.min(self.prec.hi_env(p, k) + rest);
                }
                out.prec.lo[z][k] = out.prec.lo[z][k].min(lo_sum);
                out.prec.up[z][k] = out.prec.up[z][k].max(up_sum);
                out.prec.hi[z][k] = out.prec.hi[z][k].min(hi);
            }
        }
        // Unaffected variables: envelope of source claims.
        for v in 0..nv {
            if scale_vars.contains(&v) || src_of(v) || subs.iter().any(|s| s.expvar == Some(v)) {
                continue;
            }
            for k in 0..out.prec.h_len.min(self.prec.h_len) {
                out.prec.lo[v][k] = out.prec.lo[v][k].min(self.prec.lo_env(v, k));
                out.prec.up[v][k] = out.prec.up[v][k].max(self.prec.up_env(v, k));
                out.prec.hi[v][k] = out.prec.hi[v][k].min(self.prec.hi_env(v, k));
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Taylor shift `u -> u + alpha*h` for a Taylor variable.
    pub fn shift_h(&self, u: VarId, alpha: &Rat) -> Result<Series> {
        assert!(self.ctx.vars[u].min_deg == 0, "shift target must be Taylor");
        let nv = self.nvars();
        let h_len = self.prec.h_len;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let a = m.0[u] as i64;
            let mut pow = Rat::one();
            for j in 0..=a {
                // C(a, j) * alpha^j * h^j * u^{a-j}
                let coef = &Rat::binom(&Rat::from_int(a), j as usize) * &pow;
                let mut ex = m.0.clone();
                ex[u] = (a - j) as i32;
                ex[nv] += j as i32;
                if (ex[nv] as usize) < h_len {
                    Series::accumulate(&self.ctx, &mut terms, Mono(ex), c * &coef)?;
                }
                pow = &pow * alpha;
            }
        }
        let mut prec = Prec::vacuous(&self.ctx, h_len);
        for v in 0..nv {
            for k in 0..h_len {
                if v == u {
                    let mut lo = BIG;
                    let mut up = -BIG;
                    let mut hi = BIG;
                    for j in 0..=k {
                        let kk = k - j;
                        if self.prec.lo[u][kk] > self.prec.up[u][kk] {
                            continue;
                        }
                        lo = lo.min(self.prec.lo[u][kk] - j as i64);
                        up = up.max(self.prec.up[u][kk]);
                        hi = hi.min(self.prec.hi[u][kk] - j as i64);
                    }
                    prec.lo[u][k] = lo.max(0).min(BIG);
                    prec.up[u][k] = up;
                    prec.hi[u][k] = hi;
                } else {
                    prec.lo[v][k] = self.prec.lo_env(v, k);
                    prec.up[v][k] = self.prec.up_env(v, k);
                    prec.hi[v][k] = self.prec.hi_env(v, k);
                }
            }
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    /// `u -> beta*h` for a Taylor variable: each u^a becomes beta^a h^a.
    pub fn subst_var_to_h(&self, u: VarId, beta: &Rat) -> Result<Series> {
        assert!(self.ctx.vars[u].min_deg == 0, "target must be Taylor");
        let nv = self.nvars();
        let h_len = self.prec.h_len;
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let a = m.0[u] as i64;
            let mut ex = m.0.clone();
            ex[u] = 0;
            ex[nv] += a as i32;
            if (ex[nv] as usize) < h_len {
                Series::accumulate(&self.ctx, &mut terms, Mono(ex), c * &beta.pow(a as i32)?)?;
            }
        }
        // h-order k of the result mixes source orders k' <= k with u-degree
        // k - k'; soundness needs the source u-trust to reach that far.
        let mut h_ok = 0;
        while h_ok < h_len {
            let need = h_ok as i64;
            if (0..=h_ok).all(|kk| self.prec.hi[u][kk] >= need || self.prec.up[u][kk] < -need + need)
            {
                // condition refined below; conservative: require trust through `need`
            }
            if (0..=h_ok).any(|kk| self.prec.hi[u][kk] < need && self.prec.up[u][kk] > self.prec.hi[u][kk]) {
                break;
            }
            h_ok += 1;
        }
        if h_ok == 0 {
            return Err(Error::ValidityExceeded(
                "substituting u -> beta*h needs trusted u-content at order 0".into(),
            ));
        }
        let mut prec = Prec::vacuous(&self.ctx, h_ok);
        for v in 0..nv {
            for k in 0..h_ok {
                if v != u {
                    prec.lo[v][k] = self.prec.lo_env(v, k);
                    prec.up[v][k] = self.prec.up_env(v, k);
                    prec.hi[v][k] = self.prec.hi_env(v, k);
                } else {
                    prec.lo[v][k] = 0;
                    prec.up[v][k] = 0;
                }
            }
        }
        let mut out = Series {
            ctx: self.ctx.clone(),
            terms,
            prec,
        };
        out.normalize();
        Ok(out)
    }

    /// `z^m -> (ca*za + cb*zb)^m`, expanded with `za` outermost (nonnegative
    /// powers of `zb`). Negative `m` uses the binomial series; the expansion
    /// is the iota image determined by the order (za, zb).
    pub fn subst_binom_pair(
        &self,
        z: VarId,
        za: VarId,
        ca: &Rat,
        zb: VarId,
        cb: &Rat,
    ) -> Result<Series> {
        assert!(za != z && zb != z && za != zb);
        let ratio = &(cb / ca);
        let mut out = Series::zero(&self.ctx);
        let zb_cap = self.ctx.vars[zb].max_deg;
        let za_floor = self.ctx.vars[za].min_deg;
        let mut cache: BTreeMap<i64, Series> = BTreeMap::new();
        for (m, c) in &self.terms {
            let deg = m.0[z] as i64;
            if !cache.contains_key(&deg) {
                // (ca za)^deg * (1 + ratio zb/za)^deg; terms beyond the zb cap
                // are honest truncation, terms below the za floor are not.
                let mut expansion = Series::zero(&self.ctx);
                for j in 0..=zb_cap {
                    if deg >= 0 && j > deg {
                        break;
                    }
                    let za_deg = deg - j;
                    if za_deg < za_floor {
                        return Err(Error::WindowExceeded {
                            var: self.ctx.vars[za].name.clone(),
                            h_order: m.h_exp(),
                            degree: za_deg,
                            floor: za_floor,
                        });
                    }
                    let coef =
                        &Rat::binom(&Rat::from_int(deg), j as usize) * &ratio.pow(j as i32)?;
                    let coef = &coef * &ca.pow(deg as i32)?;
                    expansion = expansion.add(&Series::monomial(
                        &self.ctx,
                        &[(za, za_deg), (zb, j)],
                        0,
                        coef,
                    )?)?;
                }
                if deg < 0 {
                    expansion.mark_truncated_above(zb);
                }
                cache.insert(deg, expansion);
            }
            let mut ex = m.0.clone();
            ex[z] = 0;
            let t = self.term_piece(ex, c.clone());
            out = out.add(&t.mul(&cache[&deg])?)?;
        }
        // A target (za^d, zb^e) coefficient comes from the single source
        // degree d + e, so source trust through hi splits as
        // hi_za = hi_src - cap(zb) with zb trusted through its cap.
        for k in 0..out.prec.h_len.min(self.prec.h_len) {
            if self.prec.up_env(z, k) <= self.prec.hi_env(z, k) {
                continue; // source fully trusted: expansion claims stand
            }
            let hi_src = self.prec.hi_env(z, k);
            let lo_src = self.prec.lo_env(z, k);
            out.prec.hi[za][k] = out.prec.hi[za][k].min(hi_src - zb_cap);
            out.prec.lo[za][k] = out.prec.lo[za][k].min(lo_src - zb_cap);
            out.prec.up[za][k] = BIG;
        }
        out.normalize();
        Ok(out)
    }

    /// After a degree-splitting substitution from `src_var` of `source` into
    /// `v0` of `self` (with other receiving variables capped at `inner_caps`
    /// total): clamp this series' claims about `v0` accordingly.
    pub fn clamp_outer_from_source(
        &mut self,
        v0: VarId,
        source: &Series,
        src_var: VarId,
        inner_caps: i64,
    ) -> Result<()> {
        let h_len = self.prec.h_len.min(source.h_len());
        for k in 0..h_len {
            let lo_src = source.prec.lo_env(src_var, k);
            let up_src = source.prec.up_env(src_var, k);
            let hi_src = source.prec.hi_env(src_var, k);
            if lo_src > up_src {
                continue;
            }
            self.prec.lo[v0][k] = self.prec.lo[v0][k].min(lo_src - inner_caps);
            if up_src > hi_src {
                self.prec.up[v0][k] = BIG;
                self.prec.hi[v0][k] = self.prec.hi[v0][k].min(hi_src - inner_caps);
            }
        }
        self.normalize();
        Ok(())
    }

    /// Substitute `z1 -> z2 * e^{z0}` after checking that the content of the
    /// substituted variable is bounded below strictly inside its window at
    /// every retained h-order (the jointly-lower-bounded precondition).
    pub fn phi_substitute(&self, z1: VarId, z2: VarId, z0: VarId) -> Result<Series> {
        for k in 0..self.prec.h_len {
            if let Some(d) = self.min_deg_at(z1, k) {
                if d <= self.ctx.vars[z1].min_deg {
                    return Err(Error::NotLowerBounded(format!(
                        "{}^{} at h-order {k}",
                        self.ctx.vars[z1].name, d
                    )));
                }
            }
            if self.prec.lo(z1, k) <= self.ctx.vars[z1].min_deg
                && self.prec.lo(z1, k) <= self.prec.up(z1, k)
            {
                return Err(Error::NotLowerBounded(format!(
                    "{} lower bound {} at h-order {k} is not interior to the window",
                    self.ctx.vars[z1].name,
                    self.prec.lo(z1, k)
                )));
            }
        }
        self.subst_scale_exp(&[ScaleExpSub {
            src: z1,
            scale: z2,
            expvar: Some(z0),
            hmult: Rat::zero(),
        }])
    }
}

/// One component of a scale-exp substitution: `src -> scale * e^{expvar + hmult*h}`.
#[derive(Clone, Debug)]
pub struct ScaleExpSub {
    pub src: VarId,
    pub scale: VarId,
    pub expvar: Option<VarId>,
    pub hmult: Rat,
}

// ----------------------------------------------------------------------
// Convenience builders used across the crate
// ----------------------------------------------------------------------

/// e^{c h} as an exact truncated series.
pub fn exp_ch(ctx: &Ctx, c: &Rat) -> Series {
    Series::h(ctx).scale(c).exp().expect("exp of c*h")
}

/// log(1+z) as an explicit truncated series in `z` (positive powers only,
/// truncated at the window ceiling, marked as such).
pub fn log1p_var(ctx: &Ctx, z: VarId) -> Result<Series> {
    let cap = ctx.vars[z].max_deg;
    let mut out = Series::zero(ctx);
    for k in 1..=cap {
        let sign = if k % 2 == 0 { -1 } else { 1 };
        out = out.add(&Series::monomial(
            ctx,
            &[(z, k)],
            0,
            &Rat::from_int(sign) * &Rat::from_int(k).recip()?,
        )?)?;
    }
    out.mark_truncated_above(z);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TruncationProfile;

    fn hctx(k: usize) -> Ctx {
        TruncationProfile::builder(k).taylor("x", 8).build()
    }

    #[test]
    fn poly_identity_one_minus_h_squared() {
        let ctx = hctx(4);
        let one = Series::one(&ctx);
        let h = Series::h(&ctx);
        let a = one.add(&h).unwrap();
        let b = one.sub(&h).unwrap();
        let p = a.mul(&b).unwrap();
        let expect = one.sub(&h.mul(&h).unwrap()).unwrap();
        assert_eq!(p, expect);
    }

    #[test]
    fn geometric_inverse_of_one_minus_x() {
        let ctx = hctx(2);
        let x = ctx.var("x").unwrap();
        let d = Series::one(&ctx).sub(&Series::var(&ctx, x)).unwrap();
        let inv = d.invert_iota(&[x]).unwrap();
        for k in 0..=8 {
            assert_eq!(inv.coeff(&[(x, k)], 0).unwrap(), Rat::one());
        }
        let back = d.mul(&inv).unwrap();
        // trusted region of the product ends one degree below the cap
        let defect = back
            .sub(&Series::one(&ctx))
            .unwrap()
            .first_defect(&[(x, 0, 7)], 2)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn exp_inverse_mod_h_k() {
        let ctx = hctx(6);
        let e = Series::h(&ctx).exp().unwrap();
        let einv = Series::h(&ctx).neg().exp().unwrap();
        let p = e.mul(&einv).unwrap();
        assert!(p.sub(&Series::one(&ctx)).unwrap().is_zero());
    }

    #[test]
    fn invert_one_plus_h() {
        let ctx = hctx(5);
        let a = Series::one(&ctx).add(&Series::h(&ctx)).unwrap();
        let inv = a.invert_iota(&[]).unwrap();
        for k in 0..5usize {
            let expect = if k % 2 == 0 { Rat::one() } else { Rat::from_int(-1) };
            assert_eq!(inv.coeff(&[], k).unwrap(), expect);
        }
    }

    #[test]
    fn invert_log_series_laurent() {
        // oracle: multiply the result back by log(1+z), expect exactly 1
        let ctx = TruncationProfile::builder(3).laurent("z", -4, 8).build();
        let z = ctx.var("z").unwrap();
        let lg = log1p_var(&ctx, z).unwrap();
        let inv = lg.invert_iota(&[z]).unwrap();
        assert_eq!(inv.coeff(&[(z, -1)], 0).unwrap(), Rat::one());
        assert_eq!(inv.coeff(&[(z, 0)], 0).unwrap(), Rat::new(1, 2));
        let back = lg.mul(&inv).unwrap();
        let defect = back
            .sub(&Series::one(&ctx))
            .unwrap()
            .first_defect(&[(z, -3, 3)], 3)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn exp_substitute_basic() {
        // x -> e^u applied to x and to 1-x
        let ctx = TruncationProfile::builder(3)
            .taylor("x", 4)
            .taylor("u", 5)
            .build();
        let (x, u) = (ctx.var("x").unwrap(), ctx.var("u").unwrap());
        let img = Series::var(&ctx, x)
            .subst_exp(x, &[(u, Rat::one())], &Rat::zero())
            .unwrap();
        assert_eq!(img.coeff(&[], 0).unwrap(), Rat::one());
        assert_eq!(img.coeff(&[(u, 1)], 0).unwrap(), Rat::one());
        assert_eq!(img.coeff(&[(u, 2)], 0).unwrap(), Rat::new(1, 2));

        let one_minus_x = Series::one(&ctx).sub(&Series::var(&ctx, x)).unwrap();
        let img2 = one_minus_x
            .subst_exp(x, &[(u, Rat::one())], &Rat::zero())
            .unwrap();
        assert_eq!(img2.coeff(&[], 0).unwrap(), Rat::zero());
        assert_eq!(img2.coeff(&[(u, 1)], 0).unwrap(), Rat::from_int(-1));
        assert_eq!(img2.coeff(&[(u, 2)], 0).unwrap(), Rat::new(-1, 2));
    }

    #[test]
    fn iota_of_inverse_one_minus_exp() {
        // iota_u 1/(1-e^u) = -u^{-1} + 1/2 - u/12 + ...
        // oracle: series-invert (1-e^u)/u in Q[[u]], then divide by u twice.
        let ctx = TruncationProfile::builder(2).laurent("u", -3, 8).build();
        let u = ctx.var("u").unwrap();
        let one_minus_eu = Series::one(&ctx)
            .sub(&Series::var(&ctx, u).exp().unwrap())
            .unwrap();
        let inv = one_minus_eu.invert_iota(&[u]).unwrap();

        let taylor_unit = one_minus_eu
            .mul(&Series::monomial(&ctx, &[(u, -1)], 0, Rat::one()).unwrap())
            .unwrap();
        let oracle = taylor_unit
            .invert_iota(&[u])
            .unwrap()
            .mul(&Series::monomial(&ctx, &[(u, -1)], 0, Rat::one()).unwrap())
            .unwrap();
        let d = inv.sub(&oracle).unwrap();
        assert_eq!(d.first_defect(&[(u, -1, 4)], 1).unwrap(), None);
        assert_eq!(inv.coeff(&[(u, -1)], 0).unwrap(), Rat::from_int(-1));
        assert_eq!(inv.coeff(&[(u, 0)], 0).unwrap(), Rat::new(1, 2));
        assert_eq!(inv.coeff(&[(u, 1)], 0).unwrap(), Rat::new(-1, 12));
    }

    #[test]
    fn iota_two_expansions_of_u_minus_v() {
        let ctx = TruncationProfile::builder(1)
            .laurent("u", -8, 6)
            .laurent("v", -8, 6)
            .build();
        let (u, v) = (ctx.var("u").unwrap(), ctx.var("v").unwrap());
        let d = Series::var(&ctx, u).sub(&Series::var(&ctx, v)).unwrap();
        let iu = d.invert_iota(&[u, v]).unwrap();
        let iv = d.invert_iota(&[v, u]).unwrap();
        // iota_{u,v}: sum v^k u^{-k-1}
        assert_eq!(iu.coeff(&[(u, -1)], 0).unwrap(), Rat::one());
        assert_eq!(iu.coeff(&[(u, -3), (v, 2)], 0).unwrap(), Rat::one());
        // iota_{v,u}: -sum u^k v^{-k-1}
        assert_eq!(iv.coeff(&[(v, -1)], 0).unwrap(), Rat::from_int(-1));
        assert_eq!(iv.coeff(&[(v, -3), (u, 2)], 0).unwrap(), Rat::from_int(-1));
        // both are one-sided inverses of (u - v)
        for i in [&iu, &iv] {
            let back = d.mul(i).unwrap();
            let defect = back
                .sub(&Series::one(&ctx))
                .unwrap()
                .first_defect(&[(u, -2, 2), (v, -2, 2)], 1)
                .unwrap();
            assert_eq!(defect, None);
        }
    }

    #[test]
    fn sqrt_unit_roundtrip() {
        let ctx = hctx(6);
        let a = Series::one(&ctx).add(&Series::h(&ctx)).unwrap();
        let sq = a.mul(&a).unwrap();
        let r = sq.sqrt_unit().unwrap();
        assert!(r.sub(&a).unwrap().is_zero());
        assert!(Series::one(&ctx)
            .sqrt_unit()
            .unwrap()
            .sub(&Series::one(&ctx))
            .unwrap()
            .is_zero());
        assert!(Series::h(&ctx).sqrt_unit().is_err());
    }

    #[test]
    fn coefficient_and_residue() {
        let ctx = TruncationProfile::builder(3).laurent("z", -4, 4).build();
        let z = ctx.var("z").unwrap();
        let s = Series::monomial(&ctx, &[(z, -1)], 0, Rat::from_int(7))
            .unwrap()
            .add(&Series::monomial(&ctx, &[(z, 2)], 1, Rat::new(1, 3)).unwrap())
            .unwrap();
        let r = s.residue(z).unwrap();
        assert_eq!(r.coeff(&[], 0).unwrap(), Rat::from_int(7));
        // coefficient of h^0 in e^{a h} is 1
        let e = exp_ch(&ctx, &Rat::new(5, 2));
        assert_eq!(e.coeff(&[], 0).unwrap(), Rat::one());
    }

    #[test]
    fn window_floor_is_an_error() {
        let ctx = TruncationProfile::builder(1).laurent("z", -2, 2).build();
        let z = ctx.var("z").unwrap();
        let zm2 = Series::monomial(&ctx, &[(z, -2)], 0, Rat::one()).unwrap();
        let err = zm2.mul(&zm2);
        assert!(matches!(err, Err(Error::WindowExceeded { .. })));
    }

    #[test]
    fn validity_erosion_is_tracked() {
        // (truncated geometric in z) * z^{-1}: the top retained degree is no
        // longer trusted and reading it must fail.
        let ctx = TruncationProfile::builder(1).laurent("z", -2, 3).build();
        let z = ctx.var("z").unwrap();
        let geo = Series::one(&ctx)
            .sub(&Series::var(&ctx, z))
            .unwrap()
            .invert_iota(&[z])
            .unwrap();
        let zinv = Series::monomial(&ctx, &[(z, -1)], 0, Rat::one()).unwrap();
        let shifted = geo.mul(&zinv).unwrap();
        assert_eq!(shifted.coeff(&[(z, 1)], 0).unwrap(), Rat::one());
        assert!(shifted.coeff(&[(z, 3)], 0).is_err());
    }

    #[test]
    fn exact_polynomials_do_not_erode() {
        // products of fully-known objects stay fully known, including with
        // negative Laurent degrees
        let ctx = TruncationProfile::builder(2).laurent("z", -6, 6).build();
        let z = ctx.var("z").unwrap();
        let a = Series::monomial(&ctx, &[(z, -2)], 0, Rat::one())
            .unwrap()
            .add(&Series::monomial(&ctx, &[(z, 1)], 1, Rat::new(2, 3)).unwrap())
            .unwrap();
        let b = Series::monomial(&ctx, &[(z, -1)], 0, Rat::from_int(5)).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff(&[(z, -3)], 0).unwrap(), Rat::from_int(5));
        assert_eq!(p.coeff(&[(z, 6)], 0).unwrap(), Rat::zero());
        assert_eq!(p.coeff(&[(z, 0)], 1).unwrap(), Rat::new(10, 3));
    }

    #[test]
    fn phi_substitute_basic() {
        // (z1 - z2) |-> z2 (e^{z0} - 1)
        let ctx = TruncationProfile::builder(2)
            .laurent("z1", -4, 4)
            .laurent("z2", -8, 8)
            .taylor("z0", 4)
            .build();
        let z1 = ctx.var("z1").unwrap();
        let z2 = ctx.var("z2").unwrap();
        let z0 = ctx.var("z0").unwrap();
        let d = Series::var(&ctx, z1).sub(&Series::var(&ctx, z2)).unwrap();
        let img = d.phi_substitute(z1, z2, z0).unwrap();
        let expect = Series::var(&ctx, z2)
            .mul(
                &Series::var(&ctx, z0)
                    .exp()
                    .unwrap()
                    .sub(&Series::one(&ctx))
                    .unwrap(),
            )
            .unwrap();
        let defect = img
            .sub(&expect)
            .unwrap()
            .first_defect(&[(z1, 0, 0), (z2, -2, 2), (z0, 0, 3)], 2)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn phi_substitute_is_multiplicative() {
        let ctx = TruncationProfile::builder(2)
            .laurent("z1", -3, 6)
            .laurent("z2", -8, 12)
            .taylor("z0", 4)
            .build();
        let z1 = ctx.var("z1").unwrap();
        let z2 = ctx.var("z2").unwrap();
        let z0 = ctx.var("z0").unwrap();
        let a = Series::var(&ctx, z1)
            .add(&Series::monomial(&ctx, &[(z2, 2)], 1, Rat::new(3, 2)).unwrap())
            .unwrap();
        let b = Series::monomial(&ctx, &[(z1, -1)], 0, Rat::one())
            .unwrap()
            .add(&Series::h(&ctx))
            .unwrap();
        let lhs = a.mul(&b).unwrap().phi_substitute(z1, z2, z0).unwrap();
        let rhs = a
            .phi_substitute(z1, z2, z0)
            .unwrap()
            .mul(&b.phi_substitute(z1, z2, z0).unwrap())
            .unwrap();
        let defect = lhs
            .sub(&rhs)
            .unwrap()
            .first_defect(&[(z2, -3, 3), (z0, 0, 3)], 2)
            .unwrap();
        assert_eq!(defect, None);
    }

    #[test]
    fn shift_h_binomial() {
        // (u)^2 under u -> u + 2h: u^2 + 4hu + 4h^2
        let ctx = TruncationProfile::builder(3).taylor("u", 4).build();
        let u = ctx.var("u").unwrap();
        let s = Series::var(&ctx, u).pow(2).unwrap();
        let t = s.shift_h(u, &Rat::from_int(2)).unwrap();
        assert_eq!(t.coeff(&[(u, 2)], 0).unwrap(), Rat::one());
        assert_eq!(t.coeff(&[(u, 1)], 1).unwrap(), Rat::from_int(4));
        assert_eq!(t.coeff(&[], 2).unwrap(), Rat::from_int(4));
    }

    #[test]
    fn binom_pair_substitution() {
        // z^{-1} -> 1/(z1 - z2) expanded with z1 outermost
        let ctx = TruncationProfile::builder(1)
            .laurent("z", -3, 3)
            .laurent("z1", -8, 6)
            .laurent("z2", -6, 4)
            .build();
        let z = ctx.var("z").unwrap();
        let z1 = ctx.var("z1").unwrap();
        let z2 = ctx.var("z2").unwrap();
        let s = Series::monomial(&ctx, &[(z, -1)], 0, Rat::one()).unwrap();
        let t = s
            .subst_binom_pair(z, z1, &Rat::one(), z2, &Rat::from_int(-1))
            .unwrap();
        assert_eq!(t.coeff(&[(z1, -1)], 0).unwrap(), Rat::one());
        assert_eq!(t.coeff(&[(z1, -2), (z2, 1)], 0).unwrap(), Rat::one());
        assert_eq!(t.coeff(&[(z1, -3), (z2, 2)], 0).unwrap(), Rat::one());
    }

    #[test]
    fn div_h_pow_tracks_order() {
        let ctx = hctx(4);
        let s = Series::h(&ctx)
            .mul(&Series::one(&ctx).add(&Series::h(&ctx)).unwrap())
            .unwrap();
        let q = s.div_h_pow(1).unwrap();
        assert_eq!(q.h_len(), 3);
        assert_eq!(q.coeff(&[], 0).unwrap(), Rat::one());
        assert!(Series::one(&ctx).div_h_pow(1).is_err());
    }
}
