//! The truncated RTT algebra: generators indexed by (depth, row, column),
//! normal-form words sorted by the fixed generator order, and the rewriting
//! machinery that pushes out-of-order adjacent pairs through the exchange
//! relation T1(u) T2(v) = Rbar_21(e^{v-u}) T2(v) T1(u) Rbar(e^{u-v}).
//!
//! At h-order zero the generators commute, so rewriting terminates modulo
//! h^K; corrections carry positive h-powers or strictly smaller degree.
//! Exchange tables are built per depth pair behind OnceLock cells: computed
//! at most once, read-only afterwards.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::profile::{Ctx, TruncationProfile, VarId};
use crate::rat::Rat;
use crate::rmatrix::{lift_h_series, project_to_hctx, RMatrixContext};
use crate::series::{exp_ch, Series};
use crate::tensor::Coeff;

/// Generator t_{ij}^{(-r)}: depth r >= 1, 0-based row i and column j.
/// The normal-form order is ascending (r, i, j).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Gen {
    pub r: u8,
    pub i: u8,
    pub j: u8,
}

pub type Word = Vec<Gen>;

fn word_sorted(w: &[Gen]) -> bool {
    w.windows(2).all(|p| p[0] <= p[1])
}

/// Rewrite scheduling for the confluence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    FirstInversion,
    LastInversion,
}

type PairKey = (u8, u8, u8, u8); // (a, b, c, d) of the left/right generators
type PairTable = HashMap<PairKey, Vec<(Word, Series)>>;

pub struct RewriteContext {
    pub n: usize,
    pub ctx: Ctx,
    pub level: Rat,
    pub r_max: usize,
    pub d_max: usize,
    /// depth cap used when materializing generator series
    pub u_max: usize,
    /// trusted-window request for the outermost variable of R-factor
    /// arguments (suite-configured)
    pub arg_window: crate::rmatrix::ArgWindow,
    pub rm: RMatrixContext,
    /// auxiliary Taylor variables reserved for coefficient extraction;
    /// pool 0 for top-level decompositions, pool 1 for the dual action
    pub aux_y: Vec<Vec<VarId>>,
    /// cached entry products of the two bare exchange matrices
    exchange_cache: OnceLock<ExchangeCache>,
    tables: Vec<OnceLock<PairTable>>,
}

struct ExchangeCache {
    w: VarId,
    /// products A[(a,c),(a',c')] * B[(b',d'),(b,d)] keyed by the four pairs;
    /// both exchange matrices are functions of the single variable w = u - v,
    /// so products live in a one-variable scratch ring
    products: HashMap<((u8, u8), (u8, u8), (u8, u8), (u8, u8)), Series>,
}

impl RewriteContext {
    /// `ctx` must contain the auxiliary extraction variables (Taylor) listed
    /// in `aux_y`; its h-order is the order to which normal forms are exact.
    pub fn new(
        n: usize,
        ctx: Ctx,
        level: Rat,
        r_max: usize,
        d_max: usize,
        u_max: usize,
        aux_y: Vec<Vec<VarId>>,
        rm: RMatrixContext,
        arg_window: Option<crate::rmatrix::ArgWindow>,
    ) -> Result<Arc<RewriteContext>> {
        if rm.h_order < ctx.h_order {
            return Err(Error::ProfileMismatch(
                "normalizer tables retain fewer h-orders than the algebra profile".into(),
            ));
        }
        let tables = (0..r_max * r_max).map(|_| OnceLock::new()).collect();
        let k = ctx.h_order as i64;
        let arg_window = arg_window.unwrap_or(crate::rmatrix::ArgWindow {
            lo: -(k + 4),
            hi: 2 * k + 8,
        });
        Ok(Arc::new(RewriteContext {
            n,
            ctx,
            level,
            r_max,
            d_max,
            u_max,
            arg_window,
            rm,
            aux_y,
            exchange_cache: OnceLock::new(),
            tables,
        }))
    }

    fn exchange_cache(&self) -> Result<&ExchangeCache> {
        if let Some(c) = self.exchange_cache.get() {
            return Ok(c);
        }
        let built = self.build_exchange_cache()?;
        let _ = self.exchange_cache.set(built);
        Ok(self.exchange_cache.get().unwrap())
    }

    fn build_exchange_cache(&self) -> Result<ExchangeCache> {
        let k_work = self.ctx.h_order + 2;
        let rmax = self.r_max as i64;
        let sctx = TruncationProfile::builder(k_work)
            .laurent("w", -(k_work as i64 + 6), 2 * rmax + k_work as i64 + 6)
            .build();
        let w = sctx.var("w")?;
        // tables need the normalizer context at the working order
        let rm_work = RMatrixContext::new(self.n, k_work)?;

        // A = Rbar_21(e^{-w}), B = Rbar_12(e^{w}) with w standing for u - v
        let mk_rbar = |sign: i64| -> Result<crate::tensor::TensorOperator<Series>> {
            let e_l = Series::var(&sctx, w).scale(&Rat::from_int(sign)).exp()?;
            let den = Series::one(&sctx)
                .sub(&e_l.mul(&exp_ch(&sctx, &Rat::from_int(-1)))?)?;
            let inv = den.invert_iota(&[w])?;
            rm_work.rplus_at(&sctx, &e_l)?.map(|s| s.mul(&inv))
        };
        let a_mat = {
            let p = crate::tensor::flip(&sctx, self.n);
            let r = mk_rbar(-1)?;
            p.mul(&r)?.mul(&p)?
        };
        let b_mat = mk_rbar(1)?;

        let n = self.n;
        let dims = [n, n];
        let idx = |p: (u8, u8)| crate::tensor::compose_index(&dims, &[p.0 as usize, p.1 as usize]);
        let mut products = HashMap::new();
        for (&(ar, ac_), av) in a_mat.entries() {
            for (&(br, bc), bv) in b_mat.entries() {
                let key_a_row = crate::tensor::decompose_index(&dims, ar);
                let key_a_col = crate::tensor::decompose_index(&dims, ac_);
                let key_b_row = crate::tensor::decompose_index(&dims, br);
                let key_b_col = crate::tensor::decompose_index(&dims, bc);
                let key = (
                    (key_a_row[0] as u8, key_a_row[1] as u8),
                    (key_a_col[0] as u8, key_a_col[1] as u8),
                    (key_b_row[0] as u8, key_b_row[1] as u8),
                    (key_b_col[0] as u8, key_b_col[1] as u8),
                );
                products.insert(key, av.mul(bv)?);
            }
        }
        let _ = idx;
        let _ = sctx;
        Ok(ExchangeCache {
            w,
            products,
        })
    }

    /// The exchange table for an out-of-order pair of depths (r, s):
    /// t_{ab}^{(-r)} t_{cd}^{(-s)} rewrites to the returned combination.
    fn pair_table(&self, r: usize, s: usize) -> Result<&PairTable> {
        let slot = (r - 1) * self.r_max + (s - 1);
        if let Some(t) = self.tables[slot].get() {
            return Ok(t);
        }
        let built = self.build_pair_table(r, s)?;
        let _ = self.tables[slot].set(built);
        Ok(self.tables[slot].get().unwrap())
    }

    fn build_pair_table(&self, r: usize, s_depth: usize) -> Result<PairTable> {
        let s = s_depth;
        let cache = self.exchange_cache()?;
        let w = cache.w;
        let n = self.n as u8;
        let hctx_work = TruncationProfile::builder(self.ctx.h_order + 2).build();

        // The products are functions of w = u - v, so the coefficient of
        // u^alpha v^beta is binom(alpha+beta, beta) (-1)^beta times the
        // w^{alpha+beta} coefficient.
        let k_work_i = self.ctx.h_order as i64 + 2;
        // corrections can reach depth r + (h-order) + (s-1) with surviving
        // coefficients; anything deeper is h-truncated to zero
        let r_ext = r as i64 + k_work_i + s as i64 + 2;
        let lo_alpha = r as i64 - r_ext;
        let hi_alpha = r as i64 - 1;
        let mut coeff_cache: HashMap<
            ((u8, u8), (u8, u8), (u8, u8), (u8, u8)),
            HashMap<(i64, i64), Series>,
        > = HashMap::new();
        for (key, prod) in &cache.products {
            let mut per_key = HashMap::new();
            for alpha in lo_alpha..=hi_alpha {
                for beta in 0..=(s_depth as i64 - 1) {
                    let m = alpha + beta;
                    let wc = prod.var_coeff(w, m)?;
                    if wc.is_zero() {
                        continue;
                    }
                    let sign = if beta % 2 == 0 { Rat::one() } else { Rat::from_int(-1) };
                    let factor = &Rat::binom(&Rat::from_int(m), beta as usize) * &sign;
                    let c = wc.scale(&factor);
                    if !c.is_zero() {
                        per_key.insert((alpha, beta), project_to_hctx(&c, &hctx_work)?);
                    }
                }
            }
            coeff_cache.insert(*key, per_key);
        }
        let extract = |key: &((u8, u8), (u8, u8), (u8, u8), (u8, u8)),
                       alpha: i64,
                       beta: i64|
         -> Result<Option<Series>> {
            if beta < 0 {
                return Ok(None);
            }
            Ok(coeff_cache
                .get(key)
                .and_then(|m| m.get(&(alpha, beta)))
                .cloned())
        };

        let mut table = PairTable::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut bracket: BTreeMap<Word, Series> = BTreeMap::new();
                        let mut add = |w: Word, s: Series| {
                            match bracket.entry(w) {
                                std::collections::btree_map::Entry::Vacant(e) => {
                                    e.insert(s);
                                }
                                std::collections::btree_map::Entry::Occupied(mut e) => {
                                    *e.get_mut() = e.get().add(&s).expect("h-only add");
                                }
                            };
                        };

                        // pair terms: h^2 * coeff * t_{c'd'}^{(-s')} t_{a'b'}^{(-r')}
                        for ap in 0..n {
                            for bp in 0..n {
                                for cp in 0..n {
                                    for dp in 0..n {
                                        let key = ((a, c), (ap, cp), (bp, dp), (b, d));
                                        for rp in 1..=r_ext as usize {
                                            for sp in 1..=s {
                                                if let Some(coef) = extract(
                                                    &key,
                                                    r as i64 - rp as i64,
                                                    s as i64 - sp as i64,
                                                )? {
                                                    let h2 = Series::monomial(
                                                        &hctx_work,
                                                        &[],
                                                        2,
                                                        Rat::one(),
                                                    )?;
                                                    add(
                                                        vec![
                                                            Gen {
                                                                r: sp as u8,
                                                                i: cp,
                                                                j: dp,
                                                            },
                                                            Gen {
                                                                r: rp as u8,
                                                                i: ap,
                                                                j: bp,
                                                            },
                                                        ],
                                                        coef.mul(&h2)?,
                                                    );
                                                }
                                            }
                                        }

                                    }
                                }
                            }
                        }

                        // linear terms from the delta parts of T2 T1
                        for ap in 0..n {
                            for bp in 0..n {
                                for cp in 0..n {
                                    // t_{c'd'} -> delta: d' = c'
                                    let key = ((a, c), (ap, cp), (bp, cp), (b, d));
                                    for rp in 1..=r_ext as usize {
                                        if let Some(coef) =
                                            extract(&key, r as i64 - rp as i64, s as i64 - 1)?
                                        {
                                            let mh = Series::monomial(
                                                &hctx_work,
                                                &[],
                                                1,
                                                Rat::from_int(-1),
                                            )?;
                                            add(
                                                vec![Gen {
                                                    r: rp as u8,
                                                    i: ap,
                                                    j: bp,
                                                }],
                                                coef.mul(&mh)?,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                        for ap in 0..n {
                            for cp in 0..n {
                                for dp in 0..n {
                                    // t_{a'b'} -> delta: b' = a'
                                    let key = ((a, c), (ap, cp), (ap, dp), (b, d));
                                    for sp in 1..=s {
                                        if let Some(coef) =
                                            extract(&key, r as i64 - 1, s as i64 - sp as i64)?
                                        {
                                            let mh = Series::monomial(
                                                &hctx_work,
                                                &[],
                                                1,
                                                Rat::from_int(-1),
                                            )?;
                                            add(
                                                vec![Gen {
                                                    r: sp as u8,
                                                    i: cp,
                                                    j: dp,
                                                }],
                                                coef.mul(&mh)?,
                                            );
                                        }
                                    }
                                }
                            }
                        }
                        // scalar term
                        for ap in 0..n {
                            for cp in 0..n {
                                let key = ((a, c), (ap, cp), (ap, cp), (b, d));
                                if let Some(coef) = extract(&key, r as i64 - 1, s as i64 - 1)? {
                                    add(Vec::new(), coef);
                                }
                            }
                        }

                        // move the delta-parts of the left-hand side across
                        if a == b && r == 1 {
                            let h1 = Series::monomial(&hctx_work, &[], 1, Rat::one())?;
                            add(
                                vec![Gen {
                                    r: s as u8,
                                    i: c,
                                    j: d,
                                }],
                                h1,
                            );
                        }
                        if c == d && s == 1 {
                            let h1 = Series::monomial(&hctx_work, &[], 1, Rat::one())?;
                            add(
                                vec![Gen {
                                    r: r as u8,
                                    i: a,
                                    j: b,
                                }],
                                h1,
                            );
                        }
                        if a == b && c == d && r == 1 && s == 1 {
                            add(Vec::new(), Series::one(&hctx_work).neg());
                        }

                        // divide the whole bracket by h^2 (checked) and lift
                        let mut rules = Vec::new();
                        for (w, coef) in bracket {
                            if coef.is_zero() {
                                continue;
                            }
                            let divided = coef.div_h_pow(2).map_err(|e| {
                                Error::DivisionNotExact(format!(
                                    "exchange bracket at ({a},{b},{c},{d}) depth ({r},{s}), word {w:?}: {e}"
                                ))
                            })?;
                            let lifted = lift_h_series(&divided, &self.ctx)?;
                            if !lifted.is_zero() {
                                rules.push((w, lifted));
                            }
                        }
                        table.insert((a, b, c, d), rules);
                    }
                }
            }
        }
        Ok(table)
    }
}

impl RewriteContext {
    /// Test support: the rewrite rules for one out-of-order pair.
    pub fn debug_pair_rules(&self, left: Gen, right: Gen) -> Result<Vec<(Word, Series)>> {
        let t = self.pair_table(left.r as usize, right.r as usize)?;
        Ok(t.get(&(left.i, left.j, right.i, right.j))
            .cloned()
            .unwrap_or_default())
    }
}

/// An element of the truncated algebra: normal-form words with coefficients
/// in the shared profile.
#[derive(Clone)]
pub struct AlgebraElement {
    pub rew: Arc<RewriteContext>,
    pub terms: BTreeMap<Word, Series>,
}

impl std::fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let ws: Vec<String> = w
                    .iter()
                    .map(|g| format!("t[{},{}]^(-{})", g.i + 1, g.j + 1, g.r))
                    .collect();
                let label = if ws.is_empty() {
                    "1".to_string()
                } else {
                    ws.join(" ")
                };
                format!("({:?}) {}", c, label)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl AlgebraElement {
    pub fn zero(rew: &Arc<RewriteContext>) -> Self {
        AlgebraElement {
            rew: rew.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The vacuum vector (empty word, coefficient 1).
    pub fn vacuum(rew: &Arc<RewriteContext>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Series::one(&rew.ctx));
        AlgebraElement {
            rew: rew.clone(),
            terms,
        }
    }

    pub fn from_scalar(rew: &Arc<RewriteContext>, s: Series) -> Self {
        let mut out = AlgebraElement::zero(rew);
        if !s.is_zero() {
            out.terms.insert(Vec::new(), s);
        }
        out
    }

    pub fn generator(rew: &Arc<RewriteContext>, g: Gen) -> Self {
        let mut out = AlgebraElement::zero(rew);
        out.terms.insert(vec![g], Series::one(&rew.ctx));
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            match out.terms.entry(w.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get().add(c)?;
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Series) -> Result<Self> {
        let mut out = AlgebraElement::zero(&self.rew);
        for (w, c) in &self.terms {
            let p = c.mul(s)?;
            if !p.is_zero() {
                out.terms.insert(w.clone(), p);
            }
        }
        Ok(out)
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(r);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Algebra product: concatenate words, then rewrite to normal form.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut raw: Vec<(Word, Series)> = Vec::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                if w1.len() + w2.len() > self.rew.d_max {
                    return Err(Error::Invalid(format!(
                        "degree overflow: word length {} exceeds the configured bound {}",
                        w1.len() + w2.len(),
                        self.rew.d_max
                    )));
                }
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                raw.push((w, c1.mul(c2)?));
            }
        }
        normal_form_terms(&self.rew, raw, Schedule::FirstInversion)
    }

    /// Extract the coefficient of `v^deg` from every stored coefficient.
    pub fn var_coeff(&self, v: VarId, deg: i64) -> Result<Self> {
        let mut out = AlgebraElement::zero(&self.rew);
        for (w, c) in &self.terms {
            let e = c.var_coeff(v, deg)?;
            if !e.is_zero() {
                out.terms.insert(w.clone(), e);
            }
        }
        Ok(out)
    }

    pub fn div_h_pow(&self, d: usize) -> Result<Self> {
        let mut out = AlgebraElement::zero(&self.rew);
        for (w, c) in &self.terms {
            let e = c.div_h_pow(d)?;
            if !e.is_zero() {
                out.terms.insert(w.clone(), e);
            }
        }
        Ok(out)
    }

    /// First nonzero coefficient monomial inside the window across all words.
    pub fn first_defect(
        &self,
        window: &[(VarId, i64, i64)],
        h_need: usize,
    ) -> Result<Option<(String, Rat)>> {
        for (w, c) in &self.terms {
            if let Some((m, val)) = c.first_defect(window, h_need)? {
                return Ok(Some((format!("word {w:?}: {m}"), val)));
            }
        }
        Ok(None)
    }
}

/// Rewrite a raw list of (word, coefficient) pairs to normal form.
pub fn normal_form_terms(
    rew: &Arc<RewriteContext>,
    raw: Vec<(Word, Series)>,
    schedule: Schedule,
) -> Result<AlgebraElement> {
    let mut out = AlgebraElement::zero(rew);
    let mut work = raw;
    let mut steps = 0usize;
    let budget = 200_000usize;
    while let Some((w, c)) = work.pop() {
        if c.is_zero() {
            continue;
        }
        steps += 1;
        if steps > budget {
            return Err(Error::ExpansionDiverged(
                "rewriting exceeded its step budget".into(),
            ));
        }
        if word_sorted(&w) {
            match out.terms.entry(w) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get().add(&c)?;
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
            }
            continue;
        }
        // locate an inversion per the schedule
        let positions: Vec<usize> = (0..w.len() - 1).filter(|&p| w[p] > w[p + 1]).collect();
        let p = match schedule {
            Schedule::FirstInversion => positions[0],
            Schedule::LastInversion => *positions.last().unwrap(),
        };
        let (g1, g2) = (w[p], w[p + 1]);
        let table = rew.pair_table(g1.r as usize, g2.r as usize)?;
        let rules = table
            .get(&(g1.i, g1.j, g2.i, g2.j))
            .ok_or_else(|| Error::Invalid("missing exchange rule".into()))?;
        for (repl, coef) in rules {
            let scaled = c.mul(coef)?;
            if scaled.is_zero() {
                continue;
            }
            if let Some(g) = repl.iter().find(|g| g.r as usize > rew.r_max) {
                return Err(Error::DepthOverflow {
                    needed: g.r as usize,
                    max: rew.r_max,
                });
            }
            let mut nw = Vec::with_capacity(w.len() - 2 + repl.len());
            nw.extend_from_slice(&w[..p]);
            nw.extend_from_slice(repl);
            nw.extend_from_slice(&w[p + 2..]);
            work.push((nw, scaled));
        }
    }
    Ok(out)
}

impl Coeff for AlgebraElement {
    fn c_add(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
    fn c_mul(&self, o: &Self) -> Result<Self> {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
}

/// A pair element of the tensor square of the algebra (slotwise products).
#[derive(Clone)]
pub struct PairElement {
    pub rew: Arc<RewriteContext>,
    pub terms: BTreeMap<(Word, Word), Series>,
}

impl PairElement {
    pub fn zero(rew: &Arc<RewriteContext>) -> Self {
        PairElement {
            rew: rew.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(rew: &Arc<RewriteContext>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((Vec::new(), Vec::new()), Series::one(&rew.ctx));
        PairElement {
            rew: rew.clone(),
            terms,
        }
    }

    pub fn from_scalar(rew: &Arc<RewriteContext>, s: Series) -> Self {
        let mut out = PairElement::zero(rew);
        if !s.is_zero() {
            out.terms.insert((Vec::new(), Vec::new()), s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            match out.terms.entry(w.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get().add(c)?;
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Slotwise product with normal form in each slot.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        let rew = &self.rew;
        let mut out = PairElement::zero(rew);
        for ((l1, r1), c1) in &self.terms {
            for ((l2, r2), c2) in &o.terms {
                let coeff = c1.mul(c2)?;
                // normal-form both slots, then distribute
                let mut lw = l1.clone();
                lw.extend_from_slice(l2);
                let mut rw = r1.clone();
                rw.extend_from_slice(r2);
                let left = normal_form_terms(rew, vec![(lw, coeff)], Schedule::FirstInversion)?;
                for (wl, cl) in &left.terms {
                    let right =
                        normal_form_terms(rew, vec![(rw.clone(), cl.clone())], Schedule::FirstInversion)?;
                    for (wr, cr) in &right.terms {
                        let key = (wl.clone(), wr.clone());
                        match out.terms.entry(key) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(cr.clone());
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                let s = e.get().add(cr)?;
                                if s.is_zero() {
                                    e.remove();
                                } else {
                                    *e.get_mut() = s;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn var_coeff(&self, v: VarId, deg: i64) -> Result<Self> {
        let mut out = PairElement::zero(&self.rew);
        for (w, c) in &self.terms {
            let e = c.var_coeff(v, deg)?;
            if !e.is_zero() {
                out.terms.insert(w.clone(), e);
            }
        }
        Ok(out)
    }

    pub fn div_h_pow(&self, d: usize) -> Result<Self> {
        let mut out = PairElement::zero(&self.rew);
        for (w, c) in &self.terms {
            let e = c.div_h_pow(d)?;
            if !e.is_zero() {
                out.terms.insert(w.clone(), e);
            }
        }
        Ok(out)
    }

    pub fn first_defect(
        &self,
        window: &[(VarId, i64, i64)],
        h_need: usize,
    ) -> Result<Option<(String, Rat)>> {
        for (w, c) in &self.terms {
            if let Some((m, val)) = c.first_defect(window, h_need)? {
                return Ok(Some((format!("pair {w:?}: {m}"), val)));
            }
        }
        Ok(None)
    }
}

impl Coeff for PairElement {
    fn c_add(&self, o: &Self) -> Result<Self> {
        self.add(o)
    }
    fn c_mul(&self, o: &Self) -> Result<Self> {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn c_is_zero(&self) -> bool {
        self.is_zero()
    }
}
