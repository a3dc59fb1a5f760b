//! Finite restricted modules: a free module of finite rank over the
//! truncated scalars together with the quantum-current action L(z), given by
//! finite Laurent data per h-order.

use crate::error::{Error, Result};
use crate::profile::{Ctx, VarId};
use crate::rat::Rat;
use crate::series::Series;
use crate::tensor::TensorOperator;

/// A restricted-module witness: rank, level, and the action matrix on one
/// auxiliary leg (dimension N) and one module leg (dimension `rank`), with
/// entries Laurent in the distinguished variable.
#[derive(Clone)]
pub struct RestrictedModuleSpec {
    pub n: usize,
    pub rank: usize,
    pub level: Rat,
    /// the variable the action data is written in
    pub z_var: VarId,
    /// action on dims [N, rank]; entries Laurent series in `z_var`
    pub action: TensorOperator<Series>,
}

impl RestrictedModuleSpec {
    /// The action embedded into an (aux legs + module leg) operator with the
    /// auxiliary copy at `aux_leg`.
    pub fn action_at(
        &self,
        dims: &[usize],
        aux_leg: usize,
        module_leg: usize,
        z_image: &Series,
    ) -> Result<TensorOperator<Series>> {
        // substitute the spec's variable by z_image in every entry, then embed
        let mut subbed = TensorOperator::zero(&[self.n, self.rank]);
        for (&(r, c), v) in self.action.entries() {
            let s = subst_monomial(v, self.z_var, z_image)?;
            subbed.set(r, c, s);
        }
        subbed.embed(dims, &[aux_leg, module_leg])
    }
}

/// Substitute `z -> image` where image is an exact unit monomial times an
/// h-exponential (the only substitutions module actions need).
fn subst_monomial(s: &Series, z: VarId, image: &Series) -> Result<Series> {
    let ctx = s.ctx();
    let mut image_inv: Option<Series> = None;
    let mut out = Series::zero(ctx);
    let mut cache: std::collections::BTreeMap<i64, Series> = std::collections::BTreeMap::new();
    cache.insert(0, Series::one(ctx));
    for (m, c) in s.terms() {
        let a = m.0[z] as i64;
        if !cache.contains_key(&a) {
            let p = if a > 0 {
                image.pow(a as usize)?
            } else {
                if image_inv.is_none() {
                    // unit monomial inverse: flip all exponents
                    let (im, ic) = image
                        .terms()
                        .next()
                        .ok_or_else(|| Error::NotInvertible("zero substitution image".into()))?;
                    if image.num_terms() != 1 {
                        // general unit: invert through the expansion order []
                        image_inv = Some(image.invert_iota(&[])?);
                    } else {
                        let mut exps = Vec::new();
                        for v in 0..ctx.nvars() {
                            if im.0[v] != 0 {
                                exps.push((v, -(im.0[v] as i64)));
                            }
                        }
                        image_inv =
                            Some(Series::monomial(ctx, &exps, 0, ic.recip()?)?);
                    }
                }
                image_inv.as_ref().unwrap().pow((-a) as usize)?
            };
            cache.insert(a, p);
        }
        let mut ex = m.0.clone();
        ex[z] = 0;
        let piece = Series::monomial(
            ctx,
            &(0..ctx.nvars())
                .filter(|&v| ex[v] != 0)
                .map(|v| (v, ex[v] as i64))
                .collect::<Vec<_>>(),
            m.h_exp(),
            c.clone(),
        )?;
        out = out.add(&piece.mul(&cache[&a])?)?;
    }
    Ok(out)
}

/// Rank-1 module with a scalar action s(z) (which must be 1 plus h times
/// bounded-below Laurent data).
pub fn scalar_module(
    ctx: &Ctx,
    n: usize,
    z: VarId,
    scalar: &Series,
) -> Result<RestrictedModuleSpec> {
    let dev = scalar.sub(&Series::one(ctx))?;
    if let Some(v) = dev.h_valuation() {
        if v < 1 {
            return Err(Error::Invalid(
                "scalar action must be 1 modulo h".into(),
            ));
        }
    }
    let mut action = TensorOperator::zero(&[n, 1]);
    for i in 0..n as u32 {
        action.set(i, i, scalar.clone());
    }
    Ok(RestrictedModuleSpec {
        n,
        rank: 1,
        level: Rat::zero(),
        z_var: z,
        action,
    })
}

/// Parse a module description: header `rank d level p/q N n`, then lines
/// `i j h_order z_degree num/den` giving the full entries of the action
/// series (1-based matrix indices; rank-1 modules omit module indices).
pub fn parse_module_spec(ctx: &Ctx, z: VarId, text: &str) -> Result<RestrictedModuleSpec> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Invalid("empty module file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "rank" || toks[2] != "level" || toks[4] != "N" {
        return Err(Error::Invalid(
            "module header must be `rank d level p/q N n`".into(),
        ));
    }
    let rank: usize = toks[1]
        .parse()
        .map_err(|_| Error::Invalid("bad rank".into()))?;
    let level: Rat = toks[3].parse()?;
    let n: usize = toks[5]
        .parse()
        .map_err(|_| Error::Invalid("bad N".into()))?;
    if rank != 1 {
        return Err(Error::Invalid(
            "module files currently describe scalar-type actions (rank 1) with diagonal entries".into(),
        ));
    }
    let mut action = TensorOperator::zero(&[n, rank]);
    for line in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 5 {
            return Err(Error::Invalid(format!("bad module line `{line}`")));
        }
        let i: usize = t[0].parse().map_err(|_| Error::Invalid("bad i".into()))?;
        let j: usize = t[1].parse().map_err(|_| Error::Invalid("bad j".into()))?;
        let k: usize = t[2].parse().map_err(|_| Error::Invalid("bad h order".into()))?;
        let d: i64 = t[3].parse().map_err(|_| Error::Invalid("bad degree".into()))?;
        let val: Rat = t[4].parse()?;
        let add = Series::monomial(ctx, &[(z, d)], k, val)?;
        let (r, c) = ((i - 1) as u32, (j - 1) as u32);
        let cur = action.get(r, c).cloned().unwrap_or_else(|| Series::zero(ctx));
        action.set(r, c, cur.add(&add)?);
    }
    Ok(RestrictedModuleSpec {
        n,
        rank,
        level,
        z_var: z,
        action,
    })
}

/// Serialize in the same format.
pub fn write_module_spec(spec: &RestrictedModuleSpec, z: VarId) -> String {
    let mut out = format!("rank {} level {} N {}\n", spec.rank, spec.level, spec.n);
    for (&(r, c), v) in spec.action.entries() {
        for (m, coeff) in v.terms() {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                r + 1,
                c + 1,
                m.h_exp(),
                m.0[z],
                coeff
            ));
        }
    }
    out
}
