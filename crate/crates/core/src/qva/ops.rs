//! Operator layer over the truncated algebra: the generating matrices and
//! their chains, the dual action, the vertex operator map, and the
//! decomposition of arbitrary normal-form words through coefficient
//! extraction from generating-matrix products.

use std::sync::Arc;

use crate::error::Result;
use crate::profile::VarId;
use crate::rat::Rat;
use crate::series::Series;
use crate::tensor::TensorOperator;

use super::algebra::{AlgebraElement, Gen, RewriteContext};

/// A linear argument: sum of variables with rational coefficients plus a
/// rational multiple of h.
#[derive(Clone, Debug, Default)]
pub struct LinForm {
    pub terms: Vec<(VarId, Rat)>,
    pub h: Rat,
}

impl LinForm {
    pub fn var(v: VarId) -> Self {
        LinForm {
            terms: vec![(v, Rat::one())],
            h: Rat::zero(),
        }
    }

    pub fn h_mult(c: Rat) -> Self {
        LinForm {
            terms: vec![],
            h: c,
        }
    }

    pub fn plus_var(mut self, v: VarId, c: Rat) -> Self {
        self.terms.push((v, c));
        self
    }

    pub fn plus_h(mut self, c: &Rat) -> Self {
        self.h = &self.h + c;
        self
    }

    pub fn sub(&self, o: &LinForm) -> LinForm {
        let mut terms = self.terms.clone();
        for (v, c) in &o.terms {
            terms.push((*v, -c));
        }
        LinForm {
            terms,
            h: &self.h - &o.h,
        }
    }

    pub fn neg(&self) -> LinForm {
        LinForm {
            terms: self.terms.iter().map(|(v, c)| (*v, -c)).collect(),
            h: -&self.h,
        }
    }

    pub fn series(&self, ctx: &crate::profile::Ctx) -> Result<Series> {
        let mut s = Series::h(ctx).scale(&self.h);
        for (v, c) in &self.terms {
            s = s.add(&Series::var(ctx, *v).scale(c))?;
        }
        Ok(s)
    }

    pub fn exp(&self, ctx: &crate::profile::Ctx) -> Result<Series> {
        self.series(ctx)?.exp()
    }

    /// Powers of the linear form (for generating-series arguments).
    pub fn pow_series(&self, ctx: &crate::profile::Ctx, e: usize) -> Result<Series> {
        self.series(ctx)?.pow(e)
    }
}

// ----------------------------------------------------------------------
// Generating matrices
// ----------------------------------------------------------------------

/// The generating-series entry t^+_{ij}(arg) as an algebra element:
/// delta_ij - h sum_{m=1..u_max} t_{ij}^{(-m)} arg^{m-1}.
pub fn tplus_entry(
    rew: &Arc<RewriteContext>,
    i: u8,
    j: u8,
    arg: &LinForm,
) -> Result<AlgebraElement> {
    let ctx = &rew.ctx;
    let mut out = AlgebraElement::zero(rew);
    if i == j {
        out = out.add(&AlgebraElement::vacuum(rew))?;
    }
    let mut pow = Series::one(ctx);
    let arg_series = arg.series(ctx)?;
    for m in 1..=rew.u_max {
        if m > 1 {
            pow = pow.mul(&arg_series)?;
        }
        if pow.is_zero() {
            break;
        }
        let coeff = pow.mul(&Series::h(ctx))?.neg();
        let mut term = AlgebraElement::zero(rew);
        term.terms.insert(
            vec![Gen {
                r: m as u8,
                i,
                j,
            }],
            coeff,
        );
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Identity matrix on `legs` legs of dimension N with vacuum entries.
pub fn identity_ae(rew: &Arc<RewriteContext>, legs: usize) -> TensorOperator<AlgebraElement> {
    let dims = vec![rew.n; legs.max(1)];
    if legs == 0 {
        let mut op = TensorOperator::zero(&[1]);
        op.set(0, 0, AlgebraElement::vacuum(rew));
        return op;
    }
    TensorOperator::identity(&dims, &AlgebraElement::vacuum(rew))
}

/// Left-multiply a matrix-valued element by the generating matrix acting on
/// one leg: (T^+_leg(arg) M)[row, col] = sum_k t^+_{row_leg, k}(arg) M[row<-k, col].
pub fn tplus_left_mul(
    rew: &Arc<RewriteContext>,
    m: &TensorOperator<AlgebraElement>,
    leg: usize,
    arg: &LinForm,
) -> Result<TensorOperator<AlgebraElement>> {
    let n = rew.n;
    let dims = m.dims.clone();
    // entries of T^+ at this argument
    let mut t_entries = Vec::new();
    for i in 0..n as u8 {
        for j in 0..n as u8 {
            t_entries.push(tplus_entry(rew, i, j, arg)?);
        }
    }
    let mut out = TensorOperator::zero(&dims);
    for (&(r, c), v) in m.entries() {
        let rm = crate::tensor::decompose_index(&dims, r);
        for i in 0..n {
            let t = &t_entries[i * n + rm[leg]];
            if t.is_zero() {
                continue;
            }
            let prod = t.mul(v)?;
            if prod.is_zero() {
                continue;
            }
            let mut rm2 = rm.clone();
            rm2[leg] = i;
            out.accumulate(crate::tensor::compose_index(&dims, &rm2), c, prod)?;
        }
    }
    Ok(out)
}

/// The product T^+_1(a_1) ... T^+_n(a_n) applied to the vacuum, as an n-leg
/// matrix with algebra entries.
pub fn tplus_chain(
    rew: &Arc<RewriteContext>,
    args: &[LinForm],
) -> Result<TensorOperator<AlgebraElement>> {
    let n = args.len();
    let mut m = identity_ae(rew, n);
    for p in (0..n).rev() {
        m = tplus_left_mul(rew, &m, p, &args[p])?;
    }
    Ok(m)
}

/// Embed a scalar operator as an algebra-valued one.
pub fn scalar_op_ae(
    rew: &Arc<RewriteContext>,
    op: &TensorOperator<Series>,
) -> Result<TensorOperator<AlgebraElement>> {
    op.map(|s| Ok(AlgebraElement::from_scalar(rew, s.clone())))
}

// ----------------------------------------------------------------------
// R-matrix factor chains (exponential arguments)
// ----------------------------------------------------------------------

/// One exponential R-factor R(e^{arg}) embedded at the given legs. The
/// argument's variables are sorted outermost-first along `ord` and the
/// normalizing scalar is evaluated through the single-variable scratch
/// route, so mixed-sign exponents stay fully trusted.
pub fn r_factor(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    dims: &[usize],
    legs: [usize; 2],
    arg: &LinForm,
    inverse: bool,
) -> Result<TensorOperator<Series>> {
    let ctx = &rew.ctx;
    let mut parts = arg.terms.clone();
    parts.sort_by_key(|(v, _)| ord.iter().position(|o| o == v).unwrap_or(usize::MAX - v));
    // merge duplicate variables
    let mut merged: Vec<(VarId, Rat)> = Vec::new();
    for (v, c) in parts {
        if let Some(last) = merged.iter_mut().find(|(w, _)| *w == v) {
            last.1 = &last.1 + &c;
        } else {
            merged.push((v, c));
        }
    }
    merged.retain(|(_, c)| !c.is_zero());
    let r = rew
        .rm
        .r_exp_linear(ctx, &merged, &arg.h, rew.arg_window, inverse)?;
    r.embed(dims, &legs)
}

/// Grid product R^{12}_{nm}: legs 0..n-1 against legs n..n+m-1, outer index
/// ascending, inner descending; `arg(i, j)` names the exponent of the
/// (i, j) factor. For the inverse, factors are inverted and the visiting
/// order is reversed.
pub fn r_grid_12(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    dims: &[usize],
    n: usize,
    m: usize,
    arg: &dyn Fn(usize, usize) -> LinForm,
    inverse: bool,
) -> Result<TensorOperator<Series>> {
    let mut factors = Vec::new();
    for i in 0..n {
        for j in (n..n + m).rev() {
            factors.push((i, j));
        }
    }
    if inverse {
        factors.reverse();
    }
    let mut out = TensorOperator::identity(dims, &Series::one(&rew.ctx));
    for (i, j) in factors {
        let f = r_factor(rew, ord, dims, [i, j], &arg(i, j - n), inverse)?;
        out = out.mul(&f)?;
    }
    Ok(out)
}

/// Grid product R^{21}_{nm}: factors R_{ji}, outer block index descending,
/// inner ascending.
pub fn r_grid_21(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    dims: &[usize],
    n: usize,
    m: usize,
    arg: &dyn Fn(usize, usize) -> LinForm,
    inverse: bool,
) -> Result<TensorOperator<Series>> {
    let mut factors = Vec::new();
    for i in (0..n).rev() {
        for j in n..n + m {
            factors.push((j, i));
        }
    }
    if inverse {
        factors.reverse();
    }
    let mut out = TensorOperator::identity(dims, &Series::one(&rew.ctx));
    for (j, i) in factors {
        let f = r_factor(rew, ord, dims, [j, i], &arg(i, j - n), inverse)?;
        out = out.mul(&f)?;
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Dual action
// ----------------------------------------------------------------------

/// T*_{beta alpha}(x) applied to v, assembled as a 1-leg matrix of algebra
/// elements: v is decomposed into generating-product coefficients
/// (inclusion-exclusion over the delta parts) and the defining conjugation
/// formula is applied to each piece.
pub fn tstar_matrix(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    x: &LinForm,
    v: &AlgebraElement,
) -> Result<TensorOperator<AlgebraElement>> {
    let n = rew.n;
    let half_c = &rew.level * &Rat::new(1, 2);
    let minus_half_c = -&half_c;
    let mut out = TensorOperator::zero(&[n]);
    apply_via_tplus(rew, v, 1, &mut |gens, coeff, out_acc: &mut TensorOperator<AlgebraElement>| {
        let np = gens.len();
        if np == 0 {
            // T*(x) 1 = 1
            for beta in 0..n as u32 {
                out_acc.accumulate(beta, beta, AlgebraElement::vacuum(rew).scale(coeff)?)?;
            }
            return Ok(());
        }
        let ys: Vec<LinForm> = (0..np).map(|p| LinForm::var(rew.aux_y[1][p])).collect();
        let dims = vec![n; np + 1];
        // rightmost: R^{12}(e^{x - y - hc/2}) = R_{0,np} ... R_{0,1}
        let mut right = TensorOperator::identity(&dims, &Series::one(&rew.ctx));
        for j in (1..=np).rev() {
            let arg = x.sub(&ys[j - 1]).plus_h(&minus_half_c);
            right = right.mul(&r_factor(rew, ord, &dims, [0, j], &arg, false)?)?;
        }
        // leftmost: inverse of R^{12}(e^{x - y + hc/2})
        let mut left = TensorOperator::identity(&dims, &Series::one(&rew.ctx));
        for j in 1..=np {
            let arg = x.sub(&ys[j - 1]).plus_h(&half_c);
            left = left.mul(&r_factor(rew, ord, &dims, [0, j], &arg, true)?)?;
        }
        // T+ chain on legs 1..np
        let mut chain = identity_ae(rew, np + 1);
        for p in (1..=np).rev() {
            chain = tplus_left_mul(rew, &chain, p, &ys[p - 1])?;
        }
        let full = scalar_op_ae(rew, &left)?
            .mul(&chain)?
            .mul(&scalar_op_ae(rew, &right)?)?;
        // extract the matrix rows/cols and the y-coefficients
        for beta in 0..n {
            for alpha in 0..n {
                let mut row = vec![beta];
                let mut col = vec![alpha];
                for g in gens {
                    row.push(g.i as usize);
                    col.push(g.j as usize);
                }
                let ri = crate::tensor::compose_index(&dims, &row);
                let ci = crate::tensor::compose_index(&dims, &col);
                let Some(entry) = full.get(ri, ci) else {
                    continue;
                };
                let mut e = entry.clone();
                for (p, g) in gens.iter().enumerate() {
                    e = e.var_coeff(rew.aux_y[1][p], g.r as i64 - 1)?;
                    if e.is_zero() {
                        break;
                    }
                }
                if !e.is_zero() {
                    out_acc.accumulate(beta as u32, alpha as u32, e.scale(coeff)?)?;
                }
            }
        }
        Ok(())
    }, &mut out)?;
    Ok(out)
}

/// Inclusion-exclusion driver: express each word of `v` through coefficients
/// of generating products over subsets of its positions, handing every
/// subset (with the delta-factors and sign folded into `coeff`) to the
/// callback, which accumulates h^{deg}-scaled images into `out`. The final
/// h-division is exact by construction and checked.
pub fn apply_via_tplus<Out>(
    rew: &Arc<RewriteContext>,
    v: &AlgebraElement,
    _pool: usize,
    f: &mut dyn FnMut(&[Gen], &Series, &mut Out) -> Result<()>,
    out: &mut Out,
) -> Result<()>
where
    Out: HScaled,
{
    for (word, coeff) in &v.terms {
        let d = word.len();
        let mut word_acc = Out::h_zero_like(out);
        let mut ok = true;
        for mask in 0..(1u32 << d) {
            // positions outside the subset must be depth-1 diagonal gens
            let mut deltas_ok = true;
            let mut gens = Vec::new();
            for (p, g) in word.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    gens.push(*g);
                } else if g.r != 1 || g.i != g.j {
                    deltas_ok = false;
                    break;
                }
            }
            if !deltas_ok {
                continue;
            }
            let sign = if gens.len() % 2 == 0 { Rat::one() } else { Rat::from_int(-1) };
            let scaled = Series::constant(&rew.ctx, sign);
            f(&gens, &scaled, &mut word_acc)?;
            if !ok {
                break;
            }
        }
        let _ = &mut ok;
        // divide by h^d and fold in the word coefficient
        let divided = word_acc.h_div(d)?;
        Out::h_add_scaled(out, divided, coeff)?;
    }
    Ok(())
}

/// Accumulation interface for decomposition outputs.
pub trait HScaled: Sized {
    fn h_zero_like(template: &Self) -> Self;
    fn h_div(self, d: usize) -> Result<Self>;
    fn h_add_scaled(acc: &mut Self, part: Self, coeff: &Series) -> Result<()>;
}

impl HScaled for TensorOperator<AlgebraElement> {
    fn h_zero_like(template: &Self) -> Self {
        TensorOperator::zero(&template.dims)
    }
    fn h_div(self, d: usize) -> Result<Self> {
        self.map(|e| e.div_h_pow(d))
    }
    fn h_add_scaled(acc: &mut Self, part: Self, coeff: &Series) -> Result<()> {
        for (&(r, c), v) in part.entries() {
            acc.accumulate(r, c, v.scale(coeff)?)?;
        }
        Ok(())
    }
}

impl HScaled for AlgebraElement {
    fn h_zero_like(template: &Self) -> Self {
        AlgebraElement::zero(&template.rew)
    }
    fn h_div(self, d: usize) -> Result<Self> {
        self.div_h_pow(d)
    }
    fn h_add_scaled(acc: &mut Self, part: Self, coeff: &Series) -> Result<()> {
        *acc = acc.add(&part.scale(coeff)?)?;
        Ok(())
    }
}

// ----------------------------------------------------------------------
// Dual-chain application and inversion
// ----------------------------------------------------------------------

/// Apply T*_leg(x) to a matrix-valued element.
pub fn tstar_leg_apply(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    m: &TensorOperator<AlgebraElement>,
    leg: usize,
    x: &LinForm,
) -> Result<TensorOperator<AlgebraElement>> {
    let dims = m.dims.clone();
    let mut out = TensorOperator::zero(&dims);
    for (&(r, c), v) in m.entries() {
        let ts = tstar_matrix(rew, ord, x, v)?;
        let rm = crate::tensor::decompose_index(&dims, r);
        let alpha = rm[leg] as u32;
        for beta in 0..rew.n {
            if let Some(e) = ts.get(beta as u32, alpha) {
                let mut rm2 = rm.clone();
                rm2[leg] = beta;
                out.accumulate(crate::tensor::compose_index(&dims, &rm2), c, e.clone())?;
            }
        }
    }
    Ok(out)
}

/// Apply the full dual chain T*_1(x_1) ... T*_n(x_n).
pub fn tstar_chain_apply(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    m: &TensorOperator<AlgebraElement>,
    args: &[LinForm],
) -> Result<TensorOperator<AlgebraElement>> {
    let mut out = m.clone();
    for (p, x) in args.iter().enumerate().rev() {
        out = tstar_leg_apply(rew, ord, &out, p, x)?;
    }
    Ok(out)
}

/// Apply the inverse of the dual chain by the geometric series: the chain is
/// the identity modulo h, so (chain)^{-1} = sum (id - chain)^j.
pub fn tstar_chain_inverse_apply(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    m: &TensorOperator<AlgebraElement>,
    args: &[LinForm],
) -> Result<TensorOperator<AlgebraElement>> {
    let mut total = m.clone();
    let mut term = m.clone();
    for _ in 1..rew.ctx.h_order {
        let chained = tstar_chain_apply(rew, ord, &term, args)?;
        term = term.sub(&chained)?; // (id - chain) term
        if term.is_zero() {
            break;
        }
        total = total.add(&term)?;
    }
    Ok(total)
}

// ----------------------------------------------------------------------
// Vertex operator map
// ----------------------------------------------------------------------

/// Y(v, z) w for arbitrary elements, through the generating formula
/// Y(T+_{[n]}(y) 1, z) = T+_{[n]}(y|z) T*_{[n]}(y|z + hc/2)^{-1}.
pub fn vertex_y(
    rew: &Arc<RewriteContext>,
    ord: &[VarId],
    v: &AlgebraElement,
    z: VarId,
    w: &AlgebraElement,
) -> Result<AlgebraElement> {
    let half_c = &rew.level * &Rat::new(1, 2);
    let mut out = AlgebraElement::zero(rew);
    apply_via_tplus(rew, v, 0, &mut |gens, coeff, acc: &mut AlgebraElement| {
        let np = gens.len();
        if np == 0 {
            *acc = acc.add(&w.scale(coeff)?)?;
            return Ok(());
        }
        let ys: Vec<LinForm> = (0..np).map(|p| LinForm::var(rew.aux_y[0][p])).collect();
        let dims = vec![rew.n; np];
        // diag(w) on np legs
        let diag_w = TensorOperator::identity(&dims, &AlgebraElement::vacuum(rew))
            .map(|e| e.mul(w))?;
        let star_args: Vec<LinForm> = ys
            .iter()
            .map(|y| {
                let mut a = y.clone();
                a.terms.push((z, Rat::one()));
                a.plus_h(&half_c)
            })
            .collect();
        let minv = tstar_chain_inverse_apply(rew, ord, &diag_w, &star_args)?;
        let mut full = minv;
        for p in (0..np).rev() {
            let mut arg = ys[p].clone();
            arg.terms.push((z, Rat::one()));
            full = tplus_left_mul(rew, &full, p, &arg)?;
        }
        // extract entries and y-coefficients
        let mut row = Vec::new();
        let mut col = Vec::new();
        for g in gens {
            row.push(g.i as usize);
            col.push(g.j as usize);
        }
        let ri = crate::tensor::compose_index(&dims, &row);
        let ci = crate::tensor::compose_index(&dims, &col);
        if let Some(entry) = full.get(ri, ci) {
            let mut e = entry.clone();
            for (p, g) in gens.iter().enumerate() {
                e = e.var_coeff(rew.aux_y[0][p], g.r as i64 - 1)?;
                if e.is_zero() {
                    break;
                }
            }
            if !e.is_zero() {
                *acc = acc.add(&e.scale(coeff)?)?;
            }
        }
        Ok(())
    }, &mut out)?;
    Ok(out)
}
