//! Identity suites for the trigonometric R-matrix: Yang-Baxter, unitarity,
//! crossing symmetry (multiplicative and exponential forms), the f-product
//! identity, r-function identities, and the pole/normalizer lemmas with
//! their p-search.
//!
//! Multiplicative-form identities clear denominators and compare polynomial
//! matrices; exponential-form identities expand the normalizing scalars
//! along the variable order and compare on an explicit trusted window.

use crate::error::Result;
use crate::profile::{Ctx, TruncationProfile, VarId};
use crate::rat::Rat;
use crate::ratfun::RatFun;
use crate::series::{exp_ch, Series};
use crate::tensor::{dmatrix, flip, TensorOperator};

use super::{
    lift_h_series, op_first_defect, op_window_defect, CheckOutcome, NormKind, RMatrixContext,
};

fn ratfun_op_defect(
    a: &TensorOperator<RatFun>,
    b: &TensorOperator<RatFun>,
    window: &[(VarId, i64, i64)],
    h_need: usize,
) -> Result<Option<(String, Rat)>> {
    let d = a.sub(b)?;
    for (&(r, c), v) in d.entries() {
        // cross-multiplied numerator must vanish on the window
        if let Some((m, c0)) = v.num.first_defect(window, h_need)? {
            return Ok(Some((format!("entry ({r},{c}): {m}"), c0)));
        }
    }
    Ok(None)
}

fn perturb_op(op: &mut TensorOperator<Series>, ctx: &Ctx) {
    // deliberately corrupt one entry by +h (negative-control mode)
    let first = op.entries().next().map(|(&k, v)| (k, v.clone()));
    if let Some(((r, c), v)) = first {
        op.set(r, c, v.add(&Series::h(ctx)).unwrap());
    }
}

// ----------------------------------------------------------------------
// Yang-Baxter
// ----------------------------------------------------------------------

/// Multiplicative-form Yang-Baxter in the cleared two-parameter form
/// (denominator-free: both sides are polynomial matrices).
pub fn ybe_multiplicative(rm: &RMatrixContext, h_order: usize, perturb: bool) -> Result<CheckOutcome> {
    let n = rm.n;
    let ctx = TruncationProfile::builder(h_order)
        .taylor("x", 4)
        .taylor("y", 4)
        .build();
    let x = Series::var(&ctx, ctx.var("x")?);
    let y = Series::var(&ctx, ctx.var("y")?);
    let one = Series::one(&ctx);
    let dims = vec![n; 3];

    let r12 = rm.rbar_two_param(&ctx, &x, &y)?.embed(&dims, &[0, 1])?;
    let r13 = rm.rbar_two_param(&ctx, &x, &one)?.embed(&dims, &[0, 2])?;
    let r23 = rm.rbar_two_param(&ctx, &y, &one)?.embed(&dims, &[1, 2])?;
    let mut r23_lhs = r23.clone();
    if perturb {
        perturb_op(&mut r23_lhs, &ctx);
    }
    let lhs = r12.mul(&r13)?.mul(&r23_lhs)?;
    let rhs = r23.mul(&r13)?.mul(&r12)?;
    let defect = op_window_defect(&lhs.sub(&rhs)?, &ctx, h_order)?;
    Ok(CheckOutcome::from_defect("ybe multiplicative (cleared)", defect))
}

/// Exponential-form Yang-Baxter. The normalizing scalar
/// psi^3 g(e^u) g(e^{u+v}) g(e^v) is literally the same commuting factor on
/// both sides, so the full identity reduces to the polynomial part, which is
/// compared exactly.
pub fn ybe_exponential(rm: &RMatrixContext, h_order: usize, perturb: bool) -> Result<CheckOutcome> {
    let n = rm.n;
    let ctx = TruncationProfile::builder(h_order)
        .taylor("u", 5)
        .taylor("v", 5)
        .build();
    let u = ctx.var("u")?;
    let v = ctx.var("v")?;
    let e_u = Series::var(&ctx, u).exp()?;
    let e_v = Series::var(&ctx, v).exp()?;
    let e_uv = e_u.mul(&e_v)?;
    let dims = vec![n; 3];

    let r12 = rm.rplus_at(&ctx, &e_u)?.embed(&dims, &[0, 1])?;
    let r13 = rm.rplus_at(&ctx, &e_uv)?.embed(&dims, &[0, 2])?;
    let r23 = rm.rplus_at(&ctx, &e_v)?.embed(&dims, &[1, 2])?;
    let mut r23_lhs = r23.clone();
    if perturb {
        perturb_op(&mut r23_lhs, &ctx);
    }
    let lhs = r12.mul(&r13)?.mul(&r23_lhs)?;
    let rhs = r23.mul(&r13)?.mul(&r12)?;
    let defect = op_window_defect(&lhs.sub(&rhs)?, &ctx, h_order)?;
    Ok(CheckOutcome::from_defect("ybe exponential (matrix part)", defect))
}

// ----------------------------------------------------------------------
// Unitarity
// ----------------------------------------------------------------------

/// Multiplicative unitarity, cleared:
/// Rbar2(x,1)_{12} P Rbar2(1,x)_{12} P = (x e^{-h/2} - e^{h/2})(e^{-h/2} - x e^{h/2}) Id.
pub fn unitarity_multiplicative(rm: &RMatrixContext, h_order: usize) -> Result<CheckOutcome> {
    let n = rm.n;
    let ctx = TruncationProfile::builder(h_order).taylor("x", 4).build();
    let x = Series::var(&ctx, ctx.var("x")?);
    let one = Series::one(&ctx);
    let a = rm.rbar_two_param(&ctx, &x, &one)?;
    let b = rm.rbar_two_param(&ctx, &one, &x)?;
    let p = flip(&ctx, n);
    let b21 = p.mul(&b)?.mul(&p)?;
    let lhs = a.mul(&b21)?;
    let ep = exp_ch(&ctx, &Rat::new(1, 2));
    let em = exp_ch(&ctx, &Rat::new(-1, 2));
    let scalar = x.mul(&em)?.sub(&ep)?.mul(&em.sub(&x.mul(&ep)?)?)?;
    let rhs = TensorOperator::identity(&[n, n], &Series::one(&ctx)).map(|s| s.mul(&scalar))?;
    let defect = op_window_defect(&lhs.sub(&rhs)?, &ctx, h_order)?;
    Ok(CheckOutcome::from_defect("unitarity multiplicative (cleared)", defect))
}

/// Exponential unitarity with the full normalization:
/// psi^2 g(e^u) g(e^{-u}) R+(e^u) P R+(e^{-u}) P = Id on a Laurent window.
pub fn unitarity_exponential(rm: &RMatrixContext, h_order: usize) -> Result<CheckOutcome> {
    let n = rm.n;
    let k = h_order as i64;
    let ctx = TruncationProfile::builder(h_order)
        .laurent("u", -(2 * k + 4), 3 * k + 6)
        .build();
    let u = ctx.var("u")?;
    let e_u = Series::var(&ctx, u).exp()?;
    let e_mu = Series::var(&ctx, u).neg().exp()?;
    let lhs_mat = rm.r_exp_at(&ctx, &e_u, &[u])?;
    let rhs_mat = rm.r_exp_inv_at(&ctx, &e_mu, &[u])?;
    // r_exp_inv_at(e^{-L}) with L = -u gives R(e^{-u})^{-1}; here we want the
    // direct product R(e^u) R_{21}(e^{-u}), i.e. P R(e^{-u}) P
    let p = flip(&ctx, n);
    let r_m = rm.r_exp_at(&ctx, &e_mu, &[u])?;
    let r21 = p.mul(&r_m)?.mul(&p)?;
    let _ = rhs_mat;
    let prod = lhs_mat.mul(&r21)?;
    let id = TensorOperator::identity(&[n, n], &Series::one(&ctx));
    let defect = op_first_defect(&prod.sub(&id)?, &[(u, -k, k)], h_order)?;
    Ok(CheckOutcome::from_defect("unitarity exponential", defect))
}

// ----------------------------------------------------------------------
// Crossing symmetry
// ----------------------------------------------------------------------

/// Both multiplicative crossing relations, with f(x e^{Nh})/f(x) replaced by
/// the rational factor it equals (the replacement itself is checked first
/// against the stored f-series).
pub fn crossing_multiplicative(rm: &RMatrixContext, h_order: usize) -> Result<Vec<CheckOutcome>> {
    let n = rm.n;
    let nn = n as i64;
    let ctx = TruncationProfile::builder(h_order)
        .laurent("x", -8, 8)
        .build();
    let xv = ctx.var("x")?;
    let x = Series::var(&ctx, xv);
    let x_inv = Series::monomial(&ctx, &[(xv, -1)], 0, Rat::one())?;
    let one = Series::one(&ctx);
    let mut out = Vec::new();

    // ratio check: f(x e^{Nh}) (1-x)(1-x e^{Nh}) = f(x) (1-x e^h)(1-x e^{(N-1)h})
    let f = rm.eval_norm(NormKind::F, &x, None, &[xv])?;
    let f_sh = rm.eval_norm(NormKind::F, &x.mul(&exp_ch(&ctx, &Rat::from_int(nn)))?, None, &[xv])?;
    let lhs = f_sh
        .mul(&one.sub(&x)?)?
        .mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::from_int(nn)))?)?)?;
    let rhs = f
        .mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::one()))?)?)?
        .mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::from_int(nn - 1)))?)?)?;
    let d = lhs.sub(&rhs)?.first_defect(&[(xv, 0, 4)], h_order)?;
    out.push(CheckOutcome::from_defect("f shift ratio (functional equation)", d));

    // unitarity of the bare matrix, needed to express the inverse
    let rb_x = rm.rbar_ratfun_at(&ctx, &x)?;
    let rb_xi = rm.rbar_ratfun_at(&ctx, &x_inv)?;
    let p = flip(&ctx, n);
    let p_rf = p.map(|s| Ok(RatFun::from_series(s.clone())))?;
    let swapped = p_rf.mul(&rb_xi)?.mul(&p_rf)?;
    let prod = rb_x.mul(&swapped)?;
    let id_rf = TensorOperator::identity(&[n, n], &RatFun::one(&ctx));
    out.push(CheckOutcome::from_defect(
        "bare unitarity (inverse witness)",
        ratfun_op_defect(&prod, &id_rf, &[(xv, -5, 5)], h_order)?,
    ));

    // ratio Phi(x) = (1-x e^h)(1-x e^{(N-1)h}) / ((1-x)(1-x e^{Nh}))
    let phi = RatFun::new(
        one.sub(&x.mul(&exp_ch(&ctx, &Rat::one()))?)?
            .mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::from_int(nn - 1)))?)?)?,
        one.sub(&x)?
            .mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::from_int(nn)))?)?)?,
    );

    let x_sh = x.mul(&exp_ch(&ctx, &Rat::from_int(nn)))?;
    let rb_sh = rm.rbar_ratfun_at(&ctx, &x_sh)?;
    let rb_inv = p_rf.mul(&rb_xi)?.mul(&p_rf)?; // Rbar(x)^{-1} = Rbar_21(1/x)
    let d1 = dmatrix(&ctx, n)
        .embed(&[n, n], &[0])?
        .map(|s| Ok(RatFun::from_series(s.clone())))?;
    let d2 = dmatrix(&ctx, n)
        .embed(&[n, n], &[1])?
        .map(|s| Ok(RatFun::from_series(s.clone())))?;

    // first form: Phi(x) Rbar(x e^{Nh})^{t1} D1 (Rbar(x)^{-1})^{t1} = D1
    let lhs1 = rb_sh
        .partial_transpose(0)?
        .mul(&d1)?
        .mul(&rb_inv.partial_transpose(0)?)?
        .map(|e| e.mul(&phi))?;
    out.push(CheckOutcome::from_defect(
        "crossing multiplicative, transpose on leg 1",
        ratfun_op_defect(&lhs1, &d1, &[(xv, -5, 5)], h_order)?,
    ));

    // second form: Phi(x) (Rbar(x)^{-1})^{t2} D2 Rbar(x e^{Nh})^{t2} = D2
    let lhs2 = rb_inv
        .partial_transpose(1)?
        .mul(&d2)?
        .mul(&rb_sh.partial_transpose(1)?)?
        .map(|e| e.mul(&phi))?;
    out.push(CheckOutcome::from_defect(
        "crossing multiplicative, transpose on leg 2",
        ratfun_op_defect(&lhs2, &d2, &[(xv, -5, 5)], h_order)?,
    ));
    Ok(out)
}

/// Both exponential crossing relations on a Laurent window, plus the ordered
/// left/right contraction forms.
pub fn crossing_exponential(rm: &RMatrixContext, h_order: usize) -> Result<Vec<CheckOutcome>> {
    let n = rm.n;
    let k = h_order as i64;
    let nn = n as i64;
    let ctx = TruncationProfile::builder(h_order)
        .laurent("u", -(2 * k + 6), 4 * k + 10)
        .build();
    let u = ctx.var("u")?;
    let ord = [u];
    let win: &[(VarId, i64, i64)] = &[(u, -k, k)];
    let e_u = Series::var(&ctx, u).exp()?;
    let e_mu = Series::var(&ctx, u).neg().exp()?;
    let e_u_nh = e_u.mul(&exp_ch(&ctx, &Rat::from_int(nn)))?;
    let mut out = Vec::new();

    let r_sh = rm.r_exp_at(&ctx, &e_u_nh, &ord)?;
    // R(e^u)^{-1} = R_21(e^{-u}) by unitarity (verified in this module)
    let p = flip(&ctx, n);
    let r_inv = p.mul(&rm.r_exp_at(&ctx, &e_mu, &ord)?)?.mul(&p)?;
    let d1 = dmatrix(&ctx, n).embed(&[n, n], &[0])?;
    let d2 = dmatrix(&ctx, n).embed(&[n, n], &[1])?;

    let lhs1 = r_sh
        .partial_transpose(0)?
        .mul(&d1)?
        .mul(&r_inv.partial_transpose(0)?)?;
    out.push(CheckOutcome::from_defect(
        "crossing exponential, transpose on leg 1",
        op_first_defect(&lhs1.sub(&d1)?, win, h_order)?,
    ));

    let lhs2 = r_inv
        .partial_transpose(1)?
        .mul(&d2)?
        .mul(&r_sh.partial_transpose(1)?)?;
    out.push(CheckOutcome::from_defect(
        "crossing exponential, transpose on leg 2",
        op_first_defect(&lhs2.sub(&d2)?, win, h_order)?,
    ));

    // ordered contraction forms:
    // (D1 R(e^{u+hN}) D1^{-1}) <RL> R(e^u)^{-1} = 1
    let d = dmatrix(&ctx, n);
    let d_inv = {
        let mut m = TensorOperator::zero(&[n]);
        for i in 0..n as u32 {
            m.set(i, i, d.get(i, i).unwrap().invert_iota(&[])?);
        }
        m
    };
    let d1_inv = d_inv.embed(&[n, n], &[0])?;
    let conj = d1.mul(&r_sh)?.mul(&d1_inv)?;
    let contracted = conj.apply_rl(&r_inv, 1)?;
    let id = TensorOperator::identity(&[n, n], &Series::one(&ctx));
    out.push(CheckOutcome::from_defect(
        "ordered RL crossing contraction",
        op_first_defect(&contracted.sub(&id)?, win, h_order)?,
    ));

    // (D2 R(e^u)^{-1} D2^{-1}) <LR> R(e^{u+hN}) = 1
    let d2_inv = d_inv.embed(&[n, n], &[1])?;
    let conj2 = d2.mul(&r_inv)?.mul(&d2_inv)?;
    let contracted2 = conj2.apply_lr(&r_sh, 1)?;
    out.push(CheckOutcome::from_defect(
        "ordered LR crossing contraction",
        op_first_defect(&contracted2.sub(&id)?, win, h_order)?,
    ));
    Ok(out)
}

/// The shifted grid contraction
/// (D2 R(e^{z+u-v-h(N+c)})^{-1} D2^{-1}) <LR> R(e^{z+u-v-hc}) = 1 at n=m=1.
pub fn crossing_grid_contraction(
    rm: &RMatrixContext,
    h_order: usize,
    c_level: &Rat,
) -> Result<CheckOutcome> {
    let n = rm.n;
    let k = h_order as i64;
    let ctx = TruncationProfile::builder(h_order)
        .laurent("z", -(2 * k + 6), 4 * k + 10)
        .taylor("u", 2)
        .taylor("v", 2)
        .build();
    let z = ctx.var("z")?;
    let u = ctx.var("u")?;
    let v = ctx.var("v")?;
    let ord = [z];
    let base = Series::var(&ctx, z)
        .add(&Series::var(&ctx, u))?
        .sub(&Series::var(&ctx, v))?;
    let minus_nc = -&(&Rat::from_int(rm.n as i64) + c_level);
    let arg_a = base.add(&Series::h(&ctx).scale(&minus_nc))?; // z+u-v-h(N+c)
    let arg_b = base.add(&Series::h(&ctx).scale(&-c_level))?; // z+u-v-hc
    let e_a_m = arg_a.neg().exp()?;
    let e_b = arg_b.exp()?;
    let p = flip(&ctx, n);
    let r_a_inv = p.mul(&rm.r_exp_at(&ctx, &e_a_m, &ord)?)?.mul(&p)?;
    let r_b = rm.r_exp_at(&ctx, &e_b, &ord)?;
    let d = dmatrix(&ctx, n);
    let d2 = d.embed(&[n, n], &[1])?;
    let mut d_inv = TensorOperator::zero(&[n]);
    for i in 0..n as u32 {
        d_inv.set(i, i, d.get(i, i).unwrap().invert_iota(&[])?);
    }
    let d2_inv = d_inv.embed(&[n, n], &[1])?;
    let conj = d2.mul(&r_a_inv)?.mul(&d2_inv)?;
    let contracted = conj.apply_lr(&r_b, 1)?;
    let id = TensorOperator::identity(&[n, n], &Series::one(&ctx));
    let defect = op_first_defect(
        &contracted.sub(&id)?,
        &[(z, -k, k), (u, 0, 1), (v, 0, 1)],
        h_order,
    )?;
    Ok(CheckOutcome::from_defect(
        "shifted LR crossing contraction",
        defect,
    ))
}

// ----------------------------------------------------------------------
// f-product and r identities
// ----------------------------------------------------------------------

/// f(x) f(x e^h) ... f(x e^{(N-1)h}) (1 - x e^{(N-1)h}) = (1 - x), exactly.
pub fn f_product_identity(rm: &RMatrixContext, h_order: usize) -> Result<CheckOutcome> {
    let ctx = TruncationProfile::builder(h_order).taylor("x", 6).build();
    let xv = ctx.var("x")?;
    let x = Series::var(&ctx, xv);
    let one = Series::one(&ctx);
    let mut prod = Series::one(&ctx);
    for j in 0..rm.n {
        let arg = x.mul(&exp_ch(&ctx, &Rat::from_int(j as i64)))?;
        prod = prod.mul(&rm.eval_norm(NormKind::F, &arg, None, &[xv])?)?;
    }
    let lhs = prod.mul(&one.sub(&x.mul(&exp_ch(&ctx, &Rat::from_int(rm.n as i64 - 1)))?)?)?;
    let defect = lhs.sub(&one.sub(&x)?)?.first_defect(&[(xv, 0, 5)], h_order)?;
    Ok(CheckOutcome::from_defect("f product telescope", defect))
}

/// r_0 = -e^h; R_21(x)^{-1} = r(x) R+_12(1/x); r(e^{-u}) = psi^2 g(e^u).
pub fn r_identities(rm: &RMatrixContext, h_order: usize) -> Result<Vec<CheckOutcome>> {
    let n = rm.n;
    let mut out = Vec::new();
    let hctx = &rm.hctx;

    // r_0 = -e^h
    let d = rm.r_t[0].add(&exp_ch(hctx, &Rat::one()))?;
    out.push(CheckOutcome::from_defect(
        "leading r-coefficient",
        d.first_defect(&[], h_order)?,
    ));

    // R_21(x)^{-1} = r(x) R+_12(1/x), i.e.
    // f(x)^{-1} Rbar_12(1/x) = r(x) R+_12(1/x), via bare unitarity
    let ctx = TruncationProfile::builder(h_order)
        .laurent("x", -8, 8)
        .build();
    let xv = ctx.var("x")?;
    let x = Series::var(&ctx, xv);
    let x_inv = Series::monomial(&ctx, &[(xv, -1)], 0, Rat::one())?;
    // as rational functions in x: cross-compare
    // LHS entries: f^{-1}(x) * R+(1/x) / (1 - e^{-h}/x)
    let f_inv = rm.norm_ratfun(&ctx, xv, NormKind::FInv)?;
    let r_rf = rm.norm_ratfun(&ctx, xv, NormKind::RFun)?;
    let rp_at_inv = rm.rplus_at(&ctx, &x_inv)?;
    let den = Series::one(&ctx).sub(&x_inv.mul(&exp_ch(&ctx, &Rat::from_int(-1)))?)?;
    let lhs = rp_at_inv.map(|s| {
        Ok(RatFun::new(s.mul(&f_inv.num)?, den.mul(&f_inv.den)?))
    })?;
    let rhs = rp_at_inv.map(|s| Ok(RatFun::new(s.mul(&r_rf.num)?, r_rf.den.clone())))?;
    out.push(CheckOutcome::from_defect(
        "multiplicative inverse via r and R+(1/x)",
        ratfun_op_defect(&lhs, &rhs, &[(xv, -5, 5)], h_order)?,
    ));
    let _ = (n, x);

    // r(e^{-u}) = psi^2 g(e^u)
    let k = h_order as i64;
    let uctx = TruncationProfile::builder(h_order)
        .laurent("u", -(2 * k + 4), 3 * k + 6)
        .build();
    let u = uctx.var("u")?;
    let e_u = Series::var(&uctx, u).exp()?;
    let e_mu = Series::var(&uctx, u).neg().exp()?;
    let lhs = rm.eval_norm(NormKind::RFun, &e_mu, None, &[u])?;
    let psi2 = rm.psi_in(&uctx)?.pow(2)?;
    let rhs = rm.eval_norm(NormKind::G, &e_u, None, &[u])?.mul(&psi2)?;
    out.push(CheckOutcome::from_defect(
        "r at inverted exponential argument vs psi^2 g",
        lhs.sub(&rhs)?.first_defect(&[(u, -k, k)], h_order)?,
    ));
    Ok(out)
}

// ----------------------------------------------------------------------
// Pole / normalizer lemmas with p-search
// ----------------------------------------------------------------------

/// Parameters of a pole-lemma window: retain u1^{<a1} u2^{<a2} h^{<k}.
#[derive(Clone, Copy, Debug)]
pub struct PoleWindow {
    pub a1: i64,
    pub a2: i64,
    pub k: usize,
}

pub struct PoleLemmaReport {
    pub outcome: CheckOutcome,
    pub p_found: Option<usize>,
}

struct PoleCtx {
    ctx: Ctx,
    z1: VarId,
    z2: VarId,
    z0: VarId,
    u1: VarId,
    u2: VarId,
    guard: i64,
}

fn pole_ctx(h_order: usize, w: &PoleWindow, p_max: usize) -> Result<PoleCtx> {
    let k = w.k as i64;
    let p = p_max as i64;
    let z1_cap = p + k + w.a1 + w.a2 + 8;
    let guard = k + 2;
    let ctx = TruncationProfile::builder(h_order)
        .laurent("z1", -4, z1_cap + guard)
        .laurent("z2", -(z1_cap + guard + k + 6), p + 4)
        .laurent("z0", -(p + k + 6), p + k + 4)
        .taylor("u1", w.a1)
        .taylor("u2", w.a2)
        .build();
    Ok(PoleCtx {
        z1: ctx.var("z1")?,
        z2: ctx.var("z2")?,
        z0: ctx.var("z0")?,
        u1: ctx.var("u1")?,
        u2: ctx.var("u2")?,
        guard,
        ctx,
    })
}

/// Evaluate F(z1 e^{u1-u2+alpha h} / z2) in the pole context.
fn eval_ratio_arg(
    rm: &RMatrixContext,
    pc: &PoleCtx,
    kind: NormKind,
    alpha: &Rat,
    flip_ratio: bool,
) -> Result<Series> {
    let ctx = &pc.ctx;
    let exp_w = Series::var(ctx, pc.u1)
        .sub(&Series::var(ctx, pc.u2))?
        .add(&Series::h(ctx).scale(alpha))?
        .exp()?;
    let exp_w_inv = Series::var(ctx, pc.u2)
        .sub(&Series::var(ctx, pc.u1))?
        .sub(&Series::h(ctx).scale(alpha))?
        .exp()?;
    let (num, den) = if flip_ratio {
        (pc.z2, pc.z1)
    } else {
        (pc.z1, pc.z2)
    };
    let w = Series::monomial(ctx, &[(num, 1), (den, -1)], 0, Rat::one())?.mul(&exp_w)?;
    let w_inv = Series::monomial(ctx, &[(num, -1), (den, 1)], 0, Rat::one())?.mul(&exp_w_inv)?;
    // expansions in powers of z1/z2 (z2 outermost)
    rm.eval_norm(kind, &w, Some(&w_inv), &[pc.z2, pc.z1])
}

/// Evaluate F(e^{z0 + u1 - u2 + alpha h}) in the pole context.
fn eval_exp_arg(
    rm: &RMatrixContext,
    pc: &PoleCtx,
    kind: NormKind,
    alpha: &Rat,
    negate: bool,
) -> Result<Series> {
    let ctx = &pc.ctx;
    let mut l = Series::var(ctx, pc.z0)
        .add(&Series::var(ctx, pc.u1))?
        .sub(&Series::var(ctx, pc.u2))?
        .add(&Series::h(ctx).scale(alpha))?;
    if negate {
        l = l.neg();
    }
    let e_l = l.exp()?;
    let e_l_inv = l.neg().exp()?;
    rm.eval_norm(kind, &e_l, Some(&e_l_inv), &[pc.z0])
}

/// Pole lemma p-search for F in {g, 1/g, r, 1/r}: find the least p <= p_max
/// such that (z1-z2)^p F(z1 e^{u1-u2+alpha h}/z2) has polynomial window
/// coefficients (guard-band criterion) and its z1 -> z2 e^{z0} substitute
/// matches z2^p (e^{z0}-1)^p F(e^{z0+u1-u2+alpha h}).
pub fn pole_lemma_search(
    rm: &RMatrixContext,
    kind: NormKind,
    alpha: &Rat,
    w: &PoleWindow,
    p_max: usize,
) -> Result<PoleLemmaReport> {
    let pc = pole_ctx(rm.h_order.min(w.k + 1).max(w.k), w, p_max)?;
    let ctx = &pc.ctx;
    let fval = eval_ratio_arg(rm, &pc, kind, alpha, false)?;
    let rhs_f = eval_exp_arg(rm, &pc, kind, alpha, false)?;
    let diff_pow = |p: usize| -> Result<Series> {
        Series::var(ctx, pc.z1).sub(&Series::var(ctx, pc.z2))?.pow(p)
    };
    let z1_cap = ctx.vars[pc.z1].max_deg;
    let name = format!("pole lemma for {:?}, alpha {}", kind, alpha);
    for p in 0..=p_max {
        let a_p = diff_pow(p)?.mul(&fval)?;
        // criterion (a): window coefficients are Laurent polynomials in
        // z1, z2: nonnegative z1-degrees and an empty guard band at the top
        let mut poly_ok = true;
        for (m, _) in a_p.terms() {
            let in_window = (m.0[pc.u1] as i64) < w.a1
                && (m.0[pc.u2] as i64) < w.a2
                && m.h_exp() < w.k;
            if !in_window {
                continue;
            }
            let z1_deg = m.0[pc.z1] as i64;
            if z1_deg < 0 || z1_deg > z1_cap - pc.guard {
                poly_ok = false;
                break;
            }
        }
        if !poly_ok {
            continue;
        }
        // criterion (b): substitution match
        let subbed = match a_p.phi_substitute(pc.z1, pc.z2, pc.z0) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let z2s = Series::var(ctx, pc.z2);
        let e0m1 = Series::var(ctx, pc.z0).exp()?.sub(&Series::one(ctx))?;
        let rhs = z2s.pow(p)?.mul(&e0m1.pow(p)?)?.mul(&rhs_f)?;
        let window = [
            (pc.u1, 0, w.a1 - 1),
            (pc.u2, 0, w.a2 - 1),
            (pc.z2, -(w.k as i64 + 2), p as i64 + 2),
            (pc.z0, -(w.k as i64 + 1), w.k as i64 + 2),
        ];
        match subbed.sub(&rhs)?.first_defect(&window, w.k) {
            Ok(None) => {
                return Ok(PoleLemmaReport {
                    outcome: CheckOutcome::passing(&format!("{name}: matched at p = {p}")),
                    p_found: Some(p),
                })
            }
            Ok(Some(_)) => continue,
            Err(_) => continue,
        }
    }
    Ok(PoleLemmaReport {
        outcome: CheckOutcome::failing(&name, format!("no p <= {p_max} worked")),
        p_found: None,
    })
}

/// Two-evaluation agreement behind the inversion identity:
/// (z1-z2)^p r(z2 e^{-u1+u2-alpha h}/z1) = (z1-z2)^p psi^2 g(z1 e^{u1-u2+alpha h}/z2)
/// on the window, for some p <= p_max.
pub fn inverted_argument_agreement(
    rm: &RMatrixContext,
    alpha: &Rat,
    w: &PoleWindow,
    p_max: usize,
) -> Result<PoleLemmaReport> {
    let pc = pole_ctx(w.k.max(1), w, p_max)?;
    let ctx = &pc.ctx;
    let minus_alpha = -alpha;
    let r_val = eval_ratio_arg(rm, &pc, NormKind::RFun, &minus_alpha, true)?;
    let psi2 = rm.psi_in(ctx)?.pow(2)?;
    let g_val = eval_ratio_arg(rm, &pc, NormKind::G, alpha, false)?.mul(&psi2)?;
    let name = "r at swapped ratio vs psi^2 g";
    for p in 0..=p_max {
        let dp = Series::var(ctx, pc.z1).sub(&Series::var(ctx, pc.z2))?.pow(p)?;
        let lhs = dp.mul(&r_val)?;
        let rhs = dp.mul(&g_val)?;
        let window = [
            (pc.u1, 0, w.a1 - 1),
            (pc.u2, 0, w.a2 - 1),
            (pc.z1, -(w.k as i64), w.k as i64 + p as i64),
            (pc.z2, -(w.k as i64 + p as i64 + 2), p as i64 + 2),
        ];
        match lhs.sub(&rhs)?.first_defect(&window, w.k) {
            Ok(None) => {
                return Ok(PoleLemmaReport {
                    outcome: CheckOutcome::passing(&format!("{name}: matched at p = {p}")),
                    p_found: Some(p),
                })
            }
            _ => continue,
        }
    }
    Ok(PoleLemmaReport {
        outcome: CheckOutcome::failing(name, format!("no p <= {p_max} worked")),
        p_found: None,
    })
}

/// The aggregate normalizer agreement at n = m = 1: with
/// G-hat(x) = g(x e^{u-v-h(N+c)})^{-1} g(x e^{u-v+hc})^{-1} g(x e^{u-v})^2 and
/// H-hat(x) = g(x e^{u-v-h(N+c)})^{-1} r(x^{-1} e^{-u+v-hc})^{-1}
///            g(x e^{u-v}) r(x^{-1} e^{-u+v}),
/// the windowed coefficients of (z1-z2)^p G-hat(z1/z2) and
/// (z1-z2)^p H-hat(z2/z1) coincide for some p.
pub fn aggregate_normalizer_agreement(
    rm: &RMatrixContext,
    c_level: &Rat,
    w: &PoleWindow,
    p_max: usize,
) -> Result<PoleLemmaReport> {
    let pc = pole_ctx(w.k.max(1), w, p_max)?;
    let ctx = &pc.ctx;
    let n_plus_c = &Rat::from_int(rm.n as i64) + c_level;

    // G-hat evaluated at x = z1/z2
    let g1 = eval_ratio_arg(rm, &pc, NormKind::GInv, &-&n_plus_c, false)?;
    let g2 = eval_ratio_arg(rm, &pc, NormKind::GInv, c_level, false)?;
    let g3 = eval_ratio_arg(rm, &pc, NormKind::G, &Rat::zero(), false)?;
    let ghat = g1.mul(&g2)?.mul(&g3.pow(2)?)?;

    // H-hat evaluated at x = z2/z1: g-arguments use x^{-1} = z1/z2,
    // r-arguments use x e^{-u1+u2+...} = (z2/z1) e^{-u1+u2+...}
    let h1 = eval_ratio_arg(rm, &pc, NormKind::GInv, &-&n_plus_c, false)?;
    let h2 = eval_ratio_arg(rm, &pc, NormKind::RFunInv, &-c_level, true)?;
    let h3 = eval_ratio_arg(rm, &pc, NormKind::G, &Rat::zero(), false)?;
    let h4 = eval_ratio_arg(rm, &pc, NormKind::RFun, &Rat::zero(), true)?;
    let hhat = h1.mul(&h2)?.mul(&h3)?.mul(&h4)?;

    let name = "aggregate normalizer agreement";
    for p in 0..=p_max {
        let dp = Series::var(ctx, pc.z1).sub(&Series::var(ctx, pc.z2))?.pow(p)?;
        let lhs = dp.mul(&ghat)?;
        let rhs = dp.mul(&hhat)?;
        let window = [
            (pc.u1, 0, w.a1 - 1),
            (pc.u2, 0, w.a2 - 1),
            (pc.z1, -(w.k as i64), w.k as i64 + p as i64),
            (pc.z2, -(w.k as i64 + p as i64 + 2), p as i64 + 2),
        ];
        match lhs.sub(&rhs)?.first_defect(&window, w.k) {
            Ok(None) => {
                return Ok(PoleLemmaReport {
                    outcome: CheckOutcome::passing(&format!("{name}: matched at p = {p}")),
                    p_found: Some(p),
                })
            }
            _ => continue,
        }
    }
    Ok(PoleLemmaReport {
        outcome: CheckOutcome::failing(name, format!("no p <= {p_max} worked")),
        p_found: None,
    })
}

impl RMatrixContext {
    /// A normalizing series as an explicit rational function of x with the
    /// denominator (1-x)^L cleared.
    pub fn norm_ratfun(&self, ctx: &Ctx, x: VarId, kind: NormKind) -> Result<RatFun> {
        let xs = Series::var(ctx, x);
        let one_minus_x = Series::one(ctx).sub(&xs)?;
        let (coeffs, x_shift, extra_den) = match kind {
            NormKind::F => (&self.f_t, 0i64, 0usize),
            NormKind::FInv => (&self.f_inv_t, 0, 0),
            NormKind::G => (&self.g_t, 0, 1),
            NormKind::RFun => (&self.r_t, 1, 1),
            _ => {
                return Err(crate::error::Error::Invalid(
                    "no cleared rational form stored for this kind".into(),
                ))
            }
        };
        let l = coeffs.len() - 1;
        let mut num = Series::zero(ctx);
        for (k, c) in coeffs.iter().enumerate() {
            let lifted = lift_h_series(c, ctx)?;
            let term = xs
                .pow(k + x_shift as usize)?
                .mul(&one_minus_x.pow(l - k)?)?
                .mul(&lifted)?;
            num = num.add(&term)?;
        }
        let den = one_minus_x.pow(l + extra_den)?;
        Ok(RatFun::new(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ybe_and_unitarity_small() {
        let rm = RMatrixContext::new(2, 3).unwrap();
        assert!(ybe_multiplicative(&rm, 3, false).unwrap().pass);
        assert!(ybe_exponential(&rm, 3, false).unwrap().pass);
        assert!(unitarity_multiplicative(&rm, 3).unwrap().pass);
        assert!(unitarity_exponential(&rm, 3).unwrap().pass);
        // negative control
        assert!(!ybe_multiplicative(&rm, 3, true).unwrap().pass);
        assert!(!ybe_exponential(&rm, 3, true).unwrap().pass);
    }

    #[test]
    fn crossing_small() {
        let rm = RMatrixContext::new(2, 3).unwrap();
        for c in crossing_multiplicative(&rm, 3).unwrap() {
            assert!(c.pass, "{}: {:?}", c.name, c.defect);
        }
        for c in crossing_exponential(&rm, 3).unwrap() {
            assert!(c.pass, "{}: {:?}", c.name, c.defect);
        }
        let g = crossing_grid_contraction(&rm, 3, &Rat::one()).unwrap();
        assert!(g.pass, "{:?}", g.defect);
    }

    #[test]
    fn f_product_and_r_identities_small() {
        for n in [2usize, 3] {
            let rm = RMatrixContext::new(n, 3).unwrap();
            let c = f_product_identity(&rm, 3).unwrap();
            assert!(c.pass, "N={n}: {:?}", c.defect);
            for c in r_identities(&rm, 3).unwrap() {
                assert!(c.pass, "N={n} {}: {:?}", c.name, c.defect);
            }
        }
    }

    #[test]
    fn pole_lemma_small_window() {
        let rm = RMatrixContext::new(2, 3).unwrap();
        let w = PoleWindow { a1: 1, a2: 1, k: 1 };
        let rep = pole_lemma_search(&rm, NormKind::G, &Rat::zero(), &w, 6).unwrap();
        assert!(rep.outcome.pass, "{:?}", rep.outcome.defect);
        assert!(rep.p_found.is_some());
    }
}
