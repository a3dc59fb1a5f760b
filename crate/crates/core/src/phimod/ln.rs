//! Ordered quantum-current products on finite modules and the commutation
//! relation checks (single and generalized).
//!
//! Products are computed in block-ratio coordinates: an ordered variable
//! block (x_1, ..., x_n) is represented by its leading variable and the
//! Taylor ratios t_i = x_i / x_{i-1}. All conjugating factors are series in
//! the ratios alone, so trusted windows survive products; the two sides of a
//! commutation relation live in different coordinates and are compared
//! coefficient by coefficient through the coordinate change.

use crate::error::{Error, Result};
use crate::profile::{Ctx, VarId};
use crate::rat::Rat;
use crate::rmatrix::{CheckOutcome, NormKind, RMatrixContext};
use crate::series::{exp_ch, Series};
use crate::tensor::TensorOperator;

use super::spec::RestrictedModuleSpec;

/// Coordinates of an ordered variable block: x_i = lead * t_2 ... t_i.
#[derive(Clone, Debug)]
pub struct BlockCoords {
    pub lead: VarId,
    pub ratios: Vec<VarId>,
}

impl BlockCoords {
    pub fn len(&self) -> usize {
        self.ratios.len() + 1
    }

    /// x_i as a monomial in the coordinates (0-based i).
    pub fn x_image(&self, ctx: &Ctx, i: usize) -> Result<Series> {
        let mut exps = vec![(self.lead, 1)];
        for t in &self.ratios[..i] {
            exps.push((*t, 1));
        }
        Series::monomial(ctx, &exps, 0, Rat::one())
    }

    /// the ratio x_j / x_i (j > i) and its inverse, as coordinate monomials.
    pub fn ratio_pair(&self, ctx: &Ctx, j: usize, i: usize) -> Result<(Series, Series)> {
        assert!(j > i);
        let fwd: Vec<(VarId, i64)> = self.ratios[i..j].iter().map(|&t| (t, 1)).collect();
        let bwd: Vec<(VarId, i64)> = self.ratios[i..j].iter().map(|&t| (t, -1)).collect();
        Ok((
            Series::monomial(ctx, &fwd, 0, Rat::one())?,
            Series::monomial(ctx, &bwd, 0, Rat::one())?,
        ))
    }
}

/// The multiplicatively normalized R at a unit-monomial argument, embedded
/// at the given legs: R(w) = f(w) R+(w)/(1 - e^{-h} w).
pub fn r_mult_ratio(
    rm: &RMatrixContext,
    ctx: &Ctx,
    dims: &[usize],
    legs: [usize; 2],
    w: &Series,
) -> Result<TensorOperator<Series>> {
    let f = rm.eval_norm(NormKind::F, w, None, &[])?;
    let emh = exp_ch(ctx, &Rat::from_int(-1));
    let inv = Series::one(ctx).sub(&w.mul(&emh)?)?.invert_iota(&[])?;
    let scalar = f.mul(&inv)?;
    rm.rplus_at(ctx, w)?.map(|s| s.mul(&scalar))?.embed(dims, &legs)
}

/// Inverse through the r-function: R_{12}(w)^{-1} = r(w) R+_{21}(1/w).
pub fn r_mult_ratio_inv(
    rm: &RMatrixContext,
    ctx: &Ctx,
    dims: &[usize],
    legs: [usize; 2],
    w: &Series,
    w_inv: &Series,
) -> Result<TensorOperator<Series>> {
    let r = rm.eval_norm(NormKind::RFun, w, None, &[])?;
    let rp = rm.rplus_at(ctx, w_inv)?;
    let p = crate::tensor::flip(ctx, rm.n);
    let swapped = p.mul(&rp)?.mul(&p)?;
    swapped.map(|s| s.mul(&r))?.embed(dims, &legs)
}

fn shift(w: &Series, c: &Rat) -> Result<(Series, Series)> {
    let ctx = w.ctx();
    Ok((w.mul(&exp_ch(ctx, c))?, unit_monomial_inverse(w)?.mul(&exp_ch(ctx, &-c))?))
}

fn unit_monomial_inverse(w: &Series) -> Result<Series> {
    let ctx = w.ctx();
    let (m, c) = w
        .terms()
        .next()
        .ok_or_else(|| Error::NotInvertible("zero monomial".into()))?;
    if w.num_terms() != 1 {
        return Err(Error::NotInvertible("argument is not a monomial".into()));
    }
    let exps: Vec<(VarId, i64)> = (0..ctx.nvars())
        .filter(|&v| m.0[v] != 0)
        .map(|v| (v, -(m.0[v] as i64)))
        .collect();
    Series::monomial(ctx, &exps, m.h_exp(), c.recip()?)
}

/// The ordered current product on the block, in block-ratio coordinates.
pub fn current_product(
    spec: &RestrictedModuleSpec,
    rm: &RMatrixContext,
    ctx: &Ctx,
    coords: &BlockCoords,
) -> Result<TensorOperator<Series>> {
    let n = coords.len();
    let mut dims = vec![spec.n; n];
    dims.push(spec.rank);
    let module_leg = n;
    let minus_c = -&spec.level;
    let mut out = TensorOperator::identity(&dims, &Series::one(ctx));
    for i in 0..n {
        let li = spec.action_at(&dims, i, module_leg, &coords.x_image(ctx, i)?)?;
        out = out.mul(&li)?;
        for j in i + 1..n {
            let (base, _) = coords.ratio_pair(ctx, j, i)?;
            let (w, _) = shift(&base, &minus_c)?;
            out = out.mul(&r_mult_ratio(rm, ctx, &dims, [j, i], &w)?)?;
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        for j in (i + 1..n).rev() {
            let (w, w_inv) = coords.ratio_pair(ctx, j, i)?;
            out = out.mul(&r_mult_ratio_inv(rm, ctx, &dims, [j, i], &w, &w_inv)?)?;
        }
    }
    Ok(out)
}

/// Extract the coefficient of a full multidegree a: the coordinate monomial
/// lead^{sum a} t_2^{a_2+..+a_n} ... t_n^{a_n}.
pub fn block_coefficient(
    op_entry: &Series,
    coords: &BlockCoords,
    degs: &[i64],
) -> Result<Series> {
    let total: i64 = degs.iter().sum();
    let mut out = op_entry.var_coeff(coords.lead, total)?;
    for (idx, &t) in coords.ratios.iter().enumerate() {
        let tail: i64 = degs[idx + 1..].iter().sum();
        out = out.var_coeff(t, tail)?;
        if out.is_zero() {
            break;
        }
    }
    Ok(out)
}

/// Compare two operators given in different block coordinates, on the
/// multidegree window [-w, w]^vars at h-orders < h_need. The coordinate maps
/// may order the underlying variables differently: `perm1[k]` / `perm2[k]`
/// name which position of the common variable list (x_1..x_n, y_1..y_m) the
/// k-th slot of each coordinate block carries.
pub fn compare_in_coords(
    a: &TensorOperator<Series>,
    ca: &BlockCoords,
    perm_a: &[usize],
    b: &TensorOperator<Series>,
    cb: &BlockCoords,
    perm_b: &[usize],
    window: i64,
    h_need: usize,
) -> Result<Option<String>> {
    assert_eq!(a.dims, b.dims);
    let nvars = perm_a.len();
    let mut degs = vec![-window; nvars];
    loop {
        // extract both sides at this multidegree
        let da: Vec<i64> = perm_a.iter().map(|&k| degs[k]).collect();
        let db: Vec<i64> = perm_b.iter().map(|&k| degs[k]).collect();
        let mut keys: Vec<(u32, u32)> = a.entries().map(|(&k, _)| k).collect();
        keys.extend(b.entries().map(|(&k, _)| k));
        keys.sort_unstable();
        keys.dedup();
        for (r, c) in keys {
            let zero = Series::zero(
                a.entries()
                    .next()
                    .map(|(_, v)| v.ctx())
                    .or_else(|| b.entries().next().map(|(_, v)| v.ctx()))
                    .expect("empty comparison"),
            );
            let va = match a.get(r, c) {
                Some(v) => block_coefficient(v, ca, &da)?,
                None => zero.clone(),
            };
            let vb = match b.get(r, c) {
                Some(v) => block_coefficient(v, cb, &db)?,
                None => zero.clone(),
            };
            let d = va.sub(&vb)?;
            if let Some((m, val)) = d.first_defect(&[], h_need)? {
                return Ok(Some(format!(
                    "entry ({r},{c}) at degrees {degs:?}: {m} -> {val}"
                )));
            }
        }
        // advance the multidegree counter
        let mut k = 0;
        loop {
            if k == nvars {
                return Ok(None);
            }
            degs[k] += 1;
            if degs[k] <= window {
                break;
            }
            degs[k] = -window;
            k += 1;
        }
    }
}

/// Defect of the quantum-current commutation relation on the module: side 1
/// in (x, t = y/x) coordinates, side 2 in (y, s = x/y), compared on the
/// window.
pub fn qc_defect(
    spec: &RestrictedModuleSpec,
    rm: &RMatrixContext,
    ctx: &Ctx,
    vars1: (VarId, VarId),
    vars2: (VarId, VarId),
    h_need: usize,
    window: i64,
) -> Result<Option<String>> {
    let (x, t) = vars1;
    let (y, s) = vars2;
    let dims = [spec.n, spec.n, spec.rank];
    let module_leg = 2;
    let minus_c = -&spec.level;

    // side 1: L1(x) R21(t e^{-hc}) L2(x t) R21(t)^{-1}
    let side1 = {
        let l1 = spec.action_at(&dims, 0, module_leg, &Series::var(ctx, x))?;
        let xt = Series::monomial(ctx, &[(x, 1), (t, 1)], 0, Rat::one())?;
        let l2 = spec.action_at(&dims, 1, module_leg, &xt)?;
        let t_mono = Series::var(ctx, t);
        let (w_a, _) = shift(&t_mono, &minus_c)?;
        let r_sh = r_mult_ratio(rm, ctx, &dims, [1, 0], &w_a)?;
        let t_inv = Series::monomial(ctx, &[(t, -1)], 0, Rat::one())?;
        let r_inv = r_mult_ratio_inv(rm, ctx, &dims, [1, 0], &t_mono, &t_inv)?;
        l1.mul(&r_sh)?.mul(&l2)?.mul(&r_inv)?
    };
    // side 2: R12(s)^{-1} L2(y) R12(s e^{-hc}) L1(y s)
    let side2 = {
        let l2 = spec.action_at(&dims, 1, module_leg, &Series::var(ctx, y))?;
        let ys = Series::monomial(ctx, &[(y, 1), (s, 1)], 0, Rat::one())?;
        let l1 = spec.action_at(&dims, 0, module_leg, &ys)?;
        let s_mono = Series::var(ctx, s);
        let s_inv = Series::monomial(ctx, &[(s, -1)], 0, Rat::one())?;
        let r_inv = r_mult_ratio_inv(rm, ctx, &dims, [0, 1], &s_mono, &s_inv)?;
        let (w_d, _) = shift(&s_mono, &minus_c)?;
        let r_sh = r_mult_ratio(rm, ctx, &dims, [0, 1], &w_d)?;
        r_inv.mul(&l2)?.mul(&r_sh)?.mul(&l1)?
    };
    // side 1 coordinates: block (x, y) with lead x, ratio t; side 2: block
    // (y, x) with lead y, ratio s. Common variable list: (x-deg, y-deg).
    compare_in_coords(
        &side1,
        &BlockCoords { lead: x, ratios: vec![t] },
        &[0, 1],
        &side2,
        &BlockCoords { lead: y, ratios: vec![s] },
        &[1, 0],
        window,
        h_need,
    )
}

pub fn verify_qc(
    spec: &RestrictedModuleSpec,
    rm: &RMatrixContext,
    ctx: &Ctx,
    vars1: (VarId, VarId),
    vars2: (VarId, VarId),
    h_need: usize,
    window: i64,
) -> Result<CheckOutcome> {
    Ok(match qc_defect(spec, rm, ctx, vars1, vars2, h_need, window)? {
        None => CheckOutcome::passing("quantum-current commutation relation"),
        Some(d) => CheckOutcome::failing("quantum-current commutation relation", d),
    })
}

/// Generalized relation at block sizes (n, 1): side 1 in the coordinates of
/// the combined block (x_1 .. x_n, y), side 2 with the y-variable leading,
/// and both compared against the straight (n+1)-fold ordered product.
pub fn verify_qcgen_n1(
    spec: &RestrictedModuleSpec,
    rm: &RMatrixContext,
    ctx: &Ctx,
    coords1: &BlockCoords,
    coords2: &BlockCoords,
    h_need: usize,
    window: i64,
) -> Result<Vec<CheckOutcome>> {
    let total = coords1.len();
    let n = total - 1;
    let mut dims = vec![spec.n; total];
    dims.push(spec.rank);
    let module_leg = total;
    let minus_c = -&spec.level;

    // side 1 in coords1 = (x_1, .., x_n, y): the x-block product, the
    // conjugating column, the y-action, and the inverse column
    let side1 = {
        let sub = BlockCoords {
            lead: coords1.lead,
            ratios: coords1.ratios[..n - 1].to_vec(),
        };
        let xs_block = {
            let small = current_product(spec, rm, ctx, &sub)?;
            let mut legs: Vec<usize> = (0..n).collect();
            legs.push(module_leg);
            small.embed(&dims, &legs)?
        };
        let ly = spec.action_at(&dims, n, module_leg, &coords1.x_image(ctx, n)?)?;
        let mut grid_sh = TensorOperator::identity(&dims, &Series::one(ctx));
        for i in (0..n).rev() {
            let (base, _) = coords1.ratio_pair(ctx, n, i)?;
            let (w, _) = shift(&base, &minus_c)?;
            grid_sh = grid_sh.mul(&r_mult_ratio(rm, ctx, &dims, [n, i], &w)?)?;
        }
        let mut grid_inv = TensorOperator::identity(&dims, &Series::one(ctx));
        for i in 0..n {
            let (w, w_inv) = coords1.ratio_pair(ctx, n, i)?;
            grid_inv = grid_inv.mul(&r_mult_ratio_inv(rm, ctx, &dims, [n, i], &w, &w_inv)?)?;
        }
        xs_block.mul(&grid_sh)?.mul(&ly)?.mul(&grid_inv)?
    };

    // side 2 in coords2 = (y, x_1, .., x_n): the grid with inverses first
    let side2 = {
        let (y_lead, xs) = (coords2.lead, &coords2.ratios);
        let _ = y_lead;
        let sub = BlockCoords {
            lead: coords2.lead,
            ratios: xs.clone(),
        };
        // x-block product: x_i are slots 1..n of coords2
        let x_coords = BlockCoords {
            lead: coords2.ratios[0],
            ratios: coords2.ratios[1..].to_vec(),
        };
        // embed: the x-block product expressed in (x_1 = y*s_1, ratios)
        // directly through images below
        let mut out = TensorOperator::identity(&dims, &Series::one(ctx));
        // inverse of the ascending grid: factors inverted in descending order
        for i in (0..n).rev() {
            let (w, w_inv) = sub.ratio_pair(ctx, i + 1, 0)?;
            out = out.mul(&r_mult_ratio_inv(rm, ctx, &dims, [i, n], &w, &w_inv)?)?;
        }
        let ly = spec.action_at(&dims, n, module_leg, &Series::var(ctx, coords2.lead))?;
        out = out.mul(&ly)?;
        // shifted grid in its defining ascending order
        for i in 0..n {
            let (base, _) = sub.ratio_pair(ctx, i + 1, 0)?;
            let (w, _) = shift(&base, &minus_c)?;
            out = out.mul(&r_mult_ratio(rm, ctx, &dims, [i, n], &w)?)?;
        }
        // then the x-block product, with x-images rooted at y * s_1
        let xs_block = {
            let mut block = TensorOperator::identity(&dims, &Series::one(ctx));
            for i in 0..n {
                let mut exps = vec![(coords2.lead, 1)];
                for t in &coords2.ratios[..=i] {
                    exps.push((*t, 1));
                }
                let img = Series::monomial(ctx, &exps, 0, Rat::one())?;
                let li = spec.action_at(&dims, i, module_leg, &img)?;
                block = block.mul(&li)?;
                for j in i + 1..n {
                    let (base, _) = x_coords.ratio_pair(ctx, j, i)?;
                    let (w, _) = shift(&base, &minus_c)?;
                    block = block.mul(&r_mult_ratio(rm, ctx, &dims, [j, i], &w)?)?;
                }
            }
            for i in (0..n.saturating_sub(1)).rev() {
                for j in (i + 1..n).rev() {
                    let (w, w_inv) = x_coords.ratio_pair(ctx, j, i)?;
                    block = block.mul(&r_mult_ratio_inv(rm, ctx, &dims, [j, i], &w, &w_inv)?)?;
                }
            }
            block
        };
        out.mul(&xs_block)?
    };

    let full = current_product(spec, rm, ctx, coords1)?;

    // common variable list: (x_1-deg, ..., x_n-deg, y-deg); coords1 carries
    // them in order, coords2 as (y, x_1, .., x_n)
    let perm1: Vec<usize> = (0..=n).collect();
    let mut perm2 = vec![n];
    perm2.extend(0..n);
    let mut out = Vec::new();
    out.push(match compare_in_coords(
        &side1, coords1, &perm1, &side2, coords2, &perm2, window, h_need,
    )? {
        None => CheckOutcome::passing("generalized relation, side 1 vs side 2"),
        Some(d) => CheckOutcome::failing("generalized relation, side 1 vs side 2", d),
    });
    out.push(match compare_in_coords(
        &side1, coords1, &perm1, &full, coords1, &perm1, window, h_need,
    )? {
        None => CheckOutcome::passing("generalized relation, side 1 vs combined product"),
        Some(d) => CheckOutcome::failing("generalized relation, side 1 vs combined product", d),
    });
    Ok(out)
}

/// Restrictedness in block coordinates: the leading variable's content is
/// bounded below strictly inside its window per retained h-order.
pub fn restrictedness_defect(
    op: &TensorOperator<Series>,
    lead: VarId,
    h_need: usize,
) -> Option<String> {
    for (&(r, c), v) in op.entries() {
        for k in 0..h_need.min(v.h_len()) {
            if let Some(d) = v.min_deg_at(lead, k) {
                if d <= v.ctx().vars[lead].min_deg {
                    return Some(format!(
                        "entry ({r},{c}) h-order {k}: leading content reaches the window floor {d}"
                    ));
                }
            }
        }
    }
    None
}
