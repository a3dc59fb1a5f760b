//! Linear-operator calculus on tensor products of C^N (and mixed-dimension
//! factors such as a module leg): leg embeddings, partial trace/transpose,
//! permutation operators, the h-deformed permutation and anti-symmetrizer,
//! and the structured left/right application used by crossing contractions.
//!
//! Operators are stored sparsely: a map (row, col) -> coefficient over an
//! arbitrary coefficient ring. Matrix products multiply entries in
//! left-factor-first order, so noncommutative coefficient rings are safe.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::profile::Ctx;
use crate::rat::Rat;
use crate::ratfun::RatFun;
use crate::series::Series;

/// Coefficient ring interface for tensor entries.
pub trait Coeff: Clone {
    fn c_add(&self, o: &Self) -> Result<Self>;
    fn c_mul(&self, o: &Self) -> Result<Self>;
    fn c_neg(&self) -> Self;
    fn c_is_zero(&self) -> bool;
}

impl Coeff for Series {
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

impl Coeff for RatFun {
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

#[derive(Clone, Debug)]
pub struct TensorOperator<T> {
    /// Dimension of each tensor leg.
    pub dims: Vec<usize>,
    entries: BTreeMap<(u32, u32), T>,
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product::<usize>().max(1)
}

/// Mixed-radix index, first leg most significant.
pub fn compose_index(dims: &[usize], multi: &[usize]) -> u32 {
    debug_assert_eq!(dims.len(), multi.len());
    let mut idx = 0usize;
    for (d, m) in dims.iter().zip(multi) {
        debug_assert!(m < d);
        idx = idx * d + m;
    }
    idx as u32
}

pub fn decompose_index(dims: &[usize], mut idx: u32) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for leg in (0..dims.len()).rev() {
        out[leg] = (idx as usize) % dims[leg];
        idx /= dims[leg] as u32;
    }
    out
}

impl<T: Coeff> TensorOperator<T> {
    pub fn zero(dims: &[usize]) -> Self {
        TensorOperator {
            dims: dims.to_vec(),
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dims: &[usize], one: &T) -> Self {
        let mut entries = BTreeMap::new();
        for i in 0..total_dim(dims) as u32 {
            entries.insert((i, i), one.clone());
        }
        TensorOperator {
            dims: dims.to_vec(),
            entries,
        }
    }

    pub fn from_entries(dims: &[usize], items: Vec<((u32, u32), T)>) -> Self {
        let mut entries = BTreeMap::new();
        for (k, v) in items {
            if !v.c_is_zero() {
                entries.insert(k, v);
            }
        }
        TensorOperator {
            dims: dims.to_vec(),
            entries,
        }
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.entries.iter()
    }

    pub fn get(&self, row: u32, col: u32) -> Option<&T> {
        self.entries.get(&(row, col))
    }

    pub fn set(&mut self, row: u32, col: u32, v: T) {
        if v.c_is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), v);
        }
    }

    pub fn accumulate(&mut self, row: u32, col: u32, v: T) -> Result<()> {
        if v.c_is_zero() {
            return Ok(());
        }
        match self.entries.entry((row, col)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().c_add(&v)?;
                if s.c_is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
        Ok(())
    }

    pub fn map<U: Coeff>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<TensorOperator<U>> {
        let mut out = TensorOperator::zero(&self.dims);
        for (&k, v) in &self.entries {
            let w = f(v)?;
            if !w.c_is_zero() {
                out.entries.insert(k, w);
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        assert_eq!(self.dims, o.dims, "leg dimension mismatch");
        let mut out = self.clone();
        for (&(r, c), v) in &o.entries {
            out.accumulate(r, c, v.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v = v.c_neg();
        }
        out
    }

    pub fn scale(&self, s: &T) -> Result<Self> {
        let mut out = TensorOperator::zero(&self.dims);
        for (&k, v) in &self.entries {
            let w = s.c_mul(v)?;
            if !w.c_is_zero() {
                out.entries.insert(k, w);
            }
        }
        Ok(out)
    }

    /// Matrix product; entry values multiply in (self, o) order.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        assert_eq!(self.dims, o.dims, "leg dimension mismatch");
        let mut out = TensorOperator::zero(&self.dims);
        for (&(r, k1), a) in &self.entries {
            for (&(k2, c), b) in o.entries.range((k1, 0)..) {
                if k2 != k1 {
                    break;
                }
                out.accumulate(r, c, a.c_mul(b)?)?;
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Embed this operator into a larger tensor product: `legs[i]` names the
    /// target leg carrying this operator's leg `i`; all other target legs act
    /// as identity.
    pub fn embed(&self, target_dims: &[usize], legs: &[usize]) -> Result<Self> {
        assert_eq!(legs.len(), self.dims.len());
        for (i, &l) in legs.iter().enumerate() {
            assert_eq!(
                target_dims[l], self.dims[i],
                "leg {l} dimension differs from source leg {i}"
            );
        }
        let mut passive: Vec<usize> = (0..target_dims.len()).collect();
        passive.retain(|l| !legs.contains(l));
        let passive_dims: Vec<usize> = passive.iter().map(|&l| target_dims[l]).collect();
        let passive_total = total_dim(&passive_dims);

        let mut out = TensorOperator::zero(target_dims);
        for (&(r, c), v) in &self.entries {
            let rm = decompose_index(&self.dims, r);
            let cm = decompose_index(&self.dims, c);
            for p in 0..passive_total as u32 {
                let pm = decompose_index(&passive_dims, p);
                let mut row = vec![0usize; target_dims.len()];
                let mut col = vec![0usize; target_dims.len()];
                for (i, &l) in legs.iter().enumerate() {
                    row[l] = rm[i];
                    col[l] = cm[i];
                }
                for (i, &l) in passive.iter().enumerate() {
                    row[l] = pm[i];
                    col[l] = pm[i];
                }
                out.entries.insert(
                    (
                        compose_index(target_dims, &row),
                        compose_index(target_dims, &col),
                    ),
                    v.clone(),
                );
            }
        }
        Ok(out)
    }

    /// Transpose a single leg.
    pub fn partial_transpose(&self, leg: usize) -> Result<Self> {
        if leg >= self.dims.len() {
            return Err(Error::Invalid(format!("leg {leg} out of range")));
        }
        let mut out = TensorOperator::zero(&self.dims);
        for (&(r, c), v) in &self.entries {
            let mut rm = decompose_index(&self.dims, r);
            let mut cm = decompose_index(&self.dims, c);
            std::mem::swap(&mut rm[leg], &mut cm[leg]);
            out.entries.insert(
                (
                    compose_index(&self.dims, &rm),
                    compose_index(&self.dims, &cm),
                ),
                v.clone(),
            );
        }
        Ok(out)
    }

    /// Trace out the named legs; the result lives on the remaining legs.
    pub fn partial_trace(&self, legs: &[usize]) -> Result<Self> {
        for &l in legs {
            if l >= self.dims.len() {
                return Err(Error::Invalid(format!("leg {l} out of range")));
            }
        }
        let keep: Vec<usize> = (0..self.dims.len()).filter(|l| !legs.contains(l)).collect();
        let keep_dims: Vec<usize> = keep.iter().map(|&l| self.dims[l]).collect();
        let mut out = TensorOperator::zero(&keep_dims);
        for (&(r, c), v) in &self.entries {
            let rm = decompose_index(&self.dims, r);
            let cm = decompose_index(&self.dims, c);
            if legs.iter().any(|&l| rm[l] != cm[l]) {
                continue;
            }
            let row: Vec<usize> = keep.iter().map(|&l| rm[l]).collect();
            let col: Vec<usize> = keep.iter().map(|&l| cm[l]).collect();
            out.accumulate(
                compose_index(&keep_dims, &row),
                compose_index(&keep_dims, &col),
                v.clone(),
            )?;
        }
        Ok(out)
    }

    /// Full trace as a scalar coefficient (requires a zero value to start).
    pub fn trace_all(&self, zero: T) -> Result<T> {
        let mut acc = zero;
        for (&(r, c), v) in &self.entries {
            if r == c {
                acc = acc.c_add(v)?;
            }
        }
        Ok(acc)
    }

    /// Structured product `self <LR> b`: the first `n_left` legs of `self`
    /// are applied from the left of `b`, the remaining legs from the right.
    /// Sound when `self`'s entries commute with `b`'s (scalar conjugators).
    ///
    /// result[(a2,b2),(a1,b1)] = sum X[(a2,b'),(a',b1)] * B[(a',b2),(a1,b')]
    pub fn apply_lr(&self, b: &Self, n_left: usize) -> Result<Self> {
        assert_eq!(self.dims, b.dims, "leg dimension mismatch");
        let dims = &self.dims;
        let mut out = TensorOperator::zero(dims);
        for (&(xr, xc), xv) in &self.entries {
            let xrm = decompose_index(dims, xr);
            let xcm = decompose_index(dims, xc);
            let (a2, b_prime) = xrm.split_at(n_left);
            let (a_prime, b1) = xcm.split_at(n_left);
            for (&(br, bc), bv) in &b.entries {
                let brm = decompose_index(dims, br);
                let bcm = decompose_index(dims, bc);
                let (a_in, b2) = brm.split_at(n_left);
                let (a1, b_in) = bcm.split_at(n_left);
                if a_in != a_prime || b_in != b_prime {
                    continue;
                }
                let mut row = a2.to_vec();
                row.extend_from_slice(b2);
                let mut col = a1.to_vec();
                col.extend_from_slice(b1);
                out.accumulate(
                    compose_index(dims, &row),
                    compose_index(dims, &col),
                    xv.c_mul(bv)?,
                )?;
            }
        }
        Ok(out)
    }

    /// Structured product `self <RL> b`: the first `n_left` legs of `self`
    /// are applied from the right of `b`, the remaining legs from the left.
    ///
    /// result[(a2,b2),(a1,b1)] = sum X[(a',b2),(a1,b')] * B[(a2,b'),(a',b1)]
    pub fn apply_rl(&self, b: &Self, n_left: usize) -> Result<Self> {
        assert_eq!(self.dims, b.dims, "leg dimension mismatch");
        let dims = &self.dims;
        let mut out = TensorOperator::zero(dims);
        for (&(xr, xc), xv) in &self.entries {
            let xrm = decompose_index(dims, xr);
            let xcm = decompose_index(dims, xc);
            let (a_prime, b2) = xrm.split_at(n_left);
            let (a1, b_prime) = xcm.split_at(n_left);
            for (&(br, bc), bv) in &b.entries {
                let brm = decompose_index(dims, br);
                let bcm = decompose_index(dims, bc);
                let (a2, b_in) = brm.split_at(n_left);
                let (a_in, b1) = bcm.split_at(n_left);
                if a_in != a_prime || b_in != b_prime {
                    continue;
                }
                let mut row = a2.to_vec();
                row.extend_from_slice(b2);
                let mut col = a1.to_vec();
                col.extend_from_slice(b1);
                out.accumulate(
                    compose_index(dims, &row),
                    compose_index(dims, &col),
                    xv.c_mul(bv)?,
                )?;
            }
        }
        Ok(out)
    }
}

// ----------------------------------------------------------------------
// Ordered products
// ----------------------------------------------------------------------

/// Ordered grid product over a first block of `n` legs and a second block of
/// `m` legs: outer index ascending, inner index descending. The supplier
/// receives global leg pairs (i, j) with i in the first block and j in the
/// second, and returns the fully embedded factor; factors multiply left to
/// right in the visited order.
pub fn ordered_grid_12<T: Coeff>(
    n: usize,
    m: usize,
    init: TensorOperator<T>,
    mut supplier: impl FnMut(usize, usize) -> Result<TensorOperator<T>>,
) -> Result<TensorOperator<T>> {
    let mut out = init;
    for i in 0..n {
        for j in (n..n + m).rev() {
            out = out.mul(&supplier(i, j)?)?;
        }
    }
    Ok(out)
}

/// Ordered grid product with outer index descending and inner ascending; the
/// supplier receives (j, i) in the visited order (factors act as R_{ji}).
pub fn ordered_grid_21<T: Coeff>(
    n: usize,
    m: usize,
    init: TensorOperator<T>,
    mut supplier: impl FnMut(usize, usize) -> Result<TensorOperator<T>>,
) -> Result<TensorOperator<T>> {
    let mut out = init;
    for i in (0..n).rev() {
        for j in n..n + m {
            out = out.mul(&supplier(j, i)?)?;
        }
    }
    Ok(out)
}

/// Triangular ordered product over pairs i < j of `n` legs, both indices
/// ascending; the supplier receives (j, i).
pub fn ordered_bracket<T: Coeff>(
    n: usize,
    init: TensorOperator<T>,
    mut supplier: impl FnMut(usize, usize) -> Result<TensorOperator<T>>,
) -> Result<TensorOperator<T>> {
    let mut out = init;
    for i in 0..n.saturating_sub(1) {
        for j in i + 1..n {
            out = out.mul(&supplier(j, i)?)?;
        }
    }
    Ok(out)
}

/// Triangular ordered product visited in the fully reversed order.
pub fn ordered_bracket_rev<T: Coeff>(
    n: usize,
    init: TensorOperator<T>,
    mut supplier: impl FnMut(usize, usize) -> Result<TensorOperator<T>>,
) -> Result<TensorOperator<T>> {
    let mut out = init;
    for i in (0..n.saturating_sub(1)).rev() {
        for j in (i + 1..n).rev() {
            out = out.mul(&supplier(j, i)?)?;
        }
    }
    Ok(out)
}

/// Triangular ordered product over pairs i < j, used with two-argument
/// factors whose first leg is i (ascending in both indices).
pub fn ordered_upper_pairs<T: Coeff>(
    n: usize,
    init: TensorOperator<T>,
    mut supplier: impl FnMut(usize, usize) -> Result<TensorOperator<T>>,
) -> Result<TensorOperator<T>> {
    let mut out = init;
    for i in 0..n.saturating_sub(1) {
        for j in i + 1..n {
            out = out.mul(&supplier(i, j)?)?;
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------------
// Series-entried builders on (C^N)^{tensor m}
// ----------------------------------------------------------------------

/// The flip operator P on C^N tensor C^N.
pub fn flip(ctx: &Ctx, n: usize) -> TensorOperator<Series> {
    let dims = [n, n];
    let mut out = TensorOperator::zero(&dims);
    for i in 0..n {
        for j in 0..n {
            out.set(
                compose_index(&dims, &[i, j]),
                compose_index(&dims, &[j, i]),
                Series::one(ctx),
            );
        }
    }
    out
}

/// The h-deformed permutation operator on C^N tensor C^N: diagonal pairs are
/// kept, off-diagonal flips carry e^{h/2} (descending index pair) or
/// e^{-h/2} (ascending).
pub fn h_permutation(ctx: &Ctx, n: usize) -> TensorOperator<Series> {
    let dims = [n, n];
    let mut out = TensorOperator::zero(&dims);
    let e_plus = crate::series::exp_ch(ctx, &Rat::new(1, 2));
    let e_minus = crate::series::exp_ch(ctx, &Rat::new(-1, 2));
    for i in 0..n {
        out.set(
            compose_index(&dims, &[i, i]),
            compose_index(&dims, &[i, i]),
            Series::one(ctx),
        );
        for j in 0..n {
            if i == j {
                continue;
            }
            // term e_ij (x) e_ji acts at row (i, j), column (j, i)
            let coeff = if i > j { e_plus.clone() } else { e_minus.clone() };
            out.set(
                compose_index(&dims, &[i, j]),
                compose_index(&dims, &[j, i]),
                coeff,
            );
        }
    }
    out
}

/// Reduced decomposition of a permutation (one-line notation) into adjacent
/// transposition indices; applying the transpositions left to right
/// reproduces the permutation.
fn reduced_decomposition(sigma: &[usize]) -> Vec<usize> {
    let mut word = sigma.to_vec();
    let mut rev = Vec::new();
    loop {
        let mut done = true;
        for i in 0..word.len().saturating_sub(1) {
            if word[i] > word[i + 1] {
                word.swap(i, i + 1);
                rev.push(i);
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }
    rev.reverse();
    rev
}

fn inversions(sigma: &[usize]) -> usize {
    let mut k = 0;
    for i in 0..sigma.len() {
        for j in i + 1..sigma.len() {
            if sigma[i] > sigma[j] {
                k += 1;
            }
        }
    }
    k
}

/// h-deformed action of a permutation on legs of dimension `dim`, built from
/// a reduced decomposition into adjacent transpositions.
pub fn perm_action(ctx: &Ctx, dim: usize, sigma: &[usize]) -> Result<TensorOperator<Series>> {
    let legs = sigma.len();
    let dims = vec![dim; legs];
    let ph = h_permutation(ctx, dim);
    let mut out = TensorOperator::identity(&dims, &Series::one(ctx));
    for i in reduced_decomposition(sigma) {
        let factor = ph.embed(&dims, &[i, i + 1])?;
        out = out.mul(&factor)?;
    }
    Ok(out)
}

/// Normalized anti-symmetrizer on n legs: (1/n!) sum over permutations of
/// sign times the h-deformed permutation action.
pub fn antisymmetrizer_perm_sum(ctx: &Ctx, dim: usize, n: usize) -> Result<TensorOperator<Series>> {
    use itertools::Itertools;
    let dims = vec![dim; n];
    let mut acc = TensorOperator::zero(&dims);
    for perm in (0..n).permutations(n) {
        let sgn = if inversions(&perm) % 2 == 0 { 1 } else { -1 };
        let op = perm_action(ctx, dim, &perm)?;
        let signed = op.map(|s| Ok(s.scale(&Rat::from_int(sgn))))?;
        acc = acc.add(&signed)?;
    }
    let inv_fact = Rat::factorial(n).recip()?;
    acc.map(|s| Ok(s.scale(&inv_fact)))
}

/// The diagonal twist matrix with entries e^{(N-1)h/2}, e^{(N-3)h/2}, ...,
/// e^{-(N-1)h/2} on one leg. The entries multiply to 1.
pub fn dmatrix(ctx: &Ctx, n: usize) -> TensorOperator<Series> {
    let dims = [n];
    let mut out = TensorOperator::zero(&dims);
    for i in 0..n {
        let expo = Rat::new((n as i64) - 2 * (i as i64) - 1, 2);
        out.set(i as u32, i as u32, crate::series::exp_ch(ctx, &expo));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TruncationProfile;

    fn ctx() -> Ctx {
        TruncationProfile::builder(4).build()
    }

    #[test]
    fn embed_identity_and_flip() {
        let c = ctx();
        let n = 2;
        let id2 = TensorOperator::identity(&[n, n], &Series::one(&c));
        let e = id2.embed(&[n, n, n], &[0, 2]).unwrap();
        let id3 = TensorOperator::identity(&[n, n, n], &Series::one(&c));
        assert!(e.sub(&id3).unwrap().is_zero());

        let p = flip(&c, n);
        let p12 = p.embed(&[n, n], &[0, 1]).unwrap();
        assert!(p12.sub(&p).unwrap().is_zero());
    }

    #[test]
    fn flip_13_is_conjugate_of_flip_12() {
        let c = ctx();
        let n = 2;
        let dims = [n, n, n];
        let p = flip(&c, n);
        let p12 = p.embed(&dims, &[0, 1]).unwrap();
        let p23 = p.embed(&dims, &[1, 2]).unwrap();
        let p13 = p.embed(&dims, &[0, 2]).unwrap();
        let conj = p23.mul(&p12).unwrap().mul(&p23).unwrap();
        assert!(p13.sub(&conj).unwrap().is_zero());
    }

    #[test]
    fn transpose_involutive_and_traces() {
        let c = ctx();
        let n = 3;
        let p = flip(&c, n);
        let t = p.partial_transpose(0).unwrap();
        let tt = t.partial_transpose(0).unwrap();
        assert!(tt.sub(&p).unwrap().is_zero());
        // trace over both legs of P is N
        let tr = p
            .partial_trace(&[0, 1])
            .unwrap()
            .trace_all(Series::zero(&c))
            .unwrap();
        assert_eq!(tr, Series::int(&c, n as i64));
        // trace over all legs of the identity is N^m
        let id = TensorOperator::identity(&[n, n], &Series::one(&c));
        let tr_id = id
            .partial_trace(&[0, 1])
            .unwrap()
            .trace_all(Series::zero(&c))
            .unwrap();
        assert_eq!(tr_id, Series::int(&c, (n * n) as i64));
    }

    #[test]
    fn h_permutation_squares_to_identity() {
        let c = ctx();
        for n in [2usize, 3] {
            let ph = h_permutation(&c, n);
            let sq = ph.mul(&ph).unwrap();
            let id = TensorOperator::identity(&[n, n], &Series::one(&c));
            assert!(sq.sub(&id).unwrap().is_zero());
            // h -> 0 limit is the classical flip: compare h^0 coefficients
            for (&(r, cc), v) in ph.entries() {
                let h0 = v.coeff(&[], 0).unwrap();
                let expect = flip(&c, n)
                    .get(r, cc)
                    .map(|s| s.coeff(&[], 0).unwrap())
                    .unwrap_or_else(Rat::zero);
                assert_eq!(h0, expect);
            }
        }
    }

    #[test]
    fn perm_action_reduced_decomposition_independence() {
        let c = ctx();
        let n = 2;
        // the 3-cycle-free transposition (1 3) in S3 has two reduced words
        let dims = [n, n, n];
        let ph = h_permutation(&c, n);
        let s1 = ph.embed(&dims, &[0, 1]).unwrap();
        let s2 = ph.embed(&dims, &[1, 2]).unwrap();
        let w1 = s1.mul(&s2).unwrap().mul(&s1).unwrap();
        let w2 = s2.mul(&s1).unwrap().mul(&s2).unwrap();
        assert!(w1.sub(&w2).unwrap().is_zero());
        let via_api = perm_action(&c, n, &[2, 1, 0]).unwrap();
        assert!(via_api.sub(&w1).unwrap().is_zero());
    }

    #[test]
    fn antisymmetrizer_two_legs_formula() {
        // A^(2) = (Id - P^h)/2
        let c = ctx();
        for n in [2usize, 3] {
            let a = antisymmetrizer_perm_sum(&c, n, 2).unwrap();
            let id = TensorOperator::identity(&[n, n], &Series::one(&c));
            let expect = id
                .sub(&h_permutation(&c, n))
                .unwrap()
                .map(|s| Ok(s.scale(&Rat::new(1, 2))))
                .unwrap();
            assert!(a.sub(&expect).unwrap().is_zero());
        }
    }

    #[test]
    fn antisymmetrizer_idempotent_and_q_antisymmetry() {
        let c = ctx();
        for (n, legs) in [(2usize, 2usize), (3, 2), (3, 3)] {
            let a = antisymmetrizer_perm_sum(&c, n, legs).unwrap();
            let sq = a.mul(&a).unwrap();
            assert!(sq.sub(&a).unwrap().is_zero(), "A^({legs}) idempotent, N={n}");
            // A P^h_{sigma_i} = -A for adjacent transpositions
            let dims = vec![n; legs];
            for i in 0..legs - 1 {
                let ph = h_permutation(&c, n).embed(&dims, &[i, i + 1]).unwrap();
                let ap = a.mul(&ph).unwrap();
                assert!(ap.add(&a).unwrap().is_zero(), "q-antisymmetry at {i}");
            }
        }
    }

    #[test]
    fn dmatrix_determinant_one() {
        let c = ctx();
        for n in [2usize, 3, 4] {
            let d = dmatrix(&c, n);
            let mut prod = Series::one(&c);
            for i in 0..n as u32 {
                prod = prod.mul(d.get(i, i).unwrap()).unwrap();
            }
            assert_eq!(prod, Series::one(&c));
        }
    }

    #[test]
    fn apply_lr_with_identity_blocks_is_product() {
        let c = ctx();
        let n = 2;
        let dims = [n, n];
        let x = TensorOperator::identity(&dims, &Series::one(&c));
        let ph = h_permutation(&c, n);
        let lr = x.apply_lr(&ph, 1).unwrap();
        assert!(lr.sub(&ph).unwrap().is_zero());
        let rl = x.apply_rl(&ph, 1).unwrap();
        assert!(rl.sub(&ph).unwrap().is_zero());
    }

    #[test]
    fn embed_trace_duality() {
        // tr_s(A_{rs} (Y)_s) = (tr_2(A (1 (x) Y)))_r on simple data
        let c = ctx();
        let n = 2;
        let dims2 = [n, n];
        let a = h_permutation(&c, n);
        let mut y = TensorOperator::<Series>::zero(&[n]);
        y.set(0, 1, Series::h(&c));
        y.set(1, 0, Series::one(&c));
        y.set(1, 1, Series::int(&c, 3));

        let dims3 = [n, n, n];
        for (r, s) in [(0usize, 1usize), (0, 2), (2, 1)] {
            let a_rs = a.embed(&dims3, &[r, s]).unwrap();
            let y_s = y.embed(&dims3, &[s]).unwrap();
            let lhs = a_rs.mul(&y_s).unwrap().partial_trace(&[s]).unwrap();

            let y_2 = y.embed(&dims2, &[1]).unwrap();
            let small = a.mul(&y_2).unwrap().partial_trace(&[1]).unwrap();
            let keep: Vec<usize> = (0..3).filter(|&l| l != s).collect();
            let pos = keep.iter().position(|&l| l == r).unwrap();
            let rhs = small.embed(&[n, n], &[pos]).unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_zero(), "duality at ({r},{s})");
        }
    }
}
