use qva_core::phimod::ln::{r_mult_ratio, r_mult_ratio_inv, ratio};
use qva_core::profile::TruncationProfile;
use qva_core::rat::Rat;
use qva_core::rmatrix::{op_first_defect, RMatrixContext};
use qva_core::series::Series;
use qva_core::tensor::TensorOperator;

#[test]
fn dbg_ratio_inverse() {
    let k = 3;
    let ctx = TruncationProfile::builder(k)
        .laurent("x", -14, 6)
        .laurent("y", -14, 6)
        .build();
    let x = ctx.var("x").unwrap();
    let y = ctx.var("y").unwrap();
    let rm = RMatrixContext::new(2, k).unwrap();
    let dims = [2usize, 2];
    let ord = [x, y];
    let (w, w_inv) = ratio(&ctx, y, x, &Rat::zero()).unwrap();
    let a = r_mult_ratio(&rm, &ctx, &dims, [1, 0], &w, &ord).unwrap();
    let b = r_mult_ratio_inv(&rm, &ctx, &dims, [1, 0], &w, &w_inv, &ord).unwrap();
    let prod = a.mul(&b).unwrap();
    let id = TensorOperator::identity(&dims, &Series::one(&ctx));
    let d = prod.sub(&id).unwrap();
    let defect = op_first_defect(&d, &[(x, -3, 3), (y, -3, 3)], k).unwrap();
    println!("A A^-1 - Id defect: {:?}", defect);
    let prod2 = b.mul(&a).unwrap();
    let d2 = prod2.sub(&id).unwrap();
    println!("A^-1 A - Id defect: {:?}", op_first_defect(&d2, &[(x, -3, 3), (y, -3, 3)], k).unwrap());
    panic!("dbg");
}
