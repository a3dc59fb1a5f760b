//! Finite restricted modules for the quantum current relation, the module
//! map construction of the main correspondence, and the module-side
//! verification suites.

pub mod axioms;
pub mod fusion;
pub mod ln;
pub mod spec;
pub mod yw;

pub use spec::{parse_module_spec, scalar_module, write_module_spec, RestrictedModuleSpec};

#[cfg(test)]
mod tests {
    use crate::profile::TruncationProfile;
    use crate::rat::Rat;
    use crate::rmatrix::RMatrixContext;
    use crate::series::Series;

    use super::ln::{
        current_product, restrictedness_defect, verify_qc, verify_qcgen_n1, BlockCoords,
    };
    use super::spec::scalar_module;

    #[test]
    fn scalar_module_passes_qc_at_level_zero_and_fails_at_one() {
        let k = 3;
        let ctx = TruncationProfile::builder(k)
            .laurent("x", -8, 8)
            .laurent("y", -8, 8)
            .laurent("t", -2, 10)
            .laurent("s", -2, 10)
            .build();
        let x = ctx.var("x").unwrap();
        let y = ctx.var("y").unwrap();
        let t = ctx.var("t").unwrap();
        let s = ctx.var("s").unwrap();
        let rm = RMatrixContext::new(2, k).unwrap();
        let s_action = Series::one(&ctx)
            .sub(&Series::monomial(&ctx, &[(x, -1)], 1, Rat::one()).unwrap())
            .unwrap();
        let mut spec = scalar_module(&ctx, 2, x, &s_action).unwrap();
        let ok = verify_qc(&spec, &rm, &ctx, (x, t), (y, s), k, 2).unwrap();
        assert!(ok.pass, "{:?}", ok.defect);

        let trivial = scalar_module(&ctx, 2, x, &Series::one(&ctx)).unwrap();
        let ok = verify_qc(&trivial, &rm, &ctx, (x, t), (y, s), k, 2).unwrap();
        assert!(ok.pass, "{:?}", ok.defect);

        // level obstruction: same action declared at level 1 must fail
        spec.level = Rat::one();
        let bad = verify_qc(&spec, &rm, &ctx, (x, t), (y, s), k, 2).unwrap();
        assert!(!bad.pass, "level-1 scalar module unexpectedly passed");
    }

    #[test]
    fn qcgen_two_one_on_scalar_module() {
        let k = 3;
        let ctx = TruncationProfile::builder(k)
            .laurent("x1", -8, 8)
            .laurent("y1", -8, 8)
            .laurent("t2", -2, 10)
            .laurent("t3", -2, 10)
            .laurent("s2", -2, 10)
            .laurent("s3", -2, 10)
            .build();
        let x1 = ctx.var("x1").unwrap();
        let y1 = ctx.var("y1").unwrap();
        let t2 = ctx.var("t2").unwrap();
        let t3 = ctx.var("t3").unwrap();
        let s2 = ctx.var("s2").unwrap();
        let s3 = ctx.var("s3").unwrap();
        let rm = RMatrixContext::new(2, k).unwrap();
        let s_action = Series::one(&ctx)
            .sub(&Series::monomial(&ctx, &[(x1, -1)], 1, Rat::one()).unwrap())
            .unwrap();
        let spec = scalar_module(&ctx, 2, x1, &s_action).unwrap();
        // block (x1, x2, y): lead x1, ratios t2 = x2/x1, t3 = y/x2
        let coords1 = BlockCoords { lead: x1, ratios: vec![t2, t3] };
        // block (y, x1, x2): lead y1, ratios s2 = x1/y, s3 = x2/x1
        let coords2 = BlockCoords { lead: y1, ratios: vec![s2, s3] };
        for c in verify_qcgen_n1(&spec, &rm, &ctx, &coords1, &coords2, k, 1).unwrap() {
            assert!(c.pass, "{}: {:?}", c.name, c.defect);
        }
        let full = current_product(&spec, &rm, &ctx, &coords1).unwrap();
        assert!(restrictedness_defect(&full, x1, k).is_none());
    }
}