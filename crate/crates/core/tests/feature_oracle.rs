//! Every matrix-family and first-order feature must match the independent
//! brute-force enumeration oracle on random small volumes.

mod common;

use common::oracle;
use common::{assert_close, random_glv};
use voxrad_core::features::{
    fos_features, glcm_features, glrlm_features, glszm_features, ngtdm_features,
    FOS_FEATURE_NAMES, GLCM_FEATURE_NAMES, GLRLM_FEATURE_NAMES, GLSZM_FEATURE_NAMES,
    NGTDM_FEATURE_NAMES,
};

const REL_TOL: f64 = 1e-9;

fn check_case(case: u64) {
    let (glv, values, roi, _dims) = random_glv(case);

    let got = glcm_features(&glv);
    let want = oracle::oracle_glcm(&glv);
    for (i, name) in GLCM_FEATURE_NAMES.iter().enumerate() {
        assert_close(&format!("case {case} glcm {name}"), got[i], want[i], REL_TOL);
    }

    let got = glrlm_features(&glv);
    let want = oracle::oracle_glrlm(&glv);
    for (i, name) in GLRLM_FEATURE_NAMES.iter().enumerate() {
        assert_close(&format!("case {case} glrlm {name}"), got[i], want[i], REL_TOL);
    }

    let got = glszm_features(&glv);
    let want = oracle::oracle_glszm(&glv);
    for (i, name) in GLSZM_FEATURE_NAMES.iter().enumerate() {
        assert_close(&format!("case {case} glszm {name}"), got[i], want[i], REL_TOL);
    }

    let got = ngtdm_features(&glv);
    let want = oracle::oracle_ngtdm(&glv);
    for (i, name) in NGTDM_FEATURE_NAMES.iter().enumerate() {
        assert_close(&format!("case {case} ngtdm {name}"), got[i], want[i], REL_TOL);
    }

    let roi_values: Vec<f64> = values
        .iter()
        .zip(roi.iter())
        .filter(|(_, &m)| m != 0)
        .map(|(&v, _)| v as f64)
        .collect();
    let got = fos_features(&roi_values, &glv, 1.0);
    let want = oracle::oracle_fos(&values, &roi, &glv);
    for (i, name) in FOS_FEATURE_NAMES.iter().enumerate() {
        assert_close(&format!("case {case} fos {name}"), got[i], want[i], REL_TOL);
    }
}

#[test]
fn all_families_match_oracle_on_25_random_volumes() {
    for case in 0..25 {
        check_case(case);
    }
}
