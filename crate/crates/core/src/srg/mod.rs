//! Directional scaled relative graphs: sampling, certification and calculus.

mod calculus;
mod certify;
mod cloud;
mod operator;

pub use calculus::{
    alignment_defect, boxplus_contains, boxplus_pair, containment_report, diamond_contains, diamond_pair,
    estimate_sigma, matched_composition, matched_sum, sigma_from_increments, srg_invert, srg_scale, CalculusRule,
    ContainmentReport, MatchedClouds, DEFAULT_CALCULUS_TOL, SIGMA_SLACK,
};
pub use certify::{
    certify, certify_with_tol, contraction_factor, increment_slack, region_slack, CertificateReport, Property,
    Verdict, DEFAULT_CERT_TOL,
};
pub use cloud::{
    point_from_increment, sample_srg, sample_srg_with, srg_from_increments, SampleMeta, SrgCloud, SrgPoint,
    ZERO_INCREMENT_TOL,
};
pub use operator::{increments_at, sample_increments, Increment, Operator, PointwiseFn};
