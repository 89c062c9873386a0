//! Perfect discrimination of product pure states under measurement classes
//! that interpolate between POVMs (`s = 0`) and block-positive measurements.
//!
//! Two families are supported: `M_s`, whose elements are block positive with
//! negative eigenvalues bounded by `s`, and `M(K_s)`, whose elements lie in
//! `K_s = PSD + Γ(K_s^(0))`. For two product pure states the crate computes the
//! local overlaps, checks the sufficient condition, builds an explicit
//! measurement with cone certificates, and verifies it.

pub mod cones;
pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod multicopy;
pub mod oracle;
pub mod random;

pub use cones::{
    check_certificate, class_membership, is_psd, nege, ppt_pure_spectrum, sco, ConeCertificate, ConeId, Ks0Decomp,
    RankOneTerm, Verdict,
};
pub use discrimination::{
    build_measurement, discriminate, thm1_condition, thm2_condition, verify_measurement, Branch, ClassParameter,
    DiscriminationResult, MeasurementCertificate, OverlapPair, VerificationReport,
};
pub use error::{Error, Result};
pub use linalg::{
    canonical_reduction, eig_hermitian, partial_transpose, schmidt, CanonicalForm, Dims, HermitianOperator, Kron,
    PureStateVector, SchmidtDecomposition,
};
pub use multicopy::{interior_origin_margin, min_copies, region_boundary, CopyCount, MultiCopyInstance, RegionRow};
pub use oracle::{
    min_product_expectation, randomized_cert_audit_with, AuditFamily, randomized_cert_audit, scan_min_copies, AuditReport, SeesawConfig,
};
