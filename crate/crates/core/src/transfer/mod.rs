//! The integration lemma, the twisted Maharam cocycle, the skew product over
//! `C` and the transfer certificate.

mod certificate;
mod integral;
mod profile;

pub use integral::{cq_constant, overlap_integral, profile_integral, profile_integral_detailed, IntegralOutcome};
pub use profile::{ProfileSpec, RadialProfile};
pub use certificate::{
    bump_coboundary, coboundary_spot_check, group_law_residual, skew_point_action, transfer_action,
    AtomEntry, CertificateEntry, SkewPoint, TransferCertificate, TransferOptions, TwistedCocycle, SPOT_TOL,
};
