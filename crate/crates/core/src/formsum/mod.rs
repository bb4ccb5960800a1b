//! Form sums `S = T +̃ Q` of a coercive principal part and a relatively
//! form-bounded distributional perturbation, realized on a Fourier trial
//! space in orthonormal `L₂` coordinates.

mod coercivity;
mod operator;
mod sector;
mod sum;

pub use coercivity::{sobolev_gram, verify_garding, CoercivityReport};
pub use operator::{
    assemble_lower, assemble_principal, default_cutoffs, lower_matrix, mollified, principal_form,
    FormTerm, LowerPart, OperatorSpec,
};
pub use sector::{resolvent, sector_estimate, SectorEstimate, SECTOR_ANGLES};
pub use sum::{
    build_generalized_sum, certify_relative_bound, verify_resolvent_identity, GeneralizedSum,
    HausdorffShift, PrincipalPart, RelativeBoundCertificate, ResolventIdentity,
};
