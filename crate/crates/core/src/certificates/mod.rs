//! Wave-based sub- and supersolutions and their numerical verification.

mod certificate;
mod gamma;
mod ordering;
mod params;
mod residual;
mod trap;

pub use certificate::{build_certificate, Certificate, CertificateKind, NodeValue};
pub use gamma::{GammaMargin, GammaWeight};
pub use ordering::{
    certificate_ordering, certificate_state, lockstep_ordering, ordering_check, state_ordering,
};
pub use params::{
    derive_cert_params, interface_slope, kappa, omega, road_rate_bound, CertMode, CertOptions,
    CertificateParams, RobinClosure,
};
pub use residual::{
    aligned_time, residual, Component, Location, ResidualOptions, ResidualReport, Zone, ZoneStat,
    RESIDUAL_CONSTANT,
};
pub use trap::trap_shifts;
