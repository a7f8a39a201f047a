//! Travelling fronts and the steady profile of the Robin-only field.

mod steady;
pub(crate) mod travelling;

pub use steady::{steady_profile, SteadyProfile};
pub use travelling::{travelling_wave, WaveKind, WaveOptions, WaveProfile, WaveSidecar};
