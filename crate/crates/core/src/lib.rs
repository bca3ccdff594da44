//! Numerical laboratory for co-rotational wave-map blow-up into surfaces of
//! revolution: harmonic maps, blow-up profiles and correctors, the spectral
//! theory of the linearized operator, transference kernels and a radial
//! evolution code.

pub mod error;
pub mod evolution;
pub mod harmonic_map;
pub mod spectral;
pub mod numerics;
pub mod profile;
pub mod surface;
pub mod transference;

pub use error::{Error, Result};
pub use harmonic_map::HarmonicMap;
pub use surface::SurfaceProfile;
