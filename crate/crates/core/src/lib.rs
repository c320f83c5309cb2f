//! Simulation laboratory for the incompressible Vlasov–Navier–Stokes system.

pub mod error;
pub mod besov;
pub mod diagnostics;
pub mod driver;
pub mod fluid;
pub mod kinetic;
pub mod spectral;

pub use error::{Result, VnsError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/besov.md")]
    mod besov {}
    #[doc = include_str!("../../../book/src/particles.md")]
    mod particles {}
    #[doc = include_str!("../../../book/src/fluid.md")]
    mod fluid {}
    #[doc = include_str!("../../../book/src/coupled.md")]
    mod coupled {}
    #[doc = include_str!("../../../book/src/decay.md")]
    mod decay {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/monokinetic.md")]
    mod monokinetic {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
