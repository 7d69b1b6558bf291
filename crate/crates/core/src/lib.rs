//! Kingman's radial convolution algebra: the kernel `Λ_s`, radial laws and
//! their radial characteristic functions, the transform `τ_s` to symmetric
//! laws, and statistical checks of the algebra's structural identities.

pub mod distributions;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod optim;
pub mod quad;
pub mod tau;
pub mod verify;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/convolution.md")]
    mod convolution {}
    #[doc = include_str!("../../../book/src/laws.md")]
    mod laws {}
    #[doc = include_str!("../../../book/src/tau.md")]
    mod tau {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
