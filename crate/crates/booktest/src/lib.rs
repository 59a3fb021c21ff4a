//! The code listings of the guide in `book/`, compiled and run as
//! doc-tests. Nothing here is meant to be used as a library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}

#[doc = include_str!("../../../book/src/clipping.md")]
pub mod clipping {}

#[doc = include_str!("../../../book/src/transforms.md")]
pub mod transforms {}

#[doc = include_str!("../../../book/src/distances.md")]
pub mod distances {}

#[doc = include_str!("../../../book/src/alignment.md")]
pub mod alignment {}

#[doc = include_str!("../../../book/src/moduli.md")]
pub mod moduli {}

#[doc = include_str!("../../../book/src/euler-calculus.md")]
pub mod euler_calculus {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
