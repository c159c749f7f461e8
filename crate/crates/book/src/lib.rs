//! Compiles and runs the code listings of the guide in `book/` as doctests.
//!
//! mdbook cannot resolve this workspace's crates when testing listings, so
//! each chapter is pulled in as the documentation of an empty module and
//! `cargo test --doc` runs its code blocks. One module per chapter keeps
//! failures traceable to their chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/regression.md")]
pub mod regression {}

#[doc = include_str!("../../../book/src/extension.md")]
pub mod extension {}

#[doc = include_str!("../../../book/src/tuning.md")]
pub mod tuning {}

#[doc = include_str!("../../../book/src/inference.md")]
pub mod inference {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
