//! The user guide, compiled from the mdbook sources in `book/src`.
//!
//! Each module below embeds one chapter verbatim, so every code block in
//! the rendered book is also a doc-test: the guide cannot drift away from
//! the library without failing `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/gaussian-loss.md")]
pub mod gaussian_loss {}

#[doc = include_str!("../../../book/src/photon-budget.md")]
pub mod photon_budget {}

#[doc = include_str!("../../../book/src/fock-oracle.md")]
pub mod fock_oracle {}

#[doc = include_str!("../../../book/src/optimal-estimator.md")]
pub mod optimal_estimator {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
