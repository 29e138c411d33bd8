//! The narrative guide, mirrored from `book/src/`.
//!
//! mdbook cannot link the book's code fences against this crate, so each
//! chapter is included here as module documentation: `cargo test --doc`
//! runs every snippet, keeping the book and the library in sync. Build
//! the rendered book with `mdbook build book` from the repository root.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/spaces.md")]
pub mod spaces {}

#[doc = include_str!("../../../book/src/frames.md")]
pub mod frames {}

#[doc = include_str!("../../../book/src/duality.md")]
pub mod duality {}

#[doc = include_str!("../../../book/src/perturbation.md")]
pub mod perturbation {}

#[doc = include_str!("../../../book/src/gluing.md")]
pub mod gluing {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
