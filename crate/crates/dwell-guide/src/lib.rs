//! Compiles the book's chapters as documentation so that every Rust
//! snippet in `book/src/*.md` runs under `cargo test --doc`. The book and
//! the doc-tests cannot drift apart: they are the same files.
//!
//! One module per chapter keeps test failures attributable to a chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection {}

#[doc = include_str!("../../../book/src/water-filling.md")]
pub mod water_filling {}

#[doc = include_str!("../../../book/src/probabilistic-priors.md")]
pub mod probabilistic_priors {}

#[doc = include_str!("../../../book/src/fleet-planning.md")]
pub mod fleet_planning {}

#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
