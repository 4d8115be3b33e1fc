//! The guide's chapters, included here so every code block in the book
//! compiles and runs under `cargo test --doc` (mdbook alone cannot link
//! the crate into its tests).

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol_chapter {}

#[doc = include_str!("../../../book/src/derandomized.md")]
pub mod derandomized_chapter {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics_chapter {}

#[doc = include_str!("../../../book/src/reference.md")]
pub mod reference_chapter {}

#[doc = include_str!("../../../book/src/adversary.md")]
pub mod adversary_chapter {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness_chapter {}
