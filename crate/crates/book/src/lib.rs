//! Guide snippets, run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/medium.md")]
pub mod medium {}
#[doc = include_str!("../../../book/src/forward.md")]
pub mod forward {}
#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}
#[doc = include_str!("../../../book/src/glevitan.md")]
pub mod glevitan {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
