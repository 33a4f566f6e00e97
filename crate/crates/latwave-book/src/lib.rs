//! The chapters of the guide in `book/src`, compiled here so that every
//! code block runs as a doc-test against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/green.md")]
pub mod green {}
#[doc = include_str!("../../../book/src/decay.md")]
pub mod decay {}
#[doc = include_str!("../../../book/src/oscillatory.md")]
pub mod oscillatory {}
#[doc = include_str!("../../../book/src/newton.md")]
pub mod newton {}
#[doc = include_str!("../../../book/src/critical.md")]
pub mod critical {}
#[doc = include_str!("../../../book/src/evolution.md")]
pub mod evolution {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
