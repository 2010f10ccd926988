//! The guide in `book/`, compiled as a crate so that every Rust snippet in it
//! runs under `cargo test --doc`. One module per chapter, which makes a
//! failing snippet easier to trace back to its page.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/interactions.md")]
pub mod interactions {}
#[doc = include_str!("../../../book/src/null-model.md")]
pub mod null_model {}
#[doc = include_str!("../../../book/src/phi.md")]
pub mod phi {}
#[doc = include_str!("../../../book/src/calibration.md")]
pub mod calibration {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/social.md")]
pub mod social {}
#[doc = include_str!("../../../book/src/synthetic.md")]
pub mod synthetic {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
