//! The narrative guide, compiled straight from the book sources.
//!
//! Each module below embeds one chapter of `book/src/`, so `cargo test`
//! runs every code snippet in the book as a doc-test and the guide can
//! never drift from the API. Read the rendered book for the intended
//! presentation; these modules exist for the test harness and for offline
//! rustdoc browsing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/circuit.md")]
pub mod circuit {}

#[doc = include_str!("../../../book/src/schedules.md")]
pub mod schedules {}

#[doc = include_str!("../../../book/src/gradients.md")]
pub mod gradients {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/noise.md")]
pub mod noise {}

#[doc = include_str!("../../../book/src/transition.md")]
pub mod transition {}

#[doc = include_str!("../../../book/src/accounting.md")]
pub mod accounting {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
