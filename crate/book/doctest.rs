// mdbook cannot run snippets that depend on external crates, so every chapter
// is pulled in here as a doc comment and `cargo test --doc` checks it.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/query-model.md")]
pub mod query_model {}
#[doc = include_str!("src/constants.md")]
pub mod constants {}
#[doc = include_str!("src/median-sgd.md")]
pub mod median_sgd {}
#[doc = include_str!("src/kernel-models.md")]
pub mod kernel_models {}
#[doc = include_str!("src/classification.md")]
pub mod classification {}
#[doc = include_str!("src/games.md")]
pub mod games {}
#[doc = include_str!("src/datasets.md")]
pub mod datasets {}
#[doc = include_str!("src/experiments.md")]
pub mod experiments {}
