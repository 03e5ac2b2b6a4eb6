// The book chapters double as doc-tests: each markdown file is attached to
// an empty module, so `cargo test --doc` compiles and runs every Rust
// snippet in the guide and the book can never drift from the API.

#[doc = include_str!("../../../book/src/introduction.md")]
mod _introduction {}

#[doc = include_str!("../../../book/src/simulator.md")]
mod _simulator {}

#[doc = include_str!("../../../book/src/circuits.md")]
mod _circuits {}

#[doc = include_str!("../../../book/src/gradients.md")]
mod _gradients {}

#[doc = include_str!("../../../book/src/haar-moments.md")]
mod _haar_moments {}

#[doc = include_str!("../../../book/src/training.md")]
mod _training {}

#[doc = include_str!("../../../book/src/experiments.md")]
mod _experiments {}
