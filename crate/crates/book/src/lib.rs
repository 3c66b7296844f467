//! Guide chapters compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/polynomials.md")]
pub mod polynomials {}
#[doc = include_str!("../../../book/src/lattice.md")]
pub mod lattice {}
#[doc = include_str!("../../../book/src/discretization.md")]
pub mod discretization {}
#[doc = include_str!("../../../book/src/random.md")]
pub mod random {}
#[doc = include_str!("../../../book/src/lower_bounds.md")]
pub mod lower_bounds {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
