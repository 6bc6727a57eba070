//! Exact pin± structure computations on surfaces and their orientation double covers.

pub mod acceptance;
pub mod characteristic;
pub mod clifford;
pub mod exact;
pub mod homology;
pub mod pin2;
pub mod pinors;
pub mod structures;
pub mod surface;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/homology.md")]
    mod homology {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/pinors.md")]
    mod pinors {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
