//! Grows Physarum-style transport networks between the points of a 3D shape
//! and turns them into watertight, printable lattice meshes.
//!
//! The stages live in separate modules: [`geometry`] reads shapes and writes
//! STL and NPY, [`field`] holds voxel grids, [`mcpm`] runs the agent
//! simulation, [`reconstruct`] extracts surfaces, [`eval`] scores networks and
//! [`pipeline`] ties them together for the `scaffold` tool.

// `!(x > lo)` style guards are deliberate: they reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eval;
pub mod field;
pub mod geometry;
pub mod mcpm;
pub mod pipeline;
pub mod reconstruct;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
