//! Exact rational linear algebra and explicit quiver representations.

pub mod matrix;
pub mod rep;

pub use matrix::{rat, MatrixError, Rat, RatMatrix};
pub use rep::{
    construct_indecomposable, decompose, end_dim, ext_dim, ext_space, hom_dim, hom_space,
    kernel_cokernel, middle_term, presentation, repmap_from_json, representation_from_json,
    representation_to_json, top_dims, ExtSpace, KernelCokernel, Presentation, RepError, RepMap,
    Representation,
};
