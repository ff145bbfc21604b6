//! Numerical spectral geometry of planar domains and model surfaces.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod bounds;
pub mod covering;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod oracle;
pub mod pipeline;
pub mod sparse;

pub use domain::{
    generate_domain, invariants, scale_domain, Domain, DomainKind, DomainSpec, GeometricInvariants,
};
pub use eigen::{counting_function, solve_lowest, SpectrumSummary};
pub use error::{Error, Result};
pub use fem::{assemble, AssembledProblem, BoundaryCondition};
pub use geometry::Point;
pub use mesh::{refine, triangulate, TriMesh};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/domains.md")]
    mod domains {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/covering.md")]
    mod covering {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
