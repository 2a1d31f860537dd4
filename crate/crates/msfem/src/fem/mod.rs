//! Finite element core: quadrature, hierarchical bases, spaces, block
//! assembly and essential boundary conditions.

pub mod assembly;
pub mod basis;
pub mod essential;
pub mod quadrature;
pub mod space;

pub use assembly::{
    assemble, default_quadrature_degree, BilinearTerm, BlockLayout, BlockSystem, Integrand, LinearTerm, ReducedSystem,
    RegionFilter, Source, SystemSolution,
};
pub use basis::{h1_eval, hcurl_eval, ScalarValues, VectorValues};
pub use essential::{apply_essential, constrain_edges, tagged_edges, EssentialBc, TraceData};
pub use quadrature::{quadrature, QuadratureRule};
pub use space::{edge_field_at, scalar_field_at, support_boundary_edges, EdgeSpace, ElementGeometry, FeSpace, ScalarSpace, Support};
