//! Exact machinery for graph regularity experiments: weighted graphs and
//! partitions, an exact irregularity oracle, density-increment refinement
//! with tower bookkeeping, spectral mixing bounds, a parameterized
//! tower-type lower-bound construction, randomized rounding, and partition
//! diagnostics.

pub mod construct;
pub mod deviation;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod irregularity;
pub mod partition;
pub mod realize;
pub mod refine;
pub mod spectral;
pub mod tower;

pub use error::{Error, Result};
pub use graph::{parse_wgraph, write_wgraph, VertexSet, WeightRange, WeightedGraph};
pub use irregularity::{
    irreg_exact, irreg_exact_with_cap, irreg_partition, irreg_partition_with_cap,
    IrregularityWitness,
};
pub use partition::{mean_square_density, parse_partition, write_partition, VertexPartition};
pub use refine::{refine_step, regularize, RefinementRun};
