//! Deterministic isolation of perfect matchings on genus-g grid graphs.
//!
//! The crate is organised around the pipeline
//!
//! 1. [`grid`]: the class of genus-g grid graphs (a `2m x 2m` grid whose
//!    border is cut into `4g` glued segments),
//! 2. [`weights`]: the `4g + 1` elementary edge weights, their combination
//!    into a single big-integer weight `W`, and circulations,
//! 3. [`cycles`]: exhaustive simple-cycle enumeration and the checks that
//!    every cycle has non-zero circulation under `W`,
//! 4. [`matching`]: the determinant-based weight enumerator and the
//!    decision / construction / uniqueness procedures built on it,
//! 5. [`schema`]: polygonal-schema words and their normalisation,
//! 6. [`double_cover`]: the two-sheeted cover reducing non-orientable
//!    instances to orientable ones.

pub mod cycles;
pub mod double_cover;
pub mod graph;
pub mod grid;
pub mod matching;
pub mod poly;
pub mod schema;
pub mod weights;

pub use cycles::{
    enumerate_simple_cycles, verify_isolation, Crossing, CrossingDir, CycleClass, IsolationReport, OracleError,
};
pub use double_cover::{CoverCase, CoverError, LabeledGraph};
pub use graph::{Cycle, UGraph};
pub use grid::{Cell, Corner, GenusGrid, GridError, Position, SegmentId, SegmentLayout, VertexId};
pub use matching::{Matching, MatchingError, MatchingOracle, WeightEnumerator};
pub use poly::Poly;
pub use schema::{NormalForm, Rule, SchemaError, SchemaWord, SurfaceInvariants};
pub use weights::{CombinedWeight, ElementaryWeight};

/// Default cap on the number of simple cycles examined per instance.
pub const DEFAULT_MAX_CYCLES: u64 = 1_000_000;
