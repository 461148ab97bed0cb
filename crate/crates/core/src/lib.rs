//! Kumjian completion of labelled Bratteli diagrams, with exact checks of the
//! structure of the resulting graph algebra.
//!
//! Given a diagram `E`, [`complete`] builds `KE` by adding one vertex per
//! level with edges that absorb each label's deficiency `σ_v`, so that every
//! label `d_v` becomes the number of paths from the added set `S` to `v`. The
//! [`rep`] module then builds the path-space Cuntz-Krieger family of a finite
//! truncation as 0/1 integer matrices and verifies the matrix-unit, embedding
//! and corner identities exactly; [`closure`] checks that both corners are
//! full.

pub mod bd1;
pub mod closure;
pub mod diagram;
pub mod dot;
pub mod error;
pub mod filtration;
pub mod kumjian;
pub mod linalg;
pub mod paths;
pub mod rep;
pub mod report;

pub use bd1::{parse_bd1, write_bd1, ParseError, ParseErrorKind};
pub use closure::{
    fullness_check, fullness_check_diagram, hereditary_saturated_closure, ClosureResult, FullnessReport,
};
pub use diagram::{BratteliDiagram, EdgeSlot, Finding, Severity, SigmaVector, ValidationReport, VertexId};
pub use dot::to_dot;
pub use error::DiagramError;
pub use filtration::{diagram_for_sequence_check, filtration_dims, FiltrationDims};
pub use kumjian::{complete, is_unital_case, KumjianCompletion};
pub use paths::{count_paths_from_set, enumerate_paths, multiplicity, Path, Step};
pub use rep::{
    build_rep, corner_analysis, corner_ledger, verify_ck, verify_embedding, verify_matrix_units, CornerReport,
    PairBudget, PathSpaceRep,
};
pub use report::{verify_all, VerifyOptions, VerifyReport};
