//! Extract-method opportunity detection by successive edge contraction.
//!
//! Source is lowered to a segment IR ([`ir`], [`frontend`]) and turned into a
//! structure dependence graph ([`sdg`]). The [`engine`] then contracts it block
//! by block, guided by the scores in [`metrics`]. [`eval`] compares the
//! resulting suggestions with marked ground truth.

pub mod engine;
pub mod error;
pub mod eval;
pub mod frontend;
pub mod ir;
pub mod metrics;
pub mod sdg;
pub mod suggestions;

pub use engine::{segment, Emo, Segmentation, SegmentationConfig, Segmenter};
pub use error::{EngineError, EvalError, FrontendError, GraphError, IrError, MetricsError};
pub use frontend::{translate, FrontendOptions, SourceMap, Translation};
pub use ir::{parse_ir, validate, IrProgram, IrStatement, StatementKind};
pub use sdg::{build_sdg, Sdg, VertexId, VertexKind};
