//! The finite model: atomized probability space, target space, measures,
//! step functions, operators and groupings.

mod document;
mod grouping;
mod measure;
mod partition;
mod space;

pub use document::MeasureDocument;
pub use grouping::{
    bell, enumerate_groupings, grouping_count, Grouping, GroupingKind, Groupings, ALL_GROUPINGS_CAP,
    CONTIGUOUS_GROUPINGS_CAP,
};
pub use measure::{
    measure_from_density, measure_from_operator, operator_from_measure, DiscreteOperator, StepFunction, VectorMeasure,
};
pub use partition::AtomPartition;
pub use space::{NormKind, NormedSpace};
