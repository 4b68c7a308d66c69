//! Types over parameter sets: partial types as filters of solution sets,
//! rank-bounded complete-type partitions, and saturation reports.

mod dlo;
mod partition;
mod partial;
mod saturation;

pub use dlo::{count_dlo_types, DloTypeSpace, DloTypeShape};
pub use partial::{check_partial_type, realizations, PartialType, TypeCheck, TypeError};
pub use partition::{complete_types, TypePartition, TypePartitionConfig};
pub use saturation::{saturation_report, SaturationReport, TypeRealization};
