//! Seeded workload generation, the workload CSV format and the bundled
//! twenty-case suite.

mod gen;
mod io;
pub mod suite;

pub use gen::{generate, GenError, GenSpec, ValueMode};
pub use io::{from_csv_str, parse, serialize, to_csv_string, WorkloadIoError};
