//! Comparison policies.

pub mod besteffort;
pub mod classic;

pub use besteffort::{dasa_select, feasible, lbesa_select, Dasa, Lbesa, PvdEntry, TentativeSchedule};
pub use classic::{edf_select, fcfs_select, rr_select, Edf, Fcfs, RoundRobin, RrConfig};
