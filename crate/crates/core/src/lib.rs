//! Online bin stretching with stretching factor 3/2.
//!
//! Items arrive one at a time and must be packed immediately into one of
//! `m` bins. The input is promised to fit into `m` bins of capacity 12; the
//! two-phase packer in [`engine`] never needs more than capacity 18.
//!
//! Around the packer sit an exact offline [`oracle`], instance
//! [`generator`]s that attach a packing witness, an [`adversary`] search,
//! and the [`audit`] checks of the packer's invariants.

pub mod adversary;
pub mod audit;
pub mod engine;
pub mod error;
pub mod format;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod rat;

pub use engine::{run, run_with, Algorithm, OnlinePacker, PackerState, RunResult};
pub use error::{Error, Result};
pub use model::{BinState, BinType, Instance, Item, ItemClass, Packing};
pub use rat::Rat;
