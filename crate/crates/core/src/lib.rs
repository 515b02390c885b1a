//! Threshold-voltage simulator of MLC NAND flash two-step programming.
//!
//! The crate models one all-bit-line flash block at the level of per-cell
//! threshold voltages, the on-chip two-step program algorithm, cell-to-cell
//! program interference, read disturb, a controller with ECC and three
//! mitigation mechanisms, and scenario drivers for characterization, exploits
//! and lifetime estimation.

pub mod array;
pub mod config;
pub mod controller;
pub mod disturb;
pub mod error;
pub mod oracle;
pub mod program;
pub mod report;
pub mod scenarios;

mod rng;

pub use array::{
    new_block, page_to_cells, shadow_order, Block, Cell, PageAddress, PageData, PageKind,
    PageSlot, Phase, State, StateModel,
};
pub use error::{Error, Result};
