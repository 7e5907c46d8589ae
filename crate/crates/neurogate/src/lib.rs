//! Emulation of two-qubit gate circuits with plain dense networks.
//!
//! Complex 4x4 operators are carried as real 8x8 block matrices so that
//! networks, optimizers and metrics only ever touch `f64`. The crate is
//! organized bottom-up:
//!
//! * [`realrep`] - the complex-to-real embedding and its inverse maps
//! * [`quantum`] - density matrices, gate unitaries, chains, spectra
//! * [`net`] - dense networks, backprop, Adagrad/AdaDelta, weight files
//! * [`sampler`] - seeded dataset generation and CSV export
//! * [`experiments`] - reproducible experiment runners and records
//!
//! Batch work is data-parallel by default (`parallel` feature). Reductions
//! are chunked with a fixed chunk size and folded in index order, so results
//! are bitwise identical whether the parallel or the sequential path ran.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod net;
pub mod quantum;
pub mod realrep;
pub mod sampler;
