//! KO-valued indices and spectral flow of real skew-adjoint operators with Clifford symmetries.
//!
//! The crate works entirely with dense or banded real matrices. Complex models are
//! carried as pairs of real matrices and restricted to the fixed space of a real
//! structure before any index is taken.

pub mod abs_index;
pub mod banded;
pub mod cli;
pub mod clifford;
pub mod error;
pub mod flow;
pub mod json;
pub mod linalg;
pub mod models;
pub mod pairs;
pub mod props;
pub mod random;
pub mod rs_verify;

pub use abs_index::{abs_class, forgetful, group_of, Group, KOClass};
pub use clifford::{Chirality, CliffordRep, Signature};
pub use error::{Error, Result};
pub use linalg::Mat;
