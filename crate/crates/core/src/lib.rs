//! Deterministic Delsarte-Goethals sensing frames, statistical restricted
//! isometry checks, and linear SVM learning in the compressed domain.

pub mod error;
pub mod f2;
pub mod fld;
pub mod frame;
pub mod learn;
pub mod rng;
pub mod strip;
pub mod svm;

pub use error::{Error, Result};
