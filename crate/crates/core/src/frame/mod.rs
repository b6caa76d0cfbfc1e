//! Delsarte-Goethals matrix sets and the frames built from them.
//!
//! A column `(P, b)` of G(m, r) has unnormalized entries `i^e(t)` with
//! `e(t) = wt(d_P) + 2 wt(b) + t P t^T + 2 b t^T (mod 4)`, `t` ranging over
//! the 2^m binary m-tuples. Exponents are kept in Z4 throughout; complex values
//! only appear at the numeric boundary.

mod dg_frame;
mod dg_set;
mod exponents;
mod io;

pub use dg_frame::{
    column_group_product, column_group_product_position, frame_entry, synthesize_frame,
    synthesize_frame_with_limit, ColumnIndex, Frame, FrameColumn, DEFAULT_MATERIALIZE_LIMIT,
};
pub use dg_set::{build_dg_set, dg_matrix, DgParams, DgSet, MAX_DG_SET_SIZE};
pub use exponents::{unit_power, ExponentMatrix};
pub use io::{write_complex_csv, FrameFile, FrameHeader, COLUMN_ORDERING};
