//! Discrete algorithms with random data: unshifted QR iteration and
//! conjugate gradient.

mod cg;
mod qr;

pub use cg::{cg_halting, wishart_system, CgRun};
pub use qr::{qr_halting, qr_step, qr_step_matrix, QrRun};
