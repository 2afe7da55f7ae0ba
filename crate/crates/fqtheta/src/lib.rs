//! Exact character-theoretic computations for finite symplectic and orthogonal
//! groups: Weil representations, theta lifts along Witt towers, and the Bessel
//! and Fourier-Jacobi descent operators, at desk scale (q <= 9, group orders
//! up to 2e7).
//!
//! Everything downstream of [`groups`] works with class functions (one complex
//! value per conjugacy class); dense carrier-space models appear only in
//! [`weil`] (small validation models) and [`oracles`] (independent brute-force
//! cross-checks).

pub mod cache;
pub mod classfun;
pub mod descent;
pub mod error;
pub mod forms;
pub mod groups;
pub mod linalg;
pub mod oracles;
pub mod scalars;
pub mod theta;
pub mod unipotent;
pub mod weil;

pub use error::{Error, Result};

/// Default cap on realized group orders; requests above it are refused.
pub const DEFAULT_ORDER_BOUND: u64 = 20_000_000;
/// Default cap on dense Weil-model carrier dimension q^N.
pub const DEFAULT_CARRIER_BOUND: u64 = 4096;

/// Integer rounding with the numeric-integrity assertion used for every
/// multiplicity and dimension in the crate.
pub fn round_int(x: f64) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() >= 1e-6 {
        return Err(Error::NumericIntegrity(format!(
            "value {x} is not within 1e-6 of an integer"
        )));
    }
    Ok(r as i64)
}
