//! The oscillator representation of Sp_2N(F_q): dense Schrodinger-model
//! matrices on a q^N carrier (validation path), an exact closed-form
//! character built on a symbolic Gaussian-kernel calculus (production path,
//! no big objects), the Heisenberg-extended model, and dual-pair restriction.
//!
//! The closed-form character must pass a hard validation gate against the
//! matrix model before anything downstream consumes it.

pub mod character;
pub mod heisenberg;
pub mod kernel;
pub mod model;
pub mod pair;

pub use character::{weil_character, WeilCharacter};
pub use heisenberg::HeisenbergWeil;
pub use model::{weil_matrices, CMat, WeilModel};
pub use pair::{dual_pair_restrict, PairCharacter};
