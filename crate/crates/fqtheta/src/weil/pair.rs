//! Restriction of the oscillator representation to a reductive dual pair
//! O(V) x Sp(W) inside Sp(V tensor W).
//!
//! The tensor space carries the symplectic form G_V kron J_W. A standard
//! symplectic basis T is computed once; a pair (g, h) is evaluated as the
//! closed-form oscillator character at T^-1 (g kron h) T. For odd-dimensional
//! V the value genuinely depends on the square class of the additive
//! character, so the character is carried explicitly.

use super::character::{weil_character, WeilCharacter};
use crate::linalg::{j_std, symplectic_basis, Mat};
use crate::scalars::AddChar;
use crate::{Error, Result};
use num_complex::Complex64;

/// The character of the oscillator representation of Sp(V kron W), viewed as
/// a function of commuting pairs (g, h) in O(V) x Sp(W).
#[derive(Debug, Clone)]
pub struct PairCharacter {
    pub psi: AddChar,
    /// Gram matrix of the orthogonal side V.
    pub o_gram: Mat,
    /// Dimension 2n of the symplectic side W.
    pub sp_dim: usize,
    chi: WeilCharacter,
    t: Mat,
    t_inv: Mat,
}

pub fn dual_pair_restrict(psi: &AddChar, o_gram: &Mat, sp_dim: usize) -> Result<PairCharacter> {
    let f = &psi.field;
    if o_gram.rows != o_gram.cols || !o_gram.is_symmetric() || sp_dim % 2 != 0 {
        return Err(Error::BadSpace("dual pair needs symmetric Gram and even sp side".into()));
    }
    let m = o_gram.rows;
    let big = o_gram.kronecker(f, &j_std(f, sp_dim / 2));
    let half = m * sp_dim / 2;
    let (t, t_inv) = if half == 0 {
        (Mat::identity(0), Mat::identity(0))
    } else {
        let t = symplectic_basis(f, &big)?;
        let t_inv = t
            .inverse(f)
            .ok_or_else(|| Error::Internal("symplectic basis not invertible".into()))?;
        (t, t_inv)
    };
    Ok(PairCharacter {
        psi: psi.clone(),
        o_gram: o_gram.clone(),
        sp_dim,
        chi: weil_character(psi, half),
        t,
        t_inv,
    })
}

impl PairCharacter {
    /// chi_omega(g, h) for g in O(V), h in Sp(W).
    pub fn value(&self, g_o: &Mat, g_sp: &Mat) -> Result<Complex64> {
        let f = &self.psi.field;
        assert_eq!(g_o.rows, self.o_gram.rows);
        assert_eq!(g_sp.rows, self.sp_dim);
        if self.o_gram.rows * self.sp_dim == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let big = g_o.kronecker(f, g_sp);
        let std = self.t_inv.mul(f, &big).mul(f, &self.t);
        self.chi.value(&std)
    }

    /// Carrier dimension q^{dim V * dim W / 2}.
    pub fn dim(&self) -> f64 {
        (self.psi.field.q as f64).powi((self.o_gram.rows * self.sp_dim / 2) as i32)
    }
}
