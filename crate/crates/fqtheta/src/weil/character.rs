//! Exact closed-form character of the oscillator representation of
//! Sp_2N(F_q), evaluated without ever building a q^N-dimensional object.
//!
//! An element is factored into Fourier / Levi / lower-unipotent steps (the
//! same factorization the dense model uses), each step contributes a small
//! Gaussian kernel, and the trace is the full contraction of their chain
//! product, computed symbolically by the Gaussian-kernel calculus. The
//! evaluator must pass `run_validation_gate` (exact agreement with dense
//! matrix traces over three whole groups) before anything downstream is
//! allowed to trust it.

use super::kernel::{sum_out, Gaussian};
use super::model::{factorize, weil_matrices, Factor};
use crate::forms::{standard_space, Tower};
use crate::groups::{realize, GroupKind};
use crate::linalg::Mat;
use crate::scalars::{legendre, make_field, psi_pair, AddChar};
use crate::{Error, Result};
use num_complex::Complex64;

/// Closed-form character evaluator for the oscillator representation.
#[derive(Debug, Clone)]
pub struct WeilCharacter {
    pub psi: AddChar,
    /// Half-dimension N of the symplectic space.
    pub n: usize,
    gamma_inv_n: Complex64,
}

pub fn weil_character(psi: &AddChar, n: usize) -> WeilCharacter {
    let gamma = psi.gauss_quadratic(1);
    WeilCharacter {
        psi: psi.clone(),
        n,
        gamma_inv_n: Complex64::new(1.0, 0.0) / gamma.powu(n as u32),
    }
}

impl WeilCharacter {
    /// chi(g), exact up to f64 roundoff in the root-of-unity arithmetic.
    pub fn value(&self, g: &Mat) -> Result<Complex64> {
        let f = &self.psi.field;
        let n = self.n;
        assert_eq!(g.rows, 2 * n, "element size does not match the character");
        if n == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let factors = factorize(f, g)?;
        let nf = factors.len();
        // Chain variables: block t (n vars each) is the input of factor t;
        // its output is block t+1 mod nf, closing the trace loop.
        let mut big = Gaussian::unconstrained(nf * n, Complex64::new(1.0, 0.0));
        let neg_half = f.neg(f.half());
        for (t, fac) in factors.iter().enumerate() {
            let u = t * n;
            let v = ((t + 1) % nf) * n;
            match fac {
                Factor::Lower(c) => {
                    for i in 0..n {
                        for j in 0..n {
                            let add = f.mul(neg_half, c[(i, j)]);
                            big.q_mat[(u + i, u + j)] = f.add(big.q_mat[(u + i, u + j)], add);
                        }
                    }
                    for i in 0..n {
                        let mut row = vec![0u8; nf * n];
                        row[u + i] = 1;
                        row[v + i] = f.add(row[v + i], f.neg(1));
                        big.push_constraint(row, 0);
                    }
                }
                Factor::Levi(a) => {
                    big.c *= Complex64::new(legendre(f, a.det(f)) as f64, 0.0);
                    for i in 0..n {
                        let mut row = vec![0u8; nf * n];
                        for j in 0..n {
                            row[v + j] = a[(i, j)];
                        }
                        row[u + i] = f.add(row[u + i], f.neg(1));
                        big.push_constraint(row, 0);
                    }
                }
                Factor::Fourier => {
                    big.c *= self.gamma_inv_n;
                    for i in 0..n {
                        big.q_mat[(u + i, v + i)] = f.add(big.q_mat[(u + i, v + i)], 1);
                    }
                }
                Factor::FourierInv => {
                    big.c *= self.gamma_inv_n.conj();
                    for i in 0..n {
                        big.q_mat[(u + i, v + i)] =
                            f.add(big.q_mat[(u + i, v + i)], f.neg(1));
                    }
                }
            }
        }
        let out = sum_out(&self.psi, &big, &[])?;
        Ok(out.eval(&self.psi, &[]))
    }

    /// The even/odd split: chi_eps(g) = (chi(g) + eps * s * chi(-g)) / 2 with
    /// s = leg(-1)^N, the scalar relating the carrier parity involution to
    /// the image of -1.
    pub fn parity_value(&self, g: &Mat, eps: i8) -> Result<Complex64> {
        let f = &self.psi.field;
        let s = if self.n % 2 == 0 {
            1.0
        } else {
            legendre(f, f.neg(1)) as f64
        };
        let neg_g = g.neg(f);
        let a = self.value(g)?;
        let b = self.value(&neg_g)?;
        Ok((a + Complex64::new(eps as f64 * s, 0.0) * b) / 2.0)
    }
}

/// Hard gate: the closed-form character must reproduce the dense-model trace
/// on every conjugacy class of Sp_2(F_3), Sp_2(F_5) and Sp_4(F_3), for both
/// additive character classes. Any mismatch is a fatal integrity error.
pub fn run_validation_gate() -> Result<()> {
    for (q, dim) in [(3u64, 2usize), (5, 2), (3, 4)] {
        let f = make_field(q)?;
        let (psi, psi2) = psi_pair(&f);
        let space = standard_space(&f, Tower::Sp, dim)?;
        let group = realize(&space, GroupKind::Isometry, 1 << 24)?;
        for psi in [&psi, &psi2] {
            let model = weil_matrices(psi, dim / 2, crate::DEFAULT_CARRIER_BOUND)?;
            let chi = weil_character(psi, dim / 2);
            for c in 0..group.num_classes() as u32 {
                let rep = group.class_rep(c);
                let dense = model.matrix(&rep)?.trace();
                let closed = chi.value(&rep)?;
                if (dense - closed).norm() > 1e-8 {
                    return Err(Error::ValidationGate(format!(
                        "oscillator character mismatch: q={q} dim={dim} class={c} \
                         dense={dense} closed={closed}"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupRealization;
    use std::sync::Arc;

    #[test]
    fn gate_passes() {
        run_validation_gate().unwrap();
    }

    fn sp_group(q: u64, dim: usize) -> (Arc<crate::scalars::FieldCtx>, GroupRealization) {
        let f = make_field(q).unwrap();
        let space = standard_space(&f, Tower::Sp, dim).unwrap();
        let g = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
        (f, g)
    }

    #[test]
    fn magnitude_law_fixed_space_dimension() {
        // |chi(g)|^2 = q^{dim ker(g - 1)} on the symplectic space.
        for (q, dim) in [(3u64, 2usize), (5, 2), (3, 4)] {
            let (f, group) = sp_group(q, dim);
            let (psi, _) = psi_pair(&f);
            let chi = weil_character(&psi, dim / 2);
            for c in 0..group.num_classes() as u32 {
                let rep = group.class_rep(c);
                let g1 = rep.sub(&f, &Mat::identity(dim));
                let fixed = dim - g1.rank(&f);
                let val = chi.value(&rep).unwrap();
                assert!(
                    (val.norm_sqr() - (q as f64).powi(fixed as i32)).abs() < 1e-7,
                    "q={q} dim={dim} class={c}"
                );
            }
        }
    }

    #[test]
    fn multiplicative_over_direct_sums() {
        // chi_{N1+N2}(g + h) = chi_{N1}(g) chi_{N2}(h) for the symplectic
        // direct sum aligned with the block convention [[A,B],[C,D]].
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let (_, g2) = sp_group(3, 2);
        let chi1 = weil_character(&psi, 1);
        let chi2 = weil_character(&psi, 2);
        let embed = |a: &Mat, b: &Mat| {
            let mut m = Mat::zero(4, 4);
            let idx = [0usize, 2, 1, 3]; // interleave the two 1-dim pairs
            for i in 0..2 {
                for j in 0..2 {
                    m[(idx[i], idx[j])] = a[(i, j)];
                    m[(idx[i + 2], idx[j + 2])] = b[(i, j)];
                }
            }
            m
        };
        for ca in 0..g2.num_classes() as u32 {
            for cb in 0..g2.num_classes() as u32 {
                let a = g2.class_rep(ca);
                let b = g2.class_rep(cb);
                let big = embed(&a, &b);
                let lhs = chi2.value(&big).unwrap();
                let rhs = chi1.value(&a).unwrap() * chi1.value(&b).unwrap();
                assert!((lhs - rhs).norm() < 1e-8, "classes {ca},{cb}");
            }
        }
    }

    #[test]
    fn parity_split_dimensions() {
        for (q, dim) in [(3u64, 2usize), (5, 2), (3, 4)] {
            let f = make_field(q).unwrap();
            let (psi, _) = psi_pair(&f);
            let chi = weil_character(&psi, dim / 2);
            let id = Mat::identity(dim);
            let qn = (q as f64).powi((dim / 2) as i32);
            let even = chi.parity_value(&id, 1).unwrap();
            let odd = chi.parity_value(&id, -1).unwrap();
            assert!((even.re - (qn + 1.0) / 2.0).abs() < 1e-8);
            assert!((odd.re - (qn - 1.0) / 2.0).abs() < 1e-8);
            assert!(even.im.abs() < 1e-10 && odd.im.abs() < 1e-10);
        }
    }

    #[test]
    fn psi_class_matters_but_magnitudes_agree() {
        let f = make_field(3).unwrap();
        let (psi, psi2) = psi_pair(&f);
        let (_, group) = sp_group(3, 2);
        let chi = weil_character(&psi, 1);
        let chi2 = weil_character(&psi2, 1);
        let mut differ = false;
        for c in 0..group.num_classes() as u32 {
            let rep = group.class_rep(c);
            let a = chi.value(&rep).unwrap();
            let b = chi2.value(&rep).unwrap();
            assert!((a.norm() - b.norm()).abs() < 1e-8);
            if (a - b).norm() > 1e-6 {
                differ = true;
            }
        }
        assert!(differ, "the two additive character classes must be seen apart");
    }
}
