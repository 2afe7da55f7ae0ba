//! The Heisenberg group representation with a fixed central character and
//! its compatible extension by the oscillator representation.
//!
//! On functions of F_q^m the pair (a, b) in F_q^{2m} acts by
//! rho(a,b) f(x) = psi(x.b + a.b/2) f(x+a), the center by psi(t), and the
//! symplectic group by the Schrodinger-model matrices; the defining
//! intertwining law omega(g) rho(v) omega(g)^-1 = rho(gv) is exact and
//! exhaustively tested. This is the input for Fourier-Jacobi style twisted
//! coinvariants.

use super::model::{index_of_point, point, weil_matrices, CMat, WeilModel};
use crate::linalg::Mat;
use crate::scalars::{AddChar, Fq};
use crate::Result;
use num_complex::Complex64;

/// Oscillator model together with the Heisenberg action it normalizes.
#[derive(Debug)]
pub struct HeisenbergWeil {
    pub model: WeilModel,
}

impl HeisenbergWeil {
    pub fn new(psi: &AddChar, n: usize, carrier_bound: u64) -> Result<HeisenbergWeil> {
        Ok(HeisenbergWeil {
            model: weil_matrices(psi, n, carrier_bound)?,
        })
    }

    /// rho((a,b), t): translation part a, modulation part b, center t.
    pub fn rho(&self, v: &[Fq], t: Fq) -> CMat {
        let f = &self.model.psi.field;
        let n = self.model.n;
        assert_eq!(v.len(), 2 * n);
        let (a, b) = v.split_at(n);
        let q = f.q;
        let d = self.model.carrier_dim;
        let mut out = CMat::zero(d);
        let mut ab: Fq = 0;
        for i in 0..n {
            ab = f.add(ab, f.mul(a[i], b[i]));
        }
        let base = f.add(t, f.mul(f.half(), ab));
        for xi in 0..d {
            let x = point(q, n, xi);
            let mut xb: Fq = 0;
            for i in 0..n {
                xb = f.add(xb, f.mul(x[i], b[i]));
            }
            let shifted: Vec<Fq> = (0..n).map(|i| f.add(x[i], a[i])).collect();
            out[(xi, index_of_point(q, &shifted))] = self.model.psi.eval(f.add(base, xb));
        }
        out
    }

    /// The oscillator matrix of g in Sp_2n.
    pub fn omega(&self, g: &Mat) -> Result<CMat> {
        self.model.matrix(g)
    }

    /// Character of the extended action: tr(rho(v, t) omega(g)).
    pub fn extended_value(&self, v: &[Fq], t: Fq, g: &Mat) -> Result<Complex64> {
        Ok(self.rho(v, t).mul(&self.omega(g)?).trace())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_space, Tower};
    use crate::groups::{realize, GroupKind};
    use crate::scalars::{make_field, psi_pair};

    fn all_vectors(q: usize, len: usize) -> Vec<Vec<Fq>> {
        (0..q.pow(len as u32)).map(|i| point(q, len, i)).collect()
    }

    #[test]
    fn heisenberg_law_exhaustive() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, _) = psi_pair(&f);
            let hw = HeisenbergWeil::new(&psi, 1, 4096).unwrap();
            let vs = all_vectors(f.q, 2);
            for v in &vs {
                for w in &vs {
                    // rho(v) rho(w) = psi(<v,w>/2) rho(v+w), <,> from
                    // [[0,I],[-I,0]].
                    let pairing = f.sub(f.mul(v[0], w[1]), f.mul(v[1], w[0]));
                    let lhs = hw.rho(v, 0).mul(&hw.rho(w, 0));
                    let sum: Vec<Fq> = (0..2).map(|i| f.add(v[i], w[i])).collect();
                    let rhs = hw
                        .rho(&sum, 0)
                        .scale(psi.eval(f.mul(f.half(), pairing)));
                    assert!(lhs.approx_eq(&rhs, 1e-9), "q={q} v={v:?} w={w:?}");
                }
            }
        }
    }

    #[test]
    fn central_character() {
        let f = make_field(5).unwrap();
        let (psi, _) = psi_pair(&f);
        let hw = HeisenbergWeil::new(&psi, 1, 4096).unwrap();
        for t in 0..5u8 {
            let m = hw.rho(&[0, 0], t);
            let expect = CMat::identity(5).scale(psi.eval(t));
            assert!(m.approx_eq(&expect, 1e-9));
        }
    }

    #[test]
    fn intertwining_with_the_symplectic_group() {
        let f = make_field(3).unwrap();
        let (psi, psi2) = psi_pair(&f);
        let space = standard_space(&f, Tower::Sp, 2).unwrap();
        let sp = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
        for psi in [&psi, &psi2] {
            let hw = HeisenbergWeil::new(psi, 1, 4096).unwrap();
            for g in sp.iter_mats() {
                let om = hw.omega(&g).unwrap();
                let om_inv = om.conj_transpose();
                for v in all_vectors(3, 2) {
                    let gv: Vec<Fq> = (0..2)
                        .map(|i| {
                            f.add(f.mul(g[(i, 0)], v[0]), f.mul(g[(i, 1)], v[1]))
                        })
                        .collect();
                    let lhs = om.mul(&hw.rho(&v, 0)).mul(&om_inv);
                    let rhs = hw.rho(&gv, 0);
                    assert!(lhs.approx_eq(&rhs, 1e-8), "g={g:?} v={v:?}");
                }
            }
        }
    }

    #[test]
    fn rho_traces() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let hw = HeisenbergWeil::new(&psi, 1, 4096).unwrap();
        for v in all_vectors(3, 2) {
            let tr = hw.rho(&v, 0).trace();
            if v.iter().all(|&c| c == 0) {
                assert!((tr - Complex64::new(3.0, 0.0)).norm() < 1e-9);
            } else {
                assert!(tr.norm() < 1e-9, "v={v:?}");
            }
        }
        let id = Mat::identity(2);
        let ev = hw.extended_value(&[1, 2], 0, &id).unwrap();
        assert!(ev.norm() < 1e-9);
    }
}
