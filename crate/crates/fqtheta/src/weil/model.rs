//! Dense Schrodinger-model matrices for Sp_2N(F_q) on the q^N-dimensional
//! carrier of functions on F_q^N, plus the deterministic Bruhat-style
//! factorization every evaluator (matrix or kernel) shares.
//!
//! Generator conventions, fixed by Heisenberg intertwining:
//! lower unipotent [[I,0],[C,I]] acts by multiplication with psi(-x^T C x/2),
//! Levi [[A,0],[0,A^-T]] by leg(det A) f(A^-1 x), and the Fourier element
//! w = [[0,I],[-I,0]] by the Gauss-sum-normalized transform with kernel
//! psi(x . y) / gamma^N. Upper unipotents are reached via u(S) = w L(-S) w^-1.

use crate::linalg::Mat;
use crate::scalars::{legendre, AddChar, Fq};
use crate::{Error, Result};
use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zero(n: usize) -> CMat {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }
    pub fn identity(n: usize) -> CMat {
        let mut m = CMat::zero(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }
    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }
    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }
    pub fn conj_transpose(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }
    pub fn scale(&self, c: Complex64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!(self.n, other.n);
        CMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
    pub fn approx_eq(&self, other: &CMat, tol: f64) -> bool {
        self.n == other.n
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() < tol)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}
impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// One step of the shared factorization of a symplectic matrix.
#[derive(Debug, Clone)]
pub enum Factor {
    /// [[I,0],[C,I]], C symmetric.
    Lower(Mat),
    /// [[A,0],[0,A^-T]].
    Levi(Mat),
    /// w = [[0,I],[-I,0]].
    Fourier,
    /// w^-1.
    FourierInv,
}

/// The symplectic matrix a factor stands for.
pub fn factor_matrix(f: &crate::scalars::FieldCtx, n: usize, factor: &Factor) -> Mat {
    match factor {
        Factor::Lower(c) => {
            let mut m = Mat::identity(2 * n);
            for i in 0..n {
                for j in 0..n {
                    m[(n + i, j)] = c[(i, j)];
                }
            }
            m
        }
        Factor::Levi(a) => {
            let at_inv = a.transpose().inverse(f).unwrap();
            let mut m = Mat::zero(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = a[(i, j)];
                    m[(n + i, n + j)] = at_inv[(i, j)];
                }
            }
            m
        }
        Factor::Fourier => {
            let mut m = Mat::zero(2 * n, 2 * n);
            for i in 0..n {
                m[(i, n + i)] = 1;
                m[(n + i, i)] = f.neg(1);
            }
            m
        }
        Factor::FourierInv => {
            let mut m = Mat::zero(2 * n, 2 * n);
            for i in 0..n {
                m[(i, n + i)] = f.neg(1);
                m[(n + i, i)] = 1;
            }
            m
        }
    }
}

/// Factor g in Sp_2N into Lower/Levi/Fourier steps. Deterministic: a seeded
/// search finds symmetric S with det(CS + D) nonzero, then the parabolic
/// LDU-style split applies; upper unipotents are rewritten through w.
pub fn factorize(f: &crate::scalars::FieldCtx, g: &Mat) -> Result<Vec<Factor>> {
    let n2 = g.rows;
    assert_eq!(n2 % 2, 0);
    let n = n2 / 2;
    if n == 0 {
        return Ok(Vec::new());
    }
    let block = |r0: usize, c0: usize| g.submatrix(r0, c0, n, n);
    let c_blk = block(n, 0);
    let d_blk = block(n, n);
    // Find symmetric S with det(C S + D) != 0.
    let mut s_found: Option<Mat> = None;
    let mut state: u64 = 0;
    for &e in &g.data {
        state = state.wrapping_mul(31).wrapping_add(e as u64 + 1);
    }
    for attempt in 0..20000u32 {
        let s = if attempt == 0 {
            Mat::zero(n, n)
        } else {
            let mut s = Mat::zero(n, n);
            for i in 0..n {
                for j in i..n {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    let v = ((state >> 33) % f.q as u64) as u8;
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
            s
        };
        let cs_d = c_blk.mul(f, &s).add(f, &d_blk);
        if cs_d.det(f) != 0 {
            s_found = Some(s);
            break;
        }
    }
    let s = s_found.ok_or_else(|| Error::Internal("no completing Lagrangian found".into()))?;
    // g * u(S) = [[A',B'],[C',D']] with D' invertible.
    let u_s = {
        let mut m = Mat::identity(2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = s[(i, j)];
            }
        }
        m
    };
    let gs = g.mul(f, &u_s);
    let a2 = gs.submatrix(0, 0, n, n);
    let b2 = gs.submatrix(0, n, n, n);
    let c2 = gs.submatrix(n, 0, n, n);
    let d2 = gs.submatrix(n, n, n, n);
    let d2_inv = d2
        .inverse(f)
        .ok_or_else(|| Error::Internal("completing step failed to invert D".into()))?;
    let b1 = b2.mul(f, &d2_inv); // symmetric
    let c1 = d2_inv.mul(f, &c2); // symmetric
    let m_levi = a2.sub(f, &b1.mul(f, &c2));
    if !b1.is_symmetric() || !c1.is_symmetric() {
        return Err(Error::Internal("parabolic split blocks not symmetric".into()));
    }
    // g = u(B1) m(M) L(C1) u(-S); u(T) = w L(-T) w^-1.
    let factors = vec![
        Factor::Fourier,
        Factor::Lower(b1.neg(f)),
        Factor::FourierInv,
        Factor::Levi(m_levi),
        Factor::Lower(c1),
        Factor::Fourier,
        Factor::Lower(s),
        Factor::FourierInv,
    ];
    // Hard check: the factors multiply back to g.
    let mut prod = Mat::identity(2 * n);
    for fac in &factors {
        prod = prod.mul(f, &factor_matrix(f, n, fac));
    }
    if prod != *g {
        return Err(Error::Internal("factorization does not reproduce input".into()));
    }
    Ok(factors)
}

/// Dense oscillator-representation model on q^N dimensions.
#[derive(Debug)]
pub struct WeilModel {
    pub psi: AddChar,
    /// Half-dimension N of the symplectic space.
    pub n: usize,
    pub carrier_dim: usize,
    gamma_inv_n: Complex64,
}

/// Enumerate F_q^n as base-q digit vectors of the index.
pub fn point(q: usize, n: usize, mut idx: usize) -> Vec<Fq> {
    let mut v = vec![0u8; n];
    for slot in v.iter_mut() {
        *slot = (idx % q) as u8;
        idx /= q;
    }
    v
}

pub fn index_of_point(q: usize, v: &[Fq]) -> usize {
    let mut idx = 0usize;
    for &c in v.iter().rev() {
        idx = idx * q + c as usize;
    }
    idx
}

pub fn weil_matrices(psi: &AddChar, n: usize, carrier_bound: u64) -> Result<WeilModel> {
    let q = psi.field.q;
    let carrier_dim = q
        .checked_pow(n as u32)
        .filter(|&d| d as u64 <= carrier_bound)
        .ok_or(Error::CarrierBound {
            needed: (q as u64).saturating_pow(n as u32),
            bound: carrier_bound,
        })?;
    let gamma = psi.gauss_quadratic(1);
    let gamma_inv_n = Complex64::new(1.0, 0.0) / gamma.powu(n as u32);
    Ok(WeilModel {
        psi: psi.clone(),
        n,
        carrier_dim,
        gamma_inv_n,
    })
}

impl WeilModel {
    fn dot(&self, a: &[Fq], b: &[Fq]) -> Fq {
        let f = &self.psi.field;
        let mut acc: Fq = 0;
        for i in 0..a.len() {
            acc = f.add(acc, f.mul(a[i], b[i]));
        }
        acc
    }
    /// The matrix of one factor.
    pub fn factor_cmat(&self, factor: &Factor) -> CMat {
        let f = &self.psi.field;
        let q = f.q;
        let d = self.carrier_dim;
        let n = self.n;
        let mut out = CMat::zero(d);
        match factor {
            Factor::Lower(c) => {
                let neg_half = f.neg(f.half());
                for xi in 0..d {
                    let x = point(q, n, xi);
                    let mut e: Fq = 0;
                    for i in 0..n {
                        for j in 0..n {
                            e = f.add(e, f.mul(x[i], f.mul(c[(i, j)], x[j])));
                        }
                    }
                    out[(xi, xi)] = self.psi.eval(f.mul(neg_half, e));
                }
            }
            Factor::Levi(a) => {
                let leg = legendre(f, a.det(f));
                let sign = Complex64::new(leg as f64, 0.0);
                let a_inv = a.inverse(f).unwrap();
                for xi in 0..d {
                    let x = point(q, n, xi);
                    // y = A^-1 x; entry (x, y).
                    let mut y = vec![0u8; n];
                    for i in 0..n {
                        let mut acc: Fq = 0;
                        for j in 0..n {
                            acc = f.add(acc, f.mul(a_inv[(i, j)], x[j]));
                        }
                        y[i] = acc;
                    }
                    out[(xi, index_of_point(q, &y))] = sign;
                }
            }
            Factor::Fourier => {
                for xi in 0..d {
                    let x = point(q, n, xi);
                    for yi in 0..d {
                        let y = point(q, n, yi);
                        out[(xi, yi)] = self.gamma_inv_n * self.psi.eval(self.dot(&x, &y));
                    }
                }
            }
            Factor::FourierInv => {
                let c = self.gamma_inv_n.conj();
                for xi in 0..d {
                    let x = point(q, n, xi);
                    for yi in 0..d {
                        let y = point(q, n, yi);
                        out[(xi, yi)] = c * self.psi.eval(f.neg(self.dot(&x, &y)));
                    }
                }
            }
        }
        out
    }
    /// The representing matrix of an arbitrary symplectic element.
    pub fn matrix(&self, g: &Mat) -> Result<CMat> {
        let f = &self.psi.field;
        assert_eq!(g.rows, 2 * self.n);
        let mut out = CMat::identity(self.carrier_dim);
        for fac in factorize(f, g)? {
            out = out.mul(&self.factor_cmat(&fac));
        }
        Ok(out)
    }
    /// The carrier involution f(x) -> f(-x), which commutes with the image.
    pub fn parity_involution(&self) -> CMat {
        let f = &self.psi.field;
        let q = f.q;
        let d = self.carrier_dim;
        let mut out = CMat::zero(d);
        for xi in 0..d {
            let x = point(q, self.n, xi);
            let mx: Vec<Fq> = x.iter().map(|&c| f.neg(c)).collect();
            out[(xi, index_of_point(q, &mx))] = Complex64::new(1.0, 0.0);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{standard_space, Tower};
    use crate::groups::{realize, GroupKind};
    use crate::linalg::j_std;
    use crate::scalars::{make_field, psi_pair};

    fn rng_stream(seed: u64) -> impl FnMut(u64) -> u64 {
        let mut state = seed;
        move |m| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) % m
        }
    }

    #[test]
    fn identity_and_trace() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let model = weil_matrices(&psi, 2, 4096).unwrap();
        let id = Mat::identity(4);
        let m = model.matrix(&id).unwrap();
        assert!(m.approx_eq(&CMat::identity(9), 1e-9));
        assert!((m.trace() - Complex64::new(9.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn homomorphism_on_random_pairs() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, psi2) = psi_pair(&f);
            let space = standard_space(&f, Tower::Sp, 2).unwrap();
            let g = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
            for psi in [&psi, &psi2] {
                let model = weil_matrices(psi, 1, 4096).unwrap();
                let mut rnd = rng_stream(0xfeedface + q);
                for _ in 0..200 {
                    let a = crate::groups::unpack(&f, 2, g.elements[rnd(g.order) as usize]);
                    let b = crate::groups::unpack(&f, 2, g.elements[rnd(g.order) as usize]);
                    let ma = model.matrix(&a).unwrap();
                    let mb = model.matrix(&b).unwrap();
                    let mab = model.matrix(&a.mul(&f, &b)).unwrap();
                    assert!(
                        ma.mul(&mb).approx_eq(&mab, 1e-9),
                        "homomorphism failed q={q}"
                    );
                }
            }
        }
    }

    #[test]
    fn homomorphism_sp4_sampled() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let space = standard_space(&f, Tower::Sp, 4).unwrap();
        let g = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
        let model = weil_matrices(&psi, 2, 4096).unwrap();
        let mut rnd = rng_stream(0xabcdef);
        for _ in 0..60 {
            let a = crate::groups::unpack(&f, 4, g.elements[rnd(g.order) as usize]);
            let b = crate::groups::unpack(&f, 4, g.elements[rnd(g.order) as usize]);
            let ma = model.matrix(&a).unwrap();
            let mb = model.matrix(&b).unwrap();
            let mab = model.matrix(&a.mul(&f, &b)).unwrap();
            assert!(ma.mul(&mb).approx_eq(&mab, 1e-9));
        }
    }

    #[test]
    fn parity_involution_commutes_and_splits() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let space = standard_space(&f, Tower::Sp, 2).unwrap();
        let g = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
        let model = weil_matrices(&psi, 1, 4096).unwrap();
        let p = model.parity_involution();
        // P^2 = 1 and P commutes with every class representative's image.
        assert!(p.mul(&p).approx_eq(&CMat::identity(3), 1e-9));
        for c in 0..g.num_classes() as u32 {
            let m = model.matrix(&g.class_rep(c)).unwrap();
            assert!(p.mul(&m).approx_eq(&m.mul(&p), 1e-9));
        }
        // Eigenspace dimensions: tr(1 +- P)/2 = 2 and 1.
        let even = (Complex64::new(3.0, 0.0) + p.trace()) / 2.0;
        let odd = (Complex64::new(3.0, 0.0) - p.trace()) / 2.0;
        assert!((even - Complex64::new(2.0, 0.0)).norm() < 1e-9);
        assert!((odd - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn unitarity_of_generators() {
        let f = make_field(5).unwrap();
        let (psi, _) = psi_pair(&f);
        let model = weil_matrices(&psi, 1, 4096).unwrap();
        for fac in [
            Factor::Fourier,
            Factor::FourierInv,
            Factor::Levi(Mat::from_rows(&[&[2]])),
            Factor::Lower(Mat::from_rows(&[&[3]])),
        ] {
            let m = model.factor_cmat(&fac);
            assert!(m.mul(&m.conj_transpose()).approx_eq(&CMat::identity(5), 1e-9));
        }
    }

    #[test]
    fn factorization_reproduces_all_sl2_f3() {
        let f = make_field(3).unwrap();
        let space = standard_space(&f, Tower::Sp, 2).unwrap();
        let g = realize(&space, GroupKind::Isometry, 1 << 24).unwrap();
        for m in g.iter_mats() {
            // factorize() internally asserts the product reproduces m.
            factorize(&f, &m).unwrap();
        }
        let _ = j_std(&f, 1);
    }
}
