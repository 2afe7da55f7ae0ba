//! Dense matrices over F_q (u8 entries indexing a `FieldCtx`), with the exact
//! linear algebra the rest of the crate needs: solving, kernels, congruence
//! diagonalization of symmetric forms, symplectic basis extraction, and the
//! closed-form Gauss sum of a quadratic exponential over F_q^m.

use crate::scalars::{legendre, AddChar, FieldCtx, Fq};
use crate::{Error, Result};
use num_complex::Complex64;

/// A rows x cols matrix over F_q, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Fq>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }
    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }
    pub fn from_rows(rows: &[&[Fq]]) -> Mat {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }
    /// Column vector from a slice.
    pub fn col_vec(v: &[Fq]) -> Mat {
        Mat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }
    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }
    pub fn mul(&self, f: &FieldCtx, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let t = f.mul(a, other[(k, j)]);
                    out[(i, j)] = f.add(out[(i, j)], t);
                }
            }
        }
        out
    }
    pub fn add(&self, f: &FieldCtx, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
    pub fn sub(&self, f: &FieldCtx, other: &Mat) -> Mat {
        self.add(f, &other.scale(f, f.neg(1)))
    }
    pub fn scale(&self, f: &FieldCtx, c: Fq) -> Mat {
        let data = self.data.iter().map(|&a| f.mul(c, a)).collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
    pub fn neg(&self, f: &FieldCtx) -> Mat {
        self.scale(f, f.neg(1))
    }
    /// Row-reduce in place; returns (rank, pivot columns, det accumulated on
    /// the square part). Used by `rank`, `inverse`, `solve`, `kernel`.
    fn rref(&self, f: &FieldCtx) -> (Mat, usize, Vec<usize>, Fq) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut det: Fq = 1;
        let mut r = 0;
        for c in 0..m.cols {
            let Some(pr) = (r..m.rows).find(|&i| m[(i, c)] != 0) else {
                det = 0;
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
                det = f.neg(det);
            }
            let piv = m[(r, c)];
            det = f.mul(det, piv);
            let pinv = f.inv(piv);
            for j in 0..m.cols {
                m[(r, j)] = f.mul(pinv, m[(r, j)]);
            }
            for i in 0..m.rows {
                if i != r && m[(i, c)] != 0 {
                    let factor = m[(i, c)];
                    for j in 0..m.cols {
                        let t = f.mul(factor, m[(r, j)]);
                        m[(i, j)] = f.sub(m[(i, j)], t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, r, pivots, det)
    }
    pub fn rank(&self, f: &FieldCtx) -> usize {
        self.rref(f).1
    }
    pub fn det(&self, f: &FieldCtx) -> Fq {
        assert_eq!(self.rows, self.cols);
        let (_, rank, _, det) = self.rref(f);
        if rank < self.rows {
            0
        } else {
            det
        }
    }
    pub fn inverse(&self, f: &FieldCtx) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = 1;
        }
        let (red, rank, pivots, _) = aug.rref(f);
        if rank < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return None;
        }
        let mut inv = Mat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = red[(i, n + j)];
            }
        }
        Some(inv)
    }
    /// One solution x of self * x = b (b a column vector), if any.
    pub fn solve(&self, f: &FieldCtx, b: &Mat) -> Option<Mat> {
        assert_eq!(b.cols, 1);
        assert_eq!(b.rows, self.rows);
        let mut aug = Mat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, self.cols)] = b[(i, 0)];
        }
        let (red, _, pivots, _) = aug.rref(f);
        if pivots.contains(&self.cols) {
            return None; // inconsistent
        }
        let mut x = Mat::zero(self.cols, 1);
        for (r, &c) in pivots.iter().enumerate() {
            x[(c, 0)] = red[(r, self.cols)];
        }
        Some(x)
    }
    /// Basis of the right kernel, as columns of a cols x nullity matrix.
    pub fn kernel(&self, f: &FieldCtx) -> Mat {
        let (red, rank, pivots, _) = self.rref(f);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zero(self.cols, free.len());
        for (idx, &fc) in free.iter().enumerate() {
            k[(fc, idx)] = 1;
            for r in 0..rank {
                k[(pivots[r], idx)] = f.neg(red[(r, fc)]);
            }
        }
        k
    }
    /// Kronecker product self (x) other.
    pub fn kronecker(&self, f: &FieldCtx, other: &Mat) -> Mat {
        let mut out = Mat::zero(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            f.mul(a, other[(k, l)]);
                    }
                }
            }
        }
        out
    }
    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Mat) -> Mat {
        let mut out = Mat::zero(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        let mut out = Mat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Fq;
    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &Fq {
        &self.data[i * self.cols + j]
    }
}
impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Fq {
        &mut self.data[i * self.cols + j]
    }
}

/// Evaluate the bilinear form x^T G y.
pub fn bilinear(f: &FieldCtx, g: &Mat, x: &[Fq], y: &[Fq]) -> Fq {
    let mut acc: Fq = 0;
    for i in 0..g.rows {
        if x[i] == 0 {
            continue;
        }
        let mut row: Fq = 0;
        for j in 0..g.cols {
            row = f.add(row, f.mul(g[(i, j)], y[j]));
        }
        acc = f.add(acc, f.mul(x[i], row));
    }
    acc
}

/// Congruence diagonalization of a symmetric matrix in odd characteristic:
/// returns (T, d) with T invertible and T^T S T = diag(d).
pub fn diagonalize_symmetric(f: &FieldCtx, s: &Mat) -> (Mat, Vec<Fq>) {
    assert!(s.is_symmetric());
    let n = s.rows;
    let mut s = s.clone();
    let mut t = Mat::identity(n);
    for k in 0..n {
        if s[(k, k)] == 0 {
            // Find a later index with nonzero diagonal, or create one.
            if let Some(j) = (k + 1..n).find(|&j| s[(j, j)] != 0) {
                apply_col_swap(f, &mut s, &mut t, k, j);
            } else if let Some(j) = (k + 1..n).find(|&j| s[(k, j)] != 0) {
                // Add column j to column k: new diagonal 2 s_{kj} != 0.
                apply_col_add(f, &mut s, &mut t, k, j, 1);
            } else {
                continue; // row/column k is zero from k onward
            }
        }
        let d = s[(k, k)];
        let dinv = f.inv(d);
        for j in k + 1..n {
            if s[(k, j)] != 0 {
                let c = f.neg(f.mul(s[(k, j)], dinv));
                apply_col_add(f, &mut s, &mut t, j, k, c);
            }
        }
    }
    let diag = (0..n).map(|i| s[(i, i)]).collect();
    (t, diag)
}

// Column operation col_k += c * col_j applied congruently (rows too).
fn apply_col_add(f: &FieldCtx, s: &mut Mat, t: &mut Mat, k: usize, j: usize, c: Fq) {
    let n = s.rows;
    for i in 0..n {
        let v = f.mul(c, s[(i, j)]);
        s[(i, k)] = f.add(s[(i, k)], v);
    }
    for i in 0..n {
        let v = f.mul(c, s[(j, i)]);
        s[(k, i)] = f.add(s[(k, i)], v);
    }
    for i in 0..n {
        let v = f.mul(c, t[(i, j)]);
        t[(i, k)] = f.add(t[(i, k)], v);
    }
}

fn apply_col_swap(f: &FieldCtx, s: &mut Mat, t: &mut Mat, k: usize, j: usize) {
    let _ = f;
    let n = s.rows;
    for i in 0..n {
        let (a, b) = (s[(i, k)], s[(i, j)]);
        s[(i, k)] = b;
        s[(i, j)] = a;
    }
    for i in 0..n {
        let (a, b) = (s[(k, i)], s[(j, i)]);
        s[(k, i)] = b;
        s[(j, i)] = a;
    }
    for i in 0..n {
        let (a, b) = (t[(i, k)], t[(i, j)]);
        t[(i, k)] = b;
        t[(i, j)] = a;
    }
}

/// Closed-form sum over F_q^m of psi(x^T Q x + b^T x) for symmetric Q.
/// Diagonalizes Q congruently; each coordinate with a_i != 0 contributes
/// gamma_psi(a_i) * psi(-l_i^2 / (4 a_i)), each with a_i = 0 contributes q if
/// l_i = 0 and 0 otherwise.
pub fn gauss_sum_quadratic(psi: &AddChar, q_mat: &Mat, b: &[Fq]) -> Complex64 {
    let f = &psi.field;
    assert!(q_mat.is_symmetric());
    let m = q_mat.rows;
    assert_eq!(b.len(), m);
    let (t, diag) = diagonalize_symmetric(f, q_mat);
    // Substitute x = T y: form becomes sum a_i y_i^2 + l^T y with l = T^T b.
    let l: Vec<Fq> = (0..m)
        .map(|i| {
            let mut acc: Fq = 0;
            for j in 0..m {
                acc = f.add(acc, f.mul(t[(j, i)], b[j]));
            }
            acc
        })
        .collect();
    let mut total = Complex64::new(1.0, 0.0);
    let quarter = f.inv(f.from_int(4));
    for i in 0..m {
        let a = diag[i];
        if a == 0 {
            if l[i] == 0 {
                total *= f.q as f64;
            } else {
                return Complex64::new(0.0, 0.0);
            }
        } else {
            // sum_y psi(a y^2 + l y) = psi(-l^2/(4a)) * gamma(a)
            let shift = f.neg(f.mul(f.mul(l[i], l[i]), f.mul(quarter, f.inv(a))));
            total *= psi.eval(shift) * psi.gauss_quadratic(a);
        }
    }
    total
}

/// Find T with T^T G T = J_std for a nondegenerate alternating G, where
/// J_std = [[0, I], [-I, 0]] in dimension 2n. Greedy hyperbolic-pair
/// extraction in the canonical basis order.
pub fn symplectic_basis(f: &FieldCtx, g: &Mat) -> Result<Mat> {
    let n2 = g.rows;
    if n2 % 2 != 0 || !g.add(f, &g.transpose()).is_zero() {
        return Err(Error::BadSpace(format!(
            "not an alternating matrix of even size: {}x{}",
            g.rows, g.cols
        )));
    }
    if g.rank(f) != n2 {
        return Err(Error::BadSpace("degenerate alternating form".into()));
    }
    let n = n2 / 2;
    let pair = |x: &Mat, y: &Mat| -> Fq {
        bilinear(
            f,
            g,
            &x.data,
            &y.data,
        )
    };
    let mut es: Vec<Mat> = Vec::new();
    let mut fs: Vec<Mat> = Vec::new();
    // Candidate pool: standard basis vectors, projected off chosen pairs.
    let mut pool: Vec<Mat> = (0..n2)
        .map(|i| {
            let mut v = Mat::zero(n2, 1);
            v[(i, 0)] = 1;
            v
        })
        .collect();
    for _ in 0..n {
        let e = pool
            .iter()
            .find(|v| !v.is_zero())
            .ok_or_else(|| Error::Internal("symplectic basis extraction stalled".into()))?
            .clone();
        let fvraw = pool
            .iter()
            .find(|v| pair(&e, v) != 0)
            .ok_or_else(|| Error::Internal("no partner for hyperbolic pair".into()))?
            .clone();
        let c = f.inv(pair(&e, &fvraw));
        let fv = fvraw.scale(f, c);
        // Project the pool onto the orthogonal complement of span(e, fv).
        for v in pool.iter_mut() {
            let a = pair(&e, v);
            let b = pair(&fv, v);
            // v -> v - a * fv_normalized ... careful: <e, fv> = 1.
            // v' = v - <e,v> fv + <fv,v> e gives <e,v'> = <fv,v'> = 0.
            let mut vv = v.sub(f, &fv.scale(f, a));
            vv = vv.add(f, &e.scale(f, b));
            *v = vv;
        }
        es.push(e);
        fs.push(fv);
    }
    let mut t = Mat::zero(n2, n2);
    for (j, e) in es.iter().enumerate() {
        for i in 0..n2 {
            t[(i, j)] = e[(i, 0)];
        }
    }
    for (j, fv) in fs.iter().enumerate() {
        for i in 0..n2 {
            t[(i, n + j)] = fv[(i, 0)];
        }
    }
    Ok(t)
}

/// The standard alternating Gram matrix [[0, I], [-I, 0]] of size 2n.
pub fn j_std(f: &FieldCtx, n: usize) -> Mat {
    let mut j = Mat::zero(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1;
        j[(n + i, i)] = f.neg(1);
    }
    j
}

/// Find T invertible with T^T A T = B for symmetric nondegenerate A, B of
/// equal size and equal discriminant square class. Diagonalizes both and
/// matches diagonals entry by entry, using that over F_q every nonzero value
/// is represented by a 2-dimensional diagonal form to fix square classes.
pub fn congruence_transform(f: &FieldCtx, a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.rows;
    if b.rows != n || !a.is_symmetric() || !b.is_symmetric() {
        return Err(Error::BadSpace("congruence_transform needs symmetric matrices of equal size".into()));
    }
    // Brute-force over a deterministic pseudorandom stream of candidate basis
    // images is exponentially wasteful; instead reduce both to the canonical
    // diagonal diag(1, ..., 1, det-class) and compose.
    let ta = to_canonical_diagonal(f, a)?;
    let tb = to_canonical_diagonal(f, b)?;
    let ca = ta.transpose().mul(f, a).mul(f, &ta);
    let cb = tb.transpose().mul(f, b).mul(f, &tb);
    if ca != cb {
        return Err(Error::BadSpace(
            "forms are not congruent (different discriminant class)".into(),
        ));
    }
    let tbinv = tb
        .inverse(f)
        .ok_or_else(|| Error::Internal("canonical transform not invertible".into()))?;
    Ok(ta.mul(f, &tbinv))
}

/// T with T^T A T = diag(1, ..., 1, d), d in {1, least nonsquare}.
fn to_canonical_diagonal(f: &FieldCtx, a: &Mat) -> Result<Mat> {
    let n = a.rows;
    let (t0, diag) = diagonalize_symmetric(f, a);
    if diag.iter().any(|&d| d == 0) {
        return Err(Error::BadSpace("degenerate symmetric form".into()));
    }
    // Scale each basis vector to make the diagonal entry 1 or the fixed
    // non-square; then pairwise fix (ns, ns) blocks to (1, 1) by finding
    // x, y with ns x^2 + ns y^2 = 1 (always solvable over F_q).
    let ns = f.least_nonsquare();
    let mut t = t0;
    let mut d: Vec<Fq> = diag;
    for i in 0..n {
        let di = d[i];
        let target = if legendre(f, di) == 1 { 1 } else { ns };
        // c^2 = target / di has a solution since they share a square class.
        let ratio = f.mul(target, f.inv(di));
        let c = f
            .elements()
            .find(|&c| c != 0 && f.mul(c, c) == ratio)
            .ok_or_else(|| Error::Internal("square root missing in matched class".into()))?;
        for r in 0..n {
            t[(r, i)] = f.mul(t[(r, i)], c);
        }
        d[i] = target;
    }
    // Clear pairs of non-square entries.
    let mut i = 0;
    while i < n {
        if d[i] == ns {
            if let Some(j) = (i + 1..n).find(|&j| d[j] == ns) {
                // Find (x, y): ns x^2 + ns y^2 = 1.
                let sol = iter_pairs(f).find(|&(x, y)| {
                    f.add(f.mul(ns, f.mul(x, x)), f.mul(ns, f.mul(y, y))) == 1
                });
                let (x, y) = sol.ok_or_else(|| {
                    Error::Internal("binary diagonal form failed to represent 1".into())
                })?;
                // New basis (xu + yv, -yu + xv) has Gram diag(1, 1): the
                // rotation preserves the form's determinant class.
                for r in 0..n {
                    let (u, v) = (t[(r, i)], t[(r, j)]);
                    t[(r, i)] = f.add(f.mul(x, u), f.mul(y, v));
                    t[(r, j)] = f.add(f.mul(f.neg(y), u), f.mul(x, v));
                }
                d[i] = 1;
                d[j] = 1;
            } else if i != n - 1 {
                // Lone non-square not in last slot: swap it to the end.
                for r in 0..n {
                    let tmp = t[(r, i)];
                    t[(r, i)] = t[(r, n - 1)];
                    t[(r, n - 1)] = tmp;
                }
                d.swap(i, n - 1);
                continue; // re-examine slot i
            }
        }
        i += 1;
    }
    Ok(t)
}

fn iter_pairs(f: &FieldCtx) -> impl Iterator<Item = (Fq, Fq)> + '_ {
    f.elements()
        .flat_map(move |x| f.elements().map(move |y| (x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{make_field, psi_pair, SquareClass};

    #[test]
    fn inverse_round_trip() {
        let f = make_field(5).unwrap();
        let m = Mat::from_rows(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 2]]);
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&f, &inv), Mat::identity(3));
        assert_eq!(inv.mul(&f, &m), Mat::identity(3));
    }

    #[test]
    fn singular_has_no_inverse() {
        let f = make_field(3).unwrap();
        let m = Mat::from_rows(&[&[1, 2], &[2, 1]]); // det = 1 - 4 = 0 mod 3
        assert_eq!(m.det(&f), 0);
        assert!(m.inverse(&f).is_none());
    }

    #[test]
    fn solve_and_kernel() {
        let f = make_field(5).unwrap();
        let m = Mat::from_rows(&[&[1, 2, 3], &[0, 1, 1]]);
        let b = Mat::col_vec(&[1, 2]);
        let x = m.solve(&f, &b).unwrap();
        assert_eq!(m.mul(&f, &x), b);
        let k = m.kernel(&f);
        assert_eq!(k.cols, 1);
        assert!(m.mul(&f, &k).is_zero());
        // Inconsistent system: rows are dependent mod the target.
        let m2 = Mat::from_rows(&[&[1, 2], &[2, 4]]);
        assert!(m2.solve(&f, &Mat::col_vec(&[1, 0])).is_none());
    }

    #[test]
    fn diagonalize_symmetric_all_small() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            // Exhaust all symmetric 2x2 and a sample of 3x3.
            for a in 0..q as u8 {
                for b in 0..q as u8 {
                    for c in 0..q as u8 {
                        let s = Mat::from_rows(&[&[a, b], &[b, c]]);
                        let (t, d) = diagonalize_symmetric(&f, &s);
                        let res = t.transpose().mul(&f, &s).mul(&f, &t);
                        let mut expect = Mat::zero(2, 2);
                        expect[(0, 0)] = d[0];
                        expect[(1, 1)] = d[1];
                        assert_eq!(res, expect);
                        assert!(t.inverse(&f).is_some());
                    }
                }
            }
        }
    }

    #[test]
    fn gauss_sum_matches_brute_force() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, psi2) = psi_pair(&f);
            for psi in [&psi, &psi2] {
                for a in 0..q as u8 {
                    for b in 0..q as u8 {
                        for c in 0..q as u8 {
                            for l0 in 0..q as u8 {
                                for l1 in 0..q as u8 {
                                    let qm = Mat::from_rows(&[&[a, b], &[b, c]]);
                                    let closed = gauss_sum_quadratic(psi, &qm, &[l0, l1]);
                                    let mut brute = Complex64::new(0.0, 0.0);
                                    for x in f.elements() {
                                        for y in f.elements() {
                                            let v = bilinear(&f, &qm, &[x, y], &[x, y]);
                                            let lin =
                                                f.add(f.mul(l0, x), f.mul(l1, y));
                                            brute += psi.eval(f.add(v, lin));
                                        }
                                    }
                                    assert!(
                                        (closed - brute).norm() < 1e-8,
                                        "q={q} Q=[[{a},{b}],[{b},{c}]] l=({l0},{l1})"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symplectic_basis_standardizes() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            // A scrambled alternating form: P^T J P for an invertible P.
            let j = j_std(&f, 2);
            let p = Mat::from_rows(&[
                &[1, 1, 0, 1],
                &[0, 1, 1, 0],
                &[1, 0, 1, 1],
                &[0, 0, 0, 1],
            ]);
            assert!(p.inverse(&f).is_some());
            let g = p.transpose().mul(&f, &j).mul(&f, &p);
            let t = symplectic_basis(&f, &g).unwrap();
            assert_eq!(t.transpose().mul(&f, &g).mul(&f, &t), j_std(&f, 2));
        }
    }

    #[test]
    fn congruence_transform_matches_forms() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let ns = f.least_nonsquare();
            // b is the canonical diagonal with the same determinant class as
            // the hyperbolic-plane-plus-line form a.
            let a = Mat::from_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
            let det_class = SquareClass::of(&f, a.det(&f));
            let mut b = Mat::identity(3);
            b[(2, 2)] = det_class.representative(&f);
            let t = congruence_transform(&f, &a, &b).unwrap();
            assert_eq!(t.transpose().mul(&f, &a).mul(&f, &t), b);
            // The opposite determinant class must be rejected.
            let mut c = b.clone();
            c[(2, 2)] = f.mul(c[(2, 2)], ns);
            assert!(congruence_transform(&f, &a, &c).is_err());
        }
    }

    #[test]
    fn kronecker_mixed_product() {
        let f = make_field(5).unwrap();
        let a = Mat::from_rows(&[&[1, 2], &[3, 4]]);
        let b = Mat::from_rows(&[&[0, 1], &[2, 3]]);
        let c = Mat::from_rows(&[&[2, 0], &[1, 1]]);
        let d = Mat::from_rows(&[&[1, 1], &[0, 2]]);
        let lhs = a.kronecker(&f, &b).mul(&f, &c.kronecker(&f, &d));
        let rhs = a.mul(&f, &c).kronecker(&f, &b.mul(&f, &d));
        assert_eq!(lhs, rhs);
    }
}
