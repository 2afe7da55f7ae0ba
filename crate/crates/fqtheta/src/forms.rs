//! Symplectic and quadratic spaces with canonical Gram matrices, their Witt
//! towers, discriminants, and the isotropic-flag decompositions that carry
//! descent data (including the anisotropic vector v0 and its complement W).
//!
//! Canonical shapes: the symplectic form is [[0, I], [-I, 0]]; quadratic
//! spaces are hyperbolic planes [[0,1],[1,0]] followed by an anisotropic tail
//! of dimension <= 2 (diag(c) or diag(1, -d) for d the least non-square).
//! The quadratic form is Q(v) = (v, v), the convention under which
//! disc V = (-1)^(n-1) * Q(v0) * disc W holds for V = W + <v0>.

use crate::linalg::{bilinear, Mat};
use crate::scalars::{legendre, FieldCtx, Fq, SquareClass};
use crate::{Error, Result};
use std::sync::Arc;

/// Witt tower tag. Odd orthogonal towers are distinguished by discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Tower {
    Sp,
    OEvenPlus,
    OEvenMinus,
    OOddPlus,
    OOddMinus,
}

impl Tower {
    pub fn is_orthogonal(self) -> bool {
        !matches!(self, Tower::Sp)
    }
    /// The discriminant every member of the tower carries (orthogonal only).
    pub fn disc(self) -> Option<SquareClass> {
        match self {
            Tower::Sp => None,
            Tower::OEvenPlus | Tower::OOddPlus => Some(SquareClass(1)),
            Tower::OEvenMinus | Tower::OOddMinus => Some(SquareClass(-1)),
        }
    }
    /// Smallest dimension occurring in the tower.
    pub fn bottom_dim(self) -> usize {
        match self {
            Tower::Sp | Tower::OEvenPlus => 0,
            Tower::OEvenMinus => 2,
            Tower::OOddPlus | Tower::OOddMinus => 1,
        }
    }
    pub fn label(self) -> &'static str {
        match self {
            Tower::Sp => "Sp",
            Tower::OEvenPlus => "O+even",
            Tower::OEvenMinus => "O-even",
            Tower::OOddPlus => "O+odd",
            Tower::OOddMinus => "O-odd",
        }
    }
}

/// A vector space with a nondegenerate bilinear form in canonical shape.
#[derive(Debug, Clone)]
pub struct FormedSpace {
    pub field: Arc<FieldCtx>,
    pub dim: usize,
    pub tower: Tower,
    pub gram: Mat,
    /// Discriminant square class; `None` for symplectic spaces.
    pub disc: Option<SquareClass>,
    /// Number of hyperbolic planes in the canonical Gram (Witt index for
    /// orthogonal spaces; dim/2 for symplectic ones).
    pub witt_index: usize,
}

impl FormedSpace {
    pub fn is_symplectic(&self) -> bool {
        self.tower == Tower::Sp
    }
    /// Q(v) = (v, v); zero on symplectic spaces.
    pub fn q_value(&self, v: &[Fq]) -> Fq {
        bilinear(&self.field, &self.gram, v, v)
    }
    pub fn pairing(&self, v: &[Fq], w: &[Fq]) -> Fq {
        bilinear(&self.field, &self.gram, v, w)
    }
    /// Vectors in canonical index order (base-q counters, least index first).
    pub fn vectors(&self) -> impl Iterator<Item = Vec<Fq>> + '_ {
        let q = self.field.q;
        let dim = self.dim;
        (0..q.pow(dim as u32)).map(move |mut k| {
            let mut v = vec![0u8; dim];
            for slot in v.iter_mut() {
                *slot = (k % q) as u8;
                k /= q;
            }
            v
        })
    }
}

/// Discriminant of a symmetric Gram matrix: (-1)^(n(n-1)/2) det.
pub fn disc_of_gram(f: &FieldCtx, gram: &Mat) -> Result<SquareClass> {
    let n = gram.rows;
    let det = gram.det(f);
    if det == 0 {
        return Err(Error::BadSpace("degenerate form has no discriminant".into()));
    }
    let sign_flips = (n * n.saturating_sub(1) / 2) % 2;
    let val = if sign_flips == 1 { f.neg(det) } else { det };
    Ok(SquareClass::of(f, val))
}

/// The 2x2 hyperbolic-plane Gram [[0,1],[1,0]].
fn hyperbolic_plane() -> Mat {
    Mat::from_rows(&[&[0, 1], &[1, 0]])
}

/// The canonical member of `tower` of the given dimension.
pub fn standard_space(field: &Arc<FieldCtx>, tower: Tower, dim: usize) -> Result<FormedSpace> {
    let f = field;
    let bad = |msg: String| Err(Error::BadSpace(msg));
    let (gram, witt_index) = match tower {
        Tower::Sp => {
            if dim % 2 != 0 {
                return bad(format!("symplectic spaces have even dimension, got {dim}"));
            }
            (crate::linalg::j_std(f, dim / 2), dim / 2)
        }
        Tower::OEvenPlus => {
            if dim % 2 != 0 {
                return bad(format!("O+even tower has even dimensions, got {dim}"));
            }
            let mut g = Mat::zero(0, 0);
            for _ in 0..dim / 2 {
                g = g.direct_sum(&hyperbolic_plane());
            }
            (g, dim / 2)
        }
        Tower::OEvenMinus => {
            if dim % 2 != 0 || dim < 2 {
                return bad(format!("O-even tower has even dimensions >= 2, got {dim}"));
            }
            let mut g = Mat::zero(0, 0);
            for _ in 0..dim / 2 - 1 {
                g = g.direct_sum(&hyperbolic_plane());
            }
            // Anisotropic plane x^2 - d y^2, d the least non-square.
            let tail = {
                let mut t = Mat::identity(2);
                t[(1, 1)] = f.neg(f.least_nonsquare());
                t
            };
            (g.direct_sum(&tail), dim / 2 - 1)
        }
        Tower::OOddPlus | Tower::OOddMinus => {
            if dim % 2 != 1 {
                return bad(format!("odd orthogonal tower has odd dimensions, got {dim}"));
            }
            let m = dim / 2;
            let mut g = Mat::zero(0, 0);
            for _ in 0..m {
                g = g.direct_sum(&hyperbolic_plane());
            }
            // Pick the line entry c in {1, nonsquare} realizing the tower's
            // discriminant: disc = (-1)^(n(n-1)/2) * (-1)^m * c.
            let target = tower.disc().unwrap();
            let mut sign = 1i8;
            if (dim * (dim - 1) / 2) % 2 == 1 {
                sign = -sign;
            }
            if m % 2 == 1 {
                sign = -sign;
            }
            let c = SquareClass(target.0 * sign * legendre(f, 1)).representative(f);
            let tail = {
                let mut t = Mat::identity(1);
                t[(0, 0)] = c;
                t
            };
            (g.direct_sum(&tail), m)
        }
    };
    let disc = if tower.is_orthogonal() {
        let d = disc_of_gram(f, &gram)?;
        if Some(d) != tower.disc() {
            return Err(Error::Internal(format!(
                "constructed {} space of dim {dim} has wrong discriminant",
                tower.label()
            )));
        }
        Some(d)
    } else {
        None
    };
    Ok(FormedSpace {
        field: f.clone(),
        dim,
        tower,
        gram,
        disc,
        witt_index,
    })
}

/// Previous and next members of the same Witt tower.
/// A 1-dimensional orthogonal space with the explicit Gram (c), for
/// anisotropic-line factors of orthogonal decompositions.
pub fn line_space(field: &Arc<FieldCtx>, c: Fq) -> Result<FormedSpace> {
    if c == 0 {
        return Err(Error::BadSpace("degenerate line".into()));
    }
    let class = SquareClass::of(field, c);
    let tower = if class.0 == 1 {
        Tower::OOddPlus
    } else {
        Tower::OOddMinus
    };
    Ok(FormedSpace {
        field: field.clone(),
        dim: 1,
        tower,
        gram: Mat::from_rows(&[&[c]]),
        disc: Some(class),
        witt_index: 0,
    })
}

pub fn witt_neighbors(space: &FormedSpace) -> Vec<FormedSpace> {
    let mut out = Vec::new();
    if space.dim >= space.tower.bottom_dim() + 2 {
        out.push(standard_space(&space.field, space.tower, space.dim - 2).unwrap());
    }
    out.push(standard_space(&space.field, space.tower, space.dim + 2).unwrap());
    out
}

/// An isotropic flag V = X + V_(n-2l) + X^v in a canonical space, with the
/// optional anisotropic vector v0 and its complement W for Bessel data.
#[derive(Debug, Clone)]
pub struct FlagDecomposition {
    pub parent: FormedSpace,
    pub ell: usize,
    /// Basis of X, as vectors in the parent space.
    pub x_basis: Vec<Vec<Fq>>,
    /// Dual basis of X^v: (e_i, e'_j) = delta_ij.
    pub x_dual_basis: Vec<Vec<Fq>>,
    /// Parent coordinate indices spanning the middle complement, in the order
    /// that makes its induced Gram canonical.
    pub complement_idx: Vec<usize>,
    /// The middle space V_(n-2l) as a canonical `FormedSpace`.
    pub complement: FormedSpace,
    /// Anisotropic v0 in complement coordinates, if requested.
    pub v0: Option<Vec<Fq>>,
    /// Basis of W = v0-perp inside the complement (complement coordinates).
    pub w_basis: Vec<Vec<Fq>>,
    /// W as a canonical formed space, plus the invertible change of basis:
    /// column j of `w_map` is the j-th W-basis vector in complement
    /// coordinates, and `w_map^T Gram_compl w_map = Gram_W_canonical`.
    pub w_space: Option<FormedSpace>,
    pub w_map: Option<Mat>,
}

/// Build the canonical flag of depth `ell`, optionally with an anisotropic
/// v0 of the requested square class (Bessel data).
pub fn flag_decomposition(
    v: &FormedSpace,
    ell: usize,
    v0_class: Option<SquareClass>,
) -> Result<FlagDecomposition> {
    let f = &v.field;
    let n = v.dim;
    if 2 * ell > n {
        return Err(Error::BadSpace(format!(
            "flag depth {ell} too large for dimension {n}"
        )));
    }
    if ell > v.witt_index {
        return Err(Error::BadSpace(format!(
            "flag depth {ell} exceeds Witt index {}",
            v.witt_index
        )));
    }
    // Read the pairs off the canonical Gram.
    let (x_idx, xd_idx, comp_idx): (Vec<usize>, Vec<usize>, Vec<usize>) = if v.is_symplectic() {
        let half = n / 2;
        (
            (0..ell).collect(),
            (half..half + ell).collect(),
            (ell..half).chain(half + ell..n).collect(),
        )
    } else {
        (
            (0..ell).map(|i| 2 * i).collect(),
            (0..ell).map(|i| 2 * i + 1).collect(),
            (2 * ell..n).collect(),
        )
    };
    let unit = |i: usize| {
        let mut e = vec![0u8; n];
        e[i] = 1;
        e
    };
    let x_basis: Vec<Vec<Fq>> = x_idx.iter().map(|&i| unit(i)).collect();
    let x_dual_basis: Vec<Vec<Fq>> = xd_idx.iter().map(|&i| unit(i)).collect();
    for (i, e) in x_basis.iter().enumerate() {
        for (j, ed) in x_dual_basis.iter().enumerate() {
            let want = if i == j { 1 } else { 0 };
            if v.pairing(e, ed) != want {
                return Err(Error::Internal("flag dual-basis pairing broke".into()));
            }
        }
    }
    // Induced complement: for the canonical shapes this is again canonical.
    let comp_dim = n - 2 * ell;
    let complement = if v.is_symplectic() {
        standard_space(f, Tower::Sp, comp_dim)?
    } else {
        standard_space(f, v.tower, comp_dim)?
    };
    {
        let mut sub = Mat::zero(comp_dim, comp_dim);
        for (a, &i) in comp_idx.iter().enumerate() {
            for (b, &j) in comp_idx.iter().enumerate() {
                sub[(a, b)] = v.gram[(i, j)];
            }
        }
        if sub != complement.gram {
            return Err(Error::Internal(
                "complement Gram is not in canonical shape".into(),
            ));
        }
    }
    let mut out = FlagDecomposition {
        parent: v.clone(),
        ell,
        x_basis,
        x_dual_basis,
        complement_idx: comp_idx,
        complement,
        v0: None,
        w_basis: Vec::new(),
        w_space: None,
        w_map: None,
    };
    if let Some(class) = v0_class {
        attach_v0(&mut out, class)?;
    }
    Ok(out)
}

fn attach_v0(flag: &mut FlagDecomposition, class: SquareClass) -> Result<()> {
    let comp = &flag.complement;
    let f = &comp.field;
    if comp.is_symplectic() {
        return Err(Error::BadSpace("v0 lives in an orthogonal complement".into()));
    }
    let v0 = comp
        .vectors()
        .find(|v| legendre(f, comp.q_value(v)) == class.0)
        .ok_or_else(|| {
            Error::NoRationalOrbit(format!(
                "no anisotropic vector of class {class} in {} of dim {}",
                comp.tower.label(),
                comp.dim
            ))
        })?;
    // W = v0-perp: kernel of the linear functional w -> (v0, w).
    let mut row = Mat::zero(1, comp.dim);
    for j in 0..comp.dim {
        let mut acc: Fq = 0;
        for i in 0..comp.dim {
            acc = f.add(acc, f.mul(v0[i], comp.gram[(i, j)]));
        }
        row[(0, j)] = acc;
    }
    let ker = row.kernel(f);
    let w_basis: Vec<Vec<Fq>> = (0..ker.cols)
        .map(|j| (0..comp.dim).map(|i| ker[(i, j)]).collect())
        .collect();
    let w_dim = w_basis.len();
    debug_assert_eq!(w_dim, comp.dim - 1);
    // Identify W with the canonical space of the forced tower: its disc is
    // pinned by disc V = (-1)^(n-1) Q(v0) disc W with n = dim complement.
    let q_v0 = SquareClass::of(f, comp.q_value(&v0));
    let sign = if (comp.dim - 1) % 2 == 1 {
        SquareClass::of(f, f.neg(1))
    } else {
        SquareClass(1)
    };
    let disc_w = comp.disc.unwrap().mul(sign).mul(q_v0);
    let tower_w = match (w_dim % 2, disc_w.0) {
        (0, 1) => Tower::OEvenPlus,
        (0, -1) => Tower::OEvenMinus,
        (1, 1) => Tower::OOddPlus,
        _ => Tower::OOddMinus,
    };
    let w_space = standard_space(f, tower_w, w_dim)?;
    // Gram of W in the found basis.
    let mut gw = Mat::zero(w_dim, w_dim);
    for a in 0..w_dim {
        for b in 0..w_dim {
            gw[(a, b)] = comp.pairing(&w_basis[a], &w_basis[b]);
        }
    }
    let t = crate::linalg::congruence_transform(f, &gw, &w_space.gram)?;
    // Column j of w_map = image in complement coordinates of the j-th
    // canonical W basis vector.
    let mut w_map = Mat::zero(comp.dim, w_dim);
    for j in 0..w_dim {
        for i in 0..comp.dim {
            let mut acc: Fq = 0;
            for a in 0..w_dim {
                acc = f.add(acc, f.mul(w_basis[a][i], t[(a, j)]));
            }
            w_map[(i, j)] = acc;
        }
    }
    // Sanity: w_map^T G w_map = canonical Gram of W.
    let check = w_map
        .transpose()
        .mul(f, &comp.gram)
        .mul(f, &w_map);
    if check != w_space.gram {
        return Err(Error::Internal("W basis change failed to match Gram".into()));
    }
    flag.v0 = Some(v0);
    flag.w_basis = w_basis;
    flag.w_space = Some(w_space);
    flag.w_map = Some(w_map);
    Ok(())
}

/// All five towers, for scan loops.
pub const ALL_TOWERS: [Tower; 5] = [
    Tower::Sp,
    Tower::OEvenPlus,
    Tower::OEvenMinus,
    Tower::OOddPlus,
    Tower::OOddMinus,
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::make_field;

    #[test]
    fn o2_minus_is_anisotropic() {
        for q in [3u64, 5, 7] {
            let f = make_field(q).unwrap();
            let v = standard_space(&f, Tower::OEvenMinus, 2).unwrap();
            assert_eq!(v.disc, Some(SquareClass(-1)));
            let roots = v
                .vectors()
                .filter(|x| x.iter().any(|&c| c != 0) && v.q_value(x) == 0)
                .count();
            assert_eq!(roots, 0, "q={q}: minus plane must have no isotropic vectors");
        }
        // The q=3 canonical shape is diag(1, 1) since -delta = -2 = 1.
        let f3 = make_field(3).unwrap();
        let v = standard_space(&f3, Tower::OEvenMinus, 2).unwrap();
        assert_eq!(v.gram, Mat::identity(2));
    }

    #[test]
    fn split_even_spaces_have_disc_plus() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            for dim in [2usize, 4, 6] {
                let v = standard_space(&f, Tower::OEvenPlus, dim).unwrap();
                assert_eq!(v.disc, Some(SquareClass(1)));
                // Split: some nonzero isotropic vector exists.
                assert!(v
                    .vectors()
                    .any(|x| x.iter().any(|&c| c != 0) && v.q_value(&x) == 0));
            }
        }
    }

    #[test]
    fn odd_towers_realize_both_discs() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            for dim in [1usize, 3, 5] {
                let p = standard_space(&f, Tower::OOddPlus, dim).unwrap();
                let m = standard_space(&f, Tower::OOddMinus, dim).unwrap();
                assert_eq!(disc_of_gram(&f, &p.gram).unwrap(), SquareClass(1));
                assert_eq!(disc_of_gram(&f, &m.gram).unwrap(), SquareClass(-1));
            }
        }
        let f5 = make_field(5).unwrap();
        let v = standard_space(&f5, Tower::OOddPlus, 3).unwrap();
        assert_eq!(v.disc, Some(SquareClass(1)));
    }

    #[test]
    fn rejects_impossible_combinations() {
        let f = make_field(3).unwrap();
        assert!(standard_space(&f, Tower::Sp, 3).is_err());
        assert!(standard_space(&f, Tower::OEvenMinus, 0).is_err());
        assert!(standard_space(&f, Tower::OOddPlus, 4).is_err());
    }

    #[test]
    fn witt_neighbor_structure() {
        let f = make_field(3).unwrap();
        let bottom = standard_space(&f, Tower::OEvenMinus, 2).unwrap();
        let nb = witt_neighbors(&bottom);
        assert_eq!(nb.len(), 1);
        assert_eq!(nb[0].dim, 4);
        let sp4 = standard_space(&f, Tower::Sp, 4).unwrap();
        let nb = witt_neighbors(&sp4);
        assert_eq!(nb.iter().map(|s| s.dim).collect::<Vec<_>>(), vec![2, 6]);
        let o1 = standard_space(&f, Tower::OOddPlus, 1).unwrap();
        let nb = witt_neighbors(&o1);
        assert_eq!(nb.iter().map(|s| s.dim).collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn flag_invariants_and_disc_relation() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            for (tower, dim) in [
                (Tower::OOddPlus, 5),
                (Tower::OOddMinus, 5),
                (Tower::OEvenMinus, 4),
                (Tower::OEvenPlus, 4),
            ] {
                let v = standard_space(&f, tower, dim).unwrap();
                for ell in 0..=v.witt_index.min((dim - 1) / 2) {
                    for class in [SquareClass(1), SquareClass(-1)] {
                        let flag = match flag_decomposition(&v, ell, Some(class)) {
                            Ok(fl) => fl,
                            Err(Error::NoRationalOrbit(_)) => continue,
                            Err(e) => panic!("{e}"),
                        };
                        let comp = &flag.complement;
                        let v0 = flag.v0.as_ref().unwrap();
                        assert_eq!(legendre(&f, comp.q_value(v0)), class.0);
                        // X and X-dual are isotropic and pair correctly.
                        for e in &flag.x_basis {
                            assert_eq!(v.q_value(e), 0);
                        }
                        // disc complement = (-1)^(m-1) Q(v0) disc W.
                        let w = flag.w_space.as_ref().unwrap();
                        let m = comp.dim;
                        let mut lhs = comp.disc.unwrap();
                        if (m - 1) % 2 == 1 {
                            lhs = lhs.mul(SquareClass::of(&f, f.neg(1)));
                        }
                        let rhs = SquareClass::of(&f, comp.q_value(v0)).mul(w.disc.unwrap());
                        assert_eq!(lhs, rhs, "disc relation q={q} {tower:?} dim={dim} ell={ell} class={class}");
                    }
                }
            }
        }
    }

    #[test]
    fn one_dim_complement_has_single_class() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::OOddPlus, 3).unwrap();
        // Complement of the depth-1 flag is a line: exactly one of the two
        // classes is realized, the other reports a missing rational orbit.
        let hits = [SquareClass(1), SquareClass(-1)]
            .iter()
            .filter(|&&c| flag_decomposition(&v, 1, Some(c)).is_ok())
            .count();
        assert_eq!(hits, 1);
        let err = [SquareClass(1), SquareClass(-1)]
            .iter()
            .find_map(|&c| flag_decomposition(&v, 1, Some(c)).err())
            .unwrap();
        assert!(matches!(err, Error::NoRationalOrbit(_)));
    }

    #[test]
    fn symplectic_flag_complement_canonical() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::Sp, 4).unwrap();
        for ell in 0..=2 {
            let flag = flag_decomposition(&v, ell, None).unwrap();
            assert_eq!(flag.complement.dim, 4 - 2 * ell);
            assert!(flag.complement.is_symplectic());
        }
    }
}
