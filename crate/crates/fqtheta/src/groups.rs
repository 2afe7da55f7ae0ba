//! Concrete matrix-group realizations: breadth-first enumeration from
//! generators, exact conjugacy classes, and the structured subgroups descent
//! needs (parabolic radicals, unipotent upper-triangular pieces, Bessel
//! subgroups with their generic characters).
//!
//! Elements are n x n matrices over F_q packed base-q into u64 keys, stored
//! sorted for O(log) membership. Enumeration is certified post hoc against
//! the classical order polynomials, so correctness never depends on the
//! particular generator choice.

use crate::forms::{FlagDecomposition, FormedSpace, Tower};
use crate::linalg::Mat;
use crate::scalars::{AddChar, FieldCtx, Fq};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashSet;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GroupKind {
    /// Full isometry group: O(V) or Sp(V).
    Isometry,
    /// Determinant-one subgroup: SO(V) (same as Isometry for Sp).
    Special,
    /// GL_n(F_q), no form.
    GeneralLinear,
}

/// One conjugacy class: smallest packed key as representative, plus size.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ConjClass {
    pub rep: u64,
    pub size: u64,
}

/// A fully enumerated matrix group with conjugacy data.
#[derive(Debug)]
pub struct GroupRealization {
    pub field: Arc<FieldCtx>,
    pub kind: GroupKind,
    /// The preserved space; `None` for GL.
    pub space: Option<FormedSpace>,
    pub dim: usize,
    /// All elements, sorted by packed key.
    pub elements: Vec<u64>,
    /// Class id of `elements[i]`.
    pub class_of: Vec<u32>,
    pub classes: Vec<ConjClass>,
    pub generators: Vec<Mat>,
    pub order: u64,
}

/// Pack a dim x dim matrix into a base-q integer, row-major, low digit first.
pub fn pack(f: &FieldCtx, m: &Mat) -> u64 {
    let q = f.q as u64;
    let mut key: u64 = 0;
    for &e in m.data.iter().rev() {
        key = key * q + e as u64;
    }
    key
}

/// Inverse of [`pack`].
pub fn unpack(f: &FieldCtx, dim: usize, mut key: u64) -> Mat {
    let q = f.q as u64;
    let mut m = Mat::zero(dim, dim);
    for slot in m.data.iter_mut() {
        *slot = (key % q) as u8;
        key /= q;
    }
    m
}

// Allocation-free multiply for the hot enumeration loops.
#[inline]
fn mul_into(f: &FieldCtx, n: usize, a: &[u8], b: &[u8], out: &mut [u8]) {
    for i in 0..n {
        for j in 0..n {
            let mut acc: Fq = 0;
            for k in 0..n {
                acc = f.add(acc, f.mul(a[i * n + k], b[k * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
}

#[inline]
fn pack_slice(f: &FieldCtx, data: &[u8]) -> u64 {
    let q = f.q as u64;
    let mut key: u64 = 0;
    for &e in data.iter().rev() {
        key = key * q + e as u64;
    }
    key
}

#[inline]
fn unpack_slice(f: &FieldCtx, mut key: u64, out: &mut [u8]) {
    let q = f.q as u64;
    for slot in out.iter_mut() {
        *slot = (key % q) as u8;
        key /= q;
    }
}

impl GroupRealization {
    pub fn index_of(&self, key: u64) -> Option<usize> {
        self.elements.binary_search(&key).ok()
    }
    pub fn contains(&self, m: &Mat) -> bool {
        self.index_of(pack(&self.field, m)).is_some()
    }
    /// Class id of a matrix known to lie in the group.
    pub fn class_of_mat(&self, m: &Mat) -> Result<u32> {
        let key = pack(&self.field, m);
        self.index_of(key)
            .map(|i| self.class_of[i])
            .ok_or_else(|| Error::Internal("class lookup of non-element".into()))
    }
    pub fn class_rep(&self, class: u32) -> Mat {
        unpack(&self.field, self.dim, self.classes[class as usize].rep)
    }
    pub fn identity_class(&self) -> u32 {
        let id = pack(&self.field, &Mat::identity(self.dim));
        self.class_of[self.index_of(id).expect("identity in group")]
    }
    pub fn iter_mats(&self) -> impl Iterator<Item = Mat> + '_ {
        self.elements
            .iter()
            .map(move |&k| unpack(&self.field, self.dim, k))
    }
    pub fn inverse_mat(&self, m: &Mat) -> Mat {
        m.inverse(&self.field).expect("group element invertible")
    }
    /// Class id of g^-1 for each class (needed for conjugate characters).
    pub fn inverse_class(&self, class: u32) -> u32 {
        let rep = self.class_rep(class);
        self.class_of_mat(&self.inverse_mat(&rep)).unwrap()
    }
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Classical order of the isometry group of a canonical space.
pub fn classical_order(q: u64, tower: Tower, dim: usize, kind: GroupKind) -> u64 {
    assert!(kind != GroupKind::GeneralLinear);
    let full: u64 = match tower {
        Tower::Sp => {
            let n = (dim / 2) as u32;
            let mut o = q.pow(n * n);
            for i in 1..=n {
                o *= q.pow(2 * i) - 1;
            }
            o
        }
        Tower::OOddPlus | Tower::OOddMinus => {
            if dim == 0 {
                return 1;
            }
            let n = (dim / 2) as u32;
            let mut o = 2 * q.pow(n * n);
            for i in 1..=n {
                o *= q.pow(2 * i) - 1;
            }
            o
        }
        Tower::OEvenPlus | Tower::OEvenMinus => {
            if dim == 0 {
                return 1;
            }
            let n = (dim / 2) as u32;
            let eps: i64 = if tower == Tower::OEvenPlus { 1 } else { -1 };
            let mut o = 2 * q.pow(n * (n - 1));
            o *= (q.pow(n) as i64 - eps) as u64;
            for i in 1..n {
                o *= q.pow(2 * i) - 1;
            }
            o
        }
    };
    match kind {
        GroupKind::Special if tower != Tower::Sp && dim >= 1 => full / 2,
        _ => full,
    }
}

pub fn gl_order(q: u64, n: usize) -> u64 {
    let n = n as u32;
    let mut o: u64 = 1;
    for i in 0..n {
        o *= q.pow(n) - q.pow(i);
    }
    o
}

/// Generator of F_q^x, by brute force.
fn multiplicative_generator(f: &FieldCtx) -> Fq {
    'outer: for g in 1..f.q as u8 {
        let mut x: Fq = 1;
        for _ in 0..f.q - 2 {
            x = f.mul(x, g);
            if x == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("cyclic group has a generator")
}

/// Reflection in an anisotropic vector: x -> x - ((x,v)·2/Q(v)) v.
fn reflection(space: &FormedSpace, v: &[Fq]) -> Option<Mat> {
    let f = &space.field;
    let qv = space.q_value(v);
    if qv == 0 {
        return None;
    }
    let n = space.dim;
    let c = f.mul(f.from_int(2), f.inv(qv));
    let mut m = Mat::identity(n);
    for j in 0..n {
        let mut ej = vec![0u8; n];
        ej[j] = 1;
        let coef = f.mul(c, space.pairing(&ej, v));
        for i in 0..n {
            m[(i, j)] = f.sub(m[(i, j)], f.mul(coef, v[i]));
        }
    }
    Some(m)
}

fn gl_generators(f: &Arc<FieldCtx>, n: usize) -> Vec<Mat> {
    let mut gens = Vec::new();
    let alpha = multiplicative_generator(f);
    let mut d = Mat::identity(n);
    d[(0, 0)] = alpha;
    gens.push(d);
    if n >= 2 {
        let mut t = Mat::identity(n);
        t[(0, 1)] = 1;
        gens.push(t);
        // n-cycle permutation matrix.
        let mut p = Mat::zero(n, n);
        for i in 0..n {
            p[((i + 1) % n, i)] = 1;
        }
        gens.push(p);
    }
    gens
}

fn sp_generators(space: &FormedSpace) -> Vec<Mat> {
    let f = &space.field;
    let n = space.dim / 2;
    let mut gens = Vec::new();
    if n == 0 {
        return gens;
    }
    // u(S): [[I, S], [0, I]] for S in a symmetric basis.
    let mut sym_basis = Vec::new();
    for i in 0..n {
        let mut s = Mat::zero(n, n);
        s[(i, i)] = 1;
        sym_basis.push(s);
        for j in i + 1..n {
            let mut s = Mat::zero(n, n);
            s[(i, j)] = 1;
            s[(j, i)] = 1;
            sym_basis.push(s);
        }
    }
    for s in sym_basis {
        let mut u = Mat::identity(2 * n);
        for i in 0..n {
            for j in 0..n {
                u[(i, n + j)] = s[(i, j)];
            }
        }
        gens.push(u);
    }
    // m(A): [[A, 0], [0, A^-T]] for GL_n generators.
    for a in gl_generators(f, n) {
        let at_inv = a.transpose().inverse(f).unwrap();
        let mut m = Mat::zero(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = a[(i, j)];
                m[(n + i, n + j)] = at_inv[(i, j)];
            }
        }
        gens.push(m);
    }
    // The Fourier element [[0, I], [-I, 0]].
    let mut w = Mat::zero(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1;
        w[(n + i, i)] = f.neg(1);
    }
    gens.push(w);
    gens
}

/// Breadth-first closure of `seed` under left multiplication by `gens`,
/// with an incremental-extension entry point.
fn closure(
    f: &FieldCtx,
    dim: usize,
    known: &mut HashSet<u64>,
    frontier_seed: Vec<u64>,
    gens: &[Mat],
    bound: u64,
) -> Result<()> {
    let n = dim;
    let gen_bufs: Vec<&[u8]> = gens.iter().map(|g| g.data.as_slice()).collect();
    let mut frontier = frontier_seed;
    let mut buf_a = vec![0u8; n * n];
    let mut buf_c = vec![0u8; n * n];
    while let Some(key) = frontier.pop() {
        unpack_slice(f, key, &mut buf_a);
        for gb in &gen_bufs {
            mul_into(f, n, gb, &buf_a, &mut buf_c);
            let k2 = pack_slice(f, &buf_c);
            if known.insert(k2) {
                if known.len() as u64 > bound {
                    return Err(Error::OrderBound {
                        what: "group enumeration".into(),
                        projected: known.len() as u64,
                        bound,
                    });
                }
                frontier.push(k2);
            }
        }
    }
    Ok(())
}

/// Conjugacy classes by orbit closure under generator conjugation. Elements
/// must be sorted; class representatives come out as the smallest key of
/// each orbit.
fn conjugacy(
    f: &FieldCtx,
    dim: usize,
    elements: &[u64],
    gens: &[Mat],
) -> (Vec<u32>, Vec<ConjClass>) {
    let n = dim;
    let pairs: Vec<(Vec<u8>, Vec<u8>)> = gens
        .iter()
        .map(|g| {
            let gi = g.inverse(f).expect("generator invertible");
            (g.data.clone(), gi.data)
        })
        .collect();
    let mut class_of = vec![u32::MAX; elements.len()];
    let mut classes = Vec::new();
    let mut buf_a = vec![0u8; n * n];
    let mut buf_b = vec![0u8; n * n];
    let mut buf_c = vec![0u8; n * n];
    for seed in 0..elements.len() {
        if class_of[seed] != u32::MAX {
            continue;
        }
        let id = classes.len() as u32;
        let mut size = 0u64;
        let mut stack = vec![seed];
        class_of[seed] = id;
        while let Some(idx) = stack.pop() {
            size += 1;
            unpack_slice(f, elements[idx], &mut buf_a);
            for (g, gi) in &pairs {
                mul_into(f, n, g, &buf_a, &mut buf_b);
                mul_into(f, n, &buf_b, gi, &mut buf_c);
                let k2 = pack_slice(f, &buf_c);
                let j = elements.binary_search(&k2).expect("conjugate stays in group");
                if class_of[j] == u32::MAX {
                    class_of[j] = id;
                    stack.push(j);
                }
            }
        }
        classes.push(ConjClass {
            rep: elements[seed],
            size,
        });
    }
    (class_of, classes)
}

fn finish_realization(
    field: Arc<FieldCtx>,
    kind: GroupKind,
    space: Option<FormedSpace>,
    dim: usize,
    set: HashSet<u64>,
    gens: Vec<Mat>,
    expected_order: u64,
) -> Result<GroupRealization> {
    let mut elements: Vec<u64> = set.into_iter().collect();
    elements.sort_unstable();
    let order = elements.len() as u64;
    if order != expected_order {
        return Err(Error::Internal(format!(
            "enumerated order {order} disagrees with classical formula {expected_order}"
        )));
    }
    let (class_of, classes) = conjugacy(&field, dim, &elements, &gens);
    debug_assert_eq!(classes.iter().map(|c| c.size).sum::<u64>(), order);
    Ok(GroupRealization {
        field,
        kind,
        space,
        dim,
        elements,
        class_of,
        classes,
        generators: gens,
        order,
    })
}

fn check_packable(f: &FieldCtx, dim: usize) -> Result<()> {
    let cells = (dim * dim) as u32;
    let mut acc: u64 = 1;
    for _ in 0..cells {
        acc = acc.checked_mul(f.q as u64).ok_or_else(|| {
            Error::BadSpace(format!("{dim}x{dim} over F_{} exceeds packed key width", f.q))
        })?;
    }
    Ok(())
}

/// Enumerate the isometry group (or its special subgroup) of a canonical
/// space. Refuses up front if the classical order exceeds `bound`.
pub fn realize(space: &FormedSpace, kind: GroupKind, bound: u64) -> Result<GroupRealization> {
    assert!(kind != GroupKind::GeneralLinear);
    let f = &space.field;
    check_packable(f, space.dim)?;
    let expected = classical_order(f.q as u64, space.tower, space.dim, kind);
    if expected > bound {
        return Err(Error::OrderBound {
            what: format!("{} dim {} ({:?})", space.tower.label(), space.dim, kind),
            projected: expected,
            bound,
        });
    }
    let dim = space.dim;
    if dim == 0 {
        let mut set = HashSet::new();
        set.insert(0u64); // the empty matrix
        return finish_realization(f.clone(), kind, Some(space.clone()), 0, set, vec![], 1);
    }
    let gens = if space.is_symplectic() {
        sp_generators(space)
    } else {
        orthogonal_generators(space, kind, expected)?
    };
    let mut set = HashSet::with_capacity(expected as usize + 16);
    let id = pack(f, &Mat::identity(dim));
    set.insert(id);
    closure(f, dim, &mut set, vec![id], &gens, bound)?;
    finish_realization(f.clone(), kind, Some(space.clone()), dim, set, gens, expected)
}

/// Reflections generate O; pairs of reflections generate SO. Grow the
/// generating set from the canonical vector stream until the known order is
/// reached, extending the closure incrementally.
fn orthogonal_generators(
    space: &FormedSpace,
    kind: GroupKind,
    expected: u64,
) -> Result<Vec<Mat>> {
    let f = &space.field;
    let dim = space.dim;
    let mut reflections = Vec::new();
    let full_order = classical_order(f.q as u64, space.tower, dim, GroupKind::Isometry);
    {
        let mut set = HashSet::new();
        let id = pack(f, &Mat::identity(dim));
        set.insert(id);
        for v in space.vectors() {
            let Some(r) = reflection(space, &v) else { continue };
            if set.contains(&pack(f, &r)) {
                continue;
            }
            reflections.push(r.clone());
            let frontier: Vec<u64> = set.iter().copied().collect();
            closure(f, dim, &mut set, frontier, &[r], full_order + 1)?;
            if set.len() as u64 == full_order {
                break;
            }
        }
        if set.len() as u64 != full_order {
            return Err(Error::Internal(
                "reflections failed to generate the isometry group".into(),
            ));
        }
    }
    match kind {
        GroupKind::Isometry => Ok(reflections),
        GroupKind::Special => {
            // Products r_0 r_j generate the determinant-one subgroup.
            let r0 = reflections[0].clone();
            let gens: Vec<Mat> = reflections[1..]
                .iter()
                .map(|r| r0.mul(f, r))
                .collect();
            if gens.is_empty() {
                // O_1: the special subgroup is trivial.
                return Ok(vec![]);
            }
            // Verify they generate the right order before handing them back.
            let mut set = HashSet::new();
            let id = pack(f, &Mat::identity(dim));
            set.insert(id);
            closure(f, dim, &mut set, vec![id], &gens, expected + 1)?;
            if set.len() as u64 != expected {
                return Err(Error::Internal(
                    "reflection pairs failed to generate the special subgroup".into(),
                ));
            }
            Ok(gens)
        }
        GroupKind::GeneralLinear => unreachable!(),
    }
}

/// Enumerate GL_n(F_q).
pub fn realize_gl(f: &Arc<FieldCtx>, n: usize, bound: u64) -> Result<GroupRealization> {
    check_packable(f, n)?;
    let expected = gl_order(f.q as u64, n);
    if expected > bound {
        return Err(Error::OrderBound {
            what: format!("GL_{n}(F_{})", f.q),
            projected: expected,
            bound,
        });
    }
    if n == 0 {
        let mut set = HashSet::new();
        set.insert(0u64);
        return finish_realization(f.clone(), GroupKind::GeneralLinear, None, 0, set, vec![], 1);
    }
    let gens = gl_generators(f, n);
    let mut set = HashSet::with_capacity(expected as usize + 16);
    let id = pack(f, &Mat::identity(n));
    set.insert(id);
    closure(f, n, &mut set, vec![id], &gens, bound)?;
    finish_realization(f.clone(), GroupKind::GeneralLinear, None, n, set, gens, expected)
}

/// Parabolic data attached to a flag: the unipotent radical, the
/// upper-triangular GL piece inside it, and Levi embeddings.
#[derive(Debug)]
pub struct ParabolicData {
    pub ell: usize,
    /// Packed keys of N (the unipotent radical), sorted.
    pub n_elements: Vec<u64>,
    /// Packed keys of the embedded U_GL (unipotent upper triangular in the
    /// GL factor of the Levi), a subgroup of N for ell >= 1.
    pub u_gl: Vec<u64>,
}

/// Extract the unipotent radical of the flag-stabilizing parabolic by
/// filtering: g lies in N iff it is trivial on all Levi quotients.
pub fn parabolic(g: &GroupRealization, flag: &FlagDecomposition) -> Result<ParabolicData> {
    let f = &g.field;
    let dim = g.dim;
    let space = g
        .space
        .as_ref()
        .ok_or_else(|| Error::Internal("parabolic needs a formed space".into()))?;
    debug_assert_eq!(space.dim, dim);
    let ell = flag.ell;
    // Column index of e_i and of the complement basis vectors.
    let x_cols: Vec<usize> = flag
        .x_basis
        .iter()
        .map(|e| e.iter().position(|&c| c == 1).unwrap())
        .collect();
    let in_x_upto = |col_support: &[Fq], upto: usize| {
        col_support
            .iter()
            .enumerate()
            .all(|(i, &c)| c == 0 || x_cols[..upto].contains(&i))
    };
    let mut n_elements = Vec::new();
    let mut buf = vec![0u8; dim * dim];
    'elem: for &key in &g.elements {
        unpack_slice(f, key, &mut buf);
        // (g - 1) e_i in span(e_1..e_{i-1})
        for (i, &col) in x_cols.iter().enumerate() {
            let mut diff = vec![0u8; dim];
            for r in 0..dim {
                diff[r] = buf[r * dim + col];
            }
            diff[col] = f.sub(diff[col], 1);
            if !in_x_upto(&diff, i) {
                continue 'elem;
            }
        }
        // (g - 1) b in X for complement basis b
        for &col in &flag.complement_idx {
            let mut diff = vec![0u8; dim];
            for r in 0..dim {
                diff[r] = buf[r * dim + col];
            }
            diff[col] = f.sub(diff[col], 1);
            if !in_x_upto(&diff, ell) {
                continue 'elem;
            }
        }
        n_elements.push(key);
    }
    n_elements.sort_unstable();
    // |N| must be a power of q.
    let mut m = n_elements.len() as u64;
    while m % f.q as u64 == 0 {
        m /= f.q as u64;
    }
    if m != 1 {
        return Err(Error::Internal(format!(
            "unipotent radical size {} is not a q-power",
            n_elements.len()
        )));
    }
    // U_GL: embed each unipotent upper-triangular GL_ell matrix.
    let mut u_gl = Vec::new();
    let strict_pairs: Vec<(usize, usize)> = (0..ell)
        .flat_map(|i| (i + 1..ell).map(move |j| (i, j)))
        .collect();
    let count = (f.q as u64).pow(strict_pairs.len() as u32);
    for mut idx in 0..count {
        let mut z = Mat::identity(ell);
        for &(i, j) in &strict_pairs {
            z[(i, j)] = (idx % f.q as u64) as u8;
            idx /= f.q as u64;
        }
        let emb = levi_embed_gl(space, flag, &z)?;
        let key = pack(f, &emb);
        if g.index_of(key).is_none() {
            return Err(Error::Internal("embedded U_GL element left the group".into()));
        }
        u_gl.push(key);
    }
    u_gl.sort_unstable();
    Ok(ParabolicData {
        ell,
        n_elements,
        u_gl,
    })
}

/// Radical of the block parabolic stabilizing the isotropic subspace X
/// itself (Levi GL_ell x G(complement)): g acts trivially on X, on
/// X-perp/X, and hence on V/X-perp. Differs from the flag radical in that
/// the GL block must be the identity, not merely unipotent.
pub fn block_radical(g: &GroupRealization, flag: &FlagDecomposition) -> Result<Vec<u64>> {
    let f = &g.field;
    let dim = g.dim;
    let ell = flag.ell;
    let x_cols: Vec<usize> = flag
        .x_basis
        .iter()
        .map(|e| e.iter().position(|&c| c == 1).unwrap())
        .collect();
    let in_x = |col: &[Fq]| {
        col.iter()
            .enumerate()
            .all(|(i, &c)| c == 0 || x_cols.contains(&i))
    };
    let mut out = Vec::new();
    let mut buf = vec![0u8; dim * dim];
    'elem: for &key in &g.elements {
        unpack_slice(f, key, &mut buf);
        for &col in &x_cols {
            for r in 0..dim {
                let want = if r == col { 1 } else { 0 };
                if buf[r * dim + col] != want {
                    continue 'elem;
                }
            }
        }
        for &col in &flag.complement_idx {
            let mut diff = vec![0u8; dim];
            for r in 0..dim {
                diff[r] = buf[r * dim + col];
            }
            diff[col] = f.sub(diff[col], 1);
            if !in_x(&diff) {
                continue 'elem;
            }
        }
        out.push(key);
    }
    let _ = ell;
    out.sort_unstable();
    Ok(out)
}

/// Levi embedding of A in GL_ell: A on X, transpose-inverse on X-dual,
/// identity on the complement.
pub fn levi_embed_gl(space: &FormedSpace, flag: &FlagDecomposition, a: &Mat) -> Result<Mat> {
    let f = &space.field;
    let ell = flag.ell;
    assert_eq!((a.rows, a.cols), (ell, ell));
    let a_star = a
        .transpose()
        .inverse(f)
        .ok_or_else(|| Error::BadSpace("singular GL Levi element".into()))?;
    let x_cols: Vec<usize> = flag
        .x_basis
        .iter()
        .map(|e| e.iter().position(|&c| c == 1).unwrap())
        .collect();
    let xd_cols: Vec<usize> = flag
        .x_dual_basis
        .iter()
        .map(|e| e.iter().position(|&c| c == 1).unwrap())
        .collect();
    let mut m = Mat::identity(space.dim);
    for i in 0..ell {
        for j in 0..ell {
            m[(x_cols[i], x_cols[j])] = a[(i, j)];
            m[(xd_cols[i], xd_cols[j])] = a_star[(i, j)];
        }
    }
    Ok(m)
}

/// Levi embedding of an isometry of the complement: identity on X and X-dual.
pub fn levi_embed_complement(space: &FormedSpace, flag: &FlagDecomposition, h: &Mat) -> Mat {
    let cd = flag.complement.dim;
    assert_eq!((h.rows, h.cols), (cd, cd));
    let mut m = Mat::identity(space.dim);
    for a in 0..cd {
        for b in 0..cd {
            m[(flag.complement_idx[a], flag.complement_idx[b])] = h[(a, b)];
        }
    }
    m
}

/// Embed an isometry of the canonical W (v0-perp) into the complement:
/// act through the W basis change, fix v0.
pub fn embed_w_into_complement(flag: &FlagDecomposition, gw: &Mat) -> Result<Mat> {
    let comp = &flag.complement;
    let f = &comp.field;
    let w_map = flag
        .w_map
        .as_ref()
        .ok_or_else(|| Error::Internal("flag carries no W data".into()))?;
    let v0 = flag.v0.as_ref().unwrap();
    let cd = comp.dim;
    let wd = w_map.cols;
    assert_eq!((gw.rows, gw.cols), (wd, wd));
    // Basis change C = [w_map | v0].
    let mut c = Mat::zero(cd, cd);
    for i in 0..cd {
        for j in 0..wd {
            c[(i, j)] = w_map[(i, j)];
        }
        c[(i, wd)] = v0[i];
    }
    let cinv = c
        .inverse(f)
        .ok_or_else(|| Error::Internal("W + v0 basis not invertible".into()))?;
    let mut block = Mat::identity(cd);
    for i in 0..wd {
        for j in 0..wd {
            block[(i, j)] = gw[(i, j)];
        }
    }
    Ok(c.mul(f, &block).mul(f, &cinv))
}

/// The Bessel subgroup H = O(W) x| N with its generic character on N.
#[derive(Debug)]
pub struct BesselSubgroup {
    /// Embedded O(W) elements (packed parent keys), parallel to
    /// `w_class`: the class id of the source element in the abstract W group.
    pub ow_parent: Vec<u64>,
    pub w_class: Vec<u32>,
    /// The radical N (packed parent keys) with the character value of each.
    pub n_parent: Vec<u64>,
    pub n_char: Vec<Complex64>,
}

impl BesselSubgroup {
    pub fn order(&self) -> u64 {
        self.ow_parent.len() as u64 * self.n_parent.len() as u64
    }
}

/// The generic character value on one radical element: the superdiagonal of
/// the GL block plus the pairing of the last y-vector with v0.
pub fn bessel_char_value(
    space: &FormedSpace,
    flag: &FlagDecomposition,
    psi: &AddChar,
    n_mat: &Mat,
) -> Complex64 {
    let f = &space.field;
    let ell = flag.ell;
    let x_cols: Vec<usize> = flag
        .x_basis
        .iter()
        .map(|e| e.iter().position(|&c| c == 1).unwrap())
        .collect();
    let mut arg: Fq = 0;
    // z_{i,i+1} = coefficient of e_i in n e_{i+1}.
    for i in 0..ell.saturating_sub(1) {
        arg = f.add(arg, n_mat[(x_cols[i], x_cols[i + 1])]);
    }
    // y_ell: the complement component of n e'_ell (the image of the last
    // dual-basis vector), a genuine complement vector; paired with v0. The
    // transposed reading n[e_ell-row, complement columns] is a covector and
    // pairing it with v0 is only invariant under the stabilizer of Gram*v0,
    // not of v0, so it is not used here.
    if ell >= 1 {
        let v0 = flag.v0.as_ref().expect("Bessel character needs v0");
        let xd_col = flag.x_dual_basis[ell - 1]
            .iter()
            .position(|&c| c == 1)
            .unwrap();
        let y_ell: Vec<Fq> = flag
            .complement_idx
            .iter()
            .map(|&c| n_mat[(c, xd_col)])
            .collect();
        arg = f.add(arg, flag.complement.pairing(&y_ell, v0));
    }
    psi.eval(arg)
}

/// Assemble the Bessel subgroup for a flag with v0: the embedded isometry
/// group of W and the radical with its character values.
pub fn bessel_subgroup(
    g: &GroupRealization,
    flag: &FlagDecomposition,
    psi: &AddChar,
    w_group: &GroupRealization,
) -> Result<BesselSubgroup> {
    let f = &g.field;
    let space = g.space.as_ref().unwrap();
    let par = parabolic(g, flag)?;
    let mut ow_parent = Vec::with_capacity(w_group.elements.len());
    let mut w_class = Vec::with_capacity(w_group.elements.len());
    for (i, gw) in w_group.iter_mats().enumerate() {
        let in_comp = embed_w_into_complement(flag, &gw)?;
        let emb = levi_embed_complement(space, flag, &in_comp);
        let key = pack(f, &emb);
        if g.index_of(key).is_none() {
            return Err(Error::Internal("embedded O(W) element left the group".into()));
        }
        ow_parent.push(key);
        w_class.push(w_group.class_of[i]);
    }
    let mut n_char = Vec::with_capacity(par.n_elements.len());
    for &nk in &par.n_elements {
        let nm = unpack(f, g.dim, nk);
        n_char.push(bessel_char_value(space, flag, psi, &nm));
    }
    Ok(BesselSubgroup {
        ow_parent,
        w_class,
        n_parent: par.n_elements,
        n_char,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{flag_decomposition, standard_space};
    use crate::scalars::{make_field, psi_pair, SquareClass};

    const BOUND: u64 = 20_000_000;

    fn preserves_form(g: &GroupRealization) -> bool {
        let Some(space) = &g.space else { return true };
        let f = &g.field;
        g.iter_mats()
            .all(|m| m.transpose().mul(f, &space.gram).mul(f, &m) == space.gram)
    }

    #[test]
    fn sl2_orders_and_classes() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::Sp, 2).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        assert_eq!(g.order, 24);
        assert_eq!(g.num_classes(), 7);
        assert!(preserves_form(&g));
        let f5 = make_field(5).unwrap();
        let v5 = standard_space(&f5, Tower::Sp, 2).unwrap();
        let g5 = realize(&v5, GroupKind::Isometry, BOUND).unwrap();
        assert_eq!(g5.order, 120);
    }

    #[test]
    fn sp4_f3_order() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::Sp, 4).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        assert_eq!(g.order, 51840);
        assert!(preserves_form(&g));
        assert_eq!(g.classes.iter().map(|c| c.size).sum::<u64>(), 51840);
        // identity class has size 1
        assert_eq!(g.classes[g.identity_class() as usize].size, 1);
    }

    #[test]
    fn small_orthogonal_orders() {
        let f = make_field(3).unwrap();
        for (tower, dim, expect) in [
            (Tower::OEvenMinus, 2, 8u64),
            (Tower::OEvenPlus, 2, 4),
            (Tower::OOddPlus, 3, 48),
            (Tower::OOddMinus, 3, 48),
            (Tower::OOddPlus, 1, 2),
        ] {
            let v = standard_space(&f, tower, dim).unwrap();
            let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
            assert_eq!(g.order, expect, "{} dim {dim}", tower.label());
            assert!(preserves_form(&g));
            if dim >= 1 {
                let so = realize(&v, GroupKind::Special, BOUND).unwrap();
                assert_eq!(so.order * 2, g.order, "SO index 2 in O");
                assert!(so.iter_mats().all(|m| m.det(&g.field) == 1));
            }
        }
    }

    #[test]
    fn o5_f3_order() {
        let f = make_field(3).unwrap();
        for tower in [Tower::OOddPlus, Tower::OOddMinus] {
            let v = standard_space(&f, tower, 5).unwrap();
            let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
            assert_eq!(g.order, 103_680);
        }
    }

    #[test]
    fn gl_realizations() {
        let f = make_field(5).unwrap();
        let g = realize_gl(&f, 2, BOUND).unwrap();
        assert_eq!(g.order, 480);
        let g1 = realize_gl(&f, 1, BOUND).unwrap();
        assert_eq!(g1.order, 4);
    }

    #[test]
    fn order_bound_refusal() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::Sp, 6).unwrap();
        let err = realize(&v, GroupKind::Isometry, BOUND).unwrap_err();
        assert!(matches!(err, Error::OrderBound { .. }));
    }

    #[test]
    fn class_map_constant_on_orbits() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::OOddPlus, 3).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        // Exhaustive: class(hxh^-1) = class(x) for all h, x.
        for h in g.iter_mats() {
            let hinv = g.inverse_mat(&h);
            for x in g.iter_mats() {
                let c = h.mul(&f, &x).mul(&f, &hinv);
                assert_eq!(g.class_of_mat(&x).unwrap(), g.class_of_mat(&c).unwrap());
            }
        }
    }

    #[test]
    fn parabolic_radical_sizes() {
        let f = make_field(3).unwrap();
        // O_5: depth-1 radical has q^3 = 27 elements.
        let v = standard_space(&f, Tower::OOddPlus, 5).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        let flag = flag_decomposition(&v, 1, Some(SquareClass(1))).unwrap();
        let par = parabolic(&g, &flag).unwrap();
        assert_eq!(par.n_elements.len(), 27);
        assert_eq!(par.u_gl.len(), 1);
        // Depth-2 radical: dim l(l-1) + l(n-2l) = 2 + 2 = 4.
        let flag2 = flag_decomposition(&v, 2, None).unwrap();
        let par2 = parabolic(&g, &flag2).unwrap();
        assert_eq!(par2.n_elements.len(), 81);
        assert_eq!(par2.u_gl.len(), 3);
        // U_GL sits inside N.
        for k in &par2.u_gl {
            assert!(par2.n_elements.binary_search(k).is_ok());
        }
        // Sp_4 depth-1 radical is the Heisenberg group of order q^3.
        let sp = standard_space(&f, Tower::Sp, 4).unwrap();
        let gs = realize(&sp, GroupKind::Isometry, BOUND).unwrap();
        let fl = flag_decomposition(&sp, 1, None).unwrap();
        let ps = parabolic(&gs, &fl).unwrap();
        assert_eq!(ps.n_elements.len(), 27);
        // Radicals are closed under multiplication.
        for &a in &ps.n_elements {
            let am = unpack(&f, 4, a);
            for &b in &ps.n_elements {
                let bm = unpack(&f, 4, b);
                let prod = pack(&f, &am.mul(&f, &bm));
                assert!(ps.n_elements.binary_search(&prod).is_ok());
            }
        }
        // ell = 0: trivial radical.
        let fl0 = flag_decomposition(&sp, 0, None).unwrap();
        let p0 = parabolic(&gs, &fl0).unwrap();
        assert_eq!(p0.n_elements.len(), 1);
    }

    #[test]
    fn bessel_subgroup_structure() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let v = standard_space(&f, Tower::OOddPlus, 5).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        for class in [SquareClass(1), SquareClass(-1)] {
            let flag = flag_decomposition(&v, 1, Some(class)).unwrap();
            let w_space = flag.w_space.clone().unwrap();
            let wg = realize(&w_space, GroupKind::Isometry, BOUND).unwrap();
            let h = bessel_subgroup(&g, &flag, &psi, &wg).unwrap();
            assert_eq!(h.order(), wg.order * 27);
            // Character is a homomorphism on N (exhaustive).
            let nm: Vec<Mat> = h.n_parent.iter().map(|&k| unpack(&f, 5, k)).collect();
            for (i, a) in nm.iter().enumerate() {
                for (j, b) in nm.iter().enumerate() {
                    let prod = a.mul(&f, b);
                    let k = pack(&f, &prod);
                    let idx = h.n_parent.binary_search(&k).expect("N closed");
                    let diff = (h.n_char[i] * h.n_char[j] - h.n_char[idx]).norm();
                    assert!(diff < 1e-9, "character not multiplicative");
                }
            }
            // O(W)-conjugation fixes the character (exhaustive).
            for (oi, &ok) in h.ow_parent.iter().enumerate() {
                let om = unpack(&f, 5, ok);
                let oinv = g.inverse_mat(&om);
                for (i, a) in nm.iter().enumerate() {
                    let conj = om.mul(&f, a).mul(&f, &oinv);
                    let k = pack(&f, &conj);
                    let idx = h
                        .n_parent
                        .binary_search(&k)
                        .expect("O(W) normalizes N");
                    assert!((h.n_char[i] - h.n_char[idx]).norm() < 1e-9, "oi={oi}");
                }
            }
        }
    }

    #[test]
    fn levi_embeddings_are_homomorphisms() {
        let f = make_field(3).unwrap();
        let v = standard_space(&f, Tower::OOddPlus, 5).unwrap();
        let g = realize(&v, GroupKind::Isometry, BOUND).unwrap();
        let flag = flag_decomposition(&v, 1, Some(SquareClass(1))).unwrap();
        let gl1 = realize_gl(&f, 1, BOUND).unwrap();
        for a in gl1.iter_mats() {
            for b in gl1.iter_mats() {
                let ea = levi_embed_gl(&v, &flag, &a).unwrap();
                let eb = levi_embed_gl(&v, &flag, &b).unwrap();
                let eab = levi_embed_gl(&v, &flag, &a.mul(&f, &b)).unwrap();
                assert_eq!(ea.mul(&f, &eb), eab);
                assert!(g.contains(&ea));
            }
        }
        let comp_group = realize(&flag.complement, GroupKind::Isometry, BOUND).unwrap();
        for a in comp_group.iter_mats() {
            for b in comp_group.iter_mats() {
                let ea = levi_embed_complement(&v, &flag, &a);
                let eb = levi_embed_complement(&v, &flag, &b);
                assert_eq!(ea.mul(&f, &eb), levi_embed_complement(&v, &flag, &a.mul(&f, &b)));
                assert!(g.contains(&ea));
            }
        }
    }
}
