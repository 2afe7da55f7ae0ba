//! Class-function algebra over realized groups: inner products, parabolic
//! induction, (twisted) Jacquet restriction, cuspidality testing,
//! decomposition against candidate irreducibles, and explicit character
//! tables for the tiny orthogonal groups (dihedral in dimension 2).
//!
//! Hom-space dimensions are always character inner products here; explicit
//! intertwiner solving lives only in the oracle module.

use crate::groups::{pack, unpack, GroupRealization};
use crate::linalg::Mat;
use crate::scalars::{legendre, FieldCtx, Fq};
use crate::{round_int, Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

pub type Group = Arc<GroupRealization>;

/// A complex-valued function constant on conjugacy classes.
#[derive(Debug, Clone)]
pub struct ClassFunction {
    pub group: Group,
    /// One value per conjugacy class, indexed by class id.
    pub values: Vec<Complex64>,
    pub is_character: bool,
    pub is_irreducible: bool,
}

pub fn same_group(a: &Group, b: &Group) -> bool {
    Arc::ptr_eq(a, b)
        || (a.order == b.order
            && a.dim == b.dim
            && a.kind == b.kind
            && a.elements == b.elements
            && a.class_of == b.class_of)
}

impl ClassFunction {
    pub fn new(group: Group, values: Vec<Complex64>) -> ClassFunction {
        assert_eq!(values.len(), group.num_classes());
        ClassFunction {
            group,
            values,
            is_character: false,
            is_irreducible: false,
        }
    }
    pub fn flagged(mut self, character: bool, irreducible: bool) -> ClassFunction {
        self.is_character = character;
        self.is_irreducible = irreducible;
        self
    }
    pub fn zero(group: Group) -> ClassFunction {
        let n = group.num_classes();
        ClassFunction::new(group, vec![Complex64::new(0.0, 0.0); n])
    }
    pub fn trivial(group: Group) -> ClassFunction {
        let n = group.num_classes();
        ClassFunction::new(group, vec![Complex64::new(1.0, 0.0); n]).flagged(true, true)
    }
    /// The linear character g -> det(g) read as a sign (orthogonal groups).
    pub fn sign_det(group: Group) -> ClassFunction {
        let f = group.field.clone();
        let values = (0..group.num_classes() as u32)
            .map(|c| {
                let d = group.class_rep(c).det(&f);
                if d == 1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            })
            .collect();
        ClassFunction::new(group, values).flagged(true, true)
    }
    pub fn regular(group: Group) -> ClassFunction {
        let order = group.order as f64;
        let idc = group.identity_class();
        let mut cf = ClassFunction::zero(group);
        cf.values[idc as usize] = Complex64::new(order, 0.0);
        cf.is_character = true;
        cf
    }
    pub fn dim(&self) -> Result<i64> {
        let v = self.values[self.group.identity_class() as usize];
        if v.im.abs() > 1e-6 {
            return Err(Error::NumericIntegrity("complex dimension".into()));
        }
        round_int(v.re)
    }
    pub fn value_at(&self, m: &Mat) -> Result<Complex64> {
        Ok(self.values[self.group.class_of_mat(m)? as usize])
    }
    pub fn value_at_key(&self, key: u64) -> Result<Complex64> {
        let i = self
            .group
            .index_of(key)
            .ok_or_else(|| Error::Internal("value_at_key of non-element".into()))?;
        Ok(self.values[self.group.class_of[i] as usize])
    }
    pub fn conj(&self) -> ClassFunction {
        let values = self.values.iter().map(|v| v.conj()).collect();
        ClassFunction::new(self.group.clone(), values)
            .flagged(self.is_character, self.is_irreducible)
    }
    pub fn add(&self, other: &ClassFunction) -> ClassFunction {
        assert!(same_group(&self.group, &other.group));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        ClassFunction::new(self.group.clone(), values)
            .flagged(self.is_character && other.is_character, false)
    }
    pub fn sub(&self, other: &ClassFunction) -> ClassFunction {
        assert!(same_group(&self.group, &other.group));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        ClassFunction::new(self.group.clone(), values)
    }
    pub fn scale(&self, c: Complex64) -> ClassFunction {
        let values = self.values.iter().map(|v| v * c).collect();
        ClassFunction::new(self.group.clone(), values)
    }
    /// Pointwise product (tensor product of representations).
    pub fn tensor(&self, other: &ClassFunction) -> ClassFunction {
        assert!(same_group(&self.group, &other.group));
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        ClassFunction::new(self.group.clone(), values)
            .flagged(self.is_character && other.is_character, false)
    }
    pub fn norm_sq(&self) -> f64 {
        inner(self, self).re
    }
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm() < 1e-8)
    }
}

/// (1/|G|) sum_g f(g) conj(h(g)), as a complex number.
pub fn inner(f: &ClassFunction, h: &ClassFunction) -> Complex64 {
    assert!(same_group(&f.group, &h.group));
    let g = &f.group;
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, cls) in g.classes.iter().enumerate() {
        acc += cls.size as f64 * f.values[c] * h.values[c].conj();
    }
    acc / g.order as f64
}

/// Inner product of two genuine characters: a nonnegative integer.
pub fn inner_int(f: &ClassFunction, h: &ClassFunction) -> Result<i64> {
    let v = inner(f, h);
    if v.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity(format!(
            "character inner product has imaginary part {}",
            v.im
        )));
    }
    let m = round_int(v.re)?;
    if m < 0 {
        return Err(Error::NumericIntegrity(format!(
            "negative character inner product {m}"
        )));
    }
    Ok(m)
}

/// Parabolic induction from P = M . N: `levi` enumerates M as packed parent
/// keys with the value of the inducing character at each element (inflated
/// trivially across the radical), `radical` enumerates N.
pub fn induce_from_parabolic(
    big: &Group,
    levi: &[(u64, Complex64)],
    radical: &[u64],
) -> Result<ClassFunction> {
    let f = &big.field;
    let dim = big.dim;
    let p_order = (levi.len() * radical.len()) as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); big.num_classes()];
    for &(mk, val) in levi {
        let mm = unpack(f, dim, mk);
        for &nk in radical {
            let nm = unpack(f, dim, nk);
            let p = mm.mul(f, &nm);
            let cls = big.class_of_mat(&p)?;
            acc[cls as usize] += val;
        }
    }
    let values = acc
        .iter()
        .enumerate()
        .map(|(c, &s)| s * (big.order as f64 / big.classes[c].size as f64) / p_order)
        .collect();
    Ok(ClassFunction::new(big.clone(), values).flagged(true, false))
}

/// Convenience Levi enumeration for a maximal parabolic with Levi
/// GL_l x G(complement): all products of the two embedded factors, with
/// chi_gl tensor chi_comp values.
pub fn levi_gl_comp(
    space: &crate::forms::FormedSpace,
    flag: &crate::forms::FlagDecomposition,
    gl: &Group,
    chi_gl: &ClassFunction,
    comp: &Group,
    chi_comp: &ClassFunction,
) -> Result<Vec<(u64, Complex64)>> {
    let f = &space.field;
    assert!(same_group(gl, &chi_gl.group) && same_group(comp, &chi_comp.group));
    let mut out = Vec::with_capacity(gl.elements.len() * comp.elements.len());
    for (gi, a) in gl.iter_mats().enumerate() {
        let ea = crate::groups::levi_embed_gl(space, flag, &a)?;
        let va = chi_gl.values[gl.class_of[gi] as usize];
        for (ci, h) in comp.iter_mats().enumerate() {
            let eh = crate::groups::levi_embed_complement(space, flag, &h);
            let key = pack(f, &ea.mul(f, &eh));
            let vh = chi_comp.values[comp.class_of[ci] as usize];
            out.push((key, va * vh));
        }
    }
    Ok(out)
}

/// Values of the untwisted Jacquet restriction of `pi` at the given Levi
/// elements: value at m is (1/|N|) sum_n pi(m n).
pub fn jacquet_values(
    pi: &ClassFunction,
    levi_keys: &[u64],
    radical: &[u64],
) -> Result<Vec<Complex64>> {
    let big = &pi.group;
    let f = &big.field;
    let dim = big.dim;
    let mut out = Vec::with_capacity(levi_keys.len());
    for &mk in levi_keys {
        let mm = unpack(f, dim, mk);
        let mut acc = Complex64::new(0.0, 0.0);
        for &nk in radical {
            let nm = unpack(f, dim, nk);
            acc += pi.value_at(&mm.mul(f, &nm))?;
        }
        out.push(acc / radical.len() as f64);
    }
    Ok(out)
}

/// Twisted Jacquet module against a character of the radical, restricted to
/// a stabilizing subgroup L given by its abstract realization and the
/// embedded parent key of each element: value at l is
/// (1/|N|) sum_n conj(chi_N(n)) pi(l n), reported per class of L.
pub fn jacquet_twisted(
    pi: &ClassFunction,
    radical: &[u64],
    radical_char: &[Complex64],
    l_group: &Group,
    l_parent_keys: &[u64],
) -> Result<ClassFunction> {
    let big = &pi.group;
    let f = &big.field;
    let dim = big.dim;
    assert_eq!(radical.len(), radical_char.len());
    assert_eq!(l_parent_keys.len(), l_group.elements.len());
    // Verify stabilization: conjugation by each l permutes (N, chi_N).
    for &lk in l_parent_keys {
        let lm = unpack(f, dim, lk);
        let linv = lm.inverse(f).ok_or_else(|| Error::Internal("singular L element".into()))?;
        for (i, &nk) in radical.iter().enumerate() {
            let nm = unpack(f, dim, nk);
            let cm = lm.mul(f, &nm).mul(f, &linv);
            let ck = pack(f, &cm);
            let j = radical
                .binary_search(&ck)
                .map_err(|_| Error::ValidationGate("L does not normalize the radical".into()))?;
            if (radical_char[i] - radical_char[j]).norm() > 1e-9 {
                return Err(Error::ValidationGate(
                    "L-conjugation moves the radical character".into(),
                ));
            }
        }
    }
    let mut class_val = vec![Complex64::new(0.0, 0.0); l_group.num_classes()];
    let mut class_seen = vec![false; l_group.num_classes()];
    for (li, &lk) in l_parent_keys.iter().enumerate() {
        let cls = l_group.class_of[li] as usize;
        let lm = unpack(f, dim, lk);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &nk) in radical.iter().enumerate() {
            let nm = unpack(f, dim, nk);
            acc += radical_char[i].conj() * pi.value_at(&lm.mul(f, &nm))?;
        }
        acc /= radical.len() as f64;
        if class_seen[cls] {
            if (class_val[cls] - acc).norm() > 1e-7 {
                return Err(Error::NumericIntegrity(
                    "twisted Jacquet values not constant on L-classes".into(),
                ));
            }
        } else {
            class_val[cls] = acc;
            class_seen[cls] = true;
        }
    }
    Ok(ClassFunction::new(l_group.clone(), class_val).flagged(pi.is_character, false))
}

/// Cuspidality: the untwisted Jacquet module along the radical of every
/// proper standard parabolic (isotropic-subspace stabilizer, depth
/// 1..witt index) vanishes. Its dimension is the average of `pi` over the
/// radical, so vanishing is a single number per depth.
pub fn is_cuspidal(pi: &ClassFunction) -> Result<bool> {
    let g = &pi.group;
    let space = g
        .space
        .as_ref()
        .ok_or_else(|| Error::Internal("cuspidality needs a formed space".into()))?;
    for ell in 1..=space.witt_index {
        let flag = crate::forms::flag_decomposition(space, ell, None)?;
        let radical = crate::groups::block_radical(g, &flag)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for &nk in &radical {
            acc += pi.value_at_key(nk)?;
        }
        let dim = acc / radical.len() as f64;
        if dim.norm() > 1e-7 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multiplicities of orthonormal candidates in f, plus the residual norm
/// <f,f> - sum m_i^2 (zero certifies completeness of the candidate list).
pub fn decompose(f: &ClassFunction, candidates: &[ClassFunction]) -> Result<(Vec<i64>, f64)> {
    let mut ms = Vec::with_capacity(candidates.len());
    for c in candidates {
        let v = inner(f, c);
        if v.im.abs() > 1e-6 {
            return Err(Error::NumericIntegrity("complex multiplicity".into()));
        }
        let m = round_int(v.re)?;
        if m < 0 {
            return Err(Error::NumericIntegrity(format!("negative multiplicity {m}")));
        }
        ms.push(m);
    }
    let residual = f.norm_sq() - ms.iter().map(|&m| (m * m) as f64).sum::<f64>();
    Ok((ms, residual))
}

/// Complete irreducible character table for the tiny orthogonal groups:
/// the two-element group in dimension <= 1 and the dihedral groups in
/// dimension 2. Certified by sum dim^2 = |G| and orthonormality.
pub fn irr_small(group: &Group) -> Result<Vec<ClassFunction>> {
    let list = match group.dim {
        0 => vec![ClassFunction::trivial(group.clone())],
        1 => vec![
            ClassFunction::trivial(group.clone()),
            ClassFunction::sign_det(group.clone()),
        ],
        2 => irr_dihedral(group)?,
        d => {
            return Err(Error::BadSpace(format!(
                "no built-in character table in dimension {d}"
            )))
        }
    };
    let mut dimsq = 0i64;
    for (i, a) in list.iter().enumerate() {
        let d = a.dim()?;
        dimsq += d * d;
        for (j, b) in list.iter().enumerate() {
            let want = if i == j { 1 } else { 0 };
            if inner_int(a, b)? != want {
                return Err(Error::Internal("tiny table not orthonormal".into()));
            }
        }
    }
    if dimsq != group.order as i64 {
        return Err(Error::Internal(format!(
            "tiny table incomplete: sum dim^2 = {dimsq} vs |G| = {}",
            group.order
        )));
    }
    Ok(list)
}

/// Character table of a dihedral O_2 group of order 2m, m even, built from a
/// maximal-order rotation and the reflection coset.
fn irr_dihedral(group: &Group) -> Result<Vec<ClassFunction>> {
    let f = &group.field;
    let m = (group.order / 2) as usize;
    if m % 2 != 0 {
        return Err(Error::Internal("dihedral with odd rotation order".into()));
    }
    // Rotation generator: a determinant-one element of order m.
    let rot = group
        .iter_mats()
        .find(|g| {
            g.det(f) == 1 && {
                let mut x = g.clone();
                let mut ord = 1;
                while x != Mat::identity(2) {
                    x = x.mul(f, g);
                    ord += 1;
                }
                ord == m
            }
        })
        .ok_or_else(|| Error::Internal("no maximal rotation found".into()))?;
    let refl = group
        .iter_mats()
        .find(|g| g.det(f) != 1)
        .ok_or_else(|| Error::Internal("no reflection found".into()))?;
    // Discrete log of each class representative: g = rot^k or rot^k * refl.
    let mut powers = Vec::with_capacity(m);
    let mut x = Mat::identity(2);
    for _ in 0..m {
        powers.push(x.clone());
        x = x.mul(f, &rot);
    }
    let log = |g: &Mat| -> Result<(usize, bool)> {
        if g.det(f) == 1 {
            let k = powers
                .iter()
                .position(|p| p == g)
                .ok_or_else(|| Error::Internal("rotation log failed".into()))?;
            Ok((k, false))
        } else {
            let grinv = g.mul(f, &refl.inverse(f).unwrap());
            let k = powers
                .iter()
                .position(|p| *p == grinv)
                .ok_or_else(|| Error::Internal("reflection log failed".into()))?;
            Ok((k, true))
        }
    };
    let reps: Vec<(usize, bool)> = (0..group.num_classes() as u32)
        .map(|c| log(&group.class_rep(c)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    // Four linear characters (m even): 1, det, (-1)^k, (-1)^k * det.
    for (use_parity, use_det) in [(false, false), (false, true), (true, false), (true, true)] {
        let values = reps
            .iter()
            .map(|&(k, is_refl)| {
                let mut v = 1.0;
                if use_parity && k % 2 == 1 {
                    v = -v;
                }
                if use_det && is_refl {
                    v = -v;
                }
                Complex64::new(v, 0.0)
            })
            .collect();
        out.push(ClassFunction::new(group.clone(), values).flagged(true, true));
    }
    // Two-dimensional characters: rot^k -> 2cos(2 pi j k / m), 0 on the
    // reflection coset, for j = 1..m/2-1.
    for j in 1..m / 2 {
        let values = reps
            .iter()
            .map(|&(k, is_refl)| {
                if is_refl {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(2.0 * (TAU * j as f64 * k as f64 / m as f64).cos(), 0.0)
                }
            })
            .collect();
        out.push(ClassFunction::new(group.clone(), values).flagged(true, true));
    }
    Ok(out)
}

/// Discrete-log table of F_q^*: dlog[a] for a in 1..q with respect to a
/// fixed generator (the least primitive root).
pub fn fq_dlog(f: &FieldCtx) -> Vec<usize> {
    let q = f.q;
    'gen: for g in 2..q as Fq {
        let mut dlog = vec![usize::MAX; q];
        let mut x: Fq = 1;
        for e in 0..q - 1 {
            if dlog[x as usize] != usize::MAX {
                continue 'gen;
            }
            dlog[x as usize] = e;
            x = f.mul(x, g);
        }
        return dlog;
    }
    unreachable!("no primitive root");
}

/// The character a -> exp(2 pi i k dlog(a)/(q-1)) of F_q^* = GL_1.
pub fn gl1_char_value(f: &FieldCtx, dlog: &[usize], k: usize, a: Fq) -> Complex64 {
    let m = f.q - 1;
    Complex64::from_polar(1.0, TAU * ((k * dlog[a as usize]) % m) as f64 / m as f64)
}

/// A cuspidal irreducible character of GL_2 attached to a regular character
/// of the quadratic-extension torus, via the classical class values:
/// (q-1) theta(a) on central a, -theta(a) on a non-semisimple class,
/// 0 on split regular semisimple, -(theta(lam) + theta(lam^q)) on elliptic.
/// The output is certified: dimension q-1, norm 1, vanishing unipotent
/// average (cuspidality).
pub fn gl2_cuspidal(gl2: &Group, k: usize) -> Result<ClassFunction> {
    let f = &gl2.field;
    let q = f.q;
    let big = q * q - 1;
    if (k * (q - 1)) % big == 0 {
        return Err(Error::BadSpace(format!("torus character {k} is not regular")));
    }
    // F_{q^2} = F_q[sqrt(delta)] as pairs (x, y) = x + y sqrt(delta).
    let delta = f.least_nonsquare();
    let ext_mul = |a: (Fq, Fq), b: (Fq, Fq)| {
        (
            f.add(f.mul(a.0, b.0), f.mul(delta, f.mul(a.1, b.1))),
            f.add(f.mul(a.0, b.1), f.mul(a.1, b.0)),
        )
    };
    // Discrete log on the extension by enumeration from a found generator.
    let idx = |a: (Fq, Fq)| a.0 as usize * q + a.1 as usize;
    let mut ext_dlog: Vec<usize> = Vec::new();
    'gen: for g0 in 0..q as Fq {
        for g1 in 0..q as Fq {
            if g0 == 0 && g1 == 0 {
                continue;
            }
            let g = (g0, g1);
            let mut dlog = vec![usize::MAX; q * q];
            let mut x = (1 as Fq, 0 as Fq);
            let mut ok = true;
            for e in 0..big {
                if dlog[idx(x)] != usize::MAX {
                    ok = false;
                    break;
                }
                dlog[idx(x)] = e;
                x = ext_mul(x, g);
            }
            if ok {
                ext_dlog = dlog;
                break 'gen;
            }
        }
    }
    let theta = |lam: (Fq, Fq)| {
        let e = ext_dlog[idx(lam)];
        Complex64::from_polar(1.0, TAU * ((k * e) % big) as f64 / big as f64)
    };
    let sqrt_fq = |x: Fq| (0..q as Fq).find(|&s| f.mul(s, s) == x);
    let mut values = Vec::with_capacity(gl2.num_classes());
    for c in 0..gl2.num_classes() as u32 {
        let m = gl2.class_rep(c);
        let tr = f.add(m[(0, 0)], m[(1, 1)]);
        let det = m.det(f);
        let four = f.mul(2, 2);
        let disc = f.sub(f.mul(tr, tr), f.mul(four, det));
        let half_tr = f.mul(f.half(), tr);
        let central = m[(0, 1)] == 0 && m[(1, 0)] == 0 && m[(0, 0)] == m[(1, 1)];
        let v = if central {
            theta((m[(0, 0)], 0)) * (q - 1) as f64
        } else if disc == 0 {
            -theta((half_tr, 0))
        } else if legendre(f, disc) == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            // Eigenvalues half_tr +- y sqrt(delta) with y^2 = disc/(4 delta).
            let y2 = f.mul(disc, f.inv(f.mul(four, delta)));
            let y = sqrt_fq(y2).ok_or_else(|| Error::Internal("elliptic sqrt failed".into()))?;
            -(theta((half_tr, y)) + theta((half_tr, f.neg(y))))
        };
        values.push(v);
    }
    let tau = ClassFunction::new(gl2.clone(), values).flagged(true, true);
    if tau.dim()? != (q - 1) as i64 || inner_int(&tau, &tau)? != 1 {
        return Err(Error::ValidationGate("cuspidal GL_2 character failed its certificate".into()));
    }
    // Cuspidality: the average over the upper unipotent subgroup vanishes.
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..q as Fq {
        let mut u = Mat::identity(2);
        u[(0, 1)] = x;
        acc += tau.value_at(&u)?;
    }
    if (acc / q as f64).norm() > 1e-8 {
        return Err(Error::ValidationGate("GL_2 character is not cuspidal".into()));
    }
    Ok(tau)
}
