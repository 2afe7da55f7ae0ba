//! Theta lifting at the character level: big theta class functions,
//! multiplicities, first-occurrence indices along Witt towers, see-saw
//! identity checks, and the compatibility of lifting with parabolic
//! induction.
//!
//! Everything here is a double class sum against the restricted oscillator
//! character; no carrier-space object is ever materialized. First-occurrence
//! scans need only the lift dimension, which pins the target group at the
//! identity, so tower members beyond the enumeration bound are still
//! scannable.

use crate::classfun::{same_group, ClassFunction, Group};
use crate::forms::{line_space, standard_space, FormedSpace, Tower};
use crate::linalg::Mat;
use crate::round_int;
use crate::scalars::AddChar;
use crate::weil::{dual_pair_restrict, PairCharacter};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// A realized dual pair with its restricted oscillator character tabulated
/// on class pairs.
pub struct DualPairCtx {
    pub o_group: Group,
    pub sp_group: Group,
    pub pair: PairCharacter,
    /// table[co * sp_classes + cs].
    pub table: Vec<Complex64>,
}

pub fn dual_pair_ctx(psi: &AddChar, o_group: &Group, sp_group: &Group) -> Result<DualPairCtx> {
    let o_space = o_group
        .space
        .as_ref()
        .ok_or_else(|| Error::BadSpace("orthogonal side must carry a form".into()))?;
    let pair = dual_pair_restrict(psi, &o_space.gram, sp_group.dim)?;
    let nc_o = o_group.num_classes();
    let nc_s = sp_group.num_classes();
    let table: Result<Vec<Complex64>> = (0..nc_o * nc_s)
        .into_par_iter()
        .map(|i| {
            let g = o_group.class_rep((i / nc_s) as u32);
            let h = sp_group.class_rep((i % nc_s) as u32);
            pair.value(&g, &h)
        })
        .collect();
    Ok(DualPairCtx {
        o_group: o_group.clone(),
        sp_group: sp_group.clone(),
        pair,
        table: table?,
    })
}

impl DualPairCtx {
    pub fn value(&self, co: u32, cs: u32) -> Complex64 {
        self.table[co as usize * self.sp_group.num_classes() + cs as usize]
    }

    /// Theta lift of a character across the pair; the side is inferred from
    /// the group `pi` lives on. A genuine character (or zero) comes back.
    pub fn big_theta(&self, pi: &ClassFunction) -> Result<ClassFunction> {
        let (from, to, from_is_o) = if same_group(&pi.group, &self.o_group) {
            (&self.o_group, &self.sp_group, true)
        } else if same_group(&pi.group, &self.sp_group) {
            (&self.sp_group, &self.o_group, false)
        } else {
            return Err(Error::BadSpace("class function lives on neither side".into()));
        };
        let mut values = vec![Complex64::new(0.0, 0.0); to.num_classes()];
        for (ct, v) in values.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cf, cls) in from.classes.iter().enumerate() {
                let w = if from_is_o {
                    self.value(cf as u32, ct as u32)
                } else {
                    self.value(ct as u32, cf as u32)
                };
                acc += cls.size as f64 * w * pi.values[cf].conj();
            }
            *v = acc / from.order as f64;
        }
        let out = ClassFunction::new(to.clone(), values).flagged(pi.is_character, false);
        let d = out.values[to.identity_class() as usize];
        if d.im.abs() > 1e-6 || round_int(d.re)? < 0 {
            return Err(Error::NumericIntegrity(format!(
                "big theta dimension {d} is not a nonnegative integer"
            )));
        }
        Ok(out)
    }

    /// m(pi, pi') = <omega, pi x pi'> over G x G', a nonnegative integer.
    pub fn multiplicity(&self, pi_o: &ClassFunction, pi_sp: &ClassFunction) -> Result<i64> {
        assert!(same_group(&pi_o.group, &self.o_group));
        assert!(same_group(&pi_sp.group, &self.sp_group));
        let mut acc = Complex64::new(0.0, 0.0);
        for (co, cls_o) in self.o_group.classes.iter().enumerate() {
            let mut inner_acc = Complex64::new(0.0, 0.0);
            for (cs, cls_s) in self.sp_group.classes.iter().enumerate() {
                inner_acc += cls_s.size as f64
                    * self.value(co as u32, cs as u32)
                    * pi_sp.values[cs].conj();
            }
            acc += cls_o.size as f64 * inner_acc * pi_o.values[co].conj();
        }
        acc /= (self.o_group.order * self.sp_group.order) as f64;
        if acc.im.abs() > 1e-6 {
            return Err(Error::NumericIntegrity(format!(
                "multiplicity has imaginary part {}",
                acc.im
            )));
        }
        let m = round_int(acc.re)?;
        if m < 0 {
            return Err(Error::NumericIntegrity(format!("negative multiplicity {m}")));
        }
        Ok(m)
    }
}

/// Dimension of the theta lift of `pi` into the isometry group of the target
/// space, computed without realizing the target: only the identity column of
/// the pair character is needed.
pub fn lift_dimension(psi: &AddChar, pi: &ClassFunction, target: &FormedSpace) -> Result<i64> {
    let src = &pi.group;
    let src_space = src
        .space
        .as_ref()
        .ok_or_else(|| Error::BadSpace("lift source must carry a form".into()))?;
    let pair = if src_space.is_symplectic() {
        dual_pair_restrict(psi, &target.gram, src.dim)?
    } else {
        dual_pair_restrict(psi, &src_space.gram, target.dim)?
    };
    let id_t = Mat::identity(target.dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, cls) in src.classes.iter().enumerate() {
        let rep = src.class_rep(c as u32);
        let v = if src_space.is_symplectic() {
            pair.value(&id_t, &rep)?
        } else {
            pair.value(&rep, &id_t)?
        };
        acc += cls.size as f64 * v * pi.values[c].conj();
    }
    acc /= src.order as f64;
    if acc.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity(format!(
            "lift dimension has imaginary part {}",
            acc.im
        )));
    }
    let d = round_int(acc.re)?;
    if d < 0 {
        return Err(Error::NumericIntegrity(format!("negative lift dimension {d}")));
    }
    Ok(d)
}

/// Result of a first-occurrence scan along a Witt tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Occurrence {
    At(usize),
    /// The scan bound was hit with every lift zero; the index is only known
    /// to be at least this value.
    UndeterminedAtLeast(usize),
}

#[derive(Debug, Clone)]
pub struct FirstOccurrence {
    pub occurrence: Occurrence,
    /// Lift dimensions per tower index scanned (0 for absent members).
    pub dims: Vec<i64>,
}

fn tower_member_dim(tower: Tower, index: usize) -> Option<usize> {
    match tower {
        Tower::Sp | Tower::OEvenPlus => Some(2 * index),
        Tower::OEvenMinus => {
            if index == 0 {
                None
            } else {
                Some(2 * index)
            }
        }
        Tower::OOddPlus | Tower::OOddMinus => Some(2 * index + 1),
    }
}

/// Scan the target tower from the bottom for the first nonzero theta lift of
/// `pi`. The source side is read off `pi`'s group; the target tower must be
/// on the opposite side of the pair.
pub fn first_occurrence(
    psi: &AddChar,
    pi: &ClassFunction,
    target_tower: Tower,
    scan_bound: usize,
) -> Result<FirstOccurrence> {
    let src_space = pi
        .group
        .space
        .as_ref()
        .ok_or_else(|| Error::BadSpace("first occurrence needs a formed source".into()))?;
    if src_space.is_symplectic() == (target_tower == Tower::Sp) {
        return Err(Error::BadSpace(
            "target tower must be on the opposite side of the dual pair".into(),
        ));
    }
    let f = &psi.field;
    let mut dims = Vec::new();
    for idx in 0..=scan_bound {
        let Some(dim) = tower_member_dim(target_tower, idx) else {
            dims.push(0);
            continue;
        };
        let target = standard_space(f, target_tower, dim)?;
        let d = lift_dimension(psi, pi, &target)?;
        dims.push(d);
        if d > 0 {
            return Ok(FirstOccurrence {
                occurrence: Occurrence::At(idx),
                dims,
            });
        }
    }
    Ok(FirstOccurrence {
        occurrence: Occurrence::UndeterminedAtLeast(scan_bound + 1),
        dims,
    })
}

/// Report of one see-saw identity instance.
#[derive(Debug, Clone)]
pub struct SeesawReport {
    pub description: String,
    pub lhs: i64,
    pub rhs: i64,
    pub pass: bool,
}

/// Both sides of the see-saw identity for the diagram
/// G = O(V1 + V2) over H = O(V1) x O(V2), H' = Sp x Sp over diagonal G' = Sp:
/// <Theta_{G',G}(pi'), pi_1 x pi_2>_H = <pi', Theta_{H,H'}(pi_1 x pi_2)>_G'.
/// Only H and G' are realized; G enters through the pair character at
/// block-diagonal arguments.
pub fn seesaw_orthogonal_split(
    psi: &AddChar,
    h1: (&Group, &ClassFunction),
    h2: (&Group, &ClassFunction),
    sp: (&Group, &ClassFunction),
    description: &str,
) -> Result<SeesawReport> {
    let f = &psi.field;
    let (g1, pi1) = h1;
    let (g2, pi2) = h2;
    let (gsp, pisp) = sp;
    let gram1 = &g1.space.as_ref().unwrap().gram;
    let gram2 = &g2.space.as_ref().unwrap().gram;
    let big_gram = gram1.direct_sum(gram2);
    let big_pair = dual_pair_restrict(psi, &big_gram, gsp.dim)?;
    let pair1 = dual_pair_restrict(psi, gram1, gsp.dim)?;
    let pair2 = dual_pair_restrict(psi, gram2, gsp.dim)?;

    // LHS: (1/|H||G'|) sum over class triples of
    // chi_big(diag(h1,h2), g) conj(pi1 pi2 pi')(...).
    let mut lhs = Complex64::new(0.0, 0.0);
    for (c1, cls1) in g1.classes.iter().enumerate() {
        let r1 = g1.class_rep(c1 as u32);
        for (c2, cls2) in g2.classes.iter().enumerate() {
            let r2 = g2.class_rep(c2 as u32);
            let block = r1.direct_sum(&r2);
            let mut acc = Complex64::new(0.0, 0.0);
            for (cg, clsg) in gsp.classes.iter().enumerate() {
                let rg = gsp.class_rep(cg as u32);
                acc += clsg.size as f64 * big_pair.value(&block, &rg)? * pisp.values[cg].conj();
            }
            lhs += (cls1.size * cls2.size) as f64
                * acc
                * pi1.values[c1].conj()
                * pi2.values[c2].conj();
        }
    }
    lhs /= (g1.order * g2.order * gsp.order) as f64;

    // RHS: (1/|G'|) sum_g pi'(g) conj(Theta_1(pi1)(g) Theta_2(pi2)(g)).
    let theta_line = |grp: &Group, pi: &ClassFunction, pair: &PairCharacter, rg: &Mat| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, cls) in grp.classes.iter().enumerate() {
            let r = grp.class_rep(c as u32);
            acc += cls.size as f64 * pair.value(&r, rg).unwrap() * pi.values[c].conj();
        }
        acc / grp.order as f64
    };
    let mut rhs = Complex64::new(0.0, 0.0);
    for (cg, clsg) in gsp.classes.iter().enumerate() {
        let rg = gsp.class_rep(cg as u32);
        let t1 = theta_line(g1, pi1, &pair1, &rg);
        let t2 = theta_line(g2, pi2, &pair2, &rg);
        rhs += clsg.size as f64 * pisp.values[cg] * (t1 * t2).conj();
    }
    rhs /= gsp.order as f64;

    let _ = f;
    if lhs.im.abs() > 1e-6 || rhs.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity("see-saw side not real".into()));
    }
    let li = round_int(lhs.re)?;
    let ri = round_int(rhs.re)?;
    Ok(SeesawReport {
        description: description.to_string(),
        lhs: li,
        rhs: ri,
        pass: li == ri,
    })
}

/// The toy see-saw instances: O_2^- over O_1 x O_1 against SL_2 x SL_2 over
/// the diagonal SL_2, for a few characters on each side.
pub fn seesaw_toy(psi: &AddChar, cache_dir: Option<&std::path::Path>) -> Result<Vec<SeesawReport>> {
    use crate::cache::realize_cached;
    use crate::classfun::irr_small;
    use crate::groups::GroupKind;
    let f = &psi.field;
    let v2 = standard_space(f, Tower::OEvenMinus, 2)?;
    let c1 = v2.gram[(0, 0)];
    let c2 = v2.gram[(1, 1)];
    if v2.gram[(0, 1)] != 0 {
        return Err(Error::Internal("anisotropic plane Gram not diagonal".into()));
    }
    let l1 = line_space(f, c1)?;
    let l2 = line_space(f, c2)?;
    let g1 = Group::new(realize_cached(cache_dir, &l1, GroupKind::Isometry, 1 << 10)?);
    let g2 = Group::new(realize_cached(cache_dir, &l2, GroupKind::Isometry, 1 << 10)?);
    let sp2 = standard_space(f, Tower::Sp, 2)?;
    let gsp = Group::new(realize_cached(cache_dir, &sp2, GroupKind::Isometry, 1 << 24)?);
    let irr1 = irr_small(&g1)?;
    let irr2 = irr_small(&g2)?;
    let sp_chars = vec![
        ("triv", ClassFunction::trivial(gsp.clone())),
        ("regular", ClassFunction::regular(gsp.clone())),
    ];
    let mut out = Vec::new();
    for (i1, p1) in irr1.iter().enumerate() {
        for (i2, p2) in irr2.iter().enumerate() {
            for (name, psp) in &sp_chars {
                let desc = format!("O1xO1/SL2 toy: chi1={i1} chi2={i2} pi'={name}");
                out.push(seesaw_orthogonal_split(
                    psi,
                    (&g1, p1),
                    (&g2, p2),
                    (&gsp, psp),
                    &desc,
                )?);
            }
        }
    }
    Ok(out)
}

/// Report of the theta/parabolic-induction compatibility instance.
#[derive(Debug, Clone)]
pub struct CompatReport {
    pub available: bool,
    pub details: Vec<String>,
    pub pass: Option<bool>,
}

/// One instance of the compatibility of theta lifting with parabolic
/// induction: lifting an induced representation I(tau (x) pi) from Sp_4 to
/// O_3 equals inducing (chi tau) (x) Theta(pi) there, where chi is the
/// quadratic character of GL_1 and tau is a non-self-dual character.
///
/// Only q = 1 mod 4 carries a non-self-dual GL_1 character among the desk
/// sizes, so q = 3 reports the instance unavailable.
pub fn induction_compat_check(
    q: u64,
    cache_dir: Option<&std::path::Path>,
    bound: u64,
) -> Result<CompatReport> {
    use crate::cache::realize_cached;
    use crate::classfun::{fq_dlog, gl1_char_value, induce_from_parabolic, inner_int, levi_gl_comp};
    use crate::forms::flag_decomposition;
    use crate::groups::{block_radical, realize, realize_gl, GroupKind};
    use crate::scalars::{legendre, make_field, psi_pair};
    use std::sync::Arc;

    let mut details = Vec::new();
    if q % 4 != 1 {
        details.push(format!(
            "no instance at q={q}: every character of GL_1(F_{q}) with square trivial is self-dual, and q-1 = {} has no element of order > 2",
            q - 1
        ));
        return Ok(CompatReport {
            available: false,
            details,
            pass: None,
        });
    }
    let f = make_field(q)?;
    let (psi, psi2) = psi_pair(&f);
    let sl2: Group = Arc::new(realize(
        &standard_space(&f, Tower::Sp, 2)?,
        GroupKind::Isometry,
        bound,
    )?);
    let alpha = crate::unipotent::weil_parity_char(&psi, &sl2, -1)?;
    let beta = crate::unipotent::weil_parity_char(&psi2, &sl2, -1)?;
    // pi: the theta representation first occurring on the one-dimensional
    // member of the plus tower; pi' is that occurrence.
    let o1: Group = Arc::new(realize(
        &standard_space(&f, Tower::OOddPlus, 1)?,
        GroupKind::Isometry,
        bound,
    )?);
    let ctx1 = dual_pair_ctx(&psi, &o1, &sl2)?;
    let lift_a = ctx1.big_theta(&alpha)?;
    let lift_b = ctx1.big_theta(&beta)?;
    let (pi, pi_prime, src) = match (lift_a.is_zero(), lift_b.is_zero()) {
        (false, true) => (&alpha, lift_a, "psi piece"),
        (true, false) => (&beta, lift_b, "psi' piece"),
        other => {
            return Err(Error::ValidationGate(format!(
                "expected exactly one bottom occurrence (zero flags {other:?})"
            )))
        }
    };
    details.push(format!("pi = {src} of the oscillator character of SL_2(F_{q})"));
    // tau: an order-4 character of GL_1, certified non-self-dual.
    let dlog = fq_dlog(&f);
    let gl1: Group = Arc::new(realize_gl(&f, 1, bound)?);
    let tau_values: Vec<Complex64> = (0..gl1.num_classes() as u32)
        .map(|c| gl1_char_value(&f, &dlog, (q as usize - 1) / 4, gl1.class_rep(c)[(0, 0)]))
        .collect();
    let tau = ClassFunction::new(gl1.clone(), tau_values).flagged(true, true);
    if tau.sub(&tau.conj()).is_zero() {
        return Err(Error::ValidationGate("tau is self-dual".into()));
    }
    // LHS: lift the induced representation of Sp_4.
    let space4 = standard_space(&f, Tower::Sp, 4)?;
    let sp4: Group = Arc::new(realize_cached(cache_dir, &space4, GroupKind::Isometry, bound)?);
    let flag4 = flag_decomposition(&space4, 1, None)?;
    let levi4 = levi_gl_comp(&space4, &flag4, &gl1, &tau, &sl2, pi)?;
    let rad4 = block_radical(&sp4, &flag4)?;
    let rho = induce_from_parabolic(&sp4, &levi4, &rad4)?;
    let rho_norm = inner_int(&rho, &rho)?;
    details.push(format!(
        "induced representation on Sp_4: dimension {}, norm {rho_norm}",
        rho.dim()?
    ));
    if rho_norm != 1 {
        return Err(Error::ValidationGate("induced representation not irreducible".into()));
    }
    let space3 = standard_space(&f, Tower::OOddPlus, 3)?;
    let o3: Group = Arc::new(realize(&space3, GroupKind::Isometry, bound)?);
    let ctx3 = dual_pair_ctx(&psi, &o3, &sp4)?;
    let lhs = ctx3.big_theta(&rho)?;
    details.push(format!("theta lift to O_3^+: dimension {}", lhs.dim()?));
    // RHS: induce (chi tau) (x) pi' on O_3.
    let flag3 = flag_decomposition(&space3, 1, None)?;
    let chi_tau_values: Vec<Complex64> = (0..gl1.num_classes() as u32)
        .map(|c| {
            let a = gl1.class_rep(c)[(0, 0)];
            tau.values[c as usize] * legendre(&f, a) as f64
        })
        .collect();
    let chi_tau = ClassFunction::new(gl1.clone(), chi_tau_values).flagged(true, true);
    let levi3 = levi_gl_comp(&space3, &flag3, &gl1, &chi_tau, &o1, &pi_prime)?;
    let rad3 = block_radical(&o3, &flag3)?;
    let rhs = induce_from_parabolic(&o3, &levi3, &rad3)?;
    details.push(format!("induced representation on O_3^+: dimension {}", rhs.dim()?));
    let pass = lhs.sub(&rhs).is_zero();
    details.push(format!("lift of induced == induced of lift: {pass}"));
    Ok(CompatReport {
        available: true,
        details,
        pass: Some(pass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::realize_cached;
    use crate::classfun::{inner, inner_int, irr_small};
    use crate::groups::{realize, GroupKind};
    use crate::scalars::{make_field, psi_pair};
    use crate::weil::weil_character;

    fn grp(q: u64, tower: Tower, dim: usize) -> Group {
        let f = make_field(q).unwrap();
        let space = standard_space(&f, tower, dim).unwrap();
        Group::new(realize(&space, GroupKind::Isometry, 1 << 24).unwrap())
    }

    /// Odd piece of the oscillator character on SL_2, as a class function.
    fn theta_rep(psi: &AddChar, sl2: &Group, eps: i8) -> ClassFunction {
        let chi = weil_character(psi, 1);
        let values: Vec<Complex64> = (0..sl2.num_classes() as u32)
            .map(|c| chi.parity_value(&sl2.class_rep(c), eps).unwrap())
            .collect();
        ClassFunction::new(sl2.clone(), values).flagged(true, false)
    }

    #[test]
    fn base_chain_q3() {
        // (Sp_4, O_2^-) over F_3: the lift of sgn is irreducible and pairs
        // only with sgn among the O_2^- irreducibles.
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let o2 = grp(3, Tower::OEvenMinus, 2);
        let sp4 = grp(3, Tower::Sp, 4);
        let ctx = dual_pair_ctx(&psi, &o2, &sp4).unwrap();
        let sgn = ClassFunction::sign_det(o2.clone());
        let theta = ctx.big_theta(&sgn).unwrap();
        assert!(inner_int(&theta, &theta).unwrap() == 1, "lift not irreducible");
        assert_eq!(ctx.multiplicity(&sgn, &theta).unwrap(), 1);
        for (i, chi) in irr_small(&o2).unwrap().iter().enumerate() {
            let m = ctx.multiplicity(chi, &theta).unwrap();
            let expected = i64::from(inner_int(chi, &sgn).unwrap() == 1);
            assert_eq!(m, expected, "irr {i}");
        }
        // Dimension cross-check recorded in the build log: q(q-1)^2/2 = 6.
        assert_eq!(theta.dim().unwrap(), 6);
        // big_theta(0) = 0.
        let z = ctx.big_theta(&ClassFunction::zero(o2.clone())).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn first_occurrence_theta_reps_q5() {
        let f = make_field(5).unwrap();
        let (psi, psi2) = psi_pair(&f);
        let sl2 = grp(5, Tower::Sp, 2);
        let alpha = theta_rep(&psi, &sl2, -1);
        let beta = theta_rep(&psi2, &sl2, -1);
        // Theorem-shaped pattern: alpha occurs at the bottom of the + tower
        // and at index 2 of the - tower; beta the other way around.
        let npa = first_occurrence(&psi, &alpha, Tower::OOddPlus, 3).unwrap();
        let nma = first_occurrence(&psi, &alpha, Tower::OOddMinus, 3).unwrap();
        let npb = first_occurrence(&psi, &beta, Tower::OOddPlus, 3).unwrap();
        let nmb = first_occurrence(&psi, &beta, Tower::OOddMinus, 3).unwrap();
        assert_eq!(npa.occurrence, Occurrence::At(0));
        assert_eq!(nma.occurrence, Occurrence::At(2));
        assert_eq!(npb.occurrence, Occurrence::At(2));
        assert_eq!(nmb.occurrence, Occurrence::At(0));
    }

    #[test]
    fn trivial_rep_occurs_at_sp_tower_bottom() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let o1 = grp(3, Tower::OOddPlus, 1);
        let triv = ClassFunction::trivial(o1.clone());
        let fo = first_occurrence(&psi, &triv, Tower::Sp, 2).unwrap();
        assert_eq!(fo.occurrence, Occurrence::At(0));
    }

    #[test]
    fn seesaw_toy_q3() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let reports = seesaw_toy(&psi, None).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "{}: {} != {}", r.description, r.lhs, r.rhs);
        }
    }

    #[test]
    fn character_class_flip_identity_odd_pairs() {
        // omega_{psi} on (Sp_2, O_3^eps) equals omega_{psi'} on
        // (Sp_2, O_3^-eps) through an isometry of the rescaled form.
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, psi2) = psi_pair(&f);
            let sl2 = grp(q, Tower::Sp, 2);
            let vp = standard_space(&f, Tower::OOddPlus, 3).unwrap();
            let vm = standard_space(&f, Tower::OOddMinus, 3).unwrap();
            let gp = Group::new(realize(&vp, GroupKind::Isometry, 1 << 24).unwrap());
            let gm = Group::new(realize(&vm, GroupKind::Isometry, 1 << 24).unwrap());
            let delta = f.least_nonsquare();
            // T with T^t (delta . Gp) T = Gm; then g -> T g T^-1 maps
            // O(Gm) to O(delta Gp) = O(Gp).
            let scaled = vp.gram.scale(&f, delta);
            let t = crate::linalg::congruence_transform(&f, &vm.gram, &scaled).unwrap();
            let t_inv = t.inverse(&f).unwrap();
            let pair_p = dual_pair_restrict(&psi, &vp.gram, 2).unwrap();
            let pair_m = dual_pair_restrict(&psi2, &vm.gram, 2).unwrap();
            for cm in 0..gm.num_classes() as u32 {
                let g_minus = gm.class_rep(cm);
                let g_plus = t_inv.mul(&f, &g_minus).mul(&f, &t);
                assert!(gp.contains(&g_plus), "flip image not an isometry");
                for cs in 0..sl2.num_classes() as u32 {
                    let h = sl2.class_rep(cs);
                    let a = pair_p.value(&g_plus, &h).unwrap();
                    let b = pair_m.value(&g_minus, &h).unwrap();
                    assert!((a - b).norm() < 1e-8, "q={q} cm={cm} cs={cs}");
                }
            }
        }
    }

    #[test]
    fn induction_compat_unavailable_q3() {
        let rep = induction_compat_check(3, None, 1 << 24).unwrap();
        assert!(!rep.available);
        assert!(rep.pass.is_none());
    }

    #[test]
    fn caching_roundtrip_for_pair_groups() {
        let f = make_field(3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let space = standard_space(&f, Tower::OEvenMinus, 2).unwrap();
        let a = realize_cached(Some(dir.path()), &space, GroupKind::Isometry, 1 << 20).unwrap();
        let b = realize_cached(Some(dir.path()), &space, GroupKind::Isometry, 1 << 20).unwrap();
        assert_eq!(a.elements, b.elements);
        let _ = inner(
            &ClassFunction::trivial(Group::new(a)),
            &ClassFunction::trivial(Group::new(b)),
        );
    }
}
