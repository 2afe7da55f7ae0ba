//! The distinguished representations of the k = 1 chain, built through theta
//! lifts from the base cases and labeled with machine-checked certificates:
//! the two linear characters of the anisotropic O_2^-, the two theta
//! representations of SL_2 (odd pieces of the two oscillator characters),
//! the unipotent cuspidal representation of Sp_4, and the unipotent cuspidal
//! pair of O_5^{+/-}.
//!
//! "Unipotent" is tracked by provenance (the construction path), and every
//! labeled representation carries irreducibility, cuspidality and
//! central-value certificates computed on the spot.

use crate::cache::realize_cached;
use crate::classfun::{inner_int, is_cuspidal, ClassFunction, Group};
use crate::forms::{standard_space, Tower};
use crate::groups::GroupKind;
use crate::linalg::Mat;
use crate::round_int;
use crate::scalars::{legendre, make_field, psi_pair, AddChar, FieldCtx};
use crate::theta::dual_pair_ctx;
use crate::weil::weil_character;
use crate::{Error, Result};
use std::path::Path;
use std::sync::Arc;

/// Certificates computed for a labeled representation.
#[derive(Debug, Clone)]
pub struct Certificates {
    pub irreducible: bool,
    pub cuspidal: bool,
    /// pi(-1)/dim, which must be +1 or -1.
    pub central_sign: i8,
    pub dim: i64,
}

#[derive(Debug, Clone)]
pub struct LabeledRep {
    pub rep: ClassFunction,
    pub label: String,
    pub provenance: String,
    pub cert: Certificates,
}

fn certify(rep: &ClassFunction) -> Result<Certificates> {
    let g = &rep.group;
    let dim = rep.dim()?;
    let irreducible = inner_int(rep, rep)? == 1;
    let cuspidal = is_cuspidal(rep)?;
    let minus_one = Mat::identity(g.dim).neg(&g.field);
    let cv = rep.value_at(&minus_one)?;
    if cv.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity("central value not real".into()));
    }
    let r = round_int(cv.re)?;
    let central_sign = if r == dim {
        1
    } else if r == -dim {
        -1
    } else {
        return Err(Error::NumericIntegrity(format!(
            "central value {r} is neither +-dim (dim {dim})"
        )));
    };
    Ok(Certificates {
        irreducible,
        cuspidal,
        central_sign,
        dim,
    })
}

fn expect_cert(lr: &LabeledRep) -> Result<()> {
    if !lr.cert.irreducible || !lr.cert.cuspidal {
        return Err(Error::ValidationGate(format!(
            "{}: certificate failure (irreducible={}, cuspidal={})",
            lr.label, lr.cert.irreducible, lr.cert.cuspidal
        )));
    }
    Ok(())
}

/// Guard for chain parameters beyond desk scale: the k >= 2 groups blow past
/// any enumeration bound, and the refusal must be immediate.
pub fn scale_guard(k: usize, q: u64, bound: u64) -> Result<()> {
    if k == 1 {
        return Ok(());
    }
    // |Sp_{2n}(F_q)| with n = k(k+1), in saturating u128 arithmetic.
    let n = (k * (k + 1)) as u32;
    let mut order: u128 = (q as u128).saturating_pow(n * n);
    for i in 1..=n {
        order = order.saturating_mul((q as u128).saturating_pow(2 * i) - 1);
    }
    Err(Error::OrderBound {
        what: format!("chain depth k={k} needs Sp_{}(F_{q})", 2 * n),
        projected: order.min(u64::MAX as u128) as u64,
        bound,
    })
}

/// The two linear characters of the anisotropic O_2^-.
pub fn base_even_orth(o2: &Group) -> Result<(LabeledRep, LabeledRep)> {
    let triv = ClassFunction::trivial(o2.clone());
    let sgn = ClassFunction::sign_det(o2.clone());
    let plus = LabeledRep {
        cert: certify(&triv)?,
        rep: triv,
        label: "pi^+_{O_2^-}".into(),
        provenance: "trivial character".into(),
    };
    let minus = LabeledRep {
        cert: certify(&sgn)?,
        rep: sgn,
        label: "pi^-_{O_2^-}".into(),
        provenance: "determinant sign character".into(),
    };
    expect_cert(&plus)?;
    expect_cert(&minus)?;
    Ok((plus, minus))
}

/// The parity piece (eps = +-1) of the oscillator character of Sp_2n as a
/// class function on its realization.
pub fn weil_parity_char(psi: &AddChar, group: &Group, eps: i8) -> Result<ClassFunction> {
    let chi = weil_character(psi, group.dim / 2);
    let mut values = Vec::with_capacity(group.num_classes());
    for c in 0..group.num_classes() as u32 {
        values.push(chi.parity_value(&group.class_rep(c), eps)?);
    }
    Ok(ClassFunction::new(group.clone(), values).flagged(true, false))
}

/// The theta representations of SL_2: the odd pieces of the two oscillator
/// characters, with the central-value certificate pi(-1) = -dim.
pub fn base_theta_sl2(
    psi: &AddChar,
    psi2: &AddChar,
    sl2: &Group,
) -> Result<(LabeledRep, LabeledRep)> {
    let mut out = Vec::with_capacity(2);
    // On the odd piece -1 acts by the negative of the Legendre symbol of -1.
    let f = &psi.field;
    let expect_sign: i8 = if legendre(f, f.neg(1)) == 1 { -1 } else { 1 };
    for (name, chr) in [("alpha", psi), ("beta", psi2)] {
        let rep = weil_parity_char(chr, sl2, -1)?;
        let cert = certify(&rep)?;
        if cert.central_sign != expect_sign {
            return Err(Error::ValidationGate(format!(
                "theta rep {name}: central sign {} but the parity law demands {expect_sign}",
                cert.central_sign
            )));
        }
        let lr = LabeledRep {
            rep,
            label: format!("pi^theta_{{1,{name}}}"),
            provenance: format!(
                "odd piece of the oscillator character for the {name} additive class"
            ),
            cert,
        };
        expect_cert(&lr)?;
        out.push(lr);
    }
    let beta = out.pop().unwrap();
    let alpha = out.pop().unwrap();
    // The two must genuinely differ.
    if inner_int(&alpha.rep, &beta.rep)? != 0 {
        return Err(Error::ValidationGate(
            "the two theta representations coincide".into(),
        ));
    }
    Ok((alpha, beta))
}

/// The unipotent cuspidal representation of Sp_4, as the theta lift of the
/// sign character of O_2^-.
pub fn build_sp_unipotent(psi: &AddChar, o2: &Group, sp4: &Group) -> Result<LabeledRep> {
    let ctx = dual_pair_ctx(psi, o2, sp4)?;
    let sgn = ClassFunction::sign_det(o2.clone());
    let theta = ctx.big_theta(&sgn)?;
    let cert = certify(&theta)?;
    // Back-check the defining multiplicity.
    if ctx.multiplicity(&sgn, &theta)? != 1 {
        return Err(Error::ValidationGate(
            "lift of sgn does not pair back with sgn".into(),
        ));
    }
    let lr = LabeledRep {
        rep: theta,
        label: "pi_{Sp_4}".into(),
        provenance: "theta lift of the sign character of O_2^-".into(),
        cert,
    };
    expect_cert(&lr)?;
    Ok(lr)
}

/// The pair of unipotent cuspidal representations of O_5^eps, built as the
/// theta lift (with respect to psi) of whichever theta representation of
/// SL_2 first occurs there, and its sign twist. Returns (pi^+, pi^-) ordered
/// by central sign, with the provenance recording the source.
pub fn build_odd_orth_unipotent(
    psi: &AddChar,
    theta_alpha: &LabeledRep,
    theta_beta: &LabeledRep,
    o5: &Group,
) -> Result<(LabeledRep, LabeledRep)> {
    let sl2 = &theta_alpha.rep.group;
    let ctx = dual_pair_ctx(psi, o5, sl2)?;
    let lift_a = ctx.big_theta(&theta_alpha.rep)?;
    let lift_b = ctx.big_theta(&theta_beta.rep)?;
    // Exactly one of the two theta representations first occurs here; its
    // lift is the cuspidal one, the other lift lives past first occurrence.
    let (lift, src) = match (is_cuspidal(&lift_a)?, is_cuspidal(&lift_b)?) {
        (true, false) => (lift_a, "alpha"),
        (false, true) => (lift_b, "beta"),
        other => {
            return Err(Error::ValidationGate(format!(
                "expected exactly one cuspidal theta lift (cuspidal flags {other:?})"
            )))
        }
    };
    let cert = certify(&lift)?;
    let twist = lift.tensor(&ClassFunction::sign_det(o5.clone()));
    let cert_t = certify(&twist)?;
    if cert.central_sign == cert_t.central_sign {
        return Err(Error::NumericIntegrity(
            "det twist failed to flip the central sign".into(),
        ));
    }
    // In odd dimension -1 has determinant -1, so the det twist flips the
    // value at -1 and the central certificate separates the eta labels.
    let tower = o5.space.as_ref().unwrap().tower.label();
    let mk = |rep: ClassFunction, cert: Certificates| {
        let eta = cert.central_sign;
        LabeledRep {
            rep,
            label: format!("pi^{}_{{{tower}5}}", if eta == 1 { "+" } else { "-" }),
            provenance: format!("theta lift of pi^theta_{{1,{src}}} and its det twist"),
            cert,
        }
    };
    let l1 = mk(lift, cert);
    let l2 = mk(twist, cert_t);
    expect_cert(&l1)?;
    expect_cert(&l2)?;
    let (plus, minus) = if l1.cert.central_sign == 1 {
        (l1, l2)
    } else {
        (l2, l1)
    };
    if plus.cert.central_sign != 1 || minus.cert.central_sign != -1 {
        return Err(Error::ValidationGate(
            "the odd orthogonal pair does not split into central signs +1/-1".into(),
        ));
    }
    Ok((plus, minus))
}

/// Everything the k = 1 verification needs, realized and certified.
pub struct ChainK1 {
    pub field: Arc<FieldCtx>,
    pub psi: AddChar,
    pub psi2: AddChar,
    pub o2m: Group,
    pub sl2: Group,
    pub sp4: Group,
    pub o5p: Group,
    pub o5m: Group,
    pub o1p: Group,
    pub o1m: Group,
    pub pi_plus_o2: LabeledRep,
    pub pi_minus_o2: LabeledRep,
    pub theta_alpha: LabeledRep,
    pub theta_beta: LabeledRep,
    pub pi_sp4: LabeledRep,
    /// (pi^+, pi^-) of O_5^+ and of O_5^-.
    pub o5p_pair: (LabeledRep, LabeledRep),
    pub o5m_pair: (LabeledRep, LabeledRep),
}

pub fn build_chain_k1(
    q: u64,
    k: usize,
    cache_dir: Option<&Path>,
    order_bound: u64,
) -> Result<ChainK1> {
    scale_guard(k, q, order_bound)?;
    let f = make_field(q)?;
    let (psi, psi2) = psi_pair(&f);
    let realize_tower = |tower, dim| -> Result<Group> {
        let space = standard_space(&f, tower, dim)?;
        Ok(Group::new(realize_cached(
            cache_dir,
            &space,
            GroupKind::Isometry,
            order_bound,
        )?))
    };
    let o2m = realize_tower(Tower::OEvenMinus, 2)?;
    let sl2 = realize_tower(Tower::Sp, 2)?;
    let sp4 = realize_tower(Tower::Sp, 4)?;
    let o5p = realize_tower(Tower::OOddPlus, 5)?;
    let o5m = realize_tower(Tower::OOddMinus, 5)?;
    let o1p = realize_tower(Tower::OOddPlus, 1)?;
    let o1m = realize_tower(Tower::OOddMinus, 1)?;
    let (pi_plus_o2, pi_minus_o2) = base_even_orth(&o2m)?;
    let (theta_alpha, theta_beta) = base_theta_sl2(&psi, &psi2, &sl2)?;
    let pi_sp4 = build_sp_unipotent(&psi, &o2m, &sp4)?;
    let o5p_pair = build_odd_orth_unipotent(&psi, &theta_alpha, &theta_beta, &o5p)?;
    let o5m_pair = build_odd_orth_unipotent(&psi, &theta_alpha, &theta_beta, &o5m)?;
    Ok(ChainK1 {
        field: f,
        psi,
        psi2,
        o2m,
        sl2,
        sp4,
        o5p,
        o5m,
        o1p,
        o1m,
        pi_plus_o2,
        pi_minus_o2,
        theta_alpha,
        theta_beta,
        pi_sp4,
        o5p_pair,
        o5m_pair,
    })
}

/// Restriction of a class function to a realized subgroup (the subgroup's
/// elements must lie in the parent group).
pub fn restrict(pi: &ClassFunction, sub: &Group) -> Result<ClassFunction> {
    let mut values = Vec::with_capacity(sub.num_classes());
    for c in 0..sub.num_classes() as u32 {
        values.push(pi.value_at(&sub.class_rep(c))?);
    }
    Ok(ClassFunction::new(sub.clone(), values).flagged(pi.is_character, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::realize;

    #[test]
    fn guard_refuses_k2_immediately() {
        let t0 = std::time::Instant::now();
        let e = scale_guard(2, 3, crate::DEFAULT_ORDER_BOUND).unwrap_err();
        assert!(matches!(e, Error::OrderBound { .. }));
        assert!(t0.elapsed().as_millis() < 1000);
    }

    #[test]
    fn chain_q3_labels_and_certificates() {
        let chain = build_chain_k1(3, 1, None, 1 << 24).unwrap();
        assert_eq!(chain.pi_sp4.cert.dim, 6);
        assert_eq!(chain.theta_alpha.cert.dim, 1);
        assert_eq!(chain.theta_beta.cert.dim, 1);
        // At q = 3 the odd oscillator piece has -1 acting by +1.
        assert_eq!(chain.theta_alpha.cert.central_sign, 1);
        for pair in [&chain.o5p_pair, &chain.o5m_pair] {
            assert_eq!(pair.0.cert.central_sign, 1);
            assert_eq!(pair.1.cert.central_sign, -1);
            assert!(pair.0.cert.irreducible && pair.0.cert.cuspidal);
            assert!(pair.1.cert.irreducible && pair.1.cert.cuspidal);
            assert_eq!(pair.0.cert.dim, pair.1.cert.dim);
            // The two differ exactly by the det character.
            let twisted = pair.0.rep.tensor(&ClassFunction::sign_det(pair.0.rep.group.clone()));
            assert_eq!(inner_int(&twisted, &pair.1.rep).unwrap(), 1);
        }
    }

    #[test]
    fn so_restrictions_coincide_q3() {
        // Both members of an odd orthogonal pair restrict to the same
        // irreducible of the special orthogonal subgroup.
        let chain = build_chain_k1(3, 1, None, 1 << 24).unwrap();
        let f = &chain.field;
        let space = standard_space(f, Tower::OOddPlus, 5).unwrap();
        let so5 = Group::new(realize(&space, GroupKind::Special, 1 << 24).unwrap());
        let r_plus = restrict(&chain.o5p_pair.0.rep, &so5).unwrap();
        let r_minus = restrict(&chain.o5p_pair.1.rep, &so5).unwrap();
        assert_eq!(inner_int(&r_plus, &r_plus).unwrap(), 1);
        assert_eq!(inner_int(&r_plus, &r_minus).unwrap(), 1);
    }
}
