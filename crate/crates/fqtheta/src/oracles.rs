//! Brute-force oracles that recompute key multiplicities and dimensions
//! through a second, independent path: dense carrier-space projections,
//! explicit intertwiner solving, and the textbook induced-character formula.
//! Their outputs are pinned in a checked-in snapshot file and the fast
//! class-sum machinery is required to agree with them.

use crate::classfun::{ClassFunction, Group};
use crate::forms::flag_decomposition;
use crate::groups::{bessel_subgroup, pack, GroupRealization};
use crate::linalg::{j_std, symplectic_basis, Mat};
use crate::scalars::{AddChar, SquareClass};
use crate::weil::model::{weil_matrices, CMat};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

const TOL: f64 = 1e-7;

/// Rank of a complex matrix given as rows, by Gaussian elimination with
/// partial pivoting. Entries below `tol` in absolute value count as zero.
pub fn complex_rank(mut rows: Vec<Vec<Complex64>>, tol: f64) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len())
            .filter(|&r| rows[r][col].norm() > tol)
            .max_by(|&a, &b| rows[a][col].norm().total_cmp(&rows[b][col].norm()))
        else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank][col];
        for r in rank + 1..rows.len() {
            let factor = rows[r][col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..ncols {
                let sub = factor * rows[rank][c];
                rows[r][c] -= sub;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn cmat_rows(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.n)
        .map(|i| (0..m.n).map(|j| m[(i, j)]).collect())
        .collect()
}

/// tr(a * b) without forming the product.
fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.n;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn round_count(x: f64, what: &str) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() > 1e-6 {
        return Err(Error::NumericIntegrity(format!("{what}: {x} is not near an integer")));
    }
    Ok(r as i64)
}

/// An isotypic component cut out of the dense oscillator carrier.
pub struct IsotypicPiece {
    pub dim: usize,
    /// Trace of the projected action on each class of the symplectic factor.
    pub character: ClassFunction,
}

/// Project the q^(m*2n/2)-dimensional oscillator carrier of the commuting
/// pair (isometries of a Gram matrix, Sp_2n) onto the chi-isotypic piece of
/// the orthogonal factor, entirely with dense matrices: the projector is
/// averaged from explicitly built representing matrices, checked idempotent,
/// and its rank and per-class traces are read off numerically.
pub fn oracle_isotypic_projection(
    psi: &AddChar,
    o_gram: &Mat,
    subgroup: &[Mat],
    chi_vals: &[Complex64],
    chi_deg: f64,
    sp_group: &Group,
    carrier_bound: u64,
) -> Result<IsotypicPiece> {
    let f = &psi.field;
    let m = o_gram.rows;
    let sp_dim = sp_group.dim;
    assert_eq!(subgroup.len(), chi_vals.len());
    let big = o_gram.kronecker(f, &j_std(f, sp_dim / 2));
    let t = symplectic_basis(f, &big)?;
    let t_inv = t
        .inverse(f)
        .ok_or_else(|| Error::Internal("symplectic basis not invertible".into()))?;
    let model = weil_matrices(psi, m * sp_dim / 2, carrier_bound)?;
    let emb = |go: &Mat, gsp: &Mat| t_inv.mul(f, &go.kronecker(f, gsp)).mul(f, &t);
    let sp_one = Mat::identity(sp_dim);
    let mut proj = CMat::zero(model.carrier_dim);
    for (g, chi) in subgroup.iter().zip(chi_vals) {
        let mat = model.matrix(&emb(g, &sp_one))?;
        proj = proj.add(&mat.scale(chi.conj()));
    }
    proj = proj.scale(Complex64::new(chi_deg / subgroup.len() as f64, 0.0));
    if !proj.mul(&proj).approx_eq(&proj, 1e-6) {
        return Err(Error::NumericIntegrity("isotypic projector is not idempotent".into()));
    }
    let rank = complex_rank(cmat_rows(&proj), TOL);
    let tr = proj.trace();
    if (tr.re - rank as f64).abs() > 1e-6 || tr.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity(format!(
            "projector trace {tr} does not match rank {rank}"
        )));
    }
    let o_one = Mat::identity(m);
    let mut values = Vec::with_capacity(sp_group.num_classes());
    for c in 0..sp_group.num_classes() as u32 {
        let h = sp_group.class_rep(c);
        values.push(trace_product(&proj, &model.matrix(&emb(&o_one, &h))?));
    }
    Ok(IsotypicPiece {
        dim: rank,
        character: ClassFunction::new(sp_group.clone(), values).flagged(true, false),
    })
}

/// Dimensions (even piece, odd piece) of the rank-one oscillator carrier
/// under the parity involution, read off as ranks of the two explicit
/// eigenprojectors.
pub fn oracle_parity_piece_dims(psi: &AddChar, carrier_bound: u64) -> Result<(usize, usize)> {
    let model = weil_matrices(psi, 1, carrier_bound)?;
    let s = model.parity_involution();
    let one = CMat::identity(model.carrier_dim);
    let half = Complex64::new(0.5, 0.0);
    let even = one.add(&s).scale(half);
    let odd = one.add(&s.scale(Complex64::new(-1.0, 0.0))).scale(half);
    let de = complex_rank(cmat_rows(&even), TOL);
    let do_ = complex_rank(cmat_rows(&odd), TOL);
    if de + do_ != model.carrier_dim {
        return Err(Error::NumericIntegrity("parity eigenspaces do not fill the carrier".into()));
    }
    Ok((de, do_))
}

/// dim Hom(A, B) over a common group, by solving the intertwiner equations
/// X A(g) = B(g) X directly: the nullity of the stacked linear system. The
/// result is cross-checked in place against the character inner product and
/// any disagreement is a build-stopping integrity error.
pub fn oracle_hom_dimension(a: &[CMat], b: &[CMat]) -> Result<usize> {
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    let da = a[0].n;
    let db = b[0].n;
    let unknowns = da * db;
    // Row per (group element, target row p, source column q) of B_g X - X A_g.
    let mut rows = Vec::with_capacity(a.len() * unknowns);
    for (ag, bg) in a.iter().zip(b) {
        for p in 0..db {
            for qc in 0..da {
                let mut row = vec![Complex64::new(0.0, 0.0); unknowns];
                for j in 0..da {
                    row[p * da + j] -= ag[(j, qc)];
                }
                for j in 0..db {
                    row[j * da + qc] += bg[(p, j)];
                }
                rows.push(row);
            }
        }
    }
    let nullity = unknowns - complex_rank(rows, TOL);
    let class_sum: Complex64 = a
        .iter()
        .zip(b)
        .map(|(ag, bg)| ag.trace() * bg.trace().conj())
        .sum::<Complex64>()
        / a.len() as f64;
    let expected = round_count(class_sum.re, "character inner product")?;
    if class_sum.im.abs() > 1e-6 || expected != nullity as i64 {
        return Err(Error::NumericIntegrity(format!(
            "intertwiner solve gives {nullity} but the character inner product gives {class_sum}"
        )));
    }
    Ok(nullity)
}

/// One Bessel multiplicity recomputed through the induced-character formula:
/// the character of Ind from the Bessel subgroup of (pi_w tensor the generic
/// radical character) is assembled class by class as an explicit sum over the
/// ambient group, then paired with pi. No coinvariant quotient is formed.
pub fn oracle_bessel_induced_multiplicity(
    pi: &ClassFunction,
    pi_w: &ClassFunction,
    ell: usize,
    v0_class: SquareClass,
    psi: &AddChar,
) -> Result<i64> {
    let g: &GroupRealization = &pi.group;
    let f = &g.field;
    let space = g.space.as_ref().unwrap();
    let flag = flag_decomposition(space, ell, Some(v0_class))?;
    let bs = bessel_subgroup(g, &flag, psi, &pi_w.group)?;
    // Value table of pi_w tensor psi_N on the subgroup, keyed by packed
    // ambient matrices of the products w * n.
    let mut table: HashMap<u64, Complex64> = HashMap::with_capacity(bs.order() as usize);
    for (i, &wk) in bs.ow_parent.iter().enumerate() {
        let wm = crate::groups::unpack(f, g.dim, wk);
        let wval = pi_w.values[bs.w_class[i] as usize];
        for (j, &nk) in bs.n_parent.iter().enumerate() {
            let nm = crate::groups::unpack(f, g.dim, nk);
            let prod = wm.mul(f, &nm);
            if table.insert(pack(f, &prod), wval * bs.n_char[j]).is_some() {
                return Err(Error::Internal("Bessel subgroup product collision".into()));
            }
        }
    }
    let reps: Vec<Mat> = (0..g.num_classes() as u32).map(|c| g.class_rep(c)).collect();
    let mut ind = vec![Complex64::new(0.0, 0.0); reps.len()];
    for x in g.iter_mats() {
        let x_inv = g.inverse_mat(&x);
        for (c, rep) in reps.iter().enumerate() {
            let y = x_inv.mul(f, rep).mul(f, &x);
            if let Some(v) = table.get(&pack(f, &y)) {
                ind[c] += v;
            }
        }
    }
    let scale = 1.0 / bs.order() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, cls) in g.classes.iter().enumerate() {
        acc += cls.size as f64 * pi.values[c] * (ind[c] * scale).conj();
    }
    acc /= g.order as f64;
    if acc.im.abs() > 1e-6 {
        return Err(Error::NumericIntegrity(format!("induced pairing {acc} is not real")));
    }
    round_count(acc.re, "induced-character multiplicity")
}

/// One pinned oracle value.
pub struct SnapshotEntry {
    pub key: String,
    pub value: String,
    pub method: String,
}

/// Render pinned entries in the canonical snapshot format: versioned header,
/// sorted keys, one `key = value  # method` line each.
pub fn render_snapshot(entries: &[SnapshotEntry]) -> String {
    let mut sorted: Vec<&SnapshotEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.key.cmp(&b.key));
    let mut out = String::from("# oracle snapshot, format v1\n# pinned 2026-08-25\n");
    for e in &sorted {
        out.push_str(&format!("{} = {}  # method: {}\n", e.key, e.value, e.method));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::default_cache_dir;
    use crate::descent::{bessel_multiplicity, characters_equal};
    use crate::forms::{standard_space, Tower};
    use crate::groups::{realize, GroupKind};
    use crate::scalars::{make_field, psi_pair};
    use crate::unipotent::build_chain_k1;
    use crate::weil::model::CMat;

    const BOUND: u64 = 20_000_000;
    const CARRIER: u64 = 1 << 14;

    #[test]
    fn trivial_subgroup_gives_the_identity_projection() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let sp = Group::new(
            realize(&standard_space(&f, Tower::Sp, 2).unwrap(), GroupKind::Isometry, BOUND)
                .unwrap(),
        );
        let gram = Mat::from_rows(&[&[1]]);
        let piece = oracle_isotypic_projection(
            &psi,
            &gram,
            &[Mat::identity(1)],
            &[Complex64::new(1.0, 0.0)],
            1.0,
            &sp,
            CARRIER,
        )
        .unwrap();
        assert_eq!(piece.dim, 3);
        let id = sp.identity_class() as usize;
        assert!((piece.character.values[id] - Complex64::new(3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn parity_piece_dimensions() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, _) = psi_pair(&f);
            let (even, odd) = oracle_parity_piece_dims(&psi, CARRIER).unwrap();
            assert_eq!(even, (q as usize + 1) / 2);
            assert_eq!(odd, (q as usize - 1) / 2);
        }
    }

    #[test]
    fn sign_isotypic_piece_matches_the_class_sum_lift() {
        let cache = default_cache_dir();
        let chain = build_chain_k1(3, 1, Some(&cache), BOUND).unwrap();
        let f = &chain.field;
        let o_space = chain.o2m.space.as_ref().unwrap();
        let mats: Vec<Mat> = chain.o2m.iter_mats().collect();
        let sgn = &chain.pi_minus_o2.rep;
        let chi_vals: Vec<Complex64> = (0..mats.len())
            .map(|i| sgn.values[chain.o2m.class_of[i] as usize])
            .collect();
        let _ = f;
        let piece = oracle_isotypic_projection(
            &chain.psi,
            &o_space.gram,
            &mats,
            &chi_vals,
            1.0,
            &chain.sp4,
            CARRIER,
        )
        .unwrap();
        assert_eq!(piece.dim, 6);
        assert!(characters_equal(&piece.character, &chain.pi_sp4.rep).unwrap());
    }

    #[test]
    fn oscillator_self_hom_dimension_is_two() {
        let f = make_field(3).unwrap();
        let (psi, _) = psi_pair(&f);
        let sp = realize(&standard_space(&f, Tower::Sp, 2).unwrap(), GroupKind::Isometry, BOUND)
            .unwrap();
        let model = weil_matrices(&psi, 1, CARRIER).unwrap();
        let mats: Vec<CMat> = sp.iter_mats().map(|g| model.matrix(&g).unwrap()).collect();
        assert_eq!(oracle_hom_dimension(&mats, &mats).unwrap(), 2);
    }

    #[test]
    fn self_hom_over_the_trivial_group_is_the_square() {
        let mats = vec![CMat::identity(3)];
        assert_eq!(oracle_hom_dimension(&mats, &mats).unwrap(), 9);
    }

    #[test]
    fn induced_character_path_agrees_with_the_coinvariant_path() {
        let cache = default_cache_dir();
        let chain = build_chain_k1(3, 1, Some(&cache), BOUND).unwrap();
        // Realizing square class for the plus tower at depth 1.
        let cls = crate::scalars::SquareClass(1).mul(crate::scalars::eps_k(1));
        let sgn = &chain.pi_minus_o2.rep;
        let (pi_pos, pi_neg) = (&chain.o5p_pair.0.rep, &chain.o5p_pair.1.rep);
        for (pi, expect) in [(pi_pos, 1i64), (pi_neg, 0)] {
            let direct =
                oracle_bessel_induced_multiplicity(pi, sgn, 1, cls, &chain.psi).unwrap();
            let class_sum = bessel_multiplicity(pi, sgn, 1, cls, &chain.psi, BOUND).unwrap();
            assert_eq!(direct, expect);
            assert_eq!(direct, class_sum);
        }
    }

    #[test]
    fn snapshot_file_matches_a_repin() {
        let cache = default_cache_dir();
        let chain = build_chain_k1(3, 1, Some(&cache), BOUND).unwrap();
        let mut entries = Vec::new();
        let mut push = |key: &str, value: String, method: &str| {
            entries.push(SnapshotEntry {
                key: key.into(),
                value,
                method: method.into(),
            });
        };
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, _) = psi_pair(&f);
            let (_, odd) = oracle_parity_piece_dims(&psi, CARRIER).unwrap();
            push(
                &format!("weil.q{q}.odd-piece.dim"),
                odd.to_string(),
                "parity eigenprojector rank",
            );
        }
        {
            let o_space = chain.o2m.space.as_ref().unwrap();
            let mats: Vec<Mat> = chain.o2m.iter_mats().collect();
            let sgn = &chain.pi_minus_o2.rep;
            let chi_vals: Vec<Complex64> = (0..mats.len())
                .map(|i| sgn.values[chain.o2m.class_of[i] as usize])
                .collect();
            let piece = oracle_isotypic_projection(
                &chain.psi,
                &o_space.gram,
                &mats,
                &chi_vals,
                1.0,
                &chain.sp4,
                CARRIER,
            )
            .unwrap();
            push(
                "isotypic.q3.sp4-x-o2minus.sgn.dim",
                piece.dim.to_string(),
                "carrier projector rank",
            );
        }
        {
            let f = make_field(3).unwrap();
            let (psi, _) = psi_pair(&f);
            let sp =
                realize(&standard_space(&f, Tower::Sp, 2).unwrap(), GroupKind::Isometry, BOUND)
                    .unwrap();
            let model = weil_matrices(&psi, 1, CARRIER).unwrap();
            let mats: Vec<CMat> = sp.iter_mats().map(|g| model.matrix(&g).unwrap()).collect();
            push(
                "hom.q3.sl2.oscillator-self",
                oracle_hom_dimension(&mats, &mats).unwrap().to_string(),
                "intertwiner solve",
            );
        }
        {
            let cls = crate::scalars::SquareClass(1).mul(crate::scalars::eps_k(1));
            let sgn = &chain.pi_minus_o2.rep;
            for (pi, eta) in [(&chain.o5p_pair.0.rep, "plus"), (&chain.o5p_pair.1.rep, "minus")]
            {
                let m = oracle_bessel_induced_multiplicity(pi, sgn, 1, cls, &chain.psi).unwrap();
                push(
                    &format!("bessel.q3.o5plus.eta-{eta}.sgn-o2minus"),
                    m.to_string(),
                    "induced-character formula",
                );
            }
        }
        let rendered = render_snapshot(&entries);
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/snapshots/oracle_pins.txt");
        let pinned = std::fs::read_to_string(path).expect("snapshot file present");
        assert_eq!(rendered, pinned, "re-pin disagrees with the checked-in snapshot");
    }
}
