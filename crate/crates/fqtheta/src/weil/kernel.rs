//! Symbolic Gaussian-kernel calculus: operators on functions F_q^n -> C whose
//! kernels have the shape c * psi(z^T Q z + l^T z) * [C z = d], z = (x, y).
//! Composition and trace are exact: shared variables are eliminated by
//! solving linear constraints symbolically and folding quadratic Gauss sums
//! coordinate by coordinate, so no q^n-dimensional object is ever built.

use crate::linalg::{diagonalize_symmetric, Mat};
use crate::scalars::{AddChar, Fq};
use crate::{Error, Result};
use num_complex::Complex64;

/// A scaled Gaussian expression in `vars` variables:
/// c * psi(z^T Q z + l^T z) restricted to the affine set {C z = d}.
#[derive(Debug, Clone)]
pub struct Gaussian {
    pub vars: usize,
    pub c: Complex64,
    pub q_mat: Mat,
    pub l: Vec<Fq>,
    /// Constraint rows; empty matrix means unconstrained.
    pub con: Mat,
    pub con_rhs: Vec<Fq>,
}

impl Gaussian {
    pub fn unconstrained(vars: usize, c: Complex64) -> Gaussian {
        Gaussian {
            vars,
            c,
            q_mat: Mat::zero(vars, vars),
            l: vec![0; vars],
            con: Mat::zero(0, vars),
            con_rhs: Vec::new(),
        }
    }
    pub fn push_constraint(&mut self, row: Vec<Fq>, rhs: Fq) {
        assert_eq!(row.len(), self.vars);
        let mut con = Mat::zero(self.con.rows + 1, self.vars);
        for i in 0..self.con.rows {
            for j in 0..self.vars {
                con[(i, j)] = self.con[(i, j)];
            }
        }
        for j in 0..self.vars {
            con[(self.con.rows, j)] = row[j];
        }
        self.con = con;
        self.con_rhs.push(rhs);
    }
    /// Numeric evaluation at a point (for small-n cross-checks).
    pub fn eval(&self, psi: &AddChar, z: &[Fq]) -> Complex64 {
        let f = &psi.field;
        assert_eq!(z.len(), self.vars);
        for r in 0..self.con.rows {
            let mut acc: Fq = 0;
            for j in 0..self.vars {
                acc = f.add(acc, f.mul(self.con[(r, j)], z[j]));
            }
            if acc != self.con_rhs[r] {
                return Complex64::new(0.0, 0.0);
            }
        }
        let mut e: Fq = 0;
        for i in 0..self.vars {
            for j in 0..self.vars {
                e = f.add(e, f.mul(z[i], f.mul(self.q_mat[(i, j)], z[j])));
            }
            e = f.add(e, f.mul(self.l[i], z[i]));
        }
        self.c * psi.eval(e)
    }
}

/// Sum a Gaussian over the variables NOT listed in `keep` (in order), i.e.
/// compute sum_{summed vars} of the expression as a Gaussian in the kept
/// variables. `keep` must be strictly increasing.
pub fn sum_out(psi: &AddChar, g: &Gaussian, keep: &[usize]) -> Result<Gaussian> {
    let f = &psi.field;
    let m = g.vars;
    debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    let kept_set: Vec<bool> = {
        let mut v = vec![false; m];
        for &k in keep {
            v[k] = true;
        }
        v
    };
    // Work on a mutable copy with a live variable list mapping current
    // column -> original variable id.
    let mut cur = g.clone();
    let mut live: Vec<usize> = (0..m).collect();

    // Phase 1: eliminate summed variables pinned by constraints.
    loop {
        // Row-reduce constraints preferring pivots on summed variables.
        let order: Vec<usize> = {
            let mut s: Vec<usize> = (0..cur.vars).filter(|&j| !kept_set[live[j]]).collect();
            let k: Vec<usize> = (0..cur.vars).filter(|&j| kept_set[live[j]]).collect();
            s.extend(k);
            s
        };
        // Find a constraint row with a nonzero coefficient on a summed var.
        let mut target: Option<(usize, usize)> = None; // (row, col)
        'rows: for r in 0..cur.con.rows {
            for &j in &order {
                if !kept_set[live[j]] && cur.con[(r, j)] != 0 {
                    target = Some((r, j));
                    break 'rows;
                }
            }
        }
        let Some((r, j)) = target else { break };
        // Solve constraint r for variable j: z_j = a0 + sum_{i != j} a_i z_i.
        let pivinv = f.inv(cur.con[(r, j)]);
        let a0 = f.mul(pivinv, cur.con_rhs[r]);
        let coeff: Vec<Fq> = (0..cur.vars)
            .map(|i| {
                if i == j {
                    0
                } else {
                    f.neg(f.mul(pivinv, cur.con[(r, i)]))
                }
            })
            .collect();
        cur = substitute(psi, &cur, j, a0, &coeff, r);
        live.remove(j);
        if cur.vars == 0 && cur.con.rows > 0 {
            // Constraints with no variables: consistent or zero.
            for rr in 0..cur.con.rows {
                if cur.con_rhs[rr] != 0 {
                    return Ok(Gaussian::unconstrained(keep.len(), Complex64::new(0.0, 0.0)));
                }
            }
            cur.con = Mat::zero(0, 0);
            cur.con_rhs.clear();
        }
        // Detect inconsistent zero rows.
        for rr in (0..cur.con.rows).rev() {
            let zero_row = (0..cur.vars).all(|i| cur.con[(rr, i)] == 0);
            if zero_row {
                if cur.con_rhs[rr] != 0 {
                    return Ok(Gaussian::unconstrained(keep.len(), Complex64::new(0.0, 0.0)));
                }
                cur = drop_constraint(&cur, rr);
            }
        }
    }
    // Remaining constraints involve only kept variables. Split live vars.
    let s_idx: Vec<usize> = (0..cur.vars).filter(|&j| !kept_set[live[j]]).collect();
    let k_idx: Vec<usize> = (0..cur.vars).filter(|&j| kept_set[live[j]]).collect();
    let ns = s_idx.len();
    let nk = k_idx.len();
    // Blocks of the quadratic form (exponent z^T Q z, Q not nec. symmetric
    // in storage; symmetrize first).
    let mut qs = Mat::zero(cur.vars, cur.vars);
    let half = f.half();
    for i in 0..cur.vars {
        for j in 0..cur.vars {
            qs[(i, j)] = f.mul(half, f.add(cur.q_mat[(i, j)], cur.q_mat[(j, i)]));
        }
    }
    let pick = |rows: &[usize], cols: &[usize]| {
        let mut mm = Mat::zero(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                mm[(a, b)] = qs[(i, j)];
            }
        }
        mm
    };
    let q_ss = pick(&s_idx, &s_idx);
    let q_sk = pick(&s_idx, &k_idx);
    let l_s: Vec<Fq> = s_idx.iter().map(|&i| cur.l[i]).collect();
    let mut q_kk = pick(&k_idx, &k_idx);
    let mut l_k: Vec<Fq> = k_idx.iter().map(|&i| cur.l[i]).collect();
    let mut c = cur.c;
    let mut const_exp: Fq = 0;
    // New constraints on kept variables arising from rank-deficient Q_ss.
    let mut new_con: Vec<(Vec<Fq>, Fq)> = Vec::new();
    if ns > 0 {
        // Diagonalize Q_ss: T^T Q_ss T = D; substitute z_s = T w.
        let (t, diag) = diagonalize_symmetric(f, &q_ss);
        // Linear coefficient of w_i: affine in kept vars,
        // m_i = (T^T l_s)_i + (2 T^T Q_sk z_k)_i.
        let tt = t.transpose();
        let a_vec: Vec<Fq> = (0..ns)
            .map(|i| {
                let mut acc: Fq = 0;
                for j in 0..ns {
                    acc = f.add(acc, f.mul(tt[(i, j)], l_s[j]));
                }
                acc
            })
            .collect();
        let two = f.from_int(2);
        let b_mat = {
            // rows i, cols kept: 2 * (T^T Q_sk)
            let mut bm = tt.mul(f, &q_sk);
            bm = bm.scale(f, two);
            bm
        };
        let quarter_inv = f.inv(f.from_int(4));
        for i in 0..ns {
            let d = diag[i];
            let a = a_vec[i];
            let b_row: Vec<Fq> = (0..nk).map(|j| b_mat[(i, j)]).collect();
            if d != 0 {
                c *= psi.gauss_quadratic(d);
                // exponent gains -(a + b.z)^2 / (4d)
                let coef = f.neg(f.mul(quarter_inv, f.inv(d)));
                const_exp = f.add(const_exp, f.mul(coef, f.mul(a, a)));
                for j in 0..nk {
                    let lj = f.mul(coef, f.mul(two, f.mul(a, b_row[j])));
                    l_k[j] = f.add(l_k[j], lj);
                    for j2 in 0..nk {
                        let qq = f.mul(coef, f.mul(b_row[j], b_row[j2]));
                        q_kk[(j, j2)] = f.add(q_kk[(j, j2)], qq);
                    }
                }
            } else if b_row.iter().all(|&x| x == 0) {
                if a != 0 {
                    return Ok(Gaussian::unconstrained(keep.len(), Complex64::new(0.0, 0.0)));
                }
                c *= f.q as f64;
            } else {
                c *= f.q as f64;
                new_con.push((b_row, f.neg(a)));
            }
        }
    }
    c *= psi.eval(const_exp);
    // Assemble the output over the kept variables in `keep` order. The
    // surviving kept columns map to original ids live[k_idx[b]]; any kept
    // variable eliminated by a constraint in phase 1 cannot happen (pivots
    // prefer summed vars, and a kept-pivot row has no summed entries and is
    // carried through), so all kept vars survive.
    let out_pos: Vec<usize> = k_idx
        .iter()
        .map(|&j| {
            keep.iter()
                .position(|&orig| orig == live[j])
                .expect("kept variable survived")
        })
        .collect();
    let nkeep = keep.len();
    if nk != nkeep {
        return Err(Error::Internal(
            "a kept variable was consumed by constraint elimination".into(),
        ));
    }
    let mut out = Gaussian::unconstrained(nkeep, c);
    for a in 0..nk {
        out.l[out_pos[a]] = l_k[a];
        for b in 0..nk {
            out.q_mat[(out_pos[a], out_pos[b])] = q_kk[(a, b)];
        }
    }
    // Carried-over constraints (kept pivots) plus the new rank-deficiency
    // constraints.
    for r in 0..cur.con.rows {
        let mut row = vec![0u8; nkeep];
        let mut nonzero = false;
        for j in 0..cur.vars {
            if cur.con[(r, j)] != 0 {
                if !kept_set[live[j]] {
                    return Err(Error::Internal("summed var left in constraint".into()));
                }
                let pos = keep.iter().position(|&o| o == live[j]).unwrap();
                row[pos] = cur.con[(r, j)];
                nonzero = true;
            }
        }
        if nonzero {
            out.push_constraint(row, cur.con_rhs[r]);
        } else if cur.con_rhs[r] != 0 {
            return Ok(Gaussian::unconstrained(nkeep, Complex64::new(0.0, 0.0)));
        }
    }
    for (brow, rhs) in new_con {
        let mut row = vec![0u8; nkeep];
        for (a, &v) in brow.iter().enumerate() {
            row[out_pos[a]] = v;
        }
        out.push_constraint(row, rhs);
    }
    Ok(out)
}

fn drop_constraint(g: &Gaussian, row: usize) -> Gaussian {
    let mut out = g.clone();
    let rows: Vec<usize> = (0..g.con.rows).filter(|&r| r != row).collect();
    let mut con = Mat::zero(rows.len(), g.vars);
    let mut rhs = Vec::with_capacity(rows.len());
    for (rr, &r) in rows.iter().enumerate() {
        for j in 0..g.vars {
            con[(rr, j)] = g.con[(r, j)];
        }
        rhs.push(g.con_rhs[r]);
    }
    out.con = con;
    out.con_rhs = rhs;
    out
}

/// Substitute variable `j` := a0 + sum coeff_i z_i into the Gaussian and drop
/// constraint row `drop_row` (the one solved). Removes variable j.
fn substitute(
    psi: &AddChar,
    g: &Gaussian,
    j: usize,
    a0: Fq,
    coeff: &[Fq],
    drop_row: usize,
) -> Gaussian {
    let f = &psi.field;
    let m = g.vars;
    let keep: Vec<usize> = (0..m).filter(|&i| i != j).collect();
    let nm = m - 1;
    // Affine map z = E z' + e0 where z'_b = z_{keep[b]}.
    // Row i of E: identity for i != j; row j = coeff restricted to keep.
    let mut e = Mat::zero(m, nm);
    let mut e0 = vec![0u8; m];
    for (b, &i) in keep.iter().enumerate() {
        e[(i, b)] = 1;
    }
    for (b, &i) in keep.iter().enumerate() {
        e[(j, b)] = coeff[i];
    }
    e0[j] = a0;
    // New quadratic: E^T Q E; linear: E^T (l + (Q + Q^T) e0); const:
    // e0^T Q e0 + l^T e0.
    let q = &g.q_mat;
    let new_q = e.transpose().mul(f, q).mul(f, &e);
    let mut qqt_e0 = vec![0u8; m];
    for i in 0..m {
        let mut acc: Fq = 0;
        for k2 in 0..m {
            acc = f.add(acc, f.mul(f.add(q[(i, k2)], q[(k2, i)]), e0[k2]));
        }
        qqt_e0[i] = acc;
    }
    let mut new_l = vec![0u8; nm];
    for b in 0..nm {
        let mut acc: Fq = 0;
        for i in 0..m {
            acc = f.add(acc, f.mul(e[(i, b)], f.add(g.l[i], qqt_e0[i])));
        }
        new_l[b] = acc;
    }
    let mut cexp: Fq = 0;
    for i in 0..m {
        for k2 in 0..m {
            cexp = f.add(cexp, f.mul(e0[i], f.mul(q[(i, k2)], e0[k2])));
        }
        cexp = f.add(cexp, f.mul(g.l[i], e0[i]));
    }
    // Constraints: same substitution, dropping the solved row.
    let rows: Vec<usize> = (0..g.con.rows).filter(|&r| r != drop_row).collect();
    let mut new_con = Mat::zero(rows.len(), nm);
    let mut new_rhs = Vec::with_capacity(rows.len());
    for (rr, &r) in rows.iter().enumerate() {
        for b in 0..nm {
            let mut acc: Fq = 0;
            for i in 0..m {
                acc = f.add(acc, f.mul(g.con[(r, i)], e[(i, b)]));
            }
            new_con[(rr, b)] = acc;
        }
        let mut shift: Fq = 0;
        for i in 0..m {
            shift = f.add(shift, f.mul(g.con[(r, i)], e0[i]));
        }
        new_rhs.push(f.sub(g.con_rhs[r], shift));
    }
    Gaussian {
        vars: nm,
        c: g.c * psi.eval(cexp),
        q_mat: new_q,
        l: new_l,
        con: new_con,
        con_rhs: new_rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{make_field, psi_pair};

    // Brute-force the sum over the dropped variables and compare with the
    // symbolic result, across random-ish small Gaussians.
    #[test]
    fn sum_out_matches_brute_force() {
        for q in [3u64, 5] {
            let f = make_field(q).unwrap();
            let (psi, psi2) = psi_pair(&f);
            for psi in [&psi, &psi2] {
                let mut state: u64 = 0x9e3779b97f4a7c15;
                let mut rnd = || {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((state >> 33) % q) as u8
                };
                for case in 0..60 {
                    let m = 3 + (case % 2); // 3 or 4 variables
                    let mut g = Gaussian::unconstrained(m, Complex64::new(1.0, 0.0));
                    for i in 0..m {
                        g.l[i] = rnd();
                        for j in 0..m {
                            g.q_mat[(i, j)] = rnd();
                        }
                    }
                    if case % 3 == 0 {
                        let row: Vec<Fq> = (0..m).map(|_| rnd()).collect();
                        if row.iter().any(|&x| x != 0) {
                            g.push_constraint(row, rnd());
                        }
                    }
                    let keep: Vec<usize> = match case % 4 {
                        0 => vec![0],
                        1 => vec![0, 1],
                        2 => vec![m - 1],
                        _ => vec![],
                    };
                    let out = sum_out(psi, &g, &keep).unwrap();
                    // Evaluate both on every kept assignment.
                    let qn = (q as usize).pow(keep.len() as u32);
                    for kv in 0..qn {
                        let mut kvals = vec![0u8; keep.len()];
                        let mut t = kv;
                        for s in kvals.iter_mut() {
                            *s = (t % q as usize) as u8;
                            t /= q as usize;
                        }
                        // Brute force: sum g over all assignments matching
                        // kept values.
                        let mut brute = Complex64::new(0.0, 0.0);
                        let total = (q as usize).pow(m as u32);
                        for full in 0..total {
                            let mut z = vec![0u8; m];
                            let mut t = full;
                            for s in z.iter_mut() {
                                *s = (t % q as usize) as u8;
                                t /= q as usize;
                            }
                            if keep.iter().enumerate().all(|(a, &v)| z[v] == kvals[a]) {
                                brute += g.eval(psi, &z);
                            }
                        }
                        let sym = out.eval(psi, &kvals);
                        assert!(
                            (brute - sym).norm() < 1e-7,
                            "q={q} case={case} kv={kv}: brute={brute} sym={sym}"
                        );
                    }
                }
            }
        }
    }
}
