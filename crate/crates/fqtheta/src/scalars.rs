//! Finite-field arithmetic and the scalar characters everything else consumes:
//! the additive characters psi and psi', the quadratic character, square
//! classes and the distinguished signs attached to them.
//!
//! Field elements are `u8` indices into exhaustively verified operation
//! tables. The canonical element order is the index order: residues 0..q for
//! prime fields, lexicographic coefficient order c0 + c1*p + ... for
//! extensions. All deterministic choices downstream (psi', v0, ...) refer to
//! this order.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;

/// A field element: index into the `FieldCtx` tables.
pub type Fq = u8;

const MAX_Q: u64 = 9;

/// F_q arithmetic context with exhaustively verified tables, q odd, q <= 9.
#[derive(Debug)]
pub struct FieldCtx {
    pub q: usize,
    pub p: usize,
    /// Extension degree, so q = p^deg.
    pub deg: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    /// Trace to the prime field, as a residue in 0..p.
    trace: Vec<u8>,
    legendre: Vec<i8>,
}

impl FieldCtx {
    #[inline(always)]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline(always)]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline(always)]
    pub fn neg(&self, a: Fq) -> Fq {
        self.neg[a as usize]
    }
    #[inline(always)]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }
    /// Multiplicative inverse; panics on zero (internal misuse, not user error).
    #[inline(always)]
    pub fn inv(&self, a: Fq) -> Fq {
        assert!(a != 0, "inverse of zero");
        self.inv[a as usize]
    }
    #[inline(always)]
    pub fn trace_to_prime(&self, a: Fq) -> u8 {
        self.trace[a as usize]
    }
    /// The image of an integer under Z -> F_q (via Z -> F_p).
    pub fn from_int(&self, n: i64) -> Fq {
        let r = n.rem_euclid(self.p as i64) as u8;
        r // residues embed as indices 0..p for both prime and extension fields
    }
    /// 1/2 in F_q, used throughout the symplectic formulas.
    pub fn half(&self) -> Fq {
        self.inv(self.from_int(2))
    }
    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.q as u8).map(|x| x)
    }
    /// The least non-square in canonical element order.
    pub fn least_nonsquare(&self) -> Fq {
        self.elements()
            .find(|&x| self.legendre[x as usize] == -1)
            .expect("odd field has a non-square")
    }
}

/// Quadratic character: +1 on nonzero squares, -1 on non-squares, 0 at 0.
pub fn legendre(f: &FieldCtx, x: Fq) -> i8 {
    f.legendre[x as usize]
}

/// An element of F_q^x/(F_q^x)^2 = {+1, -1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SquareClass(pub i8);

pub const SQ_PLUS: SquareClass = SquareClass(1);
pub const SQ_MINUS: SquareClass = SquareClass(-1);

impl SquareClass {
    pub fn of(f: &FieldCtx, x: Fq) -> SquareClass {
        let l = legendre(f, x);
        assert!(l != 0, "square class of zero");
        SquareClass(l)
    }
    pub fn mul(self, other: SquareClass) -> SquareClass {
        SquareClass(self.0 * other.0)
    }
    /// A canonical representative: 1 for the square class, the least
    /// non-square otherwise.
    pub fn representative(self, f: &FieldCtx) -> Fq {
        if self.0 == 1 {
            1
        } else {
            f.least_nonsquare()
        }
    }
}

impl std::fmt::Display for SquareClass {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "{}", if self.0 == 1 { "+" } else { "-" })
    }
}

/// The square class of -1: +1 iff q = 1 mod 4.
pub fn eps_minus_one(f: &FieldCtx) -> SquareClass {
    SquareClass::of(f, f.neg(1))
}

/// eps(k) = (-1)^k as a sign.
pub fn eps_k(k: i64) -> SquareClass {
    SquareClass(if k % 2 == 0 { 1 } else { -1 })
}

/// Additive character psi_a(x) = psi(a x), psi(x) = exp(2 pi i Tr(x)/p).
#[derive(Debug, Clone)]
pub struct AddChar {
    pub field: Arc<FieldCtx>,
    /// Twist parameter a; the base character has a = 1.
    pub a: Fq,
    values: Vec<Complex64>,
}

impl AddChar {
    pub fn new(field: Arc<FieldCtx>, a: Fq) -> AddChar {
        assert!(a != 0, "additive character twist must be nonzero");
        let values = (0..field.q as u8)
            .map(|x| {
                let t = field.trace_to_prime(field.mul(a, x)) as f64;
                Complex64::from_polar(1.0, TAU * t / field.p as f64)
            })
            .collect();
        AddChar { field, a, values }
    }
    #[inline(always)]
    pub fn eval(&self, x: Fq) -> Complex64 {
        self.values[x as usize]
    }
    /// The square class of the twist parameter.
    pub fn square_class(&self) -> SquareClass {
        SquareClass::of(&self.field, self.a)
    }
    /// Quadratic Gauss sum sum_x psi_a(c x^2), c != 0. Exact classical value
    /// is legendre(ac) * gamma with |gamma| = sqrt(q); computed by summation
    /// since q <= 9.
    pub fn gauss_quadratic(&self, c: Fq) -> Complex64 {
        assert!(c != 0);
        let f = &self.field;
        f.elements()
            .map(|x| self.eval(f.mul(c, f.mul(x, x))))
            .sum()
    }
    /// The character psi_b with b = a*c.
    pub fn twist(&self, c: Fq) -> AddChar {
        AddChar::new(self.field.clone(), self.field.mul(self.a, c))
    }
    /// The complex conjugate character psi_{-a}.
    pub fn conj_char(&self) -> AddChar {
        AddChar::new(self.field.clone(), self.field.neg(self.a))
    }
}

/// Construct F_q with exhaustively verified tables.
pub fn make_field(q: u64) -> Result<Arc<FieldCtx>> {
    let (p, deg) = match q {
        3 | 5 | 7 => (q, 1),
        9 => (3, 2),
        _ => return Err(Error::BadFieldSize(q, MAX_Q)),
    };
    let q = q as usize;
    let p = p as usize;
    let ctx = if deg == 1 {
        build_prime_field(p)
    } else {
        build_f9()
    };
    debug_assert_eq!(ctx.q, q);
    verify_field(&ctx)?;
    Ok(Arc::new(ctx))
}

fn build_prime_field(p: usize) -> FieldCtx {
    let q = p;
    let mut add = vec![0u8; q * q];
    let mut mul = vec![0u8; q * q];
    for a in 0..q {
        for b in 0..q {
            add[a * q + b] = ((a + b) % p) as u8;
            mul[a * q + b] = ((a * b) % p) as u8;
        }
    }
    finish_tables(q, p, 1, add, mul, |a| (a % p) as u8)
}

/// F_9 = F_3[x]/(x^2 + 1); element index c0 + 3 c1 for c0 + c1 x.
fn build_f9() -> FieldCtx {
    let q = 9;
    let p = 3;
    let mut add = vec![0u8; q * q];
    let mut mul = vec![0u8; q * q];
    for a in 0..q {
        let (a0, a1) = (a % 3, a / 3);
        for b in 0..q {
            let (b0, b1) = (b % 3, b / 3);
            add[a * q + b] = (((a0 + b0) % 3) + 3 * ((a1 + b1) % 3)) as u8;
            // (a0 + a1 x)(b0 + b1 x) with x^2 = -1
            let c0 = (a0 * b0 + 2 * a1 * b1) % 3;
            let c1 = (a0 * b1 + a1 * b0) % 3;
            mul[a * q + b] = (c0 + 3 * c1) as u8;
        }
    }
    // Tr(c0 + c1 x) = (c0 + c1 x) + (c0 + c1 x)^3 = 2 c0 (x^3 = -x).
    finish_tables(q, p, 2, add, mul, |a| ((2 * (a % 3)) % 3) as u8)
}

fn finish_tables(
    q: usize,
    p: usize,
    deg: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    tr: impl Fn(usize) -> u8,
) -> FieldCtx {
    let mut neg = vec![0u8; q];
    let mut inv = vec![0u8; q];
    for a in 0..q {
        for b in 0..q {
            if add[a * q + b] == 0 {
                neg[a] = b as u8;
            }
            if a != 0 && mul[a * q + b] == 1 {
                inv[a] = b as u8;
            }
        }
    }
    let mut legendre = vec![-1i8; q];
    legendre[0] = 0;
    for a in 1..q {
        legendre[mul[a * q + a] as usize] = 1;
    }
    let trace = (0..q).map(tr).collect();
    FieldCtx {
        q,
        p,
        deg,
        add,
        mul,
        neg,
        inv,
        trace,
        legendre,
    }
}

/// Exhaustive field-axiom check (q <= 9, so cubic loops are fine).
fn verify_field(f: &FieldCtx) -> Result<()> {
    let q = f.q as u8;
    let fail = |msg: &str| Err(Error::Internal(format!("field axiom failed: {msg}")));
    for a in 0..q {
        if f.add(a, 0) != a || f.mul(a, 1) != a {
            return fail("identity");
        }
        if f.add(a, f.neg(a)) != 0 {
            return fail("negation");
        }
        if a != 0 && f.mul(a, f.inv(a)) != 1 {
            return fail("inverse");
        }
        for b in 0..q {
            if f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a) {
                return fail("commutativity");
            }
            for c in 0..q {
                if f.add(f.add(a, b), c) != f.add(a, f.add(b, c)) {
                    return fail("additive associativity");
                }
                if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)) {
                    return fail("multiplicative associativity");
                }
                if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
                    return fail("distributivity");
                }
            }
        }
    }
    // Trace is F_p-linear and surjective.
    let mut hit = vec![false; f.p];
    for a in 0..q {
        hit[f.trace_to_prime(a) as usize] = true;
        for b in 0..q {
            let lhs = f.trace_to_prime(f.add(a, b)) as usize;
            let rhs = (f.trace_to_prime(a) as usize + f.trace_to_prime(b) as usize) % f.p;
            if lhs != rhs {
                return fail("trace additivity");
            }
        }
    }
    if hit.iter().any(|h| !h) {
        return fail("trace surjectivity");
    }
    Ok(())
}

/// The fixed pair (psi, psi'): the base character and its twist by the least
/// non-square, representing the two square classes of nontrivial characters.
pub fn psi_pair(f: &Arc<FieldCtx>) -> (AddChar, AddChar) {
    let psi = AddChar::new(f.clone(), 1);
    let psi2 = AddChar::new(f.clone(), f.least_nonsquare());
    (psi, psi2)
}
