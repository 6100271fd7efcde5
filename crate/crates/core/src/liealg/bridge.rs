//! Passing between congruence subgroups and the Lie ring: linearization, lifting, and the
//! commutator decomposition built from them.

use super::{AlgebraKind, LieAlgebra, LieVector};
use crate::error::{Error, Result};
use crate::group::{CommutatorOracle, FilteredGroup};
use crate::matgroups::{matrix, MatrixGroup};
use crate::rings::{hensel_sqrt_raw, TruncatedRing};

#[derive(Clone, Copy)]
enum Label {
    E(usize, usize),
    D(usize),
    X(usize, usize),
    A(usize, usize),
    B(usize, usize),
    C(usize, usize),
}

/// Basis labels in coordinate order, matching the algebra basis.
fn labels(kind: AlgebraKind, d: usize) -> Vec<Label> {
    let mut out = Vec::new();
    match kind {
        AlgebraKind::Sl => {
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        out.push(Label::E(i, j));
                    }
                }
            }
            out.extend((0..d - 1).map(Label::D));
        }
        AlgebraKind::So => {
            for i in 0..d {
                for j in i + 1..d {
                    out.push(Label::X(i, j));
                }
            }
        }
        AlgebraKind::Sp => {
            let g = d / 2;
            for i in 0..g {
                for j in 0..g {
                    out.push(Label::A(i, j));
                }
            }
            for i in 0..g {
                for j in i..g {
                    out.push(Label::B(i, j));
                }
            }
            for i in 0..g {
                for j in i..g {
                    out.push(Label::C(i, j));
                }
            }
        }
    }
    out
}

/// Group element `g` with `g = I + y B mod y^2` for the basis matrix `B` of `label`.
fn lift_one<R: TruncatedRing>(r: &R, d: usize, label: Label, y: &R::Elem) -> Vec<R::Elem> {
    let mut m = matrix::identity(r, d);
    let mut put = |i: usize, j: usize, v: R::Elem| m[i * d + j] = r.add(&m[i * d + j], &v);
    match label {
        Label::E(i, j) => put(i, j, y.clone()),
        Label::D(a) => {
            // (I + y(D + E_ab - E_ba)) (I - y E_ab) (I + y E_ba), each of determinant 1.
            let b = a + 1;
            put(a, a, y.clone());
            put(b, b, r.neg(y));
            put(a, b, y.clone());
            put(b, a, r.neg(y));
            let mut u = matrix::identity(r, d);
            u[a * d + b] = r.neg(y);
            let mut l = matrix::identity(r, d);
            l[b * d + a] = y.clone();
            return matrix::mul(r, d, &matrix::mul(r, d, &m, &u), &l);
        }
        Label::X(i, j) => {
            let beta = hensel_sqrt_raw(r, &r.sub(&r.one(), &r.mul(y, y)), &r.one())
                .expect("1 - y^2 is a square congruent to 1 for y in M");
            let db = r.sub(&beta, &r.one());
            put(i, i, db.clone());
            put(j, j, db);
            put(i, j, y.clone());
            put(j, i, r.neg(y));
        }
        Label::A(i, j) if i == j => {
            let g = d / 2;
            let u = r.add(&r.one(), y);
            m[i * d + i] = u.clone();
            m[(g + i) * d + g + i] = r.inv(&u).expect("1 + y is a unit for y in M");
        }
        Label::A(i, j) => {
            let g = d / 2;
            put(i, j, y.clone());
            put(g + j, g + i, r.neg(y));
        }
        Label::B(i, j) => {
            let g = d / 2;
            put(i, g + j, y.clone());
            put(j, g + i, y.clone());
        }
        Label::C(i, j) => {
            let g = d / 2;
            put(g + i, j, y.clone());
            put(g + j, i, y.clone());
        }
    }
    m
}

/// Product over the basis of the one-parameter lifts at level `l >= 1`: an element of `K_l`
/// congruent to `I + P^l X` modulo `P^{2l}`. Valid for any `l`, trivial once `l >= N`.
pub fn lift_coords<R: TruncatedRing>(kind: AlgebraKind, d: usize, r: &R, coords: &[R::Elem], l: u32) -> Vec<R::Elem> {
    assert!(l >= 1, "lift level must be positive");
    let pl = r.uniformizer_pow(l);
    let mut g = matrix::identity(r, d);
    for (label, x) in labels(kind, d).into_iter().zip(coords) {
        let y = r.mul(x, &pl);
        if r.is_zero(&y) {
            continue;
        }
        g = matrix::mul(r, d, &g, &lift_one(r, d, label, &y));
    }
    g
}

/// `g` in `K_l` with `g = I + P^l X mod P^{2l}`.
pub fn lift<R: TruncatedRing>(alg: &LieAlgebra<R>, x: &LieVector<R>, l: u32) -> Result<Vec<R::Elem>> {
    alg.check(x)?;
    let n = alg.ring.truncation();
    if l == 0 || 2 * l > n {
        return Err(Error::TruncationTooShallow(format!("lift at level {l} needs 1 <= 2l <= N = {n}")));
    }
    if alg.kind != AlgebraKind::Sl && alg.ring.descriptor().p == 2 {
        return Err(crate::rings::RingError::EvenCharacteristic.into());
    }
    Ok(lift_coords(alg.kind, alg.d, &alg.ring, &x.coords, l))
}

fn depth_of<R: TruncatedRing>(r: &R, d: usize, g: &[R::Elem]) -> u32 {
    matrix::valuation(r, &matrix::sub(r, g, &matrix::identity(r, d)))
}

/// `X` read from `g - I = P^n X`, meaningful modulo `P^{min(n, N-n)}`. Requires `g` in `K_n`.
pub(crate) fn linearize_clamped<R: TruncatedRing>(alg: &LieAlgebra<R>, g: &[R::Elem], n: u32) -> LieVector<R> {
    let r = &alg.ring;
    let m: Vec<R::Elem> = matrix::sub(r, g, &matrix::identity(r, alg.d)).iter().map(|x| r.shift_down(x, n)).collect();
    alg.vector(alg.coords_of(&m))
}

/// `X` with `g = I + P^n X mod P^{2n}`.
pub fn linearize<R: TruncatedRing>(alg: &LieAlgebra<R>, g: &[R::Elem], n: u32) -> Result<LieVector<R>> {
    let r = &alg.ring;
    if 2 * n > r.truncation() {
        return Err(Error::TruncationTooShallow(format!("linearize at depth {n} needs 2n <= N = {}", r.truncation())));
    }
    let depth = depth_of(r, alg.d, g);
    if depth < n {
        return Err(Error::NotDeepEnough { depth, required: n });
    }
    Ok(linearize_clamped(alg, g, n))
}

fn decompose_clamped<R: TruncatedRing>(
    alg: &LieAlgebra<R>,
    r: &[R::Elem],
    n: u32,
    m: u32,
) -> Result<Vec<(Vec<R::Elem>, Vec<R::Elem>)>> {
    let ring = &alg.ring;
    let depth = depth_of(ring, alg.d, r);
    if depth < n + m {
        return Err(Error::DepthViolation { depth, required: n + m });
    }
    if n + m >= ring.truncation() {
        return Ok(Vec::new());
    }
    let x = linearize_clamped(alg, r, n + m);
    let pairs = alg.bracket_decompose(&x)?;
    Ok(pairs
        .into_iter()
        .map(|(a, b)| {
            (lift_coords(alg.kind, alg.d, ring, &a.coords, n), lift_coords(alg.kind, alg.d, ring, &b.coords, m))
        })
        .collect())
}

/// Pairs `(g_i, h_i)` in `K_n x K_m` with `[g_1, h_1] ... [g_k, h_k] = r mod K_{2n+m}`.
///
/// Requires `r` in `K_{n+m}`, `1 <= n <= m <= 2n` and `2n + m <= N`.
pub fn commutator_decompose<R: TruncatedRing>(
    alg: &LieAlgebra<R>,
    r: &[R::Elem],
    n: u32,
    m: u32,
) -> Result<Vec<(Vec<R::Elem>, Vec<R::Elem>)>> {
    if n == 0 || m < n || m > 2 * n {
        return Err(Error::BadLevelPair { n, m, reason: "need 1 <= n <= m <= 2n".into() });
    }
    let cap = alg.ring.truncation();
    if 2 * n + m > cap {
        return Err(Error::TruncationTooShallow(format!("2n + m = {} exceeds N = {cap}", 2 * n + m)));
    }
    decompose_clamped(alg, r, n, m)
}

/// The commutator decomposition for a matrix group, as consumed by the compiler.
#[derive(Clone, Debug)]
pub struct MatrixOracle<R: TruncatedRing> {
    alg: LieAlgebra<R>,
}

impl<R: TruncatedRing> MatrixOracle<R> {
    pub fn new(group: &MatrixGroup<R>) -> Result<Self> {
        let alg = LieAlgebra::new(group.algebra_kind(), group.d(), group.ring().clone())?;
        alg.decomposer.as_ref().map_err(Clone::clone)?;
        Ok(MatrixOracle { alg })
    }

    pub fn algebra(&self) -> &LieAlgebra<R> {
        &self.alg
    }
}

impl<R: TruncatedRing> CommutatorOracle<MatrixGroup<R>> for MatrixOracle<R> {
    fn arity(&self) -> usize {
        self.alg.arity()
    }

    fn admissible(&self, n: u32, m: u32) -> bool {
        n >= 1 && n <= m && m <= 2 * n
    }

    fn decompose(
        &self,
        r: &<MatrixGroup<R> as FilteredGroup>::Elem,
        n: u32,
        m: u32,
    ) -> Result<Vec<(Vec<R::Elem>, Vec<R::Elem>)>> {
        if !self.admissible(n, m) {
            return Err(Error::OracleLevelRejected { n, m });
        }
        decompose_clamped(&self.alg, r, n, m)
    }
}
