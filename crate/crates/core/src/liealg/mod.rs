//! The integral Lie rings `sl_d`, `so_d`, `sp_d` over `R/M^N`, and the three bridges between
//! them and the congruence subgroups: [`linearize`], [`bracket_decompose`](LieAlgebra::bracket_decompose)
//! and [`lift`].

mod bridge;
mod decompose;

use std::fmt;

use serde_json::Value;

pub use bridge::{commutator_decompose, lift, lift_coords, linearize, MatrixOracle};

use crate::error::{Error, Result};
use crate::matgroups::matrix;
use crate::rings::TruncatedRing;
use decompose::Decomposer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgebraKind {
    Sl,
    So,
    Sp,
}

impl AlgebraKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgebraKind::Sl => "sl",
            AlgebraKind::So => "so",
            AlgebraKind::Sp => "sp",
        }
    }
}

/// Basis of the algebra: `(name, matrix)` pairs in coordinate order.
///
/// * `sl`: `E_i_j` for `i != j` row-major, then `D_a_{a+1}`.
/// * `so`: `X_i_j = E_ij - E_ji` for `i < j`.
/// * `sp`: `A_i_j` for all `i, j`, then `B_i_j` and `C_i_j` for `i <= j`.
fn basis<R: TruncatedRing>(kind: AlgebraKind, d: usize, r: &R) -> Vec<(String, Vec<R::Elem>)> {
    let e = |i: usize, j: usize| matrix::unit(r, d, i, j);
    let mut out = Vec::new();
    match kind {
        AlgebraKind::Sl => {
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        out.push((format!("E_{}_{}", i + 1, j + 1), e(i, j)));
                    }
                }
            }
            for a in 0..d - 1 {
                out.push((format!("D_{}_{}", a + 1, a + 2), matrix::sub(r, &e(a, a), &e(a + 1, a + 1))));
            }
        }
        AlgebraKind::So => {
            for i in 0..d {
                for j in i + 1..d {
                    out.push((format!("X_{}_{}", i + 1, j + 1), matrix::sub(r, &e(i, j), &e(j, i))));
                }
            }
        }
        AlgebraKind::Sp => {
            let g = d / 2;
            for i in 0..g {
                for j in 0..g {
                    let m = matrix::sub(r, &e(i, j), &e(g + j, g + i));
                    out.push((format!("A_{}_{}", i + 1, j + 1), m));
                }
            }
            for i in 0..g {
                for j in i..g {
                    out.push((format!("B_{}_{}", i + 1, j + 1), matrix::add(r, &e(i, g + j), &e(j, g + i))));
                }
            }
            for i in 0..g {
                for j in i..g {
                    out.push((format!("C_{}_{}", i + 1, j + 1), matrix::add(r, &e(g + i, j), &e(g + j, i))));
                }
            }
        }
    }
    out
}

/// One of `sl_d`, `so_d`, `sp_d` over a truncated ring, with its basis and the precomputed
/// data for writing elements as sums of brackets.
#[derive(Clone, Debug)]
pub struct LieAlgebra<R: TruncatedRing> {
    kind: AlgebraKind,
    d: usize,
    ring: R,
    names: Vec<String>,
    basis: Vec<Vec<R::Elem>>,
    decomposer: std::result::Result<Decomposer<R>, Error>,
}

/// A vector of the algebra, in basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieVector<R: TruncatedRing> {
    kind: AlgebraKind,
    d: usize,
    coords: Vec<R::Elem>,
}

impl<R: TruncatedRing> LieVector<R> {
    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[R::Elem] {
        &self.coords
    }
}

impl<R: TruncatedRing> LieAlgebra<R> {
    pub fn new(kind: AlgebraKind, d: usize, ring: R) -> Result<Self> {
        let ok = match kind {
            AlgebraKind::Sl => d >= 2,
            AlgebraKind::So => d >= 2,
            AlgebraKind::Sp => d >= 2 && d % 2 == 0,
        };
        if !ok {
            return Err(Error::InvalidGroup(format!("{}_{d}", kind.name())));
        }
        let (names, basis): (Vec<_>, Vec<_>) = basis(kind, d, &ring).into_iter().unzip();
        let mut alg = LieAlgebra { kind, d, ring, names, basis, decomposer: Err(Error::InvalidGroup(String::new())) };
        alg.decomposer = Decomposer::build(&alg);
        Ok(alg)
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.names
    }

    pub fn basis_matrix(&self, k: usize) -> &[R::Elem] {
        &self.basis[k]
    }

    pub fn zero(&self) -> LieVector<R> {
        self.vector(vec![self.ring.zero(); self.dim()])
    }

    pub fn vector(&self, coords: Vec<R::Elem>) -> LieVector<R> {
        assert_eq!(coords.len(), self.dim());
        LieVector { kind: self.kind, d: self.d, coords }
    }

    /// The basis vector with the given name, e.g. `E_1_2`.
    pub fn basis_vector(&self, name: &str) -> Result<LieVector<R>> {
        let k = self.names.iter().position(|n| n == name);
        let k = k.ok_or_else(|| Error::IndexOutOfRange(format!("{name} is not a basis vector")))?;
        let mut c = vec![self.ring.zero(); self.dim()];
        c[k] = self.ring.one();
        Ok(self.vector(c))
    }

    pub fn random<Rn: rand::Rng + ?Sized>(&self, rng: &mut Rn) -> LieVector<R> {
        self.vector((0..self.dim()).map(|_| self.ring.random(rng)).collect())
    }

    fn check(&self, x: &LieVector<R>) -> Result<()> {
        if x.kind != self.kind || x.d != self.d {
            return Err(Error::AlgebraMismatch(
                format!("{}_{}", x.kind.name(), x.d),
                format!("{}_{}", self.kind.name(), self.d),
            ));
        }
        Ok(())
    }

    pub fn to_matrix(&self, x: &LieVector<R>) -> Vec<R::Elem> {
        let r = &self.ring;
        let mut m = vec![r.zero(); self.d * self.d];
        for (c, b) in x.coords.iter().zip(&self.basis) {
            if r.is_zero(c) {
                continue;
            }
            for (e, be) in m.iter_mut().zip(b) {
                if !r.is_zero(be) {
                    *e = r.add(e, &r.mul(c, be));
                }
            }
        }
        m
    }

    /// Coordinates read off a matrix, without checking membership.
    pub(crate) fn coords_of(&self, m: &[R::Elem]) -> Vec<R::Elem> {
        let (d, r) = (self.d, &self.ring);
        let mut c = Vec::with_capacity(self.dim());
        match self.kind {
            AlgebraKind::Sl => {
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            c.push(m[i * d + j].clone());
                        }
                    }
                }
                let mut acc = r.zero();
                for a in 0..d - 1 {
                    acc = r.add(&acc, &m[a * d + a]);
                    c.push(acc.clone());
                }
            }
            AlgebraKind::So => {
                for i in 0..d {
                    for j in i + 1..d {
                        c.push(m[i * d + j].clone());
                    }
                }
            }
            AlgebraKind::Sp => {
                let g = d / 2;
                let half = r.inv(&r.from_i64(2)).expect("p is odd for sp");
                for i in 0..g {
                    for j in 0..g {
                        c.push(m[i * d + j].clone());
                    }
                }
                for i in 0..g {
                    for j in i..g {
                        let x = &m[i * d + g + j];
                        c.push(if i == j { r.mul(&half, x) } else { x.clone() });
                    }
                }
                for i in 0..g {
                    for j in i..g {
                        let x = &m[(g + i) * d + j];
                        c.push(if i == j { r.mul(&half, x) } else { x.clone() });
                    }
                }
            }
        }
        c
    }

    /// The vector with matrix `m`, if `m` lies in the algebra.
    pub fn from_matrix(&self, m: &[R::Elem]) -> Option<LieVector<R>> {
        if m.len() != self.d * self.d {
            return None;
        }
        let x = self.vector(self.coords_of(m));
        (self.to_matrix(&x) == m).then_some(x)
    }

    pub fn add(&self, x: &LieVector<R>, y: &LieVector<R>) -> Result<LieVector<R>> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.vector(x.coords.iter().zip(&y.coords).map(|(a, b)| self.ring.add(a, b)).collect()))
    }

    pub fn scale(&self, c: &R::Elem, x: &LieVector<R>) -> LieVector<R> {
        self.vector(x.coords.iter().map(|a| self.ring.mul(c, a)).collect())
    }

    /// `XY - YX`.
    pub fn bracket(&self, x: &LieVector<R>, y: &LieVector<R>) -> Result<LieVector<R>> {
        self.check(x)?;
        self.check(y)?;
        let m = matrix::bracket(&self.ring, self.d, &self.to_matrix(x), &self.to_matrix(y));
        Ok(self.from_matrix(&m).expect("the algebra is closed under brackets"))
    }

    /// Pairs `(X_i, Y_i)` with `sum (X_i, Y_i) = x` exactly: at most 2 for `sl`, 3 for `so`
    /// and `sp`. Pairs with a zero entry are omitted.
    pub fn bracket_decompose(&self, x: &LieVector<R>) -> Result<Vec<(LieVector<R>, LieVector<R>)>> {
        self.check(x)?;
        let dec = self.decomposer.as_ref().map_err(Clone::clone)?;
        Ok(dec.decompose(self, x))
    }

    /// Maximum number of pairs returned by [`bracket_decompose`](Self::bracket_decompose).
    pub fn arity(&self) -> usize {
        match self.kind {
            AlgebraKind::Sl => 2,
            _ => 3,
        }
    }

    /// Sparse `[[name, residue], ...]` listing of the nonzero coordinates.
    pub fn to_json(&self, x: &LieVector<R>) -> Value {
        Value::Array(
            x.coords
                .iter()
                .zip(&self.names)
                .filter(|(c, _)| !self.ring.is_zero(c))
                .map(|(c, n)| Value::Array(vec![Value::String(n.clone()), self.ring.to_json(c)]))
                .collect(),
        )
    }

    pub fn from_json(&self, v: &Value) -> Result<LieVector<R>> {
        let bad = |s: &str| Error::Decode(s.to_string());
        let mut c = vec![self.ring.zero(); self.dim()];
        for item in v.as_array().ok_or_else(|| bad("expected a coordinate list"))? {
            let pair = item.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("expected [name, value]"))?;
            let name = pair[0].as_str().ok_or_else(|| bad("basis name must be a string"))?;
            let k = self.names.iter().position(|n| n == name).ok_or_else(|| bad(name))?;
            c[k] = self.ring.add(&c[k], &self.ring.from_json(&pair[1])?);
        }
        Ok(self.vector(c))
    }
}

impl<R: TruncatedRing> fmt::Display for LieVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}{:?}", self.kind.name(), self.d, self.coords)
    }
}

#[cfg(test)]
mod tests;
