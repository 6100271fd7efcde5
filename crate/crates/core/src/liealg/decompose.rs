//! Writing an algebra element as a short sum of brackets.

use super::{AlgebraKind, LieAlgebra, LieVector};
use crate::error::{Error, Result};
use crate::matgroups::matrix;
use crate::rings::TruncatedRing;

/// Selected operator images spanning the target module, with the inverse of their matrix.
///
/// Candidates `(op, src, image)` are scanned in order and kept when their image is independent
/// of the kept ones modulo `M`; the kept images then form a basis over `R`.
#[derive(Clone, Debug)]
pub(super) struct ImageTable<R: TruncatedRing> {
    picks: Vec<(usize, usize)>,
    inverse: Vec<R::Elem>,
}

impl<R: TruncatedRing> ImageTable<R> {
    fn build(r: &R, dim: usize, candidates: Vec<(usize, usize, Vec<R::Elem>)>) -> Option<Self> {
        if dim == 0 {
            return Some(ImageTable { picks: Vec::new(), inverse: Vec::new() });
        }
        let mut reduced: Vec<(usize, Vec<R::Elem>)> = Vec::new();
        let mut picks = Vec::new();
        let mut columns = Vec::new();
        for (op, src, image) in candidates {
            let mut v = image.clone();
            for (piv, u) in &reduced {
                if r.is_zero(&v[*piv]) {
                    continue;
                }
                let f = v[*piv].clone();
                for (x, y) in v.iter_mut().zip(u) {
                    *x = r.sub(x, &r.mul(&f, y));
                }
            }
            let Some(piv) = v.iter().position(|x| r.is_unit(x)) else { continue };
            let s = r.inv(&v[piv]).expect("unit");
            let v = v.iter().map(|x| r.mul(&s, x)).collect();
            reduced.push((piv, v));
            picks.push((op, src));
            columns.push(image);
            if picks.len() == dim {
                break;
            }
        }
        if picks.len() < dim {
            return None;
        }
        let mut m = vec![r.zero(); dim * dim];
        for (j, col) in columns.iter().enumerate() {
            for i in 0..dim {
                m[i * dim + j] = col[i].clone();
            }
        }
        let inverse = matrix::inverse(r, dim, &m)?;
        Some(ImageTable { picks, inverse })
    }

    /// `(op, src, coefficient)` with `sum coefficient * image(op, src) = target`.
    fn solve(&self, r: &R, target: &[R::Elem]) -> Vec<(usize, usize, R::Elem)> {
        let dim = self.picks.len();
        (0..dim)
            .map(|i| {
                let c = r.dot((0..dim).map(|k| (&self.inverse[i * dim + k], &target[k])));
                (self.picks[i].0, self.picks[i].1, c)
            })
            .filter(|(_, _, c)| !r.is_zero(c))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub(super) enum Decomposer<R: TruncatedRing> {
    /// `sl_2`, odd `p`: `X = ([[0,-b],[c,0]], diag(1/2,-1/2)) + ([[0,a],[0,0]], [[0,0],[1,0]])`.
    Sl2 { half: R::Elem },
    /// Operators `ad(Z_k)` whose images jointly span the algebra.
    Table { ops: Vec<Vec<R::Elem>>, table: ImageTable<R> },
    /// `sp_{2g}` through its diagonal `gl_g` and off-diagonal blocks.
    Sp { g: usize, half: R::Elem, skew: ImageTable<R>, z: Vec<R::Elem> },
}

/// Symmetric then skew `g x g` matrices used as sources in the `sp` skew-part table.
fn sym_skew_basis<R: TruncatedRing>(r: &R, g: usize) -> (Vec<Vec<R::Elem>>, Vec<Vec<R::Elem>>) {
    let e = |i, j| matrix::unit(r, g, i, j);
    let mut sym = Vec::new();
    let mut skew = Vec::new();
    for i in 0..g {
        for j in i..g {
            sym.push(if i == j { e(i, i) } else { matrix::add(r, &e(i, j), &e(j, i)) });
            if i != j {
                skew.push(matrix::sub(r, &e(i, j), &e(j, i)));
            }
        }
    }
    (sym, skew)
}

fn upper_entries<R: TruncatedRing>(g: usize, m: &[R::Elem]) -> Vec<R::Elem> {
    let mut out = Vec::new();
    for i in 0..g {
        for j in i + 1..g {
            out.push(m[i * g + j].clone());
        }
    }
    out
}

impl<R: TruncatedRing> Decomposer<R> {
    pub(super) fn build(alg: &LieAlgebra<R>) -> Result<Self> {
        let (r, d) = (&alg.ring, alg.d);
        let p = r.descriptor().p;
        let sum = |ms: Vec<Vec<R::Elem>>| ms.into_iter().reduce(|a, b| matrix::add(r, &a, &b)).unwrap();
        let x = |i: usize, j: usize| matrix::sub(r, &matrix::unit(r, d, i, j), &matrix::unit(r, d, j, i));
        match alg.kind {
            AlgebraKind::Sl if d == 2 => {
                if p == 2 {
                    return Err(Error::UnsupportedCharacteristic("sl_2 needs p odd".into()));
                }
                Ok(Decomposer::Sl2 { half: r.inv(&r.from_i64(2)).expect("p odd") })
            }
            AlgebraKind::Sl => {
                let t1 = sum((0..d - 1).map(|i| matrix::unit(r, d, i + 1, i)).collect());
                let t2 = sum((0..d - 1).map(|i| matrix::unit(r, d, i, i + 1)).collect());
                Self::table(alg, vec![t1, t2])
            }
            AlgebraKind::So if d == 2 => Err(Error::Unsupported("so_2 is abelian".into())),
            AlgebraKind::So => {
                let t1 = sum((0..d - 1).map(|i| x(i, i + 1)).collect());
                let t2 = sum(vec![x(0, d - 2), x(0, d - 1), x(1, d - 1)]);
                let t3 = x(0, 1);
                Self::table(alg, vec![t1, t2, t3])
            }
            AlgebraKind::Sp => {
                if p == 2 {
                    return Err(Error::UnsupportedCharacteristic("sp needs p odd".into()));
                }
                let g = d / 2;
                let e11 = matrix::unit(r, g, 0, 0);
                let mut w = vec![r.zero(); g * g];
                for i in 0..g.saturating_sub(1) {
                    w[i * g + i + 1] = r.one();
                    w[(i + 1) * g + i] = r.neg(&r.one());
                }
                let (sym, skew) = sym_skew_basis(r, g);
                let mut cands = Vec::new();
                for (b, s) in sym.iter().enumerate() {
                    cands.push((0, b, upper_entries::<R>(g, &matrix::bracket(r, g, s, &e11))));
                }
                for (b, s) in skew.iter().enumerate() {
                    cands.push((1, b, upper_entries::<R>(g, &matrix::bracket(r, g, s, &w))));
                }
                let table = ImageTable::build(r, g * (g - 1) / 2, cands)
                    .ok_or_else(|| Error::Unsupported(format!("no bracket table for sp_{d}")))?;
                let z = matrix::add(r, &e11, &w);
                Ok(Decomposer::Sp { g, half: r.inv(&r.from_i64(2)).expect("p odd"), skew: table, z })
            }
        }
    }

    fn table(alg: &LieAlgebra<R>, ops: Vec<Vec<R::Elem>>) -> Result<Self> {
        let (r, d) = (&alg.ring, alg.d);
        let mut cands = Vec::new();
        for (k, z) in ops.iter().enumerate() {
            for (b, bm) in alg.basis.iter().enumerate() {
                cands.push((k, b, alg.coords_of(&matrix::bracket(r, d, bm, z))));
            }
        }
        let table = ImageTable::build(r, alg.dim(), cands).ok_or_else(|| {
            Error::Unsupported(format!("operator images do not span {}_{d}", alg.kind.name()))
        })?;
        Ok(Decomposer::Table { ops, table })
    }

    pub(super) fn decompose(&self, alg: &LieAlgebra<R>, x: &LieVector<R>) -> Vec<(LieVector<R>, LieVector<R>)> {
        let (r, d) = (&alg.ring, alg.d);
        let mut pairs: Vec<(Vec<R::Elem>, Vec<R::Elem>)> = Vec::new();
        match self {
            Decomposer::Sl2 { half } => {
                let m = alg.to_matrix(x);
                let (a, b, c) = (&m[0], &m[1], &m[2]);
                let mut u = vec![r.zero(); 4];
                u[1] = r.neg(b);
                u[2] = c.clone();
                let h = vec![half.clone(), r.zero(), r.zero(), r.neg(half)];
                pairs.push((u, h));
                let mut v = vec![r.zero(); 4];
                v[1] = a.clone();
                pairs.push((v, matrix::unit(r, 2, 1, 0)));
            }
            Decomposer::Table { ops, table } => {
                let mut ps = vec![vec![r.zero(); d * d]; ops.len()];
                for (k, b, c) in table.solve(r, &x.coords) {
                    ps[k] = matrix::add(r, &ps[k], &matrix::scale(r, &c, &alg.basis[b]));
                }
                pairs.extend(ps.into_iter().zip(ops.iter().cloned()));
            }
            Decomposer::Sp { g, half, skew, z } => {
                let g = *g;
                let m = alg.to_matrix(x);
                let block = |i0: usize, j0: usize| -> Vec<R::Elem> {
                    (0..g * g).map(|k| m[(i0 + k / g) * d + j0 + k % g].clone()).collect()
                };
                let (p, q, rr) = (block(0, 0), block(0, g), block(g, 0));
                let put = |blocks: [(usize, usize, &[R::Elem]); 2]| -> Vec<R::Elem> {
                    let mut out = vec![r.zero(); d * d];
                    for (i0, j0, b) in blocks {
                        for k in 0..g * g {
                            out[(i0 + k / g) * d + j0 + k % g] = b[k].clone();
                        }
                    }
                    out
                };
                let embed = |a: &[R::Elem]| {
                    let neg_t: Vec<R::Elem> = matrix::transpose(g, a).iter().map(|v| r.neg(v)).collect();
                    put([(0, 0, a), (g, g, &neg_t)])
                };
                // Skew part of P through ad(E_11) on symmetric and ad(W) on skew matrices.
                let pt = matrix::transpose(g, &p);
                let p_skew = matrix::scale(r, half, &matrix::sub(r, &p, &pt));
                let (sym, skw) = sym_skew_basis(r, g);
                let mut x1 = vec![r.zero(); g * g];
                for (op, b, c) in skew.solve(r, &upper_entries::<R>(g, &p_skew)) {
                    let src = if op == 0 { &sym[b] } else { &skw[b] };
                    x1 = matrix::add(r, &x1, &matrix::scale(r, &c, src));
                }
                let y = matrix::sub(r, &p, &matrix::bracket(r, g, &x1, z));
                pairs.push((embed(&x1), embed(z)));

                let zero = vec![r.zero(); g * g];
                let neg_half_q = matrix::scale(r, &r.neg(half), &q);
                let half_r = matrix::scale(r, half, &rr);
                let ident = matrix::identity(r, g);
                pairs.push((put([(0, g, &neg_half_q), (g, 0, &half_r)]), embed(&ident)));

                let two_i = matrix::scale(r, &r.from_i64(2), &ident);
                let half_y = matrix::scale(r, half, &y);
                pairs.push((put([(0, g, &half_y), (g, 0, &zero)]), put([(0, g, &two_i), (g, 0, &two_i)])));
            }
        }
        pairs
            .into_iter()
            .filter(|(a, b)| a.iter().any(|v| !r.is_zero(v)) && b.iter().any(|v| !r.is_zero(v)))
            .map(|(a, b)| {
                let a = alg.from_matrix(&a).expect("left entry lies in the algebra");
                let b = alg.from_matrix(&b).expect("right entry lies in the algebra");
                (a, b)
            })
            .collect()
    }
}
