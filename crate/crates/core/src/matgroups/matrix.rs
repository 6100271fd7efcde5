//! Dense square matrices over a truncated ring, stored row-major.

use crate::rings::TruncatedRing;

pub fn identity<R: TruncatedRing>(r: &R, d: usize) -> Vec<R::Elem> {
    let mut m = vec![r.zero(); d * d];
    for i in 0..d {
        m[i * d + i] = r.one();
    }
    m
}

pub fn unit<R: TruncatedRing>(r: &R, d: usize, i: usize, j: usize) -> Vec<R::Elem> {
    let mut m = vec![r.zero(); d * d];
    m[i * d + j] = r.one();
    m
}

pub fn mul<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    let mut c = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            c.push(r.dot((0..d).map(|k| (&a[i * d + k], &b[k * d + j]))));
        }
    }
    c
}

pub fn add<R: TruncatedRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    a.iter().zip(b).map(|(x, y)| r.add(x, y)).collect()
}

pub fn sub<R: TruncatedRing>(r: &R, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    a.iter().zip(b).map(|(x, y)| r.sub(x, y)).collect()
}

pub fn scale<R: TruncatedRing>(r: &R, c: &R::Elem, a: &[R::Elem]) -> Vec<R::Elem> {
    a.iter().map(|x| r.mul(c, x)).collect()
}

pub fn transpose<E: Clone>(d: usize, a: &[E]) -> Vec<E> {
    (0..d * d).map(|k| a[(k % d) * d + k / d].clone()).collect()
}

/// `ab - ba`.
pub fn bracket<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem], b: &[R::Elem]) -> Vec<R::Elem> {
    sub(r, &mul(r, d, a, b), &mul(r, d, b, a))
}

/// Minimum valuation of the entries.
pub fn valuation<R: TruncatedRing>(r: &R, a: &[R::Elem]) -> u32 {
    a.iter().map(|x| r.valuation(x)).min().unwrap_or(r.truncation())
}

/// Inverse by Gauss-Jordan elimination with unit pivots; `None` unless invertible.
pub fn inverse<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem]) -> Option<Vec<R::Elem>> {
    let mut m = a.to_vec();
    let mut inv = identity(r, d);
    for col in 0..d {
        let piv = (col..d).find(|&i| r.is_unit(&m[i * d + col]))?;
        if piv != col {
            for k in 0..d {
                m.swap(piv * d + k, col * d + k);
                inv.swap(piv * d + k, col * d + k);
            }
        }
        let s = r.inv(&m[col * d + col])?;
        for k in 0..d {
            m[col * d + k] = r.mul(&s, &m[col * d + k]);
            inv[col * d + k] = r.mul(&s, &inv[col * d + k]);
        }
        for i in 0..d {
            if i == col || r.is_zero(&m[i * d + col]) {
                continue;
            }
            let f = m[i * d + col].clone();
            for k in 0..d {
                let t = r.mul(&f, &m[col * d + k]);
                m[i * d + k] = r.sub(&m[i * d + k], &t);
                let t = r.mul(&f, &inv[col * d + k]);
                inv[i * d + k] = r.sub(&inv[i * d + k], &t);
            }
        }
    }
    Some(inv)
}

/// Determinant when it is a unit, by elimination with unit pivots; `None` otherwise.
pub fn unit_determinant<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem]) -> Option<R::Elem> {
    let mut m = a.to_vec();
    let mut det = r.one();
    for col in 0..d {
        let piv = (col..d).find(|&i| r.is_unit(&m[i * d + col]))?;
        if piv != col {
            for k in 0..d {
                m.swap(piv * d + k, col * d + k);
            }
            det = r.neg(&det);
        }
        let pv = m[col * d + col].clone();
        det = r.mul(&det, &pv);
        let s = r.inv(&pv)?;
        for i in col + 1..d {
            let f = r.mul(&m[i * d + col], &s);
            for k in col..d {
                let t = r.mul(&f, &m[col * d + k]);
                m[i * d + k] = r.sub(&m[i * d + k], &t);
            }
        }
    }
    Some(det)
}

/// Determinant by cofactor expansion; valid for any matrix, used for membership checks.
pub fn determinant<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem]) -> R::Elem {
    fn rec<R: TruncatedRing>(r: &R, d: usize, a: &[R::Elem], rows: &[usize], col: usize) -> R::Elem {
        if col == d {
            return r.one();
        }
        let mut acc = r.zero();
        for (pos, &i) in rows.iter().enumerate() {
            if r.is_zero(&a[i * d + col]) {
                continue;
            }
            let rest: Vec<usize> = rows.iter().copied().filter(|&k| k != i).collect();
            let term = r.mul(&a[i * d + col], &rec(r, d, a, &rest, col + 1));
            acc = if pos % 2 == 0 { r.add(&acc, &term) } else { r.sub(&acc, &term) };
        }
        acc
    }
    let rows: Vec<usize> = (0..d).collect();
    rec(r, d, a, &rows, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::Zpn;

    #[test]
    fn inverse_and_determinants_agree() {
        let r = Zpn::new(3, 5).unwrap();
        let mut rng = rand::thread_rng();
        let d = 3;
        for _ in 0..300 {
            let a: Vec<u64> = (0..d * d).map(|_| r.random(&mut rng)).collect();
            let det = determinant(&r, d, &a);
            match inverse(&r, d, &a) {
                Some(b) => {
                    assert_eq!(mul(&r, d, &a, &b), identity(&r, d));
                    assert_eq!(unit_determinant(&r, d, &a), Some(det));
                }
                None => {
                    assert!(!r.is_unit(&det));
                    assert_eq!(unit_determinant(&r, d, &a), None);
                }
            }
        }
    }
}
