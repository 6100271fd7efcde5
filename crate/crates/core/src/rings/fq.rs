use std::sync::{Arc, Mutex, OnceLock};

use super::{prime_power, RingError};

/// Largest field size realized by the table-driven implementation.
pub const MAX_FIELD_SIZE: u64 = 1024;

/// An element of `F_q`, encoded as `sum c_i p^i` for the polynomial `sum c_i x^i` modulo the
/// field's defining polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FqElem(pub u16);

/// `F_q = F_p[x]/(f)`, with `f` the smallest monic irreducible of degree `k` in the base-`p`
/// ordering of its coefficient vector `(c_0, c_1, ..., c_{k-1})`. For `q = p` this is `F_p`.
///
/// Examples: `F_9` uses `x^2 + 1`, `F_25` uses `x^2 + 2`, `F_27` uses `x^3 + 2x + 1`.
#[derive(Debug)]
pub struct FqField {
    pub p: u64,
    pub degree: u32,
    pub q: u64,
    /// Low coefficients `c_0..c_{k-1}` of the monic defining polynomial.
    pub modulus: Vec<u64>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

fn digits(x: u64, p: u64, k: u32) -> Vec<u64> {
    let mut x = x;
    (0..k)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Multiplies two residues of `F_p[x]/(x^k + low(x))`.
fn poly_mulmod(a: &[u64], b: &[u64], low: &[u64], p: u64) -> Vec<u64> {
    let k = low.len();
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^k = -low(x)
    for deg in (k..2 * k).rev() {
        let c = prod[deg];
        if c != 0 {
            prod[deg] = 0;
            for (i, &l) in low.iter().enumerate() {
                prod[deg - k + i] = (prod[deg - k + i] + (p - l) * c) % p;
            }
        }
    }
    prod.truncate(k);
    prod
}

impl FqField {
    /// Shared instance per `q`; fields are immutable and reused across rings.
    pub fn get(q: u64) -> Result<Arc<FqField>, RingError> {
        static CACHE: OnceLock<Mutex<Vec<Arc<FqField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = cache.lock().expect("field cache poisoned");
        if let Some(f) = guard.iter().find(|f| f.q == q) {
            return Ok(f.clone());
        }
        let f = Arc::new(FqField::build(q)?);
        guard.push(f.clone());
        Ok(f)
    }

    fn build(q: u64) -> Result<FqField, RingError> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| RingError::InvalidDescriptor(format!("q={q} is not a prime power")))?;
        if q > MAX_FIELD_SIZE {
            return Err(RingError::InvalidDescriptor(format!("q={q} too large")));
        }
        let qs = q as usize;
        let add: Vec<u16> = (0..q * q)
            .map(|ab| {
                let (a, b) = (digits(ab / q, p, k), digits(ab % q, p, k));
                let s: Vec<u64> = a.iter().zip(&b).map(|(x, y)| (x + y) % p).collect();
                undigits(&s, p) as u16
            })
            .collect();
        let neg: Vec<u16> = (0..q)
            .map(|a| {
                let d: Vec<u64> = digits(a, p, k).iter().map(|x| (p - x) % p).collect();
                undigits(&d, p) as u16
            })
            .collect();
        // Search monic degree-k polynomials in order until the multiplication has no zero divisors.
        for cand in 0..q {
            let low = digits(cand, p, k);
            if k > 1 && low[0] == 0 {
                continue;
            }
            let mul: Vec<u16> = (0..q * q)
                .map(|ab| {
                    let (a, b) = (digits(ab / q, p, k), digits(ab % q, p, k));
                    undigits(&poly_mulmod(&a, &b, &low, p), p) as u16
                })
                .collect();
            let mut inv = vec![0u16; qs];
            let mut field = true;
            for a in 1..qs {
                match (1..qs).find(|&b| mul[a * qs + b] == 1) {
                    Some(b) => inv[a] = b as u16,
                    None => {
                        field = false;
                        break;
                    }
                }
            }
            if field {
                return Ok(FqField { p, degree: k, q, modulus: low, add, mul, neg, inv });
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.add[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        FqElem(self.neg[a.0 as usize])
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        FqElem(self.mul[a.0 as usize * self.q as usize + b.0 as usize])
    }

    pub fn inv(&self, a: FqElem) -> Option<FqElem> {
        (a.0 != 0).then(|| FqElem(self.inv[a.0 as usize]))
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, v: i64) -> FqElem {
        FqElem(v.rem_euclid(self.p as i64) as u16)
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q as u16).map(FqElem)
    }

    /// `F_p`-basis `1, x, ..., x^{k-1}`.
    pub fn additive_basis(&self) -> Vec<FqElem> {
        (0..self.degree).map(|i| FqElem(self.p.pow(i) as u16)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 25, 27, 49, 81] {
            let f = FqField::get(q).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if q <= 27 {
                        for c in f.elements() {
                            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        }
                    }
                }
                if a.0 != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FqElem(1));
                }
                // Frobenius: a^q = a.
                let mut x = FqElem(1);
                for _ in 0..q {
                    x = f.mul(x, a);
                }
                assert_eq!(x, a);
            }
        }
    }

    #[test]
    fn documented_moduli() {
        assert_eq!(FqField::get(9).unwrap().modulus, vec![1, 0]);
        assert_eq!(FqField::get(25).unwrap().modulus, vec![2, 0]);
        assert_eq!(FqField::get(27).unwrap().modulus, vec![1, 2, 0]);
    }
}
