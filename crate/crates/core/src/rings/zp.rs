use std::sync::Arc;

use rand::Rng;
use serde_json::Value;

use super::{FqElem, RingDescriptor, RingError, TruncatedRing};

/// `Z/p^N`, residues stored as least nonnegative `u64`.
#[derive(Clone, Debug)]
pub struct Zpn {
    desc: RingDescriptor,
    /// `p^0, ..., p^N`.
    powers: Arc<[u64]>,
}

impl PartialEq for Zpn {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}

impl Zpn {
    pub fn new(p: u64, truncation: u32) -> Result<Self, RingError> {
        let desc = RingDescriptor::padic(p, truncation)?;
        let powers: Vec<u64> =
            std::iter::successors(Some(1u64), |x| Some(x * p)).take(truncation as usize + 1).collect();
        Ok(Zpn { desc, powers: powers.into() })
    }

    pub fn p(&self) -> u64 {
        self.desc.p
    }

    pub fn modulus(&self) -> u64 {
        self.powers[self.desc.truncation as usize]
    }
}

impl TruncatedRing for Zpn {
    type Elem = u64;

    fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    fn truncated(&self, m: u32) -> Self {
        assert!(m >= 1 && m <= self.desc.truncation, "truncation {m} out of range");
        Zpn { desc: self.desc.with_truncation(m), powers: self.powers[..=m as usize].into() }
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.modulus()
    }

    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.modulus() as i64) as u64
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        let m = self.modulus();
        if s >= m {
            s - m
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus() - b
        }
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.modulus() - a
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus() as u128) as u64
    }

    fn dot<'a, I>(&self, terms: I) -> u64
    where
        I: IntoIterator<Item = (&'a u64, &'a u64)>,
    {
        // Residues are below 2^62, so four products fit in a u128 before reduction.
        let m = self.modulus() as u128;
        let mut acc = 0u128;
        for (i, (a, b)) in terms.into_iter().enumerate() {
            if i % 4 == 3 {
                acc %= m;
            }
            acc += *a as u128 * *b as u128;
        }
        (acc % m) as u64
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if a % self.p() == 0 {
            return None;
        }
        let m = self.modulus() as i128;
        let (mut r0, mut r1) = (m, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(t0.rem_euclid(m) as u64)
    }

    fn valuation(&self, a: &u64) -> u32 {
        if *a == 0 {
            return self.desc.truncation;
        }
        let mut v = 0;
        let mut x = *a;
        while x % self.p() == 0 {
            x /= self.p();
            v += 1;
        }
        v
    }

    fn uniformizer_pow(&self, k: u32) -> u64 {
        if k >= self.desc.truncation {
            0
        } else {
            self.powers[k as usize]
        }
    }

    fn shift_down(&self, a: &u64, k: u32) -> u64 {
        if k >= self.desc.truncation {
            return 0;
        }
        debug_assert!(self.valuation(a) >= k);
        a / self.powers[k as usize]
    }

    fn project(&self, a: &u64, m: u32) -> u64 {
        a % self.powers[m.min(self.desc.truncation) as usize]
    }

    fn embed_from(&self, a: &u64) -> u64 {
        *a
    }

    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> u64 {
        rng.gen_range(0..self.modulus())
    }

    fn encode_key(&self, a: &u64, level: u32, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.project(a, level).to_le_bytes());
    }

    fn to_json(&self, a: &u64) -> Value {
        Value::from(*a)
    }

    fn from_json(&self, v: &Value) -> Result<u64, RingError> {
        v.as_i64()
            .map(|x| self.from_i64(x))
            .ok_or_else(|| RingError::Decode(format!("expected an integer residue, got {v}")))
    }

    fn additive_generators(&self) -> Vec<u64> {
        vec![self.one()]
    }

    fn residue(&self, a: &u64) -> FqElem {
        FqElem((a % self.p()) as u16)
    }

    fn from_residue(&self, c: FqElem) -> u64 {
        self.from_i64(c.0 as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_axioms_exhaustive_small() {
        // p^N = 729 is the exhaustive bound; triples are sampled on a stride to keep this quick.
        for (p, n) in [(3u64, 2u32), (5, 2), (3, 6)] {
            let r = Zpn::new(p, n).unwrap();
            let m = r.modulus();
            let stride = if m > 100 { 37 } else { 1 };
            for a in (0..m).step_by(stride) {
                for b in (0..m).step_by(stride) {
                    assert_eq!(r.add(&a, &b), r.add(&b, &a));
                    assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
                    assert_eq!(r.sub(&r.add(&a, &b), &b), a);
                    for c in (0..m).step_by(stride * 3) {
                        assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
                        assert_eq!(
                            r.mul(&a, &r.add(&b, &c)),
                            r.add(&r.mul(&a, &b), &r.mul(&a, &c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let r = Zpn::new(3, 4).unwrap();
        assert_eq!(r.valuation(&18), 2);
        assert_eq!(r.valuation(&0), 4);
        assert_eq!(r.valuation(&1), 0);
    }

    #[test]
    fn valuation_is_additive_until_truncation() {
        let r = Zpn::new(3, 6).unwrap();
        for a in 1..r.modulus() {
            let b = (a * 7 + 9) % r.modulus();
            let expect = (r.valuation(&a) + r.valuation(&b)).min(6);
            assert_eq!(r.valuation(&r.mul(&a, &b)), expect);
        }
    }

    #[test]
    fn inverse_of_units() {
        let r = Zpn::new(5, 4).unwrap();
        for a in 0..r.modulus() {
            match r.inv(&a) {
                Some(b) => assert_eq!(r.mul(&a, &b), 1),
                None => assert_eq!(a % 5, 0),
            }
        }
    }

    #[test]
    fn shift_and_project() {
        let r = Zpn::new(3, 5).unwrap();
        assert_eq!(r.shift_down(&(9 * 7), 2), 7);
        assert_eq!(r.project(&100, 2), 1);
        assert_eq!(r.truncated(2).modulus(), 9);
    }
}
