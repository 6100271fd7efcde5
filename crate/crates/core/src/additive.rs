//! The additive group of `R/M^N`, filtered by `K_n = M^n`. Small abelian test quotients such
//! as `Z/p^N`.

use rand::Rng;
use serde_json::Value;

use crate::error::Result;
use crate::group::{Family, FilteredGroup, GroupDescriptor};
use crate::rings::TruncatedRing;

#[derive(Clone, Debug)]
pub struct AdditiveGroup<R: TruncatedRing> {
    ring: R,
}

impl<R: TruncatedRing> AdditiveGroup<R> {
    pub fn new(ring: R) -> Self {
        AdditiveGroup { ring }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }
}

impl<R: TruncatedRing> FilteredGroup for AdditiveGroup<R> {
    type Elem = R::Elem;

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor { family: Family::Additive, d: None, ring: *self.ring.descriptor() }
    }

    fn truncated(&self, m: u32) -> Self {
        AdditiveGroup { ring: self.ring.truncated(m) }
    }

    fn identity(&self) -> R::Elem {
        self.ring.zero()
    }

    fn mul(&self, a: &R::Elem, b: &R::Elem) -> R::Elem {
        self.ring.add(a, b)
    }

    fn inv(&self, a: &R::Elem) -> R::Elem {
        self.ring.neg(a)
    }

    fn depth(&self, a: &R::Elem) -> u32 {
        self.ring.valuation(a)
    }

    fn project(&self, a: &R::Elem, m: u32) -> R::Elem {
        self.ring.project(a, m)
    }

    fn coset_key(&self, a: &R::Elem, level: u32) -> Vec<u8> {
        let mut out = Vec::new();
        self.ring.encode_key(a, level, &mut out);
        out
    }

    fn random_element<Rn: Rng + ?Sized>(&self, rng: &mut Rn) -> R::Elem {
        self.ring.random(rng)
    }

    fn random_in_filtration<Rn: Rng + ?Sized>(&self, level: u32, rng: &mut Rn) -> R::Elem {
        self.ring.mul(&self.ring.random(rng), &self.ring.uniformizer_pow(level))
    }

    fn quotient_order(&self, level: u32) -> Option<u128> {
        (self.ring.descriptor().q as u128).checked_pow(level)
    }

    fn standard_generators(&self) -> Vec<R::Elem> {
        self.ring.additive_generators()
    }

    fn is_member(&self, _a: &R::Elem) -> bool {
        true
    }

    fn element_to_json(&self, a: &R::Elem) -> Value {
        self.ring.to_json(a)
    }

    fn element_from_json(&self, v: &Value) -> Result<R::Elem> {
        Ok(self.ring.from_json(v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_quotient;
    use crate::rings::{FqSeries, Zpn};

    #[test]
    fn cyclic_and_series_quotients() {
        let z = AdditiveGroup::new(Zpn::new(5, 2).unwrap());
        assert_eq!(enumerate_quotient(&z, 2, 100).unwrap().len(), 25);
        assert_eq!(enumerate_quotient(&z, 1, 100).unwrap().len(), 5);
        assert_eq!(z.depth(&10), 1);
        let s = AdditiveGroup::new(FqSeries::new(4, 3).unwrap());
        assert_eq!(enumerate_quotient(&s, 3, 100).unwrap().len(), 64);
        let d: GroupDescriptor = "Additive,Zp:p=2,N=2".parse().unwrap();
        assert_eq!(d, AdditiveGroup::new(Zpn::new(2, 2).unwrap()).descriptor());
    }
}
