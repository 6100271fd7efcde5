//! Truncated discrete-valuation pro-p rings: `Z/p^N` and `F_q[[t]]/(t^N)`.
//!
//! A ring value ([`TruncatedRing`]) is a cheap, shareable context; its elements are plain
//! canonical payloads so that matrices and hash tables over them stay small. [`RingElem`]
//! pairs a payload with its ring for the checked, descriptor-carrying API.

mod fq;
mod series;
mod zp;

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rand::Rng;
use serde_json::Value;
use thiserror::Error;

pub use fq::{FqElem, FqField};
pub use series::FqSeries;
pub use zp::Zpn;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring descriptors differ: {0} vs {1}")]
    DescriptorMismatch(String, String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("no square root: Newton iteration cannot start from the given seed")]
    NoSquareRoot,
    #[error("operation requires odd residue characteristic")]
    EvenCharacteristic,
    #[error("invalid ring descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("cannot decode ring element: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RingKind {
    PadicInt,
    FqPowerSeries,
}

/// Which base ring, its residue characteristic and field size, and the truncation level `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    pub kind: RingKind,
    pub p: u64,
    pub q: u64,
    pub truncation: u32,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Returns `(p, k)` with `q = p^k` when `q` is a prime power.
pub(crate) fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

impl RingDescriptor {
    pub fn padic(p: u64, truncation: u32) -> Result<Self, RingError> {
        let d = RingDescriptor { kind: RingKind::PadicInt, p, q: p, truncation };
        d.validate()?;
        Ok(d)
    }

    pub fn power_series(q: u64, truncation: u32) -> Result<Self, RingError> {
        let (p, _) = prime_power(q)
            .ok_or_else(|| RingError::InvalidDescriptor(format!("q={q} is not a prime power")))?;
        let d = RingDescriptor { kind: RingKind::FqPowerSeries, p, q, truncation };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), RingError> {
        if !is_prime(self.p) {
            return Err(RingError::InvalidDescriptor(format!("p={} is not prime", self.p)));
        }
        if self.truncation == 0 {
            return Err(RingError::InvalidDescriptor("truncation N must be >= 1".into()));
        }
        match self.kind {
            RingKind::PadicInt => {
                if self.q != self.p {
                    return Err(RingError::InvalidDescriptor("Zp requires q = p".into()));
                }
                let fits = (0..self.truncation)
                    .try_fold(1u64, |acc, _| acc.checked_mul(self.p))
                    .is_some_and(|m| m < (1u64 << 62));
                if !fits {
                    return Err(RingError::InvalidDescriptor(format!(
                        "p^N = {}^{} does not fit the 62-bit residue representation",
                        self.p, self.truncation
                    )));
                }
            }
            RingKind::FqPowerSeries => {
                if prime_power(self.q).map(|(p, _)| p) != Some(self.p) {
                    return Err(RingError::InvalidDescriptor(format!(
                        "q={} is not a power of p={}",
                        self.q, self.p
                    )));
                }
                if self.q > fq::MAX_FIELD_SIZE {
                    return Err(RingError::InvalidDescriptor(format!(
                        "q={} exceeds the table-driven field limit {}",
                        self.q,
                        fq::MAX_FIELD_SIZE
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same ring, truncated at a different level.
    pub fn with_truncation(&self, truncation: u32) -> Self {
        RingDescriptor { truncation, ..*self }
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::PadicInt => write!(f, "Zp:p={},N={}", self.p, self.truncation),
            RingKind::FqPowerSeries => write!(f, "Fq[[t]]:q={},N={}", self.q, self.truncation),
        }
    }
}

impl FromStr for RingDescriptor {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RingError::InvalidDescriptor(s.to_string());
        let (head, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let mut fields = std::collections::BTreeMap::new();
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: u64 = v.trim().parse().map_err(|_| bad())?;
            fields.insert(k.trim(), v);
        }
        let n = *fields.get("N").ok_or_else(bad)?;
        let n = u32::try_from(n).map_err(|_| bad())?;
        match head.trim() {
            "Zp" => RingDescriptor::padic(*fields.get("p").ok_or_else(bad)?, n),
            "Fq[[t]]" => RingDescriptor::power_series(*fields.get("q").ok_or_else(bad)?, n),
            _ => Err(bad()),
        }
    }
}

/// Arithmetic context for one truncated ring. Elements are canonical payloads.
pub trait TruncatedRing: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync;

    fn descriptor(&self) -> &RingDescriptor;

    /// The same ring truncated at level `m` (`m <= N`).
    fn truncated(&self, m: u32) -> Self;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Inverse of a unit; `None` for non-units.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// Largest `n <= N` with `a` in `M^n`; `N` for zero.
    fn valuation(&self, a: &Self::Elem) -> u32;

    /// `P^k`, zero once `k >= N`.
    fn uniformizer_pow(&self, k: u32) -> Self::Elem;

    /// Exact division by `P^k` of an element of valuation at least `k`; the result is the
    /// canonical representative whose digits at positions `>= N - k` are zero.
    fn shift_down(&self, a: &Self::Elem, k: u32) -> Self::Elem;

    /// Reduction modulo `M^m`, in the ring truncated at `m`.
    fn project(&self, a: &Self::Elem, m: u32) -> Self::Elem;

    /// Canonical image of an element of `self.truncated(m)` back in this ring (zero high digits).
    fn embed_from(&self, a: &Self::Elem) -> Self::Elem;

    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> Self::Elem;

    /// Appends a fixed-width byte encoding of `a mod M^level`.
    fn encode_key(&self, a: &Self::Elem, level: u32, out: &mut Vec<u8>);

    fn to_json(&self, a: &Self::Elem) -> Value;
    fn from_json(&self, v: &Value) -> Result<Self::Elem, RingError>;

    /// Generators of the additive group of the ring.
    fn additive_generators(&self) -> Vec<Self::Elem>;

    /// Reduction of `a` mod `M` as an element of the residue field `F_q` (code form).
    fn residue(&self, a: &Self::Elem) -> FqElem;

    /// A fixed lift of a residue field element: the integer `c` in `Z/p^N`, the constant `c`
    /// in `F_q[[t]]/(t^N)`.
    fn from_residue(&self, c: FqElem) -> Self::Elem;

    fn truncation(&self) -> u32 {
        self.descriptor().truncation
    }

    /// `sum a_i b_i`.
    fn dot<'a, I>(&self, terms: I) -> Self::Elem
    where
        I: IntoIterator<Item = (&'a Self::Elem, &'a Self::Elem)>,
        Self::Elem: 'a,
    {
        terms.into_iter().fold(self.zero(), |acc, (a, b)| self.add(&acc, &self.mul(a, b)))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.valuation(a) == 0
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// A ring element that carries its ring, for the checked arithmetic API.
#[derive(Clone, Debug)]
pub struct RingElem<R: TruncatedRing> {
    ring: R,
    value: R::Elem,
}

impl<R: TruncatedRing> PartialEq for RingElem<R> {
    fn eq(&self, other: &Self) -> bool {
        self.ring.descriptor() == other.ring.descriptor() && self.value == other.value
    }
}

impl<R: TruncatedRing> Eq for RingElem<R> {}

impl<R: TruncatedRing> RingElem<R> {
    pub fn new(ring: &R, value: R::Elem) -> Self {
        RingElem { ring: ring.clone(), value }
    }

    pub fn from_i64(ring: &R, v: i64) -> Self {
        RingElem { ring: ring.clone(), value: ring.from_i64(v) }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn value(&self) -> &R::Elem {
        &self.value
    }

    pub fn into_value(self) -> R::Elem {
        self.value
    }

    fn check(&self, other: &Self) -> Result<(), RingError> {
        let (a, b) = (self.ring.descriptor(), other.ring.descriptor());
        if a != b {
            return Err(RingError::DescriptorMismatch(a.to_string(), b.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(RingElem { ring: self.ring.clone(), value: self.ring.add(&self.value, &other.value) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(RingElem { ring: self.ring.clone(), value: self.ring.sub(&self.value, &other.value) })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(RingElem { ring: self.ring.clone(), value: self.ring.mul(&self.value, &other.value) })
    }

    pub fn neg(&self) -> Self {
        RingElem { ring: self.ring.clone(), value: self.ring.neg(&self.value) }
    }

    pub fn inv(&self) -> Result<Self, RingError> {
        let value = self.ring.inv(&self.value).ok_or(RingError::NotAUnit)?;
        Ok(RingElem { ring: self.ring.clone(), value })
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation(&self.value)
    }

    pub fn to_json(&self) -> Value {
        self.ring.to_json(&self.value)
    }
}

/// Square root of `a` by Newton iteration `x <- x - (x^2 - a) / 2x`, started at `seed`.
///
/// Requires odd characteristic, a unit seed, and `seed^2 = a mod M`. The result `b` satisfies
/// `b^2 = a` exactly in the truncation and agrees with `seed` modulo `M^v`, where
/// `v = valuation(seed^2 - a)`.
pub fn hensel_sqrt<R: TruncatedRing>(
    a: &RingElem<R>,
    seed: &RingElem<R>,
) -> Result<RingElem<R>, RingError> {
    a.check(seed)?;
    let value = hensel_sqrt_raw(&a.ring, &a.value, &seed.value)?;
    Ok(RingElem { ring: a.ring.clone(), value })
}

pub(crate) fn hensel_sqrt_raw<R: TruncatedRing>(
    ring: &R,
    a: &R::Elem,
    seed: &R::Elem,
) -> Result<R::Elem, RingError> {
    if ring.descriptor().p == 2 {
        return Err(RingError::EvenCharacteristic);
    }
    let residual = |x: &R::Elem| ring.sub(&ring.mul(x, x), a);
    let mut x = seed.clone();
    let mut f = residual(&x);
    if !ring.is_unit(&x) || (ring.valuation(&f) == 0 && ring.truncation() > 0) {
        return Err(RingError::NoSquareRoot);
    }
    // Precision doubles each step, so this bound is generous.
    for _ in 0..64 {
        if ring.is_zero(&f) {
            return Ok(x);
        }
        let two_x = ring.add(&x, &x);
        let step = ring.mul(&f, &ring.inv(&two_x).ok_or(RingError::NoSquareRoot)?);
        x = ring.sub(&x, &step);
        f = residual(&x);
    }
    Err(RingError::NoSquareRoot)
}

/// Runtime choice between the two concrete rings, for CLI dispatch.
#[derive(Clone, Debug)]
pub enum AnyRing {
    Padic(Zpn),
    Series(FqSeries),
}

impl AnyRing {
    pub fn new(desc: &RingDescriptor) -> Result<Self, RingError> {
        Ok(match desc.kind {
            RingKind::PadicInt => AnyRing::Padic(Zpn::new(desc.p, desc.truncation)?),
            RingKind::FqPowerSeries => AnyRing::Series(FqSeries::new(desc.q, desc.truncation)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_strings_round_trip() {
        for s in ["Zp:p=3,N=6", "Fq[[t]]:q=9,N=40", "Zp:p=5,N=9"] {
            let d: RingDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert_eq!("Fq[[t]]:q=9,N=40".parse::<RingDescriptor>().unwrap().p, 3);
    }

    #[test]
    fn rejects_bad_descriptors() {
        for s in ["Zp:p=4,N=2", "Zp:p=3,N=0", "Fq[[t]]:q=6,N=3", "Zq:p=3,N=2", "Zp:p=3,N=80"] {
            assert!(s.parse::<RingDescriptor>().is_err(), "{s}");
        }
    }

    #[test]
    fn mixed_levels_are_rejected() {
        let r6 = Zpn::new(3, 6).unwrap();
        let r5 = Zpn::new(3, 5).unwrap();
        let a = RingElem::from_i64(&r6, 2);
        let b = RingElem::from_i64(&r5, 2);
        assert!(matches!(a.add(&b), Err(RingError::DescriptorMismatch(..))));
    }

    #[test]
    fn checked_arithmetic_examples() {
        let r = Zpn::new(3, 2).unwrap();
        let x = RingElem::from_i64(&r, 7);
        let y = RingElem::from_i64(&r, 4);
        assert_eq!(*x.add(&y).unwrap().value(), 2);
        assert_eq!(*RingElem::from_i64(&r, 2).inv().unwrap().value(), 5);
        assert_eq!(RingElem::from_i64(&r, 3).inv(), Err(RingError::NotAUnit));
    }

    #[test]
    fn hensel_examples() {
        let r = Zpn::new(5, 4).unwrap();
        let one = RingElem::from_i64(&r, 1);
        assert_eq!(hensel_sqrt(&one, &one).unwrap(), one);
        for alpha in [1i64, 2] {
            let a = RingElem::from_i64(&r, 1 - alpha * alpha * 25);
            let b = hensel_sqrt(&a, &one).unwrap();
            assert_eq!(b.mul(&b).unwrap(), a);
            assert_eq!(b.value() % 25, 1);
        }
        // 2 is not a square mod 5, and 1 is not a root of x^2 - 2 mod 5.
        let two = RingElem::from_i64(&r, 2);
        assert_eq!(hensel_sqrt(&two, &one), Err(RingError::NoSquareRoot));
        let r2 = Zpn::new(2, 5).unwrap();
        let one2 = RingElem::from_i64(&r2, 1);
        assert_eq!(hensel_sqrt(&one2, &one2), Err(RingError::EvenCharacteristic));
    }
}
