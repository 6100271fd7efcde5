use std::sync::Arc;

use rand::Rng;
use serde_json::Value;

use super::{FqElem, FqField, RingDescriptor, RingError, TruncatedRing};

/// `F_q[[t]]/(t^N)`; an element is its coefficient vector `c_0..c_{N-1}`.
#[derive(Clone, Debug)]
pub struct FqSeries {
    desc: RingDescriptor,
    field: Arc<FqField>,
}

impl PartialEq for FqSeries {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
    }
}

impl FqSeries {
    pub fn new(q: u64, truncation: u32) -> Result<Self, RingError> {
        let desc = RingDescriptor::power_series(q, truncation)?;
        Ok(FqSeries { desc, field: FqField::get(q)? })
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    fn n(&self) -> usize {
        self.desc.truncation as usize
    }

    /// `c * t^k`.
    pub fn monomial(&self, c: FqElem, k: u32) -> Vec<FqElem> {
        let mut v = vec![FqElem(0); self.n()];
        if (k as usize) < v.len() {
            v[k as usize] = c;
        }
        v
    }
}

impl TruncatedRing for FqSeries {
    type Elem = Vec<FqElem>;

    fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    fn truncated(&self, m: u32) -> Self {
        assert!(m >= 1 && m <= self.desc.truncation, "truncation {m} out of range");
        FqSeries { desc: self.desc.with_truncation(m), field: self.field.clone() }
    }

    fn zero(&self) -> Vec<FqElem> {
        vec![FqElem(0); self.n()]
    }

    fn one(&self) -> Vec<FqElem> {
        self.monomial(FqElem(1), 0)
    }

    fn from_i64(&self, v: i64) -> Vec<FqElem> {
        self.monomial(self.field.from_int(v), 0)
    }

    fn add(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        a.iter().zip(b).map(|(&x, &y)| self.field.add(x, y)).collect()
    }

    fn sub(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        a.iter().zip(b).map(|(&x, &y)| self.field.sub(x, y)).collect()
    }

    fn neg(&self, a: &Vec<FqElem>) -> Vec<FqElem> {
        a.iter().map(|&x| self.field.neg(x)).collect()
    }

    fn mul(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        let n = self.n();
        let mut c = vec![FqElem(0); n];
        for (i, &x) in a.iter().enumerate() {
            if x.0 == 0 {
                continue;
            }
            for (j, &y) in b[..n - i].iter().enumerate() {
                c[i + j] = self.field.add(c[i + j], self.field.mul(x, y));
            }
        }
        c
    }

    fn inv(&self, a: &Vec<FqElem>) -> Option<Vec<FqElem>> {
        let c0inv = self.field.inv(a[0])?;
        let n = self.n();
        let mut b = vec![FqElem(0); n];
        b[0] = c0inv;
        for k in 1..n {
            let mut s = FqElem(0);
            for i in 1..=k {
                s = self.field.add(s, self.field.mul(a[i], b[k - i]));
            }
            b[k] = self.field.neg(self.field.mul(s, c0inv));
        }
        Some(b)
    }

    fn valuation(&self, a: &Vec<FqElem>) -> u32 {
        a.iter().position(|c| c.0 != 0).unwrap_or(self.n()) as u32
    }

    fn uniformizer_pow(&self, k: u32) -> Vec<FqElem> {
        self.monomial(FqElem(1), k)
    }

    fn shift_down(&self, a: &Vec<FqElem>, k: u32) -> Vec<FqElem> {
        let k = (k as usize).min(self.n());
        debug_assert!(a[..k].iter().all(|c| c.0 == 0));
        let mut v = a[k..].to_vec();
        v.resize(self.n(), FqElem(0));
        v
    }

    fn project(&self, a: &Vec<FqElem>, m: u32) -> Vec<FqElem> {
        a[..(m as usize).min(self.n())].to_vec()
    }

    fn embed_from(&self, a: &Vec<FqElem>) -> Vec<FqElem> {
        let mut v = a.clone();
        v.resize(self.n(), FqElem(0));
        v
    }

    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> Vec<FqElem> {
        (0..self.n()).map(|_| FqElem(rng.gen_range(0..self.desc.q) as u16)).collect()
    }

    fn encode_key(&self, a: &Vec<FqElem>, level: u32, out: &mut Vec<u8>) {
        for c in &a[..(level as usize).min(self.n())] {
            out.extend_from_slice(&c.0.to_le_bytes());
        }
    }

    fn to_json(&self, a: &Vec<FqElem>) -> Value {
        Value::from(a.iter().map(|c| c.0).collect::<Vec<_>>())
    }

    fn from_json(&self, v: &Value) -> Result<Vec<FqElem>, RingError> {
        let arr = v
            .as_array()
            .ok_or_else(|| RingError::Decode(format!("expected a coefficient array, got {v}")))?;
        if arr.len() > self.n() {
            return Err(RingError::Decode(format!("{} coefficients for N={}", arr.len(), self.n())));
        }
        let mut out = self.zero();
        for (slot, c) in out.iter_mut().zip(arr) {
            let c = c
                .as_u64()
                .filter(|&c| c < self.desc.q)
                .ok_or_else(|| RingError::Decode(format!("bad F_q code {c}")))?;
            *slot = FqElem(c as u16);
        }
        Ok(out)
    }

    fn additive_generators(&self) -> Vec<Vec<FqElem>> {
        let basis = self.field.additive_basis();
        (0..self.desc.truncation)
            .flat_map(|k| basis.iter().map(move |&b| (b, k)))
            .map(|(b, k)| self.monomial(b, k))
            .collect()
    }

    fn residue(&self, a: &Vec<FqElem>) -> FqElem {
        a[0]
    }

    fn from_residue(&self, c: FqElem) -> Vec<FqElem> {
        self.monomial(c, 0)
    }
}
