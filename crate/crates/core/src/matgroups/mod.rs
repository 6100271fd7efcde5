//! The classical groups `SL_d`, `SO_d` (identity form) and `Sp_d` (form `[[0, I], [-I, 0]]`)
//! over `R/M^N`, filtered by the congruence subgroups `K_n = G ∩ (I + P^n M_d(R))`.

pub mod matrix;

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{Family, FilteredGroup, GroupDescriptor};
use crate::liealg::{self, AlgebraKind};
use crate::rings::{FqElem, TruncatedRing};

#[derive(Clone, Debug)]
pub struct MatrixGroup<R: TruncatedRing> {
    family: Family,
    d: usize,
    ring: R,
}

impl<R: TruncatedRing> MatrixGroup<R> {
    pub fn new(family: Family, d: usize, ring: R) -> Result<Self> {
        if !matches!(family, Family::SL | Family::SO | Family::Sp) {
            return Err(Error::InvalidGroup(format!("{} is not a matrix family", family.name())));
        }
        GroupDescriptor::new(family, Some(d as u32), *ring.descriptor())?;
        Ok(MatrixGroup { family, d, ring })
    }

    pub fn sl(d: usize, ring: R) -> Result<Self> {
        Self::new(Family::SL, d, ring)
    }

    pub fn so(d: usize, ring: R) -> Result<Self> {
        Self::new(Family::SO, d, ring)
    }

    pub fn sp(d: usize, ring: R) -> Result<Self> {
        Self::new(Family::Sp, d, ring)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn algebra_kind(&self) -> AlgebraKind {
        match self.family {
            Family::SL => AlgebraKind::Sl,
            Family::SO => AlgebraKind::So,
            _ => AlgebraKind::Sp,
        }
    }

    /// Dimension of the Lie algebra, i.e. of each `K_n/K_{n+1}` over `F_q`.
    pub fn dimension(&self) -> usize {
        let d = self.d;
        match self.family {
            Family::SL => d * d - 1,
            Family::SO => d * (d - 1) / 2,
            _ => (d / 2) * (d + 1),
        }
    }

    /// `[[0, I], [-I, 0]]`.
    pub fn omega(&self) -> Vec<R::Elem> {
        let (d, g) = (self.d, self.d / 2);
        let r = &self.ring;
        let mut m = vec![r.zero(); d * d];
        for i in 0..g {
            m[i * d + g + i] = r.one();
            m[(g + i) * d + i] = r.neg(&r.one());
        }
        m
    }

    /// Element from integer entries (row-major), checked against the defining relations.
    pub fn from_i64(&self, entries: &[i64]) -> Result<Vec<R::Elem>> {
        if entries.len() != self.d * self.d {
            return Err(Error::Decode(format!("expected {} entries", self.d * self.d)));
        }
        let m: Vec<R::Elem> = entries.iter().map(|&x| self.ring.from_i64(x)).collect();
        if !self.is_member(&m) {
            return Err(Error::Decode(format!("matrix is not in {}", self.descriptor())));
        }
        Ok(m)
    }

    /// `I + x E_{ij}`-style root element built from an arbitrary matrix `x M`.
    fn plus_identity(&self, m: Vec<R::Elem>) -> Vec<R::Elem> {
        matrix::add(&self.ring, &matrix::identity(&self.ring, self.d), &m)
    }

    /// Cayley transform `(I - S)(I + S)^-1` of a skew matrix `S`, if `I + S` is invertible.
    pub fn cayley(&self, s: &[R::Elem]) -> Option<Vec<R::Elem>> {
        let (d, r) = (self.d, &self.ring);
        let id = matrix::identity(r, d);
        let inv = matrix::inverse(r, d, &matrix::add(r, &id, s))?;
        Some(matrix::mul(r, d, &matrix::sub(r, &id, s), &inv))
    }

    fn residue_lifts(&self) -> Vec<R::Elem> {
        let q = self.ring.descriptor().q as u16;
        (1..q).map(|c| self.ring.from_residue(FqElem(c))).collect()
    }
}

fn field_group_order(family: Family, d: u64, q: u128) -> Option<u128> {
    let pw = |e: u64| q.checked_pow(e as u32);
    let mut acc: u128 = 1;
    let mut times = |x: Option<u128>| -> Option<()> {
        acc = acc.checked_mul(x?)?;
        Some(())
    };
    match family {
        Family::SL => {
            times(pw(d * (d - 1) / 2))?;
            for i in 2..=d {
                times(pw(i).map(|x| x - 1))?;
            }
        }
        Family::Sp => {
            let g = d / 2;
            times(pw(g * g))?;
            for i in 1..=g {
                times(pw(2 * i).map(|x| x - 1))?;
            }
        }
        Family::SO if d % 2 == 1 => {
            let l = d / 2;
            times(pw(l * l))?;
            for i in 1..=l {
                times(pw(2 * i).map(|x| x - 1))?;
            }
        }
        Family::SO => {
            // The identity form in dimension 2l is split iff (-1)^l is a square.
            let l = d / 2;
            let minus_one_square = q % 4 == 1;
            let split = minus_one_square || l % 2 == 0;
            times(pw(l * (l - 1)))?;
            times(pw(l).map(|x| if split { x - 1 } else { x + 1 }))?;
            for i in 1..l {
                times(pw(2 * i).map(|x| x - 1))?;
            }
        }
        _ => return None,
    }
    Some(acc)
}

impl<R: TruncatedRing> FilteredGroup for MatrixGroup<R> {
    type Elem = Vec<R::Elem>;

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor { family: self.family, d: Some(self.d as u32), ring: *self.ring.descriptor() }
    }

    fn truncated(&self, m: u32) -> Self {
        MatrixGroup { family: self.family, d: self.d, ring: self.ring.truncated(m) }
    }

    fn identity(&self) -> Vec<R::Elem> {
        matrix::identity(&self.ring, self.d)
    }

    fn mul(&self, a: &Vec<R::Elem>, b: &Vec<R::Elem>) -> Vec<R::Elem> {
        matrix::mul(&self.ring, self.d, a, b)
    }

    fn inv(&self, a: &Vec<R::Elem>) -> Vec<R::Elem> {
        let (d, r) = (self.d, &self.ring);
        match self.family {
            Family::SO => matrix::transpose(d, a),
            Family::Sp => {
                // [[A, B], [C, D]]^-1 = [[D^T, -B^T], [-C^T, A^T]].
                let g = d / 2;
                let mut out = vec![r.zero(); d * d];
                for i in 0..g {
                    for j in 0..g {
                        out[i * d + j] = a[(g + j) * d + g + i].clone();
                        out[i * d + g + j] = r.neg(&a[j * d + g + i]);
                        out[(g + i) * d + j] = r.neg(&a[(g + j) * d + i]);
                        out[(g + i) * d + g + j] = a[j * d + i].clone();
                    }
                }
                out
            }
            _ => matrix::inverse(r, d, a).expect("group elements are invertible"),
        }
    }

    fn depth(&self, a: &Vec<R::Elem>) -> u32 {
        let (d, r) = (self.d, &self.ring);
        let mut v = r.truncation();
        for (k, x) in a.iter().enumerate() {
            let e = if k % (d + 1) == 0 { r.sub(x, &r.one()) } else { x.clone() };
            v = v.min(r.valuation(&e));
            if v == 0 {
                break;
            }
        }
        v
    }

    fn project(&self, a: &Vec<R::Elem>, m: u32) -> Vec<R::Elem> {
        a.iter().map(|x| self.ring.project(x, m)).collect()
    }

    fn coset_key(&self, a: &Vec<R::Elem>, level: u32) -> Vec<u8> {
        let mut out = Vec::new();
        for x in a {
            self.ring.encode_key(x, level, &mut out);
        }
        out
    }

    fn random_element<Rn: Rng + ?Sized>(&self, rng: &mut Rn) -> Vec<R::Elem> {
        let (d, r) = (self.d, &self.ring);
        match self.family {
            Family::SL => loop {
                let mut m: Vec<R::Elem> = (0..d * d).map(|_| r.random(rng)).collect();
                if let Some(det) = matrix::unit_determinant(r, d, &m) {
                    let s = r.inv(&det).expect("unit");
                    for k in 0..d {
                        m[k] = r.mul(&s, &m[k]);
                    }
                    return m;
                }
            },
            _ => {
                let gens = self.standard_generators();
                let mut g = self.identity();
                for _ in 0..(60 + 6 * gens.len()) {
                    let k = rng.gen_range(0..=2 * gens.len());
                    if k < gens.len() {
                        g = self.mul(&g, &gens[k]);
                    } else if k < 2 * gens.len() {
                        g = self.mul(&g, &self.inv(&gens[k - gens.len()]));
                    }
                }
                if r.truncation() > 1 {
                    g = self.mul(&g, &self.random_in_filtration(1, rng));
                }
                g
            }
        }
    }

    fn random_in_filtration<Rn: Rng + ?Sized>(&self, level: u32, rng: &mut Rn) -> Vec<R::Elem> {
        if level == 0 {
            return self.random_element(rng);
        }
        let dim = self.dimension();
        let mut g = self.identity();
        for j in level..self.ring.truncation() {
            let coords: Vec<R::Elem> = (0..dim).map(|_| self.ring.random(rng)).collect();
            g = self.mul(&g, &liealg::lift_coords(self.algebra_kind(), self.d, &self.ring, &coords, j));
        }
        g
    }

    fn quotient_order(&self, level: u32) -> Option<u128> {
        if level == 0 {
            return Some(1);
        }
        let q = self.ring.descriptor().q as u128;
        let base = field_group_order(self.family, self.d as u64, q)?;
        let k = q.checked_pow((level - 1).checked_mul(self.dimension() as u32)?)?;
        base.checked_mul(k)
    }

    fn standard_generators(&self) -> Vec<Vec<R::Elem>> {
        let (d, r) = (self.d, &self.ring);
        let xs = r.additive_generators();
        let mut out = Vec::new();
        match self.family {
            Family::SL => {
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            for x in &xs {
                                out.push(self.plus_identity(matrix::scale(r, x, &matrix::unit(r, d, i, j))));
                            }
                        }
                    }
                }
            }
            Family::Sp => {
                let g = d / 2;
                for x in &xs {
                    for i in 0..g {
                        for j in i..g {
                            let mut b = vec![r.zero(); d * d];
                            let mut c = vec![r.zero(); d * d];
                            b[i * d + g + j] = r.add(&b[i * d + g + j], x);
                            b[j * d + g + i] = r.add(&b[j * d + g + i], x);
                            c[(g + i) * d + j] = r.add(&c[(g + i) * d + j], x);
                            c[(g + j) * d + i] = r.add(&c[(g + j) * d + i], x);
                            out.push(self.plus_identity(b));
                            out.push(self.plus_identity(c));
                        }
                        for j in 0..g {
                            if i != j {
                                let mut a = vec![r.zero(); d * d];
                                a[i * d + j] = x.clone();
                                a[(g + j) * d + g + i] = r.neg(x);
                                out.push(self.plus_identity(a));
                            }
                        }
                    }
                }
            }
            _ => {
                let x = |i: usize, j: usize| matrix::sub(r, &matrix::unit(r, d, i, j), &matrix::unit(r, d, j, i));
                let mut skews = Vec::new();
                for i in 0..d {
                    for j in i + 1..d {
                        skews.push(x(i, j));
                    }
                }
                for i in 0..d.saturating_sub(2) {
                    skews.push(matrix::add(r, &x(i, i + 1), &x(i + 1, i + 2)));
                }
                if d >= 4 {
                    skews.push((1..d - 1).fold(x(0, 1), |acc, i| matrix::add(r, &acc, &x(i, i + 1))));
                }
                let p_pow = r.uniformizer_pow(1);
                let mut params = self.residue_lifts();
                params.extend(xs.iter().map(|x| r.mul(x, &p_pow)).filter(|s| !r.is_zero(s)));
                let id = self.identity();
                for sk in &skews {
                    for s in &params {
                        if let Some(m) = self.cayley(&matrix::scale(r, s, sk)) {
                            if m != id && !out.contains(&m) {
                                out.push(m);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn is_member(&self, a: &Vec<R::Elem>) -> bool {
        let (d, r) = (self.d, &self.ring);
        if a.len() != d * d {
            return false;
        }
        let id = self.identity();
        match self.family {
            Family::SL => matrix::determinant(r, d, a) == r.one(),
            Family::SO => {
                matrix::mul(r, d, &matrix::transpose(d, a), a) == id
                    && matrix::determinant(r, d, a) == r.one()
            }
            _ => {
                let om = self.omega();
                matrix::mul(r, d, &matrix::mul(r, d, &matrix::transpose(d, a), &om), a) == om
            }
        }
    }

    fn element_to_json(&self, a: &Vec<R::Elem>) -> Value {
        let d = self.d;
        Value::Array(
            (0..d)
                .map(|i| Value::Array(a[i * d..(i + 1) * d].iter().map(|x| self.ring.to_json(x)).collect()))
                .collect(),
        )
    }

    fn element_from_json(&self, v: &Value) -> Result<Vec<R::Elem>> {
        let rows = v.as_array().ok_or_else(|| Error::Decode("expected an array of rows".into()))?;
        if rows.len() != self.d {
            return Err(Error::Decode(format!("expected {} rows", self.d)));
        }
        let mut m = Vec::with_capacity(self.d * self.d);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == self.d);
            let row = row.ok_or_else(|| Error::Decode(format!("expected rows of length {}", self.d)))?;
            for x in row {
                m.push(self.ring.from_json(x)?);
            }
        }
        if !self.is_member(&m) {
            return Err(Error::Decode(format!("matrix is not in {}", self.descriptor())));
        }
        Ok(m)
    }
}
