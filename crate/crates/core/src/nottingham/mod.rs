//! The Nottingham group `N_q` of normalized series `t + sum_{k>=2} l_k t^k` over `F_q` under
//! substitution, truncated at `K_N`.
//!
//! Products follow `f . g = g(f(t))`. An element of `N_q/K_N` is stored as its coefficients
//! `[l_2, ..., l_N]`; `K_n` consists of the series with `l_2 = ... = l_n = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{CommutatorOracle, Family, FilteredGroup, GroupDescriptor};
use crate::rings::{FqElem, FqField, RingDescriptor};

#[derive(Clone)]
pub struct Nottingham {
    desc: RingDescriptor,
    field: Arc<FqField>,
}

impl fmt::Debug for Nottingham {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nottingham({})", self.desc)
    }
}

const ZERO: FqElem = FqElem(0);
const ONE: FqElem = FqElem(1);

impl Nottingham {
    pub fn new(q: u64, truncation: u32) -> Result<Self> {
        let desc = RingDescriptor::power_series(q, truncation)?;
        GroupDescriptor::new(Family::Nottingham, None, desc)?;
        Ok(Nottingham { desc, field: FqField::get(q)? })
    }

    pub fn q(&self) -> u64 {
        self.desc.q
    }

    pub fn p(&self) -> u64 {
        self.desc.p
    }

    pub fn field(&self) -> &FqField {
        &self.field
    }

    fn n(&self) -> usize {
        self.desc.truncation as usize
    }

    /// Full coefficient vector `c_0..c_N` of an element.
    fn series(&self, a: &[FqElem]) -> Vec<FqElem> {
        let mut s = Vec::with_capacity(self.n() + 1);
        s.push(ZERO);
        s.push(ONE);
        s.extend_from_slice(a);
        s
    }

    fn element(&self, s: &[FqElem]) -> Vec<FqElem> {
        s[2..=self.n()].to_vec()
    }

    /// `s^1, ..., s^N` as full coefficient vectors, where `s` has zero constant term.
    fn powers(&self, s: &[FqElem]) -> Vec<Vec<FqElem>> {
        let n = self.n();
        let f = &self.field;
        let mut out = Vec::with_capacity(n);
        out.push(s.to_vec());
        for j in 2..=n {
            let prev = &out[j - 2];
            let mut next = vec![ZERO; n + 1];
            // prev starts at t^{j-1}, s at t^1.
            for (i, &a) in prev.iter().enumerate().skip(j - 1) {
                if a == ZERO {
                    continue;
                }
                for (k, &b) in s.iter().enumerate().take(n + 1 - i).skip(1) {
                    if b != ZERO {
                        next[i + k] = f.add(next[i + k], f.mul(a, b));
                    }
                }
            }
            out.push(next);
        }
        out
    }

    /// `sum_j v_j P_j` for a power table `P` of some series.
    fn substitute(&self, v: &[FqElem], pows: &[Vec<FqElem>]) -> Vec<FqElem> {
        let f = &self.field;
        let n = self.n();
        let mut out = vec![ZERO; n + 1];
        for (j, &c) in v.iter().enumerate().skip(1) {
            if c == ZERO {
                continue;
            }
            for (k, &x) in pows[j - 1].iter().enumerate().skip(j) {
                if x != ZERO {
                    out[k] = f.add(out[k], f.mul(c, x));
                }
            }
        }
        out
    }

    /// `g(f(t))` truncated beyond `t^N`.
    pub fn compose(&self, f: &[FqElem], g: &[FqElem]) -> Vec<FqElem> {
        let pows = self.powers(&self.series(f));
        self.element(&self.substitute(&self.series(g), &pows))
    }

    /// `e_{n, lambda} = t + lambda t^{n+1}`, `1 <= n <= N - 1`.
    pub fn generator(&self, n: u32, lambda: FqElem) -> Result<Vec<FqElem>> {
        if n == 0 || n as usize >= self.n() {
            return Err(Error::IndexOutOfRange(format!("e_{{{n},*}} needs 1 <= n <= {}", self.n() - 1)));
        }
        if lambda.0 as u64 >= self.q() {
            return Err(Error::IndexOutOfRange(format!("{} is not an element of F_{}", lambda.0, self.q())));
        }
        let mut a = vec![ZERO; self.n() - 1];
        a[n as usize - 1] = lambda;
        Ok(a)
    }

    /// `(l_1, ..., l_{N-1})` with `f = e_{1,l_1} e_{2,l_2} ... e_{N-1,l_{N-1}}`.
    pub fn canonical_coordinates(&self, f: &[FqElem]) -> Vec<FqElem> {
        let mut r = f.to_vec();
        let mut out = Vec::with_capacity(self.n() - 1);
        for k in 1..self.n() {
            let c = r[k - 1];
            out.push(c);
            if c != ZERO {
                let e = self.generator(k as u32, c).expect("in range");
                r = self.mul(&self.inv(&e), &r);
            }
        }
        out
    }

    /// Product `e_{1,l_1} e_{2,l_2} ...`.
    pub fn from_canonical_coordinates(&self, coords: &[FqElem]) -> Result<Vec<FqElem>> {
        let mut g = self.identity();
        for (k, &c) in coords.iter().enumerate() {
            if c != ZERO {
                g = self.mul(&g, &self.generator(k as u32 + 1, c)?);
            }
        }
        Ok(g)
    }

    /// Coefficient of `t^k`, `2 <= k <= N`.
    pub fn coefficient(&self, f: &[FqElem], k: u32) -> FqElem {
        f[k as usize - 2]
    }

    /// Parses `t+2t^3+t^7`, `t + 3*t^2`; coefficients are residue codes in `F_q`.
    pub fn parse(&self, s: &str) -> Result<Vec<FqElem>> {
        let bad = |why: &str| Error::Decode(format!("{s:?}: {why}"));
        let mut a = vec![ZERO; self.n() - 1];
        let mut linear = false;
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        for term in compact.split('+') {
            let (coef, pow) = match term.find('t') {
                Some(i) => {
                    let c = term[..i].trim_end_matches('*');
                    let rest = &term[i + 1..];
                    let k = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^').ok_or_else(|| bad("expected t^k"))?.parse().map_err(|_| bad("bad exponent"))?
                    };
                    let c = if c.is_empty() { 1 } else { c.parse::<u64>().map_err(|_| bad("bad coefficient"))? };
                    (c, k)
                }
                None => return Err(bad("constant terms are not allowed")),
            };
            if coef >= self.q() {
                return Err(bad("coefficient outside F_q"));
            }
            match pow {
                0 => return Err(bad("constant terms are not allowed")),
                1 if coef == 1 && !linear => linear = true,
                1 => return Err(bad("the linear coefficient must be 1")),
                k if k as usize <= self.n() => {
                    let slot = &mut a[k as usize - 2];
                    *slot = self.field.add(*slot, FqElem(coef as u16));
                }
                _ => {}
            }
        }
        if !linear {
            return Err(bad("missing the linear term t"));
        }
        Ok(a)
    }

    pub fn format(&self, f: &[FqElem]) -> String {
        let mut s = String::from("t");
        for (i, c) in f.iter().enumerate() {
            match c.0 {
                0 => {}
                1 => s.push_str(&format!("+t^{}", i + 2)),
                v => s.push_str(&format!("+{v}t^{}", i + 2)),
            }
        }
        s
    }

    /// Right-to-left evaluation using power tables of the letters: `O(N^2)` per letter.
    fn evaluate_letters(&self, gens: &[(Vec<FqElem>, Vec<FqElem>)], letters: &[(u32, i8)]) -> Vec<FqElem> {
        let mut tables: Vec<[Option<Vec<Vec<FqElem>>>; 2]> = vec![[None, None]; gens.len()];
        let mut v = self.series(&self.identity());
        for &(i, e) in letters.iter().rev() {
            let side = usize::from(e < 0);
            let slot = &mut tables[i as usize][side];
            if slot.is_none() {
                let s = if e > 0 { &gens[i as usize].0 } else { &gens[i as usize].1 };
                *slot = Some(self.powers(&self.series(s)));
            }
            v = self.substitute(&v, slot.as_ref().unwrap());
        }
        self.element(&v)
    }
}

impl FilteredGroup for Nottingham {
    type Elem = Vec<FqElem>;

    fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor { family: Family::Nottingham, d: None, ring: self.desc }
    }

    fn truncated(&self, m: u32) -> Self {
        assert!(m >= 1 && m <= self.desc.truncation, "truncation {m} out of range");
        Nottingham { desc: self.desc.with_truncation(m), field: self.field.clone() }
    }

    fn identity(&self) -> Vec<FqElem> {
        vec![ZERO; self.n() - 1]
    }

    fn mul(&self, a: &Vec<FqElem>, b: &Vec<FqElem>) -> Vec<FqElem> {
        self.compose(a, b)
    }

    fn inv(&self, a: &Vec<FqElem>) -> Vec<FqElem> {
        let n = self.n();
        let f = &self.field;
        let pows = self.powers(&self.series(a));
        // h(f(t)) = t: mu_k = -([t^k] f + sum_{j<k} mu_j [t^k] f^j).
        let mut mu = vec![ZERO; n + 1];
        mu[1] = ONE;
        for k in 2..=n {
            let mut acc = ZERO;
            for j in 1..k {
                if mu[j] != ZERO {
                    acc = f.add(acc, f.mul(mu[j], pows[j - 1][k]));
                }
            }
            mu[k] = f.neg(acc);
        }
        self.element(&mu)
    }

    fn depth(&self, a: &Vec<FqElem>) -> u32 {
        a.iter().position(|&c| c != ZERO).map_or(self.desc.truncation, |i| i as u32 + 1)
    }

    fn project(&self, a: &Vec<FqElem>, m: u32) -> Vec<FqElem> {
        a[..(m as usize).saturating_sub(1)].to_vec()
    }

    fn coset_key(&self, a: &Vec<FqElem>, level: u32) -> Vec<u8> {
        a[..(level as usize).saturating_sub(1)].iter().flat_map(|c| c.0.to_le_bytes()).collect()
    }

    fn random_element<Rn: Rng + ?Sized>(&self, rng: &mut Rn) -> Vec<FqElem> {
        self.random_in_filtration(1, rng)
    }

    fn random_in_filtration<Rn: Rng + ?Sized>(&self, level: u32, rng: &mut Rn) -> Vec<FqElem> {
        let q = self.q();
        (0..self.n() - 1)
            .map(|i| if (i as u32) + 1 < level { ZERO } else { FqElem(rng.gen_range(0..q) as u16) })
            .collect()
    }

    fn quotient_order(&self, level: u32) -> Option<u128> {
        (self.q() as u128).checked_pow(level.saturating_sub(1))
    }

    fn standard_generators(&self) -> Vec<Vec<FqElem>> {
        let mut out = Vec::new();
        for n in 1..=2u32.min(self.desc.truncation - 1) {
            for b in self.field.additive_basis() {
                out.push(self.generator(n, b).expect("in range"));
            }
        }
        out
    }

    fn is_member(&self, a: &Vec<FqElem>) -> bool {
        a.len() == self.n() - 1 && a.iter().all(|c| (c.0 as u64) < self.q())
    }

    fn element_to_json(&self, a: &Vec<FqElem>) -> Value {
        Value::from(a.iter().map(|c| c.0).collect::<Vec<_>>())
    }

    fn element_from_json(&self, v: &Value) -> Result<Vec<FqElem>> {
        if let Some(s) = v.as_str() {
            return self.parse(s);
        }
        let arr = v.as_array().ok_or_else(|| Error::Decode("expected a coefficient array".into()))?;
        if arr.len() > self.n() - 1 {
            return Err(Error::Decode(format!("{} coefficients for N={}", arr.len(), self.n())));
        }
        let mut a = self.identity();
        for (slot, c) in a.iter_mut().zip(arr) {
            let c = c.as_u64().filter(|&c| c < self.q()).ok_or_else(|| Error::Decode(format!("bad coefficient {c}")))?;
            *slot = FqElem(c as u16);
        }
        Ok(a)
    }

    fn evaluate_indexed(&self, gens: &[(Self::Elem, Self::Elem)], letters: &[(u32, i8)]) -> Self::Elem {
        self.evaluate_letters(gens, letters)
    }
}

impl FromStr for Nottingham {
    type Err = Error;

    /// `Nottingham,Fq[[t]]:q=5,N=6`.
    fn from_str(s: &str) -> Result<Self> {
        let d: GroupDescriptor = s.parse()?;
        if d.family != Family::Nottingham {
            return Err(Error::InvalidGroup(s.to_string()));
        }
        Nottingham::new(d.ring.q, d.ring.truncation)
    }
}

/// Two-commutator decomposition `[g_1, e_{m,1}] [g_2, e_{m+1,1}]` with
/// `g_1 = e_{n,l_1} ... e_{2n-1,l_n}` and `g_2 = e_{n,u_1} ... e_{2n-2,u_{n-1}}`.
#[derive(Clone, Debug)]
pub struct NottinghamOracle {
    group: Nottingham,
}

impl NottinghamOracle {
    pub fn new(group: &Nottingham) -> Self {
        NottinghamOracle { group: group.clone() }
    }

    fn build(&self, levels: &[u32], coefs: &[FqElem]) -> Vec<FqElem> {
        let g = &self.group;
        let mut out = g.identity();
        for (&k, &c) in levels.iter().zip(coefs) {
            if c != ZERO && (k as usize) < g.n() {
                out = g.mul(&out, &g.generator(k, c).expect("in range"));
            }
        }
        out
    }

    /// Solves the coefficients index by index against the exact residual, so the result is
    /// correct modulo `K_{min(2n+m, N)}`.
    fn solve(&self, r: &[FqElem], n: u32, m: u32) -> Result<Vec<(Vec<FqElem>, Vec<FqElem>)>> {
        let g = &self.group;
        let f = g.field.clone();
        let cap = g.desc.truncation;
        let depth = g.depth(&r.to_vec());
        if depth < n + m {
            return Err(Error::DepthViolation { depth, required: n + m });
        }
        if n + m >= cap {
            return Ok(Vec::new());
        }
        let p = g.p() as i64;
        let unit = |k: i64| k.rem_euclid(p) != 0;
        let h1 = if m < cap { g.generator(m, ONE)? } else { g.identity() };
        let h2 = if m + 1 < cap { g.generator(m + 1, ONE)? } else { g.identity() };
        let lv1: Vec<u32> = (0..n).map(|i| n + i).collect();
        let lv2: Vec<u32> = (1..n).map(|i| n + i - 1).collect();
        let mut lam = vec![ZERO; n as usize];
        let mut mu = vec![ZERO; n as usize - 1];
        let product = |lam: &[FqElem], mu: &[FqElem]| {
            let g1 = self.build(&lv1, lam);
            let g2 = self.build(&lv2, mu);
            g.mul(&g.commutator(&g1, &h1), &g.commutator(&g2, &h2))
        };
        for i in 0..n as i64 {
            let level = n + m + i as u32;
            if level >= cap {
                break;
            }
            let prod = product(&lam, &mu);
            let d = g.mul(&g.inv(&prod), &r.to_vec());
            debug_assert!(g.depth(&d) >= level);
            let c = g.coefficient(&d, level + 1);
            if c == ZERO {
                continue;
            }
            let (sl, su) = (m as i64 - n as i64 - i, m as i64 - n as i64 + 2 - i);
            if unit(sl) {
                let s = f.from_int(sl);
                lam[i as usize] = f.add(lam[i as usize], f.mul(c, f.inv(s).unwrap()));
            } else if i >= 1 && unit(su) {
                let s = f.from_int(su);
                mu[i as usize - 1] = f.add(mu[i as usize - 1], f.mul(c, f.inv(s).unwrap()));
            } else {
                return Err(Error::BadLevelPair { n, m, reason: format!("p divides m - n = {}", m - n) });
            }
        }
        let mut out = Vec::new();
        let g1 = self.build(&lv1, &lam);
        let g2 = self.build(&lv2, &mu);
        if !g.is_identity(&g1) {
            out.push((g1, h1));
        }
        if !g.is_identity(&g2) {
            out.push((g2, h2));
        }
        Ok(out)
    }
}

/// Pairs `(g_1, e_{m,1}), (g_2, e_{m+1,1})` whose commutator product is `r` modulo
/// `K_{2n+m}`; pairs with a trivial entry are omitted.
///
/// Requires `r` in `K_{n+m}`, `1 <= n <= m <= 2n`, `p` not dividing `m - n`, and `2n + m <= N`.
pub fn commutator_decompose_nott(
    group: &Nottingham,
    r: &[FqElem],
    n: u32,
    m: u32,
) -> Result<Vec<(Vec<FqElem>, Vec<FqElem>)>> {
    let oracle = NottinghamOracle::new(group);
    if !oracle.admissible(n, m) {
        return Err(Error::BadLevelPair { n, m, reason: "need 1 <= n <= m <= 2n and p not dividing m - n".into() });
    }
    let cap = group.desc.truncation;
    if 2 * n + m > cap {
        return Err(Error::TruncationTooShallow(format!("2n + m = {} exceeds N = {cap}", 2 * n + m)));
    }
    oracle.solve(r, n, m)
}

impl CommutatorOracle<Nottingham> for NottinghamOracle {
    fn arity(&self) -> usize {
        2
    }

    fn admissible(&self, n: u32, m: u32) -> bool {
        n >= 1 && n <= m && m <= 2 * n && (m - n) as u64 % self.group.p() != 0
    }

    fn decompose(&self, r: &Vec<FqElem>, n: u32, m: u32) -> Result<Vec<(Vec<FqElem>, Vec<FqElem>)>> {
        if !self.admissible(n, m) {
            return Err(Error::OracleLevelRejected { n, m });
        }
        self.solve(r, n, m)
    }
}
