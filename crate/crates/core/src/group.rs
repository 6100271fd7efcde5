//! Groups with a congruence filtration `G = K_0 > K_1 > ... > K_N = 1`, realized as the finite
//! quotient `G/K_N`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rand::Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rings::{RingDescriptor, RingKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    SL,
    SO,
    Sp,
    Nottingham,
    /// The additive group of the ring, filtered by powers of the maximal ideal.
    Additive,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SL => "SL",
            Family::SO => "SO",
            Family::Sp => "Sp",
            Family::Nottingham => "Nottingham",
            Family::Additive => "Additive",
        }
    }
}

/// Family, matrix size and ring. Serializes as `SL:d=2,Zp:p=3,N=6` or
/// `Nottingham,Fq[[t]]:q=5,N=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    pub family: Family,
    pub d: Option<u32>,
    pub ring: RingDescriptor,
}

impl GroupDescriptor {
    pub fn new(family: Family, d: Option<u32>, ring: RingDescriptor) -> Result<Self> {
        let desc = GroupDescriptor { family, d, ring };
        desc.validate()?;
        Ok(desc)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGroup(format!("{self}: {msg}")));
        let p = self.ring.p;
        match (self.family, self.d) {
            (Family::Nottingham | Family::Additive, Some(_)) => bad("takes no matrix size".into()),
            (Family::SL | Family::SO | Family::Sp, None) => bad("matrix size d is required".into()),
            (Family::SL, Some(d)) if d < 2 => bad("d must be at least 2".into()),
            (Family::SL, Some(2)) if p == 2 => bad("SL_2 requires p >= 3".into()),
            (Family::SO, Some(d)) if d < 2 => bad("d must be at least 2".into()),
            (Family::Sp, Some(d)) if d < 2 || d % 2 == 1 => bad("Sp requires even d".into()),
            (Family::SO | Family::Sp, _) if p == 2 => bad("requires p >= 3".into()),
            (Family::Nottingham, None) if self.ring.kind != RingKind::FqPowerSeries => {
                bad("the Nottingham group is defined over F_q[[t]]".into())
            }
            (Family::Nottingham, None) if p == 2 => bad("requires p >= 3".into()),
            (Family::Nottingham, None) if self.ring.truncation < 2 => bad("requires N >= 2".into()),
            _ => Ok(()),
        }
    }

    pub fn with_truncation(&self, truncation: u32) -> Self {
        GroupDescriptor { ring: self.ring.with_truncation(truncation), ..*self }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.d {
            Some(d) => write!(f, "{}:d={},{}", self.family.name(), d, self.ring),
            None => write!(f, "{},{}", self.family.name(), self.ring),
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGroup(s.to_string());
        let s = s.trim();
        let family_of = |name: &str| match name {
            "SL" => Some(Family::SL),
            "SO" => Some(Family::SO),
            "Sp" => Some(Family::Sp),
            "Nottingham" => Some(Family::Nottingham),
            "Additive" => Some(Family::Additive),
            _ => None,
        };
        let (head, rest) = s.split_once(',').ok_or_else(bad)?;
        if let Some((name, d)) = head.split_once(':') {
            let family = family_of(name).ok_or_else(bad)?;
            let d: u32 = d.strip_prefix("d=").ok_or_else(bad)?.parse().map_err(|_| bad())?;
            GroupDescriptor::new(family, Some(d), rest.parse()?)
        } else {
            let family = family_of(head).ok_or_else(bad)?;
            GroupDescriptor::new(family, None, rest.parse()?)
        }
    }
}

/// A finite quotient `G/K_N` of a filtered group together with its filtration.
///
/// Elements are canonical payloads, so `==` and hashing are equality in `G/K_N`. The depth of
/// an element is the largest `n <= N` with `g` in `K_n`; the identity has depth `N`.
pub trait FilteredGroup: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + Eq + Hash + fmt::Debug + Send + Sync;

    fn descriptor(&self) -> GroupDescriptor;

    fn truncation(&self) -> u32 {
        self.descriptor().ring.truncation
    }

    /// The quotient `G/K_m`, `1 <= m <= N`.
    fn truncated(&self, m: u32) -> Self;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn depth(&self, a: &Self::Elem) -> u32;

    /// Image in `self.truncated(m)`.
    fn project(&self, a: &Self::Elem, m: u32) -> Self::Elem;

    /// Byte key identifying the coset `a K_level`.
    fn coset_key(&self, a: &Self::Elem, level: u32) -> Vec<u8>;

    fn random_element<Rn: Rng + ?Sized>(&self, rng: &mut Rn) -> Self::Elem;

    /// A uniformly distributed element of `K_level`.
    fn random_in_filtration<Rn: Rng + ?Sized>(&self, level: u32, rng: &mut Rn) -> Self::Elem;

    /// `|G/K_level|`, if it fits.
    fn quotient_order(&self, level: u32) -> Option<u128>;

    /// A generating set of `G/K_N`.
    fn standard_generators(&self) -> Vec<Self::Elem>;

    /// Whether the payload satisfies the defining relations of the family.
    fn is_member(&self, a: &Self::Elem) -> bool;

    fn element_to_json(&self, a: &Self::Elem) -> Value;
    fn element_from_json(&self, v: &Value) -> Result<Self::Elem>;

    fn is_identity(&self, a: &Self::Elem) -> bool {
        *a == self.identity()
    }

    /// `a^-1 b^-1 a b`.
    fn commutator(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        self.mul(&self.inv(&ba), &ab)
    }

    fn pow(&self, a: &Self::Elem, e: i64) -> Self::Elem {
        let base = if e < 0 { self.inv(a) } else { a.clone() };
        let mut acc = self.identity();
        for _ in 0..e.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    /// Product `s_{i_1}^{e_1} s_{i_2}^{e_2} ...` where `gens[i]` is `(s_i, s_i^-1)`.
    fn evaluate_indexed(&self, gens: &[(Self::Elem, Self::Elem)], letters: &[(u32, i8)]) -> Self::Elem {
        letters.iter().fold(self.identity(), |acc, &(i, e)| {
            let (s, si) = &gens[i as usize];
            self.mul(&acc, if e > 0 { s } else { si })
        })
    }
}

/// Writes an element of `K_{n+m}` as a product of commutators `[g_i, h_i]` with `g_i` in
/// `K_n` and `h_i` in `K_m`, up to `K_{2n+m}`.
pub trait CommutatorOracle<G: FilteredGroup>: Send + Sync {
    /// Upper bound `A` on the number of commutators returned.
    fn arity(&self) -> usize;

    /// Whether `(n, m)` is a level pair the construction supports.
    fn admissible(&self, n: u32, m: u32) -> bool;

    /// Pairs `(g_i, h_i)` with `[g_1, h_1] ... [g_k, h_k] r^-1` in `K_{min(2n+m, N)}`.
    fn decompose(&self, r: &G::Elem, n: u32, m: u32) -> Result<Vec<(G::Elem, G::Elem)>>;
}

/// A group element carrying its group and cached depth, for the checked API.
#[derive(Clone, Debug)]
pub struct FilteredElement<G: FilteredGroup> {
    group: G,
    elem: G::Elem,
    depth: u32,
}

impl<G: FilteredGroup> PartialEq for FilteredElement<G> {
    fn eq(&self, other: &Self) -> bool {
        self.group.descriptor() == other.group.descriptor() && self.elem == other.elem
    }
}

impl<G: FilteredGroup> FilteredElement<G> {
    pub fn new(group: &G, elem: G::Elem) -> Self {
        let depth = group.depth(&elem);
        FilteredElement { group: group.clone(), elem, depth }
    }

    pub fn identity(group: &G) -> Self {
        Self::new(group, group.identity())
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn elem(&self) -> &G::Elem {
        &self.elem
    }

    pub fn into_elem(self) -> G::Elem {
        self.elem
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        self.group.descriptor()
    }

    fn check(&self, other: &Self) -> Result<()> {
        let (a, b) = (self.group.descriptor(), other.group.descriptor());
        if a != b {
            return Err(Error::DescriptorMismatch(a.to_string(), b.to_string()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(&self.group, self.group.mul(&self.elem, &other.elem)))
    }

    pub fn inv(&self) -> Self {
        Self::new(&self.group, self.group.inv(&self.elem))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::new(&self.group, self.group.commutator(&self.elem, &other.elem)))
    }

    pub fn project(&self, m: u32) -> Result<Self> {
        let n = self.group.truncation();
        if m > n || m == 0 {
            return Err(Error::LevelTooLarge { level: m, truncation: n });
        }
        let g = self.group.truncated(m);
        Ok(Self::new(&g, self.group.project(&self.elem, m)))
    }

    pub fn to_json(&self) -> Value {
        self.group.element_to_json(&self.elem)
    }
}

/// Default cap on the number of elements any enumeration may visit.
pub const DEFAULT_ELEMENT_BUDGET: u128 = 10_000_000;

/// Coset representatives of `G/K_n`, each exactly once, in breadth-first order from the
/// identity over the standard generators.
///
/// For `n >= 1` the representatives are elements of `group.truncated(n)`; for `n = 0` the
/// result is the identity of `group`.
pub fn enumerate_quotient<G: FilteredGroup>(group: &G, n: u32, budget: u128) -> Result<Vec<G::Elem>> {
    if n == 0 {
        return Ok(vec![group.identity()]);
    }
    let truncation = group.truncation();
    if n > truncation {
        return Err(Error::LevelTooLarge { level: n, truncation });
    }
    let order = group.quotient_order(n);
    match order {
        Some(o) if o <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "|G/K_{n}| = {} exceeds the element budget {budget}",
                order.map_or("overflow".to_string(), |o| o.to_string())
            )))
        }
    }
    let order = order.unwrap();
    let g = group.truncated(n);
    let gens = g.standard_generators();
    let elems = closure(&g, &gens, budget)?;
    if elems.len() as u128 != order {
        return Err(Error::NotGenerating { reached: elems.len() as u128, order });
    }
    Ok(elems)
}

/// All elements of the subgroup generated by `gens`, breadth-first from the identity using
/// right multiplication by `gens` and their inverses.
pub fn closure<G: FilteredGroup>(group: &G, gens: &[G::Elem], budget: u128) -> Result<Vec<G::Elem>> {
    let mut steps: Vec<G::Elem> = Vec::with_capacity(2 * gens.len());
    for s in gens {
        steps.push(s.clone());
        steps.push(group.inv(s));
    }
    let mut seen: HashMap<G::Elem, ()> = HashMap::new();
    let mut elems = vec![group.identity()];
    seen.insert(group.identity(), ());
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head].clone();
        head += 1;
        for s in &steps {
            let y = group.mul(&x, s);
            if !seen.contains_key(&y) {
                if elems.len() as u128 >= budget {
                    return Err(Error::BudgetExceeded(format!("closure exceeds {budget} elements")));
                }
                seen.insert(y.clone(), ());
                elems.push(y);
            }
        }
    }
    Ok(elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_strings() {
        for s in [
            "SL:d=2,Zp:p=3,N=6",
            "SO:d=3,Zp:p=5,N=4",
            "Sp:d=4,Zp:p=5,N=9",
            "Nottingham,Fq[[t]]:q=5,N=6",
            "Additive,Zp:p=5,N=1",
        ] {
            let d: GroupDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
    }

    #[test]
    fn descriptor_exclusions() {
        for s in [
            "SL:d=2,Zp:p=2,N=3",
            "SO:d=3,Zp:p=2,N=3",
            "Sp:d=3,Zp:p=3,N=3",
            "Nottingham,Zp:p=5,N=6",
            "Nottingham,Fq[[t]]:q=4,N=6",
            "GL:d=2,Zp:p=3,N=2",
        ] {
            assert!(s.parse::<GroupDescriptor>().is_err(), "{s}");
        }
        assert!("SL:d=3,Zp:p=2,N=3".parse::<GroupDescriptor>().is_ok());
    }
}
