//! Exact diameters, spectral gaps and mixing of Cayley graphs of finite quotients `G/K_n`.

mod walk;
mod worst;

#[cfg(test)]
mod tests;

use std::collections::{HashMap, HashSet};

use faer::{Mat, Side};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{enumerate_quotient, FilteredGroup};

pub use walk::{exact_walk_tv, suggested_walk_length, walk_statistics, Coordinates, WalkOptions, WalkPoint, WalkReport};
pub use worst::{
    extension_bound_check, worst_case_exhaustive, worst_case_sampled, ExtensionMode, ExtensionReport, TableGroup,
    WorstCase, EXHAUSTIVE_LIMIT,
};

/// Largest order handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 5000;
/// Largest order for exact rational mixing profiles.
pub const RATIONAL_LIMIT: usize = 3000;
pub const EIGEN_TOLERANCE: f64 = 1e-9;

/// The elements of `G/K_level`, numbered, with lookup by coset.
#[derive(Clone, Debug)]
pub struct IndexedGroup<G: FilteredGroup> {
    group: G,
    level: u32,
    elems: Vec<G::Elem>,
    index: HashMap<Vec<u8>, u32>,
}

impl<G: FilteredGroup> IndexedGroup<G> {
    pub fn new(group: &G, level: u32, budget: u128) -> Result<Self> {
        let elems = enumerate_quotient(group, level, budget)?;
        let group = if level == 0 { group.clone() } else { group.truncated(level) };
        let index = elems.iter().enumerate().map(|(i, x)| (group.coset_key(x, level), i as u32)).collect();
        Ok(IndexedGroup { group, level, elems, index })
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The quotient as a truncated group.
    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn element(&self, i: usize) -> &G::Elem {
        &self.elems[i]
    }

    pub fn elements(&self) -> &[G::Elem] {
        &self.elems
    }

    pub fn index_of(&self, x: &G::Elem) -> usize {
        self.index[&self.group.coset_key(x, self.level)] as usize
    }

    pub fn identity_index(&self) -> usize {
        self.index_of(&self.group.identity())
    }

    /// `x -> x s` on indices.
    pub fn right_perm(&self, s: &G::Elem) -> Vec<u32> {
        self.elems.iter().map(|x| self.index_of(&self.group.mul(x, s)) as u32).collect()
    }

    pub fn descriptor(&self) -> String {
        self.group.descriptor().to_string()
    }
}

/// A symmetric multiset of letters acting on a numbered group by right multiplication.
#[derive(Clone, Debug)]
pub struct Letters {
    /// Element index of each letter.
    pub elements: Vec<usize>,
    pub perms: Vec<Vec<u32>>,
    pub identity: usize,
}

impl Letters {
    /// `S ∪ S^-1`, with the identity adjoined if asked, as a set.
    pub fn symmetric<G: FilteredGroup>(ig: &IndexedGroup<G>, gens: &[G::Elem], adjoin_identity: bool) -> Letters {
        let g = ig.group();
        let mut seen = std::collections::BTreeMap::new();
        for s in gens {
            let s = g.project(s, ig.level());
            let si = g.inv(&s);
            seen.insert(ig.index_of(&s), s);
            seen.insert(ig.index_of(&si), si);
        }
        if adjoin_identity {
            seen.insert(ig.identity_index(), g.identity());
        }
        let (elements, perms) = seen.iter().map(|(&i, s)| (i, ig.right_perm(s))).unzip();
        Letters { elements, perms, identity: ig.identity_index() }
    }

    /// The given multiset as is; it must be closed under inverses with multiplicity.
    pub fn multiset<G: FilteredGroup>(ig: &IndexedGroup<G>, elems: &[G::Elem]) -> Result<Letters> {
        let g = ig.group();
        let mut count: HashMap<usize, i64> = HashMap::new();
        for s in elems {
            let s = g.project(s, ig.level());
            *count.entry(ig.index_of(&s)).or_default() += 1;
            *count.entry(ig.index_of(&g.inv(&s))).or_default() -= 1;
        }
        if count.values().any(|&c| c != 0) {
            return Err(Error::NotSymmetricSet);
        }
        let elements = elems.iter().map(|s| ig.index_of(&g.project(s, ig.level()))).collect();
        let perms = elems.iter().map(|s| ig.right_perm(&g.project(s, ig.level()))).collect();
        Ok(Letters { elements, perms, identity: ig.identity_index() })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn order(&self) -> usize {
        self.perms.first().map_or(1, Vec::len)
    }

    /// Distance from the identity to every element; `u32::MAX` where unreachable.
    pub fn distances(&self) -> Vec<u32> {
        let n = self.order();
        let mut dist = vec![u32::MAX; n];
        dist[self.identity] = 0;
        let mut frontier = vec![self.identity];
        let mut r = 0;
        while !frontier.is_empty() {
            r += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for p in &self.perms {
                    let y = p[x] as usize;
                    if dist[y] == u32::MAX {
                        dist[y] = r;
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// Eccentricity of the identity in the Cayley graph.
    pub fn diameter(&self) -> Result<u32> {
        let dist = self.distances();
        let reached = dist.iter().filter(|&&d| d != u32::MAX).count();
        if reached < dist.len() {
            return Err(Error::NotGenerating { reached: reached as u128, order: dist.len() as u128 });
        }
        Ok(dist.into_iter().max().unwrap_or(0))
    }
}

/// Diameter of `G/K_level` with respect to `S ∪ S^-1` by breadth-first search over cosets, without
/// numbering the quotient first.
pub fn diameter_bfs<G: FilteredGroup>(group: &G, level: u32, gens: &[G::Elem], budget: u128) -> Result<u32> {
    let order = group.quotient_order(level);
    let t = if level == 0 { group.clone() } else { group.truncated(level) };
    let mut letters: Vec<G::Elem> = gens.iter().map(|s| group.project(s, level)).collect();
    letters.extend(gens.iter().map(|s| t.inv(&group.project(s, level))));
    let mut seen = HashSet::new();
    seen.insert(t.coset_key(&t.identity(), level));
    let mut frontier = vec![t.identity()];
    let mut radius = 0;
    loop {
        let mut next = Vec::new();
        for x in &frontier {
            for s in &letters {
                let y = t.mul(x, s);
                if seen.insert(t.coset_key(&y, level)) {
                    if seen.len() as u128 > budget {
                        return Err(Error::BudgetExceeded(format!("more than {budget} cosets")));
                    }
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        radius += 1;
        frontier = next;
    }
    let reached = seen.len() as u128;
    match order {
        Some(o) if reached < o => Err(Error::NotGenerating { reached, order: o }),
        _ => Ok(radius),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMethod {
    Dense,
    Power,
}

/// `(Af)(x) = |S|^-1 sum_s f(xs)`.
fn apply(letters: &Letters, f: &[f64], out: &mut [f64]) {
    let k = letters.len() as f64;
    for (x, o) in out.iter_mut().enumerate() {
        *o = letters.perms.iter().map(|p| f[p[x] as usize]).sum::<f64>() / k;
    }
}

/// Norm of the averaging operator on mean-zero functions, `ρ ∈ [0, 1]`.
pub fn spectral_gap(letters: &Letters) -> Result<(f64, GapMethod)> {
    if letters.is_empty() {
        return Err(Error::NotSymmetricSet);
    }
    let n = letters.order();
    if n == 1 {
        return Ok((0.0, GapMethod::Dense));
    }
    if n <= DENSE_LIMIT {
        let k = letters.len() as f64;
        let mut m = Mat::<f64>::from_fn(n, n, |_, _| -1.0 / n as f64);
        for p in &letters.perms {
            for x in 0..n {
                let y = p[x] as usize;
                m.write(x, y, m.read(x, y) + 1.0 / k);
            }
        }
        let ev = m.selfadjoint_eigenvalues(Side::Lower);
        let rho = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        return Ok((rho.clamp(0.0, 1.0), GapMethod::Dense));
    }
    Ok((power_iteration(letters, 1_000_000), GapMethod::Power))
}

/// `ρ` from `||A v|| / ||v||` along the iteration, on a deterministic mean-zero start.
pub fn power_iteration(letters: &Letters, cap: usize) -> f64 {
    let n = letters.order();
    let mut v: Vec<f64> = (0..n).map(|x| ((x as f64 + 1.0) * 0.754_877_666).fract() - 0.5).collect();
    let mut w = vec![0.0; n];
    let center = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        norm
    };
    center(&mut v);
    let mut rho = 0.0;
    let mut calm = 0;
    for _ in 0..cap {
        apply(letters, &v, &mut w);
        let est = center(&mut w);
        std::mem::swap(&mut v, &mut w);
        if (est - rho).abs() <= EIGEN_TOLERANCE * 1e-3 * est.max(1e-300) {
            calm += 1;
            if calm >= 20 {
                return est.clamp(0.0, 1.0);
            }
        } else {
            calm = 0;
        }
        rho = est;
    }
    rho.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingMode {
    Float,
    Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingPoint {
    pub l: u32,
    pub deviation: f64,
    /// Exact deviation as `numerator/denominator` in rational mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingProfile {
    pub mode: MixingMode,
    pub points: Vec<MixingPoint>,
    pub non_increasing: bool,
    pub within_bound: bool,
}

/// `max_x |P(walk of length l from 1 ends at x) - 1/|G||` for `l <= l_max`, against `ρ^l`.
pub fn mixing_profile(letters: &Letters, rho: f64, l_max: u32, mode: MixingMode) -> Result<MixingProfile> {
    let n = letters.order();
    let bound = |l: u32| rho.powi(l as i32) + EIGEN_TOLERANCE;
    let mut points = Vec::new();
    let mut non_increasing = true;
    match mode {
        MixingMode::Float => {
            let k = letters.len() as f64;
            let mut p = vec![0.0; n];
            p[letters.identity] = 1.0;
            let mut prev = f64::INFINITY;
            for l in 0..=l_max {
                let dev = p.iter().fold(0.0f64, |a, v| a.max((v - 1.0 / n as f64).abs()));
                non_increasing &= dev <= prev + 1e-15;
                prev = dev;
                points.push(MixingPoint { l, deviation: dev, exact: None, bound: bound(l), within_bound: dev <= bound(l) });
                let mut q = vec![0.0; n];
                for perm in &letters.perms {
                    for x in 0..n {
                        q[perm[x] as usize] += p[x] / k;
                    }
                }
                p = q;
            }
        }
        MixingMode::Rational => {
            if n > RATIONAL_LIMIT {
                return Err(Error::BudgetExceeded(format!("rational mixing needs |G| <= {RATIONAL_LIMIT}, got {n}")));
            }
            let nn = BigUint::from(n);
            let mut c = vec![BigUint::zero(); n];
            c[letters.identity] = BigUint::from(1u32);
            let mut total = BigUint::from(1u32);
            let mut prev: Option<(BigUint, BigUint)> = None;
            for l in 0..=l_max {
                let num = c
                    .iter()
                    .map(|v| {
                        let a = v * &nn;
                        if a >= total {
                            a - &total
                        } else {
                            &total - a
                        }
                    })
                    .max()
                    .unwrap();
                let den = &nn * &total;
                if let Some((pn, pd)) = &prev {
                    non_increasing &= &num * pd <= pn * &den;
                }
                let dev = ratio(&num, &den);
                points.push(MixingPoint {
                    l,
                    deviation: dev,
                    exact: Some(format!("{num}/{den}")),
                    bound: bound(l),
                    within_bound: dev <= bound(l),
                });
                prev = Some((num, den));
                let mut q = vec![BigUint::zero(); n];
                for perm in &letters.perms {
                    for x in 0..n {
                        q[perm[x] as usize] += &c[x];
                    }
                }
                c = q;
                total *= BigUint::from(letters.len());
            }
        }
    }
    let within_bound = points.iter().all(|p| p.within_bound);
    Ok(MixingProfile { mode, points, non_increasing, within_bound })
}

/// `a / b` rounded through a common scale so huge operands stay finite.
fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = b.bits().saturating_sub(1000);
    let (a, b) = (a >> shift, b >> shift);
    a.to_f64().unwrap_or(f64::INFINITY) / b.to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub group: String,
    pub level: u32,
    pub order: usize,
    /// `|S ∪ S^-1 ∪ {1}|`.
    pub letters: usize,
    pub diameter: u32,
    pub rho: f64,
    pub method: GapMethod,
    /// `1 / (1 - ρ)`.
    pub relaxation: f64,
    /// `(diam - 1) / log |G|`.
    pub lower: f64,
    /// `|S| diam^2`.
    pub upper: f64,
    pub sandwich_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingProfile>,
}

/// Diameter, `ρ` and the diameter/gap sandwich for `S ∪ S^-1 ∪ {1}`; with `l_max` also the mixing
/// profile against `ρ^l`.
pub fn spectral_report<G: FilteredGroup>(
    ig: &IndexedGroup<G>,
    gens: &[G::Elem],
    l_max: Option<(u32, MixingMode)>,
) -> Result<SpectralReport> {
    let letters = Letters::symmetric(ig, gens, true);
    let diameter = letters.diameter()?;
    let (rho, method) = spectral_gap(&letters)?;
    let n = ig.order();
    let relaxation = 1.0 / (1.0 - rho);
    let lower = if n > 1 { (diameter as f64 - 1.0) / (n as f64).ln() } else { 0.0 };
    let upper = letters.len() as f64 * (diameter as f64).powi(2);
    let slack = |x: f64| x * (1.0 + EIGEN_TOLERANCE) + EIGEN_TOLERANCE;
    let sandwich_holds = n == 1 || (lower <= slack(relaxation) && relaxation <= slack(upper));
    let mixing = l_max.map(|(l, mode)| mixing_profile(&letters, rho, l, mode)).transpose()?;
    Ok(SpectralReport {
        group: ig.descriptor(),
        level: ig.level(),
        order: n,
        letters: letters.len(),
        diameter,
        rho,
        method,
        relaxation,
        lower,
        upper,
        sandwich_holds,
        mixing,
    })
}
