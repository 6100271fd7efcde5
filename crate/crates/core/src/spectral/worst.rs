//! Worst-case diameters over generating sets and the extension bound for `1 -> K -> G -> G/K -> 1`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::IndexedGroup;
use crate::error::{Error, Result};
use crate::group::FilteredGroup;

/// Largest order searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 200;
/// Largest order turned into a multiplication table.
const TABLE_LIMIT: usize = 5000;

/// A finite group given by its multiplication table.
#[derive(Clone, Debug)]
pub struct TableGroup {
    n: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    id: usize,
}

impl TableGroup {
    pub fn from_indexed<G: FilteredGroup>(ig: &IndexedGroup<G>) -> Result<Self> {
        let n = ig.order();
        if n > TABLE_LIMIT {
            return Err(Error::BudgetExceeded(format!("multiplication table of order {n}")));
        }
        let g = ig.group();
        let mut mul = vec![0u32; n * n];
        for b in 0..n {
            for (a, &ab) in ig.right_perm(ig.element(b)).iter().enumerate() {
                mul[a * n + b] = ab;
            }
        }
        let inv = ig.elements().iter().map(|x| ig.index_of(&g.inv(x)) as u32).collect();
        Ok(TableGroup { n, mul, inv, id: ig.identity_index() })
    }

    /// `Z/n` with `i * j = i + j`.
    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n * n).map(|k| ((k / n + k % n) % n) as u32).collect();
        let inv = (0..n).map(|i| ((n - i) % n) as u32).collect();
        TableGroup { n, mul, inv, id: 0 }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.id
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// The subgroup on `members`, renumbered in the given order.
    pub fn subgroup(&self, members: &[usize]) -> Result<TableGroup> {
        let mut pos = vec![u32::MAX; self.n];
        for (i, &x) in members.iter().enumerate() {
            pos[x] = i as u32;
        }
        let k = members.len();
        let mut mul = vec![0u32; k * k];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                let c = pos[self.mul(a, b)];
                if c == u32::MAX {
                    return Err(Error::InvalidGroup("members are not closed under multiplication".into()));
                }
                mul[i * k + j] = c;
            }
        }
        let inv = members.iter().map(|&a| pos[self.inv(a)]).collect::<Vec<_>>();
        if inv.contains(&u32::MAX) {
            return Err(Error::InvalidGroup("members are not closed under inverses".into()));
        }
        let id = pos[self.id];
        if id == u32::MAX {
            return Err(Error::InvalidGroup("members miss the identity".into()));
        }
        Ok(TableGroup { n: k, mul, inv, id: id as usize })
    }

    /// Distances from the identity in the Cayley graph of `S ∪ S^-1`; `u32::MAX` if unreachable.
    fn distances(&self, gens: &[usize]) -> Vec<u32> {
        let mut letters: Vec<usize> = gens.to_vec();
        letters.extend(gens.iter().map(|&s| self.inv(s)));
        letters.sort_unstable();
        letters.dedup();
        let mut dist = vec![u32::MAX; self.n];
        dist[self.id] = 0;
        let mut frontier = vec![self.id];
        let mut r = 0;
        while !frontier.is_empty() {
            r += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                for &s in &letters {
                    let y = self.mul(x, s);
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

    pub fn generates(&self, gens: &[usize]) -> bool {
        self.subgroup_size(gens) == self.n
    }

    pub fn subgroup_size(&self, gens: &[usize]) -> usize {
        self.distances(gens).iter().filter(|&&d| d != u32::MAX).count()
    }

    /// `diam(G, S)`, or `None` if `S` does not generate.
    pub fn diameter(&self, gens: &[usize]) -> Option<u32> {
        let dist = self.distances(gens);
        dist.iter().all(|&d| d != u32::MAX).then(|| dist.into_iter().max().unwrap_or(0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstCase {
    pub order: usize,
    pub diameter: u32,
    /// A generating set attaining the diameter.
    pub witness: Vec<usize>,
    /// `false` when the value is a sampled lower bound.
    pub exhaustive: bool,
    pub sets_examined: u64,
}

/// `max diam(G, S)` over all generating sets, found among the inclusion-minimal ones.
pub fn worst_case_exhaustive(t: &TableGroup, max_sets: u64) -> Result<WorstCase> {
    if t.order() > EXHAUSTIVE_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive search needs |G| <= {EXHAUSTIVE_LIMIT}, got {}",
            t.order()
        )));
    }
    let cands: Vec<usize> = (0..t.order()).filter(|&x| x != t.identity() && x <= t.inv(x)).collect();
    let mut best = WorstCase { order: t.order(), diameter: 0, witness: Vec::new(), exhaustive: true, sets_examined: 0 };
    if t.order() == 1 {
        return Ok(best);
    }
    let mut chosen = Vec::new();
    search(t, &cands, 0, &mut chosen, 1, &mut best, max_sets)?;
    Ok(best)
}

/// Depth-first over increasing candidate sequences, each element outside the span of the previous.
fn search(
    t: &TableGroup,
    cands: &[usize],
    start: usize,
    chosen: &mut Vec<usize>,
    span: usize,
    best: &mut WorstCase,
    max_sets: u64,
) -> Result<()> {
    let inside = t.distances(chosen);
    for (i, &x) in cands.iter().enumerate().skip(start) {
        if inside[x] != u32::MAX {
            continue;
        }
        best.sets_examined += 1;
        if best.sets_examined > max_sets {
            return Err(Error::BudgetExceeded(format!("more than {max_sets} generating sets")));
        }
        chosen.push(x);
        let size = t.subgroup_size(chosen);
        if size == t.order() {
            let d = t.diameter(chosen).expect("generates");
            if d > best.diameter {
                best.diameter = d;
                best.witness = chosen.clone();
            }
        } else if size > span {
            search(t, cands, i + 1, chosen, size, best, max_sets)?;
        }
        chosen.pop();
    }
    Ok(())
}

/// Largest `diam(G, S)` over `trials` draws of `k` uniform distinct elements, `k` cycling through
/// `ks`; draws that do not generate are discarded. A lower bound on the worst case.
pub fn worst_case_sampled<Rn: Rng + ?Sized>(t: &TableGroup, ks: &[usize], trials: usize, rng: &mut Rn) -> WorstCase {
    let mut best = WorstCase { order: t.order(), diameter: 0, witness: Vec::new(), exhaustive: false, sets_examined: 0 };
    for trial in 0..trials {
        let k = ks[trial % ks.len()].min(t.order());
        let s: Vec<usize> = sample(rng, t.order(), k).into_vec();
        best.sets_examined += 1;
        if let Some(d) = t.diameter(&s) {
            if d > best.diameter || best.witness.is_empty() {
                best.diameter = d;
                best.witness = s;
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ExtensionMode {
    Exhaustive,
    Sampled { trials: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub group: String,
    pub n: u32,
    pub m: u32,
    pub mode: ExtensionMode,
    pub order_g: usize,
    pub order_quotient: usize,
    pub order_kernel: usize,
    /// Worst case over all generating sets, or the largest sampled value.
    pub diam_g: u32,
    pub diam_g_exhaustive: bool,
    pub diam_quotient: u32,
    pub diam_quotient_exhaustive: bool,
    pub diam_kernel: u32,
    pub diam_kernel_exhaustive: bool,
    /// `(2 diam(G/K) + 1)(diam(K) + 1/2) - 1/2`.
    pub bound: f64,
    pub sets_checked: usize,
    pub bound_violations: usize,
    pub monotonicity_violations: usize,
    pub holds: bool,
}

const MAX_SETS: u64 = 2_000_000;

fn worst(t: &TableGroup, seed: u64) -> Result<WorstCase> {
    if t.order() <= EXHAUSTIVE_LIMIT {
        worst_case_exhaustive(t, MAX_SETS)
    } else {
        Ok(worst_case_sampled(t, &[2, 3, 4], 200, &mut ChaCha8Rng::seed_from_u64(seed)))
    }
}

/// Checks `diam(G/K) <= diam(G) <= (2 diam(G/K) + 1)(diam(K) + 1/2) - 1/2` for `G = G/K_n` and
/// `K = K_m/K_n`, `m <= n`. Exhaustive mode computes all three worst cases; sampled mode checks
/// the per-set consequences `diam(G/K, S̄) <= diam(G, S) <= bound` on random generating sets.
pub fn extension_bound_check<G: FilteredGroup>(
    group: &G,
    n: u32,
    m: u32,
    mode: ExtensionMode,
    budget: u128,
) -> Result<ExtensionReport> {
    if m > n {
        return Err(Error::BadLevelPair { n, m, reason: "the kernel level must not exceed the group level".into() });
    }
    let ig = IndexedGroup::new(group, n, budget)?;
    let tg = TableGroup::from_indexed(&ig)?;
    let iq = IndexedGroup::new(group, m, budget)?;
    let tq = TableGroup::from_indexed(&iq)?;
    let members: Vec<usize> = (0..ig.order()).filter(|&i| ig.group().depth(ig.element(i)) >= m).collect();
    let tk = tg.subgroup(&members)?;
    let seed = match mode {
        ExtensionMode::Sampled { seed, .. } => seed,
        ExtensionMode::Exhaustive => 0,
    };
    let wq = worst(&tq, seed)?;
    let wk = worst(&tk, seed.wrapping_add(1))?;
    let bound = (2.0 * wq.diameter as f64 + 1.0) * (wk.diameter as f64 + 0.5) - 0.5;
    let (diam_g, diam_g_exhaustive, sets_checked, bound_violations, monotonicity_violations) = match mode {
        ExtensionMode::Exhaustive => {
            let wg = worst_case_exhaustive(&tg, MAX_SETS)?;
            let bv = usize::from(wg.diameter as f64 > bound);
            let mv = usize::from(wq.diameter > wg.diameter);
            (wg.diameter, true, wg.sets_examined as usize, bv, mv)
        }
        ExtensionMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut dg, mut checked, mut bv, mut mv) = (0, 0, 0, 0);
            let image = |i: usize| iq.index_of(&group.project(ig.element(i), m));
            for trial in 0..trials {
                let k = [2, 3, 4][trial % 3];
                let s: Vec<usize> = sample(&mut rng, tg.order(), k.min(tg.order())).into_vec();
                let Some(d) = tg.diameter(&s) else { continue };
                let sq: Vec<usize> = s.iter().map(|&i| image(i)).collect();
                let dq = tq.diameter(&sq).expect("images of generators generate the quotient");
                checked += 1;
                dg = dg.max(d);
                bv += usize::from(d as f64 > bound);
                mv += usize::from(dq > d);
            }
            (dg, false, checked, bv, mv)
        }
    };
    Ok(ExtensionReport {
        group: ig.descriptor(),
        n,
        m,
        mode,
        order_g: tg.order(),
        order_quotient: tq.order(),
        order_kernel: tk.order(),
        diam_g,
        diam_g_exhaustive,
        diam_quotient: wq.diameter,
        diam_quotient_exhaustive: wq.exhaustive,
        diam_kernel: wk.diameter,
        diam_kernel_exhaustive: wk.exhaustive,
        bound,
        sets_checked,
        bound_violations,
        monotonicity_violations,
        holds: bound_violations == 0 && monotonicity_violations == 0,
    })
}

