//! Word compilation by descending the filtration: a base table covers `G/K_{n_base}`, and each
//! further stretch of precision is won by writing the residual as a product of commutators of
//! shallower elements, which are compiled recursively.

mod word;

#[cfg(test)]
mod tests;

use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::additive::AdditiveGroup;
use crate::error::{Error, Result};
use crate::group::{CommutatorOracle, FilteredGroup, DEFAULT_ELEMENT_BUDGET};
use crate::liealg::MatrixOracle;
use crate::matgroups::MatrixGroup;
use crate::nottingham::{Nottingham, NottinghamOracle};
use crate::rings::TruncatedRing;

pub use word::{GenSpec, GeneratingSet, Node, Word, WordDag};

/// Groups with a commutator decomposition usable by the compiler.
pub trait HasOracle: FilteredGroup {
    fn commutator_oracle(&self) -> Result<Box<dyn CommutatorOracle<Self>>>;
}

impl<R: TruncatedRing> HasOracle for MatrixGroup<R> {
    fn commutator_oracle(&self) -> Result<Box<dyn CommutatorOracle<Self>>> {
        Ok(Box::new(MatrixOracle::new(self)?))
    }
}

impl HasOracle for Nottingham {
    fn commutator_oracle(&self) -> Result<Box<dyn CommutatorOracle<Self>>> {
        Ok(Box::new(NottinghamOracle::new(self)))
    }
}

impl<R: TruncatedRing> HasOracle for AdditiveGroup<R> {
    fn commutator_oracle(&self) -> Result<Box<dyn CommutatorOracle<Self>>> {
        Err(Error::Unsupported("abelian groups have no commutator decomposition".into()))
    }
}

/// Shortest words for every coset of `G/K_level`.
#[derive(Clone, Debug)]
pub struct BaseTable {
    pub level: u32,
    pub gens: String,
    pub l0: usize,
    words: HashMap<Vec<u8>, Word>,
}

impl BaseTable {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Word for the coset with the given key (as produced by `coset_key(_, level)`).
    pub fn get(&self, key: &[u8]) -> Option<&Word> {
        self.words.get(key)
    }

    pub fn words(&self) -> impl Iterator<Item = (&Vec<u8>, &Word)> {
        self.words.iter()
    }
}

/// Breadth-first search of `G/K_level` from the identity over the letters `s_i^{+1}, s_i^{-1}`.
pub fn build_base_table<G: FilteredGroup>(
    group: &G,
    level: u32,
    gens: &GeneratingSet<G>,
    budget: u128,
) -> Result<BaseTable> {
    if level > group.truncation() {
        return Err(Error::LevelTooLarge { level, truncation: group.truncation() });
    }
    let order = group.quotient_order(level);
    if let Some(o) = order {
        if o > budget {
            return Err(Error::BudgetExceeded(format!("|G/K_{level}| = {o} exceeds budget {budget}")));
        }
    }
    let t = group.truncated(level);
    let letters: Vec<((u32, i8), G::Elem)> = gens
        .elems
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let s = group.project(s, level);
            let si = t.inv(&s);
            [((i as u32, 1i8), s), ((i as u32, -1i8), si)]
        })
        .collect();
    let mut words: HashMap<Vec<u8>, Word> = HashMap::new();
    let id = t.identity();
    words.insert(t.coset_key(&id, level), Word::new(gens.id.clone()));
    let mut queue = VecDeque::from([(id, Word::new(gens.id.clone()))]);
    let mut l0 = 0;
    while let Some((x, w)) = queue.pop_front() {
        l0 = l0.max(w.len());
        for (letter, s) in &letters {
            let y = t.mul(&x, s);
            let key = t.coset_key(&y, level);
            if words.contains_key(&key) {
                continue;
            }
            if words.len() as u128 >= budget {
                return Err(Error::BudgetExceeded(format!("base table exceeds {budget} cosets")));
            }
            let mut wy = w.clone();
            wy.ops.push(*letter);
            words.insert(key, wy.clone());
            queue.push_back((y, wy));
        }
    }
    let reached = words.len() as u128;
    match order {
        Some(o) if reached < o => Err(Error::NotGenerating { reached, order: o }),
        _ => Ok(BaseTable { level, gens: gens.id.clone(), l0, words }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plan {
    /// Doubling: `2a -> 3a -> 4a`.
    Dyadic,
    /// Tripling: `3b -> 4b -> 5b -> 6b -> 8b -> 9b`.
    Triadic,
}

impl Plan {
    pub fn factor(self) -> u32 {
        match self {
            Plan::Dyadic => 2,
            Plan::Triadic => 3,
        }
    }

    /// Per-scale multiplier `B` for decomposition arity `a`.
    pub fn budget_base(self, a: usize) -> u128 {
        let a = a as u128;
        match self {
            Plan::Dyadic => 8 * a * a + 6 * a,
            Plan::Triadic => (4 * a + 1).pow(6),
        }
    }
}

impl std::str::FromStr for Plan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dyadic" => Ok(Plan::Dyadic),
            "triadic" => Ok(Plan::Triadic),
            _ => Err(Error::Decode(format!("unknown plan {s:?}"))),
        }
    }
}

/// One precision step: a residual in `K_from` is written with commutators of `K_n x K_m`,
/// `n + m = from`, which is exact modulo `K_to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub from: u32,
    pub to: u32,
    pub n: u32,
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub plan: Plan,
    pub n0: u32,
    pub base: u32,
    pub steps: Vec<Step>,
}

fn step_bounds(plan: Plan, n0: u32, target: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut a = n0;
    let ratios: &[(u32, u32)] = match plan {
        Plan::Dyadic => &[(2, 3), (3, 4)],
        Plan::Triadic => &[(3, 4), (4, 5), (5, 6), (6, 8), (8, 9)],
    };
    loop {
        for &(f, t) in ratios {
            if out.last().is_some_and(|&(_, to)| to >= target) {
                return out;
            }
            out.push((f * a, t * a));
        }
        if out.last().is_some_and(|&(_, to)| to >= target) {
            return out;
        }
        a *= plan.factor();
    }
}

/// Most balanced admissible `(n, m)` with `n + m = from` reaching `to`.
fn choose_pair<G: FilteredGroup>(oracle: &dyn CommutatorOracle<G>, from: u32, to: u32) -> Option<(u32, u32)> {
    (1..=from / 2).rev().map(|n| (n, from - n)).find(|&(n, m)| 2 * n + m >= to && oracle.admissible(n, m))
}

fn schedule_for<G: FilteredGroup>(
    plan: Plan,
    oracle: &dyn CommutatorOracle<G>,
    n0: u32,
    target: u32,
) -> std::result::Result<Schedule, (u32, u32)> {
    let base = plan.factor() * n0;
    let mut steps = Vec::new();
    if target > base {
        for (from, to) in step_bounds(plan, n0, target) {
            let (n, m) = choose_pair(oracle, from, to).ok_or((from / 2, from - from / 2))?;
            steps.push(Step { from, to, n, m });
        }
    }
    Ok(Schedule { plan, n0, base, steps })
}

/// Largest `n0` tried when searching for an admissible schedule.
pub const MAX_N0: u32 = 8;

/// Steps reaching `target`, with the smallest workable `n0` unless one is forced.
pub fn plan_schedule<G: FilteredGroup>(
    plan: Plan,
    oracle: &dyn CommutatorOracle<G>,
    target: u32,
    n0: Option<u32>,
) -> Result<Schedule> {
    if let Some(n0) = n0 {
        if n0 == 0 {
            return Err(Error::BadLevelPair { n: 0, m: 0, reason: "n0 must be positive".into() });
        }
        return schedule_for(plan, oracle, n0, target).map_err(|(n, m)| Error::OracleLevelRejected { n, m });
    }
    let mut last = (1, 1);
    for n0 in 1..=MAX_N0 {
        match schedule_for(plan, oracle, n0, target) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(Error::OracleLevelRejected { n: last.0, m: last.1 })
}

/// Length accounting for one compiled word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub gens: String,
    pub plan: Plan,
    pub n: u32,
    pub length: u128,
    /// Decomposition arity `A`.
    pub a: usize,
    /// Per-scale multiplier `B`.
    pub b: u128,
    /// Scale factor `D`.
    pub d: u32,
    /// Number of scales `i = ceil(log(n / n_base) / log D)`.
    pub i: u32,
    pub n0: u32,
    pub n_base: u32,
    pub l0: usize,
    /// `B^i * l0`, saturating.
    pub budget: u128,
    /// `l0 * (1 + B + ... + B^i)`, saturating.
    pub geometric_budget: u128,
    pub within_budget: bool,
    pub residual_depth: u32,
    pub evaluation: String,
}

pub fn scales(n: u32, n_base: u32, d: u32) -> u32 {
    let mut i = 0;
    let mut reach = n_base.max(1) as u64;
    while reach < n as u64 {
        reach *= d as u64;
        i += 1;
    }
    i
}

#[derive(Clone, Copy, Debug)]
pub struct CompileOptions {
    /// Forces `n0` instead of searching for the smallest admissible one.
    pub n0: Option<u32>,
    /// Element budget for the base table.
    pub budget: u128,
    /// Longest word evaluated letter by letter in the final check; longer words are evaluated
    /// through their shared structure.
    pub flat_eval_limit: u128,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { n0: None, budget: DEFAULT_ELEMENT_BUDGET, flat_eval_limit: 10_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Compiled<G: FilteredGroup> {
    pub word: WordDag,
    /// Value of the word in `G/K_n`.
    pub value: G::Elem,
    pub certificate: Certificate,
}

/// A compiler for one group, generating set, precision and plan.
pub struct Compiler<G: HasOracle> {
    ambient: G,
    group: G,
    n: u32,
    gens: GeneratingSet<G>,
    letters: Vec<(G::Elem, G::Elem)>,
    oracle: Box<dyn CommutatorOracle<G>>,
    schedule: Schedule,
    table: BaseTable,
}

type Memo<E> = HashMap<(u32, Vec<u8>), (Rc<Node>, E)>;

impl<G: HasOracle> Compiler<G> {
    pub fn new(group: &G, gens: &GeneratingSet<G>, n: u32, plan: Plan, opts: CompileOptions) -> Result<Self> {
        if n > group.truncation() {
            return Err(Error::PrecisionExceedsTruncation { precision: n, truncation: group.truncation() });
        }
        if n == 0 {
            return Err(Error::BadLevelPair { n: 0, m: 0, reason: "precision must be positive".into() });
        }
        let h = group.truncated(n);
        let oracle = h.commutator_oracle()?;
        let schedule = plan_schedule(plan, oracle.as_ref(), n, opts.n0)?;
        let gens = gens.project(group, n);
        let table = build_base_table(&h, schedule.base.min(n), &gens, opts.budget)?;
        let letters = gens.pairs(&h);
        Ok(Compiler { ambient: group.clone(), group: h, n, gens, letters, oracle, schedule, table })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn table(&self) -> &BaseTable {
        &self.table
    }

    /// The quotient `G/K_n` the compiler works in.
    pub fn quotient(&self) -> &G {
        &self.group
    }

    pub fn generators(&self) -> &GeneratingSet<G> {
        &self.gens
    }

    /// A word congruent to `target` modulo `K_n`, with its certificate.
    pub fn compile(&self, target: &G::Elem, opts: &CompileOptions) -> Result<Compiled<G>> {
        let h = &self.group;
        let t = self.ambient.project(target, self.n);
        let mut memo: Memo<G::Elem> = HashMap::new();
        let (root, value) = self.approx(&t, self.n, &mut memo)?;
        let word = WordDag { gens: self.gens.id.clone(), root };

        let (check, evaluation) = if word.len() <= opts.flat_eval_limit {
            let flat = word.flatten(opts.flat_eval_limit)?;
            (h.evaluate_indexed(&self.letters, &flat.ops), "letters")
        } else {
            (word.evaluate(h, &self.gens), "shared")
        };
        debug_assert!(h.is_identity(&h.mul(&check, &h.inv(&value))));
        let residual_depth = h.depth(&h.mul(&t, &h.inv(&check)));
        if residual_depth < self.n {
            return Err(Error::DepthViolation { depth: residual_depth, required: self.n });
        }

        let plan = self.schedule.plan;
        let a = self.oracle.arity();
        let b = plan.budget_base(a);
        let d = plan.factor();
        let i = scales(self.n, self.schedule.base, d);
        let l0 = self.table.l0;
        let budget = b.saturating_pow(i).saturating_mul(l0 as u128);
        let geometric_budget =
            (0..=i).fold(0u128, |acc, j| acc.saturating_add(b.saturating_pow(j))).saturating_mul(l0 as u128);
        let certificate = Certificate {
            gens: self.gens.id.clone(),
            plan,
            n: self.n,
            length: word.len(),
            a,
            b,
            d,
            i,
            n0: self.schedule.n0,
            n_base: self.schedule.base,
            l0,
            budget,
            geometric_budget,
            within_budget: word.len() <= budget,
            residual_depth,
            evaluation: evaluation.into(),
        };
        Ok(Compiled { word, value: check, certificate })
    }

    /// Word and value congruent to `g` modulo `K_c`.
    fn approx(&self, g: &G::Elem, c: u32, memo: &mut Memo<G::Elem>) -> Result<(Rc<Node>, G::Elem)> {
        let h = &self.group;
        if h.depth(g) >= c {
            return Ok((Node::empty(), h.identity()));
        }
        let key = (c, h.coset_key(g, c));
        if let Some(v) = memo.get(&key) {
            return Ok(v.clone());
        }
        let out = if c <= self.table.level {
            let w = self
                .table
                .get(&h.coset_key(g, self.table.level))
                .expect("base table covers every coset");
            (Node::leaf(w.ops.clone()), h.evaluate_indexed(&self.letters, &w.ops))
        } else {
            let step = *self.schedule.steps.iter().find(|s| s.to >= c).expect("schedule reaches the precision");
            let (w0, v0) = self.approx(g, step.from, memo)?;
            let r = h.mul(g, &h.inv(&v0));
            let pairs = self.oracle.decompose(&r, step.n, step.m)?;
            let mut parts = Vec::with_capacity(pairs.len() + 1);
            let mut value = h.identity();
            for (x, y) in &pairs {
                let (wx, vx) = self.approx(x, c - step.m, memo)?;
                let (wy, vy) = self.approx(y, c - step.n, memo)?;
                value = h.mul(&value, &h.commutator(&vx, &vy));
                parts.push(Node::commutator(wx, wy));
            }
            parts.push(w0);
            (Node::concat(parts), h.mul(&value, &v0))
        };
        memo.insert(key, out.clone());
        Ok(out)
    }
}

/// One-shot compilation.
pub fn compile<G: HasOracle>(
    group: &G,
    gens: &GeneratingSet<G>,
    target: &G::Elem,
    n: u32,
    plan: Plan,
    opts: CompileOptions,
) -> Result<Compiled<G>> {
    Compiler::new(group, gens, n, plan, opts)?.compile(target, &opts)
}
