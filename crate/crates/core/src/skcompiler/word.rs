use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::rc::Rc;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::FilteredGroup;

/// A finite list of group elements used as an alphabet; letter `(i, +1)` stands for `elems[i]`
/// and `(i, -1)` for its inverse, so the alphabet is symmetric by construction.
#[derive(Clone, Debug)]
pub struct GeneratingSet<G: FilteredGroup> {
    pub id: String,
    pub elems: Vec<G::Elem>,
}

impl<G: FilteredGroup> GeneratingSet<G> {
    pub fn new(id: impl Into<String>, elems: Vec<G::Elem>) -> Self {
        GeneratingSet { id: id.into(), elems }
    }

    pub fn standard(group: &G) -> Self {
        Self::new("standard", group.standard_generators())
    }

    /// `k` uniform random elements drawn with a seeded generator; id `sampled:k:seed`.
    pub fn sampled(group: &G, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elems = (0..k).map(|_| group.random_element(&mut rng)).collect();
        Self::new(format!("sampled:{k}:{seed}"), elems)
    }

    /// Images in `group.truncated(m)`.
    pub fn project(&self, group: &G, m: u32) -> Self {
        Self::new(self.id.clone(), self.elems.iter().map(|s| group.project(s, m)).collect())
    }

    /// `(s, s^-1)` for each element.
    pub fn pairs(&self, group: &G) -> Vec<(G::Elem, G::Elem)> {
        self.elems.iter().map(|s| (s.clone(), group.inv(s))).collect()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn to_json(&self, group: &G) -> Value {
        serde_json::json!({
            "id": self.id,
            "group": group.descriptor().to_string(),
            "elements": self.elems.iter().map(|s| group.element_to_json(s)).collect::<Vec<_>>(),
        })
    }

    /// Reads `{"id": ..., "elements": [...]}` or a bare element array.
    pub fn from_json(group: &G, v: &Value, default_id: &str) -> Result<Self> {
        let (id, elems) = match v {
            Value::Array(a) => (default_id.to_string(), a),
            Value::Object(o) => {
                let id = o.get("id").and_then(Value::as_str).unwrap_or(default_id).to_string();
                let a = o.get("elements").and_then(Value::as_array);
                (id, a.ok_or_else(|| Error::Decode("generating set needs an \"elements\" array".into()))?)
            }
            _ => return Err(Error::Decode("generating set must be an array or object".into())),
        };
        let elems = elems.iter().map(|e| group.element_from_json(e)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(id, elems))
    }
}

/// Where a generating set comes from: `standard`, `sampled:k:seed` or `file:path`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GenSpec {
    Standard,
    Sampled { k: usize, seed: u64 },
    File(PathBuf),
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "standard" {
            return Ok(GenSpec::Standard);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GenSpec::File(PathBuf::from(path)));
        }
        let bad = || Error::Decode(format!("bad generating set {s:?}; expected standard, sampled:k:seed or file:path"));
        let rest = s.strip_prefix("sampled:").ok_or_else(bad)?;
        let (k, seed) = rest.split_once(':').ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(GenSpec::Sampled { k, seed: seed.parse().map_err(|_| bad())? })
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Standard => write!(f, "standard"),
            GenSpec::Sampled { k, seed } => write!(f, "sampled:{k}:{seed}"),
            GenSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl From<GenSpec> for String {
    fn from(g: GenSpec) -> String {
        g.to_string()
    }
}

impl TryFrom<String> for GenSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl<G: FilteredGroup> GeneratingSet<G> {
    pub fn from_spec(group: &G, spec: &GenSpec) -> Result<Self> {
        match spec {
            GenSpec::Standard => Ok(Self::standard(group)),
            GenSpec::Sampled { k, seed } => Ok(Self::sampled(group, *k, *seed)),
            GenSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
                Self::from_json(group, &v, &spec.to_string())
            }
        }
    }
}

/// A word over a generating set: letters `(index, +1 | -1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub gens: String,
    pub ops: Vec<(u32, i8)>,
}

impl Word {
    pub fn new(gens: impl Into<String>) -> Self {
        Word { gens: gens.into(), ops: Vec::new() }
    }

    pub fn letter(gens: impl Into<String>, i: u32, e: i8) -> Self {
        Word { gens: gens.into(), ops: vec![(i, e)] }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { gens: self.gens.clone(), ops: self.ops.iter().rev().map(|&(i, e)| (i, -e)).collect() }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.gens != other.gens {
            return Err(Error::DescriptorMismatch(self.gens.clone(), other.gens.clone()));
        }
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&other.ops);
        Ok(Word { gens: self.gens.clone(), ops })
    }

    /// `a^-1 b^-1 a b`.
    pub fn commutator(a: &Word, b: &Word) -> Result<Word> {
        a.inverse().concat(&b.inverse())?.concat(a)?.concat(b)
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn cancel_adjacent(&self) -> Word {
        let mut ops: Vec<(u32, i8)> = Vec::with_capacity(self.ops.len());
        for &(i, e) in &self.ops {
            if ops.last() == Some(&(i, -e)) {
                ops.pop();
            } else {
                ops.push((i, e));
            }
        }
        Word { gens: self.gens.clone(), ops }
    }

    /// Left-to-right product of the letters.
    pub fn evaluate<G: FilteredGroup>(&self, group: &G, gens: &GeneratingSet<G>) -> Result<G::Elem> {
        if let Some(&(i, _)) = self.ops.iter().find(|&&(i, _)| i as usize >= gens.len()) {
            return Err(Error::IndexOutOfRange(format!("letter {i} with {} generators", gens.len())));
        }
        Ok(group.evaluate_indexed(&gens.pairs(group), &self.ops))
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("words serialize")
    }

    pub fn from_json(v: &Value) -> Result<Word> {
        let w: Word = serde_json::from_value(v.clone()).map_err(|e| Error::Decode(e.to_string()))?;
        if w.ops.iter().any(|&(_, e)| e != 1 && e != -1) {
            return Err(Error::Decode("exponents must be +1 or -1".into()));
        }
        Ok(w)
    }
}

#[derive(Debug)]
enum Kind {
    Leaf(Vec<(u32, i8)>),
    Concat(Vec<Rc<Node>>),
    /// `a^-1 b^-1 a b`.
    Commutator(Rc<Node>, Rc<Node>),
}

/// Shared word representation produced by the compiler; lengths are cached.
#[derive(Debug)]
pub struct Node {
    len: u128,
    kind: Kind,
}

impl Node {
    pub(crate) fn empty() -> Rc<Node> {
        Rc::new(Node { len: 0, kind: Kind::Leaf(Vec::new()) })
    }

    pub(crate) fn leaf(ops: Vec<(u32, i8)>) -> Rc<Node> {
        Rc::new(Node { len: ops.len() as u128, kind: Kind::Leaf(ops) })
    }

    pub(crate) fn concat(parts: Vec<Rc<Node>>) -> Rc<Node> {
        let parts: Vec<Rc<Node>> = parts.into_iter().filter(|p| p.len > 0).collect();
        if parts.len() == 1 {
            return parts.into_iter().next().unwrap();
        }
        let len = parts.iter().fold(0u128, |acc, p| acc.saturating_add(p.len));
        Rc::new(Node { len, kind: Kind::Concat(parts) })
    }

    pub(crate) fn commutator(a: Rc<Node>, b: Rc<Node>) -> Rc<Node> {
        if a.len == 0 || b.len == 0 {
            return Node::empty();
        }
        let len = a.len.saturating_add(b.len).saturating_mul(2);
        Rc::new(Node { len, kind: Kind::Commutator(a, b) })
    }

    pub fn len(&self) -> u128 {
        self.len
    }

    fn flatten_into(&self, inverted: bool, out: &mut Vec<(u32, i8)>) {
        match &self.kind {
            Kind::Leaf(ops) if inverted => out.extend(ops.iter().rev().map(|&(i, e)| (i, -e))),
            Kind::Leaf(ops) => out.extend_from_slice(ops),
            Kind::Concat(parts) if inverted => parts.iter().rev().for_each(|p| p.flatten_into(true, out)),
            Kind::Concat(parts) => parts.iter().for_each(|p| p.flatten_into(false, out)),
            // (a^-1 b^-1 a b)^-1 = b^-1 a^-1 b a.
            Kind::Commutator(a, b) => {
                let (x, y) = if inverted { (b, a) } else { (a, b) };
                x.flatten_into(true, out);
                y.flatten_into(true, out);
                x.flatten_into(false, out);
                y.flatten_into(false, out);
            }
        }
    }

    /// `(value, value^-1)`, memoized per node so shared subwords are evaluated once.
    fn eval<G: FilteredGroup>(
        self: &Rc<Self>,
        group: &G,
        pairs: &[(G::Elem, G::Elem)],
        memo: &mut HashMap<*const Node, (G::Elem, G::Elem)>,
    ) -> (G::Elem, G::Elem) {
        let key = Rc::as_ptr(self);
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let v = match &self.kind {
            Kind::Leaf(ops) => {
                let x = group.evaluate_indexed(pairs, ops);
                let xi = group.inv(&x);
                (x, xi)
            }
            Kind::Concat(parts) => {
                let mut x = group.identity();
                for p in parts {
                    x = group.mul(&x, &p.eval(group, pairs, memo).0);
                }
                let xi = group.inv(&x);
                (x, xi)
            }
            Kind::Commutator(a, b) => {
                let (a, ai) = a.eval(group, pairs, memo);
                let (b, bi) = b.eval(group, pairs, memo);
                let x = group.mul(&group.mul(&ai, &bi), &group.mul(&a, &b));
                let xi = group.inv(&x);
                (x, xi)
            }
        };
        memo.insert(key, v.clone());
        v
    }
}

/// A compiled word kept in shared form; [`flatten`](Self::flatten) expands it.
#[derive(Clone, Debug)]
pub struct WordDag {
    pub gens: String,
    pub(crate) root: Rc<Node>,
}

impl WordDag {
    pub fn len(&self) -> u128 {
        self.root.len
    }

    pub fn is_empty(&self) -> bool {
        self.root.len == 0
    }

    /// The explicit letter sequence; refuses lengths above `limit`.
    pub fn flatten(&self, limit: u128) -> Result<Word> {
        if self.len() > limit {
            return Err(Error::BudgetExceeded(format!("word of length {} exceeds {limit} letters", self.len())));
        }
        let mut ops = Vec::with_capacity(self.len() as usize);
        self.root.flatten_into(false, &mut ops);
        Ok(Word { gens: self.gens.clone(), ops })
    }

    /// Exact value of the word, evaluated through the shared structure.
    pub fn evaluate<G: FilteredGroup>(&self, group: &G, gens: &GeneratingSet<G>) -> G::Elem {
        let pairs = gens.pairs(group);
        self.root.eval(group, &pairs, &mut HashMap::new()).0
    }
}
