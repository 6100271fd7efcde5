//! Property suites over every module, run from `prosk verify` and from the acceptance tests.
//!
//! Each suite returns a [`SuiteReport`]: per-property counts of checked and passing cases and up
//! to [`MAX_COUNTEREXAMPLES`] failing cases verbatim.

mod algebra;
mod measure;
mod nott;

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, DEFAULT_ELEMENT_BUDGET};
use crate::rings::RingDescriptor;

pub use algebra::{filtration_properties, lie_properties, ring_properties};
pub use measure::{
    default_corpus, extension_properties, growth_properties, sk_properties, spectral_properties, walk_properties,
    CorpusEntry, SkOptions, SkSeries,
};
pub use nott::nottingham_properties;

pub const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Rings,
    Filtration,
    Lie,
    Nottingham,
    Sk,
    Spectral,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [Suite::Rings, Suite::Filtration, Suite::Lie, Suite::Nottingham, Suite::Sk, Suite::Spectral];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rings => "rings",
            Suite::Filtration => "filtration",
            Suite::Lie => "lie",
            Suite::Nottingham => "nottingham",
            Suite::Sk => "sk",
            Suite::Spectral => "spectral",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

/// Pass counts for one property.
#[derive(Clone, Debug, Serialize)]
pub struct Property {
    pub name: String,
    pub checked: u64,
    pub passed: u64,
    pub counterexamples: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Property {
    pub fn new(name: impl Into<String>) -> Self {
        Property { name: name.into(), checked: 0, passed: 0, counterexamples: Vec::new(), note: None }
    }

    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if ok {
            self.passed += 1;
        } else if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(witness());
        }
    }

    /// Records a case that could not be evaluated.
    pub fn fail(&mut self, witness: String) {
        self.check(false, || witness);
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn holds(&self) -> bool {
        self.passed == self.checked
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub targets: Vec<String>,
    pub properties: Vec<Property>,
    /// Measured series backing the statistical properties.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, Value>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: Suite, targets: Vec<String>) -> Self {
        SuiteReport { suite, targets, properties: Vec::new(), data: BTreeMap::new(), pass: false }
    }

    fn finish(mut self) -> Self {
        self.pass = self.properties.iter().all(Property::holds);
        self
    }

    pub fn property(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }

    /// Properties whose name starts with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Property> + 'a {
        self.properties.iter().filter(move |p| p.name.starts_with(prefix))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Property> {
        self.properties.iter().filter(|p| !p.holds())
    }
}

/// What a suite runs on; `Default` selects each suite's built-in targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Default,
    Ring(RingDescriptor),
    Group(GroupDescriptor),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyOptions {
    /// Random cases per property; `None` keeps each suite's default.
    pub samples: Option<u64>,
    pub seed: u64,
    pub threads: usize,
    pub budget: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: None, seed: 0, threads: default_threads(), budget: DEFAULT_ELEMENT_BUDGET }
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `f` over `items` on up to `threads` workers, results in input order.
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], threads: usize, f: impl Fn(usize, &T) -> U + Sync) -> Vec<U> {
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, items.len().max(1));
    let mut done: Vec<(usize, U)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break local;
                        }
                        local.push((i, f(i, &items[i])));
                    }
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("verify worker")).collect()
    });
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, u)| u).collect()
}

fn parse_all<T: FromStr>(items: &[&str]) -> Vec<T> {
    items.iter().map(|s| s.parse().ok().expect("built-in descriptor")).collect()
}

fn default_rings() -> Vec<RingDescriptor> {
    parse_all(&["Zp:p=3,N=9", "Zp:p=5,N=9", "Zp:p=2,N=20", "Fq[[t]]:q=9,N=12", "Fq[[t]]:q=4,N=10", "Fq[[t]]:q=7,N=8"])
}

fn default_filtration_groups() -> Vec<GroupDescriptor> {
    let mut out = Vec::new();
    for ring in ["Zp:p=3,N=9", "Zp:p=5,N=9"] {
        for fam in ["SL:d=2", "SL:d=3", "SO:d=3", "SO:d=5", "Sp:d=4"] {
            out.push(format!("{fam},{ring}"));
        }
    }
    for q in [5, 7, 9] {
        out.push(format!("Nottingham,Fq[[t]]:q={q},N=40"));
    }
    out.iter().map(|s| s.parse().expect("built-in descriptor")).collect()
}

fn lie_rings() -> Vec<RingDescriptor> {
    parse_all(&["Zp:p=3,N=9", "Zp:p=5,N=9"])
}

fn default_nottingham() -> GroupDescriptor {
    "Nottingham,Fq[[t]]:q=5,N=40".parse().expect("built-in descriptor")
}

fn matrix_groups_over(ring: &RingDescriptor) -> Vec<GroupDescriptor> {
    let fams: &[(crate::group::Family, u32)] = {
        use crate::group::Family::*;
        &[(SL, 2), (SL, 3), (SO, 3), (SO, 5), (Sp, 4)]
    };
    let mut out: Vec<GroupDescriptor> =
        fams.iter().filter_map(|&(f, d)| GroupDescriptor::new(f, Some(d), *ring).ok()).collect();
    out.extend(GroupDescriptor::new(crate::group::Family::Nottingham, None, *ring));
    out
}

fn samples_or(opts: &VerifyOptions, default: u64) -> u64 {
    opts.samples.unwrap_or(default)
}

/// Runs one suite (or all of them) on `target`.
pub fn run(suite: Suite, target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    match suite {
        Suite::All => {
            let mut all = SuiteReport::new(Suite::All, Vec::new());
            for s in Suite::EACH {
                let r = run(s, target, opts)?;
                all.targets.extend(r.targets);
                all.properties.extend(r.properties.into_iter().map(|mut p| {
                    p.name = format!("{}/{}", s.name(), p.name);
                    p
                }));
                all.data.extend(r.data.into_iter().map(|(k, v)| (format!("{}/{k}", s.name()), v)));
            }
            Ok(all.finish())
        }
        Suite::Rings => rings(target, opts),
        Suite::Filtration => filtration(target, opts),
        Suite::Lie => lie(target, opts),
        Suite::Nottingham => nottingham(target, opts),
        Suite::Sk => sk(target, opts),
        Suite::Spectral => spectral(target, opts),
    }
}

fn rings(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    let rings = match target {
        Target::Default => default_rings(),
        Target::Ring(r) => vec![*r],
        Target::Group(g) => vec![g.ring],
    };
    let n = samples_or(opts, 2000);
    let results = par_map(&rings, opts.threads, |i, desc| -> Result<Vec<Property>> {
        let mut rng = rng_for(opts.seed, i as u64);
        with_ring!(desc, |r| Ok(ring_properties(&r, n, &mut rng)))
    });
    let mut report = SuiteReport::new(Suite::Rings, rings.iter().map(ToString::to_string).collect());
    for r in results {
        report.properties.extend(r?);
    }
    Ok(report.finish())
}

fn filtration(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    let groups = match target {
        Target::Default => default_filtration_groups(),
        Target::Ring(r) => matrix_groups_over(r),
        Target::Group(g) => vec![*g],
    };
    let n = samples_or(opts, 10_000);
    let results = par_map(&groups, opts.threads, |i, desc| -> Result<Vec<Property>> {
        let mut rng = rng_for(opts.seed, i as u64);
        with_group!(desc, |g| Ok(filtration_properties(&g, n, &mut rng)))
    });
    let mut report = SuiteReport::new(Suite::Filtration, groups.iter().map(ToString::to_string).collect());
    for r in results {
        report.properties.extend(r?);
    }
    Ok(report.finish())
}

fn lie(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    let rings = match target {
        Target::Default => lie_rings(),
        Target::Ring(r) => vec![*r],
        Target::Group(g) => vec![g.ring],
    };
    let n = samples_or(opts, 1000);
    let oracle_n = opts.samples.map_or(100, |s| s.min(100));
    let results = par_map(&rings, opts.threads, |i, desc| -> Result<Vec<Property>> {
        let mut rng = rng_for(opts.seed, i as u64);
        with_ring!(desc, |r| Ok(lie_properties(&r, n, oracle_n, &mut rng)))
    });
    let mut report = SuiteReport::new(Suite::Lie, rings.iter().map(ToString::to_string).collect());
    for r in results {
        report.properties.extend(r?);
    }
    Ok(report.finish())
}

fn nottingham(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    let desc = match target {
        Target::Default => default_nottingham(),
        Target::Ring(r) => GroupDescriptor::new(crate::group::Family::Nottingham, None, *r)?,
        Target::Group(g) if g.family == crate::group::Family::Nottingham => *g,
        Target::Group(g) => {
            return Err(Error::InvalidGroup(format!("{g}: the nottingham suite needs a Nottingham group")))
        }
    };
    let g = crate::nottingham::Nottingham::new(desc.ring.q, desc.ring.truncation)?;
    let mut rng = rng_for(opts.seed, 0);
    let props = nottingham_properties(&g, samples_or(opts, 1000), opts.samples.map_or(100, |s| s.min(100)), &mut rng)?;
    let mut report = SuiteReport::new(Suite::Nottingham, vec![desc.to_string()]);
    report.properties = props;
    Ok(report.finish())
}

fn sk(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    use crate::skcompiler::Plan;
    let runs: Vec<(GroupDescriptor, Plan)> = match target {
        Target::Default => vec![
            ("SL:d=2,Zp:p=3,N=8".parse()?, Plan::Dyadic),
            ("Nottingham,Fq[[t]]:q=5,N=27".parse()?, Plan::Triadic),
        ],
        Target::Ring(r) => {
            let d = if r.p == 2 { 3 } else { 2 };
            vec![(GroupDescriptor::new(crate::group::Family::SL, Some(d), *r)?, Plan::Dyadic)]
        }
        Target::Group(g) if g.family == crate::group::Family::Nottingham => vec![(*g, Plan::Triadic)],
        Target::Group(g) => vec![(*g, Plan::Dyadic)],
    };
    let mut report = SuiteReport::new(Suite::Sk, runs.iter().map(|(g, _)| g.to_string()).collect());
    for (desc, plan) in runs {
        let o = SkOptions {
            plan,
            levels: (1..=desc.ring.truncation).collect(),
            sets: 20,
            targets: opts.samples.map_or(3, |s| s.max(1) as usize),
            k: 2,
            seed: opts.seed,
            budget: opts.budget,
        };
        let (props, series) = with_group!(&desc, |g| sk_properties(&g, &o, opts.threads))?;
        report.properties.extend(props);
        report.data.insert(desc.to_string(), serde_json::to_value(&series).expect("series serializes"));
    }
    Ok(report.finish())
}

fn spectral(target: &Target, opts: &VerifyOptions) -> Result<SuiteReport> {
    let corpus = match target {
        Target::Default => default_corpus(),
        Target::Ring(r) => {
            let mut all = Vec::new();
            for g in matrix_groups_over(r) {
                all.extend(CorpusEntry::levels_of(&g, 5000)?);
            }
            all
        }
        Target::Group(g) => CorpusEntry::levels_of(g, 5000)?,
    };
    let mut report = SuiteReport::new(Suite::Spectral, corpus.iter().map(CorpusEntry::label).collect());
    let (props, reports) = spectral_properties(&corpus, 50, opts.threads, opts.budget)?;
    report.properties.extend(props);
    report.data.insert("corpus".into(), serde_json::to_value(&reports).expect("reports serialize"));
    if *target == Target::Default {
        let (props, data) = extension_properties(opts.seed, opts.threads, opts.budget)?;
        report.properties.extend(props);
        report.data.insert("extension".into(), data);
        let (props, data) = growth_properties(opts.seed, opts.threads, opts.budget)?;
        report.properties.extend(props);
        report.data.insert("growth".into(), data);
        let (props, data) = walk_properties(opts.seed, opts.threads, opts.budget)?;
        report.properties.extend(props);
        report.data.insert("walk".into(), data);
    }
    Ok(report.finish())
}
