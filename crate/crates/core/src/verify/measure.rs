use serde::Serialize;
use serde_json::{json, Value};

use super::{par_map, rng_for, Property};
use crate::error::{Error, Result};
use crate::group::{FilteredGroup, GroupDescriptor};
use crate::skcompiler::{CompileOptions, Compiler, GenSpec, GeneratingSet, HasOracle, Plan};
use crate::spectral::{
    diameter_bfs, extension_bound_check, spectral_report, walk_statistics, ExtensionMode, ExtensionReport,
    GapMethod, IndexedGroup, Letters, MixingMode, SpectralReport, WalkOptions, DENSE_LIMIT, RATIONAL_LIMIT,
};

fn merge(into: &mut Property, from: Property) {
    into.checked += from.checked;
    into.passed += from.passed;
    for c in from.counterexamples {
        if into.counterexamples.len() < super::MAX_COUNTEREXAMPLES {
            into.counterexamples.push(c);
        }
    }
}

/// Least-squares slope of `y` against `x`; NaN with fewer than two distinct abscissae.
pub(crate) fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if points.len() < 2 || sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

#[derive(Clone, Debug)]
pub struct SkOptions {
    pub plan: Plan,
    /// Precisions to compile at, each at most the group's truncation.
    pub levels: Vec<u32>,
    /// Generating sets to find.
    pub sets: usize,
    /// Random targets per set and level.
    pub targets: usize,
    /// Elements per sampled generating set.
    pub k: usize,
    pub seed: u64,
    pub budget: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelStat {
    pub n: u32,
    pub n_base: u32,
    pub words: u64,
    pub max_length: u128,
    pub mean_length: f64,
    pub max_budget: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkSeries {
    pub group: String,
    pub plan: Plan,
    pub generating_sets: Vec<String>,
    pub attempts: usize,
    pub a: usize,
    pub b: u128,
    pub d: u32,
    /// `log B / log D`.
    pub exponent: f64,
    /// Slope of `log(max length)` against `log n`.
    pub slope: f64,
    pub levels: Vec<LevelStat>,
}

struct SetRun {
    sound: Property,
    budget: Property,
    /// `(n, n_base, words, max, sum, max_budget)` per level.
    stats: Vec<(u32, u32, u64, u128, u128, u128)>,
    a: usize,
}

fn budget_for(plan: Plan, a: usize, n: u32, n_base: u32, l0: usize) -> u128 {
    let a = a as u128;
    let (b, d) = match plan {
        Plan::Dyadic => (8 * a * a + 6 * a, 2u64),
        Plan::Triadic => ((4 * a + 1).pow(6), 3u64),
    };
    let mut i = 0;
    let mut reach = n_base as u64;
    while reach < n as u64 {
        reach *= d;
        i += 1;
    }
    b.saturating_pow(i).saturating_mul(l0 as u128)
}

fn run_set<G: HasOracle>(g: &G, gs: &GeneratingSet<G>, o: &SkOptions, copts: &CompileOptions, stream: u64) -> SetRun {
    let tag = g.descriptor().to_string();
    let mut sound = Property::new(format!("compile_soundness [{tag}]"));
    let mut budget = Property::new(format!("compile_budget [{tag}]"));
    let mut stats = Vec::new();
    let mut a = 0;
    let mut rng = rng_for(o.seed ^ 0x736b, stream);
    for &n in &o.levels {
        let compiler = match Compiler::new(g, gs, n, o.plan, *copts) {
            Ok(c) => c,
            Err(e) => {
                sound.fail(format!("{} n={n}: {e}", gs.id));
                continue;
            }
        };
        let n_base = compiler.schedule().base;
        let (mut words, mut max, mut sum, mut max_budget) = (0, 0, 0, 0);
        for _ in 0..o.targets {
            let t = g.random_element(&mut rng);
            let show = || format!("{} n={n} target={}", gs.id, g.element_to_json(&t));
            let c = match compiler.compile(&t, copts) {
                Ok(c) => c,
                Err(e) => {
                    sound.fail(format!("{}: {e}", show()));
                    continue;
                }
            };
            let v = c.word.evaluate(g, gs);
            sound.check(g.depth(&g.mul(&t, &g.inv(&v))) >= n, show);
            let cert = &c.certificate;
            a = a.max(cert.a);
            let bound = budget_for(o.plan, cert.a, n, cert.n_base, cert.l0);
            let len = c.word.len();
            budget.check(len == cert.length && len <= bound && cert.budget == bound, || {
                format!("{} length={len} bound={bound}", show())
            });
            words += 1;
            max = max.max(len);
            sum += len;
            max_budget = max_budget.max(bound);
        }
        stats.push((n, n_base, words, max, sum, max_budget));
    }
    SetRun { sound, budget, stats, a }
}

/// Compiles random targets over `o.sets` sampled generating sets at every level of `o.levels`,
/// re-evaluating each word independently, recomputing its budget `B^i l_0`, and fitting the growth
/// exponent of the longest word per level.
pub fn sk_properties<G: HasOracle>(g: &G, o: &SkOptions, threads: usize) -> Result<(Vec<Property>, SkSeries)> {
    let tag = g.descriptor().to_string();
    let top = o.levels.iter().copied().max().unwrap_or(1);
    let copts = CompileOptions { budget: o.budget, ..CompileOptions::default() };
    let mut sets = Vec::new();
    let mut attempts = 0;
    while sets.len() < o.sets && attempts < o.sets.max(1) * 50 {
        let gs = GeneratingSet::sampled(g, o.k, o.seed.wrapping_add(attempts as u64));
        attempts += 1;
        match Compiler::new(g, &gs, top, o.plan, copts) {
            Ok(_) => sets.push(gs),
            Err(Error::NotGenerating { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let mut found = Property::new(format!("generating_sets [{tag}]"));
    found.check(sets.len() == o.sets, || format!("found {} of {} after {attempts} draws", sets.len(), o.sets));

    let runs = par_map(&sets, threads, |i, gs| run_set(g, gs, o, &copts, i as u64));
    let mut sound = Property::new(format!("compile_soundness [{tag}]"));
    let mut budget = Property::new(format!("compile_budget [{tag}]"));
    let mut a = 0;
    let mut levels: Vec<LevelStat> = Vec::new();
    for run in runs {
        merge(&mut sound, run.sound);
        merge(&mut budget, run.budget);
        a = a.max(run.a);
        for (n, n_base, words, max, sum, mb) in run.stats {
            match levels.iter_mut().find(|l| l.n == n) {
                Some(l) => {
                    l.mean_length = (l.mean_length * l.words as f64 + sum as f64) / (l.words + words).max(1) as f64;
                    l.words += words;
                    l.max_length = l.max_length.max(max);
                    l.max_budget = l.max_budget.max(mb);
                }
                None => levels.push(LevelStat {
                    n,
                    n_base,
                    words,
                    max_length: max,
                    mean_length: sum as f64 / words.max(1) as f64,
                    max_budget: mb,
                }),
            }
        }
    }
    levels.sort_by_key(|l| l.n);

    let b = o.plan.budget_base(a);
    let d = o.plan.factor();
    let exponent = (b as f64).ln() / (d as f64).ln();
    let points: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.max_length > 0)
        .map(|l| ((l.n as f64).ln(), (l.max_length as f64).ln()))
        .collect();
    let slope = fit_slope(&points);
    let mut growth = Property::new(format!("length_growth_slope [{tag}]"));
    growth.check(slope.is_finite() && slope <= exponent + 0.5, || format!("slope {slope:.3}"));
    let growth = growth.with_note(format!(
        "log-log slope of the longest word against n is {slope:.3}; the exponent log B / log D with A = {a}, B = {b}, \
         D = {d} is {exponent:.3}"
    ));

    let series = SkSeries {
        group: tag,
        plan: o.plan,
        generating_sets: sets.iter().map(|s| s.id.clone()).collect(),
        attempts,
        a,
        b,
        d,
        exponent,
        slope,
        levels,
    };
    Ok((vec![found, sound, budget, growth], series))
}

/// One Cayley graph of the spectral corpus.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub group: GroupDescriptor,
    pub level: u32,
    pub gens: GenSpec,
}

impl CorpusEntry {
    pub fn label(&self) -> String {
        format!("{} level {} gens {}", self.group, self.level, self.gens)
    }

    /// Standard generators and two sampled sets at every level of `group` with `1 < |G/K_n| <= max_order`.
    pub fn levels_of(group: &GroupDescriptor, max_order: u128) -> Result<Vec<CorpusEntry>> {
        let orders: Vec<Option<u128>> =
            with_group!(group, |g| (1..=group.ring.truncation).map(|n| g.quotient_order(n)).collect());
        let mut out = Vec::new();
        for (n, o) in (1..).zip(orders) {
            if o.is_some_and(|o| o > 1 && o <= max_order) {
                for gens in [GenSpec::Standard, GenSpec::Sampled { k: 2, seed: n as u64 }, GenSpec::Sampled { k: 3, seed: 100 + n as u64 }] {
                    out.push(CorpusEntry { group: *group, level: n, gens });
                }
            }
        }
        Ok(out)
    }
}

/// Groups and levels of the built-in spectral corpus: every quotient here has order at most 5000.
pub fn default_corpus() -> Vec<CorpusEntry> {
    let groups: &[(&str, &[u32])] = &[
        ("SL:d=2,Zp:p=3,N=2", &[1, 2]),
        ("SL:d=2,Zp:p=5,N=1", &[1]),
        ("SL:d=2,Zp:p=7,N=1", &[1]),
        ("SL:d=3,Zp:p=2,N=1", &[1]),
        ("SO:d=3,Zp:p=3,N=2", &[1, 2]),
        ("SO:d=3,Zp:p=5,N=1", &[1]),
        ("SO:d=3,Zp:p=7,N=1", &[1]),
        ("SL:d=2,Fq[[t]]:q=3,N=2", &[1, 2]),
        ("SL:d=2,Fq[[t]]:q=5,N=1", &[1]),
        ("Nottingham,Fq[[t]]:q=3,N=7", &[4, 5, 6, 7]),
        ("Nottingham,Fq[[t]]:q=5,N=5", &[3, 4, 5]),
        ("Nottingham,Fq[[t]]:q=7,N=4", &[3, 4]),
        ("Additive,Zp:p=3,N=5", &[2, 3, 4, 5]),
        ("Additive,Zp:p=5,N=3", &[2, 3]),
        ("Additive,Fq[[t]]:q=9,N=1", &[1]),
        ("Additive,Fq[[t]]:q=5,N=2", &[2]),
    ];
    let mut out = Vec::new();
    for (g, levels) in groups {
        let group: GroupDescriptor = g.parse().expect("built-in descriptor");
        for &level in *levels {
            for gens in [
                GenSpec::Standard,
                GenSpec::Sampled { k: 2, seed: level as u64 },
                GenSpec::Sampled { k: 3, seed: 100 + level as u64 },
            ] {
                out.push(CorpusEntry { group, level, gens });
            }
        }
    }
    out.push(CorpusEntry {
        group: "Nottingham,Fq[[t]]:q=5,N=6".parse().expect("built-in descriptor"),
        level: 6,
        gens: GenSpec::Standard,
    });
    out
}

/// Resolves `spec` on the quotient; sampled sets that fail to generate are redrawn with the next
/// seed.
pub(crate) fn resolve_gens<G: FilteredGroup>(ig: &IndexedGroup<G>, spec: &GenSpec) -> Result<GeneratingSet<G>> {
    match *spec {
        GenSpec::Sampled { k, seed } => {
            for t in 0..200 {
                let gs = GeneratingSet::sampled(ig.group(), k, seed.wrapping_add(t));
                if Letters::symmetric(ig, &gs.elems, false).diameter().is_ok() {
                    return Ok(gs);
                }
            }
            Err(Error::NotGenerating { reached: 0, order: ig.order() as u128 })
        }
        _ => GeneratingSet::from_spec(ig.group(), spec),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusResult {
    pub entry: String,
    pub gens: String,
    pub report: SpectralReport,
}

fn corpus_report(entry: &CorpusEntry, l_max: u32, budget: u128) -> Result<CorpusResult> {
    with_group!(&entry.group, |g| {
        let ig = IndexedGroup::new(&g, entry.level, budget)?;
        let gs = resolve_gens(&ig, &entry.gens)?;
        let mode = if ig.order() <= RATIONAL_LIMIT { MixingMode::Rational } else { MixingMode::Float };
        let report = spectral_report(&ig, &gs.elems, Some((l_max, mode)))?;
        Ok(CorpusResult { entry: entry.label(), gens: gs.id, report })
    })
}

/// The diameter/gap sandwich and the `ρ^l` mixing bound for `l <= l_max` on every corpus entry.
pub fn spectral_properties(
    corpus: &[CorpusEntry],
    l_max: u32,
    threads: usize,
    budget: u128,
) -> Result<(Vec<Property>, Vec<CorpusResult>)> {
    let results = par_map(corpus, threads, |_, e| corpus_report(e, l_max, budget));
    let mut sandwich = Property::new("diameter_gap_sandwich");
    let mut mixing = Property::new("mixing_bound");
    let mut monotone = Property::new("mixing_non_increasing");
    let mut dense = Property::new("dense_eigensolve");
    let mut ok = Vec::new();
    let mut rational = 0;
    for (entry, r) in corpus.iter().zip(results) {
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                sandwich.fail(format!("{}: {e}", entry.label()));
                continue;
            }
        };
        let rep = &r.report;
        let show = || format!("{} ({}): {}", r.entry, r.gens, serde_json::to_string(rep).expect("serializes"));
        sandwich.check(rep.sandwich_holds, show);
        dense.check(rep.order > DENSE_LIMIT || rep.method == GapMethod::Dense, show);
        if let Some(m) = &rep.mixing {
            rational += usize::from(m.mode == MixingMode::Rational);
            mixing.check(m.within_bound, show);
            monotone.check(m.non_increasing, show);
        }
        ok.push(r);
    }
    let n = corpus.len();
    let sandwich = sandwich.with_note(format!(
        "(diam - 1) / log|G| <= 1/(1 - ρ) <= |S| diam^2 with S ∪ S^-1 ∪ {{1}}, eigensolve tolerance 1e-9, {n} Cayley graphs"
    ));
    let mixing = mixing.with_note(format!("l <= {l_max}; exact rational arithmetic on {rational} of {n} graphs"));
    Ok((vec![sandwich, mixing, monotone, dense], ok))
}

fn extension_cases(seed: u64) -> Vec<(&'static str, u32, u32, ExtensionMode)> {
    let mut out = Vec::new();
    let ex = ExtensionMode::Exhaustive;
    let ladders: &[(&str, u32)] = &[
        ("Additive,Zp:p=2,N=7", 7),
        ("Additive,Zp:p=3,N=4", 4),
        ("Additive,Zp:p=5,N=3", 3),
        ("Additive,Zp:p=7,N=2", 2),
        ("Additive,Zp:p=11,N=2", 2),
        ("Additive,Fq[[t]]:q=3,N=3", 3),
        ("Nottingham,Fq[[t]]:q=3,N=5", 5),
        ("Nottingham,Fq[[t]]:q=5,N=4", 4),
        ("Nottingham,Fq[[t]]:q=7,N=3", 3),
        ("SL:d=2,Zp:p=3,N=1", 1),
        ("SL:d=2,Zp:p=5,N=1", 1),
        ("SO:d=3,Zp:p=5,N=1", 1),
    ];
    for &(g, n) in ladders {
        for m in 1..=n {
            out.push((g, n, m, ex));
        }
    }
    out.push(("SL:d=2,Zp:p=3,N=2", 2, 1, ExtensionMode::Sampled { trials: 200, seed }));
    out
}

/// Quotient monotonicity `diam(G/K) <= diam(G)` and the extension bound
/// `diam(G) <= (2 diam(G/K) + 1)(diam(K) + 1/2) - 1/2` for worst-case diameters: exhaustively for
/// groups of order at most 200 and on sampled generating sets of `SL_2(Z/9)` over `SL_2(Z/3)`.
pub fn extension_properties(seed: u64, threads: usize, budget: u128) -> Result<(Vec<Property>, Value)> {
    let cases = extension_cases(seed);
    let results = par_map(&cases, threads, |_, &(g, n, m, mode)| -> Result<ExtensionReport> {
        let desc: GroupDescriptor = g.parse()?;
        with_group!(&desc, |grp| extension_bound_check(&grp, n, m, mode, budget))
    });
    let mut mono = Property::new("quotient_monotonicity");
    let mut bound = Property::new("extension_bound");
    let mut reports = Vec::new();
    for r in results {
        let r = r?;
        let show = || serde_json::to_string(&r).expect("serializes");
        mono.check(r.monotonicity_violations == 0, show);
        bound.check(r.bound_violations == 0, show);
        reports.push(r);
    }
    let exhaustive = reports.iter().filter(|r| r.mode == ExtensionMode::Exhaustive).count();
    let note = format!("{exhaustive} exhaustive cases, {} sampled", reports.len() - exhaustive);
    Ok((vec![mono.with_note(note.clone()), bound.with_note(note)], serde_json::to_value(&reports).expect("serializes")))
}

/// Growth of worst sampled diameters of `SL_2(Z/3^n)`, `n <= 4`, against the abelian family
/// `Z/3^n` with one generator, whose diameter `(3^n - 1)/2` is exponential in `n`.
pub fn growth_properties(seed: u64, threads: usize, budget: u128) -> Result<(Vec<Property>, Value)> {
    let levels: Vec<u32> = (1..=4).collect();
    let sl = crate::matgroups::MatrixGroup::sl(2, crate::rings::Zpn::new(3, 4)?)?;
    let draws: Vec<(u32, usize, u64)> =
        levels.iter().flat_map(|&n| (0..12u64).map(move |i| (n, 2 + (i % 2) as usize, i))).collect();
    let diams = par_map(&draws, threads, |_, &(n, k, i)| -> Result<u32> {
        let q = sl.truncated(n);
        let mut rng = rng_for(seed ^ 0x6772, (n as u64) << 32 | i);
        loop {
            let gens: Vec<_> = (0..k).map(|_| q.random_element(&mut rng)).collect();
            match diameter_bfs(&q, n, &gens, budget) {
                Err(Error::NotGenerating { .. }) => continue,
                other => return other,
            }
        }
    });
    let mut worst = vec![0u32; levels.len()];
    for (&(n, _, _), d) in draws.iter().zip(diams) {
        let slot = &mut worst[n as usize - 1];
        *slot = (*slot).max(d?);
    }
    let points: Vec<(f64, f64)> =
        levels.iter().zip(&worst).map(|(&n, &d)| ((n as f64).ln(), (d as f64).ln())).collect();
    let slope = fit_slope(&points);
    let mut poly = Property::new("polylog_growth [SL:d=2,Zp:p=3]");
    poly.check(slope.is_finite(), || format!("slope {slope}"));
    let poly = poly.with_note(format!("largest sampled diameters {worst:?} for n = 1..4, log-log slope {slope:.3}"));

    let add = crate::additive::AdditiveGroup::new(crate::rings::Zpn::new(3, 8)?);
    let mut exact = Property::new("abelian_contrast [Additive,Zp:p=3]");
    let mut contrast = Vec::new();
    for n in 1..=8u32 {
        let d = diameter_bfs(&add, n, &[1], budget)?;
        let expect = (3u64.pow(n) - 1) / 2;
        exact.check(d as u64 == expect, || format!("n={n} diam={d} expected {expect}"));
        contrast.push(d);
    }
    let ratio = contrast[7] as f64 / contrast[6] as f64;
    let exact = exact.with_note(format!("diameters {contrast:?} grow by a factor {ratio:.3} per level"));
    Ok((vec![poly, exact], json!({ "sl2_worst_sampled": worst, "sl2_slope": slope, "abelian": contrast })))
}

/// Monte Carlo walk laws against exact convolution at three trial counts, within `3 / sqrt(T)`.
pub fn walk_properties(seed: u64, threads: usize, budget: u128) -> Result<(Vec<Property>, Value)> {
    let g = crate::nottingham::Nottingham::new(5, 4)?;
    let ig = IndexedGroup::new(&g, 4, budget)?;
    let gens = g.standard_generators();
    let mut prop = Property::new("walk_monte_carlo_agreement [Nottingham,Fq[[t]]:q=5,N=4]");
    let mut reports = Vec::new();
    for trials in [1_000u64, 10_000, 100_000] {
        let opts = WalkOptions { l: 12, trials, seed, checkpoints: 4, threads, coordinates: None };
        let r = walk_statistics(&ig, &gens, &opts)?;
        for p in &r.series {
            prop.check(p.agrees, || format!("trials={trials} l={} mc={} exact={}", p.l, p.tv_monte_carlo, p.tv_exact));
        }
        reports.push(r);
    }
    Ok((vec![prop], serde_json::to_value(&reports).expect("serializes")))
}
