use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::group::{closure, enumerate_quotient};
use crate::rings::{FqSeries, Zpn};

fn sl2(p: u64, n: u32) -> MatrixGroup<Zpn> {
    MatrixGroup::sl(2, Zpn::new(p, n).unwrap()).unwrap()
}

/// Independent BFS eccentricity over the Cayley graph of `G/K_level`, by levels.
fn bfs_eccentricity<G: FilteredGroup>(g: &G, level: u32, gens: &[G::Elem]) -> (usize, usize) {
    let t = g.truncated(level);
    let mut letters: Vec<G::Elem> = gens.iter().map(|s| g.project(s, level)).collect();
    letters.extend(gens.iter().map(|s| t.inv(&g.project(s, level))));
    let mut seen = std::collections::HashSet::new();
    seen.insert(t.coset_key(&t.identity(), level));
    let mut frontier = vec![t.identity()];
    let mut radius = 0;
    loop {
        let mut next = Vec::new();
        for x in &frontier {
            for s in &letters {
                let y = t.mul(x, s);
                if seen.insert(t.coset_key(&y, level)) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return (seen.len(), radius);
        }
        radius += 1;
        frontier = next;
    }
}

#[test]
fn word_algebra() {
    let g = sl2(3, 2);
    let s = GeneratingSet::standard(&g);
    let w = Word { gens: "standard".into(), ops: vec![(0, 1), (1, -1), (0, 1)] };
    assert_eq!(w.inverse().len(), w.len());
    assert_eq!(Word::commutator(&w, &w.inverse()).unwrap().len(), 12);
    let e = w.concat(&w.inverse()).unwrap();
    assert!(g.is_identity(&e.evaluate(&g, &s).unwrap()));
    assert!(e.cancel_adjacent().is_empty());
    assert!(g.is_identity(&Word::new("standard").evaluate(&g, &s).unwrap()));
    assert_eq!(Word::letter("standard", 1, 1).evaluate(&g, &s).unwrap(), s.elems[1]);
    let ab = w.concat(&Word::letter("standard", 1, -1)).unwrap();
    let lhs = ab.evaluate(&g, &s).unwrap();
    let rhs = g.mul(&w.evaluate(&g, &s).unwrap(), &g.inv(&s.elems[1]));
    assert_eq!(lhs, rhs);
    assert!(matches!(Word::letter("standard", 99, 1).evaluate(&g, &s), Err(Error::IndexOutOfRange(_))));
    assert!(w.concat(&Word::new("other")).is_err());
    let v = w.to_json();
    assert_eq!(v, serde_json::json!({"gens": "standard", "ops": [[0, 1], [1, -1], [0, 1]]}));
    assert_eq!(Word::from_json(&v).unwrap(), w);
    assert!(Word::from_json(&serde_json::json!({"gens": "s", "ops": [[0, 2]]})).is_err());
}

#[test]
fn dag_flatten_matches_explicit_words() {
    let g = sl2(5, 3);
    let s = GeneratingSet::sampled(&g, 3, 1);
    let a = Node::leaf(vec![(0, 1), (1, 1)]);
    let b = Node::leaf(vec![(2, -1)]);
    let c = Node::commutator(a.clone(), Node::concat(vec![b.clone(), a.clone()]));
    let root = Node::concat(vec![c.clone(), Node::commutator(c, b)]);
    let dag = WordDag { gens: s.id.clone(), root };
    let flat = dag.flatten(1000).unwrap();
    assert_eq!(flat.len() as u128, dag.len());
    let wa = Word { gens: s.id.clone(), ops: vec![(0, 1), (1, 1)] };
    let wb = Word { gens: s.id.clone(), ops: vec![(2, -1)] };
    let wc = Word::commutator(&wa, &wb.concat(&wa).unwrap()).unwrap();
    let expect = wc.concat(&Word::commutator(&wc, &wb).unwrap()).unwrap();
    assert_eq!(flat, expect);
    assert_eq!(dag.evaluate(&g, &s), flat.evaluate(&g, &s).unwrap());
    assert!(dag.flatten(3).is_err());
}

#[test]
fn base_table_sl2_mod_3() {
    let g = sl2(3, 1);
    let s = GeneratingSet::standard(&g);
    let table = build_base_table(&g, 1, &s, 1000).unwrap();
    assert_eq!(table.len(), 24);
    let (count, radius) = bfs_eccentricity(&g, 1, &s.elems);
    assert_eq!(count, 24);
    assert_eq!(table.l0, radius);
    for (key, w) in table.words() {
        assert_eq!(&g.coset_key(&w.evaluate(&g, &s).unwrap(), 1), key);
    }
}

#[test]
fn base_table_whole_group_has_length_one() {
    let g = sl2(3, 1);
    let all = enumerate_quotient(&g, 1, 1000).unwrap();
    let s = GeneratingSet::new("all", all);
    let table = build_base_table(&g, 1, &s, 1000).unwrap();
    assert_eq!(table.l0, 1);
}

#[test]
fn base_table_rejects_proper_subgroups() {
    let g = sl2(5, 2);
    let upper = g.from_i64(&[1, 1, 0, 1]).unwrap();
    let s = GeneratingSet::new("upper", vec![upper]);
    assert!(matches!(build_base_table(&g, 1, &s, 1000), Err(Error::NotGenerating { reached: 5, order: 120 })));
    let s = GeneratingSet::standard(&g);
    assert!(matches!(build_base_table(&g, 2, &s, 100), Err(Error::BudgetExceeded(_))));
}

#[test]
fn table_agrees_with_closure() {
    let g = MatrixGroup::so(3, Zpn::new(5, 2).unwrap()).unwrap();
    let s = GeneratingSet::standard(&g);
    let t = build_base_table(&g, 2, &s, 100_000).unwrap();
    assert_eq!(t.len(), closure(&g, &s.elems, 100_000).unwrap().len());
}

#[test]
fn schedules() {
    let g = sl2(3, 27);
    let o = g.commutator_oracle().unwrap();
    let s = plan_schedule(Plan::Dyadic, o.as_ref(), 16, None).unwrap();
    assert_eq!((s.n0, s.base), (1, 2));
    let bounds: Vec<(u32, u32)> = s.steps.iter().map(|s| (s.from, s.to)).collect();
    assert_eq!(bounds, vec![(2, 3), (3, 4), (4, 6), (6, 8), (8, 12), (12, 16)]);
    for st in &s.steps {
        assert_eq!(st.n + st.m, st.from);
        assert!(2 * st.n + st.m >= st.to && o.admissible(st.n, st.m));
    }
    let t = plan_schedule(Plan::Triadic, o.as_ref(), 27, None).unwrap();
    let bounds: Vec<(u32, u32)> = t.steps.iter().map(|s| (s.from, s.to)).collect();
    assert_eq!(bounds, vec![(3, 4), (4, 5), (5, 6), (6, 8), (8, 9), (9, 12), (12, 15), (15, 18), (18, 24), (24, 27)]);
    assert!(plan_schedule(Plan::Dyadic, o.as_ref(), 2, None).unwrap().steps.is_empty());
    assert_eq!(scales(16, 2, 2), 3);
    assert_eq!(scales(27, 6, 3), 2);
    assert_eq!(scales(5, 6, 3), 0);
}

#[test]
fn nottingham_needs_triadic() {
    let g = Nottingham::new(5, 27).unwrap();
    let o = g.commutator_oracle().unwrap();
    assert!(matches!(plan_schedule(Plan::Dyadic, o.as_ref(), 27, None), Err(Error::OracleLevelRejected { .. })));
    let s = plan_schedule(Plan::Triadic, o.as_ref(), 27, None).unwrap();
    assert_eq!((s.n0, s.base), (2, 6));
    assert!(s.steps.iter().all(|st| o.admissible(st.n, st.m) && st.m - st.n == 2));
    assert!(matches!(plan_schedule(Plan::Triadic, o.as_ref(), 27, Some(1)), Err(Error::OracleLevelRejected { .. })));
}

#[test]
fn identity_compiles_to_empty_word() {
    let g = sl2(3, 8);
    let s = GeneratingSet::standard(&g);
    let c = compile(&g, &s, &g.identity(), 8, Plan::Dyadic, CompileOptions::default()).unwrap();
    assert!(c.word.is_empty());
    assert_eq!(c.certificate.residual_depth, 8);
}

#[test]
fn sl2_dyadic_random_targets() {
    let g = sl2(3, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = GeneratingSet::sampled(&g, 2, 5);
    let comp = Compiler::new(&g, &s, 8, Plan::Dyadic, CompileOptions::default()).unwrap();
    for _ in 0..10 {
        let t = g.random_element(&mut rng);
        let c = comp.compile(&t, &CompileOptions::default()).unwrap();
        let w = c.word.flatten(u128::MAX).unwrap();
        let v = w.evaluate(&g, &s).unwrap();
        assert!(g.depth(&g.mul(&t, &g.inv(&v))) >= 8);
        assert_eq!(c.certificate.length, w.len() as u128);
        assert!(c.certificate.within_budget, "{:?}", c.certificate);
        assert_eq!(c.certificate.b, 44);
    }
}

#[test]
fn base_level_passthrough() {
    let g = sl2(5, 4);
    let s = GeneratingSet::standard(&g);
    let comp = Compiler::new(&g, &s, 2, Plan::Dyadic, CompileOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let t = g.random_element(&mut rng);
        let c = comp.compile(&t, &CompileOptions::default()).unwrap();
        let w = c.word.flatten(1000).unwrap();
        let table = comp.table().get(&g.coset_key(&t, 2)).unwrap();
        assert!(g.depth(&g.mul(&t, &g.inv(&w.evaluate(&g, &s).unwrap()))) >= 2);
        if g.depth(&t) < 2 {
            assert_eq!(&w, table);
        }
    }
}

#[test]
fn other_families_compile() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let so = MatrixGroup::so(3, Zpn::new(5, 6).unwrap()).unwrap();
    let sl3 = MatrixGroup::sl(3, Zpn::new(2, 6).unwrap()).unwrap();
    let sl2 = MatrixGroup::sl(2, FqSeries::new(9, 5).unwrap()).unwrap();
    fn run<G: HasOracle>(g: &G, n: u32, rng: &mut ChaCha8Rng) {
        let s = GeneratingSet::standard(g);
        let t = g.random_element(rng);
        let c = compile(g, &s, &t, n, Plan::Dyadic, CompileOptions::default()).unwrap();
        let v = c.word.evaluate(g, &s);
        assert!(g.depth(&g.mul(&g.project(&t, n), &g.inv(&g.project(&v, n)))) >= n);
        assert!(c.certificate.residual_depth >= n);
    }
    run(&so, 6, &mut rng);
    run(&sl3, 6, &mut rng);
    run(&sl2, 5, &mut rng);
}

#[test]
fn nottingham_triadic_27() {
    let g = Nottingham::new(5, 27).unwrap();
    let s = GeneratingSet::standard(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = CompileOptions::default();
    let comp = Compiler::new(&g, &s, 27, Plan::Triadic, opts).unwrap();
    for _ in 0..3 {
        let t = g.random_element(&mut rng);
        let c = comp.compile(&t, &opts).unwrap();
        assert!(c.certificate.residual_depth >= 27);
        assert_eq!(c.certificate.a, 2);
        let v = c.word.evaluate(&g, &s);
        assert!(g.depth(&g.mul(&t, &g.inv(&v))) >= 27);
    }
}

#[test]
fn compile_errors() {
    let g = sl2(3, 4);
    let s = GeneratingSet::standard(&g);
    assert!(matches!(
        compile(&g, &s, &g.identity(), 5, Plan::Dyadic, CompileOptions::default()),
        Err(Error::PrecisionExceedsTruncation { .. })
    ));
    let a = AdditiveGroup::new(Zpn::new(3, 4).unwrap());
    let sa = GeneratingSet::standard(&a);
    assert!(compile(&a, &sa, &1, 4, Plan::Dyadic, CompileOptions::default()).is_err());
}

