use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::additive::AdditiveGroup;
use crate::matgroups::MatrixGroup;
use crate::nottingham::Nottingham;
use crate::rings::Zpn;

const BUDGET: u128 = 1_000_000;

fn cyclic(n: u64) -> (AdditiveGroup<Zpn>, u32) {
    // Z/p^k for prime powers.
    let (p, k) = (2..=n).find_map(|p| (1..=20).find(|&k| p.pow(k) == n).map(|k| (p, k))).unwrap();
    (AdditiveGroup::new(Zpn::new(p, k).unwrap()), k)
}

fn indexed_cyclic(n: u64) -> IndexedGroup<AdditiveGroup<Zpn>> {
    let (g, k) = cyclic(n);
    IndexedGroup::new(&g, k, BUDGET).unwrap()
}

#[test]
fn cyclic_diameters() {
    let ig = indexed_cyclic(5);
    assert_eq!(Letters::symmetric(&ig, &[1], false).diameter().unwrap(), 2);
    assert_eq!(Letters::symmetric(&ig, &[1], true).diameter().unwrap(), 2);
    assert_eq!(Letters::symmetric(&ig, &[0, 1, 2, 3, 4], false).diameter().unwrap(), 1);
    let (g, k) = cyclic(25);
    assert_eq!(diameter_bfs(&g, k, &[1], BUDGET).unwrap(), 12);
    assert!(matches!(diameter_bfs(&g, k, &[5], BUDGET), Err(Error::NotGenerating { reached: 5, order: 25 })));
    assert!(matches!(Letters::symmetric(&indexed_cyclic(25), &[5], false).diameter(), Err(Error::NotGenerating { .. })));
}

#[test]
fn sl2_mod_3_diameter_two_ways() {
    let g = MatrixGroup::sl(2, Zpn::new(3, 1).unwrap()).unwrap();
    let s = g.standard_generators();
    let ig = IndexedGroup::new(&g, 1, BUDGET).unwrap();
    let a = Letters::symmetric(&ig, &s, true).diameter().unwrap();
    let b = diameter_bfs(&g, 1, &s, BUDGET).unwrap();
    assert_eq!(a, b);
    let t = TableGroup::from_indexed(&ig).unwrap();
    let idx: Vec<usize> = s.iter().map(|x| ig.index_of(x)).collect();
    assert_eq!(t.diameter(&idx), Some(a));
}

#[test]
fn worst_case_small() {
    assert_eq!(worst_case_exhaustive(&TableGroup::cyclic(2), 100).unwrap().diameter, 1);
    let w = worst_case_exhaustive(&TableGroup::cyclic(7), 100).unwrap();
    assert_eq!(w.diameter, 3);
    assert!(w.exhaustive);
    assert_eq!(worst_case_exhaustive(&TableGroup::cyclic(1), 100).unwrap().diameter, 0);
    // Brute force over every subset of Z/6 and Z/8.
    for n in [6usize, 8] {
        let t = TableGroup::cyclic(n);
        let brute = (1u32..1 << n)
            .filter_map(|mask| t.diameter(&(0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>()))
            .max()
            .unwrap();
        assert_eq!(worst_case_exhaustive(&t, 10_000).unwrap().diameter, brute);
    }
    let big = TableGroup::cyclic(201);
    assert!(matches!(worst_case_exhaustive(&big, 100), Err(Error::BudgetExceeded(_))));
    let s = worst_case_sampled(&TableGroup::cyclic(50), &[2, 3], 50, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(!s.exhaustive && s.diameter <= 25);
}

#[test]
fn worst_case_sl2_mod_3_brute() {
    let g = MatrixGroup::sl(2, Zpn::new(3, 1).unwrap()).unwrap();
    let t = TableGroup::from_indexed(&IndexedGroup::new(&g, 1, BUDGET).unwrap()).unwrap();
    let mut brute = 0;
    for a in 0..24 {
        for b in a..24 {
            if let Some(d) = t.diameter(&[a, b]) {
                brute = brute.max(d);
            }
            for c in b..24 {
                if let Some(d) = t.diameter(&[a, b, c]) {
                    brute = brute.max(d);
                }
            }
        }
    }
    assert_eq!(worst_case_exhaustive(&t, 100_000).unwrap().diameter, brute);
}

#[test]
fn extension_bounds() {
    let (z4, _) = cyclic(4);
    let r = extension_bound_check(&z4, 2, 1, ExtensionMode::Exhaustive, BUDGET).unwrap();
    assert_eq!((r.order_g, r.order_quotient, r.order_kernel), (4, 2, 2));
    assert_eq!((r.diam_g, r.diam_quotient, r.diam_kernel), (2, 1, 1));
    assert_eq!(r.bound, 4.0);
    assert!(r.holds);
    let r = extension_bound_check(&z4, 2, 2, ExtensionMode::Exhaustive, BUDGET).unwrap();
    assert_eq!(r.order_kernel, 1);
    assert_eq!(r.bound, r.diam_quotient as f64);
    assert!(r.holds);
    let sl = MatrixGroup::sl(2, Zpn::new(3, 2).unwrap()).unwrap();
    let r = extension_bound_check(&sl, 2, 1, ExtensionMode::Sampled { trials: 60, seed: 3 }, BUDGET).unwrap();
    assert_eq!((r.order_g, r.order_quotient, r.order_kernel), (648, 24, 27));
    assert!(r.diam_quotient_exhaustive && r.diam_kernel_exhaustive);
    assert_eq!(r.diam_kernel, 3);
    assert!(r.sets_checked > 20 && r.holds, "{r:?}");
}

#[test]
fn spectral_gap_closed_forms() {
    let ig = indexed_cyclic(3);
    let (rho, m) = spectral_gap(&Letters::multiset(&ig, &[1, 2]).unwrap()).unwrap();
    assert_eq!(m, GapMethod::Dense);
    assert!((rho - 0.5).abs() < 1e-12);
    for n in [5u64, 7, 9, 16] {
        let ig = indexed_cyclic(n);
        let all: Vec<u64> = (1..n).collect();
        let (rho, _) = spectral_gap(&Letters::multiset(&ig, &all).unwrap()).unwrap();
        assert!((rho - 1.0 / (n as f64 - 1.0)).abs() < 1e-12);
        let circ = (1..n).map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos()).fold(0.0f64, |a, c| a.max(c.abs()));
        let (rho, _) = spectral_gap(&Letters::multiset(&ig, &[1, n - 1]).unwrap()).unwrap();
        assert!((rho - circ).abs() < 1e-12);
        let lazy = (1..n)
            .map(|j| (1.0 + 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos()) / 3.0)
            .fold(0.0f64, |a, c| a.max(c.abs()));
        let (rho, _) = spectral_gap(&Letters::symmetric(&ig, &[1], true)).unwrap();
        assert!((rho - lazy).abs() < 1e-12);
    }
    assert!(matches!(Letters::multiset(&ig, &[1]), Err(Error::NotSymmetricSet)));
}

#[test]
fn gap_detects_periodicity_and_disconnection() {
    let ig = indexed_cyclic(4);
    let bipartite = spectral_gap(&Letters::symmetric(&ig, &[1], false)).unwrap().0;
    assert!((bipartite - 1.0).abs() < 1e-9);
    assert!(spectral_gap(&Letters::symmetric(&ig, &[1], true)).unwrap().0 < 1.0 - 1e-6);
    let split = spectral_gap(&Letters::symmetric(&ig, &[2], true)).unwrap().0;
    assert!((split - 1.0).abs() < 1e-9);
}

#[test]
fn power_iteration_matches_dense() {
    let g = MatrixGroup::sl(2, Zpn::new(5, 1).unwrap()).unwrap();
    let ig = IndexedGroup::new(&g, 1, BUDGET).unwrap();
    let letters = Letters::symmetric(&ig, &g.standard_generators(), true);
    let dense = spectral_gap(&letters).unwrap().0;
    let power = power_iteration(&letters, 1_000_000);
    assert!((dense - power).abs() < 1e-7, "{dense} {power}");
}

#[test]
fn mixing_profiles() {
    let ig = indexed_cyclic(3);
    let letters = Letters::multiset(&ig, &[1, 2]).unwrap();
    let f = mixing_profile(&letters, 0.5, 20, MixingMode::Float).unwrap();
    let r = mixing_profile(&letters, 0.5, 20, MixingMode::Rational).unwrap();
    assert!((f.points[0].deviation - 2.0 / 3.0).abs() < 1e-15);
    for (l, (a, b)) in f.points.iter().zip(&r.points).enumerate() {
        // p_l(0) = (1 + 2 (-1/2)^l) / 3.
        let expect = 2.0 / 3.0 * 0.5f64.powi(l as i32);
        assert!((a.deviation - expect).abs() < 1e-15);
        assert_eq!(b.deviation, expect);
        assert!(a.within_bound && b.within_bound);
    }
    assert_eq!(r.points[2].exact.as_deref(), Some("2/12"));
    assert!(f.non_increasing && r.non_increasing);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = MatrixGroup::sl(2, Zpn::new(3, 1).unwrap()).unwrap();
    let n5 = Nottingham::new(5, 3).unwrap();
    for i in 0..10 {
        let (ig_sl, ig_n) = (IndexedGroup::new(&g, 1, BUDGET).unwrap(), IndexedGroup::new(&n5, 3, BUDGET).unwrap());
        let letters = if i % 2 == 0 {
            let s: Vec<_> = (0..2).map(|_| g.random_element(&mut rng)).collect();
            Letters::symmetric(&ig_sl, &s, true)
        } else {
            let s: Vec<_> = (0..2).map(|_| n5.random_element(&mut rng)).collect();
            Letters::symmetric(&ig_n, &s, true)
        };
        let (rho, _) = spectral_gap(&letters).unwrap();
        let f = mixing_profile(&letters, rho, 30, MixingMode::Float).unwrap();
        let r = mixing_profile(&letters, rho, 30, MixingMode::Rational).unwrap();
        assert!(f.non_increasing && r.non_increasing && f.within_bound && r.within_bound);
        for (a, b) in f.points.iter().zip(&r.points) {
            assert!((a.deviation - b.deviation).abs() < 1e-12);
        }
    }
}

#[test]
fn sandwich_reports() {
    let g = MatrixGroup::sl(2, Zpn::new(5, 1).unwrap()).unwrap();
    let ig = IndexedGroup::new(&g, 1, BUDGET).unwrap();
    let r = spectral_report(&ig, &g.standard_generators(), Some((20, MixingMode::Rational))).unwrap();
    assert_eq!(r.order, 120);
    assert!(r.sandwich_holds, "{r:?}");
    assert!(r.mixing.unwrap().within_bound);
    let n = Nottingham::new(3, 5).unwrap();
    let ig = IndexedGroup::new(&n, 5, BUDGET).unwrap();
    let r = spectral_report(&ig, &n.standard_generators(), None).unwrap();
    assert_eq!(r.order, 81);
    assert!(r.sandwich_holds);
}

#[test]
fn walks() {
    let n = Nottingham::new(5, 3).unwrap();
    let ig = IndexedGroup::new(&n, 3, BUDGET).unwrap();
    let s = n.standard_generators();
    let mut opts = WalkOptions { l: 0, trials: 1000, seed: 7, checkpoints: 1, threads: 1, coordinates: None };
    let r = walk_statistics(&ig, &s, &opts).unwrap();
    assert!((r.series[0].tv_monte_carlo - (1.0 - 1.0 / 25.0)).abs() < 1e-12);
    assert_eq!(r.coordinates, Coordinates::NottinghamCoeffs);
    opts.l = 30;
    opts.checkpoints = 3;
    let a = walk_statistics(&ig, &s, &opts).unwrap();
    assert_eq!(a.series.iter().map(|p| p.l).collect::<Vec<_>>(), vec![10, 20, 30]);
    assert!(a.series.iter().all(|p| p.agrees), "{a:?}");
    opts.threads = 3;
    let b = walk_statistics(&ig, &s, &opts).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    opts.coordinates = Some(Coordinates::FirstKind);
    assert!(walk_statistics(&ig, &s, &opts).is_err());
}

#[test]
fn monte_carlo_error_scales_as_inverse_root() {
    let g = MatrixGroup::sl(2, Zpn::new(3, 1).unwrap()).unwrap();
    let ig = IndexedGroup::new(&g, 1, BUDGET).unwrap();
    let s = g.standard_generators();
    let scaled: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&trials| {
            let opts = WalkOptions { l: 200, trials, seed: 1, checkpoints: 1, threads: 1, coordinates: None };
            let p = &walk_statistics(&ig, &s, &opts).unwrap().series[0];
            (p.tv_monte_carlo - p.tv_exact).abs() * (trials as f64).sqrt()
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0, "{scaled:?}");
    assert_eq!(suggested_walk_length(0.5, 100), (10.0 * 2.0 * 100f64.ln()).ceil() as u32);
}
