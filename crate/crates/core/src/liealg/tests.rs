use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::group::{CommutatorOracle, FilteredGroup};
use crate::matgroups::MatrixGroup;
use crate::rings::{FqSeries, Zpn};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(5)
}

fn zp(p: u64, n: u32) -> Zpn {
    Zpn::new(p, n).unwrap()
}

fn resum<R: TruncatedRing>(alg: &LieAlgebra<R>, pairs: &[(LieVector<R>, LieVector<R>)]) -> LieVector<R> {
    pairs.iter().fold(alg.zero(), |acc, (a, b)| alg.add(&acc, &alg.bracket(a, b).unwrap()).unwrap())
}

#[test]
fn basis_round_trip() {
    let mut rng = rng();
    for (kind, d) in [(AlgebraKind::Sl, 3), (AlgebraKind::So, 5), (AlgebraKind::Sp, 6)] {
        let alg = LieAlgebra::new(kind, d, zp(5, 4)).unwrap();
        for _ in 0..50 {
            let x = alg.random(&mut rng);
            assert_eq!(alg.from_matrix(&alg.to_matrix(&x)), Some(x.clone()));
            assert_eq!(alg.from_json(&alg.to_json(&x)).unwrap(), x);
        }
    }
    let sl = LieAlgebra::new(AlgebraKind::Sl, 2, zp(3, 2)).unwrap();
    assert_eq!(sl.from_matrix(&[1, 0, 0, 1]), None);
    assert_eq!(sl.dim(), 3);
    assert_eq!(LieAlgebra::new(AlgebraKind::Sp, 4, zp(3, 2)).unwrap().dim(), 10);
    assert_eq!(LieAlgebra::new(AlgebraKind::So, 5, zp(3, 2)).unwrap().dim(), 10);
}

#[test]
fn bracket_examples() {
    let sl = LieAlgebra::new(AlgebraKind::Sl, 3, zp(3, 4)).unwrap();
    let e12 = sl.basis_vector("E_1_2").unwrap();
    let t = sl.add(&sl.basis_vector("E_2_1").unwrap(), &sl.basis_vector("E_3_2").unwrap()).unwrap();
    assert_eq!(sl.bracket(&e12, &t).unwrap(), sl.basis_vector("D_1_2").unwrap());
    assert_eq!(sl.bracket(&e12, &e12).unwrap(), sl.zero());

    let r = zp(5, 3);
    let sp = LieAlgebra::new(AlgebraKind::Sp, 4, r.clone()).unwrap();
    let half = r.inv(&2).unwrap();
    for i in 1..=2 {
        let b = sp.scale(&half, &sp.basis_vector(&format!("B_{i}_{i}")).unwrap());
        let c = sp.scale(&half, &sp.basis_vector(&format!("C_{i}_{i}")).unwrap());
        assert_eq!(sp.bracket(&b, &c).unwrap(), sp.basis_vector(&format!("A_{i}_{i}")).unwrap());
    }
    let so = LieAlgebra::new(AlgebraKind::So, 3, r).unwrap();
    assert!(matches!(so.bracket(&so.zero(), &sp.zero()), Err(Error::AlgebraMismatch(..))));
}

#[test]
fn so_identity_line_is_t1() {
    // (X_ij, sum X_{k,k+1}) = X_{i+1,j} + X_{i,j+1} - X_{i-1,j} - X_{i,j-1}, where X_ab = -X_ba
    // and terms with an index outside 1..d vanish.
    let d = 6;
    let r = zp(7, 2);
    let so = LieAlgebra::new(AlgebraKind::So, d, r.clone()).unwrap();
    let t1 = (1..d).fold(so.zero(), |acc, k| so.add(&acc, &so.basis_vector(&format!("X_{}_{}", k, k + 1)).unwrap()).unwrap());
    let x = |a: usize, b: usize| -> LieVector<Zpn> {
        if a == 0 || b == 0 || a > d || b > d || a == b {
            return so.zero();
        }
        if a < b {
            so.basis_vector(&format!("X_{a}_{b}")).unwrap()
        } else {
            so.scale(&r.from_i64(-1), &so.basis_vector(&format!("X_{b}_{a}")).unwrap())
        }
    };
    let neg = |v: LieVector<Zpn>| so.scale(&r.from_i64(-1), &v);
    for i in 1..=d {
        for j in i + 2..=d {
            let lhs = so.bracket(&x(i, j), &t1).unwrap();
            let rhs = [x(i + 1, j), x(i, j + 1), neg(x(i - 1, j)), neg(x(i, j - 1))]
                .iter()
                .fold(so.zero(), |acc, v| so.add(&acc, v).unwrap());
            assert_eq!(lhs, rhs, "i={i} j={j}");
        }
    }
}

#[test]
fn jacobi_and_bilinearity() {
    let mut rng = rng();
    for (kind, d, p) in [(AlgebraKind::Sl, 3, 2), (AlgebraKind::So, 4, 3), (AlgebraKind::Sp, 4, 5)] {
        let alg = LieAlgebra::new(kind, d, zp(p, 4)).unwrap();
        for _ in 0..1000 {
            let (x, y, z) = (alg.random(&mut rng), alg.random(&mut rng), alg.random(&mut rng));
            let b = |a: &LieVector<Zpn>, c: &LieVector<Zpn>| alg.bracket(a, c).unwrap();
            let jac = alg.add(&alg.add(&b(&x, &b(&y, &z)), &b(&y, &b(&z, &x))).unwrap(), &b(&z, &b(&x, &y))).unwrap();
            assert_eq!(jac, alg.zero());
            let c = alg.ring().random(&mut rng);
            assert_eq!(b(&alg.add(&x, &alg.scale(&c, &y)).unwrap(), &z), alg.add(&b(&x, &z), &alg.scale(&c, &b(&y, &z))).unwrap());
        }
    }
}

#[test]
fn bracket_decomposition_resums_exactly() {
    let mut rng = rng();
    let cases: Vec<(AlgebraKind, usize, u64, usize)> = vec![
        (AlgebraKind::Sl, 2, 3, 2),
        (AlgebraKind::Sl, 3, 2, 2),
        (AlgebraKind::Sl, 3, 3, 2),
        (AlgebraKind::Sl, 4, 5, 2),
        (AlgebraKind::So, 3, 3, 3),
        (AlgebraKind::So, 4, 3, 3),
        (AlgebraKind::So, 5, 7, 3),
        (AlgebraKind::So, 6, 5, 3),
        (AlgebraKind::Sp, 2, 3, 3),
        (AlgebraKind::Sp, 4, 5, 3),
        (AlgebraKind::Sp, 6, 3, 3),
        (AlgebraKind::Sp, 8, 3, 3),
    ];
    for (kind, d, p, bound) in cases {
        let alg = LieAlgebra::new(kind, d, zp(p, 3)).unwrap();
        assert!(alg.bracket_decompose(&alg.zero()).unwrap().is_empty());
        for _ in 0..200 {
            let x = alg.random(&mut rng);
            let pairs = alg.bracket_decompose(&x).unwrap();
            assert!(pairs.len() <= bound, "{kind:?} {d}");
            assert_eq!(resum(&alg, &pairs), x, "{kind:?} {d} p={p}");
        }
    }
    let alg = LieAlgebra::new(AlgebraKind::So, 4, FqSeries::new(9, 3).unwrap()).unwrap();
    for _ in 0..50 {
        let x = alg.random(&mut rng);
        assert_eq!(resum(&alg, &alg.bracket_decompose(&x).unwrap()), x);
    }
}

#[test]
fn sl2_uses_the_two_bracket_identity() {
    let r = zp(3, 4);
    let alg = LieAlgebra::new(AlgebraKind::Sl, 2, r.clone()).unwrap();
    let mut rng = rng();
    for _ in 0..100 {
        let (a, b, c) = (1 + 3 * rng.gen_range(0..27), 1 + 3 * rng.gen_range(0..27), 1 + 3 * rng.gen_range(0..27));
        let x = alg.from_matrix(&[a, b, c, r.neg(&a)]).unwrap();
        let pairs = alg.bracket_decompose(&x).unwrap();
        assert_eq!(pairs.len(), 2);
        let half = r.inv(&2).unwrap();
        assert_eq!(alg.to_matrix(&pairs[0].0), vec![0, r.neg(&b), c, 0]);
        assert_eq!(alg.to_matrix(&pairs[0].1), vec![half, 0, 0, r.neg(&half)]);
        assert_eq!(alg.to_matrix(&pairs[1].0), vec![0, a, 0, 0]);
        assert_eq!(alg.to_matrix(&pairs[1].1), vec![0, 0, 1, 0]);
        assert_eq!(resum(&alg, &pairs), x);
    }
}

#[test]
fn unsupported_decompositions() {
    let sl2 = LieAlgebra::new(AlgebraKind::Sl, 2, zp(2, 3)).unwrap();
    let x = sl2.basis_vector("E_1_2").unwrap();
    assert!(matches!(sl2.bracket_decompose(&x), Err(Error::UnsupportedCharacteristic(_))));
    let sp = LieAlgebra::new(AlgebraKind::Sp, 4, zp(2, 3));
    assert!(sp.is_err() || matches!(sp.unwrap().bracket_decompose(&x), Err(_)));
    let so2 = LieAlgebra::new(AlgebraKind::So, 2, zp(3, 3)).unwrap();
    assert!(so2.bracket_decompose(&so2.zero()).is_err());
}

#[test]
fn linearize_and_lift_examples() {
    let r = zp(3, 6);
    let sl = LieAlgebra::new(AlgebraKind::Sl, 2, r.clone()).unwrap();
    let e12 = sl.basis_vector("E_1_2").unwrap();
    assert_eq!(linearize(&sl, &[1, 9, 0, 1], 2).unwrap(), e12);
    assert_eq!(linearize(&sl, &[1, 0, 0, 1], 3).unwrap(), sl.zero());
    assert_eq!(lift(&sl, &e12, 1).unwrap(), vec![1, 3, 0, 1]);
    assert_eq!(lift(&sl, &sl.zero(), 2).unwrap(), vec![1, 0, 0, 1]);
    assert!(matches!(linearize(&sl, &[1, 3, 0, 1], 2), Err(Error::NotDeepEnough { depth: 1, required: 2 })));
    assert!(matches!(linearize(&sl, &[1, 0, 0, 1], 4), Err(Error::TruncationTooShallow(_))));
    assert!(matches!(lift(&sl, &e12, 4), Err(Error::TruncationTooShallow(_))));

    let r5 = zp(5, 4);
    let so = LieAlgebra::new(AlgebraKind::So, 3, r5.clone()).unwrap();
    let x12 = so.basis_vector("X_1_2").unwrap();
    let g = lift(&so, &x12, 1).unwrap();
    let group = MatrixGroup::so(3, r5.clone()).unwrap();
    assert!(group.is_member(&g));
    let approx = [1, 5, 0, r5.from_i64(-5), 1, 0, 0, 0, 1];
    assert!(g.iter().zip(approx).all(|(a, b)| r5.project(a, 2) == r5.project(&b, 2)));

    let r56 = zp(5, 6);
    let so6 = LieAlgebra::new(AlgebraKind::So, 3, r56.clone()).unwrap();
    let g = lift(&so6, &so6.basis_vector("X_1_2").unwrap(), 2).unwrap();
    let back = linearize(&so6, &g, 2).unwrap();
    assert_eq!(back.coords().iter().map(|c| r56.project(c, 2)).collect::<Vec<_>>(), vec![1, 0, 0]);
}

#[test]
fn lift_round_trip_and_membership() {
    let mut rng = rng();
    fn run<R: TruncatedRing>(group: MatrixGroup<R>, rng: &mut ChaCha8Rng) {
        let alg = LieAlgebra::new(group.algebra_kind(), group.d(), group.ring().clone()).unwrap();
        let n = group.truncation();
        let r = group.ring();
        for _ in 0..100 {
            let l = rng.gen_range(1..=n / 2);
            let x = alg.random(rng);
            let g = lift(&alg, &x, l).unwrap();
            assert!(group.is_member(&g), "{}", group.descriptor());
            assert!(group.depth(&g) >= l);
            let y = linearize(&alg, &g, l).unwrap();
            let proj = |v: &LieVector<R>| v.coords().iter().map(|c| r.project(c, l)).collect::<Vec<_>>();
            assert_eq!(proj(&y), proj(&x), "{}", group.descriptor());
        }
    }
    run(MatrixGroup::sl(3, zp(2, 6)).unwrap(), &mut rng);
    run(MatrixGroup::sl(2, zp(3, 8)).unwrap(), &mut rng);
    run(MatrixGroup::so(3, zp(5, 6)).unwrap(), &mut rng);
    run(MatrixGroup::so(4, zp(3, 6)).unwrap(), &mut rng);
    run(MatrixGroup::sp(4, zp(5, 6)).unwrap(), &mut rng);
    run(MatrixGroup::sp(2, FqSeries::new(9, 6).unwrap()).unwrap(), &mut rng);
}

#[test]
fn commutator_decomposition_examples() {
    fn run<R: TruncatedRing>(group: MatrixGroup<R>, n: u32, m: u32, trials: usize, rng: &mut ChaCha8Rng) {
        let alg = LieAlgebra::new(group.algebra_kind(), group.d(), group.ring().clone()).unwrap();
        for _ in 0..trials {
            let r = group.random_in_filtration(n + m, rng);
            let pairs = commutator_decompose(&alg, &r, n, m).unwrap();
            assert!(pairs.len() <= alg.arity());
            let mut prod = group.identity();
            for (g, h) in &pairs {
                assert!(group.is_member(g) && group.is_member(h));
                assert!(group.depth(g) >= n && group.depth(h) >= m);
                prod = group.mul(&prod, &group.commutator(g, h));
            }
            let err = group.mul(&prod, &group.inv(&r));
            assert!(group.depth(&err) >= 2 * n + m, "{} n={n} m={m}", group.descriptor());
        }
        assert!(commutator_decompose(&alg, &group.identity(), n, m).unwrap().is_empty());
    }
    let mut rng = rng();
    run(MatrixGroup::sl(3, zp(3, 9)).unwrap(), 3, 3, 100, &mut rng);
    run(MatrixGroup::sp(4, zp(5, 9)).unwrap(), 3, 3, 100, &mut rng);
    run(MatrixGroup::sl(2, zp(3, 8)).unwrap(), 2, 4, 100, &mut rng);
    run(MatrixGroup::so(3, zp(5, 7)).unwrap(), 2, 3, 100, &mut rng);
    run(MatrixGroup::so(5, zp(3, 4)).unwrap(), 1, 2, 50, &mut rng);
    run(MatrixGroup::sl(2, FqSeries::new(9, 5).unwrap()).unwrap(), 1, 2, 50, &mut rng);
}

#[test]
fn commutator_decomposition_errors() {
    let group = MatrixGroup::sl(3, zp(3, 9)).unwrap();
    let alg = LieAlgebra::new(AlgebraKind::Sl, 3, zp(3, 9)).unwrap();
    let mut rng = rng();
    let r = group.random_in_filtration(3, &mut rng);
    assert!(matches!(commutator_decompose(&alg, &r, 1, 3), Err(Error::BadLevelPair { .. })));
    assert!(matches!(commutator_decompose(&alg, &r, 2, 2), Err(Error::DepthViolation { .. })
        | Err(Error::TruncationTooShallow(_))));
    let shallow = group.random_element(&mut rng);
    if group.depth(&shallow) < 4 {
        assert!(matches!(commutator_decompose(&alg, &shallow, 2, 2), Err(Error::DepthViolation { .. })));
    }
    assert!(matches!(commutator_decompose(&alg, &r, 3, 4), Err(Error::TruncationTooShallow(_))));
    let oracle = MatrixOracle::new(&group).unwrap();
    assert_eq!(oracle.arity(), 2);
    assert!(oracle.admissible(2, 4) && !oracle.admissible(2, 5) && !oracle.admissible(0, 0));
}
