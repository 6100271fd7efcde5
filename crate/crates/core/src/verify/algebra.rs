use rand::Rng;

use super::Property;
use crate::group::{CommutatorOracle, Family, FilteredGroup};
use crate::liealg::{AlgebraKind, LieAlgebra, LieVector, MatrixOracle};
use crate::matgroups::{matrix, MatrixGroup};
use crate::rings::{hensel_sqrt, RingElem, TruncatedRing};

/// Ring axioms, unit inverses, the valuation, reduction maps, exact division and Hensel square
/// roots on `samples` random elements each.
pub fn ring_properties<R: TruncatedRing, Rn: Rng + ?Sized>(ring: &R, samples: u64, rng: &mut Rn) -> Vec<Property> {
    let tag = ring.descriptor().to_string();
    let n = ring.truncation();
    let show = |a: &R::Elem| ring.to_json(a).to_string();

    let mut axioms = Property::new(format!("ring_axioms [{tag}]"));
    let mut units = Property::new(format!("unit_inverse [{tag}]"));
    let mut valuation = Property::new(format!("valuation [{tag}]"));
    let mut projection = Property::new(format!("projection_homomorphism [{tag}]"));
    let mut division = Property::new(format!("exact_division [{tag}]"));
    for _ in 0..samples {
        let (a, b, c) = (ring.random(rng), ring.random(rng), ring.random(rng));
        let ok = ring.add(&ring.add(&a, &b), &c) == ring.add(&a, &ring.add(&b, &c))
            && ring.mul(&ring.mul(&a, &b), &c) == ring.mul(&a, &ring.mul(&b, &c))
            && ring.add(&a, &b) == ring.add(&b, &a)
            && ring.mul(&a, &b) == ring.mul(&b, &a)
            && ring.mul(&a, &ring.add(&b, &c)) == ring.add(&ring.mul(&a, &b), &ring.mul(&a, &c))
            && ring.add(&a, &ring.neg(&a)) == ring.zero()
            && ring.sub(&a, &b) == ring.add(&a, &ring.neg(&b))
            && ring.mul(&a, &ring.one()) == a;
        axioms.check(ok, || format!("a={} b={} c={}", show(&a), show(&b), show(&c)));

        let ok = match ring.inv(&a) {
            Some(x) => ring.is_unit(&a) && ring.mul(&a, &x) == ring.one(),
            None => !ring.is_unit(&a),
        };
        units.check(ok, || format!("a={}", show(&a)));

        let (va, vb) = (ring.valuation(&a), ring.valuation(&b));
        let k = rng.gen_range(0..n);
        let ok = ring.valuation(&ring.mul(&a, &b)) == (va + vb).min(n)
            && ring.valuation(&ring.add(&a, &b)) >= va.min(vb)
            && ring.valuation(&ring.uniformizer_pow(k)) == k;
        valuation.check(ok, || format!("a={} b={} k={k}", show(&a), show(&b)));

        let m = rng.gen_range(1..=n);
        let t = ring.truncated(m);
        let (pa, pb) = (ring.project(&a, m), ring.project(&b, m));
        let ok = ring.project(&ring.add(&a, &b), m) == t.add(&pa, &pb)
            && ring.project(&ring.mul(&a, &b), m) == t.mul(&pa, &pb)
            && ring.valuation(&ring.sub(&a, &ring.embed_from(&pa))) >= m;
        projection.check(ok, || format!("a={} b={} m={m}", show(&a), show(&b)));

        let shifted = ring.mul(&ring.uniformizer_pow(k), &c);
        let ok = ring.mul(&ring.uniformizer_pow(k), &ring.shift_down(&shifted, k)) == shifted;
        division.check(ok, || format!("c={} k={k}", show(&c)));
    }
    let mut out = vec![axioms, units, valuation, projection, division];

    let mut sqrt = Property::new(format!("hensel_sqrt [{tag}]"));
    if ring.descriptor().p == 2 {
        sqrt = sqrt.with_note("not applicable in characteristic 2");
    } else {
        for _ in 0..samples {
            let x = loop {
                let x = ring.random(rng);
                if ring.is_unit(&x) {
                    break x;
                }
            };
            let a = RingElem::new(ring, ring.mul(&x, &x));
            let seed = RingElem::new(ring, ring.from_residue(ring.residue(&x)));
            let ok = match hensel_sqrt(&a, &seed) {
                Ok(b) => {
                    ring.mul(b.value(), b.value()) == *a.value() && ring.residue(b.value()) == ring.residue(&x)
                }
                Err(_) => false,
            };
            sqrt.check(ok, || format!("x={}", show(&x)));
        }
    }
    out.push(sqrt);
    out
}

/// The commutator law `[K_n, K_m] ⊆ K_{n+m}`, its refinement
/// `[g, h]^-1 [g', h'] ∈ K_{min(m + n', m' + n)}` for `g' ∈ g K_{n'}`, `h' ∈ h K_{m'}`, normality
/// of `K_n` and depth invariance under inversion.
pub fn filtration_properties<G: FilteredGroup, Rn: Rng + ?Sized>(g: &G, samples: u64, rng: &mut Rn) -> Vec<Property> {
    let tag = g.descriptor().to_string();
    let cap = g.truncation();
    let show = |x: &G::Elem| g.element_to_json(x).to_string();

    let mut law = Property::new(format!("commutator_depth [{tag}]"));
    let mut refine = Property::new(format!("commutator_refinement [{tag}]"));
    let mut normal = Property::new(format!("normality [{tag}]"));
    let mut inverse = Property::new(format!("inverse_depth [{tag}]"));
    let mut member = Property::new(format!("membership [{tag}]"));
    for _ in 0..samples {
        let (n, m) = (rng.gen_range(1..=cap), rng.gen_range(1..=cap));
        let x = g.random_in_filtration(n, rng);
        let y = g.random_in_filtration(m, rng);
        let c = g.commutator(&x, &y);
        let ok = g.depth(&x) >= n && g.depth(&y) >= m && g.depth(&c) >= (n + m).min(cap);
        law.check(ok, || format!("n={n} m={m} g={} h={}", show(&x), show(&y)));

        let (n2, m2) = (rng.gen_range(n..=cap), rng.gen_range(m..=cap));
        let x2 = g.mul(&x, &g.random_in_filtration(n2, rng));
        let y2 = g.mul(&y, &g.random_in_filtration(m2, rng));
        let d = g.depth(&g.mul(&g.inv(&c), &g.commutator(&x2, &y2)));
        let need = (m + n2).min(m2 + n).min(cap);
        refine.check(d >= need, || {
            format!("n={n} m={m} n'={n2} m'={m2} g={} h={} g'={} h'={}", show(&x), show(&y), show(&x2), show(&y2))
        });

        let z = g.random_element(rng);
        let conj = g.mul(&g.mul(&g.inv(&z), &x), &z);
        normal.check(g.depth(&conj) >= n, || format!("n={n} x={} z={}", show(&x), show(&z)));
        inverse.check(g.depth(&g.inv(&x)) == g.depth(&x), || format!("x={}", show(&x)));
        member.check(g.is_member(&z) && g.is_member(&conj), || format!("z={} x={}", show(&z), show(&x)));
    }
    vec![law, refine, normal, inverse, member]
}

fn family_of(kind: AlgebraKind) -> Family {
    match kind {
        AlgebraKind::Sl => Family::SL,
        AlgebraKind::So => Family::SO,
        AlgebraKind::Sp => Family::Sp,
    }
}

fn sum_of_brackets<R: TruncatedRing>(
    alg: &LieAlgebra<R>,
    pairs: &[(LieVector<R>, LieVector<R>)],
) -> crate::Result<LieVector<R>> {
    pairs.iter().try_fold(alg.zero(), |acc, (a, b)| alg.add(&acc, &alg.bracket(a, b)?))
}

/// Bracket decomposition, the Jacobi identity and agreement with matrix commutators for
/// `sl_2, sl_3, so_3, so_5, sp_4` over `ring`, and the commutator oracle of the matching matrix
/// group for every level pair `n <= m <= 2n` with `2n + m <= N`.
pub fn lie_properties<R: TruncatedRing, Rn: Rng + ?Sized>(
    ring: &R,
    samples: u64,
    oracle_samples: u64,
    rng: &mut Rn,
) -> Vec<Property> {
    let algebras = [(AlgebraKind::Sl, 2), (AlgebraKind::Sl, 3), (AlgebraKind::So, 3), (AlgebraKind::So, 5), (AlgebraKind::Sp, 4)];
    let mut out = Vec::new();
    for (kind, d) in algebras {
        let tag = format!("{}_{d} over {}", kind.name(), ring.descriptor());
        let alg = match LieAlgebra::new(kind, d, ring.clone()) {
            Ok(a) => a,
            Err(e) => {
                out.push(Property::new(format!("bracket_decompose [{tag}]")).with_note(format!("skipped: {e}")));
                continue;
            }
        };
        let most = if kind == AlgebraKind::Sl { 2 } else { 3 };
        let mut decompose = Property::new(format!("bracket_decompose [{tag}]"))
            .with_note(format!("at most {most} brackets per element"));
        let mut jacobi = Property::new(format!("jacobi [{tag}]"));
        let mut matrices = Property::new(format!("bracket_matches_matrices [{tag}]"));
        for _ in 0..samples {
            let x = alg.random(rng);
            match alg.bracket_decompose(&x) {
                Ok(pairs) => {
                    let ok = pairs.len() <= most && sum_of_brackets(&alg, &pairs).is_ok_and(|s| s.coords() == x.coords());
                    decompose.check(ok, || format!("x={x} pairs={}", pairs.len()));
                }
                Err(e) => decompose.fail(format!("x={x}: {e}")),
            }
            let (y, z) = (alg.random(rng), alg.random(rng));
            let b = |u: &LieVector<R>, v: &LieVector<R>| alg.bracket(u, v).expect("same algebra");
            let total = [b(&x, &b(&y, &z)), b(&y, &b(&z, &x)), b(&z, &b(&x, &y))]
                .iter()
                .fold(alg.zero(), |acc, t| alg.add(&acc, t).expect("same algebra"));
            jacobi.check(total.coords() == alg.zero().coords(), || format!("x={x} y={y} z={z}"));
            let direct = matrix::bracket(ring, d, &alg.to_matrix(&x), &alg.to_matrix(&y));
            matrices.check(alg.to_matrix(&b(&x, &y)) == direct, || format!("x={x} y={y}"));
        }
        out.extend([decompose, jacobi, matrices]);

        let mut oracle_prop = Property::new(format!("commutator_oracle [{tag}]"));
        let group = MatrixGroup::new(family_of(kind), d, ring.clone());
        let oracle = group.as_ref().map_err(Clone::clone).and_then(MatrixOracle::new);
        match (group, oracle) {
            (Ok(group), Ok(oracle)) => check_oracle(&group, &oracle, oracle_samples, rng, &mut oracle_prop),
            (Err(e), _) | (_, Err(e)) => oracle_prop = oracle_prop.with_note(format!("skipped: {e}")),
        }
        out.push(oracle_prop);
    }
    out
}

/// Every admissible `(n, m)` with `2n + m <= N`: the returned commutators lie at the right depths,
/// number at most the oracle's arity, and multiply to the input modulo `K_{2n+m}`.
pub(crate) fn check_oracle<G: FilteredGroup, Rn: Rng + ?Sized>(
    g: &G,
    oracle: &dyn CommutatorOracle<G>,
    samples: u64,
    rng: &mut Rn,
    prop: &mut Property,
) {
    let cap = g.truncation();
    let mut pairs_checked = 0;
    for n in 1..=cap / 3 {
        for m in n..=(2 * n).min(cap - 2 * n) {
            if !oracle.admissible(n, m) {
                continue;
            }
            pairs_checked += 1;
            for _ in 0..samples {
                let r = g.random_in_filtration(n + m, rng);
                let show = || format!("n={n} m={m} r={}", g.element_to_json(&r));
                match oracle.decompose(&r, n, m) {
                    Ok(pairs) => {
                        let prod = pairs.iter().fold(g.identity(), |acc, (x, y)| g.mul(&acc, &g.commutator(x, y)));
                        let ok = pairs.len() <= oracle.arity()
                            && pairs.iter().all(|(x, y)| g.depth(x) >= n && g.depth(y) >= m)
                            && g.depth(&g.mul(&g.inv(&prod), &r)) >= 2 * n + m;
                        prop.check(ok, show);
                    }
                    Err(e) => prop.fail(format!("{}: {e}", show())),
                }
            }
        }
    }
    prop.note = Some(format!("{pairs_checked} level pairs, {samples} inputs each"));
}
