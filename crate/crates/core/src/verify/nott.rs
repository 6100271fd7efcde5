use std::collections::HashSet;

use rand::Rng;

use super::Property;
use crate::error::Result;
use crate::group::FilteredGroup;
use crate::nottingham::{commutator_decompose_nott, Nottingham};
use crate::rings::FqElem;

const ONE: FqElem = FqElem(1);

/// Generator calculus of the Nottingham group, checked by composition of truncated series.
///
/// Exhaustive over `F_q` where the property is stated for generators: products
/// `e_{n,λ} e_{n,μ}` for `n <= 8`, commutators `[e_{n,λ}, e_{m,μ}]` for `n + m <= N/2`, and the
/// coset hit by `[K_n, K_m]` in `K_{n+m}/K_{n+m+1}` for all `n + m < N`. Random elements are used
/// for the leading-term convention, the abelian sections, the depth law and the oracle.
pub fn nottingham_properties<Rn: Rng + ?Sized>(
    g: &Nottingham,
    samples: u64,
    oracle_samples: u64,
    rng: &mut Rn,
) -> Result<Vec<Property>> {
    let tag = g.descriptor().to_string();
    let cap = g.truncation();
    let f = g.field();
    let p = g.p() as u32;
    let field: Vec<FqElem> = f.elements().collect();
    let scalar = |k: i64| f.from_int(k);
    let show = |x: &Vec<FqElem>| g.format(x);
    let e = |n: u32, c: FqElem| g.generator(n, c).expect("level in range");
    let coef = |x: &[FqElem], k: u32| if k == 1 { ONE } else { g.coefficient(x, k) };
    let mut out = Vec::new();

    let mut product = Property::new(format!("generator_product [{tag}]"));
    for n in 1..=8.min(cap - 1) {
        for &l in &field {
            for &m in &field {
                let lhs = g.mul(&e(n, l), &e(n, m));
                let d = g.depth(&g.mul(&g.inv(&e(n, f.add(l, m))), &lhs));
                product.check(d >= (2 * n).min(cap), || format!("n={n} λ={} μ={}", l.0, m.0));
            }
        }
    }
    out.push(product);

    let mut gen_comm = Property::new(format!("generator_commutator [{tag}]"));
    let (mut opposite_sign, mut cases) = (0u64, 0u64);
    for n in 1..cap / 2 {
        for m in 1..=(cap / 2).saturating_sub(n) {
            if m == n {
                continue;
            }
            let modulus = (m + 2 * n).min(2 * m + n).min(cap);
            for &l in &field {
                for &mu in &field {
                    let c = g.commutator(&e(n, l), &e(m, mu));
                    let lm = f.mul(l, mu);
                    let verified = e(n + m, f.mul(lm, scalar(m as i64 - n as i64)));
                    let opposite = e(n + m, f.mul(lm, scalar(n as i64 - m as i64)));
                    cases += 1;
                    opposite_sign += u64::from(g.depth(&g.mul(&g.inv(&opposite), &c)) >= modulus);
                    gen_comm.check(g.depth(&g.mul(&g.inv(&verified), &c)) >= modulus, || {
                        format!("n={n} m={m} λ={} μ={} [e,e]={}", l.0, mu.0, show(&c))
                    });
                }
            }
        }
    }
    out.push(gen_comm.with_note(format!(
        "[e_(n,λ), e_(m,μ)] = e_(n+m, λμ(m-n)) mod K_min(m+2n, 2m+n) with [g,h] = g^-1 h^-1 g h and f·g = g∘f; \
         the scalar λμ(n-m) agrees in {opposite_sign} of {cases} cases (those where λμ(m-n) = λμ(n-m))"
    )));

    let mut convention = Property::new(format!("leading_term_convention [{tag}]"));
    let (mut flipped, mut literal) = (0u64, 0u64);
    for _ in 0..samples {
        let n = rng.gen_range(1..cap - 1);
        let m = rng.gen_range(1..cap - n);
        let (x, y) = (g.random_in_filtration(n, rng), g.random_in_filtration(m, rng));
        let lead = g.coefficient(&g.commutator(&x, &y), n + m + 1);
        let s = scalar(m as i64 - n as i64);
        let by_exponent = f.mul(f.mul(coef(&x, n + 1), coef(&y, m + 1)), s);
        flipped += u64::from(lead == f.neg(by_exponent));
        literal += u64::from(lead == f.mul(f.mul(coef(&x, n), coef(&y, m)), s));
        convention.check(lead == by_exponent, || format!("n={n} m={m} f={} g={}", show(&x), show(&y)));
    }
    let total = convention.checked;
    out.push(convention.with_note(format!(
        "for f in K_n, g in K_m the t^(n+m+1) coefficient of [f,g] is a_(n+1) b_(m+1) (m-n), where a_k, b_k are \
         the t^k coefficients: subscripts index exponents. Reading the subscripts as a_n b_m matched {literal} of \
         {total} samples; the opposite sign matched {flipped} of {total}"
    )));

    let mut onto = Property::new(format!("commutator_surjectivity [{tag}]"));
    let mut vanish = Property::new(format!("commutator_leading_vanishes [{tag}]"));
    for n in 1..cap - 1 {
        for m in 1..cap - n {
            let hits: HashSet<FqElem> = field
                .iter()
                .flat_map(|&l| field.iter().map(move |&mu| (l, mu)))
                .map(|(l, mu)| g.coefficient(&g.commutator(&e(n, l), &e(m, mu)), n + m + 1))
                .collect();
            if (n as i64 - m as i64).rem_euclid(p as i64) != 0 {
                onto.check(hits.len() == field.len(), || format!("n={n} m={m} hit {} cosets", hits.len()));
            } else {
                let mut ok = hits.len() == 1 && hits.contains(&FqElem(0));
                for _ in 0..8 {
                    let (x, y) = (g.random_in_filtration(n, rng), g.random_in_filtration(m, rng));
                    ok &= g.coefficient(&g.commutator(&x, &y), n + m + 1) == FqElem(0);
                }
                vanish.check(ok, || format!("n={n} m={m}"));
            }
        }
    }
    out.extend([onto, vanish]);

    let mut abelian = Property::new(format!("abelian_section [{tag}]"));
    let mut law = Property::new(format!("depth_law [{tag}]"));
    let mut inverse = Property::new(format!("inverse [{tag}]"));
    let mut coords = Property::new(format!("coordinates_roundtrip [{tag}]"));
    for _ in 0..samples {
        let n = rng.gen_range(1..=cap / 2);
        let m = rng.gen_range(n..=(2 * n).min(cap - n));
        let (x, y) = (g.random_in_filtration(n + m, rng), g.random_in_filtration(n + m, rng));
        abelian.check(g.depth(&g.commutator(&x, &y)) >= (2 * n + m).min(cap), || {
            format!("n={n} m={m} x={} y={}", show(&x), show(&y))
        });

        let (a, b) = (rng.gen_range(1..=cap), rng.gen_range(1..=cap));
        let (x, y) = (g.random_in_filtration(a, rng), g.random_in_filtration(b, rng));
        let need = (g.depth(&x) + g.depth(&y)).min(cap);
        law.check(g.depth(&g.commutator(&x, &y)) >= need, || format!("f={} g={}", show(&x), show(&y)));

        let z = g.random_element(rng);
        let zi = g.inv(&z);
        inverse.check(g.depth(&zi) == g.depth(&z) && g.is_identity(&g.compose(&z, &zi)), || show(&z));
        let back = g.from_canonical_coordinates(&g.canonical_coordinates(&z))?;
        coords.check(back == z, || show(&z));
    }
    out.extend([abelian, law, inverse, coords]);

    let mut oracle = Property::new(format!("commutator_oracle [{tag}]"));
    let mut pairs = 0;
    for n in 1..=cap / 3 {
        for m in n..=(2 * n).min(cap - 2 * n) {
            if (m - n) % p == 0 {
                continue;
            }
            pairs += 1;
            for _ in 0..oracle_samples {
                let r = g.random_in_filtration(n + m, rng);
                let sol = commutator_decompose_nott(g, &r, n, m)?;
                let prod = sol.iter().fold(g.identity(), |acc, (x, y)| g.mul(&acc, &g.commutator(x, y)));
                let shape = sol.len() <= 2
                    && sol.iter().all(|(x, y)| {
                        g.depth(x) >= n && (*y == e(m, ONE) || (m + 1 < cap && *y == e(m + 1, ONE)))
                    });
                oracle.check(shape && g.depth(&g.mul(&g.inv(&prod), &r)) >= 2 * n + m, || {
                    format!("n={n} m={m} r={}", show(&r))
                });
            }
        }
    }
    out.push(oracle.with_note(format!("{pairs} level pairs with p ∤ (m-n), {oracle_samples} inputs each")));
    Ok(out)
}
