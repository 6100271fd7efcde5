//! Random walks on `G/K_n`: Monte Carlo laws of the walk against exact convolution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{IndexedGroup, Letters};
use crate::error::{Error, Result};
use crate::group::{Family, FilteredGroup};

/// How walk positions are read off. All three are bijective on the quotient, so distances to
/// uniform do not depend on the choice; each is only offered for the families it describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinates {
    /// Matrix entries.
    FirstKind,
    /// Additive coordinates; abelian groups only.
    SecondKind,
    /// Series coefficients `A_2, ..., A_N`.
    NottinghamCoeffs,
}

impl Coordinates {
    pub fn default_for(family: Family) -> Coordinates {
        match family {
            Family::Nottingham => Coordinates::NottinghamCoeffs,
            Family::Additive => Coordinates::SecondKind,
            _ => Coordinates::FirstKind,
        }
    }

    pub fn check(self, family: Family) -> Result<()> {
        let ok = match self {
            Coordinates::FirstKind => matches!(family, Family::SL | Family::SO | Family::Sp),
            Coordinates::SecondKind => family == Family::Additive,
            Coordinates::NottinghamCoeffs => family == Family::Nottingham,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{self:?} coordinates for {} groups", family.name())))
        }
    }
}

impl std::str::FromStr for Coordinates {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-kind" => Ok(Coordinates::FirstKind),
            "second-kind" => Ok(Coordinates::SecondKind),
            "nottingham-coeffs" => Ok(Coordinates::NottinghamCoeffs),
            _ => Err(Error::Decode(format!("unknown coordinates {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WalkOptions {
    pub l: u32,
    pub trials: u64,
    pub seed: u64,
    /// Number of evenly spaced lengths reported up to `l`.
    pub checkpoints: u32,
    pub threads: usize,
    pub coordinates: Option<Coordinates>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkPoint {
    pub l: u32,
    pub tv_monte_carlo: f64,
    pub tv_exact: f64,
    /// `|tv_monte_carlo - tv_exact| <= 3 / sqrt(trials)`.
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkReport {
    pub group: String,
    pub order: usize,
    /// `|S ∪ S^-1 ∪ {1}|`.
    pub letters: usize,
    pub coordinates: Coordinates,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub series: Vec<WalkPoint>,
}

/// `10 ceil(1 / (1 - ρ)) log |G|`.
pub fn suggested_walk_length(rho: f64, order: usize) -> u32 {
    let relax = (1.0 / (1.0 - rho)).ceil();
    (10.0 * relax * (order as f64).ln()).ceil().min(u32::MAX as f64) as u32
}

fn tv(p: impl Iterator<Item = f64>, n: usize) -> f64 {
    0.5 * p.map(|x| (x - 1.0 / n as f64).abs()).sum::<f64>()
}

/// Total variation distance to uniform of the walk law at each length in `ls` (ascending).
pub fn exact_walk_tv(letters: &Letters, ls: &[u32]) -> Vec<f64> {
    let n = letters.order();
    let k = letters.len() as f64;
    let mut p = vec![0.0; n];
    p[letters.identity] = 1.0;
    let mut out = Vec::with_capacity(ls.len());
    let mut at = 0;
    for &l in ls {
        while at < l {
            let mut q = vec![0.0; n];
            for perm in &letters.perms {
                for x in 0..n {
                    q[perm[x] as usize] += p[x] / k;
                }
            }
            p = q;
            at += 1;
        }
        out.push(tv(p.iter().copied(), n));
    }
    out
}

const CHUNK: u64 = 1024;

/// Endpoint counts at each checkpoint for the trials of one chunk; chunk `c` draws from stream `c`
/// of the seeded generator, so results do not depend on how chunks are spread over threads.
fn run_chunk(letters: &Letters, ls: &[u32], seed: u64, chunk: u64, trials: u64, counts: &mut [Vec<u64>]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let k = letters.len();
    let lo = chunk * CHUNK;
    let hi = (lo + CHUNK).min(trials);
    for _ in lo..hi {
        let mut x = letters.identity;
        let mut at = 0;
        for (slot, &l) in ls.iter().enumerate() {
            while at < l {
                x = letters.perms[rng.gen_range(0..k)][x] as usize;
                at += 1;
            }
            counts[slot][x] += 1;
        }
    }
}

/// Monte Carlo walks of `S ∪ S^-1 ∪ {1}` from the identity, compared with exact convolution.
pub fn walk_statistics<G: FilteredGroup>(
    ig: &IndexedGroup<G>,
    gens: &[G::Elem],
    opts: &WalkOptions,
) -> Result<WalkReport> {
    let family = ig.group().descriptor().family;
    let coordinates = opts.coordinates.unwrap_or(Coordinates::default_for(family));
    coordinates.check(family)?;
    if opts.trials == 0 {
        return Err(Error::Decode("trials must be positive".into()));
    }
    let letters = Letters::symmetric(ig, gens, true);
    letters.diameter()?;
    let c = opts.checkpoints.max(1);
    let mut ls: Vec<u32> = (1..=c).map(|i| (opts.l as u64 * i as u64 / c as u64) as u32).collect();
    ls.dedup();

    let n = letters.order();
    let chunks = opts.trials.div_ceil(CHUNK);
    let threads = opts.threads.max(1).min(chunks as usize);
    let partial: Vec<Vec<Vec<u64>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let (letters, ls) = (&letters, &ls);
                scope.spawn(move || {
                    let mut counts = vec![vec![0u64; n]; ls.len()];
                    for chunk in (t as u64..chunks).step_by(threads) {
                        run_chunk(letters, ls, opts.seed, chunk, opts.trials, &mut counts);
                    }
                    counts
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("walk worker")).collect()
    });
    let mut counts = vec![vec![0u64; n]; ls.len()];
    for part in partial {
        for (acc, p) in counts.iter_mut().zip(part) {
            acc.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
    }

    let exact = exact_walk_tv(&letters, &ls);
    let tolerance = 3.0 / (opts.trials as f64).sqrt();
    let series = ls
        .iter()
        .zip(&counts)
        .zip(exact)
        .map(|((&l, cnt), tv_exact)| {
            let tv_monte_carlo = tv(cnt.iter().map(|&v| v as f64 / opts.trials as f64), n);
            WalkPoint { l, tv_monte_carlo, tv_exact, agrees: (tv_monte_carlo - tv_exact).abs() <= tolerance }
        })
        .collect();
    Ok(WalkReport {
        group: ig.descriptor(),
        order: n,
        letters: letters.len(),
        coordinates,
        trials: opts.trials,
        seed: opts.seed,
        tolerance,
        series,
    })
}
