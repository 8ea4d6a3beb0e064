//! Local deterministic sign model: λ uniform on the unit sphere,
//! `A(a,λ) = sign(â·λ)`, `B(b,λ) = −sign(b̂·λ)`, with measurement directions
//! in the x–z plane at the given angles from z.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use std::collections::BTreeMap;

use super::{angle_label, Behavior, HiddenVariableModel, Scenario};
use crate::inequalities::CorrelatorSet;
use crate::par;
use crate::{Error, Result};

/// Samples per independently seeded chunk. Fixed so that results do not
/// depend on how many worker threads run.
const CHUNK: u64 = 1 << 14;

const MAX_SETTINGS: usize = 32;

#[derive(Clone, Debug)]
pub struct SignModelRun {
    /// Finite ensemble of deterministic conditionals. Samples with identical
    /// responses at every setting share one entry with weight `count / n`.
    pub model: HiddenVariableModel,
    /// Empirical `E(a,b)` over the samples.
    pub correlators: CorrelatorSet,
    pub samples: u64,
}

#[derive(Default)]
struct Tally {
    /// response pattern → number of samples; bit `i` set means side A gives
    /// −1 at setting `i`, bit `32 + j` means side B gives −1 at setting `j`.
    patterns: BTreeMap<u64, u64>,
    products: Vec<i64>,
}

fn sign(x: f64) -> i64 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

fn sample_chunk(
    seed: u64,
    chunk: u64,
    count: u64,
    dirs_a: &[(f64, f64)],
    dirs_b: &[(f64, f64)],
) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut tally = Tally {
        patterns: BTreeMap::new(),
        products: vec![0; dirs_a.len() * dirs_b.len()],
    };
    let mut out_a = vec![0i64; dirs_a.len()];
    let mut out_b = vec![0i64; dirs_b.len()];
    for _ in 0..count {
        let v: [f64; 3] = UnitSphere.sample(&mut rng);
        let mut key = 0u64;
        for (i, &(s, c)) in dirs_a.iter().enumerate() {
            out_a[i] = sign(s * v[0] + c * v[2]);
            if out_a[i] < 0 {
                key |= 1 << i;
            }
        }
        for (j, &(s, c)) in dirs_b.iter().enumerate() {
            out_b[j] = -sign(s * v[0] + c * v[2]);
            if out_b[j] < 0 {
                key |= 1 << (32 + j);
            }
        }
        *tally.patterns.entry(key).or_default() += 1;
        for (i, &oa) in out_a.iter().enumerate() {
            for (j, &ob) in out_b.iter().enumerate() {
                tally.products[i * dirs_b.len() + j] += oa * ob;
            }
        }
    }
    tally
}

/// Monte Carlo realisation of the sign model with `n_samples` draws from a
/// ChaCha8 stream seeded by `seed`. Outcome index 0 is `+1` (up) and index 1
/// is `−1` (down); `sign(0)` is taken as `+1`.
pub fn sign_model(
    settings_a: &[f64],
    settings_b: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<SignModelRun> {
    if n_samples == 0 {
        return Err(Error::InvalidModel("n_samples must be at least 1".into()));
    }
    for n in [settings_a.len(), settings_b.len()] {
        if n > MAX_SETTINGS {
            return Err(Error::TooManySettings(n));
        }
    }
    if settings_a.iter().chain(settings_b).any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    let la: Vec<String> = settings_a.iter().map(|&t| angle_label(t)).collect();
    let lb: Vec<String> = settings_b.iter().map(|&t| angle_label(t)).collect();
    let parallel = settings_a
        .iter()
        .enumerate()
        .flat_map(|(i, ta)| {
            settings_b
                .iter()
                .enumerate()
                .filter(move |(_, tb)| *tb == ta)
                .map(move |(j, _)| (i, j))
        })
        .collect();
    let scenario = Scenario::binary(&la, &lb)?
        .with_parallel(parallel)?
        .with_context("model", "sign")
        .with_context("lambda", "uniform unit sphere");

    let dirs_a: Vec<(f64, f64)> = settings_a.iter().map(|t| t.sin_cos()).collect();
    let dirs_b: Vec<(f64, f64)> = settings_b.iter().map(|t| t.sin_cos()).collect();
    let chunks = n_samples.div_ceil(CHUNK);
    let tallies = par::map_range(chunks as usize, |c| {
        let c = c as u64;
        let count = CHUNK.min(n_samples - c * CHUNK);
        sample_chunk(seed, c, count, &dirs_a, &dirs_b)
    });

    let mut patterns: BTreeMap<u64, u64> = BTreeMap::new();
    let mut products = vec![0i64; settings_a.len() * settings_b.len()];
    for t in tallies {
        for (k, n) in t.patterns {
            *patterns.entry(k).or_default() += n;
        }
        for (acc, p) in products.iter_mut().zip(t.products) {
            *acc += p;
        }
    }

    let n = n_samples as f64;
    let lambdas = patterns
        .into_iter()
        .map(|(key, count)| {
            let out_a: Vec<usize> = (0..settings_a.len())
                .map(|i| ((key >> i) & 1) as usize)
                .collect();
            let out_b: Vec<usize> = (0..settings_b.len())
                .map(|j| ((key >> (32 + j)) & 1) as usize)
                .collect();
            Ok((
                count as f64 / n,
                Behavior::deterministic(scenario.clone(), &out_a, &out_b)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let model = HiddenVariableModel::new(lambdas)?;
    let correlators = CorrelatorSet::new(
        la,
        lb,
        products.into_iter().map(|p| p as f64 / n).collect(),
    )?;
    Ok(SignModelRun {
        model,
        correlators,
        samples: n_samples,
    })
}
