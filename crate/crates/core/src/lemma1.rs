//! The counting law of the encoding set: drawing `K` distinct codewords
//! uniformly from a conditional typical set of size `N` that contains `B`
//! jointly typical ("marked") sequences, the number `C` of marked codewords
//! drawn is hypergeometric. This module carries the exact pmf and moments,
//! the Chebyshev concentration bound, its exponential form, and a seeded
//! sampler that realizes `(N, B, K)` from actual typical sets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::pmf::JointPmf;
use crate::typicality::{is_typical, SeqSpace, TypicalityParams};

/// Parameters of the counting law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomParams {
    /// Population size (conditional typical-set cardinality).
    pub population: u64,
    /// Marked count (jointly typical subset).
    pub marked: u64,
    /// Number of draws (codebook size).
    pub draws: u64,
    /// Relative deviation for the concentration event.
    pub epsilon: f64,
}

impl HypergeomParams {
    pub fn new(population: u64, marked: u64, draws: u64, epsilon: f64) -> Result<Self> {
        if marked < 1 || marked > population || draws < 1 || draws > population {
            return Err(Error::Argument(format!(
                "need 1 <= B <= N and 1 <= K <= N, got N={population} B={marked} K={draws}"
            )));
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::Argument(format!("epsilon {epsilon} must be > 0")));
        }
        Ok(HypergeomParams {
            population,
            marked,
            draws,
            epsilon,
        })
    }
}

/// Closed-form mean `B K / N` and variance
/// `(B K / N) ((N - B) / N) ((N - K) / (N - 1))`.
pub fn hypergeom_stats(params: &HypergeomParams) -> (f64, f64) {
    let (n, b, k) = (
        params.population as f64,
        params.marked as f64,
        params.draws as f64,
    );
    let mean = b * k / n;
    let variance = if params.population <= 1 {
        0.0
    } else {
        mean * ((n - b) / n) * ((n - k) / (n - 1.0))
    };
    (mean, variance)
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Exact pmf `P(C = j)` over `j = 0..=min(B, K)` in big-rational arithmetic.
pub fn hypergeom_pmf(params: &HypergeomParams) -> Vec<BigRational> {
    let (n, b, k) = (params.population, params.marked, params.draws);
    let total = binomial(n, k);
    let top = b.min(k);
    (0..=top)
        .map(|j| {
            let ways = binomial(b, j) * binomial(n - b, k - j);
            BigRational::new(ways, total.clone())
        })
        .collect()
}

/// Mean and variance by direct summation of the exact pmf. Intended as the
/// independent cross-check of [`hypergeom_stats`] for `min(B, K) <= 1e4`.
pub fn hypergeom_moments_by_summation(params: &HypergeomParams) -> Result<(f64, f64)> {
    if params.marked.min(params.draws) > 10_000 {
        return Err(Error::Capacity(
            "pmf summation limited to min(B, K) <= 1e4".into(),
        ));
    }
    let pmf = hypergeom_pmf(params);
    let mut mean = BigRational::zero();
    let mut second = BigRational::zero();
    for (j, p) in pmf.iter().enumerate() {
        let jq = BigRational::from(BigInt::from(j));
        mean += &jq * p;
        second += &jq * &jq * p;
    }
    let var = &second - &mean * &mean;
    Ok((
        mean.to_f64().ok_or_else(|| Error::Argument("mean overflow".into()))?,
        var.to_f64().ok_or_else(|| Error::Argument("variance overflow".into()))?,
    ))
}

/// Chebyshev bound on `P(|C - E C| >= eps E C)`: `Var(C) / (eps^2 E^2(C))`.
pub fn concentration_bound(params: &HypergeomParams) -> Result<f64> {
    let (mean, variance) = hypergeom_stats(params);
    if mean <= 0.0 {
        return Err(Error::Argument("zero mean".into()));
    }
    Ok(variance / (params.epsilon * params.epsilon * mean * mean))
}

/// The exponential form of the concentration bound,
/// `(1/eps^2) 2^(-n [rate - mi - 2 eps_n])`, for supplied information
/// parameters.
pub fn concentration_bound_exponential(
    n: usize,
    codebook_rate: f64,
    conditional_mi: f64,
    eps_n: f64,
    epsilon: f64,
) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Argument("epsilon must be > 0".into()));
    }
    let exponent = -(n as f64) * (codebook_rate - conditional_mi - 2.0 * eps_n);
    Ok(exponent.exp2() / (epsilon * epsilon))
}

/// Two-sided band `[(1 - eps) L, (1 + eps) L]` around a center value.
pub fn containment_band(center: f64, epsilon: f64) -> (f64, f64) {
    ((1.0 - epsilon) * center, (1.0 + epsilon) * center)
}

/// The two-sided exponential containment bands in both variants: as printed
/// (both sides centered at `2^(n [rate - mi - 2 eps_n])`) and with the upper
/// side widened to `2^(n [rate - mi + 2 eps_n])`, which the moment bounds
/// suggest. Returned as `(as_printed, widened)`.
pub fn eq84_bands(
    n: usize,
    codebook_rate: f64,
    conditional_mi: f64,
    eps_n: f64,
    epsilon: f64,
) -> ((f64, f64), (f64, f64)) {
    let low_center = ((n as f64) * (codebook_rate - conditional_mi - 2.0 * eps_n)).exp2();
    let high_center = ((n as f64) * (codebook_rate - conditional_mi + 2.0 * eps_n)).exp2();
    let printed = containment_band(low_center, epsilon);
    let widened = ((1.0 - epsilon) * low_center, (1.0 + epsilon) * high_center);
    (printed, widened)
}

/// Draws a uniform `K`-subset of `0..N` and counts how many fall below `B`
/// (the marked prefix) — one exact hypergeometric sample.
fn sample_count(params: &HypergeomParams, rng: &mut ChaCha12Rng) -> u64 {
    let (n, b, k) = (params.population, params.marked, params.draws);
    // Floyd's subset sampling: uniform K-subset in O(K) expected time
    let mut chosen: HashSet<u64> = HashSet::with_capacity(k as usize);
    for j in (n - k)..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.iter().filter(|&&x| x < b).count() as u64
}

/// Seeded sampler of the counting variable at abstract `(N, B, K)`.
pub fn sample_counts(params: &HypergeomParams, trials: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..trials).map(|_| sample_count(params, &mut rng)).collect()
}

/// The realized set sizes and samples of an intersection experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionSamples {
    /// Realized parameters: N and B measured from the typical sets, K from
    /// the codebook rate.
    pub params: HypergeomParams,
    /// The fixed conditioning pair the sets were measured at.
    pub s0: Vec<u8>,
    pub s1: Vec<u8>,
    pub counts: Vec<u64>,
}

/// Fixes the first jointly typical `(s0, s1)` pair in code order, measures
/// the conditional typical set of the reconstruction (population `N`) and its
/// jointly typical subset (`B`), then repeatedly draws a codebook as a
/// uniform `K`-subset of the population and records how many codewords land
/// in the marked subset.
///
/// `ext` must be a joint over `(S0, S1, S1h)`; `K = round(2^(n * codebook_rate))`.
pub fn simulate_intersection(
    ext: &JointPmf,
    codebook_rate: f64,
    params: TypicalityParams,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<IntersectionSamples> {
    let pair = ext.marginalize(&["S0", "S1"])?;
    let n = params.n;
    let k0 = pair.alphabet_sizes()[0];
    let k1 = pair.alphabet_sizes()[1];
    let space0 = SeqSpace::new(k0, n)?;
    let space1 = SeqSpace::new(k1, n)?;
    crate::typicality::check_cap(space0.len() * space1.len(), "pair search")?;

    // first jointly typical pair in code order
    let mut fixed: Option<(Vec<u8>, Vec<u8>)> = None;
    'outer: for c0 in 0..space0.len() as u64 {
        let s0 = space0.decode(c0);
        for c1 in 0..space1.len() as u64 {
            let s1 = space1.decode(c1);
            if is_typical(&pair, &[&s0, &s1], params)? {
                fixed = Some((s0, s1));
                break 'outer;
            }
        }
    }
    let (s0, s1) = fixed.ok_or_else(|| {
        Error::Degenerate(format!(
            "no jointly typical pair at n = {n}, delta = {}",
            params.delta
        ))
    })?;

    // population: reconstruction sequences jointly typical with s0
    let cond_pair = ext.marginalize(&["S0", "S1h"])?;
    let triple = ext.marginalize(&["S0", "S1", "S1h"])?;
    let kh = triple.alphabet_sizes()[2];
    let space_h = SeqSpace::new(kh, n)?;
    crate::typicality::check_cap(space_h.len(), "population enumeration")?;
    let mut population: Vec<u64> = Vec::new();
    let mut marked_flags: Vec<bool> = Vec::new();
    for ch in 0..space_h.len() as u64 {
        let sh = space_h.decode(ch);
        if is_typical(&cond_pair, &[&s0, &sh], params)? {
            population.push(ch);
            marked_flags.push(is_typical(&triple, &[&s0, &s1, &sh], params)?);
        }
    }
    let n_sz = population.len() as u64;
    let b_sz = marked_flags.iter().filter(|&&m| m).count() as u64;
    let k_sz = crate::codec::index_range(codebook_rate, n);
    if n_sz == 0 || b_sz == 0 {
        return Err(Error::Degenerate(format!(
            "empty population (N = {n_sz}) or marked set (B = {b_sz})"
        )));
    }
    if k_sz > n_sz {
        return Err(Error::Argument(format!(
            "codebook size K = {k_sz} exceeds population N = {n_sz}"
        )));
    }
    let hp = HypergeomParams::new(n_sz, b_sz, k_sz, epsilon)?;

    // draw codebooks as uniform K-subsets of the population and count marks
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let mut chosen: HashSet<u64> = HashSet::with_capacity(k_sz as usize);
        for j in (n_sz - k_sz)..n_sz {
            let t = rng.random_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        counts.push(
            chosen
                .iter()
                .filter(|&&pos| marked_flags[pos as usize])
                .count() as u64,
        );
    }
    Ok(IntersectionSamples {
        params: hp,
        s0,
        s1,
        counts,
    })
}
