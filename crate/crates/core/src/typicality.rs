//! Robust strong typicality over short blocks.
//!
//! A tuple of aligned sequences is typical when every joint symbol
//! frequency sits within an absolute tolerance `delta` of the law, and
//! symbols of probability zero never occur. The default tolerance is
//! `1/sqrt(n)`, which keeps small-block typical sets nonempty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::JointPmf;

/// Blocklength and absolute frequency tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub n: usize,
    pub delta: f64,
}

impl TypicalityParams {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("blocklength must be >= 1".into()));
        }
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::Argument(format!("tolerance {delta} must be >= 0")));
        }
        Ok(TypicalityParams { n, delta })
    }

    /// Default tolerance `1/sqrt(n)`.
    pub fn with_default_delta(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / (n as f64).sqrt())
    }
}

/// Hard cap on enumerated sequence counts.
pub const ENUMERATION_CAP: usize = 1 << 22;

/// Checks `cap_needed` against [`ENUMERATION_CAP`].
pub fn check_cap(cap_needed: u128, what: &str) -> Result<()> {
    if cap_needed > ENUMERATION_CAP as u128 {
        return Err(Error::Capacity(format!(
            "{what}: {cap_needed} sequences exceeds the cap of {ENUMERATION_CAP}"
        )));
    }
    Ok(())
}

/// Joint empirical counts of aligned sequences over the product alphabet of
/// `pmf`, row-major.
pub fn joint_counts(pmf: &JointPmf, seqs: &[&[u8]]) -> Result<Vec<usize>> {
    let sizes = pmf.alphabet_sizes();
    if seqs.len() != sizes.len() {
        return Err(Error::Argument(format!(
            "{} sequences for a {}-component law",
            seqs.len(),
            sizes.len()
        )));
    }
    let n = seqs[0].len();
    for s in seqs {
        if s.len() != n {
            return Err(Error::Argument("sequences must share one length".into()));
        }
    }
    let cells: usize = sizes.iter().product();
    let mut counts = vec![0usize; cells];
    for i in 0..n {
        let mut idx = 0usize;
        for (v, s) in seqs.iter().enumerate() {
            let sym = s[i] as usize;
            if sym >= sizes[v] {
                return Err(Error::Argument(format!(
                    "symbol {sym} outside alphabet of size {}",
                    sizes[v]
                )));
            }
            idx = idx * sizes[v] + sym;
        }
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Robust strong typicality of aligned sequences with respect to `pmf`:
/// every joint frequency within `delta` of the law, zero-probability cells
/// never hit.
pub fn is_typical(pmf: &JointPmf, seqs: &[&[u8]], params: TypicalityParams) -> Result<bool> {
    let counts = joint_counts(pmf, seqs)?;
    let n = params.n as f64;
    for (c, &p) in counts.iter().zip(pmf.probs()) {
        if p == 0.0 {
            if *c > 0 {
                return Ok(false);
            }
            continue;
        }
        if (*c as f64 / n - p).abs() > params.delta {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Iterator-free enumeration of all length-`n` sequences over a `k`-ary
/// alphabet, as flat codes decoded on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqSpace {
    pub alphabet: usize,
    pub n: usize,
}

impl SeqSpace {
    pub fn new(alphabet: usize, n: usize) -> Result<Self> {
        if alphabet == 0 || n == 0 {
            return Err(Error::Argument("alphabet and blocklength must be >= 1".into()));
        }
        Ok(SeqSpace { alphabet, n })
    }

    pub fn len(&self) -> u128 {
        (self.alphabet as u128).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Decodes a flat code into a sequence (most significant position first).
    pub fn decode(&self, mut code: u64) -> Vec<u8> {
        let mut seq = vec![0u8; self.n];
        for i in (0..self.n).rev() {
            seq[i] = (code % self.alphabet as u64) as u8;
            code /= self.alphabet as u64;
        }
        seq
    }

    pub fn encode(&self, seq: &[u8]) -> u64 {
        let mut code = 0u64;
        for &s in seq {
            code = code * self.alphabet as u64 + s as u64;
        }
        code
    }
}

/// All single-variable typical sequences for a marginal law, in ascending
/// code order. Errors if the enumeration exceeds the cap.
pub fn typical_set(marginal: &[f64], params: TypicalityParams) -> Result<Vec<Vec<u8>>> {
    let k = marginal.len();
    let space = SeqSpace::new(k, params.n)?;
    check_cap(space.len(), "typical_set")?;
    let n = params.n as f64;
    let mut out = Vec::new();
    let mut counts = vec![0usize; k];
    for code in 0..space.len() as u64 {
        let seq = space.decode(code);
        counts.iter_mut().for_each(|c| *c = 0);
        for &s in &seq {
            counts[s as usize] += 1;
        }
        let mut ok = true;
        for (c, &p) in counts.iter().zip(marginal) {
            if p == 0.0 {
                if *c > 0 {
                    ok = false;
                    break;
                }
                continue;
            }
            if (*c as f64 / n - p).abs() > params.delta {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(seq);
        }
    }
    Ok(out)
}

/// All joint sequences (one per component of `pmf`) that are jointly typical,
/// as tuples of component sequences.
pub fn joint_typical_set(pmf: &JointPmf, params: TypicalityParams) -> Result<Vec<Vec<Vec<u8>>>> {
    let sizes = pmf.alphabet_sizes();
    let cells: usize = sizes.iter().product();
    let space = SeqSpace::new(cells, params.n)?;
    check_cap(space.len(), "joint_typical_set")?;
    let mut out = Vec::new();
    for code in 0..space.len() as u64 {
        let joint_seq = space.decode(code);
        // split the joint symbol stream into component sequences
        let mut comps: Vec<Vec<u8>> = vec![vec![0u8; params.n]; sizes.len()];
        for (i, &cell) in joint_seq.iter().enumerate() {
            let mut rest = cell as usize;
            for v in (0..sizes.len()).rev() {
                comps[v][i] = (rest % sizes[v]) as u8;
                rest /= sizes[v];
            }
        }
        let refs: Vec<&[u8]> = comps.iter().map(|c| c.as_slice()).collect();
        if is_typical(pmf, &refs, params)? {
            out.push(comps);
        }
    }
    Ok(out)
}

/// Sequences of the last component that are jointly typical with the fixed
/// prefix components, under `pmf` (whose label order must be: fixed
/// components in order, then the free one).
pub fn conditional_typical_set(
    pmf: &JointPmf,
    fixed: &[&[u8]],
    params: TypicalityParams,
) -> Result<Vec<Vec<u8>>> {
    let sizes = pmf.alphabet_sizes();
    if fixed.len() + 1 != sizes.len() {
        return Err(Error::Argument(
            "need all but the last component fixed".into(),
        ));
    }
    let k = sizes[sizes.len() - 1];
    let space = SeqSpace::new(k, params.n)?;
    check_cap(space.len(), "conditional_typical_set")?;
    let mut out = Vec::new();
    for code in 0..space.len() as u64 {
        let cand = space.decode(code);
        let mut refs: Vec<&[u8]> = fixed.to_vec();
        refs.push(&cand);
        if is_typical(pmf, &refs, params)? {
            out.push(cand);
        }
    }
    Ok(out)
}
