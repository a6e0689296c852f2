//! Finite-blocklength realizations of the random-coding schemes: random
//! binning, superposition codebooks and one-time-pad index encryption, with
//! empirical distortion from seeded trials and equivocation computed exactly
//! by enumerating the source-sequence space.
//!
//! Everything is reproducible from `(scheme, extended joint, rates, n,
//! delta, seed)`: codebook construction consumes RNG stream 0 of a seeded
//! ChaCha generator and trial `t` consumes stream `t + 1`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{make_dsbs, make_gw_b_source, ChannelKernel, JointPmf};
use crate::typicality::{check_cap, typical_set, SeqSpace, TypicalityParams};

/// The five appendix coding schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    HelperA,
    HelperB,
    HelperBOtp,
    GwA,
    GwB,
}

impl Scheme {
    /// Index names, in canonical order.
    pub fn index_names(self) -> &'static [&'static str] {
        match self {
            Scheme::HelperA => &["r", "r1"],
            Scheme::HelperB => &["r00", "r01", "r10", "r11"],
            Scheme::HelperBOtp => &["rt0", "rt1", "r00", "r01", "r10", "r11"],
            Scheme::GwA => &["r", "r1", "r2"],
            Scheme::GwB => &["r0", "rb0", "r", "r1", "r2"],
        }
    }

    /// Labels the extended joint must carry.
    pub fn required_labels(self) -> &'static [&'static str] {
        match self {
            Scheme::HelperA => &["S0", "S1", "U", "S1h"],
            Scheme::HelperB | Scheme::HelperBOtp => &["S0", "S1", "S1h"],
            Scheme::GwA => &["S1", "S2", "U", "S1h", "S2h"],
            Scheme::GwB => &["S0", "S1", "S2", "U", "S1h", "S2h"],
        }
    }

    /// Source component labels (the sequences drawn per trial).
    pub fn source_labels(self) -> &'static [&'static str] {
        match self {
            Scheme::HelperA | Scheme::HelperB | Scheme::HelperBOtp => &["S0", "S1"],
            Scheme::GwA => &["S1", "S2"],
            Scheme::GwB => &["S0", "S1", "S2"],
        }
    }

    /// Secret components whose equivocation the eavesdropper analysis tracks.
    pub fn secret_labels(self) -> &'static [&'static str] {
        match self {
            Scheme::HelperA => &["S0", "S1"],
            Scheme::HelperB | Scheme::HelperBOtp | Scheme::GwB => &["S0"],
            Scheme::GwA => &["S1", "S2"],
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::HelperA => "helper_a",
            Scheme::HelperB => "helper_b",
            Scheme::HelperBOtp => "helper_b_otp",
            Scheme::GwA => "gw_a",
            Scheme::GwB => "gw_b",
        };
        f.write_str(s)
    }
}

/// Index-range size for a per-symbol rate: `round(2^(n*rate))`, at least 1.
pub fn index_range(rate: f64, n: usize) -> u64 {
    (n as f64 * rate).exp2().round().max(1.0) as u64
}

/// Bits needed to write every value of `0..range`.
pub fn index_width(range: u64) -> u32 {
    if range <= 1 {
        0
    } else {
        64 - (range - 1).leading_zeros()
    }
}

/// Bit-wise one-time-pad of an index; the shorter operand acts on the low
/// bits only.
pub fn otp_encrypt(plain: u64, key: u64) -> u64 {
    plain ^ key
}

/// Exact mutual information in bits between a plaintext index with the given
/// distribution and its one-time-pad ciphertext under a uniform independent
/// key on `0..key_range`.
pub fn otp_mutual_information(plain_dist: &[f64], key_range: u64) -> f64 {
    let kp = plain_dist.len() as u64;
    let width = index_width(kp).max(index_width(key_range));
    let cipher_cells = 1u64 << width;
    let mut joint: Vec<Vec<f64>> = vec![vec![0.0; cipher_cells as usize]; plain_dist.len()];
    let pk = 1.0 / key_range as f64;
    for (plain, &pp) in plain_dist.iter().enumerate() {
        if pp == 0.0 {
            continue;
        }
        for key in 0..key_range {
            joint[plain][(plain as u64 ^ key) as usize] += pp * pk;
        }
    }
    let mut cipher_marg = vec![0.0f64; cipher_cells as usize];
    for row in &joint {
        for (c, &p) in row.iter().enumerate() {
            cipher_marg[c] += p;
        }
    }
    let mut mi = 0.0;
    for (plain, row) in joint.iter().enumerate() {
        let pp = plain_dist[plain];
        if pp == 0.0 {
            continue;
        }
        for (c, &p) in row.iter().enumerate() {
            if p > 0.0 {
                mi += p * (p / (pp * cipher_marg[c])).log2();
            }
        }
    }
    mi.max(0.0)
}

// ---------------------------------------------------------------------------
// Codebooks.
// ---------------------------------------------------------------------------

type Seq = Vec<u8>;

// Conditional per-letter law P(out | cond), rows indexed by the conditioning
// cell, used to draw bank sequences.
#[derive(Debug, Clone, PartialEq)]
struct CondLaw {
    cond_sizes: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl CondLaw {
    fn from_kernel(k: &ChannelKernel) -> CondLaw {
        let cells: usize = k.input_sizes().iter().product::<usize>().max(1);
        let rows = (0..cells)
            .map(|i| {
                let coords = crate::pmf::unflat_index(k.input_sizes(), i);
                k.row(&coords).to_vec()
            })
            .collect();
        CondLaw {
            cond_sizes: k.input_sizes().to_vec(),
            rows,
        }
    }

    fn sample_seq(&self, cond: &[&[u8]], n: usize, rng: &mut ChaCha12Rng) -> Seq {
        let mut out = vec![0u8; n];
        for i in 0..n {
            let mut cell = 0usize;
            for (v, c) in cond.iter().enumerate() {
                cell = cell * self.cond_sizes[v] + c[i] as usize;
            }
            out[i] = sample_index(&self.rows[cell], rng);
        }
        out
    }
}

fn sample_index(probs: &[f64], rng: &mut ChaCha12Rng) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u8;
        }
    }
    (probs.len() - 1) as u8
}

#[derive(Debug, Clone, PartialEq)]
struct BinnedSecret {
    typical: Vec<Seq>,
    code_to_idx: HashMap<u64, usize>,
    // one tuple of bin indices per typical sequence
    bins: Vec<Vec<u64>>,
    bin_members: HashMap<Vec<u64>, Vec<usize>>,
    space: SeqSpace,
}

impl BinnedSecret {
    fn build(
        marginal: &[f64],
        params: TypicalityParams,
        ranges: &[u64],
        rng: &mut ChaCha12Rng,
    ) -> Result<BinnedSecret> {
        let typical = typical_set(marginal, params)?;
        let space = SeqSpace::new(marginal.len(), params.n)?;
        let mut code_to_idx = HashMap::with_capacity(typical.len());
        for (i, s) in typical.iter().enumerate() {
            code_to_idx.insert(space.encode(s), i);
        }
        let mut bins = Vec::with_capacity(typical.len());
        let mut bin_members: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
        for i in 0..typical.len() {
            let tuple: Vec<u64> = ranges.iter().map(|&m| rng.random_range(0..m)).collect();
            bin_members.entry(tuple.clone()).or_default().push(i);
            bins.push(tuple);
        }
        Ok(BinnedSecret {
            typical,
            code_to_idx,
            bins,
            bin_members,
            space,
        })
    }

    fn lookup(&self, seq: &[u8]) -> Option<usize> {
        self.code_to_idx.get(&self.space.encode(seq)).copied()
    }

    // the unique typical member of a bin, if any
    fn unique_member(&self, tuple: &[u64]) -> Option<usize> {
        match self.bin_members.get(tuple) {
            Some(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Parts {
    HelperA {
        u_bank: Vec<Seq>,
        s1h_banks: Vec<Vec<Seq>>,
    },
    HelperB {
        secret: BinnedSecret,
        // [s0][w01 * m11 + w11]
        banks: Vec<Vec<Seq>>,
    },
    HelperBOtp {
        secret: BinnedSecret,
        // [s0][(wt1 * m01 + w01) * m11 + w11]
        banks: Vec<Vec<Seq>>,
    },
    GwA {
        u_bank: Vec<Seq>,
        s1h_banks: Vec<Vec<Seq>>,
        s2h_banks: Vec<Vec<Seq>>,
    },
    GwB {
        secret: BinnedSecret,
        u_banks: Vec<Vec<Seq>>,
        s1h_banks: Vec<Vec<Vec<Seq>>>,
        s2h_banks: Vec<Vec<Vec<Seq>>>,
    },
}

/// A realized random code: bin assignments, conditional codeword banks and
/// index-range bookkeeping, fully reproducible from its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub scheme: Scheme,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    /// Index name -> message-set size. The reserved error value is the size
    /// itself (indices are 0-based).
    pub ranges: BTreeMap<String, u64>,
    /// The extended joint the scheme codes against.
    pub ext: JointPmf,
    parts: Parts,
    // typicality views precomputed per encoding stage
    view_stage1: JointPmf,
    view_stage2: Vec<JointPmf>,
}

fn ranges_from(rates: &BTreeMap<String, f64>, scheme: Scheme, n: usize) -> Result<Vec<u64>> {
    let names = scheme.index_names();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let rate = rates.get(*name).ok_or_else(|| {
            Error::Argument(format!("scheme {scheme} needs a rate for index `{name}`"))
        })?;
        if !rate.is_finite() || *rate < 0.0 {
            return Err(Error::Argument(format!("rate {name} = {rate} must be >= 0")));
        }
        out.push(index_range(*rate, n));
    }
    Ok(out)
}

/// Builds the realized codebook for a scheme from the extended joint.
///
/// Rate constraints are deliberately not enforced, so under-provisioned codes
/// can be studied. Construction order is fixed (typical secrets in ascending
/// code order, banks in index order), so the result is bit-reproducible.
pub fn build_code(
    scheme: Scheme,
    ext: &JointPmf,
    rates: &BTreeMap<String, f64>,
    params: TypicalityParams,
    seed: u64,
) -> Result<Codebook> {
    for l in scheme.required_labels() {
        ext.axis(l)?;
    }
    let n = params.n;
    let range_vec = ranges_from(rates, scheme, n)?;
    let mut ranges = BTreeMap::new();
    for (name, m) in scheme.index_names().iter().zip(&range_vec) {
        ranges.insert(name.to_string(), *m);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);

    let parts = match scheme {
        Scheme::HelperA => {
            let (m_r, m_r1) = (range_vec[0], range_vec[1]);
            check_cap(
                (m_r as u128) * (m_r1 as u128 + 1),
                "helper bank enumeration",
            )?;
            let u_law = ext.marginalize(&["U"])?;
            let u_k = u_law.alphabet_sizes()[0];
            let mut u_bank = Vec::with_capacity(m_r as usize);
            for _ in 0..m_r {
                let mut s = vec![0u8; n];
                for sym in s.iter_mut() {
                    *sym = sample_index(u_law.probs(), rng_ref(&mut rng));
                }
                u_bank.push(s);
            }
            let _ = u_k;
            let s1h_given_u = CondLaw::from_kernel(&ext.conditional(&["U"], &["S1h"])?);
            let mut s1h_banks = Vec::with_capacity(m_r as usize);
            for u in &u_bank {
                let mut bank = Vec::with_capacity(m_r1 as usize);
                for _ in 0..m_r1 {
                    bank.push(s1h_given_u.sample_seq(&[u], n, &mut rng));
                }
                s1h_banks.push(bank);
            }
            Parts::HelperA { u_bank, s1h_banks }
        }
        Scheme::HelperB => {
            let (m00, m01, m10, m11) = (range_vec[0], range_vec[1], range_vec[2], range_vec[3]);
            let s0_marg = ext.marginalize(&["S0"])?;
            let secret =
                BinnedSecret::build(s0_marg.probs(), params, &[m00, m10], &mut rng)?;
            let s1h_given_s0 = CondLaw::from_kernel(&ext.conditional(&["S0"], &["S1h"])?);
            let per_secret = (m01 as u128) * (m11 as u128);
            check_cap(
                per_secret * secret.typical.len().max(1) as u128,
                "description bank enumeration",
            )?;
            let mut banks = Vec::with_capacity(secret.typical.len());
            for s0 in &secret.typical {
                let mut bank = Vec::with_capacity(per_secret as usize);
                for _ in 0..per_secret {
                    bank.push(s1h_given_s0.sample_seq(&[s0], n, &mut rng));
                }
                banks.push(bank);
            }
            Parts::HelperB { secret, banks }
        }
        Scheme::HelperBOtp => {
            let (mt0, mt1, m00, m01, m10, m11) = (
                range_vec[0],
                range_vec[1],
                range_vec[2],
                range_vec[3],
                range_vec[4],
                range_vec[5],
            );
            let s0_marg = ext.marginalize(&["S0"])?;
            let secret =
                BinnedSecret::build(s0_marg.probs(), params, &[mt0, m00, m10], &mut rng)?;
            let s1h_given_s0 = CondLaw::from_kernel(&ext.conditional(&["S0"], &["S1h"])?);
            let per_secret = (mt1 as u128) * (m01 as u128) * (m11 as u128);
            check_cap(
                per_secret * secret.typical.len().max(1) as u128,
                "description bank enumeration",
            )?;
            let mut banks = Vec::with_capacity(secret.typical.len());
            for s0 in &secret.typical {
                let mut bank = Vec::with_capacity(per_secret as usize);
                for _ in 0..per_secret {
                    bank.push(s1h_given_s0.sample_seq(&[s0], n, &mut rng));
                }
                banks.push(bank);
            }
            Parts::HelperBOtp { secret, banks }
        }
        Scheme::GwA => {
            let (m_r, m_r1, m_r2) = (range_vec[0], range_vec[1], range_vec[2]);
            check_cap(
                (m_r as u128) * (m_r1 as u128 + m_r2 as u128 + 1),
                "bank enumeration",
            )?;
            let u_law = ext.marginalize(&["U"])?;
            let mut u_bank = Vec::with_capacity(m_r as usize);
            for _ in 0..m_r {
                let mut s = vec![0u8; n];
                for sym in s.iter_mut() {
                    *sym = sample_index(u_law.probs(), rng_ref(&mut rng));
                }
                u_bank.push(s);
            }
            let s1h_given_u = CondLaw::from_kernel(&ext.conditional(&["U"], &["S1h"])?);
            let s2h_given_u = CondLaw::from_kernel(&ext.conditional(&["U"], &["S2h"])?);
            let mut s1h_banks = Vec::with_capacity(m_r as usize);
            let mut s2h_banks = Vec::with_capacity(m_r as usize);
            for u in &u_bank {
                let mut b1 = Vec::with_capacity(m_r1 as usize);
                for _ in 0..m_r1 {
                    b1.push(s1h_given_u.sample_seq(&[u], n, &mut rng));
                }
                s1h_banks.push(b1);
                let mut b2 = Vec::with_capacity(m_r2 as usize);
                for _ in 0..m_r2 {
                    b2.push(s2h_given_u.sample_seq(&[u], n, &mut rng));
                }
                s2h_banks.push(b2);
            }
            Parts::GwA {
                u_bank,
                s1h_banks,
                s2h_banks,
            }
        }
        Scheme::GwB => {
            let (m0, mb0, m_r, m_r1, m_r2) = (
                range_vec[0],
                range_vec[1],
                range_vec[2],
                range_vec[3],
                range_vec[4],
            );
            let s0_marg = ext.marginalize(&["S0"])?;
            let secret = BinnedSecret::build(s0_marg.probs(), params, &[m0, mb0], &mut rng)?;
            let u_given_s0 = CondLaw::from_kernel(&ext.conditional(&["S0"], &["U"])?);
            let s1h_given = CondLaw::from_kernel(&ext.conditional(&["U", "S0"], &["S1h"])?);
            let s2h_given = CondLaw::from_kernel(&ext.conditional(&["U", "S0"], &["S2h"])?);
            check_cap(
                secret.typical.len().max(1) as u128
                    * (m_r as u128)
                    * (1 + m_r1 as u128 + m_r2 as u128),
                "two-stage bank enumeration",
            )?;
            let mut u_banks = Vec::with_capacity(secret.typical.len());
            let mut s1h_banks = Vec::with_capacity(secret.typical.len());
            let mut s2h_banks = Vec::with_capacity(secret.typical.len());
            for s0 in &secret.typical {
                let mut ub = Vec::with_capacity(m_r as usize);
                for _ in 0..m_r {
                    ub.push(u_given_s0.sample_seq(&[s0], n, &mut rng));
                }
                let mut b1 = Vec::with_capacity(m_r as usize);
                let mut b2 = Vec::with_capacity(m_r as usize);
                for u in &ub {
                    let mut w1 = Vec::with_capacity(m_r1 as usize);
                    for _ in 0..m_r1 {
                        w1.push(s1h_given.sample_seq(&[u, s0], n, &mut rng));
                    }
                    b1.push(w1);
                    let mut w2 = Vec::with_capacity(m_r2 as usize);
                    for _ in 0..m_r2 {
                        w2.push(s2h_given.sample_seq(&[u, s0], n, &mut rng));
                    }
                    b2.push(w2);
                }
                u_banks.push(ub);
                s1h_banks.push(b1);
                s2h_banks.push(b2);
            }
            Parts::GwB {
                secret,
                u_banks,
                s1h_banks,
                s2h_banks,
            }
        }
    };

    let (view_stage1, view_stage2) = match scheme {
        Scheme::HelperA => (
            ext.marginalize(&["S0", "S1", "U"])?,
            vec![ext.marginalize(&["S0", "S1", "U", "S1h"])?],
        ),
        Scheme::HelperB | Scheme::HelperBOtp => {
            (ext.marginalize(&["S0", "S1", "S1h"])?, vec![])
        }
        Scheme::GwA => (
            ext.marginalize(&["S1", "S2", "U"])?,
            vec![
                ext.marginalize(&["S1", "S2", "U", "S1h"])?,
                ext.marginalize(&["S1", "S2", "U", "S2h"])?,
            ],
        ),
        Scheme::GwB => (
            ext.marginalize(&["S0", "S1", "S2", "U"])?,
            vec![
                ext.marginalize(&["S0", "S1", "S2", "U", "S1h"])?,
                ext.marginalize(&["S0", "S1", "S2", "U", "S2h"])?,
            ],
        ),
    };

    Ok(Codebook {
        scheme,
        n,
        delta: params.delta,
        seed,
        ranges,
        ext: ext.clone(),
        parts,
        view_stage1,
        view_stage2,
    })
}

// Borrow helper to appease closures that capture the rng twice.
fn rng_ref(rng: &mut ChaCha12Rng) -> &mut ChaCha12Rng {
    rng
}

/// An encoded message: index name -> value. Error values equal the index
/// range (`ranges[name]`); the one-time-pad cipher index uses `u64::MAX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub indices: BTreeMap<String, u64>,
}

impl Message {
    pub fn get(&self, name: &str) -> u64 {
        self.indices[name]
    }
}

/// Index names the eavesdropper observes, per scheme.
pub fn public_indices(scheme: Scheme) -> &'static [&'static str] {
    match scheme {
        Scheme::HelperA | Scheme::GwA => &["w"],
        Scheme::HelperB => &["w00", "w01"],
        Scheme::HelperBOtp => &["cipher", "w00", "w01"],
        Scheme::GwB => &["w", "wbar0"],
    }
}

impl Codebook {
    pub fn params(&self) -> TypicalityParams {
        TypicalityParams {
            n: self.n,
            delta: self.delta,
        }
    }

    fn range(&self, name: &str) -> u64 {
        self.ranges[name]
    }

    /// True when no index of the message carries an error value.
    pub fn encode_succeeded(&self, msg: &Message) -> bool {
        msg.indices.iter().all(|(name, &v)| {
            if name == "cipher" {
                v != u64::MAX
            } else {
                let rate_name = match name.as_str() {
                    "w" => "r",
                    "w1" => "r1",
                    "w2" => "r2",
                    "w0" => "r0",
                    "wbar0" => "rb0",
                    "w00" => "r00",
                    "w01" => "r01",
                    "w10" => "r10",
                    "w11" => "r11",
                    "wt1" => "rt1",
                    other => other,
                };
                v < self.range(rate_name)
            }
        })
    }

    /// Encodes one realization of the source sequences. Failures surface
    /// in-band as reserved error indices, never as `Err`.
    pub fn encode(&self, sources: &[&[u8]], rng: &mut ChaCha12Rng) -> Result<Message> {
        let params = self.params();
        let mut idx = BTreeMap::new();
        match &self.parts {
            Parts::HelperA { u_bank, s1h_banks } => {
                let (s0, s1) = (sources[0], sources[1]);
                let marg_u = &self.view_stage1;
                let joint = &self.view_stage2[0];
                let cands: Vec<u64> = (0..u_bank.len() as u64)
                    .filter(|&w| {
                        crate::typicality::is_typical(
                            marg_u,
                            &[s0, s1, &u_bank[w as usize]],
                            params,
                        )
                        .unwrap_or(false)
                    })
                    .collect();
                let (w, w1) = if cands.is_empty() {
                    (self.range("r"), self.range("r1"))
                } else {
                    let w = cands[rng.random_range(0..cands.len())];
                    let bank = &s1h_banks[w as usize];
                    let c2: Vec<u64> = (0..bank.len() as u64)
                        .filter(|&w1| {
                            crate::typicality::is_typical(
                                joint,
                                &[s0, s1, &u_bank[w as usize], &bank[w1 as usize]],
                                params,
                            )
                            .unwrap_or(false)
                        })
                        .collect();
                    if c2.is_empty() {
                        (w, self.range("r1"))
                    } else {
                        (w, c2[rng.random_range(0..c2.len())])
                    }
                };
                idx.insert("w".into(), w);
                idx.insert("w1".into(), w1);
            }
            Parts::HelperB { secret, banks } => {
                let (s0, s1) = (sources[0], sources[1]);
                let m01 = self.range("r01");
                let m11 = self.range("r11");
                match secret.lookup(s0) {
                    None => {
                        idx.insert("w00".into(), self.range("r00"));
                        idx.insert("w10".into(), self.range("r10"));
                        idx.insert("w01".into(), m01);
                        idx.insert("w11".into(), m11);
                    }
                    Some(i) => {
                        idx.insert("w00".into(), secret.bins[i][0]);
                        idx.insert("w10".into(), secret.bins[i][1]);
                        let joint = &self.view_stage1;
                        let cands: Vec<u64> = (0..banks[i].len() as u64)
                            .filter(|&d| {
                                crate::typicality::is_typical(
                                    joint,
                                    &[s0, s1, &banks[i][d as usize]],
                                    params,
                                )
                                .unwrap_or(false)
                            })
                            .collect();
                        if cands.is_empty() {
                            idx.insert("w01".into(), m01);
                            idx.insert("w11".into(), m11);
                        } else {
                            let d = cands[rng.random_range(0..cands.len())];
                            idx.insert("w01".into(), d / m11);
                            idx.insert("w11".into(), d % m11);
                        }
                    }
                }
            }
            Parts::HelperBOtp { secret, banks } => {
                let (s0, s1) = (sources[0], sources[1]);
                let (mt1, m01, m11) =
                    (self.range("rt1"), self.range("r01"), self.range("r11"));
                match secret.lookup(s0) {
                    None => {
                        idx.insert("cipher".into(), u64::MAX);
                        idx.insert("w00".into(), self.range("r00"));
                        idx.insert("w10".into(), self.range("r10"));
                        idx.insert("wt1".into(), mt1);
                        idx.insert("w01".into(), m01);
                        idx.insert("w11".into(), m11);
                    }
                    Some(i) => {
                        let (wt0, w00, w10) =
                            (secret.bins[i][0], secret.bins[i][1], secret.bins[i][2]);
                        idx.insert("w00".into(), w00);
                        idx.insert("w10".into(), w10);
                        let joint = &self.view_stage1;
                        let cands: Vec<u64> = (0..banks[i].len() as u64)
                            .filter(|&d| {
                                crate::typicality::is_typical(
                                    joint,
                                    &[s0, s1, &banks[i][d as usize]],
                                    params,
                                )
                                .unwrap_or(false)
                            })
                            .collect();
                        if cands.is_empty() {
                            idx.insert("cipher".into(), u64::MAX);
                            idx.insert("wt1".into(), mt1);
                            idx.insert("w01".into(), m01);
                            idx.insert("w11".into(), m11);
                        } else {
                            let d = cands[rng.random_range(0..cands.len())];
                            let wt1 = d / (m01 * m11);
                            let w01 = (d / m11) % m01;
                            let w11 = d % m11;
                            idx.insert("cipher".into(), otp_encrypt(wt0, wt1));
                            idx.insert("wt1".into(), wt1);
                            idx.insert("w01".into(), w01);
                            idx.insert("w11".into(), w11);
                        }
                    }
                }
            }
            Parts::GwA {
                u_bank,
                s1h_banks,
                s2h_banks,
            } => {
                let (s1, s2) = (sources[0], sources[1]);
                let marg_u = &self.view_stage1;
                let cands: Vec<u64> = (0..u_bank.len() as u64)
                    .filter(|&w| {
                        crate::typicality::is_typical(
                            marg_u,
                            &[s1, s2, &u_bank[w as usize]],
                            params,
                        )
                        .unwrap_or(false)
                    })
                    .collect();
                if cands.is_empty() {
                    idx.insert("w".into(), self.range("r"));
                    idx.insert("w1".into(), self.range("r1"));
                    idx.insert("w2".into(), self.range("r2"));
                } else {
                    let w = cands[rng.random_range(0..cands.len())];
                    idx.insert("w".into(), w);
                    for (name, range, bank, marg) in [
                        ("w1", self.range("r1"), &s1h_banks[w as usize], &self.view_stage2[0]),
                        ("w2", self.range("r2"), &s2h_banks[w as usize], &self.view_stage2[1]),
                    ] {
                        let cj: Vec<u64> = (0..bank.len() as u64)
                            .filter(|&wj| {
                                crate::typicality::is_typical(
                                    marg,
                                    &[s1, s2, &u_bank[w as usize], &bank[wj as usize]],
                                    params,
                                )
                                .unwrap_or(false)
                            })
                            .collect();
                        let v = if cj.is_empty() {
                            range
                        } else {
                            cj[rng.random_range(0..cj.len())]
                        };
                        idx.insert(name.into(), v);
                    }
                }
            }
            Parts::GwB {
                secret,
                u_banks,
                s1h_banks,
                s2h_banks,
            } => {
                let (s0, s1, s2) = (sources[0], sources[1], sources[2]);
                match secret.lookup(s0) {
                    None => {
                        idx.insert("w0".into(), self.range("r0"));
                        idx.insert("wbar0".into(), self.range("rb0"));
                        idx.insert("w".into(), self.range("r"));
                        idx.insert("w1".into(), self.range("r1"));
                        idx.insert("w2".into(), self.range("r2"));
                    }
                    Some(i) => {
                        idx.insert("w0".into(), secret.bins[i][0]);
                        idx.insert("wbar0".into(), secret.bins[i][1]);
                        let marg_u = &self.view_stage1;
                        let cands: Vec<u64> = (0..u_banks[i].len() as u64)
                            .filter(|&w| {
                                crate::typicality::is_typical(
                                    marg_u,
                                    &[s0, s1, s2, &u_banks[i][w as usize]],
                                    params,
                                )
                                .unwrap_or(false)
                            })
                            .collect();
                        if cands.is_empty() {
                            idx.insert("w".into(), self.range("r"));
                            idx.insert("w1".into(), self.range("r1"));
                            idx.insert("w2".into(), self.range("r2"));
                        } else {
                            let w = cands[rng.random_range(0..cands.len())];
                            idx.insert("w".into(), w);
                            for (name, range, bank, marg) in [
                                (
                                    "w1",
                                    self.range("r1"),
                                    &s1h_banks[i][w as usize],
                                    &self.view_stage2[0],
                                ),
                                (
                                    "w2",
                                    self.range("r2"),
                                    &s2h_banks[i][w as usize],
                                    &self.view_stage2[1],
                                ),
                            ] {
                                let cj: Vec<u64> = (0..bank.len() as u64)
                                    .filter(|&wj| {
                                        crate::typicality::is_typical(
                                            marg,
                                            &[
                                                s0,
                                                s1,
                                                s2,
                                                &u_banks[i][w as usize],
                                                &bank[wj as usize],
                                            ],
                                            params,
                                        )
                                        .unwrap_or(false)
                                    })
                                    .collect();
                                let v = if cj.is_empty() {
                                    range
                                } else {
                                    cj[rng.random_range(0..cj.len())]
                                };
                                idx.insert(name.into(), v);
                            }
                        }
                    }
                }
            }
        }
        Ok(Message { indices: idx })
    }

    /// Decodes a message. Error indices and ambiguous bins surface as `None`
    /// fields.
    pub fn decode(&self, msg: &Message) -> Decoded {
        match &self.parts {
            Parts::HelperA { s1h_banks, .. } => {
                let (w, w1) = (msg.get("w"), msg.get("w1"));
                let s1_hat = (w < self.range("r") && w1 < self.range("r1"))
                    .then(|| s1h_banks[w as usize][w1 as usize].clone());
                Decoded {
                    s0_hat: None,
                    s1_hat,
                    s2_hat: None,
                }
            }
            Parts::HelperB { secret, banks } => {
                let (w00, w10) = (msg.get("w00"), msg.get("w10"));
                let (w01, w11) = (msg.get("w01"), msg.get("w11"));
                let s0_hat = (w00 < self.range("r00") && w10 < self.range("r10"))
                    .then(|| secret.unique_member(&[w00, w10]))
                    .flatten()
                    .map(|i| secret.typical[i].clone());
                let s1_hat = match (&s0_hat, w01 < self.range("r01"), w11 < self.range("r11"))
                {
                    (Some(s0), true, true) => {
                        let i = secret.lookup(s0).unwrap();
                        Some(banks[i][(w01 * self.range("r11") + w11) as usize].clone())
                    }
                    _ => None,
                };
                Decoded {
                    s0_hat,
                    s1_hat,
                    s2_hat: None,
                }
            }
            Parts::HelperBOtp { secret, banks } => {
                let cipher = msg.get("cipher");
                let wt1 = msg.get("wt1");
                let (w00, w10) = (msg.get("w00"), msg.get("w10"));
                let (w01, w11) = (msg.get("w01"), msg.get("w11"));
                let ok = cipher != u64::MAX
                    && wt1 < self.range("rt1")
                    && w00 < self.range("r00")
                    && w10 < self.range("r10");
                let s0_hat = ok
                    .then(|| {
                        let wt0 = otp_encrypt(cipher, wt1); // XOR involution
                        secret.unique_member(&[wt0, w00, w10])
                    })
                    .flatten()
                    .map(|i| secret.typical[i].clone());
                let s1_hat = match (
                    &s0_hat,
                    wt1 < self.range("rt1"),
                    w01 < self.range("r01"),
                    w11 < self.range("r11"),
                ) {
                    (Some(s0), true, true, true) => {
                        let i = secret.lookup(s0).unwrap();
                        let d = (wt1 * self.range("r01") + w01) * self.range("r11") + w11;
                        Some(banks[i][d as usize].clone())
                    }
                    _ => None,
                };
                Decoded {
                    s0_hat,
                    s1_hat,
                    s2_hat: None,
                }
            }
            Parts::GwA {
                s1h_banks,
                s2h_banks,
                ..
            } => {
                let w = msg.get("w");
                let ok = w < self.range("r");
                let s1_hat = (ok && msg.get("w1") < self.range("r1"))
                    .then(|| s1h_banks[w as usize][msg.get("w1") as usize].clone());
                let s2_hat = (ok && msg.get("w2") < self.range("r2"))
                    .then(|| s2h_banks[w as usize][msg.get("w2") as usize].clone());
                Decoded {
                    s0_hat: None,
                    s1_hat,
                    s2_hat,
                }
            }
            Parts::GwB {
                secret,
                s1h_banks,
                s2h_banks,
                ..
            } => {
                let (w0, wbar0, w) = (msg.get("w0"), msg.get("wbar0"), msg.get("w"));
                let s0_hat = (w0 < self.range("r0") && wbar0 < self.range("rb0"))
                    .then(|| secret.unique_member(&[w0, wbar0]))
                    .flatten()
                    .map(|i| secret.typical[i].clone());
                let (s1_hat, s2_hat) = match &s0_hat {
                    Some(s0) if w < self.range("r") => {
                        let i = secret.lookup(s0).unwrap();
                        let s1 = (msg.get("w1") < self.range("r1")).then(|| {
                            s1h_banks[i][w as usize][msg.get("w1") as usize].clone()
                        });
                        let s2 = (msg.get("w2") < self.range("r2")).then(|| {
                            s2h_banks[i][w as usize][msg.get("w2") as usize].clone()
                        });
                        (s1, s2)
                    }
                    _ => (None, None),
                };
                Decoded {
                    s0_hat,
                    s1_hat,
                    s2_hat,
                }
            }
        }
    }
}

/// Reconstructions recovered by the legitimate receiver(s).
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub s0_hat: Option<Seq>,
    pub s1_hat: Option<Seq>,
    pub s2_hat: Option<Seq>,
}

// ---------------------------------------------------------------------------
// Exact equivocation by enumeration.
// ---------------------------------------------------------------------------

// Probability of a joint source realization under a per-letter law.
fn seq_tuple_prob(table: &JointPmf, seqs: &[&[u8]]) -> f64 {
    let sizes = table.alphabet_sizes();
    let n = seqs[0].len();
    let mut p = 1.0;
    for i in 0..n {
        let mut cell = 0usize;
        for (v, s) in seqs.iter().enumerate() {
            cell = cell * sizes[v] + s[i] as usize;
        }
        p *= table.probs()[cell];
        if p == 0.0 {
            return 0.0;
        }
    }
    p
}

type MsgKey = Vec<u64>;

// BTreeMaps keep the accumulation and summation order deterministic, so the
// reported entropy is bit-reproducible.
struct EquivAcc {
    joint: BTreeMap<(u64, MsgKey), f64>,
    msg: BTreeMap<MsgKey, f64>,
}

impl EquivAcc {
    fn new() -> Self {
        EquivAcc {
            joint: BTreeMap::new(),
            msg: BTreeMap::new(),
        }
    }

    fn add(&mut self, secret_code: u64, msg: MsgKey, p: f64) {
        if p == 0.0 {
            return;
        }
        *self.joint.entry((secret_code, msg.clone())).or_insert(0.0) += p;
        *self.msg.entry(msg).or_insert(0.0) += p;
    }

    // H(secret | message) = H(secret, message) - H(message)
    fn conditional_entropy_bits(&self) -> f64 {
        let hj: f64 = self
            .joint
            .values()
            .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum();
        let hm: f64 = self
            .msg
            .values()
            .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum();
        (hj - hm).max(0.0)
    }
}

/// Computes `H(secret sequences | public message) / n` exactly for the
/// realized codebook, enumerating every source realization and averaging the
/// encoder tie-break analytically (each jointly typical candidate carries
/// equal probability).
pub fn exact_equivocation(codebook: &Codebook) -> Result<f64> {
    let scheme = codebook.scheme;
    let n = codebook.n;
    let params = codebook.params();
    let source_labels = scheme.source_labels();
    let source = codebook.ext.marginalize(source_labels)?;
    let sizes = source.alphabet_sizes().to_vec();
    let joint_cells: u128 = sizes.iter().map(|&k| k as u128).product();
    check_cap(
        joint_cells.pow(n as u32),
        "exact equivocation enumeration",
    )?;

    let secret_labels = scheme.secret_labels();
    let secret_axes: Vec<usize> = secret_labels
        .iter()
        .map(|l| source_labels.iter().position(|s| s == l).unwrap())
        .collect();

    let spaces: Vec<SeqSpace> = sizes
        .iter()
        .map(|&k| SeqSpace::new(k, n).unwrap())
        .collect();
    let mut acc = EquivAcc::new();

    // iterate the product of per-component sequence spaces
    let mut codes = vec![0u64; sizes.len()];
    let lens: Vec<u64> = spaces.iter().map(|s| s.len() as u64).collect();
    loop {
        let seqs: Vec<Seq> = codes
            .iter()
            .zip(&spaces)
            .map(|(&c, sp)| sp.decode(c))
            .collect();
        let refs: Vec<&[u8]> = seqs.iter().map(|s| s.as_slice()).collect();
        let p = seq_tuple_prob(&source, &refs);
        if p > 0.0 {
            // secret code: combined over the secret components
            let mut secret_code = 0u64;
            for &a in &secret_axes {
                secret_code = secret_code * lens[a] + codes[a];
            }
            accumulate_message_law(codebook, &refs, params, secret_code, p, &mut acc)?;
        }
        // advance the odometer
        let mut k = codes.len();
        loop {
            if k == 0 {
                let per_symbol = acc.conditional_entropy_bits() / n as f64;
                return Ok(per_symbol);
            }
            k -= 1;
            codes[k] += 1;
            if codes[k] < lens[k] {
                break;
            }
            codes[k] = 0;
        }
    }
}

// Adds the conditional public-message law for one source realization.
fn accumulate_message_law(
    codebook: &Codebook,
    seqs: &[&[u8]],
    params: TypicalityParams,
    secret_code: u64,
    p: f64,
    acc: &mut EquivAcc,
) -> Result<()> {
    match &codebook.parts {
        Parts::HelperA { u_bank, .. } => {
            let (s0, s1) = (seqs[0], seqs[1]);
            let marg_u = &codebook.view_stage1;
            let cands: Vec<u64> = (0..u_bank.len() as u64)
                .filter(|&w| {
                    crate::typicality::is_typical(marg_u, &[s0, s1, &u_bank[w as usize]], params)
                        .unwrap_or(false)
                })
                .collect();
            if cands.is_empty() {
                acc.add(secret_code, vec![codebook.range("r")], p);
            } else {
                let share = p / cands.len() as f64;
                for w in cands {
                    acc.add(secret_code, vec![w], share);
                }
            }
        }
        Parts::HelperB { secret, banks } => {
            let (s0, s1) = (seqs[0], seqs[1]);
            let (m00, m01, m11) = (
                codebook.range("r00"),
                codebook.range("r01"),
                codebook.range("r11"),
            );
            match secret.lookup(s0) {
                None => acc.add(secret_code, vec![m00, m01], p),
                Some(i) => {
                    let w00 = secret.bins[i][0];
                    let joint = &codebook.view_stage1;
                    let cands: Vec<u64> = (0..banks[i].len() as u64)
                        .filter(|&d| {
                            crate::typicality::is_typical(
                                joint,
                                &[s0, s1, &banks[i][d as usize]],
                                params,
                            )
                            .unwrap_or(false)
                        })
                        .collect();
                    if cands.is_empty() {
                        acc.add(secret_code, vec![w00, m01], p);
                    } else {
                        let share = p / cands.len() as f64;
                        for d in cands {
                            acc.add(secret_code, vec![w00, d / m11], share);
                        }
                    }
                }
            }
        }
        Parts::HelperBOtp { secret, banks } => {
            let (s0, s1) = (seqs[0], seqs[1]);
            let (m00, m01, m11) = (
                codebook.range("r00"),
                codebook.range("r01"),
                codebook.range("r11"),
            );
            match secret.lookup(s0) {
                None => acc.add(secret_code, vec![u64::MAX, m00, m01], p),
                Some(i) => {
                    let (wt0, w00) = (secret.bins[i][0], secret.bins[i][1]);
                    let joint = &codebook.view_stage1;
                    let cands: Vec<u64> = (0..banks[i].len() as u64)
                        .filter(|&d| {
                            crate::typicality::is_typical(
                                joint,
                                &[s0, s1, &banks[i][d as usize]],
                                params,
                            )
                            .unwrap_or(false)
                        })
                        .collect();
                    if cands.is_empty() {
                        acc.add(secret_code, vec![u64::MAX, w00, m01], p);
                    } else {
                        let share = p / cands.len() as f64;
                        for d in cands {
                            let wt1 = d / (m01 * m11);
                            let w01 = (d / m11) % m01;
                            acc.add(secret_code, vec![otp_encrypt(wt0, wt1), w00, w01], share);
                        }
                    }
                }
            }
        }
        Parts::GwA { u_bank, .. } => {
            let (s1, s2) = (seqs[0], seqs[1]);
            let marg_u = &codebook.view_stage1;
            let cands: Vec<u64> = (0..u_bank.len() as u64)
                .filter(|&w| {
                    crate::typicality::is_typical(marg_u, &[s1, s2, &u_bank[w as usize]], params)
                        .unwrap_or(false)
                })
                .collect();
            if cands.is_empty() {
                acc.add(secret_code, vec![codebook.range("r")], p);
            } else {
                let share = p / cands.len() as f64;
                for w in cands {
                    acc.add(secret_code, vec![w], share);
                }
            }
        }
        Parts::GwB {
            secret, u_banks, ..
        } => {
            let (s0, s1, s2) = (seqs[0], seqs[1], seqs[2]);
            let (m0r, mbr) = (codebook.range("r"), codebook.range("rb0"));
            match secret.lookup(s0) {
                None => acc.add(secret_code, vec![m0r, mbr], p),
                Some(i) => {
                    let wbar0 = secret.bins[i][1];
                    let marg_u = &codebook.view_stage1;
                    let cands: Vec<u64> = (0..u_banks[i].len() as u64)
                        .filter(|&w| {
                            crate::typicality::is_typical(
                                marg_u,
                                &[s0, s1, s2, &u_banks[i][w as usize]],
                                params,
                            )
                            .unwrap_or(false)
                        })
                        .collect();
                    if cands.is_empty() {
                        acc.add(secret_code, vec![m0r, wbar0], p);
                    } else {
                        let share = p / cands.len() as f64;
                        for w in cands {
                            acc.add(secret_code, vec![w, wbar0], share);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Experiment harness.
// ---------------------------------------------------------------------------

/// Source law for an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    /// Doubly symmetric binary source over (S0, S1).
    Dsbs(f64),
    /// The binary Markov triple over (S0, S1, S2).
    GwbMarkov(f64),
    /// Inline joint pmf.
    Pmf(JointPmf),
}

impl SourceSpec {
    pub fn build(&self) -> Result<JointPmf> {
        match self {
            SourceSpec::Dsbs(p) => make_dsbs(*p),
            SourceSpec::GwbMarkov(p) => make_gw_b_source(*p),
            SourceSpec::Pmf(p) => Ok(p.clone()),
        }
    }
}

/// Auxiliary test-channel specification composing the extended joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxSpec {
    /// Reconstructions copy their sources; `U` copies the whole source tuple
    /// where the scheme needs it.
    Copy,
    /// `S1h = S1 xor Bern(q)`; other required outputs copy.
    Bsc(f64),
    /// Explicit kernel chain applied in order.
    Kernels(Vec<ChannelKernel>),
}

impl AuxSpec {
    /// Builds the kernel chain appropriate for the scheme.
    pub fn build(&self, scheme: Scheme, source: &JointPmf) -> Result<Vec<ChannelKernel>> {
        if let AuxSpec::Kernels(ks) = self {
            return Ok(ks.clone());
        }
        let q = match self {
            AuxSpec::Copy => 0.0,
            AuxSpec::Bsc(q) => *q,
            AuxSpec::Kernels(_) => unreachable!(),
        };
        let noisy_copy = |from: &str, out: &str| -> Result<ChannelKernel> {
            let k = source.alphabet_size(from)?;
            if q == 0.0 {
                ChannelKernel::deterministic(vec![from], vec![k], out, k, |c| c[0])
            } else {
                if k != 2 {
                    return Err(Error::Argument(
                        "bsc aux needs binary alphabets".into(),
                    ));
                }
                ChannelKernel::from_fn(vec![from], vec![2], vec![out], vec![2], |i, o| {
                    if i[0] == o[0] {
                        1.0 - q
                    } else {
                        q
                    }
                })
            }
        };
        let mut chain = Vec::new();
        match scheme {
            Scheme::HelperA => {
                // U tracks S1 through the same channel class
                chain.push(noisy_copy("S1", "U")?);
                chain.push(noisy_copy("S1", "S1h")?);
            }
            Scheme::HelperB | Scheme::HelperBOtp => {
                chain.push(noisy_copy("S1", "S1h")?);
            }
            Scheme::GwA => {
                let k1 = source.alphabet_size("S1")?;
                let k2 = source.alphabet_size("S2")?;
                chain.push(ChannelKernel::deterministic(
                    vec!["S1", "S2"],
                    vec![k1, k2],
                    "U",
                    k1 * k2,
                    move |c| c[0] * k2 + c[1],
                )?);
                chain.push(noisy_copy("S1", "S1h")?);
                chain.push(noisy_copy("S2", "S2h")?);
            }
            Scheme::GwB => {
                let k0 = source.alphabet_size("S0")?;
                chain.push(ChannelKernel::deterministic(
                    vec!["S0"],
                    vec![k0],
                    "U",
                    k0,
                    |c| c[0],
                )?);
                chain.push(noisy_copy("S1", "S1h")?);
                chain.push(noisy_copy("S2", "S2h")?);
            }
        }
        Ok(chain)
    }
}

/// Full experiment description; serializes to the run-config JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub source: SourceSpec,
    pub aux: AuxSpec,
    /// Per-index rates in bits/symbol, keyed by the scheme's index names.
    pub rates: BTreeMap<String, f64>,
    pub n: usize,
    /// Typicality tolerance; defaults to `1/sqrt(n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<TypicalityParams> {
        match self.delta {
            Some(d) => TypicalityParams::new(self.n, d),
            None => TypicalityParams::with_default_delta(self.n),
        }
    }

    /// Source extended by the auxiliary chain.
    pub fn extended_joint(&self) -> Result<JointPmf> {
        let source = self.source.build()?;
        let chain = self.aux.build(self.scheme, &source)?;
        let mut ext = source;
        for k in &chain {
            ext = ext.extend(k)?;
        }
        for l in self.scheme.required_labels() {
            ext.axis(l)?;
        }
        Ok(ext)
    }
}

/// Aggregated outcome of a batch of trials plus one exact equivocation
/// evaluation of the realized codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scheme: Scheme,
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub trials: u64,
    pub encode_success_rate: f64,
    pub d1_mean: Option<f64>,
    pub d2_mean: Option<f64>,
    pub s0_error_rate: f64,
    pub equivocation_per_symbol: f64,
    /// Realized `log2(range)/n` per index.
    pub rates_used: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy)]
struct TrialOutcome {
    encode_ok: bool,
    s0_fail: bool,
    d1: Option<f64>,
    d2: Option<f64>,
}

fn hamming_mean(a: &[u8], b: &[u8]) -> f64 {
    let d = a.iter().zip(b).filter(|(x, y)| x != y).count();
    d as f64 / a.len() as f64
}

fn run_trial(codebook: &Codebook, source: &JointPmf, seed: u64, t: u64) -> Result<TrialOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(t + 1);
    let n = codebook.n;
    let sizes = source.alphabet_sizes().to_vec();
    // draw the joint source block
    let mut comps: Vec<Seq> = vec![vec![0u8; n]; sizes.len()];
    for i in 0..n {
        let cell = sample_index(source.probs(), &mut rng) as usize;
        let mut rest = cell;
        for v in (0..sizes.len()).rev() {
            comps[v][i] = (rest % sizes[v]) as u8;
            rest /= sizes[v];
        }
    }
    let refs: Vec<&[u8]> = comps.iter().map(|c| c.as_slice()).collect();
    let msg = codebook.encode(&refs, &mut rng)?;
    let encode_ok = codebook.encode_succeeded(&msg);
    let decoded = codebook.decode(&msg);

    let scheme = codebook.scheme;
    let has_s0 = matches!(
        scheme,
        Scheme::HelperB | Scheme::HelperBOtp | Scheme::GwB
    );
    let mut s0_fail = false;
    if has_s0 {
        match &decoded.s0_hat {
            Some(s0_hat) => {
                // structural soundness: a singleton bin holds the truth
                assert_eq!(s0_hat, &comps[0], "lossless decode mismatch");
            }
            None => s0_fail = true,
        }
    }
    let (d1, d2) = if encode_ok {
        let s1_pos = if scheme == Scheme::GwA { 0 } else { 1 };
        let d1 = decoded
            .s1_hat
            .as_ref()
            .map(|s| hamming_mean(s, &comps[s1_pos]));
        let d2 = decoded
            .s2_hat
            .as_ref()
            .map(|s| hamming_mean(s, &comps[s1_pos + 1]));
        (d1, d2)
    } else {
        (None, None)
    };
    Ok(TrialOutcome {
        encode_ok,
        s0_fail,
        d1,
        d2,
    })
}

/// Builds one codebook from the config seed, runs the trials through
/// independent RNG substreams keyed by trial index, and computes the exact
/// equivocation of the realized code. Deterministic given the config;
/// `threads > 1` fans trials out without changing any result.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<SimReport> {
    let params = config.params()?;
    let ext = config.extended_joint()?;
    let codebook = build_code(config.scheme, &ext, &config.rates, params, config.seed)?;
    let source = ext.marginalize(config.scheme.source_labels())?;

    let outcomes: Vec<TrialOutcome> = if threads <= 1 || config.trials < 2 {
        (0..config.trials)
            .map(|t| run_trial(&codebook, &source, config.seed, t))
            .collect::<Result<_>>()?
    } else {
        let workers = threads.min(config.trials as usize);
        let chunk = config.trials.div_ceil(workers as u64);
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers as u64 {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(config.trials);
                let cb = &codebook;
                let src = &source;
                handles.push(scope.spawn(move || {
                    (lo..hi)
                        .map(|t| run_trial(cb, src, config.seed, t))
                        .collect::<Result<Vec<_>>>()
                }));
            }
            let mut all = Vec::with_capacity(config.trials as usize);
            for h in handles {
                all.extend(h.join().expect("trial worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };

    let trials = config.trials;
    let successes = outcomes.iter().filter(|o| o.encode_ok).count();
    let s0_fails = outcomes.iter().filter(|o| o.s0_fail).count();
    let mean_of = |f: fn(&TrialOutcome) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = outcomes.iter().filter_map(f).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };

    let equivocation = exact_equivocation(&codebook)?;
    let rates_used = codebook
        .ranges
        .iter()
        .map(|(k, &m)| (k.clone(), (m as f64).log2() / config.n as f64))
        .collect();

    Ok(SimReport {
        scheme: config.scheme,
        n: config.n,
        delta: params.delta,
        seed: config.seed,
        trials,
        encode_success_rate: if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        },
        d1_mean: mean_of(|o| o.d1),
        d2_mean: mean_of(|o| o.d2),
        s0_error_rate: if trials == 0 {
            0.0
        } else {
            s0_fails as f64 / trials as f64
        },
        equivocation_per_symbol: equivocation,
        rates_used,
    })
}
