//! Rate-distortion-equivocation regions of the four network models: two
//! helper models (public + private link to one receiver) and two Gray-Wyner
//! models (common link + one private link per receiver), all with an
//! eavesdropper on the public link.
//!
//! Closed forms decide membership exactly where they exist; elsewhere,
//! [`membership_search`] is an achievability tool only — a returned witness
//! proves membership, absence proves nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cond_rd::{conditional_rd, DistortionMeasure};
use crate::error::{Error, Result};
use crate::pmf::{binary_entropy, ChannelKernel, JointPmf};

/// Closed-form comparisons use this slack.
pub const TOL_CLOSED: f64 = 1e-9;
/// Comparisons involving the numeric conditional rate-distortion value.
pub const TOL_COND_RD: f64 = 1e-6;

/// The four network models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    HelperA,
    HelperB,
    GwA,
    GwB,
}

impl Model {
    pub fn is_gray_wyner(self) -> bool {
        matches!(self, Model::GwA | Model::GwB)
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Model::HelperA => "helper_a",
            Model::HelperB => "helper_b",
            Model::GwA => "gw_a",
            Model::GwB => "gw_b",
        };
        f.write_str(s)
    }
}

/// A model-tagged tuple of rates, distortion budgets and an equivocation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTuple {
    pub model: Model,
    pub r: f64,
    pub r1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    pub d1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    pub delta: f64,
}

impl RateTuple {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("R", self.r),
            ("R1", self.r1),
            ("D1", self.d1),
            ("Delta", self.delta),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Argument(format!("{name} = {v} must be >= 0")));
            }
        }
        let gw = self.model.is_gray_wyner();
        if gw != self.r2.is_some() || gw != self.d2.is_some() {
            return Err(Error::Argument(
                "R2 and D2 are present exactly for Gray-Wyner models".into(),
            ));
        }
        for v in [self.r2, self.d2].into_iter().flatten() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Argument(format!("{v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// The evaluated region corner for one auxiliary-channel choice.
#[derive(Debug, Clone)]
pub struct AchievablePoint {
    pub model: Model,
    pub r_min: f64,
    pub r1_min: f64,
    pub r2_min: Option<f64>,
    pub delta_max: f64,
    pub d1_achieved: f64,
    pub d2_achieved: Option<f64>,
    /// The auxiliary kernels, applied to the source in order.
    pub witness: Vec<ChannelKernel>,
}

fn require_labels(ext: &JointPmf, labels: &[&str]) -> Result<()> {
    for l in labels {
        ext.axis(l)?;
    }
    Ok(())
}

/// Evaluates the single-letter region quantities for an explicit auxiliary
/// construction.
///
/// `aux` kernels extend the source in order (later kernels may condition on
/// earlier outputs), and must leave the extended joint with labels `U`,
/// `S1h` (and `S2h` for Gray-Wyner models). For the two-stage Gray-Wyner
/// model, `gw_b_split` is the rate spent on the secret component inside each
/// private link; it defaults to `H(S0)` (full secrecy).
pub fn achievable_point(
    model: Model,
    source: &JointPmf,
    aux: &[ChannelKernel],
    d1: &DistortionMeasure,
    d2: Option<&DistortionMeasure>,
    gw_b_split: Option<f64>,
) -> Result<AchievablePoint> {
    let mut ext = source.clone();
    for k in aux {
        ext = ext.extend(k)?;
    }
    match model {
        Model::HelperA => {
            require_labels(&ext, &["S0", "S1", "U", "S1h"])?;
            Ok(AchievablePoint {
                model,
                r_min: ext.mutual_information(&["U"], &["S0", "S1"], &[])?,
                r1_min: ext.mutual_information(&["S1h"], &["S0", "S1"], &["U"])?,
                r2_min: None,
                delta_max: ext.entropy(&["S0", "S1"], &["U"])?,
                d1_achieved: ext.expected_distortion("S1", "S1h", d1.table())?,
                d2_achieved: None,
                witness: aux.to_vec(),
            })
        }
        Model::GwA => {
            require_labels(&ext, &["S1", "S2", "U", "S1h", "S2h"])?;
            let d2 = d2.ok_or_else(|| Error::Argument("GW model needs d2".into()))?;
            Ok(AchievablePoint {
                model,
                r_min: ext.mutual_information(&["U"], &["S1", "S2"], &[])?,
                r1_min: ext.mutual_information(&["S1h"], &["S1", "S2"], &["U"])?,
                r2_min: Some(ext.mutual_information(&["S2h"], &["S1", "S2"], &["U"])?),
                delta_max: ext.entropy(&["S1", "S2"], &["U"])?,
                d1_achieved: ext.expected_distortion("S1", "S1h", d1.table())?,
                d2_achieved: Some(ext.expected_distortion("S2", "S2h", d2.table())?),
                witness: aux.to_vec(),
            })
        }
        Model::GwB => {
            require_labels(&ext, &["S0", "S1", "S2", "U", "S1h", "S2h"])?;
            let d2 = d2.ok_or_else(|| Error::Argument("GW model needs d2".into()))?;
            let c = GwBConstants::from_extended(&ext)?;
            let r0 = gw_b_split.unwrap_or(c.h_s0);
            if !r0.is_finite() || r0 < 0.0 {
                return Err(Error::Argument(format!("split rate {r0} must be >= 0")));
            }
            Ok(AchievablePoint {
                model,
                r_min: c.a + (c.h_s0 - r0).max(0.0),
                r1_min: c.c1 + r0,
                r2_min: Some(c.c2 + r0),
                delta_max: r0.min(c.h_s0),
                d1_achieved: ext.expected_distortion("S1", "S1h", d1.table())?,
                d2_achieved: Some(ext.expected_distortion("S2", "S2h", d2.table())?),
                witness: aux.to_vec(),
            })
        }
        Model::HelperB => Err(Error::Argument(
            "helper_b has no auxiliary-point evaluation; use helper_b_region".into(),
        )),
    }
}

/// The information constants of the two-stage Gray-Wyner region.
#[derive(Debug, Clone, Copy)]
pub struct GwBConstants {
    pub h_s0: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

impl GwBConstants {
    pub fn from_extended(ext: &JointPmf) -> Result<Self> {
        Ok(GwBConstants {
            h_s0: ext.entropy(&["S0"], &[])?,
            a: ext.mutual_information(&["U"], &["S1", "S2"], &["S0"])?,
            c1: ext.mutual_information(&["S1h"], &["S1", "S2"], &["U", "S0"])?,
            c2: ext.mutual_information(&["S2h"], &["S1", "S2"], &["U", "S0"])?,
        })
    }

    /// Feasibility of a target under the pre-elimination split-rate system:
    /// some split `(R0, Rb0)` satisfies every constraint within `tol`.
    pub fn feasible(&self, t: &RateTuple, tol: f64) -> bool {
        let (r, r1, delta) = (t.r, t.r1, t.delta);
        let r2 = t.r2.unwrap_or(f64::INFINITY);
        if delta > self.h_s0 + tol || r < self.a - tol {
            return false;
        }
        let lo = delta.max(0.0).max(self.a + self.h_s0 - r);
        let hi = (r1 - self.c1).min(r2 - self.c2).min(r1);
        lo <= hi + tol
    }
}

// ---------------------------------------------------------------------------
// Closed forms.
// ---------------------------------------------------------------------------

/// Lossless helper region: `R + R1 >= H(S1)` and
/// `Delta <= H(S0|S1) + min(R1, H(S1))`.
pub fn helper_a_lossless(source: &JointPmf, r: f64, r1: f64, delta: f64) -> Result<bool> {
    if r < 0.0 || r1 < 0.0 {
        return Err(Error::Argument("rates must be >= 0".into()));
    }
    let h_s1 = source.entropy(&["S1"], &[])?;
    let h_s0_given = source.entropy(&["S0"], &["S1"])?;
    Ok(r + r1 >= h_s1 - TOL_CLOSED && delta <= h_s0_given + r1.min(h_s1) + TOL_CLOSED)
}

/// Helper region with lossless secret component:
/// `R + R1 >= H(S0) + min I(S1h; S1 | S0)` and `Delta <= min(H(S0), R1)`.
///
/// With `delta = H(S0)` this is the perfect-secrecy case, which forces
/// `R1 >= H(S0)`.
pub fn helper_b_region(
    source: &JointPmf,
    d: &DistortionMeasure,
    target: &RateTuple,
) -> Result<bool> {
    if target.model != Model::HelperB {
        return Err(Error::Argument("target must be tagged helper_b".into()));
    }
    target.validate()?;
    let h_s0 = source.entropy(&["S0"], &[])?;
    let rd = conditional_rd(source, "S0", "S1", d, target.d1)?;
    Ok(target.r + target.r1 >= h_s0 + rd - TOL_COND_RD
        && target.delta <= h_s0.min(target.r1) + TOL_COND_RD)
}

/// Binary closed form of [`helper_b_region`] for a DSBS(p) source under
/// Hamming distortion. Without secrecy the equivocation constraint is dropped.
pub fn helper_b_dsbs(p: f64, target: &RateTuple, with_secrecy: bool) -> Result<bool> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    if target.model != Model::HelperB {
        return Err(Error::Argument("target must be tagged helper_b".into()));
    }
    target.validate()?;
    let boundary = 1.0 + (binary_entropy(p)? - binary_entropy(target.d1.min(0.5))?).max(0.0);
    let sum_ok = target.r + target.r1 >= boundary - TOL_CLOSED;
    if !with_secrecy {
        return Ok(sum_ok);
    }
    Ok(sum_ok && target.delta <= 1.0f64.min(target.r1) + TOL_CLOSED)
}

/// A named `(R, R1, Delta)` point of the binary Gray-Wyner example
/// (symmetric private rates, `R2 = R1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwAPoint {
    pub name: &'static str,
    pub r: f64,
    pub r1: f64,
    pub delta: f64,
}

/// The six closed-form points of the binary example: the lossless inner-bound
/// corners `A`, `B`, `F`, `G` and the equivocation-annotated `Ft`, `Gt`.
pub fn gw_a_binary_points(p: f64) -> Result<Vec<GwAPoint>> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    let h = binary_entropy(p)?;
    let p1 = 0.5 - (1.0 - 2.0 * p).sqrt() / 2.0;
    let h1 = binary_entropy(p1)?;
    Ok(vec![
        GwAPoint { name: "A", r: 1.0 + h, r1: 0.0, delta: 0.0 },
        GwAPoint { name: "B", r: 0.0, r1: 1.0, delta: 0.0 },
        GwAPoint { name: "F", r: 1.0, r1: h / 2.0, delta: 0.0 },
        GwAPoint { name: "G", r: 1.0 + h - 2.0 * h1, r1: h1, delta: 0.0 },
        GwAPoint { name: "Ft", r: 1.0, r1: h / 2.0, delta: h },
        GwAPoint { name: "Gt", r: 1.0 + h - 2.0 * h1, r1: h1, delta: 2.0 * h1 },
    ])
}

/// Outer bound of the binary example: the two sum-rate planes
/// `R + R1 >= 1` and `R + 2 R1 >= 1 + h2(p)`.
pub fn gw_a_pangloss(p: f64, r: f64, r1: f64) -> Result<bool> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    let h = binary_entropy(p)?;
    Ok(r + r1 >= 1.0 - TOL_CLOSED && r + 2.0 * r1 >= 1.0 + h - TOL_CLOSED)
}

/// Builds the explicit auxiliary chain behind a named binary point and
/// evaluates it through [`achievable_point`].
pub fn gw_a_point_construction(p: f64, name: &str) -> Result<AchievablePoint> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    let base = crate::pmf::make_dsbs(p)?;
    // relabel (S0, S1) -> (S1, S2)
    let source = JointPmf::new(
        vec!["S1", "S2"],
        base.alphabet_sizes().to_vec(),
        base.probs().to_vec(),
    )?;
    let copy1 = ChannelKernel::deterministic(vec!["S1"], vec![2], "S1h", 2, |c| c[0])?;
    let copy2 = ChannelKernel::deterministic(vec!["S2"], vec![2], "S2h", 2, |c| c[0])?;
    let u: ChannelKernel = match name {
        "A" => ChannelKernel::deterministic(vec!["S1", "S2"], vec![2, 2], "U", 4, |c| {
            2 * c[0] + c[1]
        })?,
        "B" => ChannelKernel::deterministic(vec!["S1", "S2"], vec![2, 2], "U", 1, |_| 0)?,
        "F" | "Ft" => time_share_kernel()?,
        "G" | "Gt" => center_kernel(p)?,
        other => return Err(Error::Argument(format!("unknown point `{other}`"))),
    };
    let d = DistortionMeasure::hamming(2);
    achievable_point(Model::GwA, &source, &[u, copy1, copy2], &d, Some(&d), None)
}

/// `U = (T, S_T)` with a fair time-sharing switch `T`.
pub fn time_share_kernel() -> Result<ChannelKernel> {
    ChannelKernel::from_fn(vec!["S1", "S2"], vec![2, 2], vec!["U"], vec![4], |i, o| {
        let (t, v) = (o[0] / 2, o[0] % 2);
        let shown = if t == 0 { i[0] } else { i[1] };
        if v == shown {
            0.5
        } else {
            0.0
        }
    })
}

/// The common-center construction: a uniform bit `U`, with `S1` and `S2`
/// conditionally independent flips of `U` at crossover `p1`, where
/// `p = 2 p1 (1 - p1)`.
pub fn center_kernel(p: f64) -> Result<ChannelKernel> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    let p1 = 0.5 - (1.0 - 2.0 * p).sqrt() / 2.0;
    center_kernel_crossover(p1)
}

/// Same construction at an explicit crossover value.
pub fn center_kernel_crossover(p1: f64) -> Result<ChannelKernel> {
    if !(0.0..=0.5).contains(&p1) {
        return Err(Error::Argument(format!("crossover {p1} outside [0, 1/2]")));
    }
    let bsc = |a: usize, b: usize| if a == b { 1.0 - p1 } else { p1 };
    let mut probs = vec![0.0f64; 8];
    for s1 in 0..2 {
        for s2 in 0..2 {
            for u in 0..2 {
                probs[s1 * 4 + s2 * 2 + u] = 0.5 * bsc(s1, u) * bsc(s2, u);
            }
        }
    }
    let joint = JointPmf::new(vec!["S1", "S2", "U"], vec![2, 2, 2], probs)?;
    joint.conditional(&["S1", "S2"], &["U"])
}

/// Binary closed form of the two-stage Gray-Wyner example at symmetric
/// private rates. With secrecy (perfect): `R1 >= 1` and
/// `R + 2 R1 >= 2 (1 + h2(p))`; without: `R + R1 >= 1 + h2(p)` and
/// `R + 2 R1 >= 1 + 2 h2(p)`.
pub fn gw_b_binary(p: f64, target: &RateTuple, with_secrecy: bool) -> Result<bool> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    if target.model != Model::GwB {
        return Err(Error::Argument("target must be tagged gw_b".into()));
    }
    target.validate()?;
    let r2 = target.r2.unwrap();
    if (target.r1 - r2).abs() > 1e-12 {
        return Err(Error::Argument(
            "binary closed form needs symmetric rates R1 = R2".into(),
        ));
    }
    let h = binary_entropy(p)?;
    let (r, r1) = (target.r, target.r1);
    if with_secrecy {
        Ok(r1 >= 1.0 - TOL_CLOSED && r + 2.0 * r1 >= 2.0 * (1.0 + h) - TOL_CLOSED)
    } else {
        Ok(r + r1 >= 1.0 + h - TOL_CLOSED && r + 2.0 * r1 >= 1.0 + 2.0 * h - TOL_CLOSED)
    }
}

/// A `(R1, R)` corner of the binary two-stage Gray-Wyner example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwBCorner {
    pub name: &'static str,
    pub r1: f64,
    pub r: f64,
}

/// Corners of the perfect-secrecy region (`A`, `B`) or of the no-secrecy
/// region (`C`, `D`).
pub fn gw_b_binary_corners(p: f64, with_secrecy: bool) -> Result<Vec<GwBCorner>> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::Argument(format!("p {p} outside [0, 1/2]")));
    }
    let h = binary_entropy(p)?;
    Ok(if with_secrecy {
        vec![
            GwBCorner { name: "A", r1: 1.0 + h, r: 0.0 },
            GwBCorner { name: "B", r1: 1.0, r: 2.0 * h },
        ]
    } else {
        vec![
            GwBCorner { name: "C", r1: h, r: 1.0 },
            GwBCorner { name: "D", r1: 0.0, r: 1.0 + 2.0 * h },
        ]
    })
}

// ---------------------------------------------------------------------------
// Witness search.
// ---------------------------------------------------------------------------

/// Configuration of the heuristic inner search over auxiliary kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Cardinality bound for `U`; defaults to joint source alphabet + 3.
    #[serde(default)]
    pub u_card: Option<usize>,
    /// Grid resolution for one-parameter channel families.
    pub grid: usize,
    /// Number of random kernel restarts after the structured candidates.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            u_card: None,
            grid: 200,
            restarts: 200,
            seed: 0,
        }
    }
}

/// A witness found by [`membership_search`].
#[derive(Debug, Clone)]
pub struct Witness {
    pub point: AchievablePoint,
    /// Deterministic identifier of the candidate that produced the witness.
    pub id: String,
}

/// Componentwise dominance of a target by an evaluated point.
pub fn dominates(point: &AchievablePoint, target: &RateTuple, tol: f64) -> bool {
    if point.model != target.model {
        return false;
    }
    let base = point.r_min <= target.r + tol
        && point.r1_min <= target.r1 + tol
        && point.delta_max >= target.delta - tol
        && point.d1_achieved <= target.d1 + tol;
    let gw = match (point.r2_min, target.r2, point.d2_achieved, target.d2) {
        (Some(r2m), Some(r2), Some(d2a), Some(d2)) => r2m <= r2 + tol && d2a <= d2 + tol,
        (None, None, None, None) => true,
        _ => false,
    };
    base && gw
}

/// Searches for an auxiliary construction whose [`achievable_point`]
/// dominates the target componentwise (rates from above, equivocation and
/// distortions from below). Any returned witness has been re-verified
/// exactly; `None` is not a proof of non-membership.
pub fn membership_search(
    model: Model,
    source: &JointPmf,
    d1: &DistortionMeasure,
    d2: Option<&DistortionMeasure>,
    target: &RateTuple,
    config: &SearchConfig,
) -> Result<Option<Witness>> {
    if target.model != model {
        return Err(Error::Argument("target model mismatch".into()));
    }
    target.validate()?;
    let source_labels: Vec<&str> = match model {
        Model::HelperA => vec!["S0", "S1"],
        Model::GwA => vec!["S1", "S2"],
        Model::GwB => vec!["S0", "S1", "S2"],
        Model::HelperB => {
            return Err(Error::Argument(
                "helper_b membership is a closed form; use helper_b_region".into(),
            ))
        }
    };
    for l in &source_labels {
        source.axis(l)?;
    }
    let joint_size: usize = source.alphabet_sizes().iter().product();
    let u_card = config.u_card.unwrap_or(joint_size + 3);

    let check = |aux: &[ChannelKernel], id: &str| -> Result<Option<Witness>> {
        // for the two-stage model the private split is a free parameter;
        // take the smallest split covering the requested equivocation
        let split = (model == Model::GwB).then(|| target.delta.max(0.0));
        let point = achievable_point(model, source, aux, d1, d2, split)?;
        let ok = if model == Model::GwB {
            let mut ext = source.clone();
            for k in aux {
                ext = ext.extend(k)?;
            }
            let c = GwBConstants::from_extended(&ext)?;
            c.feasible(target, TOL_CLOSED)
                && point.d1_achieved <= target.d1 + TOL_CLOSED
                && point.d2_achieved.unwrap() <= target.d2.unwrap() + TOL_CLOSED
        } else {
            dominates(&point, target, TOL_CLOSED)
        };
        Ok(ok.then(|| Witness {
            point,
            id: id.to_string(),
        }))
    };

    // structured candidates first, in a deterministic order
    for (aux, id) in structured_candidates(model, source, d1, config.grid)? {
        if let Some(w) = check(&aux, &id)? {
            return Ok(Some(w));
        }
    }

    // random restarts
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let recon1 = d1.recon_size();
    let recon2 = d2.map(|d| d.recon_size());
    for trial in 0..config.restarts {
        let aux = random_chain(model, source, u_card, recon1, recon2, &mut rng)?;
        if let Some(w) = check(&aux, &format!("rand:{trial}"))? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn copy_kernel(source: &JointPmf, from: &str, out: &str) -> Result<ChannelKernel> {
    let k = source.alphabet_size(from)?;
    ChannelKernel::deterministic(vec![from], vec![k], out, k, |c| c[0])
}

fn bsc_kernel(from: &str, out: &str, q: f64) -> Result<ChannelKernel> {
    ChannelKernel::from_fn(vec![from], vec![2], vec![out], vec![2], |i, o| {
        if i[0] == o[0] {
            1.0 - q
        } else {
            q
        }
    })
}

type Candidate = (Vec<ChannelKernel>, String);

fn structured_candidates(
    model: Model,
    source: &JointPmf,
    d1: &DistortionMeasure,
    grid: usize,
) -> Result<Vec<Candidate>> {
    let sizes = source.alphabet_sizes().to_vec();
    let binary = sizes.iter().all(|&k| k == 2);
    let mut out: Vec<Candidate> = Vec::new();
    match model {
        Model::HelperA => {
            let joint: usize = sizes.iter().product();
            let s1h_copy = copy_kernel(source, "S1", "S1h")?;
            let s1h_s0 = ChannelKernel::deterministic(
                vec!["S0"],
                vec![sizes[0]],
                "S1h",
                d1.recon_size().max(sizes[0]),
                |c| c[0],
            )?;
            let k1 = sizes[1];
            let u_all = ChannelKernel::deterministic(
                vec!["S0", "S1"],
                vec![sizes[0], sizes[1]],
                "U",
                joint,
                move |c| c[0] * k1 + c[1],
            )?;
            let u_const = ChannelKernel::deterministic(vec!["S0"], vec![sizes[0]], "U", 1, |_| 0)?;
            let u_s1 = copy_kernel(source, "S1", "U")?;
            let u_s0 = copy_kernel(source, "S0", "U")?;
            for (u, uname) in [
                (u_all, "u=all"),
                (u_const, "u=const"),
                (u_s1, "u=s1"),
                (u_s0, "u=s0"),
            ] {
                out.push((vec![u.clone(), s1h_copy.clone()], format!("{uname},s1h=copy")));
                out.push((vec![u, s1h_s0.clone()], format!("{uname},s1h=s0")));
            }
            if binary {
                for j in 0..=grid / 2 {
                    let q = j as f64 / grid as f64;
                    let u = bsc_kernel("S1", "U", q)?;
                    out.push((vec![u, s1h_copy.clone()], format!("u=s1_bsc({q}),s1h=copy")));
                }
            }
        }
        Model::GwA => {
            let s1h = copy_kernel(source, "S1", "S1h")?;
            let s2h = copy_kernel(source, "S2", "S2h")?;
            let joint: usize = sizes.iter().product();
            let k2 = sizes[1];
            let u_all = ChannelKernel::deterministic(
                vec!["S1", "S2"],
                vec![sizes[0], sizes[1]],
                "U",
                joint,
                move |c| c[0] * k2 + c[1],
            )?;
            let u_const = ChannelKernel::deterministic(vec!["S1"], vec![sizes[0]], "U", 1, |_| 0)?;
            out.push((vec![u_all, s1h.clone(), s2h.clone()], "u=all".into()));
            out.push((vec![u_const, s1h.clone(), s2h.clone()], "u=const".into()));
            if binary {
                out.push((
                    vec![time_share_kernel()?, s1h.clone(), s2h.clone()],
                    "u=timeshare".into(),
                ));
                for j in 0..=grid / 2 {
                    let p1 = j as f64 / grid as f64;
                    out.push((
                        vec![center_kernel_crossover(p1)?, s1h.clone(), s2h.clone()],
                        format!("u=center({p1})"),
                    ));
                }
            }
        }
        Model::GwB => {
            let s1h = copy_kernel(source, "S1", "S1h")?;
            let s2h = copy_kernel(source, "S2", "S2h")?;
            let u_s0 = copy_kernel(source, "S0", "U")?;
            let u_const = ChannelKernel::deterministic(vec!["S0"], vec![sizes[0]], "U", 1, |_| 0)?;
            let k2 = sizes[2];
            let u_pair = ChannelKernel::deterministic(
                vec!["S1", "S2"],
                vec![sizes[1], sizes[2]],
                "U",
                sizes[1] * sizes[2],
                move |c| c[0] * k2 + c[1],
            )?;
            for (u, uname) in [(u_s0, "u=s0"), (u_const, "u=const"), (u_pair, "u=pair")] {
                out.push((vec![u, s1h.clone(), s2h.clone()], format!("{uname},sjh=copy")));
            }
        }
        Model::HelperB => unreachable!(),
    }
    Ok(out)
}

fn random_row(rng: &mut ChaCha12Rng, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k)
        .map(|_| -(rng.random::<f64>().max(1e-12)).ln())
        .collect();
    let s: f64 = row.iter().sum();
    for v in &mut row {
        *v /= s;
    }
    row
}

fn random_kernel(
    rng: &mut ChaCha12Rng,
    input_labels: Vec<&str>,
    input_sizes: Vec<usize>,
    out_label: &str,
    out_size: usize,
) -> Result<ChannelKernel> {
    let cells: usize = input_sizes.iter().product::<usize>().max(1);
    let rows: Vec<Vec<f64>> = (0..cells).map(|_| random_row(rng, out_size)).collect();
    ChannelKernel::new(
        input_labels.into_iter().map(String::from).collect(),
        input_sizes,
        vec![out_label.to_string()],
        vec![out_size],
        rows,
    )
}

fn random_chain(
    model: Model,
    source: &JointPmf,
    u_card: usize,
    recon1: usize,
    recon2: Option<usize>,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<ChannelKernel>> {
    let sizes = source.alphabet_sizes().to_vec();
    let u_size = rng.random_range(1..=u_card);
    match model {
        Model::HelperA => {
            let u = random_kernel(rng, vec!["S0", "S1"], vec![sizes[0], sizes[1]], "U", u_size)?;
            let s1h = random_kernel(
                rng,
                vec!["U", "S0", "S1"],
                vec![u_size, sizes[0], sizes[1]],
                "S1h",
                recon1,
            )?;
            Ok(vec![u, s1h])
        }
        Model::GwA => {
            let u = random_kernel(rng, vec!["S1", "S2"], vec![sizes[0], sizes[1]], "U", u_size)?;
            let s1h = random_kernel(
                rng,
                vec!["U", "S1", "S2"],
                vec![u_size, sizes[0], sizes[1]],
                "S1h",
                recon1,
            )?;
            let s2h = random_kernel(
                rng,
                vec!["U", "S1", "S2"],
                vec![u_size, sizes[0], sizes[1]],
                "S2h",
                recon2.unwrap(),
            )?;
            Ok(vec![u, s1h, s2h])
        }
        Model::GwB => {
            let u = random_kernel(
                rng,
                vec!["S0", "S1", "S2"],
                vec![sizes[0], sizes[1], sizes[2]],
                "U",
                u_size,
            )?;
            let s1h = random_kernel(rng, vec!["U", "S1"], vec![u_size, sizes[1]], "S1h", recon1)?;
            let s2h = random_kernel(
                rng,
                vec!["U", "S2"],
                vec![u_size, sizes[2]],
                "S2h",
                recon2.unwrap(),
            )?;
            Ok(vec![u, s1h, s2h])
        }
        Model::HelperB => unreachable!(),
    }
}
