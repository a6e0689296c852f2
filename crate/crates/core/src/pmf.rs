//! Joint pmfs over finite product alphabets, conditional kernels, and the
//! information measures used throughout the toolkit.
//!
//! All logarithms are base 2 and `0 log 0 := 0`. Variables are addressed by
//! label, never by position, so that the same code paths serve every model
//! regardless of how its alphabet components are ordered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass must sum to one within this tolerance for programmatic construction.
pub const MASS_TOL: f64 = 1e-12;
/// Looser tolerance applied when ingesting external JSON; accepted pmfs are
/// renormalized so the internal invariant still holds.
pub const MASS_TOL_JSON: f64 = 1e-9;

/// Binary entropy in bits, `h2(a) = -a log2 a - (1-a) log2 (1-a)`.
///
/// Endpoints evaluate to 0; errors outside `[0, 1]`.
pub fn binary_entropy(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::Argument(format!(
            "binary_entropy: alpha {alpha} outside [0, 1]"
        )));
    }
    Ok(xlog2x(alpha) + xlog2x(1.0 - alpha))
}

#[inline]
fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

/// Row-major flat index of `coords` in a tensor with the given sizes.
pub fn flat_index(sizes: &[usize], coords: &[usize]) -> usize {
    debug_assert_eq!(sizes.len(), coords.len());
    let mut idx = 0usize;
    for (i, &c) in coords.iter().enumerate() {
        debug_assert!(c < sizes[i]);
        idx = idx * sizes[i] + c;
    }
    idx
}

/// Inverse of [`flat_index`].
pub fn unflat_index(sizes: &[usize], mut idx: usize) -> Vec<usize> {
    let mut coords = vec![0usize; sizes.len()];
    for i in (0..sizes.len()).rev() {
        coords[i] = idx % sizes[i];
        idx /= sizes[i];
    }
    coords
}

#[derive(Deserialize)]
struct RawJointPmf {
    labels: Vec<String>,
    alphabet_sizes: Vec<usize>,
    probs: Vec<f64>,
}

/// A probability tensor over a finite product alphabet.
///
/// `probs` is stored flat in row-major order over `alphabet_sizes`; each
/// component variable is named by an entry of `labels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJointPmf")]
pub struct JointPmf {
    labels: Vec<String>,
    alphabet_sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl TryFrom<RawJointPmf> for JointPmf {
    type Error = Error;

    // JSON ingestion path: the looser 1e-9 mass tolerance, then renormalize.
    fn try_from(raw: RawJointPmf) -> Result<Self> {
        JointPmf::validate_shape(&raw.labels, &raw.alphabet_sizes, &raw.probs)?;
        let sum: f64 = raw.probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL_JSON {
            return Err(Error::Argument(format!(
                "pmf mass {sum} is not 1 within {MASS_TOL_JSON}"
            )));
        }
        let probs = raw.probs.iter().map(|p| p / sum).collect();
        Ok(JointPmf {
            labels: raw.labels,
            alphabet_sizes: raw.alphabet_sizes,
            probs,
        })
    }
}

impl JointPmf {
    /// Builds a pmf, validating shape, nonnegativity and unit mass.
    pub fn new<S: Into<String>>(
        labels: Vec<S>,
        alphabet_sizes: Vec<usize>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Self::validate_shape(&labels, &alphabet_sizes, &probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::Argument(format!(
                "pmf mass {sum} is not 1 within {MASS_TOL}"
            )));
        }
        Ok(JointPmf {
            labels,
            alphabet_sizes,
            probs,
        })
    }

    fn validate_shape(labels: &[String], sizes: &[usize], probs: &[f64]) -> Result<()> {
        if labels.len() != sizes.len() {
            return Err(Error::Argument(format!(
                "{} labels for {} alphabet sizes",
                labels.len(),
                sizes.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Argument("pmf needs at least one variable".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].iter().any(|x| x == l) {
                return Err(Error::Argument(format!("duplicate label `{l}`")));
            }
        }
        if sizes.iter().any(|&k| k == 0) {
            return Err(Error::Argument("alphabet sizes must be positive".into()));
        }
        let cells: usize = sizes.iter().product();
        if probs.len() != cells {
            return Err(Error::Argument(format!(
                "{} entries for a {cells}-cell tensor",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Argument("pmf entries must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    /// Axis position of `label`.
    pub fn axis(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Alphabet size of the component named `label`.
    pub fn alphabet_size(&self, label: &str) -> Result<usize> {
        Ok(self.alphabet_sizes[self.axis(label)?])
    }

    /// Probability of the cell addressed by per-axis coordinates.
    pub fn prob(&self, coords: &[usize]) -> f64 {
        self.probs[flat_index(&self.alphabet_sizes, coords)]
    }

    /// Marginal pmf over `keep`, with axes reordered to match `keep`.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        if keep.is_empty() {
            return Err(Error::Argument("cannot marginalize to no variables".into()));
        }
        let axes: Vec<usize> = keep
            .iter()
            .map(|l| self.axis(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(Error::Argument(format!("duplicate label `{}`", keep[i])));
            }
        }
        let out_sizes: Vec<usize> = axes.iter().map(|&a| self.alphabet_sizes[a]).collect();
        let out_strides = strides(&out_sizes);
        let mut out = vec![0.0f64; out_sizes.iter().product()];
        let full_strides = strides(&self.alphabet_sizes);
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut o = 0usize;
            for (k, &a) in axes.iter().enumerate() {
                let coord = (idx / full_strides[a]) % self.alphabet_sizes[a];
                o += coord * out_strides[k];
            }
            out[o] += p;
        }
        Ok(JointPmf {
            labels: keep.iter().map(|s| s.to_string()).collect(),
            alphabet_sizes: out_sizes,
            probs: out,
        })
    }

    fn joint_entropy_all(&self) -> f64 {
        self.probs.iter().map(|&p| xlog2x(p)).sum()
    }

    /// Conditional entropy `H(over | given)` in bits.
    ///
    /// Computed as `H(over ∪ given) - H(given)`, so labels shared between the
    /// two sets condition themselves away (`H(A | A) = 0`).
    pub fn entropy(&self, over: &[&str], given: &[&str]) -> Result<f64> {
        if over.is_empty() {
            return Err(Error::Argument("entropy: `over` must be nonempty".into()));
        }
        let mut union: Vec<&str> = over.to_vec();
        for g in given {
            if !union.contains(g) {
                union.push(g);
            }
        }
        let h_union = self.marginalize(&union)?.joint_entropy_all();
        let h_given = if given.is_empty() {
            0.0
        } else {
            self.marginalize(given)?.joint_entropy_all()
        };
        Ok((h_union - h_given).max(0.0))
    }

    /// Conditional mutual information `I(a; b | given)` in bits.
    ///
    /// The three sets must be pairwise disjoint. Tiny negative float residue
    /// is clamped to 0.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Argument(
                "mutual_information: `a` and `b` must be nonempty".into(),
            ));
        }
        for x in a {
            if b.contains(x) || given.contains(x) {
                return Err(Error::Argument(format!(
                    "mutual_information: label `{x}` appears in two sets"
                )));
            }
        }
        for x in b {
            if given.contains(x) {
                return Err(Error::Argument(format!(
                    "mutual_information: label `{x}` appears in two sets"
                )));
            }
        }
        let mut b_given: Vec<&str> = b.to_vec();
        b_given.extend_from_slice(given);
        let h1 = self.entropy(a, given)?;
        let h2 = self.entropy(a, &b_given)?;
        Ok((h1 - h2).max(0.0))
    }

    /// Extends this pmf by a conditional kernel: `P(base, out) = P(base) * k(out | in)`.
    ///
    /// Kernel inputs must be existing labels; outputs must be fresh labels.
    /// Marginalizing the result back onto the base labels recovers the base
    /// tensor entrywise.
    pub fn extend(&self, kernel: &ChannelKernel) -> Result<JointPmf> {
        let in_axes: Vec<usize> = kernel
            .input_labels
            .iter()
            .map(|l| self.axis(l))
            .collect::<Result<Vec<_>>>()?;
        for (k, &a) in in_axes.iter().enumerate() {
            if self.alphabet_sizes[a] != kernel.input_sizes[k] {
                return Err(Error::Argument(format!(
                    "kernel input `{}` has size {} but pmf has {}",
                    kernel.input_labels[k], kernel.input_sizes[k], self.alphabet_sizes[a]
                )));
            }
        }
        for l in &kernel.output_labels {
            if self.labels.contains(l) {
                return Err(Error::Argument(format!(
                    "kernel output `{l}` already present in pmf"
                )));
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(kernel.output_labels.iter().cloned());
        let mut sizes = self.alphabet_sizes.clone();
        sizes.extend_from_slice(&kernel.output_sizes);
        let out_cells: usize = kernel.output_sizes.iter().product();
        let mut probs = Vec::with_capacity(self.probs.len() * out_cells);
        for (idx, &p) in self.probs.iter().enumerate() {
            let coords = unflat_index(&self.alphabet_sizes, idx);
            let in_coords: Vec<usize> = in_axes.iter().map(|&a| coords[a]).collect();
            let row = kernel.row(&in_coords);
            for &q in row {
                probs.push(p * q);
            }
        }
        Ok(JointPmf {
            labels,
            alphabet_sizes: sizes,
            probs,
        })
    }

    /// Extracts the conditional kernel `P(outputs | inputs)` from this pmf.
    ///
    /// Rows conditioned on zero-mass input cells are filled uniformly.
    pub fn conditional(&self, inputs: &[&str], outputs: &[&str]) -> Result<ChannelKernel> {
        for x in inputs {
            if outputs.contains(x) {
                return Err(Error::Argument(format!(
                    "conditional: label `{x}` is both input and output"
                )));
            }
        }
        let mut all: Vec<&str> = inputs.to_vec();
        all.extend_from_slice(outputs);
        let marg = self.marginalize(&all)?;
        let in_sizes: Vec<usize> = marg.alphabet_sizes[..inputs.len()].to_vec();
        let out_sizes: Vec<usize> = marg.alphabet_sizes[inputs.len()..].to_vec();
        let out_cells: usize = out_sizes.iter().product();
        let in_cells: usize = in_sizes.iter().product::<usize>().max(1);
        let mut rows = Vec::with_capacity(in_cells);
        for i in 0..in_cells {
            let slice = &marg.probs[i * out_cells..(i + 1) * out_cells];
            let mass: f64 = slice.iter().sum();
            if mass <= 0.0 {
                rows.push(vec![1.0 / out_cells as f64; out_cells]);
            } else {
                rows.push(slice.iter().map(|p| p / mass).collect());
            }
        }
        ChannelKernel::new(
            inputs.iter().map(|s| s.to_string()).collect(),
            in_sizes,
            outputs.iter().map(|s| s.to_string()).collect(),
            out_sizes,
            rows,
        )
    }

    /// Expected distortion `E d(s, ŝ)` of a reconstruction pair inside this pmf.
    pub fn expected_distortion(
        &self,
        source_label: &str,
        recon_label: &str,
        table: &[Vec<f64>],
    ) -> Result<f64> {
        let marg = self.marginalize(&[source_label, recon_label])?;
        let ks = marg.alphabet_sizes[0];
        let kr = marg.alphabet_sizes[1];
        let mut acc = 0.0;
        for s in 0..ks {
            for r in 0..kr {
                acc += marg.probs[s * kr + r] * table[s][r];
            }
        }
        Ok(acc)
    }
}

/// Doubly symmetric binary source over labels `("S0", "S1")`:
/// `P(s0, s1) = (1-p)/2` when equal, `p/2` otherwise.
pub fn make_dsbs(p: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Argument(format!("make_dsbs: p {p} outside [0, 1]")));
    }
    let eq = (1.0 - p) / 2.0;
    let ne = p / 2.0;
    JointPmf::new(vec!["S0", "S1"], vec![2, 2], vec![eq, ne, ne, eq])
}

/// Binary triple over `("S0", "S1", "S2")` with `(S0,S1) ~ DSBS(p)`,
/// `(S0,S2) ~ DSBS(p)` and `S1 - S0 - S2` a Markov chain.
pub fn make_gw_b_source(p: f64) -> Result<JointPmf> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Argument(format!(
            "make_gw_b_source: p {p} outside [0, 1]"
        )));
    }
    let mut probs = vec![0.0f64; 8];
    for s0 in 0..2usize {
        for s1 in 0..2usize {
            for s2 in 0..2usize {
                let p01 = if s0 == s1 { (1.0 - p) / 2.0 } else { p / 2.0 };
                let p2g0 = if s0 == s2 { 1.0 - p } else { p };
                probs[s0 * 4 + s1 * 2 + s2] = p01 * p2g0;
            }
        }
    }
    JointPmf::new(vec!["S0", "S1", "S2"], vec![2, 2, 2], probs)
}

/// A conditional probability table `P(outputs | inputs)`, one row per input
/// symbol combination (row-major over `input_sizes`), each row row-major over
/// `output_sizes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelKernel {
    input_labels: Vec<String>,
    input_sizes: Vec<usize>,
    output_labels: Vec<String>,
    output_sizes: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl ChannelKernel {
    pub fn new(
        input_labels: Vec<String>,
        input_sizes: Vec<usize>,
        output_labels: Vec<String>,
        output_sizes: Vec<usize>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if input_labels.len() != input_sizes.len() || output_labels.len() != output_sizes.len() {
            return Err(Error::Argument("kernel label/size count mismatch".into()));
        }
        if output_labels.is_empty() {
            return Err(Error::Argument("kernel needs at least one output".into()));
        }
        let mut seen: Vec<&String> = Vec::new();
        for l in input_labels.iter().chain(output_labels.iter()) {
            if seen.contains(&l) {
                return Err(Error::Argument(format!("duplicate kernel label `{l}`")));
            }
            seen.push(l);
        }
        let in_cells: usize = input_sizes.iter().product::<usize>().max(1);
        let out_cells: usize = output_sizes.iter().product();
        if rows.len() != in_cells {
            return Err(Error::Argument(format!(
                "{} rows for {in_cells} input combinations",
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != out_cells {
                return Err(Error::Argument(format!(
                    "row of length {} for {out_cells} output combinations",
                    row.len()
                )));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Argument("kernel entries must be >= 0".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::Argument(format!(
                    "kernel row mass {s} is not 1 within {MASS_TOL}"
                )));
            }
        }
        Ok(ChannelKernel {
            input_labels,
            input_sizes,
            output_labels,
            output_sizes,
            rows,
        })
    }

    /// Kernel defined by an explicit conditional probability function.
    pub fn from_fn<F>(
        input_labels: Vec<&str>,
        input_sizes: Vec<usize>,
        output_labels: Vec<&str>,
        output_sizes: Vec<usize>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> f64,
    {
        let in_cells: usize = input_sizes.iter().product::<usize>().max(1);
        let out_cells: usize = output_sizes.iter().product();
        let mut rows = Vec::with_capacity(in_cells);
        for i in 0..in_cells {
            let ic = unflat_index(&input_sizes, i);
            let mut row = Vec::with_capacity(out_cells);
            for o in 0..out_cells {
                let oc = unflat_index(&output_sizes, o);
                row.push(f(&ic, &oc));
            }
            rows.push(row);
        }
        ChannelKernel::new(
            input_labels.into_iter().map(String::from).collect(),
            input_sizes,
            output_labels.into_iter().map(String::from).collect(),
            output_sizes,
            rows,
        )
    }

    /// Deterministic single-output kernel `out = f(inputs)`.
    pub fn deterministic<F>(
        input_labels: Vec<&str>,
        input_sizes: Vec<usize>,
        output_label: &str,
        output_size: usize,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[usize]) -> usize,
    {
        ChannelKernel::from_fn(
            input_labels,
            input_sizes.clone(),
            vec![output_label],
            vec![output_size],
            move |ic, oc| if f(ic) == oc[0] { 1.0 } else { 0.0 },
        )
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    pub fn output_sizes(&self) -> &[usize] {
        &self.output_sizes
    }

    /// Conditional row for an input coordinate tuple.
    pub fn row(&self, input_coords: &[usize]) -> &[f64] {
        &self.rows[flat_index(&self.input_sizes, input_coords)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_pair() -> JointPmf {
        JointPmf::new(vec!["S0", "S1"], vec![2, 2], vec![0.25; 4]).unwrap()
    }

    #[test]
    fn entropy_uniform_pair_is_two_bits() {
        let pmf = uniform_pair();
        let h = pmf.entropy(&["S0", "S1"], &[]).unwrap();
        assert!((h - 2.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_dsbs_conditional_matches_h2() {
        let pmf = make_dsbs(0.25).unwrap();
        let h = pmf.entropy(&["S1"], &["S0"]).unwrap();
        // independent oracle: h2(0.25) by direct arithmetic
        let expect = -0.25f64 * 0.25f64.log2() - 0.75 * 0.75f64.log2();
        assert!((h - expect).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn entropy_self_conditioning_is_zero() {
        let pmf = make_dsbs(0.3).unwrap();
        let h = pmf.entropy(&["S0"], &["S0"]).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn entropy_rejects_unknown_label_and_empty_over() {
        let pmf = uniform_pair();
        assert!(matches!(
            pmf.entropy(&["S9"], &[]),
            Err(Error::UnknownLabel(_))
        ));
        assert!(matches!(pmf.entropy(&[], &["S0"]), Err(Error::Argument(_))));
    }

    #[test]
    fn mi_independent_components_is_zero() {
        let pmf = JointPmf::new(
            vec!["A", "B"],
            vec![2, 3],
            vec![0.1, 0.2, 0.2, 0.1, 0.2, 0.2],
        )
        .unwrap();
        // product pmf: P(a) = 0.5, P(b) = (0.2, 0.4, 0.4)
        let mi = pmf.mutual_information(&["A"], &["B"], &[]).unwrap();
        assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn mi_dsbs_quarter() {
        let pmf = make_dsbs(0.25).unwrap();
        let mi = pmf.mutual_information(&["S0"], &["S1"], &[]).unwrap();
        // oracle: exhaustive summation of p log2(p / (p_a p_b))
        let mut direct = 0.0;
        for s0 in 0..2 {
            for s1 in 0..2 {
                let p = pmf.prob(&[s0, s1]);
                direct += p * (p / (0.5 * 0.5)).log2();
            }
        }
        assert!((mi - direct).abs() < 1e-12);
        assert!((mi - 0.188722).abs() < 1e-6);
    }

    #[test]
    fn mi_identical_components_is_one_bit() {
        let pmf = make_dsbs(0.0).unwrap();
        let mi = pmf.mutual_information(&["S0"], &["S1"], &[]).unwrap();
        assert!((mi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mi_rejects_overlap() {
        let pmf = uniform_pair();
        assert!(matches!(
            pmf.mutual_information(&["S0"], &["S0"], &[]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            pmf.mutual_information(&["S0"], &["S1"], &["S1"]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - 0.49992).abs() < 1e-5);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn binary_entropy_symmetry() {
        for i in 0..=20 {
            let a = i as f64 / 20.0;
            let d = binary_entropy(a).unwrap() - binary_entropy(1.0 - a).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn dsbs_construction() {
        let d0 = make_dsbs(0.0).unwrap();
        assert_eq!(d0.prob(&[0, 0]), 0.5);
        assert_eq!(d0.prob(&[0, 1]), 0.0);
        assert_eq!(d0.prob(&[1, 1]), 0.5);

        let half = make_dsbs(0.5).unwrap();
        for c in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(half.prob(&c), 0.25);
        }

        let q = make_dsbs(0.25).unwrap();
        assert_eq!(q.prob(&[0, 0]), 0.375);
        assert_eq!(q.prob(&[1, 1]), 0.375);
        assert_eq!(q.prob(&[0, 1]), 0.125);
        assert_eq!(q.prob(&[1, 0]), 0.125);

        // marginals uniform
        let m = q.marginalize(&["S1"]).unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 1e-15);

        assert!(make_dsbs(1.5).is_err());
    }

    #[test]
    fn gw_b_source_structure() {
        let s = make_gw_b_source(0.0).unwrap();
        assert_eq!(s.prob(&[0, 0, 0]), 0.5);
        assert_eq!(s.prob(&[1, 1, 1]), 0.5);

        let s = make_gw_b_source(0.2).unwrap();
        let h = s.entropy(&["S0", "S1", "S2"], &[]).unwrap();
        let h2 = binary_entropy(0.2).unwrap();
        assert!((h - (1.0 + 2.0 * h2)).abs() < 1e-10);
        assert!((h - 2.443856).abs() < 1e-6);
        assert!((s.entropy(&["S0"], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.entropy(&["S1"], &["S0"]).unwrap() - h2).abs() < 1e-12);
        assert!((s.entropy(&["S2"], &["S0"]).unwrap() - h2).abs() < 1e-12);

        for p in [0.0, 0.1, 0.2, 0.35, 0.5] {
            let s = make_gw_b_source(p).unwrap();
            let mi = s
                .mutual_information(&["S1"], &["S2"], &["S0"])
                .unwrap();
            assert!(mi.abs() < 1e-12, "I(S1;S2|S0) = {mi} at p = {p}");
        }
    }

    #[test]
    fn extend_with_copy_channel() {
        let base = make_dsbs(0.25).unwrap();
        let copy =
            ChannelKernel::deterministic(vec!["S1"], vec![2], "U", 2, |c| c[0]).unwrap();
        let ext = base.extend(&copy).unwrap();
        assert!((ext.entropy(&["U"], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (ext.mutual_information(&["U"], &["S1"], &[]).unwrap() - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn extend_with_constant_channel() {
        let base = make_dsbs(0.25).unwrap();
        let konst =
            ChannelKernel::deterministic(vec!["S1"], vec![2], "U", 2, |_| 0).unwrap();
        let ext = base.extend(&konst).unwrap();
        assert!(ext
            .mutual_information(&["U"], &["S0", "S1"], &[])
            .unwrap()
            .abs()
            < 1e-12);
    }

    #[test]
    fn extend_with_bsc_channel() {
        let base = make_dsbs(0.25).unwrap();
        let bsc = ChannelKernel::from_fn(vec!["S1"], vec![2], vec!["U"], vec![2], |i, o| {
            if i[0] == o[0] {
                0.9
            } else {
                0.1
            }
        })
        .unwrap();
        let ext = base.extend(&bsc).unwrap();
        let mi = ext.mutual_information(&["U"], &["S1"], &[]).unwrap();
        let expect = 1.0 - binary_entropy(0.1).unwrap();
        assert!((mi - expect).abs() < 1e-12);
        assert!((mi - 0.531004).abs() < 1e-6);
    }

    #[test]
    fn extend_then_marginalize_is_identity() {
        let base = make_gw_b_source(0.3).unwrap();
        let k = ChannelKernel::from_fn(
            vec!["S0", "S2"],
            vec![2, 2],
            vec!["U"],
            vec![3],
            |i, o| {
                let w = [0.5, 0.3, 0.2];
                let sh = (i[0] + i[1]) % 3;
                w[(o[0] + sh) % 3]
            },
        )
        .unwrap();
        let ext = base.extend(&k).unwrap();
        let back = ext.marginalize(&["S0", "S1", "S2"]).unwrap();
        for (a, b) in back.probs().iter().zip(base.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn extend_rejects_label_mismatch() {
        let base = make_dsbs(0.25).unwrap();
        let bad_in =
            ChannelKernel::deterministic(vec!["S9"], vec![2], "U", 2, |c| c[0]).unwrap();
        assert!(base.extend(&bad_in).is_err());
        let clash =
            ChannelKernel::deterministic(vec!["S1"], vec![2], "S0", 2, |c| c[0]).unwrap();
        assert!(base.extend(&clash).is_err());
    }

    #[test]
    fn json_round_trip_and_mass_gate() {
        let pmf = make_dsbs(0.25).unwrap();
        let js = serde_json::to_string(&pmf).unwrap();
        let back: JointPmf = serde_json::from_str(&js).unwrap();
        assert_eq!(pmf, back);

        let bad = r#"{"labels":["A"],"alphabet_sizes":[2],"probs":[0.5,0.4]}"#;
        assert!(serde_json::from_str::<JointPmf>(bad).is_err());

        // within the 1e-9 gate: accepted and renormalized
        let near = r#"{"labels":["A"],"alphabet_sizes":[2],"probs":[0.5000000001,0.5]}"#;
        let p: JointPmf = serde_json::from_str(near).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_construction_rejected() {
        assert!(JointPmf::new(vec!["A", "A"], vec![2, 2], vec![0.25; 4]).is_err());
        assert!(JointPmf::new(vec!["A"], vec![2], vec![0.6, 0.6]).is_err());
        assert!(JointPmf::new(vec!["A"], vec![2], vec![-0.1, 1.1]).is_err());
        assert!(JointPmf::new(vec!["A"], vec![3], vec![0.5, 0.5]).is_err());
    }
}
