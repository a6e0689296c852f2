//! Exact Fourier-Motzkin elimination over rational-coefficient linear
//! inequalities with symbolic nonnegative constants.
//!
//! A system holds rows of the form
//! `sum(c_v * var) + sum(c_k * const) + offset  >= 0` (or `= 0`), with every
//! coefficient an exact rational. Constants are opaque nonnegative
//! parameters; no relation between them is assumed unless written as a row.
//!
//! Redundancy removal is syntactic only (duplicates, constant-only
//! tautologies, coefficient dominance at identical variable parts);
//! [`systems_equivalent`] compensates with a semantic comparison of the
//! concrete polyhedra obtained by sampling the constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Bundled inequality systems in the text format of [`LinIneqSystem::parse`].
pub mod fixtures {
    /// Helper split-rate system with the equivocation cap.
    pub const EQ92: &str = include_str!("../systems/eq92.sys");
    /// Helper split-rate system for the encryption-based scheme.
    pub const EQ114: &str = include_str!("../systems/eq114.sys");
    /// Gray-Wyner two-receiver split-rate system.
    pub const EQ147: &str = include_str!("../systems/eq147.sys");
    /// Projected form of `EQ92`.
    pub const EQ14: &str = include_str!("../systems/eq14.sys");
    /// Projected form of `EQ114`.
    pub const EQ115: &str = include_str!("../systems/eq115.sys");
    /// Projected form of `EQ147`.
    pub const THM5: &str = include_str!("../systems/thm5.sys");

    /// Looks a bundled system up by file name.
    pub fn bundled(name: &str) -> Option<&'static str> {
        match name {
            "eq92.sys" => Some(EQ92),
            "eq114.sys" => Some(EQ114),
            "eq147.sys" => Some(EQ147),
            "eq14.sys" => Some(EQ14),
            "eq115.sys" => Some(EQ115),
            "thm5.sys" => Some(THM5),
            _ => None,
        }
    }

    /// Names of all bundled systems.
    pub const NAMES: [&str; 6] = [
        "eq92.sys",
        "eq114.sys",
        "eq147.sys",
        "eq14.sys",
        "eq115.sys",
        "thm5.sys",
    ];
}

/// One linear row: variable part, constant part, rational offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub var_coeffs: Vec<BigRational>,
    pub const_coeffs: Vec<BigRational>,
    pub offset: BigRational,
}

impl Row {
    fn zero(nv: usize, nc: usize) -> Self {
        Row {
            var_coeffs: vec![BigRational::zero(); nv],
            const_coeffs: vec![BigRational::zero(); nc],
            offset: BigRational::zero(),
        }
    }

    fn add_scaled(&self, other: &Row, scale: &BigRational) -> Row {
        Row {
            var_coeffs: self
                .var_coeffs
                .iter()
                .zip(&other.var_coeffs)
                .map(|(a, b)| a + b * scale)
                .collect(),
            const_coeffs: self
                .const_coeffs
                .iter()
                .zip(&other.const_coeffs)
                .map(|(a, b)| a + b * scale)
                .collect(),
            offset: &self.offset + &other.offset * scale,
        }
    }

    fn scale(&self, s: &BigRational) -> Row {
        Row {
            var_coeffs: self.var_coeffs.iter().map(|a| a * s).collect(),
            const_coeffs: self.const_coeffs.iter().map(|a| a * s).collect(),
            offset: &self.offset * s,
        }
    }

    fn drop_var(&mut self, idx: usize) {
        self.var_coeffs.remove(idx);
    }

    fn is_zero(&self) -> bool {
        self.var_coeffs.iter().all(Zero::is_zero)
            && self.const_coeffs.iter().all(Zero::is_zero)
            && self.offset.is_zero()
    }

    // Scales by the positive rational that makes all coefficients coprime
    // integers. Sign is preserved (a row is one side of an inequality).
    fn canonicalize(&mut self) {
        let mut lcm = BigInt::one();
        for c in self
            .var_coeffs
            .iter()
            .chain(self.const_coeffs.iter())
            .chain(std::iter::once(&self.offset))
        {
            if !c.is_zero() {
                lcm = big_lcm(lcm, c.denom().clone());
            }
        }
        let lcm_r = BigRational::from(lcm);
        let mut gcd = BigInt::zero();
        for c in self
            .var_coeffs
            .iter_mut()
            .chain(self.const_coeffs.iter_mut())
            .chain(std::iter::once(&mut self.offset))
        {
            *c *= &lcm_r;
            gcd = big_gcd(gcd, c.numer().abs());
        }
        if !gcd.is_zero() && !gcd.is_one() {
            let g = BigRational::from(gcd);
            for c in self
                .var_coeffs
                .iter_mut()
                .chain(self.const_coeffs.iter_mut())
                .chain(std::iter::once(&mut self.offset))
            {
                *c /= &g;
            }
        }
    }
}

fn big_gcd(a: BigInt, b: BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

fn big_lcm(a: BigInt, b: BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    let g = big_gcd(a.clone(), b.clone());
    (a / g * b).abs()
}

/// A system of linear inequalities (`>= 0`) and equalities (`= 0`) over named
/// rate variables and named nonnegative symbolic constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LinIneqSystem {
    vars: Vec<String>,
    consts: Vec<String>,
    ineqs: Vec<Row>,
    eqs: Vec<Row>,
}

impl LinIneqSystem {
    pub fn new(
        vars: Vec<String>,
        consts: Vec<String>,
        ineqs: Vec<Row>,
        eqs: Vec<Row>,
    ) -> Result<Self> {
        let mut seen: Vec<&String> = Vec::new();
        for n in vars.iter().chain(consts.iter()) {
            if seen.contains(&n) {
                return Err(Error::Argument(format!("duplicate name `{n}`")));
            }
            seen.push(n);
        }
        for r in ineqs.iter().chain(eqs.iter()) {
            if r.var_coeffs.len() != vars.len() || r.const_coeffs.len() != consts.len() {
                return Err(Error::Argument(
                    "row width does not match declarations".into(),
                ));
            }
        }
        Ok(LinIneqSystem {
            vars,
            consts,
            ineqs,
            eqs,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn consts(&self) -> &[String] {
        &self.consts
    }

    pub fn ineqs(&self) -> &[Row] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[Row] {
        &self.eqs
    }

    fn var_idx(&self, var: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::UnknownLabel(var.to_string()))
    }

    /// Projects out one variable.
    ///
    /// An equality involving the variable is substituted out first; otherwise
    /// all pairwise combinations of lower and upper bounds are formed and
    /// variable-free rows pass through. Syntactically redundant rows are
    /// removed from the result.
    pub fn fm_eliminate(&self, var: &str) -> Result<LinIneqSystem> {
        let idx = self.var_idx(var)?;
        let mut sys = self.clone();

        if let Some(epos) = sys.eqs.iter().position(|e| !e.var_coeffs[idx].is_zero()) {
            let eq = sys.eqs.remove(epos);
            let pivot = eq.var_coeffs[idx].clone();
            let substitute = |row: &Row| -> Row {
                if row.var_coeffs[idx].is_zero() {
                    row.clone()
                } else {
                    let s = -&row.var_coeffs[idx] / &pivot;
                    row.add_scaled(&eq, &s)
                }
            };
            sys.ineqs = sys.ineqs.iter().map(substitute).collect();
            sys.eqs = sys.eqs.iter().map(substitute).collect();
        } else {
            let mut lowers: Vec<Row> = Vec::new(); // positive coefficient on var
            let mut uppers: Vec<Row> = Vec::new(); // negative coefficient
            let mut rest: Vec<Row> = Vec::new();
            for r in &sys.ineqs {
                let c = &r.var_coeffs[idx];
                if c.is_zero() {
                    rest.push(r.clone());
                } else if c.is_positive() {
                    lowers.push(r.scale(&(BigRational::one() / c)));
                } else {
                    uppers.push(r.scale(&(-BigRational::one() / c)));
                }
            }
            let mut combined = rest;
            for l in &lowers {
                for u in &uppers {
                    combined.push(l.add_scaled(u, &BigRational::one()));
                }
            }
            sys.ineqs = combined;
        }

        sys.vars.remove(idx);
        for r in sys.ineqs.iter_mut().chain(sys.eqs.iter_mut()) {
            r.drop_var(idx);
        }
        sys.cleanup();
        Ok(sys)
    }

    /// Folds [`Self::fm_eliminate`] over `vars` in order.
    pub fn fm_project(&self, vars: &[&str]) -> Result<LinIneqSystem> {
        let mut sys = self.clone();
        for v in vars {
            sys = sys.fm_eliminate(v)?;
        }
        Ok(sys)
    }

    fn cleanup(&mut self) {
        for r in self.ineqs.iter_mut().chain(self.eqs.iter_mut()) {
            r.canonicalize();
        }
        self.eqs.retain(|r| !r.is_zero());
        // constant-only tautologies under nonnegative constants
        self.ineqs.retain(|r| {
            let const_only = r.var_coeffs.iter().all(Zero::is_zero);
            let trivially_true = const_only
                && r.const_coeffs.iter().all(|c| !c.is_negative())
                && !r.offset.is_negative();
            !trivially_true
        });
        // duplicates
        let mut kept: Vec<Row> = Vec::new();
        for r in self.ineqs.drain(..) {
            if !kept.contains(&r) {
                kept.push(r);
            }
        }
        // dominance: same variable part, weaker constant part
        let mut drop = vec![false; kept.len()];
        for i in 0..kept.len() {
            if drop[i] {
                continue;
            }
            for j in 0..kept.len() {
                if i == j || drop[j] {
                    continue;
                }
                if kept[i].var_coeffs == kept[j].var_coeffs {
                    // j redundant if j = i + nonneg consts + nonneg offset
                    let consts_ge = kept[j]
                        .const_coeffs
                        .iter()
                        .zip(&kept[i].const_coeffs)
                        .all(|(cj, ci)| !(cj - ci).is_negative());
                    let off_ge = !(&kept[j].offset - &kept[i].offset).is_negative();
                    if consts_ge && off_ge && kept[i] != kept[j] {
                        drop[j] = true;
                    }
                }
            }
        }
        self.ineqs = kept
            .into_iter()
            .zip(drop)
            .filter_map(|(r, d)| if d { None } else { Some(r) })
            .collect();
    }

    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// vars R00 R01 R
    /// consts a b
    /// R00 + R01 - a >= 0
    /// R - R00 - R01 = 0
    /// ```
    ///
    /// Rows may also carry expressions on the right-hand side
    /// (`R + R1 >= a + b`); they are moved left.
    pub fn parse(text: &str) -> Result<LinIneqSystem> {
        let mut vars: Vec<String> = Vec::new();
        let mut consts: Vec<String> = Vec::new();
        let mut ineqs: Vec<Row> = Vec::new();
        let mut eqs: Vec<Row> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let first = toks.next().unwrap();
            if first == "vars" {
                vars.extend(toks.map(String::from));
                continue;
            }
            if first == "consts" {
                consts.extend(toks.map(String::from));
                continue;
            }
            let (lhs, rhs, is_eq) = if let Some((l, r)) = line.split_once(">=") {
                (l, r, false)
            } else if let Some((l, r)) = line.split_once("<=") {
                (r, l, false) // a <= b reads as b - a >= 0
            } else if let Some((l, r)) = line.split_once('=') {
                (l, r, true)
            } else {
                return Err(Error::Parse(format!("line {}: no relation", lineno + 1)));
            };
            let mut row = Row::zero(vars.len(), consts.len());
            parse_expr(lhs, &vars, &consts, &mut row, false, lineno)?;
            parse_expr(rhs, &vars, &consts, &mut row, true, lineno)?;
            if is_eq {
                eqs.push(row);
            } else {
                ineqs.push(row);
            }
        }
        LinIneqSystem::new(vars, consts, ineqs, eqs)
    }

    /// Renders the system in the format accepted by [`Self::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("vars");
        for v in &self.vars {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        if !self.consts.is_empty() {
            out.push_str("consts");
            for c in &self.consts {
                out.push(' ');
                out.push_str(c);
            }
            out.push('\n');
        }
        for (row, eq) in self
            .ineqs
            .iter()
            .map(|r| (r, false))
            .chain(self.eqs.iter().map(|r| (r, true)))
        {
            out.push_str(&render_row(row, &self.vars, &self.consts));
            out.push_str(if eq { " = 0\n" } else { " >= 0\n" });
        }
        out
    }
}

fn render_row(row: &Row, vars: &[String], consts: &[String]) -> String {
    let mut parts: Vec<(BigRational, String)> = Vec::new();
    for (c, v) in row.var_coeffs.iter().zip(vars) {
        if !c.is_zero() {
            parts.push((c.clone(), v.clone()));
        }
    }
    for (c, k) in row.const_coeffs.iter().zip(consts) {
        if !c.is_zero() {
            parts.push((c.clone(), k.clone()));
        }
    }
    if !row.offset.is_zero() {
        parts.push((row.offset.clone(), String::new()));
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (c, name)) in parts.iter().enumerate() {
        let mag = c.abs();
        if i == 0 {
            if c.is_negative() {
                s.push_str("- ");
            }
        } else if c.is_negative() {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        if name.is_empty() {
            s.push_str(&mag.to_string());
        } else if mag.is_one() {
            s.push_str(name);
        } else {
            s.push_str(&format!("{mag} {name}"));
        }
    }
    s
}

fn parse_rational(tok: &str) -> Option<BigRational> {
    if let Some((n, d)) = tok.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = tok.parse().ok()?;
        Some(BigRational::from(n))
    }
}

fn parse_expr(
    expr: &str,
    vars: &[String],
    consts: &[String],
    row: &mut Row,
    negate: bool,
    lineno: usize,
) -> Result<()> {
    let base_sign = if negate { -1i32 } else { 1 };
    let mut sign = base_sign;
    let mut pending: Option<BigRational> = None;
    fn flush(pend: &mut Option<BigRational>, row: &mut Row, sgn: i32) {
        if let Some(c) = pend.take() {
            row.offset += if sgn < 0 { -c } else { c };
        }
    }
    for tok in expr.split_whitespace() {
        match tok {
            "+" => {
                flush(&mut pending, row, sign);
                sign = base_sign;
            }
            "-" => {
                flush(&mut pending, row, sign);
                sign = -base_sign;
            }
            _ => {
                if let Some(r) = parse_rational(tok) {
                    flush(&mut pending, row, sign);
                    pending = Some(r);
                } else {
                    let coef = pending.take().unwrap_or_else(BigRational::one);
                    let coef = if sign < 0 { -coef } else { coef };
                    if let Some(i) = vars.iter().position(|v| v == tok) {
                        row.var_coeffs[i] += coef;
                    } else if let Some(i) = consts.iter().position(|c| c == tok) {
                        row.const_coeffs[i] += coef;
                    } else {
                        return Err(Error::Parse(format!(
                            "line {}: unknown name `{tok}`",
                            lineno + 1
                        )));
                    }
                    sign = base_sign;
                }
            }
        }
    }
    flush(&mut pending, row, sign);
    Ok(())
}

// ---------------------------------------------------------------------------
// Semantic equivalence by constant sampling.
// ---------------------------------------------------------------------------

// Small exact rational on i128 for the concrete phase; panics on overflow,
// which the bounded sampling ranges rule out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rat {
    n: i128,
    d: i128, // > 0
}

impl Rat {
    const ZERO: Rat = Rat { n: 0, d: 1 };

    fn new(n: i128, d: i128) -> Rat {
        assert!(d != 0, "zero denominator");
        let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g == 0 {
            Rat { n: 0, d: 1 }
        } else {
            Rat { n: n / g, d: d / g }
        }
    }

    fn from_int(n: i128) -> Rat {
        Rat { n, d: 1 }
    }

    fn add(self, o: Rat) -> Rat {
        let num = self
            .n
            .checked_mul(o.d)
            .and_then(|a| o.n.checked_mul(self.d).and_then(|b| a.checked_add(b)))
            .expect("rational overflow");
        Rat::new(num, self.d.checked_mul(o.d).expect("rational overflow"))
    }

    fn sub(self, o: Rat) -> Rat {
        self.add(o.neg())
    }

    fn mul(self, o: Rat) -> Rat {
        Rat::new(
            self.n.checked_mul(o.n).expect("rational overflow"),
            self.d.checked_mul(o.d).expect("rational overflow"),
        )
    }

    fn div(self, o: Rat) -> Rat {
        assert!(o.n != 0, "division by zero");
        Rat::new(
            self.n.checked_mul(o.d).expect("rational overflow"),
            self.d.checked_mul(o.n).expect("rational overflow"),
        )
    }

    fn neg(self) -> Rat {
        Rat {
            n: -self.n,
            d: self.d,
        }
    }

    fn is_zero(self) -> bool {
        self.n == 0
    }

    fn is_nonneg(self) -> bool {
        self.n >= 0
    }

    #[cfg(test)]
    fn cmp_val(self, o: Rat) -> std::cmp::Ordering {
        let l = self.n.checked_mul(o.d).expect("rational overflow");
        let r = o.n.checked_mul(self.d).expect("rational overflow");
        l.cmp(&r)
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn big_to_rat(b: &BigRational) -> Rat {
    let n: i128 = b.numer().try_into().expect("coefficient exceeds i128");
    let d: i128 = b.denom().try_into().expect("denominator exceeds i128");
    Rat::new(n, d)
}

// Concrete polyhedron over the variables: rows (coeffs, constant), each >= 0.
struct Concrete {
    rows: Vec<(Vec<Rat>, Rat)>,
    dim: usize,
}

impl Concrete {
    fn from_system(sys: &LinIneqSystem, var_order: &[String], const_vals: &[Rat]) -> Concrete {
        let dim = var_order.len();
        let col: Vec<usize> = var_order
            .iter()
            .map(|v| sys.vars.iter().position(|w| w == v).unwrap())
            .collect();
        let mut rows = Vec::new();
        let mut push = |r: &Row, flip: bool| {
            let mut coeffs = Vec::with_capacity(dim);
            for &c in &col {
                let v = big_to_rat(&r.var_coeffs[c]);
                coeffs.push(if flip { v.neg() } else { v });
            }
            let mut k = big_to_rat(&r.offset);
            for (cc, cv) in r.const_coeffs.iter().zip(const_vals) {
                k = k.add(big_to_rat(cc).mul(*cv));
            }
            if flip {
                k = k.neg();
            }
            rows.push((coeffs, k));
        };
        for r in &sys.ineqs {
            push(r, false);
        }
        for r in &sys.eqs {
            push(r, false);
            push(r, true);
        }
        Concrete { rows, dim }
    }

    fn contains(&self, point: &[Rat]) -> bool {
        self.rows.iter().all(|(coeffs, k)| {
            let mut acc = *k;
            for (c, x) in coeffs.iter().zip(point) {
                if !c.is_zero() && !x.is_zero() {
                    acc = acc.add(c.mul(*x));
                }
            }
            acc.is_nonneg()
        })
    }

    // All vertices: solutions of d linearly independent tight rows that
    // satisfy every row.
    fn vertices(&self) -> Vec<Vec<Rat>> {
        let d = self.dim;
        let mut out: Vec<Vec<Rat>> = Vec::new();
        let m = self.rows.len();
        if d == 0 || m < d {
            return out;
        }
        for idx in combinations(m, d) {
            if let Some(p) = solve_square(&self.rows, &idx, d) {
                if self.contains(&p) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    // Recession-cone ray candidates: nullspace directions of (d-1)-subsets of
    // row normals, filtered by the recession condition. The set contains all
    // extreme rays of a pointed cone, which suffices for validity checks.
    fn recession_rays(&self) -> Vec<Vec<Rat>> {
        let d = self.dim;
        let mut out: Vec<Vec<Rat>> = Vec::new();
        if d == 0 {
            return out;
        }
        let push_if_ray = |dir: Vec<Rat>, out: &mut Vec<Vec<Rat>>| {
            for cand in [dir.clone(), dir.iter().map(|x| x.neg()).collect::<Vec<_>>()] {
                if cand.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let ok = self.rows.iter().all(|(coeffs, _)| {
                    let mut acc = Rat::ZERO;
                    for (c, x) in coeffs.iter().zip(&cand) {
                        if !c.is_zero() && !x.is_zero() {
                            acc = acc.add(c.mul(*x));
                        }
                    }
                    acc.is_nonneg()
                });
                if ok {
                    let canon = canon_dir(&cand);
                    if !out.contains(&canon) {
                        out.push(canon);
                    }
                }
            }
        };
        if d == 1 {
            push_if_ray(vec![Rat::from_int(1)], &mut out);
            return out;
        }
        let m = self.rows.len();
        if m < d - 1 {
            return out;
        }
        for idx in combinations(m, d - 1) {
            if let Some(dir) = nullspace_dir(&self.rows, &idx, d) {
                push_if_ray(dir, &mut out);
            }
        }
        out
    }

    // Row (coeffs, k) is valid over the polyhedron iff nonnegative at all
    // vertices and its linear part is nonnegative along all recession rays.
    fn implies_row(
        &self,
        vertices: &[Vec<Rat>],
        rays: &[Vec<Rat>],
        coeffs: &[Rat],
        k: Rat,
    ) -> bool {
        for v in vertices {
            let mut acc = k;
            for (c, x) in coeffs.iter().zip(v) {
                if !c.is_zero() && !x.is_zero() {
                    acc = acc.add(c.mul(*x));
                }
            }
            if !acc.is_nonneg() {
                return false;
            }
        }
        for r in rays {
            let mut acc = Rat::ZERO;
            for (c, x) in coeffs.iter().zip(r) {
                if !c.is_zero() && !x.is_zero() {
                    acc = acc.add(c.mul(*x));
                }
            }
            if !acc.is_nonneg() {
                return false;
            }
        }
        true
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn canon_dir(dir: &[Rat]) -> Vec<Rat> {
    // scale magnitude only; the sign of a ray is meaningful
    let lead = dir.iter().find(|x| !x.is_zero()).copied().unwrap();
    let scale = if lead.is_nonneg() { lead } else { lead.neg() };
    dir.iter().map(|x| x.div(scale)).collect()
}

// Solves rows[idx] (as equalities) for a unique point; None if singular.
fn solve_square(rows: &[(Vec<Rat>, Rat)], idx: &[usize], d: usize) -> Option<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
    let mut b: Vec<Rat> = idx.iter().map(|&i| rows[i].1.neg()).collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].div(p);
                for c in col..d {
                    let v = a[col][c].mul(f);
                    a[r][c] = a[r][c].sub(v);
                }
                b[r] = b[r].sub(b[col].mul(f));
            }
        }
    }
    let mut x = vec![Rat::ZERO; d];
    for r in 0..d {
        x[r] = b[r].div(a[r][r]);
    }
    Some(x)
}

// One-dimensional nullspace of the (d-1) x d matrix rows[idx]; None if the
// nullity is not exactly one.
fn nullspace_dir(rows: &[(Vec<Rat>, Rat)], idx: &[usize], d: usize) -> Option<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
    let m = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..d {
        if row >= m {
            break;
        }
        if let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) {
            a.swap(row, p);
            let pv = a[row][col];
            for r in 0..m {
                if r != row && !a[r][col].is_zero() {
                    let f = a[r][col].div(pv);
                    for c in col..d {
                        let v = a[row][c].mul(f);
                        a[r][c] = a[r][c].sub(v);
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
        }
    }
    if pivot_cols.len() != d - 1 {
        return None;
    }
    let free_col = (0..d).find(|c| !pivot_cols.contains(c)).unwrap();
    let mut dir = vec![Rat::ZERO; d];
    dir[free_col] = Rat::from_int(1);
    for (r, &pc) in pivot_cols.iter().enumerate() {
        dir[pc] = a[r][free_col].div(a[r][pc]).neg();
    }
    Some(dir)
}

/// Semantic equivalence check between two systems over the same variables.
///
/// Draws `samples` nonnegative rational assignments to the symbolic
/// constants; for each, compares the two concrete polyhedra by (i) membership
/// agreement on 1000 random rational points and (ii) mutual row implication
/// through exact vertex/ray reasoning. Returns `true` iff no disagreement is
/// found. `const_aliases` maps constant names of `b` onto names of `a`.
pub fn systems_equivalent(
    a: &LinIneqSystem,
    b: &LinIneqSystem,
    samples: usize,
    seed: u64,
    const_aliases: &[(&str, &str)],
) -> Result<bool> {
    let mut a_vars = a.vars.clone();
    let mut b_vars = b.vars.clone();
    a_vars.sort();
    b_vars.sort();
    if a_vars != b_vars {
        return Err(Error::Argument(format!(
            "variable sets differ: {:?} vs {:?}",
            a.vars, b.vars
        )));
    }
    let var_order = a.vars.clone();
    let b_const_pos: Vec<usize> = b
        .consts
        .iter()
        .map(|cb| {
            let name = const_aliases
                .iter()
                .find(|(from, _)| from == cb)
                .map(|(_, to)| *to)
                .unwrap_or(cb.as_str());
            a.consts
                .iter()
                .position(|ca| ca == name)
                .ok_or_else(|| Error::UnknownLabel(format!("constant `{cb}` has no counterpart")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = var_order.len();
    for _ in 0..samples {
        let a_vals: Vec<Rat> = (0..a.consts.len())
            .map(|_| Rat::new(rng.random_range(0..=24i128), rng.random_range(1..=8i128)))
            .collect();
        let b_vals: Vec<Rat> = b_const_pos.iter().map(|&i| a_vals[i]).collect();
        let ca = Concrete::from_system(a, &var_order, &a_vals);
        let cb = Concrete::from_system(b, &var_order, &b_vals);

        // (i) random point membership agreement
        let hi: i128 = 24 * 2 + 8;
        for _ in 0..1000 {
            let p: Vec<Rat> = (0..dim)
                .map(|_| Rat::new(rng.random_range(-4 * 64..=hi * 64), 64))
                .collect();
            if ca.contains(&p) != cb.contains(&p) {
                return Ok(false);
            }
        }

        // (ii) mutual implication via vertices and rays
        let va = ca.vertices();
        let ra = ca.recession_rays();
        let vb = cb.vertices();
        let rb = cb.recession_rays();
        for (coeffs, k) in &cb.rows {
            if !ca.implies_row(&va, &ra, coeffs, *k) {
                return Ok(false);
            }
        }
        for (coeffs, k) in &ca.rows {
            if !cb.implies_row(&vb, &rb, coeffs, *k) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
