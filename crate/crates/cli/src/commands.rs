//! Subcommand implementations. Exit codes: 0 success, 2 usage/argument
//! errors, 3 capacity (enumeration too large), 1 anything else.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use srdt_core::cond_rd::DistortionMeasure;
use srdt_core::codec::{run_experiment, ExperimentConfig, SimReport};
use srdt_core::error::Error as CoreError;
use srdt_core::fme::{fixtures, systems_equivalent, LinIneqSystem};
use srdt_core::lemma1::{concentration_bound, hypergeom_stats, sample_counts, HypergeomParams};
use srdt_core::pmf::{binary_entropy, make_dsbs, make_gw_b_source, JointPmf};
use srdt_core::regions::{
    gw_a_binary_points, gw_a_pangloss, gw_b_binary, gw_b_binary_corners, helper_a_lossless,
    helper_b_dsbs, membership_search, Model, RateTuple, SearchConfig,
};

use crate::fmt::{fmt9, fmt_opt};

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Usage(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Json(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) | CliError::Json(_) => 2,
        CliError::Core(CoreError::Argument(_))
        | CliError::Core(CoreError::Parse(_))
        | CliError::Core(CoreError::UnknownLabel(_)) => 2,
        CliError::Core(CoreError::Capacity(_)) => 3,
        _ => 1,
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Worker-count cap from the environment; defaults to 1.
fn threads() -> usize {
    std::env::var("SRDT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConfig {
    pub model: Model,
    /// Crossover of the builtin binary sources; `source` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<JointPmf>,
    pub mode: RegionMode,
    /// For the closed forms that distinguish secrecy: default true.
    #[serde(default = "default_true")]
    pub with_secrecy: bool,
    /// Witness search for models without a full closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    /// Membership verdict per tuple.
    Sweep { tuples: Vec<RateTuple> },
    /// Named corner points of the binary examples.
    Points,
    /// Sum-rate boundary over a distortion grid (helper model).
    Boundary { d1_grid: Vec<f64> },
}

fn source_for(config: &RegionConfig) -> Result<JointPmf> {
    if let Some(pmf) = &config.source {
        return Ok(pmf.clone());
    }
    let p = config
        .p
        .ok_or_else(|| CliError::Usage("region config needs `p` or `source`".into()))?;
    Ok(match config.model {
        Model::GwB => make_gw_b_source(p)?,
        Model::GwA => {
            let base = make_dsbs(p)?;
            JointPmf::new(
                vec!["S1", "S2"],
                base.alphabet_sizes().to_vec(),
                base.probs().to_vec(),
            )?
        }
        _ => make_dsbs(p)?,
    })
}

pub fn region(
    config_path: &Path,
    out: &Path,
    model_guard: Option<&str>,
    p_override: Option<f64>,
    seed_override: Option<u64>,
) -> Result<()> {
    let mut config: RegionConfig = serde_json::from_str(&fs::read_to_string(config_path)?)?;
    if let Some(m) = model_guard {
        if m != config.model.to_string() {
            return Err(CliError::Usage(format!(
                "--model {m} does not match configured model {}",
                config.model
            )));
        }
    }
    if let Some(p) = p_override {
        config.p = Some(p);
    }
    if let Some(seed) = seed_override {
        if let Some(sc) = &mut config.search {
            sc.seed = seed;
        }
    }
    let mut csv = String::new();
    match &config.mode {
        RegionMode::Sweep { tuples } => {
            csv.push_str("model,p,D1,R,R1,R2,delta,member,witness_id\n");
            for t in tuples {
                let (member, witness_id) = sweep_verdict(&config, t)?;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    config.model,
                    fmt_opt(config.p),
                    fmt9(t.d1),
                    fmt9(t.r),
                    fmt9(t.r1),
                    fmt_opt(t.r2),
                    fmt9(t.delta),
                    member,
                    witness_id
                ));
            }
        }
        RegionMode::Points => {
            csv.push_str("model,p,point,r,r1,r2,delta\n");
            let p = config
                .p
                .ok_or_else(|| CliError::Usage("points mode needs `p`".into()))?;
            match config.model {
                Model::GwA => {
                    for pt in gw_a_binary_points(p)? {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            config.model,
                            fmt9(p),
                            pt.name,
                            fmt9(pt.r),
                            fmt9(pt.r1),
                            fmt9(pt.r1),
                            fmt9(pt.delta)
                        ));
                    }
                }
                Model::GwB => {
                    for secrecy in [true, false] {
                        for c in gw_b_binary_corners(p, secrecy)? {
                            csv.push_str(&format!(
                                "{},{},{},{},{},{},{}\n",
                                config.model,
                                fmt9(p),
                                c.name,
                                fmt9(c.r),
                                fmt9(c.r1),
                                fmt9(c.r1),
                                if secrecy { "1" } else { "0" },
                            ));
                        }
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "points mode supports gw_a and gw_b, not {other}"
                    )))
                }
            }
        }
        RegionMode::Boundary { d1_grid } => {
            csv.push_str("model,p,D1,sum_rate_bound\n");
            let p = config
                .p
                .ok_or_else(|| CliError::Usage("boundary mode needs `p`".into()))?;
            if config.model != Model::HelperB {
                return Err(CliError::Usage(
                    "boundary mode is the helper sum-rate sweep".into(),
                ));
            }
            for &d1 in d1_grid {
                let bound =
                    1.0 + (binary_entropy(p)? - binary_entropy(d1.min(0.5))?).max(0.0);
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    config.model,
                    fmt9(p),
                    fmt9(d1),
                    fmt9(bound)
                ));
            }
        }
    }
    fs::write(out, csv)?;
    Ok(())
}

fn sweep_verdict(config: &RegionConfig, t: &RateTuple) -> Result<(String, String)> {
    if t.model != config.model {
        return Err(CliError::Usage("tuple model differs from config model".into()));
    }
    let d1 = DistortionMeasure::hamming(2);
    match config.model {
        Model::HelperB => {
            let p = config
                .p
                .ok_or_else(|| CliError::Usage("helper_b sweep needs `p`".into()))?;
            let member = helper_b_dsbs(p, t, config.with_secrecy)?;
            Ok((member.to_string(), "closed-form".into()))
        }
        Model::HelperA if t.d1 == 0.0 => {
            let source = source_for(config)?;
            let member = helper_a_lossless(&source, t.r, t.r1, t.delta)?;
            Ok((member.to_string(), "closed-form".into()))
        }
        Model::GwB if t.r2 == Some(t.r1) => {
            let p = config
                .p
                .ok_or_else(|| CliError::Usage("gw_b sweep needs `p`".into()))?;
            let member = gw_b_binary(p, t, config.with_secrecy)?;
            Ok((member.to_string(), "closed-form".into()))
        }
        _ => {
            // outer bound first, then optional witness search
            if config.model == Model::GwA {
                let p = config
                    .p
                    .ok_or_else(|| CliError::Usage("gw_a sweep needs `p`".into()))?;
                if t.d1 == 0.0 && t.d2 == Some(0.0) && !gw_a_pangloss(p, t.r, t.r1)? {
                    return Ok(("false".into(), "outer-bound".into()));
                }
            }
            match &config.search {
                None => Ok(("unknown".into(), String::new())),
                Some(sc) => {
                    let source = source_for(config)?;
                    let d2 = config
                        .model
                        .is_gray_wyner()
                        .then(|| DistortionMeasure::hamming(2));
                    let found =
                        membership_search(config.model, &source, &d1, d2.as_ref(), t, sc)?;
                    Ok(match found {
                        Some(w) => ("true".into(), w.id),
                        None => ("none".into(), String::new()),
                    })
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

pub fn figure(name: &str, p: f64, d1: Option<f64>, out: &Path) -> Result<()> {
    let h = binary_entropy(p)?;
    let mut csv = String::from("series,label,r,r1,delta\n");
    let mut row = |series: &str, label: &str, r: f64, r1: f64, delta: Option<f64>| {
        csv.push_str(&format!(
            "{series},{label},{},{},{}\n",
            fmt9(r),
            fmt9(r1),
            fmt_opt(delta)
        ));
    };
    match name {
        "fig6" => {
            let d1 =
                d1.ok_or_else(|| CliError::Usage("fig6 needs --d1".into()))?;
            let bound = 1.0 + (h - binary_entropy(d1.min(0.5))?).max(0.0);
            let steps = 50usize;
            for i in 0..=steps {
                let r1 = bound * i as f64 / steps as f64;
                row("no_secrecy", "", bound - r1, r1, None);
            }
            // perfect secrecy additionally needs R1 >= 1
            let lo = 1.0f64;
            let hi = bound.max(lo);
            for i in 0..=steps {
                let r1 = lo + (hi - lo) * i as f64 / steps as f64;
                row("secret", "", (bound - r1).max(0.0), r1, None);
            }
        }
        "fig7" => {
            let pts = gw_a_binary_points(p)?;
            for pt in &pts {
                row("corner", pt.name, pt.r, pt.r1, Some(pt.delta));
            }
            let find = |n: &str| pts.iter().find(|q| q.name == n).unwrap();
            for n in ["A", "F", "G", "B"] {
                let pt = find(n);
                row("inner_bound", n, pt.r, pt.r1, None);
            }
            // outer bound: intersection of the two sum-rate planes
            let hm = (1.0 - h, h);
            let a = find("A");
            let b = find("B");
            row("outer_bound", "A", a.r, a.r1, None);
            row("outer_bound", "H", hm.0, hm.1, None);
            row("outer_bound", "B", b.r, b.r1, None);
        }
        "fig9" => {
            for (secrecy, label) in [(true, "secret"), (false, "no_secrecy")] {
                for c in gw_b_binary_corners(p, secrecy)? {
                    row("corner", c.name, c.r, c.r1, None);
                }
                let _ = label;
            }
            // perfect-secrecy boundary: sum-rate segment A -> B, then the
            // R1 = 1 wall upward
            let corners = gw_b_binary_corners(p, true)?;
            let (a, b) = (corners[0], corners[1]);
            row("secret_boundary", "A", a.r, a.r1, None);
            row("secret_boundary", "B", b.r, b.r1, None);
            row("secret_boundary", "", 2.0 * (1.0 + h), b.r1, None);
            let corners = gw_b_binary_corners(p, false)?;
            let (c, d) = (corners[0], corners[1]);
            let a_ns = gw_b_binary_corners(p, true)?[0];
            row("no_secrecy_boundary", "D", d.r, d.r1, None);
            row("no_secrecy_boundary", "C", c.r, c.r1, None);
            row("no_secrecy_boundary", "A", a_ns.r, a_ns.r1, None);
        }
        other => return Err(CliError::Usage(format!("unknown figure `{other}`"))),
    }
    fs::write(out, csv)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SimulateOutput {
    config: ExperimentConfig,
    report: SimReport,
}

pub fn simulate(
    config_path: &Path,
    out: &Path,
    csv: Option<&Path>,
    n: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let mut config: ExperimentConfig = serde_json::from_str(&fs::read_to_string(config_path)?)?;
    if let Some(n) = n {
        config.n = n;
    }
    if let Some(trials) = trials {
        config.trials = trials;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let report = run_experiment(&config, threads())?;
    if let Some(csv_path) = csv {
        fs::write(csv_path, sim_csv(&report))?;
    }
    let output = SimulateOutput { config, report };
    fs::write(out, serde_json::to_string_pretty(&output)? + "\n")?;
    Ok(())
}

/// One-row CSV rendering of a report (header + row).
pub fn sim_csv(r: &SimReport) -> String {
    let rates = r
        .rates_used
        .iter()
        .map(|(k, v)| format!("{k}={}", fmt9(*v)))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "scheme,n,delta,trials,seed,encode_success_rate,d1_mean,d2_mean,s0_error_rate,equivocation_per_symbol,rates_used\n{},{},{},{},{},{},{},{},{},{},{}\n",
        r.scheme,
        r.n,
        fmt9(r.delta),
        r.trials,
        r.seed,
        fmt9(r.encode_success_rate),
        fmt_opt(r.d1_mean),
        fmt_opt(r.d2_mean),
        fmt9(r.s0_error_rate),
        fmt9(r.equivocation_per_symbol),
        rates,
    )
}

// ---------------------------------------------------------------------------
// fme
// ---------------------------------------------------------------------------

fn load_system(name: &str) -> Result<LinIneqSystem> {
    let text = if let Some(bundled) = fixtures::bundled(name) {
        bundled.to_string()
    } else {
        fs::read_to_string(name)?
    };
    Ok(LinIneqSystem::parse(&text)?)
}

pub fn fme(
    system: &str,
    project: Option<&str>,
    out: Option<&Path>,
    check: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<()> {
    let sys = load_system(system)?;
    let projected = match project {
        Some(vars) => {
            let names: Vec<&str> = vars.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            sys.fm_project(&names)?
        }
        None => sys,
    };
    if let Some(path) = out {
        fs::write(path, projected.to_text())?;
    }
    if let Some(target) = check {
        let expect = load_system(target)?;
        let equivalent = systems_equivalent(&projected, &expect, samples, seed, &[])?;
        println!("equivalent: {equivalent}");
    } else {
        print!("{}", projected.to_text());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lemma1
// ---------------------------------------------------------------------------

pub fn lemma1(
    population: u64,
    marked: u64,
    draws: u64,
    epsilon: f64,
    trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let params = HypergeomParams::new(population, marked, draws, epsilon)?;
    let (mean, variance) = hypergeom_stats(&params);
    let bound = concentration_bound(&params)?;
    println!(
        "mean {} variance {} chebyshev_bound {}",
        fmt9(mean),
        fmt9(variance),
        fmt9(bound)
    );
    if trials > 0 {
        let counts = sample_counts(&params, trials, seed);
        let emp = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        println!("sampled_mean {}", fmt9(emp));
        if let Some(path) = out {
            let mut csv = String::from("trial,c,n,b,k,mean,var\n");
            for (t, c) in counts.iter().enumerate() {
                csv.push_str(&format!(
                    "{t},{c},{population},{marked},{draws},{},{}\n",
                    fmt9(mean),
                    fmt9(variance)
                ));
            }
            fs::write(path, csv)?;
        }
    }
    Ok(())
}
