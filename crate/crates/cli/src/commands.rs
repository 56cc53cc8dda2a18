use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;
use wml_core::integrability::{feller, stochastic_completeness, volume_growth_sc_test, Verdict};
use wml_core::montecarlo::{hitting_laplace, simulate_explosion, trace_paths, write_trace_csv, McError, SimConfig};
use wml_core::spectral::{brooks_vs_ess, half_drift_squared_bound, lambda1_exterior, lambda1_interval, SpectralError};
use wml_core::{load_manifold, preset, ManifoldError, ModelManifold};

use crate::report::{ManifoldEcho, Report};
use crate::reproduce::{reproduce, ExampleId};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid manifold documents, out-of-range parameters.
    #[error("{0}")]
    Usage(String),
    /// A computation that should have worked did not.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl From<ManifoldError> for CliError {
    fn from(e: ManifoldError) -> Self {
        match e {
            ManifoldError::Parse { .. }
            | ManifoldError::Document(_)
            | ManifoldError::Validation(_)
            | ManifoldError::UnknownPreset(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Validation(_) => CliError::Usage(e.to_string()),
            SpectralError::Manifold(m) => m.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Validation(_) => CliError::Usage(e.to_string()),
            McError::Manifold(m) => m.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Every verdict came back Unknown.
    Inconclusive,
    /// A reproduced cell disagrees with the expected classification.
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 3,
            Status::Mismatch => 4,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub status: Status,
    /// Short human-readable lines for stderr.
    pub summary: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(
    name = "wml",
    version,
    about = "Stochastic completeness, Feller property and spectra of weighted model manifolds"
)]
pub struct Cli {
    /// Write the JSON report to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stochastic completeness and Feller verdicts with their evidence
    Classify(ClassifyArgs),
    /// Dirichlet λ1 on balls and exteriors, and the bottom of the essential spectrum
    Spectrum(SpectrumArgs),
    /// Monte Carlo explosion fraction or hitting-time Laplace transform
    Simulate(SimulateArgs),
    /// Rebuild one of the example tables and check every cell
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ManifoldSource {
    /// Manifold document with keys dimension, g, f, label, comparison_exponent
    #[arg(long, value_name = "FILE")]
    pub manifold: Option<PathBuf>,

    /// Built-in model such as euclidean-3, hyperbolic-2, exp-alpha-2-3,
    /// exp-growth-2, gaussian-shrinker-3-0.5 or flat-steady-2
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

impl ManifoldSource {
    pub fn load(&self) -> Result<(ModelManifold, ManifoldEcho), CliError> {
        match (&self.manifold, &self.preset) {
            (Some(path), _) => {
                let doc = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                let m = load_manifold(&doc).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let echo = ManifoldEcho::new(path.display().to_string(), &m);
                Ok((m, echo))
            }
            (None, Some(name)) => {
                let m = preset(name)?.into_manifold();
                let echo = ManifoldEcho::new(format!("preset:{name}"), &m);
                Ok((m, echo))
            }
            (None, None) => Err(CliError::Usage("one of --manifold or --preset is required".into())),
        }
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: ManifoldSource,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: ManifoldSource,

    /// Ball radii, comma separated
    #[arg(long, value_name = "R", value_delimiter = ',', allow_negative_numbers = true)]
    pub ball: Vec<f64>,

    /// Radii R of exterior domains M \ B_R, comma separated
    #[arg(long, value_name = "R", value_delimiter = ',', allow_negative_numbers = true)]
    pub exterior: Vec<f64>,

    /// Increasing radii for the essential-spectrum estimate, e.g. 1,2,4,8
    #[arg(long, value_name = "RADII", value_delimiter = ',', allow_negative_numbers = true)]
    pub ess: Vec<f64>,

    /// Write the (domain, R, λ1) table as CSV
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Write a gnuplot script that plots the CSV table (needs --csv)
    #[arg(long, value_name = "FILE", requires = "csv")]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ManifoldSource,

    /// Number of paths (at least 100)
    #[arg(long, default_value_t = 2000)]
    pub paths: usize,

    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Base Euler–Maruyama step (at most 1e-3)
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,

    /// Absorbing outer radius
    #[arg(long, default_value_t = 50.0)]
    pub outer: f64,

    /// Reflecting inner radius
    #[arg(long, default_value_t = 1e-4)]
    pub inner: f64,

    /// Starting radius
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,

    /// Estimate E[e^{-λτ}] for the hitting time τ of the sphere of this radius
    /// instead of the explosion fraction
    #[arg(long, value_name = "R")]
    pub hit: Option<f64>,

    /// λ in the hitting-time transform
    #[arg(long, default_value_t = 1.0, requires = "hit")]
    pub lambda: f64,

    /// Write per-step (path, t, r) rows of the first --trace-paths paths as CSV
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,

    #[arg(long, default_value_t = 10)]
    pub trace_paths: usize,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    pub example: ExampleId,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reproduce(a) => reproduce(a.example),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payloads serialize")
}

fn envelope(command: &str, manifold: Option<ManifoldEcho>, results: Value) -> Result<Report, CliError> {
    Report::new(command, manifold, results).map_err(CliError::Usage)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Yes => "yes",
        Verdict::No => "no",
        Verdict::Unknown => "unknown",
    }
}

/// Inconclusive only when no property was decided.
pub fn classify_status(sc: Verdict, fe: Verdict) -> Status {
    if sc == Verdict::Unknown && fe == Verdict::Unknown {
        Status::Inconclusive
    } else {
        Status::Ok
    }
}

pub fn cmd_classify(a: &ClassifyArgs) -> Result<Outcome, CliError> {
    let (m, echo) = a.source.load()?;
    let sc = stochastic_completeness(&m);
    let fe = feller(&m);
    let vol = volume_growth_sc_test(&m);
    let status = classify_status(sc.verdict, fe.verdict);
    let mut summary = vec![format!(
        "{}: stochastically complete: {}, Feller: {}",
        m.label(),
        verdict_word(sc.verdict),
        verdict_word(fe.verdict)
    )];
    if let Some(u) = sc.u_star {
        summary.push(format!("u* = {u:.6e}"));
    }
    let results = json!({
        "stochastic_completeness": to_value(&sc),
        "feller": to_value(&fe),
        "volume_growth_test": to_value(&vol),
    });
    let mut report = envelope("classify", Some(echo), results)?;
    for r in [&sc, &fe] {
        if r.verdict == Verdict::Unknown {
            report
                .warnings
                .push(format!("{:?} inconclusive: {}", r.property, r.rule_fired));
        }
    }
    Ok(Outcome {
        report,
        status,
        summary,
    })
}

fn check_radii(flag: &str, radii: &[f64]) -> Result<(), CliError> {
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(CliError::Usage(format!(
            "--{flag}: radii must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<Outcome, CliError> {
    if a.ball.is_empty() && a.exterior.is_empty() && a.ess.is_empty() {
        return Err(CliError::Usage("give at least one of --ball, --exterior, --ess".into()));
    }
    check_radii("ball", &a.ball)?;
    check_radii("exterior", &a.exterior)?;
    check_radii("ess", &a.ess)?;
    if a.ess.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("--ess: radii must be strictly increasing".into()));
    }
    let (m, echo) = a.source.load()?;
    let mut warnings = Vec::new();
    let mut summary = Vec::new();
    let mut rows: Vec<(&str, f64, f64)> = Vec::new();

    let mut balls = Vec::new();
    for &r in &a.ball {
        let res = lambda1_interval(&m, 0.0, r)?;
        if res.cross_check.is_some_and(|c| !c.agrees) {
            warnings.push(format!("ball R={r}: finite-volume cross-check disagrees"));
        }
        summary.push(format!("λ1(B_{r}) = {:.10}", res.lambda1));
        rows.push(("ball", r, res.lambda1));
        balls.push(json!({ "radius": r, "eigen": to_value(&res) }));
    }

    let mut exteriors = Vec::new();
    for &r in &a.exterior {
        let res = lambda1_exterior(&m, r)?;
        if res.cross_check.is_some_and(|c| !c.agrees) {
            warnings.push(format!("exterior R={r}: finite-volume cross-check disagrees"));
        }
        let half_drift = match half_drift_squared_bound(&m, r) {
            Ok(b) => to_value(&b),
            Err(e) => {
                warnings.push(format!("exterior R={r}: half-drift bound: {e}"));
                Value::Null
            }
        };
        summary.push(format!("λ1(M \\ B_{r}) = {:.10}", res.lambda1));
        rows.push(("exterior", r, res.lambda1));
        exteriors.push(json!({ "radius": r, "eigen": to_value(&res), "half_drift_bound": half_drift }));
    }

    let ess = if a.ess.is_empty() {
        Value::Null
    } else {
        let b = brooks_vs_ess(&m, &a.ess)?;
        for (r, e) in &b.ess.failures {
            warnings.push(format!("ess R={r}: {e}"));
        }
        if !b.ess.monotone_ok {
            warnings.push("exterior eigenvalues are not monotone in R".into());
        }
        if b.verbatim_ok == Some(false) {
            warnings.push("essential-spectrum bottom exceeds the verbatim Brooks bound".into());
        }
        for (r, v) in b.ess.radii.iter().zip(&b.ess.exterior_lambda1) {
            if let Some(v) = v {
                rows.push(("ess_exterior", *r, *v));
            }
        }
        summary.push(format!("inf σ_ess ≈ {}", b.ess.bottom_estimate));
        to_value(&b)
    };

    if let Some(path) = &a.csv {
        write_csv(path, &rows)?;
        if let Some(script) = &a.gnuplot {
            write_gnuplot(script, path)?;
        }
    }
    let results = json!({ "ball": balls, "exterior": exteriors, "ess": ess });
    let mut report = envelope("spectrum", Some(echo), results)?;
    report.warnings = warnings;
    Ok(Outcome {
        report,
        status: Status::Ok,
        summary,
    })
}

fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(body))
        .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))
}

fn write_csv(path: &Path, rows: &[(&str, f64, f64)]) -> Result<(), CliError> {
    let mut out = String::from("domain,radius,lambda1\n");
    for (d, r, l) in rows {
        out.push_str(&format!("{d},{r},{l}\n"));
    }
    write_file(path, out.as_bytes())
}

fn write_gnuplot(script: &Path, csv: &Path) -> Result<(), CliError> {
    let body = format!(
        "set datafile separator ','\n\
         set key top left\n\
         set xlabel 'R'\n\
         set ylabel 'lambda_1'\n\
         set logscale x\n\
         data = '{}'\n\
         plot for [d in 'ball exterior ess_exterior'] data skip 1 using 2:(strcol(1) eq d ? $3 : NaN) with linespoints title d\n",
        csv.display()
    );
    write_file(script, body.as_bytes())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let cfg = SimConfig {
        n_paths: a.paths,
        t_max: a.t_max,
        dt_base: a.dt,
        r_absorb_outer: a.outer,
        r_reflect_inner: a.inner,
        seed: a.seed,
    };
    cfg.validate()?;
    if !(a.r0 > a.inner && a.r0 < a.outer) {
        return Err(CliError::Usage(format!(
            "--r0 must lie in ({}, {}), got {}",
            a.inner, a.outer, a.r0
        )));
    }
    let (m, echo) = a.source.load()?;
    let sim = match a.hit {
        Some(r_hit) => hitting_laplace(&m, a.r0, r_hit, a.lambda, &cfg)?,
        None => simulate_explosion(&m, a.r0, &cfg)?,
    };
    let mut summary = vec![format!(
        "explosion fraction {:.4} ± {:.4} over {} paths",
        sim.explosion_fraction, sim.ci95_halfwidth, sim.n_effective
    )];
    for h in &sim.hitting_estimates {
        summary.push(format!(
            "E[exp(-{} τ)] from r0 = {}: {:.5} ± {:.5} (remainder ≤ {:.2e})",
            h.lambda, h.r_start, h.estimate, h.ci95_halfwidth, h.remainder_bound
        ));
    }
    let mut warnings = Vec::new();
    if !sim.halving.ok {
        warnings.push(format!(
            "step-halving check failed: {} at dt vs {} at dt/2",
            sim.halving.estimate, sim.halving.estimate_half_dt
        ));
    }
    if let Some(path) = &a.trace {
        let rows = trace_paths(&m, a.r0, a.hit, &cfg, a.trace_paths)?;
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf)?;
        write_file(path, &buf)?;
    }
    let mut report = envelope("simulate", Some(echo), to_value(&sim))?;
    report.seed = Some(a.seed);
    report.warnings = warnings;
    Ok(Outcome {
        report,
        status: Status::Ok,
        summary,
    })
}
