//! `pdmchain` command-line front end.
//!
//! Every command writes its CSV outputs into `--out` followed by a
//! `manifest.json` listing each file with its SHA-256 digest. CSV numbers use
//! 17 significant digits and rows are written in a fixed order, so outputs
//! are byte-identical for identical flags whatever `--threads` is.
//!
//! A `--config PATH` file holds `key = value` lines named like the long
//! flags (`n-list = 500,1000`); flags given on the command line win.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure, 3 validation failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::eigensolve::{eigenvalues, kahan_sum, SolverOptions};
use crate::error::Error;
use crate::format::sig17;
use crate::hamiltonian::{build_full, build_h0, build_h1, ChainSpec, TridiagonalOperator, Variant};
use crate::limits;
use crate::observables::{
    self, dos_histogram, edge_from_profile, extrapolate_fractions, fraction_above, l1_distance, pr_profile,
    AnalyticDos, ScalingStudy, ScalingThresholds,
};
use crate::validate::{self, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error("validation failed")]
    Validation,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
            CliError::Validation => EXIT_VALIDATION,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "pdmchain", version, about = "Spectra of the position-dependent-mass tight-binding chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All eigenvalues of the full operator -> spectrum.csv
    Spectrum(CommonArgs),
    /// Density-of-states histogram -> dos.csv (and dos_analytic.csv)
    Dos(DosArgs),
    /// Participation ratio of every eigenstate -> pr.csv
    Pr(CommonArgs),
    /// Finite-size scaling of the participation ratio at target energies -> scaling.csv
    Scaling(ScalingArgs),
    /// Mobility edge from a scaling sweep over an energy grid -> edge.csv
    Edge(EdgeArgs),
    /// Fraction of levels above the edge over a gammaN grid -> fraction.csv
    Fraction(FractionArgs),
    /// Closed-form Bloch and Laguerre levels -> limits.csv
    Limits(CommonArgs),
    /// Run the self-check suite and print a pass/fail table
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantArg {
    Canonical,
    Literal,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Canonical => Variant::Canonical,
            VariantArg::Literal => Variant::LiteralSum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorArg {
    H0,
    H1,
    Full,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Number of sites N
    #[arg(long, value_parser = parse_positive)]
    pub n: Option<usize>,
    /// Mass-gradient parameter gamma
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// gamma = c * N^(-alpha), given as `c,alpha`
    #[arg(long = "gamma-scaled", value_parser = parse_pair)]
    pub gamma_scaled: Option<(f64, f64)>,
    /// Fixed product gamma*N
    #[arg(long = "gammaN")]
    pub gamma_n: Option<f64>,
    /// Comma-separated, strictly increasing site counts
    #[arg(long = "n-list", value_delimiter = ',', value_parser = parse_positive)]
    pub n_list: Vec<usize>,
    #[arg(long, value_enum, default_value = "canonical")]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 100, value_parser = parse_positive)]
    pub bins: usize,
    /// Histogram range `lo,hi`
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub range: Option<(f64, f64)>,
    /// Solver tolerance relative to the spectral width
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Worker threads (default: available parallelism)
    #[arg(long, value_parser = parse_positive)]
    pub threads: Option<usize>,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// `key = value` config file mirroring the long flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for randomized checks
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DosArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Which operator to histogram
    #[arg(long, value_enum, default_value = "full")]
    pub op: OperatorArg,
    /// Also write the bin-averaged analytic density (h0 or h1 only)
    #[arg(long)]
    pub analytic: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated target energies
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EdgeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Spacing of the energy grid `-2 + step*k` inside the band
    #[arg(long, default_value_t = 0.2)]
    pub step: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FractionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated gamma*N values
    #[arg(long = "gammaN-grid", value_delimiter = ',', default_value = "0,0.25,0.5,1,2,4")]
    pub gamma_n_grid: Vec<f64>,
    /// Energy above which levels count as localized
    #[arg(long, default_value_t = 2.0)]
    pub edge: f64,
}

impl CommonArgs {
    fn solver(&self) -> Result<SolverOptions, CliError> {
        let opts = SolverOptions::default().with_tol(self.tol);
        opts.validate().map_err(|e| usage(e.to_string()))?;
        Ok(opts)
    }

    fn chain_spec(&self) -> Result<ChainSpec, CliError> {
        let n = self.n.ok_or_else(|| usage("--n is required"))?;
        let given = [self.gamma.is_some(), self.gamma_scaled.is_some(), self.gamma_n.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given > 1 {
            return Err(usage("give at most one of --gamma, --gamma-scaled, --gammaN"));
        }
        let spec = if let Some((c, alpha)) = self.gamma_scaled {
            ChainSpec::scaled(n, c, alpha)
        } else if let Some(gn) = self.gamma_n {
            ChainSpec::with_gamma_n(n, gn)
        } else {
            ChainSpec::new(n, self.gamma.unwrap_or(0.0))
        };
        Ok(spec.map_err(|e| usage(e.to_string()))?.with_variant(self.variant.into()))
    }

    fn required_gamma_n(&self) -> Result<f64, CliError> {
        let gn = self.gamma_n.ok_or_else(|| usage("--gammaN is required"))?;
        if !(gn.is_finite() && gn >= 0.0) {
            return Err(usage("--gammaN must be non-negative"));
        }
        Ok(gn)
    }

    fn required_n_list(&self) -> Result<Vec<usize>, CliError> {
        if self.n_list.is_empty() {
            return Err(usage("--n-list is required"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("--n-list must be strictly increasing"));
        }
        Ok(self.n_list.clone())
    }
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Spectrum(c) | Command::Pr(c) | Command::Limits(c) | Command::Validate(c) => c,
            Command::Dos(a) => &a.common,
            Command::Scaling(a) => &a.common,
            Command::Edge(a) => &a.common,
            Command::Fraction(a) => &a.common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Dos(_) => "dos",
            Command::Pr(_) => "pr",
            Command::Scaling(_) => "scaling",
            Command::Edge(_) => "edge",
            Command::Fraction(_) => "fraction",
            Command::Limits(_) => "limits",
            Command::Validate(_) => "validate",
        }
    }

    fn args_json(&self) -> Value {
        let v = match self {
            Command::Spectrum(c) | Command::Pr(c) | Command::Limits(c) | Command::Validate(c) => serde_json::to_value(c),
            Command::Dos(a) => serde_json::to_value(a),
            Command::Scaling(a) => serde_json::to_value(a),
            Command::Edge(a) => serde_json::to_value(a),
            Command::Fraction(a) => serde_json::to_value(a),
        };
        v.unwrap_or(Value::Null)
    }
}

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Timing {
    phase: String,
    seconds: f64,
}

/// Collects outputs and metadata; writes the manifest last.
struct RunContext {
    out: PathBuf,
    files: Vec<FileEntry>,
    timings: Vec<Timing>,
    checks: serde_json::Map<String, Value>,
}

impl RunContext {
    fn new(out: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out)?;
        Ok(Self {
            out: out.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
            checks: serde_json::Map::new(),
        })
    }

    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let v = f();
        self.timings.push(Timing {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        v
    }

    fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut body = String::with_capacity(rows.len() * 48);
        body.push_str(header);
        body.push('\n');
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        fs::write(self.out.join(name), body.as_bytes())?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: body.len(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
        });
        Ok(())
    }

    fn check(&mut self, key: &str, value: Value) {
        self.checks.insert(key.to_string(), value);
    }

    fn finish(self, cmd: &Command, opts: Option<SolverOptions>) -> Result<(), CliError> {
        let manifest = json!({
            "command": cmd.name(),
            "arguments": cmd.args_json(),
            "solver": opts,
            "version": env!("CARGO_PKG_VERSION"),
            "timings": self.timings,
            "checks": self.checks,
            "files": self.files,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        fs::write(self.out.join("manifest.json"), text)?;
        Ok(())
    }
}

fn relative_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn cmd_spectrum(c: &CommonArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let spec = c.chain_spec()?;
    let opts = c.solver()?;
    let op = build_full(&spec);
    let values = ctx.time("eigenvalues", || eigenvalues(&op, &opts))?;
    let rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(i, e)| vec![(i + 1).to_string(), sig17(*e)])
        .collect();
    ctx.write_csv("spectrum.csv", "index,energy", &rows)?;

    let trace = kahan_sum(values.iter().copied());
    let diag_sum = kahan_sum(op.diag().iter().copied());
    let closed_form = spec.gamma() * spec.n_sites() as f64 * (spec.n_sites() as f64 + 1.0);
    let m2 = kahan_sum(values.iter().map(|x| x * x));
    let m2_expected = kahan_sum(op.diag().iter().map(|d| d * d)) + 2.0 * kahan_sum(op.off().iter().map(|e| e * e));
    let trace_err = relative_error(trace, diag_sum);
    let m2_err = relative_error(m2, m2_expected);
    ctx.check(
        "trace_identity",
        json!({
            "sum_eigenvalues": trace,
            "sum_diagonal": diag_sum,
            "gamma_n_n_plus_1": closed_form,
            "relative_error": trace_err,
            "pass": trace_err <= 1e-8,
        }),
    );
    ctx.check(
        "second_moment_identity",
        json!({ "relative_error": m2_err, "pass": m2_err <= 1e-8 }),
    );
    Ok(opts)
}

fn cmd_dos(a: &DosArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let c = &a.common;
    let spec = c.chain_spec()?;
    let opts = c.solver()?;
    let analytic = match (a.analytic, a.op) {
        (false, _) => None,
        (true, OperatorArg::H0) => Some(AnalyticDos::Uniform),
        (true, OperatorArg::H1) => {
            if spec.gamma() <= 0.0 {
                return Err(usage("--analytic with --op h1 needs gamma > 0"));
            }
            Some(AnalyticDos::Gradient {
                gamma: spec.gamma(),
                n: spec.n_sites(),
            })
        }
        (true, OperatorArg::Full) => return Err(usage("--analytic is available for --op h0 or h1 only")),
    };
    let op = match a.op {
        OperatorArg::H0 => build_h0(&spec),
        OperatorArg::H1 => build_h1(&spec),
        OperatorArg::Full => build_full(&spec),
    };
    let values = ctx.time("eigenvalues", || eigenvalues(&op, &opts))?;
    let hist = dos_histogram(&values, c.bins, c.range)?;
    let rows: Vec<Vec<String>> = (0..hist.bins())
        .map(|b| vec![sig17(hist.edges[b]), sig17(hist.edges[b + 1]), sig17(hist.density[b])])
        .collect();
    ctx.write_csv("dos.csv", "bin_left,bin_right,density", &rows)?;
    ctx.check("histogram", json!({ "integral": hist.integral(), "outside": hist.outside }));
    if let Some(reference) = analytic {
        let avg = reference.bin_averages(&hist.edges)?;
        let rows: Vec<Vec<String>> = (0..hist.bins())
            .map(|b| vec![sig17(hist.edges[b]), sig17(hist.edges[b + 1]), sig17(avg[b])])
            .collect();
        ctx.write_csv("dos_analytic.csv", "bin_left,bin_right,density", &rows)?;
        let skip_edges = matches!(reference, AnalyticDos::Uniform);
        ctx.check(
            "analytic_l1",
            json!({ "l1": l1_distance(&hist, &avg, skip_edges), "edge_bins_skipped": skip_edges }),
        );
    }
    Ok(opts)
}

fn cmd_pr(c: &CommonArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let spec = c.chain_spec()?;
    let opts = c.solver()?;
    let records = ctx.time("participation_ratios", || pr_profile(&spec, &opts))?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| vec![r.index.to_string(), sig17(r.energy), sig17(r.pr), sig17(r.pr_norm)])
        .collect();
    ctx.write_csv("pr.csv", "index,energy,pr,pr_norm", &rows)?;
    Ok(opts)
}

fn thresholds() -> ScalingThresholds {
    ScalingThresholds::default()
}

fn cmd_scaling(a: &ScalingArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let c = &a.common;
    let gn = c.required_gamma_n()?;
    let n_list = c.required_n_list()?;
    let opts = c.solver()?;
    let study = ctx.time("spectra", || {
        ScalingStudy::new(gn, &n_list, c.variant.into(), opts, thresholds())
    })?;
    let verdicts = ctx.time("classification", || {
        a.targets
            .iter()
            .map(|&t| study.classify(t))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut rows = Vec::new();
    for v in &verdicts {
        for (n, p) in &v.samples {
            rows.push(vec![
                sig17(v.energy_target),
                n.to_string(),
                sig17(*p),
                v.trend.map_or_else(|| "NaN".to_string(), sig17),
                v.classification.as_str().to_string(),
            ]);
        }
    }
    ctx.write_csv("scaling.csv", "energy_target,N,pr_norm,slope,classification", &rows)?;
    let edge = match edge_from_profile(verdicts) {
        Ok(e) => json!({ "edge": e.edge, "violations": e.violations }),
        Err(e) => json!({ "edge": null, "reason": e.to_string() }),
    };
    ctx.check("edge_estimate", edge);
    Ok(opts)
}

fn cmd_edge(a: &EdgeArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let c = &a.common;
    let gn = c.required_gamma_n()?;
    let n_list = c.required_n_list()?;
    if !(a.step.is_finite() && a.step > 0.0) {
        return Err(usage("--step must be positive"));
    }
    let opts = c.solver()?;
    let study = ctx.time("spectra", || {
        ScalingStudy::new(gn, &n_list, c.variant.into(), opts, thresholds())
    })?;
    let (_, top) = study.common_window();
    let grid: Vec<f64> = observables::default_energy_grid(gn, a.step)
        .into_iter()
        .filter(|e| *e <= top)
        .collect();
    let verdicts = ctx.time("classification", || {
        grid.iter()
            .map(|&t| study.classify(t))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows: Vec<Vec<String>> = verdicts
        .iter()
        .map(|v| {
            vec![
                sig17(v.energy_target),
                v.trend.map_or_else(|| "NaN".to_string(), sig17),
                v.classification.as_str().to_string(),
            ]
        })
        .collect();
    ctx.write_csv("edge.csv", "energy_target,slope,classification", &rows)?;
    let edge = edge_from_profile(verdicts)?;
    ctx.check(
        "mobility_edge",
        json!({
            "edge": edge.edge,
            "highest_extended": edge.highest_extended,
            "lowest_localized": edge.lowest_localized,
            "violations": edge.violations,
        }),
    );
    Ok(opts)
}

fn cmd_fraction(a: &FractionArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let c = &a.common;
    let n_list = if c.n_list.is_empty() {
        vec![200, 400, 800, 1600]
    } else {
        c.required_n_list()?
    };
    if n_list.len() < 3 {
        return Err(usage("--n-list needs at least 3 sizes for the extrapolation"));
    }
    if a.gamma_n_grid.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
        return Err(usage("--gammaN-grid values must be non-negative"));
    }
    let mut grid = a.gamma_n_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let opts = c.solver()?;
    let variant: Variant = c.variant.into();
    let items: Vec<(f64, usize)> = grid.iter().flat_map(|&g| n_list.iter().map(move |&n| (g, n))).collect();
    let fractions = ctx.time("spectra", || {
        items
            .par_iter()
            .map(|&(gn, n)| {
                let spec = ChainSpec::with_gamma_n(n, gn)?.with_variant(variant);
                let values = eigenvalues(&build_full(&spec), &opts)?;
                Ok((spec.gamma(), fraction_above(&values, a.edge)))
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut rows = Vec::new();
    let mut limits_json = Vec::new();
    for (gi, &gn) in grid.iter().enumerate() {
        let chunk = &fractions[gi * n_list.len()..(gi + 1) * n_list.len()];
        let per_n: Vec<(usize, f64)> = n_list.iter().copied().zip(chunk.iter().map(|(_, f)| *f)).collect();
        let ex = extrapolate_fractions(gn, per_n)?;
        for (k, &n) in n_list.iter().enumerate() {
            rows.push(vec![sig17(chunk[k].0), n.to_string(), sig17(chunk[k].1), sig17(ex.limit)]);
        }
        limits_json.push(json!({ "gammaN": gn, "limit": ex.limit, "residual_rms": ex.residual_rms }));
    }
    ctx.write_csv("fraction.csv", "gamma,N,fraction,extrapolated", &rows)?;
    ctx.check("extrapolation", Value::Array(limits_json));
    Ok(opts)
}

fn cmd_limits(c: &CommonArgs, ctx: &mut RunContext) -> Result<SolverOptions, CliError> {
    let spec = c.chain_spec()?;
    let n = spec.n_sites();
    let rows = (1..=n)
        .map(|j| {
            let theta = limits::solve_theta(j, n, 1e-14)?;
            Ok(vec![
                j.to_string(),
                sig17(limits::bloch_energy(j, n)?),
                sig17(theta.theta),
                sig17(limits::laguerre_energy(j, n, spec.gamma())?),
            ])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    ctx.write_csv("limits.csv", "j,bloch_energy,theta,laguerre_energy", &rows)?;
    c.solver()
}

fn cmd_validate(c: &CommonArgs, ctx: &mut RunContext) -> Result<(SolverOptions, bool), CliError> {
    let builder = |s: &ChainSpec| -> TridiagonalOperator { build_full(s) };
    let results = ctx.time("checks", || validate::run_suite(&builder, c.seed))?;
    print!("{}", validate::render_table(&results));
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.name.to_string(),
                if r.passed { "PASS" } else { "FAIL" }.to_string(),
                r.detail.replace(',', ";"),
            ]
        })
        .collect();
    ctx.write_csv("validate.csv", "check,status,detail", &rows)?;
    let ok = results.iter().all(|r| r.passed);
    ctx.check("all_passed", json!(ok));
    Ok((c.solver()?, ok))
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    let mut ctx = RunContext::new(&common.out)?;
    let mut validation_ok = true;
    let opts = match cmd {
        Command::Spectrum(c) => cmd_spectrum(c, &mut ctx)?,
        Command::Dos(a) => cmd_dos(a, &mut ctx)?,
        Command::Pr(c) => cmd_pr(c, &mut ctx)?,
        Command::Scaling(a) => cmd_scaling(a, &mut ctx)?,
        Command::Edge(a) => cmd_edge(a, &mut ctx)?,
        Command::Fraction(a) => cmd_fraction(a, &mut ctx)?,
        Command::Limits(c) => cmd_limits(c, &mut ctx)?,
        Command::Validate(c) => {
            let (o, ok) = cmd_validate(c, &mut ctx)?;
            validation_ok = ok;
            o
        }
    };
    ctx.finish(cmd, Some(opts))?;
    if validation_ok {
        Ok(())
    } else {
        Err(CliError::Validation)
    }
}

/// Finds `--config PATH` (or `--config=PATH`) in raw arguments.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Parses `key = value` lines into flag arguments. `#` starts a comment.
/// Boolean flags are written as `analytic = true`.
pub fn config_to_args(text: &str) -> Result<Vec<(String, Option<String>)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(usage(format!("config line {}: invalid key", lineno + 1)));
        }
        match value {
            "true" => out.push((key.to_string(), None)),
            "false" => {}
            v => out.push((key.to_string(), Some(v.to_string()))),
        }
    }
    Ok(out)
}

/// Inserts config-file flags after the subcommand, skipping keys that are
/// already on the command line.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = config_to_args(&text)?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        let with_eq = format!("--{key}=");
        args.iter().any(|a| {
            let s = a.to_string_lossy();
            s == flag || s.starts_with(&with_eq)
        })
    };
    let sub_pos = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
        .ok_or_else(|| usage("missing subcommand"))?;
    let mut merged: Vec<OsString> = args[..=sub_pos].to_vec();
    for (key, value) in entries {
        if given(&key) {
            continue;
        }
        merged.push(format!("--{key}").into());
        if let Some(v) = value {
            merged.push(format!("--{key}={v}").split_once('=').map(|(_, v)| v.to_string()).unwrap_or(v).into());
        }
    }
    merged.extend(args[sub_pos + 1..].iter().cloned());
    Ok(merged)
}

/// Parses arguments (including any config file) and runs the command.
pub fn run(args: Vec<OsString>) -> Result<(), CliError> {
    let args = merge_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                _ => Err(usage(e.to_string())),
            };
        }
    };
    let common = cli.command.common();
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| execute(&cli.command))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    match run(args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let mut msg = String::new();
            let _ = write!(msg, "{e}");
            eprintln!("{}", msg.trim_end());
            e.exit_code()
        }
    }
}
