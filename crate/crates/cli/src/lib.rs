//! Command-line front end: sampling, spectra, the refined law, edge
//! statistics, local-law scans, community detection and figure data.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use sbm_spectra::acceptance;
use sbm_spectra::config::{figure_recipe, ExperimentConfig, FigureId, Scale};
use sbm_spectra::detect::{count_outliers, detect_once, sweep_k, top_spectrum, GapReport, DEFAULT_C};
use sbm_spectra::detlaw::{ComplexPoint, DeterministicLaw, ETA_FLOOR};
use sbm_spectra::edge::{edge_ensemble_with, histogram, EdgeEnsemble, ExtremalSolver, TwTable};
use sbm_spectra::io::{read_matrix, read_matrix_csv, write_matrix, write_matrix_csv, write_vectors};
use sbm_spectra::model::{cumulant_profile, sample_adjacency, SampleOptions, SbmGraph, SbmParams};
use sbm_spectra::rng::trial_seed;
use sbm_spectra::spectra::{eigen_sym, resolvent_entry_stats};
use sbm_spectra::verify::{
    ids_compare, matrix_norm_check, strong_law_scan, weak_law_scan, GridSpec, IDS_MARGIN, NORM_MARGIN,
    STRONG_MARGIN,
};

pub const THREADS_ENV: &str = "SBM_SPECTRA_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] sbm_spectra::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0} acceptance criteria failed")]
    CheckFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Lib(e) if e.is_numerical() => 2,
            CliError::Lib(_) => 1,
            CliError::CheckFailed(_) => 3,
        }
    }
}

fn lib<E: Into<sbm_spectra::Error>>(e: E) -> CliError {
    CliError::Lib(e.into())
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "sbm-spectra", version, about = "Spectral analysis of sparse stochastic block models")]
pub struct Cli {
    /// Worker threads (default: available parallelism). SBM_SPECTRA_THREADS overrides.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run the acceptance suite; exit 3 if any criterion fails.
    #[arg(long)]
    check: bool,
    /// Criteria to run with --check, e.g. "1,2,5" (default: all).
    #[arg(long, value_delimiter = ',', requires = "check")]
    criteria: Vec<u8>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the rescaled adjacency matrix (or its centred version).
    Sample(SampleArgs),
    /// Eigenvalues, eigenvectors and resolvent statistics of a stored matrix.
    Spectrum(SpectrumArgs),
    /// Evaluate the refined deterministic law and its edge.
    Law(LawArgs),
    /// Largest-eigenvalue ensemble with both edge rescalings.
    Edge(EdgeArgs),
    /// Local-law, density-of-states and norm scans.
    Verify(VerifyArgs),
    /// Outlier counting, gap check and spectral clustering.
    Detect(DetectArgs),
    /// Data behind the published figures.
    Figure(FigureArgs),
}

#[derive(Debug, Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ps: Option<f64>,
    #[arg(long)]
    pd: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Randomly permute the community layout.
    #[arg(long)]
    shuffle_labels: bool,
}

impl ModelArgs {
    fn params(&self) -> Result<SbmParams, CliError> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")));
        let n = self.n.ok_or_else(|| CliError::Usage("missing --n".into()))?;
        let k = self.k.ok_or_else(|| CliError::Usage("missing --k".into()))?;
        let mut p = SbmParams::new(n, k, need(self.ps, "ps")?, need(self.pd, "pd")?, self.seed.unwrap_or(0)).map_err(lib)?;
        p.shuffle_labels = self.shuffle_labels;
        Ok(p)
    }

    /// Model from flags, falling back to `base` for any flag not given.
    fn params_over(&self, base: &SbmParams) -> Result<SbmParams, CliError> {
        let p = SbmParams {
            n_vertices: self.n.unwrap_or(base.n_vertices),
            n_communities: self.k.unwrap_or(base.n_communities),
            p_intra: self.ps.unwrap_or(base.p_intra),
            p_inter: self.pd.unwrap_or(base.p_inter),
            seed: self.seed.unwrap_or(base.seed),
            shuffle_labels: self.shuffle_labels || base.shuffle_labels,
        };
        p.validate().map_err(lib)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum MatrixFormat {
    Bin,
    Csv,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Subtract the block means.
    #[arg(long)]
    centered: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Bin)]
    format: MatrixFormat,
    /// Sample even below the connectivity scale N·p_d < 1.
    #[arg(long)]
    allow_disconnected: bool,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Matrix file (SBMS container, or CSV with --format csv).
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Bin)]
    format: MatrixFormat,
    /// Eigenvalue CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write eigenvectors (SBMV container, one row per eigenvector).
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Print Λ_d, Λ_o and the Wald residual at z = E + iη, given as "E,eta".
    #[arg(long, value_parser = parse_z, allow_hyphen_values = true)]
    stats: Option<ComplexPoint>,
}

#[derive(Debug, Args)]
struct LawArgs {
    #[arg(long, allow_hyphen_values = true)]
    xi4: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Energy grid "E0:E1:steps".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    /// Print the edge L_t next to 2 + c₄.
    #[arg(long)]
    edge: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum SolverArg {
    Lanczos,
    Dense,
}

#[derive(Debug, Args)]
struct EdgeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Per-trial CSV: trial, lambda1, rescaled_L, rescaled_2.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print KS distance, mean and variance for both rescalings.
    #[arg(long)]
    summary: bool,
    /// Print the summary as JSON.
    #[arg(long, requires = "summary")]
    json: bool,
    /// Emit histogram counts of both rescalings.
    #[arg(long)]
    hist: bool,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Lanczos)]
    solver: SolverArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ScanArg {
    Strong,
    Weak,
    Ids,
    Norm,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    scan: ScanArg,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// TOML file holding `energies`, `etas` and optionally `domain`.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Experiment config (TOML); flags override its model.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    margin: Option<f64>,
    /// JSON report path (default: stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "k-true")]
    k_true: usize,
    #[arg(long)]
    ps: f64,
    #[arg(long)]
    pd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outlier threshold offset: eigenvalues above 2 + c count.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Cluster with the estimated number of outliers instead of the true K.
    #[arg(long)]
    estimate_k: bool,
    /// Gap table over K in "a:b" (K must divide N).
    #[arg(long)]
    sweep_k: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, value_parser = parse_figure)]
    which: FigureId,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the parameter bundle as TOML.
    #[arg(long)]
    config_out: Option<PathBuf>,
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse()
}

fn parse_z(s: &str) -> Result<ComplexPoint, String> {
    let (e, eta) = s.split_once(',').ok_or("expected \"E,eta\"")?;
    let e: f64 = e.trim().parse().map_err(|_| format!("bad energy {e:?}"))?;
    let eta: f64 = eta.trim().parse().map_err(|_| format!("bad eta {eta:?}"))?;
    ComplexPoint::new(e, eta).map_err(|err| err.to_string())
}

fn parse_range<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(':')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<Vec<T>, _>>()
        .map_err(|_| CliError::Usage(format!("bad {what} {s:?}")))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => match flag {
            Some(0) => Err(CliError::Usage("--threads must be positive".into())),
            other => Ok(other),
        },
    }
}

fn execute(cli: Cli) -> CliResult {
    if let Some(n) = thread_count(cli.threads)? {
        // A pool may already exist when `run` is called repeatedly in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.check {
        if cli.command.is_some() {
            return Err(CliError::Usage("--check takes no subcommand".into()));
        }
        return check(&cli.criteria);
    }
    match cli.command {
        Some(Command::Sample(a)) => sample(a),
        Some(Command::Spectrum(a)) => spectrum(a),
        Some(Command::Law(a)) => law(a),
        Some(Command::Edge(a)) => edge(a),
        Some(Command::Verify(a)) => verify(a),
        Some(Command::Detect(a)) => detect(a),
        Some(Command::Figure(a)) => figure(a),
        None => Err(CliError::Usage("a subcommand or --check is required (see --help)".into())),
    }
}

fn check(criteria: &[u8]) -> CliResult {
    let ids: Vec<u8> = if criteria.is_empty() {
        acceptance::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        criteria.to_vec()
    };
    if let Some(bad) = ids.iter().find(|&&id| !(1..=15).contains(&id)) {
        return Err(CliError::Usage(format!("no criterion {bad} (valid: 1-15)")));
    }
    let mut failed = 0;
    for id in ids {
        let r = acceptance::run(id);
        println!("{r}");
        if !r.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

fn sample(a: SampleArgs) -> CliResult {
    let params = a.model.params()?;
    let opts = SampleOptions {
        allow_disconnected: a.allow_disconnected,
    };
    let adjacency = sample_adjacency(&params, params.seed, opts).map_err(lib)?;
    let m = if a.centered {
        sbm_spectra::model::center_rescale(&adjacency, &params).map_err(lib)?
    } else {
        adjacency
    };
    match a.format {
        MatrixFormat::Bin => write_matrix(&a.out, &m, params.n_communities).map_err(lib)?,
        MatrixFormat::Csv => write_matrix_csv(&a.out, &m).map_err(lib)?,
    }
    println!(
        "wrote {}x{} {} matrix to {}",
        m.order(),
        m.order(),
        if a.centered { "centred" } else { "adjacency" },
        a.out.display()
    );
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> CliResult {
    let h = match a.format {
        MatrixFormat::Bin => read_matrix(&a.input).map_err(lib)?.0,
        MatrixFormat::Csv => read_matrix_csv(&a.input).map_err(lib)?,
    };
    let s = eigen_sym(&h, a.vectors.is_some()).map_err(lib)?;
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "index,eigenvalue")?;
    for (i, v) in s.eigenvalues().iter().enumerate() {
        writeln!(w, "{i},{v:.17e}")?;
    }
    w.flush()?;
    drop(w);
    if let (Some(path), Some(vecs)) = (&a.vectors, s.eigenvectors()) {
        write_vectors(path, s.order(), s.order(), vecs).map_err(lib)?;
    }
    if let Some(p) = a.stats {
        let st = resolvent_entry_stats(&h, p.z(), true).map_err(lib)?;
        eprintln!(
            "z = {}+{}i: Lambda_d = {:.6e}, Lambda_o = {:.6e}, Wald residual = {:.3e}, m = {:.10}{:+.10}i",
            p.energy, p.eta, st.lambda_d, st.lambda_o, st.wald_residual, st.m_re, st.m_im
        );
    }
    Ok(())
}

fn law(a: LawArgs) -> CliResult {
    let law = DeterministicLaw::new(a.xi4, a.q, a.t).map_err(lib)?;
    if a.edge {
        println!("L = {:.10}    2 + c4 = {:.10}", law.edge(), law.edge_asymptotic());
        if a.grid.is_none() {
            return Ok(());
        }
    }
    let spec = a.grid.as_deref().unwrap_or("-2.9:2.9:59");
    let parts: Vec<f64> = parse_range(spec, "grid")?;
    let [e0, e1, steps] = parts[..] else {
        return Err(CliError::Usage(format!("grid must be \"E0:E1:steps\", got {spec:?}")));
    };
    if !(steps >= 1.0 && steps.fract() == 0.0) {
        return Err(CliError::Usage(format!("grid steps must be a positive integer, got {steps}")));
    }
    let energies = sbm_spectra::verify::linspace(e0, e1, steps as usize);
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "E,eta,Re_mtilde,Im_mtilde,rho_tilde")?;
    for e in energies {
        let m = law.mtilde(Complex64::new(e, a.eta)).map_err(lib)?;
        let rho = law.rho(e, ETA_FLOOR).map_err(lib)?;
        writeln!(w, "{e},{},{:.15e},{:.15e},{rho:.15e}", a.eta, m.re, m.im)?;
    }
    w.flush()?;
    Ok(())
}

fn run_edge_ensemble(params: &SbmParams, trials: usize, solver: ExtremalSolver) -> Result<EdgeEnsemble, CliError> {
    let profile = cumulant_profile(params).map_err(lib)?;
    let law = DeterministicLaw::from_profile(&profile, 0.0).map_err(lib)?;
    edge_ensemble_with(params, trials, &law, solver).map_err(lib)
}

fn write_edge_csv(w: &mut dyn Write, ens: &EdgeEnsemble) -> io::Result<()> {
    writeln!(w, "trial,lambda1,rescaled_L,rescaled_2")?;
    for i in 0..ens.lambda1.len() {
        writeln!(
            w,
            "{i},{:.15e},{:.15e},{:.15e}",
            ens.lambda1[i], ens.rescaled_l[i], ens.rescaled_2[i]
        )?;
    }
    Ok(())
}

fn edge(a: EdgeArgs) -> CliResult {
    let params = a.model.params()?;
    let solver = match a.solver {
        SolverArg::Lanczos => ExtremalSolver::Lanczos,
        SolverArg::Dense => ExtremalSolver::Dense,
    };
    let ens = run_edge_ensemble(&params, a.trials, solver)?;
    if a.out.is_some() || (!a.summary && !a.hist) {
        let mut w = output(a.out.as_deref())?;
        write_edge_csv(&mut w, &ens)?;
        w.flush()?;
    }
    if a.hist {
        println!("bin_lo,bin_hi,count_L,count_2");
        let hl = histogram(&ens.rescaled_l, -6.0, 4.0, a.bins);
        let h2 = histogram(&ens.rescaled_2, -6.0, 4.0, a.bins);
        for (l, t) in hl.iter().zip(&h2) {
            println!("{},{},{},{}", l.0, l.1, l.2, t.2);
        }
    }
    if a.summary {
        let s = ens.summary(TwTable::embedded()).map_err(lib)?;
        if a.json {
            println!("{}", json(&s));
        } else {
            println!("trials {}  L = {:.6}  regime {:?}", s.trials, s.edge, s.regime);
            println!("shift L: KS = {:.4}  mean = {:.4}  variance = {:.4}", s.ks_l, s.mean_l, s.var_l);
            println!("shift 2: KS = {:.4}  mean = {:.4}  variance = {:.4}", s.ks_2, s.mean_2, s.var_2);
        }
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn verify(a: VerifyArgs) -> CliResult {
    let config = match &a.config {
        Some(p) => Some(ExperimentConfig::from_toml(&read_text(p)?).map_err(lib)?),
        None => None,
    };
    let params = match &config {
        Some(c) => a.model.params_over(&c.model)?,
        None => a.model.params()?,
    };
    let trials = a.trials.or(config.as_ref().and_then(|c| c.trials)).unwrap_or(20);
    let margin = a.margin.or(config.as_ref().and_then(|c| c.margin));
    let grid = match &a.grid_file {
        Some(p) => Some(toml::from_str::<GridSpec>(&read_text(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?),
        None => config.as_ref().and_then(|c| c.grid.clone()),
    };
    let report = match a.scan {
        ScanArg::Strong => {
            let grid = grid.unwrap_or_default();
            strong_law_scan(&params, &grid, trials, margin.unwrap_or(STRONG_MARGIN)).map_err(lib)?
        }
        ScanArg::Weak => {
            let zs = match config.as_ref().and_then(|c| c.z_list()) {
                Some(z) => z,
                None => match &grid {
                    Some(g) => g.points(),
                    None => sbm_spectra::acceptance::weak_points(),
                },
            };
            weak_law_scan(&params, &zs, trials, margin).map_err(lib)?
        }
        ScanArg::Ids => {
            let intervals: Vec<(f64, f64)> = config
                .as_ref()
                .and_then(|c| c.intervals.clone())
                .map(|v| v.into_iter().map(|i| (i[0], i[1])).collect())
                .unwrap_or_else(|| vec![(-2.5, -1.0), (-1.0, 1.0), (1.0, 1.8), (1.8, 2.2)]);
            ids_compare(&params, &intervals, trials, margin.unwrap_or(IDS_MARGIN)).map_err(lib)?
        }
        ScanArg::Norm => matrix_norm_check(&params, trials, margin.unwrap_or(NORM_MARGIN)).map_err(lib)?,
    };
    let text = report.to_json();
    match &a.report {
        Some(p) => {
            std::fs::write(p, text + "\n")?;
            println!(
                "{} scan: {} points, median ratio {:.4}, max ratio {:.4}, pass {}",
                report.scan,
                report.points.len(),
                report.summary.median_ratio,
                report.summary.max_ratio,
                report.summary.pass
            );
        }
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DetectOutput {
    k_true: usize,
    k_hat: usize,
    gap_report: GapReport,
    accuracy: Option<f64>,
    top_eigenvalues: Vec<f64>,
}

fn detect(a: DetectArgs) -> CliResult {
    let params = SbmParams::new(a.n, a.k_true, a.ps, a.pd, a.seed).map_err(lib)?;
    if let Some(spec) = &a.sweep_k {
        let r: Vec<usize> = parse_range(spec, "K range")?;
        let [lo, hi] = r[..] else {
            return Err(CliError::Usage(format!("--sweep-k expects \"a:b\", got {spec:?}")));
        };
        let ks: Vec<usize> = (lo..=hi).collect();
        let reports = sweep_k(&params, &ks, a.c).map_err(lib)?;
        println!("k,lambda_k,lambda_k1,gap,intra_bulk_gap,pass");
        for g in reports {
            println!(
                "{},{:.10},{:.10},{:.10},{:.10},{}",
                g.k, g.lambda_k, g.lambda_k1, g.gap, g.intra_bulk_gap, g.pass
            );
        }
        return Ok(());
    }
    let outcome = if a.estimate_k {
        let probe = detect_once(&params, a.seed, a.c, false).map_err(lib)?;
        if probe.k_hat == a.k_true {
            detect_once(&params, a.seed, a.c, true).map_err(lib)?
        } else {
            probe
        }
    } else {
        detect_once(&params, a.seed, a.c, true).map_err(lib)?
    };
    let out = DetectOutput {
        k_true: a.k_true,
        k_hat: outcome.k_hat,
        gap_report: outcome.gap_report,
        accuracy: outcome.accuracy,
        top_eigenvalues: outcome.top_eigenvalues,
    };
    println!("{}", json(&out));
    Ok(())
}

fn figure(a: FigureArgs) -> CliResult {
    let scale = match a.scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Paper => Scale::Paper,
    };
    let mut cfg = figure_recipe(a.which, scale);
    cfg.model.seed = a.seed;
    if let Some(t) = a.trials {
        if t == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        cfg.trials = Some(t);
    }
    if let Some(p) = &a.config_out {
        std::fs::write(p, cfg.to_toml())?;
    }
    let params = cfg.model;
    let trials = cfg.trials.unwrap_or(1);
    for w in &cfg.warnings {
        eprintln!("warning: {}", serde_json::to_string(w).expect("serializes").trim_matches('"'));
    }
    let mut out = output(a.out.as_deref())?;
    if a.which.is_edge() {
        let ens = run_edge_ensemble(&params, trials, ExtremalSolver::Lanczos)?;
        write_edge_csv(&mut out, &ens)?;
        out.flush()?;
        let s = ens.summary(TwTable::embedded()).map_err(lib)?;
        eprintln!(
            "figure {}: N = {}, L = {:.6}, KS_L = {:.4}, KS_2 = {:.4}, mean_L = {:.4}, mean_2 = {:.4}",
            a.which, params.n_vertices, s.edge, s.ks_l, s.ks_2, s.mean_l, s.mean_2
        );
    } else {
        let k = params.n_communities;
        let threshold = 2.0 + cfg.threshold_c.unwrap_or(DEFAULT_C);
        let runs: Vec<(Vec<f64>, usize)> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(params.seed, t);
                let g = SbmGraph::sample(&params, seed).map_err(lib)?;
                let s = top_spectrum(&g, k + 3, false, seed.rotate_left(23) ^ 0xde7e).map_err(lib)?;
                Ok((s.eigenvalues().to_vec(), count_outliers(&s, threshold)))
            })
            .collect::<Result<_, CliError>>()?;
        writeln!(out, "trial,index,eigenvalue,outlier")?;
        for (t, (ev, _)) in runs.iter().enumerate() {
            for (i, v) in ev.iter().enumerate() {
                writeln!(out, "{t},{i},{v:.15e},{}", *v > threshold)?;
            }
        }
        out.flush()?;
        for (t, (_, c)) in runs.iter().enumerate() {
            eprintln!("trial {t}: outlier count {c} (threshold {threshold})");
        }
    }
    Ok(())
}
