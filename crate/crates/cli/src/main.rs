use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kt_core::algebra::parse_rat;
use kt_core::analysis::{
    default_mode, eliminated_matrix, plan, run_analysis, AnalysisError, AnalysisOptions, Mode, Verdict,
};
use kt_core::metric::{builtin, parse_metric_file, MetricError, MetricSpec, BUILTIN_NAMES};
use kt_core::momentum::PhiParity;
use kt_core::system::{branch_counts, meqns, nvars, trivials_count, BranchSpec};
use kt_core::Rat;

const EXIT_USAGE: u8 = 2;
const EXIT_METRIC: u8 = 3;
const EXIT_POINT: u8 = 4;
const EXIT_NON_GENERIC: u8 = 5;
const EXIT_INTERNAL: u8 = 6;

#[derive(Parser)]
#[command(name = "ktcert", version, about = "Certified upper bounds on polynomial first integrals of stationary axisymmetric metrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the prolongation and rank pipeline and write a bound report.
    Analyze(AnalyzeArgs),
    /// Print equation/unknown counts `meqns/nvars` of a prolonged system.
    Counts(CountsArgs),
    /// Parse, validate and print a metric with its Hamiltonian.
    Show(MetricArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MetricSource {
    /// Built-in metric: ts2, darmois, cmetric, kerr_extreme, flat_cyl.
    #[arg(long)]
    metric: Option<String>,
    /// Metric description file.
    #[arg(long)]
    metric_file: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    #[command(flatten)]
    source: MetricSource,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    TwoParity,
    StaticSplit,
    SingleBranch,
}

#[derive(Clone, Copy, ValueEnum)]
enum PhiArg {
    Even,
    Any,
}

impl From<PhiArg> for PhiParity {
    fn from(p: PhiArg) -> Self {
        match p {
            PhiArg::Even => PhiParity::Even,
            PhiArg::Any => PhiParity::Any,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: MetricSource,
    /// Valence (momentum degree) of the integrals.
    #[arg(long)]
    valence: u32,
    /// Branch selection; static metrics default to the static split.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// (p_x, p_y) parity of the single branch.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=1))]
    parity: Option<u32>,
    /// p_phi parity of the single branch.
    #[arg(long, value_enum, default_value = "any")]
    phi_parity: PhiArg,
    /// Evaluation point `r1,r2` with exact rationals such as `1/2,2`.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Prolongation order (default: the valence).
    #[arg(long)]
    prolong: Option<u32>,
    /// Seed for the random primes and the second evaluation point.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the modular path and eliminate over the rationals.
    #[arg(long)]
    exact: bool,
    /// Do not zero gauge columns against the trivial integrals.
    #[arg(long)]
    no_gauge: bool,
    /// Only evaluate at the given point, without the random cross-check.
    #[arg(long)]
    single_point: bool,
    /// Number of random primes for the modular path.
    #[arg(long, default_value_t = 3)]
    primes: usize,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the eliminated integer matrix in triplet format.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct CountsArgs {
    #[arg(long)]
    valence: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=1))]
    parity: u32,
    #[arg(long)]
    prolong: u32,
    /// `even` counts the p_phi-even branch by enumeration.
    #[arg(long, value_enum, default_value = "any")]
    phi_parity: PhiArg,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        let code = match e {
            MetricError::Inadmissible { .. } => EXIT_POINT,
            _ => EXIT_METRIC,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match &e {
            AnalysisError::Metric(MetricError::Inadmissible { .. }) => EXIT_POINT,
            AnalysisError::Metric(_) => EXIT_METRIC,
            AnalysisError::Point { .. } | AnalysisError::NoRandomPoint => EXIT_POINT,
            AnalysisError::Branch { .. } => EXIT_USAGE,
            AnalysisError::Consistency(_) => EXIT_INTERNAL,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_INTERNAL, msg: format!("{}: {e}", path.display()) }
}

fn load_metric(src: &MetricSource) -> Result<MetricSpec, Failure> {
    match (&src.metric, &src.metric_file) {
        (Some(name), _) => builtin(name).map_err(|e| match e {
            MetricError::UnknownMetric(_) => {
                Failure { code: EXIT_METRIC, msg: format!("{e} (known: {})", BUILTIN_NAMES.join(", ")) }
            }
            e => e.into(),
        }),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure { code: EXIT_METRIC, msg: format!("{}: {e}", path.display()) })?;
            parse_metric_file(&text).map_err(|e| Failure { code: EXIT_METRIC, msg: format!("{}: {e}", path.display()) })
        }
        (None, None) => Err(Failure::usage("one of --metric or --metric-file is required")),
    }
}

fn parse_point(s: &str) -> Result<(Rat, Rat), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [a, b] => match (parse_rat(a), parse_rat(b)) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Failure::usage(format!("--point: cannot read '{s}' as two rationals"))),
        },
        _ => Err(Failure::usage(format!("--point: expected 'r1,r2', got '{s}'"))),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<u8, Failure> {
    let g = load_metric(&a.source)?;
    let mode = match a.mode {
        None if a.parity.is_some() => Mode::SingleBranch,
        None => default_mode(&g),
        Some(ModeArg::TwoParity) => Mode::TwoParity,
        Some(ModeArg::StaticSplit) => Mode::StaticSplit,
        Some(ModeArg::SingleBranch) => Mode::SingleBranch,
    };
    let single = match (mode, a.parity) {
        (Mode::SingleBranch, Some(e)) => Some(BranchSpec::new(a.valence, e, a.phi_parity.into())),
        (Mode::SingleBranch, None) => return Err(Failure::usage("single-branch mode needs --parity")),
        _ => None,
    };
    if let Some(m) = a.prolong {
        if m < a.valence {
            return Err(Failure::usage("--prolong must be at least the valence"));
        }
    }
    let point = match &a.point {
        Some(s) => parse_point(s)?,
        None => g
            .suggested_points
            .first()
            .cloned()
            .ok_or_else(|| Failure::usage("the metric has no suggested point; pass --point"))?,
    };
    let opts = AnalysisOptions {
        prolong: a.prolong,
        gauge: !a.no_gauge,
        exact: a.exact,
        seed: a.seed,
        primes: a.primes.max(1),
        second_point: !a.single_point,
        timings: a.timings,
    };
    let branches = plan(mode, a.valence, single);
    let report = run_analysis(&g, a.valence, mode, &branches, &point, &opts)?;

    if let Some(path) = &a.dump_matrix {
        for b in &branches {
            let target = if branches.len() == 1 { path.clone() } else { path.with_extension(b.label().replace(' ', "_")) };
            let m = eliminated_matrix(&g, b, &point, a.prolong.unwrap_or(b.d), opts.gauge)?;
            let f = fs::File::create(&target).map_err(|e| io_failure(&target, e))?;
            m.write_triplets(BufWriter::new(f)).map_err(|e| io_failure(&target, e))?;
        }
    }

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.report {
        Some(path) => {
            fs::write(path, json + "\n").map_err(|e| io_failure(path, e))?;
            for e in &report.branches {
                let r = &e.result;
                println!(
                    "{} x{}: {}x{} rank {} nullity {} bound {} extra {}",
                    r.label,
                    e.multiplicity,
                    r.counts.rows_after_elim,
                    r.counts.cols_after_elim,
                    r.rank.rank,
                    r.nullity,
                    r.upper_bound,
                    r.extra_dim
                );
            }
            println!(
                "total bound {} (trivial {}), verdict {}",
                report.total_upper_bound,
                report.trivials_expected,
                serde_json::to_string(&report.verdict).unwrap()
            );
        }
        None => println!("{json}"),
    }
    if report.non_generic_point_suspected {
        log::warn!("nullities differ between evaluation points: non-generic point suspected");
        return Ok(EXIT_NON_GENERIC);
    }
    debug_assert!(report.verdict != Verdict::Inconclusive);
    Ok(0)
}

fn counts(a: &CountsArgs) -> Result<u8, Failure> {
    let (m, n) = match a.phi_parity {
        PhiArg::Any => (meqns(a.valence, a.parity, a.prolong).to_string(), nvars(a.valence, a.parity, a.prolong).to_string()),
        PhiArg::Even => {
            let (m, n) = branch_counts(&BranchSpec::new(a.valence, a.parity, PhiParity::Even), a.prolong);
            (m.to_string(), n.to_string())
        }
    };
    println!("{m}/{n}");
    println!("trivial integrals of valence {}: {}", a.valence, trivials_count(a.valence, 4));
    Ok(0)
}

fn show(a: &MetricArgs) -> Result<u8, Failure> {
    let g = load_metric(&a.source)?;
    print!("{}", g.to_metric_file());
    let h = g.hamiltonian()?;
    println!("# H = {}", h.display_with(g.coord_names()));
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Analyze(a) => analyze(a),
        Cmd::Counts(a) => counts(a),
        Cmd::Show(a) => show(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
