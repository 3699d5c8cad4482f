//! `migimpact`: command-line front end for the migration impact toolkit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use migration_impact::aggregation::{DEFAULT_MIN_UNITS, DEFAULT_SAMPLES_PER_SCALE};
use migration_impact::data::{CsvInput, MARGINALS_HEADER};
use migration_impact::impact::LabeledPoint;
use migration_impact::regression::DEFAULT_ALPHA;
use migration_impact::report::{self, IndicesReport, InmiReport, ProfileSummary, RegressionReport};
use migration_impact::rng::DEFAULT_SEED;
use migration_impact::{
    classify_redistribution, compute_inmi, default_ladder, density_regression, evaluate_k,
    fit_cmi_slope, kmeans_cluster, load_adjacency, load_system, mean_mei, net_migration_rates,
    scale_ladder, scale_profile, system_indices, time_series_slopes, zscore_table, AdjacencyGraph,
    Benchmark, CountrySummary, Error, FlowSource, InmiResult, LoadedSystem, RegressionVariant,
    ScaleProfile, SystemMeta,
};

#[derive(Parser)]
#[command(
    name = "migimpact",
    version,
    about = "Redistributive impact of internal migration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate inputs, then report what was read.
    Validate(ValidateArgs),
    /// CMI, MEI, ANMR and per-zone net migration rates.
    Indices(SystemArgs),
    /// Density regression, redistribution regime and z-score table.
    Regress(RegressArgs),
    /// Monte Carlo scale profile over random contiguous aggregations.
    Profile(ProfileArgs),
    /// Scale profile plus INMI against a benchmark.
    Inmi(InmiArgs),
    /// k-means clustering of countries in the (C, R) plane.
    Cluster(ClusterArgs),
    /// Density-regression slopes for several years of one geography.
    Timeseries(TimeseriesArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Directory for output files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, value_name = "PATH")]
    zones: PathBuf,
    /// Origin-destination flows (`origin,destination,count`).
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "marginals",
        required_unless_present = "marginals"
    )]
    flows: Option<PathBuf>,
    /// Per-zone inflows and outflows (`zone_id,inflow,outflow`).
    #[arg(long, value_name = "PATH")]
    marginals: Option<PathBuf>,
    #[arg(long, default_value = "XX")]
    label: String,
    #[arg(long, default_value_t = 0)]
    year: i32,
    /// Measurement interval in years (1 or 5).
    #[arg(long, default_value_t = 1)]
    interval: u8,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_name = "PATH")]
    adjacency: Option<PathBuf>,
}

#[derive(Args)]
struct RegressArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_parser = parse_variant, default_value = "zscore")]
    variant: RegressionVariant,
}

#[derive(Args)]
struct LadderArgs {
    #[arg(long, value_name = "PATH")]
    adjacency: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Smallest unit count on the ladder (default max(20, n/20)).
    #[arg(long)]
    min_n: Option<usize>,
    /// Number of geometric ladder steps.
    #[arg(long, default_value_t = 8)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_SCALE)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_UNITS)]
    min_units: usize,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    ladder: LadderArgs,
}

#[derive(Args)]
struct InmiArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    ladder: LadderArgs,
    #[arg(long, value_name = "PATH")]
    benchmark: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// CSV with header `label,cmi_slope,mean_mei`.
    #[arg(long, value_name = "PATH")]
    summaries: PathBuf,
    #[arg(long, value_name = "PATH")]
    benchmark: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Cluster counts to report diagnostics for.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    candidates: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TimeseriesArgs {
    #[arg(long, value_name = "PATH")]
    zones: PathBuf,
    /// `YEAR=PATH`, repeatable.
    #[arg(long, value_name = "YEAR=PATH", value_parser = parse_year_path)]
    flows: Vec<(i32, PathBuf)>,
    /// `YEAR=PATH`, repeatable.
    #[arg(long, value_name = "YEAR=PATH", value_parser = parse_year_path)]
    marginals: Vec<(i32, PathBuf)>,
    #[arg(long, default_value = "XX")]
    label: String,
    #[arg(long, default_value_t = 1)]
    interval: u8,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, value_parser = parse_variant, default_value = "zscore")]
    variant: RegressionVariant,
    #[command(flatten)]
    out: OutArgs,
}

fn parse_variant(s: &str) -> Result<RegressionVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_year_path(s: &str) -> Result<(i32, PathBuf), String> {
    let (year, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected YEAR=PATH, got `{s}`"))?;
    let year = year
        .trim()
        .parse()
        .map_err(|_| format!("`{year}` is not a year"))?;
    Ok((year, PathBuf::from(path)))
}

enum Failure {
    Usage(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Files to write plus the text echoed on stdout.
struct Outputs {
    stdout: String,
    files: Vec<(&'static str, String)>,
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: cannot read: {e}", path.display())))
}

fn load(args: &SystemArgs) -> CliResult<LoadedSystem> {
    let meta = SystemMeta {
        label: args.label.clone(),
        year: args.year,
        interval: args.interval,
    };
    load_with(
        &args.zones,
        args.flows.as_deref(),
        args.marginals.as_deref(),
        meta,
    )
}

fn load_with(
    zones: &Path,
    flows: Option<&Path>,
    marginals: Option<&Path>,
    meta: SystemMeta,
) -> CliResult<LoadedSystem> {
    let zone_text = read_file(zones)?;
    let zone_input = CsvInput::new(zones.display().to_string(), zone_text.as_bytes());
    let (path, as_marginals) = match (flows, marginals) {
        (Some(p), None) => (p, false),
        (None, Some(p)) => (p, true),
        _ => {
            return Err(Failure::Usage(
                "exactly one of --flows or --marginals is required".into(),
            ))
        }
    };
    let text = read_file(path)?;
    // A marginals file passed via --flows is recognised by its header.
    let first = text
        .lines()
        .next()
        .unwrap_or("")
        .trim_start_matches('\u{feff}');
    let is_marginal_file = first
        .split(',')
        .map(str::trim)
        .eq(MARGINALS_HEADER.iter().copied());
    let input = CsvInput::new(path.display().to_string(), text.as_bytes());
    let source = if as_marginals || is_marginal_file {
        FlowSource::Marginals(input)
    } else {
        FlowSource::Matrix(input)
    };
    Ok(load_system(zone_input, source, meta)?)
}

fn load_graph(path: Option<&Path>, loaded: &LoadedSystem) -> CliResult<AdjacencyGraph> {
    let path = path.ok_or_else(|| Failure::Usage("--adjacency is required".into()))?;
    let text = read_file(path)?;
    Ok(load_adjacency(
        CsvInput::new(path.display().to_string(), text.as_bytes()),
        &loaded.system.zones,
    )?)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ValidationReport {
    label: String,
    year: i32,
    interval: u8,
    zones: usize,
    flow_variant: &'static str,
    m: u64,
    p: f64,
    diagonal_dropped: usize,
    adjacency_edges: Option<usize>,
    warnings: Vec<String>,
}

fn cmd_validate(args: &ValidateArgs) -> CliResult<Outputs> {
    let loaded = load(&args.system)?;
    let graph = match &args.adjacency {
        Some(p) => Some(load_graph(Some(p), &loaded)?),
        None => None,
    };
    let s = &loaded.system;
    let mut warnings = Vec::new();
    if loaded.diagonal_dropped > 0 {
        warnings.push(format!(
            "{} within-zone flow record(s) dropped",
            loaded.diagonal_dropped
        ));
    }
    if let Some(z) = s.zones.zones().iter().find(|z| z.population == 0.0) {
        warnings.push(format!(
            "zone `{}` has zero population; rates are undefined",
            z.id
        ));
    }
    let rep = ValidationReport {
        label: s.label.clone(),
        year: s.year,
        interval: s.interval,
        zones: s.len(),
        flow_variant: s.flows.variant_name(),
        m: s.migrants(),
        p: s.population(),
        diagonal_dropped: loaded.diagonal_dropped,
        adjacency_edges: graph.map(|g| g.edge_count()),
        warnings,
    };
    let text = json(&rep);
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![("validation.json", text)],
    })
}

fn cmd_indices(args: &SystemArgs) -> CliResult<Outputs> {
    let loaded = load(args)?;
    let idx = system_indices::<f64>(&loaded.system)?;
    let rates = net_migration_rates::<f64>(&loaded.system)?;
    let text = json(&IndicesReport::new(&idx, &rates));
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![("indices.json", text)],
    })
}

fn cmd_regress(args: &RegressArgs) -> CliResult<Outputs> {
    let loaded = load(&args.system)?;
    let result = density_regression::<f64>(&loaded.system, args.variant)?;
    let regime = classify_redistribution(&result.fit, args.alpha);
    let text = json(&RegressionReport::new(&result, &regime));
    let rates = net_migration_rates::<f64>(&loaded.system)?;
    let mut files = vec![("regression.json", text.clone())];
    // Balanced systems have no spread to standardise; the table is omitted.
    match zscore_table(&rates) {
        Ok(table) => files.push(("zscores.csv", report::zscore_csv(&table))),
        Err(Error::Degenerate(_)) => {}
        Err(e) => return Err(e.into()),
    }
    files.push((
        "regression_points.csv",
        report::regression_points_csv(&result),
    ));
    Ok(Outputs {
        stdout: text,
        files,
    })
}

fn run_profile(
    loaded: &LoadedSystem,
    args: &LadderArgs,
) -> CliResult<(ScaleProfile<f64>, ProfileSummary)> {
    let s = &loaded.system;
    if !s.is_full_matrix() {
        return Err(Error::MatrixRequired {
            operation: "scale profiling and the INMI",
        }
        .into());
    }
    let graph = load_graph(args.adjacency.as_deref(), loaded)?;
    let ladder = match args.min_n {
        Some(min_n) => scale_ladder(s.len(), min_n, args.steps)?,
        None => default_ladder(s.len())?,
    };
    let profile = scale_profile::<f64>(s, &graph, &ladder, args.samples, args.seed)?;
    let fit = fit_cmi_slope(&profile)?;
    let mei = mean_mei(&profile, args.min_units)?;
    let summary = ProfileSummary::new(&s.label, &profile, &fit, args.min_units, mei);
    Ok((profile, summary))
}

fn cmd_profile(args: &ProfileArgs) -> CliResult<Outputs> {
    let loaded = load(&args.system)?;
    let (profile, summary) = run_profile(&loaded, &args.ladder)?;
    let text = json(&summary);
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![
            ("profile.csv", report::profile_csv(&profile)),
            ("profile_summary.json", text),
        ],
    })
}

fn read_benchmark(path: &Path) -> CliResult<Benchmark> {
    let text = read_file(path)?;
    Benchmark::from_json(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn cmd_inmi(args: &InmiArgs) -> CliResult<Outputs> {
    let loaded = load(&args.system)?;
    let benchmark = read_benchmark(&args.benchmark)?;
    let (profile, summary) = run_profile(&loaded, &args.ladder)?;
    let country = CountrySummary::new(&summary.label, summary.cmi_slope, summary.mean_mei)?;
    let inmi = compute_inmi(&country, &benchmark)?;
    let text = json(&InmiReport::new(
        &summary.label,
        summary.cmi_slope,
        summary.mean_mei,
        &inmi,
        &benchmark,
    ));
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![
            ("profile.csv", report::profile_csv(&profile)),
            ("profile_summary.json", json(&summary)),
            ("inmi.json", text),
        ],
    })
}

fn read_summaries(path: &Path) -> CliResult<Vec<CountrySummary<f64>>> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != "label,cmi_slope,mean_mei" {
        return Err(Failure::Validation(format!(
            "{name}:1: expected header `label,cmi_slope,mean_mei`, found `{header}`"
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| Failure::Validation(format!("{name}:{line_no}: {what}"));
        if fields.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        let slope: f64 = fields[1]
            .parse()
            .map_err(|_| bad("cmi_slope is not a number"))?;
        let mei: f64 = fields[2]
            .parse()
            .map_err(|_| bad("mean_mei is not a number"))?;
        out.push(CountrySummary::new(fields[0], slope, mei).map_err(|e| bad(&e.to_string()))?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct ClusterReport {
    k: usize,
    seed: u64,
    restarts: usize,
    inertia: f64,
    centroids: Vec<[f64; 2]>,
    assignments: Vec<(String, usize)>,
}

fn cmd_cluster(args: &ClusterArgs) -> CliResult<Outputs> {
    let benchmark = read_benchmark(&args.benchmark)?;
    let summaries = read_summaries(&args.summaries)?;
    let rows: Vec<(String, InmiResult<f64>)> = summaries
        .iter()
        .map(|s| Ok((s.label.clone(), compute_inmi(s, &benchmark)?)))
        .collect::<Result<_, Error>>()?;
    let points: Vec<LabeledPoint<f64>> = rows
        .iter()
        .map(|(l, r)| LabeledPoint::new(l.clone(), r.c_ratio, r.r_ratio))
        .collect();
    let result = kmeans_cluster(&points, args.k, args.restarts, args.seed)?;
    let candidates: Vec<usize> = args
        .candidates
        .iter()
        .copied()
        .filter(|&k| k >= 1 && k <= points.len())
        .collect();
    let diags = evaluate_k(&points, &candidates, args.restarts, args.seed)?;
    let text = json(&ClusterReport {
        k: result.k,
        seed: result.seed,
        restarts: result.restarts,
        inertia: result.inertia,
        centroids: result.centroids.clone(),
        assignments: result.assignments.clone(),
    });
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![
            ("clusters.csv", report::cluster_csv(&rows, &result)),
            ("cluster_diagnostics.csv", report::k_diagnostics_csv(&diags)),
            ("clusters.json", text),
        ],
    })
}

fn cmd_timeseries(args: &TimeseriesArgs) -> CliResult<Outputs> {
    if args.flows.is_empty() && args.marginals.is_empty() {
        return Err(Failure::Usage(
            "at least one --flows or --marginals YEAR=PATH is required".into(),
        ));
    }
    let mut systems = Vec::new();
    for (year, path, marg) in args
        .flows
        .iter()
        .map(|(y, p)| (*y, p, false))
        .chain(args.marginals.iter().map(|(y, p)| (*y, p, true)))
    {
        let meta = SystemMeta {
            label: args.label.clone(),
            year,
            interval: args.interval,
        };
        let (f, m) = if marg {
            (None, Some(path.as_path()))
        } else {
            (Some(path.as_path()), None)
        };
        systems.push(load_with(&args.zones, f, m, meta)?.system);
    }
    let fits = time_series_slopes::<f64>(&systems, args.variant)?;
    let text = report::timeseries_csv(&fits, args.alpha);
    Ok(Outputs {
        stdout: text.clone(),
        files: vec![("timeseries.csv", text)],
    })
}

fn write_outputs(dir: Option<&Path>, outputs: &Outputs) -> CliResult<()> {
    let Some(dir) = dir else { return Ok(()) };
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Validation(format!("{}: cannot create: {e}", dir.display())))?;
    for (name, content) in &outputs.files {
        let path = dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| Failure::Validation(format!("{}: cannot write: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let (outputs, out_dir) = match &cli.command {
        Command::Validate(a) => (cmd_validate(a)?, a.system.out.out.as_deref()),
        Command::Indices(a) => (cmd_indices(a)?, a.out.out.as_deref()),
        Command::Regress(a) => (cmd_regress(a)?, a.system.out.out.as_deref()),
        Command::Profile(a) => (cmd_profile(a)?, a.system.out.out.as_deref()),
        Command::Inmi(a) => (cmd_inmi(a)?, a.system.out.out.as_deref()),
        Command::Cluster(a) => (cmd_cluster(a)?, a.out.out.as_deref()),
        Command::Timeseries(a) => (cmd_timeseries(a)?, a.out.out.as_deref()),
    };
    write_outputs(out_dir, &outputs)?;
    print!("{}", outputs.stdout);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
