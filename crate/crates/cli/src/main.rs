use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use expressivity::circuit::ParametricCircuit;
use expressivity::dea::{self, DeaMode, DeaReport};
use expressivity::geometry::RankGate;
use expressivity::io::{fmt12, write_atomic};
use expressivity::mmec::{self, CompileMode, MmecSpec, PhaseMode};
use expressivity::pipeline::{
    self, AlphaConfig, AlphaReport, ConvergenceReport, CostFilter, EmbeddingChoice, InterferenceRow, MethodChoice,
    SCHEMA_VERSION,
};
use expressivity::volume::{self, Gauge, Quadrature};
use expressivity::Error;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "expressivity",
    version,
    about = "Expressivity analysis of parametric quantum circuits"
)]
struct Cli {
    /// Directory for report files.
    #[arg(long, global = true, env = "EXPRESSIVITY_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed used wherever a command needs one and none is given inline.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// More diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Redundant-parameter scan at one probe point.
    AnalyzeDea(DeaArgs),
    /// Build a minimal maximally expressive circuit.
    BuildMmec(MmecArgs),
    /// Covering-radius estimate with the rank gate.
    EstimateAlpha(AlphaArgs),
    /// Covering radius over a list of sample counts, with a power-law fit.
    Convergence(ConvergenceArgs),
    /// Image volume by quadrature and the implied lower bound on alpha.
    Volume(VolumeArgs),
    /// Volume bound against Voronoi alpha for the spiral circuits.
    SpiralDemo(SpiralArgs),
    /// Convergence of alpha for the full Bloch-sphere circuit.
    BlochDemo(BlochArgs),
    /// Sample bank for initializing a variational solver.
    ExportInitGuesses(GuessArgs),
}

#[derive(Args, Debug, Serialize)]
struct DeaArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// A file of angles, or `random:SEED`.
    #[arg(long, default_value = "random")]
    theta: String,
    /// Independence tolerance on the smallest singular value.
    #[arg(long)]
    tol: Option<f64>,
    /// `exact` or `shots:S:SEED`.
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PhaseArg {
    Free,
    Global,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CompileArg {
    Native,
    Cnot,
}

#[derive(Args, Debug, Serialize)]
struct MmecArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, value_enum, default_value_t = PhaseArg::Global)]
    phase: PhaseArg,
    #[arg(long, value_enum, default_value_t = CompileArg::Native)]
    compile: CompileArg,
    /// Circuit file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EmbeddingArg {
    Bloch,
    Real,
    Auto,
}

impl From<EmbeddingArg> for EmbeddingChoice {
    fn from(e: EmbeddingArg) -> Self {
        match e {
            EmbeddingArg::Bloch => EmbeddingChoice::Bloch,
            EmbeddingArg::Real => EmbeddingChoice::Real,
            EmbeddingArg::Auto => EmbeddingChoice::Auto,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct AlphaOpts {
    #[arg(long, value_enum, default_value_t = EmbeddingArg::Auto)]
    embedding: EmbeddingArg,
    /// `voronoi` or `mc:NTEST`.
    #[arg(long, default_value = "voronoi")]
    method: String,
    /// Gram–Schmidt tolerance on the squared residual.
    #[arg(long, default_value_t = expressivity::geometry::DEFAULT_GS_TOL)]
    gs_tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct AlphaArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    #[command(flatten)]
    opts: AlphaOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ConvergenceArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Comma-separated sample counts.
    #[arg(long)]
    n_list: String,
    #[command(flatten)]
    opts: AlphaOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GaugeArg {
    Bloch,
    Hilbert,
}

#[derive(Args, Debug, Serialize)]
struct VolumeArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// `trap:K` or `qmc:N[:SEED]`; picked from the slot count when absent.
    #[arg(long)]
    quad: Option<String>,
    #[arg(long, value_enum, default_value_t = GaugeArg::Hilbert)]
    gauge: GaugeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SpiralArgs {
    #[arg(long, default_value = "1,2,4,8")]
    n_list: String,
    #[arg(long, default_value_t = 1 << 15)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BlochArgs {
    /// Comma-separated sample counts; 2^6..2^13 when absent.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GuessArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    #[command(flatten)]
    opts: AlphaOpts,
    /// Diagonal of the cost observable in the computational basis, comma-separated.
    #[arg(long, requires = "cost_band")]
    cost_diagonal: Option<String>,
    /// Keep guesses whose cost is within this band of the minimum.
    #[arg(long, requires = "cost_diagonal")]
    cost_band: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Input(msg.into()))
}

fn load_circuit(path: &Path) -> CliResult<ParametricCircuit> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read circuit file {}: {e}", path.display())))?;
    Ok(ParametricCircuit::from_json(&text)?)
}

fn parse_f64_list(text: &str) -> CliResult<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| CliError::Input(format!("bad number list: {e}")));
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad number {s:?}")))
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    let out = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| CliError::Input(format!("bad {what} {s:?}"))))
        .collect::<CliResult<Vec<T>>>()?;
    if out.is_empty() {
        return input(format!("empty {what} list"));
    }
    Ok(out)
}

fn parse_u64(s: &str, what: &str) -> CliResult<u64> {
    s.parse().map_err(|_| CliError::Input(format!("bad {what} {s:?}")))
}

fn parse_mode(s: &str) -> CliResult<DeaMode> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["exact"] => Ok(DeaMode::Exact),
        ["shots", shots, seed] => Ok(DeaMode::Shots {
            shots: parse_u64(shots, "shot count")?,
            seed: parse_u64(seed, "seed")?,
        }),
        _ => input(format!("mode must be exact or shots:S:SEED, got {s:?}")),
    }
}

fn parse_method(s: &str) -> CliResult<MethodChoice> {
    match s.split_once(':') {
        None if s == "voronoi" => Ok(MethodChoice::Voronoi {
            fallback_tests: 100_000,
        }),
        Some(("mc", n)) => Ok(MethodChoice::MonteCarlo {
            test_points: parse_u64(n, "test point count")? as usize,
        }),
        _ => input(format!("method must be voronoi or mc:NTEST, got {s:?}")),
    }
}

fn parse_quad(s: &str, default_seed: u64) -> CliResult<Quadrature> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["trap", k] => Ok(Quadrature::TensorTrapezoid {
            points_per_dim: parse_u64(k, "point count")? as usize,
        }),
        ["qmc", n] => Ok(Quadrature::Qmc {
            n: parse_u64(n, "point count")? as usize,
            seed: default_seed,
        }),
        ["qmc", n, seed] => Ok(Quadrature::Qmc {
            n: parse_u64(n, "point count")? as usize,
            seed: parse_u64(seed, "seed")?,
        }),
        _ => input(format!("quadrature must be trap:K or qmc:N[:SEED], got {s:?}")),
    }
}

fn parse_theta(spec: &str, circuit: &ParametricCircuit, default_seed: u64) -> CliResult<Vec<f64>> {
    if spec == "random" {
        return Ok(dea::random_probe(circuit, default_seed));
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        return Ok(dea::random_probe(circuit, parse_u64(seed, "seed")?));
    }
    let text =
        std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("cannot read theta file {spec}: {e}")))?;
    parse_f64_list(&text)
}

fn alpha_config(samples: usize, seed: u64, opts: &AlphaOpts) -> CliResult<AlphaConfig> {
    Ok(AlphaConfig {
        embedding: opts.embedding.into(),
        method: parse_method(&opts.method)?,
        gs_tolerance: opts.gs_tol,
        ..AlphaConfig::new(samples, seed)
    })
}

/// Self-describing report: the run configuration echoed next to the result.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'static str,
    run_config: &'a Cli,
    report: &'a T,
}

struct Output {
    name: String,
    json: serde_json::Value,
    csv: String,
    summary: String,
}

fn output<T: Serialize>(name: impl Into<String>, report: &T, csv: String, summary: String) -> CliResult<Output> {
    Ok(Output {
        name: name.into(),
        json: serde_json::to_value(report).map_err(Error::from)?,
        csv,
        summary,
    })
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn opt12(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

fn gate_name(g: &RankGate) -> &'static str {
    if g.passed() {
        "pass"
    } else {
        "fail"
    }
}

fn fit_line(r: &ConvergenceReport) -> String {
    match r.fit {
        Some(f) => format!("# fit: alpha ~ {} * N^{}\n", fmt12(f.prefactor), fmt12(f.exponent)),
        None => "# fit: unavailable\n".into(),
    }
}

fn convergence_summary(r: &ConvergenceReport) -> String {
    let mut s = String::from("       N        alpha    alpha_opt\n");
    for row in &r.rows {
        let _ = writeln!(s, "{:>8} {:>12.6} {:>12.6}", row.n, row.alpha, row.alpha_opt);
    }
    if let Some(f) = r.fit {
        let _ = writeln!(s, "fit: alpha ~ {:.4} * N^{:.4}", f.prefactor, f.exponent);
    }
    s
}

#[derive(Serialize)]
struct DeaOutput {
    dea: DeaReport,
    /// Shot-estimated derivative inner products, shot mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    interference: Option<Vec<InterferenceRow>>,
}

fn analyze_dea(cli: &Cli, a: &DeaArgs) -> CliResult<Output> {
    let circuit = load_circuit(&a.circuit)?;
    let theta = parse_theta(&a.theta, &circuit, cli.seed)?;
    let mode = parse_mode(&a.mode)?;
    let report = dea::scan(&circuit, &theta, a.tol, mode)?;
    let interference = match mode {
        DeaMode::Shots { shots, seed } => Some(pipeline::interference_table(&circuit, &theta, shots, seed)?),
        DeaMode::Exact => None,
    };
    let redundant: Vec<usize> = report.redundant_slots.iter().map(|r| r.slot).collect();
    let mut csv = String::from("slot,status,smallest_singular_value,theta\n");
    let mut summary = String::from("slot  status       sigma_min        theta\n");
    for (slot, sigma) in report.smallest_singular_values.iter().enumerate() {
        let status = if redundant.contains(&slot) {
            "redundant"
        } else {
            "independent"
        };
        csv.push_str(&csv_line(&[
            slot.to_string(),
            status.into(),
            fmt12(*sigma),
            fmt12(theta[slot]),
        ]));
        let _ = writeln!(summary, "{slot:>4}  {status:<11} {sigma:>10.3e} {:>12.6}", theta[slot]);
    }
    let _ = writeln!(
        summary,
        "{} independent, {} redundant (tolerance {:.3e})",
        report.independent_slots.len(),
        redundant.len(),
        report.tolerance
    );
    output(
        "dea",
        &DeaOutput {
            dea: report,
            interference,
        },
        csv,
        summary,
    )
}

fn build_mmec(cli: &Cli, a: &MmecArgs) -> CliResult<Output> {
    let spec = MmecSpec {
        num_qubits: a.qubits,
        phase_mode: match a.phase {
            PhaseArg::Free => PhaseMode::PhaseFree,
            PhaseArg::Global => PhaseMode::WithGlobalPhase,
        },
        compile_mode: match a.compile {
            CompileArg::Native => CompileMode::NativeControls,
            CompileArg::Cnot => CompileMode::CnotBasis,
        },
    };
    let circuit = mmec::build(spec)?;
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| cli.output_dir.join(format!("mmec_q{}.json", a.qubits)));
    write_atomic(&path, circuit.to_json().as_bytes())?;
    let summary = format!(
        "{} qubits, {} parameters, {} gates -> {}\n",
        circuit.num_qubits(),
        circuit.num_params(),
        circuit.gates().len(),
        path.display()
    );
    let report = serde_json::json!({
        "spec": spec,
        "num_params": circuit.num_params(),
        "num_gates": circuit.gates().len(),
        "circuit_file": path,
    });
    let csv = format!(
        "qubits,num_params,num_gates\n{},{},{}\n",
        circuit.num_qubits(),
        circuit.num_params(),
        circuit.gates().len()
    );
    output("mmec_summary", &report, csv, summary)
}

fn alpha_csv(r: &AlphaReport) -> String {
    let mut out = String::from(
        "N,n_distinct,basis_rank,required_dim,rank_gate,alpha,alpha_lower_bound,method,embedding,degenerate\n",
    );
    let method = r
        .method
        .as_ref()
        .and_then(|m| serde_json::to_value(m).ok())
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(String::from))
        .unwrap_or_default();
    out.push_str(&csv_line(&[
        r.n_samples.to_string(),
        r.n_distinct.to_string(),
        r.basis_rank.to_string(),
        r.required_dim.to_string(),
        gate_name(&r.rank_gate).into(),
        opt12(r.alpha),
        opt12(r.alpha_lower_bound),
        method,
        r.embedding.clone(),
        r.degenerate.to_string(),
    ]));
    out
}

fn alpha_summary(r: &AlphaReport) -> String {
    let mut s = format!(
        "N={} distinct={} embedding={} rank {}/{} gate={}\n",
        r.n_samples,
        r.n_distinct,
        r.embedding,
        r.basis_rank,
        r.required_dim,
        gate_name(&r.rank_gate)
    );
    match (r.alpha, r.alpha_lower_bound) {
        (Some(a), _) => {
            let _ = writeln!(
                s,
                "alpha = {a:.6}{}",
                if r.degenerate { " (degenerate sample set)" } else { "" }
            );
        }
        (None, Some(b)) => {
            let _ = writeln!(s, "alpha >= {b:.6}");
        }
        (None, None) => {}
    }
    s
}

fn estimate_alpha(cli: &Cli, a: &AlphaArgs) -> CliResult<Output> {
    let circuit = load_circuit(&a.circuit)?;
    let report = pipeline::estimate_alpha(&circuit, alpha_config(a.samples, cli.seed, &a.opts)?)?;
    output("alpha", &report, alpha_csv(&report), alpha_summary(&report))
}

fn convergence(cli: &Cli, a: &ConvergenceArgs) -> CliResult<Output> {
    let circuit = load_circuit(&a.circuit)?;
    let n_list = parse_list::<usize>(&a.n_list, "sample count")?;
    let report = pipeline::convergence(&circuit, &n_list, alpha_config(0, cli.seed, &a.opts)?)?;
    let csv = fit_line(&report) + &report.to_csv();
    let summary = convergence_summary(&report);
    output("convergence", &report, csv, summary)
}

fn volume_cmd(cli: &Cli, a: &VolumeArgs) -> CliResult<Output> {
    let circuit = load_circuit(&a.circuit)?;
    let quad = match &a.quad {
        Some(q) => parse_quad(q, cli.seed)?,
        None => volume::default_quadrature(circuit.num_params()),
    };
    let gauge = match a.gauge {
        GaugeArg::Bloch => Gauge::Bloch,
        GaugeArg::Hilbert => Gauge::Hilbert,
    };
    let report = volume::volume(&circuit, quad, gauge)?;
    let gauge_name = match gauge {
        Gauge::Bloch => "bloch",
        Gauge::Hilbert => "hilbert",
    };
    let csv = format!(
        "volume,dim_m,gauge,alpha_lower_bound\n{},{},{},{}\n",
        fmt12(report.volume),
        report.dim_m,
        gauge_name,
        opt12(report.alpha_lower_bound)
    );
    let summary = format!(
        "volume = {:.10} (m = {}, {} gauge), alpha >~ {}\n",
        report.volume,
        report.dim_m,
        gauge_name,
        report.alpha_lower_bound.map_or("n/a".into(), |b| format!("{b:.6}"))
    );
    output("volume", &report, csv, summary)
}

fn spiral_demo(cli: &Cli, a: &SpiralArgs) -> CliResult<Output> {
    let n_list = parse_list::<u32>(&a.n_list, "winding number")?;
    let report = pipeline::spiral_demo(&n_list, a.samples, cli.seed)?;
    let mut summary = String::from("   n       volume   pi/E(-4n^2)  alpha_voronoi\n");
    for r in &report.rows {
        let _ = writeln!(
            summary,
            "{:>4} {:>12.6} {:>13.6} {:>14.6}",
            r.n, r.volume, r.bound, r.alpha_voronoi
        );
    }
    output("spiral_demo", &report, report.to_csv(), summary)
}

fn bloch_demo(cli: &Cli, a: &BlochArgs) -> CliResult<Output> {
    let n_list = match &a.n_list {
        Some(s) => parse_list::<usize>(s, "sample count")?,
        None => pipeline::bloch_demo_n_list(),
    };
    let report = pipeline::bloch_demo(&n_list, cli.seed)?;
    let csv = fit_line(&report) + &report.to_csv();
    let summary = convergence_summary(&report);
    output("bloch_demo", &report, csv, summary)
}

fn export_init_guesses(cli: &Cli, a: &GuessArgs) -> CliResult<Output> {
    let circuit = load_circuit(&a.circuit)?;
    let filter = match (&a.cost_diagonal, a.cost_band) {
        (Some(d), Some(band)) => Some(CostFilter {
            diagonal: parse_f64_list(d)?,
            band,
        }),
        _ => None,
    };
    let bank = pipeline::export_init_guesses(&circuit, alpha_config(a.samples, cli.seed, &a.opts)?, filter)?;
    let summary = format!("{} guesses; {}\n", bank.guesses.len(), bank.guarantee);
    output("init_guesses", &bank, bank.to_csv(), summary)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::AnalyzeDea(_) => "analyze-dea",
            Command::BuildMmec(_) => "build-mmec",
            Command::EstimateAlpha(_) => "estimate-alpha",
            Command::Convergence(_) => "convergence",
            Command::Volume(_) => "volume",
            Command::SpiralDemo(_) => "spiral-demo",
            Command::BlochDemo(_) => "bloch-demo",
            Command::ExportInitGuesses(_) => "export-init-guesses",
        }
    }

    fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::AnalyzeDea(a) => a.out.as_ref(),
            Command::BuildMmec(_) => None,
            Command::EstimateAlpha(a) => a.out.as_ref(),
            Command::Convergence(a) => a.out.as_ref(),
            Command::Volume(a) => a.out.as_ref(),
            Command::SpiralDemo(a) => a.out.as_ref(),
            Command::BlochDemo(a) => a.out.as_ref(),
            Command::ExportInitGuesses(a) => a.out.as_ref(),
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = match &cli.command {
        Command::AnalyzeDea(a) => analyze_dea(cli, a)?,
        Command::BuildMmec(a) => build_mmec(cli, a)?,
        Command::EstimateAlpha(a) => estimate_alpha(cli, a)?,
        Command::Convergence(a) => convergence(cli, a)?,
        Command::Volume(a) => volume_cmd(cli, a)?,
        Command::SpiralDemo(a) => spiral_demo(cli, a)?,
        Command::BlochDemo(a) => bloch_demo(cli, a)?,
        Command::ExportInitGuesses(a) => export_init_guesses(cli, a)?,
    };
    let body = match cli.format {
        Format::Json => {
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command: cli.command.name(),
                run_config: cli,
                report: &out.json,
            };
            let mut s = serde_json::to_string_pretty(&env).map_err(Error::from)?;
            s.push('\n');
            s
        }
        Format::Csv => out.csv,
    };
    let path = match cli.command.out() {
        Some(p) => p.clone(),
        None => {
            if !cli.output_dir.is_dir() {
                return input(format!("output directory {} does not exist", cli.output_dir.display()));
            }
            cli.output_dir.join(format!("{}.{}", out.name, cli.format.ext()))
        }
    };
    write_atomic(&path, body.as_bytes())?;
    print!("{}", out.summary);
    if cli.verbose > 0 {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
