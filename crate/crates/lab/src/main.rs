use std::path::{Path, PathBuf};
use std::process::ExitCode;

use broomlab::error::{LabError, Result};
use broomlab::io::{self, Format};
use broomlab::report::{self, Instance, Report, Timings};
use broomlab::{pipeline, suites, survey};
use broomlab_core::generators::{self, Family, GenSpec};
use broomlab_core::structures::Params;
use broomlab_core::template::AuditReport;
use broomlab_core::{constants, Graph, Limits};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exact experiments on graphs excluding the multibroom T(δ).
#[derive(Parser)]
#[command(name = "broomlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list or DIMACS file.
    Gen(GenArgs),
    /// Report n, m, ω, χ, χ¹, χ², T(δ)-freeness and the best core found.
    Analyze(GraphCommand),
    /// Run extract, clean1, clean2, privatize, clean3, shadowing and the audits.
    Pipeline(GraphCommand),
    /// Run the pipeline and report only the lemma audits.
    Audit(GraphCommand),
    /// Run a named property suite.
    LemmaCheck(LemmaArgs),
    /// Print the constants ledger.
    Constants(ConstantsArgs),
    /// Sweep a JSON manifest into CSV rows.
    Survey(SurveyArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest vertex count handed to an exact solver.
    #[arg(long)]
    solver_limit: Option<usize>,
}

impl Common {
    fn limits(&self) -> Limits {
        self.solver_limit.map_or_else(Limits::default, Limits::with_solver)
    }
}

/// Defaults are the smallest values meeting every stage's side conditions:
/// η = δ and ζ = max(η, α) + δ.
#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 1)]
    delta: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, default_value_t = 1)]
    alpha: usize,
    #[arg(long, default_value_t = 2)]
    beta: usize,
    #[arg(long)]
    zeta: Option<usize>,
    #[arg(long)]
    eta: Option<usize>,
}

impl ParamArgs {
    fn params(&self) -> Params {
        let mut p = Params::minimal(self.delta, self.tau, self.alpha, self.beta);
        p.eta = self.eta.unwrap_or(p.eta);
        p.zeta = self.zeta.unwrap_or(p.eta.max(p.alpha) + p.delta);
        p
    }
}

#[derive(Args)]
struct GraphArgs {
    /// Input graph file.
    #[arg(long, required_unless_present = "fixture")]
    graph: Option<PathBuf>,
    /// Input format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Use a built-in fixture graph instead of a file.
    #[arg(long, conflicts_with = "graph")]
    fixture: Option<String>,
}

impl GraphArgs {
    fn load(&self) -> Result<(String, Graph)> {
        match (&self.graph, &self.fixture) {
            (Some(path), _) => Ok((path.display().to_string(), io::read_graph(path, self.format)?)),
            (None, Some(id)) => Ok((format!("fixture:{id}"), generators::fixture(id)?.graph)),
            (None, None) => Err(LabError::Usage("--graph or --fixture is required".into())),
        }
    }
}

#[derive(Args)]
struct GraphCommand {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    common: Common,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    ErdosRenyi,
    Mycielski,
    Kneser,
    Multipartite,
    Cycle,
    Path,
    PlantedCore,
    Fixture,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Part sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    parts: Vec<usize>,
    /// Mycielskian iterations applied to the cycle of length --n.
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: Format,
    #[command(flatten)]
    common: Common,
}

impl GenArgs {
    fn need<T: Copy>(&self, v: Option<T>, flag: &str) -> Result<T> {
        v.ok_or_else(|| LabError::Usage(format!("--{flag} is required for this family")))
    }

    fn family(&self) -> Result<Family> {
        Ok(match self.family {
            FamilyName::ErdosRenyi => Family::ErdosRenyi {
                n: self.need(self.n, "n")?,
                p: self.need(self.p, "p")?,
            },
            FamilyName::Mycielski => Family::MycielskiTower {
                base: Box::new(Family::Cycle { n: self.need(self.n, "n")? }),
                levels: self.levels,
            },
            FamilyName::Kneser => Family::Kneser {
                n: self.need(self.n, "n")?,
                k: self.need(self.k, "k")?,
            },
            FamilyName::Multipartite => {
                if self.parts.is_empty() {
                    return Err(LabError::Usage("--parts is required for this family".into()));
                }
                Family::CompleteMultipartite { parts: self.parts.clone() }
            }
            FamilyName::Cycle => Family::Cycle { n: self.need(self.n, "n")? },
            FamilyName::Path => Family::Path { n: self.need(self.n, "n")? },
            FamilyName::PlantedCore => Family::PlantedCore {
                n: self.need(self.n, "n")?,
                a: self.need(self.a, "a")?,
                b: self.need(self.b, "b")?,
                noise: self.noise,
            },
            FamilyName::Fixture => Family::Fixture {
                id: self.id.clone().ok_or_else(|| LabError::Usage("--id is required for fixtures".into()))?,
            },
        })
    }
}

#[derive(Args)]
struct LemmaArgs {
    /// Suite name: containment, digraph, gallai-roy, private-cover, stable-removal, pipeline.
    suite: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SurveyArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct AuditOutput {
    violations: usize,
    audit_clean1: AuditReport,
    audit_final: AuditReport,
    strong_triples: AuditReport,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn graph_report<T: Serialize>(cmd: &str, c: &GraphCommand, run: impl FnOnce(&Graph, &Params, &Limits, &mut Timings) -> Result<T>) -> Result<()> {
    let (source, g) = c.graph.load()?;
    let params = c.params.params();
    let limits = c.common.limits();
    let mut timings = Timings::default();
    let result = run(&g, &params, &limits, &mut timings)?;
    let report = Report {
        command: cmd.into(),
        version: report::VERSION,
        instance: Instance::new(source, &g),
        params,
        seed: c.common.seed,
        limits,
        result,
        timings: c.timings.then_some(timings),
    };
    emit(&c.common.out, &report.to_json()?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => {
            let g = generators::generate(&GenSpec {
                family: a.family()?,
                seed: a.common.seed,
            })?;
            emit(&a.common.out, &io::write_graph(&g, a.format))
        }
        Command::Analyze(c) => graph_report("analyze", &c, |g, p, limits, timings| {
            report::analyze(g, p.delta, limits, timings, c.timings)
        }),
        Command::Pipeline(c) => graph_report("pipeline", &c, |g, p, limits, timings| {
            timings.time(c.timings, "pipeline", || pipeline::run_pipeline(g, p, limits))
        }),
        Command::Audit(c) => graph_report("audit", &c, |g, p, limits, timings| {
            let tr = timings.time(c.timings, "pipeline", || pipeline::run_pipeline(g, p, limits))?;
            Ok(AuditOutput {
                violations: tr.violation_count(),
                audit_clean1: tr.audit_clean1,
                audit_final: tr.audit_final,
                strong_triples: tr.strong_triples.report,
            })
        }),
        Command::LemmaCheck(a) => {
            let outcome = suites::run_suite(&a.suite, a.trials, a.common.seed, &a.common.limits())?;
            emit(&a.common.out, &json(&outcome)?)?;
            outcome.into_result().map(|_| ())
        }
        Command::Constants(a) => {
            let ledger = constants::ledger(&a.params.params())?;
            emit(&a.common.out, &json(&ledger)?)
        }
        Command::Survey(a) => {
            let manifest = survey::read_manifest(&a.manifest)?;
            let base = a.manifest.parent().unwrap_or(Path::new("."));
            let rows = survey::run_survey(&manifest, base, &a.common.limits());
            emit(&a.common.out, &survey::to_csv(&rows)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
