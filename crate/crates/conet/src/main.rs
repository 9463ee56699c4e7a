//! Command-line front-end. Every failure exits nonzero with a one-line
//! machine-readable JSON object on stderr: {"kind": ..., "message": ...}.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conet::error::Error;
use conet::graph::UndirectedGraph;
use conet::harness::{
    compare, ingest_and_report, run, sweep_nu, AggregateReport, HarnessError, RunFile, SweepSpec,
};
use conet::metrics::{degree_distribution, full_report};

#[derive(Parser)]
#[command(
    name = "conet",
    version,
    about = "Concept co-occurrence networks: ingest corpora, generate models, measure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the concept network of a JSONL corpus and report its metrics.
    Ingest(IngestArgs),
    /// Generate networks from a model and aggregate metrics over realizations.
    Generate(GenerateArgs),
    /// Sweep the novelty probability nu, recording mean concept count N.
    Sweep(SweepArgs),
    /// Render aggregate reports side by side, one row per run.
    Compare(CompareArgs),
    /// Measure a stored edge-list file.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Corpus path (JSONL, one article per line).
    corpus: PathBuf,
    /// Drop concepts flagged as generic before building the network.
    #[arg(long)]
    exclude_generic: bool,
    /// Directory for report.csv, report.json, degdist.tsv, blocksizes.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML run file (key = value); flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model to run: er, ba, blocks, or ingest.
    #[arg(long, value_parser = ["er", "ba", "blocks", "ingest"])]
    model: Option<String>,
    /// er: node count N.
    #[arg(long)]
    nodes: Option<usize>,
    /// er: link count L.
    #[arg(long)]
    links: Option<u64>,
    /// ba: seed node count m0 (seed nodes start isolated).
    #[arg(long)]
    m0: Option<usize>,
    /// ba: links per newcomer m.
    #[arg(long)]
    m: Option<usize>,
    /// ba: growth steps.
    #[arg(long)]
    steps: Option<usize>,
    /// blocks: number of articles to generate.
    #[arg(long)]
    articles: Option<u32>,
    /// blocks: per-slot novelty probability.
    #[arg(long)]
    nu: Option<f64>,
    /// blocks: fixed:<n> | empirical:<csv> | lognormal:<mean>,<sigma>.
    #[arg(long)]
    blocks: Option<String>,
    /// blocks: usp or psp.
    #[arg(long, value_parser = ["usp", "psp"])]
    selection: Option<String>,
    /// ingest model only: corpus path.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// ingest model only: drop generic concepts.
    #[arg(long)]
    exclude_generic: bool,
    /// Independent realizations to generate and average.
    #[arg(long)]
    realizations: Option<u32>,
    /// Master seed; realization i runs with a seed derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrent realizations (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Run directory for config.toml, report_{i}.csv, degdist_{i}.tsv,
    /// aggregate.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also cache each realization's graph as edges_{i}.tsv.
    #[arg(long)]
    write_edges: bool,
    /// Row label for later comparisons.
    #[arg(long)]
    label: Option<String>,
}

impl GenerateArgs {
    fn overrides(&self) -> RunFile {
        RunFile {
            model: self.model.clone(),
            corpus: self.corpus.clone(),
            exclude_generic: self.exclude_generic.then_some(true),
            nodes: self.nodes,
            links: self.links,
            m0: self.m0,
            m: self.m,
            steps: self.steps,
            articles: self.articles,
            nu: self.nu,
            blocks: self.blocks.clone(),
            selection: self.selection.clone(),
            realizations: self.realizations,
            seed: self.seed,
            jobs: self.jobs,
            out: self.out.clone(),
            write_edges: self.write_edges.then_some(true),
            label: self.label.clone(),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated nu grid, each value in (0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    /// Articles per generated corpus.
    #[arg(long)]
    articles: u32,
    /// fixed:<n> | empirical:<csv> | lognormal:<mean>,<sigma>.
    #[arg(long, default_value = "fixed:37")]
    blocks: String,
    /// usp or psp.
    #[arg(long, value_parser = ["usp", "psp"], default_value = "usp")]
    selection: String,
    /// Realizations per grid point: one value broadcast to all points,
    /// or a comma-separated schedule matching the grid.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    realizations: Vec<u32>,
    /// Master seed; grid point p, realization r derive from it in order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concurrent realizations (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// aggregate.json files from generate/ingest runs (at least two).
    #[arg(required = true, num_args = 2..)]
    reports: Vec<PathBuf>,
    /// Render a markdown table instead of CSV.
    #[arg(long)]
    markdown: bool,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Edge-list file (header `#nodes=N links=L`, then `u<TAB>v` lines).
    edges: PathBuf,
    /// Directory for report.csv, report.json, degdist.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let message = e.render().to_string();
            eprintln!(
                "{}",
                serde_json::json!({ "kind": "usage", "message": message })
            );
            return ExitCode::from(2);
        }
        // --help / --version go to stdout and exit 0.
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "kind": e.kind(), "message": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Ingest(args) => {
            let result = ingest_and_report(&args.corpus, args.exclude_generic, args.out.as_deref())?;
            let mut stdout = std::io::stdout().lock();
            result.report.write_csv(&mut stdout)?;
            stdout.flush()?;
            Ok(())
        }
        Command::Generate(args) => {
            let base = match &args.config {
                Some(path) => RunFile::load(path)?,
                None => RunFile::default(),
            };
            let spec = base.merged_with(args.overrides()).into_spec()?;
            let aggregate = run(&spec)?;
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &aggregate)
                .map_err(|e| HarnessError::InvalidSpec(format!("aggregate serialization: {}", e)))?;
            writeln!(stdout)?;
            stdout.flush()?;
            Ok(())
        }
        Command::Sweep(args) => {
            let spec = SweepSpec {
                grid: args.grid,
                articles: args.articles,
                blocks: args.blocks.parse()?,
                selection: args.selection.parse()?,
                schedule: args.realizations,
                seed: args.seed,
                out_dir: args.out,
                jobs: args.jobs,
            };
            let report = sweep_nu(&spec)?;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(report.to_csv().as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
        Command::Compare(args) => {
            let mut reports = Vec::with_capacity(args.reports.len());
            for path in &args.reports {
                let text = fs::read_to_string(path)?;
                let report: AggregateReport = serde_json::from_str(&text).map_err(|e| {
                    HarnessError::InvalidSpec(format!("{}: {}", path.display(), e))
                })?;
                reports.push(report);
            }
            let table = compare(&reports)?;
            let rendered = if args.markdown {
                table.to_markdown()
            } else {
                table.to_csv()
            };
            match &args.out {
                Some(path) => fs::write(path, rendered)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout.write_all(rendered.as_bytes())?;
                    stdout.flush()?;
                }
            }
            Ok(())
        }
        Command::Report(args) => {
            let file = File::open(&args.edges)?;
            let graph = UndirectedGraph::read_edge_list(BufReader::new(file))?;
            let report = full_report(&graph)?;
            if let Some(dir) = &args.out {
                fs::create_dir_all(dir)?;
                let mut out = File::create(dir.join("report.csv"))?;
                report.write_csv(&mut out)?;
                let json = serde_json::to_string_pretty(&report).map_err(|e| {
                    HarnessError::InvalidSpec(format!("report serialization: {}", e))
                })?;
                fs::write(dir.join("report.json"), json)?;
                let dist = degree_distribution(&graph)?;
                let mut out = File::create(dir.join("degdist.tsv"))?;
                dist.write_tsv(&mut out)?;
            }
            let mut stdout = std::io::stdout().lock();
            report.write_csv(&mut stdout)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

// Keeps clap's derive assertions exercised in debug builds.
#[test]
fn cli_definition_is_consistent() {
    use clap::CommandFactory;
    Cli::command().debug_assert();
}
