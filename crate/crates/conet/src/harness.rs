//! Experiment harness: run a model for R realizations, aggregate the
//! metric suite, sweep nu, compare aggregates, and ingest corpora.
//!
//! Every realization draws its own RNG seed from the master seed via a
//! fixed splitmix64-based derivation, so runs reproduce bit-exactly
//! across machines and `--jobs` settings, and any logged seed can be
//! replayed in isolation with [`generate_for_seed`].

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{barabasi_albert, erdos_renyi, BaConfig, ErConfig};
use crate::corpus::{BipartiteNetwork, BlockSizeDistribution, Corpus, CorpusError, ParseStats};
use crate::error::ConfigError;
use crate::graph::{GraphError, UndirectedGraph};
use crate::growth::{generate_network, ModelConfig, SelectionMode};
use crate::metrics::{
    degree_distribution, fmt_f64, full_report, DegreeDistribution, MetricsError, MetricsReport,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("need at least 2 reports to compare, got {0}")]
    TooFewReports(usize),
    #[error("realization {index} (seed {seed}) failed: {message}")]
    Realization {
        index: u32,
        seed: u64,
        message: String,
    },
    #[error("invalid run spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

/// Splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for realization `index` under `master`. Fixed for all time:
/// splitmix64 finalizer applied to master + (index + 1) * golden gamma,
/// i.e. the (index + 1)-th output of a splitmix64 stream seeded with
/// `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15)))
}

/// Block-size distribution as specified on a command line or run file:
/// `fixed:37`, `empirical:<csv path>`, or `lognormal:<mean>,<sigma>`.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockSpec {
    Fixed(u32),
    Empirical(PathBuf),
    LogNormal { mean: f64, sigma: f64 },
}

impl BlockSpec {
    /// Loads/validates the actual distribution (reads the histogram
    /// file for the empirical kind).
    pub fn resolve(&self) -> Result<BlockSizeDistribution, HarnessError> {
        match self {
            BlockSpec::Fixed(n) => Ok(BlockSizeDistribution::fixed(*n)?),
            BlockSpec::LogNormal { mean, sigma } => {
                Ok(BlockSizeDistribution::log_normal(*mean, *sigma)?)
            }
            BlockSpec::Empirical(path) => {
                let file = File::open(path).map_err(io_at(path))?;
                Ok(BlockSizeDistribution::read_csv(BufReader::new(file))?)
            }
        }
    }
}

impl std::fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockSpec::Fixed(n) => write!(f, "fixed:{}", n),
            BlockSpec::Empirical(path) => write!(f, "empirical:{}", path.display()),
            BlockSpec::LogNormal { mean, sigma } => {
                write!(f, "lognormal:{},{}", fmt_f64(*mean), fmt_f64(*sigma))
            }
        }
    }
}

impl FromStr for BlockSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            ConfigError::invalid(format!(
                "block spec {:?} must look like fixed:37, empirical:<csv>, or lognormal:<mean>,<sigma>",
                s
            ))
        })?;
        match kind {
            "fixed" => {
                let n: u32 = rest.parse().map_err(|e| {
                    ConfigError::invalid(format!("fixed block size {:?}: {}", rest, e))
                })?;
                Ok(BlockSpec::Fixed(n))
            }
            "empirical" => {
                if rest.is_empty() {
                    return Err(ConfigError::invalid("empirical block spec needs a csv path"));
                }
                Ok(BlockSpec::Empirical(PathBuf::from(rest)))
            }
            "lognormal" => {
                let (mean, sigma) = rest.split_once(',').ok_or_else(|| {
                    ConfigError::invalid("lognormal block spec needs <mean>,<sigma>")
                })?;
                let mean: f64 = mean.trim().parse().map_err(|e| {
                    ConfigError::invalid(format!("lognormal mean {:?}: {}", mean, e))
                })?;
                let sigma: f64 = sigma.trim().parse().map_err(|e| {
                    ConfigError::invalid(format!("lognormal sigma {:?}: {}", sigma, e))
                })?;
                Ok(BlockSpec::LogNormal { mean, sigma })
            }
            other => Err(ConfigError::invalid(format!(
                "unknown block spec kind {:?}",
                other
            ))),
        }
    }
}

/// Which generator (or ingestion pipeline) a run drives.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Ingest {
        corpus: PathBuf,
        exclude_generic: bool,
    },
    Er {
        nodes: usize,
        links: u64,
    },
    Ba {
        m0: usize,
        m: usize,
        steps: usize,
    },
    Blocks {
        articles: u32,
        nu: f64,
        blocks: BlockSpec,
        selection: SelectionMode,
    },
}

impl ModelSpec {
    pub fn default_label(&self) -> String {
        match self {
            ModelSpec::Ingest { .. } => "empirical".into(),
            ModelSpec::Er { .. } => "erdos-renyi".into(),
            ModelSpec::Ba { .. } => "barabasi-albert".into(),
            ModelSpec::Blocks { selection, blocks, .. } => format!(
                "{}-{}",
                selection,
                blocks.to_string().replace(':', "").replace(',', "-")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ModelSpec,
    pub realizations: u32,
    /// Master seed; per-realization seeds derive from it.
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Worker threads for realizations; 0 means library default.
    pub jobs: usize,
    /// Also cache each realization's graph as `edges_{i}.tsv`.
    pub write_edges: bool,
    /// Row label in comparisons; defaults from the model.
    pub label: Option<String>,
}

impl RunSpec {
    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.model.default_label())
    }
}

/// Model with file-backed parts loaded, ready to realize repeatedly.
enum ResolvedModel {
    Ingest { corpus: PathBuf, exclude: bool },
    Er { nodes: usize, links: u64 },
    Ba { m0: usize, m: usize, steps: usize },
    Blocks {
        articles: u32,
        nu: f64,
        dist: BlockSizeDistribution,
        selection: SelectionMode,
    },
}

fn resolve(model: &ModelSpec) -> Result<ResolvedModel, HarnessError> {
    Ok(match model {
        ModelSpec::Ingest { corpus, exclude_generic } => ResolvedModel::Ingest {
            corpus: corpus.clone(),
            exclude: *exclude_generic,
        },
        ModelSpec::Er { nodes, links } => ResolvedModel::Er {
            nodes: *nodes,
            links: *links,
        },
        ModelSpec::Ba { m0, m, steps } => ResolvedModel::Ba {
            m0: *m0,
            m: *m,
            steps: *steps,
        },
        ModelSpec::Blocks { articles, nu, blocks, selection } => {
            let cfg = ModelConfig {
                articles: *articles,
                nu: *nu,
                block_sizes: blocks.resolve()?,
                selection: *selection,
                seed: 0,
                realizations: 1,
            };
            cfg.validate()?;
            ResolvedModel::Blocks {
                articles: *articles,
                nu: *nu,
                dist: cfg.block_sizes,
                selection: *selection,
            }
        }
    })
}

fn load_corpus(path: &Path, exclude: bool) -> Result<(Corpus, ParseStats), HarnessError> {
    let file = File::open(path).map_err(io_at(path))?;
    let (corpus, stats) = Corpus::parse_jsonl(BufReader::new(file))?;
    Ok((corpus.filter_generic(exclude)?, stats))
}

fn realize(model: &ResolvedModel, seed: u64) -> Result<UndirectedGraph, HarnessError> {
    Ok(match model {
        ResolvedModel::Ingest { corpus, exclude } => {
            let (corpus, _) = load_corpus(corpus, *exclude)?;
            BipartiteNetwork::build(&corpus).project_concepts()
        }
        ResolvedModel::Er { nodes, links } => erdos_renyi(&ErConfig {
            nodes: *nodes,
            links: *links,
            seed,
        })?,
        ResolvedModel::Ba { m0, m, steps } => barabasi_albert(&BaConfig {
            m0: *m0,
            m: *m,
            steps: *steps,
            seed,
        })?,
        ResolvedModel::Blocks { articles, nu, dist, selection } => {
            let cfg = ModelConfig {
                articles: *articles,
                nu: *nu,
                block_sizes: dist.clone(),
                selection: *selection,
                seed,
                realizations: 1,
            };
            generate_network(&cfg)?.0
        }
    })
}

/// Regenerates one realization from its logged seed and measures it.
/// This is the replay path: same model spec + same seed reproduce the
/// graph and report bit-exactly.
pub fn generate_for_seed(
    model: &ModelSpec,
    seed: u64,
) -> Result<(UndirectedGraph, MetricsReport), HarnessError> {
    let resolved = resolve(model)?;
    let graph = realize(&resolved, seed)?;
    let report = full_report(&graph)?;
    Ok((graph, report))
}

/// Mean/std of one metric across realizations. A metric undefined in
/// any realization aggregates as undefined, with the count retained;
/// std is additionally undefined for single-realization runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetric {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub undefined_count: u32,
}

impl AggregateMetric {
    fn over(values: &[Option<f64>]) -> Self {
        let undefined_count = values.iter().filter(|v| v.is_none()).count() as u32;
        if undefined_count > 0 {
            return AggregateMetric {
                mean: None,
                std: None,
                undefined_count,
            };
        }
        let n = values.len() as f64;
        // Fixed fold in realization-index order.
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for v in values.iter().flatten() {
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n;
        let std = if values.len() == 1 {
            None
        } else {
            Some((sum_sq / n - mean * mean).max(0.0).sqrt())
        };
        AggregateMetric {
            mean: Some(mean),
            std,
            undefined_count: 0,
        }
    }
}

/// Metric suite averaged over the realizations of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub label: String,
    pub realizations: u32,
    /// Per-realization seeds, in index order, for replay.
    pub seeds: Vec<u64>,
    pub nodes: AggregateMetric,
    pub links: AggregateMetric,
    /// Density as a fraction.
    pub density: AggregateMetric,
    pub mean_degree: AggregateMetric,
    pub degree_std: AggregateMetric,
    pub max_degree: AggregateMetric,
    pub assortativity: AggregateMetric,
    pub avg_clustering: AggregateMetric,
    pub transitivity: AggregateMetric,
    /// True when R = 1, where std fields carry no information.
    pub single_realization: bool,
    pub reports: Vec<MetricsReport>,
}

impl AggregateReport {
    pub fn from_reports(label: String, seeds: Vec<u64>, reports: Vec<MetricsReport>) -> Self {
        let column = |f: &dyn Fn(&MetricsReport) -> Option<f64>| {
            AggregateMetric::over(&reports.iter().map(f).collect::<Vec<_>>())
        };
        AggregateReport {
            label,
            realizations: reports.len() as u32,
            seeds,
            nodes: column(&|r| Some(r.nodes as f64)),
            links: column(&|r| Some(r.links as f64)),
            density: column(&|r| Some(r.density)),
            mean_degree: column(&|r| Some(r.mean_degree)),
            degree_std: column(&|r| Some(r.degree_std)),
            max_degree: column(&|r| Some(r.max_degree as f64)),
            assortativity: column(&|r| r.assortativity),
            avg_clustering: column(&|r| Some(r.avg_clustering)),
            transitivity: column(&|r| r.transitivity),
            single_realization: reports.len() == 1,
            reports,
        }
    }
}

fn write_via<F>(path: &Path, write: F) -> Result<(), HarnessError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let file = File::create(path).map_err(io_at(path))?;
    let mut out = BufWriter::new(file);
    write(&mut out).and_then(|()| out.flush()).map_err(io_at(path))
}

/// Runs `spec.realizations` independent realizations, measures each,
/// and aggregates. With an output directory set, writes `config.toml`,
/// `report_{i}.csv`, `degdist_{i}.tsv`, optionally `edges_{i}.tsv`, and
/// `aggregate.json`.
pub fn run(spec: &RunSpec) -> Result<AggregateReport, HarnessError> {
    if spec.realizations == 0 {
        return Err(HarnessError::InvalidSpec("realizations must be >= 1".into()));
    }
    let resolved = resolve(&spec.model)?;
    if let Some(dir) = &spec.out_dir {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
        let config = toml::to_string(&RunFile::from_spec(spec))
            .map_err(|e| HarnessError::InvalidSpec(format!("config serialization: {}", e)))?;
        write_via(&dir.join("config.toml"), |out| out.write_all(config.as_bytes()))?;
    }
    let seeds: Vec<u64> = (0..spec.realizations as u64)
        .map(|i| derive_seed(spec.seed, i))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("thread pool: {}", e)))?;
    let reports: Vec<MetricsReport> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(index, &seed)| -> Result<MetricsReport, HarnessError> {
                let fail = |message: String| HarnessError::Realization {
                    index: index as u32,
                    seed,
                    message,
                };
                let graph = realize(&resolved, seed).map_err(|e| fail(e.to_string()))?;
                let report = full_report(&graph).map_err(|e| fail(e.to_string()))?;
                if let Some(dir) = &spec.out_dir {
                    let dist = degree_distribution(&graph).map_err(|e| fail(e.to_string()))?;
                    write_via(&dir.join(format!("report_{}.csv", index)), |out| {
                        report.write_csv(out)
                    })?;
                    write_via(&dir.join(format!("degdist_{}.tsv", index)), |out| {
                        dist.write_tsv(out)
                    })?;
                    if spec.write_edges {
                        write_via(&dir.join(format!("edges_{}.tsv", index)), |out| {
                            graph.write_edge_list(out)
                        })?;
                    }
                }
                Ok(report)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let aggregate = AggregateReport::from_reports(spec.label(), seeds, reports);
    if let Some(dir) = &spec.out_dir {
        let path = dir.join("aggregate.json");
        let json = serde_json::to_string_pretty(&aggregate)
            .map_err(|e| HarnessError::InvalidSpec(format!("aggregate serialization: {}", e)))?;
        write_via(&path, |out| out.write_all(json.as_bytes()))?;
    }
    Ok(aggregate)
}

/// One point of a nu sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub nu: f64,
    pub realizations: u32,
    pub mean_nodes: f64,
    pub std_nodes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Whether mean N is non-decreasing along the grid as given.
    pub non_decreasing: bool,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# non_decreasing={}\nnu,realizations,mean_N,std_N\n", self.non_decreasing);
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(p.nu),
                p.realizations,
                fmt_f64(p.mean_nodes),
                fmt_f64(p.std_nodes)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Novelty probabilities to visit, each in (0, 1].
    pub grid: Vec<f64>,
    pub articles: u32,
    pub blocks: BlockSpec,
    pub selection: SelectionMode,
    /// Realizations per grid point: one entry per point, or a single
    /// entry broadcast to all (Fig. 5 uses more realizations at small
    /// nu; the schedule is the caller's choice).
    pub schedule: Vec<u32>,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub jobs: usize,
}

/// Sweeps nu, recording the concept count N of each generated corpus
/// (no graphs are built; only N is needed). Writes `sweep.csv` when an
/// output directory is set.
pub fn sweep_nu(spec: &SweepSpec) -> Result<SweepReport, HarnessError> {
    if spec.grid.is_empty() {
        return Err(HarnessError::InvalidSpec("sweep grid must be non-empty".into()));
    }
    for &nu in &spec.grid {
        if !(nu.is_finite() && 0.0 < nu && nu <= 1.0) {
            return Err(HarnessError::InvalidSpec(format!(
                "sweep grid values must lie in (0, 1], got {}",
                nu
            )));
        }
    }
    let schedule: Vec<u32> = match spec.schedule.len() {
        1 => vec![spec.schedule[0]; spec.grid.len()],
        n if n == spec.grid.len() => spec.schedule.clone(),
        n => {
            return Err(HarnessError::InvalidSpec(format!(
                "schedule has {} entries for {} grid points",
                n,
                spec.grid.len()
            )))
        }
    };
    if schedule.iter().any(|&r| r == 0) {
        return Err(HarnessError::InvalidSpec("schedule entries must be >= 1".into()));
    }
    let dist = spec.blocks.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| HarnessError::InvalidSpec(format!("thread pool: {}", e)))?;
    let mut points = Vec::with_capacity(spec.grid.len());
    for (p, (&nu, &reals)) in spec.grid.iter().zip(&schedule).enumerate() {
        let point_seed = derive_seed(spec.seed, p as u64);
        let counts: Vec<f64> = pool.install(|| {
            (0..reals as u64)
                .into_par_iter()
                .map(|r| -> Result<f64, HarnessError> {
                    let cfg = ModelConfig {
                        articles: spec.articles,
                        nu,
                        block_sizes: dist.clone(),
                        selection: spec.selection,
                        seed: derive_seed(point_seed, r),
                        realizations: 1,
                    };
                    Ok(crate::growth::generate_corpus(&cfg)?.concept_count() as f64)
                })
                .collect::<Result<Vec<_>, _>>()
        })?;
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
        points.push(SweepPoint {
            nu,
            realizations: reals,
            mean_nodes: mean,
            std_nodes: var.sqrt(),
        });
    }
    let non_decreasing = points.windows(2).all(|w| w[1].mean_nodes >= w[0].mean_nodes);
    let report = SweepReport { points, non_decreasing };
    if let Some(dir) = &spec.out_dir {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
        write_via(&dir.join("sweep.csv"), |out| {
            out.write_all(report.to_csv().as_bytes())
        })?;
    }
    Ok(report)
}

/// Side-by-side table of aggregate reports, one row each, in Table-1
/// column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    rows: Vec<[String; 10]>,
}

const COMPARE_HEADER: [&str; 10] = [
    "label", "N", "L", "rho_percent", "mean_k", "sigma", "k_max", "r", "avg_c", "T",
];

fn agg_cell(metric: &AggregateMetric, scale: f64) -> String {
    match metric.mean {
        Some(m) => fmt_f64(m * scale),
        None => "undef".into(),
    }
}

/// Renders >= 2 aggregates side by side; a pure function of its input.
pub fn compare(reports: &[AggregateReport]) -> Result<ComparisonTable, HarnessError> {
    if reports.len() < 2 {
        return Err(HarnessError::TooFewReports(reports.len()));
    }
    let rows = reports
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                agg_cell(&r.nodes, 1.0),
                agg_cell(&r.links, 1.0),
                agg_cell(&r.density, 100.0),
                agg_cell(&r.mean_degree, 1.0),
                agg_cell(&r.degree_std, 1.0),
                agg_cell(&r.max_degree, 1.0),
                agg_cell(&r.assortativity, 1.0),
                agg_cell(&r.avg_clustering, 1.0),
                agg_cell(&r.transitivity, 1.0),
            ]
        })
        .collect();
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = COMPARE_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("| {} |\n", COMPARE_HEADER.join(" | "));
        out.push_str(&format!("|{}\n", " --- |".repeat(COMPARE_HEADER.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }
}

/// Everything `ingest` produces for one corpus.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub stats: ParseStats,
    pub report: MetricsReport,
    pub distribution: DegreeDistribution,
    pub block_sizes: BlockSizeDistribution,
}

/// Full ingestion pipeline: parse, optionally drop generic concepts,
/// project onto concepts, and measure. With an output directory set,
/// writes `report.csv`, `report.json`, `degdist.tsv`, `blocksizes.csv`.
pub fn ingest_and_report(
    corpus_path: &Path,
    exclude_generic: bool,
    out_dir: Option<&Path>,
) -> Result<IngestReport, HarnessError> {
    let (corpus, stats) = load_corpus(corpus_path, exclude_generic)?;
    if corpus.article_count() == 0 {
        return Err(CorpusError::EmptyCorpus.into());
    }
    // Block sizes reflect the corpus as analyzed (post-filtering).
    let block_sizes = corpus.block_size_histogram()?;
    let graph = BipartiteNetwork::build(&corpus).project_concepts();
    let report = full_report(&graph)?;
    let distribution = degree_distribution(&graph)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
        write_via(&dir.join("report.csv"), |out| report.write_csv(out))?;
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| HarnessError::InvalidSpec(format!("report serialization: {}", e)))?;
        write_via(&dir.join("report.json"), |out| out.write_all(json.as_bytes()))?;
        write_via(&dir.join("degdist.tsv"), |out| distribution.write_tsv(out))?;
        let hist_path = dir.join("blocksizes.csv");
        let file = File::create(&hist_path).map_err(io_at(&hist_path))?;
        let mut out = BufWriter::new(file);
        block_sizes.write_csv(&mut out)?;
        out.flush().map_err(io_at(&hist_path))?;
    }
    Ok(IngestReport {
        stats,
        report,
        distribution,
        block_sizes,
    })
}

/// Flat key=value run file (TOML), also the schema of `config.toml`
/// echoed into run directories. CLI flags override file values.
///
/// Keys: model, corpus, exclude_generic, nodes, links, m0, m, steps,
/// articles, nu, blocks, selection, realizations, seed, jobs, out,
/// write_edges, label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclude_generic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub articles: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub write_edges: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl RunFile {
    pub fn parse_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::InvalidSpec(format!("run file: {}", e)))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_at(path))?;
        Self::parse_toml(&text)
    }

    /// Overlays `overrides` (typically CLI flags) on `self`.
    pub fn merged_with(mut self, overrides: RunFile) -> RunFile {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if overrides.$field.is_some() { self.$field = overrides.$field; })*
            };
        }
        take!(
            model, corpus, exclude_generic, nodes, links, m0, m, steps, articles, nu, blocks,
            selection, realizations, seed, jobs, out, write_edges, label
        );
        self
    }

    pub fn from_spec(spec: &RunSpec) -> RunFile {
        let mut file = RunFile {
            realizations: Some(spec.realizations),
            seed: Some(spec.seed),
            jobs: Some(spec.jobs),
            out: spec.out_dir.clone(),
            write_edges: Some(spec.write_edges),
            label: spec.label.clone(),
            ..RunFile::default()
        };
        match &spec.model {
            ModelSpec::Ingest { corpus, exclude_generic } => {
                file.model = Some("ingest".into());
                file.corpus = Some(corpus.clone());
                file.exclude_generic = Some(*exclude_generic);
            }
            ModelSpec::Er { nodes, links } => {
                file.model = Some("er".into());
                file.nodes = Some(*nodes);
                file.links = Some(*links);
            }
            ModelSpec::Ba { m0, m, steps } => {
                file.model = Some("ba".into());
                file.m0 = Some(*m0);
                file.m = Some(*m);
                file.steps = Some(*steps);
            }
            ModelSpec::Blocks { articles, nu, blocks, selection } => {
                file.model = Some("blocks".into());
                file.articles = Some(*articles);
                file.nu = Some(*nu);
                file.blocks = Some(blocks.to_string());
                file.selection = Some(selection.to_string());
            }
        }
        file
    }

    /// Materializes a run spec, checking the keys each model requires.
    pub fn into_spec(self) -> Result<RunSpec, HarnessError> {
        fn need<T>(value: Option<T>, key: &str, model: &str) -> Result<T, HarnessError> {
            value.ok_or_else(|| {
                HarnessError::InvalidSpec(format!("model {:?} requires key {:?}", model, key))
            })
        }
        let model_name = self
            .model
            .as_deref()
            .ok_or_else(|| HarnessError::InvalidSpec("missing key \"model\"".into()))?
            .to_string();
        let model = match model_name.as_str() {
            "ingest" => ModelSpec::Ingest {
                corpus: need(self.corpus, "corpus", "ingest")?,
                exclude_generic: self.exclude_generic.unwrap_or(false),
            },
            "er" => ModelSpec::Er {
                nodes: need(self.nodes, "nodes", "er")?,
                links: need(self.links, "links", "er")?,
            },
            "ba" => ModelSpec::Ba {
                m0: need(self.m0, "m0", "ba")?,
                m: need(self.m, "m", "ba")?,
                steps: need(self.steps, "steps", "ba")?,
            },
            "blocks" => ModelSpec::Blocks {
                articles: need(self.articles, "articles", "blocks")?,
                nu: need(self.nu, "nu", "blocks")?,
                blocks: need(self.blocks, "blocks", "blocks")?
                    .parse::<BlockSpec>()
                    .map_err(HarnessError::Config)?,
                selection: need(self.selection, "selection", "blocks")?
                    .parse::<SelectionMode>()
                    .map_err(HarnessError::Config)?,
            },
            other => {
                return Err(HarnessError::InvalidSpec(format!(
                    "unknown model {:?} (expected ingest, er, ba, or blocks)",
                    other
                )))
            }
        };
        Ok(RunSpec {
            model,
            realizations: self.realizations.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            out_dir: self.out,
            jobs: self.jobs.unwrap_or(0),
            write_edges: self.write_edges.unwrap_or(false),
            label: self.label,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn er_spec(out: Option<PathBuf>) -> RunSpec {
        RunSpec {
            model: ModelSpec::Er { nodes: 60, links: 400 },
            realizations: 3,
            seed: 42,
            out_dir: out,
            jobs: 1,
            write_edges: true,
            label: None,
        }
    }

    #[test]
    fn seed_derivation_is_frozen() {
        // splitmix64 outputs; derive_seed(0, i) is the (i+1)-th value of
        // the stream seeded with 0.
        assert_eq!(derive_seed(0, 0), 0xe220a8397b1dcdaf);
        assert_eq!(derive_seed(0, 1), 0x6e789e6aa1b965f4);
        assert_eq!(derive_seed(42, 0), 0xbdd732262feb6e95);
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
    }

    #[test]
    fn block_spec_parsing_round_trips() {
        for text in ["fixed:37", "empirical:hist.csv", "lognormal:37.0,1.0"] {
            let spec: BlockSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("fixed".parse::<BlockSpec>().is_err());
        assert!("fixed:x".parse::<BlockSpec>().is_err());
        assert!("empirical:".parse::<BlockSpec>().is_err());
        assert!("lognormal:37".parse::<BlockSpec>().is_err());
        assert!("pareto:1".parse::<BlockSpec>().is_err());
    }

    #[test]
    fn aggregate_metric_math() {
        let m = AggregateMetric::over(&[Some(1.0), Some(2.0), Some(3.0)]);
        assert_eq!(m.mean, Some(2.0));
        assert!((m.std.unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(m.undefined_count, 0);

        let undef = AggregateMetric::over(&[Some(1.0), None, Some(3.0)]);
        assert_eq!(undef.mean, None);
        assert_eq!(undef.std, None);
        assert_eq!(undef.undefined_count, 1);

        let single = AggregateMetric::over(&[Some(5.0)]);
        assert_eq!(single.mean, Some(5.0));
        assert_eq!(single.std, None);
    }

    #[test]
    fn run_writes_artifacts_and_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let spec = er_spec(Some(dir.path().to_path_buf()));
        let agg = run(&spec).unwrap();
        assert_eq!(agg.realizations, 3);
        assert_eq!(agg.label, "erdos-renyi");
        assert_eq!(agg.seeds.len(), 3);
        assert_eq!(agg.nodes.mean, Some(60.0));
        assert_eq!(agg.links.mean, Some(400.0));
        assert!(!agg.single_realization);
        for name in [
            "config.toml",
            "aggregate.json",
            "report_0.csv",
            "report_2.csv",
            "degdist_1.tsv",
            "edges_0.tsv",
        ] {
            assert!(dir.path().join(name).exists(), "missing {}", name);
        }
        // config.toml re-parses into the same spec.
        let file = RunFile::load(&dir.path().join("config.toml")).unwrap();
        assert_eq!(file.into_spec().unwrap(), spec);
        // aggregate.json round-trips.
        let text = fs::read_to_string(dir.path().join("aggregate.json")).unwrap();
        let back: AggregateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, agg);
    }

    #[test]
    fn replaying_a_logged_seed_reproduces_the_realization() {
        let spec = er_spec(None);
        let agg = run(&spec).unwrap();
        for (i, &seed) in agg.seeds.iter().enumerate() {
            let (_, report) = generate_for_seed(&spec.model, seed).unwrap();
            assert_eq!(report, agg.reports[i], "realization {}", i);
        }
    }

    #[test]
    fn run_respects_single_realization_flag() {
        let spec = RunSpec { realizations: 1, ..er_spec(None) };
        let agg = run(&spec).unwrap();
        assert!(agg.single_realization);
        assert_eq!(agg.nodes.std, None);
        assert!(matches!(
            run(&RunSpec { realizations: 0, ..er_spec(None) }),
            Err(HarnessError::InvalidSpec(_))
        ));
    }

    #[test]
    fn failed_realizations_carry_their_seed() {
        let spec = RunSpec {
            model: ModelSpec::Er { nodes: 3, links: 10 },
            ..er_spec(None)
        };
        match run(&spec) {
            Err(HarnessError::Realization { index: 0, seed, .. }) => {
                assert_eq!(seed, derive_seed(42, 0));
            }
            other => panic!("expected realization failure, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn compare_renders_undef_and_requires_two() {
        let reports = vec![
            MetricsReport {
                nodes: 3,
                links: 0,
                density: 0.0,
                mean_degree: 0.0,
                degree_std: 0.0,
                max_degree: 0,
                assortativity: None,
                avg_clustering: 0.0,
                transitivity: None,
                component_sizes: vec![1, 1, 1],
            };
            2
        ];
        let a = AggregateReport::from_reports("a".into(), vec![1, 2], reports.clone());
        let b = AggregateReport::from_reports("b".into(), vec![3, 4], reports);
        assert!(matches!(
            compare(&[a.clone()]),
            Err(HarnessError::TooFewReports(1))
        ));
        let table = compare(&[a.clone(), b.clone()]).unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with("label,N,L,rho_percent,mean_k,sigma,k_max,r,avg_c,T\n"));
        assert!(csv.contains("a,3.0,0.0,0.0,0.0,0.0,0.0,undef,0.0,undef"));
        let md = table.to_markdown();
        assert!(md.contains("| b |"));
        assert!(md.contains("undef"));
        // Pure function: identical inputs render identically.
        assert_eq!(compare(&[a.clone(), b.clone()]).unwrap(), table);
    }

    #[test]
    fn sweep_validates_and_annotates() {
        let base = SweepSpec {
            grid: vec![1.0],
            articles: 10,
            blocks: BlockSpec::Fixed(37),
            selection: SelectionMode::Usp,
            schedule: vec![2],
            seed: 5,
            out_dir: None,
            jobs: 1,
        };
        // Every slot novel: N = 370 exactly.
        let report = sweep_nu(&base).unwrap();
        assert_eq!(report.points[0].mean_nodes, 370.0);
        assert_eq!(report.points[0].std_nodes, 0.0);
        assert!(report.non_decreasing);

        assert!(sweep_nu(&SweepSpec { grid: vec![], ..base.clone() }).is_err());
        assert!(sweep_nu(&SweepSpec { grid: vec![0.0], ..base.clone() }).is_err());
        assert!(sweep_nu(&SweepSpec { grid: vec![1.5], ..base.clone() }).is_err());
        assert!(sweep_nu(&SweepSpec { schedule: vec![0], ..base.clone() }).is_err());
        assert!(sweep_nu(&SweepSpec {
            grid: vec![0.1, 0.2],
            schedule: vec![1, 2, 3],
            ..base.clone()
        })
        .is_err());

        let dir = tempfile::tempdir().unwrap();
        let spec = SweepSpec {
            grid: vec![0.05, 0.5],
            schedule: vec![3],
            out_dir: Some(dir.path().to_path_buf()),
            ..base
        };
        let report = sweep_nu(&spec).unwrap();
        assert!(report.non_decreasing);
        let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
        assert!(csv.starts_with("# non_decreasing=true\nnu,realizations,mean_N,std_N\n"));
    }

    #[test]
    fn ingest_pipeline_on_toy_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = dir.path().join("toy.jsonl");
        fs::write(
            &corpus_path,
            concat!(
                r#"{"id": "A1", "concepts": ["C1", "C2", "C3", "C4"]}"#,
                "\n",
                r#"{"id": "A2", "concepts": ["C1", "C5", "C6"]}"#,
                "\n",
                r#"{"id": "A3", "concepts": ["C3", "C4"]}"#,
                "\n"
            ),
        )
        .unwrap();
        let out = dir.path().join("out");
        let result = ingest_and_report(&corpus_path, false, Some(&out)).unwrap();
        assert_eq!(result.report.nodes, 6);
        assert_eq!(result.report.links, 9);
        assert_eq!(result.stats.duplicate_concepts, 0);
        assert!((result.block_sizes.mean() - 3.0).abs() < 1e-12);
        for name in ["report.csv", "report.json", "degdist.tsv", "blocksizes.csv"] {
            assert!(out.join(name).exists(), "missing {}", name);
        }
        // Missing file surfaces its path.
        let missing = dir.path().join("nope.jsonl");
        match ingest_and_report(&missing, false, None) {
            Err(HarnessError::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("expected io error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn run_file_merge_and_required_keys() {
        let base = RunFile::parse_toml("model = \"er\"\nnodes = 10\nseed = 1\n").unwrap();
        let overridden = base.clone().merged_with(RunFile {
            links: Some(20),
            seed: Some(9),
            ..RunFile::default()
        });
        let spec = overridden.into_spec().unwrap();
        assert_eq!(spec.model, ModelSpec::Er { nodes: 10, links: 20 });
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.realizations, 1);

        assert!(base.into_spec().is_err());
        assert!(RunFile::parse_toml("nodes = 10").unwrap().into_spec().is_err());
        assert!(RunFile::parse_toml("model = \"warp\"").unwrap().into_spec().is_err());
        assert!(RunFile::parse_toml("bogus_key = 1").is_err());

        let blocks = RunFile::parse_toml(
            "model = \"blocks\"\narticles = 5\nnu = 0.1\nblocks = \"fixed:3\"\nselection = \"psp\"\n",
        )
        .unwrap()
        .into_spec()
        .unwrap();
        assert_eq!(blocks.label(), "psp-fixed3");
    }
}
