//! `firedss` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or domain error, 2 usage error.
//! Settings come from an optional flat `key = value` file (`--config`);
//! command-line flags take precedence over it.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use firedss::fwi::{classify, ClassBands, FwiCodes};
use firedss::ingest::{self, Dataset, OutlierMethod, RecordParser, ResampleStrategy};
use firedss::metrics::{self, OntologySummary};
use firedss::retrieval::{self, EvalCase, HashedNgramEmbedder, VectorIndex};
use firedss::rules::{self, Atom};
use firedss::semweb::{self, Graph, Iri};
use firedss::stream::{self, AlertEngine, PipelineConfig, RecordSource, SourceSpec};

const DEFAULT_BASE: &str = "http://example.org/forest#";

#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "firedss",
    version,
    about = "Forest-fire decision support toolkit"
)]
struct Cli {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert the weather CSV to RDF.
    Convert(ConvertArgs),
    /// Apply preprocessing transforms and write CSV.
    Preprocess(PreprocessArgs),
    /// Run the micro-batch alert pipeline.
    Stream(StreamArgs),
    /// Run a SPARQL-subset query against an N-Triples graph.
    Query(QueryArgs),
    /// Ontology schema metrics from a graph or a counts file.
    Metrics(MetricsArgs),
    /// Parse a rule file; optionally saturate a fact file.
    RulesCheck(RulesCheckArgs),
    /// Top-k retrieval over a JSON-lines corpus.
    Retrieve(RetrieveArgs),
    /// Token-overlap precision/recall/F-measure.
    Eval(EvalArgs),
    /// Print, check or apply danger-class bands.
    Bands(BandsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RdfFormat {
    Nt,
    Xml,
}

#[derive(Args)]
struct ConvertArgs {
    /// Weather CSV (config key `dataset`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "nt")]
    format: RdfFormat,
    /// Base namespace (config key `base`).
    #[arg(long)]
    base: Option<String>,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated steps: log_area, ordinals, onehot[:col+col],
    /// zscore[:col+col], outliers:COL:zscore|iqr[:THRESHOLD], resample:COL:over|under
    #[arg(long, default_value = "")]
    ops: String,
    /// Write the provenance log (JSON) to this file.
    #[arg(long)]
    provenance: Option<PathBuf>,
    /// Print the correlation report (JSON) instead of CSV.
    #[arg(long)]
    correlations: bool,
    /// Seed for resampling (config key `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StreamArgs {
    /// Dataset replayed when the source is `file` (config key `dataset`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// `file`, `stdin` or `tcp:HOST:PORT` (config key `source`).
    #[arg(long)]
    source: Option<String>,
    /// Replay rate in records per second; unthrottled when omitted.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    bands: Option<PathBuf>,
    /// Alert JSON-lines file (appended to); stdout when omitted.
    #[arg(long)]
    sink: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// `max` or `mean`.
    #[arg(long)]
    aggregate: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Tsv,
    Json,
}

#[derive(Args)]
struct QueryArgs {
    /// N-Triples graph (config key `graph`).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Query file.
    #[arg(long, conflicts_with = "text")]
    query: Option<PathBuf>,
    /// Inline query text.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, value_enum, default_value = "tsv")]
    format: TableFormat,
    /// Show IRIs instead of their rdfs:label.
    #[arg(long)]
    no_labels: bool,
    /// Namespace bound to `ex:` unless the query declares it (config key `base`).
    #[arg(long)]
    base: Option<String>,
    /// Time the query over this many repetitions and print the timing JSON.
    #[arg(long)]
    repeat: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long, conflicts_with = "counts")]
    graph: Option<PathBuf>,
    /// JSON object with the seven ontology counts.
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Args)]
struct RulesCheckArgs {
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Ground facts to saturate; derived facts are printed.
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Print the derivation tree of this fact, e.g. `reduceIgnitionRisk(a1)`.
    #[arg(long, requires = "facts")]
    explain: Option<String>,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, conflicts_with = "alert")]
    query: Option<String>,
    /// Alert as `KIND:severity`, mapped to a query string.
    #[arg(long)]
    alert: Option<String>,
    #[arg(short, long, default_value_t = retrieval::DEFAULT_K)]
    k: usize,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, requires = "reference", conflicts_with = "cases")]
    response: Option<PathBuf>,
    #[arg(long)]
    reference: Option<PathBuf>,
    /// JSON-lines of {query, reference}, scored against the top hit in `--corpus`.
    #[arg(long)]
    cases: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BandsArgs {
    #[command(subcommand)]
    action: BandsAction,
}

#[derive(Subcommand)]
enum BandsAction {
    /// Print the effective bands in canonical form.
    Print {
        #[arg(long)]
        bands: Option<PathBuf>,
    },
    /// Validate a bands file.
    Check {
        #[arg(long)]
        bands: Option<PathBuf>,
    },
    /// Classify one CSV record (13 columns, dataset order).
    Classify {
        #[arg(long)]
        bands: Option<PathBuf>,
        #[arg(long)]
        record: String,
    },
}

/// Flat key/value settings.
#[derive(Default)]
struct Config {
    values: BTreeMap<String, String>,
}

const CONFIG_KEYS: [&str; 14] = [
    "dataset",
    "rules",
    "bands",
    "corpus",
    "checkpoint",
    "sink",
    "graph",
    "base",
    "source",
    "batch_size",
    "aggregate",
    "dimension",
    "seed",
    "rate",
];

impl Config {
    fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            let k = k.trim();
            if !CONFIG_KEYS.contains(&k) {
                return Err(usage(format!(
                    "{}:{}: unknown key `{k}`",
                    path.display(),
                    i + 1
                )));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config { values })
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }

    fn require_path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        self.path(flag, key).ok_or_else(|| {
            usage(format!(
                "missing --{} (or `{key}` in the config)",
                key.replace('_', "-")
            ))
        })
    }

    fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }

    fn parsed<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config `{key}`: bad value `{v}`"))),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_bands(cfg: &Config, flag: Option<PathBuf>) -> Result<ClassBands<f64>> {
    match cfg.path(flag, "bands") {
        Some(p) => ClassBands::parse(&read(&p)?).with_context(|| format!("bands {}", p.display())),
        None => Ok(ClassBands::default()),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset<f64>> {
    ingest::parse_dataset(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn embedder(
    cfg: &Config,
    dimension: Option<usize>,
    seed: Option<u64>,
) -> Result<HashedNgramEmbedder> {
    let dim = cfg.parsed(dimension, "dimension")?.unwrap_or(256);
    let seed = cfg.parsed(seed, "seed")?.unwrap_or(0);
    HashedNgramEmbedder::new(dim, 3, seed).map_err(|e| usage(e.to_string()))
}

fn load_index(path: &Path, emb: &HashedNgramEmbedder) -> Result<VectorIndex<f64>> {
    let docs = retrieval::load_corpus(&read(path)?)
        .with_context(|| format!("corpus {}", path.display()))?;
    let mut idx = VectorIndex::new(emb);
    idx.add(emb, docs)?;
    Ok(idx)
}

fn convert(cfg: &Config, a: ConvertArgs) -> Result<()> {
    let input = cfg.require_path(a.input, "dataset")?;
    let d = load_dataset(&input)?;
    let base = Iri::new(
        cfg.string(a.base, "base")
            .unwrap_or_else(|| DEFAULT_BASE.to_string()),
    )
    .map_err(|e| usage(e.to_string()))?;
    let g = semweb::csv_to_graph(&d, &base, "obs")?;
    let text = match a.format {
        RdfFormat::Nt => semweb::to_ntriples(&g),
        RdfFormat::Xml => semweb::to_rdfxml(&g)?,
    };
    write_output(a.output.as_deref(), &text)?;
    eprintln!("{} rows -> {} triples", d.len(), g.len());
    Ok(())
}

fn columns(
    spec: Option<&str>,
    d: &Dataset<f64>,
    pick: impl Fn(&ingest::Column) -> bool,
) -> Vec<String> {
    match spec {
        Some(s) => s.split('+').map(|c| c.trim().to_string()).collect(),
        None => d
            .schema()
            .iter()
            .filter(|c| pick(c))
            .map(|c| c.name.clone())
            .collect(),
    }
}

fn apply_op(d: Dataset<f64>, op: &str, seed: u64) -> Result<Dataset<f64>> {
    let parts: Vec<&str> = op.split(':').map(str::trim).collect();
    Ok(match parts.as_slice() {
        ["log_area"] => ingest::log_transform_area(d)?,
        ["ordinals"] => ingest::calendar_ordinals(d)?,
        ["onehot", rest @ ..] => {
            let cols = columns(rest.first().copied(), &d, |c| !c.kind.is_numeric());
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            ingest::one_hot_encode(d, &refs)?
        }
        ["zscore", rest @ ..] => {
            let cols = columns(rest.first().copied(), &d, |c| c.kind.is_numeric());
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            ingest::zscore_normalize(d, &refs)?.0
        }
        ["outliers", col, method, rest @ ..] => {
            let m = match *method {
                "zscore" => OutlierMethod::ZScore,
                "iqr" => OutlierMethod::Iqr,
                other => {
                    return Err(usage(format!(
                        "outlier method must be zscore or iqr, got `{other}`"
                    )))
                }
            };
            let t = match rest.first() {
                Some(t) => t
                    .parse()
                    .map_err(|_| usage(format!("bad threshold `{t}`")))?,
                None => m.default_threshold(),
            };
            ingest::filter_outliers(d, col, m, t)?
        }
        ["resample", col, strategy] => {
            let s = match *strategy {
                "over" => ResampleStrategy::Oversample,
                "under" => ResampleStrategy::Undersample,
                other => {
                    return Err(usage(format!(
                        "resample strategy must be over or under, got `{other}`"
                    )))
                }
            };
            ingest::resample(d, col, s, seed)?
        }
        _ => return Err(usage(format!("unknown preprocessing step `{op}`"))),
    })
}

/// Qualitative sign claims for the correlation figure: (a, b, expected sign).
const CORRELATION_CLAIMS: [(&str, &str, i8); 13] = [
    ("temp", "area", 1),
    ("ISI", "area", 1),
    ("DC", "area", 1),
    ("DMC", "area", 1),
    ("FFMC", "area", 1),
    ("RH", "area", -1),
    ("wind", "area", -1),
    ("rain", "area", -1),
    ("temp", "DC", 1),
    ("DMC", "DC", 1),
    ("FFMC", "ISI", 1),
    ("RH", "rain", 1),
    ("wind", "rain", 1),
];

fn correlation_report(d: Dataset<f64>) -> Result<Value> {
    let d = ingest::calendar_ordinals(d)?;
    let m = ingest::correlation_matrix(&d)?;
    let pairs: Vec<Value> = m
        .pairs()
        .into_iter()
        .map(|(a, b, r)| json!({"a": a, "b": b, "r": r}))
        .collect();
    let claims: Vec<Value> = CORRELATION_CLAIMS
        .iter()
        .map(|&(a, b, sign)| {
            let r = m.get(a, b);
            let observed = r.map(|r| {
                if r > 0.0 {
                    1
                } else if r < 0.0 {
                    -1
                } else {
                    0
                }
            });
            json!({"a": a, "b": b, "claimed_sign": sign, "r": r, "observed_sign": observed,
                   "agrees": observed.map(|o| o == sign)})
        })
        .collect();
    Ok(json!({
        "rows": d.len(),
        "pair_count": pairs.len(),
        "pairs": pairs,
        "sign_claims": claims,
        "note": "signs are reported, not asserted; the dataset may be a synthetic stand-in",
    }))
}

fn preprocess(cfg: &Config, a: PreprocessArgs) -> Result<()> {
    let input = cfg.require_path(a.input, "dataset")?;
    let mut d = load_dataset(&input)?;
    let seed = cfg.parsed(a.seed, "seed")?.unwrap_or(0);
    for op in a.ops.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        d = apply_op(d, op, seed).with_context(|| format!("step `{op}`"))?;
    }
    if let Some(p) = &a.provenance {
        fs::write(p, d.provenance_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    if a.correlations {
        let report = correlation_report(d)?;
        return write_output(
            a.output.as_deref(),
            &format!("{}\n", serde_json::to_string_pretty(&report)?),
        );
    }
    write_output(a.output.as_deref(), &d.to_csv())
}

fn stream_cmd(cfg: &Config, a: StreamArgs) -> Result<()> {
    let source_kind = cfg
        .string(a.source, "source")
        .unwrap_or_else(|| "file".to_string());
    let rate = cfg.parsed(a.rate, "rate")?;
    let spec = match source_kind.as_str() {
        "file" => SourceSpec::File {
            path: cfg.require_path(a.input, "dataset")?,
            rate,
        },
        "stdin" => SourceSpec::Stdin,
        s => match s.strip_prefix("tcp:") {
            Some(addr) => SourceSpec::Tcp {
                addr: addr.to_string(),
            },
            None => {
                return Err(usage(format!(
                    "source must be file, stdin or tcp:ADDR, got `{s}`"
                )))
            }
        },
    };
    let batch_size = cfg
        .parsed(a.batch_size, "batch_size")?
        .unwrap_or(stream::DEFAULT_BATCH_SIZE);
    if batch_size == 0 {
        return Err(usage("batch size must be at least 1"));
    }
    let aggregate = cfg
        .string(a.aggregate, "aggregate")
        .map(|s| {
            s.parse::<stream::Aggregate>()
                .map_err(|e| usage(e.to_string()))
        })
        .transpose()?
        .unwrap_or_default();
    let rules_text = match cfg.path(a.rules, "rules") {
        Some(p) => read(&p)?,
        None => String::new(),
    };
    let bands = load_bands(cfg, a.bands)?;
    let engine = AlertEngine::new(&rules_text, bands, aggregate)?;
    let source =
        RecordSource::open(&spec).with_context(|| format!("opening source {source_kind}"))?;
    let config = PipelineConfig {
        batch_size,
        ..PipelineConfig::default()
    };
    let checkpoint = cfg.path(a.checkpoint, "checkpoint");

    match cfg.path(a.sink, "sink") {
        Some(p) => {
            let file = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&p)
                .with_context(|| format!("opening sink {}", p.display()))?;
            let mut w = io::BufWriter::new(file);
            let stats =
                stream::run_pipeline(source, &engine, &config, &mut w, checkpoint.as_deref())?;
            println!("{}", serde_json::to_string(&stats)?);
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            let stats =
                stream::run_pipeline(source, &engine, &config, &mut w, checkpoint.as_deref())?;
            eprintln!("{}", serde_json::to_string(&stats)?);
        }
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    semweb::parse_ntriples(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn query_cmd(cfg: &Config, a: QueryArgs) -> Result<()> {
    let graph_path = cfg.require_path(a.graph, "graph")?;
    let text = match (a.query, a.text) {
        (Some(p), _) => read(&p)?,
        (None, Some(t)) => t,
        (None, None) => return Err(usage("one of --query or --text is required")),
    };
    let g = load_graph(&graph_path)?;
    let base = Iri::new(
        cfg.string(a.base, "base")
            .unwrap_or_else(|| DEFAULT_BASE.to_string()),
    )
    .map_err(|e| usage(e.to_string()))?;
    let mut prefixes = g.prefixes().clone();
    prefixes.entry("ex".to_string()).or_insert(base);
    let q = semweb::parse_query_with_prefixes(&text, &prefixes)?;
    if let Some(n) = a.repeat {
        let t = semweb::time_queries(std::slice::from_ref(&q), &g, n)?;
        let t = &t[0];
        let timing = json!({
            "rows": t.rows,
            "repetitions": n,
            "min_us": t.min.as_secs_f64() * 1e6,
            "median_us": t.median.as_secs_f64() * 1e6,
        });
        eprintln!("{timing}");
    }
    let table = semweb::execute(&q, &g);
    let labels = if a.no_labels { None } else { Some(&g) };
    match a.format {
        TableFormat::Tsv => print!("{}", table.to_tsv(labels)),
        TableFormat::Json => println!("{}", serde_json::to_string_pretty(&table.to_json())?),
    }
    if table.rejected_bindings > 0 {
        eprintln!(
            "{} binding(s) rejected by filter type errors",
            table.rejected_bindings
        );
    }
    Ok(())
}

fn metrics_cmd(a: MetricsArgs) -> Result<()> {
    let summary = match (a.graph, a.counts) {
        (Some(g), _) => metrics::summarize(&load_graph(&g)?),
        (None, Some(c)) => {
            let s: OntologySummary = serde_json::from_str(&read(&c)?)
                .with_context(|| format!("parsing counts {}", c.display()))?;
            s.validate()?;
            s
        }
        (None, None) => return Err(usage("one of --graph or --counts is required")),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&metrics::report(&summary))?
    );
    Ok(())
}

fn parse_atom(text: &str) -> Result<Atom> {
    let fb = rules::parse_facts(text).map_err(|e| usage(format!("--explain: {e}")))?;
    let mut it = fb.iter();
    match (it.next(), it.next()) {
        (Some(a), None) => Ok(a.clone()),
        _ => Err(usage("--explain takes exactly one ground atom")),
    }
}

fn rules_check(cfg: &Config, a: RulesCheckArgs) -> Result<()> {
    let path = cfg.require_path(a.rules, "rules")?;
    let rs =
        rules::parse_rules(&read(&path)?).with_context(|| format!("rules {}", path.display()))?;
    println!("{}: {} rule(s)", path.display(), rs.len());
    let Some(facts_path) = a.facts else {
        for r in &rs.rules {
            println!("{r}");
        }
        return Ok(());
    };
    let facts = rules::parse_facts(&read(&facts_path)?)
        .with_context(|| format!("facts {}", facts_path.display()))?;
    let out = rules::evaluate(&rs, &facts)?;
    for (fact, d) in out.derived() {
        println!("{fact}\t[{}]", d.rule);
    }
    if let Some(e) = a.explain {
        let atom = parse_atom(&e)?;
        print!("{}", rules::explain(&out, &atom)?.render());
    }
    Ok(())
}

fn retrieve(cfg: &Config, a: RetrieveArgs) -> Result<()> {
    if a.k == 0 {
        return Err(usage("k must be at least 1"));
    }
    let emb = embedder(cfg, a.dimension, a.seed)?;
    let idx = load_index(&cfg.require_path(a.corpus, "corpus")?, &emb)?;
    let query = match (a.query, a.alert) {
        (Some(q), _) => q,
        (None, Some(al)) => {
            let (kind, sev) = al
                .split_once(':')
                .ok_or_else(|| usage("--alert takes KIND:severity"))?;
            retrieval::alert_query(kind.trim(), sev.trim())
        }
        (None, None) => return Err(usage("one of --query or --alert is required")),
    };
    for (rank, hit) in idx.search(&emb, &query, a.k)?.iter().enumerate() {
        println!(
            "{}\t{:.6}\t{}\t{}",
            rank + 1,
            hit.score,
            hit.doc.id,
            hit.doc.text
        );
    }
    Ok(())
}

fn eval_cmd(cfg: &Config, a: EvalArgs) -> Result<()> {
    if let Some(cases_path) = a.cases {
        let emb = embedder(cfg, a.dimension, a.seed)?;
        let idx = load_index(&cfg.require_path(a.corpus, "corpus")?, &emb)?;
        let cases = read(&cases_path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str::<EvalCase>(l).with_context(|| format!("case line {}", i + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let report = retrieval::evaluate_cases(&idx, &emb, &cases)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    let (Some(resp), Some(refr)) = (a.response, a.reference) else {
        return Err(usage("eval needs --response and --reference, or --cases"));
    };
    let s = retrieval::prf_scores::<f64>(&read(&resp)?, &read(&refr)?);
    println!(
        "{}",
        json!({"precision": s.precision, "recall": s.recall, "f": s.f_measure})
    );
    Ok(())
}

fn bands_cmd(cfg: &Config, a: BandsArgs) -> Result<()> {
    match a.action {
        BandsAction::Print { bands } => print!("{}", load_bands(cfg, bands)?.to_config_string()),
        BandsAction::Check { bands } => {
            let path = cfg.require_path(bands, "bands")?;
            ClassBands::<f64>::parse(&read(&path)?)
                .with_context(|| format!("bands {}", path.display()))?;
            println!("{}: ok", path.display());
        }
        BandsAction::Classify { bands, record } => {
            let b = load_bands(cfg, bands)?;
            let r = RecordParser::default().parse_line::<f64>(0, &record)?;
            let codes = FwiCodes::from_observed(r.ffmc, r.dmc, r.dc, r.isi)?;
            let class = classify(&codes, &b);
            println!(
                "{}",
                json!({
                    "codes": {"ffmc": codes.ffmc, "dmc": codes.dmc, "dc": codes.dc,
                              "isi": codes.isi, "bui": codes.bui, "fwi": codes.fwi},
                    "classification": class,
                })
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Convert(a) => convert(&cfg, a),
        Command::Preprocess(a) => preprocess(&cfg, a),
        Command::Stream(a) => stream_cmd(&cfg, a),
        Command::Query(a) => query_cmd(&cfg, a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::RulesCheck(a) => rules_check(&cfg, a),
        Command::Retrieve(a) => retrieve(&cfg, a),
        Command::Eval(a) => eval_cmd(&cfg, a),
        Command::Bands(a) => bands_cmd(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
