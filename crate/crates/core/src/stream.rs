//! Micro-batch alerting over a stream of weather records.
//!
//! Records flow source → batcher → evaluator → sink over bounded channels.
//! Each batch yields one alert per classified quantity (from the batch
//! aggregate) plus one `RULE` alert per fact derived by the rule set. After
//! the sink has the batch's alerts, a checkpoint is saved; a crash between the
//! two replays that single batch on resume (at-least-once delivery).
//!
//! Rule-fact encoding, for a record at offset `o`:
//!
//! ```text
//! Record(rec_o)
//! IgnitionExtremelyEasy(rec_o)  DmcDifficultAndExtensive(rec_o)  DcModerate(rec_o)
//! SpreadFast(rec_o)  BuiHigh(rec_o)  FwiVeryHigh(rec_o)
//! TriggerConditionsMet(rec_o)            # when the configured trigger holds
//! hasFFMC(rec_o, 92.3)  hasDMC  hasDC  hasISI  hasBUI  hasFWI
//! hasTemp  hasRH  hasWind  hasRain  hasArea
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::mpsc::{sync_channel, Receiver};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fwi::{classify, ClassBands, DangerClassification, FwiCodes, FwiError, Quantity};
use crate::ingest::{IngestError, RecordParser, WeatherRecord};
use crate::rules::{evaluate, parse_rules, Atom, FactBase, RuleSet, RulesError, Term};

pub const DEFAULT_BATCH_SIZE: usize = 20;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("record at offset {offset}: {source}")]
    Record { offset: u64, source: IngestError },
    #[error("batch {batch}, offset {offset}: {source}")]
    Codes {
        batch: u64,
        offset: u64,
        source: FwiError,
    },
    #[error("batch {batch}: {source}")]
    Rules { batch: u64, source: RulesError },
    #[error("rules: {0}")]
    RuleFile(RulesError),
    #[error("checkpoint {path}: {reason}")]
    BadCheckpoint { path: PathBuf, reason: String },
    #[error("checkpoint {path}: stored batch {stored} is newer than {attempted}")]
    StaleCheckpoint {
        path: PathBuf,
        stored: u64,
        attempted: u64,
    },
    #[error("checkpoint {path}: integrity check failed")]
    CorruptCheckpoint { path: PathBuf },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("injected crash {point:?} at batch {batch}")]
    InjectedCrash { point: CrashPoint, batch: u64 },
}

pub type Result<T, E = StreamError> = std::result::Result<T, E>;

// ---------------------------------------------------------------------------
// Sources

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// Replays a CSV file; `rate` is records per second, `None` for unthrottled.
    File {
        path: PathBuf,
        rate: Option<f64>,
    },
    /// Accepts one TCP connection and reads newline-delimited CSV records.
    Tcp {
        addr: String,
    },
    Stdin,
}

enum Input {
    Reader(Box<dyn BufRead + Send>),
    Listener(TcpListener),
}

/// Yields `(offset, record)` with offsets 0, 1, 2, ...
pub struct RecordSource {
    id: String,
    input: Input,
    parser: Option<RecordParser>,
    next_offset: u64,
    rate: Option<f64>,
    started: Instant,
    line: String,
}

impl fmt::Debug for RecordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecordSource")
            .field("id", &self.id)
            .field("next_offset", &self.next_offset)
            .finish()
    }
}

impl RecordSource {
    pub fn open(spec: &SourceSpec) -> Result<Self> {
        match spec {
            SourceSpec::File { path, rate } => {
                if let Some(r) = rate {
                    if !(r.is_finite() && *r > 0.0) {
                        return Err(StreamError::BadConfig(format!(
                            "rate must be positive, got {r}"
                        )));
                    }
                }
                let file = fs::File::open(path)?;
                let mut s = RecordSource::from_reader(
                    format!("file:{}", path.display()),
                    BufReader::new(file),
                );
                s.rate = *rate;
                Ok(s)
            }
            SourceSpec::Tcp { addr } => {
                let addrs: Vec<_> = addr.to_socket_addrs()?.collect();
                let listener = TcpListener::bind(&addrs[..])?;
                Ok(RecordSource::with_input(
                    format!("tcp:{addr}"),
                    Input::Listener(listener),
                ))
            }
            SourceSpec::Stdin => Ok(RecordSource::from_reader(
                "stdin".to_string(),
                BufReader::new(io::stdin()),
            )),
        }
    }

    pub fn from_reader(id: impl Into<String>, reader: impl BufRead + Send + 'static) -> Self {
        RecordSource::with_input(id.into(), Input::Reader(Box::new(reader)))
    }

    fn with_input(id: String, input: Input) -> Self {
        RecordSource {
            id,
            input,
            parser: None,
            next_offset: 0,
            rate: None,
            started: Instant::now(),
            line: String::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Address a TCP source is listening on.
    pub fn local_addr(&self) -> Option<std::net::SocketAddr> {
        match &self.input {
            Input::Listener(l) => l.local_addr().ok(),
            Input::Reader(_) => None,
        }
    }

    pub fn next_offset(&self) -> u64 {
        self.next_offset
    }

    /// Discards records until the next offset is `offset`.
    pub fn skip_to(&mut self, offset: u64) -> Result<()> {
        while self.next_offset < offset {
            if self.next_record()?.is_none() {
                break;
            }
        }
        Ok(())
    }

    fn reader(&mut self) -> Result<&mut Box<dyn BufRead + Send>> {
        if let Input::Listener(l) = &self.input {
            let (stream, _) = l.accept()?;
            self.input = Input::Reader(Box::new(BufReader::new(stream)));
        }
        match &mut self.input {
            Input::Reader(r) => Ok(r),
            Input::Listener(_) => unreachable!(),
        }
    }

    pub fn next_record(&mut self) -> Result<Option<(u64, WeatherRecord<f64>)>> {
        loop {
            self.line.clear();
            let mut line = std::mem::take(&mut self.line);
            let n = self.reader()?.read_line(&mut line)?;
            self.line = line;
            if n == 0 {
                return Ok(None);
            }
            let text = self.line.trim();
            if text.is_empty() {
                continue;
            }
            if self.parser.is_none() {
                if RecordParser::is_header(text) {
                    let p =
                        RecordParser::from_header(text).map_err(|source| StreamError::Record {
                            offset: self.next_offset,
                            source,
                        })?;
                    self.parser = Some(p);
                    continue;
                }
                self.parser = Some(RecordParser::default());
            }
            let offset = self.next_offset;
            let parser = self.parser.as_ref().expect("set above");
            let rec = parser
                .parse_line::<f64>(offset as usize, text)
                .map_err(|source| StreamError::Record { offset, source })?;
            self.next_offset += 1;
            if let Some(rate) = self.rate {
                let due = self.started + Duration::from_secs_f64(offset as f64 / rate);
                let now = Instant::now();
                if due > now {
                    std::thread::sleep(due - now);
                }
            }
            return Ok(Some((offset, rec)));
        }
    }
}

impl Iterator for RecordSource {
    type Item = Result<(u64, WeatherRecord<f64>)>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

// ---------------------------------------------------------------------------
// Batches

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub seq: u64,
    pub first_offset: u64,
    pub records: Vec<WeatherRecord<f64>>,
    /// Set on a short final batch cut at end of stream.
    pub flush: bool,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_offset(&self) -> u64 {
        self.first_offset + self.records.len() as u64 - 1
    }

    pub fn offsets(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.records.len() as u64).map(move |i| self.first_offset + i)
    }
}

/// Cuts a record stream into contiguous count-based batches.
pub struct Batcher<I> {
    source: I,
    size: usize,
    next_seq: u64,
    done: bool,
}

pub fn cut_batches<I>(source: I, size: usize, first_seq: u64) -> Result<Batcher<I>>
where
    I: Iterator<Item = Result<(u64, WeatherRecord<f64>)>>,
{
    if size == 0 {
        return Err(StreamError::BadConfig(
            "batch size must be at least 1".into(),
        ));
    }
    Ok(Batcher {
        source,
        size,
        next_seq: first_seq,
        done: false,
    })
}

impl<I> Iterator for Batcher<I>
where
    I: Iterator<Item = Result<(u64, WeatherRecord<f64>)>>,
{
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Result<Batch>> {
        if self.done {
            return None;
        }
        let mut records = Vec::with_capacity(self.size);
        let mut first_offset = None;
        while records.len() < self.size {
            match self.source.next() {
                Some(Ok((offset, rec))) => {
                    first_offset.get_or_insert(offset);
                    records.push(rec);
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                None => {
                    self.done = true;
                    break;
                }
            }
        }
        let first_offset = first_offset?;
        let flush = records.len() < self.size;
        let seq = self.next_seq;
        self.next_seq += 1;
        Some(Ok(Batch {
            seq,
            first_offset,
            records,
            flush,
        }))
    }
}

// ---------------------------------------------------------------------------
// Alerts

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum AlertKind {
    DC_MOPUP,
    FFMC_IGNITION,
    ISI_SPREAD,
    DMC,
    BUI,
    FWI,
    RULE,
}

impl AlertKind {
    /// Aggregate alerts in emission order, with the quantity each classifies.
    pub const QUANTITY_ALERTS: [(AlertKind, Quantity); 6] = [
        (AlertKind::DC_MOPUP, Quantity::Dc),
        (AlertKind::FFMC_IGNITION, Quantity::Ffmc),
        (AlertKind::ISI_SPREAD, Quantity::Isi),
        (AlertKind::DMC, Quantity::Dmc),
        (AlertKind::BUI, Quantity::Bui),
        (AlertKind::FWI, Quantity::Fwi),
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlertKind::DC_MOPUP => "DC_MOPUP",
            AlertKind::FFMC_IGNITION => "FFMC_IGNITION",
            AlertKind::ISI_SPREAD => "ISI_SPREAD",
            AlertKind::DMC => "DMC",
            AlertKind::BUI => "BUI",
            AlertKind::FWI => "FWI",
            AlertKind::RULE => "RULE",
        }
    }
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertEvent {
    pub batch: u64,
    pub kind: AlertKind,
    pub severity: String,
    pub value: Option<f64>,
    pub offsets: Vec<u64>,
    pub rule: Option<String>,
    /// Informational only; excluded from determinism checks.
    pub ts_ms: u64,
}

impl AlertEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("alert serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Max,
    Mean,
}

impl Aggregate {
    pub fn name(self) -> &'static str {
        match self {
            Aggregate::Max => "max",
            Aggregate::Mean => "mean",
        }
    }
}

impl FromStr for Aggregate {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(Aggregate::Max),
            "mean" => Ok(Aggregate::Mean),
            other => Err(StreamError::BadConfig(format!(
                "aggregate must be max or mean, got `{other}`"
            ))),
        }
    }
}

pub fn record_individual(offset: u64) -> String {
    format!("rec_{offset}")
}

fn offset_of_individual(name: &str) -> Option<u64> {
    name.strip_prefix("rec_")?.parse().ok()
}

/// `difficult and extensive` → `DifficultAndExtensive`.
pub fn camel_label(label: &str) -> String {
    label
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut cs = w.chars();
            let head = cs.next().expect("non-empty").to_ascii_uppercase();
            std::iter::once(head).chain(cs).collect::<String>()
        })
        .collect()
}

fn label_prefix(q: Quantity) -> &'static str {
    match q {
        Quantity::Ffmc => "Ignition",
        Quantity::Dmc => "Dmc",
        Quantity::Dc => "Dc",
        Quantity::Isi => "Spread",
        Quantity::Bui => "Bui",
        Quantity::Fwi => "Fwi",
    }
}

fn code_predicate(q: Quantity) -> &'static str {
    match q {
        Quantity::Ffmc => "hasFFMC",
        Quantity::Dmc => "hasDMC",
        Quantity::Dc => "hasDC",
        Quantity::Isi => "hasISI",
        Quantity::Bui => "hasBUI",
        Quantity::Fwi => "hasFWI",
    }
}

/// Facts describing one record; see the module docs.
pub fn record_facts(
    offset: u64,
    rec: &WeatherRecord<f64>,
    codes: &FwiCodes<f64>,
    class: &DangerClassification,
) -> Vec<Atom> {
    let me = Term::ind(record_individual(offset));
    let mut out = vec![Atom::unary("Record", me.clone())];
    for q in Quantity::ALL {
        out.push(Atom::unary(
            format!("{}{}", label_prefix(q), camel_label(class.label(q))),
            me.clone(),
        ));
    }
    if class.fire_trigger {
        out.push(Atom::unary("TriggerConditionsMet", me.clone()));
    }
    for q in Quantity::ALL {
        out.push(Atom::binary(
            code_predicate(q),
            me.clone(),
            Term::num(codes.get(q)),
        ));
    }
    for (p, v) in [
        ("hasTemp", rec.temp),
        ("hasRH", rec.rh),
        ("hasWind", rec.wind),
        ("hasRain", rec.rain),
        ("hasArea", rec.area),
    ] {
        out.push(Atom::binary(p, me.clone(), Term::num(v)));
    }
    out
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Aggregate alerts followed by rule alerts for one batch.
pub fn batch_evaluate(
    batch: &Batch,
    bands: &ClassBands<f64>,
    rules: &RuleSet,
    aggregate: Aggregate,
) -> Result<Vec<AlertEvent>> {
    if batch.is_empty() {
        return Err(StreamError::BadConfig(format!(
            "batch {} is empty",
            batch.seq
        )));
    }
    let ts_ms = now_ms();
    let mut codes = Vec::with_capacity(batch.len());
    for (offset, r) in batch.offsets().zip(&batch.records) {
        let c = FwiCodes::from_observed(r.ffmc, r.dmc, r.dc, r.isi).map_err(|source| {
            StreamError::Codes {
                batch: batch.seq,
                offset,
                source,
            }
        })?;
        codes.push(c);
    }

    let mut alerts = Vec::new();
    for (kind, q) in AlertKind::QUANTITY_ALERTS {
        let values: Vec<f64> = codes.iter().map(|c| c.get(q)).collect();
        let (value, offsets) = match aggregate {
            Aggregate::Max => {
                let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let offs = batch
                    .offsets()
                    .zip(&values)
                    .filter(|(_, v)| **v == m)
                    .map(|(o, _)| o)
                    .collect();
                (m, offs)
            }
            Aggregate::Mean => (
                values.iter().sum::<f64>() / values.len() as f64,
                batch.offsets().collect(),
            ),
        };
        alerts.push(AlertEvent {
            batch: batch.seq,
            kind,
            severity: bands.get(q).label_of(value).to_string(),
            value: Some(value),
            offsets,
            rule: None,
            ts_ms,
        });
    }

    if rules.is_empty() {
        return Ok(alerts);
    }
    let mut fb = FactBase::new();
    for ((offset, r), c) in batch.offsets().zip(&batch.records).zip(&codes) {
        let class = classify(c, bands);
        for f in record_facts(offset, r, c, &class) {
            fb.assert(f).expect("record facts are ground");
        }
    }
    let saturated = evaluate(rules, &fb).map_err(|source| StreamError::Rules {
        batch: batch.seq,
        source,
    })?;
    for (fact, d) in saturated.derived() {
        let offsets = fact
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Ind(s) => offset_of_individual(s),
                _ => None,
            })
            .collect();
        alerts.push(AlertEvent {
            batch: batch.seq,
            kind: AlertKind::RULE,
            severity: fact.predicate.clone(),
            value: None,
            offsets,
            rule: Some(d.rule.clone()),
            ts_ms,
        });
    }
    Ok(alerts)
}

// ---------------------------------------------------------------------------
// Checkpoints

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub source_id: String,
    /// Last fully processed batch.
    pub batch_seq: u64,
    /// Offset of the first record not yet processed.
    pub offset: u64,
    pub fingerprint: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads a checkpoint, verifying its integrity line.
pub fn checkpoint_load(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path)?;
    let corrupt = || StreamError::CorruptCheckpoint {
        path: path.to_path_buf(),
    };
    let mut lines = text.lines();
    let (body, hash) = (
        lines.next().ok_or_else(corrupt)?,
        lines.next().ok_or_else(corrupt)?,
    );
    if lines.next().is_some() || sha256_hex(body.as_bytes()) != hash.trim() {
        return Err(corrupt());
    }
    serde_json::from_str(body).map_err(|_| corrupt())
}

/// Atomically replaces the checkpoint at `path`; refuses to move backwards.
pub fn checkpoint_save(path: &Path, cp: &Checkpoint) -> Result<()> {
    if path.exists() {
        let stored = checkpoint_load(path)?;
        if stored.batch_seq > cp.batch_seq {
            return Err(StreamError::StaleCheckpoint {
                path: path.to_path_buf(),
                stored: stored.batch_seq,
                attempted: cp.batch_seq,
            });
        }
    }
    let body = serde_json::to_string(cp).expect("checkpoint serializes");
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        writeln!(f, "{body}")?;
        writeln!(f, "{}", sha256_hex(body.as_bytes()))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Pipeline

/// Rules, bands and aggregate, bundled with the text they were built from so
/// checkpoints can detect configuration drift.
#[derive(Debug, Clone)]
pub struct AlertEngine {
    pub bands: ClassBands<f64>,
    pub rules: RuleSet,
    pub aggregate: Aggregate,
    rules_text: String,
}

impl AlertEngine {
    pub fn new(rules_text: &str, bands: ClassBands<f64>, aggregate: Aggregate) -> Result<Self> {
        let rules = parse_rules(rules_text).map_err(StreamError::RuleFile)?;
        Ok(AlertEngine {
            bands,
            rules,
            aggregate,
            rules_text: rules_text.to_string(),
        })
    }

    pub fn evaluate(&self, batch: &Batch) -> Result<Vec<AlertEvent>> {
        batch_evaluate(batch, &self.bands, &self.rules, self.aggregate)
    }

    /// Content hash of everything that shapes alert output.
    pub fn fingerprint(&self, batch_size: usize) -> String {
        let mut h = Sha256::new();
        for part in [
            self.rules_text.as_str(),
            &self.bands.to_config_string(),
            &batch_size.to_string(),
            self.aggregate.name(),
        ] {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    AfterEvaluate,
    AfterSinkWrite,
    AfterCheckpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub batch_size: usize,
    /// Capacity of each inter-stage queue.
    pub queue_capacity: usize,
    /// Test hook: fail at this point while handling this batch.
    pub crash: Option<(CrashPoint, u64)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            batch_size: DEFAULT_BATCH_SIZE,
            queue_capacity: 4,
            crash: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PipelineStats {
    pub records_in: u64,
    pub batches_out: u64,
    pub alerts_by_kind: BTreeMap<String, u64>,
    pub duration_ms: u64,
}

/// Runs the pipeline to end of stream. With a checkpoint path, resumes after
/// the last checkpointed batch and saves a checkpoint after every batch.
pub fn run_pipeline(
    mut source: RecordSource,
    engine: &AlertEngine,
    config: &PipelineConfig,
    sink: &mut dyn Write,
    checkpoint: Option<&Path>,
) -> Result<PipelineStats> {
    let started = Instant::now();
    if config.queue_capacity == 0 {
        return Err(StreamError::BadConfig(
            "queue capacity must be at least 1".into(),
        ));
    }
    let fingerprint = engine.fingerprint(config.batch_size);
    let mut first_seq = 0;
    if let Some(path) = checkpoint.filter(|p| p.exists()) {
        let cp = checkpoint_load(path)?;
        let bad = |reason: String| StreamError::BadCheckpoint {
            path: path.to_path_buf(),
            reason,
        };
        if cp.fingerprint != fingerprint {
            return Err(bad(
                "rules or configuration changed since it was written".into()
            ));
        }
        if cp.source_id != source.id() {
            return Err(bad(format!(
                "written for source `{}`, not `{}`",
                cp.source_id,
                source.id()
            )));
        }
        source.skip_to(cp.offset)?;
        first_seq = cp.batch_seq + 1;
    }
    let source_id = source.id().to_string();
    let batches = cut_batches(source, config.batch_size, first_seq)?;

    let mut stats = PipelineStats::default();
    let crash = |point: CrashPoint, batch: u64| -> Result<()> {
        match config.crash {
            Some((p, b)) if p == point && b == batch => {
                Err(StreamError::InjectedCrash { point, batch })
            }
            _ => Ok(()),
        }
    };

    std::thread::scope(|scope| -> Result<()> {
        let (batch_tx, batch_rx) = sync_channel::<Result<Batch>>(config.queue_capacity);
        let (eval_tx, eval_rx) =
            sync_channel::<Result<(Batch, Vec<AlertEvent>)>>(config.queue_capacity);
        scope.spawn(move || {
            for b in batches {
                if batch_tx.send(b).is_err() {
                    break;
                }
            }
        });
        scope.spawn(move || {
            for b in batch_rx {
                let out = b.and_then(|b| engine.evaluate(&b).map(|alerts| (b, alerts)));
                let failed = out.is_err();
                if eval_tx.send(out).is_err() || failed {
                    break;
                }
            }
        });
        drain(
            eval_rx,
            sink,
            checkpoint,
            &source_id,
            &fingerprint,
            &mut stats,
            crash,
        )
    })?;

    stats.duration_ms = started.elapsed().as_millis() as u64;
    Ok(stats)
}

fn drain(
    rx: Receiver<Result<(Batch, Vec<AlertEvent>)>>,
    sink: &mut dyn Write,
    checkpoint: Option<&Path>,
    source_id: &str,
    fingerprint: &str,
    stats: &mut PipelineStats,
    crash: impl Fn(CrashPoint, u64) -> Result<()>,
) -> Result<()> {
    for item in rx {
        let (batch, alerts) = item?;
        crash(CrashPoint::AfterEvaluate, batch.seq)?;
        for a in &alerts {
            writeln!(sink, "{}", a.to_json_line())?;
            *stats
                .alerts_by_kind
                .entry(a.kind.name().to_string())
                .or_default() += 1;
        }
        sink.flush()?;
        stats.records_in += batch.len() as u64;
        stats.batches_out += 1;
        crash(CrashPoint::AfterSinkWrite, batch.seq)?;
        if let Some(path) = checkpoint {
            let cp = Checkpoint {
                source_id: source_id.to_string(),
                batch_seq: batch.seq,
                offset: batch.last_offset() + 1,
                fingerprint: fingerprint.to_string(),
            };
            checkpoint_save(path, &cp)?;
        }
        crash(CrashPoint::AfterCheckpoint, batch.seq)?;
    }
    Ok(())
}
