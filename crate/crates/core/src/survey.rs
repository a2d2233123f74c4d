//! Vanishing surveys over conductor ranges.
//!
//! A survey walks every admissible conductor m ≤ X for a fixed curve E and
//! order k, decides vanishing for each conjugacy class of primitive order-k
//! characters, and appends one CSV row per computed conjugate.  The run is
//! resumable: after every conductor a small checkpoint file is rewritten
//! atomically, and restarting with the same configuration truncates the CSV
//! back to the last completed conductor and continues.  The final CSV is
//! byte-identical no matter how many workers ran or where the run was
//! interrupted, because conductors are always flushed in ascending order and
//! every row is rendered with fixed formatting.
//!
//! One percent of all records are re-derived at the alternative split point
//! A = 1.3 as a continuous self-test: the approximate functional equation is
//! exact before truncation, so the two evaluations must agree to 10·eps.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::catalogue::resolve_curve;
use crate::curve::{CoefficientTable, CurveData};
use crate::cyclotomic::EmbeddingMatrix;
use crate::dirichlet::{
    admissible_conductors, conjugacy_classes, validate_order, ConductorFactorization,
};
use crate::error::Error;
use crate::Result;
use crate::lvalue::{class_l_values, table_length_for, twist_record, AfeParams};
use crate::primes::gcd;
use crate::rmt::{heuristic_sum, RmtModel};

/// Alternative split point used by the one-percent self-test.
const SELF_TEST_SPLIT: f64 = 1.3;

/// Every SELF_TEST_STRIDE-th record (by a fixed hash of conductor index and
/// class id) is recomputed at the alternative split point.
const SELF_TEST_STRIDE: u64 = 100;

/// Conductors dispatched to the worker pool per batch.  Any value gives the
/// same output; this only balances latency against scheduling overhead.
const DISPATCH_BATCH: usize = 32;

const CSV_HEADER: &str = "k,m,class_id,char_spec,t,re_L,im_L,n_coords,residual,vanishing\n";
const CHECKPOINT_MAGIC: &str = "elltwist survey checkpoint v1";

/// Full description of a survey run.  The curve label, order, bound, eps and
/// the three enumeration flags identify the run; a checkpoint written under
/// one identity refuses to resume under another.  Worker count and the
/// per-invocation conductor budget may change freely between resumes.
#[derive(Debug, Clone)]
pub struct SurveyConfig {
    /// Catalogue label of the curve, e.g. "11a1".
    pub curve: String,
    /// Character order; odd prime.
    pub k: u64,
    /// Conductor bound X.
    pub x_max: u64,
    /// AFE tail bound for each twist evaluation.
    pub eps: f64,
    /// Treat the bound as m ≤ X (true) or m < X (false).  Reported in the
    /// summary header so counts are comparable across conventions.
    pub inclusive_bound: bool,
    /// Include conductors divisible by k² (the non-squarefree admissible
    /// family).  Reported in the summary header.
    pub include_k_squared: bool,
    /// Skip conductors sharing a prime with the curve conductor (default).
    /// When false such conductors are still enumerated and each of their
    /// classes is written as an error record, never silently dropped.
    pub skip_non_coprime: bool,
    /// CSV output path.
    pub output: PathBuf,
    /// Checkpoint path; rewritten atomically after every conductor.
    pub checkpoint: PathBuf,
    /// Worker threads; 0 uses the global default pool.
    pub jobs: usize,
    /// Stop cleanly after this many conductors in this invocation; the
    /// checkpoint then resumes later.  Doubles as the interruption hook for
    /// resume tests.
    pub max_conductors: Option<u64>,
    /// Optional external curve catalogue consulted before the builtin one.
    pub catalogue: Option<PathBuf>,
}

impl SurveyConfig {
    pub fn new(
        curve: &str,
        k: u64,
        x_max: u64,
        output: impl Into<PathBuf>,
        checkpoint: impl Into<PathBuf>,
    ) -> Result<SurveyConfig> {
        let config = SurveyConfig {
            curve: curve.to_string(),
            k,
            x_max,
            eps: AfeParams::default().eps,
            inclusive_bound: true,
            include_k_squared: true,
            skip_non_coprime: true,
            output: output.into(),
            checkpoint: checkpoint.into(),
            jobs: 0,
            max_conductors: None,
            catalogue: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        validate_order(self.k)?;
        if self.x_max < 3 {
            return Err(Error::Config(format!(
                "conductor bound must be at least 3, got {}",
                self.x_max
            )));
        }
        if !(self.eps > 0.0 && self.eps <= 1e-6) {
            return Err(Error::Config(format!(
                "eps must lie in (0, 1e-6], got {:e}",
                self.eps
            )));
        }
        if self.output == self.checkpoint {
            return Err(Error::Config(
                "output and checkpoint must be distinct paths".to_string(),
            ));
        }
        Ok(())
    }

    /// The identity lines shared by checkpoints and summary headers.
    fn identity_lines(&self) -> Vec<(String, String)> {
        vec![
            ("curve".to_string(), self.curve.clone()),
            ("k".to_string(), self.k.to_string()),
            ("x_max".to_string(), self.x_max.to_string()),
            ("eps".to_string(), format!("{:e}", self.eps)),
            (
                "inclusive_bound".to_string(),
                self.inclusive_bound.to_string(),
            ),
            (
                "include_k_squared".to_string(),
                self.include_k_squared.to_string(),
            ),
            (
                "skip_non_coprime".to_string(),
                self.skip_non_coprime.to_string(),
            ),
        ]
    }
}

/// Per-dyadic-window tallies; the window of conductor m is ⌊log₂ m⌋.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WindowCounts {
    /// Classes with a certified verdict in this window.
    pub examined: u64,
    /// Of those, classes whose n_E(χ) rounded to zero.
    pub vanishing: u64,
}

/// Running totals of a survey.  `classes_examined` counts classes with a
/// certified verdict; classes that failed certification are counted in
/// `error_records` instead and appear in the CSV as `error` rows, so the
/// window totals always sum to `classes_examined`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveySummary {
    pub curve: String,
    pub k: u64,
    pub x_max: u64,
    pub inclusive_bound: bool,
    pub include_k_squared: bool,
    pub skip_non_coprime: bool,
    pub conductors_done: u64,
    /// Largest conductor flushed so far; 0 before the first one.
    pub last_conductor: u64,
    pub classes_examined: u64,
    pub vanishing_classes: u64,
    pub error_records: u64,
    /// Largest rounding residual among certified verdicts.
    pub max_residual: f64,
    pub windows: BTreeMap<u32, WindowCounts>,
    /// False when the run stopped at `max_conductors` before exhausting the
    /// conductor list.
    pub complete: bool,
}

impl SurveySummary {
    fn fresh(config: &SurveyConfig) -> SurveySummary {
        SurveySummary {
            curve: config.curve.clone(),
            k: config.k,
            x_max: config.x_max,
            inclusive_bound: config.inclusive_bound,
            include_k_squared: config.include_k_squared,
            skip_non_coprime: config.skip_non_coprime,
            conductors_done: 0,
            last_conductor: 0,
            classes_examined: 0,
            vanishing_classes: 0,
            error_records: 0,
            max_residual: 0.0,
            windows: BTreeMap::new(),
            complete: false,
        }
    }

    /// Each vanishing class accounts for all k−1 characters above it.
    pub fn vanishing_characters(&self) -> u64 {
        (self.k - 1) * self.vanishing_classes
    }

    /// The arithmetic the summary promises: window totals sum to the class
    /// total, and no window vanishes more often than it is examined.
    pub fn invariants_hold(&self) -> bool {
        let examined: u64 = self.windows.values().map(|w| w.examined).sum();
        let vanishing: u64 = self.windows.values().map(|w| w.vanishing).sum();
        examined == self.classes_examined
            && vanishing == self.vanishing_classes
            && self.windows.values().all(|w| w.vanishing <= w.examined)
    }

    /// Human-readable block reporting the run identity (including the bound
    /// and k² conventions) followed by totals and per-window counts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "survey curve={} order={} bound={} ({}) k_squared={} coprime_filter={}\n",
            self.curve,
            self.k,
            self.x_max,
            if self.inclusive_bound {
                "inclusive"
            } else {
                "exclusive"
            },
            if self.include_k_squared {
                "included"
            } else {
                "excluded"
            },
            if self.skip_non_coprime { "on" } else { "off" },
        ));
        out.push_str(&format!(
            "conductors={} classes={} vanishing_classes={} vanishing_characters={} \
             errors={} max_residual={:.3e} complete={}\n",
            self.conductors_done,
            self.classes_examined,
            self.vanishing_classes,
            self.vanishing_characters(),
            self.error_records,
            self.max_residual,
            self.complete,
        ));
        for (exp, counts) in &self.windows {
            out.push_str(&format!(
                "window 2^{}..2^{}: examined={} vanishing={}\n",
                exp,
                exp + 1,
                counts.examined,
                counts.vanishing
            ));
        }
        out
    }
}

/// All classes of one conductor, rendered and tallied by a worker.  Flushing
/// these in conductor order is what makes the output deterministic.
struct ConductorOutcome {
    m: u64,
    window: u32,
    rows: String,
    examined: u64,
    vanishing: u64,
    errors: u64,
    max_residual: f64,
}

fn csv_error_row(k: u64, m: u64, class_id: u64, spec: &str) -> String {
    format!("{k},{m},{class_id},\"{spec}\",0,,,,,error\n")
}

fn process_conductor(
    curve: &CurveData,
    conductor: &ConductorFactorization,
    conductor_index: usize,
    table: &CoefficientTable,
    embedding: &EmbeddingMatrix,
    params: &AfeParams,
) -> Result<ConductorOutcome> {
    let k = embedding.k;
    let m = conductor.m;
    let mut outcome = ConductorOutcome {
        m,
        window: 63 - m.leading_zeros(),
        rows: String::new(),
        examined: 0,
        vanishing: 0,
        errors: 0,
        max_residual: 0.0,
    };
    for class in conjugacy_classes(k, conductor)? {
        let spec_string = class.representative.spec_string();
        let record = match twist_record(curve, &class, table, embedding, params) {
            Ok(record) => record,
            Err(
                Error::InsufficientPrecision(_)
                | Error::RotationInconsistency { .. }
                | Error::NotCoprime { .. },
            ) => {
                outcome.rows.push_str(&csv_error_row(k, m, class.class_id, &spec_string));
                outcome.errors += 1;
                continue;
            }
            Err(other) => return Err(other),
        };
        // Continuous self-test on a fixed 1% sample: re-derive the values at
        // the alternative split point; the AFE is exact before truncation so
        // a discrepancy beyond the two tail bounds means the record cannot
        // be trusted.
        let sampled = (conductor_index as u64 * 31 + class.class_id) % SELF_TEST_STRIDE == 0;
        if sampled {
            let alt = AfeParams {
                eps: record.eps_used,
                a_split: SELF_TEST_SPLIT,
            };
            let check = class_l_values(curve, &class.representative, table, &alt)?;
            let moved = record
                .l_values
                .iter()
                .zip(&check)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            if moved > 10.0 * record.eps_used {
                outcome.rows.push_str(&csv_error_row(k, m, class.class_id, &spec_string));
                outcome.errors += 1;
                continue;
            }
        }
        let coords = record
            .element
            .coords
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        for (i, value) in record.l_values.iter().enumerate() {
            outcome.rows.push_str(&format!(
                "{k},{m},{class_id},\"{spec}\",{t},{re:.12e},{im:.12e},{coords},{residual:.6e},{vanishing}\n",
                class_id = class.class_id,
                spec = spec_string,
                t = i + 1,
                re = value.re,
                im = value.im,
                residual = record.residual,
                vanishing = record.vanishing,
            ));
        }
        outcome.examined += 1;
        if record.vanishing {
            outcome.vanishing += 1;
        }
        outcome.max_residual = outcome.max_residual.max(record.residual);
    }
    Ok(outcome)
}

/// Conductors the survey will visit, after all configured filters.
pub fn survey_conductors(config: &SurveyConfig) -> Result<Vec<ConductorFactorization>> {
    let curve = resolve_curve(&config.curve, config.catalogue.as_deref())?;
    let all = admissible_conductors(config.k, config.x_max)?;
    Ok(all
        .into_iter()
        .filter(|c| config.inclusive_bound || c.m < config.x_max)
        .filter(|c| {
            config.include_k_squared || !c.factors.iter().any(|&(p, e)| p == config.k && e == 2)
        })
        .filter(|c| !config.skip_non_coprime || gcd(c.m, curve.conductor) == 1)
        .collect())
}

struct ResumeState {
    conductors_done: usize,
    csv_bytes: u64,
    summary: SurveySummary,
}

fn checkpoint_text(config: &SurveyConfig, summary: &SurveySummary, csv_bytes: u64) -> String {
    let mut out = String::from(CHECKPOINT_MAGIC);
    out.push('\n');
    for (key, value) in config.identity_lines() {
        out.push_str(&format!("{key}={value}\n"));
    }
    out.push_str(&format!("conductors_done={}\n", summary.conductors_done));
    out.push_str(&format!("last_conductor={}\n", summary.last_conductor));
    out.push_str(&format!("csv_bytes={csv_bytes}\n"));
    out.push_str(&format!("classes_examined={}\n", summary.classes_examined));
    out.push_str(&format!("vanishing_classes={}\n", summary.vanishing_classes));
    out.push_str(&format!("error_records={}\n", summary.error_records));
    out.push_str(&format!("max_residual={:e}\n", summary.max_residual));
    for (exp, counts) in &summary.windows {
        out.push_str(&format!(
            "window={} {} {}\n",
            exp, counts.examined, counts.vanishing
        ));
    }
    out
}

fn write_checkpoint(config: &SurveyConfig, summary: &SurveySummary, csv_bytes: u64) -> Result<()> {
    let text = checkpoint_text(config, summary, csv_bytes);
    let mut tmp = config.checkpoint.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)?;
    fs::rename(&tmp, &config.checkpoint)?;
    Ok(())
}

fn parse_checkpoint(config: &SurveyConfig, text: &str) -> Result<ResumeState> {
    let corrupt = |why: &str| Error::Checkpoint(format!("{}: {why}", config.checkpoint.display()));
    let mut lines = text.lines();
    if lines.next() != Some(CHECKPOINT_MAGIC) {
        return Err(corrupt("unrecognized header"));
    }
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    let mut windows = BTreeMap::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| corrupt("malformed line"))?;
        if key == "window" {
            let mut parts = value.split(' ');
            let exp: u32 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt("bad window line"))?;
            let examined: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt("bad window line"))?;
            let vanishing: u64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| corrupt("bad window line"))?;
            windows.insert(
                exp,
                WindowCounts {
                    examined,
                    vanishing,
                },
            );
        } else {
            fields.insert(key.to_string(), value.to_string());
        }
    }
    for (key, expected) in config.identity_lines() {
        match fields.get(&key) {
            Some(found) if *found == expected => {}
            Some(found) => {
                return Err(Error::Checkpoint(format!(
                    "checkpoint belongs to a different survey: {key}={found}, requested {expected}"
                )))
            }
            None => return Err(corrupt("missing identity field")),
        }
    }
    let get = |key: &str| {
        fields
            .get(key)
            .ok_or_else(|| corrupt(&format!("missing field {key}")))
    };
    let mut summary = SurveySummary::fresh(config);
    summary.conductors_done = get("conductors_done")?
        .parse()
        .map_err(|_| corrupt("bad conductors_done"))?;
    summary.last_conductor = get("last_conductor")?
        .parse()
        .map_err(|_| corrupt("bad last_conductor"))?;
    summary.classes_examined = get("classes_examined")?
        .parse()
        .map_err(|_| corrupt("bad classes_examined"))?;
    summary.vanishing_classes = get("vanishing_classes")?
        .parse()
        .map_err(|_| corrupt("bad vanishing_classes"))?;
    summary.error_records = get("error_records")?
        .parse()
        .map_err(|_| corrupt("bad error_records"))?;
    summary.max_residual = get("max_residual")?
        .parse()
        .map_err(|_| corrupt("bad max_residual"))?;
    summary.windows = windows;
    let csv_bytes: u64 = get("csv_bytes")?
        .parse()
        .map_err(|_| corrupt("bad csv_bytes"))?;
    Ok(ResumeState {
        conductors_done: summary.conductors_done as usize,
        csv_bytes,
        summary,
    })
}

/// Open the CSV for appending, either fresh (write the header) or resumed
/// (truncate back to the last completed conductor).
fn open_output(config: &SurveyConfig, resume: Option<&ResumeState>) -> Result<(File, u64)> {
    match resume {
        None => {
            let mut file = File::create(&config.output)?;
            file.write_all(CSV_HEADER.as_bytes())?;
            file.flush()?;
            Ok((file, CSV_HEADER.len() as u64))
        }
        Some(state) => {
            let file = OpenOptions::new()
                .read(true)
                .write(true)
                .open(&config.output)
                .map_err(|e| {
                    Error::Checkpoint(format!(
                        "checkpoint exists but output {} cannot be opened: {e}",
                        config.output.display()
                    ))
                })?;
            let len = file.metadata()?.len();
            if len < state.csv_bytes {
                return Err(Error::Checkpoint(format!(
                    "output {} holds {len} bytes, checkpoint expects at least {}",
                    config.output.display(),
                    state.csv_bytes
                )));
            }
            file.set_len(state.csv_bytes)?;
            let mut file = file;
            file.seek(SeekFrom::End(0))?;
            Ok((file, state.csv_bytes))
        }
    }
}

/// Run (or resume) a survey.  Records flow to the configured CSV; the
/// returned summary mirrors the checkpoint.  Certification failures become
/// `error` rows and are tallied, never dropped; hard failures (I/O, missing
/// coefficients) abort the run, which can then be resumed.
pub fn run_survey(config: &SurveyConfig) -> Result<SurveySummary> {
    config.validate()?;
    let curve = resolve_curve(&config.curve, config.catalogue.as_deref())?;
    let conductors = survey_conductors(config)?;
    let embedding = EmbeddingMatrix::new(config.k)?;
    let params = AfeParams::new(config.eps, 1.0)?;
    // One table serves every conductor, every retry (eps/100) and the
    // self-test split, so workers share it read-only.
    let table_len = table_length_for(
        config.x_max.max(1),
        curve.conductor,
        config.eps / 100.0,
        SELF_TEST_SPLIT,
    );
    let table = curve.coefficients(table_len)?;

    let resume = match fs::read_to_string(&config.checkpoint) {
        Ok(text) => Some(parse_checkpoint(config, &text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(state) = &resume {
        if state.conductors_done > conductors.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint claims {} conductors but only {} are admissible",
                state.conductors_done,
                conductors.len()
            )));
        }
    }
    let (file, mut csv_bytes) = open_output(config, resume.as_ref())?;
    let mut summary = resume
        .map(|state| state.summary)
        .unwrap_or_else(|| SurveySummary::fresh(config));
    let mut writer = BufWriter::new(file);

    let mut run = |summary: &mut SurveySummary, csv_bytes: &mut u64| -> Result<bool> {
        let mut index = summary.conductors_done as usize;
        let mut budget = config.max_conductors;
        while index < conductors.len() {
            let mut batch = DISPATCH_BATCH.min(conductors.len() - index);
            if let Some(left) = budget {
                if left == 0 {
                    return Ok(false);
                }
                batch = batch.min(left as usize);
            }
            let outcomes: Vec<ConductorOutcome> = conductors[index..index + batch]
                .par_iter()
                .enumerate()
                .map(|(offset, conductor)| {
                    process_conductor(
                        &curve,
                        conductor,
                        index + offset,
                        &table,
                        &embedding,
                        &params,
                    )
                })
                .collect::<Result<_>>()?;
            for outcome in outcomes {
                writer.write_all(outcome.rows.as_bytes())?;
                writer.flush()?;
                *csv_bytes += outcome.rows.len() as u64;
                summary.conductors_done += 1;
                summary.last_conductor = outcome.m;
                summary.classes_examined += outcome.examined;
                summary.vanishing_classes += outcome.vanishing;
                summary.error_records += outcome.errors;
                summary.max_residual = summary.max_residual.max(outcome.max_residual);
                let window = summary.windows.entry(outcome.window).or_default();
                window.examined += outcome.examined;
                window.vanishing += outcome.vanishing;
                write_checkpoint(config, summary, *csv_bytes)?;
            }
            index += batch;
            budget = budget.map(|left| left - batch as u64);
        }
        Ok(true)
    };
    let finished = if config.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| run(&mut summary, &mut csv_bytes))?
    } else {
        run(&mut summary, &mut csv_bytes)?
    };
    summary.complete = finished && summary.conductors_done as usize == conductors.len();
    write_checkpoint(config, &summary, csv_bytes)?;
    debug_assert!(summary.invariants_hold());
    Ok(summary)
}

/// Verdict column of one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowVerdict {
    NonVanishing,
    Vanishing,
    /// The class could not be certified (precision, rotation, or a
    /// non-coprime conductor surveyed with the filter off).
    Error,
}

/// One parsed CSV row; error rows carry no numeric payload.
#[derive(Debug, Clone)]
pub struct SurveyRow {
    pub k: u64,
    pub m: u64,
    pub class_id: u64,
    pub char_spec: String,
    /// Conjugate index t ≥ 1; 0 on error rows.
    pub conjugate: u64,
    pub l_value: Option<Complex64>,
    pub n_coords: Vec<i64>,
    pub residual: Option<f64>,
    pub verdict: RowVerdict,
}

/// Split one CSV line on commas outside double quotes.  Quotes delimit whole
/// fields and never nest or escape; that is all the writer emits.
fn split_csv_line(line: &str) -> Result<Vec<String>> {
    let malformed = || Error::Config(format!("malformed CSV line: {line}"));
    let mut fields = Vec::new();
    let mut rest = line;
    loop {
        if let Some(tail) = rest.strip_prefix('"') {
            let close = tail.find('"').ok_or_else(malformed)?;
            fields.push(tail[..close].to_string());
            rest = &tail[close + 1..];
            match rest.strip_prefix(',') {
                Some(next) => rest = next,
                None if rest.is_empty() => break,
                None => return Err(malformed()),
            }
        } else {
            match rest.find(',') {
                Some(comma) => {
                    fields.push(rest[..comma].to_string());
                    rest = &rest[comma + 1..];
                }
                None => {
                    fields.push(rest.to_string());
                    break;
                }
            }
        }
    }
    Ok(fields)
}

/// Read a survey CSV back into rows (header line required).
pub fn read_survey_csv(path: &Path) -> Result<Vec<SurveyRow>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER.trim_end() => {}
        _ => {
            return Err(Error::Config(format!(
                "{} is not a survey CSV (bad header)",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields = split_csv_line(line)?;
        if fields.len() != 10 {
            return Err(Error::Config(format!(
                "expected 10 CSV fields, found {}: {line}",
                fields.len()
            )));
        }
        let bad = |what: &str| Error::Config(format!("bad {what} in CSV line: {line}"));
        let k: u64 = fields[0].parse().map_err(|_| bad("k"))?;
        let m: u64 = fields[1].parse().map_err(|_| bad("m"))?;
        let class_id: u64 = fields[2].parse().map_err(|_| bad("class_id"))?;
        let conjugate: u64 = fields[4].parse().map_err(|_| bad("t"))?;
        let verdict = match fields[9].as_str() {
            "true" => RowVerdict::Vanishing,
            "false" => RowVerdict::NonVanishing,
            "error" => RowVerdict::Error,
            _ => return Err(bad("vanishing flag")),
        };
        let (l_value, n_coords, residual) = if verdict == RowVerdict::Error {
            (None, Vec::new(), None)
        } else {
            let re: f64 = fields[5].parse().map_err(|_| bad("re_L"))?;
            let im: f64 = fields[6].parse().map_err(|_| bad("im_L"))?;
            let coords = fields[7]
                .split(';')
                .map(|c| c.parse::<i64>().map_err(|_| bad("n_coords")))
                .collect::<Result<Vec<i64>>>()?;
            let residual: f64 = fields[8].parse().map_err(|_| bad("residual"))?;
            (Some(Complex64::new(re, im)), coords, Some(residual))
        };
        rows.push(SurveyRow {
            k,
            m,
            class_id,
            char_spec: fields[3].clone(),
            conjugate,
            l_value,
            n_coords,
            residual,
            verdict,
        });
    }
    Ok(rows)
}

/// Rebuild summary counts from CSV rows, for feeding observed data into
/// prediction reports.  Only the counts, windows and bound are recovered;
/// the flag fields echo defaults since the CSV does not store them.
pub fn summarize_rows(rows: &[SurveyRow]) -> Result<SurveySummary> {
    let k = match rows.first() {
        Some(row) => row.k,
        None => return Err(Error::Config("empty survey CSV".to_string())),
    };
    let mut summary = SurveySummary {
        curve: String::new(),
        k,
        x_max: 0,
        inclusive_bound: true,
        include_k_squared: true,
        skip_non_coprime: true,
        conductors_done: 0,
        last_conductor: 0,
        classes_examined: 0,
        vanishing_classes: 0,
        error_records: 0,
        max_residual: 0.0,
        windows: BTreeMap::new(),
        complete: true,
    };
    let mut last_class: Option<(u64, u64)> = None;
    let mut last_m = 0u64;
    for row in rows {
        if row.k != k {
            return Err(Error::Config(format!(
                "mixed orders in survey CSV: {} and {k}",
                row.k
            )));
        }
        summary.x_max = summary.x_max.max(row.m);
        if row.m != last_m {
            summary.conductors_done += 1;
            summary.last_conductor = row.m;
            last_m = row.m;
        }
        if last_class == Some((row.m, row.class_id)) {
            continue;
        }
        last_class = Some((row.m, row.class_id));
        match row.verdict {
            RowVerdict::Error => summary.error_records += 1,
            decided => {
                summary.classes_examined += 1;
                let window = summary.windows.entry(63 - row.m.leading_zeros()).or_default();
                window.examined += 1;
                if decided == RowVerdict::Vanishing {
                    summary.vanishing_classes += 1;
                    window.vanishing += 1;
                }
                if let Some(residual) = row.residual {
                    summary.max_residual = summary.max_residual.max(residual);
                }
            }
        }
    }
    Ok(summary)
}

/// Heuristic prediction report as CSV text: one row of model output, and —
/// when observed data is supplied — per-dyadic-window comparison rows of
/// observed versus predicted vanishing class counts.  The prediction sums
/// class vanishing probabilities over all admissible conductors without the
/// coprimality thinning (a few excluded conductors per curve, negligible at
/// survey scale).
pub fn predict_report(
    k: u64,
    x_max: u64,
    model: &RmtModel,
    observed: Option<&SurveySummary>,
) -> Result<String> {
    let (sum, classification) = heuristic_sum(k, x_max, model)?;
    let mut out = String::from("k,X,N,sum,classification,C_E,aE_half\n");
    out.push_str(&format!(
        "{k},{x_max},{n:.6},{sum:.6e},\"{classification}\",{c:.6e},{a:.6e}\n",
        n = model.matrix_size(),
        c = model.c_e,
        a = model.ae_half,
    ));
    let Some(observed) = observed else {
        return Ok(out);
    };
    if observed.k != k {
        return Err(Error::Config(format!(
            "observed summary has order {}, prediction requested order {k}",
            observed.k
        )));
    }
    // Expected vanishing classes in a window: each conductor with r prime
    // factors carries (k−1)^{r−1} classes, and a class vanishes with the
    // model probability, so the window's expectation is the heuristic
    // character weight divided by k−1.
    let mut window_sums: BTreeMap<u32, f64> = BTreeMap::new();
    for conductor in admissible_conductors(k, observed.x_max)? {
        let weight = ((k - 1) as f64).powi(conductor.factors.len() as i32 - 1);
        let probability = crate::rmt::class_vanishing_probability(k, conductor.m, model);
        *window_sums.entry(63 - conductor.m.leading_zeros()).or_default() +=
            weight * probability;
    }
    out.push_str("\nwindow_lo,window_hi,observed_vanishing_classes,predicted_vanishing_classes\n");
    for (exp, counts) in &observed.windows {
        out.push_str(&format!(
            "{lo},{hi},{observed},{predicted:.4e}\n",
            lo = 1u64 << exp,
            hi = (1u64 << (exp + 1)) - 1,
            observed = counts.vanishing,
            predicted = window_sums.get(exp).copied().unwrap_or(0.0),
        ));
    }
    Ok(out)
}
