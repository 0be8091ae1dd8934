//! Seeded multi-sample sweeps over (N, p): run circuits, average traces,
//! extract the peak negativity, and persist everything as CSV plus a JSON
//! manifest so interrupted sweeps can resume.

use crate::circuit::{self, CircuitSpec, EarlyStop, SampleTrace};
use crate::error::{Error, Result};
use crate::gates::{GateSet, RngStream};
use crate::linalg;
use crate::qstate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Maximum circuit depth, either fixed or proportional to the qubit count
/// (config syntax: an integer, or a string like `"4N"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DMaxRule {
    Fixed(usize),
    Formula(String),
}

impl Default for DMaxRule {
    fn default() -> Self {
        DMaxRule::Formula("4N".to_string())
    }
}

impl DMaxRule {
    pub fn depth_for(&self, num_qubits: usize) -> Result<usize> {
        match self {
            DMaxRule::Fixed(d) => Ok(*d),
            DMaxRule::Formula(s) => {
                let stripped = s.trim().strip_suffix(['N', 'n']).ok_or_else(|| {
                    Error::InvalidConfig(format!("d_max formula {s:?} must end in N"))
                })?;
                let factor: usize = if stripped.is_empty() {
                    1
                } else {
                    stripped.trim().parse().map_err(|_| {
                        Error::InvalidConfig(format!("d_max formula {s:?} has a bad multiplier"))
                    })?
                };
                Ok(factor * num_qubits)
            }
        }
    }
}

fn default_samples() -> usize {
    50
}

fn default_record_every() -> usize {
    1
}

fn default_early_stop() -> bool {
    true
}

/// Sweep definition, deserialized from the JSON config documented in the
/// README.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub error_rates: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_point: usize,
    pub master_seed: u64,
    pub gate_set: GateSet,
    #[serde(default)]
    pub d_max: DMaxRule,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    pub output_dir: PathBuf,
    /// Stop decaying tails early (never applies to p = 0 runs).
    #[serde(default = "default_early_stop")]
    pub early_stop: bool,
    #[serde(default)]
    pub noisy_single_qubit_gates: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.error_rates.is_empty() {
            return Err(Error::InvalidConfig(
                "sizes and error_rates must be non-empty".into(),
            ));
        }
        for &n in &self.sizes {
            if n < 2 || n % 2 != 0 || n > qstate::max_qubits() {
                return Err(Error::InvalidConfig(format!(
                    "size {n} outside the supported even range 2..={}",
                    qstate::max_qubits()
                )));
            }
        }
        for &p in &self.error_rates {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidErrorRate(p));
            }
        }
        if self.samples_per_point < 1 {
            return Err(Error::InvalidConfig("samples_per_point must be >= 1".into()));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        for &n in &self.sizes {
            self.d_max.depth_for(n)?;
        }
        Ok(())
    }

    /// Stable hash of the configuration, stored in the manifest and checked
    /// on resume.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    fn circuit_spec(&self, n: usize, p: f64, stream: u64) -> Result<CircuitSpec> {
        Ok(CircuitSpec {
            num_qubits: n,
            max_depth: self.d_max.depth_for(n)?,
            error_rate: p,
            gate_set: self.gate_set,
            seed: self.master_seed,
            rng_stream: stream,
            record_every: self.record_every,
            early_stop: if self.early_stop {
                Some(EarlyStop::default())
            } else {
                None
            },
            noisy_single_qubit_gates: self.noisy_single_qubit_gates,
        })
    }
}

/// Per-sample RNG stream id: unique over (size, rate index, sample index) so
/// every sample is individually reproducible from the master seed.
pub fn stream_id(num_qubits: usize, rate_index: usize, sample_index: usize) -> u64 {
    debug_assert!(num_qubits < 1 << 16 && rate_index < 1 << 16 && sample_index < 1 << 32);
    ((num_qubits as u64) << 48) | ((rate_index as u64) << 32) | sample_index as u64
}

/// One circuit realization of a sweep point. Deterministic in all arguments.
pub fn run_sample(
    config: &SweepConfig,
    num_qubits: usize,
    rate_index: usize,
    sample_index: usize,
) -> Result<SampleTrace> {
    let p = config.error_rates[rate_index];
    let spec = config.circuit_spec(num_qubits, p, stream_id(num_qubits, rate_index, sample_index))?;
    circuit::run_circuit(&spec)
}

/// Sample-averaged negativity trace at one (N, p) point.
///
/// With early stopping enabled samples may record different depth ranges; the
/// mean and standard error at each depth are taken over the samples that
/// reached it (`counts` says how many).
#[derive(Clone, Debug)]
pub struct NegativityTrace {
    pub num_qubits: usize,
    pub error_rate: f64,
    pub depths: Vec<usize>,
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
    pub counts: Vec<usize>,
    pub raw: Vec<SampleTrace>,
}

/// Peak of the sample-averaged curve: average first, then maximize.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmaxSummary {
    pub num_qubits: usize,
    pub error_rate: f64,
    pub emax: f64,
    pub depth_at_max: usize,
    pub sem_at_max: f64,
    pub samples: usize,
    /// Set when the maximum sits at the last recorded depth, i.e. the peak
    /// may lie beyond the simulated depth range.
    pub peak_at_boundary: bool,
}

/// Average per-sample traces into one (N, p) trace.
pub fn aggregate_traces(
    num_qubits: usize,
    error_rate: f64,
    raw: Vec<SampleTrace>,
) -> Result<NegativityTrace> {
    if raw.is_empty() || raw.iter().all(|t| t.depths.is_empty()) {
        return Err(Error::EmptyTrace);
    }
    let longest = raw
        .iter()
        .max_by_key(|t| t.depths.len())
        .expect("non-empty raw set");
    let depths = longest.depths.clone();
    let mut mean = Vec::with_capacity(depths.len());
    let mut sem = Vec::with_capacity(depths.len());
    let mut counts = Vec::with_capacity(depths.len());
    for (i, _) in depths.iter().enumerate() {
        let values: Vec<f64> = raw
            .iter()
            .filter(|t| t.log_negativity.len() > i)
            .map(|t| t.log_negativity[i])
            .collect();
        let k = values.len();
        let m = values.iter().sum::<f64>() / k as f64;
        let s = if k > 1 {
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        mean.push(m);
        sem.push(s);
        counts.push(k);
    }
    Ok(NegativityTrace {
        num_qubits,
        error_rate,
        depths,
        mean,
        sem,
        counts,
        raw,
    })
}

/// Peak extraction: maximum of the sample-averaged curve with its depth.
/// Ties resolve to the earliest depth.
pub fn extract_emax(trace: &NegativityTrace) -> Result<EmaxSummary> {
    if trace.depths.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut best = 0usize;
    for (i, &v) in trace.mean.iter().enumerate() {
        if v > trace.mean[best] {
            best = i;
        }
    }
    Ok(EmaxSummary {
        num_qubits: trace.num_qubits,
        error_rate: trace.error_rate,
        emax: trace.mean[best],
        depth_at_max: trace.depths[best],
        sem_at_max: trace.sem[best],
        samples: trace.raw.len(),
        peak_at_boundary: best + 1 == trace.depths.len(),
    })
}

/// Full sweep output: one aggregated trace and one peak summary per (N, p).
#[derive(Clone, Debug)]
pub struct SweepDataset {
    pub traces: Vec<NegativityTrace>,
    pub emax: Vec<EmaxSummary>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    config: SweepConfig,
    config_hash: String,
    version: String,
    rng_algorithm: String,
    completed: bool,
    wall_time_seconds: Option<f64>,
}

pub const TRACES_FILE: &str = "traces.csv";
pub const EMAX_FILE: &str = "emax.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
const TRACES_HEADER: &str = "N,p,sample_index,depth,log_negativity";
const EMAX_HEADER: &str = "N,p,emax,depth_at_max,sem,samples";

type SampleKey = (usize, String, usize);

fn parse_traces_file(path: &Path) -> Result<(Vec<String>, BTreeMap<SampleKey, Vec<(usize, f64)>>)> {
    let content = fs::read_to_string(path)?;
    let mut lines: Vec<String> = content.lines().map(|l| l.to_string()).collect();
    if lines.is_empty() || lines[0] != TRACES_HEADER {
        return Err(Error::ResumeConflict {
            path: path.display().to_string(),
            reason: "missing or unexpected traces.csv header".into(),
        });
    }
    // a torn final line from an interrupted write is dropped silently
    if let Some(last) = lines.last() {
        if !last.is_empty() && parse_trace_row(last).is_none() && lines.len() > 1 {
            lines.pop();
        }
    }
    let mut by_sample: BTreeMap<SampleKey, Vec<(usize, f64)>> = BTreeMap::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let (n, p, sample, depth, value) = parse_trace_row(line).ok_or(Error::MalformedRow {
            path: path.display().to_string(),
            row: idx + 1,
            reason: format!("cannot parse {line:?}"),
        })?;
        by_sample
            .entry((n, p, sample))
            .or_default()
            .push((depth, value));
    }
    Ok((lines, by_sample))
}

fn parse_trace_row(line: &str) -> Option<(usize, String, usize, usize, f64)> {
    let mut parts = line.split(',');
    let n = parts.next()?.parse().ok()?;
    let p = parts.next()?.to_string();
    p.parse::<f64>().ok()?;
    let sample = parts.next()?.parse().ok()?;
    let depth = parts.next()?.parse().ok()?;
    let value = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((n, p, sample, depth, value))
}

fn trace_rows(n: usize, p: f64, sample: usize, trace: &SampleTrace) -> String {
    let mut out = String::new();
    for (d, v) in trace.depths.iter().zip(&trace.log_negativity) {
        let _ = writeln!(out, "{n},{p},{sample},{d},{v}");
    }
    out
}

/// Run (or resume) a sweep, persisting incrementally.
///
/// Work proceeds point by point in config order; within a point, samples run
/// in parallel on the global rayon pool but are written back in sample-index
/// order, so dataset bytes never depend on scheduling. A sweep interrupted
/// and re-run with the same config produces a byte-identical `traces.csv` and
/// `emax.csv` (the manifest additionally records wall time, which does vary).
pub fn run_sweep(config: &SweepConfig) -> Result<SweepDataset> {
    config.validate()?;
    let start = Instant::now();
    if rayon::current_num_threads() > 1 {
        // sample-level parallelism owns the cores; keep BLAS single-threaded
        linalg::set_blas_threads(1);
    }
    fs::create_dir_all(&config.output_dir)?;
    let traces_path = config.output_dir.join(TRACES_FILE);
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    let config_hash = config.hash();

    // resume bookkeeping: previously completed samples keyed by (N, p, sample)
    let mut existing: BTreeMap<SampleKey, Vec<(usize, f64)>> = BTreeMap::new();
    let mut preserved_lines: Vec<String> = vec![TRACES_HEADER.to_string()];
    if traces_path.exists() {
        let manifest: Manifest = match fs::read_to_string(&manifest_path) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(_) => {
                return Err(Error::ResumeConflict {
                    path: manifest_path.display().to_string(),
                    reason: "traces.csv exists but manifest.json is missing".into(),
                })
            }
        };
        if manifest.config_hash != config_hash {
            return Err(Error::ResumeConflict {
                path: manifest_path.display().to_string(),
                reason: "config hash differs from the dataset being resumed".into(),
            });
        }
        let (lines, mut by_sample) = parse_traces_file(&traces_path)?;
        if !manifest.completed {
            // the final block may have been cut short; recompute it
            if let Some(last_key) = lines
                .iter()
                .rev()
                .find_map(|l| parse_trace_row(l).map(|(n, p, s, _, _)| (n, p, s)))
            {
                by_sample.remove(&last_key);
            }
        }
        existing = by_sample;
        preserved_lines = lines;
        // drop lines belonging to removed (torn) blocks
        preserved_lines.retain(|l| {
            l == TRACES_HEADER
                || parse_trace_row(l)
                    .map(|(n, p, s, _, _)| existing.contains_key(&(n, p, s)))
                    .unwrap_or(false)
        });
    }

    // write manifest first so an interrupted run can be identified
    let manifest = Manifest {
        config: config.clone(),
        config_hash: config_hash.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_algorithm: RngStream::ALGORITHM.to_string(),
        completed: false,
        wall_time_seconds: None,
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    let mut writer = BufWriter::new(fs::File::create(&traces_path)?);
    for line in &preserved_lines {
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;

    let mut traces = Vec::new();
    for &n in &config.sizes {
        for (rate_index, &p) in config.error_rates.iter().enumerate() {
            let p_str = format!("{p}");
            let missing: Vec<usize> = (0..config.samples_per_point)
                .filter(|&s| !existing.contains_key(&(n, p_str.clone(), s)))
                .collect();
            let computed: Vec<(usize, SampleTrace)> = missing
                .par_iter()
                .map(|&s| run_sample(config, n, rate_index, s).map(|t| (s, t)))
                .collect::<Result<Vec<_>>>()?;
            let mut fresh: BTreeMap<usize, SampleTrace> = computed.into_iter().collect();
            let mut raw = Vec::with_capacity(config.samples_per_point);
            for s in 0..config.samples_per_point {
                let trace = if let Some(rows) = existing.get(&(n, p_str.clone(), s)) {
                    SampleTrace {
                        num_qubits: n,
                        error_rate: p,
                        depths: rows.iter().map(|&(d, _)| d).collect(),
                        log_negativity: rows.iter().map(|&(_, v)| v).collect(),
                    }
                } else {
                    let trace = fresh.remove(&s).expect("computed above");
                    writer.write_all(trace_rows(n, p, s, &trace).as_bytes())?;
                    writer.flush()?;
                    trace
                };
                raw.push(trace);
            }
            traces.push(aggregate_traces(n, p, raw)?);
        }
    }
    writer.flush()?;
    drop(writer);

    let emax: Vec<EmaxSummary> = traces.iter().map(extract_emax).collect::<Result<_>>()?;
    write_emax_csv(&config.output_dir.join(EMAX_FILE), &emax)?;

    let manifest = Manifest {
        completed: true,
        wall_time_seconds: Some(start.elapsed().as_secs_f64()),
        ..manifest
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(SweepDataset { traces, emax })
}

fn write_emax_csv(path: &Path, rows: &[EmaxSummary]) -> Result<()> {
    let mut out = String::from(EMAX_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.num_qubits, r.error_rate, r.emax, r.depth_at_max, r.sem_at_max, r.samples
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read an emax.csv back into summaries (the boundary flag is not persisted).
pub fn read_emax_csv(path: &Path) -> Result<Vec<EmaxSummary>> {
    let content = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if idx == 0 {
            if line != EMAX_HEADER {
                return Err(Error::MalformedRow {
                    path: path.display().to_string(),
                    row: 1,
                    reason: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Option<f64> { parts.get(i)?.parse().ok() };
        let row = (|| {
            if parts.len() != 6 {
                return None;
            }
            Some(EmaxSummary {
                num_qubits: parts[0].parse().ok()?,
                error_rate: parse(1)?,
                emax: parse(2)?,
                depth_at_max: parts[3].parse().ok()?,
                sem_at_max: parse(4)?,
                samples: parts[5].parse().ok()?,
                peak_at_boundary: false,
            })
        })()
        .ok_or(Error::MalformedRow {
            path: path.display().to_string(),
            row: idx + 1,
            reason: format!("cannot parse {line:?}"),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Read a traces.csv back into per-sample traces grouped by (N, p).
pub fn read_traces_csv(path: &Path) -> Result<Vec<NegativityTrace>> {
    let (_, by_sample) = parse_traces_file(path)?;
    let mut grouped: BTreeMap<(usize, String), Vec<(usize, Vec<(usize, f64)>)>> = BTreeMap::new();
    for ((n, p, sample), rows) in by_sample {
        grouped.entry((n, p)).or_default().push((sample, rows));
    }
    let mut traces = Vec::new();
    for ((n, p_str), mut samples) in grouped {
        samples.sort_by_key(|(s, _)| *s);
        let p: f64 = p_str.parse().expect("validated on parse");
        let raw: Vec<SampleTrace> = samples
            .into_iter()
            .map(|(_, rows)| SampleTrace {
                num_qubits: n,
                error_rate: p,
                depths: rows.iter().map(|&(d, _)| d).collect(),
                log_negativity: rows.iter().map(|&(_, v)| v).collect(),
            })
            .collect();
        traces.push(aggregate_traces(n, p, raw)?);
    }
    Ok(traces)
}

/// Re-check a persisted dataset: manifest hash, traces/emax consistency.
/// Returns the number of (N, p) points validated.
pub fn validate_dataset(dir: &Path) -> Result<usize> {
    let manifest_text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)?;
    if manifest.config.hash() != manifest.config_hash {
        return Err(Error::ResumeConflict {
            path: dir.join(MANIFEST_FILE).display().to_string(),
            reason: "manifest config hash does not match its config echo".into(),
        });
    }
    let traces = read_traces_csv(&dir.join(TRACES_FILE))?;
    let emax = read_emax_csv(&dir.join(EMAX_FILE))?;
    if traces.len() != emax.len() {
        return Err(Error::ResumeConflict {
            path: dir.display().to_string(),
            reason: format!(
                "traces cover {} points but emax.csv has {} rows",
                traces.len(),
                emax.len()
            ),
        });
    }
    for trace in &traces {
        let expect = extract_emax(trace)?;
        let found = emax
            .iter()
            .find(|e| e.num_qubits == trace.num_qubits && e.error_rate == trace.error_rate)
            .ok_or(Error::ResumeConflict {
                path: dir.display().to_string(),
                reason: format!(
                    "no emax row for N={} p={}",
                    trace.num_qubits, trace.error_rate
                ),
            })?;
        if (expect.emax - found.emax).abs() > 1e-9 || expect.depth_at_max != found.depth_at_max {
            return Err(Error::ResumeConflict {
                path: dir.display().to_string(),
                reason: format!(
                    "emax row for N={} p={} disagrees with traces",
                    trace.num_qubits, trace.error_rate
                ),
            });
        }
    }
    Ok(traces.len())
}
