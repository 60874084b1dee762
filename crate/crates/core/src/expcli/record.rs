use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::normalizers;
use crate::capacity::ball_capacity;
use crate::error::{CapError, Result};

use super::config::{Format, Suite};

/// One row of experiment output.
///
/// Quantities that a suite does not produce are `None` (JSON `null`, empty CSV cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub suite: Suite,
    /// Position in the suite's task list.
    pub index: usize,
    pub n: u64,
    pub seed: u64,
    pub k_n: Option<f64>,
    /// R̂: exact or Monte Carlo capacity of the range.
    pub cap: Option<f64>,
    pub cap_stderr: Option<f64>,
    pub cap_exact: Option<bool>,
    /// D_n = max ‖S_i‖.
    pub diameter: Option<f64>,
    /// R̂/h₃(n), the value f_n(1).
    pub ratio_h3: Option<f64>,
    /// R̂/ĥ₃(n), the value g_n(1).
    pub ratio_hhat3: Option<f64>,
    pub ratio_cap_ball: Option<f64>,
    /// Cap(B_{j₃}) and whether it is the asymptote (2π/3)·j₃ instead of a solve.
    pub cap_ball: Option<f64>,
    pub cap_ball_asymptotic: Option<bool>,
    pub rate_s: Option<f64>,
    pub rate_k: Option<f64>,
    /// Largest relative residual of an exact identity.
    pub residual: Option<f64>,
    /// Number of failed bound or property checks.
    pub violations: Option<u64>,
    pub events: BTreeMap<String, bool>,
    /// Trajectory values on the config grid.
    pub trajectory: Option<Vec<f64>>,
    pub error: Option<String>,
    pub config_hash: String,
    pub code_version: String,
    /// Unix seconds; excluded from every comparison.
    pub timestamp: u64,
}

impl ResultRecord {
    pub fn new(suite: Suite, index: usize, n: u64, seed: u64, config_hash: &str) -> ResultRecord {
        ResultRecord {
            suite,
            index,
            n,
            seed,
            k_n: None,
            cap: None,
            cap_stderr: None,
            cap_exact: None,
            diameter: None,
            ratio_h3: None,
            ratio_hhat3: None,
            ratio_cap_ball: None,
            cap_ball: None,
            cap_ball_asymptotic: None,
            rate_s: None,
            rate_k: None,
            residual: None,
            violations: None,
            events: BTreeMap::new(),
            trajectory: None,
            error: None,
            config_hash: config_hash.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: now(),
        }
    }

    /// Copy with the timestamp cleared, for comparisons.
    pub fn without_timestamp(&self) -> ResultRecord {
        ResultRecord { timestamp: 0, ..self.clone() }
    }
}

pub(crate) fn now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Regime events at tolerance ε:
/// A1 = {h₃(n) − R̂ < εR̂}, A2 = {Cap(B_{j₃}) − R̂ < εR̂}, B = {j₃ < D_n < (1+ε)j₃}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeEvents {
    pub a1: bool,
    pub a2: bool,
    pub b: bool,
    pub j3: f64,
    pub cap_ball: f64,
    pub cap_ball_asymptotic: bool,
}

/// Evaluates the regime events of a record; None when it lacks R̂, D_n or k_n,
/// or when n is below the normalizer domain.
pub fn regime_predicates(r: &ResultRecord, eps: f64) -> Option<RegimeEvents> {
    let (cap, d, k) = (r.cap?, r.diameter?, r.k_n?);
    let nz = normalizers(r.n).ok()?;
    let j3 = nz.j3(k);
    let ball = ball_capacity(j3).ok()?;
    Some(RegimeEvents {
        a1: nz.h3 - cap < eps * cap,
        a2: ball.value - cap < eps * cap,
        b: j3 < d && d < (1.0 + eps) * j3,
        j3,
        cap_ball: ball.value,
        cap_ball_asymptotic: !ball.exact,
    })
}

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 25] = [
    "suite",
    "index",
    "n",
    "seed",
    "k_n",
    "cap",
    "cap_stderr",
    "cap_exact",
    "diameter",
    "ratio_h3",
    "ratio_hhat3",
    "ratio_cap_ball",
    "cap_ball",
    "cap_ball_asymptotic",
    "rate_s",
    "rate_k",
    "residual",
    "violations",
    "events",
    "trajectory",
    "error",
    "config_hash",
    "code_version",
    "timestamp",
    "schema",
];

/// Bumped when the column set changes.
const SCHEMA: &str = "1";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |x| x.to_string())
}

/// Shortest round-trip form, with an exponent for very large or small values.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt_num(v: &Option<f64>) -> String {
    v.map_or(String::new(), num)
}

fn csv_row(r: &ResultRecord) -> Vec<String> {
    let events = r.events.iter().map(|(k, v)| format!("{k}={}", *v as u8)).collect::<Vec<_>>().join(";");
    let traj = r
        .trajectory
        .as_ref()
        .map_or(String::new(), |t| t.iter().map(|&v| num(v)).collect::<Vec<_>>().join(";"));
    vec![
        r.suite.name().to_string(),
        r.index.to_string(),
        r.n.to_string(),
        r.seed.to_string(),
        opt_num(&r.k_n),
        opt_num(&r.cap),
        opt_num(&r.cap_stderr),
        opt(&r.cap_exact),
        opt_num(&r.diameter),
        opt_num(&r.ratio_h3),
        opt_num(&r.ratio_hhat3),
        opt_num(&r.ratio_cap_ball),
        opt_num(&r.cap_ball),
        opt(&r.cap_ball_asymptotic),
        opt_num(&r.rate_s),
        opt_num(&r.rate_k),
        opt_num(&r.residual),
        opt(&r.violations),
        events,
        traj,
        opt(&r.error),
        r.config_hash.clone(),
        r.code_version.clone(),
        r.timestamp.to_string(),
        SCHEMA.to_string(),
    ]
}

fn parse_field<T: std::str::FromStr>(row: usize, col: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| CapError::config(format!("csv row {row}, column `{col}`: cannot parse `{s}`")))
}

fn parse_opt<T: std::str::FromStr>(row: usize, col: &str, s: &str) -> Result<Option<T>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(row, col, s).map(Some)
    }
}

fn parse_bool(row: usize, col: &str, s: &str) -> Result<Option<bool>> {
    match s {
        "" => Ok(None),
        "true" => Ok(Some(true)),
        "false" => Ok(Some(false)),
        _ => Err(CapError::config(format!("csv row {row}, column `{col}`: expected true/false, got `{s}`"))),
    }
}

fn csv_record(row: usize, f: &csv::StringRecord) -> Result<ResultRecord> {
    if f.len() != CSV_COLUMNS.len() {
        return Err(CapError::config(format!("csv row {row}: expected {} columns, got {}", CSV_COLUMNS.len(), f.len())));
    }
    let g = |i: usize| &f[i];
    let mut events = BTreeMap::new();
    for item in g(18).split(';').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CapError::config(format!("csv row {row}, column `events`: bad item `{item}`")))?;
        let v = match v {
            "1" => true,
            "0" => false,
            _ => return Err(CapError::config(format!("csv row {row}, column `events`: bad value `{v}`"))),
        };
        events.insert(k.to_string(), v);
    }
    let trajectory = if g(19).is_empty() {
        None
    } else {
        Some(g(19).split(';').map(|s| parse_field(row, "trajectory", s)).collect::<Result<Vec<f64>>>()?)
    };
    Ok(ResultRecord {
        suite: g(0).parse()?,
        index: parse_field(row, "index", g(1))?,
        n: parse_field(row, "n", g(2))?,
        seed: parse_field(row, "seed", g(3))?,
        k_n: parse_opt(row, "k_n", g(4))?,
        cap: parse_opt(row, "cap", g(5))?,
        cap_stderr: parse_opt(row, "cap_stderr", g(6))?,
        cap_exact: parse_bool(row, "cap_exact", g(7))?,
        diameter: parse_opt(row, "diameter", g(8))?,
        ratio_h3: parse_opt(row, "ratio_h3", g(9))?,
        ratio_hhat3: parse_opt(row, "ratio_hhat3", g(10))?,
        ratio_cap_ball: parse_opt(row, "ratio_cap_ball", g(11))?,
        cap_ball: parse_opt(row, "cap_ball", g(12))?,
        cap_ball_asymptotic: parse_bool(row, "cap_ball_asymptotic", g(13))?,
        rate_s: parse_opt(row, "rate_s", g(14))?,
        rate_k: parse_opt(row, "rate_k", g(15))?,
        residual: parse_opt(row, "residual", g(16))?,
        violations: parse_opt(row, "violations", g(17))?,
        events,
        trajectory,
        error: if g(20).is_empty() { None } else { Some(g(20).to_string()) },
        config_hash: g(21).to_string(),
        code_version: g(22).to_string(),
        timestamp: parse_field(row, "timestamp", g(23))?,
    })
}

/// Writes records as JSONL (one object per line) or CSV with [`CSV_COLUMNS`].
pub fn write_records_to<W: Write>(records: &[ResultRecord], w: W, format: Format) -> Result<()> {
    match format {
        Format::Jsonl => {
            let mut w = BufWriter::new(w);
            for r in records {
                serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(w);
            let io = |e: csv::Error| CapError::Io(e.into());
            w.write_record(CSV_COLUMNS).map_err(io)?;
            for r in records {
                w.write_record(csv_row(r)).map_err(io)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_records(records: &[ResultRecord], path: &Path, format: Format) -> Result<()> {
    write_records_to(records, File::create(path)?, format)
}

pub fn read_records_from<R: Read>(r: R, format: Format) -> Result<Vec<ResultRecord>> {
    match format {
        Format::Jsonl => {
            let mut out = Vec::new();
            for (i, line) in BufReader::new(r).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                out.push(
                    serde_json::from_str(&line)
                        .map_err(|e| CapError::config(format!("jsonl line {}: {e}", i + 1)))?,
                );
            }
            Ok(out)
        }
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(r);
            let header = rd.headers().map_err(|e| CapError::config(format!("csv header: {e}")))?;
            if header.iter().ne(CSV_COLUMNS) {
                return Err(CapError::config("csv header does not match the record schema"));
            }
            rd.records()
                .enumerate()
                .map(|(i, rec)| {
                    let rec = rec.map_err(|e| CapError::config(format!("csv row {}: {e}", i + 1)))?;
                    csv_record(i + 1, &rec)
                })
                .collect()
        }
    }
}

pub fn read_records(path: &Path, format: Format) -> Result<Vec<ResultRecord>> {
    read_records_from(File::open(path)?, format)
}
