//! Report rendering for benchmark records.
//!
//! Three formats: `csv` (machine-readable, exact floats, parses back with
//! [`parse_csv`]), `markdown` (one table per `(criterion, |A|, N)` group
//! with a column per partition count and the fastest converged algorithm in
//! bold), and `json-lines` (one JSON object per record).

use std::str::FromStr;

use sisdmdp_core::{Error, Result};

use crate::bench::{fastest_flags, Algorithm, BenchRecord, ValueCell};

pub const CSV_HEADER: &str = "algorithm,criterion,actions,states,partitions,seed,time_s,\
iterations,rho,converged,stop_reason,total_intra_arcs";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    JsonLines,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        match token {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" => Ok(ReportFormat::Markdown),
            "json-lines" => Ok(ReportFormat::JsonLines),
            other => Err(Error::InvalidConfig(format!(
                "unsupported report format `{other}`; expected csv, markdown or json-lines"
            ))),
        }
    }
}

pub fn emit_report(records: &[BenchRecord], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(records),
        ReportFormat::Markdown => emit_markdown(records),
        ReportFormat::JsonLines => emit_json_lines(records),
    }
}

fn time_field(record: &BenchRecord) -> String {
    match record.time_s {
        Some(t) => format!("{t}"),
        None => ">budget".to_string(),
    }
}

fn rho_field(record: &BenchRecord) -> String {
    match record.value {
        ValueCell::Empty => String::new(),
        ValueCell::Rho(rho) => format!("{rho}"),
        ValueCell::Summary { min, max, mean } => format!("{min}/{max}/{mean}"),
    }
}

fn emit_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm.name(),
            r.criterion,
            r.n_actions,
            r.n_states,
            r.n_partitions,
            r.seed,
            time_field(r),
            r.iterations,
            rho_field(r),
            r.converged,
            r.stop_reason,
            r.total_intra_arcs,
        ));
    }
    out
}

/// Reads a CSV report back into records. Floats are restored exactly; the
/// per-group fastest flag is derived, not stored, so nothing is lost.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidModel("empty report".into()))?;
    if header != CSV_HEADER {
        return Err(Error::InvalidModel(format!(
            "unexpected CSV header: {header}"
        )));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 12 {
            return Err(Error::InvalidModel(format!(
                "line {row}: expected 12 cells, got {}",
                cells.len()
            )));
        }
        let algorithm = Algorithm::parse(cells[0]).ok_or_else(|| {
            Error::InvalidModel(format!("line {row}: unknown algorithm `{}`", cells[0]))
        })?;
        let criterion = match cells[1] {
            "average" | "discounted" => cells[1].to_string(),
            other => {
                return Err(Error::InvalidModel(format!(
                    "line {row}: unknown criterion `{other}`"
                )))
            }
        };
        let field = |idx: usize, what: &str| -> Result<&str> {
            let cell = cells[idx];
            if cell.is_empty() {
                return Err(Error::InvalidModel(format!("line {row}: empty {what}")));
            }
            Ok(cell)
        };
        let parse_usize = |idx: usize, what: &str| -> Result<usize> {
            field(idx, what)?.parse().map_err(|_| {
                Error::InvalidModel(format!("line {row}: bad {what} `{}`", cells[idx]))
            })
        };
        let parse_f64 = |cell: &str, what: &str| -> Result<f64> {
            cell.parse()
                .map_err(|_| Error::InvalidModel(format!("line {row}: bad {what} `{cell}`")))
        };
        let time_s = match cells[6] {
            ">budget" => None,
            cell => Some(parse_f64(cell, "time")?),
        };
        let value = match cells[8] {
            "" => ValueCell::Empty,
            cell if cell.contains('/') => {
                let parts: Vec<&str> = cell.split('/').collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidModel(format!(
                        "line {row}: value summary needs min/max/mean, got `{cell}`"
                    )));
                }
                ValueCell::Summary {
                    min: parse_f64(parts[0], "value summary")?,
                    max: parse_f64(parts[1], "value summary")?,
                    mean: parse_f64(parts[2], "value summary")?,
                }
            }
            cell => ValueCell::Rho(parse_f64(cell, "rho")?),
        };
        let converged = match cells[9] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::InvalidModel(format!(
                    "line {row}: bad converged flag `{other}`"
                )))
            }
        };
        records.push(BenchRecord {
            algorithm,
            criterion,
            n_actions: parse_usize(2, "action count")?,
            n_states: parse_usize(3, "state count")?,
            n_partitions: parse_usize(4, "partition count")?,
            seed: field(5, "seed")?.parse().map_err(|_| {
                Error::InvalidModel(format!("line {row}: bad seed `{}`", cells[5]))
            })?,
            time_s,
            iterations: parse_usize(7, "iteration count")?,
            value,
            converged,
            stop_reason: field(10, "stop reason")?.to_string(),
            total_intra_arcs: parse_usize(11, "intra arc count")?,
        });
    }
    Ok(records)
}

fn fmt_time(t: f64) -> String {
    if t < 0.0005 {
        "<0.001".to_string()
    } else {
        format!("{t:.3}")
    }
}

/// Aggregates the runs of one algorithm at one `(group, K)` position over
/// all seeds into a single display cell.
struct CellAgg {
    times: Vec<Option<f64>>,
    iterations: Vec<usize>,
    all_converged: bool,
    stop_reasons: Vec<String>,
}

impl CellAgg {
    fn mean_time(&self) -> Option<f64> {
        let mut sum = 0.0;
        for t in &self.times {
            sum += (*t)?;
        }
        Some(sum / self.times.len() as f64)
    }

    fn render(&self) -> String {
        let time = match self.mean_time() {
            None => return ">budget".to_string(),
            Some(t) => fmt_time(t),
        };
        let iters = if self.iterations.windows(2).all(|w| w[0] == w[1]) {
            format!("{} it", self.iterations[0])
        } else {
            let mean =
                self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64;
            format!("~{mean:.1} it")
        };
        if self.all_converged {
            format!("{time} s, {iters}")
        } else {
            let mut reasons: Vec<&str> =
                self.stop_reasons.iter().map(String::as_str).collect();
            reasons.sort_unstable();
            reasons.dedup();
            format!("{time} s, {iters}, {}", reasons.join("/"))
        }
    }
}

fn emit_markdown(records: &[BenchRecord]) -> String {
    let mut out = String::from("# Benchmark report\n");
    let mut groups: Vec<(String, usize, usize)> = Vec::new();
    for r in records {
        let key = (r.criterion.clone(), r.n_actions, r.n_states);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (criterion, n_actions, n_states) in groups {
        let in_group: Vec<&BenchRecord> = records
            .iter()
            .filter(|r| {
                r.criterion == criterion && r.n_actions == n_actions && r.n_states == n_states
            })
            .collect();
        let mut ks: Vec<usize> = Vec::new();
        let mut algorithms: Vec<Algorithm> = Vec::new();
        for r in &in_group {
            if !ks.contains(&r.n_partitions) {
                ks.push(r.n_partitions);
            }
            if !algorithms.contains(&r.algorithm) {
                algorithms.push(r.algorithm);
            }
        }
        out.push_str(&format!(
            "\n## {criterion} reward, |A| = {n_actions}, N = {n_states}\n\n"
        ));
        out.push_str("| algorithm |");
        for k in &ks {
            out.push_str(&format!(" K = {k} |"));
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(ks.len()));
        out.push('\n');

        let mut cells: Vec<Vec<Option<CellAgg>>> = Vec::new();
        for &algorithm in &algorithms {
            let mut row = Vec::new();
            for &k in &ks {
                let runs: Vec<&&BenchRecord> = in_group
                    .iter()
                    .filter(|r| r.algorithm == algorithm && r.n_partitions == k)
                    .collect();
                if runs.is_empty() {
                    row.push(None);
                } else {
                    row.push(Some(CellAgg {
                        times: runs.iter().map(|r| r.time_s).collect(),
                        iterations: runs.iter().map(|r| r.iterations).collect(),
                        all_converged: runs.iter().all(|r| r.converged),
                        stop_reasons: runs.iter().map(|r| r.stop_reason.clone()).collect(),
                    }));
                }
            }
            cells.push(row);
        }
        let mut bold: Vec<Option<usize>> = vec![None; ks.len()];
        for (col, slot) in bold.iter_mut().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for (row, aggs) in cells.iter().enumerate() {
                if let Some(agg) = &aggs[col] {
                    if let (true, Some(t)) = (agg.all_converged, agg.mean_time()) {
                        if best.map_or(true, |(_, bt)| t < bt) {
                            best = Some((row, t));
                        }
                    }
                }
            }
            *slot = best.map(|(row, _)| row);
        }
        for (row, algorithm) in algorithms.iter().enumerate() {
            out.push_str(&format!("| {algorithm} |"));
            for (col, agg) in cells[row].iter().enumerate() {
                match agg {
                    None => out.push_str(" |"),
                    Some(agg) => {
                        let text = agg.render();
                        if bold[col] == Some(row) {
                            out.push_str(&format!(" **{text}** |"));
                        } else {
                            out.push_str(&format!(" {text} |"));
                        }
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

fn emit_json_lines(records: &[BenchRecord]) -> String {
    let flags = fastest_flags(records);
    let mut out = String::new();
    for (r, fastest) in records.iter().zip(flags) {
        let rho = match r.value {
            ValueCell::Empty => serde_json::Value::Null,
            ValueCell::Rho(rho) => serde_json::json!(rho),
            ValueCell::Summary { min, max, mean } => {
                serde_json::json!({ "min": min, "max": max, "mean": mean })
            }
        };
        let line = serde_json::json!({
            "algorithm": r.algorithm.name(),
            "criterion": r.criterion,
            "actions": r.n_actions,
            "states": r.n_states,
            "partitions": r.n_partitions,
            "seed": r.seed,
            "time_s": r.time_s,
            "budget_exceeded": r.time_s.is_none(),
            "iterations": r.iterations,
            "rho": rho,
            "converged": r.converged,
            "stop_reason": r.stop_reason,
            "total_intra_arcs": r.total_intra_arcs,
            "fastest": fastest,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
