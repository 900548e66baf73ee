use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Config, HarnessError};
use crate::ckks::ParamShape;
use crate::dataflow::{DataflowKind, ScheduleSpec};
use crate::model::{predict_time, select_from, GpuSpec, ModelInputs, Selection};

/// Frozen CSV header. Times are microseconds, footprints bytes.
pub const CSV_HEADER: [&str; 22] = [
    "dnum",
    "n",
    "l",
    "gpu",
    "best_strategy",
    "best_chunks",
    "time_us_dsob",
    "time_us_dpob",
    "time_us_dsoc",
    "time_us_dpoc",
    "chunks_dsoc",
    "chunks_dpoc",
    "ratio_second_best",
    "ratio_worst",
    "footprint_dsob",
    "footprint_dpob",
    "footprint_dsoc",
    "footprint_dpoc",
    "l2_hit_dsob",
    "l2_hit_dpob",
    "l2_hit_dsoc",
    "l2_hit_dpoc",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dnum: usize,
    pub n: usize,
    pub l: usize,
    pub gpu: String,
    pub best_strategy: DataflowKind,
    pub best_chunks: usize,
    /// Per strategy at its best chunk count, in [`DataflowKind::ALL`] order.
    pub time_seconds: [f64; 4],
    pub chunks: [usize; 4],
    pub ratio_second_best: f64,
    pub ratio_worst: f64,
    pub footprint: [u64; 4],
    pub l2_hit: [f64; 4],
}

impl ReportRow {
    fn from_selection(shape: &ParamShape, gpu: &str, sel: &Selection) -> Result<Self, HarnessError> {
        let per = &sel.per_strategy;
        let row = Self {
            dnum: shape.dnum,
            n: shape.n,
            l: shape.max_level,
            gpu: gpu.to_string(),
            best_strategy: sel.best.schedule.kind(),
            best_chunks: sel.best.schedule.chunks(),
            time_seconds: std::array::from_fn(|i| per[i].total_seconds),
            chunks: std::array::from_fn(|i| per[i].schedule.chunks()),
            ratio_second_best: sel.ratio_second_best,
            ratio_worst: sel.ratio_worst,
            footprint: std::array::from_fn(|i| per[i].footprint_bytes),
            l2_hit: std::array::from_fn(|i| per[i].l2_hit),
        };
        row.check()?;
        Ok(row)
    }

    /// The winner must be the fastest of its own time columns.
    fn check(&self) -> Result<(), HarnessError> {
        let best = self.time_seconds[DataflowKind::ALL.iter().position(|&k| k == self.best_strategy).unwrap()];
        let fastest = self.time_seconds.iter().copied().fold(f64::INFINITY, f64::min);
        if best > fastest * (1.0 + crate::model::TIE_TOLERANCE) || self.ratio_second_best < 1.0 || self.ratio_worst < 1.0 {
            return Err(HarnessError::Inconsistent(format!(
                "row dnum={} n={} l={} gpu={}: winner is not the argmin",
                self.dnum, self.n, self.l, self.gpu
            )));
        }
        Ok(())
    }

    fn csv_fields(&self) -> Vec<String> {
        let us = |t: f64| format!("{:.4}", t * 1e6);
        let mut f = vec![
            self.dnum.to_string(),
            self.n.to_string(),
            self.l.to_string(),
            self.gpu.clone(),
            self.best_strategy.to_string(),
            self.best_chunks.to_string(),
        ];
        f.extend(self.time_seconds.iter().map(|&t| us(t)));
        f.push(self.chunks[2].to_string());
        f.push(self.chunks[3].to_string());
        f.push(format!("{:.4}", self.ratio_second_best));
        f.push(format!("{:.4}", self.ratio_worst));
        f.extend(self.footprint.iter().map(u64::to_string));
        f.extend(self.l2_hit.iter().map(|h| format!("{h:.4}")));
        f
    }
}

/// Schedules the sweep considers: both bulk strategies plus the configured chunk range.
pub fn sweep_schedules(cfg: &Config) -> Vec<ScheduleSpec> {
    ScheduleSpec::all()
        .into_iter()
        .filter(|s| !s.kind().is_chunked() || (cfg.sweep.chunks_min..=cfg.sweep.chunks_max).contains(&s.chunks()))
        .collect()
}

/// Grid points in report order: GPU, then dnum, then N, then L.
pub fn sweep_points(cfg: &Config) -> Result<Vec<(GpuSpec, ParamShape)>, HarnessError> {
    let s = &cfg.sweep;
    let mut out = Vec::new();
    for name in &s.gpu_presets {
        let gpu = cfg.gpu(name)?;
        for &dnum in &s.dnum_values {
            for &n in &s.n_values {
                for &l in &s.l_values {
                    if s.exclusions.contains(&(l, dnum)) {
                        continue;
                    }
                    let shape = ParamShape::new(n, l, dnum).map_err(|e| HarnessError::Config(e.to_string()))?;
                    out.push((gpu.clone(), shape));
                }
            }
        }
    }
    Ok(out)
}

pub fn evaluate_point(cfg: &Config, gpu: &GpuSpec, shape: &ParamShape) -> Result<ReportRow, HarnessError> {
    let inputs = ModelInputs { gpu: gpu.clone(), constants: cfg.constants, costs: cfg.costs };
    let all = sweep_schedules(cfg)
        .into_iter()
        .map(|s| predict_time(shape, s, &inputs))
        .collect::<Result<Vec<_>, _>>()?;
    ReportRow::from_selection(shape, &gpu.name, &select_from(all)?)
}

/// Evaluates the grid in parallel; rows come back in [`sweep_points`] order.
pub fn run_sweep(cfg: &Config) -> Result<Vec<ReportRow>, HarnessError> {
    let points = sweep_points(cfg)?;
    points.par_iter().map(|(g, s)| evaluate_point(cfg, g, s)).collect()
}

pub fn to_csv(rows: &[ReportRow]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.csv_fields()).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}

fn pow2(n: usize) -> String {
    format!("2^{}", n.trailing_zeros())
}

/// One table per GPU: rows are dnum, columns are `(N, L)`, cells show the
/// winner with its ratios to the second-best and the worst strategy.
pub fn to_markdown(rows: &[ReportRow], cfg: &Config) -> String {
    let s = &cfg.sweep;
    let mut out = String::from("# Best KeySwitch dataflow per parameter set\n\n");
    out.push_str("Cells: winner (chunks) / second-best ratio / worst ratio. `excluded` marks insecure (L, dnum).\n");
    for name in &s.gpu_presets {
        let gpu_name = cfg.gpu(name).map(|g| g.name).unwrap_or_else(|_| name.clone());
        let _ = write!(out, "\n## {gpu_name}\n\n| dnum |");
        for &n in &s.n_values {
            for &l in &s.l_values {
                let _ = write!(out, " N={} L={l} |", pow2(n));
            }
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(s.n_values.len() * s.l_values.len()));
        out.push('\n');
        for &dnum in &s.dnum_values {
            let _ = write!(out, "| {dnum} |");
            for &n in &s.n_values {
                for &l in &s.l_values {
                    let cell = rows
                        .iter()
                        .find(|r| r.gpu == gpu_name && r.dnum == dnum && r.n == n && r.l == l)
                        .map(|r| {
                            let strat = if r.best_strategy.is_chunked() {
                                format!("{}({})", r.best_strategy, r.best_chunks)
                            } else {
                                r.best_strategy.to_string()
                            };
                            format!("{strat} / {:.2}x / {:.2}x", r.ratio_second_best, r.ratio_worst)
                        })
                        .unwrap_or_else(|| "excluded".to_string());
                    let _ = write!(out, " {cell} |");
                }
            }
            out.push('\n');
        }
    }
    out
}
