//! `ksflow`: verify, trace, predict and sweep KeySwitch dataflows.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ksflow::ckks::ParamShape;
use ksflow::dataflow::{DataflowKind, ExecutionTrace, ScheduleSpec};
use ksflow::harness::{run_sweep, run_verify, sweep_schedules, to_csv, to_markdown, Config, HarnessError, CONFIG_ENV};
use ksflow::model::{pick_best, predict_time, select_from, CycleBreakdown, ModelInputs, Prediction};

#[derive(Parser)]
#[command(name = "ksflow", version, about = "KeySwitch dataflow verification and GPU cost model")]
struct Cli {
    /// JSON configuration file; built-in defaults apply when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// RNG seed for numeric checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Numeric checks: NTT oracle, KeySwitch identity, schedule equivalence.
    Verify(VerifyArgs),
    /// Export the kernel launch sequence of one schedule.
    Trace(TraceArgs),
    /// Cycle breakdown for one schedule, or for all four strategies.
    Predict(PredictArgs),
    /// Model-only sweep over the configured grid, written as CSV and markdown.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ShapeArgs {
    /// Ring degree N.
    #[arg(long, default_value_t = 1 << 16)]
    n: usize,
    /// Maximum level L.
    #[arg(long, default_value_t = 30)]
    levels: usize,
    #[arg(long, default_value_t = 4)]
    dnum: usize,
}

impl ShapeArgs {
    fn shape(&self) -> Result<ParamShape, Failure> {
        ParamShape::new(self.n, self.levels, self.dnum).map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Overrides `verify.n` from the configuration.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    dnum: Option<usize>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Permit N above the desk-scale guard.
    #[arg(long)]
    allow_large_n: bool,
    /// Directory receiving verify.txt and verify.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Level to trace at; defaults to L.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    schedule: DataflowKind,
    /// Chunk count for DSOC and DPOC.
    #[arg(long)]
    chunks: Option<usize>,
    /// Directory receiving trace.txt and trace.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value = "RTX4090")]
    gpu: String,
    /// Restrict to one strategy; all four are compared when omitted.
    #[arg(long)]
    schedule: Option<DataflowKind>,
    /// Fix the chunk count instead of sweeping the configured range.
    #[arg(long)]
    chunks: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory receiving sweep.csv and sweep.md.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Restrict to these GPUs; repeatable.
    #[arg(long)]
    gpu: Vec<String>,
}

enum Failure {
    Check(String),
    Usage(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = Config::resolve(cli.config.as_deref())?;
    match cli.command {
        Command::Verify(a) => verify(config, cli.seed, a),
        Command::Trace(a) => trace(&config, a),
        Command::Predict(a) => predict(&config, a),
        Command::Sweep(a) => sweep(config, a),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn verify(config: Config, seed: u64, a: VerifyArgs) -> Result<(), Failure> {
    let mut v = config.verify;
    v.n = a.n.unwrap_or(v.n);
    v.max_level = a.levels.unwrap_or(v.max_level);
    v.dnum = a.dnum.unwrap_or(v.dnum);
    if let Some(t) = a.trials {
        v.trials = t as usize;
    }
    let report = run_verify(&v, seed, a.allow_large_n)?;
    let (text, json) = (report.to_text(), report.to_json());
    if let Some(dir) = &a.out {
        write_file(dir, "verify.txt", &text)?;
        write_file(dir, "verify.json", &json)?;
    }
    print!("{}", if a.json { json + "\n" } else { text });
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Check(failed.join(", ")))
    }
}

fn trace(config: &Config, a: TraceArgs) -> Result<(), Failure> {
    let shape = a.shape.shape()?;
    let level = a.level.unwrap_or(shape.max_level);
    if level == 0 || level > shape.max_level {
        return Err(Failure::Usage(format!("--level must lie in 1..={}", shape.max_level)));
    }
    let chunks = match (a.schedule.is_chunked(), a.chunks) {
        (true, None) => return Err(Failure::Usage(format!("{} needs --chunks", a.schedule))),
        (_, c) => c.unwrap_or(1),
    };
    let spec = ScheduleSpec::new(a.schedule, chunks).map_err(|e| Failure::Usage(e.to_string()))?;
    let trace = ExecutionTrace::symbolic(&shape, level, spec, &config.costs);
    let txt = write_file(&a.out, "trace.txt", &trace.to_text())?;
    let json = write_file(&a.out, "trace.json", &trace.to_json())?;
    let s = trace.stats();
    println!("schedule {spec} at N={} L={} dnum={} level={level}", shape.n, shape.max_level, shape.dnum);
    println!("launches {}", s.launch_count);
    println!("mean_warps_per_kernel {:.2}", s.mean_warps_per_kernel);
    println!("total_warp_insts {}", s.total_warp_insts);
    println!("footprint_bytes {}", s.peak_footprint);
    for (kind, count) in &s.launches_per_kind {
        println!("launches[{kind}] {count}");
    }
    println!("wrote {} and {}", txt.display(), json.display());
    Ok(())
}

fn breakdown_row(out: &mut String, label: &str, kind: &str, b: &CycleBreakdown) {
    let _ = write!(out, "{label:<12} {kind:<7}");
    for v in b.components() {
        let _ = write!(out, " {v:>14.1}");
    }
    let _ = writeln!(out, " {:>14.1}", b.c_kernel);
}

fn predict(config: &Config, a: PredictArgs) -> Result<(), Failure> {
    let shape = a.shape.shape()?;
    let gpu = config.gpu(&a.gpu)?;
    let inputs = ModelInputs { gpu, constants: config.constants, costs: config.costs };
    let mut candidates: Vec<ScheduleSpec> = match a.chunks {
        Some(c) => DataflowKind::ALL
            .iter()
            .map(|&k| ScheduleSpec::new(k, if k.is_chunked() { c } else { 1 }))
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Usage(e.to_string()))?,
        None => sweep_schedules(config),
    };
    if let Some(k) = a.schedule {
        candidates.retain(|s| s.kind() == k);
    }
    let all: Vec<Prediction> = candidates
        .into_iter()
        .map(|s| predict_time(&shape, s, &inputs))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (rows, best) = match a.schedule {
        Some(_) => {
            let best = pick_best(&all).cloned().expect("at least one candidate");
            (vec![best.clone()], best)
        }
        None => {
            let sel = select_from(all).map_err(|e| Failure::Usage(e.to_string()))?;
            (sel.per_strategy, sel.best)
        }
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("predictions serialize"));
        return Ok(());
    }
    let mut out = format!(
        "GPU {} N={} L={} dnum={}\n{:<12} {:<7}",
        inputs.gpu.name, shape.n, shape.max_level, shape.dnum, "schedule", "kernel"
    );
    for h in ["c_base", "s_com_data", "s_mem_data", "c_idle", "s_com_struct", "s_mem_struct", "s_noc", "s_dram", "c_kernel"] {
        let _ = write!(out, " {h:>14}");
    }
    out.push('\n');
    for p in &rows {
        let label = p.schedule.to_string();
        for (kind, b) in &p.per_kind {
            breakdown_row(&mut out, &label, kind.name(), b);
        }
        breakdown_row(&mut out, &label, "total", &p.total);
    }
    out.push('\n');
    for p in &rows {
        let marker = if p.schedule == best.schedule { "  <- best" } else { "" };
        let _ = writeln!(
            out,
            "{:<12} launches={:<4} overhead_s={:.3e} kernel_s={:.3e} total_s={:.3e} footprint={} l2_hit={:.3}{marker}",
            p.schedule.to_string(),
            p.launch_count,
            p.launch_overhead_seconds,
            p.kernel_seconds,
            p.total_seconds,
            p.footprint_bytes,
            p.l2_hit
        );
    }
    print!("{out}");
    Ok(())
}

fn sweep(mut config: Config, a: SweepArgs) -> Result<(), Failure> {
    if !a.gpu.is_empty() {
        for g in &a.gpu {
            config.gpu(g)?;
        }
        config.sweep.gpu_presets = a.gpu;
    }
    let rows = run_sweep(&config)?;
    let csv = write_file(&a.out, "sweep.csv", &to_csv(&rows)?)?;
    let md = write_file(&a.out, "sweep.md", &to_markdown(&rows, &config))?;
    println!("{} rows", rows.len());
    for kind in DataflowKind::ALL {
        println!("best {kind}: {}", rows.iter().filter(|r| r.best_strategy == kind).count());
    }
    println!("wrote {} and {}", csv.display(), md.display());
    Ok(())
}
