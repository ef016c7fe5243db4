use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{ArgAction, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use xdiff_lab::config::{parse_config_with, Mode, RunConfig};
use xdiff_lab::diagnostics::{default_test_set, weak_residual, DiagnosticsSink};
use xdiff_lab::fast::{run_fast, FastState};
use xdiff_lab::grid::integrate;
use xdiff_lab::harness::{
    eps_sweep, refine_study_with_ratio, stability_experiment, EstimateMonitor, MonitorReport,
    SweepOptions,
};
use xdiff_lab::io::{save_field_csv, save_json, Document};
use xdiff_lab::model::{FastReactionConfig, Regime};
use xdiff_lab::solver::{History, Observer};
use xdiff_lab::xdiff::{run_cross, CrossDiffState};
use xdiff_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "xdiff-lab", version, about = "Cross-diffusion and fast-reaction experiments")]
struct Cli {
    #[command(subcommand)]
    mode: Command,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`, default `out`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixed reduction order and report layout; reports are byte-identical across invocations
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    deterministic: bool,
    /// Worker threads for independent runs (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accept exponents outside both supported regimes
    #[arg(long, global = true)]
    allow_unsupported: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate the cross-diffusion system
    RunCross,
    /// Integrate the fast-reaction system at `fast.epsilon`
    RunFast,
    /// Compare fast-reaction runs over `fast.eps_list` with the direct solver
    SweepEps,
    /// Self-convergence study of the direct solver
    Refine,
    /// Two-run stability experiment over `stability.deltas`
    Stability,
    /// Diagnostics streams and weak-formulation residual
    Diagnose,
}

impl From<Command> for Mode {
    fn from(c: Command) -> Mode {
        match c {
            Command::RunCross => Mode::RunCross,
            Command::RunFast => Mode::RunFast,
            Command::SweepEps => Mode::SweepEps,
            Command::Refine => Mode::Refine,
            Command::Stability => Mode::Stability,
            Command::Diagnose => Mode::Diagnose,
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    regime: Regime,
    steps: usize,
    t_end: f64,
    snapshot_times: Vec<f64>,
    final_mass_u: f64,
    monitor: &'a MonitorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    fast: Option<FastSummary>,
}

#[derive(Serialize)]
struct FastSummary {
    epsilon: f64,
    d_a: f64,
    d_b: f64,
    phi1: f64,
    v1: f64,
    h0: f64,
}

impl From<&FastReactionConfig> for FastSummary {
    fn from(f: &FastReactionConfig) -> Self {
        Self { epsilon: f.epsilon, d_a: f.d_a, d_b: f.d_b, phi1: f.phi1, v1: f.v1, h0: f.h0 }
    }
}

#[derive(Serialize)]
struct DiagnoseReport {
    regime: Regime,
    weak_residual: f64,
    test_functions: usize,
    cross_monitor: MonitorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    fast_monitor: Option<MonitorReport>,
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
    metadata: serde_json::Value,
}

impl Context {
    fn write_report<T: Serialize>(&self, kind: &str, name: &str, report: &T) -> Result<()> {
        let path = self.out.join(name);
        save_json(&Document::new(kind, report, self.metadata.clone()), &path)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn write_ndjson(&self, name: &str, sink: &DiagnosticsSink<'_>) -> Result<()> {
        let file = fs::File::create(self.out.join(name))?;
        let mut w = std::io::BufWriter::new(file);
        sink.write_ndjson(&mut w)?;
        std::io::Write::flush(&mut w)?;
        Ok(())
    }
}

fn write_cross_snapshots(dir: &Path, history: &History<CrossDiffState>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut times = String::from("index,t\n");
    for (i, s) in history.snapshots.iter().enumerate() {
        save_field_csv(&s.u, &dir.join(format!("u_{i:05}.csv")))?;
        save_field_csv(&s.v, &dir.join(format!("v_{i:05}.csv")))?;
        times.push_str(&format!("{i},{:.16e}\n", s.t));
    }
    fs::write(dir.join("times.csv"), times)?;
    Ok(())
}

fn write_fast_snapshots(dir: &Path, history: &History<FastState>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut times = String::from("index,t\n");
    for (i, s) in history.snapshots.iter().enumerate() {
        save_field_csv(&s.u_a, &dir.join(format!("u_a_{i:05}.csv")))?;
        save_field_csv(&s.u_b, &dir.join(format!("u_b_{i:05}.csv")))?;
        save_field_csv(&s.total_u(), &dir.join(format!("u_{i:05}.csv")))?;
        save_field_csv(&s.v, &dir.join(format!("v_{i:05}.csv")))?;
        times.push_str(&format!("{i},{:.16e}\n", s.t));
    }
    fs::write(dir.join("times.csv"), times)?;
    Ok(())
}

fn cross_with_diagnostics<'a>(
    ctx: &'a Context,
    snapshot_every: usize,
) -> Result<(History<CrossDiffState>, DiagnosticsSink<'a>, MonitorReport)> {
    let p = &ctx.cfg.problem;
    let init = p.cross_initial()?;
    let mut sink = DiagnosticsSink::new(ctx.cfg.diagnostics.p_list.clone(), None, ctx.cfg.output.diagnostics_every);
    let mut mon = EstimateMonitor::new(
        &p.params,
        None,
        init.v.max(),
        integrate(&init.u),
        &p.grid,
        &p.solver,
        ctx.cfg.defect_p(),
        Vec::new(),
    );
    let mut obs = |n: usize, s: &CrossDiffState| {
        sink.observe(n, s)?;
        mon.observe(n, s)
    };
    let history = run_cross(&init, &p.params, &p.solver, snapshot_every, &mut obs)?;
    Ok((history, sink, mon.report))
}

fn fast_with_diagnostics<'a>(
    ctx: &Context,
    frc: &'a FastReactionConfig,
) -> Result<(History<FastState>, DiagnosticsSink<'a>, MonitorReport)> {
    let p = &ctx.cfg.problem;
    let init = p.fast_initial(frc)?;
    // entropy and defect columns use the configured defect exponent first
    let mut p_list = vec![ctx.cfg.defect_p()];
    p_list.extend(ctx.cfg.diagnostics.p_list.iter().copied().filter(|&q| q != ctx.cfg.defect_p()));
    let mut sink = DiagnosticsSink::new(p_list, Some(frc), ctx.cfg.output.diagnostics_every);
    let mut mon = EstimateMonitor::new(
        &p.params,
        Some(frc),
        init.v.max(),
        integrate(&init.total_u()),
        &p.grid,
        &p.solver,
        ctx.cfg.defect_p(),
        ctx.cfg.dissipation_ps(),
    );
    let mut obs = |n: usize, s: &FastState| {
        sink.observe(n, s)?;
        mon.observe(n, s)
    };
    let history = run_fast(&init, &p.params, frc, &p.solver, p.snapshot_every, &mut obs)?;
    Ok((history, sink, mon.report))
}

fn execute(mode: Mode, ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let p = &cfg.problem;
    match mode {
        Mode::RunCross => {
            let (history, sink, monitor) = cross_with_diagnostics(ctx, p.snapshot_every)?;
            if cfg.output.write_snapshots {
                write_cross_snapshots(&ctx.out.join("snapshots"), &history)?;
            }
            ctx.write_ndjson("diagnostics.ndjson", &sink)?;
            let report = RunReport {
                regime: cfg.regime(),
                steps: monitor.steps,
                t_end: history.last().t,
                snapshot_times: history.times(),
                final_mass_u: integrate(&history.last().u),
                monitor: &monitor,
                fast: None,
            };
            ctx.write_report("run-cross", "report.json", &report)
        }
        Mode::RunFast => {
            let eps = cfg.fast.epsilon.expect("validated");
            let frc = p.fast_config(eps)?;
            let (history, sink, monitor) = fast_with_diagnostics(ctx, &frc)?;
            if cfg.output.write_snapshots {
                write_fast_snapshots(&ctx.out.join("snapshots"), &history)?;
            }
            ctx.write_ndjson("diagnostics.ndjson", &sink)?;
            let report = RunReport {
                regime: cfg.regime(),
                steps: monitor.steps,
                t_end: history.last().t,
                snapshot_times: history.times(),
                final_mass_u: integrate(&history.last().total_u()),
                monitor: &monitor,
                fast: Some((&frc).into()),
            };
            ctx.write_report("run-fast", "report.json", &report)
        }
        Mode::SweepEps => {
            let opts = SweepOptions {
                eps_list: cfg.fast.eps_list.clone().expect("validated"),
                defect_p: cfg.defect_p(),
                dissipation_ps: cfg.dissipation_ps(),
            };
            let report = eps_sweep(p, &opts)?;
            for (eps, msg) in &report.failures {
                log::warn!("run at epsilon {eps} failed: {msg}");
            }
            ctx.write_report("sweep-eps", "sweep_report.json", &report)
        }
        Mode::Refine => {
            let r = cfg.refine.expect("validated");
            let report = refine_study_with_ratio(p, r.levels, r.ratio)?;
            ctx.write_report("refine", "refine_report.json", &report)
        }
        Mode::Stability => {
            let deltas = cfg.stability.as_ref().expect("validated");
            let report = stability_experiment(p, deltas)?;
            ctx.write_report("stability", "stability_report.json", &report)
        }
        Mode::Diagnose => {
            // every step is stored so the time quadrature of the weak residual is resolved
            let (history, sink, cross_monitor) = cross_with_diagnostics(ctx, 1)?;
            ctx.write_ndjson("diagnostics_cross.ndjson", &sink)?;
            let tests = default_test_set(&p.grid, history.last().t - history.snapshots[0].t);
            let residual = weak_residual(&history, &p.params, &tests)?;
            let fast_monitor = match cfg.fast.epsilon {
                Some(eps) => {
                    let frc = p.fast_config(eps)?;
                    let (_, sink, monitor) = fast_with_diagnostics(ctx, &frc)?;
                    ctx.write_ndjson("diagnostics_fast.ndjson", &sink)?;
                    Some(monitor)
                }
                None => None,
            };
            let report = DiagnoseReport {
                regime: cfg.regime(),
                weak_residual: residual,
                test_functions: tests.len(),
                cross_monitor,
                fast_monitor,
            };
            ctx.write_report("diagnose", "diagnose_report.json", &report)
        }
    }
}

fn load(cli: &Cli, mode: Mode) -> Result<Context> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Parameter("--config <path> is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = parse_config_with(&text, cli.allow_unsupported)?;
    cfg.validate_for(mode)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "mode": mode.as_str(),
        "config": path.display().to_string(),
        "deterministic": cli.deterministic,
        "threads": cli.threads,
        "started_unix": started,
    });
    Ok(Context { cfg, out, metadata })
}

fn run(cli: &Cli) -> Result<()> {
    let mode: Mode = cli.mode.into();
    let ctx = load(cli, mode)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Parameter("--threads must be ≥ 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let clock = Instant::now();
    pool.install(|| execute(mode, &ctx))?;
    log::info!("{mode} finished in {:.2?}", clock.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code: u8 = if err.is_validation() { 1 } else { 2 };
            let details = match &err {
                Error::Config(list) => serde_json::to_value(list).unwrap_or_default(),
                _ => serde_json::Value::Null,
            };
            let doc = json!({
                "error": {
                    "kind": err.kind(),
                    "message": err.to_string(),
                    "exit_code": code,
                    "details": details,
                }
            });
            eprintln!("{doc}");
            ExitCode::from(code)
        }
    }
}
