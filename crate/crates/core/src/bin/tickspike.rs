//! Command-line pipeline driver: synthesize or load ticks, preprocess,
//! train, tune, backtest and report. Every command is deterministic for a
//! fixed config and seed.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use tickspike::backtest::{write_equity_csv, write_trades_csv, ReportRow, StrategyConfig};
use tickspike::engine::{Checkpoint, ModelVariant};
use tickspike::error::Error;
use tickspike::hyperopt::{
    ObjectiveContext, ObjectiveMetric, SearchSpace, StudyResult, TpeConfig, Trial,
};
use tickspike::market::{generate_synthetic_ticks, load_ticks, write_ticks_csv, SyntheticConfig};
use tickspike::metrics::DEFAULT_ALPHA;
use tickspike::pipeline::{
    build_stream, fit_and_encode, prepare_day, rolling_experiment, BaselineConfig, DayInput,
    DayResult, ModelSpec, PrepConfig,
};
use tickspike::plasticity::TrainingLog;
use tickspike::seed;
use tickspike::supervised::write_loss_history;

/// Declarative run configuration; CLI flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    version: u32,
    seed: u64,
    out_dir: PathBuf,
    data: DataSource,
    prep: PrepConfig,
    model: Option<ModelSpec>,
    /// Path to a study file whose best trial supplies the model.
    study_file: Option<PathBuf>,
    objective: ObjectiveMetric,
    tune: TuneConfig,
    strategy: StrategyConfig,
    baselines: BaselineConfig,
    scaling_trades_per_day: usize,
    /// Day index used by the `train` command.
    train_day: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DataSource {
    Synthetic(SyntheticConfig),
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct TuneConfig {
    variant: ModelVariant,
    n_trials: usize,
    batch_size: usize,
    gamma: f64,
    n_startup: usize,
    n_candidates: usize,
    /// Trials evaluated concurrently per wave (1 = strictly sequential
    /// conditioning).
    parallel_trials: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            variant: ModelVariant::Model1,
            n_trials: 100,
            batch_size: 5000,
            gamma: 0.25,
            n_startup: 10,
            n_candidates: 24,
            parallel_trials: 1,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: 1,
            seed: 42,
            out_dir: PathBuf::from("out"),
            data: DataSource::Synthetic(SyntheticConfig::default()),
            prep: PrepConfig::default(),
            model: None,
            study_file: None,
            objective: ObjectiveMetric::Psa,
            tune: TuneConfig::default(),
            strategy: StrategyConfig::default(),
            baselines: BaselineConfig::default(),
            scaling_trades_per_day: 1000,
            train_day: 0,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "tickspike",
    version,
    about = "Spiking-network price-spike forecasting pipeline"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed override; all substreams derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write synthetic tick CSVs, one per day.
    Synth,
    /// Aggregate, normalize and encode every day; write artifacts.
    Preprocess,
    /// Train the configured model on one day and checkpoint it.
    Train,
    /// Run a tuning study and persist every trial.
    Tune {
        /// Continue an existing study file, trial ids stay monotone.
        #[arg(long)]
        resume: bool,
    },
    /// Rolling day-by-day experiment with naive and random baselines.
    Backtest,
    /// Summarize artifacts and emit plot-data CSVs.
    Report,
}

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::InvalidParam(_) => 1,
        Error::NoTicks
        | Error::EmptyDay
        | Error::InsufficientHistory { .. }
        | Error::CsvRow { .. }
        | Error::NonMonotoneTimestamp { .. }
        | Error::Container(_)
        | Error::MissingArtifact(_)
        | Error::ZeroPrice(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap help/version are success paths
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if cfg.version != 1 {
        return Err(Error::InvalidConfig(format!(
            "unsupported config version {}",
            cfg.version
        )));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(&cli)?;
    match cli.cmd {
        Cmd::Synth => cmd_synth(&cfg),
        Cmd::Preprocess => cmd_preprocess(&cfg),
        Cmd::Train => cmd_train(&cfg),
        Cmd::Tune { resume } => cmd_tune(&cfg, resume),
        Cmd::Backtest => cmd_backtest(&cfg),
        Cmd::Report => cmd_report(&cfg),
    }
}

/// Load the configured data source as per-day tick sequences.
fn load_days(cfg: &RunConfig) -> Result<Vec<DayInput>, Error> {
    match &cfg.data {
        DataSource::Synthetic(synth) => {
            let synth = SyntheticConfig {
                seed: seed::derive(cfg.seed, "synth"),
                ..synth.clone()
            };
            Ok(generate_synthetic_ticks(&synth)?
                .into_iter()
                .map(|d| DayInput {
                    date: d.date,
                    ticks: d.ticks,
                })
                .collect())
        }
        DataSource::Csv { path } => {
            // a directory means one or more per-day CSVs (as written by
            // `synth`); days with the same date merge across files
            let files: Vec<PathBuf> = if path.is_dir() {
                let mut v: Vec<PathBuf> = std::fs::read_dir(path)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                    .collect();
                v.sort();
                if v.is_empty() {
                    return Err(Error::MissingArtifact(format!(
                        "no .csv files in {}",
                        path.display()
                    )));
                }
                v
            } else {
                vec![path.clone()]
            };
            let mut by_date: std::collections::BTreeMap<String, Vec<tickspike::market::Tick>> =
                std::collections::BTreeMap::new();
            for file in files {
                for day in load_ticks(&file)? {
                    by_date.entry(day.date).or_default().extend(day.ticks);
                }
            }
            Ok(by_date
                .into_iter()
                .map(|(date, ticks)| DayInput { date, ticks })
                .collect())
        }
    }
}

fn cmd_synth(cfg: &RunConfig) -> Result<(), Error> {
    let DataSource::Synthetic(synth) = &cfg.data else {
        return Err(Error::InvalidConfig(
            "synth requires a synthetic data source".into(),
        ));
    };
    let synth = SyntheticConfig {
        seed: seed::derive(cfg.seed, "synth"),
        ..synth.clone()
    };
    let days = generate_synthetic_ticks(&synth)?;
    let dir = cfg.out_dir.join("ticks");
    std::fs::create_dir_all(&dir)?;
    let mut total_ticks = 0usize;
    let mut total_bursts = 0usize;
    for day in &days {
        write_ticks_csv(
            dir.join(format!("day_{}.csv", day.date)),
            &day.date,
            &day.ticks,
        )?;
        total_ticks += day.ticks.len();
        total_bursts += day.burst_starts.len();
    }
    println!(
        "synth: {} days, {} ticks, {} injected bursts -> {}",
        days.len(),
        total_ticks,
        total_bursts,
        dir.display()
    );
    Ok(())
}

fn cmd_preprocess(cfg: &RunConfig) -> Result<(), Error> {
    let days = load_days(cfg)?;
    let kind = match &cfg.model {
        Some(spec) => spec.feature_kind(),
        None => tickspike::pipeline::FeatureKind::Differences {
            lags: cfg.prep.lags,
        },
    };
    let dir = cfg.out_dir.join("prep");
    std::fs::create_dir_all(&dir)?;
    for (di, day) in days.iter().enumerate() {
        let p = prepare_day(day, &cfg.prep, kind)?;
        let (tensor, norm) = fit_and_encode(
            &p,
            &cfg.prep,
            seed::derive_indexed(cfg.seed, "encode", di as u64),
        )?;
        let stem = dir.join(format!("day_{}", day.date));
        let mut vwap_csv = std::fs::File::create(stem.with_extension("vwap.csv"))?;
        writeln!(vwap_csv, "index,vwap")?;
        for (i, v) in p.vwap.iter().enumerate() {
            writeln!(vwap_csv, "{i},{v}")?;
        }
        p.raw_features.save(stem.with_extension("feat"))?;
        tensor.save(stem.with_extension("spk"))?;
        serde_json::to_writer_pretty(
            std::io::BufWriter::new(std::fs::File::create(stem.with_extension("norm.json"))?),
            &norm,
        )?;
        println!(
            "prep: {} -> {} bars, {} rows x {} channels x {} steps, {} spikes",
            day.date,
            p.vwap.len(),
            tensor.n_timestamps(),
            tensor.n_channels(),
            tensor.timesteps(),
            tensor.total_spikes()
        );
    }
    Ok(())
}

fn default_model(cfg: &RunConfig) -> Result<ModelSpec, Error> {
    match (&cfg.model, &cfg.study_file) {
        (_, Some(path)) => model_from_study(path),
        (Some(spec), None) => Ok(spec.clone()),
        (None, None) => Err(Error::InvalidConfig(
            "config needs either a model spec or a study file".into(),
        )),
    }
}

fn model_from_study(path: &Path) -> Result<ModelSpec, Error> {
    if !path.exists() {
        return Err(Error::MissingArtifact(format!(
            "study file {}",
            path.display()
        )));
    }
    let study = StudyResult::read_ndjson(std::fs::File::open(path)?)?;
    let best = study.best_trial().ok_or(Error::AllTrialsFailed)?;
    // the parameter set identifies the architecture: only the extended
    // model carries inhibitory-window and input-width entries
    let variant = if best.params.contains_key("b_plus") {
        ModelVariant::Model2
    } else {
        ModelVariant::Model1
    };
    let spec = tickspike::hyperopt::spec_from_params(variant, &best.params)?;
    Ok(ModelSpec::Unsupervised(spec))
}

fn cmd_train(cfg: &RunConfig) -> Result<(), Error> {
    let days = load_days(cfg)?;
    let day = days.get(cfg.train_day).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "train_day {} out of range ({} days)",
            cfg.train_day,
            days.len()
        ))
    })?;
    let spec = default_model(cfg)?;
    let p = prepare_day(day, &cfg.prep, spec.feature_kind())?;
    let (tensor, _) = fit_and_encode(
        &p,
        &cfg.prep,
        seed::derive_indexed(cfg.seed, "encode", cfg.train_day as u64),
    )?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let labels = p.row_labels();
    match &spec {
        ModelSpec::Unsupervised(u) => {
            let topo = tickspike::pipeline::build_topology(u)?;
            let mut net = tickspike::engine::init_network(
                &topo,
                u.lif,
                seed::derive_indexed(cfg.seed, "init", cfg.train_day as u64),
                tickspike::engine::InitConfig::default(),
            )?;
            let log: TrainingLog = tickspike::plasticity::train_unsupervised(
                &mut net,
                &tensor,
                0..tensor.n_timestamps(),
                &u.stdp,
                100,
            )?;
            log.write_csv(std::fs::File::create(cfg.out_dir.join("train_log.csv"))?)?;
            Checkpoint::from_network(&net, u.d_thresh).save(cfg.out_dir.join("model.json"))?;
            println!(
                "train: {} on {} rows -> {} (log train_log.csv)",
                day.date,
                tensor.n_timestamps(),
                cfg.out_dir.join("model.json").display()
            );
        }
        ModelSpec::Supervised(tc) => {
            let topo = tickspike::engine::Topology::model3(tensor.n_channels(), tc.n_hidden)?;
            let lif = tickspike::engine::LifParams::new(tc.beta, tc.v_thresh)?;
            let mut net = tickspike::engine::init_network(
                &topo,
                lif,
                seed::derive_indexed(cfg.seed, "init", cfg.train_day as u64),
                tickspike::engine::InitConfig::default(),
            )?;
            let history = tickspike::supervised::train_supervised(
                &mut net,
                &tensor,
                &labels,
                tc,
                seed::derive_indexed(cfg.seed, "train", cfg.train_day as u64),
            )?;
            write_loss_history(
                &history,
                std::fs::File::create(cfg.out_dir.join("loss_history.csv"))?,
            )?;
            Checkpoint::from_network(&net, 0).save(cfg.out_dir.join("model.json"))?;
            println!(
                "train: {} supervised epochs={} final_acc={:.3} -> {}",
                day.date,
                history.len(),
                history.last().map(|e| e.train_accuracy).unwrap_or(0.0),
                cfg.out_dir.join("model.json").display()
            );
        }
    }
    Ok(())
}

fn cmd_tune(cfg: &RunConfig, resume: bool) -> Result<(), Error> {
    let days = load_days(cfg)?;
    let space = match cfg.tune.variant {
        ModelVariant::Model1 => SearchSpace::model1(),
        ModelVariant::Model2 => {
            // the sampled input width must be encodable in the stream
            if cfg.prep.lags < 10 {
                return Err(Error::InvalidConfig(format!(
                    "tuning the extended model samples up to 10 input lags; set prep.lags to at least 10 (got {})",
                    cfg.prep.lags
                )));
            }
            SearchSpace::model2()
        }
        ModelVariant::Model3 => {
            return Err(Error::InvalidConfig(
                "tuning targets the unsupervised models".into(),
            ))
        }
    };
    let stream = build_stream(&days, &cfg.prep, cfg.seed)?;
    let ctx = ObjectiveContext {
        stream: &stream,
        variant: cfg.tune.variant,
        metric: cfg.objective,
        batch_size: cfg.tune.batch_size,
        alpha: DEFAULT_ALPHA,
    };
    let tpe_cfg = TpeConfig {
        gamma: cfg.tune.gamma,
        n_startup: cfg.tune.n_startup,
        n_candidates: cfg.tune.n_candidates,
        ..TpeConfig::default()
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let study_path = cfg.out_dir.join("study.ndjson");

    let mut id_offset = 0usize;
    let mut existing: Vec<Trial> = Vec::new();
    if resume && study_path.exists() {
        let prior = StudyResult::read_ndjson(std::fs::File::open(&study_path)?)?;
        id_offset = prior
            .trials
            .iter()
            .map(|t| t.trial_id + 1)
            .max()
            .unwrap_or(0);
        existing = prior.trials;
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(resume)
        .truncate(!resume)
        .write(true)
        .open(&study_path)?;

    // a resumed study keeps its history for the sampler but draws from a
    // fresh substream so ids and randomness never collide
    let study_seed = if resume && id_offset > 0 {
        seed::derive_indexed(cfg.seed, "tune-resume", id_offset as u64)
    } else {
        seed::derive(cfg.seed, "tune")
    };
    let persist = |file: &mut std::fs::File, t: &Trial| -> Result<(), Error> {
        let mut shifted = t.clone();
        shifted.trial_id += id_offset;
        writeln!(file, "{}", shifted.to_ndjson_line()?)?;
        Ok(())
    };
    let result = if cfg.tune.parallel_trials > 1 {
        if resume {
            return Err(Error::InvalidConfig(
                "resume requires sequential trials (parallel_trials = 1)".into(),
            ));
        }
        tickspike::hyperopt::run_study_parallel(
            &ctx,
            &space,
            cfg.tune.n_trials,
            study_seed,
            &tpe_cfg,
            cfg.tune.parallel_trials,
            |t| persist(&mut file, t),
        )?
    } else {
        tickspike::hyperopt::run_study_with(
            &space,
            cfg.objective,
            cfg.tune.n_trials,
            study_seed,
            &tpe_cfg,
            &existing,
            |trial_id, params| {
                tickspike::hyperopt::evaluate_objective(
                    &ctx,
                    params,
                    trial_id + id_offset,
                    seed::derive_indexed(study_seed, "trial", (trial_id + id_offset) as u64),
                )
            },
            |t| persist(&mut file, t),
        )?
    };
    let best = result.best_trial().expect("non-empty study");
    println!(
        "tune: {} trials ({} total in file), best score {:.4} (srd {:?}) -> {}",
        result.trials.len(),
        id_offset + result.trials.len(),
        best.score,
        best.srd,
        study_path.display()
    );
    Ok(())
}

/// On-disk report document.
#[derive(Debug, Serialize, Deserialize)]
struct ReportDoc {
    version: u32,
    objective: ObjectiveMetric,
    n_test_days: usize,
    scaling_trades_per_day: usize,
    columns: Vec<ReportRow>,
    per_day: Vec<DayResult>,
}

fn cmd_backtest(cfg: &RunConfig) -> Result<(), Error> {
    let days = load_days(cfg)?;
    let spec = default_model(cfg)?;
    let bundle = rolling_experiment(
        &days,
        &spec,
        &cfg.prep,
        &cfg.strategy,
        &cfg.baselines,
        cfg.seed,
        cfg.scaling_trades_per_day,
    )?;
    let dir = cfg.out_dir.join("backtest");
    std::fs::create_dir_all(&dir)?;
    let outcome = bundle.model_outcome.as_ref().expect("model outcome");
    write_trades_csv(
        &outcome.trades,
        &outcome.day_offsets,
        std::fs::File::create(dir.join("trades.csv"))?,
    )?;
    write_equity_csv(
        &outcome.equity,
        std::fs::File::create(dir.join("equity.csv"))?,
    )?;
    let doc = ReportDoc {
        version: 1,
        objective: cfg.objective,
        n_test_days: bundle.per_day.len(),
        scaling_trades_per_day: cfg.scaling_trades_per_day,
        columns: vec![
            bundle.model.clone(),
            bundle.naive.clone(),
            bundle.random.clone(),
        ],
        per_day: bundle.per_day.clone(),
    };
    serde_json::to_writer_pretty(
        std::io::BufWriter::new(std::fs::File::create(dir.join("report.json"))?),
        &doc,
    )?;
    println!(
        "backtest: {} test days, model return {:.4}%, naive {:.4}%, random {:.4}% -> {}",
        doc.n_test_days,
        bundle.model.cumulative_return * 100.0,
        bundle.naive.cumulative_return * 100.0,
        bundle.random.cumulative_return * 100.0,
        dir.join("report.json").display()
    );
    Ok(())
}

const REPORT_COL: usize = 16;

fn format_cell(x: f64) -> String {
    // compounded returns can be astronomically large on strongly trending
    // synthetic data; fall back to scientific notation instead of
    // overflowing the column
    if x.abs() >= 1e7 {
        format!("{x:>REPORT_COL$.3e}")
    } else {
        format!("{x:>REPORT_COL$.4}")
    }
}

fn format_opt(v: Option<f64>, scale: f64) -> String {
    match v {
        Some(x) => format_cell(x * scale),
        None => format!("{:>REPORT_COL$}", "-"),
    }
}

fn cmd_report(cfg: &RunConfig) -> Result<(), Error> {
    let backtest_dir = cfg.out_dir.join("backtest");
    let report_path = backtest_dir.join("report.json");
    let equity_path = backtest_dir.join("equity.csv");
    let missing: Vec<String> = [&report_path, &equity_path]
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingArtifact(format!(
            "expected {} (run `tickspike backtest` first)",
            missing.join(", ")
        )));
    }
    let doc: ReportDoc =
        serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(&report_path)?))?;

    println!(
        "rolling backtest over {} test days (returns scaled to {} trades/day)",
        doc.n_test_days, doc.scaling_trades_per_day
    );
    let mut header = format!("{:<18}", "metric");
    for c in &doc.columns {
        header.push_str(&format!("{:>REPORT_COL$}", c.name));
    }
    println!("{header}");
    let col =
        |f: &dyn Fn(&ReportRow) -> String| -> Vec<String> { doc.columns.iter().map(f).collect() };
    let rows: Vec<(&str, Vec<String>)> = vec![
        (
            "cum_return_%",
            col(&|r| format_cell(r.cumulative_return * 100.0)),
        ),
        ("sharpe", col(&|r| format_opt(r.sharpe, 1.0))),
        (
            "max_drawdown_%",
            col(&|r| format_cell(r.max_drawdown * 100.0)),
        ),
        ("win_rate_%", col(&|r| format_opt(r.win_rate, 100.0))),
        ("profit_factor", col(&|r| format_opt(r.profit_factor, 1.0))),
        (
            "profit_loss_ratio",
            col(&|r| format_opt(r.profit_loss_ratio, 1.0)),
        ),
        ("expectancy_e-6", col(&|r| format_opt(r.expectancy, 1e6))),
        ("n_trades", col(&|r| format_cell(r.n_trades))),
        (
            "scaled_return_%",
            col(&|r| format_opt(r.scaled_cumulative_return, 100.0)),
        ),
        (
            "spike_acc_%",
            col(&|r| {
                r.metrics
                    .as_ref()
                    .map(|m| format_opt(m.spike_accuracy, 100.0))
                    .unwrap_or_else(|| format!("{:>REPORT_COL$}", "-"))
            }),
        ),
    ];
    for (name, cells) in rows {
        println!("{:<18}{}", name, cells.join(""));
    }

    // plot data
    let report_dir = cfg.out_dir.join("report");
    std::fs::create_dir_all(&report_dir)?;
    let mut equity = Vec::new();
    let mut rdr = csv::Reader::from_path(&equity_path)?;
    for rec in rdr.records() {
        let rec = rec?;
        equity.push(
            rec.get(1)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Container("bad equity row".into()))?,
        );
    }
    std::fs::copy(&equity_path, report_dir.join("equity.csv"))?;
    let mut dd = std::fs::File::create(report_dir.join("drawdown.csv"))?;
    writeln!(dd, "timestamp_idx,drawdown")?;
    let mut peak = f64::NEG_INFINITY;
    for (i, v) in equity.iter().enumerate() {
        peak = peak.max(*v);
        writeln!(dd, "{},{}", i, (peak - v) / peak)?;
    }

    let study_path = cfg.out_dir.join("study.ndjson");
    if study_path.exists() {
        let study = StudyResult::read_ndjson(std::fs::File::open(&study_path)?)?;
        let mut f = std::fs::File::create(report_dir.join("trials.csv"))?;
        writeln!(f, "trial_id,score,best_so_far")?;
        let mut best = f64::NEG_INFINITY;
        for t in &study.trials {
            if !t.failed && t.score.is_finite() {
                best = best.max(t.score);
            }
            writeln!(
                f,
                "{},{},{}",
                t.trial_id,
                if t.failed { f64::NAN } else { t.score },
                best
            )?;
        }
        println!(
            "study: {} trials, best {:.4}",
            study.trials.len(),
            study.best_trial().map(|t| t.score).unwrap_or(f64::NAN)
        );
    }
    println!("report data -> {}", report_dir.display());
    Ok(())
}
