//! Command-line driver.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pcmkit_core::analysis::{self, error_distribution, flight_energy_errors, trace_comparison};
use pcmkit_core::evaluate::benchmark::{benchmark_datasets, benchmark_table};
use pcmkit_core::evaluate::grid::{grid_search, GridSpec};
use pcmkit_core::evaluate::sensitivity::{empirical_configs, sensitivity_study, SensitivityConfig};
use pcmkit_core::evaluate::{evaluate, EvalReport, EvalSplit};
use pcmkit_core::preprocess::process_flight;
use pcmkit_core::rng::derive_seed;
use pcmkit_core::sample::split;
use pcmkit_core::synth::{fleet_samples, generate_fleet, raw_channels};
use pcmkit_core::{par, Dataset, FlightSample, ModelSpec, Predictor, SplitMode};

use crate::config::{parse_param_flags, parse_variant, RunConfig};
use crate::dataset::{load_dataset, write_samples};
use crate::error::{Error, Result};
use crate::ingest::{parse_log, write_log, FlightLog, Schema};
use crate::manifest::RunDir;
use crate::model_io::ModelDocument;
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "pcmkit", version, about = "Power-consumption models for quadrotors")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write into a non-empty output directory instead of a fresh sibling.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitModeArg {
    Sample,
    Flight,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic fleet as a dataset (and optionally raw logs).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        flights: Option<usize>,
        /// Also write one m100-dialect raw log per flight under logs/.
        #[arg(long)]
        logs: bool,
    },
    /// Clean raw flight logs into a 1 Hz dataset.
    Preprocess {
        /// Log files or directories of *.log files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Reject logs of any other schema.
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        median_window: Option<usize>,
        #[arg(long)]
        power_floor: Option<f64>,
    },
    /// Fit one model on the training split and report both splits.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// EN, RF, GBRT, MLP or stacked.
        #[arg(long)]
        model: Option<String>,
        /// Hyperparameter override `key=value` (or `VARIANT.key=value`).
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        split_mode: Option<SplitModeArg>,
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Cross-validated grid search on the training split.
    Tune {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        variant: Option<String>,
        /// Grid file (TOML or JSON) replacing the default grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Predict power for every row of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluation studies.
    Study {
        #[command(subcommand)]
        study: Study,
    },
}

#[derive(Debug, Subcommand)]
pub enum Study {
    /// Test R² against training-set size under repeated subsampling.
    Sensitivity {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Residual distribution of a model on a dataset.
    ErrorDist {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Accumulated energy error per flight.
    FlightEnergy {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        bound_j: Option<f64>,
        #[arg(long)]
        capacity_j: Option<f64>,
    },
    /// Prediction against ground truth for one flight unseen in training.
    Trace {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        flight: String,
    },
    /// Every model on per-aircraft and combined datasets.
    Benchmark {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        per_set: Option<usize>,
    },
}

/// Runs a parsed command line; returns the run directory.
pub fn run(cli: Cli) -> Result<PathBuf> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let threads = match cli.threads {
        Some(0) => return Err(Error::Usage("--threads must be >= 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {threads} threads: {e}")))?;
    let mut inputs: Vec<PathBuf> = cli.config.iter().cloned().collect();
    pool.install(|| dispatch(cli.command, cfg, cli.force, &mut inputs))
}

fn require_files(paths: &[&Path]) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Error::io(
                *p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
            ));
        }
    }
    Ok(())
}

fn dataset_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn csv_bytes(samples: &[FlightSample]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples).expect("in-memory write");
    buf
}

fn say(run: &Path, what: &str) {
    println!("{what}");
    println!("outputs: {}", run.display());
}

fn dispatch(cmd: Command, mut cfg: RunConfig, force: bool, inputs: &mut Vec<PathBuf>) -> Result<PathBuf> {
    match cmd {
        Command::Synth { out, flights, logs } => {
            cfg.synth.seed = cfg.seed;
            if let Some(n) = flights {
                cfg.synth.n_flights = n;
            }
            let fleet = generate_fleet(&cfg.synth)?;
            let samples = fleet_samples(&fleet);
            let mut run = RunDir::create(&out, force)?;
            run.write("dataset.csv", &csv_bytes(&samples))?;
            if logs {
                for f in &fleet {
                    let spec = f.aircraft.spec().expect("synthetic aircraft are known types");
                    let payload_g = (f.mass_kg * 1000.0 - spec.empty_weight_g).round();
                    let log = FlightLog {
                        schema: Schema::Matrice100,
                        flight_id: f.flight_id.clone(),
                        aircraft: spec,
                        payload_g,
                        channels: raw_channels(f)?,
                    };
                    run.write(&format!("logs/{}.log", f.flight_id), write_log(&log).as_bytes())?;
                }
            }
            let dir = run.path.clone();
            say(&dir, &format!("{} flights, {} samples", fleet.len(), samples.len()));
            run.finish("synth", cfg.seed, &cfg, inputs)
        }
        Command::Preprocess {
            inputs: paths,
            out,
            schema,
            median_window,
            power_floor,
        } => {
            if let Some(w) = median_window {
                cfg.filter.median_window = w;
            }
            if let Some(f) = power_floor {
                cfg.filter.power_floor = f;
            }
            cfg.filter.validate()?;
            let schema: Option<Schema> = schema.map(|s| s.parse()).transpose()?;
            let files = expand_inputs(&paths)?;
            let logs = par::map(files.clone(), |p| parse_log(&p, schema))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let mut seen = std::collections::BTreeSet::new();
            for (l, p) in logs.iter().zip(&files) {
                if !seen.insert(l.flight_id.clone()) {
                    return Err(Error::format(p, format!("duplicate flight id `{}`", l.flight_id)));
                }
            }
            let filter = cfg.filter;
            let outcomes = par::map(logs.iter().zip(&files).collect::<Vec<_>>(), |(l, p)| {
                process_flight(&l.channels, &l.meta(), &filter).map_err(|e| Error::format(p, e.to_string()))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            #[derive(Serialize)]
            struct FlightRow {
                flight_id: String,
                file: String,
                aircraft: String,
                rows: usize,
                removed_below_floor: usize,
            }
            let mut samples = Vec::new();
            let mut rows = Vec::new();
            for ((l, p), o) in logs.iter().zip(&files).zip(outcomes) {
                rows.push(FlightRow {
                    flight_id: l.flight_id.clone(),
                    file: p.display().to_string(),
                    aircraft: l.aircraft.kind.tag().into(),
                    rows: o.samples.len(),
                    removed_below_floor: o.removed,
                });
                samples.extend(o.samples);
            }
            if samples.is_empty() {
                return Err(Error::Usage("no samples left after preprocessing".into()));
            }
            let mut run = RunDir::create(&out, force)?;
            run.write("dataset.csv", &csv_bytes(&samples))?;
            run.write_json("summary.json", &rows)?;
            let dir = run.path.clone();
            say(&dir, &format!("{} flights, {} rows", rows.len(), samples.len()));
            inputs.extend(files);
            run.finish("preprocess", cfg.seed, &cfg, inputs)
        }
        Command::Train {
            data,
            out,
            model,
            params,
            split_mode,
            train_fraction,
        } => {
            require_files(&[&data])?;
            if let Some(m) = model {
                cfg.train.model = m;
            }
            if let Some(m) = split_mode {
                cfg.split.mode = match m {
                    SplitModeArg::Sample => SplitMode::RandomBySample,
                    SplitModeArg::Flight => SplitMode::RandomByFlight,
                };
            }
            if let Some(f) = train_fraction {
                cfg.split.train_fraction = f;
            }
            apply_param_flags(&mut cfg, &params)?;
            let spec = cfg.model_spec(&cfg.train.model.clone())?;
            spec.validate()?;
            let ds = load_dataset(&data)?;
            let split_spec = cfg.split_spec();
            let (train, test) = split(&ds, &split_spec)?;
            let model = spec.fit(train.x.as_matrix(), train.y.as_slice())?;
            let name = model.name();
            let id = dataset_id(&data);
            let reports = vec![
                evaluate(&model, &train, &name, &id, EvalSplit::Training)?,
                evaluate(&model, &test, &name, &id, EvalSplit::Testing)?,
            ];
            let doc = ModelDocument::new(model, train.flight_set(), Some(split_spec));
            let mut run = RunDir::create(&out, force)?;
            run.write("model.json", doc.to_json().as_bytes())?;
            run.write("train.csv", &csv_bytes(&train.to_samples()))?;
            run.write("test.csv", &csv_bytes(&test.to_samples()))?;
            run.write_json("report.json", &reports)?;
            run.write("report.csv", &report::eval_reports_csv(&reports))?;
            let dir = run.path.clone();
            let lines: Vec<String> = reports
                .iter()
                .map(|r| format!("{name} {}: n={} mse={:.3} mape={:.4} r2={:.4}", r.split.tag(), r.n, r.mse, r.mape, r.r2))
                .collect();
            say(&dir, &lines.join("\n"));
            inputs.push(data);
            run.finish("train", cfg.seed, &cfg, inputs)
        }
        Command::Tune {
            data,
            out,
            variant,
            grid,
            folds,
        } => {
            require_files(&[&data])?;
            if let Some(v) = variant {
                cfg.tune.variant = Some(v);
            }
            if let Some(k) = folds {
                cfg.tune.folds = k;
            }
            if let Some(g) = &grid {
                cfg.tune.grid = Some(load_grid(g)?);
                inputs.push(g.clone());
            }
            let grid = match (&cfg.tune.grid, &cfg.tune.variant) {
                (Some(g), _) => g.clone(),
                (None, Some(v)) => GridSpec::default_for(parse_variant(v)?),
                (None, None) => return Err(Error::Usage("tune needs --variant or a grid".into())),
            };
            if let Some(v) = &cfg.tune.variant {
                if parse_variant(v)? != grid.variant() {
                    return Err(Error::Usage(format!("grid is for {}, not {v}", grid.variant())));
                }
            }
            let ds = load_dataset(&data)?;
            let (train, _) = split(&ds, &cfg.split_spec())?;
            let result = grid_search(
                train.x.as_matrix(),
                train.y.as_slice(),
                &grid,
                cfg.tune.folds,
                derive_seed(cfg.seed, &[0x7E4E]),
            )?;
            let mut run = RunDir::create(&out, force)?;
            run.write_json("grid.json", &result)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["hyperparameters", "cv_mse"]).expect("in-memory write");
            for c in &result.cells {
                w.write_record([c.hyperparameters.describe(), c.cv_mse.to_string()])
                    .expect("in-memory write");
            }
            run.write("grid.csv", &w.into_inner().expect("in-memory flush"))?;
            let best = result.best_cell();
            let dir = run.path.clone();
            say(
                &dir,
                &format!("best {} cv_mse={:.4}", best.hyperparameters.describe(), best.cv_mse),
            );
            inputs.push(data);
            run.finish("tune", cfg.seed, &cfg, inputs)
        }
        Command::Predict { model, data, out } => {
            require_files(&[&model, &data])?;
            let doc = ModelDocument::load(&model)?;
            let ds = load_dataset(&data)?;
            let yhat = doc.model.predict(ds.x.as_matrix())?;
            let mut run = RunDir::create(&out, force)?;
            run.write(
                "predictions.csv",
                &report::predictions_csv(&ds.flight_ids, &ds.t, ds.y.as_slice(), &yhat),
            )?;
            match EvalReport::from_predictions(&doc.model.name(), &dataset_id(&data), EvalSplit::Testing, ds.y.as_slice(), &yhat) {
                Ok(r) => {
                    run.write_json("report.json", &r)?;
                }
                Err(e) if e.is_numeric() => eprintln!("note: metrics not written: {e}"),
                Err(e) => return Err(e.into()),
            }
            let dir = run.path.clone();
            say(&dir, &format!("{} predictions", yhat.len()));
            inputs.extend([model, data]);
            run.finish("predict", cfg.seed, &cfg, inputs)
        }
        Command::Study { study } => run_study(study, cfg, force, inputs),
    }
}

fn apply_param_flags(cfg: &mut RunConfig, flags: &[String]) -> Result<()> {
    let table = parse_param_flags(flags)?;
    for (k, v) in table {
        let (variant, key) = match k.split_once('.') {
            Some((v, key)) => (parse_variant(v)?, key.to_string()),
            None => {
                if cfg.train.model.eq_ignore_ascii_case("stacked") {
                    return Err(Error::Usage(format!(
                        "`{k}`: name the base model for stacked training, e.g. GBRT.{k}"
                    )));
                }
                (parse_variant(&cfg.train.model)?, k)
            }
        };
        cfg.train.params.entry(variant.tag().to_string()).or_default().insert(key, v);
    }
    Ok(())
}

fn load_grid(path: &Path) -> Result<GridSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }
}

fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "log"))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(Error::format(p, "directory holds no .log files"));
            }
            files.extend(found);
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(Error::io(
                p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input not found"),
            ));
        }
    }
    Ok(files)
}

fn model_and_data(model: &Path, data: &Path) -> Result<(ModelDocument, Dataset)> {
    require_files(&[model, data])?;
    Ok((ModelDocument::load(model)?, load_dataset(data)?))
}

fn run_study(study: Study, mut cfg: RunConfig, force: bool, inputs: &mut Vec<PathBuf>) -> Result<PathBuf> {
    match study {
        Study::Sensitivity {
            data,
            out,
            sizes,
            repetitions,
        } => {
            require_files(&[&data])?;
            if let Some(s) = sizes {
                cfg.study.sensitivity.sizes = s;
            }
            if let Some(r) = repetitions {
                cfg.study.sensitivity.repetitions = r;
            }
            let ds = load_dataset(&data)?;
            let s = &cfg.study.sensitivity;
            let scfg = SensitivityConfig {
                sizes: s.sizes.clone(),
                repetitions: s.repetitions,
                train_fraction: s.train_fraction,
                models: empirical_configs(derive_seed(cfg.seed, &[0x5E45])),
                seed: cfg.seed,
            };
            let curves = sensitivity_study(ds.x.as_matrix(), ds.y.as_slice(), &scfg)?;
            let mut run = RunDir::create(&out, force)?;
            run.write_json("sensitivity.json", &curves)?;
            run.write("sensitivity.csv", &report::sensitivity_csv(&curves))?;
            let dir = run.path.clone();
            say(&dir, &format!("{} models x {} sizes", curves.len(), scfg.sizes.len()));
            inputs.push(data);
            run.finish("study sensitivity", cfg.seed, &cfg, inputs)
        }
        Study::ErrorDist { model, data, out, bins } => {
            let (doc, ds) = model_and_data(&model, &data)?;
            if let Some(b) = bins {
                cfg.study.histogram_bins = b;
            }
            let yhat = doc.model.predict(ds.x.as_matrix())?;
            let d = error_distribution(ds.y.as_slice(), &yhat, cfg.study.histogram_bins)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                model: String,
                n: usize,
                mean: f64,
                std: f64,
                within_1_sigma: f64,
                within_2_sigma: f64,
                histogram: &'a analysis::Histogram,
                bin_edges: Vec<f64>,
            }
            let summary = Summary {
                model: doc.model.name(),
                n: d.errors.len(),
                mean: d.mean,
                std: d.std,
                within_1_sigma: d.within_1_sigma,
                within_2_sigma: d.within_2_sigma,
                histogram: &d.histogram,
                bin_edges: d.histogram.edges(),
            };
            let mut run = RunDir::create(&out, force)?;
            run.write_json("error_distribution.json", &summary)?;
            run.write("residuals.csv", &report::residuals_csv(&ds.flight_ids, &ds.t, &d.errors))?;
            let dir = run.path.clone();
            say(
                &dir,
                &format!(
                    "mean {:.3} W, std {:.3} W, within 1 sigma {:.3}, within 2 sigma {:.3}",
                    d.mean, d.std, d.within_1_sigma, d.within_2_sigma
                ),
            );
            inputs.extend([model, data]);
            run.finish("study error-dist", cfg.seed, &cfg, inputs)
        }
        Study::FlightEnergy {
            model,
            data,
            out,
            bound_j,
            capacity_j,
        } => {
            let (doc, ds) = model_and_data(&model, &data)?;
            if let Some(b) = bound_j {
                cfg.study.energy.bound_j = b;
            }
            if let Some(c) = capacity_j {
                cfg.study.energy.capacity_j = c;
            }
            let summary = flight_energy_errors(&doc.model, &ds, &[], &cfg.study.energy)?;
            let seen: Vec<&str> = summary
                .flights
                .iter()
                .filter(|f| doc.training_flights.contains(&f.flight_id))
                .map(|f| f.flight_id.as_str())
                .collect();
            if !seen.is_empty() {
                eprintln!(
                    "warning: {} of {} flights also contributed training rows",
                    seen.len(),
                    summary.flights.len()
                );
            }
            let mut run = RunDir::create(&out, force)?;
            run.write_json("energy.json", &summary)?;
            run.write("energy.csv", &report::energy_csv(&summary))?;
            let text = report::energy_text(&summary);
            run.write("energy.txt", text.as_bytes())?;
            let dir = run.path.clone();
            say(&dir, text.lines().last().unwrap_or(""));
            inputs.extend([model, data]);
            run.finish("study flight-energy", cfg.seed, &cfg, inputs)
        }
        Study::Trace {
            model,
            data,
            out,
            flight,
        } => {
            let (doc, ds) = model_and_data(&model, &data)?;
            let name = doc.model.name();
            let t = trace_comparison(&doc.model, &name, &ds, &flight, &doc.training_flights)?;
            let mut run = RunDir::create(&out, force)?;
            run.write("trace.csv", &report::trace_csv(&t))?;
            run.write_json("trace.json", &t.report)?;
            let dir = run.path.clone();
            say(
                &dir,
                &format!("{flight}: n={} r2={:.4} mape={:.4}", t.report.n, t.report.r2, t.report.mape),
            );
            inputs.extend([model, data]);
            run.finish("study trace", cfg.seed, &cfg, inputs)
        }
        Study::Benchmark { data, out, per_set } => {
            require_files(&[&data])?;
            if let Some(n) = per_set {
                cfg.study.benchmark.per_set = n;
            }
            let ds = load_dataset(&data)?;
            let models: Vec<(String, ModelSpec)> = cfg
                .study
                .benchmark
                .models
                .iter()
                .map(|m| {
                    let spec = cfg.model_spec(m)?;
                    let name = if m.eq_ignore_ascii_case("stacked") {
                        "Stacked".to_string()
                    } else {
                        spec.name()
                    };
                    Ok((name, spec))
                })
                .collect::<Result<_>>()?;
            for (_, s) in &models {
                s.validate()?;
            }
            let sets = benchmark_datasets(&ds, cfg.study.benchmark.per_set, derive_seed(cfg.seed, &[0xBE4C]))?;
            let table = benchmark_table(&models, &sets, &cfg.split_spec())?;
            let mut run = RunDir::create(&out, force)?;
            run.write_json("benchmark.json", &table)?;
            run.write("benchmark.csv", &report::eval_reports_csv(&table.reports))?;
            let dir = run.path.clone();
            let lines: Vec<String> = table
                .reports
                .iter()
                .filter(|r| r.split == EvalSplit::Testing)
                .map(|r| format!("{:<10} {:<12} r2={:.4} mape={:.4}", r.model_id, r.dataset_id, r.r2, r.mape))
                .collect();
            say(&dir, &lines.join("\n"));
            inputs.push(data);
            run.finish("study benchmark", cfg.seed, &cfg, inputs)
        }
    }
}

