//! Command-line front end for the texture classification pipeline.
//!
//! Result data (rules, reports, predictions without `--out`) goes to stdout;
//! progress and timing go to stderr so file artifacts stay byte-reproducible
//! under fixed seeds.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::dct::CoefficientMask;
use crate::efunn::{Activation, EfunnConfig, LearnEvent};
use crate::harness::{
    self, dataset_from_csv, evaluate, features_to_csv, load_classifier, manifest_to_csv,
    predictions_to_csv, save_classifier, Dataset, HarnessError, TextureFamily,
    TrainedClassifier,
};
use crate::mlp::MlpConfig;

#[derive(Parser)]
#[command(
    name = "texclass",
    version,
    about = "Block-DCT texture features with an evolving fuzzy classifier and an MLP baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic texture image set plus manifest.csv
    Synth {
        /// Directory to create the PGM files and manifest in
        #[arg(long)]
        out_dir: PathBuf,
        /// Texture families, one class each
        #[arg(long, value_delimiter = ',', default_value = "brick,metal,rural")]
        classes: Vec<TextureFamily>,
        /// Images per class
        #[arg(long, default_value_t = 80)]
        count: usize,
        /// Square image side in pixels
        #[arg(long, default_value_t = 48)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Extract block-DCT features from labeled images into a CSV
    Extract {
        /// Directory holding the image files
        #[arg(long)]
        images: PathBuf,
        /// filename,class listing; defaults to <images>/manifest.csv
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        block_size: usize,
        /// Nine u:v coefficient positions, e.g. "0:0,0:1,1:0,..."
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified train/test split of a labeled feature CSV
    Split {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// One-pass training of the evolving fuzzy classifier
    TrainEfunn {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        sthr: f64,
        #[arg(long, default_value_t = 0.001)]
        errthr: f64,
        #[arg(long, default_value_t = 4)]
        mfs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr1: f64,
        #[arg(long, default_value_t = 0.1)]
        lr2: f64,
        #[arg(long, default_value_t = 0.0)]
        lr3: f64,
        #[arg(long, default_value_t = 3)]
        mbest: usize,
        #[arg(long, default_value_t = 1.0)]
        ss: f64,
        #[arg(long, default_value_t = 0.0)]
        tc: f64,
        #[arg(long, default_value = "satlin")]
        activation: Activation,
        #[arg(long)]
        max_nodes: Option<usize>,
        #[arg(long, default_value_t = 50)]
        age_thr: u64,
        #[arg(long, default_value_t = 0.05)]
        act_thr: f64,
        #[arg(long, default_value_t = 0.1)]
        thr1: f64,
        #[arg(long, default_value_t = 0.1)]
        thr2: f64,
        /// Write the per-example structural event log as CSV
        #[arg(long)]
        event_log: Option<PathBuf>,
    },
    /// Batched backpropagation training of the MLP baseline
    TrainMlp {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Hidden layer sizes
        #[arg(long, value_delimiter = ',', default_value = "90,90")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 0.1)]
        momentum: f64,
        #[arg(long, default_value_t = 5000)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        init_scale: f64,
    },
    /// Predict classes for every row of a feature CSV
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Output CSV; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-class evaluation report for a model on labeled features
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Also write the report as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the if-then rules of an evolving model
    Rules {
        #[arg(long)]
        model: PathBuf,
    },
    /// Remove old, inactive rule nodes from an evolving model
    Prune {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Aggressiveness in [0,1]: 0 removes nothing, 1 every candidate
        #[arg(long)]
        level: f64,
        #[arg(long)]
        age_thr: Option<u64>,
        #[arg(long)]
        act_thr: Option<f64>,
    },
    /// Merge rule nodes whose centers fall within the thresholds
    Aggregate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        thr1: Option<f64>,
        #[arg(long)]
        thr2: Option<f64>,
    },
}

/// Run the CLI against explicit arguments and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Write result data to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn parse_mask(mask: Option<&str>) -> Result<CoefficientMask, HarnessError> {
    match mask {
        None => Ok(CoefficientMask::default()),
        Some(raw) => raw.parse().map_err(HarnessError::Dct),
    }
}

fn load_features(path: &Path) -> Result<Dataset, HarnessError> {
    dataset_from_csv(&read_to_string(path)?)
}

fn require_efunn(
    model: TrainedClassifier,
    path: &Path,
) -> Result<crate::efunn::EfunnModel, HarnessError> {
    match model {
        TrainedClassifier::Efunn(m) => Ok(m),
        TrainedClassifier::Mlp(_) => Err(HarnessError::Model {
            reason: format!("{} is not an evolving-model file", path.display()),
        }),
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Synth { out_dir, classes, count, size, seed } => {
            let images = harness::generate_synthetic(&classes, count, size, seed)?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|source| HarnessError::Io { path: out_dir.clone(), source })?;
            let mut manifest = Vec::with_capacity(images.len());
            for s in &images {
                let path = out_dir.join(&s.filename);
                std::fs::write(&path, s.image.encode_pgm(false))
                    .map_err(|source| HarnessError::Io { path: path.clone(), source })?;
                manifest.push((s.filename.clone(), classes[s.class].to_string()));
            }
            write_file(&out_dir.join("manifest.csv"), &manifest_to_csv(&manifest))?;
            eprintln!("wrote {} images to {}", images.len(), out_dir.display());
            Ok(())
        }
        Command::Extract { images, manifest, block_size, mask, out } => {
            let started = Instant::now();
            let manifest_path = manifest.unwrap_or_else(|| images.join("manifest.csv"));
            let mask = parse_mask(mask.as_deref())?;
            let ds = harness::extract_from_dir(&images, &manifest_path, block_size, &mask)?;
            write_file(&out, &features_to_csv(&ds))?;
            eprintln!(
                "extracted {} rows x {} features in {:.2}s",
                ds.len(),
                ds.dims(),
                started.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Command::Split { features, fraction, seed, train_out, test_out } => {
            let ds = load_features(&features)?;
            let (train, test) = harness::split(&ds, fraction, seed)?;
            write_file(&train_out, &features_to_csv(&train))?;
            write_file(&test_out, &features_to_csv(&test))?;
            eprintln!("split {} items into {} train / {} test", ds.len(), train.len(), test.len());
            Ok(())
        }
        Command::TrainEfunn {
            features,
            out,
            sthr,
            errthr,
            mfs,
            lr1,
            lr2,
            lr3,
            mbest,
            ss,
            tc,
            activation,
            max_nodes,
            age_thr,
            act_thr,
            thr1,
            thr2,
            event_log,
        } => {
            let started = Instant::now();
            let ds = load_features(&features)?;
            let config = EfunnConfig {
                sthr,
                errthr,
                lr1,
                lr2,
                lr3,
                m_best: mbest,
                ss,
                tc,
                max_nodes,
                mfs,
                activation,
                age_thr,
                act_thr,
                thr1,
                thr2,
            };
            let (model, log) = harness::train_efunn(config, &ds)?;
            save_classifier(&out, &TrainedClassifier::Efunn(model.clone()))?;
            if let Some(log_path) = event_log {
                let mut csv = String::from("example,event,node,clamped_inputs\n");
                for (i, outcome) in log.iter().enumerate() {
                    let (event, node) = match outcome.event {
                        LearnEvent::NodeCreated { node } => ("created", node),
                        LearnEvent::NodeUpdated { winner, .. } => ("updated", winner),
                    };
                    csv.push_str(&format!("{i},{event},{node},{}\n", outcome.clamped_inputs));
                }
                write_file(&log_path, &csv)?;
            }
            eprintln!(
                "trained on {} examples: {} rule nodes in {:.2}s",
                ds.len(),
                model.node_count(),
                started.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Command::TrainMlp { features, out, hidden, lr, momentum, epochs, seed, init_scale } => {
            let started = Instant::now();
            let ds = load_features(&features)?;
            let mut layer_sizes = Vec::with_capacity(hidden.len() + 2);
            layer_sizes.push(ds.dims());
            layer_sizes.extend(hidden);
            layer_sizes.push(ds.classes());
            let config = MlpConfig {
                layer_sizes,
                learning_rate: lr,
                momentum,
                epochs,
                seed,
                init_scale,
            };
            let report_every = (epochs / 10).max(1);
            let bundle = harness::train_mlp(config, &ds, |epoch, rmse| {
                if epoch % report_every == 0 || epoch + 1 == epochs {
                    eprintln!("epoch {epoch}: rmse {rmse:.6}");
                }
            })?;
            save_classifier(&out, &TrainedClassifier::Mlp(bundle))?;
            eprintln!(
                "trained {} epochs on {} examples in {:.2}s",
                epochs,
                ds.len(),
                started.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Command::Classify { model, features, out } => {
            let model = load_classifier(&model)?;
            let ds = load_features(&features)?;
            let mut predicted = Vec::with_capacity(ds.len());
            for (fv, _) in ds.items() {
                let class = model.predict(fv)?;
                predicted.push(model.class_names()[class].clone());
            }
            let csv = predictions_to_csv(&ds, &predicted);
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => emit(&csv),
            }
            Ok(())
        }
        Command::Evaluate { model, features, out } => {
            let model = load_classifier(&model)?;
            let ds = load_features(&features)?;
            // every label in the data must be a class the model knows
            for name in ds.class_names() {
                if !model.class_names().contains(name) {
                    return Err(HarnessError::UnknownLabel { label: name.clone() });
                }
            }
            let ds_index_of_model: Vec<Option<usize>> = model
                .class_names()
                .iter()
                .map(|n| ds.class_names().iter().position(|d| d == n))
                .collect();
            let report = evaluate(
                |fv| {
                    let predicted = model.predict(fv)?;
                    Ok(ds_index_of_model[predicted].unwrap_or(usize::MAX))
                },
                &ds,
            )?;
            emit(&report.render_text());
            if let Some(path) = out {
                write_file(&path, &report.render_csv())?;
            }
            Ok(())
        }
        Command::Rules { model } => {
            let path = model.clone();
            let model = require_efunn(load_classifier(&model)?, &path)?;
            let mut text = String::new();
            for rule in model.extract_rules() {
                text.push_str(&model.render_rule(&rule));
                text.push('\n');
            }
            emit(&text);
            Ok(())
        }
        Command::Prune { model, out, level, age_thr, act_thr } => {
            let path = model.clone();
            let mut model = require_efunn(load_classifier(&model)?, &path)?;
            if let Some(age_thr) = age_thr {
                model.set_age_thr(age_thr);
            }
            if let Some(act_thr) = act_thr {
                model.set_act_thr(act_thr)?;
            }
            let before = model.node_count();
            let removed = model.prune(level);
            eprintln!("pruned {removed} nodes ({before} -> {})", model.node_count());
            if model.node_count() == 0 {
                eprintln!("warning: the pruned model has no rule nodes left");
            }
            save_classifier(&out, &TrainedClassifier::Efunn(model))?;
            Ok(())
        }
        Command::Aggregate { model, out, thr1, thr2 } => {
            let path = model.clone();
            let mut model = require_efunn(load_classifier(&model)?, &path)?;
            let thr1 = thr1.unwrap_or(model.config().thr1);
            let thr2 = thr2.unwrap_or(model.config().thr2);
            model.set_aggregation_thresholds(thr1, thr2)?;
            let before = model.node_count();
            let merges = model.aggregate()?;
            eprintln!("merged {merges} pairs ({before} -> {})", model.node_count());
            save_classifier(&out, &TrainedClassifier::Efunn(model))?;
            Ok(())
        }
    }
}
