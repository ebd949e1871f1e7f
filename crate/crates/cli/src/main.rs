use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use nnilc::compensator::{closed_pipeline_eval, compensate, Stitching};
use nnilc::dataset::{collect_sources, load_dataset, save_dataset};
use nnilc::eval::{
    export_plots, joint_corpus, retrain_models, run_experiment, run_experiments, train_on_dataset, ExperimentConfig,
    PipelineConfig, SummaryRow, EXPERIMENTS,
};
use nnilc::ilc::{refine_multi, IlcConfig};
use nnilc::nn::{load_models, save_models};
use nnilc::plant::{MultiAxisPlant, PlantSetup};
use nnilc::trajgen::{generate, TrajectoryKind, TrajectorySpec};
use nnilc::Multi;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "nnilc", version, about = "Learned feedforward compensation for a simulated robot inner loop")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Template {
    Plant,
    Pipeline,
    Experiment,
    Trajectory,
}

#[derive(Subcommand)]
enum Command {
    /// Print or write a default configuration file.
    Template {
        #[arg(value_enum)]
        kind: Template,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a desired trajectory CSV from one spec per joint (a single
    /// spec is repeated over `--joints` channels).
    GenTraj {
        #[arg(long = "spec", required = true)]
        specs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        joints: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine the command for a desired trajectory with ILC.
    Ilc {
        #[arg(long)]
        plant: Option<PathBuf>,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        /// Run against the perturbed physical variant.
        #[arg(long)]
        physical: bool,
    },
    /// Refine a sampled training corpus and store the windowed dataset.
    Collect {
        #[arg(long)]
        plant: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        physical: bool,
        /// Override the number of trajectories per joint.
        #[arg(long)]
        n_traj: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train one network per joint on a stored dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrain only the output layer of stored models on a new dataset.
    Retrain {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the compensated command for a desired trajectory.
    Compensate {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Average overlapping windows placed every STRIDE samples (< 25).
        #[arg(long)]
        overlap_stride: Option<usize>,
    },
    /// Compensate, run on the plant, and write CSVs, errors and a plot script.
    Rollout {
        #[arg(long)]
        plant: Option<PathBuf>,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        physical: bool,
        #[arg(long)]
        overlap_stride: Option<usize>,
        #[arg(long, default_value_t = nnilc::eval::DEFAULT_TRANSIENT)]
        transient: usize,
    },
    /// Run a named experiment (or `all`) and write its result directory.
    Eval {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write plot scripts for every run.
        #[arg(long)]
        plots: bool,
    },
    /// Write plot scripts for the runs in a directory.
    Plots { rundir: PathBuf },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn read_toml<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn plant(path: Option<&Path>, physical: bool) -> Result<MultiAxisPlant<f64>> {
    let setup = match path {
        Some(p) => PlantSetup::load(p)?,
        None => PlantSetup::default_six(),
    };
    Ok(if physical { setup.physical()? } else { setup.nominal()? })
}

fn stitching(overlap_stride: Option<usize>) -> Stitching {
    match overlap_stride {
        Some(stride) => Stitching::OverlapAverage { stride },
        None => Stitching::NonOverlapping,
    }
}

fn check_channels(q: &Multi, n: usize, what: &str) -> Result<()> {
    if q.n_channels() != n {
        bail!("trajectory has {} channels but the {what} has {n} joints", q.n_channels());
    }
    Ok(())
}

fn load_traj(path: &Path) -> Result<Multi> {
    if !path.is_file() {
        bail!("trajectory {} not found; create one with `nnilc gen-traj`", path.display());
    }
    Multi::load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Template { kind, out } => {
            let text = match kind {
                Template::Plant => PlantSetup::<f64>::default_six().to_toml_string(),
                Template::Pipeline => toml::to_string_pretty(&PipelineConfig::<f64>::default())?,
                Template::Experiment => ExperimentConfig::<f64>::default().to_toml_string(),
                Template::Trajectory => TrajectorySpec::new(TrajectoryKind::Sinusoid {
                    amplitude: 5.0,
                    omega: 3.0,
                    phase: 0.0,
                    offset: 0.0,
                })
                .to_toml_string(),
            };
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
        Command::GenTraj { specs, joints, out } => {
            let specs = specs
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Ok(TrajectorySpec::<f64>::from_toml_str(&text)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let channels = if specs.len() == 1 {
                vec![generate(&specs[0])?; joints.max(1)]
            } else {
                specs.iter().map(generate).collect::<nnilc::Result<_>>()?
            };
            Multi::from_channels(channels)?.save_csv(&out)?;
            info!("wrote {}", out.display());
        }
        Command::Ilc { plant: p, traj, out, iters, physical } => {
            let plant = plant(p.as_deref(), physical)?;
            let q_d = load_traj(&traj)?;
            check_channels(&q_d, plant.n_joints(), "plant")?;
            let cfg = IlcConfig { max_iters: iters, ..IlcConfig::default() };
            let runs = refine_multi(&plant, &q_d, &cfg)?;
            fs::create_dir_all(&out)?;
            Multi::from_channels(runs.iter().map(|r| r.u_final().clone()).collect())?.save_csv(out.join("u.csv"))?;
            Multi::from_channels(runs.iter().map(|r| r.y_final.clone()).collect())?.save_csv(out.join("y.csv"))?;
            let mut w = csv::Writer::from_path(out.join("history.csv"))?;
            w.write_record(["joint", "iteration", "l2_error", "step"])?;
            for (j, r) in runs.iter().enumerate() {
                for (k, e) in r.error_history.iter().enumerate() {
                    let step = r.alpha_history.get(k).map(|a| format!("{a:?}")).unwrap_or_default();
                    w.write_record([(j + 1).to_string(), k.to_string(), format!("{e:?}"), step])?;
                }
                info!("joint {}: {:.4} -> {:.4} deg ({:?})", j + 1, r.error_history[0], r.final_error(), r.status);
            }
            w.flush()?;
        }
        Command::Collect { plant: p, config, out, physical, n_traj, seed } => {
            let plant = plant(p.as_deref(), physical)?;
            let mut cfg: PipelineConfig<f64> = read_toml(config.as_deref())?;
            if let Some(n) = n_traj {
                cfg.corpus.n_traj = n;
            }
            if let Some(s) = seed {
                cfg.corpus.seed = s;
                cfg.dataset.seed = s;
            }
            let corpus = joint_corpus::<f64>(&cfg.corpus, plant.n_joints())?;
            let (sources, records) = collect_sources(&plant, &corpus, &cfg.collect)?;
            let dataset = nnilc::dataset::build(&sources, &cfg.dataset)?;
            save_dataset(&dataset, &out)?;
            write_json(&out.join("collection.json"), &records)?;
            info!("{} windows over {} joints in {}", dataset.total_pairs(), dataset.joints.len(), out.display());
        }
        Command::Train { dataset, config, out } => {
            let cfg: PipelineConfig<f64> = read_toml(config.as_deref())?;
            let ds = load_dataset::<f64>(&dataset)?;
            let (models, reports) = train_on_dataset(&ds, &cfg)?;
            save_models(&models, &out)?;
            write_json(&out.join("train_report.json"), &reports)?;
            for (j, r) in reports.iter().enumerate() {
                info!("joint {}: best epoch {} of {}", j + 1, r.best_epoch, r.train_mse.len());
            }
        }
        Command::Retrain { models, dataset, config, out } => {
            let cfg: PipelineConfig<f64> = read_toml(config.as_deref())?;
            let models = load_models::<f64>(&models)?;
            let ds = load_dataset::<f64>(&dataset)?;
            let (retrained, reports) = retrain_models(&models, &ds, &cfg.train)?;
            save_models(&retrained, &out)?;
            write_json(&out.join("train_report.json"), &reports)?;
        }
        Command::Compensate { models, traj, out, overlap_stride } => {
            let models = load_models::<f64>(&models)?;
            let q_d = load_traj(&traj)?;
            check_channels(&q_d, models.len(), "model set")?;
            let (u, report) = compensate(&models, &q_d, stitching(overlap_stride))?;
            u.save_csv(&out)?;
            for (j, c) in report.channels.iter().enumerate() {
                info!(
                    "joint {}: {} invocations, {} head and {} tail samples passed through",
                    j + 1,
                    c.invocations,
                    c.head_passthrough,
                    c.tail_passthrough
                );
            }
        }
        Command::Rollout { plant: p, models, traj, out, physical, overlap_stride, transient } => {
            let plant = plant(p.as_deref(), physical)?;
            let models = load_models::<f64>(&models)?;
            let q_d = load_traj(&traj)?;
            check_channels(&q_d, plant.n_joints(), "plant")?;
            let run = closed_pipeline_eval(&plant, &models, &q_d, stitching(overlap_stride), transient)?;
            fs::create_dir_all(&out)?;
            q_d.save_csv(out.join("rollout_qd.csv"))?;
            run.u.save_csv(out.join("rollout_u.csv"))?;
            run.y.save_csv(out.join("rollout_y.csv"))?;
            run.y_uncompensated.save_csv(out.join("uncompensated_y.csv"))?;
            write_json(&out.join("errors.json"), &run.errors)?;
            export_plots(&out)?;
            let base = run.errors.uncompensated.as_ref().expect("paired report");
            for (j, (c, u)) in run.errors.joints.iter().zip(base).enumerate() {
                info!("joint {}: l2 {:.4} -> {:.4} deg, linf {:.4} -> {:.4} deg", j + 1, u.l2, c.l2, u.linf, c.linf);
            }
        }
        Command::Eval { experiment, config, out, seed, plots } => {
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::<f64>::load(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcomes = if experiment == "all" {
                let all = run_experiments(&EXPERIMENTS, &cfg, &out)?;
                write_summary(&out.join("summary.csv"), &all.iter().flat_map(|o| o.summary.clone()).collect::<Vec<_>>())?;
                all
            } else {
                vec![run_experiment(&experiment, &cfg, &out)?]
            };
            for o in &outcomes {
                if plots {
                    export_plots(&o.dir)?;
                }
                info!("{}: {} summary rows in {}", o.name, o.summary.len(), o.dir.display());
            }
        }
        Command::Plots { rundir } => {
            for s in export_plots(&rundir)? {
                info!("wrote {}", s.display());
            }
        }
    }
    Ok(())
}
