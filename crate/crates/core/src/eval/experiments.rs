//! Named experiments. Each one writes its run CSVs, an `errors` CSV per run
//! and a `summary.csv` into its own output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ErrorReport, Units, DEFAULT_TRANSIENT};
use super::pipeline::{collect_dataset, retrain_models, train_on_dataset, train_pipeline, PipelineConfig};
use crate::compensator::{closed_pipeline_eval, PipelineRun, Stitching};
use crate::error::{invalid, Error, Result};
use crate::ilc::{refine_multi, IlcConfig};
use crate::nn::{load_models, Mlp, TrainConfig};
use crate::plant::{MultiAxisPlant, PlantSetup};
use crate::scalar::Real;
use crate::signal::MultiTrajectory;
use crate::trajgen::{generate, validate_limits, TrajectoryKind, TrajectorySpec, DEFAULT_LENGTH};

/// Registry of experiment names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 7] = [
    "descent",
    "sinusoid-suite",
    "chirp",
    "trapezoid-corner",
    "transfer",
    "cross-plant",
    "architecture",
];

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct DescentCase<T> {
    pub amplitude: T,
    pub omega: T,
    pub ilc: IlcConfig<T>,
}

impl<T: Real> Default for DescentCase<T> {
    fn default() -> Self {
        Self {
            amplitude: T::lit(5.0),
            omega: T::lit(3.0),
            ilc: IlcConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SineCase<T> {
    pub amplitude: T,
    pub omega: T,
    pub phase: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct ChirpCase<T> {
    pub amplitude: T,
    pub omega_start: T,
    pub omega_end: T,
}

impl<T: Real> Default for ChirpCase<T> {
    fn default() -> Self {
        Self {
            amplitude: T::lit(6.0),
            omega_start: T::lit(0.628),
            omega_end: T::lit(1.884),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct TrapezoidCase<T> {
    pub distance: T,
    pub vmax: T,
    pub amax: T,
    pub dwell: T,
    pub ilc: IlcConfig<T>,
}

impl<T: Real> Default for TrapezoidCase<T> {
    fn default() -> Self {
        Self {
            distance: T::lit(20.0),
            vmax: T::lit(60.0),
            amax: T::lit(2000.0),
            dwell: T::lit(0.5),
            // high-frequency corner content converges slowly under gradient descent
            ilc: IlcConfig {
                max_iters: 300,
                ..IlcConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct TransferCase<T> {
    /// Trajectories refined on the physical plant per joint.
    pub n_traj: usize,
    pub test: SineCase<T>,
    pub retrain: TrainConfig<T>,
}

impl<T: Real> Default for TransferCase<T> {
    fn default() -> Self {
        Self {
            n_traj: 20,
            test: SineCase {
                amplitude: T::lit(5.0),
                omega: T::lit(8.0),
                phase: T::lit(0.3),
            },
            retrain: TrainConfig {
                epochs: 100,
                batch_size: 64,
                ..TrainConfig::default()
            },
        }
    }
}

/// Alternate plant: every joint's natural frequency scaled and damping
/// shifted, delay unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlantVariant<T> {
    pub omega_scale: T,
    pub zeta_offset: T,
}

impl<T: Real> PlantVariant<T> {
    pub fn apply(&self, plant: &MultiAxisPlant<T>) -> Result<MultiAxisPlant<T>> {
        let configs = plant
            .joints
            .iter()
            .map(|j| {
                let mut c = j.config().clone();
                c.linear.omega = c.linear.omega * self.omega_scale;
                c.linear.zeta = c.linear.zeta + self.zeta_offset;
                c
            })
            .collect();
        MultiAxisPlant::from_configs(configs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct ExperimentConfig<T> {
    pub seed: u64,
    /// Plant setup file; the default six-joint setup when absent.
    pub plant: Option<PathBuf>,
    /// Directory of pre-trained models; trained from `pipeline` when absent.
    pub models: Option<PathBuf>,
    pub pipeline: PipelineConfig<T>,
    pub transient_samples: usize,
    pub units: Units,
    pub stitching: Stitching,
    pub length: usize,
    pub descent: DescentCase<T>,
    pub sinusoids: Vec<SineCase<T>>,
    pub chirp: ChirpCase<T>,
    pub trapezoid: TrapezoidCase<T>,
    pub transfer: TransferCase<T>,
    pub cross_plant: Vec<PlantVariant<T>>,
    pub architectures: Vec<Vec<usize>>,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        let sine = |a: f64, w: f64, p: f64| SineCase {
            amplitude: T::lit(a),
            omega: T::lit(w),
            phase: T::lit(p),
        };
        let variant = |s: f64, z: f64| PlantVariant {
            omega_scale: T::lit(s),
            zeta_offset: T::lit(z),
        };
        Self {
            seed: 0,
            plant: None,
            models: None,
            pipeline: PipelineConfig::default(),
            transient_samples: DEFAULT_TRANSIENT,
            units: Units::Deg,
            stitching: Stitching::NonOverlapping,
            length: DEFAULT_LENGTH,
            descent: DescentCase::default(),
            sinusoids: vec![sine(7.5, 5.0, 0.7), sine(4.0, 2.5, 1.9), sine(3.0, 9.0, 0.2)],
            chirp: ChirpCase::default(),
            trapezoid: TrapezoidCase::default(),
            transfer: TransferCase::default(),
            cross_plant: vec![variant(0.8, 0.1), variant(1.25, -0.1)],
            architectures: vec![vec![50], vec![100], vec![100, 100], vec![50, 50, 50]],
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact {
                path: path.to_path_buf(),
                hint: "pass an existing experiment config, or omit --config for defaults".into(),
            },
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("experiment config serializes")
    }

    /// Pipeline settings with the experiment seed applied to corpus,
    /// split and weight initialization.
    pub fn seeded_pipeline(&self) -> PipelineConfig<T> {
        let mut p = self.pipeline.clone();
        p.corpus.seed = self.seed;
        p.corpus.length = self.length;
        p.dataset.seed = self.seed;
        p.model_seed = self.seed;
        p
    }

    fn nominal_plant(&self) -> Result<MultiAxisPlant<T>> {
        self.setup()?.nominal()
    }

    fn setup(&self) -> Result<PlantSetup<T>> {
        match &self.plant {
            Some(path) => PlantSetup::load(path),
            None => Ok(PlantSetup::default_six()),
        }
    }
}

/// Sinusoid on every joint with per-joint phase and offset staggering.
pub fn sine_trajectory<T: Real>(case: &SineCase<T>, n_joints: usize, length: usize) -> Result<MultiTrajectory<T>> {
    let channels = (0..n_joints)
        .map(|j| {
            let j = T::of_usize(j);
            let kind = TrajectoryKind::Sinusoid {
                amplitude: case.amplitude,
                omega: case.omega,
                phase: case.phase + T::lit(0.5) * j,
                offset: T::lit(12.0) - T::lit(4.0) * j,
            };
            generate(&TrajectorySpec::new(kind).with_length(length))
        })
        .collect::<Result<_>>()?;
    MultiTrajectory::from_channels(channels)
}

/// Chirp on every joint with per-joint offsets.
pub fn chirp_trajectory<T: Real>(case: &ChirpCase<T>, n_joints: usize, length: usize) -> Result<MultiTrajectory<T>> {
    let channels = (0..n_joints)
        .map(|j| {
            let kind = TrajectoryKind::Chirp {
                amplitude: case.amplitude,
                omega_start: case.omega_start,
                omega_end: case.omega_end,
                phase: T::zero(),
                offset: T::lit(3.0) * T::of_usize(j) - T::lit(7.0),
            };
            generate(&TrajectorySpec::new(kind).with_length(length))
        })
        .collect::<Result<_>>()?;
    MultiTrajectory::from_channels(channels)
}

/// One row of `summary.csv`. `joint` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub joint: usize,
    pub metric: String,
    pub uncompensated: f64,
    pub compensated: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub name: String,
    pub dir: PathBuf,
    pub summary: Vec<SummaryRow>,
}

/// Runs experiment `name`, writing into `out` (created if needed; files of
/// the same name are overwritten).
pub fn run_experiment<T: Real>(name: &str, cfg: &ExperimentConfig<T>, out: impl AsRef<Path>) -> Result<ExperimentOutcome> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::UnknownExperiment(name.to_string()));
    }
    let out = out.as_ref();
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    log::info!("experiment {name} -> {}", out.display());
    let summary = match name {
        "descent" => descent(cfg, out)?,
        "sinusoid-suite" => sinusoid_suite(cfg, out)?,
        "chirp" => chirp(cfg, out)?,
        "trapezoid-corner" => trapezoid_corner(cfg, out)?,
        "transfer" => transfer(cfg, out)?,
        "cross-plant" => cross_plant(cfg, out)?,
        _ => architecture(cfg, out)?,
    };
    write_rows(&out.join(SUMMARY_FILE), &summary)?;
    Ok(ExperimentOutcome {
        name: name.to_string(),
        dir: out.to_path_buf(),
        summary,
    })
}

/// Runs several experiments in parallel, each in `out/<name>`.
pub fn run_experiments<T: Real>(
    names: &[&str],
    cfg: &ExperimentConfig<T>,
    out: impl AsRef<Path>,
) -> Result<Vec<ExperimentOutcome>> {
    let out = out.as_ref();
    names.par_iter().map(|name| run_experiment(name, cfg, out.join(name))).collect()
}

fn write_rows(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn save_run<T: Real>(dir: &Path, case: &str, q_d: &MultiTrajectory<T>, u: &MultiTrajectory<T>, y: &MultiTrajectory<T>) -> Result<()> {
    q_d.save_csv(dir.join(format!("{case}_qd.csv")))?;
    u.save_csv(dir.join(format!("{case}_u.csv")))?;
    y.save_csv(dir.join(format!("{case}_y.csv")))
}

fn error_rows<T: Real>(label: &str, report: &ErrorReport<T>, units: Units) -> Result<Vec<SummaryRow>> {
    let report = report.to_units(units);
    let base = report
        .uncompensated
        .as_ref()
        .ok_or_else(|| invalid("report", "needs an uncompensated baseline"))?;
    let mut rows = Vec::new();
    for (j, (c, u)) in report.joints.iter().zip(base).enumerate() {
        for (metric, cv, uv) in [("l2", c.l2, u.l2), ("linf", c.linf, u.linf)] {
            rows.push(SummaryRow {
                experiment: label.to_string(),
                joint: j + 1,
                metric: format!("{metric}_{}", units.label()),
                uncompensated: uv.as_f64(),
                compensated: cv.as_f64(),
                ratio: (cv / uv).as_f64(),
            });
        }
    }
    Ok(rows)
}

/// Writes the run CSVs and its error table, returning the rows.
fn record_run<T: Real>(
    dir: &Path,
    experiment: &str,
    case: &str,
    q_d: &MultiTrajectory<T>,
    run: &PipelineRun<T>,
    units: Units,
) -> Result<Vec<SummaryRow>> {
    save_run(dir, case, q_d, &run.u, &run.y)?;
    let rows = error_rows(&format!("{experiment}/{case}"), &run.errors, units)?;
    write_rows(&dir.join(format!("{case}_errors.csv")), &rows)?;
    Ok(rows)
}

fn sim_models<T: Real>(cfg: &ExperimentConfig<T>, plant: &MultiAxisPlant<T>) -> Result<Vec<Mlp<T>>> {
    let models = match &cfg.models {
        Some(dir) => load_models(dir)?,
        None => train_pipeline(plant, &cfg.seeded_pipeline())?.models,
    };
    if models.len() != plant.n_joints() {
        return Err(Error::ChannelMismatch {
            expected: plant.n_joints(),
            actual: models.len(),
        });
    }
    Ok(models)
}

fn descent<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let case = SineCase {
        amplitude: cfg.descent.amplitude,
        omega: cfg.descent.omega,
        phase: T::zero(),
    };
    let q_d = sine_trajectory(&case, plant.n_joints(), cfg.length)?;
    let runs = refine_multi(&plant, &q_d, &cfg.descent.ilc)?;
    let mut w = csv::Writer::from_path(out.join("descent_history.csv"))?;
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=runs.len()).map(|j| format!("j{j}")));
    w.write_record(&header)?;
    let longest = runs.iter().map(|r| r.error_history.len()).max().unwrap_or(0);
    for k in 0..longest {
        let mut row = vec![k.to_string()];
        row.extend(runs.iter().map(|r| r.error_history.get(k).map(|e| format!("{:?}", e.as_f64())).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    let u = MultiTrajectory::from_channels(runs.iter().map(|r| r.u_final().clone()).collect())?;
    let y = MultiTrajectory::from_channels(runs.iter().map(|r| r.y_final.clone()).collect())?;
    save_run(out, "descent", &q_d, &u, &y)?;
    Ok(runs
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let (first, last) = (r.error_history[0], r.final_error());
            SummaryRow {
                experiment: "descent".into(),
                joint: j + 1,
                metric: "l2_deg".into(),
                uncompensated: first.as_f64(),
                compensated: last.as_f64(),
                ratio: (last / first).as_f64(),
            }
        })
        .collect())
}

fn sinusoid_suite<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let models = sim_models(cfg, &plant)?;
    let mut rows = Vec::new();
    for (i, case) in cfg.sinusoids.iter().enumerate() {
        let q_d = sine_trajectory(case, plant.n_joints(), cfg.length)?;
        let run = closed_pipeline_eval(&plant, &models, &q_d, cfg.stitching, cfg.transient_samples)?;
        rows.extend(record_run(out, "sinusoid-suite", &format!("sine_{i}"), &q_d, &run, cfg.units)?);
    }
    Ok(rows)
}

fn chirp<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let models = sim_models(cfg, &plant)?;
    let q_d = chirp_trajectory(&cfg.chirp, plant.n_joints(), cfg.length)?;
    let run = closed_pipeline_eval(&plant, &models, &q_d, cfg.stitching, cfg.transient_samples)?;
    record_run(out, "chirp", "chirp", &q_d, &run, cfg.units)
}

/// ILC result on a sharp-cornered trapezoid, with the acceleration the
/// refined command needs compared to the desired profile's.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerStudy<T> {
    pub error_history: Vec<Vec<T>>,
    pub desired_peak_acceleration: Vec<T>,
    pub input_peak_acceleration: Vec<T>,
    /// Sample indices where the refined command exceeds the profile's
    /// acceleration bound.
    pub flagged: Vec<Vec<usize>>,
    pub q_d: MultiTrajectory<T>,
    pub u: MultiTrajectory<T>,
    pub y: MultiTrajectory<T>,
}

pub fn trapezoid_corner_study<T: Real>(
    plant: &MultiAxisPlant<T>,
    case: &TrapezoidCase<T>,
    length: usize,
) -> Result<CornerStudy<T>> {
    let kind = TrajectoryKind::Trapezoid {
        distance: case.distance,
        vmax: case.vmax,
        amax: case.amax,
        dwell: case.dwell,
        offset: T::zero(),
    };
    let one = generate(&TrajectorySpec::new(kind).with_length(length))?;
    let q_d = MultiTrajectory::from_channels(vec![one; plant.n_joints()])?;
    let runs = refine_multi(plant, &q_d, &case.ilc)?;
    let u = MultiTrajectory::from_channels(runs.iter().map(|r| r.u_final().clone()).collect())?;
    let y = MultiTrajectory::from_channels(runs.iter().map(|r| r.y_final.clone()).collect())?;
    let mut desired_peak = Vec::new();
    let mut input_peak = Vec::new();
    let mut flagged = Vec::new();
    for (j, r) in runs.iter().enumerate() {
        let d = validate_limits(&q_d.channel(j), T::infinity(), case.amax * T::lit(1.01))?;
        let uu = r.u_final();
        let lim = validate_limits(uu, T::infinity(), case.amax * T::lit(1.01))?;
        desired_peak.push(d.max_acceleration);
        input_peak.push(lim.max_acceleration);
        flagged.push(lim.acceleration_violations);
    }
    Ok(CornerStudy {
        error_history: runs.iter().map(|r| r.error_history.clone()).collect(),
        desired_peak_acceleration: desired_peak,
        input_peak_acceleration: input_peak,
        flagged,
        q_d,
        u,
        y,
    })
}

fn trapezoid_corner<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let study = trapezoid_corner_study(&plant, &cfg.trapezoid, cfg.length)?;
    save_run(out, "trapezoid", &study.q_d, &study.u, &study.y)?;
    let mut rows = Vec::new();
    for j in 0..plant.n_joints() {
        let h = &study.error_history[j];
        let (first, last) = (h[0], *h.last().expect("non-empty history"));
        rows.push(SummaryRow {
            experiment: "trapezoid-corner".into(),
            joint: j + 1,
            metric: "l2_deg".into(),
            uncompensated: first.as_f64(),
            compensated: last.as_f64(),
            ratio: (last / first).as_f64(),
        });
        let (d, u) = (study.desired_peak_acceleration[j], study.input_peak_acceleration[j]);
        rows.push(SummaryRow {
            experiment: "trapezoid-corner".into(),
            joint: j + 1,
            metric: "peak_accel_deg_s2".into(),
            uncompensated: d.as_f64(),
            compensated: u.as_f64(),
            ratio: (u / d).as_f64(),
        });
    }
    let mut w = csv::Writer::from_path(out.join("trapezoid_flagged.csv"))?;
    w.write_record(["joint", "sample"])?;
    for (j, f) in study.flagged.iter().enumerate() {
        for k in f {
            w.write_record([(j + 1).to_string(), k.to_string()])?;
        }
    }
    w.flush()?;
    Ok(rows)
}

/// Sim-trained and output-layer-retrained models compared on the physical
/// plant.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferStudy<T> {
    pub q_d: MultiTrajectory<T>,
    pub sim_trained: PipelineRun<T>,
    pub retrained: PipelineRun<T>,
    pub retrained_models: Vec<Mlp<T>>,
}

pub fn transfer_study<T: Real>(
    physical: &MultiAxisPlant<T>,
    models: &[Mlp<T>],
    pipeline: &PipelineConfig<T>,
    case: &TransferCase<T>,
    length: usize,
    stitching: Stitching,
    transient_samples: usize,
) -> Result<TransferStudy<T>> {
    let mut pcfg = pipeline.clone();
    pcfg.corpus.n_traj = case.n_traj;
    pcfg.corpus.seed = pipeline.corpus.seed.wrapping_add(1000);
    let (dataset, _) = collect_dataset(physical, &pcfg)?;
    let (retrained_models, _) = retrain_models(models, &dataset, &case.retrain)?;
    let q_d = sine_trajectory(&case.test, physical.n_joints(), length)?;
    let sim_trained = closed_pipeline_eval(physical, models, &q_d, stitching, transient_samples)?;
    let retrained = closed_pipeline_eval(physical, &retrained_models, &q_d, stitching, transient_samples)?;
    Ok(TransferStudy {
        q_d,
        sim_trained,
        retrained,
        retrained_models,
    })
}

fn transfer<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let setup = cfg.setup()?;
    let nominal = setup.nominal()?;
    let physical = setup.physical()?;
    let models = sim_models(cfg, &nominal)?;
    let study = transfer_study(
        &physical,
        &models,
        &cfg.seeded_pipeline(),
        &cfg.transfer,
        cfg.length,
        cfg.stitching,
        cfg.transient_samples,
    )?;
    let mut rows = record_run(out, "transfer", "sim_trained", &study.q_d, &study.sim_trained, cfg.units)?;
    rows.extend(record_run(out, "transfer", "retrained", &study.q_d, &study.retrained, cfg.units)?);
    Ok(rows)
}

fn cross_plant<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let models = sim_models(cfg, &plant)?;
    let q_d = chirp_trajectory(&cfg.chirp, plant.n_joints(), cfg.length)?;
    let mut rows = Vec::new();
    for (i, v) in cfg.cross_plant.iter().enumerate() {
        let alt = v.apply(&plant)?;
        let run = closed_pipeline_eval(&alt, &models, &q_d, cfg.stitching, cfg.transient_samples)?;
        rows.extend(record_run(out, "cross-plant", &format!("plant_{i}"), &q_d, &run, cfg.units)?);
    }
    Ok(rows)
}

fn architecture<T: Real>(cfg: &ExperimentConfig<T>, out: &Path) -> Result<Vec<SummaryRow>> {
    let plant = cfg.nominal_plant()?;
    let base = cfg.seeded_pipeline();
    let (dataset, _) = collect_dataset(&plant, &base)?;
    let q_d = chirp_trajectory(&cfg.chirp, plant.n_joints(), cfg.length)?;
    let mut rows = Vec::new();
    for hidden in &cfg.architectures {
        let label = hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("x");
        let pcfg = PipelineConfig {
            hidden: hidden.clone(),
            ..base.clone()
        };
        let (models, _) = train_on_dataset(&dataset, &pcfg)?;
        let run = closed_pipeline_eval(&plant, &models, &q_d, cfg.stitching, cfg.transient_samples)?;
        rows.extend(record_run(out, "architecture", &format!("hidden_{label}"), &q_d, &run, cfg.units)?);
    }
    Ok(rows)
}
