//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line to stderr (bypassing output capture) before asserting.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use nnilc::compensator::{closed_pipeline_eval, Stitching};
use nnilc::dataset::{load_dataset, save_dataset};
use nnilc::eval::{
    chirp_trajectory, run_experiment, sine_trajectory, train_pipeline, transfer_study, trapezoid_corner_study,
    ChirpCase, ExperimentConfig, PipelineConfig, SineCase, TrainedModels, TransferCase, TrapezoidCase,
};
use nnilc::ilc::{adjoint_direction_lifted, adjoint_direction_modelfree, refine, GradientSource, IlcConfig};
use nnilc::nn::{load_models, save_models, Mlp};
use nnilc::plant::{LinearModel, MultiAxisPlant, PlantConfig, PlantModel, PlantSetup};
use nnilc::SampledTrajectory;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRANSIENT: usize = 50;

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("[acceptance {id}] {verdict} {name} ({:.1} s): {detail}\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn traj(v: Vec<f64>) -> SampledTrajectory<f64> {
    SampledTrajectory::new(DT, v)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Simulation-trained models shared by the generalization, transfer and
/// cross-plant criteria.
fn sim_trained() -> &'static (TrainedModels<f64>, Duration) {
    static CELL: OnceLock<(TrainedModels<f64>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let trained = train_pipeline(&MultiAxisPlant::default_six(), &PipelineConfig::default()).unwrap();
        (trained, t0.elapsed())
    })
}

#[test]
fn c1_adjoint_oracle_equivalence() {
    let t0 = Instant::now();
    let n = 200;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let linear = LinearModel {
            a: rng.gen_range(5.0..40.0),
            zeta: rng.gen_range(0.2..0.9),
            omega: rng.gen_range(5.0..30.0),
            dt: DT,
        };
        let delay = rng.gen_range(0..10);
        let plant = PlantModel::new(PlantConfig::linear(linear, delay)).unwrap();
        let g = lifted_matrix(plant.system(), delay, n);
        let q0 = rng.gen_range(-20.0..20.0);
        let u = traj(random_vec(seed + 100, n, 10.0).iter().map(|v| v + q0).collect());
        let y = plant.run(&u, q0).unwrap();
        let e = random_vec(seed + 200, n, 3.0);
        let y_d = y.sub(&traj(e.clone())).unwrap();
        let mf = adjoint_direction_modelfree(&plant, &u, &y, &y_d, &plant.hold_state(q0)).unwrap();
        let lf = adjoint_direction_lifted(&plant.lifted(), &traj(e.clone())).unwrap();
        let expected = matvec_t(&g, &e);
        worst = worst.max(rel_err(&mf.values, &expected)).max(rel_err(&lf.values, &expected));
    }
    let elapsed = t0.elapsed();
    let pass = worst < 1e-9 && elapsed < Duration::from_secs(5);
    report(1, "adjoint oracle equivalence", pass, elapsed, &format!("worst relative l2 error {worst:.2e} (< 1e-9)"));
    assert!(pass);
}

#[test]
fn c2_ilc_monotone_descent() {
    let t0 = Instant::now();
    let plant = PlantModel::new(PlantConfig::default()).unwrap();
    let y_d = traj(sine(3000, 5.0, 3.0, 0.0, 10.0));
    let run = refine(&plant, &y_d, &IlcConfig { max_iters: 20, ..IlcConfig::default() }).unwrap();
    let h = &run.error_history;
    let strictly = h.windows(2).all(|w| w[1] < w[0]);
    let reduction = 1.0 - run.final_error() / h[0];
    let elapsed = t0.elapsed();
    let pass = strictly && reduction >= 0.9 && run.iterations() <= 20 && elapsed < Duration::from_secs(30);
    report(
        2,
        "ILC monotone descent",
        pass,
        elapsed,
        &format!(
            "{} iterations, l2 {:.3} -> {:.4} deg, reduction {:.1}% (>= 90%), strictly decreasing: {strictly}",
            run.iterations(),
            h[0],
            run.final_error(),
            100.0 * reduction
        ),
    );
    assert!(pass, "{h:?}");
}

#[test]
fn c3_quadratic_descent_oracle() {
    let t0 = Instant::now();
    let n = 100;
    let delay = 6;
    let plant = PlantModel::new(PlantConfig::linear(LinearModel::default(), delay)).unwrap();
    let g = lifted_matrix(plant.system(), delay, n);
    let y_d = sine(n, 5.0, 8.0, 0.0, 0.0);
    let iters = 10;
    let cfg = IlcConfig { max_iters: iters, gradient_source: GradientSource::Lifted, ..IlcConfig::default() };
    let run = refine(&plant, &traj(y_d.clone()), &cfg).unwrap();
    // matrix-form steepest descent with the exact minimizing step
    let mut u = y_d.clone();
    let mut oracle = Vec::new();
    for _ in 0..=iters {
        let e = sub(&matvec(&g, &u), &y_d);
        oracle.push(norm(&e));
        let d = matvec_t(&g, &e);
        let gd = matvec(&g, &d);
        let alpha = norm(&d).powi(2) / norm(&gd).powi(2);
        u = u.iter().zip(&d).map(|(a, b)| a - alpha * b).collect();
    }
    let worst = run
        .error_history
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0f64, f64::max);
    let elapsed = t0.elapsed();
    let pass = run.error_history.len() == oracle.len() && worst <= 1e-8 && elapsed < Duration::from_secs(10);
    report(3, "quadratic-descent oracle", pass, elapsed, &format!("{iters} iterations, worst relative deviation {worst:.2e} (<= 1e-8)"));
    assert!(pass);
}

#[test]
fn c4_gradient_check() {
    let t0 = Instant::now();
    let dims = Mlp::<f64>::dims_for(&[100, 100]);
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let mut model = Mlp::<f64>::new(&dims, 1e-3, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for l in &mut model.layers {
            l.biases.iter_mut().for_each(|b| *b = rng.gen_range(-0.1..0.1));
        }
        let mut draw = seed;
        let (xs, ys) = loop {
            let xs: Vec<Vec<f64>> = (0..3).map(|i| random_vec(draw * 31 + i, 50, 1.0)).collect();
            let ys: Vec<Vec<f64>> = (0..3).map(|i| random_vec(draw * 37 + i + 1000, 25, 1.0)).collect();
            if xs.iter().all(|x| fd::clear_of_kinks(&model, x, 1e-4)) {
                break (xs, ys);
            }
            draw += 1000;
        };
        let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
        let (_, grads) = model.loss_and_grad(&xr, &yr).unwrap();
        let numeric = fd::central_difference_gradient(&model, &xs, &ys, 1e-6);
        worst = worst.max(fd::worst_relative_error(&grads, &numeric));
    }
    let elapsed = t0.elapsed();
    let pass = worst < 1e-6 && elapsed < Duration::from_secs(60);
    report(
        4,
        "MLP gradient check",
        pass,
        elapsed,
        &format!("5 models {dims:?}, 3-sample batches, worst per-parameter relative error {worst:.2e} (< 1e-6)"),
    );
    assert!(pass);
}

#[test]
fn c5_generalization() {
    let (trained, train_time) = sim_trained();
    let t0 = Instant::now();
    let plant = MultiAxisPlant::<f64>::default_six();
    let chirp = chirp_trajectory(&ChirpCase::default(), 6, 3000).unwrap();
    let sine = sine_trajectory(&SineCase { amplitude: 7.5, omega: 5.0, phase: 0.7 }, 6, 3000).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, q) in [("chirp 0.628-1.884 rad/s", &chirp), ("sine 5 rad/s", &sine)] {
        let run = closed_pipeline_eval(&plant, &trained.models, q, Stitching::NonOverlapping, TRANSIENT).unwrap();
        let ratios = run.errors.l2_ratios().unwrap();
        pass &= ratios.iter().all(|r| *r <= 0.25);
        detail.push(format!("{name} ratios {}", fmt(&ratios)));
    }
    let total = *train_time + t0.elapsed();
    pass &= total <= Duration::from_secs(30 * 60);
    report(5, "generalization", pass, total, &format!("{} (each <= 0.25)", detail.join("; ")));
    assert!(pass);
}

#[test]
fn c6_transfer_learning() {
    let (trained, _) = sim_trained();
    let t0 = Instant::now();
    let physical = PlantSetup::<f64>::default_six().physical().unwrap();
    let study = transfer_study(
        &physical,
        &trained.models,
        &PipelineConfig::default(),
        &TransferCase::default(),
        3000,
        Stitching::NonOverlapping,
        TRANSIENT,
    )
    .unwrap();
    let l2 = |r: &nnilc::compensator::PipelineRun<f64>| r.errors.joints.iter().map(|e| e.l2).collect::<Vec<_>>();
    let sim = l2(&study.sim_trained);
    let re = l2(&study.retrained);
    let unc: Vec<f64> = study.sim_trained.errors.uncompensated.as_ref().unwrap().iter().map(|e| e.l2).collect();
    let mut pass = true;
    for j in 0..6 {
        pass &= re[j] < sim[j];
        pass &= sim[j] <= 0.5 * unc[j] && re[j] <= 0.5 * unc[j];
    }
    let elapsed = t0.elapsed();
    pass &= elapsed <= Duration::from_secs(10 * 60);
    report(
        6,
        "transfer learning",
        pass,
        elapsed,
        &format!(
            "8 rad/s sine l2 per joint: uncompensated {}, sim-trained {}, retrained {} (retrained < sim-trained <= uncompensated/2)",
            fmt(&unc),
            fmt(&sim),
            fmt(&re)
        ),
    );
    assert!(pass);
}

#[test]
fn c7_cross_plant_generalization() {
    let (trained, _) = sim_trained();
    let t0 = Instant::now();
    let nominal = MultiAxisPlant::<f64>::default_six();
    let chirp = chirp_trajectory(&ChirpCase::default(), 6, 3000).unwrap();
    let variants = ExperimentConfig::<f64>::default().cross_plant;
    assert_eq!(variants.len(), 2);
    let mut pass = true;
    let mut detail = Vec::new();
    for v in &variants {
        let alt = v.apply(&nominal).unwrap();
        for (a, b) in alt.joints.iter().zip(&nominal.joints) {
            assert_eq!(a.delay_samples(), b.delay_samples());
            assert_ne!(a.config().linear.omega, b.config().linear.omega);
            assert_ne!(a.config().linear.zeta, b.config().linear.zeta);
        }
        let run = closed_pipeline_eval(&alt, &trained.models, &chirp, Stitching::NonOverlapping, TRANSIENT).unwrap();
        let ratios = run.errors.l2_ratios().unwrap();
        pass &= ratios.iter().all(|r| *r <= 0.5);
        detail.push(format!("omega x{}, zeta {:+}: ratios {}", v.omega_scale, v.zeta_offset, fmt(&ratios)));
    }
    let elapsed = t0.elapsed();
    pass &= elapsed <= Duration::from_secs(5 * 60);
    report(7, "cross-plant generalization", pass, elapsed, &format!("{} (each <= 0.5)", detail.join("; ")));
    assert!(pass);
}

#[test]
fn c8_trapezoid_corner_study() {
    let t0 = Instant::now();
    let plant = MultiAxisPlant::<f64>::default_six();
    let case = TrapezoidCase::<f64>::default();
    let study = trapezoid_corner_study(&plant, &case, 3000).unwrap();
    let mut pass = true;
    let mut ratios = Vec::new();
    let mut reductions = Vec::new();
    for j in 0..6 {
        let h = &study.error_history[j];
        pass &= h.windows(2).all(|w| w[1] < w[0]);
        reductions.push(h.last().unwrap() / h[0]);
        let ratio = study.input_peak_acceleration[j] / study.desired_peak_acceleration[j];
        ratios.push(ratio);
        pass &= ratio >= 5.0;

        // corners: samples where the desired profile accelerates
        let q = &study.q_d.channels[j];
        let accel: Vec<f64> = (1..q.len() - 1).map(|i| (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (DT * DT)).collect();
        let corners: Vec<usize> = (0..accel.len()).filter(|&i| accel[i].abs() > 0.25 * case.amax).map(|i| i + 1).collect();
        let near = |k: usize, set: &[usize]| set.iter().any(|&c| c.abs_diff(k) <= 12);
        let flagged = &study.flagged[j];
        pass &= !flagged.is_empty();
        pass &= corners.iter().all(|&c| near(c, flagged));
        // the excess is located at the corners
        let u = &study.u.channels[j];
        let at_corners = (1..u.len() - 1)
            .filter(|&i| near(i, &corners))
            .map(|i| ((u[i + 1] - 2.0 * u[i] + u[i - 1]) / (DT * DT)).abs())
            .fold(0.0f64, f64::max);
        pass &= at_corners >= 5.0 * study.desired_peak_acceleration[j];
    }
    let elapsed = t0.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    report(
        8,
        "trapezoid corner study",
        pass,
        elapsed,
        &format!(
            "final/initial l2 {}; peak input/desired acceleration {} (>= 5); every corner flagged",
            fmt(&reductions),
            fmt(&ratios)
        ),
    );
    assert!(pass);
}

#[test]
fn c9_persistence_and_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::<f64>::default();
    cfg.corpus.n_traj = 4;
    cfg.corpus.length = 600;
    cfg.train.epochs = 4;
    let plant = MultiAxisPlant::<f64>::default_six();
    let a = train_pipeline(&plant, &cfg).unwrap();
    let b = train_pipeline(&plant, &cfg).unwrap();
    let mut pass = a.dataset == b.dataset && a.reports == b.reports;
    pass &= a.models.iter().zip(&b.models).all(|(x, y)| x.to_bytes() == y.to_bytes());

    save_models(&a.models, dir.path().join("models")).unwrap();
    let back = load_models::<f64>(dir.path().join("models")).unwrap();
    pass &= back.iter().zip(&a.models).all(|(x, y)| x.to_bytes() == y.to_bytes() && x == y);
    let probe = sine(50, 4.0, 2.0, 0.1, 3.0);
    for (x, y) in back.iter().zip(&a.models) {
        let (px, py) = (x.infer(&probe).unwrap(), y.infer(&probe).unwrap());
        pass &= px.iter().zip(&py).all(|(p, q)| p.to_bits() == q.to_bits());
    }
    save_dataset(&a.dataset, dir.path().join("ds")).unwrap();
    let ds = load_dataset::<f64>(dir.path().join("ds")).unwrap();
    pass &= ds == a.dataset;
    save_dataset(&ds, dir.path().join("ds2")).unwrap();
    for entry in std::fs::read_dir(dir.path().join("ds")).unwrap() {
        let name = entry.unwrap().file_name();
        pass &= std::fs::read(dir.path().join("ds").join(&name)).unwrap() == std::fs::read(dir.path().join("ds2").join(&name)).unwrap();
    }

    let mut exp = ExperimentConfig::<f64>::default();
    exp.length = 600;
    exp.pipeline = cfg.clone();
    exp.seed = 5;
    let r1 = run_experiment("chirp", &exp, dir.path().join("e1")).unwrap();
    let r2 = run_experiment("chirp", &exp, dir.path().join("e2")).unwrap();
    pass &= r1.summary == r2.summary;
    for f in ["summary.csv", "chirp_u.csv", "chirp_y.csv"] {
        pass &= std::fs::read(r1.dir.join(f)).unwrap() == std::fs::read(r2.dir.join(f)).unwrap();
    }
    let elapsed = t0.elapsed();
    report(
        9,
        "round-trip persistence and determinism",
        pass,
        elapsed,
        "models, dataset and experiment outputs bit-identical across save/load and reruns",
    );
    assert!(pass);
}
