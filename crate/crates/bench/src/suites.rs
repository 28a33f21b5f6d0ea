//! Timed workloads. Each case cycles through a pool of pre-drawn random
//! states so no single input is timed repeatedly.

use std::hint::black_box;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecdyn::autodiff::{jvp, Dual};
use vecdyn::batch::{batch_eval, StateBatch};
use vecdyn::control::{diff_ik_step, osc_step, PostureGains, TaskTarget};
use vecdyn::dynamics::{crba, crba_loop, rnea, rnea_loop, GravitySpec};
use vecdyn::kinematics::frame_transform;
use vecdyn::model::RobotModel;

use crate::report::Record;
use crate::stats::{summarize, time_iterations};

pub const DEFAULT_BATCH_SIZES: [usize; 7] = [1, 4, 16, 64, 256, 1024, 4096];
const POOL: usize = 64;

/// Random state with `q ~ U[−π, π]` and rates `~ U[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
}

pub fn random_states(n_dof: usize, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw =
        |half: f64| -> Vec<f64> { (0..n_dof).map(|_| rng.random_range(-half..=half)).collect() };
    (0..count)
        .map(|_| State {
            q: draw(std::f64::consts::PI),
            qd: draw(1.0),
            qdd: draw(1.0),
        })
        .collect()
}

pub struct Timing {
    pub warmup: usize,
    pub iterations: usize,
}

fn record(robot: &str, case: &str, method: &str, batch_size: usize, samples: &[u64]) -> Record {
    let s = summarize(samples);
    Record {
        case: case.into(),
        robot: robot.into(),
        method: method.into(),
        batch_size,
        iterations: samples.len(),
        mean_us: s.mean_us,
        median_us: s.median_us,
        p99_us: s.p99_us,
        throughput: batch_size as f64 / (s.median_us * 1e-6),
    }
}

/// RNEA and CRBA, vectorized and loop, plain and JVP: 8 cases.
pub fn rbda(model: &RobotModel, robot: &str, timing: &Timing, seed: u64) -> Vec<Record> {
    let n = model.n_dof();
    let states = random_states(n, POOL, seed);
    let tangents = random_states(n, POOL, seed.wrapping_add(1));
    let g = GravitySpec::default();
    let stacked: Vec<Vec<f64>> = states
        .iter()
        .map(|s| [&s.q[..], &s.qd, &s.qdd].concat())
        .collect();
    let stacked_dir: Vec<Vec<f64>> = tangents
        .iter()
        .map(|s| [&s.q[..], &s.qd, &s.qdd].concat())
        .collect();
    let mut out = Vec::new();

    type Rnea = fn(
        &RobotModel,
        &[Dual],
        &[Dual],
        &[Dual],
        &GravitySpec,
        Option<&vecdyn::dynamics::ExternalForces<Dual>>,
    ) -> Result<Vec<Dual>, vecdyn::dynamics::DynamicsError>;
    let variants: [(&str, bool); 2] = [("vectorized", true), ("loop", false)];
    for (method, vectorized) in variants {
        let samples = time_iterations(timing.warmup, timing.iterations, |i| {
            let s = &states[i % POOL];
            let tau = if vectorized {
                rnea(model, &s.q, &s.qd, &s.qdd, &g, None)
            } else {
                rnea_loop(model, &s.q, &s.qd, &s.qdd, &g, None)
            };
            black_box(tau.expect("state sized to model"));
        });
        out.push(record(robot, "rnea", method, 1, &samples));

        let samples = time_iterations(timing.warmup, timing.iterations, |i| {
            let s = &states[i % POOL];
            let m = if vectorized {
                crba(model, &s.q)
            } else {
                crba_loop(model, &s.q)
            };
            black_box(m.expect("state sized to model"));
        });
        out.push(record(robot, "crba", method, 1, &samples));

        let rnea_dual: Rnea = if vectorized {
            rnea::<Dual>
        } else {
            rnea_loop::<Dual>
        };
        let samples = time_iterations(timing.warmup, timing.iterations, |i| {
            let f = |x: &[Dual]| {
                rnea_dual(model, &x[..n], &x[n..2 * n], &x[2 * n..], &g, None).expect("sized")
            };
            black_box(jvp(f, &stacked[i % POOL], &stacked_dir[i % POOL]).expect("sized"));
        });
        out.push(record(robot, "rnea_jvp", method, 1, &samples));

        let samples = time_iterations(timing.warmup, timing.iterations, |i| {
            let f = |q: &[Dual]| {
                let m = if vectorized {
                    crba(model, q)
                } else {
                    crba_loop(model, q)
                };
                m.expect("sized").matrix.as_slice().to_vec()
            };
            black_box(jvp(f, &states[i % POOL].q, &tangents[i % POOL].q).expect("sized"));
        });
        out.push(record(robot, "crba_jvp", method, 1, &samples));
    }
    out
}

/// Vectorized RNEA over batches of each size. Small sizes cycle through
/// several distinct batches so that every size sees at least `POOL`
/// different states.
pub fn batch(
    model: &RobotModel,
    robot: &str,
    timing: &Timing,
    seed: u64,
    sizes: &[usize],
    workers: usize,
) -> Vec<Record> {
    let n = model.n_dof();
    let g = GravitySpec::default();
    sizes
        .iter()
        .map(|&size| {
            let copies = POOL.div_ceil(size);
            let states = random_states(n, size * copies, seed);
            let batches: Vec<StateBatch> = states
                .chunks(size)
                .map(|chunk| {
                    let flat = |f: fn(&State) -> &Vec<f64>| {
                        chunk
                            .iter()
                            .flat_map(|s| f(s).iter().copied())
                            .collect::<Vec<f64>>()
                    };
                    StateBatch::new(n, size, flat(|s| &s.q), flat(|s| &s.qd))
                        .and_then(|b| b.with_qdd(flat(|s| &s.qdd)))
                        .expect("batch sized consistently")
                })
                .collect();
            let samples = time_iterations(timing.warmup, timing.iterations, |i| {
                let out = batch_eval(
                    |m, s| {
                        rnea(m, s.q, s.qd, s.qdd.expect("qdd present"), &g, None).expect("sized")
                    },
                    model,
                    &batches[i % batches.len()],
                    workers,
                );
                black_box(out.expect("batch matches model"));
            });
            record(robot, "rnea_batch", "vectorized", size, &samples)
        })
        .collect()
}

/// Differential IK and OSC steps toward a nearby pose of `frame`.
pub fn control(
    model: &RobotModel,
    robot: &str,
    frame: &str,
    timing: &Timing,
    seed: u64,
) -> Vec<Record> {
    let n = model.n_dof();
    let states = random_states(n, POOL, seed);
    let targets: Vec<TaskTarget> = states
        .iter()
        .map(|s| {
            let goal: Vec<f64> = s.q.iter().zip(&s.qdd).map(|(q, d)| q + 0.05 * d).collect();
            let pose = frame_transform(model, &goal, frame).expect("frame exists");
            TaskTarget::new(frame, pose)
                .with_gains([100.0; 6], [20.0; 6])
                .expect("nonnegative gains")
        })
        .collect();
    let gains = PostureGains::uniform(n, 10.0, 1.0);
    let g = GravitySpec::default();

    let ik = time_iterations(timing.warmup, timing.iterations, |i| {
        let s = &states[i % POOL];
        black_box(diff_ik_step(model, &s.q, &targets[i % POOL], 1e-2).expect("valid step"));
    });
    let osc = time_iterations(timing.warmup, timing.iterations, |i| {
        let s = &states[i % POOL];
        black_box(
            osc_step(model, &s.q, &s.qd, &targets[i % POOL], &s.q, &gains, &g).expect("valid step"),
        );
    });
    vec![
        record(robot, "diff_ik", "vectorized", 1, &ik),
        record(robot, "osc", "vectorized", 1, &osc),
    ]
}
