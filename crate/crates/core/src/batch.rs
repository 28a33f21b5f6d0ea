//! Data-parallel evaluation of a per-state function over a batch of states.
//!
//! States are split into contiguous chunks, one per worker, and each worker
//! writes only its own output rows. Every row is computed by the same code
//! path as a direct call, so results are bitwise independent of the worker
//! count.

use std::num::NonZeroUsize;
use std::thread;

use thiserror::Error;

use crate::model::RobotModel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BatchError {
    #[error("{field} has {got} values, expected {expected} ({states} states × {dof} DOFs)")]
    Shape {
        field: &'static str,
        got: usize,
        expected: usize,
        states: usize,
        dof: usize,
    },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("batch has {batch} DOFs per state, model has {model}")]
    ModelMismatch { batch: usize, model: usize },
}

/// `N` states of an `n`-DOF model, row-major (`N×n`).
#[derive(Clone, Debug, PartialEq)]
pub struct StateBatch {
    dof: usize,
    len: usize,
    q: Vec<f64>,
    qd: Vec<f64>,
    qdd: Option<Vec<f64>>,
    tau: Option<Vec<f64>>,
}

/// One row of a [`StateBatch`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateRef<'a> {
    pub q: &'a [f64],
    pub qd: &'a [f64],
    pub qdd: Option<&'a [f64]>,
    pub tau: Option<&'a [f64]>,
}

impl StateBatch {
    /// `q` and `qd` hold `len × dof` values each.
    pub fn new(dof: usize, len: usize, q: Vec<f64>, qd: Vec<f64>) -> Result<Self, BatchError> {
        let batch = Self {
            dof,
            len,
            q,
            qd,
            qdd: None,
            tau: None,
        };
        batch.check("q", batch.q.len())?;
        batch.check("qd", batch.qd.len())?;
        Ok(batch)
    }

    fn check(&self, field: &'static str, got: usize) -> Result<(), BatchError> {
        let expected = self.len * self.dof;
        if got != expected {
            return Err(BatchError::Shape {
                field,
                got,
                expected,
                states: self.len,
                dof: self.dof,
            });
        }
        Ok(())
    }

    pub fn with_qdd(mut self, qdd: Vec<f64>) -> Result<Self, BatchError> {
        self.check("qdd", qdd.len())?;
        self.qdd = Some(qdd);
        Ok(self)
    }

    pub fn with_tau(mut self, tau: Vec<f64>) -> Result<Self, BatchError> {
        self.check("tau", tau.len())?;
        self.tau = Some(tau);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn state(&self, i: usize) -> StateRef<'_> {
        let rows = i * self.dof..(i + 1) * self.dof;
        StateRef {
            q: &self.q[rows.clone()],
            qd: &self.qd[rows.clone()],
            qdd: self.qdd.as_ref().map(|v| &v[rows.clone()]),
            tau: self.tau.as_ref().map(|v| &v[rows]),
        }
    }
}

/// Hardware threads reported by the OS.
pub fn available_workers() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

/// Applies `f` to every state with up to `workers` threads.
pub fn batch_eval<R, F>(
    f: F,
    model: &RobotModel,
    batch: &StateBatch,
    workers: usize,
) -> Result<Vec<R>, BatchError>
where
    R: Send,
    F: Fn(&RobotModel, StateRef<'_>) -> R + Sync,
{
    if workers == 0 {
        return Err(BatchError::NoWorkers);
    }
    if batch.dof != model.n_dof() {
        return Err(BatchError::ModelMismatch {
            batch: batch.dof,
            model: model.n_dof(),
        });
    }
    let n = batch.len();
    let workers = workers.min(n.max(1));
    if workers == 1 {
        return Ok((0..n).map(|i| f(model, batch.state(i))).collect());
    }

    let chunk = n.div_ceil(workers);
    let f = &f;
    let parts: Vec<Vec<R>> = thread::scope(|s| {
        let handles: Vec<_> = (0..n)
            .step_by(chunk)
            .map(|start| {
                let end = (start + chunk).min(n);
                s.spawn(move || {
                    (start..end)
                        .map(|i| f(model, batch.state(i)))
                        .collect::<Vec<R>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("batch worker panicked"))
            .collect()
    });
    Ok(parts.into_iter().flatten().collect())
}
