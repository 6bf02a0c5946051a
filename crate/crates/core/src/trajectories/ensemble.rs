use rayon::prelude::*;
use serde::Serialize;

use super::{SeedSpec, TrajectoryResult};
use crate::error::{Error, Result};

/// One trajectory of an ensemble, parameterised only by its seed.
pub trait TrajectoryJob: Sync {
    fn run(&self, seed: SeedSpec) -> Result<TrajectoryResult>;
}

impl<F> TrajectoryJob for F
where
    F: Fn(SeedSpec) -> Result<TrajectoryResult> + Sync,
{
    fn run(&self, seed: SeedSpec) -> Result<TrajectoryResult> {
        self(seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub n_traj: usize,
    pub master_seed: u64,
    /// Number of leading trajectories returned in full.
    pub keep: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl EnsembleOptions {
    pub fn new(n_traj: usize, master_seed: u64) -> Self {
        Self {
            n_traj,
            master_seed,
            keep: 0,
            workers: None,
        }
    }

    pub fn keep(mut self, keep: usize) -> Self {
        self.keep = keep;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Mean and standard error of a series across trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesStats {
    pub name: String,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    #[serde(skip)]
    m2: Vec<f64>,
    #[serde(skip)]
    n: usize,
}

impl SeriesStats {
    fn new(name: &str, len: usize) -> Self {
        Self {
            name: name.to_string(),
            mean: vec![0.0; len],
            std_err: vec![0.0; len],
            m2: vec![0.0; len],
            n: 0,
        }
    }

    fn push<I: IntoIterator<Item = f64>>(&mut self, values: I) -> Result<()> {
        self.n += 1;
        let n = self.n as f64;
        let mut count = 0;
        for (k, x) in values.into_iter().enumerate() {
            if k >= self.mean.len() {
                return Err(Error::InvalidParameter(format!("series '{}' changed length", self.name)));
            }
            let delta = x - self.mean[k];
            self.mean[k] += delta / n;
            self.m2[k] += delta * (x - self.mean[k]);
            count += 1;
        }
        if count != self.mean.len() {
            return Err(Error::InvalidParameter(format!("series '{}' changed length", self.name)));
        }
        Ok(())
    }

    fn finish(&mut self) {
        let n = self.n as f64;
        for (se, m2) in self.std_err.iter_mut().zip(&self.m2) {
            *se = if self.n > 1 { (m2 / (n - 1.0) / n).sqrt() } else { 0.0 };
        }
    }

    /// Sample standard deviation across trajectories.
    pub fn std_dev(&self) -> Vec<f64> {
        self.std_err.iter().map(|se| se * (self.n as f64).sqrt()).collect()
    }
}

/// Ensemble averages plus the first `keep` trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub n_traj: usize,
    pub master_seed: u64,
    pub times: Vec<f64>,
    pub observables: Vec<SeriesStats>,
    /// Per-step record signal `dy/dt`, one entry per channel.
    pub records: Vec<SeriesStats>,
    /// Cumulative jump counts at the sample times.
    pub counts: Vec<SeriesStats>,
    #[serde(skip)]
    pub trajectories: Vec<TrajectoryResult>,
}

impl EnsembleResult {
    pub fn observable(&self, name: &str) -> Option<&SeriesStats> {
        self.observables.iter().find(|s| s.name == name)
    }

    pub fn record(&self, channel: &str) -> Option<&SeriesStats> {
        self.records.iter().find(|s| s.name == channel)
    }

    pub fn counts(&self, label: &str) -> Option<&SeriesStats> {
        self.counts.iter().find(|s| s.name == label)
    }
}

struct Accumulator {
    result: EnsembleResult,
}

impl Accumulator {
    fn new(first: &TrajectoryResult, opts: &EnsembleOptions) -> Self {
        let len = first.times.len();
        Self {
            result: EnsembleResult {
                n_traj: opts.n_traj,
                master_seed: opts.master_seed,
                times: first.times.clone(),
                observables: first.observables.iter().map(|s| SeriesStats::new(&s.name, len)).collect(),
                records: first
                    .records
                    .iter()
                    .map(|r| SeriesStats::new(&r.channel, r.increments.len()))
                    .collect(),
                counts: first.jump_counts.iter().map(|(l, c)| SeriesStats::new(l, c.len())).collect(),
                trajectories: Vec::with_capacity(opts.keep.min(opts.n_traj)),
            },
        }
    }

    fn push(&mut self, traj: TrajectoryResult, keep: usize) -> Result<()> {
        let r = &mut self.result;
        if traj.observables.len() != r.observables.len()
            || traj.records.len() != r.records.len()
            || traj.jump_counts.len() != r.counts.len()
        {
            return Err(Error::InvalidParameter("trajectories disagree in shape".into()));
        }
        for (stats, s) in r.observables.iter_mut().zip(&traj.observables) {
            stats.push(s.values.iter().copied())?;
        }
        for (stats, rec) in r.records.iter_mut().zip(&traj.records) {
            stats.push(rec.increments.iter().map(|dy| dy / rec.dt))?;
        }
        for (stats, (_, c)) in r.counts.iter_mut().zip(&traj.jump_counts) {
            stats.push(c.iter().map(|&x| x as f64))?;
        }
        if r.trajectories.len() < keep {
            r.trajectories.push(traj);
        }
        Ok(())
    }

    fn finish(mut self) -> EnsembleResult {
        let r = &mut self.result;
        r.observables
            .iter_mut()
            .chain(r.records.iter_mut())
            .chain(r.counts.iter_mut())
            .for_each(SeriesStats::finish);
        self.result
    }
}

/// Trajectories are evaluated in parallel chunks and folded into the
/// statistics strictly in index order, so the output is bit-identical for
/// any worker count. The first failing trajectory (by index) aborts the run.
pub fn ensemble_run<J: TrajectoryJob + ?Sized>(job: &J, opts: EnsembleOptions) -> Result<EnsembleResult> {
    if opts.n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    match opts.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| run_chunks(job, &opts))
        }
        None => run_chunks(job, &opts),
    }
}

fn run_chunks<J: TrajectoryJob + ?Sized>(job: &J, opts: &EnsembleOptions) -> Result<EnsembleResult> {
    let chunk = (4 * rayon::current_num_threads()).max(16);
    let mut acc: Option<Accumulator> = None;
    let mut start = 0usize;
    while start < opts.n_traj {
        let end = (start + chunk).min(opts.n_traj);
        let batch: Vec<Result<TrajectoryResult>> = (start..end)
            .into_par_iter()
            .map(|i| job.run(SeedSpec::new(opts.master_seed, i as u64)))
            .collect();
        for traj in batch {
            let traj = traj?;
            let a = acc.get_or_insert_with(|| Accumulator::new(&traj, opts));
            a.push(traj, opts.keep)?;
        }
        start = end;
    }
    Ok(acc.expect("n_traj >= 1").finish())
}
