//! Parallel job execution and a wall clock for time limits.

use std::time::{Duration, Instant};

use branchlearn_core::bnb::{solve, SolveError, SolveReport};
use branchlearn_core::clock::Clock;
use branchlearn_core::train::{Job, Runner};
use rayon::prelude::*;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BRANCHLEARN_WORKERS";

#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

/// Runs jobs on a rayon pool. Every job gets its own clock, started when
/// the job starts, so per-solve time limits are honoured. Results do not
/// depend on the worker count.
pub struct RayonRunner {
    pool: rayon::ThreadPool,
}

impl RayonRunner {
    pub fn new(workers: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(RayonRunner { pool })
    }

    /// Worker count from `BRANCHLEARN_WORKERS`, else the number of CPUs.
    pub fn from_env() -> anyhow::Result<Self> {
        let workers = match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::new(workers)
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runner for RayonRunner {
    fn run_all(&self, jobs: Vec<Job<'_>>) -> Vec<Result<SolveReport, SolveError>> {
        self.pool.install(|| {
            jobs.into_par_iter()
                .map(|mut job| solve(job.instance, &job.config, &mut job.rule, &WallClock::start()))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use branchlearn_core::branching::BranchRule;
    use branchlearn_core::gen::{generate, FamilyKind, GenConfig};
    use branchlearn_core::train::SerialRunner;
    use branchlearn_core::SolveConfig;

    #[test]
    fn matches_serial_runner() {
        let insts: Vec<_> = (0..4)
            .map(|seed| {
                generate(&GenConfig {
                    family: FamilyKind::MultiKnapsack.enumerable(),
                    seed,
                })
                .unwrap()
            })
            .collect();
        let jobs = || {
            insts
                .iter()
                .enumerate()
                .map(|(k, inst)| Job {
                    instance: inst,
                    config: SolveConfig::best_first(),
                    rule: BranchRule::random(k as u64),
                })
                .collect::<Vec<_>>()
        };
        let strip = |r: Result<SolveReport, SolveError>| {
            let mut r = r.unwrap();
            r.wall_time = Duration::ZERO;
            r
        };
        let par: Vec<_> = RayonRunner::new(3).unwrap().run_all(jobs()).into_iter().map(strip).collect();
        let ser: Vec<_> = SerialRunner.run_all(jobs()).into_iter().map(strip).collect();
        assert_eq!(par, ser);
    }
}
