//! Scenario execution.
//!
//! A run builds one initial solution, then for every epoch draws the run's disruption
//! event and hands it to every configured pipeline. Each pipeline lives in its own world
//! (incumbent plus availability state), so pipelines share the disruption stream but
//! never each other's solutions. The output of epoch `e` is that pipeline's incumbent for
//! epoch `e + 1`.

mod archive;

pub use archive::{Archive, RunFailure, ScenarioSummary};

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::dynamics::rng::{StreamRng, DOMAIN_INITIAL, DOMAIN_SOLVER_BASE};
use crate::dynamics::{apply_event, AvailabilityState, DisruptionEvent, DisruptionStream};
use crate::error::{Error, Result};
use crate::io::{
    generate_instance, instance_to_string, parse_instance_str, InstanceSource, ScenarioConfig,
};
use crate::model::{self, check_feasible, Instance, Solution};
use crate::solvers::{
    bitflip, pack_iterative, run_pipeline, tour_construct_with, Budget, Pipeline,
};

/// Best-so-far trajectory of one pipeline in one epoch of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub scenario_id: String,
    pub pipeline: Pipeline,
    pub run: usize,
    pub epoch: usize,
    /// Evaluation budget of the epoch.
    pub period: u64,
    pub event: DisruptionEvent,
    /// Objective of the repaired incumbent before re-optimization.
    pub post_disruption_objective: f64,
    /// `(evaluations used so far, new best objective)`, evaluation counts ascending.
    pub improvements: Vec<(u64, f64)>,
    pub final_objective: f64,
    pub evaluations: u64,
}

impl EpochRecord {
    /// Best-so-far value after `tick` evaluations.
    pub fn value_at(&self, tick: u64) -> f64 {
        let seen = self.improvements.partition_point(|&(e, _)| e <= tick);
        if seen == 0 {
            self.post_disruption_objective
        } else {
            self.improvements[seen - 1].1
        }
    }

    /// Values at ticks `1..=period`.
    pub fn staircase(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.period as usize);
        let mut current = self.post_disruption_objective;
        let mut next = self.improvements.iter().peekable();
        for tick in 1..=self.period {
            while let Some(&&(e, f)) = next.peek() {
                if e > tick {
                    break;
                }
                current = f;
                next.next();
            }
            out.push(current);
        }
        out
    }
}

/// Epoch-0 solution: tour construction, greedy packing search, then bit-flip climbing
/// with up to `50·m` evaluations.
pub fn initial_solution(instance: &Instance, seed: u64) -> Result<Solution> {
    initial_solution_with(instance, &mut StreamRng::new(seed, DOMAIN_INITIAL, 0, 0))
}

pub fn initial_solution_with(instance: &Instance, rng: &mut StreamRng) -> Result<Solution> {
    let avail = AvailabilityState::full(instance);
    let tour = tour_construct_with(instance, &avail, rng);
    let packing = pack_iterative(instance, &tour, &avail, &mut Budget::unlimited())?;
    let start = Solution::new(tour, packing);
    let mut out = bitflip(
        instance,
        &start,
        &avail,
        &mut Budget::new(50 * instance.m() as u64),
    )?;
    model::objective(instance, &mut out, &mut 0u64)?;
    Ok(out)
}

/// A validated config together with its instance and derived id and period.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub id: String,
    pub config: ScenarioConfig,
    pub instance: Arc<Instance>,
    pub period: u64,
}

impl PreparedScenario {
    pub fn new(config: ScenarioConfig, instance: Instance) -> Result<Self> {
        config.validate()?;
        let id = config.scenario_id(&instance);
        let period = config.period_for(&instance);
        Ok(Self {
            id,
            config,
            instance: Arc::new(instance),
            period,
        })
    }

    /// Resolves the instance source; file paths are relative to `base_dir`.
    pub fn load(config: ScenarioConfig, base_dir: &Path) -> Result<Self> {
        let instance = match &config.instance {
            InstanceSource::File(path) => {
                let full = base_dir.join(path);
                let text = fs::read_to_string(&full).map_err(|e| {
                    Error::Config(format!("cannot read instance {}: {e}", full.display()))
                })?;
                parse_instance_str(&text)?
            }
            InstanceSource::Generated(params) => generate_instance(params)?,
        };
        Self::new(config, instance)
    }

    /// SHA-256 over the canonical config text and the instance file contents.
    pub fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.config.to_config_text().as_bytes());
        hasher.update(b"\n");
        hasher.update(instance_to_string(&self.instance).as_bytes());
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Everything produced by one run of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    pub initial_objective: f64,
    pub events: Vec<DisruptionEvent>,
    /// Ordered by epoch, then by the configured pipeline order.
    pub records: Vec<EpochRecord>,
}

struct World {
    pipeline: Pipeline,
    solution: Solution,
    avail: AvailabilityState,
}

pub fn run_single(scenario: &PreparedScenario, run: usize) -> Result<RunOutcome> {
    let cfg = &scenario.config;
    let instance = &*scenario.instance;
    let seed = cfg.master_seed;
    let run_id = run as u64;

    let mut initial = initial_solution_with(
        instance,
        &mut StreamRng::new(seed, DOMAIN_INITIAL, run_id, 0),
    )?;
    let initial_objective = model::objective(instance, &mut initial, &mut 0u64)?;
    let stream = DisruptionStream::new(seed, run_id, cfg.feature, cfg.disruption_percent, instance);
    let mut worlds: Vec<World> = cfg
        .algorithms
        .iter()
        .map(|&pipeline| World {
            pipeline,
            solution: initial.clone(),
            avail: AvailabilityState::full(instance),
        })
        .collect();

    let mut events = Vec::with_capacity(cfg.epochs);
    let mut records = Vec::with_capacity(cfg.epochs * worlds.len());
    for epoch in 0..cfg.epochs {
        let event = stream.event(epoch);
        for world in &mut worlds {
            apply_event(instance, &mut world.solution, &mut world.avail, &event)?;
            let post = model::objective(instance, &mut world.solution, &mut 0u64)?;

            let mut budget = Budget::new(scenario.period);
            if let Some(secs) = cfg.wall_clock_secs {
                budget = budget.with_wall_clock(Duration::from_secs_f64(secs));
            }
            if !world.pipeline.is_scratch() {
                budget = budget.with_baseline(post);
            }
            let domain = DOMAIN_SOLVER_BASE + world.pipeline.index() as u64;
            let mut rng = StreamRng::new(seed, domain, run_id, epoch as u64);
            let mut out = run_pipeline(
                world.pipeline,
                instance,
                &world.solution,
                &world.avail,
                &mut budget,
                &mut rng,
            )?;

            let report = check_feasible(instance, &out, &world.avail);
            if !report.is_feasible() {
                return Err(Error::Internal(format!(
                    "{} produced an infeasible solution in run {run}, epoch {epoch}: {:?}",
                    world.pipeline, report.violations
                )));
            }
            let improvements = budget.improvements().to_vec();
            let final_objective = improvements.last().map_or(post, |p| p.1);
            let actual = model::objective(instance, &mut out, &mut 0u64)?;
            if actual != final_objective {
                return Err(Error::Internal(format!(
                    "{} returned F={actual} but its trajectory ends at {final_objective}",
                    world.pipeline
                )));
            }
            records.push(EpochRecord {
                scenario_id: scenario.id.clone(),
                pipeline: world.pipeline,
                run,
                epoch,
                period: scenario.period,
                event: event.clone(),
                post_disruption_objective: post,
                improvements,
                final_objective,
                evaluations: budget.consumed(),
            });
            world.solution = out;
        }
        events.push(event);
    }
    Ok(RunOutcome {
        run,
        initial_objective,
        events,
        records,
    })
}

/// All runs of one scenario, sequentially.
pub fn run_scenario(scenario: &PreparedScenario) -> Result<Vec<EpochRecord>> {
    let mut records = Vec::new();
    for run in 0..scenario.config.runs {
        records.extend(run_single(scenario, run)?.records);
    }
    Ok(records)
}

/// Runs every `(scenario, run)` pair on a pool of `parallelism` threads. Failed runs are
/// collected in the archive instead of aborting the batch.
pub fn run_batch(scenarios: &[PreparedScenario], parallelism: usize) -> Result<Archive> {
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let mut ids: Vec<&str> = scenarios.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(dup) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("duplicate scenario id `{}`", dup[0])));
    }

    let jobs: Vec<(usize, usize)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(s, sc)| (0..sc.config.runs).map(move |r| (s, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    let outcomes: Vec<Result<RunOutcome>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(s, r)| run_single(&scenarios[s], r))
            .collect()
    });

    let mut archive = Archive::default();
    for sc in scenarios {
        archive.scenarios.push(ScenarioSummary::of(sc));
        archive.traces.insert(sc.id.clone(), Vec::new());
    }
    for (&(s, run), outcome) in jobs.iter().zip(outcomes) {
        let id = &scenarios[s].id;
        match outcome {
            Ok(out) => {
                let trace = archive.traces.get_mut(id).expect("trace per scenario");
                trace.extend(out.events.into_iter().map(|e| (run, e)));
                archive.records.extend(out.records);
            }
            Err(e) => archive.failures.push(RunFailure {
                scenario_id: id.clone(),
                run,
                message: e.to_string(),
            }),
        }
    }
    archive.sort_records();
    Ok(archive)
}
