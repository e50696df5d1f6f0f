//! On-disk run archive.
//!
//! ```text
//! DIR/trajectories.csv          improvement rows plus one boundary row per epoch
//! DIR/epochs.csv                post-disruption and final objective per epoch
//! DIR/scenarios.csv             one row per scenario
//! DIR/disruptions/<id>.csv      the disruption trace of every run
//! DIR/manifest.json             scenario hashes, seeds, generator version, failures
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::dynamics::rng::RNG_VERSION;
use crate::dynamics::{DisruptionEvent, Feature};
use crate::error::{Error, Result};
use crate::io::tables::{
    read_disruption_trace, read_epoch_table, read_trajectories, write_disruption_trace,
    write_epoch_table, write_trajectories, TrajectoryRow,
};
use crate::solvers::Pipeline;

use super::{EpochRecord, PreparedScenario};

pub const ARCHIVE_FORMAT: &str = "dynttp-archive/v1";

const SCENARIO_HEADER: [&str; 10] = [
    "id",
    "instance",
    "feature",
    "d",
    "z",
    "epochs",
    "runs",
    "seed",
    "algorithms",
    "config_hash",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub id: String,
    pub instance_name: String,
    pub feature: Feature,
    pub disruption_percent: f64,
    pub period: u64,
    pub epochs: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Pipeline>,
    pub config_hash: String,
}

impl ScenarioSummary {
    pub fn of(scenario: &PreparedScenario) -> Self {
        let cfg = &scenario.config;
        Self {
            id: scenario.id.clone(),
            instance_name: scenario.instance.name().to_string(),
            feature: cfg.feature,
            disruption_percent: cfg.disruption_percent,
            period: scenario.period,
            epochs: cfg.epochs,
            runs: cfg.runs,
            master_seed: cfg.master_seed,
            algorithms: cfg.algorithms.clone(),
            config_hash: scenario.config_hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunFailure {
    pub scenario_id: String,
    pub run: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    pub scenarios: Vec<ScenarioSummary>,
    /// Sorted by scenario id, pipeline, run and epoch.
    pub records: Vec<EpochRecord>,
    /// Per scenario id: `(run, event)` sorted by run, then epoch.
    pub traces: BTreeMap<String, Vec<(usize, DisruptionEvent)>>,
    pub failures: Vec<RunFailure>,
}

fn missing(path: &Path) -> Error {
    Error::Config(format!(
        "archive incomplete: cannot open {}",
        path.display()
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|_| missing(path))
}

impl Archive {
    pub fn sort_records(&mut self) {
        self.records.sort_by(|a, b| {
            (&a.scenario_id, a.pipeline, a.run, a.epoch).cmp(&(
                &b.scenario_id,
                b.pipeline,
                b.run,
                b.epoch,
            ))
        });
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioSummary> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    /// Pipelines present in the records, in canonical order.
    pub fn pipelines(&self) -> Vec<Pipeline> {
        let mut out: Vec<Pipeline> = self.records.iter().map(|r| r.pipeline).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("disruptions"))?;
        write_trajectories(
            &self.records,
            BufWriter::new(File::create(dir.join("trajectories.csv"))?),
        )?;
        write_epoch_table(
            &self.records,
            BufWriter::new(File::create(dir.join("epochs.csv"))?),
        )?;

        let mut table =
            csv::Writer::from_writer(BufWriter::new(File::create(dir.join("scenarios.csv"))?));
        table.write_record(SCENARIO_HEADER)?;
        for s in &self.scenarios {
            let algorithms: Vec<&str> = s.algorithms.iter().map(|p| p.as_str()).collect();
            table.write_record([
                s.id.clone(),
                s.instance_name.clone(),
                s.feature.to_string(),
                s.disruption_percent.to_string(),
                s.period.to_string(),
                s.epochs.to_string(),
                s.runs.to_string(),
                s.master_seed.to_string(),
                algorithms.join(";"),
                s.config_hash.clone(),
            ])?;
        }
        table.flush()?;

        for (id, events) in &self.traces {
            let path = dir.join("disruptions").join(format!("{id}.csv"));
            write_disruption_trace(events, BufWriter::new(File::create(path)?))?;
        }

        let mut manifest = BufWriter::new(File::create(dir.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut manifest, &self.manifest())?;
        manifest.write_all(b"\n")?;
        manifest.flush()?;
        Ok(())
    }

    pub fn manifest(&self) -> Value {
        let scenarios: Vec<Value> = self
            .scenarios
            .iter()
            .map(|s| {
                json!({
                    "id": s.id,
                    "instance": s.instance_name,
                    "config_sha256": s.config_hash,
                    "master_seed": s.master_seed,
                    "runs": s.runs,
                    "epochs": s.epochs,
                })
            })
            .collect();
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({ "scenario_id": f.scenario_id, "run": f.run, "message": f.message }))
            .collect();
        json!({
            "format": ARCHIVE_FORMAT,
            "generator": concat!("dynttp ", env!("CARGO_PKG_VERSION")),
            "rng": RNG_VERSION,
            "scenarios": scenarios,
            "failures": failures,
        })
    }

    pub fn read_from(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "archive directory {} does not exist",
                dir.display()
            )));
        }
        let manifest: Value = serde_json::from_reader(open(&dir.join("manifest.json"))?)?;
        if manifest["format"] != ARCHIVE_FORMAT {
            return Err(Error::Config(format!(
                "unsupported archive format {}",
                manifest["format"]
            )));
        }
        let failures = manifest["failures"]
            .as_array()
            .map(|list| {
                list.iter()
                    .map(|f| RunFailure {
                        scenario_id: f["scenario_id"].as_str().unwrap_or_default().to_string(),
                        run: f["run"].as_u64().unwrap_or_default() as usize,
                        message: f["message"].as_str().unwrap_or_default().to_string(),
                    })
                    .collect()
            })
            .unwrap_or_default();

        let scenarios = read_scenarios(&dir.join("scenarios.csv"))?;
        let mut traces = BTreeMap::new();
        for s in &scenarios {
            let path = dir.join("disruptions").join(format!("{}.csv", s.id));
            traces.insert(s.id.clone(), read_disruption_trace(open(&path)?)?);
        }

        let mut groups: HashMap<(String, Pipeline, usize, usize), Vec<TrajectoryRow>> =
            HashMap::new();
        for row in read_trajectories(open(&dir.join("trajectories.csv"))?)? {
            let key = (row.scenario_id.clone(), row.algorithm, row.run, row.epoch);
            groups.entry(key).or_default().push(row);
        }
        let events: HashMap<(&str, usize, usize), &DisruptionEvent> = traces
            .iter()
            .flat_map(|(id, list)| {
                list.iter()
                    .map(move |(run, e)| ((id.as_str(), *run, e.epoch), e))
            })
            .collect();

        let mut records = Vec::new();
        for row in read_epoch_table(open(&dir.join("epochs.csv"))?)? {
            let key = (row.scenario_id.clone(), row.algorithm, row.run, row.epoch);
            let describe = || format!("{} {} run {} epoch {}", key.0, key.1, key.2, key.3);
            let points = groups.remove(&key).ok_or_else(|| {
                Error::Config(format!(
                    "archive incomplete: no trajectory for {}",
                    describe()
                ))
            })?;
            let event = (*events
                .get(&(row.scenario_id.as_str(), row.run, row.epoch))
                .ok_or_else(|| {
                    Error::Config(format!(
                        "archive incomplete: no disruption for {}",
                        describe()
                    ))
                })?)
            .clone();
            let improvements = points[..points.len() - 1]
                .iter()
                .map(|p| (p.evaluation, p.objective))
                .collect();
            records.push(EpochRecord {
                scenario_id: row.scenario_id,
                pipeline: row.algorithm,
                run: row.run,
                epoch: row.epoch,
                period: row.period,
                event,
                post_disruption_objective: row.post_disruption_objective,
                improvements,
                final_objective: row.final_objective,
                evaluations: row.evaluations,
            });
        }
        if let Some(key) = groups.keys().next() {
            return Err(Error::Config(format!(
                "archive inconsistent: trajectory rows for {} {} run {} epoch {} have no epoch summary",
                key.0, key.1, key.2, key.3
            )));
        }

        let mut archive = Archive {
            scenarios,
            records,
            traces,
            failures,
        };
        archive.sort_records();
        Ok(archive)
    }
}

fn read_scenarios(path: &Path) -> Result<Vec<ScenarioSummary>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    if reader.headers()?.iter().ne(SCENARIO_HEADER) {
        return Err(Error::parse(
            1,
            "header",
            format!("expected `{}`", SCENARIO_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| record.get(i).unwrap_or("");
        let bad = |i: usize| {
            Error::parse(
                line,
                SCENARIO_HEADER[i],
                format!("cannot parse `{}`", get(i)),
            )
        };
        let algorithms = get(8)
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<Pipeline>().map_err(|_| bad(8)))
            .collect::<Result<Vec<_>>>()?;
        out.push(ScenarioSummary {
            id: get(0).to_string(),
            instance_name: get(1).to_string(),
            feature: get(2).parse().map_err(|_| bad(2))?,
            disruption_percent: get(3).parse().map_err(|_| bad(3))?,
            period: get(4).parse().map_err(|_| bad(4))?,
            epochs: get(5).parse().map_err(|_| bad(5))?,
            runs: get(6).parse().map_err(|_| bad(6))?,
            master_seed: get(7).parse().map_err(|_| bad(7))?,
            algorithms,
            config_hash: get(9).to_string(),
        });
    }
    Ok(out)
}
