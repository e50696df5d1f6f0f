//! Flat `key=value` scenario configuration files.
//!
//! ```text
//! # one key per line, `#` starts a comment
//! instance=instances/a280_n279_bounded-strongly-corr_01.ttp
//! feature=items
//! d=3
//! z=m            # or a positive evaluation count
//! epochs=10
//! runs=30
//! seed=42
//! algorithms=items-bitflip,items-packiterative-bitflip   # optional
//! wall_clock=600                                         # optional, seconds
//! id=a280-items-d3                                       # optional
//! ```
//!
//! Instead of `instance`, a synthetic instance can be described with `cities`,
//! `items_per_city`, `kind`, `capacity_category` and `instance_seed`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::dynamics::Feature;
use crate::error::{Error, Result};
use crate::io::generate::{GeneratorParams, KnapsackKind};
use crate::model::Instance;
use crate::solvers::Pipeline;

const KEYS: [&str; 15] = [
    "id",
    "instance",
    "cities",
    "items_per_city",
    "kind",
    "capacity_category",
    "instance_seed",
    "feature",
    "d",
    "z",
    "wall_clock",
    "epochs",
    "runs",
    "seed",
    "algorithms",
];

const GENERATOR_KEYS: [&str; 5] = [
    "cities",
    "items_per_city",
    "kind",
    "capacity_category",
    "instance_seed",
];

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Generated(GeneratorParams),
}

/// Epoch length in evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    Evaluations(u64),
    /// One evaluation per item of the instance.
    ItemCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: Option<String>,
    pub instance: InstanceSource,
    pub feature: Feature,
    /// Percentage of entities flipped per disruption, in `(0, 100]`.
    pub disruption_percent: f64,
    pub period: Period,
    pub wall_clock_secs: Option<f64>,
    pub epochs: usize,
    pub runs: usize,
    pub master_seed: u64,
    pub algorithms: Vec<Pipeline>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.disruption_percent > 0.0 && self.disruption_percent <= 100.0) {
            return Err(Error::Config(format!(
                "d must be in (0, 100], got {}",
                self.disruption_percent
            )));
        }
        if self.period == Period::Evaluations(0) {
            return Err(Error::Config("z must be at least 1".into()));
        }
        if self.epochs == 0 || self.runs == 0 {
            return Err(Error::Config("epochs and runs must be at least 1".into()));
        }
        if let Some(secs) = self.wall_clock_secs {
            if !(secs > 0.0) {
                return Err(Error::Config(format!(
                    "wall_clock must be positive, got {secs}"
                )));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms configured".into()));
        }
        if let Some(p) = self.algorithms.iter().find(|p| p.feature() != self.feature) {
            return Err(Error::Config(format!(
                "pipeline {p} does not apply to feature {}",
                self.feature
            )));
        }
        if let Some(id) = &self.id {
            check_id(id)?;
        }
        if let InstanceSource::Generated(params) = &self.instance {
            params.validate()?;
        }
        Ok(())
    }

    pub fn period_for(&self, instance: &Instance) -> u64 {
        match self.period {
            Period::Evaluations(z) => z,
            Period::ItemCount => instance.m() as u64,
        }
    }

    /// Configured id, or one derived from instance name, feature, d and z.
    pub fn scenario_id(&self, instance: &Instance) -> String {
        if let Some(id) = &self.id {
            return id.clone();
        }
        let raw = format!(
            "{}_{}_d{}_z{}",
            instance.name(),
            self.feature,
            self.disruption_percent,
            self.period_for(instance)
        );
        raw.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "_.-".contains(c) {
                    c
                } else {
                    '-'
                }
            })
            .collect()
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        if let Some(id) = &self.id {
            put("id", id.clone());
        }
        match &self.instance {
            InstanceSource::File(path) => put("instance", path.display().to_string()),
            InstanceSource::Generated(p) => {
                put("cities", p.cities.to_string());
                put("items_per_city", p.items_per_city.to_string());
                put("kind", p.kind.to_string());
                put("capacity_category", p.capacity_category.to_string());
                put("instance_seed", p.seed.to_string());
            }
        }
        put("feature", self.feature.to_string());
        put("d", self.disruption_percent.to_string());
        put(
            "z",
            match self.period {
                Period::Evaluations(z) => z.to_string(),
                Period::ItemCount => "m".into(),
            },
        );
        if let Some(secs) = self.wall_clock_secs {
            put("wall_clock", secs.to_string());
        }
        put("epochs", self.epochs.to_string());
        put("runs", self.runs.to_string());
        put("seed", self.master_seed.to_string());
        let names: Vec<&str> = self.algorithms.iter().map(|p| p.as_str()).collect();
        put("algorithms", names.join(","));
        out
    }
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.-".contains(c))
    {
        return Err(Error::Config(format!(
            "scenario id `{id}` must be non-empty and use only letters, digits, `_`, `.` or `-`"
        )));
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut values: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, content, "expected `key=value`"))?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::parse(line, key, "unknown key"))?;
        if values
            .insert(known, (line, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::parse(line, key, "duplicate key"));
        }
    }
    let last = text.lines().count() + 1;

    let required = |key: &str| -> Result<&(usize, String)> {
        values
            .get(key)
            .ok_or_else(|| Error::parse(last, key, "missing mandatory key"))
    };
    fn parse_as<T: std::str::FromStr>(key: &str, entry: &(usize, String)) -> Result<T> {
        entry
            .1
            .parse()
            .map_err(|_| Error::parse(entry.0, key, format!("cannot parse `{}`", entry.1)))
    }

    let has_generator = GENERATOR_KEYS.iter().any(|k| values.contains_key(k));
    let instance = match (values.get("instance"), has_generator) {
        (Some(entry), false) => InstanceSource::File(PathBuf::from(&entry.1)),
        (Some(entry), true) => {
            return Err(Error::parse(
                entry.0,
                "instance",
                "cannot combine `instance` with generator keys",
            ))
        }
        (None, true) => {
            let kind_entry = required("kind")?;
            let kind: KnapsackKind = kind_entry
                .1
                .parse()
                .map_err(|msg: String| Error::parse(kind_entry.0, "kind", msg))?;
            InstanceSource::Generated(GeneratorParams {
                cities: parse_as("cities", required("cities")?)?,
                items_per_city: parse_as("items_per_city", required("items_per_city")?)?,
                kind,
                capacity_category: parse_as("capacity_category", required("capacity_category")?)?,
                seed: parse_as("instance_seed", required("instance_seed")?)?,
            })
        }
        (None, false) => return Err(Error::parse(last, "instance", "missing mandatory key")),
    };

    let feature_entry = required("feature")?;
    let feature: Feature = feature_entry
        .1
        .parse()
        .map_err(|msg: String| Error::parse(feature_entry.0, "feature", msg))?;

    let d_entry = required("d")?;
    let disruption_percent: f64 = parse_as("d", d_entry)?;
    if !(disruption_percent > 0.0 && disruption_percent <= 100.0) {
        return Err(Error::parse(
            d_entry.0,
            "d",
            format!("must be in (0, 100], got {disruption_percent}"),
        ));
    }

    let z_entry = required("z")?;
    let period = if z_entry.1 == "m" {
        Period::ItemCount
    } else {
        let z: u64 = parse_as("z", z_entry)?;
        if z == 0 {
            return Err(Error::parse(z_entry.0, "z", "must be at least 1"));
        }
        Period::Evaluations(z)
    };

    let positive = |key: &str| -> Result<usize> {
        let entry = required(key)?;
        let v: usize = parse_as(key, entry)?;
        if v == 0 {
            return Err(Error::parse(entry.0, key, "must be at least 1"));
        }
        Ok(v)
    };
    let epochs = positive("epochs")?;
    let runs = positive("runs")?;
    let master_seed: u64 = parse_as("seed", required("seed")?)?;

    let wall_clock_secs = values
        .get("wall_clock")
        .map(|entry| parse_as::<f64>("wall_clock", entry))
        .transpose()?;

    let algorithms = match values.get("algorithms") {
        Some((line, list)) => list
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<Pipeline>()
                    .map_err(|e| Error::parse(*line, "algorithms", e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?,
        None => Pipeline::for_feature(feature).collect(),
    };

    let config = ScenarioConfig {
        id: values.get("id").map(|e| e.1.clone()),
        instance,
        feature,
        disruption_percent,
        period,
        wall_clock_secs,
        epochs,
        runs,
        master_seed,
        algorithms,
    };
    config.validate()?;
    Ok(config)
}
