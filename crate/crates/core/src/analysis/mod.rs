//! Aggregation of run archives.
//!
//! For every scenario and epoch, the runs of each pipeline are averaged tick by tick into
//! one best-so-far curve. All curves of the epoch are then mapped affinely to `[0, 1]`
//! using the smallest and largest averaged value of any pipeline at any tick. END is the
//! value at the last tick and AUC the mean over all ticks.

pub mod heatmap;
pub mod mann_whitney;
pub mod ranking;

pub use heatmap::{
    heatmap_export, scenario_heatmap, write_heatmap_csv, write_heatmap_ppm, HeatmapMatrix,
};
pub use mann_whitney::{
    mann_whitney_exact, mann_whitney_normal, mann_whitney_one_sided, midranks, MannWhitney,
};
pub use ranking::{ranking_report, write_significance_csv, PairTest, RankingReport, Slice};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{Archive, EpochRecord};
use crate::solvers::Pipeline;

/// Normalized value of a degenerate epoch where every averaged value is equal.
pub const DEGENERATE_VALUE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    End,
    Auc,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::End => "end",
            Metric::Auc => "auc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "end" => Ok(Metric::End),
            "auc" => Ok(Metric::Auc),
            _ => Err(format!("unknown metric `{s}` (expected end or auc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub end: f64,
    pub auc: f64,
}

impl EpochMetrics {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::End => self.end,
            Metric::Auc => self.auc,
        }
    }
}

/// Pointwise mean of the runs' staircases over ticks `1..=period`.
pub fn average_trajectory(records: &[&EpochRecord]) -> Result<Vec<f64>> {
    let first = records
        .first()
        .ok_or_else(|| Error::Analysis("cannot average an empty set of trajectories".into()))?;
    if let Some(other) = records.iter().find(|r| r.period != first.period) {
        return Err(Error::Analysis(format!(
            "trajectories have different periods ({} and {})",
            first.period, other.period
        )));
    }
    let mut sum = vec![0.0; first.period as usize];
    for rec in records {
        for (acc, v) in sum.iter_mut().zip(rec.staircase()) {
            *acc += v;
        }
    }
    let count = records.len() as f64;
    Ok(sum.into_iter().map(|s| s / count).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedEpoch {
    pub values: Vec<Vec<f64>>,
    pub min: f64,
    pub max: f64,
}

/// Affine map of all curves onto `[0, 1]` with shared bounds.
pub fn normalize_epoch(averaged: &[Vec<f64>]) -> NormalizedEpoch {
    let all = averaged.iter().flatten().copied();
    let min = all.clone().fold(f64::INFINITY, f64::min);
    let max = all.fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let values = averaged
        .iter()
        .map(|curve| {
            curve
                .iter()
                .map(|&v| {
                    if span > 0.0 {
                        ((v - min) / span).clamp(0.0, 1.0)
                    } else {
                        DEGENERATE_VALUE
                    }
                })
                .collect()
        })
        .collect();
    NormalizedEpoch { values, min, max }
}

pub fn metrics(trajectory: &[f64]) -> Result<EpochMetrics> {
    let end = *trajectory
        .last()
        .ok_or_else(|| Error::Analysis("metrics of an empty trajectory".into()))?;
    let auc = trajectory.iter().sum::<f64>() / trajectory.len() as f64;
    Ok(EpochMetrics { end, auc })
}

/// Averaged and normalized curves of every pipeline in one epoch of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochView {
    pub epoch: usize,
    pub pipelines: Vec<Pipeline>,
    pub averaged: Vec<Vec<f64>>,
    pub normalized: NormalizedEpoch,
}

impl EpochView {
    pub fn metrics(&self) -> Result<Vec<(Pipeline, EpochMetrics)>> {
        self.pipelines
            .iter()
            .zip(&self.normalized.values)
            .map(|(&p, curve)| Ok((p, metrics(curve)?)))
            .collect()
    }
}

/// Epoch views of one scenario, ascending by epoch, pipelines in canonical order.
pub fn scenario_epochs(archive: &Archive, scenario_id: &str) -> Result<Vec<EpochView>> {
    let mut grouped: BTreeMap<usize, BTreeMap<Pipeline, Vec<&EpochRecord>>> = BTreeMap::new();
    for rec in archive
        .records
        .iter()
        .filter(|r| r.scenario_id == scenario_id)
    {
        grouped
            .entry(rec.epoch)
            .or_default()
            .entry(rec.pipeline)
            .or_default()
            .push(rec);
    }
    let pipelines: Vec<Pipeline> = {
        let mut all: Vec<Pipeline> = grouped.values().flat_map(|m| m.keys().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    grouped
        .into_iter()
        .map(|(epoch, by_pipeline)| {
            if by_pipeline.len() != pipelines.len() {
                return Err(Error::Analysis(format!(
                    "scenario {scenario_id}, epoch {epoch}: only {} of {} pipelines have records",
                    by_pipeline.len(),
                    pipelines.len()
                )));
            }
            let averaged = by_pipeline
                .values()
                .map(|recs| average_trajectory(recs))
                .collect::<Result<Vec<_>>>()?;
            let normalized = normalize_epoch(&averaged);
            Ok(EpochView {
                epoch,
                pipelines: pipelines.clone(),
                averaged,
                normalized,
            })
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::dynamics::DisruptionEvent;
    use crate::harness::EpochRecord;
    use crate::solvers::Pipeline;

    pub fn record(
        scenario: &str,
        pipeline: Pipeline,
        run: usize,
        epoch: usize,
        period: u64,
        post: f64,
        improvements: Vec<(u64, f64)>,
    ) -> EpochRecord {
        let final_objective = improvements.last().map_or(post, |p| p.1);
        EpochRecord {
            scenario_id: scenario.into(),
            pipeline,
            run,
            epoch,
            period,
            event: DisruptionEvent {
                epoch,
                feature: pipeline.feature(),
                flipped: vec![1],
            },
            post_disruption_objective: post,
            improvements,
            final_objective,
            evaluations: period,
        }
    }
}
