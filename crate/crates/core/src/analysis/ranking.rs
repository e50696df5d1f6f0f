use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::Archive;
use crate::solvers::Pipeline;

use super::{mann_whitney_one_sided, scenario_epochs, Metric};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// How epoch-level metric values are pooled before testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    Global,
    ByD,
    ByInstance,
}

impl Slice {
    pub fn as_str(self) -> &'static str {
        match self {
            Slice::Global => "global",
            Slice::ByD => "by-d",
            Slice::ByInstance => "by-instance",
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "global" => Ok(Slice::Global),
            "by-d" => Ok(Slice::ByD),
            "by-instance" => Ok(Slice::ByInstance),
            _ => Err(format!(
                "unknown slice `{s}` (expected global, by-d or by-instance)"
            )),
        }
    }
}

/// One-sided test of "`a` is better than `b`" within one group of the slice.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTest {
    pub group: String,
    pub a: Pipeline,
    pub b: Pipeline,
    pub n_a: usize,
    pub n_b: usize,
    pub u: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub slice: Slice,
    pub metric: Metric,
    /// Group labels in report order.
    pub groups: Vec<String>,
    pub tests: Vec<PairTest>,
}

impl RankingReport {
    pub fn significant(&self) -> impl Iterator<Item = &PairTest> {
        self.tests.iter().filter(|t| t.significant)
    }

    /// Per group, each pipeline with the pipelines it beats significantly.
    pub fn partial_order(&self) -> Vec<(String, Vec<(Pipeline, Vec<Pipeline>)>)> {
        self.groups
            .iter()
            .map(|g| {
                let mut beats: BTreeMap<Pipeline, Vec<Pipeline>> = BTreeMap::new();
                for t in self.significant().filter(|t| &t.group == g) {
                    beats.entry(t.a).or_default().push(t.b);
                }
                (g.clone(), beats.into_iter().collect())
            })
            .collect()
    }
}

/// Orders by-d groups numerically and everything else lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey(u64, String);

/// Pools one normalized metric value per (scenario, epoch, pipeline) into the slice's
/// groups and tests every ordered pair of pipelines sharing a feature.
pub fn ranking_report(archive: &Archive, slice: Slice, metric: Metric) -> Result<RankingReport> {
    let mut samples: BTreeMap<GroupKey, BTreeMap<Pipeline, Vec<f64>>> = BTreeMap::new();
    let mut ids: Vec<&str> = archive
        .records
        .iter()
        .map(|r| r.scenario_id.as_str())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        let key = match slice {
            Slice::Global => GroupKey(0, "all".into()),
            _ => {
                let summary = archive.scenario(id).ok_or_else(|| {
                    Error::Analysis(format!("archive has no summary for scenario {id}"))
                })?;
                match slice {
                    Slice::ByD => GroupKey(
                        summary.disruption_percent.to_bits(),
                        summary.disruption_percent.to_string(),
                    ),
                    _ => GroupKey(0, summary.instance_name.clone()),
                }
            }
        };
        let group = samples.entry(key).or_default();
        for view in scenario_epochs(archive, id)? {
            for (pipeline, m) in view.metrics()? {
                group.entry(pipeline).or_default().push(m.get(metric));
            }
        }
    }

    let mut tests = Vec::new();
    for (key, by_pipeline) in &samples {
        for (&a, xa) in by_pipeline {
            for (&b, xb) in by_pipeline {
                if a == b || a.feature() != b.feature() {
                    continue;
                }
                let r = mann_whitney_one_sided(xa, xb)?;
                tests.push(PairTest {
                    group: key.1.clone(),
                    a,
                    b,
                    n_a: xa.len(),
                    n_b: xb.len(),
                    u: r.u,
                    p: r.p,
                    significant: r.p < SIGNIFICANCE_LEVEL,
                });
            }
        }
    }
    Ok(RankingReport {
        slice,
        metric,
        groups: samples.into_keys().map(|k| k.1).collect(),
        tests,
    })
}

pub fn write_significance_csv<W: Write>(report: &RankingReport, sink: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record([
        "slice",
        "group",
        "metric",
        "algorithm_a",
        "algorithm_b",
        "n_a",
        "n_b",
        "u",
        "p",
        "significant",
    ])?;
    for t in &report.tests {
        out.write_record([
            report.slice.to_string(),
            t.group.clone(),
            report.metric.to_string(),
            t.a.to_string(),
            t.b.to_string(),
            t.n_a.to_string(),
            t.n_b.to_string(),
            t.u.to_string(),
            t.p.to_string(),
            t.significant.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fixtures::record;
    use crate::dynamics::Feature;
    use crate::harness::ScenarioSummary;

    fn summary(id: &str, d: f64, instance: &str) -> ScenarioSummary {
        ScenarioSummary {
            id: id.into(),
            instance_name: instance.into(),
            feature: Feature::Items,
            disruption_percent: d,
            period: 4,
            epochs: 6,
            runs: 1,
            master_seed: 0,
            algorithms: vec![Pipeline::ItemsBitflip, Pipeline::ItemsRea],
            config_hash: String::new(),
        }
    }

    /// `ItemsRea` reaches the epoch's best value first in every epoch.
    fn dominated(ids: &[(&str, f64, &str)]) -> Archive {
        let mut a = Archive::default();
        for &(id, d, inst) in ids {
            a.scenarios.push(summary(id, d, inst));
            for epoch in 0..6 {
                let base = epoch as f64 * 10.0;
                a.records.push(record(
                    id,
                    Pipeline::ItemsBitflip,
                    0,
                    epoch,
                    4,
                    base,
                    vec![(3, base + 1.0)],
                ));
                a.records.push(record(
                    id,
                    Pipeline::ItemsRea,
                    0,
                    epoch,
                    4,
                    base,
                    vec![(1, base + 2.0)],
                ));
            }
        }
        a.sort_records();
        a
    }

    #[test]
    fn dominating_pipeline_is_significant() {
        let archive = dominated(&[("s", 5.0, "i")]);
        let report = ranking_report(&archive, Slice::Global, Metric::End).unwrap();
        assert_eq!(report.tests.len(), 2);
        let win = report
            .tests
            .iter()
            .find(|t| t.a == Pipeline::ItemsRea)
            .unwrap();
        assert!(win.significant);
        assert!((win.p - 1.0 / 924.0).abs() < 1e-12);
        let loss = report
            .tests
            .iter()
            .find(|t| t.a == Pipeline::ItemsBitflip)
            .unwrap();
        assert!(!loss.significant);
        let order = report.partial_order();
        assert_eq!(
            order[0].1,
            vec![(Pipeline::ItemsRea, vec![Pipeline::ItemsBitflip])]
        );
    }

    #[test]
    fn slices_partition_groups() {
        let archive = dominated(&[("a", 10.0, "x"), ("b", 3.0, "y"), ("c", 10.0, "y")]);
        let by_d = ranking_report(&archive, Slice::ByD, Metric::Auc).unwrap();
        assert_eq!(by_d.groups, vec!["3", "10"]);
        let ten = by_d.tests.iter().find(|t| t.group == "10").unwrap();
        assert_eq!((ten.n_a, ten.n_b), (12, 12));
        let by_inst = ranking_report(&archive, Slice::ByInstance, Metric::Auc).unwrap();
        assert_eq!(by_inst.groups, vec!["x", "y"]);
        assert!("by-x".parse::<Slice>().is_err());
    }

    #[test]
    fn single_pipeline_gives_empty_table() {
        let mut archive = dominated(&[("s", 5.0, "i")]);
        archive.records.retain(|r| r.pipeline == Pipeline::ItemsRea);
        let report = ranking_report(&archive, Slice::Global, Metric::End).unwrap();
        assert!(report.tests.is_empty());
        let mut buf = Vec::new();
        write_significance_csv(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }
}
