//! CSV tables of a run archive: trajectories, per-epoch summaries and disruption traces.
//!
//! Floats are written in their shortest round-trip form, so reading a table back yields
//! bit-identical values. Indices in disruption traces are 1-based like instance files.

use std::io::{Read, Write};
use std::str::FromStr;

use csv::StringRecord;

use crate::dynamics::{DisruptionEvent, Feature};
use crate::error::{Error, Result};
use crate::harness::EpochRecord;
use crate::solvers::Pipeline;

pub const TRAJECTORY_HEADER: [&str; 6] = [
    "scenario_id",
    "algorithm",
    "run",
    "epoch",
    "evaluation",
    "objective",
];

pub const EPOCH_HEADER: [&str; 8] = [
    "scenario_id",
    "algorithm",
    "run",
    "epoch",
    "period",
    "post_disruption_objective",
    "final_objective",
    "evaluations",
];

pub const TRACE_HEADER: [&str; 4] = ["run", "epoch", "feature", "flipped_indices"];

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub scenario_id: String,
    pub algorithm: Pipeline,
    pub run: usize,
    pub epoch: usize,
    pub evaluation: u64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub scenario_id: String,
    pub algorithm: Pipeline,
    pub run: usize,
    pub epoch: usize,
    pub period: u64,
    pub post_disruption_objective: f64,
    pub final_objective: f64,
    pub evaluations: u64,
}

fn canonical_order(records: &[EpochRecord]) -> Vec<&EpochRecord> {
    let mut sorted: Vec<&EpochRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.scenario_id, a.pipeline, a.run, a.epoch).cmp(&(
            &b.scenario_id,
            b.pipeline,
            b.run,
            b.epoch,
        ))
    });
    sorted
}

/// One row per improvement, then a boundary row at evaluation `period` holding the
/// epoch's final objective.
pub fn write_trajectories<W: Write>(records: &[EpochRecord], sink: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(TRAJECTORY_HEADER)?;
    for r in canonical_order(records) {
        let (run, epoch) = (r.run.to_string(), r.epoch.to_string());
        let points = r
            .improvements
            .iter()
            .copied()
            .chain([(r.period, r.final_objective)]);
        for (evaluation, objective) in points {
            out.write_record([
                r.scenario_id.as_str(),
                r.pipeline.as_str(),
                &run,
                &epoch,
                &evaluation.to_string(),
                &objective.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_epoch_table<W: Write>(records: &[EpochRecord], sink: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(EPOCH_HEADER)?;
    for r in canonical_order(records) {
        out.write_record([
            r.scenario_id.clone(),
            r.pipeline.to_string(),
            r.run.to_string(),
            r.epoch.to_string(),
            r.period.to_string(),
            r.post_disruption_objective.to_string(),
            r.final_objective.to_string(),
            r.evaluations.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `events` must be sorted by `(run, epoch)`.
pub fn write_disruption_trace<W: Write>(
    events: &[(usize, DisruptionEvent)],
    sink: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(TRACE_HEADER)?;
    for (run, event) in events {
        let flipped: Vec<String> = event.flipped.iter().map(|i| (i + 1).to_string()).collect();
        out.write_record([
            run.to_string(),
            event.epoch.to_string(),
            event.feature.to_string(),
            flipped.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

struct Table {
    rows: Vec<(usize, StringRecord)>,
}

fn read_table<R: Read>(src: R, header: &[&str]) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(src);
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            1,
            "header",
            format!("expected `{}`", header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record));
    }
    Ok(Table { rows })
}

fn field<T: FromStr>(record: &StringRecord, line: usize, header: &[&str], idx: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|e: T::Err| Error::parse(line, header[idx], format!("cannot parse `{raw}`: {e}")))
}

pub fn read_trajectories<R: Read>(src: R) -> Result<Vec<TrajectoryRow>> {
    let h = &TRAJECTORY_HEADER;
    read_table(src, h)?
        .rows
        .iter()
        .map(|(line, r)| {
            Ok(TrajectoryRow {
                scenario_id: field(r, *line, h, 0)?,
                algorithm: field(r, *line, h, 1)?,
                run: field(r, *line, h, 2)?,
                epoch: field(r, *line, h, 3)?,
                evaluation: field(r, *line, h, 4)?,
                objective: field(r, *line, h, 5)?,
            })
        })
        .collect()
}

pub fn read_epoch_table<R: Read>(src: R) -> Result<Vec<EpochRow>> {
    let h = &EPOCH_HEADER;
    read_table(src, h)?
        .rows
        .iter()
        .map(|(line, r)| {
            Ok(EpochRow {
                scenario_id: field(r, *line, h, 0)?,
                algorithm: field(r, *line, h, 1)?,
                run: field(r, *line, h, 2)?,
                epoch: field(r, *line, h, 3)?,
                period: field(r, *line, h, 4)?,
                post_disruption_objective: field(r, *line, h, 5)?,
                final_objective: field(r, *line, h, 6)?,
                evaluations: field(r, *line, h, 7)?,
            })
        })
        .collect()
}

pub fn read_disruption_trace<R: Read>(src: R) -> Result<Vec<(usize, DisruptionEvent)>> {
    let h = &TRACE_HEADER;
    read_table(src, h)?
        .rows
        .iter()
        .map(|(line, r)| {
            let feature: Feature = r
                .get(2)
                .unwrap_or("")
                .parse()
                .map_err(|msg: String| Error::parse(*line, "feature", msg))?;
            let raw = r.get(3).unwrap_or("");
            let flipped = raw
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(Error::parse(
                        *line,
                        "flipped_indices",
                        format!("bad index `{s}`"),
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            let event = DisruptionEvent {
                epoch: field(r, *line, h, 1)?,
                feature,
                flipped,
            };
            Ok((field(r, *line, h, 0)?, event))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(pipeline: Pipeline, run: usize, improvements: Vec<(u64, f64)>) -> EpochRecord {
        let final_objective = improvements.last().map_or(-1.5, |p| p.1);
        EpochRecord {
            scenario_id: "toy".into(),
            pipeline,
            run,
            epoch: 0,
            period: 10,
            post_disruption_objective: -1.5,
            evaluations: 10,
            improvements,
            final_objective,
            event: DisruptionEvent {
                epoch: 0,
                feature: Feature::Items,
                flipped: vec![0, 3],
            },
        }
    }

    fn to_string(records: &[EpochRecord]) -> String {
        let mut buf = Vec::new();
        write_trajectories(records, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn two_improvements_give_three_rows() {
        let text = to_string(&[record(Pipeline::ItemsBitflip, 0, vec![(2, 1.0), (7, 2.25)])]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "scenario_id,algorithm,run,epoch,evaluation,objective"
        );
        assert_eq!(lines[1], "toy,items-bitflip,0,0,2,1");
        assert_eq!(lines[3], "toy,items-bitflip,0,0,10,2.25");
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(
            to_string(&[]),
            "scenario_id,algorithm,run,epoch,evaluation,objective\n"
        );
    }

    #[test]
    fn output_is_canonically_ordered_and_stable() {
        let a = record(Pipeline::ItemsRea, 1, vec![(1, 0.5)]);
        let b = record(Pipeline::ItemsBitflip, 2, vec![]);
        let c = record(Pipeline::ItemsBitflip, 0, vec![(3, 0.1)]);
        let first = to_string(&[a.clone(), b.clone(), c.clone()]);
        assert_eq!(first, to_string(&[c, a, b]));
        let algos: Vec<&str> = first
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(
            algos,
            [
                "items-bitflip",
                "items-bitflip",
                "items-bitflip",
                "items-rea",
                "items-rea"
            ]
        );
    }

    #[test]
    fn tables_round_trip() {
        let recs = vec![record(
            Pipeline::ItemsBitflip,
            0,
            vec![(1, 0.1 + 0.2), (4, 1e-17)],
        )];
        let mut buf = Vec::new();
        write_trajectories(&recs, &mut buf).unwrap();
        let rows = read_trajectories(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].objective, 0.1 + 0.2);
        assert_eq!(rows[1].objective, 1e-17);

        buf.clear();
        write_epoch_table(&recs, &mut buf).unwrap();
        let epochs = read_epoch_table(buf.as_slice()).unwrap();
        assert_eq!(epochs[0].post_disruption_objective, -1.5);
        assert_eq!(epochs[0].algorithm, Pipeline::ItemsBitflip);

        buf.clear();
        let events = vec![(0, recs[0].event.clone())];
        write_disruption_trace(&events, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).contains("0,0,items,1;4"));
        assert_eq!(read_disruption_trace(buf.as_slice()).unwrap(), events);
    }

    #[test]
    fn bad_header_and_field() {
        assert!(read_trajectories("a,b\n".as_bytes()).is_err());
        let text =
            "scenario_id,algorithm,run,epoch,evaluation,objective\ntoy,items-bitflip,x,0,1,2\n";
        let err = read_trajectories(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, Error::Parse { line: 2, ref field, .. } if field == "run"),
            "{err}"
        );
    }
}
