use std::io::Write;

use crate::error::{Error, Result};
use crate::harness::Archive;
use crate::solvers::Pipeline;

use super::scenario_epochs;

/// Normalized curves of one scenario: one row per pipeline, one column per tick, epochs
/// laid end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapMatrix {
    pub pipelines: Vec<Pipeline>,
    pub period: usize,
    pub epochs: usize,
    pub values: Vec<Vec<f64>>,
    /// `(min, max)` of the averaged objective per epoch.
    pub bounds: Vec<(f64, f64)>,
}

impl HeatmapMatrix {
    pub fn columns(&self) -> usize {
        self.period * self.epochs
    }
}

pub fn scenario_heatmap(archive: &Archive, scenario_id: &str) -> Result<HeatmapMatrix> {
    let views = scenario_epochs(archive, scenario_id)?;
    let first = views
        .first()
        .ok_or_else(|| Error::Analysis(format!("no records for scenario {scenario_id}")))?;
    let pipelines = first.pipelines.clone();
    let period = first.averaged.first().map_or(0, |c| c.len());
    let mut values = vec![Vec::with_capacity(period * views.len()); pipelines.len()];
    let mut bounds = Vec::with_capacity(views.len());
    for view in &views {
        for (row, curve) in values.iter_mut().zip(&view.normalized.values) {
            if curve.len() != period {
                return Err(Error::Analysis(format!(
                    "scenario {scenario_id}: epochs differ in length"
                )));
            }
            row.extend_from_slice(curve);
        }
        bounds.push((view.normalized.min, view.normalized.max));
    }
    Ok(HeatmapMatrix {
        pipelines,
        period,
        epochs: views.len(),
        values,
        bounds,
    })
}

/// Header `algorithm,1,2,…` then one row per pipeline, values with six decimals.
pub fn write_heatmap_csv<W: Write>(matrix: &HeatmapMatrix, mut sink: W) -> Result<()> {
    write!(sink, "algorithm")?;
    for tick in 1..=matrix.columns() {
        write!(sink, ",{tick}")?;
    }
    writeln!(sink)?;
    for (pipeline, row) in matrix.pipelines.iter().zip(&matrix.values) {
        write!(sink, "{pipeline}")?;
        for v in row {
            write!(sink, ",{v:.6}")?;
        }
        writeln!(sink)?;
    }
    sink.flush()?;
    Ok(())
}

const BLACK: [f64; 3] = [0.0, 0.0, 0.0];
const RED: [f64; 3] = [204.0, 0.0, 0.0];
const PEACH: [f64; 3] = [255.0, 229.0, 204.0];

/// Colour ramp: black at 0, red at 0.5, light peach at 1.
pub fn ramp(value: f64) -> [u8; 3] {
    let v = value.clamp(0.0, 1.0);
    let (from, to, t) = if v <= 0.5 {
        (BLACK, RED, v * 2.0)
    } else {
        (RED, PEACH, v * 2.0 - 1.0)
    };
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (from[c] + (to[c] - from[c]) * t).round() as u8;
    }
    out
}

/// Binary PPM, one pixel per matrix cell.
pub fn write_heatmap_ppm<W: Write>(matrix: &HeatmapMatrix, mut sink: W) -> Result<()> {
    write!(
        sink,
        "P6\n{} {}\n255\n",
        matrix.columns(),
        matrix.pipelines.len()
    )?;
    for row in &matrix.values {
        for &v in row {
            sink.write_all(&ramp(v))?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn heatmap_export<C: Write, P: Write>(
    matrix: &HeatmapMatrix,
    csv_sink: C,
    ppm_sink: P,
) -> Result<()> {
    write_heatmap_csv(matrix, csv_sink)?;
    write_heatmap_ppm(matrix, ppm_sink)
}
