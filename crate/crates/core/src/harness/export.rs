use serde::Deserialize;

use super::{PhaseGrid, SparsityLevel};
use crate::error::{invalid, Result};
use crate::render::{fraction_fill, Heatmap};

const SKIPPED_FILL: &str = "#f4cccc";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Svg => "svg",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Write measured runtimes. Off by default so reruns are byte-identical;
    /// the `mean_runtime_ms` column is then left empty.
    pub timing: bool,
}

/// One CSV data row.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRecord {
    pub delta: f64,
    pub rho: f64,
    pub method: String,
    pub trials: usize,
    pub successes: usize,
    pub mean_runtime_ms: Option<f64>,
}

pub fn export_grid(grid: &PhaseGrid, format: ExportFormat) -> Vec<u8> {
    export_grid_with(grid, format, ExportOptions::default())
}

pub fn export_grid_with(grid: &PhaseGrid, format: ExportFormat, options: ExportOptions) -> Vec<u8> {
    match format {
        ExportFormat::Csv => grid_csv(grid, options).into_bytes(),
        ExportFormat::Svg => grid_svg(grid).into_bytes(),
    }
}

/// Rows are ordered by delta, then by sparsity level. Skipped cells report
/// zero trials.
fn grid_csv(grid: &PhaseGrid, options: ExportOptions) -> String {
    let mut out = String::from("delta,rho,method,trials,successes,mean_runtime_ms\n");
    for d in 0..grid.delta_values.len() {
        for r in 0..grid.rows.len() {
            let cell = grid.cell(d, r);
            let (trials, successes) = match cell.successes() {
                Some(s) => (grid.trials_per_cell, s),
                None => (0, 0),
            };
            let runtime = match cell.mean_runtime_ms() {
                Some(ms) if options.timing => format!("{ms:.4}"),
                _ => String::new(),
            };
            out.push_str(&format!(
                "{:.4},{:.4},{},{},{},{}\n",
                cell.delta, cell.rho, grid.method, trials, successes, runtime
            ));
        }
    }
    out
}

fn delta_label(delta: f64, pattern_based: bool) -> String {
    if pattern_based {
        format!("{}/16", (delta * 16.0).round() as usize)
    } else {
        format!("{delta:.1}")
    }
}

fn grid_svg(grid: &PhaseGrid) -> String {
    let trees = matches!(grid.rows.first(), Some(SparsityLevel::Trees(_)));
    let title = format!("{} / {}", grid.ensemble, grid.method);
    let fills = (0..grid.rows.len())
        .map(|r| {
            (0..grid.delta_values.len())
                .map(|d| match grid.success_fraction(d, r) {
                    Some(f) => fraction_fill(f),
                    None => SKIPPED_FILL.to_string(),
                })
                .collect()
        })
        .collect();
    Heatmap {
        title: &title,
        x_title: "δ = M/N",
        y_title: if trees { "ρ (trees of 21)" } else { "ρ = K/M" },
        x_labels: grid
            .delta_values
            .iter()
            .map(|d| delta_label(*d, trees))
            .collect(),
        y_labels: grid.rows.iter().map(SparsityLevel::label).collect(),
        fills,
    }
    .render()
}

/// Parses CSV produced by [`export_grid`].
pub fn parse_grid_csv(data: &[u8]) -> Result<Vec<CsvRecord>> {
    let mut reader = csv::Reader::from_reader(data);
    let headers = reader.headers()?.clone();
    let expected = ["delta", "rho", "method", "trials", "successes", "mean_runtime_ms"];
    if headers.iter().ne(expected) {
        return invalid(format!("unexpected CSV header {headers:?}"));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

/// `successes[delta][row]` recovered from CSV (`None` where the cell was
/// skipped), for a grid of the given shape.
pub fn successes_from_csv(
    data: &[u8],
    deltas: usize,
    rows: usize,
) -> Result<Vec<Vec<Option<usize>>>> {
    let records = parse_grid_csv(data)?;
    if records.len() != deltas * rows {
        return invalid(format!(
            "expected {} rows, found {}",
            deltas * rows,
            records.len()
        ));
    }
    Ok(records
        .chunks(rows)
        .map(|column| {
            column
                .iter()
                .map(|rec| (rec.trials > 0).then_some(rec.successes))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::{CellOutcome, CellResult};
    use super::*;

    fn grid(outcomes: &[&[bool]], skipped_last: bool) -> PhaseGrid {
        let deltas = vec![0.5, 0.9];
        let rows = vec![SparsityLevel::Ratio(0.1), SparsityLevel::Ratio(0.2)];
        let mut cells = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (d, delta) in deltas.iter().enumerate() {
                let i = r * 2 + d;
                let SparsityLevel::Ratio(rho) = row else { unreachable!() };
                let outcome = if skipped_last && i == 3 {
                    CellOutcome::Skipped { reason: "test".into() }
                } else {
                    CellOutcome::Completed {
                        outcomes: outcomes[i].to_vec(),
                        mean_runtime_ms: 1.5,
                    }
                };
                cells.push(CellResult {
                    delta: *delta,
                    rho: *rho,
                    rows: None,
                    sparsity: None,
                    outcome,
                });
            }
        }
        PhaseGrid {
            ensemble: "gaussian".into(),
            method: "partinv".into(),
            delta_values: deltas,
            rows,
            trials_per_cell: 2,
            base_seed: 0,
            cells,
        }
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let g = grid(&[&[true, true], &[true, false], &[false, false], &[true, true]], false);
        let csv = String::from_utf8(export_grid(&g, ExportFormat::Csv)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "delta,rho,method,trials,successes,mean_runtime_ms");
        assert_eq!(lines[1], "0.5000,0.1000,partinv,2,2,");
        let timed = String::from_utf8(export_grid_with(&g, ExportFormat::Csv, ExportOptions { timing: true })).unwrap();
        assert!(timed.lines().nth(1).unwrap().ends_with(",1.5000"));
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(&[&[true, true], &[true, false], &[false, false], &[true, true]], true);
        let csv = export_grid(&g, ExportFormat::Csv);
        assert_eq!(successes_from_csv(&csv, 2, 2).unwrap(), g.successes());
    }

    #[test]
    fn all_success_svg_is_white() {
        let all: &[bool] = &[true, true];
        let g = grid(&[all; 4], false);
        let svg = String::from_utf8(export_grid(&g, ExportFormat::Svg)).unwrap();
        let cells: Vec<&str> = svg.lines().filter(|l| l.contains("stroke=")).collect();
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|l| l.contains("fill=\"#ffffff\"")));
        assert!(svg.contains("δ = M/N") && svg.contains("ρ = K/M"));
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_grid_csv(b"a,b\n1,2\n").is_err());
    }
}
