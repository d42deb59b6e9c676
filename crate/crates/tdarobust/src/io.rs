//! File formats: point-cloud and field CSVs, diagram and model JSON, image CSVs.
//!
//! Every writer goes through [`write_atomic`], which writes a sibling
//! temporary file and renames it into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tdarobust_core::diagram::PersistenceImage;
use tdarobust_core::grid::{Direction, GridSpec, ScalarField};
use tdarobust_core::homology::{PersistenceDiagram, PersistencePair};
use tdarobust_core::PointCloud;

use crate::error::{AppError, AppResult};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| AppError::config(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| AppError::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| AppError::io(&tmp, e))?;
        f.sync_all().map_err(|e| AppError::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Numeric(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::data(format!("{}: {e}", path.display())))
}

/// Rows of numbers, all of the same length. `header` skips the first line.
pub fn read_matrix(path: &Path, header: bool) -> AppResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| {
                    AppError::data(format!(
                        "{}: record {}: not a number: {cell:?}",
                        path.display(),
                        i + 1
                    ))
                })
            })
            .collect::<AppResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One point per row; the dimension is the column count.
pub fn read_points(path: &Path, header: bool) -> AppResult<PointCloud> {
    let rows = read_matrix(path, header)?;
    if rows.is_empty() {
        return Err(AppError::data(format!("{}: no points", path.display())));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(AppError::data(format!("{}: non-finite coordinate", path.display())));
    }
    Ok(PointCloud::from_rows(&rows)?)
}

fn csv_line(values: impl IntoIterator<Item = f64>, out: &mut String) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&v.to_string());
    }
    out.push('\n');
}

pub fn points_csv(points: &PointCloud) -> String {
    let mut s = String::new();
    for p in points.iter() {
        csv_line(p.iter().copied(), &mut s);
    }
    s
}

pub fn write_points(path: &Path, points: &PointCloud) -> AppResult<()> {
    write_atomic(path, points_csv(points).as_bytes())
}

/// Grid metadata stored next to a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub grid: GridSpec,
    pub direction: Direction,
    pub nonneg: bool,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Values in row-major order, one line per run of the last axis.
pub fn write_field(csv: &Path, field: &ScalarField) -> AppResult<()> {
    let width = *field.grid().resolution.last().expect("grid has an axis");
    let mut s = String::new();
    for chunk in field.values().chunks(width) {
        csv_line(chunk.iter().copied(), &mut s);
    }
    write_atomic(csv, s.as_bytes())?;
    let sidecar = FieldSidecar {
        grid: field.grid().clone(),
        direction: field.direction(),
        nonneg: field.is_nonneg(),
    };
    write_json(&sidecar_path(csv), &sidecar)
}

pub fn read_field(csv: &Path) -> AppResult<ScalarField> {
    let sidecar: FieldSidecar = read_json(&sidecar_path(csv))?;
    sidecar.grid.validate()?;
    let values: Vec<f64> = read_matrix(csv, false)?.into_iter().flatten().collect();
    if values.len() != sidecar.grid.vertex_count() {
        return Err(AppError::data(format!(
            "{}: {} values for a grid of {} vertices",
            csv.display(),
            values.len(),
            sidecar.grid.vertex_count()
        )));
    }
    Ok(ScalarField::new(sidecar.grid, values, sidecar.direction, sidecar.nonneg)?)
}

/// `{"dim":k,"direction":"superlevel","pairs":[[lower,upper,essential],...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramFile {
    pub dim: usize,
    pub direction: Direction,
    pub pairs: Vec<(f64, f64, bool)>,
}

impl From<&PersistenceDiagram> for DiagramFile {
    fn from(d: &PersistenceDiagram) -> Self {
        Self {
            dim: d.dim,
            direction: d.direction,
            pairs: d.pairs.iter().map(|p| (p.lower, p.upper, p.essential)).collect(),
        }
    }
}

impl DiagramFile {
    pub fn into_diagram(self) -> AppResult<PersistenceDiagram> {
        for &(l, u, _) in &self.pairs {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(AppError::data(format!("invalid persistence pair ({l}, {u})")));
            }
        }
        let pairs = self
            .pairs
            .into_iter()
            .map(|(lower, upper, essential)| PersistencePair {
                lower,
                upper,
                essential,
            })
            .collect();
        Ok(PersistenceDiagram::new(self.dim, self.direction, pairs))
    }
}

pub fn write_diagram(path: &Path, d: &PersistenceDiagram) -> AppResult<()> {
    let mut text = serde_json::to_string(&DiagramFile::from(d))
        .map_err(|e| AppError::Numeric(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_diagram(path: &Path) -> AppResult<PersistenceDiagram> {
    read_json::<DiagramFile>(path)?.into_diagram()
}

pub fn image_csv(img: &PersistenceImage) -> String {
    let mut s = String::new();
    for row in img.data.chunks(img.cols) {
        csv_line(row.iter().copied(), &mut s);
    }
    s
}

pub fn write_image(path: &Path, img: &PersistenceImage) -> AppResult<()> {
    write_atomic(path, image_csv(img).as_bytes())
}

/// Minimal CSV table builder with a fixed header.
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "row width");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        write_atomic(path, self.text.as_bytes())
    }
}

/// Shortest round-trip formatting, shared by every CSV writer.
pub fn num(v: f64) -> String {
    v.to_string()
}
