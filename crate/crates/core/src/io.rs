//! Field files: a CSV of Γ rows × Δ columns next to a JSON manifest.
//!
//! `<stem>.csv` holds the values and `<stem>.json` the grid. Floats are
//! written in shortest round-trip form, so reading a file back reproduces
//! the field bit for bit.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecc::DirectionGrid;
use crate::error::{Error, Result};
use crate::sect::{ECTField, Field, LevelGrid, SECTField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Sect,
    Ect,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Sect => "sect",
            FieldKind::Ect => "ect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub d: usize,
    pub gamma: usize,
    pub delta: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "R")]
    pub bounding_radius: f64,
    pub shape_id: String,
    pub kind: FieldKind,
    pub directions: Vec<Vec<f64>>,
}

impl Manifest {
    pub fn for_field<T: Copy>(field: &Field<T>, shape_id: &str, kind: FieldKind) -> Self {
        let levels = field.levels();
        Self {
            d: field.grid().dim(),
            gamma: field.directions(),
            delta: levels.count(),
            horizon: levels.horizon(),
            bounding_radius: levels.horizon() / 2.0,
            shape_id: shape_id.to_string(),
            kind,
            directions: field.grid().directions().to_vec(),
        }
    }

    fn grids(&self) -> Result<(DirectionGrid, LevelGrid)> {
        if self.directions.len() != self.gamma {
            return Err(Error::Validation(format!(
                "manifest lists {} directions but gamma = {}",
                self.directions.len(),
                self.gamma
            )));
        }
        Ok((
            DirectionGrid::new(self.d, self.directions.clone())?,
            LevelGrid::new(self.horizon, self.delta)?,
        ))
    }
}

fn write_values<T: Copy + Display>(path: &Path, field: &Field<T>) -> Result<()> {
    let mut text = String::new();
    for row in field.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::file(path, e))
}

fn read_values<T: FromStr>(path: &Path, rows: usize, cols: usize) -> Result<Vec<T>>
where
    T::Err: Display,
{
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut values = Vec::with_capacity(rows * cols);
    let mut count = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        count += 1;
        let before = values.len();
        for cell in line.split(',') {
            values.push(cell.trim().parse::<T>().map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?);
        }
        if values.len() - before != cols {
            return Err(Error::Validation(format!(
                "{}:{}: expected {cols} columns, found {}",
                path.display(),
                lineno + 1,
                values.len() - before
            )));
        }
    }
    if count != rows {
        return Err(Error::Validation(format!(
            "{}: expected {rows} rows, found {count}",
            path.display()
        )));
    }
    Ok(values)
}

fn paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.json")))
}

fn write_field<T: Copy + Display>(
    dir: &Path,
    stem: &str,
    field: &Field<T>,
    manifest: &Manifest,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let (csv, json) = paths(dir, stem);
    write_values(&csv, field)?;
    let text = serde_json::to_string_pretty(manifest)?;
    fs::write(&json, text + "\n").map_err(|e| Error::file(&json, e))
}

/// Writes `<shape_id>.sect.{csv,json}` and `<shape_id>.ect.{csv,json}`.
pub fn write_fields(dir: &Path, shape_id: &str, sect: &SECTField, ect: &ECTField) -> Result<()> {
    write_field(
        dir,
        &format!("{shape_id}.sect"),
        sect,
        &Manifest::for_field(sect, shape_id, FieldKind::Sect),
    )?;
    write_field(
        dir,
        &format!("{shape_id}.ect"),
        ect,
        &Manifest::for_field(ect, shape_id, FieldKind::Ect),
    )
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// A field read from disk, tagged by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Sect(SECTField),
    Ect(ECTField),
}

/// Reads a field given the path of its manifest or of its CSV.
pub fn read_field(path: &Path) -> Result<(Manifest, AnyField)> {
    let json = path.with_extension("json");
    let csv = path.with_extension("csv");
    let manifest = read_manifest(&json)?;
    let (grid, levels) = manifest.grids()?;
    let (rows, cols) = (manifest.gamma, manifest.delta);
    let field = match manifest.kind {
        FieldKind::Sect => AnyField::Sect(Field::new(grid, levels, read_values(&csv, rows, cols)?)?),
        FieldKind::Ect => AnyField::Ect(Field::new(grid, levels, read_values(&csv, rows, cols)?)?),
    };
    Ok((manifest, field))
}

/// Fields of one kind in a directory, ordered by file name, with the
/// manifest path of each.
pub struct GroupFiles<T> {
    pub fields: Vec<Field<T>>,
    pub manifests: Vec<PathBuf>,
}

fn manifests_of_kind(dir: &Path, kind: FieldKind) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::file(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::file(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        if read_manifest(&path)?.kind == kind {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Validation(format!(
            "{} contains no {} fields",
            dir.display(),
            kind.as_str()
        )));
    }
    Ok(out)
}

/// Loads every field of `kind` in `dir` and checks that they share one grid.
fn load_group<T: Copy>(
    dir: &Path,
    kind: FieldKind,
    pick: impl Fn(AnyField) -> Option<Field<T>>,
) -> Result<GroupFiles<T>> {
    let manifests = manifests_of_kind(dir, kind)?;
    let mut fields: Vec<Field<T>> = Vec::with_capacity(manifests.len());
    for path in &manifests {
        let (_, any) = read_field(path)?;
        let field = pick(any).expect("manifest kind checked");
        if let Some(first) = fields.first() {
            first.check_same_grid(&field).map_err(|e| {
                Error::GridMismatch(format!("{} vs {}: {e}", manifests[0].display(), path.display()))
            })?;
        }
        fields.push(field);
    }
    Ok(GroupFiles { fields, manifests })
}

pub fn load_sect_group(dir: &Path) -> Result<GroupFiles<f64>> {
    load_group(dir, FieldKind::Sect, |f| match f {
        AnyField::Sect(s) => Some(s),
        AnyField::Ect(_) => None,
    })
}

pub fn load_ect_group(dir: &Path) -> Result<GroupFiles<i64>> {
    load_group(dir, FieldKind::Ect, |f| match f {
        AnyField::Ect(e) => Some(e),
        AnyField::Sect(_) => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> SECTField {
        let grid = DirectionGrid::uniform_circle(2).unwrap();
        let levels = LevelGrid::new(3.0, 3).unwrap();
        Field::new(grid, levels, vec![0.1, 1.0 / 3.0, -2.5e-17, 7.0, f64::MIN_POSITIVE, 0.0]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let sect = field();
        let ect = ECTField::new(sect.grid().clone(), *sect.levels(), vec![1, 0, -3, 2, 2, 0]).unwrap();
        write_fields(dir.path(), "s1", &sect, &ect).unwrap();
        let (m, back) = read_field(&dir.path().join("s1.sect.json")).unwrap();
        assert_eq!(back, AnyField::Sect(sect.clone()));
        assert_eq!(m.shape_id, "s1");
        assert_eq!(m.bounding_radius, 1.5);
        let (_, back) = read_field(&dir.path().join("s1.ect.csv")).unwrap();
        assert_eq!(back, AnyField::Ect(ect));
        let g = load_sect_group(dir.path()).unwrap();
        assert_eq!(g.fields, vec![sect]);
    }

    #[test]
    fn group_grid_mismatch_names_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = field();
        let grid = DirectionGrid::uniform_circle(2).unwrap();
        let b = SECTField::new(grid.clone(), LevelGrid::new(3.0, 2).unwrap(), vec![0.0; 4]).unwrap();
        let ea = ECTField::new(grid.clone(), *a.levels(), vec![0; 6]).unwrap();
        let eb = ECTField::new(grid, *b.levels(), vec![0; 4]).unwrap();
        write_fields(dir.path(), "a", &a, &ea).unwrap();
        write_fields(dir.path(), "b", &b, &eb).unwrap();
        let err = load_sect_group(dir.path()).err().unwrap().to_string();
        assert!(err.contains("a.sect.json") && err.contains("b.sect.json"), "{err}");
    }

    #[test]
    fn malformed_csv() {
        let dir = tempfile::tempdir().unwrap();
        let sect = field();
        let ect = ECTField::new(sect.grid().clone(), *sect.levels(), vec![0; 6]).unwrap();
        write_fields(dir.path(), "x", &sect, &ect).unwrap();
        fs::write(dir.path().join("x.sect.csv"), "1,2\n3,4,5\n").unwrap();
        assert!(read_field(&dir.path().join("x.sect.json")).is_err());
        fs::write(dir.path().join("x.sect.csv"), "1,2,a\n3,4,5\n").unwrap();
        assert!(matches!(read_field(&dir.path().join("x.sect.json")), Err(Error::Parse(_))));
        assert!(load_sect_group(&dir.path().join("missing")).is_err());
    }
}
