//! JSON documents for plants and controllers.
//!
//! Matrices are row-major nested arrays; a bare number is accepted for a
//! 1x1 matrix. A plant document has the keys `domain` (`"continuous"` or
//! `"discrete"`), `A`, `B`, `C`, `W`, `V`, `Q`, `R`; a controller document
//! has `A_K`, `B_K`, `C_K` and an optional `D_K`. Numbers are written in the
//! shortest form that parses back to the same double, so a round trip
//! through a file is exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, TimeDomain};
use crate::model::{Controller, Plant};

/// Serializes a matrix as row-major nested arrays, for `serialize_with`.
pub(crate) fn serialize_rows<S: serde::Serializer>(m: &Mat, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixRepr::from_matrix(m).serialize(serializer)
}

/// Matrix as written in a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixRepr {
    /// Row-major nested arrays of `m`.
    pub fn from_matrix(m: &Mat) -> Self {
        MatrixRepr::Rows((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    /// Parses into a matrix, rejecting ragged rows.
    pub fn to_matrix(&self, field: &str) -> Result<Mat> {
        match self {
            MatrixRepr::Scalar(x) => Ok(Mat::from_element(1, 1, *x)),
            MatrixRepr::Rows(rows) => {
                let cols = rows.first().map_or(0, Vec::len);
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
                    return Err(Error::DimensionMismatch(format!(
                        "{field}: row {i} has {} entries, row 0 has {cols}",
                        r.len()
                    )));
                }
                Ok(Mat::from_row_iterator(rows.len(), cols, rows.iter().flatten().copied()))
            }
        }
    }
}

/// Plant document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub domain: TimeDomain,
    #[serde(rename = "A")]
    pub a: MatrixRepr,
    #[serde(rename = "B")]
    pub b: MatrixRepr,
    #[serde(rename = "C")]
    pub c: MatrixRepr,
    #[serde(rename = "W")]
    pub w: MatrixRepr,
    #[serde(rename = "V")]
    pub v: MatrixRepr,
    #[serde(rename = "Q")]
    pub q: MatrixRepr,
    #[serde(rename = "R")]
    pub r: MatrixRepr,
}

impl PlantFile {
    pub fn from_plant(p: &Plant) -> Self {
        PlantFile {
            domain: p.domain(),
            a: MatrixRepr::from_matrix(p.a()),
            b: MatrixRepr::from_matrix(p.b()),
            c: MatrixRepr::from_matrix(p.c()),
            w: MatrixRepr::from_matrix(p.w()),
            v: MatrixRepr::from_matrix(p.v()),
            q: MatrixRepr::from_matrix(p.q()),
            r: MatrixRepr::from_matrix(p.r()),
        }
    }

    /// Validates the document into a [`Plant`].
    pub fn to_plant(&self) -> Result<Plant> {
        Plant::new(
            self.a.to_matrix("A")?,
            self.b.to_matrix("B")?,
            self.c.to_matrix("C")?,
            self.w.to_matrix("W")?,
            self.v.to_matrix("V")?,
            self.q.to_matrix("Q")?,
            self.r.to_matrix("R")?,
            self.domain,
        )
    }
}

/// Controller document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    #[serde(rename = "A_K")]
    pub a: MatrixRepr,
    #[serde(rename = "B_K")]
    pub b: MatrixRepr,
    #[serde(rename = "C_K")]
    pub c: MatrixRepr,
    #[serde(rename = "D_K", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<MatrixRepr>,
}

impl ControllerFile {
    /// Document for `k`; `D_K` is written only when nonzero.
    pub fn from_controller(k: &Controller) -> Self {
        ControllerFile {
            a: MatrixRepr::from_matrix(k.a()),
            b: MatrixRepr::from_matrix(k.b()),
            c: MatrixRepr::from_matrix(k.c()),
            d: (!k.is_strictly_proper()).then(|| MatrixRepr::from_matrix(k.d())),
        }
    }

    pub fn to_controller(&self) -> Result<Controller> {
        let (a, b, c) = (self.a.to_matrix("A_K")?, self.b.to_matrix("B_K")?, self.c.to_matrix("C_K")?);
        match &self.d {
            None => Controller::new(a, b, c),
            Some(d) => Controller::proper(a, b, c, d.to_matrix("D_K")?),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("{what}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

pub fn plant_from_json(text: &str) -> Result<Plant> {
    parse::<PlantFile>(text, "plant document")?.to_plant()
}

pub fn controller_from_json(text: &str) -> Result<Controller> {
    parse::<ControllerFile>(text, "controller document")?.to_controller()
}

pub fn plant_to_json(p: &Plant) -> String {
    serde_json::to_string_pretty(&PlantFile::from_plant(p)).expect("plant documents always serialize")
}

pub fn controller_to_json(k: &Controller) -> String {
    serde_json::to_string_pretty(&ControllerFile::from_controller(k)).expect("controller documents always serialize")
}

pub fn read_plant(path: &Path) -> Result<Plant> {
    plant_from_json(&read(path)?)
}

pub fn read_controller(path: &Path) -> Result<Controller> {
    controller_from_json(&read(path)?)
}
