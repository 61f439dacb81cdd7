//! One region-day of gridded weather: seven 19x19 layers plus location
//! metadata, and the validation that every other module relies on.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{as_f64, Real};
use crate::schema::Variable;

/// Cells per grid side. The source grids cover 5 degrees at 0.25 degree
/// resolution but are published as 19x19 cell matrices; the cell count is
/// the contract.
pub const GRID_SIZE: usize = 19;

/// Total cells in one layer.
pub const GRID_CELLS: usize = GRID_SIZE * GRID_SIZE;

/// Default grid resolution in degrees per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.25;

/// A single variable's 19x19 matrix. Row 0 is the southernmost row and
/// column 0 the westernmost column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layer<R> {
    rows: Vec<Vec<R>>,
}

impl<R: Real> Layer<R> {
    pub fn new(rows: Vec<Vec<R>>) -> Self {
        Layer { rows }
    }

    pub fn constant(value: R) -> Self {
        Layer {
            rows: vec![vec![value; GRID_SIZE]; GRID_SIZE],
        }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> R) -> Self {
        let rows = (0..GRID_SIZE)
            .map(|r| (0..GRID_SIZE).map(|c| f(r, c)).collect())
            .collect();
        Layer { rows }
    }

    pub fn rows(&self) -> &[Vec<R>] {
        &self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> R {
        self.rows[row][col]
    }

    /// Ok if the layer is exactly 19x19; otherwise the offending dimensions.
    pub fn check_shape(&self) -> std::result::Result<(), (usize, usize)> {
        if self.rows.len() != GRID_SIZE {
            let cols = self.rows.first().map_or(0, Vec::len);
            return Err((self.rows.len(), cols));
        }
        for row in &self.rows {
            if row.len() != GRID_SIZE {
                return Err((GRID_SIZE, row.len()));
            }
        }
        Ok(())
    }

    /// Row-major cell iterator.
    pub fn cells(&self) -> impl Iterator<Item = R> + '_ {
        self.rows.iter().flat_map(|r| r.iter().copied())
    }
}

/// One region-day: location metadata plus the seven variable layers.
///
/// Construction does not validate; call [`GridSnapshot::validate`] (or go
/// through [`crate::dataset::parse_snapshot_file`], which does) before
/// trusting the contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSnapshot<R> {
    pub region_id: String,
    pub date: NaiveDate,
    /// Latitude of the south-west corner, degrees.
    pub lat0: f64,
    /// Longitude of the south-west corner, degrees.
    pub lon0: f64,
    /// Degrees per cell; must be positive.
    pub resolution: f64,
    layers: BTreeMap<Variable, Layer<R>>,
}

impl<R: Real> GridSnapshot<R> {
    pub fn new(
        region_id: impl Into<String>,
        date: NaiveDate,
        lat0: f64,
        lon0: f64,
        resolution: f64,
        layers: BTreeMap<Variable, Layer<R>>,
    ) -> Self {
        GridSnapshot {
            region_id: region_id.into(),
            date,
            lat0,
            lon0,
            resolution,
            layers,
        }
    }

    pub fn layer(&self, variable: Variable) -> Result<&Layer<R>> {
        self.layers
            .get(&variable)
            .ok_or_else(|| Error::MissingVariable(variable.key().to_string()))
    }

    pub fn layers(&self) -> &BTreeMap<Variable, Layer<R>> {
        &self.layers
    }

    /// Checks every snapshot invariant: all seven layers present and 19x19,
    /// all values finite and inside their variable's inclusive range (wind
    /// components have no lower bound), resolution positive.
    ///
    /// Pure: the same snapshot always yields the same decision and the same
    /// error payload. Layers are scanned in schema order, cells row-major,
    /// and the first violation is reported.
    pub fn validate(&self) -> Result<()> {
        if self.resolution.is_nan() || self.resolution <= 0.0 {
            return Err(Error::Resolution(self.resolution));
        }
        for variable in Variable::ALL {
            let layer = self.layer(variable)?;
            if let Err((rows, cols)) = layer.check_shape() {
                return Err(Error::Shape {
                    variable: variable.key().to_string(),
                    rows,
                    cols,
                });
            }
            let (lower, upper) = variable.bounds();
            for (r, row) in layer.rows().iter().enumerate() {
                for (c, &value) in row.iter().enumerate() {
                    if !value.is_finite() {
                        return Err(Error::NonFinite {
                            variable: variable.key().to_string(),
                            row: r,
                            col: c,
                        });
                    }
                    let v = as_f64(value);
                    let below = lower.is_some_and(|lo| v < lo);
                    let above = upper.is_some_and(|hi| v > hi);
                    if below || above {
                        return Err(Error::ValueRange {
                            variable: variable.key().to_string(),
                            row: r,
                            col: c,
                            value: v,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Validates and returns the snapshot unchanged.
pub fn validate_snapshot<R: Real>(snapshot: GridSnapshot<R>) -> Result<GridSnapshot<R>> {
    snapshot.validate()?;
    Ok(snapshot)
}
