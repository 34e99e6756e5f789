use crate::error::{Error, Result};
use crate::geometry::Point3;

use super::PixelPoint;

/// Inner-corner layout of a planar chessboard target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChessboardSpec {
    pub inner_cols: usize,
    pub inner_rows: usize,
    /// Edge length of one square, mm.
    pub square_size: f64,
}

impl Default for ChessboardSpec {
    fn default() -> Self {
        Self {
            inner_cols: 8,
            inner_rows: 6,
            square_size: 3.0,
        }
    }
}

impl ChessboardSpec {
    pub fn new(inner_cols: usize, inner_rows: usize, square_size: f64) -> Result<Self> {
        let spec = Self {
            inner_cols,
            inner_rows,
            square_size,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inner_cols < 3 || self.inner_rows < 3 {
            return Err(Error::InvalidParameter(format!(
                "board needs at least 3x3 inner corners, got {}x{}",
                self.inner_cols, self.inner_rows
            )));
        }
        if !(self.square_size > 0.0 && self.square_size.is_finite()) {
            return Err(Error::InvalidParameter("square size must be positive".into()));
        }
        Ok(())
    }

    pub fn corner_count(&self) -> usize {
        self.inner_cols * self.inner_rows
    }

    /// Board width and height spanned by the inner corners, mm.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.inner_cols - 1) as f64 * self.square_size,
            (self.inner_rows - 1) as f64 * self.square_size,
        )
    }
}

/// Corner positions in the board frame, row-major: corner `(i, j)` (row `i`,
/// column `j`) sits at `(j·s, i·s, 0)`.
pub fn board_object_points(spec: &ChessboardSpec) -> Vec<Point3> {
    let s = spec.square_size;
    (0..spec.inner_rows)
        .flat_map(|i| (0..spec.inner_cols).map(move |j| Point3::new(j as f64 * s, i as f64 * s, 0.0)))
        .collect()
}

/// Detected corners of one board view, in the same order as
/// [`board_object_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct ViewObservation {
    pub corners: Vec<PixelPoint>,
}

impl ViewObservation {
    pub fn validate(&self, spec: &ChessboardSpec) -> Result<()> {
        if self.corners.len() != spec.corner_count() {
            return Err(Error::Dimension(format!(
                "view has {} corners, board has {}",
                self.corners.len(),
                spec.corner_count()
            )));
        }
        if self.corners.iter().any(|c| !c.u.is_finite() || !c.v.is_finite()) {
            return Err(Error::NonFinite("corner observation"));
        }
        Ok(())
    }
}
