//! Uniform one-dimensional meshes and grid functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A uniform mesh, either periodic or a truncated interval of the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    /// Periodic interval `[0, length)`; the right endpoint is identified with 0.
    Torus { length: f64, points: usize },
    /// Closed interval `[left, right]` including both endpoints.
    Line { left: f64, right: f64, points: usize },
}

pub const MIN_POINTS: usize = 8;

impl Grid {
    pub fn torus(length: f64, points: usize) -> Result<Self> {
        let g = Grid::Torus { length, points };
        g.check()?;
        Ok(g)
    }

    /// Torus of length 2π.
    pub fn periodic(points: usize) -> Result<Self> {
        Self::torus(2.0 * PI, points)
    }

    pub fn line(left: f64, right: f64, points: usize) -> Result<Self> {
        let g = Grid::Line { left, right, points };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if self.len() < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {}",
                self.len()
            )));
        }
        let h = self.spacing();
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {h} is not positive")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match *self {
            Grid::Torus { points, .. } | Grid::Line { points, .. } => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Grid::Torus { .. })
    }

    pub fn spacing(&self) -> f64 {
        match *self {
            Grid::Torus { length, points } => length / points as f64,
            Grid::Line { left, right, points } => (right - left) / (points as f64 - 1.0),
        }
    }

    /// Measure of the domain |Ω|.
    pub fn measure(&self) -> f64 {
        match *self {
            Grid::Torus { length, .. } => length,
            Grid::Line { left, right, .. } => right - left,
        }
    }

    pub fn left(&self) -> f64 {
        match *self {
            Grid::Torus { .. } => 0.0,
            Grid::Line { left, .. } => left,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.left() + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Quadrature weights: uniform on the torus, trapezoid on the line.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        match *self {
            Grid::Torus { .. } => h,
            Grid::Line { points, .. } => {
                if i == 0 || i + 1 == points {
                    0.5 * h
                } else {
                    h
                }
            }
        }
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(" at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Internal constructor for solver output; finiteness is checked by the caller.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature of the samples over the domain.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.weight(i) * v)
            .sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn shifted(&self, c: f64) -> Field {
        self.map(|v| v + c)
    }
}

/// Arithmetic mean of the samples (the midpoint-rule average on a uniform torus).
pub fn mean(f: &Field) -> f64 {
    f.values.iter().sum::<f64>() / f.len() as f64
}
