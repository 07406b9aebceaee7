use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform one-dimensional grid of `n` nodes on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Node position. Computed as a weighted mean of the endpoints so that a
    /// grid symmetric about zero has exactly antisymmetric nodes.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let m = (self.n - 1) as f64;
        let i = i as f64;
        ((m - i) * self.x_min + i * self.x_max) / m
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the node nearest `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.x_min) / self.h()).round();
        s.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Same extent with `2(n − 1) + 1` nodes: half the spacing.
    pub fn refined(&self) -> Self {
        Self { n: 2 * (self.n - 1) + 1, ..*self }
    }
}
