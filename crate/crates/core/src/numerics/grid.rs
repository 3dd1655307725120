//! Sampling grids.

use crate::error::{Error, Result};

/// How the nodes of a grid are spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Uniform,
    /// Distances to `endpoint` form a geometric sequence with the given ratio.
    LogTowardEndpoint {
        endpoint: f64,
        ratio: f64,
    },
    /// Nodes joined from several grids; usable for sampling, not marching.
    Composite,
}

/// Strictly increasing nodes with a spacing policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

impl Grid {
    pub const MIN_NODES: usize = 32;

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!("uniform grid needs a < b, got [{a}, {b}]")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidParameter(format!("grid needs >= {} nodes", Self::MIN_NODES)));
        }
        let h = (b - a) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
        nodes[n - 1] = b;
        Ok(Self { nodes, spacing: Spacing::Uniform })
    }

    /// Uniform grid with step close to `h`.
    pub fn uniform_step(a: f64, b: f64, h: f64) -> Result<Self> {
        let n = (((b - a) / h).ceil() as usize + 1).max(Self::MIN_NODES);
        Self::uniform(a, b, n)
    }

    /// Nodes whose distances to `endpoint` run geometrically from `near` to
    /// `far` (both distances, 0 < near < far); `side` is +1 when the nodes
    /// lie above the endpoint and −1 when below.
    pub fn log_toward(endpoint: f64, side: f64, near: f64, far: f64, n: usize) -> Result<Self> {
        if !(near > 0.0 && far > near && near.is_finite() && far.is_finite()) {
            return Err(Error::InvalidParameter(format!("log grid needs 0 < near < far, got {near}, {far}")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidParameter(format!("grid needs >= {} nodes", Self::MIN_NODES)));
        }
        let h = (far / near).ln() / (n - 1) as f64;
        let dist: Vec<f64> = (0..n).map(|i| if i + 1 == n { far } else { near * (h * i as f64).exp() }).collect();
        let nodes: Vec<f64> =
            if side > 0.0 { dist.iter().map(|d| endpoint + d).collect() } else { dist.iter().rev().map(|d| endpoint - d).collect() };
        Ok(Self { nodes, spacing: Spacing::LogTowardEndpoint { endpoint, ratio: h.exp() } })
    }

    /// Log grid with logarithmic step close to `h`.
    pub fn log_toward_step(endpoint: f64, side: f64, near: f64, far: f64, h: f64) -> Result<Self> {
        let n = (((far / near).ln() / h).ceil() as usize + 1).max(Self::MIN_NODES);
        Self::log_toward(endpoint, side, near, far, n)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the node nearest to x, or an error when x is outside.
    pub fn nearest_index(&self, x: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        let slack = 1e-12 * (lo.abs() + hi.abs());
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutsideGrid { x, lo, hi });
        }
        let j = self.nodes.partition_point(|&v| v < x);
        if j == 0 {
            return Ok(0);
        }
        if j == self.nodes.len() {
            return Ok(j - 1);
        }
        Ok(if x - self.nodes[j - 1] <= self.nodes[j] - x { j - 1 } else { j })
    }

    /// Same grid restricted to nodes [a, b).
    pub(crate) fn slice(&self, a: usize, b: usize) -> Self {
        Self { nodes: self.nodes[a..b].to_vec(), spacing: self.spacing }
    }

    pub(crate) fn from_nodes(nodes: Vec<f64>, spacing: Spacing) -> Self {
        Self { nodes, spacing }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_is_geometric() {
        let g = Grid::log_toward(0.0, 1.0, 1e-6, 1.0, 601).unwrap();
        assert_eq!(g.len(), 601);
        let r = g.nodes()[1] / g.nodes()[0];
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        assert_eq!(g.last(), 1.0);
    }

    #[test]
    fn mirrored_log_grid_increases() {
        let g = Grid::log_toward(0.0, -1.0, 1e-3, 1.0, 64).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.first(), -1.0);
        assert!((g.last() + 1e-3).abs() < 1e-18);
    }

    #[test]
    fn nearest_and_outside() {
        let g = Grid::uniform(0.0, 1.0, 101).unwrap();
        assert_eq!(g.nearest_index(0.334).unwrap(), 33);
        assert!(matches!(g.nearest_index(1.5), Err(Error::OutsideGrid { .. })));
        assert!(Grid::uniform(0.0, 1.0, 10).is_err());
    }
}
