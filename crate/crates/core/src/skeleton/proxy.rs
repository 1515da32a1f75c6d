use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FmmError, Result};
use crate::tree::TreeBox;

pub const DEFAULT_RADIUS_FACTOR: f64 = 2.95;
pub const DEFAULT_POINTS_PER_EDGE_2D: usize = 24;
pub const DEFAULT_GRID_PER_FACE_3D: usize = 8;

/// Proxy surface: Chebyshev-Lobatto nodes on the boundary of a square/cube of
/// side `radius_factor * a`, concentric with a box of side `a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyConfig {
    pub radius_factor: f64,
    /// Nodes per edge (2D) or per face direction (3D), endpoints included.
    pub nodes_per_side: usize,
}

impl ProxyConfig {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            radius_factor: DEFAULT_RADIUS_FACTOR,
            nodes_per_side: if dim == 2 {
                DEFAULT_POINTS_PER_EDGE_2D
            } else {
                DEFAULT_GRID_PER_FACE_3D
            },
        }
    }

    pub fn with_nodes(mut self, nodes_per_side: usize) -> Self {
        self.nodes_per_side = nodes_per_side;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius_factor <= 1.0 || !self.radius_factor.is_finite() {
            return Err(FmmError::InvalidParameter(format!(
                "proxy radius factor must exceed 1, got {}",
                self.radius_factor
            )));
        }
        if self.nodes_per_side < 4 {
            return Err(FmmError::InvalidParameter(format!(
                "need at least 4 proxy nodes per side, got {}",
                self.nodes_per_side
            )));
        }
        Ok(())
    }

    /// Distinct proxy points per box.
    pub fn n_proxy(&self, dim: usize) -> usize {
        let p = self.nodes_per_side;
        p.pow(dim as u32) - (p - 2).pow(dim as u32)
    }
}

/// Chebyshev-Lobatto nodes on [-1, 1], ascending.
fn lobatto(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| -(PI * j as f64 / (p - 1) as f64).cos())
        .map(|x| if x.abs() < 1e-15 { 0.0 } else { x })
        .collect()
}

/// Proxy points for `b`: the boundary nodes of the tensor Lobatto grid, so
/// shared edge and corner nodes appear once.
pub fn proxy_surface(b: &TreeBox, dim: usize, cfg: &ProxyConfig) -> Vec<[f64; 3]> {
    let p = cfg.nodes_per_side;
    let nodes = lobatto(p);
    let half = 0.5 * cfg.radius_factor * b.side();
    let mut out = Vec::with_capacity(cfg.n_proxy(dim));
    let zr = if dim == 3 { p } else { 1 };
    for k in 0..zr {
        for j in 0..p {
            for i in 0..p {
                let on_boundary = i == 0
                    || i == p - 1
                    || j == 0
                    || j == p - 1
                    || (dim == 3 && (k == 0 || k == p - 1));
                if !on_boundary {
                    continue;
                }
                let mut x = [0.0; 3];
                x[0] = b.center[0] + half * nodes[i];
                x[1] = b.center[1] + half * nodes[j];
                if dim == 3 {
                    x[2] = b.center[2] + half * nodes[k];
                }
                out.push(x);
            }
        }
    }
    out
}
