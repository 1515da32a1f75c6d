//! Morton (Z-order) codes. Each level contributes a group of `d` bits holding
//! the child index at that level, x least significant, then y, then z. Level 1
//! is the most significant group.

use crate::error::{FmmError, Result};

use super::RootBox;

pub const MAX_DEPTH_2D: u32 = 31;
pub const MAX_DEPTH_3D: u32 = 21;

pub fn max_depth(dim: usize) -> u32 {
    if dim == 2 {
        MAX_DEPTH_2D
    } else {
        MAX_DEPTH_3D
    }
}

/// Integer cell coordinates of `point` on the `2^depth` grid over `root`.
/// Cells are half-open except at the upper boundary of the root.
pub fn grid_coords(point: &[f64], root: &RootBox, depth: u32) -> Result<[u32; 3]> {
    let n = (1u64 << depth) as f64;
    let side = root.side();
    let lo = root.lower();
    let mut out = [0u32; 3];
    for (k, &x) in point.iter().enumerate().take(root.dim) {
        let t = (x - lo[k]) / side;
        if !(0.0..=1.0).contains(&t) {
            return Err(FmmError::PointOutsideRoot);
        }
        let c = ((t * n).floor() as u64).min((1u64 << depth) - 1);
        out[k] = c as u32;
    }
    Ok(out)
}

/// Interleave the low `depth` bits of each coordinate.
pub fn interleave(coords: [u32; 3], dim: usize, depth: u32) -> u64 {
    let mut code = 0u64;
    for bit in (0..depth).rev() {
        for k in 0..dim {
            code = (code << 1) | u64::from((coords[dim - 1 - k] >> bit) & 1);
        }
    }
    code
}

/// Inverse of [`interleave`].
pub fn deinterleave(code: u64, dim: usize, depth: u32) -> [u32; 3] {
    let mut coords = [0u32; 3];
    for bit in 0..depth {
        let group = (code >> (bit as usize * dim)) as u32;
        for (k, c) in coords.iter_mut().enumerate().take(dim) {
            *c |= ((group >> k) & 1) << bit;
        }
    }
    coords
}

/// Morton code of `point` at `depth` levels below `root`.
pub fn morton_encode(point: &[f64], root: &RootBox, depth: u32) -> Result<u64> {
    if point.len() != root.dim {
        return Err(FmmError::DimensionMismatch {
            expected: root.dim,
            got: point.len(),
        });
    }
    let max = max_depth(root.dim);
    if depth > max {
        return Err(FmmError::DepthExceeded { max });
    }
    Ok(interleave(
        grid_coords(point, root, depth)?,
        root.dim,
        depth,
    ))
}
