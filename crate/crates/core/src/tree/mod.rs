//! Adaptive quad/oct-tree over a point set.
//!
//! Points are sorted by their Morton code at the maximum depth, so every box
//! owns a contiguous range of the tree-order permutation. Boxes are numbered
//! by level, then by Morton code within the level.

mod balance;
pub mod morton;
mod neighbors;

use std::collections::HashMap;
use std::ops::Range;

use crate::error::{FmmError, Result};
use crate::points::PointSet;

pub use balance::balance_2to1;
pub use morton::{morton_encode, MAX_DEPTH_2D, MAX_DEPTH_3D};
pub use neighbors::{compute_neighbor_lists, NeighborLists};

use morton::{deinterleave, grid_coords, interleave, max_depth};

const ROOT_MARGIN: f64 = 1e-12;

/// Axis-aligned root square/cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootBox {
    pub dim: usize,
    pub center: [f64; 3],
    pub half_width: f64,
}

impl RootBox {
    /// Smallest enclosing cube, widened by a relative margin so that extreme
    /// points sit strictly inside.
    pub fn enclosing(points: &PointSet) -> Self {
        let dim = points.dim();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points.iter() {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut center = [0.0; 3];
        let mut half: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..dim {
            center[k] = 0.5 * (lo[k] + hi[k]);
            half = half.max(0.5 * (hi[k] - lo[k]));
            scale = scale.max(center[k].abs());
        }
        if half == 0.0 {
            half = 0.5;
        }
        let half_width = half * (1.0 + ROOT_MARGIN) + scale * f64::EPSILON;
        Self {
            dim,
            center,
            half_width,
        }
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn lower(&self) -> [f64; 3] {
        let mut lo = [0.0; 3];
        for (l, c) in lo.iter_mut().zip(&self.center).take(self.dim) {
            *l = c - self.half_width;
        }
        lo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeBox {
    pub id: usize,
    pub level: u32,
    /// Integer cell coordinates at `level`.
    pub anchor: [u32; 3],
    pub center: [f64; 3],
    pub half_width: f64,
    pub morton: u64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Slice of [`Tree::permutation`] holding this box's points.
    pub point_range: Range<usize>,
}

impl TreeBox {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn len(&self) -> usize {
        self.point_range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_range.is_empty()
    }

    /// Closed regions share at least one point.
    pub fn is_adjacent(&self, other: &TreeBox) -> bool {
        let tol = 1e-9 * self.half_width.min(other.half_width);
        (0..3).all(|k| {
            (self.center[k] - other.center[k]).abs() <= self.half_width + other.half_width + tol
        })
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .enumerate()
            .all(|(k, &x)| (x - self.center[k]).abs() <= self.half_width * (1.0 + 1e-12))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    dim: usize,
    root: RootBox,
    leaf_size: usize,
    boxes: Vec<TreeBox>,
    levels: Vec<Vec<usize>>,
    /// Tree-order position -> original point index.
    perm: Vec<usize>,
    /// Max-depth Morton code of each point in tree order.
    codes: Vec<u64>,
    lookup: HashMap<(u32, u64), usize>,
}

impl Tree {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &RootBox {
        &self.root
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn boxes(&self) -> &[TreeBox] {
        &self.boxes
    }

    pub fn get(&self, id: usize) -> &TreeBox {
        &self.boxes[id]
    }

    pub fn n_boxes(&self) -> usize {
        self.boxes.len()
    }

    pub fn n_points(&self) -> usize {
        self.perm.len()
    }

    /// Deepest level `L` (root is level 0).
    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, level: u32) -> &[usize] {
        self.levels
            .get(level as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeBox> {
        self.boxes.iter().filter(|b| b.is_leaf())
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves().count()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Original indices of the points in box `id`, in tree order.
    pub fn box_points(&self, id: usize) -> &[usize] {
        &self.perm[self.boxes[id].point_range.clone()]
    }

    pub fn find(&self, level: u32, anchor: [u32; 3]) -> Option<usize> {
        if level > self.depth() {
            return None;
        }
        let n = 1u32.checked_shl(level).unwrap_or(0);
        if level < 32 && anchor.iter().take(self.dim).any(|&a| a >= n) {
            return None;
        }
        self.lookup
            .get(&(level, interleave(anchor, self.dim, level)))
            .copied()
    }

    pub fn boxes_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

/// Recursive subdivision: boxes with more than `leaf_size` points are split,
/// empty children are pruned. The result is not 2:1 balanced.
pub fn build_tree(points: &PointSet, leaf_size: usize) -> Result<Tree> {
    if points.is_empty() {
        return Err(FmmError::InvalidParameter("point set is empty".into()));
    }
    if leaf_size == 0 {
        return Err(FmmError::InvalidParameter(
            "leaf size must be at least 1".into(),
        ));
    }
    points.ensure_distinct()?;

    let dim = points.dim();
    let root = RootBox::enclosing(points);
    let depth = max_depth(dim);
    let mut keyed: Vec<(u64, usize)> = (0..points.len())
        .map(|i| {
            let c = grid_coords(points.point(i), &root, depth)?;
            Ok((interleave(c, dim, depth), i))
        })
        .collect::<Result<_>>()?;
    keyed.sort_unstable();
    let (codes, perm): (Vec<u64>, Vec<usize>) = keyed.into_iter().unzip();

    let mut builder = Builder::new(dim, root, leaf_size, codes, perm);
    builder.subdivide_all()?;
    Ok(builder.finish())
}

#[derive(Clone, Debug)]
struct Node {
    level: u32,
    morton: u64,
    range: Range<usize>,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Mutable arena used while constructing and balancing.
struct Builder {
    dim: usize,
    root: RootBox,
    leaf_size: usize,
    max_depth: u32,
    codes: Vec<u64>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
    map: HashMap<(u32, u64), usize>,
}

impl Builder {
    fn new(dim: usize, root: RootBox, leaf_size: usize, codes: Vec<u64>, perm: Vec<usize>) -> Self {
        let n = codes.len();
        let mut map = HashMap::new();
        map.insert((0, 0), 0);
        Self {
            dim,
            root,
            leaf_size,
            max_depth: max_depth(dim),
            codes,
            perm,
            nodes: vec![Node {
                level: 0,
                morton: 0,
                range: 0..n,
                parent: None,
                children: Vec::new(),
            }],
            map,
        }
    }

    fn from_tree(tree: Tree) -> Self {
        let nodes = tree
            .boxes
            .iter()
            .map(|b| Node {
                level: b.level,
                morton: b.morton,
                range: b.point_range.clone(),
                parent: b.parent,
                children: b.children.clone(),
            })
            .collect();
        Self {
            dim: tree.dim,
            root: tree.root,
            leaf_size: tree.leaf_size,
            max_depth: max_depth(tree.dim),
            codes: tree.codes,
            perm: tree.perm,
            nodes,
            map: tree.lookup,
        }
    }

    fn subdivide_all(&mut self) -> Result<()> {
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if self.nodes[id].range.len() <= self.leaf_size {
                continue;
            }
            if self.nodes[id].level >= self.max_depth {
                return Err(FmmError::DepthExceeded {
                    max: self.max_depth,
                });
            }
            let kids = self.split(id);
            stack.extend(kids.into_iter().rev());
        }
        Ok(())
    }

    /// Splits a leaf into its non-empty children.
    fn split(&mut self, id: usize) -> Vec<usize> {
        debug_assert!(self.nodes[id].children.is_empty());
        let level = self.nodes[id].level + 1;
        let shift = self.dim as u32 * (self.max_depth - level);
        let range = self.nodes[id].range.clone();
        let mut kids = Vec::new();
        let mut start = range.start;
        while start < range.end {
            let key = self.codes[start] >> shift;
            let end =
                start + self.codes[start..range.end].partition_point(|&c| (c >> shift) == key);
            let child = self.nodes.len();
            self.nodes.push(Node {
                level,
                morton: key,
                range: start..end,
                parent: Some(id),
                children: Vec::new(),
            });
            self.map.insert((level, key), child);
            kids.push(child);
            start = end;
        }
        self.nodes[id].children = kids.clone();
        kids
    }

    fn finish(self) -> Tree {
        let dim = self.dim;
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&i| (self.nodes[i].level, self.nodes[i].morton));
        let mut new_id = vec![0usize; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let depth = self.nodes.iter().map(|n| n.level).max().unwrap_or(0);
        let mut levels = vec![Vec::new(); depth as usize + 1];
        let lo = self.root.lower();
        let mut boxes = Vec::with_capacity(order.len());
        let mut lookup = HashMap::with_capacity(order.len());
        for (id, &old) in order.iter().enumerate() {
            let n = &self.nodes[old];
            let anchor = deinterleave(n.morton, dim, n.level);
            let side = self.root.side() / f64::powi(2.0, n.level as i32);
            let mut center = [0.0; 3];
            for k in 0..dim {
                center[k] = lo[k] + (f64::from(anchor[k]) + 0.5) * side;
            }
            levels[n.level as usize].push(id);
            lookup.insert((n.level, n.morton), id);
            boxes.push(TreeBox {
                id,
                level: n.level,
                anchor,
                center,
                half_width: 0.5 * side,
                morton: n.morton,
                parent: n.parent.map(|p| new_id[p]),
                children: n.children.iter().map(|&c| new_id[c]).collect(),
                point_range: n.range.clone(),
            });
        }
        Tree {
            dim,
            root: self.root,
            leaf_size: self.leaf_size,
            boxes,
            levels,
            perm: self.perm,
            codes: self.codes,
            lookup,
        }
    }
}

/// Unbalanced construction followed by 2:1 balancing.
pub fn build_balanced_tree(points: &PointSet, leaf_size: usize) -> Result<Tree> {
    Ok(balance_2to1(build_tree(points, leaf_size)?))
}
