//! Strong recursive skeletonization (the build stage).
//!
//! Boxes are processed from the finest level up to level 2. A leaf's index
//! vector is its own points; a tree box's index vector is the concatenation
//! of its children's skeletons in child order. Each index vector is split
//! into skeleton and redundant parts by a column ID of the stacked proxy
//! matrix `[A(proxy, B); A(B, proxy)^*]`.
//!
//! Level 1 is not compressed: its index vectors are assembled so the apply
//! stage can interact level-1 boxes densely.

mod id;
mod proxy;

use rayon::prelude::*;

use crate::error::{FmmError, Result};
use crate::kernel::Kernel;
use crate::linalg::Mat;
use crate::points::PointSet;
use crate::scalar::Scalar;
use crate::tree::Tree;

pub use id::{column_id, ColumnId};
pub use proxy::{proxy_surface, ProxyConfig, DEFAULT_RADIUS_FACTOR};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxSkeleton<T> {
    /// Global point indices `B_i`.
    pub index_vector: Vec<usize>,
    /// Positions of the skeleton within `index_vector`, ascending.
    pub skel_pos: Vec<usize>,
    /// Positions of the redundant indices within `index_vector`, ascending.
    pub red_pos: Vec<usize>,
    /// `|S| x |R|` interpolation matrix.
    pub interp: Mat<T>,
}

impl<T: Scalar> BoxSkeleton<T> {
    pub fn rank(&self) -> usize {
        self.skel_pos.len()
    }

    /// Global indices of the skeleton, in index-vector order.
    pub fn skeleton(&self) -> Vec<usize> {
        self.skel_pos
            .iter()
            .map(|&p| self.index_vector[p])
            .collect()
    }

    pub fn redundant(&self) -> Vec<usize> {
        self.red_pos.iter().map(|&p| self.index_vector[p]).collect()
    }

    /// `q_hat = (I  T) (q_S; q_R)` for box charges `q` in index-vector order.
    pub fn compress(&self, q: &[T]) -> Vec<T> {
        let mut out: Vec<T> = self.skel_pos.iter().map(|&p| q[p]).collect();
        let qr: Vec<T> = self.red_pos.iter().map(|&p| q[p]).collect();
        self.interp.gemv_add(&qr, &mut out);
        out
    }

    /// `u += (I; T^*) u_hat`, scattered onto index-vector positions.
    pub fn expand_add(&self, u_hat: &[T], u: &mut [T]) {
        for (&p, &v) in self.skel_pos.iter().zip(u_hat) {
            u[p] += v;
        }
        let mut ur = vec![T::zero(); self.red_pos.len()];
        self.interp.gemv_adjoint_add(u_hat, &mut ur);
        for (&p, v) in self.red_pos.iter().zip(ur) {
            u[p] += v;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SkeletonSet<T> {
    epsilon: f64,
    proxy: ProxyConfig,
    /// Compressed boxes (levels 2..L), indexed by box id.
    skeletons: Vec<Option<BoxSkeleton<T>>>,
    /// Index vectors of level-1 boxes, indexed by box id.
    top: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> SkeletonSet<T> {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn proxy(&self) -> &ProxyConfig {
        &self.proxy
    }

    pub fn get(&self, id: usize) -> Option<&BoxSkeleton<T>> {
        self.skeletons.get(id).and_then(Option::as_ref)
    }

    /// Index vector of any box at level >= 1.
    pub fn index_vector(&self, id: usize) -> &[usize] {
        match self.get(id) {
            Some(s) => &s.index_vector,
            None => &self.top[id],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BoxSkeleton<T>)> {
        self.skeletons
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|s| (i, s)))
    }

    pub fn k_max(&self) -> usize {
        self.iter().map(|(_, s)| s.rank()).max().unwrap_or(0)
    }

    /// Number of stored interpolation-matrix entries.
    pub fn proj_entries(&self) -> usize {
        self.iter()
            .map(|(_, s)| s.interp.rows() * s.interp.cols())
            .sum()
    }

    pub fn proj_bytes(&self) -> usize {
        self.proj_entries() * std::mem::size_of::<T>()
    }
}

/// Stacked proxy matrix for a set of global indices around box `id`.
pub fn proxy_matrix<K: Kernel>(
    kernel: &K,
    tree: &Tree,
    points: &PointSet,
    id: usize,
    index_vector: &[usize],
    cfg: &ProxyConfig,
) -> Mat<K::Scalar> {
    let dim = tree.dim();
    let proxies = proxy_surface(tree.get(id), dim, cfg);
    let np = proxies.len();
    Mat::from_fn(2 * np, index_vector.len(), |r, c| {
        let x = points.point(index_vector[c]);
        if r < np {
            kernel.eval(&proxies[r][..dim], x)
        } else {
            kernel.eval(x, &proxies[r - np][..dim]).conj()
        }
    })
}

/// Builds skeletons for every box at levels `L..2` of a balanced tree.
pub fn build_skeletons<K: Kernel>(
    tree: &Tree,
    points: &PointSet,
    kernel: &K,
    epsilon: f64,
    cfg: &ProxyConfig,
) -> Result<SkeletonSet<K::Scalar>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(FmmError::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {epsilon}"
        )));
    }
    cfg.validate()?;
    if points.dim() != tree.dim() || kernel.dim() != tree.dim() {
        return Err(FmmError::DimensionMismatch {
            expected: tree.dim(),
            got: points.dim(),
        });
    }
    if points.len() != tree.n_points() {
        return Err(FmmError::LengthMismatch {
            expected: tree.n_points(),
            got: points.len(),
        });
    }

    let n = tree.n_boxes();
    let n_proxy = cfg.n_proxy(tree.dim());
    let mut skeletons: Vec<Option<BoxSkeleton<K::Scalar>>> = vec![None; n];
    let mut warnings = Vec::new();

    let gather = |skeletons: &[Option<BoxSkeleton<K::Scalar>>], id: usize| -> Vec<usize> {
        let b = tree.get(id);
        if b.is_leaf() {
            tree.box_points(id).to_vec()
        } else {
            b.children
                .iter()
                .flat_map(|&c| skeletons[c].as_ref().expect("child skeleton").skeleton())
                .collect()
        }
    };

    for level in (2..=tree.depth()).rev() {
        let built: Vec<(usize, BoxSkeleton<K::Scalar>)> = tree
            .level(level)
            .par_iter()
            .map(|&id| {
                let index_vector = gather(&skeletons, id);
                let p = proxy_matrix(kernel, tree, points, id, &index_vector, cfg);
                let cid = column_id(&p, epsilon);
                (
                    id,
                    BoxSkeleton {
                        index_vector,
                        skel_pos: cid.skeleton,
                        red_pos: cid.redundant,
                        interp: cid.interp,
                    },
                )
            })
            .collect();
        for (id, s) in built {
            if s.rank() >= n_proxy {
                warnings.push(format!(
                    "box {id} (level {level}): rank {} reached the proxy count {n_proxy}; \
                     increase the proxy resolution",
                    s.rank()
                ));
            }
            skeletons[id] = Some(s);
        }
    }

    let mut top = vec![Vec::new(); n];
    for &id in tree.level(1) {
        top[id] = gather(&skeletons, id);
    }

    Ok(SkeletonSet {
        epsilon,
        proxy: *cfg,
        skeletons,
        top,
        warnings,
    })
}
