//! Kernel-independent fast multipole method built on strong recursive
//! skeletonization. Far-field interactions are compressed with interpolative
//! decompositions against proxy surfaces, and all translations run between
//! neighboring boxes only.
//!
//! The pipeline is `build_balanced_tree` -> `compute_neighbor_lists` ->
//! `build_skeletons` -> `fmm_apply`; [`Fmm`] bundles these.

pub mod apply;
pub mod bench;
mod bessel;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod points;
pub mod scalar;
pub mod skeleton;
pub mod tree;

pub use apply::{fmm_apply, FmmContext};
pub use bench::{generate_points, run_benchmark, BenchConfig, BenchReport, Distribution};
pub use bessel::j0_y0;
pub use error::{FmmError, Result};
pub use kernel::{
    dispatch, Helmholtz2d, Helmholtz3d, Kernel, KernelFamily, KernelSpec, KernelVisitor, Laplace2d,
    Laplace3d,
};
pub use oracle::{direct_sum, max_rel_err, ErrorReport};
pub use points::PointSet;
pub use scalar::Scalar;
pub use skeleton::{build_skeletons, ProxyConfig, SkeletonSet};
pub use tree::{build_balanced_tree, compute_neighbor_lists, NeighborLists, Tree};

/// A built FMM operator owning its tree, neighbor lists and skeletons.
pub struct Fmm<K: Kernel> {
    pub kernel: K,
    pub points: PointSet,
    pub tree: Tree,
    pub neighbors: NeighborLists,
    pub skeletons: SkeletonSet<K::Scalar>,
}

impl<K: Kernel> Fmm<K> {
    pub fn build(kernel: K, points: PointSet, leaf_size: usize, epsilon: f64) -> Result<Self> {
        let proxy = ProxyConfig::for_dim(kernel.dim());
        Self::build_with_proxy(kernel, points, leaf_size, epsilon, proxy)
    }

    pub fn build_with_proxy(
        kernel: K,
        points: PointSet,
        leaf_size: usize,
        epsilon: f64,
        proxy: ProxyConfig,
    ) -> Result<Self> {
        if points.dim() != kernel.dim() {
            return Err(FmmError::DimensionMismatch {
                expected: kernel.dim(),
                got: points.dim(),
            });
        }
        let tree = build_balanced_tree(&points, leaf_size).map_err(|e| e.at_stage("tree"))?;
        let neighbors = compute_neighbor_lists(&tree);
        let skeletons = build_skeletons(&tree, &points, &kernel, epsilon, &proxy)
            .map_err(|e| e.at_stage("skeletonize"))?;
        Ok(Self {
            kernel,
            points,
            tree,
            neighbors,
            skeletons,
        })
    }

    pub fn context(&self) -> FmmContext<'_, K> {
        FmmContext {
            tree: &self.tree,
            neighbors: &self.neighbors,
            skeletons: &self.skeletons,
            points: &self.points,
            kernel: &self.kernel,
        }
    }

    /// `u = A q` with the diagonal excluded.
    pub fn apply(&self, q: &[K::Scalar]) -> Result<Vec<K::Scalar>> {
        fmm_apply(self.context(), q).map_err(|e| e.at_stage("apply"))
    }
}
