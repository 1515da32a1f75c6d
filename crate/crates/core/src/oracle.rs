//! Reference computations: direct O(N^2) summation, the error metric, and a
//! dense single-level factorization built from one level of skeletons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FmmError, Result};
use crate::kernel::Kernel;
use crate::linalg::Mat;
use crate::points::PointSet;
use crate::scalar::Scalar;
use crate::skeleton::SkeletonSet;
use crate::tree::{NeighborLists, Tree};

/// `u_i = sum_{j != i} G(x_i, x_j) q_j` for each `i` in `targets`, summed in
/// ascending `j`.
pub fn direct_sum<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    q: &[K::Scalar],
    targets: &[usize],
) -> Result<Vec<K::Scalar>> {
    if q.len() != points.len() {
        return Err(FmmError::LengthMismatch {
            expected: points.len(),
            got: q.len(),
        });
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= points.len()) {
        return Err(FmmError::InvalidParameter(format!(
            "target index {bad} out of range for {} points",
            points.len()
        )));
    }
    if points.dim() != kernel.dim() {
        return Err(FmmError::DimensionMismatch {
            expected: kernel.dim(),
            got: points.dim(),
        });
    }
    Ok(targets
        .par_iter()
        .map(|&i| potential_at(kernel, points, q, i))
        .collect())
}

pub(crate) fn direct_sum_all<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    q: &[K::Scalar],
) -> Vec<K::Scalar> {
    (0..points.len())
        .into_par_iter()
        .map(|i| potential_at(kernel, points, q, i))
        .collect()
}

fn potential_at<K: Kernel>(kernel: &K, points: &PointSet, q: &[K::Scalar], i: usize) -> K::Scalar {
    let x = points.point(i);
    let mut acc = K::Scalar::zero();
    for (j, (y, &qj)) in points.iter().zip(q).enumerate() {
        if j != i {
            acc += kernel.eval(x, y) * qj;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `max_i |u_i - ref_i| / max_i |ref_i|`
    pub relerr: f64,
    pub n_checked: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indices: Vec<usize>,
}

pub fn max_rel_err<T: Scalar>(u: &[T], reference: &[T]) -> Result<ErrorReport> {
    if u.len() != reference.len() {
        return Err(FmmError::LengthMismatch {
            expected: reference.len(),
            got: u.len(),
        });
    }
    if u.is_empty() {
        return Err(FmmError::InvalidParameter("nothing to compare".into()));
    }
    let scale = reference.iter().map(|r| r.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(FmmError::ZeroReference);
    }
    let worst = u
        .iter()
        .zip(reference)
        .map(|(&a, &b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ErrorReport {
        relerr: worst / scale,
        n_checked: u.len(),
        indices: Vec::new(),
    })
}

/// Dense `N x N` operator
/// `A_near - E A_near(S,S) F + E A(S,S) F`
/// from the skeletons of one tree level whose boxes are all leaves.
///
/// `E` is block diagonal with `(I; T_i^*)` on each box, `F` with `(I  T_i)`,
/// and the near parts keep only blocks between adjacent boxes of that level.
pub fn single_level_operator<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    tree: &Tree,
    neighbors: &NeighborLists,
    skeletons: &SkeletonSet<K::Scalar>,
    level: u32,
) -> Result<Mat<K::Scalar>> {
    let boxes = tree.level(level);
    let covered: usize = boxes.iter().map(|&b| tree.get(b).len()).sum();
    if boxes.iter().any(|&b| !tree.get(b).is_leaf()) || covered != points.len() {
        return Err(FmmError::InvalidParameter(format!(
            "level {level} is not a uniform leaf level"
        )));
    }
    let n = points.len();

    // skeleton numbering
    let mut s_offset = vec![0usize; tree.n_boxes()];
    let mut s_global: Vec<usize> = Vec::new();
    for &b in boxes {
        let sk = skeletons
            .get(b)
            .ok_or_else(|| FmmError::InvalidParameter(format!("box {b} has no skeleton")))?;
        s_offset[b] = s_global.len();
        s_global.extend(sk.skeleton());
    }
    let ns = s_global.len();

    let mut e = Mat::<K::Scalar>::zeros(n, ns);
    let mut f = Mat::<K::Scalar>::zeros(ns, n);
    for &b in boxes {
        let sk = skeletons.get(b).expect("checked above");
        let off = s_offset[b];
        for (r, &p) in sk.skel_pos.iter().enumerate() {
            let g = sk.index_vector[p];
            e[(g, off + r)] = K::Scalar::one();
            f[(off + r, g)] = K::Scalar::one();
        }
        for (c, &p) in sk.red_pos.iter().enumerate() {
            let g = sk.index_vector[p];
            for r in 0..sk.rank() {
                let t = sk.interp[(r, c)];
                e[(g, off + r)] = t.conj();
                f[(off + r, g)] = t;
            }
        }
    }

    let g = |i: usize, j: usize| {
        if i == j {
            K::Scalar::zero()
        } else {
            kernel.eval(points.point(i), points.point(j))
        }
    };

    let mut a_near = Mat::<K::Scalar>::zeros(n, n);
    let mut ass_near = Mat::<K::Scalar>::zeros(ns, ns);
    for &bi in boxes {
        for &bj in &neighbors.colleagues[bi] {
            for &i in tree.box_points(bi) {
                for &j in tree.box_points(bj) {
                    a_near[(i, j)] = g(i, j);
                }
            }
            let (si, sj) = (skeletons.get(bi).unwrap(), skeletons.get(bj).unwrap());
            for (r, gi) in si.skeleton().into_iter().enumerate() {
                for (c, gj) in sj.skeleton().into_iter().enumerate() {
                    ass_near[(s_offset[bi] + r, s_offset[bj] + c)] = g(gi, gj);
                }
            }
        }
    }
    let ass = Mat::from_fn(ns, ns, |r, c| g(s_global[r], s_global[c]));

    let far_part = e.matmul(&ass.sub(&ass_near)).matmul(&f);
    Ok(Mat::from_fn(n, n, |r, c| a_near[(r, c)] + far_part[(r, c)]))
}
