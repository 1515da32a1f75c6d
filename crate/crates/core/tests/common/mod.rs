#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use skelfmm::linalg::Mat;
use skelfmm::skeleton::{column_id, proxy_matrix, ColumnId};
use skelfmm::{Kernel, NeighborLists, PointSet, Scalar, SkeletonSet, Tree};

pub fn uniform(dim: usize, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::new(dim, (0..n * dim).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Half the points uniform in the unit box, half in a tight Gaussian blob
/// near one corner.
pub fn clustered(dim: usize, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blob = Normal::new(0.1, 0.01).unwrap();
    let mut c = Vec::with_capacity(n * dim);
    for i in 0..n {
        for _ in 0..dim {
            if i % 2 == 0 {
                c.push(rng.random::<f64>());
            } else {
                c.push(blob.sample(&mut rng));
            }
        }
    }
    PointSet::new(dim, c).unwrap()
}

pub fn random_charges<T: Scalar>(n: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            T::from_complex(num_complex::Complex64::new(re, im))
        })
        .collect()
}

pub fn inf_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn rel_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let d = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max);
    d / inf_norm(b)
}

/// Partition, capacity, geometry, pruning and 2:1 balance.
pub fn check_tree(tree: &Tree, points: &PointSet) -> Result<(), String> {
    let n = points.len();
    let b = tree.leaf_size();
    let mut seen = vec![false; n];
    for leaf in tree.leaves() {
        if leaf.len() > b {
            return Err(format!(
                "leaf {} holds {} > {b} points",
                leaf.id,
                leaf.len()
            ));
        }
        for &i in tree.box_points(leaf.id) {
            if seen[i] {
                return Err(format!("point {i} in two leaves"));
            }
            seen[i] = true;
            if !leaf.contains(points.point(i)) {
                return Err(format!("point {i} outside leaf {}", leaf.id));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(format!("point {i} in no leaf"));
    }

    let root_side = tree.root().side();
    for bx in tree.boxes() {
        if bx.is_empty() {
            return Err(format!("empty box {}", bx.id));
        }
        let expect = root_side / f64::powi(2.0, bx.level as i32);
        if (bx.side() - expect).abs() > 1e-12 * root_side {
            return Err(format!(
                "box {} has side {} at level {}",
                bx.id,
                bx.side(),
                bx.level
            ));
        }
        let mut child_pts = 0;
        for &c in &bx.children {
            let ch = tree.get(c);
            child_pts += ch.len();
            if ch.parent != Some(bx.id) || ch.level != bx.level + 1 {
                return Err(format!("bad parent link {} -> {c}", bx.id));
            }
            for k in 0..tree.dim() {
                let off = (ch.center[k] - bx.center[k]).abs();
                if (off - ch.half_width).abs() > 1e-12 * root_side {
                    return Err(format!("child {c} is not a subdivision of {}", bx.id));
                }
            }
        }
        if !bx.is_leaf() && child_pts != bx.len() {
            return Err(format!("children of {} do not cover its points", bx.id));
        }
    }

    let leaves: Vec<_> = tree.leaves().collect();
    for (i, a) in leaves.iter().enumerate() {
        for c in &leaves[i + 1..] {
            if a.level.abs_diff(c.level) > 1 && a.is_adjacent(c) {
                return Err(format!(
                    "adjacent leaves {} (level {}) and {} (level {})",
                    a.id, a.level, c.id, c.level
                ));
            }
        }
    }
    Ok(())
}

/// Colleague symmetry and self-inclusion, coarse/fine inverse, geometric
/// adjacency of every listed pair.
pub fn check_neighbors(tree: &Tree, nl: &NeighborLists) -> Result<(), String> {
    let max_coll = 3usize.pow(tree.dim() as u32);
    for bx in tree.boxes() {
        let c = &nl.colleagues[bx.id];
        if !c.contains(&bx.id) {
            return Err(format!("box {} is not its own colleague", bx.id));
        }
        if c.len() > max_coll {
            return Err(format!("box {} has {} colleagues", bx.id, c.len()));
        }
        for &j in c {
            let o = tree.get(j);
            if o.level != bx.level || !bx.is_adjacent(o) || !nl.colleagues[j].contains(&bx.id) {
                return Err(format!("colleague pair {} / {j} invalid", bx.id));
            }
        }
        for &l in &nl.coarse[bx.id] {
            let leaf = tree.get(l);
            let parent = tree.get(bx.parent.unwrap());
            if !leaf.is_leaf()
                || leaf.level + 1 != bx.level
                || !parent.is_adjacent(leaf)
                || l == parent.id
            {
                return Err(format!("coarse pair {} / {l} invalid", bx.id));
            }
            if !nl.fine[l].contains(&bx.id) {
                return Err(format!(
                    "coarse pair {} / {l} missing its fine inverse",
                    bx.id
                ));
            }
        }
        for &f in &nl.fine[bx.id] {
            if !nl.coarse[f].contains(&bx.id) {
                return Err(format!(
                    "fine pair {} / {f} missing its coarse inverse",
                    bx.id
                ));
            }
        }
    }
    // completeness: every leaf adjacent to a box's parent, one level coarser
    for bx in tree.boxes().iter().filter(|b| b.level >= 2) {
        let parent = tree.get(bx.parent.unwrap());
        for leaf in tree
            .leaves()
            .filter(|l| l.level + 1 == bx.level && l.id != parent.id)
        {
            if parent.is_adjacent(leaf) && !nl.coarse[bx.id].contains(&leaf.id) {
                return Err(format!(
                    "coarse neighbor {} of {} not listed",
                    leaf.id, bx.id
                ));
            }
        }
    }
    Ok(())
}

/// Each tree box's index vector is its children's skeletons in child order,
/// and skeleton/redundant positions partition the index vector.
pub fn check_nested<T: Scalar>(tree: &Tree, skel: &SkeletonSet<T>) -> Result<(), String> {
    for (id, s) in skel.iter() {
        let mut all: Vec<usize> = s.skel_pos.iter().chain(&s.red_pos).copied().collect();
        all.sort_unstable();
        if all != (0..s.index_vector.len()).collect::<Vec<_>>() {
            return Err(format!(
                "box {id}: S and R do not partition the index vector"
            ));
        }
        if s.interp.shape() != (s.skel_pos.len(), s.red_pos.len()) {
            return Err(format!(
                "box {id}: interpolation matrix has the wrong shape"
            ));
        }
        if !s.interp.as_slice().iter().all(|x| x.abs().is_finite()) {
            return Err(format!("box {id}: non-finite interpolation entry"));
        }
        let b = tree.get(id);
        let expect: Vec<usize> = if b.is_leaf() {
            tree.box_points(id).to_vec()
        } else {
            b.children
                .iter()
                .flat_map(|&c| skel.get(c).unwrap().skeleton())
                .collect()
        };
        if s.index_vector != expect {
            return Err(format!(
                "box {id}: index vector is not the children's skeletons"
            ));
        }
        if !b.is_leaf() {
            for g in s.skeleton() {
                let owners = b
                    .children
                    .iter()
                    .filter(|&&c| skel.get(c).unwrap().skeleton().contains(&g))
                    .count();
                if owners != 1 {
                    return Err(format!(
                        "box {id}: skeleton index {g} owned by {owners} children"
                    ));
                }
            }
        }
    }
    let max_iv = skel
        .iter()
        .map(|(_, s)| s.index_vector.len())
        .max()
        .unwrap_or(0);
    if skel.k_max() > max_iv {
        return Err("k_max exceeds the largest index vector".into());
    }
    Ok(())
}

/// Largest ratio of column residual to `epsilon * max column norm` over all
/// boxes, recomputing each proxy matrix.
pub fn id_residual_ratio<K: Kernel>(
    tree: &Tree,
    points: &PointSet,
    kernel: &K,
    skel: &SkeletonSet<K::Scalar>,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (id, s) in skel.iter() {
        let m = proxy_matrix(kernel, tree, points, id, &s.index_vector, skel.proxy());
        let maxcol = max_col_norm(&m);
        if maxcol == 0.0 {
            continue;
        }
        let cid = ColumnId {
            skeleton: s.skel_pos.clone(),
            redundant: s.red_pos.clone(),
            interp: s.interp.clone(),
        };
        worst = worst.max(cid.max_residual(&m) / (skel.epsilon() * maxcol));
    }
    worst
}

pub fn max_col_norm<T: Scalar>(m: &Mat<T>) -> f64 {
    (0..m.cols())
        .map(|c| m.col(c).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// For `n_boxes` random compressed boxes, random charges and 100 random
/// targets outside the box's 3a neighborhood, the largest value of
/// `|far field - skeleton far field| / (epsilon * |q|_2 * max_j |G(y, x_j)|)`.
pub fn far_field_ratio<K: Kernel>(
    tree: &Tree,
    points: &PointSet,
    kernel: &K,
    skel: &SkeletonSet<K::Scalar>,
    n_boxes: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = skel.iter().map(|(id, _)| id).collect();
    let dim = tree.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..n_boxes {
        let id = ids[rng.random_range(0..ids.len())];
        let s = skel.get(id).unwrap();
        let b = tree.get(id);
        let q: Vec<K::Scalar> = random_charges(s.index_vector.len(), rng.random());
        let qnorm = q.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let q_hat = s.compress(&q);
        let skeleton = s.skeleton();
        for _ in 0..100 {
            let y = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
                if v.iter().any(|x| x.abs() > 1.5 + 1e-9) {
                    break (0..dim)
                        .map(|k| b.center[k] + v[k] * b.side())
                        .collect::<Vec<f64>>();
                }
            };
            let mut full = K::Scalar::zero();
            let mut gmax: f64 = 0.0;
            for (&j, &qj) in s.index_vector.iter().zip(&q) {
                let g = kernel.eval(&y, points.point(j));
                gmax = gmax.max(g.abs());
                full += g * qj;
            }
            let mut approx = K::Scalar::zero();
            for (&j, &qj) in skeleton.iter().zip(&q_hat) {
                approx += kernel.eval(&y, points.point(j)) * qj;
            }
            worst = worst.max((full - approx).abs() / (skel.epsilon() * qnorm * gmax));
        }
    }
    worst
}

/// Column ID of an arbitrary matrix, re-exported for oracle comparisons.
pub fn id_rank<T: Scalar>(m: &Mat<T>, eps: f64) -> usize {
    column_id(m, eps).rank()
}

/// Builds a tree whose leaves all sit on one level and returns the relative
/// error of the dense single-level operator applied to random charges,
/// measured against direct summation.
pub fn single_level_relerr<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    leaf_size: usize,
    eps: f64,
    seed: u64,
) -> Result<f64, String> {
    let tree = skelfmm::build_balanced_tree(points, leaf_size).map_err(|e| e.to_string())?;
    let level = tree.depth();
    if level < 2 || tree.leaves().any(|l| l.level != level) {
        return Err(format!("leaves are not all on level {level}"));
    }
    let nl = skelfmm::compute_neighbor_lists(&tree);
    let cfg = skelfmm::ProxyConfig::for_dim(points.dim());
    let skel =
        skelfmm::build_skeletons(&tree, points, kernel, eps, &cfg).map_err(|e| e.to_string())?;
    let op = skelfmm::oracle::single_level_operator(kernel, points, &tree, &nl, &skel, level)
        .map_err(|e| e.to_string())?;
    let q: Vec<K::Scalar> = random_charges(points.len(), seed);
    let mut u = vec![K::Scalar::zero(); points.len()];
    op.gemv_add(&q, &mut u);
    let all: Vec<usize> = (0..points.len()).collect();
    let reference = skelfmm::direct_sum(kernel, points, &q, &all).map_err(|e| e.to_string())?;
    Ok(rel_diff(&u, &reference))
}

/// `|A(B_i, B_j) - E_i A(S_i, S_j) F_j|_F / |A(B_i, B_j)|_F` for a random
/// pair of non-adjacent leaves on the same level, with `E_i = (I; T_i^*)`
/// and `F_j = (I  T_j)` laid out on the skeleton/redundant positions.
pub fn pair_factorization_relerr<K: Kernel>(
    kernel: &K,
    points: &PointSet,
    tree: &Tree,
    skel: &SkeletonSet<K::Scalar>,
    seed: u64,
) -> Result<f64, String> {
    let mut pairs = Vec::new();
    for a in tree.leaves().filter(|l| l.level >= 2) {
        for b in tree.leaves().filter(|l| l.level == a.level && l.id != a.id) {
            if !a.is_adjacent(b) {
                pairs.push((a.id, b.id));
            }
        }
    }
    if pairs.is_empty() {
        return Err("no well-separated leaf pair".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (i, j) = pairs[rng.random_range(0..pairs.len())];
    let (si, sj) = (skel.get(i).unwrap(), skel.get(j).unwrap());

    let e = Mat::from_fn(si.index_vector.len(), si.rank(), |r, c| {
        if let Some(p) = si.skel_pos.iter().position(|&s| s == r) {
            if p == c {
                K::Scalar::one()
            } else {
                K::Scalar::zero()
            }
        } else {
            let p = si.red_pos.iter().position(|&s| s == r).unwrap();
            si.interp[(c, p)].conj()
        }
    });
    let f = Mat::from_fn(sj.rank(), sj.index_vector.len(), |r, c| {
        if let Some(p) = sj.skel_pos.iter().position(|&s| s == c) {
            if p == r {
                K::Scalar::one()
            } else {
                K::Scalar::zero()
            }
        } else {
            let p = sj.red_pos.iter().position(|&s| s == c).unwrap();
            sj.interp[(r, p)]
        }
    });
    let g = |x: usize, y: usize| kernel.eval(points.point(x), points.point(y));
    let a = Mat::from_fn(si.index_vector.len(), sj.index_vector.len(), |r, c| {
        g(si.index_vector[r], sj.index_vector[c])
    });
    let (ski, skj) = (si.skeleton(), sj.skeleton());
    let ass = Mat::from_fn(ski.len(), skj.len(), |r, c| g(ski[r], skj[c]));
    let approx = e.matmul(&ass).matmul(&f);
    Ok(approx.sub(&a).frobenius_norm() / a.frobenius_norm())
}
