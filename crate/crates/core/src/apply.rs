//! Matrix-free FMM apply over neighbor lists only.
//!
//! Every box carries four vectors: outgoing `q_box` / `q_hat` and incoming
//! `u_box` / `u_hat`. After the upward pass, three translation operators run
//! between neighbors at levels 2..L:
//!
//! * ifo, colleague `B_j` to `B_i`: `u_box += A(B_i, B_j) q_box_j`,
//!   `u_hat -= A(S_i, S_j) q_hat_j`
//! * ifs, coarse leaf `L_j` to `B_i`: `u_box += A(B_i, L_j) q_j`,
//!   `u_hat -= A(S_i, L_j) q_j`
//! * tfo, fine box `B_j` to leaf `L_i`: `u_box += A(L_i, B_j) q_box_j
//!   - A(L_i, S_j) q_hat_j`
//!
//! Level-1 boxes interact densely with each other and with nothing else; no
//! translation touches level 1 as a target of ifo or ifs. The downward pass
//! then hands each child the parent's potential at the child's skeleton and
//! interpolates with `(I; T^*)`.

use rayon::prelude::*;

use crate::error::{FmmError, Result};
use crate::kernel::Kernel;
use crate::linalg::Mat;
use crate::oracle::direct_sum_all;
use crate::points::PointSet;
use crate::scalar::Scalar;
use crate::skeleton::SkeletonSet;
use crate::tree::{NeighborLists, Tree};

/// Read-only operands of one apply.
pub struct FmmContext<'a, K: Kernel> {
    pub tree: &'a Tree,
    pub neighbors: &'a NeighborLists,
    pub skeletons: &'a SkeletonSet<K::Scalar>,
    pub points: &'a PointSet,
    pub kernel: &'a K,
}

impl<K: Kernel> Clone for FmmContext<'_, K> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<K: Kernel> Copy for FmmContext<'_, K> {}

/// Outgoing and incoming expansions, indexed by box id. Boxes at level 0 hold
/// empty vectors; `q_hat`/`u_hat` are empty at level 1 as well.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionState<T> {
    pub q_box: Vec<Vec<T>>,
    pub q_hat: Vec<Vec<T>>,
    pub u_box: Vec<Vec<T>>,
    pub u_hat: Vec<Vec<T>>,
}

/// A box id with two per-box vectors.
type BoxPair<T> = (usize, Vec<T>, Vec<T>);

/// Sizes of the translation work lists.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslationCounts {
    pub ifo: usize,
    pub ifs: usize,
    pub tfo: usize,
    pub level1: usize,
}

pub fn translation_counts(tree: &Tree, nl: &NeighborLists) -> TranslationCounts {
    let mut c = TranslationCounts::default();
    for b in tree.boxes() {
        if b.level >= 2 {
            c.ifo += nl.colleagues[b.id].len();
            c.ifs += nl.coarse[b.id].len();
        }
        if b.level >= 1 && b.is_leaf() {
            c.tfo += nl.fine[b.id].len();
        }
    }
    let l1 = tree.level(1).len();
    c.level1 = l1 * l1;
    c
}

/// Kernel block between two index vectors with coordinates gathered
/// contiguously. Entries with equal global index are 0.
struct BlockBuilder<T> {
    dim: usize,
    targets: Vec<f64>,
    sources: Vec<f64>,
    block: Mat<T>,
}

impl<T: Scalar> BlockBuilder<T> {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            targets: Vec::new(),
            sources: Vec::new(),
            block: Mat::zeros(0, 0),
        }
    }

    fn gather(points: &PointSet, idx: &[usize], out: &mut Vec<f64>) {
        out.clear();
        for &i in idx {
            out.extend_from_slice(points.point(i));
        }
    }

    fn set_targets(&mut self, points: &PointSet, idx: &[usize]) {
        Self::gather(points, idx, &mut self.targets);
    }

    fn build<K: Kernel<Scalar = T>>(
        &mut self,
        kernel: &K,
        points: &PointSet,
        tgt: &[usize],
        src: &[usize],
    ) -> &Mat<T> {
        Self::gather(points, src, &mut self.sources);
        let d = self.dim;
        self.block.reset(tgt.len(), src.len());
        for (c, (&s, y)) in src.iter().zip(self.sources.chunks_exact(d)).enumerate() {
            let col = self.block.col_mut(c);
            for ((slot, &t), x) in col.iter_mut().zip(tgt).zip(self.targets.chunks_exact(d)) {
                if t != s {
                    *slot = kernel.eval(x, y);
                }
            }
        }
        &self.block
    }
}

/// `y -= M[rows, cols] x`
fn gemv_sub_sub<T: Scalar>(m: &Mat<T>, rows: &[usize], cols: &[usize], x: &[T], y: &mut [T]) {
    for (&c, &xc) in cols.iter().zip(x) {
        let col = m.col(c);
        for (yr, &r) in y.iter_mut().zip(rows) {
            *yr -= col[r] * xc;
        }
    }
}

fn all_positions(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Leaf charges from `q`, then `q_box`/`q_hat` for every box up to level 1.
pub fn upward_pass<K: Kernel>(
    ctx: FmmContext<'_, K>,
    q: &[K::Scalar],
) -> Result<ExpansionState<K::Scalar>> {
    let tree = ctx.tree;
    if q.len() != tree.n_points() {
        return Err(FmmError::LengthMismatch {
            expected: tree.n_points(),
            got: q.len(),
        });
    }
    let n = tree.n_boxes();
    let mut q_box: Vec<Vec<K::Scalar>> = vec![Vec::new(); n];
    let mut q_hat: Vec<Vec<K::Scalar>> = vec![Vec::new(); n];

    for level in (1..=tree.depth()).rev() {
        let computed: Vec<BoxPair<K::Scalar>> = tree
            .level(level)
            .par_iter()
            .map(|&id| {
                let b = tree.get(id);
                let qb: Vec<K::Scalar> = if b.is_leaf() {
                    tree.box_points(id).iter().map(|&i| q[i]).collect()
                } else {
                    b.children
                        .iter()
                        .flat_map(|&c| q_hat[c].iter().copied())
                        .collect()
                };
                let qh = match ctx.skeletons.get(id) {
                    Some(s) if level >= 2 => s.compress(&qb),
                    _ => Vec::new(),
                };
                (id, qb, qh)
            })
            .collect();
        for (id, qb, qh) in computed {
            q_box[id] = qb;
            q_hat[id] = qh;
        }
    }

    let u_box = q_box
        .iter()
        .map(|v| vec![K::Scalar::zero(); v.len()])
        .collect();
    let u_hat = q_hat
        .iter()
        .map(|v| vec![K::Scalar::zero(); v.len()])
        .collect();
    Ok(ExpansionState {
        q_box,
        q_hat,
        u_box,
        u_hat,
    })
}

type Increment<T> = (usize, Vec<T>, Vec<T>);

fn apply_increments<T: Scalar>(state: &mut ExpansionState<T>, incs: Vec<Increment<T>>) {
    for (id, du_box, du_hat) in incs {
        for (u, d) in state.u_box[id].iter_mut().zip(du_box) {
            *u += d;
        }
        for (u, d) in state.u_hat[id].iter_mut().zip(du_hat) {
            *u += d;
        }
    }
}

/// Colleague translations for every box at levels 2..L.
pub fn translate_ifo<K: Kernel>(ctx: FmmContext<'_, K>, state: &mut ExpansionState<K::Scalar>) {
    let tree = ctx.tree;
    let sk = ctx.skeletons;
    let targets: Vec<usize> = (2..=tree.depth())
        .flat_map(|l| tree.level(l).iter().copied())
        .collect();
    let st = &*state;
    let incs: Vec<Increment<K::Scalar>> = targets
        .par_iter()
        .map_init(
            || BlockBuilder::new(tree.dim()),
            |bb, &i| {
                let si = sk.get(i).expect("skeleton at level >= 2");
                bb.set_targets(ctx.points, &si.index_vector);
                let mut du_box = vec![K::Scalar::zero(); si.index_vector.len()];
                let mut du_hat = vec![K::Scalar::zero(); si.rank()];
                for &j in &ctx.neighbors.colleagues[i] {
                    let sj = sk.get(j).expect("skeleton at level >= 2");
                    let a = bb.build(ctx.kernel, ctx.points, &si.index_vector, &sj.index_vector);
                    a.gemv_add(&st.q_box[j], &mut du_box);
                    gemv_sub_sub(a, &si.skel_pos, &sj.skel_pos, &st.q_hat[j], &mut du_hat);
                }
                (i, du_box, du_hat)
            },
        )
        .collect();
    apply_increments(state, incs);
}

/// Coarse-neighbor translations for every box at levels 2..L.
pub fn translate_ifs<K: Kernel>(ctx: FmmContext<'_, K>, state: &mut ExpansionState<K::Scalar>) {
    let tree = ctx.tree;
    let sk = ctx.skeletons;
    let targets: Vec<usize> = (2..=tree.depth())
        .flat_map(|l| tree.level(l).iter().copied())
        .filter(|&i| !ctx.neighbors.coarse[i].is_empty())
        .collect();
    let st = &*state;
    let incs: Vec<Increment<K::Scalar>> = targets
        .par_iter()
        .map_init(
            || BlockBuilder::new(tree.dim()),
            |bb, &i| {
                let si = sk.get(i).expect("skeleton at level >= 2");
                bb.set_targets(ctx.points, &si.index_vector);
                let mut du_box = vec![K::Scalar::zero(); si.index_vector.len()];
                let mut du_hat = vec![K::Scalar::zero(); si.rank()];
                for &j in &ctx.neighbors.coarse[i] {
                    let leaf = tree.box_points(j);
                    let a = bb.build(ctx.kernel, ctx.points, &si.index_vector, leaf);
                    a.gemv_add(&st.q_box[j], &mut du_box);
                    gemv_sub_sub(
                        a,
                        &si.skel_pos,
                        &all_positions(leaf.len()),
                        &st.q_box[j],
                        &mut du_hat,
                    );
                }
                (i, du_box, du_hat)
            },
        )
        .collect();
    apply_increments(state, incs);
}

/// Fine-neighbor translations for every leaf at levels 1..L.
pub fn translate_tfo<K: Kernel>(ctx: FmmContext<'_, K>, state: &mut ExpansionState<K::Scalar>) {
    let tree = ctx.tree;
    let sk = ctx.skeletons;
    let targets: Vec<usize> = tree
        .boxes()
        .iter()
        .filter(|b| b.level >= 1 && b.is_leaf() && !ctx.neighbors.fine[b.id].is_empty())
        .map(|b| b.id)
        .collect();
    let st = &*state;
    let incs: Vec<Increment<K::Scalar>> = targets
        .par_iter()
        .map_init(
            || BlockBuilder::new(tree.dim()),
            |bb, &i| {
                let leaf = tree.box_points(i);
                bb.set_targets(ctx.points, leaf);
                let mut du_box = vec![K::Scalar::zero(); leaf.len()];
                let rows = all_positions(leaf.len());
                for &j in &ctx.neighbors.fine[i] {
                    let sj = sk.get(j).expect("skeleton at level >= 2");
                    let a = bb.build(ctx.kernel, ctx.points, leaf, &sj.index_vector);
                    a.gemv_add(&st.q_box[j], &mut du_box);
                    gemv_sub_sub(a, &rows, &sj.skel_pos, &st.q_hat[j], &mut du_box);
                }
                (i, du_box, Vec::new())
            },
        )
        .collect();
    apply_increments(state, incs);
}

/// Dense interaction among all level-1 boxes.
pub fn level1_dense<K: Kernel>(ctx: FmmContext<'_, K>, state: &mut ExpansionState<K::Scalar>) {
    let tree = ctx.tree;
    let sk = ctx.skeletons;
    let ids = tree.level(1);
    let st = &*state;
    let incs: Vec<Increment<K::Scalar>> = ids
        .par_iter()
        .map_init(
            || BlockBuilder::new(tree.dim()),
            |bb, &i| {
                let iv_i = sk.index_vector(i);
                bb.set_targets(ctx.points, iv_i);
                let mut du_box = vec![K::Scalar::zero(); iv_i.len()];
                for &j in ids {
                    let a = bb.build(ctx.kernel, ctx.points, iv_i, sk.index_vector(j));
                    a.gemv_add(&st.q_box[j], &mut du_box);
                }
                (i, du_box, Vec::new())
            },
        )
        .collect();
    apply_increments(state, incs);
}

/// Parent-to-child propagation for levels 2..L; returns potentials in the
/// original point order.
pub fn downward_pass<K: Kernel>(
    ctx: FmmContext<'_, K>,
    state: &mut ExpansionState<K::Scalar>,
) -> Vec<K::Scalar> {
    let tree = ctx.tree;
    let sk = ctx.skeletons;
    for level in 2..=tree.depth() {
        let st = &*state;
        let updates: Vec<BoxPair<K::Scalar>> = tree
            .level(level)
            .par_iter()
            .map(|&i| {
                let b = tree.get(i);
                let s = sk.get(i).expect("skeleton at level >= 2");
                let p = b.parent.expect("level >= 2 has a parent");
                let offset: usize = tree
                    .get(p)
                    .children
                    .iter()
                    .take_while(|&&c| c != i)
                    .map(|&c| sk.get(c).map_or(0, |x| x.rank()))
                    .sum();
                let mut u_hat = st.u_hat[i].clone();
                for (h, &v) in u_hat
                    .iter_mut()
                    .zip(&st.u_box[p][offset..offset + s.rank()])
                {
                    *h += v;
                }
                let mut u_box = st.u_box[i].clone();
                s.expand_add(&u_hat, &mut u_box);
                (i, u_box, u_hat)
            })
            .collect();
        for (i, ub, uh) in updates {
            state.u_box[i] = ub;
            state.u_hat[i] = uh;
        }
    }

    let mut u = vec![K::Scalar::zero(); tree.n_points()];
    for leaf in tree.leaves() {
        if leaf.level == 0 {
            continue;
        }
        for (&g, &v) in tree.box_points(leaf.id).iter().zip(&state.u_box[leaf.id]) {
            u[g] = v;
        }
    }
    u
}

/// `u ~= A q`. Trees shallower than two levels are summed directly.
pub fn fmm_apply<K: Kernel>(ctx: FmmContext<'_, K>, q: &[K::Scalar]) -> Result<Vec<K::Scalar>> {
    if q.len() != ctx.tree.n_points() {
        return Err(FmmError::LengthMismatch {
            expected: ctx.tree.n_points(),
            got: q.len(),
        });
    }
    if ctx.tree.depth() < 2 {
        return Ok(direct_sum_all(ctx.kernel, ctx.points, q));
    }
    let mut state = upward_pass(ctx, q)?;
    translate_ifo(ctx, &mut state);
    translate_ifs(ctx, &mut state);
    translate_tfo(ctx, &mut state);
    level1_dense(ctx, &mut state);
    Ok(downward_pass(ctx, &mut state))
}
