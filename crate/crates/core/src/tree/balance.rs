use std::collections::BTreeSet;

use super::morton::{deinterleave, interleave};
use super::{Builder, Tree};

/// Refines leaves until no leaf is adjacent to a box two or more levels
/// finer than itself. The check runs against every box, not only leaves.
/// Only refinements are performed, in (level, Morton) order, to a fixpoint.
pub fn balance_2to1(tree: Tree) -> Tree {
    let dim = tree.dim;
    let mut b = Builder::from_tree(tree);
    loop {
        let mut refine: BTreeSet<(u32, u64, usize)> = BTreeSet::new();
        for node in &b.nodes {
            if node.level < 2 {
                continue;
            }
            let m = node.level;
            let a = deinterleave(node.morton, dim, m);
            let g = [a[0] >> 2, a[1] >> 2, a[2] >> 2];
            let cells = 1i64 << (m - 2);
            for off in offsets(dim) {
                if off.iter().all(|&o| o == 0) {
                    continue;
                }
                let mut q = [0u32; 3];
                let mut valid = true;
                for k in 0..dim {
                    let qk = i64::from(g[k]) + off[k];
                    // closed cell [qk, qk+1] at level m-2 must touch [a/4, (a+1)/4]
                    let ak = i64::from(a[k]);
                    if qk < 0 || qk >= cells || 4 * qk > ak + 1 || 4 * qk + 4 < ak {
                        valid = false;
                        break;
                    }
                    q[k] = qk as u32;
                }
                if !valid {
                    continue;
                }
                if let Some(leaf) = deepest_covering(&b, q, m - 2) {
                    let n = &b.nodes[leaf];
                    refine.insert((n.level, n.morton, leaf));
                }
            }
        }
        if refine.is_empty() {
            break;
        }
        for (_, _, id) in refine {
            if b.nodes[id].children.is_empty() {
                b.split(id);
            }
        }
    }
    b.finish()
}

/// The existing box covering cell `q` at `level`, if it is a leaf.
fn deepest_covering(b: &Builder, q: [u32; 3], level: u32) -> Option<usize> {
    for j in (0..=level).rev() {
        let shift = level - j;
        let anc = [q[0] >> shift, q[1] >> shift, q[2] >> shift];
        if let Some(&id) = b.map.get(&(j, interleave(anc, b.dim, j))) {
            return b.nodes[id].children.is_empty().then_some(id);
        }
    }
    None
}

pub(super) fn offsets(dim: usize) -> Vec<[i64; 3]> {
    let mut out = Vec::with_capacity(3usize.pow(dim as u32));
    let zr: &[i64] = if dim == 3 { &[-1, 0, 1] } else { &[0] };
    for &z in zr {
        for y in -1..=1 {
            for x in -1..=1 {
                out.push([x, y, z]);
            }
        }
    }
    out
}
