use super::balance::offsets;
use super::Tree;

/// Per-box neighbor lists, each sorted by box id (Morton order within a level).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborLists {
    /// Adjacent same-level boxes, the box itself included.
    pub colleagues: Vec<Vec<usize>>,
    /// Leaves one level up that are adjacent colleagues of the parent.
    pub coarse: Vec<Vec<usize>>,
    /// For leaves: children of adjacent non-leaf colleagues.
    pub fine: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn max_colleagues(&self) -> usize {
        self.colleagues.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn n_coarse_pairs(&self) -> usize {
        self.coarse.iter().map(Vec::len).sum()
    }

    pub fn n_fine_pairs(&self) -> usize {
        self.fine.iter().map(Vec::len).sum()
    }
}

pub fn compute_neighbor_lists(tree: &Tree) -> NeighborLists {
    let n = tree.n_boxes();
    let dim = tree.dim();
    let offs = offsets(dim);

    let colleagues: Vec<Vec<usize>> = tree
        .boxes()
        .iter()
        .map(|b| {
            let mut list: Vec<usize> = offs
                .iter()
                .filter_map(|o| {
                    let mut a = [0u32; 3];
                    for k in 0..dim {
                        let v = i64::from(b.anchor[k]) + o[k];
                        if v < 0 {
                            return None;
                        }
                        a[k] = v as u32;
                    }
                    tree.find(b.level, a)
                })
                .collect();
            list.sort_unstable();
            list
        })
        .collect();

    let mut coarse = vec![Vec::new(); n];
    let mut fine = vec![Vec::new(); n];
    for b in tree.boxes() {
        if let Some(p) = b.parent {
            coarse[b.id] = colleagues[p]
                .iter()
                .copied()
                .filter(|&c| c != p && tree.get(c).is_leaf())
                .collect();
        }
        if b.is_leaf() {
            let mut list: Vec<usize> = colleagues[b.id]
                .iter()
                .filter(|&&c| c != b.id)
                .flat_map(|&c| tree.get(c).children.iter().copied())
                .collect();
            list.sort_unstable();
            fine[b.id] = list;
        }
    }

    NeighborLists {
        colleagues,
        coarse,
        fine,
    }
}
