//! Column interpolative decomposition by greedy column-pivoted QR.

use crate::linalg::Mat;
use crate::scalar::Scalar;

/// `M[:, redundant] ~= M[:, skeleton] * interp`, with both position lists
/// ascending and `interp` of shape `|skeleton| x |redundant|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnId<T> {
    pub skeleton: Vec<usize>,
    pub redundant: Vec<usize>,
    pub interp: Mat<T>,
}

impl<T: Scalar> ColumnId<T> {
    pub fn rank(&self) -> usize {
        self.skeleton.len()
    }

    /// Largest column norm of `M[:, R] - M[:, S] T`.
    pub fn max_residual(&self, m: &Mat<T>) -> f64 {
        let ms = m.select(&(0..m.rows()).collect::<Vec<_>>(), &self.skeleton);
        let approx = ms.matmul(&self.interp);
        (0..self.redundant.len())
            .map(|c| {
                m.col(self.redundant[c])
                    .iter()
                    .zip(approx.col(c))
                    .map(|(&a, &b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Rank is the smallest `k` for which every remaining residual column norm
/// is at most `epsilon` times the largest column norm of `m`. Ties in the
/// pivot choice go to the lowest original column position.
pub fn column_id<T: Scalar>(m: &Mat<T>, epsilon: f64) -> ColumnId<T> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut piv: Vec<usize> = (0..cols).collect();

    let col_norm2 = |a: &Mat<T>, c: usize, from: usize| -> f64 {
        a.col(c)[from..].iter().map(|x| x.norm_sqr()).sum()
    };
    let max0 = (0..cols)
        .map(|c| col_norm2(&a, c, 0))
        .fold(0.0, f64::max)
        .sqrt();
    let tol = epsilon * max0;

    let mut k = 0;
    let steps = rows.min(cols);
    let mut v = Vec::with_capacity(rows);
    if max0 > 0.0 {
        while k < steps {
            // trailing norms are recomputed from scratch each step
            let mut best = k;
            let mut best_norm = -1.0;
            for c in k..cols {
                let n = col_norm2(&a, c, k);
                if n > best_norm || (n == best_norm && piv[c] < piv[best]) {
                    best = c;
                    best_norm = n;
                }
            }
            if best_norm.sqrt() <= tol {
                break;
            }
            a.swap_cols(k, best);
            piv.swap(k, best);

            // Householder reflector zeroing a[k+1.., k]
            let x = &a.col(k)[k..];
            let xnorm = best_norm.sqrt();
            let alpha = -(x[0].sign().scale(xnorm));
            v.clear();
            v.extend_from_slice(x);
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|t| t.norm_sqr()).sum();
            {
                let col = a.col_mut(k);
                col[k] = alpha;
                for t in &mut col[k + 1..] {
                    *t = T::zero();
                }
            }
            if vnorm2 > 0.0 {
                for c in k + 1..cols {
                    let col = &mut a.col_mut(c)[k..];
                    let dot: T = v
                        .iter()
                        .zip(col.iter())
                        .map(|(&vi, &ci)| vi.conj() * ci)
                        .sum();
                    let f = dot.scale(2.0 / vnorm2);
                    for (ci, &vi) in col.iter_mut().zip(&v) {
                        *ci -= vi * f;
                    }
                }
            }
            k += 1;
        }
    }

    // T = R11^{-1} R12 by back substitution, in pivot order.
    let r = cols - k;
    let mut t = Mat::<T>::zeros(k, r);
    for j in 0..r {
        let rhs = a.col(k + j);
        let out = t.col_mut(j);
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for l in i + 1..k {
                s -= a[(i, l)] * out[l];
            }
            out[i] = s / a[(i, i)];
        }
    }

    // Sort both index sets ascending and permute T to match.
    let mut s_order: Vec<usize> = (0..k).collect();
    s_order.sort_by_key(|&i| piv[i]);
    let mut r_order: Vec<usize> = (0..r).collect();
    r_order.sort_by_key(|&j| piv[k + j]);
    let interp = Mat::from_fn(k, r, |i, j| t[(s_order[i], r_order[j])]);

    ColumnId {
        skeleton: s_order.iter().map(|&i| piv[i]).collect(),
        redundant: r_order.iter().map(|&j| piv[k + j]).collect(),
        interp,
    }
}
