use std::io::Read;
use std::path::Path;

use crate::error::{FmmError, Result};

/// `N` points in 2 or 3 dimensions, stored interleaved. The position of a
/// point in the set is its global index.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(FmmError::InvalidParameter(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(FmmError::LengthMismatch {
                expected: coords.len() / dim * dim + dim,
                got: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(FmmError::NonFinitePoint { index: i / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Reorders points so that new index `i` holds old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &p in perm {
            coords.extend_from_slice(self.point(p));
        }
        Self {
            dim: self.dim,
            coords,
        }
    }

    /// Fails with the lowest pair of indices sharing coordinates.
    pub fn ensure_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut worst: Option<(usize, usize)> = None;
        for w in order.windows(2) {
            if self.point(w[0]) == self.point(w[1]) {
                let pair = (w[0].min(w[1]), w[0].max(w[1]));
                worst = Some(worst.map_or(pair, |p| p.min(pair)));
            }
        }
        match worst {
            Some((first, second)) => Err(FmmError::DuplicatePoint { first, second }),
            None => Ok(()),
        }
    }

    /// Reads one point per row, `dim` decimal columns, no header.
    pub fn from_csv_reader<R: Read>(reader: R, dim: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut coords = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| FmmError::Parse(e.to_string()))?;
            if rec.len() != dim {
                return Err(FmmError::Parse(format!(
                    "row {}: expected {dim} columns, found {}",
                    row + 1,
                    rec.len()
                )));
            }
            for field in rec.iter() {
                let v: f64 = field.parse().map_err(|_| {
                    FmmError::Parse(format!("row {}: bad number '{field}'", row + 1))
                })?;
                coords.push(v);
            }
        }
        Self::new(dim, coords)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(f), dim)
    }
}
