use crate::field::GridSpec;
use crate::occlusion::CloudMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Diffusion,
    Coupling,
    Expected,
}

/// Square sparse matrix in compressed-row form over the `2N` network nodes
/// (drive image first, then response image, each row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseLaplacian {
    pub role: Role,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseLaplacian {
    fn from_rows(role: Role, dim: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        debug_assert_eq!(row_ptr.len(), dim + 1);
        Self {
            role,
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|e| e.0 == c).map_or(0.0, |e| e.1)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.row(r).map(|e| e.1).sum()).collect()
    }

    /// `y = L x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        out
    }
}

/// Graph Laplacian `D − A` of the nearest-neighbour lattice, one copy per
/// image. Mirrored boundary ghosts cancel against the cell itself, so a
/// boundary node's degree counts only its in-domain neighbours.
pub fn build_l1(g: &GridSpec) -> SparseLaplacian {
    let n = g.len();
    let (nx, ny) = (g.nx, g.ny);
    let mut rows = Vec::with_capacity(2 * n);
    for image in 0..2 {
        let off = image * n;
        for j in 0..ny {
            for i in 0..nx {
                let mut nbrs = Vec::with_capacity(4);
                if i > 0 {
                    nbrs.push(g.index(i - 1, j));
                }
                if i + 1 < nx {
                    nbrs.push(g.index(i + 1, j));
                }
                if j > 0 {
                    nbrs.push(g.index(i, j - 1));
                }
                if j + 1 < ny {
                    nbrs.push(g.index(i, j + 1));
                }
                let degree = nbrs.len() as i32;
                let mut row: Vec<(usize, f64)> = nbrs.into_iter().map(|c| (off + c, -1.0)).collect();
                row.push((off + g.index(i, j), f64::from(degree)));
                rows.push(row);
            }
        }
    }
    SparseLaplacian::from_rows(Role::Diffusion, 2 * n, rows)
}

/// Drive-to-response coupling for one cloud configuration. Drive rows are
/// empty; response row `N + q` reads `+1` at `q` and `−1` at `N + q` unless
/// cell `q` is occluded.
pub fn build_l2(mask: &CloudMask) -> SparseLaplacian {
    let weights: Vec<f64> = mask
        .cells()
        .iter()
        .map(|&hidden| if hidden { 0.0 } else { 1.0 })
        .collect();
    coupling_from_weights(Role::Coupling, &weights)
}

pub(crate) fn coupling_from_weights(role: Role, weights: &[f64]) -> SparseLaplacian {
    let n = weights.len();
    let drive = (0..n).map(|_| Vec::new());
    let response = weights.iter().enumerate().map(move |(q, &w)| {
        if w == 0.0 {
            Vec::new()
        } else {
            vec![(q, w), (n + q, -w)]
        }
    });
    SparseLaplacian::from_rows(role, 2 * n, drive.chain(response))
}
