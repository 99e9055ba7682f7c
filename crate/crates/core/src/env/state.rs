use crate::env::projection::project_residuals;
use crate::model::Instance;
use crate::oracle::SelectionState;

/// Rows whose residual norm is at or below this are left as zero rows.
pub const ZERO_ROW_TOL: f64 = 1e-12;

/// Encoded state: an `(m + 1) x (n + 1)` row-major grid.
///
/// Rows `0..m` hold the normalised residual of each actuator's displacement column, row `m` holds
/// the normalised deviation residual, and column `n` is the selection mask (`1.0` = selected; the
/// mask entry of the deviation row is always `0.0`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    n: usize,
    m: usize,
    grid: Vec<f64>,
}

impl StateMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        self.m + 1
    }

    pub fn cols(&self) -> usize {
        self.n + 1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.grid[row * (self.n + 1) + col]
    }

    /// The first `n` entries of actuator row `e`.
    pub fn actuator_row(&self, e: usize) -> &[f64] {
        assert!(e < self.m, "actuator row {e} out of range");
        let start = e * (self.n + 1);
        &self.grid[start..start + self.n]
    }

    pub fn psi_row(&self) -> &[f64] {
        let start = self.m * (self.n + 1);
        &self.grid[start..start + self.n]
    }

    pub fn is_masked(&self, e: usize) -> bool {
        self.get(e, self.n) != 0.0
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.m).map(|e| self.is_masked(e)).collect()
    }

    /// Selected positions recovered from the mask column, ascending.
    pub fn selected_positions(&self) -> Vec<usize> {
        (0..self.m).filter(|&e| self.is_masked(e)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.grid
    }

    /// The state of the same selection after cyclically relabelling measurement coordinate `i`
    /// as `(i + shift) % n` in every row. The mask column is unchanged.
    pub fn shifted(&self, shift: usize) -> StateMatrix {
        let width = self.n + 1;
        let mut grid = vec![0.0; self.grid.len()];
        for (dst, src) in grid.chunks_exact_mut(width).zip(self.grid.chunks_exact(width)) {
            for (i, &v) in src[..self.n].iter().enumerate() {
                dst[(i + shift) % self.n] = v;
            }
            dst[self.n] = src[self.n];
        }
        StateMatrix {
            n: self.n,
            m: self.m,
            grid,
        }
    }
}

fn normalized_into(dst: &mut [f64], src: impl Iterator<Item = f64> + Clone) {
    let norm = src.clone().map(|v| v * v).sum::<f64>().sqrt();
    if norm > ZERO_ROW_TOL {
        for (d, v) in dst.iter_mut().zip(src) {
            *d = v / norm;
        }
    }
}

pub fn encode_state(inst: &Instance, selection: &SelectionState) -> StateMatrix {
    let (n, m) = (inst.n(), inst.m());
    let proj = project_residuals(inst, &selection.selected);
    let width = n + 1;
    let mut grid = vec![0.0; (m + 1) * width];
    for e in 0..m {
        let row = &mut grid[e * width..(e + 1) * width];
        if selection.contains(e) {
            row[n] = 1.0;
        } else {
            normalized_into(&mut row[..n], proj.u_o.column(e).iter().copied());
        }
    }
    normalized_into(&mut grid[m * width..m * width + n], proj.psi_o.iter().copied());
    StateMatrix { n, m, grid }
}
