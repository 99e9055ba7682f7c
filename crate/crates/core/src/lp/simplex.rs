//! Dense two-phase primal simplex for small box-bounded LPs.
//!
//! Problems have the form `minimize c'x  s.t.  A x <= b,  lower <= x <= upper`, with finite lower
//! bounds. Variables are shifted to `x - lower >= 0` and finite upper bounds become explicit rows.
//! Pricing uses the most negative reduced cost (lowest index on ties) and switches to Bland's rule
//! once the iteration count passes `2 * (rows + cols)`; the ratio test always breaks ties on the
//! lowest basic variable index.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    /// Row-major constraint matrix, one entry per `<=` row.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

struct Tableau {
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may never enter the basis (artificials during phase two).
    forbidden_from: usize,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        {
            let pivot_row = &mut self.data[row * w..(row + 1) * w];
            for v in pivot_row.iter_mut() {
                *v /= p;
            }
            pivot_row[col] = 1.0;
        }
        let pivot_row: Vec<f64> = self.data[row * w..(row + 1) * w].to_vec();
        for r in 0..self.rows() {
            if r == row {
                continue;
            }
            let factor = self.data[r * w + col];
            if factor != 0.0 {
                let target = &mut self.data[r * w..(r + 1) * w];
                for (t, p) in target.iter_mut().zip(&pivot_row) {
                    *t -= factor * p;
                }
                target[col] = 0.0;
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for (t, p) in self.obj.iter_mut().zip(&pivot_row) {
                *t -= factor * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn entering(&self, bland: bool, tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.forbidden_from {
            let rc = self.obj[j];
            if rc < -tol {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, b)) if rc >= b => {}
                    _ => best = Some((j, rc)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, col: usize, tol: f64) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows() {
            let a = self.at(r, col);
            if a > tol {
                let ratio = self.at(r, rhs).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let scale = 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio - scale
                            || ((ratio - bratio).abs() <= scale && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
        }
        best.map(|(r, _)| r)
    }

    /// Runs pivots until optimal for the current objective row.
    fn optimize(
        &mut self,
        iterations: &mut usize,
        bland_after: usize,
        opts: &SimplexOptions,
    ) -> LpStatus {
        loop {
            let Some(col) = self.entering(*iterations >= bland_after, opts.tol) else {
                return LpStatus::Optimal;
            };
            if *iterations >= opts.max_iterations {
                return LpStatus::IterationLimit;
            }
            let Some(row) = self.leaving(col, opts.tol) else {
                return LpStatus::Unbounded;
            };
            self.pivot(row, col);
            *iterations += 1;
        }
    }
}

/// Solves `minimize c'x  s.t.  A x <= b,  lower <= x <= upper`.
///
/// Malformed input (shape mismatches, non-finite lower bounds) is an `Err`; solver outcomes
/// are reported through [`LpSolution::status`].
pub fn simplex_solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    let nv = lp.cost.len();
    if lp.lower.len() != nv || lp.upper.len() != nv {
        return Err(Error::Config(format!(
            "LP has {nv} variables but bound vectors of length {}/{}",
            lp.lower.len(),
            lp.upper.len()
        )));
    }
    if lp.rows.len() != lp.rhs.len() || lp.rows.iter().any(|r| r.len() != nv) {
        return Err(Error::Config("LP constraint matrix shape mismatch".into()));
    }
    if lp.lower.iter().any(|l| !l.is_finite()) {
        return Err(Error::Config("LP lower bounds must be finite".into()));
    }

    // Shifted rows: A x' <= b - A l, then x'_j <= u_j - l_j.
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .rows
        .iter()
        .zip(&lp.rhs)
        .map(|(row, &b)| {
            let shift: f64 = row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
            (row.clone(), b - shift)
        })
        .collect();
    for j in 0..nv {
        if lp.upper[j].is_finite() {
            let width = lp.upper[j] - lp.lower[j];
            if width < -opts.tol {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    x: lp.lower.clone(),
                    objective: f64::NAN,
                    iterations: 0,
                });
            }
            let mut row = vec![0.0; nv];
            row[j] = 1.0;
            rows.push((row, width.max(0.0)));
        }
    }

    let nr = rows.len();
    let needs_artificial: Vec<bool> = rows.iter().map(|(_, b)| *b < 0.0).collect();
    let n_art = needs_artificial.iter().filter(|&&a| a).count();
    let n_real = nv + nr;
    let ncols = n_real + n_art;
    let width = ncols + 1;

    let mut data = vec![0.0; nr * width];
    let mut basis = vec![0; nr];
    let mut next_art = n_real;
    for (r, (row, b)) in rows.iter().enumerate() {
        let sign = if needs_artificial[r] { -1.0 } else { 1.0 };
        let line = &mut data[r * width..(r + 1) * width];
        for (j, a) in row.iter().enumerate() {
            line[j] = sign * a;
        }
        line[nv + r] = sign;
        line[ncols] = sign * b;
        if needs_artificial[r] {
            line[next_art] = 1.0;
            basis[r] = next_art;
            next_art += 1;
        } else {
            basis[r] = nv + r;
        }
    }

    let mut tab = Tableau {
        width,
        data,
        obj: vec![0.0; width],
        basis,
        forbidden_from: ncols,
    };
    let bland_after = 2 * (nr + ncols);
    let mut iterations = 0;

    if n_art > 0 {
        // Phase one: minimise the sum of artificials.
        for r in 0..nr {
            if tab.basis[r] >= n_real {
                for j in 0..width {
                    tab.obj[j] -= tab.at(r, j);
                }
            }
        }
        for j in n_real..ncols {
            tab.obj[j] = 0.0;
        }
        match tab.optimize(&mut iterations, bland_after, opts) {
            LpStatus::Optimal => {}
            status => {
                return Ok(LpSolution {
                    status,
                    x: lp.lower.clone(),
                    objective: f64::NAN,
                    iterations,
                })
            }
        }
        let infeasibility = -tab.obj[ncols];
        let scale = 1.0 + rows.iter().fold(0.0_f64, |acc, (_, b)| acc.max(b.abs()));
        if infeasibility > opts.tol * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: lp.lower.clone(),
                objective: f64::NAN,
                iterations,
            });
        }
        // Drive remaining artificials out of the basis where possible; rows with no usable
        // column are redundant and stay pinned at zero.
        for r in 0..nr {
            if tab.basis[r] >= n_real {
                let col = (0..n_real)
                    .filter(|&j| tab.at(r, j).abs() > opts.tol)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
                if let Some(col) = col {
                    tab.pivot(r, col);
                }
            }
        }
        tab.forbidden_from = n_real;
    }

    // Phase two objective row.
    tab.obj.iter_mut().for_each(|v| *v = 0.0);
    tab.obj[..nv].copy_from_slice(&lp.cost);
    for r in 0..nr {
        let b = tab.basis[r];
        let cb = if b < nv { lp.cost[b] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                tab.obj[j] -= cb * tab.at(r, j);
            }
        }
    }
    let status = tab.optimize(&mut iterations, bland_after, opts);

    let mut x = lp.lower.clone();
    for r in 0..nr {
        let b = tab.basis[r];
        if b < nv {
            x[b] += tab.at(r, ncols).max(0.0);
        }
    }
    for (xj, &uj) in x.iter_mut().zip(&lp.upper) {
        if *xj > uj {
            *xj = uj;
        }
    }
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status,
        x,
        objective,
        iterations,
    })
}
