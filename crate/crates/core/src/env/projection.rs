use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::lp::solve_minimax_gap;
use crate::model::Instance;

/// Selected columns whose residual against the current basis falls below this (relative to the
/// column norm) are treated as linearly dependent and add no basis vector.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// Residuals of `U`'s columns and of `psi` after removing their components in `span(U_S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `n x m`; column `e` is the residual of displacement column `e`.
    pub u_o: DMatrix<f64>,
    pub psi_o: DVector<f64>,
}

/// Orthonormal basis of the selected columns via modified Gram-Schmidt with one
/// re-orthogonalisation pass.
fn orthonormal_basis(u: &DMatrix<f64>, selected: &[usize]) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(selected.len());
    for &j in selected {
        let col = u.column(j).clone_owned();
        let scale = col.norm().max(1.0);
        let v = remove_components(col, &basis);
        let norm = v.norm();
        if norm > DEPENDENCE_TOL * scale {
            basis.push(v / norm);
        }
    }
    basis
}

fn remove_components(mut v: DVector<f64>, basis: &[DVector<f64>]) -> DVector<f64> {
    for _ in 0..2 {
        for q in basis {
            let c = q.dot(&v);
            v.axpy(-c, q, 1.0);
        }
    }
    v
}

pub fn project_residuals(inst: &Instance, selected: &[usize]) -> Projection {
    let u = inst.displacement();
    if selected.is_empty() {
        return Projection {
            u_o: u.clone(),
            psi_o: inst.psi().clone(),
        };
    }
    let basis = orthonormal_basis(u, selected);
    let mut u_o = DMatrix::zeros(u.nrows(), u.ncols());
    for e in 0..u.ncols() {
        if selected.contains(&e) {
            continue;
        }
        let r = remove_components(u.column(e).clone_owned(), &basis);
        u_o.set_column(e, &r);
    }
    let psi_o = remove_components(inst.psi().clone(), &basis);
    Projection { u_o, psi_o }
}

/// `f` of the single-actuator problem `{e}` posed on the projected data `(U_o(S), psi_o(S))`,
/// keeping actuator `e`'s force bounds. A vanishing residual column has no reach, so the value is
/// `max|psi_o|`.
pub fn projected_single_value(inst: &Instance, selected: &[usize], e: usize) -> Result<f64> {
    inst.check_position(e)?;
    let p = project_residuals(inst, selected);
    let col = p.u_o.column(e).clone_owned();
    if col.iter().all(|&v| v == 0.0) {
        return Ok(p.psi_o.amax());
    }
    let single = Instance::new(
        p.psi_o,
        DMatrix::from_columns(&[col]),
        DVector::from_element(1, inst.f_lower()[e]),
        DVector::from_element(1, inst.f_upper()[e]),
    )?;
    Ok(solve_minimax_gap(&single, &[0])?.d)
}
