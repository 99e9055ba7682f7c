use crate::env::StateMatrix;

/// Network input: row `e` is `[u_o,norm(e) | psi_o,norm]`, an `m x 2n` row-major matrix. The
/// selection mask is not part of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInput {
    rows: usize,
    width: usize,
    data: Vec<f64>,
}

impl NetworkInput {
    pub fn from_rows(rows: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * width, "input storage does not match shape");
        Self { rows, width, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.data[e * self.width..(e + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

pub fn build_input(state: &StateMatrix) -> NetworkInput {
    let (n, m) = (state.n(), state.m());
    let width = 2 * n;
    let mut data = Vec::with_capacity(m * width);
    let psi = state.psi_row();
    for e in 0..m {
        data.extend_from_slice(state.actuator_row(e));
        data.extend_from_slice(psi);
    }
    NetworkInput {
        rows: m,
        width,
        data,
    }
}
