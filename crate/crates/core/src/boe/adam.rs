use super::table::EmbeddingTable;

/// Adam moments for an embedding table, updated lazily: only rows that receive
/// a gradient in a step are touched, while the step counter (and therefore the
/// bias correction) advances every step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(table: &EmbeddingTable) -> Self {
        let n = table.weights().len();
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One optimizer step. `grads` holds (row, gradient row) pairs.
    pub fn step<'a, I>(&mut self, table: &mut EmbeddingTable, grads: I, lr: f64)
    where
        I: IntoIterator<Item = (u32, &'a [f64])>,
    {
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let dim = table.dim();
        for (row, g) in grads {
            let start = row as usize * dim;
            let w = table.row_mut(row);
            let m = &mut self.m[start..start + dim];
            let v = &mut self.v[start..start + dim];
            for k in 0..dim {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                w[k] -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}
